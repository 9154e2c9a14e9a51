//! A full config-driven run, the same as `upslope polygon --config …`.
//!
//! Usage: `cargo run --release --example run_experiment`

use upslope::experiment::{cmd_charpoly, cmd_polygon, cmd_verify, ExperimentConfig};

const CONFIG: &str = r#"
p = 5
t = 1
N = "16"
M_T = 16
r = 10
D = 10
omega_exponent = 1
v_t = ["1/3", "1/4", "1/5"]
checks = ["lower-bound-sandwich", "vertical-gap", "ratio-rigidity"]

[source]
seed = 3
"#;

fn main() -> upslope::Result<()> {
    let mut cfg = ExperimentConfig::from_toml(CONFIG, None)?;
    cfg.out = std::env::temp_dir().join("upslope-run-experiment");
    for outcome in [cmd_charpoly(&cfg)?, cmd_polygon(&cfg)?, cmd_verify(&cfg, None)?] {
        print!("{}", outcome.summary);
        println!("-> {} files, passed: {}\n", outcome.files.len(), outcome.passed);
    }
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
