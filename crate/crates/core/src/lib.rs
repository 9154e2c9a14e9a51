//! Certified slopes of `U_p` acting on families of p-adic automorphic forms
//! over weight space.
//!
//! The crate builds the operator from coset data, computes its characteristic
//! series over `Z_p[[T]]` with every coefficient certified modulo `(p, T)^r`,
//! and reads slopes off Newton polygons at chosen valuations of `T`.
//!
//! Examples, one per capability:
//!
//! | example | shows |
//! |---|---|
//! | `padic_basics` | `Z/p^N` arithmetic, Teichmüller lifts |
//! | `iwasawa_series` | truncated `Z_p[[T]]`, orders, valuations at `v(T)` |
//! | `mahler_coefficients` | Mahler expansions and tilted degrees |
//! | `action_matrix` | one monoid element on the Mahler basis, entry bounds |
//! | `up_operator_assembly` | synthetic coset data, block assembly, rescaled basis |
//! | `char_series` | characteristic series against the `λ(n)` bound |
//! | `newton_polygons` | polygons, bound polygons, ratio comparison |
//! | `slope_checkers` | pairing, progressions, degree formulas, slope transfer |
//! | `non_compact` | the digit operator's large off-diagonal entries |
//! | `run_experiment` | a config-driven run, as the `upslope` binary does it |

pub mod charpoly;
pub mod error;
pub mod experiment;
pub mod iwasawa;
pub mod mahler;
pub mod matrix;
pub mod monoid;
pub mod oracle;
pub mod padic;
pub mod polygon;
pub mod ring;
pub mod slope_checks;
pub mod up_operator;
pub mod verify;

pub use error::{Error, Result};

/// Exact rationals used for valuations, slopes and polygon ordinates.
pub type Q = num_rational::BigRational;
