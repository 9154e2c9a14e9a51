//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here is meant for production sizes: the determinant expands over all
//! permutations and the hull tests every triple of points.

use crate::matrix::Matrix;
use crate::ring::RingElement;
use crate::Q;

/// Coefficients of `det(I − X·M)` by the Leibniz expansion.
///
/// Each factor `δ_{i,σ(i)} − X·M_{i,σ(i)}` is a degree-one polynomial, so a term
/// is a product of `n` such polynomials. Intended for `n ≤ 6`.
pub fn cofactor_charpoly<V: RingElement>(m: &Matrix<V>) -> Vec<V> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "square matrix required");
    assert!(n > 0, "empty matrix");
    let zero = m.get(0, 0).zero_like();
    let one = zero.one_like();
    let mut total = vec![zero.clone(); n + 1];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut visit = |perm: &[usize], sign: i128| {
        let mut poly = vec![zero.clone(); n + 1];
        poly[0] = one.clone();
        for (i, &j) in perm.iter().enumerate() {
            let constant = if i == j { one.clone() } else { zero.clone() };
            let linear = m.get(i, j).neg_ref();
            let mut next = vec![zero.clone(); n + 1];
            for (d, c) in poly.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                next[d].mul_add_assign(c, &constant);
                if d < n {
                    next[d + 1].mul_add_assign(c, &linear);
                }
            }
            poly = next;
        }
        for (t, c) in total.iter_mut().zip(&poly) {
            t.add_assign_ref(&c.mul_int(sign));
        }
    };
    permute(&mut perm, 0, 1, &mut visit);
    total
}

fn permute(perm: &mut Vec<usize>, k: usize, sign: i128, visit: &mut impl FnMut(&[usize], i128)) {
    if k == perm.len() {
        visit(perm, sign);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, if i == k { sign } else { -sign }, visit);
        perm.swap(k, i);
    }
}

/// Indices of the lower-convex-hull vertices of points with distinct `x`.
///
/// A point is a vertex when it is an endpoint in `x` or lies strictly below the
/// chord of every pair of points straddling it.
pub fn brute_force_lower_hull(points: &[(i64, Q)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| points[i].0);
    let n = order.len();
    let mut out = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || pos + 1 == n {
            out.push(i);
            continue;
        }
        let (xi, yi) = (&points[i].0, &points[i].1);
        let covered = order[..pos].iter().any(|&j| {
            order[pos + 1..].iter().any(|&k| {
                let (xj, yj) = (points[j].0, &points[j].1);
                let (xk, yk) = (points[k].0, &points[k].1);
                let chord = yj + (yk - yj) * Q::from_integer((xi - xj).into()) / Q::from_integer((xk - xj).into());
                *yi >= chord
            })
        });
        if !covered {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iwasawa::LambdaElt;
    use crate::padic::PAdicNum;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    #[test]
    fn two_by_two_over_integers_mod() {
        let e = |v: i128| PAdicNum::new(7, 5, v).unwrap();
        let m = Matrix::from_rows(vec![vec![e(2), e(3)], vec![e(5), e(11)]]);
        let poly = cofactor_charpoly(&m);
        assert_eq!(poly, vec![e(1), e(-13), e(2 * 11 - 15)]);
    }

    #[test]
    fn diagonal_series() {
        let t = LambdaElt::from_ints(3, 4, &[0, 1, 0]).unwrap();
        let p = LambdaElt::from_ints(3, 4, &[3, 0, 0]).unwrap();
        let z = LambdaElt::from_ints(3, 4, &[0, 0, 0]).unwrap();
        let m = Matrix::from_rows(vec![vec![t.clone(), z.clone()], vec![z, p.clone()]]);
        let poly = cofactor_charpoly(&m);
        assert_eq!(poly[1], LambdaElt::from_ints(3, 4, &[-3, -1, 0]).unwrap());
        assert_eq!(poly[2], LambdaElt::from_ints(3, 4, &[0, 3, 0]).unwrap());
    }

    #[test]
    fn hull_examples() {
        let pts = vec![(0, q(0, 1)), (1, q(5, 1)), (2, q(1, 1))];
        assert_eq!(brute_force_lower_hull(&pts), vec![0, 2]);
        let pts = vec![(2, q(3, 2)), (0, q(0, 1)), (1, q(1, 2))];
        assert_eq!(brute_force_lower_hull(&pts), vec![1, 2, 0]);
        let collinear = vec![(0, q(0, 1)), (1, q(1, 1)), (2, q(2, 1))];
        assert_eq!(brute_force_lower_hull(&collinear), vec![0, 2]);
    }
}
