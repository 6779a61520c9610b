//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns are orthogonalized pairwise until every pair is orthogonal to
//! working precision; the singular values are then the column norms.
//! Exactly zero columns stay exactly zero, and a matrix whose nonzero
//! columns are already orthonormal (the open baker) converges in one sweep.

use crate::matrix::{ComplexMatrix, C64};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 40;

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.dim();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| m.column(j)).collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| norm_sq(c)).collect();
    let tol = f64::EPSILON * n as f64;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            if norms[p] == 0.0 {
                continue;
            }
            for q in p + 1..n {
                if norms[q] == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= tol * (norms[p] * norms[q]).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (norms[q] - norms[p]) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
                    // b̃ = e^{-iφ} b makes the pair's inner product real.
                    let bt = *b * phase.conj();
                    let na = *a * c - bt * s;
                    let nb = *a * s + bt * c;
                    *a = na;
                    *b = nb;
                }
                norms[p] = norm_sq(cp);
                norms[q] = norm_sq(cq);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: MAX_SWEEPS,
            active: n,
        });
    }
    let mut sv: Vec<f64> = norms.into_iter().map(f64::sqrt).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}

fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let mut m = ComplexMatrix::zeros(3);
        m[(0, 0)] = C64::new(0.0, -2.0);
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(2, 2)] = C64::new(3.0, 4.0);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 5.0).abs() < 1e-14);
        assert!((sv[1] - 2.0).abs() < 1e-14);
        assert!((sv[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn frobenius_norm_is_preserved() {
        let m = ComplexMatrix::from_fn(7, |i, j| C64::new((i * j) as f64 % 5.0 - 2.0, (i + 2 * j) as f64 % 3.0));
        let sv = singular_values(&m).unwrap();
        let total: f64 = sv.iter().map(|s| s * s).sum();
        assert!((total.sqrt() - m.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn rank_one_matrix() {
        let u = [C64::new(1.0, 1.0), C64::new(0.0, 2.0), C64::new(-1.0, 0.0)];
        let v = [C64::new(2.0, 0.0), C64::new(1.0, -1.0), C64::new(0.0, 1.0)];
        let m = ComplexMatrix::from_fn(3, |i, j| u[i] * v[j].conj());
        let sv = singular_values(&m).unwrap();
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((sv[0] - nu * nv).abs() < 1e-13);
        assert!(sv[1] < 1e-13 && sv[2] < 1e-13);
    }
}
