use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::sdp::{QuadraticObjective, SdpSolution};
use crate::error::{Error, Result};
use crate::phase::{alphabet_point, angle_of, quantize_index, Phases};
use crate::rng::complex_gaussian;

/// Below this `lambda_2 / lambda_1` the relaxed optimum is treated as rank one.
pub const RANK1_THRESHOLD: f64 = 1e-6;

const JITTER: [f64; 5] = [0.0, 1e-15, 1e-13, 1e-11, 1e-9];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseProjection {
    /// Nearest point of the `levels`-ary alphabet.
    Discrete,
    /// `z / |z|` (unquantized benchmark).
    Continuous,
}

#[derive(Debug, Clone)]
pub struct Rounding {
    pub phases: Phases,
    /// Scaled values (without the augmentation entry).
    pub values: Vec<Complex64>,
    /// `z^H Q z` at the returned point.
    pub objective: f64,
    pub rank_one: bool,
    pub draws: usize,
}

fn project(
    z: &[Complex64],
    obj: &QuadraticObjective,
    projection: PhaseProjection,
) -> (Phases, Vec<Complex64>) {
    // rotate so the augmentation entry is real positive; the cost is
    // invariant to a common phase, the fixed entry is not
    let last = z[z.len() - 1];
    let rot = if last.norm() > 0.0 {
        last.conj() / last.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let free = &z[..z.len() - 1];
    match projection {
        PhaseProjection::Discrete => {
            let index: Vec<usize> = free
                .iter()
                .map(|&v| quantize_index(v * rot, obj.levels))
                .collect();
            let values = index
                .iter()
                .map(|&k| alphabet_point(k, obj.levels, obj.amplitude))
                .collect();
            (
                Phases::Discrete {
                    levels: obj.levels,
                    index,
                },
                values,
            )
        }
        PhaseProjection::Continuous => {
            let angles: Vec<f64> = free.iter().map(|&v| angle_of(v * rot)).collect();
            let values = angles
                .iter()
                .map(|&t| Complex64::from_polar(obj.amplitude, t))
                .collect();
            (Phases::Continuous(angles), values)
        }
    }
}

/// Maps a relaxed optimum back to feasible phases.
///
/// A (numerically) rank-one `X` gives its scaled principal eigenvector
/// directly. Otherwise `draws` Gaussian vectors `z = L r`, `L L^H = X`,
/// `r ~ CN(0, I)` are projected and the best by exact objective is kept
/// (first one on ties).
pub fn round_solution<R: Rng + ?Sized>(
    sol: &SdpSolution,
    obj: &QuadraticObjective,
    draws: usize,
    projection: PhaseProjection,
    rng: &mut R,
) -> Result<Rounding> {
    let n = obj.q.nrows();
    if sol.x.shape() != (n, n) {
        return Err(crate::error::mismatch(
            "relaxed solution",
            format!("{n}x{n}"),
            format!("{:?}", sol.x.shape()),
        ));
    }
    if sol.rank1_ratio < RANK1_THRESHOLD || draws == 0 {
        let scale = sol.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        let z: Vec<Complex64> = sol.eigenvectors.column(0).iter().map(|v| v * scale).collect();
        let (phases, values) = project(&z, obj, projection);
        let objective = obj.evaluate(&values);
        return Ok(Rounding {
            phases,
            values,
            objective,
            rank_one: true,
            draws: 0,
        });
    }

    let diag_max = (0..n).map(|k| sol.x[(k, k)].re).fold(0.0, f64::max);
    let factor = JITTER
        .iter()
        .find_map(|&eps| {
            let mut m = sol.x.clone();
            for k in 0..n {
                m[(k, k)] += eps * diag_max.max(1e-300);
            }
            Cholesky::new(m).map(|c| c.l())
        })
        .ok_or_else(|| Error::Factorization("relaxed solution is not PSD".into()))?;

    let mut best: Option<(Phases, Vec<Complex64>, f64)> = None;
    for _ in 0..draws {
        let r = DVector::from_fn(n, |_, _| complex_gaussian(rng));
        let z = &factor * r;
        let (phases, values) = project(z.as_slice(), obj, projection);
        let value = obj.evaluate(&values);
        if best.as_ref().is_none_or(|b| value < b.2) {
            best = Some((phases, values, value));
        }
    }
    let (phases, values, objective) = best.expect("draws > 0");
    Ok(Rounding {
        phases,
        values,
        objective,
        rank_one: false,
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CMatrix;
    use crate::rng::{stream, Purpose};
    use crate::sdr::solve_diag_sdp;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_one_recovers_planted_point() {
        // Q = -w w^H with |w_k| = 1: optimum z = w (up to common phase)
        let w = [c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)];
        let q = CMatrix::from_fn(3, 3, |r, k| -(w[r] * w[k].conj()));
        let obj = QuadraticObjective::new(q, vec![1.0; 3], 1.0, 4, 1.0).unwrap();
        let sol = solve_diag_sdp(&obj, 1e-9, 50_000).unwrap();
        let mut rng = stream(1, 0, Purpose::Scheme(0));
        let r = round_solution(&sol, &obj, 100, PhaseProjection::Discrete, &mut rng).unwrap();
        assert!(r.rank_one);
        assert_eq!(r.phases, Phases::Discrete { levels: 4, index: vec![1, 2] });
        assert!((r.objective + 9.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_rounding_is_feasible_and_bounded_below() {
        let q = CMatrix::from_fn(5, 5, |r, k| {
            let h = c(((r * 7 + k * 3) % 5) as f64 - 2.0, ((r + k) % 3) as f64 - 1.0);
            if r == k {
                c(h.re, 0.0)
            } else if r < k {
                h
            } else {
                c(((k * 7 + r * 3) % 5) as f64 - 2.0, -(((r + k) % 3) as f64 - 1.0))
            }
        });
        let obj = QuadraticObjective::new(q, vec![1.0; 5], 1.0, 8, 1.0).unwrap();
        let sol = solve_diag_sdp(&obj, 1e-8, 100_000).unwrap();
        let mut rng = stream(3, 0, Purpose::Scheme(2));
        let r = round_solution(&sol, &obj, 100, PhaseProjection::Discrete, &mut rng).unwrap();
        assert_eq!(r.values.len(), 4);
        assert!(r.values.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        assert!(r.objective >= sol.dual_bound - 1e-6);
        let mut rng = stream(3, 0, Purpose::Scheme(3));
        let rc = round_solution(&sol, &obj, 100, PhaseProjection::Continuous, &mut rng).unwrap();
        assert!(!rc.phases.is_discrete());
        assert!(rc.objective >= sol.dual_bound - 1e-6);
    }
}
