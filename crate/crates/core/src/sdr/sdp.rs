use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::CMatrix;
use crate::error::{mismatch, Error, Result};

pub const MAX_SDP_DIM: usize = 256;

/// `z^H Q z` over `z = [v; t]`, where every entry of `v` has modulus
/// `amplitude` and lies on a `levels`-point alphabet, and the augmentation
/// entry `t` is fixed. The relaxation constrains `diag(X) = c`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub q: CMatrix,
    pub c: Vec<f64>,
    pub amplitude: f64,
    pub levels: usize,
    pub augmentation: f64,
}

impl QuadraticObjective {
    pub fn new(
        q: CMatrix,
        c: Vec<f64>,
        amplitude: f64,
        levels: usize,
        augmentation: f64,
    ) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(mismatch("objective matrix", "square", format!("{:?}", q.shape())));
        }
        if c.len() != n {
            return Err(mismatch("diagonal targets", n, c.len()));
        }
        if c.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("diagonal targets must be > 0".into()));
        }
        let scale = q.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let asym = (0..n)
            .flat_map(|r| (0..n).map(move |k| (r, k)))
            .map(|(r, k)| (q[(r, k)] - q[(k, r)].conj()).norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 * scale {
            return Err(Error::NotHermitian(asym));
        }
        Ok(QuadraticObjective {
            q,
            c,
            amplitude,
            levels,
            augmentation,
        })
    }

    /// Augmented form of `v^H L v - 2 Re{xi^H v}` with `t = amplitude`:
    /// `Q = [[L, -xi / t], [-xi^H / t, 0]]`, `c = amplitude^2` everywhere.
    pub fn from_quadratic(
        lambda: &CMatrix,
        xi: &DVector<Complex64>,
        amplitude: f64,
        levels: usize,
    ) -> Result<Self> {
        let n = lambda.nrows();
        if xi.len() != n {
            return Err(mismatch("linear term", n, xi.len()));
        }
        let mut q = CMatrix::zeros(n + 1, n + 1);
        q.view_mut((0, 0), (n, n)).copy_from(lambda);
        for k in 0..n {
            let v = -xi[k] / amplitude;
            q[(k, n)] = v;
            q[(n, k)] = v.conj();
        }
        // symmetrize round-off from lambda = M^H M
        let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
        Self::new(q, vec![amplitude * amplitude; n + 1], amplitude, levels, amplitude)
    }

    /// Number of free variables (excluding the augmentation entry).
    pub fn len(&self) -> usize {
        self.q.nrows() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `z^H Q z` for a full augmented vector.
    pub fn value(&self, z: &[Complex64]) -> f64 {
        let zv = DVector::from_column_slice(z);
        (zv.adjoint() * &self.q * &zv)[(0, 0)].re
    }

    /// `z^H Q z` with `z = [v; augmentation]`.
    pub fn evaluate(&self, v: &[Complex64]) -> f64 {
        let mut z = v.to_vec();
        z.push(Complex64::new(self.augmentation, 0.0));
        self.value(&z)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: CMatrix,
    /// `tr(QX)`.
    pub objective: f64,
    /// `sum c_k y_k + min(0, lambda_min(Q - diag y)) sum c_k`: a certified
    /// lower bound from the final dual iterate.
    pub dual_bound: f64,
    /// `max |X_kk - c_k|`.
    pub primal_residual: f64,
    /// Magnitude of the most negative eigenvalue of `X` (0 if PSD).
    pub psd_residual: f64,
    /// `lambda_2 / lambda_1` of `X`.
    pub rank1_ratio: f64,
    pub iterations: usize,
    /// Eigenvalues of `X` in descending order.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors matching `eigenvalues` (columns).
    pub eigenvectors: CMatrix,
}

fn sorted_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

fn finish(
    obj: &QuadraticObjective,
    x: CMatrix,
    dual_bound: f64,
    iterations: usize,
) -> SdpSolution {
    let objective = (&obj.q * &x).trace().re;
    let primal_residual = (0..x.nrows())
        .map(|k| (x[(k, k)].re - obj.c[k]).abs())
        .fold(0.0, f64::max);
    let (eigenvalues, eigenvectors) = sorted_eigen(&x);
    let lmin = eigenvalues.last().copied().unwrap_or(0.0);
    let l1 = eigenvalues.first().copied().unwrap_or(0.0);
    let l2 = eigenvalues.get(1).copied().unwrap_or(0.0);
    let rank1_ratio = if l1 > 0.0 { (l2 / l1).max(0.0) } else { 0.0 };
    SdpSolution {
        x,
        objective,
        dual_bound,
        primal_residual,
        psd_residual: (-lmin).max(0.0),
        rank1_ratio,
        iterations,
        eigenvalues,
        eigenvectors,
    }
}

/// Largest `alpha` with `X + alpha dX` positive semidefinite (`X` positive
/// definite), or `None` if `X` is not numerically PD.
fn max_step(x: &CMatrix, dx: &CMatrix) -> Option<f64> {
    let l = Cholesky::new(x.clone())?.l();
    let linv = l.solve_lower_triangular(&CMatrix::identity(x.nrows(), x.nrows()))?;
    let w = &linv * dx * linv.adjoint();
    let w = (&w + w.adjoint()) * Complex64::new(0.5, 0.0);
    let lmin = SymmetricEigen::new(w).eigenvalues.min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

struct Direction {
    dx: CMatrix,
    dy: DVector<f64>,
    dz: CMatrix,
}

/// Newton direction of the perturbed optimality conditions
/// `diag X = 1`, `Z = C - diag y`, `XZ = target I`, with `dX` symmetrized.
fn direction(
    x: &CMatrix,
    zinv: &CMatrix,
    schur: &Cholesky<f64, nalgebra::Dyn>,
    rd: &CMatrix,
    rp: &DVector<f64>,
    target: f64,
) -> Direction {
    let n = x.nrows();
    let g = zinv * Complex64::new(target, 0.0) - x - x * rd * zinv;
    let rhs = DVector::from_fn(n, |k, _| rp[k] - g[(k, k)].re);
    let dy = schur.solve(&rhs);
    let mut dz = rd.clone();
    for k in 0..n {
        dz[(k, k)] -= dy[k];
    }
    let mut xd = x.clone();
    for (k, mut col) in xd.column_iter_mut().enumerate() {
        col *= Complex64::new(dy[k], 0.0);
    }
    let dx = g + xd * zinv;
    let dx = (&dx + dx.adjoint()) * Complex64::new(0.5, 0.0);
    Direction { dx, dy, dz }
}

/// Solves `min tr(QX)` s.t. `diag(X) = c`, `X >= 0`.
///
/// The problem is rescaled to a unit diagonal (`X = D Y D`, `D = diag(sqrt c)`)
/// and a unit-Frobenius cost, then solved by a primal-dual interior-point
/// method (HKM direction, Mehrotra-style centering). `tol` bounds the primal
/// residual, the dual residual and the duality gap of the scaled problem.
pub fn solve_diag_sdp(obj: &QuadraticObjective, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    let n = obj.q.nrows();
    if n > MAX_SDP_DIM {
        return Err(Error::InvalidArgument(format!(
            "SDP dimension {n} exceeds {MAX_SDP_DIM}"
        )));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} outside (0, 1e-3]")));
    }
    let d: Vec<f64> = obj.c.iter().map(|c| c.sqrt()).collect();
    let dq = CMatrix::from_fn(n, n, |r, k| obj.q[(r, k)] * (d[r] * d[k]));
    let scale = dq.norm();
    if scale == 0.0 {
        let x = CMatrix::from_diagonal(&DVector::from_iterator(
            n,
            obj.c.iter().map(|&c| Complex64::new(c, 0.0)),
        ));
        return Ok(finish(obj, x, 0.0, 0));
    }
    let cost = &dq / Complex64::new(scale, 0.0);

    // strictly feasible dual start by diagonal dominance
    let mut y = DVector::from_fn(n, |r, _| {
        cost[(r, r)].re - (0..n).map(|k| cost[(r, k)].norm()).sum::<f64>() - 1.0
    });
    let mut x = CMatrix::identity(n, n);
    let mut z = cost.clone();
    for k in 0..n {
        z[(k, k)] -= y[k];
    }
    let (mut primal, mut dual_res, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for iter in 1..=max_iter {
        let mut rd = &cost - &z;
        for k in 0..n {
            rd[(k, k)] -= y[k];
        }
        let rp = DVector::from_fn(n, |k, _| 1.0 - x[(k, k)].re);
        primal = rp.amax();
        dual_res = rd.norm();
        gap = (&x * &z).trace().re;
        if primal <= tol && dual_res <= tol && gap <= tol {
            return Ok(assemble(obj, &d, &x, &cost, &y, scale, iter - 1));
        }

        let zinv = Cholesky::new(z.clone())
            .ok_or_else(|| Error::Factorization("dual slack lost definiteness".into()))?
            .inverse();
        let m = DMatrix::from_fn(n, n, |r, k| (x[(r, k)] * zinv[(k, r)]).re);
        let schur = Cholesky::new((&m + m.transpose()) * 0.5)
            .ok_or_else(|| Error::Factorization("Schur complement not positive definite".into()))?;

        let mu = gap / n as f64;
        let steps = |dir: &Direction| -> Result<(f64, f64)> {
            let sp = max_step(&x, &dir.dx)
                .ok_or_else(|| Error::Factorization("primal iterate lost definiteness".into()))?;
            let sd = max_step(&z, &dir.dz)
                .ok_or_else(|| Error::Factorization("dual slack lost definiteness".into()))?;
            Ok(((0.95 * sp).min(1.0), (0.95 * sd).min(1.0)))
        };
        let pred = direction(&x, &zinv, &schur, &rd, &rp, 0.0);
        let (ap, ad) = steps(&pred)?;
        let x_aff = &x + &pred.dx * Complex64::new(ap, 0.0);
        let z_aff = &z + &pred.dz * Complex64::new(ad, 0.0);
        let mu_aff = (x_aff * z_aff).trace().re.max(0.0) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let dir = direction(&x, &zinv, &schur, &rd, &rp, sigma * mu);
        let (ap, ad) = steps(&dir)?;
        x += &dir.dx * Complex64::new(ap, 0.0);
        y += &dir.dy * ad;
        z += &dir.dz * Complex64::new(ad, 0.0);
        x = (&x + x.adjoint()) * Complex64::new(0.5, 0.0);
        z = (&z + z.adjoint()) * Complex64::new(0.5, 0.0);
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        primal,
        dual: dual_res.max(gap),
    })
}

fn assemble(
    obj: &QuadraticObjective,
    d: &[f64],
    y_mat: &CMatrix,
    cost: &CMatrix,
    dual: &DVector<f64>,
    scale: f64,
    iterations: usize,
) -> SdpSolution {
    let n = d.len();
    let x = CMatrix::from_fn(n, n, |r, k| y_mat[(r, k)] * (d[r] * d[k]));
    let mut slack = cost.clone();
    for k in 0..n {
        slack[(k, k)] -= dual[k];
    }
    let lmin = SymmetricEigen::new(slack).eigenvalues.min();
    let dual_bound = scale * (dual.sum() + lmin.min(0.0) * n as f64);
    finish(obj, x, dual_bound, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_cost_returns_diag_c() {
        let obj = QuadraticObjective::new(CMatrix::zeros(3, 3), vec![0.5, 0.5, 0.5], 0.7, 4, 0.7).unwrap();
        let sol = solve_diag_sdp(&obj, 1e-8, 100).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.x[(1, 1)], c(0.5, 0.0));
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn two_by_two_analytic() {
        let q = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let obj = QuadraticObjective::new(q, vec![1.0, 1.0], 1.0, 4, 1.0).unwrap();
        let sol = solve_diag_sdp(&obj, 1e-8, 50_000).unwrap();
        assert!((sol.objective + 2.0).abs() < 1e-6, "{}", sol.objective);
        assert!((sol.x[(0, 1)] - c(-1.0, 0.0)).norm() < 1e-6);
        assert!(sol.primal_residual < 1e-7);
        assert!(sol.dual_bound <= sol.objective + 1e-9);
    }

    #[test]
    fn rejects_non_hermitian() {
        let q = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            QuadraticObjective::new(q, vec![1.0, 1.0], 1.0, 4, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let obj = QuadraticObjective::new(CMatrix::identity(2, 2), vec![1.0; 2], 1.0, 4, 1.0).unwrap();
        assert!(solve_diag_sdp(&obj, 1e-2, 10).is_err());
        assert!(solve_diag_sdp(&obj, 0.0, 10).is_err());
    }

    #[test]
    fn iteration_cap_reports_residuals() {
        let q = CMatrix::from_fn(5, 5, |r, k| c((r * k) as f64 - 3.0, 0.0));
        let obj = QuadraticObjective::new(q, vec![1.0; 5], 1.0, 4, 1.0).unwrap();
        assert!(matches!(
            solve_diag_sdp(&obj, 1e-12, 2),
            Err(Error::NotConverged { iterations: 2, .. })
        ));
    }

    #[test]
    fn augmented_form_matches_quadratic() {
        let lambda = CMatrix::from_fn(2, 2, |r, k| if r == k { c(2.0, 0.0) } else if r < k { c(0.3, 0.4) } else { c(0.3, -0.4) });
        let xi = DVector::from_vec(vec![c(0.5, -0.2), c(-0.1, 0.9)]);
        let a = 0.375;
        let obj = QuadraticObjective::from_quadratic(&lambda, &xi, a, 4).unwrap();
        let v = [Complex64::from_polar(a, 0.3), Complex64::from_polar(a, -2.0)];
        let vv = DVector::from_column_slice(&v);
        let direct = (vv.adjoint() * &lambda * &vv)[(0, 0)].re - 2.0 * (xi.adjoint() * &vv)[(0, 0)].re;
        assert!((obj.evaluate(&v) - direct).abs() < 1e-12);
    }
}
