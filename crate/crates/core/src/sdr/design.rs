use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::rounding::{round_solution, PhaseProjection};
use super::sdp::{solve_diag_sdp, QuadraticObjective, SdpSolution};
use crate::channel::{CMatrix, ChannelSet, SymbolMatrix};
use crate::error::{mismatch, Error, Result};
use crate::model::cell_irs_system;
use crate::phase::Phases;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Gaussian rounding draws.
    pub draws: usize,
    pub projection: PhaseProjection,
}

impl Default for SdrSettings {
    fn default() -> Self {
        SdrSettings {
            tol: 1e-8,
            max_iter: 50_000,
            draws: 100,
            projection: PhaseProjection::Discrete,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdrOutcome {
    pub phases: Phases,
    pub values: Vec<Complex64>,
    /// Exact relaxed-problem cost `z^H Q z` at the rounded point.
    pub rounded_objective: f64,
    /// `None` when the cost matrix vanished and no SDP was solved.
    pub sdp: Option<SdpSolution>,
}

fn solve_and_round<R: Rng + ?Sized>(
    obj: &QuadraticObjective,
    settings: &SdrSettings,
    rng: &mut R,
) -> Result<SdrOutcome> {
    if obj.q.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        // every feasible point is optimal; stay deterministic
        let phases = match settings.projection {
            PhaseProjection::Discrete => Phases::zeros(obj.levels, obj.len()),
            PhaseProjection::Continuous => Phases::Continuous(vec![0.0; obj.len()]),
        };
        let values = phases.values(obj.amplitude);
        return Ok(SdrOutcome {
            phases,
            values,
            rounded_objective: 0.0,
            sdp: None,
        });
    }
    let sol = solve_diag_sdp(obj, settings.tol, settings.max_iter)?;
    let r = round_solution(&sol, obj, settings.draws, settings.projection, rng)?;
    Ok(SdrOutcome {
        phases: r.phases,
        values: r.values,
        rounded_objective: r.objective,
        sdp: Some(sol),
    })
}

/// Effective channel `lambda` of BS `cell` with the other BSs' contributions
/// replaced by their mean-field surrogate `(1/N_T) 1 1^T`.
fn bs_effective_channel(ch: &ChannelSet, psi: &[Complex64], cell: usize) -> CMatrix {
    let n = ch.antennas();
    let direct = |l: usize| -> CMatrix {
        let mut g = ch.irs_user[cell].clone();
        for (m, p) in psi.iter().enumerate() {
            for v in g.column_mut(m).iter_mut() {
                *v *= p;
            }
        }
        &ch.bs_user[l][cell] + g * &ch.bs_irs[l]
    };
    let mut lambda = direct(cell);
    let mean = CMatrix::from_element(n, n, Complex64::new(1.0 / n as f64, 0.0));
    for l in (0..ch.cells()).filter(|&l| l != cell) {
        lambda += direct(l) * &mean;
    }
    lambda
}

/// Relaxation-based discrete precoder of BS `cell` for fixed IRS reflection
/// values `psi`.
#[allow(clippy::too_many_arguments)]
pub fn sdr_precode_bs<R: Rng + ?Sized>(
    ch: &ChannelSet,
    psi: &[Complex64],
    symbols: &SymbolMatrix,
    cell: usize,
    amplitude: f64,
    levels: usize,
    settings: &SdrSettings,
    rng: &mut R,
) -> Result<SdrOutcome> {
    if cell >= ch.cells() {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            len: ch.cells(),
        });
    }
    if psi.len() != ch.elements() {
        return Err(mismatch("IRS phase vector length", ch.elements(), psi.len()));
    }
    if symbols.cells() != ch.cells() || symbols.cell(cell).len() != ch.users() {
        return Err(mismatch("symbol matrix", ch.users(), symbols.cell(cell).len()));
    }
    let lambda = bs_effective_channel(ch, psi, cell);
    let s = DVector::from_column_slice(symbols.cell(cell));
    let gram = lambda.adjoint() * &lambda;
    let xi = lambda.adjoint() * s;
    let obj = QuadraticObjective::from_quadratic(&gram, &xi, amplitude, levels)?;
    solve_and_round(&obj, settings, rng)
}

/// Relaxation-based IRS design for fixed BS vectors, over all cells jointly:
/// `A = sum_j Pi_j^H Pi_j`, `b = sum_j Pi_j^H eta_j`.
pub fn sdr_beamform_irs<R: Rng + ?Sized>(
    ch: &ChannelSet,
    x_all: &[Vec<Complex64>],
    symbols: &SymbolMatrix,
    levels: usize,
    settings: &SdrSettings,
    rng: &mut R,
) -> Result<SdrOutcome> {
    let m = ch.elements();
    let mut a = CMatrix::zeros(m, m);
    let mut b = DVector::<Complex64>::zeros(m);
    for j in 0..ch.cells() {
        let (pi, eta) = cell_irs_system(ch, x_all, symbols, j)?;
        a += pi.adjoint() * &pi;
        b += pi.adjoint() * eta;
    }
    let obj = QuadraticObjective::from_quadratic(&a, &b, 1.0, levels)?;
    solve_and_round(&obj, settings, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::channel::{generate_channels, generate_symbols};
    use crate::model::mui_vectors;
    use crate::rng::{stream, Purpose};

    #[test]
    fn irs_cost_is_mui_power_minus_constant() {
        let cfg = SystemConfig::multi_cell(2, 2, 4, 6);
        let ch = generate_channels(&cfg, 0);
        let sym = generate_symbols(&cfg, 0);
        let a = cfg.amplitude();
        let x: Vec<Vec<Complex64>> = (0..2)
            .map(|l| (0..4).map(|k| Complex64::from_polar(a, 0.3 * (k + l) as f64)).collect())
            .collect();
        let mut rng = stream(cfg.seed, 0, Purpose::Scheme(9));
        let out = sdr_beamform_irs(&ch, &x, &sym, 4, &SdrSettings::default(), &mut rng).unwrap();
        let total = mui_vectors(&ch, &x, &out.values, &sym).unwrap().total;
        let zero = vec![Complex64::new(0.0, 0.0); 6];
        let eta_power = mui_vectors(&ch, &x, &zero, &sym).unwrap().total;
        assert!((total - eta_power - out.rounded_objective).abs() < 1e-9 * total.max(1.0));
        let sdp = out.sdp.unwrap();
        assert!(sdp.objective <= out.rounded_objective + 1e-6);
    }

    #[test]
    fn zero_incident_field_gives_zero_phases() {
        let cfg = SystemConfig::multi_cell(2, 2, 4, 5);
        let ch = generate_channels(&cfg, 0);
        let sym = generate_symbols(&cfg, 0);
        let x = vec![vec![Complex64::new(0.0, 0.0); 4]; 2];
        let mut rng = stream(cfg.seed, 0, Purpose::Scheme(9));
        let out = sdr_beamform_irs(&ch, &x, &sym, 4, &SdrSettings::default(), &mut rng).unwrap();
        assert_eq!(out.phases, Phases::zeros(4, 5));
        assert!(out.sdp.is_none());
    }

    #[test]
    fn single_cell_bs_cost_matches_mui() {
        let cfg = SystemConfig::single_cell(3, 5, 4);
        let ch = generate_channels(&cfg, 2);
        let sym = generate_symbols(&cfg, 2);
        let psi = vec![Complex64::new(1.0, 0.0); 4];
        let a = cfg.amplitude();
        let mut rng = stream(cfg.seed, 2, Purpose::Scheme(9));
        let out = sdr_precode_bs(&ch, &psi, &sym, 0, a, 4, &SdrSettings::default(), &mut rng).unwrap();
        let total = mui_vectors(&ch, std::slice::from_ref(&out.values), &psi, &sym).unwrap().total;
        let s2: f64 = sym.cell(0).iter().map(|s| s.norm_sqr()).sum();
        assert!((total - s2 - out.rounded_objective).abs() < 1e-9 * total.max(1.0));
    }
}
