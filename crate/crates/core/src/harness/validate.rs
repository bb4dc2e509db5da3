//! Oracle suite: every optimizer building block checked against an
//! independent reference on seeded random instances.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{generate_channels, generate_symbols, CMatrix, ChannelSet, SymbolMatrix};
use crate::config::{BetaSpec, SystemConfig};
use crate::error::Result;
use crate::model::{
    mui_vectors, IrsMode, LowOverheadXContext, MultiPsiContext, PsiContext, SequentialObjective,
    XContext,
};
use crate::phase::{alphabet, alphabet_point, quantize_angle, quantize_phase};
use crate::rng::{stream, Purpose, StreamRng};
use crate::schemes::{SchemeKind, SchemeSpec};
use crate::sdr::{round_solution, solve_diag_sdp, PhaseProjection, QuadraticObjective};
use crate::trellis::{exhaustive_minimize, trellis_minimize, TrellisSpec};

use super::scenario::ScenarioFile;
use super::simulate::{simulate, write_csv};

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub instances: usize,
    /// One entry per failing instance, naming its index.
    pub failures: Vec<String>,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} ({} instances; {})", self.name, self.instances, self.detail)?;
        for fail in self.failures.iter().take(5) {
            write!(f, "\n    {fail}")?;
        }
        if self.failures.len() > 5 {
            write!(f, "\n    ... {} more", self.failures.len() - 5)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(
            f,
            "{} of {} checks passed (seed {})",
            self.checks.len() - failed,
            self.checks.len(),
            self.seed
        )
    }
}

/// Independent randomness for validation instance `index`.
pub fn instance_rng(seed: u64, index: u64) -> StreamRng {
    stream(seed, index, Purpose::Scheme(40))
}

fn random_config<R: Rng>(rng: &mut R, cells: usize, seed: u64) -> SystemConfig {
    let mut cfg = SystemConfig::multi_cell(
        cells,
        rng.random_range(1..=4),
        rng.random_range(1..=8),
        rng.random_range(1..=8),
    );
    cfg.bs_levels = rng.random_range(2..=4);
    cfg.irs_levels = rng.random_range(2..=4);
    cfg.bs_memory = 1;
    cfg.irs_memory = 1;
    cfg.seed = seed;
    cfg.beta = BetaSpec::TwoLevel {
        intra_cell: 1.0,
        inter_cell: rng.random_range(0.05..1.0),
        bs_irs: rng.random_range(0.05..1.0),
        irs_user: rng.random_range(0.05..1.0),
    };
    cfg
}

fn random_point<R: Rng>(rng: &mut R, len: usize, levels: usize, amplitude: f64) -> Vec<Complex64> {
    (0..len)
        .map(|_| alphabet_point(rng.random_range(0..levels), levels, amplitude))
        .collect()
}

struct Instance {
    cfg: SystemConfig,
    channels: ChannelSet,
    symbols: SymbolMatrix,
}

fn instance(seed: u64, index: u64, cells: usize) -> (Instance, StreamRng) {
    let mut rng = instance_rng(seed, index);
    let cells = if cells == 0 { rng.random_range(1..=3) } else { cells };
    let cfg = random_config(&mut rng, cells, seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let channels = generate_channels(&cfg, index);
    let symbols = generate_symbols(&cfg, index);
    (
        Instance {
            cfg,
            channels,
            symbols,
        },
        rng,
    )
}

/// BS term function signature, injectable for mutation testing.
pub type XTermFn = dyn Fn(&XContext, usize, &[Complex64]) -> f64 + Sync;

/// Objective families with a sequential expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Single-cell BS objective (IRS fixed).
    Bs,
    /// Single-cell IRS objective (BS fixed).
    Irs,
    /// Multi-cell IRS objective, all direct links.
    IrsMultiMain,
    /// Multi-cell IRS objective, intra-cell direct links only.
    IrsMultiLowOverhead,
    /// Per-BS stochastic objective of the low-overhead scheme.
    BsLowOverhead,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Bs,
        Family::Irs,
        Family::IrsMultiMain,
        Family::IrsMultiLowOverhead,
        Family::BsLowOverhead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Bs => "bs",
            Family::Irs => "irs",
            Family::IrsMultiMain => "irs-multicell-main",
            Family::IrsMultiLowOverhead => "irs-multicell-low-overhead",
            Family::BsLowOverhead => "bs-low-overhead",
        }
    }
}

/// Same channels with every inter-cell BS-user link removed.
fn intra_cell_only(ch: &ChannelSet) -> ChannelSet {
    let mut out = ch.clone();
    for (l, row) in out.bs_user.iter_mut().enumerate() {
        for (j, g) in row.iter_mut().enumerate() {
            if l != j {
                g.fill(Complex64::new(0.0, 0.0));
            }
        }
    }
    out
}

/// Stochastic per-cell MUI power of the low-overhead BS objective, evaluated
/// user by user: intra-cell error, inter-cell direct paths through their
/// second moment `beta I`, inter-cell reflected paths through the all-ones
/// surrogate of `x_l x_j^H`.
pub fn low_overhead_power(
    ch: &ChannelSet,
    cell: usize,
    psi: &[Complex64],
    symbols: &SymbolMatrix,
    x: &[Complex64],
) -> f64 {
    let n = ch.antennas() as f64;
    let xv = DVector::from_column_slice(x);
    let sum_x: Complex64 = x.iter().sum();
    let spread = DVector::from_element(x.len(), sum_x); // 1_{N x N} x
    let psi_diag = CMatrix::from_diagonal(&DVector::from_column_slice(psi));
    let mut total = 0.0;
    for i in 0..ch.users() {
        let g_iu = ch.irs_user[cell].row(i) * &psi_diag;
        let own = (ch.bs_user[cell][cell].row(i) * &xv)[(0, 0)]
            + (&g_iu * &ch.bs_irs[cell] * &xv)[(0, 0)]
            - symbols.s[cell][i];
        total += own.norm_sqr();
        for l in (0..ch.cells()).filter(|&l| l != cell) {
            let beta = ch.beta_bs_user[l][cell][i];
            total += beta * n * sum_x.norm_sqr() / (n * n);
            total += (&g_iu * &ch.bs_irs[l] * &spread)[(0, 0)].norm_sqr() / (n * n);
        }
    }
    total
}

fn rel_check(
    failures: &mut Vec<String>,
    worst: &mut f64,
    index: u64,
    terms: (f64, f64),
    direct: (f64, f64),
) {
    let d_terms = terms.0 - terms.1;
    let d_direct = direct.0 - direct.1;
    let scale = direct.0.abs().max(direct.1.abs()).max(1e-300);
    let rel = (d_terms - d_direct).abs() / scale;
    *worst = worst.max(rel);
    if rel.is_nan() || rel > 1e-10 {
        failures.push(format!(
            "instance {index}: term difference {d_terms:.6e} vs direct {d_direct:.6e} (rel {rel:.2e})"
        ));
    }
}

/// Sequential-term sums against direct MUI evaluation on the difference of
/// two random feasible points, within `1e-10` relative.
pub fn expansion_consistency(family: Family, seed: u64, instances: usize) -> Result<CheckResult> {
    let default = |ctx: &XContext, k: usize, p: &[Complex64]| ctx.term(k, p);
    expansion_consistency_with(family, seed, instances, &default)
}

/// As [`expansion_consistency`], with the BS family's summand supplied by
/// the caller (other families ignore it).
pub fn expansion_consistency_with(
    family: Family,
    seed: u64,
    instances: usize,
    x_term: &XTermFn,
) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for index in 0..instances as u64 {
        let cells = match family {
            Family::Bs | Family::Irs => 1,
            _ => 0,
        };
        let (inst, mut rng) = instance(seed, index, cells);
        let (cfg, ch, sym) = (&inst.cfg, &inst.channels, &inst.symbols);
        let a = cfg.amplitude();
        let (nt, m, l) = (cfg.bs_antennas, cfg.irs_elements, cfg.cells);
        let x_fixed: Vec<Vec<Complex64>> =
            (0..l).map(|_| random_point(&mut rng, nt, cfg.bs_levels, a)).collect();
        let psi_fixed = random_point(&mut rng, m, cfg.irs_levels, 1.0);
        match family {
            Family::Bs => {
                let ctx = XContext::single_cell(ch, &psi_fixed, sym)?;
                let u = random_point(&mut rng, nt, cfg.bs_levels, a);
                let v = random_point(&mut rng, nt, cfg.bs_levels, a);
                let sum = |x: &[Complex64]| (0..nt).map(|k| x_term(&ctx, k, x)).sum::<f64>();
                let direct = |x: &[Complex64]| -> Result<f64> {
                    Ok(mui_vectors(ch, &[x.to_vec()], &psi_fixed, sym)?.total)
                };
                rel_check(&mut failures, &mut worst, index, (sum(&u), sum(&v)), (direct(&u)?, direct(&v)?));
            }
            Family::Irs => {
                let ctx = PsiContext::single_cell(ch, &x_fixed[0], sym)?;
                let u = random_point(&mut rng, m, cfg.irs_levels, 1.0);
                let v = random_point(&mut rng, m, cfg.irs_levels, 1.0);
                let direct = |p: &[Complex64]| -> Result<f64> {
                    Ok(mui_vectors(ch, &x_fixed, p, sym)?.total)
                };
                rel_check(&mut failures, &mut worst, index, (ctx.total(&u), ctx.total(&v)), (direct(&u)?, direct(&v)?));
            }
            Family::IrsMultiMain | Family::IrsMultiLowOverhead => {
                let (mode, reference) = if family == Family::IrsMultiMain {
                    (IrsMode::Main, ch.clone())
                } else {
                    (IrsMode::LowOverhead, intra_cell_only(ch))
                };
                let ctx = MultiPsiContext::new(ch, &x_fixed, sym, mode)?;
                let u = random_point(&mut rng, m, cfg.irs_levels, 1.0);
                let v = random_point(&mut rng, m, cfg.irs_levels, 1.0);
                let direct = |p: &[Complex64]| -> Result<f64> {
                    Ok(mui_vectors(&reference, &x_fixed, p, sym)?.total)
                };
                rel_check(&mut failures, &mut worst, index, (ctx.total(&u), ctx.total(&v)), (direct(&u)?, direct(&v)?));
            }
            Family::BsLowOverhead => {
                let cell = rng.random_range(0..l);
                let ctx = LowOverheadXContext::new(ch, cell, &psi_fixed, sym)?;
                let u = random_point(&mut rng, nt, cfg.bs_levels, a);
                let v = random_point(&mut rng, nt, cfg.bs_levels, a);
                let direct = |x: &[Complex64]| low_overhead_power(ch, cell, &psi_fixed, sym, x);
                rel_check(&mut failures, &mut worst, index, (ctx.total(&u), ctx.total(&v)), (direct(&u), direct(&v)));
            }
        }
    }
    Ok(CheckResult {
        name: format!("expansion-consistency/{}", family.name()),
        instances,
        failures,
        detail: format!("worst relative error {worst:.2e}"),
    })
}

/// Full-memory trellis against exhaustive search: identical assignment and
/// objective. Also checks that a memory-1 trellis never beats the optimum.
pub fn trellis_optimality(seed: u64, instances: usize) -> Result<CheckResult> {
    let mut failures = Vec::new();
    for index in 0..instances as u64 {
        let (inst, mut rng) = instance(seed, index, 1);
        let (cfg, ch, sym) = (&inst.cfg, &inst.channels, &inst.symbols);
        let psi = random_point(&mut rng, cfg.irs_elements, cfg.irs_levels, 1.0);
        let ctx = XContext::single_cell(ch, &psi, sym)?;
        let term = |k: usize, p: &[Complex64]| ctx.term(k, p);
        let n = cfg.bs_antennas;
        let labels = alphabet(cfg.bs_levels, cfg.amplitude());
        let full = TrellisSpec::new(n, n, labels.clone(), &term);
        let t = trellis_minimize(&full)?;
        let e = exhaustive_minimize(&full)?;
        if t.assignment != e.assignment || t.objective != e.objective {
            failures.push(format!(
                "instance {index} (n={n}, A={}): trellis {:?} {:.15e} vs exhaustive {:?} {:.15e}",
                cfg.bs_levels, t.assignment, t.objective, e.assignment, e.objective
            ));
        }
        let short = trellis_minimize(&TrellisSpec::new(n, 1, labels, &term))?;
        if short.objective < e.objective {
            failures.push(format!("instance {index}: memory-1 trellis below the optimum"));
        }
    }
    Ok(CheckResult {
        name: "trellis-vs-exhaustive".into(),
        instances,
        failures,
        detail: "n <= 8, A <= 4, m = n".into(),
    })
}

/// Random augmented BS-type relaxation with `n` free variables.
pub fn random_quadratic<R: Rng>(rng: &mut R, n: usize, levels: usize) -> Result<QuadraticObjective> {
    let rows = rng.random_range(1..=4);
    let g = CMatrix::from_fn(rows, n, |_, _| crate::rng::complex_gaussian(rng));
    let s = DVector::from_fn(rows, |_, _| crate::rng::complex_gaussian(rng));
    let amplitude = [0.375, 1.0][rng.random_range(0..2)];
    QuadraticObjective::from_quadratic(&(g.adjoint() * &g), &(g.adjoint() * s), amplitude, levels)
}

/// Minimum of the relaxed cost over every discrete assignment.
pub fn discrete_optimum(obj: &QuadraticObjective) -> f64 {
    let n = obj.len();
    let points = alphabet(obj.levels, obj.amplitude);
    let mut idx = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let v: Vec<Complex64> = idx.iter().map(|&k| points[k]).collect();
        best = best.min(obj.evaluate(&v));
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] < obj.levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `SDP <= exhaustive optimum <= best-of-100 rounding` on random instances
/// with `n + 1 <= 7` and a 4-point alphabet. The left inequality may be off
/// by `tol * scale`; the solver runs at `min(tol, 1e-3)`.
pub fn sdp_sandwich(seed: u64, instances: usize, tol: f64) -> Result<CheckResult> {
    let mut failures = Vec::new();
    let mut worst_gap = 0.0f64;
    for index in 0..instances as u64 {
        let mut rng = instance_rng(seed ^ 0x5D9, index);
        let n = rng.random_range(1..=6);
        let obj = random_quadratic(&mut rng, n, 4)?;
        let sol = solve_diag_sdp(&obj, tol.min(1e-3), 50_000)?;
        let exact = discrete_optimum(&obj);
        let rounded = round_solution(&sol, &obj, 100, PhaseProjection::Discrete, &mut rng)?;
        let scale = obj.q.norm() * obj.c.iter().copied().fold(0.0, f64::max) * obj.q.nrows() as f64;
        if sol.objective > exact + tol * scale {
            failures.push(format!(
                "instance {index}: SDP {:.9e} above discrete optimum {exact:.9e}",
                sol.objective
            ));
        }
        if exact > rounded.objective + 1e-12 * scale {
            failures.push(format!(
                "instance {index}: rounded {:.9e} below discrete optimum {exact:.9e}",
                rounded.objective
            ));
        }
        worst_gap = worst_gap.max((rounded.objective - exact) / scale);
    }
    Ok(CheckResult {
        name: "sdp-sandwich".into(),
        instances,
        failures,
        detail: format!("tol {tol:.0e}; worst scaled rounding gap {worst_gap:.3e}"),
    })
}

/// Nearest-point oracle: the alphabet index at the smallest angular distance,
/// exact ties to the higher bin, computed in integer arithmetic on a grid of
/// `steps` angles per turn.
pub fn nearest_index_oracle(step: u64, steps: u64, levels: u64) -> u64 {
    // angle = 2 pi step / steps; bin k centre = 2 pi k / levels
    // compare |step * levels - k * steps| over the circle
    let period = steps * levels;
    let pos = step * levels % period;
    let mut best = (u64::MAX, 0u64);
    for k in 0..levels {
        let centre = k * steps;
        let diff = pos.abs_diff(centre);
        let dist = diff.min(period - diff);
        // on a tie, the bin whose centre lies counter-clockwise wins
        let ccw = (centre + period - pos) % period <= period / 2 && dist != 0;
        if dist < best.0 || (dist == best.0 && ccw) {
            best = (dist, k);
        }
    }
    best.1
}

/// Quantizer against the nearest-point oracle on `steps` equally spaced
/// angles for each alphabet size.
pub fn quantizer_sweep(steps: u64, sizes: &[usize]) -> CheckResult {
    let mut failures = Vec::new();
    for &levels in sizes {
        for step in 0..steps {
            let theta = std::f64::consts::TAU * step as f64 / steps as f64;
            let got = quantize_angle(theta, levels);
            let want = nearest_index_oracle(step, steps, levels as u64) as usize;
            let via_phase = quantize_phase(Complex64::from_polar(1.7, theta), levels, 0.5);
            let want_point = alphabet_point(want, levels, 0.5);
            if got != want || (via_phase - want_point).norm() > 1e-12 {
                failures.push(format!("N={levels} step {step}: got {got}, want {want}"));
            }
        }
    }
    CheckResult {
        name: "quantizer".into(),
        instances: steps as usize * sizes.len(),
        failures,
        detail: format!("N in {sizes:?}"),
    }
}

/// Writes the CSV of `scenario` with the elapsed column blanked.
pub fn deterministic_csv(scenario: &ScenarioFile) -> Result<Vec<u8>> {
    let mut rows = simulate(scenario)?;
    for r in &mut rows {
        r.elapsed_ms = 0.0;
    }
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    Ok(buf)
}

/// Two runs of a small scenario produce identical CSV bytes (elapsed masked).
pub fn determinism(seed: u64) -> Result<CheckResult> {
    let mut sc = ScenarioFile::preset("multicell-desk")?;
    sc.system.seed = seed;
    sc.system.mc_trials = 4;
    sc.sweep = None;
    sc.schemes = SchemeKind::ALL.into_iter().map(SchemeSpec::new).collect();
    let a = deterministic_csv(&sc)?;
    let b = deterministic_csv(&sc)?;
    let failures = if a == b {
        Vec::new()
    } else {
        vec!["CSV bytes differ between runs".into()]
    };
    Ok(CheckResult {
        name: "determinism".into(),
        instances: 2,
        failures,
        detail: format!("{} bytes", a.len()),
    })
}

/// Default seed of the validation suite.
pub const DEFAULT_SEED: u64 = 2024;

/// The whole desk-scale suite; `sdp_tol` is the sandwich tolerance
/// (`1e-6` by default).
pub fn run_validation(seed: u64, sdp_tol: f64) -> Result<ValidationReport> {
    let mut checks = vec![trellis_optimality(seed, 200)?];
    for family in Family::ALL {
        checks.push(expansion_consistency(family, seed, 100)?);
    }
    checks.push(sdp_sandwich(seed, 100, sdp_tol)?);
    checks.push(quantizer_sweep(10_000, &[2, 4, 8]));
    checks.push(determinism(seed)?);
    Ok(ValidationReport { seed, checks })
}
