//! End-to-end joint BS/IRS optimizers.
//!
//! Every scheme alternates a BS pass (each cell on its own objective) with an
//! IRS pass that starts once all BS vectors are fixed, `rounds` times, and
//! finishes with an exact re-evaluation of the MUI on the returned variables.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{generate_channels, generate_symbols, ChannelSet, SymbolMatrix};
use crate::config::{IrsInit, SystemConfig};
use crate::error::{mismatch, Error, Result};
use crate::model::{
    mui_vectors, per_user_rate, IrsMode, LowOverheadXContext, MuiEvaluation, MultiPsiContext,
    PsiContext, XContext,
};
use crate::phase::{alphabet, CeVector, IrsPhases, Phases};
use crate::rng::{stream, Purpose, StreamRng};
use crate::sdr::{sdr_beamform_irs, sdr_precode_bs, PhaseProjection, SdrSettings};
use crate::trellis::{minimize_objective, TrellisResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    TrellisMain,
    TrellisLowOverhead,
    SdrDiscrete,
    SdrContinuous,
    NoIrs,
    RandomPhase,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::TrellisMain,
        SchemeKind::TrellisLowOverhead,
        SchemeKind::SdrDiscrete,
        SchemeKind::SdrContinuous,
        SchemeKind::NoIrs,
        SchemeKind::RandomPhase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::TrellisMain => "trellis-main",
            SchemeKind::TrellisLowOverhead => "trellis-low-overhead",
            SchemeKind::SdrDiscrete => "sdr-discrete",
            SchemeKind::SdrContinuous => "sdr-continuous",
            SchemeKind::NoIrs => "no-irs",
            SchemeKind::RandomPhase => "random-phase",
        }
    }

    /// Stream tag of the scheme's private randomness. Both SDR variants share
    /// one, so they round the same Gaussian draws.
    fn stream_tag(self) -> u8 {
        match self {
            SchemeKind::TrellisMain => 0,
            SchemeKind::TrellisLowOverhead => 1,
            SchemeKind::SdrDiscrete | SchemeKind::SdrContinuous => 2,
            SchemeKind::NoIrs => 4,
            SchemeKind::RandomPhase => 5,
        }
    }

    pub fn is_sdr(self) -> bool {
        matches!(self, SchemeKind::SdrDiscrete | SchemeKind::SdrContinuous)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_draws")]
    pub rounding_draws: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_rounds() -> usize {
    1
}
fn default_draws() -> usize {
    SdrSettings::default().draws
}
fn default_tol() -> f64 {
    SdrSettings::default().tol
}
fn default_max_iter() -> usize {
    SdrSettings::default().max_iter
}

impl SchemeSpec {
    pub fn new(kind: SchemeKind) -> Self {
        SchemeSpec {
            kind,
            rounds: default_rounds(),
            rounding_draws: default_draws(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if self.rounds < 1 {
            return bad("rounds", "must be >= 1");
        }
        if self.kind.is_sdr() {
            if self.rounding_draws < 1 {
                return bad("rounding_draws", "must be >= 1 for SDR schemes");
            }
            if !(self.tol > 0.0 && self.tol <= 1e-3) {
                return bad("tol", "must lie in (0, 1e-3]");
            }
            if self.max_iter < 1 {
                return bad("max_iter", "must be >= 1");
            }
        }
        Ok(())
    }

    fn sdr_settings(&self) -> SdrSettings {
        SdrSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            draws: self.rounding_draws,
            projection: if self.kind == SchemeKind::SdrContinuous {
                PhaseProjection::Continuous
            } else {
                PhaseProjection::Discrete
            },
        }
    }
}

/// Outcome of one scheme on one trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub scheme: SchemeKind,
    pub x_all: Vec<CeVector>,
    pub psi: IrsPhases,
    pub mui: MuiEvaluation,
    pub mui_power_total: f64,
    pub per_user_rate: Vec<Vec<f64>>,
    pub per_cell_rate: Vec<f64>,
    pub avg_rate_per_cell: f64,
    /// Trellis branch comparisons over all passes (0 for SDR schemes).
    pub comparisons: u64,
    /// Channel coefficients the scheme does not need to acquire.
    pub overhead_saved: u64,
}

/// Everything a scheme needs besides the channels.
pub struct Problem<'a> {
    pub config: &'a SystemConfig,
    pub channels: &'a ChannelSet,
    pub symbols: &'a SymbolMatrix,
    /// Starting IRS vector.
    pub psi_init: IrsPhases,
}

impl<'a> Problem<'a> {
    /// Problem of trial `trial`, with the configured initial IRS vector.
    pub fn new(
        config: &'a SystemConfig,
        channels: &'a ChannelSet,
        symbols: &'a SymbolMatrix,
        trial: u64,
    ) -> Result<Self> {
        if channels.cells() != config.cells
            || channels.users() != config.users
            || channels.antennas() != config.bs_antennas
            || channels.elements() != config.irs_elements
        {
            return Err(mismatch(
                "channel set",
                format!(
                    "L={} K={} N_T={} M={}",
                    config.cells, config.users, config.bs_antennas, config.irs_elements
                ),
                format!(
                    "L={} K={} N_T={} M={}",
                    channels.cells(),
                    channels.users(),
                    channels.antennas(),
                    channels.elements()
                ),
            ));
        }
        let psi_init = match config.irs_init {
            IrsInit::Zero => IrsPhases::identity(config.irs_levels, config.irs_elements),
            IrsInit::Random => {
                let mut rng = stream(config.seed, trial, Purpose::IrsInit);
                random_phases(&mut rng, config.irs_levels, config.irs_elements)
            }
        };
        Ok(Problem {
            config,
            channels,
            symbols,
            psi_init,
        })
    }
}

fn random_phases<R: Rng + ?Sized>(rng: &mut R, levels: usize, len: usize) -> IrsPhases {
    IrsPhases {
        phases: Phases::Discrete {
            levels,
            index: (0..len).map(|_| rng.random_range(0..levels)).collect(),
        },
    }
}

fn bs_alphabet(cfg: &SystemConfig) -> Vec<Complex64> {
    alphabet(cfg.bs_levels, cfg.amplitude())
}

fn to_ce(cfg: &SystemConfig, r: &TrellisResult) -> CeVector {
    CeVector {
        amplitude: cfg.amplitude(),
        phases: Phases::Discrete {
            levels: cfg.bs_levels,
            index: r.assignment.clone(),
        },
    }
}

fn to_irs(cfg: &SystemConfig, r: &TrellisResult) -> IrsPhases {
    IrsPhases {
        phases: Phases::Discrete {
            levels: cfg.irs_levels,
            index: r.assignment.clone(),
        },
    }
}

fn values(x_all: &[CeVector]) -> Vec<Vec<Complex64>> {
    x_all.iter().map(CeVector::values).collect()
}

/// Exact MUI and rates of `(x_all, psi)`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    scheme: SchemeKind,
    cfg: &SystemConfig,
    channels: &ChannelSet,
    symbols: &SymbolMatrix,
    x_all: Vec<CeVector>,
    psi: IrsPhases,
    comparisons: u64,
    overhead_saved: u64,
) -> Result<TrialReport> {
    let mui = mui_vectors(channels, &values(&x_all), &psi.values(), symbols)?;
    let per_user_rate = (0..channels.cells())
        .map(|j| {
            (0..channels.users())
                .map(|i| {
                    per_user_rate(
                        mui.user_power(j, i),
                        symbols.s[j][i].norm_sqr(),
                        cfg.noise_power,
                    )
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let per_cell_rate: Vec<f64> = per_user_rate.iter().map(|r| r.iter().sum()).collect();
    let avg_rate_per_cell = per_cell_rate.iter().sum::<f64>() / per_cell_rate.len() as f64;
    Ok(TrialReport {
        scheme,
        x_all,
        mui_power_total: mui.total,
        mui,
        psi,
        per_user_rate,
        per_cell_rate,
        avg_rate_per_cell,
        comparisons,
        overhead_saved,
    })
}

fn irs_active(cfg: &SystemConfig, channels: &ChannelSet) -> bool {
    cfg.has_irs() && channels.elements() > 0
}

/// Single-cell trellis scheme: x-pass on the BS objective with the current
/// IRS vector, then an IRS pass with x fixed; `rounds` times.
pub fn run_single_cell(p: &Problem<'_>, spec: &SchemeSpec) -> Result<TrialReport> {
    let (cfg, ch, sym) = (p.config, p.channels, p.symbols);
    spec.validate()?;
    if ch.cells() != 1 {
        return Err(mismatch("single-cell channel set", 1, ch.cells()));
    }
    let mut psi = p.psi_init.clone();
    let mut x = CeVector {
        amplitude: cfg.amplitude(),
        phases: Phases::zeros(cfg.bs_levels, cfg.bs_antennas),
    };
    let mut comparisons = 0;
    for _ in 0..spec.rounds {
        let ctx = XContext::single_cell(ch, &psi.values(), sym)?;
        let r = minimize_objective(&ctx, cfg.bs_memory, bs_alphabet(cfg))?;
        comparisons += r.comparisons;
        x = to_ce(cfg, &r);
        if irs_active(cfg, ch) {
            let ctx = PsiContext::single_cell(ch, &x.values(), sym)?;
            let r = minimize_objective(&ctx, cfg.irs_memory, alphabet(cfg.irs_levels, 1.0))?;
            comparisons += r.comparisons;
            psi = to_irs(cfg, &r);
        }
    }
    evaluate(spec.kind, cfg, ch, sym, vec![x], psi, comparisons, 0)
}

fn bs_trellis_pass(
    p: &Problem<'_>,
    psi: &IrsPhases,
    low_overhead: bool,
) -> Result<(Vec<CeVector>, u64)> {
    let (cfg, ch, sym) = (p.config, p.channels, p.symbols);
    let psi_v = psi.values();
    let mut comparisons = 0;
    let mut x_all = Vec::with_capacity(ch.cells());
    for j in 0..ch.cells() {
        let r = if low_overhead {
            let ctx = LowOverheadXContext::new(ch, j, &psi_v, sym)?;
            minimize_objective(&ctx, cfg.bs_memory, bs_alphabet(cfg))?
        } else {
            let ctx = XContext::for_cell(ch, j, &psi_v, sym)?;
            minimize_objective(&ctx, cfg.bs_memory, bs_alphabet(cfg))?
        };
        comparisons += r.comparisons;
        x_all.push(to_ce(cfg, &r));
    }
    Ok((x_all, comparisons))
}

fn multicell_trellis(
    p: &Problem<'_>,
    spec: &SchemeSpec,
    mode: IrsMode,
) -> Result<(Vec<CeVector>, IrsPhases, u64)> {
    let (cfg, ch, sym) = (p.config, p.channels, p.symbols);
    spec.validate()?;
    let mut psi = p.psi_init.clone();
    let mut x_all = Vec::new();
    let mut comparisons = 0;
    for _ in 0..spec.rounds {
        let (x, c) = bs_trellis_pass(p, &psi, mode == IrsMode::LowOverhead)?;
        comparisons += c;
        x_all = x;
        if irs_active(cfg, ch) {
            let ctx = MultiPsiContext::new(ch, &values(&x_all), sym, mode)?;
            let r = minimize_objective(&ctx, cfg.irs_memory, alphabet(cfg.irs_levels, 1.0))?;
            comparisons += r.comparisons;
            psi = to_irs(cfg, &r);
        }
    }
    Ok((x_all, psi, comparisons))
}

/// Every BS runs the single-cell trellis on its own channels; the IRS pass
/// then uses all cells' vectors and all direct links.
pub fn run_multicell_main(p: &Problem<'_>, spec: &SchemeSpec) -> Result<TrialReport> {
    let (x_all, psi, comparisons) = multicell_trellis(p, spec, IrsMode::Main)?;
    evaluate(spec.kind, p.config, p.channels, p.symbols, x_all, psi, comparisons, 0)
}

/// Coefficients the low-overhead scheme does not acquire: `L (L-1) K N_T`.
pub fn overhead_saved(cfg: &SystemConfig) -> u64 {
    (cfg.cells * (cfg.cells - 1) * cfg.users * cfg.bs_antennas) as u64
}

/// Per-BS objectives use only intra-cell direct links plus inter-cell
/// statistics; the IRS pass drops the inter-cell direct paths.
pub fn run_multicell_low_overhead(p: &Problem<'_>, spec: &SchemeSpec) -> Result<TrialReport> {
    let (x_all, psi, comparisons) = multicell_trellis(p, spec, IrsMode::LowOverhead)?;
    evaluate(
        spec.kind,
        p.config,
        p.channels,
        p.symbols,
        x_all,
        psi,
        comparisons,
        overhead_saved(p.config),
    )
}

/// Relaxation benchmark: per-cell SDR precoders (cells independent), then
/// the joint IRS relaxation. Rounding draws come from `rng` in cell order,
/// then IRS.
pub fn run_multicell_sdr(
    p: &Problem<'_>,
    spec: &SchemeSpec,
    rng: &mut StreamRng,
) -> Result<TrialReport> {
    let (cfg, ch, sym) = (p.config, p.channels, p.symbols);
    spec.validate()?;
    if !spec.kind.is_sdr() {
        return Err(Error::InvalidArgument(format!(
            "{} is not an SDR scheme",
            spec.kind
        )));
    }
    let settings = spec.sdr_settings();
    let amplitude = cfg.amplitude();
    let mut psi = p.psi_init.clone();
    let mut x_all = Vec::new();
    for _ in 0..spec.rounds {
        let psi_v = psi.values();
        x_all = (0..ch.cells())
            .map(|j| {
                let out =
                    sdr_precode_bs(ch, &psi_v, sym, j, amplitude, cfg.bs_levels, &settings, rng)?;
                Ok(CeVector {
                    amplitude,
                    phases: out.phases,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if irs_active(cfg, ch) {
            let out = sdr_beamform_irs(ch, &values(&x_all), sym, cfg.irs_levels, &settings, rng)?;
            psi = IrsPhases { phases: out.phases };
        }
    }
    evaluate(spec.kind, cfg, ch, sym, x_all, psi, 0, 0)
}

/// BS trellis on the IRS-free channels; the IRS is ignored entirely.
pub fn run_no_irs(p: &Problem<'_>, spec: &SchemeSpec) -> Result<TrialReport> {
    spec.validate()?;
    let bare = p.channels.without_irs();
    let cfg = p.config;
    let q = Problem {
        config: cfg,
        channels: &bare,
        symbols: p.symbols,
        psi_init: IrsPhases::identity(cfg.irs_levels, cfg.irs_elements),
    };
    let mut comparisons = 0;
    let mut x_all = Vec::new();
    for _ in 0..spec.rounds {
        let (x, c) = bs_trellis_pass(&q, &q.psi_init, false)?;
        comparisons += c;
        x_all = x;
    }
    evaluate(spec.kind, cfg, &bare, p.symbols, x_all, q.psi_init, comparisons, 0)
}

/// Uniformly random IRS indices, then the BS trellis against them.
pub fn run_random_phase(
    p: &Problem<'_>,
    spec: &SchemeSpec,
    rng: &mut StreamRng,
) -> Result<TrialReport> {
    spec.validate()?;
    let cfg = p.config;
    let psi = if irs_active(cfg, p.channels) {
        random_phases(rng, cfg.irs_levels, cfg.irs_elements)
    } else {
        p.psi_init.clone()
    };
    let (x_all, comparisons) = bs_trellis_pass(p, &psi, false)?;
    evaluate(spec.kind, cfg, p.channels, p.symbols, x_all, psi, comparisons, 0)
}

/// Runs `spec` on a prepared problem of trial `trial`.
pub fn run_scheme(p: &Problem<'_>, spec: &SchemeSpec, trial: u64) -> Result<TrialReport> {
    let mut rng = stream(p.config.seed, trial, Purpose::Scheme(spec.kind.stream_tag()));
    match spec.kind {
        SchemeKind::TrellisMain if p.config.cells == 1 => run_single_cell(p, spec),
        SchemeKind::TrellisMain => run_multicell_main(p, spec),
        SchemeKind::TrellisLowOverhead => run_multicell_low_overhead(p, spec),
        SchemeKind::SdrDiscrete | SchemeKind::SdrContinuous => run_multicell_sdr(p, spec, &mut rng),
        SchemeKind::NoIrs => run_no_irs(p, spec),
        SchemeKind::RandomPhase => run_random_phase(p, spec, &mut rng),
    }
}

/// Generates trial `trial` of `cfg` and runs every scheme in order.
pub fn run_trial(cfg: &SystemConfig, trial: u64, specs: &[SchemeSpec]) -> Result<Vec<TrialReport>> {
    cfg.validate()?;
    let channels = generate_channels(cfg, trial);
    let symbols = generate_symbols(cfg, trial);
    let p = Problem::new(cfg, &channels, &symbols, trial)?;
    specs.iter().map(|s| run_scheme(&p, s, trial)).collect()
}
