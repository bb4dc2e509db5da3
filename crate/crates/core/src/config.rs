//! Scenario dimensions, powers, alphabets and large-scale fading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-antenna amplitude convention for the constant-envelope transmit vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeMode {
    /// Every antenna radiates with modulus `P_T / N_T`.
    #[default]
    PowerRatio,
    /// Every antenna radiates with modulus `sqrt(P_T / N_T)`, so `|x|^2 = P_T`.
    PowerNormalized,
}

impl AmplitudeMode {
    pub fn amplitude(self, total_power: f64, antennas: usize) -> f64 {
        let per_antenna = total_power / antennas as f64;
        match self {
            AmplitudeMode::PowerRatio => per_antenna,
            AmplitudeMode::PowerNormalized => per_antenna.sqrt(),
        }
    }
}

/// How the IRS phases are initialised before the first BS pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IrsInit {
    /// All reflection coefficients equal to 1.
    #[default]
    Zero,
    /// Uniform alphabet indices drawn from the trial's IRS-init stream.
    Random,
}

/// Large-scale fading coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BetaSpec {
    /// Intra-cell BS-user links use `intra_cell`, inter-cell ones `inter_cell`;
    /// BS-IRS and IRS-user links use their own constants.
    TwoLevel {
        #[serde(default = "one")]
        intra_cell: f64,
        #[serde(default = "default_inter_cell")]
        inter_cell: f64,
        #[serde(default = "one")]
        bs_irs: f64,
        #[serde(default = "one")]
        irs_user: f64,
    },
    /// Explicit per-link constants.
    /// `bs_user[l][j][i]`: BS `l` to user `i` of cell `j`; `bs_irs[l]`; `irs_user[j][i]`.
    Explicit {
        bs_user: Vec<Vec<Vec<f64>>>,
        bs_irs: Vec<f64>,
        irs_user: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_inter_cell() -> f64 {
    0.3
}

impl Default for BetaSpec {
    fn default() -> Self {
        BetaSpec::TwoLevel {
            intra_cell: 1.0,
            inter_cell: default_inter_cell(),
            bs_irs: 1.0,
            irs_user: 1.0,
        }
    }
}

impl BetaSpec {
    pub fn bs_user(&self, bs: usize, cell: usize, user: usize) -> f64 {
        match self {
            BetaSpec::TwoLevel {
                intra_cell,
                inter_cell,
                ..
            } => {
                if bs == cell {
                    *intra_cell
                } else {
                    *inter_cell
                }
            }
            BetaSpec::Explicit { bs_user, .. } => bs_user[bs][cell][user],
        }
    }

    pub fn bs_irs(&self, bs: usize) -> f64 {
        match self {
            BetaSpec::TwoLevel { bs_irs, .. } => *bs_irs,
            BetaSpec::Explicit { bs_irs, .. } => bs_irs[bs],
        }
    }

    pub fn irs_user(&self, cell: usize, user: usize) -> f64 {
        match self {
            BetaSpec::TwoLevel { irs_user, .. } => *irs_user,
            BetaSpec::Explicit { irs_user, .. } => irs_user[cell][user],
        }
    }

    fn validate(&self, cells: usize, users: usize) -> Result<()> {
        let check = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            BetaSpec::TwoLevel {
                intra_cell,
                inter_cell,
                bs_irs,
                irs_user,
            } => {
                if ![*intra_cell, *inter_cell, *bs_irs, *irs_user]
                    .into_iter()
                    .all(check)
                {
                    return Err(invalid("beta", "coefficients must be finite and >= 0"));
                }
            }
            BetaSpec::Explicit {
                bs_user,
                bs_irs,
                irs_user,
            } => {
                let bu_ok = bs_user.len() == cells
                    && bs_user.iter().all(|per_bs| {
                        per_bs.len() == cells
                            && per_bs
                                .iter()
                                .all(|c| c.len() == users && c.iter().copied().all(check))
                    });
                if !bu_ok {
                    return Err(invalid(
                        "beta.bs_user",
                        format!("expected {cells}x{cells}x{users} nonnegative values"),
                    ));
                }
                if bs_irs.len() != cells || !bs_irs.iter().copied().all(check) {
                    return Err(invalid(
                        "beta.bs_irs",
                        format!("expected {cells} nonnegative values"),
                    ));
                }
                let iu_ok = irs_user.len() == cells
                    && irs_user
                        .iter()
                        .all(|c| c.len() == users && c.iter().copied().all(check));
                if !iu_ok {
                    return Err(invalid(
                        "beta.irs_user",
                        format!("expected {cells}x{users} nonnegative values"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// Everything that defines one simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Number of cells `L`.
    pub cells: usize,
    /// Users per cell `K`.
    pub users: usize,
    /// BS antennas `N_T`.
    pub bs_antennas: usize,
    /// IRS elements `M`.
    pub irs_elements: usize,
    /// BS phase-alphabet size `N_BS`.
    pub bs_levels: usize,
    /// IRS phase-alphabet size `N_IRS`.
    pub irs_levels: usize,
    /// BS trellis memory `T`.
    pub bs_memory: usize,
    /// IRS trellis memory `B`.
    pub irs_memory: usize,
    /// Total BS transmit power `P_T` in watts.
    pub total_power: f64,
    /// Linear noise power.
    pub noise_power: f64,
    #[serde(default)]
    pub amplitude_mode: AmplitudeMode,
    #[serde(default = "default_true")]
    pub irs_enabled: bool,
    pub seed: u64,
    pub mc_trials: usize,
    #[serde(default)]
    pub beta: BetaSpec,
    #[serde(default)]
    pub irs_init: IrsInit,
}

fn default_true() -> bool {
    true
}

impl SystemConfig {
    /// Single-cell scenario with unit large-scale fading everywhere.
    pub fn single_cell(users: usize, bs_antennas: usize, irs_elements: usize) -> Self {
        SystemConfig {
            cells: 1,
            users,
            bs_antennas,
            irs_elements,
            bs_levels: 4,
            irs_levels: 4,
            bs_memory: 2.min(bs_antennas),
            irs_memory: 2.min(irs_elements.max(1)),
            total_power: 3.0,
            noise_power: 1e-3,
            amplitude_mode: AmplitudeMode::PowerRatio,
            irs_enabled: true,
            seed: 1,
            mc_trials: 1,
            beta: BetaSpec::default(),
            irs_init: IrsInit::Zero,
        }
    }

    /// Multi-cell scenario with the two-level fading default.
    pub fn multi_cell(cells: usize, users: usize, bs_antennas: usize, irs_elements: usize) -> Self {
        SystemConfig {
            cells,
            ..Self::single_cell(users, bs_antennas, irs_elements)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 1 {
            return Err(invalid("cells", "must be >= 1"));
        }
        if self.users < 1 {
            return Err(invalid("users", "must be >= 1"));
        }
        if self.bs_antennas < 1 {
            return Err(invalid("bs_antennas", "must be >= 1"));
        }
        if self.bs_levels < 2 {
            return Err(invalid("bs_levels", "must be >= 2"));
        }
        if self.irs_levels < 2 {
            return Err(invalid("irs_levels", "must be >= 2"));
        }
        if self.bs_memory < 1 || self.bs_memory > self.bs_antennas {
            return Err(invalid(
                "bs_memory",
                format!("must be in [1, {}]", self.bs_antennas),
            ));
        }
        let max_b = self.irs_elements.max(1);
        if self.irs_memory < 1 || self.irs_memory > max_b {
            return Err(invalid("irs_memory", format!("must be in [1, {max_b}]")));
        }
        if !(self.total_power.is_finite() && self.total_power > 0.0) {
            return Err(invalid("total_power", "must be finite and > 0"));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(invalid("noise_power", "must be finite and > 0"));
        }
        self.beta.validate(self.cells, self.users)
    }

    /// Per-antenna transmit modulus `a`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude_mode
            .amplitude(self.total_power, self.bs_antennas)
    }

    /// Whether any IRS path can carry energy.
    pub fn has_irs(&self) -> bool {
        self.irs_enabled && self.irs_elements > 0
    }
}
