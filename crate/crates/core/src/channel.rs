//! Channel realizations and desired symbols for one Monte-Carlo trial.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::config::SystemConfig;
use crate::rng::{complex_gaussian, stream, Purpose};

pub type CMatrix = DMatrix<Complex64>;

/// Every channel of one trial.
///
/// Rows of `bs_user[l][j]` are the `1 x N_T` channels from BS `l` to the users
/// of cell `j`; `bs_irs[l]` is `M x N_T`; rows of `irs_user[j]` are the
/// `1 x M` channels from the IRS to the users of cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub bs_user: Vec<Vec<CMatrix>>,
    pub bs_irs: Vec<CMatrix>,
    pub irs_user: Vec<CMatrix>,
    pub beta_bs_user: Vec<Vec<Vec<f64>>>,
    pub beta_bs_irs: Vec<f64>,
    pub beta_irs_user: Vec<Vec<f64>>,
}

impl ChannelSet {
    pub fn cells(&self) -> usize {
        self.bs_irs.len()
    }

    pub fn users(&self) -> usize {
        self.irs_user.first().map_or(0, |g| g.nrows())
    }

    pub fn antennas(&self) -> usize {
        self.bs_irs.first().map_or(0, |g| g.ncols())
    }

    pub fn elements(&self) -> usize {
        self.bs_irs.first().map_or(0, |g| g.nrows())
    }

    /// Copy with every BS-IRS and IRS-user channel (and its fading) zeroed.
    pub fn without_irs(&self) -> ChannelSet {
        let mut out = self.clone();
        for g in out.bs_irs.iter_mut().chain(out.irs_user.iter_mut()) {
            g.fill(Complex64::new(0.0, 0.0));
        }
        out.beta_bs_irs.iter_mut().for_each(|b| *b = 0.0);
        out.beta_irs_user
            .iter_mut()
            .flatten()
            .for_each(|b| *b = 0.0);
        out
    }

    /// Assemble a channel set from explicit matrices (fading recorded as 1).
    pub fn from_matrices(
        bs_user: Vec<Vec<CMatrix>>,
        bs_irs: Vec<CMatrix>,
        irs_user: Vec<CMatrix>,
    ) -> ChannelSet {
        let cells = bs_irs.len();
        let users = irs_user.first().map_or(0, |g| g.nrows());
        ChannelSet {
            beta_bs_user: vec![vec![vec![1.0; users]; cells]; cells],
            beta_bs_irs: vec![1.0; cells],
            beta_irs_user: vec![vec![1.0; users]; cells],
            bs_user,
            bs_irs,
            irs_user,
        }
    }
}

fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: &dyn Fn(usize) -> f64) -> CMatrix {
    let data: Vec<Complex64> = (0..rows * cols)
        .map(|k| complex_gaussian(rng) * scale(k / cols.max(1)))
        .collect();
    DMatrix::from_row_iterator(rows, cols, data)
}

/// Draws all channels of trial `trial_index`.
///
/// Each family (BS-user, BS-IRS, IRS-user) has its own stream, and every
/// small-scale entry is drawn even when its fading is zero, so the draws of
/// one family never depend on another family's dimensions or fading.
pub fn generate_channels(config: &SystemConfig, trial_index: u64) -> ChannelSet {
    let (cells, users, antennas, elements) = (
        config.cells,
        config.users,
        config.bs_antennas,
        config.irs_elements,
    );
    let irs_on = config.irs_enabled;

    let beta_bs_user: Vec<Vec<Vec<f64>>> = (0..cells)
        .map(|l| {
            (0..cells)
                .map(|j| (0..users).map(|i| config.beta.bs_user(l, j, i)).collect())
                .collect()
        })
        .collect();
    let beta_bs_irs: Vec<f64> = (0..cells)
        .map(|l| if irs_on { config.beta.bs_irs(l) } else { 0.0 })
        .collect();
    let beta_irs_user: Vec<Vec<f64>> = (0..cells)
        .map(|j| {
            (0..users)
                .map(|i| if irs_on { config.beta.irs_user(j, i) } else { 0.0 })
                .collect()
        })
        .collect();

    let mut rng = stream(config.seed, trial_index, Purpose::BsUserChannels);
    let bs_user = (0..cells)
        .map(|l| {
            (0..cells)
                .map(|j| {
                    let beta = &beta_bs_user[l][j];
                    gaussian_matrix(&mut rng, users, antennas, &|i| beta[i].sqrt())
                })
                .collect()
        })
        .collect();

    let mut rng = stream(config.seed, trial_index, Purpose::BsIrsChannels);
    let bs_irs = (0..cells)
        .map(|l| {
            let s = beta_bs_irs[l].sqrt();
            gaussian_matrix(&mut rng, elements, antennas, &|_| s)
        })
        .collect();

    let mut rng = stream(config.seed, trial_index, Purpose::IrsUserChannels);
    let irs_user = (0..cells)
        .map(|j| {
            let beta = &beta_irs_user[j];
            gaussian_matrix(&mut rng, users, elements, &|i| beta[i].sqrt())
        })
        .collect();

    ChannelSet {
        bs_user,
        bs_irs,
        irs_user,
        beta_bs_user,
        beta_bs_irs,
        beta_irs_user,
    }
}

/// Desired symbols `s[j][i]` for user `i` of cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub s: Vec<Vec<Complex64>>,
}

impl SymbolMatrix {
    pub fn cells(&self) -> usize {
        self.s.len()
    }

    pub fn cell(&self, j: usize) -> &[Complex64] {
        &self.s[j]
    }

    pub fn zeros(cells: usize, users: usize) -> Self {
        SymbolMatrix {
            s: vec![vec![Complex64::new(0.0, 0.0); users]; cells],
        }
    }
}

/// Independent unit-power QPSK symbols from `{+-1 +- j} / sqrt(2)`.
pub fn generate_symbols(config: &SystemConfig, trial_index: u64) -> SymbolMatrix {
    let mut rng = stream(config.seed, trial_index, Purpose::Symbols);
    let s = (0..config.cells)
        .map(|_| {
            (0..config.users)
                .map(|_| {
                    let re = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let im = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    Complex64::new(re, im) * FRAC_1_SQRT_2
                })
                .collect()
        })
        .collect();
    SymbolMatrix { s }
}
