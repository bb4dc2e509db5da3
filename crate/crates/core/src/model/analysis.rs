//! IRS interference analysis: the per-cell linear model `e = Pi psi - eta`,
//! the per-user gain decomposition and the pseudo-inverse reflection vector.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{CMatrix, ChannelSet, SymbolMatrix};
use crate::error::{mismatch, Error, Result};
use crate::phase::{CeVector, IrsPhases};

/// `(Pi, eta)` of cell `cell` for fixed BS vectors:
/// `Pi = G_IU diag(sum_l G_BI_l x_l)` and `eta = s - sum_l G_BU_l x_l`.
pub fn cell_irs_system(
    ch: &ChannelSet,
    x_all: &[Vec<Complex64>],
    symbols: &SymbolMatrix,
    cell: usize,
) -> Result<(CMatrix, DVector<Complex64>)> {
    if cell >= ch.cells() {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            len: ch.cells(),
        });
    }
    if x_all.len() != ch.cells() {
        return Err(mismatch("transmit vectors", ch.cells(), x_all.len()));
    }
    let xs: Vec<DVector<Complex64>> = x_all
        .iter()
        .map(|x| DVector::from_column_slice(x))
        .collect();
    if let Some(x) = xs.iter().find(|x| x.len() != ch.antennas()) {
        return Err(mismatch("transmit vector length", ch.antennas(), x.len()));
    }
    let mut a = DVector::zeros(ch.elements());
    let mut eta = DVector::from_column_slice(symbols.cell(cell));
    for (l, x) in xs.iter().enumerate() {
        a += &ch.bs_irs[l] * x;
        eta -= &ch.bs_user[l][cell] * x;
    }
    let mut pi = ch.irs_user[cell].clone();
    for (m, am) in a.iter().enumerate() {
        for v in pi.column_mut(m).iter_mut() {
            *v *= am;
        }
    }
    Ok((pi, eta))
}

/// Splits user `(cell, user)`'s MUI power into the IRS-induced part `J` and
/// the IRS-free power `|eta|^2`. Their sum is the user's MUI power with the IRS.
pub fn irs_gain_decomposition(
    ch: &ChannelSet,
    x_all: &[CeVector],
    psi: &IrsPhases,
    symbols: &SymbolMatrix,
    cell: usize,
    user: usize,
) -> Result<(f64, f64)> {
    if user >= ch.users() {
        return Err(Error::IndexOutOfRange {
            what: "user",
            index: user,
            len: ch.users(),
        });
    }
    if psi.len() != ch.elements() {
        return Err(mismatch("IRS phase vector length", ch.elements(), psi.len()));
    }
    let xs: Vec<Vec<Complex64>> = x_all.iter().map(CeVector::values).collect();
    let (pi, eta) = cell_irs_system(ch, &xs, symbols, cell)?;
    let psi = DVector::from_vec(psi.values());
    let reflected = (pi.row(user) * &psi)[(0, 0)];
    let eta_i = eta[user];
    let j_term = reflected.norm_sqr() - 2.0 * (eta_i.conj() * reflected).re;
    Ok((j_term, eta_i.norm_sqr()))
}

/// Pseudo-inverse IRS vector `mu Pi^H (Pi Pi^H)^{-1} eta`.
#[derive(Debug, Clone)]
pub struct InterferenceFree {
    pub psi: DVector<Complex64>,
    pub mu: f64,
    /// `||Pi (psi / mu) - eta||`, i.e. before the power scaling.
    pub residual: f64,
}

pub fn interference_free_irs(pi: &CMatrix, eta: &DVector<Complex64>) -> Result<InterferenceFree> {
    let (rows, cols) = pi.shape();
    if eta.len() != rows {
        return Err(mismatch("eta length", rows, eta.len()));
    }
    if rows > cols {
        return Err(Error::OverDetermined { rows, cols });
    }
    let sv = pi.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if max.is_nan() || max <= 0.0 || min <= 1e-10 * max {
        return Err(Error::RankDeficient);
    }
    let gram_inv = (pi * pi.adjoint())
        .try_inverse()
        .ok_or(Error::RankDeficient)?;
    let unscaled = pi.adjoint() * (&gram_inv * eta);
    let residual = (pi * &unscaled - eta).norm();
    // (Pi Pi^H)^{-1} has the same trace as (Pi^H Pi)^{-1} whenever the latter exists
    let mu = 1.0 / gram_inv.trace().re.sqrt();
    Ok(InterferenceFree {
        psi: unscaled * Complex64::new(mu, 0.0),
        mu,
        residual,
    })
}
