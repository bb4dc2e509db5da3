use num_complex::Complex64;

use crate::channel::{ChannelSet, SymbolMatrix};
use crate::error::{mismatch, Result};
use crate::phase::{CeVector, IrsPhases};

/// Per-user MUI terms `e[j][i]` and their summed power.
#[derive(Debug, Clone, PartialEq)]
pub struct MuiEvaluation {
    pub per_user: Vec<Vec<Complex64>>,
    pub total: f64,
}

impl MuiEvaluation {
    pub fn user_power(&self, cell: usize, user: usize) -> f64 {
        self.per_user[cell][user].norm_sqr()
    }
}

fn check_dims(
    ch: &ChannelSet,
    x_all: &[Vec<Complex64>],
    psi: &[Complex64],
    symbols: &SymbolMatrix,
) -> Result<()> {
    let (cells, users, antennas, elements) = (ch.cells(), ch.users(), ch.antennas(), ch.elements());
    if x_all.len() != cells {
        return Err(mismatch("transmit vectors", cells, x_all.len()));
    }
    if let Some(x) = x_all.iter().find(|x| x.len() != antennas) {
        return Err(mismatch("transmit vector length", antennas, x.len()));
    }
    if psi.len() != elements {
        return Err(mismatch("IRS phase vector length", elements, psi.len()));
    }
    if symbols.cells() != cells || symbols.s.iter().any(|c| c.len() != users) {
        return Err(mismatch(
            "symbol matrix",
            format!("{cells}x{users}"),
            format!(
                "{}x{}",
                symbols.cells(),
                symbols.s.first().map_or(0, |c| c.len())
            ),
        ));
    }
    if ch.bs_user.len() != cells
        || ch.bs_user.iter().any(|r| {
            r.len() != cells || r.iter().any(|g| g.shape() != (users, antennas))
        })
    {
        return Err(mismatch(
            "BS-user channels",
            format!("{cells}x{cells} blocks of {users}x{antennas}"),
            "ragged",
        ));
    }
    if ch.irs_user.len() != cells || ch.irs_user.iter().any(|g| g.shape() != (users, elements)) {
        return Err(mismatch(
            "IRS-user channels",
            format!("{cells} blocks of {users}x{elements}"),
            "ragged",
        ));
    }
    Ok(())
}

/// `e[j][i] = sum_l g_BU_l[i,j] x_l + sum_l g_IU[i,j] Psi G_BI_l x_l - s[i,j]`.
pub fn mui_vectors(
    ch: &ChannelSet,
    x_all: &[Vec<Complex64>],
    psi: &[Complex64],
    symbols: &SymbolMatrix,
) -> Result<MuiEvaluation> {
    check_dims(ch, x_all, psi, symbols)?;
    let cells = ch.cells();
    let mut total = 0.0;
    let per_user: Vec<Vec<Complex64>> = (0..cells)
        .map(|j| {
            (0..ch.users())
                .map(|i| {
                    let mut e = -symbols.s[j][i];
                    for (l, x) in x_all.iter().enumerate() {
                        let g_bu = ch.bs_user[l][j].row(i);
                        e += g_bu.iter().zip(x).map(|(g, x)| g * x).sum::<Complex64>();
                        let g_bi = &ch.bs_irs[l];
                        let g_iu = ch.irs_user[j].row(i);
                        for (m, (g, p)) in g_iu.iter().zip(psi).enumerate() {
                            let reflected: Complex64 =
                                g_bi.row(m).iter().zip(x).map(|(h, x)| h * x).sum();
                            e += g * p * reflected;
                        }
                    }
                    total += e.norm_sqr();
                    e
                })
                .collect()
        })
        .collect();
    Ok(MuiEvaluation { per_user, total })
}

/// Total MUI power across all cells.
pub fn mui_power_multi(
    ch: &ChannelSet,
    x_all: &[CeVector],
    psi: &IrsPhases,
    symbols: &SymbolMatrix,
) -> Result<MuiEvaluation> {
    let xs: Vec<Vec<Complex64>> = x_all.iter().map(CeVector::values).collect();
    mui_vectors(ch, &xs, &psi.values(), symbols)
}

/// Total MUI power of a single-cell scenario.
pub fn mui_power_single(
    ch: &ChannelSet,
    x: &CeVector,
    psi: &IrsPhases,
    symbols: &SymbolMatrix,
) -> Result<MuiEvaluation> {
    if ch.cells() != 1 {
        return Err(mismatch("single-cell channel set", 1, ch.cells()));
    }
    mui_power_multi(ch, std::slice::from_ref(x), psi, symbols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channels, generate_symbols, CMatrix};
    use crate::config::SystemConfig;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_symbol_match_gives_zero() {
        let ch = ChannelSet::from_matrices(
            vec![vec![DMatrix::from_element(1, 1, c(1.0, 0.0))]],
            vec![DMatrix::zeros(1, 1)],
            vec![DMatrix::from_element(1, 1, c(0.7, 0.1))],
        );
        let x = CeVector::discrete(4, vec![0], 1.0).unwrap();
        let psi = IrsPhases::identity(4, 1);
        let s = SymbolMatrix { s: vec![vec![c(1.0, 0.0)]] };
        let ev = mui_power_single(&ch, &x, &psi, &s).unwrap();
        assert_eq!(ev.total, 0.0);
        assert_eq!(ev.per_user[0][0], c(0.0, 0.0));
    }

    #[test]
    fn zero_channels_leave_symbol_power() {
        let k = 3;
        let ch = ChannelSet::from_matrices(
            vec![vec![CMatrix::zeros(k, 2)]],
            vec![CMatrix::zeros(2, 2)],
            vec![CMatrix::zeros(k, 2)],
        );
        let cfg = SystemConfig::single_cell(k, 2, 2);
        let s = generate_symbols(&cfg, 0);
        let x = CeVector::discrete(4, vec![1, 2], 0.5).unwrap();
        let ev = mui_power_single(&ch, &x, &IrsPhases::identity(4, 2), &s).unwrap();
        assert!((ev.total - k as f64).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let cfg = SystemConfig::single_cell(2, 4, 3);
        let ch = generate_channels(&cfg, 0);
        let s = generate_symbols(&cfg, 0);
        let x = CeVector::discrete(4, vec![0; 3], 1.0).unwrap();
        let err = mui_power_single(&ch, &x, &IrsPhases::identity(4, 3), &s).unwrap_err();
        assert!(err.to_string().contains("expected 4, got 3"), "{err}");
        let x = CeVector::discrete(4, vec![0; 4], 1.0).unwrap();
        assert!(mui_power_single(&ch, &x, &IrsPhases::identity(4, 2), &s).is_err());
    }

    #[test]
    fn total_is_sum_of_user_powers() {
        let cfg = SystemConfig::multi_cell(2, 3, 4, 5);
        let ch = generate_channels(&cfg, 2);
        let s = generate_symbols(&cfg, 2);
        let xs = vec![
            CeVector::discrete(4, vec![0, 1, 2, 3], 0.75).unwrap(),
            CeVector::discrete(4, vec![3, 3, 1, 0], 0.75).unwrap(),
        ];
        let psi = IrsPhases::discrete(4, vec![1, 0, 2, 3, 1]).unwrap();
        let ev = mui_power_multi(&ch, &xs, &psi, &s).unwrap();
        let sum: f64 = ev.per_user.iter().flatten().map(|e| e.norm_sqr()).sum();
        assert!((sum - ev.total).abs() <= 1e-9 * ev.total);
    }
}
