//! Sequential-term objectives.
//!
//! Each context expands an MUI power into `sum_k term(k, z_0..z_k)` where the
//! `k`-th summand depends only on the first `k + 1` variables. Terms carry the
//! full weight of the quadratic expansion (cross terms `2 Re{..}`, linear
//! terms `-2 Re{..}`), so the sum equals the MUI power minus a constant that
//! does not depend on the optimized variables. The per-entry `|z_k|^2`
//! diagonal contributions are constant under the modulus constraint and are
//! not charged.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{CMatrix, ChannelSet, SymbolMatrix};
use crate::error::{mismatch, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An objective that splits into prefix-dependent summands.
pub trait SequentialObjective {
    /// Number of variables (and summands).
    fn len(&self) -> usize;

    /// `k`-th summand, 0-based. `prefix` holds at least `k + 1` entries; only
    /// entries `0..=k` are read.
    fn term(&self, k: usize, prefix: &[Complex64]) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn checked_term(&self, k: usize, prefix: &[Complex64]) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::IndexOutOfRange {
                what: "term",
                index: k,
                len: self.len(),
            });
        }
        if prefix.len() <= k {
            return Err(mismatch("prefix length", format!(">= {}", k + 1), prefix.len()));
        }
        Ok(self.term(k, prefix))
    }

    /// Sum of all summands on a full assignment.
    fn total(&self, values: &[Complex64]) -> f64 {
        (0..self.len()).map(|k| self.term(k, values)).sum()
    }
}

/// `G_IU diag(psi) G_BI`.
fn reflected(g_iu: &CMatrix, psi: &[Complex64], g_bi: &CMatrix) -> CMatrix {
    let mut scaled = g_iu.clone();
    for (m, p) in psi.iter().enumerate() {
        for v in scaled.column_mut(m).iter_mut() {
            *v *= p;
        }
    }
    scaled * g_bi
}

/// `s^H A[:, k]` for every column `k`.
fn symbol_projection(s: &[Complex64], a: &CMatrix) -> Vec<Complex64> {
    (0..a.ncols())
        .map(|k| s.iter().zip(a.column(k).iter()).map(|(s, g)| s.conj() * g).sum())
        .collect()
}

fn check_psi(psi: &[Complex64], elements: usize) -> Result<()> {
    if psi.len() != elements {
        return Err(mismatch("IRS phase vector length", elements, psi.len()));
    }
    Ok(())
}

fn check_cell(ch: &ChannelSet, cell: usize) -> Result<()> {
    if cell >= ch.cells() {
        return Err(Error::IndexOutOfRange {
            what: "cell",
            index: cell,
            len: ch.cells(),
        });
    }
    Ok(())
}

/// BS objective with the IRS fixed.
///
/// Holds `H_BU = G_BU^H G_BU`, `F = G_IU Psi G_BI`, `T = F^H F` and
/// `Z = G_BI^H Psi^H G_IU^H G_BU` for one cell.
#[derive(Debug, Clone)]
pub struct XContext {
    pub g_bu: CMatrix,
    pub f: CMatrix,
    pub h_bu: CMatrix,
    pub t: CMatrix,
    pub z: CMatrix,
    pub s: Vec<Complex64>,
    s_g_bu: Vec<Complex64>,
    s_f: Vec<Complex64>,
}

impl XContext {
    pub fn new(
        g_bu: &CMatrix,
        g_iu: &CMatrix,
        g_bi: &CMatrix,
        psi: &[Complex64],
        s: &[Complex64],
    ) -> Result<Self> {
        check_psi(psi, g_bi.nrows())?;
        if s.len() != g_bu.nrows() || g_iu.nrows() != g_bu.nrows() {
            return Err(mismatch("users", g_bu.nrows(), s.len()));
        }
        let f = reflected(g_iu, psi, g_bi);
        let h_bu = g_bu.adjoint() * g_bu;
        let t = f.adjoint() * &f;
        let z = f.adjoint() * g_bu;
        Ok(XContext {
            s_g_bu: symbol_projection(s, g_bu),
            s_f: symbol_projection(s, &f),
            g_bu: g_bu.clone(),
            f,
            h_bu,
            t,
            z,
            s: s.to_vec(),
        })
    }

    /// Context for cell `cell`, built from its own BS, the IRS and its users.
    pub fn for_cell(
        ch: &ChannelSet,
        cell: usize,
        psi: &[Complex64],
        symbols: &SymbolMatrix,
    ) -> Result<Self> {
        check_cell(ch, cell)?;
        Self::new(
            &ch.bs_user[cell][cell],
            &ch.irs_user[cell],
            &ch.bs_irs[cell],
            psi,
            symbols.cell(cell),
        )
    }

    pub fn single_cell(ch: &ChannelSet, psi: &[Complex64], symbols: &SymbolMatrix) -> Result<Self> {
        if ch.cells() != 1 {
            return Err(mismatch("single-cell channel set", 1, ch.cells()));
        }
        Self::for_cell(ch, 0, psi, symbols)
    }
}

impl SequentialObjective for XContext {
    fn len(&self) -> usize {
        self.h_bu.nrows()
    }

    fn term(&self, k: usize, x: &[Complex64]) -> f64 {
        let mut cross = ZERO;
        for (i, xi) in x[..k].iter().enumerate() {
            let coeff = self.h_bu[(k, i)]
                + self.t[(k, i)]
                + self.z[(k, i)]
                + self.z[(i, k)].conj();
            cross += xi * coeff;
        }
        let xk = x[k];
        let linear = (self.s_g_bu[k] + self.s_f[k]) * xk;
        2.0 * (xk.conj() * cross - linear).re
    }
}

/// `k`-th summand of the BS objective (IRS fixed).
pub fn px_term(ctx: &XContext, k: usize, prefix: &[Complex64]) -> Result<f64> {
    ctx.checked_term(k, prefix)
}

/// Single-cell IRS objective with the BS vector fixed.
///
/// Holds `Q_IU = G_IU^H G_IU`, `v = G_BI x` and `u = G_IU^H G_BU x`.
#[derive(Debug, Clone)]
pub struct PsiContext {
    pub q_iu: CMatrix,
    pub v: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub s: Vec<Complex64>,
    s_g_iu: Vec<Complex64>,
}

impl PsiContext {
    pub fn new(
        g_bu: &CMatrix,
        g_iu: &CMatrix,
        g_bi: &CMatrix,
        x: &[Complex64],
        s: &[Complex64],
    ) -> Result<Self> {
        if x.len() != g_bi.ncols() || x.len() != g_bu.ncols() {
            return Err(mismatch("transmit vector length", g_bi.ncols(), x.len()));
        }
        if s.len() != g_iu.nrows() {
            return Err(mismatch("users", g_iu.nrows(), s.len()));
        }
        let xv = DVector::from_column_slice(x);
        let v = g_bi * &xv;
        let u = g_iu.adjoint() * (g_bu * &xv);
        Ok(PsiContext {
            q_iu: g_iu.adjoint() * g_iu,
            v: v.iter().copied().collect(),
            u: u.iter().copied().collect(),
            s: s.to_vec(),
            s_g_iu: symbol_projection(s, g_iu),
        })
    }

    pub fn single_cell(ch: &ChannelSet, x: &[Complex64], symbols: &SymbolMatrix) -> Result<Self> {
        if ch.cells() != 1 {
            return Err(mismatch("single-cell channel set", 1, ch.cells()));
        }
        Self::new(&ch.bs_user[0][0], &ch.irs_user[0], &ch.bs_irs[0], x, symbols.cell(0))
    }
}

impl SequentialObjective for PsiContext {
    fn len(&self) -> usize {
        self.v.len()
    }

    fn term(&self, m: usize, psi: &[Complex64]) -> f64 {
        let mut cross = ZERO;
        for (i, p) in psi[..m].iter().enumerate() {
            cross += self.v[i] * p * self.q_iu[(m, i)];
        }
        let vm = self.v[m] * psi[m];
        2.0 * (vm.conj() * cross - self.s_g_iu[m] * vm + vm.conj() * self.u[m]).re
    }
}

/// `m`-th summand of the single-cell IRS objective.
pub fn ppsi_term(ctx: &PsiContext, m: usize, prefix: &[Complex64]) -> Result<f64> {
    ctx.checked_term(m, prefix)
}

/// Which direct-path aggregate the multi-cell IRS objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IrsMode {
    /// `b[j][i] = sum_l g_BU_l[i,j] x_l` (all inter-cell channels known).
    Main,
    /// `b'[j][i] = g_BU_j[i,j] x_j` (inter-cell channels replaced by their zero mean).
    LowOverhead,
}

/// Multi-cell IRS objective with every BS vector fixed.
///
/// Holds `a = sum_l G_BI_l x_l`, `W = sum_{j,i} g_IU[i,j]^H g_IU[i,j]`, the
/// `L x K` slices `H_s` (entry `(j, i)` is element `s` of `g_IU[i,j]`), the
/// symbol matrix `S` and the direct-path matrix `B` (or `B'`).
#[derive(Debug, Clone)]
pub struct MultiPsiContext {
    pub a: Vec<Complex64>,
    pub w: CMatrix,
    pub h: Vec<CMatrix>,
    pub s: CMatrix,
    pub b: CMatrix,
    pub mode: IrsMode,
    tr_h_s: Vec<Complex64>,
    tr_h_b: Vec<Complex64>,
}

impl MultiPsiContext {
    pub fn new(
        ch: &ChannelSet,
        x_all: &[Vec<Complex64>],
        symbols: &SymbolMatrix,
        mode: IrsMode,
    ) -> Result<Self> {
        let (cells, users, elements) = (ch.cells(), ch.users(), ch.elements());
        if x_all.len() != cells {
            return Err(mismatch("transmit vectors", cells, x_all.len()));
        }
        if let Some(x) = x_all.iter().find(|x| x.len() != ch.antennas()) {
            return Err(mismatch("transmit vector length", ch.antennas(), x.len()));
        }
        let xs: Vec<DVector<Complex64>> = x_all
            .iter()
            .map(|x| DVector::from_column_slice(x))
            .collect();

        let mut a = DVector::zeros(elements);
        for (g_bi, x) in ch.bs_irs.iter().zip(&xs) {
            a += g_bi * x;
        }
        let mut w = CMatrix::zeros(elements, elements);
        for g_iu in &ch.irs_user {
            w += g_iu.adjoint() * g_iu;
        }
        let h: Vec<CMatrix> = (0..elements)
            .map(|m| CMatrix::from_fn(cells, users, |j, i| ch.irs_user[j][(i, m)]))
            .collect();
        let s = CMatrix::from_fn(cells, users, |j, i| symbols.s[j][i]);
        let mut b = CMatrix::zeros(cells, users);
        for j in 0..cells {
            let direct = match mode {
                IrsMode::Main => {
                    let mut acc = DVector::zeros(users);
                    for (l, x) in xs.iter().enumerate() {
                        acc += &ch.bs_user[l][j] * x;
                    }
                    acc
                }
                IrsMode::LowOverhead => &ch.bs_user[j][j] * &xs[j],
            };
            b.row_mut(j).copy_from(&direct.transpose());
        }
        let tr_h_s = h.iter().map(|hs| (hs * s.adjoint()).trace()).collect();
        let tr_h_b = h.iter().map(|hs| (hs.adjoint() * &b).trace()).collect();
        Ok(MultiPsiContext {
            a: a.iter().copied().collect(),
            w,
            h,
            s,
            b,
            mode,
            tr_h_s,
            tr_h_b,
        })
    }
}

impl SequentialObjective for MultiPsiContext {
    fn len(&self) -> usize {
        self.a.len()
    }

    fn term(&self, s: usize, psi: &[Complex64]) -> f64 {
        let mut cross = ZERO;
        for (t, p) in psi[..s].iter().enumerate() {
            cross += self.a[t] * p * self.w[(s, t)];
        }
        let as_ = self.a[s] * psi[s];
        2.0 * (as_.conj() * cross - as_ * self.tr_h_s[s] + as_.conj() * self.tr_h_b[s]).re
    }
}

/// `s`-th summand of the multi-cell IRS objective (main or low-overhead).
pub fn ppsi_mu_term(ctx: &MultiPsiContext, s: usize, prefix: &[Complex64]) -> Result<f64> {
    ctx.checked_term(s, prefix)
}

/// Low-overhead per-BS objective of cell `j` with the IRS fixed.
///
/// Inter-cell BS-user channels enter only through their large-scale fading
/// (`E{g^H g} = beta I`), and every `x_l x_j^H` is replaced by the all-ones
/// matrix. Holds `D`, `E`, `N`, `J`, `R`, `q`, `m`.
#[derive(Debug, Clone)]
pub struct LowOverheadXContext {
    pub d: CMatrix,
    pub e: CMatrix,
    pub n: CMatrix,
    pub j: CMatrix,
    pub r: CMatrix,
    pub q: Vec<Complex64>,
    pub m: Vec<Complex64>,
    pub cell: usize,
}

impl LowOverheadXContext {
    pub fn new(
        ch: &ChannelSet,
        cell: usize,
        psi: &[Complex64],
        symbols: &SymbolMatrix,
    ) -> Result<Self> {
        check_cell(ch, cell)?;
        check_psi(psi, ch.elements())?;
        let antennas = ch.antennas();
        let users = ch.users();
        let g_bu = &ch.bs_user[cell][cell];
        let g_iu = &ch.irs_user[cell];
        let s = DVector::from_column_slice(symbols.cell(cell));
        if s.len() != users {
            return Err(mismatch("users", users, s.len()));
        }

        let f_own = reflected(g_iu, psi, &ch.bs_irs[cell]);
        let d = g_bu.adjoint() * g_bu;
        let e = g_bu.adjoint() * &f_own;
        let n = f_own.adjoint() * &f_own;

        let ones = CMatrix::from_element(antennas, antennas, Complex64::new(1.0, 0.0));
        let mut j = CMatrix::zeros(antennas, antennas);
        let mut r = CMatrix::zeros(antennas, antennas);
        for l in (0..ch.cells()).filter(|&l| l != cell) {
            for i in 0..users {
                let beta = ch.beta_bs_user[l][cell][i];
                let second_moment = CMatrix::identity(antennas, antennas) * Complex64::new(beta, 0.0);
                j += ones.adjoint() * second_moment * &ones;
            }
            let f_l = reflected(g_iu, psi, &ch.bs_irs[l]);
            r += ones.adjoint() * f_l.adjoint() * &f_l * &ones;
        }

        let q = g_bu.adjoint() * &s;
        let m = f_own.adjoint() * &s;
        Ok(LowOverheadXContext {
            d,
            e,
            n,
            j,
            r,
            q: q.iter().copied().collect(),
            m: m.iter().copied().collect(),
            cell,
        })
    }
}

impl SequentialObjective for LowOverheadXContext {
    fn len(&self) -> usize {
        self.d.nrows()
    }

    fn term(&self, s: usize, x: &[Complex64]) -> f64 {
        let nt2 = (self.len() * self.len()) as f64;
        let mut cross = ZERO;
        for (t, xt) in x[..s].iter().enumerate() {
            let coeff = self.d[(s, t)]
                + self.e[(s, t)]
                + self.e[(t, s)].conj()
                + self.n[(s, t)]
                + (self.j[(s, t)] + self.r[(s, t)]) / nt2;
            cross += xt * coeff;
        }
        let xs = x[s];
        2.0 * (xs.conj() * cross - xs.conj() * (self.q[s] + self.m[s])).re
    }
}

/// `s`-th summand of the low-overhead per-BS objective.
pub fn pmui_x_term(ctx: &LowOverheadXContext, s: usize, prefix: &[Complex64]) -> Result<f64> {
    ctx.checked_term(s, prefix)
}
