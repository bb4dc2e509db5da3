use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trellis::stage_comparisons;

/// Dimensions of one complexity-table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityCase {
    pub bs_antennas: usize,
    pub irs_elements: usize,
    pub bs_memory: usize,
    pub irs_memory: usize,
    pub bs_levels: usize,
    pub irs_levels: usize,
}

impl ComplexityCase {
    /// The two reference rows: `N_T = 50`, `M = 70`, `T = B = 2`,
    /// 2-bit and 3-bit phase shifters.
    pub fn reference() -> [ComplexityCase; 2] {
        let base = ComplexityCase {
            bs_antennas: 50,
            irs_elements: 70,
            bs_memory: 2,
            irs_memory: 2,
            bs_levels: 4,
            irs_levels: 4,
        };
        [
            base,
            ComplexityCase {
                bs_levels: 8,
                irs_levels: 8,
                ..base
            },
        ]
    }
}

/// `N_T,M,T,B,N_BS,N_IRS`.
impl FromStr for ComplexityCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Scenario(format!("case {s:?}: {e}")))?;
        let [nt, m, t, b, nbs, nirs] = v[..] else {
            return Err(Error::Scenario(format!(
                "case {s:?}: expected N_T,M,T,B,N_BS,N_IRS"
            )));
        };
        if nbs < 2 || nirs < 2 || t < 1 || t > nt || b < 1 || b > m.max(1) {
            return Err(Error::Scenario(format!("case {s:?}: invalid dimensions")));
        }
        Ok(ComplexityCase {
            bs_antennas: nt,
            irs_elements: m,
            bs_memory: t,
            irs_memory: b,
            bs_levels: nbs,
            irs_levels: nirs,
        })
    }
}

/// Operation counts of the three approaches for one case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRow {
    pub case: ComplexityCase,
    /// `(N_T - T) N_BS^(T+1) + (M - B) N_IRS^(B+1)`.
    pub trellis: u64,
    /// `(N_T + 1)^3.5 + (M + 1)^3.5` (unit log factor).
    pub sdr: f64,
    /// `log10(N_BS^N_T + N_IRS^M)`; the count itself overflows `f64` quickly.
    pub exhaustive_log10: f64,
}

impl ComplexityRow {
    /// `(mantissa, exponent)` of the exhaustive count.
    pub fn exhaustive_scientific(&self) -> (f64, i64) {
        let e = self.exhaustive_log10.floor();
        (10f64.powf(self.exhaustive_log10 - e), e as i64)
    }
}

fn log10_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

pub fn complexity(case: &ComplexityCase) -> ComplexityRow {
    let trellis = stage_comparisons(case.bs_antennas, case.bs_memory, case.bs_levels)
        + stage_comparisons(case.irs_elements, case.irs_memory, case.irs_levels);
    let sdr = (case.bs_antennas as f64 + 1.0).powf(3.5) + (case.irs_elements as f64 + 1.0).powf(3.5);
    let exhaustive_log10 = log10_sum(
        case.bs_antennas as f64 * (case.bs_levels as f64).log10(),
        case.irs_elements as f64 * (case.irs_levels as f64).log10(),
    );
    ComplexityRow {
        case: *case,
        trellis,
        sdr,
        exhaustive_log10,
    }
}

impl fmt::Display for ComplexityRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.case;
        let (mant, exp) = self.exhaustive_scientific();
        write!(
            f,
            "{:>4} {:>4} {:>2} {:>2} {:>4} {:>5}  {:>12} {:>12.3e} {:>8.3}e{}",
            c.bs_antennas,
            c.irs_elements,
            c.bs_memory,
            c.irs_memory,
            c.bs_levels,
            c.irs_levels,
            self.trellis,
            self.sdr,
            mant,
            exp
        )
    }
}

pub fn format_table(rows: &[ComplexityRow]) -> String {
    let mut out = String::from(
        " N_T    M  T  B N_BS N_IRS       trellis          SDR    exhaustive\n",
    );
    for r in rows {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rows() {
        let [a, b] = ComplexityCase::reference().map(|c| complexity(&c));
        assert_eq!(a.trellis, 7424);
        assert_eq!(b.trellis, 59392);
        assert!((a.sdr / 3.96e6 - 1.0).abs() < 0.01);
        let (m, e) = a.exhaustive_scientific();
        assert_eq!(e, 42);
        assert!((m / 1.39 - 1.0).abs() < 0.01);
        let (m, e) = b.exhaustive_scientific();
        assert_eq!(e, 63);
        assert!((m / 1.64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn full_memory_has_no_stages() {
        let c: ComplexityCase = "6,5,6,5,4,4".parse().unwrap();
        assert_eq!(complexity(&c).trellis, 0);
    }

    #[test]
    fn small_exhaustive_is_exact() {
        let c: ComplexityCase = "3,2,1,1,4,8".parse().unwrap();
        let r = complexity(&c);
        assert!((10f64.powf(r.exhaustive_log10) - 128.0).abs() < 1e-9);
    }

    #[test]
    fn parse_errors() {
        assert!("50,70,2,2,4".parse::<ComplexityCase>().is_err());
        assert!("50,70,51,2,4,4".parse::<ComplexityCase>().is_err());
        assert!("a,70,2,2,4,4".parse::<ComplexityCase>().is_err());
    }
}
