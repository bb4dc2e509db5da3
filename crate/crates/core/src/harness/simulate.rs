use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{generate_channels, generate_symbols};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::schemes::{run_scheme, Problem, SchemeKind, SchemeSpec, TrialReport};

use super::scenario::ScenarioFile;

pub const CSV_HEADER: [&str; 13] = [
    "trial",
    "seed",
    "scheme",
    "L",
    "K",
    "N_T",
    "M",
    "N_BS",
    "N_IRS",
    "avg_rate_per_cell",
    "mui_power_total",
    "comparisons",
    "elapsed_ms",
];

/// One CSV line: one scheme on one trial at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trial: u64,
    pub seed: u64,
    pub scheme: SchemeKind,
    pub cells: usize,
    pub users: usize,
    pub bs_antennas: usize,
    pub irs_elements: usize,
    pub bs_levels: usize,
    pub irs_levels: usize,
    pub avg_rate_per_cell: f64,
    pub mui_power_total: f64,
    pub comparisons: u64,
    pub elapsed_ms: f64,
}

impl ResultRow {
    fn new(cfg: &SystemConfig, trial: u64, report: &TrialReport, elapsed_ms: f64) -> Self {
        ResultRow {
            trial,
            seed: cfg.seed,
            scheme: report.scheme,
            cells: cfg.cells,
            users: cfg.users,
            bs_antennas: cfg.bs_antennas,
            irs_elements: cfg.irs_elements,
            bs_levels: cfg.bs_levels,
            irs_levels: cfg.irs_levels,
            avg_rate_per_cell: report.avg_rate_per_cell,
            mui_power_total: report.mui_power_total,
            comparisons: report.comparisons,
            elapsed_ms,
        }
    }

    fn record(&self) -> [String; 13] {
        // 12 significant digits
        let float = |v: f64| format!("{v:.11e}");
        [
            self.trial.to_string(),
            self.seed.to_string(),
            self.scheme.name().to_string(),
            self.cells.to_string(),
            self.users.to_string(),
            self.bs_antennas.to_string(),
            self.irs_elements.to_string(),
            self.bs_levels.to_string(),
            self.irs_levels.to_string(),
            float(self.avg_rate_per_cell),
            float(self.mui_power_total),
            self.comparisons.to_string(),
            float(self.elapsed_ms),
        ]
    }
}

/// All schemes on one trial, each timed separately.
pub fn run_trial_timed(
    cfg: &SystemConfig,
    trial: u64,
    specs: &[SchemeSpec],
) -> Result<Vec<(TrialReport, f64)>> {
    let channels = generate_channels(cfg, trial);
    let symbols = generate_symbols(cfg, trial);
    let problem = Problem::new(cfg, &channels, &symbols, trial)?;
    specs
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let report = run_scheme(&problem, spec, trial)?;
            Ok((report, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect()
}

/// Runs every trial of every sweep point. Trials run in parallel; rows come
/// back ordered by sweep point, then trial, then declared scheme order.
pub fn simulate(scenario: &ScenarioFile) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let mut rows = Vec::new();
    for cfg in scenario.points() {
        let per_trial: Vec<Vec<ResultRow>> = (0..cfg.mc_trials as u64)
            .into_par_iter()
            .map(|trial| {
                Ok(run_trial_timed(&cfg, trial, &scenario.schemes)?
                    .iter()
                    .map(|(r, ms)| ResultRow::new(&cfg, trial, r, *ms))
                    .collect())
            })
            .collect::<Result<_>>()?;
        rows.extend(per_trial.into_iter().flatten());
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Mean `avg_rate_per_cell` of one scheme at each sweep point, in order.
pub fn mean_rates(rows: &[ResultRow], scheme: SchemeKind) -> Vec<(usize, usize, usize, f64)> {
    let mut out: Vec<(usize, usize, usize, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.scheme == scheme) {
        let key = (r.users, r.bs_antennas, r.irs_elements);
        match out.iter_mut().find(|e| (e.0, e.1, e.2) == key) {
            Some(e) => {
                e.3 += r.avg_rate_per_cell;
                e.4 += 1;
            }
            None => out.push((key.0, key.1, key.2, r.avg_rate_per_cell, 1)),
        }
    }
    out.into_iter()
        .map(|(k, n, m, sum, count)| (k, n, m, sum / count as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ScenarioFile {
        let mut sc = ScenarioFile::preset("multicell-desk").unwrap();
        sc.system.mc_trials = 3;
        sc.sweep = None;
        sc.system.irs_elements = 4;
        sc
    }

    #[test]
    fn row_cardinality_and_order() {
        let sc = tiny();
        let rows = simulate(&sc).unwrap();
        assert_eq!(rows.len(), 3 * sc.schemes.len());
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.trial, (k / sc.schemes.len()) as u64);
            assert_eq!(r.scheme, sc.schemes[k % sc.schemes.len()].kind);
        }
    }

    #[test]
    fn csv_layout() {
        let rows = simulate(&tiny()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "trial,seed,scheme,L,K,N_T,M,N_BS,N_IRS,avg_rate_per_cell,mui_power_total,comparisons,elapsed_ms"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[2], "trellis-main");
        let mantissa = first[9].split('e').next().unwrap();
        assert_eq!(mantissa.trim_start_matches('-').len(), 13, "{}", first[9]);
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn mean_rates_group_by_point() {
        let mut sc = tiny();
        sc.sweep = Some(super::super::scenario::Sweep {
            param: super::super::scenario::SweepParam::M,
            values: vec![2, 4],
        });
        sc.schemes.truncate(1);
        let rows = simulate(&sc).unwrap();
        let means = mean_rates(&rows, SchemeKind::TrellisMain);
        assert_eq!(means.len(), 2);
        assert_eq!(means[1].2, 4);
    }
}
