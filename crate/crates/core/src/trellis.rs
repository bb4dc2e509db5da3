//! Survivor-path minimization of sequential objectives over a discrete
//! alphabet, with an exhaustive reference search.
//!
//! A state is the tuple of the last `memory` labels (oldest label most
//! significant in the state index). Survivors carry their whole path, so a
//! branch metric may read every earlier variable, not only those in the state.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::model::SequentialObjective;

/// Largest admissible `A^m` state count.
pub const MAX_STATES: u64 = 1 << 20;
/// Largest admissible `A^n` for exhaustive search.
pub const MAX_EXHAUSTIVE: u64 = 1 << 24;

pub type TermFn<'a> = dyn Fn(usize, &[Complex64]) -> f64 + 'a;

pub struct TrellisSpec<'a> {
    /// Sequence length `n`.
    pub len: usize,
    /// Trellis memory `m`.
    pub memory: usize,
    /// Branch labels: `A` points on a circle of the desired amplitude.
    pub alphabet: Vec<Complex64>,
    /// `term(k, prefix)` is the 0-based `k`-th summand; `prefix.len() == k + 1`.
    pub term: &'a TermFn<'a>,
}

impl<'a> TrellisSpec<'a> {
    pub fn new(len: usize, memory: usize, alphabet: Vec<Complex64>, term: &'a TermFn<'a>) -> Self {
        TrellisSpec {
            len,
            memory,
            alphabet,
            term,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "alphabet size {} < 2",
                self.alphabet.len()
            )));
        }
        if self.len > 0 && (self.memory < 1 || self.memory > self.len) {
            return Err(Error::InvalidArgument(format!(
                "memory {} outside [1, {}]",
                self.memory, self.len
            )));
        }
        Ok(())
    }

    /// Sum of all terms along `labels`, accumulated left to right.
    pub fn path_cost(&self, labels: &[usize]) -> f64 {
        let values: Vec<Complex64> = labels.iter().map(|&b| self.alphabet[b]).collect();
        (0..values.len())
            .map(|k| (self.term)(k, &values[..=k]))
            .fold(0.0, |acc, t| acc + t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrellisResult {
    /// Alphabet index of every variable.
    pub assignment: Vec<usize>,
    /// Cumulative benchmark of the selected path.
    pub objective: f64,
    pub comparisons: u64,
}

fn checked_states(alphabet: usize, memory: usize, limit: u64) -> Result<usize> {
    let too_large = Error::StateSpaceTooLarge {
        alphabet,
        memory,
        limit,
    };
    let count = u32::try_from(memory)
        .ok()
        .and_then(|m| (alphabet as u64).checked_pow(m))
        .ok_or(too_large)?;
    if count > limit {
        return Err(Error::StateSpaceTooLarge {
            alphabet,
            memory,
            limit,
        });
    }
    Ok(count as usize)
}

/// Branch comparisons of one trellis run: `(n - m) A^(m+1)`, zero if `n <= m`.
pub fn stage_comparisons(len: usize, memory: usize, alphabet: usize) -> u64 {
    if len <= memory {
        return 0;
    }
    (len - memory) as u64 * (alphabet as u64).pow(memory as u32 + 1)
}

/// Comparisons of one joint BS/IRS trellis pass:
/// `(N_T - T) N_BS^(T+1) + (M - B) N_IRS^(B+1)`.
pub fn comparison_count(config: &SystemConfig) -> u64 {
    stage_comparisons(config.bs_antennas, config.bs_memory, config.bs_levels)
        + stage_comparisons(config.irs_elements, config.irs_memory, config.irs_levels)
}

struct Survivor {
    labels: Vec<usize>,
    values: Vec<Complex64>,
    cost: f64,
}

fn digits(mut index: usize, base: usize, count: usize) -> Vec<usize> {
    let mut out = vec![0; count];
    for d in out.iter_mut().rev() {
        *d = index % base;
        index /= base;
    }
    out
}

fn pick_best(survivors: &[Survivor]) -> &Survivor {
    let mut best = &survivors[0];
    for s in &survivors[1..] {
        if s.cost < best.cost || (s.cost == best.cost && s.labels < best.labels) {
            best = s;
        }
    }
    best
}

/// Viterbi-style minimization with full-path survivors.
///
/// Ties between branches entering the same state keep the lexicographically
/// smallest predecessor state; ties at the end keep the lexicographically
/// smallest assignment.
pub fn trellis_minimize(spec: &TrellisSpec<'_>) -> Result<TrellisResult> {
    spec.validate()?;
    let n = spec.len;
    if n == 0 {
        return Ok(TrellisResult {
            assignment: Vec::new(),
            objective: 0.0,
            comparisons: 0,
        });
    }
    let a = spec.alphabet.len();
    let m = spec.memory;
    let states = checked_states(a, m, MAX_STATES)?;
    let high = states / a;

    let mut survivors: Vec<Survivor> = (0..states)
        .map(|st| {
            let labels = digits(st, a, m);
            let values: Vec<Complex64> = labels.iter().map(|&b| spec.alphabet[b]).collect();
            let cost = (0..m)
                .map(|k| (spec.term)(k, &values[..=k]))
                .fold(0.0, |acc, t| acc + t);
            Survivor {
                labels,
                values,
                cost,
            }
        })
        .collect();

    let mut comparisons = 0u64;
    let mut scratch: Vec<Complex64> = Vec::with_capacity(n);
    for k in m..n {
        let mut next = Vec::with_capacity(states);
        for ns in 0..states {
            let label = ns % a;
            let rest = ns / a;
            let mut best: Option<(usize, f64)> = None;
            for oldest in 0..a {
                let pred = oldest * high + rest;
                let prev = &survivors[pred];
                scratch.clear();
                scratch.extend_from_slice(&prev.values);
                scratch.push(spec.alphabet[label]);
                let cost = prev.cost + (spec.term)(k, &scratch);
                comparisons += 1;
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some((pred, cost));
                }
            }
            let (pred, cost) = best.expect("alphabet is non-empty");
            let prev = &survivors[pred];
            let mut labels = prev.labels.clone();
            labels.push(label);
            let mut values = prev.values.clone();
            values.push(spec.alphabet[label]);
            next.push(Survivor {
                labels,
                values,
                cost,
            });
        }
        survivors = next;
    }

    let best = pick_best(&survivors);
    Ok(TrellisResult {
        assignment: best.labels.clone(),
        objective: best.cost,
        comparisons,
    })
}

/// Global minimum over all `A^n` assignments; ties keep the
/// lexicographically smallest assignment.
pub fn exhaustive_minimize(spec: &TrellisSpec<'_>) -> Result<TrellisResult> {
    if spec.alphabet.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "alphabet size {} < 2",
            spec.alphabet.len()
        )));
    }
    let n = spec.len;
    let a = spec.alphabet.len();
    let total = checked_states(a, n, MAX_EXHAUSTIVE)?;
    if n == 0 {
        return Ok(TrellisResult {
            assignment: Vec::new(),
            objective: 0.0,
            comparisons: 0,
        });
    }

    // depth-first in lexicographic order; partial[k] is the cost of terms 0..k
    let mut labels = vec![0usize; n];
    let mut values = vec![spec.alphabet[0]; n];
    let mut partial = vec![0.0f64; n + 1];
    let mut best_cost = f64::INFINITY;
    let mut best = labels.clone();
    let mut depth = 0usize;
    loop {
        values[depth] = spec.alphabet[labels[depth]];
        partial[depth + 1] = partial[depth] + (spec.term)(depth, &values[..=depth]);
        if depth + 1 < n {
            depth += 1;
            labels[depth] = 0;
            continue;
        }
        if partial[n] < best_cost {
            best_cost = partial[n];
            best.copy_from_slice(&labels);
        }
        // advance the odometer
        loop {
            labels[depth] += 1;
            if labels[depth] < a {
                break;
            }
            if depth == 0 {
                return Ok(TrellisResult {
                    assignment: best,
                    objective: best_cost,
                    comparisons: total as u64,
                });
            }
            depth -= 1;
        }
    }
}

/// Runs the trellis on a [`SequentialObjective`].
pub fn minimize_objective<O: SequentialObjective + ?Sized>(
    objective: &O,
    memory: usize,
    alphabet: Vec<Complex64>,
) -> Result<TrellisResult> {
    let term = |k: usize, prefix: &[Complex64]| objective.term(k, prefix);
    let spec = TrellisSpec::new(objective.len(), memory.min(objective.len()).max(1), alphabet, &term);
    trellis_minimize(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::alphabet;

    fn quadratic_terms(n: usize, seed: u64) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
        // small LCG so the instance is fixed without pulling in the rng module
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let q = (0..n)
            .map(|_| (0..n).map(|_| Complex64::new(next(), next())).collect())
            .collect();
        let b = (0..n).map(|_| Complex64::new(next(), next())).collect();
        (q, b)
    }

    #[test]
    fn full_memory_is_exhaustive() {
        let (q, b) = quadratic_terms(4, 3);
        let term = move |k: usize, x: &[Complex64]| {
            let cross: Complex64 = (0..k).map(|i| x[k].conj() * x[i] * q[k][i]).sum();
            2.0 * (cross - b[k].conj() * x[k]).re
        };
        let spec = TrellisSpec::new(4, 4, alphabet(3, 1.0), &term);
        let t = trellis_minimize(&spec).unwrap();
        let e = exhaustive_minimize(&spec).unwrap();
        assert_eq!(t.assignment, e.assignment);
        assert_eq!(t.objective, e.objective);
        assert_eq!(t.comparisons, 0);
        assert_eq!(e.comparisons, 81);
    }

    #[test]
    fn single_variable_argmin() {
        let term = |_: usize, x: &[Complex64]| -x[0].im;
        let spec = TrellisSpec::new(1, 1, alphabet(4, 1.0), &term);
        let e = exhaustive_minimize(&spec).unwrap();
        assert_eq!(e.assignment, vec![1]);
    }

    #[test]
    fn constant_terms_tie_break_to_zeros() {
        let term = |_: usize, _: &[Complex64]| 0.25;
        let spec = TrellisSpec::new(5, 2, alphabet(4, 1.0), &term);
        let e = exhaustive_minimize(&spec).unwrap();
        assert_eq!(e.assignment, vec![0; 5]);
        assert_eq!(e.objective, 1.25);
        let t = trellis_minimize(&spec).unwrap();
        assert_eq!(t.assignment, vec![0; 5]);
        assert_eq!(t.objective, 1.25);
    }

    #[test]
    fn comparison_accounting() {
        let term = |k: usize, x: &[Complex64]| (x[k] * (k as f64 + 1.0)).re;
        let spec = TrellisSpec::new(50, 2, alphabet(4, 1.0), &term);
        let t = trellis_minimize(&spec).unwrap();
        assert_eq!(t.comparisons, 3072);
        assert_eq!(stage_comparisons(50, 2, 4), 48 * 64);
        assert_eq!(stage_comparisons(3, 3, 4), 0);
    }

    #[test]
    fn table_counts() {
        let mut cfg = SystemConfig::single_cell(15, 50, 70);
        cfg.bs_levels = 4;
        cfg.irs_levels = 4;
        assert_eq!(comparison_count(&cfg), 7424);
        cfg.bs_levels = 8;
        cfg.irs_levels = 8;
        assert_eq!(comparison_count(&cfg), 59392);
        cfg.bs_memory = 50;
        cfg.irs_memory = 70;
        assert_eq!(comparison_count(&cfg), 0);
    }

    #[test]
    fn guards() {
        let term = |_: usize, _: &[Complex64]| 0.0;
        let spec = TrellisSpec::new(30, 11, alphabet(4, 1.0), &term);
        assert!(matches!(
            trellis_minimize(&spec),
            Err(Error::StateSpaceTooLarge { alphabet: 4, memory: 11, .. })
        ));
        let spec = TrellisSpec::new(13, 2, alphabet(4, 1.0), &term);
        assert!(exhaustive_minimize(&spec).is_err());
        let spec = TrellisSpec::new(4, 5, alphabet(4, 1.0), &term);
        assert!(trellis_minimize(&spec).is_err());
    }

    #[test]
    fn objective_equals_path_cost() {
        let (q, b) = quadratic_terms(7, 9);
        let term = move |k: usize, x: &[Complex64]| {
            let cross: Complex64 = (0..k).map(|i| x[k].conj() * x[i] * q[k][i]).sum();
            2.0 * (cross - b[k].conj() * x[k]).re
        };
        let spec = TrellisSpec::new(7, 2, alphabet(4, 0.5), &term);
        let t = trellis_minimize(&spec).unwrap();
        assert!((spec.path_cost(&t.assignment) - t.objective).abs() < 1e-10);
        let e = exhaustive_minimize(&spec).unwrap();
        assert!(t.objective >= e.objective);
    }
}
