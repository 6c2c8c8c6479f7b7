//! Local descent on the smallest gap eigenvalue of one inequality.
//!
//! The objective is `min_eig / max(1, max_j ||a_j||_F)^p`, with `p` the
//! homogeneity degree, so that rescaling the tuple cannot fake progress.
//! Gradients are forward differences; the minimum eigenvalue is not smooth
//! where it is repeated, so nothing analytic is attempted. Each step
//! backtracks along the normalized negative gradient until the objective
//! drops.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Mode, SearchConfig};
use super::log::{LogHeader, LogWriter};
use super::thread_pool;
use super::trial::{
    evaluate_instance, factor_with_warm_start, sample_instance, subtract_centroid, trial_probes,
    trial_seeds, TrialRecord,
};
use crate::conjecture::{data_scale, GapOracle, StandardOracle};
use crate::error::{Error, Result};
use crate::linalg::ensemble::CommutingNormalTuple;
use crate::linalg::matrix::ComplexMatrix;
use crate::ncpoly::ProbeSet;
use num_complex::Complex64;

const MAX_BACKTRACKS: usize = 30;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    /// Lowest-objective record over all restarts.
    pub best: TrialRecord,
    /// The target inequality failed at `best` and the violation protocol
    /// confirmed it.
    pub candidate_violation: bool,
    /// Accepted descent steps over all restarts.
    pub steps: u64,
}

/// Real coordinates of a tuple.
enum Coordinates {
    /// Every entry of every member.
    Entries { n: usize },
    /// Eigenvalues only, with the joint unitary held fixed.
    Spectral { unitary: ComplexMatrix },
}

impl Coordinates {
    fn encode(&self, a: &[ComplexMatrix]) -> Vec<f64> {
        match self {
            Coordinates::Entries { .. } => a.iter().flat_map(|m| m.to_real_params()).collect(),
            Coordinates::Spectral { unitary } => {
                let u_star = unitary.adjoint();
                a.iter()
                    .flat_map(|m| {
                        (&(&u_star * m) * unitary)
                            .diagonal()
                            .into_iter()
                            .flat_map(|z| [z.re, z.im])
                    })
                    .collect()
            }
        }
    }

    fn decode(&self, x: &[f64], center: bool) -> Vec<ComplexMatrix> {
        let mut a: Vec<ComplexMatrix> = match self {
            Coordinates::Entries { n } => x
                .chunks(2 * n * n)
                .map(|c| ComplexMatrix::from_real_params(*n, c))
                .collect(),
            Coordinates::Spectral { unitary } => {
                let n = unitary.dim();
                let lambdas = x
                    .chunks(2 * n)
                    .map(|c| c.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
                    .collect();
                CommutingNormalTuple::from_parts(unitary.clone(), lambdas).matrices
            }
        };
        if center {
            subtract_centroid(&mut a);
        }
        a
    }
}

struct Problem<'a> {
    config: &'a SearchConfig,
    oracle: &'a dyn GapOracle,
    restart: u64,
    probes: ProbeSet,
    coords: Coordinates,
}

struct Point {
    x: Vec<f64>,
    value: f64,
    b: Option<Vec<ComplexMatrix>>,
}

impl Problem<'_> {
    /// Normalized target slack, `+inf` where the premise fails.
    fn objective(&self, x: &[f64], warm: Option<&[ComplexMatrix]>) -> (f64, Option<Vec<ComplexMatrix>>) {
        let m = &self.config.minimize_opts;
        let a = self.coords.decode(x, self.config.center);
        let seeds = trial_seeds(self.config, self.restart);
        let Ok(f) = factor_with_warm_start(self.config, &a, &self.probes, &seeds, warm) else {
            return (f64::INFINITY, None);
        };
        match self.oracle.report(m.target, m.side, &a, &f.b) {
            Ok(r) => (r.min_eig / data_scale(&a, &[], m.target.degree()), Some(f.b)),
            Err(_) => (f64::INFINITY, None),
        }
    }

    fn scale(x: &[f64]) -> f64 {
        x.iter().fold(1.0, |acc, v| acc.max(v.abs()))
    }

    fn gradient(&self, at: &Point, pool: &rayon::ThreadPool) -> Vec<f64> {
        let h = self.config.minimize_opts.step * Self::scale(&at.x);
        let warm = at.b.as_deref();
        pool.install(|| {
            (0..at.x.len())
                .into_par_iter()
                .map(|i| {
                    let mut y = at.x.clone();
                    y[i] += h;
                    let (v, _) = self.objective(&y, warm);
                    if v.is_finite() {
                        (v - at.value) / h
                    } else {
                        0.0
                    }
                })
                .collect()
        })
    }

    /// One backtracking step; `None` once no decrease can be found.
    fn step(&self, at: &Point, mv: &mut f64, pool: &rayon::ThreadPool) -> Option<Point> {
        let g = self.gradient(at, pool);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let mut t = *mv;
        for _ in 0..MAX_BACKTRACKS {
            let x: Vec<f64> = at.x.iter().zip(&g).map(|(xi, gi)| xi - t * gi / norm).collect();
            let (value, b) = self.objective(&x, at.b.as_deref());
            if value < at.value - ARMIJO * t * norm {
                *mv = (2.0 * t).min(Self::scale(&x));
                return Some(Point { x, value, b });
            }
            t *= 0.5;
        }
        None
    }

    fn record(&self, p: &Point, step: u64) -> TrialRecord {
        let a = self.coords.decode(&p.x, self.config.center);
        let mut r = evaluate_instance(self.config, self.restart, a, self.oracle, p.b.as_deref());
        r.step = Some(step);
        r.objective = p.value.is_finite().then_some(p.value);
        r
    }
}

/// Descends from the tuples of trials `0..restarts`, logging every accepted
/// step. The best record carries the outcome of the violation protocol.
pub fn minimize_slack_to<W: Write>(
    config: &SearchConfig,
    oracle: &dyn GapOracle,
    writer: &mut LogWriter<W>,
    threads: Option<usize>,
) -> Result<MinimizeOutcome> {
    config.validate()?;
    if config.mode != Mode::Minimize {
        return Err(Error::Config(vec!["mode: minimize_slack needs mode = minimize".into()]));
    }
    let pool = thread_pool(threads)?;
    let m = &config.minimize_opts;
    let mut best: Option<TrialRecord> = None;
    let mut steps = 0;

    for restart in 0..m.restarts as u64 {
        let inst = sample_instance(config, restart);
        let coords = match inst.unitary {
            Some(unitary) => Coordinates::Spectral { unitary },
            None => Coordinates::Entries { n: config.n },
        };
        let problem = Problem {
            config,
            oracle,
            restart,
            probes: trial_probes(config, restart),
            coords,
        };
        let x = problem.coords.encode(&inst.a);
        let (value, b) = problem.objective(&x, None);
        let mut point = Point { x, value, b };
        let mut mv = m.initial_move * Problem::scale(&point.x);
        let mut record = problem.record(&point, 0);
        writer.write(&record)?;

        if point.value.is_finite() {
            for k in 1..=m.iterations as u64 {
                let Some(next) = problem.step(&point, &mut mv, &pool) else {
                    break;
                };
                point = next;
                steps += 1;
                record = problem.record(&point, k);
                writer.write(&record)?;
            }
        }
        let better = match (&best, record.objective) {
            (None, _) => true,
            (Some(b), Some(v)) => b.objective.is_none_or(|bv| v < bv),
            (Some(_), None) => false,
        };
        if better {
            best = Some(record);
        }
    }
    writer.flush()?;
    let best = best.expect("at least one restart");
    let candidate_violation = best
        .verified_violations()
        .any(|v| v.conjecture == m.target && v.side == m.side);
    Ok(MinimizeOutcome {
        best,
        candidate_violation,
        steps,
    })
}

/// Minimizes with the inequalities as stated, logging to a fresh file.
pub fn minimize_slack(config: &SearchConfig, log_path: &Path, threads: Option<usize>) -> Result<MinimizeOutcome> {
    config.validate()?;
    let file = BufWriter::new(File::create(log_path)?);
    let mut writer = LogWriter::new(file, &LogHeader::new(config))?;
    let oracle = StandardOracle {
        opts: config.check_options(),
    };
    minimize_slack_to(config, &oracle, &mut writer, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjecture::{Conjecture, ScaledRhsOracle, Side};
    use crate::search::config::SearchEnsemble;

    fn config(d: usize, n: usize, ensemble: SearchEnsemble, iterations: usize) -> SearchConfig {
        let mut c = SearchConfig::sample(d, n, ensemble, 1, 31);
        c.mode = Mode::Minimize;
        c.minimize_opts.iterations = iterations;
        c
    }

    fn sink(c: &SearchConfig) -> LogWriter<Vec<u8>> {
        LogWriter::new(Vec::new(), &LogHeader::new(c)).unwrap()
    }

    #[test]
    fn degree_two_stays_at_equality() {
        let c = config(2, 2, SearchEnsemble::Ginibre, 10);
        let oracle = StandardOracle::default();
        let out = minimize_slack_to(&c, &oracle, &mut sink(&c), Some(1)).unwrap();
        assert!(!out.candidate_violation);
        for side in Side::BOTH {
            assert!(out.best.min_eig(Conjecture::Schoenberg, side).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn planted_violation_is_found() {
        let c = config(2, 2, SearchEnsemble::Ginibre, 20);
        let oracle = ScaledRhsOracle {
            factor: 0.9,
            opts: c.check_options(),
        };
        let out = minimize_slack_to(&c, &oracle, &mut sink(&c), Some(2)).unwrap();
        assert!(out.candidate_violation);
        assert!(out.best.min_eig(Conjecture::Schoenberg, Side::Right).unwrap() < -1e-3);
    }

    #[test]
    fn commuting_start_finds_nothing() {
        let c = config(3, 2, SearchEnsemble::Commuting, 5);
        let oracle = StandardOracle::default();
        let out = minimize_slack_to(&c, &oracle, &mut sink(&c), Some(2)).unwrap();
        assert!(!out.candidate_violation);
        assert!(out.best.min_eig(Conjecture::Schoenberg, Side::Right).unwrap() >= -1e-8);
    }

    #[test]
    fn spectral_coordinates_round_trip() {
        let c = config(3, 3, SearchEnsemble::Commuting, 0);
        let inst = sample_instance(&c, 0);
        let coords = Coordinates::Spectral {
            unitary: inst.unitary.unwrap(),
        };
        let back = coords.decode(&coords.encode(&inst.a), false);
        for (x, y) in inst.a.iter().zip(&back) {
            assert!((x - y).frobenius_norm() < 1e-12);
        }
    }
}
