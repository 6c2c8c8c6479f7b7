use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::config::{SearchConfig, SearchEnsemble};
use crate::conjecture::{
    all_targets, verify_violation, Conjecture, GapOracle, Side, StandardOracle, ViolationCheck,
};
use crate::error::Error;
use crate::linalg::ensemble::{sample_commuting_normal_tuple, sample_matrix};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::rng::{slots, stream};
use crate::ncpoly::{factorize, refine_factors, FactorizationResult, ProbeSet, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    /// Factorization accepted and every applicable report computed.
    Checked,
    /// The derivative did not factor within tolerance.
    PremiseFailed,
    Error,
}

/// The stream addresses a trial drew from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub master_seed: u64,
    /// ChaCha stream id.
    pub stream: u64,
    /// Seed handed to the least-squares restarts.
    pub refine_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub conjecture: Conjecture,
    pub side: Side,
    pub min_eig: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub conjecture: Conjecture,
    pub side: Side,
    pub check: ViolationCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seeds: TrialSeeds,
    pub ensemble: SearchEnsemble,
    pub a: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorizationResult>,
    /// de Bruin-Sharma is absent for uncentered tuples.
    pub reports: Vec<ReportSummary>,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Reports that failed, with the outcome of the violation protocol.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationEntry>,
    /// Descent step, minimize mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
    /// Normalized objective, minimize mode only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

impl TrialRecord {
    pub fn min_eig(&self, conjecture: Conjecture, side: Side) -> Option<f64> {
        self.reports
            .iter()
            .find(|r| r.conjecture == conjecture && r.side == side)
            .map(|r| r.min_eig)
    }

    /// Verified violations.
    pub fn verified_violations(&self) -> impl Iterator<Item = &ViolationEntry> {
        self.violations.iter().filter(|v| v.check.verified)
    }
}

/// A sampled tuple, with its joint unitary when the ensemble has one.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: Vec<ComplexMatrix>,
    pub unitary: Option<ComplexMatrix>,
}

pub(crate) fn subtract_centroid(a: &mut [ComplexMatrix]) {
    let c = crate::conjecture::centroid(a);
    for m in a.iter_mut() {
        *m -= &c;
    }
}

/// Draws the tuple of trial `trial_index` from the instance slot.
pub fn sample_instance(config: &SearchConfig, trial_index: u64) -> Instance {
    let mut rng = stream(config.master_seed, trial_index, slots::INSTANCE);
    let mut inst = match config.ensemble.independent() {
        Some(kind) => Instance {
            a: (0..config.d).map(|_| sample_matrix(kind, config.n, &mut rng)).collect(),
            unitary: None,
        },
        None => {
            let t = sample_commuting_normal_tuple(config.d, config.n, &mut rng);
            Instance {
                a: t.matrices,
                unitary: Some(t.unitary),
            }
        }
    };
    if config.center {
        subtract_centroid(&mut inst.a);
    }
    inst
}

pub(crate) fn trial_seeds(config: &SearchConfig, trial_index: u64) -> TrialSeeds {
    TrialSeeds {
        master_seed: config.master_seed,
        stream: trial_index,
        refine_seed: stream(config.master_seed, trial_index, slots::REFINE).next_u64(),
    }
}

pub(crate) fn trial_probes(config: &SearchConfig, trial_index: u64) -> ProbeSet {
    let mut rng = stream(config.master_seed, trial_index, slots::PROBES);
    ProbeSet::ginibre(config.n, config.probe_count(), &mut rng)
}

/// Factorizes `a`, falling back to refinement from `warm` when the
/// automatic strategy fails.
pub(crate) fn factor_with_warm_start(
    config: &SearchConfig,
    a: &[ComplexMatrix],
    probes: &ProbeSet,
    seeds: &TrialSeeds,
    warm: Option<&[ComplexMatrix]>,
) -> Result<FactorizationResult, Error> {
    let opts = config.factor_options(seeds.refine_seed);
    match factorize(a, Strategy::Auto, probes, &opts) {
        Err(Error::NoFactorization(best)) => match warm {
            Some(b) => match refine_factors(a, b, probes, &opts) {
                Ok(r) => Ok(r),
                Err(Error::NoFactorization(second)) if second.residual < best.residual => {
                    Err(Error::NoFactorization(second))
                }
                Err(Error::NoFactorization(_)) => Err(Error::NoFactorization(best)),
                Err(e) => Err(e),
            },
            None => Err(Error::NoFactorization(best)),
        },
        other => other,
    }
}

/// Factorizes, evaluates every applicable report and verifies any failure.
/// Never fails; problems are encoded in the status.
pub fn evaluate_instance(
    config: &SearchConfig,
    trial_index: u64,
    a: Vec<ComplexMatrix>,
    oracle: &dyn GapOracle,
    warm: Option<&[ComplexMatrix]>,
) -> TrialRecord {
    let seeds = trial_seeds(config, trial_index);
    let mut record = TrialRecord {
        trial_index,
        seeds,
        ensemble: config.ensemble,
        a,
        factorization: None,
        reports: Vec::new(),
        status: TrialStatus::Checked,
        error: None,
        violations: Vec::new(),
        step: None,
        objective: None,
    };
    let probes = trial_probes(config, trial_index);
    let factor = match factor_with_warm_start(config, &record.a, &probes, &seeds, warm) {
        Ok(f) => f,
        Err(Error::NoFactorization(best)) => {
            record.factorization = Some(*best);
            record.status = TrialStatus::PremiseFailed;
            return record;
        }
        Err(e) => {
            record.status = TrialStatus::Error;
            record.error = Some(e.to_string());
            return record;
        }
    };

    for (conjecture, side) in all_targets().filter(|(c, _)| config.conjectures.contains(c)) {
        match oracle.report(conjecture, side, &record.a, &factor.b) {
            Ok(r) => {
                record.reports.push(ReportSummary {
                    conjecture,
                    side,
                    min_eig: r.min_eig,
                    holds: r.holds,
                });
                if !r.holds {
                    let opts = config.factor_options(seeds.refine_seed);
                    match verify_violation(
                        oracle,
                        conjecture,
                        side,
                        &record.a,
                        &factor,
                        config.probe_count(),
                        config.master_seed,
                        trial_index,
                        &opts,
                    ) {
                        Ok(check) => record.violations.push(ViolationEntry {
                            conjecture,
                            side,
                            check,
                        }),
                        Err(e) => {
                            record.status = TrialStatus::Error;
                            record.error = Some(e.to_string());
                        }
                    }
                }
            }
            Err(Error::CentroidNotZero { .. }) => {}
            Err(e) => {
                record.status = TrialStatus::Error;
                record.error = Some(e.to_string());
            }
        }
    }
    record.factorization = Some(factor);
    record
}

/// Trial `trial_index` of a sampling campaign.
pub fn run_trial(config: &SearchConfig, trial_index: u64) -> TrialRecord {
    run_trial_with(config, trial_index, &StandardOracle { opts: config.check_options() })
}

pub fn run_trial_with(config: &SearchConfig, trial_index: u64, oracle: &dyn GapOracle) -> TrialRecord {
    let inst = sample_instance(config, trial_index);
    evaluate_instance(config, trial_index, inst.a, oracle, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_two_trial_is_equality() {
        let c = SearchConfig::sample(2, 3, SearchEnsemble::Ginibre, 1, 11);
        let r = run_trial(&c, 0);
        assert_eq!(r.status, TrialStatus::Checked);
        for side in Side::BOTH {
            assert!(r.min_eig(Conjecture::Schoenberg, side).unwrap().abs() <= 1e-10);
        }
        assert!(r.min_eig(Conjecture::DebruinSharma, Side::Right).is_none());
    }

    #[test]
    fn commuting_trial_holds_everywhere() {
        let mut c = SearchConfig::sample(4, 3, SearchEnsemble::Commuting, 1, 12);
        c.center = true;
        let r = run_trial(&c, 3);
        assert_eq!(r.status, TrialStatus::Checked, "{r:?}");
        assert_eq!(r.reports.len(), 6);
        for s in &r.reports {
            assert!(s.min_eig >= -1e-8, "{s:?}");
        }
    }

    #[test]
    fn trials_are_pure() {
        let c = SearchConfig::sample(3, 2, SearchEnsemble::Gue, 4, 13);
        for i in 0..3 {
            assert_eq!(run_trial(&c, i), run_trial(&c, i));
        }
        assert_ne!(run_trial(&c, 0).a, run_trial(&c, 1).a);
    }

    #[test]
    fn record_round_trips_through_json() {
        let c = SearchConfig::sample(3, 2, SearchEnsemble::Ginibre, 1, 14);
        let r = run_trial(&c, 0);
        let text = super::super::log::canonical_json(&r).unwrap();
        let back: TrialRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
