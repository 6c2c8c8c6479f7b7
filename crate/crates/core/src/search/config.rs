use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conjecture::{CheckOptions, Conjecture, Side};
use crate::error::{Error, Result};
use crate::linalg::ensemble::Ensemble;
use crate::ncpoly::FactorOptions;
use crate::scalar::KtForm;

pub const SCHEMA_VERSION: u32 = 1;

/// Where instance tuples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchEnsemble {
    Ginibre,
    Gue,
    Unitary,
    DiagonalComplex,
    /// `U diag(lambda_j) U*` with one shared unitary. Control group.
    Commuting,
}

impl SearchEnsemble {
    pub const ALL: [SearchEnsemble; 5] = [
        SearchEnsemble::Ginibre,
        SearchEnsemble::Gue,
        SearchEnsemble::Unitary,
        SearchEnsemble::DiagonalComplex,
        SearchEnsemble::Commuting,
    ];

    /// The single-matrix ensemble, if members are drawn independently.
    pub fn independent(self) -> Option<Ensemble> {
        match self {
            SearchEnsemble::Ginibre => Some(Ensemble::Ginibre),
            SearchEnsemble::Gue => Some(Ensemble::Gue),
            SearchEnsemble::Unitary => Some(Ensemble::Unitary),
            SearchEnsemble::DiagonalComplex => Some(Ensemble::DiagonalComplex),
            SearchEnsemble::Commuting => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self.independent() {
            Some(e) => e.name(),
            None => "commuting",
        }
    }
}

impl fmt::Display for SearchEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SearchEnsemble {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SearchEnsemble::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown ensemble `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Sample,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub factor_tol: f64,
    /// `None` uses the scale-relative Loewner default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loewner_tol: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            factor_tol: 1e-8,
            loewner_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeOptions {
    /// Descent steps per restart.
    pub iterations: usize,
    /// Finite-difference step, relative to the tuple scale.
    pub step: f64,
    pub restarts: usize,
    pub target: Conjecture,
    pub side: Side,
    /// First trial move, relative to the tuple scale.
    pub initial_move: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            iterations: 200,
            step: 1e-5,
            restarts: 1,
            target: Conjecture::Schoenberg,
            side: Side::Right,
            initial_move: 0.1,
        }
    }
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn all_conjectures() -> Vec<Conjecture> {
    Conjecture::ALL.to_vec()
}

/// A campaign description. Every record of a campaign is a pure function of
/// this value and the trial index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub d: usize,
    pub n: usize,
    pub ensemble: SearchEnsemble,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub minimize_opts: MinimizeOptions,
    /// Subtract the centroid from each sampled tuple.
    #[serde(default)]
    pub center: bool,
    #[serde(default)]
    pub kt_form: KtForm,
    /// Inequalities to evaluate; all three by default.
    #[serde(default = "all_conjectures")]
    pub conjectures: Vec<Conjecture>,
    /// Probe count; `None` uses `max(2d, 8)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
}

impl SearchConfig {
    /// Sampling-mode config with defaults for everything else.
    pub fn sample(d: usize, n: usize, ensemble: SearchEnsemble, trials: usize, master_seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            d,
            n,
            ensemble,
            trials,
            master_seed,
            tolerances: Tolerances::default(),
            mode: Mode::Sample,
            minimize_opts: MinimizeOptions::default(),
            center: false,
            kt_form: KtForm::default(),
            conjectures: all_conjectures(),
            probes: None,
        }
    }

    /// Parses and validates, listing every problem found.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(vec![format!("not valid JSON: {e}")]))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(map) = &value else {
            return Err(Error::Config(vec!["config must be a JSON object".into()]));
        };
        let mut problems = Vec::new();
        for key in ["d", "n", "ensemble", "trials", "master_seed"] {
            if !map.contains_key(key) {
                problems.push(format!("{key}: missing"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let config: SearchConfig =
            serde_json::from_value(value).map_err(|e| Error::Config(vec![e.to_string()]))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            problems.push(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            ));
        }
        if self.d < 2 {
            problems.push(format!("d: must be at least 2, found {}", self.d));
        }
        if self.n < 1 {
            problems.push("n: must be at least 1".into());
        }
        let t = &self.tolerances;
        if !(t.factor_tol.is_finite() && t.factor_tol > 0.0) {
            problems.push(format!("tolerances.factor_tol: must be positive, found {}", t.factor_tol));
        }
        if let Some(l) = t.loewner_tol {
            if !(l.is_finite() && l >= 0.0) {
                problems.push(format!("tolerances.loewner_tol: must be non-negative, found {l}"));
            }
        }
        if self.conjectures.is_empty() {
            problems.push("conjectures: must name at least one".into());
        }
        if self.probes == Some(0) {
            problems.push("probes: must be at least 1".into());
        }
        if self.mode == Mode::Minimize {
            let m = &self.minimize_opts;
            if !(m.step.is_finite() && m.step > 0.0) {
                problems.push(format!("minimize_opts.step: must be positive, found {}", m.step));
            }
            if !(m.initial_move.is_finite() && m.initial_move > 0.0) {
                problems.push(format!(
                    "minimize_opts.initial_move: must be positive, found {}",
                    m.initial_move
                ));
            }
            if m.restarts == 0 {
                problems.push("minimize_opts.restarts: must be at least 1".into());
            }
            if !self.conjectures.contains(&m.target) {
                problems.push(format!("minimize_opts.target: {} is not in conjectures", m.target));
            }
            if m.target == Conjecture::DebruinSharma && !self.center {
                problems.push("minimize_opts.target: debruin_sharma needs center = true".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn probe_count(&self) -> usize {
        self.probes
            .unwrap_or_else(|| crate::ncpoly::ProbeSet::default_count(self.d))
    }

    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            tol: self.tolerances.loewner_tol,
            kt_form: self.kt_form,
        }
    }

    pub fn factor_options(&self, seed: u64) -> FactorOptions {
        FactorOptions {
            tol: self.tolerances.factor_tol,
            seed,
            ..FactorOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = SearchConfig::from_json(
            r#"{"d": 2, "n": 3, "ensemble": "ginibre", "trials": 10, "master_seed": 7}"#,
        )
        .unwrap();
        assert_eq!(c, SearchConfig::sample(2, 3, SearchEnsemble::Ginibre, 10, 7));
    }

    #[test]
    fn problems_are_listed_per_field() {
        let err = SearchConfig::from_json(
            r#"{"d": 1, "n": 0, "ensemble": "gue", "trials": 1, "master_seed": 0,
                "tolerances": {"factor_tol": -1}}"#,
        )
        .unwrap_err();
        let Error::Config(list) = err else { panic!() };
        assert_eq!(list.len(), 3, "{list:?}");
        assert!(list[0].starts_with("d:"));
        assert!(list[1].starts_with("n:"));
        assert!(list[2].starts_with("tolerances.factor_tol:"));
    }

    #[test]
    fn missing_and_unknown_fields() {
        let Error::Config(list) = SearchConfig::from_json(r#"{"d": 2}"#).unwrap_err() else {
            panic!()
        };
        assert_eq!(list.len(), 4);
        let err = SearchConfig::from_json(
            r#"{"d": 2, "n": 1, "ensemble": "gue", "trials": 1, "master_seed": 0, "colour": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn round_trip() {
        let mut c = SearchConfig::sample(3, 2, SearchEnsemble::Commuting, 5, u64::MAX);
        c.mode = Mode::Minimize;
        c.center = true;
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(SearchConfig::from_json(&text).unwrap(), c);
    }
}
