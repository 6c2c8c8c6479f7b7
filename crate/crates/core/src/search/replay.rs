use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Mode;
use super::log::{canonical_json, LogHeader, LogWriter, RawLog, ARTIFACT_VERSION};
use super::minimize::minimize_slack_to;
use super::trial::run_trial;
use crate::conjecture::StandardOracle;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub records: usize,
    pub reproduced: bool,
    /// Line number of the first record that differs from its recomputation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_divergence: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_divergence {
            None => write!(f, "reproduced ({} records)", self.records),
            Some(line) => write!(f, "diverged at line {line} ({} records)", self.records),
        }
    }
}

/// Recomputes every record from the header config and compares bytes.
///
/// Checksums are verified first, so a damaged log fails with
/// `ChecksumMismatch` before anything is recomputed.
pub fn replay_from<R: BufRead>(input: R, threads: Option<usize>) -> Result<ReplayReport> {
    let log = RawLog::read(input)?;
    let config = &log.header.config;
    let mut warnings = Vec::new();
    if log.header.artifact_version != ARTIFACT_VERSION {
        warnings.push(format!(
            "log written by version {}, replaying with {}",
            log.header.artifact_version, ARTIFACT_VERSION
        ));
    }
    config.validate()?;

    let expected: Vec<String> = match config.mode {
        Mode::Sample => {
            let pool = super::thread_pool(threads)?;
            pool.install(|| {
                (0..config.trials as u64)
                    .into_par_iter()
                    .map(|i| canonical_json(&run_trial(config, i)))
                    .collect::<Result<_>>()
            })?
        }
        Mode::Minimize => {
            let oracle = StandardOracle {
                opts: config.check_options(),
            };
            let mut w = LogWriter::new(Vec::new(), &LogHeader::new(config))?;
            minimize_slack_to(config, &oracle, &mut w, threads)?;
            RawLog::read(&w.into_inner()[..])?
                .records
                .into_iter()
                .map(|(_, body)| body)
                .collect()
        }
    };

    let mut first_divergence = None;
    for (k, (line, body)) in log.records.iter().enumerate() {
        if expected.get(k) != Some(body) {
            first_divergence = Some(*line);
            break;
        }
    }
    if first_divergence.is_none() && expected.len() != log.records.len() {
        let next = log.records.last().map_or(2, |(line, _)| line + 1);
        first_divergence = Some(next);
        warnings.push(format!(
            "log holds {} records, the config produces {}",
            log.records.len(),
            expected.len()
        ));
    }
    Ok(ReplayReport {
        records: log.records.len(),
        reproduced: first_divergence.is_none(),
        first_divergence,
        warnings,
    })
}

pub fn replay(log_path: &Path, threads: Option<usize>) -> Result<ReplayReport> {
    replay_from(BufReader::new(File::open(log_path)?), threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::search::{run_campaign_to, SearchConfig, SearchEnsemble};

    fn log_bytes(c: &SearchConfig) -> Vec<u8> {
        let mut w = LogWriter::new(Vec::new(), &LogHeader::new(c)).unwrap();
        run_campaign_to(c, &mut w, Some(2)).unwrap();
        w.into_inner()
    }

    #[test]
    fn untouched_log_reproduces() {
        let c = SearchConfig::sample(3, 2, SearchEnsemble::Gue, 6, 41);
        let r = replay_from(&log_bytes(&c)[..], None).unwrap();
        assert!(r.reproduced, "{r:?}");
        assert_eq!(r.to_string(), "reproduced (6 records)");
    }

    #[test]
    fn flipped_byte_is_a_checksum_mismatch() {
        let c = SearchConfig::sample(2, 2, SearchEnsemble::Ginibre, 3, 42);
        let mut bytes = log_bytes(&c);
        let third = bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == b'\n')
            .nth(1)
            .unwrap()
            .0;
        bytes[third + 40] ^= 0x02;
        assert!(matches!(
            replay_from(&bytes[..], None),
            Err(Error::ChecksumMismatch { line: 3 })
        ));
    }

    #[test]
    fn old_version_warns_but_replays() {
        let c = SearchConfig::sample(2, 1, SearchEnsemble::DiagonalComplex, 2, 43);
        let mut header = LogHeader::new(&c);
        header.artifact_version = "0.0.1".into();
        let mut w = LogWriter::new(Vec::new(), &header).unwrap();
        run_campaign_to(&c, &mut w, Some(1)).unwrap();
        let r = replay_from(&w.into_inner()[..], None).unwrap();
        assert!(r.reproduced);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn truncated_log_diverges() {
        let c = SearchConfig::sample(2, 2, SearchEnsemble::Unitary, 3, 44);
        let bytes = log_bytes(&c);
        let cut = bytes.iter().rposition(|&b| b == b'\n').unwrap();
        let cut = bytes[..cut].iter().rposition(|&b| b == b'\n').unwrap() + 1;
        let r = replay_from(&bytes[..cut], None).unwrap();
        assert!(!r.reproduced);
        assert_eq!(r.first_divergence, Some(4));
    }
}
