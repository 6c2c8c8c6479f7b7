//! Seeded, parallel, replayable campaigns over random instance tuples.
//!
//! Trial `i` draws everything from the counter-based streams
//! `(master_seed, i, slot)`, so records do not depend on scheduling. Workers
//! compute records in parallel; a single writer commits them in index order.

pub mod config;
pub mod log;
pub mod minimize;
pub mod replay;
pub mod report;
pub mod trial;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjecture::{all_targets, Conjecture, Side};
use crate::error::{Error, Result};

pub use config::{Mode, MinimizeOptions, SearchConfig, SearchEnsemble, Tolerances, SCHEMA_VERSION};
pub use log::{LogHeader, LogWriter, RawLog, ARTIFACT_VERSION};
pub use minimize::{minimize_slack, minimize_slack_to, MinimizeOutcome};
pub use replay::{replay, replay_from, ReplayReport};
pub use report::{read_log, write_csv, CSV_HEADER};
pub use trial::{
    run_trial, run_trial_with, sample_instance, Instance, ReportSummary, TrialRecord, TrialSeeds,
    TrialStatus, ViolationEntry,
};

/// Records computed per parallel batch before the writer drains them.
const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstSlack {
    pub conjecture: Conjecture,
    pub side: Side,
    pub min_eig: f64,
    pub trial_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub records: usize,
    pub checked: usize,
    pub premise_failed: usize,
    pub error: usize,
    /// `premise_failed / records`, zero for an empty log.
    pub premise_failed_rate: f64,
    pub verified_violations: usize,
    /// Lowest `min_eig` per (conjecture, side) over checked records.
    pub worst: Vec<WorstSlack>,
}

impl CampaignSummary {
    pub fn add(&mut self, r: &TrialRecord) {
        self.records += 1;
        match r.status {
            TrialStatus::Checked => self.checked += 1,
            TrialStatus::PremiseFailed => self.premise_failed += 1,
            TrialStatus::Error => self.error += 1,
        }
        self.premise_failed_rate = self.premise_failed as f64 / self.records as f64;
        self.verified_violations += r.verified_violations().count();
        if r.status != TrialStatus::Checked {
            return;
        }
        for s in &r.reports {
            let entry = WorstSlack {
                conjecture: s.conjecture,
                side: s.side,
                min_eig: s.min_eig,
                trial_index: r.trial_index,
                step: r.step,
            };
            match self
                .worst
                .iter_mut()
                .find(|w| w.conjecture == s.conjecture && w.side == s.side)
            {
                Some(w) if s.min_eig < w.min_eig => *w = entry,
                Some(_) => {}
                None => self.worst.push(entry),
            }
        }
        self.worst.sort_by_key(|w| {
            all_targets()
                .position(|t| t == (w.conjecture, w.side))
                .unwrap_or(usize::MAX)
        });
    }

    pub fn worst_for(&self, conjecture: Conjecture, side: Side) -> Option<&WorstSlack> {
        self.worst
            .iter()
            .find(|w| w.conjecture == conjecture && w.side == side)
    }

    /// Largest `|min_eig|` over all reports of checked records.
    pub fn worst_abs(&self) -> f64 {
        self.worst.iter().map(|w| w.min_eig.abs()).fold(0.0, f64::max)
    }
}

pub fn summarize<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> CampaignSummary {
    let mut s = CampaignSummary::default();
    for r in records {
        s.add(r);
    }
    s
}

pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

/// Sampling campaign written to any sink. `threads = None` uses all cores.
pub fn run_campaign_to<W: Write>(
    config: &SearchConfig,
    writer: &mut LogWriter<W>,
    threads: Option<usize>,
) -> Result<CampaignSummary> {
    config.validate()?;
    let pool = thread_pool(threads)?;
    let mut summary = CampaignSummary::default();
    let total = config.trials as u64;
    let mut start = 0u64;
    while start < total {
        let end = (start + BATCH as u64).min(total);
        let batch: Vec<TrialRecord> =
            pool.install(|| (start..end).into_par_iter().map(|i| run_trial(config, i)).collect());
        for r in &batch {
            writer.write(r)?;
            summary.add(r);
        }
        start = end;
    }
    writer.flush()?;
    Ok(summary)
}

/// Sampling campaign into a fresh log file.
pub fn run_campaign(config: &SearchConfig, log_path: &Path, threads: Option<usize>) -> Result<CampaignSummary> {
    config.validate()?;
    let file = BufWriter::new(File::create(log_path)?);
    let mut writer = LogWriter::new(file, &LogHeader::new(config))?;
    run_campaign_to(config, &mut writer, threads)
}

/// Runs whichever mode the config asks for and summarizes the log.
pub fn run(config: &SearchConfig, log_path: &Path, threads: Option<usize>) -> Result<CampaignSummary> {
    match config.mode {
        Mode::Sample => run_campaign(config, log_path, threads),
        Mode::Minimize => {
            minimize_slack(config, log_path, threads)?;
            let (_, records) = read_log(log_path)?;
            Ok(summarize(&records))
        }
    }
}
