use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use super::log::{LogHeader, RawLog};
use super::trial::TrialRecord;
use crate::conjecture::all_targets;
use crate::error::{Error, Result};

/// Column names of the per-trial CSV.
pub const CSV_HEADER: [&str; 9] = [
    "trial_index",
    "method",
    "residual",
    "schoenberg_right",
    "schoenberg_left",
    "debruin_sharma_right",
    "debruin_sharma_left",
    "kushel_tyaglov_right",
    "kushel_tyaglov_left",
];

pub fn read_log(path: &Path) -> Result<(LogHeader, Vec<TrialRecord>)> {
    let log = RawLog::read(BufReader::new(File::open(path)?))?;
    let records = log.parse_records()?;
    Ok((log.header, records))
}

/// One row per record. Missing reports and factorizations leave empty cells.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let mut row = vec![r.trial_index.to_string()];
        match &r.factorization {
            Some(f) => {
                let method = serde_json::to_value(f.method)?;
                row.push(method.as_str().unwrap_or_default().to_string());
                row.push(format!("{:e}", f.residual));
            }
            None => row.extend([String::new(), String::new()]),
        }
        for (c, s) in all_targets() {
            row.push(r.min_eig(c, s).map(|v| format!("{v:e}")).unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::{run_trial, SearchConfig, SearchEnsemble};

    #[test]
    fn one_row_per_record() {
        let c = SearchConfig::sample(2, 2, SearchEnsemble::Ginibre, 3, 51);
        let records: Vec<_> = (0..3).map(|i| run_trial(&c, i)).collect();
        let mut out = Vec::new();
        write_csv(&records, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("0,closed_form_d2,"));
        assert_eq!(lines[1].split(',').count(), 9);
    }
}
