//! CSV emission and parsing for regret summaries.
//!
//! Schema (one row per cell, LF endings, full-precision decimals):
//!
//! ```text
//! policy,d,n,r,sigma,scale,seeds,mean_cum_regret,se_cum_regret,
//! mean_simple_regret,se_simple_regret,mean_warm_rounds,warm_success_rate
//! ```
//!
//! Optional statistics (standard errors under two seeds, warm columns for
//! policies without a warm stage) are empty fields.

use std::io::Write;

use super::runner::RegretSummary;
use super::HarnessError;

pub const CSV_HEADER: &str = "policy,d,n,r,sigma,scale,seeds,mean_cum_regret,se_cum_regret,mean_simple_regret,se_simple_regret,mean_warm_rounds,warm_success_rate";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Renders a summary in the stable CSV schema.
pub fn summary_to_csv_string(summary: &RegretSummary) -> String {
    let mut out = String::with_capacity(64 * (summary.cells.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (cell, stats) in &summary.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.policy,
            cell.d,
            cell.n,
            cell.r,
            cell.sigma,
            cell.scale,
            stats.seeds,
            stats.mean_cum_regret,
            opt(stats.se_cum_regret),
            stats.mean_simple_regret,
            opt(stats.se_simple_regret),
            opt(stats.mean_warm_rounds),
            opt(stats.warm_success_rate),
        ));
    }
    out
}

pub fn emit_csv(summary: &RegretSummary, path: &str) -> Result<(), HarnessError> {
    let text = summary_to_csv_string(summary);
    let mut file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        op: "create",
        path: path.to_string(),
        source,
    })?;
    file.write_all(text.as_bytes())
        .map_err(|source| HarnessError::Io {
            op: "write",
            path: path.to_string(),
            source,
        })
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub policy: String,
    pub d: usize,
    pub n: usize,
    pub r: f64,
    pub sigma: f64,
    pub scale: f64,
    pub seeds: usize,
    pub mean_cum_regret: f64,
    pub se_cum_regret: Option<f64>,
    pub mean_simple_regret: f64,
    pub se_simple_regret: Option<f64>,
    pub mean_warm_rounds: Option<f64>,
    pub warm_success_rate: Option<f64>,
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    name: &str,
    line: usize,
) -> Result<T, HarnessError> {
    field.parse().map_err(|_| HarnessError::CsvParse {
        line,
        message: format!("bad {name} value {field:?}"),
    })
}

fn parse_opt(field: &str, name: &str, line: usize) -> Result<Option<f64>, HarnessError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, name, line).map(Some)
    }
}

/// Parses content in the schema emitted by [`emit_csv`]. Errors carry the
/// 1-based offending line.
pub fn parse_csv(content: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(HarnessError::CsvParse {
        line: 1,
        message: "empty input".into(),
    })?;
    if header != CSV_HEADER {
        return Err(HarnessError::CsvParse {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 13 {
            return Err(HarnessError::CsvParse {
                line,
                message: format!("expected 13 fields, found {}", fields.len()),
            });
        }
        rows.push(CsvRow {
            policy: fields[0].to_string(),
            d: parse_field(fields[1], "d", line)?,
            n: parse_field(fields[2], "n", line)?,
            r: parse_field(fields[3], "r", line)?,
            sigma: parse_field(fields[4], "sigma", line)?,
            scale: parse_field(fields[5], "scale", line)?,
            seeds: parse_field(fields[6], "seeds", line)?,
            mean_cum_regret: parse_field(fields[7], "mean_cum_regret", line)?,
            se_cum_regret: parse_opt(fields[8], "se_cum_regret", line)?,
            mean_simple_regret: parse_field(fields[9], "mean_simple_regret", line)?,
            se_simple_regret: parse_opt(fields[10], "se_simple_regret", line)?,
            mean_warm_rounds: parse_opt(fields[11], "mean_warm_rounds", line)?,
            warm_success_rate: parse_opt(fields[12], "warm_success_rate", line)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::runner::{CellStats, SummaryCell};
    use crate::harness::PolicyKind;

    fn sample_summary() -> RegretSummary {
        RegretSummary {
            cells: vec![
                (
                    SummaryCell {
                        policy: PolicyKind::Full,
                        d: 5,
                        n: 4096,
                        r: 1.0,
                        sigma: 0.5,
                        scale: 0.05,
                    },
                    CellStats {
                        seeds: 3,
                        mean_cum_regret: 123.456789012345,
                        se_cum_regret: Some(2.5e-3),
                        mean_simple_regret: 0.125,
                        se_simple_regret: Some(0.0625),
                        mean_warm_rounds: Some(321.0),
                        warm_success_rate: Some(1.0),
                    },
                ),
                (
                    SummaryCell {
                        policy: PolicyKind::UniformPure,
                        d: 5,
                        n: 4096,
                        r: 1.0,
                        sigma: 0.5,
                        scale: 0.05,
                    },
                    CellStats {
                        seeds: 1,
                        mean_cum_regret: 99.0,
                        se_cum_regret: None,
                        mean_simple_regret: 0.75,
                        se_simple_regret: None,
                        mean_warm_rounds: None,
                        warm_success_rate: None,
                    },
                ),
            ],
        }
    }

    #[test]
    fn empty_summary_is_header_only() {
        let text = summary_to_csv_string(&RegretSummary::default());
        assert_eq!(text, format!("{CSV_HEADER}\n"));
        assert!(parse_csv(&text).unwrap().is_empty());
    }

    #[test]
    fn one_cell_is_two_lines() {
        let mut summary = sample_summary();
        summary.cells.truncate(1);
        let text = summary_to_csv_string(&summary);
        assert_eq!(text.trim_end().lines().count(), 2);
    }

    #[test]
    fn round_trip_preserves_values_exactly() {
        let summary = sample_summary();
        let text = summary_to_csv_string(&summary);
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].policy, "full");
        assert_eq!(rows[0].mean_cum_regret, 123.456789012345);
        assert_eq!(rows[0].se_cum_regret, Some(2.5e-3));
        assert_eq!(rows[1].se_cum_regret, None);
        assert_eq!(rows[1].warm_success_rate, None);
        // Re-emission reproduces the bytes.
        let again = summary_to_csv_string(&RegretSummary {
            cells: summary.cells.clone(),
        });
        assert_eq!(text, again);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = format!("{CSV_HEADER}\nfull,5,oops,1,1,1,1,0,,0,,,\n");
        match parse_csv(&text) {
            Err(HarnessError::CsvParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_csv("nonsense\n").is_err());
    }
}
