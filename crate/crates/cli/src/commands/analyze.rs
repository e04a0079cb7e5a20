//! Randomness analysis of an angle file: histogram and uniformity, the
//! ordinal-pattern battery, and min-entropy estimates at several binnings.
//!
//! Accepts either the five-column pulse table written by `simulate` (rows
//! flagged unmeasurable are excluded and counted) or a plain one-value-per-
//! line angle list. Malformed rows are tolerated up to 1% of the data and
//! reported with their line numbers; beyond that the file is rejected.

use std::path::Path;

use serde::Serialize;

use ramanpol_core::stats::{
    chi2_uniform, histogram, min_entropy_mcv, pe_battery, MinEntropyReport, ThetaSequence,
    PE_THRESHOLDS,
};

use crate::error::{CliError, Result};
use crate::report::{write_histogram_csv, write_json, CsvMeta};

const BIN_WIDTH_DEG: f64 = 1.0;
const DIMENSIONS: [usize; 3] = [3, 4, 5];
const T_MAX: usize = 100;
const MCV_BIN_WIDTHS: [f64; 3] = [0.5, 1.0, 2.0];

struct ParsedFile {
    thetas: Vec<f64>,
    rows_total: usize,
    excluded_unmeasurable: usize,
    malformed: Vec<(usize, String)>,
}

/// One data row of the five-column table; returns the angle when usable.
fn parse_pulse_row(line: &str) -> std::result::Result<Option<f64>, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 comma-separated fields, found {}", fields.len()));
    }
    let measurable = match fields[4] {
        "1" => true,
        "0" => false,
        other => return Err(format!("measurable flag must be 0 or 1, got '{other}'")),
    };
    if !measurable {
        return Ok(None);
    }
    let theta: f64 = fields[3]
        .parse()
        .map_err(|_| format!("cannot parse theta_deg '{}'", fields[3]))?;
    if !theta.is_finite() {
        return Err(format!("non-finite theta_deg '{}' on a measurable row", fields[3]));
    }
    Ok(Some(theta))
}

fn parse_file(text: &str) -> ParsedFile {
    let mut out = ParsedFile {
        thetas: Vec::new(),
        rows_total: 0,
        excluded_unmeasurable: 0,
        malformed: Vec::new(),
    };
    // Five-column mode is decided by the header; otherwise one value per
    // line, with a single non-numeric header line tolerated.
    let mut five_col = false;
    let mut header_allowed = true;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if header_allowed {
            header_allowed = false;
            let lowered: String = line.to_lowercase().split_whitespace().collect();
            if lowered.starts_with("pulse_index,") {
                five_col = true;
                continue;
            }
            if line.parse::<f64>().is_err() && !line.contains(',') {
                continue; // plain header line of a one-column file
            }
        }
        out.rows_total += 1;
        if five_col {
            match parse_pulse_row(line) {
                Ok(Some(theta)) => out.thetas.push(theta),
                Ok(None) => out.excluded_unmeasurable += 1,
                Err(why) => out.malformed.push((line_no, why)),
            }
        } else {
            match line.parse::<f64>() {
                Ok(v) if v.is_finite() => out.thetas.push(v),
                _ => out
                    .malformed
                    .push((line_no, format!("cannot parse '{line}' as an angle"))),
            }
        }
    }
    out
}

#[derive(Serialize)]
struct BatteryRowReport {
    dimension: usize,
    tests_run: usize,
    skipped: usize,
    thresholds: [f64; 3],
    below_threshold: [usize; 3],
    expected_below: [f64; 3],
}

#[derive(Serialize)]
struct AnalyzeReport {
    version: &'static str,
    command: &'static str,
    input: String,
    input_sha256: String,
    rows_total: usize,
    rows_used: usize,
    excluded_unmeasurable: usize,
    malformed_rows: usize,
    malformed_lines: Vec<usize>,
    histogram_bin_width_deg: f64,
    histogram_counts: Vec<u64>,
    uniformity_chi2: f64,
    uniformity_dof: usize,
    uniformity_p_value: f64,
    battery_t_max: usize,
    battery: Vec<BatteryRowReport>,
    min_entropy: Vec<MinEntropyReport>,
}

pub fn run(input: &Path, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", input.display())))?;
    let parsed = parse_file(&text);

    if parsed.rows_total == 0 {
        return Err(CliError::usage(format!("{}: no data rows", input.display())));
    }
    if parsed.malformed.len() * 100 > parsed.rows_total {
        let (first_line, why) = &parsed.malformed[0];
        return Err(CliError::usage(format!(
            "{}: {} of {} rows are malformed (>1%); first offender is line {first_line}: {why}",
            input.display(),
            parsed.malformed.len(),
            parsed.rows_total,
        )));
    }
    for (line_no, why) in &parsed.malformed {
        eprintln!("warning: {}: skipping line {line_no}: {why}", input.display());
    }

    let seq = ThetaSequence::new(parsed.thetas)?;
    let counts = histogram(&seq, BIN_WIDTH_DEG)?;
    let uniformity = chi2_uniform(&counts)?;
    let battery = pe_battery(&seq, &DIMENSIONS, T_MAX)?;
    let min_entropy: Vec<MinEntropyReport> = MCV_BIN_WIDTHS
        .iter()
        .map(|&w| min_entropy_mcv(&seq, w))
        .collect::<ramanpol_core::Result<_>>()?;

    std::fs::create_dir_all(out_dir)?;
    // Analysis outputs derive from the input bytes alone: record their hash.
    let input_hash = {
        use sha2::{Digest, Sha256};
        use std::fmt::Write as _;
        let digest = Sha256::digest(text.as_bytes());
        let mut hex = String::new();
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        hex
    };
    write_histogram_csv(
        &out_dir.join("histogram.csv"),
        &CsvMeta::derived(&input_hash),
        BIN_WIDTH_DEG,
        &counts,
    )?;
    write_json(
        &out_dir.join("analyze_report.json"),
        &AnalyzeReport {
            version: env!("CARGO_PKG_VERSION"),
            command: "analyze",
            input: input.display().to_string(),
            input_sha256: input_hash.clone(),
            rows_total: parsed.rows_total,
            rows_used: seq.len(),
            excluded_unmeasurable: parsed.excluded_unmeasurable,
            malformed_rows: parsed.malformed.len(),
            malformed_lines: parsed.malformed.iter().map(|(l, _)| *l).take(20).collect(),
            histogram_bin_width_deg: BIN_WIDTH_DEG,
            histogram_counts: counts,
            uniformity_chi2: uniformity.statistic,
            uniformity_dof: uniformity.dof,
            uniformity_p_value: uniformity.p_value,
            battery_t_max: T_MAX,
            battery: battery
                .rows
                .iter()
                .map(|r| BatteryRowReport {
                    dimension: r.d,
                    tests_run: r.tests_run(),
                    skipped: r.skipped,
                    thresholds: PE_THRESHOLDS,
                    below_threshold: r.below_threshold,
                    expected_below: r.expected_below,
                })
                .collect(),
            min_entropy,
        },
    )?;
    println!(
        "analyze: {} angles used ({} unmeasurable excluded, {} malformed), uniformity p {:.4}",
        seq.len(),
        parsed.excluded_unmeasurable,
        parsed.malformed.len(),
        uniformity.p_value
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_column_rows_fold_in_flags_and_errors() {
        let text = "# master_seed = 1\npulse_index, e_h, e_v, theta_deg, measurable\n\
                    0, 1.0, 1.0, 45.0, 1\n1, 0.0, 0.0, nan, 0\n2, 1.0, 1.0, oops, 1\n";
        let p = parse_file(text);
        assert_eq!(p.rows_total, 3);
        assert_eq!(p.thetas, vec![45.0]);
        assert_eq!(p.excluded_unmeasurable, 1);
        assert_eq!(p.malformed.len(), 1);
        assert_eq!(p.malformed[0].0, 5);
    }

    #[test]
    fn one_column_files_allow_an_optional_header() {
        let with = parse_file("theta_deg\n10.5\n20.25\n");
        assert_eq!(with.thetas, vec![10.5, 20.25]);
        let without = parse_file("10.5\n20.25\n");
        assert_eq!(without.thetas, vec![10.5, 20.25]);
        assert_eq!(without.rows_total, 2);
    }

    #[test]
    fn unmeasurable_nan_theta_is_not_malformed() {
        let text = "pulse_index, e_h, e_v, theta_deg, measurable\n0, 0.0, 0.0, nan, 0\n";
        let p = parse_file(text);
        assert!(p.malformed.is_empty());
        assert_eq!(p.excluded_unmeasurable, 1);
    }
}
