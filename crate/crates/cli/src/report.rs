//! Output writers. Reports are pretty JSON with floats at 17 significant
//! digits; data tables are plain CSV with `#` metadata lines carrying the
//! master seed and config hash. Nothing here writes a timestamp, so a rerun
//! with identical inputs yields identical bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{CliError, Result};

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigFigFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    // Non-finite floats reach the formatter as nulls, and no report type has
    // a nullable field, so any null here is a NaN or infinity sneaking out.
    fn write_null<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "non-finite float in a JSON report",
        ))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json_string(value: &impl Serialize) -> Result<String> {
    let mut out = Vec::new();
    let fmt = SigFigFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = Serializer::with_formatter(&mut out, fmt);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::usage(format!("cannot serialize report: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| CliError::usage(format!("report is not UTF-8: {e}")))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Provenance lines written at the top of every CSV.
pub struct CsvMeta<'a> {
    pub master_seed: Option<u64>,
    pub config_sha256: Option<&'a str>,
    pub input_sha256: Option<&'a str>,
}

impl<'a> CsvMeta<'a> {
    pub fn seeded(master_seed: u64, config_sha256: &'a str) -> Self {
        Self {
            master_seed: Some(master_seed),
            config_sha256: Some(config_sha256),
            input_sha256: None,
        }
    }

    pub fn derived(input_sha256: &'a str) -> Self {
        Self {
            master_seed: None,
            config_sha256: None,
            input_sha256: Some(input_sha256),
        }
    }
}

/// Opens a CSV file and writes the provenance metadata lines.
pub fn csv_writer(path: &Path, meta: &CsvMeta<'_>) -> Result<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    if let Some(seed) = meta.master_seed {
        writeln!(w, "# master_seed = {seed}")?;
    }
    if let Some(hash) = meta.config_sha256 {
        writeln!(w, "# config_sha256 = {hash}")?;
    }
    if let Some(hash) = meta.input_sha256 {
        writeln!(w, "# input_sha256 = {hash}")?;
    }
    Ok(w)
}

/// One pulse in the standard five-column layout.
pub struct PulseRow {
    pub index: u64,
    pub e_h: f64,
    pub e_v: f64,
    /// Estimated angle; `None` when the estimate is undefined for this pulse.
    pub theta_deg: Option<f64>,
    pub measurable: bool,
}

pub fn write_pulses_csv(path: &Path, meta: &CsvMeta<'_>, rows: &[PulseRow]) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    writeln!(w, "pulse_index, e_h, e_v, theta_deg, measurable")?;
    for r in rows {
        let theta = match r.theta_deg {
            Some(t) => sig17(t),
            None => "nan".to_owned(),
        };
        writeln!(
            w,
            "{}, {}, {}, {}, {}",
            r.index,
            sig17(r.e_h),
            sig17(r.e_v),
            theta,
            u8::from(r.measurable)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// One angle per line, ready for the analysis pipeline.
pub fn write_thetas_csv(path: &Path, meta: &CsvMeta<'_>, values: &[f64]) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    writeln!(w, "theta_deg")?;
    for v in values {
        writeln!(w, "{}", sig17(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Histogram counts over [0, 90) degrees at a fixed bin width.
pub fn write_histogram_csv(
    path: &Path,
    meta: &CsvMeta<'_>,
    bin_width_deg: f64,
    counts: &[u64],
) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    writeln!(w, "bin_center_deg, count")?;
    for (k, c) in counts.iter().enumerate() {
        writeln!(w, "{}, {c}", (k as f64 + 0.5) * bin_width_deg)?;
    }
    w.flush()?;
    Ok(())
}

/// Generic two-column numeric table (for densities and similar curves).
pub fn write_curve_csv(
    path: &Path,
    meta: &CsvMeta<'_>,
    header: &str,
    rows: impl Iterator<Item = (f64, f64)>,
) -> Result<()> {
    let mut w = csv_writer(path, meta)?;
    writeln!(w, "{header}")?;
    for (x, y) in rows {
        writeln!(w, "{}, {}", sig17(x), sig17(y))?;
    }
    w.flush()?;
    Ok(())
}
