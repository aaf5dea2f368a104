use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;

use crate::error::Result;
use crate::harness::run::ReportRow;

pub const REPORT_FILE: &str = "report.csv";
pub const TIMINGS_FILE: &str = "timings.csv";

fn entry_columns(prefix: &str) -> Vec<String> {
    let mut cols = Vec::new();
    for ij in ["00", "01", "10", "11"] {
        cols.push(format!("{prefix}{ij}_re"));
        cols.push(format!("{prefix}{ij}_im"));
    }
    cols
}

pub fn report_header() -> Vec<String> {
    let mut h: Vec<String> =
        ["preset", "lambda_re", "lambda_im", "alpha", "noise", "seed", "replicate"].iter().map(|s| s.to_string()).collect();
    h.extend(entry_columns("L"));
    h.extend(entry_columns("truth_"));
    h.extend(["rel_frob_err", "rel_2norm_err", "snapshot_rel_err", "condition"].iter().map(|s| s.to_string()));
    h
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn entries(m: &crate::matrix::ComplexMatrix) -> impl Iterator<Item = String> + '_ {
    (0..4).flat_map(move |k| {
        let z = m[(k / 2, k % 2)];
        [z.re.to_string(), z.im.to_string()]
    })
}

/// Appends rows to `report.csv` and `timings.csv`, flushing after every batch.
///
/// The first line of the report is a `#` comment with the creation time;
/// everything after it depends only on the configuration.
pub struct ReportWriter {
    report: csv::Writer<File>,
    timings: csv::Writer<File>,
}

impl ReportWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut f = File::create(dir.join(REPORT_FILE))?;
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        writeln!(f, "# bcm report generated at unix time {secs}")?;
        let mut report = csv::Writer::from_writer(f);
        report.write_record(report_header())?;
        let mut timings = csv::Writer::from_path(dir.join(TIMINGS_FILE))?;
        timings.write_record(["id", "wall_ms"])?;
        report.flush()?;
        timings.flush()?;
        Ok(Self { report, timings })
    }

    pub fn write_rows(&mut self, preset: &str, rows: &[ReportRow]) -> Result<()> {
        for r in rows {
            let mut rec = vec![
                preset.to_string(),
                r.lambda.re.to_string(),
                r.lambda.im.to_string(),
                r.alpha.to_string(),
                r.noise.to_string(),
                opt(r.seed),
                r.replicate.to_string(),
            ];
            rec.extend(entries(&r.l));
            rec.extend(entries(&r.truth));
            rec.push(r.metrics.rel_frobenius.to_string());
            rec.push(r.metrics.rel_2norm.to_string());
            rec.push(opt(r.snapshot_rel_err));
            rec.push(r.condition.to_string());
            self.report.write_record(&rec)?;
            self.timings.write_record([r.id.to_string(), format!("{:.3}", r.wall_ms)])?;
        }
        self.report.flush()?;
        self.timings.flush()?;
        Ok(())
    }
}

/// `t, f_left_re, f_left_im, f_right_re, f_right_im` on `[0, T]`.
pub fn write_control(path: &Path, t: &[f64], control: &[Complex64]) -> Result<()> {
    let n = t.len();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "f_left_re", "f_left_im", "f_right_re", "f_right_im"])?;
    for k in 0..n {
        let (l, r) = (control[k], control[n + k]);
        w.write_record([t[k].to_string(), l.re.to_string(), l.im.to_string(), r.re.to_string(), r.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `x, u_recon_re, u_recon_im, u_elliptic_re, u_elliptic_im`.
pub fn write_snapshot(path: &Path, x: &[f64], recon: &[Complex64], elliptic: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "u_recon_re", "u_recon_im", "u_elliptic_re", "u_elliptic_im"])?;
    for ((x, a), b) in x.iter().zip(recon).zip(elliptic) {
        w.write_record([x.to_string(), a.re.to_string(), a.im.to_string(), b.re.to_string(), b.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// The report without its timestamp line.
pub fn read_report_body(dir: &Path) -> Result<String> {
    let text = std::fs::read_to_string(dir.join(REPORT_FILE))?;
    Ok(text.lines().skip(1).map(|l| format!("{l}\n")).collect())
}
