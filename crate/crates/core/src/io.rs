//! CSV artifacts: comma separated, `.` decimals, LF line endings, and
//! shortest round-trip float formatting so reruns are byte-identical.

use std::io::Write;

use crate::error::{invalid, Result};
use crate::gain::AdgEstimate;
use crate::point_process::{ContactCurve, PointPattern};
use crate::sinr_mc::SuccessCurve;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn io_error(e: impl std::fmt::Display) -> crate::Error {
    invalid(format!("csv output failed: {e}"))
}

/// Writes `header` and then every row, each row as already formatted fields.
pub fn write_rows<W: Write, R: AsRef<[String]>>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header).map_err(io_error)?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(invalid(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        out.write_record(row).map_err(io_error)?;
    }
    out.flush().map_err(io_error)
}

/// Float field; non-finite values keep their Rust spelling (`inf`, `NaN`).
pub fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub const PATTERN_HEADER: [&str; 2] = ["x", "y"];

pub fn write_pattern<W: Write>(w: W, p: &PointPattern) -> Result<()> {
    write_rows(
        w,
        &PATTERN_HEADER,
        p.points.iter().map(|q| vec![num(q.x), num(q.y)]),
    )
}

pub const SUCCESS_HEADER: [&str; 5] = ["theta_db", "p_hat", "ci_lo", "ci_hi", "n"];

pub fn write_success_curve<W: Write>(w: W, c: &SuccessCurve) -> Result<()> {
    write_rows(
        w,
        &SUCCESS_HEADER,
        (0..c.len()).map(|i| {
            vec![
                num(c.theta_db[i]),
                num(c.p_hat[i]),
                num(c.ci_lo[i]),
                num(c.ci_hi[i]),
                c.n.to_string(),
            ]
        }),
    )
}

pub const ADG_HEADER: [&str; 9] = [
    "process",
    "fading",
    "alpha",
    "method",
    "g_hat",
    "g_hat_db",
    "stderr",
    "kappa",
    "kappa_ppp",
];

/// One row of the ADG table.
#[derive(Debug, Clone, PartialEq)]
pub struct AdgRow {
    pub process: String,
    pub fading: String,
    pub alpha: f64,
    pub estimate: AdgEstimate,
}

impl AdgRow {
    /// Fields in [`ADG_HEADER`] order.
    pub fn record(&self) -> Vec<String> {
        let e = &self.estimate;
        vec![
            self.process.clone(),
            self.fading.clone(),
            num(self.alpha),
            e.method.label().to_string(),
            num(e.g_hat),
            num(e.g_hat_db()),
            num(e.stderr),
            opt(e.kappa),
            opt(e.kappa_ppp),
        ]
    }
}

pub fn write_adg_table<W: Write>(w: W, rows: &[AdgRow]) -> Result<()> {
    write_rows(w, &ADG_HEADER, rows.iter().map(AdgRow::record))
}

pub const CONTACT_HEADER: [&str; 3] = ["x", "ccdf", "reps"];

pub fn write_contact_ccdf<W: Write>(w: W, c: &ContactCurve) -> Result<()> {
    write_rows(
        w,
        &CONTACT_HEADER,
        c.radii
            .iter()
            .zip(&c.ccdf)
            .map(|(x, p)| vec![num(*x), num(*p), c.reps.to_string()]),
    )
}
