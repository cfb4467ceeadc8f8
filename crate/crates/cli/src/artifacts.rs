//! CSV and JSON artifacts and the full report. Every file carries the
//! schema version and the configuration hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use antonov_core::bounds::EnvelopeReport;
use antonov_core::steady_state::{StateHeader, ValidationReport};
use antonov_core::SpectralReport;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

/// A table rendered with `#` comment lines for the metadata, a header
/// row, and reals at 17 significant digits.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# key: value` lines after the schema version and hash.
    pub meta: Vec<(String, String)>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, config_hash: &str) -> String {
        let mut s = format!("# schema_version: {SCHEMA_VERSION}\n# config_hash: {config_hash}\n");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Real(v) => format!("{v:.16e}"),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// JSON wrapper adding the schema version and hash to any payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub schema_version: u32,
    pub config_hash: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Stamped<T> {
    pub fn new(config_hash: &str, body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: config_hash.to_string(),
            body,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, contents))
        .map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

/// Everything `report` computes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub config_hash: String,
    pub state: StateHeader<f64>,
    pub validation: ValidationReport<f64>,
    pub spectral: SpectralReport,
    pub bounds: EnvelopeReport<f64>,
}

impl ReportDocument {
    /// `modes found: N, trace bound: B`, with `B` printed as `<1` below one.
    pub fn summary_line(&self) -> String {
        let tb = match self.spectral.trace_bound.value {
            Some(v) if v < 1.0 => "<1".to_string(),
            Some(v) => format!("{v:.6}"),
            None => "divergent".to_string(),
        };
        format!("modes found: {}, trace bound: {tb}", self.spectral.modes.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

pub fn render_report(doc: &ReportDocument, format: ReportFormat) -> Result<String, CliError> {
    match format {
        ReportFormat::Json => to_json(doc),
        ReportFormat::Text => Ok(render_text(doc)),
    }
}

/// Writes `report.json` or `report.txt` into `dir`.
pub fn emit_report(doc: &ReportDocument, format: ReportFormat, dir: &Path) -> Result<PathBuf, CliError> {
    let name = match format {
        ReportFormat::Json => "report.json",
        ReportFormat::Text => "report.txt",
    };
    write_file(dir, name, &render_report(doc, format)?)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn render_text(doc: &ReportDocument) -> String {
    let sp = &doc.spectral;
    let st = &doc.state;
    let mut s = String::new();
    let mut line = |t: String| {
        s.push_str(&t);
        s.push('\n');
    };
    line(format!("schema_version: {}", doc.schema_version));
    line(format!("config_hash: {}", doc.config_hash));
    line(format!(
        "steady state: M = {:.10e}, R0 = {:.10e}, E0 = {:.10e}, U(0) = {:.10e}",
        st.mass, st.r0, st.e0, st.u0
    ));
    if doc.validation.violations.is_empty() {
        line(format!(
            "assumptions: satisfied (|φ'| integral gap {:.3e})",
            doc.validation.relative_gap
        ));
    } else {
        line(format!("assumptions: violated: {}", doc.validation.violations.join("; ")));
    }
    line(format!(
        "omega_star: {:.10e} at (E, L) = ({:.10e}, {:.10e}), on circular orbits: {}",
        sp.omega_star,
        sp.argmin.0,
        sp.argmin.1,
        yes_no(sp.on_circular)
    ));
    line(format!("omega_max: {:.10e}", sp.omega_max));
    for b in &sp.spectrum.bands {
        line(format!(
            "essential band k = {}..{}: [{:.10e}, {:.10e}]",
            b.k_first, b.k_last, b.lo, b.hi
        ));
    }
    let tb = &sp.trace_bound;
    line(format!(
        "trace bound: {} (coarse {:.10e}, refined {:.10e})",
        tb.value.map_or("divergent".to_string(), |v| format!("{v:.10e}")),
        tb.coarse,
        tb.refined
    ));
    line(format!(
        "predicted_max_modes: {}",
        tb.predicted_max_modes.map_or("unbounded".to_string(), |n| n.to_string())
    ));
    let k = &sp.diagnostics.kphi_traces;
    line(format!(
        "K_phi traces: kernel {:.10e}, by parts {:.10e}, relative gap {:.3e}",
        k.kernel_form, k.parts_form, k.relative_gap
    ));
    line(format!("divergence diagnostic: {}", sp.diagnostics.divergence.verdict));
    if let Some(first) = sp.eigencurves.values.first().and_then(|v| v.first()) {
        line(format!(
            "nu_1(0): {first:.10e}, largest decrease along the grid: {:.3e}",
            sp.eigencurves.max_decrease()
        ));
    }
    for (i, m) in sp.modes.iter().enumerate() {
        line(format!(
            "mode {}: lambda = {:.10e}, sqrt(lambda) = {:.10e}, residual = {:.3e}{}",
            i + 1,
            m.lambda,
            m.sqrt_lambda,
            m.residual,
            if m.at_resolution_limit { " (at resolution limit)" } else { "" }
        ));
    }
    let b = &doc.bounds;
    line(format!(
        "envelope: C_best = {:.10e}, refined {:.10e}, stable: {}, integrable: {}",
        b.c_best,
        b.c_best_refined,
        yes_no(b.pass),
        yes_no(b.integrable)
    ));
    line(format!("verdict: {}", sp.verdict()));
    line(doc.summary_line());
    s
}
