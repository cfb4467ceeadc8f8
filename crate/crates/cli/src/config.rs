//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [model]
//! n = 1.0
//! ```
//!
//! Every key is optional and falls back to its default; unknown sections,
//! unknown keys, duplicates and out-of-range values are rejected with the
//! offending line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use antonov_core::bounds::PolytropeBoundConfig;
use antonov_core::numerics::OdeConfig;
use antonov_core::response::{BasisFamily, SpectralConfig};
use antonov_core::steady_state::{SolveConfig, DEFAULT_GRID_NODES};
use antonov_core::{DistributionFunction, ExternalPotential};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum External {
    None,
    Plummer,
    Isochrone,
}

impl External {
    fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Plummer => "plummer",
            Self::Isochrone => "isochrone",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    /// Polytrope exponent `φ = A (E0 - E)₊^n`.
    pub n: f64,
    pub amplitude: f64,
    /// Central depth `E0 - U(0)`.
    pub y_central: f64,
    pub external: External,
    pub external_mass: f64,
    pub external_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub radial_nodes: usize,
    pub n_e: usize,
    pub n_l: usize,
    pub k_max: usize,
    pub basis_size: usize,
    pub basis: BasisFamily,
    pub lambda_points: usize,
    pub lambda_depth: f64,
    pub curves: usize,
    /// Energies and angular momenta of the `periods` table.
    pub period_e: usize,
    pub period_l: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceSection {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub mode_tolerance: f64,
    pub epsilon: f64,
    pub diagnostic_resolution: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsSection {
    pub c: f64,
    pub s: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grids: GridSection,
    pub tolerances: ToleranceSection,
    pub bounds: BoundsSection,
    pub outputs: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spectral = SpectralConfig::<f64>::default();
        let ode = OdeConfig::<f64>::default();
        Self {
            model: ModelSection {
                n: 1.0,
                amplitude: 1.0,
                y_central: 1.0,
                external: External::None,
                external_mass: 1.0,
                external_radius: 1.0,
            },
            grids: GridSection {
                radial_nodes: DEFAULT_GRID_NODES,
                n_e: spectral.n_e,
                n_l: spectral.n_l,
                k_max: spectral.k_max,
                basis_size: spectral.basis_size,
                basis: spectral.family,
                lambda_points: spectral.lambda_points,
                lambda_depth: spectral.lambda_depth,
                curves: spectral.curves,
                period_e: 8,
                period_l: 8,
            },
            tolerances: ToleranceSection {
                ode_rtol: ode.rtol,
                ode_atol: ode.atol,
                mode_tolerance: spectral.mode_tolerance,
                epsilon: spectral.epsilon,
                diagnostic_resolution: spectral.diagnostic_resolution,
            },
            bounds: BoundsSection {
                c: 1.0,
                s: 0.25,
                samples: 16,
            },
            outputs: OutputSection {
                directory: PathBuf::from("out"),
                formats: vec![Format::Csv, Format::Json, Format::Text],
            },
        }
    }
}

fn basis_name(b: BasisFamily) -> &'static str {
    match b {
        BasisFamily::Legendre => "legendre",
        BasisFamily::Bessel => "bessel",
    }
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Text => "text",
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn number<T: FromStr>(e: &Entry, key: &str) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::at(e.line, format!("{key}: cannot parse '{}'", e.value)))
}

fn check(ok: bool, e: &Entry, msg: impl Into<String>) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::at(e.line, msg))
    }
}

fn positive(e: &Entry, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = number(e, key)?;
    check(v > 0.0 && v.is_finite(), e, format!("{key} must be positive and finite, got {v}"))?;
    Ok(v)
}

fn at_least(e: &Entry, key: &str, min: usize) -> Result<usize, ConfigError> {
    let v: usize = number(e, key)?;
    check(v >= min, e, format!("{key} must be at least {min}, got {v}"))?;
    Ok(v)
}

const SECTIONS: &[&str] = &["model", "grids", "tolerances", "bounds", "outputs"];

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        text.parse()
    }

    fn apply(&mut self, section: &str, key: &str, e: &Entry) -> Result<(), ConfigError> {
        let m = &mut self.model;
        let g = &mut self.grids;
        let t = &mut self.tolerances;
        let b = &mut self.bounds;
        match (section, key) {
            ("model", "n") => {
                let v: f64 = number(e, key)?;
                check(v > 0.0 && v < 3.5, e, format!("n must lie in (0, 3.5), got {v}"))?;
                m.n = v;
            }
            ("model", "amplitude") => m.amplitude = positive(e, key)?,
            ("model", "y_central") => m.y_central = positive(e, key)?,
            ("model", "external") => {
                m.external = match e.value {
                    "none" => External::None,
                    "plummer" => External::Plummer,
                    "isochrone" => External::Isochrone,
                    other => {
                        return Err(ConfigError::at(
                            e.line,
                            format!("external must be none, plummer or isochrone, got '{other}'"),
                        ))
                    }
                }
            }
            ("model", "external_mass") => m.external_mass = positive(e, key)?,
            ("model", "external_radius") => m.external_radius = positive(e, key)?,
            ("grids", "radial_nodes") => g.radial_nodes = at_least(e, key, 16)?,
            ("grids", "n_e") => g.n_e = at_least(e, key, 2)?,
            ("grids", "n_l") => g.n_l = at_least(e, key, 2)?,
            ("grids", "k_max") => g.k_max = at_least(e, key, 1)?,
            ("grids", "basis_size") => {
                g.basis_size = at_least(e, key, 1)?;
                check(g.basis_size <= 64, e, format!("basis_size must be at most 64, got {}", g.basis_size))?;
            }
            ("grids", "basis") => {
                g.basis = e.value.parse().map_err(|_| {
                    ConfigError::at(
                        e.line,
                        format!("basis must be legendre or bessel, got '{}'", e.value),
                    )
                })?
            }
            ("grids", "lambda_points") => g.lambda_points = at_least(e, key, 2)?,
            ("grids", "lambda_depth") => g.lambda_depth = positive(e, key)?,
            ("grids", "curves") => g.curves = at_least(e, key, 1)?,
            ("grids", "period_e") => g.period_e = at_least(e, key, 1)?,
            ("grids", "period_l") => g.period_l = at_least(e, key, 1)?,
            ("tolerances", "ode_rtol") => t.ode_rtol = positive(e, key)?,
            ("tolerances", "ode_atol") => t.ode_atol = positive(e, key)?,
            ("tolerances", "mode_tolerance") => t.mode_tolerance = positive(e, key)?,
            ("tolerances", "epsilon") => {
                t.epsilon = positive(e, key)?;
                check(t.epsilon < 1.0, e, format!("epsilon must be below 1, got {}", t.epsilon))?;
            }
            ("tolerances", "diagnostic_resolution") => t.diagnostic_resolution = at_least(e, key, 4)?,
            ("bounds", "c") => b.c = positive(e, key)?,
            ("bounds", "s") => b.s = positive(e, key)?,
            ("bounds", "samples") => b.samples = at_least(e, key, 2)?,
            ("outputs", "directory") => {
                check(!e.value.is_empty(), e, "directory must not be empty")?;
                self.outputs.directory = PathBuf::from(e.value);
            }
            ("outputs", "formats") => {
                let mut formats = Vec::new();
                for f in e.value.split(',').map(str::trim) {
                    let f = match f {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        "text" => Format::Text,
                        other => {
                            return Err(ConfigError::at(
                                e.line,
                                format!("formats must list csv, json or text, got '{other}'"),
                            ))
                        }
                    };
                    if !formats.contains(&f) {
                        formats.push(f);
                    }
                }
                self.outputs.formats = formats;
            }
            _ => return Err(ConfigError::at(e.line, format!("unknown key '{key}' in [{section}]"))),
        }
        Ok(())
    }

    /// Normalized text of every setting that affects results, one
    /// `section.key = value` per line in a fixed order. Floats use the
    /// shortest round-trip form. Outputs are excluded.
    pub fn canonical(&self) -> String {
        let m = &self.model;
        let g = &self.grids;
        let t = &self.tolerances;
        let b = &self.bounds;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("model.n", format!("{:?}", m.n));
        put("model.amplitude", format!("{:?}", m.amplitude));
        put("model.y_central", format!("{:?}", m.y_central));
        put("model.external", m.external.name().into());
        put("model.external_mass", format!("{:?}", m.external_mass));
        put("model.external_radius", format!("{:?}", m.external_radius));
        put("grids.radial_nodes", g.radial_nodes.to_string());
        put("grids.n_e", g.n_e.to_string());
        put("grids.n_l", g.n_l.to_string());
        put("grids.k_max", g.k_max.to_string());
        put("grids.basis_size", g.basis_size.to_string());
        put("grids.basis", basis_name(g.basis).into());
        put("grids.lambda_points", g.lambda_points.to_string());
        put("grids.lambda_depth", format!("{:?}", g.lambda_depth));
        put("grids.curves", g.curves.to_string());
        put("grids.period_e", g.period_e.to_string());
        put("grids.period_l", g.period_l.to_string());
        put("tolerances.ode_rtol", format!("{:?}", t.ode_rtol));
        put("tolerances.ode_atol", format!("{:?}", t.ode_atol));
        put("tolerances.mode_tolerance", format!("{:?}", t.mode_tolerance));
        put("tolerances.epsilon", format!("{:?}", t.epsilon));
        put("tolerances.diagnostic_resolution", t.diagnostic_resolution.to_string());
        put("bounds.c", format!("{:?}", b.c));
        put("bounds.s", format!("{:?}", b.s));
        put("bounds.samples", b.samples.to_string());
        s
    }

    /// Lowercase hex SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    /// Full text form that parses back to an equal configuration.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for line in self.canonical().lines() {
            let (key, value) = line.split_once(" = ").expect("canonical lines are key = value");
            let (sec, k) = key.split_once('.').expect("canonical keys are section.key");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                section = sec;
            }
            let _ = writeln!(out, "{k} = {value}");
        }
        let formats: Vec<&str> = self.outputs.formats.iter().map(|&f| format_name(f)).collect();
        let _ = write!(
            out,
            "\n[outputs]\ndirectory = {}\nformats = {}\n",
            self.outputs.directory.display(),
            formats.join(", ")
        );
        out
    }

    pub fn wants(&self, f: Format) -> bool {
        self.outputs.formats.contains(&f)
    }

    pub fn distribution(&self) -> antonov_core::Result<DistributionFunction> {
        DistributionFunction::polytrope(self.model.n, self.model.amplitude, 0.0)
    }

    pub fn external_potential(&self) -> antonov_core::Result<Option<ExternalPotential>> {
        let m = &self.model;
        match m.external {
            External::None => Ok(None),
            External::Plummer => ExternalPotential::plummer(m.external_mass, m.external_radius).map(Some),
            External::Isochrone => ExternalPotential::isochrone(m.external_mass, m.external_radius).map(Some),
        }
    }

    pub fn solve_config(&self) -> SolveConfig<f64> {
        SolveConfig {
            grid_nodes: self.grids.radial_nodes,
            ode: OdeConfig {
                rtol: self.tolerances.ode_rtol,
                atol: self.tolerances.ode_atol,
                ..OdeConfig::default()
            },
            ..SolveConfig::default()
        }
    }

    pub fn spectral_config(&self) -> SpectralConfig<f64> {
        let g = &self.grids;
        let t = &self.tolerances;
        SpectralConfig {
            n_e: g.n_e,
            n_l: g.n_l,
            k_max: g.k_max,
            basis_size: g.basis_size,
            family: g.basis,
            lambda_points: g.lambda_points,
            lambda_depth: g.lambda_depth,
            curves: g.curves,
            epsilon: t.epsilon,
            diagnostic_resolution: t.diagnostic_resolution,
            mode_tolerance: t.mode_tolerance,
        }
    }

    /// Majorant parameters without sample radii; those depend on `R0`.
    pub fn bound_config(&self) -> antonov_core::Result<PolytropeBoundConfig<f64>> {
        PolytropeBoundConfig::new(self.model.n, self.bounds.c, self.bounds.s, Vec::new())
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
        let mut cfg = RunConfig::default();
        let mut section: Option<&str> = None;
        // Lines that can make the majorant parameters inconsistent.
        let (mut n_line, mut s_line) = (0, 0);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split(['#', ';']).next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, format!("malformed section header '{content}'")))?
                    .trim();
                let known = SECTIONS.iter().find(|s| **s == name);
                section = Some(*known.ok_or_else(|| ConfigError::at(line, format!("unknown section [{name}]")))?);
                continue;
            }
            let sec = section.ok_or_else(|| ConfigError::at(line, "key outside of any section"))?;
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::at(line, "empty key"));
            }
            if let Some(first) = seen.insert((sec.to_string(), key.to_string()), line) {
                return Err(ConfigError::at(line, format!("duplicate key '{key}' in [{sec}], first set on line {first}")));
            }
            match (sec, key) {
                ("model", "n") => n_line = line,
                ("bounds", "s") => s_line = line,
                _ => {}
            }
            cfg.apply(sec, key, &Entry { line, value })?;
        }
        if let Err(e) = cfg.bound_config() {
            return Err(ConfigError::at(s_line.max(n_line), format!("[bounds] incompatible with n = {}: {e}", cfg.model.n)));
        }
        Ok(cfg)
    }
}
