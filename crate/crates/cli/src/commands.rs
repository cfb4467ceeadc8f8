//! The subcommand pipeline: solve, periods, spectrum, bounds, validate and
//! the full report.

use std::path::PathBuf;

use antonov_core::bounds::{default_r_samples, envelope_check, EnvelopeReport};
use antonov_core::orbits::{l_max, period, turning_points};
use antonov_core::response::{spectral_analysis, DivergenceReport, KphiTraces, Mode, Verdict};
use antonov_core::steady_state::{solve_equilibrium, validate_assumptions, StateHeader, ValidationReport};
use antonov_core::{SpectralReport, SteadyState};
use serde::{Deserialize, Serialize};

use crate::artifacts::{
    emit_report, to_json, write_file, Cell, CsvTable, ReportDocument, ReportFormat, Stamped, SCHEMA_VERSION,
};
use crate::config::{Format, RunConfig};
use crate::error::{CliError, Stage};

/// A parsed configuration with its hash and output directory.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub hash: String,
    pub out: PathBuf,
}

impl Run {
    pub fn new(config: RunConfig) -> Self {
        Self {
            hash: config.hash(),
            out: config.outputs.directory.clone(),
            config,
        }
    }

    fn csv(&self, name: &str, table: &CsvTable) -> Result<(), CliError> {
        if self.config.wants(Format::Csv) {
            write_file(&self.out, name, &table.render(&self.hash))?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, body: T) -> Result<(), CliError> {
        if self.config.wants(Format::Json) {
            write_file(&self.out, name, &to_json(&Stamped::new(&self.hash, body))?)?;
        }
        Ok(())
    }
}

pub fn solve_state(run: &Run) -> Result<SteadyState, CliError> {
    let cfg = &run.config;
    let df = cfg.distribution().stage("solve")?;
    let ext = cfg.external_potential().stage("solve")?;
    solve_equilibrium(&df, ext.as_ref(), cfg.model.y_central, &cfg.solve_config()).stage("solve")
}

/// `steady_state.csv` (`r, U, dU, rho0`) and `steady_state.json`.
pub fn solve(run: &Run) -> Result<SteadyState, CliError> {
    let ss = solve_state(run)?;
    let h = ss.header();
    let mut t = CsvTable::new(["r", "U", "dU", "rho0"]);
    t.meta = vec![
        ("M".into(), format!("{:.16e}", h.mass)),
        ("R0".into(), format!("{:.16e}", h.r0)),
        ("E0".into(), format!("{:.16e}", h.e0)),
    ];
    for (((&r, &u), &du), &rho) in ss
        .radii()
        .iter()
        .zip(ss.potential_table())
        .zip(ss.force_table())
        .zip(ss.density_table())
    {
        t.push(vec![r.into(), u.into(), du.into(), rho.into()]);
    }
    run.csv("steady_state.csv", &t)?;
    run.json("steady_state.json", StateBody { header: h })?;
    Ok(ss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBody {
    pub header: StateHeader<f64>,
}

/// `T(E, L)` on `period_e` energies up to `E0` and `period_l` angular
/// momenta from radial orbits up to just below circular.
pub fn periods(run: &Run, ss: &SteadyState) -> Result<CsvTable, CliError> {
    let g = &run.config.grids;
    let (u0, e0) = (ss.u0(), ss.e0());
    let mut t = CsvTable::new(["E", "L", "r_minus", "r_plus", "T", "omega_r"]);
    for j in 0..g.period_e {
        let e = u0 + (e0 - u0) * (j + 1) as f64 / g.period_e as f64;
        let lm = l_max(ss, e).stage("periods")?;
        for i in 0..g.period_l {
            let l = lm * i as f64 / g.period_l as f64;
            let (rm, rp) = turning_points(ss, e, l).stage("periods")?;
            let (tp, w) = period(ss, e, l).stage("periods")?;
            t.push(vec![e.into(), l.into(), rm.into(), rp.into(), tp.into(), w.into()]);
        }
    }
    run.csv("periods.csv", &t)?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesBody {
    pub omega_star: f64,
    pub modes: Vec<Mode<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsBody {
    pub omega_star: f64,
    pub omega_max: f64,
    pub argmin_e: f64,
    pub argmin_l: f64,
    pub on_circular: bool,
    pub trace_bound: Option<f64>,
    pub trace_bound_coarse: f64,
    pub trace_bound_refined: f64,
    pub predicted_max_modes: Option<usize>,
    pub kphi_traces: KphiTraces<f64>,
    pub divergence_verdict: Verdict,
    pub divergence: DivergenceReport<f64>,
    pub tail_estimate: f64,
}

/// Bands, eigencurves, modes and diagnostics of the state.
pub fn spectrum(run: &Run, ss: &SteadyState) -> Result<SpectralReport, CliError> {
    let rep = spectral_analysis(ss, &run.config.spectral_config()).stage("spectrum")?;
    let (w2, wmax2) = (rep.omega_star * rep.omega_star, rep.omega_max * rep.omega_max);

    let mut bands = CsvTable::new(["k", "lo", "hi"]);
    bands.meta = vec![
        ("omega_star".into(), format!("{:.16e}", rep.omega_star)),
        ("omega_max".into(), format!("{:.16e}", rep.omega_max)),
    ];
    for k in 1..=run.config.grids.k_max {
        let k2 = (k * k) as f64;
        bands.push(vec![k.into(), (k2 * w2).into(), (k2 * wmax2).into()]);
    }
    run.csv("bands.csv", &bands)?;

    let ec = &rep.eigencurves;
    let mut cols = vec!["lambda".to_string()];
    cols.extend((1..=ec.count()).map(|p| format!("nu_{p}")));
    let mut curves = CsvTable::new(cols);
    for (l, vals) in ec.lambdas.iter().zip(&ec.values) {
        let mut row = vec![(*l).into()];
        row.extend(vals.iter().map(|&v| Cell::Real(v)));
        curves.push(row);
    }
    run.csv("eigencurves.csv", &curves)?;

    run.json(
        "modes.json",
        ModesBody {
            omega_star: rep.omega_star,
            modes: rep.modes.clone(),
        },
    )?;
    let d = &rep.diagnostics;
    run.json(
        "diagnostics.json",
        DiagnosticsBody {
            omega_star: rep.omega_star,
            omega_max: rep.omega_max,
            argmin_e: rep.argmin.0,
            argmin_l: rep.argmin.1,
            on_circular: rep.on_circular,
            trace_bound: rep.trace_bound.value,
            trace_bound_coarse: rep.trace_bound.coarse,
            trace_bound_refined: rep.trace_bound.refined,
            predicted_max_modes: rep.trace_bound.predicted_max_modes,
            kphi_traces: d.kphi_traces,
            divergence_verdict: d.divergence.verdict,
            divergence: d.divergence.clone(),
            tail_estimate: d.tail_estimate,
        },
    )?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsBody {
    pub n: f64,
    pub c: f64,
    pub s: f64,
    pub c_best: f64,
    pub c_best_refined: f64,
    pub stable: bool,
    pub integral: f64,
    pub integrable: bool,
}

/// `ρ̃` against its envelope at `samples` radii.
pub fn bounds(run: &Run, ss: &SteadyState) -> Result<EnvelopeReport<f64>, CliError> {
    let cfg = run
        .config
        .bound_config()
        .stage("bounds")?
        .with_samples(default_r_samples(ss.r0(), run.config.bounds.samples));
    let rep = envelope_check(ss, &cfg).stage("bounds")?;
    let mut t = CsvTable::new(["r", "rho_tilde", "envelope", "ratio"]);
    for s in &rep.samples {
        t.push(vec![s.r.into(), s.rho_tilde.into(), s.envelope.into(), s.ratio.into()]);
    }
    run.csv("bounds.csv", &t)?;
    run.json(
        "bounds.json",
        BoundsBody {
            n: cfg.n(),
            c: cfg.c(),
            s: cfg.s(),
            c_best: rep.c_best,
            c_best_refined: rep.c_best_refined,
            stable: rep.pass,
            integral: rep.integral,
            integrable: rep.integrable,
        },
    )?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationBody {
    pub assumptions: ValidationReport<f64>,
    pub external_violations: Vec<String>,
}

impl ValidationBody {
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.assumptions.violations.clone();
        v.extend(self.external_violations.iter().cloned());
        v
    }
}

/// Structural assumptions of the state and of the external potential.
pub fn validate(run: &Run, ss: &SteadyState) -> Result<ValidationBody, CliError> {
    let body = ValidationBody {
        assumptions: validate_assumptions(ss).stage("validate")?,
        external_violations: ss.external().map(|e| e.sign_violations()).unwrap_or_default(),
    };
    run.json("validation.json", &body)?;
    Ok(body)
}

/// Runs solve, periods, spectrum and bounds and writes the report.
pub fn report(run: &Run) -> Result<ReportDocument, CliError> {
    let ss = solve(run)?;
    let validation = validate(run, &ss)?;
    periods(run, &ss)?;
    let spectral = spectrum(run, &ss)?;
    let bounds = bounds(run, &ss)?;
    let doc = ReportDocument {
        schema_version: SCHEMA_VERSION,
        config_hash: run.hash.clone(),
        state: ss.header(),
        validation: validation.assumptions,
        spectral,
        bounds,
    };
    if run.config.wants(Format::Json) {
        emit_report(&doc, ReportFormat::Json, &run.out)?;
    }
    if run.config.wants(Format::Text) {
        emit_report(&doc, ReportFormat::Text, &run.out)?;
    }
    Ok(doc)
}
