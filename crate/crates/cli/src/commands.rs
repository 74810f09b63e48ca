//! Subcommand implementations shared by the binary and the tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rgm_core::batch::{fgl_all, map_indexed, max_rgm_all, Execution};
use rgm_core::data::{DataError, Dataset};
use rgm_core::diagnostics::{
    self, strong_efficient_set, tradeoff_consistency, DiagnosticsError, DiagnosticsReport,
    Feasibility,
};
use rgm_core::lp::Settings;
use rgm_core::measures::{FglResult, FglVariant, MaxRgmResult, MeasureError};
use rgm_core::pps::{self, PpsError};
use rgm_core::technology::{Rts, TechError, Technology, TradeoffSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::olympic::{
    build_olympic_tradeoffs, olympic_pairs, InequalityDoc, OlympicConfig, OlympicError,
};
use crate::report::{round_half_away, Precision, ReportRow};
use crate::tradeoff_file::{read_json, read_tradeoffs, FileError, TradeoffDoc};

pub const FEAS_TOL_VAR: &str = "MAXRGM_FEAS_TOL";
pub const OPT_TOL_VAR: &str = "MAXRGM_OPT_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    AssumptionUnverified(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
            CliError::AssumptionUnverified(_) => 4,
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
data_error!(DataError, FileError, TechError, OlympicError);

impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::UnknownPair(..) | DiagnosticsError::DimensionMismatch { .. } => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<PpsError> for CliError {
    fn from(e: PpsError) -> Self {
        match e {
            PpsError::DimensionMismatch { .. } => CliError::Data(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// LP settings with tolerance overrides: explicit values first, then the
/// environment, then the defaults.
pub fn settings(feas_tol: Option<f64>, opt_tol: Option<f64>) -> Result<Settings, CliError> {
    fn pick(flag: Option<f64>, var: &str, default: f64) -> Result<f64, CliError> {
        let v = match flag {
            Some(v) => v,
            None => match std::env::var(var) {
                Ok(text) => text
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("{var}={text} is not a number")))?,
                Err(_) => return Ok(default),
            },
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("tolerance {v} must be positive")))
        }
    }
    let base = Settings::default();
    Ok(Settings {
        feasibility_tol: pick(feas_tol, FEAS_TOL_VAR, base.feasibility_tol)?,
        optimality_tol: pick(opt_tol, OPT_TOL_VAR, base.optimality_tol)?,
        ..base
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    MaxRgm,
    Fgl,
    FglModified,
    Russell,
}

impl Measure {
    fn fgl_variant(self) -> Option<FglVariant> {
        match self {
            Measure::MaxRgm => None,
            Measure::Fgl => Some(FglVariant::Classic),
            Measure::FglModified => Some(FglVariant::Modified),
            Measure::Russell => Some(FglVariant::Russell),
        }
    }
}

pub fn load_technology(
    dataset: &Path,
    tradeoffs: Option<&Path>,
    rts: Rts,
    settings: Settings,
) -> Result<Technology, CliError> {
    let ds = Dataset::from_csv_path(dataset)?;
    let spec = match tradeoffs {
        Some(p) => read_tradeoffs(p)?,
        None => TradeoffSpec::empty(),
    };
    Ok(Technology::new(ds, spec, rts)?.with_settings(settings))
}

/// Errors that describe the unit rather than a failed computation; they
/// land in the report instead of aborting it.
fn per_unit_note(e: &MeasureError) -> Option<String> {
    match e {
        MeasureError::NoOptimum(_)
        | MeasureError::NotInTechnology
        | MeasureError::AssumptionViolated(_)
        | MeasureError::OutOfRange { .. } => Some(e.to_string()),
        _ => None,
    }
}

fn recheck_targets(
    tech: &Technology,
    targets: &[(usize, &[f64], &[f64])],
    exec: Execution,
) -> Result<(), CliError> {
    let checks = map_indexed(targets.len(), exec, |k| {
        pps::membership(tech, targets[k].1, targets[k].2)
    });
    for (t, ok) in targets.iter().zip(checks) {
        if !ok? {
            return Err(CliError::Solver(format!(
                "target of DMU {} failed the membership re-check",
                t.0
            )));
        }
    }
    Ok(())
}

fn max_rgm_results(
    tech: &Technology,
    exec: Execution,
) -> Result<Vec<Result<MaxRgmResult, String>>, CliError> {
    let results = max_rgm_all(tech, exec)
        .into_iter()
        .map(|r| r.map_err(|e| per_unit_note(&e).ok_or(CliError::Solver(e.to_string()))))
        .map(|r| match r {
            Ok(v) => Ok(Ok(v)),
            Err(Ok(note)) => Ok(Err(note)),
            Err(Err(e)) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let ids: Vec<_> = results
        .iter()
        .enumerate()
        .filter_map(|(k, r)| {
            r.as_ref()
                .ok()
                .map(|v| (k + 1, v.target_x.as_slice(), v.target_y.as_slice()))
        })
        .collect();
    recheck_targets(tech, &ids, exec)?;
    Ok(results)
}

fn fgl_results(
    tech: &Technology,
    variant: FglVariant,
    exec: Execution,
) -> Result<Vec<Result<FglResult, String>>, CliError> {
    fgl_all(tech, variant, exec)
        .into_iter()
        .map(|r| match r {
            Ok(v) => Ok(Ok(v)),
            Err(e) => per_unit_note(&e)
                .map(Err)
                .ok_or(CliError::Solver(e.to_string())),
        })
        .collect()
}

pub struct EvaluateOptions {
    pub measure: Measure,
    pub force: bool,
    pub precision: Precision,
    pub execution: Execution,
}

/// The frontier gate in front of max RGM.
pub fn require_positive_facets(tech: &Technology) -> Result<(), CliError> {
    if diagnostics::facet_positivity_check(tech)?.passed {
        Ok(())
    } else {
        Err(CliError::AssumptionUnverified(
            "facet positivity could not be verified for this technology; rerun with --force to evaluate anyway".into(),
        ))
    }
}

pub fn evaluate(tech: &Technology, opts: &EvaluateOptions) -> Result<Vec<ReportRow>, CliError> {
    let ds = tech.dataset();
    let mut rows: Vec<ReportRow> = ds.dmus().iter().map(|d| ReportRow::new(ds, d.id)).collect();
    match opts.measure.fgl_variant() {
        None => {
            if !opts.force {
                require_positive_facets(tech)?;
            }
            for (row, res) in rows.iter_mut().zip(max_rgm_results(tech, opts.execution)?) {
                *row = match res {
                    Ok(v) => std::mem::take(row).with_max_rgm(ds, &v, opts.precision),
                    Err(note) => ReportRow {
                        note,
                        ..std::mem::take(row)
                    },
                };
            }
        }
        Some(variant) => {
            for (row, res) in rows
                .iter_mut()
                .zip(fgl_results(tech, variant, opts.execution)?)
            {
                *row = match res {
                    Ok(v) => std::mem::take(row).with_fgl(&v, opts.precision),
                    Err(note) => ReportRow {
                        note,
                        ..std::mem::take(row)
                    },
                };
            }
        }
    }
    Ok(rows)
}

fn fmt_opt(v: Option<f64>, precision: Precision) -> String {
    match (v, precision) {
        (None, _) => "-".into(),
        (Some(v), Precision::Display) => round_half_away(v, 5),
        (Some(v), Precision::Full) => format!("{v}"),
    }
}

/// Plain-text rendering of a diagnostics report.
pub fn render_diagnostics(ds: &Dataset, rep: &DiagnosticsReport, precision: Precision) -> String {
    let mut out = String::new();
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    writeln!(out, "[facet positivity]").unwrap();
    for (label, v) in ds.input_labels().iter().zip(&rep.v_star) {
        writeln!(out, "v*  {label:<16} {}", fmt_opt(*v, precision)).unwrap();
    }
    for (label, u) in ds.output_labels().iter().zip(&rep.u_star) {
        writeln!(out, "u*  {label:<16} {}", fmt_opt(*u, precision)).unwrap();
    }
    writeln!(out, "passed: {}", yes_no(rep.facet_positivity_passed)).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[free lunch]").unwrap();
    writeln!(
        out,
        "all u* positive: {}",
        yes_no(rep.free_lunch_hypothesis_met)
    )
    .unwrap();
    if rep.free_lunch_unbounded {
        writeln!(out, "value: unbounded").unwrap();
    } else {
        writeln!(out, "value: {}", fmt_opt(rep.free_lunch_value, precision)).unwrap();
    }
    writeln!(
        out,
        "dual value: {}",
        fmt_opt(rep.dual_free_lunch_value, precision)
    )
    .unwrap();
    writeln!(out, "free lunch: {}", yes_no(rep.has_free_lunch)).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[duality]").unwrap();
    for c in &rep.duality {
        writeln!(
            out,
            "{:<24} {:>22} {:>22} {}",
            c.name,
            c.primal,
            c.dual,
            if c.agrees() { "ok" } else { "GAP" }
        )
        .unwrap();
    }
    out
}

/// Consistency system read from a pairs file: explicit `pairs`, or the
/// pairs generated from `top_set` and an optional `hub`, plus `extra` rows.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PairsDoc {
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub top_set: Vec<usize>,
    #[serde(default)]
    pub hub: Option<usize>,
    #[serde(default)]
    pub extra: Vec<InequalityDoc>,
}

pub fn check_pairs(
    ds: &Dataset,
    doc: &PairsDoc,
    settings: &Settings,
) -> Result<Feasibility, CliError> {
    let mut pairs = doc.pairs.clone();
    if !doc.top_set.is_empty() {
        pairs.extend(olympic_pairs(ds.n(), &doc.top_set, doc.hub)?);
    }
    let extra = doc
        .extra
        .iter()
        .map(InequalityDoc::to_inequality)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tradeoff_consistency(ds, &pairs, &extra, settings)?)
}

pub fn olympic_tradeoffs(ds: &Dataset, config: &OlympicConfig) -> Result<TradeoffSpec, CliError> {
    Ok(build_olympic_tradeoffs(
        ds,
        &config.refined_top_set(),
        config.hub,
        &config.extra_columns()?,
    )?)
}

pub fn tradeoffs_json(spec: &TradeoffSpec) -> String {
    let mut text =
        serde_json::to_string_pretty(&TradeoffDoc::from_spec(spec)).expect("serializable");
    text.push('\n');
    text
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_error(path, e))
}

pub const SCORE_TOL: f64 = 1e-3;
pub const TARGET_TOL: f64 = 0.1;

/// Expected row of the bundled case-study table. Blank cells are absent.
#[derive(Debug, Clone, Deserialize)]
pub struct ExpectedRow {
    pub dmu: usize,
    pub name: String,
    pub score_maxrgm: f64,
    pub target_coordinate: Option<String>,
    pub target_value: Option<f64>,
    pub score_fgl: f64,
    pub zero_input_target: bool,
}

pub fn read_expected(path: &Path) -> Result<Vec<ExpectedRow>, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .collect::<Result<Vec<ExpectedRow>, _>>()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExpectedDiagnostics {
    pub v_star: Vec<String>,
    pub u_star: Vec<String>,
    pub v_u_tolerance: String,
    pub free_lunch_value: String,
    pub free_lunch_tolerance: String,
}

/// Paths of the bundled case-study files.
#[derive(Debug, Clone)]
pub struct BundledData {
    pub dataset: PathBuf,
    pub config: PathBuf,
    pub expected: PathBuf,
    pub expected_diagnostics: PathBuf,
}

impl BundledData {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            dataset: dir.join("paris2024.csv"),
            config: dir.join("paris2024_config.json"),
            expected: dir.join("paris2024_expected.csv"),
            expected_diagnostics: dir.join("paris2024_expected_diagnostics.json"),
        }
    }

    /// Data directory shipped with the crate sources.
    pub fn default_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
    }
}

/// Everything computed by a case-study rerun, at full precision.
pub struct Reproduction {
    pub technology: Technology,
    pub config: OlympicConfig,
    pub max_rgm: Vec<MaxRgmResult>,
    pub fgl: Vec<FglResult>,
    pub diagnostics: DiagnosticsReport,
    pub top_set_system: Feasibility,
    pub refined_system: Feasibility,
    pub efficient_set: Vec<usize>,
    pub expected: Vec<ExpectedRow>,
    pub expected_diagnostics: ExpectedDiagnostics,
}

pub fn reproduce(
    data: &BundledData,
    settings: Settings,
    exec: Execution,
) -> Result<Reproduction, CliError> {
    let ds = Dataset::from_csv_path(&data.dataset)?;
    let config = OlympicConfig::read(&data.config)?;
    let expected = read_expected(&data.expected)?;
    let expected_diagnostics: ExpectedDiagnostics = read_json(&data.expected_diagnostics)?;
    if expected.len() != ds.n() {
        return Err(CliError::Data(format!(
            "expected table has {} rows for {} DMUs",
            expected.len(),
            ds.n()
        )));
    }

    let plain = Technology::vrs(ds.clone()).with_settings(settings);
    let efficient_set = strong_efficient_set(&plain)?;

    let extra = config.consistency_extra()?;
    let system = |top: &[usize], hub| -> Result<Feasibility, CliError> {
        let pairs = olympic_pairs(ds.n(), top, hub)?;
        Ok(tradeoff_consistency(&ds, &pairs, &extra, &settings)?)
    };
    let top_set_system = system(&config.top_set, None)?;
    let refined_system = system(&config.refined_top_set(), Some(config.hub))?;

    let spec = olympic_tradeoffs(&ds, &config)?;
    let technology = Technology::vrs_to(ds, spec)?.with_settings(settings);
    let diagnostics = diagnostics::diagnose(&technology)?;
    let unit = |e: MeasureError| CliError::Solver(e.to_string());
    let max_rgm = max_rgm_all(&technology, exec)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(unit)?;
    let targets: Vec<_> = max_rgm
        .iter()
        .enumerate()
        .map(|(k, r)| (k + 1, r.target_x.as_slice(), r.target_y.as_slice()))
        .collect();
    recheck_targets(&technology, &targets, exec)?;
    let fgl = fgl_all(&technology, FglVariant::Classic, exec)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(unit)?;
    Ok(Reproduction {
        technology,
        config,
        max_rgm,
        fgl,
        diagnostics,
        top_set_system,
        refined_system,
        efficient_set,
        expected,
        expected_diagnostics,
    })
}

fn parse(text: &str) -> f64 {
    text.parse().unwrap_or(f64::NAN)
}

impl Reproduction {
    pub fn rows(&self, precision: Precision) -> Vec<ReportRow> {
        let ds = self.technology.dataset();
        ds.dmus()
            .iter()
            .zip(self.max_rgm.iter().zip(&self.fgl))
            .map(|(d, (a, b))| {
                ReportRow::new(ds, d.id)
                    .with_max_rgm(ds, a, precision)
                    .with_fgl(b, precision)
            })
            .collect()
    }

    /// Differences from the bundled expectations, one line each.
    pub fn mismatches(&self) -> Vec<String> {
        let ds = self.technology.dataset();
        let mut out = Vec::new();
        for ((exp, a), b) in self.expected.iter().zip(&self.max_rgm).zip(&self.fgl) {
            let id = exp.dmu;
            if (a.score - exp.score_maxrgm).abs() > SCORE_TOL {
                out.push(format!(
                    "DMU {id}: max RGM score {:.6}, expected {:.3}",
                    a.score, exp.score_maxrgm
                ));
            }
            let computed = a.coordinate.map(|k| match a.side {
                rgm_core::measures::Side::Input => (ds.input_labels()[k].clone(), a.target_x[k]),
                _ => (ds.output_labels()[k].clone(), a.target_y[k]),
            });
            match (&exp.target_coordinate, exp.target_value, computed) {
                (Some(label), Some(value), Some((c_label, c_value))) => {
                    if *label != c_label || (value - c_value).abs() > TARGET_TOL {
                        out.push(format!(
                            "DMU {id}: target {c_label}={c_value:.3}, expected {label}={value:.1}"
                        ));
                    }
                }
                (None, _, None) => {}
                (Some(label), _, None) => {
                    out.push(format!("DMU {id}: no target computed, expected {label}"))
                }
                (_, _, Some((c_label, c_value))) => {
                    if exp.target_coordinate.is_some() || exp.score_maxrgm < 1.0 {
                        out.push(format!(
                            "DMU {id}: target {c_label}={c_value:.3} has no expected value"
                        ));
                    }
                }
            }
            if (b.score - exp.score_fgl).abs() > SCORE_TOL {
                out.push(format!(
                    "DMU {id}: FGL score {:.6}, expected {:.3}",
                    b.score, exp.score_fgl
                ));
            }
            if b.zero_input_target != exp.zero_input_target {
                out.push(format!(
                    "DMU {id}: zero-input target {}, expected {}",
                    b.zero_input_target, exp.zero_input_target
                ));
            }
        }
        let expd = &self.expected_diagnostics;
        let tol = parse(&expd.v_u_tolerance);
        let pairs = expd
            .v_star
            .iter()
            .zip(&self.diagnostics.v_star)
            .map(|(e, c)| ("v*", e, c));
        let pairs = pairs.chain(
            expd.u_star
                .iter()
                .zip(&self.diagnostics.u_star)
                .map(|(e, c)| ("u*", e, c)),
        );
        for (k, (name, e, c)) in pairs.enumerate() {
            match c {
                Some(c) if (c - parse(e)).abs() <= tol => {}
                _ => out.push(format!("{name} entry {k}: {c:?}, expected {e}")),
            }
        }
        match self.diagnostics.free_lunch_value {
            Some(v)
                if (v - parse(&expd.free_lunch_value)).abs()
                    <= parse(&expd.free_lunch_tolerance) => {}
            v => out.push(format!(
                "free lunch value {v:?}, expected {}",
                expd.free_lunch_value
            )),
        }
        if self.top_set_system != Feasibility::Infeasible {
            out.push("top-set consistency system is feasible, expected infeasible".into());
        }
        if self.refined_system != Feasibility::Feasible {
            out.push("refined consistency system is infeasible, expected feasible".into());
        }
        let expected: std::collections::BTreeSet<_> =
            self.config.efficient_set.iter().copied().collect();
        let computed: std::collections::BTreeSet<_> = self.efficient_set.iter().copied().collect();
        for id in computed.difference(&expected) {
            out.push(format!("efficient set: DMU {id} computed but not expected"));
        }
        for id in expected.difference(&computed) {
            out.push(format!("efficient set: DMU {id} expected but not computed"));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mismatches = self.mismatches();
        let mut out = String::new();
        let ds = self.technology.dataset();
        writeln!(out, "DMUs: {}", ds.n()).unwrap();
        writeln!(
            out,
            "trade-off columns: {}",
            self.technology.tradeoffs().len()
        )
        .unwrap();
        writeln!(
            out,
            "efficient set (plain VRS): {} DMUs",
            self.efficient_set.len()
        )
        .unwrap();
        writeln!(out, "top-set consistency system: {:?}", self.top_set_system).unwrap();
        writeln!(out, "refined consistency system: {:?}", self.refined_system).unwrap();
        writeln!(out, "mismatches: {}", mismatches.len()).unwrap();
        for m in &mismatches {
            writeln!(out, "  {m}").unwrap();
        }
        out
    }
}
