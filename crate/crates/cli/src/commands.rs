use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use reduced_polygons::formulas::regular_metrics;
use reduced_polygons::polygon::{
    build_regular, circumcap, diameter, perimeter, reduced_check, thickness, PolygonDoc,
    SphericalPolygon,
};
use reduced_polygons::sampler::{sample_batch, SampleResult, SamplerConfig};
use reduced_polygons::verify::{
    check_regular_monotonicity, check_regular_perimeter_ratio, check_scalar_lemmas, full_suite,
    lemma_series, polygon_reports, regular_perimeter_series, reports_to_csv, reproduce_table1,
    round_sig, SuiteOutcome, VerificationReport, DEFAULT_K_MAX,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::thickness::parse_thickness;
use crate::{Command, Format};

const DIGITS: usize = 9;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

type CliResult = Result<ExitCode, CliError>;

fn verdict(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Regular { n, thickness, out } => regular(n, &thickness, out.as_deref()),
        Command::Metrics { input } => metrics(&input),
        Command::Verify { input, tol, format } => verify(&input, tol, format.format),
        Command::Table1 { format } => table1(format.format),
        Command::Lemmas {
            grid,
            lambdas,
            series_dir,
            format,
        } => lemmas(grid, &lambdas, series_dir.as_deref(), format.format),
        Command::Sample {
            n,
            thickness,
            count,
            seed,
            report,
            format,
        } => sample(n, &thickness, count, seed, report.as_deref(), format.format),
        Command::Suite {
            inputs,
            samples,
            seed,
            report,
            format,
        } => suite(&inputs, samples, seed, report.as_deref(), format.format),
    }
}

/// Rounds every float in `value` to [`DIGITS`] significant digits.
fn rounded(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            json!(round_sig(n.as_f64().expect("checked float"), DIGITS))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect())
        }
        other => other,
    }
}

fn to_json<T: Serialize>(data: &T) -> String {
    let value = serde_json::to_value(data).expect("output types serialize");
    serde_json::to_string_pretty(&rounded(value)).expect("values serialize") + "\n"
}

fn print_json<T: Serialize>(data: &T) {
    print!("{}", to_json(data));
}

fn rounded_reports(reports: &[VerificationReport]) -> Vec<VerificationReport> {
    reports.iter().map(|r| r.rounded(DIGITS)).collect()
}

fn csv_of<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n < 3 {
        Err(CliError::Usage(format!("n must be at least 3, got {n}")))
    } else if n.is_multiple_of(2) {
        Err(CliError::Usage(format!("n must be odd, got {n}")))
    } else {
        Ok(())
    }
}

fn thickness_arg(text: &str) -> Result<f64, CliError> {
    parse_thickness(text).map_err(CliError::Usage)
}

fn load(path: &Path) -> Result<(PolygonDoc, SphericalPolygon), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let doc = PolygonDoc::parse(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let poly = doc
        .to_polygon()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((doc, poly))
}

fn regular(n: usize, text: &str, out: Option<&Path>) -> CliResult {
    check_n(n)?;
    let omega = thickness_arg(text)?;
    let m = regular_metrics(n, omega).map_err(|e| CliError::Failure(e.to_string()))?;
    let poly = build_regular(n, omega).map_err(|e| CliError::Failure(e.to_string()))?;
    let doc = PolygonDoc::from_polygon(
        &poly,
        Some(omega),
        Some(format!("regular n={n} thickness={text}")),
    );
    if let Some(path) = out {
        write_file(path, &doc.to_json())?;
    }
    let mut summary = json!({
        "n": n,
        "thickness": omega,
        "side": m.side,
        "perimeter": m.perimeter,
        "inradius": m.inradius,
        "circumradius": m.circumradius,
        "diameter": m.diameter,
    });
    if out.is_none() {
        summary["vertices"] = json!(doc.vertices);
    }
    print_json(&summary);
    Ok(ExitCode::SUCCESS)
}

fn metrics(path: &Path) -> CliResult {
    let (doc, poly) = load(path)?;
    let cap = circumcap(&poly).map_err(|e| CliError::Failure(e.to_string()))?;
    print_json(&json!({
        "n": poly.len(),
        "label": doc.label,
        "thickness": thickness(&poly),
        "perimeter": perimeter(&poly),
        "diameter": diameter(&poly, false),
        "circumradius": cap.radius,
        "circumcenter": cap.center.to_array(),
        "side_lengths": poly.side_lengths(),
        "interior_angles": poly.interior_angles(),
        "regular": poly.is_regular(reduced_polygons::verify::REGULARITY_TOL),
    }));
    Ok(ExitCode::SUCCESS)
}

fn verify(path: &Path, tol: f64, format: Format) -> CliResult {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    let (doc, poly) = load(path)?;
    let witness = reduced_check(&poly, tol).map_err(|e| CliError::Failure(e.to_string()))?;
    let omega = doc.thickness_hint.unwrap_or(witness.thickness);
    let sample = SampleResult::from_polygon(poly, omega);
    let reports = if witness.is_reduced {
        polygon_reports(&sample, tol).unwrap_or_default()
    } else {
        Vec::new()
    };
    let passed = witness.is_reduced && !reports.is_empty() && reports.iter().all(|r| r.passed);
    let summary = json!({
        "n": sample.n,
        "is_reduced": witness.is_reduced,
        "reason": witness.reason,
        "thickness": witness.thickness,
        "max_residual": witness.max_residual,
        "alpha": witness.records.iter().map(|r| r.alpha).collect::<Vec<_>>(),
        "beta": witness.records.iter().map(|r| r.beta).collect::<Vec<_>>(),
        "phi": witness.records.iter().map(|r| r.phi).collect::<Vec<_>>(),
    });
    match format {
        Format::Json => print_json(&json!({
            "witness": summary,
            "reports": rounded_reports(&reports),
            "passed": passed,
        })),
        Format::Csv => {
            eprint!("{}", to_json(&summary));
            print!("{}", reports_to_csv(&rounded_reports(&reports)));
        }
    }
    if let Some(reason) = &witness.reason {
        eprintln!("not reduced: {reason}");
    }
    Ok(verdict(passed))
}

fn table1(format: Format) -> CliResult {
    let rows: Vec<_> = reproduce_table1()
        .into_iter()
        .map(|mut r| {
            r.omega = round_sig(r.omega, DIGITS);
            r.radius = round_sig(r.radius, DIGITS);
            r
        })
        .collect();
    match format {
        Format::Json => print_json(&rows),
        Format::Csv => print!("{}", csv_of(&rows)),
    }
    Ok(verdict(rows.iter().all(|r| r.passed)))
}

#[derive(Serialize)]
struct PerimeterRow {
    k: usize,
    perimeter: f64,
}

fn lemmas(grid: usize, lambdas: &[f64], series_dir: Option<&Path>, format: Format) -> CliResult {
    if grid < 100 {
        return Err(CliError::Usage(format!(
            "grid must be at least 100, got {grid}"
        )));
    }
    if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(CliError::Usage("lambdas must be positive numbers".into()));
    }
    let mut reports = check_scalar_lemmas(lambdas, grid);
    for &lambda in lambdas {
        let omega = lambda.atan();
        reports.push(check_regular_monotonicity(omega, DEFAULT_K_MAX));
        reports.extend(check_regular_perimeter_ratio(omega, DEFAULT_K_MAX));
    }
    let mut files = Vec::new();
    if let Some(dir) = series_dir {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        for &lambda in lambdas {
            let series =
                lemma_series(lambda, grid).map_err(|e| CliError::Failure(e.to_string()))?;
            let rows = series.into_iter().map(|mut r| {
                r.x = round_sig(r.x, DIGITS);
                r.f1_over_f2 = round_sig(r.f1_over_f2, DIGITS);
                r.big_f = round_sig(r.big_f, DIGITS);
                r.d_f = r.d_f.map(|v| round_sig(v, DIGITS));
                r.d2_f = r.d2_f.map(|v| round_sig(v, DIGITS));
                r
            });
            let path = dir.join(format!("lemmas_lambda_{lambda}.csv"));
            write_file(&path, &csv_of(rows))?;
            files.push(path);

            let perims = regular_perimeter_series(lambda.atan(), DEFAULT_K_MAX)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            let path = dir.join(format!("perimeter_lambda_{lambda}.csv"));
            write_file(
                &path,
                &csv_of(perims.into_iter().map(|(k, p)| PerimeterRow {
                    k,
                    perimeter: round_sig(p, DIGITS),
                })),
            )?;
            files.push(path);
        }
    }
    let passed = reports.iter().all(|r| r.passed);
    match format {
        Format::Json => print_json(&json!({
            "reports": rounded_reports(&reports),
            "series": files,
            "passed": passed,
        })),
        Format::Csv => print!("{}", reports_to_csv(&rounded_reports(&reports))),
    }
    Ok(verdict(passed))
}

fn claim_extreme(
    reports: &[VerificationReport],
    id: &str,
    pick: fn(f64, f64) -> f64,
    sign: f64,
) -> Option<f64> {
    reports
        .iter()
        // reports that could not be evaluated carry a zero tolerance
        .filter(|r| r.claim_id == id && r.tolerance > 0.0)
        .map(|r| sign * r.residual)
        .reduce(pick)
}

fn outcome_summary(outcome: &SuiteOutcome, samples: &[SampleResult]) -> Value {
    let mut per_claim: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in &outcome.reports {
        let e = per_claim.entry(r.claim_id.as_str()).or_default();
        e.0 += 1;
        e.1 += usize::from(!r.passed);
    }
    let failures: Vec<Value> = outcome
        .failures()
        .map(|r| json!({"claim_id": r.claim_id, "inputs": r.inputs, "residual": r.residual}))
        .collect();
    json!({
        "samples": samples.len(),
        "converged": samples.iter().filter(|s| s.converged()).count(),
        "excluded": outcome.excluded.len(),
        "reports": outcome.reports.len(),
        "failed": failures.len(),
        "min_perimeter_slack": claim_extreme(&outcome.reports, "thm-regular-min-perim", f64::min, 1.0),
        "max_diameter_slack": claim_extreme(&outcome.reports, "thm-diameter", f64::max, -1.0),
        "claims": per_claim
            .into_iter()
            .map(|(id, (checked, failed))| (id.to_string(), json!({"checked": checked, "failed": failed})))
            .collect::<serde_json::Map<_, _>>(),
        "failures": failures,
        "passed": outcome.all_passed(),
    })
}

fn write_report(
    path: &Path,
    format: Format,
    outcome: &SuiteOutcome,
    config: Value,
) -> Result<(), CliError> {
    let reports = rounded_reports(&outcome.reports);
    let text = match format {
        Format::Json => to_json(&json!({
            "config": config,
            "reports": reports,
            "excluded": outcome.excluded,
        })),
        Format::Csv => reports_to_csv(&reports),
    };
    write_file(path, &text)
}

fn announce_failures(outcome: &SuiteOutcome) {
    for r in outcome.failures() {
        eprintln!(
            "CLAIM FAILED: {} [{}] measured={} bound={} residual={}",
            r.claim_id, r.inputs, r.measured, r.bound, r.residual
        );
    }
}

fn emit_summary(summary: &Value, format: Format) {
    match format {
        Format::Json => print_json(summary),
        Format::Csv => eprint!("{}", to_json(summary)),
    }
}

fn sample(
    n: usize,
    text: &str,
    count: usize,
    seed: u64,
    report: Option<&Path>,
    format: Format,
) -> CliResult {
    check_n(n)?;
    let omega = thickness_arg(text)?;
    if count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let cfg = SamplerConfig::new(n, omega, seed);
    let samples = sample_batch(&cfg, count).map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = full_suite(&samples);
    let config = json!({"n": n, "thickness": omega, "count": count, "seed": seed});
    if let Some(path) = report {
        write_report(path, format, &outcome, config.clone())?;
    }
    let mut summary = outcome_summary(&outcome, &samples);
    summary["config"] = config;
    emit_summary(&summary, format);
    if format == Format::Csv && report.is_none() {
        print!("{}", reports_to_csv(&rounded_reports(&outcome.reports)));
    }
    announce_failures(&outcome);
    Ok(verdict(outcome.all_passed()))
}

fn suite(
    inputs: &[PathBuf],
    per_config: usize,
    seed: u64,
    report: Option<&Path>,
    format: Format,
) -> CliResult {
    const GRID: [f64; 4] = [PI / 8.0, PI / 6.0, PI / 4.0, PI / 3.0];
    let mut samples = Vec::new();
    for n in [3, 5, 7, 9, 21] {
        for &w in &GRID {
            let poly = build_regular(n, w).map_err(|e| CliError::Failure(e.to_string()))?;
            samples.push(SampleResult::from_polygon(poly, w));
        }
    }
    if per_config > 0 {
        let mut base = seed;
        for n in [5, 7] {
            for &w in &GRID[1..] {
                let cfg = SamplerConfig::new(n, w, base);
                samples.extend(
                    sample_batch(&cfg, per_config).map_err(|e| CliError::Usage(e.to_string()))?,
                );
                base = base.wrapping_add(per_config as u64);
            }
        }
    }
    for path in inputs {
        let (doc, poly) = load(path)?;
        let omega = doc.thickness_hint.unwrap_or_else(|| thickness(&poly));
        samples.push(SampleResult::from_polygon(poly, omega));
    }
    let outcome = full_suite(&samples);
    let config = json!({"samples_per_config": per_config, "seed": seed, "inputs": inputs});
    if let Some(path) = report {
        write_report(path, format, &outcome, config.clone())?;
    }
    let mut summary = outcome_summary(&outcome, &samples);
    summary["config"] = config;
    emit_summary(&summary, format);
    if format == Format::Csv && report.is_none() {
        print!("{}", reports_to_csv(&rounded_reports(&outcome.reports)));
    }
    announce_failures(&outcome);
    Ok(verdict(outcome.all_passed()))
}
