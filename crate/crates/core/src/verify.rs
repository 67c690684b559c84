//! Claim-level checks that turn polygon measurements and closed-form bounds
//! into pass/fail reports.
//!
//! Every report carries a stable `claim_id` (listed in the README). Checks on
//! polygons only run on polygons that pass [`reduced_check`]; anything else is
//! excluded from the suite with a recorded reason.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formulas::{
    diameter_bound_new, diameter_bound_old, f1, f2, g_of, gamma_of, regular_metrics,
    triangle_circumradius_bound, x_max, F_of,
};
use crate::polygon::{
    circumcap, diameter, perimeter, reduced_check, structural_measures, thickness, ReducedWitness,
    SphericalPolygon, StructuralMeasures,
};
use crate::sampler::SampleResult;

/// Formula-versus-formula identities.
pub const FORMULA_TOL: f64 = 1e-8;
/// Geometry produced by the sampler.
pub const SAMPLED_TOL: f64 = 1e-7;
/// The printed table carries six decimals.
pub const TABLE1_TOL: f64 = 1e-5;
/// `|measured − bound|` at or below this marks an equality case.
pub const EQUALITY_TOL: f64 = 1e-8;
/// Side and angle spread at or below which a polygon counts as regular.
pub const REGULARITY_TOL: f64 = 1e-6;
/// Minimal excess of the angle sum `Σφ_i` over `π` for non-regular polygons.
pub const PHI_EXCESS_MARGIN: f64 = 1e-9;
/// Minimal decrease between consecutive regular perimeters.
pub const MONOTONE_MARGIN: f64 = 1e-10;
/// Minimal gap between the old and the sharp diameter bound.
pub const OLD_BOUND_GAP: f64 = 1e-6;

pub const TABLE1_THICKNESS: [(f64, &str); 4] = [
    (PI / 8.0, "pi/8"),
    (PI / 6.0, "pi/6"),
    (PI / 4.0, "pi/4"),
    (PI / 3.0, "pi/3"),
];
pub const TABLE1_PRINTED: [f64; 4] = [0.260304, 0.345523, 0.511669, 0.670020];
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.3, 0.5, 1.0, 2.0, 5.0];
pub const DEFAULT_GRID_POINTS: usize = 1000;
pub const DEFAULT_K_MAX: usize = 51;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub inputs: String,
    pub measured: f64,
    pub bound: f64,
    /// Signed slack in the claim's direction; negative beyond `tolerance`
    /// means failure. For equalities it is `measured − bound`.
    pub residual: f64,
    pub passed: bool,
    pub tolerance: f64,
}

/// Direction of a claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    /// `measured ≤ bound + tol`
    AtMost,
    /// `measured ≥ bound − tol`
    AtLeast,
    /// `|measured − bound| ≤ tol`
    Equal,
    /// `measured > bound`
    Above,
    /// `measured < bound`
    Below,
}

impl VerificationReport {
    pub fn new(
        claim_id: &str,
        inputs: impl Into<String>,
        relation: Relation,
        measured: f64,
        bound: f64,
        tolerance: f64,
    ) -> Self {
        let (residual, passed) = match relation {
            Relation::AtMost => (bound - measured, bound - measured >= -tolerance),
            Relation::AtLeast => (measured - bound, measured - bound >= -tolerance),
            Relation::Equal => (measured - bound, (measured - bound).abs() <= tolerance),
            Relation::Above => (measured - bound, measured > bound),
            Relation::Below => (bound - measured, measured < bound),
        };
        VerificationReport {
            claim_id: claim_id.to_string(),
            inputs: inputs.into(),
            measured,
            bound,
            residual,
            passed: passed && measured.is_finite() && bound.is_finite(),
            tolerance,
        }
    }

    fn failed(claim_id: &str, inputs: impl Into<String>, why: &str) -> Self {
        VerificationReport {
            claim_id: claim_id.to_string(),
            inputs: format!("{}; {why}", inputs.into()),
            measured: 0.0,
            bound: 0.0,
            residual: 0.0,
            passed: false,
            tolerance: 0.0,
        }
    }

    pub fn is_equality(&self) -> bool {
        (self.measured - self.bound).abs() <= EQUALITY_TOL
    }

    /// Copy with every number rounded to `digits` significant digits.
    pub fn rounded(&self, digits: usize) -> Self {
        VerificationReport {
            measured: round_sig(self.measured, digits),
            bound: round_sig(self.bound, digits),
            residual: round_sig(self.residual, digits),
            tolerance: round_sig(self.tolerance, digits),
            ..self.clone()
        }
    }
}

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("plain data serializes")
}

pub fn write_reports_csv<W: io::Write>(reports: &[VerificationReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn reports_to_csv(reports: &[VerificationReport]) -> String {
    let mut buf = Vec::new();
    write_reports_csv(reports, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

fn describe(sample: &SampleResult, regular: bool) -> String {
    format!(
        "n={} omega={} seed={}{}",
        sample.n,
        round_sig(sample.omega, 9),
        sample.seed,
        if regular { " regular" } else { "" }
    )
}

fn reduced_parts(
    sample: &SampleResult,
) -> std::result::Result<(&SphericalPolygon, ReducedWitness), String> {
    reduced_parts_at(sample, SAMPLED_TOL)
}

/// Polygon and witness of a sample that passes the reducedness criterion.
fn reduced_parts_at(
    sample: &SampleResult,
    tol: f64,
) -> std::result::Result<(&SphericalPolygon, ReducedWitness), String> {
    if !sample.converged() {
        return Err(format!("sample not usable: {:?}", sample.status));
    }
    let poly = sample.polygon.as_ref().ok_or("sample carries no polygon")?;
    let witness = reduced_check(poly, tol).map_err(|e| e.to_string())?;
    if !witness.is_reduced {
        return Err(format!(
            "failed reduced_check: {}",
            witness.reason.as_deref().unwrap_or("unknown")
        ));
    }
    Ok((poly, witness))
}

fn lambda_of(w: &ReducedWitness) -> f64 {
    w.thickness.tan()
}

/// Perimeter is at least that of the regular `n`-gon of the same thickness.
pub fn check_perimeter_min(sample: &SampleResult) -> VerificationReport {
    const ID: &str = "thm-regular-min-perim";
    let (poly, w) = match reduced_parts(sample) {
        Ok(parts) => parts,
        Err(why) => return VerificationReport::failed(ID, describe(sample, false), &why),
    };
    let n = poly.len();
    let bound = F_of(PI / n as f64, lambda_of(&w)).map(|f| 2.0 * n as f64 * f);
    match bound {
        Ok(bound) => VerificationReport::new(
            ID,
            describe(sample, poly.is_regular(REGULARITY_TOL)),
            Relation::AtLeast,
            perimeter(poly),
            bound,
            FORMULA_TOL,
        ),
        Err(e) => VerificationReport::failed(ID, describe(sample, false), &e.to_string()),
    }
}

/// Convexity step of the minimal-perimeter argument:
/// `2 Σ F(φ_i) ≥ 2n F(mean φ)`.
pub fn check_jensen_step(sample: &SampleResult) -> VerificationReport {
    const ID: &str = "jensen-step";
    let (poly, w) = match reduced_parts(sample) {
        Ok(parts) => parts,
        Err(why) => return VerificationReport::failed(ID, describe(sample, false), &why),
    };
    let lambda = lambda_of(&w);
    let phis = w.phis().expect("reduced witness has every angle");
    let n = phis.len() as f64;
    let mean = phis.iter().sum::<f64>() / n;
    let lhs: Result<f64> = phis.iter().map(|&p| F_of(p, lambda)).sum();
    match (lhs, F_of(mean, lambda)) {
        (Ok(lhs), Ok(f_mean)) => VerificationReport::new(
            ID,
            describe(sample, poly.is_regular(REGULARITY_TOL)),
            Relation::AtLeast,
            2.0 * lhs,
            2.0 * n * f_mean,
            1e-9,
        ),
        (Err(e), _) | (_, Err(e)) => {
            VerificationReport::failed(ID, describe(sample, false), &e.to_string())
        }
    }
}

/// Diameter never exceeds the side of the regular triangle of equal thickness.
/// The gap to the older bound is recorded in `inputs`.
pub fn check_diameter(sample: &SampleResult) -> VerificationReport {
    const ID: &str = "thm-diameter";
    let (poly, w) = match reduced_parts(sample) {
        Ok(parts) => parts,
        Err(why) => return VerificationReport::failed(ID, describe(sample, false), &why),
    };
    let (Ok(new), Ok(old)) = (
        diameter_bound_new(w.thickness),
        diameter_bound_old(w.thickness),
    ) else {
        return VerificationReport::failed(ID, describe(sample, false), "thickness out of range");
    };
    VerificationReport::new(
        ID,
        format!(
            "{} old_bound_slack={}",
            describe(sample, poly.is_regular(REGULARITY_TOL)),
            round_sig(old - new, 9)
        ),
        Relation::AtMost,
        diameter(poly, false),
        new,
        FORMULA_TOL,
    )
}

/// The smallest enclosing cap is no larger than the regular triangle's, and
/// the diameter/circumradius relation holds. `passed` requires both.
pub fn check_circumradius(sample: &SampleResult) -> VerificationReport {
    const ID: &str = "thm-cover-disk";
    let (poly, w) = match reduced_parts(sample) {
        Ok(parts) => parts,
        Err(why) => return VerificationReport::failed(ID, describe(sample, false), &why),
    };
    let (Ok(bound), Ok(cap)) = (triangle_circumradius_bound(w.thickness), circumcap(poly)) else {
        return VerificationReport::failed(ID, describe(sample, false), "no enclosing cap");
    };
    let jung = jung_slack(poly, cap.radius);
    let mut report = VerificationReport::new(
        ID,
        format!(
            "{} jung_slack={}",
            describe(sample, poly.is_regular(REGULARITY_TOL)),
            round_sig(jung, 9)
        ),
        Relation::AtMost,
        cap.radius,
        bound,
        SAMPLED_TOL,
    );
    report.passed &= jung >= -FORMULA_TOL;
    report
}

fn jung_lower_bound(radius: f64) -> f64 {
    2.0 * (3f64.sqrt() / 2.0 * radius.sin()).clamp(-1.0, 1.0).asin()
}

fn jung_slack(poly: &SphericalPolygon, radius: f64) -> f64 {
    diameter(poly, false) - jung_lower_bound(radius)
}

/// Diameter is at least `2 arcsin((√3/2) sin r)` for circumradius `r`.
pub fn check_jung_step(sample: &SampleResult) -> VerificationReport {
    const ID: &str = "lem-jung";
    let (poly, _) = match reduced_parts(sample) {
        Ok(parts) => parts,
        Err(why) => return VerificationReport::failed(ID, describe(sample, false), &why),
    };
    match circumcap(poly) {
        Ok(cap) => VerificationReport::new(
            ID,
            describe(sample, poly.is_regular(REGULARITY_TOL)),
            Relation::AtLeast,
            diameter(poly, false),
            jung_lower_bound(cap.radius),
            FORMULA_TOL,
        ),
        Err(e) => VerificationReport::failed(ID, describe(sample, false), &e.to_string()),
    }
}

/// All polygon-level checks for one reduced polygon.
fn polygon_checks(
    sample: &SampleResult,
    poly: &SphericalPolygon,
    w: &ReducedWitness,
) -> Vec<VerificationReport> {
    let regular = poly.is_regular(REGULARITY_TOL);
    let inputs = describe(sample, regular);
    let n = poly.len();
    let mut out = vec![
        VerificationReport::new(
            "reduced-check",
            inputs.clone(),
            Relation::AtMost,
            w.max_residual,
            0.0,
            SAMPLED_TOL,
        ),
        VerificationReport::new(
            "thickness-target",
            inputs.clone(),
            Relation::Equal,
            w.thickness,
            sample.omega,
            SAMPLED_TOL,
        ),
        VerificationReport::new(
            "thickness-lune",
            inputs.clone(),
            Relation::Equal,
            thickness(poly),
            w.thickness,
            SAMPLED_TOL,
        ),
        VerificationReport::new(
            "lem-thickness-half-pi",
            inputs.clone(),
            Relation::AtMost,
            w.thickness,
            FRAC_PI_2,
            0.0,
        ),
        VerificationReport::new(
            "prop-diameter-pairs",
            inputs.clone(),
            Relation::Equal,
            diameter(poly, true),
            diameter(poly, false),
            1e-12,
        ),
        check_perimeter_min(sample),
        check_jensen_step(sample),
        check_diameter(sample),
        check_circumradius(sample),
        check_jung_step(sample),
    ];

    let m: StructuralMeasures = match structural_measures(poly, w) {
        Ok(m) => m,
        Err(e) => {
            out.push(VerificationReport::failed(
                "structural",
                inputs,
                &e.to_string(),
            ));
            return out;
        }
    };
    let gamma = gamma_of(w.thickness).unwrap_or(f64::NAN);
    out.extend([
        VerificationReport::new(
            "lem-peri",
            inputs.clone(),
            Relation::Equal,
            perimeter(poly),
            m.witness_perimeter,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "cor-boundary-arc",
            inputs.clone(),
            Relation::AtMost,
            m.boundary_arc_residual,
            0.0,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "lem-congruent-triangles",
            inputs.clone(),
            Relation::AtMost,
            m.congruence_residual,
            0.0,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "cor-beta-le-alpha",
            inputs.clone(),
            Relation::AtMost,
            m.max_beta_minus_alpha,
            0.0,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "lem-relation-beta",
            inputs.clone(),
            Relation::AtMost,
            m.max_beta,
            gamma,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "lem-relation-alpha",
            inputs.clone(),
            Relation::AtLeast,
            m.min_alpha,
            gamma,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "lem-phi-sum",
            inputs.clone(),
            Relation::AtLeast,
            m.phi_sum,
            PI,
            FORMULA_TOL,
        ),
        VerificationReport::new(
            "fact-phi-positive",
            inputs.clone(),
            Relation::Above,
            m.min_phi,
            0.0,
            0.0,
        ),
        VerificationReport::new(
            "fact-phi-below-half-pi",
            inputs.clone(),
            Relation::Below,
            m.max_phi,
            FRAC_PI_2,
            0.0,
        ),
    ]);
    if regular {
        out.push(VerificationReport::new(
            "lem-phi-sum-regular",
            inputs.clone(),
            Relation::Equal,
            m.phi_sum,
            PI,
            1e-9,
        ));
        let phi_spread = (m.max_phi - PI / n as f64)
            .abs()
            .max((m.min_phi - PI / n as f64).abs());
        out.push(VerificationReport::new(
            "lem-phi-regular-each",
            inputs.clone(),
            Relation::AtMost,
            phi_spread,
            0.0,
            1e-9,
        ));
        if n == 3 {
            let spread = (m.max_beta - gamma).abs().max((m.min_alpha - gamma).abs());
            out.push(VerificationReport::new(
                "lem-relation-triangle-equality",
                inputs.clone(),
                Relation::AtMost,
                spread,
                0.0,
                1e-9,
            ));
        }
    } else {
        out.push(VerificationReport::new(
            "lem-phi-sum-strict",
            inputs.clone(),
            Relation::Above,
            m.phi_sum - PI,
            PHI_EXCESS_MARGIN,
            0.0,
        ));
        out.push(VerificationReport::new(
            "lem-relation-alpha-strict",
            inputs,
            Relation::Above,
            m.min_alpha - gamma,
            0.0,
            0.0,
        ));
    }
    out
}

/// Every polygon-level claim for one sample, or the reason it is not a
/// reduced polygon at tolerance `tol`.
pub fn polygon_reports(
    sample: &SampleResult,
    tol: f64,
) -> std::result::Result<Vec<VerificationReport>, String> {
    let (poly, w) = reduced_parts_at(sample, tol)?;
    Ok(polygon_checks(sample, poly, &w))
}

/// One row of the covering-radius table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub omega: f64,
    pub radius: f64,
    pub paper_value: f64,
    pub passed: bool,
}

pub fn reproduce_table1() -> Vec<Table1Row> {
    TABLE1_THICKNESS
        .iter()
        .zip(TABLE1_PRINTED)
        .map(|(&(omega, _), printed)| {
            let radius = triangle_circumradius_bound(omega).expect("grid inside the domain");
            Table1Row {
                omega,
                radius,
                paper_value: printed,
                passed: (radius - printed).abs() <= TABLE1_TOL,
            }
        })
        .collect()
}

pub fn check_table1() -> Vec<VerificationReport> {
    reproduce_table1()
        .iter()
        .zip(TABLE1_THICKNESS)
        .map(|(row, (_, label))| {
            VerificationReport::new(
                "table1",
                format!("omega={label}"),
                Relation::Equal,
                row.radius,
                row.paper_value,
                TABLE1_TOL,
            )
        })
        .collect()
}

/// Regular perimeters for `k = 3, 5, …, k_max`.
pub fn regular_perimeter_series(omega: f64, k_max: usize) -> Result<Vec<(usize, f64)>> {
    (3..=k_max)
        .step_by(2)
        .map(|k| regular_metrics(k, omega).map(|m| (k, m.perimeter)))
        .collect()
}

/// Regular perimeters strictly decrease in `k`, each step by more than
/// [`MONOTONE_MARGIN`].
pub fn check_regular_monotonicity(omega: f64, k_max: usize) -> VerificationReport {
    const ID: &str = "thm-perim-monotone";
    let inputs = format!("omega={} k_max={k_max}", round_sig(omega, 9));
    match regular_perimeter_series(omega, k_max) {
        Ok(series) if series.len() >= 2 => {
            let min_drop = series
                .windows(2)
                .map(|w| w[0].1 - w[1].1)
                .fold(f64::INFINITY, f64::min);
            VerificationReport::new(ID, inputs, Relation::Above, min_drop, MONOTONE_MARGIN, 0.0)
        }
        Ok(_) => VerificationReport::failed(ID, inputs, "k_max must be at least 5"),
        Err(e) => VerificationReport::failed(ID, inputs, &e.to_string()),
    }
}

/// The same monotonicity through `perim = 2π f1(y)/f2(y)` with `y = g(π/k)`:
/// the two perimeter expressions agree, `y` increases with `k`, and every
/// perimeter stays above the `y → x_max` limit `2π sin(ω/2)`.
pub fn check_regular_perimeter_ratio(omega: f64, k_max: usize) -> Vec<VerificationReport> {
    let inputs = format!("omega={} k_max={k_max}", round_sig(omega, 9));
    let lambda = omega.tan();
    let rows: Result<Vec<(f64, f64, f64)>> = (3..=k_max)
        .step_by(2)
        .map(|k| {
            let m = regular_metrics(k, omega)?;
            let ratio = 2.0 * PI * f1(m.y, lambda)? / f2(m.y, lambda)?;
            Ok((m.y, m.perimeter, ratio))
        })
        .collect();
    let rows = match rows {
        Ok(r) if r.len() >= 2 => r,
        Ok(_) => {
            return vec![VerificationReport::failed(
                "eq-reg-perim",
                inputs,
                "k_max must be at least 5",
            )]
        }
        Err(e) => {
            return vec![VerificationReport::failed(
                "eq-reg-perim",
                inputs,
                &e.to_string(),
            )]
        }
    };
    let max_gap = rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max);
    let min_y_rise = rows
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .fold(f64::INFINITY, f64::min);
    let limit = 2.0 * PI * (omega / 2.0).sin();
    let smallest = rows.last().expect("non-empty").1;
    debug_assert!((x_max(lambda) - (omega / 2.0).tan()).abs() < 1e-12);
    vec![
        VerificationReport::new(
            "eq-reg-perim",
            inputs.clone(),
            Relation::AtMost,
            max_gap,
            0.0,
            1e-10,
        ),
        VerificationReport::new(
            "thm-perim-y-increasing",
            inputs.clone(),
            Relation::Above,
            min_y_rise,
            0.0,
            0.0,
        ),
        VerificationReport::new(
            "thm-perim-limit",
            inputs,
            Relation::Above,
            smallest,
            limit,
            0.0,
        ),
    ]
}

/// Grid coordinate `t_i = i/(points+1)`, `i = 1..=points`, shared by the
/// `x ∈ (0, x_max)` and `φ ∈ (0, π/2)` grids.
fn grid(points: usize) -> impl Iterator<Item = f64> {
    (1..=points).map(move |i| i as f64 / (points + 1) as f64)
}

/// Plot row for the scalar lemmas: `f1/f2` at `t·x_max(λ)` and `F` with its
/// forward differences at `t·π/2`. Differences are empty past the grid end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSeriesRow {
    pub x: f64,
    pub f1_over_f2: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    #[serde(rename = "dF")]
    pub d_f: Option<f64>,
    #[serde(rename = "d2F")]
    pub d2_f: Option<f64>,
}

pub fn lemma_series(lambda: f64, points: usize) -> Result<Vec<LemmaSeriesRow>> {
    let xm = x_max(lambda);
    let ratio: Vec<f64> = grid(points)
        .map(|t| Ok(f1(t * xm, lambda)? / f2(t * xm, lambda)?))
        .collect::<Result<_>>()?;
    let big_f: Vec<f64> = grid(points)
        .map(|t| F_of(t * FRAC_PI_2, lambda))
        .collect::<Result<_>>()?;
    Ok(grid(points)
        .enumerate()
        .map(|(i, t)| LemmaSeriesRow {
            x: t,
            f1_over_f2: ratio[i],
            big_f: big_f[i],
            d_f: big_f.get(i + 1).map(|next| next - big_f[i]),
            d2_f: big_f
                .get(i + 2)
                .map(|next2| next2 - 2.0 * big_f[i + 1] + big_f[i]),
        })
        .collect())
}

/// Sign checks on finite differences: `f1/f2` strictly decreasing, `F`
/// strictly increasing and strictly convex.
pub fn check_scalar_lemmas(lambdas: &[f64], points: usize) -> Vec<VerificationReport> {
    let mut out = Vec::new();
    for &lambda in lambdas {
        let inputs = format!("lambda={} points={points}", round_sig(lambda, 9));
        if points < 100 {
            out.push(VerificationReport::failed(
                "lem-dec-func",
                inputs,
                "grid needs at least 100 points",
            ));
            continue;
        }
        let series = match lemma_series(lambda, points) {
            Ok(s) => s,
            Err(e) => {
                out.push(VerificationReport::failed(
                    "lem-dec-func",
                    inputs,
                    &e.to_string(),
                ));
                continue;
            }
        };
        let max_ratio_step = series
            .windows(2)
            .map(|w| w[1].f1_over_f2 - w[0].f1_over_f2)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_d = series
            .iter()
            .filter_map(|r| r.d_f)
            .fold(f64::INFINITY, f64::min);
        let min_d2 = series
            .iter()
            .filter_map(|r| r.d2_f)
            .fold(f64::INFINITY, f64::min);
        out.push(VerificationReport::new(
            "lem-dec-func",
            inputs.clone(),
            Relation::Below,
            max_ratio_step,
            0.0,
            0.0,
        ));
        out.push(VerificationReport::new(
            "lem-F-increasing",
            inputs.clone(),
            Relation::Above,
            min_d,
            0.0,
            0.0,
        ));
        out.push(VerificationReport::new(
            "lem-F-convex",
            inputs,
            Relation::Above,
            min_d2,
            0.0,
            0.0,
        ));
    }
    out
}

/// The sharp diameter bound sits strictly below the old one, by more than
/// [`OLD_BOUND_GAP`].
pub fn check_old_bound_gap(omega: f64) -> VerificationReport {
    const ID: &str = "prop-old-bound-gap";
    let inputs = format!("omega={}", round_sig(omega, 9));
    match (diameter_bound_old(omega), diameter_bound_new(omega)) {
        (Ok(old), Ok(new)) => {
            VerificationReport::new(ID, inputs, Relation::Above, old - new, OLD_BOUND_GAP, 0.0)
        }
        (Err(e), _) | (_, Err(e)) => VerificationReport::failed(ID, inputs, &e.to_string()),
    }
}

/// Checks that need no polygons.
pub fn formula_checks() -> Vec<VerificationReport> {
    let mut out = check_table1();
    for &(omega, _) in &TABLE1_THICKNESS {
        out.push(check_regular_monotonicity(omega, DEFAULT_K_MAX));
        out.extend(check_regular_perimeter_ratio(omega, DEFAULT_K_MAX));
        out.push(check_old_bound_gap(omega));
    }
    out.push(VerificationReport::new(
        "prop-old-bound-half-pi",
        "omega=pi/2",
        Relation::Equal,
        diameter_bound_old(FRAC_PI_2).expect("pi/2 is in the closed domain"),
        FRAC_PI_2,
        1e-12,
    ));
    // g really inverts f2 on the grid used by the lemmas
    let worst = DEFAULT_LAMBDAS
        .iter()
        .flat_map(|&l| grid(100).map(move |t| (l, t * FRAC_PI_2)))
        .map(|(l, phi)| {
            g_of(phi, l)
                .and_then(|y| f2(y, l))
                .map_or(f64::INFINITY, |back| (back - phi).abs())
        })
        .fold(0.0, f64::max);
    out.push(VerificationReport::new(
        "g-inverts-f2",
        "grid=100",
        Relation::AtMost,
        worst,
        0.0,
        1e-10,
    ));
    out.extend(check_scalar_lemmas(&DEFAULT_LAMBDAS, DEFAULT_GRID_POINTS));
    out
}

/// A sample left out of the polygon checks, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub index: usize,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub excluded: Vec<Exclusion>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| !r.passed)
    }
}

/// Formula checks followed by the polygon checks for every sample, in input
/// order.
pub fn full_suite(samples: &[SampleResult]) -> SuiteOutcome {
    let per_sample: Vec<std::result::Result<Vec<VerificationReport>, Exclusion>> = samples
        .par_iter()
        .enumerate()
        .map(|(index, sample)| match reduced_parts(sample) {
            Ok((poly, w)) => Ok(polygon_checks(sample, poly, &w)),
            Err(reason) => Err(Exclusion {
                index,
                seed: sample.seed,
                reason,
            }),
        })
        .collect();
    let mut outcome = SuiteOutcome {
        reports: formula_checks(),
        excluded: Vec::new(),
    };
    for r in per_sample {
        match r {
            Ok(reports) => outcome.reports.extend(reports),
            Err(ex) => outcome.excluded.push(ex),
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::build_regular;
    use crate::sampler::{sample_batch, SamplerConfig};
    use std::f64::consts::FRAC_PI_4;

    fn regular(n: usize, omega: f64) -> SampleResult {
        SampleResult::from_polygon(build_regular(n, omega).unwrap(), omega)
    }

    #[test]
    fn relations() {
        let r = VerificationReport::new("x", "", Relation::AtMost, 1.0, 1.0 - 1e-9, 1e-8);
        assert!(r.passed && r.is_equality());
        let r = VerificationReport::new("x", "", Relation::AtLeast, 0.5, 0.6, 1e-8);
        assert!(!r.passed && r.residual < 0.0);
        assert!(!VerificationReport::new("x", "", Relation::Above, 0.0, 0.0, 0.0).passed);
        assert!(VerificationReport::new("x", "", Relation::Below, -1.0, 0.0, 0.0).passed);
        assert!(!VerificationReport::new("x", "", Relation::Equal, f64::NAN, 0.0, 1.0).passed);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.511_669_644_113_828, 9), 0.511_669_644);
        assert_eq!(round_sig(-1.234_567_891_234e-12, 9), -1.234_567_89e-12);
        assert_eq!(round_sig(0.0, 9), 0.0);
    }

    #[test]
    fn table_rows() {
        let rows = reproduce_table1();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.passed));
        assert!((rows[0].radius - 0.260304).abs() < 1e-5);
        assert!((rows[1].radius - 0.345523).abs() < 1e-5);
        assert!((rows[3].radius - 0.670020).abs() < 1e-5);
    }

    #[test]
    fn regular_perimeter_is_the_equality_case() {
        for n in [3, 5, 9] {
            let r = check_perimeter_min(&regular(n, FRAC_PI_4));
            assert!(r.passed && r.residual.abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn sampled_perimeters_exceed_regular() {
        let batch = sample_batch(&SamplerConfig::new(5, FRAC_PI_4, 1000), 100).unwrap();
        for s in batch.iter().filter(|s| s.converged()) {
            let r = check_perimeter_min(s);
            assert!(r.passed && r.residual > 0.0, "{r:?}");
            assert!(check_jensen_step(s).passed);
        }
    }

    #[test]
    fn diameter_reports() {
        for w in [PI / 8.0, PI / 6.0, FRAC_PI_4, PI / 3.0] {
            let tri = check_diameter(&regular(3, w));
            assert!(tri.passed && tri.residual.abs() < 1e-9);
            let pent = check_diameter(&regular(5, w));
            assert!(pent.passed && pent.residual > 1e-6);
            assert!(check_old_bound_gap(w).passed);
        }
    }

    #[test]
    fn circumradius_reports() {
        let tri = check_circumradius(&regular(3, PI / 6.0));
        assert!(tri.passed && tri.residual.abs() < 1e-9);
        let hept = check_circumradius(&regular(7, PI / 6.0));
        assert!(hept.passed && hept.residual > 1e-6);
        let jung = check_jung_step(&regular(3, FRAC_PI_4));
        assert!(jung.passed && jung.residual.abs() < 1e-8);
    }

    #[test]
    fn monotonicity() {
        let r = check_regular_monotonicity(FRAC_PI_4, 51);
        assert!(r.passed && r.measured > MONOTONE_MARGIN);
        assert!(check_regular_perimeter_ratio(FRAC_PI_4, 51)
            .iter()
            .all(|r| r.passed));
        assert!(!check_regular_monotonicity(FRAC_PI_4, 3).passed);
    }

    #[test]
    fn scalar_lemmas() {
        let reports = check_scalar_lemmas(&[1.0, 0.3, 5.0], 1000);
        assert_eq!(reports.len(), 9);
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
        assert!(!check_scalar_lemmas(&[1.0], 50)[0].passed);
        let series = lemma_series(1.0, 100).unwrap();
        assert_eq!(series.len(), 100);
        assert!(series[99].d_f.is_none() && series[98].d2_f.is_none());
    }

    #[test]
    fn suite_without_samples_runs_formula_checks() {
        let out = full_suite(&[]);
        assert!(out.all_passed());
        assert!(out.reports.iter().any(|r| r.claim_id == "table1"));
        assert!(out.reports.iter().any(|r| r.claim_id == "lem-F-convex"));
        assert!(out
            .reports
            .iter()
            .any(|r| r.claim_id == "thm-perim-monotone"));
    }

    #[test]
    fn suite_flags_equalities_on_regular_input() {
        let samples: Vec<_> = [3, 5, 7].iter().map(|&n| regular(n, PI / 3.0)).collect();
        let out = full_suite(&samples);
        assert!(out.all_passed(), "{:?}", out.failures().collect::<Vec<_>>());
        let eq = |id: &str, n: usize| {
            out.reports
                .iter()
                .find(|r| r.claim_id == id && r.inputs.starts_with(&format!("n={n} ")))
                .unwrap()
                .is_equality()
        };
        for n in [3, 5, 7] {
            assert!(eq("thm-regular-min-perim", n));
        }
        assert!(eq("thm-diameter", 3) && eq("thm-cover-disk", 3));
        assert!(!eq("thm-diameter", 5) && !eq("thm-cover-disk", 7));
    }

    #[test]
    fn suite_excludes_corrupted_polygon() {
        let good = regular(5, FRAC_PI_4);
        let mut vs = good.polygon.as_ref().unwrap().vertices().to_vec();
        vs[1] = crate::sphere_core::SpherePoint::from_spherical(
            regular_metrics(5, FRAC_PI_4).unwrap().circumradius + 0.03,
            2.0 * PI / 5.0,
        );
        let bad = SampleResult::from_polygon(SphericalPolygon::new(vs).unwrap(), FRAC_PI_4);
        let out = full_suite(&[good, bad]);
        assert_eq!(out.excluded.len(), 1);
        assert_eq!(out.excluded[0].index, 1);
        assert!(out.excluded[0].reason.contains("reduced_check"));
        assert!(out.all_passed());
    }

    #[test]
    fn csv_and_json_outputs() {
        let reports = check_table1();
        let csv = reports_to_csv(&reports);
        assert!(csv.starts_with("claim_id,inputs,measured,bound,residual,passed,tolerance\n"));
        assert_eq!(csv.lines().count(), 5);
        let back: Vec<VerificationReport> =
            serde_json::from_str(&reports_to_json(&reports)).unwrap();
        assert_eq!(back, reports);
    }
}
