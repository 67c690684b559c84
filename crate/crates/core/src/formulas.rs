//! Scalar closed forms for reduced polygons of thickness `ω ∈ (0, π/2)`.
//!
//! With `λ = tan ω` and `x_max(λ) = (−1 + √(1+λ²))/λ`:
//!
//! * `f1(x) = arccos((1+λx)/√(1+λ²))`, the half side opposite a vertex whose
//!   foot segment has `tan |o t| = x`;
//! * `f2(x) = arccos(x(1+λx)/(λ−x))`, the angle `φ` at `o` for that `x`;
//! * `g = f2⁻¹` and `F = f1 ∘ g`.
//!
//! The arccos forms lose precision near their small-angle end, so `f1` and
//! `f2` are evaluated through `atan2` with the factorization
//! `λ − 2x − λx² = λ (x_max − x)(x + 1/x_max)`, which stays accurate up to
//! the domain boundary. Domain endpoints are errors.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::Serialize;

use crate::error::{domain, Result};

fn check_omega(name: &'static str, omega: f64) -> Result<()> {
    if omega > 0.0 && omega < FRAC_PI_2 {
        Ok(())
    } else {
        Err(domain(name, omega, "(0, pi/2)"))
    }
}

fn check_lambda(name: &'static str, lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(domain(name, lambda, "lambda in (0, inf)"))
    }
}

/// Right end of the `x` domain shared by `f1`, `f2` and the range of `g`.
pub fn x_max(lambda: f64) -> f64 {
    // (−1 + √(1+λ²))/λ without cancellation for small λ
    lambda / (1.0 + (1.0 + lambda * lambda).sqrt())
}

/// `λ − 2x − λx²`, positive exactly on `x < x_max`.
fn gap(x: f64, lambda: f64) -> f64 {
    let xm = x_max(lambda);
    // λ(x_max − x)(x + 1/x_max) expands to λ − 2x − λx²
    (lambda * (xm - x) * (x + 1.0 / xm)).max(0.0)
}

/// Thickness and the derived scalars every closed form is written in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThicknessParams {
    pub omega: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl ThicknessParams {
    pub fn new(omega: f64) -> Result<Self> {
        check_omega("thickness", omega)?;
        Ok(ThicknessParams {
            omega,
            lambda: omega.tan(),
            gamma: gamma_of(omega)?,
        })
    }
}

/// Half the interior angle of the regular reduced triangle of thickness `ω`.
pub fn gamma_of(omega: f64) -> Result<f64> {
    check_omega("gamma_of", omega)?;
    let c = omega.cos();
    Ok(((-c + (c * c + 8.0).sqrt()) / 4.0).asin())
}

pub fn f1(x: f64, lambda: f64) -> Result<f64> {
    check_lambda("f1", lambda)?;
    if !(x >= 0.0 && x < x_max(lambda)) {
        return Err(domain("f1", x, "[0, x_max(lambda))"));
    }
    Ok((lambda * gap(x, lambda)).sqrt().atan2(1.0 + lambda * x))
}

pub fn f2(x: f64, lambda: f64) -> Result<f64> {
    check_lambda("f2", lambda)?;
    if !(x > 0.0 && x < x_max(lambda)) {
        return Err(domain("f2", x, "(0, x_max(lambda))"));
    }
    // (λ−x)² − x²(1+λx)² = λ(1+x²)(λ − 2x − λx²)
    let s = (lambda * (1.0 + x * x) * gap(x, lambda)).sqrt();
    Ok(s.atan2(x * (1.0 + lambda * x)))
}

/// Inverse of `f2`: the `x` with `f2(x) = φ`.
pub fn g_of(phi: f64, lambda: f64) -> Result<f64> {
    check_lambda("g_of", lambda)?;
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(domain("g_of", phi, "(0, pi/2)"));
    }
    let c = phi.cos();
    let p = 1.0 + c;
    // rationalized root of λx² + (1+c)x − λc = 0
    Ok(2.0 * lambda * c / (p + (p * p + 4.0 * lambda * lambda * c).sqrt()))
}

#[allow(non_snake_case)]
pub fn F_of(phi: f64, lambda: f64) -> Result<f64> {
    // g(φ) may round onto x_max for tiny φ, where f1 itself would reject it
    let y = g_of(phi, lambda)?.min(x_max(lambda));
    Ok((lambda * gap(y, lambda)).sqrt().atan2(1.0 + lambda * y))
}

/// Closed-form metrics of the regular (hence reduced) `n`-gon of thickness `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularMetrics {
    pub n: usize,
    pub omega: f64,
    pub side: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub circumradius: f64,
    /// Distance between a vertex and either endpoint of its opposite side.
    pub diameter: f64,
    pub phi: f64,
    pub y: f64,
}

pub fn regular_metrics(n: usize, omega: f64) -> Result<RegularMetrics> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(crate::error::Error::EvenVertexCount(n));
    }
    check_omega("regular_metrics", omega)?;
    let lambda = omega.tan();
    let phi = PI / n as f64;
    let y = g_of(phi, lambda)?;
    let half_side = f1(y, lambda)?;
    let circumradius = ((lambda - y) / (1.0 + lambda * y)).atan();
    let far = PI * ((n - 1) / 2) as f64 / n as f64;
    Ok(RegularMetrics {
        n,
        omega,
        side: 2.0 * half_side,
        perimeter: 2.0 * n as f64 * half_side,
        inradius: y.atan(),
        circumradius,
        diameter: 2.0 * (circumradius.sin() * far.sin()).asin(),
        phi,
        y,
    })
}

/// Radius of the smallest cap guaranteed to contain every reduced polygon of
/// thickness `ω`; attained by the regular triangle.
pub fn triangle_circumradius_bound(omega: f64) -> Result<f64> {
    let s = gamma_of(omega)?.sin();
    let inner = (1.0 - 1.0 / (4.0 * s * s)).max(0.0).sqrt();
    Ok((2.0 / 3f64.sqrt() * inner).min(1.0).asin())
}

/// Sharp upper bound on the diameter of a reduced polygon of thickness `ω`:
/// the side of the regular triangle.
pub fn diameter_bound_new(omega: f64) -> Result<f64> {
    let s = gamma_of(omega)?.sin();
    Ok(2.0 * (1.0 / (2.0 * s)).min(1.0).acos())
}

/// The earlier, non-sharp diameter bound `arccos(cos ω √(1 − (√2/2) sin ω))`.
/// Defined on the half-closed interval `(0, π/2]`.
pub fn diameter_bound_old(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= FRAC_PI_2) {
        return Err(domain("diameter_bound_old", omega, "(0, pi/2]"));
    }
    let inner = (1.0 - SQRT_2 / 2.0 * omega.sin()).max(0.0).sqrt();
    Ok((omega.cos() * inner).clamp(-1.0, 1.0).acos())
}
