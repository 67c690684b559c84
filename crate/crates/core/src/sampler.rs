//! Random non-regular reduced odd-gons of a prescribed thickness.
//!
//! A regular `n`-gon centered at the north pole is perturbed vertex by vertex
//! in (colatitude, longitude) and then pulled back onto the set of polygons
//! whose vertices all sit at distance `ω` from their opposite sides. The pull
//! back is a damped Gauss–Newton (Levenberg–Marquardt) iteration on the
//! residuals
//!
//! ```text
//! r_i = height(v_i above the great circle of its opposite side) − ω,  i < n
//! r_n, r_{n+1} = x and y components of the vertex centroid
//! ```
//!
//! over the `2n − 1` unknowns left after freezing the longitude of vertex 0.
//! The centroid rows and the frozen longitude remove the rotational freedom.
//! Counting unknowns against the `n` distance constraints suggests the family
//! of reduced `n`-gons of fixed thickness is `(n − 3)`-dimensional up to
//! rotation. The count is not proved here, but it matches the rigidity
//! observed at `n = 3`.
//!
//! The Jacobian is always a central finite difference (step
//! [`JACOBIAN_STEP`]); there is no analytic Jacobian. Because the system is
//! underdetermined for `n ≥ 5`, each step is the damped minimum-norm solution
//! `δ = −Jᵀ (J Jᵀ + μ I)⁻¹ r`, identical to `−(JᵀJ + μI)⁻¹ Jᵀ r` but solved in
//! the small, well-conditioned residual space.
//!
//! # Random stream
//!
//! Perturbations come from SplitMix64 (64-bit state, golden-gamma increment,
//! two xor-shift/multiply mixing rounds). Each draw maps the next output `u`
//! to `s · (2 · (u >> 11) · 2⁻⁵³ − 1)`, uniform on `[−s, s)`. Draws are taken
//! vertex by vertex, colatitude before longitude.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formulas::regular_metrics;
use crate::polygon::{opposite_side, reduced_check, ReducedWitness, SphericalPolygon};
use crate::sphere_core::{GreatCircle, SpherePoint};

pub const JACOBIAN_STEP: f64 = 1e-7;
const MAX_DAMPING: f64 = 1e12;
const MIN_DAMPING: f64 = 1e-15;
/// Refinement steps taken after the residual tolerance is met.
const POLISH_STEPS: usize = 3;
/// Tolerance of the reducedness check applied at the converged point.
pub const ACCEPT_TOL: f64 = 1e-7;

/// Seedable portable uniform source used for perturbations.
#[derive(Debug, Clone)]
pub struct Prng(SplitMix64);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[−s, s)`.
    pub fn symmetric(&mut self, s: f64) -> f64 {
        s * (2.0 * self.unit() - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub omega: f64,
    pub seed: u64,
    pub perturbation_scale: f64,
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub damping: f64,
}

impl SamplerConfig {
    pub fn new(n: usize, omega: f64, seed: u64) -> Self {
        SamplerConfig {
            n,
            omega,
            seed,
            perturbation_scale: 0.05,
            max_iterations: 200,
            residual_tol: 1e-10,
            damping: 1e-3,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplerConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n < 3 || self.n.is_multiple_of(2) {
            return bad(format!("n must be odd and at least 3, got {}", self.n));
        }
        if !(self.omega > 0.0 && self.omega < FRAC_PI_2) {
            return bad(format!("thickness {} outside (0, pi/2)", self.omega));
        }
        if !(self.perturbation_scale >= 0.0 && self.perturbation_scale < self.omega / 4.0) {
            return bad(format!(
                "perturbation scale {} must lie in [0, omega/4)",
                self.perturbation_scale
            ));
        }
        if self.max_iterations == 0
            || self.residual_tol.is_nan()
            || self.residual_tol <= 0.0
            || self.damping.is_nan()
            || self.damping <= 0.0
        {
            return bad("iterations, residual tolerance and damping must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SampleStatus {
    Converged,
    NotConverged,
    ConstraintViolation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub n: usize,
    pub omega: f64,
    pub seed: u64,
    pub status: SampleStatus,
    pub polygon: Option<SphericalPolygon>,
    pub witness: Option<ReducedWitness>,
    pub iterations: usize,
    pub final_residual: f64,
    /// Infinity norm of the residual after each accepted step, starting with
    /// the initial point.
    pub trajectory: Vec<f64>,
}

impl SampleResult {
    pub fn converged(&self) -> bool {
        self.status == SampleStatus::Converged
    }

    /// Wraps an existing polygon as if it had been sampled, for feeding
    /// hand-built polygons to the verification suite.
    pub fn from_polygon(polygon: SphericalPolygon, omega: f64) -> Self {
        let witness = reduced_check(&polygon, ACCEPT_TOL).ok();
        SampleResult {
            n: polygon.len(),
            omega,
            seed: 0,
            status: SampleStatus::Converged,
            final_residual: witness.as_ref().map_or(f64::NAN, |w| w.max_residual),
            polygon: Some(polygon),
            witness,
            iterations: 0,
            trajectory: Vec::new(),
        }
    }
}

/// Unknowns: colatitudes `θ_0..θ_{n−1}` then longitudes `φ_1..φ_{n−1}`.
struct Problem {
    n: usize,
    omega: f64,
    frozen_longitude: f64,
}

impl Problem {
    fn vertices(&self, x: &DVector<f64>) -> Vec<SpherePoint> {
        (0..self.n)
            .map(|i| {
                let lon = if i == 0 {
                    self.frozen_longitude
                } else {
                    x[self.n + i - 1]
                };
                SpherePoint::from_spherical(x[i], lon)
            })
            .collect()
    }

    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.n;
        let vs = self.vertices(x);
        let mut r = DVector::zeros(n + 2);
        for i in 0..n {
            let (j, k) = opposite_side(i, n);
            let circle = GreatCircle::through(&vs[j], &vs[k]).ok()?;
            r[i] = circle.signed_height(&vs[i]) - self.omega;
        }
        let inv = 1.0 / n as f64;
        r[n] = vs.iter().map(SpherePoint::x).sum::<f64>() * inv;
        r[n + 1] = vs.iter().map(SpherePoint::y).sum::<f64>() * inv;
        Some(r)
    }

    fn jacobian(&self, x: &DVector<f64>, m: usize) -> Option<DMatrix<f64>> {
        let p = x.len();
        let mut jac = DMatrix::zeros(m, p);
        let mut probe = x.clone();
        for c in 0..p {
            probe[c] = x[c] + JACOBIAN_STEP;
            let plus = self.residuals(&probe)?;
            probe[c] = x[c] - JACOBIAN_STEP;
            let minus = self.residuals(&probe)?;
            probe[c] = x[c];
            jac.set_column(c, &((plus - minus) / (2.0 * JACOBIAN_STEP)));
        }
        Some(jac)
    }
}

fn sup_norm(r: &DVector<f64>) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Central finite-difference Jacobian of the sampler residuals at the given
/// vertex coordinates, exposed for step-size consistency checks.
pub fn residual_jacobian(
    n: usize,
    omega: f64,
    colatitudes: &[f64],
    longitudes: &[f64],
) -> Option<DMatrix<f64>> {
    let problem = Problem {
        n,
        omega,
        frozen_longitude: longitudes[0],
    };
    let x = DVector::from_iterator(
        2 * n - 1,
        colatitudes
            .iter()
            .copied()
            .chain(longitudes[1..].iter().copied()),
    );
    problem.jacobian(&x, n + 2)
}

/// Draws one reduced polygon according to `cfg`.
pub fn sample_reduced(cfg: &SamplerConfig) -> Result<SampleResult> {
    cfg.validate()?;
    let n = cfg.n;
    let radius = regular_metrics(n, cfg.omega)?.circumradius;
    let mut rng = Prng::new(cfg.seed);
    let mut colat = Vec::with_capacity(n);
    let mut lon = Vec::with_capacity(n);
    for k in 0..n {
        colat.push(radius + rng.symmetric(cfg.perturbation_scale));
        lon.push(2.0 * PI * k as f64 / n as f64 + rng.symmetric(cfg.perturbation_scale));
    }
    let problem = Problem {
        n,
        omega: cfg.omega,
        frozen_longitude: lon[0],
    };
    let mut x = DVector::from_iterator(
        2 * n - 1,
        colat.iter().copied().chain(lon[1..].iter().copied()),
    );

    let m = n + 2;
    let mut result = SampleResult {
        n,
        omega: cfg.omega,
        seed: cfg.seed,
        status: SampleStatus::NotConverged,
        polygon: None,
        witness: None,
        iterations: 0,
        final_residual: f64::INFINITY,
        trajectory: Vec::new(),
    };
    let Some(mut r) = problem.residuals(&x) else {
        result.status = SampleStatus::ConstraintViolation("degenerate starting polygon".into());
        return Ok(result);
    };
    let mut damping = cfg.damping;
    let mut norm2 = r.norm_squared();
    result.trajectory.push(sup_norm(&r));

    let mut converged = sup_norm(&r) <= cfg.residual_tol;
    'outer: while !converged && result.iterations < cfg.max_iterations {
        let Some(jac) = problem.jacobian(&x, m) else {
            break;
        };
        let jjt = &jac * jac.transpose();
        loop {
            let system = &jjt + DMatrix::identity(m, m) * damping;
            let step = system
                .cholesky()
                .map(|ch| -(jac.transpose() * ch.solve(&r)));
            let accepted = step.and_then(|step| {
                let trial = &x + step;
                let tr = problem.residuals(&trial)?;
                (tr.norm_squared() < norm2).then_some((trial, tr))
            });
            match accepted {
                Some((trial, tr)) => {
                    x = trial;
                    r = tr;
                    norm2 = r.norm_squared();
                    damping = (damping / 10.0).max(MIN_DAMPING);
                    break;
                }
                None => {
                    damping *= 10.0;
                    if damping > MAX_DAMPING {
                        break 'outer;
                    }
                }
            }
        }
        result.iterations += 1;
        result.trajectory.push(sup_norm(&r));
        converged = sup_norm(&r) <= cfg.residual_tol;
    }
    if !converged {
        result.final_residual = sup_norm(&r);
        return Ok(result);
    }
    // The tolerance only decides convergence. A few nearly undamped steps
    // then take the residual to rounding level, since quantities such as
    // f1 near x_max amplify a 1e-10 residual by orders of magnitude.
    for _ in 0..POLISH_STEPS {
        let Some(jac) = problem.jacobian(&x, m) else {
            break;
        };
        let system = &jac * jac.transpose() + DMatrix::identity(m, m) * MIN_DAMPING;
        let Some(ch) = system.cholesky() else {
            break;
        };
        let trial = &x - jac.transpose() * ch.solve(&r);
        match problem.residuals(&trial) {
            Some(tr) if tr.norm_squared() < r.norm_squared() => {
                x = trial;
                r = tr;
                result.iterations += 1;
                result.trajectory.push(sup_norm(&r));
            }
            _ => break,
        }
    }
    result.final_residual = sup_norm(&r);

    let polygon = match SphericalPolygon::new(problem.vertices(&x)) {
        Ok(p) => p,
        Err(e) => {
            result.status = SampleStatus::ConstraintViolation(e.to_string());
            return Ok(result);
        }
    };
    let witness = reduced_check(&polygon, ACCEPT_TOL)?;
    result.status = if witness.is_reduced {
        SampleStatus::Converged
    } else {
        SampleStatus::ConstraintViolation(
            witness
                .reason
                .clone()
                .unwrap_or_else(|| "not reduced".into()),
        )
    };
    result.polygon = Some(polygon);
    result.witness = Some(witness);
    Ok(result)
}

/// `count` samples with seeds `cfg.seed, cfg.seed + 1, …`, returned in seed
/// order regardless of how the work was scheduled.
pub fn sample_batch(cfg: &SamplerConfig, count: usize) -> Result<Vec<SampleResult>> {
    cfg.validate()?;
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|k| sample_reduced(&cfg.with_seed(cfg.seed.wrapping_add(k))))
        .collect()
}
