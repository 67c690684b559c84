//! Floating-point primitives on the unit sphere: points, great circles, arcs,
//! lunes, distances, projections and the right-triangle identity kernel.
//!
//! Every inverse-trigonometric argument is clamped to `[-1, 1]`. Coincident or
//! antipodal configurations are reported as errors instead of producing an
//! arbitrary answer.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two unit vectors whose dot product is within this of `±1` are treated as
/// coincident or antipodal.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Tolerance used when deciding that a point lies on a closed arc.
const ON_ARC_TOL: f64 = 1e-10;

/// Tolerance on the right-triangle identities checked by the solver.
pub const IDENTITY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// A point of the unit sphere, stored as a unit vector of `R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint {
    v: Vector3<f64>,
}

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint {
        v: Vector3::new(0.0, 0.0, 1.0),
    };
    pub const SOUTH: SpherePoint = SpherePoint {
        v: Vector3::new(0.0, 0.0, -1.0),
    };

    /// Normalizes `(x, y, z)` onto the sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::ZeroVector);
        }
        let mut v = v / norm;
        // a second pass brings the norm to within an ulp or two of 1
        v /= v.norm();
        Ok(SpherePoint { v })
    }

    /// Point at colatitude `theta` (distance from the north pole) and
    /// longitude `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        SpherePoint::from_vector(Vector3::new(st * cp, st * sp, ct))
            .expect("spherical coordinates always give a unit vector")
    }

    pub fn x(&self) -> f64 {
        self.v.x
    }
    pub fn y(&self) -> f64 {
        self.v.y
    }
    pub fn z(&self) -> f64 {
        self.v.z
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.v
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.v.x, self.v.y, self.v.z]
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.v.dot(&other.v)
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint { v: -self.v }
    }

    pub fn is_degenerate_with(&self, other: &SpherePoint) -> bool {
        self.dot(other).abs() >= 1.0 - DEGENERACY_TOL
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        SpherePoint::new(a[0], a[1], a[2])
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.to_array()
    }
}

/// A great circle, stored by its oriented pole. The circle is traversed
/// counterclockwise as seen from the pole, i.e. it is the positively oriented
/// boundary of the hemisphere centered at the pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pole: SpherePoint,
}

impl GreatCircle {
    pub fn from_pole(pole: SpherePoint) -> Self {
        GreatCircle { pole }
    }

    /// The great circle through `a` then `b`, oriented so that travelling
    /// from `a` towards `b` along the shorter arc is the positive direction.
    pub fn through(a: &SpherePoint, b: &SpherePoint) -> Result<Self> {
        if a.is_degenerate_with(b) {
            return Err(Error::DegenerateArc);
        }
        Ok(GreatCircle {
            pole: SpherePoint::from_vector(a.v.cross(&b.v))?,
        })
    }

    pub fn pole(&self) -> SpherePoint {
        self.pole
    }

    /// Signed angular height of `p` above the circle: positive in the
    /// hemisphere centered at the pole.
    pub fn signed_height(&self, p: &SpherePoint) -> f64 {
        clamp_unit(p.dot(&self.pole)).asin()
    }
}

/// The shorter great-circle segment between two points that are neither equal
/// nor antipodal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    a: SpherePoint,
    b: SpherePoint,
}

impl Arc {
    pub fn new(a: SpherePoint, b: SpherePoint) -> Result<Self> {
        if a.is_degenerate_with(&b) {
            return Err(Error::DegenerateArc);
        }
        Ok(Arc { a, b })
    }

    pub fn start(&self) -> SpherePoint {
        self.a
    }
    pub fn end(&self) -> SpherePoint {
        self.b
    }

    pub fn length(&self) -> f64 {
        distance(&self.a, &self.b)
    }

    pub fn circle(&self) -> GreatCircle {
        GreatCircle::through(&self.a, &self.b).expect("arc endpoints are validated")
    }

    /// Whether `p`, assumed to lie on the arc's great circle, falls on the
    /// closed arc.
    fn holds_on_circle(&self, p: &SpherePoint) -> bool {
        let n = self.circle().pole.v;
        self.a.v.cross(&p.v).dot(&n) >= -ON_ARC_TOL
            && p.v.cross(&self.b.v).dot(&n) >= -ON_ARC_TOL
            && p.dot(&self.midpoint()) > 0.0
    }

    /// Angular distance from `p` to the closed arc.
    pub fn distance_to(&self, p: &SpherePoint) -> f64 {
        let circle = self.circle();
        if let Ok(t) = project_to_circle(p, &circle) {
            if self.holds_on_circle(&t) {
                return distance(p, &t);
            }
        }
        distance(p, &self.a).min(distance(p, &self.b))
    }

    pub fn midpoint(&self) -> SpherePoint {
        SpherePoint::from_vector(self.a.v + self.b.v).expect("endpoints are not antipodal")
    }
}

/// Intersection `G ∩ H` of two hemispheres, given by their centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lune {
    g: SpherePoint,
    h: SpherePoint,
}

impl Lune {
    pub fn new(g: SpherePoint, h: SpherePoint) -> Result<Self> {
        if g.is_degenerate_with(&h) {
            return Err(Error::DegenerateArc);
        }
        Ok(Lune { g, h })
    }

    pub fn thickness(&self) -> f64 {
        PI - distance(&self.g, &self.h)
    }

    pub fn contains(&self, p: &SpherePoint, tol: f64) -> bool {
        p.dot(&self.g) >= -tol && p.dot(&self.h) >= -tol
    }
}

/// Great-circle distance, in `[0, π]`.
pub fn distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    // atan2 keeps full precision for nearly equal and nearly antipodal pairs
    let cross = p.v.cross(&q.v).norm();
    let dot = p.dot(q);
    if cross == 0.0 {
        return if dot >= 0.0 { 0.0 } else { PI };
    }
    cross.atan2(dot)
}

/// Nearest point of the great circle to `p`.
pub fn project_to_circle(p: &SpherePoint, circle: &GreatCircle) -> Result<SpherePoint> {
    let pole = circle.pole.v;
    let h = p.v.dot(&pole);
    if h.abs() >= 1.0 - DEGENERACY_TOL {
        return Err(Error::DegenerateProjection);
    }
    SpherePoint::from_vector(p.v - h * pole)
}

/// Distance from `p` to the great circle: `|π/2 − |p, pole||`.
pub fn point_circle_distance(p: &SpherePoint, circle: &GreatCircle) -> f64 {
    circle.signed_height(p).abs()
}

/// Intersection of two closed arcs lying on distinct great circles.
pub fn arc_intersection(u: &Arc, v: &Arc) -> Result<SpherePoint> {
    let axis = u.circle().pole.v.cross(&v.circle().pole.v);
    if axis.norm() < 1e-12 {
        return Err(Error::CoplanarArcs);
    }
    let candidate = SpherePoint::from_vector(axis)?;
    [candidate, candidate.antipode()]
        .into_iter()
        .find(|c| u.holds_on_circle(c) && v.holds_on_circle(c))
        .ok_or(Error::NoIntersection)
}

/// Angle at `vertex` between the great-circle directions towards `p` and `q`.
pub fn angle_at(vertex: &SpherePoint, p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
    if vertex.is_degenerate_with(p) || vertex.is_degenerate_with(q) {
        return Err(Error::DegenerateAngle);
    }
    let u = vertex.v.cross(&p.v);
    let w = vertex.v.cross(&q.v);
    let sin_part = vertex.v.dot(&p.v.cross(&q.v)).abs();
    Ok(sin_part.atan2(u.dot(&w)))
}

/// A right spherical triangle with the right angle opposite the hypotenuse `c`.
/// `angle_a` is opposite leg `a`, `angle_b` opposite leg `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RightTriangle {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub angle_a: f64,
    pub angle_b: f64,
}

/// The two quantities handed to [`solve_right_triangle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Known {
    Legs { a: f64, b: f64 },
    LegAHypotenuse { a: f64, c: f64 },
    LegBHypotenuse { b: f64, c: f64 },
    LegAAngleA { a: f64, angle_a: f64 },
    LegAAngleB { a: f64, angle_b: f64 },
    LegBAngleA { b: f64, angle_a: f64 },
    LegBAngleB { b: f64, angle_b: f64 },
    HypotenuseAngleA { c: f64, angle_a: f64 },
    HypotenuseAngleB { c: f64, angle_b: f64 },
    Angles { angle_a: f64, angle_b: f64 },
}

impl RightTriangle {
    fn from_legs(a: f64, b: f64) -> Self {
        RightTriangle {
            a,
            b,
            c: clamp_unit(a.cos() * b.cos()).acos(),
            angle_a: a.tan().atan2(b.sin()),
            angle_b: b.tan().atan2(a.sin()),
        }
    }

    fn mirrored(self) -> Self {
        RightTriangle {
            a: self.b,
            b: self.a,
            c: self.c,
            angle_a: self.angle_b,
            angle_b: self.angle_a,
        }
    }

    /// Residuals of the six right-triangle identities, in order:
    /// `cos A = tan b cot c`, `cos B = tan a cot c`, `sin b = sin c sin B`,
    /// `cos c = cos a cos b`, `cos c = cot A cot B`, `cos B = cos b sin A`.
    pub fn identity_residuals(&self) -> [f64; 6] {
        let RightTriangle {
            a,
            b,
            c,
            angle_a,
            angle_b,
        } = *self;
        [
            angle_a.cos() - b.tan() / c.tan(),
            angle_b.cos() - a.tan() / c.tan(),
            b.sin() - c.sin() * angle_b.sin(),
            c.cos() - a.cos() * b.cos(),
            c.cos() - 1.0 / (angle_a.tan() * angle_b.tan()),
            angle_b.cos() - b.cos() * angle_a.sin(),
        ]
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals()
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

fn open_acute(x: f64) -> bool {
    x > 0.0 && x < FRAC_PI_2
}

fn inconsistent(msg: &str) -> Error {
    Error::InconsistentData(msg.to_string())
}

fn leg_from_hypotenuse(a: f64, c: f64) -> Result<f64> {
    if c <= a {
        return Err(inconsistent("hypotenuse must exceed the leg"));
    }
    Ok(clamp_unit(c.cos() / a.cos()).acos())
}

fn leg_from_opposite_angle(a: f64, angle_a: f64) -> Result<f64> {
    // sin b = tan a cot A
    let s = a.tan() / angle_a.tan();
    if s >= 1.0 {
        return Err(inconsistent(
            "a leg must be smaller than its opposite angle",
        ));
    }
    Ok(s.asin())
}

/// Completes a right spherical triangle with legs in `(0, π/2)` from two of
/// its five free quantities.
pub fn solve_right_triangle(known: Known) -> Result<RightTriangle> {
    let inputs: Vec<f64> = match known {
        Known::Legs { a, b } => vec![a, b],
        Known::LegAHypotenuse { a, c } | Known::LegBHypotenuse { b: a, c } => vec![a, c],
        Known::LegAAngleA { a, angle_a: x }
        | Known::LegAAngleB { a, angle_b: x }
        | Known::LegBAngleA { b: a, angle_a: x }
        | Known::LegBAngleB { b: a, angle_b: x } => vec![a, x],
        Known::HypotenuseAngleA { c, angle_a: x } | Known::HypotenuseAngleB { c, angle_b: x } => {
            vec![c, x]
        }
        Known::Angles { angle_a, angle_b } => vec![angle_a, angle_b],
    };
    if !inputs.iter().all(|&x| open_acute(x)) {
        return Err(inconsistent("every given quantity must lie in (0, pi/2)"));
    }

    let tri = match known {
        Known::Legs { a, b } => RightTriangle::from_legs(a, b),
        Known::LegAHypotenuse { a, c } => RightTriangle::from_legs(a, leg_from_hypotenuse(a, c)?),
        Known::LegBHypotenuse { b, c } => RightTriangle::from_legs(leg_from_hypotenuse(b, c)?, b),
        Known::LegAAngleA { a, angle_a } => {
            RightTriangle::from_legs(a, leg_from_opposite_angle(a, angle_a)?)
        }
        Known::LegBAngleB { b, angle_b } => {
            RightTriangle::from_legs(leg_from_opposite_angle(b, angle_b)?, b)
        }
        // tan b = sin a tan B
        Known::LegAAngleB { a, angle_b } => {
            RightTriangle::from_legs(a, (a.sin() * angle_b.tan()).atan())
        }
        Known::LegBAngleA { b, angle_a } => {
            RightTriangle::from_legs((b.sin() * angle_a.tan()).atan(), b)
        }
        // sin a = sin c sin A
        Known::HypotenuseAngleA { c, angle_a } => {
            let a = clamp_unit(c.sin() * angle_a.sin()).asin();
            RightTriangle::from_legs(a, leg_from_hypotenuse(a, c)?)
        }
        Known::HypotenuseAngleB { c, angle_b } => {
            let b = clamp_unit(c.sin() * angle_b.sin()).asin();
            RightTriangle::from_legs(b, leg_from_hypotenuse(b, c)?).mirrored()
        }
        // cos A = cos a sin B
        Known::Angles { angle_a, angle_b } => {
            if angle_a + angle_b <= FRAC_PI_2 {
                return Err(inconsistent(
                    "angles of a spherical right triangle sum above pi/2",
                ));
            }
            let a = clamp_unit(angle_a.cos() / angle_b.sin()).acos();
            let b = clamp_unit(angle_b.cos() / angle_a.sin()).acos();
            RightTriangle::from_legs(a, b)
        }
    };

    let sides_ok = [tri.a, tri.b, tri.c, tri.angle_a, tri.angle_b]
        .iter()
        .all(|&x| open_acute(x));
    if !sides_ok || tri.max_identity_residual() > IDENTITY_TOL {
        return Err(inconsistent(
            "data does not determine a nondegenerate triangle",
        ));
    }
    Ok(tri)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn p(x: f64, y: f64, z: f64) -> SpherePoint {
        SpherePoint::new(x, y, z).unwrap()
    }

    #[test]
    fn distances() {
        let a = p(1.0, 0.0, 0.0);
        assert_eq!(distance(&a, &a), 0.0);
        assert!((distance(&SpherePoint::NORTH, &SpherePoint::SOUTH) - PI).abs() < 1e-15);
        assert!((distance(&a, &p(0.0, 1.0, 0.0)) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn construction_renormalizes() {
        let q = p(3.0, 4.0, 12.0);
        assert!((q.vector().norm() - 1.0).abs() < 1e-15);
        assert_eq!(SpherePoint::new(0.0, 0.0, 0.0), Err(Error::ZeroVector));
    }

    #[test]
    fn projection_fixed_point_and_symmetry() {
        let equator = GreatCircle::from_pole(SpherePoint::NORTH);
        let on = p(0.6, 0.8, 0.0);
        let t = project_to_circle(&on, &equator).unwrap();
        assert!(distance(&t, &on) < 1e-15);

        let tilted = SpherePoint::from_spherical(1e-3, 0.0);
        let t = project_to_circle(&tilted, &equator).unwrap();
        assert!(distance(&t, &p(1.0, 0.0, 0.0)) < 1e-12);

        assert_eq!(
            project_to_circle(&SpherePoint::SOUTH, &equator),
            Err(Error::DegenerateProjection)
        );
    }

    #[test]
    fn projection_minimizes_distance_over_circle_samples() {
        let circle = GreatCircle::from_pole(p(0.3, -0.5, 0.8));
        let q = p(-0.2, 0.9, 0.4);
        let t = project_to_circle(&q, &circle).unwrap();
        let pole = circle.pole().vector().clone_owned();
        let e1 = pole.cross(&Vector3::x()).normalize();
        let e2 = pole.cross(&e1);
        let samples = 10_000;
        let brute = (0..samples)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / samples as f64;
                let c = SpherePoint::from_vector(e1 * s.cos() + e2 * s.sin()).unwrap();
                distance(&q, &c)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(distance(&q, &t) <= brute + 1e-12);
        assert!(brute - distance(&q, &t) < 1e-6);
    }

    #[test]
    fn point_circle_distance_cases() {
        let circle = GreatCircle::from_pole(SpherePoint::NORTH);
        assert_eq!(point_circle_distance(&p(1.0, 0.0, 0.0), &circle), 0.0);
        assert!((point_circle_distance(&SpherePoint::NORTH, &circle) - FRAC_PI_2).abs() < 1e-15);
        let q = p(0.2, 0.4, -0.7);
        let t = project_to_circle(&q, &circle).unwrap();
        assert!((point_circle_distance(&q, &circle) - distance(&q, &t)).abs() < 1e-10);
    }

    #[test]
    fn arc_intersection_cases() {
        let meridian = Arc::new(p(1.0, 0.0, 0.5), p(1.0, 0.0, -0.5)).unwrap();
        let equatorial = Arc::new(p(1.0, -0.5, 0.0), p(1.0, 0.5, 0.0)).unwrap();
        let x = arc_intersection(&meridian, &equatorial).unwrap();
        assert!(distance(&x, &p(1.0, 0.0, 0.0)) < 1e-15);

        // arcs drawn through a chosen point
        let q = p(0.3, 0.4, 0.6);
        let u = Arc::new(
            SpherePoint::from_vector(q.vector() + Vector3::new(0.1, -0.2, 0.05)).unwrap(),
            SpherePoint::from_vector(q.vector() - Vector3::new(0.1, -0.2, 0.05)).unwrap(),
        )
        .unwrap();
        let v = Arc::new(
            SpherePoint::from_vector(q.vector() + Vector3::new(-0.15, 0.0, 0.2)).unwrap(),
            SpherePoint::from_vector(q.vector() - Vector3::new(-0.15, 0.0, 0.2)).unwrap(),
        )
        .unwrap();
        let x = arc_intersection(&u, &v).unwrap();
        assert!(distance(&x, &q) < 1e-12);
        assert!(u.distance_to(&x) < 1e-10 && v.distance_to(&x) < 1e-10);

        let far = Arc::new(p(0.0, 1.0, 0.1), p(0.0, 1.0, -0.1)).unwrap();
        assert_eq!(
            arc_intersection(&meridian, &far),
            Err(Error::NoIntersection)
        );
        let same = Arc::new(p(1.0, 0.0, 0.2), p(1.0, 0.0, -0.7)).unwrap();
        assert_eq!(arc_intersection(&meridian, &same), Err(Error::CoplanarArcs));
    }

    #[test]
    fn angles() {
        let v = SpherePoint::NORTH;
        let a = p(1.0, 0.0, 0.0);
        assert_eq!(angle_at(&v, &a, &a).unwrap(), 0.0);
        assert!((angle_at(&v, &a, &p(0.0, 1.0, 0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(
            angle_at(&v, &SpherePoint::SOUTH, &a),
            Err(Error::DegenerateAngle)
        );
    }

    #[test]
    fn lune_thickness() {
        let lune = Lune::new(p(0.0, 0.0, 1.0), p(0.0, 1.0, 0.0)).unwrap();
        assert!((lune.thickness() - FRAC_PI_2).abs() < 1e-15);
        assert!(lune.contains(&p(0.0, 1.0, 1.0), 0.0));
        assert!(!lune.contains(&p(0.0, -1.0, 1.0), 0.0));
    }

    #[test]
    fn isosceles_right_triangle() {
        let a = 0.4;
        let tri = solve_right_triangle(Known::Legs { a, b: a }).unwrap();
        assert!((tri.angle_a - tri.angle_b).abs() < 1e-15);
        assert!((tri.c.cos() - a.cos().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn leg_and_angle_round_trip() {
        let tri = solve_right_triangle(Known::LegAAngleB {
            a: FRAC_PI_4,
            angle_b: 0.7,
        })
        .unwrap();
        let again = solve_right_triangle(Known::HypotenuseAngleB {
            c: tri.c,
            angle_b: tri.angle_b,
        })
        .unwrap();
        assert!((again.a - tri.a).abs() < 1e-10);
        assert!((tri.angle_a.cos() - tri.b.tan() / tri.c.tan()).abs() < 1e-10);
    }

    #[test]
    fn regular_triangle_half_side() {
        // the half side a of the regular triangle of thickness w satisfies
        // cos 2a = cos w cos a
        let w = FRAC_PI_4;
        let cos_a = (w.cos() + (w.cos().powi(2) + 8.0).sqrt()) / 4.0;
        let a = cos_a.acos();
        let tri = solve_right_triangle(Known::Legs { a, b: w }).unwrap();
        assert!((tri.c - 2.0 * a).abs() < 1e-12);
        assert!(((2.0 * a).cos() - w.cos() * a.cos()).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_inputs() {
        assert!(matches!(
            solve_right_triangle(Known::LegAHypotenuse { a: 0.5, c: 0.4 }),
            Err(Error::InconsistentData(_))
        ));
        assert!(matches!(
            solve_right_triangle(Known::LegAAngleA {
                a: 0.6,
                angle_a: 0.5
            }),
            Err(Error::InconsistentData(_))
        ));
        assert!(matches!(
            solve_right_triangle(Known::Angles {
                angle_a: 0.5,
                angle_b: 0.6
            }),
            Err(Error::InconsistentData(_))
        ));
        assert!(matches!(
            solve_right_triangle(Known::Legs { a: 0.0, b: 0.6 }),
            Err(Error::InconsistentData(_))
        ));
    }
}
