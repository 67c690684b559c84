//! Spherically convex polygons, the regular reduced odd-gon, the reducedness
//! witness and polygon metrics.
//!
//! Vertices are indexed from 0. For an odd `n`, the side opposite vertex `i`
//! runs from `i + (n−1)/2` to `i + (n+1)/2` (mod `n`).

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{f1, regular_metrics};
use crate::sphere_core::{
    angle_at, arc_intersection, distance, point_circle_distance, project_to_circle, Arc,
    GreatCircle, SpherePoint,
};

/// Default tolerance on the spread of vertex-to-opposite-side distances.
pub const DEFAULT_REDUCED_TOL: f64 = 1e-7;

/// Margin excluded at both ends of a side when testing that a foot point lies
/// in its relative interior.
pub const INTERIOR_EPS: f64 = 1e-9;

/// Loaded vertices may deviate from unit length by at most this much.
pub const LOAD_NORM_TOL: f64 = 1e-6;

/// A spherically convex polygon with counterclockwise vertices, contained in
/// an open hemisphere. Immutable once validated.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPolygon {
    vertices: Vec<SpherePoint>,
}

impl SphericalPolygon {
    pub fn new(vertices: Vec<SpherePoint>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::TooFewVertices(n));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i].is_degenerate_with(&vertices[j]) {
                return Err(Error::DegenerateEdge(i, j));
            }
        }
        let sum = vertices
            .iter()
            .fold(nalgebra::Vector3::zeros(), |acc, v| acc + v.vector());
        let center = SpherePoint::from_vector(sum).map_err(|_| Error::NotInHemisphere)?;
        if vertices.iter().any(|v| v.dot(&center) <= 0.0) {
            return Err(Error::NotInHemisphere);
        }
        for edge in 0..n {
            let circle = GreatCircle::through(&vertices[edge], &vertices[(edge + 1) % n])?;
            for (vertex, v) in vertices.iter().enumerate() {
                if vertex == edge || vertex == (edge + 1) % n {
                    continue;
                }
                if v.dot(&circle.pole()) <= 0.0 {
                    return Err(Error::NotConvex { edge, vertex });
                }
            }
        }
        Ok(SphericalPolygon { vertices })
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &SpherePoint {
        &self.vertices[i % self.vertices.len()]
    }

    /// Oriented great circle through side `i` (from vertex `i` to `i+1`); the
    /// polygon lies in the hemisphere centered at its pole.
    pub fn edge_circle(&self, i: usize) -> GreatCircle {
        GreatCircle::through(self.vertex(i), self.vertex(i + 1)).expect("validated polygon")
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| distance(self.vertex(i), self.vertex(i + 1)))
            .collect()
    }

    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                angle_at(self.vertex(i), self.vertex(i + n - 1), self.vertex(i + 1))
                    .expect("validated polygon")
            })
            .collect()
    }

    /// Whether all sides and all interior angles agree within `tol`.
    pub fn is_regular(&self, tol: f64) -> bool {
        fn spread(xs: &[f64]) -> f64 {
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        }
        spread(&self.side_lengths()) <= tol && spread(&self.interior_angles()) <= tol
    }
}

/// The regular `n`-gon of thickness `omega`, centered at the north pole with
/// vertex `k` at longitude `2πk/n`.
pub fn build_regular(n: usize, omega: f64) -> Result<SphericalPolygon> {
    let m = regular_metrics(n, omega)?;
    let vertices = (0..n)
        .map(|k| SpherePoint::from_spherical(m.circumradius, 2.0 * PI * k as f64 / n as f64))
        .collect();
    SphericalPolygon::new(vertices)
}

/// Endpoints of the side opposite vertex `i` of an `n`-gon, `n` odd.
#[allow(clippy::manual_div_ceil)]
pub fn opposite_side(i: usize, n: usize) -> (usize, usize) {
    debug_assert!(n % 2 == 1 && i < n);
    ((i + (n - 1) / 2) % n, (i + (n + 1) / 2) % n)
}

/// Measurements attached to one vertex `v_i` by [`reduced_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRecord {
    /// Foot of `v_i` on the great circle of its opposite side.
    pub t: SpherePoint,
    /// `|v_i t_i|`.
    pub dist: f64,
    /// Position of `t_i` along the opposite side, 0 at its first endpoint and
    /// 1 at its second.
    pub side_param: f64,
    pub interior: bool,
    /// Crossing of `v_i t_i` with `v_k t_k`, `k = i + (n+1)/2`.
    pub o: Option<SpherePoint>,
    /// `∠ v_{i+1} v_i t_i`.
    pub alpha: f64,
    /// `∠ t_i v_i v_k`.
    pub beta: f64,
    /// `∠ v_i o_i t_k`.
    pub phi: Option<f64>,
}

/// Certificate for or against reducedness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedWitness {
    pub records: Vec<VertexRecord>,
    /// `min_i |v_i t_i|`; for even-gons the edge-supported lune thickness.
    pub thickness: f64,
    pub max_residual: f64,
    pub is_reduced: bool,
    pub reason: Option<String>,
}

impl ReducedWitness {
    pub fn phis(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.phi).collect()
    }
}

/// Tests the odd-gon criterion: every foot point must land in the relative
/// interior of the opposite side, at a common distance from it.
pub fn reduced_check(poly: &SphericalPolygon, tol: f64) -> Result<ReducedWitness> {
    let n = poly.len();
    if n.is_multiple_of(2) {
        return Ok(ReducedWitness {
            records: Vec::new(),
            thickness: thickness(poly),
            max_residual: 0.0,
            is_reduced: false,
            reason: Some(format!("not an odd-gon ({n} vertices)")),
        });
    }

    let mut feet = Vec::with_capacity(n);
    for i in 0..n {
        let (j, k) = opposite_side(i, n);
        let (a, b) = (poly.vertex(j), poly.vertex(k));
        let circle = poly.edge_circle(j);
        let v = poly.vertex(i);
        let t = project_to_circle(v, &circle)?;
        let along = a.vector().cross(t.vector()).dot(circle.pole().vector());
        let side_param = along.atan2(a.dot(&t)) / distance(a, b);
        feet.push((t, point_circle_distance(v, &circle), side_param));
    }

    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let (_, k) = opposite_side(i, n);
        let (t, dist, side_param) = feet[i];
        let v = poly.vertex(i);
        let o = Arc::new(*v, t)
            .and_then(|own| Arc::new(*poly.vertex(k), feet[k].0).map(|other| (own, other)))
            .and_then(|(own, other)| arc_intersection(&own, &other))
            .ok();
        let phi = o.and_then(|o| angle_at(&o, v, &feet[k].0).ok());
        records.push(VertexRecord {
            t,
            dist,
            side_param,
            interior: side_param > INTERIOR_EPS && side_param < 1.0 - INTERIOR_EPS,
            o,
            alpha: angle_at(v, poly.vertex(i + 1), &t)?,
            beta: angle_at(v, &t, poly.vertex(k))?,
            phi,
        });
    }

    let lo = records.iter().map(|r| r.dist).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.dist).fold(0.0, f64::max);
    let max_residual = hi - lo;
    let reason = if let Some(i) = records.iter().position(|r| !r.interior) {
        Some(format!(
            "foot of vertex {i} is outside its opposite side (parameter {:.3e})",
            records[i].side_param
        ))
    } else if max_residual > tol {
        Some(format!(
            "vertex-to-side distances spread by {max_residual:.3e} > {tol:.1e}"
        ))
    } else {
        records
            .iter()
            .position(|r| r.phi.is_none())
            .map(|i| format!("arcs through vertex {i} and its partner do not cross"))
    };
    Ok(ReducedWitness {
        records,
        thickness: lo,
        max_residual,
        is_reduced: reason.is_none(),
        reason,
    })
}

/// Thickness of the narrowest lune having one side of the polygon on its
/// boundary: the minimum, over sides, of the largest vertex height above the
/// side's great circle.
pub fn thickness(poly: &SphericalPolygon) -> f64 {
    (0..poly.len())
        .map(|e| {
            let circle = poly.edge_circle(e);
            poly.vertices()
                .iter()
                .map(|v| circle.signed_height(v))
                .fold(0.0, f64::max)
        })
        .fold(FRAC_PI_2, f64::min)
}

pub fn perimeter(poly: &SphericalPolygon) -> f64 {
    poly.side_lengths().iter().sum()
}

/// Largest vertex-to-vertex distance. With `reduced_hint` only pairs whose
/// indices differ by `(n∓1)/2` are examined, which suffices for reduced
/// polygons.
pub fn diameter(poly: &SphericalPolygon, reduced_hint: bool) -> f64 {
    let n = poly.len();
    let mut best: f64 = 0.0;
    if reduced_hint && n % 2 == 1 {
        for i in 0..n {
            let (j, k) = opposite_side(i, n);
            best = best
                .max(distance(poly.vertex(i), poly.vertex(j)))
                .max(distance(poly.vertex(i), poly.vertex(k)));
        }
    } else {
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(distance(poly.vertex(i), poly.vertex(j)));
            }
        }
    }
    best
}

/// Closed spherical disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cap {
    pub center: SpherePoint,
    pub radius: f64,
}

impl Cap {
    pub fn contains(&self, p: &SpherePoint, tol: f64) -> bool {
        distance(&self.center, p) <= self.radius + tol
    }
}

const CAP_TOL: f64 = 1e-12;

/// Smallest cap containing every vertex, found by exhausting the caps spanned
/// by vertex pairs (as diameters) and vertex triples (as circumcircles).
pub fn circumcap(poly: &SphericalPolygon) -> Result<Cap> {
    let vs = poly.vertices();
    let n = vs.len();
    let encloses = |cap: &Cap| vs.iter().all(|v| cap.contains(v, CAP_TOL));
    let mut best: Option<Cap> = None;
    let mut consider = |cap: Cap| {
        if cap.radius <= FRAC_PI_2 && best.is_none_or(|b| cap.radius < b.radius) && encloses(&cap) {
            best = Some(cap);
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            if let Ok(center) = SpherePoint::from_vector(vs[i].vector() + vs[j].vector()) {
                consider(Cap {
                    center,
                    radius: distance(&vs[i], &vs[j]) / 2.0,
                });
            }
            for k in j + 1..n {
                let normal =
                    (vs[j].vector() - vs[i].vector()).cross(&(vs[k].vector() - vs[i].vector()));
                let Ok(mut center) = SpherePoint::from_vector(normal) else {
                    continue;
                };
                if center.dot(&vs[i]) < 0.0 {
                    center = center.antipode();
                }
                consider(Cap {
                    center,
                    radius: distance(&center, &vs[i]),
                });
            }
        }
    }
    best.ok_or(Error::NoEnclosingCap)
}

/// Quantities behind the structural consequences of reducedness, measured on
/// a polygon that passed [`reduced_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralMeasures {
    /// `max_i ||v_i t_k| − |t_i v_k||`, `k = i + (n+1)/2`.
    pub boundary_arc_residual: f64,
    /// `max_i |∠ v_i v_k t_i − (α_i + β_i)|`.
    pub congruence_residual: f64,
    /// `max_i (β_i − α_i)`.
    pub max_beta_minus_alpha: f64,
    pub max_beta: f64,
    pub min_alpha: f64,
    pub phi_sum: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    /// `2 Σ f1(tan |o_i t_i|)`.
    pub witness_perimeter: f64,
}

pub fn structural_measures(
    poly: &SphericalPolygon,
    witness: &ReducedWitness,
) -> Result<StructuralMeasures> {
    let n = poly.len();
    if !witness.is_reduced || witness.records.len() != n {
        return Err(Error::InvalidConfig(
            "structural measures need a reduced witness".into(),
        ));
    }
    let lambda = witness.thickness.tan();
    let mut m = StructuralMeasures {
        boundary_arc_residual: 0.0,
        congruence_residual: 0.0,
        max_beta_minus_alpha: f64::NEG_INFINITY,
        max_beta: f64::NEG_INFINITY,
        min_alpha: f64::INFINITY,
        phi_sum: 0.0,
        min_phi: f64::INFINITY,
        max_phi: f64::NEG_INFINITY,
        witness_perimeter: 0.0,
    };
    for (i, r) in witness.records.iter().enumerate() {
        let (_, k) = opposite_side(i, n);
        let partner = &witness.records[k];
        let v = poly.vertex(i);
        let vk = poly.vertex(k);
        m.boundary_arc_residual = m
            .boundary_arc_residual
            .max((distance(v, &partner.t) - distance(&r.t, vk)).abs());
        let at_partner = angle_at(vk, v, &r.t)?;
        m.congruence_residual = m
            .congruence_residual
            .max((at_partner - (r.alpha + r.beta)).abs());
        m.max_beta_minus_alpha = m.max_beta_minus_alpha.max(r.beta - r.alpha);
        m.max_beta = m.max_beta.max(r.beta);
        m.min_alpha = m.min_alpha.min(r.alpha);
        let phi = r.phi.expect("reduced witness has every crossing");
        m.phi_sum += phi;
        m.min_phi = m.min_phi.min(phi);
        m.max_phi = m.max_phi.max(phi);
        let o = r.o.expect("reduced witness has every crossing");
        let y = distance(&o, &r.t).tan();
        m.witness_perimeter += 2.0 * f1(y, lambda)?;
    }
    Ok(m)
}

/// On-disk polygon document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolygonDoc {
    pub vertices: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_hint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl PolygonDoc {
    pub fn from_polygon(
        poly: &SphericalPolygon,
        thickness_hint: Option<f64>,
        label: Option<String>,
    ) -> Self {
        PolygonDoc {
            vertices: poly.vertices().iter().map(SpherePoint::to_array).collect(),
            thickness_hint,
            label,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Renormalizes and validates the vertices.
    pub fn to_polygon(&self) -> Result<SphericalPolygon> {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for (index, &[x, y, z]) in self.vertices.iter().enumerate() {
            let norm = (x * x + y * y + z * z).sqrt();
            if (norm - 1.0).abs().is_nan() || (norm - 1.0).abs() > LOAD_NORM_TOL {
                return Err(Error::NotUnitVector { index, norm });
            }
            vertices.push(SpherePoint::new(x, y, z)?);
        }
        SphericalPolygon::new(vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{diameter_bound_new, gamma_of, triangle_circumradius_bound};
    use crate::sphere_core::SpherePoint;
    use std::f64::consts::FRAC_PI_4;

    fn pt(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint::from_spherical(theta, phi)
    }

    #[test]
    fn opposite_sides() {
        assert_eq!(opposite_side(0, 3), (1, 2));
        assert_eq!(opposite_side(0, 5), (2, 3));
        for n in [3usize, 5, 7, 9, 21] {
            for i in 0..n {
                let (j, _) = opposite_side(i, n);
                assert_eq!(opposite_side(j, n).0, (i + n - 1) % n);
            }
        }
    }

    #[test]
    fn regular_triangle_distances() {
        let p = build_regular(3, FRAC_PI_4).unwrap();
        let w = reduced_check(&p, DEFAULT_REDUCED_TOL).unwrap();
        assert!(w.is_reduced);
        for r in &w.records {
            assert!((r.dist - FRAC_PI_4).abs() < 1e-9);
            assert!((r.side_param - 0.5).abs() < 1e-12);
        }
        let d = diameter_bound_new(FRAC_PI_4).unwrap();
        assert!((diameter(&p, false) - d).abs() < 1e-12);
        assert!((diameter(&p, true) - d).abs() < 1e-12);
    }

    #[test]
    fn regular_pentagon_is_reduced() {
        let p = build_regular(5, PI / 6.0).unwrap();
        let w = reduced_check(&p, DEFAULT_REDUCED_TOL).unwrap();
        assert!(w.is_reduced, "{:?}", w.reason);
        assert!(w.records.iter().all(|r| (r.dist - PI / 6.0).abs() < 1e-9));
        assert!((thickness(&p) - PI / 6.0).abs() < 1e-9);
        assert!((w.phis().unwrap().iter().sum::<f64>() - PI).abs() < 1e-9);
    }

    #[test]
    fn square_is_not_an_odd_gon() {
        let vs = (0..4).map(|k| pt(0.5, PI / 2.0 * k as f64)).collect();
        let sq = SphericalPolygon::new(vs).unwrap();
        let w = reduced_check(&sq, DEFAULT_REDUCED_TOL).unwrap();
        assert!(!w.is_reduced);
        assert!(w.reason.unwrap().contains("not an odd-gon"));
    }

    #[test]
    fn pulled_vertex_breaks_reducedness() {
        let p = build_regular(3, FRAC_PI_4).unwrap();
        let m = regular_metrics(3, FRAC_PI_4).unwrap();
        let mut vs = p.vertices().to_vec();
        vs[0] = pt(m.circumradius + 0.05, 0.0);
        let q = SphericalPolygon::new(vs).unwrap();
        let w = reduced_check(&q, DEFAULT_REDUCED_TOL).unwrap();
        assert!(!w.is_reduced);
        assert!(w.max_residual > 1e-3);
    }

    #[test]
    fn rejects_invalid_polygons() {
        assert_eq!(
            SphericalPolygon::new(vec![pt(0.3, 0.0), pt(0.3, 1.0)]),
            Err(Error::TooFewVertices(2))
        );
        // clockwise order
        let cw = (0..3)
            .map(|k| pt(0.5, -2.0 * PI / 3.0 * k as f64))
            .collect();
        assert!(matches!(
            SphericalPolygon::new(cw),
            Err(Error::NotConvex { .. })
        ));
        // a reflex vertex
        let dart = vec![pt(0.5, 0.0), pt(0.1, PI), pt(0.5, 2.0), pt(0.5, 4.3)];
        assert!(SphericalPolygon::new(dart).is_err());
        let wide = (0..3).map(|k| pt(2.0, 2.0 * PI / 3.0 * k as f64)).collect();
        assert!(SphericalPolygon::new(wide).is_err());
    }

    #[test]
    fn orthant_triangle_perimeter() {
        let tri = SphericalPolygon::new(vec![
            SpherePoint::new(1.0, 0.0, 0.0).unwrap(),
            SpherePoint::new(0.0, 1.0, 0.0).unwrap(),
            SpherePoint::new(0.0, 0.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert!((perimeter(&tri) - 1.5 * PI).abs() < 1e-14);
    }

    #[test]
    fn regular_triangle_circumcap() {
        for w in [PI / 8.0, PI / 6.0, FRAC_PI_4, PI / 3.0] {
            let p = build_regular(3, w).unwrap();
            let cap = circumcap(&p).unwrap();
            assert!((cap.radius - triangle_circumradius_bound(w).unwrap()).abs() < 1e-9);
            assert!(distance(&cap.center, &SpherePoint::NORTH) < 1e-9);
        }
    }

    #[test]
    fn pair_determined_cap() {
        let a = pt(0.6, 0.0);
        let b = pt(0.6, PI);
        let c = pt(0.1, PI / 2.0);
        let p = SphericalPolygon::new(vec![a, c, b]).unwrap();
        let cap = circumcap(&p).unwrap();
        assert!((cap.radius - 0.6).abs() < 1e-12);
        assert!(distance(&cap.center, &SpherePoint::NORTH) < 1e-12);
    }

    #[test]
    fn angles_on_regular_triangle() {
        for w in [PI / 8.0, PI / 3.0] {
            let gamma = gamma_of(w).unwrap();
            let p = build_regular(3, w).unwrap();
            let wit = reduced_check(&p, DEFAULT_REDUCED_TOL).unwrap();
            for r in &wit.records {
                assert!((r.alpha - gamma).abs() < 1e-9);
                assert!((r.beta - gamma).abs() < 1e-9);
                assert!((r.phi.unwrap() - PI / 3.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn structural_measures_on_regular() {
        let p = build_regular(7, PI / 3.0).unwrap();
        let w = reduced_check(&p, DEFAULT_REDUCED_TOL).unwrap();
        let m = structural_measures(&p, &w).unwrap();
        assert!(m.boundary_arc_residual < 1e-12);
        assert!(m.congruence_residual < 1e-12);
        assert!((m.witness_perimeter - perimeter(&p)).abs() < 1e-10);
        assert!((m.min_phi - PI / 7.0).abs() < 1e-10 && (m.max_phi - PI / 7.0).abs() < 1e-10);
    }

    #[test]
    fn document_round_trip_and_norm_check() {
        let p = build_regular(5, 0.4).unwrap();
        let doc = PolygonDoc::from_polygon(&p, Some(0.4), Some("pentagon".into()));
        let back = PolygonDoc::parse(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_polygon().unwrap().len(), 5);

        let mut bad = doc.clone();
        bad.vertices[2] = bad.vertices[2].map(|c| 0.9 * c);
        assert!(matches!(
            bad.to_polygon(),
            Err(Error::NotUnitVector { index: 2, .. })
        ));
        assert!(matches!(
            PolygonDoc::parse("{\"vertices\": 3}"),
            Err(Error::Parse(_))
        ));
    }
}
