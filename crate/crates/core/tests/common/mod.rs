//! Independent oracles for the integration tests. Everything here works on
//! plain `[f64; 3]` arrays and avoids the library's geometry routines.
#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use reduced_polygons::sampler::Prng;

pub type V = [f64; 3];

pub fn dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V, b: V) -> V {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: V, b: V) -> V {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: V) -> f64 {
    dot(a, a).sqrt()
}

pub fn unit(a: V) -> V {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

pub fn spherical(colat: f64, lon: f64) -> V {
    [
        colat.sin() * lon.cos(),
        colat.sin() * lon.sin(),
        colat.cos(),
    ]
}

/// Uniform point on the sphere (Archimedes: uniform height, uniform longitude).
pub fn random_unit(rng: &mut Prng) -> V {
    let z = rng.symmetric(1.0);
    let lon = rng.symmetric(std::f64::consts::PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * lon.cos(), r * lon.sin(), z]
}

/// Angular distance through the chord length.
pub fn chord_distance(a: V, b: V) -> f64 {
    2.0 * (norm(sub(a, b)) / 2.0).min(1.0).asin()
}

/// Angle at `v` between the arcs towards `p` and `q`, from tangent vectors.
pub fn tangent_angle(v: V, p: V, q: V) -> f64 {
    let tangent = |x: V| {
        let d = dot(x, v);
        unit([x[0] - d * v[0], x[1] - d * v[1], x[2] - d * v[2]])
    };
    dot(tangent(p), tangent(q)).clamp(-1.0, 1.0).acos()
}

/// Right triangle with legs `a`, `b` built explicitly around a right angle at
/// the north pole. Returns `(a, b, c, A, B)` with `A` opposite `a`.
pub fn measured_right_triangle(a: f64, b: f64) -> (f64, f64, f64, f64, f64) {
    let c_pt = [0.0, 0.0, 1.0];
    let a_pt = spherical(b, 0.0);
    let b_pt = spherical(a, std::f64::consts::FRAC_PI_2);
    (
        chord_distance(c_pt, b_pt),
        chord_distance(c_pt, a_pt),
        chord_distance(a_pt, b_pt),
        tangent_angle(a_pt, c_pt, b_pt),
        tangent_angle(b_pt, c_pt, a_pt),
    )
}

/// The six right-triangle identities written out directly.
pub fn right_triangle_identities(a: f64, b: f64, c: f64, aa: f64, bb: f64) -> [f64; 6] {
    [
        aa.cos() * c.tan() - b.tan(),
        bb.cos() * c.tan() - a.tan(),
        b.sin() - c.sin() * bb.sin(),
        c.cos() - a.cos() * b.cos(),
        c.cos() * aa.tan() * bb.tan() - 1.0,
        bb.cos() - b.cos() * aa.sin(),
    ]
}

/// Spread of `sin(side)/sin(opposite angle)` over a triangle.
pub fn sine_rule_spread(p: V, q: V, r: V) -> f64 {
    let ratios = [
        chord_distance(q, r).sin() / tangent_angle(p, q, r).sin(),
        chord_distance(p, r).sin() / tangent_angle(q, p, r).sin(),
        chord_distance(p, q).sin() / tangent_angle(r, p, q).sin(),
    ];
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo
}

/// Width of the smallest lune with corners `±axis` holding all `pts`:
/// the shortest longitude interval around `axis` covering them.
pub fn lune_width(axis: V, pts: &[V]) -> f64 {
    use std::f64::consts::TAU;
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = unit(cross(axis, helper));
    let e2 = cross(axis, e1);
    let mut lon: Vec<f64> = pts.iter().map(|&p| dot(p, e2).atan2(dot(p, e1))).collect();
    lon.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut gap = lon[0] + TAU - lon[lon.len() - 1];
    for w in lon.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    TAU - gap
}

/// Random search over lune corner axes followed by a shrinking local walk.
pub fn mc_thickness(pts: &[V], samples: usize, rng: &mut Prng) -> f64 {
    minimize(|axis| lune_width(axis, pts), samples, rng)
}

/// Random search over cap centers followed by a shrinking local walk.
pub fn mc_circumradius(pts: &[V], samples: usize, rng: &mut Prng) -> f64 {
    minimize(
        |c| {
            pts.iter()
                .map(|&p| chord_distance(c, p))
                .fold(0.0, f64::max)
        },
        samples,
        rng,
    )
}

fn minimize(f: impl Fn(V) -> f64, samples: usize, rng: &mut Prng) -> f64 {
    let mut best = [0.0, 0.0, 1.0];
    let mut best_val = f64::INFINITY;
    for _ in 0..samples {
        let c = random_unit(rng);
        let v = f(c);
        if v < best_val {
            best = c;
            best_val = v;
        }
    }
    let mut step = 0.05;
    while step > 1e-9 {
        let mut improved = false;
        for _ in 0..150 {
            let d = random_unit(rng);
            let c = unit([
                best[0] + step * d[0],
                best[1] + step * d[1],
                best[2] + step * d[2],
            ]);
            let v = f(c);
            if v < best_val {
                best = c;
                best_val = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.7;
        }
    }
    best_val
}

/// Best rigid (proper rotation) fit of `a` onto `b` over cyclic relabelings
/// and orientation reversal; returns the largest vertex deviation.
pub fn aligned_deviation(a: &[V], b: &[V]) -> f64 {
    let n = a.len();
    assert_eq!(n, b.len());
    let mut best = f64::INFINITY;
    for reversed in [false, true] {
        for shift in 0..n {
            let perm: Vec<V> = (0..n)
                .map(|i| {
                    let j = if reversed {
                        (shift + n - i) % n
                    } else {
                        (shift + i) % n
                    };
                    a[j]
                })
                .collect();
            best = best.min(kabsch_deviation(&perm, b));
        }
    }
    best
}

fn kabsch_deviation(a: &[V], b: &[V]) -> f64 {
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += Vector3::from(*p) * Vector3::from(*q).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (vt.transpose() * u.transpose()).determinant().signum();
    let r = vt.transpose() * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    a.iter()
        .zip(b)
        .map(|(p, q)| (r * Vector3::from(*p) - Vector3::from(*q)).norm())
        .fold(0.0, f64::max)
}
