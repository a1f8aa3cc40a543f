//! Seeded random polygons.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::point::Point2;

use super::{is_convex, is_simple, polygon_centroid, polygon_perimeter, signed_area};

/// Translate the centroid to the origin and scale to `area`.
fn normalize(vertices: Vec<Point2>, area: f64) -> Vec<Point2> {
    let c = polygon_centroid(&vertices);
    let s = (area / signed_area(&vertices)).sqrt();
    vertices.into_iter().map(|v| (v - c) * s).collect()
}

/// Random convex `n`-gon (Valtr's algorithm: random edge vectors summing to
/// zero, sorted by angle), centred at its centroid and scaled to `area`.
pub fn random_convex_polygon(n: usize, seed: u64, area: f64) -> Result<Vec<Point2>> {
    if n < 3 {
        return Err(Error::InvalidGeometry(format!("a polygon needs at least 3 sides, got {n}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidGeometry(format!("area must be positive, got {area}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = valtr(n, &mut rng);
        if is_convex(&v) && signed_area(&v) > 0.0 {
            return Ok(normalize(v, area));
        }
    }
}

fn chain_vectors(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    let (min, max) = (xs[0], xs[n - 1]);
    let (mut last_a, mut last_b) = (min, min);
    let mut out = Vec::with_capacity(n);
    for &x in &xs[1..n - 1] {
        if rng.random::<bool>() {
            out.push(x - last_a);
            last_a = x;
        } else {
            out.push(last_b - x);
            last_b = x;
        }
    }
    out.push(max - last_a);
    out.push(last_b - max);
    out
}

fn valtr(n: usize, rng: &mut impl Rng) -> Vec<Point2> {
    let xv = chain_vectors(rng, n);
    let mut yv = chain_vectors(rng, n);
    yv.shuffle(rng);
    let mut edges: Vec<Point2> = xv.into_iter().zip(yv).map(|(x, y)| Point2::new(x, y)).collect();
    edges.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
    let mut p = Point2::ORIGIN;
    edges
        .into_iter()
        .map(|e| {
            let v = p;
            p += e;
            v
        })
        .collect()
}

/// Random simple quadrilateral of the given area: four uniform points in
/// the unit square ordered by angle about their mean. Samples that are
/// self-intersecting, violate `P² >= 16 A`, or (with `convex`) are not convex
/// are redrawn.
pub fn random_quadrilateral(seed: u64, area: f64, convex: bool) -> Result<Vec<Point2>> {
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidGeometry(format!("area must be positive, got {area}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let pts: Vec<Point2> = (0..4).map(|_| Point2::new(rng.random(), rng.random())).collect();
        let mean = pts.iter().fold(Point2::ORIGIN, |a, p| a + *p) * 0.25;
        let mut v = pts;
        v.sort_by(|a, b| (*a - mean).angle().total_cmp(&(*b - mean).angle()));
        let a = signed_area(&v);
        if !(a > 1e-9) || !is_simple(&v) || (convex && !is_convex(&v)) {
            continue;
        }
        let p = polygon_perimeter(&v);
        if p * p < 16.0 * a {
            continue;
        }
        return Ok(normalize(v, area));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_polygons_are_convex_with_requested_area() {
        for seed in 0..200 {
            for n in [3, 5, 8] {
                let v = random_convex_polygon(n, seed, 1.0).unwrap();
                assert_eq!(v.len(), n);
                assert!(is_convex(&v));
                assert!((signed_area(&v) - 1.0).abs() < 1e-12);
                assert!(polygon_centroid(&v).norm() < 1e-12);
            }
        }
        assert!(random_convex_polygon(2, 0, 1.0).is_err());
    }

    #[test]
    fn convex_polygon_is_deterministic() {
        assert_eq!(random_convex_polygon(5, 42, 1.0).unwrap(), random_convex_polygon(5, 42, 1.0).unwrap());
        assert_ne!(random_convex_polygon(5, 42, 1.0).unwrap(), random_convex_polygon(5, 43, 1.0).unwrap());
    }

    #[test]
    fn quadrilaterals_are_simple_with_real_bound() {
        let mut non_convex = 0;
        for seed in 0..1000 {
            for convex in [true, false] {
                let v = random_quadrilateral(seed, 1.0, convex).unwrap();
                assert_eq!(v.len(), 4);
                assert!(is_simple(&v));
                let a = signed_area(&v);
                assert!((a - 1.0).abs() < 1e-12);
                let p = polygon_perimeter(&v);
                assert!(p * p >= 16.0 * a);
                if convex {
                    assert!(is_convex(&v));
                } else if !is_convex(&v) {
                    non_convex += 1;
                }
            }
        }
        assert!(non_convex > 0);
    }
}
