//! Polygon measurements, validity checks and edge sampling.

use crate::error::{Error, Result};
use crate::point::Point2;

use super::{BoundaryComponent, BoundarySample, Region};

/// Shoelace area, positive for counterclockwise vertex order.
pub fn signed_area(vertices: &[Point2]) -> f64 {
    0.5 * edges(vertices).map(|(p, q)| p.cross(q)).sum::<f64>()
}

pub fn polygon_perimeter(vertices: &[Point2]) -> f64 {
    edges(vertices).map(|(p, q)| p.distance(q)).sum()
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(vertices: &[Point2]) -> Point2 {
    let a = signed_area(vertices);
    let mut c = Point2::ORIGIN;
    for (p, q) in edges(vertices) {
        c += (p + q) * p.cross(q);
    }
    c * (1.0 / (6.0 * a))
}

fn edges(vertices: &[Point2]) -> impl Iterator<Item = (Point2, Point2)> + '_ {
    let n = vertices.len();
    (0..n).map(move |i| (vertices[i], vertices[(i + 1) % n]))
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point2, q: Point2, r: Point2) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True if no two non-adjacent edges meet and no vertex is repeated.
pub fn is_simple(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if vertices[i] == vertices[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

/// True if all turns have the same (nonzero) orientation.
pub fn is_convex(vertices: &[Point2]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    let turns: Vec<f64> = (0..n)
        .map(|i| orient(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]))
        .collect();
    turns.iter().all(|&t| t > 0.0) || turns.iter().all(|&t| t < 0.0)
}

/// Ray-crossing test. Points on the boundary may go either way.
pub fn point_in_polygon(vertices: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    for (a, b) in edges(vertices) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn validate(vertices: &[Point2]) -> Result<()> {
    if vertices.len() < 3 {
        return Err(Error::InvalidGeometry(format!("polygon needs at least 3 vertices, got {}", vertices.len())));
    }
    if vertices.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite vertex".into()));
    }
    if !is_simple(vertices) {
        return Err(Error::InvalidGeometry("polygon is self-intersecting".into()));
    }
    let area = signed_area(vertices);
    if area <= 0.0 {
        return Err(Error::InvalidGeometry(format!(
            "vertices must be counterclockwise (signed area {area})"
        )));
    }
    Ok(())
}

/// Split `total` samples over edges proportionally to length (largest
/// remainder), with at least one sample per edge.
fn allocate(lengths: &[f64], total: usize) -> Vec<usize> {
    let n = lengths.len();
    let total = total.max(n);
    let perimeter: f64 = lengths.iter().sum();
    let exact: Vec<f64> = lengths.iter().map(|l| total as f64 * l / perimeter).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| (e.floor() as usize).max(1)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (ri, rj) = (exact[i] - counts[i] as f64, exact[j] - counts[j] as f64);
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    let mut assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle() {
        if assigned >= total {
            break;
        }
        counts[i] += 1;
        assigned += 1;
    }
    for &i in order.iter().rev().cycle() {
        if assigned <= total {
            break;
        }
        if counts[i] > 1 {
            counts[i] -= 1;
            assigned -= 1;
        }
    }
    counts
}

/// Sample the boundary at edge midpoint rules: on an edge with `k` samples
/// the nodes sit at parameters `(j + ½)/k`, so vertices are never used.
pub(super) fn polygon_component(vertices: &[Point2], count: usize) -> Result<BoundaryComponent> {
    validate(vertices)?;
    let lengths: Vec<f64> = edges(vertices).map(|(p, q)| p.distance(q)).collect();
    let counts = allocate(&lengths, count);
    let mut samples = Vec::with_capacity(counts.iter().sum());
    for ((p, q), (&len, &k)) in edges(vertices).zip(lengths.iter().zip(&counts)) {
        let d = q - p;
        let normal = Point2::new(d.y / len, -d.x / len);
        let weight = len / k as f64;
        for j in 0..k {
            let t = (j as f64 + 0.5) / k as f64;
            samples.push(BoundarySample {
                position: p + d * t,
                normal,
                weight,
            });
        }
    }
    Ok(BoundaryComponent {
        region: Region::Polygon(vertices.to_vec()),
        samples,
        area: signed_area(vertices),
        perimeter: lengths.iter().sum(),
    })
}
