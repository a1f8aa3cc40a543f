//! Planar domains and their MFS discretization: boundary collocation points
//! with outward normals, exterior source points and interior probe points.

mod fourier;
pub mod halton;
mod polygon;
mod random;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point2;

pub use fourier::{fit_fourier, fit_fourier_about, fourier_domain, interpolate_shapes, FourierShape, RadialFit};
pub use polygon::{
    is_convex, is_simple, point_in_polygon, polygon_centroid, polygon_perimeter, signed_area,
};
pub use random::{random_convex_polygon, random_quadrilateral};

use halton::Halton2;

/// Discretization sizes shared by every domain generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Number of source points `N`.
    pub sources: usize,
    /// Number of boundary collocation points `M`.
    pub boundary: usize,
    /// Number of interior probe points `L`.
    pub interior: usize,
    /// Outward displacement of the sources.
    pub eta: f64,
}

impl Discretization {
    pub const DEFAULT_INTERIOR: usize = 228;
    pub const DEFAULT_ETA: f64 = 0.05;

    /// `N` sources with the default `M = 2N`, `L = 228`, `η = 0.05`.
    pub fn with_sources(sources: usize) -> Self {
        Self {
            sources,
            boundary: 2 * sources,
            interior: Self::DEFAULT_INTERIOR,
            eta: Self::DEFAULT_ETA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources == 0 || self.interior == 0 {
            return Err(Error::InvalidGeometry("source and interior counts must be positive".into()));
        }
        if self.boundary < self.sources {
            return Err(Error::InvalidGeometry(format!(
                "boundary count {} below source count {}",
                self.boundary, self.sources
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::SourcePlacement { index: 0, x: f64::NAN, y: f64::NAN });
        }
        Ok(())
    }
}

impl Default for Discretization {
    fn default() -> Self {
        Self::with_sources(300)
    }
}

/// A boundary collocation point with its outward unit normal and the arc
/// length it represents in boundary quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub position: Point2,
    pub normal: Point2,
    pub weight: f64,
}

/// Exact description of a domain, used for membership tests.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Disk { center: Point2, radius: f64 },
    Polygon(Vec<Point2>),
    Fourier { shape: FourierShape, center: Point2 },
    Union(Vec<Region>),
}

impl Region {
    /// Strict interior membership.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Region::Disk { center, radius } => p.distance(*center) < *radius,
            Region::Polygon(vertices) => point_in_polygon(vertices, p),
            Region::Fourier { shape, center } => {
                let q = p - *center;
                q.norm() < shape.radius(q.angle())
            }
            Region::Union(parts) => parts.iter().any(|r| r.contains(p)),
        }
    }

    /// True if the boundary has vertices.
    pub fn has_corners(&self) -> bool {
        match self {
            Region::Polygon(_) => true,
            Region::Disk { .. } | Region::Fourier { .. } => false,
            Region::Union(parts) => parts.iter().any(Region::has_corners),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        match self {
            Region::Disk { center, radius } => (
                *center - Point2::new(*radius, *radius),
                *center + Point2::new(*radius, *radius),
            ),
            Region::Polygon(vertices) => bbox_of(vertices.iter().copied()),
            Region::Fourier { shape, center } => {
                let n = 4096;
                bbox_of((0..n).map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    *center + Point2::from_polar(shape.radius(t) * (1.0 + 1e-6), t)
                }))
            }
            Region::Union(parts) => {
                let boxes: Vec<_> = parts.iter().map(Region::bounding_box).collect();
                bbox_of(boxes.iter().flat_map(|(lo, hi)| [*lo, *hi]))
            }
        }
    }
}

fn bbox_of(points: impl Iterator<Item = Point2>) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

/// One connected piece of a domain before source/probe placement.
#[derive(Debug, Clone)]
pub struct BoundaryComponent {
    pub region: Region,
    pub samples: Vec<BoundarySample>,
    pub area: f64,
    pub perimeter: f64,
}

/// A domain ready for the MFS: collocation points, sources, interior probes.
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct DiscretizedDomain {
    boundary: Vec<BoundarySample>,
    sources: Vec<Point2>,
    interior: Vec<Point2>,
    area: f64,
    perimeter: f64,
    components: usize,
    region: Region,
}

impl DiscretizedDomain {
    /// Assemble a domain from one or more disjoint components. Collocation
    /// points are the concatenation of each component's samples; sources
    /// are selected uniformly from that list and pushed outward by `η`;
    /// interior probes come from the Halton sequence on the union.
    pub fn from_components(components: Vec<BoundaryComponent>, disc: &Discretization) -> Result<Self> {
        disc.validate()?;
        if components.is_empty() {
            return Err(Error::InvalidGeometry("no components".into()));
        }
        let count = components.len();
        let area = components.iter().map(|c| c.area).sum();
        let perimeter = components.iter().map(|c| c.perimeter).sum();
        let boundary: Vec<BoundarySample> =
            components.iter().flat_map(|c| c.samples.iter().copied()).collect();
        let region = if count == 1 {
            components.into_iter().next().unwrap().region
        } else {
            Region::Union(components.into_iter().map(|c| c.region).collect())
        };
        if boundary.len() < disc.sources {
            return Err(Error::InvalidGeometry(format!(
                "{} boundary samples cannot carry {} sources",
                boundary.len(),
                disc.sources
            )));
        }
        let sources = source_points(&boundary, disc.sources, disc.eta, &region)?;
        let interior = halton_interior(&region, disc.interior);
        Ok(Self {
            boundary,
            sources,
            interior,
            area,
            perimeter,
            components: count,
            region,
        })
    }

    pub fn boundary(&self) -> &[BoundarySample] {
        &self.boundary
    }

    pub fn sources(&self) -> &[Point2] {
        &self.sources
    }

    pub fn interior(&self) -> &[Point2] {
        &self.interior
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.region.contains(p)
    }

    /// Area recomputed from the collocation points, `½ ∮ x·n ds`.
    pub fn boundary_area(&self) -> f64 {
        0.5 * self.boundary.iter().map(|s| s.position.dot(s.normal) * s.weight).sum::<f64>()
    }

    /// Perimeter recomputed from the collocation weights.
    pub fn boundary_length(&self) -> f64 {
        self.boundary.iter().map(|s| s.weight).sum()
    }
}

/// Sources `y_j = x_i + η n_i` from every `(M/N)`-th collocation point.
/// Fails if `η <= 0` or a source is not strictly outside `region`.
pub fn source_points(
    boundary: &[BoundarySample],
    count: usize,
    eta: f64,
    region: &Region,
) -> Result<Vec<Point2>> {
    let m = boundary.len();
    if count == 0 || count > m {
        return Err(Error::InvalidGeometry(format!("cannot place {count} sources on {m} samples")));
    }
    (0..count)
        .map(|j| {
            let sample = &boundary[j * m / count];
            let y = sample.position + sample.normal * eta;
            if !(eta > 0.0) || region.contains(y) || !y.is_finite() {
                Err(Error::SourcePlacement { index: j, x: y.x, y: y.y })
            } else {
                Ok(y)
            }
        })
        .collect()
}

/// First `count` points of the (2,3)-Halton sequence mapped to the bounding
/// box of `region` that fall strictly inside it.
pub fn halton_interior(region: &Region, count: usize) -> Vec<Point2> {
    let (lo, hi) = region.bounding_box();
    let span = hi - lo;
    Halton2::default()
        .map(|(u, v)| Point2::new(lo.x + u * span.x, lo.y + v * span.y))
        .filter(|p| region.contains(*p))
        .take(count)
        .collect()
}

fn check_positive(what: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("{what} must be positive, got {value}")))
    }
}

/// Boundary of a circle with `count` equispaced samples.
pub fn disk_component(center: Point2, radius: f64, count: usize) -> Result<BoundaryComponent> {
    check_positive("radius", radius)?;
    let weight = 2.0 * PI * radius / count as f64;
    let samples = (0..count)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / count as f64;
            let normal = Point2::from_polar(1.0, theta);
            BoundarySample {
                position: center + normal * radius,
                normal,
                weight,
            }
        })
        .collect();
    Ok(BoundaryComponent {
        region: Region::Disk { center, radius },
        samples,
        area: PI * radius * radius,
        perimeter: 2.0 * PI * radius,
    })
}

/// Disk of the given radius centred at the origin.
pub fn disk(radius: f64, disc: &Discretization) -> Result<DiscretizedDomain> {
    DiscretizedDomain::from_components(vec![disk_component(Point2::ORIGIN, radius, disc.boundary)?], disc)
}

/// Two disjoint disks of equal area, `total_area / 2` each, separated by a
/// gap of `gap` along the horizontal axis. `M`, `N` are split evenly.
pub fn two_disks(total_area: f64, gap: f64, disc: &Discretization) -> Result<DiscretizedDomain> {
    check_positive("area", total_area)?;
    check_positive("gap", gap)?;
    let radius = (0.5 * total_area / PI).sqrt();
    let offset = radius + 0.5 * gap;
    let half = disc.boundary / 2;
    let parts = vec![
        disk_component(Point2::new(-offset, 0.0), radius, half)?,
        disk_component(Point2::new(offset, 0.0), radius, disc.boundary - half)?,
    ];
    DiscretizedDomain::from_components(parts, disc)
}

/// The rectangle `(-a/2, a/2) × (-b/2, b/2)`.
pub fn rectangle(a: f64, b: f64, disc: &Discretization) -> Result<DiscretizedDomain> {
    check_positive("side a", a)?;
    check_positive("side b", b)?;
    let (ha, hb) = (0.5 * a, 0.5 * b);
    polygon(
        &[
            Point2::new(-ha, -hb),
            Point2::new(ha, -hb),
            Point2::new(ha, hb),
            Point2::new(-ha, hb),
        ],
        disc,
    )
}

/// A simple counterclockwise polygon.
pub fn polygon(vertices: &[Point2], disc: &Discretization) -> Result<DiscretizedDomain> {
    DiscretizedDomain::from_components(vec![polygon::polygon_component(vertices, disc.boundary)?], disc)
}

/// Triangle parameter `(x, y)` in the admissible region
/// `x >= 0, y > 0, (x+1)² + y² <= 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleParam {
    pub x: f64,
    pub y: f64,
}

impl TriangleParam {
    const SLACK: f64 = 1e-12;

    pub fn new(x: f64, y: f64) -> Result<Self> {
        let p = Self { x, y };
        if p.is_admissible() {
            Ok(p)
        } else {
            Err(Error::InvalidGeometry(format!("({x}, {y}) outside the admissible triangle region")))
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.x >= -Self::SLACK
            && self.y > 0.0
            && (self.x + 1.0).powi(2) + self.y * self.y <= 4.0 + Self::SLACK
    }

    /// Vertices `(-1,0), (1,0), (x,y)`, optionally scaled by `1/√y` to unit area.
    pub fn vertices(&self, unit_area: bool) -> [Point2; 3] {
        let s = if unit_area { 1.0 / self.y.sqrt() } else { 1.0 };
        [
            Point2::new(-s, 0.0),
            Point2::new(s, 0.0),
            Point2::new(self.x * s, self.y * s),
        ]
    }
}

pub fn admissible_triangle(p: TriangleParam, unit_area: bool, disc: &Discretization) -> Result<DiscretizedDomain> {
    if !p.is_admissible() {
        return Err(Error::InvalidGeometry(format!(
            "({}, {}) outside the admissible triangle region",
            p.x, p.y
        )));
    }
    polygon(&p.vertices(unit_area), disc)
}

/// Vertices of the regular `n`-gon of the given area, centred at the origin
/// with a horizontal bottom edge.
pub fn regular_polygon_vertices(n: usize, area: f64) -> Result<Vec<Point2>> {
    if n < 3 {
        return Err(Error::InvalidGeometry(format!("a polygon needs at least 3 sides, got {n}")));
    }
    check_positive("area", area)?;
    let nf = n as f64;
    let circumradius = (2.0 * area / (nf * (2.0 * PI / nf).sin())).sqrt();
    let phase = -0.5 * PI + PI / nf;
    Ok((0..n)
        .map(|k| Point2::from_polar(circumradius, phase + 2.0 * PI * k as f64 / nf))
        .collect())
}

pub fn regular_polygon(n: usize, area: f64, disc: &Discretization) -> Result<DiscretizedDomain> {
    polygon(&regular_polygon_vertices(n, area)?, disc)
}

/// JSON record for a domain description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    pub area: f64,
    pub perimeter: f64,
}

impl ShapeRecord {
    pub fn from_polygon(vertices: &[Point2]) -> Self {
        Self {
            kind: "polygon".into(),
            vertices: Some(vertices.iter().map(|p| [p.x, p.y]).collect()),
            a0: None,
            a: None,
            b: None,
            area: signed_area(vertices),
            perimeter: polygon_perimeter(vertices),
        }
    }

    pub fn from_fourier(shape: &FourierShape) -> Self {
        Self {
            kind: "fourier".into(),
            vertices: None,
            a0: Some(shape.a0()),
            a: Some(shape.a().to_vec()),
            b: Some(shape.b().to_vec()),
            area: 1.0,
            perimeter: shape.perimeter(4096),
        }
    }

    pub fn to_fourier(&self) -> Result<FourierShape> {
        match (self.kind.as_str(), self.a0, &self.a, &self.b) {
            ("fourier", Some(a0), Some(a), Some(b)) => FourierShape::new(a0, a.clone(), b.clone()),
            _ => Err(Error::InvalidShape(format!("record of kind '{}' is not a Fourier shape", self.kind))),
        }
    }

    pub fn to_polygon(&self) -> Result<Vec<Point2>> {
        match (self.kind.as_str(), &self.vertices) {
            ("polygon", Some(v)) => Ok(v.iter().map(|&[x, y]| Point2::new(x, y)).collect()),
            _ => Err(Error::InvalidShape(format!("record of kind '{}' is not a polygon", self.kind))),
        }
    }

    /// Discretize the recorded domain.
    pub fn domain(&self, disc: &Discretization) -> Result<DiscretizedDomain> {
        match self.kind.as_str() {
            "polygon" => polygon(&self.to_polygon()?, disc),
            "fourier" => fourier_domain(&self.to_fourier()?, disc),
            other => Err(Error::InvalidShape(format!("unknown shape kind '{other}'"))),
        }
    }
}
