//! Star-shaped domains with a truncated Fourier radial function,
//! normalized to unit area.

use std::f64::consts::PI;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point2;

use super::{polygon_centroid, signed_area, BoundaryComponent, BoundarySample, DiscretizedDomain, Discretization, Region};

/// Grid used to check positivity of the radius and to integrate the perimeter.
const CHECK_GRID: usize = 4096;

/// Coefficients `(a0, a_m, b_m)` of
/// `r(θ) = c · (a0 + Σ a_m cos mθ + Σ b_m sin mθ)` with
/// `c = √(2/π) / √(2a0² + Σ a_m² + Σ b_m²)`, so that the enclosed area is 1
/// whatever the scale of the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct FourierShape {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct RawShape {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl TryFrom<RawShape> for FourierShape {
    type Error = Error;
    fn try_from(raw: RawShape) -> Result<Self> {
        FourierShape::new(raw.a0, raw.a, raw.b)
    }
}

impl From<FourierShape> for RawShape {
    fn from(s: FourierShape) -> Self {
        RawShape { a0: s.a0, a: s.a, b: s.b }
    }
}

impl FourierShape {
    pub fn new(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidShape(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if !a0.is_finite() || a.iter().chain(&b).any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("non-finite coefficient".into()));
        }
        let energy = 2.0 * a0 * a0 + a.iter().chain(&b).map(|c| c * c).sum::<f64>();
        if energy == 0.0 {
            return Err(Error::InvalidShape("all coefficients are zero".into()));
        }
        let shape = Self {
            a0,
            a,
            b,
            scale: (2.0 / PI).sqrt() / energy.sqrt(),
        };
        let min = shape.min_radius(CHECK_GRID);
        if !(min > 0.0) {
            return Err(Error::InvalidShape(format!("radius is not positive (minimum {min:e})")));
        }
        Ok(shape)
    }

    /// The unit-area disk.
    pub fn disk(modes: usize) -> Self {
        Self::new(1.0, vec![0.0; modes], vec![0.0; modes]).expect("constant radius is valid")
    }

    /// Coefficient vector `[a0, a_1..a_M, b_1..b_M]` back to a shape.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        if v.is_empty() || v.len() % 2 == 0 {
            return Err(Error::InvalidShape(format!("coefficient vector length {} is not 2M+1", v.len())));
        }
        let m = (v.len() - 1) / 2;
        Self::new(v[0], v[1..=m].to_vec(), v[m + 1..].to_vec())
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.modes());
        v.push(self.a0);
        v.extend_from_slice(&self.a);
        v.extend_from_slice(&self.b);
        v
    }

    pub fn modes(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// The same shape with coefficients equal to the actual radial Fourier
    /// coefficients of the unit-area curve.
    pub fn normalized(&self) -> Self {
        let s = self.scale;
        Self {
            a0: self.a0 * s,
            a: self.a.iter().map(|c| c * s).collect(),
            b: self.b.iter().map(|c| c * s).collect(),
            scale: 1.0,
        }
    }

    /// `r(θ)` and `r'(θ)`.
    pub fn radius_and_derivative(&self, theta: f64) -> (f64, f64) {
        let mut r = self.a0;
        let mut dr = 0.0;
        for (m, (am, bm)) in self.a.iter().zip(&self.b).enumerate() {
            let k = (m + 1) as f64;
            let (s, c) = (k * theta).sin_cos();
            r += am * c + bm * s;
            dr += k * (bm * c - am * s);
        }
        (self.scale * r, self.scale * dr)
    }

    pub fn radius(&self, theta: f64) -> f64 {
        self.radius_and_derivative(theta).0
    }

    pub fn min_radius(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|i| self.radius(2.0 * PI * i as f64 / grid as f64))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn point(&self, theta: f64) -> Point2 {
        Point2::from_polar(self.radius(theta), theta)
    }

    /// Boundary sample at `θ`: position, outward normal and the speed
    /// `|γ'(θ)|`.
    fn sample(&self, theta: f64) -> (Point2, Point2, f64) {
        let (r, dr) = self.radius_and_derivative(theta);
        let (s, c) = theta.sin_cos();
        let tangent = Point2::new(dr * c - r * s, dr * s + r * c);
        let speed = tangent.norm();
        (
            Point2::new(r * c, r * s),
            Point2::new(tangent.y / speed, -tangent.x / speed),
            speed,
        )
    }

    /// Perimeter by the trapezoidal rule on `grid` points (spectrally accurate).
    pub fn perimeter(&self, grid: usize) -> f64 {
        let h = 2.0 * PI / grid as f64;
        (0..grid).map(|i| self.sample(i as f64 * h).2).sum::<f64>() * h
    }

    pub(super) fn component(&self, center: Point2, count: usize) -> BoundaryComponent {
        let h = 2.0 * PI / count as f64;
        let samples = (0..count)
            .map(|i| {
                let (p, n, speed) = self.sample(i as f64 * h);
                BoundarySample {
                    position: center + p,
                    normal: n,
                    weight: speed * h,
                }
            })
            .collect();
        BoundaryComponent {
            region: Region::Fourier {
                shape: self.clone(),
                center,
            },
            samples,
            area: 1.0,
            perimeter: self.perimeter(CHECK_GRID),
        }
    }
}

/// Discretize a Fourier shape centred at the origin, `M` samples at
/// equispaced `θ`.
pub fn fourier_domain(shape: &FourierShape, disc: &Discretization) -> Result<DiscretizedDomain> {
    let min = shape.min_radius(CHECK_GRID.max(disc.boundary));
    if !(min > 0.0) {
        return Err(Error::InvalidShape(format!("radius is not positive (minimum {min:e})")));
    }
    DiscretizedDomain::from_components(vec![shape.component(Point2::ORIGIN, disc.boundary)], disc)
}

/// Result of a least-squares radial fit.
#[derive(Debug, Clone)]
pub struct RadialFit {
    /// Unit-area shape with the fitted profile.
    pub shape: FourierShape,
    /// Expansion centre.
    pub center: Point2,
    /// Fitted radial coefficients `[c0, c_1..c_M, d_1..d_M]` at the
    /// original scale.
    pub coefficients: Vec<f64>,
    /// Largest pointwise radial misfit.
    pub max_deviation: f64,
}

impl RadialFit {
    /// Evaluate the fitted radius at the original scale.
    pub fn radius(&self, theta: f64) -> f64 {
        eval_series(&self.coefficients, theta)
    }
}

fn eval_series(c: &[f64], theta: f64) -> f64 {
    let m = (c.len() - 1) / 2;
    let mut r = c[0];
    for k in 1..=m {
        let (s, co) = (k as f64 * theta).sin_cos();
        r += c[k] * co + c[m + k] * s;
    }
    r
}

/// Least-squares Fourier fit of the radial function of a closed curve,
/// expanded about the polygon centroid of the points.
pub fn fit_fourier(points: &[Point2], modes: usize) -> Result<FourierShape> {
    let center = if signed_area(points).abs() > 0.0 {
        polygon_centroid(points)
    } else {
        points.iter().fold(Point2::ORIGIN, |acc, p| acc + *p) * (1.0 / points.len() as f64)
    };
    fit_fourier_about(points, center, modes).map(|f| f.shape)
}

/// Least-squares radial fit about a given centre. Fails unless the polar
/// angle of the points about `center` advances monotonically through one
/// full turn (the curve is star-shaped with respect to `center`).
pub fn fit_fourier_about(points: &[Point2], center: Point2, modes: usize) -> Result<RadialFit> {
    let unknowns = 2 * modes + 1;
    if points.len() < unknowns {
        return Err(Error::FitFailure(format!(
            "{} points cannot determine {unknowns} coefficients",
            points.len()
        )));
    }
    let polar: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let q = *p - center;
            (q.angle(), q.norm())
        })
        .collect();
    if polar.iter().any(|&(_, r)| !(r > 0.0)) {
        return Err(Error::FitFailure("a point coincides with the centre".into()));
    }
    let n = polar.len();
    let steps: Vec<f64> = (0..n)
        .map(|i| {
            let d = polar[(i + 1) % n].0 - polar[i].0;
            (d + PI).rem_euclid(2.0 * PI) - PI
        })
        .collect();
    let winding: f64 = steps.iter().sum();
    let monotone = steps.iter().all(|&d| d > 0.0) || steps.iter().all(|&d| d < 0.0);
    if !monotone || (winding.abs() - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::FitFailure("radius is multi-valued: the curve is not star-shaped about its centroid".into()));
    }

    let design = Mat::<f64>::from_fn(n, unknowns, |i, j| {
        let theta = polar[i].0;
        match j {
            0 => 1.0,
            j if j <= modes => (j as f64 * theta).cos(),
            j => ((j - modes) as f64 * theta).sin(),
        }
    });
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| polar[i].1);
    let sol = design.qr().solve_lstsq(&rhs);
    let coefficients: Vec<f64> = (0..unknowns).map(|j| sol[(j, 0)]).collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::FitFailure("least-squares system is singular".into()));
    }
    let max_deviation = polar
        .iter()
        .map(|&(t, r)| (eval_series(&coefficients, t) - r).abs())
        .fold(0.0, f64::max);
    let shape = FourierShape::from_vector(&coefficients)
        .map_err(|e| Error::FitFailure(format!("fitted radius is invalid: {e}")))?;
    Ok(RadialFit {
        shape,
        center,
        coefficients,
        max_deviation,
    })
}

/// Radial interpolation `(1-t) d + t s` of the normalized coefficient
/// vectors (padded to a common number of modes), renormalized to unit area.
pub fn interpolate_shapes(d: &FourierShape, s: &FourierShape, t: f64) -> Result<FourierShape> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidShape(format!("interpolation parameter {t} outside [0, 1]")));
    }
    let (d, s) = (d.normalized(), s.normalized());
    let modes = d.modes().max(s.modes());
    let pad = |v: &[f64]| {
        let mut v = v.to_vec();
        v.resize(modes, 0.0);
        v
    };
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        pad(x).iter().zip(pad(y)).map(|(x, y)| (1.0 - t) * x + t * y).collect()
    };
    FourierShape::new((1.0 - t) * d.a0 + t * s.a0, mix(&d.a, &s.a), mix(&d.b, &s.b))
}
