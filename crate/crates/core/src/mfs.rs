//! Method of fundamental solutions for the Dirac eigenvalue problem.
//!
//! Eliminating `u₂` reduces `H u = λ u` to the Helmholtz equation
//! `-Δu₁ = k² u₁`, `k = √(λ² - m²)`, with the oblique boundary condition
//! `i(∂₁ + i∂₂)u₁ + i(λ + m)(n₁ + i n₂)u₁ = 0`, and `u₂` is recovered as
//! `-i(∂₁ + i∂₂)u₁ / (λ + m)`. Eliminating `u₁` instead gives the same
//! Helmholtz equation for `u₂` with `(λ - m)u₂ = (n₁ + i n₂)(∂₁ - i∂₂)u₂`;
//! both reductions are available and must agree.
//!
//! `u` is expanded in fundamental solutions centred at exterior sources.
//! The subspace angle technique stacks the boundary operator rows `A₁` on
//! top of interior value rows `A₂`, orthonormalizes the columns, and
//! measures how close the span comes to functions that satisfy the boundary
//! condition: `s(λ) = σ_min(Q_B)` where `Q_B` are the boundary rows of `Q`.

use faer::linalg::triangular_solve::solve_upper_triangular_in_place;
use faer::{Mat, Par, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundarySample, Discretization, DiscretizedDomain, Region};
use crate::point::Point2;
use crate::specfun::{helmholtz_kernel, helmholtz_kernel_lanes, KernelEval, LANES};

/// Smallest admissible gap `λ - m`: the kernel is singular as `k → 0`.
pub const MIN_GAP: f64 = 1e-6;

/// A refined minimum of `s(λ)` at or below this value is an eigenvalue.
pub const DETECTION_THRESHOLD: f64 = 1e-3;

/// Detection threshold for domains with corners. Eigenfunctions are
/// singular at the vertices, so the minima of `s` plateau near `1e-2`
/// while the minimizers still converge.
pub const CORNER_DETECTION_THRESHOLD: f64 = 0.1;

/// Default detection threshold for a domain.
pub fn detection_threshold(dom: &DiscretizedDomain) -> f64 {
    if dom.region().has_corners() {
        CORNER_DETECTION_THRESHOLD
    } else {
        DETECTION_THRESHOLD
    }
}

/// Below this value the cheap Gram-matrix estimate of `σ_min(Q_B)` loses
/// relative accuracy, and the boundary block is decomposed directly.
const ACCURATE_BELOW: f64 = 1e-4;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which spinor component the Helmholtz reduction is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Solve for `u₁`; boundary condition `i(∂₁+i∂₂)u₁ + i(λ+m) n u₁ = 0`.
    #[default]
    Upper,
    /// Solve for `u₂`; boundary condition `n (∂₁-i∂₂)u₂ - (λ-m) u₂ = 0`.
    Lower,
}

/// Mass, discretization sizes and reduction for a spectral computation.
/// Domains passed alongside are expected to be built with
/// `discretization`; the matrices follow the domain's actual point sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub mass: f64,
    pub discretization: Discretization,
    #[serde(default)]
    pub reduction: Reduction,
}

impl SpectralConfig {
    pub fn new(mass: f64, discretization: Discretization) -> Result<Self> {
        let cfg = Self {
            mass,
            discretization,
            reduction: Reduction::Upper,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_reduction(self, reduction: Reduction) -> Self {
        Self { reduction, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidSpectralParameter {
                lambda: f64::NAN,
                mass: self.mass,
            });
        }
        self.discretization.validate()
    }

    /// `k = √(λ² - m²)`, rejecting `λ <= m`.
    pub fn wavenumber(&self, lambda: f64) -> Result<f64> {
        wavenumber(lambda, self.mass)
    }
}

fn wavenumber(lambda: f64, mass: f64) -> Result<f64> {
    if !(lambda > mass && lambda.is_finite()) {
        return Err(Error::InvalidSpectralParameter { lambda, mass });
    }
    let k = ((lambda - mass) * (lambda + mass)).sqrt();
    if k > 0.0 {
        Ok(k)
    } else {
        Err(Error::InvalidSpectralParameter { lambda, mass })
    }
}

fn complex_normal(n: Point2) -> Complex64 {
    Complex64::new(n.x, n.y)
}

/// Boundary operator applied to a kernel evaluation.
#[inline]
fn operator_entry(reduction: Reduction, lambda: f64, mass: f64, normal: Point2, kern: &KernelEval) -> Complex64 {
    let n = complex_normal(normal);
    let [g1, g2] = kern.grad;
    match reduction {
        Reduction::Upper => I * (g1 + I * g2) + I * (lambda + mass) * n * kern.value,
        Reduction::Lower => n * (g1 - I * g2) - (lambda - mass) * kern.value,
    }
}

/// `B Φ = i(∂₁Φ + i∂₂Φ) + i(λ+m)(n₁+in₂)Φ` at `x.position - y`.
pub fn boundary_operator_row(lambda: f64, mass: f64, x: &BoundarySample, y: Point2) -> Result<Complex64> {
    boundary_operator_row_with(Reduction::Upper, lambda, mass, x, y)
}

/// Boundary operator of either reduction at `x.position - y`.
pub fn boundary_operator_row_with(
    reduction: Reduction,
    lambda: f64,
    mass: f64,
    x: &BoundarySample,
    y: Point2,
) -> Result<Complex64> {
    let k = wavenumber(lambda, mass)?;
    let p = x.position - y;
    if !(p.norm() > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "collocation point ({}, {}) coincides with a source",
            y.x, y.y
        )));
    }
    Ok(operator_entry(reduction, lambda, mass, x.normal, &helmholtz_kernel(k, p)))
}

/// The boundary block `A₁` (M×N) and interior block `A₂` (L×N).
#[derive(Debug, Clone)]
pub struct MfsSystem {
    pub a1: Mat<Complex64>,
    pub a2: Mat<Complex64>,
}

/// Assemble `A₁[i][j] = BΦ(x_i - y_j)` and `A₂[l][j] = Φ(z_l - y_j)`.
pub fn assemble(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<MfsSystem> {
    let stacked = stacked_matrix(lambda, cfg, dom)?;
    let m = dom.boundary().len();
    Ok(MfsSystem {
        a1: stacked.get(..m, ..).to_owned(),
        a2: stacked.get(m.., ..).to_owned(),
    })
}

/// `[A₁; A₂]` as one `(M+L)×N` matrix.
fn stacked_matrix(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<Mat<Complex64>> {
    let k = cfg.wavenumber(lambda)?;
    let (boundary, interior, sources) = (dom.boundary(), dom.interior(), dom.sources());
    let m = boundary.len();
    let rows = m + interior.len();
    let point = |i: usize| if i < m { boundary[i].position } else { interior[i - m] };
    let mut a = Mat::<Complex64>::zeros(rows, sources.len());
    for (j, &y) in sources.iter().enumerate() {
        let mut col = a.col_mut(j);
        for start in (0..rows).step_by(LANES) {
            // the tail chunk repeats its last row to fill the lanes
            let idx: [usize; LANES] = std::array::from_fn(|l| (start + l).min(rows - 1));
            let kern = helmholtz_kernel_lanes(k, idx.map(|i| point(i) - y));
            for (l, &i) in idx.iter().enumerate().take(rows - start) {
                col[i] = if i < m {
                    operator_entry(cfg.reduction, lambda, cfg.mass, boundary[i].normal, &kern[l])
                } else {
                    kern[l].value
                };
            }
        }
    }
    for j in 0..a.ncols() {
        let col = a.col(j);
        let mut norm = 0.0;
        for i in 0..a.nrows() {
            let v = col[i];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::DegenerateConfiguration(format!(
                    "non-finite matrix entry in column {j} at lambda = {lambda}"
                )));
            }
            norm += v.norm_sqr();
        }
        if norm == 0.0 {
            return Err(Error::DegenerateConfiguration(format!("column {j} vanishes at lambda = {lambda}")));
        }
    }
    Ok(a)
}

/// Thin QR of the stacked system.
struct Orthonormalized {
    q: Mat<Complex64>,
    r: Mat<Complex64>,
    boundary_rows: usize,
}

impl Orthonormalized {
    fn new(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<Self> {
        let a = stacked_matrix(lambda, cfg, dom)?;
        if a.nrows() < a.ncols() {
            return Err(Error::DegenerateConfiguration(format!(
                "{} rows cannot orthonormalize {} columns",
                a.nrows(),
                a.ncols()
            )));
        }
        let qr = a.qr();
        Ok(Self {
            q: qr.compute_thin_Q(),
            r: qr.thin_R().to_owned(),
            boundary_rows: dom.boundary().len(),
        })
    }

    /// Singular values of `Q_B`, ascending, from the interior Gram matrix:
    /// `Q_Bᴴ Q_B = I - Q_Iᴴ Q_I`.
    fn fast_singular_values(&self) -> Result<Vec<f64>> {
        let n = self.q.ncols();
        let qi = self.q.get(self.boundary_rows.., ..);
        let gram = if qi.nrows() < n { qi * qi.adjoint() } else { qi.adjoint() * qi };
        let mu = gram
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        let mut sigma: Vec<f64> = mu.iter().rev().map(|&m| (1.0 - m).clamp(0.0, 1.0).sqrt()).collect();
        sigma.resize(n, 1.0);
        Ok(sigma)
    }

    /// Singular values of `Q_B`, ascending, by a direct decomposition.
    fn accurate_singular_values(&self) -> Result<Vec<f64>> {
        let qb = self.q.get(..self.boundary_rows, ..);
        let mut sigma = qb.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))?;
        sigma.reverse();
        Ok(sigma.into_iter().map(|s| s.min(1.0)).collect())
    }

    fn singular_values(&self) -> Result<Vec<f64>> {
        let fast = self.fast_singular_values()?;
        if fast[0] < ACCURATE_BELOW {
            self.accurate_singular_values()
        } else {
            Ok(fast)
        }
    }
}

/// `s(λ) = σ_min(Q_B)`, a value in `[0, 1]`.
pub fn sat_value(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<f64> {
    Ok(sat_singular_values(lambda, cfg, dom)?[0])
}

/// All singular values of `Q_B` in ascending order. Values well away from
/// zero come from the interior Gram matrix; when the smallest is tiny the
/// boundary block is decomposed directly so small values keep full
/// relative accuracy.
pub fn sat_singular_values(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<Vec<f64>> {
    Orthonormalized::new(lambda, cfg, dom)?.singular_values()
}

/// Singular values of `Q_B` (ascending) by direct decomposition only.
pub fn sat_singular_values_direct(lambda: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<Vec<f64>> {
    Orthonormalized::new(lambda, cfg, dom)?.accurate_singular_values()
}

/// Expansion coefficients of an eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenfunctionCoefficients {
    pub lambda: f64,
    pub mass: f64,
    pub reduction: Reduction,
    /// Unit-norm coefficient vector.
    pub alpha: Vec<Complex64>,
    pub sources: Vec<Point2>,
    /// `s(λ)` at which the coefficients were extracted.
    pub residual: f64,
    region: Region,
}

/// Coefficients of the approximate eigenfunction at a converged minimizer
/// `λ*` of `s`: the right singular vector `w` of `Q_B` for `σ_min` gives
/// `α = R⁻¹ w`, normalized.
pub fn eigenfunction(lambda_star: f64, cfg: &SpectralConfig, dom: &DiscretizedDomain) -> Result<EigenfunctionCoefficients> {
    let orth = Orthonormalized::new(lambda_star, cfg, dom)?;
    let qb = orth.q.get(..orth.boundary_rows, ..);
    let svd = qb.thin_svd().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    let n = qb.ncols();
    let residual = svd.S().column_vector()[n - 1].re;
    if residual > detection_threshold(dom) {
        return Err(Error::NotAnEigenvalue {
            lambda: lambda_star,
            residual,
        });
    }
    let mut w = svd.V().col(n - 1).to_owned().as_mat().to_owned();
    solve_upper_triangular_in_place(orth.r.as_ref(), w.as_mut(), Par::Seq);
    let norm = (0..n).map(|j| w[(j, 0)].norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateConfiguration("eigenvector back-substitution failed".into()));
    }
    Ok(EigenfunctionCoefficients {
        lambda: lambda_star,
        mass: cfg.mass,
        reduction: cfg.reduction,
        alpha: (0..n).map(|j| w[(j, 0)] / norm).collect(),
        sources: dom.sources().to_vec(),
        residual,
        region: dom.region().clone(),
    })
}

impl EigenfunctionCoefficients {
    /// `(u₁, u₂)` at any point away from the sources; no membership check.
    pub fn spinor(&self, x: Point2) -> (Complex64, Complex64) {
        let k = ((self.lambda - self.mass) * (self.lambda + self.mass)).sqrt();
        let mut value = Complex64::new(0.0, 0.0);
        let mut dbar = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (a, y) in self.alpha.iter().zip(&self.sources) {
            let kern = helmholtz_kernel(k, x - *y);
            let [g1, g2] = kern.grad;
            value += a * kern.value;
            d += a * (g1 + I * g2);
            dbar += a * (g1 - I * g2);
        }
        match self.reduction {
            Reduction::Upper => (value, -I * d / (self.lambda + self.mass)),
            Reduction::Lower => (-I * dbar / (self.lambda - self.mass), value),
        }
    }

    /// Apply a global phase `e^{iφ}` to the coefficients.
    pub fn with_phase(&self, phi: f64) -> Self {
        let z = Complex64::from_polar(1.0, phi);
        Self {
            alpha: self.alpha.iter().map(|a| a * z).collect(),
            ..self.clone()
        }
    }

    pub fn region(&self) -> &Region {
        &self.region
    }
}

/// `(u₁, u₂)` at a point strictly inside the domain.
pub fn evaluate_spinor(coeffs: &EigenfunctionCoefficients, x: Point2) -> Result<(Complex64, Complex64)> {
    if !coeffs.region.contains(x) {
        return Err(Error::Domain {
            function: "evaluate_spinor",
            value: x.norm(),
            requirement: "point strictly inside the domain",
        });
    }
    Ok(coeffs.spinor(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disk;
    use crate::specfun::fundamental_solution;

    fn sample(theta: f64) -> BoundarySample {
        let n = Point2::from_polar(1.0, theta);
        BoundarySample {
            position: n,
            normal: n,
            weight: 0.1,
        }
    }

    #[test]
    fn rejects_lambda_at_or_below_mass() {
        let dom = disk(1.0, &Discretization::with_sources(20)).unwrap();
        let cfg = SpectralConfig::new(1.0, Discretization::with_sources(20)).unwrap();
        assert!(matches!(assemble(1.0, &cfg, &dom), Err(Error::InvalidSpectralParameter { .. })));
        assert!(matches!(sat_value(0.5, &cfg, &dom), Err(Error::InvalidSpectralParameter { .. })));
        assert!(boundary_operator_row(0.9, 1.0, &sample(0.0), Point2::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn coincident_points_rejected() {
        let x = sample(0.3);
        assert!(boundary_operator_row(2.0, 0.0, &x, x.position).is_err());
    }

    #[test]
    fn operator_matches_finite_differences() {
        let (lambda, mass) = (2.3f64, 0.7);
        let k = (lambda * lambda - mass * mass).sqrt();
        let x = sample(0.8);
        let y = Point2::new(1.4, -0.3);
        let h = 1e-6;
        let phi = |p: Point2| fundamental_solution(k, p - y).unwrap();
        let d1 = (phi(x.position + Point2::new(h, 0.0)) - phi(x.position - Point2::new(h, 0.0))) / (2.0 * h);
        let d2 = (phi(x.position + Point2::new(0.0, h)) - phi(x.position - Point2::new(0.0, h))) / (2.0 * h);
        let n = complex_normal(x.normal);
        let upper = I * (d1 + I * d2) + I * (lambda + mass) * n * phi(x.position);
        assert!((boundary_operator_row(lambda, mass, &x, y).unwrap() - upper).norm() < 1e-6);
        let lower = n * (d1 - I * d2) - (lambda - mass) * phi(x.position);
        let got = boundary_operator_row_with(Reduction::Lower, lambda, mass, &x, y).unwrap();
        assert!((got - lower).norm() < 1e-6);
    }

    #[test]
    fn operator_is_linear_in_the_kernel() {
        let kern = helmholtz_kernel(1.7, Point2::new(0.4, 0.9));
        let doubled = KernelEval {
            value: kern.value * 2.0,
            grad: [kern.grad[0] * 2.0, kern.grad[1] * 2.0],
        };
        let n = Point2::from_polar(1.0, 1.1);
        for r in [Reduction::Upper, Reduction::Lower] {
            let a = operator_entry(r, 2.0, 1.0, n, &kern);
            let b = operator_entry(r, 2.0, 1.0, n, &doubled);
            assert!((b - a * 2.0).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn operator_is_continuous_in_lambda() {
        let x = sample(2.0);
        let y = Point2::new(0.0, -1.2);
        let a = boundary_operator_row(1.5, 0.0, &x, y).unwrap();
        let b = boundary_operator_row(1.5 + 1e-6, 0.0, &x, y).unwrap();
        assert!((a - b).norm() < 1e-5);
    }

    #[test]
    fn shapes_and_finiteness() {
        let disc = Discretization::with_sources(40);
        let dom = disk(1.0, &disc).unwrap();
        let cfg = SpectralConfig::new(0.0, disc).unwrap();
        let sys = assemble(2.0, &cfg, &dom).unwrap();
        assert_eq!((sys.a1.nrows(), sys.a1.ncols()), (80, 40));
        assert_eq!((sys.a2.nrows(), sys.a2.ncols()), (228, 40));
        for j in 0..40 {
            for i in 0..80 {
                assert!(sys.a1[(i, j)].re.is_finite() && sys.a1[(i, j)].im.is_finite());
            }
        }
    }

    #[test]
    fn fast_and_direct_singular_values_agree() {
        let disc = Discretization::with_sources(60);
        let dom = disk(1.0, &disc).unwrap();
        let cfg = SpectralConfig::new(0.0, disc).unwrap();
        for lambda in [0.7, 1.2, 2.0, 3.3] {
            let orth = Orthonormalized::new(lambda, &cfg, &dom).unwrap();
            let fast = orth.fast_singular_values().unwrap();
            let direct = orth.accurate_singular_values().unwrap();
            assert_eq!(fast.len(), direct.len());
            for (f, d) in fast.iter().zip(&direct) {
                assert!((f - d).abs() < 1e-7, "{f} vs {d}");
            }
            assert!(fast.iter().all(|s| (0.0..=1.0).contains(s)));
        }
    }
}
