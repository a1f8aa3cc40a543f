//! Shape optimization of eigenvalue functionals over unit-area Fourier
//! domains with the Nelder–Mead simplex method.

use serde::{Deserialize, Serialize};

use crate::eigensearch::{compute_spectrum, SearchOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::geometry::{fourier_domain, Discretization, FourierShape};
use crate::mfs::SpectralConfig;

/// Objective value assigned to invalid shapes and failed solves.
pub const PENALTY: f64 = 1e6;

/// Default number of Fourier modes.
pub const DEFAULT_MODES: usize = 8;

/// Runs stop once the best shape's minimum radius drops below this.
pub const PINCH_RADIUS: f64 = 0.02;

/// Source offset of the reduced solver.
pub const REDUCED_ETA: f64 = 0.03;

/// Detection threshold of the reduced solver.
pub const REDUCED_THRESHOLD: f64 = 0.2;

/// Inside the loop a rejected minimum below this residual means the solver
/// missed an eigenvalue, which would shift the indices above it; such
/// shapes are treated as invalid.
pub const SUSPECT_RESIDUAL: f64 = 0.75;

/// Source offset of the final re-evaluation.
pub const ACCURATE_ETA: f64 = 0.02;

/// Detection threshold of the final re-evaluation.
pub const ACCURATE_THRESHOLD: f64 = 0.2;

/// Eigenvalue functional to optimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum ObjectiveKind {
    /// Minimize `λ_k`, `k ∈ {1, 2, 3}`.
    MinimizeEigenvalue(usize),
    /// Maximize `λ_k / λ₁`, `k ∈ {2, 3}`.
    MaximizeRatio(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub mass: f64,
}

impl Objective {
    pub fn new(kind: ObjectiveKind, mass: f64) -> Result<Self> {
        let ok = match kind {
            ObjectiveKind::MinimizeEigenvalue(k) => (1..=3).contains(&k),
            ObjectiveKind::MaximizeRatio(k) => (2..=3).contains(&k),
        };
        if !ok {
            return Err(Error::InvalidSearch(format!("unsupported objective {kind:?}")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidSpectralParameter { lambda: f64::NAN, mass });
        }
        Ok(Self { kind, mass })
    }

    /// Number of eigenvalues the objective needs.
    pub fn order(&self) -> usize {
        match self.kind {
            ObjectiveKind::MinimizeEigenvalue(k) | ObjectiveKind::MaximizeRatio(k) => k,
        }
    }

    pub fn maximizes(&self) -> bool {
        matches!(self.kind, ObjectiveKind::MaximizeRatio(_))
    }

    /// Objective value read off a spectrum.
    pub fn value(&self, spectrum: &SpectrumResult) -> Result<f64> {
        match self.kind {
            ObjectiveKind::MinimizeEigenvalue(k) => spectrum.nth(k),
            ObjectiveKind::MaximizeRatio(k) => Ok(spectrum.nth(k)? / spectrum.nth(1)?),
        }
    }

    /// Value in minimization form.
    fn signed(&self, value: f64) -> f64 {
        if self.maximizes() {
            -value
        } else {
            value
        }
    }
}

/// Solver resolution used to evaluate an objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverContext {
    pub discretization: Discretization,
    pub search: SearchOptions,
}

impl SolverContext {
    /// Resolution used inside the optimization loop. Sources sit closer to
    /// the boundary than the default so that concave shapes still converge,
    /// and minima are accepted up to a loose threshold since the reduced
    /// solver cannot drive `s` to zero on them. Shapes it cannot resolve at
    /// all are treated as invalid.
    pub fn reduced() -> Self {
        let mut discretization = Discretization::with_sources(250);
        discretization.eta = REDUCED_ETA;
        Self {
            discretization,
            search: SearchOptions {
                step: 0.1,
                tol: 1e-4,
                threshold: Some(REDUCED_THRESHOLD),
                max_extensions: 0,
                abort_below: Some(SUSPECT_RESIDUAL),
                ..SearchOptions::default()
            },
        }
    }

    /// Resolution used to re-evaluate the final shape.
    pub fn accurate() -> Self {
        let mut discretization = Discretization::with_sources(400);
        discretization.eta = ACCURATE_ETA;
        Self {
            discretization,
            search: SearchOptions {
                threshold: Some(ACCURATE_THRESHOLD),
                ..SearchOptions::default()
            },
        }
    }

    /// Same settings with `n` sources.
    pub fn with_sources(mut self, n: usize) -> Self {
        let eta = self.discretization.eta;
        self.discretization = Discretization::with_sources(n);
        self.discretization.eta = eta;
        self
    }
}

/// `P: ℝ^{2M+1} → shapes`; the normalization makes the result unit-area
/// and invariant under scaling of `v`.
pub fn shape_from_vector(v: &[f64]) -> Result<FourierShape> {
    FourierShape::from_vector(v)
}

/// Spectrum of the unit-area Fourier domain with coefficient vector `v`.
pub fn shape_spectrum(shape: &FourierShape, mass: f64, order: usize, ctx: &SolverContext) -> Result<SpectrumResult> {
    let dom = fourier_domain(shape, &ctx.discretization)?;
    let cfg = SpectralConfig::new(mass, ctx.discretization)?;
    compute_spectrum(&cfg, &dom, order, &ctx.search)
}

/// Objective value of the shape `P(v)`, or `None` if the shape is invalid
/// or the spectrum cannot be computed.
pub fn objective_value(obj: &Objective, v: &[f64], ctx: &SolverContext) -> Option<f64> {
    let shape = shape_from_vector(v).ok()?;
    let spectrum = shape_spectrum(&shape, obj.mass, obj.order(), ctx).ok()?;
    obj.value(&spectrum).ok()
}

/// Objective in minimization form (negated for maximization); invalid
/// shapes cost [`PENALTY`].
pub fn evaluate_objective(obj: &Objective, v: &[f64], ctx: &SolverContext) -> f64 {
    objective_value(obj, v, ctx).map_or(PENALTY, |value| obj.signed(value))
}

/// Nelder–Mead controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Offset of the initial simplex vertices `v0 + scale·e_i`.
    pub init_scale: f64,
    /// Stop once the simplex diameter is at most this.
    pub tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            init_scale: 0.1,
            tol: 1e-8,
        }
    }
}

/// Best point after one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub best_value: f64,
    pub coefficients: Vec<f64>,
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Interrupted,
}

/// History of a minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationTrace {
    pub iterations: Vec<TraceEntry>,
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub stop: StopReason,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in simplex.iter().enumerate() {
        for b in &simplex[i + 1..] {
            let dist = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            d = d.max(dist);
        }
    }
    d
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimize `f` from `v0` with reflection 1, expansion 2, contraction ½ and
/// shrink ½. `interrupt` sees the best vertex after each iteration and may
/// end the run early. The best value is non-increasing across the trace.
pub fn nelder_mead_with(
    mut f: impl FnMut(&[f64]) -> f64,
    v0: &[f64],
    opts: &NelderMeadOptions,
    mut interrupt: impl FnMut(&[f64], f64) -> bool,
) -> MinimizationTrace {
    let n = v0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![v0.to_vec()];
    for i in 0..n {
        let mut v = v0.to_vec();
        v[i] += opts.init_scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut iterations = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for iter in 1..=opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if diameter(&simplex) <= opts.tol {
            stop = StopReason::Converged;
            break;
        }

        let worst = n;
        let mut centroid = vec![0.0; n];
        for v in &simplex[..worst] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let reflected = affine(&centroid, &simplex[worst], -1.0);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = affine(&centroid, &simplex[worst], -2.0);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let (candidate, fc) = if fr < values[worst] {
                let c = affine(&centroid, &reflected, 0.5);
                let fc = eval(&c);
                (c, fc)
            } else {
                let c = affine(&centroid, &simplex[worst], 0.5);
                let fc = eval(&c);
                (c, fc)
            };
            if fc < values[worst].min(fr) {
                simplex[worst] = candidate;
                values[worst] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = affine(&simplex[0], &simplex[i], 0.5);
                    values[i] = eval(&simplex[i]);
                }
            }
        }

        let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap();
        iterations.push(TraceEntry {
            iter,
            best_value: values[best],
            coefficients: simplex[best].clone(),
        });
        if interrupt(&simplex[best], values[best]) {
            stop = StopReason::Interrupted;
            break;
        }
    }

    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap();
    MinimizationTrace {
        iterations,
        best: simplex[best].clone(),
        best_value: values[best],
        evaluations,
        stop,
    }
}

/// [`nelder_mead_with`] without early stopping.
pub fn nelder_mead(f: impl FnMut(&[f64]) -> f64, v0: &[f64], opts: &NelderMeadOptions) -> MinimizationTrace {
    nelder_mead_with(f, v0, opts, |_, _| false)
}

/// Controls for [`optimize_shape`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub modes: usize,
    pub nelder_mead: NelderMeadOptions,
    /// Resolution inside the loop.
    pub solver: SolverContext,
    /// Resolution of the final re-evaluation.
    pub final_solver: SolverContext,
    pub pinch_radius: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            modes: DEFAULT_MODES,
            nelder_mead: NelderMeadOptions::default(),
            solver: SolverContext::reduced(),
            final_solver: SolverContext::accurate(),
            pinch_radius: PINCH_RADIUS,
        }
    }
}

/// Result of a shape optimization. Trace values are in objective units:
/// non-increasing when minimizing, non-decreasing when maximizing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub objective: Objective,
    pub iterations: Vec<TraceEntry>,
    pub final_shape: FourierShape,
    /// Best objective value seen in the loop (reduced resolution).
    pub best_value: f64,
    /// Objective of the final shape at the final resolution, if the solve
    /// succeeded.
    pub final_value: Option<f64>,
    pub evaluations: usize,
    pub stop: StopReason,
    /// The best shape came close to splitting into two components.
    pub near_pinching: bool,
}

/// Coefficient vector of `shape` padded or truncated to `modes` modes.
pub fn initial_vector(shape: &FourierShape, modes: usize) -> Vec<f64> {
    let mut a = shape.a().to_vec();
    let mut b = shape.b().to_vec();
    a.resize(modes, 0.0);
    b.resize(modes, 0.0);
    let mut v = vec![shape.a0()];
    v.extend(a);
    v.extend(b);
    v
}

/// The radius `1 + sin(2θ)/2 + cos(2θ)/2` before normalization.
pub fn default_initial_shape() -> FourierShape {
    FourierShape::new(1.0, vec![0.0, 0.5], vec![0.0, 0.5]).expect("positive radius")
}

/// Optimize `obj` over `2M+1` Fourier coefficients starting from `init`.
pub fn optimize_shape(obj: &Objective, init: &FourierShape, opts: &OptimizeOptions) -> Result<OptimizationTrace> {
    if opts.modes == 0 {
        return Err(Error::InvalidShape("at least one Fourier mode is required".into()));
    }
    let v0 = initial_vector(init, opts.modes);
    shape_from_vector(&v0)?;
    let pinch_grid = 2048;
    let pinched = |v: &[f64]| {
        shape_from_vector(v).map_or(false, |s| s.min_radius(pinch_grid) < opts.pinch_radius)
    };
    let mut near_pinching = false;
    let run = nelder_mead_with(
        |v| evaluate_objective(obj, v, &opts.solver),
        &v0,
        &opts.nelder_mead,
        |best, _| {
            near_pinching = pinched(best);
            near_pinching
        },
    );
    let iterations = run
        .iterations
        .into_iter()
        .map(|e| TraceEntry {
            best_value: obj.signed(e.best_value),
            ..e
        })
        .collect();
    let final_shape = shape_from_vector(&run.best)?;
    let final_value = objective_value(obj, &run.best, &opts.final_solver);
    Ok(OptimizationTrace {
        objective: *obj,
        iterations,
        final_shape,
        best_value: obj.signed(run.best_value),
        final_value,
        evaluations: run.evaluations,
        stop: run.stop,
        near_pinching: near_pinching || pinched(&run.best),
    })
}

/// Coefficients of the shape rotated by `-theta0`:
/// `(a_m, b_m) → (a_m cos mθ₀ + b_m sin mθ₀, -a_m sin mθ₀ + b_m cos mθ₀)`.
pub fn rotate_coefficients(v: &[f64], theta0: f64) -> Vec<f64> {
    let m = (v.len() - 1) / 2;
    let mut out = v.to_vec();
    for k in 1..=m {
        let (s, c) = (k as f64 * theta0).sin_cos();
        let (a, b) = (v[k], v[m + k]);
        out[k] = a * c + b * s;
        out[m + k] = -a * s + b * c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_bowl() {
        let c = [1.0, -2.0, 0.5, 3.0, -0.7];
        let f = |v: &[f64]| v.iter().zip(&c).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let opts = NelderMeadOptions {
            max_iter: 500,
            init_scale: 0.1,
            tol: 1e-9,
        };
        let trace = nelder_mead(f, &[0.0; 5], &opts);
        assert!(trace.iterations.len() <= 500);
        for (x, y) in trace.best.iter().zip(&c) {
            assert!((x - y).abs() < 1e-6, "{:?}", trace.best);
        }
        assert!(trace.iterations.windows(2).all(|w| w[1].best_value <= w[0].best_value));
        let again = nelder_mead(f, &trace.best, &opts);
        assert!(again.best_value <= trace.best_value);
    }

    #[test]
    fn rosenbrock_progresses() {
        let f = |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2);
        let trace = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions { max_iter: 2000, init_scale: 0.1, tol: 1e-10 });
        assert!(trace.best_value < 1e-10);
        assert_eq!(trace.stop, StopReason::Converged);
    }

    #[test]
    fn interrupt_stops_early() {
        let trace = nelder_mead_with(|v: &[f64]| v[0] * v[0], &[5.0], &NelderMeadOptions::default(), |_, val| val < 1.0);
        assert_eq!(trace.stop, StopReason::Interrupted);
        assert!(trace.best_value < 1.0);
    }

    #[test]
    fn shapes_from_vectors() {
        let e1 = [1.0, 0.0, 0.0];
        let d = shape_from_vector(&e1).unwrap();
        assert!((d.radius(0.3) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
        let v = [0.8, 0.1, -0.2, 0.05, 0.1];
        let w: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let (s, t) = (shape_from_vector(&v).unwrap(), shape_from_vector(&w).unwrap());
        for theta in [0.0, 1.0, 2.5] {
            assert!((s.radius(theta) - t.radius(theta)).abs() < 1e-14);
        }
        assert!(shape_from_vector(&[0.0, 0.0, 0.0]).is_err());
        let init = initial_vector(&default_initial_shape(), DEFAULT_MODES);
        assert_eq!(init.len(), 17);
        assert_eq!((init[0], init[2], init[10]), (1.0, 0.5, 0.5));
    }

    #[test]
    fn invalid_shape_costs_penalty() {
        let obj = Objective::new(ObjectiveKind::MinimizeEigenvalue(1), 1.0).unwrap();
        assert_eq!(evaluate_objective(&obj, &[0.1, 1.0, 0.0], &SolverContext::reduced()), PENALTY);
        assert_eq!(evaluate_objective(&obj, &[1.0, 0.0], &SolverContext::reduced()), PENALTY);
    }

    #[test]
    fn objective_validation() {
        assert!(Objective::new(ObjectiveKind::MinimizeEigenvalue(0), 1.0).is_err());
        assert!(Objective::new(ObjectiveKind::MaximizeRatio(1), 1.0).is_err());
        assert!(Objective::new(ObjectiveKind::MaximizeRatio(3), -1.0).is_err());
        let o = Objective::new(ObjectiveKind::MaximizeRatio(3), 1.0).unwrap();
        assert_eq!(o.order(), 3);
        assert!(o.maximizes());
        let json = serde_json::to_string(&o).unwrap();
        assert_eq!(serde_json::from_str::<Objective>(&json).unwrap(), o);
    }

    proptest! {
        #[test]
        fn rotation_preserves_the_radius_profile(
            v in proptest::collection::vec(-0.2f64..0.2, 6), theta0 in 0.0f64..6.3, t in 0.0f64..6.3
        ) {
            let mut c = vec![1.0];
            c.extend(v);
            let s = shape_from_vector(&c).unwrap();
            let r = shape_from_vector(&rotate_coefficients(&c, theta0)).unwrap();
            prop_assert!((r.radius(t) - s.radius(t + theta0)).abs() < 1e-12);
        }
    }
}
