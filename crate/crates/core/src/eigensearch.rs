//! Eigenvalues as local minimizers of the subspace angle `s(λ)`: a uniform
//! scan brackets the minima, golden-section search refines them, and the
//! singular values of the boundary block at the refined point give the
//! multiplicity.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::DiscretizedDomain;
use crate::mfs::{detection_threshold, sat_singular_values, SpectralConfig, MIN_GAP};

/// Golden-section reduction factor `(√5 - 1)/2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Length of the default scan window above the mass.
pub const DEFAULT_WINDOW_SPAN: f64 = 15.0;

/// Growth factor of the window length on each extension.
pub const WINDOW_GROWTH: f64 = 1.5;

/// Maximum number of window extensions.
pub const MAX_EXTENSIONS: usize = 6;

/// Singular values of `Q_B` below this many times the smallest one count
/// towards the multiplicity.
pub const MULTIPLICITY_RATIO: f64 = 3.0;

/// Absolute floor of the multiplicity cut: values this small are treated
/// as zero even when the smallest one is orders of magnitude smaller.
pub const MULTIPLICITY_FLOOR: f64 = 1e-6;

/// Subdivision of the scan step used to look for a second minimum hidden
/// next to a refined one.
const FINE_SUBDIVISION: f64 = 8.0;

/// A scan window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidSearch(format!("empty window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `(m + ε, m + 15]`.
    pub fn default_for_mass(mass: f64) -> Self {
        Self {
            lo: mass + MIN_GAP,
            hi: mass + DEFAULT_WINDOW_SPAN,
        }
    }

    fn check_mass(&self, mass: f64) -> Result<()> {
        if self.lo < mass + MIN_GAP {
            return Err(Error::InvalidSearch(format!(
                "window start {} must be at least m + {MIN_GAP:e} = {}",
                self.lo,
                mass + MIN_GAP
            )));
        }
        Ok(())
    }
}

/// Scan and refinement controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Scan window; `None` means `(m + ε, m + 15]`.
    pub window: Option<Window>,
    pub step: f64,
    pub tol: f64,
    /// Largest refined `s` accepted as an eigenvalue; `None` picks the
    /// domain default ([`detection_threshold`]).
    #[serde(default)]
    pub threshold: Option<f64>,
    /// How many times the window may grow before giving up.
    #[serde(default = "default_extensions")]
    pub max_extensions: usize,
    /// A rejected minimum with refined `s` below this aborts the search
    /// with [`Error::Unresolved`] instead of skipping it.
    #[serde(default)]
    pub abort_below: Option<f64>,
}

fn default_extensions() -> usize {
    MAX_EXTENSIONS
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            window: None,
            step: 0.05,
            tol: 1e-8,
            threshold: None,
            max_extensions: MAX_EXTENSIONS,
            abort_below: None,
        }
    }
}

impl SearchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidSearch(format!("step must be positive, got {}", self.step)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidSearch(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(w) = self.window {
            Window::new(w.lo, w.hi)?;
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidSearch(format!("threshold must lie in (0, 1], got {t}")));
            }
        }
        Ok(())
    }

    pub fn window_for(&self, mass: f64) -> Window {
        self.window.unwrap_or_else(|| Window::default_for_mass(mass))
    }

    pub fn threshold_for(&self, dom: &DiscretizedDomain) -> f64 {
        self.threshold.unwrap_or_else(|| detection_threshold(dom))
    }
}

/// A sampled local minimum: `s(mid) < min(s(left), s(right))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub left: f64,
    pub mid: f64,
    pub right: f64,
    pub s_left: f64,
    pub s_mid: f64,
    pub s_right: f64,
}

/// Outcome of a golden-section refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub lambda: f64,
    pub residual: f64,
    /// Singular values of `Q_B` at `lambda`, ascending.
    pub singular_values: Vec<f64>,
    /// Final bracket width.
    pub width: f64,
    pub evaluations: usize,
}

/// A detected eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub lambda: f64,
    /// `s(λ)` at the refined minimizer.
    pub residual: f64,
    pub multiplicity: usize,
}

/// Counts the `s` evaluations of a search.
struct Sampler<'a> {
    cfg: &'a SpectralConfig,
    dom: &'a DiscretizedDomain,
    evaluations: usize,
}

impl<'a> Sampler<'a> {
    fn new(cfg: &'a SpectralConfig, dom: &'a DiscretizedDomain) -> Self {
        Self { cfg, dom, evaluations: 0 }
    }

    fn singular_values(&mut self, lambda: f64) -> Result<Vec<f64>> {
        self.evaluations += 1;
        sat_singular_values(lambda, self.cfg, self.dom)
    }

    fn s(&mut self, lambda: f64) -> Result<f64> {
        Ok(self.singular_values(lambda)?[0])
    }
}

fn grid(window: Window, step: f64) -> impl Iterator<Item = f64> {
    let n = ((window.hi - window.lo) / step * (1.0 + 1e-12)).floor() as usize;
    (0..=n).map(move |i| window.lo + i as f64 * step)
}

fn local_minima(lambdas: &[f64], s: &[f64]) -> Vec<Bracket> {
    (1..s.len().saturating_sub(1))
        .filter(|&i| s[i] < s[i - 1] && s[i] < s[i + 1])
        .map(|i| Bracket {
            left: lambdas[i - 1],
            mid: lambdas[i],
            right: lambdas[i + 1],
            s_left: s[i - 1],
            s_mid: s[i],
            s_right: s[i + 1],
        })
        .collect()
}

/// Sample `s` on `window.lo + i·step` and return the sampled local minima.
pub fn scan(cfg: &SpectralConfig, dom: &DiscretizedDomain, window: Window, step: f64) -> Result<Vec<Bracket>> {
    let window = Window::new(window.lo, window.hi)?;
    window.check_mass(cfg.mass)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidSearch(format!("step must be positive, got {step}")));
    }
    let lambdas: Vec<f64> = grid(window, step).collect();
    let s = lambdas
        .iter()
        .map(|&l| Ok(sat_singular_values(l, cfg, dom)?[0]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(local_minima(&lambdas, &s))
}

/// Golden-section minimization of `s` inside a bracket until the bracket
/// is at most `tol` wide. Returns the best point evaluated.
pub fn refine(bracket: &Bracket, cfg: &SpectralConfig, dom: &DiscretizedDomain, tol: f64) -> Result<Refined> {
    refine_with(&mut Sampler::new(cfg, dom), bracket, tol)
}

fn refine_with(sampler: &mut Sampler, bracket: &Bracket, tol: f64) -> Result<Refined> {
    let b = bracket;
    if !(b.left < b.mid && b.mid < b.right && b.s_mid < b.s_left.min(b.s_right)) {
        return Err(Error::InvalidSearch(format!(
            "({}, {}, {}) does not bracket a minimum",
            b.left, b.mid, b.right
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidSearch(format!("tolerance must be positive, got {tol}")));
    }
    let start = sampler.evaluations;
    let (mut lo, mut hi) = (b.left, b.right);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = sampler.singular_values(x1)?;
    let mut f2 = sampler.singular_values(x2)?;
    let mut best = (b.mid, None);
    let mut best_s = b.s_mid;
    let consider = |x: f64, f: &Vec<f64>, best: &mut (f64, Option<Vec<f64>>), best_s: &mut f64| {
        if f[0] < *best_s {
            *best_s = f[0];
            *best = (x, Some(f.clone()));
        }
    };
    consider(x1, &f1, &mut best, &mut best_s);
    consider(x2, &f2, &mut best, &mut best_s);
    while hi - lo > tol {
        if f1[0] < f2[0] {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = sampler.singular_values(x1)?;
            consider(x1, &f1, &mut best, &mut best_s);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = sampler.singular_values(x2)?;
            consider(x2, &f2, &mut best, &mut best_s);
        }
    }
    let (lambda, values) = best;
    let singular_values = match values {
        Some(v) => v,
        None => sampler.singular_values(lambda)?,
    };
    Ok(Refined {
        lambda,
        residual: singular_values[0],
        singular_values,
        width: hi - lo,
        evaluations: sampler.evaluations - start,
    })
}

/// Number of singular values within `MULTIPLICITY_RATIO` of the smallest
/// (or below the absolute floor), capped by the detection threshold.
pub fn multiplicity(singular_values: &[f64], threshold: f64) -> usize {
    let cut = (MULTIPLICITY_RATIO * singular_values[0])
        .max(MULTIPLICITY_FLOOR)
        .min(threshold);
    singular_values.iter().take_while(|&&s| s <= cut).count().max(1)
}

/// Detected spectrum with the search settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// Distinct eigenvalues in increasing order.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Refined local minima of `s` below the last reported eigenvalue whose
    /// residual exceeded the detection threshold.
    pub rejected: Vec<Eigenvalue>,
    /// Window actually scanned (after any extensions).
    pub window: Window,
    pub config: SpectralConfig,
    pub options: SearchOptions,
    /// Detection threshold applied.
    pub threshold: f64,
    /// Number of `s(λ)` evaluations spent.
    pub evaluations: usize,
}

impl SpectrumResult {
    /// Eigenvalue count including multiplicities.
    pub fn count(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Eigenvalues repeated according to multiplicity: `λ₁ ≤ λ₂ ≤ …`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.lambda, e.multiplicity))
            .collect()
    }

    /// `λ_i`, 1-based, counting multiplicity.
    pub fn nth(&self, i: usize) -> Result<f64> {
        let all = self.lambdas();
        if i == 0 || i > all.len() {
            return Err(Error::MissingIndex {
                index: i,
                available: all.len(),
            });
        }
        Ok(all[i - 1])
    }
}

impl Serialize for SpectrumResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Echo<'a> {
            #[serde(flatten)]
            solver: &'a SpectralConfig,
            window: [f64; 2],
            step: f64,
            tol: f64,
            threshold: f64,
        }
        let mut st = serializer.serialize_struct("SpectrumResult", 5)?;
        st.serialize_field("lambda", &self.eigenvalues.iter().map(|e| e.lambda).collect::<Vec<_>>())?;
        st.serialize_field("residual", &self.eigenvalues.iter().map(|e| e.residual).collect::<Vec<_>>())?;
        st.serialize_field(
            "multiplicity",
            &self.eigenvalues.iter().map(|e| e.multiplicity).collect::<Vec<_>>(),
        )?;
        st.serialize_field("evaluations", &self.evaluations)?;
        st.serialize_field(
            "config",
            &Echo {
                solver: &self.config,
                window: [self.window.lo, self.window.hi],
                step: self.options.step,
                tol: self.options.tol,
                threshold: self.threshold,
            },
        )?;
        st.end()
    }
}

/// `λ_i / λ_j` (1-based, counting multiplicity).
pub fn eigenvalue_ratio(result: &SpectrumResult, i: usize, j: usize) -> Result<f64> {
    Ok(result.nth(i)? / result.nth(j)?)
}

/// Running list of accepted eigenvalues, merged within `10·tol`.
struct Found {
    list: Vec<Eigenvalue>,
    rejected: Vec<Eigenvalue>,
    merge: f64,
}

impl Found {
    fn insert(&mut self, e: Eigenvalue) {
        if let Some(prev) = self.list.iter_mut().find(|p| (p.lambda - e.lambda).abs() <= self.merge) {
            prev.multiplicity = prev.multiplicity.max(e.multiplicity);
            if e.residual < prev.residual {
                prev.lambda = e.lambda;
                prev.residual = e.residual;
            }
            return;
        }
        let at = self.list.partition_point(|p| p.lambda < e.lambda);
        self.list.insert(at, e);
    }

    fn count(&self) -> usize {
        self.list.iter().map(|e| e.multiplicity).sum()
    }

    fn reject(&mut self, lambda: f64, residual: f64, abort_below: Option<f64>) -> Result<()> {
        if abort_below.is_some_and(|limit| residual < limit) {
            return Err(Error::Unresolved { lambda, residual });
        }
        self.rejected.push(Eigenvalue {
            lambda,
            residual,
            multiplicity: 1,
        });
        Ok(())
    }
}

/// Refine a bracket, and when the singular values at the minimizer suggest
/// a second eigenvalue within reach of the scan step, rescan its
/// neighbourhood on a finer grid.
fn resolve(sampler: &mut Sampler, bracket: &Bracket, opts: &SearchOptions, floor: f64, found: &mut Found) -> Result<()> {
    let threshold = opts.threshold_for(sampler.dom);
    let r = refine_with(sampler, bracket, opts.tol)?;
    if r.residual > threshold {
        return found.reject(r.lambda, r.residual, opts.abort_below);
    }
    let mult = multiplicity(&r.singular_values, threshold);
    found.insert(Eigenvalue {
        lambda: r.lambda,
        residual: r.residual,
        multiplicity: mult,
    });

    // Near an isolated eigenvalue s grows roughly linearly; the slope seen
    // at the bracket ends converts the next singular value into a distance
    // to the nearest other candidate.
    let slope = [(bracket.left, bracket.s_left), (bracket.right, bracket.s_right)]
        .iter()
        .map(|&(x, s)| s / (x - r.lambda).abs().max(opts.tol))
        .fold(0.0, f64::max);
    let next = r.singular_values.get(mult).copied().unwrap_or(1.0);
    if next / slope >= 2.0 * opts.step {
        return Ok(());
    }
    let fine = opts.step / FINE_SUBDIVISION;
    let lo = (r.lambda - 2.0 * opts.step).max(floor);
    let lambdas: Vec<f64> = grid(Window { lo, hi: r.lambda + 2.0 * opts.step }, fine).collect();
    let mut s = Vec::with_capacity(lambdas.len());
    for &l in &lambdas {
        s.push(sampler.s(l)?);
    }
    for b in local_minima(&lambdas, &s) {
        if (b.mid - r.lambda).abs() <= fine {
            continue;
        }
        let rr = refine_with(sampler, &b, opts.tol)?;
        if rr.residual <= threshold {
            found.insert(Eigenvalue {
                lambda: rr.lambda,
                residual: rr.residual,
                multiplicity: multiplicity(&rr.singular_values, threshold),
            });
        } else {
            found.reject(rr.lambda, rr.residual, opts.abort_below)?;
        }
    }
    Ok(())
}

/// First `k` eigenvalues (counting multiplicity) above the mass.
///
/// The window is scanned upward and each sampled minimum is refined as soon
/// as it is bracketed; the scan stops once `k` eigenvalues are known. If
/// the window runs out, its length grows by `WINDOW_GROWTH` up to
/// `opts.max_extensions` times before failing with the partial result.
pub fn compute_spectrum(
    cfg: &SpectralConfig,
    dom: &DiscretizedDomain,
    k: usize,
    opts: &SearchOptions,
) -> Result<SpectrumResult> {
    if k == 0 {
        return Err(Error::InvalidSearch("at least one eigenvalue must be requested".into()));
    }
    cfg.validate()?;
    opts.validate()?;
    let mut window = opts.window_for(cfg.mass);
    window.check_mass(cfg.mass)?;

    let mut sampler = Sampler::new(cfg, dom);
    let mut found = Found {
        list: Vec::new(),
        rejected: Vec::new(),
        merge: 10.0 * opts.tol,
    };
    let (mut lambdas, mut s): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut i = 0usize;
    let mut extensions = 0;
    loop {
        let lambda = window.lo + i as f64 * opts.step;
        if lambda > window.hi * (1.0 + 1e-12) {
            if extensions == opts.max_extensions {
                return Err(Error::InsufficientWindow {
                    found: found.list,
                    wanted: k,
                    extensions,
                });
            }
            extensions += 1;
            window.hi = window.lo + WINDOW_GROWTH * (window.hi - window.lo);
            continue;
        }
        lambdas.push(lambda);
        s.push(sampler.s(lambda)?);
        i += 1;
        let n = s.len();
        if n >= 3 && s[n - 2] < s[n - 3] && s[n - 2] < s[n - 1] {
            let bracket = Bracket {
                left: lambdas[n - 3],
                mid: lambdas[n - 2],
                right: lambdas[n - 1],
                s_left: s[n - 3],
                s_mid: s[n - 2],
                s_right: s[n - 1],
            };
            resolve(&mut sampler, &bracket, opts, window.lo, &mut found)?;
            if found.count() >= k {
                break;
            }
        }
    }

    let mut eigenvalues = Vec::new();
    let mut total = 0;
    for e in found.list {
        if total >= k {
            break;
        }
        total += e.multiplicity;
        eigenvalues.push(e);
    }
    let top = eigenvalues.last().map_or(f64::NEG_INFINITY, |e| e.lambda);
    let mut rejected = found.rejected;
    rejected.retain(|e| e.lambda < top);
    rejected.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(SpectrumResult {
        eigenvalues,
        rejected,
        window,
        config: *cfg,
        options: *opts,
        threshold: opts.threshold_for(dom),
        evaluations: sampler.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(values: &[(f64, usize)]) -> SpectrumResult {
        SpectrumResult {
            eigenvalues: values
                .iter()
                .map(|&(lambda, multiplicity)| Eigenvalue {
                    lambda,
                    residual: 1e-8,
                    multiplicity,
                })
                .collect(),
            rejected: Vec::new(),
            window: Window { lo: 1.0, hi: 16.0 },
            config: SpectralConfig::new(1.0, crate::geometry::Discretization::with_sources(10)).unwrap(),
            options: SearchOptions::default(),
            threshold: 1e-3,
            evaluations: 0,
        }
    }

    #[test]
    fn nth_counts_multiplicity() {
        let r = spectrum(&[(2.0, 1), (3.0, 2), (4.0, 1)]);
        assert_eq!(r.count(), 4);
        assert_eq!(r.nth(1).unwrap(), 2.0);
        assert_eq!(r.nth(2).unwrap(), 3.0);
        assert_eq!(r.nth(3).unwrap(), 3.0);
        assert_eq!(r.nth(4).unwrap(), 4.0);
        assert!(matches!(r.nth(5), Err(Error::MissingIndex { index: 5, available: 4 })));
        assert!(r.nth(0).is_err());
        assert_eq!(eigenvalue_ratio(&r, 2, 2).unwrap(), 1.0);
        assert_eq!(eigenvalue_ratio(&r, 4, 1).unwrap(), 2.0);
    }

    #[test]
    fn multiplicity_rule() {
        assert_eq!(multiplicity(&[1e-9, 2e-9, 0.3], 1e-3), 2);
        assert_eq!(multiplicity(&[1e-9, 5e-7, 0.3], 1e-3), 2);
        assert_eq!(multiplicity(&[1e-9, 5e-5, 0.3], 1e-3), 1);
        assert_eq!(multiplicity(&[1e-4, 2e-4, 2.5e-4, 0.1], 1e-3), 3);
        assert_eq!(multiplicity(&[5e-4, 1.2e-3], 1e-3), 1);
        assert_eq!(multiplicity(&[8e-3, 2e-2, 0.9], 0.1), 2);
        assert_eq!(multiplicity(&[8e-3, 0.9], 0.1), 1);
    }

    #[test]
    fn json_fields() {
        let r = spectrum(&[(2.0, 1), (3.0, 2)]);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["lambda"], serde_json::json!([2.0, 3.0]));
        assert_eq!(v["multiplicity"], serde_json::json!([1, 2]));
        assert_eq!(v["residual"].as_array().unwrap().len(), 2);
        assert_eq!(v["config"]["mass"], serde_json::json!(1.0));
        assert_eq!(v["config"]["step"], serde_json::json!(0.05));
    }

    #[test]
    fn found_list_merges_and_sorts() {
        let mut f = Found {
            list: Vec::new(),
            rejected: Vec::new(),
            merge: 1e-6,
        };
        f.insert(Eigenvalue { lambda: 3.0, residual: 1e-7, multiplicity: 1 });
        f.insert(Eigenvalue { lambda: 2.0, residual: 1e-7, multiplicity: 1 });
        f.insert(Eigenvalue { lambda: 3.0 + 5e-7, residual: 1e-9, multiplicity: 2 });
        assert_eq!(f.list.len(), 2);
        assert_eq!(f.list[0].lambda, 2.0);
        assert_eq!(f.list[1].multiplicity, 2);
        assert_eq!(f.list[1].residual, 1e-9);
        assert_eq!(f.count(), 3);
    }

    #[test]
    fn rejected_minima_abort_only_below_the_limit() {
        let mut f = Found {
            list: Vec::new(),
            rejected: Vec::new(),
            merge: 1e-6,
        };
        f.reject(2.0, 0.9, Some(0.75)).unwrap();
        f.reject(2.5, 0.3, None).unwrap();
        assert_eq!(f.rejected.len(), 2);
        assert!(matches!(
            f.reject(3.0, 0.3, Some(0.75)),
            Err(Error::Unresolved { lambda, .. }) if lambda == 3.0
        ));
        assert_eq!(f.rejected.len(), 2);
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(2.0, 1.0).is_err());
        assert!(Window::new(1.0, 1.0).is_err());
        assert!(Window::default_for_mass(1.0).check_mass(1.0).is_ok());
        assert!(Window { lo: 1.0, hi: 3.0 }.check_mass(1.0).is_err());
        let opts = SearchOptions { step: 0.0, ..Default::default() };
        assert!(opts.validate().is_err());
    }

    #[test]
    fn grid_includes_end_point() {
        let g: Vec<f64> = grid(Window { lo: 1.0, hi: 1.5 }, 0.1).collect();
        assert_eq!(g.len(), 6);
    }
}
