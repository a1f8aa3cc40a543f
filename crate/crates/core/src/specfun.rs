//! Bessel functions of order zero and one, the Hankel function of the first
//! kind, and the free-space Helmholtz fundamental solution.
//!
//! For `0 < x <= 25` all four functions come out of a single Miller backward
//! recurrence: `J_0`, `J_1` are normalized with `J_0 + 2 sum J_2k = 1` and
//! `Y_0`, `Y_1` follow from the Neumann series
//!
//! ```text
//! Y_0 = (2/pi) [(ln(x/2) + gamma) J_0 - 2 sum_{k>=1} (-1)^k J_2k / k]
//! Y_1 = -(2/(pi x)) J_0 + (2/pi) (ln(x/2) + gamma) J_1
//!       + (2/pi) sum_{k>=1} (-1)^k (J_2k-1 - J_2k+1) / k
//! ```
//!
//! which only involve bounded terms. Beyond the split the Hankel asymptotic
//! expansion is summed until its terms drop below machine precision; at
//! `x = 25` the smallest term of that divergent series is far below `1e-17`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::point::Point2;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments above this use the asymptotic expansion.
const ASYMPTOTIC_SPLIT: f64 = 25.0;

/// Order of a Hankel function of the first kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelOrder {
    Zero,
    One,
}

/// `J_0(x)` for any finite `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 1.0;
    }
    jy01(ax).j0
}

/// `J_1(x)` for any finite `x`.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax == 0.0 {
        return 0.0;
    }
    let j1 = jy01(ax).j1;
    if x < 0.0 { -j1 } else { j1 }
}

/// `Y_0(x)`, defined for `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    check_positive("bessel_y0", x)?;
    Ok(jy01(x).y0)
}

/// `Y_1(x)`, defined for `x > 0`.
pub fn bessel_y1(x: f64) -> Result<f64> {
    check_positive("bessel_y1", x)?;
    Ok(jy01(x).y1)
}

/// `H^(1)_order(x) = J_order(x) + i Y_order(x)` for `x > 0`.
pub fn hankel1(order: HankelOrder, x: f64) -> Result<Complex64> {
    check_positive("hankel1", x)?;
    let v = jy01(x);
    Ok(match order {
        HankelOrder::Zero => Complex64::new(v.j0, v.y0),
        HankelOrder::One => Complex64::new(v.j1, v.y1),
    })
}

/// Fundamental solution of `-Δu - k²u = 0` in the plane,
/// `Φ_k(p) = (i/4) H^(1)_0(k |p|)`.
pub fn fundamental_solution(k: f64, p: Point2) -> Result<Complex64> {
    check_kernel_args("fundamental_solution", k, p)?;
    Ok(helmholtz_kernel(k, p).value)
}

/// Gradient `(∂₁Φ_k, ∂₂Φ_k)` of the fundamental solution at `p`.
pub fn fundamental_solution_gradient(k: f64, p: Point2) -> Result<(Complex64, Complex64)> {
    check_kernel_args("fundamental_solution_gradient", k, p)?;
    let eval = helmholtz_kernel(k, p);
    Ok((eval.grad[0], eval.grad[1]))
}

/// Value and gradient of `Φ_k` at one point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelEval {
    pub value: Complex64,
    pub grad: [Complex64; 2],
}

/// Unchecked kernel evaluation used by matrix assembly; `k > 0`, `p != 0`.
#[inline]
pub(crate) fn helmholtz_kernel(k: f64, p: Point2) -> KernelEval {
    let r = p.norm();
    let v = jy01(k * r);
    // (i/4)(J0 + i Y0) = (-Y0 + i J0) / 4
    let value = Complex64::new(-0.25 * v.y0, 0.25 * v.j0);
    // ∇Φ = -(i/4) k H1(kr) p/r = (k/4)(Y1 - i J1) p/r
    let radial = Complex64::new(v.y1, -v.j1) * (0.25 * k / r);
    KernelEval {
        value,
        grad: [radial * p.x, radial * p.y],
    }
}

/// Number of kernel evaluations interleaved by [`helmholtz_kernel_lanes`].
pub(crate) const LANES: usize = 4;

/// `LANES` independent kernel evaluations. The backward recurrences are
/// run in lockstep so their latency chains overlap; results match
/// [`helmholtz_kernel`] to rounding.
#[inline]
pub(crate) fn helmholtz_kernel_lanes(k: f64, p: [Point2; LANES]) -> [KernelEval; LANES] {
    let r = p.map(|q| q.norm());
    let x: [f64; LANES] = std::array::from_fn(|l| k * r[l]);
    let v = if x.iter().all(|&x| x <= ASYMPTOTIC_SPLIT) {
        miller_lanes(x)
    } else {
        x.map(jy01)
    };
    std::array::from_fn(|l| {
        let radial = Complex64::new(v[l].y1, -v[l].j1) * (0.25 * k / r[l]);
        KernelEval {
            value: Complex64::new(-0.25 * v[l].y0, 0.25 * v[l].j0),
            grad: [radial * p[l].x, radial * p[l].y],
        }
    })
}

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            function,
            value: x,
            requirement: "x > 0",
        })
    }
}

fn check_kernel_args(function: &'static str, k: f64, p: Point2) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain {
            function,
            value: k,
            requirement: "wavenumber k > 0",
        });
    }
    let r = p.norm();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            function,
            value: r,
            requirement: "point away from the origin",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Jy01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// All four functions at `x > 0`.
#[inline]
pub(crate) fn jy01(x: f64) -> Jy01 {
    if x <= ASYMPTOTIC_SPLIT {
        miller(x)
    } else {
        asymptotic(x)
    }
}

/// Highest start order used by the backward recurrence on `(0, 25]`.
const MAX_START: usize = 64;

/// Even start order for the backward recurrence at `x`. Chosen so that all
/// four functions reach full double precision on `(0, 25]`, with a margin
/// of at least two orders over the empirically sufficient value.
#[inline]
fn start_order(x: f64) -> usize {
    let n = (0.5 * (x + 10.0 + 5.0 * x.sqrt())).ceil() as usize;
    (2 * n).min(MAX_START)
}

/// Weights of `J_2k` in the `Y_0` sum and of `J_2k-1` in the `Y_1` sum,
/// indexed by `k`.
struct MillerWeights {
    y0: [f64; MAX_START / 2 + 1],
    y1: [f64; MAX_START / 2 + 1],
}

const fn miller_weights() -> MillerWeights {
    let mut w = MillerWeights {
        y0: [0.0; MAX_START / 2 + 1],
        y1: [0.0; MAX_START / 2 + 1],
    };
    let mut k = 1;
    while k <= MAX_START / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        w.y0[k] = sign / kf;
        if k >= 2 {
            w.y1[k] = sign * (2.0 * kf - 1.0) / (kf * (kf - 1.0));
        }
        k += 1;
    }
    w
}

static WEIGHTS: MillerWeights = miller_weights();

/// State of one backward recurrence.
#[derive(Clone, Copy)]
struct Recurrence {
    j_next: f64,
    j_cur: f64,
    norm: f64,
    sum_y0: f64,
    sum_y1: f64,
}

impl Recurrence {
    const START: Self = Self {
        j_next: 0.0,
        j_cur: 1e-30,
        norm: 0.0,
        sum_y0: 0.0,
        sum_y1: 0.0,
    };

    #[inline(always)]
    fn step(&mut self, n: f64, two_over_x: f64) {
        let j_prev = n * two_over_x * self.j_cur - self.j_next;
        self.j_next = self.j_cur;
        self.j_cur = j_prev;
        if self.j_cur.abs() > 1e250 {
            self.j_cur *= 1e-250;
            self.j_next *= 1e-250;
            self.norm *= 1e-250;
            self.sum_y0 *= 1e-250;
            self.sum_y1 *= 1e-250;
        }
    }

    /// Steps from order `2k` down to `2k - 2`, accumulating `J_2k` and
    /// `J_2k-1` into the sums.
    #[inline(always)]
    fn double_step(&mut self, k: usize, two_over_x: f64) {
        let w = &WEIGHTS;
        self.norm += 2.0 * self.j_cur;
        self.sum_y0 += w.y0[k] * self.j_cur;
        self.step((2 * k) as f64, two_over_x);
        self.sum_y1 += w.y1[k] * self.j_cur;
        self.step((2 * k - 1) as f64, two_over_x);
    }

    fn finish(self, x: f64) -> Jy01 {
        // j_cur = J_0, j_next = J_1 (unnormalized)
        let inv_norm = 1.0 / (self.norm + self.j_cur);
        let j0 = self.j_cur * inv_norm;
        let j1 = self.j_next * inv_norm;
        let sum_y0 = self.sum_y0 * inv_norm;
        let sum_y1 = (self.sum_y1 - self.j_next) * inv_norm;
        let log_term = (0.5 * x).ln() + EULER_GAMMA;
        let y0 = 2.0 / PI * (log_term * j0 - 2.0 * sum_y0);
        let y1 = -2.0 / (PI * x) * j0 + 2.0 / PI * (log_term * j1 + sum_y1);
        Jy01 { j0, j1, y0, y1 }
    }
}

fn miller(x: f64) -> Jy01 {
    let two_over_x = 2.0 / x;
    let mut rec = Recurrence::START;
    for k in (1..=start_order(x) / 2).rev() {
        rec.double_step(k, two_over_x);
    }
    rec.finish(x)
}

/// [`miller`] on several arguments at once, all in `(0, 25]`, started from
/// the largest start order among them.
fn miller_lanes(x: [f64; LANES]) -> [Jy01; LANES] {
    let xmax = x.iter().copied().fold(0.0, f64::max);
    let two_over_x = x.map(|x| 2.0 / x);
    let mut rec = [Recurrence::START; LANES];
    for k in (1..=start_order(xmax) / 2).rev() {
        for l in 0..LANES {
            rec[l].double_step(k, two_over_x[l]);
        }
    }
    std::array::from_fn(|l| rec[l].finish(x[l]))
}

/// Hankel's expansion `P(ν, x)`, `Q(ν, x)` for `ν ∈ {0, 1}`.
fn hankel_pq(four_nu_sq: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let inv_8x = 1.0 / (8.0 * x);
    let mut previous = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (four_nu_sq - odd * odd) * inv_8x / k as f64;
        let size = term.abs();
        if size >= previous {
            break;
        }
        previous = size;
        // a_k / x^k enters P with sign (-1)^{k/2} for even k and Q with
        // sign (-1)^{(k-1)/2} for odd k.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if size < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic(x: f64) -> Jy01 {
    let (s, c) = x.sin_cos();
    let amplitude = (2.0 / (PI * x)).sqrt();

    // chi_0 = x - pi/4
    let cos0 = (c + s) * FRAC_1_SQRT_2;
    let sin0 = (s - c) * FRAC_1_SQRT_2;
    let (p0, q0) = hankel_pq(0.0, x);
    let j0 = amplitude * (p0 * cos0 - q0 * sin0);
    let y0 = amplitude * (p0 * sin0 + q0 * cos0);

    // chi_1 = x - 3 pi/4
    let cos1 = (s - c) * FRAC_1_SQRT_2;
    let sin1 = -(s + c) * FRAC_1_SQRT_2;
    let (p1, q1) = hankel_pq(4.0, x);
    let j1 = amplitude * (p1 * cos1 - q1 * sin1);
    let y1 = amplitude * (p1 * sin1 + q1 * cos1);

    Jy01 { j0, j1, y0, y1 }
}
