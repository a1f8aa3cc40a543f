//! End-to-end spectra of disks against the separable oracle, and
//! eigenfunction boundary behaviour.

use std::f64::consts::PI;

use dirac_core::eigensearch::{compute_spectrum, SearchOptions};
use dirac_core::geometry::{disk, rectangle, Discretization};
use dirac_core::mfs::{eigenfunction, SpectralConfig};
use num_complex::Complex64;
use proptest::prelude::*;

/// Few sources with the offset scaled to the radius: the error of the
/// expansion decays like `(r / (r + η))^N`.
fn small(sources: usize, r: f64) -> Discretization {
    let mut d = Discretization::with_sources(sources);
    d.eta = 0.15 * r;
    d
}

/// `J_n` for any integer order.
fn bessel_j(n: i32, x: f64) -> f64 {
    libm::jn(n, x)
}

/// Separation of variables on the disk of radius `r`: the angular mode `j`
/// has `u₁ = J_j(kρ) e^{ijθ}`, `u₂ = i k J_{j+1}(kρ) e^{i(j+1)θ} / (λ + m)`,
/// and `u₂ = i n u₁` on the boundary gives `(λ+m) J_j(kr) = k J_{j+1}(kr)`.
fn disk_condition(j: i32, lambda: f64, mass: f64, r: f64) -> f64 {
    let k = (lambda * lambda - mass * mass).sqrt();
    (lambda + mass) * bessel_j(j, k * r) - k * bessel_j(j + 1, k * r)
}

/// All disk eigenvalues in `(m, m + span]`, sorted, with repeats for
/// degenerate modes.
fn disk_oracle(mass: f64, r: f64, span: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let h = 1e-3;
    for j in -12..=12 {
        let f = |l: f64| disk_condition(j, l, mass, r);
        let mut lo = mass + 1e-9;
        while lo < mass + span {
            let hi = lo + h;
            if f(lo) * f(hi) < 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..100 {
                    let c = 0.5 * (a + b);
                    if f(a) * f(c) <= 0.0 {
                        b = c;
                    } else {
                        a = c;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            lo = hi;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[test]
fn oracle_reproduces_the_reference_disk_value() {
    let l = disk_oracle(0.0, 1.0, 3.0);
    assert!((l[0] - 1.434695650819).abs() < 1e-11, "{l:?}");
}

#[test]
fn unit_area_disk_matches_the_oracle() {
    let r = (1.0 / PI).sqrt();
    let disc = small(120, r);
    let dom = disk(r, &disc).unwrap();
    for mass in [0.5, 2.0] {
        let exact = disk_oracle(mass, r, 6.0);
        let cfg = SpectralConfig::new(mass, disc).unwrap();
        let got = compute_spectrum(&cfg, &dom, 4, &SearchOptions::default()).unwrap().lambdas();
        for (g, e) in got.iter().zip(&exact) {
            assert!((g - e).abs() < 1e-6, "m = {mass}: {got:?} vs {exact:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn first_disk_eigenvalue_matches_the_oracle(r in 0.6f64..1.6, mass in 0.0f64..3.0) {
        let disc = small(100, r);
        let cfg = SpectralConfig::new(mass, disc).unwrap();
        let got = compute_spectrum(&cfg, &disk(r, &disc).unwrap(), 1, &SearchOptions::default())
            .unwrap()
            .nth(1)
            .unwrap();
        let exact = disk_oracle(mass, r, 12.0)[0];
        prop_assert!((got - exact).abs() < 1e-6, "{} vs {}", got, exact);
    }
}

#[test]
fn eigenfunction_satisfies_the_boundary_condition() {
    let disc = small(120, 1.0);
    let dom = disk(1.0, &disc).unwrap();
    let cfg = SpectralConfig::new(1.0, disc).unwrap();
    let lambda = disk_oracle(1.0, 1.0, 5.0)[0];
    let coeffs = eigenfunction(lambda, &cfg, &dom).unwrap();
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for x in dom.boundary().iter().step_by(7) {
        let (u1, u2) = coeffs.spinor(x.position);
        let n = Complex64::new(x.normal.x, x.normal.y);
        worst = worst.max((u2 - i * n * u1).norm());
        scale = scale.max(u1.norm());
    }
    assert!(scale > 0.0);
    assert!(worst < 1e-5 * scale, "{worst:e} vs {scale:e}");
}

#[test]
fn rectangles_are_invariant_under_swapping_sides() {
    let disc = Discretization::with_sources(120);
    let cfg = SpectralConfig::new(1.0, disc).unwrap();
    let first = |a: f64, b: f64| {
        compute_spectrum(&cfg, &rectangle(a, b, &disc).unwrap(), 1, &SearchOptions::default())
            .unwrap()
            .nth(1)
            .unwrap()
    };
    let (x, y) = (first(1.5, 1.0 / 1.5), first(1.0 / 1.5, 1.5));
    assert!((x - y).abs() < 1e-5, "{x} vs {y}");
}
