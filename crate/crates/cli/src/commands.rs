//! Experiment drivers behind the subcommands. Each returns a [`Table`].

use std::f64::consts::PI;

use dirac_core::bounds::{nu1, quad_bound, rect_bounds, equivalent_rectangle};
use dirac_core::eigensearch::{compute_spectrum, SpectrumResult};
use dirac_core::geometry::{
    admissible_triangle, disk, fourier_domain, interpolate_shapes, polygon, polygon_perimeter, random_convex_polygon,
    random_quadrilateral, rectangle, regular_polygon, regular_polygon_vertices, signed_area, DiscretizedDomain,
    FourierShape, ShapeRecord, TriangleParam,
};
use dirac_core::mfs::{eigenfunction, SpectralConfig};
use dirac_core::point::Point2;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::Table;

/// Reference `λ₁` of the unit disk at `m = 0`.
pub const DISK_REFERENCE: f64 = 1.434695650819;

/// Allowed slack when checking the quadrilateral bound.
pub const BOUND_SLACK: f64 = 1e-8;

fn spectrum(cfg: &RunConfig, mass: f64, dom: &DiscretizedDomain, k: usize) -> Result<SpectrumResult> {
    cfg.validate_for_mass(mass)?;
    let sc = SpectralConfig::new(mass, cfg.discretization())?;
    Ok(compute_spectrum(&sc, dom, k, &cfg.search())?)
}

fn first_k(result: &SpectrumResult, k: usize) -> Result<Vec<f64>> {
    (1..=k).map(|i| Ok(result.nth(i)?)).collect()
}

fn numbered(prefix: &str, k: usize) -> impl Iterator<Item = String> + '_ {
    (1..=k).map(move |i| format!("{prefix}_{i}"))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(CliError::Argument("k must be at least 1".into()));
    }
    Ok(())
}

/// Inclusive grid `start, start + step, …` up to `end` (with rounding slack).
pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && end.is_finite() && end >= start) {
        return Err(CliError::Argument(format!("invalid grid {start}..{end} step {step}")));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// `λ₁` of the unit disk for each `N`, with the error against the
/// reference value when `m = 0`.
pub fn validate_disk(cfg: &RunConfig, sources: &[usize], mass: f64) -> Result<Table> {
    let mut t = Table::new(["N", "lambda_1", "abs_error"]);
    for &n in sources {
        let mut c = cfg.clone();
        c.solver.sources = n;
        c.validate()?;
        let dom = disk(1.0, &c.discretization())?;
        let l1 = spectrum(&c, mass, &dom, 1)?.nth(1)?;
        let err = if mass == 0.0 { (l1 - DISK_REFERENCE).abs() } else { f64::NAN };
        t.push(vec![n as f64, l1, err]);
    }
    Ok(t)
}

/// Side-length constraint of a rectangle sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Constraint {
    /// `b = 1/a`.
    Area,
    /// `b = 2 - a`.
    Perimeter,
}

impl Constraint {
    pub fn other_side(self, a: f64) -> Result<f64> {
        match self {
            Constraint::Area if a > 0.0 => Ok(1.0 / a),
            Constraint::Perimeter if a > 0.0 && a < 2.0 => Ok(2.0 - a),
            Constraint::Area => Err(CliError::Argument(format!("width {a} must be positive"))),
            Constraint::Perimeter => Err(CliError::Argument(format!("width {a} must lie in (0, 2)"))),
        }
    }
}

/// First `k` eigenvalues of rectangles along a constraint curve, with the
/// bounds on `λ₁`.
pub fn rect_sweep(cfg: &RunConfig, constraint: Constraint, mass: f64, widths: &[f64], k: usize) -> Result<Table> {
    check_k(k)?;
    let mut headers = vec!["a".to_string(), "b".to_string()];
    headers.extend(numbered("lambda", k));
    headers.extend(["lambda_1_lower".to_string(), "lambda_1_upper".to_string()]);
    let mut t = Table::new(headers);
    let sides = widths
        .iter()
        .map(|&a| Ok((a, constraint.other_side(a)?)))
        .collect::<Result<Vec<_>>>()?;
    for (a, b) in sides {
        let dom = rectangle(a, b, &cfg.discretization())?;
        let mut row = vec![a, b];
        row.extend(first_k(&spectrum(cfg, mass, &dom, k)?, k)?);
        let (lo, hi) = rect_bounds(a, b, mass)?.lambda_range(mass);
        row.extend([lo, hi]);
        t.push(row);
    }
    Ok(t)
}

/// `λ₁` of unit-area triangles with apex `(x, y)` over the admissible
/// region, sampled on a `resolution × resolution` grid of
/// `[0, 1] × (0, 2]`.
pub fn triangle_grid(cfg: &RunConfig, resolution: usize, mass: f64) -> Result<Table> {
    if resolution < 2 {
        return Err(CliError::Argument("resolution must be at least 2".into()));
    }
    let mut t = Table::new(["x", "y", "perimeter", "lambda_1"]);
    for i in 0..resolution {
        let x = i as f64 / (resolution - 1) as f64;
        for j in 1..=resolution {
            let y = 2.0 * j as f64 / resolution as f64;
            let p = TriangleParam::new(x, y)?;
            if !p.is_admissible() {
                continue;
            }
            let dom = admissible_triangle(p, true, &cfg.discretization())?;
            let l1 = spectrum(cfg, mass, &dom, 1)?.nth(1)?;
            t.push(vec![x, y, dom.perimeter(), l1]);
        }
    }
    Ok(t)
}

/// `λ₁` of seeded random unit-area convex `n`-gons next to the regular one.
pub fn polygon_random(cfg: &RunConfig, sides: usize, count: usize, mass: f64) -> Result<Table> {
    let disc = cfg.discretization();
    let regular = spectrum(cfg, mass, &regular_polygon(sides, 1.0, &disc)?, 1)?.nth(1)?;
    let mut t = Table::new(["index", "seed", "perimeter", "lambda_1", "regular_lambda_1"]);
    for i in 0..count {
        let seed = cfg.seed.wrapping_add(i as u64);
        let v = random_convex_polygon(sides, seed, 1.0)?;
        let l1 = spectrum(cfg, mass, &polygon(&v, &disc)?, 1)?.nth(1)?;
        t.push(vec![i as f64, seed as f64, polygon_perimeter(&v), l1, regular]);
    }
    Ok(t)
}

/// First `k` eigenvalues of unit-area regular polygons and of the
/// unit-area disk.
pub fn regular_polygon_table(cfg: &RunConfig, sides: &[usize], mass: f64, k: usize) -> Result<Table> {
    check_k(k)?;
    let disc = cfg.discretization();
    let disk_values = first_k(&spectrum(cfg, mass, &disk(1.0 / PI.sqrt(), &disc)?, k)?, k)?;
    let mut headers = vec!["n".to_string(), "perimeter".to_string()];
    headers.extend(numbered("lambda", k));
    headers.extend(numbered("disk_lambda", k));
    let mut t = Table::new(headers);
    for &n in sides {
        let v = regular_polygon_vertices(n, 1.0)?;
        let mut row = vec![n as f64, polygon_perimeter(&v)];
        row.extend(first_k(&spectrum(cfg, mass, &polygon(&v, &disc)?, k)?, k)?);
        row.extend(&disk_values);
        t.push(row);
    }
    Ok(t)
}

/// `λ₁² - m²` of seeded random unit-area quadrilaterals against the
/// conjectured bound. The last column is 1 where the bound fails by more
/// than [`BOUND_SLACK`].
pub fn quad_bound_check(cfg: &RunConfig, count: usize, masses: &[f64], convex: bool) -> Result<Table> {
    let disc = cfg.discretization();
    let mut t = Table::new([
        "quad",
        "seed",
        "mass",
        "area",
        "perimeter",
        "gap_sq",
        "quad_bound",
        "simple_bound",
        "violation",
    ]);
    for i in 0..count {
        let seed = cfg.seed.wrapping_add(i as u64);
        let v = random_quadrilateral(seed, 1.0, convex)?;
        let (area, perimeter) = (signed_area(&v), polygon_perimeter(&v));
        let dom = polygon(&v, &disc)?;
        let (a, b) = equivalent_rectangle(area, perimeter)?;
        for &m in masses {
            let l1 = spectrum(cfg, m, &dom, 1)?.nth(1)?;
            let gap = l1 * l1 - m * m;
            let bound = quad_bound(area, perimeter, m)?;
            let simple = rect_bounds(a, b, m)?.upper_simple_sq;
            let violation = gap > bound + BOUND_SLACK;
            t.push(vec![
                i as f64,
                seed as f64,
                m,
                area,
                perimeter,
                gap,
                bound,
                simple,
                f64::from(u8::from(violation)),
            ]);
        }
    }
    Ok(t)
}

/// Rectangle bounds for one `(a, b, m)`.
pub fn bounds_table(a: f64, b: f64, mass: f64) -> Result<Table> {
    let r = rect_bounds(a, b, mass)?;
    let (lo, hi) = r.lambda_range(mass);
    let mut t = Table::new([
        "a",
        "b",
        "mass",
        "nu_1_a",
        "nu_1_b",
        "lower_sq",
        "upper_simple_sq",
        "upper_refined_sq",
        "lambda_1_lower",
        "lambda_1_upper",
    ]);
    t.push(vec![
        a,
        b,
        mass,
        nu1(mass * a)?,
        nu1(mass * b)?,
        r.lower_sq,
        r.upper_simple_sq,
        r.upper_refined_sq,
        lo,
        hi,
    ]);
    Ok(t)
}

/// First `k` eigenvalues along the radial interpolation between the disk
/// (`t = 0`) and `shape` (`t = 1`).
pub fn minkowski_sweep(cfg: &RunConfig, shape: &FourierShape, steps: usize, mass: f64, k: usize) -> Result<Table> {
    check_k(k)?;
    if steps < 2 {
        return Err(CliError::Argument("at least two interpolation steps are required".into()));
    }
    let disk_shape = FourierShape::disk(shape.modes());
    let mut headers = vec!["t".to_string()];
    headers.extend(numbered("lambda", k));
    let mut t = Table::new(headers);
    for i in 0..steps {
        let s = i as f64 / (steps - 1) as f64;
        let mixed = interpolate_shapes(&disk_shape, shape, s)?;
        let dom = fourier_domain(&mixed, &cfg.discretization())?;
        let mut row = vec![s];
        row.extend(first_k(&spectrum(cfg, mass, &dom, k)?, k)?);
        t.push(row);
    }
    Ok(t)
}

/// Domain of a shape record, or the unit-area disk.
pub fn record_domain(cfg: &RunConfig, record: Option<&ShapeRecord>) -> Result<DiscretizedDomain> {
    let disc = cfg.discretization();
    Ok(match record {
        Some(r) => r.domain(&disc)?,
        None => disk(1.0 / PI.sqrt(), &disc)?,
    })
}

/// `|u₁|` and `|u₂|` of the `index`-th eigenfunction on a regular grid over
/// the bounding box, keeping the points inside the domain.
pub fn eigenfunction_grid(
    cfg: &RunConfig,
    record: Option<&ShapeRecord>,
    mass: f64,
    index: usize,
    resolution: usize,
) -> Result<Table> {
    if index == 0 {
        return Err(CliError::Argument("eigenvalue index is 1-based".into()));
    }
    if resolution < 2 {
        return Err(CliError::Argument("grid resolution must be at least 2".into()));
    }
    let dom = record_domain(cfg, record)?;
    let lambda = spectrum(cfg, mass, &dom, index)?.nth(index)?;
    let sc = SpectralConfig::new(mass, cfg.discretization())?;
    let coeffs = eigenfunction(lambda, &sc, &dom)?;
    let (lo, hi) = dom.region().bounding_box();
    let mut t = Table::new(["x", "y", "abs_u1", "abs_u2"]);
    for i in 0..resolution {
        let y = lo.y + (hi.y - lo.y) * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let x = lo.x + (hi.x - lo.x) * j as f64 / (resolution - 1) as f64;
            let p = Point2::new(x, y);
            if dom.contains(p) {
                let (u1, u2) = coeffs.spinor(p);
                t.push(vec![x, y, u1.norm(), u2.norm()]);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_include_the_end_point() {
        let g = grid(1.0, 3.0, 0.1).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[20] - 3.0).abs() < 1e-12);
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constraints() {
        assert_eq!(Constraint::Area.other_side(2.0).unwrap(), 0.5);
        assert_eq!(Constraint::Perimeter.other_side(0.5).unwrap(), 1.5);
        assert!(Constraint::Area.other_side(0.0).is_err());
        assert!(Constraint::Perimeter.other_side(2.0).is_err());
    }

    #[test]
    fn bounds_row() {
        let t = bounds_table(1.0, 1.0, 0.0).unwrap();
        let row = &t.rows[0];
        assert!((row[3] - PI / 2.0).abs() < 1e-15);
        assert!((row[5] - PI * PI / 2.0).abs() < 1e-12);
    }
}
