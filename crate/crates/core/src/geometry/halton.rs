//! Radical-inverse (Halton) sequences.

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Iterator over the two-dimensional Halton sequence, starting at index 1
/// (index 0 is the corner of the unit square).
#[derive(Debug, Clone)]
pub struct Halton2 {
    bases: (u64, u64),
    index: u64,
}

impl Halton2 {
    pub fn new(bases: (u64, u64)) -> Self {
        Self { bases, index: 1 }
    }
}

impl Default for Halton2 {
    fn default() -> Self {
        Self::new((2, 3))
    }
}

impl Iterator for Halton2 {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.index;
        self.index += 1;
        Some((radical_inverse(i, self.bases.0), radical_inverse(i, self.bases.1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_two_prefix() {
        let got: Vec<f64> = (1..8).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(got, vec![0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875]);
    }

    #[test]
    fn base_three_prefix() {
        let got: Vec<f64> = (1..5).map(|i| radical_inverse(i, 3)).collect();
        let want = [1.0 / 3.0, 2.0 / 3.0, 1.0 / 9.0, 4.0 / 9.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn points_stay_in_unit_square() {
        assert!(Halton2::default().take(1000).all(|(x, y)| (0.0..1.0).contains(&x) && (0.0..1.0).contains(&y)));
    }
}
