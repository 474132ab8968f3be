//! Golden-section search for the maximum of a unimodal scalar function.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Final state of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSection {
    /// Best abscissa evaluated.
    pub x: f64,
    pub value: f64,
    /// Final bracket; its width is below the requested tolerance.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Maximizes `f` over `[lo, hi]` until the bracket is narrower than `tol`.
///
/// `f` must be unimodal on the interval. Panics if `tol` is not positive or
/// the interval is reversed.
pub fn golden_section_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> GoldenSection
where
    F: FnMut(f64) -> f64,
{
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(lo <= hi, "empty interval [{lo}, {hi}]");

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;

    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
    }

    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    GoldenSection {
        x,
        value,
        lo,
        hi,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let r = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!((r.x - 0.3).abs() < 1e-8);
        assert!(r.hi - r.lo <= 1e-9);
    }

    #[test]
    fn boundary_maximum() {
        let r = golden_section_max(|x| -x, 0.0, 1.0, 1e-8);
        assert!(r.x < 1e-8);
        let r = golden_section_max(|x| x, 0.0, 1.0, 1e-8);
        assert!(r.x > 1.0 - 1e-8);
    }

    #[test]
    fn kinked_maximum() {
        let r = golden_section_max(|x| (1.0 - x).min(2.0 * x), 0.0, 1.0, 1e-10);
        assert!((r.x - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_interval() {
        let r = golden_section_max(|x| x * x, 0.5, 0.5, 1e-6);
        assert_eq!(r.x, 0.5);
    }
}
