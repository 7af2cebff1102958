//! One-dimensional minimization on a closed interval.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `xtol`. Returns `(x_min, f_min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 <= f2 {
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
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Samples `f` at `scan_points` evenly spaced abscissae, then refines around
/// the best sample with golden-section search. The endpoints are always
/// candidates, so boundary minima are returned exactly.
pub fn scan_then_golden<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    scan_points: usize,
    xtol: f64,
) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let n = scan_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };
    let (mut best_i, mut best_v) = (0, f(lo));
    for i in 1..n {
        let v = f(at(i));
        if v < best_v {
            best_i = i;
            best_v = v;
        }
    }
    let left = at(best_i.saturating_sub(1));
    let right = at((best_i + 1).min(n - 1));
    let (x, v) = golden_section(&f, left, right, xtol);
    if v < best_v {
        (x, v)
    } else {
        (at(best_i), best_v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_interior_minimum() {
        let (x, v) = golden_section(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        // a flat minimum pins x only to about sqrt(machine epsilon)
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn scan_escapes_local_minimum() {
        // local min near 0.1, global near 0.8
        let f = |x: f64| (x - 0.1).powi(2) * (x - 0.8).powi(2) - 0.05 * x;
        let (x, _) = scan_then_golden(f, 0.0, 1.0, 256, 1e-10);
        assert!(x > 0.7, "got {x}");
    }

    #[test]
    fn boundary_minimum_is_exact() {
        let (x, v) = scan_then_golden(|x| x, 0.2, 0.9, 16, 1e-10);
        assert_eq!((x, v), (0.2, 0.2));
        let (x, _) = scan_then_golden(|x| -x, 0.2, 0.9, 16, 1e-10);
        assert_eq!(x, 0.9);
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(
            scan_then_golden(|x| x * 2.0, 0.5, 0.5, 256, 1e-10),
            (0.5, 1.0)
        );
    }
}
