//! One-dimensional root finding and unimodal optimization.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a bracketed scalar search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOpt {
    /// Best abscissa found.
    pub x: f64,
    /// Objective value at `x`.
    pub value: f64,
    /// Iterations used.
    pub iterations: u32,
}

/// Finds the sign change of a nondecreasing predicate by bisection.
///
/// `right_of(x)` must be `false` on `[lo, x0)` and `true` on `[x0, hi]`.
/// Returns the final bracket `(lo, hi)` with `hi - lo <= tol * max(1, |hi|)` or
/// after `max_iter` halvings.
pub fn bisect<F>(mut right_of: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: u32) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    for _ in 0..max_iter {
        if hi - lo <= tol * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if right_of(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
///
/// The endpoints are evaluated too, so a maximum on the boundary (including a
/// function that is `-inf` everywhere but one endpoint) is returned exactly.
pub fn golden_max<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: u32) -> ScalarOpt
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let fa = f(lo);
    let fb = f(hi);
    let mut best = if fb > fa {
        ScalarOpt {
            x: hi,
            value: fb,
            iterations: 0,
        }
    } else {
        ScalarOpt {
            x: lo,
            value: fa,
            iterations: 0,
        }
    };

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut it = 0;
    while it < max_iter && hi - lo > tol * x1.abs().max(1.0) {
        it += 1;
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
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.value || best.value.is_nan() {
            best = ScalarOpt {
                x,
                value: v,
                iterations: it,
            };
        }
    }
    best.iterations = it;
    best
}

/// Golden-section search for the minimum of a unimodal function on `[a, b]`.
pub fn golden_min<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: u32) -> ScalarOpt
where
    F: FnMut(f64) -> f64,
{
    let r = golden_max(|x| -f(x), a, b, tol, max_iter);
    ScalarOpt { value: -r.value, ..r }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let (lo, hi) = bisect(|x| x * x >= 2.0, 0.0, 2.0, 1e-15, 200);
        assert!(lo <= core::f64::consts::SQRT_2 && core::f64::consts::SQRT_2 <= hi);
        assert!(hi - lo < 1e-14);
    }

    #[test]
    fn golden_interior_and_boundary() {
        let r = golden_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-12, 200);
        assert!((r.x - 0.3).abs() < 1e-7);
        let r = golden_min(|x| x, 1.0, 5.0, 1e-12, 200);
        assert_eq!(r.x, 1.0);
        let r = golden_min(|x| if x == 2.0 { 0.0 } else { f64::INFINITY }, 2.0, 3.0, 1e-12, 200);
        assert_eq!((r.x, r.value), (2.0, 0.0));
    }
}
