//! Bracketing bisection for monotone predicates.

/// Shrinks `[lo, hi]` around the boundary of a monotone predicate, assuming
/// `pred(lo)` is false and `pred(hi)` is true. Stops once the bracket width
/// is within `rtol` of `hi` (or `atol`, whichever is larger) and returns the
/// bracket.
pub fn bisect<F>(mut lo: f64, mut hi: f64, rtol: f64, atol: f64, mut pred: F) -> (f64, f64)
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..2000 {
        if hi - lo <= (rtol * hi.abs()).max(atol) {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Solves `f(x) = target` for a continuous nondecreasing `f` on `[lo, hi]`
/// with `f(lo) <= target <= f(hi)`.
pub fn solve_increasing<F>(lo: f64, hi: f64, target: f64, rtol: f64, atol: f64, mut f: F) -> f64
where
    F: FnMut(f64) -> f64,
{
    let (a, b) = bisect(lo, hi, rtol, atol, |x| f(x) >= target);
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_square_root() {
        let x = solve_increasing(0.0, 2.0, 2.0, 1e-14, 0.0, |x| x * x);
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn degenerate_bracket_returns_immediately() {
        let (lo, hi) = bisect(1.0, 1.0, 1e-12, 0.0, |_| unreachable!());
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn step_predicate_located() {
        let (lo, hi) = bisect(0.0, 10.0, 0.0, 1e-12, |x| x >= 3.25);
        assert!(lo < 3.25 && hi >= 3.25 && hi - lo <= 1e-12);
    }
}
