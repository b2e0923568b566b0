//! Derivative-free scalar maximization.

use crate::scalar::Real;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(argmax, max)` once the bracket is narrower than `tol` or stops
/// shrinking at the working precision.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        let width = b - a;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if !(b - a < width) {
            break;
        }
    }
    let x = (a + b) / T::lit(2.0);
    let fx = f(x);
    // the midpoint can lose to an interior probe on flat or ragged objectives
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Best point of `f` on `n + 1` equispaced nodes of `[lo, hi]`.
pub fn grid_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, n: usize) -> (T, T) {
    let step = (hi - lo) / T::from_usize(n).unwrap();
    (0..=n)
        .map(|i| {
            let x = lo + step * T::from_usize(i).unwrap();
            (x, f(x))
        })
        .fold((lo, T::neg_infinity()), |best, cand| if cand.1 > best.1 { cand } else { best })
}
