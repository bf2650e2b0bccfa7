//! Independent reference computations. Nothing here calls into the
//! optimizer or the crate's internal objective.

#![allow(dead_code)]

/// Average AoI of FCFS M/M/1 with unit service rate, written out directly.
pub fn aoi(rho: f64) -> f64 {
    1.0 + 1.0 / rho + rho * rho / (1.0 - rho)
}

pub fn log_welfare(rho: f64, beta: f64, a: f64) -> f64 {
    aoi(beta * rho).ln() - (a + 1.0) * aoi(rho).ln()
}

/// Exhaustive scan of `log_welfare` on `step, 2*step, ..., < 1`.
/// Returns `(argmax, max f)`.
pub fn grid_scan_argmax(beta: f64, a: f64, step: f64) -> (f64, f64) {
    let n = (1.0 / step).round() as usize;
    let (i, v) = (1..n)
        .map(|i| (i, log_welfare(i as f64 * step, beta, a)))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    (i as f64 * step, v.exp())
}

/// Sign bisection of a decreasing-through-zero function on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
