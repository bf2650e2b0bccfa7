//! Offered-load optimization.
//!
//! [`maximize_objective`] finds the load maximizing `Δ_E / Δ_B^(a+1)`;
//! [`minimize_aoi`] finds the classic AoI-minimizing load of an M/M/1 queue;
//! [`asymptotic_root`] gives the limit of the optimum as the capture
//! probability vanishes, the unique root in `(0, 1)` of
//! `g(ρ) = (a+2)(ρ⁴ - 2ρ³ + ρ²) - (2a+1)ρ + a`.

use serde::{Deserialize, Serialize};

use crate::aoi::{log_objective_normalized, normalized_aoi, TradeoffWeight};
use crate::error::{Error, Result};

/// The AoI-minimizing load of FCFS M/M/1, rounded to three decimals. Used as
/// the ceiling of every welfare-optimal load.
pub const KAUL_YATES_RHO: f64 = 0.531;

/// Edge of the search domain; Δ has poles at 0 and 1.
pub const DOMAIN_EDGE: f64 = 1e-6;
/// Number of points in the coarse scan that seeds golden-section search.
pub const SCAN_POINTS: usize = 1000;
/// Final bracket width of golden-section search.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;
/// Final bracket width of quartic bisection.
pub const ROOT_TOLERANCE: f64 = 1e-10;

const MAX_ITERATIONS: usize = 500;

/// Which function `objective_at_star` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Average AoI at the receiver (minimized). Used when `beta = 0`.
    MinAoi,
    /// `Δ_E / Δ_B^(a+1)` (maximized).
    Welfare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub rho_star: f64,
    pub objective_at_star: f64,
    pub objective: Objective,
    pub iterations: usize,
    pub converged: bool,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteResult {
    pub rho_tilde: f64,
    /// `g(rho_tilde)`.
    pub residual: f64,
    pub iterations: usize,
}

struct Refined {
    x: f64,
    fx: f64,
    lo: f64,
    hi: f64,
    iterations: usize,
    converged: bool,
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Refined {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;

    while hi - lo > tol && iterations < MAX_ITERATIONS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        iterations += 1;
    }

    let x = 0.5 * (lo + hi);
    Refined {
        x,
        fx: f(x),
        lo,
        hi,
        iterations,
        converged: hi - lo <= tol,
    }
}

/// Scans `SCAN_POINTS` evenly spaced points of the clipped domain, then
/// refines around the best one. The scan keeps the refinement away from
/// flat shoulders of the objective.
fn scan_then_refine(f: impl Fn(f64) -> f64) -> Refined {
    let lo = DOMAIN_EDGE;
    let hi = 1.0 - DOMAIN_EDGE;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let at = |i: usize| {
        if i == SCAN_POINTS - 1 {
            hi
        } else {
            lo + step * i as f64
        }
    };

    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..SCAN_POINTS {
        let v = f(at(i));
        if v > best_val {
            best = i;
            best_val = v;
        }
    }

    let left = at(best.saturating_sub(1));
    let right = at((best + 1).min(SCAN_POINTS - 1));
    golden_section_max(f, left, right, GOLDEN_TOLERANCE)
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("mu must be positive, got {mu}")))
    }
}

/// Load minimizing the average AoI of FCFS M/M/1. `rho_star` does not depend
/// on `mu`; `objective_at_star` is the minimal AoI in time units.
pub fn minimize_aoi(mu: f64) -> Result<OptimResult> {
    check_mu(mu)?;
    let r = scan_then_refine(|rho| -normalized_aoi(rho));
    Ok(OptimResult {
        rho_star: r.x,
        objective_at_star: -r.fx / mu,
        objective: Objective::MinAoi,
        iterations: r.iterations,
        converged: r.converged,
        bracket: (r.lo, r.hi),
    })
}

/// Load maximizing `Δ_E / Δ_B^(a+1)` for capture probability `beta`.
///
/// With `beta = 0` the objective is unbounded, so this falls back to
/// [`minimize_aoi`]; the result is then tagged [`Objective::MinAoi`].
pub fn maximize_objective(beta: f64, w: TradeoffWeight, mu: f64) -> Result<OptimResult> {
    check_mu(mu)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::domain(format!(
            "beta must lie in [0, 1], got {beta}"
        )));
    }
    if beta == 0.0 {
        return minimize_aoi(mu);
    }
    let a = w.get();
    let r = scan_then_refine(|rho| log_objective_normalized(rho, beta, a));
    Ok(OptimResult {
        rho_star: r.x,
        objective_at_star: (r.fx + a * mu.ln()).exp(),
        objective: Objective::Welfare,
        iterations: r.iterations,
        converged: r.converged,
        bracket: (r.lo, r.hi),
    })
}

/// `g(ρ)` in Horner form. `g(0) = a` and `g(1) = -(a+1)`.
pub fn asymptotic_polynomial(rho: f64, w: TradeoffWeight) -> f64 {
    let a = w.get();
    let c = a + 2.0;
    (((c * rho - 2.0 * c) * rho + c) * rho - (2.0 * a + 1.0)) * rho + a
}

/// `g'(ρ) = 2ρ(a+2)(ρ-1)(2ρ-1) - 2a - 1`, negative on `(0, 1)`.
pub fn asymptotic_polynomial_derivative(rho: f64, w: TradeoffWeight) -> f64 {
    let a = w.get();
    2.0 * rho * (a + 2.0) * (rho - 1.0) * (2.0 * rho - 1.0) - 2.0 * a - 1.0
}

/// The unique root of `g` in `(0, 1)` by sign bisection.
pub fn asymptotic_root(w: TradeoffWeight) -> AsymptoteResult {
    let g = |rho| asymptotic_polynomial(rho, w);
    // g(0) > 0 > g(1)
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iterations = 0;
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let rho_tilde = 0.5 * (lo + hi);
    AsymptoteResult {
        rho_tilde,
        residual: g(rho_tilde),
        iterations,
    }
}
