//! Closed-form average AoI for FCFS M/M/1 queues and the welfare objective
//! `f = Δ_E / Δ_B^(a+1)` that rewards fresh data at the receiver and stale
//! data at the eavesdropper.
//!
//! Everything is computed on the unit-service-rate normalization and scaled
//! by `1/mu` (or `mu^a` for the objective) at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical scenario: Poisson arrivals at rate `lambda`, exponential service
/// at rate `mu` for both receivers, per-packet capture probability `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    lambda: f64,
    mu: f64,
    beta: f64,
    rho: f64,
}

impl SystemParams {
    pub fn new(lambda: f64, mu: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        check_mu(mu)?;
        Self::checked(lambda, mu, beta, lambda / mu)
    }

    /// Builds the scenario from the offered load `rho = lambda / mu`.
    pub fn from_load(rho: f64, mu: f64, beta: f64) -> Result<Self> {
        check_mu(mu)?;
        Self::checked(rho * mu, mu, beta, rho)
    }

    fn checked(lambda: f64, mu: f64, beta: f64, rho: f64) -> Result<Self> {
        check_load(rho)?;
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::domain(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self {
            lambda,
            mu,
            beta,
            rho,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Offered load at the legitimate receiver.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Offered load of the thinned stream reaching the eavesdropper.
    pub fn eve_load(&self) -> f64 {
        self.beta * self.rho
    }
}

/// Exponent parameter `a > 0`; the receiver's utility enters with power `a + 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TradeoffWeight(f64);

impl TradeoffWeight {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(Self(a))
        } else {
            Err(Error::domain(format!(
                "trade-off weight a must be positive, got {a}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Average AoI at the legitimate receiver (`delta_b`) and at the
/// eavesdropper (`delta_e`, infinite when nothing is captured).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AoiPair {
    pub delta_b: f64,
    pub delta_e: f64,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("mu must be positive, got {mu}")))
    }
}

fn check_load(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("load must lie in (0, 1), got {rho}")))
    }
}

/// `1 + 1/rho + rho^2/(1 - rho)`: average AoI of FCFS M/M/1 with `mu = 1`.
#[inline]
pub(crate) fn normalized_aoi(rho: f64) -> f64 {
    1.0 + 1.0 / rho + rho * rho / (1.0 - rho)
}

/// `ln f` for `mu = 1`, no validation. Used in the optimizer's hot loop.
#[inline]
pub(crate) fn log_objective_normalized(rho: f64, beta: f64, a: f64) -> f64 {
    normalized_aoi(beta * rho).ln() - (a + 1.0) * normalized_aoi(rho).ln()
}

/// Average AoI of an FCFS M/M/1 queue at load `rho` and service rate `mu`.
pub fn avg_aoi_mm1(rho: f64, mu: f64) -> Result<f64> {
    check_load(rho)?;
    check_mu(mu)?;
    Ok(normalized_aoi(rho) / mu)
}

/// Average AoI at both receivers. The eavesdropper sees an M/M/1 queue at
/// load `beta * rho`; with `beta = 0` its AoI is `+inf`.
pub fn aoi_pair(params: &SystemParams) -> Result<AoiPair> {
    let delta_b = avg_aoi_mm1(params.rho(), params.mu())?;
    let delta_e = if params.beta() == 0.0 {
        f64::INFINITY
    } else {
        avg_aoi_mm1(params.beta() * params.rho(), params.mu())?
    };
    Ok(AoiPair { delta_b, delta_e })
}

/// `(u1, u2) = (1/Δ_B, Δ_E)`, the two competing utilities.
pub fn utilities(params: &SystemParams) -> Result<(f64, f64)> {
    let pair = aoi_pair(params)?;
    Ok((1.0 / pair.delta_b, pair.delta_e))
}

/// Natural log of [`bergson_objective`]. Finite even where the objective
/// itself under- or overflows.
pub fn log_bergson_objective(params: &SystemParams, w: TradeoffWeight) -> Result<f64> {
    if params.beta() == 0.0 {
        return Err(Error::domain(
            "objective is unbounded for beta = 0; use the AoI-minimizing load instead",
        ));
    }
    let a = w.get();
    Ok(log_objective_normalized(params.rho(), params.beta(), a) + a * params.mu().ln())
}

/// `f = Δ_E / Δ_B^(a+1)`, evaluated in log space.
pub fn bergson_objective(params: &SystemParams, w: TradeoffWeight) -> Result<f64> {
    log_bergson_objective(params, w).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(rho: f64, mu: f64, beta: f64) -> SystemParams {
        SystemParams::from_load(rho, mu, beta).unwrap()
    }

    fn w(a: f64) -> TradeoffWeight {
        TradeoffWeight::new(a).unwrap()
    }

    #[test]
    fn aoi_hand_values() {
        assert_eq!(avg_aoi_mm1(0.5, 1.0).unwrap(), 3.5);
        assert_eq!(avg_aoi_mm1(0.5, 2.0).unwrap(), 1.75);
        assert!(avg_aoi_mm1(1.0 - 1e-12, 1.0).unwrap() > 1e11);
        assert!(avg_aoi_mm1(1e-12, 1.0).unwrap() > 1e11);
    }

    #[test]
    fn aoi_rejects_out_of_domain() {
        for (rho, mu) in [
            (0.0, 1.0),
            (1.0, 1.0),
            (-0.1, 1.0),
            (1.5, 1.0),
            (0.5, 0.0),
            (0.5, -2.0),
        ] {
            assert!(
                matches!(avg_aoi_mm1(rho, mu), Err(Error::Domain(_))),
                "{rho} {mu}"
            );
        }
        assert!(SystemParams::new(2.0, 1.0, 0.5).is_err());
        assert!(SystemParams::new(0.5, 1.0, 1.5).is_err());
        assert!(SystemParams::new(0.5, 1.0, -0.1).is_err());
        assert!(TradeoffWeight::new(0.0).is_err());
        assert!(TradeoffWeight::new(f64::INFINITY).is_err());
    }

    #[test]
    fn pair_examples() {
        assert_eq!(
            aoi_pair(&p(0.5, 1.0, 1.0)).unwrap(),
            AoiPair {
                delta_b: 3.5,
                delta_e: 3.5
            }
        );
        let half = aoi_pair(&p(0.5, 1.0, 0.5)).unwrap();
        assert_eq!(half.delta_b, 3.5);
        // 1 + 4 + 0.0625 / 0.75
        assert_relative_eq!(half.delta_e, 5.0 + 0.0625 / 0.75, max_relative = 1e-15);
        let none = aoi_pair(&p(0.5, 1.0, 0.0)).unwrap();
        assert_eq!(none.delta_b, 3.5);
        assert_eq!(none.delta_e, f64::INFINITY);
    }

    #[test]
    fn utilities_examples() {
        let (u1, u2) = utilities(&p(0.5, 1.0, 0.5)).unwrap();
        assert_relative_eq!(u1, 1.0 / 3.5);
        assert_relative_eq!(u2, 5.083_333_333_333_333, max_relative = 1e-12);
        assert_eq!(utilities(&p(0.5, 1.0, 1.0)).unwrap(), (1.0 / 3.5, 3.5));
        assert_eq!(
            utilities(&p(0.5, 1.0, 0.0)).unwrap(),
            (1.0 / 3.5, f64::INFINITY)
        );
    }

    #[test]
    fn objective_examples() {
        let f = bergson_objective(&p(0.5, 1.0, 1.0), w(1.0)).unwrap();
        assert_relative_eq!(f, 1.0 / 3.5, max_relative = 1e-14);
        let f = bergson_objective(&p(0.5, 1.0, 1.0), w(1e-12)).unwrap();
        assert_relative_eq!(f, 1.0, max_relative = 1e-10);
        let f = bergson_objective(&p(0.5, 1.0, 0.5), w(1.0)).unwrap();
        assert_relative_eq!(f, (5.0 + 0.0625 / 0.75) / 12.25, max_relative = 1e-14);
        assert_relative_eq!(f, 0.41497, max_relative = 1e-4);
    }

    #[test]
    fn objective_rejects_zero_beta() {
        assert!(matches!(
            bergson_objective(&p(0.5, 1.0, 0.0), w(1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn objective_scales_with_mu_to_the_a() {
        let f1 = bergson_objective(&p(0.4, 1.0, 0.3), w(2.5)).unwrap();
        let f3 = bergson_objective(&p(0.4, 3.0, 0.3), w(2.5)).unwrap();
        let direct = avg_aoi_mm1(0.12, 3.0).unwrap() / avg_aoi_mm1(0.4, 3.0).unwrap().powf(3.5);
        assert_relative_eq!(f3, direct, max_relative = 1e-12);
        assert_relative_eq!(f3, f1 * 3f64.powf(2.5), max_relative = 1e-12);
    }

    #[test]
    fn log_space_survives_large_exponents() {
        // Δ_B^(a+1) overflows f64 here; the log stays finite.
        let params = p(0.999_999, 1.0, 0.5);
        let lf = log_bergson_objective(&params, w(500.0)).unwrap();
        assert!(lf.is_finite() && lf < -1000.0);
        assert_eq!(bergson_objective(&params, w(500.0)).unwrap(), 0.0);
    }

    #[test]
    fn vanishes_near_full_load() {
        for a in [1.0, 2.0, 5.0, 10.0] {
            for beta in [0.2, 0.5, 1.0] {
                let f = bergson_objective(&p(1.0 - 1e-6, 1.0, beta), w(a)).unwrap();
                assert!(f < 1e-3, "a={a} beta={beta} f={f}");
            }
        }
    }

    #[test]
    fn positive_on_grid() {
        for i in 1..100 {
            let rho = i as f64 / 100.0;
            for j in 1..=20 {
                let beta = j as f64 / 20.0;
                for a in [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                    let f = bergson_objective(&p(rho, 1.0, beta), w(a)).unwrap();
                    assert!(f > 0.0 && f.is_finite(), "rho={rho} beta={beta} a={a}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn composition_identity(rho in 1e-6..(1.0 - 1e-6), beta in 1e-6..=1.0f64, mu in 1e-3..1e3f64) {
            let params = p(rho, mu, beta);
            let pair = aoi_pair(&params).unwrap();
            prop_assert_eq!(pair.delta_e, avg_aoi_mm1(beta * params.rho(), mu).unwrap());
        }

        #[test]
        fn scale_law(rho in 1e-6..(1.0 - 1e-6), mu in 1e-3..1e3f64) {
            let scaled = avg_aoi_mm1(rho, mu).unwrap();
            let unit = avg_aoi_mm1(rho, 1.0).unwrap() / mu;
            prop_assert!(((scaled - unit) / unit).abs() <= 1e-12);
        }

        #[test]
        fn full_capture_is_degenerate(rho in 1e-6..(1.0 - 1e-6), mu in 1e-3..1e3f64) {
            let pair = aoi_pair(&p(rho, mu, 1.0)).unwrap();
            prop_assert_eq!(pair.delta_b.to_bits(), pair.delta_e.to_bits());
        }

        #[test]
        fn bounded_below_by_two_service_times(rho in 1e-6..(1.0 - 1e-6), mu in 1e-3..1e3f64) {
            prop_assert!(avg_aoi_mm1(rho, mu).unwrap() >= 2.0 / mu);
        }
    }
}
