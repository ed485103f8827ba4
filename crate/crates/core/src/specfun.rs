//! Exponential integral, the radial potential of the screened kernel, and
//! the Yukawa kernel itself.
//!
//! Kernels come in two scales. The unit-scale kernel `K_α(x) = e^{-α|x|}/(2π|x|)`
//! carries its normalisation; the blown-up kernel `e^{-λα r}/r` used by the
//! rescaled energy is bare, and its `λ²/(4π)` prefactor is applied by the
//! energy layer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::geom::Vec2;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(z) = ∫_z^∞ e^{-t}/t dt` for `z > 0`.
///
/// Power series below 1, modified-Lentz continued fraction above.
pub fn exp_integral_e1(z: f64) -> Result<f64> {
    ensure_positive("E1 argument", z)?;
    Ok(e1_unchecked(z))
}

pub(crate) fn e1_unchecked(z: f64) -> f64 {
    if z < 1.0 {
        // E1(z) = -γ - ln z - Σ_{n≥1} (-z)^n / (n n!)
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..60 {
            term *= -z / n as f64;
            let add = term / n as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - z.ln() - sum
    } else {
        // e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - ...)))
        const TINY: f64 = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-z).exp()
    }
}

/// `Ein(z) = ∫_0^z (1 - e^{-t})/t dt`, the entire part of `E₁`.
pub fn ein(z: f64) -> f64 {
    if z < 2.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..80 {
            term *= -z / n as f64;
            let add = -term / n as f64;
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        EULER_GAMMA + z.ln() + e1_unchecked(z)
    }
}

/// Radial potential `Φ_α(r) = E₁(αr)/α`, solving `ΔΦ = e^{-αr}/r` off the origin.
pub fn phi_alpha(r: f64, alpha: f64) -> Result<f64> {
    ensure_positive("radius", r)?;
    ensure_positive("alpha", alpha)?;
    Ok(e1_unchecked(alpha * r) / alpha)
}

/// `Φ'_α(r) = -e^{-αr}/(αr)`.
pub fn phi_alpha_prime(r: f64, alpha: f64) -> Result<f64> {
    ensure_positive("radius", r)?;
    ensure_positive("alpha", alpha)?;
    Ok(-(-alpha * r).exp() / (alpha * r))
}

/// Unit-scale Yukawa kernel `K_α(x) = e^{-α|x|}/(2π|x|)`.
pub fn yukawa_kernel(x: Vec2, alpha: f64) -> Result<f64> {
    ensure_positive("alpha", alpha)?;
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok((-alpha * r).exp() / (2.0 * PI * r))
}

/// Blown-up kernel `e^{-λα r}/r` without prefactor.
#[inline]
pub fn screened_kernel(r: f64, rate: f64) -> f64 {
    (-rate * r).exp() / r
}

/// Screening parameters of the rescaled energy.
///
/// `lambda` is the blow-up factor (mass `m = λ²π`), `alpha` the screening
/// parameter and `sigma = λ²(1 - 1/(2πα²))` the critical-regime coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningParams {
    lambda: f64,
    alpha: f64,
}

impl ScreeningParams {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        ensure_positive("alpha", alpha)?;
        Ok(ScreeningParams { lambda, alpha })
    }

    /// Chooses `α² = 1/(2π(1 - σ/λ²))`; requires `σ < λ²`.
    pub fn from_sigma(lambda: f64, sigma: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        if !sigma.is_finite() || sigma >= lambda * lambda {
            return Err(Error::Domain { what: "sigma must satisfy sigma < lambda^2", value: sigma });
        }
        let alpha = (1.0 / (2.0 * PI * (1.0 - sigma / (lambda * lambda)))).sqrt();
        Self::new(lambda, alpha)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.lambda * self.lambda * self.perimeter_coefficient()
    }

    /// `1 - 1/(2πα²)`.
    pub fn perimeter_coefficient(&self) -> f64 {
        1.0 - 1.0 / (2.0 * PI * self.alpha * self.alpha)
    }

    /// Decay rate `λα` of the blown-up kernel.
    pub fn rate(&self) -> f64 {
        self.lambda * self.alpha
    }

    pub fn mass(&self) -> f64 {
        self.lambda * self.lambda * PI
    }
}

/// Critical screening parameter `1/√(2π)`.
pub fn critical_alpha() -> f64 {
    (2.0 * PI).sqrt().recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use quadrature::double_exponential;

    fn e1_oracle(z: f64) -> f64 {
        // ∫_1^∞ e^{-t}/t dt with t = 1 + u/(1-u), plus ∫_z^1 e^{-t}/t dt = ∫_{ln z}^0 e^{-e^s} ds.
        let tail_from = |z0: f64| {
            double_exponential::integrate(
                |u: f64| {
                    if u >= 1.0 {
                        return 0.0;
                    }
                    let t = z0 + u / (1.0 - u);
                    (-t).exp() / t / ((1.0 - u) * (1.0 - u))
                },
                0.0,
                1.0,
                1e-15,
            )
            .integral
        };
        if z >= 1.0 {
            return tail_from(z);
        }
        let head = double_exponential::integrate(|s: f64| (-s.exp()).exp(), z.ln(), 0.0, 1e-15).integral;
        head + tail_from(1.0)
    }

    #[test]
    fn e1_at_one() {
        let oracle = e1_oracle(1.0);
        assert!((oracle - 0.219_383_934_395_520_3).abs() < 1e-12);
        assert!((exp_integral_e1(1.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn e1_matches_quadrature_on_both_branches() {
        for &z in &[1e-3, 0.1, 0.5, 0.999, 1.0, 1.5, 3.0, 10.0, 30.0] {
            let v = exp_integral_e1(z).unwrap();
            assert!((v - e1_oracle(z)).abs() < 1e-12, "z = {z}: {v} vs {}", e1_oracle(z));
        }
    }

    #[test]
    fn e1_asymptotics() {
        let z = 50.0;
        let scaled = exp_integral_e1(z).unwrap() * z * z.exp();
        assert!((scaled - 1.0).abs() < 0.02);
    }

    #[test]
    fn e1_domain() {
        assert!(matches!(exp_integral_e1(0.0), Err(Error::Domain { .. })));
        assert!(exp_integral_e1(-1.0).is_err());
    }

    #[test]
    fn e1_positive_and_decreasing_on_log_grid() {
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let z = 1e-3 * (50.0f64 / 1e-3).powf(i as f64 / 200.0);
            let v = exp_integral_e1(z).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn ein_consistent_with_e1() {
        for &z in &[0.01, 0.7, 1.9, 2.1, 5.0, 40.0] {
            let direct = EULER_GAMMA + f64::ln(z) + e1_unchecked(z);
            assert_relative_eq!(ein(z), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn phi_prime_closed_form() {
        assert_relative_eq!(phi_alpha_prime(1.0, 1.0).unwrap(), -(-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn phi_prime_is_derivative_of_phi() {
        let (r, a, h) = (0.7, 2.0, 1e-5);
        let fd = (phi_alpha(r + h, a).unwrap() - phi_alpha(r - h, a).unwrap()) / (2.0 * h);
        assert!((fd - phi_alpha_prime(r, a).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn phi_decays() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 1..60 {
            let r = 0.25 * i as f64;
            let p = phi_alpha(r, 1.3).unwrap();
            let dp = phi_alpha_prime(r, 1.3).unwrap();
            assert!(dp < 0.0);
            assert!(p < prev.0 && dp.abs() < prev.1);
            prev = (p, dp.abs());
        }
        assert!(phi_alpha(0.0, 1.0).is_err());
        assert!(phi_alpha_prime(1.0, -1.0).is_err());
    }

    #[test]
    fn kernel_mass_is_inverse_alpha() {
        // ∫ K_α = ∫_0^∞ e^{-αr} dr, radial reduction.
        let alpha = 2.0;
        let mass = double_exponential::integrate(
            |u: f64| {
                if u >= 1.0 {
                    return 0.0;
                }
                let r = u / (1.0 - u);
                let k = yukawa_kernel(Vec2::new(r, 0.0), alpha).unwrap_or(0.0);
                2.0 * PI * r * k / ((1.0 - u) * (1.0 - u))
            },
            0.0,
            1.0,
            1e-14,
        )
        .integral;
        assert!((mass - 1.0 / alpha).abs() < 1e-8);
    }

    #[test]
    fn kernel_symmetric_and_singular_at_origin() {
        let x = Vec2::new(0.3, -1.7);
        assert_eq!(yukawa_kernel(x, 0.8).unwrap(), yukawa_kernel(-x, 0.8).unwrap());
        assert!(matches!(yukawa_kernel(Vec2::ZERO, 1.0), Err(Error::Singularity)));
        assert!(yukawa_kernel(x, 0.0).is_err());
    }

    #[test]
    fn screening_round_trip() {
        for &(l, a) in &[(2.0, 1.0), (64.0, 0.4), (7.5, 3.0), (1.0, 0.3)] {
            let p = ScreeningParams::new(l, a).unwrap();
            let q = ScreeningParams::from_sigma(l, p.sigma()).unwrap();
            assert!((q.alpha() - a).abs() < 1e-12 * a.max(1.0));
        }
        assert!(ScreeningParams::from_sigma(2.0, 4.0).is_err());
        let crit = ScreeningParams::new(3.0, critical_alpha()).unwrap();
        assert!(crit.perimeter_coefficient().abs() < 1e-15);
    }
}
