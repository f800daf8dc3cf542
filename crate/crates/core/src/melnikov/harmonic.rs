//! Fourier coefficients of the Melnikov potential in log form.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadratic_field::{FrequencyModel, IntVec2};
use crate::real::{MpFloat, Real, F64_BITS};

/// Above this exponent the coefficient is recomputed in extended precision.
pub const ESCALATION_NATS: f64 = 600.0;
const ESCALATED_BITS: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicTerm {
    pub k: IntVec2,
    pub sigma: f64,
    /// `ln(4 pi |<k, omega_eps>|)`.
    pub ln_alpha: f64,
    /// `rho |k| + (pi/2) |<k, omega_eps>|`.
    pub beta: f64,
    /// `ln L_k` from the residue formula without approximation.
    pub ln_l_exact: f64,
    /// `ln mu + ln L_k`.
    pub ln_l_model: f64,
    /// `tau_k`, equal to `sigma_k` in the first-order model.
    pub tau: f64,
    pub precision_bits: usize,
}

impl HarmonicTerm {
    /// `ln L_k - (ln alpha_k - beta_k) = -ln(1 - exp(-pi x))`.
    pub fn neglected_term(&self) -> f64 {
        self.ln_l_exact - (self.ln_alpha - self.beta)
    }

    /// `x = |<k, omega_eps>|`.
    pub fn x(&self) -> f64 {
        (self.ln_alpha - (4.0 * std::f64::consts::PI).ln()).exp()
    }
}

/// `ln L_k = ln(2 pi x) - rho |k| - ln sinh(pi x / 2)` with
/// `x = |<k,omega>| / sqrt(eps)`; the limit at `x = 0` is `ln 4 - rho |k|`.
pub fn ln_l_exact_real<R: Real>(model: &FrequencyModel, eps: &R, k: IntVec2) -> Result<R> {
    let bits = eps.bits();
    let bracket: R = model.bracket(k)?.abs().to_real(bits);
    let x = bracket / eps.sqrt();
    let pi = R::pi(bits);
    let u = pi.clone() * x.clone() / x.lift(2.0);
    let rho_k = x.lift(model.rho) * R::from_i128(k.norm1() as i128, bits);
    if u.to_f64() < 1e-8 {
        // 2 pi x / sinh(pi x / 2) = 4 (1 - u^2/6 + ...)
        return Ok(x.lift(4.0).ln() - u.clone() * u / x.lift(6.0) - rho_k);
    }
    Ok((x.lift(2.0) * pi * x).ln() - rho_k - u.ln_sinh())
}

pub fn ln_l_exact(model: &FrequencyModel, eps: f64, k: IntVec2) -> Result<f64> {
    ln_l_exact_real::<f64>(model, &eps, k)
}

/// Coefficient data for `mu L_k cos(<k, theta> - sigma_k)`.
pub fn harmonic(model: &FrequencyModel, eps: f64, mu: f64, k: IntVec2, sigma: f64) -> Result<HarmonicTerm> {
    if !(eps > 0.0 && mu > 0.0) {
        return Err(domain(format!("eps = {eps}, mu = {mu} must be positive")));
    }
    if k.is_zero() {
        return Err(domain("zero harmonic"));
    }
    let x = model.bracket_f64(k).abs() / eps.sqrt();
    let beta = model.rho * k.norm1() as f64 + 0.5 * std::f64::consts::PI * x;
    let ln_alpha = (4.0 * std::f64::consts::PI * x).ln();
    let (ln_l, bits) = if beta > ESCALATION_NATS {
        let e = MpFloat::from_f64(eps, ESCALATED_BITS);
        (ln_l_exact_real::<MpFloat>(model, &e, k)?.to_f64(), ESCALATED_BITS)
    } else {
        (ln_l_exact(model, eps, k)?, F64_BITS)
    };
    Ok(HarmonicTerm {
        k,
        sigma,
        ln_alpha,
        beta,
        ln_l_exact: ln_l,
        ln_l_model: mu.ln() + ln_l,
        tau: sigma,
        precision_bits: bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::{beta_k, eps_k, g_k, MelnikovConstants};

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn neglected_term_is_bounded() {
        let m = silver();
        for k in [IntVec2::new(0, 1), IntVec2::new(-2, 5), IntVec2::new(1, 0), IntVec2::new(-12, 29)] {
            for eps in [1e-6, 1e-3, 0.1, 1.0] {
                let h = harmonic(&m, eps, 1.0, k, 0.0).unwrap();
                let y = (-std::f64::consts::PI * h.x()).exp();
                assert!(h.neglected_term() >= -1e-14 * h.beta, "{k} {eps}: {}", h.neglected_term());
                // -ln(1 - y) <= 2y holds for y <= 1/2
                if y <= 0.5 {
                    assert!(h.neglected_term() <= 2.0 * y + 1e-14 * h.beta, "{k} {eps}");
                }
                assert!((h.beta - beta_k(&m, eps, k)).abs() < 1e-12 * h.beta);
            }
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        let m = silver();
        let k = IntVec2::new(1, 0);
        let eps = 1e-4;
        let h = harmonic(&m, eps, 1.0, k, 0.0).unwrap();
        let x = h.x();
        let approx = (4.0 * std::f64::consts::PI * x).ln() - 1.0 - 0.5 * std::f64::consts::PI * x;
        assert!((h.ln_l_exact - approx).abs() < 1e-12);
    }

    #[test]
    fn small_argument_limit() {
        let m = silver();
        let k = IntVec2::new(-12, 29);
        let v = ln_l_exact(&m, 1e30, k).unwrap();
        assert!((v - (4f64.ln() - 41.0)).abs() < 1e-9);
    }

    #[test]
    fn exponent_differences_follow_g() {
        // ln L_{Uk} - ln L_k = -(beta_{Uk} - beta_k) + (alpha ratio) + neglected terms
        let m = silver();
        let c = MelnikovConstants::of(&m);
        let eps = 2e-5;
        for k in [IntVec2::new(-2, 5), IntVec2::new(-5, 12), IntVec2::new(-7, 17)] {
            let uk = m.apply_u(k).unwrap();
            let a = harmonic(&m, eps, 1.0, k, 0.0).unwrap();
            let b = harmonic(&m, eps, 1.0, uk, 0.0).unwrap();
            let dg = g_k(&m, eps, uk).unwrap() - g_k(&m, eps, k).unwrap();
            let predicted = -c.c0 * dg / eps.powf(0.25) + (b.ln_alpha - a.ln_alpha);
            let slack = a.neglected_term().abs() + b.neglected_term().abs();
            assert!(((b.ln_l_exact - a.ln_l_exact) - predicted).abs() <= slack + 1e-10);
        }
    }

    #[test]
    fn beta_minimum_value() {
        let m = silver();
        let c = MelnikovConstants::of(&m);
        let k = IntVec2::new(-5, 12);
        let ek = eps_k(&m, k).unwrap();
        let gt = 2.0 * m.bracket_f64(k).abs() * 17.0;
        let h = harmonic(&m, ek, 1.0, k, 0.0).unwrap();
        assert!((h.beta - c.c0 * gt.sqrt() / ek.powf(0.25)).abs() < 1e-11 * h.beta);
    }

    #[test]
    fn escalation_agrees_with_binary64() {
        let m = silver();
        let k = IntVec2::new(-408, 985);
        let eps = 1e-12;
        let h = harmonic(&m, eps, 1.0, k, 0.0).unwrap();
        assert!(h.beta > ESCALATION_NATS);
        assert_eq!(h.precision_bits, 256);
        let plain = ln_l_exact(&m, eps, k).unwrap();
        assert!((h.ln_l_exact - plain).abs() < 1e-12 * plain.abs());
    }
}
