//! Truncated Fourier series of `mu L(theta)` with derivatives.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::melnikov::enumerate::{candidates, ln_tail_bound};
use crate::melnikov::exponents::MelnikovConstants;
use crate::melnikov::harmonic::ln_l_exact;
use crate::phases::Phases;
use crate::quadratic_field::{FrequencyModel, IntVec2};

#[derive(Clone, Debug, Serialize)]
pub struct SeriesTerm {
    pub k: IntVec2,
    /// `ln(mu L_k)`.
    pub ln_l: f64,
    pub beta: f64,
    pub sigma: f64,
}

/// Value, gradient and Hessian, all multiplied by `exp(-ln_scale)`.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesValue {
    pub ln_scale: f64,
    pub value: f64,
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct MelnikovSeries {
    pub eps: f64,
    pub mu: f64,
    pub beta_max: f64,
    /// Sorted by decreasing coefficient.
    pub terms: Vec<SeriesTerm>,
    /// Largest `ln(mu L_k)`.
    pub ln_scale: f64,
    /// Certified `ln sum |k|^2 mu L_k` over the omitted harmonics.
    pub ln_tail_bound: f64,
}

/// Smallest exponent over all harmonics.
pub fn min_beta(model: &FrequencyModel, eps: f64) -> Result<f64> {
    let c0 = MelnikovConstants::of(model).c0;
    let mut cap = 1.2 * c0 / eps.powf(0.25) + model.rho;
    for _ in 0..60 {
        let c = candidates(model, eps, cap)?;
        if let Some(b) = c.iter().map(|c| c.beta).reduce(f64::min) {
            return Ok(b);
        }
        cap *= 1.5;
    }
    Err(Error::RadiusInsufficient(format!("no harmonic found at eps = {eps}")))
}

impl MelnikovSeries {
    /// Keeps every harmonic with `beta_k <= beta_max`.
    pub fn with_beta_max(
        model: &FrequencyModel,
        eps: f64,
        mu: f64,
        phases: &Phases,
        beta_max: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && mu > 0.0) {
            return Err(domain(format!("eps = {eps}, mu = {mu} must be positive")));
        }
        let mut terms = candidates(model, eps, beta_max)?
            .into_iter()
            .map(|c| {
                Ok(SeriesTerm {
                    k: c.k,
                    ln_l: mu.ln() + ln_l_exact(model, eps, c.k)?,
                    beta: c.beta,
                    sigma: phases.sigma(c.k),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        terms.sort_by(|a, b| b.ln_l.partial_cmp(&a.ln_l).expect("finite coefficients"));
        let ln_scale = terms.first().map(|t| t.ln_l).unwrap_or(f64::NEG_INFINITY);
        Ok(Self {
            eps,
            mu,
            beta_max,
            terms,
            ln_scale,
            ln_tail_bound: mu.ln() + ln_tail_bound(model, beta_max, 2),
        })
    }

    /// Truncation with `sum_{omitted} |k|^2 mu L_k <= rel_tol * max mu L_k`.
    pub fn new(model: &FrequencyModel, eps: f64, mu: f64, phases: &Phases, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(domain(format!("rel_tol = {rel_tol} outside (0, 1)")));
        }
        let b0 = min_beta(model, eps)?;
        let mut beta_max = b0 - rel_tol.ln() + 10.0;
        for _ in 0..400 {
            let s = Self::with_beta_max(model, eps, mu, phases, beta_max)?;
            if s.tail_relative_ln() < rel_tol.ln() {
                return Ok(s);
            }
            beta_max += 5.0;
        }
        Err(Error::TailBound(format!(
            "no truncation reaches relative tail {rel_tol} at eps = {eps}"
        )))
    }

    /// `ln(tail bound / largest coefficient)`.
    pub fn tail_relative_ln(&self) -> f64 {
        self.ln_tail_bound - self.ln_scale
    }

    pub fn evaluate(&self, theta: [f64; 2]) -> SeriesValue {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for t in &self.terms {
            let c = (t.ln_l - self.ln_scale).exp();
            if c == 0.0 {
                break;
            }
            let (s, co) = (t.k.dot_f64(theta) - t.sigma).sin_cos();
            let k = [t.k.k1 as f64, t.k.k2 as f64];
            v += c * co;
            for i in 0..2 {
                g[i] -= c * s * k[i];
                for j in 0..2 {
                    h[i][j] -= c * co * k[i] * k[j];
                }
            }
        }
        SeriesValue {
            ln_scale: self.ln_scale,
            value: v,
            gradient: g,
            hessian: h,
        }
    }
}

pub fn melnikov_series(
    model: &FrequencyModel,
    theta: [f64; 2],
    eps: f64,
    mu: f64,
    phases: &Phases,
    rel_tol: f64,
) -> Result<SeriesValue> {
    Ok(MelnikovSeries::new(model, eps, mu, phases, rel_tol)?.evaluate(theta))
}
