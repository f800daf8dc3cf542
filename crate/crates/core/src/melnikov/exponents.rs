//! Exponent functions `G`, `g_k`, `g*` and the transition ladder.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::quadratic_field::{FrequencyModel, IntVec2};
use crate::resonances::{generator, is_primitive, primary_gamma_star, sequence_asymptotics};

/// `C0 = sqrt(pi rho)`, `D0 = (pi / (4 rho))^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MelnikovConstants {
    pub rho: f64,
    pub c0: f64,
    pub d0: f64,
}

impl MelnikovConstants {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(domain(format!("rho = {rho} must be positive")));
        }
        let pi = std::f64::consts::PI;
        Ok(Self {
            rho,
            c0: (pi * rho).sqrt(),
            d0: (pi / (4.0 * rho)).powi(2),
        })
    }

    pub fn of(model: &FrequencyModel) -> Self {
        Self::new(model.rho).expect("frequency model holds a positive rho")
    }
}

/// `G(eps; X, Y) = (sqrt Y / 2) [(eps/X)^(1/4) + (X/eps)^(1/4)]`.
pub fn g_function(eps: f64, x: f64, y: f64) -> Result<f64> {
    if !(eps > 0.0 && x > 0.0 && y > 0.0) {
        return Err(domain(format!("G needs positive arguments, got ({eps}, {x}, {y})")));
    }
    Ok(g_log(eps.ln(), x.ln(), y))
}

fn g_log(ln_eps: f64, ln_x: f64, y: f64) -> f64 {
    let t = 0.25 * (ln_eps - ln_x);
    y.sqrt() * t.cosh()
}

/// `|<k,omega>|` and `gamma~_k = |<k,omega>| |k| / gamma*`.
fn gamma_tilde(model: &FrequencyModel, k: IntVec2) -> Result<f64> {
    if k.is_zero() {
        return Err(domain("zero harmonic"));
    }
    Ok(model.bracket_f64(k).abs() * k.norm1() as f64 / primary_gamma_star(model))
}

/// `eps_k = D0 gamma~_k^2 / |k|^4`.
pub fn eps_k(model: &FrequencyModel, k: IntVec2) -> Result<f64> {
    let c = MelnikovConstants::of(model);
    let gt = gamma_tilde(model, k)?;
    Ok(c.d0 * gt * gt / (k.norm1() as f64).powi(4))
}

/// `beta_k(eps) = rho |k| + (pi/2) |<k,omega>| / sqrt(eps)`.
pub fn beta_k(model: &FrequencyModel, eps: f64, k: IntVec2) -> f64 {
    model.rho * k.norm1() as f64
        + 0.5 * std::f64::consts::PI * model.bracket_f64(k).abs() / eps.sqrt()
}

/// `g_k(eps) = G(eps; eps_k, gamma~_k) = eps^(1/4) beta_k / C0`.
pub fn g_k(model: &FrequencyModel, eps: f64, k: IntVec2) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(domain(format!("eps = {eps} must be positive")));
    }
    let gt = gamma_tilde(model, k)?;
    Ok(g_log(eps.ln(), eps_k(model, k)?.ln(), gt))
}

/// `g` from `beta`: `eps^(1/4) beta / C0`.
pub fn g_from_beta(model: &FrequencyModel, eps: f64, beta: f64) -> f64 {
    eps.powf(0.25) * beta / MelnikovConstants::of(model).c0
}

/// `beta` from `g`.
pub fn beta_from_g(model: &FrequencyModel, eps: f64, g: f64) -> f64 {
    MelnikovConstants::of(model).c0 * g / eps.powf(0.25)
}

/// Limits `(K_j, gamma~*_j)` for the primitive `j <= j_max`.
#[derive(Clone, Debug, Serialize)]
pub struct StarTable {
    pub entries: Vec<StarEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarEntry {
    pub j: i64,
    pub k_limit: f64,
    pub gamma_tilde_star: f64,
}

impl StarTable {
    pub fn new(model: &FrequencyModel, j_max: i64) -> Result<Self> {
        let mut entries = Vec::new();
        for j in 1..=j_max {
            if is_primitive(model, j)? {
                let a = sequence_asymptotics(model, j, 15)?;
                entries.push(StarEntry {
                    j,
                    k_limit: a.k_limit,
                    gamma_tilde_star: a.gamma_tilde_star,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entry(&self, j: i64) -> Result<&StarEntry> {
        self.entries
            .iter()
            .find(|e| e.j == j)
            .ok_or_else(|| domain(format!("j = {j} is not a tabulated primitive")))
    }

    /// `eps*_{s(j,n)} = D0 (gamma~*_j)^2 / (K_j lambda^n)^4`, in log form.
    pub fn ln_eps_star(&self, model: &FrequencyModel, j: i64, n: i64) -> Result<f64> {
        let e = self.entry(j)?;
        let c = MelnikovConstants::of(model);
        Ok(c.d0.ln() + 2.0 * e.gamma_tilde_star.ln()
            - 4.0 * (e.k_limit.ln() + n as f64 * model.lambda_f64().ln()))
    }

    pub fn eps_star(&self, model: &FrequencyModel, j: i64, n: i64) -> Result<f64> {
        Ok(self.ln_eps_star(model, j, n)?.exp())
    }

    /// `g*_{s(j,n)}(eps) = G(eps; eps*_{s(j,n)}, gamma~*_j)`.
    pub fn g_star(&self, model: &FrequencyModel, eps: f64, j: i64, n: i64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(domain(format!("eps = {eps} must be positive")));
        }
        let e = self.entry(j)?;
        Ok(g_log(eps.ln(), self.ln_eps_star(model, j, n)?, e.gamma_tilde_star))
    }

    /// The `depth` smallest `g*` values at `eps`, with their `(j, n)` and vectors.
    pub fn h_star(&self, model: &FrequencyModel, eps: f64, depth: usize) -> Result<Vec<StarMinimum>> {
        let n0 = interval_index(model, eps);
        let mut all = Vec::new();
        for e in &self.entries {
            for n in (n0 - 4).max(0)..=n0 + 4 {
                let g = self.g_star(model, eps, e.j, n)?;
                all.push((g, e.j, n));
            }
        }
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite g*"));
        all.truncate(depth);
        all.into_iter()
            .map(|(g, j, n)| {
                Ok(StarMinimum {
                    j,
                    n,
                    k: model.apply_u_pow(generator(model, j)?, n as u32)?,
                    g_star: g,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StarMinimum {
    pub j: i64,
    pub n: i64,
    pub k: IntVec2,
    pub g_star: f64,
}

fn ln_16_d0(model: &FrequencyModel) -> f64 {
    (16.0 * MelnikovConstants::of(model).d0).ln()
}

/// `eps^_n = 16 D0 / lambda^(4(n+1))`.
pub fn eps_hat(model: &FrequencyModel, n: i64) -> f64 {
    (ln_16_d0(model) - 4.0 * (n + 1) as f64 * model.lambda_f64().ln()).exp()
}

/// `eps'_n = 16 D0 / lambda^(4n+2)`.
pub fn eps_prime(model: &FrequencyModel, n: i64) -> f64 {
    (ln_16_d0(model) - (4 * n + 2) as f64 * model.lambda_f64().ln()).exp()
}

/// The `n` with `eps'_{n+1} < eps <= eps'_n`.
pub fn interval_index(model: &FrequencyModel, eps: f64) -> i64 {
    let x = (ln_16_d0(model) - eps.ln()) / model.lambda_f64().ln();
    ((x - 2.0) / 4.0).floor() as i64
}

/// Position of `eps` inside its period, in units of `4 ln lambda`, measured
/// from `eps^_n`; lies in `[-1/2, 1/2)`.
pub fn period_phase(model: &FrequencyModel, eps: f64) -> f64 {
    let n = interval_index(model, eps);
    (eps.ln() - eps_hat(model, n).ln()) / (4.0 * model.lambda_f64().ln())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransitionLadder {
    pub n: i64,
    pub eps_hat_n: f64,
    pub eps_prime_n: f64,
    pub c0: f64,
    pub d0: f64,
}

impl TransitionLadder {
    pub fn new(model: &FrequencyModel, n: i64) -> Self {
        let c = MelnikovConstants::of(model);
        Self {
            n,
            eps_hat_n: eps_hat(model, n),
            eps_prime_n: eps_prime(model, n),
            c0: c.c0,
            d0: c.d0,
        }
    }

    /// `(eps'_{n+1}, eps'_n)`.
    pub fn interval(&self, model: &FrequencyModel) -> (f64, f64) {
        (eps_prime(model, self.n + 1), self.eps_prime_n)
    }
}
