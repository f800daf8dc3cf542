//! Ranking of the dominant harmonics at a given `eps`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::melnikov::enumerate::{candidates, Candidate};
use crate::melnikov::exponents::{g_from_beta, interval_index, StarMinimum, StarTable};
use crate::melnikov::harmonic::ln_l_exact;
use crate::melnikov::series::min_beta;
use crate::quadratic_field::{FrequencyModel, IntVec2};
use crate::real::{MpFloat, Real};
use crate::resonances::classify;

/// Working precision for tie refinement unless `SILVERSPLIT_PRECISION` is set.
pub const DEFAULT_PRECISION_BITS: usize = 256;

pub fn precision_bits_from_env() -> usize {
    std::env::var("SILVERSPLIT_PRECISION")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&b| b >= 53)
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

#[derive(Clone, Debug, Serialize)]
pub struct RankedHarmonic {
    pub k: IntVec2,
    /// `g_k(eps)`.
    pub h: f64,
    pub beta: f64,
    /// `ln(mu L_k)`.
    pub ln_l: f64,
    /// `(j, n)` with `k = s(j, n)`, when `k` lies on a resonant sequence.
    pub sequence: Option<(i64, u32)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceProfile {
    pub eps: f64,
    pub mu: f64,
    /// Exact ranking by `g_k`, increasing.
    pub ranked: Vec<RankedHarmonic>,
    /// Ranking by the limit functions `g*`.
    pub asymptotic: Vec<StarMinimum>,
    /// `n` with `eps'_{n+1} < eps <= eps'_n`.
    pub n_interval: i64,
}

impl DominanceProfile {
    pub fn h(&self, i: usize) -> f64 {
        self.ranked[i].h
    }

    pub fn s(&self, i: usize) -> IntVec2 {
        self.ranked[i].k
    }
}

/// Reusable context: the `g*` table and the refinement precision.
#[derive(Clone, Debug)]
pub struct Dominance {
    pub model: FrequencyModel,
    pub stars: StarTable,
    pub precision_bits: usize,
}

fn beta_mp(model: &FrequencyModel, eps: f64, k: IntVec2, bits: usize) -> Result<MpFloat> {
    let e = MpFloat::from_f64(eps, bits);
    let x = model.bracket(k)?.abs().to_real::<MpFloat>(bits) / e.sqrt();
    let half_pi = MpFloat::pi(bits) / MpFloat::from_f64(2.0, bits);
    Ok(MpFloat::from_f64(model.rho, bits) * MpFloat::from_i128(k.norm1() as i128, bits) + half_pi * x)
}

fn tie_break(a: &Candidate, b: &Candidate) -> Ordering {
    a.k.norm1().cmp(&b.k.norm1()).then(a.k.cmp(&b.k))
}

/// Orders by `beta`; pairs closer than `1e-12` relative are compared in
/// `bits`-bit arithmetic, and exact ties fall back to `|k|_1` then `k`.
pub fn rank_candidates(model: &FrequencyModel, eps: f64, cands: &mut [Candidate], bits: usize) -> Result<()> {
    let mut fail = None;
    cands.sort_by(|a, b| {
        let scale = a.beta.abs().max(b.beta.abs());
        if (a.beta - b.beta).abs() > 1e-12 * scale {
            return a.beta.partial_cmp(&b.beta).unwrap_or(Ordering::Equal);
        }
        match (beta_mp(model, eps, a.k, bits), beta_mp(model, eps, b.k, bits)) {
            (Ok(x), Ok(y)) => {
                let d = (x.clone() - y).to_f64();
                let resolution = scale * (2.0f64).powi(-(bits as i32 - 16));
                if d.abs() <= resolution {
                    tie_break(a, b)
                } else if d < 0.0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                fail.get_or_insert(e);
                Ordering::Equal
            }
        }
    });
    match fail {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// The `depth` harmonics of smallest exponent at `eps`, sorted.
pub fn smallest_harmonics(model: &FrequencyModel, eps: f64, depth: usize, bits: usize) -> Result<Vec<Candidate>> {
    if depth == 0 {
        return Err(domain("depth must be positive"));
    }
    let b0 = min_beta(model, eps)?;
    let mut span = 0.5 * b0.max(1.0);
    for _ in 0..40 {
        let mut c = candidates(model, eps, b0 + span)?;
        if c.len() >= depth {
            rank_candidates(model, eps, &mut c, bits)?;
            c.truncate(depth);
            return Ok(c);
        }
        span *= 2.0;
    }
    Err(Error::RadiusInsufficient(format!("fewer than {depth} harmonics found at eps = {eps}")))
}

impl Dominance {
    pub fn new(model: &FrequencyModel) -> Result<Self> {
        Ok(Self {
            model: model.clone(),
            stars: StarTable::new(model, 50)?,
            precision_bits: precision_bits_from_env(),
        })
    }

    pub fn profile(&self, eps: f64, mu: f64, depth: usize) -> Result<DominanceProfile> {
        if !(eps > 0.0 && mu > 0.0) {
            return Err(domain(format!("eps = {eps}, mu = {mu} must be positive")));
        }
        let m = &self.model;
        let ranked = smallest_harmonics(m, eps, depth, self.precision_bits)?
            .into_iter()
            .map(|c| {
                Ok(RankedHarmonic {
                    k: c.k,
                    h: g_from_beta(m, eps, c.beta),
                    beta: c.beta,
                    ln_l: mu.ln() + ln_l_exact(m, eps, c.k)?,
                    sequence: classify(m, c.k)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DominanceProfile {
            eps,
            mu,
            ranked,
            asymptotic: self.stars.h_star(m, eps, depth)?,
            n_interval: interval_index(m, eps),
        })
    }

    /// Profiles at every `eps` with `mu = eps^p`, computed in parallel.
    pub fn profiles(&self, eps: &[f64], p: f64, depth: usize) -> Result<Vec<DominanceProfile>> {
        eps.par_iter().map(|&e| self.profile(e, e.powf(p), depth)).collect()
    }

    /// `h_1 .. h_depth` from the limit functions `g*` only.
    pub fn h_star_values(&self, eps: f64, depth: usize) -> Result<Vec<f64>> {
        Ok(self.stars.h_star(&self.model, eps, depth)?.iter().map(|s| s.g_star).collect())
    }

    /// `h_1 .. h_depth` from the exact `g_k`.
    pub fn h_values(&self, eps: f64, depth: usize) -> Result<Vec<f64>> {
        Ok(smallest_harmonics(&self.model, eps, depth, self.precision_bits)?
            .iter()
            .map(|c| g_from_beta(&self.model, eps, c.beta))
            .collect())
    }
}

pub fn dominance_profile(model: &FrequencyModel, eps: f64, mu: f64, depth: usize) -> Result<DominanceProfile> {
    Dominance::new(model)?.profile(eps, mu, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::{eps_hat, g_k};
    use crate::resonances::{main_secondary_vector, pell_vector};

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn primary_pattern_around_transitions() {
        let m = silver();
        let d = Dominance::new(&m).unwrap();
        for n in 4..=9i64 {
            let e = eps_hat(&m, n);
            let s0 = |i: i64| pell_vector(&m, i as u32).unwrap();
            let below = d.profile(e * 0.99, 1.0, 5).unwrap();
            assert_eq!(below.n_interval, n);
            assert_eq!(below.s(0), s0(n));
            assert_eq!(below.s(1), s0(n + 1));
            assert_eq!(below.s(3), s0(n - 1));
            let above = d.profile(e * 1.01, 1.0, 5).unwrap();
            assert_eq!(above.s(0), s0(n));
            assert_eq!(above.s(1), s0(n - 1));
            assert_eq!(above.s(3), s0(n + 1));
            for p in [&below, &above] {
                assert_eq!(p.s(2), main_secondary_vector(&m, n as u32 - 1).unwrap());
                for w in p.ranked.windows(2) {
                    assert!(w[0].h <= w[1].h);
                }
            }
        }
    }

    #[test]
    fn ranking_agrees_with_brute_force() {
        let m = silver();
        let eps = 3e-5;
        let got = smallest_harmonics(&m, eps, 5, 256).unwrap();
        let mut all = Vec::new();
        for k2 in 0..=60i64 {
            for k1 in -60..=60i64 {
                let k = IntVec2::new(k1, k2);
                if (k2 == 0 && k1 <= 0) || k.norm1() > 60 {
                    continue;
                }
                all.push((g_k(&m, eps, k).unwrap(), k));
            }
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 0..5 {
            assert_eq!(got[i].k, all[i].1);
        }
    }

    #[test]
    fn exact_ties_break_by_norm() {
        let m = silver();
        let mut c = vec![
            Candidate { k: IntVec2::new(-2, 5), beta: 1.0 },
            Candidate { k: IntVec2::new(-2, 5), beta: 1.0 },
            Candidate { k: IntVec2::new(0, 1), beta: 1.0 + 1e-3 },
        ];
        rank_candidates(&m, 0.01, &mut c, 128).unwrap();
        assert_eq!(c[2].k, IntVec2::new(0, 1));
    }

    #[test]
    fn env_precision_defaults() {
        assert!(precision_bits_from_env() >= 53);
    }
}
