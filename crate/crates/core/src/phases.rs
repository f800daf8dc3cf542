//! Phases `sigma_k` of the perturbation.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic_field::{FrequencyModel, IntVec2};
use crate::real::Real;
use crate::resonances::pell_vector;

/// Bound on `|sigma_{s0(n+1)} - 2 sigma_{s0(n)} - sigma_{s0(n-1)}|` that keeps
/// the four critical points apart.
pub const PHASE_BOUND: f64 = 2.0 * PI / 3.0;

/// Deepest primary index for which generated phases are kept consistent.
const PRIMARY_DEPTH: u32 = 60;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PhaseSource {
    /// The reversible case `sigma = 0`.
    Zero,
    /// Listed harmonics; everything else is zero.
    Explicit { entries: Vec<PhaseEntry> },
    /// Pseudo-random phases from a seed. With `check46` the primary phases
    /// are drawn so that every second difference stays below `2 pi / 3`.
    Random {
        seed: u64,
        #[serde(default)]
        check46: bool,
    },
    /// Primary phases with a constant second difference `delta`, all other
    /// phases zero.
    PrimaryDelta { delta: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PhaseEntry {
    pub k: IntVec2,
    pub sigma: f64,
}

/// Resolved phase assignment.
#[derive(Clone, Debug)]
pub struct Phases {
    pub source: PhaseSource,
    table: HashMap<IntVec2, f64>,
    seed: Option<u64>,
}

impl Phases {
    pub fn zero() -> Self {
        Self {
            source: PhaseSource::Zero,
            table: HashMap::new(),
            seed: None,
        }
    }

    pub fn new(model: &FrequencyModel, source: PhaseSource) -> Result<Self> {
        let mut table = HashMap::new();
        let mut seed = None;
        match &source {
            PhaseSource::Zero => {}
            PhaseSource::Explicit { entries } => {
                for e in entries {
                    if e.k.is_zero() {
                        return Err(Error::Config("phase given for the zero vector".into()));
                    }
                    if !e.sigma.is_finite() {
                        return Err(Error::Config(format!("phase for {} is not finite", e.k)));
                    }
                    table.insert(e.k.half_lattice(), e.sigma.wrap_two_pi());
                }
            }
            PhaseSource::Random { seed: s, check46 } => {
                seed = Some(*s);
                if *check46 {
                    let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5eed_0046);
                    let mut prev: f64 = rng.gen_range(0.0..2.0 * PI);
                    let mut cur: f64 = rng.gen_range(0.0..2.0 * PI);
                    table.insert(pell_vector(model, 0)?, prev);
                    table.insert(pell_vector(model, 1)?, cur);
                    for n in 1..PRIMARY_DEPTH {
                        let delta = rng.gen_range(-0.95 * PHASE_BOUND..0.95 * PHASE_BOUND);
                        let next = (2.0 * cur + prev + delta).wrap_two_pi();
                        match pell_vector(model, n + 1) {
                            Ok(k) => table.insert(k, next),
                            Err(_) => break,
                        };
                        prev = cur;
                        cur = next;
                    }
                }
            }
            PhaseSource::PrimaryDelta { delta } => {
                let (mut prev, mut cur) = (0.0f64, 0.0f64);
                table.insert(pell_vector(model, 0)?, 0.0);
                table.insert(pell_vector(model, 1)?, 0.0);
                for n in 1..PRIMARY_DEPTH {
                    let next = (2.0 * cur + prev + delta).wrap_two_pi();
                    match pell_vector(model, n + 1) {
                        Ok(k) => table.insert(k, next),
                        Err(_) => break,
                    };
                    prev = cur;
                    cur = next;
                }
            }
        }
        Ok(Self { source, table, seed })
    }

    /// `sigma_k` for `k` in the half lattice (other signs are folded).
    pub fn sigma(&self, k: IntVec2) -> f64 {
        let k = k.half_lattice();
        if let Some(&s) = self.table.get(&k) {
            return s;
        }
        match self.seed {
            Some(seed) => hashed_phase(seed, k),
            None => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.source, PhaseSource::Zero)
            || (self.seed.is_none() && self.table.values().all(|&s| s == 0.0))
    }

    /// `sigma_{s0(n+1)} - 2 sigma_{s0(n)} - sigma_{s0(n-1)}` reduced to `(-pi, pi]`.
    pub fn primary_second_difference(&self, model: &FrequencyModel, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("second difference needs n >= 1".into()));
        }
        let s = |m: u32| -> Result<f64> { Ok(self.sigma(pell_vector(model, m)?)) };
        Ok((s(n + 1)? - 2.0 * s(n)? - s(n - 1)?).wrap_pi())
    }

    /// Largest `|second difference|` for `1 <= n <= n_max`, and whether it
    /// stays below `2 pi / 3`.
    pub fn check_phase_condition(&self, model: &FrequencyModel, n_max: u32) -> Result<(f64, bool)> {
        let mut worst = 0.0f64;
        for n in 1..=n_max {
            worst = worst.max(self.primary_second_difference(model, n)?.abs());
        }
        Ok((worst, worst < PHASE_BOUND))
    }

    /// Parses the phase file format: an array of `{"k": [k1,k2], "sigma": s}`
    /// records or a `{"mode": ...}` object.
    pub fn from_json(model: &FrequencyModel, text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("phase file: {e}")))?;
        let source = if value.is_array() {
            let entries: Vec<PhaseEntry> =
                serde_json::from_value(value).map_err(|e| Error::Config(format!("phase file: {e}")))?;
            PhaseSource::Explicit { entries }
        } else {
            serde_json::from_value(value).map_err(|e| Error::Config(format!("phase file: {e}")))?
        };
        Self::new(model, source)
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn hashed_phase(seed: u64, k: IntVec2) -> f64 {
    let h = splitmix(splitmix(splitmix(seed) ^ k.k1 as u64) ^ k.k2 as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(h);
    rng.gen_range(0.0..2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn random_phases_respect_the_bound() {
        let m = silver();
        for seed in 0..20 {
            let p = Phases::new(&m, PhaseSource::Random { seed, check46: true }).unwrap();
            let (worst, ok) = p.check_phase_condition(&m, 25).unwrap();
            assert!(ok, "seed {seed}: {worst}");
            // deterministic
            let q = Phases::new(&m, PhaseSource::Random { seed, check46: true }).unwrap();
            assert_eq!(p.sigma(IntVec2::new(3, 4)), q.sigma(IntVec2::new(3, 4)));
            assert_eq!(p.sigma(IntVec2::new(-3, -4)), p.sigma(IntVec2::new(3, 4)));
        }
    }

    #[test]
    fn primary_delta_is_constant() {
        let m = silver();
        let d = PHASE_BOUND - 1e-6;
        let p = Phases::new(&m, PhaseSource::PrimaryDelta { delta: d }).unwrap();
        for n in 1..25 {
            assert!((p.primary_second_difference(&m, n).unwrap() - d).abs() < 1e-9);
        }
        assert_eq!(p.sigma(IntVec2::new(-1, 3)), 0.0);
    }

    #[test]
    fn json_formats() {
        let m = silver();
        let p = Phases::from_json(&m, r#"[{"k": [-2, 5], "sigma": 1.5}]"#).unwrap();
        assert_eq!(p.sigma(IntVec2::new(-2, 5)), 1.5);
        assert_eq!(p.sigma(IntVec2::new(1, 1)), 0.0);
        let r = Phases::from_json(&m, r#"{"mode": "random", "seed": 3, "check46": true}"#).unwrap();
        assert!(r.check_phase_condition(&m, 20).unwrap().1);
        assert!(Phases::from_json(&m, r#"{"mode": "bogus"}"#).is_err());
        assert!(Phases::zero().is_zero());
    }
}
