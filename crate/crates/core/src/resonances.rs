//! Resonant sequences `s(j, n) = U^n k0(j)`, their numerators and limits.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadratic_field::{FrequencyModel, IntVec2, RingElement};
use crate::real::{MpFloat, Real};

const WORK_BITS: usize = 256;

/// `rint(j Omega)`, decided in the ring.
pub fn rint_j_omega(model: &FrequencyModel, j: i64) -> i64 {
    model
        .omega
        .scale(j)
        .round_to_integer()
        .to_i64()
        .expect("rint(j Omega) fits in i64 whenever j does")
}

/// `k0(j) = (-rint(j Omega), j)`.
pub fn generator(model: &FrequencyModel, j: i64) -> Result<IntVec2> {
    if j < 1 {
        return Err(domain(format!("generator index j = {j} must be positive")));
    }
    Ok(IntVec2::new(-rint_j_omega(model, j), j))
}

/// Exact test of `1/(2 lambda) < |<k0(j), omega>| < 1/2`.
pub fn is_primitive(model: &FrequencyModel, j: i64) -> Result<bool> {
    let k0 = generator(model, j)?;
    let x = model.bracket(k0)?.abs();
    Ok(in_primitive_window(model, &x))
}

fn in_primitive_window(model: &FrequencyModel, x_abs: &RingElement) -> bool {
    let d = model.radicand();
    let one = RingElement::integer(1, d);
    let upper = x_abs.scale(2).cmp_exact(&one) == Ordering::Less;
    let lower = (x_abs.scale(2) * model.lambda.clone()).cmp_exact(&one) == Ordering::Greater;
    upper && lower
}

/// Primary vector `s0(n) = U^n (0, 1)`.
///
/// With Pell numbers `P0 = 0, P1 = 1` this is `(-P_n, P_{n+1})`.
pub fn pell_vector(model: &FrequencyModel, n: u32) -> Result<IntVec2> {
    model.apply_u_pow(IntVec2::new(0, 1), n)
}

/// Pell numbers `P_0 .. P_{count-1}` for the metallic recurrence.
pub fn pell_numbers(model: &FrequencyModel, count: usize) -> Result<Vec<i64>> {
    let mut p = vec![0i64, 1];
    while p.len() < count {
        let l = p.len();
        let next = (model.a as i64)
            .checked_mul(p[l - 1])
            .and_then(|x| x.checked_add(p[l - 2]))
            .ok_or_else(|| Error::Overflow(format!("Pell number {l}")))?;
        p.push(next);
    }
    p.truncate(count);
    Ok(p)
}

/// Main secondary vector `s1(n) = s(3, n)`; equals `s0(n) + s0(n+1)`.
pub fn main_secondary_vector(model: &FrequencyModel, n: u32) -> Result<IntVec2> {
    let s = model.apply_u_pow(generator(model, 3)?, n)?;
    let sum = pell_vector(model, n)?.checked_add(pell_vector(model, n + 1)?)?;
    assert_eq!(s, sum, "s1({n}) differs from s0({n}) + s0({})", n + 1);
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct NumeratorData {
    pub k: IntVec2,
    /// `|<k, omega>| |k|_1`.
    pub gamma: f64,
    /// `gamma / gamma*`.
    pub gamma_tilde: f64,
}

/// Numerator of `k` with the normalization `gamma* = 1/2` of the silver case.
pub fn numerator(model: &FrequencyModel, k: IntVec2) -> Result<NumeratorData> {
    let gamma = gamma_mp(model, k)?.to_f64();
    Ok(NumeratorData {
        k,
        gamma,
        gamma_tilde: gamma / primary_gamma_star(model),
    })
}

fn gamma_mp(model: &FrequencyModel, k: IntVec2) -> Result<MpFloat> {
    let b: MpFloat = model.bracket(k)?.abs().to_real(WORK_BITS);
    Ok(b * MpFloat::from_i128(k.norm1() as i128, WORK_BITS))
}

/// `gamma* = lim gamma_{s0(n)}`, obtained as a numerical limit.
pub fn primary_gamma_star(model: &FrequencyModel) -> f64 {
    model.gamma_star
}

/// The smallest sequence index `n` with `s(j, n)` of the given vector, or
/// `None` when `|<k, omega>| >= 1/2`.
pub fn classify(model: &FrequencyModel, k: IntVec2) -> Result<Option<(i64, u32)>> {
    let d = model.radicand();
    let half = RingElement::integer(1, d);
    let u_inv = model.u.inverse_unimodular()?;
    let mut v = k;
    let mut n = 0u32;
    loop {
        let x = model.bracket(v)?.abs();
        if x.scale(2).cmp_exact(&half) != Ordering::Less {
            return Ok(None);
        }
        if in_primitive_window(model, &x) {
            let g = v.half_lattice();
            debug_assert_eq!(Some(g), generator(model, g.k2).ok());
            return Ok(Some((g.k2, n)));
        }
        v = u_inv.apply(v)?;
        n += 1;
    }
}

/// Resonant sequence `s(j, n) = U^n k0(j)` with a lazily extended cache.
#[derive(Clone, Debug, Serialize)]
pub struct ResonantSequence {
    pub j: i64,
    pub generator: IntVec2,
    pub vectors: Vec<IntVec2>,
    pub gamma_star_estimate: f64,
    pub k_estimate: f64,
}

impl ResonantSequence {
    pub fn new(model: &FrequencyModel, j: i64) -> Result<Self> {
        if !is_primitive(model, j)? {
            return Err(domain(format!("j = {j} is not primitive")));
        }
        let g = generator(model, j)?;
        let mut seq = Self {
            j,
            generator: g,
            vectors: vec![g],
            gamma_star_estimate: f64::NAN,
            k_estimate: f64::NAN,
        };
        let a = sequence_asymptotics(model, j, 15)?;
        seq.gamma_star_estimate = a.gamma_star;
        seq.k_estimate = a.k_limit;
        Ok(seq)
    }

    /// `s(j, n)`, extending the cache when needed.
    pub fn vector(&mut self, model: &FrequencyModel, n: usize) -> Result<IntVec2> {
        while self.vectors.len() <= n {
            let last = *self.vectors.last().expect("cache holds the generator");
            self.vectors.push(model.apply_u(last)?);
        }
        Ok(self.vectors[n])
    }

    /// Generalized Pell numbers `p(j, m)` with `s(j, n) = (-p(j, n), p(j, n+1))`.
    pub fn generalized_pell(model: &FrequencyModel, j: i64, count: usize) -> Result<Vec<i64>> {
        let mut p = vec![rint_j_omega(model, j), j];
        while p.len() < count {
            let l = p.len();
            let next = (model.a as i64)
                .checked_mul(p[l - 1])
                .and_then(|x| x.checked_add(p[l - 2]))
                .ok_or_else(|| Error::Overflow(format!("p({j}, {l})")))?;
            p.push(next);
        }
        p.truncate(count);
        Ok(p)
    }
}

/// Limits of a resonant sequence with convergence diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceAsymptotics {
    pub j: i64,
    pub n_max: u32,
    /// `lim |s(j,n)| / lambda^n`.
    pub k_limit: f64,
    /// `lim gamma_{s(j,n)}`.
    pub gamma_star: f64,
    pub gamma_tilde_star: f64,
    /// `|K_n - K_{n-1}| lambda^{2n}` over `n >= 5`; bounded when the error is `O(lambda^-2n)`.
    pub k_rate_constant: f64,
    /// `|gamma_n - gamma*| lambda^{2n}` over `n >= 5`.
    pub gamma_rate_constant: f64,
    /// Ratios `|d_{n+1} / d_n|` of successive `gamma` differences, `n >= 5`.
    pub gamma_difference_ratios: Vec<f64>,
}

impl SequenceAsymptotics {
    /// Every ratio lies in `[lambda^-2 / 2, 2 lambda^-2]`.
    pub fn ratio_test_passes(&self, lambda: f64) -> bool {
        let r = lambda.powi(-2);
        !self.gamma_difference_ratios.is_empty()
            && self
                .gamma_difference_ratios
                .iter()
                .all(|&q| q >= r / 2.0 && q <= 2.0 * r)
    }
}

pub fn sequence_asymptotics(model: &FrequencyModel, j: i64, n_max: u32) -> Result<SequenceAsymptotics> {
    if n_max < 8 {
        return Err(domain(format!("n_max = {n_max} < 8")));
    }
    if !is_primitive(model, j)? {
        return Err(domain(format!("j = {j} is not primitive")));
    }
    let lambda: MpFloat = model.lambda.to_real(WORK_BITS);
    let mut k = generator(model, j)?;
    let mut ks = Vec::new();
    let mut gammas = Vec::new();
    let mut lam_pow = MpFloat::from_f64(1.0, WORK_BITS);
    for n in 0..=n_max {
        if n > 0 {
            k = model.apply_u(k)?;
            lam_pow = lam_pow * lambda.clone();
        }
        let norm = MpFloat::from_i128(k.norm1() as i128, WORK_BITS);
        ks.push(norm / lam_pow.clone());
        gammas.push(gamma_mp(model, k)?);
    }
    let last = n_max as usize;
    // both errors are O(lambda^-2n): one Richardson step removes the leading term
    let l2 = lambda.clone() * lambda.clone();
    let one = MpFloat::from_f64(1.0, WORK_BITS);
    let rich = |x: &[MpFloat]| -> MpFloat {
        // alternating sign: x_n = x* + c (-lambda^-2)^n
        (x[last].clone() * l2.clone() + x[last - 1].clone()) / (l2.clone() + one.clone())
    };
    let k_limit = rich(&ks);
    let gamma_star = rich(&gammas);
    let gamma_star_primary = primary_gamma_star(model);
    let lam = lambda.to_f64();
    let mut k_rate: f64 = 0.0;
    let mut g_rate: f64 = 0.0;
    let mut ratios = Vec::new();
    for n in 5..=last {
        let w = lam.powi(2 * n as i32);
        k_rate = k_rate.max((ks[n].clone() - ks[n - 1].clone()).abs().to_f64() * w);
        g_rate = g_rate.max((gammas[n].clone() - gamma_star.clone()).abs().to_f64() * w);
        if n < last {
            let d0 = gammas[n].clone() - gammas[n - 1].clone();
            let d1 = gammas[n + 1].clone() - gammas[n].clone();
            ratios.push((d1 / d0).abs().to_f64());
        }
    }
    let gamma_star = gamma_star.to_f64();
    Ok(SequenceAsymptotics {
        j,
        n_max,
        k_limit: k_limit.to_f64(),
        gamma_star,
        gamma_tilde_star: gamma_star / gamma_star_primary,
        k_rate_constant: k_rate,
        gamma_rate_constant: g_rate,
        gamma_difference_ratios: ratios,
    })
}

/// Rows of the `resonances` table.
#[derive(Clone, Debug, Serialize)]
pub struct ResonanceRow {
    pub j: i64,
    pub n: u32,
    pub k1: i64,
    pub k2: i64,
    pub norm: i64,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub primitive: bool,
}

/// `s(j, n)` for `1 <= j <= j_max`, `0 <= n <= n_max`; non-primitive `j`
/// are listed with their own `U^n k0(j)` and flagged.
pub fn resonance_table(model: &FrequencyModel, j_max: i64, n_max: u32) -> Result<Vec<ResonanceRow>> {
    let mut rows = Vec::new();
    for j in 1..=j_max {
        let primitive = is_primitive(model, j)?;
        let mut k = generator(model, j)?;
        for n in 0..=n_max {
            if n > 0 {
                k = model.apply_u(k)?;
            }
            let num = numerator(model, k)?;
            rows.push(ResonanceRow {
                j,
                n,
                k1: k.k1,
                k2: k.k2,
                norm: k.norm1(),
                gamma: num.gamma,
                gamma_tilde: num.gamma_tilde,
                primitive,
            });
        }
    }
    Ok(rows)
}

/// Exact `gamma_k` as `|<k,omega>| |k|_1` in the ring.
pub fn gamma_exact(model: &FrequencyModel, k: IntVec2) -> Result<RingElement> {
    let b = model.bracket(k)?.abs();
    Ok(b * RingElement::integer(BigInt::from(k.norm1()), model.radicand()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn primitivity_of_small_indices() {
        let m = silver();
        let expect = [(1, true), (2, false), (3, true), (4, true), (5, false)];
        for (j, p) in expect {
            assert_eq!(is_primitive(&m, j).unwrap(), p, "j = {j}");
        }
        assert_eq!(generator(&m, 3).unwrap(), IntVec2::new(-1, 3));
        assert_eq!(generator(&m, 4).unwrap(), IntVec2::new(-2, 4));
        assert!(generator(&m, 0).is_err());
    }

    #[test]
    fn pell_vectors() {
        let m = silver();
        let want = [(0, 1), (-1, 2), (-2, 5), (-5, 12), (-12, 29)];
        for (n, &(a, b)) in want.iter().enumerate() {
            assert_eq!(pell_vector(&m, n as u32).unwrap(), IntVec2::new(a, b));
        }
        let p = pell_numbers(&m, 25).unwrap();
        for n in 0..=20u32 {
            let s = pell_vector(&m, n).unwrap();
            assert_eq!(s, IntVec2::new(-p[n as usize], p[n as usize + 1]));
        }
    }

    #[test]
    fn main_secondary_vectors() {
        let m = silver();
        assert_eq!(main_secondary_vector(&m, 0).unwrap(), IntVec2::new(-1, 3));
        assert_eq!(main_secondary_vector(&m, 1).unwrap(), IntVec2::new(-3, 7));
        assert_eq!(main_secondary_vector(&m, 2).unwrap(), IntVec2::new(-7, 17));
    }

    #[test]
    fn generalized_pell_recurrence() {
        let m = silver();
        for j in [1, 3, 4] {
            let p = ResonantSequence::generalized_pell(&m, j, 23).unwrap();
            let mut seq = ResonantSequence::new(&m, j).unwrap();
            for n in 0..=20 {
                assert_eq!(seq.vector(&m, n).unwrap(), IntVec2::new(-p[n], p[n + 1]));
            }
        }
    }

    #[test]
    fn numerators() {
        let m = silver();
        let a = numerator(&m, IntVec2::new(0, 1)).unwrap();
        assert!((a.gamma - 0.414_213_562_373_095).abs() < 1e-14);
        assert!((a.gamma_tilde - 0.828_427_124_746_190).abs() < 1e-12);
        let b = numerator(&m, IntVec2::new(-1, 2)).unwrap();
        assert!((b.gamma - 0.514_718_625_761_429_7).abs() < 1e-14);
        assert!(numerator(&m, IntVec2::new(0, 0)).is_err());
        assert!((primary_gamma_star(&m) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn table_limits() {
        let m = silver();
        let lam = m.lambda_f64();
        for (j, k, g) in [(1, 1.2071, 1.0), (3, 4.1213, 2.0), (4, 5.8284, 4.0)] {
            let a = sequence_asymptotics(&m, j, 15).unwrap();
            assert!((a.k_limit - k).abs() < 5e-4, "K_{j} = {}", a.k_limit);
            assert!((a.gamma_tilde_star - g).abs() < 1e-6);
            assert!(a.ratio_test_passes(lam), "{:?}", a.gamma_difference_ratios);
        }
        let k1 = sequence_asymptotics(&m, 1, 15).unwrap().k_limit;
        let k3 = sequence_asymptotics(&m, 3, 15).unwrap().k_limit;
        assert!((k3 / k1 - 2f64.sqrt() * lam).abs() < 1e-10 * k3 / k1);
        assert!(sequence_asymptotics(&m, 2, 15).is_err());
        assert!(sequence_asymptotics(&m, 1, 7).is_err());
    }

    #[test]
    fn primary_minimality_over_small_indices() {
        let m = silver();
        for j in 2..=50 {
            if !is_primitive(&m, j).unwrap() {
                continue;
            }
            let g = sequence_asymptotics(&m, j, 15).unwrap().gamma_tilde_star;
            assert!(g > 1.0, "j = {j}");
            if j >= 6 {
                assert!(g > 6.5723, "j = {j}: {g}");
            }
        }
    }

    #[test]
    fn classification_inverts_the_sequences() {
        let m = silver();
        for j in [1, 3, 4, 6, 7, 9] {
            if !is_primitive(&m, j).unwrap() {
                continue;
            }
            for n in 0..12 {
                let k = m.apply_u_pow(generator(&m, j).unwrap(), n).unwrap();
                assert_eq!(classify(&m, k).unwrap(), Some((j, n)));
                assert_eq!(classify(&m, k.neg()).unwrap(), Some((j, n)));
            }
        }
        assert_eq!(classify(&m, IntVec2::new(1, 0)).unwrap(), None);
        // k0(2) is U k0(j) for a primitive j
        let (j, n) = classify(&m, generator(&m, 2).unwrap()).unwrap().unwrap();
        assert!(n >= 1 && is_primitive(&m, j).unwrap());
    }

    proptest! {
        #[test]
        fn sequence_numerators_scale_with_lambda(j in 1i64..200, n in 0u32..10) {
            let m = silver();
            prop_assume!(is_primitive(&m, j).unwrap());
            let k = m.apply_u_pow(generator(&m, j).unwrap(), n).unwrap();
            // |<s(j,n), omega>| lambda^n = |<k0(j), omega>| exactly
            let mut lhs = m.bracket(k).unwrap().abs();
            for _ in 0..n {
                lhs = lhs * m.lambda.clone();
            }
            prop_assert_eq!(lhs, m.bracket(generator(&m, j).unwrap()).unwrap().abs());
        }
    }
}
