//! Exact arithmetic in `Z[sqrt(d)]` for the frequency vector `(1, Omega)` of
//! an even metallic mean, together with the lattice maps `T` and `U`.
//!
//! Small divisors `<k, omega>` shrink like `lambda^-n` while `|k|` grows like
//! `lambda^n`, so a binary64 dot product loses every digit after a couple of
//! dozen iterations of `U`. Everything here stays exact until a value is
//! explicitly converted, and conversions go through the conjugate so that
//! no cancellation happens in floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use astro_float::RoundingMode;
use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::real::{MpFloat, Real, F64_BITS};

/// Integer lattice vector `(k1, k2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct IntVec2 {
    pub k1: i64,
    pub k2: i64,
}

impl From<[i64; 2]> for IntVec2 {
    fn from(v: [i64; 2]) -> Self {
        IntVec2::new(v[0], v[1])
    }
}

impl From<IntVec2> for [i64; 2] {
    fn from(v: IntVec2) -> Self {
        [v.k1, v.k2]
    }
}

impl IntVec2 {
    pub const fn new(k1: i64, k2: i64) -> Self {
        Self { k1, k2 }
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    /// l1 norm, the norm used for all integer vectors.
    pub fn norm1(&self) -> i64 {
        self.k1.abs() + self.k2.abs()
    }

    pub fn checked_add(self, o: Self) -> Result<Self> {
        match (self.k1.checked_add(o.k1), self.k2.checked_add(o.k2)) {
            (Some(k1), Some(k2)) => Ok(Self { k1, k2 }),
            _ => Err(Error::Overflow(format!("{self} + {o}"))),
        }
    }

    pub fn checked_scale(self, c: i64) -> Result<Self> {
        match (self.k1.checked_mul(c), self.k2.checked_mul(c)) {
            (Some(k1), Some(k2)) => Ok(Self { k1, k2 }),
            _ => Err(Error::Overflow(format!("{c} * {self}"))),
        }
    }

    pub fn neg(self) -> Self {
        Self::new(-self.k1, -self.k2)
    }

    /// Representative in the half lattice `k2 > 0` or `k2 == 0, k1 > 0`.
    pub fn half_lattice(self) -> Self {
        if self.k2 < 0 || (self.k2 == 0 && self.k1 < 0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn dot_f64(&self, x: [f64; 2]) -> f64 {
        self.k1 as f64 * x[0] + self.k2 as f64 * x[1]
    }
}

impl fmt::Display for IntVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.k1, self.k2)
    }
}

/// 2x2 integer matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IntMat2 {
    pub rows: [[i64; 2]; 2],
}

impl IntMat2 {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self {
            rows: [[a, b], [c, d]],
        }
    }

    pub const fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    pub fn from_rows(r1: IntVec2, r2: IntVec2) -> Self {
        Self::new(r1.k1, r1.k2, r2.k1, r2.k2)
    }

    pub fn det(&self) -> i128 {
        let [[a, b], [c, d]] = self.rows;
        a as i128 * d as i128 - b as i128 * c as i128
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [c, d]] = self.rows;
        Self::new(a, c, b, d)
    }

    pub fn neg(&self) -> Self {
        let [[a, b], [c, d]] = self.rows;
        Self::new(-a, -b, -c, -d)
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let det = self.det();
        if det.abs() != 1 {
            return Err(domain(format!("matrix {:?} is not unimodular (det {det})", self.rows)));
        }
        let s = det as i64;
        let [[a, b], [c, d]] = self.rows;
        Ok(Self::new(s * d, -s * b, -s * c, s * a))
    }

    pub fn apply(&self, v: IntVec2) -> Result<IntVec2> {
        let [[a, b], [c, d]] = self.rows;
        let row = |x: i64, y: i64| -> Option<i64> {
            x.checked_mul(v.k1)?.checked_add(y.checked_mul(v.k2)?)
        };
        match (row(a, b), row(c, d)) {
            (Some(k1), Some(k2)) => Ok(IntVec2::new(k1, k2)),
            _ => Err(Error::Overflow(format!("{:?} * {v}", self.rows))),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let c1 = self.apply(IntVec2::new(o.rows[0][0], o.rows[1][0]))?;
        let c2 = self.apply(IntVec2::new(o.rows[0][1], o.rows[1][1]))?;
        Ok(Self::new(c1.k1, c2.k1, c1.k2, c2.k2))
    }

    pub fn apply_f64(&self, x: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.rows;
        [
            a as f64 * x[0] + b as f64 * x[1],
            c as f64 * x[0] + d as f64 * x[1],
        ]
    }
}

/// Exact element `p + q sqrt(d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    pub p: BigInt,
    pub q: BigInt,
    radicand: u32,
}

pub const SILVER_RADICAND: u32 = 2;

impl RingElement {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>, radicand: u32) -> Self {
        Self {
            p: p.into(),
            q: q.into(),
            radicand,
        }
    }

    /// `p + q sqrt(2)`.
    pub fn silver(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        Self::new(p, q, SILVER_RADICAND)
    }

    pub fn radicand(&self) -> u32 {
        self.radicand
    }

    pub fn integer(p: impl Into<BigInt>, radicand: u32) -> Self {
        Self::new(p, 0, radicand)
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.p.clone(), -self.q.clone(), self.radicand)
    }

    /// Field norm `p^2 - d q^2`.
    pub fn norm(&self) -> BigInt {
        &self.p * &self.p - BigInt::from(self.radicand) * &self.q * &self.q
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sp = self.p.sign();
        let sq = self.q.sign();
        let pos = |s: Sign| s == Sign::Plus;
        let neg = |s: Sign| s == Sign::Minus;
        if self.is_zero() {
            return Ordering::Equal;
        }
        if !neg(sp) && !neg(sq) {
            return Ordering::Greater;
        }
        if !pos(sp) && !pos(sq) {
            return Ordering::Less;
        }
        // mixed signs: the larger of |p| and |q| sqrt(d) decides
        let n = self.norm();
        let p_dominates = n.sign() == Sign::Plus;
        match (p_dominates, pos(sp)) {
            (true, true) | (false, false) => Ordering::Greater,
            _ => Ordering::Less,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Exact comparison `self` vs `other`.
    pub fn cmp_exact(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).signum()
    }

    /// Nearest integer, decided exactly. Ties cannot occur for `q != 0`.
    pub fn round_to_integer(&self) -> BigInt {
        let guess = self.to_f64().round();
        let mut c = BigInt::from(guess as i128);
        let two = self.scale(2);
        // 2x - 2c in (-1, 1]
        loop {
            let diff = two.clone() - Self::integer(BigInt::from(2) * &c, self.radicand);
            if diff.cmp_exact(&Self::integer(1, self.radicand)) == Ordering::Greater {
                c += 1;
            } else if diff.cmp_exact(&Self::integer(-1, self.radicand)) != Ordering::Greater {
                c -= 1;
            } else {
                return c;
            }
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self::new(&self.p * c, &self.q * c, self.radicand)
    }

    /// Nearest binary64, computed without cancellation.
    pub fn to_f64(&self) -> f64 {
        let sqrt_d = (self.radicand as f64).sqrt();
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        if self.q.is_zero() {
            return p;
        }
        if self.p.is_zero() || self.p.sign() == self.q.sign() {
            return p + q * sqrt_d;
        }
        // opposite signs: x = N / (p - q sqrt d) and the denominator adds
        let n = self.norm().to_f64().unwrap_or(f64::NAN);
        n / (p - q * sqrt_d)
    }

    /// Conversion at the working precision of `R`, again through the
    /// conjugate when `p` and `q` have opposite signs.
    pub fn to_real<R: Real>(&self, bits: usize) -> R {
        if bits <= F64_BITS {
            return R::from_f64(self.to_f64(), bits);
        }
        let p: R = bigint_to_real(&self.p, bits);
        let q: R = bigint_to_real(&self.q, bits);
        let sqrt_d = R::from_f64(self.radicand as f64, bits).sqrt();
        if self.q.is_zero() {
            return p;
        }
        if self.p.is_zero() || self.p.sign() == self.q.sign() {
            return p + q * sqrt_d;
        }
        let n: R = bigint_to_real(&self.norm(), bits);
        n / (p - q * sqrt_d)
    }

    /// Correctly rounded value at `precision_bits`, by Ziv's strategy:
    /// evaluate with guard bits until both ends of the error interval round
    /// to the same number.
    pub fn to_float(&self, precision_bits: usize) -> Result<MpFloat> {
        if precision_bits < F64_BITS {
            return Err(domain(format!("precision {precision_bits} < 53 bits")));
        }
        if self.is_zero() {
            return Ok(MpFloat::from_f64(0.0, precision_bits));
        }
        let mut guard = 64;
        loop {
            let w = precision_bits + guard;
            let v: MpFloat = self.to_real(w);
            // a handful of roundings at w bits: 16 ulp is a safe envelope
            let delta = v.abs() * MpFloat::from_f64(2f64.powi(-(w as i32 - 4)), w);
            let lo = round_to(&(v.clone() - delta.clone()), precision_bits);
            let hi = round_to(&(v + delta), precision_bits);
            if lo == hi {
                return Ok(lo);
            }
            guard *= 2;
            if guard > 1 << 16 {
                return Err(Error::Solver("to_float: rounding undecided".into()));
            }
        }
    }
}

fn round_to(x: &MpFloat, bits: usize) -> MpFloat {
    let mut v = x.as_big().clone();
    v.set_precision(bits, RoundingMode::ToEven)
        .expect("precision within astro-float limits");
    MpFloat::from_big(v, bits)
}

pub(crate) fn bigint_to_real<R: Real>(x: &BigInt, bits: usize) -> R {
    if let Some(v) = x.to_i128() {
        return R::from_i128(v, bits);
    }
    let (sign, digits) = x.to_u64_digits();
    let base = R::from_f64(2f64.powi(64), bits);
    let mut acc = R::from_f64(0.0, bits);
    for &d in digits.iter().rev() {
        acc = acc * base.clone() + R::from_i128(d as i128, bits);
    }
    if sign == Sign::Minus {
        -acc
    } else {
        acc
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.p, self.q, self.radicand)
    }
}

impl Add for RingElement {
    type Output = RingElement;
    fn add(self, o: RingElement) -> RingElement {
        assert_eq!(self.radicand, o.radicand, "mixed quadratic fields");
        RingElement::new(self.p + o.p, self.q + o.q, self.radicand)
    }
}

impl Sub for RingElement {
    type Output = RingElement;
    fn sub(self, o: RingElement) -> RingElement {
        assert_eq!(self.radicand, o.radicand, "mixed quadratic fields");
        RingElement::new(self.p - o.p, self.q - o.q, self.radicand)
    }
}

impl Mul for RingElement {
    type Output = RingElement;
    fn mul(self, o: RingElement) -> RingElement {
        assert_eq!(self.radicand, o.radicand, "mixed quadratic fields");
        let d = BigInt::from(self.radicand);
        let p = &self.p * &o.p + d * &self.q * &o.q;
        let q = &self.p * &o.q + &self.q * &o.p;
        RingElement::new(p, q, self.radicand)
    }
}

impl Neg for RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement::new(-self.p, -self.q, self.radicand)
    }
}

/// `<k, omega>` in binary64 with full relative accuracy, for the silver
/// vector. Hot-path twin of [`FrequencyModel::bracket`] that stays in `i128`.
pub fn silver_bracket_f64(k: IntVec2) -> f64 {
    let p = k.k1 as i128 - k.k2 as i128;
    let q = k.k2 as i128;
    let s = std::f64::consts::SQRT_2;
    if q == 0 {
        return p as f64;
    }
    if p == 0 || (p > 0) == (q > 0) {
        return p as f64 + q as f64 * s;
    }
    let n = p * p - 2 * q * q;
    n as f64 / (p as f64 - q as f64 * s)
}

/// Frequency vector `omega = (1, Omega)` of the metallic mean with
/// continued fraction `[a, a, a, ...]`, `a` even, plus its lattice maps.
#[derive(Clone, Debug)]
pub struct FrequencyModel {
    /// Metallic parameter (2 for silver).
    pub a: u32,
    pub omega: RingElement,
    /// `1/Omega`, the expanding eigenvalue of `T`.
    pub lambda: RingElement,
    pub t: IntMat2,
    pub u: IntMat2,
    /// Complex width of analyticity of the perturbation.
    pub rho: f64,
    /// `min |<k,omega>| |k|_1` over a finite box; attained at `k = (0, 1)`.
    pub diophantine_gamma: f64,
    /// `lim gamma_{U^n (0,1)}`, the normalizing numerator.
    pub gamma_star: f64,
}

impl FrequencyModel {
    pub fn silver(rho: f64) -> Result<Self> {
        Self::metallic(2, rho)
    }

    /// Only even `a` keep `<k,omega>` inside `Z[sqrt(d)]` with `d = (a/2)^2 + 1`.
    pub fn metallic(a: u32, rho: f64) -> Result<Self> {
        if a == 0 || a % 2 == 1 {
            return Err(domain(format!("metallic parameter {a} must be even and positive")));
        }
        if !(rho > 0.0) {
            return Err(domain(format!("rho = {rho} must be positive")));
        }
        let m = (a / 2) as i64;
        let d = (m * m + 1) as u32;
        let omega = RingElement::new(-m, 1, d);
        let lambda = RingElement::new(m, 1, d);
        let t = IntMat2::new(a as i64, 1, 1, 0);
        let u = IntMat2::new(0, -1, -1, a as i64);
        let mut model = Self {
            a,
            omega,
            lambda,
            t,
            u,
            rho,
            diophantine_gamma: 0.0,
            gamma_star: 0.0,
        };
        model.diophantine_gamma = model.min_numerator_in_box(200);
        let k = model.apply_u_pow(IntVec2::new(0, 1), 30)?;
        let b: MpFloat = model.bracket(k)?.abs().to_real(256);
        model.gamma_star = (b * MpFloat::from_i128(k.norm1() as i128, 256)).to_f64();
        Ok(model)
    }

    fn half(&self) -> i64 {
        (self.a / 2) as i64
    }

    pub fn radicand(&self) -> u32 {
        self.omega.radicand()
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega.to_f64()
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64()
    }

    /// Exact `<k, omega> = (k1 - m k2) + k2 sqrt(d)`.
    pub fn bracket(&self, k: IntVec2) -> Result<RingElement> {
        if k.is_zero() {
            return Err(domain("bracket of the zero vector"));
        }
        Ok(RingElement::new(
            k.k1 as i128 - self.half() as i128 * k.k2 as i128,
            k.k2,
            self.radicand(),
        ))
    }

    /// `<k, omega>` in binary64 without cancellation.
    pub fn bracket_f64(&self, k: IntVec2) -> f64 {
        if self.a == 2 {
            return silver_bracket_f64(k);
        }
        RingElement::new(
            k.k1 as i128 - self.half() as i128 * k.k2 as i128,
            k.k2,
            self.radicand(),
        )
        .to_f64()
    }

    pub fn apply_t(&self, k: IntVec2) -> Result<IntVec2> {
        self.t.apply(k)
    }

    pub fn apply_u(&self, k: IntVec2) -> Result<IntVec2> {
        self.u.apply(k)
    }

    pub fn apply_u_inverse(&self, k: IntVec2) -> Result<IntVec2> {
        self.u.inverse_unimodular()?.apply(k)
    }

    /// `U^n k`.
    pub fn apply_u_pow(&self, k: IntVec2, n: u32) -> Result<IntVec2> {
        (0..n).try_fold(k, |acc, _| self.apply_u(acc))
    }

    fn min_numerator_in_box(&self, radius: i64) -> f64 {
        let mut best = f64::INFINITY;
        for k2 in 0..=radius {
            for k1 in -radius..=radius {
                let k = IntVec2::new(k1, k2);
                if k.is_zero() || k.norm1() > radius {
                    continue;
                }
                let g = self.bracket_f64(k).abs() * k.norm1() as f64;
                best = best.min(g);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn brackets_of_basic_vectors() {
        let m = silver();
        assert_eq!(m.bracket(IntVec2::new(0, 1)).unwrap(), RingElement::silver(-1, 1));
        assert_eq!(m.bracket(IntVec2::new(1, 0)).unwrap(), RingElement::silver(1, 0));
        let b = m.bracket(IntVec2::new(-1, 2)).unwrap();
        assert_eq!(b, RingElement::silver(-3, 2));
        let hi: MpFloat = b.to_real(300);
        let direct = -1.0 + 2.0 * (2f64.sqrt() - 1.0);
        assert!((hi.to_f64() + 0.171_572_875_253_809_9).abs() < 1e-16);
        assert!((direct - hi.to_f64()).abs() < 1e-15);
        assert!(m.bracket(IntVec2::new(0, 0)).is_err());
    }

    #[test]
    fn lattice_maps_and_determinants() {
        let m = silver();
        assert_eq!(m.apply_u(IntVec2::new(0, 1)).unwrap(), IntVec2::new(-1, 2));
        assert_eq!(m.apply_u(IntVec2::new(-1, 2)).unwrap(), IntVec2::new(-2, 5));
        assert_eq!(m.t.det(), -1);
        assert_eq!(m.u.det(), -1);
        let t_inv_t = m.t.inverse_unimodular().unwrap().transpose();
        assert_eq!(m.u, t_inv_t.neg());
        assert_eq!(m.u.mul(&m.t.transpose()).unwrap(), IntMat2::identity().neg());
    }

    #[test]
    fn t_has_omega_as_eigenvector() {
        // T omega = lambda omega, checked in the ring
        let m = silver();
        let one = RingElement::silver(1, 0);
        let lhs0 = one.scale(2) + m.omega.clone();
        let lhs1 = one.clone();
        assert_eq!(lhs0, m.lambda.clone() * one);
        assert_eq!(lhs1, m.lambda.clone() * m.omega.clone());
        // U has eigenvalue -1/lambda on omega: U omega = (-Omega, -1 + 2 Omega)
        let u0 = -m.omega.clone();
        let inv_lambda = m.omega.clone();
        assert_eq!(u0, -(inv_lambda.clone() * RingElement::silver(1, 0)));
        assert_eq!(m.lambda.clone() * m.omega.clone(), RingElement::silver(1, 0));
    }

    #[test]
    fn to_float_examples() {
        let x = RingElement::silver(-1, 1).to_float(53).unwrap();
        let exact = 0.414_213_562_373_095_048_801_688_724_209_698_f64;
        assert!(((x.to_f64() - exact) / exact).abs() <= 2f64.powi(1 - 53));
        assert_eq!(RingElement::silver(0, 0).to_float(53).unwrap().to_f64(), 0.0);
        let a = RingElement::silver(-3, 2).to_float(53).unwrap().to_f64();
        let b = RingElement::silver(-3, 2).to_float(200).unwrap().to_f64();
        assert!(((a - b) / b).abs() < 1e-15);
        assert!(RingElement::silver(1, 1).to_float(40).is_err());
    }

    #[test]
    fn to_float_is_correctly_rounded_at_53_bits() {
        // reference: the same conversion at 400 bits rounded once
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = RingElement::silver(rng.gen_range(-1_000_000i64..1_000_000), rng.gen_range(-1_000_000i64..1_000_000));
            let fast = x.to_float(53).unwrap();
            let wide: MpFloat = x.to_real(400);
            let reference = round_to(&wide, 53);
            assert_eq!(fast, reference, "{x}");
        }
    }

    #[test]
    fn sign_matches_high_precision_float() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p: i64 = rng.gen_range(-1_000_000_000..=1_000_000_000);
            let q: i64 = rng.gen_range(-1_000_000_000..=1_000_000_000);
            let x = RingElement::silver(p, q);
            let v: MpFloat = x.to_real(256);
            let float_sign = v.to_f64().partial_cmp(&0.0).unwrap();
            assert_eq!(x.signum(), float_sign, "{x}");
        }
    }

    #[test]
    fn nearest_integer_is_exact() {
        let m = silver();
        for j in 1..200i64 {
            let x = m.omega.scale(j);
            let r = x.round_to_integer();
            let f = (j as f64 * m.omega_f64()).round();
            assert_eq!(r, BigInt::from(f as i64));
        }
    }

    #[test]
    fn fast_bracket_agrees_with_ring() {
        let m = silver();
        for k in [IntVec2::new(-29, 70), IntVec2::new(-408, 985), IntVec2::new(3, -7), IntVec2::new(5, 0)] {
            let exact: MpFloat = m.bracket(k).unwrap().to_real(256);
            let fast = m.bracket_f64(k);
            assert!(((fast - exact.to_f64()) / fast).abs() < 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn other_even_metallic_means() {
        let m = FrequencyModel::metallic(4, 1.0).unwrap();
        // Omega = sqrt(5) - 2, lambda = sqrt(5) + 2
        assert!((m.omega_f64() - (5f64.sqrt() - 2.0)).abs() < 1e-15);
        assert_eq!(m.lambda.clone() * m.omega.clone(), RingElement::new(1, 0, 5));
        let k = IntVec2::new(-1, 4);
        let uk = m.apply_u(k).unwrap();
        let lhs = m.bracket(uk).unwrap().abs() * m.lambda.clone();
        assert_eq!(lhs, m.bracket(k).unwrap().abs());
        assert!(FrequencyModel::metallic(3, 1.0).is_err());
    }

    #[test]
    fn diophantine_gamma_is_attained_at_unit_vector() {
        let m = silver();
        assert!((m.diophantine_gamma - m.omega_f64()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn u_contracts_brackets_by_lambda(k1 in -100_000i64..100_000, k2 in -100_000i64..100_000) {
            prop_assume!(k1 != 0 || k2 != 0);
            let m = silver();
            let k = IntVec2::new(k1, k2);
            let lhs = m.bracket(m.apply_u(k).unwrap()).unwrap().abs() * m.lambda.clone();
            prop_assert_eq!(lhs, m.bracket(k).unwrap().abs());
        }

        #[test]
        fn ring_multiplication_respects_norm(p1 in -10_000i64..10_000, q1 in -10_000i64..10_000,
                                             p2 in -10_000i64..10_000, q2 in -10_000i64..10_000) {
            let a = RingElement::silver(p1, q1);
            let b = RingElement::silver(p2, q2);
            prop_assert_eq!((a.clone() * b.clone()).norm(), a.norm() * b.norm());
            prop_assert_eq!(a.clone() * a.conjugate(), RingElement::silver(a.norm(), 0));
        }
    }
}
