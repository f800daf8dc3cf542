//! Scalar abstraction shared by the binary64 and multiprecision code paths.
//!
//! The critical-point machinery is written once against [`Real`] and
//! instantiated with `f64` for sweeps and with [`MpFloat`] when the model's
//! perturbation parameter drops below what binary64 can resolve.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

/// Binary64 precision in bits.
pub const F64_BITS: usize = 53;

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64, bits: usize) -> Self;
    fn from_i128(x: i128, bits: usize) -> Self;
    fn pi(bits: usize) -> Self;
    /// Working precision of this value in bits.
    fn bits(&self) -> usize;
    fn to_f64(&self) -> f64;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn asin(&self) -> Self;
    fn atan(&self) -> Self;
    fn abs(&self) -> Self;

    fn lift(&self, x: f64) -> Self {
        Self::from_f64(x, self.bits())
    }

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }

    fn one_like(&self) -> Self {
        self.lift(1.0)
    }

    fn ln_1p(&self) -> Self {
        (self.one_like() + self.clone()).ln()
    }

    fn is_negative(&self) -> bool {
        *self < self.zero_like()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn atan2(&self, x: &Self) -> Self {
        let zero = self.zero_like();
        let pi = Self::pi(self.bits());
        if *x > zero {
            (self.clone() / x.clone()).atan()
        } else if *x < zero {
            let base = (self.clone() / x.clone()).atan();
            if *self >= zero {
                base + pi
            } else {
                base - pi
            }
        } else if *self > zero {
            pi / self.lift(2.0)
        } else if *self < zero {
            -(pi / self.lift(2.0))
        } else {
            zero
        }
    }

    /// Reduces an angle to `(-pi, pi]`.
    fn wrap_pi(&self) -> Self {
        let pi = Self::pi(self.bits());
        let two_pi = pi.clone() + pi.clone();
        let turns = ((self.clone() + pi.clone()) / two_pi.clone()).to_f64().floor();
        let mut r = self.clone() - two_pi.clone() * self.lift(turns);
        // guard against the f64 turn count being off by one
        while r > pi {
            r = r - two_pi.clone();
        }
        while r <= -pi.clone() {
            r = r + two_pi.clone();
        }
        r
    }

    /// Reduces an angle to `[0, 2pi)`.
    fn wrap_two_pi(&self) -> Self {
        let pi = Self::pi(self.bits());
        let two_pi = pi.clone() + pi;
        let r = self.wrap_pi();
        if r.is_negative() {
            r + two_pi
        } else {
            r
        }
    }

    /// `ln sinh(y)` for `y > 0` without overflow.
    fn ln_sinh(&self) -> Self {
        if self.to_f64() > 1.0 {
            let two = self.lift(2.0);
            let e = (-(two.clone() * self.clone())).exp();
            self.clone() - two.ln() + (-e).ln_1p()
        } else {
            let e = self.exp();
            let s = (e.clone() - e.one_like() / e) / self.lift(2.0);
            s.ln()
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64, _bits: usize) -> Self {
        x
    }
    fn from_i128(x: i128, _bits: usize) -> Self {
        x as f64
    }
    fn pi(_bits: usize) -> Self {
        std::f64::consts::PI
    }
    fn bits(&self) -> usize {
        F64_BITS
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn asin(&self) -> Self {
        f64::asin(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }
    fn atan2(&self, x: &Self) -> Self {
        f64::atan2(*self, *x)
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Multiprecision float. Binary operations run at the larger precision of
/// the two operands.
#[derive(Clone)]
pub struct MpFloat {
    value: BigFloat,
    bits: usize,
}

impl MpFloat {
    pub fn from_big(value: BigFloat, bits: usize) -> Self {
        Self { value, bits }
    }

    pub fn as_big(&self) -> &BigFloat {
        &self.value
    }

    /// Decimal rendering with the full working precision.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|cc| {
            self.value
                .format(astro_float::Radix::Dec, RM, cc)
                .unwrap_or_else(|_| "NaN".to_string())
        })
    }

    fn prec(&self, other: &Self) -> usize {
        self.bits.max(other.bits)
    }

    fn unary(&self, f: impl FnOnce(&BigFloat, usize, &mut Consts) -> BigFloat) -> Self {
        let value = with_consts(|cc| f(&self.value, self.bits, cc));
        Self {
            value,
            bits: self.bits,
        }
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpFloat({:e}, {} bits)", self.to_f64(), self.bits)
    }
}

impl PartialEq for MpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for MpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! mp_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for MpFloat {
            type Output = MpFloat;
            fn $method(self, rhs: MpFloat) -> MpFloat {
                let bits = self.prec(&rhs);
                MpFloat {
                    value: self.value.$method(&rhs.value, bits, RM),
                    bits,
                }
            }
        }
    };
}

mp_binop!(Add, add);
mp_binop!(Sub, sub);
mp_binop!(Mul, mul);
mp_binop!(Div, div);

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat {
            value: self.value.neg(),
            bits: self.bits,
        }
    }
}

/// `m * 2^e` for a 64-bit mantissa without intermediate overflow.
fn scale_pow2(m: f64, e: i64) -> f64 {
    if e > 2000 {
        return m * f64::INFINITY;
    }
    if e < -2200 {
        return 0.0 * m;
    }
    let mut x = m;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Real for MpFloat {
    fn from_f64(x: f64, bits: usize) -> Self {
        Self {
            value: BigFloat::from_f64(x, bits),
            bits,
        }
    }

    fn from_i128(x: i128, bits: usize) -> Self {
        let mut value = BigFloat::from_i128(x, 128);
        value
            .set_precision(bits, RM)
            .expect("precision within astro-float limits");
        Self { value, bits }
    }

    fn pi(bits: usize) -> Self {
        Self {
            value: with_consts(|cc| cc.pi(bits, RM)),
            bits,
        }
    }

    fn bits(&self) -> usize {
        self.bits
    }

    fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.value.as_raw_parts() {
            Some((words, _, sign, exponent, _)) => {
                let Some(&top) = words.last() else {
                    return 0.0;
                };
                if top == 0 {
                    return 0.0;
                }
                let next = if words.len() > 1 {
                    words[words.len() - 2]
                } else {
                    0
                };
                // two words keep the rounding of the top 53 bits honest
                let m = top as f64 + (next as f64) * 2f64.powi(-64);
                let v = scale_pow2(m, exponent as i64 - 64);
                match sign {
                    Sign::Pos => v,
                    Sign::Neg => -v,
                }
            }
            None => 0.0,
        }
    }

    fn sin(&self) -> Self {
        self.unary(|v, p, cc| v.sin(p, RM, cc))
    }
    fn cos(&self) -> Self {
        self.unary(|v, p, cc| v.cos(p, RM, cc))
    }
    fn exp(&self) -> Self {
        self.unary(|v, p, cc| v.exp(p, RM, cc))
    }
    fn ln(&self) -> Self {
        self.unary(|v, p, cc| v.ln(p, RM, cc))
    }
    fn sqrt(&self) -> Self {
        self.unary(|v, p, _| v.sqrt(p, RM))
    }
    fn asin(&self) -> Self {
        self.unary(|v, p, cc| v.asin(p, RM, cc))
    }
    fn atan(&self) -> Self {
        self.unary(|v, p, cc| v.atan(p, RM, cc))
    }
    fn abs(&self) -> Self {
        Self {
            value: self.value.abs(),
            bits: self.bits,
        }
    }
}
