//! Configurable-precision real arithmetic on top of exact rationals.
//!
//! Reals are carried as [`BigRational`] values whose significands are rounded
//! to a chosen number of bits. Inputs that arrive as decimal text (or as an
//! `f64` printed in shortest form) are converted exactly, so `0.31415` is the
//! rational `31415/100000` rather than its binary approximation.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `floor(log2 |q|)` for nonzero `q`.
pub fn floor_log2(q: &Rational) -> i64 {
    assert!(!q.is_zero(), "floor_log2 of zero");
    let n = q.numer().abs();
    let d = q.denom().abs();
    let mut e = n.bits() as i64 - d.bits() as i64;
    // n / d lies in [2^(e-1), 2^(e+1)); settle which side of 2^e.
    let ge = if e >= 0 { n >= (&d << e as u64) } else { (&n << (-e) as u64) >= d };
    if !ge {
        e -= 1;
    }
    e
}

/// `ceil(log2 q)` for positive `q`.
pub fn ceil_log2(q: &Rational) -> i64 {
    let e = floor_log2(q);
    if mul_pow2(&int(1), e) == *q {
        e
    } else {
        e + 1
    }
}

/// `q * 2^e` exactly.
pub fn mul_pow2(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        Rational::new(q.numer() << e as u64, q.denom().clone())
    } else {
        Rational::new(q.numer().clone(), q.denom() << (-e) as u64)
    }
}

/// Nearest integer, ties rounded up.
pub fn round_nearest(q: &Rational) -> BigInt {
    (q + ratio(1, 2)).floor().to_integer()
}

/// Round `q` to `bits` significant bits (nearest, ties away from zero).
pub fn round_to_bits(q: &Rational, bits: u32) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    let shift = bits as i64 - 1 - floor_log2(q);
    let scaled = mul_pow2(&q.abs(), shift);
    let mut m = round_nearest(&scaled);
    if q.is_negative() {
        m = -m;
    }
    mul_pow2(&Rational::from_integer(m), -shift)
}

/// Real (sign-preserving) cube root of `t`, rounded to `bits` significant bits.
pub fn real_cbrt(t: &Rational, bits: u32) -> Rational {
    if t.is_zero() {
        return Rational::zero();
    }
    let guard = bits as i64 + 4;
    // Choose s so that |t| * 2^(3s) has about 3 * guard bits before the root.
    let e = floor_log2(t);
    let s = Integer::div_ceil(&(3 * guard - e), &3).max(0);
    let scaled = mul_pow2(&t.abs(), 3 * s).floor().to_integer();
    let root = scaled.cbrt();
    let mut r = mul_pow2(&Rational::from_integer(root), -s);
    if t.is_negative() {
        r = -r;
    }
    round_to_bits(&r, bits)
}

/// Exact conversion of a decimal literal such as `-0.31415`, `1e-5` or `2.5E+3`.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidParams(format!("not a decimal number: {text:?}"));
    let s = text.trim();
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let mut n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    if negative {
        n = -n;
    }
    let scale = exponent as i64 - frac.len() as i64;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// The rational whose decimal expansion is the shortest round-trip form of `x`.
pub fn from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidParams(format!("non-finite value {x}")));
    }
    parse_decimal(&format!("{x:e}"))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Outside f64's exponent range: saturate by sign.
        match q.numer().sign() {
            Sign::Minus => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        }
    })
}

/// Exact decimal text for rationals with a finite decimal expansion, otherwise
/// a `digits`-significant-digit approximation.
pub fn to_decimal_string(q: &Rational, digits: usize) -> String {
    let d = q.denom();
    let mut rest = d.clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while rest.is_multiple_of(&p) {
            rest /= &p;
        }
    }
    if rest.is_one() {
        let mut k = 0usize;
        let ten = BigInt::from(10);
        let mut scaled = q.clone();
        while !scaled.is_integer() {
            scaled *= Rational::from_integer(ten.clone());
            k += 1;
        }
        let n = scaled.to_integer();
        let neg = n.is_negative();
        let mut s = n.abs().to_string();
        if k > 0 {
            if s.len() <= k {
                s = format!("{}{}", "0".repeat(k + 1 - s.len()), s);
            }
            s.insert(s.len() - k, '.');
        }
        if neg {
            s.insert(0, '-');
        }
        s
    } else {
        format!("{:.*e}", digits.saturating_sub(1), to_f64(q))
    }
}

pub fn pow2_rational(e: i64) -> Rational {
    mul_pow2(&int(1), e)
}
