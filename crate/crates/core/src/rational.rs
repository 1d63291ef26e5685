//! Exact rational scalar and the handful of helpers the solvers need on top of
//! `num-rational`: the `num/den` text form, integer powers, binary scales and
//! exact discrete logarithms.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always held in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"num/den"` or a bare integer. A zero denominator is an error.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("malformed rational {text:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("malformed rational {text:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `num/den` form; integers keep their `/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// `floor(log2 r)` for `r > 0`.
pub fn floor_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "floor_log2 of non-positive rational");
    let p = r.numer();
    let q = r.denom();
    let e = p.bits() as i64 - q.bits() as i64;
    let at_least = if e >= 0 {
        *p >= (q << e as usize)
    } else {
        (p << (-e) as usize) >= *q
    };
    if at_least {
        e
    } else {
        e - 1
    }
}

/// `ceil(log_base x)` for `base in [0, 1)` and `x in (0, 1]`: the smallest
/// `L >= 0` with `base^L <= x`.
pub fn ceil_log_below_one(base: &Rational, x: &Rational) -> Result<u64> {
    if base.is_negative() || *base >= Rational::one() {
        return Err(Error::InvalidArgument(format!(
            "log base {} outside [0,1)",
            format_rational(base)
        )));
    }
    if !x.is_positive() || *x > Rational::one() {
        return Err(Error::InvalidArgument(format!(
            "log argument {} outside (0,1]",
            format_rational(x)
        )));
    }
    let mut acc = Rational::one();
    let mut steps = 0u64;
    while acc > *x {
        acc *= base;
        steps += 1;
    }
    Ok(steps)
}

/// Round to the nearest integer, ties to even.
pub fn round_half_even(x: &Rational) -> BigInt {
    let floor = x.floor().to_integer();
    let frac = x - Rational::from_integer(floor.clone());
    let half = ratio(1, 2);
    match frac.cmp(&half) {
        Ordering::Less => floor,
        Ordering::Greater => floor + 1,
        Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + 1
            }
        }
    }
}

fn pow10(e: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), e as usize)
}

fn floor_log10(x: &Rational) -> i64 {
    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    let ten_pow = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(pow10(e as u32))
        } else {
            Rational::new(BigInt::one(), pow10((-e) as u32))
        }
    };
    while ten_pow(e) > *x {
        e -= 1;
    }
    while ten_pow(e + 1) <= *x {
        e += 1;
    }
    e
}

/// Plain decimal rendering rounded half-to-even at `sig` significant digits,
/// trailing zeros after the point stripped.
pub fn format_decimal(r: &Rational, sig: u32) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let x = r.abs();
    let mut exp = floor_log10(&x);
    let shift = sig as i64 - 1 - exp;
    let scaled = if shift >= 0 {
        &x * Rational::from_integer(pow10(shift as u32))
    } else {
        &x / Rational::from_integer(pow10((-shift) as u32))
    };
    let mut digits_int = round_half_even(&scaled);
    if digits_int == pow10(sig) {
        digits_int /= 10;
        exp += 1;
    }
    let digits = digits_int.to_string();
    // value = 0.d1d2...dsig * 10^(exp+1)
    let point = exp + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(r: &Rational) -> i8 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

pub fn max_abs(values: impl IntoIterator<Item = Rational>) -> Rational {
    values
        .into_iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
