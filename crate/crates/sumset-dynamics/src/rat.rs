//! Exact rational scalars and mod-1 helpers shared by the dynamics modules.

use crate::{Error, Result};
use num_rational::Ratio;
use num_traits::{One, Signed};

/// Exact rational number. Denominators stay desk-scale (≤ ~10^12), so a
/// fixed-width ratio is enough; arithmetic that could overflow widens first.
pub type Rat = Ratio<i128>;

pub fn rat(n: i128, d: i128) -> Rat {
    Ratio::new(n, d)
}

/// Reduce into the fundamental domain [0, 1).
pub fn mod1(x: Rat) -> Rat {
    let f = x.fract();
    if f.is_negative() {
        f + Rat::one()
    } else {
        f
    }
}

/// Distance on the circle between two mod-1 values.
pub fn dist_mod1(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn to_f64(x: Rat) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Parse "p/q", an integer, or a decimal literal into an exact rational.
///
/// Decimal literals become exact fractions over a power of ten, so a value
/// like `0.41421356237` is treated as the rational 41421356237/10^11.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = |_| Error::Invalid(format!("cannot parse rational from {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let num: i128 = p.trim().parse().map_err(bad)?;
        let den: i128 = q.trim().parse().map_err(bad)?;
        if den == 0 {
            return Err(Error::Invalid("zero denominator".into()));
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 24 || frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(Error::Invalid(format!("cannot parse decimal {s:?}")));
        }
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let whole: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(bad)?
        };
        let scale = 10i128.pow(frac.len() as u32);
        let part: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(bad)?
        };
        return Ok(Ratio::from_integer(whole) + Ratio::new(sign * part, scale));
    }
    let whole: i128 = s.parse().map_err(bad)?;
    Ok(Ratio::from_integer(whole))
}

/// Render as "p/q" (or "p" when integral); inverse of [`parse_rat`].
pub fn format_rat(x: Rat) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// (base^exp) mod m without overflow for m < 2^64.
pub fn pow_mod(base: u128, exp: u64, m: u128) -> u128 {
    debug_assert!(m > 0 && m <= u64::MAX as u128);
    if m == 1 {
        return 0;
    }
    let mut acc: u128 = 1;
    let mut b = base % m;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm_u128(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u128(a, b) * b
}

/// Binomial coefficient as u128; panics on overflow (desk-scale arguments).
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
