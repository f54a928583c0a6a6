//! Exact rational helpers shared by every module.

use num::bigint::{BigInt, Sign};
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational number.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// 2^-k.
pub fn pow2_neg(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k as usize)
}

/// 2^k.
pub fn pow2(k: u32) -> Q {
    Q::from_integer(BigInt::one() << k as usize)
}

/// Largest multiple of 2^-k that is <= x.
pub fn floor_dyadic(x: &Q, k: u32) -> Q {
    let scale = BigInt::one() << k as usize;
    let scaled = x * Q::from_integer(scale.clone());
    Q::new(scaled.floor().to_integer(), scale)
}

/// Smallest multiple of 2^-k that is >= x.
pub fn ceil_dyadic(x: &Q, k: u32) -> Q {
    let scale = BigInt::one() << k as usize;
    let scaled = x * Q::from_integer(scale.clone());
    Q::new(scaled.ceil().to_integer(), scale)
}

/// Nearest multiple of 2^-k (ties toward +inf).
pub fn round_dyadic(x: &Q, k: u32) -> Q {
    floor_dyadic(&(x + pow2_neg(k + 1)), k)
}

/// Lower and upper dyadic bounds of sqrt(x) with gap at most 2^-k; exact when x is a
/// square of a multiple of 2^-k. Negative inputs are clamped to zero.
pub fn sqrt_bounds(x: &Q, k: u32) -> (Q, Q) {
    if !x.is_positive() {
        return (Q::zero(), Q::zero());
    }
    // floor(sqrt(x * 4^k)) == floor(sqrt(floor(x * 4^k)))
    let shifted = x.numer() << (2 * k as usize);
    let scaled = &shifted / x.denom();
    let root = scaled.sqrt();
    let denom = BigInt::one() << k as usize;
    let exact = &root * &root * x.denom() == shifted;
    let lo = Q::new(root.clone(), denom.clone());
    if exact {
        return (lo.clone(), lo);
    }
    let hi = Q::new(root + BigInt::one(), denom);
    (lo, hi)
}

/// Bits needed to bound |x| from above: smallest e with |x| < 2^e (e >= 0).
pub fn magnitude_bits(x: &Q) -> u32 {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    if n < d {
        return 0;
    }
    let mut e = (n.bits() - d.bits()) as u32;
    while (d << e as usize) <= *n {
        e += 1;
    }
    e
}

/// Smallest k >= 0 with 2^-k <= x, for positive x; None otherwise.
pub fn neg_log2_floor(x: &Q) -> Option<u32> {
    if !x.is_positive() {
        return None;
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    if n >= d {
        return Some(0);
    }
    let mut k = (d.bits() - n.bits()).saturating_sub(1) as u32;
    while (n << k as usize) < *d {
        k += 1;
    }
    Some(k)
}

/// Parse a decimal rational literal such as `3/5`, `-1`, `0`, `+2/4`.
pub fn parse_decimal(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let (num_s, den_s) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num_s.parse().map_err(|_| bad())?;
    let d: BigInt = den_s.parse().map_err(|_| bad())?;
    if d.is_zero() || d.sign() == Sign::Minus {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

/// Decimal text of a rational in lowest terms: `3/5`, `-1`, `0`.
pub fn fmt_decimal(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Comma separated rational vector, e.g. `0,-1/2`.
pub fn parse_vector(s: &str) -> Result<Vec<Q>, Error> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    if t.trim().is_empty() {
        return Err(Error::Parse(format!("empty vector: {s:?}")));
    }
    t.split(',').map(parse_decimal).collect()
}

pub fn fmt_vector(v: &[Q]) -> String {
    v.iter().map(fmt_decimal).collect::<Vec<_>>().join(",")
}

pub fn norm2(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| acc + x * x)
}

pub fn dist2(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| {
        let d = x - y;
        acc + &d * &d
    })
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational from a finite f64 (used only for test fixtures and benches).
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Point on the unit circle from the rational parameter t: ((1-t^2)/(1+t^2), 2t/(1+t^2)).
pub fn circle_point(t: &Q) -> Vec<Q> {
    let t2 = t * t;
    let d = Q::one() + &t2;
    vec![(Q::one() - &t2) / &d, (t * qi(2)) / d]
}

/// Point on the unit n-sphere from rational parameters via inverse stereographic
/// projection from the north pole.
pub fn sphere_point(y: &[Q]) -> Vec<Q> {
    let n2 = norm2(y);
    let d = &n2 + Q::one();
    let mut out: Vec<Q> = y.iter().map(|c| c * qi(2) / &d).collect();
    out.push((n2 - Q::one()) / d);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_rounding_brackets() {
        let x = q(1, 3);
        let lo = floor_dyadic(&x, 4);
        let hi = ceil_dyadic(&x, 4);
        assert_eq!(lo, q(5, 16));
        assert_eq!(hi, q(6, 16));
        assert_eq!(round_dyadic(&x, 4), q(5, 16));
    }

    #[test]
    fn sqrt_bounds_exact_and_enclosing() {
        assert_eq!(sqrt_bounds(&q(25, 9), 10).0, floor_dyadic(&q(5, 3), 10));
        let (lo, hi) = sqrt_bounds(&q(9, 4), 3);
        assert_eq!(lo, q(3, 2));
        assert_eq!(hi, q(3, 2));
        let (lo, hi) = sqrt_bounds(&qi(2), 20);
        assert!(&lo * &lo <= qi(2) && &hi * &hi >= qi(2));
        assert!(&hi - &lo <= pow2_neg(20));
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(parse_decimal("3/5").unwrap(), q(3, 5));
        assert_eq!(parse_decimal("-1").unwrap(), qi(-1));
        assert_eq!(parse_decimal("2/4").unwrap(), q(1, 2));
        assert!(parse_decimal("1/0").is_err());
        assert!(parse_decimal("x").is_err());
        assert_eq!(fmt_decimal(&q(-6, 4)), "-3/2");
        assert_eq!(parse_vector("(0,-1)").unwrap(), vec![qi(0), qi(-1)]);
    }

    #[test]
    fn circle_points_are_on_circle() {
        for t in [q(0, 1), q(1, 2), q(-3, 7), q(5, 1)] {
            assert_eq!(norm2(&circle_point(&t)), qi(1));
        }
        assert_eq!(norm2(&sphere_point(&[q(1, 3), q(-2, 5)])), qi(1));
    }

    #[test]
    fn log_helpers() {
        assert_eq!(magnitude_bits(&q(3, 1)), 2);
        assert_eq!(magnitude_bits(&q(1, 2)), 0);
        assert_eq!(neg_log2_floor(&q(1, 8)), Some(3));
        assert_eq!(neg_log2_floor(&q(3, 16)), Some(3));
        assert_eq!(neg_log2_floor(&qi(0)), None);
    }
}
