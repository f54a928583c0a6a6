//! Total enumerations of naturals, tuples and rationals used to list code domains.

use num::bigint::BigInt;

use crate::rational::Q;

/// Cantor pairing.
pub fn pair(a: u64, b: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s * (s + 1) / 2 + b as u128) as u64
}

/// Inverse of `pair`.
pub fn unpair(k: u64) -> (u64, u64) {
    let k = k as u128;
    let mut w = ((((8 * k + 1) as f64).sqrt() - 1.0) / 2.0) as u128;
    while w * (w + 1) / 2 > k {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= k {
        w += 1;
    }
    let t = w * (w + 1) / 2;
    let b = k - t;
    let a = w - b;
    (a as u64, b as u64)
}

/// k as an n-tuple of naturals (iterated unpairing; n >= 1).
pub fn unpair_n(k: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut rest = k;
    for _ in 1..n {
        let (a, b) = unpair(rest);
        out.push(a);
        rest = b;
    }
    out.push(rest);
    out
}

/// Stern's diatomic sequence.
pub fn fusc(mut n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 0u64);
    while n > 0 {
        if n & 1 == 1 {
            b += a;
        } else {
            a += b;
        }
        n >>= 1;
    }
    b
}

/// Positive rationals, each exactly once (Calkin-Wilf order).
pub fn positive_rational(k: u64) -> Q {
    let n = k + 1;
    Q::new(BigInt::from(fusc(n)), BigInt::from(fusc(n + 1)))
}

/// All rationals, each exactly once: 0, r1, -r1, r2, -r2, ...
pub fn rational(k: u64) -> Q {
    if k == 0 {
        return Q::from_integer(BigInt::from(0));
    }
    let r = positive_rational((k - 1) / 2);
    if k % 2 == 1 {
        r
    } else {
        -r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use std::collections::HashSet;

    #[test]
    fn pairing_round_trip() {
        for k in 0..5000u64 {
            let (a, b) = unpair(k);
            assert_eq!(pair(a, b), k);
        }
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        let big = pair(1 << 30, 12345);
        assert_eq!(unpair(big), (1 << 30, 12345));
    }

    #[test]
    fn tuples_cover() {
        let seen: HashSet<Vec<u64>> = (0..2000).map(|k| unpair_n(k, 3)).collect();
        assert_eq!(seen.len(), 2000);
        assert!(seen.contains(&vec![1, 2, 3]));
    }

    #[test]
    fn calkin_wilf_prefix() {
        let got: Vec<Q> = (0..6).map(positive_rational).collect();
        assert_eq!(
            got,
            vec![q(1, 1), q(1, 2), q(2, 1), q(1, 3), q(3, 2), q(2, 3)]
        );
        let all: HashSet<Q> = (0..4000).map(rational).collect();
        assert_eq!(all.len(), 4000);
        assert!(all.contains(&q(-3, 5)));
    }
}
