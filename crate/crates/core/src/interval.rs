//! Closed rational intervals and boxes with outward dyadic rounding.

use num::{One, Signed, Zero};

use crate::rational::{ceil_dyadic, floor_dyadic, qi, sqrt_bounds, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: Q) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Q {
        (&self.lo + &self.hi) / qi(2)
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = if self.lo > o.lo {
            self.lo.clone()
        } else {
            o.lo.clone()
        };
        let hi = if self.hi < o.hi {
            self.hi.clone()
        } else {
            o.hi.clone()
        };
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        let lo = if self.lo < o.lo {
            self.lo.clone()
        } else {
            o.lo.clone()
        };
        let hi = if self.hi > o.hi {
            self.hi.clone()
        } else {
            o.hi.clone()
        };
        Interval { lo, hi }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add_q(&self, c: &Q) -> Interval {
        Interval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    pub fn scale(&self, c: &Q) -> Interval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn square(&self) -> Interval {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.contains_zero() {
            Interval {
                lo: Q::zero(),
                hi: if a > b { a } else { b },
            }
        } else if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// None when the divisor interval contains zero.
    pub fn div(&self, o: &Interval) -> Option<Interval> {
        if o.contains_zero() {
            return None;
        }
        let inv = Interval {
            lo: Q::one() / &o.hi,
            hi: Q::one() / &o.lo,
        };
        Some(self.mul(&inv))
    }

    /// Enclosure of sqrt over the non-negative part, refined to 2^-k.
    pub fn sqrt(&self, k: u32) -> Interval {
        let lo = sqrt_bounds(&self.lo, k).0;
        let hi = sqrt_bounds(&self.hi, k).1;
        Interval { lo, hi }
    }

    /// Widen the endpoints outward to multiples of 2^-k.
    pub fn round_out(&self, k: u32) -> Interval {
        Interval {
            lo: floor_dyadic(&self.lo, k),
            hi: ceil_dyadic(&self.hi, k),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }
}

/// Axis-aligned closed box.
pub type IBox = Vec<Interval>;

pub fn box_point(x: &[Q]) -> IBox {
    x.iter().cloned().map(Interval::point).collect()
}

pub fn box_ball(center: &[Q], radius: &Q) -> IBox {
    center
        .iter()
        .map(|c| Interval::new(c - radius, c + radius))
        .collect()
}

pub fn box_width(b: &[Interval]) -> Q {
    b.iter()
        .map(|i| i.width())
        .fold(Q::zero(), |a, w| if w > a { w } else { a })
}

pub fn box_mid(b: &[Interval]) -> Vec<Q> {
    b.iter().map(|i| i.mid()).collect()
}

pub fn box_intersect(a: &[Interval], b: &[Interval]) -> Option<IBox> {
    a.iter().zip(b).map(|(x, y)| x.intersect(y)).collect()
}

pub fn box_hull(a: &[Interval], b: &[Interval]) -> IBox {
    a.iter().zip(b).map(|(x, y)| x.hull(y)).collect()
}

pub fn box_contains(b: &[Interval], x: &[Q]) -> bool {
    b.iter().zip(x).all(|(i, v)| i.contains(v))
}

pub fn box_round_out(b: &[Interval], k: u32) -> IBox {
    b.iter().map(|i| i.round_out(k)).collect()
}

/// Closed boxes with empty intersection.
pub fn boxes_disjoint(a: &[Interval], b: &[Interval]) -> bool {
    a.iter().zip(b).any(|(x, y)| x.hi < y.lo || y.hi < x.lo)
}

/// Interval of the squared Euclidean norm over the box.
pub fn box_norm2(b: &[Interval]) -> Interval {
    b.iter()
        .map(|i| i.square())
        .fold(Interval::point(Q::zero()), |a, s| a.add(&s))
}

/// Squared distance from `c` to the farthest point of the box.
pub fn box_far2(b: &[Interval], c: &[Q]) -> Q {
    b.iter().zip(c).fold(Q::zero(), |acc, (i, ci)| {
        let a = (&i.lo - ci).abs();
        let h = (&i.hi - ci).abs();
        let m = if a > h { a } else { h };
        acc + &m * &m
    })
}

/// Squared distance from `c` to the nearest point of the box.
pub fn box_near2(b: &[Interval], c: &[Q]) -> Q {
    b.iter().zip(c).fold(Q::zero(), |acc, (i, ci)| {
        let d = if ci < &i.lo {
            &i.lo - ci
        } else if ci > &i.hi {
            ci - &i.hi
        } else {
            Q::zero()
        };
        acc + &d * &d
    })
}

/// The closed box lies inside the open ball B(c, r).
pub fn box_inside_ball(b: &[Interval], c: &[Q], r: &Q) -> bool {
    box_far2(b, c) < r * r
}

/// The closed box misses the open ball B(c, r).
pub fn box_outside_ball(b: &[Interval], c: &[Q], r: &Q) -> bool {
    box_near2(b, c) >= r * r
}

/// Split a box into 2^n halves.
pub fn box_split(b: &[Interval]) -> Vec<IBox> {
    let mut out: Vec<IBox> = vec![Vec::with_capacity(b.len())];
    for i in b {
        let m = i.mid();
        let mut next = Vec::with_capacity(out.len() * 2);
        for pre in &out {
            let mut l = pre.clone();
            l.push(Interval::new(i.lo.clone(), m.clone()));
            let mut r = pre.clone();
            r.push(Interval::new(m.clone(), i.hi.clone()));
            next.push(l);
            next.push(r);
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn iv(a: Q, b: Q) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn arithmetic_encloses() {
        let a = iv(q(-1, 2), q(1, 3));
        let b = iv(q(2, 1), q(3, 1));
        assert_eq!(a.mul(&b), iv(q(-3, 2), q(1, 1)));
        assert_eq!(a.square(), iv(q(0, 1), q(1, 4)));
        assert_eq!(a.sub(&b), iv(q(-7, 2), q(-5, 3)));
        assert!(b.div(&a).is_none());
        assert_eq!(a.div(&b).unwrap(), iv(q(-1, 4), q(1, 6)));
    }

    #[test]
    fn sqrt_enclosure() {
        let s = iv(q(2, 1), q(3, 1)).sqrt(16);
        assert!(&s.lo * &s.lo <= q(2, 1));
        assert!(&s.hi * &s.hi >= q(3, 1));
        let neg = iv(q(-1, 1), q(4, 1)).sqrt(8);
        assert_eq!(neg.lo, q(0, 1));
        assert_eq!(neg.hi, q(2, 1));
    }

    #[test]
    fn ball_box_relations() {
        let b = vec![iv(q(0, 1), q(1, 2)), iv(q(0, 1), q(1, 2))];
        assert!(box_inside_ball(&b, &[q(0, 1), q(0, 1)], &q(1, 1)));
        assert!(!box_inside_ball(&b, &[q(0, 1), q(0, 1)], &q(1, 2)));
        assert!(box_outside_ball(&b, &[q(2, 1), q(0, 1)], &q(3, 2)));
        assert!(!box_outside_ball(&b, &[q(2, 1), q(0, 1)], &q(8, 5)));
        assert_eq!(box_split(&b).len(), 4);
    }
}
