//! Euclidean space: rational balls, the Cauchy representation, point names and the
//! closed-form homeomorphisms used by charts.

use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::decision::{ball_disjoint, ball_subset};
use crate::enumerate::{positive_rational, rational, unpair, unpair_n};
use crate::error::{Error, Result};
use crate::espace::{enclosure_events, enclosure_name, point_name, EnclosureFn, Space, SpaceRef};
use crate::interval::{
    box_ball, box_inside_ball, box_intersect, box_mid, box_norm2, box_width, IBox, Interval,
};
use crate::names::{Discipline, Name, Translator};
use crate::rational::{
    ceil_dyadic, dist2, neg_log2_floor, norm2, parse_decimal, pow2, pow2_neg, qi, round_dyadic, Q,
};
use crate::words::{rat_decode, rat_encode, tuple, untuple_all, Word, WordStream};

/// Open ball with rational center and positive rational radius.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalBall {
    pub center: Vec<Q>,
    pub radius: Q,
}

impl RationalBall {
    pub fn new(center: Vec<Q>, radius: Q) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Precondition("ball of dimension 0".into()));
        }
        if !radius.is_positive() {
            return Err(Error::Precondition("ball radius must be positive".into()));
        }
        Ok(RationalBall { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Exact membership of a rational point in the open ball.
    pub fn contains(&self, x: &[Q]) -> bool {
        x.len() == self.dim() && dist2(x, &self.center) < &self.radius * &self.radius
    }

    pub fn bbox(&self) -> IBox {
        box_ball(&self.center, &self.radius)
    }

    pub fn encode(&self) -> Word {
        let mut parts: Vec<Word> = self.center.iter().map(rat_encode).collect();
        parts.push(rat_encode(&self.radius));
        tuple(&parts)
    }

    /// Decodes a ball code; `dim` pins the dimension when given.
    pub fn decode(w: &str, dim: Option<usize>) -> Result<Self> {
        let bad = || Error::InvalidCode(format!("not a ball code: {w:?}"));
        let parts = untuple_all(w).ok_or_else(bad)?;
        if parts.len() < 2 || dim.is_some_and(|n| parts.len() != n + 1) {
            return Err(bad());
        }
        let vals: Vec<Q> = parts
            .iter()
            .map(|p| rat_decode(p.as_str()))
            .collect::<Result<_>>()?;
        let (r, c) = vals.split_last().unwrap();
        if !r.is_positive() {
            return Err(bad());
        }
        Ok(RationalBall {
            center: c.to_vec(),
            radius: r.clone(),
        })
    }

    /// Literal `B(c1,...,cn;r)` with canonical rational literals.
    pub fn literal(&self) -> String {
        let c: Vec<String> = self
            .center
            .iter()
            .map(|x| rat_encode(x).to_string())
            .collect();
        format!("B({};{})", c.join(","), rat_encode(&self.radius))
    }

    /// Parses `B(c1,...,cn;r)`.
    pub fn parse_literal(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a ball literal: {s:?}"));
        let t = s.trim();
        let inner = t
            .strip_prefix("B(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (c, r) = inner.split_once(';').ok_or_else(bad)?;
        let center = c
            .split(',')
            .map(parse_component)
            .collect::<Result<Vec<_>>>()?;
        let radius = parse_component(r)?;
        RationalBall::new(center, radius).map_err(|_| bad())
    }
}

impl fmt::Display for RationalBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

/// A literal component: a canonical rational code (`-1/10`) or a slash-free decimal
/// (`-1`, `0.25`).
pub fn parse_component(s: &str) -> Result<Q> {
    let t = s.trim();
    if t.contains('/') {
        return rat_decode(t).map_err(|e| Error::Parse(e.to_string()));
    }
    if let Some((i, f)) = t.split_once('.') {
        let neg = i.starts_with('-');
        let ip = if i.is_empty() || i == "-" {
            qi(0)
        } else {
            parse_decimal(i)?
        };
        if f.is_empty() || !f.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(format!("not a rational literal: {s:?}")));
        }
        let fp = parse_decimal(f)? / Q::from_integer(num::BigInt::from(10).pow(f.len() as u32));
        return Ok(if neg { ip - fp } else { ip + fp });
    }
    parse_decimal(t)
}

/// Comma separated point literal, components as in [`parse_component`].
pub fn parse_point(s: &str) -> Result<Vec<Q>> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    if t.trim().is_empty() {
        return Err(Error::Parse(format!("empty point: {s:?}")));
    }
    t.split(',').map(parse_component).collect()
}

/// Grid ball G(L, m) = B(m 2^-(L+1), 2^-L).
pub fn grid_ball(level: u32, m: &[num::BigInt]) -> RationalBall {
    let h = pow2_neg(level + 1);
    RationalBall {
        center: m.iter().map(|v| Q::from_integer(v.clone()) * &h).collect(),
        radius: pow2_neg(level),
    }
}

/// The grid ball of level L whose center is nearest to x.
pub fn nearest_grid_ball(x: &[Q], level: u32) -> RationalBall {
    RationalBall {
        center: x.iter().map(|c| round_dyadic(c, level + 1)).collect(),
        radius: pow2_neg(level),
    }
}

/// Computable Euclidean space of dimension n with rational-ball base.
#[derive(Debug, Clone)]
pub struct Euclid {
    pub n: usize,
}

pub fn euclidean_space(n: usize) -> Arc<Euclid> {
    assert!(n >= 1);
    Arc::new(Euclid { n })
}

impl Euclid {
    pub fn ball(&self, w: &str) -> Option<RationalBall> {
        RationalBall::decode(w, Some(self.n)).ok()
    }

    fn grid_level_count(&self, level: u32) -> u128 {
        let m = (level as u128 + 1) << (level + 1);
        (2 * m + 1).saturating_pow(self.n as u32)
    }

    /// The j-th grid ball: level by level, centers in [-(L+1), L+1]^n.
    pub fn grid_code(&self, mut j: u64) -> RationalBall {
        let mut level = 0u32;
        loop {
            let c = self.grid_level_count(level);
            if (j as u128) < c {
                break;
            }
            j -= c as u64;
            level += 1;
        }
        let side = 2 * (((level as u128) + 1) << (level + 1)) + 1;
        let half = (side / 2) as i128;
        let mut rest = j as u128;
        let mut m = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            m.push(num::BigInt::from((rest % side) as i128 - half));
            rest /= side;
        }
        grid_ball(level, &m)
    }

    /// The k-th ball of the code enumeration: grid balls at even k, generic at odd k.
    pub fn code_ball(&self, k: u64) -> RationalBall {
        if k.is_multiple_of(2) {
            self.grid_code(k / 2)
        } else {
            self.generic_code(k / 2)
        }
    }

    /// The j-th generic ball: rational center tuple and positive radius.
    pub fn generic_code(&self, j: u64) -> RationalBall {
        let v = unpair_n(j, self.n + 1);
        RationalBall {
            center: v[..self.n].iter().map(|&i| rational(i)).collect(),
            radius: positive_rational(v[self.n]),
        }
    }

    /// A ball certified to contain the box, with radius 2^-L for the largest L <= cap that works.
    pub fn covering_ball(&self, b: &[Interval], cap: u32) -> Option<RationalBall> {
        let w = box_width(b);
        let start = if w.is_zero() {
            cap
        } else {
            neg_log2_floor(&w).map_or(0, |k| k.min(cap))
        };
        let mut level = start as i64;
        while level >= -8 {
            let (r, k) = if level >= 0 {
                (pow2_neg(level as u32), level as u32 + 3)
            } else {
                (pow2((-level) as u32), 3)
            };
            let c: Vec<Q> = box_mid(b).iter().map(|x| round_dyadic(x, k)).collect();
            if box_inside_ball(b, &c, &r) {
                return Some(RationalBall {
                    center: c,
                    radius: r,
                });
            }
            level -= 1;
        }
        None
    }
}

impl Space for Euclid {
    fn label(&self) -> String {
        format!("euclid:{}", self.n)
    }
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn in_dom(&self, w: &str) -> bool {
        self.ball(w).is_some()
    }
    fn code(&self, k: u64) -> Word {
        self.code_ball(k).encode()
    }
    fn is_point(&self, x: &[Q]) -> bool {
        x.len() == self.n
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        self.ball(w).map(|b| b.contains(x))
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        self.ball(w).map(|b| b.bbox())
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        self.ball(w)
            .is_some_and(|ball| box_inside_ball(b, &ball.center, &ball.radius))
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let mut out = vec![RationalBall {
            center: x.to_vec(),
            radius: pow2_neg(level),
        }
        .encode()];
        let g = nearest_grid_ball(x, level);
        if g.contains(x) {
            out.push(g.encode());
        }
        out
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        let mut out = Vec::new();
        if let Some(ball) = self.covering_ball(b, level) {
            out.push(ball.encode());
            let lv = neg_log2_floor(&ball.radius).unwrap_or(0);
            let g = nearest_grid_ball(&ball.center, lv.saturating_sub(1));
            if box_inside_ball(b, &g.center, &g.radius) {
                out.push(g.encode());
            }
        }
        out
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        match (self.ball(u), self.ball(v)) {
            (Some(a), Some(b)) => ball_subset(&a, &b),
            _ => false,
        }
    }
    fn refine(&self, u: &str, v: &str, k: u64) -> Option<Word> {
        let a = self.ball(u)?;
        let b = self.ball(v)?;
        if k == 0 {
            if ball_subset(&a, &b) {
                return Some(a.encode());
            }
            if ball_subset(&b, &a) {
                return Some(b.encode());
            }
            return None;
        }
        let (level, idx) = unpair(k - 1);
        let level = level as u32;
        let bx = box_intersect(&a.bbox(), &b.bbox())?;
        let h = pow2(level + 1);
        let mut lo = Vec::with_capacity(self.n);
        let mut side = Vec::with_capacity(self.n);
        for i in &bx {
            let l = ceil_dyadic(&(&i.lo * &h), 0).to_integer();
            let u = (&i.hi * &h).floor().to_integer();
            if u < l {
                return None;
            }
            side.push(num::ToPrimitive::to_u64(&(&u - &l + 1u32)).unwrap_or(u64::MAX));
            lo.push(l);
        }
        let mut rest = idx;
        let mut m = Vec::with_capacity(self.n);
        for (l, s) in lo.iter().zip(&side) {
            m.push(l + num::BigInt::from(rest % s));
            rest /= s;
        }
        if rest != 0 {
            return None;
        }
        let g = grid_ball(level, &m);
        (ball_subset(&g, &a) && ball_subset(&g, &b)).then(|| g.encode())
    }
    fn is_hausdorff(&self) -> bool {
        true
    }
    fn disjoint(&self, u: &str, v: &str, _effort: u32) -> bool {
        match (self.ball(u), self.ball(v)) {
            (Some(a), Some(b)) => ball_disjoint(&a, &b),
            _ => false,
        }
    }
}

/// delta-name of a rational point.
pub fn point_from_rational(space: &Arc<Euclid>, q: Vec<Q>) -> Name {
    point_name(space.clone(), q)
}

/// A Cauchy name `#w0#w1#...`: |x - w_i| < 2^-i, each w_i a tuple of rational codes.
#[derive(Clone)]
pub struct CauchyName {
    pub n: usize,
    pub stream: WordStream,
}

fn cauchy_segment(v: &[Q]) -> String {
    let parts: Vec<Word> = v.iter().map(rat_encode).collect();
    format!("#{}", tuple(&parts))
}

impl CauchyName {
    /// From a rule i -> w_i.
    pub fn from_fn(n: usize, f: impl Fn(u32) -> Vec<Q> + Send + Sync + 'static) -> Self {
        let f = Arc::new(f);
        CauchyName {
            n,
            stream: WordStream::new(move |b| {
                let mut s = String::new();
                let mut i = 0u32;
                while s.len() < b {
                    s.push_str(&cauchy_segment(&f(i)));
                    i += 1;
                }
                s.truncate(b);
                s
            }),
        }
    }

    /// The constant Cauchy name of a rational point.
    pub fn of_rational(q: Vec<Q>) -> Self {
        let n = q.len();
        CauchyName::from_fn(n, move |_| q.clone())
    }

    /// Complete approximants readable from the first `b` symbols, with the position at
    /// which each one is complete.
    pub fn approximants(&self, b: usize) -> Vec<(usize, Vec<Q>)> {
        let s = self.stream.prefix(b);
        let mut out = Vec::new();
        let mut start = match s.find('#') {
            Some(p) => p + 1,
            None => return out,
        };
        while let Some(off) = s[start..].find('#') {
            let seg = &s[start..start + off];
            let end = start + off;
            let Some(parts) = untuple_all(seg) else { break };
            let Ok(v) = parts
                .iter()
                .map(|p| rat_decode(p.as_str()))
                .collect::<Result<Vec<Q>>>()
            else {
                break;
            };
            if v.len() != self.n {
                break;
            }
            out.push((end, v));
            start = end + 1;
        }
        out
    }
}

/// rho to delta: the enclosure B(w_i, 2^-i) of each approximant drives the listing.
pub fn cauchy_to_delta(space: &Arc<Euclid>, c: &CauchyName) -> Name {
    let c = c.clone();
    let encl: EnclosureFn = Arc::new(move |b| {
        let mut cur: Option<IBox> = None;
        let mut out = Vec::new();
        for (i, (pos, v)) in c.approximants(b as usize).into_iter().enumerate() {
            let bx = box_ball(&v, &pow2_neg(i as u32));
            let next = match &cur {
                None => bx,
                Some(p) => box_intersect(p, &bx).unwrap_or_else(|| p.clone()),
            };
            cur = Some(next.clone());
            out.push((pos as u64, next));
        }
        out
    });
    enclosure_name(space.clone(), encl)
}

/// delta to rho: w_i is the center of the first listed ball of radius < 2^-(i+1).
pub fn delta_to_cauchy(n: usize, d: &Name) -> CauchyName {
    let d = d.clone();
    let gen = move |b: usize| -> String {
        let mut nb = 64u64;
        let cap = (b as u64).saturating_mul(b as u64).max(4096);
        let mut s = String::new();
        loop {
            s.clear();
            let words = d.query(nb);
            let balls: Vec<RationalBall> = words
                .iter()
                .filter_map(|w| RationalBall::decode(w.as_str(), Some(n)).ok())
                .collect();
            let mut i = 0u32;
            loop {
                let r = pow2_neg(i + 1);
                let Some(ball) = balls.iter().find(|x| x.radius < r) else {
                    break;
                };
                s.push_str(&cauchy_segment(&ball.center));
                i += 1;
                if s.len() > b {
                    break;
                }
            }
            if s.len() > b || nb >= cap {
                break;
            }
            nb = (nb * 4).min(cap);
        }
        s.truncate(b);
        s
    };
    CauchyName {
        n,
        stream: WordStream::new(gen),
    }
}

/// Interval enclosure of h(x) = x / (1 - |x|^2); None unless |x| < 1 is certified.
pub fn h_box(b: &[Interval]) -> Option<IBox> {
    let den = Interval::point(Q::one()).sub(&box_norm2(b));
    if !den.is_positive() {
        return None;
    }
    b.iter().map(|x| x.div(&den)).collect()
}

pub fn h_point(x: &[Q]) -> Option<Vec<Q>> {
    let den = Q::one() - norm2(x);
    den.is_positive()
        .then(|| x.iter().map(|c| c / &den).collect())
}

/// Interval enclosure of h^-1(y) = 2y / (1 + sqrt(1 + 4|y|^2)).
pub fn h_inv_box(b: &[Interval], k: u32) -> IBox {
    let s = box_norm2(b).scale(&qi(4)).add_q(&Q::one()).sqrt(k);
    let den = s.add_q(&Q::one());
    b.iter()
        .map(|y| y.scale(&qi(2)).div(&den).expect("positive"))
        .collect()
}

/// T_a(x) = x - a.
pub fn translate(a: &[Q], x: &[Q]) -> Vec<Q> {
    x.iter().zip(a).map(|(u, v)| u - v).collect()
}

/// S_e(x) = e x.
pub fn scale(e: &Q, x: &[Q]) -> Vec<Q> {
    x.iter().map(|u| u * e).collect()
}

/// h_w = h o S_{1/e} o T_q for w = B(q, e).
pub fn h_w_point(w: &RationalBall, x: &[Q]) -> Option<Vec<Q>> {
    h_point(&scale(&(Q::one() / &w.radius), &translate(&w.center, x)))
}

pub fn h_w_box(w: &RationalBall, b: &[Interval]) -> Option<IBox> {
    let inv = Q::one() / &w.radius;
    let t: IBox = b
        .iter()
        .zip(&w.center)
        .map(|(i, c)| i.add_q(&-c).scale(&inv))
        .collect();
    h_box(&t)
}

/// h_w^-1(y) = q + e h^-1(y).
pub fn h_w_inv_box(w: &RationalBall, b: &[Interval], k: u32) -> IBox {
    h_inv_box(b, k)
        .iter()
        .zip(&w.center)
        .map(|(i, c)| i.scale(&w.radius).add_q(c))
        .collect()
}

/// s_r(x, t) = x / (1 - r t) on the sphere minus the pole r e_{n+1}.
pub fn stereo_point(r: i8, x: &[Q]) -> Option<Vec<Q>> {
    let (t, head) = x.split_last()?;
    let den = Q::one() - qi(r as i64) * t;
    (!den.is_zero()).then(|| head.iter().map(|c| c / &den).collect())
}

pub fn stereo_box(r: i8, b: &[Interval]) -> Option<IBox> {
    let (t, head) = b.split_last()?;
    let den = t.scale(&qi(-(r as i64))).add_q(&Q::one());
    head.iter().map(|c| c.div(&den)).collect()
}

/// s_r^-1(y) = (2y, r(|y|^2 - 1)) / (|y|^2 + 1).
pub fn stereo_inv_point(r: i8, y: &[Q]) -> Vec<Q> {
    let n2 = norm2(y);
    let den = &n2 + Q::one();
    let mut out: Vec<Q> = y.iter().map(|c| c * qi(2) / &den).collect();
    out.push(qi(r as i64) * (n2 - Q::one()) / den);
    out
}

pub fn stereo_inv_box(r: i8, b: &[Interval]) -> IBox {
    // coordinatewise: 2y_i/(|y|^2+1) and r(1 - 2/(|y|^2+1))
    let n2 = box_norm2(b);
    let den = n2.add_q(&Q::one());
    let mut out: IBox = b
        .iter()
        .map(|y| y.scale(&qi(2)).div(&den).expect("positive"))
        .collect();
    let two_over = Interval::point(qi(2)).div(&den).expect("positive");
    let last = Interval::point(Q::one())
        .sub(&two_over)
        .scale(&qi(r as i64));
    out.push(last);
    tighten_unit(out)
}

/// Clip every coordinate to [-1, 1] (valid for points of the unit sphere).
fn tighten_unit(b: IBox) -> IBox {
    let one = Interval::new(qi(-1), qi(1));
    b.into_iter()
        .map(|i| i.intersect(&one).unwrap_or(i))
        .collect()
}

/// Box map with a precision argument for square roots.
pub type BoxMap = Arc<dyn Fn(&[Interval], u32) -> Option<IBox> + Send + Sync>;

/// Name transducer realizing a map given by interval evaluation of its closed form. The
/// precision requested grows with the step of the input enclosure.
pub fn box_map_translator(
    label: impl Into<String>,
    source: SpaceRef,
    target: SpaceRef,
    f: BoxMap,
) -> Translator {
    let t = target.clone();
    Translator::new(
        label,
        Discipline::Point,
        source.label(),
        Discipline::Point,
        target,
        move |n: &Name| {
            let n = n.clone();
            let f = f.clone();
            let encl: EnclosureFn = Arc::new(move |b| map_events(&n, b, f.as_ref()));
            enclosure_name(t.clone(), encl).producer().clone()
        },
    )
}

/// Image enclosures of a point name's enclosure events under a box map.
pub fn map_events(
    n: &Name,
    b: u64,
    f: &(dyn Fn(&[Interval], u32) -> Option<IBox> + Send + Sync),
) -> Vec<(u64, IBox)> {
    let mut out: Vec<(u64, IBox)> = Vec::new();
    for (t, e) in enclosure_events(n, b) {
        let k = 8 + neg_log2_floor(&box_width(&e)).unwrap_or(0).min(200);
        if let Some(img) = f(&e, k) {
            let next = match out.last() {
                None => img,
                Some((_, p)) => box_intersect(p, &img).unwrap_or(img),
            };
            out.push((t, next));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn ball_codec() {
        let b = RationalBall::new(vec![qi(0)], qi(1)).unwrap();
        assert_eq!(b.encode(), tuple(&["0/1", "1/1"]));
        assert!(RationalBall::decode(tuple(&["0/1", "-1/1"]).as_str(), None).is_err());
        let c = RationalBall::new(vec![q(1, 2), qi(0)], qi(2)).unwrap();
        assert_eq!(
            RationalBall::decode(c.encode().as_str(), Some(2)).unwrap(),
            c
        );
        assert_eq!(RationalBall::parse_literal(&c.literal()).unwrap(), c);
        assert_eq!(RationalBall::parse_literal("B(0;1)").unwrap(), b);
        assert_eq!(parse_point("0.25,-1").unwrap(), vec![q(1, 4), qi(-1)]);
        assert!(RationalBall::parse_literal("B(0;0)").is_err());
    }

    #[test]
    fn code_enumeration_decodes() {
        let e = Euclid { n: 2 };
        for k in 0..500 {
            assert!(e.in_dom(e.code(k).as_str()), "k={k}");
        }
        let g0 = e.grid_code(0);
        assert_eq!(g0.radius, qi(1));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(h_point(&[q(1, 2), qi(0)]).unwrap(), vec![q(2, 3), qi(0)]);
        let inv = h_inv_box(&[Interval::point(q(2, 3)), Interval::point(qi(0))], 30);
        assert!(inv[0].contains(&q(1, 2)));
        assert!(inv[0].width() < pow2_neg(25));
        assert_eq!(stereo_point(1, &[qi(0), qi(-1)]).unwrap(), vec![qi(0)]);
        assert_eq!(stereo_inv_point(1, &[qi(0)]), vec![qi(0), qi(-1)]);
        assert_eq!(stereo_point(1, &[qi(1), qi(0)]).unwrap(), vec![qi(1)]);
        assert_eq!(stereo_inv_point(1, &[qi(1)]), vec![qi(1), qi(0)]);
        assert_eq!(translate(&[qi(1)], &[q(1, 2)]), vec![q(-1, 2)]);
        assert_eq!(scale(&qi(2), &[q(3, 4)]), vec![q(3, 2)]);
        let w = RationalBall::new(vec![qi(0)], qi(1)).unwrap();
        assert_eq!(h_w_point(&w, &[q(1, 2)]).unwrap(), vec![q(2, 3)]);
    }
}
