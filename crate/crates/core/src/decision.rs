//! Exact ball predicates and certified containment of ball images under fixed map
//! families.

use std::collections::VecDeque;

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::euclid::{h_w_box, h_w_point, stereo_box, stereo_point, RationalBall};
use crate::interval::{box_inside_ball, box_outside_ball, box_split, box_width, IBox, Interval};
use crate::rational::{dist2, pow2_neg, Q};

/// B(q1, e1) is a subset of B(q2, e2): |q1 - q2| <= e2 - e1.
pub fn ball_subset(inner: &RationalBall, outer: &RationalBall) -> bool {
    if inner.dim() != outer.dim() {
        return false;
    }
    let slack = &outer.radius - &inner.radius;
    if slack.is_negative() {
        return false;
    }
    dist2(&inner.center, &outer.center) <= &slack * &slack
}

/// Open balls are disjoint: |q1 - q2| >= e1 + e2.
pub fn ball_disjoint(u: &RationalBall, v: &RationalBall) -> bool {
    if u.dim() != v.dim() {
        return false;
    }
    let s = &u.radius + &v.radius;
    dist2(&u.center, &v.center) >= &s * &s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfChart {
    /// (x, y) -> x on y > 0.
    FPlus,
    /// (x, y) -> x on y < 0.
    FMinus,
    /// (x, y) -> y on x > 0.
    GPlus,
    /// (x, y) -> y on x < 0.
    GMinus,
}

impl HalfChart {
    pub const ALL: [HalfChart; 4] = [
        HalfChart::FPlus,
        HalfChart::FMinus,
        HalfChart::GPlus,
        HalfChart::GMinus,
    ];

    /// Index of the coordinate that must be nonzero, its required sign, and the output
    /// coordinate.
    pub fn parts(self) -> (usize, bool, usize) {
        match self {
            HalfChart::FPlus => (1, true, 0),
            HalfChart::FMinus => (1, false, 0),
            HalfChart::GPlus => (0, true, 1),
            HalfChart::GMinus => (0, false, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HalfChart::FPlus => "f+",
            HalfChart::FMinus => "f-",
            HalfChart::GPlus => "g+",
            HalfChart::GMinus => "g-",
        }
    }

    pub fn point(self, x: &[Q]) -> Option<Vec<Q>> {
        let (c, pos, o) = self.parts();
        let ok = if pos {
            x[c].is_positive()
        } else {
            x[c].is_negative()
        };
        ok.then(|| vec![x[o].clone()])
    }

    pub fn eval_box(self, b: &[Interval]) -> Option<IBox> {
        let (c, pos, o) = self.parts();
        let ok = if pos {
            b[c].is_positive()
        } else {
            b[c].is_negative()
        };
        ok.then(|| vec![b[o].clone()])
    }
}

/// Maps whose ball images can be certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapFamily {
    Identity,
    /// T_a(x) = x - a.
    Translation(Vec<Q>),
    /// S_e(x) = e x.
    Scaling(Q),
    /// h_w = h o S_{1/e} o T_q for w = B(q, e).
    BallToSpace(RationalBall),
    /// s_r(x, t) = x / (1 - r t).
    Stereographic(i8),
    CircleHalfChart(HalfChart),
    /// x -> (x_j / x_i)_{j != i} on x_i != 0.
    ProjectiveChart {
        i: usize,
        n: usize,
    },
    /// Applied left to right.
    Composition(Vec<MapFamily>),
}

impl MapFamily {
    /// Output dimension for an input of dimension d; None when inconsistent.
    pub fn out_dim(&self, d: usize) -> Option<usize> {
        match self {
            MapFamily::Identity | MapFamily::Scaling(_) => Some(d),
            MapFamily::Translation(a) => (a.len() == d).then_some(d),
            MapFamily::BallToSpace(w) => (w.dim() == d).then_some(d),
            MapFamily::Stereographic(r) => (d >= 2 && (*r == 1 || *r == -1)).then(|| d - 1),
            MapFamily::CircleHalfChart(_) => (d == 2).then_some(1),
            MapFamily::ProjectiveChart { i, n } => (d == n + 1 && i <= n).then_some(*n),
            MapFamily::Composition(ms) => ms.iter().try_fold(d, |acc, m| m.out_dim(acc)),
        }
    }

    /// Exact image of a rational point; None off the domain.
    pub fn eval_point(&self, x: &[Q]) -> Option<Vec<Q>> {
        match self {
            MapFamily::Identity => Some(x.to_vec()),
            MapFamily::Translation(a) => Some(x.iter().zip(a).map(|(u, v)| u - v).collect()),
            MapFamily::Scaling(e) => Some(x.iter().map(|u| u * e).collect()),
            MapFamily::BallToSpace(w) => h_w_point(w, x),
            MapFamily::Stereographic(r) => stereo_point(*r, x),
            MapFamily::CircleHalfChart(h) => h.point(x),
            MapFamily::ProjectiveChart { i, .. } => {
                let d = &x[*i];
                if d.is_zero() {
                    return None;
                }
                Some(
                    x.iter()
                        .enumerate()
                        .filter(|(j, _)| j != i)
                        .map(|(_, v)| v / d)
                        .collect(),
                )
            }
            MapFamily::Composition(ms) => {
                let mut cur = x.to_vec();
                for m in ms {
                    cur = m.eval_point(&cur)?;
                }
                Some(cur)
            }
        }
    }

    /// Exact image of a ball under the affine kinds (identity, translation, scaling and
    /// their compositions).
    pub fn affine_image(&self, b: &RationalBall) -> Option<RationalBall> {
        match self {
            MapFamily::Identity => Some(b.clone()),
            MapFamily::Translation(a) if a.len() == b.dim() => Some(RationalBall {
                center: b.center.iter().zip(a).map(|(u, v)| u - v).collect(),
                radius: b.radius.clone(),
            }),
            MapFamily::Scaling(e) if !e.is_zero() => Some(RationalBall {
                center: b.center.iter().map(|u| u * e).collect(),
                radius: &b.radius * e.abs(),
            }),
            MapFamily::Composition(ms) => {
                ms.iter().try_fold(b.clone(), |acc, m| m.affine_image(&acc))
            }
            _ => None,
        }
    }

    /// Interval image of a box; None unless the box is certified inside the domain.
    pub fn eval_box(&self, b: &[Interval]) -> Option<IBox> {
        match self {
            MapFamily::Identity => Some(b.to_vec()),
            MapFamily::Translation(a) => Some(b.iter().zip(a).map(|(i, v)| i.add_q(&-v)).collect()),
            MapFamily::Scaling(e) => Some(b.iter().map(|i| i.scale(e)).collect()),
            MapFamily::BallToSpace(w) => h_w_box(w, b),
            MapFamily::Stereographic(r) => stereo_box(*r, b),
            MapFamily::CircleHalfChart(h) => h.eval_box(b),
            MapFamily::ProjectiveChart { i, .. } => {
                let d = &b[*i];
                b.iter()
                    .enumerate()
                    .filter(|(j, _)| j != i)
                    .map(|(_, v)| v.div(d))
                    .collect()
            }
            MapFamily::Composition(ms) => {
                let mut cur = b.to_vec();
                for m in ms {
                    cur = m.eval_box(&cur)?;
                }
                Some(cur)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    ImageInside,
    ImageDisjoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainmentQuery {
    pub source: RationalBall,
    pub map: MapFamily,
    pub target: RationalBall,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Containment {
    Holds,
    /// A point of the open source ball violating the relation.
    Fails {
        witness: Vec<Q>,
    },
    Unknown,
}

impl Containment {
    pub fn is_definite(&self) -> bool {
        !matches!(self, Containment::Unknown)
    }
}

pub fn default_gap() -> Q {
    pow2_neg(20)
}

fn clamp_to_box(c: &[Q], b: &[Interval]) -> Vec<Q> {
    c.iter()
        .zip(b)
        .map(|(x, i)| {
            if x < &i.lo {
                i.lo.clone()
            } else if x > &i.hi {
                i.hi.clone()
            } else {
                x.clone()
            }
        })
        .collect()
}

/// Points of the box worth testing as counterexamples, all inside the open source ball.
fn candidates(src: &RationalBall, b: &[Interval]) -> Vec<Vec<Q>> {
    let mid: Vec<Q> = b.iter().map(|i| i.mid()).collect();
    let clamp = clamp_to_box(&src.center, b);
    let pulled: Vec<Q> = clamp
        .iter()
        .zip(&src.center)
        .map(|(p, c)| c + (p - c) * (Q::one() - pow2_neg(24)))
        .collect();
    [mid, clamp, pulled]
        .into_iter()
        .filter(|p| src.contains(p))
        .collect()
}

fn violates(q: &ContainmentQuery, p: &[Q]) -> bool {
    match q.map.eval_point(p) {
        None => q.relation == Relation::ImageInside,
        Some(y) => match q.relation {
            Relation::ImageInside => !q.target.contains(&y),
            Relation::ImageDisjoint => q.target.contains(&y),
        },
    }
}

fn check_dims(q: &ContainmentQuery) -> Result<()> {
    let d = q.source.dim();
    match q.map.out_dim(d) {
        Some(m) if m == q.target.dim() => Ok(()),
        _ => Err(Error::UnsupportedMapFamily(format!(
            "{:?} on dimension {d}",
            q.map
        ))),
    }
}

/// Decides the query. Affine kinds are answered exactly from the image ball; every other
/// kind goes through [`branch_and_bound`].
pub fn image_containment(q: &ContainmentQuery, gap: &Q, budget: u64) -> Result<Containment> {
    check_dims(q)?;
    if let Some(img) = q.map.affine_image(&q.source) {
        let holds = match q.relation {
            Relation::ImageInside => ball_subset(&img, &q.target),
            Relation::ImageDisjoint => ball_disjoint(&img, &q.target),
        };
        if holds {
            return Ok(Containment::Holds);
        }
        let witness = affine_witness(q, &img);
        return Ok(match witness {
            Some(w) => Containment::Fails { witness: w },
            None => branch_and_bound(q, gap, budget)?,
        });
    }
    branch_and_bound(q, gap, budget)
}

/// A source point whose image violates the relation, found along the line through the
/// two centers.
fn affine_witness(q: &ContainmentQuery, img: &RationalBall) -> Option<Vec<Q>> {
    for k in 1..40u32 {
        let t = Q::one() - pow2_neg(k);
        for sign in [1i64, -1] {
            // candidate image point: image center pushed toward or away from the target
            let dir: Vec<Q> = img
                .center
                .iter()
                .zip(&q.target.center)
                .map(|(a, b)| a - b)
                .collect();
            let dn = crate::rational::norm2(&dir);
            let unit_bound = if dn.is_zero() { None } else { Some(dn) };
            let offset: Vec<Q> = match &unit_bound {
                None => {
                    let mut v = vec![Q::zero(); img.dim()];
                    v[0] = img.radius.clone() * &t * Q::from_integer(sign.into());
                    v
                }
                Some(dn) => {
                    let (lo, _) = crate::rational::sqrt_bounds(dn, 40);
                    if lo.is_zero() {
                        continue;
                    }
                    dir.iter()
                        .map(|a| a * &img.radius * &t * Q::from_integer(sign.into()) / &lo)
                        .collect()
                }
            };
            let y: Vec<Q> = img.center.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if !img.contains(&y) {
                continue;
            }
            let Some(x) = invert_affine(&q.map, &y) else {
                continue;
            };
            if q.source.contains(&x) && violates(q, &x) {
                return Some(x);
            }
        }
    }
    let x = q.source.center.clone();
    violates(q, &x).then_some(x)
}

fn invert_affine(m: &MapFamily, y: &[Q]) -> Option<Vec<Q>> {
    match m {
        MapFamily::Identity => Some(y.to_vec()),
        MapFamily::Translation(a) => Some(y.iter().zip(a).map(|(u, v)| u + v).collect()),
        MapFamily::Scaling(e) => (!e.is_zero()).then(|| y.iter().map(|u| u / e).collect()),
        MapFamily::Composition(ms) => ms
            .iter()
            .rev()
            .try_fold(y.to_vec(), |acc, m| invert_affine(m, &acc)),
        _ => None,
    }
}

/// Certified branch and bound over the closed source ball. Each box evaluation costs one
/// unit of budget; boxes narrower than `gap` are not split further.
pub fn branch_and_bound(q: &ContainmentQuery, gap: &Q, budget: u64) -> Result<Containment> {
    check_dims(q)?;
    let (c, r) = (&q.source.center, &q.source.radius);
    let mut queue: VecDeque<IBox> = VecDeque::new();
    queue.push_back(q.source.bbox());
    let mut unresolved = false;
    let mut spent = 0u64;
    while let Some(b) = queue.pop_front() {
        if !box_outside_ball_closed(&b, c, r) {
            if spent >= budget {
                return Ok(Containment::Unknown);
            }
            spent += 1;
            let img = q.map.eval_box(&b);
            let settled = match (&img, q.relation) {
                (Some(i), Relation::ImageInside) => {
                    box_inside_ball(i, &q.target.center, &q.target.radius)
                }
                (Some(i), Relation::ImageDisjoint) => {
                    box_outside_ball(i, &q.target.center, &q.target.radius)
                }
                (None, _) => false,
            };
            if settled {
                continue;
            }
            for p in candidates(&q.source, &b) {
                if violates(q, &p) {
                    return Ok(Containment::Fails { witness: p });
                }
            }
            if box_width(&b) < *gap {
                unresolved = true;
                continue;
            }
            queue.extend(box_split(&b));
        }
    }
    Ok(if unresolved {
        Containment::Unknown
    } else {
        Containment::Holds
    })
}

/// The box misses the closed ball.
fn box_outside_ball_closed(b: &[Interval], c: &[Q], r: &Q) -> bool {
    crate::interval::box_near2(b, c) > r * r
}

/// The k-th candidate of the enumeration of C_wz = { v : mu(v) inside h_w^-1(mu(z)) }:
/// ball code index and budget exponent are dovetailed, and the candidate is returned only
/// when its containment is certified.
pub fn enumerate_cwz(w: &RationalBall, z: &RationalBall, k: u64) -> Option<RationalBall> {
    let e = crate::euclid::Euclid { n: w.dim() };
    let (j, i) = crate::enumerate::unpair(k);
    let v = if j % 2 == 0 {
        e.grid_code(j / 2)
    } else {
        e.generic_code(j / 2)
    };
    if !ball_subset(&v, w) {
        return None;
    }
    let query = ContainmentQuery {
        source: v.clone(),
        map: MapFamily::BallToSpace(w.clone()),
        target: z.clone(),
        relation: Relation::ImageInside,
    };
    let budget = 16u64 << i.min(16);
    matches!(
        image_containment(&query, &pow2_neg(8 + i.min(24) as u32), budget),
        Ok(Containment::Holds)
    )
    .then_some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn ball(c: &[Q], r: Q) -> RationalBall {
        RationalBall::new(c.to_vec(), r).unwrap()
    }

    #[test]
    fn subset_examples() {
        assert!(ball_subset(&ball(&[qi(0)], qi(1)), &ball(&[qi(0)], qi(2))));
        assert!(ball_subset(
            &ball(&[qi(1), qi(0)], qi(1)),
            &ball(&[qi(0), qi(0)], qi(2))
        ));
        assert!(!ball_subset(&ball(&[qi(3)], qi(1)), &ball(&[qi(0)], qi(2))));
    }

    #[test]
    fn disjoint_examples() {
        assert!(ball_disjoint(
            &ball(&[qi(0)], qi(1)),
            &ball(&[qi(2)], qi(1))
        ));
        assert!(!ball_disjoint(
            &ball(&[qi(0)], qi(1)),
            &ball(&[qi(1)], qi(1))
        ));
        assert!(!ball_disjoint(
            &ball(&[qi(0)], qi(1)),
            &ball(&[qi(0)], qi(1))
        ));
    }

    #[test]
    fn h_image_examples() {
        let w = ball(&[qi(0)], qi(1));
        let mk = |t: RationalBall| ContainmentQuery {
            source: ball(&[qi(0)], q(1, 2)),
            map: MapFamily::BallToSpace(w.clone()),
            target: t,
            relation: Relation::ImageInside,
        };
        let r = image_containment(&mk(ball(&[qi(0)], qi(1))), &default_gap(), 10_000).unwrap();
        assert_eq!(r, Containment::Holds);
        let r = image_containment(&mk(ball(&[qi(0)], q(1, 2))), &default_gap(), 10_000).unwrap();
        match r {
            Containment::Fails { witness } => {
                let x = &witness[0];
                assert!(x.abs() > q(3, 8) && x.abs() < q(1, 2));
            }
            other => panic!("{other:?}"),
        }
        let id = ContainmentQuery {
            source: w.clone(),
            map: MapFamily::Identity,
            target: w.clone(),
            relation: Relation::ImageInside,
        };
        assert_eq!(
            image_containment(&id, &default_gap(), 1).unwrap(),
            Containment::Holds
        );
    }

    #[test]
    fn dimension_errors() {
        let qy = ContainmentQuery {
            source: ball(&[qi(0)], qi(1)),
            map: MapFamily::CircleHalfChart(HalfChart::FPlus),
            target: ball(&[qi(0)], qi(1)),
            relation: Relation::ImageInside,
        };
        assert!(image_containment(&qy, &default_gap(), 10).is_err());
    }
}
