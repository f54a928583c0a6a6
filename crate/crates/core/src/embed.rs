//! Collapse maps onto spheres and the product embedding of a compact manifold.

use std::sync::{Arc, Mutex};

use num::{One, Zero};

use crate::decision::ball_subset;
use crate::error::{Error, Result};
use crate::espace::{
    compact_complement, enclosure_events, enclosure_name, subspace, EnclosureFn, Prepared, Space,
    SpaceRef, UnitSphere,
};
use crate::euclid::{
    euclidean_space, h_w_box, h_w_inv_box, h_w_point, stereo_box, stereo_inv_box, stereo_inv_point,
    Euclid, RationalBall,
};
use crate::interval::{
    box_contains, box_inside_ball, box_intersect, box_mid, box_outside_ball, box_split, box_width,
    IBox,
};
use crate::manifold::{ball_code, chart_ball_membership, ChartRef, Manifold};
use crate::names::{Discipline, Emitter, Name, Stamped, Translator};
use crate::rational::{neg_log2_floor, pow2_neg, qi, Q};
use crate::words::{tuple, wrap, Word};

/// The pole P = (0, ..., 0, 1) of S^n.
pub fn pole(n: usize) -> Vec<Q> {
    let mut p = vec![Q::zero(); n + 1];
    p[n] = Q::one();
    p
}

/// S^n as a subspace of R^(n+1).
pub fn sphere_space(n: usize) -> SpaceRef {
    subspace(euclidean_space(n + 1), Arc::new(UnitSphere))
}

/// A rational u < 1 such that |y - c| >= u r puts s^-1(h_z(y)) within eps of the pole.
///
/// |s^-1(t) - P|^2 = 4 / (|t|^2 + 1) and |h_z(y)| = u / (1 - u^2) with u = |y - c| / r.
pub fn pole_threshold(eps: &Q) -> Q {
    let t0 = qi(4) / (eps * eps) - Q::one();
    let mut j = 1u32;
    loop {
        let u = Q::one() - pow2_neg(j);
        let d = Q::one() - &u * &u;
        if &u * &u > &t0 * &d * &d {
            return u;
        }
        j += 1;
    }
}

/// g = s^-1 o h_z o phi on U = phi^-1(mu(z)), and the pole P elsewhere.
#[derive(Clone)]
pub struct CollapseMap {
    pub manifold: Manifold,
    pub chart: ChartRef,
    pub z: RationalBall,
    pub n: usize,
    sphere: SpaceRef,
    covers: Arc<Mutex<Vec<Option<Prepared>>>>,
}

impl CollapseMap {
    pub fn new(m: &Manifold, chart_id: &str, z: RationalBall) -> Result<Self> {
        if !m.standard {
            return Err(Error::UnsupportedFamily(format!(
                "collapse maps on {}",
                m.label()
            )));
        }
        let chart = m
            .atlas
            .chart(chart_id)
            .ok_or_else(|| Error::InvalidCode(format!("no chart {chart_id:?}")))?;
        if z.dim() != m.dim() || chart.image_contains_ball(&z) != Some(true) {
            return Err(Error::Precondition(format!(
                "{} is not inside the image of chart {chart_id}",
                z.literal()
            )));
        }
        Ok(CollapseMap {
            manifold: m.clone(),
            chart,
            z,
            n: m.dim(),
            sphere: sphere_space(m.dim()),
            covers: Arc::new(Mutex::new(Vec::new())),
        })
    }

    pub fn pole(&self) -> Vec<Q> {
        pole(self.n)
    }

    pub fn sphere(&self) -> &SpaceRef {
        &self.sphere
    }

    /// Exact test x in U for rational carrier points.
    pub fn in_u(&self, x: &[Q]) -> bool {
        self.chart.in_domain(x)
            && chart_ball_membership(self.chart.as_ref(), x, &self.z) == Some(true)
    }

    /// g(x) for a rational point with an exact chart value.
    pub fn closed_form(&self, x: &[Q]) -> Option<Vec<Q>> {
        if !self.in_u(x) {
            return Some(self.pole());
        }
        let y = self.chart.forward(x)?;
        Some(stereo_inv_point(1, &h_w_point(&self.z, &y)?))
    }

    /// Enclosure of g over a box certified inside U.
    pub fn inside_box(&self, e: &[crate::interval::Interval], k: u32) -> Option<IBox> {
        let fb = self.chart.forward_box(e, k)?;
        if !box_inside_ball(&fb, &self.z.center, &self.z.radius) {
            return None;
        }
        Some(stereo_inv_box(1, &h_w_box(&self.z, &fb)?))
    }

    /// Chart ball outside of which g stays within eps of the pole.
    pub fn pole_cover(&self, eps: &Q) -> RationalBall {
        RationalBall {
            center: self.z.center.clone(),
            radius: &self.z.radius * pole_threshold(eps),
        }
    }

    fn cover_word(&self, m: u32) -> Prepared {
        let mut c = self.covers.lock().expect("cover cache");
        while c.len() <= m as usize {
            c.push(None);
        }
        c[m as usize]
            .get_or_insert_with(|| {
                let ball = self.pole_cover(&pow2_neg(m));
                self.manifold
                    .space
                    .prepare(wrap(ball_code(self.chart.id().as_str(), &ball).as_str()).as_str())
            })
            .clone()
    }

    /// Names of g(x): enclosures through the chart while x is certified in U, and caps
    /// around the pole once x is certified off the compact part of U that g keeps away
    /// from the pole.
    pub fn transducer(&self) -> Translator {
        let me = self.clone();
        Translator::new(
            format!("collapse {}", self.chart.id()),
            Discipline::Point,
            self.manifold.space.label(),
            Discipline::Point,
            self.sphere.clone(),
            move |x: &Name| {
                let me = me.clone();
                let x = x.clone();
                Arc::new(move |b| me.name_events(&x, b))
            },
        )
    }

    fn inside_events(&self, x: &Name, b: u64) -> Vec<(u64, IBox)> {
        let mut out: Vec<(u64, IBox)> = Vec::new();
        for (t, e) in enclosure_events(x, b) {
            let k = 8 + neg_log2_floor(&box_width(&e)).unwrap_or(0).min(400);
            if let Some(img) = self.inside_box(&e, k) {
                let next = match out.last() {
                    None => img,
                    Some((_, p)) => box_intersect(p, &img).unwrap_or(img),
                };
                out.push((t, next));
            }
        }
        out
    }

    /// Steps at which x is certified to map within 2^-m of the pole.
    fn pole_events(&self, x: &Name, b: u64) -> Vec<(u64, u32)> {
        let words = x.stamped(b);
        let sp = self.manifold.space.clone();
        let prepared: Vec<(u64, Prepared)> = words
            .iter()
            .map(|w| (w.step, sp.prepare(w.word.as_str())))
            .collect();
        let mut out = Vec::new();
        let mut m = 1u32;
        while (m as u64) * (m as u64) < b {
            let cover = self.cover_word(m);
            if let Some((t, _)) = prepared
                .iter()
                .find(|(_, p)| sp.disjoint_prepared(p, &cover, 2))
            {
                out.push(((*t).max((m as u64) * (m as u64)), m));
            } else {
                break;
            }
            m += 1;
        }
        out
    }

    fn name_events(&self, x: &Name, b: u64) -> Vec<Stamped> {
        let me = self.clone();
        let x2 = x.clone();
        let encl: EnclosureFn = Arc::new(move |bb| me.inside_events(&x2, bb));
        let inside = enclosure_name(self.sphere.clone(), encl).stamped(b);
        let mut all = inside;
        for (t, m) in self.pole_events(x, b) {
            let cap = RationalBall {
                center: self.pole(),
                radius: pow2_neg(m),
            };
            all.push(Stamped {
                step: t,
                word: cap.encode(),
            });
        }
        all.sort_by_key(|s| s.step);
        let mut em = Emitter::new();
        for s in all {
            em.emit(s.step, s.word);
        }
        em.finish()
    }

    /// Enclosures of g(x) from both branches, as (step, box) events.
    pub fn enclosure_events(&self, x: &Name, b: u64) -> Vec<(u64, IBox)> {
        let mut ev = self.inside_events(x, b);
        for (t, m) in self.pole_events(x, b) {
            let cap = RationalBall {
                center: self.pole(),
                radius: pow2_neg(m),
            };
            ev.push((t, cap.bbox()));
        }
        ev.sort_by_key(|e| e.0);
        let mut out: Vec<(u64, IBox)> = Vec::new();
        for (t, e) in ev {
            let next = match out.last() {
                None => e,
                Some((_, p)) => box_intersect(p, &e).unwrap_or(e),
            };
            out.push((t, next));
        }
        out
    }

    /// Open name of g^-1(V) for a ball V of R^(n+1).
    pub fn collapse_preimage(&self, v: &RationalBall) -> Result<Name> {
        if v.dim() != self.n + 1 {
            return Err(Error::Precondition(format!(
                "{} is not a ball of R^{}",
                v.literal(),
                self.n + 1
            )));
        }
        if v.contains(&self.pole()) {
            let k = self.compact_part(v)?;
            Ok(compact_complement(&k)?.with_discipline(Discipline::Open))
        } else {
            Ok(self.direct_preimage(v))
        }
    }

    /// Covering name of K' = g^-1(S^n - V) for V containing the pole.
    pub fn compact_part(&self, v: &RationalBall) -> Result<Name> {
        let p = self.pole();
        let m = (0..64u32)
            .find(|m| {
                ball_subset(
                    &RationalBall {
                        center: p.clone(),
                        radius: pow2_neg(*m),
                    },
                    v,
                )
            })
            .ok_or_else(|| Error::Precondition("the pole is too close to the boundary".into()))?;
        let outer = self.pole_cover(&pow2_neg(m));
        let mut todo: Vec<(IBox, u32)> = vec![(outer.bbox(), 0)];
        let mut keep: Vec<RationalBall> = Vec::new();
        let e = Euclid { n: self.n };
        while let Some((bx, depth)) = todo.pop() {
            if box_outside_ball(&bx, &outer.center, &outer.radius) {
                continue;
            }
            if let Some(h) = h_w_box(&self.z, &bx) {
                let s = stereo_inv_box(1, &h);
                if box_inside_ball(&s, &v.center, &v.radius) {
                    continue;
                }
            }
            if depth >= 6 {
                if let Some(c) = e.covering_ball(&bx, 64) {
                    if ball_subset(&c, &self.z) {
                        keep.push(c);
                        continue;
                    }
                }
                if depth >= 40 {
                    return Err(Error::Precondition("cover did not converge".into()));
                }
            }
            for piece in box_split(&bx) {
                todo.push((piece, depth + 1));
            }
        }
        let words: Vec<Word> = keep
            .iter()
            .map(|c| wrap(ball_code(self.chart.id().as_str(), c).as_str()))
            .collect();
        Ok(Name::finite(
            Discipline::Compact,
            self.manifold.space_ref(),
            vec![tuple(&words)],
        ))
    }

    fn direct_preimage(&self, v: &RationalBall) -> Name {
        let me = self.clone();
        let v = v.clone();
        let e = Euclid { n: self.n };
        Name::new(Discipline::Open, self.manifold.space_ref(), move |b| {
            let mut em = Emitter::new();
            for t in 0..b {
                let ball = e.code_ball(t);
                if !ball_subset(&ball, &me.z) {
                    continue;
                }
                let Some(h) = h_w_box(&me.z, &ball.bbox()) else {
                    continue;
                };
                if box_inside_ball(&stereo_inv_box(1, &h), &v.center, &v.radius) {
                    em.emit(t, wrap(ball_code(me.chart.id().as_str(), &ball).as_str()));
                }
            }
            em.finish()
        })
    }

    /// Ambient enclosure of g^-1 over a sphere box that excludes the pole.
    pub fn inverse_box(&self, y: &[crate::interval::Interval], k: u32) -> Option<IBox> {
        if box_contains(y, &self.pole()) {
            return None;
        }
        let t = stereo_box(1, y)?;
        self.chart.backward_box(&h_w_inv_box(&self.z, &t, k), k)
    }
}

/// G = (g_1, ..., g_l) into R^(l(n+1)).
#[derive(Clone)]
pub struct Embedding {
    pub manifold: Manifold,
    pub components: Vec<CollapseMap>,
    pub n: usize,
    target: Arc<Euclid>,
}

/// The embedding of a compact manifold given by finitely many charts with ball images
/// covering it.
pub fn embed_compact(m: &Manifold, charts: &[(Word, RationalBall)]) -> Result<Embedding> {
    if !m.atlas.is_hausdorff() {
        return Err(Error::Precondition(format!(
            "{} has no Hausdorff witnesses",
            m.label()
        )));
    }
    if charts.is_empty() {
        return Err(Error::Precondition("no charts".into()));
    }
    let components = charts
        .iter()
        .map(|(i, z)| CollapseMap::new(m, i.as_str(), z.clone()))
        .collect::<Result<Vec<_>>>()?;
    let n = m.dim();
    Ok(Embedding {
        manifold: m.clone(),
        target: euclidean_space(components.len() * (n + 1)),
        components,
        n,
    })
}

/// The four half charts of S^1, each with image B(0, 1).
pub fn circle_ball_charts() -> Vec<(Word, RationalBall)> {
    ["0", "1", "10", "11"]
        .iter()
        .map(|i| {
            (
                Word::new(*i).expect("chart index"),
                RationalBall {
                    center: vec![Q::zero()],
                    radius: Q::one(),
                },
            )
        })
        .collect()
}

impl Embedding {
    /// Dimension l(n+1) of the target.
    pub fn q(&self) -> usize {
        self.components.len() * (self.n + 1)
    }

    pub fn target(&self) -> SpaceRef {
        self.target.clone()
    }

    /// G(x) for a rational point with exact chart values.
    pub fn closed_form(&self, x: &[Q]) -> Option<Vec<Q>> {
        let mut out = Vec::new();
        for c in &self.components {
            out.extend(c.closed_form(x)?);
        }
        Some(out)
    }

    fn product_events(&self, x: &Name, b: u64) -> Vec<(u64, IBox)> {
        let mut ev: Vec<(u64, usize, IBox)> = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            ev.extend(c.enclosure_events(x, b).into_iter().map(|(t, e)| (t, i, e)));
        }
        ev.sort_by_key(|e| (e.0, e.1));
        let d = self.n + 1;
        let mut cur: Vec<Option<IBox>> = vec![None; self.components.len()];
        let mut out = Vec::new();
        for (t, i, e) in ev {
            cur[i] = Some(e);
            if cur.iter().all(|c| c.is_some()) {
                let bx: IBox = cur
                    .iter()
                    .flat_map(|c| c.clone().expect("all set"))
                    .collect();
                debug_assert_eq!(bx.len(), d * self.components.len());
                out.push((t, bx));
            }
        }
        out
    }

    /// G on point names.
    pub fn forward(&self) -> Translator {
        let me = self.clone();
        let target: SpaceRef = self.target.clone();
        let t2 = target.clone();
        Translator::new(
            "embedding",
            Discipline::Point,
            self.manifold.space.label(),
            Discipline::Point,
            target,
            move |x: &Name| {
                let e = me.clone();
                let x = x.clone();
                let encl: EnclosureFn = Arc::new(move |b| e.product_events(&x, b));
                enclosure_name(t2.clone(), encl).producer().clone()
            },
        )
    }

    /// G^-1 on names of points of the image: components certified away from the pole are
    /// pulled back through their charts.
    pub fn inverse(&self) -> Translator {
        let comps = self.components.clone();
        let d = self.n + 1;
        let m = self.manifold.clone();
        let target = m.space_ref();
        Translator::new(
            "embedding inverse",
            Discipline::Point,
            self.target.label(),
            Discipline::Point,
            target.clone(),
            move |y: &Name| {
                let comps = comps.clone();
                let y = y.clone();
                let encl: EnclosureFn = Arc::new(move |b| {
                    let mut out: Vec<(u64, IBox)> = Vec::new();
                    for (t, e) in enclosure_events(&y, b) {
                        let k = 8 + neg_log2_floor(&box_width(&e)).unwrap_or(0).min(400);
                        for (j, c) in comps.iter().enumerate() {
                            if let Some(img) = c.inverse_box(&e[j * d..(j + 1) * d], k) {
                                let next = match out.last() {
                                    None => img,
                                    Some((_, p)) => box_intersect(p, &img).unwrap_or(img),
                                };
                                out.push((t, next));
                            }
                        }
                    }
                    out
                });
                enclosure_name(target.clone(), encl).producer().clone()
            },
        )
    }
}

/// Midpoint of the enclosure of a name at a budget, for reporting.
pub fn enclosure_mid(n: &Name, b: u64) -> Option<Vec<Q>> {
    crate::espace::enclosure(n, b).map(|e| box_mid(&e))
}
