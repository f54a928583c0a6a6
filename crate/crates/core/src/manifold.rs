//! Computable atlases and the manifold spaces they induce.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::decision::{ball_disjoint, ball_subset, enumerate_cwz};
use crate::enumerate::{unpair, unpair_n};
use crate::error::{Error, Result};
use crate::espace::{
    enclosure_name, enclosure_translator, induce_from_predicate, point_name,
    stamped_enclosure_events, EnclosureFn, Induced, PredicateSpace, Prepared, Space, SpaceRef,
};
use crate::euclid::{h_w_box, h_w_inv_box, h_w_point, Euclid, RationalBall};
use crate::interval::{
    box_inside_ball, box_intersect, box_mid, box_outside_ball, box_point, box_split, box_width,
    boxes_disjoint, IBox, Interval,
};
use crate::names::{dovetail, Discipline, Emitter, Name, SemiDecision, Stamped, Task, Translator};
use crate::rational::{neg_log2_floor, pow2, pow2_neg, round_dyadic, Q};
use crate::words::{fs_members, tuple, untuple, wrap, Word};

/// A chart (phi, U) of an n-manifold whose carrier sits in some ambient R^d.
pub trait Chart: Send + Sync {
    fn id(&self) -> Word;
    fn dim(&self) -> usize;
    /// Exact test x in U for a carrier point.
    fn in_domain(&self, x: &[Q]) -> bool;
    /// Exact phi(x) when it is rational; None off the domain or when not exact.
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>>;
    /// Enclosure of phi over the carrier part of the box; None unless that part is
    /// certified inside U.
    fn forward_box(&self, b: &[Interval], k: u32) -> Option<IBox>;
    /// Ambient enclosure of phi^-1 over the part of the box inside the image.
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox>;
    /// Exact phi^-1(y) when it is rational.
    fn backward(&self, _y: &[Q]) -> Option<Vec<Q>> {
        None
    }
    /// mu(w) inside phi(U), when decidable.
    fn image_contains_ball(&self, ball: &RationalBall) -> Option<bool>;
}

pub type ChartRef = Arc<dyn Chart>;

/// A countable family of charts with a decidable index set.
pub trait Atlas: Send + Sync {
    fn label(&self) -> String;
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    /// None when the index is not in I.
    fn chart(&self, id: &str) -> Option<ChartRef>;
    /// Enumeration of I; None for positions that do not name a chart.
    fn chart_id(&self, k: u64) -> Option<Word>;
    /// Number of charts of a finite atlas.
    fn chart_count(&self) -> Option<u64>;
    fn carrier_contains(&self, x: &[Q]) -> bool;
    fn is_hausdorff(&self) -> bool {
        true
    }
    /// Nonemptiness of computable balls is decidable through the charts.
    fn supports_nonempty(&self) -> bool {
        true
    }
    /// Charts worth consulting around a box: at most a few dozen.
    fn charts_near(&self, _b: &[Interval]) -> Vec<ChartRef> {
        let n = self.chart_count().unwrap_or(16).min(64);
        (0..n)
            .filter_map(|k| self.chart_id(k).and_then(|i| self.chart(i.as_str())))
            .collect()
    }
}

pub type AtlasRef = Arc<dyn Atlas>;

/// Membership of phi(x) in a ball, exact when phi(x) is rational and by enclosures
/// otherwise.
pub fn chart_ball_membership(chart: &dyn Chart, x: &[Q], ball: &RationalBall) -> Option<bool> {
    if let Some(y) = chart.forward(x) {
        return Some(ball.contains(&y));
    }
    let p = box_point(x);
    for k in [16u32, 32, 64, 128] {
        let fb = chart.forward_box(&p, k)?;
        if box_inside_ball(&fb, &ball.center, &ball.radius) {
            return Some(true);
        }
        if box_outside_ball(&fb, &ball.center, &ball.radius) {
            return Some(false);
        }
    }
    None
}

/// Splits a computable ball code <i, w>.
pub fn ball_code_parts(p: &str, n: usize) -> Option<(Word, RationalBall)> {
    let v = untuple(p, 2)?;
    let b = RationalBall::decode(v[1].as_str(), Some(n)).ok()?;
    Some((v[0].clone(), b))
}

pub fn ball_code(i: &str, w: &RationalBall) -> Word {
    tuple(&[Word::raw(i.to_string()), w.encode()])
}

/// Pieces of a ball in chart coordinates mapped back to ambient boxes.
fn ambient_pieces(chart: &dyn Chart, ball: &RationalBall, effort: u32) -> Option<Vec<IBox>> {
    let mut pieces = vec![ball.bbox()];
    for _ in 0..effort {
        pieces = pieces.iter().flat_map(|p| box_split(p)).collect();
    }
    let mut out = Vec::new();
    for p in pieces {
        if box_outside_ball(&p, &ball.center, &ball.radius) {
            continue;
        }
        if let Some(a) = chart.backward_box(&p, 24) {
            out.push(a);
        } else {
            // the piece misses the image entirely
            continue;
        }
    }
    Some(out)
}

/// A decoded computable ball with lazily computed ambient enclosures.
struct Parsed {
    chart: ChartRef,
    ball: RationalBall,
    image: Option<bool>,
    ambient: OnceLock<Option<IBox>>,
    pieces: OnceLock<Option<Vec<IBox>>>,
}

impl Parsed {
    fn ambient(&self) -> Option<&IBox> {
        self.ambient
            .get_or_init(|| {
                if self.image != Some(true) {
                    return None;
                }
                self.chart.backward_box(&self.ball.bbox(), 24)
            })
            .as_ref()
    }

    fn pieces(&self, effort: u32) -> Option<Vec<IBox>> {
        if effort == 1 {
            return self
                .pieces
                .get_or_init(|| ambient_pieces(self.chart.as_ref(), &self.ball, 1))
                .clone();
        }
        ambient_pieces(self.chart.as_ref(), &self.ball, effort)
    }
}

const CACHE_LIMIT: usize = 1 << 16;

/// The predicate space Z_Phi of computable balls <i, w>.
pub struct AtlasPredicates {
    atlas: AtlasRef,
    euclid: Euclid,
    cache: Mutex<HashMap<String, Option<Arc<Parsed>>>>,
}

impl AtlasPredicates {
    pub fn new(atlas: AtlasRef) -> Self {
        let n = atlas.dim();
        AtlasPredicates {
            atlas,
            euclid: Euclid { n },
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn atlas(&self) -> &AtlasRef {
        &self.atlas
    }

    fn parsed(&self, p: &str) -> Option<Arc<Parsed>> {
        if let Some(hit) = self.cache.lock().expect("cache").get(p) {
            return hit.clone();
        }
        let v = ball_code_parts(p, self.atlas.dim()).and_then(|(i, ball)| {
            let chart = self.atlas.chart(i.as_str())?;
            let image = chart.image_contains_ball(&ball);
            Some(Arc::new(Parsed {
                chart,
                ball,
                image,
                ambient: OnceLock::new(),
                pieces: OnceLock::new(),
            }))
        });
        let mut c = self.cache.lock().expect("cache");
        if c.len() >= CACHE_LIMIT {
            c.clear();
        }
        c.insert(p.to_string(), v.clone());
        v
    }

    /// The computable ball is nonempty: its chart exists and the ball lies in the image.
    pub fn nonempty(&self, p: &str) -> Option<bool> {
        match self.parsed(p) {
            None => Some(false),
            Some(q) => q.image,
        }
    }

    fn chart_words(&self, chart: &dyn Chart, balls: Vec<Word>) -> Vec<Word> {
        balls
            .into_iter()
            .filter_map(|w| {
                let b = self.euclid.ball(w.as_str())?;
                (chart.image_contains_ball(&b) == Some(true))
                    .then(|| ball_code(chart.id().as_str(), &b))
            })
            .collect()
    }
}

impl PredicateSpace for AtlasPredicates {
    fn label(&self) -> String {
        self.atlas.label()
    }
    fn ambient_dim(&self) -> usize {
        self.atlas.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        ball_code_parts(w, self.atlas.dim()).is_some()
    }
    fn code(&self, k: u64) -> Word {
        let (a, j) = unpair(k);
        let a = match self.atlas.chart_count() {
            Some(c) if c > 0 => a % c,
            _ => a,
        };
        let i = self
            .atlas
            .chart_id(a)
            .unwrap_or_else(|| Word::raw("0".to_string()));
        let b = self.euclid.code_ball(j);
        ball_code(i.as_str(), &b)
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.atlas.carrier_contains(x)
    }
    fn contains(&self, p: &str, x: &[Q]) -> Option<bool> {
        let Some(q) = self.parsed(p) else {
            return Some(false);
        };
        match q.image {
            Some(false) => return Some(false),
            None => return None,
            Some(true) => {}
        }
        if !q.chart.in_domain(x) {
            return Some(false);
        }
        chart_ball_membership(q.chart.as_ref(), x, &q.ball)
    }
    fn word_box(&self, p: &str) -> Option<IBox> {
        self.parsed(p)?.ambient().cloned()
    }
    fn box_inside(&self, bx: &[Interval], p: &str) -> bool {
        let Some(q) = self.parsed(p) else {
            return false;
        };
        if q.image != Some(true) {
            return false;
        }
        q.chart
            .forward_box(bx, 24)
            .is_some_and(|fb| box_inside_ball(&fb, &q.ball.center, &q.ball.radius))
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let mut out = Vec::new();
        for chart in self.atlas.charts_near(&box_point(x)) {
            if !chart.in_domain(x) {
                continue;
            }
            let balls = match chart.forward(x) {
                Some(y) => self.euclid.witnesses(&y, level),
                None => match chart.forward_box(&box_point(x), level + 8) {
                    Some(fb) => self.euclid.box_witnesses(&fb, level),
                    None => continue,
                },
            };
            out.extend(self.chart_words(chart.as_ref(), balls));
        }
        out
    }
    fn box_witnesses(&self, bx: &[Interval], level: u32) -> Vec<Word> {
        let mut out = Vec::new();
        for chart in self.atlas.charts_near(bx) {
            if let Some(fb) = chart.forward_box(bx, level + 8) {
                let balls = self.euclid.box_witnesses(&fb, level);
                out.extend(self.chart_words(chart.as_ref(), balls));
            }
        }
        out
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        let (Some(pu), Some(pv)) = (self.parsed(u), self.parsed(v)) else {
            return self.nonempty(u) == Some(false);
        };
        if pu.image == Some(false) {
            return true;
        }
        if pv.image != Some(true) {
            return false;
        }
        if pu.chart.id() == pv.chart.id() {
            return ball_subset(&pu.ball, &pv.ball);
        }
        match pu.ambient() {
            Some(a) => pv
                .chart
                .forward_box(a, 24)
                .is_some_and(|fb| box_inside_ball(&fb, &pv.ball.center, &pv.ball.radius)),
            None => false,
        }
    }
    fn is_hausdorff(&self) -> bool {
        self.atlas.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        let (Some(pu), Some(pv)) = (self.parsed(u), self.parsed(v)) else {
            return true;
        };
        parsed_disjoint(&pu, &pv, effort)
    }
    fn prepare(&self, w: &str) -> Prepared {
        match self.parsed(w) {
            Some(p) => p,
            None => Arc::new(()),
        }
    }
    fn disjoint_prepared(&self, u: &Prepared, v: &Prepared, effort: u32) -> bool {
        match (u.downcast_ref::<Parsed>(), v.downcast_ref::<Parsed>()) {
            (Some(a), Some(b)) => parsed_disjoint(a, b, effort),
            _ => true,
        }
    }
}

fn parsed_disjoint(pu: &Parsed, pv: &Parsed, effort: u32) -> bool {
    if pu.image == Some(false) || pv.image == Some(false) {
        return true;
    }
    if pu.chart.id() == pv.chart.id() {
        return ball_disjoint(&pu.ball, &pv.ball);
    }
    if let (Some(a), Some(b)) = (pu.ambient(), pv.ambient()) {
        if boxes_disjoint(a, b) {
            return true;
        }
    }
    let (Some(au), Some(av)) = (pu.pieces(effort), pv.pieces(effort)) else {
        return false;
    };
    // pieces of u either miss every piece of v or land outside the ball of v
    au.iter().all(|a| {
        av.iter().all(|b| boxes_disjoint(a, b))
            || pv
                .chart
                .forward_box(a, 24)
                .is_some_and(|fb| box_outside_ball(&fb, &pv.ball.center, &pv.ball.radius))
    })
}

/// A manifold with its atlas, predicate space and induced computable space.
#[derive(Clone)]
pub struct Manifold {
    pub atlas: AtlasRef,
    pub preds: Arc<dyn PredicateSpace>,
    pub space: Arc<Induced>,
    /// Predicate words are plain computable balls <i, w> of `atlas`.
    pub standard: bool,
}

impl Manifold {
    pub fn space_ref(&self) -> SpaceRef {
        self.space.clone()
    }

    pub fn dim(&self) -> usize {
        self.atlas.dim()
    }

    pub fn label(&self) -> String {
        self.atlas.label()
    }

    /// delta-name of a carrier point given by ambient coordinates.
    pub fn point(&self, x: Vec<Q>) -> Name {
        point_name(self.space_ref(), x)
    }

    /// Intersection code of computable balls.
    pub fn code(&self, balls: &[(Word, RationalBall)]) -> Word {
        let members: Vec<Word> = balls
            .iter()
            .map(|(i, b)| ball_code(i.as_str(), b))
            .collect();
        tuple(&members)
    }
}

/// The computable space T_Phi(M) induced by an atlas.
pub fn induced_space(atlas: AtlasRef) -> Manifold {
    let preds: Arc<dyn PredicateSpace> = Arc::new(AtlasPredicates::new(atlas.clone()));
    let space = induce_from_predicate(preds.clone());
    Manifold {
        atlas,
        preds,
        space,
        standard: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

fn merge(a: Vec<Stamped>, b: Vec<Stamped>) -> Vec<Stamped> {
    let mut all: Vec<Stamped> = a.into_iter().chain(b).collect();
    all.sort_by_key(|s| s.step);
    let mut em = Emitter::new();
    for s in all {
        em.emit(s.step, s.word);
    }
    em.finish()
}

/// Evaluation of chart i on point names, in either direction.
pub fn chart_eval(m: &Manifold, id: &str, direction: Direction) -> Result<Translator> {
    let chart = m
        .atlas
        .chart(id)
        .ok_or_else(|| Error::InvalidCode(format!("no chart {id:?}")))?;
    let euclid: SpaceRef = Arc::new(Euclid { n: m.dim() });
    Ok(match direction {
        Direction::Forward => chart_forward(m, chart, euclid),
        Direction::Backward => chart_backward(m, chart, euclid),
    })
}

fn chart_forward(m: &Manifold, chart: ChartRef, euclid: SpaceRef) -> Translator {
    let standard = m.standard;
    let n = m.dim();
    let target = euclid.clone();
    Translator::new(
        format!("chart {} forward", chart.id()),
        Discipline::Point,
        m.space.label(),
        Discipline::Point,
        euclid,
        move |p: &Name| {
            let p = p.clone();
            let chart = chart.clone();
            let target = target.clone();
            Arc::new(move |b| {
                let listed = Arc::new(p.stamped(b));
                let mut direct = Emitter::new();
                if standard {
                    let id = chart.id();
                    for e in listed.iter() {
                        for mbr in fs_members(e.word.as_str()) {
                            if let Some((i, ball)) = ball_code_parts(mbr.as_str(), n) {
                                if i == id && chart.image_contains_ball(&ball) == Some(true) {
                                    direct.emit(e.step, ball.encode());
                                }
                            }
                        }
                    }
                }
                let c2 = chart.clone();
                let sp = p.space().clone();
                let encl: EnclosureFn = Arc::new(move |bb| {
                    let mut out: Vec<(u64, IBox)> = Vec::new();
                    let upto: Vec<Stamped> =
                        listed.iter().filter(|e| e.step < bb).cloned().collect();
                    for (t, e) in stamped_enclosure_events(sp.as_ref(), &upto) {
                        let k = precision_for(&e);
                        if let Some(img) = c2.forward_box(&e, k) {
                            let next = match out.last() {
                                None => img,
                                Some((_, prev)) => box_intersect(prev, &img).unwrap_or(img),
                            };
                            out.push((t, next));
                        }
                    }
                    out
                });
                let via = enclosure_name(target.clone(), encl).stamped(b);
                merge(direct.finish(), via)
            })
        },
    )
}

fn precision_for(e: &[Interval]) -> u32 {
    8 + neg_log2_floor(&box_width(e)).unwrap_or(0).min(400)
}

fn chart_backward(m: &Manifold, chart: ChartRef, euclid: SpaceRef) -> Translator {
    let standard = m.standard;
    let n = m.dim();
    let target: SpaceRef = m.space.clone();
    let t2 = target.clone();
    Translator::new(
        format!("chart {} backward", chart.id()),
        Discipline::Point,
        euclid.label(),
        Discipline::Point,
        target,
        move |y: &Name| {
            let y = y.clone();
            let chart = chart.clone();
            let t2 = t2.clone();
            Arc::new(move |b| {
                let listed = Arc::new(y.stamped(b));
                let mut direct = Emitter::new();
                if standard {
                    for e in listed.iter() {
                        if let Ok(ball) = RationalBall::decode(e.word.as_str(), Some(n)) {
                            if chart.image_contains_ball(&ball) == Some(true) {
                                direct.emit(
                                    e.step,
                                    wrap(ball_code(chart.id().as_str(), &ball).as_str()),
                                );
                            }
                        }
                    }
                }
                let c2 = chart.clone();
                let sp = y.space().clone();
                let encl: EnclosureFn = Arc::new(move |bb| {
                    let mut out: Vec<(u64, IBox)> = Vec::new();
                    let upto: Vec<Stamped> =
                        listed.iter().filter(|e| e.step < bb).cloned().collect();
                    for (t, e) in stamped_enclosure_events(sp.as_ref(), &upto) {
                        let k = precision_for(&e);
                        if let Some(img) = c2.backward_box(&e, k) {
                            let next = match out.last() {
                                None => img,
                                Some((_, prev)) => box_intersect(prev, &img).unwrap_or(img),
                            };
                            out.push((t, next));
                        }
                    }
                    out
                });
                let via = enclosure_name(t2.clone(), encl).stamped(b);
                merge(direct.finish(), via)
            })
        },
    )
}

/// Transition phi_j o phi_i^-1 on point names of R^n.
pub fn transition(m: &Manifold, i: &str, j: &str) -> Result<Translator> {
    let back = chart_eval(m, i, Direction::Backward)?;
    let fwd = chart_eval(m, j, Direction::Forward)?;
    back.then(&fwd)
}

/// Outcome of checking translators between two structures on sampled points.
#[derive(Debug, Clone, Default)]
pub struct CompatReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks a translator on sampled carrier points: every translated word must contain the
/// point (exactly) and some word of scale below 2^-4 must appear by the budget.
pub fn check_translator(
    t: &Translator,
    source: &SpaceRef,
    samples: &[Vec<Q>],
    budget: u64,
    report: &mut CompatReport,
) {
    let target = t.target_space.clone();
    for x in samples {
        report.checked += 1;
        let name = point_name(source.clone(), x.clone());
        let out = match t.apply(&name) {
            Ok(o) => o,
            Err(e) => {
                report.failures.push(format!("{}: {e}", t.label));
                return;
            }
        };
        let words = out.query(budget);
        for w in &words {
            if target.contains(w.as_str(), x) != Some(true) {
                report
                    .failures
                    .push(format!("{}: unsound word {w} for {x:?}", t.label));
                break;
            }
        }
        let fine = words
            .iter()
            .filter_map(|w| target.word_box(w.as_str()))
            .any(|bx| box_width(&bx) < pow2_neg(4));
        if !fine {
            report
                .failures
                .push(format!("{}: incomplete listing for {x:?}", t.label));
        }
    }
}

/// Checks translators both ways between two structures on the same carrier.
pub fn compatibility_certificate(
    a: &SpaceRef,
    b: &SpaceRef,
    t_ab: &Translator,
    t_ba: &Translator,
    samples: &[Vec<Q>],
    budget: u64,
) -> CompatReport {
    let mut report = CompatReport::default();
    check_translator(t_ab, a, samples, budget, &mut report);
    check_translator(t_ba, b, samples, budget, &mut report);
    report
}

/// Translators in both directions driven by ambient enclosures.
pub fn enclosure_translators(a: &SpaceRef, b: &SpaceRef) -> (Translator, Translator) {
    (
        enclosure_translator(a.label(), b.clone()),
        enclosure_translator(b.label(), a.clone()),
    )
}

/// Product of two predicate spaces: words <<i, j>, <w, z>> for <i, w> and <j, z>.
pub struct ProductPredicates {
    a: Arc<dyn PredicateSpace>,
    b: Arc<dyn PredicateSpace>,
}

impl ProductPredicates {
    pub fn new(a: Arc<dyn PredicateSpace>, b: Arc<dyn PredicateSpace>) -> Self {
        ProductPredicates { a, b }
    }

    fn split(w: &str) -> Option<(Word, Word)> {
        let v = untuple(w, 2)?;
        let idx = untuple(v[0].as_str(), 2)?;
        let pay = untuple(v[1].as_str(), 2)?;
        Some((tuple(&[&idx[0], &pay[0]]), tuple(&[&idx[1], &pay[1]])))
    }

    fn join(u: &str, v: &str) -> Option<Word> {
        let a = untuple(u, 2)?;
        let b = untuple(v, 2)?;
        Some(tuple(&[tuple(&[&a[0], &b[0]]), tuple(&[&a[1], &b[1]])]))
    }

    fn da(&self) -> usize {
        self.a.ambient_dim()
    }
}

impl PredicateSpace for ProductPredicates {
    fn label(&self) -> String {
        format!("({} x {})", self.a.label(), self.b.label())
    }
    fn ambient_dim(&self) -> usize {
        self.a.ambient_dim() + self.b.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        ProductPredicates::split(w)
            .is_some_and(|(u, v)| self.a.in_dom(u.as_str()) && self.b.in_dom(v.as_str()))
    }
    fn code(&self, k: u64) -> Word {
        let (i, j) = unpair(k);
        ProductPredicates::join(self.a.code(i).as_str(), self.b.code(j).as_str())
            .expect("pair codes")
    }
    fn is_point(&self, x: &[Q]) -> bool {
        x.len() == self.ambient_dim()
            && self.a.is_point(&x[..self.da()])
            && self.b.is_point(&x[self.da()..])
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        let Some((u, v)) = ProductPredicates::split(w) else {
            return Some(false);
        };
        match (
            self.a.contains(u.as_str(), &x[..self.da()]),
            self.b.contains(v.as_str(), &x[self.da()..]),
        ) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        let (u, v) = ProductPredicates::split(w)?;
        let mut bx = self.a.word_box(u.as_str())?;
        bx.extend(self.b.word_box(v.as_str())?);
        Some(bx)
    }
    fn box_inside(&self, bx: &[Interval], w: &str) -> bool {
        let Some((u, v)) = ProductPredicates::split(w) else {
            return false;
        };
        self.a.box_inside(&bx[..self.da()], u.as_str())
            && self.b.box_inside(&bx[self.da()..], v.as_str())
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let wa = self.a.witnesses(&x[..self.da()], level);
        let wb = self.b.witnesses(&x[self.da()..], level);
        wa.iter()
            .flat_map(|u| {
                wb.iter()
                    .filter_map(move |v| ProductPredicates::join(u.as_str(), v.as_str()))
            })
            .collect()
    }
    fn box_witnesses(&self, bx: &[Interval], level: u32) -> Vec<Word> {
        let wa = self.a.box_witnesses(&bx[..self.da()], level);
        let wb = self.b.box_witnesses(&bx[self.da()..], level);
        wa.iter()
            .flat_map(|u| {
                wb.iter()
                    .filter_map(move |v| ProductPredicates::join(u.as_str(), v.as_str()))
            })
            .collect()
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        match (ProductPredicates::split(u), ProductPredicates::split(v)) {
            (Some((u1, u2)), Some((v1, v2))) => {
                self.a.subset(u1.as_str(), v1.as_str()) && self.b.subset(u2.as_str(), v2.as_str())
            }
            _ => false,
        }
    }
    fn is_hausdorff(&self) -> bool {
        self.a.is_hausdorff() && self.b.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        match (ProductPredicates::split(u), ProductPredicates::split(v)) {
            (Some((u1, u2)), Some((v1, v2))) => {
                self.a.disjoint(u1.as_str(), v1.as_str(), effort)
                    || self.b.disjoint(u2.as_str(), v2.as_str(), effort)
            }
            _ => false,
        }
    }
}

/// Chart <i, j> of a product atlas: (x1, x2) -> (phi_i(x1), psi_j(x2)).
pub struct ProductChart {
    a: ChartRef,
    b: ChartRef,
    da: usize,
}

impl Chart for ProductChart {
    fn id(&self) -> Word {
        tuple(&[self.a.id(), self.b.id()])
    }
    fn dim(&self) -> usize {
        self.a.dim() + self.b.dim()
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        self.a.in_domain(&x[..self.da]) && self.b.in_domain(&x[self.da..])
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        let mut y = self.a.forward(&x[..self.da])?;
        y.extend(self.b.forward(&x[self.da..])?);
        Some(y)
    }
    fn forward_box(&self, bx: &[Interval], k: u32) -> Option<IBox> {
        let mut y = self.a.forward_box(&bx[..self.da], k)?;
        y.extend(self.b.forward_box(&bx[self.da..], k)?);
        Some(y)
    }
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox> {
        let na = self.a.dim();
        let mut x = self.a.backward_box(&y[..na], k)?;
        x.extend(self.b.backward_box(&y[na..], k)?);
        Some(x)
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        let na = self.a.dim();
        let mut x = self.a.backward(&y[..na])?;
        x.extend(self.b.backward(&y[na..])?);
        Some(x)
    }
    fn image_contains_ball(&self, ball: &RationalBall) -> Option<bool> {
        // a ball lies in a product of open sets iff each projection does
        let na = self.a.dim();
        let p1 = RationalBall {
            center: ball.center[..na].to_vec(),
            radius: ball.radius.clone(),
        };
        let p2 = RationalBall {
            center: ball.center[na..].to_vec(),
            radius: ball.radius.clone(),
        };
        match (
            self.a.image_contains_ball(&p1),
            self.b.image_contains_ball(&p2),
        ) {
            (Some(true), Some(true)) => Some(true),
            (Some(false), _) | (_, Some(false)) => Some(false),
            _ => None,
        }
    }
}

/// Charts <i, j> with flattened images in R^(n+m).
pub struct ProductAtlas {
    a: AtlasRef,
    b: AtlasRef,
}

impl Atlas for ProductAtlas {
    fn label(&self) -> String {
        format!("({} x {})", self.a.label(), self.b.label())
    }
    fn dim(&self) -> usize {
        self.a.dim() + self.b.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.a.ambient_dim() + self.b.ambient_dim()
    }
    fn chart(&self, id: &str) -> Option<ChartRef> {
        let v = untuple(id, 2)?;
        Some(Arc::new(ProductChart {
            a: self.a.chart(v[0].as_str())?,
            b: self.b.chart(v[1].as_str())?,
            da: self.a.ambient_dim(),
        }))
    }
    fn chart_id(&self, k: u64) -> Option<Word> {
        let (i, j) = match (self.a.chart_count(), self.b.chart_count()) {
            (Some(_), Some(cb)) => (k / cb, k % cb),
            _ => unpair(k),
        };
        Some(tuple(&[self.a.chart_id(i)?, self.b.chart_id(j)?]))
    }
    fn chart_count(&self) -> Option<u64> {
        Some(self.a.chart_count()? * self.b.chart_count()?)
    }
    fn carrier_contains(&self, x: &[Q]) -> bool {
        let da = self.a.ambient_dim();
        x.len() == self.ambient_dim()
            && self.a.carrier_contains(&x[..da])
            && self.b.carrier_contains(&x[da..])
    }
    fn is_hausdorff(&self) -> bool {
        self.a.is_hausdorff() && self.b.is_hausdorff()
    }
}

/// Product manifold: predicates are pairs of computable balls, charts are flattened pairs.
pub fn product_manifold(m1: &Manifold, m2: &Manifold) -> Manifold {
    let atlas: AtlasRef = Arc::new(ProductAtlas {
        a: m1.atlas.clone(),
        b: m2.atlas.clone(),
    });
    let preds: Arc<dyn PredicateSpace> =
        Arc::new(ProductPredicates::new(m1.preds.clone(), m2.preds.clone()));
    let space = induce_from_predicate(preds.clone());
    Manifold {
        atlas,
        preds,
        space,
        standard: false,
    }
}

/// Point name of (x1, x2) on a product manifold from names of the factors.
pub fn product_point(m: &Manifold, x1: &Name, x2: &Name) -> Name {
    let (a, b) = (x1.clone(), x2.clone());
    Name::new(Discipline::Point, m.space_ref(), move |budget| {
        let xs = a.stamped(budget);
        let ys = b.stamped(budget);
        let mut em = Emitter::new();
        for x in &xs {
            for y in &ys {
                let (mx, my) = (fs_members(x.word.as_str()), fs_members(y.word.as_str()));
                let mut members = Vec::new();
                for u in &mx {
                    for v in &my {
                        if let Some(w) = ProductPredicates::join(u.as_str(), v.as_str()) {
                            members.push(w);
                        }
                    }
                }
                if !members.is_empty() {
                    em.emit(x.step.max(y.step), tuple(&members));
                }
            }
        }
        em.finish()
    })
}

/// Factor `which` of a product point name.
pub fn project_point(n: &Name, which: usize, factor: &Manifold) -> Name {
    let n = n.clone();
    Name::new(Discipline::Point, factor.space_ref(), move |budget| {
        let mut em = Emitter::new();
        for e in n.stamped(budget) {
            let parts: Option<Vec<Word>> = fs_members(e.word.as_str())
                .iter()
                .map(|m| {
                    ProductPredicates::split(m.as_str())
                        .map(|(u, v)| if which == 0 { u } else { v })
                })
                .collect();
            if let Some(p) = parts {
                em.emit(e.step, tuple(&p));
            }
        }
        em.finish()
    })
}

pub type PointMap = Box<dyn Fn(&[Q]) -> Option<Vec<Q>> + Send + Sync>;
pub type IntervalMap = Box<dyn Fn(&[Interval], u32) -> Option<IBox> + Send + Sync>;

/// A bijection between carriers given by exact point maps and interval box maps.
pub struct Bijection {
    pub label: String,
    pub ambient_out: usize,
    pub forward: PointMap,
    pub inverse: PointMap,
    pub forward_box: IntervalMap,
    pub inverse_box: IntervalMap,
}

struct PushChart {
    base: ChartRef,
    f: Arc<Bijection>,
}

impl Chart for PushChart {
    fn id(&self) -> Word {
        self.base.id()
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn in_domain(&self, y: &[Q]) -> bool {
        (self.f.inverse)(y).is_some_and(|x| self.base.in_domain(&x))
    }
    fn forward(&self, y: &[Q]) -> Option<Vec<Q>> {
        self.base.forward(&(self.f.inverse)(y)?)
    }
    fn forward_box(&self, b: &[Interval], k: u32) -> Option<IBox> {
        self.base.forward_box(&(self.f.inverse_box)(b, k)?, k)
    }
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox> {
        (self.f.forward_box)(&self.base.backward_box(y, k)?, k)
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        (self.f.forward)(&self.base.backward(y)?)
    }
    fn image_contains_ball(&self, ball: &RationalBall) -> Option<bool> {
        self.base.image_contains_ball(ball)
    }
}

/// Atlas psi_i = phi_i o f^-1 on f(U_i).
pub struct PushforwardAtlas {
    base: AtlasRef,
    f: Arc<Bijection>,
}

impl Atlas for PushforwardAtlas {
    fn label(&self) -> String {
        format!("{}({})", self.f.label, self.base.label())
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.f.ambient_out
    }
    fn chart(&self, id: &str) -> Option<ChartRef> {
        Some(Arc::new(PushChart {
            base: self.base.chart(id)?,
            f: self.f.clone(),
        }))
    }
    fn chart_id(&self, k: u64) -> Option<Word> {
        self.base.chart_id(k)
    }
    fn chart_count(&self) -> Option<u64> {
        self.base.chart_count()
    }
    fn carrier_contains(&self, y: &[Q]) -> bool {
        y.len() == self.f.ambient_out
            && (self.f.inverse)(y).is_some_and(|x| {
                self.base.carrier_contains(&x) && (self.f.forward)(&x).as_deref() == Some(y)
            })
    }
    fn is_hausdorff(&self) -> bool {
        self.base.is_hausdorff()
    }
    fn supports_nonempty(&self) -> bool {
        self.base.supports_nonempty()
    }
}

/// The structure carried over by a bijection: lambda_f(z) = f(lambda(z)).
pub fn pushforward_manifold(m: &Manifold, f: Bijection) -> Manifold {
    induced_space(Arc::new(PushforwardAtlas {
        base: m.atlas.clone(),
        f: Arc::new(f),
    }))
}

/// Predicate codes restricted to the nonempty computable balls; codes are kept as they
/// are, so the re-indexer is the identity on them.
pub struct PrunedPredicates {
    inner: Arc<AtlasPredicates>,
    fallback: OnceLock<Word>,
}

impl PrunedPredicates {
    fn nonempty(&self, w: &str) -> bool {
        self.inner.nonempty(w) == Some(true)
    }
}

impl PredicateSpace for PrunedPredicates {
    fn label(&self) -> String {
        format!("{}+", self.inner.label())
    }
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        self.inner.in_dom(w) && self.nonempty(w)
    }
    fn code(&self, k: u64) -> Word {
        let c = self.inner.code(k);
        if self.nonempty(c.as_str()) {
            return c;
        }
        self.fallback
            .get_or_init(|| {
                (0..)
                    .map(|j| self.inner.code(j))
                    .find(|c| self.nonempty(c.as_str()))
                    .expect("a nonempty computable ball")
            })
            .clone()
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.inner.is_point(x)
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        self.inner.contains(w, x)
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        self.inner.word_box(w)
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        self.inner.box_inside(b, w)
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        self.inner.witnesses(x, level)
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        self.inner.box_witnesses(b, level)
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        self.inner.subset(u, v)
    }
    fn is_hausdorff(&self) -> bool {
        self.inner.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        self.inner.disjoint(u, v, effort)
    }
}

/// Result of pruning empty computable balls.
pub struct Normalized {
    preds: Arc<AtlasPredicates>,
    pub manifold: Manifold,
    pub to_pruned: Translator,
    pub from_pruned: Translator,
}

impl Normalized {
    /// Predicate codes among the first `budget` of the enumeration whose ball is nonempty.
    pub fn nonempty_codes(&self, budget: u64) -> Vec<Word> {
        (0..budget)
            .map(|k| self.preds.code(k))
            .filter(|c| self.preds.nonempty(c.as_str()) == Some(true))
            .collect()
    }

    pub fn is_nonempty(&self, code: &str) -> bool {
        self.preds.nonempty(code) == Some(true)
    }
}

fn filter_translator(
    label: &str,
    source: &SpaceRef,
    target: SpaceRef,
    keep: Arc<dyn Fn(&str) -> bool + Send + Sync>,
) -> Translator {
    Translator::new(
        label,
        Discipline::Point,
        source.label(),
        Discipline::Point,
        target,
        move |n: &Name| {
            let n = n.clone();
            let keep = keep.clone();
            Arc::new(move |b| {
                n.stamped(b)
                    .into_iter()
                    .filter(|s| keep(s.word.as_str()))
                    .collect()
            })
        },
    )
}

/// Enumerator of nonempty computable balls and the pruned structure.
pub fn normalize_balls(m: &Manifold) -> Result<Normalized> {
    if !m.standard || !m.atlas.supports_nonempty() {
        return Err(Error::UnsupportedFamily(format!(
            "nonemptiness of balls of {}",
            m.label()
        )));
    }
    let preds = Arc::new(AtlasPredicates::new(m.atlas.clone()));
    let pruned: Arc<dyn PredicateSpace> = Arc::new(PrunedPredicates {
        inner: preds.clone(),
        fallback: OnceLock::new(),
    });
    let space = induce_from_predicate(pruned.clone());
    let manifold = Manifold {
        atlas: m.atlas.clone(),
        preds: pruned,
        space,
        standard: true,
    };
    let p2 = preds.clone();
    let keep: Arc<dyn Fn(&str) -> bool + Send + Sync> = Arc::new(move |w: &str| {
        fs_members(w)
            .iter()
            .all(|mb| p2.nonempty(mb.as_str()) == Some(true))
    });
    let to_pruned = filter_translator("prune", &m.space_ref(), manifold.space_ref(), keep);
    let from_pruned = filter_translator(
        "unprune",
        &manifold.space_ref(),
        m.space_ref(),
        Arc::new(|_: &str| true),
    );
    Ok(Normalized {
        preds,
        manifold,
        to_pruned,
        from_pruned,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineMode {
    /// Charts restricted to computable balls; images are rational balls.
    BallImage,
    /// Restricted charts composed with h_v; every image is R^n.
    FullSpace,
}

/// Chart <i, v>: phi_i restricted to phi_i^-1(mu(v)), optionally followed by h_v.
pub struct RefinedChart {
    base: ChartRef,
    v: RationalBall,
    full: bool,
}

impl RefinedChart {
    pub fn ball(&self) -> &RationalBall {
        &self.v
    }
}

impl Chart for RefinedChart {
    fn id(&self) -> Word {
        tuple(&[self.base.id(), self.v.encode()])
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        self.base.in_domain(x)
            && chart_ball_membership(self.base.as_ref(), x, &self.v) == Some(true)
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        let y = self.base.forward(x)?;
        if !self.v.contains(&y) {
            return None;
        }
        if self.full {
            h_w_point(&self.v, &y)
        } else {
            Some(y)
        }
    }
    fn forward_box(&self, b: &[Interval], k: u32) -> Option<IBox> {
        let fb = self.base.forward_box(b, k)?;
        if !box_inside_ball(&fb, &self.v.center, &self.v.radius) {
            return None;
        }
        if self.full {
            h_w_box(&self.v, &fb)
        } else {
            Some(fb)
        }
    }
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox> {
        let pre = if self.full {
            h_w_inv_box(&self.v, y, k)
        } else {
            box_intersect(y, &self.v.bbox())?
        };
        self.base.backward_box(&pre, k)
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        if self.full || !self.v.contains(y) {
            return None;
        }
        self.base.backward(y)
    }
    fn image_contains_ball(&self, ball: &RationalBall) -> Option<bool> {
        if self.full {
            Some(true)
        } else {
            Some(ball_subset(ball, &self.v))
        }
    }
}

/// The refined atlas of either mode.
pub struct RefinedAtlas {
    base: AtlasRef,
    full: bool,
    euclid: Euclid,
}

impl RefinedAtlas {
    pub fn refined_chart(&self, id: &str) -> Option<RefinedChart> {
        let (i, v) = ball_code_parts(id, self.base.dim())?;
        let base = self.base.chart(i.as_str())?;
        (base.image_contains_ball(&v) == Some(true)).then(|| RefinedChart {
            base,
            v,
            full: self.full,
        })
    }
}

impl Atlas for RefinedAtlas {
    fn label(&self) -> String {
        format!(
            "{}[{}]",
            self.base.label(),
            if self.full { "full" } else { "balls" }
        )
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }
    fn chart(&self, id: &str) -> Option<ChartRef> {
        self.refined_chart(id).map(|c| Arc::new(c) as ChartRef)
    }
    fn chart_id(&self, k: u64) -> Option<Word> {
        let (a, j) = unpair(k);
        let i = self.base.chart_id(a)?;
        let v = self.euclid.code_ball(j);
        let id = ball_code(i.as_str(), &v);
        self.refined_chart(id.as_str()).map(|_| id)
    }
    fn chart_count(&self) -> Option<u64> {
        None
    }
    fn carrier_contains(&self, x: &[Q]) -> bool {
        self.base.carrier_contains(x)
    }
    fn is_hausdorff(&self) -> bool {
        self.base.is_hausdorff()
    }
    fn charts_near(&self, b: &[Interval]) -> Vec<ChartRef> {
        let mut out: Vec<ChartRef> = Vec::new();
        for base in self.base.charts_near(b) {
            let Some(fb) = base.forward_box(b, 32) else {
                continue;
            };
            let w = box_width(&fb);
            let top = neg_log2_floor(&w).map_or(24, |k| k.min(24)) as i64;
            let mut found = 0;
            let mut level = top - 1;
            while level >= -2 && found < 2 {
                let (r, k) = if level >= 0 {
                    (pow2_neg(level as u32), level as u32 + 2)
                } else {
                    (pow2((-level) as u32), 2)
                };
                let c: Vec<Q> = box_mid(&fb).iter().map(|x| round_dyadic(x, k)).collect();
                let v = RationalBall {
                    center: c,
                    radius: r,
                };
                if box_inside_ball(&fb, &v.center, &v.radius)
                    && base.image_contains_ball(&v) == Some(true)
                {
                    out.push(Arc::new(RefinedChart {
                        base: base.clone(),
                        v,
                        full: self.full,
                    }));
                    found += 1;
                }
                level -= 1;
            }
        }
        out
    }
}

/// A refined structure with its translators.
pub struct Refined {
    pub manifold: Manifold,
    pub to_refined: Translator,
    pub from_refined: Translator,
    base: Manifold,
}

impl Refined {
    /// Open name, in the original structure, of the refined computable ball
    /// <<i, w>, z> (full-space mode): the balls <i, u> with u in C_wz.
    pub fn refined_ball_as_open(&self, code: &str) -> Result<Name> {
        let n = self.base.dim();
        let v = untuple(code, 2).ok_or_else(|| Error::InvalidCode(code.to_string()))?;
        let (i, w) = ball_code_parts(v[0].as_str(), n)
            .ok_or_else(|| Error::InvalidCode(code.to_string()))?;
        let z = RationalBall::decode(v[1].as_str(), Some(n))?;
        Ok(Name::new(
            Discipline::Open,
            self.base.space_ref(),
            move |b| {
                let mut em = Emitter::new();
                for k in 0..b {
                    if let Some(u) = enumerate_cwz(&w, &z, k) {
                        em.emit(k, wrap(ball_code(i.as_str(), &u).as_str()));
                    }
                }
                em.finish()
            },
        ))
    }
}

/// Refined atlas of either mode with enclosure-driven translators both ways.
pub fn refine_atlas(m: &Manifold, mode: RefineMode) -> Result<Refined> {
    if !m.standard {
        return Err(Error::UnsupportedFamily(format!(
            "refinement of {}",
            m.label()
        )));
    }
    if mode == RefineMode::FullSpace && !m.atlas.supports_nonempty() {
        return Err(Error::UnsupportedFamily(format!(
            "nonemptiness of balls of {}",
            m.label()
        )));
    }
    let atlas: AtlasRef = Arc::new(RefinedAtlas {
        base: m.atlas.clone(),
        full: mode == RefineMode::FullSpace,
        euclid: Euclid { n: m.dim() },
    });
    let manifold = induced_space(atlas);
    let (to_refined, from_refined) = enclosure_translators(&m.space_ref(), &manifold.space_ref());
    Ok(Refined {
        manifold,
        to_refined,
        from_refined,
        base: m.clone(),
    })
}

/// Predicates <<i, w>, f> of the open submanifold W: nu(w) & lambda(<i, f>) for words w
/// listed by the name of W and charts i of members of w.
pub struct OpenPredicates {
    base: Manifold,
    w: Name,
    check_budget: u64,
    listed: OnceLock<Vec<Word>>,
}

impl OpenPredicates {
    fn listed(&self) -> &Vec<Word> {
        self.listed.get_or_init(|| self.w.query(self.check_budget))
    }

    fn parts(&self, p: &str) -> Option<(Word, Word, Word)> {
        let v = untuple(p, 2)?;
        let c = untuple(v[0].as_str(), 2)?;
        Some((c[0].clone(), c[1].clone(), v[1].clone()))
    }

    fn charts_of(&self, wcode: &str) -> Vec<Word> {
        let mut out: Vec<Word> = fs_members(wcode)
            .iter()
            .filter_map(|m| untuple(m.as_str(), 2).map(|v| v[0].clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn valid(&self, i: &Word, wcode: &Word) -> bool {
        self.listed().contains(wcode) && self.charts_of(wcode.as_str()).contains(i)
    }

    fn word(i: &Word, wcode: &Word, f: &Word) -> Word {
        tuple(&[tuple(&[i, wcode]), f.clone()])
    }
}

impl PredicateSpace for OpenPredicates {
    fn label(&self) -> String {
        format!("{}|W", self.base.label())
    }
    fn ambient_dim(&self) -> usize {
        self.base.atlas.ambient_dim()
    }
    fn in_dom(&self, p: &str) -> bool {
        self.parts(p).is_some_and(|(i, w, f)| {
            self.base.space.in_dom(w.as_str()) && self.base.preds.in_dom(tuple(&[i, f]).as_str())
        })
    }
    fn code(&self, k: u64) -> Word {
        let v = unpair_n(k, 3);
        let pw = self.base.preds.code(v[0]);
        let pv = untuple(pw.as_str(), 2).expect("ball code");
        OpenPredicates::word(&pv[0], &self.base.space.code(v[1]), &pv[1])
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.base.atlas.carrier_contains(x)
    }
    fn contains(&self, p: &str, x: &[Q]) -> Option<bool> {
        let (i, w, f) = self.parts(p)?;
        if !self.valid(&i, &w) {
            return Some(false);
        }
        match (
            self.base.space.contains(w.as_str(), x),
            self.base.preds.contains(tuple(&[&i, &f]).as_str(), x),
        ) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
    fn word_box(&self, p: &str) -> Option<IBox> {
        let (i, w, f) = self.parts(p)?;
        let a = self.base.preds.word_box(tuple(&[&i, &f]).as_str());
        let b = self.base.space.word_box(w.as_str());
        match (a, b) {
            (Some(a), Some(b)) => Some(box_intersect(&a, &b).unwrap_or(a)),
            (a, b) => a.or(b),
        }
    }
    fn box_inside(&self, bx: &[Interval], p: &str) -> bool {
        let Some((i, w, f)) = self.parts(p) else {
            return false;
        };
        self.valid(&i, &w)
            && self.base.space.box_inside(bx, w.as_str())
            && self.base.preds.box_inside(bx, tuple(&[&i, &f]).as_str())
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let inner = self.base.preds.witnesses(x, level);
        let mut out = Vec::new();
        let hits = self
            .listed()
            .iter()
            .filter(|w| self.base.space.contains(w.as_str(), x) == Some(true))
            .take(4);
        for w in hits {
            let charts = self.charts_of(w.as_str());
            for p in &inner {
                if let Some(v) = untuple(p.as_str(), 2) {
                    if charts.contains(&v[0]) {
                        out.push(OpenPredicates::word(&v[0], w, &v[1]));
                    }
                }
            }
        }
        out
    }
    fn box_witnesses(&self, bx: &[Interval], level: u32) -> Vec<Word> {
        let inner = self.base.preds.box_witnesses(bx, level);
        let mut out = Vec::new();
        let hits = self
            .listed()
            .iter()
            .filter(|w| self.base.space.box_inside(bx, w.as_str()))
            .take(4);
        for w in hits {
            let charts = self.charts_of(w.as_str());
            for p in &inner {
                if let Some(v) = untuple(p.as_str(), 2) {
                    if charts.contains(&v[0]) {
                        out.push(OpenPredicates::word(&v[0], w, &v[1]));
                    }
                }
            }
        }
        out
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        let (Some((iu, wu, fu)), Some((iv, wv, fv))) = (self.parts(u), self.parts(v)) else {
            return false;
        };
        if !self.valid(&iv, &wv) {
            return false;
        }
        (wu == wv || self.base.space.subset(wu.as_str(), wv.as_str()))
            && self
                .base
                .preds
                .subset(tuple(&[&iu, &fu]).as_str(), tuple(&[&iv, &fv]).as_str())
    }
    fn is_hausdorff(&self) -> bool {
        self.base.preds.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        let (Some((iu, wu, fu)), Some((iv, wv, fv))) = (self.parts(u), self.parts(v)) else {
            return false;
        };
        self.base.preds.disjoint(
            tuple(&[&iu, &fu]).as_str(),
            tuple(&[&iv, &fv]).as_str(),
            effort,
        ) || self.base.space.disjoint(wu.as_str(), wv.as_str(), effort)
    }
}

/// An open submanifold with its restriction translators.
pub struct OpenSubmanifold {
    pub space: Arc<Induced>,
    pub preds: Arc<OpenPredicates>,
    pub restrict: Translator,
    pub include: Translator,
}

/// Budget up to which the name of W is read when interpreting chart indices.
pub const W_CHECK_BUDGET: u64 = 1 << 16;

/// Open submanifold W of m, given by an open name over m's space.
pub fn open_submanifold(m: &Manifold, w: &Name) -> Result<OpenSubmanifold> {
    if w.discipline() != Discipline::Open {
        return Err(Error::DisciplineMismatch {
            expected: Discipline::Open.to_string(),
            got: w.discipline().to_string(),
        });
    }
    if w.space().label() != m.space.label() {
        return Err(Error::SpaceMismatch {
            expected: m.space.label(),
            got: w.space().label(),
        });
    }
    let preds = Arc::new(OpenPredicates {
        base: m.clone(),
        w: w.clone(),
        check_budget: W_CHECK_BUDGET,
        listed: OnceLock::new(),
    });
    let space = induce_from_predicate(preds.clone());
    let restrict = restriction_translator(m, preds.clone(), space.clone());
    let include = inclusion_translator(m, space.clone());
    Ok(OpenSubmanifold {
        space,
        preds,
        restrict,
        include,
    })
}

/// The time-sharing machine: dovetails pairs (w listed by W, y listed by p) and, once x
/// is confirmed in nu(w), emits the intersection code of the restricted charts.
fn restriction_translator(
    m: &Manifold,
    preds: Arc<OpenPredicates>,
    target: Arc<Induced>,
) -> Translator {
    let base: SpaceRef = m.space_ref();
    Translator::new(
        "restrict",
        Discipline::Point,
        m.space.label(),
        Discipline::Point,
        target,
        move |p: &Name| {
            let p = p.clone();
            let preds = preds.clone();
            let base = base.clone();
            Arc::new(move |b| {
                let qs: Vec<Stamped> = preds.w.stamped(b.min(preds.check_budget));
                let ps = p.stamped(b);
                let pboxes: Vec<Option<IBox>> =
                    ps.iter().map(|u| base.word_box(u.word.as_str())).collect();
                // confirmation cost of task a: first word of p certified inside qs[a]
                let cost = |a: usize| -> Option<u64> {
                    let w = &qs[a].word;
                    let wb = base.word_box(w.as_str());
                    ps.iter()
                        .zip(&pboxes)
                        .find(|(u, ub)| {
                            if u.word == *w {
                                return true;
                            }
                            if let (Some(x), Some(y)) = (ub, &wb) {
                                if boxes_disjoint(x, y) {
                                    return false;
                                }
                            }
                            base.subset(u.word.as_str(), w.as_str())
                        })
                        .map(|(u, _)| u.step.max(qs[a].step))
                };
                let tasks = |k: u64| -> Option<Task> {
                    if k as usize >= qs.len() {
                        return None;
                    }
                    let cost = cost(k as usize);
                    Some(Box::new(move |share| match cost {
                        Some(c) if c < share => SemiDecision::Confirmed(c),
                        _ => SemiDecision::Unknown(share),
                    }))
                };
                let mut em = Emitter::new();
                let mut events: Vec<(u64, Word)> = Vec::new();
                for ev in dovetail(&tasks, b) {
                    let w = &qs[ev.task as usize].word;
                    let charts = preds.charts_of(w.as_str());
                    for y in &ps {
                        let mut members: Vec<Word> = Vec::new();
                        for mb in fs_members(w.as_str())
                            .iter()
                            .chain(fs_members(y.word.as_str()).iter())
                        {
                            if let Some(v) = untuple(mb.as_str(), 2) {
                                if charts.contains(&v[0]) {
                                    members.push(OpenPredicates::word(&v[0], w, &v[1]));
                                }
                            }
                        }
                        members.sort();
                        members.dedup();
                        events.push((ev.step.max(y.step), tuple(&members)));
                    }
                }
                events.sort_by_key(|e| e.0);
                for (t, w) in events {
                    em.emit(t, w);
                }
                em.finish()
            })
        },
    )
}

/// Code rewriting <<i, w>, f> -> members of w together with <i, f>.
fn inclusion_translator(m: &Manifold, source: Arc<Induced>) -> Translator {
    Translator::new(
        "include",
        Discipline::Point,
        source.label(),
        Discipline::Point,
        m.space_ref(),
        |p: &Name| {
            let p = p.clone();
            Arc::new(move |b| {
                let mut em = Emitter::new();
                for e in p.stamped(b) {
                    let mut members: Vec<Word> = Vec::new();
                    for mb in fs_members(e.word.as_str()) {
                        let Some(v) = untuple(mb.as_str(), 2) else {
                            continue;
                        };
                        let Some(c) = untuple(v[0].as_str(), 2) else {
                            continue;
                        };
                        members.extend(fs_members(c[1].as_str()));
                        members.push(tuple(&[&c[0], &v[1]]));
                    }
                    members.sort();
                    members.dedup();
                    em.emit(e.step, tuple(&members));
                }
                em.finish()
            })
        },
    )
}
