//! Computable topological spaces and the generic operations on their names.

use std::any::Any;
use std::sync::Arc;

use num::integer::Roots;
use num::{One, Signed};

use crate::enumerate::{unpair, unpair_n};
use crate::interval::{box_intersect, box_width, boxes_disjoint, IBox, Interval};
use crate::names::{Discipline, Emitter, Name, Stamped, Translator};
use crate::rational::{neg_log2_floor, pow2_neg, qi, Q};
use crate::words::{fs_in_dom, fs_members, rat_decode, rat_encode, tuple, untuple, wrap, Word};

/// A base notation with the semantic hooks the name machinery needs.
///
/// Points are handled through their ambient coordinates: a vector of rationals in some
/// fixed Euclidean space containing (an embedded copy of) the carrier.
pub trait Space: Send + Sync {
    fn label(&self) -> String;
    fn ambient_dim(&self) -> usize;
    /// Decider for the domain of the base notation.
    fn in_dom(&self, w: &str) -> bool;
    /// Total enumeration of the domain of the base notation.
    fn code(&self, k: u64) -> Word;
    /// The ambient point belongs to the carrier.
    fn is_point(&self, x: &[Q]) -> bool;
    /// Exact membership of a carrier point in a base set, when decidable.
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool>;
    /// Ambient box enclosing the base set; None when unbounded or unknown.
    fn word_box(&self, w: &str) -> Option<IBox>;
    /// Certified: every carrier point inside the box lies in the base set.
    fn box_inside(&self, b: &[Interval], w: &str) -> bool;
    /// Base sets containing x, of scale about 2^-level.
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word>;
    /// Base sets certified to contain the carrier part of the box, of scale at least 2^-level.
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word>;
    /// Certified inclusion of base sets.
    fn subset(&self, u: &str, v: &str) -> bool;
    /// The k-th candidate of the intersection witness enumeration for (u, v).
    fn refine(&self, u: &str, v: &str, k: u64) -> Option<Word>;
    fn is_hausdorff(&self) -> bool {
        false
    }
    /// Certified disjointness of base sets (the Hausdorff witness set).
    fn disjoint(&self, _u: &str, _v: &str, _effort: u32) -> bool {
        false
    }
    /// Decoded form of a word for repeated disjointness tests.
    fn prepare(&self, w: &str) -> Prepared {
        Arc::new(Word::raw(w.to_string()))
    }
    /// `disjoint` on prepared words.
    fn disjoint_prepared(&self, u: &Prepared, v: &Prepared, effort: u32) -> bool {
        match (u.downcast_ref::<Word>(), v.downcast_ref::<Word>()) {
            (Some(a), Some(b)) => self.disjoint(a.as_str(), b.as_str(), effort),
            _ => false,
        }
    }
}

pub type SpaceRef = Arc<dyn Space>;

/// A word decoded once by its space.
pub type Prepared = Arc<dyn Any + Send + Sync>;

/// Integer square root of a step counter: the scale level reached by that step.
pub fn level_at(step: u64) -> u32 {
    step.sqrt() as u32
}

/// Names a carrier point given by exact ambient coordinates.
///
/// At step s^2 the witnesses of level s are listed; at step s^2+1 four further codes of
/// the domain enumeration are tested for membership.
pub fn point_name(space: SpaceRef, x: Vec<Q>) -> Name {
    let sp = space.clone();
    Name::new(Discipline::Point, space, move |b| {
        let mut em = Emitter::new();
        let mut s = 0u64;
        while s * s < b {
            for w in sp.witnesses(&x, s as u32) {
                em.emit(s * s, w);
            }
            let t = s * s + 1;
            if t < b {
                for j in 0..4 {
                    let w = sp.code(4 * s + j);
                    if sp.contains(w.as_str(), &x) == Some(true) {
                        em.emit(t, w);
                    }
                }
            }
            s += 1;
        }
        em.finish()
    })
}

/// Stream of (step, ambient enclosure) pairs.
pub type EnclosureFn = Arc<dyn Fn(u64) -> Vec<(u64, IBox)> + Send + Sync>;

/// Names a point known through a stream of ambient enclosures.
pub fn enclosure_name(space: SpaceRef, encl: EnclosureFn) -> Name {
    let sp = space.clone();
    Name::new(Discipline::Point, space, move |b| {
        let events = encl(b);
        let mut em = Emitter::new();
        let mut tested_s = 0u64;
        for (t, e) in events {
            if t >= b {
                break;
            }
            let cap = 2 + level_at(t);
            for w in sp.box_witnesses(&e, cap) {
                em.emit(t, w);
            }
            while tested_s * tested_s <= t {
                for j in 0..4 {
                    let (k, _) = unpair(4 * tested_s + j);
                    let w = sp.code(k);
                    if sp.box_inside(&e, w.as_str()) {
                        em.emit(t, w);
                    }
                }
                tested_s += 1;
            }
        }
        em.finish()
    })
}

/// Intersection of the boxes of the given words.
pub fn words_enclosure(space: &dyn Space, words: &[Word]) -> Option<IBox> {
    let mut cur: Option<IBox> = None;
    for w in words {
        if let Some(bx) = space.word_box(w.as_str()) {
            cur = Some(match cur {
                None => bx,
                Some(c) => box_intersect(&c, &bx).unwrap_or(c),
            });
        }
    }
    cur
}

/// Ambient enclosure of the point named by a point name at this budget.
pub fn enclosure(n: &Name, budget: u64) -> Option<IBox> {
    words_enclosure(n.space().as_ref(), &n.query(budget))
}

/// Incremental enclosures of a point name: one event per listed word that shrinks the box.
pub fn enclosure_events(n: &Name, budget: u64) -> Vec<(u64, IBox)> {
    stamped_enclosure_events(n.space().as_ref(), &n.stamped(budget))
}

/// `enclosure_events` on an already computed listing.
pub fn stamped_enclosure_events(sp: &dyn Space, listed: &[Stamped]) -> Vec<(u64, IBox)> {
    let mut out = Vec::new();
    let mut cur: Option<IBox> = None;
    for e in listed {
        if let Some(bx) = sp.word_box(e.word.as_str()) {
            let next = match &cur {
                None => bx,
                Some(c) => box_intersect(c, &bx).unwrap_or_else(|| c.clone()),
            };
            if cur.as_ref() != Some(&next) {
                cur = Some(next.clone());
                out.push((e.step, next));
            }
        }
    }
    out
}

/// Smallest doubling budget at which the enclosure is narrower than 2^-k.
pub fn approximate(n: &Name, k: u32, max_budget: u64) -> Option<(IBox, u64)> {
    let target = pow2_neg(k);
    let mut b = 16u64;
    loop {
        if let Some(e) = enclosure(n, b) {
            if box_width(&e) < target {
                return Some((e, b));
            }
        }
        if b >= max_budget {
            return None;
        }
        b = (b * 2).min(max_budget);
    }
}

/// Re-expresses a point name in another space over the same ambient coordinates.
pub fn enclosure_translator(source_label: impl Into<String>, target: SpaceRef) -> Translator {
    let t = target.clone();
    Translator::new(
        "enclosure",
        Discipline::Point,
        source_label,
        Discipline::Point,
        target,
        move |n: &Name| {
            let n = n.clone();
            let encl: EnclosureFn = Arc::new(move |b| enclosure_events(&n, b));
            enclosure_name(t.clone(), encl).producer().clone()
        },
    )
}

/// The k-th triple of the intersection witness set S.
pub fn s_triple(space: &dyn Space, k: u64) -> Option<(Word, Word, Word)> {
    let v = unpair_n(k, 3);
    let u = space.code(v[0]);
    let w = space.code(v[1]);
    space
        .refine(u.as_str(), w.as_str(), v[2])
        .map(|r| (u, w, r))
}

fn intersect_two(space: SpaceRef, a: Name, b: Name, d: Discipline) -> Name {
    let sp = space.clone();
    Name::new(d, space, move |budget| {
        let xs = a.stamped(budget);
        let ys = b.stamped(budget);
        let mut em = Emitter::new();
        if xs.is_empty() || ys.is_empty() {
            return Vec::new();
        }
        for t in 0..budget {
            let v = unpair_n(t, 3);
            let (Some(x), Some(y)) = (xs.get(v[0] as usize), ys.get(v[1] as usize)) else {
                continue;
            };
            if x.step > t || y.step > t {
                continue;
            }
            if let Some(w) = sp.refine(x.word.as_str(), y.word.as_str(), v[2]) {
                em.emit(t, w);
            }
        }
        em.finish()
    })
}

/// Intersection of finitely many open names over one space.
pub fn finite_intersection(names: &[Name]) -> crate::Result<Name> {
    combine(names, Discipline::Open)
}

/// Union of finitely many closed names given by complements (intersection of the
/// complements).
pub fn finite_union_closed(names: &[Name]) -> crate::Result<Name> {
    combine(names, Discipline::ClosedNeg)
}

fn combine(names: &[Name], d: Discipline) -> crate::Result<Name> {
    let first = names
        .first()
        .ok_or_else(|| crate::Error::Precondition("no operands".into()))?;
    let space = first.space().clone();
    for n in names {
        if n.discipline() != d {
            return Err(crate::Error::DisciplineMismatch {
                expected: d.to_string(),
                got: n.discipline().to_string(),
            });
        }
        if n.space().label() != space.label() {
            return Err(crate::Error::SpaceMismatch {
                expected: space.label(),
                got: n.space().label(),
            });
        }
    }
    let mut acc = first.clone();
    for n in &names[1..] {
        acc = intersect_two(space.clone(), acc, n.clone(), d);
    }
    Ok(acc)
}

/// Union of finitely many compact names: covers are merged pairwise.
pub fn finite_union_compact(names: &[Name]) -> crate::Result<Name> {
    let first = names
        .first()
        .ok_or_else(|| crate::Error::Precondition("no operands".into()))?;
    for n in names {
        if n.discipline() != Discipline::Compact {
            return Err(crate::Error::DisciplineMismatch {
                expected: Discipline::Compact.to_string(),
                got: n.discipline().to_string(),
            });
        }
    }
    let mut acc = first.clone();
    for n in &names[1..] {
        let (a, b) = (acc.clone(), n.clone());
        acc = Name::new(Discipline::Compact, first.space().clone(), move |budget| {
            let xs = a.stamped(budget);
            let ys = b.stamped(budget);
            let mut em = Emitter::new();
            for x in &xs {
                for y in &ys {
                    em.emit(x.step.max(y.step), x.word.concat(&y.word));
                }
            }
            em.finish()
        });
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    Found { u: Word, v: Word, step: u64 },
    Unknown(u64),
}

/// Search the Hausdorff witnesses for a pair separating the two points. At most
/// `budget` pair tests are made, in order of the later of the two listing steps.
pub fn separate_points(x: &Name, y: &Name, budget: u64) -> Separation {
    let sp = x.space().clone();
    let xs = x.stamped(budget);
    let ys = y.stamped(budget);
    let px: Vec<Prepared> = xs.iter().map(|e| sp.prepare(e.word.as_str())).collect();
    let py: Vec<Prepared> = ys.iter().map(|e| sp.prepare(e.word.as_str())).collect();
    let mut merged: Vec<(u64, bool, usize)> = Vec::with_capacity(xs.len() + ys.len());
    merged.extend(xs.iter().enumerate().map(|(i, e)| (e.step, true, i)));
    merged.extend(ys.iter().enumerate().map(|(i, e)| (e.step, false, i)));
    merged.sort();
    let mut seen_x: Vec<usize> = Vec::new();
    let mut seen_y: Vec<usize> = Vec::new();
    let mut tests = 0u64;
    for (step, is_x, i) in merged {
        let others = if is_x { &seen_y } else { &seen_x };
        for &j in others {
            if tests >= budget {
                return Separation::Unknown(budget);
            }
            tests += 1;
            let (a, b) = if is_x { (i, j) } else { (j, i) };
            if sp.disjoint_prepared(&px[a], &py[b], 1) {
                return Separation::Found {
                    u: xs[a].word.clone(),
                    v: ys[b].word.clone(),
                    step,
                };
            }
        }
        if is_x {
            seen_x.push(i);
        } else {
            seen_y.push(i);
        }
    }
    Separation::Unknown(budget)
}

/// Complement of a compact set: base words certified disjoint from every member of some
/// listed cover.
pub fn compact_complement(k: &Name) -> crate::Result<Name> {
    if k.discipline() != Discipline::Compact {
        return Err(crate::Error::DisciplineMismatch {
            expected: Discipline::Compact.to_string(),
            got: k.discipline().to_string(),
        });
    }
    let sp = k.space().clone();
    if !sp.is_hausdorff() {
        return Err(crate::Error::Precondition(format!(
            "{} has no Hausdorff witnesses",
            sp.label()
        )));
    }
    let k = k.clone();
    let s2 = sp.clone();
    Ok(Name::new(Discipline::ClosedNeg, sp, move |budget| {
        let covers: Vec<(u64, Vec<Word>)> = k
            .stamped(budget)
            .into_iter()
            .map(|e| (e.step, fs_members(e.word.as_str())))
            .collect();
        let mut em = Emitter::new();
        if covers.is_empty() {
            return Vec::new();
        }
        for t in 0..budget {
            let (i, j) = unpair(t);
            let Some((cs, members)) = covers.get(i as usize) else {
                continue;
            };
            if *cs > t {
                continue;
            }
            let u = s2.code(j);
            if members
                .iter()
                .all(|m| s2.disjoint(u.as_str(), m.as_str(), 1))
            {
                em.emit(t, u);
            }
        }
        em.finish()
    }))
}

/// A subset of the carrier, given by exact point membership.
pub trait Region: Send + Sync {
    fn label(&self) -> String;
    fn contains(&self, x: &[Q]) -> bool;
}

/// The whole carrier.
pub struct Everything;

impl Region for Everything {
    fn label(&self) -> String {
        "all".into()
    }
    fn contains(&self, _x: &[Q]) -> bool {
        true
    }
}

/// The unit sphere in the ambient space.
pub struct UnitSphere;

impl Region for UnitSphere {
    fn label(&self) -> String {
        "sphere".into()
    }
    fn contains(&self, x: &[Q]) -> bool {
        crate::rational::norm2(x) == Q::one()
    }
}

/// Subspace with the restricted base: nu_B(w) = nu(w) & B.
pub struct Subspace {
    parent: SpaceRef,
    region: Arc<dyn Region>,
}

impl Subspace {
    pub fn new(parent: SpaceRef, region: Arc<dyn Region>) -> Self {
        Subspace { parent, region }
    }
}

pub fn subspace(parent: SpaceRef, region: Arc<dyn Region>) -> SpaceRef {
    Arc::new(Subspace::new(parent, region))
}

impl Space for Subspace {
    fn label(&self) -> String {
        format!("{}|{}", self.parent.label(), self.region.label())
    }
    fn ambient_dim(&self) -> usize {
        self.parent.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        self.parent.in_dom(w)
    }
    fn code(&self, k: u64) -> Word {
        self.parent.code(k)
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.parent.is_point(x) && self.region.contains(x)
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        if !self.region.contains(x) {
            return Some(false);
        }
        self.parent.contains(w, x)
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        self.parent.word_box(w)
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        self.parent.box_inside(b, w)
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        self.parent.witnesses(x, level)
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        self.parent.box_witnesses(b, level)
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        self.parent.subset(u, v)
    }
    fn refine(&self, u: &str, v: &str, k: u64) -> Option<Word> {
        self.parent.refine(u, v, k)
    }
    fn is_hausdorff(&self) -> bool {
        self.parent.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        self.parent.disjoint(u, v, effort)
    }
}

/// Product space with base codes <u1, u2>.
pub struct Product {
    a: SpaceRef,
    b: SpaceRef,
}

pub fn product(a: SpaceRef, b: SpaceRef) -> SpaceRef {
    Arc::new(Product { a, b })
}

impl Product {
    fn split<'a>(&self, x: &'a [Q]) -> (&'a [Q], &'a [Q]) {
        x.split_at(self.a.ambient_dim().min(x.len()))
    }

    fn parts(w: &str) -> Option<(Word, Word)> {
        let v = untuple(w, 2)?;
        Some((v[0].clone(), v[1].clone()))
    }

    fn split_box<'a>(&self, b: &'a [Interval]) -> (&'a [Interval], &'a [Interval]) {
        b.split_at(self.a.ambient_dim().min(b.len()))
    }
}

impl Space for Product {
    fn label(&self) -> String {
        format!("({} x {})", self.a.label(), self.b.label())
    }
    fn ambient_dim(&self) -> usize {
        self.a.ambient_dim() + self.b.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        Product::parts(w)
            .is_some_and(|(u, v)| self.a.in_dom(u.as_str()) && self.b.in_dom(v.as_str()))
    }
    fn code(&self, k: u64) -> Word {
        let (i, j) = unpair(k);
        tuple(&[self.a.code(i), self.b.code(j)])
    }
    fn is_point(&self, x: &[Q]) -> bool {
        let (x1, x2) = self.split(x);
        x.len() == self.ambient_dim() && self.a.is_point(x1) && self.b.is_point(x2)
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        let (u, v) = Product::parts(w)?;
        let (x1, x2) = self.split(x);
        match (
            self.a.contains(u.as_str(), x1),
            self.b.contains(v.as_str(), x2),
        ) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        }
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        let (u, v) = Product::parts(w)?;
        let mut b = self.a.word_box(u.as_str())?;
        b.extend(self.b.word_box(v.as_str())?);
        Some(b)
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        let Some((u, v)) = Product::parts(w) else {
            return false;
        };
        let (b1, b2) = self.split_box(b);
        self.a.box_inside(b1, u.as_str()) && self.b.box_inside(b2, v.as_str())
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let (x1, x2) = self.split(x);
        let wa = self.a.witnesses(x1, level);
        let wb = self.b.witnesses(x2, level);
        wa.iter()
            .flat_map(|u| wb.iter().map(move |v| tuple(&[u, v])))
            .collect()
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        let (b1, b2) = self.split_box(b);
        let wa = self.a.box_witnesses(b1, level);
        let wb = self.b.box_witnesses(b2, level);
        wa.iter()
            .flat_map(|u| wb.iter().map(move |v| tuple(&[u, v])))
            .collect()
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        match (Product::parts(u), Product::parts(v)) {
            (Some((u1, u2)), Some((v1, v2))) => {
                self.a.subset(u1.as_str(), v1.as_str()) && self.b.subset(u2.as_str(), v2.as_str())
            }
            _ => false,
        }
    }
    fn refine(&self, u: &str, v: &str, k: u64) -> Option<Word> {
        let (u1, u2) = Product::parts(u)?;
        let (v1, v2) = Product::parts(v)?;
        let (i, j) = unpair(k);
        let w1 = self.a.refine(u1.as_str(), v1.as_str(), i)?;
        let w2 = self.b.refine(u2.as_str(), v2.as_str(), j)?;
        Some(tuple(&[w1, w2]))
    }
    fn is_hausdorff(&self) -> bool {
        self.a.is_hausdorff() && self.b.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        match (Product::parts(u), Product::parts(v)) {
            (Some((u1, u2)), Some((v1, v2))) => {
                self.a.disjoint(u1.as_str(), v1.as_str(), effort)
                    || self.b.disjoint(u2.as_str(), v2.as_str(), effort)
            }
            _ => false,
        }
    }
}

/// Point name of the pair (x1, x2) from names of the components.
pub fn pair_names(space: SpaceRef, x1: &Name, x2: &Name) -> Name {
    let (a, b) = (x1.clone(), x2.clone());
    Name::new(Discipline::Point, space, move |budget| {
        let xs = a.stamped(budget);
        let ys = b.stamped(budget);
        let mut em = Emitter::new();
        for x in &xs {
            for y in &ys {
                em.emit(x.step.max(y.step), tuple(&[&x.word, &y.word]));
            }
        }
        em.finish()
    })
}

/// Component `which` (0 or 1) of a product point name.
pub fn project_name(n: &Name, which: usize, component: SpaceRef) -> Name {
    let n = n.clone();
    Name::new(n.discipline(), component, move |budget| {
        let mut em = Emitter::new();
        for e in n.stamped(budget) {
            if let Some(parts) = untuple(e.word.as_str(), 2) {
                em.emit(e.step, parts[which].clone());
            }
        }
        em.finish()
    })
}

/// A countable point-separating subbase with a decidable notation.
pub trait PredicateSpace: Send + Sync {
    fn label(&self) -> String;
    fn ambient_dim(&self) -> usize;
    fn in_dom(&self, w: &str) -> bool;
    fn code(&self, k: u64) -> Word;
    fn is_point(&self, x: &[Q]) -> bool;
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool>;
    fn word_box(&self, w: &str) -> Option<IBox>;
    fn box_inside(&self, b: &[Interval], w: &str) -> bool;
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word>;
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word>;
    fn subset(&self, u: &str, v: &str) -> bool;
    fn is_hausdorff(&self) -> bool {
        false
    }
    fn disjoint(&self, _u: &str, _v: &str, _effort: u32) -> bool {
        false
    }
    fn prepare(&self, w: &str) -> Prepared {
        Arc::new(Word::raw(w.to_string()))
    }
    fn disjoint_prepared(&self, u: &Prepared, v: &Prepared, effort: u32) -> bool {
        match (u.downcast_ref::<Word>(), v.downcast_ref::<Word>()) {
            (Some(a), Some(b)) => self.disjoint(a.as_str(), b.as_str(), effort),
            _ => false,
        }
    }
}

/// Members and enclosure of an intersection code, decoded once.
struct PreparedCode {
    members: Vec<Prepared>,
    bx: Option<IBox>,
}

/// The computable space T(Z) of finite intersections of subbase elements.
pub struct Induced {
    z: Arc<dyn PredicateSpace>,
}

pub fn induce_from_predicate(z: Arc<dyn PredicateSpace>) -> Arc<Induced> {
    Arc::new(Induced { z })
}

impl Induced {
    pub fn predicates(&self) -> &Arc<dyn PredicateSpace> {
        &self.z
    }

    /// The intersection code of the given subbase words.
    pub fn code_of<S: AsRef<str>>(members: &[S]) -> Word {
        tuple(members)
    }
}

impl Space for Induced {
    fn label(&self) -> String {
        format!("T({})", self.z.label())
    }
    fn ambient_dim(&self) -> usize {
        self.z.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        fs_in_dom(w, &|m: &str| self.z.in_dom(m))
    }
    fn code(&self, k: u64) -> Word {
        if k == 0 {
            return Word::empty();
        }
        let j = k - 1;
        if j.is_multiple_of(2) {
            return wrap(self.z.code(j / 2).as_str());
        }
        let (a, m) = unpair(j / 2);
        let parts: Vec<Word> = unpair_n(m, (a % 4 + 1) as usize)
            .into_iter()
            .map(|i| self.z.code(i))
            .collect();
        tuple(&parts)
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.z.is_point(x)
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        let mut all = true;
        for m in fs_members(w) {
            match self.z.contains(m.as_str(), x) {
                Some(false) => return Some(false),
                Some(true) => {}
                None => all = false,
            }
        }
        all.then_some(true)
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        words_enclosure_pred(self.z.as_ref(), &fs_members(w))
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        fs_members(w)
            .iter()
            .all(|m| self.z.box_inside(b, m.as_str()))
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let ws = self.z.witnesses(x, level);
        let mut out: Vec<Word> = ws.iter().map(|w| wrap(w.as_str())).collect();
        if ws.len() > 1 {
            out.push(tuple(&ws));
        }
        out
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        let ws = self.z.box_witnesses(b, level);
        let mut out: Vec<Word> = ws.iter().map(|w| wrap(w.as_str())).collect();
        if ws.len() > 1 {
            out.push(tuple(&ws));
        }
        out
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        let mu = fs_members(u);
        fs_members(v).iter().all(|mv| {
            mu.iter()
                .any(|m| m == mv || self.z.subset(m.as_str(), mv.as_str()))
        })
    }
    fn refine(&self, u: &str, v: &str, k: u64) -> Option<Word> {
        (k == 0).then(|| Word::raw(format!("{u}{v}")))
    }
    fn is_hausdorff(&self) -> bool {
        self.z.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        let mu = fs_members(u);
        let mv = fs_members(v);
        if mu.iter().any(|a| {
            mv.iter()
                .any(|b| self.z.disjoint(a.as_str(), b.as_str(), effort))
        }) {
            return true;
        }
        match (self.word_box(u), self.word_box(v)) {
            (Some(a), Some(b)) => boxes_disjoint(&a, &b),
            _ => false,
        }
    }
    fn prepare(&self, w: &str) -> Prepared {
        let ms = fs_members(w);
        Arc::new(PreparedCode {
            members: ms.iter().map(|m| self.z.prepare(m.as_str())).collect(),
            bx: words_enclosure_pred(self.z.as_ref(), &ms),
        })
    }
    fn disjoint_prepared(&self, u: &Prepared, v: &Prepared, effort: u32) -> bool {
        let (Some(a), Some(b)) = (
            u.downcast_ref::<PreparedCode>(),
            v.downcast_ref::<PreparedCode>(),
        ) else {
            return false;
        };
        if let (Some(x), Some(y)) = (&a.bx, &b.bx) {
            if boxes_disjoint(x, y) {
                return true;
            }
        }
        a.members.iter().any(|m| {
            b.members
                .iter()
                .any(|n| self.z.disjoint_prepared(m, n, effort))
        })
    }
}

fn words_enclosure_pred(z: &dyn PredicateSpace, words: &[Word]) -> Option<IBox> {
    let mut cur: Option<IBox> = None;
    for w in words {
        if let Some(bx) = z.word_box(w.as_str()) {
            cur = Some(match cur {
                None => bx,
                Some(c) => box_intersect(&c, &bx).unwrap_or(c),
            });
        }
    }
    cur
}

/// The subbase itself viewed as a (non-intersection-closed) notation, so that names
/// listing subbase elements can be handled like any other name.
pub struct Subbase {
    z: Arc<dyn PredicateSpace>,
}

pub fn subbase_space(z: Arc<dyn PredicateSpace>) -> SpaceRef {
    Arc::new(Subbase { z })
}

impl Space for Subbase {
    fn label(&self) -> String {
        format!("Z({})", self.z.label())
    }
    fn ambient_dim(&self) -> usize {
        self.z.ambient_dim()
    }
    fn in_dom(&self, w: &str) -> bool {
        self.z.in_dom(w)
    }
    fn code(&self, k: u64) -> Word {
        self.z.code(k)
    }
    fn is_point(&self, x: &[Q]) -> bool {
        self.z.is_point(x)
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        self.z.contains(w, x)
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        self.z.word_box(w)
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        self.z.box_inside(b, w)
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        self.z.witnesses(x, level)
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        self.z.box_witnesses(b, level)
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        u == v || self.z.subset(u, v)
    }
    fn refine(&self, _u: &str, _v: &str, _k: u64) -> Option<Word> {
        None
    }
    fn is_hausdorff(&self) -> bool {
        self.z.is_hausdorff()
    }
    fn disjoint(&self, u: &str, v: &str, effort: u32) -> bool {
        self.z.disjoint(u, v, effort)
    }
}

/// delta_Z to delta_T(Z): every finite set of listed subbase words, as an intersection
/// code. Singletons come first; step t additionally lists the subset selected by the
/// bits of unpair(t).0.
pub fn predicate_to_induced(z: Arc<dyn PredicateSpace>) -> Translator {
    let target: SpaceRef = induce_from_predicate(z.clone());
    Translator::new(
        "subbase-to-intersections",
        Discipline::Point,
        subbase_space(z).label(),
        Discipline::Point,
        target,
        |n: &Name| {
            let n = n.clone();
            Arc::new(move |budget| {
                let xs = n.stamped(budget);
                let mut em = Emitter::new();
                for e in &xs {
                    em.emit(e.step, wrap(e.word.as_str()));
                }
                for t in 0..budget {
                    let (mask, _) = unpair(t);
                    if mask == 0 || 64 - mask.leading_zeros() as usize > xs.len() {
                        continue;
                    }
                    let chosen: Vec<&Stamped> = (0..64)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| &xs[i])
                        .collect();
                    if chosen.iter().all(|e| e.step <= t) {
                        let words: Vec<&Word> = chosen.iter().map(|e| &e.word).collect();
                        em.emit(t, tuple(&words));
                    }
                }
                em.finish()
            })
        },
    )
}

/// delta_T(Z) to delta_Z: the members of every listed intersection code.
pub fn induced_to_predicate(z: Arc<dyn PredicateSpace>) -> Translator {
    let target = subbase_space(z.clone());
    Translator::new(
        "intersections-to-subbase",
        Discipline::Point,
        induce_from_predicate(z).label(),
        Discipline::Point,
        target,
        |n: &Name| {
            let n = n.clone();
            Arc::new(move |budget| {
                let mut em = Emitter::new();
                for e in n.stamped(budget) {
                    for m in fs_members(e.word.as_str()) {
                        em.emit(e.step, m);
                    }
                }
                em.finish()
            })
        },
    )
}

/// Subbase of open unit intervals (q, q+1), q rational, coded by the rational.
pub struct UnitIntervals;

impl UnitIntervals {
    fn q(w: &str) -> Option<Q> {
        rat_decode(w).ok()
    }
}

impl PredicateSpace for UnitIntervals {
    fn label(&self) -> String {
        "unit-intervals".into()
    }
    fn ambient_dim(&self) -> usize {
        1
    }
    fn in_dom(&self, w: &str) -> bool {
        rat_decode(w).is_ok()
    }
    fn code(&self, k: u64) -> Word {
        rat_encode(&crate::enumerate::rational(k))
    }
    fn is_point(&self, x: &[Q]) -> bool {
        x.len() == 1
    }
    fn contains(&self, w: &str, x: &[Q]) -> Option<bool> {
        let q = UnitIntervals::q(w)?;
        Some(q < x[0] && x[0] < q + Q::one())
    }
    fn word_box(&self, w: &str) -> Option<IBox> {
        let q = UnitIntervals::q(w)?;
        Some(vec![Interval::new(q.clone(), q + Q::one())])
    }
    fn box_inside(&self, b: &[Interval], w: &str) -> bool {
        UnitIntervals::q(w).is_some_and(|q| q < b[0].lo && b[0].hi < q + Q::one())
    }
    fn witnesses(&self, x: &[Q], level: u32) -> Vec<Word> {
        let e = pow2_neg(level + 1);
        vec![
            rat_encode(&(&x[0] - &e)),
            rat_encode(&(&x[0] + &e - Q::one())),
        ]
    }
    fn box_witnesses(&self, b: &[Interval], level: u32) -> Vec<Word> {
        let w = b[0].width();
        if w >= qi(1) {
            return Vec::new();
        }
        let lev = neg_log2_floor(&w).map_or(level, |k| k.min(level));
        let e = pow2_neg(lev + 2);
        let lo = &b[0].lo - &e;
        let hi = &b[0].hi + &e;
        if &hi - &lo >= qi(1) {
            return Vec::new();
        }
        vec![rat_encode(&lo), rat_encode(&(hi - Q::one()))]
    }
    fn subset(&self, u: &str, v: &str) -> bool {
        u == v
    }
    fn is_hausdorff(&self) -> bool {
        true
    }
    fn disjoint(&self, u: &str, v: &str, _effort: u32) -> bool {
        match (UnitIntervals::q(u), UnitIntervals::q(v)) {
            (Some(a), Some(b)) => (a - b).abs() >= Q::one(),
            _ => false,
        }
    }
}

/// The singleton subbase {X}: a single code (the empty word) for the whole space.
pub struct Trivial {
    pub dim: usize,
}

impl PredicateSpace for Trivial {
    fn label(&self) -> String {
        format!("trivial:{}", self.dim)
    }
    fn ambient_dim(&self) -> usize {
        self.dim
    }
    fn in_dom(&self, w: &str) -> bool {
        w.is_empty()
    }
    fn code(&self, _k: u64) -> Word {
        Word::empty()
    }
    fn is_point(&self, x: &[Q]) -> bool {
        x.len() == self.dim
    }
    fn contains(&self, w: &str, _x: &[Q]) -> Option<bool> {
        Some(w.is_empty())
    }
    fn word_box(&self, _w: &str) -> Option<IBox> {
        None
    }
    fn box_inside(&self, _b: &[Interval], w: &str) -> bool {
        w.is_empty()
    }
    fn witnesses(&self, _x: &[Q], _level: u32) -> Vec<Word> {
        vec![Word::empty()]
    }
    fn box_witnesses(&self, _b: &[Interval], _level: u32) -> Vec<Word> {
        vec![Word::empty()]
    }
    fn subset(&self, _u: &str, _v: &str) -> bool {
        true
    }
}

/// True when every listed word of the name passes the exact membership test for x.
pub fn name_is_sound_for(n: &Name, x: &[Q], budget: u64) -> bool {
    n.query(budget)
        .iter()
        .all(|w| n.space().contains(w.as_str(), x) == Some(true))
}

/// Checks of a point name at a budget: listed words failing the exact test.
pub fn unsound_words(n: &Name, x: &[Q], budget: u64) -> Vec<Word> {
    n.query(budget)
        .into_iter()
        .filter(|w| n.space().contains(w.as_str(), x) != Some(true))
        .collect()
}
