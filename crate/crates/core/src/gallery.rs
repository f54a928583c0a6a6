//! Concrete computable manifolds: R^n, a shifted line, the circle, spheres, projective
//! spaces, tori, the line with two origins and punctured spheres.

use std::fmt;
use std::sync::Arc;

use num::{One, Signed, Zero};

use crate::decision::HalfChart;
use crate::error::{Error, Result};
use crate::espace::{approximate, subspace, Everything, Region, SpaceRef, UnitSphere};
use crate::euclid::{
    euclidean_space, stereo_box, stereo_inv_box, stereo_inv_point, stereo_point, BoxMap,
    RationalBall,
};
use crate::interval::{box_contains, box_point, IBox, Interval};
use crate::manifold::{
    enclosure_translators, induced_space, product_manifold, pushforward_manifold, Atlas, Bijection,
    Chart, ChartRef, Manifold,
};
use crate::names::{Name, Translator};
use crate::rational::{norm2, qi, Q};
use crate::words::{nat_decode, nat_encode_u64, Word};

/// Exact square root of a non-negative rational when it is a rational square.
pub fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Q::new(rn, rd))
}

/// Enclosure of sqrt(1 - y^2) over the part of y inside [-1, 1].
fn unit_complement(y: &Interval, k: u32) -> Option<Interval> {
    let s = Interval::point(Q::one()).sub(&y.square());
    if !s.hi.is_positive() {
        return None;
    }
    let lo = if s.lo.is_negative() {
        Q::zero()
    } else {
        s.lo.clone()
    };
    Some(Interval::new(lo, s.hi).sqrt(k))
}

fn word(s: &str) -> Word {
    Word::new(s).expect("binary chart index")
}

/// The identity chart of R^n.
pub struct IdentityChart {
    pub n: usize,
}

impl Chart for IdentityChart {
    fn id(&self) -> Word {
        word("0")
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        x.len() == self.n
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        Some(x.to_vec())
    }
    fn forward_box(&self, b: &[Interval], _k: u32) -> Option<IBox> {
        Some(b.to_vec())
    }
    fn backward_box(&self, y: &[Interval], _k: u32) -> Option<IBox> {
        Some(y.to_vec())
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        Some(y.to_vec())
    }
    fn image_contains_ball(&self, _ball: &RationalBall) -> Option<bool> {
        Some(true)
    }
}

type Carrier = Box<dyn Fn(&[Q]) -> bool + Send + Sync>;

/// Atlases with finitely many charts listed once and for all.
pub struct FiniteAtlas {
    label: String,
    dim: usize,
    ambient: usize,
    charts: Vec<ChartRef>,
    carrier: Carrier,
    hausdorff: bool,
}

impl Atlas for FiniteAtlas {
    fn label(&self) -> String {
        self.label.clone()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn ambient_dim(&self) -> usize {
        self.ambient
    }
    fn chart(&self, id: &str) -> Option<ChartRef> {
        self.charts.iter().find(|c| c.id().as_str() == id).cloned()
    }
    fn chart_id(&self, k: u64) -> Option<Word> {
        self.charts.get(k as usize).map(|c| c.id())
    }
    fn chart_count(&self) -> Option<u64> {
        Some(self.charts.len() as u64)
    }
    fn carrier_contains(&self, x: &[Q]) -> bool {
        x.len() == self.ambient && (self.carrier)(x)
    }
    fn is_hausdorff(&self) -> bool {
        self.hausdorff
    }
    fn charts_near(&self, _b: &[Interval]) -> Vec<ChartRef> {
        self.charts.clone()
    }
}

/// The identity atlas of R^n.
pub fn euclidean(n: usize) -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: format!("R{n}"),
        dim: n,
        ambient: n,
        charts: vec![Arc::new(IdentityChart { n })],
        carrier: Box::new(|_| true),
        hausdorff: true,
    }))
}

/// phi(x) = x + a on R, where a is known only through a point name.
pub struct ShiftChart {
    a: Name,
}

impl ShiftChart {
    fn shift(&self, k: u32) -> Option<Interval> {
        let (bx, _) = approximate(&self.a, k.min(200), 1 << 22)?;
        Some(bx[0].clone())
    }
}

impl Chart for ShiftChart {
    fn id(&self) -> Word {
        word("0")
    }
    fn dim(&self) -> usize {
        1
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        x.len() == 1
    }
    fn forward(&self, _x: &[Q]) -> Option<Vec<Q>> {
        None
    }
    fn forward_box(&self, b: &[Interval], k: u32) -> Option<IBox> {
        Some(vec![b[0].add(&self.shift(k)?)])
    }
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox> {
        Some(vec![y[0].sub(&self.shift(k)?)])
    }
    fn image_contains_ball(&self, _ball: &RationalBall) -> Option<bool> {
        Some(true)
    }
}

/// R with the single chart x -> x + a.
pub fn shifted_line(a: &Name) -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: "shifted-line".into(),
        dim: 1,
        ambient: 1,
        charts: vec![Arc::new(ShiftChart { a: a.clone() })],
        carrier: Box::new(|_| true),
        hausdorff: true,
    }))
}

/// Chart index of a half chart: f+ = 0, f- = 1, g+ = 10, g- = 11.
pub fn half_chart_id(h: HalfChart) -> Word {
    word(match h {
        HalfChart::FPlus => "0",
        HalfChart::FMinus => "1",
        HalfChart::GPlus => "10",
        HalfChart::GMinus => "11",
    })
}

pub fn half_chart_of(id: &str) -> Option<HalfChart> {
    HalfChart::ALL
        .into_iter()
        .find(|h| half_chart_id(*h).as_str() == id)
}

/// One of the four projections of the unit circle onto a coordinate axis.
pub struct HalfCircleChart {
    pub which: HalfChart,
}

impl Chart for HalfCircleChart {
    fn id(&self) -> Word {
        half_chart_id(self.which)
    }
    fn dim(&self) -> usize {
        1
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        self.which.point(x).is_some()
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        self.which.point(x)
    }
    fn forward_box(&self, b: &[Interval], _k: u32) -> Option<IBox> {
        self.which.eval_box(b)
    }
    fn backward_box(&self, y: &[Interval], k: u32) -> Option<IBox> {
        let (c, pos, o) = self.which.parts();
        let s = unit_complement(&y[0], k)?;
        let mut out = vec![Interval::point(Q::zero()); 2];
        out[o] = y[0].intersect(&Interval::new(qi(-1), qi(1)))?;
        out[c] = if pos { s } else { s.neg() };
        Some(out)
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        let (c, pos, o) = self.which.parts();
        if y[0].abs() >= Q::one() {
            return None;
        }
        let s = exact_sqrt(&(Q::one() - &y[0] * &y[0]))?;
        let mut out = vec![Q::zero(); 2];
        out[o] = y[0].clone();
        out[c] = if pos { s } else { -s };
        Some(out)
    }
    fn image_contains_ball(&self, ball: &RationalBall) -> Option<bool> {
        Some(ball.center[0].abs() + &ball.radius <= Q::one())
    }
}

fn on_unit_sphere(x: &[Q]) -> bool {
    norm2(x) == Q::one()
}

/// S^1 with the four half charts f+, f-, g+, g-.
pub fn circle_half_charts() -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: "circle".into(),
        dim: 1,
        ambient: 2,
        charts: HalfChart::ALL
            .into_iter()
            .map(|h| Arc::new(HalfCircleChart { which: h }) as ChartRef)
            .collect(),
        carrier: Box::new(on_unit_sphere),
        hausdorff: true,
    }))
}

/// Stereographic projection from the pole r e_(n+1): id 0 for r = 1, id 1 for r = -1.
pub struct StereoChart {
    pub n: usize,
    pub r: i8,
}

impl Chart for StereoChart {
    fn id(&self) -> Word {
        word(if self.r == 1 { "0" } else { "1" })
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        x.last().is_some_and(|t| *t != qi(self.r as i64))
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        stereo_point(self.r, x)
    }
    fn forward_box(&self, b: &[Interval], _k: u32) -> Option<IBox> {
        stereo_box(self.r, b)
    }
    fn backward_box(&self, y: &[Interval], _k: u32) -> Option<IBox> {
        Some(stereo_inv_box(self.r, y))
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        Some(stereo_inv_point(self.r, y))
    }
    fn image_contains_ball(&self, _ball: &RationalBall) -> Option<bool> {
        Some(true)
    }
}

/// S^n with the two stereographic charts.
pub fn sphere_stereo(n: usize) -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: format!("S{n}"),
        dim: n,
        ambient: n + 1,
        charts: vec![
            Arc::new(StereoChart { n, r: 1 }),
            Arc::new(StereoChart { n, r: -1 }),
        ],
        carrier: Box::new(on_unit_sphere),
        hausdorff: true,
    }))
}

/// Chart name of a stereographic chart: s+1 or s-1.
pub fn stereo_chart_id(name: &str) -> Option<Word> {
    match name {
        "s+1" | "s1" | "+1" => Some(word("0")),
        "s-1" | "-1" => Some(word("1")),
        _ => None,
    }
}

/// The point [x] of RP^n as the matrix x x^T / |x|^2, flattened row by row.
pub fn projective_point(x: &[Q]) -> Option<Vec<Q>> {
    let n2 = norm2(x);
    if n2.is_zero() {
        return None;
    }
    Some(
        x.iter()
            .flat_map(|a| x.iter().map(move |b| a * b))
            .map(|v| v / &n2)
            .collect(),
    )
}

fn projective_box(x: &[Interval]) -> Option<IBox> {
    let n2 = x
        .iter()
        .fold(Interval::point(Q::zero()), |acc, c| acc.add(&c.square()));
    x.iter()
        .flat_map(|a| x.iter().map(move |b| a.mul(b)))
        .map(|v| v.div(&n2))
        .collect()
}

/// phi_i[x] = (x_j / x_i)_(j != i) read off the matrix as v_ij / v_ii, i from 1.
pub struct ProjectiveChart {
    pub n: usize,
    pub i: usize,
}

impl ProjectiveChart {
    fn at(&self, r: usize, c: usize) -> usize {
        r * (self.n + 1) + c
    }
}

impl Chart for ProjectiveChart {
    fn id(&self) -> Word {
        nat_encode_u64(self.i as u64)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn in_domain(&self, v: &[Q]) -> bool {
        !v[self.at(self.i - 1, self.i - 1)].is_zero()
    }
    fn forward(&self, v: &[Q]) -> Option<Vec<Q>> {
        let r = self.i - 1;
        let d = &v[self.at(r, r)];
        if d.is_zero() {
            return None;
        }
        Some(
            (0..=self.n)
                .filter(|j| *j != r)
                .map(|j| &v[self.at(r, j)] / d)
                .collect(),
        )
    }
    fn forward_box(&self, v: &[Interval], _k: u32) -> Option<IBox> {
        let r = self.i - 1;
        let d = &v[self.at(r, r)];
        if !d.is_positive() {
            return None;
        }
        (0..=self.n)
            .filter(|j| *j != r)
            .map(|j| v[self.at(r, j)].div(d))
            .collect()
    }
    fn backward_box(&self, y: &[Interval], _k: u32) -> Option<IBox> {
        let mut x: IBox = y.to_vec();
        x.insert(self.i - 1, Interval::point(Q::one()));
        projective_box(&x)
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        let mut x = y.to_vec();
        x.insert(self.i - 1, Q::one());
        projective_point(&x)
    }
    fn image_contains_ball(&self, _ball: &RationalBall) -> Option<bool> {
        Some(true)
    }
}

/// Symmetric, trace one and idempotent: a rank-one orthogonal projection.
fn is_projective_point(v: &[Q], n: usize) -> bool {
    let m = n + 1;
    if v.len() != m * m {
        return false;
    }
    let at = |r: usize, c: usize| &v[r * m + c];
    let symmetric = (0..m).all(|r| (0..m).all(|c| at(r, c) == at(c, r)));
    let trace: Q = (0..m).map(|r| at(r, r).clone()).sum();
    let idempotent =
        (0..m).all(|r| (0..m).all(|c| (0..m).map(|k| at(r, k) * at(k, c)).sum::<Q>() == *at(r, c)));
    symmetric && trace == Q::one() && idempotent
}

/// RP^n embedded in R^((n+1)^2) with the n + 1 charts x_i != 0.
pub fn projective(n: usize) -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: format!("RP{n}"),
        dim: n,
        ambient: (n + 1) * (n + 1),
        charts: (1..=n + 1)
            .map(|i| Arc::new(ProjectiveChart { n, i }) as ChartRef)
            .collect(),
        carrier: Box::new(move |v| is_projective_point(v, n)),
        hausdorff: true,
    }))
}

/// Chart index i (from 1) of RP^n.
pub fn projective_chart_id(i: usize) -> Word {
    nat_encode_u64(i as u64)
}

pub fn projective_chart_index(id: &str) -> Option<usize> {
    nat_decode(id).ok().and_then(|v| usize::try_from(v).ok())
}

/// T^n as the n-fold product of half-chart circles, carried in R^(2n).
pub fn torus(n: usize) -> Manifold {
    let c = circle_half_charts();
    let mut m = c.clone();
    for _ in 1..n {
        m = product_manifold(&m, &c);
    }
    m
}

/// The two charts of the line with two origins, carried as {(s, 0)} and the extra origin
/// (0, 1).
pub struct OriginChart {
    /// false: the chart f on the points (s, 0); true: the chart f' that sees (0, 1).
    pub primed: bool,
}

fn extra_origin() -> Vec<Q> {
    vec![Q::zero(), Q::one()]
}

impl Chart for OriginChart {
    fn id(&self) -> Word {
        word(if self.primed { "1" } else { "0" })
    }
    fn dim(&self) -> usize {
        1
    }
    fn in_domain(&self, x: &[Q]) -> bool {
        if self.primed {
            (x[1].is_zero() && !x[0].is_zero()) || x == extra_origin().as_slice()
        } else {
            x[1].is_zero()
        }
    }
    fn forward(&self, x: &[Q]) -> Option<Vec<Q>> {
        self.in_domain(x).then(|| vec![x[0].clone()])
    }
    fn forward_box(&self, b: &[Interval], _k: u32) -> Option<IBox> {
        if self.primed {
            if box_contains(b, &[Q::zero(), Q::zero()]) {
                return None;
            }
            let mut out = b[0].clone();
            if box_contains(b, &extra_origin()) {
                out = out.hull(&Interval::point(Q::zero()));
            }
            Some(vec![out])
        } else {
            (!box_contains(b, &extra_origin())).then(|| vec![b[0].clone()])
        }
    }
    fn backward_box(&self, y: &[Interval], _k: u32) -> Option<IBox> {
        let top = if self.primed && y[0].contains_zero() {
            Q::one()
        } else {
            Q::zero()
        };
        Some(vec![y[0].clone(), Interval::new(Q::zero(), top)])
    }
    fn backward(&self, y: &[Q]) -> Option<Vec<Q>> {
        if self.primed && y[0].is_zero() {
            Some(extra_origin())
        } else {
            Some(vec![y[0].clone(), Q::zero()])
        }
    }
    fn image_contains_ball(&self, _ball: &RationalBall) -> Option<bool> {
        Some(true)
    }
}

/// The line with two origins: (0, 0) and (0, 1) share every chart value.
pub fn line_two_origins() -> Manifold {
    induced_space(Arc::new(FiniteAtlas {
        label: "two-origins".into(),
        dim: 1,
        ambient: 2,
        charts: vec![
            Arc::new(OriginChart { primed: false }),
            Arc::new(OriginChart { primed: true }),
        ],
        carrier: Box::new(|x| x[1].is_zero() || x == extra_origin().as_slice()),
        hausdorff: false,
    }))
}

/// The two origins of the line with two origins.
pub fn origins() -> (Vec<Q>, Vec<Q>) {
    (vec![Q::zero(), Q::zero()], extra_origin())
}

/// Carrier point of the ordinary point s of the line with two origins.
pub fn line_point(s: Q) -> Vec<Q> {
    vec![s, Q::zero()]
}

/// S^n minus the north pole, carried over from R^n by the inverse stereographic map.
pub fn punctured_sphere(n: usize) -> Manifold {
    let pole = qi(1);
    let f = Bijection {
        label: "punctured".into(),
        ambient_out: n + 1,
        forward: Box::new(|y| Some(stereo_inv_point(1, y))),
        inverse: Box::new(move |x| {
            (on_unit_sphere(x) && x.last() != Some(&pole))
                .then(|| stereo_point(1, x))
                .flatten()
        }),
        forward_box: Box::new(|b, _| Some(stereo_inv_box(1, b))),
        inverse_box: Box::new(|b, _| stereo_box(1, b)),
    };
    pushforward_manifold(&euclidean(n), f)
}

/// The gallery of named manifolds.
#[derive(Clone)]
pub enum GalleryId {
    Euclidean(usize),
    ShiftedLine(Name),
    CircleHalfCharts,
    SphereStereo(usize),
    Projective(usize),
    Torus(usize),
    LineTwoOrigins,
    PuncturedSphere(usize),
}

impl fmt::Debug for GalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GalleryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalleryId::Euclidean(n) => write!(f, "euclid:{n}"),
            GalleryId::ShiftedLine(_) => write!(f, "shifted-line"),
            GalleryId::CircleHalfCharts => write!(f, "circle"),
            GalleryId::SphereStereo(n) => write!(f, "sphere-stereo:{n}"),
            GalleryId::Projective(n) => write!(f, "projective:{n}"),
            GalleryId::Torus(n) => write!(f, "torus:{n}"),
            GalleryId::LineTwoOrigins => write!(f, "two-origins"),
            GalleryId::PuncturedSphere(n) => write!(f, "punctured-sphere:{n}"),
        }
    }
}

/// Parses identifiers such as `euclid:2`, `circle`, `sphere-stereo:2`, `projective:2`,
/// `torus:2`, `two-origins`, `punctured-sphere:2` and `shifted-line:1/3`.
pub fn parse_gallery_id(s: &str) -> Result<GalleryId> {
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    };
    let dim = |lo: usize| -> Result<usize> {
        let a = arg.ok_or_else(|| Error::Parse(format!("{head} needs a dimension")))?;
        let n: usize = a
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension {a:?}")))?;
        if n < lo || n > 16 {
            return Err(Error::Parse(format!(
                "dimension {n} out of range for {head}"
            )));
        }
        Ok(n)
    };
    let no_arg = |id: GalleryId| -> Result<GalleryId> {
        match arg {
            None => Ok(id),
            Some(a) => Err(Error::Parse(format!(
                "{head} takes no parameter, got {a:?}"
            ))),
        }
    };
    match head {
        "euclid" | "euclidean" => Ok(GalleryId::Euclidean(dim(1)?)),
        "shifted-line" => {
            let a = arg.ok_or_else(|| Error::Parse("shifted-line needs a shift".into()))?;
            let a = crate::rational::parse_decimal(a)?;
            Ok(GalleryId::ShiftedLine(crate::euclid::point_from_rational(
                &euclidean_space(1),
                vec![a],
            )))
        }
        "circle" | "circle-half-charts" => no_arg(GalleryId::CircleHalfCharts),
        "sphere-stereo" | "sphere" => Ok(GalleryId::SphereStereo(dim(1)?)),
        "projective" => Ok(GalleryId::Projective(dim(1)?)),
        "torus" => Ok(GalleryId::Torus(dim(1)?)),
        "two-origins" | "line-two-origins" => no_arg(GalleryId::LineTwoOrigins),
        "punctured-sphere" => Ok(GalleryId::PuncturedSphere(dim(1)?)),
        _ => Err(Error::Parse(format!("unknown gallery identifier {s:?}"))),
    }
}

pub fn make(id: &GalleryId) -> Manifold {
    match id {
        GalleryId::Euclidean(n) => euclidean(*n),
        GalleryId::ShiftedLine(a) => shifted_line(a),
        GalleryId::CircleHalfCharts => circle_half_charts(),
        GalleryId::SphereStereo(n) => sphere_stereo(*n),
        GalleryId::Projective(n) => projective(*n),
        GalleryId::Torus(n) => torus(*n),
        GalleryId::LineTwoOrigins => line_two_origins(),
        GalleryId::PuncturedSphere(n) => punctured_sphere(*n),
    }
}

struct PuncturedRegion;

impl Region for PuncturedRegion {
    fn label(&self) -> String {
        "S-minus-N".into()
    }
    fn contains(&self, x: &[Q]) -> bool {
        on_unit_sphere(x) && x.last() != Some(&Q::one())
    }
}

struct ProjectiveRegion(usize);

impl Region for ProjectiveRegion {
    fn label(&self) -> String {
        format!("P{}", self.0)
    }
    fn contains(&self, x: &[Q]) -> bool {
        is_projective_point(x, self.0)
    }
}

struct TorusRegion;

impl Region for TorusRegion {
    fn label(&self) -> String {
        "T".into()
    }
    fn contains(&self, x: &[Q]) -> bool {
        x.chunks(2).all(on_unit_sphere)
    }
}

/// The subspace structure of the ambient euclidean space that the gallery manifold is
/// equivalent to, when there is one.
pub fn reference_space(id: &GalleryId) -> Option<SpaceRef> {
    let m = make(id);
    let e = euclidean_space(m.atlas.ambient_dim());
    let region: Arc<dyn Region> = match id {
        GalleryId::Euclidean(_) | GalleryId::ShiftedLine(_) => Arc::new(Everything),
        GalleryId::CircleHalfCharts | GalleryId::SphereStereo(_) => Arc::new(UnitSphere),
        GalleryId::PuncturedSphere(_) => Arc::new(PuncturedRegion),
        GalleryId::Projective(n) => Arc::new(ProjectiveRegion(*n)),
        GalleryId::Torus(_) => Arc::new(TorusRegion),
        GalleryId::LineTwoOrigins => return None,
    };
    Some(subspace(e, region))
}

/// Translators both ways between the manifold and its reference subspace structure.
pub fn reference_translators(
    id: &GalleryId,
    m: &Manifold,
) -> Option<(SpaceRef, Translator, Translator)> {
    let r = reference_space(id)?;
    let (to, from) = enclosure_translators(&m.space_ref(), &r);
    Some((r, to, from))
}

/// ((2 + y_v) y_u, (2 + y_v) x_u, x_v) on (x_u, y_u, x_v, y_v).
pub fn torus_map_point(x: &[Q]) -> Vec<Q> {
    let r = qi(2) + &x[3];
    vec![&r * &x[1], &r * &x[0], x[2].clone()]
}

pub fn torus_map_box(x: &[Interval]) -> IBox {
    let r = x[3].add_q(&qi(2));
    vec![r.mul(&x[1]), r.mul(&x[0]), x[2].clone()]
}

/// Inverse on the image: x_v = Z, y_v = sqrt(X^2 + Y^2) - 2, y_u = X / rho, x_u = Y / rho.
pub fn torus_inverse_box(p: &[Interval], k: u32) -> Option<IBox> {
    let rho2 = p[0].square().add(&p[1].square());
    let rho = rho2.sqrt(k);
    if !rho.is_positive() {
        return None;
    }
    let unit = Interval::new(qi(-1), qi(1));
    let clip = |i: Interval| i.intersect(&unit);
    Some(vec![
        clip(p[1].div(&rho)?)?,
        clip(p[0].div(&rho)?)?,
        clip(p[2].clone())?,
        clip(rho.add_q(&qi(-2)))?,
    ])
}

/// The torus-in-R^3 map on point names, with its inverse on the image.
pub struct TorusEmbedding {
    pub torus: Manifold,
    pub forward: Translator,
    pub inverse: Translator,
}

pub fn torus_embedding_map() -> TorusEmbedding {
    let t = torus(2);
    let e3: SpaceRef = euclidean_space(3);
    let f: BoxMap = Arc::new(|b, _| Some(torus_map_box(b)));
    let g: BoxMap = Arc::new(torus_inverse_box);
    let forward = crate::euclid::box_map_translator("torus map", t.space_ref(), e3.clone(), f);
    let inverse = crate::euclid::box_map_translator("torus inverse", e3, t.space_ref(), g);
    TorusEmbedding {
        torus: t,
        forward,
        inverse,
    }
}

/// Exact chart value when the chart admits one, for tests and the CLI.
pub fn chart_value(m: &Manifold, id: &str, x: &[Q]) -> Option<Vec<Q>> {
    let c = m.atlas.chart(id)?;
    if !c.in_domain(x) {
        return None;
    }
    c.forward(x).or_else(|| {
        c.forward_box(&box_point(x), 64)
            .map(|b| b.iter().map(|i| i.mid()).collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn projective_chart_divides() {
        let m = projective(2);
        let v = projective_point(&[qi(1), qi(2), qi(3)]).unwrap();
        assert!(m.atlas.carrier_contains(&v));
        let c = m.atlas.chart(projective_chart_id(1).as_str()).unwrap();
        assert_eq!(c.forward(&v), Some(vec![qi(2), qi(3)]));
        assert_eq!(c.backward(&[qi(2), qi(3)]), Some(v));
    }

    #[test]
    fn stereo_south_pole() {
        let m = sphere_stereo(1);
        let c = m.atlas.chart("0").unwrap();
        assert_eq!(c.forward(&[qi(0), qi(-1)]), Some(vec![qi(0)]));
    }

    #[test]
    fn half_chart_backward_exact() {
        let c = HalfCircleChart {
            which: HalfChart::FPlus,
        };
        assert_eq!(c.backward(&[q(3, 5)]), Some(vec![q(3, 5), q(4, 5)]));
        assert!(c
            .image_contains_ball(&RationalBall {
                center: vec![qi(0)],
                radius: q(1, 2)
            })
            .unwrap());
        assert!(!c
            .image_contains_ball(&RationalBall {
                center: vec![qi(5)],
                radius: qi(1)
            })
            .unwrap());
    }

    #[test]
    fn two_origin_charts_agree_off_origin() {
        let f = OriginChart { primed: false };
        let g = OriginChart { primed: true };
        let x = line_point(q(1, 3));
        assert_eq!(f.forward(&x), g.forward(&x));
        let (o, o2) = origins();
        assert_eq!(f.forward(&o), Some(vec![qi(0)]));
        assert_eq!(g.forward(&o2), Some(vec![qi(0)]));
        assert!(!g.in_domain(&o));
        assert!(!f.in_domain(&o2));
    }

    #[test]
    fn torus_values() {
        assert_eq!(
            torus_map_point(&[qi(1), qi(0), qi(1), qi(0)]),
            vec![qi(0), qi(2), qi(1)]
        );
        assert_eq!(
            torus_map_point(&[qi(0), qi(1), qi(0), qi(1)]),
            vec![qi(3), qi(0), qi(0)]
        );
    }

    #[test]
    fn ids_parse() {
        for s in [
            "euclid:2",
            "circle",
            "sphere-stereo:2",
            "projective:2",
            "torus:2",
            "two-origins",
            "punctured-sphere:1",
        ] {
            assert_eq!(parse_gallery_id(s).unwrap().to_string(), s);
        }
        assert!(parse_gallery_id("torus").is_err());
        assert!(parse_gallery_id("klein:2").is_err());
        assert!(exact_sqrt(&q(9, 25)) == Some(q(3, 5)));
    }
}
