use std::fmt::Write as _;

use ctopo::decision::HalfChart;
use ctopo::embed::{circle_ball_charts, embed_compact};
use ctopo::espace::{approximate, separate_points, Separation};
use ctopo::euclid::{euclidean_space, point_from_rational, RationalBall};
use ctopo::gallery::{
    half_chart_id, make, parse_gallery_id, projective_chart_id, projective_point, stereo_chart_id,
    torus_embedding_map, torus_map_point, GalleryId,
};
use ctopo::interval::{box_contains, IBox};
use ctopo::manifold::{
    ball_code, ball_code_parts, chart_eval, open_submanifold, Direction, Manifold,
};
use ctopo::names::member_semidecide;
use ctopo::rational::{circle_point, fmt_decimal, fmt_vector, parse_vector, q, Q};
use ctopo::words::{tuple, untuple, untuple_all, Word};
use ctopo::{selftest, Discipline, Name, SemiDecision, Space};

pub struct Failure {
    pub code: u8,
    pub message: String,
    /// Output produced before the failure.
    pub partial: Option<String>,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
            partial: None,
        }
    }

    fn contract(message: impl Into<String>, partial: String) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            partial: Some(partial),
        }
    }
}

impl From<ctopo::Error> for Failure {
    fn from(e: ctopo::Error) -> Self {
        Failure {
            code: if e.is_input_error() { 1 } else { 2 },
            message: e.to_string(),
            partial: None,
        }
    }
}

type Outcome = Result<String, Failure>;

struct Target {
    id: GalleryId,
    m: Manifold,
}

fn target(s: &str) -> Result<Target, Failure> {
    let id = parse_gallery_id(s)?;
    let m = make(&id);
    Ok(Target { id, m })
}

/// A carrier point; projective points may also be given by homogeneous coordinates.
fn carrier_point(t: &Target, s: &str) -> Result<Vec<Q>, Failure> {
    let mut x = parse_vector(s)?;
    if let GalleryId::Projective(n) = t.id {
        if x.len() == n + 1 {
            x = projective_point(&x)
                .ok_or_else(|| Failure::input(format!("{s} is not a projective point")))?;
        }
    }
    if x.len() != t.m.atlas.ambient_dim() {
        return Err(Failure::input(format!(
            "{} expects {} coordinates, got {}",
            t.id,
            t.m.atlas.ambient_dim(),
            x.len()
        )));
    }
    if !t.m.atlas.carrier_contains(&x) {
        return Err(Failure::input(format!("{s} is not a point of {}", t.id)));
    }
    Ok(x)
}

fn circle_chart(s: &str) -> Option<Word> {
    HalfChart::ALL
        .into_iter()
        .find(|h| h.name() == s)
        .map(half_chart_id)
}

fn chart_id(t: &Target, s: &str) -> Result<Word, Failure> {
    let named = match t.id {
        GalleryId::CircleHalfCharts => circle_chart(s),
        GalleryId::SphereStereo(_) => stereo_chart_id(s),
        GalleryId::Projective(_) => s
            .parse::<usize>()
            .ok()
            .filter(|i| *i >= 1)
            .map(projective_chart_id),
        GalleryId::Torus(_) => {
            let parts: Option<Vec<Word>> = s.split(',').map(circle_chart).collect();
            parts.filter(|p| p.len() > 1).map(|p| {
                p[1..]
                    .iter()
                    .fold(p[0].clone(), |acc, c| tuple(&[acc, c.clone()]))
            })
        }
        _ => None,
    };
    let id = match named {
        Some(w) => w,
        None => Word::new(s).map_err(|_| Failure::input(format!("unknown chart {s:?}")))?,
    };
    if t.m.atlas.chart(id.as_str()).is_none() {
        return Err(Failure::input(format!("{} has no chart {s:?}", t.id)));
    }
    Ok(id)
}

/// Parses `<i>:B(c;r)`, or `B(c;r)` in the first chart, into a computable ball code.
fn ball_arg(t: &Target, s: &str) -> Result<Word, Failure> {
    if !t.m.standard {
        return Err(Failure::input(format!(
            "{} has no computable ball literals",
            t.id
        )));
    }
    let (chart, lit) = match s.split_once(":B(") {
        Some((c, rest)) => (chart_id(t, c)?, format!("B({rest}")),
        None => {
            let first =
                t.m.atlas
                    .chart_id(0)
                    .ok_or_else(|| Failure::input(format!("{} has no first chart", t.id)))?;
            (first, s.to_string())
        }
    };
    let ball = RationalBall::parse_literal(lit.trim())?;
    if ball.dim() != t.m.dim() {
        return Err(Failure::input(format!(
            "{} needs balls in R^{}, got {}",
            t.id,
            t.m.dim(),
            ball.literal()
        )));
    }
    Ok(ball_code(chart.as_str(), &ball))
}

fn open_name(t: &Target, balls: &[String]) -> Result<Name, Failure> {
    let words = balls
        .iter()
        .map(|b| ball_arg(t, b).map(|c| tuple(&[c])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Name::finite(Discipline::Open, t.m.space_ref(), words))
}

/// `<i>:<ball literal>` for a computable ball code.
fn fmt_ball(p: &str, n: usize) -> String {
    match ball_code_parts(p, n) {
        Some((i, b)) => format!("{i}:{}", b.literal()),
        None => p.to_string(),
    }
}

/// Members of an intersection code, joined by ` & `.
fn fmt_code(t: &Target, w: &str) -> String {
    if !t.m.standard {
        return w.to_string();
    }
    match untuple_all(w) {
        Some(ms) => ms
            .iter()
            .map(|m| fmt_ball(m.as_str(), t.m.dim()))
            .collect::<Vec<_>>()
            .join(" & "),
        None => w.to_string(),
    }
}

fn fmt_box(b: &IBox) -> String {
    b.iter()
        .map(|i| format!("[{},{}]", fmt_decimal(&i.lo), fmt_decimal(&i.hi)))
        .collect::<Vec<_>>()
        .join(" x ")
}

pub fn name(gallery: &str, point: Option<&str>, open: &[String], budget: u64) -> Outcome {
    let t = target(gallery)?;
    let n = match point {
        Some(p) => t.m.point(carrier_point(&t, p)?),
        None => open_name(&t, open)?,
    };
    Ok(n.dump(budget))
}

pub fn eval(
    gallery: &str,
    chart: &str,
    point: &str,
    backward: bool,
    precision: u32,
    budget: u64,
) -> Outcome {
    let t = target(gallery)?;
    let id = chart_id(&t, chart)?;
    let c = t.m.atlas.chart(id.as_str()).expect("checked chart");
    let (input, direction) = if backward {
        let y = parse_vector(point)?;
        if y.len() != t.m.dim() {
            return Err(Failure::input(format!(
                "chart coordinates of {} have {} components",
                t.id,
                t.m.dim()
            )));
        }
        if c.backward_box(&ctopo::interval::box_point(&y), 8).is_none() {
            return Err(Failure::input(format!(
                "{point} is outside the image of chart {chart}"
            )));
        }
        (
            point_from_rational(&euclidean_space(t.m.dim()), y),
            Direction::Backward,
        )
    } else {
        let x = carrier_point(&t, point)?;
        if !c.in_domain(&x) {
            return Err(Failure::input(format!(
                "{point} is outside the domain of chart {chart}"
            )));
        }
        (t.m.point(x), Direction::Forward)
    };
    let out = chart_eval(&t.m, id.as_str(), direction)?.apply(&input)?;
    let mut s = String::new();
    let dir = if backward { "backward" } else { "forward" };
    writeln!(s, "chart {chart} ({id}) {dir} at {point}").unwrap();
    match approximate(&out, precision, budget) {
        Some((e, b)) => {
            writeln!(s, "enclosure {}", fmt_box(&e)).unwrap();
            writeln!(s, "width < 2^-{precision} at budget {b}").unwrap();
        }
        None => {
            writeln!(
                s,
                "Unknown: no enclosure of width < 2^-{precision} within budget {budget}"
            )
            .unwrap();
        }
    }
    Ok(s)
}

pub fn member(gallery: &str, point: &str, open: &[String], budget: u64) -> Outcome {
    let t = target(gallery)?;
    let x = t.m.point(carrier_point(&t, point)?);
    let w = open_name(&t, open)?;
    Ok(match member_semidecide(&x, &w, budget) {
        SemiDecision::Confirmed(step) => format!("Confirmed at step {step}\n"),
        SemiDecision::Unknown(b) => format!("Unknown after budget {b}\n"),
    })
}

pub fn separate(gallery: &str, a: &str, b: &str, budget: u64) -> Outcome {
    let t = target(gallery)?;
    let x = carrier_point(&t, a)?;
    let y = carrier_point(&t, b)?;
    match separate_points(&t.m.point(x.clone()), &t.m.point(y.clone()), budget) {
        Separation::Found { u, v, step } => {
            let mut s = String::new();
            writeln!(s, "separated at step {step}").unwrap();
            writeln!(s, "{}", fmt_code(&t, u.as_str())).unwrap();
            writeln!(s, "{}", fmt_code(&t, v.as_str())).unwrap();
            let sp = &t.m.space;
            let holds = sp.contains(u.as_str(), &x) != Some(false)
                && sp.contains(v.as_str(), &y) != Some(false)
                && sp.disjoint(u.as_str(), v.as_str(), 1);
            if !holds {
                return Err(Failure::contract(
                    "separating pair failed its post-check",
                    s,
                ));
            }
            Ok(s)
        }
        Separation::Unknown(b) => Ok(format!("Unknown after budget {b}\n")),
    }
}

/// `<i>:<f> in (<W code>)` for a member <<i, w>, f> of a restricted code.
fn fmt_restricted(t: &Target, member: &str) -> String {
    let parts = untuple(member, 2).and_then(|v| Some((untuple(v[0].as_str(), 2)?, v[1].clone())));
    match parts {
        Some((iw, f)) => match RationalBall::decode(f.as_str(), Some(t.m.dim())) {
            Ok(ball) => format!(
                "{}:{} in ({})",
                iw[0],
                ball.literal(),
                fmt_code(t, iw[1].as_str())
            ),
            Err(_) => member.to_string(),
        },
        None => member.to_string(),
    }
}

pub fn restrict(gallery: &str, point: &str, open: &[String], budget: u64) -> Outcome {
    let t = target(gallery)?;
    let x = t.m.point(carrier_point(&t, point)?);
    let w = open_name(&t, open)?;
    let sub = open_submanifold(&t.m, &w)?;
    let out = sub.restrict.apply(&x)?;
    let listed = out.stamped(budget);
    if listed.is_empty() {
        return Ok(format!("Unknown: nothing listed within budget {budget}\n"));
    }
    let mut s = String::new();
    for e in listed {
        let members: Vec<String> = untuple_all(e.word.as_str())
            .unwrap_or_default()
            .iter()
            .map(|m| fmt_restricted(&t, m.as_str()))
            .collect();
        writeln!(s, "{} {}", e.step + 1, members.join(" & ")).unwrap();
    }
    Ok(s)
}

pub fn embed_demo(samples: u32, precision: u32, budget: u64) -> Outcome {
    let mut s = String::new();
    let torus = torus_embedding_map();
    writeln!(s, "torus T^2 into R^3").unwrap();
    let cases = [
        vec![q(1, 1), q(0, 1), q(1, 1), q(0, 1)],
        vec![q(0, 1), q(1, 1), q(0, 1), q(1, 1)],
        vec![q(-1, 1), q(0, 1), q(0, 1), q(-1, 1)],
    ];
    for x in &cases {
        let want = torus_map_point(x);
        let out = torus.forward.apply(&torus.torus.point(x.clone()))?;
        write!(s, "  ({}) -> ({})", fmt_vector(x), fmt_vector(&want)).unwrap();
        match approximate(&out, precision, budget) {
            Some((e, b)) => {
                writeln!(s, "  enclosure width < 2^-{precision} at budget {b}").unwrap();
                if !box_contains(&e, &want) {
                    return Err(Failure::contract(
                        "torus enclosure misses the closed form",
                        s,
                    ));
                }
            }
            None => writeln!(s, "  Unknown within budget {budget}").unwrap(),
        }
    }

    let m = make(&GalleryId::CircleHalfCharts);
    let emb = embed_compact(&m, &circle_ball_charts())?;
    let fwd = emb.forward();
    let inv = emb.inverse();
    writeln!(
        s,
        "circle S^1 into R^{} by {} collapse maps",
        emb.q(),
        emb.components.len()
    )
    .unwrap();
    for j in 0..samples {
        let p = circle_point(&q(2 * j as i64 + 1 - samples as i64, 2));
        let gx = emb.closed_form(&p).ok_or_else(|| {
            Failure::contract(format!("no closed form at {}", fmt_vector(&p)), s.clone())
        })?;
        writeln!(s, "  x = ({})", fmt_vector(&p)).unwrap();
        writeln!(s, "    G(x) = ({})", fmt_vector(&gx)).unwrap();
        let image = fwd.apply(&m.point(p.clone()))?;
        match approximate(&image, precision, budget) {
            Some((e, b)) => {
                writeln!(s, "    G enclosure width < 2^-{precision} at budget {b}").unwrap();
                if !box_contains(&e, &gx) {
                    return Err(Failure::contract("embedding enclosure misses G(x)", s));
                }
            }
            None => writeln!(s, "    G Unknown within budget {budget}").unwrap(),
        }
        let back = inv.apply(&image)?;
        match approximate(&back, precision, budget) {
            Some((e, b)) => {
                writeln!(s, "    inverse enclosure {} at budget {b}", fmt_box(&e)).unwrap();
                if !box_contains(&e, &p) {
                    return Err(Failure::contract("inverse enclosure misses x", s));
                }
            }
            None => writeln!(s, "    inverse Unknown within budget {budget}").unwrap(),
        }
    }
    Ok(s)
}

pub fn selftest(criterion: Option<u8>) -> Outcome {
    let reports = match criterion {
        Some(id) => {
            vec![selftest::run(id).ok_or_else(|| Failure::input(format!("no criterion {id}")))?]
        }
        None => selftest::run_all(),
    };
    let mut s = String::new();
    for r in &reports {
        writeln!(s, "{r}").unwrap();
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::contract(format!("{failed} criteria failed"), s));
    }
    Ok(s)
}
