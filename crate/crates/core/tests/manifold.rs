use std::sync::Arc;

use ctopo::decision::ball_subset;
use ctopo::espace::{enclosure, name_is_sound_for, separate_points, Separation};
use ctopo::euclid::{euclidean_space, point_from_rational, RationalBall};
use ctopo::gallery::{
    circle_half_charts, euclidean, line_point, line_two_origins, origins, sphere_stereo,
};
use ctopo::interval::box_width;
use ctopo::manifold::ball_code;
use ctopo::manifold::{chart_eval, open_submanifold, transition, Direction};
use ctopo::names::{Discipline, Emitter, Name};
use ctopo::rational::{pow2_neg, q, qi};
use ctopo::words::wrap;

#[test]
fn circle_forward_and_backward() {
    let m = circle_half_charts();
    let x = m.point(vec![qi(0), qi(1)]);
    let y = chart_eval(&m, "0", Direction::Forward)
        .unwrap()
        .apply(&x)
        .unwrap();
    let e = enclosure(&y, 400).unwrap();
    assert!(e[0].contains(&qi(0)) && box_width(&e) < pow2_neg(16));
    let p = point_from_rational(&euclidean_space(1), vec![q(3, 5)]);
    let back = chart_eval(&m, "0", Direction::Backward)
        .unwrap()
        .apply(&p)
        .unwrap();
    let e = enclosure(&back, 400).unwrap();
    assert!(e[0].contains(&q(3, 5)) && e[1].contains(&q(4, 5)), "{e:?}");
    assert!(name_is_sound_for(&back, &[q(3, 5), q(4, 5)], 400));
}

#[test]
fn circle_transition() {
    let m = circle_half_charts();
    let t = transition(&m, "0", "10").unwrap();
    let p = point_from_rational(&euclidean_space(1), vec![q(3, 5)]);
    let out = t.apply(&p).unwrap();
    let e = enclosure(&out, 900).unwrap();
    assert!(
        e[0].contains(&q(4, 5)) && box_width(&e) < pow2_neg(20),
        "{e:?}"
    );
}

#[test]
fn sphere_transition() {
    let m = sphere_stereo(2);
    let t = transition(&m, "0", "1").unwrap();
    let p = point_from_rational(&euclidean_space(2), vec![qi(2), qi(0)]);
    let e = enclosure(&t.apply(&p).unwrap(), 900).unwrap();
    assert!(e[0].contains(&q(1, 2)) && e[1].contains(&qi(0)), "{e:?}");
}

fn unit_interval(m: &ctopo::manifold::Manifold) -> Name {
    let e = euclidean_space(1);
    let w = RationalBall {
        center: vec![q(1, 2)],
        radius: q(1, 2),
    };
    Name::new(Discipline::Open, m.space_ref(), move |b| {
        let mut em = Emitter::new();
        for t in 0..b {
            let v = e.code_ball(t);
            if ball_subset(&v, &w) {
                em.emit(t, wrap(ball_code("0", &v).as_str()));
            }
        }
        em.finish()
    })
}

#[test]
fn restriction_to_unit_interval() {
    let m = euclidean(1);
    let w = unit_interval(&m);
    let sub = open_submanifold(&m, &w).unwrap();
    let x = m.point(vec![q(1, 2)]);
    let r = sub.restrict.apply(&x).unwrap();
    let words = r.query(2000);
    assert!(!words.is_empty());
    assert!(name_is_sound_for(&r, &[q(1, 2)], 2000));
    let out = m.point(vec![qi(2)]);
    assert!(sub.restrict.apply(&out).unwrap().query(20000).is_empty());
    let back = sub.include.apply(&r).unwrap();
    assert!(name_is_sound_for(&back, &[q(1, 2)], 2000));
}

#[test]
fn two_origins_timing() {
    let m = line_two_origins();
    let (o, o2) = origins();
    let t0 = std::time::Instant::now();
    let s = separate_points(&m.point(o), &m.point(o2), 1_000_000);
    println!("origins {:?} in {:?}", s, t0.elapsed());
    assert!(matches!(s, Separation::Unknown(_)));
    let s = separate_points(
        &m.point(line_point(q(1, 3))),
        &m.point(line_point(q(1, 2))),
        10_000,
    );
    assert!(matches!(s, Separation::Found { .. }), "{s:?}");
    let _ = Arc::new(0);
}
