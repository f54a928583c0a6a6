use ctopo::decision::ball_subset;
use ctopo::espace::{enclosure, name_is_sound_for};
use ctopo::euclid::{euclidean_space, point_from_rational, RationalBall};
use ctopo::gallery::{
    chart_value, circle_half_charts, euclidean, line_point, line_two_origins, make,
    parse_gallery_id, projective, projective_chart_id, projective_point, reference_translators,
    shifted_line, sphere_stereo, torus, torus_embedding_map,
};
use ctopo::interval::{box_contains, box_width};
use ctopo::manifold::{
    ball_code, ball_code_parts, chart_eval, compatibility_certificate, normalize_balls,
    open_submanifold, product_manifold, product_point, project_point, pushforward_manifold,
    refine_atlas, transition, Bijection, CompatReport, Direction, RefineMode,
};
use ctopo::names::{member_semidecide, Discipline, Emitter, Name, SemiDecision, Translator};
use ctopo::rational::{circle_point, pow2_neg, q, qi, sphere_point, Q};
use ctopo::words::{tuple, wrap, Word};
use ctopo::{Error, Space};

fn ball(c: &[Q], r: Q) -> RationalBall {
    RationalBall {
        center: c.to_vec(),
        radius: r,
    }
}

fn circle_samples(k: usize) -> Vec<Vec<Q>> {
    (1..=k as i64)
        .map(|i| circle_point(&q(3 * i - 40, 7)))
        .collect()
}

fn check_reference(id: &str, samples: Vec<Vec<Q>>) {
    let gid = parse_gallery_id(id).unwrap();
    let m = make(&gid);
    let (r, to, from) = reference_translators(&gid, &m).unwrap();
    let report = compatibility_certificate(&m.space_ref(), &r, &to, &from, &samples, 400);
    assert_eq!(report.checked, 2 * samples.len());
    assert!(report.passed(), "{id}: {:?}", report.failures);
}

#[test]
fn gallery_matches_reference_structures() {
    check_reference(
        "euclid:2",
        (0..25).map(|i| vec![q(i - 12, 5), q(7 - i, 3)]).collect(),
    );
    check_reference("circle", circle_samples(25));
    check_reference("sphere-stereo:1", circle_samples(25));
    check_reference(
        "sphere-stereo:2",
        (0..25)
            .map(|i| sphere_point(&[q(i - 12, 4), q(i % 5, 3)]))
            .collect(),
    );
    check_reference(
        "punctured-sphere:2",
        (0..25)
            .map(|i| sphere_point(&[q(i - 12, 4), q(i % 5, 3)]))
            .collect(),
    );
    check_reference(
        "projective:2",
        (0..25)
            .map(|i| projective_point(&[qi(i % 4 + 1), qi(i - 12), qi(3 - i % 7)]).unwrap())
            .collect(),
    );
    check_reference(
        "torus:2",
        circle_samples(25)
            .into_iter()
            .zip(circle_samples(25).into_iter().rev())
            .map(|(a, b)| a.into_iter().chain(b).collect())
            .collect(),
    );
}

#[test]
fn identity_translators_pass() {
    let m = circle_half_charts();
    let id = Translator::identity(m.space_ref(), Discipline::Point);
    let report = compatibility_certificate(
        &m.space_ref(),
        &m.space_ref(),
        &id,
        &id,
        &circle_samples(10),
        300,
    );
    assert!(report.passed(), "{:?}", report.failures);
}

#[test]
fn identity_atlas_balls_are_rational_balls() {
    let m = euclidean(2);
    let b = ball(&[q(1, 2), qi(0)], q(1, 4));
    let code = wrap(ball_code("0", &b).as_str());
    for x in [
        vec![q(1, 2), qi(0)],
        vec![q(5, 8), q(1, 8)],
        vec![q(3, 4), qi(0)],
    ] {
        assert_eq!(m.space.contains(code.as_str(), &x), Some(b.contains(&x)));
    }
    let f = chart_eval(&m, "0", Direction::Forward).unwrap();
    let x = vec![q(1, 3), q(-2, 7)];
    let out = f.apply(&m.point(x.clone())).unwrap();
    let e = enclosure(&out, 400).unwrap();
    assert!(box_contains(&e, &x) && box_width(&e) < pow2_neg(12));
}

#[test]
fn half_chart_ball_is_half_circle() {
    let m = circle_half_charts();
    let code = wrap(ball_code("0", &ball(&[qi(0)], qi(1))).as_str());
    for p in circle_samples(20) {
        let upper = p[1] > Q::from_integer(0.into());
        assert_eq!(m.space.contains(code.as_str(), &p), Some(upper), "{p:?}");
    }
}

#[test]
fn code_outside_index_set_is_empty() {
    let m = circle_half_charts();
    let bad = wrap(ball_code("111", &ball(&[qi(0)], qi(1))).as_str());
    let w = Name::finite(Discipline::Open, m.space_ref(), vec![bad]);
    for p in circle_samples(5) {
        assert!(!member_semidecide(&m.point(p), &w, 2000).is_confirmed());
    }
}

#[test]
fn sphere_and_projective_chart_values() {
    let s = sphere_stereo(1);
    assert_eq!(chart_value(&s, "0", &[qi(0), qi(-1)]), Some(vec![qi(0)]));
    let p = projective(2);
    let v = projective_point(&[qi(1), qi(2), qi(3)]).unwrap();
    let id = projective_chart_id(1);
    let out = chart_eval(&p, id.as_str(), Direction::Forward)
        .unwrap()
        .apply(&p.point(v))
        .unwrap();
    let e = enclosure(&out, 400).unwrap();
    assert!(box_contains(&e, &[qi(2), qi(3)]), "{e:?}");
}

#[test]
fn transition_on_same_chart_is_identity() {
    let m = circle_half_charts();
    let t = transition(&m, "10", "10").unwrap();
    let x = point_from_rational(&euclidean_space(1), vec![q(-5, 13)]);
    let e = enclosure(&t.apply(&x).unwrap(), 600).unwrap();
    assert!(e[0].contains(&q(-5, 13)) && box_width(&e) < pow2_neg(16));
}

#[test]
fn two_origin_charts_share_values() {
    let m = line_two_origins();
    let x = line_point(q(2, 3));
    assert_eq!(chart_value(&m, "0", &x), Some(vec![q(2, 3)]));
    assert_eq!(chart_value(&m, "1", &x), Some(vec![q(2, 3)]));
    assert!(!m.atlas.is_hausdorff());
}

#[test]
fn shifted_line_forward_adds_the_shift() {
    let a = point_from_rational(&euclidean_space(1), vec![q(1, 3)]);
    let m = shifted_line(&a);
    let f = chart_eval(&m, "0", Direction::Forward).unwrap();
    for x in [qi(0), q(5, 7), q(-9, 4)] {
        let out = f.apply(&m.point(vec![x.clone()])).unwrap();
        let e = enclosure(&out, 1000).unwrap();
        let want = &x + q(1, 3);
        assert!(
            e[0].contains(&want) && box_width(&e) < pow2_neg(20),
            "{e:?}"
        );
    }
}

#[test]
fn normalized_balls_of_the_circle() {
    let m = circle_half_charts();
    let n = normalize_balls(&m).unwrap();
    let inside = ball_code("0", &ball(&[qi(0)], q(1, 2)));
    let outside = ball_code("0", &ball(&[qi(5)], qi(1)));
    assert!(n.is_nonempty(inside.as_str()));
    assert!(!n.is_nonempty(outside.as_str()));

    // listed exactly when the ball fits in the chart image (-1, 1)
    let unit = ball(&[qi(0)], qi(1));
    let listed = n.nonempty_codes(300);
    let expected: Vec<Word> = (0..300)
        .map(|k| m.preds.code(k))
        .filter(|c| {
            let (i, b) = ball_code_parts(c.as_str(), 1).unwrap();
            ["0", "1", "10", "11"].contains(&i.as_str()) && ball_subset(&b, &unit)
        })
        .collect();
    assert!(!expected.is_empty());
    assert_eq!(listed, expected);

    let p = circle_point(&q(1, 3));
    let pruned = n.to_pruned.apply(&m.point(p.clone())).unwrap();
    assert!(!pruned.query(400).is_empty());
    assert!(name_is_sound_for(&pruned, &p, 400));
    let back = n.from_pruned.apply(&pruned).unwrap();
    assert!(name_is_sound_for(&back, &p, 400));
}

#[test]
fn identity_atlas_balls_are_all_nonempty() {
    let m = euclidean(1);
    assert_eq!(normalize_balls(&m).unwrap().nonempty_codes(64).len(), 64);
    assert!(matches!(
        normalize_balls(&torus(2)),
        Err(Error::UnsupportedFamily(_))
    ));
}

#[test]
fn ball_image_refinement_is_inclusion() {
    let m = euclidean(1);
    let r = refine_atlas(&m, RefineMode::BallImage).unwrap();
    let v = ball(&[q(1, 2)], q(1, 2));
    let id = ball_code("0", &v);
    let c = r.manifold.atlas.chart(id.as_str()).unwrap();
    assert_eq!(c.forward(&[q(1, 3)]), Some(vec![q(1, 3)]));
    assert!(!c.in_domain(&[qi(2)]));
}

#[test]
fn full_space_refinement_applies_h() {
    let m = euclidean(1);
    let r = refine_atlas(&m, RefineMode::FullSpace).unwrap();
    let id = ball_code("0", &ball(&[qi(0)], qi(1)));
    let c = r.manifold.atlas.chart(id.as_str()).unwrap();
    assert_eq!(c.forward(&[q(1, 2)]), Some(vec![q(2, 3)]));
    let img = c
        .forward_box(&[ctopo::interval::Interval::point(q(1, 2))], 40)
        .unwrap();
    assert!(img[0].contains(&q(2, 3)) && box_width(&img) < pow2_neg(30));

    for x in [q(1, 5), q(-3, 4), qi(3)] {
        let p = m.point(vec![x.clone()]);
        let there = r.to_refined.apply(&p).unwrap();
        assert!(name_is_sound_for(&there, std::slice::from_ref(&x), 300));
        let back = r.from_refined.apply(&there).unwrap();
        assert!(name_is_sound_for(&back, std::slice::from_ref(&x), 300));
        assert!(!back.query(300).is_empty());
    }

    let code = tuple(&[id.as_str(), ball(&[qi(0)], qi(1)).encode().as_str()]);
    let open = r.refined_ball_as_open(code.as_str()).unwrap();
    // h^-1(B(0, 1)) is the open interval of radius (sqrt 5 - 1) / 2 around 0
    for (x, b) in [(qi(0), 1000), (q(1, 4), 1000), (q(1, 2), 16000)] {
        assert!(member_semidecide(&m.point(vec![x]), &open, b).is_confirmed());
    }
    let outer = m.point(vec![q(7, 10)]);
    assert!(!member_semidecide(&outer, &open, 4000).is_confirmed());
}

fn shift_by_one() -> Bijection {
    let one = qi(1);
    let one2 = one.clone();
    Bijection {
        label: "shift".into(),
        ambient_out: 1,
        forward: Box::new(move |x| Some(vec![&x[0] + &one])),
        inverse: Box::new(move |x| Some(vec![&x[0] - &one2])),
        forward_box: Box::new(|b, _| Some(vec![b[0].add_q(&qi(1))])),
        inverse_box: Box::new(|b, _| Some(vec![b[0].add_q(&qi(-1))])),
    }
}

#[test]
fn pushed_balls_are_shifted_intervals() {
    let m = pushforward_manifold(&euclidean(1), shift_by_one());
    let b = ball(&[q(1, 2)], q(1, 4));
    let code = wrap(ball_code("0", &b).as_str());
    for (x, inside) in [
        (q(3, 2), true),
        (q(13, 8), true),
        (q(7, 4), false),
        (q(1, 2), false),
        (q(5, 4), false),
    ] {
        assert_eq!(
            m.space.contains(code.as_str(), std::slice::from_ref(&x)),
            Some(inside),
            "{x}"
        );
    }
}

#[test]
fn identity_pushforward_keeps_names() {
    let base = euclidean(1);
    let m = pushforward_manifold(
        &base,
        Bijection {
            label: "id".into(),
            ambient_out: 1,
            forward: Box::new(|x| Some(x.to_vec())),
            inverse: Box::new(|x| Some(x.to_vec())),
            forward_box: Box::new(|b, _| Some(b.to_vec())),
            inverse_box: Box::new(|b, _| Some(b.to_vec())),
        },
    );
    let x = vec![q(2, 9)];
    assert_eq!(base.point(x.clone()).query(300), m.point(x).query(300));
}

#[test]
fn product_of_lines_is_the_plane() {
    let l = euclidean(1);
    let p = product_manifold(&l, &l);
    let (a, b) = (q(1, 3), q(-4, 5));
    let n = product_point(&p, &l.point(vec![a.clone()]), &l.point(vec![b.clone()]));
    assert!(!n.query(200).is_empty());
    assert!(name_is_sound_for(&n, &[a.clone(), b.clone()], 200));
    let e = enclosure(&n, 400).unwrap();
    assert!(box_contains(&e, &[a.clone(), b.clone()]) && box_width(&e) < pow2_neg(8));

    let u = ball(&[qi(0)], qi(1));
    let v = ball(&[qi(0)], q(1, 2));
    let word = tuple(&[
        tuple(&["0", "0"]).as_str(),
        tuple(&[u.encode().as_str(), v.encode().as_str()]).as_str(),
    ]);
    let code = wrap(word.as_str());
    for (x, inside) in [
        (vec![q(1, 2), q(1, 4)], true),
        (vec![q(1, 2), q(3, 4)], false),
        (vec![q(3, 2), qi(0)], false),
    ] {
        assert_eq!(p.space.contains(code.as_str(), &x), Some(inside), "{x:?}");
    }
}

#[test]
fn torus_points_project_to_factors() {
    let c = circle_half_charts();
    let t = torus(2);
    let (x, y) = (circle_point(&q(1, 2)), circle_point(&q(-3, 2)));
    let n = product_point(&t, &c.point(x.clone()), &c.point(y.clone()));
    let xy: Vec<Q> = x.iter().chain(&y).cloned().collect();
    assert!(!n.query(300).is_empty());
    assert!(name_is_sound_for(&n, &xy, 300));
    let px = project_point(&n, 0, &c);
    let py = project_point(&n, 1, &c);
    assert!(name_is_sound_for(&px, &x, 300) && !px.query(300).is_empty());
    assert!(name_is_sound_for(&py, &y, 300) && !py.query(300).is_empty());
}

#[test]
fn torus_map_inverse() {
    let te = torus_embedding_map();
    let y = point_from_rational(&euclidean_space(3), vec![qi(0), qi(2), qi(1)]);
    let back = te.inverse.apply(&y).unwrap();
    let e = enclosure(&back, 1000).unwrap();
    assert!(
        box_contains(&e, &[qi(1), qi(0), qi(1), qi(0)]) && box_width(&e) < pow2_neg(16),
        "{e:?}"
    );
}

fn whole_line(m: &ctopo::manifold::Manifold) -> Name {
    let e = euclidean_space(1);
    Name::new(Discipline::Open, m.space_ref(), move |b| {
        let mut em = Emitter::new();
        for t in 0..b {
            em.emit(t, wrap(ball_code("0", &e.code_ball(t)).as_str()));
        }
        em.finish()
    })
}

#[test]
fn restriction_to_the_whole_line() {
    let m = euclidean(1);
    let sub = open_submanifold(&m, &whole_line(&m)).unwrap();
    for (x, b) in [(qi(0), 3000), (q(-5, 7), 3000), (q(-7, 2), 30000)] {
        let r = sub.restrict.apply(&m.point(vec![x.clone()])).unwrap();
        assert!(!r.query(b).is_empty(), "{x}");
        assert!(name_is_sound_for(&r, std::slice::from_ref(&x), b));
        let back = sub.include.apply(&r).unwrap();
        assert!(name_is_sound_for(&back, std::slice::from_ref(&x), b));
    }
}

#[test]
fn open_submanifold_rejects_point_names() {
    let m = euclidean(1);
    assert!(open_submanifold(&m, &m.point(vec![qi(0)])).is_err());
}

#[test]
fn corrupted_certificate_is_data() {
    let report = CompatReport::default();
    assert!(report.passed());
    let m = circle_half_charts();
    let s = sphere_stereo(1);
    // a translator that forgets the point entirely lists nothing and is incomplete
    let empty = Translator::new(
        "silent",
        Discipline::Point,
        m.space.label(),
        Discipline::Point,
        s.space_ref(),
        |_: &Name| std::sync::Arc::new(|_| Vec::new()),
    );
    let id = Translator::identity(s.space_ref(), Discipline::Point);
    let r = compatibility_certificate(
        &m.space_ref(),
        &s.space_ref(),
        &empty,
        &id,
        &circle_samples(3),
        200,
    );
    assert!(!r.passed());
    assert!(matches!(
        member_semidecide(
            &m.point(circle_point(&qi(1))),
            &Name::finite(Discipline::Open, m.space_ref(), vec![]),
            100
        ),
        SemiDecision::Unknown(_)
    ));
}
