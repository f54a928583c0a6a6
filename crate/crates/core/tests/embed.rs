use ctopo::embed::{circle_ball_charts, embed_compact, CollapseMap};
use ctopo::espace::{enclosure, name_is_sound_for};
use ctopo::euclid::RationalBall;
use ctopo::gallery::circle_half_charts;
use ctopo::interval::{box_contains, box_width};
use ctopo::names::{member_semidecide, SemiDecision};
use ctopo::rational::{circle_point, pow2_neg, q, qi};

#[test]
fn collapse_values() {
    let m = circle_half_charts();
    let g = CollapseMap::new(
        &m,
        "0",
        RationalBall {
            center: vec![qi(0)],
            radius: qi(1),
        },
    )
    .unwrap();
    assert_eq!(g.closed_form(&[qi(0), qi(1)]), Some(vec![qi(0), qi(-1)]));
    assert_eq!(g.closed_form(&[qi(1), qi(0)]), Some(vec![qi(0), qi(1)]));
    assert_eq!(g.closed_form(&[qi(0), qi(-1)]), Some(vec![qi(0), qi(1)]));
    let x = m.point(vec![q(3, 5), q(4, 5)]);
    let y = g.transducer().apply(&x).unwrap();
    let want = g.closed_form(&[q(3, 5), q(4, 5)]).unwrap();
    assert!(name_is_sound_for(&y, &want, 600));
    let e = enclosure(&y, 600).unwrap();
    assert!(
        box_contains(&e, &want) && box_width(&e) < pow2_neg(12),
        "{e:?}"
    );
    // off U the name shrinks onto the pole
    let x = m.point(vec![qi(0), qi(-1)]);
    let y = g.transducer().apply(&x).unwrap();
    let e = enclosure(&y, 600).unwrap();
    assert!(
        box_contains(&e, &g.pole()) && box_width(&e) < pow2_neg(8),
        "{e:?}"
    );
}

#[test]
fn preimages() {
    let m = circle_half_charts();
    let g = CollapseMap::new(
        &m,
        "0",
        RationalBall {
            center: vec![qi(0)],
            radius: qi(1),
        },
    )
    .unwrap();
    let cap = RationalBall {
        center: vec![qi(0), qi(1)],
        radius: q(1, 2),
    };
    let w = g.collapse_preimage(&cap).unwrap();
    let x = m.point(vec![qi(0), qi(-1)]);
    assert!(matches!(
        member_semidecide(&x, &w, 4000),
        SemiDecision::Confirmed(_)
    ));
    let low = RationalBall {
        center: vec![qi(0), qi(-1)],
        radius: q(1, 2),
    };
    let w = g.collapse_preimage(&low).unwrap();
    let x = m.point(vec![qi(0), qi(1)]);
    assert!(matches!(
        member_semidecide(&x, &w, 4000),
        SemiDecision::Confirmed(_)
    ));
    let all = RationalBall {
        center: vec![qi(0), qi(0)],
        radius: qi(2),
    };
    let w = g.collapse_preimage(&all).unwrap();
    for t in [qi(0), q(1, 3), qi(2), qi(-5)] {
        let x = m.point(circle_point(&t));
        assert!(matches!(
            member_semidecide(&x, &w, 4000),
            SemiDecision::Confirmed(_)
        ));
    }
}

#[test]
fn circle_embedding_round_trip() {
    let m = circle_half_charts();
    let e = embed_compact(&m, &circle_ball_charts()).unwrap();
    assert_eq!(e.q(), 8);
    let p = vec![q(3, 5), q(4, 5)];
    let t0 = std::time::Instant::now();
    let gx = e.forward().apply(&m.point(p.clone())).unwrap();
    let want = e.closed_form(&p).unwrap();
    let enc = enclosure(&gx, 900).unwrap();
    println!(
        "forward {:?} width {}",
        t0.elapsed(),
        ctopo::rational::to_f64(&box_width(&enc))
    );
    assert!(box_contains(&enc, &want));
    let back = e.inverse().apply(&gx).unwrap();
    let enc = enclosure(&back, 900).unwrap();
    println!(
        "round trip {:?} width {}",
        t0.elapsed(),
        ctopo::rational::to_f64(&box_width(&enc))
    );
    assert!(box_contains(&enc, &p) && box_width(&enc) < pow2_neg(12));
}
