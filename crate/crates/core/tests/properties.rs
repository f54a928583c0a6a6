use ctopo::decision::{ball_disjoint, ball_subset};
use ctopo::enumerate::{pair, unpair};
use ctopo::espace::name_is_sound_for;
use ctopo::euclid::{
    euclidean_space, h_w_box, h_w_point, point_from_rational, stereo_inv_point, stereo_point,
    RationalBall,
};
use ctopo::interval::{box_contains, box_point, Interval};
use ctopo::rational::{circle_point, magnitude_bits, neg_log2_floor, pow2, pow2_neg, q, Q};
use ctopo::words::{
    nat_decode, nat_encode_u64, rat_decode, rat_encode, scan_wrapped, tuple, untuple_all, wrap,
};
use num::BigInt;
use proptest::prelude::*;

fn bits() -> impl Strategy<Value = String> {
    proptest::collection::vec(any::<bool>(), 0..40)
        .prop_map(|v| v.into_iter().map(|b| if b { '1' } else { '0' }).collect())
}

fn rat() -> impl Strategy<Value = Q> {
    (-2000i64..2000, 1i64..500).prop_map(|(n, d)| q(n, d))
}

fn ball(dim: usize) -> impl Strategy<Value = RationalBall> {
    (
        proptest::collection::vec((-40i64..40, 1i64..9), dim),
        1i64..40,
        1i64..9,
    )
        .prop_map(|(c, rn, rd)| RationalBall {
            center: c.into_iter().map(|(n, d)| q(n, d)).collect(),
            radius: q(rn, rd),
        })
}

fn sq_dist(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #[test]
    fn wrapped_blocks_scan_back(parts in proptest::collection::vec(bits(), 0..12)) {
        let s: String = parts.iter().map(|p| wrap(p).as_str().to_string()).collect();
        let got: Vec<String> = scan_wrapped(&s).iter().map(|w| w.as_str().to_string()).collect();
        prop_assert_eq!(got, parts);
    }

    #[test]
    fn tuples_split_back(parts in proptest::collection::vec(bits(), 1..6)) {
        let t = tuple(&parts);
        let got: Vec<String> = untuple_all(t.as_str())
            .unwrap()
            .iter()
            .map(|w| w.as_str().to_string())
            .collect();
        prop_assert_eq!(got, parts);
    }

    #[test]
    fn naturals_round_trip(n in any::<u64>()) {
        let w = nat_encode_u64(n);
        prop_assert_eq!(nat_decode(w.as_str()).unwrap(), BigInt::from(n));
    }

    #[test]
    fn rationals_round_trip(x in rat()) {
        prop_assert_eq!(rat_decode(rat_encode(&x).as_str()).unwrap(), x);
    }

    #[test]
    fn binary_magnitudes_are_tight(n in 1i64..1 << 40, d in 1i64..1 << 40) {
        let x = q(n, d);
        let e = magnitude_bits(&x);
        prop_assert!(x < pow2(e));
        prop_assert!(e == 0 || x >= pow2(e - 1));
        let k = neg_log2_floor(&x).unwrap();
        prop_assert!(pow2_neg(k) <= x);
        prop_assert!(k == 0 || pow2_neg(k - 1) > x);
    }

    #[test]
    fn pairing_is_bijective(a in 0u64..1 << 20, b in 0u64..1 << 20) {
        prop_assert_eq!(unpair(pair(a, b)), (a, b));
    }

    #[test]
    fn interval_arithmetic_encloses(x in rat(), y in rat(), dx in 0i64..50, dy in 0i64..50) {
        let ix = Interval::new(&x - q(dx, 100), &x + q(dx, 100));
        let iy = Interval::new(&y - q(dy, 100), &y + q(dy, 100));
        prop_assert!(ix.add(&iy).contains(&(&x + &y)));
        prop_assert!(ix.sub(&iy).contains(&(&x - &y)));
        prop_assert!(ix.mul(&iy).contains(&(&x * &y)));
        prop_assert!(ix.square().contains(&(&x * &x)));
        if let Some(d) = ix.div(&iy) {
            prop_assert!(d.contains(&(&x / &y)));
        }
        let sq = &x * &x;
        let r = Interval::point(sq.clone()).sqrt(30);
        prop_assert!(r.contains(&num::Signed::abs(&x)));
    }

    #[test]
    fn ball_relations_match_distances(a in ball(2), b in ball(2)) {
        let d2 = sq_dist(&a.center, &b.center);
        let sum = &a.radius + &b.radius;
        prop_assert_eq!(ball_disjoint(&a, &b), d2 >= &sum * &sum);
        let slack = &b.radius - &a.radius;
        let inside = slack >= Q::from_integer(0.into()) && d2 <= &slack * &slack;
        prop_assert_eq!(ball_subset(&a, &b), inside);
    }

    #[test]
    fn plane_point_names_are_sound(x in rat(), y in rat()) {
        let n = point_from_rational(&euclidean_space(2), vec![x.clone(), y.clone()]);
        prop_assert!(name_is_sound_for(&n, &[x, y], 200));
    }

    #[test]
    fn ball_map_boxes_enclose_points(w in ball(2), s in -9i64..9, t in -9i64..9) {
        let x: Vec<Q> = w
            .center
            .iter()
            .zip([s, t])
            .map(|(c, k)| c + &w.radius * q(k, 16))
            .collect();
        let exact = h_w_point(&w, &x).unwrap();
        let bx = h_w_box(&w, &box_point(&x)).unwrap();
        prop_assert!(box_contains(&bx, &exact));
    }

    #[test]
    fn stereographic_round_trip(a in rat(), b in rat()) {
        let y = vec![a, b];
        for r in [1i8, -1] {
            let p = stereo_inv_point(r, &y);
            let n2: Q = p.iter().map(|c| c * c).sum();
            prop_assert_eq!(n2, q(1, 1));
            prop_assert_eq!(stereo_point(r, &p), Some(y.clone()));
        }
    }

    #[test]
    fn circle_parametrization_is_on_circle(t in rat()) {
        let p = circle_point(&t);
        prop_assert_eq!(&p[0] * &p[0] + &p[1] * &p[1], q(1, 1));
    }
}
