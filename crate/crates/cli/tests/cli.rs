use std::process::{Command, Output};

use ctopo::decision::ball_disjoint;
use ctopo::euclid::RationalBall;
use ctopo::rational::{parse_decimal, pow2_neg, qi, Q};

fn ctopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctopo"))
        .args(args)
        .output()
        .expect("run ctopo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

/// Endpoints of `[lo,hi] x [lo,hi] ...` on an `enclosure` line.
fn enclosure(text: &str) -> Vec<(Q, Q)> {
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix("enclosure "))
        .expect("enclosure line");
    line.split(" x ")
        .map(|iv| {
            let inner = iv.trim_start_matches('[').trim_end_matches(']');
            let (lo, hi) = inner.split_once(',').expect("interval");
            (parse_decimal(lo).unwrap(), parse_decimal(hi).unwrap())
        })
        .collect()
}

/// `<i>:B(...)` back to its chart index and ball.
fn ball_line(s: &str) -> (String, RationalBall) {
    let (i, lit) = s.split_once(':').expect("chart index");
    (
        i.to_string(),
        RationalBall::parse_literal(lit).expect("ball literal"),
    )
}

#[test]
fn stereographic_chart_at_south_pole() {
    let o = ctopo(&[
        "eval",
        "sphere-stereo:1",
        "--chart",
        "s+1",
        "--point",
        "0,-1",
        "--precision",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let e = enclosure(&stdout(&o));
    assert_eq!(e.len(), 1);
    let (lo, hi) = &e[0];
    let zero = qi(0);
    assert!(lo <= &zero && &zero <= hi);
    assert!(hi - lo < pow2_neg(16));
}

#[test]
fn plane_points_separate() {
    let o = ctopo(&[
        "separate", "euclid:2", "--points", "(0,0)", "(0,1)", "--budget", "10000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("separated"));
    let (i, u) = ball_line(lines[1]);
    let (j, v) = ball_line(lines[2]);
    assert_eq!((i.as_str(), j.as_str()), ("0", "0"));
    let dist2 = |c: &[Q], x: &[Q]| -> Q { c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum() };
    let r2 = |b: &RationalBall| &b.radius * &b.radius;
    assert!(dist2(&u.center, &[qi(0), qi(0)]) < r2(&u));
    assert!(dist2(&v.center, &[qi(0), qi(1)]) < r2(&v));
    assert!(ball_disjoint(&u, &v));
}

#[test]
fn far_point_membership_stays_unknown() {
    let o = ctopo(&[
        "member", "euclid:1", "--point", "2", "--open", "B(0;1)", "--budget", "1000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Unknown"));
}

#[test]
fn inner_point_membership_is_confirmed() {
    let o = ctopo(&["member", "euclid:1", "--point", "1/3", "--open", "0:B(0;1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Confirmed"));
}

#[test]
fn two_origins_do_not_separate() {
    let o = ctopo(&[
        "separate",
        "two-origins",
        "--points",
        "0,0",
        "0,1",
        "--budget",
        "20000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Unknown"));
}

#[test]
fn named_charts_resolve() {
    let o = ctopo(&[
        "eval",
        "circle",
        "--chart",
        "f+",
        "--point",
        "3/5,4/5",
        "--precision",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let e = enclosure(&stdout(&o));
    let want = Q::new(3.into(), 5.into());
    assert!(e[0].0 <= want && want <= e[0].1);

    let o = ctopo(&[
        "eval",
        "projective:2",
        "--chart",
        "1",
        "--point",
        "1,2,3",
        "--precision",
        "10",
    ]);
    let e = enclosure(&stdout(&o));
    assert!(e[0].0 <= qi(2) && qi(2) <= e[0].1);
    assert!(e[1].0 <= qi(3) && qi(3) <= e[1].1);
}

#[test]
fn backward_chart_lands_on_the_circle() {
    let o = ctopo(&[
        "eval",
        "circle",
        "--chart",
        "g-",
        "--point",
        "-1/2",
        "--backward",
        "--precision",
        "12",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let e = enclosure(&stdout(&o));
    assert!(e[0].1 < qi(0));
    let y = Q::new((-1).into(), 2.into());
    assert!(e[1].0 <= y && y <= e[1].1);
}

#[test]
fn restriction_lists_codes_inside_w() {
    let o = ctopo(&[
        "restrict",
        "euclid:1",
        "--point",
        "1/3",
        "--open",
        "B(1/10;1/10)",
        "--budget",
        "3000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.is_empty() && !text.starts_with("Unknown"));
    assert!(text.lines().all(|l| l.contains("in (0:B(1/10;1/10))")));

    let o = ctopo(&[
        "restrict",
        "euclid:1",
        "--point",
        "2",
        "--open",
        "B(1/10;1/10)",
        "--budget",
        "3000",
    ]);
    assert!(stdout(&o).starts_with("Unknown"));
}

#[test]
fn name_dump_is_deterministic() {
    let args = ["name", "circle", "--point", "3/5,4/5", "--budget", "40"];
    let a = ctopo(&args);
    let b = ctopo(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines() {
        let (step, _) = line.split_once(' ').expect("record");
        assert!(step.parse::<u64>().is_ok());
    }
}

#[test]
fn malformed_input_exits_with_one() {
    for args in [
        &["eval", "nowhere:1", "--chart", "0", "--point", "0"][..],
        &["eval", "euclid:1", "--chart", "0", "--point", "0,0"],
        &["eval", "circle", "--chart", "h+", "--point", "1,0"],
        &["eval", "circle", "--chart", "f+", "--point", "1,1"],
        &["member", "euclid:1", "--point", "x", "--open", "B(0;1)"],
        &["member", "euclid:1", "--point", "0", "--open", "B(0;"],
        &["frobnicate"],
        &["separate", "euclid:2", "--points", "0,0"],
    ] {
        let o = ctopo(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(ctopo(&["--help"]).status.code(), Some(0));
}

#[test]
fn embed_demo_runs() {
    let o = ctopo(&["embed-demo", "--samples", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("(1,0,1,0) -> (0,2,1)"));
    assert!(text.contains("(0,1,0,1) -> (3,0,0)"));
    assert!(text.contains("into R^8"));
}

#[test]
fn selftest_runs_one_criterion() {
    let o = ctopo(&["selftest", "--criterion", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"));
    assert_eq!(
        ctopo(&["selftest", "--criterion", "11"]).status.code(),
        Some(1)
    );
}
