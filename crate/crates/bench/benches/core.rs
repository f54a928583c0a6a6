use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ctopo::decision::HalfChart;
use ctopo::espace::{approximate, separate_points};
use ctopo::euclid::{euclidean_space, point_from_rational};
use ctopo::gallery::{circle_half_charts, half_chart_id};
use ctopo::manifold::transition;
use ctopo::manifold::{chart_eval, Direction};
use ctopo::words::{rat_decode, rat_encode, scan_wrapped};
use ctopo_bench::{circle_points, plane_points, wrapped_blocks};

fn codecs(c: &mut Criterion) {
    let s = wrapped_blocks(1000);
    c.bench_function("scan 1000 wrapped blocks", |b| {
        b.iter(|| scan_wrapped(black_box(&s)))
    });
    let xs = plane_points(200);
    c.bench_function("rational codes round trip", |b| {
        b.iter(|| {
            xs.iter()
                .flatten()
                .all(|x| rat_decode(rat_encode(x).as_str()).as_ref() == Ok(x))
        })
    });
}

fn names(c: &mut Criterion) {
    let e = euclidean_space(2);
    let xs = plane_points(2);
    c.bench_function("plane point name to budget 1000", |b| {
        b.iter(|| point_from_rational(&e, xs[0].clone()).query(black_box(1000)))
    });
    c.bench_function("separate two plane points", |b| {
        b.iter(|| {
            let x = point_from_rational(&e, xs[0].clone());
            let y = point_from_rational(&e, xs[1].clone());
            separate_points(&x, &y, black_box(10_000))
        })
    });
}

fn charts(c: &mut Criterion) {
    let m = circle_half_charts();
    let f = half_chart_id(HalfChart::FPlus);
    let g = half_chart_id(HalfChart::GPlus);
    let t = transition(&m, f.as_str(), g.as_str()).expect("transition");
    let p = circle_points(1)[0].clone();
    c.bench_function("circle transition f+ to g+ at 2^-16", |b| {
        b.iter(|| {
            let name = chart_eval(&m, f.as_str(), Direction::Forward)
                .and_then(|fw| fw.apply(&m.point(p.clone())))
                .and_then(|y| t.apply(&y))
                .expect("apply");
            approximate(&name, 16, 1 << 14)
        })
    });
}

criterion_group!(benches, codecs, names, charts);
criterion_main!(benches);
