//! Fixtures shared by the benchmarks.

use ctopo::rational::{circle_point, q, Q};
use ctopo::words::wrap;

/// Concatenation of `n` wrapped blocks of varying length.
pub fn wrapped_blocks(n: usize) -> String {
    (0..n)
        .map(|i| {
            let body: String = (0..i % 17)
                .map(|j| if (i + j) % 3 == 0 { '1' } else { '0' })
                .collect();
            wrap(&body).as_str().to_string()
        })
        .collect()
}

/// `n` distinct rational points of the plane.
pub fn plane_points(n: usize) -> Vec<Vec<Q>> {
    (0..n as i64)
        .map(|i| vec![q(7 * i - 31, 13), q(5 - 3 * i, 11)])
        .collect()
}

/// `n` distinct rational points of the unit circle.
pub fn circle_points(n: usize) -> Vec<Vec<Q>> {
    (0..n as i64)
        .map(|i| circle_point(&q(2 * i + 1, 7)))
        .collect()
}
