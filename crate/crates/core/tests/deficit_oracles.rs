use stochgeo::hull::deficit_volume;
use stochgeo::{ConvexBody, HullSample, StreamKey};

/// Midpoint-grid count of the part of the unit square outside the convex quadrilateral `q`.
fn grid_deficit(q: &[[f64; 2]; 4], m: usize) -> f64 {
    let mut outside = 0usize;
    for i in 0..m {
        for j in 0..m {
            let z = [(i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64];
            let inside = (0..4).all(|k| {
                let (a, b) = (q[k], q[(k + 1) % 4]);
                (b[0] - a[0]) * (z[1] - a[1]) - (b[1] - a[1]) * (z[0] - a[0]) >= 0.0
            });
            outside += usize::from(!inside);
        }
    }
    outside as f64 / (m * m) as f64
}

#[test]
fn four_point_square_deficit_matches_grid_count() {
    let square = ConvexBody::unit_cube(2).unwrap();
    let q = [[0.5, 0.1], [0.9, 0.5], [0.5, 0.9], [0.1, 0.5]];
    let sample = HullSample::from_points(2, &q.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap();
    let (exact, se) = deficit_volume(&square, &sample, 0, &StreamKey::root(0)).unwrap();
    assert_eq!(se, 0.0);
    // diamond of half-diagonal 0.4 has area 0.32
    assert!((exact - 0.68).abs() < 1e-12);
    assert!((grid_deficit(&q, 2000) - exact).abs() < 1e-3);
}

#[test]
fn monte_carlo_hull_path_agrees_with_exact_cube_deficit() {
    let cube = ConvexBody::unit_cube(3).unwrap();
    let pts: Vec<Vec<f64>> = (0..8)
        .map(|k| (0..3).map(|b| if k >> b & 1 == 1 { 0.8 } else { 0.2 }).collect())
        .collect();
    let sample = HullSample::from_points(3, &pts).unwrap();
    let (exact, _) = deficit_volume(&cube, &sample, 0, &StreamKey::root(0)).unwrap();
    assert!((exact - (1.0 - 0.216)).abs() < 1e-12);
    let (mc, se) = stochgeo::hull::deficit_volume_monte_carlo(&cube, &sample, 20_000, &StreamKey::root(1)).unwrap();
    assert!((mc - exact).abs() < 5.0 * se);
}
