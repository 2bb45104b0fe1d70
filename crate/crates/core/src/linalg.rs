//! Small dense vector helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn axpy(x: &[f64], s: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + s * d).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Solves the square system `rows * x = rhs`, `None` when (numerically) singular.
pub fn solve(rows: &[&[f64]], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = m.lu();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let det = lu.determinant();
    if !det.is_finite() || det.abs() <= 1e-13 * scale.powi(n as i32) {
        return None;
    }
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|x| x.iter().copied().collect())
}

/// `|det(v_1 - v_0, ..., v_d - v_0)|`.
pub fn edge_determinant(vertices: &[Vec<f64>]) -> f64 {
    let d = vertices[0].len();
    let m = DMatrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i]);
    m.determinant()
}
