//! Convex bodies with membership, support, volume and boundary queries.
//!
//! Bodies are closed: boundary points count as inside. Every tolerance is
//! relative to the body's circumradius about its reference interior point.

use std::fmt;
use std::ops::Deref;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::hull::{hull_volume_low_dim, HullSample};
use crate::linalg::{axpy, dot, norm, solve, sub};
use crate::lp::{self, LpOutcome};
use crate::sampling::StreamKey;
use crate::specialfn::unit_ball_volume;
use crate::stats::proportion;
use crate::{Error, Result};

/// Relative tolerance for membership predicates.
pub const MEMBERSHIP_RTOL: f64 = 1e-12;

/// A point of R^d (d >= 2, finite entries).
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidBody(format!(
                "vectors need dimension >= 2, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("non-finite coordinate".into()));
        }
        Ok(Self(coords))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

/// `normal · x <= offset`, stored with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalises `a · x <= b` so that `|a| = 1`.
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self> {
        let n = norm(&a);
        if !(n > 0.0) || !n.is_finite() || !b.is_finite() {
            return Err(Error::InvalidBody("halfspace normal must be nonzero and finite".into()));
        }
        Ok(Self {
            normal: a.iter().map(|x| x / n).collect(),
            offset: b / n,
        })
    }

    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Boundary point reached by a ray, with outer unit normal where unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub x: Vector,
    /// `None` when the normal cone is not a single direction.
    pub normal: Option<Vector>,
    /// Radius of the largest inscribed ball tangent at `x` (0 when unknown).
    pub rolling_radius: f64,
}

/// Ellipsoid `{x : (x - c)^T A (x - c) <= 1}` with cached principal frame.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: Vector,
    shape: DMatrix<f64>,
    // T = V diag(semi_axes) V^T, so that the body is c + T(unit ball)
    map: DMatrix<f64>,
    frame: DMatrix<f64>,
    semi_axes: Vec<f64>,
}

impl Ellipsoid {
    fn new(center: Vector, shape: DMatrix<f64>) -> Result<Self> {
        let d = center.dim();
        if shape.nrows() != d || shape.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: shape.nrows(),
            });
        }
        let amax = shape.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if shape.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBody("non-finite shape matrix".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if (shape[(i, j)] - shape[(j, i)]).abs() > 1e-12 * amax {
                    return Err(Error::InvalidBody("shape matrix is not symmetric".into()));
                }
            }
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidBody("shape matrix is not positive definite".into()));
        }
        let semi_axes: Vec<f64> = eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
        let frame = eig.eigenvectors.clone();
        let diag = DMatrix::from_diagonal(&DVector::from_column_slice(&semi_axes));
        let map = &frame * diag * frame.transpose();
        Ok(Self {
            center,
            shape: sym,
            map,
            frame,
            semi_axes,
        })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape_matrix(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// The symmetric map `T` with `E = c + T(B^d)`.
    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn semi_axes(&self) -> &[f64] {
        &self.semi_axes
    }

    /// `|det T|`, the volume ratio to the unit ball.
    pub fn det_map(&self) -> f64 {
        self.semi_axes.iter().product()
    }

    fn quad(&self, z: &[f64]) -> f64 {
        let w = DVector::from_iterator(z.len(), z.iter().zip(self.center.iter()).map(|(a, b)| a - b));
        w.dot(&(&self.shape * &w))
    }

    fn to_frame(&self, z: &[f64]) -> Vec<f64> {
        let w = DVector::from_iterator(z.len(), z.iter().zip(self.center.iter()).map(|(a, b)| a - b));
        (self.frame.transpose() * w).iter().copied().collect()
    }

    fn support(&self, u: &[f64]) -> f64 {
        let tu = &self.map * DVector::from_column_slice(u);
        dot(&self.center, u) + tu.norm()
    }

    /// Outer unit normal at a boundary point.
    fn normal_at(&self, x: &[f64]) -> Vec<f64> {
        let w = DVector::from_iterator(x.len(), x.iter().zip(self.center.iter()).map(|(a, b)| a - b));
        let g = &self.shape * w;
        let n = g.norm();
        g.iter().map(|v| v / n).collect()
    }

    /// Smallest principal radius of curvature at boundary point `x`.
    fn min_curvature_radius(&self, x: &[f64], normal: &[f64]) -> f64 {
        let d = x.len();
        let w = DVector::from_iterator(d, x.iter().zip(self.center.iter()).map(|(a, b)| a - b));
        let grad_norm = (&self.shape * w).norm();
        let nv = DVector::from_column_slice(normal);
        let proj = DMatrix::identity(d, d) - &nv * nv.transpose();
        let restricted = &proj * &self.shape * &proj;
        let kmax = SymmetricEigen::new(restricted)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &v| m.max(v));
        grad_norm / kmax
    }

    /// Radius of the largest ball tangent at `x` from inside, reported from below.
    fn rolling_radius(&self, x: &[f64], normal: &[f64]) -> f64 {
        let amin = self.semi_axes.iter().fold(f64::INFINITY, |m, &a| m.min(a));
        let amax = self.semi_axes.iter().fold(0.0f64, |m, &a| m.max(a));
        // a ball of the smallest curvature radius rolls freely inside
        let mut lo = amin * amin / amax;
        let mut hi = self.min_curvature_radius(x, normal).max(lo);
        let contained = |r: f64| {
            let p = axpy(x, -r, normal);
            ellipsoid_inner_distance(&self.semi_axes, &self.to_frame(&p)) >= r * (1.0 - 1e-12)
        };
        if contained(hi) {
            lo = hi;
        } else {
            for _ in 0..200 {
                if hi - lo <= 1e-14 * hi {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if contained(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        lo * (1.0 - 1e-9)
    }
}

/// Distance from an interior point `y` (principal frame) to the boundary of
/// the axis-aligned ellipsoid with semi-axes `a`.
pub(crate) fn ellipsoid_inner_distance(a: &[f64], y: &[f64]) -> f64 {
    let amin = a.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let amin2 = amin * amin;
    let g = |mu: f64| -> f64 {
        a.iter()
            .zip(y)
            .map(|(&ai, &yi)| {
                let t = ai * yi / (ai * ai - mu);
                t * t
            })
            .sum::<f64>()
            - 1.0
    };
    let point_dist = |mu: f64| -> f64 {
        a.iter()
            .zip(y)
            .map(|(&ai, &yi)| {
                let q = ai * ai * yi / (ai * ai - mu);
                (q - yi) * (q - yi)
            })
            .sum::<f64>()
            .sqrt()
    };
    // the nearest boundary point keeps the signs of y: mu in [0, amin²)
    let top = amin2 * (1.0 - 1e-15);
    if g(top) >= 0.0 {
        let (mut lo, mut hi) = (0.0, top);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return point_dist(0.5 * (lo + hi));
    }
    // degenerate: y has no component along the smallest axes
    let tol = amin * (1.0 + 1e-12);
    let mut off = 0.0;
    let mut rest = 1.0;
    for (&ai, &yi) in a.iter().zip(y) {
        if ai > tol {
            let q = ai * ai * yi / (ai * ai - amin2);
            off += (q - yi) * (q - yi);
            rest -= (q / ai) * (q / ai);
        } else {
            off += yi * yi;
        }
    }
    (off + rest.max(0.0) * amin2).sqrt()
}

/// Kind-specific description of a body.
#[derive(Debug, Clone)]
pub enum Shape {
    Ball { center: Vector, radius: f64 },
    Ellipsoid(Ellipsoid),
    Box { lo: Vector, hi: Vector },
    Simplex { vertices: Vec<Vector> },
    HPolytope { witness: Vector },
}

/// A convex body in R^d. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
    facets: Vec<Halfspace>,
    center: Vector,
    scale: f64,
    bbox: (Vec<f64>, Vec<f64>),
    volume: OnceLock<(f64, f64)>,
    acceptance: OnceLock<f64>,
}

impl fmt::Display for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Ball { radius, .. } => write!(f, "ball(d={}, r={radius})", self.dim),
            Shape::Ellipsoid(e) => write!(f, "ellipsoid(d={}, axes={:?})", self.dim, e.semi_axes),
            Shape::Box { .. } => write!(f, "box(d={})", self.dim),
            Shape::Simplex { .. } => write!(f, "simplex(d={})", self.dim),
            Shape::HPolytope { .. } => {
                write!(f, "hpolytope(d={}, facets={})", self.dim, self.facets.len())
            }
        }
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl ConvexBody {
    fn assemble(dim: usize, shape: Shape, facets: Vec<Halfspace>, center: Vector, bbox: (Vec<f64>, Vec<f64>)) -> Self {
        let scale = bbox
            .0
            .iter()
            .zip(&bbox.1)
            .zip(center.iter())
            .map(|((l, h), c)| {
                let m = (c - l).abs().max((h - c).abs());
                m * m
            })
            .sum::<f64>()
            .sqrt();
        Self {
            dim,
            shape,
            facets,
            center,
            scale,
            bbox,
            volume: OnceLock::new(),
            acceptance: OnceLock::new(),
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let center = Vector::new(center)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        let lo = center.iter().map(|c| c - radius).collect();
        let hi = center.iter().map(|c| c + radius).collect();
        let d = center.dim();
        Ok(Self::assemble(
            d,
            Shape::Ball {
                center: center.clone(),
                radius,
            },
            Vec::new(),
            center,
            (lo, hi),
        ))
    }

    /// `{x : (x - c)^T A (x - c) <= 1}` for symmetric positive definite `A`.
    pub fn ellipsoid(center: Vec<f64>, shape: DMatrix<f64>) -> Result<Self> {
        let center = Vector::new(center)?;
        let e = Ellipsoid::new(center.clone(), shape)?;
        let d = center.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            let w = e.map.row(i).norm();
            lo.push(center[i] - w);
            hi.push(center[i] + w);
        }
        Ok(Self::assemble(d, Shape::Ellipsoid(e), Vec::new(), center, (lo, hi)))
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn ellipsoid_axes(center: Vec<f64>, axes: &[f64]) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidBody("ellipsoid semi-axes must be positive".into()));
        }
        let diag = DVector::from_iterator(axes.len(), axes.iter().map(|a| 1.0 / (a * a)));
        Self::ellipsoid(center, DMatrix::from_diagonal(&diag))
    }

    pub fn cuboid(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let lo = Vector::new(lo)?;
        let hi = Vector::new(hi)?;
        check_dim(lo.dim(), hi.dim())?;
        if lo.iter().zip(hi.iter()).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidBody("box requires lo < hi componentwise".into()));
        }
        let d = lo.dim();
        let mut facets = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            facets.push(Halfspace::new(e.clone(), hi[i])?);
            e[i] = -1.0;
            facets.push(Halfspace::new(e, -lo[i])?);
        }
        let center = Vector::new(lo.iter().zip(hi.iter()).map(|(l, h)| 0.5 * (l + h)).collect())?;
        let bbox = (lo.to_vec(), hi.to_vec());
        Ok(Self::assemble(d, Shape::Box { lo, hi }, facets, center, bbox))
    }

    /// The unit cube `[0, 1]^d`.
    pub fn unit_cube(d: usize) -> Result<Self> {
        Self::cuboid(vec![0.0; d], vec![1.0; d])
    }

    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let vertices = vertices.into_iter().map(Vector::new).collect::<Result<Vec<_>>>()?;
        let d = vertices[0].dim();
        if vertices.len() != d + 1 {
            return Err(Error::InvalidBody(format!(
                "a {d}-simplex needs {} vertices, got {}",
                d + 1,
                vertices.len()
            )));
        }
        for v in &vertices {
            check_dim(d, v.dim())?;
        }
        // barycentric coordinates: mu = E^{-1} (x - v0), lambda_0 = 1 - sum(mu)
        let edges = DMatrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i]);
        let scale = edges.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let det = edges.determinant();
        if !(det.abs() > 1e-12 * scale.powi(d as i32)) {
            return Err(Error::InvalidBody("simplex vertices are affinely dependent".into()));
        }
        let inv = edges
            .try_inverse()
            .ok_or_else(|| Error::InvalidBody("simplex vertices are affinely dependent".into()))?;
        let v0 = DVector::from_column_slice(&vertices[0]);
        let mut facets = Vec::with_capacity(d + 1);
        // lambda_0 >= 0  <=>  sum_j row_j(inv) . x <= 1 + sum_j row_j(inv) . v0
        let colsum: Vec<f64> = (0..d).map(|k| (0..d).map(|j| inv[(j, k)]).sum()).collect();
        let off0 = 1.0 + dot(&colsum, v0.as_slice());
        facets.push(Halfspace::new(colsum, off0)?);
        for j in 0..d {
            // mu_j >= 0  <=>  -row_j . x <= -row_j . v0
            let row: Vec<f64> = (0..d).map(|k| -inv[(j, k)]).collect();
            let off = dot(&row, v0.as_slice());
            facets.push(Halfspace::new(row, off)?);
        }
        let mut centroid = vec![0.0; d];
        for v in &vertices {
            for (c, x) in centroid.iter_mut().zip(v.iter()) {
                *c += x / (d + 1) as f64;
            }
        }
        let lo = (0..d)
            .map(|i| vertices.iter().fold(f64::INFINITY, |m, v| m.min(v[i])))
            .collect();
        let hi = (0..d)
            .map(|i| vertices.iter().fold(f64::NEG_INFINITY, |m, v| m.max(v[i])))
            .collect();
        Ok(Self::assemble(
            d,
            Shape::Simplex { vertices },
            facets,
            Vector::new(centroid)?,
            (lo, hi),
        ))
    }

    /// The standard simplex `conv{0, e_1, ..., e_d}`.
    pub fn standard_simplex(d: usize) -> Result<Self> {
        let mut vs = vec![vec![0.0; d]];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            vs.push(e);
        }
        Self::simplex(vs)
    }

    /// Bounded polytope `{x : a_i . x <= b_i}` with a strictly interior witness.
    pub fn hpolytope(halfspaces: Vec<(Vec<f64>, f64)>, witness: Vec<f64>) -> Result<Self> {
        let witness = Vector::new(witness)?;
        let d = witness.dim();
        if halfspaces.is_empty() {
            return Err(Error::Unbounded);
        }
        let facets = halfspaces
            .into_iter()
            .map(|(a, b)| {
                check_dim(d, a.len())?;
                Halfspace::new(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, h) in facets.iter().enumerate() {
            if !(h.slack(&witness) > 1e-12 * (1.0 + h.offset.abs())) {
                return Err(Error::InvalidBody(format!(
                    "witness does not strictly satisfy halfspace {i}"
                )));
            }
        }
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hi[i] = polytope_support(&facets, &witness, &e)?;
            e[i] = -1.0;
            lo[i] = -polytope_support(&facets, &witness, &e)?;
        }
        Ok(Self::assemble(
            d,
            Shape::HPolytope {
                witness: witness.clone(),
            },
            facets,
            witness,
            (lo, hi),
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Facets of polytopal bodies (empty for smooth bodies).
    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn is_polytope(&self) -> bool {
        !self.facets.is_empty()
    }

    /// Reference interior point: center, centroid or witness.
    pub fn center(&self) -> &Vector {
        &self.center
    }

    /// Circumradius about [`Self::center`], used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox.0, &self.bbox.1)
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        matches!(self.shape, Shape::Ball { .. } | Shape::Ellipsoid(_) | Shape::Box { .. })
    }

    pub fn contains(&self, z: &[f64]) -> Result<bool> {
        check_dim(self.dim, z.len())?;
        Ok(self.contains_unchecked(z))
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, z: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let r2: f64 = z.iter().zip(center.iter()).map(|(a, c)| (a - c) * (a - c)).sum();
                r2 <= radius * radius * (1.0 + 2.0 * MEMBERSHIP_RTOL)
            }
            Shape::Ellipsoid(e) => e.quad(z) <= 1.0 + 2.0 * MEMBERSHIP_RTOL,
            Shape::Box { lo, hi } => {
                let tol = MEMBERSHIP_RTOL * self.scale;
                z.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol)
            }
            Shape::Simplex { .. } | Shape::HPolytope { .. } => {
                let tol = MEMBERSHIP_RTOL * self.scale;
                self.facets.iter().all(|h| h.slack(z) >= -tol)
            }
        }
    }

    /// Strict interior test with margin relative to the circumradius.
    pub fn contains_strictly(&self, z: &[f64]) -> Result<bool> {
        check_dim(self.dim, z.len())?;
        let margin = 1e-12;
        Ok(match &self.shape {
            Shape::Ball { center, radius } => {
                crate::linalg::dist(z, center) < radius * (1.0 - margin)
            }
            Shape::Ellipsoid(e) => e.quad(z) < 1.0 - 2.0 * margin,
            _ => self.facets.iter().all(|h| h.slack(z) > margin * self.scale),
        })
    }

    /// Support function `h_K(u) = max_{x in K} <u, x>`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        if norm(u) == 0.0 {
            return Err(Error::Domain("support direction must be nonzero".into()));
        }
        Ok(match &self.shape {
            Shape::Ball { center, radius } => dot(center, u) + radius * norm(u),
            Shape::Ellipsoid(e) => e.support(u),
            Shape::Box { lo, hi } => u
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(ui, (l, h))| (ui * l).max(ui * h))
                .sum(),
            Shape::Simplex { vertices } => vertices
                .iter()
                .map(|v| dot(v, u))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::HPolytope { witness } => polytope_support(&self.facets, witness, u)?,
        })
    }

    /// Exact volume (Monte Carlo for H-polytopes in d > 3).
    pub fn volume(&self) -> f64 {
        self.volume_estimate().0
    }

    /// Volume with its standard error (0 for the exact kinds).
    pub fn volume_estimate(&self) -> (f64, f64) {
        *self.volume.get_or_init(|| self.compute_volume())
    }

    fn compute_volume(&self) -> (f64, f64) {
        let d = self.dim;
        match &self.shape {
            Shape::Ball { radius, .. } => (unit_ball_volume(d) * radius.powi(d as i32), 0.0),
            Shape::Ellipsoid(e) => (unit_ball_volume(d) * e.det_map(), 0.0),
            Shape::Box { lo, hi } => (lo.iter().zip(hi.iter()).map(|(l, h)| h - l).product(), 0.0),
            Shape::Simplex { vertices } => {
                let vs: Vec<Vec<f64>> = vertices.iter().map(|v| v.to_vec()).collect();
                let fact: f64 = (1..=d).map(|k| k as f64).product();
                (crate::linalg::edge_determinant(&vs).abs() / fact, 0.0)
            }
            Shape::HPolytope { .. } if d <= 3 => {
                let verts = enumerate_vertices(&self.facets, self.scale);
                let sample = HullSample::from_points(d, &verts).expect("vertex dimensions agree");
                (hull_volume_low_dim(&sample).expect("d <= 3"), 0.0)
            }
            Shape::HPolytope { .. } => {
                const DRAWS: usize = 1_000_000;
                let (lo, hi) = self.bounding_box();
                let box_vol: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
                let mut rng = StreamKey::new(0x766f_6c75_6d65, vec![]).rng();
                let mut z = vec![0.0; d];
                let mut hits = 0usize;
                for _ in 0..DRAWS {
                    for i in 0..d {
                        z[i] = lo[i] + (hi[i] - lo[i]) * crate::sampling::uniform01(&mut rng);
                    }
                    if self.contains_unchecked(&z) {
                        hits += 1;
                    }
                }
                let (p, se) = proportion(hits, DRAWS);
                (box_vol * p, box_vol * se)
            }
        }
    }

    /// Fraction of bounding-box draws that land in the body (1 for non-rejection kinds).
    pub fn acceptance_rate(&self) -> f64 {
        *self.acceptance.get_or_init(|| {
            if !matches!(self.shape, Shape::HPolytope { .. }) {
                return 1.0;
            }
            const PILOT: usize = 100_000;
            let (lo, hi) = self.bounding_box();
            let mut rng = StreamKey::new(0x0070_696c_6f74, vec![]).rng();
            let mut z = vec![0.0; self.dim];
            let mut hits = 0usize;
            for _ in 0..PILOT {
                for i in 0..self.dim {
                    z[i] = lo[i] + (hi[i] - lo[i]) * crate::sampling::uniform01(&mut rng);
                }
                if self.contains_unchecked(&z) {
                    hits += 1;
                }
            }
            hits as f64 / PILOT as f64
        })
    }

    /// Exit point of the ray `origin + s dir`, `s >= 0`.
    pub fn ray_boundary(&self, origin: &[f64], dir: &[f64]) -> Result<SurfacePoint> {
        check_dim(self.dim, origin.len())?;
        check_dim(self.dim, dir.len())?;
        if (norm(dir) - 1.0).abs() > 1e-9 {
            return Err(Error::Domain("ray direction must be a unit vector".into()));
        }
        if !self.contains_strictly(origin)? {
            return Err(Error::NotInterior);
        }
        match &self.shape {
            Shape::Ball { center, radius } => {
                let w = sub(origin, center);
                let s = quadratic_exit(1.0, 2.0 * dot(dir, &w), dot(&w, &w) - radius * radius);
                let x = axpy(origin, s, dir);
                let n: Vec<f64> = sub(&x, center).iter().map(|v| v / radius).collect();
                let n = renormalize(n);
                Ok(SurfacePoint {
                    x: Vector(x),
                    normal: Some(Vector(n)),
                    rolling_radius: *radius,
                })
            }
            Shape::Ellipsoid(e) => {
                let w = DVector::from_column_slice(&sub(origin, &e.center));
                let dv = DVector::from_column_slice(dir);
                let ad = &e.shape * &dv;
                let s = quadratic_exit(dv.dot(&ad), 2.0 * w.dot(&ad), w.dot(&(&e.shape * &w)) - 1.0);
                let x = axpy(origin, s, dir);
                let n = e.normal_at(&x);
                let r = e.rolling_radius(&x, &n);
                Ok(SurfacePoint {
                    x: Vector(x),
                    normal: Some(Vector(n)),
                    rolling_radius: r,
                })
            }
            _ => Ok(self.polytope_exit(origin, dir)),
        }
    }

    fn polytope_exit(&self, origin: &[f64], dir: &[f64]) -> SurfacePoint {
        let mut s = f64::INFINITY;
        for h in &self.facets {
            let rate = dot(&h.normal, dir);
            if rate > 0.0 {
                s = s.min(h.slack(origin) / rate);
            }
        }
        let x = axpy(origin, s, dir);
        let tol = 1e-10 * self.scale;
        let tight: Vec<&Halfspace> = self.facets.iter().filter(|h| h.slack(&x).abs() <= tol).collect();
        if tight.len() != 1 {
            return SurfacePoint {
                x: Vector(x),
                normal: None,
                rolling_radius: 0.0,
            };
        }
        let n = tight[0].normal.clone();
        let mut r = f64::INFINITY;
        for h in &self.facets {
            let denom = 1.0 - dot(&h.normal, &n);
            if denom > 1e-15 {
                r = r.min(h.slack(&x).max(0.0) / denom);
            }
        }
        SurfacePoint {
            x: Vector(x),
            normal: Some(Vector(n)),
            rolling_radius: if r.is_finite() { r } else { 0.0 },
        }
    }

    /// Vertices of a polytopal body.
    pub fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        match &self.shape {
            Shape::Simplex { vertices } => Some(vertices.iter().map(|v| v.to_vec()).collect()),
            Shape::Box { .. } | Shape::HPolytope { .. } => Some(enumerate_vertices(&self.facets, self.scale)),
            _ => None,
        }
    }
}

fn renormalize(v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

/// Positive root of `a s² + b s + c = 0` with `a > 0`, `c < 0`.
fn quadratic_exit(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    if b >= 0.0 {
        -2.0 * c / (b + disc)
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// `max u.x` over `{x : a_i . x <= b_i}` by the simplex method, shifted to the witness.
fn polytope_support(facets: &[Halfspace], witness: &[f64], u: &[f64]) -> Result<f64> {
    let d = witness.len();
    let m = facets.len();
    // x = w + y+ - y-,  A y+ - A y- + s = b - A w,  minimize -u.(y+ - y-)
    let n = 2 * d + m;
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    for (i, h) in facets.iter().enumerate() {
        for j in 0..d {
            a[i * n + j] = h.normal[j];
            a[i * n + d + j] = -h.normal[j];
        }
        a[i * n + 2 * d + i] = 1.0;
        b[i] = h.slack(witness);
    }
    let mut c = vec![0.0; n];
    for j in 0..d {
        c[j] = -u[j];
        c[d + j] = u[j];
    }
    match lp::solve_standard_form(m, n, &a, &b, &c) {
        LpOutcome::Optimal { objective, .. } => Ok(dot(u, witness) - objective),
        LpOutcome::Unbounded => Err(Error::Unbounded),
        LpOutcome::Infeasible { .. } => Err(Error::InvalidBody("empty polytope".into())),
    }
}

/// All vertices of a bounded polytope by intersecting every d-subset of facets.
pub(crate) fn enumerate_vertices(facets: &[Halfspace], scale: f64) -> Vec<Vec<f64>> {
    let d = facets[0].normal.len();
    let m = facets.len();
    let tol = 1e-9 * scale.max(1e-300);
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let rows: Vec<&[f64]> = idx.iter().map(|&i| facets[i].normal.as_slice()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| facets[i].offset).collect();
        if let Some(x) = solve(&rows, &rhs) {
            if facets.iter().all(|h| h.slack(&x) >= -tol)
                && !out.iter().any(|v| crate::linalg::dist(v, &x) <= tol)
            {
                out.push(x);
            }
        }
        // next combination
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < m - d + k {
                idx[k] += 1;
                for j in k + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Parses the H-polytope text format: one `a1 ... ad b` line per halfspace
/// (meaning `a . x <= b`) and a final `interior x1 ... xd` line.
pub fn parse_hpolytope(text: &str) -> Result<ConvexBody> {
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut interior: Option<(usize, Vec<f64>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if interior.is_some() {
            return Err(Error::Format {
                line: line_no,
                message: "content after the interior line".into(),
            });
        }
        let (is_interior, body) = match line.strip_prefix("interior") {
            Some(rest) => (true, rest),
            None => (false, line),
        };
        let nums = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format {
                        line: line_no,
                        message: format!("not a finite decimal: {tok:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if is_interior {
            interior = Some((line_no, nums));
        } else {
            rows.push((line_no, nums));
        }
    }
    let (iline, witness) = interior.ok_or(Error::Format {
        line: text.lines().count().max(1),
        message: "missing final \"interior x1 ... xd\" line".into(),
    })?;
    let d = witness.len();
    if d < 2 {
        return Err(Error::Format {
            line: iline,
            message: format!("interior point must have dimension >= 2, got {d}"),
        });
    }
    if rows.is_empty() {
        return Err(Error::Format {
            line: iline,
            message: "no halfspaces".into(),
        });
    }
    let mut halfspaces = Vec::with_capacity(rows.len());
    for (line, nums) in rows {
        if nums.len() != d + 1 {
            return Err(Error::Format {
                line,
                message: format!("expected {} numbers (a1..a{d} b), got {}", d + 1, nums.len()),
            });
        }
        if nums[..d].iter().all(|v| *v == 0.0) {
            return Err(Error::Format {
                line,
                message: "zero normal".into(),
            });
        }
        halfspaces.push((nums[..d].to_vec(), nums[d]));
    }
    ConvexBody::hpolytope(halfspaces, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk() -> ConvexBody {
        ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn contains_examples() {
        let k = disk();
        assert!(k.contains(&[0.0, 0.0]).unwrap());
        assert!(k.contains(&[1.0, 0.0]).unwrap());
        let sq = ConvexBody::unit_cube(2).unwrap();
        assert!(!sq.contains(&[2.0, 0.5]).unwrap());
        assert!(matches!(
            k.contains(&[0.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn support_examples() {
        assert_eq!(disk().support(&[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(ConvexBody::unit_cube(2).unwrap().support(&[1.0, 1.0]).unwrap(), 2.0);
        let e = ConvexBody::ellipsoid(vec![0.0, 0.0], DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 1.0]))).unwrap();
        assert!((e.support(&[1.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn volume_examples() {
        let b = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
        assert!((b.volume() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(ConvexBody::unit_cube(3).unwrap().volume(), 1.0);
        let e = ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert!((e.volume() - 2.0 * PI).abs() < 1e-14);
        let s = ConvexBody::standard_simplex(3).unwrap();
        assert!((s.volume() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn hpolytope_volume_matches_cube_and_octahedron() {
        let cube = ConvexBody::hpolytope(
            vec![
                (vec![1.0, 0.0, 0.0], 1.0),
                (vec![-1.0, 0.0, 0.0], 1.0),
                (vec![0.0, 1.0, 0.0], 1.0),
                (vec![0.0, -1.0, 0.0], 1.0),
                (vec![0.0, 0.0, 1.0], 1.0),
                (vec![0.0, 0.0, -1.0], 1.0),
            ],
            vec![0.1, 0.0, 0.0],
        )
        .unwrap();
        assert!((cube.volume() - 8.0).abs() < 1e-12);
        let mut hs = Vec::new();
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    hs.push((vec![sx, sy, sz], 1.0));
                }
            }
        }
        let oct = ConvexBody::hpolytope(hs, vec![0.0; 3]).unwrap();
        assert!((oct.volume() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(oct.vertices().unwrap().len(), 6);
    }

    #[test]
    fn hpolytope_in_four_dimensions_uses_monte_carlo() {
        let mut hs = Vec::new();
        for i in 0..4 {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            hs.push((e.clone(), 1.0));
            e[i] = -1.0;
            hs.push((e, 0.0));
        }
        let cube = ConvexBody::hpolytope(hs, vec![0.5; 4]).unwrap();
        let (v, se) = cube.volume_estimate();
        // the bounding box is the body itself
        assert_eq!(v, 1.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn unbounded_polytope_is_rejected() {
        let r = ConvexBody::hpolytope(
            vec![(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0), (vec![-1.0, 0.0], 1.0)],
            vec![0.0, 0.0],
        );
        assert_eq!(r.unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn invalid_bodies_are_rejected() {
        assert!(ConvexBody::ball(vec![0.0, 0.0], 0.0).is_err());
        assert!(ConvexBody::ball(vec![0.0], 1.0).is_err());
        assert!(ConvexBody::cuboid(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ConvexBody::simplex(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(ConvexBody::ellipsoid(vec![0.0, 0.0], asym).is_err());
        let indef = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(ConvexBody::ellipsoid(vec![0.0, 0.0], indef).is_err());
        // witness on the boundary
        let r = ConvexBody::hpolytope(
            vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0), (vec![0.0, -1.0], 1.0)],
            vec![1.0, 0.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn ray_boundary_examples() {
        let sp = disk().ray_boundary(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(sp.x.to_vec(), vec![1.0, 0.0]);
        assert_eq!(sp.normal.unwrap().to_vec(), vec![1.0, 0.0]);
        assert_eq!(sp.rolling_radius, 1.0);

        let sq = ConvexBody::unit_cube(2).unwrap();
        let sp = sq.ray_boundary(&[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert_eq!(sp.x.to_vec(), vec![0.5, 1.0]);
        assert_eq!(sp.normal.unwrap().to_vec(), vec![0.0, 1.0]);
        assert!((sp.rolling_radius - 0.5).abs() < 1e-15);

        let e = ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0, 1.0]).unwrap();
        let sp = e.ray_boundary(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((sp.x[0] - 2.0).abs() < 1e-15 && sp.x[1].abs() < 1e-15);
        let n = sp.normal.unwrap();
        assert!((n[0] - 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        assert!((sp.rolling_radius - 0.5).abs() < 1e-8);
    }

    #[test]
    fn ellipse_minor_vertex_rolling_radius_is_the_minor_axis() {
        // osculating radius there is a²/b = 4, but the unit circle is the largest tangent ball
        let e = ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0, 1.0]).unwrap();
        let sp = e.ray_boundary(&[0.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((sp.rolling_radius - 1.0).abs() < 1e-7, "{}", sp.rolling_radius);
    }

    #[test]
    fn polytope_corner_has_no_normal() {
        let sq = ConvexBody::unit_cube(2).unwrap();
        let s = 0.5f64.sqrt();
        let sp = sq.ray_boundary(&[0.5, 0.5], &[s, s]).unwrap();
        assert!(sp.normal.is_none());
        assert_eq!(sp.rolling_radius, 0.0);
    }

    #[test]
    fn ray_boundary_requires_interior_origin() {
        let sq = ConvexBody::unit_cube(2).unwrap();
        assert_eq!(sq.ray_boundary(&[0.0, 0.5], &[1.0, 0.0]).unwrap_err(), Error::NotInterior);
    }

    #[test]
    fn simplex_facets_and_support() {
        let t = ConvexBody::simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(t.contains(&[0.2, 0.2]).unwrap());
        assert!(t.contains(&[0.5, 0.5]).unwrap());
        assert!(!t.contains(&[0.6, 0.5]).unwrap());
        assert_eq!(t.support(&[1.0, 1.0]).unwrap(), 1.0);
        let sp = t
            .ray_boundary(&[0.2, 0.2], &[0.5f64.sqrt(), 0.5f64.sqrt()])
            .unwrap();
        assert!((sp.x[0] - 0.5).abs() < 1e-15);
        let n = sp.normal.unwrap();
        assert!((n[0] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parse_hpolytope_format() {
        let text = "1 0 1\n-1 0 1\n0 1 1\n0 -1 1\ninterior 0 0\n";
        let k = parse_hpolytope(text).unwrap();
        assert!((k.volume() - 4.0).abs() < 1e-12);

        let err = parse_hpolytope("1 0 1\n-1 x 1\ninterior 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
        let err = parse_hpolytope("1 0 1\n-1 0\ninterior 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
        let err = parse_hpolytope("1 0 1\n").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        let err = parse_hpolytope("1 0 1\ninterior 0 0\n0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }));
    }

    #[test]
    fn inner_distance_on_circle_and_degenerate_axis() {
        // circle radius 2: distance from (0.5, 0) is 1.5
        assert!((ellipsoid_inner_distance(&[2.0, 2.0], &[0.5, 0.0]) - 1.5).abs() < 1e-12);
        // ellipse (2,1) from the center: nearest boundary point is the minor vertex
        assert!((ellipsoid_inner_distance(&[2.0, 1.0], &[0.0, 0.0]) - 1.0).abs() < 1e-12);
        // point on the major axis: evolute regime, distance < 1
        let dd = ellipsoid_inner_distance(&[2.0, 1.0], &[1.0, 0.0]);
        // closest point (x, y) with x = 4/3 on the ellipse: y² = 1 - 4/9
        let expect = ((4.0f64 / 3.0 - 1.0).powi(2) + 5.0 / 9.0).sqrt();
        assert!((dd - expect).abs() < 1e-12, "{dd} vs {expect}");
    }
}
