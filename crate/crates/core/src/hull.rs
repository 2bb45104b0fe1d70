//! Convex hulls of point samples: membership in any dimension, exact volume
//! in the plane and in space, and the deficit `vol(K \ hull)`.

use std::collections::HashMap;

use crate::bodies::ConvexBody;
use crate::linalg::dot;
use crate::lp::{solve_standard_form, LpOutcome};
use crate::sampling::{sample_uniform, StreamKey};
use crate::stats::proportion;
use crate::{Error, Result};

/// A finite point sample `x_1, ..., x_n` in R^d, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSample {
    dim: usize,
    coords: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
}

impl HullSample {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("sample dimension must be >= 2, got {dim}")));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::Domain(format!(
                "{} coordinates do not form a nonempty sample of {dim}-vectors",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite sample coordinate".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut c = vec![0.0; self.dim];
        for p in self.points() {
            for (ci, x) in c.iter_mut().zip(p) {
                *ci += x;
            }
        }
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    /// Largest distance from the centroid to a sample point.
    pub fn circumradius(&self) -> f64 {
        let c = self.centroid();
        self.points()
            .map(|p| crate::linalg::dist(p, &c))
            .fold(0.0, f64::max)
    }

    /// Default membership tolerance, `1e-9` times the circumradius.
    pub fn default_tol(&self) -> f64 {
        1e-9 * self.circumradius()
    }
}

/// Membership queries against one sample, with the LP data prepared once.
#[derive(Debug, Clone)]
pub struct HullOracle {
    dim: usize,
    n: usize,
    center: Vec<f64>,
    radius: f64,
    // (d + 1) x n constraint matrix of the scaled sample, row-major
    a: Vec<f64>,
    zero_cost: Vec<f64>,
}

impl HullOracle {
    pub fn new(sample: &HullSample) -> Self {
        let d = sample.dim();
        let n = sample.len();
        let center = sample.centroid();
        let r = sample.circumradius();
        let radius = if r > 0.0 { r } else { 1.0 };
        let mut a = vec![0.0; (d + 1) * n];
        for (j, p) in sample.points().enumerate() {
            for i in 0..d {
                a[i * n + j] = (p[i] - center[i]) / radius;
            }
            a[d * n + j] = 1.0;
        }
        Self {
            dim: d,
            n,
            center,
            radius,
            a,
            zero_cost: vec![0.0; n],
        }
    }

    /// Inside iff no unit direction separates `z` from the sample by more than `tol`.
    pub fn query(&self, z: &[f64], tol: f64) -> Result<Membership> {
        let d = self.dim;
        if z.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: z.len(),
            });
        }
        if !(tol > 0.0) {
            return Err(Error::Domain("membership tolerance must be positive".into()));
        }
        let mut b: Vec<f64> = z
            .iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c) / self.radius)
            .collect();
        b.push(1.0);
        match solve_standard_form(d + 1, self.n, &self.a, &b, &self.zero_cost) {
            LpOutcome::Infeasible { duals, .. } => {
                let u = &duals[..d];
                let un = crate::linalg::norm(u);
                if !(un > 0.0) {
                    return Ok(Membership::Inside);
                }
                let hmax = (0..self.n)
                    .map(|j| (0..d).map(|i| u[i] * self.a[i * self.n + j]).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                let margin = (dot(u, &b[..d]) - hmax) / un;
                Ok(if margin > tol / self.radius {
                    Membership::Outside
                } else {
                    Membership::Inside
                })
            }
            _ => Ok(Membership::Inside),
        }
    }
}

/// Separation-LP membership test of `z` in the hull of `sample`.
pub fn in_hull(sample: &HullSample, z: &[f64], tol: f64) -> Result<Membership> {
    HullOracle::new(sample).query(z, tol)
}

#[inline]
fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertices of planar points (monotone chain).
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = octagon_filter(points);
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for p in &pts {
        while hull.len() >= 2 && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    // the upper chain never pops into the lower one
    let floor = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= floor && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Drops points strictly inside the octagon of extreme points in eight directions.
fn octagon_filter(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    if points.len() < 16 {
        return points.to_vec();
    }
    const DIRS: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [1.0, 1.0],
        [0.0, 1.0],
        [-1.0, 1.0],
        [-1.0, 0.0],
        [-1.0, -1.0],
        [0.0, -1.0],
        [1.0, -1.0],
    ];
    let mut ext = [points[0]; 8];
    let mut best = [f64::NEG_INFINITY; 8];
    for p in points {
        for (k, dir) in DIRS.iter().enumerate() {
            let v = dir[0] * p[0] + dir[1] * p[1];
            if v > best[k] {
                best[k] = v;
                ext[k] = *p;
            }
        }
    }
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(8);
    for e in ext {
        if poly.last() != Some(&e) && poly.first() != Some(&e) {
            poly.push(e);
        }
    }
    if poly.len() < 3 {
        return points.to_vec();
    }
    let m = poly.len();
    points
        .iter()
        .filter(|p| !(0..m).all(|k| cross2(&poly[k], &poly[(k + 1) % m], &p[..]) > 0.0))
        .copied()
        .collect()
}

/// Shoelace area of a simple polygon given in order.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..m {
        let (p, q) = (poly[k], poly[(k + 1) % m]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s.abs()
}

/// Exact hull volume for d in {2, 3}; affinely dependent samples give 0.
pub fn hull_volume_low_dim(sample: &HullSample) -> Result<f64> {
    match sample.dim() {
        2 => {
            let pts: Vec<[f64; 2]> = sample.points().map(|p| [p[0], p[1]]).collect();
            Ok(polygon_area(&convex_hull_2d(&pts)))
        }
        3 => {
            let pts: Vec<[f64; 3]> = sample.points().map(|p| [p[0], p[1], p[2]]).collect();
            Ok(hull_volume_3d(&pts))
        }
        d => Err(Error::UseEstimatedPath(d)),
    }
}

type P3 = [f64; 3];

#[inline]
fn sub3(a: &P3, b: &P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross3(a: &P3, b: &P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot3(a: &P3, b: &P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

struct Face {
    v: [usize; 3],
    normal: P3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &[P3], v: [usize; 3]) -> Self {
        let n = cross3(&sub3(&pts[v[1]], &pts[v[0]]), &sub3(&pts[v[2]], &pts[v[0]]));
        let len = dot3(&n, &n).sqrt();
        let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
        Self {
            v,
            normal,
            offset: dot3(&normal, &pts[v[0]]),
            outside: Vec::new(),
            alive: true,
        }
    }

    #[inline]
    fn height(&self, p: &P3) -> f64 {
        dot3(&self.normal, p) - self.offset
    }
}

/// Volume of the convex hull of points in R^3 (incremental quickhull).
pub fn hull_volume_3d(pts: &[P3]) -> f64 {
    let n = pts.len();
    if n < 4 {
        return 0.0;
    }
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;

    // initial tetrahedron from extreme points
    let mut ext = [0usize; 6];
    for (i, p) in pts.iter().enumerate() {
        for k in 0..3 {
            if p[k] < pts[ext[2 * k]][k] {
                ext[2 * k] = i;
            }
            if p[k] > pts[ext[2 * k + 1]][k] {
                ext[2 * k + 1] = i;
            }
        }
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &ext {
        for &b in &ext {
            let d = sub3(&pts[a], &pts[b]);
            let l = dot3(&d, &d);
            if l > best {
                best = l;
                i0 = a;
                i1 = b;
            }
        }
    }
    if best.sqrt() <= eps {
        return 0.0;
    }
    let axis = sub3(&pts[i1], &pts[i0]);
    let (mut i2, mut best) = (0, -1.0);
    for (i, p) in pts.iter().enumerate() {
        let c = cross3(&axis, &sub3(p, &pts[i0]));
        let l = dot3(&c, &c);
        if l > best {
            best = l;
            i2 = i;
        }
    }
    if best.sqrt() / dot3(&axis, &axis).sqrt() <= eps {
        return 0.0;
    }
    let plane = Face::new(pts, [i0, i1, i2]);
    let (mut i3, mut best) = (0, -1.0);
    for (i, p) in pts.iter().enumerate() {
        let h = plane.height(p).abs();
        if h > best {
            best = h;
            i3 = i;
        }
    }
    if best <= eps {
        return 0.0;
    }
    let interior = {
        let mut c = [0.0; 3];
        for &i in &[i0, i1, i2, i3] {
            for k in 0..3 {
                c[k] += 0.25 * pts[i][k];
            }
        }
        c
    };

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, v: [usize; 3]| {
        let mut f = Face::new(pts, v);
        if f.height(&interior) > 0.0 {
            f = Face::new(pts, [v[0], v[2], v[1]]);
        }
        let id = faces.len();
        let w = f.v;
        edges.insert((w[0], w[1]), id);
        edges.insert((w[1], w[2]), id);
        edges.insert((w[2], w[0]), id);
        faces.push(f);
        id
    };
    for v in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        add_face(&mut faces, &mut edges, v);
    }
    for i in 0..n {
        if [i0, i1, i2, i3].contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter().position(|f| f.height(&pts[i]) > eps) {
            faces[f].outside.push(i);
        }
    }

    let mut stack: Vec<usize> = (0..4).collect();
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| faces[fi].height(&pts[a]).total_cmp(&faces[fi].height(&pts[b])))
            .expect("nonempty");
        let p = pts[apex];
        // visible region by flood fill
        let mut visible = vec![fi];
        let mut seen = std::collections::HashSet::from([fi]);
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            let v = faces[f].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                if let Some(&g) = edges.get(&(b, a)) {
                    if !seen.contains(&g) && faces[g].height(&p) > eps {
                        seen.insert(g);
                        visible.push(g);
                    }
                }
            }
        }
        let mut horizon = Vec::new();
        let mut orphans = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                match edges.get(&(b, a)) {
                    Some(g) if seen.contains(g) => {}
                    _ => horizon.push((a, b)),
                }
            }
        }
        for &f in &visible {
            let v = faces[f].v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                if edges.get(&e) == Some(&f) {
                    edges.remove(&e);
                }
            }
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
        }
        let mut created = Vec::with_capacity(horizon.len());
        for (a, b) in horizon {
            let f = Face::new(pts, [a, b, apex]);
            let id = faces.len();
            edges.insert((a, b), id);
            edges.insert((b, apex), id);
            edges.insert((apex, a), id);
            faces.push(f);
            created.push(id);
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            if let Some(&f) = created.iter().find(|&&f| faces[f].height(&pts[q]) > eps) {
                faces[f].outside.push(q);
            }
        }
        stack.extend(created);
    }

    let mut vol = 0.0;
    for f in faces.iter().filter(|f| f.alive) {
        let a = sub3(&pts[f.v[0]], &interior);
        let b = sub3(&pts[f.v[1]], &interior);
        let c = sub3(&pts[f.v[2]], &interior);
        vol += dot3(&a, &cross3(&b, &c));
    }
    (vol / 6.0).abs()
}

/// `vol(K \ hull(sample))`: exact for d <= 3, Monte Carlo on `probes` uniform points otherwise.
pub fn deficit_volume(body: &ConvexBody, sample: &HullSample, probes: usize, stream: &StreamKey) -> Result<(f64, f64)> {
    if body.dim() != sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: sample.dim(),
        });
    }
    if body.dim() <= 3 {
        let hull = hull_volume_low_dim(sample)?;
        return Ok(((body.volume() - hull).max(0.0), 0.0));
    }
    deficit_volume_monte_carlo(body, sample, probes, stream)
}

/// Monte Carlo deficit in any dimension: `vol(K)` times the fraction of probes outside the hull.
pub fn deficit_volume_monte_carlo(
    body: &ConvexBody,
    sample: &HullSample,
    probes: usize,
    stream: &StreamKey,
) -> Result<(f64, f64)> {
    if probes == 0 {
        return Err(Error::Domain("the Monte Carlo deficit needs probes >= 1".into()));
    }
    let oracle = HullOracle::new(sample);
    let tol = sample.default_tol().max(f64::MIN_POSITIVE);
    let zs = sample_uniform(body, probes, stream)?;
    let mut outside = 0usize;
    for z in zs.points() {
        if oracle.query(z, tol)? == Membership::Outside {
            outside += 1;
        }
    }
    let (p, se) = proportion(outside, probes);
    let vol = body.volume();
    Ok((vol * p, vol * se))
}
