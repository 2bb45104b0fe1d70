//! Covariogram `g(x) = vol((-x + K) ∩ (x - K))`, the convolution bodies
//! `K_t = {x in K : g(x) >= t}` (kept implicit, reached through [`x_t`]), and
//! numeric checks of the ball and disk identities built on them.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::bodies::{enumerate_vertices, ConvexBody, Halfspace, Shape, SurfacePoint, Vector};
use crate::hull::{hull_volume_low_dim, HullOracle, HullSample, Membership};
use crate::linalg::{dist, dot, norm, sub};
use crate::sampling::{box_point, sample_uniform, StreamKey};
use crate::specialfn::{cap_volume_exact, ln_gamma, unit_ball_volume, CapGeometry};
use crate::stats::proportion;
use crate::{Error, Result};

/// Volume of the lens `B(-ρu, r) ∩ B(ρu, r)`: two caps of height `r - ρ`.
pub fn lens_volume(d: usize, r: f64, rho: f64) -> Result<f64> {
    if !(0.0..=r).contains(&rho) {
        return Err(Error::Domain(format!("lens offset {rho} outside [0, {r}]")));
    }
    lens_volume_by_height(d, r, r - rho)
}

fn lens_volume_by_height(d: usize, r: f64, h: f64) -> Result<f64> {
    Ok(2.0 * cap_volume_exact(&CapGeometry::new(d, r, h)?)?)
}

/// Inverts the lens volume: the offset `ρ` with `lens(ρ) = t`, `0 <= t <= vol(B_r)`.
///
/// Works in the cap height `h = r - ρ` so that tiny `t` keeps full relative precision.
pub fn lens_height_for_volume(d: usize, r: f64, t: f64) -> Result<f64> {
    let full = unit_ball_volume(d) * r.powi(d as i32);
    if !(0.0..=full).contains(&t) {
        return Err(Error::Domain(format!("lens volume {t} outside [0, {full}]")));
    }
    let (mut lo, mut hi) = (0.0, r);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lens_volume_by_height(d, r, mid)? < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Newton polish: d lens / dh = 2 ω_{d-1} (h(2r - h))^{(d-1)/2}
    let mut h = 0.5 * (lo + hi);
    let mut resid = (lens_volume_by_height(d, r, h)? - t).abs();
    for _ in 0..3 {
        let slope = 2.0 * unit_ball_volume(d - 1) * (h * (2.0 * r - h)).powf(0.5 * (d as f64 - 1.0));
        if !(slope > 0.0) {
            break;
        }
        let cand = (h - (lens_volume_by_height(d, r, h)? - t) / slope).clamp(0.0, r);
        let cr = (lens_volume_by_height(d, r, cand)? - t).abs();
        if cr < resid {
            h = cand;
            resid = cr;
        } else {
            break;
        }
    }
    Ok(h)
}

fn check_in_body(body: &ConvexBody, x: &[f64]) -> Result<()> {
    if !body.contains(x)? {
        return Err(Error::NotInBody);
    }
    Ok(())
}

/// `g(x)` with its standard error: exact lens for balls, Monte Carlo otherwise.
pub fn covariogram(body: &ConvexBody, x: &[f64], probes: usize, stream: &StreamKey) -> Result<(f64, f64)> {
    check_in_body(body, x)?;
    if let Shape::Ball { center, radius } = body.shape() {
        let rho = dist(x, center).min(*radius);
        return Ok((lens_volume(body.dim(), *radius, rho)?, 0.0));
    }
    covariogram_monte_carlo(body, x, probes, stream)
}

/// Monte Carlo `g(x)` over the bounding box of `(-x + K) ∩ (x - K)`, for any kind.
pub fn covariogram_monte_carlo(body: &ConvexBody, x: &[f64], probes: usize, stream: &StreamKey) -> Result<(f64, f64)> {
    check_in_body(body, x)?;
    if probes == 0 {
        return Err(Error::Domain("covariogram Monte Carlo needs probes >= 1".into()));
    }
    let d = body.dim();
    let (blo, bhi) = body.bounding_box();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        lo[i] = (blo[i] - x[i]).max(x[i] - bhi[i]);
        hi[i] = (bhi[i] - x[i]).min(x[i] - blo[i]);
        if !(hi[i] > lo[i]) {
            return Ok((0.0, 0.0));
        }
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    let mut rng = stream.rng();
    let mut z = vec![0.0; d];
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..probes {
        box_point(&mut rng, &lo, &hi, &mut z);
        for i in 0..d {
            plus[i] = z[i] + x[i];
            minus[i] = x[i] - z[i];
        }
        if body.contains_unchecked(&plus) && body.contains_unchecked(&minus) {
            hits += 1;
        }
    }
    let (p, se) = proportion(hits, probes);
    Ok((box_vol * p, box_vol * se))
}

/// Deterministic `g(x)` where a closed form or exact polytope volume exists:
/// balls and ellipsoids through the lens, boxes as a product, polytopes for d <= 3.
pub fn covariogram_exact(body: &ConvexBody, x: &[f64]) -> Result<f64> {
    check_in_body(body, x)?;
    let d = body.dim();
    match body.shape() {
        Shape::Ball { center, radius } => lens_volume(d, *radius, dist(x, center).min(*radius)),
        Shape::Ellipsoid(e) => {
            // g_{c + T B}(c + T y) = |det T| g_B(y)
            let w = nalgebra::DVector::from_column_slice(&sub(x, e.center()));
            let inv = e.map().clone().try_inverse().ok_or(Error::Unsupported("singular ellipsoid map"))?;
            let y = inv * w;
            Ok(e.det_map() * lens_volume(d, 1.0, y.norm().min(1.0))?)
        }
        Shape::Box { lo, hi } => Ok(lo
            .iter()
            .zip(hi.iter())
            .zip(x)
            .map(|((l, h), xi)| ((h - l) - 2.0 * (xi - 0.5 * (l + h)).abs()).max(0.0))
            .product()),
        Shape::Simplex { .. } | Shape::HPolytope { .. } if d <= 3 => Ok(polytope_covariogram(body, x)),
        _ => Err(Error::Unsupported("exact covariogram of a polytope in d > 3")),
    }
}

// (-x + K) ∩ (x - K) = {z : a.z <= b - a.x, -a.z <= b - a.x}
fn polytope_covariogram(body: &ConvexBody, x: &[f64]) -> f64 {
    let mut hs = Vec::with_capacity(2 * body.facets().len());
    for h in body.facets() {
        let off = h.offset - dot(&h.normal, x);
        if off < 0.0 {
            return 0.0;
        }
        hs.push(Halfspace {
            normal: h.normal.clone(),
            offset: off,
        });
        hs.push(Halfspace {
            normal: h.normal.iter().map(|v| -v).collect(),
            offset: off,
        });
    }
    let verts = enumerate_vertices(&hs, body.scale());
    if verts.len() <= body.dim() {
        return 0.0;
    }
    HullSample::from_points(body.dim(), &verts)
        .and_then(|s| hull_volume_low_dim(&s))
        .unwrap_or(0.0)
}

/// Maximizer of `g` and `T = max g`, with the final search step as precision.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryPoint {
    pub point: Vector,
    pub t_max: f64,
    pub precision: f64,
}

/// Centrally symmetric kinds return their center with `T = vol(K)`; simplices
/// and H-polytopes (d <= 3) maximize the exact `g` by compass search on nested grids.
pub fn symmetry_point(body: &ConvexBody) -> Result<SymmetryPoint> {
    if body.is_centrally_symmetric() {
        return Ok(SymmetryPoint {
            point: body.center().clone(),
            t_max: body.volume(),
            precision: 0.0,
        });
    }
    let d = body.dim();
    if d > 3 {
        return Err(Error::Unsupported("symmetry point of a polytope in d > 3"));
    }
    // g^{1/d} is concave, so local search on it cannot stall at a spurious maximum
    let score = |p: &[f64]| -> f64 {
        if body.contains_unchecked(p) {
            polytope_covariogram(body, p)
        } else {
            0.0
        }
    };
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [-1.0, 1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
        for j in i + 1..d {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; d];
                e[i] = si * std::f64::consts::FRAC_1_SQRT_2;
                e[j] = sj * std::f64::consts::FRAC_1_SQRT_2;
                dirs.push(e);
            }
        }
    }
    let mut x = body.center().to_vec();
    let mut best = score(&x);
    let mut step = 0.25 * body.scale();
    let floor = 1e-10 * body.scale();
    while step > floor {
        let mut moved = false;
        for dir in &dirs {
            let cand: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + step * b).collect();
            let v = score(&cand);
            if v > best {
                best = v;
                x = cand;
                moved = true;
            }
        }
        if !moved {
            step *= 0.25;
        }
    }
    Ok(SymmetryPoint {
        point: Vector::new(x)?,
        t_max: best,
        precision: step,
    })
}

/// The point of `∂K_t` on the segment from the symmetry point to `x`.
pub fn x_t(body: &ConvexBody, x: &SurfacePoint, t: f64) -> Result<Vector> {
    let sp = symmetry_point(body)?;
    x_t_from(body, &sp, &x.x, t)
}

/// [`x_t`] with a precomputed symmetry point, toward an arbitrary boundary point.
pub fn x_t_from(body: &ConvexBody, sp: &SymmetryPoint, boundary: &[f64], t: f64) -> Result<Vector> {
    if !(t > 0.0 && t < sp.t_max) {
        return Err(Error::Domain(format!("t = {t} outside (0, {})", sp.t_max)));
    }
    let c = &sp.point;
    let at = |lam: f64| -> Vec<f64> { c.iter().zip(boundary).map(|(a, b)| a + lam * (b - a)).collect() };
    if let Shape::Ball { center, radius } = body.shape() {
        // closed-form inversion of the lens along the ray
        let h = lens_height_for_volume(body.dim(), *radius, t)?;
        let len = dist(boundary, center);
        return Vector::new(at((radius - h) / len));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if covariogram_exact(body, &at(mid))? > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Vector::new(at(0.5 * (lo + hi)))
}

/// `g` sampled along a ray from the symmetry point.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariogramProfile {
    pub body_id: String,
    pub direction: Vec<f64>,
    /// `(ρ, g, stderr)` triples.
    pub samples: Vec<(f64, f64, f64)>,
    pub t_max: f64,
}

/// `points` equally spaced samples of `g` from the symmetry point to the boundary along `u`.
pub fn covariogram_profile(
    body: &ConvexBody,
    u: &[f64],
    points: usize,
    probes: usize,
    stream: &StreamKey,
) -> Result<CovariogramProfile> {
    let nu = norm(u);
    if !(nu > 0.0) {
        return Err(Error::Domain("profile direction must be nonzero".into()));
    }
    let u: Vec<f64> = u.iter().map(|v| v / nu).collect();
    let sp = symmetry_point(body)?;
    let exit = body.ray_boundary(&sp.point, &u)?;
    let len = dist(&exit.x, &sp.point);
    let mut samples = Vec::with_capacity(points);
    for k in 0..points {
        let rho = if points > 1 { len * k as f64 / (points - 1) as f64 } else { 0.0 };
        let p: Vec<f64> = sp.point.iter().zip(&u).map(|(c, v)| c + rho * v).collect();
        let (g, se) = match covariogram_exact(body, &p) {
            Ok(g) => (g, 0.0),
            Err(Error::Unsupported(_)) => covariogram_monte_carlo(body, &p, probes, &stream.substream(k as u64))?,
            Err(e) => return Err(e),
        };
        samples.push((rho, g, se));
    }
    Ok(CovariogramProfile {
        body_id: body.to_string(),
        direction: u,
        samples,
        t_max: sp.t_max,
    })
}

/// `vol_{d-1}` of the projection of the lens at offset `ρ` along its axis.
pub fn projection_measure_ball(d: usize, r: f64, rho: f64) -> Result<f64> {
    if !(0.0..r).contains(&rho) {
        return Err(Error::Domain(format!("projection offset {rho} outside [0, {r})")));
    }
    let h = r - rho;
    Ok(projection_by_height(d, r, h))
}

fn projection_by_height(d: usize, r: f64, h: f64) -> f64 {
    // r² - ρ² = h(2r - h)
    unit_ball_volume(d - 1) * (h * (2.0 * r - h)).powf(0.5 * (d as f64 - 1.0))
}

/// `t^{(d-1)/(d+1)} / P(ρ(t))` for the ball of radius `r`.
pub fn lemma18_ratio_ball(d: usize, r: f64, t: f64) -> Result<f64> {
    let full = unit_ball_volume(d) * r.powi(d as i32);
    if !(t > 0.0 && t < full) {
        return Err(Error::Domain(format!("t = {t} outside (0, {full})")));
    }
    let h = lens_height_for_volume(d, r, t)?;
    let e = (d as f64 - 1.0) / (d as f64 + 1.0);
    Ok(t.powf(e) / projection_by_height(d, r, h))
}

/// Small-`t` limit of [`lemma18_ratio_ball`]:
/// `κ^{1/(d+1)} (2/(d+1))^{(d-1)/(d+1)} ω_{d-1}^{-2/(d+1)}` with `κ = r^{-(d-1)}`.
pub fn lemma18_limit(d: usize, r: f64) -> f64 {
    let df = d as f64;
    let e = (df - 1.0) / (df + 1.0);
    r.powf(-e) * (2.0 / (df + 1.0)).powf(e) * unit_ball_volume(d - 1).powf(-2.0 / (df + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Row {
    pub t: f64,
    pub rho: f64,
    pub g: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// On the disk of radius `r`: `lhs = d/dt vol(K_t)` by central differences
/// (step `t·1e-4`) and `rhs = -perimeter(K_t) / P(ρ(t))`.
pub fn lemma2_check_disk(r: f64, ts: &[f64]) -> Result<Vec<Lemma2Row>> {
    let big_t = PI * r * r;
    let rho_of = |t: f64| -> Result<f64> { Ok(r - lens_height_for_volume(2, r, t)?) };
    ts.iter()
        .map(|&t| {
            let step = t * 1e-4;
            if !(t - step > 0.0 && t + step < big_t) {
                return Err(Error::Domain(format!("t = {t} too close to 0 or T = {big_t} for differencing")));
            }
            let (rp, rm) = (rho_of(t + step)?, rho_of(t - step)?);
            let lhs = (PI * rp * rp - PI * rm * rm) / (2.0 * step);
            let h = lens_height_for_volume(2, r, t)?;
            let rho = r - h;
            let rhs = -(2.0 * PI * rho) / projection_by_height(2, r, h);
            Ok(Lemma2Row {
                t,
                rho,
                g: lens_volume_by_height(2, r, h)?,
                lhs,
                rhs,
                ratio: rhs / lhs,
            })
        })
        .collect()
}

/// `2 Σ_{i<d} C(n,i) s^i (1-s)^{n-i}` with `s = t/(2 vol)`, in log space.
pub fn lemma7_bound(d: usize, n: usize, t: f64, vol: f64) -> Result<f64> {
    if n == 0 || !(vol > 0.0) {
        return Err(Error::Domain("lemma7 bound needs n >= 1 and vol > 0".into()));
    }
    let s = t / (2.0 * vol);
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
    }
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..d.min(n + 1) {
        let fi = i as f64;
        let term = if s == 0.0 {
            if i == 0 { 1.0 } else { 0.0 }
        } else if s == 1.0 {
            if i == n { 1.0 } else { 0.0 }
        } else {
            let ln_binom = ln_gamma(nf + 1.0) - ln_gamma(fi + 1.0) - ln_gamma(nf - fi + 1.0);
            (ln_binom + fi * s.ln() + (nf - fi) * (-s).ln_1p()).exp()
        };
        sum += term;
    }
    Ok(2.0 * sum)
}

/// Monte Carlo `P{x_t not in hull(x_1..x_n)}` for `n` uniform points of `body`,
/// with `x_t` on the ray from the symmetry point toward `boundary`.
pub fn lemma7_monte_carlo(
    body: &ConvexBody,
    n: usize,
    t: f64,
    boundary: &[f64],
    trials: usize,
    stream: &StreamKey,
) -> Result<(Vector, f64, f64)> {
    let sp = symmetry_point(body)?;
    let xt = x_t_from(body, &sp, boundary, t)?;
    let outside: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|k| -> Result<bool> {
            let sample = sample_uniform(body, n, &stream.substream(k))?;
            let oracle = HullOracle::new(&sample);
            let tol = sample.default_tol().max(f64::MIN_POSITIVE);
            Ok(oracle.query(&xt, tol)? == Membership::Outside)
        })
        .collect::<Result<_>>()?;
    let (p, se) = proportion(outside.iter().filter(|&&o| o).count(), trials);
    Ok((xt, p, se))
}
