//! Splittable random streams and uniform sampling in convex bodies.
//!
//! A [`StreamKey`] is a root seed plus a path of child indices. Each key maps
//! to an independent ChaCha8 generator, so trial `i` of an experiment always
//! sees the same numbers regardless of how trials are scheduled. Draws from
//! one key are prefix-consistent: the first `m` points of an `n`-point sample
//! are the `m`-point sample.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::function::erf::erfc_inv;

use crate::bodies::{ConvexBody, Shape};
use crate::hull::HullSample;
use crate::linalg::norm;
use crate::{Error, Result};

/// Acceptance rates below this make rejection sampling an error.
pub const MIN_ACCEPTANCE: f64 = 1e-6;
/// Number of bounding-box draws used to estimate the acceptance rate.
pub const PILOT_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    path: Vec<u64>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64, path: Vec<u64>) -> Self {
        Self { seed, path }
    }

    pub fn root(seed: u64) -> Self {
        Self::new(seed, Vec::new())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Child stream `i`.
    pub fn substream(&self, i: u64) -> Self {
        let mut path = self.path.clone();
        path.push(i);
        Self {
            seed: self.seed,
            path,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        // length-prefixed so that distinct paths never share a state
        let mut h = splitmix(self.seed ^ 0x5354_4f43_4847_454f);
        h = splitmix(h ^ self.path.len() as u64);
        for &p in &self.path {
            h = splitmix(h ^ splitmix(p));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            h = splitmix(h);
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
#[inline]
pub fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by inversion.
#[inline]
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * uniform01(rng))
}

/// Uniform point of the unit ball `B^d`, written into `out`.
pub fn unit_ball_point<R: RngCore>(rng: &mut R, out: &mut [f64]) {
    let d = out.len();
    loop {
        for v in out.iter_mut() {
            *v = standard_normal(rng);
        }
        let n = norm(out);
        if n > 0.0 {
            let r = uniform01(rng).powf(1.0 / d as f64);
            for v in out.iter_mut() {
                *v *= r / n;
            }
            return;
        }
    }
}

/// Uniform point of the box `[lo, hi]`.
#[inline]
pub fn box_point<R: RngCore>(rng: &mut R, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    for ((o, l), h) in out.iter_mut().zip(lo).zip(hi) {
        *o = l + (h - l) * uniform01(rng);
    }
}

/// Draws one uniform point of `body` into `out`.
fn body_point<R: RngCore>(body: &ConvexBody, rng: &mut R, out: &mut [f64], scratch: &mut [f64]) {
    let d = body.dim();
    match body.shape() {
        Shape::Ball { center, radius } => {
            unit_ball_point(rng, out);
            for (o, c) in out.iter_mut().zip(center.iter()) {
                *o = c + radius * *o;
            }
        }
        Shape::Ellipsoid(e) => {
            unit_ball_point(rng, scratch);
            let t = e.map();
            for i in 0..d {
                let mut s = e.center()[i];
                for j in 0..d {
                    s += t[(i, j)] * scratch[j];
                }
                out[i] = s;
            }
        }
        Shape::Box { lo, hi } => box_point(rng, lo, hi, out),
        Shape::Simplex { vertices } => {
            // Dirichlet(1, ..., 1) weights
            let mut w = Vec::with_capacity(d + 1);
            for _ in 0..=d {
                w.push(-uniform01(rng).ln());
            }
            let total: f64 = w.iter().sum();
            out.fill(0.0);
            for (wi, v) in w.iter().zip(vertices) {
                for (o, x) in out.iter_mut().zip(v.iter()) {
                    *o += wi / total * x;
                }
            }
        }
        Shape::HPolytope { .. } => {
            let (lo, hi) = body.bounding_box();
            loop {
                box_point(rng, lo, hi, out);
                if body.contains_unchecked(out) {
                    return;
                }
            }
        }
    }
}

/// `n` independent uniform points of `body` from the given stream.
pub fn sample_uniform(body: &ConvexBody, n: usize, stream: &StreamKey) -> Result<HullSample> {
    let rate = body.acceptance_rate();
    if rate < MIN_ACCEPTANCE {
        return Err(Error::RejectionInfeasible {
            rate,
            draws: PILOT_DRAWS,
        });
    }
    let d = body.dim();
    let mut rng = stream.rng();
    let mut coords = vec![0.0; n * d];
    let mut scratch = vec![0.0; d];
    for p in coords.chunks_mut(d) {
        body_point(body, &mut rng, p, &mut scratch);
    }
    HullSample::new(d, coords)
}

/// `n` uniform points of the box `[lo, hi]`.
pub fn sample_box(lo: &[f64], hi: &[f64], n: usize, stream: &StreamKey) -> Vec<f64> {
    let d = lo.len();
    let mut rng = stream.rng();
    let mut coords = vec![0.0; n * d];
    for p in coords.chunks_mut(d) {
        box_point(&mut rng, lo, hi, p);
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = StreamKey::root(7);
        let mut r1 = a.rng();
        let mut r2 = a.rng();
        assert_eq!(r1.next_u64(), r2.next_u64());
        let mut c0 = a.substream(0).rng();
        let mut c1 = a.substream(1).rng();
        assert_ne!(c0.next_u64(), c1.next_u64());
        // path [0] and path [0, 0] differ
        assert_ne!(a.substream(0).rng().next_u64(), a.substream(0).substream(0).rng().next_u64());
        assert_ne!(StreamKey::root(1).rng().next_u64(), StreamKey::root(2).rng().next_u64());
    }

    #[test]
    fn uniform01_is_open() {
        let mut rng = StreamKey::root(3).rng();
        for _ in 0..10_000 {
            let u = uniform01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = StreamKey::root(11).rng();
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn samples_are_prefix_consistent() {
        let body = ConvexBody::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let s = StreamKey::root(5);
        let a = sample_uniform(&body, 10, &s).unwrap();
        let b = sample_uniform(&body, 25, &s).unwrap();
        assert_eq!(a.coords(), &b.coords()[..30]);
    }

    #[test]
    fn samples_lie_in_body() {
        let bodies = vec![
            ConvexBody::ball(vec![1.0, -2.0], 0.5).unwrap(),
            ConvexBody::ellipsoid_axes(vec![0.0, 0.0, 0.0], &[3.0, 1.0, 0.2]).unwrap(),
            ConvexBody::unit_cube(4).unwrap(),
            ConvexBody::standard_simplex(3).unwrap(),
            crate::bodies::parse_hpolytope("1 1 1\n-1 0 0\n0 -1 0\ninterior 0.2 0.2\n").unwrap(),
        ];
        for body in &bodies {
            let s = sample_uniform(body, 2000, &StreamKey::root(9)).unwrap();
            for p in s.points() {
                assert!(body.contains(p).unwrap(), "{body}: {p:?}");
            }
        }
    }

    #[test]
    fn thin_polytope_is_infeasible_for_rejection() {
        // a sliver of width 1e-9 along the diagonal of [0,1]²
        let k = ConvexBody::hpolytope(
            vec![
                (vec![1.0, -1.0], 5e-10),
                (vec![-1.0, 1.0], 5e-10),
                (vec![1.0, 0.0], 1.0),
                (vec![-1.0, 0.0], 0.0),
            ],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            sample_uniform(&k, 10, &StreamKey::root(1)),
            Err(Error::RejectionInfeasible { .. })
        ));
    }
}
