//! Verification suites run by `stochgeo verify`.
//!
//! Each suite returns a list of checks (value, bound, pass) and, where it
//! produces one, a data table written next to the check summary.

use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bodies::{enumerate_vertices, ConvexBody, Halfspace, Shape};
use crate::convolution::{
    covariogram, covariogram_monte_carlo, lemma18_limit, lemma18_ratio_ball, lemma2_check_disk, lemma7_bound,
    lemma7_monte_carlo,
};
use crate::estimator::{convergence_table, estimate_deficit, predicted_limit};
use crate::hull::{convex_hull_2d, hull_volume_low_dim, in_hull, HullSample, Membership};
use crate::sampling::{sample_uniform, uniform01, StreamKey};
use crate::specialfn::{cap_bound_values, cap_volume_exact, theorem1_consistency, CapGeometry};
use crate::{Error, Result};

pub const SUITES: [&str; 8] = [
    "theorem1-trend",
    "lemma2",
    "lemma4",
    "lemma7",
    "lemma18",
    "consistency",
    "oracle-hull",
    "sampler-uniformity",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `None` for reported-only quantities.
    pub bound: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn upper(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Some(bound),
            passed: value < bound,
        }
    }

    fn holds(name: impl Into<String>, value: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound: None,
            passed,
        }
    }

    fn report(name: impl Into<String>, value: f64) -> Self {
        Self::holds(name, value, true)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub data: Option<Table>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Knobs a suite may take from the experiment config.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteParams {
    pub seed: u64,
    pub ns: Option<Vec<usize>>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub probes: Option<usize>,
    pub dmax: usize,
}

pub fn run_suite(name: &str, p: &SuiteParams) -> Result<SuiteReport> {
    let stream = StreamKey::root(p.seed);
    let (checks, data) = match name {
        "theorem1-trend" => theorem1_trend(p, &stream)?,
        "lemma2" => lemma2()?,
        "lemma4" => lemma4()?,
        "lemma7" => lemma7(p, &stream)?,
        "lemma18" => lemma18()?,
        "consistency" => consistency(p.dmax),
        "oracle-hull" => oracle_hull(&stream)?,
        "sampler-uniformity" => sampler_uniformity(p, &stream)?,
        other => return Err(Error::Config(format!("unknown suite {other:?}; expected one of {SUITES:?} or all"))),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        checks,
        data,
    })
}

type SuiteOutput = (Vec<Check>, Option<Table>);

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn theorem1_trend(p: &SuiteParams, stream: &StreamKey) -> Result<SuiteOutput> {
    let ns = p.ns.clone().unwrap_or_else(|| vec![1_000, 10_000, 100_000]);
    let trials = p.trials.unwrap_or(1_000);
    let mut checks = Vec::new();
    let mut table = Table::new(&["body_id", "n", "trials", "deficit_mean", "deficit_stderr", "scaled", "scaled_stderr", "predicted_limit"]);

    let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0)?;
    let rows = convergence_table(&disk, &ns, trials, 0, &stream.substream(0), false)?;
    let limit = rows[0].predicted_limit;
    let gaps: Vec<f64> = rows.iter().map(|r| (r.estimate.scaled - limit).abs()).collect();
    checks.push(Check::holds("disk |scaled - limit| strictly decreasing", *gaps.last().unwrap(), strictly_decreasing(&gaps)));
    let last = rows.last().unwrap().estimate.scaled;
    checks.push(Check::upper("disk relative gap at largest n", (last - limit).abs() / limit, 0.15));
    for r in &rows {
        table.push(row_of("ball:d=2,r=1", &r.estimate, r.predicted_limit));
    }

    let square = ConvexBody::unit_cube(2)?;
    let rows = convergence_table(&square, &ns, trials, 0, &stream.substream(1), false)?;
    let scaled: Vec<f64> = rows.iter().map(|r| r.estimate.scaled).collect();
    checks.push(Check::holds("square scaled strictly decreasing", *scaled.last().unwrap(), strictly_decreasing(&scaled)));
    checks.push(Check::upper("square scaled ratio last/first", scaled.last().unwrap() / scaled[0], 0.5));
    for r in &rows {
        table.push(row_of("box:d=2", &r.estimate, r.predicted_limit));
    }

    // equal-area ellipse and disk share the limit
    let n_eq = 10_000;
    let ell = ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0 / PI.sqrt(), 0.5 / PI.sqrt()])?;
    let dsk = ConvexBody::ball(vec![0.0, 0.0], 1.0 / PI.sqrt())?;
    let e = estimate_deficit(&ell, n_eq, trials, 0, &stream.substream(2))?;
    let d = estimate_deficit(&dsk, n_eq, trials, 0, &stream.substream(3))?;
    let joint = (e.scaled_stderr.powi(2) + d.scaled_stderr.powi(2)).sqrt();
    checks.push(Check::upper("unit-area ellipse vs disk |diff| / joint sigma", (e.scaled - d.scaled).abs() / joint, 3.0));
    table.push(row_of("ellipsoid:unit-area(2,1)", &e, predicted_limit(&ell)?));
    table.push(row_of("ball:unit-area", &d, predicted_limit(&dsk)?));
    Ok((checks, Some(table)))
}

fn row_of(id: &str, e: &crate::DeficitEstimate, limit: f64) -> Vec<String> {
    vec![
        id.to_string(),
        e.n.to_string(),
        e.trials.to_string(),
        fmt_f64(e.deficit_mean),
        fmt_f64(e.deficit_stderr),
        fmt_f64(e.scaled),
        fmt_f64(e.scaled_stderr),
        fmt_f64(limit),
    ]
}

/// The 20-point grid `t in [0.1 T, 0.9 T]` of the disk check.
pub fn lemma2_grid(r: f64) -> Vec<f64> {
    let big_t = PI * r * r;
    (0..20).map(|k| big_t * (0.1 + 0.8 * k as f64 / 19.0)).collect()
}

fn lemma2() -> Result<SuiteOutput> {
    let rows = lemma2_check_disk(1.0, &lemma2_grid(1.0))?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let (mean, sd) = mean_sd(&ratios);
    let mut table = Table::new(&["t", "rho", "g", "lhs", "rhs", "ratio"]);
    for r in &rows {
        table.push([r.t, r.rho, r.g, r.lhs, r.rhs, r.ratio].iter().map(|v| fmt_f64(*v)).collect());
    }
    let signs = rows.iter().all(|r| r.lhs < 0.0 && r.rhs < 0.0);
    Ok((
        vec![
            Check::upper("ratio sample standard deviation", sd, 1e-6),
            Check::holds("lhs and rhs negative", rows.len() as f64, signs),
            Check::report("ratio constant (reported)", mean),
        ],
        Some(table),
    ))
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn lemma4() -> Result<SuiteOutput> {
    let mut table = Table::new(&["d", "r", "delta", "exact", "lower", "upper", "asserted", "holds"]);
    let mut violations = 0usize;
    let mut asserted = 0usize;
    for d in 2..=8 {
        for r in [0.5, 1.0, 2.0] {
            for k in 1..=40 {
                let frac = 0.05 * k as f64;
                let delta = frac * r;
                let exact = cap_volume_exact(&CapGeometry::new(d, r, delta)?)?;
                let (lo, hi) = cap_bound_values(d, r, delta);
                let holds = lo <= exact && exact <= hi;
                let in_range = k <= 20;
                if in_range {
                    asserted += 1;
                    if !holds {
                        violations += 1;
                    }
                }
                table.push(vec![
                    d.to_string(),
                    fmt_f64(r),
                    fmt_f64(delta),
                    fmt_f64(exact),
                    fmt_f64(lo),
                    fmt_f64(hi),
                    in_range.to_string(),
                    holds.to_string(),
                ]);
            }
        }
    }
    Ok((
        vec![
            Check::upper("sandwich violations for delta <= r", violations as f64, 0.5),
            Check::report("asserted grid points", asserted as f64),
        ],
        Some(table),
    ))
}

fn lemma7(p: &SuiteParams, stream: &StreamKey) -> Result<SuiteOutput> {
    let trials = p.trials.unwrap_or(10_000);
    let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0)?;
    let vol = disk.volume();
    let mut checks = Vec::new();
    let mut table = Table::new(&["n", "t", "bound", "mc_estimate", "mc_stderr"]);
    for (i, n) in [50usize, 200, 1000].into_iter().enumerate() {
        for (j, s) in [0.01, 0.05, 0.2].into_iter().enumerate() {
            let t = 2.0 * vol * s;
            let bound = lemma7_bound(2, n, t, vol)?;
            let key = stream.substream((3 * i + j) as u64);
            let (_, pr, se) = lemma7_monte_carlo(&disk, n, t, &[1.0, 0.0], trials, &key)?;
            checks.push(Check::holds(
                format!("bound >= mc - 3 se (n={n}, s={s})"),
                bound - (pr - 3.0 * se),
                bound >= pr - 3.0 * se,
            ));
            table.push(vec![n.to_string(), fmt_f64(t), fmt_f64(bound), fmt_f64(pr), fmt_f64(se)]);
        }
    }
    Ok((checks, Some(table)))
}

fn lemma18() -> Result<SuiteOutput> {
    let mut checks = Vec::new();
    let mut table = Table::new(&["d", "t", "ratio", "limit", "relerr"]);
    for d in [2usize, 3] {
        let big_t = crate::specialfn::unit_ball_volume(d);
        let limit = lemma18_limit(d, 1.0);
        for k in 1..=10 {
            let t = big_t * 10f64.powi(-k);
            let ratio = lemma18_ratio_ball(d, 1.0, t)?;
            let rel = (ratio - limit).abs() / limit;
            table.push(vec![d.to_string(), fmt_f64(t), fmt_f64(ratio), fmt_f64(limit), fmt_f64(rel)]);
            if k == 8 {
                checks.push(Check::upper(format!("d={d} relative error at t = 1e-8 T"), rel, 1e-3));
            }
        }
    }
    Ok((checks, Some(table)))
}

fn consistency(dmax: usize) -> SuiteOutput {
    let mut checks = Vec::new();
    for d in 2..=dmax.max(2) {
        for r in [0.5, 1.0, 2.0] {
            checks.push(Check::upper(format!("d={d} r={r} residual"), theorem1_consistency(d, r), 1e-9));
        }
    }
    (checks, None)
}

/// Exact membership in the convex polygon `hull` (counter-clockwise), with
/// the distance of `z` to the polygon boundary.
pub fn polygon_membership(hull: &[[f64; 2]], z: [f64; 2]) -> (bool, f64) {
    let m = hull.len();
    let mut inside = m >= 3;
    let mut dmin = f64::INFINITY;
    for k in 0..m {
        let (a, b) = (hull[k], hull[(k + 1) % m]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        let cross = ex * (z[1] - a[1]) - ey * (z[0] - a[0]);
        if cross < 0.0 {
            inside = false;
        }
        let s = (((z[0] - a[0]) * ex + (z[1] - a[1]) * ey) / (len * len)).clamp(0.0, 1.0);
        let (px, py) = (a[0] + s * ex - z[0], a[1] + s * ey - z[1]);
        dmin = dmin.min((px * px + py * py).sqrt());
    }
    (inside, dmin)
}

fn oracle_hull(stream: &StreamKey) -> Result<SuiteOutput> {
    let mut rng = stream.substream(0).rng();
    let (mut agree, mut total, mut skipped) = (0usize, 0usize, 0usize);
    for _ in 0..500 {
        let n = 3 + (uniform01(&mut rng) * 48.0) as usize;
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [uniform01(&mut rng), uniform01(&mut rng)]).collect();
        let sample = HullSample::from_points(2, &pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>())?;
        let hull = convex_hull_2d(&pts);
        let tol = sample.default_tol();
        for _ in 0..100 {
            let z = [1.5 * uniform01(&mut rng) - 0.25, 1.5 * uniform01(&mut rng) - 0.25];
            let (inside, dist) = polygon_membership(&hull, z);
            if dist < 1e-7 {
                skipped += 1;
                continue;
            }
            total += 1;
            let lp_inside = in_hull(&sample, &z, tol)? == Membership::Inside;
            if lp_inside == inside {
                agree += 1;
            }
        }
    }
    let mut checks = vec![
        Check::holds("in_hull agrees with polygon membership", agree as f64 / total as f64, agree == total),
        Check::report("probes within 1e-7 of the boundary (skipped)", skipped as f64),
    ];

    let mut rng = stream.substream(1).rng();
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let d = 2 + (k % 2) as usize;
        let r = 0.5 + 1.5 * uniform01(&mut rng);
        let c: Vec<f64> = (0..d).map(|_| 2.0 * uniform01(&mut rng) - 1.0).collect();
        let ball = ConvexBody::ball(c.clone(), r)?;
        let x = sample_uniform(&ball, 1, &stream.substream(2).substream(k))?.point(0).to_vec();
        let (exact, _) = covariogram(&ball, &x, 0, stream)?;
        let (mc, se) = covariogram_monte_carlo(&ball, &x, 20_000, &stream.substream(3).substream(k))?;
        let z = if se > 0.0 { (mc - exact).abs() / se } else if (mc - exact).abs() <= 1e-12 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    checks.push(Check::upper("covariogram MC vs lens: max |diff| / stderr", worst, 5.0));
    Ok((checks, None))
}

fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let k = observed.len();
    match ChiSquared::new((k - 1) as f64) {
        Ok(dist) => 1.0 - dist.cdf(stat),
        Err(_) => f64::NAN,
    }
}

/// Radial and directional bins of a ball or ellipsoid sample mapped back to the unit ball.
fn round_body_bins(body: &ConvexBody, sample: &HullSample) -> (Vec<f64>, Vec<f64>) {
    let d = body.dim();
    let (rbins, abins) = (10usize, 8usize);
    let mut counts = vec![0.0; rbins * abins];
    for x in sample.points() {
        let y: Vec<f64> = match body.shape() {
            Shape::Ball { center, radius } => x.iter().zip(center.iter()).map(|(a, c)| (a - c) / radius).collect(),
            Shape::Ellipsoid(e) => {
                let inv = e.map().clone().try_inverse().expect("positive definite");
                let w = nalgebra::DVector::from_iterator(d, x.iter().zip(e.center().iter()).map(|(a, c)| a - c));
                (inv * w).iter().copied().collect()
            }
            _ => unreachable!("round bodies only"),
        };
        let rho = crate::linalg::norm(&y);
        let rb = ((rho.powi(d as i32) * rbins as f64) as usize).min(rbins - 1);
        // angle in the plane for d = 2; last coordinate of the direction (uniform on [-1, 1]) for d = 3
        let u = if d == 2 {
            (y[1].atan2(y[0]) + PI) / (2.0 * PI)
        } else {
            0.5 * (y[d - 1] / rho + 1.0)
        };
        let ab = ((u * abins as f64) as usize).min(abins - 1);
        counts[rb * abins + ab] += 1.0;
    }
    let n = sample.len() as f64;
    let expected = vec![n / (rbins * abins) as f64; rbins * abins];
    (counts, expected)
}

/// Grid bins over the bounding box of a planar polytope, with exact cell areas.
fn polygon_bins(body: &ConvexBody, sample: &HullSample) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = 8usize;
    let (lo, hi) = body.bounding_box();
    let (lo, hi) = ([lo[0], lo[1]], [hi[0], hi[1]]);
    let w = [(hi[0] - lo[0]) / g as f64, (hi[1] - lo[1]) / g as f64];
    let n = sample.len() as f64;
    let vol = body.volume();
    let mut counts = vec![0.0; g * g];
    for x in sample.points() {
        let i = (((x[0] - lo[0]) / w[0]) as usize).min(g - 1);
        let j = (((x[1] - lo[1]) / w[1]) as usize).min(g - 1);
        counts[i * g + j] += 1.0;
    }
    let mut expected = vec![0.0; g * g];
    for i in 0..g {
        for j in 0..g {
            let (x0, y0) = (lo[0] + i as f64 * w[0], lo[1] + j as f64 * w[1]);
            let mut hs = body.facets().to_vec();
            hs.push(Halfspace::new(vec![1.0, 0.0], x0 + w[0])?);
            hs.push(Halfspace::new(vec![-1.0, 0.0], -x0)?);
            hs.push(Halfspace::new(vec![0.0, 1.0], y0 + w[1])?);
            hs.push(Halfspace::new(vec![0.0, -1.0], -y0)?);
            let verts = enumerate_vertices(&hs, body.scale());
            let area = if verts.len() >= 3 {
                hull_volume_low_dim(&HullSample::from_points(2, &verts)?)?
            } else {
                0.0
            };
            expected[i * g + j] = n * area / vol;
        }
    }
    // pool sparse cells so that every bin expects at least 5 points
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut po, mut pe) = (0.0, 0.0);
    for (o, e) in counts.into_iter().zip(expected) {
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
        } else {
            po += o;
            pe += e;
        }
    }
    if pe > 0.0 {
        obs.push(po);
        exp.push(pe);
    } else if po > 0.0 {
        // points in cells of zero area
        obs.push(po);
        exp.push(f64::MIN_POSITIVE);
    }
    Ok((obs, exp))
}

fn sampler_uniformity(p: &SuiteParams, stream: &StreamKey) -> Result<SuiteOutput> {
    let n = p.n.unwrap_or(100_000);
    let pentagon = ConvexBody::hpolytope(
        (0..5)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 5.0;
                (vec![a.cos(), a.sin()], 1.0)
            })
            .collect(),
        vec![0.0, 0.0],
    )?;
    let bodies: Vec<(&str, ConvexBody)> = vec![
        ("ball:d=2,r=1", ConvexBody::ball(vec![0.0, 0.0], 1.0)?),
        ("ball:d=3,r=1", ConvexBody::ball(vec![0.0; 3], 1.0)?),
        ("ellipsoid:axes=2,1", ConvexBody::ellipsoid_axes(vec![0.0, 0.0], &[2.0, 1.0])?),
        ("box:d=2", ConvexBody::unit_cube(2)?),
        ("simplex:d=2", ConvexBody::standard_simplex(2)?),
        ("hpoly:pentagon", pentagon),
    ];
    let mut checks = Vec::new();
    let mut table = Table::new(&["body_id", "bins", "p_value"]);
    for (k, (id, body)) in bodies.iter().enumerate() {
        let sample = sample_uniform(body, n, &stream.substream(k as u64))?;
        let (obs, exp) = match body.shape() {
            Shape::Ball { .. } | Shape::Ellipsoid(_) => round_body_bins(body, &sample),
            _ => polygon_bins(body, &sample)?,
        };
        let pv = chi_square_pvalue(&obs, &exp);
        checks.push(Check::holds(format!("{id} chi-square p-value > 1e-3"), pv, pv > 1e-3));
        table.push(vec![id.to_string(), obs.len().to_string(), fmt_f64(pv)]);
    }
    Ok((checks, Some(table)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SuiteParams {
        SuiteParams {
            seed: 1,
            ns: None,
            n: None,
            trials: None,
            probes: None,
            dmax: 10,
        }
    }

    #[test]
    fn fast_suites_pass() {
        for s in ["lemma2", "lemma4", "lemma18", "consistency"] {
            let r = run_suite(s, &params()).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.checks);
        }
    }

    #[test]
    fn sampler_uniformity_passes() {
        let mut p = params();
        p.n = Some(20_000);
        let r = run_suite("sampler-uniformity", &p).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(run_suite("lemma99", &params()), Err(Error::Config(_))));
    }

    #[test]
    fn polygon_membership_on_the_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(polygon_membership(&sq, [0.5, 0.5]), (true, 0.5));
        assert!(!polygon_membership(&sq, [1.5, 0.5]).0);
    }
}
