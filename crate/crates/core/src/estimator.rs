//! Monte Carlo estimates of the volume deficit `vol(K) - E(K, n)`.
//!
//! Trial `t` draws its points from `stream.substream(t)` and, on the
//! Monte Carlo hull path, its probes from `stream.substream(t).substream(1)`.
//! Trials run on the current rayon pool and are aggregated in trial order
//! by pairwise summation, so results do not depend on the worker count.

use rayon::prelude::*;

use crate::bodies::ConvexBody;
use crate::hull::deficit_volume;
use crate::sampling::{sample_uniform, StreamKey};
use crate::specialfn::{affine_surface_area, c_d};
use crate::stats::mean_stderr;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitEstimate {
    pub n: usize,
    pub trials: usize,
    pub probes: usize,
    pub deficit_mean: f64,
    pub deficit_stderr: f64,
    /// `deficit_mean * (n / vol(K))^{2/(d+1)}`.
    pub scaled: f64,
    pub scaled_stderr: f64,
    pub stream: StreamKey,
}

/// `(n / vol)^{2/(d+1)}`.
pub fn scale_factor(d: usize, n: usize, vol: f64) -> f64 {
    (n as f64 / vol).powf(2.0 / (d as f64 + 1.0))
}

/// Per-trial deficits, in trial order.
pub fn trial_deficits(body: &ConvexBody, n: usize, trials: usize, probes: usize, stream: &StreamKey) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    if body.dim() > 3 && probes == 0 {
        return Err(Error::Domain(format!("d = {} needs probes >= 1", body.dim())));
    }
    // fail early and deterministically on infeasible rejection sampling
    body.acceptance_rate();
    body.volume();
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let key = stream.substream(t);
            let sample = sample_uniform(body, n, &key)?;
            deficit_volume(body, &sample, probes, &key.substream(1)).map(|(v, _)| v)
        })
        .collect()
}

pub fn estimate_deficit(
    body: &ConvexBody,
    n: usize,
    trials: usize,
    probes: usize,
    stream: &StreamKey,
) -> Result<DeficitEstimate> {
    if trials < 2 {
        return Err(Error::Domain("trials must be >= 2".into()));
    }
    let deficits = trial_deficits(body, n, trials, probes, stream)?;
    let (mean, se) = mean_stderr(&deficits);
    let f = scale_factor(body.dim(), n, body.volume());
    Ok(DeficitEstimate {
        n,
        trials,
        probes,
        deficit_mean: mean,
        deficit_stderr: se,
        scaled: mean * f,
        scaled_stderr: se * f,
        stream: stream.clone(),
    })
}

/// `as(K) / c(d)`: the limit of the scaled deficit.
pub fn predicted_limit(body: &ConvexBody) -> Result<f64> {
    Ok(affine_surface_area(body)? / c_d(body.dim()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub estimate: DeficitEstimate,
    pub predicted_limit: f64,
}

/// One estimate per `n`. With `crn` every row reuses `stream`, so row samples
/// are nested prefixes of each other; otherwise row `n` uses `stream.substream(n)`.
pub fn convergence_table(
    body: &ConvexBody,
    ns: &[usize],
    trials: usize,
    probes: usize,
    stream: &StreamKey,
    crn: bool,
) -> Result<Vec<TableRow>> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("ns must be nonempty and strictly increasing".into()));
    }
    let limit = predicted_limit(body)?;
    ns.iter()
        .map(|&n| {
            let key = if crn { stream.clone() } else { stream.substream(n as u64) };
            Ok(TableRow {
                estimate: estimate_deficit(body, n, trials, probes, &key)?,
                predicted_limit: limit,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_points_in_the_disk_leave_everything() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let e = estimate_deficit(&disk, 2, 10, 0, &StreamKey::root(1)).unwrap();
        assert_eq!(e.deficit_mean, PI);
        assert_eq!(e.deficit_stderr, 0.0);
    }

    #[test]
    fn scaled_identity_holds() {
        let sq = ConvexBody::unit_cube(2).unwrap();
        let e = estimate_deficit(&sq, 50, 20, 0, &StreamKey::root(2)).unwrap();
        let expect = e.deficit_mean * (50.0f64 / 1.0).powf(2.0 / 3.0);
        assert!((e.scaled - expect).abs() <= 1e-12 * expect);
        assert!(e.deficit_mean >= 0.0 && e.deficit_mean <= 1.0);
    }

    #[test]
    fn predicted_limits() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!((predicted_limit(&disk).unwrap() - 4.955_049_697_069_332_593).abs() < 1e-12);
        let ball = ConvexBody::ball(vec![0.0; 3], 1.0).unwrap();
        assert!((predicted_limit(&ball).unwrap() - 9.162_978_572_970_230_279).abs() < 1e-12);
        assert_eq!(predicted_limit(&ConvexBody::unit_cube(2).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let run = |w: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .unwrap()
                .install(|| estimate_deficit(&disk, 200, 64, 0, &StreamKey::root(3)).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a, run(8));
    }

    #[test]
    fn crn_rows_are_nested_and_deficit_decreases() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let s = StreamKey::root(4);
        let small = trial_deficits(&disk, 100, 50, 0, &s).unwrap();
        let large = trial_deficits(&disk, 1000, 50, 0, &s).unwrap();
        assert!(small.iter().zip(&large).all(|(a, b)| a >= b));
    }

    #[test]
    fn table_rejects_unsorted_ns() {
        let disk = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(convergence_table(&disk, &[100, 10], 2, 0, &StreamKey::root(0), false).is_err());
    }

    #[test]
    fn four_dimensional_path_needs_probes() {
        let c = ConvexBody::unit_cube(4).unwrap();
        assert!(estimate_deficit(&c, 10, 2, 0, &StreamKey::root(0)).is_err());
        let e = estimate_deficit(&c, 10, 2, 200, &StreamKey::root(0)).unwrap();
        assert!(e.deficit_mean > 0.5);
    }
}
