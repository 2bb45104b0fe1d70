//! Special functions and closed-form constants.
//!
//! Everything the limit theorem for random polytopes needs in closed form:
//! the gamma function, unit-ball volumes, the normalising constant `c(d)`,
//! the ball limit `W(d, r) = lim n^{2/(d+1)} (vol(B_r) - E(B_r, n))`, the
//! affine surface area of balls and ellipsoids, and exact volumes of
//! spherical caps together with the two-sided power-law bounds.

use std::f64::consts::PI;

use crate::bodies::{ConvexBody, Shape};
use crate::{Error, Result};

// Lanczos approximation, g = 10.900511, 11 terms (Pugh 2004).
const LANCZOS_G: f64 = 10.900511;
#[allow(clippy::excessive_precision)]
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
// 2 * sqrt(e / pi)
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_717_336_249_247_266_663_112;
// ln(2 * sqrt(e / pi))
const LN_TWO_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_222_345_518_445_781_647_212;

/// Dimension above which factorials and gamma values are combined in log space.
const LOG_SPACE_DIM: usize = 15;

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (i, &dk)| s + dk / (x + i as f64 - 1.0))
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        let g1mx = gamma(1.0 - x)?;
        return Ok(PI / ((PI * x).sin() * g1mx));
    }
    if x == x.floor() && x <= 171.0 {
        // exact factorials for integer arguments
        let mut acc = 1.0f64;
        let mut k = 2.0;
        while k < x {
            acc *= k;
            k += 1.0;
        }
        return Ok(acc);
    }
    if x >= 172.0 {
        return Ok(f64::INFINITY);
    }
    // shift into [1, 2): the Lanczos sum loses digits for large arguments
    let mut z = x;
    let mut prod = 1.0;
    while z >= 2.0 {
        z -= 1.0;
        prod *= z;
    }
    Ok(prod
        * lanczos_sum(z)
        * TWO_SQRT_E_OVER_PI
        * ((z - 0.5 + LANCZOS_G) / std::f64::consts::E).powf(z - 0.5))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    lanczos_sum(x).ln()
        + LN_TWO_SQRT_E_OVER_PI
        + (x - 0.5) * ((x - 0.5 + LANCZOS_G).ln() - 1.0)
}

/// ln(n!)
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 30 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    ln_gamma(n as f64 + 1.0)
}

/// Volume of the d-dimensional unit ball, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // recurrence ω_d = 2π/d · ω_{d-2} is exact enough and avoids Γ
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

pub fn ln_unit_ball_volume(d: usize) -> f64 {
    if d <= 100 {
        return unit_ball_volume(d).ln();
    }
    0.5 * d as f64 * PI.ln() - ln_gamma(0.5 * d as f64 + 1.0)
}

/// Surface area of the unit sphere in R^d, `d · ω_d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

/// The constant `c(d)` that turns the rescaled deficit limit into the
/// affine surface area:
///
/// `c(d) = 2 (ω_{d-1}/(d+1))^{2/(d+1)} (d+3)(d+1)! / ((d²+d+2)(d²+1) Γ((d²+1)/(d+1)))`
pub fn c_d(d: usize) -> f64 {
    assert!(d >= 2, "c(d) requires d >= 2");
    let df = d as f64;
    let p = 2.0 / (df + 1.0);
    let g_arg = (df * df + 1.0) / (df + 1.0);
    if d > LOG_SPACE_DIM {
        let ln = 2f64.ln() + p * (ln_unit_ball_volume(d - 1) - (df + 1.0).ln())
            + (df + 3.0).ln()
            + ln_factorial(d as u64 + 1)
            - (df * df + df + 2.0).ln()
            - (df * df + 1.0).ln()
            - ln_gamma(g_arg);
        return ln.exp();
    }
    let fact = (1..=d as u64 + 1).map(|k| k as f64).product::<f64>();
    2.0 * (unit_ball_volume(d - 1) / (df + 1.0)).powf(p) * (df + 3.0) * fact
        / ((df * df + df + 2.0) * (df * df + 1.0) * gamma(g_arg).expect("positive argument"))
}

/// Limit of `n^{2/(d+1)} (vol(B_r) - E(B_r, n))` for the ball of radius r.
///
/// The radius enters as `r^d` (the deficit is a volume and the rescaling by
/// `n` is scale free), i.e. the unit-sphere area times `r^d`.
pub fn wieacker_limit(d: usize, r: f64) -> f64 {
    assert!(d >= 2, "W(d, r) requires d >= 2");
    let df = d as f64;
    let p = 2.0 / (df + 1.0);
    let g_arg = (df * df + 1.0) / (df + 1.0);
    let ratio = (df + 1.0) * unit_ball_volume(d) / unit_ball_volume(d - 1);
    let ln_lead = (df * df + df + 2.0).ln() + (df * df + 1.0).ln()
        - 2f64.ln()
        - (df + 3.0).ln()
        - ln_factorial(d as u64 + 1);
    let lead = if d > LOG_SPACE_DIM {
        ln_lead.exp()
    } else {
        let fact = (1..=d as u64 + 1).map(|k| k as f64).product::<f64>();
        (df * df + df + 2.0) * (df * df + 1.0) / (2.0 * (df + 3.0) * fact)
    };
    let g = if d > LOG_SPACE_DIM {
        ln_gamma(g_arg).exp()
    } else {
        gamma(g_arg).expect("positive argument")
    };
    lead * ratio.powf(p) * g * unit_sphere_area(d) * r.powi(d as i32)
}

/// Affine surface area `∫_{∂K} κ^{1/(d+1)} dμ`.
///
/// Balls and ellipsoids are evaluated in closed form, polytopal bodies have
/// zero Gauss curvature almost everywhere on the boundary.
pub fn affine_surface_area(body: &ConvexBody) -> Result<f64> {
    let d = body.dim();
    let df = d as f64;
    match body.shape() {
        Shape::Ball { radius, .. } => {
            Ok(unit_sphere_area(d) * radius.powf(df * (df - 1.0) / (df + 1.0)))
        }
        Shape::Ellipsoid(e) => {
            Ok(e.det_map().powf((df - 1.0) / (df + 1.0)) * unit_sphere_area(d))
        }
        Shape::Box { .. } | Shape::Simplex { .. } | Shape::HPolytope { .. } => Ok(0.0),
    }
}

/// A spherical cap: ball radius `r` in dimension `d`, cut at height `height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapGeometry {
    pub d: usize,
    pub r: f64,
    pub height: f64,
}

impl CapGeometry {
    pub fn new(d: usize, r: f64, height: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("cap requires d >= 2, got {d}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("cap radius must be positive, got {r}")));
        }
        if !(0.0..=2.0 * r).contains(&height) {
            return Err(Error::Domain(format!(
                "cap height {height} outside [0, {}]",
                2.0 * r
            )));
        }
        Ok(Self { d, r, height })
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "incomplete beta requires a, b > 0");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - regularized_incomplete_beta(b, a, 1.0 - x);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    ln_front.exp() * beta_continued_fraction(a, b, x) / a
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

// modified Lentz evaluation of the incomplete beta continued fraction
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Volume of a cap of height Δ ≤ r, via the incomplete beta function.
fn small_cap_volume(d: usize, r: f64, h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let a = 0.5 * (d as f64 + 1.0);
    // sin²θ₀ = (2rh - h²)/r² and cos²θ₀ = ((r - h)/r)², each computed without cancellation
    let x = (h / r) * (2.0 - h / r);
    let frac = if x <= 0.5 {
        regularized_incomplete_beta(a, 0.5, x)
    } else {
        let y = ((r - h) / r).powi(2);
        1.0 - regularized_incomplete_beta(0.5, a, y)
    };
    0.5 * unit_ball_volume(d) * r.powi(d as i32) * frac
}

/// Exact volume of a cap of height Δ ∈ [0, 2r].
pub fn cap_volume_exact(cap: &CapGeometry) -> Result<f64> {
    let CapGeometry { d, r, height } = CapGeometry::new(cap.d, cap.r, cap.height)?;
    if height <= r {
        Ok(small_cap_volume(d, r, height))
    } else {
        Ok(unit_ball_volume(d) * r.powi(d as i32) - small_cap_volume(d, r, 2.0 * r - height))
    }
}

/// Cap volume by adaptive quadrature of `ω_{d-1} r^d ∫_0^{θ₀} sin^d θ dθ`.
///
/// Independent of the incomplete-beta route; relative tolerance 1e-12 with an
/// absolute floor of 1e-15 on the dimensionless integral.
pub fn cap_volume_quadrature(cap: &CapGeometry) -> Result<f64> {
    let CapGeometry { d, r, height } = CapGeometry::new(cap.d, cap.r, cap.height)?;
    if height == 0.0 {
        return Ok(0.0);
    }
    // θ₀ = arccos(1 - Δ/r) = 2 asin(sqrt(Δ/2r))
    let theta0 = 2.0 * (height / (2.0 * r)).sqrt().min(1.0).asin();
    let f = |t: f64| t.sin().powi(d as i32);
    let integral = adaptive_simpson(&f, 0.0, theta0, 1e-12, 1e-15);
    Ok(unit_ball_volume(d - 1) * r.powi(d as i32) * integral)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64, abs_floor: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // coarse pass to fix the absolute target
    let target = (rel * whole.abs()).max(abs_floor);
    simpson_step(f, a, b, fa, fm, fb, whole, target, rel, abs_floor, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    rel: f64,
    abs_floor: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let tol = tol.max(rel * (left + right).abs() * 0.5).max(abs_floor * 0.5);
    if depth == 0 || (delta.abs() <= 15.0 * tol && depth < 56) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, rel, abs_floor * 0.5, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, rel, abs_floor * 0.5, depth - 1)
}

/// Two-sided power-law bounds on the cap volume, asserted for 0 < Δ ≤ r:
///
/// `2 (2 - Δ/r)^{(d-1)/2} ω_{d-1}/(d+1) Δ^{(d+1)/2} r^{(d-1)/2}`
/// `≤ vol(cap) ≤`
/// `2^{(d+1)/2} ω_{d-1}/(d+1) Δ^{(d+1)/2} r^{(d-1)/2}`
pub fn cap_volume_bounds(cap: &CapGeometry) -> Result<(f64, f64)> {
    let CapGeometry { d, r, height } = CapGeometry::new(cap.d, cap.r, cap.height)?;
    if !(height > 0.0) || height > r {
        return Err(Error::Domain(format!(
            "cap bounds are asserted only for 0 < height <= r (height {height}, r {r})"
        )));
    }
    let (lower, upper) = cap_bound_values(d, r, height);
    Ok((lower, upper))
}

/// The bound formulas without the range check (used to record data for Δ > r).
pub fn cap_bound_values(d: usize, r: f64, height: f64) -> (f64, f64) {
    let df = d as f64;
    let common = unit_ball_volume(d - 1) / (df + 1.0)
        * height.powf(0.5 * (df + 1.0))
        * r.powf(0.5 * (df - 1.0));
    let lower = 2.0 * (2.0 - height / r).powf(0.5 * (df - 1.0)) * common;
    let upper = 2f64.powf(0.5 * (df + 1.0)) * common;
    (lower, upper)
}

/// Relative residual of `c(d) W(d, r) / vol(B_r)^{2/(d+1)} = as(B_r)`.
pub fn theorem1_consistency(d: usize, r: f64) -> f64 {
    let df = d as f64;
    let vol = unit_ball_volume(d) * r.powi(d as i32);
    let asa = unit_sphere_area(d) * r.powf(df * (df - 1.0) / (df + 1.0));
    let lhs = c_d(d) * wieacker_limit(d, r) / vol.powf(2.0 / (df + 1.0));
    (lhs - asa).abs() / asa
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_special_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(6.0).unwrap(), 120.0) < 1e-15);
        // 30-digit reference: 0.902745292950933611296858685436
        assert!(rel(gamma(5.0 / 3.0).unwrap(), 0.902_745_292_950_933_6) < 1e-13);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn gamma_reference_table() {
        // frozen 30-digit values (mpmath, dps = 40)
        let table = [
            (0.1, 9.513_507_698_668_731_836_292_487_177_265),
            (2.5, 1.329_340_388_179_137_020_473_625_612_506),
            (7.3, 1_271.423_633_663_909_273_057_993_626),
            (33.75, 3.612_655_598_733_190_574_036_694_927e36),
        ];
        for (x, g) in table {
            assert!(rel(gamma(x).unwrap(), g) < 1e-13, "Γ({x})");
            assert!((ln_gamma(x) - g.ln()).abs() < 1e-13 * g.ln().abs().max(1.0));
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!(rel(unit_ball_volume(2), PI) < 1e-16);
        assert!(rel(unit_ball_volume(3), 4.0 * PI / 3.0) < 1e-15);
        for d in 2..40 {
            let via_gamma = PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0).unwrap();
            assert!(rel(unit_ball_volume(d), via_gamma) < 1e-13);
        }
    }

    #[test]
    fn c_d_golden_values() {
        // mpmath at 40 digits
        assert!(rel(c_d(2), 1.268_036_788_994_423_318_235_707) < 1e-13);
        assert!(rel(c_d(3), 48.0 / 35.0) < 1e-13);
        assert!(rel(c_d(4), 1.403_760_677_603_707_134_671_45) < 1e-13);
        assert!(rel(c_d(10), 1.236_221_508_987_932_256_223_93) < 1e-13);
        for d in 2..=20 {
            assert!(c_d(d) > 0.0);
        }
    }

    #[test]
    fn c_d_log_space_is_continuous() {
        // d = 15 direct vs the log-space formula one step later differ smoothly
        for d in 12..=20 {
            let direct = {
                let df = d as f64;
                let fact = (1..=d as u64 + 1).map(|k| k as f64).product::<f64>();
                2.0 * (unit_ball_volume(d - 1) / (df + 1.0)).powf(2.0 / (df + 1.0))
                    * (df + 3.0)
                    * fact
                    / ((df * df + df + 2.0)
                        * (df * df + 1.0)
                        * gamma((df * df + 1.0) / (df + 1.0)).unwrap())
            };
            assert!(rel(c_d(d), direct) < 1e-12, "d = {d}");
        }
    }

    #[test]
    fn wieacker_golden_and_scaling() {
        assert!(rel(wieacker_limit(2, 1.0), 10.628_727_264_359_800_526_22) < 1e-13);
        assert!(rel(wieacker_limit(3, 1.0), 18.753_441_396_123_677_399_57) < 1e-13);
        for d in 2..8 {
            for r in [0.5f64, 2.0, 3.0] {
                let expect = wieacker_limit(d, 1.0) * r.powi(d as i32);
                assert!(rel(wieacker_limit(d, r), expect) < 1e-14);
            }
        }
    }

    #[test]
    fn consistency_residuals_are_roundoff() {
        for d in 2..=10 {
            for r in [0.5, 1.0, 2.0, 3.0] {
                assert!(theorem1_consistency(d, r) < 1e-10, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn cap_volume_examples() {
        let half = cap_volume_exact(&CapGeometry::new(2, 1.0, 1.0).unwrap()).unwrap();
        assert!(rel(half, PI / 2.0) < 1e-14);
        for d in 2..9 {
            let full = cap_volume_exact(&CapGeometry::new(d, 1.5, 3.0).unwrap()).unwrap();
            assert!(rel(full, unit_ball_volume(d) * 1.5f64.powi(d as i32)) < 1e-14);
        }
        let c3 = cap_volume_exact(&CapGeometry::new(3, 1.0, 0.3).unwrap()).unwrap();
        let classical = PI * 0.09 * (3.0 - 0.3) / 3.0;
        assert!(rel(c3, classical) < 1e-13);
        assert!(rel(c3, 0.254_469_004_940_773_252_315_474) < 1e-13);
    }

    #[test]
    fn cap_routes_agree() {
        for d in 2..=8 {
            for r in [0.5, 1.0, 2.0] {
                for k in 1..=40 {
                    let h = r * k as f64 * 0.05;
                    let cap = CapGeometry::new(d, r, h).unwrap();
                    let a = cap_volume_exact(&cap).unwrap();
                    let b = cap_volume_quadrature(&cap).unwrap();
                    assert!(rel(a, b) < 1e-11, "d={d} r={r} h={h}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn cap_rejects_bad_height() {
        assert!(CapGeometry::new(3, 1.0, 2.5).is_err());
        assert!(CapGeometry::new(3, 1.0, -0.1).is_err());
        let cap = CapGeometry::new(3, 1.0, 1.5).unwrap();
        assert!(cap_volume_bounds(&cap).is_err());
    }

    #[test]
    fn cap_bounds_examples() {
        let cap = CapGeometry::new(3, 1.0, 0.3).unwrap();
        let (lo, hi) = cap_volume_bounds(&cap).unwrap();
        let v = cap_volume_exact(&cap).unwrap();
        assert!(lo <= v && v <= hi);

        let cap = CapGeometry::new(2, 1.0, 1.0).unwrap();
        let (lo, hi) = cap_volume_bounds(&cap).unwrap();
        assert!(rel(lo, 4.0 / 3.0) < 1e-15);
        assert!(rel(hi, 2f64.powf(1.5) * 2.0 / 3.0) < 1e-15);
        assert!(lo <= PI / 2.0 && PI / 2.0 <= hi);
    }

    #[test]
    fn cap_bounds_pinch_for_small_caps() {
        for d in 2..8 {
            let cap = CapGeometry::new(d, 1.0, 1e-9).unwrap();
            let (lo, hi) = cap_volume_bounds(&cap).unwrap();
            let ratio = hi / lo;
            let expect = (2.0 / (2.0 - 1e-9f64)).powf(0.5 * (d as f64 - 1.0));
            assert!(rel(ratio, expect) < 1e-12);
            assert!((ratio - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn small_cap_asymptotics() {
        for d in 2..=8 {
            for r in [0.5, 1.0, 2.0] {
                let h = 1e-6 * r;
                let exact = cap_volume_exact(&CapGeometry::new(d, r, h).unwrap()).unwrap();
                let lead = unit_ball_volume(d - 1)
                    * (2.0 * r).powf(0.5 * (d as f64 - 1.0))
                    * h.powf(0.5 * (d as f64 + 1.0))
                    * 2.0
                    / (d as f64 + 1.0);
                assert!((exact / lead - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn incomplete_beta_reference() {
        // I_x(1,1) = x, I_x(a,1) = x^a, I_x(1,b) = 1-(1-x)^b
        for x in [0.01, 0.3, 0.77, 0.999] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x) - x).abs() < 1e-15);
            assert!(rel(regularized_incomplete_beta(2.5, 1.0, x), x.powf(2.5)) < 1e-13);
            assert!(
                rel(regularized_incomplete_beta(1.0, 3.5, x), 1.0 - (1.0 - x).powf(3.5)) < 1e-13
            );
        }
        // mpmath betainc(3/2, 1/2, 0, 0.3, regularized=True)
        assert!(rel(regularized_incomplete_beta(1.5, 0.5, 0.3), 0.077_274_289_987_545_608_379) < 1e-13);
    }
}
