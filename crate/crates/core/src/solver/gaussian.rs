//! Probability that one start's best sample beats another's under a normal model.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use statrs::function::erf::erfc;

use crate::error::{Result, WasoError};

const ORDER: usize = 10;
const HALF_WIDTH: f64 = 10.0;
const TOLERANCE: f64 = 1e-9;
const MIN_PANELS: usize = 16;
const MAX_PANELS: usize = 1 << 14;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
fn legendre_rule() -> &'static [(f64, f64); ORDER] {
    static RULE: OnceLock<[(f64, f64); ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER as f64;
        let mut rule = [(0.0, 0.0); ORDER];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=ORDER {
                    let j = j as f64;
                    let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn composite(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let rule = legendre_rule();
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + 0.5 * h;
        let mut s = 0.0;
        for &(x, w) in rule {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `P(max of n_i draws from N(mu_i, sigma_i) > max of n_b draws from N(mu_b, sigma_b))`.
///
/// Evaluated as one minus the integral of the density of the `b` maximum times the
/// distribution function of the `i` maximum, over `mu_b +- 10 sigma_b`, by composite
/// Gauss-Legendre with panel doubling until successive estimates agree to 1e-9.
pub fn gaussian_exceed_probability(
    mu_b: f64,
    sigma_b: f64,
    n_b: usize,
    mu_i: f64,
    sigma_i: f64,
    n_i: usize,
) -> Result<f64> {
    if !(sigma_b > 0.0 && sigma_i > 0.0) {
        return Err(WasoError::InvalidArgument(format!(
            "standard deviations must be positive (got {sigma_b}, {sigma_i})"
        )));
    }
    if n_b == 0 || n_i == 0 {
        return Err(WasoError::InvalidArgument("sample counts must be at least 1".into()));
    }
    if !(mu_b.is_finite() && mu_i.is_finite() && sigma_b.is_finite() && sigma_i.is_finite()) {
        return Err(WasoError::InvalidArgument("parameters must be finite".into()));
    }
    let (nb, ni) = (n_b as f64, n_i as f64);
    // Substituting u = (x - mu_b)/sigma_b absorbs the 1/sigma_b factor.
    let integrand = |u: f64| {
        let x = mu_b + sigma_b * u;
        nb * std_normal_cdf(u).powf(nb - 1.0)
            * std_normal_pdf(u)
            * std_normal_cdf((x - mu_i) / sigma_i).powf(ni)
    };
    let mut panels = MIN_PANELS;
    let mut prev = composite(&integrand, -HALF_WIDTH, HALF_WIDTH, panels);
    loop {
        panels *= 2;
        let next = composite(&integrand, -HALF_WIDTH, HALF_WIDTH, panels);
        if (next - prev).abs() < TOLERANCE || panels >= MAX_PANELS {
            return Ok((1.0 - next).clamp(0.0, 1.0));
        }
        prev = next;
    }
}
