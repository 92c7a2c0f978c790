//! The statistics-dependent momentum integrals
//!
//!   G_k(α) = ∫₀^∞ x^{2k+2} / (e^{x²−α} + η) dx,   η = +1 (Fermi), −1 (Bose),
//!
//! their inversion G₀(α) = y, and the classical-limit diagnostic. The
//! Bose branch is restricted to α ≤ 0 and saturates at α = 0; values of
//! y past the supremum of G₀ signal condensate onset.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{quad, roots};
use crate::types::Statistics;

/// Parameters of one kernel evaluation.
#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    pub order: u8,
    pub alpha: f64,
    pub statistics: Statistics,
}

impl KernelParams {
    pub fn new(order: u8, alpha: f64, statistics: Statistics) -> Result<Self> {
        if order > 1 {
            return Err(Error::Invalid(format!("kernel order must be 0 or 1, got {order}")));
        }
        if statistics == Statistics::Bose && alpha > 0.0 {
            return Err(Error::DomainError(alpha));
        }
        Ok(Self {
            order,
            alpha,
            statistics,
        })
    }
}

/// Relative tolerance of the kernel quadrature.
const QUAD_RTOL: f64 = 1e-12;

/// Bose G_k near saturation through the polylog expansion around the
/// branch point,
///   Li_s(e^α) = Γ(1−s)(−α)^{s−1} + Σ_k ζ(s−k) α^k / k!,
/// which the quadrature cannot resolve to 1e-10 because of the √(−α)
/// cusp. Valid for small |α|; truncation error ~ α⁴.
fn bose_g_near_zero(k: u8, alpha: f64) -> f64 {
    let eps = -alpha;
    // ζ(3/2), ζ(1/2), ζ(−1/2), ζ(−3/2); ζ(5/2) for the k = 1 row.
    const Z32: f64 = 2.612_375_348_685_488;
    const Z12: f64 = -1.460_354_508_809_586_8;
    const ZM12: f64 = -0.207_886_224_977_354_57;
    const ZM32: f64 = -0.025_485_201_889_833_035;
    const Z52: f64 = 1.341_487_257_250_917;
    let sqrt_pi = PI.sqrt();
    if k == 0 {
        // Li_{3/2}: Γ(−1/2) = −2√π.
        let li = -2.0 * sqrt_pi * eps.sqrt() + Z32 - Z12 * eps + ZM12 * eps * eps / 2.0
            - ZM32 * eps.powi(3) / 6.0;
        sqrt_pi / 4.0 * li
    } else {
        // Li_{5/2}: Γ(−3/2) = 4√π/3.
        let li = 4.0 * sqrt_pi / 3.0 * eps * eps.sqrt() + Z52 - Z32 * eps
            + Z12 * eps * eps / 2.0 - ZM12 * eps.powi(3) / 6.0;
        3.0 * sqrt_pi / 8.0 * li
    }
}

/// G_k(α) for the given statistics, relative accuracy 1e-10 or better.
pub fn g_integral(params: KernelParams) -> Result<f64> {
    let KernelParams {
        order: k,
        alpha,
        statistics,
    } = params;
    if statistics == Statistics::Bose && alpha > -1e-6 {
        return Ok(bose_g_near_zero(k, alpha));
    }
    let eta = statistics.eta();
    let pow = 2 * i32::from(k) + 2;
    let f = move |x: f64| {
        let arg = x * x - alpha;
        // Past arg ≈ 700 the exponential overflows; the integrand is zero
        // to machine precision well before that.
        if arg > 700.0 {
            return 0.0;
        }
        // exp_m1 keeps the Bose denominator accurate near saturation.
        let denom = if eta < 0.0 { arg.exp_m1() } else { arg.exp() + eta };
        x.powi(pow) / denom
    };
    // The Fermi integrand has a knee near x² = α; split there.
    let knee = alpha.max(0.0).sqrt() + 5.0;
    // Near Bose saturation the integrand turns over at x ≈ √(−α);
    // splitting there keeps the adaptive quadrature out of trouble.
    let mut head = 0.0;
    let mut lo = 0.0;
    if eta < 0.0 && alpha < 0.0 {
        let scale = 10.0 * (-alpha).sqrt();
        if scale < 0.1 * knee {
            head = quad::integrate(f, 0.0, scale, QUAD_RTOL, 1e-15)?;
            lo = scale;
        }
    }
    let bulk = head + quad::integrate(f, lo, knee, QUAD_RTOL, QUAD_RTOL * head.abs() + 1e-300)?;
    // Beyond the knee the integrand decays like x^{2k+2} e^{α−x²}.
    let tail = quad::integrate_to_inf(f, knee, QUAD_RTOL, QUAD_RTOL * bulk.abs())?;
    Ok(bulk + tail)
}

/// Convergent series Σ_j (−η)^{j+1} e^{jα} j^{−(2k+3)/2} · Γ((2k+3)/2)/2,
/// valid for α ≤ 0 (practically used at α ≤ −2 and at α = 0 where it
/// still converges for both statistics at these orders).
pub fn g_series(k: u8, alpha: f64, statistics: Statistics) -> f64 {
    let eta = statistics.eta();
    // Γ(3/2)/2 = √π/4;  Γ(5/2)/2 = 3√π/8.
    let gamma_half = if k == 0 {
        PI.sqrt() / 4.0
    } else {
        3.0 * PI.sqrt() / 8.0
    };
    let p = (2.0 * f64::from(k) + 3.0) / 2.0;
    if alpha == 0.0 {
        // ζ(3/2), ζ(5/2); Fermi uses η(p) = (1 − 2^{1−p}) ζ(p).
        let zeta = if k == 0 {
            2.612_375_348_685_488
        } else {
            1.341_487_257_250_917
        };
        let sum = match statistics {
            Statistics::Bose => zeta,
            Statistics::Fermi => (1.0 - 2f64.powf(1.0 - p)) * zeta,
        };
        return gamma_half * sum;
    }
    let mut sum = 0.0;
    for j in 1..=100_000u64 {
        let jf = j as f64;
        let term = (-eta).powi((j + 1) as i32) * (jf * alpha).exp() / jf.powf(p);
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) && j > 3 {
            break;
        }
    }
    gamma_half * sum
}

/// Supremum of the Bose G₀ branch (attained at α → 0⁻).
pub fn bose_g0_sup() -> f64 {
    g_series(0, 0.0, Statistics::Bose)
}

/// Solve G₀(α) = y for α. Unique on each branch since G₀ is strictly
/// increasing in α.
pub fn invert_density(y: f64, statistics: Statistics) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Invalid(format!("invert_density needs y > 0, got {y}")));
    }
    let g0 = |alpha: f64| -> f64 {
        g_integral(KernelParams {
            order: 0,
            alpha,
            statistics,
        })
        .unwrap_or(f64::NAN)
    };
    match statistics {
        Statistics::Fermi => {
            // Classical seed α ≈ ln(4y/√π); exact in the dilute limit.
            let seed = (4.0 * y / PI.sqrt()).ln();
            let h = move |alpha: f64| g0(alpha) - y;
            let (a, b) = roots::bracket(&h, seed, 1.0, 80)?;
            let alpha = roots::brent(h, a, b, 1e-13 * seed.abs().max(1.0), 200)?;
            check_inversion(alpha, y, statistics)
        }
        Statistics::Bose => {
            let sup = bose_g0_sup();
            if y >= sup {
                return Err(Error::BoseSaturation {
                    label: String::new(),
                    y,
                    sup,
                });
            }
            // Solve in β = √(−α): near saturation G₀ ≈ sup − (π/2)β, so
            // the root stays well conditioned all the way to β = 0.
            let h = move |beta: f64| g0(-beta * beta) - y;
            // Expand the upper end of the bracket [0, 2^k) until the
            // sign changes.
            let mut hi = 1.0;
            while h(hi) > 0.0 {
                hi *= 2.0;
                if hi > 40.0 {
                    return Err(Error::ConvergenceFailure(
                        "Bose inversion: no bracket found".into(),
                    ));
                }
            }
            let beta = roots::brent(h, 0.0, hi, 1e-13, 200)?;
            check_inversion(-beta * beta, y, statistics)
        }
    }
}

fn check_inversion(alpha: f64, y: f64, statistics: Statistics) -> Result<f64> {
    let g = g_integral(KernelParams {
        order: 0,
        alpha,
        statistics,
    })?;
    if ((g - y) / y).abs() > 1e-10 {
        return Err(Error::ConvergenceFailure(format!(
            "inversion residual {:.3e} at α = {alpha}",
            ((g - y) / y).abs()
        )));
    }
    Ok(alpha)
}

/// Classical-limit diagnostic: max |(2/3)·G₁(α)/G₀(α) − 1| over the
/// given α values. The ratio forces τ = θ in the classical limit.
#[derive(Debug, Clone)]
pub struct ClassicalRatioReport {
    pub max_deviation: f64,
    pub deviations: Vec<(f64, f64)>,
}

pub fn classical_ratio_check(alphas: &[f64], statistics: Statistics) -> Result<ClassicalRatioReport> {
    let mut deviations = Vec::with_capacity(alphas.len());
    let mut max_dev: f64 = 0.0;
    for &alpha in alphas {
        let g0 = g_integral(KernelParams {
            order: 0,
            alpha,
            statistics,
        })?;
        let g1 = g_integral(KernelParams {
            order: 1,
            alpha,
            statistics,
        })?;
        let dev = (2.0 / 3.0 * g1 / g0 - 1.0).abs();
        max_dev = max_dev.max(dev);
        deviations.push((alpha, dev));
    }
    Ok(ClassicalRatioReport {
        max_deviation: max_dev,
        deviations,
    })
}
