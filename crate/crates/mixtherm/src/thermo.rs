//! Equation-of-state machinery for uniform mixtures: the ideal-gas
//! kinetic parameter τ, interacting energy and pressure, the τ(θ,ρ)
//! field solved along characteristics, the high-temperature condition
//! on the pair correlations, and the (experimental) condensate scan.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{self, KernelParams};
use crate::numeric::{interp::MonotoneCubic, ode, quad};
use crate::parallel;
use crate::types::{CorrelationSet, MixtureState, PotentialSet, SpeciesSpec, UnitSystem};

/// Relative tolerance of the radial pair quadratures.
const PAIR_RTOL: f64 = 1e-11;
/// Relative tolerance of the characteristic ODE integration.
/// Default relative tolerance of the characteristic ODE integration.
pub const CHAR_RTOL: f64 = 1e-9;
/// The anchor row counts as classical only when every α_a is below this.
pub const ANCHOR_ALPHA_LIMIT: f64 = -10.0;

/// Ideal-gas solution at one (θ, ρ) point: per-species degeneracy
/// parameters α_a and the kinetic parameter τ.
#[derive(Debug, Clone)]
pub struct IdealSolution {
    pub theta: f64,
    pub rho: f64,
    pub alphas: Vec<f64>,
    pub tau: f64,
}

/// Solve the per-species density equations for α_a and assemble τ.
///
/// ρ_a = κ_a m_a^{3/2} θ^{3/2} G₀(α_a) / (√2 π² ħ³)
/// τ   = √2 θ^{5/2} Σ_a κ_a m_a^{3/2} G₁(α_a) / (3 π² ħ³ ρ)
pub fn solve_ideal(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    units: &UnitSystem,
) -> Result<IdealSolution> {
    if species.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let theta = mixture.temperature;
    if !(theta > 0.0) {
        return Err(Error::NonPositiveTemperature(theta));
    }
    let hbar3 = units.hbar.powi(3);
    let norm = 2.0_f64.sqrt() * PI * PI * hbar3;
    let mut alphas = Vec::with_capacity(species.len());
    let mut kinetic_sum = 0.0;
    for (a, sp) in species.iter().enumerate() {
        let rho_a = mixture.density(a);
        let y = norm * rho_a / (sp.kappa() * sp.mass.powf(1.5) * theta.powf(1.5));
        let alpha = kernels::invert_density(y, sp.statistics).map_err(|e| match e {
            Error::BoseSaturation { y, sup, .. } => Error::BoseSaturation {
                label: sp.label.clone(),
                y,
                sup,
            },
            other => other,
        })?;
        let g1 = kernels::g_integral(KernelParams::new(1, alpha, sp.statistics)?)?;
        kinetic_sum += sp.kappa() * sp.mass.powf(1.5) * g1;
        alphas.push(alpha);
    }
    let tau = 2.0_f64.sqrt() * theta.powf(2.5) * kinetic_sum
        / (3.0 * PI * PI * hbar3 * mixture.total_density);
    Ok(IdealSolution {
        theta,
        rho: mixture.total_density,
        alphas,
        tau,
    })
}

/// Run a fallible radial integrand through the quadrature, which only
/// understands plain closures.
fn radial_quad(
    f: &dyn Fn(f64) -> Result<f64>,
    split: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let failed: Cell<Option<Error>> = Cell::new(None);
    let wrap = |r: f64| match f(r) {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            0.0
        }
    };
    let head = quad::integrate(wrap, 0.0, split, rel_tol, abs_tol)?;
    let tail = quad::integrate_to_inf(wrap, split, rel_tol, abs_tol)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    Ok(head + tail)
}

/// One ordered-pair contribution to an energy- or pressure-style sum.
#[derive(Debug, Clone)]
pub struct PairTerm {
    pub pair: (usize, usize),
    pub value: f64,
}

/// Energy and pressure at one state point, with the pair breakdown.
#[derive(Debug, Clone)]
pub struct ThermoPoint {
    pub theta: f64,
    pub rho: f64,
    pub tau: f64,
    pub kinetic_energy: f64,
    pub energy_pairs: Vec<PairTerm>,
    pub energy: f64,
    pub pressure_pairs: Vec<PairTerm>,
    pub pressure: f64,
}

/// Sum (4π or −2π/3 prefactors applied by the caller) of
/// ρ_a ρ_b ∫₀^∞ w(r) K-or-K′ g_ab dr over ordered pairs.
fn pair_sum(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
    use_derivative: bool,
    weight: &dyn Fn(f64) -> f64,
    split_scale: f64,
) -> Result<Vec<PairTerm>> {
    let theta = mixture.temperature;
    let rho = mixture.total_density;
    let n = species.len();
    let mut terms = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let Some(pot) = potentials.get(a, b) else {
                continue;
            };
            if pot.is_zero() {
                continue;
            }
            // Force MissingCorrelation before any quadrature work.
            correlations.model(a, b)?;
            let split = pot.tail_start() * split_scale;
            let integrand = |r: f64| -> Result<f64> {
                let k = if use_derivative {
                    pot.derivative(r)?
                } else {
                    pot.value(r)?
                };
                if k == 0.0 {
                    return Ok(0.0);
                }
                Ok(weight(r) * k * correlations.g(potentials, a, b, theta, rho, r)?)
            };
            let integral = radial_quad(&integrand, split, PAIR_RTOL, 1e-14)?;
            terms.push(PairTerm {
                pair: (a, b),
                value: mixture.density(a) * mixture.density(b) * integral,
            });
        }
    }
    Ok(terms)
}

/// E/V = (3/2)τρ + 2π Σ_{a,b} ρ_a ρ_b ∫ r² K_ab g_ab dr  (V = 1).
pub fn internal_energy(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    tau: f64,
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
) -> Result<f64> {
    Ok(thermo_point(mixture, species, tau, potentials, correlations)?.energy)
}

/// p = ρτ − (2π/3) Σ_{a,b} ρ_a ρ_b ∫ r³ K′_ab g_ab dr.
pub fn pressure(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    tau: f64,
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
) -> Result<f64> {
    Ok(thermo_point(mixture, species, tau, potentials, correlations)?.pressure)
}

/// Full state point; `split_scale` stretches the tail-split radius and
/// exists so tests can verify quadrature invariance.
pub fn thermo_point_with_split(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    tau: f64,
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
    split_scale: f64,
) -> Result<ThermoPoint> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    let rho = mixture.total_density;
    let kinetic = 1.5 * tau * rho;
    let energy_pairs = pair_sum(
        mixture,
        species,
        potentials,
        correlations,
        false,
        &|r| r * r,
        split_scale,
    )?;
    let pressure_pairs = pair_sum(
        mixture,
        species,
        potentials,
        correlations,
        true,
        &|r| r * r * r,
        split_scale,
    )?;
    let energy = kinetic + 2.0 * PI * energy_pairs.iter().map(|t| t.value).sum::<f64>();
    let pressure =
        rho * tau - 2.0 * PI / 3.0 * pressure_pairs.iter().map(|t| t.value).sum::<f64>();
    Ok(ThermoPoint {
        theta: mixture.temperature,
        rho,
        tau,
        kinetic_energy: kinetic,
        energy_pairs,
        energy,
        pressure_pairs,
        pressure,
    })
}

pub fn thermo_point(
    mixture: &MixtureState,
    species: &[SpeciesSpec],
    tau: f64,
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
) -> Result<ThermoPoint> {
    thermo_point_with_split(mixture, species, tau, potentials, correlations, 1.0)
}

/// Right-hand side of the τ equation,
/// F(θ,ρ) = (4π/3ρ) Σ_{a,b} ρ_aρ_b ∫ r² (rθ K′ ∂g/∂θ − 3ρ K ∂g/∂ρ + r K ∂g/∂r) dr,
/// with composition fractions taken from `fractions`.
pub fn rhs_f(
    theta: f64,
    rho: f64,
    fractions: &[f64],
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
) -> Result<f64> {
    if potentials.is_all_zero() {
        return Ok(0.0);
    }
    let n = fractions.len();
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let Some(pot) = potentials.get(a, b) else {
                continue;
            };
            if pot.is_zero() {
                continue;
            }
            correlations.model(a, b)?;
            let integrand = |r: f64| -> Result<f64> {
                let k = pot.value(r)?;
                let dk = pot.derivative(r)?;
                let gt = correlations.dg_dtheta(potentials, a, b, theta, rho, r)?;
                let gr_ = correlations.dg_drho(potentials, a, b, theta, rho, r)?;
                let gx = correlations.dg_dr(potentials, a, b, theta, rho, r)?;
                Ok(r * r * (r * theta * dk * gt - 3.0 * rho * k * gr_ + r * k * gx))
            };
            // Correlation partials may come from finite differences,
            // which caps the attainable integrand accuracy near 1e-10.
            let integral = radial_quad(&integrand, pot.tail_start(), 1e-8, 1e-10)?;
            sum += fractions[a] * rho * fractions[b] * rho * integral;
        }
    }
    Ok(4.0 * PI / (3.0 * rho) * sum)
}

/// Rectangular (θ, ρ) domain for the field solve.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub thetas: Vec<f64>,
    pub rhos: Vec<f64>,
}

impl DomainSpec {
    pub fn rectangle(theta_lo: f64, theta_hi: f64, n_theta: usize, rho_lo: f64, rho_hi: f64, n_rho: usize) -> Result<Self> {
        if !(theta_lo > 0.0 && theta_hi > theta_lo && rho_lo > 0.0 && rho_hi > rho_lo) {
            return Err(Error::Invalid("domain bounds must be positive and ordered".into()));
        }
        if n_theta < 2 || n_rho < 2 {
            return Err(Error::Invalid("domain needs at least 2 points per axis".into()));
        }
        let lin = |lo: f64, hi: f64, n: usize| {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect::<Vec<f64>>()
        };
        Ok(Self {
            thetas: lin(theta_lo, theta_hi, n_theta),
            rhos: lin(rho_lo, rho_hi, n_rho),
        })
    }
}

/// One integrated characteristic: the conserved label c = ρθ^{−3/2},
/// the anchor data, and the (θ, ρ, τ) trace at every grid θ.
#[derive(Debug, Clone)]
pub struct CharTrace {
    pub c: f64,
    pub anchor_theta: f64,
    pub anchor_rho: f64,
    pub anchor_tau: f64,
    /// max_a α_a along the curve (constant along it).
    pub anchor_alpha_max: f64,
    pub points: Vec<(f64, f64, f64)>,
}

/// τ over a (θ, ρ) grid with the per-characteristic traces kept for
/// inspection.
#[derive(Debug, Clone)]
pub struct TauField {
    pub thetas: Vec<f64>,
    pub rhos: Vec<f64>,
    /// Row-major: tau[i][j] at (thetas[i], rhos[j]).
    pub tau: Vec<Vec<f64>>,
    pub characteristics: Vec<CharTrace>,
}

impl TauField {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.tau[i][j]
    }
}

/// Solve 2θ ∂τ/∂θ + 3ρ ∂τ/∂ρ − 2τ = F along characteristics
/// ρ ∝ θ^{3/2}, anchoring each curve to the ideal solution at the
/// domain's high-θ edge. `f` is the right-hand side F(θ, ρ); pass
/// `rhs_f` bound to the actual potentials/correlations, or a test stub.
pub fn solve_tau_field_with(
    domain: &DomainSpec,
    species: &[SpeciesSpec],
    units: &UnitSystem,
    f: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
) -> Result<TauField> {
    solve_tau_field_with_tol(domain, species, units, f, CHAR_RTOL)
}

/// As [`solve_tau_field_with`] with an explicit ODE relative tolerance.
pub fn solve_tau_field_with_tol(
    domain: &DomainSpec,
    species: &[SpeciesSpec],
    units: &UnitSystem,
    f: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
    char_rtol: f64,
) -> Result<TauField> {
    let theta_hi = *domain
        .thetas
        .last()
        .ok_or_else(|| Error::Invalid("empty θ grid".into()))?;
    let (theta_lo, rho_lo, rho_hi) = (
        domain.thetas[0],
        domain.rhos[0],
        *domain.rhos.last().unwrap(),
    );
    // Characteristic labels covering every grid point, with margin so
    // the cross-characteristic interpolation never extrapolates.
    let c_min = rho_lo * theta_hi.powf(-1.5) * 0.999;
    let c_max = rho_hi * theta_lo.powf(-1.5) * 1.001;
    let n_char = (2 * domain.rhos.len()).max(48);
    let labels: Vec<f64> = (0..n_char)
        .map(|k| {
            let t = k as f64 / (n_char - 1) as f64;
            c_min * (c_max / c_min).powf(t)
        })
        .collect();

    // The anchor must sit in the classical regime; α_a is constant
    // along a characteristic, so checking at the anchor covers the
    // whole curve for the ideal part.
    let worst_c = c_max;
    let anchor_mix = mixture_at(species, theta_hi, worst_c * theta_hi.powf(1.5));
    let anchor = solve_ideal(&anchor_mix, species, units)?;
    for (sp, &alpha) in species.iter().zip(&anchor.alphas) {
        if alpha >= ANCHOR_ALPHA_LIMIT {
            return Err(Error::AnchorNotClassical {
                label: sp.label.clone(),
                alpha,
                limit: ANCHOR_ALPHA_LIMIT,
            });
        }
    }

    // Grid θ values descending from the anchor are the ODE stops.
    let mut stops: Vec<f64> = domain.thetas.clone();
    stops.reverse();

    let traces = parallel::map(&labels, |&c| -> Result<CharTrace> {
        let rho_anchor = c * theta_hi.powf(1.5);
        let mix = mixture_at(species, theta_hi, rho_anchor);
        let ideal = solve_ideal(&mix, species, units)?;
        let alpha_max = ideal.alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // dτ/dθ = (2τ + F(θ, cθ^{3/2})) / (2θ) along the curve.
        let failed: Cell<Option<Error>> = Cell::new(None);
        let rhs = |theta: f64, tau: f64| -> f64 {
            let rho = c * theta.powf(1.5);
            match f(theta, rho) {
                Ok(v) => (2.0 * tau + v) / (2.0 * theta),
                Err(e) => {
                    failed.set(Some(e));
                    0.0
                }
            }
        };
        let taus = ode::integrate_through(rhs, theta_hi, ideal.tau, &stops, char_rtol, 1e-14)?;
        if let Some(e) = failed.take() {
            return Err(e);
        }
        let mut points: Vec<(f64, f64, f64)> = stops
            .iter()
            .zip(&taus)
            .map(|(&th, &tau)| (th, c * th.powf(1.5), tau))
            .collect();
        points.reverse();
        Ok(CharTrace {
            c,
            anchor_theta: theta_hi,
            anchor_rho: rho_anchor,
            anchor_tau: ideal.tau,
            anchor_alpha_max: alpha_max,
            points,
        })
    });
    let traces: Vec<CharTrace> = traces.into_iter().collect::<Result<_>>()?;

    // Fill the grid: at each θ row, interpolate τ across characteristics
    // in the conserved label c (curves never cross, so c is monotone).
    let mut tau = vec![vec![0.0; domain.rhos.len()]; domain.thetas.len()];
    for (i, &theta) in domain.thetas.iter().enumerate() {
        let xs: Vec<f64> = traces.iter().map(|t| t.c).collect();
        let ys: Vec<f64> = traces.iter().map(|t| t.points[i].2).collect();
        let spline = MonotoneCubic::new(xs, ys)?;
        for (j, &rho) in domain.rhos.iter().enumerate() {
            tau[i][j] = spline.eval(rho * theta.powf(-1.5))?;
        }
    }
    Ok(TauField {
        thetas: domain.thetas.clone(),
        rhos: domain.rhos.clone(),
        tau,
        characteristics: traces,
    })
}

pub fn solve_tau_field(
    domain: &DomainSpec,
    species: &[SpeciesSpec],
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
    units: &UnitSystem,
) -> Result<TauField> {
    let total: f64 = species.iter().map(|s| s.density).sum();
    let fractions: Vec<f64> = species.iter().map(|s| s.density / total).collect();
    let f = move |theta: f64, rho: f64| rhs_f(theta, rho, &fractions, potentials, correlations);
    solve_tau_field_with(domain, species, units, &f)
}

/// Mixture state at (θ, ρ) keeping the species' relative abundances.
pub fn mixture_at(species: &[SpeciesSpec], theta: f64, rho: f64) -> MixtureState {
    let total: f64 = species.iter().map(|s| s.density).sum();
    MixtureState {
        temperature: theta,
        total_density: rho,
        fractions: species.iter().map(|s| s.density / total).collect(),
    }
}

/// RHS of the τ equation evaluated at τ = θ for each θ in the sequence;
/// a correlation model consistent with the high-temperature limit must
/// drive the values to zero.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub values: Vec<(f64, f64)>,
}

pub fn high_temperature_condition(
    species: &[SpeciesSpec],
    potentials: &PotentialSet,
    correlations: &CorrelationSet,
    theta_sequence: &[f64],
) -> Result<DecayReport> {
    if theta_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("θ sequence must be increasing".into()));
    }
    let total: f64 = species.iter().map(|s| s.density).sum();
    let fractions: Vec<f64> = species.iter().map(|s| s.density / total).collect();
    let mut values = Vec::with_capacity(theta_sequence.len());
    for &theta in theta_sequence {
        values.push((theta, rhs_f(theta, total, &fractions, potentials, correlations)?));
    }
    Ok(DecayReport { values })
}

/// Condensate scan result. EXPERIMENTAL: the onset estimate detects the
/// saturation of the Bose density branch, which need not coincide with
/// the τ < 0 onset the full theory predicts.
#[derive(Debug, Clone)]
pub struct CondensateScan {
    pub experimental: bool,
    /// (θ, τ) for every temperature the ideal solve succeeded at.
    pub points: Vec<(f64, Option<f64>)>,
    /// Bisection-refined saturation temperature, if any θ failed.
    pub onset: Option<f64>,
}

pub fn condensate_scan(
    species: &[SpeciesSpec],
    theta_grid: &[f64],
    units: &UnitSystem,
) -> Result<CondensateScan> {
    if theta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("θ grid must be strictly descending".into()));
    }
    let mut points = Vec::with_capacity(theta_grid.len());
    let mut last_ok: Option<f64> = None;
    let mut first_fail: Option<f64> = None;
    for &theta in theta_grid {
        let mix = mixture_at(species, theta, species.iter().map(|s| s.density).sum());
        match solve_ideal(&mix, species, units) {
            Ok(sol) => {
                if first_fail.is_none() {
                    last_ok = Some(theta);
                }
                points.push((theta, Some(sol.tau)));
            }
            Err(Error::BoseSaturation { .. }) => {
                if first_fail.is_none() {
                    first_fail = Some(theta);
                }
                points.push((theta, None));
            }
            Err(e) => return Err(e),
        }
    }
    let onset = match (last_ok, first_fail) {
        (Some(mut hi), Some(mut lo)) => {
            // Bisect the saturation boundary between the last good θ
            // and the first failing θ.
            for _ in 0..60 {
                let mid = 0.5 * (hi + lo);
                let mix = mixture_at(species, mid, species.iter().map(|s| s.density).sum());
                match solve_ideal(&mix, species, units) {
                    Ok(_) => hi = mid,
                    Err(Error::BoseSaturation { .. }) => lo = mid,
                    Err(e) => return Err(e),
                }
            }
            Some(0.5 * (hi + lo))
        }
        (None, Some(first)) => Some(first),
        _ => None,
    };
    Ok(CondensateScan {
        experimental: true,
        points,
        onset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{
        build_mixture, CorrelationModel, PairPotential, PotentialForm, Statistics,
    };

    fn fermi(label: &str, mass: f64, kappa: u32, density: f64) -> SpeciesSpec {
        SpeciesSpec::new(label, mass, kappa, Statistics::Fermi, density).unwrap()
    }

    fn bose(label: &str, mass: f64, kappa: u32, density: f64) -> SpeciesSpec {
        SpeciesSpec::new(label, mass, kappa, Statistics::Bose, density).unwrap()
    }

    #[test]
    fn classical_limit_tau_equals_theta() {
        let units = UnitSystem::natural();
        let species = vec![fermi("e", 1.0, 2, 1e-8)];
        let mix = build_mixture(&species, 100.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        assert!(sol.alphas[0] < -20.0, "α = {}", sol.alphas[0]);
        assert!((sol.tau / 100.0 - 1.0).abs() < 1e-6, "τ/θ = {}", sol.tau / 100.0);
    }

    #[test]
    fn degenerate_fermi_limit() {
        let units = UnitSystem::natural();
        // Pick θ and solve for the ρ that puts α at 10⁴.
        let alpha = 1.0e4;
        let theta = 1e-3_f64;
        let g0 = kernels::g_integral(KernelParams::new(0, alpha, Statistics::Fermi).unwrap())
            .unwrap();
        let rho = 2.0 * 1.0f64.powf(1.5) * theta.powf(1.5) * g0
            / (2.0_f64.sqrt() * PI * PI);
        let species = vec![fermi("e", 1.0, 2, rho)];
        let mix = build_mixture(&species, theta).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        assert!((sol.alphas[0] - alpha).abs() < 1.0);
        let e_f = alpha * theta;
        let lhs = 1.5 * sol.tau;
        assert!((lhs / (0.6 * e_f) - 1.0).abs() < 1e-2, "{} vs {}", lhs, 0.6 * e_f);
    }

    #[test]
    fn identical_components_merge() {
        let units = UnitSystem::natural();
        // Exact only in the near-classical regime: splitting one kind
        // into two distinguishable halves changes each α_a away from it.
        let theta = 2.0;
        let one = vec![fermi("x", 1.5, 2, 8e-9)];
        let two = vec![fermi("x1", 1.5, 2, 4e-9), fermi("x2", 1.5, 2, 4e-9)];
        let t1 = solve_ideal(&build_mixture(&one, theta).unwrap(), &one, &units)
            .unwrap()
            .tau;
        let t2 = solve_ideal(&build_mixture(&two, theta).unwrap(), &two, &units)
            .unwrap()
            .tau;
        assert!((t1 - t2).abs() < 1e-8 * t1.abs(), "{t1} vs {t2}");
    }

    #[test]
    fn scaling_symmetry() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.3), bose("b", 2.0, 1, 0.1)];
        let (theta, rho) = (3.0, 0.4);
        let base = solve_ideal(&mixture_at(&species, theta, rho), &species, &units)
            .unwrap()
            .tau;
        for lambda in [0.5, 2.0, 4.0] {
            let l: f64 = lambda;
            let scaled = solve_ideal(
                &mixture_at(&species, l * l * theta, l.powi(3) * rho),
                &species,
                &units,
            )
            .unwrap()
            .tau;
            assert!(
                (scaled / (l * l * base) - 1.0).abs() < 1e-9,
                "λ = {l}: {scaled} vs {}",
                l * l * base
            );
        }
    }

    #[test]
    fn ideal_energy_and_pressure() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.2)];
        let mix = build_mixture(&species, 5.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        let pots = PotentialSet::new();
        let corr = CorrelationSet::uniform(CorrelationModel::Unity);
        let e = internal_energy(&mix, &species, sol.tau, &pots, &corr).unwrap();
        let p = pressure(&mix, &species, sol.tau, &pots, &corr).unwrap();
        assert!((e - 1.5 * sol.tau * mix.total_density).abs() < 1e-14);
        assert!((p - mix.total_density * sol.tau).abs() < 1e-14);
        // pV = (2/3)E at K ≡ 0.
        assert!((p - 2.0 / 3.0 * e).abs() < 1e-12);
    }

    #[test]
    fn square_step_energy_closed_form() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.3)];
        let mix = build_mixture(&species, 4.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        let mut pots = PotentialSet::new();
        let (k0, radius) = (0.7, 1.4);
        pots.insert(PairPotential::new(0, 0, PotentialForm::SquareStep { k0, radius }));
        let corr = CorrelationSet::uniform(CorrelationModel::Unity);
        let e = internal_energy(&mix, &species, sol.tau, &pots, &corr).unwrap();
        let rho = mix.total_density;
        let expect = 1.5 * sol.tau * rho + 2.0 * PI * rho * rho * k0 * radius.powi(3) / 3.0;
        assert!((e - expect).abs() < 1e-10 * expect.abs(), "{e} vs {expect}");
    }

    #[test]
    fn cross_potential_double_counting() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.3), fermi("b", 2.0, 2, 0.5)];
        let mix = build_mixture(&species, 4.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 1, PotentialForm::Exponential { k0: 0.9, r0: 1.0 }));
        let corr = CorrelationSet::uniform(CorrelationModel::Unity);
        let pt = thermo_point(&mix, &species, sol.tau, &pots, &corr).unwrap();
        // Ordered sum counts (0,1) and (1,0); ∫r²·0.9e^{−r}dr = 1.8.
        let single = mix.density(0) * mix.density(1) * 0.9 * 2.0;
        let interaction = pt.energy - pt.kinetic_energy;
        assert!((interaction - 2.0 * 2.0 * PI * single).abs() < 1e-9 * interaction.abs());
        assert_eq!(pt.energy_pairs.len(), 2);
    }

    #[test]
    fn exponential_virial_term() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.3)];
        let mix = build_mixture(&species, 4.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 0, PotentialForm::Exponential { k0: 1.0, r0: 1.0 }));
        let corr = CorrelationSet::uniform(CorrelationModel::Unity);
        let p = pressure(&mix, &species, sol.tau, &pots, &corr).unwrap();
        let rho = mix.total_density;
        // −(2π/3)ρ²∫r³(−e^{−r})dr = (2π/3)ρ²·6 = 4πρ²
        let expect = rho * sol.tau + 4.0 * PI * rho * rho;
        assert!((p - expect).abs() < 1e-9 * expect.abs(), "{p} vs {expect}");
    }

    #[test]
    fn quadrature_invariant_under_split_doubling() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 0.3)];
        let mix = build_mixture(&species, 4.0).unwrap();
        let sol = solve_ideal(&mix, &species, &units).unwrap();
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 0, PotentialForm::Gaussian { k0: 1.2, r0: 0.8 }));
        let corr = CorrelationSet::uniform(CorrelationModel::ClassicalBoltzmann);
        let p1 = thermo_point_with_split(&mix, &species, sol.tau, &pots, &corr, 1.0).unwrap();
        let p2 = thermo_point_with_split(&mix, &species, sol.tau, &pots, &corr, 2.0).unwrap();
        assert!((p1.energy / p2.energy - 1.0).abs() < 1e-8);
        assert!((p1.pressure / p2.pressure - 1.0).abs() < 1e-8);
    }

    #[test]
    fn missing_correlation_detected() {
        let species = vec![fermi("a", 1.0, 2, 0.3)];
        let mix = build_mixture(&species, 4.0).unwrap();
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 0, PotentialForm::Exponential { k0: 1.0, r0: 1.0 }));
        let corr = CorrelationSet::explicit();
        assert!(matches!(
            internal_energy(&mix, &species, 1.0, &pots, &corr),
            Err(Error::MissingCorrelation(0, 0))
        ));
    }

    #[test]
    fn rhs_vanishes_for_boltzmann_closure() {
        // g = e^{−K/θ} makes the integrand cancel pointwise.
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 0, PotentialForm::Exponential { k0: 1.0, r0: 1.0 }));
        let corr = CorrelationSet::uniform(CorrelationModel::ClassicalBoltzmann);
        for theta in [0.5, 2.0, 20.0] {
            let f = rhs_f(theta, 0.3, &[1.0], &pots, &corr).unwrap();
            assert!(f.abs() < 1e-10, "θ = {theta}: F = {f}");
        }
    }

    #[test]
    fn high_temperature_report_decays() {
        let species = vec![fermi("a", 1.0, 2, 0.3)];
        let mut pots = PotentialSet::new();
        pots.insert(PairPotential::new(0, 0, PotentialForm::Gaussian { k0: 0.8, r0: 1.0 }));
        // A θ-dependent correlation with a genuine 1/θ approach to 1.
        let corr = CorrelationSet::uniform(CorrelationModel::Custom {
            g: std::sync::Arc::new(|theta: f64, _rho, r: f64| {
                1.0 - 0.8 * (-(r * r)).exp() / theta
            }),
            fd_step: crate::types::FD_REL_STEP,
        });
        let thetas = [1.0, 2.0, 4.0, 8.0, 16.0];
        let rep = high_temperature_condition(&species, &pots, &corr, &thetas).unwrap();
        let vals: Vec<f64> = rep.values.iter().map(|&(_, v)| v.abs()).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0], "{vals:?}");
        }
        assert!(vals.last().unwrap() < &vals[0]);
    }

    #[test]
    fn tau_field_matches_ideal_at_zero_potential() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 1.0)];
        let domain = DomainSpec::rectangle(8.0, 20.0, 12, 1e-6, 5e-6, 10).unwrap();
        let pots = PotentialSet::new();
        let corr = CorrelationSet::uniform(CorrelationModel::Unity);
        let field = solve_tau_field(&domain, &species, &pots, &corr, &units).unwrap();
        for (i, &theta) in field.thetas.iter().enumerate() {
            for (j, &rho) in field.rhos.iter().enumerate() {
                let ideal = solve_ideal(&mixture_at(&species, theta, rho), &species, &units)
                    .unwrap()
                    .tau;
                assert!(
                    (field.value(i, j) / ideal - 1.0).abs() < 1e-6,
                    "θ={theta}, ρ={rho}: {} vs {ideal}",
                    field.value(i, j)
                );
            }
        }
    }

    #[test]
    fn tau_field_constant_rhs_closed_form() {
        // F ≡ c: particular solution −c/2; homogeneous part scales as θ
        // along each characteristic. τ(θ) = (τ_A + c/2)·θ/θ_A − c/2.
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 1.0)];
        let domain = DomainSpec::rectangle(8.0, 20.0, 8, 1e-6, 5e-6, 6).unwrap();
        let c = 0.37;
        let field =
            solve_tau_field_with(&domain, &species, &units, &move |_, _| Ok(c)).unwrap();
        for tr in &field.characteristics {
            for &(theta, rho, tau) in &tr.points {
                let expect = (tr.anchor_tau + c / 2.0) * theta / tr.anchor_theta - c / 2.0;
                assert!(
                    (tau - expect).abs() < 1e-8 * expect.abs().max(1.0),
                    "θ={theta}, ρ={rho}: {tau} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn tau_field_anchor_perturbation_bounded() {
        // Perturbing F by a constant δ changes τ by ≤ δ/2·(1 + θ/θ_A) —
        // in particular the response to anchor-scale noise stays linear.
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 1.0)];
        let domain = DomainSpec::rectangle(8.0, 20.0, 8, 1e-6, 5e-6, 6).unwrap();
        let base = solve_tau_field_with(&domain, &species, &units, &|_, _| Ok(0.0)).unwrap();
        let eps = 1e-6;
        let pert =
            solve_tau_field_with(&domain, &species, &units, &move |_, _| Ok(eps)).unwrap();
        for (row_b, row_p) in base.tau.iter().zip(&pert.tau) {
            for (&b, &p) in row_b.iter().zip(row_p) {
                assert!((p - b).abs() <= 1.01 * eps, "{}", (p - b).abs());
            }
        }
    }

    #[test]
    fn anchor_not_classical_is_reported() {
        let units = UnitSystem::natural();
        let species = vec![fermi("a", 1.0, 2, 1.0)];
        // Dense, cold domain: α at the anchor far above the limit.
        let domain = DomainSpec::rectangle(0.1, 0.5, 6, 1.0, 2.0, 6).unwrap();
        let err =
            solve_tau_field_with(&domain, &species, &units, &|_, _| Ok(0.0)).unwrap_err();
        assert!(matches!(err, Error::AnchorNotClassical { .. }), "{err}");
    }

    #[test]
    fn condensate_onset_closed_form() {
        let units = UnitSystem::natural();
        let species = vec![bose("b", 1.0, 1, 0.5)];
        // θ_c from ρ = (κ m^{3/2}/√2π²ħ³) θ_c^{3/2} G₀(0⁻).
        let g0_max = kernels::bose_g0_sup();
        let theta_c = (0.5 * 2.0_f64.sqrt() * PI * PI / g0_max).powf(2.0 / 3.0);
        let grid: Vec<f64> = (0..200)
            .map(|i| 2.0 * theta_c * (1.0 - i as f64 / 205.0))
            .collect();
        let scan = condensate_scan(&species, &grid, &units).unwrap();
        assert!(scan.experimental);
        let onset = scan.onset.expect("onset not found");
        assert!((onset / theta_c - 1.0).abs() < 1e-6, "{onset} vs {theta_c}");
    }

    #[test]
    fn onset_monotone_in_boson_fraction() {
        let units = UnitSystem::natural();
        let rho = 0.5;
        let mut onsets = Vec::new();
        for frac in [1.0, 0.5, 0.1] {
            let mut species = vec![bose("b", 1.0, 1, rho * frac)];
            if frac < 1.0 {
                species.push(fermi("f", 1.0, 2, rho * (1.0 - frac)));
            }
            let grid: Vec<f64> = (0..300).map(|i| 4.0 * (1.0 - i as f64 / 300.0)).collect();
            let scan = condensate_scan(&species, &grid, &units).unwrap();
            onsets.push(scan.onset.expect("onset"));
        }
        assert!(onsets[0] > onsets[1] && onsets[1] > onsets[2], "{onsets:?}");
    }

    #[test]
    fn fermion_only_scan_has_no_onset() {
        let units = UnitSystem::natural();
        let species = vec![fermi("f", 1.0, 2, 0.5)];
        let grid: Vec<f64> = (0..50).map(|i| 2.0 * (1.0 - i as f64 / 51.0)).collect();
        let scan = condensate_scan(&species, &grid, &units).unwrap();
        assert!(scan.onset.is_none());
        assert!(scan.points.iter().all(|(_, t)| t.is_some()));
    }
}
