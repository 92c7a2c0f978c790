//! The exponential distribution family n_s(z) = A_s e^{−z/τ}, its
//! coefficient algebra, the reduction relation between orders, and the
//! demonstration that Bose/Fermi one-particle distributions are
//! incompatible with that relation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{self, KernelParams};
use crate::numeric::quad;
use crate::types::{MultiIndex, SpeciesSpec, Statistics, UnitSystem};

/// Boxed one-particle candidate distribution z ↦ n(z).
type Candidate = Box<dyn Fn(f64) -> f64>;

/// Per-species thermal factor a_a = (ρ_a/κ_a)(2πħ²/(m_a τ))^{d/2}.
pub fn thermal_factor(species: &SpeciesSpec, tau: f64, dim: usize, units: &UnitSystem) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    let hbar2 = units.hbar * units.hbar;
    let base = 2.0 * PI * hbar2 / (species.mass * tau);
    Ok(species.density / species.kappa() * base.powf(dim as f64 / 2.0))
}

/// The exponential family for a uniform mixture: a single τ for the
/// whole system and closed-form coefficients A_s = Π s_a! a_a^{s_a}.
#[derive(Debug, Clone)]
pub struct NsFamily {
    pub tau: f64,
    pub factors: Vec<f64>,
    pub dim: usize,
}

impl NsFamily {
    pub fn new(species: &[SpeciesSpec], tau: f64, dim: usize, units: &UnitSystem) -> Result<Self> {
        let factors = species
            .iter()
            .map(|sp| thermal_factor(sp, tau, dim, units))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tau, factors, dim })
    }

    /// Closed form A_s = s_1!…s_n! a_1^{s_1}…a_n^{s_n}.
    pub fn coefficient(&self, s: &MultiIndex) -> f64 {
        s.counts()
            .iter()
            .zip(&self.factors)
            .map(|(&c, &a)| (1..=c).map(|k| k as f64).product::<f64>() * a.powi(c as i32))
            .product()
    }

    /// Same coefficient via the recursion A_s = s_a a_a A_{s−1_a},
    /// descending along the given species order. Any order gives the
    /// same value; tests assert the path independence.
    pub fn coefficient_by_recursion(&self, s: &MultiIndex, descent: &[usize]) -> Result<f64> {
        let mut current = s.clone();
        let mut acc = 1.0;
        for &a in descent {
            let count = current.count(a);
            acc *= count as f64 * self.factors[a];
            current = current.lowered(a)?;
        }
        if current.order() != 0 {
            return Err(Error::Invalid(
                "descent path does not exhaust the multi-index".into(),
            ));
        }
        Ok(acc)
    }

    /// n_s(z) = A_s e^{−z/τ}.
    pub fn n(&self, s: &MultiIndex, z: f64) -> f64 {
        self.coefficient(s) * (-z / self.tau).exp()
    }
}

/// Default z grid: 64 points on [0, 10τ].
pub fn default_z_grid(tau: f64) -> Vec<f64> {
    (0..64).map(|i| 10.0 * tau * i as f64 / 63.0).collect()
}

#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub max_rel_residual: f64,
    pub residuals: Vec<(f64, f64)>,
}

/// d-dimensional momentum integral of a radial function,
/// ∫ f(p²) d^d p with d ∈ {1, 3}.
fn momentum_integral(f: impl Fn(f64) -> f64, dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(2.0 * quad::integrate_to_inf(|p| f(p * p), 0.0, 1e-12, 1e-300)?),
        3 => Ok(4.0 * PI * quad::integrate_to_inf(|p| p * p * f(p * p), 0.0, 1e-12, 1e-300)?),
        _ => Err(Error::Invalid(format!("dimension must be 1 or 3, got {dim}"))),
    }
}

/// Check the reduction relation
///   n_{s−1_a}(z) = κ_a/(s_a (2πħ)^d ρ_a) ∫ n_s(z + p²/2m_a) d^d p
/// for arbitrary candidate functions, by quadrature over the momentum.
pub fn check_reduction_fns(
    n_s: &dyn Fn(f64) -> f64,
    n_s_minus: &dyn Fn(f64) -> f64,
    species: &SpeciesSpec,
    s_a: usize,
    z_grid: &[f64],
    dim: usize,
    units: &UnitSystem,
) -> Result<ReductionReport> {
    if s_a == 0 {
        return Err(Error::Invalid("reduction needs s_a ≥ 1".into()));
    }
    let two_pi_hbar = 2.0 * PI * units.hbar;
    let prefactor = species.kappa() / (s_a as f64 * two_pi_hbar.powi(dim as i32) * species.density);
    let scale = z_grid
        .iter()
        .map(|&z| n_s_minus(z).abs())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut residuals = Vec::with_capacity(z_grid.len());
    let mut max_rel: f64 = 0.0;
    for &z in z_grid {
        let reduced =
            prefactor * momentum_integral(|p2| n_s(z + p2 / (2.0 * species.mass)), dim)?;
        let rel = (reduced - n_s_minus(z)).abs() / scale;
        max_rel = max_rel.max(rel);
        residuals.push((z, rel));
    }
    Ok(ReductionReport {
        max_rel_residual: max_rel,
        residuals,
    })
}

/// Reduction check for the exponential family itself. The momentum
/// integral is Gaussian; the quadrature result must agree with the
/// closed form, so the residual is a direct probe of Eq-level
/// consistency (and of the quadrature machinery).
pub fn check_reduction(
    family: &NsFamily,
    species: &[SpeciesSpec],
    s: &MultiIndex,
    a: usize,
    z_grid: &[f64],
    units: &UnitSystem,
) -> Result<ReductionReport> {
    if s.count(a) == 0 {
        return Err(Error::Invalid(format!("s_{a} must be ≥ 1 for reduction")));
    }
    let lower = s.lowered(a)?;
    let n_s = |z: f64| family.n(s, z);
    let n_s_minus = |z: f64| family.n(&lower, z);
    check_reduction_fns(
        &n_s,
        &n_s_minus,
        &species[a],
        s.count(a),
        z_grid,
        family.dim,
        units,
    )
}

/// Candidate one-particle distribution families for the
/// incompatibility demonstration.
#[derive(Debug, Clone, Copy)]
pub enum CandidateFamily {
    /// n(z) = e^{−z/τ} — the family the hierarchy actually admits.
    Exponential { tau: f64 },
    /// n(z) = 1/(e^{(z−μ)/T} + 1) with μ fixed per species by a common
    /// density at the given μ₁/T.
    Fermi { mu1_over_t: f64, t: f64 },
    /// n(z) = 1/(e^{(z−μ)/T} − 1), μ < 0.
    Bose { mu1_over_t: f64, t: f64 },
}

#[derive(Debug, Clone)]
pub struct ConstancyReport {
    /// Variation of the ratio of the two per-species distribution
    /// candidates over the z grid. Proportionality (ratio constant)
    /// is what the reduction relation forces; ≥ 1e-2 means the family
    /// cannot satisfy it.
    pub family_ratio_variation: f64,
    /// Variation of the ratio of the two smearing-map images of the
    /// shared order-2 candidate; constant by construction when
    /// m₁ = m₂, verified here by quadrature.
    pub smeared_ratio_variation: f64,
    pub ratio: Vec<(f64, f64)>,
}

fn variation(values: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut sum = 0.0;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
        sum += v;
    }
    let mean = sum / values.len() as f64;
    (hi - lo) / mean.abs().max(1e-300)
}

/// Demonstrate that named quantum distributions cannot satisfy the
/// proportionality forced by the reduction relation when the two kinds
/// have equal masses but different spin degeneracies, while the
/// exponential family satisfies it identically.
///
/// For the named families each kind carries its own chemical potential,
/// fixed by a common number density; the reported `family_ratio_variation`
/// measures how far D₂(z)/D₁(z) is from constant.
pub fn incompatibility_demo(
    family: CandidateFamily,
    mass: f64,
    kappas: (u32, u32),
    z_grid: &[f64],
    units: &UnitSystem,
) -> Result<ConstancyReport> {
    let (k1, k2) = (f64::from(kappas.0), f64::from(kappas.1));
    // Per-species one-particle candidates D₁, D₂.
    let (d1, d2): (Candidate, Candidate) = match family {
        CandidateFamily::Exponential { tau } => {
            if !(tau > 0.0) {
                return Err(Error::NonPositiveTau(tau));
            }
            // Normalization differs per κ; irrelevant for constancy.
            (
                Box::new(move |z: f64| (-z / tau).exp() / k1),
                Box::new(move |z: f64| (-z / tau).exp() / k2),
            )
        }
        CandidateFamily::Fermi { mu1_over_t, t } | CandidateFamily::Bose { mu1_over_t, t } => {
            let stat = match family {
                CandidateFamily::Fermi { .. } => Statistics::Fermi,
                _ => Statistics::Bose,
            };
            if stat == Statistics::Bose && mu1_over_t > 0.0 {
                return Err(Error::DomainError(mu1_over_t));
            }
            let eta = stat.eta();
            // Common density ⇒ κ₁ G₀(α₁) = κ₂ G₀(α₂).
            let g1 = kernels::g_integral(KernelParams::new(0, mu1_over_t, stat)?)?;
            let alpha2 = kernels::invert_density(k1 / k2 * g1, stat)?;
            let (mu1, mu2) = (mu1_over_t * t, alpha2 * t);
            (
                Box::new(move |z: f64| 1.0 / (((z - mu1) / t).exp() + eta)),
                Box::new(move |z: f64| 1.0 / (((z - mu2) / t).exp() + eta)),
            )
        }
    };
    let mut ratio = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        ratio.push((z, d2(z) / d1(z)));
    }
    let family_ratio_variation = variation(&ratio.iter().map(|&(_, r)| r).collect::<Vec<_>>());

    // Smearing maps applied to a shared order-2 candidate: with equal
    // masses the two images are proportional whatever the candidate is,
    // which is exactly the constraint the named families violate.
    let n2: Box<dyn Fn(f64) -> f64> = match family {
        CandidateFamily::Exponential { tau } => Box::new(move |z: f64| (-z / tau).exp()),
        CandidateFamily::Fermi { mu1_over_t, t } => {
            let mu = mu1_over_t * t;
            Box::new(move |z: f64| 1.0 / (((z - mu) / t).exp() + 1.0))
        }
        CandidateFamily::Bose { mu1_over_t, t } => {
            let mu = mu1_over_t * t;
            Box::new(move |z: f64| 1.0 / (((z - mu) / t).exp() - 1.0))
        }
    };
    let two_pi_hbar = 2.0 * PI * units.hbar;
    let pref1 = k1 / two_pi_hbar.powi(3);
    let pref2 = k2 / two_pi_hbar.powi(3);
    let mut smeared_ratio = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let img1 = pref1 * momentum_integral(|p2| n2(z + p2 / (2.0 * mass)), 3)?;
        let img2 = pref2 * momentum_integral(|p2| n2(z + p2 / (2.0 * mass)), 3)?;
        smeared_ratio.push(img2 / img1);
    }
    let smeared_ratio_variation = variation(&smeared_ratio);

    Ok(ConstancyReport {
        family_ratio_variation,
        smeared_ratio_variation,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Statistics;

    fn fermi_species(density: f64, mass: f64, kappa: u32) -> SpeciesSpec {
        SpeciesSpec::new("f", mass, kappa, Statistics::Fermi, density).unwrap()
    }

    #[test]
    fn thermal_factor_unity_case() {
        // ρ = κ, m = 2π, τ = 1, ħ = 1 → a = 1
        let sp = SpeciesSpec::new("x", 2.0 * PI, 2, Statistics::Bose, 2.0).unwrap();
        let a = thermal_factor(&sp, 1.0, 3, &UnitSystem::natural()).unwrap();
        assert!((a - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_factor_scalings() {
        let units = UnitSystem::natural();
        let sp = fermi_species(0.7, 1.3, 2);
        let a = thermal_factor(&sp, 1.0, 3, &units).unwrap();
        let sp2 = fermi_species(1.4, 1.3, 2);
        assert!((thermal_factor(&sp2, 1.0, 3, &units).unwrap() - 2.0 * a).abs() < 1e-13);
        // τ → 4τ scales a by 4^{−3/2} = 1/8
        assert!((thermal_factor(&sp, 4.0, 3, &units).unwrap() - a / 8.0).abs() < 1e-13);
    }

    #[test]
    fn nonpositive_tau_rejected() {
        let sp = fermi_species(1.0, 1.0, 2);
        assert!(matches!(
            thermal_factor(&sp, 0.0, 3, &UnitSystem::natural()),
            Err(Error::NonPositiveTau(_))
        ));
    }

    #[test]
    fn coefficient_closed_form() {
        let units = UnitSystem::natural();
        let species = vec![fermi_species(0.4, 1.0, 2), fermi_species(0.6, 2.0, 1)];
        let fam = NsFamily::new(&species, 1.3, 3, &units).unwrap();
        let (a1, a2) = (fam.factors[0], fam.factors[1]);
        // s = (1_a) → a_a
        assert!((fam.coefficient(&MultiIndex::one(0, 2).unwrap()) - a1).abs() < 1e-15);
        // s = (2, 1) → 2!·1!·a₁²·a₂
        let c = fam.coefficient(&MultiIndex::new(vec![2, 1]));
        assert!((c - 2.0 * a1 * a1 * a2).abs() < 1e-14 * c.abs());
        // empty index → 1
        assert!((fam.coefficient(&MultiIndex::new(vec![0, 0])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn recursion_path_independence() {
        let units = UnitSystem::natural();
        let species = vec![fermi_species(0.4, 1.0, 2), fermi_species(0.6, 2.0, 3)];
        let fam = NsFamily::new(&species, 0.8, 3, &units).unwrap();
        let s = MultiIndex::new(vec![3, 2]);
        let closed = fam.coefficient(&s);
        // Two different descent orders.
        let path1 = [0, 0, 0, 1, 1];
        let path2 = [1, 0, 1, 0, 0];
        let v1 = fam.coefficient_by_recursion(&s, &path1).unwrap();
        let v2 = fam.coefficient_by_recursion(&s, &path2).unwrap();
        assert!((v1 - closed).abs() < 1e-12 * closed.abs());
        assert!((v2 - closed).abs() < 1e-12 * closed.abs());
    }

    #[test]
    fn factorization_over_disjoint_subsets() {
        // Product structure: A_{s⊕t} = A_s · A_t for disjoint species.
        let units = UnitSystem::natural();
        let species = vec![
            fermi_species(0.4, 1.0, 2),
            fermi_species(0.6, 2.0, 1),
            fermi_species(0.2, 0.5, 3),
        ];
        let fam = NsFamily::new(&species, 1.1, 3, &units).unwrap();
        let s = MultiIndex::new(vec![2, 0, 0]);
        let t = MultiIndex::new(vec![0, 1, 2]);
        let st = MultiIndex::new(vec![2, 1, 2]);
        let lhs = fam.coefficient(&st);
        let rhs = fam.coefficient(&s) * fam.coefficient(&t);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs());
    }

    #[test]
    fn reduction_identity_for_exponential_family() {
        let units = UnitSystem::natural();
        let species = vec![fermi_species(0.4, 1.0, 2), fermi_species(0.6, 2.0, 1)];
        let tau = 1.4;
        let fam = NsFamily::new(&species, tau, 3, &units).unwrap();
        let s = MultiIndex::new(vec![2, 1]);
        let rep = check_reduction(&fam, &species, &s, 0, &default_z_grid(tau), &units).unwrap();
        assert!(rep.max_rel_residual < 1e-10, "{}", rep.max_rel_residual);
    }

    #[test]
    fn reduction_discriminates_perturbed_family() {
        let units = UnitSystem::natural();
        let species = vec![fermi_species(0.5, 1.0, 2)];
        let tau = 1.0;
        let fam = NsFamily::new(&species, tau, 3, &units).unwrap();
        let s = MultiIndex::new(vec![2]);
        let lower = s.lowered(0).unwrap();
        // Both orders perturbed by (1 + 0.1 z²).
        let n_s = |z: f64| fam.n(&s, z) * (1.0 + 0.1 * z * z);
        let n_minus = |z: f64| fam.n(&lower, z) * (1.0 + 0.1 * z * z);
        let grid: Vec<f64> = (0..64).map(|i| 5.0 * tau * i as f64 / 63.0).collect();
        let rep = check_reduction_fns(&n_s, &n_minus, &species[0], 2, &grid, 3, &units).unwrap();
        assert!(rep.max_rel_residual > 1e-2, "{}", rep.max_rel_residual);
    }

    #[test]
    fn reduction_detects_tau_mismatch() {
        let units = UnitSystem::natural();
        let species = vec![fermi_species(0.5, 1.0, 2)];
        let fam = NsFamily::new(&species, 1.0, 3, &units).unwrap();
        let fam_prime = NsFamily::new(&species, 1.25, 3, &units).unwrap();
        let s = MultiIndex::new(vec![2]);
        let lower = s.lowered(0).unwrap();
        let n_s = |z: f64| fam.n(&s, z);
        let n_minus = |z: f64| fam_prime.n(&lower, z);
        let grid = default_z_grid(1.0);
        let rep = check_reduction_fns(&n_s, &n_minus, &species[0], 2, &grid, 3, &units).unwrap();
        // The ratio e^{z(1/τ−1/τ')} is nonconstant, so no normalization
        // hides the mismatch.
        assert!(rep.max_rel_residual > 1e-2, "{}", rep.max_rel_residual);
        // At z = 0 the smeared value overshoots (larger τ in n_s's
        // Gaussian width relative to the target family).
        assert!(rep.residuals[0].1 > 1e-3);
    }

    #[test]
    fn exponential_family_is_compatible() {
        let units = UnitSystem::natural();
        let grid = default_z_grid(1.0);
        let rep = incompatibility_demo(
            CandidateFamily::Exponential { tau: 1.0 },
            1.0,
            (1, 3),
            &grid,
            &units,
        )
        .unwrap();
        assert!(rep.family_ratio_variation < 1e-12, "{}", rep.family_ratio_variation);
        assert!(rep.smeared_ratio_variation < 1e-12);
    }

    #[test]
    fn named_distributions_are_incompatible() {
        let units = UnitSystem::natural();
        let grid: Vec<f64> = (0..64).map(|i| 6.0 * i as f64 / 63.0).collect();
        for kappas in [(1u32, 2u32), (2, 3), (1, 4)] {
            let rep = incompatibility_demo(
                CandidateFamily::Fermi {
                    mu1_over_t: 0.5,
                    t: 1.0,
                },
                1.0,
                kappas,
                &grid,
                &units,
            )
            .unwrap();
            assert!(rep.family_ratio_variation > 1e-2, "fermi {kappas:?}");
            assert!(rep.smeared_ratio_variation < 1e-10);

            let rep = incompatibility_demo(
                CandidateFamily::Bose {
                    mu1_over_t: -0.4,
                    t: 1.0,
                },
                1.0,
                kappas,
                &grid,
                &units,
            )
            .unwrap();
            assert!(rep.family_ratio_variation > 1e-2, "bose {kappas:?}");
        }
    }
}
