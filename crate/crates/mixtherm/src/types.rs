//! Shared domain vocabulary: species, mixtures, multi-indices, pair
//! potentials, correlation models and the unit convention.
//!
//! Everything here is immutable after construction and safe to share
//! across threads.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::interp::MonotoneCubic;

/// Quantum statistics of a particle kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermi,
    Bose,
}

impl Statistics {
    /// η in the kernel denominator: +1 for fermions, -1 for bosons.
    pub fn eta(self) -> f64 {
        match self {
            Statistics::Fermi => 1.0,
            Statistics::Bose => -1.0,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Fermi => write!(f, "fermi"),
            Statistics::Bose => write!(f, "bose"),
        }
    }
}

/// One particle kind: mass, spin degeneracy κ = 2s + 1, statistics and
/// number density, all in natural units (ħ = k_B = 1).
#[derive(Debug, Clone)]
pub struct SpeciesSpec {
    pub label: String,
    pub mass: f64,
    pub spin_degeneracy: u32,
    pub statistics: Statistics,
    pub density: f64,
}

impl SpeciesSpec {
    pub fn new(
        label: impl Into<String>,
        mass: f64,
        spin_degeneracy: u32,
        statistics: Statistics,
        density: f64,
    ) -> Result<Self> {
        let label = label.into();
        if !(mass > 0.0) {
            return Err(Error::NonPositiveMass(label));
        }
        if spin_degeneracy < 1 {
            return Err(Error::ZeroSpinDegeneracy(label));
        }
        if !(density > 0.0) {
            return Err(Error::NonPositiveDensity(label));
        }
        Ok(Self {
            label,
            mass,
            spin_degeneracy,
            statistics,
            density,
        })
    }

    pub fn kappa(&self) -> f64 {
        f64::from(self.spin_degeneracy)
    }
}

/// Unit convention. Natural units are the default; `hbar` exists so a
/// caller can rescale for display without touching the formulas.
#[derive(Debug, Clone)]
pub struct UnitSystem {
    pub hbar: f64,
    pub note: String,
}

impl UnitSystem {
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            note: "natural units: ħ = k_B = 1".into(),
        }
    }

    pub fn with_hbar(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::Invalid("ħ must be positive".into()));
        }
        Ok(Self {
            hbar,
            note: format!("ħ = {hbar}"),
        })
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}

/// A thermodynamic point (θ, ρ) with fixed composition fractions.
#[derive(Debug, Clone)]
pub struct MixtureState {
    pub temperature: f64,
    pub total_density: f64,
    pub fractions: Vec<f64>,
}

impl MixtureState {
    /// Per-species density ρ_a = ρ · fraction_a.
    pub fn density(&self, a: usize) -> f64 {
        self.total_density * self.fractions[a]
    }
}

/// Build the thermodynamic state ρ = Σ ρ_a, fractions ρ_a/ρ.
pub fn build_mixture(species: &[SpeciesSpec], theta: f64) -> Result<MixtureState> {
    if species.is_empty() {
        return Err(Error::EmptyMixture);
    }
    if !(theta > 0.0) {
        return Err(Error::NonPositiveTemperature(theta));
    }
    for sp in species {
        if !(sp.density > 0.0) {
            return Err(Error::NonPositiveDensity(sp.label.clone()));
        }
    }
    let total: f64 = species.iter().map(|s| s.density).sum();
    let fractions = species.iter().map(|s| s.density / total).collect();
    Ok(MixtureState {
        temperature: theta,
        total_density: total,
        fractions,
    })
}

/// The set (s_1, …, s_n) labeling a density-matrix order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: Vec<usize>,
}

impl MultiIndex {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    /// Shorthand (1_a): a single particle of kind `a` (zero-based).
    pub fn one(a: usize, n: usize) -> Result<Self> {
        if a >= n {
            return Err(Error::IndexOutOfRange { index: a, n });
        }
        let mut counts = vec![0; n];
        counts[a] = 1;
        Ok(Self { counts })
    }

    /// Shorthand (2_a): two particles of kind `a`.
    pub fn two(a: usize, n: usize) -> Result<Self> {
        if a >= n {
            return Err(Error::IndexOutOfRange { index: a, n });
        }
        let mut counts = vec![0; n];
        counts[a] = 2;
        Ok(Self { counts })
    }

    /// Shorthand (1_a 1_b): one particle each of kinds `a` and `b`.
    pub fn one_one(a: usize, b: usize, n: usize) -> Result<Self> {
        if a >= n {
            return Err(Error::IndexOutOfRange { index: a, n });
        }
        if b >= n {
            return Err(Error::IndexOutOfRange { index: b, n });
        }
        if a == b {
            return Err(Error::Invalid("(1_a 1_b) requires a ≠ b".into()));
        }
        let mut counts = vec![0; n];
        counts[a] = 1;
        counts[b] = 1;
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, a: usize) -> usize {
        self.counts[a]
    }

    pub fn n_kinds(&self) -> usize {
        self.counts.len()
    }

    /// Order s = Σ s_a.
    pub fn order(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Lower the count of kind `a` by one (the s − 1_a of the reduction
    /// relation).
    pub fn lowered(&self, a: usize) -> Result<Self> {
        if a >= self.counts.len() {
            return Err(Error::IndexOutOfRange {
                index: a,
                n: self.counts.len(),
            });
        }
        if self.counts[a] == 0 {
            return Err(Error::Invalid(format!("cannot lower s_{a} below zero")));
        }
        let mut counts = self.counts.clone();
        counts[a] -= 1;
        Ok(Self { counts })
    }
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Functional form of a radial pair potential K_ab(r).
#[derive(Clone)]
pub enum PotentialForm {
    Zero,
    /// K₀ e^{-r/r₀}
    Exponential { k0: f64, r0: f64 },
    /// K₀ e^{-(r/r₀)²}
    Gaussian { k0: f64, r0: f64 },
    /// K₀ for r < radius, 0 beyond.
    SquareStep { k0: f64, radius: f64 },
    /// Closed form supplied by the caller together with its radial
    /// derivative and an effective range beyond which it is zero.
    Custom { f: RadialFn, df: RadialFn, range: f64 },
    /// Tabulated samples with monotone cubic interpolation. Treated as
    /// identically zero beyond the table, which requires the last sample
    /// to be negligible.
    Tabulated { spline: MonotoneCubic },
}

impl fmt::Debug for PotentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialForm::Zero => write!(f, "Zero"),
            PotentialForm::Exponential { k0, r0 } => write!(f, "Exponential{{k0:{k0},r0:{r0}}}"),
            PotentialForm::Gaussian { k0, r0 } => write!(f, "Gaussian{{k0:{k0},r0:{r0}}}"),
            PotentialForm::SquareStep { k0, radius } => write!(f, "SquareStep{{k0:{k0},R:{radius}}}"),
            PotentialForm::Custom { range, .. } => write!(f, "Custom{{range:{range}}}"),
            PotentialForm::Tabulated { spline } => {
                write!(f, "Tabulated{{range:{:?}}}", spline.range())
            }
        }
    }
}

/// Interaction between kinds `a` and `b`; symmetric in the pair by
/// construction (stored under the sorted pair).
#[derive(Debug, Clone)]
pub struct PairPotential {
    pub pair: (usize, usize),
    pub form: PotentialForm,
}

impl PairPotential {
    pub fn new(a: usize, b: usize, form: PotentialForm) -> Self {
        let pair = if a <= b { (a, b) } else { (b, a) };
        Self { pair, form }
    }

    pub fn from_table(a: usize, b: usize, r: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        let spline = MonotoneCubic::new(r, k)?;
        Ok(Self::new(a, b, PotentialForm::Tabulated { spline }))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        match &self.form {
            PotentialForm::Zero => Ok(0.0),
            PotentialForm::Exponential { k0, r0 } => Ok(k0 * (-r / r0).exp()),
            PotentialForm::Gaussian { k0, r0 } => Ok(k0 * (-(r / r0) * (r / r0)).exp()),
            PotentialForm::SquareStep { k0, radius } => Ok(if r < *radius { *k0 } else { 0.0 }),
            PotentialForm::Custom { f, range, .. } => {
                if r > *range {
                    Ok(0.0)
                } else {
                    Ok(f(r))
                }
            }
            PotentialForm::Tabulated { spline } => {
                let (lo, hi) = spline.range();
                if r > hi {
                    Ok(0.0)
                } else if r < lo {
                    Err(Error::Extrapolation { r, lo, hi })
                } else {
                    spline.eval(r)
                }
            }
        }
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        match &self.form {
            PotentialForm::Zero => Ok(0.0),
            PotentialForm::Exponential { k0, r0 } => Ok(-k0 / r0 * (-r / r0).exp()),
            PotentialForm::Gaussian { k0, r0 } => {
                Ok(-2.0 * k0 * r / (r0 * r0) * (-(r / r0) * (r / r0)).exp())
            }
            // Zero almost everywhere; the jump carries no weight in the
            // quadratures used here.
            PotentialForm::SquareStep { .. } => Ok(0.0),
            PotentialForm::Custom { df, range, .. } => {
                if r > *range {
                    Ok(0.0)
                } else {
                    Ok(df(r))
                }
            }
            PotentialForm::Tabulated { spline } => {
                let (lo, hi) = spline.range();
                if r > hi {
                    Ok(0.0)
                } else if r < lo {
                    Err(Error::Extrapolation { r, lo, hi })
                } else {
                    spline.derivative(r)
                }
            }
        }
    }

    /// Radius past which the potential is treated as zero; quadratures
    /// split here.
    pub fn tail_start(&self) -> f64 {
        match &self.form {
            PotentialForm::Zero => 1.0,
            PotentialForm::Exponential { r0, .. } => 60.0 * r0,
            PotentialForm::Gaussian { r0, .. } => 10.0 * r0,
            PotentialForm::SquareStep { radius, .. } => *radius,
            PotentialForm::Custom { range, .. } => *range,
            PotentialForm::Tabulated { spline } => spline.range().1,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, PotentialForm::Zero)
    }
}

/// Symmetric lookup table of pair potentials; missing pairs are zero.
#[derive(Debug, Clone, Default)]
pub struct PotentialSet {
    map: HashMap<(usize, usize), PairPotential>,
}

impl PotentialSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: PairPotential) {
        self.map.insert(p.pair, p);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&PairPotential> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.map.get(&key)
    }

    pub fn value(&self, a: usize, b: usize, r: f64) -> Result<f64> {
        match self.get(a, b) {
            Some(p) => p.value(r),
            None => Ok(0.0),
        }
    }

    pub fn derivative(&self, a: usize, b: usize, r: f64) -> Result<f64> {
        match self.get(a, b) {
            Some(p) => p.derivative(r),
            None => Ok(0.0),
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.map.values().all(|p| p.is_zero())
    }
}

type CorrelationFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Pair correlation g_ab(θ, ρ, r), with g → 1 as r → ∞ and g_ab = g_ba.
#[derive(Clone)]
pub enum CorrelationModel {
    /// g ≡ 1.
    Unity,
    /// g = exp(−K_ab(r)/θ); the classical low-density closure. Partials
    /// are analytic given the potential.
    ClassicalBoltzmann,
    /// g(r) table, independent of θ and ρ.
    TabulatedR { spline: MonotoneCubic },
    /// Arbitrary evaluator g(θ, ρ, r); partials fall back to central
    /// differences with relative step `fd_step` (default 1e-5).
    Custom { g: CorrelationFn, fd_step: f64 },
}

impl fmt::Debug for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrelationModel::Unity => write!(f, "Unity"),
            CorrelationModel::ClassicalBoltzmann => write!(f, "ClassicalBoltzmann"),
            CorrelationModel::TabulatedR { .. } => write!(f, "TabulatedR"),
            CorrelationModel::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Default relative step of the finite-difference fallback for
/// correlation partials.
pub const FD_REL_STEP: f64 = 1e-5;

/// Correlation models per pair, resolved against a potential set (the
/// Boltzmann closure needs K_ab).
#[derive(Debug, Clone)]
pub struct CorrelationSet {
    map: HashMap<(usize, usize), CorrelationModel>,
    default: Option<CorrelationModel>,
}

impl CorrelationSet {
    pub fn uniform(model: CorrelationModel) -> Self {
        Self {
            map: HashMap::new(),
            default: Some(model),
        }
    }

    /// No fallback: pairs without an explicit model are an error when
    /// evaluated.
    pub fn explicit() -> Self {
        Self {
            map: HashMap::new(),
            default: None,
        }
    }

    pub fn insert(&mut self, a: usize, b: usize, model: CorrelationModel) {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.map.insert(key, model);
    }

    pub fn model(&self, a: usize, b: usize) -> Result<&CorrelationModel> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.map
            .get(&key)
            .or(self.default.as_ref())
            .ok_or(Error::MissingCorrelation(key.0, key.1))
    }

    pub fn g(
        &self,
        potentials: &PotentialSet,
        a: usize,
        b: usize,
        theta: f64,
        rho: f64,
        r: f64,
    ) -> Result<f64> {
        match self.model(a, b)? {
            CorrelationModel::Unity => Ok(1.0),
            CorrelationModel::ClassicalBoltzmann => {
                Ok((-potentials.value(a, b, r)? / theta).exp())
            }
            CorrelationModel::TabulatedR { spline } => {
                let (_, hi) = spline.range();
                if r > hi {
                    Ok(1.0)
                } else {
                    spline.eval(r)
                }
            }
            CorrelationModel::Custom { g, .. } => Ok(g(theta, rho, r)),
        }
    }

    pub fn dg_dtheta(
        &self,
        potentials: &PotentialSet,
        a: usize,
        b: usize,
        theta: f64,
        rho: f64,
        r: f64,
    ) -> Result<f64> {
        match self.model(a, b)? {
            CorrelationModel::Unity | CorrelationModel::TabulatedR { .. } => Ok(0.0),
            CorrelationModel::ClassicalBoltzmann => {
                let k = potentials.value(a, b, r)?;
                Ok(k / (theta * theta) * (-k / theta).exp())
            }
            CorrelationModel::Custom { g, fd_step } => {
                let h = fd_step * theta.abs().max(1.0);
                Ok((g(theta + h, rho, r) - g(theta - h, rho, r)) / (2.0 * h))
            }
        }
    }

    pub fn dg_drho(
        &self,
        _potentials: &PotentialSet,
        a: usize,
        b: usize,
        theta: f64,
        rho: f64,
        r: f64,
    ) -> Result<f64> {
        match self.model(a, b)? {
            CorrelationModel::Unity
            | CorrelationModel::ClassicalBoltzmann
            | CorrelationModel::TabulatedR { .. } => Ok(0.0),
            CorrelationModel::Custom { g, fd_step } => {
                let h = fd_step * rho.abs().max(1.0);
                Ok((g(theta, rho + h, r) - g(theta, rho - h, r)) / (2.0 * h))
            }
        }
    }

    pub fn dg_dr(
        &self,
        potentials: &PotentialSet,
        a: usize,
        b: usize,
        theta: f64,
        rho: f64,
        r: f64,
    ) -> Result<f64> {
        match self.model(a, b)? {
            CorrelationModel::Unity => Ok(0.0),
            CorrelationModel::ClassicalBoltzmann => {
                let k = potentials.value(a, b, r)?;
                let dk = potentials.derivative(a, b, r)?;
                Ok(-dk / theta * (-k / theta).exp())
            }
            CorrelationModel::TabulatedR { spline } => {
                let (_, hi) = spline.range();
                if r > hi {
                    Ok(0.0)
                } else {
                    spline.derivative(r)
                }
            }
            CorrelationModel::Custom { g, fd_step } => {
                let h = fd_step * r.abs().max(1.0);
                let rm = (r - h).max(0.0);
                Ok((g(theta, rho, r + h) - g(theta, rho, rm)) / (r + h - rm))
            }
        }
    }
}
