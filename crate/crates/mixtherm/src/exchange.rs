//! Exchange symmetry combinatorics: per-group permutation enumeration,
//! cycle counting, signed spin-degeneracy weights κ_s(P_s) and the
//! exchange factor ω_s.
//!
//! Permutations act only inside the group of variables of each particle
//! kind; cross-group exchange is impossible by construction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::{MultiIndex, SpeciesSpec, Statistics, UnitSystem};

/// A composite permutation: one permutation per species group, with the
/// cycle count ν_a and parity of each group precomputed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupPermutation {
    groups: Vec<Vec<usize>>,
    cycle_counts: Vec<usize>,
    parities: Vec<i8>,
}

fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
        }
    }
    cycles
}

impl GroupPermutation {
    pub fn new(groups: Vec<Vec<usize>>) -> Self {
        let cycle_counts: Vec<usize> = groups.iter().map(|g| cycle_count(g)).collect();
        // Parity = (−1)^{s_a − ν_a}.
        let parities = groups
            .iter()
            .zip(&cycle_counts)
            .map(|(g, &nu)| if (g.len() - nu) % 2 == 0 { 1 } else { -1 })
            .collect();
        Self {
            groups,
            cycle_counts,
            parities,
        }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn cycle_counts(&self) -> &[usize] {
        &self.cycle_counts
    }

    /// Parity of the group-`a` permutation, ±1.
    pub fn parity(&self, a: usize) -> i8 {
        self.parities[a]
    }

    /// Product of parities over fermion groups only.
    pub fn fermion_parity(&self, species: &[SpeciesSpec]) -> i8 {
        self.parities
            .iter()
            .zip(species)
            .filter(|(_, sp)| sp.statistics == Statistics::Fermi)
            .map(|(&p, _)| p)
            .product()
    }

    pub fn is_identity(&self) -> bool {
        self.groups
            .iter()
            .all(|g| g.iter().enumerate().all(|(i, &v)| i == v))
    }
}

/// Π s_a! with the enumeration guard applied.
fn permutation_count(s: &MultiIndex) -> Result<u64> {
    let mut total: u64 = 1;
    for &c in s.counts() {
        for k in 2..=c as u64 {
            total = total.saturating_mul(k);
        }
        if total > 1_000_000 {
            return Err(Error::TooLarge(total));
        }
    }
    Ok(total)
}

fn lexicographic_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    // Standard next-permutation loop.
    while let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) {
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(current.clone());
    }
    out
}

/// All Π_a s_a! composite permutations of the multi-index, in
/// lexicographic order (last group varies fastest).
pub fn enumerate_permutations(s: &MultiIndex) -> Result<Vec<GroupPermutation>> {
    let total = permutation_count(s)? as usize;
    let per_group: Vec<Vec<Vec<usize>>> = s
        .counts()
        .iter()
        .map(|&c| lexicographic_permutations(c))
        .collect();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; per_group.len()];
    loop {
        let groups: Vec<Vec<usize>> = per_group
            .iter()
            .zip(&idx)
            .map(|(perms, &i)| perms[i].clone())
            .collect();
        out.push(GroupPermutation::new(groups));
        // Odometer increment, last group fastest.
        let mut g = per_group.len();
        loop {
            if g == 0 {
                return Ok(out);
            }
            g -= 1;
            idx[g] += 1;
            if idx[g] < per_group[g].len() {
                break;
            }
            idx[g] = 0;
        }
    }
}

/// Unsigned spin-assignment count Π_a κ_a^{ν_a}.
pub fn kappa_count(p: &GroupPermutation, species: &[SpeciesSpec]) -> u64 {
    p.cycle_counts()
        .iter()
        .zip(species)
        .map(|(&nu, sp)| u64::from(sp.spin_degeneracy).pow(nu as u32))
        .product()
}

/// Signed weight (−1)^{p_s} Π_a κ_a^{ν_a}; the sign runs over fermion
/// groups only.
pub fn kappa_weight(p: &GroupPermutation, species: &[SpeciesSpec]) -> i64 {
    i64::from(p.fermion_parity(species)) * kappa_count(p, species) as i64
}

/// Coordinates and momenta grouped per species; each vector has `dim`
/// components (1 or 3).
#[derive(Debug, Clone)]
pub struct PhaseSpacePoint {
    pub dim: usize,
    pub coordinates: Vec<Vec<[f64; 3]>>,
    pub momenta: Vec<Vec<[f64; 3]>>,
}

impl PhaseSpacePoint {
    pub fn new(dim: usize, coordinates: Vec<Vec<[f64; 3]>>, momenta: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::Invalid(format!("dimension must be 1 or 3, got {dim}")));
        }
        if coordinates.len() != momenta.len()
            || coordinates
                .iter()
                .zip(&momenta)
                .any(|(c, m)| c.len() != m.len())
        {
            return Err(Error::GridMismatch(
                "coordinate and momentum group sizes differ".into(),
            ));
        }
        Ok(Self {
            dim,
            coordinates,
            momenta,
        })
    }

    fn matches(&self, s: &MultiIndex) -> bool {
        self.coordinates.len() == s.n_kinds()
            && self
                .coordinates
                .iter()
                .zip(s.counts())
                .all(|(g, &c)| g.len() == c)
    }

    fn dot(&self, x: &[f64; 3], y: &[f64; 3]) -> f64 {
        (0..self.dim).map(|i| x[i] * y[i]).sum()
    }
}

/// The exchange factor ω_s: the signed, κ-weighted sum of plane-wave
/// phases over within-group permutations, normalized by 1/Π s_a!.
pub fn omega(
    point: &PhaseSpacePoint,
    species: &[SpeciesSpec],
    s: &MultiIndex,
    units: &UnitSystem,
) -> Result<Complex64> {
    if !point.matches(s) {
        return Err(Error::GridMismatch(
            "phase-space point does not match the multi-index".into(),
        ));
    }
    let perms = enumerate_permutations(s)?;
    let norm: f64 = s
        .counts()
        .iter()
        .map(|&c| (1..=c).map(|k| k as f64).product::<f64>())
        .product();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in &perms {
        let weight = kappa_weight(p, species) as f64;
        // Phase −(1/ħ) Σ_a Σ_k r_k · p_{π(k)}.
        let mut phase = 0.0;
        for (a, perm) in p.groups().iter().enumerate() {
            for (k, &pk) in perm.iter().enumerate() {
                phase -= point.dot(&point.coordinates[a][k], &point.momenta[a][pk]) / units.hbar;
            }
        }
        sum += weight * Complex64::new(0.0, phase).exp();
    }
    Ok(sum / norm)
}

/// Ideal-gas same-kind pair correlation from the s = (2_a) exchange term:
/// g_aa(r) = 1 + η/κ_a · exp(−m_a τ r²/ħ²).
pub fn ideal_pair_correlation(r: f64, species: &SpeciesSpec, tau: f64, units: &UnitSystem) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    if r < 0.0 {
        return Err(Error::Invalid(format!("negative separation {r}")));
    }
    let eta = -species.statistics.eta(); // +1 bosons, −1 fermions
    let kappa = species.kappa();
    let hbar2 = units.hbar * units.hbar;
    Ok(1.0 + eta / kappa * (-species.mass * tau * r * r / hbar2).exp())
}
