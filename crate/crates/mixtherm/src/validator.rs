//! Desk-scale numeric verification of the hierarchy's structural
//! equations on 1-D periodic grids: the resolvent equation, contour
//! densities, normalization, and the classical BBGKY reduction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exchange;
use crate::parallel;
use crate::types::{MultiIndex, PairPotential, SpeciesSpec, UnitSystem};

/// Uniform periodic 1-D lattice.
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub n: usize,
    pub length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::Invalid(format!("grid needs ≥ 16 points, got {n}")));
        }
        if !(length > 0.0) {
            return Err(Error::Invalid("grid length must be positive".into()));
        }
        Ok(Self { n, length })
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|i| i as f64 * h).collect()
    }
}

/// Shortest signed displacement on the periodic cell.
pub fn wrap(d: f64, length: f64) -> f64 {
    let mut d = d % length;
    if d > 0.5 * length {
        d -= length;
    } else if d < -0.5 * length {
        d += length;
    }
    d
}

/// Free-particle resolvent (z − p²/2m)^{−1}.
pub fn free_resolvent(p: f64, z: Complex64, m: f64) -> Result<Complex64> {
    let pole = p * p / (2.0 * m);
    let denom = z - Complex64::from(pole);
    if denom.norm() < 1e-14 {
        return Err(Error::PoleHit(pole));
    }
    Ok(denom.inv())
}

/// Discrete single-particle operator H_p = −(ħ²/2m)D₂ − (iħp/m)D₁ +
/// p²/2m + U with central differences on the periodic grid. Hermitian:
/// D₂ is symmetric and iD₁ is Hermitian for antisymmetric D₁.
pub fn hamiltonian_matrix(
    grid: &Grid1D,
    u: &[f64],
    p: f64,
    m: f64,
    units: &UnitSystem,
) -> Result<DMatrix<Complex64>> {
    let n = grid.n;
    if u.len() != n {
        return Err(Error::GridMismatch(format!(
            "potential samples {} vs grid points {n}",
            u.len()
        )));
    }
    let h = grid.h();
    let hbar = units.hbar;
    let lap = hbar * hbar / (2.0 * m * h * h);
    let drift = hbar * p / (2.0 * m * h);
    let kin = p * p / (2.0 * m);
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let up = (i + 1) % n;
        let dn = (i + n - 1) % n;
        mat[(i, i)] = Complex64::new(2.0 * lap + kin + u[i], 0.0);
        mat[(i, up)] += Complex64::new(-lap, -drift);
        mat[(i, dn)] += Complex64::new(-lap, drift);
    }
    Ok(mat)
}

/// v_s on the grid for fixed (p, z), from the direct linear solve of
/// (z − H_p) v = 1.
#[derive(Debug, Clone)]
pub struct ResolventField {
    pub p: f64,
    pub z: Complex64,
    pub values: Vec<Complex64>,
    pub residual: f64,
}

pub fn resolvent_solve(
    grid: &Grid1D,
    u: &[f64],
    p: f64,
    z: Complex64,
    m: f64,
    units: &UnitSystem,
) -> Result<ResolventField> {
    let h_mat = hamiltonian_matrix(grid, u, p, m, units)?;
    let n = grid.n;
    let a = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
        let diag = if i == j { z } else { Complex64::ZERO };
        diag - h_mat[(i, j)]
    });
    let rhs = DVector::<Complex64>::from_element(n, Complex64::ONE);
    let v = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem(f64::INFINITY))?;
    let residual = (&a * &v - &rhs).iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if residual > 1e-10 {
        return Err(Error::SingularSystem(residual));
    }
    Ok(ResolventField {
        p,
        z,
        values: v.iter().copied().collect(),
        residual,
    })
}

/// Dense Hermitian eigendecomposition of H_p, the unconditionally
/// trustworthy (O(N³)) oracle. Capped at 512 points.
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// ψ_k as columns, orthonormal in the plain ℂ^N inner product.
    pub eigenvectors: DMatrix<Complex64>,
    /// ⟨ψ_k, 1⟩ per mode.
    pub overlaps: Vec<Complex64>,
}

pub fn spectral_data(h_mat: &DMatrix<Complex64>) -> Result<SpectralData> {
    let n = h_mat.nrows();
    if n > 512 {
        return Err(Error::TooLarge(n as u64));
    }
    let eig = h_mat.clone().symmetric_eigen();
    let ones = DVector::<Complex64>::from_element(n, Complex64::ONE);
    let overlaps: Vec<Complex64> = (0..n)
        .map(|k| eig.eigenvectors.column(k).dotc(&ones))
        .collect();
    Ok(SpectralData {
        eigenvalues: eig.eigenvalues.iter().copied().collect(),
        eigenvectors: eig.eigenvectors,
        overlaps,
    })
}

/// Resolvent through the spectral oracle: v = Σ_k ψ_k ⟨ψ_k, 1⟩/(z − λ_k).
pub fn resolvent_spectral(
    grid: &Grid1D,
    u: &[f64],
    p: f64,
    z: Complex64,
    m: f64,
    units: &UnitSystem,
) -> Result<Vec<Complex64>> {
    let h_mat = hamiltonian_matrix(grid, u, p, m, units)?;
    let data = spectral_data(&h_mat)?;
    Ok(spectral_resolvent_values(&data, z))
}

fn spectral_resolvent_values(data: &SpectralData, z: Complex64) -> Vec<Complex64> {
    let n = data.eigenvalues.len();
    let mut v = vec![Complex64::ZERO; n];
    for k in 0..n {
        let w = data.overlaps[k] / (z - Complex64::from(data.eigenvalues[k]));
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += data.eigenvectors[(i, k)] * w;
        }
    }
    v
}

/// Contour-versus-residue cross-check of the density integral
/// (1/2πi)∮ n(z) v(x, z) dz with n(z) = e^{−z/τ}: the residue sum over
/// the discrete spectrum against honest trapezoidal quadrature over a
/// rectangle enclosing it, with every v(x, z) coming from a fresh
/// linear solve.
#[derive(Debug, Clone)]
pub struct ContourReport {
    pub residue: Vec<f64>,
    pub contour: Vec<f64>,
    pub max_abs_diff: f64,
}

pub fn contour_vs_residue(
    grid: &Grid1D,
    u: &[f64],
    p: f64,
    m: f64,
    tau: f64,
    units: &UnitSystem,
) -> Result<ContourReport> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    let h_mat = hamiltonian_matrix(grid, u, p, m, units)?;
    let data = spectral_data(&h_mat)?;
    let n = grid.n;

    // Residue sum: Σ_k e^{−λ_k/τ} ψ_k(x) ⟨ψ_k, 1⟩ (real up to roundoff).
    let mut residue = vec![Complex64::ZERO; n];
    for k in 0..n {
        let w = data.overlaps[k] * Complex64::from((-data.eigenvalues[k] / tau).exp());
        for (i, ri) in residue.iter_mut().enumerate() {
            *ri += data.eigenvectors[(i, k)] * w;
        }
    }
    let residue: Vec<f64> = residue.iter().map(|c| c.re).collect();

    // Rectangle: thin margin on the left where e^{−z/τ} grows, wider
    // elsewhere. Counterclockwise.
    let lam_lo = data
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let lam_hi = data
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let (re_lo, re_hi) = (lam_lo - 0.5 * tau, lam_hi + 3.0);
    let im = 3.0;
    let corners = [
        Complex64::new(re_lo, -im),
        Complex64::new(re_hi, -im),
        Complex64::new(re_hi, im),
        Complex64::new(re_lo, im),
    ];

    let eval = |z: Complex64| -> Result<Vec<Complex64>> {
        let field = resolvent_solve(grid, u, p, z, m, units)?;
        let nz = (-z / tau).exp();
        Ok(field.values.iter().map(|&v| v * nz).collect())
    };

    // Composite trapezoid along the closed polygon, doubling the point
    // count until the result stabilizes.
    let mut prev: Option<Vec<f64>> = None;
    let contour;
    let mut m_pts = 512usize;
    loop {
        let mut zs = Vec::with_capacity(4 * m_pts);
        let mut dzs = Vec::with_capacity(4 * m_pts);
        for seg in 0..4 {
            let (a, b) = (corners[seg], corners[(seg + 1) % 4]);
            let dz = (b - a) / m_pts as f64;
            for j in 0..m_pts {
                // Midpoint rule per sub-segment: same O(h²) order as the
                // trapezoid, no duplicated corner evaluations.
                zs.push(a + dz * (j as f64 + 0.5));
                dzs.push(dz);
            }
        }
        let vals = parallel::map(&zs, |&z| eval(z));
        let mut acc = vec![Complex64::ZERO; n];
        for (val, &dz) in vals.into_iter().zip(&dzs) {
            let val = val?;
            for (ai, vi) in acc.iter_mut().zip(val) {
                *ai += vi * dz;
            }
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let cur: Vec<f64> = acc.iter().map(|c| (c / two_pi_i).re).collect();
        if let Some(p) = &prev {
            let diff = p
                .iter()
                .zip(&cur)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if diff < 1e-10 || m_pts >= 1 << 16 {
                contour = cur;
                break;
            }
        }
        prev = Some(cur);
        m_pts *= 2;
    }

    let max_abs_diff = residue
        .iter()
        .zip(&contour)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(ContourReport {
        residue,
        contour,
        max_abs_diff,
    })
}

/// Two-particle operator for one kind (equal masses) on the N² grid:
/// H = −(ħ²/2m)(D₂⊗I + I⊗D₂) − (iħ/m)(p₁D₁⊗I + p₂I⊗D₁)
///     + (p₁²+p₂²)/2m + K(x₁−x₂).
pub fn hamiltonian_matrix_two(
    grid: &Grid1D,
    pot: &PairPotential,
    p1: f64,
    p2: f64,
    m: f64,
    units: &UnitSystem,
) -> Result<DMatrix<Complex64>> {
    let n = grid.n;
    let big = n * n;
    if big > 512 {
        return Err(Error::TooLarge(big as u64));
    }
    let h = grid.h();
    let hbar = units.hbar;
    let lap = hbar * hbar / (2.0 * m * h * h);
    let kin = (p1 * p1 + p2 * p2) / (2.0 * m);
    let pts = grid.points();
    let mut mat = DMatrix::<Complex64>::zeros(big, big);
    let idx = |i: usize, j: usize| i * n + j;
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            let u = pot.value(wrap(pts[i] - pts[j], grid.length).abs())?;
            mat[(row, row)] = Complex64::new(4.0 * lap + kin + u, 0.0);
            for (nbr, p) in [((i + 1) % n, p1), ((i + n - 1) % n, p1)] {
                let sign = if nbr == (i + 1) % n { 1.0 } else { -1.0 };
                let drift = hbar * p / (2.0 * m * h);
                mat[(row, idx(nbr, j))] += Complex64::new(-lap, -sign * drift);
            }
            for (nbr, p) in [((j + 1) % n, p2), ((j + n - 1) % n, p2)] {
                let sign = if nbr == (j + 1) % n { 1.0 } else { -1.0 };
                let drift = hbar * p / (2.0 * m * h);
                mat[(row, idx(i, nbr))] += Complex64::new(-lap, -sign * drift);
            }
        }
    }
    Ok(mat)
}

/// Max deviation of the s = 2 spectral resolvent under the pair
/// interchange (r₁, p₁) ↔ (r₂, p₂).
pub fn pair_interchange_deviation(
    grid: &Grid1D,
    pot: &PairPotential,
    p1: f64,
    p2: f64,
    m: f64,
    z: Complex64,
    units: &UnitSystem,
) -> Result<f64> {
    let n = grid.n;
    let va = {
        let h_mat = hamiltonian_matrix_two(grid, pot, p1, p2, m, units)?;
        spectral_resolvent_values(&spectral_data(&h_mat)?, z)
    };
    let vb = {
        let h_mat = hamiltonian_matrix_two(grid, pot, p2, p1, m, units)?;
        spectral_resolvent_values(&spectral_data(&h_mat)?, z)
    };
    let mut max_dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dev = (va[i * n + j] - vb[j * n + i]).norm();
            max_dev = max_dev.max(dev);
        }
    }
    Ok(max_dev)
}

/// Contour density for a uniform free medium, order ≤ 2: the contour
/// integral collapses to the residue at the kinetic energy and the
/// momentum Gaussians integrate in closed form, leaving
///   ρ_s = Σ_P sign(P) κ(P) Π_a (ρ_a/κ_a)^{s_a} Π_j e^{−m_a τ Δ_j²/(2ħ²)},
/// with Δ_j the displacement between each particle and its image under
/// P. Dimension-independent: the (2πm_aτ)^{d/2} factors cancel against
/// a_a/(2πħ)^d. For order 2 the two particles sit a distance `r` apart.
pub fn density_from_contour(
    s: &MultiIndex,
    species: &[SpeciesSpec],
    tau: f64,
    r: f64,
    units: &UnitSystem,
) -> Result<f64> {
    if s.order() > 2 {
        return Err(Error::UnsupportedOrder(s.order()));
    }
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    if s.n_kinds() != species.len() {
        return Err(Error::GridMismatch(format!(
            "multi-index over {} kinds, {} species given",
            s.n_kinds(),
            species.len()
        )));
    }
    // Positions assigned in species order: 0, r, 2r, … (only 0 and r
    // occur at order ≤ 2).
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(species.len());
    let mut x = 0.0;
    for &count in s.counts() {
        let mut group = Vec::with_capacity(count);
        for _ in 0..count {
            group.push(x);
            x += r;
        }
        positions.push(group);
    }
    let perms = exchange::enumerate_permutations(s)?;
    let hbar2 = units.hbar * units.hbar;
    let mut sum = 0.0;
    for perm in &perms {
        let mut term = exchange::kappa_weight(perm, species) as f64;
        for (a, group_perm) in perm.groups().iter().enumerate() {
            let m_a = species[a].mass;
            for (j, &pj) in group_perm.iter().enumerate() {
                let delta = positions[a][j] - positions[a][pj];
                term *= (-m_a * tau * delta * delta / (2.0 * hbar2)).exp();
            }
        }
        sum += term;
    }
    let weight: f64 = species
        .iter()
        .zip(s.counts())
        .map(|(sp, &c)| (sp.density / sp.kappa()).powi(c as i32))
        .product();
    Ok(weight * sum)
}

/// Classical exponential ansatz ρ₁ = A e^{−U₁/θ} sampled on the grid.
#[derive(Debug, Clone)]
pub struct ClassicalAnsatz1 {
    pub grid: Grid1D,
    pub theta: f64,
    pub a: f64,
    pub u: Vec<f64>,
}

impl ClassicalAnsatz1 {
    pub fn rho(&self) -> Vec<f64> {
        self.u.iter().map(|&u| self.a * (-u / self.theta).exp()).collect()
    }
}

/// Classical two-particle ansatz ρ₂(x, y) = A e^{−U₂(x,y)/θ}, row-major
/// on the grid square.
#[derive(Debug, Clone)]
pub struct ClassicalAnsatz2 {
    pub grid: Grid1D,
    pub theta: f64,
    pub a: f64,
    pub u: Vec<f64>,
}

impl ClassicalAnsatz2 {
    /// Low-density closure U₂(x, y) = V(x) + V(y) + K(|x−y|) (periodic).
    pub fn pair_closure(
        grid: &Grid1D,
        theta: f64,
        a: f64,
        v_ext: &dyn Fn(f64) -> f64,
        pot: &PairPotential,
    ) -> Result<Self> {
        let pts = grid.points();
        let n = grid.n;
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = pot.value(wrap(pts[i] - pts[j], grid.length).abs())?;
                u[i * n + j] = v_ext(pts[i]) + v_ext(pts[j]) + k;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            theta,
            a,
            u,
        })
    }

    pub fn rho(&self) -> Vec<f64> {
        self.u.iter().map(|&u| self.a * (-u / self.theta).exp()).collect()
    }

    /// Exact marginal: ρ₁(x) = ∫ ρ₂(x, y) dy on the periodic cell, with
    /// U₁ = −θ log(ρ₁/a₁). This makes the s = 1 hierarchy equation an
    /// identity, so the residual measures only discretization error.
    pub fn marginal(&self, a1: f64) -> ClassicalAnsatz1 {
        let n = self.grid.n;
        let h = self.grid.h();
        let rho2 = self.rho();
        let u = (0..n)
            .map(|i| {
                let rho1: f64 = (0..n).map(|j| rho2[i * n + j]).sum::<f64>() * h;
                -self.theta * (rho1 / a1).ln()
            })
            .collect();
        ClassicalAnsatz1 {
            grid: self.grid.clone(),
            theta: self.theta,
            a: a1,
            u,
        }
    }
}

/// 4th-order central difference of a periodic sample vector.
fn periodic_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let p1 = f[(i + 1) % n];
            let m1 = f[(i + n - 1) % n];
            let p2 = f[(i + 2) % n];
            let m2 = f[(i + n - 2) % n];
            (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
        })
        .collect()
}

/// Max-norm residual of the s = (1_a) hierarchy equation
///   U₁′ ρ₁ = ρ₁ V′ + ∫ ρ₂(x, y) ∂ₓK(|x−y|) dy
/// on the grid, with the classical exponential ansatz supplying both
/// orders. The external force V′ is supplied analytically.
pub fn bbgky_residual_s1(
    one: &ClassicalAnsatz1,
    two: &ClassicalAnsatz2,
    v_ext_prime: &dyn Fn(f64) -> f64,
    pot: &PairPotential,
) -> Result<f64> {
    if one.grid.n != two.grid.n || (one.grid.length - two.grid.length).abs() > 1e-12 {
        return Err(Error::GridMismatch("ansatz grids differ".into()));
    }
    if (one.theta - two.theta).abs() > 1e-12 {
        return Err(Error::GridMismatch("ansatz temperatures differ".into()));
    }
    let n = one.grid.n;
    let h = one.grid.h();
    let pts = one.grid.points();
    let rho1 = one.rho();
    let rho2 = two.rho();
    let du = periodic_derivative(&one.u, h);
    let mut max_res = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        let mut force_int = 0.0;
        for j in 0..n {
            let d = wrap(pts[i] - pts[j], one.grid.length);
            let dk = if d == 0.0 {
                0.0
            } else {
                pot.derivative(d.abs())? * d.signum()
            };
            force_int += rho2[i * n + j] * dk;
        }
        force_int *= h;
        let lhs = du[i] * rho1[i];
        let rhs = rho1[i] * v_ext_prime(pts[i]) + force_int;
        max_res = max_res.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    Ok(if scale > 0.0 { max_res / scale.max(1.0) } else { max_res })
}
