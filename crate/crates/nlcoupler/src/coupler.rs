//! The coupler's ground-state energy `E_g(φ_x)` as an explicit Fourier series,
//! together with the exact single-mode diagonalization it is checked against.
//!
//! Energies are in units of `E_L̃c` throughout. The coupler Hamiltonian is
//! `4ζ² q²/2 + (φ − φ_x)²/2 + β cos φ` with the π-shifted bias convention, so
//! the junction term enters with a plus sign.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::kapteyn::{self, FourierSeries, Parity};
use crate::oscillator::{self, LanczosOptions, SolverMode};
use crate::projection::QubitParams;
use crate::{exec, Error, Result};

/// Default cutoff of the inner `μ` convolution.
pub const DEFAULT_MU_MAX: usize = 40;
/// Default Fock-basis size for single-loop diagonalizations.
pub const DEFAULT_N_BASIS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerParams {
    pub beta_c: f64,
    pub zeta_c: f64,
    /// `E_L̃c` in the caller's energy unit.
    pub e_ltc: f64,
    pub phi_cx: f64,
}

impl CouplerParams {
    pub fn new(beta_c: f64, zeta_c: f64, e_ltc: f64, phi_cx: f64) -> Result<Self> {
        let p = Self {
            beta_c,
            zeta_c,
            e_ltc,
            phi_cx,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta_c)?;
        if !(self.zeta_c > 0.0 && self.zeta_c.is_finite()) {
            return Err(Error::InvalidInput(format!("ζ_c = {} must be positive", self.zeta_c)));
        }
        if !(self.e_ltc > 0.0 && self.e_ltc.is_finite()) {
            return Err(Error::InvalidInput(format!("E_L̃c = {} must be positive", self.e_ltc)));
        }
        if !self.phi_cx.is_finite() {
            return Err(Error::InvalidInput("φ_cx is not finite".into()));
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::Domain(format!(
            "β_c = {beta} outside [0, 1): the coupler is no longer monostable"
        )));
    }
    Ok(())
}

fn check_basis(n_basis: usize) -> Result<()> {
    if n_basis < 30 {
        return Err(Error::InvalidInput(format!("n_basis = {n_basis} < 30")));
    }
    Ok(())
}

/// Classical minimum of the potential, `β cos_β(φ_x)`.
pub fn u_min(beta_c: f64, phi_x: f64, nu_max: usize) -> Result<f64> {
    check_beta(beta_c)?;
    Ok(beta_c * kapteyn::cos_beta(beta_c, phi_x, nu_max)?)
}

/// Harmonic zero-point energy `ζ √(1 − β cos φ*)` about the classical minimum.
pub fn u_zpe_harmonic(beta_c: f64, zeta_c: f64, phi_x: f64) -> Result<f64> {
    let phi = kapteyn::kepler_solve(beta_c, phi_x)?;
    Ok(zeta_c * (1.0 - beta_c * phi.cos()).sqrt())
}

/// `E_g = Σ_ν (B_ν^(0) + ζ B_ν^(1)) e^{iνφ_x}`, split into its classical and
/// zero-point parts.
#[derive(Debug, Clone, PartialEq)]
pub struct EgSeries {
    pub b_classical: FourierSeries,
    pub b_quantum: FourierSeries,
    pub beta_c: f64,
    pub zeta_c: f64,
    pub nu_max: usize,
    pub mu_max: usize,
    total: FourierSeries,
}

impl EgSeries {
    /// `B_ν = B_ν^(0) + ζ B_ν^(1)`.
    pub fn coeff(&self, nu: i64) -> f64 {
        self.total.coeff(nu)
    }

    pub fn total(&self) -> &FourierSeries {
        &self.total
    }

    /// `Σ_{ν≠0} |B_ν|`, which bounds every matrix element of the
    /// qubit-dependent part of the interaction. `B_0` is a uniform shift.
    pub fn footprint(&self) -> f64 {
        let n = self.nu_max as i64;
        (-n..=n).filter(|&nu| nu != 0).map(|nu| self.coeff(nu).abs()).sum()
    }
}

/// `(B_ν^(0), B_ν^(1))` for one `ν ≥ 1`, given `G_0..=G_{μmax}`.
fn b_parts(nu: usize, beta: f64, g: &[f64]) -> (f64, f64) {
    let mu_max = g.len() - 1;
    let v = nu as f64;
    let j = kapteyn::bessel_j_upto(nu + mu_max, beta * v);
    let signed = |k: i64| {
        let a = j[k.unsigned_abs() as usize];
        if k < 0 && k % 2 != 0 {
            -a
        } else {
            a
        }
    };
    let b0 = j[nu] / (v * v);
    // μ and −μ pair up through G_{−μ} = G_μ.
    let mut b1 = 0.0;
    for (mu, gm) in g.iter().enumerate().skip(1) {
        b1 += mu as f64 * gm * (signed(nu as i64 - mu as i64) - j[nu + mu]);
    }
    (b0, b1 / v)
}

fn b_zero(beta: f64, g: &[f64]) -> (f64, f64) {
    let g1 = g.get(1).copied().unwrap_or(0.0);
    (-0.25 * beta * beta, g[0] - beta * g1)
}

/// Fourier coefficients of `E_g`, with the inner `μ` sum cut at `mu_max`.
/// Accuracy needs `μ|G_μ(β)|` negligible past `mu_max`; see
/// [`kapteyn::g_cutoff`].
pub fn b_coeffs(beta_c: f64, zeta_c: f64, nu_max: usize, mu_max: usize) -> Result<EgSeries> {
    check_beta(beta_c)?;
    if nu_max == 0 {
        return Err(Error::InvalidInput("nu_max must be positive".into()));
    }
    let g = kapteyn::g_coeffs(mu_max, beta_c)?;
    let parts = exec::map_range(nu_max, |i| b_parts(i + 1, beta_c, &g));
    let (z0, z1) = b_zero(beta_c, &g);
    let c: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let q: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let t: Vec<f64> = parts.iter().map(|p| p.0 + zeta_c * p.1).collect();
    Ok(EgSeries {
        b_classical: FourierSeries::from_nonnegative(Parity::Even, z0, &c)?,
        b_quantum: FourierSeries::from_nonnegative(Parity::Even, z1, &q)?,
        total: FourierSeries::from_nonnegative(Parity::Even, z0 + zeta_c * z1, &t)?,
        beta_c,
        zeta_c,
        nu_max,
        mu_max,
    })
}

/// `E_g(φ_x)/E_L̃c` from the series.
pub fn eg_eval(series: &EgSeries, phi_x: f64) -> f64 {
    series.total.eval(phi_x)
}

/// Matrix of `4ζ²q²/2 + (φ − φ_x)²/2 + β cos φ` in the Fock basis of its
/// `β = 0` part, where `φ = φ_x + √ζ (a + a†)`. Qubit loops share this form.
pub fn loop_hamiltonian(beta: f64, zeta: f64, phi_x: f64, n_basis: usize) -> DMatrix<f64> {
    let f = oscillator::exp_factor_matrix(n_basis, zeta.sqrt());
    let rot = Complex64::from_polar(1.0, phi_x);
    let mut h = f.map(|z| beta * (rot * z).re);
    for n in 0..n_basis {
        h[(n, n)] += zeta * (2 * n + 1) as f64;
    }
    h
}

/// The flux operator `φ̂ = φ_x + √ζ (a + a†)` in the same basis.
pub fn loop_flux(zeta: f64, phi_x: f64, n_basis: usize) -> DMatrix<f64> {
    let mut x = oscillator::position_matrix(n_basis) * zeta.sqrt();
    for n in 0..n_basis {
        x[(n, n)] += phi_x;
    }
    x
}

/// Full eigendecomposition of a loop Hamiltonian, ascending.
pub(crate) fn loop_eigen(
    beta: f64,
    zeta: f64,
    phi_x: f64,
    n_basis: usize,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = loop_hamiltonian(beta, zeta, phi_x, n_basis);
    let opts = LanczosOptions {
        want_vectors: true,
        ..Default::default()
    };
    let s = oscillator::lowest_eigs(&h, n_basis, SolverMode::Dense, &opts)?;
    let v = s.eigenvectors.expect("requested eigenvectors");
    Ok((s.eigenvalues, v))
}

/// Lowest `n_levels` eigenvalues of the coupler Hamiltonian at bias `phi_x`.
pub fn eg_exact(params: &CouplerParams, phi_x: f64, n_basis: usize, n_levels: usize) -> Result<Vec<f64>> {
    params.validate()?;
    check_basis(n_basis)?;
    if n_levels == 0 || n_levels > n_basis {
        return Err(Error::InvalidInput(format!("n_levels = {n_levels} out of range")));
    }
    let h = loop_hamiltonian(params.beta_c, params.zeta_c, phi_x, n_basis);
    let s = oscillator::lowest_eigs(&h, n_levels, SolverMode::Dense, &LanczosOptions::default())?;
    Ok(s.eigenvalues)
}

/// `(E_g′, E_g″)` of the classical minimum plus harmonic zero-point energy.
/// Diverges as `β cos φ* → 1`; the result is returned unclipped and may be
/// non-finite.
pub fn eg_derivs_analytic(beta_c: f64, zeta_c: f64, phi_cx: f64) -> Result<(f64, f64)> {
    let phi = kapteyn::kepler_solve(beta_c, phi_cx)?;
    let (s, c) = phi.sin_cos();
    let d = 1.0 - beta_c * c;
    let d1 = -beta_c * s * (1.0 - zeta_c / (2.0 * d.powf(1.5)));
    let d2 = -beta_c * c / d
        + zeta_c * beta_c * (c - beta_c - 0.5 * beta_c * s * s) / (2.0 * d.powf(3.5));
    Ok((d1, d2))
}

/// Ground state of a loop plus `|⟨m|φ̂|g⟩|²` and `E_m − E_g` for every `m > 0`.
struct GroundCouplings {
    mean_phi: f64,
    weights: Vec<(f64, f64)>,
}

fn ground_couplings(params: &CouplerParams, phi_x: f64, n_basis: usize) -> Result<GroundCouplings> {
    params.validate()?;
    check_basis(n_basis)?;
    let (e, v) = loop_eigen(params.beta_c, params.zeta_c, phi_x, n_basis)?;
    let gap = e[1] - e[0];
    if gap < 1e-10 {
        return Err(Error::Conditioning(format!(
            "coupler ground state is near-degenerate (gap {gap:.3e})"
        )));
    }
    let phi = loop_flux(params.zeta_c, phi_x, n_basis);
    let g = v.column(0);
    let pg: DVector<f64> = &phi * g;
    let mean_phi = g.dot(&pg);
    let overlaps = v.transpose() * pg;
    let weights = (1..n_basis)
        .map(|m| (overlaps[m] * overlaps[m], e[m] - e[0]))
        .collect();
    Ok(GroundCouplings { mean_phi, weights })
}

/// `(E_g′, E_g″)` by perturbation theory on the exact eigendecomposition:
/// `E′ = ⟨φ_x − φ̂⟩` and `E″ = 1 − 2 Σ_{m>0} |⟨m|φ̂|g⟩|² / (E_m − E_g)`.
pub fn eg_derivs_numeric(params: &CouplerParams, phi_cx: f64, n_basis: usize) -> Result<(f64, f64)> {
    let gc = ground_couplings(params, phi_cx, n_basis)?;
    let d1 = phi_cx - gc.mean_phi;
    let d2 = 1.0 - 2.0 * gc.weights.iter().map(|(w, de)| w / de).sum::<f64>();
    Ok((d1, d2))
}

/// Size of the Born-Oppenheimer diagonal correction and the two sides of the
/// criterion for neglecting it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodcMetrics {
    /// `⟨∂ψ_g|∂ψ_g⟩` with respect to `φ_x`, from the eigendecomposition.
    pub exact_norm: f64,
    /// `1/(4ζ(1 − β cos φ*)^{3/2})`.
    pub linearized_norm: f64,
    /// `2 Σ_j E_Lj ζ_j² α_j² / E_L̃c`.
    pub smallness_lhs: f64,
    /// `4ζ_c²(1 − β_c)²`.
    pub smallness_rhs: f64,
}

pub fn bodc_metrics(
    params: &CouplerParams,
    phi_x: f64,
    n_basis: usize,
    qubits: &[QubitParams],
) -> Result<BodcMetrics> {
    let gc = ground_couplings(params, phi_x, n_basis)?;
    let exact_norm = gc.weights.iter().map(|(w, de)| w / (de * de)).sum();
    let phi = kapteyn::kepler_solve(params.beta_c, phi_x)?;
    let d = 1.0 - params.beta_c * phi.cos();
    let linearized_norm = 1.0 / (4.0 * params.zeta_c * d.powf(1.5));
    let smallness_lhs = 2.0
        * qubits
            .iter()
            .map(|q| q.e_lj * q.zeta_j * q.zeta_j * q.alpha_j * q.alpha_j)
            .sum::<f64>()
        / params.e_ltc;
    let smallness_rhs = 4.0 * params.zeta_c.powi(2) * (1.0 - params.beta_c).powi(2);
    Ok(BodcMetrics {
        exact_norm,
        linearized_norm,
        smallness_lhs,
        smallness_rhs,
    })
}

/// Exact value of `2 Σ_{ν>0} B_ν^(0)` and of `2 Σ_{ν>0} B_ν^(1)`.
fn tail_totals(beta: f64, g: &[f64]) -> (f64, f64) {
    let g1 = g.get(1).copied().unwrap_or(0.0);
    (beta + 0.25 * beta * beta, (1.0 - beta).sqrt() - g[0] + beta * g1)
}

/// Partial tails `|2Σ_{ν>N} B_ν^(0)|` and `|2Σ_{ν>N} B_ν^(1)|`, each from its
/// closed-form total.
pub fn truncation_bound_parts(beta_c: f64, nu_max: usize) -> Result<(f64, f64)> {
    check_beta(beta_c)?;
    let g = kapteyn::g_coeffs(kapteyn::g_cutoff(beta_c)?, beta_c)?;
    let (t0, t1) = tail_totals(beta_c, &g);
    let parts = exec::map_range(nu_max, |i| b_parts(i + 1, beta_c, &g));
    let s0: f64 = parts.iter().map(|p| p.0).sum();
    let s1: f64 = parts.iter().map(|p| p.1).sum();
    Ok(((t0 - 2.0 * s0).abs(), (t1 - 2.0 * s1).abs()))
}

/// Truncation error of the `E_g` series at `nu_max`: the magnitude of the
/// omitted tail `2Σ_{ν>N} B_ν`, obtained from the closed-form total of all
/// non-zero harmonics. The classical and zero-point tails have opposite
/// signs, so this is tighter than the sum of [`truncation_bound_parts`].
pub fn truncation_bound(beta_c: f64, zeta_c: f64, nu_max: usize) -> Result<f64> {
    check_beta(beta_c)?;
    let g = kapteyn::g_coeffs(kapteyn::g_cutoff(beta_c)?, beta_c)?;
    let (t0, t1) = tail_totals(beta_c, &g);
    let parts = exec::map_range(nu_max, |i| b_parts(i + 1, beta_c, &g));
    let s: f64 = parts.iter().map(|p| p.0 + zeta_c * p.1).sum();
    Ok((t0 + zeta_c * t1 - 2.0 * s).abs())
}

const MAX_NU_SEARCH: usize = 100_000;

/// Smallest `nu_max` whose [`truncation_bound`] is at most `epsilon`.
pub fn min_nu_for_error(beta_c: f64, zeta_c: f64, epsilon: f64) -> Result<usize> {
    check_beta(beta_c)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("ε = {epsilon} must be positive")));
    }
    let g = kapteyn::g_coeffs(kapteyn::g_cutoff(beta_c)?, beta_c)?;
    let (t0, t1) = tail_totals(beta_c, &g);
    let total = t0 + zeta_c * t1;
    let mut partial = 0.0;
    let batch = 64;
    let mut start = 1;
    while start <= MAX_NU_SEARCH {
        let parts = exec::map_range(batch, |i| b_parts(start + i, beta_c, &g));
        for (i, p) in parts.iter().enumerate() {
            partial += p.0 + zeta_c * p.1;
            if (total - 2.0 * partial).abs() <= epsilon {
                return Ok(start + i);
            }
        }
        start += batch;
    }
    Err(Error::Resource(format!(
        "truncation error {epsilon:e} not reached below ν = {MAX_NU_SEARCH}"
    )))
}

/// `β(1 + β/4) − ζ(√(1−β) − G_0 + βG_1)`, which equals
/// `Σ_{ν≠0} (|B_ν^(0)| + ζ|B_ν^(1)|)` and so bounds [`EgSeries::footprint`].
pub fn footprint_bound(beta_c: f64, zeta_c: f64) -> Result<f64> {
    check_beta(beta_c)?;
    let g0 = kapteyn::g_coeff(0, beta_c)?;
    let g1 = kapteyn::g_coeff(1, beta_c)?;
    Ok(beta_c * (1.0 + 0.25 * beta_c) - zeta_c * ((1.0 - beta_c).sqrt() - g0 + beta_c * g1))
}
