//! Projection of the coupler-mediated interaction onto the qubits' two-level
//! subspaces, in the Pauli basis of the qubit energy eigenstates
//! (`σ_z = |0⟩⟨0| − |1⟩⟨1|`).

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::coupler::{loop_eigen, loop_flux, EgSeries};
use crate::{exec, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    /// May exceed 1 (double-well regime).
    pub beta_j: f64,
    pub zeta_j: f64,
    /// `E_Lj` in the global energy unit.
    pub e_lj: f64,
    pub phi_jx: f64,
    /// `M_j / L_j`.
    pub alpha_j: f64,
}

impl QubitParams {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.zeta_j) || !ok(self.e_lj) {
            return Err(Error::InvalidInput("ζ_j and E_Lj must be positive".into()));
        }
        if !(self.beta_j >= 0.0 && self.beta_j.is_finite())
            || !self.phi_jx.is_finite()
            || !self.alpha_j.is_finite()
        {
            return Err(Error::InvalidInput("qubit parameters must be finite, β_j ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SubspaceWarning {
    /// `E_2 − E_1 < 3 (E_1 − E_0)`.
    WeakIsolation { ratio: f64 },
    /// `E_20` of `qubit` within `detuning` (relative) of `E_10` summed over
    /// `partners`.
    Resonance {
        qubit: usize,
        partners: (usize, usize),
        detuning: f64,
    },
}

/// The two lowest eigenstates of one qubit loop.
#[derive(Debug, Clone)]
pub struct QubitSubspace {
    pub params: QubitParams,
    /// `E_0, E_1, E_2` in the global unit.
    pub energies: [f64; 3],
    /// Columns `|0⟩`, `|1⟩` in the loop's Fock basis.
    pub vectors: DMatrix<f64>,
    /// `⟨0|φ̂|1⟩ ≥ 0`.
    pub phi_p: f64,
    /// Half the second moment of the reference density `ψ_r²`.
    pub zeta_eff: f64,
    /// `φ̂` in the Fock basis.
    pub flux: DMatrix<f64>,
    pub warnings: Vec<SubspaceWarning>,
    /// Eigenvalues of the truncated `φ̂`.
    flux_values: DVector<f64>,
    /// `Vᵀ|a⟩` for `a = 0, 1`, with `V` the eigenvectors of `φ̂`.
    flux_overlaps: DMatrix<f64>,
}

impl QubitSubspace {
    pub fn n_basis(&self) -> usize {
        self.flux.nrows()
    }

    pub fn splitting(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// `(c_I, c_z)` of the bare qubit Hamiltonian restricted to the subspace.
    pub fn local_terms(&self) -> (f64, f64) {
        let [e0, e1, _] = self.energies;
        (0.5 * (e0 + e1), 0.5 * (e0 - e1))
    }

    /// `e^{−isφ̂}` on the full truncated space, as `V diag(e^{−isλ}) Vᵀ`.
    pub fn exp_flux(&self, s: f64) -> DMatrix<Complex64> {
        let eig = SymmetricEigen::new(self.flux.clone());
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -s * l)));
        &v * d * v.transpose()
    }

    /// The bare qubit Hamiltonian on the full truncated space, global unit.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let p = &self.params;
        crate::coupler::loop_hamiltonian(p.beta_j, p.zeta_j, p.phi_jx, self.n_basis()) * p.e_lj
    }

    /// Position-space wave functions `ψ_0, ψ_1` at `φ`.
    pub fn wavefunctions(&self, phi: f64) -> [f64; 2] {
        let p = &self.params;
        let n = self.n_basis();
        let two_zeta = 2.0 * p.zeta_j;
        let x = (phi - p.phi_jx) / two_zeta.sqrt();
        let scale = two_zeta.powf(-0.25);
        let mut out = [0.0; 2];
        let mut hm = 0.0;
        let mut h = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        for k in 0..n {
            out[0] += self.vectors[(k, 0)] * h;
            out[1] += self.vectors[(k, 1)] * h;
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * h - (kf / (kf + 1.0)).sqrt() * hm;
            hm = h;
            h = next;
        }
        [out[0] * scale, out[1] * scale]
    }
}

/// Diagonalizes the qubit loop and fixes `|0⟩` (largest component positive)
/// and `|1⟩` (so that `φ_p ≥ 0`).
pub fn qubit_subspace(params: &QubitParams, n_basis: usize) -> Result<QubitSubspace> {
    params.validate()?;
    if n_basis < 40 {
        return Err(Error::InvalidInput(format!("n_basis = {n_basis} < 40")));
    }
    let (e, v) = loop_eigen(params.beta_j, params.zeta_j, params.phi_jx, n_basis)?;
    let mut vectors = v.columns(0, 2).into_owned();
    let flux = loop_flux(params.zeta_j, params.phi_jx, n_basis);
    let fv1 = &flux * vectors.column(1);
    let mut phi_p = vectors.column(0).dot(&fv1);
    if phi_p < 0.0 {
        vectors.column_mut(1).neg_mut();
        phi_p = -phi_p;
    }

    // 2ζ_eff = ∫ ψ_r(u)² u² du with ψ_r(u) = (ψ_0 + ψ_1)(u + φ_p)/√2 and u
    // measured from the loop's bias.
    let mut shifted = flux.clone();
    for i in 0..n_basis {
        shifted[(i, i)] -= params.phi_jx + phi_p;
    }
    let sq = &shifted * &shifted;
    let r = (vectors.column(0) + vectors.column(1)) / 2f64.sqrt();
    let zeta_eff = 0.5 * r.dot(&(&sq * &r));

    let eig = SymmetricEigen::new(flux.clone());
    let flux_overlaps = eig.eigenvectors.transpose() * &vectors;

    let energies = [e[0] * params.e_lj, e[1] * params.e_lj, e[2] * params.e_lj];
    let mut warnings = Vec::new();
    let ratio = (energies[2] - energies[1]) / (energies[1] - energies[0]);
    if ratio < 3.0 {
        warnings.push(SubspaceWarning::WeakIsolation { ratio });
    }
    Ok(QubitSubspace {
        params: *params,
        energies,
        vectors,
        phi_p,
        zeta_eff,
        flux,
        warnings,
        flux_values: eig.eigenvalues,
        flux_overlaps,
    })
}

/// Resonances `E_20^(i) ≈ E_10^(j) + E_10^(k)` within a relative `window`.
pub fn resonance_warnings(subs: &[QubitSubspace], window: f64) -> Vec<SubspaceWarning> {
    let mut out = Vec::new();
    for (i, s) in subs.iter().enumerate() {
        let e20 = s.energies[2] - s.energies[0];
        for j in 0..subs.len() {
            for k in j + 1..subs.len() {
                if j == i || k == i {
                    continue;
                }
                let sum = subs[j].splitting() + subs[k].splitting();
                let detuning = (e20 - sum).abs() / e20.abs().max(sum.abs());
                if detuning < window {
                    out.push(SubspaceWarning::Resonance {
                        qubit: i,
                        partners: (j, k),
                        detuning,
                    });
                }
            }
        }
    }
    out
}

/// `(c_I, c_x, c_y, c_z)` of `e^{−isφ̂}` restricted to the qubit subspace.
pub fn pauli_exp_coeffs(sub: &QubitSubspace, s: f64) -> [Complex64; 4] {
    let w = &sub.flux_overlaps;
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, &l) in sub.flux_values.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -s * l);
        for (a, row) in m.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v += ph * (w[(i, a)] * w[(i, b)]);
            }
        }
    }
    pauli_from_matrix(m)
}

fn pauli_from_matrix(m: [[Complex64; 2]; 2]) -> [Complex64; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        0.5 * (m[0][0] + m[1][1]),
        0.5 * (m[0][1] + m[1][0]),
        0.5 * i * (m[0][1] - m[1][0]),
        0.5 * (m[0][0] - m[1][1]),
    ]
}

/// Real 2×2 projection `⟨a|op|b⟩` in Pauli form.
fn pauli_from_operator(sub: &QubitSubspace, op: &DMatrix<f64>) -> [f64; 4] {
    let m = sub.vectors.transpose() * op * &sub.vectors;
    let c = |x: f64| Complex64::new(x, 0.0);
    let p = pauli_from_matrix([[c(m[(0, 0)]), c(m[(0, 1)])], [c(m[(1, 0)]), c(m[(1, 1)])]]);
    // The y part of a real symmetric matrix vanishes identically.
    [p[0].re, p[1].re, p[2].re, p[3].re]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> DMatrix<Complex64> {
        let (o, l, i) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        );
        let v = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &v)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "x",
            Pauli::Y => "y",
            Pauli::Z => "z",
        })
    }
}

/// One Pauli per qubit, qubit 0 first.
pub type Label = Vec<Pauli>;

pub fn parse_label(s: &str) -> Result<Label> {
    s.chars()
        .map(|c| match c {
            'I' | 'i' => Ok(Pauli::I),
            'x' | 'X' => Ok(Pauli::X),
            'y' | 'Y' => Ok(Pauli::Y),
            'z' | 'Z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidInput(format!("bad Pauli label {s:?}"))),
        })
        .collect()
}

pub fn label_string(label: &[Pauli]) -> String {
    label.iter().map(|p| p.to_string()).collect()
}

/// All `4^k` labels in lexicographic `I < x < y < z` order.
pub fn all_labels(k: usize) -> Vec<Label> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|l: Label| {
                Pauli::ALL.iter().map(move |&p| {
                    let mut l = l.clone();
                    l.push(p);
                    l
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelSet {
    All,
    Explicit(Vec<Label>),
}

impl LabelSet {
    fn resolve(&self, k: usize) -> Result<Vec<Label>> {
        match self {
            LabelSet::All => Ok(all_labels(k)),
            LabelSet::Explicit(v) => {
                if v.iter().any(|l| l.len() != k) {
                    return Err(Error::InvalidInput(format!("labels must have length {k}")));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theory {
    /// Nonlinear Fourier-series theory.
    Na,
    /// Linear theory with closed-form derivatives.
    La,
    /// Linear theory with perturbative derivatives of the exact coupler.
    Ln,
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Na => "NA",
            Theory::La => "LA",
            Theory::Ln => "LN",
        })
    }
}

/// Coefficients `g_η̄` of `Σ g_η̄ σ_η̄`, global energy unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    pub theory: Theory,
    pub phi_cx: f64,
    pub nu_max: Option<usize>,
    pub entries: Vec<(Label, f64)>,
}

impl CouplingTable {
    pub fn n_qubits(&self) -> usize {
        self.entries.first().map_or(0, |e| e.0.len())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        let l = parse_label(label).ok()?;
        self.entries.iter().find(|e| e.0 == l).map(|e| e.1)
    }

    /// `Σ g_η̄ σ_η̄` as a `2^k` matrix, qubit 0 most significant.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let k = self.n_qubits();
        let dim = 1 << k;
        let mut out = DMatrix::zeros(dim, dim);
        for (label, g) in &self.entries {
            let mut m = DMatrix::from_element(1, 1, Complex64::new(*g, 0.0));
            for p in label {
                m = m.kronecker(&p.matrix());
            }
            out += m;
        }
        out
    }
}

fn check_inputs(subs: &[QubitSubspace], alphas: &[f64]) -> Result<()> {
    if subs.is_empty() || subs.len() != alphas.len() {
        return Err(Error::InvalidInput(
            "need one coupling ratio per qubit and at least one qubit".into(),
        ));
    }
    Ok(())
}

/// Nonlinear couplings `g_η̄ = E_L̃c Σ_ν B_ν e^{iνφ_cx} Π_j c_{η_j}(να_j)`.
pub fn couplings(
    series: &EgSeries,
    subs: &[QubitSubspace],
    alphas: &[f64],
    phi_cx: f64,
    labels: &LabelSet,
    e_ltc: f64,
) -> Result<CouplingTable> {
    check_inputs(subs, alphas)?;
    let labels = labels.resolve(subs.len())?;
    let n = series.nu_max as i64;
    // c[ν][j] for ν = −N..=N.
    let c: Vec<Vec<[Complex64; 4]>> = exec::map_range(2 * n as usize + 1, |i| {
        let nu = i as f64 - n as f64;
        subs.iter()
            .zip(alphas)
            .map(|(s, &a)| pauli_exp_coeffs(s, nu * a))
            .collect()
    });
    let weights: Vec<Complex64> = (-n..=n)
        .map(|nu| series.coeff(nu) * Complex64::from_polar(1.0, nu as f64 * phi_cx))
        .collect();
    let values = exec::map(&labels, |label| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, cn) in weights.iter().zip(&c) {
            let mut p = *w;
            for (j, eta) in label.iter().enumerate() {
                p *= cn[j][eta.index()];
            }
            acc += p;
        }
        acc * e_ltc
    });
    let tol = 1e-10 * e_ltc.max(1.0);
    let mut entries = Vec::with_capacity(labels.len());
    for (label, v) in labels.into_iter().zip(values) {
        if v.im.abs() > tol {
            return Err(Error::Consistency(format!(
                "coupling {} has imaginary part {:e}",
                label_string(&label),
                v.im
            )));
        }
        entries.push((label, v.re));
    }
    Ok(CouplingTable {
        theory: Theory::Na,
        phi_cx,
        nu_max: Some(series.nu_max),
        entries,
    })
}

/// Couplings of the quadratic expansion
/// `E_g(φ_cx − S) ≈ E_g − E_g′ S + ½ E_g″ S²` with `S = Σ_j α_j φ̂_j`.
/// The constant `E_g(φ_cx)` is left out.
pub fn linear_couplings(
    derivs: (f64, f64),
    subs: &[QubitSubspace],
    alphas: &[f64],
    phi_cx: f64,
    theory: Theory,
    labels: &LabelSet,
    e_ltc: f64,
) -> Result<CouplingTable> {
    check_inputs(subs, alphas)?;
    let labels = labels.resolve(subs.len())?;
    let (d1, d2) = derivs;
    let phi: Vec<[f64; 4]> = subs.iter().map(|s| pauli_from_operator(s, &s.flux)).collect();
    let phi2: Vec<[f64; 4]> = subs
        .iter()
        .map(|s| pauli_from_operator(s, &(&s.flux * &s.flux)))
        .collect();
    let entries = labels
        .into_iter()
        .map(|label| {
            let active: Vec<usize> = (0..label.len()).filter(|&j| label[j] != Pauli::I).collect();
            let id = |j: usize| if label[j] == Pauli::I { 1.0 } else { 0.0 };
            let ident_except = |skip: &[usize]| {
                (0..label.len())
                    .filter(|j| !skip.contains(j))
                    .map(id)
                    .product::<f64>()
            };
            let mut g = 0.0;
            if active.len() <= 1 {
                for j in 0..label.len() {
                    let rest = ident_except(&[j]);
                    if rest == 0.0 {
                        continue;
                    }
                    let e = label[j].index();
                    let a = alphas[j];
                    g += -d1 * a * phi[j][e] + 0.5 * d2 * a * a * phi2[j][e];
                }
            }
            if active.len() <= 2 {
                for j in 0..label.len() {
                    for k in j + 1..label.len() {
                        let rest = ident_except(&[j, k]);
                        if rest == 0.0 {
                            continue;
                        }
                        g += d2 * alphas[j] * alphas[k] * phi[j][label[j].index()] * phi[k][label[k].index()];
                    }
                }
            }
            (label, g * e_ltc)
        })
        .collect();
    Ok(CouplingTable {
        theory,
        phi_cx,
        nu_max: None,
        entries,
    })
}

/// Gaussian-reference approximation
/// `g_xx ≈ −E_L̃c Σ_ν B_ν cos(νφ_cx) sin²(ναφ_p) e^{−α²ν²ζ_eff}`.
pub fn gxx_gaussian(series: &EgSeries, phi_p: f64, zeta_eff: f64, alpha: f64, phi_cx: f64, e_ltc: f64) -> f64 {
    let n = series.nu_max as i64;
    let sum: f64 = (-n..=n)
        .filter(|&nu| nu != 0)
        .map(|nu| {
            let v = nu as f64;
            series.coeff(nu)
                * (v * phi_cx).cos()
                * (v * alpha * phi_p).sin().powi(2)
                * (-(alpha * v).powi(2) * zeta_eff).exp()
        })
        .sum();
    -e_ltc * sum
}

const QUAD_POINTS: usize = 512;

/// `g_xx` for two identical unbiased qubits as a double integral of `E_g`
/// against the reference densities `R(u) = ψ_r(u)²`:
///
/// `g_xx = ¼ ∫∫ R(u)R(v) Σ_± ± E_g(φ_cx ± α(u+φ_p) ± α(v+φ_p))`
///
/// where the outer sign is the product of the inner ones. `eg` returns
/// `E_g/E_L̃c`. The grid spans `±8√(2ζ_eff)` and is doubled once as a
/// convergence check.
pub fn gxx_quadrature<F>(eg: F, sub: &QubitSubspace, alpha: f64, phi_cx: f64, e_ltc: f64) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if sub.params.phi_jx != 0.0 {
        return Err(Error::InvalidInput("quadrature form needs unbiased qubits".into()));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let half_width = 8.0 * (2.0 * sub.zeta_eff).sqrt();
    let coarse = quad_on_grid(&eg, sub, alpha, phi_cx, half_width, QUAD_POINTS);
    let fine = quad_on_grid(&eg, sub, alpha, phi_cx, half_width, 2 * QUAD_POINTS);
    let change = (fine - coarse).abs();
    if change > 1e-8 * fine.abs() {
        return Err(Error::NoConvergence {
            what: "g_xx quadrature grid",
            iterations: 2,
            residual: change,
        });
    }
    Ok(fine * e_ltc)
}

fn quad_on_grid<F>(eg: &F, sub: &QubitSubspace, alpha: f64, phi_cx: f64, half_width: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let p = sub.phi_p;
    let h = 2.0 * half_width / (n - 1) as f64;
    let u = |i: usize| -half_width + i as f64 * h;
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let [a, b] = sub.wavefunctions(u(i) + p);
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            w * h * 0.5 * (a + b).powi(2)
        })
        .collect();
    // On a shared uniform grid the arguments only depend on i + k and i − k.
    let sums = exec::map_range(2 * n - 1, |s| {
        let t = alpha * (-2.0 * half_width + s as f64 * h + 2.0 * p);
        eg(phi_cx - t) + eg(phi_cx + t)
    });
    let diffs = exec::map_range(2 * n - 1, |d| {
        let t = alpha * (d as f64 - (n - 1) as f64) * h;
        eg(phi_cx - t) + eg(phi_cx + t)
    });
    let rows = exec::map_range(n, |i| {
        (0..n)
            .map(|k| rho[k] * (sums[i + k] - diffs[i + n - 1 - k]))
            .sum::<f64>()
            * rho[i]
    });
    0.25 * rows.iter().sum::<f64>()
}

/// Bound on the error of the linear theory's `g_xx`:
/// `E_L̃c β_c (α/(1−β_c))⁴ φ_p² (2ζ_eff + φ_p²/3)`.
pub fn linear_error_bound(beta_c: f64, zeta_eff: f64, phi_p: f64, alpha: f64, e_ltc: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta_c) {
        return Err(Error::Domain(format!("β_c = {beta_c} outside [0, 1)")));
    }
    Ok(e_ltc * beta_c * (alpha / (1.0 - beta_c)).powi(4) * phi_p * phi_p * (2.0 * zeta_eff + phi_p * phi_p / 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupler::{b_coeffs, eg_derivs_analytic, eg_eval};
    use std::f64::consts::TAU;

    fn qubit(beta: f64, alpha: f64) -> QubitParams {
        QubitParams {
            beta_j: beta,
            zeta_j: 0.05,
            e_lj: 1.0,
            phi_jx: 0.0,
            alpha_j: alpha,
        }
    }

    #[test]
    fn harmonic_qubit() {
        let s = qubit_subspace(&qubit(0.0, 0.05), 40).unwrap();
        assert!((s.splitting() - 0.1).abs() < 1e-12);
        assert!((s.phi_p - 0.05f64.sqrt()).abs() < 1e-12);
        // ψ_r² has second moment ζ for the harmonic ladder.
        assert!((s.zeta_eff - 0.025).abs() < 1e-12);
    }

    #[test]
    fn unbiased_parity() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        for a in 0..2 {
            let m = s.vectors.column(a).dot(&(&s.flux * s.vectors.column(a)));
            assert!(m.abs() < 1e-10);
        }
        assert!(s.phi_p > 0.0);
    }

    #[test]
    fn weak_isolation_is_flagged() {
        let s = qubit_subspace(&qubit(0.0, 0.05), 40).unwrap();
        assert!(matches!(s.warnings[0], SubspaceWarning::WeakIsolation { .. }));
        let s = qubit_subspace(&qubit(1.4, 0.05), 40).unwrap();
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn resonances_are_detected() {
        let h = qubit_subspace(&qubit(0.0, 0.05), 40).unwrap();
        let w = resonance_warnings(&[h.clone(), h.clone(), h], 0.02);
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn pauli_coefficients_at_zero() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let c = pauli_exp_coeffs(&s, 0.0);
        assert!((c[0] - 1.0).norm() < 1e-13);
        assert!(c[1].norm() < 1e-13 && c[2].norm() < 1e-13 && c[3].norm() < 1e-13);
    }

    #[test]
    fn pauli_parity_rules() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        for x in [0.03, 0.4, 2.0, 7.5] {
            let c = pauli_exp_coeffs(&s, x);
            assert!(c[2].norm() < 1e-12);
            assert!(c[0].im.abs() < 1e-12 && c[3].im.abs() < 1e-12);
            assert!(c[1].re.abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_coefficients_match_grid_quadrature() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let x = 0.05;
        let (lo, hi, n) = (-3.0, 3.0, 6001);
        let h = (hi - lo) / (n - 1) as f64;
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..n {
            let phi = lo + i as f64 * h;
            let w = s.wavefunctions(phi);
            let e = Complex64::from_polar(h, -x * phi);
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += e * (w[a] * w[b]);
                }
            }
        }
        let want = pauli_from_matrix(m);
        let got = pauli_exp_coeffs(&s, x);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn labels_round_trip() {
        let l = parse_label("xIz").unwrap();
        assert_eq!(l, vec![Pauli::X, Pauli::I, Pauli::Z]);
        assert_eq!(label_string(&l), "xIz");
        assert_eq!(all_labels(3).len(), 64);
        assert!(parse_label("xq").is_err());
    }

    #[test]
    fn zero_coupling_gives_the_bare_energy() {
        let series = b_coeffs(0.5, 0.05, 100, 40).unwrap();
        let s = qubit_subspace(&qubit(1.05, 0.0), 40).unwrap();
        let t = couplings(&series, &[s.clone(), s], &[0.0, 0.0], 0.3, &LabelSet::All, 3.0).unwrap();
        for (label, g) in &t.entries {
            if label.iter().all(|p| *p == Pauli::I) {
                assert!((g - 3.0 * eg_eval(&series, 0.3)).abs() < 1e-12);
            } else {
                assert!(g.abs() < 1e-14);
            }
        }
    }

    fn three_qubit_table(phi_cx: f64) -> CouplingTable {
        let series = b_coeffs(0.5, 0.05, 100, 40).unwrap();
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let subs = vec![s.clone(), s.clone(), s];
        couplings(&series, &subs, &[0.05; 3], phi_cx, &LabelSet::All, 1.0).unwrap()
    }

    #[test]
    fn permutation_symmetry_and_y_parity() {
        let t = three_qubit_table(0.2);
        let find = |l: &Label| t.entries.iter().find(|e| &e.0 == l).unwrap().1;
        for (label, g) in &t.entries {
            let ys = label.iter().filter(|p| **p == Pauli::Y).count();
            if ys % 2 == 1 {
                assert!(g.abs() < 1e-10);
            }
            let mut rot = label.clone();
            rot.rotate_left(1);
            let mut swap = label.clone();
            swap.swap(0, 1);
            assert!((find(&rot) - g).abs() < 1e-12);
            assert!((find(&swap) - g).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_table_vanishes_without_derivatives() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let t = linear_couplings((0.0, 0.0), &[s.clone(), s], &[0.05; 2], 0.0, Theory::La, &LabelSet::All, 1.0)
            .unwrap();
        assert!(t.entries.iter().all(|e| e.1 == 0.0));
    }

    #[test]
    fn linear_xx_factorizes() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let d = eg_derivs_analytic(0.75, 0.05, 0.3 * TAU).unwrap();
        let subs = [s.clone(), s.clone()];
        let t = linear_couplings(d, &subs, &[0.05; 2], 0.3 * TAU, Theory::La, &LabelSet::All, 1.0).unwrap();
        let v0 = s.vectors.column(0);
        let v1 = s.vectors.column(1);
        let me = v0.dot(&(&s.flux * v1));
        let want = d.1 * 0.05 * 0.05 * me * me;
        assert!((t.get("xx").unwrap() - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn reconstruction_matches_projected_hamiltonian() {
        // The Pauli expansion must reproduce the projected interaction matrix.
        let series = b_coeffs(0.75, 0.05, 60, 40).unwrap();
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let subs = [s.clone(), s.clone()];
        let phi_cx = 0.17;
        let t = couplings(&series, &subs, &[0.05; 2], phi_cx, &LabelSet::All, 1.0).unwrap();
        let m = t.to_matrix();
        let v = s.vectors.map(|x| Complex64::new(x, 0.0));
        let p = v.kronecker(&v);
        let n = series.nu_max as i64;
        let mut h = DMatrix::<Complex64>::zeros(4, 4);
        for nu in -n..=n {
            let a = s.exp_flux(nu as f64 * 0.05);
            let full = a.kronecker(&a) * Complex64::from_polar(series.coeff(nu), nu as f64 * phi_cx);
            h += p.transpose() * full * &p;
        }
        assert!((m - h).norm() < 1e-10);
    }

    #[test]
    fn gaussian_edge_cases() {
        let series = b_coeffs(0.75, 0.05, 100, 40).unwrap();
        assert_eq!(gxx_gaussian(&series, 0.3, 0.02, 0.0, 0.2, 1.0), 0.0);
        assert_eq!(gxx_gaussian(&series, 0.0, 0.02, 0.05, 0.2, 1.0), 0.0);
    }

    #[test]
    fn quadrature_is_exact_on_quadratics() {
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let c = 0.7;
        let g = gxx_quadrature(|x| 0.5 * c * x * x, &s, 0.05, 0.2, 1.0).unwrap();
        let want = 0.25 * (2.0 * 0.05 * s.phi_p).powi(2) * c;
        assert!((g - want).abs() < 1e-12 * want);
        assert_eq!(gxx_quadrature(|x| x.cos(), &s, 0.0, 0.2, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_matches_pauli_route() {
        let series = b_coeffs(0.75, 0.05, 100, 40).unwrap();
        let s = qubit_subspace(&qubit(1.05, 0.05), 40).unwrap();
        let phi_cx = 0.1 * TAU;
        let labels = LabelSet::Explicit(vec![parse_label("xx").unwrap()]);
        let t = couplings(&series, &[s.clone(), s.clone()], &[0.05; 2], phi_cx, &labels, 1.0).unwrap();
        let q = gxx_quadrature(|x| eg_eval(&series, x), &s, 0.05, phi_cx, 1.0).unwrap();
        let g = t.get("xx").unwrap();
        assert!((q / g - 1.0).abs() < 1e-6, "{q} vs {g}");
        let gg = gxx_gaussian(&series, s.phi_p, s.zeta_eff, 0.05, phi_cx, 1.0);
        assert!((gg / g - 1.0).abs() < 0.1);
    }

    #[test]
    fn error_bound_edge_cases() {
        assert_eq!(linear_error_bound(0.75, 0.02, 0.3, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(linear_error_bound(0.0, 0.02, 0.3, 0.05, 1.0).unwrap(), 0.0);
        assert!(linear_error_bound(1.0, 0.02, 0.3, 0.05, 1.0).is_err());
    }
}
