//! Validation harness: exact spectra of the full coupler-plus-qubits circuit,
//! Born-Oppenheimer spectra under the three coupler theories, parameter
//! sweeps and coupling scans.
//!
//! Energies are in the global unit set by the caller (usually `E_L1`).

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::coupler::{self, CouplerParams};
use crate::oscillator::{
    self, assemble_tensor_operator, normal_modes, CircuitSpec, CosineTerm, LanczosOptions, SolverMode,
    Spectrum, DEFAULT_MEMORY_BUDGET,
};
use crate::projection::{self, CouplingTable, LabelSet, QubitParams, Theory};
use crate::{exec, kapteyn, Error, Result};

/// Coupler plus qubits, all energies in the global unit.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub coupler: CouplerParams,
    pub qubits: Vec<QubitParams>,
}

impl System {
    /// `k` identical qubits (`β_j = 1.05`, `ζ_j = α_j = 0.05`, `E_Lj = 1`)
    /// on a coupler with `β_c = 0.75`, `ζ_c = 0.05`, `E_L̃c = 3`, all biases
    /// zero.
    pub fn reference(k: usize) -> Self {
        let q = QubitParams {
            beta_j: 1.05,
            zeta_j: 0.05,
            e_lj: 1.0,
            phi_jx: 0.0,
            alpha_j: 0.05,
        };
        Self {
            coupler: CouplerParams {
                beta_c: 0.75,
                zeta_c: 0.05,
                e_ltc: 3.0,
                phi_cx: 0.0,
            },
            qubits: vec![q; k],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.coupler.validate()?;
        if self.qubits.is_empty() {
            return Err(Error::InvalidInput("at least one qubit is required".into()));
        }
        self.qubits.iter().try_for_each(|q| q.validate())
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.qubits.iter().map(|q| q.alpha_j).collect()
    }
}

/// Quadratic form, biases and junction terms of the full circuit in the
/// coordinates `(φ_c, φ_1, …, φ_k)`.
pub fn circuit_spec(sys: &System) -> Result<CircuitSpec> {
    sys.validate()?;
    let c = &sys.coupler;
    let ec = c.e_ltc;
    let n = sys.qubits.len() + 1;
    let mut kinetic = vec![4.0 * c.zeta_c * c.zeta_c * ec];
    let mut k = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    k[(0, 0)] = ec;
    b[0] = ec * c.phi_cx;
    let mut constant = 0.5 * ec * c.phi_cx * c.phi_cx;
    let mut cosines = vec![CosineTerm { coord: 0, amplitude: c.beta_c * ec }];
    for (j, q) in sys.qubits.iter().enumerate() {
        let i = j + 1;
        kinetic.push(4.0 * q.zeta_j * q.zeta_j * q.e_lj);
        k[(0, i)] = ec * q.alpha_j;
        k[(i, 0)] = ec * q.alpha_j;
        for (jj, qq) in sys.qubits.iter().enumerate() {
            k[(i, jj + 1)] = ec * q.alpha_j * qq.alpha_j;
        }
        k[(i, i)] += q.e_lj;
        b[i] = ec * q.alpha_j * c.phi_cx + q.e_lj * q.phi_jx;
        constant += 0.5 * q.e_lj * q.phi_jx * q.phi_jx;
        cosines.push(CosineTerm { coord: i, amplitude: q.beta_j * q.e_lj });
    }
    cosines.retain(|t| t.amplitude != 0.0);
    Ok(CircuitSpec {
        kinetic,
        stiffness: k,
        linear: b,
        constant,
        cosines,
    })
}

/// Solver used when the caller does not force one: dense up to this size.
const AUTO_DENSE: usize = 512;

fn auto_mode(dim: usize) -> SolverMode {
    if dim <= AUTO_DENSE {
        SolverMode::Dense
    } else {
        SolverMode::Iterative
    }
}

/// Lowest `n_levels` of the full circuit in a truncated normal-mode basis.
/// `dims` is assigned to modes in ascending frequency order.
pub fn exact_spectrum(sys: &System, dims: &[usize], n_levels: usize, opts: &LanczosOptions) -> Result<Spectrum> {
    let spec = circuit_spec(sys)?;
    let modes = normal_modes(&spec, dims)?;
    let op = assemble_tensor_operator(&modes, DEFAULT_MEMORY_BUDGET)?;
    oscillator::lowest_eigs(&op, n_levels, auto_mode(op.dim()), opts)
}

/// Truncation and solver settings shared by the reduced theories.
#[derive(Debug, Clone)]
pub struct Numerics {
    pub nu_max: usize,
    pub mu_max: usize,
    /// Fock states per qubit in the reduced Hamiltonian.
    pub qubit_basis: usize,
    /// Fock states for coupler-only diagonalizations.
    pub coupler_basis: usize,
    pub exact_dims: Vec<usize>,
    pub lanczos: LanczosOptions,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            nu_max: kapteyn::DEFAULT_NU_MAX,
            mu_max: coupler::DEFAULT_MU_MAX,
            qubit_basis: 40,
            coupler_basis: coupler::DEFAULT_N_BASIS,
            exact_dims: vec![40, 40, 18],
            lanczos: LanczosOptions::default(),
        }
    }
}

struct QubitOps {
    h: DMatrix<f64>,
    flux: DMatrix<f64>,
    flux_values: DVector<f64>,
    flux_vectors: DMatrix<f64>,
}

fn qubit_ops(q: &QubitParams, n: usize) -> QubitOps {
    let h = coupler::loop_hamiltonian(q.beta_j, q.zeta_j, q.phi_jx, n) * q.e_lj;
    let flux = coupler::loop_flux(q.zeta_j, q.phi_jx, n);
    let eig = SymmetricEigen::new(flux.clone());
    QubitOps {
        h,
        flux,
        flux_values: eig.eigenvalues,
        flux_vectors: eig.eigenvectors,
    }
}

/// `⊗_j m_j`, with `None` standing for the `n × n` identity.
fn kron_all(mats: &[Option<&DMatrix<f64>>], n: usize) -> DMatrix<f64> {
    let eye = DMatrix::identity(n, n);
    mats.iter().fold(DMatrix::from_element(1, 1, 1.0), |acc, m| acc.kronecker(m.unwrap_or(&eye)))
}

fn embed(op: &DMatrix<f64>, j: usize, k: usize, n: usize) -> DMatrix<f64> {
    let mats: Vec<_> = (0..k).map(|i| (i == j).then_some(op)).collect();
    kron_all(&mats, n)
}

/// The Born-Oppenheimer Hamiltonian `Σ_j H_j + E_g(φ̂_x)` in the product Fock
/// basis of the qubits, with `φ_x = φ_cx − Σ_j α_j φ̂_j` and `E_g` from
/// `theory`. Non-finite derivatives propagate into the matrix.
pub fn bo_hamiltonian(theory: Theory, sys: &System, num: &Numerics) -> Result<DMatrix<f64>> {
    sys.validate()?;
    let n = num.qubit_basis;
    let k = sys.qubits.len();
    let total = n.checked_pow(k as u32).unwrap_or(usize::MAX);
    if total > oscillator::DENSE_LIMIT {
        return Err(Error::Resource(format!(
            "reduced Hamiltonian of {k} qubits at {n} states each exceeds {} dims",
            oscillator::DENSE_LIMIT
        )));
    }
    let ops: Vec<QubitOps> = sys.qubits.iter().map(|q| qubit_ops(q, n)).collect();
    let mut h = DMatrix::zeros(total, total);
    for (j, o) in ops.iter().enumerate() {
        h += embed(&o.h, j, k, n);
    }
    let c = &sys.coupler;
    let ec = c.e_ltc;
    match theory {
        Theory::Na => add_fourier_interaction(&mut h, sys, &ops, num)?,
        Theory::La | Theory::Ln => {
            let (eg, (d1, d2)) = if theory == Theory::La {
                let phi = kapteyn::kepler_solve(c.beta_c, c.phi_cx)?;
                let u = 0.5 * (phi - c.phi_cx).powi(2) + c.beta_c * phi.cos();
                let z = coupler::u_zpe_harmonic(c.beta_c, c.zeta_c, c.phi_cx)?;
                (u + z, coupler::eg_derivs_analytic(c.beta_c, c.zeta_c, c.phi_cx)?)
            } else {
                let eg = coupler::eg_exact(c, c.phi_cx, num.coupler_basis, 1)?[0];
                (eg, coupler::eg_derivs_numeric(c, c.phi_cx, num.coupler_basis)?)
            };
            for i in 0..total {
                h[(i, i)] += ec * eg;
            }
            let alphas = sys.alphas();
            for j in 0..k {
                let f = &ops[j].flux;
                h += embed(f, j, k, n) * (-ec * d1 * alphas[j]);
                h += embed(&(f * f), j, k, n) * (0.5 * ec * d2 * alphas[j] * alphas[j]);
                for l in j + 1..k {
                    let mats: Vec<_> = (0..k)
                        .map(|i| match i {
                            _ if i == j => Some(f),
                            _ if i == l => Some(&ops[l].flux),
                            _ => None,
                        })
                        .collect();
                    h += kron_all(&mats, n) * (ec * d2 * alphas[j] * alphas[l]);
                }
            }
        }
    }
    Ok(h)
}

/// Adds `E_L̃c Σ_ν B_ν e^{iνφ_cx} ⊗_j e^{−iνα_jφ̂_j}` to `h`.
fn add_fourier_interaction(h: &mut DMatrix<f64>, sys: &System, ops: &[QubitOps], num: &Numerics) -> Result<()> {
    let c = &sys.coupler;
    let series = coupler::b_coeffs(c.beta_c, c.zeta_c, num.nu_max, num.mu_max)?;
    let n = num.qubit_basis;
    let total = h.nrows();
    let ec = c.e_ltc;
    for i in 0..total {
        h[(i, i)] += ec * series.coeff(0);
    }
    let alphas = sys.alphas();
    let factor = |o: &QubitOps, s: f64| -> DMatrix<Complex64> {
        let v = o.flux_vectors.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&o.flux_values.map(|l| Complex64::from_polar(1.0, -s * l)));
        &v * d * v.transpose()
    };
    for nu in 1..=series.nu_max {
        let b = series.coeff(nu as i64);
        if b == 0.0 {
            continue;
        }
        let v = nu as f64;
        let coef = Complex64::from_polar(2.0 * ec * b, v * c.phi_cx);
        let facs: Vec<DMatrix<Complex64>> = ops.iter().zip(&alphas).map(|(o, a)| factor(o, v * a)).collect();
        let (last, init) = facs.split_last().expect("at least one qubit");
        let head = init
            .iter()
            .fold(DMatrix::from_element(1, 1, coef), |acc, f| acc.kronecker(f));
        let (lr, li) = (last.map(|z| z.re), last.map(|z| z.im));
        let m = head.nrows();
        // Column block `s` of h is touched only through head[(·, s)].
        exec::for_each_chunk_mut(h.as_mut_slice(), n * total, |s, chunk| {
            for r in 0..m {
                let z = head[(r, s)];
                if z.re == 0.0 && z.im == 0.0 {
                    continue;
                }
                for bb in 0..n {
                    let col = &mut chunk[bb * total + r * n..bb * total + (r + 1) * n];
                    for (a, x) in col.iter_mut().enumerate() {
                        *x += z.re * lr[(a, bb)] - z.im * li[(a, bb)];
                    }
                }
            }
        });
    }
    Ok(())
}

/// Lowest `n_levels` of the Born-Oppenheimer Hamiltonian for `theory`.
/// A Hamiltonian with non-finite entries yields non-finite eigenvalues
/// instead of an error.
pub fn bo_spectrum(theory: Theory, sys: &System, n_levels: usize, num: &Numerics) -> Result<Spectrum> {
    let h = bo_hamiltonian(theory, sys, num)?;
    let n = h.nrows();
    if h.iter().any(|x| !x.is_finite()) {
        return Ok(Spectrum {
            eigenvalues: vec![f64::NAN; n_levels],
            eigenvectors: None,
            residuals: vec![f64::NAN; n_levels],
            solver: auto_mode(n),
            dim: n,
            iterations: 0,
        });
    }
    oscillator::lowest_eigs(&h, n_levels, auto_mode(n), &num.lanczos)
}

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    BetaJ,
    PhiCx,
    ZetaC,
    Alpha,
    BetaC,
}

impl Axis {
    pub fn apply(self, sys: &mut System, value: f64) {
        match self {
            Axis::BetaJ => sys.qubits.iter_mut().for_each(|q| q.beta_j = value),
            Axis::Alpha => sys.qubits.iter_mut().for_each(|q| q.alpha_j = value),
            Axis::PhiCx => sys.coupler.phi_cx = value,
            Axis::ZetaC => sys.coupler.zeta_c = value,
            Axis::BetaC => sys.coupler.beta_c = value,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::BetaJ => "beta_j",
            Axis::PhiCx => "phi_cx",
            Axis::ZetaC => "zeta_c",
            Axis::Alpha => "alpha",
            Axis::BetaC => "beta_c",
        })
    }
}

/// Exact diagonalization or one of the reduced theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Bo(Theory),
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Exact,
        Method::Bo(Theory::Na),
        Method::Bo(Theory::La),
        Method::Bo(Theory::Ln),
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Exact => f.write_str("exact"),
            Method::Bo(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    pub methods: Vec<Method>,
    pub n_levels: usize,
    pub system: System,
    pub numerics: Numerics,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.n_points < 2 || self.n_levels < 2 || self.methods.is_empty() {
            return Err(Error::InvalidInput(
                "sweep needs lo < hi, at least 2 points, 2 levels and one method".into(),
            ));
        }
        Ok(())
    }
}

/// Levels from one method at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub energies: Vec<f64>,
    /// `E_m − E_0`.
    pub excitations: Vec<f64>,
    pub finite: bool,
    pub iterations: usize,
    pub max_residual: f64,
}

impl Levels {
    fn from_spectrum(s: &Spectrum) -> Self {
        Self {
            energies: s.eigenvalues.clone(),
            excitations: s.excitations(),
            finite: s.eigenvalues.iter().all(|e| e.is_finite()),
            iterations: s.iterations,
            max_residual: s.residuals.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    /// One entry per requested method, in request order; failures keep the
    /// error message.
    pub outcomes: Vec<(Method, std::result::Result<Levels, String>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
}

/// Lanczos seed for sweep point `index`.
pub fn point_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Levels of `method` for one system.
pub fn run_method(method: Method, sys: &System, n_levels: usize, num: &Numerics) -> Result<Levels> {
    let s = match method {
        Method::Exact => exact_spectrum(sys, &num.exact_dims, n_levels, &num.lanczos)?,
        Method::Bo(t) => bo_spectrum(t, sys, n_levels, num)?,
    };
    Ok(Levels::from_spectrum(&s))
}

/// Runs every method at every point. Points run concurrently; the result is
/// in point order and does not depend on scheduling.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let values = spec.values();
    let idx: Vec<usize> = (0..values.len()).collect();
    let points = exec::map(&idx, |&i| {
        let mut sys = spec.system.clone();
        spec.axis.apply(&mut sys, values[i]);
        let mut num = spec.numerics.clone();
        num.lanczos.seed = point_seed(spec.numerics.lanczos.seed, i);
        let outcomes = spec
            .methods
            .iter()
            .map(|&m| (m, run_method(m, &sys, spec.n_levels, &num).map_err(|e| e.to_string())))
            .collect();
        SweepPoint {
            index: i,
            value: values[i],
            outcomes,
        }
    });
    Ok(SweepResult {
        axis: spec.axis,
        points,
    })
}

/// Nonlinear coupling tables at each coupler bias in `phis`.
pub fn coupling_scan(sys: &System, labels: &LabelSet, phis: &[f64], num: &Numerics) -> Result<Vec<CouplingTable>> {
    sys.validate()?;
    let c = &sys.coupler;
    let series = coupler::b_coeffs(c.beta_c, c.zeta_c, num.nu_max, num.mu_max)?;
    let subs = sys
        .qubits
        .iter()
        .map(|q| projection::qubit_subspace(q, num.qubit_basis))
        .collect::<Result<Vec<_>>>()?;
    let alphas = sys.alphas();
    exec::map(phis, |&p| projection::couplings(&series, &subs, &alphas, p, labels, c.e_ltc))
        .into_iter()
        .collect()
}
