use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// `amplitude · cos(x_coord)` in the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineTerm {
    pub coord: usize,
    pub amplitude: f64,
}

/// A circuit with diagonal kinetic energy `Σ kinetic_i q_i²/2` and potential
/// `½ xᵀ K x − bᵀ x + constant + Σ_m amplitude_m cos x_{coord_m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub kinetic: Vec<f64>,
    pub stiffness: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
    pub cosines: Vec<CosineTerm>,
}

impl CircuitSpec {
    /// One loop `e_l (4ζ² q²/2 + (φ − φ_x)²/2 + β cos φ)`.
    pub fn single(e_l: f64, zeta: f64, beta: f64, phi_x: f64) -> Self {
        Self {
            kinetic: vec![4.0 * zeta * zeta * e_l],
            stiffness: DMatrix::from_element(1, 1, e_l),
            linear: DVector::from_element(1, e_l * phi_x),
            constant: 0.5 * e_l * phi_x * phi_x,
            cosines: if beta != 0.0 {
                vec![CosineTerm {
                    coord: 0,
                    amplitude: beta * e_l,
                }]
            } else {
                Vec::new()
            },
        }
    }

    pub fn n_coords(&self) -> usize {
        self.kinetic.len()
    }
}

/// Normal-mode form
/// `H = Σ_n ω_n (a_n†a_n + ½) + offset + Σ_m (C_m e^{i Σ_n r_mn X_n} + h.c.)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeSystem {
    /// Mode energies, ascending.
    pub freqs: Vec<f64>,
    /// `r[m][n]` for each cosine term `m`.
    pub displacements: DMatrix<f64>,
    /// `C_m` with the static phase `φ0` folded in.
    pub amplitudes: Vec<Complex64>,
    /// Per-mode truncation, aligned with `freqs`.
    pub dims: Vec<usize>,
    /// Potential energy at the quadratic minimum.
    pub offset: f64,
    /// Quadratic minimum `φ0` in the original coordinates.
    pub origin: DVector<f64>,
    /// `x_i = φ0_i + Σ_n coord_displacements[i][n] X_n`.
    pub coord_displacements: DMatrix<f64>,
}

impl NormalModeSystem {
    pub fn n_modes(&self) -> usize {
        self.freqs.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Diagonalizes the quadratic part of `spec` and expresses every cosine in the
/// resulting oscillator coordinates. `dims` is assigned to modes in ascending
/// frequency order.
pub fn normal_modes(spec: &CircuitSpec, dims: &[usize]) -> Result<NormalModeSystem> {
    let n = spec.n_coords();
    if spec.stiffness.shape() != (n, n) || spec.linear.len() != n {
        return Err(Error::Config("inconsistent circuit dimensions".into()));
    }
    if dims.len() != n || dims.contains(&0) {
        return Err(Error::Config(format!(
            "need {n} non-zero mode truncations, got {dims:?}"
        )));
    }
    if spec.kinetic.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::Config("kinetic coefficients must be positive".into()));
    }
    if spec.cosines.iter().any(|c| c.coord >= n) {
        return Err(Error::Config("cosine term refers to a missing coordinate".into()));
    }
    let chol = spec
        .stiffness
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Config("stiffness matrix is not positive definite".into()))?;
    let origin = chol.solve(&spec.linear);
    let offset = spec.constant - 0.5 * spec.linear.dot(&origin);

    let sqrt_k = DVector::from_iterator(n, spec.kinetic.iter().map(|k| k.sqrt()));
    let mut m = spec.stiffness.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= sqrt_k[i] * sqrt_k[j];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut freqs = Vec::with_capacity(n);
    let mut coord = DMatrix::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[idx];
        if w2 <= 0.0 {
            return Err(Error::Config("non-positive normal-mode frequency".into()));
        }
        let w = w2.sqrt();
        freqs.push(w);
        // Fix the column sign so the largest component is positive.
        let v = eig.eigenvectors.column(idx);
        let big = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        let sign = if big < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coord[(i, col)] = sign * sqrt_k[i] * v[i] / (2.0 * w).sqrt();
        }
    }

    let nc = spec.cosines.len();
    let mut displacements = DMatrix::zeros(nc, n);
    let mut amplitudes = Vec::with_capacity(nc);
    for (t, c) in spec.cosines.iter().enumerate() {
        for col in 0..n {
            displacements[(t, col)] = coord[(c.coord, col)];
        }
        amplitudes.push(Complex64::from_polar(0.5 * c.amplitude, origin[c.coord]));
    }
    Ok(NormalModeSystem {
        freqs,
        displacements,
        amplitudes,
        dims: dims.to_vec(),
        offset,
        origin,
        coord_displacements: coord,
    })
}
