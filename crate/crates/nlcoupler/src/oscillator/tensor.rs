use nalgebra::DMatrix;
use num_complex::Complex64;

use super::elements::exp_factor_matrix;
use super::modes::NormalModeSystem;
use crate::{exec, Error, Result};

/// Default cap on operator storage (diagonal, factors and work buffers).
pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

/// `coef · ⊗_n F_n`, with `None` standing for the identity on that mode.
#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub coef: Complex64,
    pub factors: Vec<Option<DMatrix<Complex64>>>,
}

/// `diag + Σ_t (term_t + term_t†)` acting on row-major tensors whose last
/// mode varies fastest. Immutable once built; `apply` may be called from
/// several threads at once.
#[derive(Debug, Clone)]
pub struct TensorOperator {
    dims: Vec<usize>,
    diag: Vec<f64>,
    terms: Vec<TensorTerm>,
}

impl TensorOperator {
    pub fn new(dims: Vec<usize>, diag: Vec<f64>, terms: Vec<TensorTerm>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if diag.len() != total {
            return Err(Error::InvalidInput("diagonal length mismatch".into()));
        }
        for t in &terms {
            if t.factors.len() != dims.len() {
                return Err(Error::InvalidInput("factor count mismatch".into()));
            }
            for (f, &d) in t.factors.iter().zip(&dims) {
                if let Some(f) = f {
                    if f.shape() != (d, d) {
                        return Err(Error::InvalidInput("factor shape mismatch".into()));
                    }
                    // Complex symmetry makes F̄ x = conj(F x) for real x, which is
                    // what lets the Hermitian partner be applied as 2 Re(·).
                    let asym = (0..d)
                        .flat_map(|i| (0..i).map(move |j| (i, j)))
                        .any(|(i, j)| (f[(i, j)] - f[(j, i)]).norm() > 1e-14);
                    if asym {
                        return Err(Error::InvalidInput("factor is not complex symmetric".into()));
                    }
                }
            }
        }
        Ok(Self { dims, diag, terms })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    /// `y = H x` for real `x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = di * xi;
        }
        let mut buf: Vec<Complex64> = Vec::new();
        let mut tmp: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); self.dim()];
        for term in &self.terms {
            buf.clear();
            buf.extend(x.iter().map(|&v| Complex64::new(v, 0.0)));
            for (k, f) in term.factors.iter().enumerate() {
                if let Some(f) = f {
                    apply_mode(&self.dims, k, f, &buf, &mut tmp);
                    std::mem::swap(&mut buf, &mut tmp);
                }
            }
            let c = term.coef;
            for (yi, w) in y.iter_mut().zip(&buf) {
                *yi += 2.0 * (c * w).re;
            }
        }
    }

    /// Explicit matrix, for small instances and the dense solver.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let cols = exec::map_range(n, |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let mut col = vec![0.0; n];
            self.apply(&e, &mut col);
            col
        });
        DMatrix::from_fn(n, n, |i, j| cols[j][i])
    }
}

/// `out[p, i, q] = Σ_j F[i, j] w[p, j, q]` along mode `k`.
fn apply_mode(
    dims: &[usize],
    k: usize,
    f: &DMatrix<Complex64>,
    w: &[Complex64],
    out: &mut [Complex64],
) {
    let d = dims[k];
    let post: usize = dims[k + 1..].iter().product();
    exec::for_each_chunk_mut(out, post, |row, dst| {
        let p = row / d;
        let i = row % d;
        dst.fill(Complex64::new(0.0, 0.0));
        let base = p * d * post;
        for j in 0..d {
            let fij = f[(i, j)];
            if fij.re == 0.0 && fij.im == 0.0 {
                continue;
            }
            let src = &w[base + j * post..base + (j + 1) * post];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += fij * s;
            }
        }
    });
}

/// Builds the matrix-free form of a normal-mode Hamiltonian. Factor matrices
/// are computed once per (term, mode) pair with non-zero displacement.
pub fn assemble_tensor_operator(sys: &NormalModeSystem, budget_bytes: usize) -> Result<TensorOperator> {
    let total = sys.total_dim();
    let factor_bytes: usize = sys.dims.iter().map(|d| d * d * 16).sum::<usize>() * sys.amplitudes.len();
    let need = total * (8 + 2 * 16) + factor_bytes;
    if need > budget_bytes {
        return Err(Error::Resource(format!(
            "operator over dims {:?} needs ~{} MiB, budget is {} MiB",
            sys.dims,
            need >> 20,
            budget_bytes >> 20
        )));
    }
    let mut diag = vec![sys.offset + 0.5 * sys.freqs.iter().sum::<f64>(); total];
    let mut stride = total;
    for (n, &d) in sys.dims.iter().enumerate() {
        stride /= d;
        let w = sys.freqs[n];
        for (idx, v) in diag.iter_mut().enumerate() {
            *v += w * ((idx / stride) % d) as f64;
        }
    }
    let terms = sys
        .amplitudes
        .iter()
        .enumerate()
        .map(|(m, &coef)| TensorTerm {
            coef,
            factors: sys
                .dims
                .iter()
                .enumerate()
                .map(|(n, &d)| {
                    let r = sys.displacements[(m, n)];
                    (r != 0.0).then(|| exp_factor_matrix(d, r))
                })
                .collect(),
        })
        .collect();
    TensorOperator::new(sys.dims.clone(), diag, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::{ho_exp_matrix_element, normal_modes, CircuitSpec, CosineTerm};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three_mode_spec() -> CircuitSpec {
        let (ec, el, a) = (3.0, 1.0, 0.05);
        let mut k = DMatrix::zeros(3, 3);
        k[(0, 0)] = ec;
        for j in 1..3 {
            k[(0, j)] = ec * a;
            k[(j, 0)] = ec * a;
            for jj in 1..3 {
                k[(j, jj)] = ec * a * a + if j == jj { el } else { 0.0 };
            }
        }
        let phcx = 0.3;
        CircuitSpec {
            kinetic: vec![4.0 * 0.0025 * ec, 4.0 * 0.0025 * el, 4.0 * 0.0025 * el],
            stiffness: k,
            linear: DVector::from_vec(vec![ec * phcx, ec * a * phcx, ec * a * phcx]),
            constant: 0.5 * ec * phcx * phcx,
            cosines: vec![
                CosineTerm { coord: 0, amplitude: 0.75 * ec },
                CosineTerm { coord: 1, amplitude: 1.05 * el },
                CosineTerm { coord: 2, amplitude: 1.05 * el },
            ],
        }
    }

    /// Dense matrix built entry by entry from the multi-index formula.
    fn brute_force(sys: &NormalModeSystem) -> DMatrix<f64> {
        let dims = &sys.dims;
        let total: usize = dims.iter().product();
        let unflat = |mut i: usize| {
            let mut v = vec![0; dims.len()];
            for n in (0..dims.len()).rev() {
                v[n] = i % dims[n];
                i /= dims[n];
            }
            v
        };
        DMatrix::from_fn(total, total, |a, b| {
            let (ia, ib) = (unflat(a), unflat(b));
            let mut h = 0.0;
            if a == b {
                h += sys.offset;
                for n in 0..dims.len() {
                    h += sys.freqs[n] * (ia[n] as f64 + 0.5);
                }
            }
            for (m, c) in sys.amplitudes.iter().enumerate() {
                let mut z = *c;
                for n in 0..dims.len() {
                    z *= ho_exp_matrix_element(ia[n], ib[n], sys.displacements[(m, n)]);
                }
                h += 2.0 * z.re;
            }
            h
        })
    }

    #[test]
    fn small_instance_matches_dense_oracle() {
        let sys = normal_modes(&three_mode_spec(), &[8, 8, 6]).unwrap();
        let op = assemble_tensor_operator(&sys, DEFAULT_MEMORY_BUDGET).unwrap();
        let dense = brute_force(&sys);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; op.dim()];
        op.apply(&x, &mut y);
        let want = &dense * DVector::from_vec(x);
        for (a, b) in y.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_matches_direct_assembly() {
        let (beta, zeta, phx) = (0.75, 0.05, 0.4);
        let sys = normal_modes(&CircuitSpec::single(1.0, zeta, beta, phx), &[50]).unwrap();
        let h = assemble_tensor_operator(&sys, DEFAULT_MEMORY_BUDGET).unwrap().to_dense();
        let rot = Complex64::from_polar(1.0, phx);
        for j in 0..50 {
            for k in 0..50 {
                let mut want = beta * (rot * ho_exp_matrix_element(j, k, zeta.sqrt())).re;
                if j == k {
                    want += zeta * (2 * j + 1) as f64;
                }
                assert!((h[(j, k)] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hermitian_on_reference_dims() {
        let sys = normal_modes(&three_mode_spec(), &[40, 40, 18]).unwrap();
        let op = assemble_tensor_operator(&sys, DEFAULT_MEMORY_BUDGET).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..op.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (mut hv, mut hw) = (vec![0.0; op.dim()], vec![0.0; op.dim()]);
        op.apply(&v, &mut hv);
        op.apply(&w, &mut hw);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let norm = (dot(&v, &v) * dot(&w, &w)).sqrt();
        assert!((dot(&w, &hv) - dot(&v, &hw)).abs() <= 1e-10 * norm);
    }

    #[test]
    fn no_cosines_is_diagonal() {
        let sys = normal_modes(&CircuitSpec::single(1.0, 0.1, 0.0, 0.0), &[6]).unwrap();
        let op = assemble_tensor_operator(&sys, DEFAULT_MEMORY_BUDGET).unwrap();
        let h = op.to_dense();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 0.1 * (2 * i + 1) as f64 } else { 0.0 };
                assert!((h[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let sys = normal_modes(&three_mode_spec(), &[40, 40, 18]).unwrap();
        assert!(matches!(assemble_tensor_operator(&sys, 1 << 20), Err(Error::Resource(_))));
    }
}
