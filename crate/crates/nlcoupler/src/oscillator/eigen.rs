use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::TensorOperator;
use crate::{exec, Error, Result};

/// Largest dimension accepted by the dense solver.
pub const DENSE_LIMIT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Dense,
    Iterative,
}

/// A real symmetric operator that can be applied to vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn to_dense(&self) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    /// Uses column dot products, which is `H x` for the symmetric matrices
    /// this trait is meant for.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        let data = self.as_slice();
        exec::for_each_chunk_mut(y, 64, |c, part| {
            for (k, yi) in part.iter_mut().enumerate() {
                let col = &data[(c * 64 + k) * n..(c * 64 + k + 1) * n];
                *yi = dot(col, x);
            }
        });
    }
    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

impl LinearOperator for TensorOperator {
    fn dim(&self) -> usize {
        TensorOperator::dim(self)
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        TensorOperator::apply(self, x, y)
    }
    fn to_dense(&self) -> DMatrix<f64> {
        TensorOperator::to_dense(self)
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Non-decreasing.
    pub eigenvalues: Vec<f64>,
    /// One column per eigenvalue; largest-magnitude entry positive.
    pub eigenvectors: Option<DMatrix<f64>>,
    /// `‖Hv − λv‖` per pair (Ritz estimates for the iterative solver).
    pub residuals: Vec<f64>,
    pub solver: SolverMode,
    pub dim: usize,
    pub iterations: usize,
}

impl Spectrum {
    /// `E_m − E_0` for every returned level.
    pub fn excitations(&self) -> Vec<f64> {
        let e0 = self.eigenvalues.first().copied().unwrap_or(0.0);
        self.eigenvalues.iter().map(|e| e - e0).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Convergence threshold on Ritz residuals, relative to the spectral width.
    pub tol: f64,
    /// Block size; degenerate levels up to this multiplicity are resolved.
    pub block: usize,
    /// Maximum number of block steps; `None` means `4m + 200`.
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub want_vectors: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            block: 4,
            max_steps: None,
            seed: 0x5eed,
            want_vectors: false,
        }
    }
}

/// Lowest `m` eigenpairs of `op`.
pub fn lowest_eigs(
    op: &dyn LinearOperator,
    m: usize,
    mode: SolverMode,
    opts: &LanczosOptions,
) -> Result<Spectrum> {
    let n = op.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("cannot take {m} levels of a {n}-dim operator")));
    }
    match mode {
        SolverMode::Dense => {
            if n > DENSE_LIMIT {
                return Err(Error::Resource(format!(
                    "dense solve limited to {DENSE_LIMIT} dims, got {n}"
                )));
            }
            Ok(dense_lowest(op.to_dense(), m, opts.want_vectors))
        }
        SolverMode::Iterative => {
            if m > 32 {
                return Err(Error::InvalidInput("iterative mode supports at most 32 levels".into()));
            }
            block_lanczos(op, m, opts)
        }
    }
}

pub(crate) fn dense_lowest(h: DMatrix<f64>, m: usize, want_vectors: bool) -> Spectrum {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order[..m].iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = want_vectors.then(|| {
        let mut v = DMatrix::zeros(n, m);
        for (c, &i) in order[..m].iter().enumerate() {
            v.set_column(c, &eig.eigenvectors.column(i));
        }
        fix_signs(&mut v);
        v
    });
    Spectrum {
        eigenvalues,
        eigenvectors,
        residuals: vec![0.0; m],
        solver: SolverMode::Dense,
        dim: n,
        iterations: 1,
    }
}

/// Makes the largest-magnitude entry of every column positive.
pub(crate) fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let big = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if big < 0.0 {
            col.neg_mut();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes the components of `w` along every vector in `basis` (classical
/// Gram-Schmidt, applied twice).
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) {
    if basis.is_empty() {
        return;
    }
    for _ in 0..2 {
        let c = exec::map(basis, |q| dot(q, w));
        let chunk = 4096;
        exec::for_each_chunk_mut(w, chunk, |ci, part| {
            let off = ci * chunk;
            for (q, &cq) in basis.iter().zip(&c) {
                let len = part.len();
                for (wi, qi) in part.iter_mut().zip(&q[off..off + len]) {
                    *wi -= cq * qi;
                }
            }
        });
    }
}

/// Block Lanczos with full reorthogonalization and no restarts.
fn block_lanczos(op: &dyn LinearOperator, m: usize, opts: &LanczosOptions) -> Result<Spectrum> {
    let n = op.dim();
    let b = opts.block.max(1).min(n);
    let max_steps = opts.max_steps.unwrap_or(4 * m + 200);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();

    let mut block: Vec<Vec<f64>> = Vec::with_capacity(b);
    while block.len() < b {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        orthogonalize(&block, &mut v);
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            block.push(v);
        }
    }

    // Projected matrix, filled as the Krylov basis grows.
    let mut t_entries: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;
    let mut steps = 0;
    loop {
        steps += 1;
        let start = basis.len();
        basis.extend(block.iter().cloned());
        let hb: Vec<Vec<f64>> = exec::map(&block, |q| {
            let mut y = vec![0.0; n];
            op.apply(q, &mut y);
            y
        });
        // Row-by-row projection onto the full basis keeps T exactly symmetric
        // up to rounding even when the three-term structure is lost.
        let k = basis.len();
        for t in t_entries.iter_mut() {
            t.resize(k, 0.0);
        }
        for (i, w) in hb.iter().enumerate() {
            let row = exec::map(&basis, |q| dot(q, w));
            for (j, &v) in row.iter().enumerate().take(start) {
                t_entries[j][start + i] = v;
            }
            t_entries.push(row);
        }
        let tm = DMatrix::from_fn(k, k, |i, j| 0.5 * (t_entries[i][j] + t_entries[j][i]));

        // Next block: residual of H Q_j against the whole basis. Its Gram
        // matrix gives the Ritz residual norms exactly.
        let mut resid = hb;
        for w in resid.iter_mut() {
            orthogonalize(&basis, w);
        }
        let nb = resid.len();
        let gram = DMatrix::from_fn(nb, nb, |i, j| dot(&resid[i], &resid[j]));
        let scale = gram.diagonal().iter().copied().fold(0.0, f64::max).sqrt();
        let mut next = Vec::with_capacity(b);
        for mut w in resid {
            orthogonalize(&next, &mut w);
            let nw = dot(&w, &w).sqrt();
            if nw > 1e-10 * scale.max(1e-300) && nw > 1e-300 {
                w.iter_mut().for_each(|x| *x /= nw);
                next.push(w);
            }
        }
        // Deflated directions are replaced by fresh random vectors so the
        // block keeps its size (needed to see further degenerate copies).
        while next.len() < b {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            orthogonalize(&basis, &mut v);
            orthogonalize(&next, &mut v);
            let nv = dot(&v, &v).sqrt();
            if nv < 1e-8 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            next.push(v);
        }

        let exhausted = next.is_empty() || basis.len() + next.len() > n;
        if k >= m + b || exhausted || steps >= max_steps {
            let eig = SymmetricEigen::new(tm.clone());
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
            let lo = eig.eigenvalues[order[0]];
            let hi = eig.eigenvalues[order[k - 1]];
            let width = (hi - lo).abs().max(f64::MIN_POSITIVE);
            // Only the newest block leaks out of span(basis), so the residual
            // of a Ritz pair is ‖Σ_i s_{last,i} w_i‖.
            let mut res = Vec::with_capacity(m);
            for &idx in order.iter().take(m) {
                let s = eig.eigenvectors.column(idx);
                let sl = nalgebra::DVector::from_fn(nb, |i, _| s[start + i]);
                res.push(sl.dot(&(&gram * &sl)).max(0.0).sqrt());
            }
            let worst = res.iter().copied().fold(0.0, f64::max);
            best = best.min(worst / width);
            if worst <= opts.tol * width || exhausted {
                let eigenvalues = order[..m].iter().map(|&i| eig.eigenvalues[i]).collect();
                let eigenvectors = opts.want_vectors.then(|| {
                    let mut v = DMatrix::zeros(n, m);
                    for (c, &idx) in order[..m].iter().enumerate() {
                        let s = eig.eigenvectors.column(idx);
                        let col: Vec<f64> = exec::map_range(n, |row| {
                            basis.iter().zip(s.iter()).map(|(q, si)| q[row] * si).sum()
                        });
                        v.set_column(c, &nalgebra::DVector::from_vec(col));
                    }
                    fix_signs(&mut v);
                    v
                });
                return Ok(Spectrum {
                    eigenvalues,
                    eigenvectors,
                    residuals: res,
                    solver: SolverMode::Iterative,
                    dim: n,
                    iterations: steps,
                });
            }
            if steps >= max_steps {
                return Err(Error::NoConvergence {
                    what: "block Lanczos",
                    iterations: steps,
                    residual: best,
                });
            }
        }
        block = next;
    }
}
