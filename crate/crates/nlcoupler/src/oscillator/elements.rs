use nalgebra::DMatrix;
use num_complex::Complex64;

/// `⟨j| exp(i r (a + a†)) |k⟩` in the harmonic-oscillator number basis.
///
/// For `j ≤ k` this is `i^{k−j} √(j!/k!) r^{k−j} e^{−r²/2} L_j^{(k−j)}(r²)`;
/// the operator is complex symmetric so the other triangle follows.
pub fn ho_exp_matrix_element(j: usize, k: usize, r: f64) -> Complex64 {
    let (lo, hi) = if j <= k { (j, k) } else { (k, j) };
    let m = hi - lo;
    let g = normalized_laguerre(lo, m, r);
    i_pow(m) * (g[lo] * (-0.5 * r * r).exp())
}

/// `g_n = √(n!/(n+m)!) r^m L_n^{(m)}(r²)` for `n = 0..=n_max`, by the
/// three-term recurrence rescaled so no factorial is ever formed.
fn normalized_laguerre(n_max: usize, m: usize, r: f64) -> Vec<f64> {
    let x = r * r;
    let mut g0 = 1.0;
    for i in 1..=m {
        g0 *= r / (i as f64).sqrt();
    }
    let mut g = Vec::with_capacity(n_max + 1);
    g.push(g0);
    if n_max >= 1 {
        g.push((1.0 + m as f64 - x) * g0 / ((1 + m) as f64).sqrt());
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let mf = m as f64;
        let next = ((2.0 * nf - 1.0 + mf - x) * g[n - 1]
            - ((nf - 1.0) * (nf - 1.0 + mf)).sqrt() * g[n - 2])
            / (nf * (nf + mf)).sqrt();
        g.push(next);
    }
    g
}

fn i_pow(m: usize) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The `dim × dim` block of `exp(i r (a + a†))`, one recurrence per diagonal.
pub fn exp_factor_matrix(dim: usize, r: f64) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim, dim);
    let damp = (-0.5 * r * r).exp();
    for m in 0..dim {
        let g = normalized_laguerre(dim - 1 - m, m, r);
        let phase = i_pow(m) * damp;
        for (lo, gv) in g.iter().enumerate() {
            let v = phase * *gv;
            out[(lo, lo + m)] = v;
            out[(lo + m, lo)] = v;
        }
    }
    out
}

/// Truncated `X = a + a†`.
pub fn position_matrix(dim: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        x[(n - 1, n)] = s;
        x[(n, n - 1)] = s;
    }
    x
}
