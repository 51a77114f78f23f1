use std::f64::consts::TAU;
use std::path::Path;

use nlcoupler::bench::{self, SweepSpec};
use nlcoupler::projection::{self, label_string, CouplingTable, Pauli, QubitSubspace, SubspaceWarning, Theory};
use nlcoupler::{coupler, exec, kapteyn};

use crate::config::{self, Config, GridSection, Resolved};
use crate::output::{num, path_in, Table};
use crate::CliError;

fn grid_or(section: Option<&GridSection>, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    match section {
        Some(g) => g.values(),
        None => GridSection { lo, hi, n_points: n }.values(),
    }
}

fn comments(res: &Resolved, command: &str) -> Vec<String> {
    let mut c = vec![format!("coupler-lab {command}")];
    c.extend(res.echo());
    c
}

/// `sin_β`, `cos_β` on a grid and the `E_g` Fourier coefficients.
pub fn series(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let c = &res.coupler;
    let nu_max = res.numerics.nu_max;
    let grid = grid_or(cfg.series.as_ref(), -0.5, 0.5, 201)?;
    let sin_s = kapteyn::sin_beta_series(c.beta_c, nu_max)?;
    let cos_s = kapteyn::cos_beta_series(c.beta_c, nu_max)?;
    let mut t = Table::new(
        comments(res, "series"),
        &["phi[2pi]", "phi[rad]", "sin", "sin_beta", "cos", "cos_beta"],
    );
    for p in grid {
        let phi = TAU * p;
        // The β = 0 case is the plain circular functions, exactly.
        let (sb, cb) = if c.beta_c == 0.0 {
            (phi.sin(), phi.cos())
        } else {
            (sin_s.eval(phi), cos_s.eval(phi))
        };
        t.push(vec![num(p), num(phi), num(phi.sin()), num(sb), num(phi.cos()), num(cb)]);
    }
    t.write(&path_in(out, "series")?)?;

    let eg = coupler::b_coeffs(c.beta_c, c.zeta_c, nu_max, res.numerics.mu_max)?;
    let mut t = Table::new(
        comments(res, "series"),
        &["nu", "B_classical[E_Ltc]", "B_zpe_per_zeta[E_Ltc]", "B_total[E_Ltc]"],
    );
    for nu in 0..=nu_max as i64 {
        t.push(vec![
            nu.to_string(),
            num(eg.b_classical.coeff(nu)),
            num(eg.b_quantum.coeff(nu)),
            num(eg.coeff(nu)),
        ]);
    }
    t.write(&path_in(out, "series_coeffs")?)?;
    println!("wrote series.csv and series_coeffs.csv ({} harmonics)", nu_max);
    Ok(())
}

/// Coupler ground energy: exact, Fourier series, classical and harmonic ZPE.
pub fn eg(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let c = res.coupler;
    let num_ = &res.numerics;
    let grid = grid_or(cfg.eg.as_ref(), 0.0, 0.5, 101)?;
    let series = coupler::b_coeffs(c.beta_c, c.zeta_c, num_.nu_max, num_.mu_max)?;
    let rows = exec::map(&grid, |&p| -> Result<Vec<String>, CliError> {
        let phi = TAU * p;
        let exact = coupler::eg_exact(&c, phi, num_.coupler_basis, 1)?[0];
        let classical = coupler::u_min(c.beta_c, phi, num_.nu_max)?;
        let zpe = coupler::u_zpe_harmonic(c.beta_c, c.zeta_c, phi)?;
        Ok(vec![
            num(p),
            num(exact),
            num(coupler::eg_eval(&series, phi)),
            num(classical),
            num(zpe),
            num(exact - classical),
        ])
    });
    let mut t = Table::new(
        comments(res, "eg"),
        &[
            "phi_x[2pi]",
            "E_exact[E_Ltc]",
            "E_NA[E_Ltc]",
            "U_min[E_Ltc]",
            "U_ZPE_harmonic[E_Ltc]",
            "E_exact_minus_U_min[E_Ltc]",
        ],
    );
    for r in rows {
        t.push(r?);
    }
    t.write(&path_in(out, "eg")?)?;
    println!("wrote eg.csv ({} points)", grid.len());
    Ok(())
}

/// First and second derivatives of `E_g` from the linear-analytic and
/// perturbative routes.
pub fn derivs(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let c = res.coupler;
    let grid = grid_or(cfg.derivs.as_ref(), 0.0, 0.5, 101)?;
    let nb = res.numerics.coupler_basis;
    let rows = exec::map(&grid, |&p| -> Result<Vec<String>, CliError> {
        let phi = TAU * p;
        let (a1, a2) = coupler::eg_derivs_analytic(c.beta_c, c.zeta_c, phi)?;
        let (n1, n2) = coupler::eg_derivs_numeric(&c, phi, nb)?;
        Ok(vec![num(p), num(a1), num(n1), num(a2), num(n2)])
    });
    let mut t = Table::new(
        comments(res, "derivs"),
        &["phi_x[2pi]", "d1_LA[E_Ltc]", "d1_LN[E_Ltc]", "d2_LA[E_Ltc]", "d2_LN[E_Ltc]"],
    );
    for r in rows {
        t.push(r?);
    }
    t.write(&path_in(out, "derivs")?)?;
    println!("wrote derivs.csv ({} points)", grid.len());
    Ok(())
}

fn subspaces(res: &Resolved) -> Result<Vec<QubitSubspace>, CliError> {
    let subs = res
        .qubits
        .iter()
        .map(|q| projection::qubit_subspace(q, res.numerics.qubit_basis))
        .collect::<Result<Vec<_>, _>>()?;
    for (j, s) in subs.iter().enumerate() {
        for w in &s.warnings {
            warn_subspace(j, w);
        }
    }
    for w in projection::resonance_warnings(&subs, 0.02) {
        warn_subspace(usize::MAX, &w);
    }
    Ok(subs)
}

fn warn_subspace(j: usize, w: &SubspaceWarning) {
    match w {
        SubspaceWarning::WeakIsolation { ratio } => {
            eprintln!("warning: qubit {j}: (E2-E1)/(E1-E0) = {ratio:.3} is small; the two-level reduction is weak")
        }
        SubspaceWarning::Resonance {
            qubit,
            partners,
            detuning,
        } => eprintln!(
            "warning: E20 of qubit {qubit} is within {:.2}% of E10({}) + E10({})",
            100.0 * detuning,
            partners.0,
            partners.1
        ),
    }
}

/// Label and sign of a coefficient after the x ↔ z relabeling (`H σ_y H = −σ_y`).
fn persistent_current(label: &[Pauli]) -> (String, f64) {
    let mut sign = 1.0;
    let s = label
        .iter()
        .map(|p| match p {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
            Pauli::Y => {
                sign = -sign;
                Pauli::Y
            }
            Pauli::I => Pauli::I,
        })
        .collect::<Vec<_>>();
    (label_string(&s), sign)
}

fn mhz(res: &Resolved, g: f64) -> Option<f64> {
    res.e_l_ghz.map(|ghz| g * ghz * 1e3)
}

/// Pauli coefficients from all three theories at the configured bias.
pub fn couplings(cfg: &Config, res: &Resolved, out: &Path, pc_flag: bool) -> Result<(), CliError> {
    let sys = res.system()?;
    let c = sys.coupler;
    let n = &res.numerics;
    let section = cfg.couplings.clone().unwrap_or_default();
    let labels = config::label_set(section.labels.as_ref(), sys.qubits.len())?;
    let pc = pc_flag || section.pc_basis;
    let subs = subspaces(res)?;
    let alphas = sys.alphas();
    let series = coupler::b_coeffs(c.beta_c, c.zeta_c, n.nu_max, n.mu_max)?;
    let na = projection::couplings(&series, &subs, &alphas, c.phi_cx, &labels, c.e_ltc)?;
    let la_d = coupler::eg_derivs_analytic(c.beta_c, c.zeta_c, c.phi_cx)?;
    let la = projection::linear_couplings(la_d, &subs, &alphas, c.phi_cx, Theory::La, &labels, c.e_ltc)?;
    let ln_d = coupler::eg_derivs_numeric(&c, c.phi_cx, n.coupler_basis)?;
    let ln = projection::linear_couplings(ln_d, &subs, &alphas, c.phi_cx, Theory::Ln, &labels, c.e_ltc)?;

    let mut com = comments(res, "couplings");
    com.push(format!(
        "basis = {}",
        if pc { "persistent-current (x <-> z relabeled)" } else { "parity" }
    ));
    com.push(format!(
        "qubit splittings[E_L1] = {}",
        subs.iter().map(|s| num(s.splitting())).collect::<Vec<_>>().join(" ")
    ));
    let mut header = vec!["label", "g_NA[E_L1]", "g_LA[E_L1]", "g_LN[E_L1]"];
    if res.e_l_ghz.is_some() {
        header.extend(["g_NA[MHz]", "g_LA[MHz]", "g_LN[MHz]"]);
    }
    let mut t = Table::new(com, &header);
    for ((label, g_na), ((_, g_la), (_, g_ln))) in na.entries.iter().zip(la.entries.iter().zip(&ln.entries)) {
        let (name, sign) = if pc {
            persistent_current(label)
        } else {
            (label_string(label), 1.0)
        };
        let vals = [g_na * sign, g_la * sign, g_ln * sign];
        let mut row = vec![name];
        row.extend(vals.iter().map(|&v| num(v)));
        if res.e_l_ghz.is_some() {
            row.extend(vals.iter().map(|&v| num(mhz(res, v).unwrap())));
        }
        t.push(row);
    }
    t.write(&path_in(out, "couplings")?)?;
    println!("wrote couplings.csv ({} labels)", na.entries.len());
    Ok(())
}

/// Spectrum sweep comparing exact diagonalization with the reduced theories.
pub fn spectrum(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the spectrum command needs a [sweep] section".into()))?;
    let axis = config::parse_axis(&s.axis)?;
    let scale = if axis == bench::Axis::PhiCx { TAU } else { 1.0 };
    let spec = SweepSpec {
        axis,
        lo: s.lo * scale,
        hi: s.hi * scale,
        n_points: s.n_points,
        methods: s
            .methods
            .iter()
            .map(|m| config::parse_method(m))
            .collect::<Result<_, _>>()?,
        n_levels: s.n_levels,
        system: res.system()?,
        numerics: res.numerics.clone(),
    };
    let result = bench::sweep(&spec)?;
    let mut com = comments(res, "spectrum");
    com.push(format!(
        "sweep axis = {} ({}) lo = {} hi = {} n_points = {} n_levels = {}",
        axis,
        if scale == TAU { "units of 2pi" } else { "dimensionless" },
        num(s.lo),
        num(s.hi),
        s.n_points,
        s.n_levels
    ));
    com.push("excitation = E_m - E_0; lanczos seed of point i = point_seed(seed, i)".into());
    let ax = format!("{axis}{}", if scale == TAU { "[2pi]" } else { "" });
    let mut t = Table::new(
        com,
        &[
            ax.as_str(),
            "method",
            "level",
            "excitation[E_L1]",
            "energy[E_L1]",
            "finite",
            "iterations",
            "max_residual",
            "error",
        ],
    );
    let mut failures = 0;
    for p in &result.points {
        let v = num(p.value / scale);
        for (m, outcome) in &p.outcomes {
            match outcome {
                Ok(l) => {
                    for (i, (ex, e)) in l.excitations.iter().zip(&l.energies).enumerate() {
                        t.push(vec![
                            v.clone(),
                            m.to_string(),
                            i.to_string(),
                            num(*ex),
                            num(*e),
                            l.finite.to_string(),
                            l.iterations.to_string(),
                            num(l.max_residual),
                            String::new(),
                        ]);
                    }
                }
                Err(e) => {
                    failures += 1;
                    eprintln!("warning: {m} at {axis} = {} failed: {e}", p.value / scale);
                    t.push(vec![
                        v.clone(),
                        m.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        "false".into(),
                        String::new(),
                        String::new(),
                        e.clone(),
                    ]);
                }
            }
        }
    }
    t.write(&path_in(out, "spectrum")?)?;
    println!(
        "wrote spectrum.csv ({} points, {} failed evaluations)",
        result.points.len(),
        failures
    );
    Ok(())
}

/// Nonlinear couplings over a range of coupler biases.
pub fn scan(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let sys = res.system()?;
    let s = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("the scan command needs a [scan] section".into()))?;
    let grid = GridSection {
        lo: s.lo,
        hi: s.hi,
        n_points: s.n_points,
    }
    .values()?;
    let labels = config::label_set(s.labels.as_ref(), sys.qubits.len())?;
    subspaces(res)?;
    let phis: Vec<f64> = grid.iter().map(|p| TAU * p).collect();
    let tables: Vec<CouplingTable> = bench::coupling_scan(&sys, &labels, &phis, &res.numerics)?;
    let mut header = vec!["phi_cx[2pi]", "label", "g[E_L1]", "g[E_Ltc]"];
    if res.e_l_ghz.is_some() {
        header.push("g[MHz]");
    }
    let mut t = Table::new(comments(res, "scan"), &header);
    for (p, table) in grid.iter().zip(&tables) {
        for (label, g) in &table.entries {
            let mut row = vec![num(*p), label_string(label), num(*g), num(g / sys.coupler.e_ltc)];
            if let Some(m) = mhz(res, *g) {
                row.push(num(m));
            }
            t.push(row);
        }
    }
    t.write(&path_in(out, "scan")?)?;
    println!("wrote scan.csv ({} points)", grid.len());
    Ok(())
}

/// Smallest series cutoff meeting the requested error; prints the cutoff.
pub fn truncation(cfg: &Config, res: &Resolved, out: &Path) -> Result<(), CliError> {
    let s = cfg
        .truncation
        .as_ref()
        .ok_or_else(|| CliError::Config("the truncation command needs a [truncation] section".into()))?;
    let beta = s.beta_c.unwrap_or(res.coupler.beta_c);
    let zeta = s.zeta_c.unwrap_or(res.coupler.zeta_c);
    let nu = coupler::min_nu_for_error(beta, zeta, s.epsilon)?;
    let bound = coupler::truncation_bound(beta, zeta, nu)?;
    let (r0, r1) = coupler::truncation_bound_parts(beta, nu)?;
    let mut t = Table::new(
        comments(res, "truncation"),
        &["beta_c", "zeta_c", "epsilon[E_Ltc]", "nu_max", "bound[E_Ltc]", "R0[E_Ltc]", "R1[E_Ltc]"],
    );
    t.push(vec![
        num(beta),
        num(zeta),
        num(s.epsilon),
        nu.to_string(),
        num(bound),
        num(r0),
        num(r1),
    ]);
    t.write(&path_in(out, "truncation")?)?;
    println!("{nu}");
    Ok(())
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

/// Runs the built-in oracle cross-checks on the configured system.
pub fn validate(res: &Resolved, out: &Path) -> Result<bool, CliError> {
    let c = res.coupler;
    let n = &res.numerics;
    let mut checks = Vec::new();

    let t = (
        coupler::min_nu_for_error(0.75, 0.25, 1e-3)?,
        coupler::min_nu_for_error(0.95, 0.25, 1e-3)?,
    );
    checks.push(check("truncation_thresholds", t == (18, 187), format!("{t:?} (want (18, 187))")));

    let series = coupler::b_coeffs(c.beta_c, c.zeta_c, n.nu_max, n.mu_max)?;
    let slack = coupler::truncation_bound(c.beta_c, c.zeta_c, n.nu_max)? + 1e-10;
    let mut worst: f64 = 0.0;
    for i in 0..32 {
        let phi = TAU * i as f64 / 32.0;
        let direct = coupler::u_min(c.beta_c, phi, 4 * n.nu_max)? + coupler::u_zpe_harmonic(c.beta_c, c.zeta_c, phi)?;
        worst = worst.max((coupler::eg_eval(&series, phi) - direct).abs());
    }
    checks.push(check(
        "series_vs_closed_form",
        worst <= slack,
        format!("max |diff| = {worst:.3e}, allowed {slack:.3e}"),
    ));

    let fp = series.footprint();
    let fb = coupler::footprint_bound(c.beta_c, c.zeta_c)?;
    checks.push(check(
        "footprint_bound",
        fp <= fb + slack,
        format!("sum |B_nu| = {fp:.6e} <= {fb:.6e}"),
    ));

    let phi = c.phi_cx + 0.3;
    let h = 1e-3;
    let e = |x: f64| coupler::eg_exact(&c, x, n.coupler_basis, 1).map(|v| v[0]);
    let (em, e0, ep) = (e(phi - h)?, e(phi)?, e(phi + h)?);
    let fd = ((ep - em) / (2.0 * h), (ep - 2.0 * e0 + em) / (h * h));
    let (d1, d2) = coupler::eg_derivs_numeric(&c, phi, n.coupler_basis)?;
    let rel = ((d1 - fd.0).abs() / d1.abs().max(1e-12)).max((d2 - fd.1).abs() / d2.abs().max(1e-12));
    checks.push(check(
        "derivatives_vs_finite_difference",
        rel <= 1e-4,
        format!("max relative difference {rel:.3e}"),
    ));

    if res.qubits.len() >= 2 {
        let sys = res.system()?;
        let q = &sys.qubits;
        let identical = q.iter().all(|x| *x == q[0]) && q[0].phi_jx == 0.0;
        if identical {
            let sub = projection::qubit_subspace(&q[0], n.qubit_basis)?;
            let subs = vec![sub.clone(); 2];
            let labels = projection::LabelSet::Explicit(vec![projection::parse_label("xx")?]);
            let g = projection::couplings(&series, &subs, &[q[0].alpha_j; 2], c.phi_cx, &labels, c.e_ltc)?.entries[0].1;
            let eg = |x: f64| coupler::eg_eval(&series, x);
            let quad = projection::gxx_quadrature(eg, &sub, q[0].alpha_j, c.phi_cx, c.e_ltc)?;
            let rel = (quad - g).abs() / g.abs().max(1e-300);
            checks.push(check(
                "gxx_quadrature_vs_couplings",
                rel <= 1e-6,
                format!("g_xx = {g:.6e}, quadrature {quad:.6e}, relative {rel:.2e}"),
            ));
        }
    }

    let mut t = Table::new(comments(res, "validate"), &["check", "status", "detail"]);
    let mut all = true;
    for ch in &checks {
        let status = if ch.pass { "PASS" } else { "FAIL" };
        all &= ch.pass;
        println!("{status} {}: {}", ch.name, ch.detail);
        t.push(vec![ch.name.into(), status.into(), ch.detail.clone()]);
    }
    t.write(&path_in(out, "validate")?)?;
    Ok(all)
}
