//! Configuration file schema and conversion to library parameters.
//!
//! Fluxes in the file are in units of `2π`; energies are in the global unit
//! `E_L1` (the first qubit's inductive energy) or, for coupler-only commands,
//! in `E_L̃c`.

use std::f64::consts::TAU;
use std::path::Path;

use nlcoupler::bench::{Axis, Method, Numerics, System};
use nlcoupler::coupler::CouplerParams;
use nlcoupler::oscillator::LanczosOptions;
use nlcoupler::projection::{parse_label, LabelSet, QubitParams, Theory};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Magnetic flux quantum `h/2e` in webers.
pub const PHI0: f64 = 2.067_833_848_461_929e-15;
/// Elementary charge in coulombs.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant in joule seconds.
pub const PLANCK: f64 = 6.626_070_15e-34;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: u32,
    pub coupler: CouplerSection,
    #[serde(default, rename = "qubit")]
    pub qubits: Vec<QubitSection>,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub units: UnitsSection,
    pub series: Option<GridSection>,
    pub eg: Option<GridSection>,
    pub derivs: Option<GridSection>,
    pub couplings: Option<CouplingsSection>,
    pub sweep: Option<SweepSection>,
    pub scan: Option<ScanSection>,
    pub truncation: Option<TruncationSection>,
}

/// Either `{beta_c, zeta_c, e_ratio}` or physical `{l_c, c, i_c}` (SI).
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSection {
    pub beta_c: Option<f64>,
    pub zeta_c: Option<f64>,
    /// `E_L̃c / E_L1`.
    pub e_ratio: Option<f64>,
    pub l_c: Option<f64>,
    pub c: Option<f64>,
    pub i_c: Option<f64>,
    #[serde(default)]
    pub phi_cx: f64,
}

/// Either `{beta_j, zeta_j, alpha_j, e_ratio}` or physical
/// `{l_j, c_j, i_j, m_j}` (SI).
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSection {
    pub beta_j: Option<f64>,
    pub zeta_j: Option<f64>,
    pub alpha_j: Option<f64>,
    /// `E_Lj / E_L1`.
    pub e_ratio: Option<f64>,
    pub l_j: Option<f64>,
    pub c_j: Option<f64>,
    pub i_j: Option<f64>,
    pub m_j: Option<f64>,
    #[serde(default)]
    pub phi_jx: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub nu_max: usize,
    pub mu_max: usize,
    pub qubit_basis: usize,
    pub coupler_basis: usize,
    pub dims: Vec<usize>,
    pub lanczos_tol: f64,
    pub seed: u64,
    /// Worker threads; 0 means the runtime default.
    pub threads: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let n = Numerics::default();
        Self {
            nu_max: n.nu_max,
            mu_max: n.mu_max,
            qubit_basis: n.qubit_basis,
            coupler_basis: n.coupler_basis,
            dims: n.exact_dims,
            lanczos_tol: n.lanczos.tol,
            seed: n.lanczos.seed,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    /// `E_L1 / h` in GHz, used only for MHz columns.
    pub e_l_ghz: Option<f64>,
}

/// Uniform grid in units of `2π`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl GridSection {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !(self.lo <= self.hi) || self.n_points == 0 || (self.n_points == 1 && self.lo != self.hi) {
            return Err(CliError::Config(format!(
                "grid needs lo <= hi and n_points >= 1, got [{}, {}] x {}",
                self.lo, self.hi, self.n_points
            )));
        }
        let n = self.n_points;
        Ok((0..n)
            .map(|i| if n == 1 { self.lo } else { self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64 })
            .collect())
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsSection {
    /// `"all"` or a list of label strings such as `"xz"`.
    pub labels: Option<Labels>,
    #[serde(default)]
    pub pc_basis: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Labels {
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
}

fn default_methods() -> Vec<String> {
    ["exact", "NA", "LA", "LN"].map(String::from).to_vec()
}

fn default_levels() -> usize {
    6
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    pub labels: Option<Labels>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub epsilon: f64,
    pub beta_c: Option<f64>,
    pub zeta_c: Option<f64>,
}

/// Circuit values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalCoupler {
    pub l_c: f64,
    pub c: f64,
    pub i_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalQubit {
    pub l_j: f64,
    pub c_j: f64,
    pub i_j: f64,
    pub m_j: f64,
}

/// Dimensionless parameters derived from a physical circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct Dimensionless {
    pub beta_c: f64,
    pub zeta_c: f64,
    /// `E_L̃c / E_L1`.
    pub e_ratio_c: f64,
    /// `(β_j, ζ_j, α_j, E_Lj/E_L1)`.
    pub qubits: Vec<(f64, f64, f64, f64)>,
    /// `E_L1 / h` in GHz.
    pub e_l1_ghz: f64,
}

/// `E_L = (Φ0/2π)²/L` in joules.
pub fn inductive_energy(l: f64) -> f64 {
    (PHI0 / TAU).powi(2) / l
}

/// `ζ = (2πe/Φ0) √(L/C)`.
pub fn impedance_param(l: f64, c: f64) -> f64 {
    TAU * E_CHARGE / PHI0 * (l / c).sqrt()
}

/// `β = 2π L I_c / Φ0`.
pub fn nonlinearity(l: f64, i_c: f64) -> f64 {
    TAU * l * i_c / PHI0
}

/// Converts circuit values to the dimensionless parameters, using the
/// rescaled coupler inductance `L̃_c = L_c − Σ_j α_j M_j`.
pub fn from_physical(coupler: &PhysicalCoupler, qubits: &[PhysicalQubit]) -> Result<Dimensionless, CliError> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(CliError::Config(format!("{name} must be positive, got {v}")))
        }
    };
    positive("coupler l_c", coupler.l_c)?;
    positive("coupler c", coupler.c)?;
    positive("coupler i_c", coupler.i_c)?;
    if qubits.is_empty() {
        return Err(CliError::Config("physical parameters need at least one qubit".into()));
    }
    let mut l_tilde = coupler.l_c;
    for (j, q) in qubits.iter().enumerate() {
        positive(&format!("qubit {j} l_j"), q.l_j)?;
        positive(&format!("qubit {j} c_j"), q.c_j)?;
        if !(q.i_j >= 0.0 && q.m_j.is_finite()) {
            return Err(CliError::Config(format!("qubit {j}: i_j must be >= 0 and m_j finite")));
        }
        l_tilde -= q.m_j / q.l_j * q.m_j;
    }
    if l_tilde <= 0.0 {
        return Err(CliError::Config(format!(
            "rescaled coupler inductance L_c - sum(alpha_j M_j) = {l_tilde:e} H is not positive"
        )));
    }
    let beta_c = nonlinearity(l_tilde, coupler.i_c);
    if beta_c >= 1.0 {
        return Err(CliError::Config(format!(
            "beta_c = {beta_c} >= 1: the coupler potential is not monostable"
        )));
    }
    let l1 = qubits[0].l_j;
    Ok(Dimensionless {
        beta_c,
        zeta_c: impedance_param(l_tilde, coupler.c),
        e_ratio_c: l1 / l_tilde,
        qubits: qubits
            .iter()
            .map(|q| (nonlinearity(q.l_j, q.i_j), impedance_param(q.l_j, q.c_j), q.m_j / q.l_j, l1 / q.l_j))
            .collect(),
        e_l1_ghz: inductive_energy(l1) / PLANCK / 1e9,
    })
}

/// Everything a command needs, resolved from the file plus overrides.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub coupler: CouplerParams,
    pub qubits: Vec<QubitParams>,
    pub numerics: Numerics,
    pub threads: Option<usize>,
    pub e_l_ghz: Option<f64>,
    pub physical: bool,
}

impl Resolved {
    pub fn system(&self) -> Result<System, CliError> {
        if self.qubits.is_empty() {
            return Err(CliError::Config("this command needs at least one [[qubit]] section".into()));
        }
        Ok(System {
            coupler: self.coupler,
            qubits: self.qubits.clone(),
        })
    }

    /// `# key = value` lines describing the resolved parameters.
    pub fn echo(&self) -> Vec<String> {
        let c = &self.coupler;
        let n = &self.numerics;
        let mut out = vec![
            format!("schema = {SCHEMA}"),
            format!("parameterization = {}", if self.physical { "physical" } else { "dimensionless" }),
            format!(
                "coupler beta_c = {} zeta_c = {} e_ltc[E_L1] = {} phi_cx[2pi] = {}",
                fmt_num(c.beta_c),
                fmt_num(c.zeta_c),
                fmt_num(c.e_ltc),
                fmt_num(c.phi_cx / TAU)
            ),
        ];
        for (j, q) in self.qubits.iter().enumerate() {
            out.push(format!(
                "qubit {j} beta_j = {} zeta_j = {} alpha_j = {} e_lj[E_L1] = {} phi_jx[2pi] = {}",
                fmt_num(q.beta_j),
                fmt_num(q.zeta_j),
                fmt_num(q.alpha_j),
                fmt_num(q.e_lj),
                fmt_num(q.phi_jx / TAU)
            ));
        }
        out.push(format!(
            "numerics nu_max = {} mu_max = {} qubit_basis = {} coupler_basis = {} dims = {:?} lanczos_tol = {} seed = {}",
            n.nu_max,
            n.mu_max,
            n.qubit_basis,
            n.coupler_basis,
            n.exact_dims,
            fmt_num(n.lanczos.tol),
            n.lanczos.seed
        ));
        if let Some(g) = self.e_l_ghz {
            out.push(format!("units E_L1/h[GHz] = {}", fmt_num(g)));
        }
        out
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nu_max: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub threads: Option<usize>,
}

pub fn load(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    let cfg: Config = toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    if cfg.schema != SCHEMA {
        return Err(CliError::Config(format!("unsupported schema {} (expected {SCHEMA})", cfg.schema)));
    }
    Ok(cfg)
}

fn require(v: Option<f64>, what: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what}")))
}

pub fn resolve(cfg: &Config, ov: &Overrides) -> Result<Resolved, CliError> {
    let c = &cfg.coupler;
    let c_phys = [c.l_c, c.c, c.i_c].iter().any(Option::is_some);
    let c_dim = [c.beta_c, c.zeta_c, c.e_ratio].iter().any(Option::is_some);
    if c_phys && c_dim {
        return Err(CliError::Config(
            "coupler mixes physical (l_c, c, i_c) and dimensionless (beta_c, zeta_c, e_ratio) keys".into(),
        ));
    }
    let mut q_phys = Vec::new();
    for (j, q) in cfg.qubits.iter().enumerate() {
        let p = [q.l_j, q.c_j, q.i_j, q.m_j].iter().any(Option::is_some);
        let d = [q.beta_j, q.zeta_j, q.alpha_j, q.e_ratio].iter().any(Option::is_some);
        if p && d {
            return Err(CliError::Config(format!(
                "qubit {j} mixes physical (l_j, c_j, i_j, m_j) and dimensionless keys"
            )));
        }
        q_phys.push(p);
    }
    if q_phys.iter().any(|&p| p != c_phys) {
        return Err(CliError::Config(
            "either every component is given in physical units or none is".into(),
        ));
    }
    let phi_cx = TAU * c.phi_cx;
    let (coupler, qubits, ghz) = if c_phys {
        let pc = PhysicalCoupler {
            l_c: require(c.l_c, "coupler l_c")?,
            c: require(c.c, "coupler c")?,
            i_c: require(c.i_c, "coupler i_c")?,
        };
        let pq = cfg
            .qubits
            .iter()
            .enumerate()
            .map(|(j, q)| {
                Ok(PhysicalQubit {
                    l_j: require(q.l_j, &format!("qubit {j} l_j"))?,
                    c_j: require(q.c_j, &format!("qubit {j} c_j"))?,
                    i_j: require(q.i_j, &format!("qubit {j} i_j"))?,
                    m_j: q.m_j.unwrap_or(0.0),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let d = from_physical(&pc, &pq)?;
        let coupler = CouplerParams {
            beta_c: d.beta_c,
            zeta_c: d.zeta_c,
            e_ltc: d.e_ratio_c,
            phi_cx,
        };
        let qubits = d
            .qubits
            .iter()
            .zip(&cfg.qubits)
            .map(|(&(beta_j, zeta_j, alpha_j, e_lj), q)| QubitParams {
                beta_j,
                zeta_j,
                e_lj,
                phi_jx: TAU * q.phi_jx,
                alpha_j,
            })
            .collect();
        (coupler, qubits, Some(d.e_l1_ghz))
    } else {
        let coupler = CouplerParams {
            beta_c: require(c.beta_c, "coupler beta_c")?,
            zeta_c: require(c.zeta_c, "coupler zeta_c")?,
            e_ltc: c.e_ratio.unwrap_or(1.0),
            phi_cx,
        };
        let qubits = cfg
            .qubits
            .iter()
            .enumerate()
            .map(|(j, q)| {
                Ok(QubitParams {
                    beta_j: require(q.beta_j, &format!("qubit {j} beta_j"))?,
                    zeta_j: require(q.zeta_j, &format!("qubit {j} zeta_j"))?,
                    e_lj: q.e_ratio.unwrap_or(1.0),
                    phi_jx: TAU * q.phi_jx,
                    alpha_j: require(q.alpha_j, &format!("qubit {j} alpha_j"))?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        (coupler, qubits, None)
    };
    coupler.validate().map_err(|e| CliError::Config(e.to_string()))?;
    for q in &qubits {
        q.validate().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let n = &cfg.numerics;
    let numerics = Numerics {
        nu_max: ov.nu_max.unwrap_or(n.nu_max),
        mu_max: n.mu_max,
        qubit_basis: n.qubit_basis,
        coupler_basis: n.coupler_basis,
        exact_dims: ov.dims.clone().unwrap_or_else(|| n.dims.clone()),
        lanczos: LanczosOptions {
            tol: n.lanczos_tol,
            seed: n.seed,
            ..LanczosOptions::default()
        },
    };
    let threads = ov.threads.or((n.threads > 0).then_some(n.threads));
    Ok(Resolved {
        coupler,
        qubits,
        numerics,
        threads,
        e_l_ghz: cfg.units.e_l_ghz.or(ghz),
        physical: c_phys,
    })
}

pub fn parse_axis(s: &str) -> Result<Axis, CliError> {
    Ok(match s {
        "beta_j" => Axis::BetaJ,
        "phi_cx" => Axis::PhiCx,
        "zeta_c" => Axis::ZetaC,
        "alpha" => Axis::Alpha,
        "beta_c" => Axis::BetaC,
        _ => {
            return Err(CliError::Config(format!(
                "unknown sweep axis {s:?} (beta_j, phi_cx, zeta_c, alpha, beta_c)"
            )))
        }
    })
}

pub fn parse_method(s: &str) -> Result<Method, CliError> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "exact" => Method::Exact,
        "na" => Method::Bo(Theory::Na),
        "la" => Method::Bo(Theory::La),
        "ln" => Method::Bo(Theory::Ln),
        _ => return Err(CliError::Config(format!("unknown method {s:?} (exact, NA, LA, LN)"))),
    })
}

pub fn label_set(labels: Option<&Labels>, k: usize) -> Result<LabelSet, CliError> {
    match labels {
        None => Ok(LabelSet::All),
        Some(Labels::Keyword(s)) if s == "all" => Ok(LabelSet::All),
        Some(Labels::Keyword(s)) => Err(CliError::Config(format!("labels must be \"all\" or a list, got {s:?}"))),
        Some(Labels::List(v)) => {
            let parsed = v
                .iter()
                .map(|s| parse_label(s).map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(bad) = parsed.iter().find(|l| l.len() != k) {
                return Err(CliError::Config(format!(
                    "label of length {} does not match {k} qubits",
                    bad.len()
                )));
            }
            Ok(LabelSet::Explicit(parsed))
        }
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}
