//! Flag/config-file merging and validation into a model run configuration.
//!
//! Precedence is flags > `--config` file > defaults. The config file holds
//! `key = value` lines; `#` starts a comment. Keys are the long flag names.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use qjc_core::fock::TruncatedFockSpace;
use qjc_core::models::ModelKind;
use qjc_core::params::{ModelParams, Phi, QesCoupling};

use crate::CliError;

pub const DEFAULT_CUTOFF: usize = 64;
pub const DEFAULT_GUARD: usize = 8;

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// mandal | jcm | extended | h12 | ht
    #[arg(long)]
    pub model: Option<String>,
    /// Photon-transfer order (extended only).
    #[arg(long)]
    pub k: Option<usize>,
    /// Lower-left sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    #[arg(long = "hbar-omega", allow_hyphen_values = true)]
    pub hbar_omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// QES coupling with c = ĉ = −θ/(N+2) (h12, ht).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long = "c-hat", allow_hyphen_values = true)]
    pub c_hat: Option<f64>,
    /// One-photon couplings of h12.
    #[arg(long, allow_hyphen_values = true)]
    pub rho1: Option<f64>,
    #[arg(long = "rho1-hat", allow_hyphen_values = true)]
    pub rho1_hat: Option<f64>,
    /// Highest upper photon number N of the QES subspace (h12, ht).
    #[arg(long = "N")]
    pub n_upper: Option<usize>,
    /// Coefficients of P(n̂) in ascending powers, comma separated (extended only).
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Fock cutoff D.
    #[arg(long = "D")]
    pub cutoff: Option<usize>,
    /// Guard band g.
    #[arg(long = "g")]
    pub guard: Option<usize>,
    /// key=value file of defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub space: TruncatedFockSpace,
}

const KEYS: [&str; 15] = [
    "model",
    "k",
    "phi",
    "eps",
    "hbar-omega",
    "rho",
    "theta",
    "c",
    "c-hat",
    "rho1",
    "rho1-hat",
    "N",
    "p",
    "D",
    "g",
];

/// Merged string values: flags override the config file.
struct Merged {
    values: BTreeMap<&'static str, String>,
}

impl Merged {
    fn new(args: &ModelArgs) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            for (no, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!("--config line {}: expected key = value", no + 1))
                })?;
                let k = k.trim().trim_start_matches("--");
                let key = KEYS.iter().find(|&&known| known == k).ok_or_else(|| {
                    CliError::Usage(format!("--config line {}: unknown key '{k}'", no + 1))
                })?;
                values.insert(*key, v.trim().trim_matches('"').to_string());
            }
        }
        let flags: [(&'static str, Option<String>); 15] = [
            ("model", args.model.clone()),
            ("k", args.k.map(|x| x.to_string())),
            ("phi", args.phi.clone()),
            ("eps", args.eps.map(|x| x.to_string())),
            ("hbar-omega", args.hbar_omega.map(|x| x.to_string())),
            ("rho", args.rho.map(|x| x.to_string())),
            ("theta", args.theta.map(|x| x.to_string())),
            ("c", args.c.map(|x| x.to_string())),
            ("c-hat", args.c_hat.map(|x| x.to_string())),
            ("rho1", args.rho1.map(|x| x.to_string())),
            ("rho1-hat", args.rho1_hat.map(|x| x.to_string())),
            ("N", args.n_upper.map(|x| x.to_string())),
            ("p", args.p.clone()),
            ("D", args.cutoff.map(|x| x.to_string())),
            ("g", args.guard.map(|x| x.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k, v);
            }
        }
        Ok(Self { values })
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Usage(format!("--{key}: cannot parse '{v}'")))
            })
            .transpose()
    }
}

fn parse_phi(s: &str) -> Result<Phi, CliError> {
    match s.trim() {
        "1" | "+1" | "+" => Ok(Phi::Plus),
        "-1" | "-" => Ok(Phi::Minus),
        other => Err(CliError::Usage(format!(
            "--phi must be +1 or -1, got '{other}'"
        ))),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--p: cannot parse '{t}'")))
        })
        .collect()
}

fn reject(m: &Merged, keys: &[&str], model: ModelKind) -> Result<(), CliError> {
    for key in keys {
        if m.has(key) {
            return Err(CliError::Usage(format!(
                "--{key} does not apply to --model {}",
                model.name()
            )));
        }
    }
    Ok(())
}

impl ModelArgs {
    /// Resolves the run configuration; `fallback` is used when no model is given.
    pub fn resolve(&self, fallback: Option<ModelKind>) -> Result<RunConfig, CliError> {
        let m = Merged::new(self)?;
        let model = match m.values.get("model") {
            Some(name) => ModelKind::parse(name)
                .ok_or_else(|| CliError::Usage(format!("--model: unknown model '{name}'")))?,
            None => fallback.ok_or_else(|| CliError::Usage("--model is required".into()))?,
        };
        const QES_KEYS: [&str; 6] = ["theta", "c", "c-hat", "N", "rho1", "rho1-hat"];
        match model {
            ModelKind::Mandal | ModelKind::Jcm => {
                reject(&m, &QES_KEYS, model)?;
                reject(&m, &["k", "p", "phi"], model)?;
            }
            ModelKind::Extended => reject(&m, &QES_KEYS, model)?,
            ModelKind::Ht => reject(&m, &["k", "p", "rho1", "rho1-hat"], model)?,
            ModelKind::H12 => reject(&m, &["k", "p"], model)?,
        }
        if m.has("theta") && (m.has("c") || m.has("c-hat")) {
            return Err(CliError::Usage("--theta conflicts with --c/--c-hat".into()));
        }
        if m.has("c") != m.has("c-hat") {
            let missing = if m.has("c") { "c-hat" } else { "c" };
            return Err(CliError::Usage(format!(
                "--{missing} is required together with --c/--c-hat"
            )));
        }
        if m.has("rho1") != m.has("rho1-hat") {
            let missing = if m.has("rho1") { "rho1-hat" } else { "rho1" };
            return Err(CliError::Usage(format!(
                "--{missing} is required together with --rho1/--rho1-hat"
            )));
        }

        let eps = m.get("eps")?.unwrap_or(1.0);
        let rho = m.get("rho")?.unwrap_or(0.0);
        let hbar_omega = m.get("hbar-omega")?.unwrap_or(1.0);
        let phi = match m.values.get("phi") {
            Some(s) => parse_phi(s)?,
            None => Phi::Plus,
        };
        let mut params = match model {
            ModelKind::Mandal => ModelParams::extended(1, Phi::Minus, eps, rho),
            ModelKind::Jcm => ModelParams::extended(1, Phi::Plus, eps, rho),
            ModelKind::Extended => {
                let k = m.get("k")?.unwrap_or(1);
                let p = match m.values.get("p") {
                    Some(s) => parse_list(s)?,
                    None => Vec::new(),
                };
                ModelParams::extended(k, phi, eps, rho).with_p(p)
            }
            ModelKind::H12 | ModelKind::Ht => {
                let n_upper = m.get("N")?.unwrap_or(1);
                let mut p = ModelParams::qes(n_upper, eps, rho, m.get("theta")?.unwrap_or(0.0))
                    .with_phi(phi);
                if let (Some(c), Some(c_hat)) = (m.get("c")?, m.get("c-hat")?) {
                    p.qes = QesCoupling::Explicit { c, c_hat };
                }
                if let (Some(a), Some(b)) = (m.get("rho1")?, m.get("rho1-hat")?) {
                    p.linear = Some((a, b));
                }
                p
            }
        }
        .with_hbar_omega(hbar_omega);
        if model == ModelKind::Mandal || model == ModelKind::Jcm {
            params.p_coeffs.clear();
        }
        match model {
            ModelKind::H12 | ModelKind::Ht => params.validate_qes()?,
            _ => params.validate()?,
        }
        let cutoff = m.get("D")?.unwrap_or(DEFAULT_CUTOFF);
        let guard = m.get("g")?.unwrap_or(DEFAULT_GUARD);
        let space = TruncatedFockSpace::new(cutoff, guard)?;
        Ok(RunConfig {
            model,
            params,
            space,
        })
    }
}
