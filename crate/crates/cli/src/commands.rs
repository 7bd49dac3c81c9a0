use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_complex::Complex64 as c64;
use serde_json::{json, Map, Value};

use qjc_core::closed_form::{
    full_algebraic_spectrum, guard_weight, rho_independent_levels, Branch, DoubletBlock, LevelLabel,
};
use qjc_core::flow::{default_levels, sweep, Sweep, SweepParam, SweepSpec};
use qjc_core::fock::{Spin, SpinFockOperator, TruncatedFockSpace};
use qjc_core::linalg;
use qjc_core::models::ModelKind;
use qjc_core::params::{ModelParams, Phi, QesCoupling};
use qjc_core::poly::EnergyPolynomial;
use qjc_core::polyrep::{gauge_transform_ht, gauge_transform_mandal};
use qjc_core::qes::{algebraic_spectrum, restricted_trace};
use qjc_core::recurrence::{reconstruct_eigenvector, truncation_spectrum, SeriesState};
use qjc_core::symmetry::{
    check_hermitian, check_pseudo_hermitian, check_pt, classify_spectrum, commutant_parity_sigma3,
    Eta, REALNESS_TOL, STRUCTURE_TOL,
};

use crate::config::{ModelArgs, RunConfig};
use crate::output::{emit, json_bytes, num, num_json, Table};
use crate::svg::{line_plot, Series};
use crate::CliError;

/// Guard-band weight below which a numeric eigenvector counts as exact.
const GUARD_WEIGHT_TOL: f64 = 1e-6;
/// Agreement required between polynomial-space and Fock-side spectra.
const CROSS_REP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    All,
    ClosedForm,
    Numeric,
    Qes,
    Recurrence,
}

impl Source {
    fn name(self) -> &'static str {
        match self {
            Source::All => "all",
            Source::ClosedForm => "closed-form",
            Source::Numeric => "numeric",
            Source::Qes => "qes",
            Source::Recurrence => "recurrence",
        }
    }
}

fn params_json(cfg: &RunConfig) -> Value {
    let p = &cfg.params;
    let mut m = Map::new();
    m.insert("model".into(), json!(cfg.model.name()));
    m.insert("eps".into(), num_json(p.eps));
    m.insert("hbar_omega".into(), num_json(p.hbar_omega));
    m.insert("rho".into(), num_json(p.rho));
    m.insert("phi".into(), json!(p.phi.as_i8()));
    match cfg.model {
        ModelKind::Extended => {
            m.insert("k".into(), json!(p.k));
            m.insert(
                "p".into(),
                Value::Array(p.p_coeffs.iter().map(|&x| num_json(x)).collect()),
            );
        }
        ModelKind::H12 | ModelKind::Ht => {
            m.insert("N".into(), json!(p.n_upper()));
            let (c, c_hat) = p.qes_couplings();
            if let Some(t) = p.theta() {
                m.insert("theta".into(), num_json(t));
            }
            m.insert("c".into(), num_json(c));
            m.insert("c_hat".into(), num_json(c_hat));
            if cfg.model == ModelKind::H12 {
                let (a, b) = p.linear_couplings();
                m.insert("rho1".into(), num_json(a));
                m.insert("rho1_hat".into(), num_json(b));
            }
        }
        _ => {}
    }
    m.insert("D".into(), json!(cfg.space.cutoff()));
    m.insert("g".into(), json!(cfg.space.guard()));
    Value::Object(m)
}

fn complex_json(z: c64) -> Value {
    json!({ "re": num_json(z.re), "im": num_json(z.im) })
}

#[derive(Debug, Clone)]
struct SpectrumRow {
    label: String,
    n: Option<usize>,
    branch: Option<&'static str>,
    value: c64,
    source: Source,
    residual: Option<f64>,
}

/// Residual of the closed-form doublet eigenvector inside the full matrix.
fn doublet_residual(h: &SpinFockOperator, block: &DoubletBlock, lambda: c64) -> f64 {
    let space = h.space();
    let m = block.matrix;
    let (u, l) = if m[0][1] != 0.0 {
        (c64::new(m[0][1], 0.0), lambda - m[0][0])
    } else if m[1][0] != 0.0 {
        (lambda - m[1][1], c64::new(m[1][0], 0.0))
    } else if (lambda - m[0][0]).norm() <= (lambda - m[1][1]).norm() {
        (c64::new(1.0, 0.0), c64::new(0.0, 0.0))
    } else {
        (c64::new(0.0, 0.0), c64::new(1.0, 0.0))
    };
    let mut v = vec![c64::new(0.0, 0.0); space.dim()];
    v[space.index(block.n, Spin::Up)] = u;
    v[space.index(block.n + block.k, Spin::Down)] = l;
    linalg::residual(h.matrix(), lambda, &v)
}

fn closed_form_rows(cfg: &RunConfig, h: &SpinFockOperator) -> Result<Vec<SpectrumRow>, CliError> {
    let singlets = rho_independent_levels(&cfg.params, &cfg.space)?;
    let mut rows = Vec::new();
    for l in full_algebraic_spectrum(&cfg.params, &cfg.space) {
        let row = match l.label {
            LevelLabel::Singlet(j) => SpectrumRow {
                label: l.label.to_string(),
                n: Some(j),
                branch: None,
                value: l.value,
                source: Source::ClosedForm,
                residual: singlets.iter().find(|s| s.j == j).map(|s| s.residual),
            },
            LevelLabel::Doublet { n, branch } => {
                let block = DoubletBlock::new(&cfg.params, n);
                SpectrumRow {
                    label: l.label.to_string(),
                    n: Some(n),
                    branch: Some(match branch {
                        Branch::I => "I",
                        Branch::II => "II",
                    }),
                    value: l.value,
                    source: Source::ClosedForm,
                    residual: Some(doublet_residual(h, &block, l.value)),
                }
            }
        };
        rows.push(row);
    }
    rows.sort_by(|a, b| linalg::cmp_complex(&a.value, &b.value));
    Ok(rows)
}

fn numeric_rows(h: &SpinFockOperator) -> Result<Vec<SpectrumRow>, CliError> {
    let mut pairs: Vec<_> = linalg::eigen_decompose(h.matrix())?
        .into_iter()
        .filter(|p| guard_weight(h.space(), &p.vector) < GUARD_WEIGHT_TOL)
        .collect();
    pairs.sort_by(|a, b| linalg::cmp_complex(&a.value, &b.value));
    Ok(pairs
        .into_iter()
        .enumerate()
        .map(|(i, p)| SpectrumRow {
            label: format!("numeric{i}"),
            n: None,
            branch: None,
            value: p.value,
            source: Source::Numeric,
            residual: Some(p.residual),
        })
        .collect())
}

fn qes_rows(cfg: &RunConfig) -> Result<Vec<SpectrumRow>, CliError> {
    let spec = algebraic_spectrum(&cfg.params, &cfg.space)?;
    Ok(spec
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| SpectrumRow {
            label: format!("qes{i}"),
            n: None,
            branch: None,
            value: p.energy,
            source: Source::Qes,
            residual: p.residual,
        })
        .collect())
}

fn recurrence_rows(cfg: &RunConfig) -> Result<Vec<SpectrumRow>, CliError> {
    let t = truncation_spectrum(&cfg.params)?;
    Ok(t.roots
        .iter()
        .enumerate()
        .map(|(i, r)| SpectrumRow {
            label: format!("recur{i}"),
            n: None,
            branch: None,
            value: r.value,
            source: Source::Recurrence,
            residual: reconstruct_eigenvector(&t.state, r.value, &cfg.space)
                .ok()
                .map(|rec| rec.residual),
        })
        .collect())
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, value_enum, default_value = "all")]
    pub source: Source,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let cfg = args.model.resolve(None)?;
    let h = cfg.model.build(&cfg.params, &cfg.space)?;
    let want = |s: Source| args.source == Source::All || args.source == s;
    let mut rows = Vec::new();
    match cfg.model {
        ModelKind::Mandal | ModelKind::Jcm | ModelKind::Extended => {
            if want(Source::ClosedForm) {
                rows.extend(closed_form_rows(&cfg, &h)?);
            }
        }
        ModelKind::Ht => {
            if want(Source::Qes) {
                rows.extend(qes_rows(&cfg)?);
            }
            if want(Source::Recurrence) {
                match recurrence_rows(&cfg) {
                    Ok(r) => rows.extend(r),
                    Err(e) if args.source == Source::All => eprintln!("recurrence skipped: {e}"),
                    Err(e) => return Err(e),
                }
            }
        }
        ModelKind::H12 => {}
    }
    if want(Source::Numeric) {
        rows.extend(numeric_rows(&h)?);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "--source {} is not available for --model {}",
            args.source.name(),
            cfg.model.name()
        )));
    }
    let bytes = match args.format {
        Format::Csv => {
            let mut t = Table::new(&["label", "n", "branch", "re", "im", "source", "residual"]);
            for r in &rows {
                t.push(vec![
                    r.label.clone(),
                    r.n.map(|n| n.to_string()).unwrap_or_default(),
                    r.branch.unwrap_or("").to_string(),
                    num(r.value.re),
                    num(r.value.im),
                    r.source.name().to_string(),
                    r.residual.map(num).unwrap_or_default(),
                ]);
            }
            t.to_bytes()?
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "label": r.label,
                        "n": r.n,
                        "branch": r.branch,
                        "re": num_json(r.value.re),
                        "im": num_json(r.value.im),
                        "source": r.source.name(),
                        "residual": r.residual.map(num_json),
                    })
                })
                .collect();
            json_bytes(&json!({
                "schema_version": 1,
                "command": "spectrum",
                "params": params_json(&cfg),
                "rows": list,
            }))?
        }
    };
    emit(args.output.as_deref(), &bytes)
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn check_json((ok, dev): (bool, f64)) -> Value {
    json!({ "ok": ok, "dev": num_json(dev) })
}

pub fn cmd_check(args: &CheckArgs) -> Result<(), CliError> {
    let cfg = args.model.resolve(None)?;
    let h = cfg.model.build(&cfg.params, &cfg.space)?;
    let (class, class_error) = match classify_spectrum(&h, REALNESS_TOL) {
        Ok(c) => (json!(c.class.name()), Value::Null),
        Err(e) => (Value::Null, json!(e.to_string())),
    };
    let report = json!({
        "schema_version": 1,
        "command": "check",
        "params": params_json(&cfg),
        "hermitian": check_json(check_hermitian(&h)),
        "pt": check_json(check_pt(&h)),
        "pseudo": {
            "sigma3": check_json(check_pseudo_hermitian(&h, &Eta::Sigma3)?),
            "parity": check_json(check_pseudo_hermitian(&h, &Eta::Parity)?),
            "parity_sigma3": check_json(check_pseudo_hermitian(&h, &Eta::ParitySigma3)?),
        },
        "commutant_parity_sigma3": num_json(commutant_parity_sigma3(&h)),
        "spectrum_class": class,
        "spectrum_error": class_error,
        "tolerances": {
            "structure": num_json(STRUCTURE_TOL),
            "realness": num_json(REALNESS_TOL),
        },
    });
    emit(args.output.as_deref(), &json_bytes(&report)?)
}

#[derive(Debug, Clone, Args)]
pub struct QesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn resolve_ht(model: &ModelArgs) -> Result<RunConfig, CliError> {
    let cfg = model.resolve(Some(ModelKind::Ht))?;
    if cfg.model != ModelKind::Ht {
        return Err(CliError::Usage(format!(
            "--model {} has no QES subspace; use ht",
            cfg.model.name()
        )));
    }
    Ok(cfg)
}

pub fn cmd_qes(args: &QesArgs) -> Result<(), CliError> {
    let cfg = resolve_ht(&args.model)?;
    let h = cfg.model.build(&cfg.params, &cfg.space)?;
    let spec = algebraic_spectrum(&cfg.params, &cfg.space)?;
    let leak = spec.subspace.invariance_leak(&h)?;
    let pairs: Vec<Value> = spec
        .pairs
        .iter()
        .map(|p| {
            json!({
                "re": num_json(p.energy.re),
                "im": num_json(p.energy.im),
                "residual": p.residual.map(num_json),
                "defective": p.defective,
            })
        })
        .collect();
    let sum: c64 = spec.energies().iter().sum();
    let report = json!({
        "schema_version": 1,
        "command": "qes",
        "params": params_json(&cfg),
        "subspace": {
            "upper_len": spec.subspace.upper_len,
            "lower_len": spec.subspace.lower_len,
            "dim": spec.subspace.dim(),
        },
        "leak": num_json(leak),
        "trace": num_json(restricted_trace(&cfg.params)),
        "eigenvalue_sum": complex_json(sum),
        "any_defective": spec.any_defective(),
        "eigenpairs": pairs,
    });
    emit(args.output.as_deref(), &json_bytes(&report)?)
}

#[derive(Debug, Clone, Args)]
pub struct RecurArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn poly_json(p: &EnergyPolynomial) -> Value {
    json!({
        "degree": p.degree(),
        "coeffs": p.to_f64_coeffs().into_iter().map(num_json).collect::<Vec<_>>(),
    })
}

pub fn cmd_recur(args: &RecurArgs) -> Result<(), CliError> {
    let cfg = resolve_ht(&args.model)?;
    let state = SeriesState::run(&cfg.params, 1.0)?;
    let comparison = state.compare_with_q().map(|c| {
        json!({
            "critical_degree": c.critical_degree,
            "q_degree": c.q_degree,
            "proportional": c.proportional,
            "q_divides_critical": c.q_divides_critical,
        })
    });
    let t = truncation_spectrum(&cfg.params)?;
    let roots: Vec<Value> = t
        .roots
        .iter()
        .map(|r| {
            let rec = reconstruct_eigenvector(&t.state, r.value, &cfg.space);
            json!({
                "re": num_json(r.value.re),
                "im": num_json(r.value.im),
                "condition": num_json(r.condition),
                "residual": rec.as_ref().ok().map(|x| num_json(x.residual)),
                "error": rec.err().map(|e| e.to_string()),
            })
        })
        .collect();
    let constraints: Vec<Value> = state
        .constraints()
        .iter()
        .map(|c| json!({ "j": c.j, "row": format!("{:?}", c.row).to_lowercase(), "poly": poly_json(&c.poly) }))
        .collect();
    let report = json!({
        "schema_version": 1,
        "command": "recur",
        "params": params_json(&cfg),
        "critical": state.critical().map(poly_json),
        "q_comparison": comparison,
        "constraints": constraints,
        "truncation": poly_json(&t.polynomial),
        "roots": roots,
    });
    emit(args.output.as_deref(), &json_bytes(&report)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamArg {
    Rho,
    Theta,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "rho")]
    pub param: ParamArg,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    pub to: f64,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    /// Number of doublets to track (singlets are always included).
    #[arg(long, default_value_t = 2)]
    pub doublets: usize,
    /// Fail on unresolved tracking ambiguity.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn sweep_table(s: &Sweep) -> Table {
    let mut t = Table::new(&["param_value", "level_label", "re", "im"]);
    for (i, &x) in s.grid.iter().enumerate() {
        for tr in &s.trajectories {
            t.push(vec![
                num(x),
                tr.label.clone(),
                num(tr.values[i].re),
                num(tr.values[i].im),
            ]);
        }
    }
    for e in &s.events {
        t.comment(format!(
            "event,{},{},{},{}",
            e.kind.name(),
            num(e.param),
            num(e.energy),
            e.labels.join("|")
        ));
    }
    for &x in &s.ambiguous {
        t.comment(format!("ambiguous,{}", num(x)));
    }
    if let Some(why) = &s.incomplete {
        t.comment(format!("INCOMPLETE {why}"));
    }
    t
}

fn sweep_svg(s: &Sweep, title: &str, extra: Vec<Series>) -> String {
    let xlabel = s.param.name();
    let mut series: Vec<Series> = s
        .trajectories
        .iter()
        .map(|tr| Series {
            label: tr.label.clone(),
            points: s
                .grid
                .iter()
                .zip(&tr.values)
                .map(|(&x, v)| {
                    (v.im.abs() <= REALNESS_TOL * v.norm().max(1.0)).then_some((x, v.re))
                })
                .collect(),
            dashed: false,
        })
        .collect();
    series.extend(extra);
    line_plot(title, xlabel, "E", &series)
}

/// Writes the sweep outputs and maps incompleteness to a failure.
fn finish_sweep(
    s: &Sweep,
    csv: Option<&Path>,
    svg: Option<(&Path, String)>,
) -> Result<(), CliError> {
    emit(csv, &sweep_table(s).to_bytes()?)?;
    if let Some((path, body)) = svg {
        std::fs::write(path, body)?;
    }
    if !s.ambiguous.is_empty() {
        eprintln!(
            "warning: level tracking ambiguous at {} grid interval(s)",
            s.ambiguous.len()
        );
    }
    match &s.incomplete {
        Some(why) => Err(CliError::Incomplete(why.clone())),
        None => Ok(()),
    }
}

fn sweep_spec(
    cfg: &RunConfig,
    param: SweepParam,
    lo: f64,
    hi: f64,
    steps: usize,
    doublets: usize,
    strict: bool,
) -> SweepSpec {
    SweepSpec {
        model: cfg.model,
        params: cfg.params.clone(),
        param,
        lo,
        hi,
        steps,
        levels: match cfg.model {
            ModelKind::Ht | ModelKind::H12 => Vec::new(),
            _ => default_levels(cfg.params.k, doublets),
        },
        strict,
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = args.model.resolve(None)?;
    let param = match args.param {
        ParamArg::Rho => SweepParam::Rho,
        ParamArg::Theta => {
            if cfg.model != ModelKind::Ht {
                return Err(CliError::Usage(format!(
                    "--param theta requires --model ht, got {}",
                    cfg.model.name()
                )));
            }
            if cfg.params.theta().is_none() {
                return Err(CliError::Usage(
                    "--param theta conflicts with --c/--c-hat".into(),
                ));
            }
            SweepParam::Theta
        }
    };
    let spec = sweep_spec(
        &cfg,
        param,
        args.from,
        args.to,
        args.steps,
        args.doublets,
        args.strict,
    );
    let s = sweep(&spec)?;
    let title = format!("{} levels", cfg.model.name());
    let svg = args
        .svg
        .as_deref()
        .map(|p| (p, sweep_svg(&s, &title, Vec::new())));
    finish_sweep(&s, args.output.as_deref(), svg)
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    /// 1: k=2, φ=+1; 2: k=2, φ=−1; 3: H_T θ-sweeps at ρ ∈ {0, 1, 2}.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 401)]
    pub steps: usize,
}

pub fn cmd_figures(args: &FiguresArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)?;
    let dir = &args.out_dir;
    let space =
        TruncatedFockSpace::new(crate::config::DEFAULT_CUTOFF, crate::config::DEFAULT_GUARD)?;
    match args.which {
        w @ (1 | 2) => {
            let phi = if w == 1 { Phi::Plus } else { Phi::Minus };
            let cfg = RunConfig {
                model: ModelKind::Extended,
                params: ModelParams::extended(2, phi, 1.0, 0.0),
                space,
            };
            let s = sweep(&sweep_spec(
                &cfg,
                SweepParam::Rho,
                0.0,
                2.0,
                args.steps,
                2,
                false,
            ))?;
            let title = format!("k = 2, eps = 1, phi = {}", phi.as_i8());
            let svg = dir.join(format!("fig{w}.svg"));
            finish_sweep(
                &s,
                Some(&dir.join(format!("fig{w}.csv"))),
                Some((&svg, sweep_svg(&s, &title, Vec::new()))),
            )
        }
        _ => {
            let mut first_err = None;
            for rho in [0.0, 1.0, 2.0] {
                let mut params = ModelParams::qes(1, 1.0, rho, 0.0);
                params.qes = QesCoupling::Theta(0.0);
                let cfg = RunConfig {
                    model: ModelKind::Ht,
                    params,
                    space,
                };
                let s = sweep(&sweep_spec(
                    &cfg,
                    SweepParam::Theta,
                    0.0,
                    3.0,
                    args.steps,
                    0,
                    false,
                ))?;
                let line = Series {
                    label: "E = -1/2".into(),
                    points: vec![Some((0.0, -0.5)), Some((3.0, -0.5))],
                    dashed: true,
                };
                let stem = format!("fig3_rho{rho}");
                let title = format!("H_T, N = 1, eps = 1, rho = {rho}");
                let svg = dir.join(format!("{stem}.svg"));
                let r = finish_sweep(
                    &s,
                    Some(&dir.join(format!("{stem}.csv"))),
                    Some((&svg, sweep_svg(&s, &title, vec![line]))),
                );
                if let Err(e) = r {
                    first_err.get_or_insert(e);
                }
            }
            first_err.map_or(Ok(()), Err)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PolyrepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Degree cap n of the mandal polynomial space (upper n−1, lower n).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn cmd_polyrep(args: &PolyrepArgs) -> Result<(), CliError> {
    let cfg = args.model.resolve(None)?;
    let op = match cfg.model {
        ModelKind::Mandal => gauge_transform_mandal(&cfg.params, args.n, args.mass)?,
        ModelKind::Ht => gauge_transform_ht(&cfg.params, args.mass)?,
        other => {
            return Err(CliError::Usage(format!(
                "--model {} has no polynomial representation; use mandal or ht",
                other.name()
            )))
        }
    };
    let poly = op.restriction_eigenvalues()?;
    let fock = linalg::eigenvalues(cfg.model.build(&cfg.params, &cfg.space)?.matrix())?;
    let deviation = linalg::match_into(&poly, &fock).unwrap_or(f64::INFINITY);
    let ok = op.leak() <= STRUCTURE_TOL && deviation <= CROSS_REP_TOL;
    let report = json!({
        "schema_version": 1,
        "command": "polyrep-check",
        "params": params_json(&cfg),
        "caps": [op.caps.0, op.caps.1],
        "mass": num_json(args.mass),
        "leak": num_json(op.leak()),
        "eigenvalues": poly.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "max_deviation": num_json(deviation),
        "tolerance": num_json(CROSS_REP_TOL),
        "ok": ok,
    });
    emit(args.output.as_deref(), &json_bytes(&report)?)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "polynomial and Fock spectra disagree: leak {:e}, deviation {deviation:e}",
            op.leak()
        )))
    }
}
