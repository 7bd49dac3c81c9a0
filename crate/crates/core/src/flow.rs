//! Parameter sweeps, eigenvalue trajectories and level events.
//!
//! Extended models are labeled intrinsically: each trajectory is one closed
//! form level (a singlet or one branch of a doublet) evaluated on the grid.
//! H_T levels carry no such labels; its algebraic eigenvalues are followed by
//! greedy nearest-neighbor matching against a linear extrapolation, halving
//! the step (up to ten times) whenever two distinct candidates compete.
//!
//! Crossings are sign changes of Re(E_a − E_b) between nonzero samples where
//! both levels are real, localized by bisection. Coalescences are located on
//! the doublet discriminant for extended models and on the onset of complex
//! eigenvalues for H_T.
//!
//! Past a coalescence the two branches are a complex-conjugate pair; neither
//! stays real.

use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{level_value, Branch, DoubletBlock, LevelLabel};
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::ModelKind;
use crate::params::{ModelParams, Phi, QesCoupling};
use crate::qes::InvariantSubspace;

/// Parameter tolerance for event localization.
pub const EVENT_TOL: f64 = 1e-8;
/// Discriminant bisection tolerance for extended-model coalescences.
pub const COALESCENCE_TOL: f64 = 1e-10;
pub const MAX_REFINEMENTS: u32 = 10;
const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Rho,
    Theta,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub model: ModelKind,
    pub params: ModelParams,
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Levels to follow for extended models; ignored for H_T.
    pub levels: Vec<LevelLabel>,
    /// Turn an unresolved tracking ambiguity into a failure.
    pub strict: bool,
}

/// The k singlets plus both branches of doublets 0..n_doublets.
pub fn default_levels(k: usize, n_doublets: usize) -> Vec<LevelLabel> {
    (0..k)
        .map(LevelLabel::Singlet)
        .chain(
            (0..n_doublets).flat_map(|n| {
                [Branch::I, Branch::II].map(|branch| LevelLabel::Doublet { n, branch })
            }),
        )
        .collect()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidSweep(format!("steps = {} < 2", self.steps)));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(Error::InvalidSweep(format!(
                "range [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        match self.model {
            ModelKind::Ht => {
                self.params.validate_qes()?;
                if self.param == SweepParam::Theta && self.params.theta().is_none() {
                    return Err(Error::InvalidSweep(
                        "theta sweep needs the theta convention".into(),
                    ));
                }
            }
            ModelKind::H12 => {
                return Err(Error::InvalidSweep(
                    "h12 has no algebraic spectrum to sweep".into(),
                ))
            }
            _ => {
                self.params.validate()?;
                if self.param == SweepParam::Theta {
                    return Err(Error::InvalidSweep("theta sweeps require model ht".into()));
                }
                if self.levels.is_empty() {
                    return Err(Error::InvalidSweep("no levels selected".into()));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = (self.hi - self.lo) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + h * i as f64
                }
            })
            .collect()
    }

    /// Model parameters at a grid value, with the model's fixed k and φ applied.
    pub fn params_at(&self, x: f64) -> ModelParams {
        let mut p = self.params.clone();
        match self.model {
            ModelKind::Mandal | ModelKind::Jcm => {
                p.k = 1;
                p.p_coeffs.clear();
                p.phi = if self.model == ModelKind::Mandal {
                    Phi::Minus
                } else {
                    Phi::Plus
                };
            }
            _ => {}
        }
        match self.param {
            SweepParam::Rho => p.rho = x,
            SweepParam::Theta => p.qes = QesCoupling::Theta(x),
        }
        p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub label: String,
    pub values: Vec<c64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Crossing,
    Coalescence,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Crossing => "crossing",
            EventKind::Coalescence => "coalescence",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowEvent {
    pub kind: EventKind,
    pub param: f64,
    pub energy: f64,
    pub labels: [String; 2],
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub param: SweepParam,
    /// Grid values actually completed.
    pub grid: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    pub events: Vec<FlowEvent>,
    /// Grid intervals where matching stayed ambiguous after all refinements.
    pub ambiguous: Vec<f64>,
    /// Set when the sweep stopped early; the data up to that point is kept.
    pub incomplete: Option<String>,
}

impl Sweep {
    pub fn trajectory(&self, label: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.label == label)
    }

    /// Largest |dRe E/dx| over real trajectory segments.
    pub fn max_slope(&self) -> f64 {
        let mut worst = 0.0f64;
        for t in &self.trajectories {
            for i in 1..self.grid.len().min(t.values.len()) {
                let (a, b) = (t.values[i - 1], t.values[i]);
                if is_real(a) && is_real(b) {
                    worst = worst.max(((b.re - a.re) / (self.grid[i] - self.grid[i - 1])).abs());
                }
            }
        }
        worst
    }
}

fn is_real(z: c64) -> bool {
    z.im.abs() <= REAL_TOL * z.norm().max(1.0)
}

pub fn sweep(spec: &SweepSpec) -> Result<Sweep> {
    spec.validate()?;
    match spec.model {
        ModelKind::Ht => sweep_ht(spec),
        _ => Ok(sweep_extended(spec)),
    }
}

/// θ-sweep of the H_T algebraic spectrum.
pub fn qes_theta_sweep(spec: &SweepSpec) -> Result<Sweep> {
    if spec.model != ModelKind::Ht || spec.param != SweepParam::Theta {
        return Err(Error::InvalidSweep(
            "theta sweep requires model ht and param theta".into(),
        ));
    }
    sweep(spec)
}

fn bisect(mut a: f64, mut b: f64, tol: f64, mut left: impl FnMut(f64) -> bool) -> f64 {
    // `left(x)` is true on the side of `a`
    while b - a > tol {
        let m = 0.5 * (a + b);
        if left(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn sweep_extended(spec: &SweepSpec) -> Sweep {
    let grid = spec.grid();
    let values: Vec<Vec<c64>> = grid
        .par_iter()
        .map(|&x| {
            let p = spec.params_at(x);
            spec.levels.iter().map(|&l| level_value(&p, l)).collect()
        })
        .collect();
    let trajectories: Vec<Trajectory> = spec
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| Trajectory {
            label: l.to_string(),
            values: values.iter().map(|row| row[i]).collect(),
        })
        .collect();

    let mut events = Vec::new();
    // crossings between every pair of real levels
    for a in 0..spec.levels.len() {
        for b in a + 1..spec.levels.len() {
            let (la, lb) = (spec.levels[a], spec.levels[b]);
            let diff = |x: f64| {
                let p = spec.params_at(x);
                (level_value(&p, la) - level_value(&p, lb)).re
            };
            for (x0, x1) in sign_changes(&grid, &trajectories[a].values, &trajectories[b].values) {
                let s0 = diff(x0).signum();
                let x = bisect(x0, x1, EVENT_TOL, |m| diff(m).signum() == s0);
                let p = spec.params_at(x);
                events.push(FlowEvent {
                    kind: EventKind::Crossing,
                    param: x,
                    energy: level_value(&p, la).re,
                    labels: [la.to_string(), lb.to_string()],
                    tolerance: EVENT_TOL,
                });
            }
        }
    }
    // coalescences on the discriminant of each tracked doublet
    let mut doublets: Vec<usize> = spec
        .levels
        .iter()
        .filter_map(|l| match l {
            LevelLabel::Doublet { n, .. } => Some(*n),
            LevelLabel::Singlet(_) => None,
        })
        .collect();
    doublets.dedup();
    for n in doublets {
        let disc = |x: f64| DoubletBlock::new(&spec.params_at(x), n).discriminant();
        for w in grid.windows(2) {
            let (d0, d1) = (disc(w[0]), disc(w[1]));
            if d0 != 0.0 && d1 != 0.0 && d0.signum() != d1.signum() {
                let x = bisect(w[0], w[1], COALESCENCE_TOL, |m| {
                    disc(m).signum() == d0.signum()
                });
                let block = DoubletBlock::new(&spec.params_at(x), n);
                events.push(FlowEvent {
                    kind: EventKind::Coalescence,
                    param: x,
                    energy: 0.5 * block.trace(),
                    labels: [Branch::I, Branch::II]
                        .map(|branch| LevelLabel::Doublet { n, branch }.to_string()),
                    tolerance: COALESCENCE_TOL,
                });
            }
        }
    }
    events.sort_by(|a, b| a.param.total_cmp(&b.param));
    Sweep {
        param: spec.param,
        grid,
        trajectories,
        events,
        ambiguous: Vec::new(),
        incomplete: None,
    }
}

/// Grid intervals where Re(a − b) changes sign between nonzero samples
/// with both levels real.
fn sign_changes(grid: &[f64], a: &[c64], b: &[c64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for i in 0..a.len().min(b.len()) {
        if !(is_real(a[i]) && is_real(b[i])) {
            last = None;
            continue;
        }
        let d = a[i].re - b[i].re;
        if d == 0.0 {
            continue;
        }
        if let Some((x0, d0)) = last {
            if d0.signum() != d.signum() {
                out.push((x0, grid[i]));
            }
        }
        last = Some((grid[i], d));
    }
    out
}

/// Algebraic eigenvalues of H_T on V_n at the given parameters.
pub fn qes_energies(params: &ModelParams) -> Result<Vec<c64>> {
    let sub = InvariantSubspace::standard(params.n_upper());
    let mut ev = linalg::eigenvalues(&sub.restricted_matrix(params))?;
    linalg::sort_complex(&mut ev);
    Ok(ev)
}

struct Tracker<'a> {
    spec: &'a SweepSpec,
    ambiguous: Vec<f64>,
}

/// Greedy assignment of candidates to predictions; returns the matched
/// values and whether any trajectory had two distinct competitors.
fn greedy_match(pred: &[c64], cand: &[c64]) -> (Vec<c64>, bool) {
    let mut pairs: Vec<(f64, usize, usize)> = pred
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            cand.iter()
                .enumerate()
                .map(move |(j, c)| ((p - c).norm(), i, j))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![c64::new(f64::NAN, f64::NAN); pred.len()];
    let (mut used_p, mut used_c) = (vec![false; pred.len()], vec![false; cand.len()]);
    for &(_, i, j) in &pairs {
        if !used_p[i] && !used_c[j] {
            used_p[i] = true;
            used_c[j] = true;
            out[i] = cand[j];
        }
    }
    let ambiguous = pred.iter().enumerate().any(|(i, p)| {
        let d1 = (p - out[i]).norm();
        cand.iter().any(|c| {
            let distinct = (c - out[i]).norm() > 1e-9 * c.norm().max(1.0);
            distinct && (p - c).norm() < 2.0 * d1
        })
    });
    (out, ambiguous)
}

impl Tracker<'_> {
    fn spectrum(&self, x: f64) -> Result<Vec<c64>> {
        qes_energies(&self.spec.params_at(x))
    }

    /// Advances `vals` (with slopes) from `a` to `b`, refining on ambiguity.
    fn advance(
        &mut self,
        a: f64,
        b: f64,
        vals: &[c64],
        slopes: &[c64],
        cand: Option<Vec<c64>>,
        depth: u32,
    ) -> Result<(Vec<c64>, Vec<c64>)> {
        let cand = match cand {
            Some(c) => c,
            None => self.spectrum(b)?,
        };
        let pred: Vec<c64> = vals
            .iter()
            .zip(slopes)
            .map(|(v, s)| v + s * (b - a))
            .collect();
        let (matched, ambiguous) = greedy_match(&pred, &cand);
        if ambiguous {
            if depth < MAX_REFINEMENTS {
                let m = 0.5 * (a + b);
                let (v_mid, s_mid) = self.advance(a, m, vals, slopes, None, depth + 1)?;
                return self.advance(m, b, &v_mid, &s_mid, Some(cand), depth + 1);
            }
            if self.spec.strict {
                return Err(Error::TrackingAmbiguity(b));
            }
            self.ambiguous.push(b);
        }
        let new_slopes = matched
            .iter()
            .zip(vals)
            .map(|(n, o)| (n - o) / (b - a))
            .collect();
        Ok((matched, new_slopes))
    }
}

fn sweep_ht(spec: &SweepSpec) -> Result<Sweep> {
    let grid = spec.grid();
    let spectra: Vec<Result<Vec<c64>>> = grid
        .par_iter()
        .map(|&x| qes_energies(&spec.params_at(x)))
        .collect();
    let first = match &spectra[0] {
        Ok(v) => v.clone(),
        Err(e) => return Err(Error::EigenSolver(e.to_string())),
    };
    let labels: Vec<String> = (0..first.len()).map(|i| format!("level{i}")).collect();
    let mut rows = vec![first.clone()];
    let mut slopes = vec![c64::new(0.0, 0.0); first.len()];
    let mut tracker = Tracker {
        spec,
        ambiguous: Vec::new(),
    };
    let mut incomplete = None;
    for i in 1..grid.len() {
        let cand = match &spectra[i] {
            Ok(c) => c.clone(),
            Err(e) => {
                incomplete = Some(e.to_string());
                break;
            }
        };
        let prev = rows.last().unwrap().clone();
        match tracker.advance(grid[i - 1], grid[i], &prev, &slopes, Some(cand), 0) {
            Ok((v, s)) => {
                rows.push(v);
                slopes = s;
            }
            Err(e) => {
                incomplete = Some(e.to_string());
                break;
            }
        }
    }
    let done = rows.len();
    let grid_done = grid[..done].to_vec();
    let trajectories: Vec<Trajectory> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| Trajectory {
            label: l.clone(),
            values: rows.iter().map(|r| r[i]).collect(),
        })
        .collect();
    let events = ht_events(spec, &grid_done, &rows, &labels)?;
    Ok(Sweep {
        param: spec.param,
        grid: grid_done,
        trajectories,
        events,
        ambiguous: tracker.ambiguous,
        incomplete,
    })
}

fn ht_events(
    spec: &SweepSpec,
    grid: &[f64],
    rows: &[Vec<c64>],
    labels: &[String],
) -> Result<Vec<FlowEvent>> {
    let mut events = Vec::new();
    let count = labels.len();
    let column = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    for a in 0..count {
        for b in a + 1..count {
            let (ca, cb) = (column(a), column(b));
            for (x0, x1) in sign_changes(grid, &ca, &cb) {
                let i0 = grid.iter().position(|&g| g == x0).unwrap();
                let slope = |c: &[c64]| {
                    if i0 + 1 < c.len() {
                        (c[i0 + 1] - c[i0]) / (grid[i0 + 1] - grid[i0])
                    } else {
                        c64::new(0.0, 0.0)
                    }
                };
                let (x, e) =
                    localize_ht_crossing(spec, x0, x1, [ca[i0], cb[i0]], [slope(&ca), slope(&cb)])?;
                events.push(FlowEvent {
                    kind: EventKind::Crossing,
                    param: x,
                    energy: e,
                    labels: [labels[a].clone(), labels[b].clone()],
                    tolerance: EVENT_TOL,
                });
            }
        }
    }
    // onset of complex pairs
    for i in 1..rows.len() {
        let newly: Vec<usize> = (0..count)
            .filter(|&k| is_real(rows[i - 1][k]) && !is_real(rows[i][k]))
            .collect();
        if newly.is_empty() {
            continue;
        }
        let real_count = |x: f64| -> Result<usize> {
            Ok(qes_energies(&spec.params_at(x))?
                .into_iter()
                .filter(|z| is_real(*z))
                .count())
        };
        let n0 = real_count(grid[i - 1])?;
        let mut err = None;
        let x = bisect(grid[i - 1], grid[i], EVENT_TOL, |m| match real_count(m) {
            Ok(c) => c == n0,
            Err(e) => {
                err = Some(e);
                true
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        for pair in newly.chunks(2) {
            let energy = pair.iter().map(|&k| rows[i][k].re).sum::<f64>() / pair.len() as f64;
            let second = pair.get(1).map_or_else(String::new, |&k| labels[k].clone());
            events.push(FlowEvent {
                kind: EventKind::Coalescence,
                param: x,
                energy,
                labels: [labels[pair[0]].clone(), second],
                tolerance: EVENT_TOL,
            });
        }
    }
    events.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(events)
}

/// Bisects Re(E_a − E_b) while following both levels from the left end.
fn localize_ht_crossing(
    spec: &SweepSpec,
    mut a: f64,
    mut b: f64,
    mut vals: [c64; 2],
    mut slopes: [c64; 2],
) -> Result<(f64, f64)> {
    let s0 = (vals[0].re - vals[1].re).signum();
    while b - a > EVENT_TOL {
        let m = 0.5 * (a + b);
        let cand = qes_energies(&spec.params_at(m))?;
        let pred = [vals[0] + slopes[0] * (m - a), vals[1] + slopes[1] * (m - a)];
        let (matched, _) = greedy_match(&pred, &cand);
        if (matched[0].re - matched[1].re).signum() == s0 {
            slopes = [
                (matched[0] - vals[0]) / (m - a),
                (matched[1] - vals[1]) / (m - a),
            ];
            vals = [matched[0], matched[1]];
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b), 0.5 * (vals[0].re + vals[1].re)))
}
