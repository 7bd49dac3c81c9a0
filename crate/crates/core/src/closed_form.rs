//! Analytic spectrum of the extended k-photon model.
//!
//! The extended Hamiltonian leaves every doublet span{|n,↑⟩, |n+k,↓⟩}
//! invariant and acts there as
//!
//! ```text
//! [ ħωn + P(n) + ε/2          ρ√((n+1)…(n+k)) ]
//! [ φρ√((n+1)…(n+k))    ħω(n+k) + P(n+k) − ε/2 ]
//! ```
//!
//! The lower states |j,↓⟩ with j < k are untouched by the coupling and give
//! k singlet levels that do not depend on ρ.
//!
//! Eigenvectors use a mixing angle θ: 2ρ√((n+1)…(n+k)) = Δ sin θ for φ = −1
//! and Δ sinh θ for φ = +1, where Δ is the diagonal splitting (ħωk − ε when
//! P ≡ 0). With the principal arcsin branch the sign of Δ is folded into θ
//! (θ → π − θ for Δ < 0) so that λ_I is always the `+√` root. The hyperbolic
//! form cannot absorb that sign; there λ_I is the `+√` root only for Δ > 0.

use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{falling_sqrt, Spin, SpinFockOperator, TruncatedFockSpace};
use crate::linalg::{self, nearest_distance};
use crate::models::build_extended;
use crate::params::{ModelParams, Phi};

#[derive(Debug, Clone, PartialEq)]
pub struct DoubletBlock {
    pub n: usize,
    pub k: usize,
    pub phi: Phi,
    /// Real 2×2 matrix in the basis (|n,+1/2⟩, |n+k,−1/2⟩).
    pub matrix: [[f64; 2]; 2],
}

impl DoubletBlock {
    pub fn new(params: &ModelParams, n: usize) -> Self {
        let k = params.k;
        let s = params.rho * falling_sqrt(n + k, k);
        Self {
            n,
            k,
            phi: params.phi,
            matrix: [
                [params.bare_energy(n, true), s],
                [params.phi.sign() * s, params.bare_energy(n + k, false)],
            ],
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// Δ = lower diagonal − upper diagonal (ħωk − ε when P ≡ 0).
    pub fn detuning(&self) -> f64 {
        self.matrix[1][1] - self.matrix[0][0]
    }

    /// ρ√((n+1)…(n+k)), the unsigned upper-right entry.
    pub fn coupling(&self) -> f64 {
        self.matrix[0][1]
    }

    /// Δ² + 4φρ²(n+1)…(n+k); negative past the exceptional point.
    pub fn discriminant(&self) -> f64 {
        let d = self.detuning();
        d * d + 4.0 * self.matrix[0][1] * self.matrix[1][0]
    }

    pub fn basis(&self) -> [(usize, Spin); 2] {
        [(self.n, Spin::Up), (self.n + self.k, Spin::Down)]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }
}

/// Closed-form roots (λ_I, λ_II) = (tr ± √disc)/2; complex past the exceptional point.
pub fn doublet_eigenvalues(block: &DoubletBlock) -> (c64, c64) {
    let half_tr = 0.5 * block.trace();
    let root = c64::new(block.discriminant(), 0.0).sqrt();
    (half_tr + 0.5 * root, half_tr - 0.5 * root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AngleKind {
    Trig,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingAngle {
    pub theta: f64,
    pub kind: AngleKind,
}

impl MixingAngle {
    /// Trig angle for φ = −1 and hyperbolic angle for φ = +1.
    pub fn for_block(block: &DoubletBlock) -> Result<Self> {
        match block.phi {
            Phi::Minus => Self::trig(block),
            Phi::Plus => Self::hyperbolic(block),
        }
    }

    pub fn trig(block: &DoubletBlock) -> Result<Self> {
        let delta = block.detuning();
        let two_s = 2.0 * block.coupling();
        if two_s == 0.0 {
            let theta = if delta < 0.0 {
                std::f64::consts::PI
            } else {
                0.0
            };
            return Ok(Self {
                theta,
                kind: AngleKind::Trig,
            });
        }
        if two_s.abs() > delta.abs() {
            return Err(Error::AngleUndefined {
                coupling: two_s,
                detuning: delta,
            });
        }
        let principal = (two_s / delta).clamp(-1.0, 1.0).asin();
        let theta = if delta < 0.0 {
            std::f64::consts::PI - principal
        } else {
            principal
        };
        Ok(Self {
            theta,
            kind: AngleKind::Trig,
        })
    }

    pub fn hyperbolic(block: &DoubletBlock) -> Result<Self> {
        let delta = block.detuning();
        let two_s = 2.0 * block.coupling();
        if delta == 0.0 {
            return Err(Error::AngleUndefined {
                coupling: two_s,
                detuning: delta,
            });
        }
        Ok(Self {
            theta: (two_s / delta).asinh(),
            kind: AngleKind::Hyperbolic,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletEigenvectors {
    pub psi_1: [f64; 2],
    pub lambda_1: f64,
    pub psi_2: [f64; 2],
    pub lambda_2: f64,
}

/// Unnormalized mixing-angle eigenvectors with their angle-form eigenvalues.
///
/// Trig: ψ_I = (sin θ/2, cos θ/2), ψ_II = (cos θ/2, sin θ/2).
/// Hyperbolic: ψ_I = (sinh θ/2, cosh θ/2), ψ_II = (cosh θ/2, −sinh θ/2).
pub fn doublet_eigenvectors(
    block: &DoubletBlock,
    angle: MixingAngle,
) -> Result<DoubletEigenvectors> {
    let expected = match block.phi {
        Phi::Minus => AngleKind::Trig,
        Phi::Plus => AngleKind::Hyperbolic,
    };
    if angle.kind != expected {
        return Err(Error::AngleKindMismatch {
            requested: match angle.kind {
                AngleKind::Trig => "trig",
                AngleKind::Hyperbolic => "hyperbolic",
            },
            phi: block.phi.as_i8(),
        });
    }
    let mid = 0.5 * block.trace();
    let half_delta = 0.5 * block.detuning();
    let h = 0.5 * angle.theta;
    Ok(match angle.kind {
        AngleKind::Trig => {
            let c = angle.theta.cos();
            DoubletEigenvectors {
                psi_1: [h.sin(), h.cos()],
                lambda_1: mid + half_delta * c,
                psi_2: [h.cos(), h.sin()],
                lambda_2: mid - half_delta * c,
            }
        }
        AngleKind::Hyperbolic => {
            let c = angle.theta.cosh();
            DoubletEigenvectors {
                psi_1: [h.sinh(), h.cosh()],
                lambda_1: mid + half_delta * c,
                psi_2: [h.cosh(), -h.sinh()],
                lambda_2: mid - half_delta * c,
            }
        }
    })
}

pub fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Branch {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LevelLabel {
    /// ρ-independent lower state |j,↓⟩, j < k.
    Singlet(usize),
    Doublet {
        n: usize,
        branch: Branch,
    },
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelLabel::Singlet(j) => write!(f, "singlet{j}"),
            LevelLabel::Doublet { n, branch } => {
                let b = match branch {
                    Branch::I => "I",
                    Branch::II => "II",
                };
                write!(f, "doublet{n}{b}")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SingletLevel {
    pub j: usize,
    pub energy: f64,
    pub vector: Vec<c64>,
    /// ‖Hψ − Eψ‖ against the truncated extended matrix.
    pub residual: f64,
}

/// The k levels ψ_j = (0, |j⟩) with E_j = ħωj + P(j) − ε/2.
pub fn rho_independent_levels(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<Vec<SingletLevel>> {
    let h = build_extended(params, space)?;
    Ok((0..params.k)
        .map(|j| {
            let energy = params.bare_energy(j, false);
            let vector = space.basis_vector(j, Spin::Down);
            let residual = linalg::residual(h.matrix(), c64::new(energy, 0.0), &vector);
            SingletLevel {
                j,
                energy,
                vector,
                residual,
            }
        })
        .collect())
}

/// Closed-form value of one labeled level.
pub fn level_value(params: &ModelParams, label: LevelLabel) -> c64 {
    match label {
        LevelLabel::Singlet(j) => c64::new(params.bare_energy(j, false), 0.0),
        LevelLabel::Doublet { n, branch } => {
            let (l1, l2) = doublet_eigenvalues(&DoubletBlock::new(params, n));
            match branch {
                Branch::I => l1,
                Branch::II => l2,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledEigenvalue {
    pub label: LevelLabel,
    pub value: c64,
}

/// All singlets plus every doublet with n + k below the guard band.
pub fn full_algebraic_spectrum(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Vec<LabeledEigenvalue> {
    let k = params.k;
    let limit = space.exact_limit();
    let mut out: Vec<LabeledEigenvalue> = (0..k.min(limit))
        .map(|j| LabeledEigenvalue {
            label: LevelLabel::Singlet(j),
            value: level_value(params, LevelLabel::Singlet(j)),
        })
        .collect();
    for n in (0..).take_while(|n| n + k < limit) {
        let (l1, l2) = doublet_eigenvalues(&DoubletBlock::new(params, n));
        out.push(LabeledEigenvalue {
            label: LevelLabel::Doublet {
                n,
                branch: Branch::I,
            },
            value: l1,
        });
        out.push(LabeledEigenvalue {
            label: LevelLabel::Doublet {
                n,
                branch: Branch::II,
            },
            value: l2,
        });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumComparison {
    /// Numeric eigenvalues whose eigenvectors live below the guard band.
    pub guarded_numeric: Vec<c64>,
    pub closed_form: Vec<LabeledEigenvalue>,
    /// Worst distance from a guard-banded numeric eigenvalue to the closed-form set.
    pub numeric_to_closed: f64,
    /// Worst distance from a closed-form value to the full numeric spectrum.
    pub closed_to_numeric: f64,
}

impl SpectrumComparison {
    pub fn max_deviation(&self) -> f64 {
        self.numeric_to_closed.max(self.closed_to_numeric)
    }
}

/// Weight of `v` on guard-band states.
pub fn guard_weight(space: &TruncatedFockSpace, v: &[c64]) -> f64 {
    let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let guarded: f64 = v
        .iter()
        .enumerate()
        .filter(|(i, _)| !space.is_guarded(*i))
        .map(|(_, x)| x.norm_sqr())
        .sum();
    (guarded / total).sqrt()
}

/// Compares the closed-form spectrum with a dense diagonalization of `h`.
pub fn compare_with_numeric(
    params: &ModelParams,
    h: &SpinFockOperator,
) -> Result<SpectrumComparison> {
    let space = h.space();
    let pairs = linalg::eigen_decompose(h.matrix())?;
    let all: Vec<c64> = pairs.iter().map(|p| p.value).collect();
    let guarded_numeric: Vec<c64> = pairs
        .iter()
        .filter(|p| guard_weight(space, &p.vector) < 1e-6)
        .map(|p| p.value)
        .collect();
    let closed_form = full_algebraic_spectrum(params, space);
    let closed: Vec<c64> = closed_form.iter().map(|l| l.value).collect();
    // an unguarded |n,↑⟩ may pair with a guard-band |n+k,↓⟩; that doublet is still intact
    let limit = space.exact_limit();
    let mut targets = closed.clone();
    for n in limit.saturating_sub(params.k)..limit {
        let (l1, l2) = doublet_eigenvalues(&DoubletBlock::new(params, n));
        targets.extend([l1, l2]);
    }
    let numeric_to_closed = guarded_numeric
        .iter()
        .map(|&x| nearest_distance(x, &targets))
        .fold(0.0, f64::max);
    let closed_to_numeric = closed
        .iter()
        .map(|&x| nearest_distance(x, &all))
        .fold(0.0, f64::max);
    Ok(SpectrumComparison {
        guarded_numeric,
        closed_form,
        numeric_to_closed,
        closed_to_numeric,
    })
}
