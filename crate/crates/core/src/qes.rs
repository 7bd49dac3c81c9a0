//! The finite invariant subspace V_n of H_T and its algebraic eigenpairs.
//!
//! V_n = span{|j,↑⟩ : j ≤ N} ⊕ span{|m,↓⟩ : m ≤ N+2} with n = N+2. The only
//! matrix elements that could leave V_n are c·a(a†a − n) and ĉ(a†a − n)a†
//! between |N+1,↑⟩ and |n,↓⟩, and both carry the factor (n − n) = 0. So
//! invariance holds exactly in floating point.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{falling_sqrt, BasisLabel, CMat, Spin, SpinFockOperator, TruncatedFockSpace};
use crate::linalg;
use crate::models::build_ht;
use crate::params::ModelParams;

/// Residual bound for certified eigenpairs.
pub const CERTIFY_TOL: f64 = 1e-10;
/// Eigenvalues closer than this form a cluster that is tested for defectiveness.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Exact matrix element ⟨row|H_T|col⟩ from the ladder formulas.
pub fn ht_element(params: &ModelParams, row: BasisLabel, col: BasisLabel) -> f64 {
    let (c, c_hat) = params.qes_couplings();
    let n = params.n_qes as f64;
    let hw = params.hbar_omega;
    let half = 0.5 * params.eps;
    match (row.spin, col.spin) {
        (Spin::Up, Spin::Up) if row.n == col.n => hw * row.n as f64 + half,
        (Spin::Down, Spin::Down) if row.n == col.n => hw * row.n as f64 - half,
        (Spin::Up, Spin::Down) => {
            let (j, m) = (row.n, col.n);
            if m == j + 2 {
                params.rho * falling_sqrt(m, 2)
            } else if m == j + 1 {
                c * falling_sqrt(m, 1) * (m as f64 - n)
            } else {
                0.0
            }
        }
        (Spin::Down, Spin::Up) => {
            let (m, j) = (row.n, col.n);
            if m == j + 2 {
                params.phi.sign() * params.rho * falling_sqrt(m, 2)
            } else if m == j + 1 {
                c_hat * falling_sqrt(m, 1) * (m as f64 - n)
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Contiguous span of |j,↑⟩, j ≤ upper_max, and |m,↓⟩, m ≤ lower_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InvariantSubspace {
    /// Number of upper states (N + 1 for V_n); zero means no upper states.
    pub upper_len: usize,
    pub lower_len: usize,
}

impl InvariantSubspace {
    /// V_n for N upper photons: dimension 2N + 4.
    pub fn standard(n_upper: usize) -> Self {
        Self {
            upper_len: n_upper + 1,
            lower_len: n_upper + 3,
        }
    }

    pub fn contiguous(upper_len: usize, lower_len: usize) -> Self {
        Self {
            upper_len,
            lower_len,
        }
    }

    pub fn dim(&self) -> usize {
        self.upper_len + self.lower_len
    }

    /// Largest photon number present.
    pub fn extent(&self) -> usize {
        self.upper_len.max(self.lower_len).saturating_sub(1)
    }

    /// Upper states first, each spin in increasing photon number.
    pub fn basis(&self) -> Vec<BasisLabel> {
        (0..self.upper_len)
            .map(|n| BasisLabel { n, spin: Spin::Up })
            .chain((0..self.lower_len).map(|n| BasisLabel {
                n,
                spin: Spin::Down,
            }))
            .collect()
    }

    pub fn contains(&self, l: BasisLabel) -> bool {
        match l.spin {
            Spin::Up => l.n < self.upper_len,
            Spin::Down => l.n < self.lower_len,
        }
    }

    fn fits(&self, space: &TruncatedFockSpace) -> Result<()> {
        if self.extent() >= space.cutoff() {
            return Err(Error::CutoffTooSmall {
                cutoff: space.cutoff(),
                required: format!("D > {}", self.extent()),
            });
        }
        Ok(())
    }

    pub fn indices(&self, space: &TruncatedFockSpace) -> Result<Vec<usize>> {
        self.fits(space)?;
        Ok(self
            .basis()
            .iter()
            .map(|l| space.index(l.n, l.spin))
            .collect())
    }

    pub fn projector(&self, space: &TruncatedFockSpace) -> Result<SpinFockOperator> {
        let idx = self.indices(space)?;
        let dim = space.dim();
        let mut m = CMat::zeros(dim, dim);
        for i in idx {
            m[(i, i)] = c64::new(1.0, 0.0);
        }
        SpinFockOperator::from_matrix(*space, m)
    }

    /// Embeds subspace coefficients into the full truncated space.
    pub fn embed(&self, space: &TruncatedFockSpace, coeffs: &[c64]) -> Result<Vec<c64>> {
        let idx = self.indices(space)?;
        if coeffs.len() != idx.len() {
            return Err(Error::DimensionMismatch {
                expected: idx.len(),
                got: coeffs.len(),
            });
        }
        let mut v = vec![c64::new(0.0, 0.0); space.dim()];
        for (&i, &x) in idx.iter().zip(coeffs) {
            v[i] = x;
        }
        Ok(v)
    }

    /// max-entry of (1 − Π)HΠ.
    pub fn invariance_leak(&self, h: &SpinFockOperator) -> Result<f64> {
        let space = h.space();
        let cols = self.indices(space)?;
        let m = h.matrix();
        let mut worst = 0.0f64;
        for &j in &cols {
            for i in 0..h.dim() {
                if !self.contains(space.label(i)) {
                    worst = worst.max(m[(i, j)].norm());
                }
            }
        }
        Ok(worst)
    }

    /// Restriction of H_T assembled from exact matrix elements.
    pub fn restricted_matrix(&self, params: &ModelParams) -> CMat {
        let basis = self.basis();
        Mat::from_fn(self.dim(), self.dim(), |i, j| {
            c64::new(ht_element(params, basis[i], basis[j]), 0.0)
        })
    }
}

/// V_n for the N of `params`, checked against D ≥ N + 5 + g.
pub fn build_subspace(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<InvariantSubspace> {
    params.validate_qes()?;
    let n_upper = params.n_upper();
    let need = n_upper + 5 + space.guard();
    if space.cutoff() < need {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            required: format!("D >= N + 5 + g = {need}"),
        });
    }
    Ok(InvariantSubspace::standard(n_upper))
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicEigenpair {
    pub energy: c64,
    /// Coefficients over [`InvariantSubspace::basis`]; `None` inside a defective cluster.
    pub vector: Option<Vec<c64>>,
    /// Relative residual in the full space.
    pub residual: Option<f64>,
    pub defective: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicSpectrum {
    pub subspace: InvariantSubspace,
    pub pairs: Vec<AlgebraicEigenpair>,
}

impl AlgebraicSpectrum {
    pub fn energies(&self) -> Vec<c64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }

    pub fn any_defective(&self) -> bool {
        self.pairs.iter().any(|p| p.defective)
    }
}

/// True when the unit vectors are numerically linearly independent.
fn independent(vectors: &[&Vec<c64>]) -> bool {
    let mut basis: Vec<Vec<c64>> = Vec::new();
    for v in vectors {
        let mut w = (*v).clone();
        for b in &basis {
            let dot: c64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = linalg::vec_norm(&w);
        if norm < 1e-6 {
            return false;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        basis.push(w);
    }
    true
}

/// Eigenpairs of H_T on V_n, sorted by real then imaginary part, each
/// certified against the full truncated operator on `space`.
pub fn algebraic_spectrum(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<AlgebraicSpectrum> {
    let sub = build_subspace(params, space)?;
    let h = build_ht(params, space)?;
    let leak = sub.invariance_leak(&h)?;
    if leak > 0.0 {
        return Err(Error::NotInvariant(leak));
    }
    let restricted = sub.restricted_matrix(params);
    let mut raw = linalg::eigen_decompose(&restricted)?;
    raw.sort_by(|a, b| linalg::cmp_complex(&a.value, &b.value));

    // clusters of near-coincident eigenvalues
    let mut cluster_of = vec![usize::MAX; raw.len()];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..raw.len() {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        cluster_of[i] = id;
        let mut k = 0;
        while k < members.len() {
            let z = raw[members[k]].value;
            for j in 0..raw.len() {
                if cluster_of[j] == usize::MAX && (raw[j].value - z).norm() < CLUSTER_TOL {
                    cluster_of[j] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        clusters.push(members);
    }
    let defective: Vec<bool> = clusters
        .iter()
        .map(|m| {
            m.len() > 1 && !independent(&m.iter().map(|&i| &raw[i].vector).collect::<Vec<_>>())
        })
        .collect();

    let scale = linalg::frobenius(&restricted).max(1.0);
    let mut pairs = Vec::with_capacity(raw.len());
    for (i, p) in raw.into_iter().enumerate() {
        if defective[cluster_of[i]] {
            pairs.push(AlgebraicEigenpair {
                energy: p.value,
                vector: None,
                residual: None,
                defective: true,
            });
            continue;
        }
        let residual = certify_vector(&sub, &h, p.value, &p.vector)?;
        if residual > CERTIFY_TOL * scale {
            return Err(Error::Certification(residual));
        }
        pairs.push(AlgebraicEigenpair {
            energy: p.value,
            vector: Some(p.vector),
            residual: Some(residual),
            defective: false,
        });
    }
    Ok(AlgebraicSpectrum {
        subspace: sub,
        pairs,
    })
}

fn certify_vector(
    sub: &InvariantSubspace,
    h: &SpinFockOperator,
    energy: c64,
    coeffs: &[c64],
) -> Result<f64> {
    let v = sub.embed(h.space(), coeffs)?;
    Ok(linalg::residual(h.matrix(), energy, &v))
}

/// ‖H_T v − E v‖/‖v‖ with H_T built on `space`.
pub fn certify_in_full_space(
    sub: &InvariantSubspace,
    energy: c64,
    coeffs: &[c64],
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<f64> {
    let h = build_ht(params, space)?;
    certify_vector(sub, &h, energy, coeffs)
}

/// Σ_{j≤N}(ħωj + ε/2) + Σ_{m≤N+2}(ħωm − ε/2).
pub fn restricted_trace(params: &ModelParams) -> f64 {
    let n = params.n_upper();
    let up: f64 = (0..=n)
        .map(|j| params.hbar_omega * j as f64 + 0.5 * params.eps)
        .sum();
    let low: f64 = (0..=n + 2)
        .map(|m| params.hbar_omega * m as f64 - 0.5 * params.eps)
        .sum();
    up + low
}

/// Smallest leak of H₁₂ over every contiguous window with at least one upper
/// state, upper_len ≤ max_upper and lower_len ≤ max_lower.
pub fn h12_min_leak(h12: &SpinFockOperator, max_upper: usize, max_lower: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for u in 1..=max_upper {
        for l in 0..=max_lower {
            best = best.min(InvariantSubspace::contiguous(u, l).invariance_leak(h12)?);
        }
    }
    Ok(best)
}
