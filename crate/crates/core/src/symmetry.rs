//! Hermiticity, PT symmetry and η-pseudo-hermiticity checks.
//!
//! PT acts on the symbolic blocks as a → −a, a† → −a†, i → −i. In the frozen
//! basis, where a and a† are real matrices (the x-real convention), this is
//! parity conjugation combined with entrywise complex conjugation:
//! H^{PT} = P·conj(H)·P.
//!
//! Structural identities are compared entrywise on the guard-banded submatrix
//! at 1e-12. Spectral realness uses 1e-10·max(1, |λ|).

use std::collections::BTreeMap;

use faer::linalg::solvers::DenseSolveCore;
use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{sigma3_operator, CMat, ParityOperator, SpinFockOperator};
use crate::linalg;

pub const STRUCTURE_TOL: f64 = 1e-12;
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Eta {
    Identity,
    Sigma3,
    Parity,
    ParitySigma3,
    Custom(CMat),
}

impl Eta {
    pub fn name(&self) -> &'static str {
        match self {
            Eta::Identity => "identity",
            Eta::Sigma3 => "sigma3",
            Eta::Parity => "P",
            Eta::ParitySigma3 => "P_sigma3",
            Eta::Custom(_) => "custom",
        }
    }

    pub fn standard() -> [Eta; 4] {
        [Eta::Identity, Eta::Sigma3, Eta::Parity, Eta::ParitySigma3]
    }

    /// (η, η⁻¹) on the space of `h`.
    fn pair(&self, h: &SpinFockOperator) -> Result<(SpinFockOperator, SpinFockOperator)> {
        let space = *h.space();
        let op = match self {
            Eta::Identity => SpinFockOperator::identity(space),
            Eta::Sigma3 => sigma3_operator(space),
            Eta::Parity => ParityOperator::new(space).as_operator().clone(),
            Eta::ParitySigma3 => parity_sigma3(h),
            Eta::Custom(m) => {
                let eta = SpinFockOperator::from_matrix(space, m.clone())?;
                let inv = SpinFockOperator::from_matrix(space, invert(m)?)?;
                return Ok((eta, inv));
            }
        };
        // the standard η are involutions
        Ok((op.clone(), op))
    }
}

fn parity_sigma3(h: &SpinFockOperator) -> SpinFockOperator {
    let space = *h.space();
    ParityOperator::new(space)
        .as_operator()
        .mul(&sigma3_operator(space))
}

fn invert(m: &CMat) -> Result<CMat> {
    let n = m.nrows();
    let lu = m.full_piv_lu();
    let u = lu.U();
    let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if max == 0.0 { 0.0 } else { min / max };
    if ratio < 1e-14 || !ratio.is_finite() {
        return Err(Error::SingularEta(ratio));
    }
    Ok(lu.inverse())
}

/// Deviation of ηHη⁻¹ from H† on the guard-banded submatrix.
pub fn check_pseudo_hermitian(h: &SpinFockOperator, eta: &Eta) -> Result<(bool, f64)> {
    let (e, inv) = eta.pair(h)?;
    let lhs = e.mul(h).mul(&inv);
    let dev = lhs.guarded_max_abs_diff(&h.adjoint());
    Ok((dev <= STRUCTURE_TOL, dev))
}

pub fn pt_transform(h: &SpinFockOperator) -> SpinFockOperator {
    ParityOperator::new(*h.space()).conjugate(&h.conjugate())
}

pub fn check_pt(h: &SpinFockOperator) -> (bool, f64) {
    let dev = pt_transform(h).guarded_max_abs_diff(h);
    (dev <= STRUCTURE_TOL, dev)
}

pub fn check_hermitian(h: &SpinFockOperator) -> (bool, f64) {
    let dev = h.guarded_max_abs_diff(&h.adjoint());
    (dev <= STRUCTURE_TOL, dev)
}

/// Max-entry size of [H, Pσ₃] on the guard-banded submatrix.
pub fn commutant_parity_sigma3(h: &SpinFockOperator) -> f64 {
    let c = h.commutator(&parity_sigma3(h));
    let zero = SpinFockOperator::from_matrix(*h.space(), CMat::zeros(h.dim(), h.dim()))
        .expect("square zero matrix");
    c.guarded_max_abs_diff(&zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumClass {
    AllReal,
    ConjugatePairs,
    Mixed,
}

impl SpectrumClass {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumClass::AllReal => "all-real",
            SpectrumClass::ConjugatePairs => "conjugate-pairs",
            SpectrumClass::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumClassification {
    pub class: SpectrumClass,
    pub tolerance: f64,
    pub real: Vec<f64>,
    /// One representative with positive imaginary part per pair.
    pub pairs: Vec<c64>,
}

/// Splits eigenvalues into real ones and conjugate pairs.
///
/// λ counts as real when |Im λ| ≤ tol·max(1, |λ|); a complex λ must be matched
/// one-to-one with some μ such that |μ − conj λ| ≤ tol·max(1, |λ|).
pub fn classify_values(values: &[c64], tol: f64) -> Result<SpectrumClassification> {
    let scale = |z: c64| tol * z.norm().max(1.0);
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for &z in values {
        if z.im.abs() <= scale(z) {
            real.push(z.re);
        } else {
            complex.push(z);
        }
    }
    let mut used = vec![false; complex.len()];
    let mut pairs = Vec::new();
    for i in 0..complex.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = complex[i];
        let target = z.conj();
        let partner = (0..complex.len())
            .filter(|&j| !used[j])
            .map(|j| (j, (complex[j] - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, d)) if d <= scale(z) => {
                used[j] = true;
                pairs.push(if z.im > 0.0 { z } else { target });
            }
            _ => {
                return Err(Error::Unpairable {
                    re: z.re,
                    im: z.im,
                    tol,
                })
            }
        }
    }
    real.sort_by(f64::total_cmp);
    pairs.sort_by(linalg::cmp_complex);
    let class = match (real.is_empty(), pairs.is_empty()) {
        (_, true) => SpectrumClass::AllReal,
        (true, false) => SpectrumClass::ConjugatePairs,
        (false, false) => SpectrumClass::Mixed,
    };
    Ok(SpectrumClassification {
        class,
        tolerance: tol,
        real,
        pairs,
    })
}

pub fn classify_spectrum(h: &SpinFockOperator, tol: f64) -> Result<SpectrumClassification> {
    classify_values(&linalg::eigenvalues(h.matrix())?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub deviation: f64,
}

impl From<(bool, f64)> for Check {
    fn from((holds, deviation): (bool, f64)) -> Self {
        Self { holds, deviation }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub hermitian: Check,
    pub pt_symmetric: Check,
    pub pseudo_eta: BTreeMap<String, Check>,
    pub commutant_psigma3: f64,
    pub spectrum_class: SpectrumClass,
    pub spectrum_tolerance: f64,
}

pub fn symmetry_report(h: &SpinFockOperator) -> Result<SymmetryReport> {
    let mut pseudo_eta = BTreeMap::new();
    for eta in Eta::standard() {
        pseudo_eta.insert(
            eta.name().to_string(),
            check_pseudo_hermitian(h, &eta)?.into(),
        );
    }
    let spectrum = classify_spectrum(h, REALNESS_TOL)?;
    Ok(SymmetryReport {
        hermitian: check_hermitian(h).into(),
        pt_symmetric: check_pt(h).into(),
        pseudo_eta,
        commutant_psigma3: commutant_parity_sigma3(h),
        spectrum_class: spectrum.class,
        spectrum_tolerance: spectrum.tolerance,
    })
}
