//! Series solution of H_T ψ = E ψ with polynomial coefficients in E.
//!
//! The ansatz is ψ = (Σ_j p_j(E)|j⟩, Σ_j q_j(E)|j+2⟩)ᵗ with q_{−2} = 0 and
//! q_{−1} = 𝒩. Writing p_j = √(j!)·P_j and q_j = √((j+2)!)·Q_j removes every
//! square root from the component equations:
//!
//! ```text
//! upper |i⟩:  (ħωi + ε/2 − E)P_i + ρ(i+1)(i+2)Q_i + c(i+1−n)(i+1)Q_{i−1} = 0
//! lower |m⟩:  (ħωm − ε/2 − E)Q_{m−2} + φρP_{m−2} + ĉ(m−n)P_{m−1} = 0
//! ```
//!
//! so P_j and Q_j are polynomials with exact rational coefficients. Each step
//! j → j+1 solves the lower equation at m = j+2 for P_{j+1} (pivot ĉ(j+2−n))
//! and then the upper equation at i = j+1 for Q_{j+1} (pivot ρ(j+2)(j+3)).
//!
//! At j = n−2 the first pivot vanishes. The lower equation at m = n becomes
//! the critical polynomial
//!
//! ```text
//! C(E) = (E − ħωn + ε/2)Q_{n−2} − φρP_{n−2}
//! ```
//!
//! of degree 2n − 1, and with p_{n−1} = 0 every later coefficient vanishes.
//! The roots of C are the algebraic eigenvalues of V_n other than the
//! vacuum level −ε/2. Degrees grow as deg P_j = 2j+1 and deg Q_j = 2j+2.
//!
//! A pivot that vanishes for other reasons (ρ = 0 or ĉ = 0) turns its
//! equation into an extra constraint and the unknown is set to zero; the
//! roots are then those of the gcd of all constraints, a subset of the
//! algebraic spectrum.

use num_complex::Complex64 as c64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{Spin, TruncatedFockSpace};
use crate::linalg;
use crate::models::build_ht;
use crate::params::{ModelParams, QesCoupling};
use crate::poly::{integer, rational, EnergyPolynomial, PolyRoot};
use crate::qes::InvariantSubspace;

/// Relative residual bound for reconstructed eigenvectors.
pub const RECONSTRUCT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct ExactParams {
    h: BigRational,
    eps_half: BigRational,
    rho: BigRational,
    phi: BigRational,
    c: BigRational,
    c_hat: BigRational,
    n: i64,
}

impl ExactParams {
    fn new(params: &ModelParams) -> Result<Self> {
        params.validate_qes()?;
        let n = params.n_qes as i64;
        let (c, c_hat) = match params.qes {
            QesCoupling::Theta(t) => {
                let c = -rational(t) / integer(n);
                (c.clone(), c)
            }
            QesCoupling::Explicit { c, c_hat } => (rational(c), rational(c_hat)),
        };
        Ok(Self {
            h: rational(params.hbar_omega),
            eps_half: rational(params.eps) / integer(2),
            rho: rational(params.rho),
            phi: integer(params.phi.as_i8() as i64),
            c,
            c_hat,
            n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Row {
    /// Lower equation at |j+2,↓⟩, pivot on P_{j+1}.
    Lower,
    /// Upper equation at |j+1,↑⟩, pivot on Q_{j+1}.
    Upper,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    /// Frontier order at which the pivot vanished.
    pub j: i64,
    pub row: Row,
    pub poly: EnergyPolynomial,
}

/// Generated coefficients up to the frontier.
#[derive(Debug, Clone)]
pub struct SeriesState {
    exact: ExactParams,
    params: ModelParams,
    norm: BigRational,
    /// P_j for j = 0..=frontier.
    p: Vec<EnergyPolynomial>,
    /// Q_j for j = −2..=frontier, stored at j + 2.
    q: Vec<EnergyPolynomial>,
    frontier: i64,
    constraints: Vec<Constraint>,
    critical: Option<EnergyPolynomial>,
}

impl SeriesState {
    /// Initial conditions q_{−2} = 0, q_{−1} = 𝒩; the frontier is j = −1.
    pub fn new(params: &ModelParams, norm: f64) -> Result<Self> {
        if !(norm.is_finite() && norm != 0.0) {
            return Err(Error::InvalidParams(
                "normalization must be finite and nonzero".into(),
            ));
        }
        let norm = rational(norm);
        Ok(Self {
            exact: ExactParams::new(params)?,
            params: params.clone(),
            p: Vec::new(),
            q: vec![
                EnergyPolynomial::zero(),
                EnergyPolynomial::constant(norm.clone()),
            ],
            norm,
            frontier: -1,
            constraints: Vec::new(),
            critical: None,
        })
    }

    pub fn normalization(&self) -> &BigRational {
        &self.norm
    }

    pub fn frontier(&self) -> i64 {
        self.frontier
    }

    pub fn n(&self) -> i64 {
        self.exact.n
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Scaled upper coefficient P_j (zero for j < 0 or beyond the frontier).
    pub fn p_scaled(&self, j: i64) -> EnergyPolynomial {
        usize::try_from(j)
            .ok()
            .and_then(|i| self.p.get(i).cloned())
            .unwrap_or_default()
    }

    /// Scaled lower coefficient Q_j, j ≥ −2.
    pub fn q_scaled(&self, j: i64) -> EnergyPolynomial {
        usize::try_from(j + 2)
            .ok()
            .and_then(|i| self.q.get(i).cloned())
            .unwrap_or_default()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// The consistency condition at j = n−2, once the critical step has run.
    pub fn critical(&self) -> Option<&EnergyPolynomial> {
        self.critical.as_ref()
    }

    fn lower_rhs(&self, j: i64) -> EnergyPolynomial {
        // (E − ħω(j+2) + ε/2)Q_j − φρP_j
        let e = &self.exact;
        let shift =
            EnergyPolynomial::linear(&e.eps_half - &e.h * integer(j + 2), BigRational::one());
        &(&shift * &self.q_scaled(j)) - &self.p_scaled(j).scale(&(&e.phi * &e.rho))
    }

    fn push_p(&mut self, poly: EnergyPolynomial) {
        self.p.push(poly);
    }

    /// Solves the upper equation at i = j+1 for Q_{j+1}.
    fn advance_q(&mut self, j: i64) {
        let e = &self.exact;
        let shift =
            EnergyPolynomial::linear(-(&e.h * integer(j + 1)) - &e.eps_half, BigRational::one());
        let c_term = e.c.clone() * integer((j + 2 - e.n) * (j + 2));
        let rhs = &(&shift * &self.p_scaled(j + 1)) - &self.q_scaled(j).scale(&c_term);
        let pivot = &e.rho * integer((j + 2) * (j + 3));
        let next = if pivot.is_zero() {
            if !rhs.is_zero() {
                self.constraints.push(Constraint {
                    j,
                    row: Row::Upper,
                    poly: rhs,
                });
            }
            EnergyPolynomial::zero()
        } else {
            rhs.scale(&pivot.recip())
        };
        self.q.push(next);
        self.frontier = j + 1;
    }

    /// One regular step j → j+1.
    pub fn step(&mut self) -> Result<()> {
        let j = self.frontier;
        if j + 2 == self.exact.n {
            return Err(Error::SingularStep(j));
        }
        let rhs = self.lower_rhs(j);
        let pivot = &self.exact.c_hat * integer(j + 2 - self.exact.n);
        let next = if pivot.is_zero() {
            if !rhs.is_zero() {
                self.constraints.push(Constraint {
                    j,
                    row: Row::Lower,
                    poly: rhs,
                });
            }
            EnergyPolynomial::zero()
        } else {
            rhs.scale(&pivot.recip())
        };
        self.push_p(next);
        self.advance_q(j);
        Ok(())
    }

    /// The step at j = n−2: records the critical polynomial and sets p_{n−1} = 0.
    pub fn step_critical(&mut self) -> Result<()> {
        let j = self.frontier;
        if j + 2 != self.exact.n {
            return Err(Error::NotAtCriticalStep {
                got: j,
                expected: self.exact.n - 2,
            });
        }
        let c = self.lower_rhs(j);
        if !c.is_zero() {
            self.constraints.push(Constraint {
                j,
                row: Row::Lower,
                poly: c.clone(),
            });
        }
        self.critical = Some(c);
        self.push_p(EnergyPolynomial::zero());
        self.advance_q(j);
        Ok(())
    }

    /// Runs from the initial conditions through the critical step.
    pub fn run(params: &ModelParams, norm: f64) -> Result<Self> {
        let mut s = Self::new(params, norm)?;
        while s.frontier + 2 < s.exact.n {
            s.step()?;
        }
        s.step_critical()?;
        Ok(s)
    }

    /// gcd of all nonzero constraints.
    pub fn truncation_polynomial(&self) -> Result<EnergyPolynomial> {
        let g = self
            .constraints
            .iter()
            .fold(EnergyPolynomial::zero(), |acc, c| acc.gcd(&c.poly));
        if g.is_zero() {
            return Err(Error::DegeneratePolynomial);
        }
        Ok(g)
    }

    /// Compares the critical polynomial with q_{n−3}.
    pub fn compare_with_q(&self) -> Option<QComparison> {
        let c = self.critical.as_ref()?;
        let q = self.q_scaled(self.exact.n - 3);
        let proportional = match (c.leading(), q.leading()) {
            (Some(lc), Some(lq)) => c.degree() == q.degree() && c.scale(lq) == q.scale(lc),
            _ => false,
        };
        let divides = !q.is_zero() && c.div_rem(&q).1.is_zero();
        Some(QComparison {
            critical_degree: c.degree(),
            q_degree: q.degree(),
            proportional,
            q_divides_critical: divides,
        })
    }

    /// Unscaled (p_j, q_{j}) at E for every generated order.
    fn coefficients_at(&self, energy: c64, order: i64) -> (Vec<c64>, Vec<c64>) {
        let ps = (0..=order.min(self.frontier))
            .map(|j| self.p_scaled(j).eval(energy) * sqrt_factorial(j as usize))
            .collect();
        let qs = (-2..=order.min(self.frontier))
            .map(|j| self.q_scaled(j).eval(energy) * sqrt_factorial((j + 2) as usize))
            .collect();
        (ps, qs)
    }

    /// The partial sum through order `order` embedded in `space`.
    pub fn partial_vector(&self, energy: c64, order: i64, space: &TruncatedFockSpace) -> Vec<c64> {
        let (ps, qs) = self.coefficients_at(energy, order);
        let mut v = vec![c64::new(0.0, 0.0); space.dim()];
        for (j, x) in ps.into_iter().enumerate() {
            if j < space.cutoff() {
                v[space.index(j, Spin::Up)] = x;
            }
        }
        for (m, x) in qs.into_iter().enumerate() {
            if m < space.cutoff() {
                v[space.index(m, Spin::Down)] = x;
            }
        }
        v
    }
}

fn sqrt_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).sqrt()).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QComparison {
    pub critical_degree: Option<usize>,
    pub q_degree: Option<usize>,
    pub proportional: bool,
    pub q_divides_critical: bool,
}

#[derive(Debug, Clone)]
pub struct TruncationSpectrum {
    pub state: SeriesState,
    pub polynomial: EnergyPolynomial,
    /// Distinct roots, sorted by real then imaginary part.
    pub roots: Vec<PolyRoot>,
}

impl TruncationSpectrum {
    /// Real roots inside [lo, hi]; |Im| ≤ tol·max(1, |E|) counts as real.
    pub fn real_roots_in(&self, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
        self.roots
            .iter()
            .filter(|r| r.value.im.abs() <= tol * r.value.norm().max(1.0))
            .map(|r| r.value.re)
            .filter(|&x| (lo..=hi).contains(&x))
            .collect()
    }

    pub fn values(&self) -> Vec<c64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// Roots of the truncation polynomial.
pub fn truncation_spectrum(params: &ModelParams) -> Result<TruncationSpectrum> {
    let state = SeriesState::run(params, 1.0)?;
    let polynomial = state.truncation_polynomial()?;
    let roots = polynomial.roots()?;
    Ok(TruncationSpectrum {
        state,
        polynomial,
        roots,
    })
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub energy: c64,
    /// Coefficients over [`InvariantSubspace::basis`].
    pub coeffs: Vec<c64>,
    pub vector: Vec<c64>,
    pub residual: f64,
}

/// Assembles ψ at a truncation root and certifies it against the full H_T.
pub fn reconstruct_eigenvector(
    state: &SeriesState,
    energy: c64,
    space: &TruncatedFockSpace,
) -> Result<Reconstruction> {
    let params = state.params();
    let n_upper = params.n_upper();
    let (ps, qs) = state.coefficients_at(energy, n_upper as i64);
    let sub = InvariantSubspace::standard(n_upper);
    let coeffs: Vec<c64> = ps.into_iter().chain(qs).collect();
    let vector = sub.embed(space, &coeffs)?;
    let h = build_ht(params, space)?;
    let hv = linalg::mat_vec(h.matrix(), &vector);
    let diff: Vec<c64> = hv
        .iter()
        .zip(&vector)
        .map(|(a, b)| a - energy * b)
        .collect();
    let norm = linalg::vec_norm(&vector);
    let residual = linalg::vec_norm(&diff) / norm;
    if residual.is_nan() || residual > RECONSTRUCT_TOL {
        let worst = diff
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| space.label(i).to_string())
            .unwrap_or_default();
        return Err(Error::NotARoot {
            energy: energy.re,
            residual,
            component: worst,
        });
    }
    Ok(Reconstruction {
        energy,
        coeffs,
        vector,
        residual,
    })
}
