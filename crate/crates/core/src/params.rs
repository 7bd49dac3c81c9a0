use serde::Serialize;

use crate::error::{Error, Result};

/// Sign of the lower-left coupling; `Plus` gives a hermitian model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Phi {
    Plus,
    Minus,
}

impl Phi {
    pub fn sign(self) -> f64 {
        match self {
            Phi::Plus => 1.0,
            Phi::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Phi::Plus => 1,
            Phi::Minus => -1,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Phi::Plus),
            -1 => Ok(Phi::Minus),
            _ => Err(Error::InvalidParams(format!(
                "phi must be +1 or -1, got {s}"
            ))),
        }
    }
}

/// Couplings of the QES repair term of H_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum QesCoupling {
    /// Single coupling θ with c = ĉ = −θ/n.
    Theta(f64),
    Explicit {
        c: f64,
        c_hat: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    /// Spin splitting ε = 2μB₀.
    pub eps: f64,
    pub hbar_omega: f64,
    pub rho: f64,
    pub phi: Phi,
    /// Photon-transfer order of the extended model.
    pub k: usize,
    /// Coefficients of P(a†a) in ascending powers of the number operator.
    pub p_coeffs: Vec<f64>,
    pub qes: QesCoupling,
    /// The integer n = N + 2 of H_T.
    pub n_qes: usize,
    /// One-photon couplings (ρ₁, ρ̂₁) of H₁₂; `None` derives them from the QES couplings.
    pub linear: Option<(f64, f64)>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            eps: 1.0,
            hbar_omega: 1.0,
            rho: 0.0,
            phi: Phi::Plus,
            k: 1,
            p_coeffs: Vec::new(),
            qes: QesCoupling::Theta(0.0),
            n_qes: 2,
            linear: None,
        }
    }
}

impl ModelParams {
    pub fn extended(k: usize, phi: Phi, eps: f64, rho: f64) -> Self {
        Self {
            k,
            phi,
            eps,
            rho,
            ..Self::default()
        }
    }

    /// H_T with the single-θ convention and N = n − 2 upper states.
    pub fn qes(n_upper: usize, eps: f64, rho: f64, theta: f64) -> Self {
        Self {
            k: 2,
            eps,
            rho,
            qes: QesCoupling::Theta(theta),
            n_qes: n_upper + 2,
            ..Self::default()
        }
    }

    pub fn with_phi(mut self, phi: Phi) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_p(mut self, coeffs: Vec<f64>) -> Self {
        self.p_coeffs = coeffs;
        self
    }

    pub fn with_hbar_omega(mut self, hw: f64) -> Self {
        self.hbar_omega = hw;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.eps, self.hbar_omega, self.rho];
        if finite.iter().any(|x| !x.is_finite()) || self.p_coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParams("k must be >= 1".into()));
        }
        if let Some(d) = self.p_degree() {
            if d < 2 {
                return Err(Error::InvalidParams(format!(
                    "P(a^dag a) must have degree >= 2 when nonzero, got degree {d}"
                )));
            }
        }
        match self.qes {
            QesCoupling::Theta(t) if !t.is_finite() => {
                return Err(Error::InvalidParams("non-finite theta".into()))
            }
            QesCoupling::Explicit { c, c_hat } if !(c.is_finite() && c_hat.is_finite()) => {
                return Err(Error::InvalidParams("non-finite c or c_hat".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn validate_qes(&self) -> Result<()> {
        self.validate()?;
        if self.n_qes < 2 {
            return Err(Error::InvalidParams(format!(
                "n_qes = {} < 2 (n = N + 2 with N >= 0)",
                self.n_qes
            )));
        }
        Ok(())
    }

    /// Degree of P after trimming zero leading coefficients; `None` when P ≡ 0.
    pub fn p_degree(&self) -> Option<usize> {
        self.p_coeffs.iter().rposition(|&c| c != 0.0)
    }

    /// P evaluated at the integer photon number `n`.
    pub fn p_at(&self, n: usize) -> f64 {
        let x = n as f64;
        self.p_coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Diagonal energy of |n, m_s⟩ before coupling.
    pub fn bare_energy(&self, n: usize, upper: bool) -> f64 {
        let spin = if upper { 0.5 } else { -0.5 };
        self.hbar_omega * n as f64 + self.p_at(n) + spin * self.eps
    }

    /// (c, ĉ) of H_T.
    pub fn qes_couplings(&self) -> (f64, f64) {
        match self.qes {
            QesCoupling::Theta(t) => {
                let c = -t / self.n_qes as f64;
                (c, c)
            }
            QesCoupling::Explicit { c, c_hat } => (c, c_hat),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self.qes {
            QesCoupling::Theta(t) => Some(t),
            QesCoupling::Explicit { .. } => None,
        }
    }

    /// (ρ₁, ρ̂₁) of H₁₂: explicit, or −n·(c, ĉ) so that ρ₁ = θ under the θ convention.
    pub fn linear_couplings(&self) -> (f64, f64) {
        self.linear.unwrap_or_else(|| {
            let (c, ch) = self.qes_couplings();
            let n = self.n_qes as f64;
            (-c * n, -ch * n)
        })
    }

    /// N = n − 2, the highest upper photon number of the QES subspace.
    pub fn n_upper(&self) -> usize {
        self.n_qes.saturating_sub(2)
    }
}
