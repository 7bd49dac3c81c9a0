//! Differential-operator form of the models on polynomial doublets.
//!
//! With ħ = 1 and the gauge factor R = exp(−mωx²/2), the ladder operators
//! act on R⁻¹ψ as first-order differential operators:
//!
//! ```text
//! ã  = −i d/dx / √(2mω)
//! ã† = −i (d/dx − 2mωx) / √(2mω)
//! ω ã†ã = −(1/2m) d²/dx² + ωx d/dx
//! ```
//!
//! Everything is assembled from the generators d/dx and x on dense monomial
//! coefficient vectors. A model is (quasi-)exactly solvable on a pair of
//! degree caps (d₁, d₂) when no monomial above the caps is produced.
//!
//! Eigenvalues are computed after the diagonal rescaling x^j → c_j x^j with
//! c_j = (2mω)^{j/2}/√(j!), which maps the monomials onto Fock-normalized
//! states and keeps the restricted matrix well conditioned.

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::fock::CMat;
use crate::linalg;
use crate::params::ModelParams;

/// Extra degrees kept above the caps so that compositions are exact there.
const HEADROOM: usize = 6;
pub const MAX_CAP: usize = 64;

#[derive(Debug, Clone)]
pub struct Generators {
    /// Number of monomials 1, x, …, x^{len−1}.
    pub len: usize,
    pub d: CMat,
    pub x: CMat,
    pub a: CMat,
    pub adag: CMat,
    pub number: CMat,
    pub identity: CMat,
}

pub fn generators(len: usize, mass: f64, omega: f64) -> Generators {
    let z = c64::new(0.0, 0.0);
    let d = Mat::from_fn(len, len, |i, j| {
        if j == i + 1 {
            c64::new(j as f64, 0.0)
        } else {
            z
        }
    });
    let x = Mat::from_fn(
        len,
        len,
        |i, j| if i == j + 1 { c64::new(1.0, 0.0) } else { z },
    );
    let identity = Mat::from_fn(len, len, |i, j| if i == j { c64::new(1.0, 0.0) } else { z });
    let norm = c64::new(0.0, -1.0 / (2.0 * mass * omega).sqrt());
    let a = &d * faer::Scale(norm);
    let adag = (&d - &x * faer::Scale(c64::new(2.0 * mass * omega, 0.0))) * faer::Scale(norm);
    let number = &adag * &a;
    Generators {
        len,
        d,
        x,
        a,
        adag,
        number,
        identity,
    }
}

#[derive(Debug, Clone)]
pub struct PolySpaceOperator {
    /// Spin-major block matrix on (upper, lower) monomial coefficients.
    pub matrix: CMat,
    pub len: usize,
    /// Degree caps (d₁, d₂) of the (upper, lower) polynomials.
    pub caps: (usize, usize),
    pub mass: f64,
    pub omega: f64,
}

impl PolySpaceOperator {
    fn in_caps(&self, i: usize) -> bool {
        if i < self.len {
            i <= self.caps.0
        } else {
            i - self.len <= self.caps.1
        }
    }

    fn kept(&self) -> Vec<usize> {
        (0..2 * self.len).filter(|&i| self.in_caps(i)).collect()
    }

    /// Largest coefficient produced above the caps from a capped input.
    pub fn leak(&self) -> f64 {
        let kept = self.kept();
        let mut worst = 0.0f64;
        for &j in &kept {
            for i in (0..2 * self.len).filter(|&i| !self.in_caps(i)) {
                worst = worst.max(self.matrix[(i, j)].norm());
            }
        }
        worst
    }

    fn scale_factor(&self, i: usize) -> f64 {
        let j = if i < self.len { i } else { i - self.len };
        let two_mw = 2.0 * self.mass * self.omega;
        (1..=j).map(|k| (two_mw / k as f64).sqrt()).product()
    }

    /// The capped block in the raw monomial basis.
    pub fn restricted(&self) -> CMat {
        let kept = self.kept();
        Mat::from_fn(kept.len(), kept.len(), |a, b| {
            self.matrix[(kept[a], kept[b])]
        })
    }

    /// Eigenvalues of the capped block after Fock-normalized rescaling.
    pub fn restriction_eigenvalues(&self) -> Result<Vec<c64>> {
        let kept = self.kept();
        let m = Mat::from_fn(kept.len(), kept.len(), |a, b| {
            let (i, j) = (kept[a], kept[b]);
            self.matrix[(i, j)] * (self.scale_factor(j) / self.scale_factor(i))
        });
        let mut ev = linalg::eigenvalues(&m)?;
        linalg::sort_complex(&mut ev);
        Ok(ev)
    }
}

fn check(params: &ModelParams, mass: f64, caps: (usize, usize)) -> Result<()> {
    params.validate()?;
    if !(mass > 0.0 && params.hbar_omega > 0.0) {
        return Err(Error::InvalidParams("m and omega must be positive".into()));
    }
    if caps.0.max(caps.1) > MAX_CAP {
        return Err(Error::InvalidParams(format!("degree caps above {MAX_CAP}")));
    }
    Ok(())
}

fn assemble(
    g: &Generators,
    params: &ModelParams,
    mass: f64,
    caps: (usize, usize),
    ur: CMat,
    ll: CMat,
) -> PolySpaceOperator {
    let len = g.len;
    let omega = params.hbar_omega;
    let half = c64::new(0.5 * params.eps, 0.0);
    let diag = &g.number * faer::Scale(c64::new(omega, 0.0));
    let matrix = Mat::from_fn(2 * len, 2 * len, |i, j| match (i < len, j < len) {
        (true, true) => diag[(i, j)] + if i == j { half } else { c64::new(0.0, 0.0) },
        (false, false) => diag[(i - len, j - len)] - if i == j { half } else { c64::new(0.0, 0.0) },
        (true, false) => ur[(i, j - len)],
        (false, true) => ll[(i - len, j)],
    });
    PolySpaceOperator {
        matrix,
        len,
        caps,
        mass,
        omega,
    }
}

/// Gauge-transformed model with σ₊a − σ₋a† coupling on the caps (n−1, n).
pub fn gauge_transform_mandal(
    params: &ModelParams,
    n: usize,
    mass: f64,
) -> Result<PolySpaceOperator> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    let caps = (n - 1, n);
    check(params, mass, caps)?;
    let g = generators(n + 1 + HEADROOM, mass, params.hbar_omega);
    let rho = c64::new(params.rho, 0.0);
    let ur = &g.a * faer::Scale(rho);
    let ll = &g.adag * faer::Scale(-rho);
    Ok(assemble(&g, params, mass, caps, ur, ll))
}

/// Gauge-transformed H_T on the caps (N, N+2).
pub fn gauge_transform_ht(params: &ModelParams, mass: f64) -> Result<PolySpaceOperator> {
    let n_upper = params.n_upper();
    gauge_transform_ht_with_caps(params, (n_upper, n_upper + 2), mass)
}

/// Gauge-transformed H_T on arbitrary caps; a mismatch with n shows up as leak.
pub fn gauge_transform_ht_with_caps(
    params: &ModelParams,
    caps: (usize, usize),
    mass: f64,
) -> Result<PolySpaceOperator> {
    params.validate_qes()?;
    check(params, mass, caps)?;
    let g = generators(caps.0.max(caps.1) + 1 + HEADROOM, mass, params.hbar_omega);
    let (c, c_hat) = params.qes_couplings();
    let shifted = &g.number - &g.identity * faer::Scale(c64::new(params.n_qes as f64, 0.0));
    let a2 = &g.a * &g.a;
    let adag2 = &g.adag * &g.adag;
    let ur = &a2 * faer::Scale(c64::new(params.rho, 0.0))
        + (&g.a * &shifted) * faer::Scale(c64::new(c, 0.0));
    let ll = &adag2 * faer::Scale(c64::new(params.phi.sign() * params.rho, 0.0))
        + (&shifted * &g.adag) * faer::Scale(c64::new(c_hat, 0.0));
    Ok(assemble(&g, params, mass, caps, ur, ll))
}
