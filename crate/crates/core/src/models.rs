//! Matrix builders for every Hamiltonian of the extended Jaynes–Cummings family.
//!
//! Each model is a 2×2 block operator
//!
//! ```text
//! [ ħω a†a + P(a†a) + ε/2     upper_right            ]
//! [ lower_left                ħω a†a + P(a†a) − ε/2  ]
//! ```
//!
//! in the spin-major basis of [`crate::fock`]. All entries are real.

use faer::Mat;

use crate::error::{Error, Result};
use crate::fock::{
    falling_sqrt, fock_diagonal, lowering_power, raising_power, re, CMat, SpinFockOperator,
    TruncatedFockSpace, ZERO,
};
use crate::params::{ModelParams, Phi};

/// Which Hamiltonian to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// (ε/2)σ₃ + ħω a†a + ρ(σ₊a − σ₋a†).
    Mandal,
    /// (ε/2)σ₃ + ħω a†a + ρ(σ₊a + σ₋a†).
    Jcm,
    /// k-photon model with P(a†a) and sign φ.
    Extended,
    /// Two-photon model with an added one-photon exchange.
    H12,
    /// H₁₂ repaired to be quasi-exactly solvable.
    Ht,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mandal => "mandal",
            ModelKind::Jcm => "jcm",
            ModelKind::Extended => "extended",
            ModelKind::H12 => "h12",
            ModelKind::Ht => "ht",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "mandal" => ModelKind::Mandal,
            "jcm" => ModelKind::Jcm,
            "extended" => ModelKind::Extended,
            "h12" => ModelKind::H12,
            "ht" => ModelKind::Ht,
            _ => return None,
        })
    }

    /// Highest photon-transfer order appearing in the off-diagonal blocks.
    pub fn transfer_order(self, params: &ModelParams) -> usize {
        match self {
            ModelKind::Mandal | ModelKind::Jcm => 1,
            ModelKind::Extended => params.k,
            ModelKind::H12 | ModelKind::Ht => 2,
        }
    }

    pub fn build(
        self,
        params: &ModelParams,
        space: &TruncatedFockSpace,
    ) -> Result<SpinFockOperator> {
        match self {
            ModelKind::Mandal => build_mandal(params, space),
            ModelKind::Jcm => build_jcm(params, space),
            ModelKind::Extended => build_extended(params, space),
            ModelKind::H12 => build_h12(params, space),
            ModelKind::Ht => build_ht(params, space),
        }
    }
}

fn combine(d: usize, terms: &[(f64, &CMat)]) -> CMat {
    Mat::from_fn(d, d, |i, j| {
        terms
            .iter()
            .fold(ZERO, |acc, (s, m)| acc + re(*s) * m[(i, j)])
    })
}

fn diagonal_blocks(params: &ModelParams, space: &TruncatedFockSpace, with_p: bool) -> (CMat, CMat) {
    let p = |n: usize| if with_p { params.p_at(n) } else { 0.0 };
    let hw = params.hbar_omega;
    let half = 0.5 * params.eps;
    (
        fock_diagonal(space, |n| hw * n as f64 + p(n) + half),
        fock_diagonal(space, |n| hw * n as f64 + p(n) - half),
    )
}

fn require_cutoff(space: &TruncatedFockSpace, min_exclusive: usize, what: &str) -> Result<()> {
    if space.cutoff() <= min_exclusive {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            required: format!("D > {min_exclusive} ({what})"),
        });
    }
    Ok(())
}

fn extended_with(
    params: &ModelParams,
    space: &TruncatedFockSpace,
    k: usize,
    phi: Phi,
    with_p: bool,
) -> Result<SpinFockOperator> {
    params.validate()?;
    space.require_guard(k)?;
    let d = space.cutoff();
    let (ul, lr) = diagonal_blocks(params, space, with_p);
    let ur = combine(d, &[(params.rho, &lowering_power(space, k))]);
    let ll = combine(d, &[(phi.sign() * params.rho, &raising_power(space, k))]);
    SpinFockOperator::from_blocks(*space, &ul, &ur, &ll, &lr)
}

/// H = (ε/2)σ₃ + ħω a†a + ρ(σ₊a − σ₋a†); `k`, `phi` and P of `params` are ignored.
pub fn build_mandal(params: &ModelParams, space: &TruncatedFockSpace) -> Result<SpinFockOperator> {
    extended_with(params, space, 1, Phi::Minus, false)
}

/// The hermitian Jaynes–Cummings model; `k`, `phi` and P of `params` are ignored.
pub fn build_jcm(params: &ModelParams, space: &TruncatedFockSpace) -> Result<SpinFockOperator> {
    extended_with(params, space, 1, Phi::Plus, false)
}

/// `[[ħω n̂ + P(n̂) + ε/2, ρ a^k], [φρ (a†)^k, ħω n̂ + P(n̂) − ε/2]]`.
pub fn build_extended(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<SpinFockOperator> {
    require_cutoff(space, params.k + space.guard(), "D > k + g")?;
    extended_with(params, space, params.k, params.phi, true)
}

/// Off-diagonals ρa² + ρ₁a and φρ(a†)² + ρ̂₁a†.
pub fn build_h12(params: &ModelParams, space: &TruncatedFockSpace) -> Result<SpinFockOperator> {
    params.validate()?;
    space.require_guard(2)?;
    require_cutoff(space, 2 + space.guard(), "D > 2 + g")?;
    let d = space.cutoff();
    let (rho1, rho1_hat) = params.linear_couplings();
    let (ul, lr) = diagonal_blocks(params, space, false);
    let ur = combine(
        d,
        &[
            (params.rho, &lowering_power(space, 2)),
            (rho1, &lowering_power(space, 1)),
        ],
    );
    let ll = combine(
        d,
        &[
            (params.phi.sign() * params.rho, &raising_power(space, 2)),
            (rho1_hat, &raising_power(space, 1)),
        ],
    );
    SpinFockOperator::from_blocks(*space, &ul, &ur, &ll, &lr)
}

/// a(a†a − n): ⟨m−1|·|m⟩ = √m (m − n).
pub fn shifted_lowering(space: &TruncatedFockSpace, n: usize) -> CMat {
    let d = space.cutoff();
    Mat::from_fn(d, d, |i, j| {
        if j == i + 1 {
            re(falling_sqrt(j, 1) * (j as f64 - n as f64))
        } else {
            ZERO
        }
    })
}

/// (a†a − n)a†: ⟨j+1|·|j⟩ = √(j+1) (j + 1 − n).
pub fn shifted_raising(space: &TruncatedFockSpace, n: usize) -> CMat {
    let d = space.cutoff();
    Mat::from_fn(d, d, |i, j| {
        if i == j + 1 {
            re(falling_sqrt(i, 1) * (i as f64 - n as f64))
        } else {
            ZERO
        }
    })
}

/// Off-diagonals ρa² + c·a(a†a − n) and φρ(a†)² + ĉ·(a†a − n)a†.
pub fn build_ht(params: &ModelParams, space: &TruncatedFockSpace) -> Result<SpinFockOperator> {
    params.validate_qes()?;
    space.require_guard(2)?;
    let n = params.n_qes;
    require_cutoff(space, params.n_upper() + 4 + space.guard(), "D > N + 4 + g")?;
    let d = space.cutoff();
    let (c, c_hat) = params.qes_couplings();
    let (ul, lr) = diagonal_blocks(params, space, false);
    let ur = combine(
        d,
        &[
            (params.rho, &lowering_power(space, 2)),
            (c, &shifted_lowering(space, n)),
        ],
    );
    let ll = combine(
        d,
        &[
            (params.phi.sign() * params.rho, &raising_power(space, 2)),
            (c_hat, &shifted_raising(space, n)),
        ],
    );
    SpinFockOperator::from_blocks(*space, &ul, &ur, &ll, &lr)
}

/// The repair term H_T − H₁₂ = −(1/n)[[0, ρ₁ a a†a], [ρ̂₁ a†a a†, 0]].
///
/// The overall minus sign follows from c = −ρ₁/n in the definition of H_T.
pub fn build_qes_repair(
    params: &ModelParams,
    space: &TruncatedFockSpace,
) -> Result<SpinFockOperator> {
    params.validate_qes()?;
    let d = space.cutoff();
    let n = params.n_qes as f64;
    let (rho1, rho1_hat) = params.linear_couplings();
    let num = fock_diagonal(space, |m| m as f64);
    let a = lowering_power(space, 1);
    let adag = raising_power(space, 1);
    // a a†a = a n̂ and a†a a† = n̂ a† have no truncation corner
    let a_n = &a * &num;
    let n_adag = &num * &adag;
    let zero = Mat::<num_complex::Complex64>::zeros(d, d);
    SpinFockOperator::from_blocks(
        *space,
        &zero,
        &combine(d, &[(-rho1 / n, &a_n)]),
        &combine(d, &[(-rho1_hat / n, &n_adag)]),
        &zero,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BasisLabel, Spin};
    use crate::params::QesCoupling;

    fn up(n: usize) -> BasisLabel {
        BasisLabel { n, spin: Spin::Up }
    }
    fn down(n: usize) -> BasisLabel {
        BasisLabel {
            n,
            spin: Spin::Down,
        }
    }

    #[test]
    fn mandal_ground_state() {
        let s = TruncatedFockSpace::new(8, 3).unwrap();
        let p = ModelParams {
            eps: 0.7,
            rho: 0.4,
            ..Default::default()
        };
        let h = build_mandal(&p, &s).unwrap();
        let out = h.apply(&s.basis_vector(0, Spin::Down));
        let mut want = s.basis_vector(0, Spin::Down);
        want.iter_mut().for_each(|x| *x *= -0.35);
        for (o, w) in out.iter().zip(&want) {
            assert!((o - w).norm() < 1e-15);
        }
    }

    #[test]
    fn mandal_off_diagonal_elements() {
        let s = TruncatedFockSpace::new(4, 3).unwrap();
        let p = ModelParams {
            rho: 0.3,
            ..Default::default()
        };
        let h = build_mandal(&p, &s).unwrap();
        assert_eq!(h.element(up(0), down(1)).re, 0.3);
        assert_eq!(h.element(down(1), up(0)).re, -0.3);
    }

    #[test]
    fn jcm_is_hermitian_with_symmetric_coupling() {
        let s = TruncatedFockSpace::new(10, 3).unwrap();
        let p = ModelParams {
            rho: 0.8,
            ..Default::default()
        };
        let h = build_jcm(&p, &s).unwrap();
        assert_eq!(h.max_abs_diff(&h.adjoint()), 0.0);
        assert_eq!(h.element(down(1), up(0)).re, 0.8);
        assert_eq!(h.element(up(0), down(1)).re, 0.8);
    }

    #[test]
    fn extended_reduces_to_mandal_and_jcm() {
        let s = TruncatedFockSpace::new(12, 4).unwrap();
        let base = ModelParams {
            eps: 0.6,
            rho: 1.3,
            hbar_omega: 1.1,
            ..Default::default()
        };
        let minus = build_extended(&base.clone().with_phi(Phi::Minus), &s).unwrap();
        assert_eq!(minus.max_abs_diff(&build_mandal(&base, &s).unwrap()), 0.0);
        let plus = build_extended(&base, &s).unwrap();
        assert_eq!(plus.max_abs_diff(&build_jcm(&base, &s).unwrap()), 0.0);
    }

    #[test]
    fn extended_k3_upper_right_on_three_photons() {
        let s = TruncatedFockSpace::new(10, 5).unwrap();
        let p = ModelParams::extended(3, Phi::Plus, 1.0, 0.7);
        let h = build_extended(&p, &s).unwrap();
        // ρ a^3 |3⟩ = ρ √6 |0⟩
        assert!((h.element(up(0), down(3)).re - 0.7 * 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn extended_rejects_small_cutoff() {
        let s = TruncatedFockSpace::new(6, 5).unwrap();
        let p = ModelParams::extended(3, Phi::Plus, 1.0, 0.7);
        assert!(matches!(
            build_extended(&p, &s),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn extended_k2_is_the_two_photon_model() {
        let s = TruncatedFockSpace::new(12, 4).unwrap();
        let p = ModelParams::extended(2, Phi::Plus, 1.0, 0.9);
        let h = build_extended(&p, &s).unwrap();
        let mut hp = p.clone();
        hp.qes = QesCoupling::Explicit { c: 0.0, c_hat: 0.0 };
        hp.n_qes = 3;
        let ht = build_ht(&hp, &s).unwrap();
        assert_eq!(h.max_abs_diff(&ht), 0.0);
        hp.linear = Some((0.0, 0.0));
        assert_eq!(h.max_abs_diff(&build_h12(&hp, &s).unwrap()), 0.0);
    }

    #[test]
    fn h12_leaks_out_of_two_photon_doublet() {
        let s = TruncatedFockSpace::new(10, 4).unwrap();
        let mut p = ModelParams::extended(2, Phi::Plus, 1.0, 0.5);
        p.linear = Some((0.3, 0.45));
        let h = build_h12(&p, &s).unwrap();
        let out = h.apply(&s.basis_vector(0, Spin::Up));
        assert!((out[s.index(1, Spin::Down)].re - 0.45).abs() < 1e-15);
    }

    #[test]
    fn ht_theta_convention_matches_repair_form() {
        // ρa² + θ a(1 − a†a/(N+2)) equals ρa² + c a(a†a − n) with c = −θ/n
        let s = TruncatedFockSpace::new(14, 4).unwrap();
        let p = ModelParams::qes(2, 1.0, 0.8, 1.7);
        let h = build_ht(&p, &s).unwrap();
        let n = p.n_qes as f64;
        for m in 1..13 {
            let want = 1.7 * (m as f64).sqrt() * (1.0 - m as f64 / n);
            assert!((h.element(up(m - 1), down(m)).re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn ht_designed_zero_at_n() {
        let s = TruncatedFockSpace::new(14, 4).unwrap();
        let p = ModelParams::qes(3, 1.0, 0.8, 1.7);
        let h = build_ht(&p, &s).unwrap();
        assert_eq!(h.element(up(4), down(5)).re, 0.0);
        assert_eq!(h.element(down(5), up(4)).re, 0.0);
    }

    #[test]
    fn ht_equals_h12_plus_repair() {
        let s = TruncatedFockSpace::new(16, 4).unwrap();
        let mut p = ModelParams::qes(2, 0.9, 0.6, 1.1);
        p.qes = QesCoupling::Explicit {
            c: -0.2,
            c_hat: 0.35,
        };
        let sum = build_h12(&p, &s)
            .unwrap()
            .add(&build_qes_repair(&p, &s).unwrap());
        assert!(sum.max_abs_diff(&build_ht(&p, &s).unwrap()) < 1e-14);
    }

    #[test]
    fn ht_rejects_bad_n() {
        let s = TruncatedFockSpace::new(16, 4).unwrap();
        let mut p = ModelParams::qes(1, 1.0, 0.5, 1.0);
        p.n_qes = 1;
        assert!(build_ht(&p, &s).is_err());
    }

    #[test]
    fn diagonal_blocks_are_diagonal_and_shifted() {
        let s = TruncatedFockSpace::new(10, 4).unwrap();
        let p = ModelParams::extended(2, Phi::Minus, 0.8, 0.5).with_p(vec![0.0, 0.0, 0.1]);
        let h = build_extended(&p, &s).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let ul = h.matrix()[(i, j)];
                let lr = h.matrix()[(10 + i, 10 + j)];
                if i == j {
                    assert!((ul.re - lr.re - 0.8).abs() < 1e-14);
                } else {
                    assert_eq!(ul.norm() + lr.norm(), 0.0);
                }
            }
        }
    }
}
