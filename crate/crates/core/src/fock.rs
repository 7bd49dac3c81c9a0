//! Truncated single-mode Fock space coupled to a spin-1/2.
//!
//! The composite basis is spin-major: `|0,↑⟩ … |D−1,↑⟩` followed by
//! `|0,↓⟩ … |D−1,↓⟩`, so every operator is a 2×2 block matrix of D×D Fock
//! blocks with the spin-up block first. This ordering is frozen; labels are
//! recoverable through [`TruncatedFockSpace::label`].
//!
//! Truncation is a hard cutoff (`a†|D−1⟩ = 0`). States with `n ≥ D − g` lie in
//! the guard band and are excluded from every exactness claim.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub(crate) const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: c64 = c64 { re: 1.0, im: 0.0 };

#[inline]
pub(crate) fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Magnetic quantum number m_s = ±1/2.
    pub fn m_s(self) -> f64 {
        match self {
            Spin::Up => 0.5,
            Spin::Down => -0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BasisLabel {
    pub n: usize,
    pub spin: Spin,
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self.spin {
            Spin::Up => "+1/2",
            Spin::Down => "-1/2",
        };
        write!(f, "|{},{}>", self.n, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncatedFockSpace {
    cutoff: usize,
    guard: usize,
}

impl TruncatedFockSpace {
    pub fn new(cutoff: usize, guard: usize) -> Result<Self> {
        if cutoff < 4 {
            return Err(Error::InvalidSpace(format!("cutoff D = {cutoff} < 4")));
        }
        if guard >= cutoff {
            return Err(Error::InvalidSpace(format!(
                "guard g = {guard} leaves no exact states below D = {cutoff}"
            )));
        }
        Ok(Self { cutoff, guard })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Dimension of the spin ⊗ Fock space, 2D.
    pub fn dim(&self) -> usize {
        2 * self.cutoff
    }

    /// First photon number inside the guard band, D − g.
    pub fn exact_limit(&self) -> usize {
        self.cutoff - self.guard
    }

    /// Checks `g ≥ order + 2` for a model transferring `order` photons.
    pub fn require_guard(&self, order: usize) -> Result<()> {
        if self.guard < order + 2 {
            return Err(Error::InvalidSpace(format!(
                "guard g = {} < k + 2 = {} for photon-transfer order k = {order}",
                self.guard,
                order + 2
            )));
        }
        Ok(())
    }

    pub fn index(&self, n: usize, spin: Spin) -> usize {
        debug_assert!(n < self.cutoff);
        match spin {
            Spin::Up => n,
            Spin::Down => self.cutoff + n,
        }
    }

    pub fn label(&self, i: usize) -> BasisLabel {
        if i < self.cutoff {
            BasisLabel {
                n: i,
                spin: Spin::Up,
            }
        } else {
            BasisLabel {
                n: i - self.cutoff,
                spin: Spin::Down,
            }
        }
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    /// True when basis index `i` lies below the guard band.
    pub fn is_guarded(&self, i: usize) -> bool {
        self.label(i).n < self.exact_limit()
    }

    pub fn basis_vector(&self, n: usize, spin: Spin) -> Vec<c64> {
        let mut v = vec![ZERO; self.dim()];
        v[self.index(n, spin)] = ONE;
        v
    }
}

/// √(n(n−1)…(n−k+1)), the matrix element ⟨n−k|a^k|n⟩.
///
/// The integer product is formed first so that the result is the correctly
/// rounded square root whenever the product is below 2^53.
pub fn falling_sqrt(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut prod: u128 = 1;
    for i in 0..k {
        prod *= (n - i) as u128;
    }
    (prod as f64).sqrt()
}

/// Fock-space ladder operators on a D-dimensional truncation.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: CMat,
    pub adag: CMat,
}

pub fn build_ladder(space: &TruncatedFockSpace) -> Ladder {
    Ladder {
        a: lowering_power(space, 1),
        adag: raising_power(space, 1),
    }
}

/// a^k with entries ⟨n−k|a^k|n⟩ = √(n…(n−k+1)).
pub fn lowering_power(space: &TruncatedFockSpace, k: usize) -> CMat {
    let d = space.cutoff();
    Mat::from_fn(d, d, |i, j| {
        if j == i + k {
            re(falling_sqrt(j, k))
        } else {
            ZERO
        }
    })
}

/// (a†)^k, the transpose of a^k; (a†)^k|n⟩ = 0 once n + k ≥ D.
pub fn raising_power(space: &TruncatedFockSpace, k: usize) -> CMat {
    let d = space.cutoff();
    Mat::from_fn(d, d, |i, j| {
        if i == j + k {
            re(falling_sqrt(i, k))
        } else {
            ZERO
        }
    })
}

/// Diagonal Fock operator f(a†a).
pub fn fock_diagonal(space: &TruncatedFockSpace, f: impl Fn(usize) -> f64) -> CMat {
    let d = space.cutoff();
    Mat::from_fn(d, d, |i, j| if i == j { re(f(i)) } else { ZERO })
}

pub fn number_operator(space: &TruncatedFockSpace) -> CMat {
    fock_diagonal(space, |n| n as f64)
}

pub fn fock_identity(space: &TruncatedFockSpace) -> CMat {
    fock_diagonal(space, |_| 1.0)
}

#[derive(Debug, Clone)]
pub struct SpinOps {
    pub sigma3: CMat,
    pub sigma_plus: CMat,
    pub sigma_minus: CMat,
}

pub fn build_spin() -> SpinOps {
    let m = |a: f64, b: f64, c: f64, d: f64| {
        let e = [[a, b], [c, d]];
        Mat::from_fn(2, 2, |i, j| re(e[i][j]))
    };
    SpinOps {
        sigma3: m(1.0, 0.0, 0.0, -1.0),
        sigma_plus: m(0.0, 1.0, 0.0, 0.0),
        sigma_minus: m(0.0, 0.0, 1.0, 0.0),
    }
}

pub fn spin_identity() -> CMat {
    Mat::from_fn(2, 2, |i, j| if i == j { ONE } else { ZERO })
}

/// Dense operator on the 2D-dimensional spin ⊗ Fock space.
#[derive(Debug, Clone)]
pub struct SpinFockOperator {
    matrix: CMat,
    space: TruncatedFockSpace,
}

impl SpinFockOperator {
    pub fn from_matrix(space: TruncatedFockSpace, matrix: CMat) -> Result<Self> {
        let dim = space.dim();
        for got in [matrix.nrows(), matrix.ncols()] {
            if got != dim {
                return Err(Error::DimensionMismatch { expected: dim, got });
            }
        }
        Ok(Self { matrix, space })
    }

    /// Kronecker product spin_op ⊗ fock_op in the spin-major ordering.
    pub fn tensor(space: TruncatedFockSpace, spin_op: &CMat, fock_op: &CMat) -> Result<Self> {
        check_square(spin_op, 2)?;
        check_square(fock_op, space.cutoff())?;
        let d = space.cutoff();
        let matrix = Mat::from_fn(2 * d, 2 * d, |i, j| {
            spin_op[(i / d, j / d)] * fock_op[(i % d, j % d)]
        });
        Ok(Self { matrix, space })
    }

    /// Assembles `[[upper_left, upper_right], [lower_left, lower_right]]`.
    pub fn from_blocks(
        space: TruncatedFockSpace,
        upper_left: &CMat,
        upper_right: &CMat,
        lower_left: &CMat,
        lower_right: &CMat,
    ) -> Result<Self> {
        let d = space.cutoff();
        for b in [upper_left, upper_right, lower_left, lower_right] {
            check_square(b, d)?;
        }
        let matrix = Mat::from_fn(2 * d, 2 * d, |i, j| {
            let (bi, bj) = (i / d, j / d);
            let (r, c) = (i % d, j % d);
            match (bi, bj) {
                (0, 0) => upper_left[(r, c)],
                (0, _) => upper_right[(r, c)],
                (_, 0) => lower_left[(r, c)],
                _ => lower_right[(r, c)],
            }
        });
        Ok(Self { matrix, space })
    }

    pub fn identity(space: TruncatedFockSpace) -> Self {
        let n = space.dim();
        Self {
            matrix: Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO }),
            space,
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        self.space.labels()
    }

    /// ⟨row|H|col⟩.
    pub fn element(&self, row: BasisLabel, col: BasisLabel) -> c64 {
        self.matrix[(
            self.space.index(row.n, row.spin),
            self.space.index(col.n, col.spin),
        )]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        Self {
            matrix: Mat::from_fn(n, n, |i, j| self.matrix[(j, i)].conj()),
            space: self.space,
        }
    }

    pub fn conjugate(&self) -> Self {
        let n = self.dim();
        Self {
            matrix: Mat::from_fn(n, n, |i, j| self.matrix[(i, j)].conj()),
            space: self.space,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            matrix: &self.matrix * &rhs.matrix,
            space: self.space,
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            matrix: &self.matrix + &rhs.matrix,
            space: self.space,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            matrix: &self.matrix - &rhs.matrix,
            space: self.space,
        }
    }

    pub fn scale(&self, s: c64) -> Self {
        let n = self.dim();
        Self {
            matrix: Mat::from_fn(n, n, |i, j| s * self.matrix[(i, j)]),
            space: self.space,
        }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length must equal 2D");
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// True when every entry has exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.matrix[(i, j)].im == 0.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff_where(&self.matrix, &other.matrix, |_, _| true)
    }

    /// Max-entry deviation restricted to rows and columns below the guard band.
    pub fn guarded_max_abs_diff(&self, other: &Self) -> f64 {
        let sp = self.space;
        max_abs_diff_where(&self.matrix, &other.matrix, |i, j| {
            sp.is_guarded(i) && sp.is_guarded(j)
        })
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.matrix[(i, j)].norm())
            .fold(0.0, f64::max)
    }
}

fn check_square(m: &CMat, dim: usize) -> Result<()> {
    for got in [m.nrows(), m.ncols()] {
        if got != dim {
            return Err(Error::DimensionMismatch { expected: dim, got });
        }
    }
    Ok(())
}

pub(crate) fn max_abs_diff_where(a: &CMat, b: &CMat, keep: impl Fn(usize, usize) -> bool) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if keep(i, j) {
                worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
    }
    worst
}

/// Fock parity (−1)^{a†a} ⊗ 1_spin.
#[derive(Debug, Clone)]
pub struct ParityOperator {
    op: SpinFockOperator,
}

impl ParityOperator {
    pub fn new(space: TruncatedFockSpace) -> Self {
        let fock = fock_diagonal(&space, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
        let op = SpinFockOperator::tensor(space, &spin_identity(), &fock)
            .expect("parity blocks have matching dimensions");
        Self { op }
    }

    pub fn as_operator(&self) -> &SpinFockOperator {
        &self.op
    }

    /// P H P; P is its own inverse.
    pub fn conjugate(&self, h: &SpinFockOperator) -> SpinFockOperator {
        self.op.mul(h).mul(&self.op)
    }
}

/// σ₃ ⊗ 1_Fock.
pub fn sigma3_operator(space: TruncatedFockSpace) -> SpinFockOperator {
    SpinFockOperator::tensor(space, &build_spin().sigma3, &fock_identity(&space))
        .expect("sigma3 blocks have matching dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize) -> TruncatedFockSpace {
        TruncatedFockSpace::new(d, 3).unwrap()
    }

    fn fock_mul(a: &CMat, b: &CMat) -> CMat {
        a * b
    }

    #[test]
    fn rejects_small_cutoff_and_oversized_guard() {
        assert!(TruncatedFockSpace::new(3, 0).is_err());
        assert!(TruncatedFockSpace::new(8, 8).is_err());
        assert!(TruncatedFockSpace::new(8, 3)
            .unwrap()
            .require_guard(2)
            .is_err());
        assert!(TruncatedFockSpace::new(8, 4)
            .unwrap()
            .require_guard(2)
            .is_ok());
    }

    #[test]
    fn annihilator_kills_vacuum() {
        let s = space(8);
        let l = build_ladder(&s);
        for i in 0..8 {
            assert_eq!(l.a[(i, 0)], ZERO);
        }
    }

    #[test]
    fn number_operator_is_adag_a() {
        let s = space(8);
        let l = build_ladder(&s);
        let n = fock_mul(&l.adag, &l.a);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert!((n[(i, j)] - re(want)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn commutator_is_identity_away_from_corner() {
        let s = space(8);
        let l = build_ladder(&s);
        let comm = fock_mul(&l.a, &l.adag) - fock_mul(&l.adag, &l.a);
        for m in 0..7 {
            for n in 0..7 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((comm[(m, n)] - re(want)).norm() < 1e-14, "({m},{n})");
            }
        }
        // the hard cutoff shows up only in the last diagonal entry
        assert!((comm[(7, 7)] - re(-7.0)).norm() < 1e-14);
    }

    #[test]
    fn creation_is_adjoint_of_annihilation() {
        let s = space(10);
        let l = build_ladder(&s);
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(l.adag[(i, j)], l.a[(j, i)].conj());
            }
        }
    }

    #[test]
    fn pauli_actions() {
        let sp = build_spin();
        // column 0 is spin-up
        assert_eq!(sp.sigma_plus[(0, 0)], ZERO);
        assert_eq!(sp.sigma_plus[(1, 0)], ZERO);
        assert_eq!(sp.sigma_minus[(1, 0)], ONE);
        let anti = &(&sp.sigma_plus * &sp.sigma_minus) + &(&sp.sigma_minus * &sp.sigma_plus);
        assert_eq!(anti, spin_identity());
        assert_eq!(sp.sigma_plus.adjoint().to_owned(), sp.sigma_minus);
    }

    #[test]
    fn tensor_of_disjoint_factors_commutes() {
        let s = space(6);
        let sp = build_spin();
        let a = SpinFockOperator::tensor(s, &sp.sigma3, &fock_identity(&s)).unwrap();
        let b = SpinFockOperator::tensor(s, &spin_identity(), &number_operator(&s)).unwrap();
        assert_eq!(a.commutator(&b).max_abs(), 0.0);
    }

    #[test]
    fn sigma_plus_a_moves_down_to_up() {
        let s = space(6);
        let op =
            SpinFockOperator::tensor(s, &build_spin().sigma_plus, &build_ladder(&s).a).unwrap();
        let out = op.apply(&s.basis_vector(1, Spin::Down));
        let want = s.basis_vector(0, Spin::Up);
        for (o, w) in out.iter().zip(&want) {
            assert!((o - w).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_identity_is_identity() {
        let s = space(5);
        let t = SpinFockOperator::tensor(s, &spin_identity(), &fock_identity(&s)).unwrap();
        assert_eq!(t.max_abs_diff(&SpinFockOperator::identity(s)), 0.0);
    }

    #[test]
    fn tensor_rejects_wrong_dimensions() {
        let s = space(5);
        let bad = fock_identity(&space(6));
        assert!(matches!(
            SpinFockOperator::tensor(s, &spin_identity(), &bad),
            Err(Error::DimensionMismatch {
                expected: 5,
                got: 6
            })
        ));
    }

    #[test]
    fn parity_squares_to_one_and_anticommutes_with_ladder() {
        let s = space(9);
        let p = ParityOperator::new(s);
        let id = SpinFockOperator::identity(s);
        assert_eq!(p.as_operator().mul(p.as_operator()).max_abs_diff(&id), 0.0);
        assert_eq!(p.as_operator().adjoint().max_abs_diff(p.as_operator()), 0.0);
        let l = build_ladder(&s);
        for f in [&l.a, &l.adag] {
            let op = SpinFockOperator::tensor(s, &spin_identity(), f).unwrap();
            let conj = p.conjugate(&op);
            assert_eq!(conj.add(&op).max_abs(), 0.0);
        }
    }

    #[test]
    fn labels_follow_spin_major_ordering() {
        let s = space(4);
        let labels = s.labels();
        assert_eq!(
            labels[0],
            BasisLabel {
                n: 0,
                spin: Spin::Up
            }
        );
        assert_eq!(
            labels[3],
            BasisLabel {
                n: 3,
                spin: Spin::Up
            }
        );
        assert_eq!(
            labels[4],
            BasisLabel {
                n: 0,
                spin: Spin::Down
            }
        );
        assert_eq!(s.index(2, Spin::Down), 6);
    }

    #[test]
    fn construction_is_bit_reproducible() {
        let s = space(12);
        let a = lowering_power(&s, 3);
        let b = lowering_power(&s, 3);
        assert_eq!(a, b);
        // ⟨0|a^3|3⟩ = √6 from a single rounded sqrt
        assert_eq!(a[(0, 3)].re, 6f64.sqrt());
    }
}
