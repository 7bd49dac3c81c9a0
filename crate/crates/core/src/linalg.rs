//! Dense eigen-solver plumbing.
//!
//! General (non-normal) eigenproblems go through faer's Hessenberg/Schur
//! solver. Purely real inputs are solved in real arithmetic so that complex
//! eigenvalues come out as exact conjugate pairs. Every eigenpair carries its
//! relative residual ‖Av − λv‖ / ‖v‖.

use faer::Mat;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::fock::CMat;

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: c64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<c64>,
    pub residual: f64,
}

fn is_real(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m[(i, j)].im == 0.0))
}

pub fn eigen_decompose(m: &CMat) -> Result<Vec<EigenPair>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (values, vectors): (Vec<c64>, Vec<Vec<c64>>) = if is_real(m) {
        let real = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        let evd = real
            .eigen()
            .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
        let (s, u) = (evd.S(), evd.U());
        (
            (0..n).map(|i| s[i]).collect(),
            (0..n)
                .map(|j| (0..n).map(|i| u[(i, j)]).collect())
                .collect(),
        )
    } else {
        let evd = m
            .eigen()
            .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
        let (s, u) = (evd.S(), evd.U());
        (
            (0..n).map(|i| s[i]).collect(),
            (0..n)
                .map(|j| (0..n).map(|i| u[(i, j)]).collect())
                .collect(),
        )
    };
    let mut pairs = Vec::with_capacity(n);
    for (value, mut vector) in values.into_iter().zip(vectors) {
        let norm = vec_norm(&vector);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::EigenSolver("degenerate eigenvector".into()));
        }
        vector.iter_mut().for_each(|x| *x /= norm);
        let residual = residual(m, value, &vector);
        pairs.push(EigenPair {
            value,
            vector,
            residual,
        });
    }
    Ok(pairs)
}

pub fn eigenvalues(m: &CMat) -> Result<Vec<c64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_real(m) {
        let real = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)].re);
        real.eigenvalues()
            .map_err(|e| Error::EigenSolver(format!("{e:?}")))
    } else {
        m.eigenvalues()
            .map_err(|e| Error::EigenSolver(format!("{e:?}")))
    }
}

pub fn mat_vec(m: &CMat, v: &[c64]) -> Vec<c64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// ‖Mv − λv‖ / ‖v‖.
pub fn residual(m: &CMat, lambda: c64, v: &[c64]) -> f64 {
    let mv = mat_vec(m, v);
    let r: f64 = mv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / vec_norm(v)
}

pub fn frobenius(m: &CMat) -> f64 {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// |⟨u, v⟩| / (‖u‖‖v‖).
pub fn abs_cosine(u: &[c64], v: &[c64]) -> f64 {
    let dot: c64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    dot.norm() / (vec_norm(u) * vec_norm(v))
}

pub fn cmp_complex(a: &c64, b: &c64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn sort_complex(v: &mut [c64]) {
    v.sort_by(cmp_complex);
}

/// Distance from `x` to the nearest element of `set` (infinite for an empty set).
pub fn nearest_distance(x: c64, set: &[c64]) -> f64 {
    set.iter()
        .map(|y| (x - y).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Greedy one-to-one matching of `a` into `b`; returns the worst matched distance.
///
/// Fails (returns `None`) when `b` has fewer elements than `a`.
pub fn match_into(a: &[c64], b: &[c64]) -> Option<f64> {
    if b.len() < a.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| cmp_complex(&a[i], &a[j]));
    for i in order {
        let (best, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (a[i] - y).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[best] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

/// Roots of Σ coeffs[i] xⁱ from the eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[f64]) -> Result<Vec<c64>> {
    let deg = coeffs
        .iter()
        .rposition(|&c| c != 0.0)
        .ok_or(Error::DegeneratePolynomial)?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let comp = Mat::<c64>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            c64::new(-coeffs[deg - 1 - j] / lead, 0.0)
        } else if i == j + 1 {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    eigenvalues(&comp)
}
