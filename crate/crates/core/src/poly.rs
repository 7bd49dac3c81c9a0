//! Univariate polynomials in the energy E with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64 as c64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;

/// Largest acceptable root condition estimate.
pub const MAX_ROOT_CONDITION: f64 = 1e13;

/// Exact rational for a finite f64 (every binary64 value is a dyadic rational).
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite parameter")
}

pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Coefficients in ascending powers of E; the leading coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnergyPolynomial {
    coeffs: Vec<BigRational>,
}

impl EnergyPolynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial E.
    pub fn energy() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    /// a + bE.
    pub fn linear(a: BigRational, b: BigRational) -> Self {
        Self::from_coeffs(vec![a, b])
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * integer(i as i64))
                .collect(),
        )
    }

    /// Euclidean division: self = q·d + r with deg r < deg d.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading().unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let f = &r[i + dd] / lead;
            if !f.is_zero() {
                for (k, dc) in d.coeffs.iter().enumerate() {
                    r[i + k] -= &f * dc;
                }
            }
            q[i] = f;
        }
        r.truncate(dd);
        (Self::from_coeffs(q), Self::from_coeffs(r))
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1.monic();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The product of the distinct irreducible factors.
    pub fn square_free(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn eval(&self, x: c64) -> c64 {
        horner(&self.to_f64_coeffs(), x)
    }

    /// Distinct complex roots, companion eigenvalues polished by Newton steps.
    pub fn roots(&self) -> Result<Vec<PolyRoot>> {
        let deg = self.degree().ok_or(Error::DegeneratePolynomial)?;
        if deg == 0 {
            return Ok(Vec::new());
        }
        let sqf = self.square_free();
        let coeffs = sqf.to_f64_coeffs();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        let deriv: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        let mut out = Vec::new();
        for z0 in linalg::companion_roots(&coeffs)? {
            let mut z = z0;
            for _ in 0..60 {
                let dp = horner(&deriv, z);
                if dp == c64::new(0.0, 0.0) {
                    break;
                }
                let step = horner(&coeffs, z) / dp;
                z -= step;
                if step.norm() <= 1e-17 * z.norm().max(1.0) {
                    break;
                }
            }
            // relative condition number of the simple root
            let abs_sum = coeffs
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * z.norm() + c.abs());
            let condition = abs_sum / (z.norm().max(1e-300) * horner(&deriv, z).norm());
            if condition.is_nan() || condition > MAX_ROOT_CONDITION {
                return Err(Error::IllConditioned(condition));
            }
            out.push(PolyRoot {
                value: z,
                condition,
            });
        }
        out.sort_by(|a, b| linalg::cmp_complex(&a.value, &b.value));
        Ok(out)
    }
}

fn horner(coeffs: &[f64], x: c64) -> c64 {
    coeffs
        .iter()
        .rev()
        .fold(c64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyRoot {
    pub value: c64,
    pub condition: f64,
}

impl Add for &EnergyPolynomial {
    type Output = EnergyPolynomial;
    fn add(self, rhs: Self) -> EnergyPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        EnergyPolynomial::from_coeffs(
            (0..n)
                .map(|i| {
                    let a = self
                        .coeffs
                        .get(i)
                        .cloned()
                        .unwrap_or_else(BigRational::zero);
                    match rhs.coeffs.get(i) {
                        Some(b) => a + b,
                        None => a,
                    }
                })
                .collect(),
        )
    }
}

impl Neg for &EnergyPolynomial {
    type Output = EnergyPolynomial;
    fn neg(self) -> EnergyPolynomial {
        EnergyPolynomial::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &EnergyPolynomial {
    type Output = EnergyPolynomial;
    fn sub(self, rhs: Self) -> EnergyPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &EnergyPolynomial {
    type Output = EnergyPolynomial;
    fn mul(self, rhs: Self) -> EnergyPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return EnergyPolynomial::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        EnergyPolynomial::from_coeffs(out)
    }
}

impl fmt::Display for EnergyPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN);
            if first {
                write!(f, "{v}")?;
            } else if c.is_negative() {
                write!(f, " - {}", v.abs())?;
            } else {
                write!(f, " + {v}")?;
            }
            match i {
                0 => {}
                1 => write!(f, " E")?,
                _ => write!(f, " E^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}
