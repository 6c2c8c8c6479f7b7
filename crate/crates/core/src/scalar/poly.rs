use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered roots `a_1, ..., a_d` of `(z - a_1)...(z - a_d)`.
///
/// Serialized as a JSON array of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct RootList(Vec<Complex64>);

impl RootList {
    pub fn new(roots: Vec<Complex64>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::ArityMismatch("a root list needs at least one root".into()));
        }
        if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("root"));
        }
        Ok(Self(roots))
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max(1, max|a_j|)^d`, the magnitude scale for polynomial residuals.
    pub fn residual_scale(&self) -> f64 {
        self.max_modulus().max(1.0).powi(self.degree() as i32)
    }

    /// Subtracts the mean from every root.
    pub fn centered(&self) -> Self {
        let mean = self.0.iter().sum::<Complex64>() / self.0.len() as f64;
        Self(self.0.iter().map(|z| z - mean).collect())
    }
}

impl TryFrom<Vec<[f64; 2]>> for RootList {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<RootList> for Vec<[f64; 2]> {
    fn from(r: RootList) -> Self {
        r.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

/// Dense polynomial `c_0 + c_1 z + ... + c_m z^m`, coefficients low to high.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("polynomial has coefficients")
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by Horner.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `sum |c_i| |z|^i`, the rounding-error scale of evaluating at `z`.
    pub fn eval_magnitude(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        Polynomial {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }
}

/// `z^d + c_{d-1} z^{d-1} + ... + c_0`; only the lower coefficients are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    pub lower: Vec<Complex64>,
}

impl MonicPolynomial {
    pub fn degree(&self) -> usize {
        self.lower.len()
    }

    pub fn to_polynomial(&self) -> Polynomial {
        let mut coeffs = self.lower.clone();
        coeffs.push(Complex64::new(1.0, 0.0));
        Polynomial { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.to_polynomial().eval(z)
    }
}

/// Vieta expansion of `(z - a_1)...(z - a_d)`.
pub fn coeffs_from_roots(roots: &RootList) -> MonicPolynomial {
    // coeffs low to high, starts as the constant 1
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &a in roots.roots() {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, &c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * a;
        }
        coeffs = next;
    }
    coeffs.pop();
    MonicPolynomial { lower: coeffs }
}

/// Formal derivative of a monic polynomial; the result has leading coefficient `d`.
pub fn differentiate(p: &MonicPolynomial) -> Polynomial {
    p.to_polynomial().derivative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn roots(v: &[Complex64]) -> RootList {
        RootList::new(v.to_vec()).unwrap()
    }

    #[test]
    fn vieta_examples() {
        let p = coeffs_from_roots(&roots(&[c(1.0, 0.0), c(-1.0, 0.0)]));
        assert_eq!(p.lower, vec![c(-1.0, 0.0), c(0.0, 0.0)]);

        let p = coeffs_from_roots(&roots(&[c(0.0, 0.0); 3]));
        assert_eq!(p.lower, vec![c(0.0, 0.0); 3]);

        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let p = coeffs_from_roots(&roots(&[c(1.0, 0.0), w, w * w]));
        assert!((p.lower[0] + 1.0).norm() < 1e-15);
        assert!(p.lower[1].norm() < 1e-15);
        assert!(p.lower[2].norm() < 1e-15);
    }

    #[test]
    fn expansion_vanishes_at_roots() {
        let r = roots(&[c(0.3, -1.2), c(2.0, 0.5), c(-0.7, 0.0), c(0.0, 3.0)]);
        let p = coeffs_from_roots(&r);
        for &a in r.roots() {
            assert!(p.eval(a).norm() <= 1e-10 * r.residual_scale());
        }
    }

    #[test]
    fn derivative_examples() {
        let p = MonicPolynomial {
            lower: vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        };
        let dp = differentiate(&p);
        assert_eq!(dp.coeffs, vec![c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);

        let p = MonicPolynomial {
            lower: vec![c(5.0, 1.0), c(2.0, -3.0)],
        };
        assert_eq!(differentiate(&p).coeffs, vec![c(2.0, -3.0), c(2.0, 0.0)]);

        for d in 1..8 {
            let p = MonicPolynomial {
                lower: vec![c(1.0, 1.0); d],
            };
            let dp = differentiate(&p);
            assert_eq!(dp.degree(), d - 1);
            assert_eq!(dp.leading(), c(d as f64, 0.0));
        }
    }

    #[test]
    fn horner_derivative_matches_formal_derivative() {
        let p = Polynomial {
            coeffs: vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(2.0, 0.0)],
        };
        let z = c(0.4, -0.9);
        let (v, dv) = p.eval_with_derivative(z);
        assert!((v - p.eval(z)).norm() < 1e-14);
        assert!((dv - p.derivative().eval(z)).norm() < 1e-14);
    }

    #[test]
    fn empty_root_list_rejected() {
        assert!(RootList::new(vec![]).is_err());
        assert!(RootList::new(vec![c(f64::NAN, 0.0)]).is_err());
    }
}
