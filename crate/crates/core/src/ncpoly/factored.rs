//! Factored polynomials `lead * (z - a_1)...(z - a_d)` over `M_n(C)` and the
//! omitted-factor derivative.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ensemble::{sample_matrix, Ensemble};
use crate::linalg::matrix::{product, ComplexMatrix};

fn common_dimension(ms: &[ComplexMatrix]) -> Result<usize> {
    let n = ms
        .first()
        .ok_or_else(|| Error::ArityMismatch("empty factor list".into()))?
        .dim();
    for m in ms {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
    }
    Ok(n)
}

/// `lead * (z - a_1)(z - a_2)...(z - a_d)`, multiplied left to right.
#[derive(Debug, Clone)]
pub struct FactoredPoly {
    factors: Vec<ComplexMatrix>,
    lead: Complex64,
}

impl FactoredPoly {
    pub fn new(factors: Vec<ComplexMatrix>, lead: Complex64) -> Result<Self> {
        common_dimension(&factors)?;
        Ok(Self { factors, lead })
    }

    /// The monic polynomial with the given roots.
    pub fn monic(factors: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(factors, Complex64::new(1.0, 0.0))
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn lead(&self) -> Complex64 {
        self.lead
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn eval(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(eval_linear_factors(z, &self.factors).scale(self.lead))
    }
}

/// `(z - a_1)...(z - a_k)` without dimension checks.
pub(crate) fn eval_linear_factors(z: &ComplexMatrix, factors: &[ComplexMatrix]) -> ComplexMatrix {
    let shifted: Vec<ComplexMatrix> = factors.iter().map(|a| z - a).collect();
    product(z.dim(), &shifted)
}

pub fn eval_factored(p: &FactoredPoly, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    p.eval(z)
}

/// `P'(z) = sum_j (z - a_1)...(z - a_j)^...(z - a_d)`, where the `j`-th
/// term omits the `j`-th factor and keeps the others in order.
#[derive(Debug, Clone)]
pub struct DerivativeForm {
    /// `terms[j]` lists the factors of term `j`, i.e. all `a_i` with `i != j`.
    pub terms: Vec<Vec<ComplexMatrix>>,
    lead: Complex64,
    factors: Vec<ComplexMatrix>,
}

impl DerivativeForm {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    /// Evaluates with prefix and suffix products, `O(d)` matrix products.
    pub fn eval(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if z.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: z.dim(),
            });
        }
        let d = self.degree();
        let shifted: Vec<ComplexMatrix> = self.factors.iter().map(|a| z - a).collect();
        // prefix[j] = (z - a_1)...(z - a_j)
        let mut prefix = Vec::with_capacity(d + 1);
        prefix.push(ComplexMatrix::identity(n));
        for s in &shifted {
            let next = prefix.last().map(|p: &ComplexMatrix| p * s).expect("non-empty");
            prefix.push(next);
        }
        // suffix[j] = (z - a_{j+1})...(z - a_d)
        let mut suffix = vec![ComplexMatrix::identity(n); d + 1];
        for j in (0..d).rev() {
            suffix[j] = &shifted[j] * &suffix[j + 1];
        }
        let mut acc = ComplexMatrix::zeros(n);
        for j in 0..d {
            acc += &(&prefix[j] * &suffix[j + 1]);
        }
        Ok(acc.scale(self.lead))
    }

    pub fn eval_batch(&self, probes: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        probes.iter().map(|z| self.eval(z)).collect()
    }
}

pub fn derivative_form(p: &FactoredPoly) -> DerivativeForm {
    let d = p.degree();
    let terms = (0..d)
        .map(|j| {
            p.factors
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    DerivativeForm {
        terms,
        lead: p.lead,
        factors: p.factors.clone(),
    }
}

pub fn eval_derivative(d: &DerivativeForm, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    d.eval(z)
}

/// Which algebra the probes range over.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeScope {
    /// All of `M_n(C)`.
    Full,
    /// The maximal abelian subalgebra of matrices diagonal in the basis `U`.
    Diagonal { unitary: ComplexMatrix },
}

/// Test points for deciding equality of two polynomial functions.
#[derive(Debug, Clone)]
pub struct ProbeSet {
    pub probes: Vec<ComplexMatrix>,
    pub scope: ProbeScope,
}

impl ProbeSet {
    /// Standard count `max(2d, 8)`.
    pub fn default_count(d: usize) -> usize {
        (2 * d).max(8)
    }

    /// `count` Ginibre probes in dimension `n`.
    pub fn ginibre<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Self {
        Self {
            probes: (0..count)
                .map(|_| sample_matrix(Ensemble::Ginibre, n, rng))
                .collect(),
            scope: ProbeScope::Full,
        }
    }

    pub fn from_matrices(probes: Vec<ComplexMatrix>) -> Result<Self> {
        common_dimension(&probes)?;
        Ok(Self {
            probes,
            scope: ProbeScope::Full,
        })
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.probes[0].dim()
    }

    /// Conditional expectation onto the matrices diagonal in basis `unitary`:
    /// `z -> U diag(diag(U* z U)) U*`.
    pub fn project_diagonal(&self, unitary: &ComplexMatrix) -> Self {
        let u_star = unitary.adjoint();
        let probes = self
            .probes
            .iter()
            .map(|z| {
                let rotated = &(&u_star * z) * unitary;
                &(unitary * &ComplexMatrix::from_diagonal(&rotated.diagonal())) * &u_star
            })
            .collect();
        Self {
            probes,
            scope: ProbeScope::Diagonal {
                unitary: unitary.clone(),
            },
        }
    }
}

/// `max_t ||P'(z_t) - d (z_t - b_1)...(z_t - b_{d-1})||_F / max(1, ||z_t||_F)^{d-1}`.
pub fn functional_residual(
    form: &DerivativeForm,
    b: &[ComplexMatrix],
    probes: &ProbeSet,
) -> Result<f64> {
    let d = form.degree();
    if b.len() + 1 != d {
        return Err(Error::ArityMismatch(format!(
            "expected {} factors for the derivative of a degree-{d} polynomial, got {}",
            d.saturating_sub(1),
            b.len()
        )));
    }
    if !b.is_empty() {
        common_dimension(b)?;
        if b[0].dim() != form.dim() {
            return Err(Error::DimensionMismatch {
                expected: form.dim(),
                found: b[0].dim(),
            });
        }
    }
    let mut worst: f64 = 0.0;
    for z in &probes.probes {
        let lhs = form.eval(z)?;
        let rhs = eval_linear_factors(z, b).scale_re(d as f64);
        let norm = z.frobenius_norm().max(1.0).powi(d as i32 - 1);
        worst = worst.max((&lhs - &rhs).frobenius_norm() / norm);
    }
    Ok(worst)
}
