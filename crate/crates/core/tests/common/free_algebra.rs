//! Integer polynomials in noncommuting letters, enough to expand
//! `P'(z)` and `d (z - b_1)...(z - b_{d-1})` symbolically.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Z,
    A(usize),
    B(usize),
}

pub type Word = Vec<Letter>;

/// Finite sum of words with integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreePoly(pub BTreeMap<Word, i64>);

impl FreePoly {
    pub fn letter(l: Letter) -> Self {
        FreePoly(BTreeMap::from([(vec![l], 1)]))
    }

    pub fn one() -> Self {
        FreePoly(BTreeMap::from([(Vec::new(), 1)]))
    }

    /// `z - x`.
    pub fn linear(x: Letter) -> Self {
        FreePoly(BTreeMap::from([(vec![Letter::Z], 1), (vec![x], -1)]))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (w, c) in &other.0 {
            *out.entry(w.clone()).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        FreePoly(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out: BTreeMap<Word, i64> = BTreeMap::new();
        for (u, x) in &self.0 {
            for (v, y) in &other.0 {
                let mut w = u.clone();
                w.extend_from_slice(v);
                *out.entry(w).or_insert(0) += x * y;
            }
        }
        out.retain(|_, c| *c != 0);
        FreePoly(out)
    }

    pub fn scale(&self, k: i64) -> Self {
        FreePoly(self.0.iter().map(|(w, c)| (w.clone(), c * k)).filter(|(_, c)| *c != 0).collect())
    }

    pub fn coefficient(&self, w: &[Letter]) -> i64 {
        self.0.get(w).copied().unwrap_or(0)
    }
}

/// `sum_j prod_{i != j} (z - a_i)`, factors kept in order.
pub fn hat_derivative(d: usize) -> FreePoly {
    let mut total = FreePoly::default();
    for skip in 1..=d {
        let mut term = FreePoly::one();
        for i in (1..=d).filter(|&i| i != skip) {
            term = term.mul(&FreePoly::linear(Letter::A(i)));
        }
        total = total.add(&term);
    }
    total
}

/// `d (z - b_1)...(z - b_{d-1})`.
pub fn factored_derivative(d: usize) -> FreePoly {
    let mut p = FreePoly::one();
    for k in 1..d {
        p = p.mul(&FreePoly::linear(Letter::B(k)));
    }
    p.scale(d as i64)
}

/// `z^p x z^q`.
pub fn single_letter_word(p: usize, x: Letter, q: usize) -> Word {
    let mut w = vec![Letter::Z; p];
    w.push(x);
    w.extend(std::iter::repeat(Letter::Z).take(q));
    w
}

/// Solves the single-letter equations for each `b_k`: the words
/// `z^{k-1} b_k z^{d-1-k}` on the right must match `z^{k-1} a_i z^{d-1-k}` on
/// the left. Returns, for each `k`, `(numerators over a_1..a_d, denominator)`.
pub fn extract_critical_factors(d: usize) -> Vec<(Vec<i64>, i64)> {
    let lhs = hat_derivative(d);
    let rhs = factored_derivative(d);
    (1..d)
        .map(|k| {
            let (p, q) = (k - 1, d - 1 - k);
            let b_coeff = rhs.coefficient(&single_letter_word(p, Letter::B(k), q));
            let nums = (1..=d)
                .map(|i| lhs.coefficient(&single_letter_word(p, Letter::A(i), q)))
                .collect();
            (nums, b_coeff)
        })
        .collect()
}
