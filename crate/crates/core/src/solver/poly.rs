//! Right-hand sides `F(x, y)` as polynomials in `y` with series coefficients.

use std::collections::BTreeMap;


use crate::error::{Error, Result};
use crate::linalg::SeriesMatrix;
use crate::scalar::Coeff;
use crate::series::{MultiIndex, SeriesVector, TruncatedSeries};

/// `F(x, y) = Σ_I F_I(x) y^I` with `I ∈ ℕ^N` and vector coefficients `F_I ∈ 𝒪^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct YPolynomial<T> {
    size: usize,
    dim: usize,
    trunc: u32,
    terms: BTreeMap<MultiIndex, SeriesVector<T>>,
}

fn binomial<T: Coeff>(n: u32, k: u32) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_integer((n - i) as i64) / T::from_integer((i + 1) as i64);
    }
    acc
}

impl<T: Coeff> YPolynomial<T> {
    pub fn new(size: usize, dim: usize, trunc: u32) -> Self {
        YPolynomial {
            size,
            dim,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Add `coeffs · y^index` (coefficients truncated to the polynomial's order).
    pub fn add_term(&mut self, index: MultiIndex, coeffs: SeriesVector<T>) -> Result<()> {
        if index.dim() != self.size || coeffs.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: if index.dim() != self.size {
                    index.dim()
                } else {
                    coeffs.len()
                },
            });
        }
        if let Some(c) = coeffs.iter().find(|c| c.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: c.dim(),
            });
        }
        let coeffs: SeriesVector<T> = coeffs.iter().map(|c| c.truncate(self.trunc)).collect();
        let merged = match self.terms.remove(&index) {
            Some(prev) => prev.iter().zip(&coeffs).map(|(a, b)| a + b).collect(),
            None => coeffs,
        };
        if merged.iter().any(|c| !c.is_zero()) {
            self.terms.insert(index, merged);
        } else if merged.iter().any(|c| c.trunc() < self.trunc) {
            self.terms.insert(index, merged);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &SeriesVector<T>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, index: &MultiIndex) -> SeriesVector<T> {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(|| vec![TruncatedSeries::zero(self.dim, self.trunc); self.size])
    }

    fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.size];
        for k in self.terms.keys() {
            for (l, e) in k.as_slice().iter().enumerate() {
                m[l] = m[l].max(*e);
            }
        }
        m
    }

    fn power_table(&self, y: &SeriesVector<T>, trunc: u32) -> Vec<Vec<TruncatedSeries<T>>> {
        let maxes = self.max_exponents();
        y.iter()
            .zip(maxes)
            .map(|(yl, m)| {
                let yl = yl.truncate(trunc);
                let mut col = vec![TruncatedSeries::one(self.dim, trunc)];
                for e in 1..=m as usize {
                    let next = &col[e - 1] * &yl;
                    col.push(next);
                }
                col
            })
            .collect()
    }

    fn monomial_value(
        powers: &[Vec<TruncatedSeries<T>>],
        index: &MultiIndex,
        dim: usize,
        trunc: u32,
    ) -> TruncatedSeries<T> {
        let mut acc = TruncatedSeries::one(dim, trunc);
        for (l, &e) in index.as_slice().iter().enumerate() {
            if e > 0 {
                acc = &acc * &powers[l][e as usize];
            }
        }
        acc
    }

    /// `F(x, y(x))` for `y` with zero constant term; truncation is the minimum
    /// of the inputs' truncations.
    pub fn eval(&self, y: &SeriesVector<T>) -> Result<SeriesVector<T>> {
        self.check_arg(y)?;
        let trunc = y.iter().map(|s| s.trunc()).fold(self.trunc, u32::min);
        let powers = self.power_table(y, trunc);
        let mut out = vec![TruncatedSeries::zero(self.dim, trunc); self.size];
        for (index, coeffs) in &self.terms {
            let mono = Self::monomial_value(&powers, index, self.dim, trunc);
            for (o, c) in out.iter_mut().zip(coeffs) {
                *o = &*o + &(c * &mono);
            }
        }
        Ok(out)
    }

    /// `∂F/∂y (x, y(x))` as an `N × N` series matrix (`[i][l] = ∂F_i/∂y_l`).
    pub fn jacobian(&self, y: &SeriesVector<T>) -> Result<SeriesMatrix<T>> {
        self.check_arg(y)?;
        let trunc = y.iter().map(|s| s.trunc()).fold(self.trunc, u32::min);
        let powers = self.power_table(y, trunc);
        let n = self.size;
        let mut m = SeriesMatrix::zeros(n, self.dim, trunc);
        for (index, coeffs) in &self.terms {
            for l in 0..n {
                let e = index.get(l);
                if e == 0 {
                    continue;
                }
                let lowered = index.with(l, e - 1);
                let mono = Self::monomial_value(&powers, &lowered, self.dim, trunc)
                    .scale(&T::from_integer(e as i64));
                for (i, c) in coeffs.iter().enumerate() {
                    let v = m.get(i, l) + &(c * &mono);
                    m.set(i, l, v);
                }
            }
        }
        Ok(m)
    }

    /// Re-expand `F(x, y0 + w)` as a polynomial in `w`.
    pub fn translate(&self, y0: &SeriesVector<T>) -> Result<YPolynomial<T>> {
        self.check_arg(y0)?;
        let trunc = y0.iter().map(|s| s.trunc()).fold(self.trunc, u32::min);
        let powers = self.power_table(y0, trunc);
        let mut out = YPolynomial::new(self.size, self.dim, trunc);
        for (index, coeffs) in &self.terms {
            // all J ≤ I
            let mut js = vec![MultiIndex::zero(self.size)];
            for l in 0..self.size {
                js = js
                    .into_iter()
                    .flat_map(|j| (0..=index.get(l)).map(move |v| j.with(l, v)))
                    .collect();
            }
            for j in js {
                let rest = index.checked_sub(&j).expect("J ≤ I");
                let mut factor = T::one();
                for l in 0..self.size {
                    factor *= binomial::<T>(index.get(l), j.get(l));
                }
                let mono = Self::monomial_value(&powers, &rest, self.dim, trunc).scale(&factor);
                let contrib: SeriesVector<T> = coeffs.iter().map(|c| c * &mono).collect();
                out.add_term(j, contrib)?;
            }
        }
        Ok(out)
    }

    fn check_arg(&self, y: &SeriesVector<T>) -> Result<()> {
        if y.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: y.len(),
            });
        }
        for (l, s) in y.iter().enumerate() {
            if s.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: s.dim(),
                });
            }
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm(l));
            }
        }
        Ok(())
    }
}
