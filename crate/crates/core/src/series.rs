//! Multi-indices and truncated multivariate power series.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Coeff;

/// Exponent vector `β ∈ ℕ^d`.
///
/// Ordered by total degree, ties broken by comparing exponents from the
/// last variable down to the first (so `x1^2 < x1*x2 < x2^2`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn new(exps: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(exps))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    /// The unit vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zero(dim);
        m.0[axis] = 1;
        m
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = SmallVec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn scaled(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|e| e * k).collect())
    }

    pub(crate) fn with(&self, axis: usize, value: u32) -> MultiIndex {
        let mut m = self.clone();
        m.0[axis] = value;
        m
    }

    /// All exponent vectors of dimension `dim` and total degree `degree`, ascending.
    pub fn of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex::new(prefix));
                prefix.pop();
                return;
            }
            for e in 0..=left {
                prefix.push(e);
                rec(dim, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            if degree == 0 {
                out.push(MultiIndex::zero(0));
            }
            return out;
        }
        rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
        out.sort();
        out
    }

    /// All exponent vectors of dimension `dim` with degree at most `max_degree`.
    pub fn up_to_degree(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
        (0..=max_degree).flat_map(|k| Self::of_degree(dim, k)).collect()
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(SmallVec::from_vec(v))
    }
}

/// Order of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Lowest degree carrying a nonzero coefficient.
    Finite(u32),
    /// Every certified coefficient vanishes; the order exceeds the truncation.
    AboveTruncation,
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::AboveTruncation => f.write_str("above truncation"),
        }
    }
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(k) => Some(k),
            Order::AboveTruncation => None,
        }
    }

    /// `true` when the order is strictly greater than `k`.
    pub fn exceeds(self, k: u32) -> bool {
        match self {
            Order::Finite(o) => o > k,
            Order::AboveTruncation => true,
        }
    }
}

/// A power series in `dim` variables whose coefficients are known exactly for
/// every degree `≤ trunc`.
///
/// Only nonzero coefficients are stored; a missing index of degree `≤ trunc`
/// means the coefficient is zero, while anything above `trunc` is unknown.
#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    dim: usize,
    trunc: u32,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Coeff> TruncatedSeries<T> {
    pub fn zero(dim: usize, trunc: u32) -> Self {
        TruncatedSeries {
            dim,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, trunc: u32, c: T) -> Self {
        Self::monomial(dim, trunc, MultiIndex::zero(dim), c)
    }

    pub fn one(dim: usize, trunc: u32) -> Self {
        Self::constant(dim, trunc, T::one())
    }

    /// `c x^exps`; dropped when its degree exceeds `trunc`.
    pub fn monomial(dim: usize, trunc: u32, exps: MultiIndex, c: T) -> Self {
        assert_eq!(exps.dim(), dim, "exponent dimension");
        let mut s = Self::zero(dim, trunc);
        if exps.degree() <= trunc && !c.is_zero() {
            s.terms.insert(exps, c);
        }
        s
    }

    /// The coordinate function `x_axis` (axes are 0-based).
    pub fn variable(dim: usize, trunc: u32, axis: usize) -> Self {
        Self::monomial(dim, trunc, MultiIndex::unit(dim, axis), T::one())
    }

    /// Collect terms, summing repeated indices and dropping zeros and degrees above `trunc`.
    pub fn from_terms<I>(dim: usize, trunc: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut map: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (k, v) in terms {
            assert_eq!(k.dim(), dim, "exponent dimension");
            if k.degree() > trunc {
                continue;
            }
            *map.entry(k).or_insert_with(T::zero) += v;
        }
        map.retain(|_, v| !v.is_zero());
        TruncatedSeries {
            dim,
            trunc,
            terms: map,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &T)> + '_ {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// `true` when every certified coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Option<&T> {
        self.terms.get(idx)
    }

    /// Coefficient of `x^exps`, zero when absent.
    pub fn coeff_of(&self, exps: &[u32]) -> T {
        self.terms
            .get(&MultiIndex::new(exps))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.terms
            .get(&MultiIndex::zero(self.dim))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn order(&self) -> Order {
        match self.terms.keys().next() {
            Some(k) => Order::Finite(k.degree()),
            None => Order::AboveTruncation,
        }
    }

    /// Lower the truncation order to `min(trunc, t)`.
    pub fn truncate(&self, t: u32) -> Self {
        let t = t.min(self.trunc);
        TruncatedSeries {
            dim: self.dim,
            trunc: t,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() <= t)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Re-label the truncation order without touching coefficients.
    ///
    /// The caller vouches that every coefficient up to `t` is certified.
    pub(crate) fn with_trunc(mut self, t: u32) -> Self {
        if t < self.trunc {
            self.terms.retain(|k, _| k.degree() <= t);
        }
        self.trunc = t;
        self
    }

    /// Treat the stored terms as a complete polynomial and relabel the
    /// truncation order as `t` (higher coefficients are then known zeros).
    pub fn as_polynomial(self, t: u32) -> Self {
        self.with_trunc(t)
    }

    /// Agreement of all coefficients of degree `≤ m`.
    pub fn agrees_with(&self, other: &Self, m: u32) -> bool {
        let a = self.terms.iter().filter(|(k, _)| k.degree() <= m);
        let b = other.terms.iter().filter(|(k, _)| k.degree() <= m);
        a.eq(b)
    }

    pub fn homogeneous_component(&self, degree: u32) -> Result<Self> {
        if degree > self.trunc {
            return Err(Error::DegreeAboveTruncation {
                degree,
                trunc: self.trunc,
            });
        }
        Ok(TruncatedSeries {
            dim: self.dim,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() == degree)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        })
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim, self.trunc);
        }
        TruncatedSeries {
            dim: self.dim,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.clone() * c))
                .collect(),
        }
    }

    /// Apply `g` to every coefficient (zeros are dropped).
    pub fn map_coeffs<U: Coeff>(&self, g: impl Fn(&T) -> U) -> TruncatedSeries<U> {
        TruncatedSeries::from_terms(
            self.dim,
            self.trunc,
            self.terms.iter().map(|(k, v)| (k.clone(), g(v))),
        )
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = self.truncate(trunc).terms;
        for (k, v) in other.terms.iter().take_while(|(k, _)| k.degree() <= trunc) {
            let e = out.entry(k.clone()).or_insert_with(T::zero);
            if sign {
                *e += v;
            } else {
                *e -= v;
            }
            if e.is_zero() {
                out.remove(k);
            }
        }
        TruncatedSeries {
            dim: self.dim,
            trunc,
            terms: out,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, true))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.combine(other, false))
    }

    /// Product with truncation `min(f.trunc, g.trunc)`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.mul_to(other, self.trunc.min(other.trunc)))
    }

    /// Product with the order-aware truncation
    /// `min(f.trunc + ord(g), g.trunc + ord(f))`.
    ///
    /// A zero factor contributes its own truncation plus the other factor's order.
    pub fn mul_sharp(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let ord = |s: &Self| s.order().finite().unwrap_or(s.trunc + 1);
        let t = (self.trunc + ord(other)).min(other.trunc + ord(self));
        Ok(self.mul_to(other, t))
    }

    /// Product keeping every degree `≤ trunc`; the caller vouches for validity.
    pub(crate) fn mul_to(&self, other: &Self, trunc: u32) -> Self {
        let mut acc: HashMap<MultiIndex, T> = HashMap::new();
        for (a, ca) in &self.terms {
            let da = a.degree();
            if da > trunc {
                break;
            }
            for (b, cb) in &other.terms {
                if da + b.degree() > trunc {
                    break;
                }
                let prod = ca.clone() * cb;
                match acc.entry(a + b) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += prod,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        TruncatedSeries {
            dim: self.dim,
            trunc,
            terms: acc.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    /// `self^k` with the conservative truncation.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.dim, self.trunc);
        for _ in 0..k {
            out = out.mul_to(self, self.trunc);
        }
        out
    }

    /// Partial derivative along `axis` (0-based); truncation drops by one.
    pub fn partial(&self, axis: usize) -> Result<Self> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        if self.trunc == 0 {
            return Err(Error::TruncationExhausted(
                "derivative of a series truncated at degree 0".into(),
            ));
        }
        let trunc = self.trunc - 1;
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k.get(axis) > 0 && k.degree() <= trunc + 1)
            .map(|(k, v)| {
                let e = k.get(axis);
                (k.with(axis, e - 1), v.clone() * T::from_integer(e as i64))
            })
            .collect();
        Ok(TruncatedSeries {
            dim: self.dim,
            trunc,
            terms,
        })
    }

    /// Inverse of a unit (nonzero constant term), at the same truncation.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotAUnit);
        }
        let inv0 = T::one() / c0.clone();
        // 1/f = inv0 * Σ_j (-(f - c0) inv0)^j
        let mut tail = self.clone();
        tail.terms.remove(&MultiIndex::zero(self.dim));
        let step = tail.scale(&(-inv0.clone()));
        let mut term = Self::one(self.dim, self.trunc);
        let mut sum = term.clone();
        for _ in 0..self.trunc {
            term = term.mul_to(&step, self.trunc);
            if term.is_zero() {
                break;
            }
            sum = sum.combine(&term, true);
        }
        Ok(sum.scale(&inv0))
    }

    /// Composition `f(σ_1, …, σ_d)`: variable `x_j` of `self` is replaced by `sigma[j]`.
    ///
    /// Every `σ_j` must vanish at the origin. The result lives in the
    /// variables of the `σ_j` and is truncated at `min(f.trunc, σ_j.trunc)`.
    pub fn substitute(&self, sigma: &[Self]) -> Result<Self> {
        if sigma.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: sigma.len(),
            });
        }
        let Some(first) = sigma.first() else {
            return Ok(self.clone());
        };
        let target = first.dim;
        for (j, s) in sigma.iter().enumerate() {
            if s.dim != target {
                return Err(Error::DimensionMismatch {
                    expected: target,
                    found: s.dim,
                });
            }
            if !s.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm(j));
            }
        }
        let trunc = sigma.iter().map(|s| s.trunc).fold(self.trunc, u32::min);
        // σ_j has order ≥ 1, so only powers up to `trunc` matter.
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(self.dim);
        for (j, s) in sigma.iter().enumerate() {
            let max_e = self
                .terms
                .keys()
                .map(|k| k.get(j))
                .max()
                .unwrap_or(0)
                .min(trunc);
            let s = s.truncate(trunc);
            let mut col = vec![Self::one(target, trunc)];
            for e in 1..=max_e as usize {
                let next = col[e - 1].mul_to(&s, trunc);
                col.push(next);
            }
            powers.push(col);
        }
        let mut acc: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (k, c) in &self.terms {
            if k.degree() > trunc {
                break;
            }
            let mut prod = Self::constant(target, trunc, c.clone());
            for (j, &e) in k.as_slice().iter().enumerate() {
                if e > 0 {
                    prod = prod.mul_to(&powers[j][e as usize], trunc);
                }
            }
            for (kk, v) in prod.terms {
                *acc.entry(kk).or_insert_with(T::zero) += v;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(TruncatedSeries {
            dim: target,
            trunc,
            terms: acc,
        })
    }

    /// Evaluate the polynomial part at a point of `ℂ^d`.
    pub fn eval_complex<F: num_traits::Float>(
        &self,
        point: &[num_complex::Complex<F>],
    ) -> num_complex::Complex<F> {
        let mut acc = num_complex::Complex::new(F::zero(), F::zero());
        for (k, c) in &self.terms {
            let z = c.to_complex();
            let mut term = num_complex::Complex::new(
                F::from(z.re).unwrap_or_else(F::infinity),
                F::from(z.im).unwrap_or_else(F::infinity),
            );
            for (x, &e) in point.iter().zip(k.as_slice()) {
                term = term * x.powu(e);
            }
            acc = acc + term;
        }
        acc
    }
}

impl<T: Coeff> Add for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn add(self, rhs: Self) -> TruncatedSeries<T> {
        self.checked_add(rhs).expect("series dimension mismatch")
    }
}

impl<T: Coeff> Sub for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn sub(self, rhs: Self) -> TruncatedSeries<T> {
        self.checked_sub(rhs).expect("series dimension mismatch")
    }
}

impl<T: Coeff> Mul for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn mul(self, rhs: Self) -> TruncatedSeries<T> {
        self.checked_mul(rhs).expect("series dimension mismatch")
    }
}

impl<T: Coeff> Neg for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn neg(self) -> TruncatedSeries<T> {
        TruncatedSeries {
            dim: self.dim,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[d={}, N={}]{{", self.dim, self.trunc)?;
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k:?}: {v:?}")?;
        }
        write!(f, "}}")
    }
}

/// Vector of series, one per component of an unknown in `ℂ^N`.
pub type SeriesVector<T> = Vec<TruncatedSeries<T>>;
