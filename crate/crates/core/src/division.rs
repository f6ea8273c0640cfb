//! Monomial and Weierstrass–Hironaka division, and `P`-adic decompositions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Rational};
use crate::series::{MultiIndex, Order, TruncatedSeries};

/// Positive linear form `ℓ(β) = Σ ℓ_j β_j` used to pick the privileged exponent.
///
/// Ties between exponents of equal weight are broken by the graded order on
/// [`MultiIndex`], so every nonzero series has a unique minimal exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    weights: Vec<Rational>,
}

impl LinearForm {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidLinearForm(weights.len()));
        }
        Ok(LinearForm { weights })
    }

    /// `ℓ = (1, …, 1)`.
    pub fn uniform(dim: usize) -> Self {
        LinearForm {
            weights: vec![Rational::one(); dim],
        }
    }

    pub fn from_integers(weights: &[i64]) -> Result<Self> {
        Self::new(weights.iter().map(|&w| Rational::from_integer(w.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn value(&self, beta: &MultiIndex) -> Rational {
        let mut acc = Rational::zero();
        for (w, &e) in self.weights.iter().zip(beta.as_slice()) {
            if e > 0 {
                acc += w * Rational::from_integer(e.into());
            }
        }
        acc
    }

    pub fn compare(&self, a: &MultiIndex, b: &MultiIndex) -> Ordering {
        self.value(a).cmp(&self.value(b)).then_with(|| a.cmp(b))
    }

    fn min_weight(&self) -> &Rational {
        self.weights.iter().min().expect("nonempty")
    }

    fn max_weight(&self) -> &Rational {
        self.weights.iter().max().expect("nonempty")
    }
}

/// The exponent minimizing `ℓ` over the support of `f`.
pub fn min_exponent<T: Coeff>(f: &TruncatedSeries<T>, ell: &LinearForm) -> Result<MultiIndex> {
    if ell.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: ell.dim(),
        });
    }
    f.terms()
        .map(|(k, _)| k)
        .min_by(|a, b| ell.compare(a, b))
        .cloned()
        .ok_or(Error::ZeroSeries)
}

/// A series none of whose exponents lie in `α + ℕ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueClass<T> {
    alpha: MultiIndex,
    series: TruncatedSeries<T>,
}

impl<T: Coeff> ResidueClass<T> {
    pub fn new(alpha: MultiIndex, series: TruncatedSeries<T>) -> Result<Self> {
        if alpha.dim() != series.dim() {
            return Err(Error::DimensionMismatch {
                expected: series.dim(),
                found: alpha.dim(),
            });
        }
        if series.terms().any(|(k, _)| alpha.divides(k)) {
            return Err(Error::InvalidInput(format!(
                "series has exponents in {alpha:?} + N^d"
            )));
        }
        Ok(ResidueClass { alpha, series })
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    pub fn series(&self) -> &TruncatedSeries<T> {
        &self.series
    }

    pub fn into_series(self) -> TruncatedSeries<T> {
        self.series
    }
}

/// Shift operator `S_j`: keeps terms with `β_j ≥ 1` and lowers `β_j` by one.
pub fn shift<T: Coeff>(f: &TruncatedSeries<T>, axis: usize) -> Result<TruncatedSeries<T>> {
    if axis >= f.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: f.dim(),
        });
    }
    if f.trunc() == 0 {
        return Err(Error::TruncationExhausted("shift of a degree-0 truncation".into()));
    }
    Ok(TruncatedSeries::from_terms(
        f.dim(),
        f.trunc() - 1,
        f.terms()
            .filter(|(k, _)| k.get(axis) > 0)
            .map(|(k, v)| (k.with(axis, k.get(axis) - 1), v.clone())),
    ))
}

/// Division by the monomial `x^α`: `f = x^α q + r` with `r ∈ Δ_α`.
pub fn monomial_divide<T: Coeff>(
    f: &TruncatedSeries<T>,
    alpha: &MultiIndex,
) -> Result<(TruncatedSeries<T>, ResidueClass<T>)> {
    if alpha.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: alpha.dim(),
        });
    }
    let q_trunc = f.trunc().checked_sub(alpha.degree()).ok_or_else(|| {
        Error::TruncationExhausted(format!(
            "truncation {} below |alpha| = {}",
            f.trunc(),
            alpha.degree()
        ))
    })?;
    let mut q = Vec::new();
    let mut r = Vec::new();
    for (k, v) in f.terms() {
        match k.checked_sub(alpha) {
            Some(g) => q.push((g, v.clone())),
            None => r.push((k.clone(), v.clone())),
        }
    }
    Ok((
        TruncatedSeries::from_terms(f.dim(), q_trunc, q),
        ResidueClass {
            alpha: alpha.clone(),
            series: TruncatedSeries::from_terms(f.dim(), f.trunc(), r),
        },
    ))
}

/// A divisor `P` prepared for repeated Weierstrass–Hironaka division.
///
/// With `α = ν_ℓ(P)`, every `g` splits uniquely as `g = q P + r` with
/// `r ∈ Δ_α`; [`divide`](Self::divide) returns `(q, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeierstrassDivisor<T> {
    p: TruncatedSeries<T>,
    ell: LinearForm,
    alpha: MultiIndex,
    lead_inv: T,
    // P / lead − x^α
    tail: TruncatedSeries<T>,
    order: u32,
}

impl<T: Coeff> WeierstrassDivisor<T> {
    pub fn new(p: &TruncatedSeries<T>, ell: &LinearForm) -> Result<Self> {
        if ell.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                found: ell.dim(),
            });
        }
        if !p.constant_term().is_zero() {
            return Err(Error::DivisorNotInMaximalIdeal);
        }
        let alpha = min_exponent(p, ell)?;
        let lead = p.coeff(&alpha).cloned().expect("support");
        let lead_inv = T::one() / lead;
        let mut tail = p.scale(&lead_inv);
        tail = &tail - &TruncatedSeries::monomial(p.dim(), p.trunc(), alpha.clone(), T::one());
        let order = match p.order() {
            Order::Finite(k) => k,
            Order::AboveTruncation => unreachable!("nonzero divisor"),
        };
        Ok(WeierstrassDivisor {
            p: p.clone(),
            ell: ell.clone(),
            alpha,
            lead_inv,
            tail,
            order,
        })
    }

    pub fn p(&self) -> &TruncatedSeries<T> {
        &self.p
    }

    pub fn ell(&self) -> &LinearForm {
        &self.ell
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// Order of `P`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// `true` when `|α|` equals the order of `P`, so certification is by degree.
    pub fn is_graded(&self) -> bool {
        self.alpha.degree() == self.order
    }

    /// `g = q P + r`, `r ∈ Δ_α`.
    ///
    /// In the graded case `q` is certified to `N − |α|` and `r` to `N`, where
    /// `N = min(g.trunc, P.trunc)`. Otherwise only monomials of weight below
    /// `(N+1) min ℓ` are trusted and the degree bounds shrink accordingly.
    pub fn divide(
        &self,
        g: &TruncatedSeries<T>,
    ) -> Result<(TruncatedSeries<T>, ResidueClass<T>)> {
        let (q, r) = self.divide_impl(g)?;
        let q = q.ok_or_else(|| {
            Error::TruncationExhausted(format!(
                "quotient by P needs truncation above {}",
                g.trunc().min(self.p.trunc())
            ))
        })?;
        Ok((q, r))
    }

    /// `Q_{P,ℓ}(g)`.
    pub fn quotient(&self, g: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
        Ok(self.divide(g)?.0)
    }

    /// `R_{P,ℓ}(g)`; never exhausts.
    pub fn remainder(&self, g: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
        Ok(self.divide_impl(g)?.1.series)
    }

    fn divide_impl(
        &self,
        g: &TruncatedSeries<T>,
    ) -> Result<(Option<TruncatedSeries<T>>, ResidueClass<T>)> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.dim(),
            });
        }
        let n = g.trunc().min(self.p.trunc());
        let a = self.alpha.degree();
        let ell = &self.ell;
        let graded = self.is_graded();
        let cap = Rational::from_integer((n + 1).into()) * ell.min_weight();
        let in_cap = |k: &MultiIndex, w: &Rational| {
            if graded {
                k.degree() <= n
            } else {
                *w < cap
            }
        };
        let (q_trunc, r_trunc) = if graded {
            (n.checked_sub(a), n)
        } else {
            // largest D with D·ℓ_max + ℓ(α) < cap, resp. D·ℓ_max < cap
            let largest = |bound: Rational| -> Option<u32> {
                if !bound.is_positive() {
                    return None;
                }
                let d: num_bigint::BigInt = (bound / ell.max_weight()).ceil().to_integer() - 1;
                d.to_u32()
            };
            (
                largest(&cap - ell.value(&self.alpha)).map(|d| d.min(n.saturating_sub(a))),
                largest(cap.clone()).map_or(0, |d| d.min(n)),
            )
        };

        // Division in increasing (ℓ, ≺) order: each quotient monomial only
        // feeds strictly larger monomials through the tail of P.
        let mut work: BTreeMap<(Rational, MultiIndex), T> = BTreeMap::new();
        for (k, v) in g.terms() {
            let w = ell.value(k);
            if in_cap(k, &w) {
                work.insert((w, k.clone()), v.clone());
            }
        }
        let mut q_terms = Vec::new();
        let mut r_terms = Vec::new();
        while let Some(((_, beta), c)) = work.pop_first() {
            match beta.checked_sub(&self.alpha) {
                Some(gamma) => {
                    let room = n - gamma.degree();
                    for (delta, pd) in self.tail.terms() {
                        if delta.degree() > room {
                            break;
                        }
                        let idx = &gamma + delta;
                        let w = ell.value(&idx);
                        if !in_cap(&idx, &w) {
                            continue;
                        }
                        let key = (w, idx);
                        let prod = c.clone() * pd;
                        let entry = work.entry(key.clone()).or_insert_with(T::zero);
                        *entry -= prod;
                        if entry.is_zero() {
                            work.remove(&key);
                        }
                    }
                    q_terms.push((gamma, c * &self.lead_inv));
                }
                None => r_terms.push((beta, c)),
            }
        }
        let q = q_trunc.map(|t| TruncatedSeries::from_terms(self.dim(), t, q_terms));
        let r = TruncatedSeries::from_terms(self.dim(), r_trunc, r_terms);
        Ok((
            q,
            ResidueClass {
                alpha: self.alpha.clone(),
                series: r,
            },
        ))
    }

    /// `R(Q^n(g))`.
    pub fn coefficient(&self, g: &TruncatedSeries<T>, n: usize) -> Result<TruncatedSeries<T>> {
        let mut cur = g.clone();
        for _ in 0..n {
            cur = self.quotient(&cur)?;
        }
        self.remainder(&cur)
    }
}

/// Weierstrass–Hironaka division `g = q P + r` with `r ∈ Δ_{ν_ℓ(P)}`.
pub fn weierstrass_divide<T: Coeff>(
    g: &TruncatedSeries<T>,
    p: &TruncatedSeries<T>,
    ell: &LinearForm,
) -> Result<(TruncatedSeries<T>, ResidueClass<T>)> {
    WeierstrassDivisor::new(p, ell)?.divide(g)
}

/// The expansion `f = Σ_n f_n P^n` with every `f_n ∈ Δ_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct PAdicDecomposition<T> {
    divisor: WeierstrassDivisor<T>,
    coeffs: Vec<TruncatedSeries<T>>,
}

impl<T: Coeff> PAdicDecomposition<T> {
    /// Assemble from coefficients already known to lie in `Δ_α`.
    pub fn from_coefficients(
        divisor: WeierstrassDivisor<T>,
        coeffs: Vec<TruncatedSeries<T>>,
    ) -> Result<Self> {
        for c in &coeffs {
            ResidueClass::new(divisor.alpha.clone(), c.clone())?;
        }
        Ok(PAdicDecomposition { divisor, coeffs })
    }

    pub fn divisor(&self) -> &WeierstrassDivisor<T> {
        &self.divisor
    }

    pub fn p(&self) -> &TruncatedSeries<T> {
        &self.divisor.p
    }

    pub fn ell(&self) -> &LinearForm {
        &self.divisor.ell
    }

    pub fn coeffs(&self) -> &[TruncatedSeries<T>] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree through which `f_n` is exact.
    pub fn valid_order(&self, n: usize) -> u32 {
        self.coeffs[n].trunc()
    }

    /// Order through which [`recompose`](Self::recompose) reproduces the source.
    pub fn certified_order(&self) -> u32 {
        let o = self.divisor.order;
        let m = self.coeffs.len() as u32;
        let tail = m * o - 1;
        let p_trunc = self.divisor.p.trunc();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let n = n as u32;
                let mut t = c.trunc() + n * o;
                if n > 0 {
                    // P^n is known through P.trunc + (n−1) o(P)
                    let oc = c.order().finite().unwrap_or(c.trunc() + 1);
                    t = t.min(p_trunc + (n - 1) * o + oc);
                }
                t
            })
            .fold(tail, u32::min)
    }

    /// `Σ_{n ≤ M} f_n P^n`, truncated at [`certified_order`](Self::certified_order).
    pub fn recompose(&self) -> TruncatedSeries<T> {
        let t = self.certified_order();
        let dim = self.divisor.dim();
        let p = self.divisor.p.clone();
        let mut acc = TruncatedSeries::zero(dim, t);
        // Horner: f_M, then f_{M−1} + P·acc, …
        for c in self.coeffs.iter().rev() {
            let prod = p.mul_to(&acc, t);
            acc = &c.clone().with_trunc(t) + &prod;
        }
        acc
    }
}

/// `f_n = R(Q^n(f))` for `n = 0, …, max_n`.
pub fn p_adic_decompose<T: Coeff>(
    f: &TruncatedSeries<T>,
    p: &TruncatedSeries<T>,
    ell: &LinearForm,
    max_n: usize,
) -> Result<PAdicDecomposition<T>> {
    let divisor = WeierstrassDivisor::new(p, ell)?;
    decompose_with(&divisor, f, max_n)
}

pub fn decompose_with<T: Coeff>(
    divisor: &WeierstrassDivisor<T>,
    f: &TruncatedSeries<T>,
    max_n: usize,
) -> Result<PAdicDecomposition<T>> {
    let mut coeffs = Vec::with_capacity(max_n + 1);
    let mut cur = f.clone();
    for n in 0..=max_n {
        let (q, r) = divisor.divide_impl(&cur)?;
        coeffs.push(r.series);
        if n < max_n {
            cur = q.ok_or_else(|| {
                Error::TruncationExhausted(format!(
                    "truncation {} supports only {} of {} coefficients",
                    f.trunc(),
                    n + 1,
                    max_n + 1
                ))
            })?;
        }
    }
    Ok(PAdicDecomposition {
        divisor: divisor.clone(),
        coeffs,
    })
}

/// As many coefficients `f_0, f_1, …` as the truncation of `f` certifies.
pub fn decompose_available<T: Coeff>(
    divisor: &WeierstrassDivisor<T>,
    f: &TruncatedSeries<T>,
) -> Result<PAdicDecomposition<T>> {
    let mut coeffs = Vec::new();
    let mut cur = f.clone();
    loop {
        let (q, r) = divisor.divide_impl(&cur)?;
        coeffs.push(r.series);
        match q {
            Some(q) => cur = q,
            None => break,
        }
    }
    Ok(PAdicDecomposition {
        divisor: divisor.clone(),
        coeffs,
    })
}

/// Decomposition of the product: `c_n = Σ_{k ≤ n} Σ_{j ≤ k} R(Q^{n−k}(f_j g_{k−j}))`,
/// for as many `n` as both inputs and the truncation certify.
pub fn p_adic_multiply<T: Coeff>(
    a: &PAdicDecomposition<T>,
    b: &PAdicDecomposition<T>,
) -> Result<PAdicDecomposition<T>> {
    if a.p() != b.p() || a.ell() != b.ell() {
        return Err(Error::MismatchedDecomposition);
    }
    let div = &a.divisor;
    let m = a.len().min(b.len());
    let mut coeffs = Vec::with_capacity(m);
    // acc_n = Q(acc_{n−1}) + Σ_j f_j g_{n−j}; c_n = R(acc_n)
    let mut acc: Option<TruncatedSeries<T>> = None;
    for n in 0..m {
        let mut x: Option<TruncatedSeries<T>> = None;
        for j in 0..=n {
            let prod = &a.coeffs[j] * &b.coeffs[n - j];
            x = Some(match x {
                Some(s) => &s + &prod,
                None => prod,
            });
        }
        let x = x.expect("n ≥ 0");
        let s = match acc {
            Some(prev) => match div.quotient(&prev) {
                Ok(q) => &q + &x,
                // the truncation certifies no further coefficient
                Err(Error::TruncationExhausted(_)) => break,
                Err(e) => return Err(e),
            },
            None => x,
        };
        coeffs.push(div.remainder(&s)?);
        acc = Some(s);
    }
    Ok(PAdicDecomposition {
        divisor: div.clone(),
        coeffs,
    })
}
