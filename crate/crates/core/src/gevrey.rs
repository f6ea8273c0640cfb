//! Gevrey-class diagnostics: norm sequences of `P`-adic coefficients, order
//! estimation, monomial bounds, and the coordinate changes used to bring a
//! germ into monomial form.

use std::fmt;

use num_traits::{Float, Zero};
use serde::Serialize;

use crate::division::PAdicDecomposition;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{rational_to_f64, Coeff, Rational};
use crate::series::{MultiIndex, TruncatedSeries};

/// How a coefficient `f_n` is reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormProxy {
    /// `Σ_β |f_{n,β}| r^{|β|}`, an upper bound for the sup norm on the polydisc of radius `r`.
    #[default]
    #[serde(rename = "sum")]
    CoeffSum,
    /// `max_β |f_{n,β}|`.
    #[serde(rename = "max")]
    MaxAbs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSequence<F> {
    pub values: Vec<F>,
    pub proxy: NormProxy,
    #[serde(serialize_with = "crate::scalar::serialize_rational")]
    pub radius: Rational,
}

impl<F: Float + fmt::Display> NormSequence<F> {
    /// `n,M_n` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,M_n\n");
        for (n, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{n},{v}\n"));
        }
        out
    }
}

fn ln_series_norm<T: Coeff>(f: &TruncatedSeries<T>, proxy: NormProxy, ln_r: f64) -> f64 {
    match proxy {
        NormProxy::MaxAbs => f
            .terms()
            .map(|(_, c)| c.ln_modulus())
            .fold(f64::NEG_INFINITY, f64::max),
        NormProxy::CoeffSum => {
            let logs: Vec<f64> = f
                .terms()
                .map(|(k, c)| c.ln_modulus() + k.degree() as f64 * ln_r)
                .collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                return top;
            }
            top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
        }
    }
}

/// Norm proxies of an arbitrary sequence of series.
pub fn norms_of<T: Coeff, F: Float>(
    coeffs: &[TruncatedSeries<T>],
    proxy: NormProxy,
    radius: &Rational,
) -> NormSequence<F> {
    let ln_r = rational_to_f64(radius).ln();
    let values = coeffs
        .iter()
        .map(|f| {
            let l = ln_series_norm(f, proxy, ln_r);
            F::from(l.exp()).unwrap_or_else(F::infinity)
        })
        .collect();
    NormSequence {
        values,
        proxy,
        radius: radius.clone(),
    }
}

/// `M_n` for each coefficient `f_n` of the decomposition.
pub fn norm_sequence<T: Coeff, F: Float>(
    dec: &PAdicDecomposition<T>,
    proxy: NormProxy,
    radius: &Rational,
) -> NormSequence<F> {
    norms_of(dec.coeffs(), proxy, radius)
}

/// Fit of `log M_n ≈ log C + n log A + s (n log n − n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GevreyEstimate<F> {
    pub s_hat: F,
    pub log_c: F,
    pub log_a: F,
    pub r_squared: F,
    /// First and last `n` used in the fit.
    pub n_range: (usize, usize),
    pub points: usize,
    /// Fit quality reached [`CONCLUSIVE_R_SQUARED`].
    pub conclusive: bool,
    /// The sequence vanishes from some index on; `s_hat` is set to 0 without a fit.
    pub terminating: bool,
}

pub const MIN_FIT_POINTS: usize = 6;
pub const CONCLUSIVE_R_SQUARED: f64 = 0.9;

fn stirling<F: Float>(n: usize) -> F {
    let n = F::from(n).expect("index fits");
    if n.is_zero() {
        F::zero()
    } else {
        n * n.ln() - n
    }
}

fn solve3<F: Float>(mut a: [[F; 3]; 3], mut b: [F; 3]) -> Option<[F; 3]> {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[p][col].abs() <= F::epsilon() {
            return None;
        }
        a.swap(p, col);
        b.swap(p, col);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..3 {
                    a[r][c] = a[r][c] - f * a[col][c];
                }
                b[r] = b[r] - f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Least-squares Gevrey order of a norm sequence.
///
/// Zero entries are skipped. A sequence with at least [`MIN_FIT_POINTS`]
/// entries whose nonzero support stops before the end (a terminating
/// expansion) is reported as `s_hat = 0` without fitting.
pub fn estimate_order<F: Float>(ns: &NormSequence<F>) -> Result<GevreyEstimate<F>> {
    let pts: Vec<(usize, F)> = ns
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > F::zero() && v.is_finite())
        .map(|(n, v)| (n, v.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        let last_nonzero = ns.values.iter().rposition(|v| *v > F::zero());
        let terminates = match last_nonzero {
            Some(i) => i + 1 < ns.values.len(),
            None => true,
        };
        if ns.values.len() >= MIN_FIT_POINTS && terminates {
            return Ok(GevreyEstimate {
                s_hat: F::zero(),
                log_c: pts.iter().map(|p| p.1).fold(F::neg_infinity(), F::max),
                log_a: F::zero(),
                r_squared: F::one(),
                n_range: (0, ns.values.len() - 1),
                points: pts.len(),
                conclusive: true,
                terminating: true,
            });
        }
        return Err(Error::TooFewEntries {
            found: pts.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let mut ata = [[F::zero(); 3]; 3];
    let mut aty = [F::zero(); 3];
    for &(n, y) in &pts {
        let row = [F::one(), F::from(n).expect("index"), stirling::<F>(n)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] = ata[i][j] + row[i] * row[j];
            }
            aty[i] = aty[i] + row[i] * y;
        }
    }
    let [log_c, log_a, s_hat] = solve3(ata, aty).ok_or(Error::SingularMatrix)?;
    let count = F::from(pts.len()).expect("count");
    let mean = pts.iter().fold(F::zero(), |acc, p| acc + p.1) / count;
    let (mut sse, mut sst) = (F::zero(), F::zero());
    for &(n, y) in &pts {
        let fit = log_c + log_a * F::from(n).expect("index") + s_hat * stirling::<F>(n);
        sse = sse + (y - fit) * (y - fit);
        sst = sst + (y - mean) * (y - mean);
    }
    let scale = pts.iter().fold(F::one(), |acc, p| acc.max(p.1.abs()));
    let r_squared = if sst <= F::epsilon() * scale * scale * count {
        F::one()
    } else {
        F::one() - sse / sst
    };
    Ok(GevreyEstimate {
        s_hat,
        log_c,
        log_a,
        r_squared,
        n_range: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
        conclusive: r_squared >= F::from(CONCLUSIVE_R_SQUARED).expect("constant"),
        terminating: false,
    })
}

/// `f(A x)`: variable `x_i` is replaced by `Σ_j A_ij x_j`.
pub fn linear_change<T: Coeff>(f: &TruncatedSeries<T>, a: &Matrix<T>) -> Result<TruncatedSeries<T>> {
    let d = f.dim();
    if a.rows() != d || a.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.rows(),
        });
    }
    let sigma: Vec<TruncatedSeries<T>> = (0..d)
        .map(|i| {
            TruncatedSeries::from_terms(
                d,
                f.trunc(),
                (0..d).map(|j| (MultiIndex::unit(d, j), a[(i, j)].clone())),
            )
        })
        .collect();
    f.substitute(&sigma)
}

/// Punctual blow-up `x_1 = z_1`, `x_j = z_1 z_j`: `x^β ↦ z_1^{|β|} z_2^{β_2} ⋯ z_d^{β_d}`.
///
/// The truncation order is kept; images of degree above it are dropped.
pub fn blowup<T: Coeff>(f: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let d = f.dim();
    if d < 2 {
        return Err(Error::InvalidInput("blow-up needs at least two variables".into()));
    }
    Ok(TruncatedSeries::from_terms(
        d,
        f.trunc(),
        f.terms().map(|(k, v)| {
            let mut e = k.as_slice().to_vec();
            e[0] = k.degree();
            (MultiIndex::from(e), v.clone())
        }),
    ))
}

/// Inverse of [`blowup`] on its image: `z^γ ↦ x_1^{γ_1 − γ_2 − ⋯ − γ_d} x_2^{γ_2} ⋯`.
///
/// A series truncated at `T` in `z` determines the `x`-series through degree `⌊T/2⌋`.
pub fn blowdown<T: Coeff>(f: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let d = f.dim();
    if d < 2 {
        return Err(Error::InvalidInput("blow-down needs at least two variables".into()));
    }
    let mut terms = Vec::with_capacity(f.len());
    for (k, v) in f.terms() {
        let rest: u32 = k.as_slice()[1..].iter().sum();
        let first = k.get(0).checked_sub(rest).ok_or_else(|| {
            Error::InvalidInput(format!("monomial {k:?} is not in the image of the blow-up"))
        })?;
        let mut e = k.as_slice().to_vec();
        e[0] = first;
        terms.push((MultiIndex::from(e), v.clone()));
    }
    Ok(TruncatedSeries::from_terms(d, f.trunc() / 2, terms))
}

/// Ramification `x_axis = η^k`: `β_axis ↦ k β_axis`.
pub fn ramify<T: Coeff>(f: &TruncatedSeries<T>, axis: usize, k: u32) -> Result<TruncatedSeries<T>> {
    if axis >= f.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: f.dim(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidInput("ramification index must be positive".into()));
    }
    Ok(TruncatedSeries::from_terms(
        f.dim(),
        f.trunc(),
        f.terms()
            .map(|(e, v)| (e.with(axis, e.get(axis) * k), v.clone())),
    ))
}

/// Outcome of [`monomial_gevrey_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBound {
    /// `ln C` for the minimal constant (`-inf` for the zero series).
    pub ln_constant: f64,
    /// Exponent attaining the maximal ratio.
    pub witness: Option<MultiIndex>,
    /// Largest `ln` ratio per total degree, ascending.
    pub per_degree: Vec<(u32, f64)>,
}

impl MonomialBound {
    pub fn constant(&self) -> f64 {
        self.ln_constant.exp()
    }

    /// `true` when the per-degree maxima keep growing over the last `window` degrees.
    pub fn growing(&self, window: usize) -> bool {
        let tail = &self.per_degree[self.per_degree.len().saturating_sub(window + 1)..];
        tail.len() > 1 && tail.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Smallest `C` with `|f_β| ≤ C A^{|β|} min_{α_j ≠ 0} (β_j!)^{s/α_j}` over the stored terms.
pub fn monomial_gevrey_check<T: Coeff>(
    f: &TruncatedSeries<T>,
    alpha: &MultiIndex,
    s: &Rational,
    a: &Rational,
) -> Result<MonomialBound> {
    if alpha.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: alpha.dim(),
        });
    }
    if alpha.is_zero() {
        return Err(Error::InvalidInput("alpha must be nonzero".into()));
    }
    if *a <= Rational::zero() {
        return Err(Error::InvalidInput("A must be positive".into()));
    }
    let s = rational_to_f64(s);
    let ln_a = rational_to_f64(a).ln();
    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    let mut per_degree: Vec<(u32, f64)> = Vec::new();
    for (k, c) in f.terms() {
        let weight = alpha
            .as_slice()
            .iter()
            .zip(k.as_slice())
            .filter(|(aj, _)| **aj > 0)
            .map(|(aj, bj)| s / *aj as f64 * ln_factorial(*bj))
            .fold(f64::INFINITY, f64::min);
        let ratio = c.ln_modulus() - k.degree() as f64 * ln_a - weight;
        if ratio > best {
            best = ratio;
            witness = Some(k.clone());
        }
        match per_degree.last_mut() {
            Some((deg, v)) if *deg == k.degree() => *v = v.max(ratio),
            _ => per_degree.push((k.degree(), ratio)),
        }
    }
    Ok(MonomialBound {
        ln_constant: best,
        witness,
        per_degree,
    })
}

/// `Σ_n n! P^n`-style helper: the series `Σ_{n ≤ max} coeff(n) x^{nα}`.
pub fn monomial_series<T: Coeff>(
    dim: usize,
    trunc: u32,
    alpha: &MultiIndex,
    coeff: impl Fn(u32) -> T,
) -> TruncatedSeries<T> {
    let deg = alpha.degree().max(1);
    TruncatedSeries::from_terms(
        dim,
        trunc,
        (0..=trunc / deg).map(|n| (alpha.scaled(n), coeff(n))),
    )
}

/// `n!` as an exact coefficient.
pub fn factorial<T: Coeff>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_integer(k as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::One;

    type S = TruncatedSeries<Rational>;

    fn seq(values: Vec<f64>) -> NormSequence<f64> {
        NormSequence {
            values,
            proxy: NormProxy::MaxAbs,
            radius: Rational::one(),
        }
    }

    #[test]
    fn factorial_sequences() {
        let fact: Vec<f64> = (0..=30).map(|n| ln_factorial(n).exp()).collect();
        let est = estimate_order(&seq(fact.clone())).unwrap();
        assert!((0.9..=1.1).contains(&est.s_hat), "{est:?}");
        let sq: Vec<f64> = fact.iter().map(|v| v * v).collect();
        let est = estimate_order(&seq(sq)).unwrap();
        assert!((1.8..=2.2).contains(&est.s_hat), "{est:?}");
        let flat = estimate_order(&seq(vec![1.0; 31])).unwrap();
        assert!(flat.s_hat.abs() <= 0.1 && flat.conclusive);
    }

    #[test]
    fn scale_invariance() {
        let base: Vec<f64> = (0..=30).map(|n| ln_factorial(n).exp()).collect();
        let s0 = estimate_order(&seq(base.clone())).unwrap().s_hat;
        let scaled: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(n, v)| 7.0 * 0.3f64.powi(n as i32) * v)
            .collect();
        let s1 = estimate_order(&seq(scaled)).unwrap().s_hat;
        assert!((s0 - s1).abs() < 0.05);
    }

    #[test]
    fn terminating_and_short_sequences() {
        let est = estimate_order(&seq(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(est.terminating && est.s_hat == 0.0);
        assert!(matches!(
            estimate_order(&seq(vec![1.0, 2.0, 6.0])),
            Err(Error::TooFewEntries { .. })
        ));
    }

    #[test]
    fn single_precision_fit() {
        let fact: Vec<f32> = (0..=25).map(|n| ln_factorial(n).exp() as f32).collect();
        let est = estimate_order(&NormSequence {
            values: fact,
            proxy: NormProxy::MaxAbs,
            radius: Rational::one(),
        })
        .unwrap();
        assert!((0.85..=1.15).contains(&est.s_hat), "{est:?}");
    }

    #[test]
    fn blowup_examples_and_homomorphism() {
        let x1 = S::variable(2, 8, 0);
        let x2 = S::variable(2, 8, 1);
        let z = blowup(&(&x1 * &x2)).unwrap();
        assert_eq!(z, S::monomial(2, 8, MultiIndex::new(&[2, 1]), rat(1, 1)));
        let p = &x1.pow(2) + &x2.pow(2);
        let bp = blowup(&p).unwrap();
        let expected = &S::monomial(2, 8, MultiIndex::new(&[2, 0]), rat(1, 1))
            + &S::monomial(2, 8, MultiIndex::new(&[2, 2]), rat(1, 1));
        assert_eq!(bp, expected);
        let f = &(&x1 + &x2.pow(2)) + &S::one(2, 8);
        assert_eq!(
            blowup(&(&f * &p)).unwrap(),
            &blowup(&f).unwrap() * &blowup(&p).unwrap()
        );
        assert_eq!(blowdown(&blowup(&f).unwrap()).unwrap(), f.truncate(4));
    }

    #[test]
    fn ramify_examples() {
        let e = S::variable(2, 6, 1);
        assert_eq!(
            ramify(&e, 1, 3).unwrap(),
            S::monomial(2, 6, MultiIndex::new(&[0, 3]), rat(1, 1))
        );
        assert_eq!(ramify(&e, 1, 1).unwrap(), e);
    }

    #[test]
    fn linear_change_remark_example() {
        // Σ n!(x1x2)^n under x1 = ξ1+ξ2, x2 = ξ1−ξ2 gives Σ n!(ξ1²−ξ2²)^n
        let t = 12;
        let f = monomial_series(2, t, &MultiIndex::new(&[1, 1]), factorial::<Rational>);
        let a = Matrix::from_rows(vec![
            vec![rat(1, 1), rat(1, 1)],
            vec![rat(1, 1), rat(-1, 1)],
        ])
        .unwrap();
        let g = linear_change(&f, &a).unwrap();
        for j in 0..=3u32 {
            for k in 0..=3u32 {
                let n = j + k;
                let binom = factorial::<Rational>(n) / (factorial::<Rational>(j) * factorial::<Rational>(k));
                let sign = if k % 2 == 0 { rat(1, 1) } else { rat(-1, 1) };
                let expected = binom * factorial::<Rational>(n) * sign;
                assert_eq!(g.coeff_of(&[2 * j, 2 * k]), expected);
            }
        }
        let back = linear_change(&g, &a.inverse().unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn monomial_bounds() {
        let f = monomial_series(2, 20, &MultiIndex::new(&[1, 1]), factorial::<Rational>);
        let b = monomial_gevrey_check(&f, &MultiIndex::new(&[1, 1]), &rat(1, 1), &rat(1, 1)).unwrap();
        assert!((b.constant() - 1.0).abs() < 1e-9);
        let g = monomial_series(2, 20, &MultiIndex::new(&[1, 0]), factorial::<Rational>);
        let b = monomial_gevrey_check(&g, &MultiIndex::new(&[0, 1]), &rat(1, 1), &rat(1, 1)).unwrap();
        assert!(b.growing(5));
        assert_eq!(b.witness, Some(MultiIndex::new(&[20, 0])));
    }
}
