//! Reduction of `(PL)^k y + Σ_j u_j (PL)^j y = F(x, y)` to a first-order system.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SeriesMatrix};
use crate::scalar::Coeff;
use crate::series::{MultiIndex, TruncatedSeries};

use super::{NonlinearTerm, PdeProblem, RightHandSide};

/// The augmented problem in the unknown `w = (y, PL y, …, (PL)^{k−1} y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedProblem<T> {
    pub problem: PdeProblem<T>,
    /// `∂G/∂w(0, 0)`.
    pub jacobian: Matrix<T>,
    /// Ascending coefficients of `p_μ(σ^k + u_{k−1}(0) σ^{k−1} + ⋯ + u_1(0) σ)`.
    pub characteristic: Vec<T>,
}

fn poly_mul<T: Coeff>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x.clone() * y;
        }
    }
    out
}

/// Build `G(x, w) = (w_1, …, w_{k−1}, F(x, w_0) − Σ_j u_j w_j)` from `base`
/// (whose right-hand side is `F`) and the scalar series `u_1, …, u_{k−1}`.
pub fn companion_augment<T: Coeff>(
    base: &PdeProblem<T>,
    u: &[TruncatedSeries<T>],
    k: usize,
) -> Result<AugmentedProblem<T>> {
    if k < 2 {
        return Err(Error::InvalidInput("companion order must be at least 2".into()));
    }
    if u.len() != k - 1 {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            found: u.len(),
        });
    }
    let rhs = base.rhs();
    let n = rhs.size();
    let dim = base.dim();
    let trunc = base.trunc();
    let big = n * k;
    let last = (k - 1) * n;

    let mut c = vec![TruncatedSeries::zero(dim, trunc); big];
    for i in 0..n {
        c[last + i] = rhs.c()[i].truncate(trunc);
    }
    let mut mu = Matrix::zeros(big, big);
    let mut a = SeriesMatrix::zeros(big, dim, trunc);
    for j in 0..k - 1 {
        for i in 0..n {
            mu[(j * n + i, (j + 1) * n + i)] = T::one();
        }
    }
    for i in 0..n {
        for l in 0..n {
            mu[(last + i, l)] = rhs.mu()[(i, l)].clone();
            a.set(last + i, l, rhs.a().get(i, l).truncate(trunc));
        }
    }
    for (j, uj) in u.iter().enumerate() {
        let u0 = uj.constant_term();
        let tail = &uj.truncate(trunc) - &TruncatedSeries::constant(dim, trunc, u0.clone());
        for i in 0..n {
            let col = (j + 1) * n + i;
            mu[(last + i, col)] = -u0.clone();
            a.set(last + i, col, -&tail);
        }
    }
    let nonlinear = rhs
        .nonlinear()
        .iter()
        .map(|t| {
            let mut idx = vec![0; big];
            idx[..n].copy_from_slice(t.index.as_slice());
            let mut coeffs = vec![TruncatedSeries::zero(dim, trunc); big];
            for i in 0..n {
                coeffs[last + i] = t.coeffs[i].clone();
            }
            NonlinearTerm {
                index: MultiIndex::from(idx),
                coeffs,
            }
        })
        .collect();
    let jacobian = mu.clone();
    let new_rhs = RightHandSide::new(c, mu, Some(a), nonlinear)?;
    let problem = PdeProblem::new(
        base.p().clone(),
        base.operator().to_vec(),
        new_rhs,
        base.ell().clone(),
        trunc,
    )?;

    // q(σ) = σ^k + Σ_j u_j(0) σ^j
    let mut q = vec![T::zero(); k + 1];
    q[k] = T::one();
    for (j, uj) in u.iter().enumerate() {
        q[j + 1] = uj.constant_term();
    }
    let p_mu = rhs.mu().characteristic_polynomial();
    let mut characteristic = vec![T::zero()];
    let mut power = vec![T::one()];
    for coeff in &p_mu {
        if !coeff.is_zero() {
            let term: Vec<T> = power.iter().map(|v| v.clone() * coeff).collect();
            if term.len() > characteristic.len() {
                characteristic.resize(term.len(), T::zero());
            }
            for (slot, v) in characteristic.iter_mut().zip(term) {
                *slot += v;
            }
        }
        power = poly_mul(&power, &q);
    }
    Ok(AugmentedProblem {
        problem,
        jacobian,
        characteristic,
    })
}
