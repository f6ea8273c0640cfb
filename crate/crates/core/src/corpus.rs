//! Reference problems with known closed-form solutions.

use num_traits::One;

use crate::division::{monomial_divide, LinearForm};
use crate::error::{Error, Result};
use crate::gevrey::{blowup, ramify};
use crate::linalg::{Matrix, SeriesMatrix};
use crate::scalar::Rational;
use crate::series::{MultiIndex, TruncatedSeries};
use crate::solver::{PdeProblem, RightHandSide};

type S = TruncatedSeries<Rational>;

fn scalar_mu(mu: Rational) -> Matrix<Rational> {
    Matrix::from_rows(vec![vec![mu]]).expect("1x1")
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Euler's equation `x² y' + y = x + extra(x)`, written as `x · (x ∂_x) y = x + extra − y`.
pub fn euler_with(extra: S, trunc: u32) -> Result<PdeProblem<Rational>> {
    let x = S::variable(1, trunc, 0);
    let rhs = RightHandSide::linear(vec![&x + &extra], scalar_mu(int(-1)))?;
    PdeProblem::new(x.clone(), vec![x], rhs, LinearForm::uniform(1), trunc)
}

/// `x² y' + y = x`; solution `Σ (−1)^n n! x^{n+1}`.
pub fn euler(trunc: u32) -> Result<PdeProblem<Rational>> {
    euler_with(S::zero(1, trunc), trunc)
}

/// `x² y' + y = x + x²`; solution `y = x`.
pub fn euler_convergent(trunc: u32) -> Result<PdeProblem<Rational>> {
    euler_with(S::variable(1, trunc, 0).pow(2), trunc)
}

/// `x1 x2 ∂_1 y = μ y − x1/(1 − x1)` with `P = x2`, `L = x1 ∂_1`;
/// solution `Σ n^m μ^{−(m+1)} x1^n x2^m`.
pub fn ex_ode(mu: Rational, trunc: u32) -> Result<PdeProblem<Rational>> {
    let x1 = S::variable(2, trunc, 0);
    let x2 = S::variable(2, trunc, 1);
    let c = -&(&x1 * &(&S::one(2, trunc) - &x1).inverse()?);
    let rhs = RightHandSide::linear(vec![c], scalar_mu(mu))?;
    PdeProblem::new(x2, vec![x1, S::zero(2, trunc)], rhs, LinearForm::uniform(2), trunc)
}

/// The same equation with the roles swapped: `P = x1`, `L = x2 ∂_1`.
pub fn ex_ode_swapped(mu: Rational, trunc: u32) -> Result<PdeProblem<Rational>> {
    let x1 = S::variable(2, trunc, 0);
    let x2 = S::variable(2, trunc, 1);
    let c = -&(&x1 * &(&S::one(2, trunc) - &x1).inverse()?);
    let rhs = RightHandSide::linear(vec![c], scalar_mu(mu))?;
    PdeProblem::new(x1, vec![x2, S::zero(2, trunc)], rhs, LinearForm::uniform(2), trunc)
}

/// `x^α L_λ(y) = μ y − x^β` with `L_λ = Σ λ_j x_j ∂_j`.
pub fn monomial_family(
    alpha: &[u32],
    lambda: &[Rational],
    beta: &[u32],
    mu: Rational,
    trunc: u32,
) -> Result<PdeProblem<Rational>> {
    let d = alpha.len();
    if lambda.len() != d || beta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: lambda.len().min(beta.len()),
        });
    }
    let p = S::monomial(d, trunc, MultiIndex::new(alpha), Rational::one());
    let a = euler_field(lambda, trunc);
    let c = S::monomial(d, trunc, MultiIndex::new(beta), -Rational::one());
    let rhs = RightHandSide::linear(vec![c], scalar_mu(mu))?;
    PdeProblem::new(p, a, rhs, LinearForm::uniform(d), trunc)
}

/// Coefficients of `L_λ = Σ λ_j x_j ∂_j`.
pub fn euler_field(lambda: &[Rational], trunc: u32) -> Vec<S> {
    let d = lambda.len();
    (0..d)
        .map(|j| S::variable(d, trunc, j).scale(&lambda[j]))
        .collect()
}

/// Closed form for [`monomial_family`] with `⟨λ,α⟩ ≠ 0`: the coefficient of
/// `x^{nα+β}` is `binom(−⟨λ,β⟩/⟨λ,α⟩, n) (−1)^n n! ⟨λ,α⟩^n / μ^{n+1}`.
pub fn monomial_family_coefficient(
    lambda_alpha: &Rational,
    lambda_beta: &Rational,
    mu: &Rational,
    n: u32,
) -> Rational {
    let t = -(lambda_beta / lambda_alpha);
    // binom(t, n) n! = t (t−1) ⋯ (t−n+1)
    let mut falling = Rational::one();
    for i in 0..n {
        falling *= &t - int(i as i64);
    }
    let sign = if n % 2 == 0 { Rational::one() } else { -Rational::one() };
    let mut mu_pow = mu.clone();
    let mut la_pow = Rational::one();
    for _ in 0..n {
        mu_pow *= mu;
        la_pow *= lambda_alpha;
    }
    falling * sign * la_pow / mu_pow
}

/// Closed form for [`monomial_family`] with `⟨λ,α⟩ = 0`:
/// `y = x^β / (μ − ⟨λ,β⟩ x^α)`, i.e. coefficient `⟨λ,β⟩^n / μ^{n+1}` at `x^{nα+β}`.
pub fn monomial_family_resonant_coefficient(lambda_beta: &Rational, mu: &Rational, n: u32) -> Rational {
    let mut v = Rational::one() / mu;
    for _ in 0..n {
        v = v * lambda_beta / mu;
    }
    v
}

/// `x y' = μ y − x` (`P = x`, `L = ∂_x`, `L(P) = 1`): solution `−x/(1 − μ)`.
pub fn convergent_linear(mu: Rational, trunc: u32) -> Result<PdeProblem<Rational>> {
    let x = S::variable(1, trunc, 0);
    let rhs = RightHandSide::linear(vec![-&x], scalar_mu(mu))?;
    PdeProblem::new(x, vec![S::one(1, trunc)], rhs, LinearForm::uniform(1), trunc)
}

/// `P L(y) = y − f(P)` with `L(P) = 0`: solution `f(P)`. Here `P = x1 x2`,
/// `L = x1 ∂_1 − x2 ∂_2` and `f(t) = t/(1 − t)`.
pub fn function_of_p(trunc: u32) -> Result<PdeProblem<Rational>> {
    let x1 = S::variable(2, trunc, 0);
    let x2 = S::variable(2, trunc, 1);
    let p = &x1 * &x2;
    let f = &p * &(&S::one(2, trunc) - &p).inverse()?;
    let rhs = RightHandSide::linear(vec![-&f], scalar_mu(Rational::one()))?;
    PdeProblem::new(p, vec![x1, -&x2], rhs, LinearForm::uniform(2), trunc)
}

/// `x1² ∂_1 y + x2² ∂_2 y + y = x1 x2` after the blow-up `x1 = z1, x2 = z1 z2`:
/// `z1 (z1 ∂_{z1} + (z2² − z2) ∂_{z2}) u = z1² z2 − u`.
pub fn multi_euler_blown_up(trunc: u32) -> Result<PdeProblem<Rational>> {
    let x1 = S::variable(2, trunc, 0);
    let x2 = S::variable(2, trunc, 1);
    let c = blowup(&(&x1 * &x2))?;
    let z1 = S::variable(2, trunc, 0);
    let z2 = S::variable(2, trunc, 1);
    let a = vec![z1.clone(), &z2.pow(2) - &z2];
    let rhs = RightHandSide::linear(vec![c], scalar_mu(int(-1)))?;
    PdeProblem::new(z1, a, rhs, LinearForm::uniform(2), trunc)
}

/// Exact solution of the two-variable Euler equation:
/// `Σ_β (−1)^{|β|} |β|! x^{β+1}` through degree `trunc`.
pub fn multi_euler_solution(trunc: u32) -> S {
    let mut terms = Vec::new();
    for deg in 0..=trunc.saturating_sub(2) {
        let fact = (1..=deg).fold(Rational::one(), |acc, k| acc * int(k as i64));
        let sign = if deg % 2 == 0 { Rational::one() } else { -Rational::one() };
        for b1 in 0..=deg {
            terms.push((MultiIndex::new(&[b1 + 1, deg - b1 + 1]), &fact * &sign));
        }
    }
    S::from_terms(2, trunc, terms)
}

/// The unfolding `(x^{k+1} − ε) y' = μ y − f(x, ε)` after the ramification
/// `ε = η^{k+1}` and the blow-up `x = z`, `η = z ζ`.
///
/// The coefficient `x^{k+1} − ε` becomes `z^{k+1} U(ζ)` with `U = 1 − ζ^{k+1}`,
/// `∂_x` becomes `z^{−1}(z ∂_z − ζ ∂_ζ)`, and dividing by `U` gives
/// `z^k L(u) = U^{−1}(μ u − f')` with `L = z ∂_z − ζ ∂_ζ`.
pub fn saddle_node_unfolding(k: u32, mu: Rational, f: &S, trunc: u32) -> Result<PdeProblem<Rational>> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.dim(),
        });
    }
    let x = S::variable(2, trunc, 0);
    let eps = S::variable(2, trunc, 1);
    let coefficient = &x.pow(k + 1) - &eps;
    let transformed = blowup(&ramify(&coefficient, 1, k + 1)?)?;
    let (unit, rest) = monomial_divide(&transformed, &MultiIndex::new(&[k + 1, 0]))?;
    if !rest.series().is_zero() {
        return Err(Error::InvalidInput("coefficient is not divisible by z^(k+1)".into()));
    }
    let unit = unit.truncate(trunc);
    let unit_inv = unit.as_polynomial(trunc).inverse()?;
    let f_new = blowup(&ramify(&f.truncate(trunc), 1, k + 1)?)?;

    let z = S::variable(2, trunc, 0);
    let zeta = S::variable(2, trunc, 1);
    let p = z.pow(k);
    let a = vec![z, -&zeta];
    let c = -&(&unit_inv * &f_new);
    let mu_s = S::constant(2, trunc, mu.clone());
    let a_mat = &(&unit_inv * &mu_s) - &mu_s;
    let rhs = RightHandSide::new(
        vec![c],
        scalar_mu(mu),
        Some(SeriesMatrix::from_rows(vec![vec![a_mat]])?),
        Vec::new(),
    )?;
    PdeProblem::new(p, a, rhs, LinearForm::uniform(2), trunc)
}

/// The germ `P = x1² + x2²` with `L_λ`, `λ = (1,1)` (`L(P) = 2P`) and `F = μ y − x1 x2`.
pub fn quadratic_germ(mu: Rational, trunc: u32) -> Result<PdeProblem<Rational>> {
    let x1 = S::variable(2, trunc, 0);
    let x2 = S::variable(2, trunc, 1);
    let p = &x1.pow(2) + &x2.pow(2);
    let rhs = RightHandSide::linear(vec![-&(&x1 * &x2)], scalar_mu(mu))?;
    PdeProblem::new(p, euler_field(&[Rational::one(), Rational::one()], trunc), rhs, LinearForm::uniform(2), trunc)
}
