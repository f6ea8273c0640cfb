//! Formal solutions of `P(x) L(y) = F(x, y)`.
//!
//! `L = Σ a_j ∂_j` is a first-order operator, `P(0) = 0`, and the right-hand
//! side is `F = c + (μ + A) y + Σ_{|I|≥2} A_I y^I` with `μ` invertible. The
//! solution is produced as a `P`-adic expansion `ŷ = Σ y_n P^n` (with every
//! `y_n` in the residue class of the Weierstrass division by `P`) and as a
//! plain truncated series.

mod companion;
mod direct;
mod poly;

use std::fmt;


pub use companion::{companion_augment, AugmentedProblem};
pub use direct::solve_direct;
pub use poly::YPolynomial;

use crate::division::{LinearForm, PAdicDecomposition, WeierstrassDivisor};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SeriesMatrix};
use crate::scalar::Coeff;
use crate::series::{MultiIndex, Order, SeriesVector, TruncatedSeries};

/// One nonlinear term `A_I(x) y^I` with `|I| ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTerm<T> {
    pub index: MultiIndex,
    pub coeffs: SeriesVector<T>,
}

/// `F(x, y) = c(x) + (μ + A(x)) y + Σ_{|I|≥2} A_I(x) y^I`.
#[derive(Clone, Debug, PartialEq)]
pub struct RightHandSide<T> {
    c: SeriesVector<T>,
    mu: Matrix<T>,
    a: SeriesMatrix<T>,
    nonlinear: Vec<NonlinearTerm<T>>,
}

impl<T: Coeff> RightHandSide<T> {
    /// Validates `c(0) = 0`, `A(0) = 0`, `|I| ≥ 2` and `det μ ≠ 0`.
    /// A missing `A` means `A = 0`.
    pub fn new(
        c: SeriesVector<T>,
        mu: Matrix<T>,
        a: Option<SeriesMatrix<T>>,
        nonlinear: Vec<NonlinearTerm<T>>,
    ) -> Result<Self> {
        let n = c.len();
        let Some(first) = c.first() else {
            return Err(Error::InvalidInput("empty right-hand side".into()));
        };
        let (dim, trunc) = (first.dim(), first.trunc());
        let check_dim = |s: &TruncatedSeries<T>| {
            if s.dim() != dim {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                })
            } else {
                Ok(())
            }
        };
        for s in &c {
            check_dim(s)?;
            if !s.constant_term().is_zero() {
                return Err(Error::InvalidInput("c must vanish at the origin".into()));
            }
        }
        if mu.rows() != n || mu.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mu.rows(),
            });
        }
        if mu.determinant().is_zero() {
            return Err(Error::InvalidInput("mu is singular".into()));
        }
        let a = match a {
            Some(a) => {
                if a.size() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.size(),
                    });
                }
                for s in a.entries() {
                    check_dim(s)?;
                    if !s.constant_term().is_zero() {
                        return Err(Error::InvalidInput("A must vanish at the origin".into()));
                    }
                }
                a
            }
            None => SeriesMatrix::zeros(n, dim, trunc),
        };
        for t in &nonlinear {
            if t.index.dim() != n || t.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.coeffs.len(),
                });
            }
            if t.index.degree() < 2 {
                return Err(Error::InvalidInput(
                    "nonlinear terms need |I| >= 2".into(),
                ));
            }
            for s in &t.coeffs {
                check_dim(s)?;
            }
        }
        Ok(RightHandSide { c, mu, a, nonlinear })
    }

    /// `F = c + μ y`.
    pub fn linear(c: SeriesVector<T>, mu: Matrix<T>) -> Result<Self> {
        Self::new(c, mu, None, Vec::new())
    }

    pub fn size(&self) -> usize {
        self.c.len()
    }

    pub fn dim(&self) -> usize {
        self.c[0].dim()
    }

    pub fn c(&self) -> &SeriesVector<T> {
        &self.c
    }

    pub fn mu(&self) -> &Matrix<T> {
        &self.mu
    }

    pub fn a(&self) -> &SeriesMatrix<T> {
        &self.a
    }

    pub fn nonlinear(&self) -> &[NonlinearTerm<T>] {
        &self.nonlinear
    }

    /// `F` as a polynomial in `y`, coefficients truncated at `trunc`.
    pub fn to_polynomial(&self, trunc: u32) -> YPolynomial<T> {
        let n = self.size();
        let dim = self.dim();
        let mut f = YPolynomial::new(n, dim, trunc);
        f.add_term(MultiIndex::zero(n), self.c.clone())
            .expect("validated sizes");
        for l in 0..n {
            let col: SeriesVector<T> = (0..n)
                .map(|i| {
                    let a = self.a.get(i, l).truncate(trunc);
                    &a + &TruncatedSeries::constant(dim, a.trunc(), self.mu[(i, l)].clone())
                })
                .collect();
            f.add_term(MultiIndex::unit(n, l), col)
                .expect("validated sizes");
        }
        for t in &self.nonlinear {
            f.add_term(t.index.clone(), t.coeffs.clone())
                .expect("validated sizes");
        }
        f
    }
}

/// The problem `P · L(y) = F(x, y)` together with the linear form selecting
/// the division and the global truncation order.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeProblem<T> {
    p: TruncatedSeries<T>,
    a: Vec<TruncatedSeries<T>>,
    rhs: RightHandSide<T>,
    ell: LinearForm,
    trunc: u32,
}

impl<T: Coeff> PdeProblem<T> {
    pub fn new(
        p: TruncatedSeries<T>,
        a: Vec<TruncatedSeries<T>>,
        rhs: RightHandSide<T>,
        ell: LinearForm,
        trunc: u32,
    ) -> Result<Self> {
        let d = p.dim();
        for found in [a.len(), ell.dim(), rhs.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        if a.iter().any(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.iter().map(|s| s.dim()).find(|&x| x != d).unwrap_or(d),
            });
        }
        if !p.constant_term().is_zero() {
            return Err(Error::DivisorNotInMaximalIdeal);
        }
        if p.truncate(trunc).is_zero() {
            return Err(Error::InvalidInput("P must be nonzero".into()));
        }
        if a.iter().all(|s| s.truncate(trunc).is_zero()) {
            return Err(Error::InvalidInput(
                "operator coefficients must not all vanish".into(),
            ));
        }
        Ok(PdeProblem {
            p: p.truncate(trunc),
            a: a.iter().map(|s| s.truncate(trunc)).collect(),
            rhs,
            ell,
            trunc,
        })
    }

    pub fn p(&self) -> &TruncatedSeries<T> {
        &self.p
    }

    pub fn operator(&self) -> &[TruncatedSeries<T>] {
        &self.a
    }

    pub fn rhs(&self) -> &RightHandSide<T> {
        &self.rhs
    }

    pub fn ell(&self) -> &LinearForm {
        &self.ell
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn size(&self) -> usize {
        self.rhs.size()
    }

    pub fn divisor(&self) -> Result<WeierstrassDivisor<T>> {
        WeierstrassDivisor::new(&self.p, &self.ell)
    }

    /// `L(P)`.
    pub fn l_of_p(&self) -> Result<TruncatedSeries<T>> {
        apply_operator(&self.a, std::slice::from_ref(&self.p)).map(|mut v| v.remove(0))
    }

    /// `F` as a polynomial in `y`, truncated at the problem order.
    pub fn polynomial(&self) -> YPolynomial<T> {
        self.rhs.to_polynomial(self.trunc)
    }
}

/// `L(f) = Σ a_j ∂_j f` componentwise; the truncation drops by one.
pub fn apply_operator<T: Coeff>(
    a: &[TruncatedSeries<T>],
    f: &[TruncatedSeries<T>],
) -> Result<SeriesVector<T>> {
    f.iter()
        .map(|fi| {
            if a.len() != fi.dim() {
                return Err(Error::DimensionMismatch {
                    expected: fi.dim(),
                    found: a.len(),
                });
            }
            let mut acc: Option<TruncatedSeries<T>> = None;
            for (j, aj) in a.iter().enumerate() {
                let term = aj.checked_mul(&fi.partial(j)?)?;
                acc = Some(match acc {
                    Some(s) => &s + &term,
                    None => term,
                });
            }
            acc.ok_or(Error::InvalidInput("operator without coefficients".into()))
        })
        .collect()
}

/// Which theorem the solution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `P | L(P)`: the solution is `P`-1-Gevrey.
    Divergent,
    /// `L(P)(0) ≠ 0`: the solution converges.
    Convergent,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Divergent => "divergent",
            Branch::Convergent => "convergent",
        })
    }
}

/// Branch requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchChoice {
    #[default]
    Auto,
    Divergent,
    Convergent,
}

/// Outcome of dividing `L(P)` by `P`.
#[derive(Debug, Clone, PartialEq)]
pub enum Divisibility<T> {
    /// `L(P) = P · h`.
    Divides(TruncatedSeries<T>),
    /// The nonzero residue of `L(P)` modulo `P`.
    Residue(TruncatedSeries<T>),
}

pub fn check_divides<T: Coeff>(problem: &PdeProblem<T>) -> Result<Divisibility<T>> {
    let lp = problem.l_of_p()?;
    let (h, r) = problem.divisor()?.divide(&lp)?;
    if r.series().is_zero() {
        Ok(Divisibility::Divides(h))
    } else {
        Ok(Divisibility::Residue(r.into_series()))
    }
}

/// The solution `Y_0` of `F(x, Y_0(x)) = 0`, by Newton iteration from
/// `initial` (zero when absent).
pub fn implicit_solution<T: Coeff>(
    problem: &PdeProblem<T>,
    initial: Option<&SeriesVector<T>>,
) -> Result<SeriesVector<T>> {
    let f = problem.polynomial();
    let n = problem.trunc();
    let mut y: SeriesVector<T> = match initial {
        Some(v) => v.iter().map(|s| s.truncate(n)).collect(),
        None => vec![TruncatedSeries::zero(problem.dim(), n); problem.size()],
    };
    const BUDGET: usize = 64;
    for _ in 0..BUDGET {
        let r = f.eval(&y)?;
        if r.iter().all(TruncatedSeries::is_zero) && r.iter().all(|s| s.trunc() >= n) {
            return Ok(y);
        }
        let jinv = f.jacobian(&y)?.inverse()?;
        let delta = jinv.apply(&r);
        y = y.iter().zip(&delta).map(|(a, b)| a - b).collect();
    }
    Err(Error::NoConvergence(BUDGET))
}

/// `y_0 = R(Y_0)`.
pub fn solve_y0<T: Coeff>(
    problem: &PdeProblem<T>,
    initial: Option<&SeriesVector<T>>,
) -> Result<SeriesVector<T>> {
    let div = problem.divisor()?;
    implicit_solution(problem, initial)?
        .iter()
        .map(|s| div.remainder(s))
        .collect()
}

/// The equation after the change of unknown `y = y_0 + w`:
/// `P L(w) = c̃ + (μ + Ã) w + Σ_{|I|≥2} Ã_I w^I` with `P | c̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedSystem<T> {
    pub y0: SeriesVector<T>,
    pub c: SeriesVector<T>,
    pub mu: Matrix<T>,
    /// `Ã = ∂F/∂y(x, y_0) − μ`.
    pub a: SeriesMatrix<T>,
    /// Terms of degree ≥ 2 in `w`.
    pub nonlinear: YPolynomial<T>,
}

pub fn shift_system<T: Coeff>(
    problem: &PdeProblem<T>,
    y0: &SeriesVector<T>,
) -> Result<ShiftedSystem<T>> {
    let n = problem.size();
    let dim = problem.dim();
    let moved = problem.polynomial().translate(y0)?;
    let ly0 = apply_operator(problem.operator(), y0)?;
    let c: SeriesVector<T> = moved
        .coefficient(&MultiIndex::zero(n))
        .iter()
        .zip(&ly0)
        .map(|(f0, l)| Ok(f0 - &problem.p.mul_sharp(l)?))
        .collect::<Result<_>>()?;
    let mu = problem.rhs.mu().clone();
    let mut a = SeriesMatrix::zeros(n, dim, moved.trunc());
    for l in 0..n {
        let col = moved.coefficient(&MultiIndex::unit(n, l));
        for (i, s) in col.into_iter().enumerate() {
            let s = &s - &TruncatedSeries::constant(dim, s.trunc(), mu[(i, l)].clone());
            a.set(i, l, s);
        }
    }
    let mut nonlinear = YPolynomial::new(n, dim, moved.trunc());
    for (index, coeffs) in moved.terms() {
        if index.degree() >= 2 {
            nonlinear.add_term(index.clone(), coeffs.clone())?;
        }
    }
    Ok(ShiftedSystem {
        y0: y0.clone(),
        c,
        mu,
        a,
        nonlinear,
    })
}

/// Result of a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport<T> {
    pub branch: Branch,
    /// `h` with `L(P) = P h` (divergent branch only).
    pub h: Option<TruncatedSeries<T>>,
    /// `P`-adic expansion of each component; coefficient 0 is `y_0`.
    pub decomposition: Vec<PAdicDecomposition<T>>,
    /// The recomposed solution.
    pub plain: SeriesVector<T>,
    /// Order through which `plain` is exact.
    pub certified_order: u32,
    /// Order of `P L(plain) − F(x, plain)` (exceeds `certified_order`).
    pub residual_order: Order,
}

/// `P L(y) − F(x, y)`, with the product by `P` certified through its order.
pub fn residual<T: Coeff>(problem: &PdeProblem<T>, y: &SeriesVector<T>) -> Result<SeriesVector<T>> {
    let ly = apply_operator(problem.operator(), y)?;
    let fy = problem.polynomial().eval(y)?;
    ly.iter()
        .zip(&fy)
        .map(|(l, f)| Ok(&problem.p.mul_sharp(l)? - f))
        .collect()
}

fn vector_order<T: Coeff>(v: &SeriesVector<T>) -> Order {
    v.iter()
        .filter_map(|s| s.order().finite())
        .min()
        .map_or(Order::AboveTruncation, Order::Finite)
}

fn default_terms(trunc: u32, order: u32) -> usize {
    ((trunc + 1).div_ceil(order) - 1) as usize
}

/// Divergent branch; requires `P | L(P)`.
pub fn solve_padic<T: Coeff>(problem: &PdeProblem<T>, max_n: Option<usize>) -> Result<SolverReport<T>> {
    match check_divides(problem)? {
        Divisibility::Divides(h) => run(problem, Branch::Divergent, Some(h), max_n),
        Divisibility::Residue(r) => Err(Error::Refusal(format!(
            "P does not divide L(P): residue of order {}",
            r.order()
        ))),
    }
}

/// Convergent branch; requires `L(P)(0) ≠ 0`, and `μ − n L(P)(0) I` invertible
/// for every `n` reached.
pub fn solve_convergent<T: Coeff>(
    problem: &PdeProblem<T>,
    max_n: Option<usize>,
) -> Result<SolverReport<T>> {
    if problem.l_of_p()?.constant_term().is_zero() {
        return Err(Error::Refusal("L(P)(0) = 0".into()));
    }
    run(problem, Branch::Convergent, None, max_n)
}

/// Pick the branch (divergent first), or refuse when neither hypothesis holds.
pub fn solve<T: Coeff>(
    problem: &PdeProblem<T>,
    choice: BranchChoice,
    max_n: Option<usize>,
) -> Result<SolverReport<T>> {
    match choice {
        BranchChoice::Divergent => solve_padic(problem, max_n),
        BranchChoice::Convergent => solve_convergent(problem, max_n),
        BranchChoice::Auto => match check_divides(problem)? {
            Divisibility::Divides(h) => run(problem, Branch::Divergent, Some(h), max_n),
            Divisibility::Residue(r) => {
                if problem.l_of_p()?.constant_term().is_zero() {
                    Err(Error::Refusal(format!(
                        "P does not divide L(P) (residue of order {}) and L(P)(0) = 0",
                        r.order()
                    )))
                } else {
                    run(problem, Branch::Convergent, None, max_n)
                }
            }
        },
    }
}

fn quotient_vec<T: Coeff>(div: &WeierstrassDivisor<T>, v: &SeriesVector<T>) -> Result<SeriesVector<T>> {
    v.iter().map(|s| div.quotient(s)).collect()
}

fn remainder_vec<T: Coeff>(div: &WeierstrassDivisor<T>, v: &SeriesVector<T>) -> Result<SeriesVector<T>> {
    v.iter().map(|s| div.remainder(s)).collect()
}

fn add_vec<T: Coeff>(a: &SeriesVector<T>, b: &SeriesVector<T>) -> SeriesVector<T> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_vec<T: Coeff>(a: &SeriesVector<T>, b: &SeriesVector<T>) -> SeriesVector<T> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale_vec<T: Coeff>(a: &SeriesVector<T>, c: &T) -> SeriesVector<T> {
    a.iter().map(|x| x.scale(c)).collect()
}

fn mul_vec<T: Coeff>(s: &TruncatedSeries<T>, a: &SeriesVector<T>) -> SeriesVector<T> {
    a.iter().map(|x| s * x).collect()
}

/// Partial sum `Σ_{j<n} w_j P^j`.
fn partial_sum<T: Coeff>(
    w: &[SeriesVector<T>],
    p_powers: &[TruncatedSeries<T>],
    trunc: u32,
) -> Result<SeriesVector<T>> {
    let size = w[0].len();
    let dim = w[0][0].dim();
    let mut out = vec![TruncatedSeries::zero(dim, trunc); size];
    for (j, wj) in w.iter().enumerate() {
        for (o, s) in out.iter_mut().zip(wj) {
            *o = &*o + &s.mul_sharp(&p_powers[j])?;
        }
    }
    Ok(out)
}

fn run<T: Coeff>(
    problem: &PdeProblem<T>,
    branch: Branch,
    h: Option<TruncatedSeries<T>>,
    max_n: Option<usize>,
) -> Result<SolverReport<T>> {
    let div = problem.divisor()?;
    let n_trunc = problem.trunc();
    let size = problem.size();
    let dim = problem.dim();
    let k = div.order();
    let m = max_n.unwrap_or_else(|| default_terms(n_trunc, k));
    let lp = problem.l_of_p()?;
    let lp0 = lp.constant_term();

    let y0 = solve_y0(problem, None)?;
    let sys = shift_system(problem, &y0)?;
    let zero = |t: u32| vec![TruncatedSeries::<T>::zero(dim, t); size];

    // P^j, known through P.trunc + (j−1)·o(P)
    let mut p_powers = vec![TruncatedSeries::one(dim, n_trunc)];
    for j in 1..=m {
        let next = p_powers[j - 1].mul_sharp(problem.p())?;
        p_powers.push(next);
    }

    let mut w: Vec<SeriesVector<T>> = vec![zero(n_trunc)];
    let c_is_zero = problem.rhs.c().iter().all(TruncatedSeries::is_zero);
    if c_is_zero {
        for n in 1..=m {
            let t = n_trunc.saturating_sub(n as u32 * k);
            w.push(zero(t));
        }
    } else {
        let mut cq = sys.c.clone();
        debug_assert!(remainder_vec(&div, &cq)?.iter().all(TruncatedSeries::is_zero));
        let mut acc_l: Option<SeriesVector<T>> = None;
        let mut acc_a: Option<SeriesVector<T>> = None;
        for n in 1..=m {
            if branch == Branch::Convergent {
                let shifted = problem
                    .rhs
                    .mu()
                    .add(&Matrix::identity(size).scale(&(-(lp0.clone() * T::from_integer(n as i64)))));
                if shifted.determinant().is_zero() {
                    return Err(Error::Resonance { n });
                }
            }
            cq = quotient_vec(&div, &cq)?;
            let c_n = remainder_vec(&div, &cq)?;

            let prev = &w[n - 1];
            let mut x_l = apply_operator(problem.operator(), prev)?;
            if let (Some(h), true) = (&h, n >= 2) {
                let factor = T::from_integer(n as i64 - 1);
                x_l = add_vec(&x_l, &scale_vec(&mul_vec(h, prev), &factor));
            }
            let known = match &acc_l {
                Some(s) => add_vec(&quotient_vec(&div, s)?, &x_l),
                None => x_l,
            };
            let carried_a = match &acc_a {
                Some(s) => Some(quotient_vec(&div, s)?),
                None => None,
            };

            let mut d = sub_vec(&remainder_vec(&div, &known)?, &c_n);
            if let Some(q) = &carried_a {
                d = sub_vec(&d, &remainder_vec(&div, q)?);
            }
            if n >= 2 && sys.nonlinear.terms().next().is_some() {
                let ws = partial_sum(&w, &p_powers, n_trunc)?;
                let mut nl = sys.nonlinear.eval(&ws)?;
                for _ in 0..n {
                    nl = quotient_vec(&div, &nl)?;
                }
                d = sub_vec(&d, &remainder_vec(&div, &nl)?);
            }

            let mut mat = SeriesMatrix::from_constant(&sys.mu, dim, n_trunc).add(&sys.a);
            if branch == Branch::Convergent {
                let shift = lp.scale(&T::from_integer(-(n as i64)));
                for i in 0..size {
                    let v = mat.get(i, i) + &shift;
                    mat.set(i, i, v);
                }
            }
            let v = mat.inverse()?.apply(&d);
            let wn = remainder_vec(&div, &v)?;

            let aw = sys.a.apply(&wn);
            acc_a = Some(match carried_a {
                Some(q) => add_vec(&q, &aw),
                None => aw,
            });
            acc_l = Some(if branch == Branch::Convergent {
                let factor = T::from_integer(n as i64);
                add_vec(&known, &scale_vec(&mul_vec(&lp, &wn), &factor))
            } else {
                known
            });
            w.push(wn);
        }
    }

    let mut decomposition = Vec::with_capacity(size);
    for l in 0..size {
        let mut coeffs = vec![y0[l].clone()];
        coeffs.extend(w[1..].iter().map(|wn| wn[l].clone()));
        decomposition.push(PAdicDecomposition::from_coefficients(div.clone(), coeffs)?);
    }
    let plain: SeriesVector<T> = decomposition.iter().map(PAdicDecomposition::recompose).collect();
    let certified_order = decomposition
        .iter()
        .map(PAdicDecomposition::certified_order)
        .min()
        .unwrap_or(n_trunc);
    let res = residual(problem, &plain)?;
    let residual_order = vector_order(&res);
    if res.iter().any(|s| s.trunc() < certified_order) || !residual_order.exceeds(certified_order) {
        return Err(Error::ResidualCheck {
            order: residual_order.finite().unwrap_or(certified_order),
            certified: certified_order,
        });
    }
    Ok(SolverReport {
        branch,
        h,
        decomposition,
        plain,
        certified_order,
        residual_order,
    })
}
