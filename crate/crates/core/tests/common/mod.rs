//! Random instances shared by the property and acceptance suites.
#![allow(dead_code)]

use gevreylab::division::{decompose_available, p_adic_multiply, LinearForm, WeierstrassDivisor};
use gevreylab::linalg::{Matrix, SeriesMatrix};
use gevreylab::scalar::rat;
use gevreylab::solver::{NonlinearTerm, PdeProblem, RightHandSide};
use gevreylab::{MultiIndex, Rational, Series};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn int(n: i64) -> Rational {
    rat(n, 1)
}

pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    let mut num = 0;
    while num == 0 {
        num = rng.gen_range(-5..=5);
    }
    rat(num, rng.gen_range(1..=3))
}

/// Up to `terms` monomials of degree in `min_deg..=max_deg`.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    d: usize,
    trunc: u32,
    min_deg: u32,
    max_deg: u32,
    terms: usize,
) -> Series {
    let pool: Vec<MultiIndex> = MultiIndex::up_to_degree(d, max_deg)
        .into_iter()
        .filter(|k| k.degree() >= min_deg)
        .collect();
    let count = rng.gen_range(0..=terms);
    let picks: Vec<(MultiIndex, Rational)> = (0..count)
        .map(|_| (pool.choose(rng).expect("nonempty pool").clone(), small_rational(rng)))
        .collect();
    Series::from_terms(d, trunc, picks)
}

/// A nonzero series vanishing at the origin.
pub fn random_divisor<R: Rng>(rng: &mut R, d: usize, trunc: u32, max_deg: u32) -> Series {
    loop {
        let p = random_poly(rng, d, trunc, 1, max_deg, 4);
        if !p.is_zero() {
            return p;
        }
    }
}

/// Positive weights drawn from `{1, 2, 3} / {1, 2}`.
pub fn random_linear_form<R: Rng>(rng: &mut R, d: usize) -> LinearForm {
    if rng.gen_bool(0.4) {
        return LinearForm::uniform(d);
    }
    let w = (0..d)
        .map(|_| rat(rng.gen_range(1..=3), rng.gen_range(1..=2)))
        .collect();
    LinearForm::new(w).expect("positive weights")
}

/// The four divisor shapes of the oracle-equivalence suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisorShape {
    X2,
    X1X2,
    X1SqPlusX2,
    Cubic,
}

pub const SHAPES: [DivisorShape; 4] = [
    DivisorShape::X2,
    DivisorShape::X1X2,
    DivisorShape::X1SqPlusX2,
    DivisorShape::Cubic,
];

impl DivisorShape {
    /// `P` together with Euler weights `λ` making it quasi-homogeneous, and
    /// its weighted degree `w` so that `L_λ(P) = w P`.
    fn build<R: Rng>(self, rng: &mut R, d: usize, trunc: u32) -> (Series, Vec<Rational>, Rational) {
        let x = |j| Series::variable(d, trunc, j);
        let mut lambda: Vec<Rational> = (0..d).map(|_| int(rng.gen_range(0..=2))).collect();
        let a = int(rng.gen_range(1..=3));
        let p = match self {
            DivisorShape::X2 => {
                lambda[1] = a.clone();
                x(1)
            }
            DivisorShape::X1X2 => {
                lambda[0] = a.clone();
                lambda[1] = int(rng.gen_range(0..=2));
                &x(0) * &x(1)
            }
            DivisorShape::X1SqPlusX2 => {
                lambda[0] = a.clone();
                lambda[1] = &a * int(2);
                &x(0).pow(2) + &x(1)
            }
            // x1³ + x1 x2², homogeneous of degree 3
            DivisorShape::Cubic => {
                lambda[0] = a.clone();
                lambda[1] = a.clone();
                &x(0).pow(3) + &(&x(0) * &x(1).pow(2))
            }
        };
        let w = match self {
            DivisorShape::X2 => lambda[1].clone(),
            DivisorShape::X1X2 => &lambda[0] + &lambda[1],
            DivisorShape::X1SqPlusX2 => &lambda[0] * int(2),
            DivisorShape::Cubic => &lambda[0] * int(3),
        };
        (p, lambda, w)
    }
}

/// Shape and sizes of one randomized problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub shape: DivisorShape,
    pub d: usize,
    pub n: usize,
    pub trunc: u32,
}

/// `P L(y) = F(x, y)` with `L = Σ (λ_j x_j + P v_j) ∂_j`, so that
/// `L(P) = P (w + Σ v_j ∂_j P)`, and `F = c + (μ + A) y + A_I y^I` with
/// triangular `μ` of negative diagonal (no resonance with `h(0) = w ≥ 0`).
pub fn random_problem<R: Rng>(rng: &mut R, spec: &ProblemSpec) -> PdeProblem<Rational> {
    let ProblemSpec { shape, d, n, trunc } = *spec;
    let (p, lambda, _w) = shape.build(rng, d, trunc);
    let a: Vec<Series> = (0..d)
        .map(|j| {
            let euler = Series::variable(d, trunc, j).scale(&lambda[j]);
            if rng.gen_bool(0.5) {
                let v = random_poly(rng, d, trunc, 1, 1, 2);
                &euler + &(&p * &v)
            } else {
                euler
            }
        })
        .collect();
    // make sure at least one coefficient survives
    let a = if a.iter().all(Series::is_zero) {
        let mut a = a;
        a[0] = Series::variable(d, trunc, 0);
        a
    } else {
        a
    };
    let mut mu = Matrix::zeros(n, n);
    for i in 0..n {
        mu[(i, i)] = -int(rng.gen_range(1..=3)) / int(rng.gen_range(1..=2));
        for j in i + 1..n {
            mu[(i, j)] = int(rng.gen_range(-2..=2));
        }
    }
    let c: Vec<Series> = (0..n)
        .map(|_| {
            let mut c = random_poly(rng, d, trunc, 1, 3, 4);
            if c.is_zero() {
                c = Series::variable(d, trunc, 0);
            }
            c
        })
        .collect();
    let a_mat = if rng.gen_bool(0.5) {
        let rows = (0..n)
            .map(|_| (0..n).map(|_| random_poly(rng, d, trunc, 1, 2, 2)).collect())
            .collect();
        Some(SeriesMatrix::from_rows(rows).expect("square"))
    } else {
        None
    };
    let nonlinear = if rng.gen_bool(0.5) {
        let mut idx = vec![0u32; n];
        idx[rng.gen_range(0..n)] += 1;
        idx[rng.gen_range(0..n)] += 1;
        vec![NonlinearTerm {
            index: MultiIndex::new(&idx),
            coeffs: (0..n).map(|_| random_poly(rng, d, trunc, 0, 2, 2)).collect(),
        }]
    } else {
        Vec::new()
    };
    let rhs = RightHandSide::new(c, mu, a_mat, nonlinear).expect("valid right-hand side");
    PdeProblem::new(p, a, rhs, LinearForm::uniform(d), trunc).expect("valid problem")
}

/// Spec `i` of the 25-problem oracle suite: cycles through shapes and sizes.
pub fn oracle_spec<R: Rng>(rng: &mut R, i: usize) -> ProblemSpec {
    let shape = SHAPES[i % SHAPES.len()];
    let d = if i % 3 == 2 { 3 } else { 2 };
    let n = 1 + (i / 2) % 2;
    let max_trunc = if d == 3 { 9 } else { 12 };
    ProblemSpec {
        shape,
        d,
        n,
        trunc: rng.gen_range(6..=max_trunc),
    }
}

/// `g = qP + r` through the certified degree, `r ∈ Δ_α`, and both maps
/// linear. Returns how many recompositions were checked (the quotient can
/// be uncertified for coarse truncations), or the first failure.
pub fn check_division(
    g1: &Series,
    g2: &Series,
    p: &Series,
    ell: &LinearForm,
    a: &Rational,
    b: &Rational,
) -> Result<usize, String> {
    let div = WeierstrassDivisor::new(p, ell).map_err(|e| e.to_string())?;
    let alpha = div.alpha().clone();
    let mut recomposed = 0;
    for g in [g1, g2] {
        let r = div.remainder(g).map_err(|e| e.to_string())?;
        if let Some((k, _)) = r.terms().find(|(k, _)| alpha.divides(k)) {
            return Err(format!("remainder monomial {k:?} lies in the cone of {alpha:?}"));
        }
        if let Ok(q) = div.quotient(g) {
            let t = r.trunc().min(q.trunc() + div.order());
            let back = &q.mul_sharp(p).map_err(|e| e.to_string())? + &r;
            if !back.agrees_with(g, t) {
                return Err(format!("qP + r differs from g below degree {t}"));
            }
            recomposed += 1;
        }
    }
    let combo = &g1.scale(a) + &g2.scale(b);
    let r = |g: &Series| div.remainder(g).map_err(|e| e.to_string());
    if r(&combo)? != &r(g1)?.scale(a) + &r(g2)?.scale(b) {
        return Err("remainder is not linear".into());
    }
    if let (Ok(qc), Ok(q1), Ok(q2)) = (div.quotient(&combo), div.quotient(g1), div.quotient(g2)) {
        if qc != &q1.scale(a) + &q2.scale(b) {
            return Err("quotient is not linear".into());
        }
    }
    Ok(recomposed)
}

/// Division by `c x^α` against the direct split of the support of `g`.
pub fn check_monomial_division(g: &Series, alpha: &MultiIndex, c: &Rational, ell: &LinearForm) -> Result<(), String> {
    let d = g.dim();
    let p = Series::monomial(d, g.trunc(), alpha.clone(), c.clone());
    let div = WeierstrassDivisor::new(&p, ell).map_err(|e| e.to_string())?;
    let (q, r) = div.divide(g).map_err(|e| e.to_string())?;
    let inv = Rational::from_integer(1.into()) / c;
    let q_oracle = Series::from_terms(
        d,
        q.trunc(),
        g.terms()
            .filter_map(|(k, v)| k.checked_sub(alpha).map(|gamma| (gamma, v * &inv)))
            .filter(|(gamma, _)| gamma.degree() <= q.trunc()),
    );
    let r_oracle = Series::from_terms(
        d,
        r.series().trunc(),
        g.terms()
            .filter(|(k, _)| !alpha.divides(k))
            .map(|(k, v)| (k.clone(), v.clone())),
    );
    if q != q_oracle {
        return Err(format!("quotient by x^{alpha:?} differs"));
    }
    if *r.series() != r_oracle {
        return Err(format!("remainder by x^{alpha:?} differs"));
    }
    Ok(())
}

/// `p_adic_multiply` against the decomposition of the plain product.
pub fn check_padic_multiply(f: &Series, g: &Series, p: &Series, ell: &LinearForm) -> Result<(), String> {
    let div = WeierstrassDivisor::new(p, ell).map_err(|e| e.to_string())?;
    let fa = decompose_available(&div, f).map_err(|e| e.to_string())?;
    let ga = decompose_available(&div, g).map_err(|e| e.to_string())?;
    let prod = p_adic_multiply(&fa, &ga).map_err(|e| e.to_string())?;
    let direct = decompose_available(&div, &(f * g)).map_err(|e| e.to_string())?;
    for (n, (a, b)) in prod.coeffs().iter().zip(direct.coeffs()).enumerate() {
        if !a.agrees_with(b, a.trunc().min(b.trunc())) {
            return Err(format!("coefficient {n} differs"));
        }
    }
    let t = prod.certified_order();
    if !prod.recompose().agrees_with(&(f * g), t) {
        return Err(format!("recomposed product differs below degree {t}"));
    }
    Ok(())
}

/// A nonzero exponent of degree at most `trunc`, entries at most 2.
pub fn random_exponent<R: Rng>(rng: &mut R, d: usize, trunc: u32) -> MultiIndex {
    loop {
        let e: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=2)).collect();
        let deg: u32 = e.iter().sum();
        if deg > 0 && deg <= trunc {
            return MultiIndex::new(&e);
        }
    }
}
