//! Degree-by-degree brute-force solver, used as an independent oracle.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Coeff;
use crate::series::{MultiIndex, SeriesVector, TruncatedSeries};

use super::{apply_operator, residual, PdeProblem};

/// Solve `P L(y) = F(x, y)` one homogeneous degree at a time.
///
/// At degree `m` the unknown homogeneous part `y_m` satisfies
/// `[P L(y_m)]_m − μ y_m = −[P L(y_{<m}) − F(x, y_{<m})]_m`, an exact linear
/// system over the coefficient field. A singular system is reported with
/// its degree.
pub fn solve_direct<T: Coeff>(problem: &PdeProblem<T>) -> Result<SeriesVector<T>> {
    let trunc = problem.trunc();
    let size = problem.size();
    let dim = problem.dim();
    let mu = problem.rhs().mu();
    let mut y = vec![TruncatedSeries::zero(dim, trunc); size];
    for m in 1..=trunc {
        let res = residual(problem, &y)?;
        let monos = MultiIndex::of_degree(dim, m);
        let pos = |beta: &MultiIndex| monos.binary_search(beta).expect("degree-m index");
        let count = monos.len();
        let unknowns = size * count;
        let mut mat = Matrix::zeros(unknowns, unknowns);
        for (b, beta) in monos.iter().enumerate() {
            let mono = TruncatedSeries::monomial(dim, m, beta.clone(), T::one());
            let l_mono = apply_operator(problem.operator(), std::slice::from_ref(&mono))?.remove(0);
            let pl = problem.p().mul_to(&l_mono, m);
            let pl_m: Vec<(usize, T)> = pl
                .terms()
                .filter(|(g, _)| g.degree() == m)
                .map(|(g, v)| (pos(g), v.clone()))
                .collect();
            for l in 0..size {
                let col = l * count + b;
                for (g, v) in &pl_m {
                    mat[(l * count + g, col)] += v;
                }
                for i in 0..size {
                    let v = mu[(i, l)].clone();
                    if !v.is_zero() {
                        mat[(i * count + b, col)] -= v;
                    }
                }
            }
        }
        let mut rhs = vec![T::zero(); unknowns];
        for (i, r) in res.iter().enumerate() {
            for (g, v) in r.terms().filter(|(g, _)| g.degree() == m) {
                rhs[i * count + pos(g)] = -v.clone();
            }
        }
        let sol = mat
            .solve(&rhs)
            .map_err(|_| Error::SingularDegree { degree: m })?;
        for (l, yl) in y.iter_mut().enumerate() {
            let part = TruncatedSeries::from_terms(
                dim,
                trunc,
                monos
                    .iter()
                    .enumerate()
                    .map(|(b, beta)| (beta.clone(), sol[l * count + b].clone())),
            );
            *yl = &*yl + &part;
        }
    }
    Ok(y)
}
