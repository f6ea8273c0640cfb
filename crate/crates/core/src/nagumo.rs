//! Nagumo norms on polydiscs, evaluated on sample grids, and the majorant
//! sequence that dominates the weighted norms of the `P`-adic coefficients.
//!
//! Sups are approximated by maxima over finite grids, so every norm here is a
//! lower bound of the true value.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::division::{shift, WeierstrassDivisor};
use crate::error::{Error, Result};
use crate::linalg::SeriesMatrix;
use crate::scalar::{rational_to_f64, Coeff, Rational};
use crate::series::{SeriesVector, TruncatedSeries};
use crate::solver::{shift_system, PdeProblem, SolverReport};

/// `d_r(x) = r − |x|` for `|x| ≥ r/2`, and `r/2` inside the inner disc.
pub fn d_weight(x_abs: f64, r: f64) -> Result<f64> {
    if !(0.0..r).contains(&x_abs) {
        return Err(Error::InvalidInput(format!("|x| = {x_abs} outside [0, {r})")));
    }
    Ok(if x_abs >= r / 2.0 { r - x_abs } else { r / 2.0 })
}

/// Polyradius `r = (r_1, …, r_d)`; the inner radius is `r_j/2` on every axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyRadius(Vec<f64>);

impl PolyRadius {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("radii must be positive and finite".into()));
        }
        Ok(PolyRadius(r))
    }

    pub fn uniform(d: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.0
    }

    pub fn rho(&self, j: usize) -> f64 {
        self.0[j] / 2.0
    }
}

/// Sampling of the polydisc: `radial + 1` moduli `r·i/radial` (boundary
/// included) times `angular` arguments per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NagumoConfig {
    pub radial: usize,
    pub angular: usize,
}

impl NagumoConfig {
    pub const MIN_SAMPLES: usize = 8;

    pub fn new(radial: usize, angular: usize) -> Result<Self> {
        if radial < Self::MIN_SAMPLES || angular < Self::MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "sample counts must be at least {}",
                Self::MIN_SAMPLES
            )));
        }
        Ok(NagumoConfig { radial, angular })
    }

    /// A grid containing every point of `self`.
    pub fn refined(&self, factor: usize) -> Self {
        NagumoConfig {
            radial: self.radial * factor.max(1),
            angular: self.angular * factor.max(1),
        }
    }
}

impl Default for NagumoConfig {
    fn default() -> Self {
        NagumoConfig {
            radial: 12,
            angular: 12,
        }
    }
}

/// One axis of the grid: `(point, d_r(|point|))`.
fn axis_samples(r: f64, cfg: &NagumoConfig) -> Vec<(Complex<f64>, f64)> {
    let mut out = Vec::with_capacity((cfg.radial + 1) * cfg.angular);
    for i in 0..=cfg.radial {
        let t = r * i as f64 / cfg.radial as f64;
        // the boundary is approached from inside; d_r vanishes there
        let w = if i == cfg.radial { 0.0 } else { d_weight(t, r).expect("inside") };
        let angles = if i == 0 { 1 } else { cfg.angular };
        for a in 0..angles {
            let theta = std::f64::consts::TAU * a as f64 / cfg.angular as f64;
            out.push((Complex::from_polar(t, theta), w));
        }
    }
    out
}

fn weight_pow(w: f64, m: u32) -> f64 {
    if m == 0 {
        1.0
    } else {
        w.powi(m as i32)
    }
}

/// Grid estimate of `‖f‖_m = sup |f(x)| Π d_{r_j}(x_j)^m`, reading `f` as the
/// polynomial of its stored terms.
pub fn nagumo_norm<T: Coeff>(
    f: &TruncatedSeries<T>,
    m: u32,
    pr: &PolyRadius,
    cfg: &NagumoConfig,
) -> Result<f64> {
    let d = f.dim();
    if pr.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: pr.dim(),
        });
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let terms: Vec<(Vec<u32>, Complex<f64>)> = f
        .terms()
        .map(|(k, c)| (k.as_slice().to_vec(), c.to_complex()))
        .collect();
    let axes: Vec<Vec<(Complex<f64>, f64)>> =
        pr.radii().iter().map(|&r| axis_samples(r, cfg)).collect();
    let max_exp: Vec<u32> = (0..d)
        .map(|j| terms.iter().map(|(e, _)| e[j]).max().unwrap_or(0))
        .collect();
    // powers[j][s][e] = (sample s on axis j)^e
    let powers: Vec<Vec<Vec<Complex<f64>>>> = axes
        .iter()
        .enumerate()
        .map(|(j, samples)| {
            samples
                .iter()
                .map(|(z, _)| {
                    let mut v = Vec::with_capacity(max_exp[j] as usize + 1);
                    let mut p = Complex::new(1.0, 0.0);
                    for _ in 0..=max_exp[j] {
                        v.push(p);
                        p *= z;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let counts: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = counts.iter().product();
    let best = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = flat;
            let mut weight = 1.0;
            let mut slots = vec![0usize; d];
            for j in 0..d {
                slots[j] = idx % counts[j];
                idx /= counts[j];
                weight *= weight_pow(axes[j][slots[j]].1, m);
            }
            if weight == 0.0 {
                return 0.0;
            }
            let mut value = Complex::new(0.0, 0.0);
            for (e, c) in &terms {
                let mut t = *c;
                for j in 0..d {
                    t *= powers[j][slots[j]][e[j] as usize];
                }
                value += t;
            }
            value.norm() * weight
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `max_i ‖y_i‖_m`.
pub fn vector_norm<T: Coeff>(
    y: &[TruncatedSeries<T>],
    m: u32,
    pr: &PolyRadius,
    cfg: &NagumoConfig,
) -> Result<f64> {
    y.iter()
        .map(|s| nagumo_norm(s, m, pr, cfg))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

/// `max_i Σ_j ‖A_{ij}‖_m`.
pub fn matrix_norm<T: Coeff>(
    a: &SeriesMatrix<T>,
    m: u32,
    pr: &PolyRadius,
    cfg: &NagumoConfig,
) -> Result<f64> {
    let n = a.size();
    let mut best: f64 = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += nagumo_norm(a.get(i, j), m, pr, cfg)?;
        }
        best = best.max(row);
    }
    Ok(best)
}

/// Multiplicative tolerance for the grid inequality checks.
pub const SLACK: f64 = 1.05;

/// One inequality `lhs ≤ SLACK · rhs`, with the left side on the coarse grid
/// and the right side on the fine one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `SLACK · rhs − lhs`.
    pub margin: f64,
    pub pass: bool,
}

impl InequalityCheck {
    fn new(name: String, lhs: f64, rhs: f64) -> Self {
        let margin = SLACK * rhs - lhs;
        InequalityCheck {
            name,
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormInequalityReport {
    pub checks: Vec<InequalityCheck>,
}

impl NormInequalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Relabel the truncation so that products and derivatives of the stored
/// polynomial are computed without loss.
fn as_poly<T: Coeff>(f: &TruncatedSeries<T>, room: u32) -> TruncatedSeries<T> {
    let top = f.terms().map(|(k, _)| k.degree()).max().unwrap_or(0);
    f.clone().as_polynomial(top + room)
}

/// Grid check of the product, derivative and shift inequalities for `f`, `g`.
pub fn check_norm_inequalities<T: Coeff>(
    f: &TruncatedSeries<T>,
    g: &TruncatedSeries<T>,
    m: u32,
    k: u32,
    pr: &PolyRadius,
    cfg: &NagumoConfig,
) -> Result<NormInequalityReport> {
    const E: f64 = std::f64::consts::E;
    let fine = cfg.refined(2);
    let d = f.dim();
    let fp = as_poly(f, 1);
    let top = fp.trunc() + as_poly(g, 1).trunc();
    let fg = fp.clone().as_polynomial(top).checked_mul(&g.clone().as_polynomial(top))?;
    let mut checks = vec![InequalityCheck::new(
        format!("product m={m} k={k}"),
        nagumo_norm(&fg, m + k, pr, cfg)?,
        nagumo_norm(f, m, pr, &fine)? * nagumo_norm(g, k, pr, &fine)?,
    )];
    let f_m = nagumo_norm(f, m, pr, &fine)?;
    for j in 0..d {
        let others: f64 = (0..d).filter(|&i| i != j).map(|i| pr.rho(i)).product();
        let df = fp.partial(j)?;
        checks.push(InequalityCheck::new(
            format!("derivative axis {}", j + 1),
            nagumo_norm(&df, m + 1, pr, cfg)?,
            E * (m + 1) as f64 * others * f_m,
        ));
        let sf = shift(&fp, j)?;
        checks.push(InequalityCheck::new(
            format!("shift axis {}", j + 1),
            nagumo_norm(&sf, m, pr, cfg)?,
            4.0 / pr.radii()[j] * f_m,
        ));
    }
    Ok(NormInequalityReport { checks })
}

/// Rational upper bound for `e`, used where the recurrence needs `e`.
pub fn e_upper() -> Rational {
    Rational::new(2719.into(), 1000.into())
}

/// Scalar constants of the majorant recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantConstants {
    /// `M = ‖(μ + A_0)^{−1}‖_0`.
    pub m: Rational,
    pub r_norm: Rational,
    pub q_norm: Rational,
    /// `a = Σ_j ‖a_j‖_0`.
    pub a: Rational,
    pub h0: Rational,
}

/// Norm tables feeding the recurrence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MajorantTables {
    /// Entry `n` is `‖c_n‖_n` (entry 0 is ignored).
    pub c: Vec<Rational>,
    /// Entry `n` is `‖A_n‖_n`.
    pub a: Vec<Rational>,
    /// `(p, m) ↦ Σ_{|I| = p} ‖A_{I,m}‖_m` for `p ≥ 2`.
    pub f: BTreeMap<(u32, u32), Rational>,
}

fn table(v: &[Rational], i: usize) -> Rational {
    v.get(i).cloned().unwrap_or_else(Rational::zero)
}

/// `z_1, …, z_{n_max}` from the recurrence
///
/// `z_n/(M‖R‖) = ‖c_n‖_n/n! + ‖R‖(e a + ‖h‖_0) Σ_{k=2}^n q_{n−k} z_{k−1}
///   + ‖R‖ Σ_{k=1}^{n−1} q_{n−k} Σ_{j=1}^k Ā_{k−j} z_j + ‖R‖ Σ_{j=1}^{n−1} Ā_{n−j} z_j
///   + ‖R‖ Σ_{k=2}^n q_{n−k} Σ_{p,m} F̄_{p,m} [τ^{k−m}] Z(τ)^p`
///
/// with `q_i = ‖Q‖^i/i!`, `Ā_i = ‖A_i‖_i/i!`, `F̄_{p,m} = F_{p,m}/m!`, evaluated
/// exactly, with `e` replaced by [`e_upper`].
pub fn majorant_sequence(
    consts: &MajorantConstants,
    tables: &MajorantTables,
    n_max: usize,
) -> Result<Vec<Rational>> {
    let nonneg = [&consts.m, &consts.r_norm, &consts.q_norm, &consts.a, &consts.h0];
    let tables_nonneg = tables.c.iter().chain(&tables.a).chain(tables.f.values());
    if nonneg.into_iter().chain(tables_nonneg).any(|x| x < &Rational::zero()) {
        return Err(Error::InvalidInput("majorant inputs must be non-negative".into()));
    }
    if tables.f.keys().any(|&(p, _)| p < 2) {
        return Err(Error::InvalidInput("nonlinear table needs |I| ≥ 2".into()));
    }
    let mut fact = vec![Rational::one()];
    for i in 1..=n_max {
        let next = &fact[i - 1] * Rational::from_integer(i.into());
        fact.push(next);
    }
    let mut q = vec![Rational::one()];
    for i in 1..=n_max {
        let next = &q[i - 1] * &consts.q_norm / Rational::from_integer(i.into());
        q.push(next);
    }
    let a_bar: Vec<Rational> = (0..=n_max).map(|i| table(&tables.a, i) / &fact[i]).collect();
    let r = &consts.r_norm;
    let lin = r * (e_upper() * &consts.a + &consts.h0);
    let mr = &consts.m * r;

    // z[0] is a zero placeholder so that z[n] = z_n
    let mut z = vec![Rational::zero()];
    // powers[p][s] = [τ^s] Z^p over the known z
    for n in 1..=n_max {
        let mut s = table(&tables.c, n) / &fact[n];
        for k in 2..=n {
            s += &lin * &q[n - k] * &z[k - 1];
        }
        for k in 1..n {
            let inner: Rational = (1..=k).map(|j| &a_bar[k - j] * &z[j]).sum();
            s += r * &q[n - k] * inner;
        }
        for j in 1..n {
            s += r * &a_bar[n - j] * &z[j];
        }
        if !tables.f.is_empty() {
            for k in 2..=n {
                let mut inner = Rational::zero();
                for (&(p, m), val) in &tables.f {
                    if p as usize + m as usize > k || val.is_zero() {
                        continue;
                    }
                    let coeff = composition_sum(&z, p as usize, k - m as usize);
                    inner += val / &fact[m as usize] * coeff;
                }
                s += r * &q[n - k] * inner;
            }
        }
        z.push(&mr * s);
    }
    z.remove(0);
    Ok(z)
}

/// `[τ^s] (Σ_{i ≥ 1} z_i τ^i)^p`, which only involves `z_1, …, z_{s−p+1}`.
fn composition_sum(z: &[Rational], p: usize, s: usize) -> Rational {
    if s < p {
        return Rational::zero();
    }
    // poly[i] = [τ^i] Z^j, built for j = 1..p
    let top = s;
    let base: Vec<Rational> = (0..=top)
        .map(|i| if i >= 1 && i < z.len() { z[i].clone() } else { Rational::zero() })
        .collect();
    let mut poly = base.clone();
    for _ in 1..p {
        let mut next = vec![Rational::zero(); top + 1];
        for (i, a) in poly.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().enumerate().take(top + 1 - i) {
                if !b.is_zero() {
                    next[i + j] += a * b;
                }
            }
        }
        poly = next;
    }
    poly[s].clone()
}

/// One row of the dominance diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRow {
    pub n: usize,
    /// `‖y_n‖_n / n!` on the grid.
    pub lhs: f64,
    pub z: f64,
    /// `SLACK · z − lhs`.
    pub margin: f64,
    pub dominated: bool,
}

/// Measured inputs and the resulting comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub constants: MajorantConstants,
    pub tables: MajorantTables,
    pub rows: Vec<DominanceRow>,
}

fn to_rational_upper(x: f64) -> Rational {
    // rounds up at 1e−9 relative precision; inputs are already grid estimates
    let scaled = (x * 1e9).ceil();
    if !scaled.is_finite() || scaled <= 0.0 {
        return Rational::zero();
    }
    Rational::new((scaled as i128).into(), 1_000_000_000i64.into())
}

/// `P`-adic coefficients of `f`, as many as its truncation supports (at most `want + 1`).
fn available_coeffs<T: Coeff>(
    div: &WeierstrassDivisor<T>,
    f: &TruncatedSeries<T>,
    want: usize,
) -> Vec<TruncatedSeries<T>> {
    let mut out = Vec::new();
    let mut cur = f.clone();
    for _ in 0..=want {
        let Ok(r) = div.remainder(&cur) else { break };
        out.push(r);
        match div.quotient(&cur) {
            Ok(q) => cur = q,
            Err(_) => break,
        }
    }
    out
}

/// Compare `‖y_n‖_n/n!` with the majorant `z_n` built from constants measured
/// on the same polydisc. `‖R‖` and `‖Q‖` are not computable and must be
/// supplied. The result is a diagnostic: the recurrence assumes radii small
/// enough for estimates that a grid cannot certify.
pub fn dominance_check<T: Coeff>(
    problem: &PdeProblem<T>,
    report: &SolverReport<T>,
    pr: &PolyRadius,
    cfg: &NagumoConfig,
    r_norm: &Rational,
    q_norm: &Rational,
    n_max: usize,
) -> Result<DominanceReport> {
    let div = problem.divisor()?;
    let y0: SeriesVector<T> = report.decomposition.iter().map(|d| d.coeffs()[0].clone()).collect();
    let sys = shift_system(problem, &y0)?;
    let size = problem.size();
    let dim = problem.dim();

    // coefficient-0 part of Ã
    let a0 = sys.a.map(|s| div.remainder(s).unwrap_or_else(|_| TruncatedSeries::zero(dim, 0)));
    let base = SeriesMatrix::from_constant(&sys.mu, dim, a0.get(0, 0).trunc()).add(&a0);
    let m_const = matrix_norm(&base.inverse()?, 0, pr, cfg)?;
    let a_const: f64 = problem
        .operator()
        .iter()
        .map(|s| nagumo_norm(s, 0, pr, cfg))
        .sum::<Result<f64>>()?;
    let h0 = match &report.h {
        Some(h) => nagumo_norm(h, 0, pr, cfg)?,
        None => 0.0,
    };

    let c_coeffs: Vec<Vec<TruncatedSeries<T>>> =
        sys.c.iter().map(|s| available_coeffs(&div, s, n_max)).collect();
    let mut c_tab = vec![Rational::zero(); n_max + 1];
    for (n, slot) in c_tab.iter_mut().enumerate().skip(1) {
        let comps: Vec<TruncatedSeries<T>> =
            c_coeffs.iter().filter_map(|v| v.get(n).cloned()).collect();
        *slot = to_rational_upper(vector_norm(&comps, n as u32, pr, cfg)?);
    }

    let a_coeffs: Vec<Vec<TruncatedSeries<T>>> =
        sys.a.entries().iter().map(|s| available_coeffs(&div, s, n_max)).collect();
    let mut a_tab = vec![Rational::zero(); n_max + 1];
    for (n, slot) in a_tab.iter_mut().enumerate() {
        let mut best: f64 = 0.0;
        for i in 0..size {
            let mut row = 0.0;
            for j in 0..size {
                if let Some(s) = a_coeffs[i * size + j].get(n) {
                    row += nagumo_norm(s, n as u32, pr, cfg)?;
                }
            }
            best = best.max(row);
        }
        *slot = to_rational_upper(best);
    }

    let mut f_tab = BTreeMap::new();
    for (index, coeffs) in sys.nonlinear.terms() {
        let p = index.degree();
        let per_comp: Vec<Vec<TruncatedSeries<T>>> =
            coeffs.iter().map(|s| available_coeffs(&div, s, n_max)).collect();
        for m in 0..=n_max {
            let comps: Vec<TruncatedSeries<T>> =
                per_comp.iter().filter_map(|v| v.get(m).cloned()).collect();
            let v = to_rational_upper(vector_norm(&comps, m as u32, pr, cfg)?);
            *f_tab.entry((p, m as u32)).or_insert_with(Rational::zero) += v;
        }
    }

    let constants = MajorantConstants {
        m: to_rational_upper(m_const),
        r_norm: r_norm.clone(),
        q_norm: q_norm.clone(),
        a: to_rational_upper(a_const),
        h0: to_rational_upper(h0),
    };
    let tables = MajorantTables {
        c: c_tab,
        a: a_tab,
        f: f_tab,
    };
    let z = majorant_sequence(&constants, &tables, n_max)?;
    let mut rows = Vec::new();
    let mut fact = 1.0f64;
    for n in 1..=n_max {
        fact *= n as f64;
        let comps: Vec<TruncatedSeries<T>> = report
            .decomposition
            .iter()
            .filter_map(|d| d.coeffs().get(n).cloned())
            .collect();
        if comps.is_empty() {
            break;
        }
        let lhs = vector_norm(&comps, n as u32, pr, cfg)? / fact;
        let zn = rational_to_f64(&z[n - 1]);
        let margin = SLACK * zn - lhs;
        rows.push(DominanceRow {
            n,
            lhs,
            z: zn,
            margin,
            dominated: margin >= 0.0,
        });
    }
    Ok(DominanceReport {
        constants,
        tables,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    type S = TruncatedSeries<Rational>;

    #[test]
    fn weight_examples() {
        assert_eq!(d_weight(0.0, 1.0).unwrap(), 0.5);
        assert_eq!(d_weight(0.75, 1.0).unwrap(), 0.25);
        assert!(d_weight(1.0, 1.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let cfg = NagumoConfig::default();
        let pr2 = PolyRadius::uniform(2, 1.0).unwrap();
        let one = S::one(2, 4);
        assert!((nagumo_norm(&one, 2, &pr2, &cfg).unwrap() - 0.5f64.powi(4)).abs() < 1e-12);
        let pr = PolyRadius::uniform(1, 1.0).unwrap();
        let x = S::variable(1, 4, 0);
        let coarse = nagumo_norm(&x, 0, &pr, &cfg).unwrap();
        assert!((coarse - 1.0).abs() < 1e-12);
        let n1 = nagumo_norm(&x, 1, &pr, &cfg.refined(4)).unwrap();
        assert!((n1 - 0.25).abs() < 1e-12, "{n1}");
    }

    #[test]
    fn majorant_regression() {
        let consts = MajorantConstants {
            m: rat(1, 1),
            r_norm: rat(1, 1),
            q_norm: rat(1, 1),
            a: rat(0, 1),
            h0: rat(1, 1),
        };
        let tables = MajorantTables {
            c: vec![rat(0, 1), rat(1, 1)],
            ..Default::default()
        };
        let z = majorant_sequence(&consts, &tables, 4).unwrap();
        assert_eq!(z, vec![rat(1, 1), rat(1, 1), rat(2, 1), rat(7, 2)]);
    }

    #[test]
    fn composition_sums() {
        let z = vec![rat(0, 1), rat(1, 1), rat(2, 1), rat(3, 1)];
        // (τ + 2τ² + 3τ³)²: τ^4 coefficient 2·3 + 2·2 = 10
        assert_eq!(composition_sum(&z, 2, 4), rat(10, 1));
        assert_eq!(composition_sum(&z, 3, 3), rat(1, 1));
        assert_eq!(composition_sum(&z, 3, 2), rat(0, 1));
    }
}
