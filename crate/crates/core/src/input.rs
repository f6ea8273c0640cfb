//! TOML problem and series files.
//!
//! ```toml
//! dim = 1
//! variables = ["x"]
//! trunc = 30
//! P = "x"
//! a = ["x"]
//!
//! [rhs]
//! c = ["x"]
//! mu = [[-1]]
//!
//! [options]
//! branch = "auto"
//! ```

use serde::Deserialize;

use crate::division::LinearForm;
use crate::error::{Error, Result};
use crate::gevrey::NormProxy;
use crate::linalg::{Matrix, SeriesMatrix};
use crate::scalar::{parse_rational, Rational};
use crate::series::{MultiIndex, TruncatedSeries};
use crate::solver::{BranchChoice, NonlinearTerm, PdeProblem, RightHandSide};
use crate::text::{default_names, parse_series};

type S = TruncatedSeries<Rational>;

/// A rational written either as an integer or as a string such as `"-3/2"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn value(&self) -> Result<Rational> {
        match self {
            RationalText::Int(n) => Ok(Rational::from_integer((*n).into())),
            RationalText::Text(t) => parse_rational(t)
                .ok_or_else(|| Error::InvalidInput(format!("`{t}` is not a rational number"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// `auto`, `divergent` or `convergent`.
    pub branch: Option<String>,
    pub padic_terms: Option<usize>,
    /// Radius of the coefficient-sum norm proxy.
    pub radius: Option<RationalText>,
    /// `sum` or `max`.
    pub proxy: Option<String>,
    /// Polyradius for Nagumo norms.
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearFile {
    #[serde(rename = "I")]
    pub index: Vec<u32>,
    pub coeffs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsFile {
    pub c: Vec<String>,
    pub mu: Vec<Vec<RationalText>>,
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub nonlinear: Vec<NonlinearFile>,
}

/// `P(x) L(y) = F(x, y)` as written in a problem file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    pub size: Option<usize>,
    pub variables: Option<Vec<String>>,
    pub ell: Option<Vec<RationalText>>,
    pub trunc: u32,
    #[serde(rename = "P")]
    pub p: String,
    pub a: Vec<String>,
    pub rhs: RhsFile,
    #[serde(default)]
    pub options: Options,
}

/// Series data for `decompose`, `divide`, `gevrey` and `nagumo-check`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesFile {
    pub dim: Option<usize>,
    pub variables: Option<Vec<String>>,
    pub ell: Option<Vec<RationalText>>,
    pub trunc: u32,
    pub f: String,
    #[serde(rename = "P")]
    pub p: Option<String>,
    pub g: Option<String>,
    pub m: Option<u32>,
    pub k: Option<u32>,
    #[serde(default)]
    pub options: Options,
}

fn toml_error(source: &str, e: toml::de::Error) -> Error {
    let (line, column) = match e.span() {
        Some(span) => offset_position(source, span.start),
        None => (1, 1),
    };
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

fn offset_position(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parse an expression that appears in `source`, reporting errors at file
/// positions when the expression can be located there.
struct Context<'a> {
    source: &'a str,
    names: Vec<String>,
    trunc: u32,
}

impl Context<'_> {
    fn series(&self, field: &str, text: &str) -> Result<S> {
        parse_series(text, &self.names, self.trunc).map_err(|e| match e {
            Error::Parse {
                line,
                column,
                message,
            } => {
                let (line, column) = match self.source.find(&format!("\"{text}\"")) {
                    Some(off) if line == 1 && !text.contains('\n') => {
                        let (l, c) = offset_position(self.source, off + 1);
                        (l, c + column - 1)
                    }
                    _ => (line, column),
                };
                Error::Parse {
                    line,
                    column,
                    message: format!("in `{field}`: {message}"),
                }
            }
            other => other,
        })
    }
}

fn names_for(dim: usize, variables: &Option<Vec<String>>) -> Result<Vec<String>> {
    match variables {
        Some(v) if v.len() != dim => Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        }),
        Some(v) => Ok(v.clone()),
        None => Ok(default_names(dim)),
    }
}

fn linear_form(dim: usize, ell: &Option<Vec<RationalText>>) -> Result<LinearForm> {
    match ell {
        None => Ok(LinearForm::uniform(dim)),
        Some(w) if w.len() != dim => Err(Error::DimensionMismatch {
            expected: dim,
            found: w.len(),
        }),
        Some(w) => LinearForm::new(w.iter().map(RationalText::value).collect::<Result<_>>()?),
    }
}

impl Options {
    pub fn branch(&self) -> Result<BranchChoice> {
        parse_branch(self.branch.as_deref().unwrap_or("auto"))
    }

    pub fn proxy(&self) -> Result<NormProxy> {
        parse_proxy(self.proxy.as_deref().unwrap_or("sum"))
    }

    /// Norm-proxy radius; `1/2` when absent.
    pub fn radius(&self) -> Result<Rational> {
        match &self.radius {
            Some(r) => positive(r.value()?),
            None => Ok(Rational::new(1.into(), 2.into())),
        }
    }
}

fn positive(r: Rational) -> Result<Rational> {
    if r > Rational::from_integer(0.into()) {
        Ok(r)
    } else {
        Err(Error::InvalidInput("radius must be positive".into()))
    }
}

pub fn parse_branch(text: &str) -> Result<BranchChoice> {
    match text {
        "auto" => Ok(BranchChoice::Auto),
        "divergent" => Ok(BranchChoice::Divergent),
        "convergent" => Ok(BranchChoice::Convergent),
        other => Err(Error::InvalidInput(format!("unknown branch `{other}`"))),
    }
}

pub fn parse_proxy(text: &str) -> Result<NormProxy> {
    match text {
        "sum" => Ok(NormProxy::CoeffSum),
        "max" => Ok(NormProxy::MaxAbs),
        other => Err(Error::InvalidInput(format!("unknown proxy `{other}`"))),
    }
}

pub fn parse_radius(text: &str) -> Result<Rational> {
    positive(
        parse_rational(text)
            .ok_or_else(|| Error::InvalidInput(format!("`{text}` is not a rational number")))?,
    )
}

impl ProblemFile {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| toml_error(source, e))
    }

    pub fn names(&self) -> Result<Vec<String>> {
        names_for(self.dim, &self.variables)
    }

    /// Build the problem, optionally overriding the truncation order.
    pub fn build(&self, source: &str, trunc: Option<u32>) -> Result<PdeProblem<Rational>> {
        let trunc = trunc.unwrap_or(self.trunc);
        let d = self.dim;
        let n = self.size.unwrap_or(self.rhs.c.len());
        let ctx = Context {
            source,
            names: self.names()?,
            trunc,
        };
        if self.a.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.a.len(),
            });
        }
        if self.rhs.c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.rhs.c.len(),
            });
        }
        let p = ctx.series("P", &self.p)?;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(j, t)| ctx.series(&format!("a[{j}]"), t))
            .collect::<Result<Vec<_>>>()?;
        let c = self
            .rhs
            .c
            .iter()
            .enumerate()
            .map(|(i, t)| ctx.series(&format!("rhs.c[{i}]"), t))
            .collect::<Result<Vec<_>>>()?;
        let mu_rows = self
            .rhs
            .mu
            .iter()
            .map(|row| row.iter().map(RationalText::value).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mu = Matrix::from_rows(mu_rows)?;
        let a_mat = match &self.rhs.a {
            Some(rows) => {
                let rows = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, t)| ctx.series(&format!("rhs.A[{i}][{j}]"), t))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(SeriesMatrix::from_rows(rows)?)
            }
            None => None,
        };
        let nonlinear = self
            .rhs
            .nonlinear
            .iter()
            .enumerate()
            .map(|(t, nl)| {
                let coeffs = nl
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ctx.series(&format!("rhs.nonlinear[{t}].coeffs[{i}]"), s))
                    .collect::<Result<Vec<_>>>()?;
                Ok(NonlinearTerm {
                    index: MultiIndex::new(&nl.index),
                    coeffs,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rhs = RightHandSide::new(c, mu, a_mat, nonlinear)?;
        PdeProblem::new(p, a, rhs, linear_form(d, &self.ell)?, trunc)
    }
}

/// Parsed contents of a [`SeriesFile`].
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesInput {
    pub names: Vec<String>,
    pub ell: LinearForm,
    pub f: S,
    pub p: Option<S>,
    pub g: Option<S>,
}

impl SeriesFile {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| toml_error(source, e))
    }

    pub fn dim(&self) -> Result<usize> {
        match (self.dim, &self.variables) {
            (Some(d), _) => Ok(d),
            (None, Some(v)) => Ok(v.len()),
            (None, None) => Err(Error::InvalidInput("give `dim` or `variables`".into())),
        }
    }

    pub fn build(&self, source: &str, trunc: Option<u32>) -> Result<SeriesInput> {
        let d = self.dim()?;
        let ctx = Context {
            source,
            names: names_for(d, &self.variables)?,
            trunc: trunc.unwrap_or(self.trunc),
        };
        Ok(SeriesInput {
            ell: linear_form(d, &self.ell)?,
            f: ctx.series("f", &self.f)?,
            p: self.p.as_ref().map(|t| ctx.series("P", t)).transpose()?,
            g: self.g.as_ref().map(|t| ctx.series("g", t)).transpose()?,
            names: ctx.names,
        })
    }
}

/// `true` when the document has a `[rhs]` table (a problem rather than series data).
pub fn is_problem_file(source: &str) -> bool {
    source
        .parse::<toml::Table>()
        .map(|t| t.contains_key("rhs"))
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_padic;

    const EULER: &str = r#"
dim = 1
variables = ["x"]
trunc = 12
P = "x"
a = ["x"]

[rhs]
c = ["x"]
mu = [[-1]]
"#;

    #[test]
    fn euler_file() {
        let pf = ProblemFile::from_toml(EULER).unwrap();
        let problem = pf.build(EULER, None).unwrap();
        let report = solve_padic(&problem, None).unwrap();
        assert_eq!(report.plain[0].coeff_of(&[4]), Rational::from_integer((-6).into()));
        assert_eq!(pf.build(EULER, Some(5)).unwrap().trunc(), 5);
    }

    #[test]
    fn expression_errors_point_into_the_file() {
        let bad = EULER.replace("c = [\"x\"]", "c = [\"x + y\"]");
        let pf = ProblemFile::from_toml(&bad).unwrap();
        match pf.build(&bad, None) {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!(line, 9);
                assert_eq!(column, 11);
                assert!(message.contains("rhs.c[0]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toml_errors_are_positioned() {
        let bad = "dim = 1\ntrunc = \nP = \"x\"";
        assert!(matches!(ProblemFile::from_toml(bad), Err(Error::Parse { line: 2, .. })));
        let unknown = format!("{EULER}\n[extra]\nx = 1\n");
        assert!(matches!(ProblemFile::from_toml(&unknown), Err(Error::Parse { .. })));
    }

    #[test]
    fn series_file() {
        let src = "variables = [\"x1\", \"x2\"]\ntrunc = 6\nf = \"1/(1 - x1 x2)\"\nP = \"x1 x2\"\n";
        let sf = SeriesFile::from_toml(src).unwrap();
        let input = sf.build(src, None).unwrap();
        assert_eq!(input.f.len(), 4);
        assert!(!is_problem_file(src));
        assert!(is_problem_file(EULER));
    }
}
