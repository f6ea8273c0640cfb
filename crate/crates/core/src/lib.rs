pub mod corpus;
pub mod division;
pub mod error;
pub mod gevrey;
pub mod input;
pub mod linalg;
pub mod nagumo;
pub mod solver;
pub mod scalar;
pub mod series;
pub mod text;

pub use error::{Error, Result};
pub use scalar::{Coeff, Rational};
pub use series::{MultiIndex, Order, SeriesVector, TruncatedSeries};

/// Series with rational coefficients.
pub type Series = TruncatedSeries<Rational>;
