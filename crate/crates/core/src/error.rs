use crate::prelude::*;

use crate::degree::DegreeResult;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix singular at {location}: {what}")]
    Singular { what: String, location: Location },

    #[error("not normal with respect to the conormal at {0}")]
    NotNormal(Location),

    #[error("root on real axis (|Im ν| = {min_abs_im:.3e}): not properly elliptic (or degenerate sample) at {location}")]
    RootOnAxis { min_abs_im: f64, location: Location },

    #[error("proper ellipticity violated at {location}: stable dimension {found}, expected {expected}")]
    StableDimension { found: usize, expected: usize, location: Location },

    #[error("Shapiro-Lopatinskij condition violated at {location} (condition number {condition:.3e})")]
    ShapiroLopatinskij { condition: f64, location: Location },

    #[error("hypothesis H3 violated: interior symbol varies with λ on the collar at {location} (deviation {deviation:.3e})")]
    CollarDependence { deviation: f64, location: Location },

    #[error("non-finite integrand at chart point {0:?}")]
    NonFinite(Vec<f64>),

    #[error("quadrature not supported: {0}")]
    Quadrature(String),

    #[error("inconclusive: increase budget (raw = {re:.6} + {im:.3e}i, residual {residual:.3e})", re = .0.raw.re, im = .0.raw.im, residual = .0.residual)]
    Inconclusive(Box<DegreeResult>),

    #[error("map value is not unitary at {location} (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64, location: Location },

    #[error("Brouwer degree {degree} of the first column is not divisible by {divisor}")]
    NotDivisible { degree: i64, divisor: i64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("q = {0} is not admissible: the divisibility criterion needs q ≡ 0 or 4 mod 8 and q ≥ 4")]
    InadmissibleQ(u64),
}

/// A sample point named in diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub lambda: Option<Vec<f64>>,
    pub at_infinity: bool,
    pub point: Vec<f64>,
    pub covector: Vec<f64>,
}

impl Location {
    pub fn new(lambda: &crate::symbol::Param, point: &[f64], covector: &[f64]) -> Self {
        let (lambda, at_infinity) = match lambda {
            crate::symbol::Param::Finite(v) => (Some(v.clone()), false),
            crate::symbol::Param::Infinity => (None, true),
        };
        Location { lambda, at_infinity, point: point.to_vec(), covector: covector.to_vec() }
    }

    pub fn chart(u: &[f64]) -> Self {
        Location { lambda: None, at_infinity: false, point: u.to_vec(), covector: Vec::new() }
    }
}

impl core::fmt::Display for Location {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.at_infinity {
            write!(f, "(λ=∞")?;
        } else if let Some(l) = &self.lambda {
            write!(f, "(λ={:?}", l)?;
        } else {
            write!(f, "(")?;
        }
        write!(f, ", x={:?}", self.point)?;
        if !self.covector.is_empty() {
            write!(f, ", ξ={:?}", self.covector)?;
        }
        write!(f, ")")
    }
}
