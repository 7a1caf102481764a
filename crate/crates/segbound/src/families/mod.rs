//! Estimation-function families, fitting, and function-level operations.
//!
//! A *family* describes the shape of the per-segment estimation function.
//! Families are grouped by the algebraic structure query guarantees can
//! exploit:
//!
//! - [`FamilyGroup::Lsf`]: closed under least-squares fitting — the fitted
//!   function is the orthogonal projection onto the family span, so the
//!   residual is orthogonal to every member of the span. Polynomials fitted
//!   in an orthonormal basis are the canonical case.
//! - [`FamilyGroup::Vs`]: the family span is a vector space (closed under
//!   addition/scaling) but the fit need not be a projection.
//! - [`FamilyGroup::Any`]: no structure assumed. The 4-parameter Gaussian
//!   bump lives here.
//!
//! Every group includes the stronger ones: Lsf ⊂ Vs ⊂ Any. Guarantee
//! formulas pick the cheapest sound form the group admits.

pub mod basis;
pub(crate) mod gaussian;
pub mod transform;

pub use basis::{build_basis, OrthonormalBasis};
pub use transform::{psi, BasisTransform};

use crate::core::Domain;
use crate::error::{Error, Result};
use transform::restrict_coeffs;

// ---------------------------------------------------------------------------
// Family descriptors
// ---------------------------------------------------------------------------

/// Algebraic structure a family offers to the guarantee machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyGroup {
    /// Least-squares fit: projection onto a vector-space span.
    Lsf,
    /// Vector-space span without the projection property.
    Vs,
    /// No structure assumed.
    Any,
}

impl FamilyGroup {
    /// True when the family span is a vector space (Lsf or Vs).
    pub fn is_vector_space(&self) -> bool {
        matches!(self, FamilyGroup::Lsf | FamilyGroup::Vs)
    }
}

/// A named estimation-function family.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FamilyDescriptor {
    /// Stable identifier used in queries and on disk ("p0", "p1", "p2", "g").
    pub id: &'static str,
    /// Structure group.
    pub group: FamilyGroup,
    /// Number of stored numbers describing one function: basis coefficients
    /// for polynomials, the 4 parameters for the Gaussian bump.
    pub dim: usize,
}

/// Constant functions (degree-0 polynomials).
pub static POLY0: FamilyDescriptor = FamilyDescriptor { id: "p0", group: FamilyGroup::Lsf, dim: 1 };
/// Linear functions (degree-1 polynomials).
pub static POLY1: FamilyDescriptor = FamilyDescriptor { id: "p1", group: FamilyGroup::Lsf, dim: 2 };
/// Quadratic functions (degree-2 polynomials).
pub static POLY2: FamilyDescriptor = FamilyDescriptor { id: "p2", group: FamilyGroup::Lsf, dim: 3 };
/// 4-parameter Gaussian bump `a*exp(-(t-b)^2/(2c^2)) + d`.
pub static GAUSSIAN: FamilyDescriptor =
    FamilyDescriptor { id: "g", group: FamilyGroup::Any, dim: 4 };

/// All built-in families.
pub static FAMILIES: [&FamilyDescriptor; 4] = [&POLY0, &POLY1, &POLY2, &GAUSSIAN];

/// Looks a family up by its identifier.
pub fn family_by_id(id: &str) -> Result<&'static FamilyDescriptor> {
    FAMILIES
        .iter()
        .copied()
        .find(|f| f.id == id)
        .ok_or_else(|| Error::invalid_argument(format!("unknown family '{id}' (use p0, p1, p2, or g)")))
}

impl FamilyDescriptor {
    /// True for the polynomial families.
    pub fn is_polynomial(&self) -> bool {
        !matches!(self.group, FamilyGroup::Any)
    }
}

// ---------------------------------------------------------------------------
// Fitted functions
// ---------------------------------------------------------------------------

/// Concrete representation of one fitted function.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionRepr {
    /// Coefficients in the orthonormal polynomial basis of the function's
    /// domain; length `min(family.dim, domain.len())`.
    Coefficients(Vec<f64>),
    /// `[a, b, c, d]` of the Gaussian bump, `b` in absolute positions.
    GaussianParams([f64; 4]),
}

/// An estimation function bound to a segment domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFunction {
    /// Family the function belongs to.
    pub family: &'static FamilyDescriptor,
    /// Domain the function was fitted on (and is defined on).
    pub domain: Domain,
    /// Parameters.
    pub repr: FunctionRepr,
}

impl FittedFunction {
    /// Builds a function from raw parts, validating the representation
    /// against the family.
    pub fn new(
        family: &'static FamilyDescriptor,
        domain: Domain,
        repr: FunctionRepr,
    ) -> Result<Self> {
        match (&repr, family.is_polynomial()) {
            (FunctionRepr::Coefficients(c), true) => {
                let expected = family.dim.min(domain.len());
                if c.len() != expected {
                    return Err(Error::invalid_argument(format!(
                        "family {} on {} expects {} coefficients, got {}",
                        family.id,
                        domain,
                        expected,
                        c.len()
                    )));
                }
            }
            (FunctionRepr::GaussianParams(_), false) => {}
            _ => {
                return Err(Error::invalid_argument(format!(
                    "representation does not match family {}",
                    family.id
                )))
            }
        }
        Ok(FittedFunction { family, domain, repr })
    }

    /// The all-zero function of `family` on `domain` (useful as an explicit
    /// "no fit" placeholder).
    pub fn zero(family: &'static FamilyDescriptor, domain: Domain) -> Self {
        let repr = if family.is_polynomial() {
            FunctionRepr::Coefficients(vec![0.0; family.dim.min(domain.len())])
        } else {
            FunctionRepr::GaussianParams([0.0, domain.a as f64, 1.0, 0.0])
        };
        FittedFunction { family, domain, repr }
    }

    /// Function value at position `t` (must lie in the domain).
    pub fn evaluate(&self, t: i64) -> Result<f64> {
        if !self.domain.contains(t) {
            return Err(Error::invalid_domain(format!(
                "position {t} outside function domain {}",
                self.domain
            )));
        }
        Ok(match &self.repr {
            FunctionRepr::Coefficients(coeffs) => {
                let vectors = basis::basis_vectors(self.domain.len(), coeffs.len());
                let i = (t - self.domain.a) as usize;
                coeffs.iter().zip(vectors.iter()).map(|(c, phi)| c * phi[i]).sum()
            }
            FunctionRepr::GaussianParams(p) => gaussian::evaluate(p, t as f64),
        })
    }

    /// All function values over the domain.
    pub fn values(&self) -> Vec<f64> {
        self.values_on(&self.domain).expect("own domain")
    }

    /// Function values over a subdomain.
    pub fn values_on(&self, sub: &Domain) -> Result<Vec<f64>> {
        if !self.domain.contains_domain(sub) {
            return Err(Error::invalid_domain(format!(
                "{sub} not contained in function domain {}",
                self.domain
            )));
        }
        Ok(match &self.repr {
            FunctionRepr::Coefficients(coeffs) => {
                let vectors = basis::basis_vectors(self.domain.len(), coeffs.len());
                let lo = (sub.a - self.domain.a) as usize;
                let mut out = vec![0.0; sub.len()];
                for (c, phi) in coeffs.iter().zip(vectors.iter()) {
                    for (o, p) in out.iter_mut().zip(&phi[lo..lo + sub.len()]) {
                        *o += c * p;
                    }
                }
                out
            }
            FunctionRepr::GaussianParams(p) => {
                sub.positions().map(|t| gaussian::evaluate(p, t as f64)).collect()
            }
        })
    }

    /// `sum_t f(t)` over the whole domain. For polynomials this is
    /// `coeffs[0] * sqrt(n)`: the degree-0 basis function is constant and
    /// all higher ones sum to zero.
    pub fn sum(&self) -> f64 {
        match &self.repr {
            FunctionRepr::Coefficients(coeffs) => coeffs[0] * (self.domain.len() as f64).sqrt(),
            FunctionRepr::GaussianParams(_) => self.values().iter().sum(),
        }
    }

    /// `sqrt(sum_t f(t)^2)` over the whole domain. For polynomials this is
    /// the coefficient norm (orthonormality).
    pub fn norm(&self) -> f64 {
        match &self.repr {
            FunctionRepr::Coefficients(coeffs) => {
                coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
            }
            FunctionRepr::GaussianParams(_) => {
                self.values().iter().map(|v| v * v).sum::<f64>().sqrt()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Fits `family` to `values` on `domain` by least squares.
///
/// Polynomials project onto the orthonormal basis (dimension reduced to the
/// window length for very short windows); the Gaussian bump runs a damped
/// multi-start Gauss–Newton.
pub fn fit(
    values: &[f64],
    domain: &Domain,
    family: &'static FamilyDescriptor,
) -> Result<FittedFunction> {
    fit_with_warm(values, domain, family, None)
}

/// [`fit`] with an optional warm start reused by the sliding-window
/// segmenter when a window grows by one point.
pub(crate) fn fit_with_warm(
    values: &[f64],
    domain: &Domain,
    family: &'static FamilyDescriptor,
    warm: Option<&FunctionRepr>,
) -> Result<FittedFunction> {
    if values.len() != domain.len() {
        return Err(Error::invalid_argument(format!(
            "expected {} values for domain {}, got {}",
            domain.len(),
            domain,
            values.len()
        )));
    }
    let repr = if family.is_polynomial() {
        let dim = family.dim.min(domain.len());
        let b = build_basis(domain, dim)?;
        FunctionRepr::Coefficients(b.project(values)?)
    } else {
        let warm_params = match warm {
            Some(FunctionRepr::GaussianParams(p)) => Some(p),
            _ => None,
        };
        FunctionRepr::GaussianParams(gaussian::fit(values, domain, warm_params))
    };
    Ok(FittedFunction { family, domain: *domain, repr })
}

/// Function value at `t` — free-function form of [`FittedFunction::evaluate`].
pub fn evaluate(f: &FittedFunction, t: i64) -> Result<f64> {
    f.evaluate(t)
}

/// Restricts a fitted function to a subdomain of its domain.
///
/// Polynomial coefficients are re-expressed in the subdomain basis through
/// the transform matrix (exact); the Gaussian bump keeps its parameters and
/// just narrows the domain.
pub fn restrict_function(f: &FittedFunction, sub: &Domain) -> Result<FittedFunction> {
    if !f.domain.contains_domain(sub) {
        return Err(Error::invalid_domain(format!(
            "{sub} not contained in function domain {}",
            f.domain
        )));
    }
    let repr = match &f.repr {
        FunctionRepr::Coefficients(coeffs) => {
            FunctionRepr::Coefficients(restrict_coeffs(coeffs, &f.domain, sub))
        }
        FunctionRepr::GaussianParams(p) => FunctionRepr::GaussianParams(*p),
    };
    Ok(FittedFunction { family: f.family, domain: *sub, repr })
}

/// `sqrt(sum_{t in sub} (f_outer(t) - f_inner(t))^2)`: the L2 distance of two
/// fitted functions over a common subdomain of both.
pub fn diff_norm_on_subdomain(
    f_outer: &FittedFunction,
    f_inner: &FittedFunction,
    sub: &Domain,
) -> Result<f64> {
    let a = f_outer.values_on(sub)?;
    let b = f_inner.values_on(sub)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}
