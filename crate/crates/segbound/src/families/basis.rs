//! Orthonormal polynomial bases on integer domains.
//!
//! For a domain `[a, b]` with `n` positions and a dimension `dim <= n`, the
//! basis is obtained by Gram–Schmidt orthonormalization of the monomials
//! `1, x, x^2, ...` evaluated on the integer grid, with `x` centered at the
//! domain midpoint for numerical conditioning. Fitting a series is then a
//! plain projection: `coeffs[j] = <T, phi_j>`.
//!
//! Because the grid is uniform, the basis vectors depend only on `(n, dim)`,
//! not on where the domain sits on the time axis. Construction results are
//! therefore cached by `(n, dim)` and shared.

use crate::core::Domain;
use crate::error::{Error, Result};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Cache cap: beyond this many distinct `(len, dim)` shapes the cache is
/// cleared. Rebuilding a basis is cheap; unbounded growth is the only risk.
const BASIS_CACHE_CAP: usize = 1024;

static BASIS_CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<Vec<Vec<f64>>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared basis vectors for a domain of `len` positions.
///
/// `vectors[j][i]` is the value of the `j`-th basis function at relative
/// position `i` (i.e. at absolute position `domain.a + i`). Exposed at crate
/// level so the query engine can slice windows without a `Domain` in hand.
pub(crate) fn basis_vectors(len: usize, dim: usize) -> Arc<Vec<Vec<f64>>> {
    debug_assert!(dim >= 1 && dim <= len);
    let key = (len, dim);
    let mut cache = BASIS_CACHE.lock().unwrap();
    if let Some(v) = cache.get(&key) {
        return Arc::clone(v);
    }
    let built = Arc::new(build_vectors(len, dim));
    if cache.len() >= BASIS_CACHE_CAP {
        cache.clear();
    }
    cache.insert(key, Arc::clone(&built));
    built
}

/// Gram–Schmidt on centered monomials, with one re-orthogonalization pass
/// (classic remedy for the small loss of orthogonality plain MGS leaves on
/// long grids).
fn build_vectors(len: usize, dim: usize) -> Vec<Vec<f64>> {
    let center = (len as f64 - 1.0) / 2.0;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v: Vec<f64> = (0..len).map(|i| (i as f64 - center).powi(j as i32)).collect();
        for _pass in 0..2 {
            for phi in &vectors {
                let proj = dot(&v, phi);
                for (x, p) in v.iter_mut().zip(phi) {
                    *x -= proj * p;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        // Monomials on >= dim distinct points are linearly independent, so
        // the norm only ever vanishes through catastrophic cancellation,
        // which centering prevents at these dimensions.
        for x in v.iter_mut() {
            *x /= norm;
        }
        vectors.push(v);
    }
    vectors
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// An orthonormal polynomial basis bound to a concrete domain.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    /// Domain the basis functions are defined on.
    pub domain: Domain,
    /// Number of basis functions (polynomial degrees `0..dim`).
    pub dim: usize,
    vectors: Arc<Vec<Vec<f64>>>,
}

/// Builds the orthonormal polynomial basis of dimension `dim` on `domain`.
///
/// # Arguments
///
/// * `domain` - integer interval with at least `dim` positions.
/// * `dim` - number of basis functions, `1 <= dim <= domain.len()`.
///
/// # Example
///
/// ```
/// use segbound::core::Domain;
/// use segbound::families::build_basis;
/// let basis = build_basis(&Domain::new(1, 3).unwrap(), 2).unwrap();
/// // Degree 0: constant 1/sqrt(3). Degree 1: proportional to (t - 2).
/// assert!((basis.value(0, 1).unwrap() - 0.5773502691896258).abs() < 1e-12);
/// assert!((basis.value(1, 1).unwrap() + 0.7071067811865476).abs() < 1e-12);
/// ```
pub fn build_basis(domain: &Domain, dim: usize) -> Result<OrthonormalBasis> {
    if dim < 1 || dim > domain.len() {
        return Err(Error::invalid_argument(format!(
            "basis dimension {dim} not in 1..={} for domain {domain}",
            domain.len()
        )));
    }
    Ok(OrthonormalBasis { domain: *domain, dim, vectors: basis_vectors(domain.len(), dim) })
}

impl OrthonormalBasis {
    /// The `j`-th basis function as a vector over the domain.
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j]
    }

    /// Value of the `j`-th basis function at absolute position `t`.
    pub fn value(&self, j: usize, t: i64) -> Result<f64> {
        if !self.domain.contains(t) {
            return Err(Error::invalid_domain(format!(
                "position {t} outside basis domain {}",
                self.domain
            )));
        }
        Ok(self.vectors[j][(t - self.domain.a) as usize])
    }

    /// Projection coefficients `<values, phi_j>` of a value vector covering
    /// the whole domain.
    pub fn project(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.domain.len() {
            return Err(Error::invalid_argument(format!(
                "expected {} values for domain {}, got {}",
                self.domain.len(),
                self.domain,
                values.len()
            )));
        }
        Ok((0..self.dim).map(|j| dot(values, &self.vectors[j])).collect())
    }

    /// Reconstructs the function `sum_j coeffs[j] * phi_j` over the domain.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.domain.len()];
        for (j, c) in coeffs.iter().enumerate() {
            for (o, p) in out.iter_mut().zip(&self.vectors[j]) {
                *o += c * p;
            }
        }
        out
    }
}
