//! Basis transforms between a domain and its subdomains.
//!
//! A polynomial fitted on a segment is often needed on a piece of that
//! segment (queries clip segments at window edges). The transform matrix
//! `psi[i][j] = <phi_i^src restricted to sub, phi_j^sub>` re-expresses
//! coefficients: if `f = sum_i c[i] * phi_i^src`, then on the subdomain
//! `f = sum_j d[j] * phi_j^sub` with `d = psi^T c`. The restriction is exact
//! whenever `dim_sub >= min(dim_src, |sub|)`.
//!
//! Like the bases themselves, the matrix depends only on the window shape
//! (source length, offset of the subdomain, subdomain length, dimensions),
//! so results are cached by shape.

use crate::core::Domain;
use crate::error::{Error, Result};
use crate::families::basis::{basis_vectors, OrthonormalBasis};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Cache cap mirroring the basis cache: clear-on-cap keeps memory bounded
/// while the recompute cost stays negligible.
const PSI_CACHE_CAP: usize = 4096;

type PsiKey = (usize, usize, usize, usize, usize);

static PSI_CACHE: Lazy<Mutex<HashMap<PsiKey, Arc<Vec<Vec<f64>>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Transform matrix with shape `(src_len, sub_offset, sub_len, dim_src,
/// dim_sub)`, cached. `matrix[i][j] = <phi_i^src|sub, phi_j^sub>`.
pub(crate) fn psi_matrix(
    src_len: usize,
    sub_offset: usize,
    sub_len: usize,
    dim_src: usize,
    dim_sub: usize,
) -> Arc<Vec<Vec<f64>>> {
    debug_assert!(sub_offset + sub_len <= src_len);
    debug_assert!(dim_src >= 1 && dim_src <= src_len && dim_sub >= 1 && dim_sub <= sub_len);
    let key = (src_len, sub_offset, sub_len, dim_src, dim_sub);
    let mut cache = PSI_CACHE.lock().unwrap();
    if let Some(m) = cache.get(&key) {
        return Arc::clone(m);
    }
    let src = basis_vectors(src_len, dim_src);
    let sub = basis_vectors(sub_len, dim_sub);
    let mut matrix = vec![vec![0.0; dim_sub]; dim_src];
    for (i, row) in matrix.iter_mut().enumerate() {
        let restricted = &src[i][sub_offset..sub_offset + sub_len];
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = restricted.iter().zip(&sub[j]).map(|(a, b)| a * b).sum();
        }
    }
    let matrix = Arc::new(matrix);
    if cache.len() >= PSI_CACHE_CAP {
        cache.clear();
    }
    cache.insert(key, Arc::clone(&matrix));
    matrix
}

/// Re-expresses source-basis coefficients in the subdomain basis:
/// `d[j] = sum_i coeffs[i] * psi[i][j]`.
pub(crate) fn restrict_coeffs_raw(matrix: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let dim_sub = matrix.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim_sub];
    for (c, row) in coeffs.iter().zip(matrix) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += c * v;
        }
    }
    out
}

/// Convenience wrapper used across the crate: coefficients of a polynomial
/// given on `src`, re-expressed on `sub` with the exact dimension
/// `min(coeffs.len(), |sub|)`.
pub(crate) fn restrict_coeffs(coeffs: &[f64], src: &Domain, sub: &Domain) -> Vec<f64> {
    debug_assert!(src.contains_domain(sub));
    if sub == src {
        return coeffs.to_vec();
    }
    let dim_sub = coeffs.len().min(sub.len());
    let matrix =
        psi_matrix(src.len(), (sub.a - src.a) as usize, sub.len(), coeffs.len(), dim_sub);
    restrict_coeffs_raw(&matrix, coeffs)
}

/// The coefficient transform from a source basis to the basis of one of its
/// subdomains.
#[derive(Debug, Clone)]
pub struct BasisTransform {
    /// Source domain.
    pub src: Domain,
    /// Subdomain of `src`.
    pub sub: Domain,
    /// Source dimension (rows).
    pub dim_src: usize,
    /// Subdomain dimension (columns).
    pub dim_sub: usize,
    matrix: Arc<Vec<Vec<f64>>>,
}

impl BasisTransform {
    /// Matrix entry `<phi_i^src|sub, phi_j^sub>`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    /// Transforms source coefficients into subdomain coefficients.
    pub fn restrict_coeffs(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.dim_src {
            return Err(Error::invalid_argument(format!(
                "expected {} coefficients, got {}",
                self.dim_src,
                coeffs.len()
            )));
        }
        Ok(restrict_coeffs_raw(&self.matrix, coeffs))
    }
}

/// Builds the transform between a basis and a basis on one of its
/// subdomains.
///
/// # Example
///
/// ```
/// use segbound::core::Domain;
/// use segbound::families::{build_basis, psi};
/// let src = build_basis(&Domain::new(1, 4).unwrap(), 2).unwrap();
/// let sub = build_basis(&Domain::new(1, 2).unwrap(), 2).unwrap();
/// let t = psi(&src, &sub).unwrap();
/// assert!((t.entry(0, 0) - 0.7071067811865476).abs() < 1e-10);
/// assert!((t.entry(1, 0) + 0.6324555320336759).abs() < 1e-10);
/// ```
pub fn psi(src: &OrthonormalBasis, sub: &OrthonormalBasis) -> Result<BasisTransform> {
    if !src.domain.contains_domain(&sub.domain) {
        return Err(Error::invalid_domain(format!(
            "subdomain {} not contained in source domain {}",
            sub.domain, src.domain
        )));
    }
    let matrix = psi_matrix(
        src.domain.len(),
        (sub.domain.a - src.domain.a) as usize,
        sub.domain.len(),
        src.dim,
        sub.dim,
    );
    Ok(BasisTransform {
        src: src.domain,
        sub: sub.domain,
        dim_src: src.dim,
        dim_sub: sub.dim,
        matrix,
    })
}
