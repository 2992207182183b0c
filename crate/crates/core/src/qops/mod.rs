//! Dense complex operator algebra on small qubit registers.
//!
//! Basis convention: |g⟩ is index 0 and |e⟩ is index 1. For an `n`-site register
//! the basis index is `Σ_j bit_j · 2^(n-j)`, so site 1 is the most significant
//! factor of every tensor product.

mod density;
mod linalg;
mod matrix;

pub use density::DensityMatrix;
pub use linalg::{entropy_of_spectrum, expm, hermitian_eig, von_neumann_entropy, HermitianEigen};
pub use matrix::{pauli, ComplexMatrix};

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QopsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("site {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("invalid site list {keep:?} for a {n_sites}-site register")]
    InvalidSiteList { keep: Vec<usize>, n_sites: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("eigen-decomposition failed to converge")]
    EigenFailed,
    #[error("negative eigenvalue {0:.3e} in density matrix")]
    NegativeEigenvalue(f64),
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
}

/// Tensor product `a ⊗ b` with `(a⊗b)[(i·db+k),(j·db+l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Embeds a single-site operator: `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` at `site`
/// (1-based, site 1 is the most significant factor).
pub fn site_operator(
    n_sites: usize,
    site: usize,
    local: &ComplexMatrix,
) -> Result<ComplexMatrix, QopsError> {
    if site == 0 || site > n_sites {
        return Err(QopsError::SiteOutOfRange { site, n_sites });
    }
    if local.rows() != 2 || local.cols() != 2 {
        return Err(QopsError::DimensionMismatch { expected: 4, found: local.rows() * local.cols() });
    }
    let id = ComplexMatrix::identity(2);
    let mut out = ComplexMatrix::identity(1);
    for s in 1..=n_sites {
        out = kron(&out, if s == site { local } else { &id });
    }
    Ok(out)
}

/// Number of qubits for a `dim`-dimensional register, if `dim` is a power of two.
pub fn qubit_count(dim: usize) -> Option<usize> {
    (dim.is_power_of_two() && dim > 0).then(|| dim.trailing_zeros() as usize)
}

/// Bit of `site` (1-based) in basis index `index` of an `n_sites` register.
#[inline]
pub fn site_bit(index: usize, site: usize, n_sites: usize) -> usize {
    (index >> (n_sites - site)) & 1
}

/// Reduced state on the sites in `keep`, with factors ordered as listed.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QopsError> {
    let m = rho.matrix();
    let n = rho.n_sites();
    let invalid = || QopsError::InvalidSiteList { keep: keep.to_vec(), n_sites: n };
    if keep.is_empty() || keep.iter().any(|&s| s == 0 || s > n) {
        return Err(invalid());
    }
    for (i, s) in keep.iter().enumerate() {
        if keep[..i].contains(s) {
            return Err(invalid());
        }
    }
    let k = keep.len();
    let traced_mask: usize = (1..=n)
        .filter(|s| !keep.contains(s))
        .map(|s| 1usize << (n - s))
        .fold(0, |acc, b| acc | b);
    let reduced_index = |a: usize| {
        keep.iter().fold(0usize, |acc, &s| (acc << 1) | site_bit(a, s, n))
    };
    let dim = m.rows();
    let mut out = ComplexMatrix::zeros(1 << k, 1 << k);
    for a in 0..dim {
        let ra = reduced_index(a);
        for b in 0..dim {
            if a & traced_mask != b & traced_mask {
                continue;
            }
            out[(ra, reduced_index(b))] += m[(a, b)];
        }
    }
    Ok(DensityMatrix::new_unchecked(out))
}
