//! Compound matrices: the matrix of `k x k` minors, which realizes the `k`-th
//! antisymmetric tensor power in the basis of increasing index sets.

use itertools::Itertools;

use super::matrix::{CMatrix, Eigh, SpdMatrix};
use crate::error::{Error, Result};

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(k).collect()
}

/// `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Matrix of `k x k` minors of `a`, rows and columns indexed by increasing
/// `k`-subsets in lexicographic order.
pub fn compound_matrix(a: &CMatrix, k: usize) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: a.ncols() });
    }
    if k == 0 || k > n {
        return Err(Error::BadOrder { k, n });
    }
    let subsets = index_subsets(n, k);
    let size = subsets.len();
    Ok(CMatrix::from_fn(size, size, |r, c| {
        let rows = &subsets[r];
        let cols = &subsets[c];
        // LU for every order: the cofactor formulas used for orders <= 3 lose
        // accuracy on ill-conditioned minors.
        CMatrix::from_fn(k, k, |i, j| a[(rows[i], cols[j])]).lu().determinant()
    }))
}

impl SpdMatrix {
    /// Compound of a positive definite matrix, assembled as
    /// `Λ^k U · diag(λ_S) · (Λ^k U)*` from `A = U diag(λ) U*`, where `λ_S` runs
    /// over products of `k` eigenvalues. Small eigenvalues of the compound keep
    /// the relative accuracy of the spectrum of `A`.
    pub fn compound(&self, k: usize) -> Result<SpdMatrix> {
        let eig = self.eigh();
        let vectors = compound_matrix(&eig.vectors, k)?;
        let values = index_subsets(self.dim(), k).iter().map(|s| s.iter().map(|&i| eig.values[i]).product()).collect();
        SpdMatrix::from_eigh(Eigh { values, vectors }.mapped(|l| l))
    }
}
