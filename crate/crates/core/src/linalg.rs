//! Dense complex matrix helpers shared across the crate: Kronecker products,
//! tensor-factor permutations, partial traces over selected factors, and
//! Hermitian eigendecompositions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Identity matrix of the given dimension.
pub fn eye(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Max elementwise deviation from Hermiticity, `max |M - M†|`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max elementwise absolute difference.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max elementwise magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// True if every off-diagonal entry is below `tol` in magnitude.
pub fn is_diagonal(m: &CMat, tol: f64) -> bool {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, eigenvalues ascending.
/// The matrix is symmetrized first so that tiny Hermiticity drift cannot
/// poison the decomposition.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vecs = CMat::zeros(dim, dim);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, ascending. Skips the full
/// decomposition for diagonal input.
pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    if is_diagonal(m, 0.0) {
        let mut vals: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return vals;
    }
    herm_eigen(m).0
}

/// Decompose a flat index into a multi-index over `dims` (row-major,
/// factor 0 slowest).
fn unravel(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for pos in (0..dims.len()).rev() {
        out[pos] = index % dims[pos];
        index /= dims[pos];
    }
}

fn ravel(multi: &[usize], dims: &[usize]) -> usize {
    let mut index = 0;
    for (i, &d) in dims.iter().enumerate() {
        index = index * d + multi[i];
    }
    index
}

/// Permutation matrix `P` reordering tensor factors: output factor `j` is
/// input factor `perm[j]`, so `P|i_{perm[0]},…⟩ = |i_0,…⟩` reindexed.
pub fn factor_permutation_matrix(dims: &[usize], perm: &[usize]) -> CMat {
    assert_eq!(dims.len(), perm.len());
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut mat = CMat::zeros(total, total);
    let mut multi = vec![0usize; dims.len()];
    let mut out_multi = vec![0usize; dims.len()];
    for col in 0..total {
        unravel(col, dims, &mut multi);
        for (j, &p) in perm.iter().enumerate() {
            out_multi[j] = multi[p];
        }
        let row = ravel(&out_multi, &out_dims);
        mat[(row, col)] = cplx(1.0, 0.0);
    }
    mat
}

/// Reorder the tensor factors of a vector on `⊗_i H_{dims[i]}`.
pub fn permute_vector_factors(v: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let total: usize = dims.iter().product();
    assert_eq!(v.len(), total, "vector length does not match factor dims");
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut out = CVec::zeros(total);
    let mut multi = vec![0usize; dims.len()];
    let mut out_multi = vec![0usize; dims.len()];
    for i in 0..total {
        unravel(i, dims, &mut multi);
        for (j, &p) in perm.iter().enumerate() {
            out_multi[j] = multi[p];
        }
        out[ravel(&out_multi, &out_dims)] = v[i];
    }
    out
}

/// Reorder the tensor factors of an operator on `⊗_i H_{dims[i]}`.
pub fn permute_matrix_factors(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "matrix dim does not match factor dims");
    let p = factor_permutation_matrix(dims, perm);
    &p * m * p.adjoint()
}

/// Partial trace over the factors with `keep[i] == false`.
pub fn partial_trace_factors(m: &CMat, dims: &[usize], keep: &[bool]) -> CMat {
    assert_eq!(dims.len(), keep.len());
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total);
    let kept_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .collect();
    let traced_dims: Vec<usize> = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| !k)
        .map(|(&d, _)| d)
        .collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    let mut out = CMat::zeros(kept_total, kept_total);
    let nfac = dims.len();
    let mut kept_multi_r = vec![0usize; kept_dims.len()];
    let mut kept_multi_c = vec![0usize; kept_dims.len()];
    let mut traced_multi = vec![0usize; traced_dims.len()];
    let mut full_r = vec![0usize; nfac];
    let mut full_c = vec![0usize; nfac];

    for r in 0..kept_total {
        unravel(r, &kept_dims, &mut kept_multi_r);
        for c in 0..kept_total {
            unravel(c, &kept_dims, &mut kept_multi_c);
            let mut acc = cplx(0.0, 0.0);
            for t in 0..traced_total {
                unravel(t, &traced_dims, &mut traced_multi);
                let (mut ik, mut it) = (0, 0);
                for f in 0..nfac {
                    if keep[f] {
                        full_r[f] = kept_multi_r[ik];
                        full_c[f] = kept_multi_c[ik];
                        ik += 1;
                    } else {
                        full_r[f] = traced_multi[it];
                        full_c[f] = traced_multi[it];
                        it += 1;
                    }
                }
                acc += m[(ravel(&full_r, dims), ravel(&full_c, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Parse a matrix from nested rows of `[re, im]` cells.
pub fn mat_from_rows(rows: &[Vec<[f64; 2]>]) -> Option<CMat> {
    let nrows = rows.len();
    if nrows == 0 {
        return None;
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(CMat::from_fn(nrows, ncols, |i, j| {
        cplx(rows[i][j][0], rows[i][j][1])
    }))
}

/// Serialize a matrix into nested rows of `[re, im]` cells, row-major.
pub fn mat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}
