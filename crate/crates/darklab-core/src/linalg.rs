//! Dense helpers shared by the subspace machinery.
//!
//! Every rank decision in the crate funnels through an SVD with an explicit
//! singular-value cutoff, so tolerance policy lives in exactly one place.
//! Subspaces are represented by matrices whose columns span them; the
//! routines here return orthonormal spanning sets.

use nalgebra::DMatrix;

/// Default singular-value cutoff: `max(rows, cols) * eps * sigma_max`.
///
/// `sigma_max` is taken from the matrix itself, so the cutoff scales with the
/// data. A zero matrix gets a zero cutoff and full nullity.
pub fn default_rank_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

fn effective_cutoff(m: &DMatrix<f64>, sigma: &[f64], tol: Option<f64>) -> f64 {
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    tol.unwrap_or_else(|| default_rank_cutoff(m.nrows(), m.ncols(), sigma_max))
}

/// Numerical rank at the given cutoff (`None` selects the default policy).
pub fn rank(m: &DMatrix<f64>, tol: Option<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let sv = svd.singular_values.as_slice();
    let cutoff = effective_cutoff(m, sv, tol);
    sv.iter().filter(|s| **s > cutoff).count()
}

/// Orthonormal basis of the right null space `{x : m x = 0}`.
///
/// Columns are right singular vectors whose singular values fall at or below
/// the cutoff. A matrix with no rows has the full space as its kernel.
pub fn kernel_basis(m: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let sv = svd.singular_values.as_slice();
    let cutoff = effective_cutoff(m, sv, tol);
    // v_t has min(rows, cols) rows; right singular vectors past that count
    // pair with singular value zero and belong to the kernel as well.
    let mut cols: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cutoff).collect();
    let dim = cols.len() + n - v_t.nrows().min(n);
    let mut out = DMatrix::zeros(n, dim);
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &v_t.row(i).transpose());
    }
    if v_t.nrows() < n {
        // complete the missing trailing directions by orthonormalizing the
        // residual of the identity against the computed right vectors
        let mut q: Vec<nalgebra::DVector<f64>> = (0..v_t.nrows())
            .map(|i| v_t.row(i).transpose())
            .collect();
        let mut k = cols.len();
        for j in 0..n {
            let mut cand = nalgebra::DVector::zeros(n);
            cand[j] = 1.0;
            for b in &q {
                let c = b.dot(&cand);
                cand -= b * c;
            }
            let nrm = cand.norm();
            if nrm > 1e-12 {
                cand /= nrm;
                out.set_column(k, &cand);
                q.push(cand);
                k += 1;
                if k == dim {
                    break;
                }
            }
        }
        cols.truncate(0);
    }
    out
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.as_ref().expect("svd requested u");
    let sv = svd.singular_values.as_slice();
    let cutoff = effective_cutoff(m, sv, tol);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff).collect();
    let mut out = DMatrix::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Orthogonal projector onto the column space of `basis`.
pub fn projector(basis: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let q = range_basis(basis, tol);
    &q * q.transpose()
}

/// Orthonormal basis of `col(a) ∩ col(b)`, via the kernel of the stacked
/// complement projectors `[(I - P_a); (I - P_b)]`.
pub fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows(), "ambient dimensions must agree");
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let ca = &eye - projector(a, tol);
    let cb = &eye - projector(b, tol);
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&ca);
    stacked.view_mut((n, 0), (n, n)).copy_from(&cb);
    // constraint rows are projector residuals with unit scale, so an absolute
    // cutoff near machine precision separates membership cleanly
    kernel_basis(&stacked, Some(tol.unwrap_or(1e-10)))
}

/// Largest residual of `col(b)` against the projector onto `col(a)`.
///
/// Zero when every column of `b` lies in `col(a)`.
pub fn containment_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: Option<f64>) -> f64 {
    if b.ncols() == 0 {
        return 0.0;
    }
    let p = projector(a, tol);
    let res = b - &p * b;
    res.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Subspace equality via mutual containment of unit spanning vectors.
pub fn subspace_eq(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    let qa = range_basis(a, None);
    let qb = range_basis(b, None);
    if qa.ncols() != qb.ncols() {
        return false;
    }
    containment_residual(&qa, &qb, None) <= tol && containment_residual(&qb, &qa, None) <= tol
}
