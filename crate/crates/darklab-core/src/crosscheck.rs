//! Independent reference routes for auditing the fast paths.
//!
//! Every routine here reaches a conclusion the main modules also reach, but
//! by a deliberately different computation: ranks and kernels through Gram
//! eigendecompositions instead of singular values, invariant subspaces
//! through an intersection chain instead of one stacked kernel, spectral
//! subspaces through complex shifted products instead of real polynomials.
//! Agreement between the two routes is evidence against a shared bug;
//! the routines trade speed and numerical polish for that independence, so
//! they belong in tests and audits, not in production call paths.

use crate::linalg;
use crate::model::SystemSpec;
use crate::symplectic::j_matrix;
use nalgebra::{Complex, DMatrix, SymmetricEigen};

/// Cutoff in the singular-value domain for Gram-eigenvalue routes.
///
/// Squaring costs half the working precision: the Gram eigenvalues of exact
/// null directions carry noise of order `eps·λ_max`, so their roots sit near
/// `sqrt(eps)·σ_max`, far above any SVD-style cutoff. The floor below is the
/// honest resolution limit of the route; a caller tolerance can only widen
/// it.
fn gram_sigma_cutoff(rows: usize, cols: usize, lambda_max: f64, tol: Option<f64>) -> f64 {
    let floor = (rows.max(cols) as f64 * f64::EPSILON * lambda_max.max(0.0)).sqrt();
    match tol {
        Some(t) => t.max(floor),
        None => floor,
    }
}

/// Rank via the eigenvalues of the smaller Gram matrix; singular values are
/// the square roots of the Gram eigenvalues.
pub fn rank_by_gram(m: &DMatrix<f64>, tol: Option<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let g = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let eig = SymmetricEigen::new(g);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = gram_sigma_cutoff(m.nrows(), m.ncols(), lmax, tol);
    eig.eigenvalues
        .iter()
        .filter(|&&e| e.max(0.0).sqrt() > cutoff)
        .count()
}

/// Kernel basis via the right Gram matrix `MᵀM`: eigenvectors whose
/// eigenvalue roots fall below the cutoff.
pub fn kernel_by_gram(m: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let eig = SymmetricEigen::new(m.transpose() * m);
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = gram_sigma_cutoff(m.nrows(), m.ncols(), lmax, tol);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| eig.eigenvalues[i].max(0.0).sqrt() <= cutoff)
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &eig.eigenvectors.column(i));
    }
    out
}

/// Largest `a`-invariant subspace inside the span of `k`, as the chain
/// `V_{i+1} = V_i ∩ Ker((I-P_i) a)` of explicit intersections.
pub fn invariant_hull(k: &DMatrix<f64>, a: &DMatrix<f64>, tol: Option<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let scale = a.norm().max(1.0);
    // absolute gate: projector noise accumulates over the chain, which a
    // relative singular-value cutoff on the residual map would reject
    let gate = tol.unwrap_or(1e-10);
    let mut cur = linalg::range_basis(k, tol);
    loop {
        if cur.ncols() == 0 {
            return cur;
        }
        let residual_map =
            (DMatrix::<f64>::identity(n, n) - linalg::projector(&cur, tol)) * a / scale;
        let preimage = linalg::kernel_basis(&residual_map, Some(gate));
        let next = linalg::intersect(&cur, &preimage, Some(gate));
        if next.ncols() == cur.ncols() {
            return next;
        }
        cur = next;
    }
}

/// Largest absolute pairing value `|ω(b_i, b_j)|` over the basis columns:
/// zero exactly when the span is totally isotropic.
pub fn isotropy_defect(basis: &DMatrix<f64>) -> f64 {
    let n = basis.nrows() / 2;
    let gram = basis.transpose() * j_matrix(n) * basis;
    gram.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Radical dimension via the spectrum of `-G²` for the pairing Gram `G`
/// (symmetric positive semidefinite; its eigenvalue roots are the singular
/// values of `G`).
pub fn radical_dim_by_eigen(basis: &DMatrix<f64>, tol: Option<f64>) -> usize {
    let d = basis.ncols();
    if d == 0 {
        return 0;
    }
    let n = basis.nrows() / 2;
    let gram = basis.transpose() * j_matrix(n) * basis;
    let eig = SymmetricEigen::new(-(&gram * &gram));
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cutoff = gram_sigma_cutoff(d, d, lmax, tol);
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&e| e.max(0.0).sqrt() > cutoff)
        .count();
    d - rank
}

/// Independently certifies that no dark mode exists.
///
/// Returns `true` only when one of the three airtight negative arguments
/// holds along this module's own computation route: the coupled quadrature
/// map has full rank, its kernel contains no invariant subspace, or the
/// maximal invariant subspace is totally isotropic. A `false` is a refusal
/// to certify, not a claim that a dark mode exists.
pub fn confirm_no_dark(spec: &SystemSpec) -> bool {
    let n = spec.modes();
    let jn = j_matrix(n);
    let vj = spec.coupling() * &jn;
    if rank_by_gram(&vj, spec.tol()) == 2 * n {
        return true;
    }
    let k = kernel_by_gram(&vj, spec.tol());
    if k.ncols() == 0 {
        return true;
    }
    let a = spec.omega() * &jn;
    let u = invariant_hull(&k, &a, spec.tol());
    if u.ncols() == 0 {
        return true;
    }
    isotropy_defect(&u) <= 1e-9
}

/// Real spectral subspace for a conjugation-closed eigenvalue multiset via
/// complex arithmetic: the near-kernel of `∏ (a - λI)` over the multiset,
/// re-realified from the complex singular directions.
pub fn complex_spectral_subspace(a: &DMatrix<f64>, lambdas: &[Complex<f64>]) -> DMatrix<f64> {
    let n = a.nrows();
    let ac = a.map(|x| Complex::new(x, 0.0));
    let eye = DMatrix::<Complex<f64>>::identity(n, n);
    let mut p = eye.clone();
    for &lam in lambdas {
        p *= &ac - &eye * lam;
        let nrm = p.norm();
        if nrm > 0.0 {
            p.unscale_mut(nrm);
        }
    }
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap()
    });
    let dim = lambdas.len().min(n);
    let mut stacked = DMatrix::zeros(n, 2 * dim);
    for (k, &i) in idx.iter().take(dim).enumerate() {
        let row = v_t.row(i);
        for c in 0..n {
            stacked[(c, 2 * k)] = row[c].re;
            stacked[(c, 2 * k + 1)] = row[c].im;
        }
    }
    linalg::range_basis(&stacked, None)
}
