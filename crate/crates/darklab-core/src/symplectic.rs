//! Symplectic linear algebra over `R^{2n}`.
//!
//! Conventions, fixed once for the whole crate:
//! - coordinates interleave position/momentum as `(q_1, p_1, ..., q_n, p_n)`;
//! - the unit form is `J = [[0, 1], [-1, 0]]` and `J_n = I_n ⊗ J`, so
//!   `J_n (q, p) = (p, -q)` pairwise;
//! - the symplectic form is `ω_n(x, y) = xᵀ J_n y`;
//! - a rectangular `S` (2l×2n) satisfies the canonical commutation pattern
//!   when `S J_n Sᵀ = J_l`;
//! - symplectic bases interleave conjugate pairs as columns `(e_1, f_1, ...)`
//!   with `ω(e_i, f_j) = δ_ij`.
//!
//! The *symplectic complement* of a subspace `W` is
//! `W^~ = {v : ω(w, v) = 0 for all w in W}`; the *radical* is `W ∩ W^~`.
//! `W` carries a nondegenerate form (is symplectic) exactly when its radical
//! is trivial.

use crate::linalg;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

// ── J matrices and the form ─────────────────────────────────────────────────

/// Block-diagonal `J_n = I_n ⊗ [[0, 1], [-1, 0]]`, a `2n×2n` matrix.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    j
}

/// `J_n x` computed structurally: `(q, p) ↦ (p, -q)` per mode pair.
pub fn j_mul_vec(x: &DVector<f64>) -> DVector<f64> {
    assert!(x.len() % 2 == 0, "vector must live in R^{{2n}}");
    let mut out = DVector::zeros(x.len());
    for i in 0..x.len() / 2 {
        out[2 * i] = x[2 * i + 1];
        out[2 * i + 1] = -x[2 * i];
    }
    out
}

/// `J_n M`: swaps and negates row pairs of `M`.
pub fn j_mul_mat(m: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(m.nrows() % 2 == 0, "row count must be even");
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() / 2 {
        for c in 0..m.ncols() {
            out[(2 * i, c)] = m[(2 * i + 1, c)];
            out[(2 * i + 1, c)] = -m[(2 * i, c)];
        }
    }
    out
}

/// Symplectic form `ω_n(x, y) = xᵀ J_n y`.
pub fn sympl_form(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "form arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimension {} is odd",
            x.len()
        )));
    }
    let mut acc = 0.0;
    for i in 0..x.len() / 2 {
        acc += x[2 * i] * y[2 * i + 1] - x[2 * i + 1] * y[2 * i];
    }
    Ok(acc)
}

// ── subspaces ───────────────────────────────────────────────────────────────

/// A subspace of `R^{2n}` spanned by the columns of a full-column-rank matrix.
///
/// The stored tolerance drives every rank decision made on behalf of the
/// subspace; `None` selects the scaled default from [`linalg`].
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
    tol: Option<f64>,
}

impl SubspaceBasis {
    /// Wraps an explicit basis. Fails when the ambient dimension is odd or
    /// the columns are rank deficient at the tolerance.
    pub fn new(columns: DMatrix<f64>, tol: Option<f64>) -> Result<Self> {
        if columns.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "ambient dimension {} is odd",
                columns.nrows()
            )));
        }
        let r = linalg::rank(&columns, tol);
        if r != columns.ncols() {
            return Err(Error::RankDeficient(format!(
                "{} columns span only {} directions",
                columns.ncols(),
                r
            )));
        }
        Ok(Self { columns, tol })
    }

    /// Orthonormalizes an arbitrary spanning set; rank decides the dimension.
    pub fn from_span(span: &DMatrix<f64>, tol: Option<f64>) -> Self {
        Self {
            columns: linalg::range_basis(span, tol),
            tol,
        }
    }

    /// The zero subspace of `R^{ambient}`.
    pub fn empty(ambient: usize) -> Self {
        Self {
            columns: DMatrix::zeros(ambient, 0),
            tol: None,
        }
    }

    /// All of `R^{ambient}`.
    pub fn full_space(ambient: usize) -> Self {
        Self {
            columns: DMatrix::identity(ambient, ambient),
            tol: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.columns.nrows()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn tol(&self) -> Option<f64> {
        self.tol
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        linalg::projector(&self.columns, self.tol)
    }

    /// Equality as subspaces (mutual containment at `tol`).
    pub fn eq_subspace(&self, other: &Self, tol: f64) -> bool {
        linalg::subspace_eq(&self.columns, &other.columns, tol)
    }

    /// Largest projection residual of `other`'s unit basis vectors outside
    /// this subspace; zero means containment.
    pub fn containment_residual(&self, other: &DMatrix<f64>) -> f64 {
        linalg::containment_residual(&self.columns, other, self.tol)
    }
}

/// Symplectic complement `W^~`, the kernel of `(W columns)ᵀ J_n`.
pub fn symplectic_complement(w: &SubspaceBasis) -> SubspaceBasis {
    let constraint = w.columns().transpose() * j_matrix(w.ambient() / 2);
    SubspaceBasis {
        columns: linalg::kernel_basis(&constraint, w.tol()),
        tol: w.tol(),
    }
}

/// Radical `W ∩ W^~`, computed in `W`-coordinates as `W · Ker(WᵀJ_nW)`.
///
/// Rank-nullity of the form's Gram matrix gives the radical dimension, so
/// this agrees with the generic intersection route but conditions better.
pub fn radical(w: &SubspaceBasis) -> SubspaceBasis {
    if w.dim() == 0 {
        return SubspaceBasis::empty(w.ambient());
    }
    let q = linalg::range_basis(w.columns(), w.tol());
    let gram = q.transpose() * j_matrix(w.ambient() / 2) * &q;
    let null = linalg::kernel_basis(&gram, w.tol());
    SubspaceBasis::from_span(&(&q * null), w.tol())
}

/// True when the form restricted to `W` is nondegenerate.
pub fn is_symplectic_subspace(w: &SubspaceBasis) -> bool {
    radical(w).dim() == 0
}

// ── symplectic bases ────────────────────────────────────────────────────────

/// Columns `(e_1, f_1, ..., e_l, f_l)` with `ω(e_i, f_j) = δ_ij` and all other
/// pairings zero, i.e. `TᵀJ_nT = J_l`.
#[derive(Debug, Clone)]
pub struct SymplecticBasis {
    t: DMatrix<f64>,
}

impl SymplecticBasis {
    pub fn pair_count(&self) -> usize {
        self.t.ncols() / 2
    }

    /// The `2n×2l` column matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// The `2l×2n` row form `Tᵀ`, the layout certificates use.
    pub fn rows(&self) -> DMatrix<f64> {
        self.t.transpose()
    }

    /// `‖TᵀJ_nT - J_l‖_F`.
    pub fn gram_residual(&self) -> f64 {
        let n = self.t.nrows() / 2;
        let l = self.pair_count();
        (self.t.transpose() * j_matrix(n) * &self.t - j_matrix(l)).norm()
    }
}

/// Symplectic Gram–Schmidt with pair pivoting.
///
/// Picks the remaining pair with the largest `|ω|` (ties resolved by scan
/// order, so the result is deterministic), normalizes it to `ω(e, f) = 1`,
/// sweeps the pair out of the rest via `w ← w + ω(f, w)e - ω(e, w)f`, and
/// recurses. An input whose form degenerates along the way is rejected;
/// feed only subspaces with trivial radical.
pub fn symplectic_gram_schmidt(w: &SubspaceBasis) -> Result<SymplecticBasis> {
    let d = w.dim();
    if d % 2 != 0 {
        return Err(Error::OddDimension(format!(
            "symplectic basis needs even dimension, got {d}"
        )));
    }
    let gate = w.tol().unwrap_or(1e-10);
    let mut rem: Vec<DVector<f64>> = w.columns().column_iter().map(|c| c.into_owned()).collect();
    let mut pairs: Vec<(DVector<f64>, DVector<f64>)> = Vec::with_capacity(d / 2);
    while !rem.is_empty() {
        let mut best = (0usize, 0usize);
        let mut best_val = 0.0f64;
        for i in 0..rem.len() {
            for j in (i + 1)..rem.len() {
                let val = sympl_form(&rem[i], &rem[j])?.abs()
                    / (rem[i].norm() * rem[j].norm());
                if val > best_val {
                    best_val = val;
                    best = (i, j);
                }
            }
        }
        if best_val <= gate {
            return Err(Error::DegenerateSubspace(format!(
                "no conjugate pair left among {} vectors (best |ω| = {best_val:.3e})",
                rem.len()
            )));
        }
        let f_raw = rem.remove(best.1);
        let e = rem.remove(best.0);
        let f = &f_raw / sympl_form(&e, &f_raw)?;
        for v in rem.iter_mut() {
            let a = sympl_form(&f, v)?;
            let b = sympl_form(&e, v)?;
            *v += &e * a - &f * b;
            let nrm = v.norm();
            if nrm <= gate {
                return Err(Error::DegenerateSubspace(
                    "basis collapsed during symplectic sweep".into(),
                ));
            }
            *v /= nrm;
        }
        pairs.push((e, f));
    }
    refine_pairs(&mut pairs)?;
    let mut t = DMatrix::zeros(w.ambient(), d);
    for (i, (e, f)) in pairs.iter().enumerate() {
        t.set_column(2 * i, e);
        t.set_column(2 * i + 1, f);
    }
    Ok(SymplecticBasis { t })
}

/// Second elimination sweep in the pair order the pivoting chose.
///
/// A small pivot makes the first sweep divide by a small `ω`, amplifying
/// the roundoff left in later vectors to `~eps/ω`. Sweeping the earlier
/// pairs out once more removes that contamination at second order, and the
/// final renormalization restores `ω(e_k, f_k) = 1` exactly.
fn refine_pairs(pairs: &mut [(DVector<f64>, DVector<f64>)]) -> Result<()> {
    for k in 0..pairs.len() {
        let (mut e, mut f) = pairs[k].clone();
        for i in 0..k {
            let (ei, fi) = &pairs[i];
            let (a, b) = (sympl_form(fi, &e)?, sympl_form(ei, &e)?);
            e += ei * a - fi * b;
            let (a, b) = (sympl_form(fi, &f)?, sympl_form(ei, &f)?);
            f += ei * a - fi * b;
        }
        f /= sympl_form(&e, &f)?;
        pairs[k] = (e, f);
    }
    Ok(())
}

// ── symplectic matrices ─────────────────────────────────────────────────────

/// `‖S J_n Sᵀ - J_l‖_F` for a `2l×2n` matrix `S`. Zero iff `S` carries the
/// canonical pairing onto its rows.
pub fn is_symplectic_matrix(s: &DMatrix<f64>) -> Result<f64> {
    if s.nrows() % 2 != 0 || s.ncols() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "symplectic test needs even dimensions, got {}×{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let n = s.ncols() / 2;
    let l = s.nrows() / 2;
    Ok((s * j_matrix(n) * s.transpose() - j_matrix(l)).norm())
}

/// Inverse of a square symplectic matrix, `S⁻¹ = -J_n Sᵀ J_n`.
///
/// Rejects inputs whose symplectic residual exceeds `tol` (default `1e-9`);
/// the closed form is only an inverse on the symplectic group.
pub fn symplectic_inverse(s: &DMatrix<f64>, tol: Option<f64>) -> Result<DMatrix<f64>> {
    if s.nrows() != s.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "inverse needs a square matrix, got {}×{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let tol = tol.unwrap_or(1e-9);
    let residual = is_symplectic_matrix(s)?;
    if residual > tol {
        return Err(Error::NotSymplectic { residual, tol });
    }
    let n = s.nrows() / 2;
    let j = j_matrix(n);
    Ok(-(&j * s.transpose() * &j))
}

/// `‖AᵀJ_n + J_nA‖_F`: zero iff `A` generates a one-parameter symplectic flow.
pub fn hamiltonian_residual(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != a.ncols() || a.nrows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected square even-dimensional matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let j = j_matrix(a.nrows() / 2);
    Ok((a.transpose() * &j + &j * a).norm())
}

// ── J-adapted orthonormal bases ─────────────────────────────────────────────

/// Orthonormal basis `(v_1, J_n v_1, ..., v_k, J_n v_k)` of a `J_n`-invariant
/// subspace `H`, returned with that column interleaving.
///
/// Seeds each `v_i` with the standard basis vector whose projection onto the
/// not-yet-covered part of `H` is largest (first index wins ties), so the
/// result is deterministic. Note `ω(v, J_n v) = -‖v‖²`: the pairs are
/// conjugate up to sign, and callers choose the ordering that makes the
/// pairing positive.
pub fn orthonormal_j_adapted_basis(h: &SubspaceBasis, tol: Option<f64>) -> Result<DMatrix<f64>> {
    let d = h.dim();
    let ambient = h.ambient();
    if d % 2 != 0 {
        return Err(Error::OddDimension(format!(
            "J-invariant subspaces have even dimension, got {d}"
        )));
    }
    let gate = tol.unwrap_or(1e-10);
    let p = h.projector();
    let invariance = h.containment_residual(&j_mul_mat(&(h.columns().clone())));
    if invariance > gate {
        return Err(Error::NotInvariant {
            residual: invariance,
            tol: gate,
        });
    }
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(d);
    while chosen.len() < d {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0f64;
        for i in 0..ambient {
            let mut cand = p.column(i).into_owned();
            for b in &chosen {
                let c = b.dot(&cand);
                cand -= b * c;
            }
            let nrm = cand.norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(cand);
            }
        }
        if best_norm <= gate {
            return Err(Error::RankDeficient(
                "ran out of directions while adapting basis".into(),
            ));
        }
        let v = best.unwrap() / best_norm;
        let mut jv = j_mul_vec(&v);
        for b in &chosen {
            let c = b.dot(&jv);
            jv -= b * c;
        }
        let c = v.dot(&jv);
        jv -= &v * c;
        let nrm = jv.norm();
        if nrm <= 0.5 {
            // J_n maps H to H isometrically, so the sweep can only nibble at
            // numerical dust; a real collapse means H was not invariant
            return Err(Error::NotInvariant {
                residual: 1.0 - nrm,
                tol: gate,
            });
        }
        jv /= nrm;
        chosen.push(v);
        chosen.push(jv);
    }
    let mut out = DMatrix::zeros(ambient, d);
    for (i, v) in chosen.iter().enumerate() {
        out.set_column(i, v);
    }
    Ok(out)
}
