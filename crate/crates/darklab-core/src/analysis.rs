//! Dark-mode detection, certificates, and coupled/decoupled transforms.
//!
//! A dark mode of a system is a symplectic subspace `W_D` that is invariant
//! under `Ω J_n` and sits inside `Ker(V J_n)`. Membership is basis-free, so
//! the detector works with subspaces and only converts to quadrature maps
//! when it emits a certificate:
//! `S_D` (conjugate-pair rows spanning `W_D`), `S_B` (the symplectic
//! complement's pairs), and the dark generator
//! `A_D = -S_D J_n Ω J_n S_Dᵀ J_l`.
//!
//! The decision procedure is tiered:
//! 0. `Ker(V J_n) = {0}`: no room at all.
//! 1. `U :=` largest `ΩJ_n`-invariant subspace of `Ker(V J_n)`; empty `U`
//!    means no invariant directions survive the coupling.
//! 2. `U` with trivial radical is itself the maximal dark subspace; a totally
//!    isotropic `U` cannot contain a symplectic subspace of positive
//!    dimension, so the verdict is negative. Both answers are exact: any
//!    qualifying `W_D` is invariant and inside `Ker(V J_n)`, hence inside `U`.
//! 3. Degenerate-but-not-isotropic `U`: candidates are sums of real spectral
//!    subspaces of `A` restricted to `U` (eigenvalues grouped into
//!    `{±λ, ±λ̄}` quadruples, the pattern a symplectic pairing needs), tried
//!    in deterministic order, largest first. The first candidate whose
//!    certificate verifies wins; if none does the detector declines to
//!    answer rather than guess.
//!
//! Emitted certificates are always re-verified numerically, so an `Exists`
//! verdict never rests on the search path that produced it.

use crate::linalg;
use crate::model::{mat_to_rows, rows_to_mat, DerivedMatrices, SystemSpec};
use crate::symplectic::{
    self, j_matrix, radical, symplectic_complement, symplectic_gram_schmidt, symplectic_inverse,
    SubspaceBasis,
};
use crate::{Error, Result};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

/// Default certificate verification tolerance.
pub const DEFAULT_CERT_TOL: f64 = 1e-9;

/// Eigenvalue clustering distance for the spectral candidate search.
const CLUSTER_TOL: f64 = 1e-8;

/// Sampling horizon and resolution for kernel-activity scans.
const ACTIVITY_HORIZON: f64 = 10.0;
const ACTIVITY_SAMPLES: usize = 201;

// ── certificates ────────────────────────────────────────────────────────────

/// The four membership residuals, each zero in exact arithmetic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖S_D J_n S_Dᵀ - J_l‖`: the rows form conjugate pairs.
    pub ccr: f64,
    /// `‖V J_n S_Dᵀ‖`: the input field never reaches the subspace.
    pub noise_decoupling: f64,
    /// `‖(I - P) Ω J_n S_Dᵀ‖`: the drift keeps the subspace.
    pub invariance: f64,
    /// `‖Γ_o(t*) V J_n S_Dᵀ‖` at the most kernel-active sample time.
    pub output_decoupling: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.ccr
            .max(self.noise_decoupling)
            .max(self.invariance)
            .max(self.output_decoupling)
    }
}

/// A machine-checkable dark-mode certificate.
///
/// `s_d` is `2l×2n`, `s_b` is `(2n-2l)×2n`, `a_d` is the `2l×2l` generator
/// of the dark block. `verified` records whether every residual cleared
/// `tol` when the certificate was built or last checked.
#[derive(Debug, Clone)]
pub struct DarkModeCertificate {
    pub s_d: DMatrix<f64>,
    pub s_b: DMatrix<f64>,
    pub a_d: DMatrix<f64>,
    pub residuals: Residuals,
    pub verified: bool,
    pub tol: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCertificate {
    s_d: Vec<Vec<f64>>,
    s_b: Vec<Vec<f64>>,
    a_d: Vec<Vec<f64>>,
    residuals: Residuals,
    verified: bool,
    tol: f64,
}

impl DarkModeCertificate {
    /// Dark pair count `l`.
    pub fn pairs(&self) -> usize {
        self.s_d.nrows() / 2
    }

    /// The stacked transformation `[S_D; S_B]`, square when `s_b` completes.
    pub fn stacked_s(&self) -> DMatrix<f64> {
        let rows = self.s_d.nrows() + self.s_b.nrows();
        let mut s = DMatrix::zeros(rows, self.s_d.ncols());
        s.view_mut((0, 0), (self.s_d.nrows(), self.s_d.ncols()))
            .copy_from(&self.s_d);
        s.view_mut((self.s_d.nrows(), 0), (self.s_b.nrows(), self.s_b.ncols()))
            .copy_from(&self.s_b);
        s
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawCertificate {
            s_d: mat_to_rows(&self.s_d),
            s_b: mat_to_rows(&self.s_b),
            a_d: mat_to_rows(&self.a_d),
            residuals: self.residuals,
            verified: self.verified,
            tol: self.tol,
        };
        serde_json::to_string_pretty(&raw).expect("certificate serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawCertificate =
            serde_json::from_str(s).map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        let check = |what: &str, rows: &[Vec<f64>]| -> Result<(usize, usize)> {
            let r = rows.len();
            if r == 0 {
                return Err(Error::MalformedCertificate(format!("{what} is empty")));
            }
            let c = rows[0].len();
            if rows.iter().any(|row| row.len() != c) {
                return Err(Error::MalformedCertificate(format!("{what} is ragged")));
            }
            Ok((r, c))
        };
        let (dl, n2) = check("s_d", &raw.s_d)?;
        if dl % 2 != 0 || n2 % 2 != 0 || dl > n2 {
            return Err(Error::MalformedCertificate(format!(
                "s_d is {dl}×{n2}, expected an even 2l×2n block with 2l <= 2n"
            )));
        }
        let s_d = rows_to_mat(&raw.s_d, dl, n2, "s_d")
            .map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        let s_b = if raw.s_b.is_empty() {
            DMatrix::zeros(0, n2)
        } else {
            let (db, nb) = check("s_b", &raw.s_b)?;
            if nb != n2 || db != n2 - dl {
                return Err(Error::MalformedCertificate(format!(
                    "s_b is {db}×{nb}, expected {}×{n2}",
                    n2 - dl
                )));
            }
            rows_to_mat(&raw.s_b, db, nb, "s_b")
                .map_err(|e| Error::MalformedCertificate(e.to_string()))?
        };
        let (ar, ac) = check("a_d", &raw.a_d)?;
        if ar != dl || ac != dl {
            return Err(Error::MalformedCertificate(format!(
                "a_d is {ar}×{ac}, expected {dl}×{dl}"
            )));
        }
        let a_d = rows_to_mat(&raw.a_d, ar, ac, "a_d")
            .map_err(|e| Error::MalformedCertificate(e.to_string()))?;
        Ok(Self {
            s_d,
            s_b,
            a_d,
            residuals: raw.residuals,
            verified: raw.verified,
            tol: raw.tol,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

/// Why no dark mode exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoDarkModeReason {
    /// `Ker(V J_n)` is trivial: every direction is seen by some channel.
    FullRowRank,
    /// The coupling kernel contains no invariant subspace at all.
    EmptyInvariant,
    /// The maximal invariant subspace is totally isotropic, and a symplectic
    /// subspace of an isotropic space has dimension zero.
    TotallyIsotropic,
}

/// What the Tier-3 search looked at before giving up.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InconclusiveDiagnostics {
    pub dim_u: usize,
    pub dim_radical: usize,
    pub candidates_tried: usize,
}

/// Detection outcome.
#[derive(Debug, Clone)]
pub enum Verdict {
    Exists(DarkModeCertificate),
    None { reason: NoDarkModeReason },
    Inconclusive { diagnostics: InconclusiveDiagnostics },
}

// ── invariant subspace computation ──────────────────────────────────────────

/// Largest `a`-invariant subspace contained in `k`.
///
/// Fixed point of `V_{i+1} = V_i ∩ a⁻¹(V_i)` starting from `V_0 = k`; each
/// step is the kernel of the stacked constraints `[(I-P_i); (I-P_i) a]`
/// (membership and mapped membership). The dimension strictly decreases
/// until the fixed point, so the loop runs at most `dim k` times.
pub fn largest_invariant_subspace_in(k: &SubspaceBasis, a: &DMatrix<f64>) -> SubspaceBasis {
    let n2 = k.ambient();
    assert_eq!(a.nrows(), n2, "map and subspace must share the ambient space");
    assert_eq!(a.nrows(), a.ncols(), "invariance needs a square map");
    let scale = a.norm().max(1.0);
    let gate = k.tol().unwrap_or(1e-10);
    let mut cur = SubspaceBasis::from_span(k.columns(), k.tol());
    loop {
        if cur.dim() == 0 {
            return cur;
        }
        let eye = DMatrix::<f64>::identity(n2, n2);
        let complement = &eye - cur.projector();
        let mut stacked = DMatrix::zeros(2 * n2, n2);
        stacked.view_mut((0, 0), (n2, n2)).copy_from(&complement);
        stacked
            .view_mut((n2, 0), (n2, n2))
            .copy_from(&(&complement * a / scale));
        let next = linalg::kernel_basis(&stacked, Some(gate));
        if next.ncols() == cur.dim() {
            return cur;
        }
        cur = SubspaceBasis::from_span(&next, k.tol());
    }
}

// ── residual verification ───────────────────────────────────────────────────

/// First sample time in `[0, horizon]` at which the least active kernel is
/// strongest; output decoupling is certified there.
fn most_active_time(spec: &SystemSpec) -> f64 {
    let d = DerivedMatrices::new(spec);
    let mut best_t = 0.0f64;
    let mut best = -1.0f64;
    for i in 0..ACTIVITY_SAMPLES {
        let t = ACTIVITY_HORIZON * i as f64 / (ACTIVITY_SAMPLES - 1) as f64;
        let weakest = d
            .gamma_diag(t)
            .iter()
            .map(|(re, im)| re.hypot(*im))
            .fold(f64::INFINITY, f64::min);
        if weakest > best {
            best = weakest;
            best_t = t;
        }
    }
    best_t
}

/// Computes the four membership residuals of a dark quadrature map `s_d`.
pub fn verify_certificate(spec: &SystemSpec, s_d: &DMatrix<f64>) -> Result<Residuals> {
    let n = spec.modes();
    if s_d.ncols() != 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "s_d has {} columns for a {}-dimensional phase space",
            s_d.ncols(),
            2 * n
        )));
    }
    if s_d.nrows() == 0 || s_d.nrows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "s_d must have a positive even row count, got {}",
            s_d.nrows()
        )));
    }
    let d = DerivedMatrices::new(spec);
    let jn = j_matrix(n);
    let j_sdt = &jn * s_d.transpose();
    let ccr = symplectic::is_symplectic_matrix(s_d)?;
    let noise_decoupling = (spec.coupling() * &j_sdt).norm();
    let basis = s_d.transpose();
    let p = linalg::projector(&basis, spec.tol());
    let mapped = spec.omega() * &j_sdt;
    let invariance = (&mapped - &p * &mapped).norm();
    let t_star = most_active_time(spec);
    let output_decoupling = (d.gamma_o(t_star) * spec.coupling() * &j_sdt).norm();
    Ok(Residuals {
        ccr,
        noise_decoupling,
        invariance,
        output_decoupling,
    })
}

/// Dark-block generator induced by a pair basis: `-S_D J_n Ω J_n S_Dᵀ J_l`.
///
/// For a verified `s_d` this is the matrix that propagates the dark
/// coordinates; a certificate whose stored generator disagrees with it is
/// inconsistent even if the membership residuals pass.
pub fn induced_generator(spec: &SystemSpec, s_d: &DMatrix<f64>) -> DMatrix<f64> {
    let jn = j_matrix(spec.modes());
    let l = s_d.nrows() / 2;
    -(s_d * &jn * spec.omega() * &jn * s_d.transpose() * j_matrix(l))
}

/// Builds a certificate for the dark subspace `w_d`.
///
/// Symplectic Gram–Schmidt on `w_d` yields `S_D`; the same procedure on the
/// symplectic complement yields `S_B`; the generator is read off as
/// `A_D = -S_D J_n Ω J_n S_Dᵀ J_l`.
pub fn build_certificate(
    spec: &SystemSpec,
    w_d: &SubspaceBasis,
    tol: Option<f64>,
) -> Result<DarkModeCertificate> {
    let n = spec.modes();
    if w_d.ambient() != 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "subspace lives in R^{}, system in R^{}",
            w_d.ambient(),
            2 * n
        )));
    }
    let tol = tol.unwrap_or(DEFAULT_CERT_TOL);
    let dark = symplectic_gram_schmidt(w_d)?;
    let s_d = dark.rows();
    let bright = symplectic_gram_schmidt(&symplectic_complement(w_d))?;
    let s_b = bright.rows();
    let a_d = induced_generator(spec, &s_d);
    let residuals = verify_certificate(spec, &s_d)?;
    let verified = residuals.max() <= tol;
    Ok(DarkModeCertificate {
        s_d,
        s_b,
        a_d,
        residuals,
        verified,
        tol,
    })
}

// ── spectral candidate machinery ────────────────────────────────────────────

/// Connected components of the eigenvalue list under chaining at `tol`,
/// then merged so each component is closed under conjugation and negation
/// (`{±λ, ±λ̄}` quadruples). Returns index sets into `eigs`.
pub(crate) fn quadruple_groups(eigs: &[Complex<f64>], tol: f64) -> Vec<Vec<usize>> {
    let m = eigs.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let union = |parent: &mut Vec<usize>, i: usize, j: usize| {
        let (ri, rj) = (find(parent, i), find(parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    };
    let close = |a: Complex<f64>, b: Complex<f64>| (a - b).norm() <= tol;
    for i in 0..m {
        for j in (i + 1)..m {
            if close(eigs[i], eigs[j]) || close(eigs[i], eigs[j].conj()) || close(eigs[i], -eigs[j])
                || close(eigs[i], -eigs[j].conj())
            {
                union(&mut parent, i, j);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    // deterministic group order: lexicographic smallest member value
    let key = |g: &Vec<usize>| {
        g.iter()
            .map(|&i| (eigs[i].re, eigs[i].im))
            .fold((f64::INFINITY, f64::INFINITY), |acc, v| {
                if v < acc {
                    v
                } else {
                    acc
                }
            })
    };
    groups.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    groups
}

/// Real spectral subspace of `a` for the eigenvalue multiset `group`
/// (closed under conjugation): the kernel of the associated real polynomial
/// in `a`, with the dimension forced to the group size.
pub(crate) fn spectral_subspace(
    a: &DMatrix<f64>,
    eigs: &[Complex<f64>],
    group: &[usize],
) -> DMatrix<f64> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut p = eye.clone();
    let mut used = vec![false; group.len()];
    for (gi, &i) in group.iter().enumerate() {
        if used[gi] {
            continue;
        }
        used[gi] = true;
        let lam = eigs[i];
        let factor = if lam.im.abs() <= CLUSTER_TOL {
            a - &eye * lam.re
        } else {
            // pair with one unused conjugate partner
            if let Some((gj, _)) = group
                .iter()
                .enumerate()
                .find(|(gj, &j)| !used[*gj] && (eigs[j] - lam.conj()).norm() <= 10.0 * CLUSTER_TOL)
            {
                used[gj] = true;
            }
            let shifted = a - &eye * lam.re;
            &shifted * &shifted + &eye * (lam.im * lam.im)
        };
        p = &p * factor;
        let nrm = p.norm();
        if nrm > 0.0 {
            p /= nrm;
        }
    }
    let dim = group.len();
    let svd = p.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap()
    });
    let mut out = DMatrix::zeros(n, dim);
    for (k, &i) in idx.iter().take(dim).enumerate() {
        out.set_column(k, &v_t.row(i).transpose());
    }
    out
}

// ── detection ───────────────────────────────────────────────────────────────

/// Decides whether the system has a dark mode.
///
/// `tol` is the certificate verification tolerance (default
/// [`DEFAULT_CERT_TOL`]); rank decisions inside the search use the system's
/// own tolerance policy. The kernels never enter the decision: darkness is a
/// property of `(Ω, V)` alone.
pub fn detect_dark_modes(spec: &SystemSpec, tol: Option<f64>) -> Result<Verdict> {
    let n = spec.modes();
    let tol_cert = tol.unwrap_or(DEFAULT_CERT_TOL);
    let vjn = spec.coupling() * j_matrix(n);
    let k = SubspaceBasis::from_span(&linalg::kernel_basis(&vjn, spec.tol()), spec.tol());
    if k.dim() == 0 {
        return Ok(Verdict::None {
            reason: NoDarkModeReason::FullRowRank,
        });
    }
    let a = spec.omega() * j_matrix(n);
    let u = largest_invariant_subspace_in(&k, &a);
    if u.dim() == 0 {
        return Ok(Verdict::None {
            reason: NoDarkModeReason::EmptyInvariant,
        });
    }
    let r = radical(&u);
    if r.dim() == 0 {
        let cert = build_certificate(spec, &u, Some(tol_cert))?;
        return Ok(if cert.verified {
            Verdict::Exists(cert)
        } else {
            Verdict::Inconclusive {
                diagnostics: InconclusiveDiagnostics {
                    dim_u: u.dim(),
                    dim_radical: 0,
                    candidates_tried: 1,
                },
            }
        });
    }
    if r.dim() == u.dim() {
        return Ok(Verdict::None {
            reason: NoDarkModeReason::TotallyIsotropic,
        });
    }
    tier3_search(spec, &u, &r, &a, tol_cert)
}

fn tier3_search(
    spec: &SystemSpec,
    u: &SubspaceBasis,
    r: &SubspaceBasis,
    a: &DMatrix<f64>,
    tol_cert: f64,
) -> Result<Verdict> {
    let b_u = u.columns();
    let a_u = b_u.transpose() * a * b_u;
    let eigs: Vec<Complex<f64>> = a_u.complex_eigenvalues().iter().cloned().collect();
    let groups = quadruple_groups(&eigs, CLUSTER_TOL);
    let inconclusive = |tried: usize| Verdict::Inconclusive {
        diagnostics: InconclusiveDiagnostics {
            dim_u: u.dim(),
            dim_radical: r.dim(),
            candidates_tried: tried,
        },
    };
    if groups.len() > 16 {
        // subset enumeration would explode; decline rather than stall
        return Ok(inconclusive(0));
    }
    let spectral: Vec<DMatrix<f64>> = groups
        .iter()
        .map(|g| b_u * spectral_subspace(&a_u, &eigs, g))
        .collect();
    let mut masks: Vec<(usize, usize)> = (1usize..(1 << groups.len()))
        .map(|mask| {
            let dim: usize = (0..groups.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| groups[i].len())
                .sum();
            (mask, dim)
        })
        .collect();
    // largest candidates first, then insertion order for reproducibility
    masks.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let scale = a.norm().max(1.0);
    let mut tried = 0usize;
    for (mask, dim_hint) in masks {
        tried += 1;
        if dim_hint % 2 != 0 {
            continue;
        }
        let picked: Vec<&DMatrix<f64>> = (0..groups.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &spectral[i])
            .collect();
        let total: usize = picked.iter().map(|m| m.ncols()).sum();
        let mut span = DMatrix::zeros(u.ambient(), total);
        let mut col = 0;
        for m in picked {
            span.view_mut((0, col), (m.nrows(), m.ncols())).copy_from(m);
            col += m.ncols();
        }
        let w = SubspaceBasis::from_span(&span, spec.tol());
        if w.dim() == 0 || w.dim() % 2 != 0 || radical(&w).dim() != 0 {
            continue;
        }
        let drift = (a * w.columns()) / scale;
        if w.containment_residual(&drift) > 1e-8 {
            continue;
        }
        if let Ok(cert) = build_certificate(spec, &w, Some(tol_cert)) {
            if cert.verified {
                return Ok(Verdict::Exists(cert));
            }
        }
    }
    Ok(inconclusive(tried))
}

// ── transformed picture ─────────────────────────────────────────────────────

/// The system seen through a symplectic change of quadratures `x' = S x`.
#[derive(Debug, Clone)]
pub struct TransformedSystem {
    /// `S A_H S⁻¹`.
    pub a: DMatrix<f64>,
    /// `S B`.
    pub b: DMatrix<f64>,
    s: DMatrix<f64>,
    s_inv: DMatrix<f64>,
    derived: DerivedMatrices,
}

impl TransformedSystem {
    /// `Γ_o(t) V S⁻¹`: the output map in the new coordinates.
    pub fn output_map(&self, t: f64) -> DMatrix<f64> {
        self.derived.gamma_o(t) * self.derived.v() * &self.s_inv
    }

    /// `V S⁻¹` (the kernel-independent factor of the output map).
    pub fn output_coupling(&self) -> DMatrix<f64> {
        self.derived.v() * &self.s_inv
    }

    /// `S A_Γ(t) S⁻¹`: the memory matrix in the new coordinates.
    pub fn memory(&self, t: f64) -> DMatrix<f64> {
        &self.s * self.derived.a_gamma(t) * &self.s_inv
    }
}

/// Rewrites the dynamics in the coordinates `x' = S x` for a square
/// symplectic `S` (tolerance as in [`symplectic_inverse`]).
pub fn transform_system(
    spec: &SystemSpec,
    s: &DMatrix<f64>,
    tol: Option<f64>,
) -> Result<TransformedSystem> {
    if s.nrows() != 2 * spec.modes() || s.ncols() != 2 * spec.modes() {
        return Err(Error::DimensionMismatch(format!(
            "transform is {}×{}, phase space has dimension {}",
            s.nrows(),
            s.ncols(),
            2 * spec.modes()
        )));
    }
    let s_inv = symplectic_inverse(s, tol)?;
    let derived = DerivedMatrices::new(spec);
    Ok(TransformedSystem {
        a: s * derived.a_h() * &s_inv,
        b: s * derived.b(),
        s: s.clone(),
        s_inv,
        derived,
    })
}

// ── structural capacity ─────────────────────────────────────────────────────

/// Capacity check for a specific certificate transform.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CertificateCapacity {
    /// `dim(Ker(V_S J_n) ∩ Ker(V_S))` for `V_S = V J_n Sᵀ`.
    pub d_s: usize,
    /// Dark dimension the certificate claims (`2l`).
    pub required: usize,
    /// Whether `d_s >= required`, a necessary condition for the claim.
    pub satisfied: bool,
}

/// Coupling obstruction report.
///
/// `d0 = dim(Ker(V J_n) ∩ Ker(V))` counts quadrature directions the coupling
/// forbids entirely (the identity-transform instance of `d_s`). A dark mode
/// of dimension `2l` forces `d_s >= 2l` for its own transform, so `d_s`
/// below the claim refutes a certificate cheaply.
#[derive(Debug, Clone, Serialize)]
pub struct ForbiddenCouplingReport {
    pub d0: usize,
    pub with_certificate: Option<CertificateCapacity>,
}

fn doubly_null_dimension(v: &DMatrix<f64>, n: usize, tol: Option<f64>) -> usize {
    let mut stacked = DMatrix::zeros(2 * v.nrows(), 2 * n);
    stacked
        .view_mut((0, 0), (v.nrows(), 2 * n))
        .copy_from(&(v * j_matrix(n)));
    stacked
        .view_mut((v.nrows(), 0), (v.nrows(), 2 * n))
        .copy_from(v);
    linalg::kernel_basis(&stacked, tol).ncols()
}

pub fn forbidden_coupling_report(
    spec: &SystemSpec,
    cert: Option<&DarkModeCertificate>,
) -> ForbiddenCouplingReport {
    let n = spec.modes();
    let d0 = doubly_null_dimension(spec.coupling(), n, spec.tol());
    let with_certificate = cert.map(|c| {
        let s = c.stacked_s();
        let v_s = spec.coupling() * j_matrix(n) * s.transpose();
        let d_s = doubly_null_dimension(&v_s, n, spec.tol());
        let required = c.s_d.nrows();
        CertificateCapacity {
            d_s,
            required,
            satisfied: d_s >= required,
        }
    });
    ForbiddenCouplingReport {
        d0,
        with_certificate,
    }
}
