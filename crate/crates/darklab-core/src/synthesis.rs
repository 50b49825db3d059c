//! Hamiltonian design: plant a prescribed dark block inside a fixed coupling.
//!
//! The coupling matrix `V` fixes which quadrature directions the channels
//! can see. Directions invisible in both position and momentum, i.e.
//! `H = Ker(V J_n) ∩ Ker(V)`, are the raw material: `H` is closed under
//! `J_n` (hence even-dimensional), and any Hamiltonian that keeps a
//! `J_n`-closed subspace of `H` invariant makes it dark, because both the
//! input and output maps vanish on it identically, for every kernel.
//!
//! Synthesis picks `k` conjugate pairs from `H`, writes the requested
//! `2k×2k` energy form on them, and leaves the bright complement free
//! (optionally filled with prescribed eigendirections). The construction is
//! exact up to rounding: the planted block reads back as
//! `S_D Ω S_Dᵀ = Ω_dark` and the dark generator is `J_k Ω_dark` on the nose.

use crate::analysis::{verify_certificate, DarkModeCertificate};
use crate::linalg;
use crate::model::{mat_to_rows, rows_to_mat, SystemSpec};
use crate::symplectic::{
    j_matrix, orthonormal_j_adapted_basis, symplectic_complement, symplectic_gram_schmidt,
    SubspaceBasis,
};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The directions no channel can see, in position or momentum:
/// `Ker(V J_n) ∩ Ker(V)`. Closed under `J_n` and even-dimensional; its
/// dimension is the dark capacity of the coupling.
pub fn dark_capacity_subspace(spec: &SystemSpec) -> SubspaceBasis {
    let n = spec.modes();
    let v = spec.coupling();
    let mut stacked = DMatrix::zeros(2 * v.nrows(), 2 * n);
    stacked
        .view_mut((0, 0), (v.nrows(), 2 * n))
        .copy_from(&(v * j_matrix(n)));
    stacked
        .view_mut((v.nrows(), 0), (v.nrows(), 2 * n))
        .copy_from(v);
    SubspaceBasis::from_span(&linalg::kernel_basis(&stacked, spec.tol()), spec.tol())
}

/// Requested dark block and optional bright completion.
///
/// `omega_dark` is the symmetric `2k×2k` energy form to plant. `mu` weights
/// the bright eigendirections (zero when omitted: the bright sector idles).
/// `alpha` optionally names those directions as columns in `R^{2n}`; when
/// omitted a deterministic orthonormal completion of the dark subspace is
/// used. When both are given they are matched by index, so `mu.len()` must
/// equal the number of directions.
#[derive(Debug, Clone)]
pub struct SynthesisTarget {
    pub omega_dark: DMatrix<f64>,
    pub mu: Option<Vec<f64>>,
    pub alpha: Option<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawTarget {
    omega_dark: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<Vec<f64>>>,
}

impl SynthesisTarget {
    pub fn new(omega_dark: DMatrix<f64>) -> Self {
        Self {
            omega_dark,
            mu: None,
            alpha: None,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawTarget =
            serde_json::from_str(s).map_err(|e| Error::MalformedSpec(e.to_string()))?;
        let r = raw.omega_dark.len();
        if r == 0 {
            return Err(Error::MalformedSpec("omega_dark is empty".into()));
        }
        let omega_dark = rows_to_mat(&raw.omega_dark, r, r, "omega_dark")?;
        let alpha = match raw.alpha {
            None => None,
            Some(rows) => {
                let count = rows.len();
                if count == 0 {
                    None
                } else {
                    let dim = rows[0].len();
                    // stored row-per-direction; used column-per-direction
                    Some(rows_to_mat(&rows, count, dim, "alpha")?.transpose())
                }
            }
        };
        if let Some(mu) = &raw.mu {
            if !mu.iter().all(|m| m.is_finite()) {
                return Err(Error::MalformedSpec("mu has non-finite entries".into()));
            }
        }
        Ok(Self {
            omega_dark,
            mu: raw.mu,
            alpha,
        })
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawTarget {
            omega_dark: mat_to_rows(&self.omega_dark),
            mu: self.mu.clone(),
            alpha: self.alpha.as_ref().map(|a| mat_to_rows(&a.transpose())),
        };
        serde_json::to_string_pretty(&raw).expect("target serialization cannot fail")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

/// Outcome of a synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    /// The input system with its Hamiltonian replaced by the synthesized one.
    pub spec: SystemSpec,
    /// Certificate for the planted subspace; `s_d` rows are the conjugate
    /// pairs the block was written on, `a_d = J_k Ω_dark`.
    pub certificate: DarkModeCertificate,
    /// `‖S_D Ω S_Dᵀ - Ω_dark‖`: how faithfully the block was planted.
    pub planted_residual: f64,
    /// Dark capacity of the coupling (dimension of the invisible subspace).
    pub capacity: usize,
}

/// Builds a Hamiltonian for `spec`'s coupling that realizes `target`.
///
/// The existing Hamiltonian of `spec` is ignored; everything else (coupling,
/// kernels, tolerance policy) carries over. `tol` gates the certificate
/// verification of the result.
pub fn synthesize(
    spec: &SystemSpec,
    target: &SynthesisTarget,
    tol: Option<f64>,
) -> Result<SynthesisResult> {
    let n = spec.modes();
    let dl = target.omega_dark.nrows();
    if dl == 0 || dl % 2 != 0 || target.omega_dark.ncols() != dl {
        return Err(Error::DimensionMismatch(format!(
            "omega_dark must be square with positive even size, got {}×{}",
            dl,
            target.omega_dark.ncols()
        )));
    }
    let asym = (&target.omega_dark - target.omega_dark.transpose()).norm();
    if asym > 1e-12 * (1.0 + target.omega_dark.norm()) {
        return Err(Error::NonSymmetricTarget(asym));
    }
    let h = dark_capacity_subspace(spec);
    let capacity = h.dim();
    if dl > capacity {
        return Err(Error::InsufficientDarkCapacity {
            requested: dl,
            available: capacity,
        });
    }
    let k = dl / 2;
    // adapted columns come interleaved (v_1, J v_1, v_2, J v_2, ...)
    let adapted = orthonormal_j_adapted_basis(&h, spec.tol())?;
    let mut s_d = DMatrix::zeros(dl, 2 * n);
    for i in 0..k {
        s_d.row_mut(2 * i)
            .copy_from(&adapted.column(2 * i + 1).transpose());
        s_d.row_mut(2 * i + 1)
            .copy_from(&adapted.column(2 * i).transpose());
    }
    // bright eigendirections: prescribed or the canonical completion
    let bright = match &target.alpha {
        Some(a) => {
            if a.nrows() != 2 * n {
                return Err(Error::DimensionMismatch(format!(
                    "alpha directions live in R^{}, phase space is R^{}",
                    a.nrows(),
                    2 * n
                )));
            }
            let p_dark = linalg::projector(&s_d.transpose(), spec.tol());
            let projected = a - &p_dark * a;
            for j in 0..projected.ncols() {
                // relative rank cutoffs would keep a numerically-zero leftover
                if projected.column(j).norm() <= 1e-8 * a.column(j).norm().max(1.0) {
                    return Err(Error::RankDeficient(format!(
                        "bright direction {j} lies in the dark block"
                    )));
                }
            }
            let ortho = linalg::range_basis(&projected, spec.tol());
            if ortho.ncols() != a.ncols() {
                return Err(Error::RankDeficient(format!(
                    "{} bright directions collapse to {} once the dark block is removed",
                    a.ncols(),
                    ortho.ncols()
                )));
            }
            ortho
        }
        None => linalg::kernel_basis(&s_d.clone(), spec.tol()),
    };
    let mu = match &target.mu {
        Some(m) => {
            if m.len() != bright.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} bright weights for {} bright directions",
                    m.len(),
                    bright.ncols()
                )));
            }
            m.clone()
        }
        None => vec![0.0; bright.ncols()],
    };
    let mut omega = s_d.transpose() * &target.omega_dark * &s_d;
    for (j, w) in mu.iter().enumerate() {
        if *w != 0.0 {
            let col = bright.column(j);
            omega += *w * &col * col.transpose();
        }
    }
    // the product is symmetric up to rounding; make it exact
    omega = (&omega + omega.transpose()) * 0.5;
    let out = spec.with_omega(omega)?;

    let w_d = SubspaceBasis::new(s_d.transpose(), spec.tol())?;
    let s_b = symplectic_gram_schmidt(&symplectic_complement(&w_d))?.rows();
    let a_d = j_matrix(k) * &target.omega_dark;
    let tol = tol.unwrap_or(crate::analysis::DEFAULT_CERT_TOL);
    let residuals = verify_certificate(&out, &s_d)?;
    let verified = residuals.max() <= tol;
    let planted_residual = (&s_d * out.omega() * s_d.transpose() - &target.omega_dark).norm();
    Ok(SynthesisResult {
        spec: out,
        certificate: DarkModeCertificate {
            s_d,
            s_b,
            a_d,
            residuals,
            verified,
            tol,
        },
        planted_residual,
        capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{detect_dark_modes, Verdict};
    use crate::model::KernelSpec;
    use crate::symplectic::j_mul_vec;
    use crate::threemode;
    use nalgebra::{Complex, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three_mode_target(m: f64, w: f64) -> SynthesisTarget {
        SynthesisTarget::new(DMatrix::from_row_slice(
            2,
            2,
            &[m * w * w, 0.0, 0.0, 1.0 / m],
        ))
    }

    #[test]
    fn capacity_of_the_three_mode_coupling_is_two() {
        let spec = threemode::system(1.0, 2.0).unwrap();
        let h = dark_capacity_subspace(&spec);
        assert_eq!(h.dim(), 2);
        let mut plane = DMatrix::zeros(6, 2);
        plane.set_column(0, &threemode::u1());
        plane.set_column(1, &threemode::u2());
        assert!(linalg::subspace_eq(h.columns(), &plane, 1e-12));
    }

    #[test]
    fn three_mode_synthesis_reproduces_the_closed_forms() {
        let (m, w) = (1.0, 2.0);
        let base = threemode::system(m, w)
            .unwrap()
            .with_omega(DMatrix::zeros(6, 6))
            .unwrap();
        let out = synthesize(&base, &three_mode_target(m, w), None).unwrap();
        assert!(
            (out.spec.omega() - threemode::closed_form_omega(m, w)).norm() < 1e-12,
            "planted Hamiltonian must match the closed form"
        );
        assert!((out.certificate.s_d.clone() - threemode::printed_s_d()).norm() < 1e-12);
        assert!(
            (out.certificate.a_d.clone() - threemode::dark_generator(m, w)).norm() < 1e-15,
            "dark generator is J_k omega_dark exactly"
        );
        assert!(out.certificate.verified);
        assert!(out.planted_residual < 1e-12);
        assert_eq!(out.capacity, 2);
        // and the detector agrees end to end
        match detect_dark_modes(&out.spec, None).unwrap() {
            Verdict::Exists(cert) => assert!(cert.verified),
            v => panic!("synthesized system must detect as dark, got {v:?}"),
        }
    }

    #[test]
    fn synthesis_rejects_oversized_and_malformed_targets() {
        let spec = threemode::system(1.0, 2.0).unwrap();
        let big = SynthesisTarget::new(DMatrix::identity(4, 4));
        match synthesize(&spec, &big, None) {
            Err(Error::InsufficientDarkCapacity {
                requested,
                available,
            }) => {
                assert_eq!(requested, 4);
                assert_eq!(available, 2);
            }
            r => panic!("expected capacity error, got {r:?}"),
        }
        let odd = SynthesisTarget::new(DMatrix::identity(3, 3));
        assert!(matches!(
            synthesize(&spec, &odd, None),
            Err(Error::DimensionMismatch(_))
        ));
        let mut skew = DMatrix::identity(2, 2);
        skew[(0, 1)] = 0.5;
        match synthesize(&spec, &SynthesisTarget::new(skew), None) {
            // ‖Ω - Ωᵀ‖_F for a single off-diagonal 0.5 is √(2·0.25)
            Err(Error::NonSymmetricTarget(a)) => assert!((a - 0.5f64.sqrt()).abs() < 1e-12),
            r => panic!("expected symmetry error, got {r:?}"),
        }
        let mut short_mu = three_mode_target(1.0, 2.0);
        short_mu.mu = Some(vec![1.0]);
        assert!(matches!(
            synthesize(&spec, &short_mu, None),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn bright_weights_leave_the_dark_block_untouched() {
        let (m, w) = (1.4, 0.9);
        let spec = threemode::system(m, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let plain = synthesize(&spec, &three_mode_target(m, w), None).unwrap();
        for _ in 0..10 {
            let mut t = three_mode_target(m, w);
            t.mu = Some((0..4).map(|_| rng.random_range(-2.0..2.0)).collect());
            let weighted = synthesize(&spec, &t, None).unwrap();
            assert_eq!(
                (weighted.certificate.s_d.clone() - &plain.certificate.s_d).norm(),
                0.0,
                "dark pairs must not depend on bright weights"
            );
            assert_eq!(
                (weighted.certificate.a_d.clone() - &plain.certificate.a_d).norm(),
                0.0
            );
            assert!(weighted.certificate.verified);
            assert!(weighted.planted_residual < 1e-12);
            // the two Hamiltonians agree on the dark subspace
            let sd = &plain.certificate.s_d;
            let diff = sd * (weighted.spec.omega() - plain.spec.omega()) * sd.transpose();
            assert!(diff.norm() < 1e-12);
        }
    }

    #[test]
    fn prescribed_bright_directions_are_respected() {
        let (m, w) = (1.0, 2.0);
        let spec = threemode::system(m, w).unwrap();
        let mut t = three_mode_target(m, w);
        // two directions in the bright complement of the alternating plane
        let mut alpha = DMatrix::zeros(6, 2);
        alpha.set_column(0, &(DVector::from_column_slice(&[1.0, 0.0, 2.0, 0.0, 1.0, 0.0]) / 6.0f64.sqrt()));
        alpha.set_column(1, &(DVector::from_column_slice(&[0.0, 1.0, 0.0, 2.0, 0.0, 1.0]) / 6.0f64.sqrt()));
        t.alpha = Some(alpha.clone());
        t.mu = Some(vec![3.0, 5.0]);
        let out = synthesize(&spec, &t, None).unwrap();
        assert!(out.certificate.verified);
        // each direction is an eigenvector of the synthesized form
        let om = out.spec.omega();
        for (j, want) in [(0usize, 3.0f64), (1, 5.0)] {
            let col = alpha.column(j);
            let resid = (om * col - want * col).norm();
            assert!(resid < 1e-12, "direction {j} must carry weight {want}");
        }
        // a direction inside the dark block is rejected
        let mut bad = three_mode_target(m, w);
        bad.alpha = Some(DMatrix::from_columns(&[threemode::u1() / 3.0f64.sqrt()]));
        bad.mu = Some(vec![1.0]);
        assert!(matches!(synthesize(&spec, &bad, None), Err(Error::RankDeficient(_))));
    }

    fn random_planted_system(
        rng: &mut ChaCha8Rng,
        n: usize,
        m: usize,
    ) -> (SystemSpec, DMatrix<f64>) {
        // a random conjugate plane and a coupling blind to it
        let v0 = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0)).normalize();
        let jv = j_mul_vec(&v0);
        let plane = DMatrix::from_columns(&[v0, jv]);
        let p = linalg::projector(&plane, None);
        let r = DMatrix::from_fn(2 * m, 2 * n, |_, _| rng.random_range(-1.0..1.0));
        let v = &r - &r * p;
        let kernels = (0..m)
            .map(|_| KernelSpec::Exponential {
                a: rng.random_range(0.5..2.0),
                lambda: rng.random_range(0.5..3.0),
            })
            .collect();
        let spec = SystemSpec::new(n, m, DMatrix::zeros(2 * n, 2 * n), v, kernels, None).unwrap();
        (spec, plane)
    }

    #[test]
    fn random_round_trips_recover_the_planted_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut done = 0;
        while done < 25 {
            let n = rng.random_range(2..=3usize);
            let m = rng.random_range(1..=2usize);
            let (base, _) = random_planted_system(&mut rng, n, m);
            let raw = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0));
            let omega_dark = (&raw + raw.transpose()) * 0.5;
            let mut target = SynthesisTarget::new(omega_dark.clone());
            let cap = dark_capacity_subspace(&base).dim();
            if cap < 2 {
                continue;
            }
            // nonzero bright weights keep the planted plane maximal
            target.mu = Some((0..2 * n - 2).map(|_| rng.random_range(0.5..2.0)).collect());
            let out = synthesize(&base, &target, None).unwrap();
            assert!(out.certificate.verified, "synthesis must verify");
            let planted: Vec<Complex<f64>> = (j_matrix(1) * &omega_dark)
                .complex_eigenvalues()
                .iter()
                .cloned()
                .collect();
            match detect_dark_modes(&out.spec, None).unwrap() {
                Verdict::Exists(cert) => {
                    let mut found: Vec<Complex<f64>> =
                        cert.a_d.complex_eigenvalues().iter().cloned().collect();
                    assert_eq!(found.len(), planted.len(), "detector must recover the plane");
                    let mut want = planted.clone();
                    let key = |c: &Complex<f64>| (c.re, c.im);
                    found.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
                    want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
                    for (f, w) in found.iter().zip(&want) {
                        assert!((f - w).norm() < 1e-8, "eigenvalue drift: {f} vs {w}");
                    }
                }
                v => panic!("expected Exists on synthesized system, got {v:?}"),
            }
            done += 1;
        }
    }

    #[test]
    fn target_json_round_trip() {
        let mut t = three_mode_target(1.0, 2.0);
        t.mu = Some(vec![0.5, 0.0, 1.5, 2.0]);
        let back = SynthesisTarget::from_json_str(&t.to_json_string()).unwrap();
        assert!((back.omega_dark - &t.omega_dark).norm() < 1e-15);
        assert_eq!(back.mu, t.mu);
        assert!(back.alpha.is_none());
        assert!(SynthesisTarget::from_json_str("{\"omega_dark\": []}").is_err());
        assert!(SynthesisTarget::from_json_str("{\"omega_dark\": [[1,2],[3]]}").is_err());
        assert!(SynthesisTarget::from_json_str("not json").is_err());
    }
}
