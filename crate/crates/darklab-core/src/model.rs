//! System descriptions and derived state-space matrices.
//!
//! A system couples `n` modes to `M` field channels. In quadrature
//! coordinates `x = (q_1, p_1, ..., q_n, p_n)` the pieces are:
//! - a symmetric Hamiltonian matrix `Ω` (2n×2n);
//! - a real coupling matrix `V` (2M×2n), either given directly or assembled
//!   from complex coupling vectors `v_j` as row pairs
//!   `√2 (Re v_j)ᵀ, √2 (Im v_j)ᵀ`;
//! - one scalar memory kernel `γ_j(t)` per channel.
//!
//! The mean dynamics then reads
//! `ẋ(t) = A_H x(t) + ∫₀ᵗ A_Γ(t-τ) x(τ) dτ + B u(t)` with output
//! `y(t) = ∫₀ᵗ Γ_o(t-τ) V x(τ) dτ + u(t)`, where
//! `A_H = J_n Ω`, `B = J_n Vᵀ J_M`, `A_Γ(t) = J_n Vᵀ Γ_K(t) V`, and the
//! kernel blocks are `Γ_K = Im Γ ⊗ I_2 + Re Γ ⊗ J`,
//! `Γ_o = Re Γ ⊗ I_2 - Im Γ ⊗ J` for `Γ(t) = diag(γ_j(t))`.

use crate::symplectic::{j_matrix, j_mul_mat};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

// ── kernels ─────────────────────────────────────────────────────────────────

/// A scalar memory kernel, evaluable at any `t ≥ 0`.
///
/// Real-valued families cover the supported theory; complex kernels are
/// accepted only as lookup tables carrying an imaginary part and are
/// experimental. Instantaneous (delta-like) damping has no representation
/// here on purpose: these kernels are ordinary function values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `γ(t) = a e^{-λ t}`, `λ > 0`.
    Exponential { a: f64, lambda: f64 },
    /// `γ(t) = a e^{-t² / (2σ²)}`, `σ > 0`.
    Gaussian { a: f64, sigma: f64 },
    /// Piecewise-linear interpolation of tabulated samples; zero outside the
    /// tabulated range. `values_im` makes the kernel complex (experimental).
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values_im: Option<Vec<f64>>,
    },
}

impl KernelSpec {
    /// Validates parameters; called for every kernel at system load.
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Exponential { a, lambda } => {
                if !a.is_finite() || !lambda.is_finite() || *lambda <= 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "exponential kernel needs finite a and lambda > 0, got a={a}, lambda={lambda}"
                    )));
                }
            }
            KernelSpec::Gaussian { a, sigma } => {
                if !a.is_finite() || !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "gaussian kernel needs finite a and sigma > 0, got a={a}, sigma={sigma}"
                    )));
                }
            }
            KernelSpec::Table {
                times,
                values,
                values_im,
            } => {
                if times.len() < 2 {
                    return Err(Error::InvalidKernel(
                        "table kernel needs at least two samples".into(),
                    ));
                }
                if values.len() != times.len() {
                    return Err(Error::InvalidKernel(format!(
                        "table kernel has {} times but {} values",
                        times.len(),
                        values.len()
                    )));
                }
                if let Some(im) = values_im {
                    if im.len() != times.len() {
                        return Err(Error::InvalidKernel(format!(
                            "table kernel has {} times but {} imaginary values",
                            times.len(),
                            im.len()
                        )));
                    }
                    if !im.iter().all(|v| v.is_finite()) {
                        return Err(Error::InvalidKernel("non-finite table value".into()));
                    }
                }
                if !times.iter().all(|v| v.is_finite()) || !values.iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidKernel("non-finite table entry".into()));
                }
                if !times.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::InvalidKernel(
                        "table times must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Kernel value at `t` as `(re, im)`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            KernelSpec::Exponential { a, lambda } => (a * (-lambda * t).exp(), 0.0),
            KernelSpec::Gaussian { a, sigma } => ((a * (-t * t / (2.0 * sigma * sigma)).exp()), 0.0),
            KernelSpec::Table {
                times,
                values,
                values_im,
            } => {
                let interp = |ys: &[f64]| -> f64 {
                    if t < times[0] || t > *times.last().unwrap() {
                        return 0.0;
                    }
                    let idx = times.partition_point(|&x| x <= t);
                    if idx == 0 {
                        return ys[0];
                    }
                    if idx >= times.len() {
                        return *ys.last().unwrap();
                    }
                    let (t0, t1) = (times[idx - 1], times[idx]);
                    let w = (t - t0) / (t1 - t0);
                    ys[idx - 1] * (1.0 - w) + ys[idx] * w
                };
                let re = interp(values);
                let im = values_im.as_ref().map_or(0.0, |v| interp(v));
                (re, im)
            }
        }
    }

    /// True for table kernels carrying an imaginary part.
    pub fn is_complex(&self) -> bool {
        matches!(
            self,
            KernelSpec::Table {
                values_im: Some(_),
                ..
            }
        )
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::Exponential { .. } => "exponential",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Table { .. } => "table",
        }
    }
}

// ── coupling assembly ───────────────────────────────────────────────────────

/// Builds the real `2M×2n` coupling matrix from complex coupling vectors:
/// rows `2j, 2j+1` are `√2 (Re v_j)ᵀ` and `√2 (Im v_j)ᵀ`.
pub fn build_v(complex_vectors: &[Vec<[f64; 2]>], n: usize) -> Result<DMatrix<f64>> {
    let m = complex_vectors.len();
    let mut v = DMatrix::zeros(2 * m, 2 * n);
    let s2 = 2.0f64.sqrt();
    for (j, vec) in complex_vectors.iter().enumerate() {
        if vec.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "coupling vector {j} has {} entries, expected {}",
                vec.len(),
                2 * n
            )));
        }
        for (c, z) in vec.iter().enumerate() {
            v[(2 * j, c)] = s2 * z[0];
            v[(2 * j + 1, c)] = s2 * z[1];
        }
    }
    Ok(v)
}

// ── system description ──────────────────────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawCoupling {
    ComplexVectors { complex_vectors: Vec<Vec<[f64; 2]>> },
    Direct {
        #[serde(rename = "V")]
        v: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSystem {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    omega: Vec<Vec<f64>>,
    coupling: RawCoupling,
    kernels: Vec<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

/// A validated system: mode/channel counts, symmetric `Ω`, coupling `V`,
/// one kernel per channel, and an optional rank tolerance override.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    n: usize,
    m: usize,
    omega: DMatrix<f64>,
    v: DMatrix<f64>,
    kernels: Vec<KernelSpec>,
    tol: Option<f64>,
}

impl SystemSpec {
    /// Validates and normalizes the pieces. `omega` is symmetrized; an
    /// asymmetry above `1e-12` (scaled by the matrix norm) is logged.
    pub fn new(
        n: usize,
        m: usize,
        omega: DMatrix<f64>,
        v: DMatrix<f64>,
        kernels: Vec<KernelSpec>,
        tol: Option<f64>,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::DimensionMismatch(
                "need at least one mode and one channel".into(),
            ));
        }
        if omega.nrows() != 2 * n || omega.ncols() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "omega is {}×{}, expected {}×{}",
                omega.nrows(),
                omega.ncols(),
                2 * n,
                2 * n
            )));
        }
        if v.nrows() != 2 * m || v.ncols() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "coupling matrix is {}×{}, expected {}×{}",
                v.nrows(),
                v.ncols(),
                2 * m,
                2 * n
            )));
        }
        if kernels.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} kernels for {} channels",
                kernels.len(),
                m
            )));
        }
        for k in &kernels {
            k.validate()?;
            if k.is_complex() {
                log::warn!("complex kernel tables are experimental");
            }
        }
        if let Some(t) = tol {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::MalformedSpec(format!("tol must be >= 0, got {t}")));
            }
        }
        let asym = (&omega - omega.transpose()).norm();
        if asym > 1e-12 * (1.0 + omega.norm()) {
            log::warn!("omega asymmetry {asym:.3e} removed by symmetrization");
        }
        let omega = (&omega + omega.transpose()) * 0.5;
        Ok(Self {
            n,
            m,
            omega,
            v,
            kernels,
            tol,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawSystem =
            serde_json::from_str(s).map_err(|e| Error::MalformedSpec(e.to_string()))?;
        let omega = rows_to_mat(&raw.omega, 2 * raw.n, 2 * raw.n, "omega")?;
        let v = match &raw.coupling {
            RawCoupling::ComplexVectors { complex_vectors } => {
                if complex_vectors.len() != raw.m {
                    return Err(Error::DimensionMismatch(format!(
                        "{} coupling vectors for {} channels",
                        complex_vectors.len(),
                        raw.m
                    )));
                }
                build_v(complex_vectors, raw.n)?
            }
            RawCoupling::Direct { v } => rows_to_mat(v, 2 * raw.m, 2 * raw.n, "V")?,
        };
        Self::new(raw.n, raw.m, omega, v, raw.kernels, raw.tol)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawSystem {
            n: self.n,
            m: self.m,
            omega: mat_to_rows(&self.omega),
            coupling: RawCoupling::Direct {
                v: mat_to_rows(&self.v),
            },
            kernels: self.kernels.clone(),
            tol: self.tol,
        };
        serde_json::to_string_pretty(&raw).expect("system serialization cannot fail")
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    pub fn tol(&self) -> Option<f64> {
        self.tol
    }

    /// Copy with a different Hamiltonian matrix, keeping coupling and kernels.
    pub fn with_omega(&self, omega: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.n,
            self.m,
            omega,
            self.v.clone(),
            self.kernels.clone(),
            self.tol,
        )
    }

    /// True when every kernel is a pure exponential, the family the
    /// memoryless embedding integrator supports exactly.
    pub fn all_kernels_exponential(&self) -> bool {
        self.kernels
            .iter()
            .all(|k| matches!(k, KernelSpec::Exponential { .. }))
    }
}

pub(crate) fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub(crate) fn rows_to_mat(
    rows: &[Vec<f64>],
    expect_r: usize,
    expect_c: usize,
    what: &str,
) -> Result<DMatrix<f64>> {
    if rows.len() != expect_r || rows.iter().any(|r| r.len() != expect_c) {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be {expect_r}×{expect_c}"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().cloned().collect();
    if !flat.iter().all(|v| v.is_finite()) {
        return Err(Error::MalformedSpec(format!("{what} has non-finite entries")));
    }
    Ok(DMatrix::from_row_slice(expect_r, expect_c, &flat))
}

// ── derived matrices ────────────────────────────────────────────────────────

/// The constant matrices of the state-space form, plus kernel-block
/// evaluators. `a_h = J_n Ω`, `b = J_n Vᵀ J_M`.
#[derive(Debug, Clone)]
pub struct DerivedMatrices {
    n: usize,
    m: usize,
    a_h: DMatrix<f64>,
    b: DMatrix<f64>,
    v: DMatrix<f64>,
    kernels: Vec<KernelSpec>,
}

impl DerivedMatrices {
    pub fn new(spec: &SystemSpec) -> Self {
        let a_h = j_mul_mat(&(spec.omega().clone()));
        let b = j_mul_mat(&(spec.coupling().transpose() * j_matrix(spec.channels())));
        Self {
            n: spec.modes(),
            m: spec.channels(),
            a_h,
            b,
            v: spec.coupling().clone(),
            kernels: spec.kernels().to_vec(),
        }
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn a_h(&self) -> &DMatrix<f64> {
        &self.a_h
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Kernel values at `t`, one `(re, im)` per channel.
    pub fn gamma_diag(&self, t: f64) -> Vec<(f64, f64)> {
        self.kernels.iter().map(|k| k.eval(t)).collect()
    }

    /// `Γ_K(t) = Im Γ ⊗ I_2 + Re Γ ⊗ J`: per-channel blocks
    /// `[[im, re], [-re, im]]`.
    pub fn gamma_k(&self, t: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * self.m, 2 * self.m);
        for (j, (re, im)) in self.gamma_diag(t).into_iter().enumerate() {
            out[(2 * j, 2 * j)] = im;
            out[(2 * j, 2 * j + 1)] = re;
            out[(2 * j + 1, 2 * j)] = -re;
            out[(2 * j + 1, 2 * j + 1)] = im;
        }
        out
    }

    /// `Γ_o(t) = Re Γ ⊗ I_2 - Im Γ ⊗ J`: per-channel blocks
    /// `[[re, -im], [im, re]]`.
    pub fn gamma_o(&self, t: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(2 * self.m, 2 * self.m);
        for (j, (re, im)) in self.gamma_diag(t).into_iter().enumerate() {
            out[(2 * j, 2 * j)] = re;
            out[(2 * j, 2 * j + 1)] = -im;
            out[(2 * j + 1, 2 * j)] = im;
            out[(2 * j + 1, 2 * j + 1)] = re;
        }
        out
    }

    /// Memory matrix `A_Γ(t) = J_n Vᵀ Γ_K(t) V`.
    pub fn a_gamma(&self, t: f64) -> DMatrix<f64> {
        j_mul_mat(&(self.v.transpose() * self.gamma_k(t) * &self.v))
    }

    /// Kernel-independent factor of the memory term for channel `j`:
    /// `C_j = J_n Vᵀ (E_jj ⊗ J) V`, so `A_Γ(t) = Σ_j γ_j(t) C_j` for real
    /// kernels.
    pub fn channel_memory_matrix(&self, j: usize) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(2 * self.m, 2 * self.m);
        e[(2 * j, 2 * j + 1)] = 1.0;
        e[(2 * j + 1, 2 * j)] = -1.0;
        j_mul_mat(&(self.v.transpose() * e * &self.v))
    }

    /// Rows `2j, 2j+1` of `V`: the quadrature map feeding channel `j`.
    pub fn v_row_pair(&self, j: usize) -> DMatrix<f64> {
        self.v.rows(2 * j, 2).into_owned()
    }
}

// ── memory-activity check ───────────────────────────────────────────────────

/// Activity of one channel's kernel on a sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelActivity {
    /// First sample time where `|γ|` attains its grid maximum.
    pub t1: f64,
    /// That maximum magnitude.
    pub magnitude: f64,
    /// Whether the magnitude clears the activity gate.
    pub active: bool,
}

/// Per-channel kernel activity report.
///
/// The theory needs some time `t1` at which every kernel is nonzero; output
/// decoupling is certified at the reported per-channel `t1`. Kernels that
/// never clear the gate on the grid are flagged.
#[derive(Debug, Clone, Serialize)]
pub struct Assumption1Report {
    pub channels: Vec<ChannelActivity>,
    pub all_active: bool,
}

pub fn assumption1_check(spec: &SystemSpec, horizon: f64, samples: usize) -> Assumption1Report {
    let gate = spec.tol().unwrap_or(1e-12);
    let samples = samples.max(2);
    let channels: Vec<ChannelActivity> = spec
        .kernels()
        .iter()
        .map(|k| {
            let mut best_t = 0.0;
            let mut best_mag = -1.0;
            for i in 0..samples {
                let t = horizon * i as f64 / (samples - 1) as f64;
                let (re, im) = k.eval(t);
                let mag = re.hypot(im);
                if mag > best_mag {
                    best_mag = mag;
                    best_t = t;
                }
            }
            ChannelActivity {
                t1: best_t,
                magnitude: best_mag,
                active: best_mag > gate,
            }
        })
        .collect();
    let all_active = channels.iter().all(|c| c.active);
    Assumption1Report {
        channels,
        all_active,
    }
}

/// Residual of the canonical pairing carried by the rows of `S`:
/// `‖S J_n Sᵀ - J_l‖_F`. Zero for quadrature maps of genuine mode sets.
pub fn ccr_matrix_check(s: &DMatrix<f64>) -> Result<f64> {
    crate::symplectic::is_symplectic_matrix(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic;
    use nalgebra::DVector;

    fn three_mode_vectors() -> Vec<Vec<[f64; 2]>> {
        let s = 1.0 / 2.0f64.sqrt();
        // L1 reads modes 1+2, L2 reads modes 2+3, each as (q + i p)/√2
        vec![
            vec![[s, 0.0], [0.0, s], [s, 0.0], [0.0, s], [0.0, 0.0], [0.0, 0.0]],
            vec![[0.0, 0.0], [0.0, 0.0], [s, 0.0], [0.0, s], [s, 0.0], [0.0, s]],
        ]
    }

    fn printed_v() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            6,
            &[
                1.0, 0.0, 1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, 0.0, 1.0,
            ],
        )
    }

    fn sample_spec() -> SystemSpec {
        SystemSpec::new(
            3,
            2,
            DMatrix::zeros(6, 6),
            printed_v(),
            vec![
                KernelSpec::Exponential { a: 1.0, lambda: 1.0 },
                KernelSpec::Exponential { a: 0.5, lambda: 2.0 },
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn build_v_three_mode_coupling() {
        let v = build_v(&three_mode_vectors(), 3).unwrap();
        assert!((v - printed_v()).norm() < 1e-14);
    }

    #[test]
    fn build_v_single_complex_entry() {
        // v = ((1+i)/√2, 0): both rows are √2·(1/√2) e_1ᵀ = e_1ᵀ
        let s = 1.0 / 2.0f64.sqrt();
        let v = build_v(&[vec![[s, s], [0.0, 0.0]]], 1).unwrap();
        assert!((v - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn drift_is_j_times_omega_and_hamiltonian() {
        let omega = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let spec = SystemSpec::new(
            1,
            1,
            omega,
            DMatrix::zeros(2, 2),
            vec![KernelSpec::Exponential { a: 1.0, lambda: 1.0 }],
            None,
        )
        .unwrap();
        let d = DerivedMatrices::new(&spec);
        assert_eq!(d.a_h(), &symplectic::j_matrix(1));
        assert!(symplectic::hamiltonian_residual(d.a_h()).unwrap() < 1e-14);
    }

    #[test]
    fn input_matrix_of_identity_coupling_is_minus_identity() {
        // V = I_2 for one mode/one channel: B = J Vᵀ J = J² = -I
        let spec = SystemSpec::new(
            1,
            1,
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            vec![KernelSpec::Exponential { a: 1.0, lambda: 1.0 }],
            None,
        )
        .unwrap();
        let d = DerivedMatrices::new(&spec);
        assert!((d.b() + DMatrix::<f64>::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn real_kernel_blocks_have_the_advertised_shape() {
        let spec = sample_spec();
        let d = DerivedMatrices::new(&spec);
        for &t in &[0.0f64, 0.3, 1.7] {
            let g1 = (-t).exp();
            let g2 = 0.5 * (-2.0 * t).exp();
            let go = d.gamma_o(t);
            let expected =
                DMatrix::from_diagonal(&DVector::from_row_slice(&[g1, g1, g2, g2]));
            assert!((go - &expected).norm() < 1e-14);
            let gk = d.gamma_k(t);
            // Re Γ ⊗ J: blocks [[0, γ], [-γ, 0]]
            assert!((gk[(0, 1)] - g1).abs() < 1e-14);
            assert!((gk[(1, 0)] + g1).abs() < 1e-14);
            assert!((gk[(2, 3)] - g2).abs() < 1e-14);
            assert!(gk[(0, 0)].abs() < 1e-14);
        }
    }

    #[test]
    fn output_block_determinant_is_product_of_squared_magnitudes() {
        let spec = sample_spec();
        let d = DerivedMatrices::new(&spec);
        let t1 = 0.3f64;
        let g1 = (-t1).exp();
        let g2 = 0.5 * (-2.0 * t1).exp();
        let det = d.gamma_o(t1).determinant();
        assert!((det - g1 * g1 * g2 * g2).abs() < 1e-14);
    }

    #[test]
    fn complex_table_kernel_blocks() {
        let k = KernelSpec::Table {
            times: vec![0.0, 1.0],
            values: vec![2.0, 2.0],
            values_im: Some(vec![0.5, 0.5]),
        };
        let spec = SystemSpec::new(
            1,
            1,
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            vec![k],
            None,
        )
        .unwrap();
        let d = DerivedMatrices::new(&spec);
        let gk = d.gamma_k(0.5);
        assert!((gk - DMatrix::from_row_slice(2, 2, &[0.5, 2.0, -2.0, 0.5])).norm() < 1e-14);
        let go = d.gamma_o(0.5);
        assert!((go - DMatrix::from_row_slice(2, 2, &[2.0, -0.5, 0.5, 2.0])).norm() < 1e-14);
    }

    #[test]
    fn memory_matrix_matches_explicit_product() {
        let spec = sample_spec();
        let d = DerivedMatrices::new(&spec);
        for &t in &[0.0, 0.4, 2.0] {
            let explicit =
                symplectic::j_matrix(3) * spec.coupling().transpose() * d.gamma_k(t) * spec.coupling();
            assert!((d.a_gamma(t) - explicit).norm() < 1e-13);
        }
    }

    #[test]
    fn memory_matrix_decomposes_over_channels_for_real_kernels() {
        let spec = sample_spec();
        let d = DerivedMatrices::new(&spec);
        let t = 0.7;
        let mut sum = DMatrix::zeros(6, 6);
        for (j, (re, _)) in d.gamma_diag(t).into_iter().enumerate() {
            sum += d.channel_memory_matrix(j) * re;
        }
        assert!((d.a_gamma(t) - sum).norm() < 1e-13);
    }

    #[test]
    fn table_kernel_interpolates_linearly_and_vanishes_outside() {
        let k = KernelSpec::Table {
            times: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 2.0, 0.0],
            values_im: None,
        };
        assert_eq!(k.eval(0.5).0, 1.0);
        assert_eq!(k.eval(1.0).0, 2.0);
        assert_eq!(k.eval(1.75).0, 0.5);
        assert_eq!(k.eval(2.5).0, 0.0);
        assert_eq!(k.eval(-0.1).0, 0.0);
    }

    #[test]
    fn kernel_validation_rejects_bad_parameters() {
        assert!(KernelSpec::Exponential { a: 1.0, lambda: 0.0 }.validate().is_err());
        assert!(KernelSpec::Gaussian { a: 1.0, sigma: -1.0 }.validate().is_err());
        assert!(KernelSpec::Table {
            times: vec![0.0],
            values: vec![1.0],
            values_im: None
        }
        .validate()
        .is_err());
        assert!(KernelSpec::Table {
            times: vec![0.0, 0.0],
            values: vec![1.0, 1.0],
            values_im: None
        }
        .validate()
        .is_err());
    }

    #[test]
    fn activity_report_finds_kernel_peaks() {
        let spec = sample_spec();
        let report = assumption1_check(&spec, 5.0, 101);
        assert!(report.all_active);
        assert_eq!(report.channels[0].t1, 0.0);
        assert!((report.channels[0].magnitude - 1.0).abs() < 1e-14);
        assert!((report.channels[1].magnitude - 0.5).abs() < 1e-14);

        let dead = SystemSpec::new(
            1,
            1,
            DMatrix::zeros(2, 2),
            DMatrix::identity(2, 2),
            vec![KernelSpec::Table {
                times: vec![0.0, 1.0],
                values: vec![0.0, 0.0],
                values_im: None,
            }],
            None,
        )
        .unwrap();
        assert!(!assumption1_check(&dead, 5.0, 11).all_active);
    }

    #[test]
    fn ccr_check_accepts_identity_and_rejects_isotropic_rows() {
        assert!(ccr_matrix_check(&DMatrix::identity(4, 4)).unwrap() < 1e-15);
        let s = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(ccr_matrix_check(&s).unwrap() > 1.0);
    }

    #[test]
    fn json_round_trip_with_both_coupling_forms() {
        let json = r#"{
            "n": 3, "M": 2,
            "omega": [[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0]],
            "coupling": {"complex_vectors": [
                [[0.7071067811865476,0],[0,0.7071067811865476],[0.7071067811865476,0],[0,0.7071067811865476],[0,0],[0,0]],
                [[0,0],[0,0],[0.7071067811865476,0],[0,0.7071067811865476],[0.7071067811865476,0],[0,0.7071067811865476]]
            ]},
            "kernels": [
                {"family": "exponential", "a": 1.0, "lambda": 1.0},
                {"family": "exponential", "a": 0.5, "lambda": 2.0}
            ]
        }"#;
        let spec = SystemSpec::from_json_str(json).unwrap();
        assert!((spec.coupling() - printed_v()).norm() < 1e-12);

        let round = SystemSpec::from_json_str(&spec.to_json_string()).unwrap();
        assert!((round.coupling() - spec.coupling()).norm() < 1e-15);
        assert!((round.omega() - spec.omega()).norm() < 1e-15);
        assert!(round.all_kernels_exponential());
    }

    #[test]
    fn load_rejects_inconsistent_dimensions() {
        let json = r#"{
            "n": 2, "M": 1,
            "omega": [[0,0],[0,0]],
            "coupling": {"V": [[1,0,0,0],[0,1,0,0]]},
            "kernels": [{"family": "exponential", "a": 1.0, "lambda": 1.0}]
        }"#;
        assert!(matches!(
            SystemSpec::from_json_str(json),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            SystemSpec::from_json_str("not json"),
            Err(Error::MalformedSpec(_))
        ));
    }

    #[test]
    fn omega_is_symmetrized_at_load() {
        let omega = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.3, 1.0]);
        let spec = SystemSpec::new(
            1,
            1,
            omega,
            DMatrix::zeros(2, 2),
            vec![KernelSpec::Exponential { a: 1.0, lambda: 1.0 }],
            None,
        )
        .unwrap();
        assert_eq!(spec.omega()[(0, 1)], 0.4);
        assert_eq!(spec.omega()[(1, 0)], 0.4);
    }
}
