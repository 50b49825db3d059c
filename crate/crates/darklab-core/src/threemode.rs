//! A worked example: three identical modes, two overlapping field channels.
//!
//! Channel 1 reads modes 1 and 2, channel 2 reads modes 2 and 3, each through
//! the annihilation combination `(q + i p)/√2`. The alternating-sign
//! combination of the three modes never appears in either channel, so one
//! conjugate quadrature pair can be made dark. Every derived quantity of that
//! construction has a closed form, collected here; they double as frozen
//! expectations for the test suites.
//!
//! Coordinates: `x = (q_1, p_1, q_2, p_2, q_3, p_3)`; the free parameters are
//! the mode mass `m` and the dark-block frequency `ω`.

use crate::model::{build_v, KernelSpec, SystemSpec};
use crate::Result;
use nalgebra::{DMatrix, DVector};

/// Alternating position pattern `(1, 0, -1, 0, 1, 0)`: the coupling-null
/// direction of the position quadratures.
pub fn u1() -> DVector<f64> {
    DVector::from_row_slice(&[1.0, 0.0, -1.0, 0.0, 1.0, 0.0])
}

/// Alternating momentum pattern `(0, 1, 0, -1, 0, 1)`.
pub fn u2() -> DVector<f64> {
    DVector::from_row_slice(&[0.0, 1.0, 0.0, -1.0, 0.0, 1.0])
}

/// Complex coupling vectors of the two channels.
pub fn coupling_vectors() -> Vec<Vec<[f64; 2]>> {
    let s = 1.0 / 2.0f64.sqrt();
    vec![
        vec![[s, 0.0], [0.0, s], [s, 0.0], [0.0, s], [0.0, 0.0], [0.0, 0.0]],
        vec![[0.0, 0.0], [0.0, 0.0], [s, 0.0], [0.0, s], [s, 0.0], [0.0, s]],
    ]
}

/// The real coupling matrix `V` (4×6).
pub fn coupling_matrix() -> DMatrix<f64> {
    build_v(&coupling_vectors(), 3).expect("fixed coupling vectors are well formed")
}

/// Default memory kernels: `γ_1(t) = e^{-t}`, `γ_2(t) = e^{-2t}/2`.
pub fn default_kernels() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Exponential { a: 1.0, lambda: 1.0 },
        KernelSpec::Exponential { a: 0.5, lambda: 2.0 },
    ]
}

/// Closed-form Hamiltonian matrix that makes the alternating pair dark with
/// dark block `diag(m ω², 1/m)`:
/// `Ω = (m ω²/3) u_2 u_2ᵀ + (1/(3m)) u_1 u_1ᵀ`.
pub fn closed_form_omega(m: f64, omega: f64) -> DMatrix<f64> {
    let w = m * omega * omega / 3.0;
    let c = 1.0 / (3.0 * m);
    let u1 = u1();
    let u2 = u2();
    &u2 * u2.transpose() * w + &u1 * u1.transpose() * c
}

/// Complete system description with the closed-form Hamiltonian.
pub fn system(m: f64, omega: f64) -> Result<SystemSpec> {
    SystemSpec::new(
        3,
        2,
        closed_form_omega(m, omega),
        coupling_matrix(),
        default_kernels(),
        None,
    )
}

/// Dark-pair quadrature map `S_D` (2×6): rows `(J v_1)ᵀ, v_1ᵀ` for
/// `v_1 = u_1/√3`.
pub fn printed_s_d() -> DMatrix<f64> {
    let s3 = 3.0f64.sqrt();
    let mut s = DMatrix::zeros(2, 6);
    s.set_row(0, &(-u2() / s3).transpose());
    s.set_row(1, &(u1() / s3).transpose());
    s
}

/// Bright quadrature map `S_B` (4×6) completing `S_D` to an orthogonal
/// symplectic matrix.
pub fn printed_s_b() -> DMatrix<f64> {
    let s6 = 6.0f64.sqrt();
    let s2 = 2.0f64.sqrt();
    DMatrix::from_row_slice(
        4,
        6,
        &[
            1.0 / s6, 0.0, 2.0 / s6, 0.0, 1.0 / s6, 0.0, //
            0.0, 1.0 / s6, 0.0, 2.0 / s6, 0.0, 1.0 / s6, //
            -1.0 / s2, 0.0, 0.0, 0.0, 1.0 / s2, 0.0, //
            0.0, -1.0 / s2, 0.0, 0.0, 0.0, 1.0 / s2,
        ],
    )
}

/// The stacked transformation `S = [S_D; S_B]` (6×6).
pub fn printed_s() -> DMatrix<f64> {
    let mut s = DMatrix::zeros(6, 6);
    s.view_mut((0, 0), (2, 6)).copy_from(&printed_s_d());
    s.view_mut((2, 0), (4, 6)).copy_from(&printed_s_b());
    s
}

/// Dark-block generator `[[0, 1/m], [-m ω², 0]]`: an oscillator at `ω`.
pub fn dark_generator(m: f64, omega: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / m, -m * omega * omega, 0.0])
}

/// Dark-block Hamiltonian `Ω_D = diag(m ω², 1/m)`.
pub fn dark_block(m: f64, omega: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[m * omega * omega, 0.0, 0.0, 1.0 / m])
}

/// Bright block of the transformed input matrix `S B` (bottom 4×4).
pub fn bright_input_block() -> DMatrix<f64> {
    let s6 = 6.0f64.sqrt();
    let s2 = 2.0f64.sqrt();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            -3.0 / s6, 0.0, -3.0 / s6, 0.0, //
            0.0, -3.0 / s6, 0.0, -3.0 / s6, //
            1.0 / s2, 0.0, -1.0 / s2, 0.0, //
            0.0, 1.0 / s2, 0.0, -1.0 / s2,
        ],
    )
}

/// Bright block of the transformed output map `V S⁻¹` (right 4×4).
pub fn bright_output_block() -> DMatrix<f64> {
    let s6 = 6.0f64.sqrt();
    let s2 = 2.0f64.sqrt();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            3.0 / s6, 0.0, -1.0 / s2, 0.0, //
            0.0, 3.0 / s6, 0.0, -1.0 / s2, //
            3.0 / s6, 0.0, 1.0 / s2, 0.0, //
            0.0, 3.0 / s6, 0.0, 1.0 / s2,
        ],
    )
}

/// Scalar weights of the transformed memory block at kernel values
/// `(g1, g2)`: `f1 = -3(g1+g2)/2`, `f2 = √3 (g1-g2)/2`, `f3 = -(g1+g2)/2`.
pub fn memory_weights(g1: f64, g2: f64) -> (f64, f64, f64) {
    let f1 = -1.5 * (g1 + g2);
    let f2 = 3.0f64.sqrt() / 2.0 * (g1 - g2);
    let f3 = -0.5 * (g1 + g2);
    (f1, f2, f3)
}

/// Bright block of the transformed memory matrix built from the weights:
/// `[[f1 I, f2 I], [f2 I, f3 I]]` with 2×2 identity blocks.
pub fn bright_memory_block(g1: f64, g2: f64) -> DMatrix<f64> {
    let (f1, f2, f3) = memory_weights(g1, g2);
    DMatrix::from_row_slice(
        4,
        4,
        &[
            f1, 0.0, f2, 0.0, //
            0.0, f1, 0.0, f2, //
            f2, 0.0, f3, 0.0, //
            0.0, f2, 0.0, f3,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic;

    #[test]
    fn coupling_matrix_matches_the_overlap_pattern() {
        let v = coupling_matrix();
        let expected = DMatrix::from_row_slice(
            4,
            6,
            &[
                1.0, 0.0, 1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, 0.0, 1.0,
            ],
        );
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn coupling_annihilates_the_alternating_pattern() {
        let v = coupling_matrix();
        assert!((&v * u1()).norm() < 1e-14);
        assert!((&v * u2()).norm() < 1e-14);
    }

    #[test]
    fn closed_form_omega_entries_at_unit_parameters() {
        // m = ω = 1 gives entries ±1/3 in the alternating pattern
        let o = closed_form_omega(1.0, 1.0);
        for r in 0..6 {
            for c in 0..6 {
                let expect = if (r + c) % 2 == 1 {
                    0.0
                } else {
                    let sign = if ((r / 2) + (c / 2)) % 2 == 0 { 1.0 } else { -1.0 };
                    sign / 3.0
                };
                assert!(
                    (o[(r, c)] - expect).abs() < 1e-14,
                    "entry ({r},{c}) = {} expected {expect}",
                    o[(r, c)]
                );
            }
        }
    }

    #[test]
    fn printed_transform_is_orthogonal_and_symplectic() {
        let s = printed_s();
        assert!((s.transpose() * &s - DMatrix::<f64>::identity(6, 6)).norm() < 1e-12);
        assert!(symplectic::is_symplectic_matrix(&s).unwrap() < 1e-12);
    }

    #[test]
    fn dark_rows_annihilate_coupling_through_j() {
        let s_d = printed_s_d();
        let v = coupling_matrix();
        let vj = &v * symplectic::j_matrix(3);
        assert!((vj * s_d.transpose()).norm() < 1e-14);
        assert!((v * s_d.transpose()).norm() < 1e-14);
    }
}
