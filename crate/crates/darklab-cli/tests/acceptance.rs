//! Acceptance gate: eight numbered criteria covering the worked example,
//! the transformed-picture closed forms, simulated decoupling, randomized
//! detection and synthesis round-trips, integrator convergence, and the
//! symplectic substrate. Each test prints one `criterion N ... PASS/FAIL`
//! line (visible with `cargo test --test acceptance -- --nocapture`).

use darklab_core::analysis::{self, Verdict};
use darklab_core::linalg;
use darklab_core::sim::{self, DriveSignal};
use darklab_core::symplectic::{self, SubspaceBasis};
use darklab_core::synthesis::{self};
use darklab_core::{crosscheck, threemode, KernelSpec, SimMethod, SynthesisTarget, SystemSpec};
use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict_line(number: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {number} ({name}): {} [{detail}]",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} ({name}) failed: {detail}");
}

// ── criterion 1: the CLI reproduces the worked closed form ──────────────────

#[test]
fn criterion_1_cli_worked_example() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_darklab"))
        .args(["example", "section5", "--m", "1", "--omega", "2"])
        .env_remove("DARKLAB_TOL")
        .output()
        .expect("binary runs");
    let exit_ok = out.status.code() == Some(0);
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("example output is JSON");

    // expected Hamiltonian: entries ±1/3 on position rows, ±4/3 on momentum
    // rows, alternating sign between mode pairs, zero off-parity
    let expected = threemode::closed_form_omega(1.0, 2.0);
    let mut max_err = 0.0_f64;
    for i in 0..6 {
        for j in 0..6 {
            let got = report["omega"][i][j].as_f64().expect("numeric entry");
            max_err = max_err.max((got - expected[(i, j)]).abs());
        }
    }
    let gen_ok = (report["dark_generator"][0][1].as_f64().unwrap() - 1.0).abs() <= 1e-12
        && (report["dark_generator"][1][0].as_f64().unwrap() + 4.0).abs() <= 1e-12;
    let pass = exit_ok && max_err <= 1e-12 && gen_ok && report["verified"] == true;
    verdict_line(
        1,
        "worked example via CLI",
        pass,
        &format!("max Hamiltonian entry error {max_err:.2e}, exit {:?}", out.status.code()),
    );
}

// ── criterion 2: the printed transform splits the dynamics exactly ──────────

#[test]
fn criterion_2_printed_transform_block_structure() {
    let spec = threemode::system(1.0, 2.0).unwrap();
    let s = threemode::printed_s();
    let ts = analysis::transform_system(&spec, &s, None).unwrap();

    // drift: dark generator on the pair, zero on the bright block
    let mut expected_drift = DMatrix::zeros(6, 6);
    expected_drift
        .view_mut((0, 0), (2, 2))
        .copy_from(&threemode::dark_generator(1.0, 2.0));
    let drift_err = (&ts.a - expected_drift).norm();

    // input: dark rows silent, bright block matches the closed form
    let input_dark = ts.b.view((0, 0), (2, 4)).norm();
    let input_bright = (ts.b.view((2, 0), (4, 4)) - threemode::bright_input_block()).norm();

    // output: dark columns invisible, bright block matches the closed form
    let vout = ts.output_coupling();
    let output_dark = vout.view((0, 0), (4, 2)).norm();
    let output_bright = (vout.view((0, 2), (4, 4)) - threemode::bright_output_block()).norm();

    // memory: never touches the dark pair, bright block follows the kernels
    let mut memory_err = 0.0_f64;
    for k in 0..10 {
        let t = 5.0 * k as f64 / 9.0;
        let mem = ts.memory(t);
        let g1 = spec.kernels()[0].eval(t).0;
        let g2 = spec.kernels()[1].eval(t).0;
        memory_err = memory_err
            .max(mem.view((0, 0), (2, 6)).norm())
            .max(mem.view((0, 0), (6, 2)).norm())
            .max((mem.view((2, 2), (4, 4)) - threemode::bright_memory_block(g1, g2)).norm());
    }

    let exact = drift_err
        .max(input_dark)
        .max(input_bright)
        .max(output_dark)
        .max(output_bright);
    let pass = exact <= 1e-12 && memory_err <= 1e-10;
    verdict_line(
        2,
        "printed transform block structure",
        pass,
        &format!("algebraic error {exact:.2e}, memory error {memory_err:.2e}"),
    );
}

// ── criterion 3: dark autonomy and drive invariance under simulation ────────

#[test]
fn criterion_3_dark_autonomy_and_drive_invariance() {
    let spec = threemode::system(1.0, 2.0).unwrap();
    let s_d = threemode::printed_s_d();
    let a_d = threemode::dark_generator(1.0, 2.0);
    let xd0 = DVector::from_column_slice(&[1.0, 0.5]);
    let x0 = s_d.transpose() * &xd0;
    let (t_final, dt) = (10.0, 1e-3);

    let quiet = sim::simulate_mean(&spec, &x0, &DriveSignal::Zero, SimMethod::ExpEmbed, t_final, dt)
        .unwrap();
    let reference = sim::closed_form_dark(&a_d, &xd0, &quiet.times);
    let peak = reference.iter().map(|x| x.norm()).fold(0.0_f64, f64::max);
    let autonomy_rel = quiet
        .states
        .iter()
        .zip(&reference)
        .map(|(x, r)| (&s_d * x - r).norm())
        .fold(0.0_f64, f64::max)
        / peak;

    // the dark coordinates cannot tell driven runs apart
    let mut drive_invariance = 0.0_f64;
    for amplitude in [1.0, 10.0] {
        let drive = DriveSignal::Sinusoid {
            amplitude,
            frequency: 1.3,
            phase: 0.3,
            channels: None,
        };
        let driven =
            sim::simulate_mean(&spec, &x0, &drive, SimMethod::ExpEmbed, t_final, dt).unwrap();
        let dev = driven
            .states
            .iter()
            .zip(&quiet.states)
            .map(|(xa, xq)| (&s_d * (xa - xq)).norm())
            .fold(0.0_f64, f64::max);
        drive_invariance = drive_invariance.max(dev);
    }

    let pass = autonomy_rel <= 1e-6 && drive_invariance <= 1e-8;
    verdict_line(
        3,
        "dark autonomy under drive",
        pass,
        &format!("relative autonomy error {autonomy_rel:.2e}, drive leakage {drive_invariance:.2e}"),
    );
}

// ── criterion 4: the output sees bright kicks but never dark ones ────────────

#[test]
fn criterion_4_output_decoupling() {
    let spec = threemode::system(1.0, 2.0).unwrap();
    let s_d = threemode::printed_s_d();
    let s_b = threemode::printed_s_b();
    let (t_final, dt) = (10.0, 1e-3);

    let dark_kick = s_d.transpose() * DVector::from_column_slice(&[1.0, 0.5]);
    let quiet = sim::simulate_mean(
        &spec,
        &dark_kick,
        &DriveSignal::Zero,
        SimMethod::ExpEmbed,
        t_final,
        dt,
    )
    .unwrap();
    let dark_output = quiet.outputs.iter().map(|y| y.norm()).fold(0.0_f64, f64::max);

    let bright_kick = s_b.transpose() * DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
    let bright = sim::simulate_mean(
        &spec,
        &bright_kick,
        &DriveSignal::Zero,
        SimMethod::ExpEmbed,
        t_final,
        dt,
    )
    .unwrap();
    let bright_output = bright.outputs.iter().map(|y| y.norm()).fold(0.0_f64, f64::max);

    let pass = dark_output <= 1e-8 && bright_output >= 1e-2;
    verdict_line(
        4,
        "output decoupling",
        pass,
        &format!("dark kick output {dark_output:.2e}, bright kick output {bright_output:.2e}"),
    );
}

// ── randomized system builders ───────────────────────────────────────────────

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn rand_sym(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let a = rand_mat(rng, d, d);
    (&a + a.transpose()) * 0.5
}

fn rand_kernels(rng: &mut ChaCha8Rng, m: usize) -> Vec<KernelSpec> {
    (0..m)
        .map(|_| {
            if rng.random_bool(0.75) {
                KernelSpec::Exponential {
                    a: rng.random_range(0.3..1.5),
                    lambda: rng.random_range(0.5..3.0),
                }
            } else {
                KernelSpec::Gaussian {
                    a: rng.random_range(0.3..1.5),
                    sigma: rng.random_range(0.5..2.0),
                }
            }
        })
        .collect()
}

/// Coupling that annihilates the symplectic plane spanned by a random
/// direction and its conjugate: `V = R (I - P_plane)`.
fn planted_coupling(rng: &mut ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    let mut v = DVector::from_fn(2 * n, |_, _| rng.random_range(-1.0..1.0));
    v /= v.norm();
    let jv = symplectic::j_mul_vec(&v);
    let p = &v * v.transpose() + &jv * jv.transpose();
    let blind = DMatrix::identity(2 * n, 2 * n) - p;
    rand_mat(rng, 2 * m, 2 * n) * blind
}

/// System with a planted dark plane: the coupling is blind to it and the
/// synthesized Hamiltonian keeps it invariant, carrying a random dark block
/// and random nonzero bright weights.
fn planted_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (SystemSpec, DMatrix<f64>) {
    let v = planted_coupling(rng, n, m);
    let base = SystemSpec::new(
        n,
        m,
        DMatrix::zeros(2 * n, 2 * n),
        v,
        rand_kernels(rng, m),
        None,
    )
    .unwrap();
    let omega_dark = rand_sym(rng, 2);
    let mu: Vec<f64> = (0..2 * n - 2)
        .map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let target = SynthesisTarget {
        omega_dark: omega_dark.clone(),
        mu: Some(mu),
        alpha: None,
    };
    let result = synthesis::synthesize(&base, &target, None).unwrap();
    (result.spec, omega_dark)
}

// ── criterion 5: randomized detection is sound ───────────────────────────────

#[test]
fn criterion_5_randomized_detection_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 200;
    let (mut exists, mut none, mut inconclusive) = (0usize, 0usize, 0usize);
    let mut worst_residual = 0.0_f64;
    for trial in 0..trials {
        let planted = trial % 2 == 0;
        let spec = if planted {
            let n = rng.random_range(2..=3);
            let m = rng.random_range(1..=2);
            planted_system(&mut rng, n, m).0
        } else {
            let n = rng.random_range(1..=3);
            let m = rng.random_range(1..=2);
            SystemSpec::new(
                n,
                m,
                rand_sym(&mut rng, 2 * n),
                rand_mat(&mut rng, 2 * m, 2 * n),
                rand_kernels(&mut rng, m),
                None,
            )
            .unwrap()
        };
        match analysis::detect_dark_modes(&spec, None).unwrap() {
            Verdict::Exists(cert) => {
                exists += 1;
                worst_residual = worst_residual.max(cert.residuals.max());
                assert!(
                    cert.verified && cert.residuals.max() <= 1e-9,
                    "trial {trial}: claimed dark mode with residual {:.3e}",
                    cert.residuals.max()
                );
            }
            Verdict::None { .. } => {
                none += 1;
                assert!(
                    crosscheck::confirm_no_dark(&spec),
                    "trial {trial}: 'none' verdict not confirmed by the independent route"
                );
            }
            Verdict::Inconclusive { .. } => inconclusive += 1,
        }
        if planted {
            // a planted plane must never be missed
            assert!(
                matches!(
                    analysis::detect_dark_modes(&spec, None).unwrap(),
                    Verdict::Exists(_)
                ),
                "trial {trial}: planted dark plane missed"
            );
        }
    }
    let pass = exists >= trials / 2 && none > 0 && worst_residual <= 1e-9;
    verdict_line(
        5,
        "randomized detection soundness",
        pass,
        &format!(
            "{trials} systems: {exists} exists / {none} none / {inconclusive} inconclusive, worst certified residual {worst_residual:.2e}"
        ),
    );
}

// ── criterion 6: synthesis round-trips and parameter invariance ──────────────

fn sorted_eigs(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut e: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    e
}

#[test]
fn criterion_6_synthesis_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trials = 100;
    let mut worst_eig = 0.0_f64;
    let mut worst_sweep = 0.0_f64;
    for trial in 0..trials {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(1..=2);
        let (spec, omega_dark) = planted_system(&mut rng, n, m);
        let planted_gen = symplectic::j_matrix(1) * &omega_dark;

        let cert = match analysis::detect_dark_modes(&spec, None).unwrap() {
            Verdict::Exists(c) => c,
            other => panic!("trial {trial}: synthesized system not detected: {other:?}"),
        };
        // the detector's pair basis differs from the planted one, so compare
        // the generators through their (basis-free) spectra
        let eig_err: f64 = sorted_eigs(&cert.a_d)
            .iter()
            .zip(sorted_eigs(&planted_gen))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0_f64, f64::max);
        worst_eig = worst_eig.max(eig_err);
        assert!(
            eig_err <= 1e-8,
            "trial {trial}: dark spectrum off by {eig_err:.3e}"
        );

        // bright weights and bright directions must not move the dark data
        if trial % 10 == 0 {
            let v = spec.coupling().clone();
            let base = SystemSpec::new(
                n,
                m,
                DMatrix::zeros(2 * n, 2 * n),
                v,
                spec.kernels().to_vec(),
                None,
            )
            .unwrap();
            let reference = synthesis::synthesize(
                &base,
                &SynthesisTarget {
                    omega_dark: omega_dark.clone(),
                    mu: None,
                    alpha: None,
                },
                None,
            )
            .unwrap();
            let s_d = reference.certificate.s_d.clone();
            let mixer = rand_mat(&mut rng, 2 * n - 2, 2 * n - 2).qr().q();
            let variants = [
                SynthesisTarget {
                    omega_dark: omega_dark.clone(),
                    mu: Some(vec![1.5; 2 * n - 2]),
                    alpha: None,
                },
                SynthesisTarget {
                    omega_dark: omega_dark.clone(),
                    mu: Some((0..2 * n - 2).map(|k| 0.3 * (k as f64 + 1.0)).collect()),
                    alpha: Some(linalg::kernel_basis(&s_d, None) * mixer),
                },
            ];
            for target in &variants {
                let alt = synthesis::synthesize(&base, target, None).unwrap();
                let sweep = (&alt.certificate.s_d - &s_d)
                    .norm()
                    .max((&alt.certificate.a_d - &reference.certificate.a_d).norm())
                    .max((&s_d * alt.spec.omega() * s_d.transpose() - &omega_dark).norm());
                worst_sweep = worst_sweep.max(sweep);
                assert!(
                    sweep <= 1e-10,
                    "trial {trial}: bright parameters moved the dark data by {sweep:.3e}"
                );
            }
        }
    }
    verdict_line(
        6,
        "synthesis round-trips",
        true,
        &format!(
            "{trials} round-trips: worst spectrum error {worst_eig:.2e}, worst bright-sweep deviation {worst_sweep:.2e}"
        ),
    );
}

// ── criterion 7: the memory integrator converges at second order ─────────────

#[test]
fn criterion_7_integrator_convergence() {
    let spec = threemode::system(1.0, 2.0).unwrap();
    let x0 = DVector::from_column_slice(&[1.0, 0.2, -0.5, 0.4, 0.3, -0.8]);
    let drive = DriveSignal::Sinusoid {
        amplitude: 1.0,
        frequency: 1.3,
        phase: 0.3,
        channels: None,
    };
    let t_final = 5.0;
    let h_ref = 1e-3;
    let reference =
        sim::simulate_mean(&spec, &x0, &drive, SimMethod::ExpEmbed, t_final, h_ref).unwrap();

    let error_at = |h: f64| -> f64 {
        let traj =
            sim::simulate_mean(&spec, &x0, &drive, SimMethod::TrapezoidVolterra, t_final, h)
                .unwrap();
        let stride = (h / h_ref).round() as usize;
        traj.states
            .iter()
            .enumerate()
            .map(|(k, x)| (x - &reference.states[k * stride]).norm())
            .fold(0.0_f64, f64::max)
    };
    let errors = [error_at(4e-3), error_at(2e-3), error_at(1e-3)];
    let r1 = errors[0] / errors[1];
    let r2 = errors[1] / errors[2];
    let pass = (3.0..=5.0).contains(&r1) && (3.0..=5.0).contains(&r2);
    verdict_line(
        7,
        "second-order memory integrator",
        pass,
        &format!(
            "errors {:.2e}/{:.2e}/{:.2e}, halving ratios {r1:.2} and {r2:.2}",
            errors[0], errors[1], errors[2]
        ),
    );
}

// ── criterion 8: the symplectic substrate holds up under fuzzing ─────────────

#[test]
fn criterion_8_symplectic_substrate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 1000;
    let mut worst = 0.0_f64;
    for trial in 0..trials {
        let n = rng.random_range(1..=4);
        let l = rng.random_range(1..=n);
        let span = rand_mat(&mut rng, 2 * n, 2 * l);
        let basis = SubspaceBasis::from_span(&span, None);
        if basis.dim() != 2 * l {
            continue; // numerically rank-deficient draw
        }

        let jn = symplectic::j_matrix(n);
        let eye = DMatrix::identity(2 * n, 2 * n);
        let j_ident = (&jn * jn.transpose() - &eye)
            .norm()
            .max((&jn * &jn + &eye).norm());

        let complement = symplectic::symplectic_complement(&basis);
        assert_eq!(
            basis.dim() + complement.dim(),
            2 * n,
            "trial {trial}: complement dimension identity broken (n={n}, l={l})"
        );

        let dark = match symplectic::symplectic_gram_schmidt(&basis) {
            Ok(b) => b,
            Err(_) => continue, // degenerate draw: the form vanished on the span
        };
        let bright = symplectic::symplectic_gram_schmidt(&complement).unwrap();
        let gram = dark.gram_residual().max(bright.gram_residual());

        // complete to a full symplectic transform and check both identities;
        // a small pivot legitimately produces rows of norm 1/|ω|, so the
        // matrix-level residuals are measured relative to ‖S‖²
        let mut s = DMatrix::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (2 * l, 2 * n)).copy_from(&dark.rows());
        s.view_mut((2 * l, 0), (2 * n - 2 * l, 2 * n))
            .copy_from(&bright.rows());
        let scale = 1.0 + s.norm_squared();
        let full = symplectic::is_symplectic_matrix(&s).unwrap() / scale;
        let inv = symplectic::symplectic_inverse(&s, Some(1e-8)).unwrap();
        let inverse_err = (&s * inv - DMatrix::identity(2 * n, 2 * n)).norm() / scale;

        let err = gram.max(full).max(inverse_err).max(j_ident);
        worst = worst.max(err);
        assert!(
            err <= 1e-10,
            "trial {trial}: symplectic identity off by {err:.3e} (n={n}, l={l})"
        );
    }
    verdict_line(
        8,
        "symplectic substrate fuzzing",
        true,
        &format!("{trials} bases: complement dims exact, worst identity residual {worst:.2e}"),
    );
}
