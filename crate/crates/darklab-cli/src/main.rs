//! Command-line front end for the dark-mode toolkit.
//!
//! Every subcommand prints one pretty-printed JSON report to stdout (or a
//! trajectory CSV for `simulate` without `--out`) and reserves stderr for
//! errors and logging, so repeated runs with the same inputs produce
//! byte-identical output. Timing goes to the log, never into a report.
//!
//! Exit codes: 0 success / dark modes exist / certificate verified,
//! 1 no dark mode or verification failure, 2 inconclusive detection,
//! 3 insufficient dark capacity, 4 integrator cannot handle the kernel
//! family, 64 usage or malformed input, 65 dimension inconsistency,
//! 66 malformed certificate, 70 internal numerical failure.

mod drive;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use darklab_core::{
    analysis, linalg, model, sim, symplectic, synthesis, threemode, DarkModeCertificate, Error,
    Residuals, SimMethod, SynthesisTarget, SystemSpec, Verdict,
};
use nalgebra::DMatrix;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "darklab",
    version,
    about = "Detect, synthesize, and simulate dark modes of linear quantum networks with memory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect dark modes of a system and report a certificate or an obstruction
    Analyze {
        /// System description (JSON)
        #[arg(long)]
        system: PathBuf,
        /// Certificate tolerance (falls back to DARKLAB_TOL, then 1e-9)
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the report JSON here
        #[arg(long, visible_alias = "report")]
        out: Option<PathBuf>,
        /// Write the certificate here when dark modes exist
        #[arg(long, visible_alias = "certificate")]
        cert: Option<PathBuf>,
    },
    /// Build a Hamiltonian that realizes a requested dark block for a given coupling
    Synthesize {
        /// System description providing the coupling and kernels (JSON)
        #[arg(long = "coupling", visible_alias = "system")]
        system: PathBuf,
        /// Synthesis target (JSON): dark block, optional bright weights/directions
        #[arg(long)]
        target: PathBuf,
        /// Output path for the synthesized system; the certificate lands next
        /// to it as `<stem>.cert.json`
        #[arg(long)]
        out: PathBuf,
        /// Certificate tolerance (falls back to DARKLAB_TOL, then 1e-9)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Integrate the mean dynamics and write the trajectory as CSV
    Simulate {
        /// System description (JSON)
        #[arg(long)]
        system: PathBuf,
        /// Integrator: trapezoid-volterra or exp-embed (case-insensitive)
        #[arg(long, default_value = "trapezoid-volterra")]
        method: String,
        /// Final time
        #[arg(long = "t-final")]
        t_final: f64,
        /// Requested step (snapped so the horizon divides evenly)
        #[arg(long)]
        dt: f64,
        /// Initial phase-space point, comma-separated (default: origin)
        #[arg(long)]
        x0: Option<String>,
        /// Drive: zero | sin:amp=A,freq=W,phase=P,channels=1+3 | table:PATH
        #[arg(long, default_value = "zero")]
        drive: String,
        /// Trajectory CSV path (omit to stream the CSV to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a stored certificate against a system
    Verify {
        /// System description (JSON)
        #[arg(long)]
        system: PathBuf,
        /// Certificate (JSON)
        #[arg(long = "certificate", visible_alias = "cert")]
        cert: PathBuf,
        /// Acceptance tolerance (falls back to DARKLAB_TOL, then the
        /// certificate's own stored tolerance)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reproduce a built-in worked example
    Example {
        #[command(subcommand)]
        which: ExampleName,
    },
}

#[derive(Subcommand)]
enum ExampleName {
    /// Three modes on a line, two field channels, one protected oscillator
    Section5 {
        /// Oscillator mass
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Oscillator frequency of the protected block
        #[arg(long, default_value_t = 2.0)]
        omega: f64,
        /// Directory for the full artifact set: system, certificates,
        /// trajectory CSV, and this report
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure that already knows its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InsufficientDarkCapacity { .. } => 3,
        Error::MethodKernelMismatch(_) => 4,
        Error::DimensionMismatch(_) | Error::OddDimension(_) => 65,
        Error::MalformedCertificate(_) => 66,
        Error::MalformedSpec(_)
        | Error::InvalidKernel(_)
        | Error::NonSymmetricTarget(_)
        | Error::RankDeficient(_)
        | Error::StepTooLarge(_)
        | Error::Io(_)
        | Error::Json(_) => 64,
        Error::NotSymplectic { .. } | Error::NotInvariant { .. } | Error::DegenerateSubspace(_) => {
            70
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let started = Instant::now();
    let outcome = run(cli.command);
    log::info!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn run(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Analyze {
            system,
            tol,
            out,
            cert,
        } => cmd_analyze(&system, tol, out.as_deref(), cert.as_deref()),
        Command::Synthesize {
            system,
            target,
            out,
            tol,
        } => cmd_synthesize(&system, &target, &out, tol),
        Command::Simulate {
            system,
            method,
            t_final,
            dt,
            x0,
            drive,
            out,
        } => cmd_simulate(&system, &method, t_final, dt, x0.as_deref(), &drive, out.as_deref()),
        Command::Verify { system, cert, tol } => cmd_verify(&system, &cert, tol),
        Command::Example { which } => match which {
            ExampleName::Section5 { m, omega, out } => {
                cmd_example_section5(m, omega, out.as_deref())
            }
        },
    }
}

/// Tolerance resolution: explicit flag, then the DARKLAB_TOL environment
/// variable, then None (each command's own default). A present but unusable
/// value is a usage error.
fn resolve_tol(flag: Option<f64>) -> Result<Option<f64>, Failure> {
    fn usable(t: f64, origin: &str) -> Result<f64, Failure> {
        if t.is_finite() && t > 0.0 {
            Ok(t)
        } else {
            Err(Failure {
                code: 64,
                message: format!("{origin} must be a positive finite number, got {t}"),
            })
        }
    }
    if let Some(t) = flag {
        return usable(t, "--tol").map(Some);
    }
    match std::env::var("DARKLAB_TOL") {
        Ok(s) => {
            let t = s.parse::<f64>().map_err(|_| Failure {
                code: 64,
                message: format!("DARKLAB_TOL is not a number: '{s}'"),
            })?;
            usable(t, "DARKLAB_TOL").map(Some)
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure {
            code: 64,
            message: format!("DARKLAB_TOL: {e}"),
        }),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Writes to stdout, leaving quietly when the reader hangs up early.
fn write_stdout(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => Err(Failure {
            code: 70,
            message: format!("cannot write to stdout: {e}"),
        }),
    }
}

/// Prints the report to stdout and mirrors it to `path` when given.
fn emit<T: Serialize>(report: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Failure {
        code: 70,
        message: format!("report serialization failed: {e}"),
    })?;
    if let Some(p) = path {
        std::fs::write(p, text.clone() + "\n").map_err(|e| Failure {
            code: 64,
            message: format!("cannot write {}: {e}", p.display()),
        })?;
    }
    write_stdout(&(text + "\n"))
}

// ── analyze ─────────────────────────────────────────────────────────────────

/// Subspace dimensions behind the verdict, from coarse to fine.
#[derive(Serialize)]
struct DimensionReport {
    modes: usize,
    channels: usize,
    /// Directions the field cannot sense: Ker(V J).
    kernel: usize,
    /// Largest drift-invariant subspace inside that kernel.
    invariant: usize,
    /// Degenerate part of the invariant subspace.
    radical: usize,
    /// Certified dark subspace (0 unless the verdict is "exists").
    dark: usize,
}

fn dimension_report(spec: &SystemSpec, dark_pairs: usize) -> DimensionReport {
    let n = spec.modes();
    let vjn = spec.coupling() * symplectic::j_matrix(n);
    let k = symplectic::SubspaceBasis::from_span(&linalg::kernel_basis(&vjn, spec.tol()), spec.tol());
    let u = analysis::largest_invariant_subspace_in(&k, &(spec.omega() * symplectic::j_matrix(n)));
    DimensionReport {
        modes: n,
        channels: spec.channels(),
        kernel: k.dim(),
        invariant: u.dim(),
        radical: symplectic::radical(&u).dim(),
        dark: 2 * dark_pairs,
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    command: &'static str,
    system: String,
    tol: f64,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<analysis::InconclusiveDiagnostics>,
    dimensions: DimensionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dark_generator: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<String>,
    forbidden_coupling: analysis::ForbiddenCouplingReport,
    kernel_activity: model::Assumption1Report,
}

fn cmd_analyze(
    system: &Path,
    tol: Option<f64>,
    report_path: Option<&Path>,
    cert_path: Option<&Path>,
) -> Result<i32, Failure> {
    let tol = resolve_tol(tol)?;
    let spec = SystemSpec::load(system)?;
    let verdict = analysis::detect_dark_modes(&spec, tol)?;
    let kernel_activity = model::assumption1_check(&spec, 10.0, 201);
    let (code, report) = match &verdict {
        Verdict::Exists(cert) => {
            let written = match cert_path {
                Some(p) => {
                    cert.save(p)?;
                    Some(p.display().to_string())
                }
                None => None,
            };
            (
                0,
                AnalyzeReport {
                    command: "analyze",
                    system: system.display().to_string(),
                    tol: cert.tol,
                    verdict: "exists",
                    reason: None,
                    diagnostics: None,
                    dimensions: dimension_report(&spec, cert.pairs()),
                    pairs: Some(cert.pairs()),
                    residuals: Some(cert.residuals),
                    verified: Some(cert.verified),
                    dark_generator: Some(rows(&cert.a_d)),
                    certificate: written,
                    forbidden_coupling: analysis::forbidden_coupling_report(&spec, Some(cert)),
                    kernel_activity,
                },
            )
        }
        Verdict::None { reason } => (
            1,
            AnalyzeReport {
                command: "analyze",
                system: system.display().to_string(),
                tol: tol.unwrap_or(analysis::DEFAULT_CERT_TOL),
                verdict: "none",
                reason: Some(reason_label(*reason)),
                diagnostics: None,
                dimensions: dimension_report(&spec, 0),
                pairs: None,
                residuals: None,
                verified: None,
                dark_generator: None,
                certificate: None,
                forbidden_coupling: analysis::forbidden_coupling_report(&spec, None),
                kernel_activity,
            },
        ),
        Verdict::Inconclusive { diagnostics } => (
            2,
            AnalyzeReport {
                command: "analyze",
                system: system.display().to_string(),
                tol: tol.unwrap_or(analysis::DEFAULT_CERT_TOL),
                verdict: "inconclusive",
                reason: None,
                diagnostics: Some(*diagnostics),
                dimensions: dimension_report(&spec, 0),
                pairs: None,
                residuals: None,
                verified: None,
                dark_generator: None,
                certificate: None,
                forbidden_coupling: analysis::forbidden_coupling_report(&spec, None),
                kernel_activity,
            },
        ),
    };
    emit(&report, report_path)?;
    Ok(code)
}

fn reason_label(reason: analysis::NoDarkModeReason) -> &'static str {
    match reason {
        analysis::NoDarkModeReason::FullRowRank => "coupling-has-full-row-rank",
        analysis::NoDarkModeReason::EmptyInvariant => "no-invariant-subspace-in-kernel",
        analysis::NoDarkModeReason::TotallyIsotropic => "invariant-subspace-totally-isotropic",
    }
}

// ── synthesize ──────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct SynthesizeReport {
    command: &'static str,
    system: String,
    target: String,
    out: String,
    certificate: String,
    tol: f64,
    capacity: usize,
    pairs: usize,
    planted_residual: f64,
    residuals: Residuals,
    verified: bool,
}

fn cmd_synthesize(
    system: &Path,
    target: &Path,
    out: &Path,
    tol: Option<f64>,
) -> Result<i32, Failure> {
    let tol = resolve_tol(tol)?;
    let spec = SystemSpec::load(system)?;
    let target_spec = SynthesisTarget::load(target)?;
    let result = synthesis::synthesize(&spec, &target_spec, tol)?;
    let cert_path = out.with_extension("cert.json");
    result.spec.save(out)?;
    result.certificate.save(&cert_path)?;
    let report = SynthesizeReport {
        command: "synthesize",
        system: system.display().to_string(),
        target: target.display().to_string(),
        out: out.display().to_string(),
        certificate: cert_path.display().to_string(),
        tol: result.certificate.tol,
        capacity: result.capacity,
        pairs: result.certificate.pairs(),
        planted_residual: result.planted_residual,
        residuals: result.certificate.residuals,
        verified: result.certificate.verified,
    };
    emit(&report, None)?;
    Ok(if result.certificate.verified { 0 } else { 1 })
}

// ── simulate ────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    system: String,
    method: &'static str,
    drive: String,
    t_final: f64,
    dt: f64,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    final_state: Vec<f64>,
    final_output: Vec<f64>,
    max_output_norm: f64,
}

fn cmd_simulate(
    system: &Path,
    method: &str,
    t_final: f64,
    dt: f64,
    x0: Option<&str>,
    drive_spec: &str,
    out: Option<&Path>,
) -> Result<i32, Failure> {
    let spec = SystemSpec::load(system)?;
    let method: SimMethod = method.parse()?;
    let dim = 2 * spec.modes();
    let x0 = match x0 {
        Some(s) => drive::parse_x0(s, dim)?,
        None => nalgebra::DVector::zeros(dim),
    };
    let drive = drive::parse_drive(drive_spec, 2 * spec.channels())?;
    let traj = sim::simulate_mean(&spec, &x0, &drive, method, t_final, dt)?;
    match out {
        Some(path) => {
            traj.write_csv(path)?;
            let last_x = traj.states.last().expect("trajectory is never empty");
            let last_y = traj.outputs.last().expect("trajectory is never empty");
            let max_output_norm = traj
                .outputs
                .iter()
                .map(|y| y.norm())
                .fold(0.0_f64, f64::max);
            let report = SimulateReport {
                command: "simulate",
                system: system.display().to_string(),
                method: method.as_str(),
                drive: drive_spec.to_string(),
                t_final,
                dt,
                steps: traj.len() - 1,
                csv: Some(path.display().to_string()),
                final_state: last_x.iter().copied().collect(),
                final_output: last_y.iter().copied().collect(),
                max_output_norm,
            };
            emit(&report, None)?;
        }
        None => write_stdout(&traj.to_csv_string())?,
    }
    Ok(0)
}

// ── verify ──────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    system: String,
    certificate: String,
    tol: f64,
    pairs: usize,
    residuals: Residuals,
    /// Distance between the stored dark generator and the one the system
    /// induces on the certified rows.
    generator_residual: f64,
    verified: bool,
}

fn cmd_verify(system: &Path, cert: &Path, tol: Option<f64>) -> Result<i32, Failure> {
    let tol = resolve_tol(tol)?;
    let spec = SystemSpec::load(system)?;
    let certificate = DarkModeCertificate::load(cert)?;
    let tol = tol.unwrap_or(certificate.tol);
    let residuals = analysis::verify_certificate(&spec, &certificate.s_d)?;
    let generator_residual =
        (analysis::induced_generator(&spec, &certificate.s_d) - &certificate.a_d).norm();
    let verified = residuals.max() <= tol && generator_residual <= tol;
    let report = VerifyReport {
        command: "verify",
        system: system.display().to_string(),
        certificate: cert.display().to_string(),
        tol,
        pairs: certificate.pairs(),
        residuals,
        generator_residual,
        verified,
    };
    emit(&report, None)?;
    Ok(if verified { 0 } else { 1 })
}

// ── example ─────────────────────────────────────────────────────────────────

#[derive(Serialize)]
struct ExampleParams {
    m: f64,
    omega: f64,
}

#[derive(Serialize)]
struct ExampleAnalysis {
    verdict: &'static str,
    pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<Residuals>,
    verified: bool,
}

/// Comparison table: pipeline results against the closed forms.
#[derive(Serialize)]
struct ExampleComparison {
    /// Distance between the synthesized Hamiltonian and the closed form.
    hamiltonian_gap: f64,
    /// Gap between the sorted spectra of the detected dark generator and
    /// the closed-form one (basis-independent comparison).
    #[serde(skip_serializing_if = "Option::is_none")]
    generator_spectrum_gap: Option<f64>,
    /// Worst certificate residual of the printed dark rows.
    printed_rows_residual: f64,
}

#[derive(Serialize)]
struct ExampleArtifacts {
    system: String,
    analysis_certificate: Option<String>,
    designed: String,
    designed_certificate: String,
    trajectory: String,
    report: String,
}

#[derive(Serialize)]
struct ExampleReport {
    command: &'static str,
    name: &'static str,
    params: ExampleParams,
    /// Full system description, ready to save and feed back to `analyze`.
    system: serde_json::Value,
    /// Closed-form network Hamiltonian matrix.
    omega: Vec<Vec<f64>>,
    /// Hamiltonian of the protected oscillator in dark coordinates.
    omega_dark: Vec<Vec<f64>>,
    /// Generator of the dark block, `J Ω_dark`.
    dark_generator: Vec<Vec<f64>>,
    /// Closed-form symplectic transform splitting dark from bright.
    s: Vec<Vec<f64>>,
    s_d: Vec<Vec<f64>>,
    s_b: Vec<Vec<f64>>,
    analysis: ExampleAnalysis,
    comparison: ExampleComparison,
    /// Simulated decoupling audit of the printed dark rows.
    decoupling: sim::DecouplingReport,
    planted_residual: f64,
    residuals: Residuals,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifacts: Option<ExampleArtifacts>,
}

/// Entrywise gap between the sorted spectra of two real matrices.
fn spectrum_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    fn sorted(m: &DMatrix<f64>) -> Vec<nalgebra::Complex<f64>> {
        let mut v: Vec<_> = m.complex_eigenvalues().iter().copied().collect();
        v.sort_by(|x, y| {
            (x.re, x.im)
                .partial_cmp(&(y.re, y.im))
                .expect("eigenvalues of a finite matrix are finite")
        });
        v
    }
    sorted(a)
        .iter()
        .zip(sorted(b))
        .map(|(x, y)| (*x - y).norm())
        .fold(0.0, f64::max)
}

/// The worked three-mode example: two field channels watch a chain of three
/// modes, and one symplectic pair hides from both. Runs the whole pipeline
/// (detect, synthesize, simulate, verify) against the closed forms, and with
/// `--out` writes every artifact the other subcommands would produce.
fn cmd_example_section5(m: f64, omega: f64, out_dir: Option<&Path>) -> Result<i32, Failure> {
    if !(m.is_finite() && m > 0.0 && omega.is_finite() && omega > 0.0) {
        return Err(Failure {
            code: 64,
            message: format!("mass and frequency must be positive, got m={m}, omega={omega}"),
        });
    }
    let spec = threemode::system(m, omega)?;
    let closed_omega = threemode::closed_form_omega(m, omega);
    let closed_generator = threemode::dark_generator(m, omega);

    let verdict = analysis::detect_dark_modes(&spec, None)?;
    let detected = match &verdict {
        Verdict::Exists(cert) => Some(cert),
        _ => None,
    };
    let analysis_summary = ExampleAnalysis {
        verdict: match &verdict {
            Verdict::Exists(_) => "exists",
            Verdict::None { .. } => "none",
            Verdict::Inconclusive { .. } => "inconclusive",
        },
        pairs: detected.map_or(0, |c| c.pairs()),
        residuals: detected.map(|c| c.residuals),
        verified: detected.is_some_and(|c| c.verified),
    };

    let target = SynthesisTarget::new(threemode::dark_block(m, omega));
    let result = synthesis::synthesize(&spec, &target, None)?;

    let s_d = threemode::printed_s_d();
    let residuals = analysis::verify_certificate(&spec, &s_d)?;
    let decoupling =
        sim::dark_decoupling_test(&spec, &s_d, &closed_generator, SimMethod::ExpEmbed, 10.0, 1e-3)?;

    let comparison = ExampleComparison {
        hamiltonian_gap: (result.spec.omega() - &closed_omega).norm(),
        generator_spectrum_gap: detected.map(|c| spectrum_gap(&c.a_d, &closed_generator)),
        printed_rows_residual: residuals.max(),
    };

    let tol = analysis::DEFAULT_CERT_TOL;
    let scale = 1.0 + closed_omega.norm();
    let verified = analysis_summary.verified
        && result.certificate.verified
        && residuals.max() <= tol
        && comparison.hamiltonian_gap <= tol * scale
        && comparison.generator_spectrum_gap.is_some_and(|g| g <= 1e-6 * (1.0 + omega))
        && decoupling.input_decoupling_err <= 1e-6
        && decoupling.output_decoupling_err <= 1e-6
        && decoupling.autonomy_err <= 1e-6;

    let artifacts = match out_dir {
        Some(dir) => Some(write_example_artifacts(dir, &spec, detected, &result, &s_d)?),
        None => None,
    };
    let report_path = out_dir.map(|d| d.join("report.json"));

    let report = ExampleReport {
        command: "example",
        name: "section5",
        params: ExampleParams { m, omega },
        system: serde_json::from_str(&spec.to_json_string()).map_err(|e| Failure {
            code: 70,
            message: format!("system serialization failed: {e}"),
        })?,
        omega: rows(&closed_omega),
        omega_dark: rows(&threemode::dark_block(m, omega)),
        dark_generator: rows(&closed_generator),
        s: rows(&threemode::printed_s()),
        s_d: rows(&s_d),
        s_b: rows(&threemode::printed_s_b()),
        analysis: analysis_summary,
        comparison,
        decoupling,
        planted_residual: result.planted_residual,
        residuals,
        verified,
        artifacts,
    };
    emit(&report, report_path.as_deref())?;
    Ok(if verified { 0 } else { 1 })
}

/// Writes the example's artifact set: the system, both certificates, the
/// synthesized system, and a driven trajectory whose dark coordinates stay
/// on the closed-form orbit.
fn write_example_artifacts(
    dir: &Path,
    spec: &SystemSpec,
    detected: Option<&DarkModeCertificate>,
    result: &synthesis::SynthesisResult,
    s_d: &DMatrix<f64>,
) -> Result<ExampleArtifacts, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure {
        code: 64,
        message: format!("cannot create {}: {e}", dir.display()),
    })?;
    let system = dir.join("system.json");
    spec.save(&system)?;
    let analysis_certificate = match detected {
        Some(cert) => {
            let p = dir.join("analysis.cert.json");
            cert.save(&p)?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let designed = dir.join("designed.json");
    let designed_certificate = dir.join("designed.cert.json");
    result.spec.save(&designed)?;
    result.certificate.save(&designed_certificate)?;

    let mut kick = nalgebra::DVector::zeros(s_d.nrows());
    kick[0] = 1.0;
    if s_d.nrows() > 1 {
        kick[1] = 0.5;
    }
    let x0 = s_d.transpose() * (&kick / kick.norm());
    let drive = sim::DriveSignal::Sinusoid {
        amplitude: 1.0,
        frequency: 1.3,
        phase: 0.3,
        channels: None,
    };
    let traj = sim::simulate_mean(spec, &x0, &drive, SimMethod::ExpEmbed, 10.0, 1e-2)?;
    let trajectory = dir.join("trajectory.csv");
    traj.write_csv(&trajectory)?;

    Ok(ExampleArtifacts {
        system: system.display().to_string(),
        analysis_certificate,
        designed: designed.display().to_string(),
        designed_certificate: designed_certificate.display().to_string(),
        trajectory: trajectory.display().to_string(),
        report: dir.join("report.json").display().to_string(),
    })
}
