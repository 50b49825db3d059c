//! Mean-value integrators for the memory dynamics.
//!
//! The state obeys a linear Volterra integro-differential equation
//!
//! ```text
//! x'(t) = A_H x(t) + ∫₀ᵗ A_Γ(t-τ) x(τ) dτ + B u(t)
//! y(t)  = ∫₀ᵗ Γ_o(t-τ) V x(τ) dτ + u(t)
//! ```
//!
//! Two integrators cover the two regimes:
//!
//! - [`SimMethod::TrapezoidVolterra`] works for arbitrary kernels. It pairs a
//!   Heun predictor-corrector with a composite trapezoid rule over the full
//!   state history, which makes every step cost one pass over that history,
//!   `O(N²)` overall, but converges at global order 2 in the step size.
//! - [`SimMethod::ExpEmbed`] requires every kernel to be a pure exponential
//!   `a e^{-λt}`. Each channel's memory integral then satisfies the local
//!   law `z_j' = x - λ_j z_j`, so the whole system embeds into an ordinary
//!   linear ODE on `(x, z_1, …, z_M)` with no history term at all; that ODE
//!   is stepped with the classical fourth-order Runge-Kutta scheme, and the
//!   output map is read off the embedded state exactly. This is the
//!   reference integrator for convergence studies.

use crate::model::{DerivedMatrices, KernelSpec, SystemSpec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::fmt;
use std::io::Write as IoWrite;
use std::str::FromStr;

/// Deterministic input drive `u(t) ∈ R^{2M}`.
#[derive(Debug, Clone)]
pub enum DriveSignal {
    Zero,
    /// `amp · sin(freq·t + phase)` on the selected entries of the input
    /// vector (0-based; `None` drives every entry). `freq` is angular.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        channels: Option<Vec<usize>>,
    },
    /// Linear interpolation through `(times[i], values[i])`, zero outside
    /// the listed range. Times must be strictly increasing.
    Piecewise {
        times: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl DriveSignal {
    /// Checks the drive against the input dimension `dim = 2M`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            DriveSignal::Zero => Ok(()),
            DriveSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                channels,
            } => {
                if ![*amplitude, *frequency, *phase].iter().all(|v| v.is_finite()) {
                    return Err(Error::MalformedSpec("sinusoid parameters must be finite".into()));
                }
                if let Some(ch) = channels {
                    if ch.is_empty() {
                        return Err(Error::MalformedSpec("empty channel selection".into()));
                    }
                    if let Some(&bad) = ch.iter().find(|&&c| c >= dim) {
                        return Err(Error::MalformedSpec(format!(
                            "drive entry {bad} out of range for a {dim}-entry input"
                        )));
                    }
                }
                Ok(())
            }
            DriveSignal::Piecewise { times, values } => {
                if times.len() < 2 {
                    return Err(Error::MalformedSpec(
                        "piecewise drive needs at least two samples".into(),
                    ));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) || !times.iter().all(|t| t.is_finite()) {
                    return Err(Error::MalformedSpec(
                        "piecewise drive times must be finite and strictly increasing".into(),
                    ));
                }
                if values.len() != times.len() {
                    return Err(Error::MalformedSpec(format!(
                        "{} sample times but {} sample values",
                        times.len(),
                        values.len()
                    )));
                }
                if values.iter().any(|v| v.len() != dim) {
                    return Err(Error::MalformedSpec(format!(
                        "every drive sample must have {dim} entries"
                    )));
                }
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::MalformedSpec("drive samples must be finite".into()));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, t: f64, dim: usize) -> DVector<f64> {
        match self {
            DriveSignal::Zero => DVector::zeros(dim),
            DriveSignal::Sinusoid {
                amplitude,
                frequency,
                phase,
                channels,
            } => {
                let s = amplitude * (frequency * t + phase).sin();
                let mut u = DVector::zeros(dim);
                match channels {
                    None => u.fill(s),
                    Some(ch) => {
                        for &c in ch {
                            u[c] = s;
                        }
                    }
                }
                u
            }
            DriveSignal::Piecewise { times, values } => {
                let mut u = DVector::zeros(dim);
                if t < times[0] || t > *times.last().unwrap() {
                    return u;
                }
                let hi = times.partition_point(|&s| s < t).min(times.len() - 1).max(1);
                let (t0, t1) = (times[hi - 1], times[hi]);
                let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                for i in 0..dim {
                    u[i] = values[hi - 1][i] * (1.0 - w) + values[hi][i] * w;
                }
                u
            }
        }
    }
}

/// Integrator selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimMethod {
    TrapezoidVolterra,
    ExpEmbed,
}

impl SimMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMethod::TrapezoidVolterra => "TrapezoidVolterra",
            SimMethod::ExpEmbed => "ExpEmbed",
        }
    }
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        match key.as_str() {
            "trapezoidvolterra" => Ok(SimMethod::TrapezoidVolterra),
            "expembed" => Ok(SimMethod::ExpEmbed),
            _ => Err(Error::MalformedSpec(format!("unknown integrator '{s}'"))),
        }
    }
}

/// A sampled trajectory: state and output on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,x_1,…,x_2n,y_1,…,y_2M` rows with full-precision decimals.
    pub fn to_csv<W: IoWrite>(&self, mut w: W) -> Result<()> {
        let nx = self.states.first().map_or(0, |x| x.len());
        let ny = self.outputs.first().map_or(0, |y| y.len());
        let mut header = String::from("t");
        for i in 1..=nx {
            header.push_str(&format!(",x_{i}"));
        }
        for i in 1..=ny {
            header.push_str(&format!(",y_{i}"));
        }
        writeln!(w, "{header}")?;
        for (i, t) in self.times.iter().enumerate() {
            let mut line = format!("{t:.16e}");
            for v in self.states[i].iter() {
                line.push_str(&format!(",{v:.16e}"));
            }
            for v in self.outputs[i].iter() {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.to_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.to_csv(std::io::BufWriter::new(f))
    }
}

fn grid(t_final: f64, dt: f64) -> Result<(usize, f64)> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::MalformedSpec(format!(
            "final time must be positive, got {t_final}"
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::MalformedSpec(format!("step must be positive, got {dt}")));
    }
    // snap the step so the grid lands exactly on t_final
    let n = (t_final / dt).round().max(1.0) as usize;
    if n > 50_000_000 {
        return Err(Error::MalformedSpec(format!(
            "grid of {n} steps is beyond the supported range"
        )));
    }
    Ok((n, t_final / n as f64))
}

/// Integrates the mean dynamics from `x0` under `drive`.
///
/// The step is snapped to divide `t_final` exactly; the returned grid has
/// `round(t_final/dt) + 1` points including both endpoints.
pub fn simulate_mean(
    spec: &SystemSpec,
    x0: &DVector<f64>,
    drive: &DriveSignal,
    method: SimMethod,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = spec.modes();
    let m = spec.channels();
    if x0.len() != 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries, phase space needs {}",
            x0.len(),
            2 * n
        )));
    }
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::MalformedSpec("initial state must be finite".into()));
    }
    drive.validate(2 * m)?;
    let (steps, h) = grid(t_final, dt)?;
    match method {
        SimMethod::TrapezoidVolterra => trapezoid_volterra(spec, x0, drive, steps, h),
        SimMethod::ExpEmbed => exp_embed(spec, x0, drive, steps, h),
    }
}

fn trapezoid_volterra(
    spec: &SystemSpec,
    x0: &DVector<f64>,
    drive: &DriveSignal,
    steps: usize,
    h: f64,
) -> Result<Trajectory> {
    let d = DerivedMatrices::new(spec);
    let a_h = d.a_h();
    let b = d.b();
    let dim = x0.len();
    let udim = 2 * spec.channels();
    if h * a_h.norm() > 2.0 {
        return Err(Error::StepTooLarge(format!(
            "step {h} is too coarse for a drift of norm {:.3}",
            a_h.norm()
        )));
    }
    // memory and output weights on the whole lag grid
    let ag: Vec<DMatrix<f64>> = (0..=steps).map(|k| d.a_gamma(k as f64 * h)).collect();
    let gv: Vec<DMatrix<f64>> = (0..=steps)
        .map(|k| d.gamma_o(k as f64 * h) * d.v())
        .collect();
    let us: Vec<DVector<f64>> = (0..=steps)
        .map(|k| drive.eval(k as f64 * h, udim))
        .collect();

    let mut states: Vec<DVector<f64>> = Vec::with_capacity(steps + 1);
    let mut outputs: Vec<DVector<f64>> = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    outputs.push(us[0].clone());

    // composite trapezoid tail over samples 0..i (weights ½ at the ends);
    // p/q hold the part that excludes the newest sample so the corrector
    // can reuse it
    let mut p_cur: DVector<f64> = DVector::zeros(dim);
    let mut q_cur: DVector<f64> = DVector::zeros(udim);

    for i in 0..steps {
        let x_i = states[i].clone();
        let mut mem_i = DVector::zeros(dim);
        if i > 0 {
            mem_i.copy_from(&p_cur);
            mem_i.gemv(0.5 * h, &ag[0], &x_i, 1.0);
        }
        let mut f_i = &mem_i + b * &us[i];
        f_i.gemv(1.0, a_h, &x_i, 1.0);

        let x_pred = &x_i + h * &f_i;

        // history sums at t_{i+1}, newest sample excluded
        let mut p_next = DVector::zeros(dim);
        let mut q_next = DVector::zeros(udim);
        p_next.gemv(0.5 * h, &ag[i + 1], &states[0], 0.0);
        q_next.gemv(0.5 * h, &gv[i + 1], &states[0], 0.0);
        for k in 1..=i {
            p_next.gemv(h, &ag[i + 1 - k], &states[k], 1.0);
            q_next.gemv(h, &gv[i + 1 - k], &states[k], 1.0);
        }

        let mut mem_pred = p_next.clone();
        mem_pred.gemv(0.5 * h, &ag[0], &x_pred, 1.0);
        let mut f_pred = &mem_pred + b * &us[i + 1];
        f_pred.gemv(1.0, a_h, &x_pred, 1.0);

        let x_next = &x_i + (h / 2.0) * (&f_i + &f_pred);

        let mut y_next = &q_next + &us[i + 1];
        y_next.gemv(0.5 * h, &gv[0], &x_next, 1.0);

        states.push(x_next);
        outputs.push(y_next);
        p_cur = p_next;
        q_cur = q_next;
    }
    let _ = q_cur;
    Ok(Trajectory {
        times: (0..=steps).map(|i| i as f64 * h).collect(),
        states,
        outputs,
    })
}

/// Augmented generator for exponential kernels: the state block feeds every
/// channel accumulator, each accumulator decays at its own rate and drives
/// the state back through the channel memory matrix.
fn embed_matrices(spec: &SystemSpec) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<(f64, f64)>)> {
    let rates: Vec<(f64, f64)> = spec
        .kernels()
        .iter()
        .map(|k| match k {
            KernelSpec::Exponential { a, lambda } => Ok((*a, *lambda)),
            other => Err(Error::MethodKernelMismatch(format!(
                "the embedding integrator needs exponential kernels, channel has {}",
                other.family_name()
            ))),
        })
        .collect::<Result<_>>()?;
    let d = DerivedMatrices::new(spec);
    let n2 = 2 * spec.modes();
    let m = spec.channels();
    let dim = n2 * (m + 1);
    let mut a_aug = DMatrix::zeros(dim, dim);
    a_aug.view_mut((0, 0), (n2, n2)).copy_from(d.a_h());
    for (j, &(a, lambda)) in rates.iter().enumerate() {
        let off = n2 * (j + 1);
        a_aug
            .view_mut((0, off), (n2, n2))
            .copy_from(&(d.channel_memory_matrix(j) * a));
        a_aug
            .view_mut((off, 0), (n2, n2))
            .copy_from(&DMatrix::identity(n2, n2));
        a_aug
            .view_mut((off, off), (n2, n2))
            .copy_from(&(DMatrix::identity(n2, n2) * -lambda));
    }
    let mut b_aug = DMatrix::zeros(dim, 2 * m);
    b_aug.view_mut((0, 0), (n2, 2 * m)).copy_from(d.b());
    Ok((a_aug, b_aug, rates))
}

fn exp_embed(
    spec: &SystemSpec,
    x0: &DVector<f64>,
    drive: &DriveSignal,
    steps: usize,
    h: f64,
) -> Result<Trajectory> {
    let (a_aug, b_aug, rates) = embed_matrices(spec)?;
    let d = DerivedMatrices::new(spec);
    let n2 = x0.len();
    let m = spec.channels();
    let udim = 2 * m;
    if h * a_aug.norm() > 2.0 {
        return Err(Error::StepTooLarge(format!(
            "step {h} is too coarse for an embedded generator of norm {:.3}",
            a_aug.norm()
        )));
    }
    let dim = a_aug.nrows();
    let mut state = DVector::zeros(dim);
    state.rows_mut(0, n2).copy_from(x0);

    let rhs = |t: f64, x: &DVector<f64>| -> DVector<f64> {
        let mut out = &b_aug * drive.eval(t, udim);
        out.gemv(1.0, &a_aug, x, 1.0);
        out
    };
    let output_of = |state: &DVector<f64>, u: &DVector<f64>| -> DVector<f64> {
        let mut y = u.clone();
        for (j, &(a, _)) in rates.iter().enumerate() {
            let z_j = state.rows(n2 * (j + 1), n2);
            let seen = d.v_row_pair(j) * z_j;
            y[2 * j] += a * seen[0];
            y[2 * j + 1] += a * seen[1];
        }
        y
    };

    let mut states = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    states.push(x0.clone());
    outputs.push(output_of(&state, &drive.eval(0.0, udim)));

    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &state);
        let k2 = rhs(t + 0.5 * h, &(&state + (0.5 * h) * &k1));
        let k3 = rhs(t + 0.5 * h, &(&state + (0.5 * h) * &k2));
        let k4 = rhs(t + h, &(&state + h * &k3));
        state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = (i + 1) as f64 * h;
        states.push(state.rows(0, n2).into_owned());
        outputs.push(output_of(&state, &drive.eval(t_next, udim)));
    }
    Ok(Trajectory {
        times: (0..=steps).map(|i| i as f64 * h).collect(),
        states,
        outputs,
    })
}

/// Dark-coordinate reference evolution `exp(a_d t) x_d0` on a time grid.
pub fn closed_form_dark(a_d: &DMatrix<f64>, x_d0: &DVector<f64>, times: &[f64]) -> Vec<DVector<f64>> {
    times
        .iter()
        .map(|&t| (a_d * t).exp() * x_d0)
        .collect()
}

/// Numerical decoupling audit of a certificate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecouplingReport {
    /// Max dark-coordinate deviation between a driven and an undriven run.
    pub input_decoupling_err: f64,
    /// Max output magnitude of an undriven dark-initialized run.
    pub output_decoupling_err: f64,
    /// Max dark-coordinate error against `exp(a_d t) x_d0`, relative to the
    /// peak reference magnitude.
    pub autonomy_err: f64,
}

/// Exercises the three dark-mode properties by direct simulation: autonomy
/// and output silence of an undriven dark state, and indifference of the
/// dark coordinates to a strong drive.
pub fn dark_decoupling_test(
    spec: &SystemSpec,
    s_d: &DMatrix<f64>,
    a_d: &DMatrix<f64>,
    method: SimMethod,
    t_final: f64,
    dt: f64,
) -> Result<DecouplingReport> {
    let dl = s_d.nrows();
    if a_d.nrows() != dl || a_d.ncols() != dl {
        return Err(Error::DimensionMismatch(format!(
            "generator is {}×{}, dark block has dimension {dl}",
            a_d.nrows(),
            a_d.ncols()
        )));
    }
    let mut x_d0 = DVector::from_fn(dl, |i, _| if i % 2 == 0 { 1.0 } else { 0.5 });
    x_d0 /= x_d0.norm();
    let x0 = s_d.transpose() * &x_d0;

    let quiet = simulate_mean(spec, &x0, &DriveSignal::Zero, method, t_final, dt)?;
    let reference = closed_form_dark(a_d, &x_d0, &quiet.times);
    let peak = reference.iter().map(|r| r.norm()).fold(0.0, f64::max).max(1e-300);
    let autonomy_err = quiet
        .states
        .iter()
        .zip(&reference)
        .map(|(x, r)| (s_d * x - r).norm())
        .fold(0.0, f64::max)
        / peak;
    let output_decoupling_err = quiet.outputs.iter().map(|y| y.norm()).fold(0.0, f64::max);

    let drive = DriveSignal::Sinusoid {
        amplitude: 1.0,
        frequency: 1.3,
        phase: 0.3,
        channels: None,
    };
    let driven = simulate_mean(spec, &x0, &drive, method, t_final, dt)?;
    let input_decoupling_err = driven
        .states
        .iter()
        .zip(&quiet.states)
        .map(|(xd, xq)| (s_d * (xd - xq)).norm())
        .fold(0.0, f64::max);

    Ok(DecouplingReport {
        input_decoupling_err,
        output_decoupling_err,
        autonomy_err,
    })
}
