//! Fourier-ansatz pulse synthesis: a robustness-constrained cost over the
//! ansatz parameters, minimized by quasi-Newton (L-BFGS) descent on
//! finite-difference gradients with backtracking line search and seeded
//! restarts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry;
use crate::pulse::{AmplitudeUnit, ControlPulse, Drive, Waveform};
use crate::robustness;
use crate::su2::{self, GateTarget};
use crate::Axis;

/// Which drive scheme the parameter arrays describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DriveKind {
    /// `a`/`phi` are the amplitude series, `b`/`psi` the phase series.
    #[default]
    #[serde(rename = "amp-phase")]
    AmpPhase,
    /// `a`/`phi` and `b`/`psi` are the two enveloped quadrature amplitudes.
    #[serde(rename = "xy")]
    Xy,
}

/// Truncated-Fourier pulse parameters.
///
/// The amplitude is `sin(pi t/T) (a_0 + sum_j a_j cos(2 pi j t/T + phi_j))`,
/// so it vanishes at both ends for every parameter choice; the phase (when
/// `b` is non-empty) is `b_0 + sum_j b_j cos(2 pi j t/T + psi_j)` without
/// the envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierPulseParams {
    /// Number of harmonics: `a` has n+1 entries, `phi` has n.
    pub n: usize,
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
    pub a: Vec<f64>,
    #[serde(default)]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
    #[serde(default)]
    pub psi: Vec<f64>,
    #[serde(default)]
    pub amplitude_unit: AmplitudeUnit,
    #[serde(default, skip_serializing_if = "is_default_drive")]
    pub drive: DriveKind,
}

fn is_default_drive(d: &DriveKind) -> bool {
    *d == DriveKind::AmpPhase
}

impl FourierPulseParams {
    pub fn amplitude_only(n: usize, t_ns: f64, a: Vec<f64>, phi: Vec<f64>) -> Self {
        Self {
            n,
            t_ns,
            a,
            phi,
            b: Vec::new(),
            psi: Vec::new(),
            amplitude_unit: AmplitudeUnit::RadPerNs,
            drive: DriveKind::AmpPhase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::PulseFormat(msg));
        if self.t_ns <= 0.0 {
            return bad(format!("gate time must be positive, got {}", self.t_ns));
        }
        if self.a.len() != self.n + 1 {
            return bad(format!(
                "a must have n+1 = {} entries, got {}",
                self.n + 1,
                self.a.len()
            ));
        }
        if self.phi.len() != self.n {
            return bad(format!(
                "phi must have n = {} entries, got {}",
                self.n,
                self.phi.len()
            ));
        }
        match self.drive {
            DriveKind::AmpPhase => {
                if !self.b.is_empty() && self.psi.len() + 1 != self.b.len() {
                    return bad(format!(
                        "psi must have one entry fewer than b ({} vs {})",
                        self.psi.len(),
                        self.b.len()
                    ));
                }
            }
            DriveKind::Xy => {
                if self.b.len() != self.n + 1 || self.psi.len() != self.n {
                    return bad(
                        "xy drive needs b with n+1 entries and psi with n".into(),
                    );
                }
            }
        }
        Ok(())
    }
}

/// Realize the ansatz as a simulatable pulse (amplitudes converted to
/// rad/ns per the declared unit).
pub fn fourier_waveform(params: &FourierPulseParams) -> Result<ControlPulse> {
    params.validate()?;
    let f = params.amplitude_unit.factor();
    let scaled = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x * f).collect() };
    let amp = Waveform::Fourier {
        a: scaled(&params.a),
        phi: params.phi.clone(),
        period: params.t_ns,
        envelope: true,
    };
    let drive = match params.drive {
        DriveKind::AmpPhase => {
            let phase = if params.b.is_empty() {
                Waveform::Constant(0.0)
            } else {
                // Phase parameters are angles; no unit conversion.
                Waveform::Fourier {
                    a: params.b.clone(),
                    phi: params.psi.clone(),
                    period: params.t_ns,
                    envelope: false,
                }
            };
            Drive::AmpPhase { omega: amp, phase }
        }
        DriveKind::Xy => Drive::CartesianXY {
            omega_x: amp,
            omega_y: Waveform::Fourier {
                a: scaled(&params.b),
                phi: params.psi.clone(),
                period: params.t_ns,
                envelope: true,
            },
        },
    };
    Ok(ControlPulse {
        duration: params.t_ns,
        drive,
    })
}

/// Least-squares projection of a uniformly sampled waveform onto the
/// enveloped n-harmonic basis. Returns the parameters and the RMS residual.
pub fn fit_fourier(values: &[f64], duration: f64, n: usize) -> Result<(FourierPulseParams, f64)> {
    if values.len() < 2 * (2 * n + 1) {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples to fit {} harmonics",
            2 * (2 * n + 1),
            n
        )));
    }
    let m = values.len();
    let cols = 2 * n + 1;
    let mut design = DMatrix::zeros(m, cols);
    for r in 0..m {
        let t = duration * r as f64 / (m - 1) as f64;
        let env = (PI * t / duration).sin();
        design[(r, 0)] = env;
        for j in 1..=n {
            let arg = 2.0 * PI * j as f64 * t / duration;
            design[(r, 2 * j - 1)] = env * arg.cos();
            design[(r, 2 * j)] = env * arg.sin();
        }
    }
    let rhs = DVector::from_column_slice(values);
    let svd = design.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("fit failed: {e}")))?;
    let residual = (&design * &sol - &rhs).norm() / (m as f64).sqrt();
    let mut a = vec![sol[0]];
    let mut phi = Vec::with_capacity(n);
    for j in 1..=n {
        // p cos(x) + q sin(x) = A cos(x + phase)
        let (p, q) = (sol[2 * j - 1], sol[2 * j]);
        a.push(p.hypot(q));
        phi.push((-q).atan2(p));
    }
    Ok((
        FourierPulseParams::amplitude_only(n, duration, a, phi),
        residual,
    ))
}

/// Cost configuration: which noise axes enter the constraint term and, for
/// extended robustness, at which static detunings the objective is summed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Relative finite-difference step for the gradient.
    pub fd_step: f64,
    /// Noise axes of the constraint term xi.
    pub axes: Vec<Axis>,
    /// Detuning grid (rad/ns) for the extended objective; empty means the
    /// plain single-point cost at zero detuning.
    pub extended_deltas: Vec<f64>,
    /// Propagation steps per cost evaluation.
    pub steps: usize,
}

impl OptimizationConfig {
    pub fn first_order(axes: Vec<Axis>) -> Self {
        Self {
            tolerance: 1e-5,
            max_iterations: 500,
            restarts: 5,
            seed: 7,
            fd_step: 1e-6,
            axes,
            extended_deltas: Vec::new(),
            steps: 1500,
        }
    }

    /// Extended objective with the default detuning grid {0, pi/T}.
    pub fn extended(axes: Vec<Axis>, t_ns: f64) -> Self {
        let mut cfg = Self::first_order(axes);
        cfg.extended_deltas = vec![0.0, PI / t_ns];
        cfg
    }

    fn deltas(&self) -> Vec<f64> {
        if self.extended_deltas.is_empty() {
            vec![0.0]
        } else {
            self.extended_deltas.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub infidelity: f64,
    pub constraint: f64,
}

/// `C = (1 - F) + xi`, with `xi` the summed per-axis error distances in
/// units of the gate time; in extended mode both terms are additionally
/// summed over the configured static detunings.
pub fn cost(
    params: &FourierPulseParams,
    target: &GateTarget,
    config: &OptimizationConfig,
) -> Result<CostBreakdown> {
    let pulse = fourier_waveform(params)?;
    let tau = pulse.duration;
    let mut infidelity = 0.0;
    let mut constraint = 0.0;
    for delta in config.deltas() {
        let traj = if delta == 0.0 {
            geometry::pulse_trajectory(&pulse, config.steps)?
        } else {
            let h = |t: f64| {
                pulse.hamiltonian(t) + su2::sigma_z() * C64::new(0.5 * delta, 0.0)
            };
            su2::propagate(&h, tau, config.steps)?
        };
        infidelity += 1.0 - su2::gate_fidelity(traj.final_unitary(), target)?;
        for &axis in &config.axes {
            let curve = geometry::error_curve(&traj, axis)?;
            constraint += robustness::error_distance(&curve) / tau;
        }
    }
    Ok(CostBreakdown {
        total: infidelity + constraint,
        infidelity,
        constraint,
    })
}

/// Per-iteration record of an optimization run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub cost: Vec<f64>,
    pub infidelity: Vec<f64>,
    pub constraint: Vec<f64>,
    pub converged: bool,
    pub restarts_used: usize,
}

fn pack(params: &FourierPulseParams) -> Vec<f64> {
    let mut x = params.a.clone();
    x.extend_from_slice(&params.phi);
    x.extend_from_slice(&params.b);
    x.extend_from_slice(&params.psi);
    x
}

fn unpack(template: &FourierPulseParams, x: &[f64]) -> FourierPulseParams {
    let mut p = template.clone();
    let (na, nphi, nb) = (p.a.len(), p.phi.len(), p.b.len());
    p.a.copy_from_slice(&x[..na]);
    p.phi.copy_from_slice(&x[na..na + nphi]);
    p.b.copy_from_slice(&x[na + nphi..na + nphi + nb]);
    p.psi.copy_from_slice(&x[na + nphi + nb..]);
    p
}

fn gradient(
    template: &FourierPulseParams,
    x: &[f64],
    target: &GateTarget,
    config: &OptimizationConfig,
) -> Result<Vec<f64>> {
    let grads: Vec<Result<f64>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let h = config.fd_step * (1.0 + x[i].abs());
            let mut xp = x.to_vec();
            xp[i] += h;
            let mut xm = x.to_vec();
            xm[i] -= h;
            let cp = cost(&unpack(template, &xp), target, config)?.total;
            let cm = cost(&unpack(template, &xm), target, config)?.total;
            Ok((cp - cm) / (2.0 * h))
        })
        .collect();
    grads.into_iter().collect()
}

/// Minimize the cost from `init`, restarting from randomized perturbations
/// of `init` until converged or out of restarts. Deterministic for a fixed
/// seed. Returns the best parameters found and the trace of the winning run.
pub fn optimize(
    init: &FourierPulseParams,
    target: &GateTarget,
    config: &OptimizationConfig,
) -> Result<(FourierPulseParams, OptimizationTrace)> {
    init.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x0 = pack(init);
    let mut best: Option<(f64, FourierPulseParams, OptimizationTrace)> = None;
    for restart in 0..config.restarts.max(1) {
        let start: Vec<f64> = if restart == 0 {
            x0.clone()
        } else {
            x0.iter()
                .map(|&v| v + rng.gen_range(-0.1..0.1) * (1.0 + v.abs()))
                .collect()
        };
        let (x, trace) = descend(init, start, target, config, restart)?;
        let c = *trace.cost.last().unwrap();
        let better = best.as_ref().map(|(bc, _, _)| c < *bc).unwrap_or(true);
        if better {
            best = Some((c, unpack(init, &x), trace));
        }
        if best.as_ref().unwrap().2.converged {
            break;
        }
    }
    let (_, params, trace) = best.unwrap();
    Ok((params, trace))
}

/// Two-loop L-BFGS recursion: quasi-Newton descent direction from the
/// recent (step, gradient-change) history.
fn lbfgs_direction(g: &[f64], history: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let alpha = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= alpha * yi;
        }
        alphas.push((rho, alpha));
    }
    if let Some((s, y)) = history.last() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y), (rho, alpha)) in history.iter().zip(alphas.iter().rev()) {
        let beta = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (alpha - beta) * si;
        }
    }
    for qi in q.iter_mut() {
        *qi = -*qi;
    }
    q
}

fn descend(
    template: &FourierPulseParams,
    mut x: Vec<f64>,
    target: &GateTarget,
    config: &OptimizationConfig,
    restart: usize,
) -> Result<(Vec<f64>, OptimizationTrace)> {
    let mut trace = OptimizationTrace {
        cost: Vec::new(),
        infidelity: Vec::new(),
        constraint: Vec::new(),
        converged: false,
        restarts_used: restart,
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut current = cost(&unpack(template, &x), target, config)?;
    let mut g = gradient(template, &x, target, config)?;
    let mut history: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    const MEMORY: usize = 8;
    for _ in 0..config.max_iterations {
        trace.cost.push(current.total);
        trace.infidelity.push(current.infidelity);
        trace.constraint.push(current.constraint);
        if current.total < config.tolerance {
            trace.converged = true;
            return Ok((x, trace));
        }
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut dir = lbfgs_direction(&g, &history);
        let mut slope = dot(&g, &dir);
        if !slope.is_finite() || slope >= 0.0 {
            // Fall back to steepest descent when curvature info is stale.
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        // Backtracking line search with an Armijo condition.
        let mut step = if history.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = x
                .iter()
                .zip(&dir)
                .map(|(xi, di)| xi + step * di)
                .collect();
            let c = cost(&unpack(template, &cand), target, config)?;
            if c.total <= current.total + 1e-4 * step * slope {
                let g_new = gradient(template, &cand, target, config)?;
                let s: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                    history.push((s, y));
                    if history.len() > MEMORY {
                        history.remove(0);
                    }
                }
                x = cand;
                current = c;
                g = g_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if history.is_empty() {
                break;
            }
            // Retry from steepest descent before giving up.
            history.clear();
            continue;
        }
    }
    trace.cost.push(current.total);
    trace.infidelity.push(current.infidelity);
    trace.constraint.push(current.constraint);
    trace.converged = current.total < config.tolerance;
    Ok((x, trace))
}
