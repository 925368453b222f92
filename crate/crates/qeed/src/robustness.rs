//! Robustness measures of a drive against quasi-static noise: error
//! distance (first order), net-area vector (second order), Magnus
//! coefficient norms up to fourth order, and the commutation criterion for
//! whether a noise axis can be corrected at all.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, ErrorCurve};
use crate::pulse::ControlPulse;
use crate::su2::{self, CMat};
use crate::vec3::{self, Vec3};
use crate::Axis;

/// Euclidean distance between the endpoint of an error curve and its start
/// (the origin). Linear in the noise strength; zero iff the curve closes.
pub fn error_distance(curve: &ErrorCurve) -> f64 {
    vec3::norm(curve.endpoint())
}

/// Net-area vector `R = int rdot x r dt` of an error curve, evaluated
/// segment-exactly on the sampled polyline.
pub fn net_area(curve: &ErrorCurve) -> Vec3 {
    let mut acc = [0.0; 3];
    for w in curve.points.windows(2) {
        let dr = vec3::sub(w[1], w[0]);
        let mid = vec3::scale(vec3::add(w[0], w[1]), 0.5);
        acc = vec3::add(acc, vec3::cross(dr, mid));
    }
    // int rdot x r = -int dr x mid per segment.
    vec3::scale(acc, -1.0)
}

/// Hamiltonian of `pulse` with an additive quasi-static noise term
/// `delta * sigma_axis`.
pub fn noisy_hamiltonian(
    pulse: &ControlPulse,
    axis: Axis,
    delta: f64,
) -> impl Fn(f64) -> CMat + '_ {
    move |t: f64| {
        let mut h = pulse.hamiltonian(t);
        h += su2::sigma(axis).map(|z| z * C64::new(delta, 0.0));
        h
    }
}

/// Gate infidelity of `pulse` against its own noiseless evolution when a
/// quasi-static `delta * sigma_axis` term is added.
pub fn noise_infidelity(pulse: &ControlPulse, axis: Axis, delta: f64, steps: usize) -> f64 {
    let ideal =
        geometry::pulse_trajectory(pulse, steps).expect("noiseless propagation");
    let h = noisy_hamiltonian(pulse, axis, delta);
    let noisy = su2::propagate(&h, pulse.duration, steps).expect("noisy propagation");
    let target = su2::GateTarget::full(ideal.final_unitary().clone());
    1.0 - su2::gate_fidelity(noisy.final_unitary(), &target).expect("matching dimensions")
}

/// Magnus expansion norms of the interaction-picture noise term.
///
/// With noise `delta * sigma_j`, the interaction generator is
/// `B(t) = -i U0(t)^dag sigma_j U0(t)` (delta scaled out), and the returned
/// values are the rescaled norms `10^-n ||A_n||` with `A_n = i Omega_n`.
/// The first two orders coincide with the error distance and the net-area
/// norm of the corresponding error curve.
pub fn magnus_coefficients(
    traj: &su2::PropagatorTrajectory,
    axis: Axis,
    order: usize,
) -> Result<Vec<f64>> {
    if order == 0 || order > 4 {
        return Err(Error::UnsupportedMagnusOrder(order));
    }
    let n = traj.times.len();
    let sigma = su2::sigma(axis);
    let minus_i = C64::new(0.0, -1.0);
    let b: Vec<CMat> = traj
        .unitaries
        .iter()
        .map(|u| (u.adjoint() * &sigma * u) * minus_i)
        .collect();
    // Cumulative-trapezoid Magnus recursion with Bernoulli coefficients:
    //   Omega_1' = B
    //   Omega_2' = -1/2 [Omega_1, B]
    //   Omega_3' = -1/2 [Omega_2, B] + 1/12 [Omega_1, [Omega_1, B]]
    //   Omega_4' = -1/2 [Omega_3, B]
    //              + 1/12 ([Omega_1, [Omega_2, B]] + [Omega_2, [Omega_1, B]])
    let zero = CMat::zeros(traj.dim(), traj.dim());
    let mut om1 = vec![zero.clone(); n];
    let mut om2 = vec![zero.clone(); n];
    let mut om3 = vec![zero.clone(); n];
    let mut om4 = zero.clone();
    let mut prev4 = zero.clone();
    for k in 1..n {
        let dt = traj.times[k] - traj.times[k - 1];
        let half = C64::new(0.5 * dt, 0.0);
        om1[k] = &om1[k - 1] + (&b[k - 1] + &b[k]) * half;
        let d2 = |i: usize| su2::commutator(&om1[i], &b[i]) * C64::new(-0.5, 0.0);
        om2[k] = &om2[k - 1] + (d2(k - 1) + d2(k)) * half;
        if order >= 3 {
            let d3 = |i: usize| {
                su2::commutator(&om2[i], &b[i]) * C64::new(-0.5, 0.0)
                    + su2::commutator(&om1[i], &su2::commutator(&om1[i], &b[i]))
                        * C64::new(1.0 / 12.0, 0.0)
            };
            om3[k] = &om3[k - 1] + (d3(k - 1) + d3(k)) * half;
        }
        if order >= 4 {
            let d4 = |i: usize| {
                su2::commutator(&om3[i], &b[i]) * C64::new(-0.5, 0.0)
                    + (su2::commutator(&om1[i], &su2::commutator(&om2[i], &b[i]))
                        + su2::commutator(&om2[i], &su2::commutator(&om1[i], &b[i])))
                        * C64::new(1.0 / 12.0, 0.0)
            };
            let cur = d4(k);
            om4 += (&prev4 + &cur) * half;
            prev4 = cur;
        }
    }
    let i_unit = C64::new(0.0, 1.0);
    let last = n - 1;
    let omegas = [&om1[last], &om2[last], &om3[last], &om4];
    Ok((0..order)
        .map(|idx| {
            let a_n = omegas[idx] * i_unit;
            10f64.powi(-(idx as i32 + 1)) * su2::operator_norm(&a_n)
        })
        .collect())
}

/// Whether a noise axis can be corrected by the given control at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correctability {
    /// `[V, Hc(t)] = 0` for all t: no pulse shape on this control can
    /// suppress the noise.
    NonCorrectable,
    PossiblyCorrectable,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrectabilityReport {
    pub verdict: Correctability,
    /// Whether the control itself explores two non-commuting directions,
    /// necessary for correcting noise along the control axis.
    pub control_spans_two_directions: bool,
    pub max_commutator_norm: f64,
}

const COMMUTATOR_TOL: f64 = 1e-12;

/// Sample `[V, Hc(t)]` over the gate and classify the noise axis.
pub fn correctability_check(
    hc: &dyn Fn(f64) -> CMat,
    v: &CMat,
    duration: f64,
    samples: usize,
) -> Result<CorrectabilityReport> {
    let n = samples.max(16);
    let mut max_comm = 0.0f64;
    let mut dirs: Vec<Vec3> = Vec::new();
    for k in 0..=n {
        let t = duration * k as f64 / n as f64;
        let h = hc(t);
        max_comm = max_comm.max(su2::operator_norm(&su2::commutator(v, &h)));
        let (_, cx, cy, cz) = su2::pauli_decompose(&h)?;
        let dir = [cx, cy, cz];
        if vec3::norm(dir) > 1e-12 {
            dirs.push(vec3::normalize(dir));
        }
    }
    // The control spans two directions if the sampled Pauli vectors are not
    // all collinear.
    let spans = dirs
        .first()
        .map(|d0| {
            dirs.iter()
                .any(|d| vec3::norm(vec3::cross(*d0, *d)) > 1e-9)
        })
        .unwrap_or(false);
    let verdict = if max_comm < COMMUTATOR_TOL {
        Correctability::NonCorrectable
    } else {
        Correctability::PossiblyCorrectable
    };
    Ok(CorrectabilityReport {
        verdict,
        control_spans_two_directions: spans,
        max_commutator_norm: max_comm,
    })
}

/// Aggregate robustness metrics of a pulse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Per-axis first-order error distance, in units of time.
    pub error_distance: BTreeMap<Axis, f64>,
    /// Per-axis net-area vector, in units of time squared.
    pub net_area: BTreeMap<Axis, Vec3>,
    /// Rescaled Magnus norms per axis, orders 1..=order.
    pub magnus: BTreeMap<Axis, Vec<f64>>,
    /// Infidelity at reference relative detunings (fraction of the peak
    /// amplitude, z axis).
    pub reference_infidelity: BTreeMap<String, f64>,
    pub duration: f64,
}

/// Build the full report for `pulse` over the given noise axes.
pub fn robustness_report(
    pulse: &ControlPulse,
    axes: &[Axis],
    magnus_order: usize,
    steps: usize,
) -> Result<RobustnessReport> {
    let traj = geometry::pulse_trajectory(pulse, steps)?;
    let mut error_distance_map = BTreeMap::new();
    let mut net_area_map = BTreeMap::new();
    let mut magnus_map = BTreeMap::new();
    for &axis in axes {
        let curve = geometry::error_curve(&traj, axis)?;
        error_distance_map.insert(axis, error_distance(&curve));
        net_area_map.insert(axis, net_area(&curve));
        magnus_map.insert(axis, magnus_coefficients(&traj, axis, magnus_order)?);
    }
    let omega_m = pulse.max_amplitude();
    let mut reference_infidelity = BTreeMap::new();
    for rel in [1e-3, 1e-2, 0.1] {
        let infid = noise_infidelity(pulse, Axis::Z, rel * omega_m, steps);
        reference_infidelity.insert(format!("{rel:e}"), infid);
    }
    Ok(RobustnessReport {
        error_distance: error_distance_map,
        net_area: net_area_map,
        magnus: magnus_map,
        reference_infidelity,
        duration: pulse.duration,
    })
}
