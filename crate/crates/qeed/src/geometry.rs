//! Error curves and Frenet frames of a noiseless trajectory: the forward
//! direction of the geometric correspondence.
//!
//! The j-error curve is `r^j(t) = int_0^t T_j du` with
//! `T_j . sigma = U0^dag(t) sigma_j U0(t)`. Its tangent is a unit vector, so
//! arc length equals elapsed time. For the z curve under an XY drive the
//! frame vectors come from the Phi-rotated transverse operators, which keeps
//! them continuous through curvature zeros.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::ControlPulse;
use crate::su2::{pauli_vector, propagate, sigma, sigma_x, sigma_y, PropagatorTrajectory};
use crate::vec3::{self, Vec3};
use crate::Axis;

/// Allowed deviation of an error-curve tangent from unit norm.
pub const UNIT_TANGENT_TOL: f64 = 1e-8;

/// Default propagation resolution: 4000 steps per 50 ns of gate time.
pub fn default_steps(duration: f64) -> usize {
    ((duration / 50.0 * 4000.0).ceil() as usize).max(100)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub axis: Axis,
    pub times: Vec<f64>,
    pub points: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
}

impl ErrorCurve {
    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn endpoint(&self) -> Vec3 {
        *self.points.last().unwrap()
    }

    /// Cumulative arc length at each sample; equals the time grid for a
    /// unit-speed curve.
    pub fn arc_length(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.points.len());
        out.push(0.0);
        for w in self.points.windows(2) {
            acc += vec3::dist(w[0], w[1]);
            out.push(acc);
        }
        out
    }
}

/// Per-axis error curves of one trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Qeed {
    pub curves: BTreeMap<Axis, ErrorCurve>,
}

impl Qeed {
    pub fn curve(&self, axis: Axis) -> Option<&ErrorCurve> {
        self.curves.get(&axis)
    }
}

/// Build the j-error curve of a noiseless two-level trajectory.
///
/// Tangents come from the Pauli decomposition of `U0^dag sigma_j U0`; points
/// by cumulative trapezoidal integration, so `r(0) = 0` exactly.
pub fn error_curve(traj: &PropagatorTrajectory, axis: Axis) -> Result<ErrorCurve> {
    if traj.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: traj.dim(),
        });
    }
    let sig = sigma(axis);
    let mut tangents = Vec::with_capacity(traj.unitaries.len());
    let mut max_dev = 0.0f64;
    for u in &traj.unitaries {
        let conj = u.adjoint() * &sig * u;
        let t = pauli_vector(&conj)?;
        max_dev = max_dev.max((vec3::norm(t) - 1.0).abs());
        tangents.push(t);
    }
    if max_dev > UNIT_TANGENT_TOL {
        return Err(Error::NonUnitTangent { deviation: max_dev });
    }
    let mut points = Vec::with_capacity(tangents.len());
    points.push([0.0, 0.0, 0.0]);
    let mut acc = [0.0, 0.0, 0.0];
    for k in 1..tangents.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        let step = vec3::scale(vec3::add(tangents[k - 1], tangents[k]), 0.5 * dt);
        acc = vec3::add(acc, step);
        points.push(acc);
    }
    Ok(ErrorCurve {
        axis,
        times: traj.times.clone(),
        points,
        tangents,
    })
}

/// Noiseless trajectory generated by a pulse alone (rotating frame, H0 = 0).
pub fn pulse_trajectory(pulse: &ControlPulse, steps: usize) -> Result<PropagatorTrajectory> {
    propagate(|t| pulse.hamiltonian(t), pulse.duration, steps)
}

/// Error curves of a pulse for the requested axes, all from one trajectory.
pub fn build_qeed(pulse: &ControlPulse, axes: &[Axis], steps: usize) -> Result<Qeed> {
    let traj = pulse_trajectory(pulse, steps)?;
    build_qeed_from_trajectory(&traj, axes)
}

pub fn build_qeed_from_trajectory(
    traj: &PropagatorTrajectory,
    axes: &[Axis],
) -> Result<Qeed> {
    let mut curves = BTreeMap::new();
    for &axis in axes {
        curves.insert(axis, error_curve(traj, axis)?);
    }
    Ok(Qeed { curves })
}

/// Sampled orthonormal (T, N, B) triple along the z-error curve.
#[derive(Debug, Clone)]
pub struct FrenetFrameSeries {
    pub times: Vec<f64>,
    pub tangent: Vec<Vec3>,
    pub normal: Vec<Vec3>,
    pub binormal: Vec<Vec3>,
}

impl FrenetFrameSeries {
    /// Flip the orientation of N and B together.
    pub fn flipped(&self) -> FrenetFrameSeries {
        FrenetFrameSeries {
            times: self.times.clone(),
            tangent: self.tangent.clone(),
            normal: self.normal.iter().map(|&v| vec3::scale(v, -1.0)).collect(),
            binormal: self.binormal.iter().map(|&v| vec3::scale(v, -1.0)).collect(),
        }
    }

    pub fn max_orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.times.len() {
            let (t, n, b) = (self.tangent[k], self.normal[k], self.binormal[k]);
            worst = worst
                .max((vec3::norm(t) - 1.0).abs())
                .max((vec3::norm(n) - 1.0).abs())
                .max(vec3::dot(t, n).abs())
                .max(vec3::dist(vec3::cross(t, n), b));
        }
        worst
    }
}

/// Frenet frame of the z-error curve of an XY-driven trajectory:
/// `T.sigma = U0^dag sz U0`,
/// `N.sigma = U0^dag (-sin(Phi) sx + cos(Phi) sy) U0`,
/// `B.sigma = U0^dag (-cos(Phi) sx - sin(Phi) sy) U0`.
///
/// Fails if the pulse does not match the trajectory (checked through the
/// Frenet relation `dT/dt = kappa N` with `kappa = Omega`).
pub fn frenet_frame(
    traj: &PropagatorTrajectory,
    pulse: &ControlPulse,
) -> Result<FrenetFrameSeries> {
    if traj.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: traj.dim(),
        });
    }
    let sz = sigma(Axis::Z);
    let n = traj.times.len();
    let mut tangent = Vec::with_capacity(n);
    let mut normal = Vec::with_capacity(n);
    let mut binormal = Vec::with_capacity(n);
    for (k, u) in traj.unitaries.iter().enumerate() {
        let t = traj.times[k];
        let phi = pulse.phi(t);
        let op_n = sigma_x() * C64::new(-phi.sin(), 0.0) + sigma_y() * C64::new(phi.cos(), 0.0);
        let op_b = sigma_x() * C64::new(-phi.cos(), 0.0) + sigma_y() * C64::new(-phi.sin(), 0.0);
        tangent.push(pauli_vector(&(u.adjoint() * &sz * u))?);
        normal.push(pauli_vector(&(u.adjoint() * op_n * u))?);
        binormal.push(pauli_vector(&(u.adjoint() * op_b * u))?);
    }
    let frame = FrenetFrameSeries {
        times: traj.times.clone(),
        tangent,
        normal,
        binormal,
    };
    // Consistency: dT/dt must equal Omega(t) N(t).
    let max_kappa = pulse.max_amplitude();
    let mut worst = 0.0f64;
    for k in 1..n - 1 {
        let dt = frame.times[k + 1] - frame.times[k - 1];
        let deriv = vec3::scale(
            vec3::sub(frame.tangent[k + 1], frame.tangent[k - 1]),
            1.0 / dt,
        );
        let expect = vec3::scale(frame.normal[k], pulse.omega(frame.times[k]));
        worst = worst.max(vec3::dist(deriv, expect));
    }
    let tol = 0.02 * (1.0 + max_kappa);
    if worst > tol {
        return Err(Error::FrameMismatch { deviation: worst });
    }
    Ok(frame)
}

/// Signed curvature and singularity-free torsion of a frame series:
/// `kappa = dT/dt . N`, `tau = -dB/dt . N`, with one-sided stencils at the
/// endpoints.
pub fn extract_curvature_torsion(frame: &FrenetFrameSeries) -> (Vec<f64>, Vec<f64>) {
    let n = frame.times.len();
    let deriv = |series: &Vec<Vec3>, k: usize| -> Vec3 {
        if k == 0 {
            // 2nd-order forward stencil.
            let dt = frame.times[1] - frame.times[0];
            let mut d = [0.0; 3];
            for i in 0..3 {
                d[i] = (-3.0 * series[0][i] + 4.0 * series[1][i] - series[2][i]) / (2.0 * dt);
            }
            d
        } else if k == n - 1 {
            let dt = frame.times[n - 1] - frame.times[n - 2];
            let mut d = [0.0; 3];
            for i in 0..3 {
                d[i] = (3.0 * series[n - 1][i] - 4.0 * series[n - 2][i] + series[n - 3][i])
                    / (2.0 * dt);
            }
            d
        } else {
            let dt = frame.times[k + 1] - frame.times[k - 1];
            vec3::scale(vec3::sub(series[k + 1], series[k - 1]), 1.0 / dt)
        }
    };
    let mut kappa = Vec::with_capacity(n);
    let mut torsion = Vec::with_capacity(n);
    for k in 0..n {
        kappa.push(vec3::dot(deriv(&frame.tangent, k), frame.normal[k]));
        torsion.push(-vec3::dot(deriv(&frame.binormal, k), frame.normal[k]));
    }
    (kappa, torsion)
}
