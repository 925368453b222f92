//! Control pulse representations.
//!
//! A pulse is an amplitude/phase pair (Omega(t), Phi(t)) or a Cartesian
//! (Omega_x(t), Omega_y(t)) pair over a gate time, driving
//! `Hc(t) = Omega cos(Phi)/2 sx + Omega sin(Phi)/2 sy`.
//! Times are in ns, amplitudes in rad/ns.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::su2::{sigma_x, sigma_y, CMat};

/// How the numbers in a pulse file map to angular frequency.
///
/// `RadPerNs` uses amplitudes directly as rad/ns. `GhzLinear` treats them as
/// linear frequencies in GHz and multiplies by 2*pi on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AmplitudeUnit {
    #[serde(rename = "GHz-linear")]
    GhzLinear,
    #[serde(rename = "rad-per-ns")]
    #[default]
    RadPerNs,
}

impl AmplitudeUnit {
    pub fn factor(self) -> f64 {
        match self {
            AmplitudeUnit::GhzLinear => 2.0 * PI,
            AmplitudeUnit::RadPerNs => 1.0,
        }
    }
}

/// A scalar waveform on [0, T].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Waveform {
    /// `env(t) * (a[0] + sum_j a[j] cos(2 pi j t / period + phi[j-1]))`,
    /// with `env = sin(pi t / period)` when `envelope` is set.
    Fourier {
        a: Vec<f64>,
        phi: Vec<f64>,
        period: f64,
        envelope: bool,
    },
    /// `amp/2 * (1 - cos(2 pi t / period))`.
    RaisedCosine { amp: f64, period: f64 },
    /// Linear interpolation through uniformly spaced samples on [0, T].
    Samples { period: f64, values: Vec<f64> },
    Constant(f64),
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Waveform::Fourier {
                a,
                phi,
                period,
                envelope,
            } => {
                let mut s = a[0];
                for (j, &aj) in a.iter().enumerate().skip(1) {
                    s += aj * (2.0 * PI * j as f64 * t / period + phi[j - 1]).cos();
                }
                if *envelope {
                    s * (PI * t / period).sin()
                } else {
                    s
                }
            }
            Waveform::RaisedCosine { amp, period } => {
                0.5 * amp * (1.0 - (2.0 * PI * t / period).cos())
            }
            Waveform::Samples { period, values } => {
                let n = values.len();
                if n == 1 {
                    return values[0];
                }
                let x = (t / period).clamp(0.0, 1.0) * (n - 1) as f64;
                let k = (x.floor() as usize).min(n - 2);
                let frac = x - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
            Waveform::Constant(c) => *c,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Waveform::Fourier {
                a,
                phi,
                period,
                envelope,
            } => {
                let mut s = a[0];
                let mut ds = 0.0;
                for (j, &aj) in a.iter().enumerate().skip(1) {
                    let w = 2.0 * PI * j as f64 / period;
                    let arg = w * t + phi[j - 1];
                    s += aj * arg.cos();
                    ds += -aj * w * arg.sin();
                }
                if *envelope {
                    let e = PI * t / period;
                    ds * e.sin() + s * (PI / period) * e.cos()
                } else {
                    ds
                }
            }
            Waveform::RaisedCosine { amp, period } => {
                let w = 2.0 * PI / period;
                0.5 * amp * w * (w * t).sin()
            }
            Waveform::Samples { period, values } => {
                let n = values.len();
                if n == 1 {
                    return 0.0;
                }
                let dt = period / (n - 1) as f64;
                let x = (t / period).clamp(0.0, 1.0) * (n - 1) as f64;
                let k = (x.floor() as usize).min(n - 2);
                (values[k + 1] - values[k]) / dt
            }
            Waveform::Constant(_) => 0.0,
        }
    }

    /// Stretch the time axis by `alpha` and multiply values by `value_scale`.
    fn rescaled(&self, alpha: f64, value_scale: f64) -> Waveform {
        match self {
            Waveform::Fourier {
                a,
                phi,
                period,
                envelope,
            } => Waveform::Fourier {
                a: a.iter().map(|x| x * value_scale).collect(),
                phi: phi.clone(),
                period: period * alpha,
                envelope: *envelope,
            },
            Waveform::RaisedCosine { amp, period } => Waveform::RaisedCosine {
                amp: amp * value_scale,
                period: period * alpha,
            },
            Waveform::Samples { period, values } => Waveform::Samples {
                period: period * alpha,
                values: values.iter().map(|x| x * value_scale).collect(),
            },
            Waveform::Constant(c) => Waveform::Constant(c * value_scale),
        }
    }
}

/// Transverse drive content of a pulse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Drive {
    AmpPhase { omega: Waveform, phase: Waveform },
    CartesianXY { omega_x: Waveform, omega_y: Waveform },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlPulse {
    /// Gate time in ns.
    pub duration: f64,
    pub drive: Drive,
}

impl ControlPulse {
    pub fn amp_phase(duration: f64, omega: Waveform, phase: Waveform) -> Self {
        Self {
            duration,
            drive: Drive::AmpPhase { omega, phase },
        }
    }

    /// Pure-amplitude sx/2 drive (Phi = 0).
    pub fn amplitude_only(duration: f64, omega: Waveform) -> Self {
        Self::amp_phase(duration, omega, Waveform::Constant(0.0))
    }

    pub fn omega(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::AmpPhase { omega, .. } => omega.value(t),
            Drive::CartesianXY { omega_x, omega_y } => {
                omega_x.value(t).hypot(omega_y.value(t))
            }
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::AmpPhase { phase, .. } => phase.value(t),
            Drive::CartesianXY { omega_x, omega_y } => {
                omega_y.value(t).atan2(omega_x.value(t))
            }
        }
    }

    pub fn omega_derivative(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::AmpPhase { omega, .. } => omega.derivative(t),
            Drive::CartesianXY { omega_x, omega_y } => {
                let (ox, oy) = (omega_x.value(t), omega_y.value(t));
                let norm = ox.hypot(oy);
                if norm < 1e-300 {
                    0.0
                } else {
                    (ox * omega_x.derivative(t) + oy * omega_y.derivative(t)) / norm
                }
            }
        }
    }

    /// Transverse drive components (Omega_x, Omega_y) such that
    /// Hc = Omega_x/2 sx + Omega_y/2 sy.
    pub fn xy_components(&self, t: f64) -> (f64, f64) {
        match &self.drive {
            Drive::AmpPhase { omega, phase } => {
                let om = omega.value(t);
                let ph = phase.value(t);
                (om * ph.cos(), om * ph.sin())
            }
            Drive::CartesianXY { omega_x, omega_y } => {
                (omega_x.value(t), omega_y.value(t))
            }
        }
    }

    /// Control Hamiltonian at time t.
    pub fn hamiltonian(&self, t: f64) -> CMat {
        let (ox, oy) = self.xy_components(t);
        sigma_x() * C64::new(0.5 * ox, 0.0) + sigma_y() * C64::new(0.5 * oy, 0.0)
    }

    /// Maximum |Omega| over a dense sample of the gate time.
    pub fn max_amplitude(&self) -> f64 {
        let n = 4001;
        (0..n)
            .map(|k| self.omega(self.duration * k as f64 / (n - 1) as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Integral of Omega(t) over the gate time (the total rotation angle for
    /// a fixed-axis drive), by dense trapezoidal quadrature.
    pub fn rotation_angle(&self) -> f64 {
        let n = 8001usize;
        let dt = self.duration / (n - 1) as f64;
        let (ox0, oy0) = self.xy_components(0.0);
        let mut prev = ox0.hypot(oy0) * signed_dir(ox0, oy0);
        let mut acc = 0.0;
        for k in 1..n {
            let (ox, oy) = self.xy_components(dt * k as f64);
            let cur = ox.hypot(oy) * signed_dir(ox, oy);
            acc += 0.5 * (prev + cur) * dt;
            prev = cur;
        }
        acc
    }

    /// Scale all amplitudes by `c`, keeping the gate time.
    pub fn scaled_amplitude(&self, c: f64) -> ControlPulse {
        let drive = match &self.drive {
            Drive::AmpPhase { omega, phase } => Drive::AmpPhase {
                omega: omega.rescaled(1.0, c),
                phase: phase.clone(),
            },
            Drive::CartesianXY { omega_x, omega_y } => Drive::CartesianXY {
                omega_x: omega_x.rescaled(1.0, c),
                omega_y: omega_y.rescaled(1.0, c),
            },
        };
        ControlPulse {
            duration: self.duration,
            drive,
        }
    }

    /// Add a constant to the drive phase, rotating the axis in the x-y plane.
    pub fn with_phase_offset(&self, offset: f64) -> ControlPulse {
        let drive = match &self.drive {
            Drive::AmpPhase { omega, phase } => {
                let shifted = match phase {
                    Waveform::Constant(c) => Waveform::Constant(c + offset),
                    Waveform::Fourier {
                        a,
                        phi,
                        period,
                        envelope,
                    } => {
                        assert!(!envelope, "phase waveforms carry no envelope");
                        let mut a = a.clone();
                        a[0] += offset;
                        Waveform::Fourier {
                            a,
                            phi: phi.clone(),
                            period: *period,
                            envelope: false,
                        }
                    }
                    Waveform::Samples { period, values } => Waveform::Samples {
                        period: *period,
                        values: values.iter().map(|v| v + offset).collect(),
                    },
                    Waveform::RaisedCosine { .. } => {
                        panic!("raised-cosine waveform is not a phase")
                    }
                };
                Drive::AmpPhase {
                    omega: omega.clone(),
                    phase: shifted,
                }
            }
            Drive::CartesianXY { .. } => {
                let n = 4001;
                let dt = self.duration / (n - 1) as f64;
                let omega = Waveform::Samples {
                    period: self.duration,
                    values: (0..n).map(|k| self.omega(dt * k as f64)).collect(),
                };
                let phase = Waveform::Samples {
                    period: self.duration,
                    values: (0..n).map(|k| self.phi(dt * k as f64) + offset).collect(),
                };
                Drive::AmpPhase { omega, phase }
            }
        };
        ControlPulse {
            duration: self.duration,
            drive,
        }
    }
}

fn signed_dir(ox: f64, oy: f64) -> f64 {
    // Sign of the drive along its dominant axis; keeps Omega signed for
    // fixed-axis pulses that cross zero.
    if ox.abs() >= oy.abs() {
        if ox >= 0.0 { 1.0 } else { -1.0 }
    } else if oy >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Stretch a pulse in time by `alpha > 0`: gate time `alpha T`, amplitudes
/// divided by `alpha`, phase waveform stretched unchanged. Error curves keep
/// their shape with arc length scaled by `alpha`, so robustness properties
/// are preserved.
pub fn rescale_pulse(pulse: &ControlPulse, alpha: f64) -> Result<ControlPulse> {
    if alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rescale factor must be positive, got {alpha}"
        )));
    }
    let inv = 1.0 / alpha;
    let drive = match &pulse.drive {
        Drive::AmpPhase { omega, phase } => Drive::AmpPhase {
            omega: omega.rescaled(alpha, inv),
            phase: phase.rescaled(alpha, 1.0),
        },
        Drive::CartesianXY { omega_x, omega_y } => Drive::CartesianXY {
            omega_x: omega_x.rescaled(alpha, inv),
            omega_y: omega_y.rescaled(alpha, inv),
        },
    };
    Ok(ControlPulse {
        duration: pulse.duration * alpha,
        drive,
    })
}

/// Cosine pulse `Omega(t) = (theta/T)(1 - cos(2 pi t/T))` implementing a
/// rotation by `theta` about x. The trivial waveform used as the baseline in
/// robustness comparisons.
pub fn cosine_pulse(angle: f64, duration: f64) -> ControlPulse {
    ControlPulse::amplitude_only(
        duration,
        Waveform::RaisedCosine {
            amp: 2.0 * angle / duration,
            period: duration,
        },
    )
}

/// Sine pulse `Omega(t) = A sin(pi t/T)` with `A = pi theta / (2T)`.
pub fn sine_pulse(angle: f64, duration: f64) -> ControlPulse {
    ControlPulse::amplitude_only(
        duration,
        Waveform::Fourier {
            a: vec![PI * angle / (2.0 * duration)],
            phi: vec![],
            period: duration,
            envelope: true,
        },
    )
}

/// Square pulse of constant amplitude `theta / T`.
pub fn square_pulse(angle: f64, duration: f64) -> ControlPulse {
    ControlPulse::amplitude_only(duration, Waveform::Constant(angle / duration))
}
