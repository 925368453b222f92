//! Geometric analysis and synthesis of noise-robust control pulses for
//! driven two-level quantum systems.
//!
//! The noisy dynamics of a driven qubit map onto space curves: one error
//! curve per noise axis, whose closure and enclosed net area encode first-
//! and second-order robustness of the drive. This crate provides the
//! forward map (trajectory to curves), the reverse map (analytic curves to
//! pulses), robustness metrics, a Fourier-ansatz constrained optimizer, and
//! device models for verifying robustness with fidelity sweeps.
//!
//! Conventions: times in ns, amplitudes and detunings in rad/ns (angular
//! frequency).

use serde::{Deserialize, Serialize};

pub mod curve;
pub mod device;
pub mod error;
pub mod geometry;
pub mod io;
pub mod library;
pub mod optimizer;
pub mod pulse;
pub mod robustness;
pub mod su2;
pub mod vec3;

pub use error::{Error, Result};

/// Pauli axis a noise term couples to.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument(format!("unknown axis {other:?}"))),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
            Axis::Z => write!(f, "z"),
        }
    }
}
