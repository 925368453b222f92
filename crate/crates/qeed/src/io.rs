//! File formats: JSON for pulses, curves, configs, and reports; CSV for
//! sweep results. CSV numbers are written with 17 significant digits so
//! reruns are byte-comparable and values round-trip exactly.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::curve::ParametricCurve;
use crate::device::SweepPoint;
use crate::error::{Error, Result};
use crate::optimizer::FourierPulseParams;
use crate::pulse::{AmplitudeUnit, ControlPulse, Waveform};

/// Write any serializable value as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Read a JSON value, wrapping parse failures with the file name.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::PulseFormat(format!("{}: {e}", path.display())))
}

/// Read and validate pulse parameters.
pub fn read_pulse_params(path: &Path) -> Result<FourierPulseParams> {
    let params: FourierPulseParams = read_json(path)?;
    params
        .validate()
        .map_err(|e| Error::PulseFormat(format!("{}: {e}", path.display())))?;
    Ok(params)
}

pub fn write_pulse_params(path: &Path, params: &FourierPulseParams) -> Result<()> {
    write_json(path, params)
}

/// Uniformly sampled pulse: amplitude (and optional phase) values on an
/// even grid over [0, T]. This is the output format of curve-derived
/// pulses, whose waveforms are not truncated Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPulse {
    #[serde(rename = "T_ns")]
    pub t_ns: f64,
    pub omega: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<f64>,
    #[serde(default)]
    pub amplitude_unit: AmplitudeUnit,
}

impl SampledPulse {
    pub fn validate(&self) -> Result<()> {
        if self.t_ns <= 0.0 {
            return Err(Error::PulseFormat(format!(
                "gate time must be positive, got {}",
                self.t_ns
            )));
        }
        if self.omega.len() < 2 {
            return Err(Error::PulseFormat("need at least 2 amplitude samples".into()));
        }
        if !self.phi.is_empty() && self.phi.len() != self.omega.len() {
            return Err(Error::PulseFormat(format!(
                "phase samples ({}) must match amplitude samples ({})",
                self.phi.len(),
                self.omega.len()
            )));
        }
        Ok(())
    }

    pub fn to_pulse(&self) -> Result<ControlPulse> {
        self.validate()?;
        let f = self.amplitude_unit.factor();
        let omega = Waveform::Samples {
            period: self.t_ns,
            values: self.omega.iter().map(|v| v * f).collect(),
        };
        let phase = if self.phi.is_empty() {
            Waveform::Constant(0.0)
        } else {
            Waveform::Samples {
                period: self.t_ns,
                values: self.phi.clone(),
            }
        };
        Ok(ControlPulse::amp_phase(self.t_ns, omega, phase))
    }
}

/// Any pulse file: Fourier parameters or a sampled waveform.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PulseFile {
    Fourier(FourierPulseParams),
    Sampled(SampledPulse),
}

impl PulseFile {
    pub fn validate(&self) -> Result<()> {
        match self {
            PulseFile::Fourier(p) => p.validate(),
            PulseFile::Sampled(p) => p.validate(),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            PulseFile::Fourier(p) => p.t_ns,
            PulseFile::Sampled(p) => p.t_ns,
        }
    }

    pub fn amplitude_unit(&self) -> AmplitudeUnit {
        match self {
            PulseFile::Fourier(p) => p.amplitude_unit,
            PulseFile::Sampled(p) => p.amplitude_unit,
        }
    }

    pub fn with_amplitude_unit(mut self, unit: AmplitudeUnit) -> Self {
        match &mut self {
            PulseFile::Fourier(p) => p.amplitude_unit = unit,
            PulseFile::Sampled(p) => p.amplitude_unit = unit,
        }
        self
    }

    pub fn to_pulse(&self) -> Result<ControlPulse> {
        match self {
            PulseFile::Fourier(p) => crate::optimizer::fourier_waveform(p),
            PulseFile::Sampled(p) => p.to_pulse(),
        }
    }

    /// Rescale the gate time by `alpha`, dividing amplitudes accordingly so
    /// the implemented rotation is unchanged; exact on the parameter level.
    pub fn rescaled(&self, alpha: f64) -> Result<PulseFile> {
        if alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rescale factor must be positive, got {alpha}"
            )));
        }
        Ok(match self {
            PulseFile::Fourier(p) => {
                let mut q = p.clone();
                q.t_ns *= alpha;
                for v in &mut q.a {
                    *v /= alpha;
                }
                // b holds the second quadrature (an amplitude) for xy
                // drives but dimensionless phase coefficients otherwise.
                if q.drive == crate::optimizer::DriveKind::Xy {
                    for v in &mut q.b {
                        *v /= alpha;
                    }
                }
                PulseFile::Fourier(q)
            }
            PulseFile::Sampled(p) => {
                let mut q = p.clone();
                q.t_ns *= alpha;
                for v in &mut q.omega {
                    *v /= alpha;
                }
                PulseFile::Sampled(q)
            }
        })
    }
}

/// Read a pulse file of either format.
pub fn read_pulse_file(path: &Path) -> Result<PulseFile> {
    let file: PulseFile = read_json(path)?;
    file.validate()
        .map_err(|e| Error::PulseFormat(format!("{}: {e}", path.display())))?;
    Ok(file)
}

/// Whether the file names its amplitude unit explicitly (files that do not
/// are subject to the command-line default).
pub fn pulse_file_declares_unit(path: &Path) -> Result<bool> {
    let value: serde_json::Value = read_json(path)?;
    Ok(value.get("amplitude_unit").is_some())
}

/// User-supplied sampled curve: points traversed in order, uniform in the
/// curve parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    pub points: Vec<[f64; 3]>,
}

/// Read a sampled curve file and interpolate it into a parametric curve.
pub fn read_curve_file(path: &Path) -> Result<ParametricCurve> {
    let file: CurveFile = read_json(path)?;
    ParametricCurve::from_samples(file.points)
}

/// Sweep grid: either explicit values or a uniform linspace.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Linspace { start: f64, stop: f64, count: usize },
    Explicit(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidArgument("empty sweep grid".into()));
                }
                Ok(v.clone())
            }
            GridSpec::Linspace { start, stop, count } => {
                if *count < 2 {
                    return Err(Error::InvalidArgument(
                        "linspace grid needs count >= 2".into(),
                    ));
                }
                let n = *count;
                Ok((0..n)
                    .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                    .collect())
            }
        }
    }
}

/// One sweep definition: which model to drive with which pulse over which
/// parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Model id, e.g. "single_qubit_detuned" or "swap_subspace".
    pub model: String,
    /// Library pulse name or path to a pulse parameter file.
    pub pulse: String,
    pub grid: GridSpec,
    /// Propagation steps per grid point; a model-appropriate default is
    /// used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Target x-rotation angle in units of pi; required for pulses loaded
    /// from files (library pulses carry their own).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_pi: Option<f64>,
    /// Transmon anharmonicity in rad/ns; required by the transmon models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anharmonicity: Option<f64>,
}

/// Format with 17 significant digits; round-trips f64 exactly.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write sweep rows as `param,fidelity,infidelity` CSV.
pub fn write_sweep_csv<W: Write>(mut w: W, points: &[SweepPoint]) -> Result<()> {
    writeln!(w, "param,fidelity,infidelity")?;
    for p in points {
        writeln!(
            w,
            "{},{},{}",
            format_g17(p.param),
            format_g17(p.fidelity),
            format_g17(p.infidelity)
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv_file(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_sweep_csv(std::io::BufWriter::new(file), points)
}
