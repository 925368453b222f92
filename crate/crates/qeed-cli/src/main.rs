//! Command-line front end: pulse synthesis, robustness evaluation, device
//! fidelity sweeps, curve-to-pulse conversion, and gate-time rescaling.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when an
//! optimization fails to converge (a best-effort result file is still
//! written).

use clap::{Parser, Subcommand, ValueEnum};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use qeed::curve::{curve_library, curve_to_pulse, CurveName};
use qeed::device::{self, NoiseSpec, SweepPoint, TransmonParams};
use qeed::io::{self, PulseFile, SampledPulse, SweepConfig};
use qeed::library;
use qeed::optimizer::{self, DriveKind, FourierPulseParams, OptimizationConfig};
use qeed::pulse::{AmplitudeUnit, ControlPulse};
use qeed::robustness;
use qeed::su2::{self, GateTarget};
use qeed::Axis;

#[derive(Parser)]
#[command(name = "qeed", version, about = "Noise-robust pulse shaping via error-curve geometry")]
struct Cli {
    /// Worker threads for sweeps and gradient evaluation
    /// (default: QEED_WORKERS env var, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitArg {
    /// Plain-frequency GHz; values are multiplied by 2 pi.
    #[value(name = "GHz-linear")]
    GhzLinear,
    /// Angular frequency in rad/ns, used as-is.
    #[value(name = "rad-per-ns")]
    RadPerNs,
}

impl From<UnitArg> for AmplitudeUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::GhzLinear => AmplitudeUnit::GhzLinear,
            UnitArg::RadPerNs => AmplitudeUnit::RadPerNs,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DriveArg {
    AmpPhase,
    Xy,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a robust pulse for a target x rotation.
    Synthesize {
        /// Target gate, e.g. Xpi, Xpi2, X3pi2, X7pi4, X2pi.
        #[arg(long)]
        gate: String,
        /// Noise axes to shape against, e.g. "z" or "xyz".
        #[arg(long, default_value = "z")]
        robust: String,
        /// Number of Fourier harmonics.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum, default_value_t = DriveArg::AmpPhase)]
        drive: DriveArg,
        /// Also optimize at the shifted detuning pi/T (widened window).
        #[arg(long)]
        extended: bool,
        #[arg(long, default_value_t = 50.0)]
        gate_time: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1500)]
        steps: usize,
        #[arg(long)]
        output: PathBuf,
        /// Optional path for the per-iteration cost trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Report robustness metrics of a pulse (library name or file).
    Evaluate {
        #[arg(long)]
        pulse: String,
        /// Unit for pulse files that do not declare one.
        #[arg(long, value_enum, default_value_t = UnitArg::GhzLinear)]
        amplitude_unit: UnitArg,
        #[arg(long, default_value = "xyz")]
        axes: String,
        /// Magnus expansion order (1-4).
        #[arg(long, default_value_t = 2)]
        magnus: usize,
        #[arg(long, default_value_t = 3000)]
        steps: usize,
        /// Optional JSON report path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a fidelity sweep from a JSON config to CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = UnitArg::GhzLinear)]
        amplitude_unit: UnitArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Convert a plane/space curve into a pulse by its curvature profile.
    Curve2pulse {
        /// Library curve name (e.g. R2_pi2) or sampled-curve JSON file.
        #[arg(long)]
        curve: String,
        #[arg(long)]
        gate_time: f64,
        #[arg(long, default_value_t = 2001)]
        samples: usize,
        #[arg(long, default_value_t = 0.0)]
        initial_phase: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Change a pulse's gate time, keeping its rotation and robustness.
    Rescale {
        /// Library pulse name or parameter file.
        #[arg(long)]
        pulse: String,
        /// Gate-time scale factor; alternative to --gate-time.
        #[arg(long)]
        alpha: Option<f64>,
        /// New gate time in ns; alternative to --alpha.
        #[arg(long)]
        gate_time: Option<f64>,
        #[arg(long, value_enum, default_value_t = UnitArg::GhzLinear)]
        amplitude_unit: UnitArg,
        #[arg(long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successful exits.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("QEED_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    if workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Parse gate names like "Xpi", "X3pi2", "Xpi4" into an x-rotation angle:
/// optional integer numerator, "pi", optional integer denominator.
fn parse_gate(name: &str) -> qeed::Result<f64> {
    let bad = || qeed::Error::InvalidArgument(format!("unknown gate {name:?}")) ;
    let rest = name.strip_prefix('X').ok_or_else(bad)?;
    let pi_at = rest.find("pi").ok_or_else(bad)?;
    let (num_s, den_s) = (&rest[..pi_at], &rest[pi_at + 2..]);
    let num: f64 = if num_s.is_empty() {
        1.0
    } else {
        num_s.parse::<u32>().map_err(|_| bad())? as f64
    };
    let den: f64 = if den_s.is_empty() {
        1.0
    } else {
        den_s.parse::<u32>().map_err(|_| bad())? as f64
    };
    if den == 0.0 || num == 0.0 {
        return Err(bad());
    }
    Ok(num * PI / den)
}

fn parse_axes(s: &str) -> qeed::Result<Vec<Axis>> {
    let mut axes = Vec::new();
    for ch in s.chars() {
        let axis = Axis::from_str(&ch.to_string())?;
        if !axes.contains(&axis) {
            axes.push(axis);
        }
    }
    if axes.is_empty() {
        return Err(qeed::Error::InvalidArgument("no noise axes given".into()));
    }
    Ok(axes)
}

/// Resolve a pulse argument: bundled library name (calibrated on load) or a
/// parameter file, applying `default_unit` when the file names no unit.
fn resolve_pulse(
    spec: &str,
    default_unit: AmplitudeUnit,
) -> qeed::Result<(ControlPulse, Option<f64>)> {
    if let Ok(entry) = library::pulse_entry(spec) {
        let pulse = library::calibrated_pulse(&entry, 2000)?;
        return Ok((pulse, Some(entry.angle())));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(qeed::Error::UnknownPulse(spec.to_string()));
    }
    let mut file = io::read_pulse_file(path)?;
    if !io::pulse_file_declares_unit(path)? {
        file = file.with_amplitude_unit(default_unit);
    }
    Ok((file.to_pulse()?, None))
}

fn run(command: Command) -> qeed::Result<ExitCode> {
    match command {
        Command::Synthesize {
            gate,
            robust,
            n,
            drive,
            extended,
            gate_time,
            seed,
            restarts,
            tol,
            max_iters,
            steps,
            output,
            trace,
        } => {
            let angle = parse_gate(&gate)?;
            let axes = parse_axes(&robust)?;
            let target = GateTarget::x_rotation(angle);
            let mut config = if extended {
                OptimizationConfig::extended(axes, gate_time)
            } else {
                OptimizationConfig::first_order(axes)
            };
            config.tolerance = tol;
            config.max_iterations = max_iters;
            config.restarts = restarts;
            config.seed = seed;
            config.steps = steps;

            // Start from the sine pulse for the requested angle plus one
            // detuned harmonic; restarts randomize around this.
            let mut a = vec![0.0; n + 1];
            a[0] = angle * PI / (2.0 * gate_time);
            if n >= 1 {
                a[1] = -0.2;
            }
            let mut init = FourierPulseParams::amplitude_only(n, gate_time, a, vec![0.0; n]);
            let all_axis = init.a.len() > 1
                && (config.axes.contains(&Axis::X) || config.axes.contains(&Axis::Y));
            if drive == DriveArg::Xy {
                init.drive = DriveKind::Xy;
                init.b = vec![0.0; n + 1];
                init.psi = vec![0.0; n];
            } else if all_axis {
                // All-axis shaping needs the modulated-phase quadrature.
                init.b = vec![0.0; n + 1];
                init.psi = vec![0.0; n];
            }

            let (params, run_trace) = optimizer::optimize(&init, &target, &config)?;
            io::write_pulse_params(&output, &params)?;
            if let Some(trace_path) = &trace {
                io::write_json(trace_path, &run_trace)?;
            }
            let final_cost = *run_trace.cost.last().unwrap();
            println!(
                "gate {gate}: cost {final_cost:.3e} after {} iterations, {} restart(s), converged: {}",
                run_trace.cost.len() - 1,
                run_trace.restarts_used + 1,
                run_trace.converged
            );
            println!("wrote {}", output.display());
            Ok(if run_trace.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Evaluate {
            pulse,
            amplitude_unit,
            axes,
            magnus,
            steps,
            output,
        } => {
            let axes = parse_axes(&axes)?;
            let (control, _) = resolve_pulse(&pulse, amplitude_unit.into())?;
            let report = robustness::robustness_report(&control, &axes, magnus, steps)?;
            println!("pulse: {pulse}");
            println!("duration: {:.6} ns", report.duration);
            println!("axis  error-distance  |net-area|      magnus (rescaled, by order)");
            for axis in &axes {
                let d = report.error_distance[axis];
                let area = report.net_area[axis];
                let area_norm =
                    (area[0] * area[0] + area[1] * area[1] + area[2] * area[2]).sqrt();
                let magnus_cols: Vec<String> = report.magnus[axis]
                    .iter()
                    .map(|v| format!("{v:.3e}"))
                    .collect();
                println!(
                    "{axis}     {d:.6e}    {area_norm:.6e}    {}",
                    magnus_cols.join("  ")
                );
            }
            for (label, infid) in &report.reference_infidelity {
                println!("infidelity at {label}: {infid:.3e}");
            }
            if let Some(path) = &output {
                io::write_json(path, &report)?;
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            amplitude_unit,
            output,
        } => {
            let cfg: SweepConfig = io::read_json(&config)?;
            let points = run_sweep(&cfg, amplitude_unit.into())?;
            io::write_sweep_csv_file(&output, &points)?;
            println!("wrote {} rows to {}", points.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve2pulse {
            curve,
            gate_time,
            samples,
            initial_phase,
            output,
        } => {
            let parametric = match CurveName::from_str(&curve) {
                Ok(name) => curve_library(name, None)?,
                Err(_) => {
                    let path = Path::new(&curve);
                    if !path.exists() {
                        return Err(qeed::Error::UnknownCurve(curve.clone()));
                    }
                    io::read_curve_file(path)?
                }
            };
            let synthesized = curve_to_pulse(&parametric, gate_time, samples, initial_phase)?;
            let grid: Vec<f64> = (0..samples)
                .map(|k| gate_time * k as f64 / (samples - 1) as f64)
                .collect();
            let sampled = SampledPulse {
                t_ns: gate_time,
                omega: grid.iter().map(|&t| synthesized.pulse.omega(t)).collect(),
                phi: if synthesized.torsion.iter().all(|v| v.abs() < 1e-12)
                    && initial_phase == 0.0
                {
                    vec![]
                } else {
                    grid.iter().map(|&t| synthesized.pulse.phi(t)).collect()
                },
                amplitude_unit: AmplitudeUnit::RadPerNs,
            };
            io::write_json(&output, &PulseFile::Sampled(sampled))?;

            // Verification: the z error curve of the synthesized pulse must
            // close (and its net area indicates second-order quality).
            let traj = qeed::geometry::pulse_trajectory(&synthesized.pulse, 4000)?;
            let z_curve = qeed::geometry::error_curve(&traj, Axis::Z)?;
            let closure = robustness::error_distance(&z_curve);
            let area = robustness::net_area(&z_curve);
            let area_norm =
                (area[0] * area[0] + area[1] * area[1] + area[2] * area[2]).sqrt();
            println!(
                "total rotation angle: {:.6} rad over {gate_time} ns",
                synthesized.total_angle
            );
            println!(
                "closure |r(T)| = {closure:.3e} ({:.3e} of T); |net area| = {area_norm:.3e}",
                closure / gate_time
            );
            println!("wrote {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Rescale {
            pulse,
            alpha,
            gate_time,
            amplitude_unit,
            output,
        } => {
            let file = if let Ok(entry) = library::pulse_entry(&pulse) {
                PulseFile::Fourier(entry.params)
            } else {
                let path = Path::new(&pulse);
                if !path.exists() {
                    return Err(qeed::Error::UnknownPulse(pulse.clone()));
                }
                let mut f = io::read_pulse_file(path)?;
                if !io::pulse_file_declares_unit(path)? {
                    f = f.with_amplitude_unit(amplitude_unit.into());
                }
                f
            };
            let factor = match (alpha, gate_time) {
                (Some(a), None) => a,
                (None, Some(t)) => t / file.duration(),
                _ => {
                    return Err(qeed::Error::InvalidArgument(
                        "give exactly one of --alpha or --gate-time".into(),
                    ))
                }
            };
            let rescaled = file.rescaled(factor)?;
            io::write_json(&output, &rescaled)?;
            println!(
                "rescaled by {factor:.6}: {} ns -> {} ns; wrote {}",
                file.duration(),
                rescaled.duration(),
                output.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run_sweep(cfg: &SweepConfig, default_unit: AmplitudeUnit) -> qeed::Result<Vec<SweepPoint>> {
    let grid = cfg.grid.values()?;
    let steps = cfg.steps.unwrap_or(2000);
    let (pulse, library_angle) = resolve_pulse(&cfg.pulse, default_unit)?;
    let angle = cfg
        .angle_pi
        .map(|a| a * PI)
        .or(library_angle)
        .ok_or_else(|| {
            qeed::Error::InvalidArgument(
                "sweep config needs angle_pi for pulses loaded from files".into(),
            )
        })?;
    let target = GateTarget::x_rotation(angle);
    let tau = pulse.duration;
    let need_anharmonicity = || {
        cfg.anharmonicity.ok_or_else(|| {
            qeed::Error::InvalidArgument(format!(
                "model {:?} needs the anharmonicity field",
                cfg.model
            ))
        })
    };
    match cfg.model.as_str() {
        "single_qubit_detuned" => device::fidelity_sweep(&grid, |delta| {
            let traj = su2::propagate(&device::single_qubit_detuned(&pulse, delta), tau, steps)?;
            su2::gate_fidelity(traj.final_unitary(), &target)
        }),
        "xy_driven_qubit" => device::fidelity_sweep(&grid, |delta| {
            let noise = NoiseSpec::transverse_pair(delta, 0.0);
            let traj = su2::propagate(&device::xy_driven_qubit(&pulse, noise), tau, steps)?;
            su2::gate_fidelity(traj.final_unitary(), &target)
        }),
        "swap_subspace" => device::fidelity_sweep(&grid, |delta| {
            let traj = su2::propagate(&device::swap_subspace(&pulse, delta), tau, steps)?;
            su2::gate_fidelity(traj.final_unitary(), &target)
        }),
        "iswap_coupler" => device::fidelity_sweep(&grid, |delta| {
            let traj = su2::propagate(&device::iswap_coupler(&pulse, delta), tau, steps)?;
            su2::gate_fidelity(traj.final_unitary(), &target)
        }),
        "transmon_single" => {
            let params = TransmonParams::new(need_anharmonicity()?);
            let target2 = su2::rotation_x(angle);
            device::fidelity_sweep(&grid, |shift| {
                let h = device::transmon_single(params.with_shift(shift), &pulse, true);
                let traj = su2::propagate(&h, tau, steps)?;
                su2::gate_fidelity(
                    traj.final_unitary(),
                    &device::qubit_subspace_target(&target2, 3),
                )
            })
        }
        "spectator_qubit_gate" => {
            let params = TransmonParams::new(need_anharmonicity()?);
            let target2 = su2::rotation_x(angle);
            device::fidelity_sweep(&grid, |delta_zz| {
                device::spectator_qubit_gate(params, &pulse, delta_zz, &target2, steps)
            })
        }
        other => Err(qeed::Error::InvalidArgument(format!(
            "unknown sweep model {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_name_grammar() {
        assert_eq!(parse_gate("Xpi").unwrap(), PI);
        assert_eq!(parse_gate("X2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_gate("Xpi2").unwrap(), PI / 2.0);
        assert_eq!(parse_gate("X3pi2").unwrap(), 1.5 * PI);
        assert_eq!(parse_gate("X7pi4").unwrap(), 1.75 * PI);
        assert!(parse_gate("Ypi").is_err());
        assert!(parse_gate("X").is_err());
        assert!(parse_gate("Xpi0").is_err());
    }

    #[test]
    fn axis_list_parsing() {
        assert_eq!(parse_axes("z").unwrap(), vec![Axis::Z]);
        assert_eq!(parse_axes("xyz").unwrap(), vec![Axis::X, Axis::Y, Axis::Z]);
        assert_eq!(parse_axes("zz").unwrap(), vec![Axis::Z]);
        assert!(parse_axes("").is_err());
        assert!(parse_axes("q").is_err());
    }
}
