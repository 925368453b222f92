//! Small dense complex linear algebra for driven few-level systems:
//! Pauli decomposition, midpoint time-ordered propagation, and gate fidelity.
//!
//! Units: time in ns, Hamiltonian matrix elements in rad/ns (angular frequency).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Unitarity drift threshold that flags a trajectory as under-resolved.
pub const UNITARITY_WARN_TOL: f64 = 1e-8;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
    ])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0), C64::new(0.0, -1.0),
        C64::new(0.0, 1.0), C64::new(0.0, 0.0),
    ])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        C64::new(0.0, 0.0), C64::new(-1.0, 0.0),
    ])
}

pub fn sigma(axis: crate::Axis) -> CMat {
    match axis {
        crate::Axis::X => sigma_x(),
        crate::Axis::Y => sigma_y(),
        crate::Axis::Z => sigma_z(),
    }
}

/// `v . sigma` for a real 3-vector.
pub fn pauli_matrix(v: [f64; 3]) -> CMat {
    CMat::from_row_slice(2, 2, &[
        C64::new(v[2], 0.0), C64::new(v[0], -v[1]),
        C64::new(v[0], v[1]), C64::new(-v[2], 0.0),
    ])
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `|| H - H^dag ||_F / max(1, ||H||_F)`.
pub fn hermiticity_error(h: &CMat) -> f64 {
    let diff = h - h.adjoint();
    frobenius_norm(&diff) / frobenius_norm(h).max(1.0)
}

pub fn unitarity_error(u: &CMat) -> f64 {
    let d = u.nrows();
    frobenius_norm(&(u.adjoint() * u - identity(d)))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Operator 2-norm (largest singular value).
pub fn operator_norm(m: &CMat) -> f64 {
    // Largest eigenvalue of the Hermitian matrix M^dag M.
    let mm = m.adjoint() * m;
    let (vals, _) = herm_eig(&mm);
    vals.iter().fold(0.0f64, |acc, &v| acc.max(v.max(0.0))).sqrt()
}

/// H = c0 I + cx sx + cy sy + cz sz with cj = Tr(sj H)/2.
///
/// Rejects matrices that are not Hermitian within [`HERMITICITY_TOL`].
pub fn pauli_decompose(h: &CMat) -> Result<(f64, f64, f64, f64)> {
    if h.nrows() != 2 || h.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: h.nrows(),
        });
    }
    let herm = hermiticity_error(h);
    if herm > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: herm });
    }
    let c0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let cx = 0.5 * (h[(0, 1)].re + h[(1, 0)].re);
    let cy = 0.5 * (h[(1, 0)].im - h[(0, 1)].im);
    let cz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    Ok((c0, cx, cy, cz))
}

/// Pauli vector of a 2x2 Hermitian operator, ignoring the identity part.
pub fn pauli_vector(h: &CMat) -> Result<[f64; 3]> {
    let (_, cx, cy, cz) = pauli_decompose(h)?;
    Ok([cx, cy, cz])
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns (eigenvalues, eigenvectors) with eigenvectors in columns, sorted
/// ascending. Intended for the small (d <= 9) matrices used here.
pub fn herm_eig(h: &CMat) -> (Vec<f64>, CMat) {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v = identity(d);
    let norm = frobenius_norm(&a).max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 * norm {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Unitary 2x2 rotation zeroing a[(p,q)]:
                //   [ c        s*e^{i b} ]
                //   [ -s*e^{-i b}   c    ]
                let beta = apq.arg();
                let abs = apq.norm();
                let theta = 0.5 * (2.0 * abs).atan2(aqq - app);
                let c = theta.cos();
                let s = theta.sin();
                let e = C64::from_polar(1.0, beta);
                // Apply G^dag A G and V G in place on rows/cols p, q.
                for k in 0..d {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s * e.conj();
                    a[(k, q)] = akp * s * e + akq * c;
                }
                for k in 0..d {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s * e;
                    a[(q, k)] = apk * s * e.conj() + aqk * c;
                }
                for k in 0..d {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s * e.conj();
                    v[(k, q)] = vkp * s * e + vkq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    let vals: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = CMat::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        sorted_vecs.set_column(new, &v.column(old));
    }
    (sorted_vals, sorted_vecs)
}

/// `exp(-i H dt)` for a Hermitian H. Closed-form Pauli rotation for d = 2,
/// eigendecomposition otherwise; exactly unitary either way.
pub fn expm_herm(h: &CMat, dt: f64) -> CMat {
    let d = h.nrows();
    if d == 2 {
        let c0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let cx = 0.5 * (h[(0, 1)].re + h[(1, 0)].re);
        let cy = 0.5 * (h[(1, 0)].im - h[(0, 1)].im);
        let cz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let a = (cx * cx + cy * cy + cz * cz).sqrt();
        let phase = C64::from_polar(1.0, -c0 * dt);
        let (cos_a, sinc) = if a * dt.abs() < 1e-30 {
            (1.0, dt)
        } else {
            ((a * dt).cos(), (a * dt).sin() / a)
        };
        let mut u = identity(2) * C64::new(cos_a, 0.0);
        let m = pauli_matrix([cx, cy, cz]);
        u += m * C64::new(0.0, -sinc);
        u * phase
    } else {
        let (vals, vecs) = herm_eig(h);
        let mut diag = CMat::zeros(d, d);
        for (i, &lam) in vals.iter().enumerate() {
            diag[(i, i)] = C64::from_polar(1.0, -lam * dt);
        }
        &vecs * diag * vecs.adjoint()
    }
}

/// Sampled time-ordered evolution U(t_k) on a uniform grid from 0 to `tau`.
#[derive(Debug, Clone)]
pub struct PropagatorTrajectory {
    pub times: Vec<f64>,
    pub unitaries: Vec<CMat>,
    /// Set when unitarity drift along the trajectory exceeds
    /// [`UNITARITY_WARN_TOL`].
    pub unitarity_warning: bool,
}

impl PropagatorTrajectory {
    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_unitary(&self) -> &CMat {
        self.unitaries.last().unwrap()
    }

    pub fn max_unitarity_error(&self) -> f64 {
        self.unitaries
            .iter()
            .map(unitarity_error)
            .fold(0.0, f64::max)
    }
}

/// Midpoint-sampled time-ordered exponential: per step the exact unitary
/// `exp(-i H(t_mid) dt)` is left-multiplied onto the product. Global error
/// is O(dt^2).
pub fn propagate<F>(hamiltonian: F, tau: f64, steps: usize) -> Result<PropagatorTrajectory>
where
    F: Fn(f64) -> CMat,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let dt = tau / steps as f64;
    let dim = hamiltonian(0.0).nrows();
    let mut times = Vec::with_capacity(steps + 1);
    let mut unitaries = Vec::with_capacity(steps + 1);
    times.push(0.0);
    unitaries.push(identity(dim));
    let mut u = identity(dim);
    for k in 0..steps {
        let t_mid = (k as f64 + 0.5) * dt;
        let h = hamiltonian(t_mid);
        u = expm_herm(&h, dt) * u;
        times.push((k + 1) as f64 * dt);
        unitaries.push(u.clone());
    }
    let warn = unitarity_error(&u) > UNITARITY_WARN_TOL;
    Ok(PropagatorTrajectory {
        times,
        unitaries,
        unitarity_warning: warn,
    })
}

/// Target unitary together with the computational subspace it acts on.
#[derive(Debug, Clone)]
pub struct GateTarget {
    pub unitary: CMat,
    pub subspace: Vec<usize>,
}

impl GateTarget {
    pub fn full(unitary: CMat) -> Self {
        let d = unitary.nrows();
        Self {
            unitary,
            subspace: (0..d).collect(),
        }
    }

    /// X-axis rotation by `angle` as a two-level target.
    pub fn x_rotation(angle: f64) -> Self {
        Self::full(rotation_x(angle))
    }
}

pub fn rotation_x(angle: f64) -> CMat {
    let h = sigma_x() * C64::new(0.5, 0.0);
    expm_herm(&h, angle)
}

pub fn rotation_y(angle: f64) -> CMat {
    let h = sigma_y() * C64::new(0.5, 0.0);
    expm_herm(&h, angle)
}

pub fn rotation_z(angle: f64) -> CMat {
    let h = sigma_z() * C64::new(0.5, 0.0);
    expm_herm(&h, angle)
}

/// Two-term trace gate fidelity on the target's computational subspace,
/// `F = [Tr(M M^dag) + |Tr M|^2] / (ds (ds + 1))` with
/// `M = P Ut^dag U P`. Leakage out of the subspace lowers Tr(M M^dag);
/// the |Tr M|^2 term makes F invariant under global phases.
pub fn gate_fidelity(u: &CMat, target: &GateTarget) -> Result<f64> {
    let ds = target.subspace.len();
    if u.nrows() != u.ncols() {
        return Err(Error::InvalidArgument("U must be square".into()));
    }
    if target.subspace.iter().any(|&i| i >= u.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: *target.subspace.iter().max().unwrap() + 1,
        });
    }
    let m_full = target.unitary.adjoint() * u;
    // Restrict to the subspace.
    let mut m = CMat::zeros(ds, ds);
    for (a, &i) in target.subspace.iter().enumerate() {
        for (b, &j) in target.subspace.iter().enumerate() {
            m[(a, b)] = m_full[(i, j)];
        }
    }
    let tr_mm = (m.adjoint() * &m).trace().re;
    let tr_m = m.trace();
    let f = (tr_mm + tr_m.norm_sqr()) / (ds * (ds + 1)) as f64;
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn pauli_decompose_basis_elements() {
        assert_eq!(pauli_decompose(&sigma_z()).unwrap(), (0.0, 0.0, 0.0, 1.0));
        assert_eq!(pauli_decompose(&identity(2)).unwrap(), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn pauli_decompose_drive_plus_detuning() {
        // H = Omega/2 sx + Delta/2 sz with Omega = 0.2, Delta = 0.05.
        let h = sigma_x() * C64::new(0.1, 0.0) + sigma_z() * C64::new(0.025, 0.0);
        let (c0, cx, cy, cz) = pauli_decompose(&h).unwrap();
        assert_abs_diff_eq!(c0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cx, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(cy, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cz, 0.025, epsilon = 1e-15);
    }

    #[test]
    fn pauli_decompose_rejects_non_hermitian() {
        let mut h = sigma_x();
        h[(0, 1)] += C64::new(0.0, 1e-6);
        assert!(matches!(
            pauli_decompose(&h),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn pauli_roundtrip() {
        let v = [0.3, -0.7, 0.2];
        let m = pauli_matrix(v);
        let got = pauli_vector(&m).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(got[i], v[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn propagate_zero_hamiltonian_is_identity() {
        let traj = propagate(|_| CMat::zeros(2, 2), 1.0, 16).unwrap();
        for u in &traj.unitaries {
            assert!(frobenius_norm(&(u - identity(2))) < 1e-14);
        }
    }

    #[test]
    fn propagate_constant_pi_pulse() {
        // H = Omega/2 sx, Omega tau = pi => U(tau) = -i sx.
        let omega = 0.4;
        let tau = PI / omega;
        let traj = propagate(
            |_| sigma_x() * C64::new(omega / 2.0, 0.0),
            tau,
            1000,
        )
        .unwrap();
        let expected = sigma_x() * C64::new(0.0, -1.0);
        assert!(frobenius_norm(&(traj.final_unitary() - expected)) < 1e-10);
    }

    #[test]
    fn propagate_constant_sigma_z() {
        let delta = 0.3;
        let tau = 5.0;
        let traj = propagate(
            |_| sigma_z() * C64::new(delta / 2.0, 0.0),
            tau,
            800,
        )
        .unwrap();
        let u = traj.final_unitary();
        let e = C64::from_polar(1.0, -delta * tau / 2.0);
        assert!((u[(0, 0)] - e).norm() < 1e-10);
        assert!((u[(1, 1)] - e.conj()).norm() < 1e-10);
        assert!(u[(0, 1)].norm() < 1e-12);
    }

    fn chirped(t: f64) -> CMat {
        let om = 0.3 * (0.2 * t).sin();
        let phi = 0.05 * t * t;
        sigma_x() * C64::new(0.5 * om * phi.cos(), 0.0)
            + sigma_y() * C64::new(0.5 * om * phi.sin(), 0.0)
            + sigma_z() * C64::new(0.01 * t, 0.0)
    }

    #[test]
    fn second_order_convergence_on_chirp() {
        let tau = 20.0;
        let fine = propagate(chirped, tau, 4000).unwrap();
        let coarse = propagate(chirped, tau, 500).unwrap();
        let mid = propagate(chirped, tau, 1000).unwrap();
        let err_coarse = frobenius_norm(&(coarse.final_unitary() - fine.final_unitary()));
        let err_mid = frobenius_norm(&(mid.final_unitary() - fine.final_unitary()));
        assert!(
            err_coarse / err_mid >= 3.0,
            "halving dt should cut error by >= 3x: {err_coarse:.3e} vs {err_mid:.3e}"
        );
    }

    #[test]
    fn propagation_composes() {
        let tau = 20.0;
        let whole = propagate(chirped, tau, 2000).unwrap();
        let first = propagate(chirped, tau / 2.0, 1000).unwrap();
        let second = propagate(|t| chirped(t + tau / 2.0), tau / 2.0, 1000).unwrap();
        let composed = second.final_unitary() * first.final_unitary();
        assert!(frobenius_norm(&(whole.final_unitary() - composed)) < 1e-9);
    }

    #[test]
    fn unitarity_preserved() {
        let traj = propagate(chirped, 20.0, 2000).unwrap();
        assert!(traj.max_unitarity_error() < 1e-10);
        assert!(!traj.unitarity_warning);
    }

    #[test]
    fn fidelity_identity_and_orthogonal() {
        let target = GateTarget::full(identity(2));
        assert_abs_diff_eq!(gate_fidelity(&identity(2), &target).unwrap(), 1.0);
        // U = sx against I: (2 + 0)/6.
        assert_abs_diff_eq!(
            gate_fidelity(&sigma_x(), &target).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn fidelity_global_phase_invariant() {
        let target = GateTarget::x_rotation(1.1);
        let u = target.unitary.clone() * C64::from_polar(1.0, 0.77);
        assert_abs_diff_eq!(gate_fidelity(&u, &target).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn herm_eig_diagonalizes() {
        let mut h = CMat::zeros(3, 3);
        h[(0, 0)] = C64::new(1.0, 0.0);
        h[(1, 1)] = C64::new(-2.0, 0.0);
        h[(2, 2)] = C64::new(0.5, 0.0);
        h[(0, 1)] = C64::new(0.3, 0.4);
        h[(1, 0)] = C64::new(0.3, -0.4);
        h[(1, 2)] = C64::new(-0.2, 0.1);
        h[(2, 1)] = C64::new(-0.2, -0.1);
        let (vals, vecs) = herm_eig(&h);
        let mut reconstructed = CMat::zeros(3, 3);
        for (i, &lam) in vals.iter().enumerate() {
            reconstructed += &vecs.column(i) * vecs.column(i).adjoint() * C64::new(lam, 0.0);
        }
        assert!(frobenius_norm(&(&reconstructed - &h)) < 1e-12);
        assert!(unitarity_error(&vecs) < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn expm_matches_closed_form_for_d3() {
        // Diagonal case: phases must match exactly.
        let mut h = CMat::zeros(3, 3);
        h[(0, 0)] = C64::new(0.7, 0.0);
        h[(1, 1)] = C64::new(-0.1, 0.0);
        h[(2, 2)] = C64::new(0.4, 0.0);
        let u = expm_herm(&h, 2.0);
        for i in 0..3 {
            let want = C64::from_polar(1.0, -h[(i, i)].re * 2.0);
            assert!((u[(i, i)] - want).norm() < 1e-13);
        }
    }
}
