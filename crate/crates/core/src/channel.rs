//! Transmission quality: affine qubit channels and fidelity scores.
//!
//! The receiver qubit's Bloch vector responds affinely to the sender's,
//! `r_N(t) = D(t) r_1(0) + d(t)`. The optimal average fidelity depends only
//! on the singular values of `D` and the sign of its determinant; for
//! quasi-free chains it collapses to a closed form in the boundary
//! amplitudes `u1 = |U_{N1}|`, `v1 = |V_{N1}|` and the bulk parity
//! expectation `p`. The two-qubit encoding protocol (prepare the sender
//! pair with a CNOT, decode with a CNOT on the receiver pair) has its own
//! channel matrix, assembled here from the three boundary entries
//! `U_{N,1}(t)`, `U_{N-1,2}(t)` and `U_{N-1,1}(t)` and validated entry by
//! entry against exact diagonalization.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::dynamics::{boundary_transfer, BoundaryTransfer, Propagator};
use crate::spectral::SpectralData;
use crate::{Error, Result};

/// Determinants smaller than this count as zero when classifying `sign(det D)`.
const DET_TOL: f64 = 1e-14;

/// Affine qubit channel `r -> D r + d` at time `t`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    pub d: Matrix3<f64>,
    pub offset: Vector3<f64>,
    pub t: f64,
}

impl ChannelMatrix {
    /// Optimal average fidelity of this channel.
    pub fn fidelity(&self) -> FidelityReport {
        FidelityReport::from_d(&self.d, self.t)
    }
}

/// Fidelity score with the singular-value data it came from.
#[derive(Debug, Clone, Copy)]
pub struct FidelityReport {
    pub f: f64,
    /// Singular values of `D`, descending.
    pub deltas: [f64; 3],
    /// Sign of `det D`; zero when the determinant vanishes within tolerance.
    pub det_sign: i8,
    pub t: f64,
}

impl FidelityReport {
    /// Score a channel matrix: `F = 1/2 + (d1 + d2 + sign(det) d3) / 6`.
    pub fn from_d(d: &Matrix3<f64>, t: f64) -> Self {
        let svd = d.svd(false, false);
        let mut deltas = [svd.singular_values[0], svd.singular_values[1], svd.singular_values[2]];
        deltas.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let det = d.determinant();
        let det_sign: i8 = if det.abs() < DET_TOL {
            0
        } else if det > 0.0 {
            1
        } else {
            -1
        };
        let f = 0.5 + (deltas[0] + deltas[1] + det_sign as f64 * deltas[2]) / 6.0;
        Self { f, deltas, det_sign, t }
    }
}

/// Optimal average fidelity of a bare channel matrix.
pub fn optimal_average_fidelity(d: &Matrix3<f64>) -> FidelityReport {
    FidelityReport::from_d(d, 0.0)
}

/// Closed-form fidelity of the direct quasi-free channel:
/// `F = 1/2 + |u1^2 - v1^2|/6 + (p/3) max(u1, v1)`.
pub fn quasifree_fidelity(u1: f64, v1: f64, p: f64) -> f64 {
    0.5 + (u1 * u1 - v1 * v1).abs() / 6.0 + p / 3.0 * u1.max(v1)
}

/// Parity expectation of a thermal bulk, `p = prod_k tanh(beta E_k / 2)`.
/// `beta = +inf` is accepted and gives one when every energy is positive.
pub fn thermal_parity(energies: &[f64], beta: f64) -> Result<f64> {
    if beta < 0.0 || beta.is_nan() {
        return Err(Error::Precondition(format!("inverse temperature must be >= 0, got {beta}")));
    }
    if beta.is_infinite() {
        return Ok(energies.iter().map(|&e| if e > 0.0 { 1.0 } else { 0.0 }).product());
    }
    Ok(energies.iter().map(|&e| (beta * e / 2.0).tanh()).product())
}

/// Direct-channel fidelity from the spectral data at time `t` with bulk
/// parity `p`. The stored singular values `{p max(u1,v1), p max(u1,v1),
/// |u1^2 - v1^2|}` satisfy the report identity exactly.
pub fn direct_channel_fidelity(spec: &SpectralData, t: f64, p: f64) -> FidelityReport {
    let amps = boundary_transfer(spec, t).amplitudes();
    direct_fidelity_from_amplitudes(amps.u1, amps.v1, p, t)
}

pub fn direct_fidelity_from_amplitudes(u1: f64, v1: f64, p: f64, t: f64) -> FidelityReport {
    let mx = p * u1.max(v1);
    let diff = (u1 * u1 - v1 * v1).abs();
    let mut deltas = [mx, mx, diff];
    deltas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let det_sign = if deltas[0] < DET_TOL { 0 } else { 1 };
    FidelityReport {
        f: quasifree_fidelity(u1, v1, p),
        deltas,
        det_sign,
        t,
    }
}

/// Channel matrix of the two-qubit encoding protocol, from a full
/// propagator. Needs four distinct boundary qubits.
pub fn encoded_channel(prop: &Propagator) -> Result<ChannelMatrix> {
    let n = prop.n();
    if n < 4 {
        return Err(Error::Precondition(format!(
            "two-qubit encoding needs n >= 4, got {n}"
        )));
    }
    Ok(encoded_channel_from_entries(
        prop.u[(n - 1, 0)],
        prop.u[(n - 2, 1)],
        prop.u[(n - 2, 0)],
        prop.t,
    ))
}

/// Same channel from O(N) boundary sums.
pub fn encoded_channel_from_transfer(tr: &BoundaryTransfer, n: usize) -> Result<ChannelMatrix> {
    if n < 4 {
        return Err(Error::Precondition(format!(
            "two-qubit encoding needs n >= 4, got {n}"
        )));
    }
    Ok(encoded_channel_from_entries(tr.u_n1, tr.u_n1m2, tr.u_cross, tr.t))
}

/// The encoded channel in terms of `a = U_{N,1}(t)`, `b = U_{N-1,2}(t)` and
/// `c = U_{N-1,1}(t)`, exactly as recovered by process tomography on the
/// CNOT-encoded protocol. The offset vanishes identically, which is what
/// makes the transmission independent of the bulk state. `det D =
/// |ab - c^2|^2 (|a|^2 + |c|^2) >= 0` for every time.
fn encoded_channel_from_entries(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    t: f64,
) -> ChannelMatrix {
    let z = a * b - c * c;
    let col3_x = -((a + b) * c.conj()).re;
    let col3_y = -((-a + b) * c.conj()).im;
    let d = Matrix3::new(
        -z.re, z.im, col3_x,
        z.im, z.re, col3_y,
        0.0, 0.0, -(a.norm_sqr() + c.norm_sqr()),
    );
    ChannelMatrix { d, offset: Vector3::zeros(), t }
}

/// The transfer-time approximation of the encoded fidelity,
/// `F_e = 1/2 + u1 (u1 + 2 u2) / 6`; exact whenever `U_{N-1,1}(t) = 0`.
pub fn encoded_fidelity_approx(u1: f64, u2: f64) -> f64 {
    0.5 + u1 * (u1 + 2.0 * u2) / 6.0
}
