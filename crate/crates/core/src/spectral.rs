//! Canonical diagonalization of the quadratic fermion Hamiltonian.
//!
//! The hopping pair `(A, B)` is brought to diagonal form through
//! `A - B = Phi^T diag(omega) Psi` with `Phi`, `Psi` orthogonal and
//! `omega >= 0`; the half-sum and half-difference `P = (Phi + Psi)/2`,
//! `Q = (Phi - Psi)/2` generate the evolution matrices. Two routes are
//! provided: a singular value decomposition of `A - B` (general), and, for
//! mirror-symmetric chains, the eigendecomposition of the symmetric matrix
//! `(A - B) X`, whose signed spectrum carries the reflection parities that
//! the fast boundary formulas use.

use nalgebra::DMatrix;

use crate::chain::{exchange_matrix, HoppingMatrices};
use crate::tridiag::{eig_sym_tridiag, fix_column_signs};
use crate::{Error, Result};

/// Threshold below which a singular value is treated as an exact zero mode.
const ZERO_MODE_TOL: f64 = 1e-12;

/// Energies and canonical-transformation matrices. Rows of `phi` and `psi`
/// index modes, columns index sites.
#[derive(Debug, Clone)]
pub struct SpectralData {
    omega: Vec<f64>,
    phi: DMatrix<f64>,
    psi: DMatrix<f64>,
    p: DMatrix<f64>,
    q: DMatrix<f64>,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    /// Mode energies, non-negative and ascending.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    fn from_phi_psi(
        omega: Vec<f64>,
        phi: DMatrix<f64>,
        psi: DMatrix<f64>,
        target: &DMatrix<f64>,
    ) -> Result<Self> {
        let mut scaled = psi.clone();
        for (k, &w) in omega.iter().enumerate() {
            scaled.row_mut(k).scale_mut(w);
        }
        let resid = (phi.transpose() * scaled - target).abs().max();
        let scale = target.abs().max().max(1.0);
        if resid > 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "canonical reconstruction residual {resid:.3e} exceeds 1e-8"
            )));
        }
        let p = (&phi + &psi) * 0.5;
        let q = (&phi - &psi) * 0.5;
        Ok(Self { omega, phi, psi, p, q })
    }
}

/// Signed eigendata of `(A - B) X` for a mirror-symmetric chain.
#[derive(Debug, Clone)]
pub struct MirrorSpectralData {
    /// Rows are eigenvectors of `(A - B) X`.
    w: DMatrix<f64>,
    /// Signed eigenvalues, ordered by `(|Omega|, sign)`.
    omega_signed: Vec<f64>,
    /// Signs of the eigenvalues; exact zeros carry `+1`.
    signs: Vec<f64>,
    omega: Vec<f64>,
    /// The symmetrized `(A - B) X`, kept for reconstruction checks.
    msym: DMatrix<f64>,
}

impl MirrorSpectralData {
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn omega_signed(&self) -> &[f64] {
        &self.omega_signed
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Unsigned energies `|Omega|`, ascending.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// First-row weights `W_{k1}^2`, the wave-packet density in mode space.
    pub fn first_row_weights(&self) -> Vec<f64> {
        (0..self.n()).map(|k| self.w[(k, 0)] * self.w[(k, 0)]).collect()
    }

    /// Derive the canonical data: `Phi = W`, `Psi = diag(s) W X`. The
    /// reconstruction target `A - B` is recovered as `[(A - B) X] X`.
    pub fn to_spectral(&self) -> Result<SpectralData> {
        let n = self.n();
        let phi = self.w.clone();
        let mut psi = DMatrix::zeros(n, n);
        for k in 0..n {
            for i in 0..n {
                psi[(k, i)] = self.signs[k] * self.w[(k, n - 1 - i)];
            }
        }
        let target = &self.msym * exchange_matrix(n);
        SpectralData::from_phi_psi(self.omega.clone(), phi, psi, &target)
    }
}

/// Diagonalize the quadratic Hamiltonian. Particle-conserving chains
/// (`B = 0`) go through the symmetric tridiagonal kernel; anything else
/// through an SVD of `A - B`.
pub fn diagonalize(hop: &HoppingMatrices) -> Result<SpectralData> {
    let n = hop.n();
    let target = hop.a() - hop.b();
    if hop.is_particle_conserving() {
        let (diag, offdiag) = tridiagonal_bands(hop.a());
        let (vals, vecs) = eig_sym_tridiag(&diag, &offdiag)?;
        // modes ordered by (|lambda|, sign), zero modes counted positive
        let keyed = sort_by_magnitude_then_sign(&vals);
        let mut phi = DMatrix::zeros(n, n);
        let mut psi = DMatrix::zeros(n, n);
        let mut omega = Vec::with_capacity(n);
        for (row, &(k, s)) in keyed.iter().enumerate() {
            omega.push(vals[k].abs());
            for i in 0..n {
                phi[(row, i)] = vecs[(i, k)];
                psi[(row, i)] = s * vecs[(i, k)];
            }
        }
        return SpectralData::from_phi_psi(omega, phi, psi, &target);
    }

    let svd = target.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD returned no U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("SVD returned no V^T".into()))?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sigma[a].partial_cmp(&sigma[b]).unwrap());

    let mut phi = DMatrix::zeros(n, n);
    let mut psi = DMatrix::zeros(n, n);
    let mut omega = Vec::with_capacity(n);
    for (row, &k) in order.iter().enumerate() {
        omega.push(if sigma[k] < ZERO_MODE_TOL { 0.0 } else { sigma[k] });
        // joint sign fix: leading component of the left vector positive
        let lead = (0..n).find(|&i| u[(i, k)] != 0.0).unwrap_or(0);
        let flip = if u[(lead, k)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            phi[(row, i)] = flip * u[(i, k)];
            psi[(row, i)] = flip * v_t[(k, i)];
        }
    }
    SpectralData::from_phi_psi(omega, phi, psi, &target)
}

/// Diagonalize through the mirror route: requires `A` persymmetric and
/// `(A - B) X` symmetric (mirror-symmetric couplings and anisotropies).
pub fn diagonalize_mirror(hop: &HoppingMatrices) -> Result<MirrorSpectralData> {
    let n = hop.n();
    let x = exchange_matrix(n);
    let m = (hop.a() - hop.b()) * &x;
    let asym = (&m - m.transpose()).abs().max();
    if asym > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::Precondition(format!(
            "(A - B) X asymmetric by {asym:.3e}; chain is not mirror-compatible"
        )));
    }
    let msym = (&m + m.transpose()) * 0.5;
    let (vals, vecs) = eig_dense_sym(&msym);
    let keyed = sort_by_magnitude_then_sign(&vals);
    let mut w = DMatrix::zeros(n, n);
    let mut omega_signed = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for (row, &(k, s)) in keyed.iter().enumerate() {
        omega_signed.push(vals[k]);
        signs.push(s);
        omega.push(vals[k].abs());
        for i in 0..n {
            w[(row, i)] = vecs[(i, k)];
        }
    }
    Ok(MirrorSpectralData { w, omega_signed, signs, omega, msym })
}

/// The constant term of the diagonalized Hamiltonian, `(Tr A - sum omega)/2`.
pub fn ground_energy(hop: &HoppingMatrices) -> Result<f64> {
    let spec = diagonalize(hop)?;
    let tr: f64 = (0..hop.n()).map(|i| hop.a()[(i, i)]).sum();
    Ok(0.5 * (tr - spec.omega().iter().sum::<f64>()))
}

/// Dense symmetric eigendecomposition with deterministic ordering (ascending
/// eigenvalues) and sign-fixed column eigenvectors.
pub(crate) fn eig_dense_sym(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let mut sorted_vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        sorted_vals.push(vals[k]);
        for i in 0..n {
            vecs[(i, col)] = eig.eigenvectors[(i, k)];
        }
    }
    fix_column_signs(&mut vecs);
    (sorted_vals, vecs)
}

fn tridiagonal_bands(a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let diag = (0..n).map(|i| a[(i, i)]).collect();
    let offdiag = (0..n - 1).map(|i| a[(i, i + 1)]).collect();
    (diag, offdiag)
}

/// Order mode indices by `(|value|, sign)`, zeros treated as positive.
fn sort_by_magnitude_then_sign(vals: &[f64]) -> Vec<(usize, f64)> {
    let mut keyed: Vec<(usize, f64)> = vals
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let s = if v.abs() < ZERO_MODE_TOL {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                1.0
            };
            (k, s)
        })
        .collect();
    keyed.sort_by(|&(a, sa), &(b, sb)| {
        let (ma, mb) = (vals[a].abs(), vals[b].abs());
        ma.partial_cmp(&mb).unwrap().then(sa.partial_cmp(&sb).unwrap())
    });
    keyed
}
