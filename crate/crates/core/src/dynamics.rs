//! Heisenberg evolution matrices and boundary transfer amplitudes.
//!
//! Evolution is synthesized spectrally, `U(t) = P^T e^{-i w t} P +
//! Q^T e^{i w t} Q` and `V(t) = P^T e^{-i w t} Q + Q^T e^{i w t} P`, exact
//! at any time with no step-error accumulation. Boundary-only queries
//! (`U_{N1}`, `U_{N-1,2}`, `U_{N-1,1}`, `V_{N1}`) are O(N) mode sums; the
//! full matrices are only assembled on demand. For particle-conserving
//! chains [`XxModes`] carries just the eigenvalues and the four tracked
//! eigenvector rows, which keeps a whole chain diagonalization at O(N^2).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chain::ChainSpec;
use crate::spectral::{MirrorSpectralData, SpectralData};
use crate::tridiag::eig_sym_tridiag_rows;
use crate::{Error, Result};

/// Time-evolution matrices at a fixed time.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub t: f64,
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
}

impl Propagator {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }
}

/// Moduli of the boundary amplitudes entering the fidelity formulas.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryAmplitudes {
    pub t: f64,
    /// `|U_{N,1}(t)|`
    pub u1: f64,
    /// `|V_{N,1}(t)|`
    pub v1: f64,
    /// `|U_{N-1,2}(t)|`
    pub u2: f64,
    /// `|U_{N-1,1}(t)|`
    pub u_cross: f64,
}

/// Complex boundary transfer entries at one time.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryTransfer {
    pub t: f64,
    /// `U_{N,1}(t)`
    pub u_n1: Complex64,
    /// `U_{N-1,2}(t)`
    pub u_n1m2: Complex64,
    /// `U_{N-1,1}(t)`
    pub u_cross: Complex64,
    /// `V_{N,1}(t)`
    pub v_n1: Complex64,
}

impl BoundaryTransfer {
    pub fn amplitudes(&self) -> BoundaryAmplitudes {
        BoundaryAmplitudes {
            t: self.t,
            u1: self.u_n1.norm(),
            v1: self.v_n1.norm(),
            u2: self.u_n1m2.norm(),
            u_cross: self.u_cross.norm(),
        }
    }
}

/// Assemble `U(t)` and `V(t)` from the canonical data.
pub fn propagator(spec: &SpectralData, t: f64) -> Propagator {
    let n = spec.n();
    let (p, q) = (spec.p(), spec.q());
    let mut pc = p.clone();
    let mut ps = p.clone();
    let mut qc = q.clone();
    let mut qs = q.clone();
    for (k, &w) in spec.omega().iter().enumerate() {
        let (s, c) = (w * t).sin_cos();
        pc.row_mut(k).scale_mut(c);
        ps.row_mut(k).scale_mut(s);
        qc.row_mut(k).scale_mut(c);
        qs.row_mut(k).scale_mut(s);
    }
    // U = P^T e^- P + Q^T e^+ Q with e^± = cos ∓ i sin
    let u_re = p.transpose() * &pc + q.transpose() * &qc;
    let u_im = q.transpose() * &qs - p.transpose() * &ps;
    let v_re = p.transpose() * &qc + q.transpose() * &pc;
    let v_im = q.transpose() * &ps - p.transpose() * &qs;
    let u = DMatrix::from_fn(n, n, |i, j| Complex64::new(u_re[(i, j)], u_im[(i, j)]));
    let v = DMatrix::from_fn(n, n, |i, j| Complex64::new(v_re[(i, j)], v_im[(i, j)]));
    Propagator { t, u, v }
}

/// O(N) mode sums for the boundary entries.
pub fn boundary_transfer(spec: &SpectralData, t: f64) -> BoundaryTransfer {
    let n = spec.n();
    let (p, q) = (spec.p(), spec.q());
    let mut u_n1 = Complex64::ZERO;
    let mut u_n1m2 = Complex64::ZERO;
    let mut u_cross = Complex64::ZERO;
    let mut v_n1 = Complex64::ZERO;
    for (k, &w) in spec.omega().iter().enumerate() {
        let em = Complex64::from_polar(1.0, -w * t);
        let ep = em.conj();
        let (p0, p1, pn2, pn1) = (p[(k, 0)], p[(k, 1)], p[(k, n - 2)], p[(k, n - 1)]);
        let (q0, q1, qn2, qn1) = (q[(k, 0)], q[(k, 1)], q[(k, n - 2)], q[(k, n - 1)]);
        u_n1 += em * (pn1 * p0) + ep * (qn1 * q0);
        u_n1m2 += em * (pn2 * p1) + ep * (qn2 * q1);
        u_cross += em * (pn2 * p0) + ep * (qn2 * q0);
        v_n1 += em * (pn1 * q0) + ep * (qn1 * p0);
    }
    BoundaryTransfer { t, u_n1, u_n1m2, u_cross, v_n1 }
}

/// Boundary amplitude moduli; equal to the corresponding [`propagator`]
/// entries by construction.
pub fn boundary_amplitudes(spec: &SpectralData, t: f64) -> BoundaryAmplitudes {
    boundary_transfer(spec, t).amplitudes()
}

/// Evaluate [`boundary_amplitudes`] over an ascending time grid.
pub fn amplitude_timeseries(spec: &SpectralData, t_grid: &[f64]) -> Result<Vec<BoundaryAmplitudes>> {
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Precondition("non-finite time in grid".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("time grid must ascend".into()));
    }
    Ok(t_grid.iter().map(|&t| boundary_amplitudes(spec, t)).collect())
}

/// `|U_{n,source}(t)|` for every site `n` and grid time; `source` is
/// 1-based. Column `t` of the result satisfies
/// `sum_n |U_{n,source}|^2 + |V_{n,source}|^2 = 1`.
pub fn site_amplitude_field(
    spec: &SpectralData,
    source: usize,
    t_grid: &[f64],
) -> Result<DMatrix<f64>> {
    let n = spec.n();
    if source == 0 || source > n {
        return Err(Error::Precondition(format!("source site {source} outside 1..={n}")));
    }
    let s = source - 1;
    let (p, q) = (spec.p(), spec.q());
    let mut out = DMatrix::zeros(n, t_grid.len());
    for (col, &t) in t_grid.iter().enumerate() {
        for i in 0..n {
            let mut amp = Complex64::ZERO;
            for (k, &w) in spec.omega().iter().enumerate() {
                let em = Complex64::from_polar(1.0, -w * t);
                amp += em * (p[(k, i)] * p[(k, s)]) + em.conj() * (q[(k, i)] * q[(k, s)]);
            }
            out[(i, col)] = amp.norm();
        }
    }
    Ok(out)
}

/// Wave-packet density in mode space, `rho(k) = W_{k1}^2`; sums to one.
pub fn wavepacket_density(mirror: &MirrorSpectralData) -> Vec<f64> {
    mirror.first_row_weights()
}

/// Eigenvalues and the four boundary eigenvector rows of a
/// particle-conserving chain; the O(N^2) workhorse behind optimizer scans
/// and long-chain amplitude queries.
#[derive(Debug, Clone)]
pub struct XxModes {
    n: usize,
    lambda: Vec<f64>,
    row1: Vec<f64>,
    row2: Vec<f64>,
    row_nm1: Vec<f64>,
    row_n: Vec<f64>,
}

impl XxModes {
    pub fn from_spec(spec: &ChainSpec) -> Result<Self> {
        if !spec.is_xx() {
            return Err(Error::Precondition("XxModes requires a particle-conserving chain".into()));
        }
        let n = spec.n();
        if n < 2 {
            return Err(Error::Precondition("XxModes needs at least two sites".into()));
        }
        let diag = spec.fields().to_vec();
        let offdiag: Vec<f64> = spec.couplings().iter().map(|j| j / 2.0).collect();
        let (lambda, rows) = eig_sym_tridiag_rows(&diag, &offdiag, &[0, 1, n - 2, n - 1])?;
        Ok(Self {
            n,
            lambda,
            row1: rows[0].clone(),
            row2: rows[1].clone(),
            row_nm1: rows[2].clone(),
            row_n: rows[3].clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Signed single-particle eigenvalues, ascending.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// First-row weights `O_{1k}^2` (the XX wave-packet density).
    pub fn density(&self) -> Vec<f64> {
        self.row1.iter().map(|o| o * o).collect()
    }

    /// Complex boundary entries via the XX mode sums (`V = 0`).
    pub fn transfer(&self, t: f64) -> BoundaryTransfer {
        let mut u_n1 = Complex64::ZERO;
        let mut u_n1m2 = Complex64::ZERO;
        let mut u_cross = Complex64::ZERO;
        for k in 0..self.lambda.len() {
            let em = Complex64::from_polar(1.0, -self.lambda[k] * t);
            u_n1 += em * (self.row1[k] * self.row_n[k]);
            u_n1m2 += em * (self.row2[k] * self.row_nm1[k]);
            u_cross += em * (self.row1[k] * self.row_nm1[k]);
        }
        BoundaryTransfer { t, u_n1, u_n1m2, u_cross, v_n1: Complex64::ZERO }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hopping, ChainSpec};
    use crate::spectral::diagonalize;
    use std::f64::consts::PI;

    fn identity_c(n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j { Complex64::ONE } else { Complex64::ZERO }
        })
    }

    #[test]
    fn propagator_at_zero_time() {
        let spec = diagonalize(&build_hopping(&ChainSpec::xx_minimal(7, 0.4).unwrap())).unwrap();
        let prop = propagator(&spec, 0.0);
        assert!((prop.u - identity_c(7)).map(|z| z.norm()).max() < 1e-12);
        assert!(prop.v.map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn canonical_unitarity() {
        let spec =
            diagonalize(&build_hopping(&ChainSpec::xy_minimal(9, 0.5, 0.7, 0.8, 1.2).unwrap()))
                .unwrap();
        for &t in &[0.3, 2.7, 11.0] {
            let prop = propagator(&spec, t);
            let uu = &prop.u * prop.u.adjoint() + &prop.v * prop.v.adjoint();
            assert!((uu - identity_c(9)).map(|z| z.norm()).max() < 1e-10, "t = {t}");
            let uv = &prop.u * prop.v.transpose() + &prop.v * prop.u.transpose();
            assert!(uv.map(|z| z.norm()).max() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn two_site_closed_form() {
        let spec = ChainSpec::new(vec![1.0], vec![0.0], vec![0.0, 0.0]).unwrap();
        let data = diagonalize(&build_hopping(&spec)).unwrap();
        for &t in &[0.3, PI / 2.0, PI, 2.4] {
            let amps = boundary_amplitudes(&data, t);
            assert!((amps.u1 - (t / 2.0).sin().abs()).abs() < 1e-12);
            assert!(amps.v1 < 1e-14);
        }
    }

    #[test]
    fn pst_chain_is_perfect_mirror() {
        let data = diagonalize(&build_hopping(&ChainSpec::pst(16).unwrap())).unwrap();
        let prop = propagator(&data, PI);
        let n = 16;
        for i in 0..n {
            for j in 0..n {
                let expect = if i + j == n - 1 { 1.0 } else { 0.0 };
                assert!((prop.u[(i, j)].norm() - expect).abs() < 1e-8);
                assert!(prop.v[(i, j)].norm() < 1e-8);
            }
        }
    }

    #[test]
    fn group_property() {
        let data =
            diagonalize(&build_hopping(&ChainSpec::xy_minimal(8, 0.6, 0.4, 0.9, 0.7).unwrap()))
                .unwrap();
        for &(t1, t2) in &[(0.7, 1.9), (2.3, 4.1), (0.05, 9.7)] {
            let a = propagator(&data, t1);
            let b = propagator(&data, t2);
            let c = propagator(&data, t1 + t2);
            let u_comp = &a.u * &b.u + &a.v * b.v.map(|z| z.conj());
            assert!((u_comp - c.u).map(|z| z.norm()).max() < 1e-9);
        }
    }

    #[test]
    fn boundary_sums_match_propagator() {
        let data =
            diagonalize(&build_hopping(&ChainSpec::xy_minimal(10, 0.48, 0.5, 0.5, 0.5).unwrap()))
                .unwrap();
        for &t in &[0.0, 1.3, 6.6, 14.2] {
            let tr = boundary_transfer(&data, t);
            let prop = propagator(&data, t);
            let n = 10;
            assert!((tr.u_n1 - prop.u[(n - 1, 0)]).norm() < 1e-10);
            assert!((tr.u_n1m2 - prop.u[(n - 2, 1)]).norm() < 1e-10);
            assert!((tr.u_cross - prop.u[(n - 2, 0)]).norm() < 1e-10);
            assert!((tr.v_n1 - prop.v[(n - 1, 0)]).norm() < 1e-10);
        }
    }

    #[test]
    fn mirror_amplitude_symmetry() {
        // U_{1,N-1} = U_{2,N} for mirror-symmetric chains
        let data =
            diagonalize(&build_hopping(&ChainSpec::xx_multi(9, &[0.5, 0.8]).unwrap())).unwrap();
        for &t in &[1.1, 4.4, 9.3] {
            let prop = propagator(&data, t);
            assert!((prop.u[(0, 7)] - prop.u[(1, 8)]).norm() < 1e-10);
        }
    }

    #[test]
    fn timeseries_and_grid_validation() {
        let data = diagonalize(&build_hopping(&ChainSpec::xx_minimal(5, 0.5).unwrap())).unwrap();
        let series = amplitude_timeseries(&data, &[0.0]).unwrap();
        assert_eq!(series.len(), 1);
        assert!(series[0].u1 < 1e-14);
        assert!(amplitude_timeseries(&data, &[1.0, 0.5]).is_err());
        assert!(amplitude_timeseries(&data, &[f64::NAN]).is_err());

        let two = ChainSpec::new(vec![1.0], vec![0.0], vec![0.0, 0.0]).unwrap();
        let data2 = diagonalize(&build_hopping(&two)).unwrap();
        let series = amplitude_timeseries(&data2, &[PI / 2.0, PI]).unwrap();
        assert!((series[0].u1 - (2f64).sqrt() / 2.0).abs() < 1e-12);
        assert!((series[1].u1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn site_field_columns_normalized() {
        let data =
            diagonalize(&build_hopping(&ChainSpec::xx_minimal(12, 0.5).unwrap())).unwrap();
        let grid = [0.0, 3.5, 8.0];
        let field = site_amplitude_field(&data, 1, &grid).unwrap();
        // t = 0 column is the indicator of the source site
        assert!((field[(0, 0)] - 1.0).abs() < 1e-12);
        for i in 1..12 {
            assert!(field[(i, 0)] < 1e-12);
        }
        // XX chain: V = 0, so |U| columns are normalized alone
        for col in 0..grid.len() {
            let total: f64 = (0..12).map(|i| field[(i, col)] * field[(i, col)]).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
        assert!(site_amplitude_field(&data, 0, &grid).is_err());
        assert!(site_amplitude_field(&data, 13, &grid).is_err());
    }

    #[test]
    fn wavefront_moves_at_unit_velocity() {
        // uniform XX chain: the front from site 1 travels with speed ~ 1
        let data =
            diagonalize(&build_hopping(&ChainSpec::xx_multi(120, &[1.0]).unwrap())).unwrap();
        let times = [30.0, 60.0, 90.0];
        let field = site_amplitude_field(&data, 1, &times).unwrap();
        for (col, &t) in times.iter().enumerate() {
            let peak = (0..120).max_by(|&a, &b| {
                field[(a, col)].partial_cmp(&field[(b, col)]).unwrap()
            });
            let front = peak.unwrap() as f64 + 1.0;
            assert!((front - t).abs() < 0.12 * t, "t = {t}, front = {front}");
        }
    }

    #[test]
    fn uniform_density_closed_form() {
        let hop = build_hopping(&ChainSpec::xx_multi(11, &[1.0]).unwrap());
        let mirror = crate::spectral::diagonalize_mirror(&hop).unwrap();
        let rho = wavepacket_density(&mirror);
        let total: f64 = rho.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // values are a permutation of (2/(N+1)) sin^2(k pi / (N+1))
        let mut expect: Vec<f64> = (1..=11)
            .map(|k| 2.0 / 12.0 * (k as f64 * PI / 12.0).sin().powi(2))
            .collect();
        let mut got = rho.clone();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn xx_modes_match_spectral_route() {
        let spec = ChainSpec::xx_multi(30, &[0.45, 0.7]).unwrap();
        let modes = XxModes::from_spec(&spec).unwrap();
        let data = diagonalize(&build_hopping(&spec)).unwrap();
        for &t in &[0.0, 7.7, 31.0, 44.5] {
            let a = modes.transfer(t);
            let b = boundary_transfer(&data, t);
            assert!((a.u_n1 - b.u_n1).norm() < 1e-10);
            assert!((a.u_n1m2 - b.u_n1m2).norm() < 1e-10);
            assert!((a.u_cross - b.u_cross).norm() < 1e-10);
        }
        assert!(XxModes::from_spec(&ChainSpec::xy_minimal(6, 0.5, 0.5, 1.0, 0.5).unwrap()).is_err());
    }
}
