//! Closed-form spectra, densities and transfer-time estimates.
//!
//! Boundary-perturbed XX chains admit an exact secular solution: the
//! quasi-momenta `q_k` solve `q (N+1) = pi k + 2 phi_q` with the boundary
//! phase shift `phi_q = q - arccot(cot q / Delta)`, `Delta = j1^2 / (2 -
//! j1^2)`, and the excitation density follows from the same phase function.
//! The Ising chain (`gamma = 1`) has a quasi-uniform `(A-B)(A-B)^T` and its
//! own density profile, peak mode, resonance field and width. These
//! formulas cross-check the numerical pipeline and seed the optimizer.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::dynamics::XxModes;
use crate::spectral::MirrorSpectralData;
use crate::{chain::ChainSpec, Error, Result};

/// Secular data of the boundary-perturbed XX chain.
#[derive(Debug, Clone)]
pub struct XxAnalytics {
    pub n: usize,
    pub j1: f64,
    /// Width parameter `j1^2 / (2 - j1^2)`.
    pub delta: f64,
    /// Quasi-momenta, strictly increasing in `(0, pi)`.
    pub q: Vec<f64>,
    /// Boundary phase shifts at each quasi-momentum.
    pub phase_shifts: Vec<f64>,
    /// Excitation density at each quasi-momentum; sums to one.
    pub density: Vec<f64>,
    /// Ballistic arrival time `N + 1 + 2 (1 - Delta) / Delta`.
    pub arrival_time: f64,
}

/// Dispersion of the XX chain, `omega(q) = cos q`.
pub fn xx_dispersion(q: f64) -> f64 {
    q.cos()
}

/// Phase shift `phi_q = q - arccot(cot q / Delta)`, valued in `(-pi/2, pi/2)`.
fn phase_shift(q: f64, delta: f64) -> f64 {
    q - arccot(q.cos() / q.sin() / delta)
}

/// `d phi / d q = 1 - Delta (1 + cot^2 q) / (Delta^2 + cot^2 q)`.
fn phase_shift_deriv(q: f64, delta: f64) -> f64 {
    let c = q.cos() / q.sin();
    1.0 - delta * (1.0 + c * c) / (delta * delta + c * c)
}

/// Principal arccotangent with range `(0, pi)`.
fn arccot(x: f64) -> f64 {
    PI / 2.0 - x.atan()
}

impl XxAnalytics {
    /// Solve the secular equation for every mode to 1e-12.
    pub fn new(n: usize, j1: f64) -> Result<Self> {
        if !(j1 > 0.0 && j1 <= 1.0) {
            return Err(Error::Precondition(format!("need 0 < j1 <= 1, got {j1}")));
        }
        if n < 2 {
            return Err(Error::Precondition("need at least two sites".into()));
        }
        let delta = j1 * j1 / (2.0 - j1 * j1);
        let mut q = Vec::with_capacity(n);
        let mut phase_shifts = Vec::with_capacity(n);
        let mut density = Vec::with_capacity(n);
        for k in 1..=n {
            let qk = solve_quasimomentum(n, k, delta)?;
            let shift = phase_shift(qk, delta);
            let dshift = phase_shift_deriv(qk, delta);
            let c = qk.cos() / qk.sin();
            let rho = 1.0 / (n as f64 + 1.0 - 2.0 * dshift) * delta * (1.0 + delta)
                / (delta * delta + c * c);
            q.push(qk);
            phase_shifts.push(shift);
            density.push(rho);
        }
        let arrival_time = n as f64 + 1.0 + 2.0 * (1.0 - delta) / delta;
        Ok(Self { n, j1, delta, q, phase_shifts, density, arrival_time })
    }
}

/// Quasi-momenta `q_k = (pi k + 2 phi_{q_k}) / (N + 1)`, ascending.
pub fn xx_quasimomenta(n: usize, j1: f64) -> Result<Vec<f64>> {
    Ok(XxAnalytics::new(n, j1)?.q)
}

/// Excitation density evaluated at the quasi-momenta.
pub fn xx_density(n: usize, j1: f64) -> Result<Vec<f64>> {
    Ok(XxAnalytics::new(n, j1)?.density)
}

/// Ballistic arrival time `t* = N + 1 + 2 (1 - Delta) / Delta`.
pub fn xx_arrival_time(n: usize, j1: f64) -> Result<f64> {
    if !(j1 > 0.0 && j1 <= 1.0) {
        return Err(Error::Precondition(format!("need 0 < j1 <= 1, got {j1}")));
    }
    let delta = j1 * j1 / (2.0 - j1 * j1);
    Ok(n as f64 + 1.0 + 2.0 * (1.0 - delta) / delta)
}

/// The secular function `g(q) = q (N+1) - pi k - 2 phi_q` is strictly
/// increasing (`g' = N + 1 - 2 phi' >= N - 1`), so bisection is safe.
fn solve_quasimomentum(n: usize, k: usize, delta: f64) -> Result<f64> {
    let np1 = n as f64 + 1.0;
    let target = PI * k as f64;
    let g = |q: f64| q * np1 - target - 2.0 * phase_shift(q, delta);
    let (mut lo, mut hi) = (1e-15, PI - 1e-15);
    if g(lo) > 0.0 || g(hi) < 0.0 {
        return Err(Error::Numerical(format!("secular root escaped bracket for k = {k}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Wave-packet estimate of `u2(t) = |U_{N-1,2}(t)|` for a two-parameter
/// chain. Uses the exact row identity `O_{2k} = (2 omega_k / j1) O_{1k}`
/// (the first secular row at zero field), with the density taken from the
/// numerical eigenvectors since the two-parameter closed form is not
/// available; the `(2 omega / j1)^2` weight makes the weights sum to one.
pub fn xx_u2_estimate(n: usize, j1: f64, j2: f64, t: f64) -> Result<f64> {
    let spec = ChainSpec::xx_multi(n, &[j1, j2])?;
    let modes = XxModes::from_spec(&spec)?;
    let rho = modes.density();
    let mut sum = Complex64::ZERO;
    for (k, &lam) in modes.lambda().iter().enumerate() {
        let weight = (2.0 * lam / j1).powi(2) * rho[k];
        let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sum += Complex64::from_polar(1.0, -lam * t) * (weight * sign);
    }
    Ok(sum.norm())
}

/// Ising-chain (`gamma = 1`) analytic profile data.
#[derive(Debug, Clone, Copy)]
pub struct IsingAnalytics {
    pub j1: f64,
    pub h1: f64,
    pub h: f64,
    /// Auxiliary `x = (1 + h^2 - h1^2 - j1^2) / h`.
    pub x: f64,
    /// Density peak position in quasi-momentum space.
    pub k0: f64,
    /// Energy of the peak mode.
    pub omega_k0: f64,
    /// Width of the density peak.
    pub width: f64,
}

/// XY dispersion `omega(k) = sqrt((h - cos k)^2 + gamma^2 sin^2 k)`.
pub fn xy_dispersion(k: f64, gamma: f64, h: f64) -> f64 {
    let (s, c) = k.sin_cos();
    ((h - c) * (h - c) + gamma * gamma * s * s).sqrt()
}

/// Unnormalized Ising excitation density at quasi-momentum `k`.
pub fn ising_density(k: f64, j1: f64, h1: f64, h: f64) -> Result<f64> {
    if h == 0.0 {
        return Err(Error::Precondition("ising density undefined at h = 0".into()));
    }
    let x = (1.0 + h * h - h1 * h1 - j1 * j1) / h;
    let (s, c) = k.sin_cos();
    let denom = ((2.0 - j1 * j1) * c - x).powi(2) + j1.powi(4) * s * s;
    Ok(j1 * j1 * s * s / denom)
}

/// Peak position, peak energy and width of the Ising density.
pub fn ising_peak(j1: f64, h1: f64, h: f64) -> Result<IsingAnalytics> {
    if h == 0.0 {
        return Err(Error::Precondition("ising analytics undefined at h = 0".into()));
    }
    let x = (1.0 + h * h - h1 * h1 - j1 * j1) / h;
    let cap = 2.0 - j1 * j1;
    if x.abs() > cap {
        return Err(Error::Precondition(format!(
            "no interior peak: |x| = {:.4} exceeds 2 - j1^2 = {cap:.4} (out-of-band)",
            x.abs()
        )));
    }
    let k0 = (x / cap).acos();
    let omega_k0 = ((2.0 * h1 * h1 + (1.0 - h * h) * j1 * j1) / cap).sqrt();
    let width = j1 * j1 / (cap * cap - x * x).sqrt();
    Ok(IsingAnalytics { j1, h1, h, x, k0, omega_k0, width })
}

/// Boundary field that centers the density peak on the linear zone:
/// `sqrt((1 - j1^2)(1 - h^2))` for `|h| <= 1`, `sqrt(h^2 - 1)` for
/// `|h| >= 1`. Returns the field and the companion width
/// `(max(|h|,1)/sqrt(|1-h^2|)) j1^2/(2-j1^2)`. Rejected at the critical
/// field `|h| = 1`, where it would predict a useless `h1 = 0`.
pub fn ising_optimal_field(j1: f64, h: f64) -> Result<(f64, f64)> {
    if (h.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::Precondition(
            "no optimal boundary field at the critical value |h| = 1".into(),
        ));
    }
    let h1 = if h.abs() < 1.0 {
        ((1.0 - j1 * j1) * (1.0 - h * h)).sqrt()
    } else {
        (h * h - 1.0).sqrt()
    };
    let width = h.abs().max(1.0) / (1.0 - h * h).abs().sqrt() * j1 * j1 / (2.0 - j1 * j1);
    Ok((h1, width))
}

/// Group velocity around the linear zone of the Ising dispersion,
/// `v = min(|h|, 1/|h|)`; zero at the flat band `h = 0`.
pub fn ising_group_velocity(h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    h.abs().min(1.0 / h.abs())
}

/// Largest group velocity over the whole band; bounds the earliest ballistic
/// arrival and therefore the search window. For the Ising dispersion this is
/// `min(|h|, 1)`, which differs from [`ising_group_velocity`] above the
/// critical field.
pub fn max_group_velocity(gamma: f64, h: f64) -> f64 {
    let mut vmax: f64 = 0.0;
    let m = 2001;
    let mut last = xy_dispersion(0.0, gamma, h);
    let dk = PI / (m as f64);
    for i in 1..=m {
        let w = xy_dispersion(i as f64 * dk, gamma, h);
        vmax = vmax.max(((w - last) / dk).abs());
        last = w;
    }
    vmax
}

/// Centered finite differences of `omega_k` against `k pi / (N+1)`.
/// Out-of-band zero modes are dropped and degenerate levels are merged
/// before differencing: unsigned spectra of particle-hole symmetric chains
/// come in exact pairs, and a flat band is a single level, neither of which
/// should masquerade as a velocity jump.
pub fn numerical_group_velocity(mirror: &MirrorSpectralData) -> Result<Vec<f64>> {
    let n = mirror.n();
    if n < 3 {
        return Err(Error::Precondition("need at least three modes".into()));
    }
    let mut reps: Vec<f64> = Vec::new();
    for &w in mirror.omega().iter().filter(|&&w| w > 1e-8) {
        match reps.last() {
            Some(&last) if (w - last).abs() < 1e-9 => {}
            _ => reps.push(w),
        }
    }
    let m = reps.len();
    if m < 2 {
        // flat (or empty) band: no dispersion at all
        return Ok(vec![0.0; m]);
    }
    let dk = PI / (n as f64 + 1.0);
    let mut v = Vec::with_capacity(m);
    for i in 0..m {
        let d = if i == 0 {
            reps[1] - reps[0]
        } else if i == m - 1 {
            reps[m - 1] - reps[m - 2]
        } else {
            (reps[i + 1] - reps[i - 1]) / 2.0
        };
        v.push(d / dk);
    }
    Ok(v)
}
