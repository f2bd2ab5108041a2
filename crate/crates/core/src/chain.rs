//! Chain specifications and the fermionic hopping matrices.
//!
//! An open chain of `n` spins is described by nearest-neighbour couplings
//! `j[0..n-1]`, anisotropies `gamma[0..n-1]` and local fields `h[0..n]`.
//! Its quadratic-fermion image is carried by a pair of tridiagonal hopping
//! matrices: `A` symmetric with diagonal `h_n` and off-diagonal `j_n / 2`,
//! and `B` antisymmetric with `B[n][n+1] = -gamma_n / 2`. The halved
//! off-diagonal convention makes the uniform-chain dispersion `cos q` and
//! the perfect-transfer chain's mirror time exactly `pi`, so every arrival
//! time is in inverse units of the bulk coupling.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::{Error, Result};

/// Couplings, anisotropies and fields defining one open chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n: usize,
    j: Vec<f64>,
    gamma: Vec<f64>,
    h: Vec<f64>,
}

impl ChainSpec {
    /// Build a spec from explicit arrays; lengths must be `n-1`, `n-1`, `n`.
    pub fn new(j: Vec<f64>, gamma: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::InvalidSpec("empty chain".into()));
        }
        if j.len() + 1 != n || gamma.len() + 1 != n {
            return Err(Error::InvalidSpec(format!(
                "expected {} bonds for {} sites, got j: {}, gamma: {}",
                n - 1,
                n,
                j.len(),
                gamma.len()
            )));
        }
        if j.iter().chain(gamma.iter()).chain(h.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite entry".into()));
        }
        Ok(Self { n, j, gamma, h })
    }

    /// Uniform XX bus with both boundary bonds set to `j1`.
    pub fn xx_minimal(n: usize, j1: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSpec(format!("xx_minimal needs n >= 3, got {n}")));
        }
        if !(j1 > 0.0) {
            return Err(Error::InvalidSpec(format!("xx_minimal needs j1 > 0, got {j1}")));
        }
        let mut j = vec![1.0; n - 1];
        j[0] = j1;
        j[n - 2] = j1;
        Self::new(j, vec![0.0; n - 1], vec![0.0; n])
    }

    /// Mirror-symmetric XX chain with the first `boundary.len()` bonds on
    /// each side engineered and the bulk uniform.
    pub fn xx_multi(n: usize, boundary: &[f64]) -> Result<Self> {
        let k = boundary.len();
        if k == 0 {
            return Err(Error::InvalidSpec("xx_multi needs at least one boundary bond".into()));
        }
        if n < 2 * k + 1 {
            return Err(Error::InvalidSpec(format!(
                "engineered segments overlap: n = {n} < {}",
                2 * k + 1
            )));
        }
        let mut j = vec![1.0; n - 1];
        for (m, &b) in boundary.iter().enumerate() {
            j[m] = b;
            j[n - 2 - m] = b;
        }
        Self::new(j, vec![0.0; n - 1], vec![0.0; n])
    }

    /// XY chain with boundary bond `j1`, boundary field `h1`, bulk field `h`
    /// and anisotropies tied to the couplings, `gamma_n = gamma * j_n`.
    pub fn xy_minimal(n: usize, j1: f64, h1: f64, gamma: f64, h: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSpec(format!("xy_minimal needs n >= 3, got {n}")));
        }
        let mut j = vec![1.0; n - 1];
        j[0] = j1;
        j[n - 2] = j1;
        let g = j.iter().map(|&jn| gamma * jn).collect();
        let mut hs = vec![h; n];
        hs[0] = h1;
        hs[n - 1] = h1;
        Self::new(j, g, hs)
    }

    /// Fully engineered perfect-mirror chain, `j_n = sqrt(n (N - n))`.
    /// The normalization gives the linear spectrum `k - (N+1)/2` and mirror
    /// time exactly `pi`.
    pub fn pst(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!("pst needs n >= 2, got {n}")));
        }
        let j = (1..n).map(|m| ((m * (n - m)) as f64).sqrt()).collect();
        Self::new(j, vec![0.0; n - 1], vec![0.0; n])
    }

    /// The sub-chain on sites `2..N`: drops site 1, bond `j_1` and field
    /// `h_1`. Its single-particle energies enter the thermal parity factor.
    pub fn interior(&self) -> Result<ChainSpec> {
        if self.n < 3 {
            return Err(Error::InvalidSpec(format!(
                "interior needs n >= 3, got {}",
                self.n
            )));
        }
        Self::new(
            self.j[1..].to_vec(),
            self.gamma[1..].to_vec(),
            self.h[1..].to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    pub fn anisotropies(&self) -> &[f64] {
        &self.gamma
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// True when all anisotropies vanish (particle-conserving dynamics).
    pub fn is_xx(&self) -> bool {
        self.gamma.iter().all(|&g| g.abs() < 1e-15)
    }

    /// Mirror symmetry of the couplings, anisotropy magnitudes and fields.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let n = self.n;
        let bonds = (0..n - 1).all(|m| {
            (self.j[m] - self.j[n - 2 - m]).abs() <= tol
                && (self.gamma[m].abs() - self.gamma[n - 2 - m].abs()).abs() <= tol
        });
        bonds && (0..n).all(|m| (self.h[m] - self.h[n - 1 - m]).abs() <= tol)
    }

    /// Serialize to the flat record `{n, j, gamma, h}`.
    pub fn to_json(&self) -> Value {
        json!({ "n": self.n, "j": self.j, "gamma": self.gamma, "h": self.h })
    }

    /// Parse either the explicit record `{n, j, gamma, h}` or a preset form
    /// `{preset, n, ...}` with preset parameters `j1`, `j2`, `j3`, `h1`,
    /// scalar `gamma` and scalar `h`.
    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("spec must be a JSON object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing integer key `n`".into()))? as usize;

        let scalar = |key: &str| -> Result<Option<f64>> {
            match obj.get(key) {
                None => Ok(None),
                Some(v) => v
                    .as_f64()
                    .map(Some)
                    .ok_or_else(|| Error::Parse(format!("key `{key}` must be a number"))),
            }
        };

        if let Some(preset) = obj.get("preset") {
            let preset = preset
                .as_str()
                .ok_or_else(|| Error::Parse("`preset` must be a string".into()))?;
            return match preset {
                "xx_minimal" => {
                    let j1 = scalar("j1")?
                        .ok_or_else(|| Error::Parse("xx_minimal needs `j1`".into()))?;
                    Self::xx_minimal(n, j1)
                }
                "xx_multi" => {
                    let mut boundary = Vec::new();
                    for key in ["j1", "j2", "j3"] {
                        match scalar(key)? {
                            Some(v) => boundary.push(v),
                            None => break,
                        }
                    }
                    if boundary.is_empty() {
                        return Err(Error::Parse("xx_multi needs `j1` [, `j2`, `j3`]".into()));
                    }
                    Self::xx_multi(n, &boundary)
                }
                "xy_minimal" => {
                    let j1 = scalar("j1")?
                        .ok_or_else(|| Error::Parse("xy_minimal needs `j1`".into()))?;
                    let h1 = scalar("h1")?
                        .ok_or_else(|| Error::Parse("xy_minimal needs `h1`".into()))?;
                    let gamma = scalar("gamma")?.unwrap_or(0.0);
                    let h = scalar("h")?.unwrap_or(0.0);
                    Self::xy_minimal(n, j1, h1, gamma, h)
                }
                "pst" => Self::pst(n),
                other => Err(Error::Parse(format!("unknown preset `{other}`"))),
            };
        }

        let array = |key: &str| -> Result<Vec<f64>> {
            obj.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("missing array key `{key}`")))?
                .iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| Error::Parse(format!("non-numeric entry in `{key}`")))
                })
                .collect()
        };
        let (j, gamma, h) = (array("j")?, array("gamma")?, array("h")?);
        if h.len() != n {
            return Err(Error::Parse(format!("`h` has {} entries for n = {n}", h.len())));
        }
        Self::new(j, gamma, h)
    }
}

/// The tridiagonal one-body (`A`) and pairing (`B`) blocks of the quadratic
/// fermion Hamiltonian.
#[derive(Debug, Clone)]
pub struct HoppingMatrices {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl HoppingMatrices {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// True when the pairing block vanishes.
    pub fn is_particle_conserving(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }
}

/// Assemble the hopping matrices: `A_nn = h_n`, `A_{n,n+1} = j_n / 2`,
/// `B_{n,n+1} = -gamma_n / 2`, `B_{n+1,n} = +gamma_n / 2`.
pub fn build_hopping(spec: &ChainSpec) -> HoppingMatrices {
    let n = spec.n();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = spec.fields()[i];
    }
    for i in 0..n - 1 {
        let jh = spec.couplings()[i] / 2.0;
        a[(i, i + 1)] = jh;
        a[(i + 1, i)] = jh;
        let gh = spec.anisotropies()[i] / 2.0;
        b[(i, i + 1)] = -gh;
        b[(i + 1, i)] = gh;
    }
    HoppingMatrices { a, b }
}

/// The exchange (reflection) matrix `X_{nm} = delta_{n, N-m+1}`.
pub fn exchange_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

/// Symmetry about the anti-diagonal: `max |(X M X - M)_{ij}| <= tol`.
pub fn is_persymmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    if n != m.ncols() {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if (m[(n - 1 - i, n - 1 - j)] - m[(i, j)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Mirror constraint on the hopping pair: `X A X = A` and
/// `X B X = e^{2 i alpha} B` within `tol`. For real `B != 0` the phase must
/// be real, which restricts `alpha` to multiples of `pi/2`: `B` comes out
/// persymmetric at `alpha = pi/2` and anti-persymmetric at `alpha = pi`.
pub fn mirror_compatibility(a: &DMatrix<f64>, b: &DMatrix<f64>, alpha: f64, tol: f64) -> bool {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return false;
    }
    if !is_persymmetric(a, tol) {
        return false;
    }
    let (re, im) = ((2.0 * alpha).cos(), (2.0 * alpha).sin());
    for i in 0..n {
        for j in 0..n {
            let flipped = b[(n - 1 - i, n - 1 - j)];
            if (flipped - re * b[(i, j)]).abs() > tol || (im * b[(i, j)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hopping_convention_uniform_xx() {
        let spec = ChainSpec::new(vec![1.0, 1.0], vec![0.0, 0.0], vec![0.0; 3]).unwrap();
        let hop = build_hopping(&spec);
        assert_eq!(hop.a()[(0, 1)], 0.5);
        assert_eq!(hop.a()[(1, 2)], 0.5);
        assert_eq!(hop.a()[(0, 0)], 0.0);
        assert!(hop.is_particle_conserving());
    }

    #[test]
    fn hopping_convention_single_ising_bond() {
        let spec = ChainSpec::new(vec![1.0], vec![1.0], vec![0.0, 0.0]).unwrap();
        let hop = build_hopping(&spec);
        assert_eq!(hop.a()[(0, 1)], 0.5);
        assert_eq!(hop.b()[(0, 1)], -0.5);
        assert_eq!(hop.b()[(1, 0)], 0.5);
    }

    #[test]
    fn uniform_xx_spectrum_is_cosine() {
        // closed form for the uniform tridiagonal matrix
        let spec = ChainSpec::xx_multi(4, &[1.0]).unwrap();
        let hop = build_hopping(&spec);
        let (vals, _) = crate::tridiag::eig_sym_tridiag(
            &vec![0.0; 4],
            &spec.couplings().iter().map(|j| j / 2.0).collect::<Vec<_>>(),
        )
        .unwrap();
        let mut expect: Vec<f64> = (1..=4).map(|k| (k as f64 * PI / 5.0).cos()).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(&expect) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        let _ = hop;
    }

    #[test]
    fn xx_minimal_layout() {
        let spec = ChainSpec::xx_minimal(5, 0.5).unwrap();
        assert_eq!(spec.couplings(), &[0.5, 1.0, 1.0, 0.5]);
        let spec = ChainSpec::xx_minimal(3, 0.7).unwrap();
        assert_eq!(spec.couplings(), &[0.7, 0.7]);
        let spec = ChainSpec::xx_minimal(100, 1.0).unwrap();
        assert!(spec.couplings().iter().all(|&j| j == 1.0));
        assert!(ChainSpec::xx_minimal(2, 0.5).is_err());
    }

    #[test]
    fn xx_multi_layout() {
        let spec = ChainSpec::xx_multi(50, &[0.434, 0.735]).unwrap();
        assert_eq!(spec.couplings()[0], 0.434);
        assert_eq!(spec.couplings()[1], 0.735);
        assert_eq!(spec.couplings()[47], 0.735);
        assert_eq!(spec.couplings()[48], 0.434);
        assert_eq!(spec.couplings()[24], 1.0);
        let uniform = ChainSpec::xx_multi(10, &[1.0, 1.0]).unwrap();
        assert!(uniform.couplings().iter().all(|&j| j == 1.0));
        assert!(ChainSpec::xx_multi(4, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn xy_minimal_layout() {
        let spec = ChainSpec::xy_minimal(100, 0.48, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(spec.couplings()[0], 0.48);
        assert_eq!(spec.anisotropies()[0], 0.5 * 0.48);
        assert_eq!(spec.anisotropies()[50], 0.5);
        assert_eq!(spec.fields()[0], 0.5);
        assert_eq!(spec.fields()[99], 0.5);
        assert_eq!(spec.fields()[50], 0.5);
    }

    #[test]
    fn pst_layout_and_spectrum() {
        let spec = ChainSpec::pst(4).unwrap();
        let j = spec.couplings();
        assert!((j[0] - 3f64.sqrt()).abs() < 1e-15);
        assert!((j[1] - 2.0).abs() < 1e-15);
        assert!((j[2] - 3f64.sqrt()).abs() < 1e-15);
        let (vals, _) = crate::tridiag::eig_sym_tridiag(
            &vec![0.0; 4],
            &j.iter().map(|x| x / 2.0).collect::<Vec<_>>(),
        )
        .unwrap();
        for (v, e) in vals.iter().zip([-1.5, -0.5, 0.5, 1.5]) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(ChainSpec::pst(2).unwrap().couplings(), &[1.0]);
    }

    #[test]
    fn interior_drops_first_site() {
        let spec = ChainSpec::xx_multi(5, &[1.0, 1.0]).unwrap();
        let inner = spec.interior().unwrap();
        assert_eq!(inner.n(), 4);
        assert!(inner.couplings().iter().all(|&j| j == 1.0));

        let spec = ChainSpec::xx_minimal(10, 0.3).unwrap();
        let inner = spec.interior().unwrap();
        assert_eq!(inner.n(), 9);
        assert_eq!(inner.couplings()[0], 1.0);
        assert_eq!(inner.couplings()[7], 0.3);

        let spec = ChainSpec::xx_minimal(3, 0.4).unwrap();
        let inner = spec.interior().unwrap();
        assert_eq!(inner.n(), 2);
        assert_eq!(inner.couplings(), &[0.4]);
        assert!(inner.interior().is_err());
    }

    #[test]
    fn persymmetry_predicate() {
        let hop = build_hopping(&ChainSpec::xx_minimal(6, 0.3).unwrap());
        assert!(is_persymmetric(hop.a(), 1e-12));

        let mut h = vec![0.0; 6];
        h[0] = 1.0;
        let broken = ChainSpec::new(vec![1.0; 5], vec![0.0; 5], h).unwrap();
        assert!(!is_persymmetric(build_hopping(&broken).a(), 1e-12));

        assert!(is_persymmetric(&exchange_matrix(5), 1e-12));
    }

    #[test]
    fn mirror_compatibility_cases() {
        // XX chain: B = 0 passes any alpha
        let hop = build_hopping(&ChainSpec::xx_minimal(6, 0.3).unwrap());
        for alpha in [0.0, PI / 3.0, PI / 2.0, PI] {
            assert!(mirror_compatibility(hop.a(), hop.b(), alpha, 1e-12));
        }

        // mirror-tied anisotropies: X B X = -B, the persymmetric case alpha = pi/2
        let hop = build_hopping(&ChainSpec::xy_minimal(4, 0.5, 0.3, 0.7, 0.2).unwrap());
        assert!(mirror_compatibility(hop.a(), hop.b(), PI / 2.0, 1e-12));
        assert!(!mirror_compatibility(hop.a(), hop.b(), PI, 1e-12));

        // gamma_1 != gamma_{N-1}: no alpha works
        let spec = ChainSpec::new(
            vec![1.0, 1.0, 1.0],
            vec![0.5, 0.5, -0.2],
            vec![0.0; 4],
        )
        .unwrap();
        let hop = build_hopping(&spec);
        for alpha in [0.0, PI / 2.0, PI, 3.0 * PI / 2.0] {
            assert!(!mirror_compatibility(hop.a(), hop.b(), alpha, 1e-12));
        }
    }

    #[test]
    fn build_hopping_is_linear() {
        let s1 = ChainSpec::new(vec![0.3, 1.1], vec![0.2, -0.4], vec![0.1, 0.0, -0.7]).unwrap();
        let s2 = ChainSpec::new(vec![1.0, -0.5], vec![0.0, 0.9], vec![0.4, 0.2, 0.3]).unwrap();
        let (a, b) = (2.0, -0.75);
        let comb = ChainSpec::new(
            (0..2).map(|i| a * s1.couplings()[i] + b * s2.couplings()[i]).collect(),
            (0..2).map(|i| a * s1.anisotropies()[i] + b * s2.anisotropies()[i]).collect(),
            (0..3).map(|i| a * s1.fields()[i] + b * s2.fields()[i]).collect(),
        )
        .unwrap();
        let (h1, h2, hc) = (build_hopping(&s1), build_hopping(&s2), build_hopping(&comb));
        let amat = h1.a() * a + h2.a() * b;
        let bmat = h1.b() * a + h2.b() * b;
        assert!((hc.a() - amat).abs().max() < 1e-14);
        assert!((hc.b() - bmat).abs().max() < 1e-14);
    }

    #[test]
    fn json_round_trip_and_presets() {
        let spec = ChainSpec::xx_multi(8, &[0.4, 0.9]).unwrap();
        let back = ChainSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);

        let v: Value =
            serde_json::from_str(r#"{"preset": "xx_minimal", "n": 10, "j1": 0.3}"#).unwrap();
        assert_eq!(ChainSpec::from_json(&v).unwrap(), ChainSpec::xx_minimal(10, 0.3).unwrap());

        let v: Value = serde_json::from_str(
            r#"{"preset": "xy_minimal", "n": 6, "j1": 0.48, "h1": 0.5, "gamma": 1.0, "h": 1.5}"#,
        )
        .unwrap();
        assert_eq!(
            ChainSpec::from_json(&v).unwrap(),
            ChainSpec::xy_minimal(6, 0.48, 0.5, 1.0, 1.5).unwrap()
        );

        let v: Value = serde_json::from_str(r#"{"preset": "pst", "n": 4}"#).unwrap();
        assert_eq!(ChainSpec::from_json(&v).unwrap(), ChainSpec::pst(4).unwrap());

        assert!(ChainSpec::from_json(&json!({"n": 3, "j": [1.0], "gamma": [], "h": []})).is_err());
    }
}
