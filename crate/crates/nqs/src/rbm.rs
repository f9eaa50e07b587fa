//! RBM parameter containers and numerically stable amplitude evaluation.
//!
//! The wave-function amplitude for a configuration σ⃗ is
//!
//!   ψ(σ⃗) = ∏_j exp(a_j σ_j) · ∏_k cosh(b_k + Σ_j σ_j W_{j,k}),
//!
//! i.e. the hidden-node sum is carried out analytically, one cosh factor per
//! hidden node. Amplitudes are handled in the log domain: the log-modulus and
//! the accumulated argument (sum of per-factor principal arguments, not
//! reduced mod 2π) are tracked separately so that hidden layers with up to
//! 10^4 nodes neither overflow nor lose the phase winding.

use crate::error::{Error, Result};
use crate::spinspace::SpinConfig;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// ln|cosh θ| below this treats the factor as a zero of the amplitude
/// (|cosh θ| < 1e−12). Angles like iπ/2 cannot be represented exactly in
/// doubles, so a vanishing factor shows up as |cosh θ| ≈ 1e−16; anything
/// this small is the rounding shadow of an intended zero, and carrying it
/// into ratios would amplify pure noise.
pub(crate) const LOG_ZERO_THRESHOLD: f64 = -27.631021115928547;

/// ln|cosh(u + iv)|, stable for all u.
///
/// Uses |cosh(u+iv)|² = sinh²u + cos²v, which is exact and cancellation-free
/// near the zeros θ = i(π/2 + nπ).
#[inline]
pub(crate) fn ln_abs_cosh(u: f64, v: f64) -> f64 {
    let au = u.abs();
    if au < 40.0 {
        let s = au.sinh();
        let c = v.cos();
        0.5 * (s * s + c * c).ln()
    } else {
        // sinh²u dominates cos²v by a factor ≥ e^{78}
        au - std::f64::consts::LN_2
    }
}

/// Principal argument of cosh(u + iv), stable for all u.
#[inline]
pub(crate) fn arg_cosh(u: f64, v: f64) -> f64 {
    // cosh(u+iv) = cosh u cos v + i sinh u sin v; divide through by cosh u > 0
    (u.tanh() * v.sin()).atan2(v.cos())
}

/// Log-domain amplitude: natural log of |ψ| and the accumulated argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAmplitude {
    /// ln|ψ|; −∞ encodes an exact zero.
    pub log_mod: f64,
    /// Sum of per-factor principal arguments (radians), not reduced mod 2π.
    pub arg: f64,
}

impl LogAmplitude {
    pub const ZERO: LogAmplitude = LogAmplitude { log_mod: f64::NEG_INFINITY, arg: 0.0 };

    pub fn is_zero(&self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }

    /// ψ itself. Overflows to ±inf for log_mod ≳ 709; callers that build
    /// whole state vectors subtract the maximum log-modulus first.
    pub fn amplitude(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_mod.exp(), self.arg)
    }

    /// exp(self − other) as a complex number.
    pub fn ratio_to(&self, other: &LogAmplitude) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_mod - other.log_mod).exp(), self.arg - other.arg)
    }
}

/// Complex parameter set (a_j, b_k, W_{j,k}) of an L-site RBM with N_h
/// hidden nodes, N_h an integer multiple of L.
///
/// W is stored per hidden node (column-major) so that truncation and
/// effective-angle evaluation touch contiguous memory.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmParams {
    l: usize,
    nh: usize,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    /// w[(k−1)·L + (j−1)] = W_{j,k}
    w: Vec<Complex64>,
}

impl RbmParams {
    /// Build from row-major weights: `w_rows[j−1][k−1] = W_{j,k}`.
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>, w_rows: &[Vec<Complex64>]) -> Result<Self> {
        let l = a.len();
        let nh = b.len();
        if w_rows.len() != l || w_rows.iter().any(|row| row.len() != nh) {
            return Err(Error::Argument(format!(
                "weight matrix must be {l}×{nh} (row-major j then k)"
            )));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); l * nh];
        for (j, row) in w_rows.iter().enumerate() {
            for (k, &val) in row.iter().enumerate() {
                w[k * l + j] = val;
            }
        }
        Self::from_column_major(l, nh, a, b, w)
    }

    pub(crate) fn from_column_major(
        l: usize,
        nh: usize,
        a: Vec<Complex64>,
        b: Vec<Complex64>,
        w: Vec<Complex64>,
    ) -> Result<Self> {
        if l == 0 {
            return Err(Error::Argument("site count must be ≥ 1".into()));
        }
        if nh % l != 0 {
            return Err(Error::Argument(format!(
                "hidden-node count {nh} must be an integer multiple of L={l}"
            )));
        }
        if a.len() != l || b.len() != nh || w.len() != l * nh {
            return Err(Error::Argument("parameter vector shapes do not match (L, Nh)".into()));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(a.iter().all(finite) && b.iter().all(finite) && w.iter().all(finite)) {
            return Err(Error::Argument("all RBM parameters must be finite".into()));
        }
        Ok(Self { l, nh, a, b, w })
    }

    pub fn zeros(l: usize, nh: usize) -> Result<Self> {
        Self::from_column_major(
            l,
            nh,
            vec![Complex64::new(0.0, 0.0); l],
            vec![Complex64::new(0.0, 0.0); nh],
            vec![Complex64::new(0.0, 0.0); l * nh],
        )
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn nh(&self) -> usize {
        self.nh
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// W_{j,k}, 1-based indices.
    pub fn w(&self, j: usize, k: usize) -> Complex64 {
        assert!(j >= 1 && j <= self.l && k >= 1 && k <= self.nh);
        self.w[(k - 1) * self.l + (j - 1)]
    }

    /// Weights attached to hidden node k (1-based): slice of length L.
    pub fn w_col(&self, k: usize) -> &[Complex64] {
        assert!(k >= 1 && k <= self.nh);
        &self.w[(k - 1) * self.l..k * self.l]
    }

    pub(crate) fn set_w(&mut self, j: usize, k: usize, val: Complex64) {
        self.w[(k - 1) * self.l + (j - 1)] = val;
    }

    pub(crate) fn set_b(&mut self, k: usize, val: Complex64) {
        self.b[k - 1] = val;
    }

    /// Per-node importance score Σ_j (Re W_{j,k})² + β₁² (Im W_{j,k})².
    pub fn node_score(&self, k: usize) -> f64 {
        let beta1_sq = crate::bounds::BoundConstants::standard().beta1.powi(2);
        self.w_col(k)
            .iter()
            .map(|w| w.re * w.re + beta1_sq * w.im * w.im)
            .sum()
    }

    /// Reorder hidden nodes by descending importance score, breaking ties by
    /// ascending original index. Returns the reordered parameters and the
    /// permutation (new position → original 1-based k).
    pub fn reorder_hidden(&self) -> (RbmParams, Vec<usize>) {
        let mut order: Vec<usize> = (1..=self.nh).collect();
        let scores: Vec<f64> = (1..=self.nh).map(|k| self.node_score(k)).collect();
        order.sort_by(|&k1, &k2| {
            scores[k2 - 1]
                .partial_cmp(&scores[k1 - 1])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(k1.cmp(&k2))
        });
        let mut out = self.clone();
        for (new_idx, &orig_k) in order.iter().enumerate() {
            let k = new_idx + 1;
            out.b[k - 1] = self.b[orig_k - 1];
            out.w[(k - 1) * self.l..k * self.l]
                .copy_from_slice(&self.w[(orig_k - 1) * self.l..orig_k * self.l]);
        }
        (out, order)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RbmParamsFile::from(self)).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RbmParamsFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Effective angle θ_k(σ⃗) = b_k + Σ_j σ_j W_{j,k}; `k` is 1-based.
pub fn effective_angle(p: &RbmParams, s: &SpinConfig, k: usize) -> Result<Complex64> {
    if k < 1 || k > p.nh {
        return Err(Error::Argument(format!("hidden index {k} out of 1..={}", p.nh)));
    }
    debug_assert_eq!(p.l, s.len());
    let mut theta = p.b[k - 1];
    for (j0, &w) in p.w_col(k).iter().enumerate() {
        theta += w * s.spin(j0 + 1);
    }
    Ok(theta)
}

/// Log-domain amplitude ψ(σ⃗).
///
/// log_mod = Σ_j Re(a_j)σ_j + Σ_k ln|cosh θ_k|,
/// arg     = Σ_j Im(a_j)σ_j + Σ_k Arg(cosh θ_k).
/// A vanishing cosh factor (see [`LOG_ZERO_THRESHOLD`]) makes the amplitude
/// an exact zero (log_mod = −∞, arg = 0 by convention).
pub fn log_psi(p: &RbmParams, s: &SpinConfig) -> LogAmplitude {
    assert_eq!(p.l, s.len(), "config length must match RBM site count");
    let mut log_mod = 0.0;
    let mut arg = 0.0;
    for j in 1..=p.l {
        let sj = s.spin(j);
        log_mod += p.a[j - 1].re * sj;
        arg += p.a[j - 1].im * sj;
    }
    for k in 1..=p.nh {
        let theta = effective_angle(p, s, k).expect("k in range");
        let lm = ln_abs_cosh(theta.re, theta.im);
        if lm < LOG_ZERO_THRESHOLD {
            return LogAmplitude::ZERO;
        }
        log_mod += lm;
        arg += arg_cosh(theta.re, theta.im);
    }
    LogAmplitude { log_mod, arg }
}

/// ψ(s1)/ψ(s2) computed in the log domain without forming either amplitude.
pub fn psi_ratio(p: &RbmParams, s1: &SpinConfig, s2: &SpinConfig) -> Result<Complex64> {
    let denom = log_psi(p, s2);
    if denom.is_zero() {
        return Err(Error::Numerical("psi_ratio: ψ(s2) = 0".into()));
    }
    Ok(log_psi(p, s1).ratio_to(&denom))
}

/// Keep the first `nh_keep` hidden nodes; visible biases are unchanged.
pub fn truncate(p: &RbmParams, nh_keep: usize) -> Result<RbmParams> {
    if nh_keep > p.nh {
        return Err(Error::Argument(format!(
            "cannot keep {nh_keep} of {} hidden nodes",
            p.nh
        )));
    }
    if nh_keep % p.l != 0 {
        return Err(Error::Argument(format!(
            "kept node count {nh_keep} must be a multiple of L={}",
            p.l
        )));
    }
    RbmParams::from_column_major(
        p.l,
        nh_keep,
        p.a.clone(),
        p.b[..nh_keep].to_vec(),
        p.w[..nh_keep * p.l].to_vec(),
    )
}

/// Translation-invariant RBM: one complex filter per level. Hidden node k
/// lives at level k̃ = ⌈k/L⌉ with center spin j_c = k − (k̃−1)L, and
/// W_{j,k} = filter_{k̃}((j − j_c) mod L).
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationInvariantRbm {
    l: usize,
    alpha: usize,
    a0: Complex64,
    b_level: Vec<Complex64>,
    /// filters[(k̃−1)·L + m] = filter_{k̃}(offset m), m ∈ 0..L
    filters: Vec<Complex64>,
}

impl TranslationInvariantRbm {
    pub fn new(
        l: usize,
        a0: Complex64,
        b_level: Vec<Complex64>,
        filters: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let alpha = b_level.len();
        if filters.len() != alpha || filters.iter().any(|f| f.len() != l) {
            return Err(Error::Argument(format!(
                "expected {alpha} filters of length {l}"
            )));
        }
        if l == 0 {
            return Err(Error::Argument("site count must be ≥ 1".into()));
        }
        Ok(Self { l, alpha, a0, b_level, filters: filters.concat() })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Level count k̃_max; the expansion has N_h = alpha · L hidden nodes.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn b_level(&self) -> &[Complex64] {
        &self.b_level
    }

    /// filter_{k̃}(offset m); `kt` is 1-based, `m` ∈ 0..L.
    pub fn filter(&self, kt: usize, m: usize) -> Complex64 {
        assert!(kt >= 1 && kt <= self.alpha && m < self.l);
        self.filters[(kt - 1) * self.l + m]
    }

    pub fn filter_row(&self, kt: usize) -> &[Complex64] {
        assert!(kt >= 1 && kt <= self.alpha);
        &self.filters[(kt - 1) * self.l..kt * self.l]
    }

    pub(crate) fn filters_mut(&mut self) -> &mut [Complex64] {
        &mut self.filters
    }

    pub(crate) fn b_level_mut(&mut self) -> &mut [Complex64] {
        &mut self.b_level
    }

    pub(crate) fn a0_mut(&mut self) -> &mut Complex64 {
        &mut self.a0
    }

    /// Expand to a full parameter set with N_h = alpha·L hidden nodes.
    pub fn expand(&self) -> RbmParams {
        let l = self.l;
        let nh = self.alpha * l;
        let a = vec![self.a0; l];
        let mut b = Vec::with_capacity(nh);
        let mut w = vec![Complex64::new(0.0, 0.0); l * nh];
        for k in 1..=nh {
            let kt = k.div_ceil(l);
            let jc = k - (kt - 1) * l;
            b.push(self.b_level[kt - 1]);
            for j in 1..=l {
                let m = (j + l - jc) % l;
                w[(k - 1) * l + (j - 1)] = self.filters[(kt - 1) * l + m];
            }
        }
        RbmParams::from_column_major(l, nh, a, b, w).expect("expansion shapes are consistent")
    }

    /// Per-level importance score; equal for every node within a level.
    pub fn level_score(&self, kt: usize) -> f64 {
        let beta1_sq = crate::bounds::BoundConstants::standard().beta1.powi(2);
        self.filter_row(kt)
            .iter()
            .map(|w| w.re * w.re + beta1_sq * w.im * w.im)
            .sum()
    }

    /// Reorder for η extraction: sort levels by descending score (ties by
    /// ascending original level) and rotate each filter so its
    /// maximum-score edge sits at offset 0 (ties to the smallest offset).
    pub fn reorder(&self) -> Self {
        let beta1_sq = crate::bounds::BoundConstants::standard().beta1.powi(2);
        let mut order: Vec<usize> = (1..=self.alpha).collect();
        let scores: Vec<f64> = (1..=self.alpha).map(|kt| self.level_score(kt)).collect();
        order.sort_by(|&a, &b| {
            scores[b - 1]
                .partial_cmp(&scores[a - 1])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut b_level = Vec::with_capacity(self.alpha);
        let mut filters = Vec::with_capacity(self.alpha);
        for &kt in &order {
            let row = self.filter_row(kt);
            let (center, _) = row
                .iter()
                .map(|w| w.re * w.re + beta1_sq * w.im * w.im)
                .enumerate()
                .fold((0usize, f64::NEG_INFINITY), |(bi, bs), (i, s)| {
                    if s > bs {
                        (i, s)
                    } else {
                        (bi, bs)
                    }
                });
            let rotated: Vec<Complex64> =
                (0..self.l).map(|m| row[(m + center) % self.l]).collect();
            filters.push(rotated);
            b_level.push(self.b_level[kt - 1]);
        }
        Self::new(self.l, self.a0, b_level, filters).expect("shapes preserved")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TiRbmFile::from(self)).expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TiRbmFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

// --- file formats -----------------------------------------------------------

fn cj(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn jc(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

/// JSON schema: {"L", "Nh", "a", "b", "W"} with complex numbers as [re, im]
/// and W row-major (j then k).
#[derive(Serialize, Deserialize)]
struct RbmParamsFile {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "Nh")]
    nh: usize,
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
    #[serde(rename = "W")]
    w: Vec<Vec<[f64; 2]>>,
}

impl From<&RbmParams> for RbmParamsFile {
    fn from(p: &RbmParams) -> Self {
        Self {
            l: p.l,
            nh: p.nh,
            a: p.a.iter().map(|&z| cj(z)).collect(),
            b: p.b.iter().map(|&z| cj(z)).collect(),
            w: (1..=p.l)
                .map(|j| (1..=p.nh).map(|k| cj(p.w(j, k))).collect())
                .collect(),
        }
    }
}

impl TryFrom<RbmParamsFile> for RbmParams {
    type Error = Error;

    fn try_from(f: RbmParamsFile) -> Result<Self> {
        if f.a.len() != f.l || f.b.len() != f.nh {
            return Err(Error::Config("RBM file: a/b lengths disagree with L/Nh".into()));
        }
        let rows: Vec<Vec<Complex64>> = f
            .w
            .into_iter()
            .map(|row| row.into_iter().map(jc).collect())
            .collect();
        RbmParams::new(
            f.a.into_iter().map(jc).collect(),
            f.b.into_iter().map(jc).collect(),
            &rows,
        )
    }
}

/// JSON schema: {"L", "alpha", "a0", "b_level", "filters"}.
#[derive(Serialize, Deserialize)]
struct TiRbmFile {
    #[serde(rename = "L")]
    l: usize,
    alpha: usize,
    a0: [f64; 2],
    b_level: Vec<[f64; 2]>,
    filters: Vec<Vec<[f64; 2]>>,
}

impl From<&TranslationInvariantRbm> for TiRbmFile {
    fn from(t: &TranslationInvariantRbm) -> Self {
        Self {
            l: t.l,
            alpha: t.alpha,
            a0: cj(t.a0),
            b_level: t.b_level.iter().map(|&z| cj(z)).collect(),
            filters: (1..=t.alpha)
                .map(|kt| t.filter_row(kt).iter().map(|&z| cj(z)).collect())
                .collect(),
        }
    }
}

impl TryFrom<TiRbmFile> for TranslationInvariantRbm {
    type Error = Error;

    fn try_from(f: TiRbmFile) -> Result<Self> {
        if f.b_level.len() != f.alpha || f.filters.len() != f.alpha {
            return Err(Error::Config("TI RBM file: level counts disagree with alpha".into()));
        }
        TranslationInvariantRbm::new(
            f.l,
            jc(f.a0),
            f.b_level.into_iter().map(jc).collect(),
            f.filters
                .into_iter()
                .map(|row| row.into_iter().map(jc).collect())
                .collect(),
        )
    }
}
