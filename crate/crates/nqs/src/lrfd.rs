//! Constructors for decay-profile RBM families.
//!
//! A profile pairs a level-decay factor λ(k̃) with a localized orbital
//! factor μ(r) and complex scale constants (c_w, c_b, a₀). The
//! translation-invariant construction places, per level k̃ and center j_c,
//!
//!   W_{j,k} = c_w λ(k̃) μ(|j − j_c|_circ),  b_k = c_b λ(k̃) μ(0),  a_j = a₀.
//!
//! Also here: the 1-range cluster-state RBM, the perturbed cluster state
//! (cluster level followed by profile levels), the constant-orbital family
//! that approximates a Kronecker-delta state, and the edge importance
//! measure η(j, k̃, L).

use crate::error::{Error, Result};
use crate::rbm::{RbmParams, TranslationInvariantRbm};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Level-decay factor λ(k̃), k̃ = 1, 2, …
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LambdaKind {
    /// λ(k̃) = amplitude · δ_P^{−k̃}, δ_P > 1.
    Exponential {
        #[serde(rename = "delta_P")]
        delta_p: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// λ(k̃) = k̃^{−α_P}, α_P > 1/2.
    Power {
        #[serde(rename = "alpha_P")]
        alpha_p: f64,
    },
    /// Finite table λ(k̃) = table[k̃−1]; zero tail is declared beyond it.
    Table { table: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

/// Orbital factor μ(r), r = 0, 1, …, ⌊L/2⌋.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MuKind {
    /// μ(0) = δ_Q and μ(r) = ½ δ_Q r^{−α_Q} for r ≥ 1.
    Power {
        #[serde(rename = "delta_Q")]
        delta_q: f64,
        #[serde(rename = "alpha_Q")]
        alpha_q: f64,
    },
    /// μ(r) = μ₀ for all r.
    Constant { mu0: f64 },
    /// Finite table μ(r) = table[r]; zero beyond it.
    Table { table: Vec<f64> },
}

/// Specification of the (λ, μ) families and scale constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileFile", into = "ProfileFile")]
pub struct DecayProfile {
    pub lambda: LambdaKind,
    pub mu: MuKind,
    pub c_w: Complex64,
    pub c_b: Complex64,
    pub a0: Complex64,
}

impl DecayProfile {
    pub fn new(
        lambda: LambdaKind,
        mu: MuKind,
        c_w: Complex64,
        c_b: Complex64,
        a0: Complex64,
    ) -> Result<Self> {
        let p = Self { lambda, mu, c_w, c_b, a0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.lambda {
            LambdaKind::Exponential { delta_p, amplitude } => {
                if !(*delta_p > 1.0) {
                    return Err(Error::Divergence(format!(
                        "exponential level decay needs δ_P > 1, got {delta_p}"
                    )));
                }
                if !(*amplitude >= 0.0) {
                    return Err(Error::Config("λ amplitude must be nonnegative".into()));
                }
            }
            LambdaKind::Power { alpha_p } => {
                if !(*alpha_p > 0.5) {
                    return Err(Error::Divergence(format!(
                        "power-law level decay needs α_P > 1/2, got {alpha_p}"
                    )));
                }
            }
            LambdaKind::Table { table } => {
                if table.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::Config("λ table entries must be finite and ≥ 0".into()));
                }
                if table.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::Config("λ table must be nonincreasing".into()));
                }
            }
        }
        match &self.mu {
            MuKind::Power { delta_q, alpha_q } => {
                if !(*delta_q >= 0.0) || !(*alpha_q >= 0.0) {
                    return Err(Error::Config(
                        "power orbital needs δ_Q ≥ 0 and α_Q ≥ 0 (monotone nonincreasing)".into(),
                    ));
                }
            }
            MuKind::Constant { mu0 } => {
                if !(*mu0 >= 0.0) || !mu0.is_finite() {
                    return Err(Error::Config("constant orbital needs finite μ₀ ≥ 0".into()));
                }
            }
            MuKind::Table { table } => {
                if table.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return Err(Error::Config("μ table entries must be finite and ≥ 0".into()));
                }
                if table.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::Config("μ table must be nonincreasing".into()));
                }
            }
        }
        if self.c_b.norm() > self.c_w.norm() {
            return Err(Error::Config(format!(
                "|c_b| = {} must not exceed |c_w| = {}",
                self.c_b.norm(),
                self.c_w.norm()
            )));
        }
        Ok(())
    }

    /// λ(k̃) for constructing parameters; a table that is too short is an
    /// error, never silently extrapolated.
    pub fn lambda_construct(&self, kt: usize) -> Result<f64> {
        debug_assert!(kt >= 1);
        match &self.lambda {
            LambdaKind::Exponential { delta_p, amplitude } => {
                Ok(amplitude * delta_p.powi(-(kt as i32)))
            }
            LambdaKind::Power { alpha_p } => Ok((kt as f64).powf(-alpha_p)),
            LambdaKind::Table { table } => table.get(kt - 1).copied().ok_or_else(|| {
                Error::Config(format!(
                    "λ table has {} levels but level {kt} was requested",
                    table.len()
                ))
            }),
        }
    }

    /// λ(k̃) as a bound function: a finite table declares a zero tail.
    pub fn lambda_bound(&self, kt: usize) -> f64 {
        match &self.lambda {
            LambdaKind::Table { table } => table.get(kt - 1).copied().unwrap_or(0.0),
            _ => self.lambda_construct(kt).expect("analytic λ always evaluates"),
        }
    }

    /// μ(r) for constructing parameters; error beyond a table.
    pub fn mu_construct(&self, r: usize) -> Result<f64> {
        match &self.mu {
            MuKind::Power { delta_q, alpha_q } => {
                if r == 0 {
                    Ok(*delta_q)
                } else {
                    Ok(0.5 * delta_q * (r as f64).powf(-alpha_q))
                }
            }
            MuKind::Constant { mu0 } => Ok(*mu0),
            MuKind::Table { table } => table.get(r).copied().ok_or_else(|| {
                Error::Config(format!(
                    "μ table covers r < {} but r = {r} was requested",
                    table.len()
                ))
            }),
        }
    }

    /// μ(r) as a bound function: zero beyond a table.
    pub fn mu_bound(&self, r: usize) -> f64 {
        match &self.mu {
            MuKind::Table { table } => table.get(r).copied().unwrap_or(0.0),
            _ => self.mu_construct(r).expect("analytic μ always evaluates"),
        }
    }

    /// The finite upper bound μ₀ on μ (μ is nonincreasing, so μ(0)).
    pub fn mu_max(&self) -> f64 {
        self.mu_bound(0)
    }
}

// TOML/JSON schema: c_w, c_b, a0 as [re, im] pairs.
#[derive(Serialize, Deserialize, Clone)]
struct ProfileFile {
    lambda: LambdaKind,
    mu: MuKind,
    c_w: [f64; 2],
    c_b: [f64; 2],
    a0: [f64; 2],
}

impl TryFrom<ProfileFile> for DecayProfile {
    type Error = Error;

    fn try_from(f: ProfileFile) -> Result<Self> {
        DecayProfile::new(
            f.lambda,
            f.mu,
            Complex64::new(f.c_w[0], f.c_w[1]),
            Complex64::new(f.c_b[0], f.c_b[1]),
            Complex64::new(f.a0[0], f.a0[1]),
        )
    }
}

impl From<DecayProfile> for ProfileFile {
    fn from(p: DecayProfile) -> Self {
        Self {
            lambda: p.lambda,
            mu: p.mu,
            c_w: [p.c_w.re, p.c_w.im],
            c_b: [p.c_b.re, p.c_b.im],
            a0: [p.a0.re, p.a0.im],
        }
    }
}

impl DecayProfile {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Translation-invariant profile RBM with `alpha` levels.
pub fn build_lrfd(profile: &DecayProfile, l: usize, alpha: usize) -> Result<TranslationInvariantRbm> {
    profile.validate()?;
    if alpha < 1 {
        return Err(Error::Argument("level count alpha must be ≥ 1".into()));
    }
    if l < 2 {
        return Err(Error::Argument("need at least 2 sites".into()));
    }
    let mut filters = Vec::with_capacity(alpha);
    let mut b_level = Vec::with_capacity(alpha);
    for kt in 1..=alpha {
        let lam = profile.lambda_construct(kt)?;
        let mut row = Vec::with_capacity(l);
        for m in 0..l {
            let r = m.min(l - m);
            row.push(profile.c_w * lam * profile.mu_construct(r)?);
        }
        filters.push(row);
        b_level.push(profile.c_b * lam * profile.mu_construct(0)?);
    }
    TranslationInvariantRbm::new(l, profile.a0, b_level, filters)
}

/// 1-range RBM that exactly represents the ground state of
/// Ĥ = −Σ_j σ̂^z_{j−1} σ̂^x_j σ̂^z_{j+1} on a periodic chain:
/// a = 0, b_k = iπ/4, W_{k−1,k} = iπ/2, W_{k,k} = 3iπ/4, W_{k+1,k} = iπ/4.
pub fn build_cluster_rbm(l: usize) -> Result<RbmParams> {
    if l < 3 {
        return Err(Error::Argument("cluster chain needs L ≥ 3".into()));
    }
    let mut p = RbmParams::zeros(l, l)?;
    let i = Complex64::new(0.0, 1.0);
    for k in 1..=l {
        p.set_b(k, i * PI / 4.0);
        let prev = if k == 1 { l } else { k - 1 };
        let next = if k == l { 1 } else { k + 1 };
        p.set_w(prev, k, i * PI / 2.0);
        p.set_w(k, k, 3.0 * i * PI / 4.0);
        p.set_w(next, k, i * PI / 4.0);
    }
    Ok(p)
}

/// Cluster state with a decay-profile perturbation: the hidden layer is the
/// cluster level (L nodes) followed by `alpha` profile levels, so
/// N_h = (alpha + 1)·L in total; a = 0.
pub fn build_perturbed_cluster(
    l: usize,
    profile: &DecayProfile,
    alpha: usize,
) -> Result<RbmParams> {
    let cluster = build_cluster_rbm(l)?;
    let pert = build_lrfd(profile, l, alpha)?.expand();
    let nh = (alpha + 1) * l;
    let mut a = vec![Complex64::new(0.0, 0.0); l];
    if profile.a0.norm() != 0.0 {
        a = vec![profile.a0; l];
    }
    let mut b = Vec::with_capacity(nh);
    let mut w = Vec::with_capacity(l * nh);
    b.extend_from_slice(cluster.b());
    for k in 1..=l {
        w.extend_from_slice(cluster.w_col(k));
    }
    b.extend_from_slice(pert.b());
    for k in 1..=alpha * l {
        w.extend_from_slice(pert.w_col(k));
    }
    RbmParams::from_column_major(l, nh, a, b, w)
}

/// Constant-orbital family approximating the all-spins-up Kronecker-delta
/// state: μ(r) = μ₀, c_w = c_b = 1, a₀ = 0. All parameters are real and
/// positive, so the amplitude peaks at σ⃗₀ = (1, …, 1).
pub fn build_kron_delta(
    l: usize,
    mu0: f64,
    lambda: LambdaKind,
    alpha: usize,
) -> Result<TranslationInvariantRbm> {
    let profile = DecayProfile::new(
        lambda,
        MuKind::Constant { mu0 },
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )?;
    if alpha == 0 {
        // no hidden nodes: uniform state
        return TranslationInvariantRbm::new(l, Complex64::new(0.0, 0.0), vec![], vec![]);
    }
    build_lrfd(&profile, l, alpha)
}

const BETA3_X0: f64 = 0.5;
const BETA3_GRID: usize = 400;

/// Certified constant β₃ for the delta-state ratio bound: the largest value
/// of the candidate sequence tanh(x₀)/x₀·(1 − x₀²/6)·0.9^m that satisfies
/// 1 + tanh(x)·Δx ≥ exp(β₃ x Δx) on a dense grid over 0 < Δx < x < x₀,
/// with x₀ = 1/2.
pub fn certified_beta3() -> f64 {
    static BETA3: OnceLock<f64> = OnceLock::new();
    *BETA3.get_or_init(|| {
        let x0 = BETA3_X0;
        let mut beta3 = x0.tanh() / x0 * (1.0 - x0 * x0 / 6.0);
        let verify = |b3: f64| -> bool {
            for i in 1..=BETA3_GRID {
                let x = x0 * i as f64 / (BETA3_GRID + 1) as f64;
                for j in 1..=BETA3_GRID {
                    let dx = x * j as f64 / (BETA3_GRID + 1) as f64;
                    if 1.0 + x.tanh() * dx < (b3 * x * dx).exp() {
                        return false;
                    }
                }
            }
            true
        };
        while !verify(beta3) {
            beta3 *= 0.9;
        }
        beta3
    })
}

/// Certified lower bound exp(2 β₃ L(L−1) μ₀² Σ_{k̃>k̃₀} λ²(k̃)) on the
/// amplitude ratio |ψ(σ⃗₀)/ψ(σ⃗′)| of the constant-orbital family, valid when
/// (L−1)μ₀λ(k̃) < x₀ = 1/2 for all k̃ > k̃₀ (and L ≥ 4 so that the flip
/// increment stays below the unflipped angle).
pub fn kron_ratio_lower_bound(
    l: usize,
    mu0: f64,
    lambda: &LambdaKind,
    kt0: usize,
    beta3: f64,
) -> Result<f64> {
    if !(beta3 > 0.0 && beta3 < 1.0) {
        return Err(Error::Argument(format!("β₃ must lie in (0,1), got {beta3}")));
    }
    if l < 4 {
        return Err(Error::Argument("ratio bound needs L ≥ 4".into()));
    }
    let profile = DecayProfile::new(
        lambda.clone(),
        MuKind::Constant { mu0 },
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )?;
    if profile.lambda_bound(kt0 + 1) * mu0 * (l as f64 - 1.0) >= BETA3_X0 {
        return Err(Error::Argument(format!(
            "k̃₀ = {kt0} too small: (L−1)μ₀λ(k̃₀+1) must be below {BETA3_X0}"
        )));
    }
    // Σ_{k̃ > kt0} λ²(k̃)
    let tail = match &profile.lambda {
        LambdaKind::Exponential { delta_p, amplitude } => {
            let q = delta_p.powi(-2);
            amplitude * amplitude * q.powi(kt0 as i32 + 1) / (1.0 - q)
        }
        LambdaKind::Power { alpha_p } => crate::bounds::tail_sum_power(kt0, 2.0 * alpha_p)?,
        LambdaKind::Table { table } => table[kt0.min(table.len())..]
            .iter()
            .map(|x| x * x)
            .sum(),
    };
    if !tail.is_finite() {
        return Err(Error::Divergence("λ² tail sum does not converge".into()));
    }
    let lf = l as f64;
    Ok((2.0 * beta3 * lf * (lf - 1.0) * mu0 * mu0 * tail).exp())
}

/// Exact amplitude ratio |ψ(σ⃗₀)/ψ(σ⃗₁)| for the constant-orbital family,
/// where σ⃗₁ flips one spin of the all-up state. Every node in level k̃
/// carries the same angle μ₀λ(k̃)(1 + Σ_j σ_j), so the infinite product has
/// a closed per-level form; levels are accumulated until the log increment
/// falls below 1e−18.
pub fn kron_ratio_exact(l: usize, mu0: f64, lambda: &LambdaKind) -> Result<f64> {
    let profile = DecayProfile::new(
        lambda.clone(),
        MuKind::Constant { mu0 },
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
    )?;
    let lf = l as f64;
    let mut log_ratio = 0.0;
    for kt in 1..=1_000_000usize {
        let lam = profile.lambda_bound(kt);
        if lam == 0.0 {
            break;
        }
        let up = ((lf + 1.0) * mu0 * lam).cosh().ln();
        let dn = ((lf - 1.0) * mu0 * lam).cosh().ln();
        let inc = lf * (up - dn);
        log_ratio += inc;
        if inc < 1e-18 && kt > 1 {
            break;
        }
    }
    Ok(log_ratio.exp())
}

/// Edge importance η(j, k̃) = (Re W_{j,kc})² + β₁²(Im W_{j,kc})² at the
/// center hidden node kc = (L+1)/2 + (k̃−1)L of each level.
#[derive(Clone, Debug)]
pub struct EtaSurface {
    pub l: usize,
    pub alpha: usize,
    /// values[(k̃−1)·L + (j−1)] = η(j, k̃)
    pub values: Vec<f64>,
}

impl EtaSurface {
    pub fn value(&self, j: usize, kt: usize) -> f64 {
        assert!(j >= 1 && j <= self.l && kt >= 1 && kt <= self.alpha);
        self.values[(kt - 1) * self.l + (j - 1)]
    }

    /// max_j η(j, k̃) per level — the "ridge" of the surface.
    pub fn ridge(&self) -> Vec<f64> {
        (1..=self.alpha)
            .map(|kt| {
                self.values[(kt - 1) * self.l..kt * self.l]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    /// Least-squares slope of ln(ridge) vs ln(k̃), skipping the first
    /// `skip` levels; levels with zero ridge are excluded.
    pub fn ridge_slope(&self, skip: usize) -> Option<f64> {
        let ridge = self.ridge();
        let pts: Vec<(f64, f64)> = ridge
            .iter()
            .enumerate()
            .skip(skip)
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| ((i as f64 + 1.0).ln(), v.ln()))
            .collect();
        fit_slope(&pts)
    }
}

/// Least-squares slope of y vs x.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// η surface of a translation-invariant RBM. L must be odd so the center
/// node (L+1)/2 is well defined.
pub fn eta_surface(t: &TranslationInvariantRbm) -> Result<EtaSurface> {
    let l = t.l();
    if l % 2 == 0 {
        return Err(Error::Argument(
            "η is defined through the center node (L+1)/2; L must be odd".into(),
        ));
    }
    let beta1_sq = crate::bounds::BoundConstants::standard().beta1.powi(2);
    let p = t.expand();
    let mut values = Vec::with_capacity(t.alpha() * l);
    for kt in 1..=t.alpha() {
        let kc = (l + 1) / 2 + (kt - 1) * l;
        for j in 1..=l {
            let w = p.w(j, kc);
            values.push(w.re * w.re + beta1_sq * w.im * w.im);
        }
    }
    Ok(EtaSurface { l, alpha: t.alpha(), values })
}
