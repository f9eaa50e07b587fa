//! Closed-form truncation-error machinery.
//!
//! For a profile (λ, μ) and an L-site chain, truncating the hidden layer to
//! N_h = nL nodes leaves errors controlled by the composite
//!
//!   x = L · Q(L) · P(N_h/L),
//!   P(m) = Σ_{k̃=m+1}^∞ λ²(k̃),      Q(L) = (Σ_{r=0}^{⌊L/2⌋} μ(r))²,
//!
//! through two envelope functions:
//!
//!   ‖|ψ̃_full⟩ − |ψ̃_tr⟩‖₂²  ≤ F₁(x) = 2 − 2 e^{−2(1+β₁²)x} cos(4β₂x),
//!   |⟨B̂⟩_full − ⟨B̂⟩_tr|    ≤ F₂(x) = max{|e^{4x}−1|, |1−e^{−4β₁²x}|}
//!                                   + max over the two modulus branches of
//!                                     (E² − 2E cos(8β₂x) + 1)^{1/2},
//!
//! valid once the kept level count exceeds a threshold n_Θ(L). The envelopes
//! are evaluated in cancellation-free form (expm1 / sin² identities) so the
//! leading-order coefficients c₁, c₂ are recovered to full precision.

use crate::error::{Error, Result};
use crate::lrfd::{DecayProfile, LambdaKind, MuKind};
use crate::rbm::RbmParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// β₁ = 3√(2 ln 2)/π, β₂ = 3√3/π, c₁ = 4(1+β₁²), c₂ = 4β₁² + 4(β₁⁴+4β₂²)^{1/2}.
#[derive(Clone, Copy, Debug)]
pub struct BoundConstants {
    pub beta1: f64,
    pub beta2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BoundConstants {
    pub fn standard() -> &'static BoundConstants {
        static CONSTS: OnceLock<BoundConstants> = OnceLock::new();
        CONSTS.get_or_init(|| {
            let beta1 = 3.0 * (2.0 * std::f64::consts::LN_2).sqrt() / PI;
            let beta2 = 3.0 * 3.0f64.sqrt() / PI;
            let c1 = 4.0 * (1.0 + beta1 * beta1);
            let c2 = 4.0 * beta1 * beta1 + 4.0 * (beta1.powi(4) + 4.0 * beta2 * beta2).sqrt();
            BoundConstants { beta1, beta2, c1, c2 }
        })
    }
}

/// First-type envelope F₁(x) = 2 − 2 e^{−2(1+β₁²)x} cos(4β₂x).
pub fn f1(x: f64) -> f64 {
    let k = BoundConstants::standard();
    let c = 2.0 * (1.0 + k.beta1 * k.beta1) * x;
    let half = 2.0 * k.beta2 * x; // half of 4β₂x
    let s = half.sin();
    // 2 − 2e^{−c}cos t = −2·expm1(−c) + 4e^{−c} sin²(t/2)
    -2.0 * (-c).exp_m1() + 4.0 * (-c).exp() * s * s
}

/// Second-type envelope F₂(x); see module docs.
pub fn f2(x: f64) -> f64 {
    let k = BoundConstants::standard();
    let p = 4.0 * x;
    let q = 4.0 * k.beta1 * k.beta1 * x;
    let half = 4.0 * k.beta2 * x; // half of 8β₂x
    let s2 = half.sin().powi(2);
    let em_p = p.exp_m1(); // e^{4x} − 1
    let em_q = (-q).exp_m1(); // e^{−4β₁²x} − 1
    let first = em_p.abs().max(em_q.abs());
    // E² − 2E cos t + 1 = (E−1)² + 4E sin²(t/2)
    let b1 = (em_p * em_p + 4.0 * p.exp() * s2).sqrt();
    let b2 = (em_q * em_q + 4.0 * (-q).exp() * s2).sqrt();
    first + b1.max(b2)
}

/// Σ_{n=a+1}^∞ n^{−s} for s > 1, with the switchover index to the analytic
/// remainder. Terms are summed directly until the remainder bracket
/// n^{1−s}/(s−1) − n^{−s}/2 ± n^{−s}/2 is negligible at relative 1e−13.
pub fn tail_sum_power_detailed(a: usize, s: f64) -> Result<(f64, usize)> {
    if !(s > 1.0) {
        return Err(Error::Divergence(format!("power tail needs s > 1, got {s}")));
    }
    let mut partial = 0.0f64;
    let mut n = a;
    loop {
        n += 1;
        let nf = n as f64;
        partial += nf.powf(-s);
        let remainder = nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s);
        let half_width = 0.5 * nf.powf(-s);
        let estimate = partial + remainder;
        if half_width <= 1e-13 * estimate.abs() || n > a + 100_000_000 {
            return Ok((estimate, n));
        }
    }
}

/// Σ_{n=a+1}^∞ n^{−s} to relative 1e−12.
pub fn tail_sum_power(a: usize, s: f64) -> Result<f64> {
    tail_sum_power_detailed(a, s).map(|(v, _)| v)
}

/// P(m) = Σ_{k̃=m+1}^∞ λ²(k̃). Exponential profiles use the closed geometric
/// form, power profiles the direct-sum-plus-remainder evaluator, and tables
/// a finite sum (their tail is declared zero).
pub fn p_tail(profile: &DecayProfile, m: usize) -> Result<f64> {
    p_tail_detailed(profile, m).map(|(v, _)| v)
}

/// P(m) together with the power-law switchover index when one applies.
pub fn p_tail_detailed(profile: &DecayProfile, m: usize) -> Result<(f64, Option<usize>)> {
    match &profile.lambda {
        LambdaKind::Exponential { delta_p, amplitude } => {
            if !(*delta_p > 1.0) {
                return Err(Error::Divergence(format!("δ_P must exceed 1, got {delta_p}")));
            }
            let q = delta_p.powi(-2);
            Ok((amplitude * amplitude * q.powi(m as i32 + 1) / (1.0 - q), None))
        }
        LambdaKind::Power { alpha_p } => {
            if !(*alpha_p > 0.5) {
                return Err(Error::Divergence(format!("α_P must exceed 1/2, got {alpha_p}")));
            }
            let (v, switch) = tail_sum_power_detailed(m, 2.0 * alpha_p)?;
            Ok((v, Some(switch)))
        }
        LambdaKind::Table { table } => {
            let v = table[m.min(table.len())..].iter().map(|x| x * x).sum();
            Ok((v, None))
        }
    }
}

/// P₀ = Σ_{k̃≥1} (λ_R² + β₁²λ_I²) = (1 + β₁²) Σ λ² in the symmetric case.
pub fn p0(profile: &DecayProfile) -> Result<f64> {
    let k = BoundConstants::standard();
    Ok((1.0 + k.beta1 * k.beta1) * p_tail(profile, 0)?)
}

/// Q(L) = (Σ_{r=0}^{⌊L/2⌋} μ(r))². Odd L sums to (L−1)/2; for even L the
/// circular distance reaches L/2 and the sum includes it.
pub fn q_val(profile: &DecayProfile, l: usize) -> f64 {
    let sum: f64 = (0..=l / 2).map(|r| profile.mu_bound(r)).sum();
    sum * sum
}

/// Appendix-A-style bound diagnostic M₀/A₀ = exp(2 L Q(L) P₀).
pub fn m0_factor(profile: &DecayProfile, l: usize) -> Result<f64> {
    Ok((2.0 * l as f64 * q_val(profile, l) * p0(profile)?).exp())
}

/// U_k = max_σ |Re θ_k| = |Re b_k| + Σ_j |Re W_{j,k}| (1-based k).
pub fn max_real_angle(p: &RbmParams, k: usize) -> f64 {
    p.b()[k - 1].re.abs() + p.w_col(k).iter().map(|w| w.re.abs()).sum::<f64>()
}

/// V_k = max_σ |Im θ_k| = |Im b_k| + Σ_j |Im W_{j,k}| (1-based k).
pub fn max_imag_angle(p: &RbmParams, k: usize) -> f64 {
    p.b()[k - 1].im.abs() + p.w_col(k).iter().map(|w| w.im.abs()).sum::<f64>()
}

/// Smallest n with V_k ≤ π/3 for every hidden node beyond level n, from the
/// profile bound V_k ≤ 2 λ(k̃) Σ_r μ(r).
pub fn n_i_bound(profile: &DecayProfile, l: usize) -> Result<usize> {
    let sqrt_q = q_val(profile, l).sqrt();
    let mut n = 0usize;
    loop {
        if 2.0 * profile.lambda_bound(n + 1) * sqrt_q <= PI / 3.0 {
            return Ok(n);
        }
        n += 1;
        if n > 10_000_000 {
            return Err(Error::Divergence("λ does not fall below the π/3 gate".into()));
        }
    }
}

/// Smallest n with V_k ≤ π/3 beyond level n, evaluated exactly from a
/// parameter set (tighter than the profile bound).
pub fn n_i_exact(p: &RbmParams) -> usize {
    let levels = p.nh() / p.l();
    let mut n = 0usize;
    for kt in 1..=levels {
        let violated = ((kt - 1) * p.l() + 1..=kt * p.l())
            .any(|k| max_imag_angle(p, k) > PI / 3.0);
        if violated {
            n = kt;
        }
    }
    n
}

/// Smallest level count n > n_I(L) with 4β₂ L Q(L) P(n) ≤ π/4; the Lemma
/// bounds hold for all N_h > n_Θ(L)·L.
pub fn n_theta(profile: &DecayProfile, l: usize) -> Result<usize> {
    let k = BoundConstants::standard();
    let ni = n_i_bound(profile, l)?;
    let lq = l as f64 * q_val(profile, l);
    let mut n = ni + 1;
    loop {
        if 4.0 * k.beta2 * lq * p_tail(profile, n)? <= PI / 4.0 {
            return Ok(n.max(1));
        }
        n += 1;
        if n > 10_000_000 {
            return Err(Error::Divergence("P(n) does not fall below the π/4 gate".into()));
        }
    }
}

/// Bounds on the full/truncated ratio over all configurations:
/// max |ψ_full/ψ_tr|² ≤ R₁ = e^{4LQP}, min ≥ R₂ = e^{−4β₁²LQP}, and
/// max |arg(ψ_full/ψ_tr)| ≤ Θ = 4β₂LQP. Requires N_h/L > n_I(L).
pub fn ratio_bounds(profile: &DecayProfile, l: usize, nh: usize) -> Result<(f64, f64, f64)> {
    if nh % l != 0 {
        return Err(Error::Argument(format!("Nh = {nh} must be a multiple of L = {l}")));
    }
    let n = nh / l;
    let ni = n_i_bound(profile, l)?;
    if n <= ni {
        return Err(Error::Argument(format!(
            "ratio bounds need Nh/L > n_I = {ni}, got {n}"
        )));
    }
    let k = BoundConstants::standard();
    let x = l as f64 * q_val(profile, l) * p_tail(profile, n)?;
    Ok(((4.0 * x).exp(), (-4.0 * k.beta1 * k.beta1 * x).exp(), 4.0 * k.beta2 * x))
}

/// Which truncation-error measure a bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    /// Squared l₂ distance of normalized state vectors (first type).
    StateL2,
    /// Pauli-string expectation difference (second type).
    Expectation,
}

/// Whether to invert the exact envelope or its leading-order line c·x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    Exact,
    LeadingOrder,
}

/// The pair (F₁(x), F₂(x)) at x = L·Q(L)·P(N_h/L). Errors carry the minimal
/// admissible N_h when the level threshold is not met.
pub fn truncation_error_bounds(profile: &DecayProfile, l: usize, nh: usize) -> Result<(f64, f64)> {
    if nh % l != 0 {
        return Err(Error::Argument(format!("Nh = {nh} must be a multiple of L = {l}")));
    }
    let nt = n_theta(profile, l)?;
    if nh / l <= nt {
        return Err(Error::Argument(format!(
            "bounds hold for Nh > n_theta·L; minimal admissible Nh is {}",
            (nt + 1) * l
        )));
    }
    let x = l as f64 * q_val(profile, l) * p_tail(profile, nh / l)?;
    Ok((f1(x), f2(x)))
}

fn envelope(x: f64, error_type: ErrorType, form: BoundForm) -> f64 {
    let k = BoundConstants::standard();
    match (error_type, form) {
        (ErrorType::StateL2, BoundForm::Exact) => f1(x),
        (ErrorType::Expectation, BoundForm::Exact) => f2(x),
        (ErrorType::StateL2, BoundForm::LeadingOrder) => k.c1 * x,
        (ErrorType::Expectation, BoundForm::LeadingOrder) => k.c2 * x,
    }
}

/// Smallest N_h (a multiple of L above n_Θ·L) whose bound is ≤ ε₀; an upper
/// bound on the true N_h*(L, ε₀).
pub fn nh_star_bound(
    profile: &DecayProfile,
    l: usize,
    eps0: f64,
    error_type: ErrorType,
    form: BoundForm,
) -> Result<usize> {
    if !(eps0 > 0.0) {
        return Err(Error::Argument(format!("ε₀ must be positive, got {eps0}")));
    }
    let lq = l as f64 * q_val(profile, l);
    let mut n = n_theta(profile, l)? + 1;
    loop {
        let x = lq * p_tail(profile, n)?;
        if envelope(x, error_type, form) <= eps0 {
            return Ok(n * l);
        }
        n += 1;
        if n > 100_000_000 / l.max(1) {
            return Err(Error::Divergence(
                "bound does not reach ε₀ within 10^8 hidden nodes".into(),
            ));
        }
    }
}

/// Complexity-scaling classes of (μ, λ) settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldTag {
    S2_1,
    S2_2,
    S2_3,
    S2_4,
    S2_5,
    S2_6,
    S2_7,
    Unknown,
}

impl ManifoldTag {
    /// Symbolic complexity descriptor for N_h*(L, ε).
    pub fn complexity_formula(&self) -> &'static str {
        match self {
            ManifoldTag::S2_1 | ManifoldTag::S2_3 | ManifoldTag::S2_5 => "O(L ln(L/ε))",
            ManifoldTag::S2_2 => "O((L^{2α_P}/ε)^{1/(2α_P−1)})",
            ManifoldTag::S2_4 => "O((L^{2α_P}(ln L)²/ε)^{1/(2α_P−1)})",
            ManifoldTag::S2_6 => "O((L^{2α_P+2}/ε)^{1/(2α_P−1)})",
            ManifoldTag::S2_7 => "O(L exp(L/ε))",
            ManifoldTag::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldClass {
    pub tag: ManifoldTag,
    pub complexity_formula: String,
    /// The slow-level-decay class only upper-bounds the cost; a
    /// faster-than-polynomial bound does not prove the representation is
    /// inefficient.
    pub bound_not_tight: bool,
}

impl ManifoldClass {
    pub fn from_tag(tag: ManifoldTag) -> Self {
        Self {
            tag,
            complexity_formula: tag.complexity_formula().to_string(),
            bound_not_tight: tag == ManifoldTag::S2_7,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum QClass {
    Convergent,
    LogSquared,
    Saturating,
    Unknown,
}

fn classify_q(mu: &MuKind) -> QClass {
    match mu {
        MuKind::Power { alpha_q, .. } => {
            if *alpha_q > 1.0 {
                QClass::Convergent
            } else if (*alpha_q - 1.0).abs() < 1e-12 {
                QClass::LogSquared
            } else if *alpha_q == 0.0 {
                QClass::Saturating
            } else {
                QClass::Unknown
            }
        }
        MuKind::Constant { mu0 } => {
            if *mu0 > 0.0 {
                QClass::Saturating
            } else {
                QClass::Convergent
            }
        }
        MuKind::Table { table } => {
            // finite support: partial sums are trivially Cauchy
            let _ = table;
            QClass::Convergent
        }
    }
}

/// Map a profile onto its complexity class. Custom λ tables are not
/// classifiable (their asymptotics are not declared); that is a result, not
/// an error.
pub fn classify_manifold(profile: &DecayProfile) -> ManifoldClass {
    let q = classify_q(&profile.mu);
    let tag = match (&profile.lambda, q) {
        (_, QClass::Unknown) => ManifoldTag::Unknown,
        (LambdaKind::Exponential { .. }, QClass::Convergent) => ManifoldTag::S2_1,
        (LambdaKind::Power { .. }, QClass::Convergent) => ManifoldTag::S2_2,
        (LambdaKind::Exponential { .. }, QClass::LogSquared) => ManifoldTag::S2_3,
        (LambdaKind::Power { .. }, QClass::LogSquared) => ManifoldTag::S2_4,
        (LambdaKind::Exponential { .. }, QClass::Saturating) => ManifoldTag::S2_5,
        (LambdaKind::Power { .. }, QClass::Saturating) => ManifoldTag::S2_6,
        (LambdaKind::Table { .. }, _) => ManifoldTag::Unknown,
    };
    ManifoldClass::from_tag(tag)
}

/// Everything the bound machinery knows about one (L, N_h) point, plus the
/// measured errors when an exact oracle ran.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "Nh")]
    pub nh: usize,
    pub x: f64,
    #[serde(rename = "P_tail")]
    pub p_tail: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub bound1: f64,
    pub bound2: f64,
    pub exact1: Option<f64>,
    pub exact2: Option<f64>,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    pub n_theta: usize,
    #[serde(rename = "n_I")]
    pub n_i: usize,
    /// n_I re-evaluated from exact V_k of a concrete parameter set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_i_from_params: Option<usize>,
    /// Direct-summation switchover index of the power-law tail evaluator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_tail_switchover: Option<usize>,
}

impl TruncationReport {
    pub fn csv_header() -> &'static str {
        "L,Nh,x,P_tail,Q,bound1,bound2,exact1,exact2,R1,R2,Theta,n_theta,n_I"
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{},{}",
            self.l,
            self.nh,
            self.x,
            self.p_tail,
            self.q,
            self.bound1,
            self.bound2,
            opt(self.exact1),
            opt(self.exact2),
            self.r1,
            self.r2,
            self.theta,
            self.n_theta,
            self.n_i
        )
    }
}

/// Assemble the bound side of a report for one (L, N_h).
pub fn report(profile: &DecayProfile, l: usize, nh: usize) -> Result<TruncationReport> {
    let (ptail, switch) = p_tail_detailed(profile, nh / l)?;
    let q = q_val(profile, l);
    let x = l as f64 * q * ptail;
    let (bound1, bound2) = truncation_error_bounds(profile, l, nh)?;
    let (r1, r2, theta) = ratio_bounds(profile, l, nh)?;
    Ok(TruncationReport {
        l,
        nh,
        x,
        p_tail: ptail,
        q,
        bound1,
        bound2,
        exact1: None,
        exact2: None,
        r1,
        r2,
        theta,
        n_theta: n_theta(profile, l)?,
        n_i: n_i_bound(profile, l)?,
        n_i_from_params: None,
        p_tail_switchover: switch,
    })
}
