//! Named parameter presets used by the experiment driver. Each preset
//! hard-codes one published figure's parameter setting.

use crate::error::{Error, Result};
use crate::lrfd::{DecayProfile, LambdaKind, MuKind};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3,
    Fig5,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "fig1b" => Ok(Preset::Fig1b),
            "fig2a" => Ok(Preset::Fig2a),
            "fig2b" => Ok(Preset::Fig2b),
            "fig3" => Ok(Preset::Fig3),
            "fig5" => Ok(Preset::Fig5),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected fig1b, fig2a, fig2b, fig3 or fig5)"
            ))),
        }
    }

    pub fn all() -> [Preset; 5] {
        [Preset::Fig1b, Preset::Fig2a, Preset::Fig2b, Preset::Fig3, Preset::Fig5]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1b => "fig1b",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3 => "fig3",
            Preset::Fig5 => "fig5",
        }
    }

    /// Default chain length of the published setting.
    pub fn default_l(&self) -> usize {
        match self {
            Preset::Fig1b | Preset::Fig2a | Preset::Fig2b => 11,
            Preset::Fig3 => 22,
            Preset::Fig5 => 13,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Preset::Fig1b => {
                "η-surface profile: λ(k̃)=k̃^-0.75, μ(0)=δ_Q=0.5, μ(r)=½δ_Q r^-1.5, c_w=1+i, c_b=0, a0=0, L=11"
            }
            Preset::Fig2a => {
                "perturbed cluster, exponential level decay: λ(k̃)=0.2·1.5^-(k̃-1), μ(0)=δ_Q=0.1, μ(r)=½δ_Q r^-3, c_w=c_b=1+i, a0=0, L=11"
            }
            Preset::Fig2b => {
                "perturbed cluster, power-law level decay: λ(k̃)=k̃^-3, μ(0)=δ_Q=0.1, μ(r)=½δ_Q r^-3, c_w=c_b=1+i, a0=0, L=11"
            }
            Preset::Fig3 => {
                "correlation profile: λ(k̃)=k̃^-3.5, μ(0)=δ_Q=0.2, μ(r)=½δ_Q r^-α_Q, c_w=1, c_b=0, a0=0, L=22, 5 levels (inset uses δ_Q=0.5)"
            }
            Preset::Fig5 => {
                "delta-state family: constant orbital μ₀=0.1, λ(k̃)=δ_P^(1-k̃), c_w=c_b=1, a0=0, L=13"
            }
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fig1b_profile() -> DecayProfile {
    DecayProfile::new(
        LambdaKind::Power { alpha_p: 0.75 },
        MuKind::Power { delta_q: 0.5, alpha_q: 1.5 },
        c(1.0, 1.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    )
    .expect("valid preset")
}

/// λ(k̃) = 0.2·δ_P^{−(k̃−1)} with δ_P = 1.5, stored as amplitude·δ_P^{−k̃}.
pub fn fig2a_profile() -> DecayProfile {
    DecayProfile::new(
        LambdaKind::Exponential { delta_p: 1.5, amplitude: 0.2 * 1.5 },
        MuKind::Power { delta_q: 0.1, alpha_q: 3.0 },
        c(1.0, 1.0),
        c(1.0, 1.0),
        c(0.0, 0.0),
    )
    .expect("valid preset")
}

pub fn fig2b_profile() -> DecayProfile {
    DecayProfile::new(
        LambdaKind::Power { alpha_p: 3.0 },
        MuKind::Power { delta_q: 0.1, alpha_q: 3.0 },
        c(1.0, 1.0),
        c(1.0, 1.0),
        c(0.0, 0.0),
    )
    .expect("valid preset")
}

/// Main-panel correlation profile (δ_Q = 0.2) at the requested α_Q.
pub fn fig3_profile(alpha_q: f64) -> Result<DecayProfile> {
    DecayProfile::new(
        LambdaKind::Power { alpha_p: 3.5 },
        MuKind::Power { delta_q: 0.2, alpha_q },
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    )
}

/// Half-chain inset profile: same family with the stronger orbital
/// δ_Q = 0.5, for which the α_Q = 1/2 half-chain correlation saturates
/// near 1 at every chain length.
pub fn fig3_inset_profile(alpha_q: f64) -> Result<DecayProfile> {
    DecayProfile::new(
        LambdaKind::Power { alpha_p: 3.5 },
        MuKind::Power { delta_q: 0.5, alpha_q },
        c(1.0, 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    )
}

pub const FIG5_MU0: f64 = 0.1;
pub const FIG5_L: usize = 13;

/// λ(k̃) = δ_P^{1−k̃}, stored as amplitude·δ_P^{−k̃} with amplitude = δ_P.
pub fn fig5_lambda(delta_p: f64) -> LambdaKind {
    LambdaKind::Exponential { delta_p, amplitude: delta_p }
}

/// Profile behind a named preset (fig3/fig5 take their family default).
pub fn preset_profile(preset: Preset) -> DecayProfile {
    match preset {
        Preset::Fig1b => fig1b_profile(),
        Preset::Fig2a => fig2a_profile(),
        Preset::Fig2b => fig2b_profile(),
        Preset::Fig3 => fig3_profile(1.0).expect("valid preset"),
        Preset::Fig5 => DecayProfile::new(
            fig5_lambda(1.5),
            MuKind::Constant { mu0: FIG5_MU0 },
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
        )
        .expect("valid preset"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parsing() {
        assert_eq!(Preset::parse("fig2b").unwrap(), Preset::Fig2b);
        assert_eq!(Preset::parse("FIG5").unwrap(), Preset::Fig5);
        assert!(Preset::parse("fig9").is_err());
        for p in Preset::all() {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
            assert!(!p.describe().is_empty());
            preset_profile(p).validate().unwrap();
        }
    }

    #[test]
    fn fig2a_lambda_matches_its_published_form() {
        // λ(k̃) = 0.2·1.5^{−(k̃−1)}
        let p = fig2a_profile();
        for kt in 1..=6 {
            let expect = 0.2 * 1.5f64.powi(-(kt as i32 - 1));
            assert!((p.lambda_construct(kt).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn fig5_lambda_starts_at_one() {
        let p = DecayProfile::new(
            fig5_lambda(2.0),
            MuKind::Constant { mu0: 0.1 },
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        assert!((p.lambda_construct(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.lambda_construct(3).unwrap() - 0.25).abs() < 1e-15);
    }
}
