//! Single-flip Metropolis walker over |ψ|² with cached effective angles.
//!
//! The walker keeps θ_k, ln|cosh θ_k| and arg(cosh θ_k) for every hidden
//! node, so a proposal costs O(N_h) and the local energy O(L·N_h). One chain
//! is fully deterministic given its seed.

use crate::error::{Error, Result};
use crate::exact::lanczos::{diagonal_energy, BondTable, HamiltonianSpec};
use crate::rbm::{arg_cosh, ln_abs_cosh, RbmParams, TranslationInvariantRbm, LOG_ZERO_THRESHOLD};
use crate::spinspace::SpinConfig;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

/// One decorrelated measurement.
#[derive(Clone, Debug)]
pub struct Sample {
    pub config: SpinConfig,
    pub e_loc: Complex64,
    /// Log-derivatives ∂ ln ψ / ∂θ in the flat parameter order
    /// (a0, b_level…, filters level-major).
    pub o: Vec<Complex64>,
}

/// Stable complex tanh; returns 0 at the (measure-zero) cosh zeros.
#[inline]
pub(crate) fn tanh_c(th: Complex64) -> Complex64 {
    let (u, v) = (th.re, th.im);
    if u.abs() > 20.0 {
        return Complex64::new(u.signum(), 0.0);
    }
    let d = (2.0 * u).cosh() + (2.0 * v).cos();
    if d.abs() < 1e-290 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new((2.0 * u).sinh() / d, (2.0 * v).sin() / d)
}

pub struct Sampler {
    t: TranslationInvariantRbm,
    p: RbmParams,
    table: BondTable,
    rng: ChaCha12Rng,
    config: SpinConfig,
    thetas: Vec<Complex64>,
    lncosh: Vec<f64>,
    argcosh: Vec<f64>,
    scratch_theta: Vec<Complex64>,
    scratch_ln: Vec<f64>,
    pub accepted: u64,
    pub proposed: u64,
}

impl Sampler {
    /// Deterministic per-chain substream: chain index is folded into the
    /// master seed with a splitmix-style mix.
    pub fn chain_seed(master: u64, chain: usize) -> u64 {
        let mut z = master ^ (chain as u64).wrapping_mul(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn new(
        t: &TranslationInvariantRbm,
        h: &HamiltonianSpec,
        master_seed: u64,
        chain: usize,
    ) -> Result<Self> {
        if t.l() != h.l {
            return Err(Error::Argument("ansatz and Hamiltonian sizes differ".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(Self::chain_seed(master_seed, chain));
        let p = t.expand();
        let l = t.l();
        let table = h.bond_table();
        // zero-amplitude starts are re-drawn a bounded number of times
        let mut config = None;
        for _ in 0..100 {
            let bits = (rng.random::<u64>() & ((1 << l) - 1)) as u32;
            let cand = SpinConfig::new(bits, l)?;
            if Self::log_mod_of(&p, &cand).is_finite() {
                config = Some(cand);
                break;
            }
        }
        let config = config.ok_or_else(|| {
            Error::Numerical("could not find a nonzero-amplitude start configuration".into())
        })?;
        let mut s = Self {
            t: t.clone(),
            p,
            table,
            rng,
            config,
            thetas: Vec::new(),
            lncosh: Vec::new(),
            argcosh: Vec::new(),
            scratch_theta: Vec::new(),
            scratch_ln: Vec::new(),
            accepted: 0,
            proposed: 0,
        };
        s.rebuild_caches();
        Ok(s)
    }

    fn log_mod_of(p: &RbmParams, s: &SpinConfig) -> f64 {
        crate::rbm::log_psi(p, s).log_mod
    }

    /// Install new parameters (walker position is kept).
    pub fn set_params(&mut self, t: &TranslationInvariantRbm) {
        self.t = t.clone();
        self.p = t.expand();
        self.rebuild_caches();
    }

    pub fn params(&self) -> &TranslationInvariantRbm {
        &self.t
    }

    pub fn config(&self) -> SpinConfig {
        self.config
    }

    fn rebuild_caches(&mut self) {
        let nh = self.p.nh();
        self.thetas.clear();
        self.lncosh.clear();
        self.argcosh.clear();
        for k in 1..=nh {
            let th = crate::rbm::effective_angle(&self.p, &self.config, k).expect("k in range");
            self.thetas.push(th);
            self.lncosh.push(ln_abs_cosh(th.re, th.im));
            self.argcosh.push(arg_cosh(th.re, th.im));
        }
        self.scratch_theta = vec![Complex64::new(0.0, 0.0); nh];
        self.scratch_ln = vec![0.0; nh];
    }

    /// One Metropolis step: uniform single-flip proposal accepted with
    /// min(1, |ψ'/ψ|²).
    fn step(&mut self) {
        let l = self.p.l();
        let j = self.rng.random_range(1..=l);
        let s_new = -self.config.spin(j);
        let two_s = 2.0 * s_new;
        let mut dlm = two_s * self.p.a()[j - 1].re;
        for k0 in 0..self.p.nh() {
            let w = self.p.w_col(k0 + 1)[j - 1];
            let th = Complex64::new(
                self.thetas[k0].re + two_s * w.re,
                self.thetas[k0].im + two_s * w.im,
            );
            let ln = ln_abs_cosh(th.re, th.im);
            self.scratch_theta[k0] = th;
            self.scratch_ln[k0] = ln;
            dlm += ln - self.lncosh[k0];
        }
        self.proposed += 1;
        let accept = if dlm >= 0.0 {
            true
        } else if dlm < -400.0 {
            false
        } else {
            self.rng.random::<f64>() < (2.0 * dlm).exp()
        };
        if accept {
            self.accepted += 1;
            self.config = self.config.flipped(j);
            std::mem::swap(&mut self.thetas, &mut self.scratch_theta);
            std::mem::swap(&mut self.lncosh, &mut self.scratch_ln);
            for k0 in 0..self.p.nh() {
                self.argcosh[k0] = arg_cosh(self.thetas[k0].re, self.thetas[k0].im);
            }
        }
    }

    /// One sweep = L proposed flips.
    pub fn sweep(&mut self) {
        for _ in 0..self.p.l() {
            self.step();
        }
    }

    /// ψ(config ⊕ flips)/ψ(config) from the cached angles.
    fn ratio_for_flips(&self, flip_mask: u32) -> Complex64 {
        let l = self.p.l();
        let mut dlm = 0.0;
        let mut darg = 0.0;
        // visible-bias part
        let mut rest = flip_mask;
        while rest != 0 {
            let j = rest.trailing_zeros() as usize + 1;
            rest &= rest - 1;
            let s_new = -self.config.spin(j);
            dlm += 2.0 * s_new * self.p.a()[j - 1].re;
            darg += 2.0 * s_new * self.p.a()[j - 1].im;
        }
        for k0 in 0..self.p.nh() {
            let mut th = self.thetas[k0];
            let mut rest = flip_mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                let two_s = -2.0 * self.config.spin(j);
                let w = self.p.w_col(k0 + 1)[j - 1];
                th.re += two_s * w.re;
                th.im += two_s * w.im;
            }
            let ln = ln_abs_cosh(th.re, th.im);
            if ln < LOG_ZERO_THRESHOLD {
                return Complex64::new(0.0, 0.0);
            }
            dlm += ln - self.lncosh[k0];
            darg += arg_cosh(th.re, th.im) - self.argcosh[k0];
        }
        let _ = l;
        Complex64::from_polar(dlm.exp(), darg)
    }

    /// E_loc(σ) = Σ_{σ'} H_{σσ'} ψ(σ')/ψ(σ) from the shared bond table.
    pub fn local_energy(&self) -> Complex64 {
        let mut e = Complex64::new(diagonal_energy(&self.table, &self.config), 0.0);
        for f in &self.table.flips {
            let sign = f.coeff * z_product(self.config.bits(), f.z_mask);
            if sign != 0.0 {
                e += sign * self.ratio_for_flips(f.flip_mask);
            }
        }
        e
    }

    /// Log-derivatives for the translation-invariant parameter vector at the
    /// current configuration.
    pub fn log_derivatives(&self) -> Vec<Complex64> {
        log_derivatives_from_thetas(&self.t, &self.config, &self.thetas)
    }

    /// Advance `sweeps` sweeps and measure.
    pub fn sample(&mut self, sweeps: usize) -> Sample {
        for _ in 0..sweeps {
            self.sweep();
        }
        Sample {
            config: self.config,
            e_loc: self.local_energy(),
            o: self.log_derivatives(),
        }
    }
}

#[inline]
fn z_product(bits: u32, z_mask: u32) -> f64 {
    let downs = (!bits & z_mask).count_ones();
    if downs % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Flat parameter count of the symmetric ansatz: 1 + alpha + alpha·L.
pub fn param_count(t: &TranslationInvariantRbm) -> usize {
    1 + t.alpha() + t.alpha() * t.l()
}

pub(crate) fn log_derivatives_from_thetas(
    t: &TranslationInvariantRbm,
    s: &SpinConfig,
    thetas: &[Complex64],
) -> Vec<Complex64> {
    let l = t.l();
    let alpha = t.alpha();
    let mut o = vec![Complex64::new(0.0, 0.0); param_count(t)];
    o[0] = Complex64::new(s.magnetization() as f64, 0.0);
    let tanhs: Vec<Complex64> = thetas.iter().map(|&th| tanh_c(th)).collect();
    for kt in 1..=alpha {
        let mut db = Complex64::new(0.0, 0.0);
        for jc in 1..=l {
            db += tanhs[(kt - 1) * l + (jc - 1)];
        }
        o[kt] = db;
        for m in 0..l {
            let mut df = Complex64::new(0.0, 0.0);
            for jc in 1..=l {
                let site = (jc - 1 + m) % l + 1;
                df += tanhs[(kt - 1) * l + (jc - 1)] * s.spin(site);
            }
            o[1 + alpha + (kt - 1) * l + m] = df;
        }
    }
    o
}
