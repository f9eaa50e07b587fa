//! Brute-force oracles: full state vectors over the 2^L basis, truncation
//! error measures, Pauli expectations, spin correlations, and (in
//! [`lanczos`]) matrix-free exact diagonalization.
//!
//! State builds walk the basis in Gray-code order so that consecutive
//! configurations differ by one flip and every effective angle updates in
//! O(1); the per-configuration cost is O(N_h) instead of O(L·N_h). Chunks of
//! the walk run in parallel and are reduced in fixed order, so results are
//! deterministic.

pub mod lanczos;

use crate::error::{Error, Result};
use crate::rbm::{arg_cosh, ln_abs_cosh, RbmParams, TranslationInvariantRbm, LOG_ZERO_THRESHOLD};
use crate::spinspace::{apply_pauli, PauliString, SpinConfig};
use num_complex::Complex64;
use rayon::prelude::*;

/// Hard cap for materialized state vectors (16 MiB of amplitudes at L=20).
pub const MAX_STATE_SITES: usize = 20;
/// Hard cap for streaming (no materialization) sweeps.
pub const MAX_STREAM_SITES: usize = 26;

/// Dense amplitude vector indexed by configuration bitmask.
#[derive(Clone, Debug)]
pub struct StateVector {
    l: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(l: usize, amps: Vec<Complex64>) -> Result<Self> {
        if l == 0 || l > MAX_STATE_SITES {
            return Err(Error::Capacity(format!(
                "state vectors support 1..={MAX_STATE_SITES} sites, got {l}"
            )));
        }
        if amps.len() != 1 << l {
            return Err(Error::Argument(format!(
                "amplitude vector must have 2^{l} entries, got {}",
                amps.len()
            )));
        }
        Ok(Self { l, amps })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, s: &SpinConfig) -> Complex64 {
        self.amps[s.bits() as usize]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Scale to unit norm; a zero vector cannot be normalized.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numerical(format!("cannot normalize vector with norm {n}")));
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// ⟨self|other⟩ with no normalization.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Binary export: 8-byte little-endian header with L, then 2^L (re, im)
    /// f64 pairs in ascending bitmask order.
    pub fn write_binary(&self, path: &std::path::Path) -> Result<()> {
        let mut buf = Vec::with_capacity(8 + self.amps.len() * 16);
        buf.extend_from_slice(&(self.l as u64).to_le_bytes());
        for a in &self.amps {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read_binary(path: &std::path::Path) -> Result<Self> {
        let data = std::fs::read(path)?;
        if data.len() < 8 {
            return Err(Error::Argument("state file too short for header".into()));
        }
        let l = u64::from_le_bytes(data[..8].try_into().unwrap()) as usize;
        if l == 0 || l > MAX_STATE_SITES {
            return Err(Error::Capacity(format!("state file declares L = {l}")));
        }
        let dim = 1usize << l;
        if data.len() != 8 + dim * 16 {
            return Err(Error::Argument(format!(
                "state file length {} does not match L = {l}",
                data.len()
            )));
        }
        let amps = (0..dim)
            .map(|i| {
                let off = 8 + i * 16;
                Complex64::new(
                    f64::from_le_bytes(data[off..off + 8].try_into().unwrap()),
                    f64::from_le_bytes(data[off + 8..off + 16].try_into().unwrap()),
                )
            })
            .collect();
        Self::new(l, amps)
    }

    /// JSON export; permitted only up to L = 12.
    pub fn to_json(&self) -> Result<String> {
        if self.l > 12 {
            return Err(Error::Capacity(format!(
                "JSON state export is limited to L ≤ 12, got {}",
                self.l
            )));
        }
        #[derive(serde::Serialize)]
        struct File {
            #[serde(rename = "L")]
            l: usize,
            amplitudes: Vec<[f64; 2]>,
        }
        Ok(serde_json::to_string(&File {
            l: self.l,
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        })?)
    }
}

// --- Gray-code scans ---------------------------------------------------------

/// Per-chunk walker: configuration, effective angles, visible-bias sums.
struct GrayWalker<'a> {
    p: &'a RbmParams,
    bits: u64,
    thetas: Vec<Complex64>,
    a_re: f64,
    a_im: f64,
}

impl<'a> GrayWalker<'a> {
    fn start(p: &'a RbmParams, bits: u64) -> Self {
        let l = p.l();
        let spin = |j: usize| if (bits >> (j - 1)) & 1 == 1 { 1.0 } else { -1.0 };
        let mut thetas = Vec::with_capacity(p.nh());
        for k in 1..=p.nh() {
            let mut th = p.b()[k - 1];
            for (j0, &w) in p.w_col(k).iter().enumerate() {
                th += w * spin(j0 + 1);
            }
            thetas.push(th);
        }
        let mut a_re = 0.0;
        let mut a_im = 0.0;
        for j in 1..=l {
            a_re += p.a()[j - 1].re * spin(j);
            a_im += p.a()[j - 1].im * spin(j);
        }
        Self { p, bits, thetas, a_re, a_im }
    }

    /// Flip one 1-based site and update all caches in O(N_h).
    #[inline]
    fn flip(&mut self, j: usize) {
        self.bits ^= 1 << (j - 1);
        let s_new = if (self.bits >> (j - 1)) & 1 == 1 { 1.0 } else { -1.0 };
        let two_s = 2.0 * s_new;
        for (k0, th) in self.thetas.iter_mut().enumerate() {
            let w = self.p.w_col(k0 + 1)[j - 1];
            th.re += two_s * w.re;
            th.im += two_s * w.im;
        }
        self.a_re += two_s * self.p.a()[j - 1].re;
        self.a_im += two_s * self.p.a()[j - 1].im;
    }

    #[inline]
    fn log_mod(&self) -> f64 {
        let mut lm = self.a_re;
        for th in &self.thetas {
            let v = ln_abs_cosh(th.re, th.im);
            if v < LOG_ZERO_THRESHOLD {
                return f64::NEG_INFINITY;
            }
            lm += v;
        }
        lm
    }

    /// Real-parameter fast path: every cosh is real positive.
    #[inline]
    fn log_mod_real(&self) -> f64 {
        let mut lm = self.a_re;
        for th in &self.thetas {
            let au = th.re.abs();
            lm += if au < 20.0 {
                au.cosh().ln()
            } else {
                au - std::f64::consts::LN_2 + (-2.0 * au).exp().ln_1p()
            };
        }
        lm
    }

    #[inline]
    fn arg(&self) -> f64 {
        let mut arg = self.a_im;
        for th in &self.thetas {
            arg += arg_cosh(th.re, th.im);
        }
        arg
    }
}

fn all_params_real(p: &RbmParams) -> bool {
    p.a().iter().all(|z| z.im == 0.0)
        && p.b().iter().all(|z| z.im == 0.0)
        && (1..=p.nh()).all(|k| p.w_col(k).iter().all(|z| z.im == 0.0))
}

#[inline]
fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

fn chunk_size(dim: u64) -> u64 {
    let threads = rayon::current_num_threads() as u64;
    (dim / (8 * threads).max(1)).clamp(1 << 10, 1 << 16).min(dim)
}

/// Walk `gray(i)` for i in [start, end), calling `visit(bits, walker)` on
/// each configuration.
fn walk_range<F: FnMut(u64, &GrayWalker)>(p: &RbmParams, start: u64, end: u64, mut visit: F) {
    let mut w = GrayWalker::start(p, gray(start));
    visit(w.bits, &w);
    for i in start + 1..end {
        let j = i.trailing_zeros() as usize + 1;
        w.flip(j);
        debug_assert_eq!(w.bits, gray(i));
        visit(w.bits, &w);
    }
}

/// Build the full state vector from log-domain amplitudes, exponentiated
/// after subtracting the maximum log-modulus (the global scale is irrelevant
/// to every normalized quantity downstream).
pub fn build_state(p: &RbmParams) -> Result<StateVector> {
    let l = p.l();
    if l > MAX_STATE_SITES {
        return Err(Error::Capacity(format!(
            "build_state supports L ≤ {MAX_STATE_SITES}, got {l}"
        )));
    }
    let dim = 1u64 << l;
    let step = chunk_size(dim);
    let starts: Vec<u64> = (0..dim).step_by(step as usize).collect();

    let mut log_mod = vec![0.0f64; dim as usize];
    let mut arg = vec![0.0f64; dim as usize];
    // Disjoint output slices per chunk, indexed by bitmask. Collect per-chunk
    // writes into local buffers then scatter; bitmasks within a Gray chunk
    // are not contiguous, so scatter via raw indexing on separate passes.
    let results: Vec<Vec<(u64, f64, f64)>> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + step).min(dim);
            let mut out = Vec::with_capacity((e - s) as usize);
            walk_range(p, s, e, |bits, w| {
                let lm = w.log_mod();
                let ar = if lm == f64::NEG_INFINITY { 0.0 } else { w.arg() };
                out.push((bits, lm, ar));
            });
            out
        })
        .collect();
    for chunk in &results {
        for &(bits, lm, ar) in chunk {
            log_mod[bits as usize] = lm;
            arg[bits as usize] = ar;
        }
    }
    let max_lm = log_mod.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_lm == f64::NEG_INFINITY {
        return Err(Error::Numerical("all amplitudes vanish".into()));
    }
    let amps: Vec<Complex64> = log_mod
        .par_iter()
        .zip(arg.par_iter())
        .map(|(&lm, &ar)| {
            if lm == f64::NEG_INFINITY {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar((lm - max_lm).exp(), ar)
            }
        })
        .collect();
    StateVector::new(l, amps)
}

/// Build the state of a translation-invariant RBM.
pub fn build_state_ti(t: &TranslationInvariantRbm) -> Result<StateVector> {
    build_state(&t.expand())
}

/// Squared l₂ distance of the normalized states: 2 − 2 Re⟨ψ̃_a|ψ̃_b⟩.
pub fn error_l2(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.l != b.l {
        return Err(Error::Argument("states have different L".into()));
    }
    let na = a.norm_sq().sqrt();
    let nb = b.norm_sq().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    let overlap = a.inner(b).re / (na * nb);
    Ok((2.0 - 2.0 * overlap).max(0.0))
}

/// ⟨B̂⟩ under the normalized state.
pub fn expectation(state: &StateVector, b: &PauliString) -> Result<f64> {
    if b.len() != state.l {
        return Err(Error::Argument("Pauli string length mismatch".into()));
    }
    let z = state.norm_sq();
    if z == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, &amp) in state.amps.iter().enumerate() {
        let s = SpinConfig::new(idx as u32, state.l).expect("index in range");
        let (s2, phase) = apply_pauli(b, s)?;
        acc += state.amps[s2.bits() as usize].conj() * phase * amp;
    }
    Ok(acc.re / z)
}

/// |⟨B̂⟩_a − ⟨B̂⟩_b| with both states normalized.
pub fn error_expectation(a: &StateVector, b: &StateVector, bstr: &PauliString) -> Result<f64> {
    Ok((expectation(a, bstr)? - expectation(b, bstr)?).abs())
}

/// ⟨σ̂₁^z σ̂_{1+r}^z⟩ by direct diagonal summation.
pub fn corr_z(state: &StateVector, r: usize) -> Result<f64> {
    if 2 * r > state.l {
        return Err(Error::Argument(format!("r = {r} exceeds L/2 = {}", state.l / 2)));
    }
    let z = state.norm_sq();
    if z == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    let mut acc = 0.0;
    for (idx, amp) in state.amps.iter().enumerate() {
        let s1 = if idx & 1 == 1 { 1.0 } else { -1.0 };
        let s2 = if (idx >> r) & 1 == 1 { 1.0 } else { -1.0 };
        acc += s1 * s2 * amp.norm_sqr();
    }
    Ok(acc / z)
}

/// ⟨σ̂₁^z σ̂_{1+r}^z⟩ for several distances in one streaming sweep, without
/// materializing the state. This is what makes L = 22 correlation runs
/// affordable.
pub fn corr_z_stream(t: &TranslationInvariantRbm, rs: &[usize]) -> Result<Vec<f64>> {
    let l = t.l();
    if l > MAX_STREAM_SITES {
        return Err(Error::Capacity(format!(
            "streaming supports L ≤ {MAX_STREAM_SITES}, got {l}"
        )));
    }
    if let Some(&bad) = rs.iter().find(|&&r| 2 * r > l) {
        return Err(Error::Argument(format!("r = {bad} exceeds L/2 = {}", l / 2)));
    }
    let p = t.expand();
    let real = all_params_real(&p);
    let dim = 1u64 << l;
    let step = chunk_size(dim);
    let starts: Vec<u64> = (0..dim).step_by(step as usize).collect();

    // per-chunk: (local max log|ψ|², weight sum, numerator sums) with weights
    // scaled by exp(−local max); chunks merge under a global max afterwards
    struct Partial {
        max2: f64,
        z: f64,
        nums: Vec<f64>,
    }
    let partials: Vec<Partial> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + step).min(dim);
            let mut lms = Vec::with_capacity((e - s) as usize);
            let mut max2 = f64::NEG_INFINITY;
            walk_range(&p, s, e, |bits, w| {
                let lm2 = 2.0 * if real { w.log_mod_real() } else { w.log_mod() };
                if lm2 > max2 {
                    max2 = lm2;
                }
                lms.push((bits, lm2));
            });
            let mut z = 0.0;
            let mut nums = vec![0.0; rs.len()];
            for (bits, lm2) in lms {
                let wgt = (lm2 - max2).exp();
                z += wgt;
                let s1 = if bits & 1 == 1 { 1.0 } else { -1.0 };
                for (i, &r) in rs.iter().enumerate() {
                    let s2 = if (bits >> r) & 1 == 1 { 1.0 } else { -1.0 };
                    nums[i] += s1 * s2 * wgt;
                }
            }
            Partial { max2, z, nums }
        })
        .collect();

    let gmax = partials.iter().map(|p| p.max2).fold(f64::NEG_INFINITY, f64::max);
    if gmax == f64::NEG_INFINITY {
        return Err(Error::Numerical("all amplitudes vanish".into()));
    }
    let mut z = 0.0;
    let mut nums = vec![0.0; rs.len()];
    for part in &partials {
        let scale = (part.max2 - gmax).exp();
        z += part.z * scale;
        for (i, n) in part.nums.iter().enumerate() {
            nums[i] += n * scale;
        }
    }
    if z == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    Ok(nums.into_iter().map(|n| n / z).collect())
}

/// Leading-order unnormalized z-correlation in the small-parameter regime:
/// 2 (Re(W Wᵀ))_{1,1+r} + 4 Re(a₁) Re(a_{1+r}).
pub fn corr_z_leading(p: &RbmParams, r: usize) -> Result<f64> {
    if 2 * r > p.l() {
        return Err(Error::Argument(format!("r = {r} exceeds L/2 = {}", p.l() / 2)));
    }
    let mut wwt = Complex64::new(0.0, 0.0);
    for k in 1..=p.nh() {
        wwt += p.w(1, k) * p.w(1 + r, k);
    }
    Ok(2.0 * wwt.re + 4.0 * p.a()[0].re * p.a()[r].re)
}

/// Brute-force oracle for the unnormalized z-correlation: the coefficient of
/// σ₁σ_{1+r} in |ψ|², i.e. 2^{−L} Σ_σ σ₁σ_{1+r} |ψ(σ)|².
pub fn corr_z_unnorm(p: &RbmParams, r: usize) -> Result<f64> {
    let l = p.l();
    if l > MAX_STATE_SITES {
        return Err(Error::Capacity(format!("L ≤ {MAX_STATE_SITES} required, got {l}")));
    }
    if 2 * r > l {
        return Err(Error::Argument(format!("r = {r} exceeds L/2 = {}", l / 2)));
    }
    let dim = 1u64 << l;
    let mut acc = 0.0;
    walk_range(p, 0, dim, |bits, w| {
        let lm = w.log_mod();
        let s1 = if bits & 1 == 1 { 1.0 } else { -1.0 };
        let s2 = if (bits >> r) & 1 == 1 { 1.0 } else { -1.0 };
        if lm != f64::NEG_INFINITY {
            acc += s1 * s2 * (2.0 * lm).exp();
        }
    });
    Ok(acc / dim as f64)
}

/// The r-dependent structure sum Σ_{j_c=1}^{L} μ(|1−j_c|_circ) μ(|1+r−j_c|_circ).
pub fn gz_structure_sum<F: Fn(usize) -> f64>(mu: F, l: usize, r: usize) -> Result<f64> {
    if 2 * r > l {
        return Err(Error::Argument(format!("r = {r} exceeds L/2 = {}", l / 2)));
    }
    let mut acc = 0.0;
    for jc in 1..=l {
        let d1 = crate::spinspace::circ_distance(1, jc, l)?;
        let d2 = crate::spinspace::circ_distance(1 + r, jc, l)?;
        acc += mu(d1) * mu(d2);
    }
    Ok(acc)
}

/// |⟨s̃₁|s̃₂⟩|² ∈ [0, 1].
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.l != b.l {
        return Err(Error::Argument("states have different L".into()));
    }
    let na = a.norm_sq();
    let nb = b.norm_sq();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    Ok(a.inner(b).norm_sqr() / (na * nb))
}

/// Squared projection of s̃ onto the span of (orthonormalized) `basis`; the
/// right fidelity measure against a degenerate ground space.
pub fn subspace_fidelity(basis: &[StateVector], s: &StateVector) -> Result<f64> {
    let ns = s.norm_sq();
    if ns == 0.0 {
        return Err(Error::Numerical("cannot normalize a zero state".into()));
    }
    let mut acc = 0.0;
    for v in basis {
        let nv = v.norm_sq();
        if nv == 0.0 {
            return Err(Error::Numerical("zero basis vector".into()));
        }
        acc += v.inner(s).norm_sqr() / (nv * ns);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrfd::build_cluster_rbm;
    use crate::rbm::log_psi;
    use crate::spinspace::enumerate_basis;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_params(l: usize, nh: usize, scale: f64, seed: u64) -> RbmParams {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut z = |_: usize| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
        let a: Vec<_> = (0..l).map(&mut z).collect();
        let b: Vec<_> = (0..nh).map(&mut z).collect();
        let rows: Vec<Vec<_>> = (0..l).map(|_| (0..nh).map(&mut z).collect()).collect();
        RbmParams::new(a, b, &rows).unwrap()
    }

    #[test]
    fn build_state_matches_log_psi_pointwise() {
        let p = random_params(8, 16, 0.8, 3);
        let sv = build_state(&p).unwrap();
        // global scale: largest log-modulus maps to modulus 1
        let mut max_lm = f64::NEG_INFINITY;
        for s in enumerate_basis(8).unwrap() {
            max_lm = max_lm.max(log_psi(&p, &s).log_mod);
        }
        for s in enumerate_basis(8).unwrap() {
            let la = log_psi(&p, &s);
            let expect = Complex64::from_polar((la.log_mod - max_lm).exp(), la.arg);
            let got = sv.amp(&s);
            assert!((got - expect).norm() < 1e-11, "mask {}", s.bits());
        }
    }

    #[test]
    fn uniform_and_product_states() {
        let sv = build_state(&RbmParams::zeros(5, 0).unwrap()).unwrap();
        for a in sv.amps() {
            assert!((a - c(1.0, 0.0)).norm() < 1e-15);
        }
        // Nh = 0 with biases: ψ(σ) = ∏ e^{a_j σ_j}
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let a: Vec<Complex64> =
            (0..4).map(|_| c(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
        let p = RbmParams::new(a.clone(), vec![], &vec![vec![]; 4]).unwrap();
        let sv = build_state(&p).unwrap();
        let max_lm = enumerate_basis(4)
            .unwrap()
            .map(|s| (0..4).map(|j| a[j].re * s.spin(j + 1)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        for s in enumerate_basis(4).unwrap() {
            let z: Complex64 = (0..4).map(|j| a[j] * s.spin(j + 1)).sum();
            let expect = (z - max_lm).exp();
            assert!((sv.amp(&s) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn cluster_state_stabilizers_are_plus_one() {
        let l = 7;
        let sv = build_state(&build_cluster_rbm(l).unwrap()).unwrap();
        for j in 1..=l {
            let prev = if j == 1 { l } else { j - 1 };
            let next = if j == l { 1 } else { j + 1 };
            let mut labels = vec![0u8; l];
            labels[prev - 1] = 3;
            labels[j - 1] = 1;
            labels[next - 1] = 3;
            let stab = PauliString::new(labels).unwrap();
            let val = expectation(&sv, &stab).unwrap();
            assert!((val - 1.0).abs() < 1e-10, "stabilizer {j}: {val}");
        }
    }

    #[test]
    fn error_l2_limits() {
        let p = random_params(5, 10, 0.5, 9);
        let sv = build_state(&p).unwrap();
        assert!(error_l2(&sv, &sv).unwrap() < 1e-14);

        let mut e0 = vec![c(0.0, 0.0); 32];
        e0[0] = c(1.0, 0.0);
        let mut e1 = vec![c(0.0, 0.0); 32];
        e1[7] = c(0.7, 0.0);
        let a = StateVector::new(5, e0).unwrap();
        let b = StateVector::new(5, e1).unwrap();
        assert!((error_l2(&a, &b).unwrap() - 2.0).abs() < 1e-15);
        let zero = StateVector::new(5, vec![c(0.0, 0.0); 32]).unwrap();
        assert!(error_l2(&a, &zero).is_err());
    }

    #[test]
    fn expectation_examples() {
        let uniform = build_state(&RbmParams::zeros(4, 0).unwrap()).unwrap();
        let z1 = PauliString::single(4, 1, 3).unwrap();
        assert!(expectation(&uniform, &z1).unwrap().abs() < 1e-14);
        let x1 = PauliString::single(4, 1, 1).unwrap();
        assert!((expectation(&uniform, &x1).unwrap() - 1.0).abs() < 1e-14);
        let id = PauliString::identity(4);
        assert!((expectation(&uniform, &id).unwrap() - 1.0).abs() < 1e-15);
        // identity-string expectation error vanishes for any pair of states
        let p = random_params(4, 8, 0.6, 4);
        let sv = build_state(&p).unwrap();
        assert!(error_expectation(&sv, &uniform, &id).unwrap() < 1e-14);
        // Pauli expectations stay in [−1, 1]
        for label in 1..=3u8 {
            let b = PauliString::pair(4, 1, 3, label).unwrap();
            let v = expectation(&sv, &b).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn corr_z_two_code_paths_agree() {
        let p = random_params(8, 16, 0.5, 21);
        let sv = build_state(&p).unwrap();
        assert!((corr_z(&sv, 0).unwrap() - 1.0).abs() < 1e-14);
        for r in 0..=4 {
            let direct = corr_z(&sv, r).unwrap();
            let viapauli = if r == 0 {
                1.0
            } else {
                expectation(&sv, &PauliString::pair(8, 1, 1 + r, 3).unwrap()).unwrap()
            };
            assert!((direct - viapauli).abs() < 1e-12, "r={r}: {direct} vs {viapauli}");
        }
        assert!(corr_z(&sv, 5).is_err());
    }

    #[test]
    fn corr_z_stream_matches_dense_path() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let l = 10;
        let mut z = || c(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
        let filters: Vec<Vec<Complex64>> =
            (0..3).map(|_| (0..l).map(|_| z()).collect()).collect();
        let b_level: Vec<Complex64> = (0..3).map(|_| z()).collect();
        let t = TranslationInvariantRbm::new(l, c(0.02, 0.0), b_level, filters).unwrap();
        let sv = build_state_ti(&t).unwrap();
        let rs: Vec<usize> = (0..=l / 2).collect();
        let streamed = corr_z_stream(&t, &rs).unwrap();
        for (&r, &got) in rs.iter().zip(&streamed) {
            let dense = corr_z(&sv, r).unwrap();
            assert!((got - dense).abs() < 1e-11, "r={r}: {got} vs {dense}");
        }
    }

    #[test]
    fn corr_z_leading_examples() {
        // W = 0, a real → 4 Re(a₁) Re(a_{1+r})
        let l = 6;
        let a: Vec<Complex64> = (0..l).map(|j| c(0.01 * (j as f64 + 1.0), 0.0)).collect();
        let p = RbmParams::new(a.clone(), vec![], &vec![vec![]; l]).unwrap();
        for r in 0..=3 {
            let lead = corr_z_leading(&p, r).unwrap();
            assert!((lead - 4.0 * a[0].re * a[r].re).abs() < 1e-16);
        }
    }

    #[test]
    fn corr_z_leading_error_is_cubic() {
        // the deviation from the brute-force coefficient shrinks ≥ 6× when
        // the parameter scale is halved
        let l = 8;
        let r = 3;
        let mut errs = Vec::new();
        for (i, scale) in [1e-3, 5e-4].into_iter().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(77);
            let mut z =
                |_: usize| c(rng.random_range(-1.0..1.0) * scale, rng.random_range(-1.0..1.0) * scale);
            let a: Vec<_> = (0..l).map(&mut z).collect();
            let b: Vec<_> = (0..2 * l).map(&mut z).collect();
            let rows: Vec<Vec<_>> = (0..l).map(|_| (0..2 * l).map(&mut z).collect()).collect();
            let p = RbmParams::new(a, b, &rows).unwrap();
            let exact = corr_z_unnorm(&p, r).unwrap();
            let lead = corr_z_leading(&p, r).unwrap();
            errs.push((exact - lead).abs());
            let _ = i;
        }
        assert!(
            errs[0] / errs[1] >= 6.0,
            "cubic scaling violated: errors {errs:?} ratio {}",
            errs[0] / errs[1]
        );
    }

    #[test]
    fn gz_structure_examples() {
        // support only at r = 0: the only contribution is μ(0)² at j_c = 1
        let point = |r: usize| if r == 0 { 0.3 } else { 0.0 };
        assert!((gz_structure_sum(point, 8, 0).unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(gz_structure_sum(point, 8, 3).unwrap(), 0.0);

        // μ = δ_Q/r: the paper's first-summation estimate 2δ_Q² ln(r)/r is a
        // lower bound on the full circular sum (the full coefficient is ~4δ_Q²)
        let dq = 0.2;
        let mu = move |r: usize| if r == 0 { dq } else { dq / r as f64 };
        let l = 2_000_000usize;
        let r = l / 2;
        let g = gz_structure_sum(mu, l, r).unwrap();
        let first_sum_estimate = 2.0 * dq * dq * (r as f64).ln() / r as f64;
        assert!(g >= first_sum_estimate * 0.999, "{g} vs {first_sum_estimate}");
        // full circular sum carries roughly twice the one-sided coefficient
        assert!(g <= 4.5 * dq * dq * (r as f64).ln() / r as f64 + 2.0 * dq * mu(r));

        // μ = δ_Q r^{−1/2}: half-chain value stays ≥ 4δ_Q²(1 − 2/L)
        let mu_half = move |r: usize| if r == 0 { dq } else { dq / (r as f64).sqrt() };
        let l = 100_000usize;
        let g = gz_structure_sum(mu_half, l, l / 2).unwrap();
        assert!(g >= 4.0 * dq * dq * (1.0 - 2.0 / l as f64));
    }

    #[test]
    fn fidelity_limits() {
        let p = random_params(5, 10, 0.5, 13);
        let sv = build_state(&p).unwrap();
        assert!((fidelity(&sv, &sv).unwrap() - 1.0).abs() < 1e-13);
        let mut e0 = vec![c(0.0, 0.0); 32];
        e0[0] = c(1.0, 0.0);
        let mut e1 = vec![c(0.0, 0.0); 32];
        e1[3] = c(1.0, 0.0);
        let a = StateVector::new(5, e0).unwrap();
        let b = StateVector::new(5, e1).unwrap();
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn binary_roundtrip() {
        let p = random_params(6, 12, 0.7, 19);
        let sv = build_state(&p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        sv.write_binary(&path).unwrap();
        let back = StateVector::read_binary(&path).unwrap();
        assert_eq!(back.l(), 6);
        for (a, b) in sv.amps().iter().zip(back.amps()) {
            assert_eq!(a, b, "binary export must be bit-exact");
        }
        assert!(sv.to_json().unwrap().contains("\"amplitudes\""));
    }
}
