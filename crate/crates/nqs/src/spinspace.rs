//! Basis states of an L-site spin-1/2 chain and Pauli-string actions.
//!
//! A configuration σ⃗ = (σ₁, …, σ_L) with σ_j = ±1 is packed into a bitmask:
//! bit j−1 set means σ_j = +1. Site indices are 1-based throughout the public
//! API; the chain is periodic.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Hard cap on chain length for anything that enumerates the 2^L basis.
pub const MAX_SITES: usize = 30;

/// One basis state of L spins, bit-packed.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    bits: u32,
    len: u8,
}

impl std::fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SpinConfig(")?;
        for j in 1..=self.len() {
            write!(f, "{}", if self.spin(j) > 0.0 { '+' } else { '-' })?;
        }
        write!(f, ")")
    }
}

impl SpinConfig {
    pub fn new(bits: u32, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::Argument(format!(
                "site count must be in 1..={MAX_SITES}, got {len}"
            )));
        }
        if len < 32 && bits >= (1 << len) {
            return Err(Error::Argument(format!(
                "bitmask {bits:#x} out of range for L={len}"
            )));
        }
        Ok(Self { bits, len: len as u8 })
    }

    /// All spins down (σ_j = −1).
    pub fn all_down(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    /// All spins up (σ_j = +1).
    pub fn all_up(len: usize) -> Result<Self> {
        Self::new(((1u64 << len) - 1) as u32, len)
    }

    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << i,
                -1 => {}
                _ => return Err(Error::Argument(format!("spin must be ±1, got {s}"))),
            }
        }
        Self::new(bits, spins.len())
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// σ_j as ±1.0; `j` is 1-based.
    #[inline]
    pub fn spin(&self, j: usize) -> f64 {
        debug_assert!(j >= 1 && j <= self.len());
        if (self.bits >> (j - 1)) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Config with spin j flipped; `j` is 1-based.
    #[inline]
    pub fn flipped(&self, j: usize) -> Self {
        debug_assert!(j >= 1 && j <= self.len());
        Self { bits: self.bits ^ (1 << (j - 1)), len: self.len }
    }

    /// Cyclic shift: the returned config has σ'_{j+by} = σ_j (indices mod L).
    pub fn shifted(&self, by: usize) -> Self {
        let l = self.len();
        let by = by % l;
        let mask = ((1u64 << l) - 1) as u32;
        let bits = ((self.bits << by) | (self.bits >> (l - by).min(31))) & mask;
        let bits = if by == 0 { self.bits } else { bits };
        Self { bits, len: self.len }
    }

    /// Σ_j σ_j.
    pub fn magnetization(&self) -> i32 {
        2 * self.bits.count_ones() as i32 - self.len() as i32
    }
}

/// Circular distance min(m, L−m) with m = |j − jc|, for 1-based sites.
pub fn circ_distance(j: usize, jc: usize, l: usize) -> Result<usize> {
    if j < 1 || j > l || jc < 1 || jc > l {
        return Err(Error::Argument(format!(
            "site indices must be in 1..={l}, got ({j}, {jc})"
        )));
    }
    let m = j.abs_diff(jc);
    Ok(m.min(l - m))
}

/// Iterate over all 2^L basis states in ascending bitmask order.
pub fn enumerate_basis(l: usize) -> Result<impl Iterator<Item = SpinConfig>> {
    if l == 0 || l > MAX_SITES {
        return Err(Error::Capacity(format!(
            "basis enumeration supports 1..={MAX_SITES} sites, got {l}"
        )));
    }
    let len = l as u8;
    Ok((0u64..(1u64 << l)).map(move |bits| SpinConfig { bits: bits as u32, len }))
}

/// Tensor product of single-site Paulis, B̂ = ⊗_j σ̂_j^(m_j), with labels
/// 0 = identity, 1 = x, 2 = y, 3 = z.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    labels: Vec<u8>,
}

impl PauliString {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Argument("Pauli string must have ≥ 1 site".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&m| m > 3) {
            return Err(Error::Argument(format!("Pauli label must be 0..=3, got {bad}")));
        }
        Ok(Self { labels })
    }

    pub fn identity(l: usize) -> Self {
        Self { labels: vec![0; l] }
    }

    /// Single-site operator at 1-based site `j`; `label` in 1..=3 for x/y/z.
    pub fn single(l: usize, j: usize, label: u8) -> Result<Self> {
        let mut labels = vec![0u8; l];
        if j < 1 || j > l {
            return Err(Error::Argument(format!("site {j} out of 1..={l}")));
        }
        labels[j - 1] = label;
        Self::new(labels)
    }

    /// Two-site product σ̂_i^(label) σ̂_j^(label), 1-based sites.
    pub fn pair(l: usize, i: usize, j: usize, label: u8) -> Result<Self> {
        if i < 1 || i > l || j < 1 || j > l || i == j {
            return Err(Error::Argument(format!("bad site pair ({i}, {j}) for L={l}")));
        }
        let mut labels = vec![0u8; l];
        labels[i - 1] = label;
        labels[j - 1] = label;
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// Apply B̂ to a basis state: returns the unique s′ with ⟨s′|B̂|s⟩ ≠ 0 and
/// that matrix element (modulus 1).
///
/// Conventions in the σ^z eigenbasis with |+1⟩ the +1 eigenvector:
/// x flips with phase 1; y flips with ⟨−1|σ̂^y|+1⟩ = i and ⟨+1|σ̂^y|−1⟩ = −i;
/// z leaves the state with phase σ_j; identity contributes phase 1.
pub fn apply_pauli(b: &PauliString, s: SpinConfig) -> Result<(SpinConfig, Complex64)> {
    if b.len() != s.len() {
        return Err(Error::Argument(format!(
            "Pauli string length {} does not match config length {}",
            b.len(),
            s.len()
        )));
    }
    let mut out = s;
    let mut phase = Complex64::new(1.0, 0.0);
    for (idx, &m) in b.labels.iter().enumerate() {
        let j = idx + 1;
        match m {
            0 => {}
            1 => out = out.flipped(j),
            2 => {
                // element is i when σ_j = +1 (flips to −1), −i when σ_j = −1
                phase *= Complex64::new(0.0, s.spin(j));
                out = out.flipped(j);
            }
            3 => phase *= Complex64::new(s.spin(j), 0.0),
            _ => unreachable!(),
        }
    }
    Ok((out, phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn circ_distance_examples() {
        assert_eq!(circ_distance(1, 1, 11).unwrap(), 0);
        assert_eq!(circ_distance(1, 11, 11).unwrap(), 1);
        assert_eq!(circ_distance(3, 9, 11).unwrap(), 5);
        assert!(circ_distance(0, 1, 11).is_err());
        assert!(circ_distance(1, 12, 11).is_err());
    }

    #[test]
    fn apply_pauli_examples() {
        let s = SpinConfig::from_spins(&[1, -1]).unwrap();
        let (out, ph) = apply_pauli(&PauliString::identity(2), s).unwrap();
        assert_eq!(out, s);
        assert_eq!(ph, Complex64::new(1.0, 0.0));

        // z eigenvalue on σ_1 = −1
        let s = SpinConfig::from_spins(&[-1, 1]).unwrap();
        let (out, ph) = apply_pauli(&PauliString::single(2, 1, 3).unwrap(), s).unwrap();
        assert_eq!(out, s);
        assert_eq!(ph, Complex64::new(-1.0, 0.0));

        // σ_1^x σ_2^x on (+1,+1) → (−1,−1) with element 1
        let s = SpinConfig::from_spins(&[1, 1]).unwrap();
        let (out, ph) = apply_pauli(&PauliString::pair(2, 1, 2, 1).unwrap(), s).unwrap();
        assert_eq!(out, SpinConfig::from_spins(&[-1, -1]).unwrap());
        assert_eq!(ph, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn y_convention() {
        // ⟨−1|σ^y|+1⟩ = i
        let s = SpinConfig::from_spins(&[1]).unwrap();
        let (out, ph) = apply_pauli(&PauliString::single(1, 1, 2).unwrap(), s).unwrap();
        assert_eq!(out, SpinConfig::from_spins(&[-1]).unwrap());
        assert!((ph - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        // ⟨+1|σ^y|−1⟩ = −i
        let (out2, ph2) = apply_pauli(&PauliString::single(1, 1, 2).unwrap(), out).unwrap();
        assert_eq!(out2, s);
        assert!((ph2 - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn enumerate_basis_counts() {
        assert_eq!(enumerate_basis(1).unwrap().count(), 2);
        assert_eq!(enumerate_basis(3).unwrap().count(), 8);
        assert_eq!(enumerate_basis(11).unwrap().count(), 2048);
        assert!(enumerate_basis(31).is_err());
        let v: Vec<u32> = enumerate_basis(3).unwrap().map(|s| s.bits()).collect();
        assert_eq!(v, (0..8).collect::<Vec<u32>>());
    }

    #[test]
    fn shift_roundtrip() {
        let s = SpinConfig::from_spins(&[1, -1, -1, 1, 1]).unwrap();
        let t = s.shifted(2);
        for j in 1..=5 {
            let src = ((j + 5 - 1 - 2) % 5) + 1; // σ'_{j} = σ_{j-2}
            assert_eq!(t.spin(j), s.spin(src));
        }
        assert_eq!(s.shifted(5), s);
    }

    proptest! {
        // B̂² = 1 for any Pauli string: applying twice returns the original
        // config and the two phases multiply to 1.
        #[test]
        fn pauli_involution(labels in proptest::collection::vec(0u8..4, 1..12), bits in any::<u32>()) {
            let l = labels.len();
            let b = PauliString::new(labels).unwrap();
            let s = SpinConfig::new(bits & ((1 << l) - 1), l).unwrap();
            let (s1, p1) = apply_pauli(&b, s).unwrap();
            let (s2, p2) = apply_pauli(&b, s1).unwrap();
            prop_assert_eq!(s2, s);
            prop_assert!((p1 * p2 - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }

        #[test]
        fn circ_distance_symmetric(j in 1usize..=15, jc in 1usize..=15) {
            let l = 15;
            let d1 = circ_distance(j, jc, l).unwrap();
            let d2 = circ_distance(jc, j, l).unwrap();
            prop_assert_eq!(d1, d2);
            prop_assert!(d1 <= (l - 1) / 2); // L odd
        }
    }
}
