//! Signed Pauli strings in symplectic form.
//!
//! A string over `n` qubits is stored as a pair of bit masks plus a phase:
//!
//! ```text
//!   P = i^phase · ⊗_q σ_q,   σ_q = I, X, Y, Z  for (x_q, z_q) = 00, 10, 11, 01
//! ```
//!
//! Multiplication XORs the masks and accumulates the phase from single-qubit
//! Pauli products; commutation is the parity of the symplectic form
//! `|x_a ∧ z_b| + |z_a ∧ x_b|`. Masks are machine words, so `n ≤ 64`.

use std::fmt;

use crate::error::CoreError;

/// Added power of i for the product σ_a·σ_b, indexed by
/// `a_x<<3 | a_z<<2 | b_x<<1 | b_z`.
const PHASE_TABLE: [u8; 16] = [0, 0, 0, 0, 0, 0, 1, 3, 0, 3, 0, 1, 0, 1, 3, 0];

/// A Pauli string with an explicit phase in {+1, +i, −1, −i}.
///
/// Values are immutable after construction and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    /// Power of i, modulo 4.
    phase_exp: u8,
}

impl SignedPauliString {
    /// The identity string with phase +1.
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= 64, "masks are 64-bit words");
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
            phase_exp: 0,
        }
    }

    /// Build from raw symplectic masks with phase +1.
    pub fn from_masks(n_qubits: usize, x_mask: u64, z_mask: u64) -> Self {
        assert!(n_qubits <= 64);
        let live = mask_bits(n_qubits);
        assert!(
            x_mask & !live == 0 && z_mask & !live == 0,
            "mask bits outside qubit range"
        );
        Self {
            n_qubits,
            x_mask,
            z_mask,
            phase_exp: 0,
        }
    }

    /// A single X on `qubit`.
    pub fn x(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 1 << qubit, 0)
    }

    /// A single Y on `qubit`.
    pub fn y(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 1 << qubit, 1 << qubit)
    }

    /// A single Z on `qubit`.
    pub fn z(n_qubits: usize, qubit: usize) -> Self {
        Self::from_masks(n_qubits, 0, 1 << qubit)
    }

    /// Parse a letter string such as `"XZIY"` (qubit 0 leftmost), phase +1.
    pub fn from_label(label: &str) -> Result<Self, CoreError> {
        let n = label.len();
        if n > 64 {
            return Err(CoreError::invalid("label", "more than 64 qubits"));
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, c) in label.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => {
                    return Err(CoreError::invalid("label", format!("bad letter {other:?}")));
                }
            }
        }
        Ok(Self {
            n_qubits: n,
            x_mask: x,
            z_mask: z,
            phase_exp: 0,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    /// Power of i in the phase, modulo 4.
    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    /// Replace the phase exponent (power of i, taken modulo 4).
    pub fn with_phase_exp(mut self, exp: u8) -> Self {
        self.phase_exp = exp & 3;
        self
    }

    /// Multiply the phase by i^exp.
    pub fn mul_phase_exp(mut self, exp: u8) -> Self {
        self.phase_exp = (self.phase_exp + exp) & 3;
        self
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// True iff the phase is ±1, so the operator is self-adjoint.
    pub fn is_hermitian(&self) -> bool {
        self.phase_exp % 2 == 0
    }

    /// The real sign for a Hermitian string (+1 or −1).
    ///
    /// Returns an error when the phase is ±i.
    pub fn hermitian_sign(&self) -> Result<f64, CoreError> {
        match self.phase_exp {
            0 => Ok(1.0),
            2 => Ok(-1.0),
            _ => Err(CoreError::NonHermitian),
        }
    }

    /// Split into (sign, unsigned string): phase folded out, requires
    /// Hermitian input.
    pub fn fold_sign(&self) -> Result<(f64, SignedPauliString), CoreError> {
        let sign = self.hermitian_sign()?;
        Ok((sign, self.with_phase_exp(0)))
    }

    /// Number of Y sites; the matrix elements of the string carry an i per Y.
    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Product `self · other` with the exact accumulated phase.
    pub fn multiply(&self, other: &SignedPauliString) -> Result<SignedPauliString, CoreError> {
        if self.n_qubits != other.n_qubits {
            return Err(CoreError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let mut exp = u32::from(self.phase_exp) + u32::from(other.phase_exp);
        // Only sites where both operands are non-identity can add phase.
        let mut both = (self.x_mask | self.z_mask) & (other.x_mask | other.z_mask);
        while both != 0 {
            let q = both.trailing_zeros();
            let bit = 1u64 << q;
            let idx = (usize::from(self.x_mask & bit != 0) << 3)
                | (usize::from(self.z_mask & bit != 0) << 2)
                | (usize::from(other.x_mask & bit != 0) << 1)
                | usize::from(other.z_mask & bit != 0);
            exp += u32::from(PHASE_TABLE[idx]);
            both &= both - 1;
        }
        Ok(SignedPauliString {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase_exp: (exp % 4) as u8,
        })
    }

    /// True iff the two strings commute as operators.
    pub fn commutes(&self, other: &SignedPauliString) -> Result<bool, CoreError> {
        if self.n_qubits != other.n_qubits {
            return Err(CoreError::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let anti = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        Ok(anti % 2 == 0)
    }

    /// The letter at `qubit`.
    pub fn site(&self, qubit: usize) -> char {
        let x = self.x_mask >> qubit & 1 != 0;
        let z = self.z_mask >> qubit & 1 != 0;
        match (x, z) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }
}

fn mask_bits(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl fmt::Display for SignedPauliString {
    /// Renders e.g. `+i XZIY` with qubit 0 leftmost.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self.phase_exp {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{token} ")?;
        for q in 0..self.n_qubits {
            write!(f, "{}", self.site(q))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{mat_allclose, mat_mul, mat_of_string, scale};

    #[test]
    fn multiply_is_involutive_on_x() {
        let x0 = SignedPauliString::x(1, 0);
        let prod = x0.multiply(&x0).unwrap();
        assert!(prod.is_identity());
        assert_eq!(prod.phase_exp(), 0);
    }

    #[test]
    fn multiply_x_by_z_gives_minus_i_y() {
        // Frozen from the 2x2 matrix product: X·Z = [[0,-1],[1,0]] = -i·Y.
        let x0 = SignedPauliString::x(1, 0);
        let z0 = SignedPauliString::z(1, 0);
        let prod = x0.multiply(&z0).unwrap();
        assert_eq!(prod.site(0), 'Y');
        assert_eq!(prod.phase_exp(), 3);
        let oracle = mat_mul(&mat_of_string(&x0), &mat_of_string(&z0));
        assert!(mat_allclose(&oracle, &mat_of_string(&prod), 1e-14));
    }

    #[test]
    fn multiply_two_qubit_example() {
        // (Z₁X₀)·(Z₀): the 4x4 matrix oracle gives -i·Z₁Y₀ (the qubit-0
        // factor is exactly the X·Z = -i·Y case above).
        let a = SignedPauliString::from_label("XZ").unwrap();
        let b = SignedPauliString::from_label("ZI").unwrap();
        let prod = a.multiply(&b).unwrap();
        assert_eq!(prod.site(0), 'Y');
        assert_eq!(prod.site(1), 'Z');
        assert_eq!(prod.phase_exp(), 3);
        let oracle = mat_mul(&mat_of_string(&a), &mat_of_string(&b));
        assert!(mat_allclose(&oracle, &mat_of_string(&prod), 1e-14));
    }

    #[test]
    fn multiply_rejects_mismatched_sizes() {
        let a = SignedPauliString::x(1, 0);
        let b = SignedPauliString::x(2, 0);
        assert!(matches!(
            a.multiply(&b),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutes_trivial_and_derived_cases() {
        let x0 = SignedPauliString::x(1, 0);
        let z0 = SignedPauliString::z(1, 0);
        assert!(x0.commutes(&x0).unwrap());
        assert!(!x0.commutes(&z0).unwrap());
        let xx = SignedPauliString::from_label("XX").unwrap();
        let zz = SignedPauliString::from_label("ZZ").unwrap();
        assert!(xx.commutes(&zz).unwrap());
        assert!(matches!(
            x0.commutes(&xx),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutes_matches_matrix_commutator_on_all_two_qubit_pairs() {
        let labels = ['I', 'X', 'Y', 'Z'];
        let mut strings = Vec::new();
        for &a in &labels {
            for &b in &labels {
                strings.push(SignedPauliString::from_label(&format!("{a}{b}")).unwrap());
            }
        }
        for s in &strings {
            for t in &strings {
                let ab = mat_mul(&mat_of_string(s), &mat_of_string(t));
                let ba = mat_mul(&mat_of_string(t), &mat_of_string(s));
                let commute_matrix = mat_allclose(&ab, &ba, 1e-14);
                assert_eq!(
                    s.commutes(t).unwrap(),
                    commute_matrix,
                    "disagreement for {s} vs {t}"
                );
            }
        }
    }

    #[test]
    fn multiply_associative_on_sampled_triples() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(11, crate::rng::Channel::Scratch, 0);
        for _ in 0..500 {
            let n = 5;
            let live = (1u64 << n) - 1;
            let mk = |rng: &mut rand_chacha::ChaCha12Rng| {
                SignedPauliString::from_masks(
                    n,
                    rng.random::<u64>() & live,
                    rng.random::<u64>() & live,
                )
                .with_phase_exp(rng.random_range(0..4) as u8)
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let c = mk(&mut rng);
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn square_of_any_string_is_identity_with_squared_phase() {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(12, crate::rng::Channel::Scratch, 0);
        for _ in 0..200 {
            let n = 6;
            let live = (1u64 << n) - 1;
            let a = SignedPauliString::from_masks(
                n,
                rng.random::<u64>() & live,
                rng.random::<u64>() & live,
            )
            .with_phase_exp(rng.random_range(0..4) as u8);
            let sq = a.multiply(&a).unwrap();
            assert!(sq.is_identity());
            // σ² = I per site and the cross terms cancel pairwise, so the
            // only surviving phase is the explicit one squared.
            let expected = mat_mul(&mat_of_string(&a), &mat_of_string(&a));
            assert!(mat_allclose(&expected, &mat_of_string(&sq), 1e-12));
            let _ = scale; // silences unused import on some cfgs
        }
    }

    #[test]
    fn renders_with_phase_token_and_qubit_zero_leftmost() {
        let s = SignedPauliString::from_label("XZIY").unwrap().with_phase_exp(1);
        assert_eq!(s.to_string(), "+i XZIY");
        assert_eq!(SignedPauliString::identity(3).to_string(), "+ III");
        assert_eq!(
            SignedPauliString::z(2, 1).with_phase_exp(2).to_string(),
            "- IZ"
        );
    }

    #[test]
    fn weight_and_hermiticity() {
        let s = SignedPauliString::from_label("XYIZ").unwrap();
        assert_eq!(s.weight(), 3);
        assert!(s.is_hermitian());
        assert!(!s.with_phase_exp(1).is_hermitian());
        assert_eq!(s.with_phase_exp(2).hermitian_sign().unwrap(), -1.0);
        assert!(s.with_phase_exp(3).hermitian_sign().is_err());
    }
}
