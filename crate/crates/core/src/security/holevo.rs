//! Numeric Holevo quantity for a Bell-diagonal collective attack.
//!
//! Eve's joint photon–ancilla states are built explicitly in the
//! 2 ⊗ 4 dimensional space, encoded with `M0` / `M1`, and their entropies
//! obtained by Hermitian eigendecomposition. The same entropy is also read
//! off the 4×4 Gram matrix of the encoded ensemble.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::photonics::{encoding_operator, EncodingLabel, PolarizationOperator};

const PHOTON_DIM: usize = 2;
const EVE_DIM: usize = 4;
const JOINT_DIM: usize = PHOTON_DIM * EVE_DIM;

/// Collective attack parameterized by the Bell-diagonal weights and phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalAttack {
    lambdas: [f64; 4],
    chi: f64,
    chi_prime: f64,
}

impl BellDiagonalAttack {
    pub fn new(lambdas: [f64; 4], chi: f64, chi_prime: f64) -> Result<Self> {
        if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(invalid("lambdas", format!("{lambdas:?} has a negative entry")));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("lambdas", format!("sum is {total}, expected 1")));
        }
        if !chi.is_finite() || !chi_prime.is_finite() {
            return Err(invalid("chi", "phases must be finite"));
        }
        Ok(Self { lambdas, chi, chi_prime })
    }

    pub fn lambdas(&self) -> [f64; 4] {
        self.lambdas
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn chi_prime(&self) -> f64 {
        self.chi_prime
    }

    /// `C = 2[(λ₁-λ₂)² + (λ₃-λ₄)²]`.
    pub fn c_value(&self) -> f64 {
        let [l1, l2, l3, l4] = self.lambdas;
        2.0 * ((l1 - l2).powi(2) + (l3 - l4).powi(2))
    }

    /// The two purified photon–ancilla branches `|φ₁⟩, |φ₂⟩` before encoding.
    pub fn branches(&self) -> [DVector<Complex64>; 2] {
        let s = self.lambdas.map(f64::sqrt);
        let ph = |angle: f64| Complex64::from_polar(1.0, angle);
        let (chi, chip) = (self.chi, self.chi_prime);

        let mut phi1 = DVector::zeros(JOINT_DIM);
        phi1[idx(0, 0)] = ph(chi) * s[0];
        phi1[idx(0, 1)] = ph(chi) * s[1];
        phi1[idx(1, 2)] = ph(-chip) * s[2];
        phi1[idx(1, 3)] = -ph(-chip) * s[3];

        let mut phi2 = DVector::zeros(JOINT_DIM);
        phi2[idx(0, 2)] = ph(chip) * s[2];
        phi2[idx(0, 3)] = ph(chip) * s[3];
        phi2[idx(1, 0)] = ph(-chi) * s[0];
        phi2[idx(1, 1)] = -ph(-chi) * s[1];

        [phi1, phi2]
    }
}

fn idx(photon: usize, eve: usize) -> usize {
    photon * EVE_DIM + eve
}

/// Applies a photon operator to the first tensor factor.
fn encode(op: &PolarizationOperator, state: &DVector<Complex64>) -> DVector<Complex64> {
    let mut out = DVector::zeros(JOINT_DIM);
    for a in 0..PHOTON_DIM {
        for b in 0..PHOTON_DIM {
            let c = op.0[(a, b)];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..EVE_DIM {
                out[idx(a, k)] += c * state[idx(b, k)];
            }
        }
    }
    out
}

/// Equal mixture of pure states.
fn mixture(states: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let w = Complex64::new(1.0 / states.len() as f64, 0.0);
    let dim = states[0].len();
    let mut rho = DMatrix::zeros(dim, dim);
    for s in states {
        rho += s * s.adjoint() * w;
    }
    rho
}

/// Entropy in bits of a spectrum; tiny negative round-off is dropped.
pub fn spectrum_entropy(eigenvalues: impl IntoIterator<Item = f64>) -> f64 {
    eigenvalues
        .into_iter()
        .filter(|&l| l > 1e-300)
        .map(|l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy `-Tr ρ log₂ ρ` of a Hermitian density matrix.
pub fn von_neumann_entropy(rho: &DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    spectrum_entropy(eig.eigenvalues.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolevoReport {
    /// `S(ρ^{AE}) - ½S(ρ_{AE,0}) - ½S(ρ_{AE,1})`.
    pub holevo: f64,
    pub s_joint: f64,
    pub s_zero: f64,
    pub s_one: f64,
    /// `S(ρ^{AE})` from the Gram matrix of the four encoded branches.
    pub s_joint_gram: f64,
}

impl HolevoReport {
    pub fn route_gap(&self) -> f64 {
        (self.s_joint - self.s_joint_gram).abs()
    }
}

/// Gram matrix `G_ij = √(p_i p_j)⟨ψ_i|ψ_j⟩` of an equiprobable ensemble.
pub fn gram_matrix(states: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let n = states.len();
    let p = 1.0 / n as f64;
    DMatrix::from_fn(n, n, |i, j| states[i].dotc(&states[j]) * p)
}

pub fn holevo_oracle(attack: &BellDiagonalAttack) -> Result<HolevoReport> {
    let [phi1, phi2] = attack.branches();
    let m0 = encoding_operator(EncodingLabel::M0);
    let m1 = encoding_operator(EncodingLabel::M1);
    let zero = [encode(&m0, &phi1), encode(&m0, &phi2)];
    let one = [encode(&m1, &phi1), encode(&m1, &phi2)];

    let rho_zero = mixture(&zero);
    let rho_one = mixture(&one);
    let rho_joint = (&rho_zero + &rho_one) * Complex64::new(0.5, 0.0);

    let s_zero = von_neumann_entropy(&rho_zero);
    let s_one = von_neumann_entropy(&rho_one);
    let s_joint = von_neumann_entropy(&rho_joint);

    let ensemble = [zero[0].clone(), zero[1].clone(), one[0].clone(), one[1].clone()];
    let s_joint_gram = von_neumann_entropy(&gram_matrix(&ensemble));

    let report = HolevoReport {
        holevo: s_joint - 0.5 * s_zero - 0.5 * s_one,
        s_joint,
        s_zero,
        s_one,
        s_joint_gram,
    };
    debug_assert!(report.route_gap() <= 1e-10, "gap {}", report.route_gap());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::security::{eve_info_bound, h};

    fn attack(l: [f64; 4], chi: f64, chip: f64) -> BellDiagonalAttack {
        BellDiagonalAttack::new(l, chi, chip).unwrap()
    }

    #[test]
    fn pure_phi_plus_leaks_nothing() {
        for chi in [0.0, 0.3, 1.7] {
            let r = holevo_oracle(&attack([1.0, 0.0, 0.0, 0.0], chi, 0.2)).unwrap();
            assert!(r.holevo.abs() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn closed_form_regime_example() {
        let a = attack([0.7, 0.3, 0.0, 0.0], 0.4, 0.0);
        assert!((a.c_value() - 0.32).abs() < 1e-15);
        let r = holevo_oracle(&a).unwrap();
        assert!((r.holevo - h(0.7)).abs() < 1e-10);
        assert!((r.holevo - 0.881290899230693).abs() < 1e-10);
        assert!((r.holevo - eve_info_bound(0.32).unwrap().value).abs() < 1e-10);
    }

    #[test]
    fn closed_form_fails_outside_regime() {
        let a = attack([0.5, 0.0, 0.5, 0.0], 0.0, 0.0);
        assert!((a.c_value() - 1.0).abs() < 1e-15);
        let r = holevo_oracle(&a).unwrap();
        assert!((r.holevo - 1.0).abs() < 1e-10);
        assert!(r.holevo > eve_info_bound(1.0).unwrap().value + 0.3);
    }

    #[test]
    fn branch_entropies_are_one_bit() {
        let r = holevo_oracle(&attack([0.4, 0.1, 0.3, 0.2], 0.9, -0.4)).unwrap();
        assert!((r.s_zero - 1.0).abs() < 1e-10);
        assert!((r.s_one - 1.0).abs() < 1e-10);
        assert!(r.route_gap() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_weights() {
        assert!(BellDiagonalAttack::new([0.5, 0.5, 0.1, 0.0], 0.0, 0.0).is_err());
        assert!(BellDiagonalAttack::new([1.2, -0.2, 0.0, 0.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn branches_are_normalized() {
        let a = attack([0.1, 0.2, 0.3, 0.4], 0.5, 1.1);
        for b in a.branches() {
            assert!((b.norm() - 1.0).abs() < 1e-14);
        }
    }
}
