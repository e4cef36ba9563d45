//! Security invariants, Eve's information bounds and the secrecy message
//! capacity.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, invalid, Result};
use crate::photonics::poisson_unchecked;

pub mod holevo;

pub use holevo::{holevo_oracle, BellDiagonalAttack, HolevoReport};

/// Binary Shannon entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(h(x))
}

/// Unchecked entropy for callers whose argument is a probability by construction.
pub(crate) fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let nats = -x * x.ln() - (1.0 - x) * (-x).ln_1p();
    nats / std::f64::consts::LN_2
}

/// `C = Σ (1 - 2e)²` over the four transverse pairs.
pub fn c_from_errors(e_xx: f64, e_xy: f64, e_yx: f64, e_yy: f64) -> f64 {
    [e_xx, e_xy, e_yx, e_yy]
        .iter()
        .map(|e| (1.0 - 2.0 * e).powi(2))
        .sum()
}

/// `Q = (1 - ⟨Z_A Z_B⟩)/2`, which is the ZZ error rate itself.
pub fn q_from_error(e_zz: f64) -> f64 {
    let correlator = 1.0 - 2.0 * e_zz;
    (1.0 - correlator) / 2.0
}

/// Largest excursion of C outside `[0, 2]` that is clamped instead of rejected.
pub const C_CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveBound {
    pub value: f64,
    /// C was marginally outside `[0, 2]` and was clamped.
    pub clamped: bool,
}

/// Upper bound on Eve's single-photon information, `h((1 + √(C/2))/2)`.
pub fn eve_info_bound(c: f64) -> Result<EveBound> {
    if !c.is_finite() || !(-C_CLAMP_SLACK..=2.0 + C_CLAMP_SLACK).contains(&c) {
        return Err(invalid("c", format!("{c} is outside [0, 2]")));
    }
    let clamped = !(0.0..=2.0).contains(&c);
    Ok(EveBound {
        value: eve_bound_unchecked(c),
        clamped,
    })
}

fn eve_bound_unchecked(c: f64) -> f64 {
    let c = c.clamp(0.0, 2.0);
    h((1.0 + (c / 2.0).sqrt()) / 2.0)
}

/// Aligned-frame single-photon bound `h(e_X + e_Z)`.
pub fn aligned_eve_bound(e_x: f64, e_z: f64) -> Result<f64> {
    let s = e_x + e_z;
    if !(e_x >= 0.0 && e_z >= 0.0 && s <= 1.0) {
        return Err(invalid("e_x + e_z", format!("{s} is outside [0, 1]")));
    }
    Ok(h(s))
}

/// The β-independent invariants and the single-photon leak they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityEstimate {
    pub c_value: f64,
    pub q_value: f64,
    pub eve_single: f64,
}

impl SecurityEstimate {
    pub fn new(c_value: f64, q_value: f64) -> Result<Self> {
        let bound = eve_info_bound(c_value)?;
        check_unit("q_value", q_value)?;
        Ok(Self {
            c_value: c_value.clamp(0.0, 2.0),
            q_value,
            eve_single: bound.value,
        })
    }
}

/// Eve's single- and multi-photon gains on the encoded photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EveGains {
    pub single: f64,
    pub multi: f64,
    /// The multi-photon gain came out negative and was clamped to zero.
    pub multi_clamped: bool,
}

pub fn eve_gains(mu: f64, y1_lower: f64, y0: f64, q_ba_signal: f64) -> Result<EveGains> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(invalid("mu", format!("{mu} must be finite and >= 0")));
    }
    check_unit("q_ba_signal", q_ba_signal)?;
    check_unit("y0", y0)?;
    check_unit("y1_lower", y1_lower)?;
    if y1_lower < y0 {
        return Err(invalid(
            "y1_lower",
            format!("single-photon yield {y1_lower} is below vacuum yield {y0}"),
        ));
    }
    let single = poisson_unchecked(mu, 1) * (y1_lower - y0);
    let multi = q_ba_signal - y0 - single;
    Ok(EveGains {
        single,
        multi: multi.max(0.0),
        multi_clamped: multi < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityInputs {
    pub q_bab: f64,
    pub e_bab: f64,
    pub q_n1_bae: f64,
    pub q_n2_bae: f64,
    pub c_lower: f64,
}

/// Secrecy message capacity in bit per pulse. Negative values are returned
/// as-is.
pub fn secrecy_capacity(inputs: &CapacityInputs) -> f64 {
    let bob = inputs.q_bab * (1.0 - h(inputs.e_bab));
    let eve = inputs.q_n1_bae * eve_bound_unchecked(inputs.c_lower) + inputs.q_n2_bae;
    bob - eve
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // -0.02 log2 0.02 - 0.98 log2 0.98
        assert!((binary_entropy(0.02).unwrap() - 0.141440542541821).abs() < 1e-13);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_from_errors(0.0, 0.5, 0.5, 0.0), 2.0);
        assert_eq!(c_from_errors(0.5, 0.5, 0.5, 0.5), 0.0);
        let b = 30f64.to_radians();
        let e_xx = (1.0 - b.cos()) / 2.0;
        let e_xy = (1.0 - b.sin()) / 2.0;
        let e_yx = (1.0 + b.sin()) / 2.0;
        assert!((c_from_errors(e_xx, e_xy, e_yx, e_xx) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn q_examples() {
        assert_eq!(q_from_error(0.0), 0.0);
        assert_eq!(q_from_error(0.25), 0.25);
    }

    #[test]
    fn eve_bound_examples() {
        assert_eq!(eve_info_bound(2.0).unwrap().value, 0.0);
        assert_eq!(eve_info_bound(0.0).unwrap().value, 1.0);
        let expect = h((1.0 + 0.5f64.sqrt()) / 2.0);
        assert!((eve_info_bound(1.0).unwrap().value - expect).abs() < 1e-15);
        assert!((expect - 0.600876).abs() < 1e-6);

        let marginal = eve_info_bound(2.0 + 5e-10).unwrap();
        assert!(marginal.clamped);
        assert_eq!(marginal.value, 0.0);
        assert!(!eve_info_bound(1.3).unwrap().clamped);
        assert!(eve_info_bound(2.0 + 1e-8).is_err());
        assert!(eve_info_bound(-1e-8).is_err());
    }

    #[test]
    fn aligned_examples() {
        assert_eq!(aligned_eve_bound(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(aligned_eve_bound(0.25, 0.25).unwrap(), 1.0);
        assert!((aligned_eve_bound(0.02, 0.03).unwrap() - 0.286396957115956).abs() < 1e-13);
        assert!(aligned_eve_bound(0.6, 0.5).is_err());
    }

    #[test]
    fn eve_gain_examples() {
        let g = eve_gains(0.1, 0.02, 0.02, 0.01).unwrap();
        assert_eq!(g.single, 0.0);

        let g = eve_gains(0.1, 0.02, 1.6e-7, 0.0021).unwrap();
        let p1 = 0.1 * (-0.1f64).exp();
        assert!((g.single - p1 * (0.02 - 1.6e-7)).abs() < 1e-18);
        assert!((g.single - 1.80966e-3).abs() < 1e-8);
        assert!((g.multi - (0.0021 - 1.6e-7 - g.single)).abs() < 1e-18);
        assert!((g.multi - 2.9018e-4).abs() < 1e-8);
        assert!(!g.multi_clamped);

        let g = eve_gains(0.1, 1e-6, 1e-6, 1e-6).unwrap();
        assert_eq!((g.single, g.multi), (0.0, 0.0));

        assert!(eve_gains(0.1, 1e-7, 1e-6, 1e-3).is_err());
    }

    #[test]
    fn negative_multi_gain_is_clamped() {
        let g = eve_gains(0.5, 0.9, 0.0, 0.01).unwrap();
        assert!(g.multi_clamped);
        assert_eq!(g.multi, 0.0);
    }

    #[test]
    fn capacity_examples() {
        let c = secrecy_capacity(&CapacityInputs {
            q_bab: 0.0,
            e_bab: 0.0,
            q_n1_bae: 1e-3,
            q_n2_bae: 1e-4,
            c_lower: 1.5,
        });
        assert!(c <= 0.0);

        let inputs = CapacityInputs {
            q_bab: 0.01,
            e_bab: 0.02,
            q_n1_bae: 0.005,
            q_n2_bae: 0.001,
            c_lower: 1.8,
        };
        // 0.01·(1 - h(0.02)) - [0.005·h((1+√0.9)/2) + 0.001], evaluated independently
        let expect = 0.01 * (1.0 - 0.141440542541821) - (0.005 * 0.172127862783817 + 0.001);
        assert!((secrecy_capacity(&inputs) - expect).abs() < 1e-9);
        assert!((secrecy_capacity(&inputs) - 0.006724955260663).abs() < 1e-12);
    }

    #[test]
    fn security_estimate_consistency() {
        let est = SecurityEstimate::new(1.7, 0.01).unwrap();
        assert_eq!(est.eve_single, h((1.0 + (1.7f64 / 2.0).sqrt()) / 2.0));
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn q_is_identity(e in 0.0f64..=1.0) {
            prop_assert!((q_from_error(e) - e).abs() < 1e-15);
        }

        #[test]
        fn c_is_invariant_under_error_flip(
            e in proptest::array::uniform4(0.0f64..=1.0), which in 0usize..4
        ) {
            let mut f = e;
            f[which] = 1.0 - f[which];
            let a = c_from_errors(e[0], e[1], e[2], e[3]);
            let b = c_from_errors(f[0], f[1], f[2], f[3]);
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn eve_bound_decreases_in_c(a in 0.0f64..=2.0, b in 0.0f64..=2.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(eve_info_bound(lo).unwrap().value >= eve_info_bound(hi).unwrap().value);
        }

        #[test]
        fn capacity_monotonicity(
            q_bab in 1e-6f64..0.5,
            e_bab in 0.0f64..0.45,
            q1 in 0.0f64..0.1,
            q2 in 0.0f64..0.1,
            c in 0.05f64..1.95,
        ) {
            let base = CapacityInputs { q_bab, e_bab, q_n1_bae: q1, q_n2_bae: q2, c_lower: c };
            let cs = secrecy_capacity(&base);
            let d = 1e-4;
            let bump = |f: &dyn Fn(&mut CapacityInputs)| {
                let mut i = base;
                f(&mut i);
                secrecy_capacity(&i)
            };
            prop_assert!(bump(&|i| i.c_lower += d) >= cs);
            prop_assert!(bump(&|i| i.q_bab += d) >= cs);
            prop_assert!(bump(&|i| i.e_bab += d) <= cs);
            prop_assert!(bump(&|i| i.q_n1_bae += d) <= cs);
            prop_assert!(bump(&|i| i.q_n2_bae += d) < cs);
        }
    }
}
