//! Weak-coherent source, lossy fiber, misaligned measurement frames and
//! threshold detectors.
//!
//! Everything here is a closed-form function of the channel parameters; the
//! statistics produced are the asymptotic gains and error rates an experiment
//! would observe on the Bob→Alice leg and on the full Bob→Alice→Bob round trip.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, invalid, Error, Result};

/// Physical parameters of the two-leg channel.
///
/// `attenuation_db` is the round-trip fiber attenuation: the Bob→Alice leg
/// sees half of it, the Bob→Alice→Bob loop sees all of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub attenuation_db: f64,
    pub alpha_db_per_km: f64,
    /// Intrinsic optical efficiency of the Bob→Alice leg.
    pub eta_opt_ba: f64,
    /// Intrinsic optical efficiency of the full round trip.
    pub eta_opt_bab: f64,
    pub eta_d: f64,
    /// Dark-count probability per detector per gate.
    pub pd: f64,
    /// Intrinsic optical error rate at Alice's measurement.
    pub ed_a: f64,
    /// Intrinsic optical error rate at Bob's measurement.
    pub ed_b: f64,
    pub beta_rad: f64,
}

impl ChannelSpec {
    /// Reference device parameters (fiber at 0.2 dB/km, aligned frames, no loss).
    pub const REFERENCE: ChannelSpec = ChannelSpec {
        attenuation_db: 0.0,
        alpha_db_per_km: 0.2,
        eta_opt_ba: 0.21,
        eta_opt_bab: 0.088,
        eta_d: 0.7,
        pd: 8e-8,
        ed_a: 0.0131,
        ed_b: 0.0026,
        beta_rad: 0.0,
    };

    pub fn with_attenuation(mut self, attenuation_db: f64) -> Self {
        self.attenuation_db = attenuation_db;
        self
    }

    pub fn with_beta(mut self, beta_rad: f64) -> Self {
        self.beta_rad = beta_rad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.attenuation_db.is_finite() && self.attenuation_db >= 0.0) {
            return Err(invalid(
                "attenuation_db",
                format!("{} must be finite and >= 0", self.attenuation_db),
            ));
        }
        if !(self.alpha_db_per_km.is_finite() && self.alpha_db_per_km > 0.0) {
            return Err(invalid(
                "alpha_db_per_km",
                format!("{} must be finite and > 0", self.alpha_db_per_km),
            ));
        }
        check_unit("eta_opt_ba", self.eta_opt_ba)?;
        check_unit("eta_opt_bab", self.eta_opt_bab)?;
        check_unit("eta_d", self.eta_d)?;
        check_unit("pd", self.pd)?;
        check_unit("ed_a", self.ed_a)?;
        check_unit("ed_b", self.ed_b)?;
        if !self.beta_rad.is_finite() {
            return Err(invalid("beta_rad", "must be finite"));
        }
        Ok(())
    }
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Probability that a Poisson source of mean `intensity` emits `n` photons.
pub fn poisson_pn(intensity: f64, n: u32) -> Result<f64> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(invalid(
            "intensity",
            format!("{intensity} must be finite and >= 0"),
        ));
    }
    Ok(poisson_unchecked(intensity, n))
}

pub(crate) fn poisson_unchecked(intensity: f64, n: u32) -> f64 {
    if intensity == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n <= 20 {
        let mut term = (-intensity).exp();
        for k in 1..=n {
            term *= intensity / f64::from(k);
        }
        term
    } else {
        (-intensity + f64::from(n) * intensity.ln() - ln_factorial(n)).exp()
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// `P(I, 0..=n_cut)`.
pub fn poisson_head(intensity: f64, n_cut: u32) -> Vec<f64> {
    (0..=n_cut)
        .map(|n| poisson_unchecked(intensity, n))
        .collect()
}

/// Upper tail `Σ_{n > n_cut} P(I, n)`.
///
/// Summed directly for weak pulses, where `1 - head` would cancel to noise.
pub fn poisson_tail(intensity: f64, n_cut: u32) -> f64 {
    if intensity >= 1.0 {
        let head: f64 = poisson_head(intensity, n_cut).iter().sum();
        return (1.0 - head).max(0.0);
    }
    let mut n = n_cut + 1;
    let mut term = poisson_unchecked(intensity, n);
    let mut sum = 0.0;
    while term > 0.0 && term > sum * 1e-18 {
        sum += term;
        n += 1;
        term *= intensity / f64::from(n);
    }
    sum
}

/// One-way fiber length implied by a round-trip attenuation.
pub fn distance_from_attenuation(spec: &ChannelSpec) -> f64 {
    spec.attenuation_db / (2.0 * spec.alpha_db_per_km)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    /// Bob → Alice, one fiber pass.
    BobAlice,
    /// Bob → Alice → Bob, two fiber passes.
    RoundTrip,
}

/// Overall transmission `t · η_opt` of a leg.
pub fn leg_transmission(spec: &ChannelSpec, leg: Leg) -> f64 {
    match leg {
        Leg::BobAlice => 10f64.powf(-(spec.attenuation_db / 2.0) / 10.0) * spec.eta_opt_ba,
        Leg::RoundTrip => 10f64.powf(-spec.attenuation_db / 10.0) * spec.eta_opt_bab,
    }
}

/// Bob's polarization preparation on the Poincaré sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationPrep {
    pub theta: f64,
    pub phi: f64,
}

impl PolarizationPrep {
    pub const H: Self = Self { theta: 0.0, phi: 0.0 };
    pub const V: Self = Self { theta: PI, phi: 0.0 };
    pub const PLUS: Self = Self { theta: FRAC_PI_2, phi: 0.0 };
    pub const MINUS: Self = Self { theta: FRAC_PI_2, phi: PI };
    pub const R: Self = Self { theta: FRAC_PI_2, phi: FRAC_PI_2 };
    pub const L: Self = Self { theta: FRAC_PI_2, phi: 3.0 * FRAC_PI_2 };

    /// Normalized single-photon amplitude vector over `{H, V}`.
    pub fn state(&self) -> Vector2<Complex64> {
        Vector2::new(
            Complex64::new((self.theta / 2.0).cos(), 0.0),
            Complex64::from_polar((self.theta / 2.0).sin(), self.phi),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    /// The two eigenstates of Alice's (rotated) basis. The first is the
    /// "correct" outcome that error rates are measured against.
    pub fn outcomes(self) -> (Outcome, Outcome) {
        match self {
            Basis::Z => (Outcome::H, Outcome::V),
            Basis::X => (Outcome::PlusPrime, Outcome::MinusPrime),
            Basis::Y => (Outcome::RPrime, Outcome::LPrime),
        }
    }
}

/// Eigenstates of Alice's measurement bases, rotated by β about Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    H,
    V,
    PlusPrime,
    MinusPrime,
    RPrime,
    LPrime,
}

impl Outcome {
    pub fn complement(self) -> Outcome {
        match self {
            Outcome::H => Outcome::V,
            Outcome::V => Outcome::H,
            Outcome::PlusPrime => Outcome::MinusPrime,
            Outcome::MinusPrime => Outcome::PlusPrime,
            Outcome::RPrime => Outcome::LPrime,
            Outcome::LPrime => Outcome::RPrime,
        }
    }
}

/// One of the five retained (measurement, preparation) combinations.
///
/// Labels read `ξ_A ξ_B`: `XY` is Alice measuring in X on a photon Bob
/// prepared in Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisPair {
    prep: Basis,
    meas: Basis,
}

impl BasisPair {
    pub const ZZ: Self = Self { prep: Basis::Z, meas: Basis::Z };
    pub const XX: Self = Self { prep: Basis::X, meas: Basis::X };
    pub const XY: Self = Self { prep: Basis::Y, meas: Basis::X };
    pub const YX: Self = Self { prep: Basis::X, meas: Basis::Y };
    pub const YY: Self = Self { prep: Basis::Y, meas: Basis::Y };

    pub const ALL: [BasisPair; 5] = [Self::ZZ, Self::XX, Self::XY, Self::YX, Self::YY];
    /// The four pairs entering the C invariant.
    pub const TRANSVERSE: [BasisPair; 4] = [Self::XX, Self::XY, Self::YX, Self::YY];

    pub fn new(prep: Basis, meas: Basis) -> Result<Self> {
        let pair = Self { prep, meas };
        if Self::ALL.contains(&pair) {
            Ok(pair)
        } else {
            Err(invalid(
                "basis_pair",
                format!("prep {prep:?} / meas {meas:?} is not a retained combination"),
            ))
        }
    }

    pub fn prep(self) -> Basis {
        self.prep
    }

    pub fn meas(self) -> Basis {
        self.meas
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|p| *p == self).unwrap()
    }

    /// Representative preparation after the symmetry reduction.
    pub fn representative_prep(self) -> PolarizationPrep {
        match self.prep {
            Basis::Z => PolarizationPrep::H,
            Basis::X => PolarizationPrep::PLUS,
            Basis::Y => PolarizationPrep::R,
        }
    }

    pub fn label(self) -> &'static str {
        match (self.meas, self.prep) {
            (Basis::Z, Basis::Z) => "ZZ",
            (Basis::X, Basis::X) => "XX",
            (Basis::X, Basis::Y) => "XY",
            (Basis::Y, Basis::X) => "YX",
            _ => "YY",
        }
    }
}

impl fmt::Display for BasisPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Squared projection `|f(outcome)|²` of a prepared photon onto one of
/// Alice's rotated eigenstates.
pub fn amplitude_sq(prep: PolarizationPrep, outcome: Outcome, beta_rad: f64) -> f64 {
    let (st, ct) = prep.theta.sin_cos();
    let (sd, cd) = (prep.phi - beta_rad).sin_cos();
    let v = match outcome {
        Outcome::H => 1.0 + ct,
        Outcome::V => 1.0 - ct,
        Outcome::PlusPrime => 1.0 + st * cd,
        Outcome::MinusPrime => 1.0 - st * cd,
        Outcome::RPrime => 1.0 + st * sd,
        Outcome::LPrime => 1.0 - st * sd,
    };
    (v / 2.0).clamp(0.0, 1.0)
}

/// Click probability of the detector for outcome `x` when `k` photons arrive,
/// `fy_sq` being the weight on the complementary detector.
pub fn detector_yield(k: u32, fy_sq: f64, eta_d: f64, pd: f64) -> f64 {
    let k = k as i32;
    let y = (1.0 - pd) * (1.0 - fy_sq * eta_d).powi(k) - (1.0 - pd).powi(2) * (1.0 - eta_d).powi(k);
    y.clamp(0.0, 1.0)
}

/// Poisson-averaged gain of one detector.
pub fn gain_component(intensity: f64, eta_chan: f64, eta_d: f64, pd: f64, fy_sq: f64) -> f64 {
    let mean = intensity * eta_chan * eta_d;
    // (1-Pd)e^{-m·fy} - (1-Pd)²e^{-m}; rearranged at small m to avoid cancellation.
    let q = if mean < 1.0 {
        (1.0 - pd) * (-mean).exp() * ((mean * (1.0 - fy_sq)).exp_m1() + pd)
    } else {
        (1.0 - pd) * (-mean * fy_sq).exp() - (1.0 - pd).powi(2) * (-mean).exp()
    };
    q.clamp(0.0, 1.0)
}

/// Gain and error rate observed for one basis pair at one intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub gain: f64,
    pub error_rate: f64,
}

impl PairStats {
    /// `Q·E`, the error gain.
    pub fn error_gain(&self) -> f64 {
        self.gain * self.error_rate
    }

    fn from_components(correct: f64, wrong: f64, ed: f64, context: impl FnOnce() -> String) -> Result<Self> {
        let gain = correct + wrong;
        if gain <= 0.0 {
            return Err(Error::NoClicks { context: context() });
        }
        let error_rate = ((ed * correct + (1.0 - ed) * wrong) / gain).clamp(0.0, 1.0);
        Ok(Self { gain, error_rate })
    }
}

/// Bob→Alice statistics for `pair` at source intensity `intensity`.
pub fn pair_stats(spec: &ChannelSpec, eta_chan: f64, intensity: f64, pair: BasisPair) -> Result<PairStats> {
    let prep = pair.representative_prep();
    let (x, y) = pair.meas.outcomes();
    let fx = amplitude_sq(prep, x, spec.beta_rad);
    let fy = amplitude_sq(prep, y, spec.beta_rad);
    let correct = gain_component(intensity, eta_chan, spec.eta_d, spec.pd, fy);
    let wrong = gain_component(intensity, eta_chan, spec.eta_d, spec.pd, fx);
    PairStats::from_components(correct, wrong, spec.ed_a, || format!("pair {pair} at intensity {intensity}"))
}

/// Round-trip Z-basis gain `Q^{BAB}` and QBER `E^{BAB}`.
pub fn bab_stats(spec: &ChannelSpec, mu: f64) -> Result<PairStats> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(invalid("mu", format!("{mu} must be finite and >= 0")));
    }
    let eta = leg_transmission(spec, Leg::RoundTrip);
    let correct = gain_component(mu, eta, spec.eta_d, spec.pd, 0.0);
    let wrong = gain_component(mu, eta, spec.eta_d, spec.pd, 1.0);
    PairStats::from_components(correct, wrong, spec.ed_b, || format!("round trip at mu {mu}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntensityLabel {
    Signal,
    Decoy1,
    Decoy2,
}

impl IntensityLabel {
    pub const ALL: [IntensityLabel; 3] = [Self::Signal, Self::Decoy1, Self::Decoy2];

    fn index(self) -> usize {
        self as usize
    }
}

/// Signal and two decoy intensities, strictly decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensities {
    pub signal: f64,
    pub decoy1: f64,
    pub decoy2: f64,
}

impl Intensities {
    pub fn new(signal: f64, decoy1: f64, decoy2: f64) -> Result<Self> {
        let out = Self { signal, decoy1, decoy2 };
        for (name, v) in [("signal", signal), ("decoy1", decoy1), ("decoy2", decoy2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        if !(signal > decoy1 && decoy1 > decoy2) {
            return Err(invalid(
                "intensities",
                format!("need signal > decoy1 > decoy2, got {signal}, {decoy1}, {decoy2}"),
            ));
        }
        Ok(out)
    }

    /// Decoys tied to the signal by fixed ratios.
    pub fn from_ratios(mu: f64, ratio1: f64, ratio2: f64) -> Result<Self> {
        Self::new(mu, ratio1 * mu, ratio2 * mu)
    }

    pub fn get(&self, label: IntensityLabel) -> f64 {
        match label {
            IntensityLabel::Signal => self.signal,
            IntensityLabel::Decoy1 => self.decoy1,
            IntensityLabel::Decoy2 => self.decoy2,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.signal, self.decoy1, self.decoy2]
    }
}

/// Observed statistics: all five pairs at all three intensities on the
/// Bob→Alice leg, plus the round-trip gain and QBER once attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegStatsTable {
    pub intensities: Intensities,
    entries: [[PairStats; 5]; 3],
    pub round_trip: Option<PairStats>,
}

impl LegStatsTable {
    pub fn get(&self, label: IntensityLabel, pair: BasisPair) -> PairStats {
        self.entries[label.index()][pair.index()]
    }

    /// `(intensity, stats)` for one pair across the three intensities.
    pub fn series(&self, pair: BasisPair) -> [(f64, PairStats); 3] {
        IntensityLabel::ALL.map(|l| (self.intensities.get(l), self.get(l, pair)))
    }

    /// Z-basis signal-intensity gain `Q^{BA}`.
    pub fn q_ba_signal(&self) -> f64 {
        self.get(IntensityLabel::Signal, BasisPair::ZZ).gain
    }

    pub fn q_bab(&self) -> Option<f64> {
        self.round_trip.map(|s| s.gain)
    }

    pub fn e_bab(&self) -> Option<f64> {
        self.round_trip.map(|s| s.error_rate)
    }

    pub fn with_round_trip(mut self, stats: PairStats) -> Self {
        self.round_trip = Some(stats);
        self
    }
}

/// Fills the Bob→Alice part of the table.
pub fn ba_observed(spec: &ChannelSpec, intensities: Intensities) -> Result<LegStatsTable> {
    let eta = leg_transmission(spec, Leg::BobAlice);
    let mut entries = [[PairStats { gain: 0.0, error_rate: 0.0 }; 5]; 3];
    for label in IntensityLabel::ALL {
        for pair in BasisPair::ALL {
            entries[label.index()][pair.index()] = pair_stats(spec, eta, intensities.get(label), pair)?;
        }
    }
    Ok(LegStatsTable { intensities, entries, round_trip: None })
}

/// Bob→Alice table with the round trip at the signal intensity attached.
pub fn observe(spec: &ChannelSpec, intensities: Intensities) -> Result<LegStatsTable> {
    let table = ba_observed(spec, intensities)?;
    let rt = bab_stats(spec, intensities.signal)?;
    Ok(table.with_round_trip(rt))
}

/// 2×2 operator on the `{H, V}` amplitude basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationOperator(pub Matrix2<Complex64>);

impl PolarizationOperator {
    pub fn apply(&self, state: &Vector2<Complex64>) -> Vector2<Complex64> {
        self.0 * state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodingLabel {
    MH,
    MV,
    MPlus,
    MMinus,
    MR,
    ML,
    M0,
    M1,
}

/// Preparation and message-encoding operators, unnormalized.
pub fn encoding_operator(label: EncodingLabel) -> PolarizationOperator {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    // Matrix2::new(row-major): entry (a, b) is the coefficient of |a⟩⟨b|.
    let m = match label {
        EncodingLabel::MH | EncodingLabel::M0 => Matrix2::new(l, o, o, l),
        EncodingLabel::MV => Matrix2::new(o, l, l, o),
        EncodingLabel::MPlus => Matrix2::new(l, l, l, -l),
        EncodingLabel::MMinus => Matrix2::new(l, -l, -l, -l),
        EncodingLabel::MR => Matrix2::new(l, -i, i, -l),
        EncodingLabel::ML => Matrix2::new(l, i, -i, -l),
        EncodingLabel::M1 => Matrix2::new(o, -l, l, o),
    };
    PolarizationOperator(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_pn(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pn(0.0, 3).unwrap(), 0.0);
        assert!(close(poisson_pn(0.1, 1).unwrap(), 0.1 * (-0.1f64).exp(), 1e-15));
        let total: f64 = (0..=50).map(|n| poisson_pn(0.05, n).unwrap()).sum();
        assert!(close(total, 1.0, 1e-12));
        assert!(poisson_pn(-0.1, 0).is_err());
        assert!(poisson_pn(f64::NAN, 0).is_err());
    }

    #[test]
    fn poisson_log_domain_matches_product() {
        // n = 21 goes through the log branch; compare against the recurrence.
        let direct = poisson_unchecked(3.0, 20) * 3.0 / 21.0;
        let logd = poisson_unchecked(3.0, 21);
        assert!((direct - logd).abs() <= 1e-14 * direct);
        assert!(poisson_unchecked(0.5, 200) >= 0.0);
    }

    #[test]
    fn tail_and_head_partition_unity() {
        for &i in &[1e-5, 0.01, 0.3, 0.99, 1.0, 2.5, 8.0] {
            let head: f64 = poisson_head(i, 10).iter().sum();
            let tail = poisson_tail(i, 10);
            assert!(tail >= 0.0);
            assert!(close(head + tail, 1.0, 1e-14), "intensity {i}");
        }
        // weak pulses: tail far below the rounding of 1 - head
        let t = poisson_tail(1e-3, 10);
        let expect = poisson_unchecked(1e-3, 11);
        assert!((t - expect).abs() <= 1e-3 * expect);
    }

    #[test]
    fn distance_examples() {
        let s = ChannelSpec::REFERENCE;
        assert!(close(distance_from_attenuation(&s.with_attenuation(10.0)), 25.0, TOL));
        assert!(close(distance_from_attenuation(&s.with_attenuation(11.15)), 27.875, 1e-9));
        assert_eq!(distance_from_attenuation(&s.with_attenuation(0.0)), 0.0);
    }

    #[test]
    fn transmission_examples() {
        let s = ChannelSpec::REFERENCE;
        assert!(close(leg_transmission(&s, Leg::BobAlice), 0.21, TOL));
        let s10 = s.with_attenuation(10.0);
        assert!(close(leg_transmission(&s10, Leg::BobAlice), 0.21 * 10f64.powf(-0.5), TOL));
        assert!(close(leg_transmission(&s10, Leg::BobAlice), 0.066408, 1e-6));
        assert!(close(leg_transmission(&s10, Leg::RoundTrip), 0.0088, TOL));
    }

    #[test]
    fn amplitude_examples() {
        let b45 = 45f64.to_radians();
        assert!(close(amplitude_sq(PolarizationPrep::PLUS, Outcome::PlusPrime, 0.0), 1.0, TOL));
        assert!(close(amplitude_sq(PolarizationPrep::PLUS, Outcome::PlusPrime, b45), 0.853553390593, 1e-11));
        assert!(close(amplitude_sq(PolarizationPrep::R, Outcome::PlusPrime, b45), 0.853553390593, 1e-11));
    }

    #[test]
    fn six_states_are_the_protocol_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cases = [
            (PolarizationPrep::H, Outcome::H),
            (PolarizationPrep::V, Outcome::V),
            (PolarizationPrep::PLUS, Outcome::PlusPrime),
            (PolarizationPrep::MINUS, Outcome::MinusPrime),
            (PolarizationPrep::R, Outcome::RPrime),
            (PolarizationPrep::L, Outcome::LPrime),
        ];
        for (prep, outcome) in cases {
            assert!(close(amplitude_sq(prep, outcome, 0.0), 1.0, TOL), "{prep:?}");
            assert!(close(amplitude_sq(prep, outcome.complement(), 0.0), 0.0, TOL));
        }
        let r = PolarizationPrep::R.state();
        assert!(close(r[0].re, s, TOL) && close(r[1].im, s, TOL));
    }

    #[test]
    fn yield_examples() {
        let pd = 3e-3;
        assert!(close(detector_yield(0, 0.37, 0.7, pd), pd * (1.0 - pd), 1e-15));
        assert!(close(detector_yield(1, 0.0, 0.7, 0.0), 0.7, TOL));
        assert!(close(detector_yield(2, 0.5, 0.7, 0.0), 0.3325, TOL));
    }

    #[test]
    fn gain_examples() {
        assert!(close(gain_component(0.1, 0.1, 0.7, 0.0, 0.0), 1.0 - (-0.007f64).exp(), 1e-15));
        assert!(close(gain_component(0.1, 0.1, 0.7, 0.0, 0.0), 0.0069756, 1e-7));
        let pd = 1e-4;
        assert!(close(gain_component(0.0, 0.3, 0.7, pd, 0.2), pd * (1.0 - pd), 1e-15));
        assert_eq!(gain_component(0.4, 0.3, 0.7, 0.0, 1.0), 0.0);
    }

    #[test]
    fn pair_stats_examples() {
        let mut s = ChannelSpec::REFERENCE;
        s.pd = 0.0;
        s.ed_a = 0.0;
        let eta = leg_transmission(&s, Leg::BobAlice);
        assert_eq!(pair_stats(&s, eta, 0.1, BasisPair::XX).unwrap().error_rate, 0.0);

        let s45 = s.with_beta(45f64.to_radians());
        let e = pair_stats(&s45, eta, 1e-9, BasisPair::XX).unwrap().error_rate;
        assert!(close(e, (1.0 - 45f64.to_radians().cos()) / 2.0, 1e-8));
    }

    #[test]
    fn no_clicks_is_an_error() {
        let mut s = ChannelSpec::REFERENCE;
        s.pd = 0.0;
        let eta = leg_transmission(&s, Leg::BobAlice);
        assert!(matches!(pair_stats(&s, eta, 0.0, BasisPair::ZZ), Err(Error::NoClicks { .. })));
        assert!(matches!(bab_stats(&s, 0.0), Err(Error::NoClicks { .. })));
    }

    #[test]
    fn ba_observed_examples() {
        let s = ChannelSpec::REFERENCE;
        let t = ba_observed(&s, Intensities::from_ratios(0.1, 0.05, 0.01).unwrap()).unwrap();
        let zz = t.get(IntensityLabel::Signal, BasisPair::ZZ);
        assert!(close(zz.error_rate, s.ed_a, 1e-4));
        let xy = t.get(IntensityLabel::Signal, BasisPair::XY);
        assert!(close(xy.error_rate, 0.5, 1e-9));
        assert!(t.round_trip.is_none());
    }

    #[test]
    fn intensities_must_decrease() {
        assert!(Intensities::new(0.1, 0.1, 0.01).is_err());
        assert!(Intensities::new(0.1, 0.05, -0.01).is_err());
        assert!(Intensities::from_ratios(0.1, 0.05, 0.01).is_ok());
    }

    #[test]
    fn bab_examples() {
        let mut s = ChannelSpec::REFERENCE.with_attenuation(10.0);
        s.pd = 0.0;
        s.ed_b = 0.0;
        let rt = bab_stats(&s, 0.1).unwrap();
        assert_eq!(rt.error_rate, 0.0);
        assert!(close(rt.gain, 1.0 - (-0.1f64 * 0.0088 * 0.7).exp(), 1e-15));
        assert!(close(rt.gain, 6.158e-4, 1e-6));
        let sat = bab_stats(&ChannelSpec::REFERENCE, 1e6).unwrap();
        assert!(close(sat.gain, 1.0, 1e-6));
    }

    #[test]
    fn basis_pair_construction() {
        assert!(BasisPair::new(Basis::Z, Basis::X).is_err());
        assert!(BasisPair::new(Basis::X, Basis::Z).is_err());
        assert_eq!(BasisPair::new(Basis::Y, Basis::X).unwrap(), BasisPair::XY);
        assert_eq!(BasisPair::XY.representative_prep(), PolarizationPrep::R);
        assert_eq!(BasisPair::YX.representative_prep(), PolarizationPrep::PLUS);
    }

    #[test]
    fn encoding_examples() {
        let h = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let v = Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(encoding_operator(EncodingLabel::M0).apply(&h), h);
        assert_eq!(encoding_operator(EncodingLabel::M1).apply(&h), v);
        assert_eq!(encoding_operator(EncodingLabel::M1).apply(&v), -h);
        let m1 = encoding_operator(EncodingLabel::M1).0;
        assert_eq!(m1.transpose() * m1, Matrix2::identity());

        let r = encoding_operator(EncodingLabel::MR).apply(&h);
        let r = r / Complex64::new(r.norm(), 0.0);
        let expect = PolarizationPrep::R.state();
        assert!((r - expect).norm() < TOL);

        // each preparation operator takes |H⟩ onto its protocol state
        let cases = [
            (EncodingLabel::MH, PolarizationPrep::H),
            (EncodingLabel::MV, PolarizationPrep::V),
            (EncodingLabel::MPlus, PolarizationPrep::PLUS),
            (EncodingLabel::MMinus, PolarizationPrep::MINUS),
            (EncodingLabel::ML, PolarizationPrep::L),
        ];
        for (label, prep) in cases {
            let out = encoding_operator(label).apply(&h);
            let out = out / Complex64::new(out.norm(), 0.0);
            assert!((out - prep.state()).norm() < TOL, "{label:?}");
        }
    }
}
