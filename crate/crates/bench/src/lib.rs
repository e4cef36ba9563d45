//! Fixtures shared by the benchmarks.

use rfi_qsdc::decoy::{build_yield_lp, LinearProgram, Sense};
use rfi_qsdc::photonics::observe;
use rfi_qsdc::{BasisPair, ChannelSpec, Intensities};

/// The single-photon yield program for the ZZ pair at a realistic operating point.
pub fn decoy_lp(attenuation_db: f64, mu: f64) -> LinearProgram {
    let spec = ChannelSpec::REFERENCE.with_attenuation(attenuation_db);
    let table = observe(&spec, Intensities::from_ratios(mu, 0.05, 0.01).expect("valid intensities"))
        .expect("reference channel clicks");
    let gains: Vec<(f64, f64)> = table.series(BasisPair::ZZ).iter().map(|(i, s)| (*i, s.gain)).collect();
    build_yield_lp(&gains, 10, 1, Sense::Minimize).expect("well-formed program")
}
