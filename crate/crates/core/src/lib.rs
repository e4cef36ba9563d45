//! Secrecy-capacity model for reference-frame-independent quantum secure
//! direct communication with decoy states.

pub mod decoy;
pub mod error;
pub mod oracle;
pub mod photonics;
pub mod pipeline;
pub mod security;

pub use decoy::{estimate_bounds, BoundsSet, EstimateOptions, Interval};
pub use error::{Error, Result};
pub use photonics::{BasisPair, ChannelSpec, Intensities};
pub use pipeline::{
    evaluate_point, max_attenuation, optimize_mu, scan, AttenuationGrid, Cutoff, Flag, ModelOptions, MuSearch,
    PointResult, ScanConfig, ScanMode, Y0Source,
};
pub use security::{secrecy_capacity, CapacityInputs};
