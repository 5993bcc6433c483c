//! Minimum sum-transmission-delay scheduling for IRS-aided uplink multiple
//! access.
//!
//! The library models an uplink where several single-antenna devices send a
//! fixed number of bits to a base station with the help of a reconfigurable
//! reflecting surface. Devices may transmit simultaneously (decoded by
//! successive interference cancellation) or one at a time; the hybrid
//! protocol optimized here lets device k use every slot up to its own,
//! with per-slot surface reconfiguration.
//!
//! Modules:
//! - [`system`]: geometry, fading channels, beams, and achievable rates;
//! - [`numerics`]: Lambert W, bisection, and the structured convex solver;
//! - [`tdma`]: closed-form one-device-per-slot solutions for both budget
//!   regimes;
//! - [`thresholds`]: analytic regime boundaries and the protocol classifier;
//! - [`noma`]: single-slot solver with recursive power construction;
//! - [`hma`]: the full alternating optimizer (ordering, successive convex
//!   approximation, fractional-programming beamforming);
//! - [`experiments`]: scenario runner and CSV emission for Monte Carlo
//!   studies;
//! - [`config`]: structured text parsing for system and scenario files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod hma;
pub mod noma;
pub mod numerics;
pub mod system;
pub mod tdma;
pub mod thresholds;

pub use error::{Error, Result};
pub use system::{
    aligned_beam, generate_channels, snr_gain, BeamVector, Budget, ChannelRealization,
    SystemConfig,
};
