//! Joint bit and power loading for OFDM links under unknown narrowband
//! interference.
//!
//! The crate provides the closed-form per-subcarrier allocator, a verifier
//! for its optimality conditions, a Rayleigh channel simulator, a greedy
//! uniform-power baseline and a Monte-Carlo harness that ties them together.
//!
//! ```
//! use loadsim_core::{allocate, BerTarget, Cinr, TradeoffWeight};
//!
//! let weight = TradeoffWeight::new(0.5).unwrap();
//! let target = BerTarget::new(1e-4).unwrap();
//! let cinrs = [40.0, 13.2, 5.0].map(|c| Cinr::new(c).unwrap());
//! let alloc = allocate(&cinrs, weight, &[target; 3]).unwrap();
//! assert_eq!(alloc.bits, vec![4, 2, 0]);
//! ```

pub mod allocator;
pub mod baseline;
pub mod channel;
pub mod error;
pub mod harness;
pub mod model;
pub mod verifier;

pub use allocator::{
    allocate, allocate_subcarrier, cinr_threshold, continuous_solution, Allocation,
    ContinuousSolution, ProposedAllocator, Rounding, TradeoffWeight,
};
pub use baseline::{
    greedy_allocate, uniform_power, weighted_mean_ber, BitLevelSet, GreedyBaseline, MeanBer,
};
pub use channel::{
    draw_realization, interference_profile, sigma_h_sq, trial_rng, ChannelParams,
    ChannelRealization, InterferenceProfile, StartIndex,
};
pub use error::{Error, Result};
pub use model::{ber_mqam, cinr, power_for_target_ber, BerTarget, Cinr, SubcarrierChannelState};
pub use verifier::{grid_oracle, kkt_residuals, lagrange_multiplier, KktReport};
