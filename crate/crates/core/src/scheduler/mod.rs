//! Who plays next. [`proximity_sample`] picks a battle set of close-rated,
//! under-compared models; the placement functions run the binary-search
//! cold start for a model that has no rating yet.

mod placement;
mod proximity;

pub use placement::{
    next_placement_opponent, placement_step, PlacementConfig, PlacementRound, PlacementState,
};
pub use proximity::{
    initial_weights, proximity_sample, proximity_sample_indices, proximity_sets, ProximityConfig,
    ProximitySampler,
};
