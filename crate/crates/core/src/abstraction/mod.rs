//! Card and action abstraction.

pub mod canonical;
pub mod equity;
pub mod features;
pub mod kmeans;
pub mod buckets;
pub mod menu;
pub mod profile;
