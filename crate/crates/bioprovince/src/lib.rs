//! Clustering of compositional samples with a convex mixture of Aitchison
//! (biological) and latitude-depth (spatial) distances, followed by localized
//! nearest-neighbor prediction of province memberships on a fine abiotic grid.
//!
//! The pipeline has three stages:
//!
//! 1. build the mixed distance matrix `D_alpha = (1-alpha) * h(D_bio) + alpha * h(D_spatial)`
//!    where `h` rescales a matrix by its spectral norm ([`distance`]),
//! 2. agglomerative Ward clustering of the samples ([`biocluster`]),
//! 3. localized k-nearest-neighbor prediction of memberships at grid points
//!    using temperature/salinity similarity constrained by spatial proximity
//!    ([`province`]).
//!
//! Hyperparameters (`r`, `alpha`, `K`) are tuned from data ([`tuning`]), and
//! province robustness is quantified by ASV subsampling ([`stability`]).

pub mod biocluster;
pub mod cli;
pub mod data;
pub mod distance;
pub mod error;
pub mod manifest;
pub mod numerics;
pub mod province;
pub mod report;
mod seeding;
pub mod stability;
pub mod svg;
pub mod tuning;

pub use error::{Error, Result};
