//! Online reserve-price optimisation for second-price auctions.
//!
//! The engine keeps, for every floor level, a time-weighted latent factor
//! model of the publisher revenue per (user, placement), and two online
//! Aalen additive hazard models of the first and second bid. Censored
//! auction outcomes are turned into expected-revenue targets through the
//! bid distributions before they reach the revenue model.

pub mod batch;
pub mod bench;
pub mod bid;
pub mod censorship;
pub mod checkpoint;
pub mod domain;
pub mod engine;
pub mod error;
pub mod factors;
pub mod jsonl;
pub mod linalg;
pub mod params;
pub mod replay;
pub mod revenue;
pub mod simulation;

pub use bid::{AalenModel, BidCdf, BidModelStore, BidObservation};
pub use censorship::{build_training_target, SimulatedRevenue, Variant};
pub use domain::{
    derive_censorship, AuctionEvent, CensorshipStatus, FloorGrid, Micros, Outcome, Timestamp,
};
pub use engine::{Decision, Engine, EngineConfig, Selection};
pub use error::{Error, Result};
pub use params::{BidHyper, FactorPrior, Forgetting, HyperParams, RevenueHyper};
pub use revenue::{RevenueModel, RevenueProfile};
