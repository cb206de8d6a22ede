//! Hypergraph-driven ensemble recommendation.
//!
//! Raw user-item interactions, user nearest-neighbour groups and the top-k
//! lists of any number of base recommenders are stacked into one weighted
//! hypergraph. Recommendations for a user come from the regularized ranking
//! vector obtained by querying that hypergraph at the user node.
//!
//! The numeric core ([`hypergraph`], [`ranker`], [`recommenders`],
//! [`ensemble`]) is generic over the floating point type through [`Scalar`];
//! the aliases below pin the common `f64` instantiations.

pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod hypergraph;
pub mod linalg;
pub mod pipeline;
pub mod ranker;
pub mod recommenders;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use data::{InteractionDataset, SplitDataset, Stage};
pub use ensemble::WeightPolicy;
pub use eval::EvalReport;
pub use hypergraph::HyperedgeKind;
pub use ranker::RankerConfig;
pub use recommenders::RankingList;

pub type Hypergraph = hypergraph::Hypergraph<f64>;
pub type Hypergraph32 = hypergraph::Hypergraph<f32>;
pub type AffinityOperator = ranker::AffinityOperator<f64>;
pub type AffinityOperator32 = ranker::AffinityOperator<f32>;
pub type FactorModel = recommenders::FactorModel<f64>;
pub type FactorModel32 = recommenders::FactorModel<f32>;
