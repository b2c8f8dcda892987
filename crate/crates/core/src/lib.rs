//! Hierarchical games: two-move normal-form games played through a weighted
//! hierarchy of voting agents.
//!
//! The pipeline runs from a [`HierarchyGraph`] to exact conditional
//! influences ([`vote`], [`ising`]), payoff shares ([`payoff`]), the
//! transformed deciders' game and its pure Nash equilibria ([`game`]).

mod enumerate;
mod error;
pub mod game;
pub mod graph;
pub mod influence;
pub mod io;
pub mod ising;
pub mod payoff;
mod scalar;
mod spin;
pub mod sweep;
mod topology;
pub mod vote;

pub use enumerate::DEFAULT_CAP;
pub use error::{Error, Result};
pub use game::{
    classify_regime, game_value, pre_payoff, transform_game, transform_summary, CommandProfile, Mechanism,
    MoveLabels, NormalFormGame, Regime, RegimeSummary, StrategicGame, TransformedGame,
};
pub use graph::{HierarchyGraph, Role, ValidationReport, VertexId, VertexSet};
pub use influence::{InfluenceModel, InfluenceOracle, Summary};
pub use ising::IsingModel;
pub use payoff::{shapley_shares, shares_by_paths, ShareMatrix};
pub use scalar::Scalar;
pub use spin::{Spin, SpinAssignment};
pub use vote::{ConditionalDistribution, VoteMode, VoteParams};

pub type Graph = HierarchyGraph<f64>;
pub type Params = VoteParams<f64>;
pub type Ising = IsingModel<f64>;
pub type Game = NormalFormGame<f64>;
pub type Transformed = TransformedGame<f64>;
pub type Shares = ShareMatrix<f64>;
