//! Multi-period orienteering for field sales tour planning.

pub mod alns;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod instance;
pub mod kit;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod sensitivity;
pub mod solution;

pub use error::{Error, Result};
pub use instance::{AbcClass, Customer, CustomerId, Instance, Point, TravelMatrix};
pub use scoring::{ModelVariant, ScoreModel};
pub use solution::{check_feasible, objective_value, Solution, Tour};
