//! Muscle-actuated articulated-body simulation and locomotion environments.
//!
//! - [`model`]: model file format, validation and bundled fixtures
//! - [`muscle`]: Hill-type musculotendon mechanics and moment arms
//! - [`dynamics`]: kinematics, mass matrix, contact and time stepping
//! - [`metabolics`]: metabolic power, MET and cost of transport
//! - [`env`]: observation, reward, termination and reset for training

pub mod dynamics;
pub mod env;
pub mod metabolics;
pub mod model;
pub mod muscle;

pub use dynamics::{Model, SimParams, SimState};
pub use model::{load_model, ModelDesc};
