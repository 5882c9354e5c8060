//! Euclidean stable-roommates games in 3-space: popularity checks and the
//! reduction from planar cubic exact cover.

mod error;
pub mod game;
pub mod drawing;
pub mod geometry;
pub mod io;
pub mod outcomes;
pub mod planarity;
pub mod popularity;
pub mod reduction;
pub mod spatial;
pub mod x3c;

pub use error::{Error, Result};
pub use game::{Agent, AgentId, AgentKind, Game, Outcome, Preference, Room};
pub use geometry::{euclidean_distance, Point3, Tolerance};
