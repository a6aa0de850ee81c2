pub mod energy;
pub mod error;
pub mod fracops;
pub mod grid;
pub mod problem;
pub mod sampling;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use fracops::FracOrder;
pub use grid::{Grid, GridSignal};
pub use problem::{MatrixField, Potential, ProblemSpec};
