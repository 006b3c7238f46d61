pub mod cli;
pub mod compactify;
pub mod ctime;
pub mod error;
pub mod flow;
pub mod ode;
pub mod render;
pub mod poly;
pub mod systems;
pub mod xi;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use ode::VectorField;
