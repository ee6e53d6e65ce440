pub mod data;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod landmarks;
pub mod learners;
pub mod linalg;
pub mod nystroem;
pub mod rng;

pub use error::{Error, Result, Warning};
pub use rng::Rng;
