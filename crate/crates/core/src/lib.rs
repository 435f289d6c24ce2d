pub mod capacity;
pub mod channel;
pub mod detection;
pub mod error;
pub mod harness;
pub mod multicell;
pub mod numerics;
pub mod parallel;
pub mod precoding;
pub mod rng;

pub use error::Error;
