pub mod bound;
pub mod cli;
pub mod dnf;
pub mod error;
pub mod exact;
pub mod hatdist;
pub mod mpctx;
pub mod par;
pub mod rng;
pub mod sampler;
pub mod specfun;

pub use error::{Error, Result};
