pub mod cli;
pub mod corpus;
pub mod error;
pub mod io;
pub mod kernels;
pub mod maxops;
pub mod profile;
pub mod quad;
mod search;
pub mod special;
pub mod sunrise;
pub mod verify;

pub use error::{Error, Result};
pub use profile::{build_profile, w11_distance, Domain, DomainKind, Profile, W11Distance};
