pub mod bakry;
pub mod constants;
pub mod error;
pub mod hyper;
pub mod kernels;
pub mod quadrature;
pub mod rigidity;
pub mod semigroup;
pub mod spaces;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
