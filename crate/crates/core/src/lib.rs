pub mod cli;
pub mod collision;
pub mod config;
pub mod error;
pub mod grid;
pub mod halfspace;
pub mod juttner;
pub mod lorentz;
pub mod macro5;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
