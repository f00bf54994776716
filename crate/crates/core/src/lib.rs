pub mod checks;
pub mod combination;
pub mod error;
pub mod fourier;
pub mod gf;
pub mod io;
pub mod laurent;
pub mod model;
pub mod random;
pub mod spectral;
pub mod sweep;
pub mod wavepacket;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
