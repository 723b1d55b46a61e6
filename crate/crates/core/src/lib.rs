//! Serre derivatives of modular forms for the Fricke groups of level
//! 1, 2, 3, 5 and 7, and the location of their zeros on the lower boundary
//! of the standard fundamental domain.

pub mod arc;
pub mod config;
pub mod error;
pub mod formspec;
pub mod generators;
pub mod geometry;
pub mod jpoly;
pub mod level;
pub mod numeric;
pub mod pipeline;
pub mod qseries;
pub mod serre;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use formspec::{parse_form_spec, FormSpec};
pub use generators::ModularForm;
pub use level::Level;
pub use qseries::{CoefficientDomain, QSeries};

/// Version tag carried by every JSON and CSV artifact.
pub const SCHEMA: &str = "serre-zeros/1";
