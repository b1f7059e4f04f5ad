//! Unit-lattice shapes of degree-p dihedral number fields.
//!
//! A degree-p field with dihedral Galois closure and a unique real embedding
//! has a rank-(p-1)/2 unit lattice. This crate builds the exact trace-form
//! matrices of the real cyclotomic field Q(zeta_p + zeta_p^-1), the diagonal
//! torus orbit that constrains the possible lattice shapes, and (for p = 5)
//! the hypercycle arc on the modular surface that every such shape lands on.
//! The `fields` module runs the full pipeline on real field data: defining
//! polynomial + fundamental units in, verified shape out.

pub mod error;
pub mod fields;
pub mod hypgeo;
pub mod lattice;
pub mod numeric;
pub mod plot;
pub mod realcyclo;
pub mod torus;
pub mod traceform;

pub use error::Error;
pub use realcyclo::{CycloRealElement, PrimeConfig};
pub use traceform::TraceFormData;

/// Default working precision in bits for the field-data pipeline.
pub const DEFAULT_PRECISION: u32 = 192;

/// Crate version string, embedded in CLI summaries and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
