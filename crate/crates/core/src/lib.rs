//! Online packet scheduling under adversarial jamming with speed
//! augmentation: exact simulation, hard instances, adaptive lower-bound
//! adversaries, brute-force offline optima and trace audits.

pub mod adversaries;
pub mod analysis;
pub mod engine;
pub mod error;
pub mod fuzz;
pub mod model;
pub mod numeric;
pub mod offline;
pub mod policies;

pub use error::{Error, Result};
pub use model::{FaultSequence, Instance, PacketBatch, SizeCatalog, SizeFilter, Trace};
pub use numeric::{GoldenNumber, Rational};
pub use policies::{Policy, PolicyKind};
