//! Entropies of quantum channels and the bounds relating them.

pub mod bounds;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod matcore;
pub mod separability;
pub mod spec;
pub mod verify;
pub mod zoo;

pub use channels::{Channel, ChannelFlags, ChoiMatrix, KrausSet, Superoperator, Validation};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Order, SpectrumVector, C64};
