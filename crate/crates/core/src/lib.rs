//! Outgoing-atom statistics of the micromaser.
//!
//! The cavity field lives on a truncated Fock space ([`fock`]). Damping and
//! the Jaynes–Cummings interaction act on it as superoperators
//! ([`superop`]), which compose into stroboscopic maps with a common steady
//! state ([`maps`]). Counting distributions and Mandel Q-parameters of the
//! detected atoms follow from those maps ([`stats`]) and are cross-checked by
//! a trajectory simulator ([`oracle`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod linalg;
pub mod maps;
pub mod oracle;
pub mod stats;
pub mod superop;

pub use error::{Error, Result};
pub use fock::{make_space, mandel_qf, thermal_state, DensityMatrix, FockSpace};
pub use maps::{steady_state, MapKind, Outcome};
pub use stats::{q_report, Level, Method, QReport, Window, Windows};
pub use superop::{PumpConfig, Sector, Superoperator};

/// The guide's chapters, compiled and run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/field.md")]
    struct Field;
    #[doc = include_str!("../../../book/src/superoperators.md")]
    struct Superoperators;
    #[doc = include_str!("../../../book/src/maps.md")]
    struct Maps;
    #[doc = include_str!("../../../book/src/counting.md")]
    struct Counting;
    #[doc = include_str!("../../../book/src/limits.md")]
    struct Limits;
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    struct MonteCarlo;
}
