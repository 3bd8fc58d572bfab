//! Cavity-controlled spin relaxation.
//!
//! * [`spin`]: donor spin Hamiltonian, (F, mF) labeling and transition tables.
//! * [`cavity`]: spin–resonator coupling, Purcell rate and related figures of merit.
//! * [`sequence`]: pulse protocols over an inhomogeneous spin ensemble.
//! * [`fit`]: Levenberg–Marquardt and the decay / Purcell / Rabi fits built on it.
//!
//! Frequencies and rates are ordinary frequencies (Hz) throughout; the
//! 2π factors live inside the rate formulas.
//!
//! ```
//! use purcellsim::cavity::{purcell_rate, t1_of_delta};
//!
//! let t1 = 1.0 / purcell_rate(58.0, 68e3, 0.0);
//! assert!((t1_of_delta(t1, 68e3, 68e3, 0.0) - 5.0 * t1).abs() < 1e-12);
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod fit;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};

// book chapters run as doctests
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spin.md")]
    mod spin {}
    #[doc = include_str!("../../../book/src/cavity.md")]
    mod cavity {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    mod protocols {}
    #[doc = include_str!("../../../book/src/fitting.md")]
    mod fitting {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
