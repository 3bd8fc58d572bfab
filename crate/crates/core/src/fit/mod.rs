//! Levenberg–Marquardt least squares and the relaxation / Rabi fits.

mod lm;
mod models;

pub use lm::{least_squares, levenberg_marquardt, FitResult, FitWarning, LmOptions};
pub use models::{fit_double_exponential, fit_exponential, fit_purcell_t1, fit_rabi};
