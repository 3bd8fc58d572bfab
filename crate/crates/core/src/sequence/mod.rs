//! Pulse protocols over an inhomogeneously broadened spin ensemble.
//!
//! The ensemble is a grid of detunings δ from the cavity, each carrying a
//! line density and a longitudinal polarization. Pulses rescale the
//! polarization, relaxation pulls it toward +1 at the Purcell rate of its
//! detuning, and the echo reads a spectrally weighted mean.

mod ensemble;
mod fieldsweep;
mod line;
mod protocols;
mod pulse;

pub use ensemble::{EnsembleState, DEFAULT_GRID_POINTS};
pub use fieldsweep::{field_sweep_spectrum, FieldSweep, TransitionContribution};
pub use line::{LineComponent, SpectralLine, LINE_EXTENT_FWHM};
pub use protocols::{
    add_gaussian_noise, simulate_rabi, DecayCurve, FieldPulse, InversionRecovery, SaturationRecovery, SaturationScheme,
};
pub use pulse::{pulse_response, DetectionPair, PulseKind, PulseProfile, PulseSpec, DEFAULT_SATURATION_BANDWIDTH_HZ};
