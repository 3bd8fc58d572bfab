//! Electro-nuclear spin Hamiltonian of a donor, its spectrum, and the
//! allowed ESR transitions at low field.

mod angular;
mod coupling;
mod eigen;
mod hamiltonian;
mod labels;
mod transitions;

pub use angular::{angular_momentum_operators, kron, projections, CMatrix, Half, SpinOperators, C64};
pub use coupling::{clebsch_gordan, coupled_basis};
pub use eigen::{eigensolve, eigensolve_with, EigenSolution, JacobiOptions};
pub use hamiltonian::{build_hamiltonian, SpinSystem, BISMUTH_A_HZ, BISMUTH_GAMMA_N_HZ_PER_T, ELECTRON_GAMMA_HZ_PER_T};
pub use labels::{label_states, labeled_spectrum, LabelOptions, LabeledSpectrum, StateLabel};
pub use transitions::{
    transition_lines, transition_slope, transition_slope_with_step, transition_table, Transition, TransitionLine, SLOPE_STEP_T,
};
