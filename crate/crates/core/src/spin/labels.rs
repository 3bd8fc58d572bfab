use std::fmt;

use nalgebra::DVector;

use crate::error::{ensure_finite, Error, Result};

use super::angular::{CMatrix, Half, C64};
use super::coupling::coupled_basis;
use super::eigen::{eigensolve, EigenSolution};
use super::hamiltonian::{build_hamiltonian, SpinSystem};

/// Total angular momentum `F` and its projection `mF` on the field axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateLabel {
    pub f: Half,
    pub mf: Half,
}

impl StateLabel {
    pub const fn new(f: i32, mf: i32) -> Self {
        StateLabel {
            f: Half::from_int(f),
            mf: Half::from_int(mf),
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}>", self.f, self.mf)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LabelOptions {
    /// Upper field bound for the |F, mF> description (T).
    pub max_field_t: f64,
    /// Smallest accepted squared overlap with the assigned zero-field state.
    pub min_overlap: f64,
    /// Eigenvalues closer than this fraction of ‖H‖ are treated as degenerate.
    pub degeneracy_rel_tol: f64,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            max_field_t: 0.05,
            min_overlap: 0.5,
            degeneracy_rel_tol: 1e-9,
        }
    }
}

/// Eigen-decomposition with an (F, mF) label for every state.
#[derive(Clone, Debug)]
pub struct LabeledSpectrum {
    pub field_t: f64,
    pub energies: Vec<f64>,
    pub states: CMatrix,
    pub labels: Vec<StateLabel>,
    /// Squared overlap of each state with its zero-field partner.
    pub overlaps: Vec<f64>,
}

impl LabeledSpectrum {
    pub fn index_of(&self, label: StateLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn energy(&self, label: StateLabel) -> Option<f64> {
        self.index_of(label).map(|k| self.energies[k])
    }

    pub fn state(&self, label: StateLabel) -> Option<DVector<C64>> {
        self.index_of(label).map(|k| self.states.column(k).into_owned())
    }
}

/// Builds, diagonalizes and labels the Hamiltonian for a field of
/// `field_t` tesla along z.
pub fn labeled_spectrum(system: &SpinSystem, field_t: f64) -> Result<LabeledSpectrum> {
    let h = build_hamiltonian(system, [0.0, 0.0, field_t])?;
    let eig = eigensolve(&h)?;
    label_states(&eig, system, field_t, LabelOptions::default())
}

/// Assigns each eigenvector the (F, mF) of the zero-field state it overlaps
/// most. Degenerate eigenspaces are first rotated onto projections of the
/// zero-field states so that the assignment is well defined.
pub fn label_states(eig: &EigenSolution, system: &SpinSystem, field_t: f64, options: LabelOptions) -> Result<LabeledSpectrum> {
    ensure_finite("field", field_t)?;
    if field_t.abs() > options.max_field_t {
        return Err(Error::FieldTooHigh {
            field_t,
            bound_t: options.max_field_t,
        });
    }
    let dim = system.dim();
    if eig.states.nrows() != dim || eig.energies.len() != dim {
        return Err(crate::error::invalid(format!(
            "eigen-solution has dimension {} but the spin system needs {dim}",
            eig.states.nrows()
        )));
    }

    let basis = coupled_basis(system);
    let mut states = eig.states.clone();

    let scale = eig.energies.iter().fold(0.0f64, |m, e| m.max(e.abs())).max(1.0);
    let tol = options.degeneracy_rel_tol * scale;
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eig.energies[end] - eig.energies[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            align_degenerate_block(&mut states, start, end, &basis);
        }
        start = end;
    }

    let mut labels = Vec::with_capacity(dim);
    let mut overlaps = Vec::with_capacity(dim);
    for k in 0..dim {
        let col = states.column(k);
        let (best, weight) = basis
            .iter()
            .map(|(label, z)| (*label, z.dotc(&col).norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty basis");
        if weight < options.min_overlap {
            return Err(Error::AmbiguousLabel {
                field_t,
                detail: format!("state {k} overlaps {best} by only {weight:.3}"),
            });
        }
        labels.push(best);
        overlaps.push(weight);
    }

    let mut sorted = labels.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::AmbiguousLabel {
            field_t,
            detail: format!("label {} assigned twice", w[0]),
        });
    }

    Ok(LabeledSpectrum {
        field_t,
        energies: eig.energies.clone(),
        states,
        labels,
        overlaps,
    })
}

/// Replaces columns `start..end` (a degenerate eigenspace) by the normalized
/// projections of the zero-field states with the largest weight in it,
/// Gram–Schmidt orthonormalized.
fn align_degenerate_block(states: &mut CMatrix, start: usize, end: usize, basis: &[(StateLabel, DVector<C64>)]) {
    let block = states.columns(start, end - start).into_owned();
    let mut ranked: Vec<(f64, DVector<C64>)> = basis
        .iter()
        .map(|(_, z)| {
            let coeffs = block.adjoint() * z;
            (coeffs.norm_squared(), &block * coeffs)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut chosen: Vec<DVector<C64>> = Vec::with_capacity(end - start);
    for (_, mut v) in ranked {
        if chosen.len() == end - start {
            break;
        }
        for u in &chosen {
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            chosen.push(v / C64::new(norm, 0.0));
        }
    }
    if chosen.len() == end - start {
        for (offset, v) in chosen.into_iter().enumerate() {
            states.set_column(start + offset, &v);
        }
    }
}
