use std::f64::consts::PI;

use crate::cavity::Resonator;
use crate::error::{invalid, Result};
use crate::spin::{transition_lines, SpinSystem, StateLabel};

use super::line::SpectralLine;

/// Quadrature nodes across the cavity Lorentzian.
const LORENTZ_NODES: usize = 401;
/// Half-width of the Lorentzian quadrature window, in linewidths.
const LORENTZ_SPAN: f64 = 50.0;

/// Echo-detected field sweep and the share of each transition in it.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSweep {
    pub fields_t: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub contributions: Vec<TransitionContribution>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionContribution {
    pub from: StateLabel,
    pub to: StateLabel,
    /// One value per field point.
    pub amplitudes: Vec<f64>,
}

impl FieldSweep {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.fields_t.iter().copied().zip(self.amplitudes.iter().copied())
    }
}

/// For each field, Σ ⟨Sx⟩² × overlap of the transition's strain line
/// (`line_shape` centred on the transition frequency) with the cavity
/// Lorentzian.
pub fn field_sweep_spectrum(
    system: &SpinSystem,
    line_shape: &SpectralLine,
    resonator: &Resonator,
    fields_t: &[f64],
) -> Result<FieldSweep> {
    if fields_t.is_empty() {
        return Err(invalid("field sweep needs at least one field"));
    }
    let omega0 = resonator.omega0();
    let kappa = resonator.kappa();
    let h = 2.0 * LORENTZ_SPAN * kappa / (LORENTZ_NODES - 1) as f64;
    let nodes: Vec<(f64, f64)> = (0..LORENTZ_NODES)
        .map(|k| {
            let x = -LORENTZ_SPAN * kappa + h * k as f64;
            let lorentz = (kappa / (2.0 * PI)) / (x * x + kappa * kappa / 4.0);
            let w = if k == 0 || k == LORENTZ_NODES - 1 { 0.5 } else { 1.0 };
            (x, w * h * lorentz)
        })
        .collect();
    let norm: f64 = nodes.iter().map(|n| n.1).sum();

    let mut contributions: Vec<TransitionContribution> = Vec::new();
    for (k, &b) in fields_t.iter().enumerate() {
        for line in transition_lines(system, b)? {
            let slot = match contributions.iter().position(|c| c.from == line.from && c.to == line.to) {
                Some(i) => i,
                None => {
                    contributions.push(TransitionContribution {
                        from: line.from,
                        to: line.to,
                        amplitudes: vec![0.0; fields_t.len()],
                    });
                    contributions.len() - 1
                }
            };
            // spins of this transition sit at detuning f_line + δ_strain from the cavity
            let offset = omega0 - line.frequency_hz;
            let overlap: f64 = nodes.iter().map(|&(x, w)| w * line_shape.density(offset + x)).sum::<f64>() / norm;
            contributions[slot].amplitudes[k] = line.matrix_element.powi(2) * overlap;
        }
    }
    let amplitudes = (0..fields_t.len())
        .map(|k| contributions.iter().map(|c| c.amplitudes[k]).sum())
        .collect();
    Ok(FieldSweep {
        fields_t: fields_t.to_vec(),
        amplitudes,
        contributions,
    })
}
