use crate::error::{Error, Result};

use super::angular::{CMatrix, Half};
use super::hamiltonian::SpinSystem;
use super::labels::{labeled_spectrum, LabeledSpectrum, StateLabel};

/// Default central-difference step for df/dB (10 µT).
pub const SLOPE_STEP_T: f64 = 1e-5;

/// An allowed line before its field slope is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionLine {
    pub from: StateLabel,
    pub to: StateLabel,
    pub frequency_hz: f64,
    /// |<from|Sx|to>|
    pub matrix_element: f64,
}

impl TransitionLine {
    /// ΔF·ΔmF, +1 or −1.
    pub fn branch(&self) -> i8 {
        let df = (self.to.f - self.from.f).doubled() / 2;
        let dm = (self.to.mf - self.from.mf).doubled() / 2;
        (df * dm) as i8
    }
}

/// One allowed ESR transition `|F,mF> ↔ |F+1,mF±1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from: StateLabel,
    pub to: StateLabel,
    pub frequency_hz: f64,
    pub matrix_element: f64,
    pub dfdb_hz_per_t: f64,
    pub branch: i8,
}

/// Candidate label pairs obeying ΔF·ΔmF = ±1 between adjacent multiplets.
fn allowed_pairs(system: &SpinSystem) -> Vec<(StateLabel, StateLabel)> {
    let s = system.s();
    let i = system.i();
    let one = Half::from_int(1);
    let mut pairs = Vec::new();
    let mut f = (i - s).abs();
    while f + one <= i + s {
        let upper = f + one;
        let mut mf = -f;
        while mf <= f {
            for to_mf in [mf - one, mf + one] {
                if to_mf.abs() <= upper {
                    pairs.push((StateLabel { f, mf }, StateLabel { f: upper, mf: to_mf }));
                }
            }
            mf = mf + one;
        }
        f = upper;
    }
    pairs
}

fn lines_from_spectrum(system: &SpinSystem, spectrum: &LabeledSpectrum, sx: &CMatrix) -> Vec<TransitionLine> {
    allowed_pairs(system)
        .into_iter()
        .filter_map(|(from, to)| {
            let a = spectrum.index_of(from)?;
            let b = spectrum.index_of(to)?;
            let va = spectrum.states.column(a);
            let vb = spectrum.states.column(b);
            let element = va.dotc(&(sx * vb)).norm();
            Some(TransitionLine {
                from,
                to,
                frequency_hz: (spectrum.energies[b] - spectrum.energies[a]).abs(),
                matrix_element: element,
            })
        })
        .collect()
}

/// Every ΔF·ΔmF = ±1 line at `field_t` (along z), sorted by frequency.
pub fn transition_lines(system: &SpinSystem, field_t: f64) -> Result<Vec<TransitionLine>> {
    let spectrum = labeled_spectrum(system, field_t)?;
    let mut lines = lines_from_spectrum(system, &spectrum, &system.electron_sx());
    lines.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    Ok(lines)
}

fn frequency_of(spectrum: &LabeledSpectrum, from: StateLabel, to: StateLabel) -> Result<f64> {
    match (spectrum.energy(from), spectrum.energy(to)) {
        (Some(a), Some(b)) => Ok((b - a).abs()),
        _ => Err(Error::LabelTracking {
            from,
            to,
            field_t: spectrum.field_t,
        }),
    }
}

/// Finite-difference slope from pre-computed spectra at the stencil points.
struct SlopeStencil {
    step: f64,
    points: Vec<LabeledSpectrum>,
    central: bool,
}

impl SlopeStencil {
    fn new(system: &SpinSystem, b0: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(crate::error::invalid("slope step must be positive"));
        }
        let b0 = b0.abs();
        if b0 >= step {
            Ok(SlopeStencil {
                step,
                points: vec![labeled_spectrum(system, b0 - step)?, labeled_spectrum(system, b0 + step)?],
                central: true,
            })
        } else {
            // second-order one-sided difference near zero field
            Ok(SlopeStencil {
                step,
                points: vec![
                    labeled_spectrum(system, b0)?,
                    labeled_spectrum(system, b0 + step)?,
                    labeled_spectrum(system, b0 + 2.0 * step)?,
                ],
                central: false,
            })
        }
    }

    fn slope(&self, from: StateLabel, to: StateLabel) -> Result<f64> {
        let f: Vec<f64> = self.points.iter().map(|s| frequency_of(s, from, to)).collect::<Result<_>>()?;
        Ok(if self.central {
            (f[1] - f[0]) / (2.0 * self.step)
        } else {
            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * self.step)
        })
    }
}

/// df/dB (Hz/T) of the `from → to` line at |B| = `b0`, by central difference
/// with labels tracked at both stencil points.
pub fn transition_slope(system: &SpinSystem, b0: f64, from: StateLabel, to: StateLabel) -> Result<f64> {
    transition_slope_with_step(system, b0, from, to, SLOPE_STEP_T)
}

pub fn transition_slope_with_step(system: &SpinSystem, b0: f64, from: StateLabel, to: StateLabel, step_t: f64) -> Result<f64> {
    SlopeStencil::new(system, b0, step_t)?.slope(from, to)
}

/// All ΔF·ΔmF = ±1 transitions at `b0` with |<Sx>| ≥ `min_matrix_element`,
/// sorted by frequency.
pub fn transition_table(system: &SpinSystem, b0: f64, min_matrix_element: f64) -> Result<Vec<Transition>> {
    let lines: Vec<TransitionLine> = transition_lines(system, b0)?
        .into_iter()
        .filter(|l| l.matrix_element >= min_matrix_element)
        .collect();
    if lines.is_empty() {
        return Ok(Vec::new());
    }
    let stencil = SlopeStencil::new(system, b0, SLOPE_STEP_T)?;
    lines
        .into_iter()
        .map(|l| {
            Ok(Transition {
                from: l.from,
                to: l.to,
                frequency_hz: l.frequency_hz,
                matrix_element: l.matrix_element,
                dfdb_hz_per_t: stencil.slope(l.from, l.to)?,
                branch: l.branch(),
            })
        })
        .collect()
}
