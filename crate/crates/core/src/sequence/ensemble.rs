use crate::error::{invalid, Result};

use super::line::SpectralLine;
use super::pulse::{DetectionPair, PulseSpec};

/// Default number of detuning grid points.
pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Grid points per narrowest spectral feature.
const POINTS_PER_FEATURE: f64 = 8.0;

/// Longitudinal polarization over a detuning grid. `sz = +1` is thermal
/// equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    grid: Vec<f64>,
    density: Vec<f64>,
    sz: Vec<f64>,
}

impl EnsembleState {
    pub fn new(grid: Vec<f64>, density: Vec<f64>, sz: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != density.len() || grid.len() != sz.len() {
            return Err(invalid("grid, density and sz need equal length of at least 2"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(invalid("detuning grid must be finite and strictly increasing"));
        }
        if density.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(invalid("density must be finite and non-negative"));
        }
        if sz.iter().any(|s| !(s.abs() <= 1.0)) {
            return Err(invalid("|sz| must not exceed 1"));
        }
        Ok(EnsembleState { grid, density, sz })
    }

    /// Thermal ensemble on a uniform grid over the line extent, with at least
    /// `min_points` points and eight points per `feature_hz`.
    pub fn thermal(line: &SpectralLine, feature_hz: f64, min_points: usize) -> Result<Self> {
        if !(feature_hz > 0.0) {
            return Err(invalid("grid feature size must be positive"));
        }
        let (lo, hi) = line.extent();
        let needed = ((hi - lo) / (feature_hz / POINTS_PER_FEATURE)).ceil() as usize + 1;
        let n = min_points.max(needed).max(2);
        let step = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
        let density = grid.iter().map(|&d| line.density(d)).collect();
        Ok(EnsembleState {
            sz: vec![1.0; n],
            grid,
            density,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn sz(&self) -> &[f64] {
        &self.sz
    }

    /// Applies `pulse` through a cavity of linewidth `kappa`.
    pub fn apply_pulse(&self, pulse: &PulseSpec, kappa: f64) -> EnsembleState {
        let sz = self
            .grid
            .iter()
            .zip(&self.sz)
            .map(|(&d, &s)| s * pulse.sz_factor(kappa, d))
            .collect();
        EnsembleState { sz, ..self.clone() }
    }

    /// Relaxation toward +1 for `duration` at rate `rate_of_delta(δ)` (s⁻¹).
    pub fn relax(&self, duration: f64, rate_of_delta: impl Fn(f64) -> f64) -> EnsembleState {
        if duration == 0.0 {
            return self.clone();
        }
        let exposure: Vec<f64> = self.grid.iter().map(|&d| rate_of_delta(d) * duration).collect();
        self.relax_exposure(&exposure)
    }

    /// Relaxation with an accumulated ∫Γ dt per grid point.
    pub fn relax_exposure(&self, exposure: &[f64]) -> EnsembleState {
        let sz = self
            .sz
            .iter()
            .zip(exposure)
            .map(|(&s, &e)| if e == 0.0 { s } else { 1.0 - (1.0 - s) * (-e).exp() })
            .collect();
        EnsembleState { sz, ..self.clone() }
    }

    /// Echo quadrature, normalized so a thermal ensemble gives +1.
    pub fn echo_amplitude(&self, detect: &DetectionPair, kappa: f64) -> f64 {
        self.weighted_mean(|d| detect.weight(kappa, d))
    }

    /// Echo amplitude with the spins shifted by −`offset_hz`, which reads the
    /// polarization near δ = `offset_hz`.
    pub fn polarization_at(&self, detect: &DetectionPair, kappa: f64, offset_hz: f64) -> f64 {
        self.weighted_mean(|d| detect.weight(kappa, d - offset_hz))
    }

    fn weighted_mean(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..self.grid.len() - 1 {
            let h = 0.5 * (self.grid[k + 1] - self.grid[k]);
            let w0 = self.density[k] * weight(self.grid[k]);
            let w1 = self.density[k + 1] * weight(self.grid[k + 1]);
            num += h * (w0 * self.sz[k] + w1 * self.sz[k + 1]);
            den += h * (w0 + w1);
        }
        if den.abs() < f64::MIN_POSITIVE {
            0.0
        } else {
            num / den
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> EnsembleState {
        let line = SpectralLine::strain_doublet(2e6, 4e6, 2e6).unwrap();
        EnsembleState::thermal(&line, 23e3, DEFAULT_GRID_POINTS).unwrap()
    }

    #[test]
    fn thermal_and_inverted_readout() {
        let s = state();
        let det = DetectionPair::hahn(1e-4);
        assert!((s.echo_amplitude(&det, 23e3) - 1.0).abs() < 1e-12);
        let flipped = EnsembleState::new(s.grid().to_vec(), s.density().to_vec(), vec![-1.0; s.grid().len()]).unwrap();
        assert!((flipped.echo_amplitude(&det, 23e3) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_hole_is_seen_by_narrowband_readout() {
        let s = state();
        let kappa = 23e3;
        let sz = s
            .grid()
            .iter()
            .map(|&d| if d.abs() <= kappa / 4.0 { -1.0 } else { 1.0 })
            .collect();
        let holed = EnsembleState::new(s.grid().to_vec(), s.density().to_vec(), sz).unwrap();
        assert!(holed.echo_amplitude(&DetectionPair::hahn(1e-4), kappa) < 0.0);
    }

    #[test]
    fn half_recovery() {
        let t = state();
        let s = EnsembleState::new(t.grid().to_vec(), t.density().to_vec(), vec![-1.0; t.grid().len()]).unwrap();
        let r = s.relax(std::f64::consts::LN_2, |_| 1.0);
        assert!(r.sz().iter().all(|v| v.abs() < 1e-12));
        assert_eq!(s.relax(0.0, |_| 1.0), s);
    }

    #[test]
    fn grid_refines_to_feature() {
        let line = SpectralLine::gaussian(0.0, 2e6).unwrap();
        let s = EnsembleState::thermal(&line, 1e3, 10).unwrap();
        let step = s.grid()[1] - s.grid()[0];
        assert!(step <= 1e3 / 8.0 + 1e-9);
    }

    #[test]
    fn rejects_invalid_state() {
        assert!(EnsembleState::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(EnsembleState::new(vec![0.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]).is_err());
        assert!(EnsembleState::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.5, 1.0]).is_err());
    }
}
