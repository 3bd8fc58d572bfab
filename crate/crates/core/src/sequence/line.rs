use std::f64::consts::{LN_2, PI};

use crate::error::{ensure_finite, invalid, Result};

/// Half-width of the simulated detuning window, in component FWHMs.
pub const LINE_EXTENT_FWHM: f64 = 5.0;

/// One Gaussian component of an inhomogeneous line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineComponent {
    pub center_hz: f64,
    pub fwhm_hz: f64,
    pub weight: f64,
}

/// Normalized spectral density of spin detunings from the cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralLine {
    components: Vec<LineComponent>,
}

impl SpectralLine {
    /// Weights are rescaled to sum to one.
    pub fn new(components: Vec<LineComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("spectral line needs at least one component"));
        }
        for c in &components {
            ensure_finite("line center", c.center_hz)?;
            ensure_finite("line fwhm", c.fwhm_hz)?;
            ensure_finite("line weight", c.weight)?;
            if c.fwhm_hz <= 0.0 || c.weight <= 0.0 {
                return Err(invalid("line components need positive fwhm and weight"));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        let components = components
            .into_iter()
            .map(|c| LineComponent {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(SpectralLine { components })
    }

    pub fn gaussian(center_hz: f64, fwhm_hz: f64) -> Result<Self> {
        SpectralLine::new(vec![LineComponent {
            center_hz,
            fwhm_hz,
            weight: 1.0,
        }])
    }

    /// Two equal Gaussians at `center ± splitting/2`.
    pub fn strain_doublet(center_hz: f64, splitting_hz: f64, fwhm_hz: f64) -> Result<Self> {
        let half = splitting_hz / 2.0;
        SpectralLine::new(vec![
            LineComponent {
                center_hz: center_hz - half,
                fwhm_hz,
                weight: 1.0,
            },
            LineComponent {
                center_hz: center_hz + half,
                fwhm_hz,
                weight: 1.0,
            },
        ])
    }

    pub fn components(&self) -> &[LineComponent] {
        &self.components
    }

    /// Density (1/Hz) at detuning `delta_hz`.
    pub fn density(&self, delta_hz: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let sigma = c.fwhm_hz / (2.0 * (2.0 * LN_2).sqrt());
                let z = (delta_hz - c.center_hz) / sigma;
                c.weight * (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
            })
            .sum()
    }

    /// Detuning window covering every component to ±5 FWHM.
    pub fn extent(&self) -> (f64, f64) {
        self.components
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                let w = LINE_EXTENT_FWHM * c.fwhm_hz;
                (lo.min(c.center_hz - w), hi.max(c.center_hz + w))
            })
    }

    /// The same line moved by `shift_hz`.
    pub fn shifted(&self, shift_hz: f64) -> Self {
        SpectralLine {
            components: self
                .components
                .iter()
                .map(|c| LineComponent {
                    center_hz: c.center_hz + shift_hz,
                    ..*c
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doublet_integrates_to_one() {
        let line = SpectralLine::strain_doublet(0.0, 4e6, 2e6).unwrap();
        let (lo, hi) = line.extent();
        let n = 20_001;
        let h = (hi - lo) / (n - 1) as f64;
        let total: f64 = (0..n)
            .map(|k| {
                let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                w * line.density(lo + h * k as f64)
            })
            .sum::<f64>()
            * h;
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn fwhm_is_respected() {
        let line = SpectralLine::gaussian(1e6, 2e6).unwrap();
        let peak = line.density(1e6);
        assert!((line.density(2e6) / peak - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_components() {
        assert!(SpectralLine::gaussian(0.0, 0.0).is_err());
        assert!(SpectralLine::new(vec![]).is_err());
        assert!(SpectralLine::gaussian(f64::NAN, 1.0).is_err());
    }
}
