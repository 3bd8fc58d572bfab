use std::f64::consts::PI;

use crate::error::{ensure_finite, invalid, Result};

/// Default bandwidth of a plain saturation pulse (Hz).
pub const DEFAULT_SATURATION_BANDWIDTH_HZ: f64 = 250e3;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Spectral amplitude of a square pulse of length `t_p` after filtering by a
/// cavity of linewidth `kappa`, at `offset_hz` from resonance. Unity at zero.
pub fn pulse_response(t_p: f64, kappa: f64, offset_hz: f64) -> f64 {
    let x = offset_hz / kappa;
    sinc(PI * offset_hz * t_p) / (1.0 + 4.0 * x * x)
}

/// Response at cavity detuning `delta` for a carrier at `carrier` (both from
/// the cavity frequency): sinc about the carrier, Lorentzian about the cavity.
pub(crate) fn filtered_response(t_p: f64, kappa: f64, delta: f64, carrier: f64) -> f64 {
    let x = delta / kappa;
    sinc(PI * (delta - carrier) * t_p) / (1.0 + 4.0 * x * x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseKind {
    Pi,
    PiHalf,
    /// Incoherent saturation of a rectangular window centred on the carrier.
    Saturation {
        bandwidth_hz: f64,
    },
}

/// How the drive acts across the line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PulseProfile {
    /// Nutation angle φ_nom·R(δ) with R the cavity-filtered pulse response.
    #[default]
    CavityFiltered,
    /// Exact rotation by an unfiltered square pulse about the tilted
    /// effective field.
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub duration_s: f64,
    pub kind: PulseKind,
    /// Carrier detuning from the cavity (Hz).
    pub carrier_offset_hz: f64,
    /// 1.0 is the calibrated amplitude for `kind` at this duration.
    pub amplitude_scale: f64,
    pub profile: PulseProfile,
    /// Half-width of a uniform relative B1 spread; 0 disables it.
    pub b1_spread: f64,
}

impl PulseSpec {
    fn with_kind(duration_s: f64, kind: PulseKind) -> Self {
        PulseSpec {
            duration_s,
            kind,
            carrier_offset_hz: 0.0,
            amplitude_scale: 1.0,
            profile: PulseProfile::CavityFiltered,
            b1_spread: 0.0,
        }
    }

    pub fn pi(duration_s: f64) -> Self {
        PulseSpec::with_kind(duration_s, PulseKind::Pi)
    }

    pub fn pi_half(duration_s: f64) -> Self {
        PulseSpec::with_kind(duration_s, PulseKind::PiHalf)
    }

    pub fn saturation(duration_s: f64, bandwidth_hz: f64) -> Self {
        PulseSpec::with_kind(duration_s, PulseKind::Saturation { bandwidth_hz })
    }

    pub fn with_profile(self, profile: PulseProfile) -> Self {
        PulseSpec { profile, ..self }
    }

    pub fn with_carrier(self, carrier_offset_hz: f64) -> Self {
        PulseSpec {
            carrier_offset_hz,
            ..self
        }
    }

    pub fn with_amplitude(self, amplitude_scale: f64) -> Self {
        PulseSpec { amplitude_scale, ..self }
    }

    pub fn with_b1_spread(self, b1_spread: f64) -> Self {
        PulseSpec { b1_spread, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("pulse duration", self.duration_s)?;
        ensure_finite("carrier offset", self.carrier_offset_hz)?;
        ensure_finite("amplitude scale", self.amplitude_scale)?;
        ensure_finite("B1 spread", self.b1_spread)?;
        if self.duration_s <= 0.0 {
            return Err(invalid("pulse duration must be positive"));
        }
        if !(0.0..1.0).contains(&self.b1_spread) {
            return Err(invalid("B1 spread must lie in [0, 1)"));
        }
        if let PulseKind::Saturation { bandwidth_hz } = self.kind {
            ensure_finite("saturation bandwidth", bandwidth_hz)?;
            if bandwidth_hz <= 0.0 {
                return Err(invalid("saturation bandwidth must be positive"));
            }
        }
        Ok(())
    }

    /// Nominal on-resonance nutation angle (rad); zero for saturation.
    pub fn nominal_angle(&self) -> f64 {
        let base = match self.kind {
            PulseKind::Pi => PI,
            PulseKind::PiHalf => PI / 2.0,
            PulseKind::Saturation { .. } => 0.0,
        };
        base * self.amplitude_scale
    }

    /// Smallest spectral feature the pulse resolves (Hz).
    pub(crate) fn feature_hz(&self, kappa: f64) -> f64 {
        let own = match self.kind {
            PulseKind::Saturation { bandwidth_hz } => bandwidth_hz,
            _ => 1.0 / self.duration_s,
        };
        own.min(kappa)
    }

    /// Factor multiplying sz at cavity detuning `delta`.
    pub(crate) fn sz_factor(&self, kappa: f64, delta: f64) -> f64 {
        if let PulseKind::Saturation { bandwidth_hz } = self.kind {
            return if (delta - self.carrier_offset_hz).abs() <= bandwidth_hz / 2.0 {
                0.0
            } else {
                1.0
            };
        }
        let phi = self.nominal_angle();
        match self.profile {
            PulseProfile::CavityFiltered => {
                let angle = phi * filtered_response(self.duration_s, kappa, delta, self.carrier_offset_hz);
                // mean of cos(angle·(1+u)) for u uniform in ±b1_spread
                angle.cos() * sinc(angle * self.b1_spread)
            }
            PulseProfile::Rectangular => {
                if self.b1_spread == 0.0 {
                    return self.rectangular_factor(phi, delta);
                }
                const NODES: usize = 32;
                (0..NODES)
                    .map(|k| {
                        let u = self.b1_spread * (2.0 * (k as f64 + 0.5) / NODES as f64 - 1.0);
                        self.rectangular_factor(phi * (1.0 + u), delta)
                    })
                    .sum::<f64>()
                    / NODES as f64
            }
        }
    }

    fn rectangular_factor(&self, phi: f64, delta: f64) -> f64 {
        let rabi = phi / (2.0 * PI * self.duration_s);
        let detuning = delta - self.carrier_offset_hz;
        let eff2 = rabi * rabi + detuning * detuning;
        if eff2 == 0.0 {
            return 1.0;
        }
        let s = (PI * eff2.sqrt() * self.duration_s).sin();
        1.0 - 2.0 * rabi * rabi / eff2 * s * s
    }
}

/// The π/2 and refocusing π pulse of a Hahn-echo readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionPair {
    pub pi_half: PulseSpec,
    pub pi: PulseSpec,
}

impl DetectionPair {
    /// π/2 of length `t_pi / 2` followed by a π of length `t_pi`.
    pub fn hahn(t_pi: f64) -> Self {
        DetectionPair {
            pi_half: PulseSpec::pi_half(t_pi / 2.0),
            pi: PulseSpec::pi(t_pi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pi_half.validate()?;
        self.pi.validate()
    }

    /// Spectral weight of a spin at cavity detuning `delta` in the echo.
    pub(crate) fn weight(&self, kappa: f64, delta: f64) -> f64 {
        filtered_response(self.pi.duration_s, kappa, delta, self.pi.carrier_offset_hz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_is_unity_at_resonance() {
        assert_eq!(pulse_response(1e-4, 23e3, 0.0), 1.0);
        assert!((pulse_response(1e-4, 23e3, 1e-9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn narrowband_half_amplitude_width() {
        // bisect for R = 1/2
        let (mut lo, mut hi) = (0.0, 2e4);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if pulse_response(1e-4, 23e3, mid) > 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let full = 2.0 * lo;
        assert!((full - 10e3).abs() < 1e3, "{full}");
    }

    #[test]
    fn short_pulse_follows_cavity() {
        let kappa = 23e3;
        let worst = (0..=600)
            .map(|k| {
                let f = -3.0 * kappa + k as f64 * 0.01 * kappa;
                let bare = 1.0 / (1.0 + 4.0 * (f / kappa).powi(2));
                (pulse_response(5e-6, kappa, f) - bare).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.02, "{worst}");
    }

    #[test]
    fn calibrated_pulses() {
        let pi = PulseSpec::pi(5e-6);
        assert!((pi.sz_factor(23e3, 0.0) + 1.0).abs() < 1e-15);
        assert!((pi.with_profile(PulseProfile::Rectangular).sz_factor(23e3, 0.0) + 1.0).abs() < 1e-12);
        assert_eq!(pi.with_amplitude(0.0).sz_factor(23e3, 1e3), 1.0);
        assert!(PulseSpec::pi_half(5e-6).sz_factor(23e3, 0.0).abs() < 1e-15);
    }

    #[test]
    fn half_response_point_zeroes_sz() {
        // R = 1/2 on the Lorentzian of a short pulse: delta = kappa/2 with sinc ≈ 1
        let pi = PulseSpec::pi(1e-9);
        assert!(pi.sz_factor(23e3, 11.5e3).abs() < 1e-6);
    }

    #[test]
    fn saturation_window() {
        let sat = PulseSpec::saturation(1.0, 250e3).with_carrier(1e6);
        assert_eq!(sat.sz_factor(23e3, 1e6 + 124e3), 0.0);
        assert_eq!(sat.sz_factor(23e3, 1e6 + 126e3), 1.0);
    }

    #[test]
    fn b1_spread_softens_inversion() {
        let pi = PulseSpec::pi(5e-6).with_b1_spread(0.02);
        let f = pi.sz_factor(23e3, 0.0);
        assert!(f > -1.0 && f < -0.998, "{f}");
        let r = pi.with_profile(PulseProfile::Rectangular).sz_factor(23e3, 0.0);
        assert!((r - f).abs() < 1e-4);
    }

    #[test]
    fn validation() {
        assert!(PulseSpec::pi(0.0).validate().is_err());
        assert!(PulseSpec::saturation(1.0, -1.0).validate().is_err());
        assert!(PulseSpec::pi(1e-6).with_b1_spread(1.5).validate().is_err());
    }
}
