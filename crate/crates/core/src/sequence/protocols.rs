use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::cavity::{mean_photon_number, purcell_rate, rabi_frequency, Resonator};
use crate::error::{ensure_finite, invalid, Result};

use super::ensemble::{EnsembleState, DEFAULT_GRID_POINTS};
use super::line::SpectralLine;
use super::pulse::{DetectionPair, PulseSpec, DEFAULT_SATURATION_BANDWIDTH_HZ};

/// Quadrature intervals per field-pulse edge (even, for Simpson's rule).
const EDGE_STEPS: usize = 100;

/// Echo amplitude sampled against recovery time.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl DecayCurve {
    pub fn new(times: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if times.len() != amplitudes.len() {
            return Err(invalid("times and amplitudes differ in length"));
        }
        if times.iter().chain(&amplitudes).any(|v| !v.is_finite()) {
            return Err(invalid("decay curve values must be finite"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times must be strictly increasing"));
        }
        Ok(DecayCurve { times, amplitudes })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.amplitudes.iter().copied())
    }

    /// Adds independent Gaussian noise of standard deviation `sigma`.
    pub fn with_noise<R: Rng + ?Sized>(mut self, sigma: f64, rng: &mut R) -> Result<Self> {
        add_gaussian_noise(&mut self.amplitudes, sigma, rng)?;
        Ok(self)
    }
}

pub fn add_gaussian_noise<R: Rng + ?Sized>(values: &mut [f64], sigma: f64, rng: &mut R) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| invalid(format!("noise sigma: {e}")))?;
    for v in values {
        *v += normal.sample(rng);
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(invalid("recovery times must be finite and non-negative"));
    }
    Ok(())
}

fn check_rates(g_hz: f64, gamma_nr: f64) -> Result<()> {
    ensure_finite("g", g_hz)?;
    if !(gamma_nr >= 0.0) {
        return Err(invalid("gamma_nr must be non-negative"));
    }
    Ok(())
}

/// π pulse, wait T, Hahn-echo readout.
#[derive(Clone, Debug, PartialEq)]
pub struct InversionRecovery {
    pub line: SpectralLine,
    pub resonator: Resonator,
    pub g_hz: f64,
    /// Non-radiative rate (s⁻¹); may be infinite.
    pub gamma_nr: f64,
    pub invert: PulseSpec,
    pub detect: DetectionPair,
    pub grid_points: usize,
}

impl InversionRecovery {
    pub fn new(
        line: SpectralLine,
        resonator: Resonator,
        g_hz: f64,
        gamma_nr: f64,
        invert: PulseSpec,
        detect: DetectionPair,
    ) -> Self {
        InversionRecovery {
            line,
            resonator,
            g_hz,
            gamma_nr,
            invert,
            detect,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    /// State right after the inversion pulse.
    pub fn prepared_state(&self) -> Result<EnsembleState> {
        check_rates(self.g_hz, self.gamma_nr)?;
        self.invert.validate()?;
        self.detect.validate()?;
        let kappa = self.resonator.kappa();
        let feature = self
            .invert
            .feature_hz(kappa)
            .min(self.detect.pi.feature_hz(kappa))
            .min(self.detect.pi_half.feature_hz(kappa));
        Ok(EnsembleState::thermal(&self.line, feature, self.grid_points)?.apply_pulse(&self.invert, kappa))
    }

    pub fn simulate(&self, times: &[f64]) -> Result<DecayCurve> {
        check_times(times)?;
        let state = self.prepared_state()?;
        let kappa = self.resonator.kappa();
        let rate = |d: f64| purcell_rate(self.g_hz, kappa, d) + self.gamma_nr;
        let amplitudes = times
            .iter()
            .map(|&t| state.relax(t, rate).echo_amplitude(&self.detect, kappa))
            .collect();
        DecayCurve::new(times.to_vec(), amplitudes)
    }
}

/// How the line is saturated before recovery.
#[derive(Clone, Debug, PartialEq)]
pub enum SaturationScheme {
    /// One long pulse saturating a rectangular window.
    Plain { bandwidth_hz: f64, carrier_offset_hz: f64 },
    /// A saturation window repeated while the field steps through
    /// `field_steps_t`; each step moves the line by dfdB·B.
    Swept { field_steps_t: Vec<f64>, bandwidth_hz: f64 },
}

impl Default for SaturationScheme {
    fn default() -> Self {
        SaturationScheme::Plain {
            bandwidth_hz: DEFAULT_SATURATION_BANDWIDTH_HZ,
            carrier_offset_hz: 0.0,
        }
    }
}

impl SaturationScheme {
    /// Field steps whose windows tile the whole line extent.
    pub fn swept_over(line: &SpectralLine, dfdb_hz_per_t: f64, bandwidth_hz: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0) || dfdb_hz_per_t == 0.0 || !dfdb_hz_per_t.is_finite() {
            return Err(invalid("swept saturation needs a positive bandwidth and nonzero slope"));
        }
        let (lo, hi) = line.extent();
        let pitch = 0.9 * bandwidth_hz;
        let n = ((hi - lo) / pitch).ceil() as usize + 1;
        let field_steps_t = (0..n).map(|k| -(lo + pitch * k as f64) / dfdb_hz_per_t).collect();
        Ok(SaturationScheme::Swept {
            field_steps_t,
            bandwidth_hz,
        })
    }

    fn validate(&self, line: &SpectralLine, dfdb_hz_per_t: f64) -> Result<()> {
        match self {
            SaturationScheme::Plain {
                bandwidth_hz,
                carrier_offset_hz,
            } => {
                ensure_finite("saturation carrier", *carrier_offset_hz)?;
                if !(*bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
                    return Err(invalid("saturation bandwidth must be positive"));
                }
            }
            SaturationScheme::Swept {
                field_steps_t,
                bandwidth_hz,
            } => {
                if !(*bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
                    return Err(invalid("saturation bandwidth must be positive"));
                }
                if field_steps_t.is_empty() {
                    return Err(invalid("swept saturation needs at least one field step"));
                }
                let (lo, hi) = line.extent();
                for &b in field_steps_t {
                    let centre = -dfdb_hz_per_t * b;
                    if !(centre >= lo - bandwidth_hz && centre <= hi + bandwidth_hz) {
                        return Err(invalid(format!(
                            "field step {b} T moves the window to {centre} Hz, outside the line span [{lo}, {hi}] Hz plus guard {bandwidth_hz} Hz"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn saturates(&self, delta: f64, dfdb_hz_per_t: f64) -> bool {
        match self {
            SaturationScheme::Plain {
                bandwidth_hz,
                carrier_offset_hz,
            } => (delta - carrier_offset_hz).abs() <= bandwidth_hz / 2.0,
            SaturationScheme::Swept {
                field_steps_t,
                bandwidth_hz,
            } => field_steps_t
                .iter()
                .any(|&b| (delta + dfdb_hz_per_t * b).abs() <= bandwidth_hz / 2.0),
        }
    }

    fn bandwidth(&self) -> f64 {
        match self {
            SaturationScheme::Plain { bandwidth_hz, .. } | SaturationScheme::Swept { bandwidth_hz, .. } => *bandwidth_hz,
        }
    }
}

/// Field pulse detuning the spins during recovery, with first-order coil
/// edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPulse {
    pub amplitude_t: f64,
    /// Coil bandwidth; the edge time constant is 1/(2π·bandwidth).
    pub bandwidth_hz: f64,
    /// Settling time before and after the plateau.
    pub buffer_s: f64,
}

impl FieldPulse {
    pub fn new(amplitude_t: f64, bandwidth_hz: f64, buffer_s: f64) -> Result<Self> {
        ensure_finite("field pulse amplitude", amplitude_t)?;
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(invalid("coil bandwidth must be positive"));
        }
        if !(buffer_s >= 0.0 && buffer_s.is_finite()) {
            return Err(invalid("buffer time must be non-negative"));
        }
        Ok(FieldPulse {
            amplitude_t,
            bandwidth_hz,
            buffer_s,
        })
    }

    /// ∫Γ dt over both edges for a spin at `delta`, with plateau detuning
    /// `shift_hz`.
    fn edge_exposure(&self, rate: &impl Fn(f64) -> f64, delta: f64, shift_hz: f64) -> f64 {
        if self.buffer_s == 0.0 {
            return 0.0;
        }
        let tau = 1.0 / (2.0 * PI * self.bandwidth_hz);
        let h = self.buffer_s / EDGE_STEPS as f64;
        let simpson = |f: &dyn Fn(f64) -> f64| {
            (0..=EDGE_STEPS)
                .map(|k| {
                    let w = if k == 0 || k == EDGE_STEPS {
                        1.0
                    } else if k % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * f(h * k as f64)
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        let rise = simpson(&|t| rate(delta + shift_hz * (1.0 - (-t / tau).exp())));
        let fall = simpson(&|t| rate(delta + shift_hz * (-t / tau).exp()));
        rise + fall
    }
}

/// Saturate, optionally detune with a field pulse for T, read out.
#[derive(Clone, Debug, PartialEq)]
pub struct SaturationRecovery {
    pub line: SpectralLine,
    pub resonator: Resonator,
    pub g_hz: f64,
    pub gamma_nr: f64,
    pub scheme: SaturationScheme,
    pub field_pulse: Option<FieldPulse>,
    /// Slope of the addressed transition, converting field to detuning.
    pub dfdb_hz_per_t: f64,
    pub detect: DetectionPair,
    pub grid_points: usize,
}

impl SaturationRecovery {
    pub fn new(
        line: SpectralLine,
        resonator: Resonator,
        g_hz: f64,
        gamma_nr: f64,
        scheme: SaturationScheme,
        dfdb_hz_per_t: f64,
        detect: DetectionPair,
    ) -> Self {
        SaturationRecovery {
            line,
            resonator,
            g_hz,
            gamma_nr,
            scheme,
            field_pulse: None,
            dfdb_hz_per_t,
            detect,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn with_field_pulse(self, pulse: FieldPulse) -> Self {
        SaturationRecovery {
            field_pulse: Some(pulse),
            ..self
        }
    }

    /// Detuning applied during the plateau (Hz).
    pub fn pulse_detuning(&self) -> f64 {
        self.field_pulse.map_or(0.0, |p| self.dfdb_hz_per_t * p.amplitude_t)
    }

    /// State right after saturation.
    pub fn saturated_state(&self) -> Result<EnsembleState> {
        check_rates(self.g_hz, self.gamma_nr)?;
        ensure_finite("dfdB", self.dfdb_hz_per_t)?;
        self.detect.validate()?;
        self.scheme.validate(&self.line, self.dfdb_hz_per_t)?;
        let kappa = self.resonator.kappa();
        let feature = self
            .scheme
            .bandwidth()
            .min(self.detect.pi.feature_hz(kappa))
            .min(self.detect.pi_half.feature_hz(kappa));
        let thermal = EnsembleState::thermal(&self.line, feature, self.grid_points)?;
        let sz = thermal
            .grid()
            .iter()
            .zip(thermal.sz())
            .map(|(&d, &s)| {
                if self.scheme.saturates(d, self.dfdb_hz_per_t) {
                    0.0
                } else {
                    s
                }
            })
            .collect();
        EnsembleState::new(thermal.grid().to_vec(), thermal.density().to_vec(), sz)
    }

    pub fn simulate(&self, times: &[f64]) -> Result<DecayCurve> {
        check_times(times)?;
        let state = self.saturated_state()?;
        let kappa = self.resonator.kappa();
        let rate = |d: f64| purcell_rate(self.g_hz, kappa, d) + self.gamma_nr;
        let shift = self.pulse_detuning();
        let plateau: Vec<f64> = state.grid().iter().map(|&d| rate(d + shift)).collect();
        let edges: Vec<f64> = match self.field_pulse {
            Some(p) => state.grid().iter().map(|&d| p.edge_exposure(&rate, d, shift)).collect(),
            None => vec![0.0; plateau.len()],
        };
        let amplitudes = times
            .iter()
            .map(|&t| {
                let exposure: Vec<f64> = plateau
                    .iter()
                    .zip(&edges)
                    .map(|(r, e)| if t == 0.0 { *e } else { e + r * t })
                    .collect();
                state.relax_exposure(&exposure).echo_amplitude(&self.detect, kappa)
            })
            .collect();
        DecayCurve::new(times.to_vec(), amplitudes)
    }
}

/// Echo amplitude sin²(θ/2) against refocusing-pulse input power, with
/// θ = 2π·Ω_R·t_p and Ω_R = 2g√n̄(P).
pub fn simulate_rabi(powers_w: &[f64], pulse_duration_s: f64, g_hz: f64, resonator: &Resonator) -> Result<Vec<(f64, f64)>> {
    if !(pulse_duration_s > 0.0) {
        return Err(invalid("pulse duration must be positive"));
    }
    ensure_finite("g", g_hz)?;
    powers_w
        .iter()
        .map(|&p| {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(invalid("powers must be finite and non-negative"));
            }
            let theta = 2.0 * PI * rabi_frequency(g_hz, mean_photon_number(p, resonator)) * pulse_duration_s;
            Ok((p, (theta / 2.0).sin().powi(2)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::g_for_resonant_t1;
    use rand::SeedableRng;

    fn resonator_a() -> Resonator {
        Resonator::with_linewidth(7.245e9, 23e3).unwrap()
    }

    fn inversion(gamma_nr: f64) -> InversionRecovery {
        let line = SpectralLine::strain_doublet(2e6, 4e6, 2e6).unwrap();
        InversionRecovery::new(
            line,
            resonator_a(),
            g_for_resonant_t1(0.35, 23e3),
            gamma_nr,
            PulseSpec::pi(5e-6),
            DetectionPair::hahn(1e-4),
        )
    }

    #[test]
    fn infinite_nonradiative_rate_is_flat() {
        let curve = inversion(f64::INFINITY).simulate(&[1e-3, 0.1, 1.0]).unwrap();
        assert!(curve.amplitudes.iter().all(|a| (a - 1.0).abs() < 1e-12));
    }

    #[test]
    fn inversion_starts_negative_and_recovers() {
        let curve = inversion(0.0).simulate(&[0.0, 10.0]).unwrap();
        assert!(curve.amplitudes[0] < -0.9);
        assert!((curve.amplitudes[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn saturation_schedule_outside_span_is_rejected() {
        let line = SpectralLine::gaussian(0.0, 2e6).unwrap();
        let scheme = SaturationScheme::Swept {
            field_steps_t: vec![0.0, 1e-3],
            bandwidth_hz: 250e3,
        };
        let sim = SaturationRecovery::new(line, resonator_a(), 50.0, 0.0, scheme, -25.1e9, DetectionPair::hahn(1e-5));
        assert!(sim.saturated_state().is_err());
    }

    #[test]
    fn swept_saturation_zeroes_the_line() {
        let line = SpectralLine::strain_doublet(2e6, 4e6, 2e6).unwrap();
        let scheme = SaturationScheme::swept_over(&line, -25.1e9, 250e3).unwrap();
        let sim = SaturationRecovery::new(line, resonator_a(), 50.0, 0.0, scheme, -25.1e9, DetectionPair::hahn(1e-5));
        let state = sim.saturated_state().unwrap();
        assert!(state.sz().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn plain_saturation_leaves_wings() {
        let line = SpectralLine::gaussian(0.0, 2e6).unwrap();
        let sim = SaturationRecovery::new(
            line,
            resonator_a(),
            50.0,
            0.0,
            SaturationScheme::default(),
            -25.1e9,
            DetectionPair::hahn(1e-5),
        );
        let state = sim.saturated_state().unwrap();
        let det = sim.detect;
        assert!(state.polarization_at(&det, 23e3, 0.0).abs() < 0.1);
        assert!((state.polarization_at(&det, 23e3, 2e6) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn field_pulse_edges_need_settling() {
        let p = FieldPulse::new(1e-4, 1.0, 1.0).unwrap();
        let unit = |_d: f64| 1.0;
        assert!((p.edge_exposure(&unit, 0.0, 1e6) - 2.0).abs() < 1e-12);
        assert!(FieldPulse::new(1e-4, 0.0, 1.0).is_err());
    }

    #[test]
    fn rabi_zero_power_gives_no_echo() {
        let res = Resonator::with_linewidth(7.305e9, 82e3).unwrap();
        let out = simulate_rabi(&[0.0, 1e-12], 5e-6, 58.0, &res).unwrap();
        assert_eq!(out[0].1, 0.0);
        assert!(out[1].1 > 0.0);
    }

    #[test]
    fn noise_is_seeded() {
        let curve = DecayCurve::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let a = curve
            .clone()
            .with_noise(0.1, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7))
            .unwrap();
        let b = curve.with_noise(0.1, &mut rand_chacha::ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.amplitudes[0] != 0.0);
    }
}
