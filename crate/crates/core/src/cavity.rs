//! Spin–resonator coupling and the Purcell-limited relaxation rate.
//!
//! All inputs and outputs are ordinary frequencies (Hz) or rates (s⁻¹);
//! the 2π conversions happen inside the rate formulas only.

use std::f64::consts::PI;

use crate::error::{ensure_finite, invalid, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// A single-mode microwave resonator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonator {
    omega0_hz: f64,
    q: f64,
    kappa1_hz: f64,
    kappa2_hz: f64,
}

impl Resonator {
    /// `kappa1 + kappa2` may exceed `omega0 / q` by at most 1%.
    pub fn new(omega0_hz: f64, q: f64, kappa1_hz: f64, kappa2_hz: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0_hz), ("Q", q), ("kappa1", kappa1_hz), ("kappa2", kappa2_hz)] {
            ensure_finite(name, v)?;
        }
        if omega0_hz <= 0.0 || q <= 0.0 {
            return Err(invalid("omega0 and Q must be positive"));
        }
        if kappa1_hz < 0.0 || kappa2_hz < 0.0 {
            return Err(invalid("coupling rates must be non-negative"));
        }
        let kappa = omega0_hz / q;
        if kappa1_hz + kappa2_hz > 1.01 * kappa {
            return Err(invalid(format!(
                "kappa1 + kappa2 = {} Hz exceeds the linewidth {kappa} Hz",
                kappa1_hz + kappa2_hz
            )));
        }
        Ok(Resonator {
            omega0_hz,
            q,
            kappa1_hz,
            kappa2_hz,
        })
    }

    /// Resonator of linewidth `kappa_hz` with κ1 = κ/12 and κ2 = 5κ/12.
    pub fn with_linewidth(omega0_hz: f64, kappa_hz: f64) -> Result<Self> {
        ensure_finite("kappa", kappa_hz)?;
        if kappa_hz <= 0.0 {
            return Err(invalid("kappa must be positive"));
        }
        Resonator::new(omega0_hz, omega0_hz / kappa_hz, kappa_hz / 12.0, 5.0 * kappa_hz / 12.0)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0_hz
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// FWHM linewidth ω0/Q (Hz).
    pub fn kappa(&self) -> f64 {
        self.omega0_hz / self.q
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1_hz
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2_hz
    }
}

/// Vacuum-fluctuation field at the spins and the addressed transition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingGeometry {
    pub db1y_t: f64,
    pub db1z_t: f64,
    /// Angle between the static field and the resonator plane (rad).
    pub theta_rad: f64,
    /// |<F,mF|Sx|F+1,mF±1>|
    pub matrix_element: f64,
}

impl CouplingGeometry {
    pub fn new(db1y_t: f64, db1z_t: f64, theta_rad: f64, matrix_element: f64) -> Result<Self> {
        for (name, v) in [
            ("dB1y", db1y_t),
            ("dB1z", db1z_t),
            ("theta", theta_rad),
            ("matrix element", matrix_element),
        ] {
            ensure_finite(name, v)?;
        }
        if db1y_t < 0.0 || db1z_t < 0.0 {
            return Err(invalid("field components must be non-negative"));
        }
        if !(0.0..=0.5).contains(&matrix_element) {
            return Err(invalid(format!("matrix element {matrix_element} outside [0, 0.5]")));
        }
        Ok(CouplingGeometry {
            db1y_t,
            db1z_t,
            theta_rad,
            matrix_element,
        })
    }

    /// Field components reproducing couplings `g0` at θ = 0 and `g90` at
    /// θ = π/2. Requires `g0 ≥ g90 ≥ 0`.
    pub fn from_couplings(g0_hz: f64, g90_hz: f64, matrix_element: f64, gamma_e: f64, theta_rad: f64) -> Result<Self> {
        if !(g0_hz >= g90_hz && g90_hz >= 0.0) {
            return Err(invalid("need g(0) >= g(pi/2) >= 0"));
        }
        if !(matrix_element > 0.0 && gamma_e > 0.0) {
            return Err(invalid("matrix element and gamma_e must be positive"));
        }
        let scale = gamma_e * matrix_element;
        let y = (g0_hz * g0_hz - g90_hz * g90_hz).sqrt() / scale;
        CouplingGeometry::new(y, g90_hz / scale, theta_rad, matrix_element)
    }

    pub fn at_angle(self, theta_rad: f64) -> Self {
        CouplingGeometry { theta_rad, ..self }
    }
}

/// Relaxation rates (s⁻¹).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationChannels {
    pub gamma_p: f64,
    pub gamma_nr: f64,
}

impl RelaxationChannels {
    pub fn new(gamma_p: f64, gamma_nr: f64) -> Result<Self> {
        ensure_finite("gamma_p", gamma_p)?;
        ensure_finite("gamma_nr", gamma_nr)?;
        if gamma_p < 0.0 || gamma_nr < 0.0 {
            return Err(invalid("rates must be non-negative"));
        }
        Ok(RelaxationChannels { gamma_p, gamma_nr })
    }

    pub fn total(&self) -> f64 {
        self.gamma_p + self.gamma_nr
    }
}

/// g = γe·⟨Sx⟩·√(δB1y² cos²θ + δB1z²), in Hz.
pub fn coupling_g(geom: &CouplingGeometry, gamma_e: f64) -> f64 {
    let c = geom.theta_rad.cos();
    gamma_e * geom.matrix_element * (geom.db1y_t * geom.db1y_t * c * c + geom.db1z_t * geom.db1z_t).sqrt()
}

/// Purcell rate κg²/(κ²/4 + δ²) in s⁻¹, for `g`, `kappa` and `delta` in Hz.
pub fn purcell_rate(g: f64, kappa: f64, delta: f64) -> f64 {
    let (g, kappa, delta) = (2.0 * PI * g, 2.0 * PI * kappa, 2.0 * PI * delta);
    kappa * g * g / (kappa * kappa / 4.0 + delta * delta)
}

/// Coupling whose resonant Purcell time is `t1_resonant`.
pub fn g_for_resonant_t1(t1_resonant: f64, kappa: f64) -> f64 {
    (kappa / (8.0 * PI * t1_resonant)).sqrt()
}

/// T1 at detuning `delta` given its resonant value and a non-radiative floor.
pub fn t1_of_delta(t1_resonant: f64, kappa: f64, delta: f64, gamma_nr: f64) -> f64 {
    let x = 2.0 * delta / kappa;
    1.0 / (1.0 / (t1_resonant * (1.0 + x * x)) + gamma_nr)
}

/// Mean intracavity photon number for input power `p_in` (W) at resonance.
pub fn mean_photon_number(p_in: f64, res: &Resonator) -> f64 {
    let kappa = 2.0 * PI * res.kappa();
    4.0 * (2.0 * PI * res.kappa1()) * p_in / (kappa * kappa * HBAR * 2.0 * PI * res.omega0())
}

/// Ω_R = 2g√n̄ (Hz).
pub fn rabi_frequency(g: f64, n_photons: f64) -> f64 {
    2.0 * g * n_photons.sqrt()
}

/// C = N g²/(κ Δω).
pub fn cooperativity(n_spins: f64, g: f64, kappa: f64, line_fwhm: f64) -> f64 {
    n_spins * g * g / (kappa * line_fwhm)
}

/// Fraction of relaxation events that emit into the cavity.
pub fn radiative_branching(channels: &RelaxationChannels) -> Result<f64> {
    let total = channels.total();
    if total > 0.0 {
        Ok(channels.gamma_p / total)
    } else {
        Err(invalid("branching ratio undefined with both rates zero"))
    }
}
