use crate::error::{ensure_finite, invalid, Result};

use super::angular::{kron, CMatrix, Half, SpinOperators, C64};

/// Hyperfine constant (Hz) that reproduces the 3 mT transition table for
/// Si:Bi to within 1 MHz on every line.
pub const BISMUTH_A_HZ: f64 = 1.47517e9;
/// Electron gyromagnetic ratio gamma_e / 2pi in Hz/T.
pub const ELECTRON_GAMMA_HZ_PER_T: f64 = 27.997e9;
/// 209Bi nuclear gyromagnetic ratio gamma_n / 2pi in Hz/T.
pub const BISMUTH_GAMMA_N_HZ_PER_T: f64 = 6.9e6;

/// Quantum numbers and couplings of an electron spin `S` coupled to a nuclear
/// spin `I` by an isotropic hyperfine interaction `A S·I`.
///
/// All energies are ordinary frequencies (E/h, Hz).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    s: Half,
    i: Half,
    a_hz: f64,
    gamma_e_hz_per_t: f64,
    gamma_n_hz_per_t: f64,
}

impl SpinSystem {
    pub fn new(s: f64, i: f64, a_hz: f64, gamma_e_hz_per_t: f64, gamma_n_hz_per_t: f64) -> Result<Self> {
        let s = Half::from_f64(s)?;
        let i = Half::from_f64(i)?;
        if s.doubled() < 0 || i.doubled() < 0 {
            return Err(invalid("spin quantum numbers must be non-negative"));
        }
        ensure_finite("A", a_hz)?;
        ensure_finite("gamma_e", gamma_e_hz_per_t)?;
        ensure_finite("gamma_n", gamma_n_hz_per_t)?;
        if gamma_e_hz_per_t <= 0.0 {
            return Err(invalid(format!("gamma_e must be positive, got {gamma_e_hz_per_t}")));
        }
        Ok(SpinSystem {
            s,
            i,
            a_hz,
            gamma_e_hz_per_t,
            gamma_n_hz_per_t,
        })
    }

    /// Neutral bismuth donor in silicon: S = 1/2, I = 9/2.
    pub fn bismuth() -> Self {
        Self::bismuth_with_a(BISMUTH_A_HZ)
    }

    pub fn bismuth_with_a(a_hz: f64) -> Self {
        SpinSystem::new(0.5, 4.5, a_hz, ELECTRON_GAMMA_HZ_PER_T, BISMUTH_GAMMA_N_HZ_PER_T).expect("bismuth constants are valid")
    }

    pub fn s(&self) -> Half {
        self.s
    }

    pub fn i(&self) -> Half {
        self.i
    }

    pub fn a_hz(&self) -> f64 {
        self.a_hz
    }

    pub fn gamma_e(&self) -> f64 {
        self.gamma_e_hz_per_t
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n_hz_per_t
    }

    /// Hilbert-space dimension (2S+1)(2I+1).
    pub fn dim(&self) -> usize {
        ((self.s.doubled() + 1) * (self.i.doubled() + 1)) as usize
    }

    /// Zero-field gap between the F = I+S and F = I-S multiplets, (I+1/2)A
    /// for S = 1/2.
    pub fn zero_field_splitting(&self) -> f64 {
        // E(F) = A/2 [F(F+1) - I(I+1) - S(S+1)]
        let s = self.s.value();
        let i = self.i.value();
        let top = i + s;
        let bottom = (i - s).abs();
        0.5 * self.a_hz * (top * (top + 1.0) - bottom * (bottom + 1.0))
    }

    pub(crate) fn operators(&self) -> (SpinOperators, SpinOperators) {
        (
            SpinOperators::new(self.s).expect("validated"),
            SpinOperators::new(self.i).expect("validated"),
        )
    }

    /// Electron `Sx ⊗ 1` in the product basis.
    pub fn electron_sx(&self) -> CMatrix {
        let (s, i) = self.operators();
        kron(&s.jx, &CMatrix::identity(i.dim(), i.dim()))
    }

    /// Electron `Sy ⊗ 1` in the product basis.
    pub fn electron_sy(&self) -> CMatrix {
        let (s, i) = self.operators();
        kron(&s.jy, &CMatrix::identity(i.dim(), i.dim()))
    }
}

/// Builds `H/h = B·(γe S⊗1 − γn 1⊗I) + A S·I` in Hz for a field vector in T.
///
/// The product basis is `|mS> ⊗ |mI>` with both projections descending.
pub fn build_hamiltonian(system: &SpinSystem, field_t: [f64; 3]) -> Result<CMatrix> {
    for (axis, b) in ["Bx", "By", "Bz"].iter().zip(field_t) {
        ensure_finite(axis, b)?;
    }
    let (s, i) = system.operators();
    let id_s = CMatrix::identity(s.dim(), s.dim());
    let id_i = CMatrix::identity(i.dim(), i.dim());
    let scale = |m: &CMatrix, x: f64| m.map(|z| z * x);

    let s_field = scale(&s.jx, field_t[0]) + scale(&s.jy, field_t[1]) + scale(&s.jz, field_t[2]);
    let i_field = scale(&i.jx, field_t[0]) + scale(&i.jy, field_t[1]) + scale(&i.jz, field_t[2]);

    let zeeman = scale(&kron(&s_field, &id_i), system.gamma_e_hz_per_t) - scale(&kron(&id_s, &i_field), system.gamma_n_hz_per_t);
    let contact = kron(&s.jx, &i.jx) + kron(&s.jy, &i.jy) + kron(&s.jz, &i.jz);
    let mut h = zeeman + scale(&contact, system.a_hz);

    // Symmetrize away rounding so downstream code can rely on exact hermiticity.
    let adj = h.adjoint();
    h = (h + adj).map(|z| z * 0.5);
    for k in 0..h.nrows() {
        h[(k, k)] = C64::new(h[(k, k)].re, 0.0);
    }
    Ok(h)
}
