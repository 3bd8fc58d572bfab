//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use nalgebra::Complex;
use nalgebra::DMatrix;

/// Breit–Rabi energies (Hz) of an S = 1/2 electron coupled to spin `i`,
/// field `b` along z, for H = γe B Sz − γn B Iz + A S·I. Ascending.
pub fn breit_rabi(i: f64, a: f64, gamma_e: f64, gamma_n: f64, b: f64) -> Vec<f64> {
    let top = i + 0.5;
    let mut energies = vec![
        gamma_e * b / 2.0 - gamma_n * b * i + a * i / 2.0,
        -gamma_e * b / 2.0 + gamma_n * b * i + a * i / 2.0,
    ];
    let n = (2.0 * i).round() as i32;
    // m = mS + mI runs over −I+1/2 .. I−1/2
    for k in 0..n {
        let m = -i + 0.5 + k as f64;
        let g = gamma_e + gamma_n;
        let root = (g * g * b * b + 2.0 * a * m * g * b + a * a * top * top).sqrt();
        let mean = -a / 4.0 - gamma_n * b * m;
        energies.push(mean + root / 2.0);
        energies.push(mean - root / 2.0);
    }
    energies.sort_by(f64::total_cmp);
    energies
}

/// Eigenvalues via nalgebra's Hermitian solver, ascending.
pub fn reference_eigenvalues(h: &DMatrix<Complex<f64>>) -> Vec<f64> {
    let mut e: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// One row of the reference transition table at 3 mT: the ΔF·ΔmF = −1 and
/// +1 members (F = 4 → 5, given by their lower mF), with matrix elements,
/// the shared frequency (GHz) and df/dB (GHz/T).
pub struct TableRow {
    pub minus: Option<(i32, f64)>,
    pub plus: Option<(i32, f64)>,
    pub frequency_ghz: f64,
    pub dfdb_ghz_per_t: f64,
}

pub const TABLE_3MT: [TableRow; 10] = [
    TableRow {
        minus: Some((-4, 0.474)),
        plus: None,
        frequency_ghz: 7.300,
        dfdb_ghz_per_t: -25.1,
    },
    TableRow {
        minus: Some((-3, 0.423)),
        plus: Some((-4, 0.072)),
        frequency_ghz: 7.317,
        dfdb_ghz_per_t: -19.2,
    },
    TableRow {
        minus: Some((-2, 0.372)),
        plus: Some((-3, 0.125)),
        frequency_ghz: 7.334,
        dfdb_ghz_per_t: -13.8,
    },
    TableRow {
        minus: Some((-1, 0.321)),
        plus: Some((-2, 0.176)),
        frequency_ghz: 7.351,
        dfdb_ghz_per_t: -8.1,
    },
    TableRow {
        minus: Some((0, 0.271)),
        plus: Some((-1, 0.226)),
        frequency_ghz: 7.368,
        dfdb_ghz_per_t: -2.5,
    },
    TableRow {
        minus: Some((1, 0.221)),
        plus: Some((0, 0.277)),
        frequency_ghz: 7.385,
        dfdb_ghz_per_t: 3.1,
    },
    TableRow {
        minus: Some((2, 0.171)),
        plus: Some((1, 0.327)),
        frequency_ghz: 7.401,
        dfdb_ghz_per_t: 8.7,
    },
    TableRow {
        minus: Some((3, 0.120)),
        plus: Some((2, 0.376)),
        frequency_ghz: 7.418,
        dfdb_ghz_per_t: 14.2,
    },
    TableRow {
        minus: Some((4, 0.069)),
        plus: Some((3, 0.426)),
        frequency_ghz: 7.435,
        dfdb_ghz_per_t: 19.6,
    },
    TableRow {
        minus: None,
        plus: Some((4, 0.475)),
        frequency_ghz: 7.452,
        dfdb_ghz_per_t: 25.3,
    },
];

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

/// The 22 detunings of the Γ_NR fit: resonance plus 21 log-spaced points.
pub fn purcell_detunings() -> Vec<f64> {
    std::iter::once(0.0).chain(geomspace(1e4, 12e6, 21)).collect()
}
