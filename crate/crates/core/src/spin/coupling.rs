//! Clebsch–Gordan coefficients and the zero-field |F, mF> basis.

use nalgebra::DVector;

use super::angular::{projections, Half, C64};
use super::hamiltonian::SpinSystem;
use super::StateLabel;

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// `<j1 m1; j2 m2 | J M>` in the Condon–Shortley convention (Racah formula).
pub fn clebsch_gordan(j1: Half, m1: Half, j2: Half, m2: Half, j: Half, m: Half) -> f64 {
    if m1 + m2 != m {
        return 0.0;
    }
    let d = |h: Half| h.doubled();
    // triangle and projection bounds, all in doubled units
    if d(j) < (d(j1) - d(j2)).abs() || d(j) > d(j1) + d(j2) {
        return 0.0;
    }
    if d(m1).abs() > d(j1) || d(m2).abs() > d(j2) || d(m).abs() > d(j) {
        return 0.0;
    }
    if (d(j1) + d(j2) + d(j)) % 2 != 0 || (d(j1) + d(m1)) % 2 != 0 || (d(j2) + d(m2)) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| {
        debug_assert!(x % 2 == 0);
        x / 2
    };
    let (aj1, aj2, aj) = (d(j1), d(j2), d(j));
    let (am1, am2, am) = (d(m1), d(m2), d(m));

    let pre = (f64::from(aj + 1) * factorial(h(aj + aj1 - aj2)) * factorial(h(aj - aj1 + aj2)) * factorial(h(aj1 + aj2 - aj))
        / factorial(h(aj1 + aj2 + aj) + 1))
    .sqrt();
    let norm = (factorial(h(aj + am))
        * factorial(h(aj - am))
        * factorial(h(aj1 - am1))
        * factorial(h(aj1 + am1))
        * factorial(h(aj2 - am2))
        * factorial(h(aj2 + am2)))
    .sqrt();

    let mut sum = 0.0;
    for k in 0.. {
        let terms = [
            k,
            h(aj1 + aj2 - aj) - k,
            h(aj1 - am1) - k,
            h(aj2 + am2) - k,
            h(aj - aj2 + am1) + k,
            h(aj - aj1 - am2) + k,
        ];
        if terms[1] < 0 || terms[2] < 0 || terms[3] < 0 {
            break;
        }
        if terms[4] < 0 || terms[5] < 0 {
            continue;
        }
        let denom: f64 = terms.iter().map(|&t| factorial(t)).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    pre * norm * sum
}

/// Zero-field eigenbasis `|F, mF>` of `S·I`, expressed in the product basis.
///
/// Ordered by ascending `F`, then ascending `mF`.
pub fn coupled_basis(system: &SpinSystem) -> Vec<(StateLabel, DVector<C64>)> {
    let s = system.s();
    let i = system.i();
    let dim_i = (i.doubled() + 1) as usize;
    let dim = system.dim();

    let f_min = (i - s).abs();
    let f_max = i + s;
    let mut out = Vec::with_capacity(dim);
    let mut f = f_min;
    while f <= f_max {
        let mut mf = -f;
        while mf <= f {
            let mut vec = DVector::from_element(dim, C64::new(0.0, 0.0));
            for (si, ms) in projections(s).enumerate() {
                for (ii, mi) in projections(i).enumerate() {
                    let c = clebsch_gordan(s, ms, i, mi, f, mf);
                    vec[si * dim_i + ii] = C64::new(c, 0.0);
                }
            }
            out.push((StateLabel { f, mf }, vec));
            mf = mf + Half::from_int(1);
        }
        f = f + Half::from_int(1);
    }
    out
}
