mod common;

use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

use purcellsim::spin::{
    angular_momentum_operators, build_hamiltonian, eigensolve, label_states, labeled_spectrum, transition_lines,
    transition_slope, transition_table, CMatrix, Half, LabelOptions, SpinSystem, StateLabel,
};
use purcellsim::Error;

use common::{breit_rabi, reference_eigenvalues};

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn random_hermitian(n: usize, values: &[f64]) -> CMatrix {
    let mut h = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    let mut k = 0;
    for i in 0..n {
        h[(i, i)] = Complex::new(values[k], 0.0);
        k += 1;
        for j in i + 1..n {
            let z = Complex::new(values[k], values[k + 1]);
            k += 2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

#[test]
fn lowest_line_at_three_millitesla() {
    let table = transition_table(&SpinSystem::bismuth(), 3e-3, 0.0).unwrap();
    let first = &table[0];
    assert_eq!((first.from, first.to), (StateLabel::new(4, -4), StateLabel::new(5, -5)));
    assert!((first.frequency_hz - 7.300e9).abs() < 1e6);
    assert!((first.matrix_element - 0.474).abs() < 0.002);
    assert!((first.dfdb_hz_per_t + 25.1e9).abs() < 0.1e9);
    assert_eq!(first.branch, -1);
}

#[test]
fn ten_strong_transitions() {
    let table = transition_table(&SpinSystem::bismuth(), 3e-3, 0.25).unwrap();
    assert_eq!(table.len(), 10);
    assert!(table.windows(2).all(|w| w[0].frequency_hz <= w[1].frequency_hz));
}

#[test]
fn top_line_slope() {
    let s = transition_slope(&SpinSystem::bismuth(), 3e-3, StateLabel::new(4, 4), StateLabel::new(5, 5)).unwrap();
    assert!((s - 25.3e9).abs() < 0.1e9, "{s}");
}

#[test]
fn zero_field_degeneracies() {
    let sys = SpinSystem::bismuth();
    let eig = eigensolve(&build_hamiltonian(&sys, [0.0; 3]).unwrap()).unwrap();
    let a = sys.a_hz();
    for e in &eig.energies[..9] {
        assert!((e + 2.75 * a).abs() < 1e-6 * a);
    }
    for e in &eig.energies[9..] {
        assert!((e - 2.25 * a).abs() < 1e-6 * a);
    }
}

#[test]
fn eigen_solution_invariants() {
    let sys = SpinSystem::bismuth();
    let h = build_hamiltonian(&sys, [0.0, 0.0, 3e-3]).unwrap();
    let eig = eigensolve(&h).unwrap();
    let v = &eig.states;
    let n = v.ncols();
    assert!(max_abs(&(v.adjoint() * v - CMatrix::identity(n, n))) < 1e-10);
    let norm = frobenius(&h);
    for k in 0..n {
        let col = v.column(k);
        let r = &h * col - col * Complex::new(eig.energies[k], 0.0);
        assert!(r.norm() <= 1e-9 * norm);
    }
    let spec = label_states(&eig, &sys, 3e-3, LabelOptions::default()).unwrap();
    let mut labels = spec.labels.clone();
    labels.sort();
    labels.dedup();
    assert_eq!(labels.len(), 20);
}

#[test]
fn labeling_bound_and_ambiguity_errors() {
    let sys = SpinSystem::bismuth();
    assert!(matches!(labeled_spectrum(&sys, 0.06), Err(Error::FieldTooHigh { .. })));
}

#[test]
fn degenerate_partners_at_three_millitesla() {
    let lines = transition_lines(&SpinSystem::bismuth(), 3e-3).unwrap();
    let plus: Vec<_> = lines.iter().filter(|l| l.branch() == 1).collect();
    let minus: Vec<_> = lines.iter().filter(|l| l.branch() == -1).collect();
    assert_eq!((plus.len(), minus.len()), (9, 9));
    // |4,4> <-> |5,5> ends the ladder and has no partner
    for p in plus.into_iter().filter(|l| l.to != StateLabel::new(5, 5)) {
        let closest = minus
            .iter()
            .map(|m| (m.frequency_hz - p.frequency_hz).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 0.5e6, "{} -> {}: {closest} Hz", p.from, p.to);
    }
}

#[test]
fn sx_and_sy_elements_agree() {
    let sys = SpinSystem::bismuth();
    let spec = labeled_spectrum(&sys, 3e-3).unwrap();
    let sy = sys.electron_sy();
    for line in transition_lines(&sys, 3e-3).unwrap() {
        let a = spec.state(line.from).unwrap();
        let b = spec.state(line.to).unwrap();
        let y = a.dotc(&(&sy * b)).norm();
        assert!((y - line.matrix_element).abs() < 1e-10);
        assert!(line.matrix_element <= 0.5 + 1e-12);
    }
}

#[test]
fn eigenvalues_match_reference_solver() {
    let sys = SpinSystem::bismuth();
    for b in [0.0, 1e-3, 5.2e-3, 0.02] {
        let h = build_hamiltonian(&sys, [0.3 * b, 0.1 * b, b]).unwrap();
        let ours = eigensolve(&h).unwrap().energies;
        let reference = reference_eigenvalues(&h);
        let scale = frobenius(&h);
        for (a, r) in ours.iter().zip(&reference) {
            assert!((a - r).abs() < 1e-10 * scale);
        }
    }
}

proptest! {
    #[test]
    fn operator_algebra(doubled in 0i32..=9) {
        let j = doubled as f64 / 2.0;
        let ops = angular_momentum_operators(j).unwrap();
        let i = Complex::new(0.0, 1.0);
        let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
        prop_assert!(max_abs(&(comm(&ops.jx, &ops.jy) - &ops.jz * i)) < 1e-12);
        prop_assert!(max_abs(&(comm(&ops.jy, &ops.jz) - &ops.jx * i)) < 1e-12);
        prop_assert!(max_abs(&(comm(&ops.jz, &ops.jx) - &ops.jy * i)) < 1e-12);
        let cas = &ops.jx * &ops.jx + &ops.jy * &ops.jy + &ops.jz * &ops.jz;
        let id = CMatrix::identity(ops.dim(), ops.dim()) * Complex::new(j * (j + 1.0), 0.0);
        prop_assert!(max_abs(&(cas - id)) < 1e-12);
        prop_assert!(max_abs(&(ops.jx.adjoint() - &ops.jx)) < 1e-12);
        prop_assert!(max_abs(&(ops.jy.adjoint() - &ops.jy)) < 1e-12);
        for (k, m) in (0..ops.dim()).zip(purcellsim::spin::projections(Half::from_doubled(doubled))) {
            prop_assert_eq!(ops.jz[(k, k)], Complex::new(m.value(), 0.0));
        }
    }

    #[test]
    fn eigenvalue_sum_is_trace(n in 2usize..10, values in prop::collection::vec(-1e3f64..1e3, 100)) {
        let h = random_hermitian(n, &values);
        let eig = eigensolve(&h).unwrap();
        let trace: f64 = (0..n).map(|k| h[(k, k)].re).sum();
        let sum: f64 = eig.energies.iter().sum();
        prop_assert!((sum - trace).abs() <= 1e-9 * frobenius(&h).max(1.0));
        prop_assert!(eig.energies.windows(2).all(|w| w[0] <= w[1]));
        let reference = reference_eigenvalues(&h);
        for (a, r) in eig.energies.iter().zip(&reference) {
            prop_assert!((a - r).abs() <= 1e-10 * frobenius(&h).max(1.0));
        }
    }

    #[test]
    fn hamiltonian_trace_matches_spectrum(a in 0.5e9f64..2e9, bx in -0.01f64..0.01, bz in 0.0f64..0.05) {
        let sys = SpinSystem::bismuth_with_a(a);
        let h = build_hamiltonian(&sys, [bx, 0.0, bz]).unwrap();
        let sum: f64 = eigensolve(&h).unwrap().energies.iter().sum();
        let trace: f64 = (0..20).map(|k| h[(k, k)].re).sum();
        prop_assert!((sum - trace).abs() <= 1e-9 * frobenius(&h));
    }

    #[test]
    fn breit_rabi_equivalence(doubled_i in 1i32..=9, a in 0.1e9f64..2e9, b in 0.0f64..10e-3) {
        let i = doubled_i as f64 / 2.0;
        let sys = SpinSystem::new(0.5, i, a, 27.997e9, 6.9e6).unwrap();
        let eig = eigensolve(&build_hamiltonian(&sys, [0.0, 0.0, b]).unwrap()).unwrap();
        let oracle = breit_rabi(i, a, 27.997e9, 6.9e6, b);
        let scale = oracle.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for (e, o) in eig.energies.iter().zip(&oracle) {
            prop_assert!((e - o).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn zero_field_splitting_law(doubled_i in 1i32..=9, a in 0.1e9f64..2e9) {
        let i = doubled_i as f64 / 2.0;
        let sys = SpinSystem::new(0.5, i, a, 27.997e9, 6.9e6).unwrap();
        let eig = eigensolve(&build_hamiltonian(&sys, [0.0; 3]).unwrap()).unwrap();
        let lower = doubled_i as usize; // 2I states in F = I − 1/2
        let gap = eig.energies[lower] - eig.energies[lower - 1];
        prop_assert!(((gap - (i + 0.5) * a) / a).abs() < 1e-9);
        prop_assert!((sys.zero_field_splitting() - (i + 0.5) * a).abs() < 1e-6);
    }

    #[test]
    fn labels_are_a_bijection(b in 0.0f64..0.02) {
        let spec = labeled_spectrum(&SpinSystem::bismuth(), b).unwrap();
        let mut labels = spec.labels.clone();
        labels.sort();
        labels.dedup();
        prop_assert_eq!(labels.len(), 20);
        prop_assert!(spec.overlaps.iter().all(|&w| w >= 0.5));
    }
}
