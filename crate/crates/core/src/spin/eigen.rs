//! Cyclic Jacobi diagonalization of small dense Hermitian matrices.

use crate::error::{invalid, Error, Result};

use super::angular::{CMatrix, C64};

#[derive(Clone, Copy, Debug)]
pub struct JacobiOptions {
    /// Stop once the off-diagonal Frobenius norm drops below
    /// `tolerance * ‖H‖_F`.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        JacobiOptions {
            tolerance: 1e-13,
            max_sweeps: 100,
        }
    }
}

/// Full spectral decomposition `H = V diag(E) V†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub energies: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `energies`.
    pub states: CMatrix,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

pub fn eigensolve(h: &CMatrix) -> Result<EigenSolution> {
    eigensolve_with(h, JacobiOptions::default())
}

pub fn eigensolve_with(h: &CMatrix, options: JacobiOptions) -> Result<EigenSolution> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(invalid(format!("matrix must be square, got {}x{}", n, h.ncols())));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let norm = h.norm();
    let asym = (h - h.adjoint()).norm();
    if asym > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(invalid(format!("matrix is not Hermitian (‖H − H†‖ = {asym:e})")));
    }

    let mut a = h.clone();
    let mut v = CMatrix::identity(n, n);
    let target = options.tolerance * norm;
    let mut sweeps = 0;

    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == options.max_sweeps {
            return Err(Error::NotConverged {
                sweeps,
                off_norm: off,
                target,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let energies = order.iter().map(|&k| a[(k, k)].re).collect();
    let states = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSolution {
        energies,
        states,
        sweeps,
    })
}

/// Annihilates `a[p,q]` with a unitary plane rotation `G`, `a ← G† a G`,
/// `v ← v G`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // phase e^{-iφ} makes the pivot real; then a real symmetric Jacobi step.
    let phase = apq.conj() / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] acting on columns (p, q)
    let gpp = C64::new(c, 0.0);
    let gpq = C64::new(s, 0.0);
    let gqp = phase * (-s);
    let gqq = phase * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}
