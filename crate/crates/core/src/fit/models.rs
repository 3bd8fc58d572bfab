use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::cavity::{mean_photon_number, Resonator};
use crate::error::{invalid, Error, Result};
use crate::sequence::DecayCurve;

use super::lm::{least_squares, FitResult, FitWarning, LmOptions};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;
/// Log-spaced trial time constants for the variable-projection start.
const GRID_TRIALS: usize = 200;

/// Closed-form least squares for y ≈ c0 + c1·b(t); returns (c0, c1, ssr).
fn linear_pair(t: &[f64], y: &[f64], basis: impl Fn(f64) -> f64) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let (mut sb, mut sy, mut sbb, mut sby) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let b = basis(ti);
        sb += b;
        sy += yi;
        sbb += b * b;
        sby += b * yi;
    }
    let det = n * sbb - sb * sb;
    let (c0, c1) = if det.abs() <= 1e-14 * (n * sbb).max(f64::MIN_POSITIVE) {
        (sy / n, 0.0)
    } else {
        ((sbb * sy - sb * sby) / det, (n * sby - sb * sy) / det)
    };
    let ssr = t.iter().zip(y).map(|(&ti, &yi)| (c0 + c1 * basis(ti) - yi).powi(2)).sum();
    (c0, c1, ssr)
}

/// Best (offset, A, T1) of offset − A·e^{−t/T1} over a log grid of T1.
fn exponential_start(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let t0 = t[0];
    let span = t[t.len() - 1] - t0;
    let min_dt = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let (lo, hi) = ((min_dt / 10.0).ln(), (10.0 * span).ln());
    (0..GRID_TRIALS)
        .map(|k| {
            let tau = (lo + (hi - lo) * k as f64 / (GRID_TRIALS - 1) as f64).exp();
            let (c0, c1, ssr) = linear_pair(t, y, |ti| (-(ti - t0) / tau).exp());
            // c1·e^{−(t−t0)/τ} = (c1·e^{t0/τ})·e^{−t/τ}
            (c0, -c1 * (t0 / tau).exp(), tau, ssr)
        })
        .min_by(|a, b| a.3.total_cmp(&b.3))
        .map(|(c0, a, tau, _)| (c0, a, tau))
        .expect("non-empty grid")
}

fn check_curve(curve: &DecayCurve, min_points: usize) -> Result<()> {
    if curve.len() < min_points {
        return Err(invalid(format!("need at least {min_points} points, got {}", curve.len())));
    }
    Ok(())
}

/// Fits A_Q(t) = offset − A·exp(−t/T1). Parameters are named `A`, `T1`,
/// `offset`.
pub fn fit_exponential(curve: &DecayCurve) -> Result<FitResult> {
    check_curve(curve, 4)?;
    let (t, y) = (&curve.times, &curve.amplitudes);
    let (offset, a, tau) = exponential_start(t, y);
    let residuals = |p: &[f64]| {
        (p[1] > 0.0).then(|| {
            t.iter()
                .zip(y)
                .map(|(&ti, &yi)| p[2] - p[0] * (-ti / p[1]).exp() - yi)
                .collect()
        })
    };
    least_squares(residuals, &["A", "T1", "offset"], &[a, tau, offset], &LmOptions::default())
}

fn double_model(p: &[f64], t: f64) -> f64 {
    p[4] - p[0] * (-t / p[1]).exp() - p[2] * (-t / p[3]).exp()
}

/// Fits offset − A1·e^{−t/T1a} − A2·e^{−t/T1b} with T1a ≤ T1b, from three
/// head/tail splits of the data. Parameters: `A1`, `T1a`, `A2`, `T1b`,
/// `offset`.
pub fn fit_double_exponential(curve: &DecayCurve) -> Result<FitResult> {
    check_curve(curve, 7)?;
    let (t, y) = (&curve.times, &curve.amplitudes);
    let n = t.len();
    let residuals = |p: &[f64]| {
        (p[1] > 0.0 && p[3] > 0.0).then(|| t.iter().zip(y).map(|(&ti, &yi)| double_model(p, ti) - yi).collect::<Vec<_>>())
    };

    let mut best: Option<FitResult> = None;
    for split in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
        let cut = ((n as f64 * split).round() as usize).clamp(3, n - 4);
        // slow component from the tail
        let (offset, a_slow, tau_slow) = exponential_start(&t[cut..], &y[cut..]);
        // fast component from what the tail model leaves in the head
        let head_t = &t[..cut];
        let rest: Vec<f64> = head_t
            .iter()
            .zip(&y[..cut])
            .map(|(&ti, &yi)| offset - a_slow * (-ti / tau_slow).exp() - yi)
            .collect();
        let (_, a_fast, tau_fast) = if cut >= 3 {
            let (c0, a, tau) = exponential_start(head_t, &rest);
            // rest ≈ A_fast·e^{−t/τ}, so exponential_start reports A = −A_fast
            (c0, -a, tau)
        } else {
            (0.0, 0.0, t[0].max(1e-12))
        };
        let tau_fast = tau_fast.min(0.5 * tau_slow);
        let start = [a_fast, tau_fast, a_slow, tau_slow, offset];
        let Ok(fit) = least_squares(
            residuals,
            &["A1", "T1a", "A2", "T1b", "offset"],
            &start,
            &LmOptions::default(),
        ) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => (fit.converged && !b.converged) || (fit.converged == b.converged && fit.residual_norm < b.residual_norm),
        };
        if better {
            best = Some(fit);
        }
    }
    let mut fit = best.ok_or_else(|| Error::Fit("no double-exponential start was evaluable".into()))?;
    order_components(&mut fit);
    if time_constants_indistinguishable(&fit) {
        fit.warnings.push(FitWarning::IndistinguishableTimeConstants);
    }
    Ok(fit)
}

/// Swaps the components so that T1a ≤ T1b.
fn order_components(fit: &mut FitResult) {
    if fit.params[1] <= fit.params[3] {
        return;
    }
    let perm = [2, 3, 0, 1, 4];
    fit.params = perm.iter().map(|&k| fit.params[k]).collect();
    fit.stderr = perm.iter().map(|&k| fit.stderr[k]).collect();
    if let Some(c) = &fit.covariance {
        fit.covariance = Some(DMatrix::from_fn(5, 5, |i, j| c[(perm[i], perm[j])]));
    }
}

/// True when the 95% interval of T1b/T1a includes 1, or either component
/// is not resolved.
fn time_constants_indistinguishable(fit: &FitResult) -> bool {
    let Some(c) = &fit.covariance else {
        return true;
    };
    let (a1, ta, a2, tb) = (fit.params[0], fit.params[1], fit.params[2], fit.params[3]);
    let ratio = tb / ta;
    let var = ratio * ratio * (c[(3, 3)] / (tb * tb) + c[(1, 1)] / (ta * ta) - 2.0 * c[(1, 3)] / (ta * tb));
    let sd = var.max(0.0).sqrt();
    let amplitude_resolved = |a: f64, k: usize| a.abs() > Z95 * c[(k, k)].max(0.0).sqrt();
    !(ratio - Z95 * sd > 1.0) || !amplitude_resolved(a1, 0) || !amplitude_resolved(a2, 2)
}

/// Fits γ_NR in T1(δ) = [(T1(0)(1+4δ²/κ²))⁻¹ + γ_NR]⁻¹ to `(δ, T1)` pairs
/// with `t1_resonant` and `kappa` fixed, minimizing log residuals.
/// Parameter: `gamma_nr` (s⁻¹).
pub fn fit_purcell_t1(points: &[(f64, f64)], t1_resonant: f64, kappa: f64) -> Result<FitResult> {
    if points.is_empty() {
        return Err(invalid("no (detuning, T1) points"));
    }
    if !(t1_resonant > 0.0 && kappa > 0.0) {
        return Err(invalid("t1_resonant and kappa must be positive"));
    }
    if points.iter().any(|&(d, t)| !d.is_finite() || !(t > 0.0 && t.is_finite())) {
        return Err(invalid("detunings must be finite and T1 values positive"));
    }
    // x = γ_NR·T1(0) keeps the parameter near unit scale
    let purcell: Vec<f64> = points.iter().map(|&(d, _)| 1.0 + 4.0 * (d / kappa).powi(2)).collect();
    let residuals = |p: &[f64]| -> Option<Vec<f64>> {
        purcell
            .iter()
            .zip(points)
            .map(|(&l, &(_, t1))| {
                let inv = 1.0 / l + p[0];
                (inv > 0.0).then(|| (t1 / t1_resonant * inv).ln())
            })
            .collect()
    };
    let (k, &l) = purcell
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let x0 = (t1_resonant / points[k].1 - 1.0 / l).max(0.0);
    let fit = least_squares(residuals, &["gamma_nr"], &[x0], &LmOptions::default())?;

    let mut out = FitResult {
        params: vec![fit.params[0] / t1_resonant],
        stderr: vec![fit.stderr[0] / t1_resonant],
        covariance: fit.covariance.as_ref().map(|c| c / (t1_resonant * t1_resonant)),
        ..fit
    };
    let (g, s) = (out.params[0], out.stderr[0]);
    if !(g - Z95 * s > 0.0) {
        out.warnings.push(FitWarning::UnboundedInterval("gamma_nr".into()));
    }
    Ok(out)
}

/// Fits sin²(k√P)-type Rabi data and converts the frequency to a coupling
/// through the resonator photon-number calibration. Parameters: `g` (Hz),
/// `amplitude`, `baseline`.
pub fn fit_rabi(points: &[(f64, f64)], resonator: &Resonator, pulse_duration_s: f64) -> Result<FitResult> {
    if points.len() < 5 {
        return Err(invalid("need at least 5 Rabi points"));
    }
    if !(pulse_duration_s > 0.0) {
        return Err(invalid("pulse duration must be positive"));
    }
    if points.iter().any(|&(p, a)| !(p >= 0.0 && p.is_finite()) || !a.is_finite()) {
        return Err(invalid("powers must be non-negative and amplitudes finite"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let u: Vec<f64> = pts.iter().map(|p| p.0.sqrt()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread <= 1e-12 * mean.abs().max(1.0) {
        return Err(Error::Fit("no Rabi signal: amplitudes are constant".into()));
    }
    let u_max = u[u.len() - 1];
    if !(u_max > 0.0) {
        return Err(invalid("Rabi powers are all zero"));
    }
    let max_du = u.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    // y = b + a·sin²(k u); one period of sin² in u is π/k
    let k_lo = 0.25 * PI / u_max;
    let k_hi = PI / (2.0 * max_du).max(f64::MIN_POSITIVE);
    if k_hi <= k_lo {
        return Err(Error::Fit("Rabi data too sparse to resolve any oscillation".into()));
    }
    const TRIALS: usize = 4000;
    let (b0, a0, k0, _) = (0..TRIALS)
        .map(|j| {
            let k = k_lo + (k_hi - k_lo) * j as f64 / (TRIALS - 1) as f64;
            let (b, a, ssr) = linear_pair(&u, &y, |ui| (k * ui).sin().powi(2));
            (b, a, k, ssr)
        })
        .min_by(|p, q| p.3.total_cmp(&q.3))
        .expect("non-empty trial set");

    let residuals = |p: &[f64]| {
        Some(
            u.iter()
                .zip(&y)
                .map(|(&ui, &yi)| p[2] + p[1] * (p[0] * ui).sin().powi(2) - yi)
                .collect(),
        )
    };
    let fit = least_squares(
        residuals,
        &["k", "amplitude", "baseline"],
        &[k0, a0, b0],
        &LmOptions::default(),
    )?;
    let k = fit.params[0].abs();
    if k * u_max < PI {
        return Err(Error::Fit(format!(
            "Rabi data under-sampled: {:.2} oscillation periods in sqrt(P)",
            k * u_max / PI
        )));
    }

    // θ/2 = k√P = π·2g√(cP)·t_p  ⇒  g = k / (2π·√c·t_p)
    let c = mean_photon_number(1.0, resonator);
    if !(c > 0.0) {
        return Err(invalid("resonator input coupling kappa1 must be positive"));
    }
    let scale = 1.0 / (2.0 * PI * c.sqrt() * pulse_duration_s);
    let mut out = fit.clone();
    out.names = vec!["g".into(), "amplitude".into(), "baseline".into()];
    out.params[0] = k * scale;
    out.stderr[0] = fit.stderr[0] * scale;
    if let Some(cov) = &mut out.covariance {
        for j in 0..3 {
            cov[(0, j)] *= scale;
            cov[(j, 0)] *= scale;
        }
    }
    Ok(out)
}
