use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};

/// Relative predicted decrease of the SSR below which a step is not taken.
const PREDICTED_GAIN_TOL: f64 = 1e-12;

/// Stopping rules and damping schedule for [`least_squares`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Infinity norm of Jᵀr.
    pub gradient_tol: f64,
    /// Step norm relative to the parameter norm.
    pub step_tol: f64,
    pub initial_damping: f64,
    pub damping_factor: f64,
    /// Damping above this value means no descent direction was found.
    pub max_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iterations: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-12,
            initial_damping: 1e-8,
            damping_factor: 10.0,
            max_damping: 1e16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitWarning {
    /// Normal equations singular at the optimum; some stderr are infinite.
    SingularCovariance,
    /// The 95% interval of the named parameter reaches zero or beyond.
    UnboundedInterval(String),
    /// The two time constants of a double exponential are not resolved.
    IndistinguishableTimeConstants,
    /// The solver stopped because damping grew without bound.
    Stalled,
}

impl std::fmt::Display for FitWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitWarning::SingularCovariance => f.write_str("singular covariance"),
            FitWarning::UnboundedInterval(name) => write!(f, "95% interval of {name} reaches zero"),
            FitWarning::IndistinguishableTimeConstants => f.write_str("time constants indistinguishable"),
            FitWarning::Stalled => f.write_str("stalled"),
        }
    }
}

/// Parameters, linearized standard errors and convergence status of a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub stderr: Vec<f64>,
    /// (JᵀJ)⁻¹·σ² at the optimum; `None` when JᵀJ is singular.
    pub covariance: Option<DMatrix<f64>>,
    /// Sum of squared residuals.
    pub residual_norm: f64,
    pub converged: bool,
    /// Accepted steps.
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.index(name).map(|k| self.params[k])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.index(name).map(|k| self.stderr[k])
    }

    pub fn has_warning(&self, w: &FitWarning) -> bool {
        self.warnings.contains(w)
    }
}

/// Raw solver output before naming.
#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub converged: bool,
    pub stalled: bool,
    pub iterations: usize,
    pub jacobian: DMatrix<f64>,
}

fn eval<F>(f: &F, p: &[f64]) -> Option<DVector<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let r = f(p)?;
    r.iter().all(|v| v.is_finite()).then(|| DVector::from_vec(r))
}

/// Forward-difference Jacobian; falls back to a backward step where the
/// model rejects the forward point.
pub(crate) fn forward_jacobian<F>(f: &F, p: &[f64], r: &DVector<f64>) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(r.len(), p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = f64::EPSILON.sqrt() * p[j].abs().max(1.0);
        let mut col = None;
        for step in [h, -h] {
            q[j] = p[j] + step;
            let actual = q[j] - p[j];
            if let Some(rh) = eval(f, &q) {
                if rh.len() == r.len() {
                    col = Some((rh - r) / actual);
                    break;
                }
            }
        }
        q[j] = p[j];
        jac.set_column(j, &col?);
    }
    Some(jac)
}

/// Minimizes ‖r(p)‖² by Levenberg–Marquardt with Marquardt diagonal
/// scaling. `residuals` returns `None` for parameters outside the model
/// domain, which rejects the trial step.
pub(crate) fn minimize<F>(residuals: F, p0: &[f64], opts: &LmOptions) -> Result<Solution>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    if p0.is_empty() {
        return Err(invalid("no parameters to fit"));
    }
    let mut p = p0.to_vec();
    let mut r = eval(&residuals, &p).ok_or_else(|| invalid("model not finite at the initial parameters"))?;
    if r.len() < p.len() {
        return Err(invalid(format!("{} residuals for {} parameters", r.len(), p.len())));
    }
    let mut ssr = r.norm_squared();
    let mut lambda = opts.initial_damping;
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;
    let n = p.len();

    let mut jac =
        forward_jacobian(&residuals, &p, &r).ok_or_else(|| invalid("Jacobian not computable at the initial parameters"))?;
    while iterations < opts.max_iterations {
        let grad = jac.transpose() * &r;
        if grad.amax() < opts.gradient_tol {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let diag: Vec<f64> = (0..n).map(|k| if jtj[(k, k)] > 0.0 { jtj[(k, k)] } else { 1.0 }).collect();
        let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();

        let mut accepted = false;
        let mut first_attempt = true;
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * diag[k];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= opts.damping_factor;
                    if lambda > opts.max_damping {
                        stalled = true;
                        break;
                    }
                    continue;
                }
            };
            if step.norm() <= opts.step_tol * (p_norm + opts.step_tol) {
                converged = true;
                break;
            }
            if first_attempt {
                // Gauss–Newton step whose predicted gain is at rounding level.
                let predicted = -2.0 * step.dot(&grad) - (&jac * &step).norm_squared();
                if predicted <= PREDICTED_GAIN_TOL * ssr {
                    converged = true;
                    break;
                }
                first_attempt = false;
            }
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match eval(&residuals, &trial) {
                Some(rt) if rt.norm_squared() < ssr => {
                    p = trial;
                    ssr = rt.norm_squared();
                    r = rt;
                    lambda = (lambda / opts.damping_factor).max(1e-300);
                    accepted = true;
                    iterations += 1;
                    break;
                }
                _ => {
                    lambda *= opts.damping_factor;
                    if lambda > opts.max_damping {
                        stalled = true;
                        break;
                    }
                }
            }
        }
        if !accepted {
            break;
        }
        match forward_jacobian(&residuals, &p, &r) {
            Some(j) => jac = j,
            None => {
                stalled = true;
                break;
            }
        }
    }

    Ok(Solution {
        params: p,
        residual_norm: ssr,
        converged,
        stalled,
        iterations,
        jacobian: jac,
    })
}

/// Linearized covariance (JᵀJ)⁻¹·SSR/(m−n); `None` if singular or m ≤ n.
pub(crate) fn covariance(jac: &DMatrix<f64>, ssr: f64) -> Option<DMatrix<f64>> {
    let (m, n) = jac.shape();
    if m <= n {
        return None;
    }
    let jtj = jac.transpose() * jac;
    // Scale to unit diagonal before inverting to keep conditioning honest.
    let d: Vec<f64> = (0..n).map(|k| jtj[(k, k)].sqrt()).collect();
    if d.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| jtj[(i, j)] / (d[i] * d[j]));
    let svd = scaled.clone().svd(false, false);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    if !(smin > 1e-13 * smax) {
        return None;
    }
    let inv = scaled.cholesky()?.inverse();
    let sigma2 = ssr / (m - n) as f64;
    Some(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * sigma2 / (d[i] * d[j])))
}

pub(crate) fn into_result(names: &[&str], sol: Solution) -> FitResult {
    let cov = covariance(&sol.jacobian, sol.residual_norm);
    let stderr = match &cov {
        Some(c) => (0..names.len()).map(|k| c[(k, k)].max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; names.len()],
    };
    let mut warnings = Vec::new();
    if cov.is_none() {
        warnings.push(FitWarning::SingularCovariance);
    }
    if sol.stalled {
        warnings.push(FitWarning::Stalled);
    }
    FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        params: sol.params,
        stderr,
        covariance: cov,
        residual_norm: sol.residual_norm,
        converged: sol.converged,
        iterations: sol.iterations,
        warnings,
    }
}

/// Fits named parameters by minimizing the squared norm of `residuals`.
pub fn least_squares<F>(residuals: F, names: &[&str], p0: &[f64], opts: &LmOptions) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    if names.len() != p0.len() {
        return Err(invalid("one name per parameter required"));
    }
    Ok(into_result(names, minimize(residuals, p0, opts)?))
}

/// Fits `model(params, x)` to `(x, y)` pairs in the ordinary least-squares
/// sense.
pub fn levenberg_marquardt<M>(model: M, params0: &[(&str, f64)], data: &[(f64, f64)], opts: &LmOptions) -> Result<FitResult>
where
    M: Fn(&[f64], f64) -> f64,
{
    let names: Vec<&str> = params0.iter().map(|(n, _)| *n).collect();
    let p0: Vec<f64> = params0.iter().map(|(_, v)| *v).collect();
    least_squares(
        |p| Some(data.iter().map(|&(x, y)| model(p, x) - y).collect()),
        &names,
        &p0,
        opts,
    )
}
