//! Each command first turns its config sections into validated plans, then
//! computes, and returns its outputs as in-memory artifacts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use purcellsim::cavity::{purcell_rate, t1_of_delta, Resonator};
use purcellsim::fit::{fit_double_exponential, fit_exponential, fit_purcell_t1, fit_rabi, FitResult};
use purcellsim::sequence::{
    add_gaussian_noise, field_sweep_spectrum, simulate_rabi, DecayCurve, DetectionPair, FieldPulse, InversionRecovery, PulseSpec,
    SaturationRecovery, SaturationScheme, SpectralLine,
};
use purcellsim::spin::{transition_table, SpinSystem};

use crate::config::{RunConfig, SaturationConfig, SaturationMode};
use crate::error::CliError;
use crate::output::{csv_artifact, fit_artifact, num, read_xy, xy_artifact, Artifact};

pub const DECAY_HEADER: [&str; 2] = ["time_s", "A_Q"];
pub const SWEEP_HEADER: [&str; 2] = ["B0_T", "A_Q"];
pub const RABI_HEADER: [&str; 2] = ["power_W", "A_Q"];
pub const PURCELL_HEADER: [&str; 2] = ["delta_Hz", "T1_s"];
pub const TRANSITION_HEADER: [&str; 8] = [
    "fromF",
    "frommF",
    "toF",
    "tomF",
    "frequency_Hz",
    "matrix_element",
    "dfdB_Hz_per_T",
    "branch",
];

pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub sha: &'a str,
    pub seed: u64,
}

// fixed noise streams keep each output independent of command order
const STREAM_INVERSION: u64 = 1;
const STREAM_SATURATION: u64 = 2;
const STREAM_RABI: u64 = 3;
const STREAM_SCAN: u64 = 4;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn positive(what: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{what} must be positive, got {v}")))
    }
}

fn noise_level(what: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!(
            "{what}.noise_sigma must be finite and non-negative"
        )))
    }
}

fn noisy(curve: DecayCurve, sigma: f64, rng: &mut ChaCha8Rng) -> Result<DecayCurve, CliError> {
    if sigma > 0.0 {
        Ok(curve.with_noise(sigma, rng)?)
    } else {
        Ok(curve)
    }
}

// ---- transitions -------------------------------------------------------

struct TransitionsPlan {
    system: SpinSystem,
    b0_t: f64,
    min_matrix_element: f64,
}

fn transitions_plan(cfg: &RunConfig) -> Result<TransitionsPlan, CliError> {
    let t = cfg.section("transitions", &cfg.transitions)?;
    if !(t.b0_t >= 0.0 && t.b0_t.is_finite()) {
        return Err(CliError::config("[transitions]: B0_T must be finite and non-negative"));
    }
    Ok(TransitionsPlan {
        system: cfg.spin_system()?,
        b0_t: t.b0_t,
        min_matrix_element: t.min_matrix_element,
    })
}

fn run_transitions(ctx: &Ctx, plan: &TransitionsPlan) -> Result<Artifact, CliError> {
    let table = transition_table(&plan.system, plan.b0_t, plan.min_matrix_element)?;
    let rows = table.iter().map(|t| {
        vec![
            num(t.from.f.value()),
            num(t.from.mf.value()),
            num(t.to.f.value()),
            num(t.to.mf.value()),
            num(t.frequency_hz),
            num(t.matrix_element),
            num(t.dfdb_hz_per_t),
            t.branch.to_string(),
        ]
    });
    Ok(csv_artifact("transitions.csv", ctx.sha, &TRANSITION_HEADER, rows))
}

pub fn transitions(ctx: &Ctx) -> Result<Vec<Artifact>, CliError> {
    let plan = transitions_plan(ctx.cfg)?;
    Ok(vec![run_transitions(ctx, &plan)?])
}

// ---- purcell -----------------------------------------------------------

struct PurcellPlan {
    t1_resonant: f64,
    kappa: f64,
    gamma_nr: f64,
    /// Leading δ = 0, then the configured sweep.
    detunings: Vec<f64>,
}

fn purcell_plan(cfg: &RunConfig) -> Result<PurcellPlan, CliError> {
    let p = cfg.section("purcell", &cfg.purcell)?;
    let res = cfg.resonator(&p.resonator)?;
    let t1_resonant = match p.t1_resonant_s {
        Some(t) => positive("[purcell].t1_resonant_s", t)?,
        None => 1.0 / purcell_rate(cfg.coupling_g(None)?, res.kappa(), 0.0),
    };
    let mut detunings = vec![0.0];
    detunings.extend(
        p.detunings
            .values("[purcell].detunings_Hz")?
            .into_iter()
            .filter(|&d| d != 0.0),
    );
    Ok(PurcellPlan {
        t1_resonant,
        kappa: res.kappa(),
        gamma_nr: cfg.gamma_nr()?,
        detunings,
    })
}

fn purcell_curve(plan: &PurcellPlan) -> Vec<(f64, f64)> {
    plan.detunings
        .iter()
        .map(|&d| (d, t1_of_delta(plan.t1_resonant, plan.kappa, d, plan.gamma_nr)))
        .collect()
}

pub fn purcell(ctx: &Ctx) -> Result<Vec<Artifact>, CliError> {
    let plan = purcell_plan(ctx.cfg)?;
    Ok(vec![xy_artifact(
        "purcell.csv",
        ctx.sha,
        PURCELL_HEADER,
        purcell_curve(&plan),
    )])
}

// ---- inversion recovery ------------------------------------------------

struct InversionPlan {
    sim: InversionRecovery,
    times: Vec<f64>,
    noise: f64,
}

fn inversion_plan(cfg: &RunConfig) -> Result<InversionPlan, CliError> {
    let c = cfg.section("inversion", &cfg.inversion)?;
    let res = cfg.resonator(&c.resonator)?;
    let invert = PulseSpec::pi(positive("[inversion].t_invert_s", c.t_invert_s)?).with_profile(c.invert_profile.into());
    let detect = DetectionPair::hahn(positive("[inversion].t_pi_detect_s", c.t_pi_detect_s)?);
    let mut sim = InversionRecovery::new(cfg.line()?, res, cfg.coupling_g(c.g_hz)?, cfg.gamma_nr()?, invert, detect);
    if let Some(n) = c.grid_points {
        sim.grid_points = n;
    }
    Ok(InversionPlan {
        sim,
        times: c.times_s.values("[inversion].times_s")?,
        noise: noise_level("[inversion]", c.noise_sigma)?,
    })
}

fn run_inversion(plan: &InversionPlan, seed: u64) -> Result<DecayCurve, CliError> {
    let curve = plan.sim.simulate(&plan.times)?;
    noisy(curve, plan.noise, &mut rng(seed, STREAM_INVERSION))
}

// ---- saturation recovery -----------------------------------------------

struct SaturationPlan {
    base: SaturationRecovery,
    mode: SaturationMode,
    times: Vec<f64>,
    noise: f64,
    /// Configured plateau detuning, if any.
    detuning: Option<f64>,
    coil_bandwidth_hz: f64,
    buffer_s: f64,
    field_steps: Option<Vec<f64>>,
    bandwidth_hz: f64,
    carrier_offset_hz: f64,
}

fn saturation_plan(cfg: &RunConfig) -> Result<SaturationPlan, CliError> {
    let c: &SaturationConfig = cfg.section("saturation", &cfg.saturation)?;
    let res = cfg.resonator(&c.resonator)?;
    if !(c.dfdb_hz_per_t != 0.0 && c.dfdb_hz_per_t.is_finite()) {
        return Err(CliError::config("[saturation]: dfdB_Hz_per_T must be finite and nonzero"));
    }
    let detect = DetectionPair::hahn(positive("[saturation].t_pi_detect_s", c.t_pi_detect_s)?);
    let mut plan = SaturationPlan {
        base: SaturationRecovery::new(
            cfg.line()?,
            res,
            cfg.coupling_g(c.g_hz)?,
            cfg.gamma_nr()?,
            SaturationScheme::default(),
            c.dfdb_hz_per_t,
            detect,
        ),
        mode: c.mode,
        times: c.times_s.values("[saturation].times_s")?,
        noise: noise_level("[saturation]", c.noise_sigma)?,
        detuning: c.pulse_detuning_hz,
        coil_bandwidth_hz: c.coil_bandwidth_hz,
        buffer_s: c.buffer_s,
        field_steps: c.field_steps_t.clone(),
        bandwidth_hz: positive("[saturation].bandwidth_Hz", c.bandwidth_hz)?,
        carrier_offset_hz: c.carrier_offset_hz,
    };
    if let Some(n) = c.grid_points {
        plan.base.grid_points = n;
    }
    // surface scheme and pulse errors now rather than mid-run
    plan.sim(plan.mode, plan.detuning)
        .map_err(|e| CliError::config(format!("[saturation]: {e}")))?;
    Ok(plan)
}

impl SaturationPlan {
    fn sim(&self, mode: SaturationMode, detuning: Option<f64>) -> Result<SaturationRecovery, CliError> {
        let scheme = match (mode, &self.field_steps) {
            (SaturationMode::Plain, _) => SaturationScheme::Plain {
                bandwidth_hz: self.bandwidth_hz,
                carrier_offset_hz: self.carrier_offset_hz,
            },
            (SaturationMode::Swept, Some(steps)) => SaturationScheme::Swept {
                field_steps_t: steps.clone(),
                bandwidth_hz: self.bandwidth_hz,
            },
            (SaturationMode::Swept, None) => {
                SaturationScheme::swept_over(&self.base.line, self.base.dfdb_hz_per_t, self.bandwidth_hz)?
            }
        };
        let mut sim = SaturationRecovery {
            scheme,
            ..self.base.clone()
        };
        if let Some(d) = detuning {
            let pulse = FieldPulse::new(d / sim.dfdb_hz_per_t, self.coil_bandwidth_hz, self.buffer_s)?;
            sim = sim.with_field_pulse(pulse);
        }
        Ok(sim)
    }
}

fn run_saturation(
    plan: &SaturationPlan,
    mode: SaturationMode,
    times: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<DecayCurve, CliError> {
    let curve = plan.sim(mode, plan.detuning)?.simulate(times)?;
    noisy(curve, plan.noise, rng)
}

// ---- rabi --------------------------------------------------------------

struct RabiPlan {
    resonator: Resonator,
    pulse_s: f64,
    g_hz: f64,
    powers: Vec<f64>,
    noise: f64,
}

fn rabi_plan(cfg: &RunConfig) -> Result<RabiPlan, CliError> {
    let c = cfg.section("rabi", &cfg.rabi)?;
    let powers = c.powers.values("[rabi].powers_W")?;
    if powers.iter().any(|&p| p < 0.0) {
        return Err(CliError::config("[rabi].powers_W must be non-negative"));
    }
    Ok(RabiPlan {
        resonator: cfg.resonator(&c.resonator)?,
        pulse_s: positive("[rabi].pulse_s", c.pulse_s)?,
        g_hz: cfg.coupling_g(c.g_hz)?,
        powers,
        noise: noise_level("[rabi]", c.noise_sigma)?,
    })
}

fn run_rabi(plan: &RabiPlan, seed: u64) -> Result<Vec<(f64, f64)>, CliError> {
    let data = simulate_rabi(&plan.powers, plan.pulse_s, plan.g_hz, &plan.resonator)?;
    if plan.noise == 0.0 {
        return Ok(data);
    }
    let (p, mut a): (Vec<f64>, Vec<f64>) = data.into_iter().unzip();
    add_gaussian_noise(&mut a, plan.noise, &mut rng(seed, STREAM_RABI))?;
    Ok(p.into_iter().zip(a).collect())
}

// ---- field sweep -------------------------------------------------------

struct SweepPlan {
    system: SpinSystem,
    /// Doublet shape about each transition's own frequency.
    shape: SpectralLine,
    fields: Vec<f64>,
    resonator: String,
}

fn sweep_plan(cfg: &RunConfig) -> Result<SweepPlan, CliError> {
    let c = cfg.section("fieldsweep", &cfg.fieldsweep)?;
    cfg.resonator(&c.resonator)?;
    let l = cfg.section("line", &cfg.line)?;
    let shape =
        SpectralLine::strain_doublet(0.0, l.splitting_hz, l.fwhm_hz).map_err(|e| CliError::config(format!("[line]: {e}")))?;
    let fields = c.fields.values("[fieldsweep].fields_T")?;
    if fields.iter().any(|&b| b < 0.0) {
        return Err(CliError::config("[fieldsweep].fields_T must be non-negative"));
    }
    Ok(SweepPlan {
        system: cfg.spin_system()?,
        shape,
        fields,
        resonator: c.resonator.clone(),
    })
}

fn run_sweep(plan: &SweepPlan, res: &Resonator) -> Result<Vec<(f64, f64)>, CliError> {
    let sweep = field_sweep_spectrum(&plan.system, &plan.shape, res, &plan.fields)?;
    Ok(sweep.points().collect())
}

// ---- simulate ----------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Protocol {
    Inversion,
    Saturation,
    Rabi,
    Fieldsweep,
}

pub fn simulate(ctx: &Ctx, protocol: Protocol) -> Result<Vec<Artifact>, CliError> {
    let cfg = ctx.cfg;
    let artifact = match protocol {
        Protocol::Inversion => {
            let plan = inversion_plan(cfg)?;
            xy_artifact(
                "inversion.csv",
                ctx.sha,
                DECAY_HEADER,
                run_inversion(&plan, ctx.seed)?.points(),
            )
        }
        Protocol::Saturation => {
            let plan = saturation_plan(cfg)?;
            let curve = run_saturation(&plan, plan.mode, &plan.times, &mut rng(ctx.seed, STREAM_SATURATION))?;
            xy_artifact("saturation.csv", ctx.sha, DECAY_HEADER, curve.points())
        }
        Protocol::Rabi => {
            let plan = rabi_plan(cfg)?;
            xy_artifact("rabi.csv", ctx.sha, RABI_HEADER, run_rabi(&plan, ctx.seed)?)
        }
        Protocol::Fieldsweep => {
            let plan = sweep_plan(cfg)?;
            let res = cfg.resonator(&plan.resonator)?;
            xy_artifact("fieldsweep.csv", ctx.sha, SWEEP_HEADER, run_sweep(&plan, &res)?)
        }
    };
    Ok(vec![artifact])
}

// ---- fit ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    Exp,
    Dexp,
    Purcell,
    Rabi,
}

impl FitModel {
    fn name(self) -> &'static str {
        match self {
            FitModel::Exp => "exp",
            FitModel::Dexp => "dexp",
            FitModel::Purcell => "purcell",
            FitModel::Rabi => "rabi",
        }
    }
}

fn curve_of(points: Vec<(f64, f64)>) -> Result<DecayCurve, CliError> {
    let (t, a) = points.into_iter().unzip();
    Ok(DecayCurve::new(t, a)?)
}

pub fn fit(ctx: &Ctx, model: FitModel, input: &std::path::Path) -> Result<Vec<Artifact>, CliError> {
    let cfg = ctx.cfg;
    let result: FitResult = match model {
        FitModel::Exp => fit_exponential(&curve_of(read_xy(input, DECAY_HEADER)?)?)?,
        FitModel::Dexp => fit_double_exponential(&curve_of(read_xy(input, DECAY_HEADER)?)?)?,
        FitModel::Purcell => {
            let plan = purcell_plan(cfg)?;
            fit_purcell_t1(&read_xy(input, PURCELL_HEADER)?, plan.t1_resonant, plan.kappa)?
        }
        FitModel::Rabi => {
            let plan = rabi_plan(cfg)?;
            fit_rabi(&read_xy(input, RABI_HEADER)?, &plan.resonator, plan.pulse_s)?
        }
    };
    let name = format!("fit_{}.json", model.name());
    Ok(vec![fit_artifact(&name, ctx.sha, model.name(), &result)])
}

// ---- reproduce ---------------------------------------------------------

/// Recovery window scaled to the expected T1 at each detuning.
const SCAN_WINDOW_T1: f64 = 5.0;

/// The full set of reference outputs in one deterministic run. All sections
/// are validated before the first simulation.
pub fn reproduce(ctx: &Ctx) -> Result<Vec<Artifact>, CliError> {
    let cfg = ctx.cfg;
    let sha = ctx.sha;
    let transitions = transitions_plan(cfg)?;
    let resonators = cfg.all_resonators()?;
    let sweep = sweep_plan(cfg)?;
    let rabi = rabi_plan(cfg)?;
    let inversion = inversion_plan(cfg)?;
    let saturation = saturation_plan(cfg)?;
    let purcell = purcell_plan(cfg)?;

    let mut out = vec![run_transitions(ctx, &transitions)?];

    for (name, res) in &resonators {
        out.push(xy_artifact(
            &format!("fieldsweep_{name}.csv"),
            sha,
            SWEEP_HEADER,
            run_sweep(&sweep, res)?,
        ));
    }

    let rabi_data = run_rabi(&rabi, ctx.seed)?;
    out.push(fit_artifact(
        "fit_rabi.json",
        sha,
        "rabi",
        &fit_rabi(&rabi_data, &rabi.resonator, rabi.pulse_s)?,
    ));
    out.push(xy_artifact("rabi.csv", sha, RABI_HEADER, rabi_data));

    // configured readout, then a readout as short as the inversion pulse
    let narrow = run_inversion(&inversion, ctx.seed)?;
    out.push(fit_artifact("fit_inversion.json", sha, "exp", &fit_exponential(&narrow)?));
    out.push(xy_artifact("inversion.csv", sha, DECAY_HEADER, narrow.points()));
    let mut short = InversionPlan {
        sim: inversion.sim.clone(),
        times: inversion.times.clone(),
        noise: inversion.noise,
    };
    short.sim.detect = DetectionPair::hahn(inversion.sim.invert.duration_s);
    let broad = run_inversion(&short, ctx.seed)?;
    out.push(fit_artifact(
        "fit_inversion_short_readout.json",
        sha,
        "exp",
        &fit_exponential(&broad)?,
    ));
    out.push(xy_artifact("inversion_short_readout.csv", sha, DECAY_HEADER, broad.points()));

    // plain and swept saturation at the configured detuning
    let mut sat_rng = rng(ctx.seed, STREAM_SATURATION);
    for (mode, label) in [(SaturationMode::Plain, "plain"), (SaturationMode::Swept, "swept")] {
        let curve = run_saturation(&saturation, mode, &saturation.times, &mut sat_rng)?;
        out.push(fit_artifact(
            &format!("fit_saturation_{label}.json"),
            sha,
            "dexp",
            &fit_double_exponential(&curve)?,
        ));
        out.push(xy_artifact(
            &format!("saturation_{label}.csv"),
            sha,
            DECAY_HEADER,
            curve.points(),
        ));
    }

    // detuning scan: swept saturation at each purcell detuning, fitted
    let mut scan_rng = rng(ctx.seed, STREAM_SCAN);
    let n_times = saturation.times.len().max(4);
    let mut curves = Vec::new();
    let mut fitted = Vec::new();
    for &d in &purcell.detunings {
        let expected = t1_of_delta(purcell.t1_resonant, purcell.kappa, d, purcell.gamma_nr);
        let stop = SCAN_WINDOW_T1 * expected;
        let times: Vec<f64> = (1..=n_times).map(|k| stop * k as f64 / n_times as f64).collect();
        let sim = saturation.sim(SaturationMode::Swept, (d != 0.0).then_some(d))?;
        let curve = noisy(sim.simulate(&times)?, saturation.noise, &mut scan_rng)?;
        fitted.push((d, fit_exponential(&curve)?.params[1]));
        curves.extend(curve.points().map(|(t, a)| vec![num(d), num(t), num(a)]));
    }
    out.push(csv_artifact("detuning_scan.csv", sha, &["delta_Hz", "time_s", "A_Q"], curves));
    out.push(fit_artifact(
        "fit_purcell.json",
        sha,
        "purcell",
        &fit_purcell_t1(&fitted, purcell.t1_resonant, purcell.kappa)?,
    ));
    out.push(xy_artifact("purcell_fitted.csv", sha, PURCELL_HEADER, fitted));
    out.push(xy_artifact("purcell.csv", sha, PURCELL_HEADER, purcell_curve(&purcell)));
    Ok(out)
}
