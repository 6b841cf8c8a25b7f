//! Scenario runner and diagnostics.
//!
//! One reference trajectory is advanced in blocks; every assimilated
//! trajectory then replays the block against the stored pre-step reference
//! states. Methods never read each other's state, so serial and parallel
//! execution produce identical numbers.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assimilation::{stability_check, Assimilator, FeedbackLaw, LawKind, Observer};
use crate::error::{Error, Result};
use crate::kse::{
    initial_condition, EtdCoefficients, KseParams, KseStepper, DEFAULT_DT, DEFAULT_LENGTH,
};
use crate::spectral::{SpectralField, SpectralGrid};

/// Error level treated as converged to machine precision.
pub const MACHINE_PRECISION_THRESHOLD: f64 = 1e-13;

/// Reference states buffered per block.
const BLOCK_STEPS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Reference starts from the smooth `cos(x/16)(1 + sin(x/16))` profile.
    Fresh,
    /// Reference starts from its own state at `restart_time`.
    #[serde(alias = "chaotic")]
    ChaoticRestart,
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh" => Ok(InitKind::Fresh),
            "chaotic" | "chaotic_restart" | "chaotic-restart" => Ok(InitKind::ChaoticRestart),
            other => Err(Error::InvalidParameter(format!(
                "unknown init `{other}` (expected fresh or chaotic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VInit {
    Zero,
}

/// A feedback law as listed in a scenario; `mu` is shared scenario-wide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub kind: LawKind,
    #[serde(default)]
    pub gamma: f64,
}

impl MethodSpec {
    pub fn new(kind: LawKind, gamma: f64) -> Self {
        Self { kind, gamma }
    }

    pub fn linear() -> Self {
        Self::new(LawKind::Linear, 0.0)
    }

    /// Column label used in output files, e.g. `linear`, `cc_g0.1`.
    pub fn label(&self) -> String {
        match self.kind {
            LawKind::Linear => "linear".to_string(),
            kind => format!("{}_g{}", kind.name(), self.gamma),
        }
    }

    pub fn law(&self, mu: f64) -> Result<FeedbackLaw> {
        FeedbackLaw::new(self.kind, self.gamma, mu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_points: usize,
    pub length: f64,
    pub lambda: f64,
    /// Instability parameter of the assimilated equation; `None` uses `lambda`.
    pub assimilation_lambda: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub mu: f64,
    pub mode_cutoff: usize,
    pub methods: Vec<MethodSpec>,
    pub init: InitKind,
    pub v_init: VInit,
    pub restart_time: f64,
    pub sample_stride: usize,
    pub threshold: f64,
    pub snapshot_times: Vec<f64>,
    pub spectrum_window: [f64; 2],
    pub decay_windows: [[f64; 2]; 2],
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::full()
    }
}

impl ScenarioConfig {
    /// N = 8192 on [-16 pi, 16 pi), lambda = 2, mu = 1, 32 observed modes,
    /// dt = 2^-13, t in [0, 60], all four laws with gamma = 0.1.
    pub fn full() -> Self {
        Self {
            n_points: 8192,
            length: DEFAULT_LENGTH,
            lambda: 2.0,
            assimilation_lambda: None,
            dt: DEFAULT_DT,
            t_end: 60.0,
            mu: 1.0,
            mode_cutoff: 32,
            methods: vec![
                MethodSpec::linear(),
                MethodSpec::new(LawKind::Power, 0.1),
                MethodSpec::new(LawKind::Hybrid, 0.1),
                MethodSpec::new(LawKind::ConcaveConvex, 0.1),
            ],
            init: InitKind::Fresh,
            v_init: VInit::Zero,
            restart_time: 30.0,
            sample_stride: 32,
            threshold: MACHINE_PRECISION_THRESHOLD,
            snapshot_times: vec![4.0, 14.0, 24.0, 34.0],
            spectrum_window: [20.0, 60.0],
            decay_windows: [[5.0, 15.0], [20.0, 26.0]],
        }
    }

    /// Reduced resolution (N = 1024, dt = 2^-10) with the same physics and
    /// the same sampling interval in time.
    pub fn desk() -> Self {
        Self {
            n_points: 1024,
            dt: 1.0 / 1024.0,
            sample_stride: 4,
            ..Self::full()
        }
    }

    pub fn assimilation_lambda(&self) -> f64 {
        self.assimilation_lambda.unwrap_or(self.lambda)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let grid = SpectralGrid::new(self.n_points, self.length)?;
        KseParams::new(self.lambda, self.dt)?;
        KseParams::new(self.assimilation_lambda(), self.dt)?;
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.steps() == 0 {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} is shorter than one step",
                self.t_end
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample_stride must be at least 1".into()));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {}",
                self.threshold
            )));
        }
        if self.init == InitKind::ChaoticRestart
            && !(self.restart_time.is_finite() && self.restart_time > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "restart_time must be positive, got {}",
                self.restart_time
            )));
        }
        let [a, b] = self.spectrum_window;
        if a >= b || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "spectrum window [{a}, {b}] is empty"
            )));
        }
        stability_check(self.mu, self.dt)?;
        Observer::for_grid(self.mode_cutoff, &grid)?;
        let mut labels = Vec::new();
        for m in &self.methods {
            m.law(self.mu)?;
            let label = m.label();
            if labels.contains(&label) {
                return Err(Error::InvalidParameter(format!("duplicate method `{label}`")));
            }
            labels.push(label);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.n_points, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Serial,
    /// Methods advance on the rayon pool.
    Parallel,
}

/// Sampled L2 and H1 norms over time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub err_h1: Vec<f64>,
}

impl ErrorSeries {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, t: f64, l2: f64, h1: f64) {
        self.times.push(t);
        self.err_l2.push(l2);
        self.err_h1.push(h1);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_l2(&self) -> Option<f64> {
        self.err_l2.last().copied()
    }

    /// L2 value at the sample closest to `t`.
    pub fn l2_at(&self, t: f64) -> Option<f64> {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        Some(self.err_l2[i])
    }
}

/// Earliest sample time from which `err_l2 < threshold` holds through the
/// end of the series.
pub fn convergence_time(series: &ErrorSeries, threshold: f64) -> Option<f64> {
    let below = series
        .err_l2
        .iter()
        .rev()
        .take_while(|&&e| e < threshold)
        .count();
    (below > 0).then(|| series.times[series.len() - below])
}

/// Least-squares slope of `ln(err_l2)` against `t` over `[start, end]`.
pub fn decay_rate(series: &ErrorSeries, window: [f64; 2], floor: f64) -> Result<f64> {
    let [start, end] = window;
    let points: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.err_l2)
        .filter(|(t, _)| (start..=end).contains(*t))
        .map(|(&t, &e)| (t, e))
        .collect();
    if points.len() < 2 {
        return Err(Error::EmptyWindow { start, end });
    }
    if points.iter().any(|&(_, e)| e <= floor || !e.is_finite()) {
        return Err(Error::NonPositiveErrors { start, end });
    }
    let n = points.len() as f64;
    let t_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, e)| {
        let dt = t - t_mean;
        (sxy + dt * (e.ln() - y_mean), sxx + dt * dt)
    });
    Ok(sxy / sxx)
}

/// Decay rates over two windows, rejecting errors at or below the
/// machine-precision threshold.
pub fn decay_rate_windows(
    series: &ErrorSeries,
    w1: [f64; 2],
    w2: [f64; 2],
) -> Result<(f64, f64)> {
    Ok((
        decay_rate(series, w1, MACHINE_PRECISION_THRESHOLD)?,
        decay_rate(series, w2, MACHINE_PRECISION_THRESHOLD)?,
    ))
}

/// `|u_m - v_m|` per mode.
pub fn mode_error_snapshot(u_hat: &SpectralField, v_hat: &SpectralField) -> Vec<f64> {
    u_hat
        .0
        .iter()
        .zip(&v_hat.0)
        .map(|(a, b)| (a - b).norm())
        .collect()
}

/// Running mean of `|c_m|` over samples whose time lies in a window.
#[derive(Debug, Clone)]
pub struct SpectrumAccumulator {
    window: [f64; 2],
    sum: Vec<f64>,
    count: usize,
}

impl SpectrumAccumulator {
    pub fn new(window: [f64; 2], n_modes: usize) -> Self {
        Self {
            window,
            sum: vec![0.0; n_modes],
            count: 0,
        }
    }

    pub fn add(&mut self, t: f64, field: &SpectralField) {
        if t < self.window[0] || t > self.window[1] {
            return;
        }
        for (s, c) in self.sum.iter_mut().zip(&field.0) {
            *s += c.norm();
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::EmptyWindow {
                start: self.window[0],
                end: self.window[1],
            });
        }
        let n = self.count as f64;
        Ok(self.sum.iter().map(|s| s / n).collect())
    }
}

/// Mean amplitude spectrum of the samples falling in `window`.
pub fn time_averaged_spectrum(
    samples: &[(f64, SpectralField)],
    window: [f64; 2],
) -> Result<Vec<f64>> {
    let n_modes = samples.first().map_or(0, |s| s.1.len());
    let mut acc = SpectrumAccumulator::new(window, n_modes);
    for (t, s) in samples {
        acc.add(*t, s);
    }
    acc.finish()
}

/// Advances the fresh-start reference to `cfg.restart_time`.
pub fn chaotic_restart_state(cfg: &ScenarioConfig) -> Result<SpectralField> {
    let grid = cfg.grid()?;
    let coeffs = EtdCoefficients::new(&grid, &KseParams::new(cfg.lambda, cfg.dt)?);
    let mut stepper = KseStepper::new(&grid, coeffs)?;
    let mut u = initial_condition(&grid);
    let steps = (cfg.restart_time / cfg.dt).round() as usize;
    for s in 0..steps {
        stepper
            .step(&mut u, None, (s + 1) as f64 * cfg.dt)
            .map_err(|e| e.tag_trajectory("reference pre-run"))?;
    }
    Ok(u)
}

#[derive(Debug, Clone)]
pub struct ReferenceOutcome {
    /// Norms of `u` itself.
    pub norms: ErrorSeries,
    pub spectrum: Vec<f64>,
    pub digest: String,
    pub final_state: SpectralField,
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub label: String,
    pub spec: MethodSpec,
    pub series: ErrorSeries,
    pub convergence_time: Option<f64>,
    pub final_error_l2: f64,
    pub blow_up_time: Option<f64>,
    pub decay_rates: Option<[f64; 2]>,
    pub speedup: Option<f64>,
    /// Time-averaged `|v_m|`; empty if the method blew up before the window.
    pub spectrum: Vec<f64>,
    pub final_state: SpectralField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeErrorSnapshot {
    pub time: f64,
    pub step: usize,
    /// One row per method, in method order; NaN-filled if the method had
    /// already blown up.
    pub errors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: ScenarioConfig,
    pub step_count: usize,
    pub wall_clock_seconds: f64,
    pub grid: SpectralGrid,
    pub reference: ReferenceOutcome,
    pub methods: Vec<MethodOutcome>,
    pub mode_errors: Vec<ModeErrorSnapshot>,
    /// Label of the identity-law method speedups are measured against.
    pub baseline: Option<String>,
}

impl RunArtifacts {
    pub fn method(&self, label: &str) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.label == label)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            scenario: self.config.clone(),
            steps: self.step_count,
            wall_clock_seconds: self.wall_clock_seconds,
            threshold: self.config.threshold,
            baseline: self.baseline.clone(),
            reference_digest: self.reference.digest.clone(),
            methods: self
                .methods
                .iter()
                .map(|m| MethodSummary {
                    label: m.label.clone(),
                    kind: m.spec.kind,
                    gamma: m.spec.gamma,
                    convergence_time: m.convergence_time,
                    speedup: m.speedup,
                    final_error_l2: m.final_error_l2,
                    blow_up_time: m.blow_up_time,
                    decay_rates: m.decay_rates,
                })
                .collect(),
        }
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: ScenarioConfig,
    pub steps: usize,
    pub wall_clock_seconds: f64,
    pub threshold: f64,
    pub baseline: Option<String>,
    pub reference_digest: String,
    pub methods: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub kind: LawKind,
    pub gamma: f64,
    pub convergence_time: Option<f64>,
    pub speedup: Option<f64>,
    pub final_error_l2: f64,
    pub blow_up_time: Option<f64>,
    pub decay_rates: Option<[f64; 2]>,
}

struct Sampling {
    stride: usize,
    dt: f64,
    /// `(step, time)` of each mode-error snapshot.
    snapshot_steps: Vec<(usize, f64)>,
}

struct MethodRun {
    spec: MethodSpec,
    label: String,
    assimilator: Assimilator,
    v: SpectralField,
    series: ErrorSeries,
    blow_up_time: Option<f64>,
    spectrum: SpectrumAccumulator,
    snapshots: Vec<Vec<f64>>,
}

impl MethodRun {
    fn record(&mut self, step: usize, u: &SpectralField, grid: &SpectralGrid, sampling: &Sampling) {
        let t = step as f64 * sampling.dt;
        if step.is_multiple_of(sampling.stride) {
            let diff = u - &self.v;
            let h1 = grid.h1_norm(&diff).expect("same grid");
            self.series.push(t, diff.l2_norm(), h1);
            self.spectrum.add(t, &self.v);
        }
        if sampling.snapshot_steps.iter().any(|&(s, _)| s == step) {
            self.snapshots.push(mode_error_snapshot(u, &self.v));
        }
    }

    /// Replays one block of reference states `states[0..=n]`, where
    /// `states[i]` is the reference at step `first + i`.
    fn advance_block(
        &mut self,
        first: usize,
        states: &[SpectralField],
        is_last: bool,
        grid: &SpectralGrid,
        sampling: &Sampling,
    ) {
        if self.blow_up_time.is_some() {
            return;
        }
        let n = states.len() - 1;
        for (i, u) in states[..n].iter().enumerate() {
            let step = first + i;
            self.record(step, u, grid, sampling);
            let t_next = (step + 1) as f64 * sampling.dt;
            if let Err(e) = self.assimilator.step(u, &mut self.v, t_next) {
                log::warn!("{}: {}", self.label, e.tag_trajectory(&self.label));
                self.blow_up_time = Some(t_next);
                return;
            }
        }
        if is_last {
            self.record(first + n, &states[n], grid, sampling);
        }
    }
}

/// FNV-1a over the bit patterns of sampled reference coefficients.
struct Digest(u64);

impl Digest {
    fn new() -> Self {
        Digest(0xcbf2_9ce4_8422_2325)
    }

    fn update(&mut self, field: &SpectralField) {
        for c in &field.0 {
            for byte in c.re.to_bits().to_le_bytes().into_iter().chain(c.im.to_bits().to_le_bytes()) {
                self.0 ^= u64::from(byte);
                self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }

    fn hex(&self) -> String {
        format!("{:016x}", self.0)
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunArtifacts> {
    run_scenario_with(cfg, Execution::Serial)
}

pub fn run_scenario_with(cfg: &ScenarioConfig, execution: Execution) -> Result<RunArtifacts> {
    cfg.validate()?;
    let started = Instant::now();
    let grid = cfg.grid()?;
    let observer = Observer::for_grid(cfg.mode_cutoff, &grid)?;
    let ref_coeffs = EtdCoefficients::new(&grid, &KseParams::new(cfg.lambda, cfg.dt)?);
    let da_coeffs = EtdCoefficients::new(&grid, &KseParams::new(cfg.assimilation_lambda(), cfg.dt)?);

    let mut u = match cfg.init {
        InitKind::Fresh => initial_condition(&grid),
        InitKind::ChaoticRestart => chaotic_restart_state(cfg)?,
    };
    let mut reference = KseStepper::new(&grid, ref_coeffs)?;

    let total = cfg.steps();
    let sampling = Sampling {
        stride: cfg.sample_stride,
        dt: cfg.dt,
        snapshot_steps: cfg
            .snapshot_times
            .iter()
            .map(|&t| ((t / cfg.dt).round() as usize, t))
            .filter(|&(s, _)| s <= total)
            .collect(),
    };

    let mut runs = cfg
        .methods
        .iter()
        .map(|spec| {
            Ok(MethodRun {
                spec: *spec,
                label: spec.label(),
                assimilator: Assimilator::new(&grid, da_coeffs.clone(), observer, spec.law(cfg.mu)?)?,
                v: match cfg.v_init {
                    VInit::Zero => grid.zeros(),
                },
                series: ErrorSeries::new(spec.label()),
                blow_up_time: None,
                spectrum: SpectrumAccumulator::new(cfg.spectrum_window, grid.n_modes()),
                snapshots: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut norms = ErrorSeries::new("reference");
    let mut ref_spectrum = SpectrumAccumulator::new(cfg.spectrum_window, grid.n_modes());
    let mut digest = Digest::new();
    let mut record_reference = |step: usize, u: &SpectralField| {
        if step.is_multiple_of(cfg.sample_stride) {
            let t = step as f64 * cfg.dt;
            norms.push(t, u.l2_norm(), grid.h1_norm(u).expect("same grid"));
            ref_spectrum.add(t, u);
            digest.update(u);
        }
    };

    let mut states: Vec<SpectralField> = Vec::with_capacity(BLOCK_STEPS + 1);
    let mut first = 0;
    while first < total {
        let last = (first + BLOCK_STEPS).min(total);
        states.clear();
        states.push(u.clone());
        record_reference(first, &u);
        for step in first..last {
            reference
                .step(&mut u, None, (step + 1) as f64 * cfg.dt)
                .map_err(|e| e.tag_trajectory("reference"))?;
            if step + 1 < last {
                record_reference(step + 1, &u);
            }
            states.push(u.clone());
        }
        let is_last = last == total;
        if is_last {
            record_reference(total, &u);
        }
        match execution {
            Execution::Serial => runs
                .iter_mut()
                .for_each(|r| r.advance_block(first, &states, is_last, &grid, &sampling)),
            Execution::Parallel => runs
                .par_iter_mut()
                .for_each(|r| r.advance_block(first, &states, is_last, &grid, &sampling)),
        }
        first = last;
    }

    let mut snapshots = Vec::with_capacity(runs.len());
    let mut methods: Vec<MethodOutcome> = runs
        .into_iter()
        .map(|r| {
            let convergence_time = match r.blow_up_time {
                Some(_) => None,
                None => convergence_time(&r.series, cfg.threshold),
            };
            let decay_rates =
                decay_rate_windows(&r.series, cfg.decay_windows[0], cfg.decay_windows[1])
                    .ok()
                    .map(|(a, b)| [a, b]);
            snapshots.push(r.snapshots);
            MethodOutcome {
                final_error_l2: r.series.last_l2().unwrap_or(f64::NAN),
                spectrum: r.spectrum.finish().unwrap_or_default(),
                label: r.label,
                spec: r.spec,
                series: r.series,
                convergence_time,
                blow_up_time: r.blow_up_time,
                decay_rates,
                speedup: None,
                final_state: r.v,
            }
        })
        .collect();

    let baseline = methods
        .iter()
        .find(|m| m.spec.kind == LawKind::Linear || m.spec.gamma == 0.0)
        .map(|m| (m.label.clone(), m.convergence_time));
    if let Some((_, Some(t_base))) = &baseline {
        for m in &mut methods {
            m.speedup = m.convergence_time.map(|t| t_base / t);
        }
    }

    let mode_errors = sampling
        .snapshot_steps
        .iter()
        .enumerate()
        .map(|(i, &(step, time))| ModeErrorSnapshot {
            time,
            step,
            errors: snapshots
                .iter()
                .map(|per_method| {
                    per_method
                        .get(i)
                        .cloned()
                        .unwrap_or_else(|| vec![f64::NAN; grid.n_modes()])
                })
                .collect(),
        })
        .collect();

    Ok(RunArtifacts {
        config: cfg.clone(),
        step_count: total,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        reference: ReferenceOutcome {
            norms,
            spectrum: ref_spectrum.finish().unwrap_or_default(),
            digest: digest.hex(),
            final_state: u,
        },
        grid,
        methods,
        mode_errors,
        baseline: baseline.map(|b| b.0),
    })
}

/// Decimal text with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_lines<I>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn spectrum_lines(grid: &SpectralGrid, amplitudes: &[f64]) -> Vec<String> {
    std::iter::once("mode,k,amplitude".to_string())
        .chain(
            amplitudes
                .iter()
                .enumerate()
                .map(|(m, a)| format!("{m},{},{}", num(grid.wavenumber(m)), num(*a))),
        )
        .collect()
}

/// Writes `errors.csv`, `spectrum_<label>.csv`, `mode_error_t<time>.csv`
/// and `summary.json` into `dir`, creating it if needed.
pub fn write_artifacts(r: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let path = dir.join("errors.csv");
    let header = std::iter::once("t,method,err_l2,err_h1".to_string());
    let rows = r.methods.iter().flat_map(|m| {
        let s = &m.series;
        (0..s.len()).map(move |i| {
            format!(
                "{},{},{},{}",
                num(s.times[i]),
                m.label,
                num(s.err_l2[i]),
                num(s.err_h1[i])
            )
        })
    });
    write_lines(&path, header.chain(rows))?;
    written.push(path);

    let path = dir.join("spectrum_reference.csv");
    write_lines(&path, spectrum_lines(&r.grid, &r.reference.spectrum))?;
    written.push(path);
    for m in &r.methods {
        let path = dir.join(format!("spectrum_{}.csv", m.label));
        write_lines(&path, spectrum_lines(&r.grid, &m.spectrum))?;
        written.push(path);
    }

    for snap in &r.mode_errors {
        let path = dir.join(format!("mode_error_t{}.csv", snap.time));
        let mut header = String::from("mode,k");
        for m in &r.methods {
            header.push(',');
            header.push_str(&m.label);
        }
        let rows = (0..r.grid.n_modes()).map(|mode| {
            let mut line = format!("{mode},{}", num(r.grid.wavenumber(mode)));
            for errors in &snap.errors {
                line.push(',');
                line.push_str(&num(errors[mode]));
            }
            line
        });
        write_lines(&path, std::iter::once(header).chain(rows))?;
        written.push(path);
    }

    let path = dir.join("summary.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &r.summary())?;
    writeln!(w).map_err(|e| Error::io(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    Ok(written)
}
