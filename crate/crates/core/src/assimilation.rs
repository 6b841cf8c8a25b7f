//! Continuous data assimilation by feedback nudging.
//!
//! The assimilated solution `v` obeys the model equation plus a feedback
//! term `mu * N(I(u) - I(v))`, where `I` projects onto the lowest Fourier
//! modes and `N` is one of the laws in [`LawKind`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kse::{EtdCoefficients, KseStepper};
use crate::spectral::{SpectralField, SpectralGrid, Transform};

/// Low-mode Fourier projection keeping modes `1..=mode_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observer {
    mode_cutoff: usize,
}

impl Observer {
    pub fn new(mode_cutoff: usize) -> Result<Self> {
        if mode_cutoff == 0 {
            return Err(Error::InvalidParameter(
                "observer needs at least one mode".into(),
            ));
        }
        Ok(Self { mode_cutoff })
    }

    /// Like [`Observer::new`], additionally checking the grid's dealiased band.
    pub fn for_grid(mode_cutoff: usize, grid: &SpectralGrid) -> Result<Self> {
        let observer = Self::new(mode_cutoff)?;
        observer.check_band(grid.n_modes())?;
        Ok(observer)
    }

    pub fn mode_cutoff(&self) -> usize {
        self.mode_cutoff
    }

    fn check_band(&self, n_modes: usize) -> Result<()> {
        // n_modes = N/2 + 1
        let band = (2 * (n_modes.saturating_sub(1))) / 3;
        if self.mode_cutoff > band {
            return Err(Error::CutoffTooLarge {
                cutoff: self.mode_cutoff,
                band,
            });
        }
        Ok(())
    }

    pub fn observe(&self, s: &SpectralField) -> Result<SpectralField> {
        self.check_band(s.len())?;
        let mut out = s.clone();
        self.project_in_place(&mut out.0);
        Ok(out)
    }

    fn project_in_place(&self, coeffs: &mut [Complex64]) {
        coeffs[0] = Complex64::new(0.0, 0.0);
        for c in &mut coeffs[self.mode_cutoff + 1..] {
            *c = Complex64::new(0.0, 0.0);
        }
    }

    /// Writes `I(u) - I(v)` into `out`.
    fn observed_difference(&self, u: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for m in 1..=self.mode_cutoff {
            out[m] = u[m] - v[m];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawKind {
    /// `N(x) = x`
    #[serde(rename = "linear")]
    Linear,
    /// `N(x) = x |x|^-gamma`
    #[serde(rename = "power")]
    Power,
    /// Power law for `|x| < 1`, identity beyond.
    #[serde(rename = "hybrid")]
    Hybrid,
    /// Power law for `|x| < 1`, `x |x|^gamma` beyond.
    #[serde(rename = "cc")]
    ConcaveConvex,
}

impl LawKind {
    pub const ALL: [LawKind; 4] = [
        LawKind::Linear,
        LawKind::Power,
        LawKind::Hybrid,
        LawKind::ConcaveConvex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawKind::Linear => "linear",
            LawKind::Power => "power",
            LawKind::Hybrid => "hybrid",
            LawKind::ConcaveConvex => "cc",
        }
    }
}

impl fmt::Display for LawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LawKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" | "aot" => Ok(LawKind::Linear),
            "power" => Ok(LawKind::Power),
            "hybrid" => Ok(LawKind::Hybrid),
            "cc" | "concave-convex" | "concave_convex" => Ok(LawKind::ConcaveConvex),
            other => Err(Error::InvalidParameter(format!(
                "unknown feedback law `{other}` (expected linear, power, hybrid or cc)"
            ))),
        }
    }
}

/// A feedback nonlinearity with its exponent and nudging strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackLaw {
    pub kind: LawKind,
    pub gamma: f64,
    pub mu: f64,
}

impl FeedbackLaw {
    pub fn new(kind: LawKind, gamma: f64, mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be non-negative, got {mu}"
            )));
        }
        Ok(Self { kind, gamma, mu })
    }

    pub fn linear(mu: f64) -> Result<Self> {
        Self::new(LawKind::Linear, 0.0, mu)
    }

    /// True when the law reduces to `N(x) = x`.
    pub fn is_identity(&self) -> bool {
        self.kind == LawKind::Linear || self.gamma == 0.0
    }

    pub fn apply(&self, x: f64) -> f64 {
        apply_law(self, x)
    }
}

/// Evaluates the law's nonlinearity `N(x)`; `mu` is not applied.
pub fn apply_law(law: &FeedbackLaw, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = x.abs();
    let magnitude = match law.kind {
        LawKind::Linear => a,
        LawKind::Power => a.powf(1.0 - law.gamma),
        LawKind::Hybrid if a >= 1.0 => a,
        LawKind::ConcaveConvex if a >= 1.0 => a.powf(1.0 + law.gamma),
        LawKind::Hybrid | LawKind::ConcaveConvex => a.powf(1.0 - law.gamma),
    };
    magnitude.copysign(x)
}

/// Pass if `dt < 2 / mu`; the feedback term is explicit.
pub fn stability_check(mu: f64, dt: f64) -> Result<()> {
    if mu <= 0.0 {
        return Ok(());
    }
    let bound = 2.0 / mu;
    if dt < bound {
        Ok(())
    } else {
        Err(Error::Unstable { dt, mu, bound })
    }
}

/// Workspace for evaluating the feedback forcing on one grid.
pub struct FeedbackWorkspace {
    grid: SpectralGrid,
    observer: Observer,
    law: FeedbackLaw,
    transform: Transform,
    diff: Vec<Complex64>,
    physical: Vec<f64>,
}

impl FeedbackWorkspace {
    pub fn new(grid: &SpectralGrid, observer: Observer, law: FeedbackLaw) -> Result<Self> {
        observer.check_band(grid.n_modes())?;
        Ok(Self {
            transform: grid.transform(),
            diff: vec![Complex64::new(0.0, 0.0); grid.n_modes()],
            physical: vec![0.0; grid.n_points()],
            grid: grid.clone(),
            observer,
            law,
        })
    }

    pub fn law(&self) -> &FeedbackLaw {
        &self.law
    }

    /// Writes `mu * dealias(N(I(u) - I(v)))` into `out`.
    ///
    /// Identity laws skip the physical-space round trip; the pointwise map
    /// commutes with the transforms and the observed band lies inside the
    /// dealiased band.
    pub fn evaluate_into(&mut self, u: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
        let mu = self.law.mu;
        if self.law.is_identity() {
            self.observer.observed_difference(u, v, out);
            for c in out.iter_mut() {
                *c *= mu;
            }
            return;
        }
        self.observer.observed_difference(u, v, &mut self.diff);
        self.transform.inverse(&self.diff, &mut self.physical);
        for x in &mut self.physical {
            *x = apply_law(&self.law, *x);
        }
        self.transform.forward(&self.physical, out);
        self.grid.dealias_in_place(out);
        out[0] = Complex64::new(0.0, 0.0);
        for c in out.iter_mut() {
            *c *= mu;
        }
    }
}

/// `mu * N(I(u) - I(v))` as a dealiased, mean-free spectral field.
pub fn feedback_term(
    u_hat: &SpectralField,
    v_hat: &SpectralField,
    observer: &Observer,
    law: &FeedbackLaw,
    grid: &SpectralGrid,
) -> Result<SpectralField> {
    grid.check_spectral(u_hat)?;
    grid.check_spectral(v_hat)?;
    let mut out = grid.zeros();
    FeedbackWorkspace::new(grid, *observer, *law)?.evaluate_into(&u_hat.0, &v_hat.0, &mut out.0);
    Ok(out)
}

/// One assimilated trajectory: stepper, feedback workspace and forcing buffer.
pub struct Assimilator {
    stepper: KseStepper,
    feedback: FeedbackWorkspace,
    forcing: SpectralField,
}

impl Assimilator {
    pub fn new(
        grid: &SpectralGrid,
        coeffs: EtdCoefficients,
        observer: Observer,
        law: FeedbackLaw,
    ) -> Result<Self> {
        stability_check(law.mu, coeffs.dt)?;
        Ok(Self {
            stepper: KseStepper::new(grid, coeffs)?,
            feedback: FeedbackWorkspace::new(grid, observer, law)?,
            forcing: grid.zeros(),
        })
    }

    pub fn law(&self) -> &FeedbackLaw {
        self.feedback.law()
    }

    /// Advances `v` one step, nudged by observations of the pre-step
    /// reference state `u`.
    pub fn step(&mut self, u: &SpectralField, v: &mut SpectralField, time: f64) -> Result<()> {
        self.feedback.evaluate_into(&u.0, &v.0, &mut self.forcing.0);
        self.stepper.step(v, Some(&self.forcing), time)
    }
}

/// Advances the reference and assimilated states together by one step.
///
/// The feedback is evaluated from both pre-step states.
pub fn coupled_step(
    u_hat: &SpectralField,
    v_hat: &SpectralField,
    coeffs: &EtdCoefficients,
    observer: &Observer,
    law: &FeedbackLaw,
    grid: &SpectralGrid,
) -> Result<(SpectralField, SpectralField)> {
    let mut reference = KseStepper::new(grid, coeffs.clone())?;
    let mut assimilator = Assimilator::new(grid, coeffs.clone(), *observer, *law)?;
    let mut u = u_hat.clone();
    let mut v = v_hat.clone();
    assimilator
        .step(u_hat, &mut v, coeffs.dt)
        .map_err(|e| e.tag_trajectory("assimilated"))?;
    reference
        .step(&mut u, None, coeffs.dt)
        .map_err(|e| e.tag_trajectory("reference"))?;
    Ok((u, v))
}
