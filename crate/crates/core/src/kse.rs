//! Kuramoto-Sivashinsky model `u_t + u u_x + lambda u_xx + u_xxxx = 0`.
//!
//! Time stepping is first-order exponential time differencing: the stiff
//! linear part is propagated exactly and everything else (the advective
//! nonlinearity plus any external forcing) is frozen over the step and
//! integrated against the `phi1` weight.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, SpectralGrid, Transform};

/// `2^-13`, the default step.
pub const DEFAULT_DT: f64 = 1.0 / 8192.0;

/// Domain length of the standard `[-16 pi, 16 pi)` configuration.
pub const DEFAULT_LENGTH: f64 = 32.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KseParams {
    pub lambda: f64,
    pub dt: f64,
}

impl KseParams {
    pub fn new(lambda: f64, dt: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(Self { lambda, dt })
    }
}

/// Fourier symbol `lambda k^2 - k^4` of `-lambda d_xx - d_xxxx`.
pub fn linear_symbol(grid: &SpectralGrid, lambda: f64) -> Vec<f64> {
    grid.wavenumbers()
        .iter()
        .map(|&k| {
            let k2 = k * k;
            lambda * k2 - k2 * k2
        })
        .collect()
}

const PHI1_TAYLOR_RADIUS: f64 = 1e-5;

/// `(e^z - 1) / z`, with `phi1(0) = 1`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < PHI1_TAYLOR_RADIUS {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

/// Per-mode ETD1 factors for a fixed linear symbol and step.
#[derive(Debug, Clone, PartialEq)]
pub struct EtdCoefficients {
    pub propagator: Vec<f64>,
    pub phi_weight: Vec<f64>,
    pub dt: f64,
}

impl EtdCoefficients {
    pub fn new(grid: &SpectralGrid, params: &KseParams) -> Self {
        let dt = params.dt;
        let (propagator, phi_weight) = linear_symbol(grid, params.lambda)
            .into_iter()
            .map(|l| {
                let z = l * dt;
                (z.exp(), dt * phi1(z))
            })
            .unzip();
        Self {
            propagator,
            phi_weight,
            dt,
        }
    }

    pub fn len(&self) -> usize {
        self.propagator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.propagator.is_empty()
    }
}

/// Alias for [`EtdCoefficients::new`].
pub fn precompute_etd(grid: &SpectralGrid, params: &KseParams) -> EtdCoefficients {
    EtdCoefficients::new(grid, params)
}

/// Stateful ETD1 integrator for one trajectory.
///
/// Holds the transform workspace, so each trajectory needs its own.
pub struct KseStepper {
    grid: SpectralGrid,
    coeffs: EtdCoefficients,
    nonlinear: bool,
    transform: Transform,
    u: Vec<f64>,
    ux: Vec<f64>,
    deriv: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl KseStepper {
    pub fn new(grid: &SpectralGrid, coeffs: EtdCoefficients) -> Result<Self> {
        if coeffs.len() != grid.n_modes() {
            return Err(Error::SizeMismatch {
                expected: grid.n_modes(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            transform: grid.transform(),
            u: vec![0.0; grid.n_points()],
            ux: vec![0.0; grid.n_points()],
            deriv: vec![Complex64::new(0.0, 0.0); grid.n_modes()],
            rhs: vec![Complex64::new(0.0, 0.0); grid.n_modes()],
            grid: grid.clone(),
            coeffs,
            nonlinear: true,
        })
    }

    /// Drops `-u u_x`, leaving the linear propagator and forcing. Test hook.
    pub fn without_nonlinearity(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &EtdCoefficients {
        &self.coeffs
    }

    /// Writes the dealiased spectral image of `-u u_x` into `out`.
    pub fn nonlinear_term_into(&mut self, state: &[Complex64], out: &mut [Complex64]) {
        self.deriv.copy_from_slice(state);
        self.grid.differentiate_in_place(&mut self.deriv, 1);
        self.transform.inverse(state, &mut self.u);
        self.transform.inverse(&self.deriv, &mut self.ux);
        for (a, b) in self.u.iter_mut().zip(&self.ux) {
            *a = -*a * b;
        }
        self.transform.forward(&self.u, out);
        self.grid.dealias_in_place(out);
        out[0] = Complex64::new(0.0, 0.0);
    }

    pub fn nonlinear_term(&mut self, state: &SpectralField) -> Result<SpectralField> {
        self.grid.check_spectral(state)?;
        let mut out = self.grid.zeros();
        self.nonlinear_term_into(&state.0, &mut out.0);
        Ok(out)
    }

    /// Advances `state` by one step in place. `time` is the time reached,
    /// used only for blow-up diagnostics.
    pub fn step(
        &mut self,
        state: &mut SpectralField,
        forcing: Option<&SpectralField>,
        time: f64,
    ) -> Result<()> {
        self.grid.check_spectral(state)?;
        let mut rhs = std::mem::take(&mut self.rhs);
        if self.nonlinear {
            self.nonlinear_term_into(&state.0, &mut rhs);
        } else {
            rhs.fill(Complex64::new(0.0, 0.0));
        }
        if let Some(f) = forcing {
            self.grid.check_spectral(f)?;
            for (r, f) in rhs.iter_mut().zip(&f.0) {
                *r += f;
            }
        }
        let mut finite = true;
        for (((s, r), &e), &w) in state
            .0
            .iter_mut()
            .zip(&rhs)
            .zip(&self.coeffs.propagator)
            .zip(&self.coeffs.phi_weight)
        {
            *s = *s * e + *r * w;
            finite &= s.re.is_finite() && s.im.is_finite();
        }
        state.0[0] = Complex64::new(0.0, 0.0);
        self.rhs = rhs;
        if !finite {
            return Err(Error::BlowUp {
                trajectory: "kse".into(),
                time,
            });
        }
        Ok(())
    }
}

/// Dealiased spectrum of `-u u_x`.
pub fn nonlinear_term(state: &SpectralField, grid: &SpectralGrid) -> Result<SpectralField> {
    let coeffs = EtdCoefficients {
        propagator: vec![1.0; grid.n_modes()],
        phi_weight: vec![0.0; grid.n_modes()],
        dt: 0.0,
    };
    KseStepper::new(grid, coeffs)?.nonlinear_term(state)
}

/// One ETD1 step: `E s + dt phi1(L dt) (N(s) + forcing)`, projected mean-free.
pub fn etd1_step(
    state: &SpectralField,
    coeffs: &EtdCoefficients,
    forcing: Option<&SpectralField>,
    grid: &SpectralGrid,
) -> Result<SpectralField> {
    let mut out = state.clone();
    KseStepper::new(grid, coeffs.clone())?.step(&mut out, forcing, coeffs.dt)?;
    Ok(out)
}

/// `u0(x) = cos(x/16) (1 + sin(x/16))`.
pub fn initial_profile(x: f64) -> f64 {
    let y = x / 16.0;
    y.cos() * (1.0 + y.sin())
}

/// Spectral image of [`initial_profile`], mean-free and dealiased.
pub fn initial_condition(grid: &SpectralGrid) -> SpectralField {
    if (grid.length() - DEFAULT_LENGTH).abs() > 1e-12 * DEFAULT_LENGTH {
        log::warn!(
            "initial data is 32*pi-periodic but the domain length is {}",
            grid.length()
        );
    }
    let s = grid
        .to_spectral(&grid.sample(initial_profile))
        .expect("sampled on the same grid");
    grid.dealias(&s).expect("same grid").project_mean_free()
}

/// Characteristic scales of `u_t + u u_x + a u_xx + b u_xxxx = 0` on a
/// domain of length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    /// `a L^2 / b`
    pub lambda: f64,
    /// `L^4 / b`
    pub time_scale: f64,
    /// `b / L^3`
    pub velocity_scale: f64,
    /// `sqrt(b / a)`
    pub intrinsic_length: f64,
}

pub fn nondimensionalize(a: f64, b: f64, length: f64) -> Result<ScalingResult> {
    for (name, v) in [("a", a), ("b", b), ("length", length)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    Ok(ScalingResult {
        lambda: a * length * length / b,
        time_scale: length.powi(4) / b,
        velocity_scale: b / length.powi(3),
        intrinsic_length: (b / a).sqrt(),
    })
}
