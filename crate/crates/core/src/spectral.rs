//! Periodic 1D pseudospectral discretization.
//!
//! Fields live on `x_j = -L/2 + j*dx`, `j = 0..N`. Spectral coefficients are
//! Fourier-series coefficients of the half spectrum `m = 0..=N/2`, so that
//!
//! ```text
//! f(x_j) = sum_m  c_m exp(i k_m x_j),    k_m = 2*pi*m / L
//! ```
//!
//! with the forward transform carrying the `1/N` factor. Under this
//! convention the mean-square norm `(1/L) * int |f|^2 dx` is a plain
//! weighted sum of `|c_m|^2`, with no grid-size factors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};

const MIN_POINTS: usize = 8;

/// Uniform periodic grid together with its FFT plans.
///
/// Cloning is cheap; plans are shared.
#[derive(Clone)]
pub struct SpectralGrid {
    n_points: usize,
    length: f64,
    dx: f64,
    wavenumbers: Arc<[f64]>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

impl SpectralGrid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < MIN_POINTS || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(n_points);
        let c2r = planner.plan_fft_inverse(n_points);
        let wavenumbers: Arc<[f64]> = (0..=n_points / 2)
            .map(|m| 2.0 * PI * m as f64 / length)
            .collect();
        Ok(Self {
            n_points,
            length,
            dx: length / n_points as f64,
            wavenumbers,
            r2c,
            c2r,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of stored half-spectrum coefficients, `N/2 + 1`.
    pub fn n_modes(&self) -> usize {
        self.n_points / 2 + 1
    }

    /// Index of the Nyquist mode, `N/2`.
    pub fn nyquist(&self) -> usize {
        self.n_points / 2
    }

    /// Highest mode index kept by the 2/3 rule, `floor(N/3)`.
    pub fn dealias_cutoff(&self) -> usize {
        self.n_points / 3
    }

    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.length
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Physical coordinate of sample `j`.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample<F: FnMut(f64) -> f64>(&self, mut f: F) -> PhysicalField {
        PhysicalField((0..self.n_points).map(|j| f(self.x(j))).collect())
    }

    pub fn zeros(&self) -> SpectralField {
        SpectralField::zeros(self.n_modes())
    }

    /// Allocates a transform workspace bound to this grid.
    pub fn transform(&self) -> Transform {
        Transform::new(self)
    }

    pub fn to_spectral(&self, f: &PhysicalField) -> Result<SpectralField> {
        self.check_physical(f)?;
        let mut out = self.zeros();
        self.transform().forward(&f.0, &mut out.0);
        Ok(out)
    }

    pub fn to_physical(&self, s: &SpectralField) -> Result<PhysicalField> {
        self.check_spectral(s)?;
        let mut out = vec![0.0; self.n_points];
        self.transform().inverse(&s.0, &mut out);
        Ok(PhysicalField(out))
    }

    /// Multiplies mode `m` by `(i k_m)^order`.
    ///
    /// For odd orders the Nyquist coefficient is dropped, since `i k` times a
    /// real Nyquist coefficient has no real-field counterpart.
    pub fn spectral_derivative(&self, s: &SpectralField, order: u32) -> Result<SpectralField> {
        self.check_spectral(s)?;
        let mut out = s.clone();
        self.differentiate_in_place(&mut out.0, order);
        Ok(out)
    }

    pub(crate) fn differentiate_in_place(&self, coeffs: &mut [Complex64], order: u32) {
        if order % 2 == 1 {
            for (c, &k) in coeffs.iter_mut().zip(self.wavenumbers.iter()) {
                *c = Complex64::new(-k * c.im, k * c.re);
            }
            coeffs[self.nyquist()] = Complex64::new(0.0, 0.0);
        }
        for _ in 0..order / 2 {
            for (c, &k) in coeffs.iter_mut().zip(self.wavenumbers.iter()) {
                let factor = -(k * k);
                *c = Complex64::new(c.re * factor, c.im * factor);
            }
        }
    }

    /// Zeroes every mode above `floor(N/3)`.
    pub fn dealias(&self, s: &SpectralField) -> Result<SpectralField> {
        self.check_spectral(s)?;
        let mut out = s.clone();
        self.dealias_in_place(&mut out.0);
        Ok(out)
    }

    pub(crate) fn dealias_in_place(&self, coeffs: &mut [Complex64]) {
        for c in &mut coeffs[self.dealias_cutoff() + 1..] {
            *c = Complex64::new(0.0, 0.0);
        }
    }

    /// `||d/dx f||_{L2}`.
    pub fn h1_norm(&self, s: &SpectralField) -> Result<f64> {
        Ok(self.spectral_derivative(s, 1)?.l2_norm())
    }

    fn check_physical(&self, f: &PhysicalField) -> Result<()> {
        if f.len() != self.n_points {
            return Err(Error::SizeMismatch {
                expected: self.n_points,
                found: f.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_spectral(&self, s: &SpectralField) -> Result<()> {
        if s.len() != self.n_modes() {
            return Err(Error::SizeMismatch {
                expected: self.n_modes(),
                found: s.len(),
            });
        }
        Ok(())
    }
}

/// Real samples of a periodic field on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField(pub Vec<f64>);

impl PhysicalField {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Discrete mean square `(1/L) sum_j f_j^2 dx`, square-rooted.
    pub fn rms(&self) -> f64 {
        let n = self.0.len() as f64;
        (self.0.iter().map(|v| v * v).sum::<f64>() / n).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// Half-spectrum Fourier-series coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField(pub Vec<Complex64>);

impl SpectralField {
    pub fn zeros(n_modes: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n_modes])
    }

    /// Field with a single nonzero coefficient.
    pub fn single_mode(n_modes: usize, m: usize, value: Complex64) -> Self {
        let mut s = Self::zeros(n_modes);
        s.0[m] = value;
        s
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.0
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Root-mean-square value by Parseval.
    ///
    /// Interior modes count twice (they stand for `m` and `-m`); the mean
    /// and Nyquist coefficients count once.
    pub fn l2_norm(&self) -> f64 {
        let n = self.0.len();
        if n == 0 {
            return 0.0;
        }
        let interior: f64 = self.0[1..n - 1].iter().map(|c| c.norm_sqr()).sum();
        (self.0[0].norm_sqr() + 2.0 * interior + self.0[n - 1].norm_sqr()).sqrt()
    }

    pub fn project_mean_free(&self) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.0.first_mut() {
            *c = Complex64::new(0.0, 0.0);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: Self) -> SpectralField {
        SpectralField(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Reusable transform buffers for one grid.
///
/// Plans are shared through the grid; scratch space is owned, so each
/// trajectory keeps its own `Transform`.
pub struct Transform {
    n_points: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    real_buf: Vec<f64>,
    spec_buf: Vec<Complex64>,
    scratch_fwd: Vec<Complex64>,
    scratch_inv: Vec<Complex64>,
}

impl Transform {
    pub fn new(grid: &SpectralGrid) -> Self {
        Self {
            n_points: grid.n_points,
            r2c: Arc::clone(&grid.r2c),
            c2r: Arc::clone(&grid.c2r),
            real_buf: grid.r2c.make_input_vec(),
            spec_buf: grid.c2r.make_input_vec(),
            scratch_fwd: grid.r2c.make_scratch_vec(),
            scratch_inv: grid.c2r.make_scratch_vec(),
        }
    }

    /// Physical samples to Fourier-series coefficients.
    pub fn forward(&mut self, input: &[f64], out: &mut [Complex64]) {
        self.real_buf.copy_from_slice(input);
        self.r2c
            .process_with_scratch(&mut self.real_buf, out, &mut self.scratch_fwd)
            .expect("buffer sizes fixed at construction");
        // The grid starts at -L/2, which shifts mode m by exp(-i pi m).
        let scale = 1.0 / self.n_points as f64;
        for (m, c) in out.iter_mut().enumerate() {
            let s = if m % 2 == 0 { scale } else { -scale };
            *c = Complex64::new(c.re * s, c.im * s);
        }
    }

    /// Fourier-series coefficients to physical samples.
    pub fn inverse(&mut self, input: &[Complex64], out: &mut [f64]) {
        for (m, (dst, src)) in self.spec_buf.iter_mut().zip(input).enumerate() {
            *dst = if m % 2 == 0 { *src } else { -*src };
        }
        let last = self.spec_buf.len() - 1;
        self.spec_buf[0].im = 0.0;
        self.spec_buf[last].im = 0.0;
        self.c2r
            .process_with_scratch(&mut self.spec_buf, out, &mut self.scratch_inv)
            .expect("buffer sizes fixed at construction");
    }
}
