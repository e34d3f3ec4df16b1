//! Discrete transforms, convolutions, window ramps and single-tap
//! frequency-domain equalization shared by every waveform.
//!
//! Transform convention: the forward transform is unnormalized and the
//! inverse transform carries the `1/N` factor, so
//! `dft(dft(x, Forward), Inverse) == x` and Parseval reads
//! `Σ|x[k]|² = (1/N)·Σ|X[n]|²`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::Deref;
use std::sync::atomic::{AtomicU8, Ordering};

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};

/// Below this magnitude a channel bin is treated as a spectral null.
pub const SINGULAR_BIN_THRESHOLD: f64 = 1e-12;

/// A finite, non-empty sequence of complex baseband samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IqVec(Vec<Complex64>);

impl IqVec {
    /// Validates that `samples` is non-empty and every sample is finite.
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(IqVec(samples))
    }

    pub(crate) fn from_raw(samples: Vec<Complex64>) -> Self {
        debug_assert!(!samples.is_empty());
        IqVec(samples)
    }

    pub fn zeros(len: usize) -> Self {
        IqVec(vec![Complex64::new(0.0, 0.0); len.max(1)])
    }

    pub fn energy(&self) -> f64 {
        energy(&self.0)
    }

    pub fn mean_power(&self) -> f64 {
        self.energy() / self.0.len() as f64
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for IqVec {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<IqVec> for Vec<Complex64> {
    fn from(v: IqVec) -> Self {
        v.0
    }
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|s| s.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Which algorithm evaluates [`dft`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformPath {
    /// Planned FFT for every length.
    Fast,
    /// Direct O(N²) summation. Kept as the reference oracle.
    Naive,
}

static TRANSFORM_PATH: AtomicU8 = AtomicU8::new(0);

/// Selects the process-wide transform path used by [`dft`].
pub fn set_transform_path(path: TransformPath) {
    let tag = match path {
        TransformPath::Fast => 0,
        TransformPath::Naive => 1,
    };
    TRANSFORM_PATH.store(tag, Ordering::Relaxed);
}

pub fn transform_path() -> TransformPath {
    match TRANSFORM_PATH.load(Ordering::Relaxed) {
        1 => TransformPath::Naive,
        _ => TransformPath::Fast,
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Discrete Fourier transform using the process-wide [`TransformPath`].
pub fn dft(x: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    dft_with(x, direction, transform_path())
}

/// Discrete Fourier transform through an explicitly chosen path.
pub fn dft_with(x: &[Complex64], direction: Direction, path: TransformPath) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    Ok(match path {
        TransformPath::Fast => fast_dft(x, direction),
        TransformPath::Naive => naive_dft(x, direction),
    })
}

fn fast_dft(x: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = x.len();
    let mut buf = x.to_vec();
    let fft_dir = match direction {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft(n, fft_dir));
    plan.process(&mut buf);
    if direction == Direction::Inverse {
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

fn naive_dft(x: &[Complex64], direction: Direction) -> Vec<Complex64> {
    let n = x.len();
    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    // Twiddle table indexed by (k·m) mod n keeps the phase argument exact.
    let twiddles: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, sign * 2.0 * PI * i as f64 / n as f64))
        .collect();
    let scale = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / n as f64,
    };
    (0..n)
        .map(|m| {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, &v)| v * twiddles[(k * m) % n])
                .sum();
            acc * scale
        })
        .collect()
}

pub(crate) fn fft(x: &[Complex64]) -> Vec<Complex64> {
    dft(x, Direction::Forward).expect("non-empty transform input")
}

pub(crate) fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    dft(x, Direction::Inverse).expect("non-empty transform input")
}

/// Circular convolution of `x` and `h` over `period` samples.
///
/// Both operands are zero-padded to `period`.
pub fn circular_convolve(x: &[Complex64], h: &[Complex64], period: usize) -> Result<Vec<Complex64>> {
    let len = x.len().max(h.len());
    if period < len || period == 0 {
        return Err(Error::PeriodTooShort { period, len });
    }
    let mut y = vec![Complex64::new(0.0, 0.0); period];
    for (i, &xi) in x.iter().enumerate() {
        if xi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &hj) in h.iter().enumerate() {
            y[(i + j) % period] += xi * hj;
        }
    }
    Ok(y)
}

/// Full linear (FIR) convolution; output length `len(x) + len(h) - 1`.
pub fn linear_convolve(x: &[Complex64], h: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() || h.is_empty() {
        return Err(Error::EmptySignal);
    }
    // Long filters over long signals go through overlap-add FFT blocks.
    if h.len() >= 32 && x.len() >= 4 * h.len() {
        return Ok(fft_convolve(x, h));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            y[i + j] += xi * hj;
        }
    }
    Ok(y)
}

fn fft_convolve(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let nfft = (4 * h.len()).next_power_of_two();
    let block = nfft - h.len() + 1;
    let mut hp = h.to_vec();
    hp.resize(nfft, Complex64::new(0.0, 0.0));
    let hf = fast_dft(&hp, Direction::Forward);
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for start in (0..x.len()).step_by(block) {
        let end = (start + block).min(x.len());
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        buf[..end - start].copy_from_slice(&x[start..end]);
        let mut xf = fast_dft(&buf, Direction::Forward);
        xf.iter_mut().zip(&hf).for_each(|(a, b)| *a *= b);
        let seg = fast_dft(&xf, Direction::Inverse);
        let valid = (end - start + h.len() - 1).min(y.len() - start);
        for (dst, src) in y[start..start + valid].iter_mut().zip(&seg) {
            *dst += src;
        }
    }
    y
}

/// A transition ramp for time-domain windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRamp {
    taps: Vec<f64>,
}

impl WindowRamp {
    /// Rising taps, in `[0, 1]`.
    pub fn rising(&self) -> &[f64] {
        &self.taps
    }

    /// Falling taps: the exact reversal of [`WindowRamp::rising`].
    pub fn falling(&self) -> Vec<f64> {
        self.taps.iter().rev().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// Raised-cosine ramp `0.5·(1 − cos(π·(i+0.5)/length))`.
///
/// A zero length gives the empty ramp, i.e. a rectangular window.
pub fn raised_cosine_ramp(length: usize) -> WindowRamp {
    let taps = (0..length)
        .map(|i| 0.5 * (1.0 - (PI * (i as f64 + 0.5) / length as f64).cos()))
        .collect();
    WindowRamp { taps }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EqMode {
    /// Zero forcing: `Y/H`.
    Zf,
    /// Linear MMSE with the given linear SNR.
    Mmse { snr_linear: f64 },
}

/// Single-tap per-bin equalization.
pub fn fde_equalize(y: &[Complex64], h: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
    if y.len() != h.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: h.len(),
        });
    }
    match mode {
        EqMode::Zf => y
            .iter()
            .zip(h)
            .enumerate()
            .map(|(bin, (&yv, &hv))| {
                if hv.norm() < SINGULAR_BIN_THRESHOLD {
                    Err(Error::SingularBin { bin })
                } else {
                    Ok(yv / hv)
                }
            })
            .collect(),
        EqMode::Mmse { snr_linear } => {
            if !(snr_linear > 0.0) {
                return Err(Error::InvalidSnr(snr_linear));
            }
            let reg = 1.0 / snr_linear;
            Ok(y
                .iter()
                .zip(h)
                .map(|(&yv, &hv)| yv * hv.conj() / (hv.norm_sqr() + reg))
                .collect())
        }
    }
}

/// `n`-point frequency response of an FIR channel or filter.
pub fn frequency_response(taps: &[Complex64], n: usize) -> Vec<Complex64> {
    // Taps longer than n alias circularly.
    let mut padded = vec![Complex64::new(0.0, 0.0); n];
    for (i, &t) in taps.iter().enumerate() {
        padded[i % n] += t;
    }
    fft(&padded)
}
