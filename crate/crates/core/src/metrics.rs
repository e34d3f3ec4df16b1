//! PAPR CCDF, Welch PSD, out-of-band emission ratio, BER/EVM and
//! spectral-efficiency accounting.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridding::Constellation;
use crate::numerics::fft;
use crate::windowed::Numerology;

/// Floor applied to every logarithmic metric that would otherwise be `-inf`.
pub const DB_FLOOR: f64 = -120.0;

pub fn to_db(linear: f64) -> f64 {
    if linear <= 0.0 {
        DB_FLOOR
    } else {
        (10.0 * linear.log10()).max(DB_FLOOR)
    }
}

/// Peak-to-average power ratio of one segment, in dB.
pub fn papr_db(segment: &[Complex64]) -> f64 {
    let mut peak = 0.0f64;
    let mut sum = 0.0;
    for s in segment {
        let p = s.norm_sqr();
        peak = peak.max(p);
        sum += p;
    }
    let mean = sum / segment.len().max(1) as f64;
    if mean == 0.0 {
        return 0.0;
    }
    10.0 * (peak / mean).log10()
}

/// One point of a complementary CDF: `P(PAPR > threshold_db)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcdfPoint {
    pub threshold_db: f64,
    pub probability: f64,
}

/// Empirical CCDF of per-segment PAPR.
pub fn papr_ccdf<S: AsRef<[Complex64]>>(segments: &[S], thresholds_db: &[f64]) -> Result<Vec<CcdfPoint>> {
    if segments.is_empty() {
        return Err(Error::NoSegments);
    }
    let paprs: Vec<f64> = segments.iter().map(|s| papr_db(s.as_ref())).collect();
    Ok(ccdf_from_paprs(&paprs, thresholds_db))
}

pub fn ccdf_from_paprs(paprs: &[f64], thresholds_db: &[f64]) -> Vec<CcdfPoint> {
    let total = paprs.len().max(1) as f64;
    thresholds_db
        .iter()
        .map(|&t| CcdfPoint {
            threshold_db: t,
            probability: paprs.iter().filter(|&&p| p > t).count() as f64 / total,
        })
        .collect()
}

/// PAPR value exceeded with probability `prob` (empirical quantile).
pub fn papr_at_probability(paprs: &[f64], prob: f64) -> f64 {
    let mut sorted = paprs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((1.0 - prob) * sorted.len() as f64).ceil() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Default CCDF thresholds: 0 to 12 dB in 0.25 dB steps.
pub fn default_ccdf_thresholds() -> Vec<f64> {
    (0..=48).map(|i| i as f64 * 0.25).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsdWindow {
    Hann,
    Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap_frac: f64,
    pub window: PsdWindow,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_len: 1024,
            overlap_frac: 0.5,
            window: PsdWindow::Hann,
        }
    }
}

/// Power spectral density on normalized frequencies `[-0.5, 0.5)`.
///
/// `power` is a density: summing `power[i] / len` over all bins gives the
/// mean power of the analysed signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

impl Psd {
    pub fn power_db(&self) -> Vec<f64> {
        self.power.iter().map(|&p| to_db(p)).collect()
    }

    pub fn integrated_power(&self) -> f64 {
        self.power.iter().sum::<f64>() / self.power.len() as f64
    }

    /// Element-wise mean of equally-shaped estimates, in slice order.
    pub fn average(estimates: &[Psd]) -> Option<Psd> {
        let first = estimates.first()?;
        let mut power = vec![0.0; first.power.len()];
        for e in estimates {
            power.iter_mut().zip(&e.power).for_each(|(a, b)| *a += b);
        }
        let k = estimates.len() as f64;
        power.iter_mut().for_each(|p| *p /= k);
        Some(Psd {
            freqs: first.freqs.clone(),
            power,
        })
    }
}

/// Averaged windowed periodogram.
pub fn psd_welch(x: &[Complex64], cfg: &WelchConfig) -> Result<Psd> {
    let l = cfg.segment_len;
    if l == 0 {
        return Err(Error::InvalidPsdConfig("segment_len must be positive".into()));
    }
    if !(0.0..=0.9).contains(&cfg.overlap_frac) {
        return Err(Error::InvalidPsdConfig(format!(
            "overlap_frac {} outside [0, 0.9]",
            cfg.overlap_frac
        )));
    }
    if x.len() < l {
        return Err(Error::SignalTooShort {
            len: x.len(),
            segment_len: l,
        });
    }
    let window: Vec<f64> = match cfg.window {
        // Periodic Hann.
        PsdWindow::Hann => (0..l).map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / l as f64).cos())).collect(),
        PsdWindow::Rect => vec![1.0; l],
    };
    let w_energy: f64 = window.iter().map(|w| w * w).sum();
    let hop = ((l as f64) * (1.0 - cfg.overlap_frac)).round().max(1.0) as usize;
    let mut acc = vec![0.0; l];
    let mut count = 0usize;
    let mut start = 0;
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    while start + l <= x.len() {
        for ((b, &s), &w) in buf.iter_mut().zip(&x[start..start + l]).zip(&window) {
            *b = s * w;
        }
        let spec = fft(&buf);
        acc.iter_mut().zip(&spec).for_each(|(a, s)| *a += s.norm_sqr());
        count += 1;
        start += hop;
    }
    let scale = 1.0 / (w_energy * count as f64);
    // Reorder so that frequencies run from -0.5 upwards.
    let half = l / 2;
    let mut freqs = Vec::with_capacity(l);
    let mut power = Vec::with_capacity(l);
    for i in 0..l {
        let k = (i + l - half) % l;
        let f = if k >= l - half { k as f64 - l as f64 } else { k as f64 } / l as f64;
        freqs.push(f);
        power.push(acc[k] * scale);
    }
    Ok(Psd { freqs, power })
}

/// Mean out-of-band PSD (beyond `guard` on each side of `in_band`) relative
/// to the mean in-band PSD, in dB. More negative is better confined.
pub fn oobe_ratio(psd: &Psd, in_band: (f64, f64), guard: f64) -> Result<f64> {
    let (lo, hi) = in_band;
    if !(lo >= -0.5 && hi < 0.5 && lo < hi) {
        return Err(Error::InvalidBand(format!("[{lo}, {hi}) must lie inside [-0.5, 0.5)")));
    }
    let mut in_sum = 0.0;
    let mut in_n = 0usize;
    let mut out_sum = 0.0;
    let mut out_n = 0usize;
    for (&f, &p) in psd.freqs.iter().zip(&psd.power) {
        if f >= lo && f < hi {
            in_sum += p;
            in_n += 1;
        } else if f < lo - guard || f >= hi + guard {
            out_sum += p;
            out_n += 1;
        }
    }
    if out_n == 0 {
        return Err(Error::NoOobBins);
    }
    if in_n == 0 {
        return Err(Error::InvalidBand("no PSD bins inside the band".into()));
    }
    Ok(to_db((out_sum / out_n as f64) / (in_sum / in_n as f64)))
}

/// Guard offset default: 10% of the occupied bandwidth.
pub fn default_guard(in_band: (f64, f64)) -> f64 {
    0.1 * (in_band.1 - in_band.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BerCount {
    pub errors: u64,
    pub total: u64,
}

impl BerCount {
    pub fn ber(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.errors as f64 / self.total as f64
        }
    }

    pub fn merge(self, other: BerCount) -> BerCount {
        BerCount {
            errors: self.errors + other.errors,
            total: self.total + other.total,
        }
    }
}

/// Hamming distance between two bit streams.
pub fn ber_count(tx: &[u8], rx: &[u8]) -> Result<BerCount> {
    if tx.len() != rx.len() {
        return Err(Error::LengthMismatch {
            left: tx.len(),
            right: rx.len(),
        });
    }
    let errors = tx.iter().zip(rx).filter(|(a, b)| (*a & 1) != (*b & 1)).count();
    Ok(BerCount {
        errors: errors as u64,
        total: tx.len() as u64,
    })
}

/// Error energy and reference energy, kept separate so runs can be pooled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvmAccumulator {
    pub error_energy: f64,
    pub reference_energy: f64,
}

impl EvmAccumulator {
    pub fn from_symbols(reference: &[Complex64], estimate: &[Complex64]) -> Self {
        let error_energy = reference.iter().zip(estimate).map(|(r, e)| (e - r).norm_sqr()).sum();
        let reference_energy = reference.iter().map(|r| r.norm_sqr()).sum();
        EvmAccumulator {
            error_energy,
            reference_energy,
        }
    }

    pub fn merge(self, other: EvmAccumulator) -> Self {
        EvmAccumulator {
            error_energy: self.error_energy + other.error_energy,
            reference_energy: self.reference_energy + other.reference_energy,
        }
    }

    pub fn db(&self) -> f64 {
        if self.reference_energy == 0.0 {
            return DB_FLOOR;
        }
        to_db(self.error_energy / self.reference_energy)
    }
}

/// `10·log10(Σ|d̂ − d|² / Σ|d|²)`, floored at [`DB_FLOOR`].
pub fn evm_db(reference: &[Complex64], estimate: &[Complex64]) -> f64 {
    EvmAccumulator::from_symbols(reference, estimate).db()
}

/// Information bits per transmitted complex sample:
/// `(|active| − guard_subcarriers)·log2(Q)·M / (M·(N + L_cp + L_ext) + window_overhead)`.
///
/// Per-symbol overheads come from the numerology; `window_overhead` covers
/// one-off costs such as a filter tail or window ramp.
pub fn spectral_efficiency(
    num: &Numerology,
    constellation: &Constellation,
    guard_subcarriers: usize,
    window_overhead: usize,
) -> Result<f64> {
    let active = num.active.len();
    if guard_subcarriers >= active {
        return Err(Error::NoDataSubcarriers);
    }
    let bits = ((active - guard_subcarriers) * constellation.bits_per_symbol() * num.m) as f64;
    let samples = (num.m * (num.n + num.l_cp + num.l_ext) + window_overhead) as f64;
    Ok(bits / samples)
}

/// Per-sample SNR (dB) giving the requested Eb/N0 for a CP-OFDM-style
/// receiver that discards the CP: each of the `active` subcarriers out of
/// `n` carries `bits_per_symbol` bits.
pub fn ebn0_to_snr_db(ebn0_db: f64, bits_per_symbol: usize, active: usize, n: usize) -> f64 {
    ebn0_db + 10.0 * (bits_per_symbol as f64).log10() + 10.0 * (active as f64 / n as f64).log10()
}

/// Per-waveform measurement bundle for one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub scenario_id: String,
    pub waveform: String,
    pub papr_ccdf: Vec<CcdfPoint>,
    /// `(normalized_frequency, power_db)` pairs.
    pub psd: Vec<(f64, f64)>,
    pub oobe_ratio_db: Option<f64>,
    /// One BER entry per SNR point; `None` SNR is the noiseless run.
    pub ber: Vec<BerPoint>,
    pub evm_db: Option<f64>,
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub count: BerCount,
}
