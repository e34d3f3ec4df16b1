//! Prototype and subband filter designs.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{fft, ifft};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFamily {
    Phydyas,
    Rrc,
    Rect,
    Dirichlet,
}

/// Real, symmetric, unit-energy pulse of length `overlap · n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    taps: Vec<f64>,
    overlap: usize,
    family: FilterFamily,
}

impl PrototypeFilter {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn family(&self) -> FilterFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Unit-energy rectangle of length `n` (overlap 1).
    pub fn rect(n: usize) -> Self {
        let v = 1.0 / (n as f64).sqrt();
        PrototypeFilter {
            taps: vec![v; n],
            overlap: 1,
            family: FilterFamily::Rect,
        }
    }
}

fn phydyas_coefficients(k: usize) -> Option<&'static [f64]> {
    const K2: [f64; 2] = [1.0, FRAC_1_SQRT_2];
    const K3: [f64; 3] = [1.0, 0.911438, 0.411438];
    const K4: [f64; 4] = [1.0, 0.971960, FRAC_1_SQRT_2, 0.235147];
    match k {
        2 => Some(&K2),
        3 => Some(&K3),
        4 => Some(&K4),
        _ => None,
    }
}

/// Frequency-sampling PHYDYAS prototype of length `k·n`, centred on
/// `(k·n − 1)/2`.
pub fn design_phydyas(n: usize, k: usize) -> Result<PrototypeFilter> {
    let coeffs = phydyas_coefficients(k).ok_or(Error::UnsupportedOverlap(k))?;
    if n < 2 {
        return Err(Error::InvalidNumerology(format!("prototype needs n >= 2, got {n}")));
    }
    let len = k * n;
    let centre = (len as f64 - 1.0) / 2.0;
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 - centre;
            1.0 + 2.0
                * coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(j, h)| h * (2.0 * PI * j as f64 * t / len as f64).cos())
                    .sum::<f64>()
        })
        .collect();
    normalize(&mut taps);
    Ok(PrototypeFilter {
        taps,
        overlap: k,
        family: FilterFamily::Phydyas,
    })
}

fn normalize(taps: &mut [f64]) {
    let e = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= e);
}

fn normalize_complex(taps: &mut [Complex64]) {
    let e = taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|t| *t /= e);
}

/// Dolph-Chebyshev window with `atten_db` sidelobe level, peak-normalized
/// to 1.
pub fn chebwin(len: usize, atten_db: f64) -> Vec<f64> {
    if len <= 1 {
        return vec![1.0; len];
    }
    let m = len as f64;
    let order = m - 1.0;
    let beta = ((10f64.powf(atten_db.abs() / 20.0)).acosh() / order).cosh();
    let p: Vec<f64> = (0..len)
        .map(|k| {
            let x = beta * (PI * k as f64 / m).cos();
            if x > 1.0 {
                (order * x.acosh()).cosh()
            } else if x < -1.0 {
                let sign = if len % 2 == 1 { 1.0 } else { -1.0 };
                sign * (order * (-x).acosh()).cosh()
            } else {
                (order * x.acos()).cos()
            }
        })
        .collect();
    let w: Vec<f64> = if len % 2 == 1 {
        let spec = fft(&p.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        let half = len.div_ceil(2);
        let w: Vec<f64> = spec[..half].iter().map(|c| c.re).collect();
        w[1..].iter().rev().chain(w.iter()).copied().collect()
    } else {
        let rotated: Vec<Complex64> = p
            .iter()
            .enumerate()
            .map(|(k, &v)| v * Complex64::from_polar(1.0, PI * k as f64 / m))
            .collect();
        let spec = fft(&rotated);
        let half = len / 2 + 1;
        let w: Vec<f64> = spec[..half].iter().map(|c| c.re).collect();
        w[1..half].iter().rev().chain(w[1..half].iter()).copied().collect()
    };
    let peak = w.iter().cloned().fold(f64::MIN, f64::max);
    w.into_iter().map(|v| v / peak).collect()
}

/// Symmetric Hann window of length `len` (zero end points).
pub fn hann_symmetric(len: usize) -> Vec<f64> {
    if len <= 1 {
        return vec![1.0; len];
    }
    (0..len)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / (len - 1) as f64).cos()))
        .collect()
}

/// Modulates a real lowpass kernel to `centre_bin` (in units of `1/n`),
/// with phase referenced to the kernel centre.
pub fn modulate_to_bin(lowpass: &[f64], centre_bin: f64, n: usize) -> Vec<Complex64> {
    let mid = (lowpass.len() as f64 - 1.0) / 2.0;
    lowpass
        .iter()
        .enumerate()
        .map(|(l, &w)| w * Complex64::from_polar(1.0, 2.0 * PI * centre_bin * (l as f64 - mid) / n as f64))
        .collect()
}

/// Hann-windowed sinc lowpass of length `len` with two-sided bandwidth
/// `bandwidth_bins / n`, normalized to unit DC gain.
pub fn windowed_sinc(len: usize, bandwidth_bins: f64, n: usize) -> Vec<f64> {
    let mid = (len as f64 - 1.0) / 2.0;
    let b = bandwidth_bins / n as f64;
    let win = hann_symmetric(len);
    let mut taps: Vec<f64> = (0..len)
        .map(|l| {
            let t = l as f64 - mid;
            let s = if t == 0.0 { b } else { (PI * b * t).sin() / (PI * t) };
            s * win[l]
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    taps
}

/// GFDM prototype shapes, all circular over a block of `m·n` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum GfdmPrototype {
    /// Root-raised-cosine in frequency with the given roll-off.
    Rrc { rolloff: f64 },
    /// Rectangle of `n` samples in time: each subsymbol is an OFDM symbol.
    RectTime,
    /// Rectangle of `m` bins in frequency (periodic sinc in time): each
    /// subcarrier becomes a single-carrier stream.
    RectFreq,
}

impl Default for GfdmPrototype {
    fn default() -> Self {
        GfdmPrototype::Rrc { rolloff: 0.25 }
    }
}

impl GfdmPrototype {
    pub fn family(&self) -> FilterFamily {
        match self {
            GfdmPrototype::Rrc { .. } => FilterFamily::Rrc,
            GfdmPrototype::RectTime => FilterFamily::Rect,
            GfdmPrototype::RectFreq => FilterFamily::Dirichlet,
        }
    }

    /// Unit-energy taps of length `m·n`.
    pub fn taps(&self, n: usize, m: usize) -> Result<Vec<Complex64>> {
        let k = n * m;
        if k == 0 {
            return Err(Error::InvalidNumerology("GFDM block must be non-empty".into()));
        }
        let mut g = match *self {
            GfdmPrototype::RectTime => (0..k)
                .map(|i| Complex64::new(if i < n { 1.0 } else { 0.0 }, 0.0))
                .collect(),
            GfdmPrototype::RectFreq => {
                let mut spec = vec![Complex64::new(0.0, 0.0); k];
                for i in 0..m {
                    // Bins -m/2 .. m/2 - 1 around DC.
                    let signed = i as i64 - (m / 2) as i64;
                    spec[signed.rem_euclid(k as i64) as usize] = Complex64::new(1.0, 0.0);
                }
                ifft(&spec)
            }
            GfdmPrototype::Rrc { rolloff } => {
                if !(0.0..=1.0).contains(&rolloff) {
                    return Err(Error::config("filter.rolloff", format!("{rolloff} outside [0, 1]")));
                }
                let spec: Vec<Complex64> = (0..k)
                    .map(|q| {
                        let signed = if q < k.div_ceil(2) { q as f64 } else { q as f64 - k as f64 };
                        Complex64::new(rrc_amplitude(signed / m as f64, rolloff), 0.0)
                    })
                    .collect();
                ifft(&spec)
            }
        };
        normalize_complex(&mut g);
        Ok(g)
    }
}

/// Root-raised-cosine amplitude at frequency `f` in units of the symbol
/// rate.
fn rrc_amplitude(f: f64, rolloff: f64) -> f64 {
    let f = f.abs();
    let lo = (1.0 - rolloff) / 2.0;
    let hi = (1.0 + rolloff) / 2.0;
    if f <= lo {
        1.0
    } else if f >= hi {
        0.0
    } else {
        (0.5 * (1.0 + (PI / rolloff * (f - lo)).cos())).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phydyas_symmetric_and_normalized() {
        for k in 2..=4 {
            for n in [2, 16, 64, 256] {
                let p = design_phydyas(n, k).unwrap();
                assert_eq!(p.len(), k * n);
                let t = p.taps();
                for i in 0..t.len() {
                    assert!((t[i] - t[t.len() - 1 - i]).abs() <= 1e-12);
                }
                assert!((t.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        assert!(matches!(design_phydyas(64, 5), Err(Error::UnsupportedOverlap(5))));
    }

    #[test]
    fn phydyas_k4_shape() {
        // Frequency-sampling oracle: the K·N-point transform of the prototype
        // is non-zero only on bins |i| < K with the published coefficients.
        let n = 32;
        let p = design_phydyas(n, 4).unwrap();
        let x: Vec<Complex64> = p.taps().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let spec = fft(&x);
        let mags: Vec<f64> = spec.iter().map(|c| c.norm()).collect();
        let scale = mags[0];
        let expected = [1.0, 0.971960, FRAC_1_SQRT_2, 0.235147];
        for (i, e) in expected.iter().enumerate() {
            assert!((mags[i] / scale - e).abs() < 1e-9);
            if i > 0 {
                assert!((mags[4 * n - i] / scale - e).abs() < 1e-9);
            }
        }
        assert!(mags[4..4 * n - 3].iter().all(|&m| m / scale < 1e-9));
    }

    #[test]
    fn chebwin_matches_reference() {
        let reference16 = [
            0.11376044581257719,
            0.19636543675259405,
            0.33194642705414146,
            0.49260347666073756,
            0.6613102439610726,
            0.8163363541330617,
            0.935340747825203,
            1.0,
        ];
        let w = chebwin(16, 40.0);
        for i in 0..8 {
            assert!((w[i] - reference16[i]).abs() < 1e-12, "{i}: {}", w[i]);
            assert!((w[15 - i] - reference16[i]).abs() < 1e-12);
        }
        let reference7 = [0.11169109836363099, 0.41962998924433415, 0.813773592568722, 1.0];
        let w = chebwin(7, 50.0);
        for i in 0..4 {
            assert!((w[i] - reference7[i]).abs() < 1e-12);
            assert!((w[6 - i] - reference7[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn windowed_sinc_unit_dc() {
        let h = windowed_sinc(129, 121.0, 256);
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..h.len() {
            assert!((h[i] - h[h.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn gfdm_prototypes_unit_energy() {
        for proto in [GfdmPrototype::RectTime, GfdmPrototype::RectFreq, GfdmPrototype::default()] {
            let g = proto.taps(16, 5).unwrap();
            assert_eq!(g.len(), 80);
            assert!((g.iter().map(|v| v.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // The RRC pulse is real and circularly symmetric.
        let g = GfdmPrototype::default().taps(16, 5).unwrap();
        for i in 1..80 {
            assert!(g[i].im.abs() < 1e-14);
            assert!((g[i] - g[80 - i]).norm() < 1e-14);
        }
    }
}
