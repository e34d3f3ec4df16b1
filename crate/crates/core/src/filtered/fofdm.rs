//! Filtered OFDM: CP-OFDM per subband, each band shaped by its own
//! windowed-sinc band-pass filter, with a matched-filter receiver.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtered::prototype::{modulate_to_bin, windowed_sinc};
use crate::gridding::ResourceGrid;
use crate::numerics::{linear_convolve, EqMode, IqVec};
use crate::windowed::{demod_cp_ofdm, mod_cp_ofdm, signed_bin, Equalizer, Numerology};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One f-OFDM subband: its own numerology (active set = the band's
/// subcarriers) and band-pass filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FofdmBand {
    pub num: Numerology,
    pub taps: Vec<Complex64>,
}

impl FofdmBand {
    /// Default filter: Hann-windowed sinc of length `N/2 + 1` whose passband
    /// extends half a subcarrier beyond each edge of the band, centred on the
    /// band.
    pub fn with_default_filter(num: Numerology) -> Result<Self> {
        let len = num.n / 2 + 1;
        Self::with_filter_len(num, len)
    }

    /// Same design as [`FofdmBand::with_default_filter`] with `len` taps.
    pub fn with_filter_len(num: Numerology, len: usize) -> Result<Self> {
        num.validate()?;
        if len == 0 {
            return Err(Error::LayoutMismatch("subband filter must have at least one tap".into()));
        }
        let n = num.n;
        let signed: Vec<i64> = num.active.iter().map(|&k| signed_bin(k, n)).collect();
        let (lo, hi) = match (signed.iter().min(), signed.iter().max()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::LayoutMismatch("band has no active subcarriers".into())),
        };
        let width = (hi - lo + 1) as f64;
        let centre = (lo + hi) as f64 / 2.0;
        let lowpass = windowed_sinc(len, width + 1.0, n);
        let taps = modulate_to_bin(&lowpass, centre, n);
        Ok(FofdmBand { num, taps })
    }

    /// Frequency span `[lo, hi)` of the band's subcarriers, normalized.
    pub fn occupied_band(&self) -> (f64, f64) {
        self.num.occupied_band()
    }

    /// Delay of filter plus matched filter.
    pub fn aggregate_delay(&self) -> usize {
        self.taps.len() - 1
    }

    /// `|G(k)|²` at every bin of the band's transform grid.
    pub fn filter_power_response(&self) -> Vec<Complex64> {
        let n = self.num.n;
        (0..n)
            .map(|k| {
                let g: Complex64 = self
                    .taps
                    .iter()
                    .enumerate()
                    .map(|(l, &t)| t * Complex64::from_polar(1.0, -2.0 * PI * ((k * l) % n) as f64 / n as f64))
                    .sum();
                Complex64::new(g.norm_sqr(), 0.0)
            })
            .collect()
    }

    fn burst_len(&self) -> usize {
        self.num.m * self.num.cp_symbol_len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FofdmLayout {
    pub bands: Vec<FofdmBand>,
}

impl FofdmLayout {
    /// A single band spanning the whole active set with the default filter.
    pub fn single(num: &Numerology) -> Result<Self> {
        Ok(FofdmLayout {
            bands: vec![FofdmBand::with_default_filter(num.clone())?],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::LayoutMismatch("no subbands".into()));
        }
        for b in &self.bands {
            b.num.validate()?;
            if b.taps.is_empty() {
                return Err(Error::LayoutMismatch("subband filter must have at least one tap".into()));
            }
        }
        for (i, a) in self.bands.iter().enumerate() {
            for b in &self.bands[i + 1..] {
                let (alo, ahi) = a.occupied_band();
                let (blo, bhi) = b.occupied_band();
                if alo < bhi && blo < ahi {
                    return Err(Error::LayoutMismatch(format!(
                        "bands [{alo:.4}, {ahi:.4}) and [{blo:.4}, {bhi:.4}) overlap"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Output length: the longest filtered subband burst.
    pub fn burst_len(&self) -> usize {
        self.bands
            .iter()
            .map(|b| b.burst_len() + b.taps.len() - 1)
            .max()
            .unwrap_or(0)
    }
}

pub fn mod_f_ofdm(grids: &[ResourceGrid], layout: &FofdmLayout) -> Result<IqVec> {
    layout.validate()?;
    if grids.len() != layout.bands.len() {
        return Err(Error::LayoutMismatch(format!(
            "{} grids for {} subbands",
            grids.len(),
            layout.bands.len()
        )));
    }
    let mut out = vec![ZERO; layout.burst_len()];
    for (grid, band) in grids.iter().zip(&layout.bands) {
        let s = mod_cp_ofdm(grid, &band.num)?;
        let y = linear_convolve(&s, &band.taps)?;
        out.iter_mut().zip(y).for_each(|(o, v)| *o += v);
    }
    Ok(IqVec::from_raw(out))
}

/// How far the receiver's transform window is moved into the CP: half the
/// CP, limited by the filter delay.
pub fn rx_window_advance(band: &FofdmBand) -> usize {
    (band.num.l_cp / 2).min(band.aggregate_delay())
}

/// Per band: matched filter, removal of the aggregate filter delay, CP
/// removal, transform and single-tap equalization against the channel times
/// the combined filter response `|G|²`. The transform window starts
/// [`rx_window_advance`] samples early and the resulting phase ramp is part of
/// the equalizer response.
///
/// `channel` gives channel taps (not a per-bin response) so that each band can
/// evaluate it on its own transform grid.
pub fn demod_f_ofdm(
    rx: &[Complex64],
    layout: &FofdmLayout,
    channel: Option<(&[Complex64], EqMode)>,
) -> Result<Vec<ResourceGrid>> {
    layout.validate()?;
    let mut grids = Vec::with_capacity(layout.bands.len());
    for band in &layout.bands {
        let n = band.num.n;
        let matched: Vec<Complex64> = band.taps.iter().rev().map(|t| t.conj()).collect();
        let z = linear_convolve(rx, &matched)?;
        let delay = band.aggregate_delay();
        let needed = band.burst_len();
        if z.len() < delay + needed {
            return Err(Error::TruncatedBurst {
                needed: needed + band.taps.len() - 1,
                got: rx.len(),
            });
        }
        // The combined filter is two-sided around `delay`; starting the
        // transform window mid-CP leaves room for both of its tails.
        let advance = rx_window_advance(band);
        let aligned = &z[delay - advance..delay - advance + needed];
        let mut response = band.filter_power_response();
        for (k, r) in response.iter_mut().enumerate() {
            *r *= Complex64::from_polar(1.0, -2.0 * PI * ((k * advance) % n) as f64 / n as f64);
        }
        let mode = match channel {
            Some((taps, mode)) => {
                let h = crate::numerics::frequency_response(taps, n);
                response.iter_mut().zip(h).for_each(|(r, h)| *r *= h);
                mode
            }
            None => EqMode::Zf,
        };
        grids.push(demod_cp_ofdm(
            aligned,
            &band.num,
            Some(Equalizer {
                response: &response,
                mode,
            }),
        )?);
    }
    Ok(grids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridding::Constellation;
    use crate::metrics::{evm_db, oobe_ratio, psd_welch, WelchConfig};

    fn band(n: usize, l_cp: usize, m: usize, first: i64, count: usize) -> Numerology {
        let active = (0..count as i64).map(|i| (first + i).rem_euclid(n as i64) as usize).collect();
        Numerology::new(n, l_cp, 0, m, active).unwrap()
    }

    fn random(num: &Numerology, seed: u64) -> ResourceGrid {
        ResourceGrid::random(num.m, num.n, num.active.clone(), &Constellation::qpsk(), seed)
            .unwrap()
            .0
    }

    #[test]
    fn degenerate_filter_is_cp_ofdm() {
        let num = band(64, 8, 3, -20, 40);
        let layout = FofdmLayout {
            bands: vec![FofdmBand {
                num: num.clone(),
                taps: vec![Complex64::new(1.0, 0.0)],
            }],
        };
        let grid = random(&num, 1);
        let s = mod_f_ofdm(std::slice::from_ref(&grid), &layout).unwrap();
        let o = mod_cp_ofdm(&grid, &num).unwrap();
        assert!(s.iter().zip(o.iter()).all(|(a, b)| (a - b).norm() <= 1e-12));
        let rx = demod_f_ofdm(&s, &layout, None).unwrap();
        assert!(evm_db(&grid.active_values(), &rx[0].active_values()) <= -119.0);
    }

    #[test]
    fn default_loopback() {
        let num = band(256, 32, 6, -60, 120);
        let layout = FofdmLayout::single(&num).unwrap();
        let grid = random(&num, 2);
        let s = mod_f_ofdm(std::slice::from_ref(&grid), &layout).unwrap();
        let rx = demod_f_ofdm(&s, &layout, None).unwrap();
        let evm = evm_db(&grid.active_values(), &rx[0].active_values());
        assert!(evm <= -35.0, "{evm}");
    }

    #[test]
    fn two_numerologies_occupy_disjoint_bands() {
        // Band A: N = 256 on bins [-100, -20); band B: N = 128 (twice the
        // spacing) on bins [10, 40).
        let a = band(256, 32, 8, -100, 80);
        let b = band(128, 16, 16, 10, 30);
        let layout = FofdmLayout {
            bands: vec![
                FofdmBand::with_default_filter(a.clone()).unwrap(),
                FofdmBand::with_default_filter(b.clone()).unwrap(),
            ],
        };
        let grids = [random(&a, 3), random(&b, 4)];
        let s = mod_f_ofdm(&grids, &layout).unwrap();
        let psd = psd_welch(&s, &WelchConfig::default()).unwrap();
        let (alo, ahi) = a.occupied_band();
        let (blo, bhi) = b.occupied_band();
        let mean = |lo: f64, hi: f64| {
            let v: Vec<f64> = psd
                .freqs
                .iter()
                .zip(&psd.power)
                .filter(|(f, _)| **f >= lo && **f < hi)
                .map(|(_, p)| *p)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let gap = mean(ahi + 0.01, blo - 0.01);
        assert!(mean(alo, ahi) > 100.0 * gap);
        assert!(mean(blo, bhi) > 100.0 * gap);
        let rx = demod_f_ofdm(&s, &layout, None).unwrap();
        for (g, r) in grids.iter().zip(&rx) {
            let evm = evm_db(&g.active_values(), &r.active_values());
            assert!(evm <= -30.0, "{evm}");
        }
        assert!(oobe_ratio(&psd, (alo, bhi), 0.02).unwrap() < -30.0);
    }

    #[test]
    fn overlapping_bands_rejected() {
        let a = band(64, 8, 1, 0, 20);
        let b = band(64, 8, 1, 10, 20);
        let layout = FofdmLayout {
            bands: vec![
                FofdmBand::with_default_filter(a).unwrap(),
                FofdmBand::with_default_filter(b).unwrap(),
            ],
        };
        assert!(matches!(layout.validate(), Err(Error::LayoutMismatch(_))));
    }
}
