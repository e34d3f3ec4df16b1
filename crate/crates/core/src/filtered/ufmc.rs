//! Universal filtered multicarrier: per-subband inverse transform followed by
//! a short FIR per subband, symbols of `N + L − 1` samples sent back to back.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtered::prototype::{chebwin, modulate_to_bin};
use crate::gridding::ResourceGrid;
use crate::numerics::{fde_equalize, fft, ifft, linear_convolve, IqVec};
use crate::windowed::{signed_bin, wrap_bin, Equalizer, Numerology};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default subband width in subcarriers.
pub const UFMC_SUBBAND_WIDTH: usize = 12;
/// Default Dolph-Chebyshev filter length.
pub const UFMC_FILTER_LEN: usize = 16;
/// Default Dolph-Chebyshev sidelobe attenuation.
pub const UFMC_SIDELOBE_DB: f64 = 40.0;

/// A contiguous run of `count` subcarriers starting at bin `first`
/// (wrapping modulo `N`), with its own FIR filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subband {
    pub first: usize,
    pub count: usize,
    pub taps: Vec<Complex64>,
}

impl Subband {
    pub fn bins(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).map(move |i| (self.first + i) % n)
    }

    /// Centre frequency in (signed) bins.
    pub fn centre_bin(&self, n: usize) -> f64 {
        signed_bin(self.first, n) as f64 + (self.count as f64 - 1.0) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandLayout {
    pub subbands: Vec<Subband>,
}

impl SubbandLayout {
    /// Splits the active set (taken in ascending signed-frequency order) into
    /// runs of `width` subcarriers, each filtered by a Chebyshev window of
    /// length `filter_len` and attenuation `sidelobe_db`, shifted to the run
    /// centre and normalized to unit passband gain.
    pub fn chebyshev(num: &Numerology, width: usize, filter_len: usize, sidelobe_db: f64) -> Result<Self> {
        if width == 0 || filter_len == 0 {
            return Err(Error::LayoutMismatch("subband width and filter length must be positive".into()));
        }
        let n = num.n;
        let mut signed: Vec<i64> = num.active.iter().map(|&k| signed_bin(k, n)).collect();
        signed.sort_unstable();
        let window = chebwin(filter_len, sidelobe_db);
        let dc: f64 = window.iter().sum();
        let lowpass: Vec<f64> = window.iter().map(|w| w / dc).collect();
        let mut subbands = Vec::new();
        let mut i = 0;
        while i < signed.len() {
            let mut j = i + 1;
            while j < signed.len() && j - i < width && signed[j] == signed[j - 1] + 1 {
                j += 1;
            }
            let mut sb = Subband {
                first: wrap_bin(signed[i], n),
                count: j - i,
                taps: Vec::new(),
            };
            sb.taps = modulate_to_bin(&lowpass, sb.centre_bin(n), n);
            subbands.push(sb);
            i = j;
        }
        Ok(SubbandLayout { subbands })
    }

    pub fn default_for(num: &Numerology) -> Result<Self> {
        Self::chebyshev(num, UFMC_SUBBAND_WIDTH, UFMC_FILTER_LEN, UFMC_SIDELOBE_DB)
    }

    /// One subband over the whole active set with the given filter. The
    /// active set must be contiguous.
    pub fn single(num: &Numerology, taps: Vec<Complex64>) -> Result<Self> {
        let mut layout = Self::chebyshev(num, num.active.len().max(1), 1, 0.0)?;
        if layout.subbands.len() != 1 {
            return Err(Error::LayoutMismatch("active set is not contiguous".into()));
        }
        layout.subbands[0].taps = taps;
        Ok(layout)
    }

    pub fn max_filter_len(&self) -> usize {
        self.subbands.iter().map(|s| s.taps.len()).max().unwrap_or(1)
    }

    /// Bins disjoint, inside `[0, N)`, filters non-empty, and every active
    /// subcarrier covered.
    pub fn validate(&self, num: &Numerology) -> Result<()> {
        let n = num.n;
        let mut owner = vec![false; n];
        for sb in &self.subbands {
            if sb.taps.is_empty() {
                return Err(Error::LayoutMismatch("subband filter must have at least one tap".into()));
            }
            if sb.first >= n || sb.count == 0 || sb.count > n {
                return Err(Error::LayoutMismatch(format!(
                    "subband [{}, +{}) outside [0, {n})",
                    sb.first, sb.count
                )));
            }
            for b in sb.bins(n) {
                if owner[b] {
                    return Err(Error::LayoutOverlap(b));
                }
                owner[b] = true;
            }
        }
        if let Some(&k) = num.active.iter().find(|&&k| !owner[k]) {
            return Err(Error::LayoutMismatch(format!("active subcarrier {k} belongs to no subband")));
        }
        Ok(())
    }
}

fn check(num: &Numerology, layout: &SubbandLayout) -> Result<usize> {
    num.validate()?;
    if num.l_cp != 0 || num.l_ext != 0 {
        return Err(Error::InvalidNumerology("UFMC symbols carry no cyclic prefix or window extension".into()));
    }
    layout.validate(num)?;
    let l = layout.max_filter_len();
    if l > num.n {
        return Err(Error::FilterTooLong { len: l, n: num.n });
    }
    Ok(num.n + l - 1)
}

/// UFMC symbol length `N + L − 1` for the longest subband filter.
pub fn ufmc_symbol_len(num: &Numerology, layout: &SubbandLayout) -> usize {
    num.n + layout.max_filter_len() - 1
}

pub fn mod_ufmc(grid: &ResourceGrid, num: &Numerology, layout: &SubbandLayout) -> Result<IqVec> {
    let sym_len = check(num, layout)?;
    num.check_grid(grid)?;
    let n = num.n;
    let mut out = vec![ZERO; num.m * sym_len];
    let mut spec = vec![ZERO; n];
    for m in 0..num.m {
        let row = grid.row(m);
        let base = m * sym_len;
        for sb in &layout.subbands {
            spec.iter_mut().for_each(|v| *v = ZERO);
            for b in sb.bins(n) {
                spec[b] = row[b];
            }
            let y = linear_convolve(&ifft(&spec), &sb.taps)?;
            for (o, v) in out[base..base + y.len()].iter_mut().zip(y) {
                *o += v;
            }
        }
    }
    Ok(IqVec::from_raw(out))
}

/// Filter response at bin `k` on the `N`-point grid.
fn response_at(taps: &[Complex64], k: usize, n: usize) -> Complex64 {
    taps.iter()
        .enumerate()
        .map(|(l, &t)| t * Complex64::from_polar(1.0, -2.0 * PI * ((k * l) % n) as f64 / n as f64))
        .sum()
}

/// Zero-pads each symbol to `2N`, keeps the even bins of the `2N`-point
/// transform and divides by the subband filter response (and the channel
/// response when given).
pub fn demod_ufmc(
    rx: &[Complex64],
    num: &Numerology,
    layout: &SubbandLayout,
    eq: Option<Equalizer<'_>>,
) -> Result<ResourceGrid> {
    let sym_len = check(num, layout)?;
    let n = num.n;
    if sym_len > 2 * n {
        return Err(Error::FilterTooLong {
            len: layout.max_filter_len(),
            n,
        });
    }
    let needed = num.m * sym_len;
    if rx.len() < needed {
        return Err(Error::TruncatedBurst { needed, got: rx.len() });
    }
    let mut combined = vec![Complex64::new(1.0, 0.0); n];
    for sb in &layout.subbands {
        for b in sb.bins(n) {
            combined[b] = response_at(&sb.taps, b, n);
        }
    }
    if let Some(e) = eq {
        if e.response.len() != n {
            return Err(Error::LengthMismatch {
                left: e.response.len(),
                right: n,
            });
        }
        combined.iter_mut().zip(e.response).for_each(|(c, h)| *c *= h);
    }
    let mode = eq.map(|e| e.mode).unwrap_or(crate::numerics::EqMode::Zf);
    let h: Vec<Complex64> = num.active.iter().map(|&k| combined[k]).collect();
    let mut rows = Vec::with_capacity(num.m);
    let mut padded = vec![ZERO; 2 * n];
    for m in 0..num.m {
        padded.iter_mut().for_each(|v| *v = ZERO);
        padded[..sym_len].copy_from_slice(&rx[m * sym_len..(m + 1) * sym_len]);
        let spec = fft(&padded);
        let y: Vec<Complex64> = num.active.iter().map(|&k| spec[2 * k]).collect();
        let d = fde_equalize(&y, &h, mode)?;
        let mut row = vec![ZERO; n];
        for (&k, v) in num.active.iter().zip(d) {
            row[k] = v;
        }
        rows.push(row);
    }
    Ok(ResourceGrid::from_rows(n, &num.active, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridding::Constellation;
    use crate::metrics::evm_db;
    use crate::windowed::mod_cp_ofdm;

    fn setup(n: usize, m: usize, active: usize) -> (Numerology, SubbandLayout, ResourceGrid) {
        let num = Numerology::new(n, 0, 0, m, Numerology::centered_active(n, active)).unwrap();
        let layout = SubbandLayout::default_for(&num).unwrap();
        let (grid, _) = ResourceGrid::random(m, n, num.active.clone(), &Constellation::qpsk(), 8).unwrap();
        (num, layout, grid)
    }

    #[test]
    fn default_layout_structure() {
        let (num, layout, _) = setup(256, 1, 120);
        assert_eq!(layout.subbands.len(), 10);
        assert!(layout.subbands.iter().all(|s| s.count == 12 && s.taps.len() == 16));
        layout.validate(&num).unwrap();
        let centres: Vec<f64> = layout.subbands.iter().map(|s| s.centre_bin(256)).collect();
        assert_eq!(centres[0], -54.5);
        assert_eq!(centres[9], 53.5);
    }

    #[test]
    fn symbol_length_and_no_overlap() {
        let (num, layout, grid) = setup(64, 3, 48);
        assert_eq!(ufmc_symbol_len(&num, &layout), 79);
        let s = mod_ufmc(&grid, &num, &layout).unwrap();
        assert_eq!(s.len(), 3 * 79);
        // Symbol 1 alone occupies exactly samples [79, 158).
        let mut only = ResourceGrid::zeros(3, 64, num.active.clone()).unwrap();
        for &k in &num.active {
            only.set(1, k, grid.get(1, k));
        }
        let s1 = mod_ufmc(&only, &num, &layout).unwrap();
        assert!(s1[..79].iter().chain(&s1[158..]).all(|v| *v == ZERO));
        assert!(s1[79].norm() > 0.0 && s1[157].norm() > 0.0);
    }

    #[test]
    fn degenerate_filter_is_ofdm() {
        let num = Numerology::new(32, 0, 0, 2, Numerology::centered_active(32, 20)).unwrap();
        let layout = SubbandLayout::single(&num, vec![Complex64::new(1.0, 0.0)]).unwrap();
        let (grid, _) = ResourceGrid::random(2, 32, num.active.clone(), &Constellation::qpsk(), 1).unwrap();
        let s = mod_ufmc(&grid, &num, &layout).unwrap();
        let o = mod_cp_ofdm(&grid, &num).unwrap();
        assert!(s.iter().zip(o.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
        let rx = demod_ufmc(&s, &num, &layout, None).unwrap();
        assert!(evm_db(&grid.active_values(), &rx.active_values()) <= -119.0);
    }

    #[test]
    fn loopback() {
        let (num, layout, grid) = setup(256, 4, 120);
        let s = mod_ufmc(&grid, &num, &layout).unwrap();
        let rx = demod_ufmc(&s, &num, &layout, None).unwrap();
        assert!(evm_db(&grid.active_values(), &rx.active_values()) <= -40.0);
        let z = demod_ufmc(&vec![ZERO; s.len()], &num, &layout, None).unwrap();
        assert!(z.active_values().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn layout_errors() {
        let (num, mut layout, grid) = setup(64, 1, 24);
        layout.subbands[1].first = layout.subbands[0].first;
        assert!(matches!(mod_ufmc(&grid, &num, &layout), Err(Error::LayoutOverlap(_))));
        let (num, mut layout, grid) = setup(64, 1, 24);
        layout.subbands[0].taps = vec![Complex64::new(1.0, 0.0); 66];
        assert!(matches!(mod_ufmc(&grid, &num, &layout), Err(Error::FilterTooLong { .. })));
    }
}
