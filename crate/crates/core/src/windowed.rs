//! CP-OFDM, windowed OFDM (W-OFDM) and edge-windowed OFDM.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridding::ResourceGrid;
use crate::numerics::{fde_equalize, fft, ifft, raised_cosine_ramp, EqMode, IqVec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lattice parameters shared by the OFDM-family waveforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Numerology {
    /// Transform size (subcarriers).
    pub n: usize,
    /// Cyclic prefix length in samples.
    pub l_cp: usize,
    /// Window extension in samples.
    pub l_ext: usize,
    /// Symbols per burst.
    pub m: usize,
    /// Active subcarrier bins, each in `[0, n)`.
    pub active: Vec<usize>,
}

impl Numerology {
    pub fn new(n: usize, l_cp: usize, l_ext: usize, m: usize, active: Vec<usize>) -> Result<Self> {
        let num = Numerology {
            n,
            l_cp,
            l_ext,
            m,
            active,
        };
        num.validate()?;
        Ok(num)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidNumerology(format!("n = {} < 2", self.n)));
        }
        if self.m == 0 {
            return Err(Error::InvalidNumerology("m must be at least 1".into()));
        }
        if self.l_cp >= self.n {
            return Err(Error::InvalidNumerology(format!(
                "l_cp = {} must be below n = {}",
                self.l_cp, self.n
            )));
        }
        if self.l_ext > self.l_cp {
            return Err(Error::WindowExceedsCp {
                l_ext: self.l_ext,
                l_cp: self.l_cp,
            });
        }
        if let Some(&bad) = self.active.iter().find(|&&k| k >= self.n) {
            return Err(Error::InvalidNumerology(format!(
                "active subcarrier {bad} outside [0, {})",
                self.n
            )));
        }
        let mut sorted = self.active.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.active.len() {
            return Err(Error::InvalidNumerology("duplicate active subcarrier".into()));
        }
        Ok(())
    }

    /// `count` contiguous subcarriers centred on DC, i.e. signed frequency
    /// indices `-count/2 .. count - count/2`, wrapped into `[0, n)`.
    pub fn centered_active(n: usize, count: usize) -> Vec<usize> {
        let first = -((count / 2) as i64);
        (0..count as i64).map(|i| wrap_bin(first + i, n)).collect()
    }

    /// Normalized frequency interval `[lo, hi)` spanned by the active
    /// subcarriers, each bin counted as one subcarrier spacing wide.
    pub fn occupied_band(&self) -> (f64, f64) {
        occupied_band(&self.active, self.n)
    }

    pub fn cp_symbol_len(&self) -> usize {
        self.n + self.l_cp
    }

    pub fn check_grid(&self, grid: &ResourceGrid) -> Result<()> {
        if grid.subcarriers() != self.n || grid.symbols() != self.m {
            return Err(Error::GridNumerologyMismatch(format!(
                "grid is {}x{}, numerology expects {}x{}",
                grid.symbols(),
                grid.subcarriers(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }
}

pub(crate) fn wrap_bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Signed frequency index of bin `k` in an `n`-point transform.
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub(crate) fn occupied_band(active: &[usize], n: usize) -> (f64, f64) {
    let signed: Vec<i64> = active.iter().map(|&k| signed_bin(k, n)).collect();
    let lo = *signed.iter().min().unwrap_or(&0) as f64 - 0.5;
    let hi = *signed.iter().max().unwrap_or(&0) as f64 + 0.5;
    (lo / n as f64, hi / n as f64)
}

/// Which subcarriers receive the long (edge) window and which the short one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeWindowPlan {
    pub edge_set: Vec<usize>,
    pub l_ext_edge: usize,
    pub l_ext_inner: usize,
}

impl EdgeWindowPlan {
    /// The `per_side` outermost active subcarriers on each side of the band.
    pub fn outer(num: &Numerology, per_side: usize, l_ext_edge: usize, l_ext_inner: usize) -> Self {
        let mut by_freq: Vec<usize> = num.active.clone();
        by_freq.sort_by_key(|&k| signed_bin(k, num.n));
        let per_side = per_side.min(by_freq.len() / 2);
        let mut edge_set: Vec<usize> = by_freq[..per_side].to_vec();
        edge_set.extend_from_slice(&by_freq[by_freq.len() - per_side..]);
        EdgeWindowPlan {
            edge_set,
            l_ext_edge,
            l_ext_inner,
        }
    }

    pub fn validate(&self, num: &Numerology) -> Result<()> {
        if self.l_ext_inner > self.l_ext_edge || self.l_ext_edge > num.l_cp {
            return Err(Error::BadEdgePlan(format!(
                "need l_ext_inner ({}) <= l_ext_edge ({}) <= l_cp ({})",
                self.l_ext_inner, self.l_ext_edge, num.l_cp
            )));
        }
        if let Some(k) = self.edge_set.iter().find(|k| !num.active.contains(k)) {
            return Err(Error::BadEdgePlan(format!("edge subcarrier {k} is not active")));
        }
        Ok(())
    }

    /// Effective CP left for the edge subcarriers.
    pub fn edge_effective_cp(&self, num: &Numerology) -> usize {
        num.l_cp - self.l_ext_edge
    }
}

/// Time-domain core (length `n`) of symbol `m`, restricted to `carriers`.
fn symbol_core(grid: &ResourceGrid, m: usize, carriers: Option<&[bool]>) -> Vec<Complex64> {
    let row: Vec<Complex64> = match carriers {
        None => grid.row(m).to_vec(),
        Some(mask) => grid
            .row(m)
            .iter()
            .zip(mask)
            .map(|(&v, &on)| if on { v } else { ZERO })
            .collect(),
    };
    ifft(&row)
}

/// CP-OFDM: per-symbol inverse transform with the last `l_cp` samples copied
/// in front. Output length `m·(n + l_cp)`.
pub fn mod_cp_ofdm(grid: &ResourceGrid, num: &Numerology) -> Result<IqVec> {
    num.validate()?;
    num.check_grid(grid)?;
    let mut out = Vec::with_capacity(num.m * num.cp_symbol_len());
    for m in 0..num.m {
        let core = symbol_core(grid, m, None);
        out.extend_from_slice(&core[num.n - num.l_cp..]);
        out.extend_from_slice(&core);
    }
    Ok(IqVec::from_raw(out))
}

/// Shared windowed synthesis: each symbol is cyclically extended by
/// `prefix` samples in front and `ramp` samples behind, tapered by rising and
/// falling raised-cosine ramps of length `ramp`, and overlap-added at
/// `stride`. With `wrap` the trailing ramp of the last symbol folds onto the
/// start of the burst so that the burst length is exactly `m·stride`.
fn windowed_synthesis(
    grid: &ResourceGrid,
    num: &Numerology,
    carriers: Option<&[bool]>,
    ramp_len: usize,
    prefix: usize,
    stride: usize,
    wrap: bool,
) -> Vec<Complex64> {
    let n = num.n;
    let ramp = raised_cosine_ramp(ramp_len);
    let rise = ramp.rising();
    let fall = ramp.falling();
    let total = if wrap {
        num.m * stride
    } else {
        num.m * stride + ramp_len
    };
    let mut out = vec![ZERO; total];
    let ext_len = prefix + n + ramp_len;
    for m in 0..num.m {
        let core = symbol_core(grid, m, carriers);
        let start = m * stride;
        for i in 0..ext_len {
            // Cyclic index into the core: prefix comes from the tail.
            let src = (i + n * (prefix / n + 1) - prefix) % n;
            let w = if i < ramp_len {
                rise[i]
            } else if i >= ext_len - ramp_len {
                fall[i - (ext_len - ramp_len)]
            } else {
                1.0
            };
            out[(start + i) % total] += core[src] * w;
        }
    }
    out
}

/// W-OFDM: CP-OFDM whose symbols are additionally extended by `l_ext` on both
/// edges, tapered, and overlapped over exactly `l_ext` samples. Burst length
/// `m·(n + l_cp + l_ext) + l_ext`.
pub fn mod_w_ofdm(grid: &ResourceGrid, num: &Numerology) -> Result<IqVec> {
    num.validate()?;
    num.check_grid(grid)?;
    let stride = num.n + num.l_cp + num.l_ext;
    Ok(IqVec::from_raw(windowed_synthesis(
        grid,
        num,
        None,
        num.l_ext,
        num.l_cp + num.l_ext,
        stride,
        false,
    )))
}

/// Edge-windowed OFDM: edge subcarriers and inner subcarriers are synthesized
/// as two branches whose window ramps are taken out of the CP (long ramp on
/// the edge branch, short ramp on the inner branch) and summed. The burst
/// keeps the CP-OFDM length `m·(n + l_cp)`; the final ramp-down wraps onto
/// the start of the burst.
pub fn mod_edge_windowed_ofdm(grid: &ResourceGrid, num: &Numerology, plan: &EdgeWindowPlan) -> Result<IqVec> {
    num.validate()?;
    num.check_grid(grid)?;
    plan.validate(num)?;
    let mut edge_mask = vec![false; num.n];
    for &k in &plan.edge_set {
        edge_mask[k] = true;
    }
    let inner_mask: Vec<bool> = edge_mask.iter().map(|e| !e).collect();
    let stride = num.cp_symbol_len();
    let mut out = windowed_synthesis(grid, num, Some(&inner_mask), plan.l_ext_inner, num.l_cp, stride, true);
    if !plan.edge_set.is_empty() {
        let edge = windowed_synthesis(grid, num, Some(&edge_mask), plan.l_ext_edge, num.l_cp, stride, true);
        out.iter_mut().zip(edge).for_each(|(a, b)| *a += b);
    }
    Ok(IqVec::from_raw(out))
}

/// Receiver-side channel knowledge for single-tap equalization.
#[derive(Debug, Clone, Copy)]
pub struct Equalizer<'a> {
    /// Per-bin channel response over the demodulator's transform size.
    pub response: &'a [Complex64],
    pub mode: EqMode,
}

/// Demodulates `num.m` symbols whose cores start at
/// `first_core + m·stride`. With `rx_window = w > 0` the `w` samples before
/// each core are tapered, as is the core's own tail, and folded onto it.
fn demod_symbols(
    rx: &[Complex64],
    num: &Numerology,
    first_core: usize,
    stride: usize,
    rx_window: usize,
    eq: Option<Equalizer<'_>>,
) -> Result<ResourceGrid> {
    let n = num.n;
    let needed = first_core + (num.m - 1) * stride + n;
    if rx.len() < needed {
        return Err(Error::TruncatedBurst {
            needed,
            got: rx.len(),
        });
    }
    if let Some(e) = eq {
        if e.response.len() != n {
            return Err(Error::LengthMismatch {
                left: e.response.len(),
                right: n,
            });
        }
    }
    let ramp = raised_cosine_ramp(rx_window);
    let rise = ramp.rising();
    let fall = ramp.falling();
    let active = &num.active;
    let mut rows = Vec::with_capacity(num.m);
    for m in 0..num.m {
        let core_start = first_core + m * stride;
        let mut seg = rx[core_start..core_start + n].to_vec();
        if rx_window > 0 {
            for j in 0..rx_window {
                let k = n - rx_window + j;
                seg[k] = seg[k] * fall[j] + rx[core_start - rx_window + j] * rise[j];
            }
        }
        let spec = fft(&seg);
        let row = match eq {
            None => spec,
            Some(e) => {
                let y: Vec<Complex64> = active.iter().map(|&k| spec[k]).collect();
                let h: Vec<Complex64> = active.iter().map(|&k| e.response[k]).collect();
                let d = fde_equalize(&y, &h, e.mode)?;
                let mut row = vec![ZERO; n];
                for (&k, v) in active.iter().zip(d) {
                    row[k] = v;
                }
                row
            }
        };
        rows.push(row);
    }
    Ok(ResourceGrid::from_rows(n, active, rows))
}

/// CP removal, forward transform and optional single-tap equalization.
pub fn demod_cp_ofdm(rx: &[Complex64], num: &Numerology, eq: Option<Equalizer<'_>>) -> Result<ResourceGrid> {
    num.validate()?;
    demod_symbols(rx, num, num.l_cp, num.cp_symbol_len(), 0, eq)
}

/// W-OFDM receiver. With `rx_window` the `l_ext` samples preceding each core
/// (inside the CP) are used to taper and fold the symbol edge, which
/// suppresses interference from non-orthogonal neighbours.
pub fn demod_w_ofdm(
    rx: &[Complex64],
    num: &Numerology,
    rx_window: bool,
    eq: Option<Equalizer<'_>>,
) -> Result<ResourceGrid> {
    num.validate()?;
    let stride = num.n + num.l_cp + num.l_ext;
    let w = if rx_window { num.l_ext } else { 0 };
    demod_symbols(rx, num, num.l_ext + num.l_cp, stride, w, eq)
}

/// Edge-windowed OFDM uses the plain CP-OFDM receiver.
pub fn demod_edge_windowed_ofdm(
    rx: &[Complex64],
    num: &Numerology,
    eq: Option<Equalizer<'_>>,
) -> Result<ResourceGrid> {
    demod_cp_ofdm(rx, num, eq)
}
