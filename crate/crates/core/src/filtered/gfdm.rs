//! Generalized frequency-division multiplexing: `M` subsymbols of `N`
//! subcarriers circularly pulse-shaped within one block of `M·N` samples,
//! followed by a single block cyclic prefix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filtered::prototype::GfdmPrototype;
use crate::gridding::ResourceGrid;
use crate::numerics::{dft, fde_equalize, fft, ifft, Direction, EqMode, IqVec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest block handled by the explicit-matrix receiver.
pub const MAX_ZF_BLOCK: usize = 4096;
/// 1-norm condition estimate above which the modulation matrix is treated
/// as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GfdmConfig {
    pub n: usize,
    pub m: usize,
    pub l_cp: usize,
    pub active: Vec<usize>,
    shape: GfdmPrototype,
    prototype: Vec<Complex64>,
}

impl GfdmConfig {
    pub fn new(n: usize, m: usize, l_cp: usize, active: Vec<usize>, shape: GfdmPrototype) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidNumerology(format!("GFDM needs N, M >= 1, got N={n}, M={m}")));
        }
        if l_cp >= n * m {
            return Err(Error::InvalidNumerology(format!("block CP {l_cp} >= block length {}", n * m)));
        }
        ResourceGrid::zeros(m, n, active.clone())?;
        let prototype = shape.taps(n, m)?;
        Ok(GfdmConfig {
            n,
            m,
            l_cp,
            active,
            shape,
            prototype,
        })
    }

    pub fn block_len(&self) -> usize {
        self.n * self.m
    }

    pub fn burst_len(&self) -> usize {
        self.block_len() + self.l_cp
    }

    pub fn shape(&self) -> GfdmPrototype {
        self.shape
    }

    pub fn prototype(&self) -> &[Complex64] {
        &self.prototype
    }

    fn check_grid(&self, grid: &ResourceGrid) -> Result<()> {
        if grid.symbols() != self.m || grid.subcarriers() != self.n {
            return Err(Error::GridConfigMismatch(format!(
                "grid {}x{} vs config M x N = {}x{}",
                grid.symbols(),
                grid.subcarriers(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }

    /// Basis pulse of `(m, n)`: `g[(k − mN) mod MN]·e^{j2πkn/N} / √N`.
    fn pulse(&self, m: usize, n: usize, k: usize) -> Complex64 {
        let len = self.block_len();
        let g = self.prototype[(k + len - m * self.n) % len];
        let ph = 2.0 * PI * ((k * n) % self.n) as f64 / self.n as f64;
        g * Complex64::from_polar(1.0 / (self.n as f64).sqrt(), ph)
    }
}

fn prepend_cp(block: Vec<Complex64>, l_cp: usize) -> IqVec {
    let len = block.len();
    let mut out = Vec::with_capacity(len + l_cp);
    out.extend_from_slice(&block[len - l_cp..]);
    out.extend(block);
    IqVec::from_raw(out)
}

/// Direct double-sum synthesis of one block plus its cyclic prefix.
pub fn mod_gfdm(grid: &ResourceGrid, cfg: &GfdmConfig) -> Result<IqVec> {
    cfg.check_grid(grid)?;
    let len = cfg.block_len();
    let mut block = vec![ZERO; len];
    for m in 0..cfg.m {
        for &n in &cfg.active {
            let d = grid.get(m, n);
            if d == ZERO {
                continue;
            }
            for (k, b) in block.iter_mut().enumerate() {
                *b += d * cfg.pulse(m, n, k);
            }
        }
    }
    Ok(prepend_cp(block, cfg.l_cp))
}

/// Transform-domain synthesis: an `M`-point DFT per subcarrier, circular
/// filtering by the prototype spectrum on the `MN`-point grid, then one
/// `MN`-point inverse transform.
pub fn mod_gfdm_transform(grid: &ResourceGrid, cfg: &GfdmConfig) -> Result<IqVec> {
    cfg.check_grid(grid)?;
    let (n, m) = (cfg.n, cfg.m);
    let len = cfg.block_len();
    let g_spec = fft(cfg.prototype());
    let support: Vec<usize> = (0..len).filter(|&q| g_spec[q].norm() > 1e-13).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let mut spec = vec![ZERO; len];
    let mut column = vec![ZERO; m];
    for &sc in &cfg.active {
        for (j, c) in column.iter_mut().enumerate() {
            *c = grid.get(j, sc);
        }
        if column.iter().all(|c| *c == ZERO) {
            continue;
        }
        let d = dft(&column, Direction::Forward)?;
        for &q in &support {
            let bin = (q + sc * m) % len;
            spec[bin] += g_spec[q] * d[bin % m] * scale;
        }
    }
    Ok(prepend_cp(ifft(&spec), cfg.l_cp))
}

/// Zero-forcing GFDM receiver holding the inverted modulation matrix.
#[derive(Debug, Clone)]
pub struct GfdmReceiver {
    cfg: GfdmConfig,
    inverse: DMatrix<Complex64>,
    condition: f64,
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl GfdmReceiver {
    pub fn new(cfg: &GfdmConfig) -> Result<Self> {
        let len = cfg.block_len();
        if len > MAX_ZF_BLOCK {
            return Err(Error::GridConfigMismatch(format!(
                "block {len} exceeds the explicit-matrix bound {MAX_ZF_BLOCK}"
            )));
        }
        // Column m·N + n is the basis pulse of (m, n).
        let a = DMatrix::from_fn(len, len, |k, col| cfg.pulse(col / cfg.n, col % cfg.n, k));
        let norm = one_norm(&a);
        let inverse = a.try_inverse().ok_or(Error::SingularPrototype(f64::INFINITY))?;
        let condition = norm * one_norm(&inverse);
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::SingularPrototype(condition));
        }
        Ok(GfdmReceiver {
            cfg: cfg.clone(),
            inverse,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Strips the block CP, optionally equalizes over the `MN`-point
    /// spectrum with `h`, and applies the inverse modulation matrix.
    pub fn demodulate(&self, rx: &[Complex64], h: Option<(&[Complex64], EqMode)>) -> Result<ResourceGrid> {
        let cfg = &self.cfg;
        let len = cfg.block_len();
        let needed = cfg.burst_len();
        if rx.len() < needed {
            return Err(Error::TruncatedBurst { needed, got: rx.len() });
        }
        let mut block = rx[cfg.l_cp..needed].to_vec();
        if let Some((resp, mode)) = h {
            if resp.len() != len {
                return Err(Error::LengthMismatch {
                    left: resp.len(),
                    right: len,
                });
            }
            block = ifft(&fde_equalize(&fft(&block), resp, mode)?);
        }
        let d = &self.inverse * DVector::from_vec(block);
        let rows = (0..cfg.m).map(|m| d.as_slice()[m * cfg.n..(m + 1) * cfg.n].to_vec());
        Ok(ResourceGrid::from_rows(cfg.n, &cfg.active, rows))
    }
}

/// One-shot zero-forcing demodulation; build a [`GfdmReceiver`] to reuse the
/// matrix inverse across blocks.
pub fn demod_gfdm_zf(
    rx: &[Complex64],
    cfg: &GfdmConfig,
    h: Option<(&[Complex64], EqMode)>,
) -> Result<ResourceGrid> {
    GfdmReceiver::new(cfg)?.demodulate(rx, h)
}
