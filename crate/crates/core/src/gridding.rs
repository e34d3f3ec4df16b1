//! Message-space handling: Gray-coded square QAM, resource grids and OQAM
//! staggering.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Gray-coded square QAM with unit average energy.
///
/// The first half of each bit group selects the in-phase level, the second
/// half the quadrature level; on each axis bit value 0 maps to the positive
/// side. QPSK therefore maps `00 → (+1+j)/√2`, `01 → (+1−j)/√2`,
/// `10 → (−1+j)/√2`, `11 → (−1−j)/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_axis: usize,
    /// Amplitude of each per-axis Gray code, indexed by code.
    levels: Vec<f64>,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        let bits_per_axis = match order {
            4 => 1,
            16 => 2,
            64 => 3,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let side = 1usize << bits_per_axis;
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let mut levels = vec![0.0; side];
        for (pos, level_slot) in (0..side).map(|p| (p, gray(p))) {
            levels[level_slot] = (side as f64 - 1.0 - 2.0 * pos as f64) / scale;
        }
        let points = (0..order)
            .map(|code| {
                let i_code = code >> bits_per_axis;
                let q_code = code & (side - 1);
                Complex64::new(levels[i_code], levels[q_code])
            })
            .collect();
        Ok(Constellation {
            order,
            bits_per_axis,
            levels,
            points,
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("QPSK is supported")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    /// Point for a bit-tuple packed MSB-first into an integer.
    pub fn point(&self, code: usize) -> Complex64 {
        self.points[code]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    fn decide_axis(&self, value: f64) -> usize {
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for code in 0..self.levels.len() {
            let d = (value - self.levels[code]).abs();
            // Ties resolve to the smaller code, which is visited first.
            if d < best_dist - 1e-12 {
                best = code;
                best_dist = d;
            }
        }
        best
    }
}

fn gray(x: usize) -> usize {
    x ^ (x >> 1)
}

/// Maps bits (each 0 or 1) to constellation points.
pub fn map_bits(bits: &[u8], constellation: &Constellation) -> Result<Vec<Complex64>> {
    let k = constellation.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::RaggedBits {
            len: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|group| {
            let code = group.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
            constellation.point(code)
        })
        .collect())
}

/// Hard-decision demapping to the nearest constellation point.
pub fn demap_symbols(symbols: &[Complex64], constellation: &Constellation) -> Vec<u8> {
    let bpa = constellation.bits_per_axis;
    let mut bits = Vec::with_capacity(symbols.len() * 2 * bpa);
    for s in symbols {
        let i_code = constellation.decide_axis(s.re);
        let q_code = constellation.decide_axis(s.im);
        for code in [i_code, q_code] {
            for b in (0..bpa).rev() {
                bits.push(((code >> b) & 1) as u8);
            }
        }
    }
    bits
}

/// Deterministic pseudo-random bit source.
pub fn random_bits(count: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random::<bool>() as u8).collect()
}

/// An `M × N` grid of complex symbols `d[m][n]` with an active-subcarrier
/// set. Inactive subcarriers hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    symbols: usize,
    subcarriers: usize,
    active: Vec<usize>,
    data: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn zeros(symbols: usize, subcarriers: usize, active: Vec<usize>) -> Result<Self> {
        if subcarriers == 0 || symbols == 0 {
            return Err(Error::InvalidNumerology(format!(
                "grid must be non-empty, got {symbols}x{subcarriers}"
            )));
        }
        let mut sorted = active.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != active.len() {
            return Err(Error::InvalidNumerology("duplicate active subcarrier".into()));
        }
        if let Some(&bad) = active.iter().find(|&&n| n >= subcarriers) {
            return Err(Error::InvalidNumerology(format!(
                "active subcarrier {bad} outside [0, {subcarriers})"
            )));
        }
        Ok(ResourceGrid {
            symbols,
            subcarriers,
            active,
            data: vec![Complex64::new(0.0, 0.0); symbols * subcarriers],
        })
    }

    /// Fills the active subcarriers symbol by symbol, in active-set order.
    pub fn from_active_symbols(
        symbols: usize,
        subcarriers: usize,
        active: Vec<usize>,
        values: &[Complex64],
    ) -> Result<Self> {
        let mut grid = Self::zeros(symbols, subcarriers, active)?;
        let needed = symbols * grid.active.len();
        if values.len() != needed {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: needed,
            });
        }
        for m in 0..symbols {
            for (i, &n) in grid.active.clone().iter().enumerate() {
                grid.data[m * subcarriers + n] = values[m * grid.active.len() + i];
            }
        }
        Ok(grid)
    }

    /// Random grid drawn from `constellation`, returned with its source bits.
    pub fn random(
        symbols: usize,
        subcarriers: usize,
        active: Vec<usize>,
        constellation: &Constellation,
        seed: u64,
    ) -> Result<(Self, Vec<u8>)> {
        let bits = random_bits(symbols * active.len() * constellation.bits_per_symbol(), seed);
        let values = map_bits(&bits, constellation)?;
        Ok((Self::from_active_symbols(symbols, subcarriers, active, &values)?, bits))
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.data[m * self.subcarriers + n]
    }

    /// Writes an entry. Writes to inactive subcarriers are ignored.
    pub fn set(&mut self, m: usize, n: usize, value: Complex64) {
        if self.active.contains(&n) {
            self.data[m * self.subcarriers + n] = value;
        }
    }

    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.subcarriers..(m + 1) * self.subcarriers]
    }

    /// Active entries in symbol-major, active-set order.
    pub fn active_values(&self) -> Vec<Complex64> {
        (0..self.symbols)
            .flat_map(|m| self.active.iter().map(move |&n| (m, n)))
            .map(|(m, n)| self.get(m, n))
            .collect()
    }

    /// Builds a grid from full rows, zeroing whatever lies off the active set.
    pub(crate) fn from_rows(
        subcarriers: usize,
        active: &[usize],
        rows: impl IntoIterator<Item = Vec<Complex64>>,
    ) -> Self {
        let mut mask = vec![false; subcarriers];
        for &n in active {
            mask[n] = true;
        }
        let mut data = Vec::new();
        let mut symbols = 0;
        for row in rows {
            debug_assert_eq!(row.len(), subcarriers);
            data.extend(row.into_iter().zip(&mask).map(|(v, &on)| {
                if on {
                    v
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
            symbols += 1;
        }
        ResourceGrid {
            symbols,
            subcarriers,
            active: active.to_vec(),
            data,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Real-valued OQAM lattice: `2M × N` pulse amplitudes.
///
/// Row `2m` holds the in-phase part of QAM symbol `m`, row `2m + 1` the
/// quadrature part. The entry at `(row, n)` is transmitted with phase
/// `e^{j·(π/2)(row + n)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OqamGrid {
    rows: usize,
    subcarriers: usize,
    active: Vec<usize>,
    values: Vec<f64>,
}

impl OqamGrid {
    pub fn zeros(rows: usize, subcarriers: usize, active: Vec<usize>) -> Self {
        OqamGrid {
            rows,
            subcarriers,
            active,
            values: vec![0.0; rows * subcarriers],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn get(&self, row: usize, n: usize) -> f64 {
        self.values[row * self.subcarriers + n]
    }

    pub fn set(&mut self, row: usize, n: usize, v: f64) {
        self.values[row * self.subcarriers + n] = v;
    }

    /// `e^{jφ}` with `φ = (π/2)(row + n)`.
    pub fn phase(row: usize, n: usize) -> Complex64 {
        match (row + n) % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Phase angle in radians, for reference.
    pub fn phase_angle(row: usize, n: usize) -> f64 {
        FRAC_PI_2 * (row + n) as f64
    }

    pub fn linear_combination(&self, a: f64, other: &OqamGrid, b: f64) -> OqamGrid {
        let mut out = self.clone();
        out.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(x, y)| *x = a * *x + b * y);
        out
    }
}

/// Splits each QAM symbol into its real and imaginary parts on consecutive
/// half-symbol rows.
pub fn oqam_stagger(grid: &ResourceGrid) -> OqamGrid {
    let mut og = OqamGrid::zeros(2 * grid.symbols, grid.subcarriers, grid.active.clone());
    for m in 0..grid.symbols {
        for &n in &grid.active {
            let d = grid.get(m, n);
            og.set(2 * m, n, d.re);
            og.set(2 * m + 1, n, d.im);
        }
    }
    og
}

/// Exact inverse of [`oqam_stagger`].
pub fn oqam_destagger(og: &OqamGrid) -> ResourceGrid {
    let symbols = og.rows / 2;
    let rows = (0..symbols).map(|m| {
        (0..og.subcarriers)
            .map(|n| Complex64::new(og.get(2 * m, n), og.get(2 * m + 1, n)))
            .collect::<Vec<_>>()
    });
    ResourceGrid::from_rows(og.subcarriers, &og.active, rows)
}
