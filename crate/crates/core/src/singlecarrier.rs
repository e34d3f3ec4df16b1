//! DFT-spread OFDM with cyclic prefix, zero-tail or unique-word internal
//! guard.
//!
//! Each block spreads `M_data` values with an `M_data`-point forward
//! transform, maps them onto `M_data` contiguous bins centred on DC and
//! applies an `N`-point inverse transform. With the unnormalized forward and
//! `1/N` inverse convention the chain is the identity for `M_data = N`, and
//! for `N = Q·M_data` output sample `Q·i` equals input `i` divided by `Q`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dft, fde_equalize, fft, ifft, Direction, IqVec};
use crate::windowed::{Equalizer, Numerology};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadGuard {
    /// External cyclic prefix.
    Cp,
    /// Zeros at the head and tail of the pre-transform vector.
    Zt,
    /// A known word at the head and tail of the pre-transform vector.
    Uw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DftSpreadConfig {
    pub guard: SpreadGuard,
    pub m_data: usize,
    pub n: usize,
    pub l_cp: usize,
    pub head_len: usize,
    pub tail_len: usize,
    /// Head part followed by tail part; empty unless `guard` is `Uw`.
    pub uw: Vec<Complex64>,
}

/// Zadoff-Chu sequence of root `root`, scaled to unit energy.
pub fn zadoff_chu(len: usize, root: usize) -> Vec<Complex64> {
    let l = len as f64;
    let u = root as f64;
    (0..len)
        .map(|k| {
            let k = k as f64;
            let arg = if len % 2 == 1 { k * (k + 1.0) } else { k * k };
            Complex64::from_polar(1.0 / l.sqrt(), -PI * u * arg / l)
        })
        .collect()
}

impl DftSpreadConfig {
    pub fn cp(m_data: usize, n: usize, l_cp: usize) -> Result<Self> {
        let cfg = DftSpreadConfig {
            guard: SpreadGuard::Cp,
            m_data,
            n,
            l_cp,
            head_len: 0,
            tail_len: 0,
            uw: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Zero tail of `tail_len` with the default head of `tail_len / 4`.
    pub fn zt(m_data: usize, n: usize, tail_len: usize) -> Result<Self> {
        Self::zt_with_head(m_data, n, tail_len / 4, tail_len)
    }

    pub fn zt_with_head(m_data: usize, n: usize, head_len: usize, tail_len: usize) -> Result<Self> {
        let cfg = DftSpreadConfig {
            guard: SpreadGuard::Zt,
            m_data,
            n,
            l_cp: 0,
            head_len,
            tail_len,
            uw: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unique word with the default head of `tail_len / 4` and the default
    /// Zadoff-Chu word.
    pub fn uw(m_data: usize, n: usize, tail_len: usize) -> Result<Self> {
        let head = tail_len / 4;
        Self::uw_with_word(m_data, n, head, tail_len, zadoff_chu(head + tail_len, 1))
    }

    pub fn uw_with_word(
        m_data: usize,
        n: usize,
        head_len: usize,
        tail_len: usize,
        word: Vec<Complex64>,
    ) -> Result<Self> {
        let cfg = DftSpreadConfig {
            guard: SpreadGuard::Uw,
            m_data,
            n,
            l_cp: 0,
            head_len,
            tail_len,
            uw: word,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_data == 0 || self.n == 0 {
            return Err(Error::InvalidSpreadConfig("M_data and N must be positive".into()));
        }
        if self.m_data > self.n {
            return Err(Error::SpreadExceedsTransform {
                m_data: self.m_data,
                n: self.n,
            });
        }
        if self.l_cp >= self.n {
            return Err(Error::InvalidSpreadConfig(format!("l_cp {} >= N {}", self.l_cp, self.n)));
        }
        match self.guard {
            SpreadGuard::Cp => {
                if self.head_len + self.tail_len != 0 {
                    return Err(Error::InvalidSpreadConfig("CP variant has no internal guard".into()));
                }
            }
            SpreadGuard::Zt | SpreadGuard::Uw => {
                if self.l_cp != 0 {
                    return Err(Error::InvalidSpreadConfig("ZT/UW variants carry no CP".into()));
                }
                if self.head_len + self.tail_len >= self.m_data {
                    return Err(Error::GuardSwallowsData {
                        head: self.head_len,
                        tail: self.tail_len,
                        m_data: self.m_data,
                    });
                }
                if self.head_len > self.tail_len {
                    return Err(Error::InvalidSpreadConfig(format!(
                        "head {} longer than tail {}",
                        self.head_len, self.tail_len
                    )));
                }
            }
        }
        let word_len = match self.guard {
            SpreadGuard::Uw => self.head_len + self.tail_len,
            _ => 0,
        };
        if self.uw.len() != word_len {
            return Err(Error::InvalidSpreadConfig(format!(
                "unique word has {} samples, expected {word_len}",
                self.uw.len()
            )));
        }
        Ok(())
    }

    /// Data symbols carried per block.
    pub fn payload_len(&self) -> usize {
        self.m_data - self.head_len - self.tail_len
    }

    pub fn block_len(&self) -> usize {
        self.n + self.l_cp
    }

    /// Occupied bins of the `N`-point transform, in spreading order.
    pub fn bins(&self) -> Vec<usize> {
        let (m, n) = (self.m_data, self.n);
        (0..m).map(|i| if i < m / 2 { i } else { n - m + i }).collect()
    }

    /// Equivalent multicarrier numerology for `blocks` blocks, used for
    /// accounting and band edges.
    pub fn numerology(&self, blocks: usize) -> Result<Numerology> {
        let mut active = self.bins();
        active.sort_unstable();
        Numerology::new(self.n, self.l_cp, 0, blocks, active)
    }

    /// Pre-transform vector of one block: guard words around the data.
    pub fn assemble(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.m_data);
        match self.guard {
            SpreadGuard::Cp => v.extend_from_slice(data),
            SpreadGuard::Zt => {
                v.resize(self.head_len, ZERO);
                v.extend_from_slice(data);
                v.resize(self.m_data, ZERO);
            }
            SpreadGuard::Uw => {
                v.extend_from_slice(&self.uw[..self.head_len]);
                v.extend_from_slice(data);
                v.extend_from_slice(&self.uw[self.head_len..]);
            }
        }
        v
    }

    fn guard_word(&self) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.m_data];
        if self.guard == SpreadGuard::Uw {
            v[..self.head_len].copy_from_slice(&self.uw[..self.head_len]);
            v[self.m_data - self.tail_len..].copy_from_slice(&self.uw[self.head_len..]);
        }
        v
    }
}

fn blocks_of(cfg: &DftSpreadConfig, symbols: &[Complex64]) -> Result<usize> {
    cfg.validate()?;
    let p = cfg.payload_len();
    if symbols.is_empty() || symbols.len() % p != 0 {
        return Err(Error::LengthMismatch {
            left: symbols.len(),
            right: p,
        });
    }
    Ok(symbols.len() / p)
}

/// Spreads and maps one pre-transform vector, returning the `N` core samples.
fn spread_block(cfg: &DftSpreadConfig, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let spread = dft(v, Direction::Forward)?;
    let mut spec = vec![ZERO; cfg.n];
    for (&b, x) in cfg.bins().iter().zip(spread) {
        spec[b] = x;
    }
    Ok(ifft(&spec))
}

/// Shared modulator: `symbols.len()` must be a multiple of the payload
/// length; one block is emitted per payload.
pub fn mod_dft_s(symbols: &[Complex64], cfg: &DftSpreadConfig) -> Result<IqVec> {
    let blocks = blocks_of(cfg, symbols)?;
    let p = cfg.payload_len();
    let mut out = Vec::with_capacity(blocks * cfg.block_len());
    for b in 0..blocks {
        let core = spread_block(cfg, &cfg.assemble(&symbols[b * p..(b + 1) * p]))?;
        out.extend_from_slice(&core[cfg.n - cfg.l_cp..]);
        out.extend(core);
    }
    Ok(IqVec::from_raw(out))
}

fn expect(cfg: &DftSpreadConfig, guard: SpreadGuard) -> Result<()> {
    if cfg.guard != guard {
        return Err(Error::InvalidSpreadConfig(format!(
            "expected a {guard:?} configuration, got {:?}",
            cfg.guard
        )));
    }
    Ok(())
}

pub fn mod_cp_dft_s(symbols: &[Complex64], cfg: &DftSpreadConfig) -> Result<IqVec> {
    expect(cfg, SpreadGuard::Cp)?;
    mod_dft_s(symbols, cfg)
}

pub fn mod_zt_dft_s(symbols: &[Complex64], cfg: &DftSpreadConfig) -> Result<IqVec> {
    expect(cfg, SpreadGuard::Zt)?;
    mod_dft_s(symbols, cfg)
}

pub fn mod_uw_dft_s(symbols: &[Complex64], cfg: &DftSpreadConfig) -> Result<IqVec> {
    expect(cfg, SpreadGuard::Uw)?;
    mod_dft_s(symbols, cfg)
}

/// Receiver front end: per block, CP removal, `N`-point transform,
/// single-tap equalization of the occupied bins, optional removal of the
/// known guard word's contribution, and the inverse spreading transform.
/// Returns the full pre-transform vector of every block.
fn despread(
    rx: &[Complex64],
    cfg: &DftSpreadConfig,
    eq: Option<Equalizer<'_>>,
    subtract_word: bool,
) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let len = cfg.block_len();
    let blocks = rx.len() / len;
    if blocks == 0 {
        return Err(Error::TruncatedBurst {
            needed: len,
            got: rx.len(),
        });
    }
    if let Some(e) = eq {
        if e.response.len() != cfg.n {
            return Err(Error::LengthMismatch {
                left: e.response.len(),
                right: cfg.n,
            });
        }
    }
    let bins = cfg.bins();
    let word_spec = if subtract_word && cfg.guard == SpreadGuard::Uw {
        Some(dft(&cfg.guard_word(), Direction::Forward)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let start = b * len + cfg.l_cp;
        let spec = fft(&rx[start..start + cfg.n]);
        let y: Vec<Complex64> = bins.iter().map(|&k| spec[k]).collect();
        let mut x = match eq {
            Some(e) => {
                let h: Vec<Complex64> = bins.iter().map(|&k| e.response[k]).collect();
                fde_equalize(&y, &h, e.mode)?
            }
            None => y,
        };
        if let Some(w) = &word_spec {
            x.iter_mut().zip(w).for_each(|(a, b)| *a -= b);
        }
        out.push(dft(&x, Direction::Inverse)?);
    }
    Ok(out)
}

/// Recovered pre-transform vectors (guard positions included, unique word
/// not removed).
pub fn demod_dft_s_pretransform(
    rx: &[Complex64],
    cfg: &DftSpreadConfig,
    eq: Option<Equalizer<'_>>,
) -> Result<Vec<Vec<Complex64>>> {
    despread(rx, cfg, eq, false)
}

pub fn demod_cp_dft_s(rx: &[Complex64], cfg: &DftSpreadConfig, eq: Option<Equalizer<'_>>) -> Result<Vec<Complex64>> {
    expect(cfg, SpreadGuard::Cp)?;
    Ok(despread(rx, cfg, eq, false)?.concat())
}

/// ZT and UW receiver: the unique word is removed after equalization and
/// the guard positions are dropped.
pub fn demod_zt_uw(rx: &[Complex64], cfg: &DftSpreadConfig, eq: Option<Equalizer<'_>>) -> Result<Vec<Complex64>> {
    if cfg.guard == SpreadGuard::Cp {
        return Err(Error::InvalidSpreadConfig("expected a ZT or UW configuration".into()));
    }
    let tail_start = cfg.m_data - cfg.tail_len;
    Ok(despread(rx, cfg, eq, true)?
        .into_iter()
        .flat_map(|v| v[cfg.head_len..tail_start].to_vec())
        .collect())
}

/// Sample range of the zero tail within each ZT block: the last
/// `Q·tail_len` samples for `Q = N / M_data`.
pub fn tail_region(cfg: &DftSpreadConfig) -> std::ops::Range<usize> {
    let q = cfg.n as f64 / cfg.m_data as f64;
    let start = cfg.n - (q * cfg.tail_len as f64).round() as usize;
    start..cfg.n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridding::{map_bits, random_bits, Constellation};
    use crate::metrics::evm_db;
    use crate::numerics::{frequency_response, linear_convolve, EqMode};

    fn qpsk(count: usize, seed: u64) -> Vec<Complex64> {
        map_bits(&random_bits(2 * count, seed), &Constellation::qpsk()).unwrap()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn transform_pair_cancels() {
        let cfg = DftSpreadConfig::cp(64, 64, 0).unwrap();
        let d = qpsk(64, 1);
        assert!(max_err(&mod_cp_dft_s(&d, &cfg).unwrap(), &d) <= 1e-12);
    }

    #[test]
    fn interpolation_passes_through_inputs() {
        // Direct Dirichlet-kernel oracle for the centred mapping.
        let (m, q) = (16, 2);
        let n = m * q;
        let cfg = DftSpreadConfig::cp(m, n, 0).unwrap();
        let d = qpsk(m, 2);
        let s = mod_cp_dft_s(&d, &cfg).unwrap();
        let bins: Vec<i64> = (0..m as i64).map(|i| if i < m as i64 / 2 { i } else { i - m as i64 }).collect();
        for k in 0..n {
            let mut acc = ZERO;
            for (i, &di) in d.iter().enumerate() {
                let kernel: Complex64 = bins
                    .iter()
                    .map(|&b| {
                        Complex64::from_polar(1.0, 2.0 * PI * b as f64 * (k as f64 / n as f64 - i as f64 / m as f64))
                    })
                    .sum();
                acc += di * kernel / n as f64;
            }
            assert!((acc - s[k]).norm() < 1e-12);
        }
        for i in 0..m {
            assert!((s[q * i] - d[i] / q as f64).norm() < 1e-12);
        }
    }

    #[test]
    fn cp_loopback_and_multipath() {
        let cfg = DftSpreadConfig::cp(64, 256, 18).unwrap();
        let d = qpsk(3 * 64, 3);
        let s = mod_cp_dft_s(&d, &cfg).unwrap();
        assert_eq!(s.len(), 3 * 274);
        assert!(max_err(&demod_cp_dft_s(&s, &cfg, None).unwrap(), &d) <= 1e-10);

        let taps = [Complex64::new(0.9, 0.0), Complex64::new(0.3, 0.2), Complex64::new(0.0, -0.25)];
        let taps = [taps[0], ZERO, taps[1], ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, taps[2]];
        let rx = linear_convolve(&s, &taps).unwrap();
        let h = frequency_response(&taps, 256);
        let eq = Equalizer {
            response: &h,
            mode: EqMode::Zf,
        };
        assert!(max_err(&demod_cp_dft_s(&rx, &cfg, Some(eq)).unwrap(), &d) <= 1e-9);
        let mmse = |snr: f64| {
            let eq = Equalizer {
                response: &h,
                mode: EqMode::Mmse { snr_linear: snr },
            };
            max_err(&demod_cp_dft_s(&rx, &cfg, Some(eq)).unwrap(), &d)
        };
        assert!(mmse(10.0) > 1e-3);
        assert!(mmse(1e12) < 1e-6);
    }

    #[test]
    fn spread_errors() {
        assert!(matches!(DftSpreadConfig::cp(300, 256, 0), Err(Error::SpreadExceedsTransform { .. })));
        assert!(matches!(
            DftSpreadConfig::zt_with_head(16, 64, 8, 8),
            Err(Error::GuardSwallowsData { .. })
        ));
        assert!(DftSpreadConfig::zt_with_head(64, 256, 8, 4).is_err());
    }

    #[test]
    fn zero_tail_structure() {
        let cfg = DftSpreadConfig::zt(64, 256, 8).unwrap();
        assert_eq!((cfg.head_len, cfg.payload_len()), (2, 54));
        let zero = mod_zt_dft_s(&vec![ZERO; 54], &cfg).unwrap();
        assert!(zero.iter().all(|v| *v == ZERO));
        let d = qpsk(54, 4);
        let s = mod_zt_dft_s(&d, &cfg).unwrap();
        for i in 56..64 {
            assert!(s[4 * i].norm() <= 1e-12);
        }
        for i in 0..2 {
            assert!(s[4 * i].norm() <= 1e-12);
        }
        assert!(max_err(&demod_zt_uw(&s, &cfg, None).unwrap(), &d) <= 1e-9);
    }

    #[test]
    fn unique_word_structure() {
        let zt = DftSpreadConfig::zt(64, 256, 8).unwrap();
        let zero_word = DftSpreadConfig::uw_with_word(64, 256, 2, 8, vec![ZERO; 10]).unwrap();
        let d = qpsk(2 * 54, 5);
        let a = mod_zt_dft_s(&d, &zt).unwrap();
        let b = mod_uw_dft_s(&d, &zero_word).unwrap();
        assert!(max_err(&a, &b) <= 1e-12);

        let cfg = DftSpreadConfig::uw(64, 256, 8).unwrap();
        let word = zadoff_chu(10, 1);
        assert!((word.iter().map(|w| w.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        let v1 = cfg.assemble(&d[..54]);
        let v2 = cfg.assemble(&d[54..]);
        for i in (0..2).chain(56..64) {
            assert_eq!(v1[i], v2[i]);
        }
        let s = mod_uw_dft_s(&d, &cfg).unwrap();
        let pre = demod_dft_s_pretransform(&s, &cfg, None).unwrap();
        for v in &pre {
            assert!(max_err(&v[..2], &word[..2]) <= 1e-10);
            assert!(max_err(&v[56..], &word[2..]) <= 1e-10);
        }
        assert!(max_err(&demod_zt_uw(&s, &cfg, None).unwrap(), &d) <= 1e-10);
    }

    fn profile(spacing: usize, decay_db: f64) -> Vec<Complex64> {
        let mut taps = vec![ZERO; 2 * spacing + 1];
        for (i, rot) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]
            .into_iter()
            .enumerate()
        {
            taps[i * spacing] = rot * 10f64.powf(-decay_db * i as f64 / 20.0);
        }
        crate::channel::ChannelSpec::normalized_taps(&taps)
    }

    fn zt_multipath_evm(order: usize, seed: u64, taps: &[Complex64]) -> (f64, f64) {
        let c = Constellation::new(order).unwrap();
        let cfg = DftSpreadConfig::zt(64, 256, 8).unwrap();
        let bits = random_bits(40 * 54 * c.bits_per_symbol(), seed);
        let d = map_bits(&bits, &c).unwrap();
        let s = mod_zt_dft_s(&d, &cfg).unwrap();
        let rx = linear_convolve(&s, taps).unwrap();
        let h = frequency_response(taps, 256);
        let eq = Equalizer {
            response: &h,
            mode: EqMode::Zf,
        };
        let est = demod_zt_uw(&rx[..s.len()], &cfg, Some(eq)).unwrap();
        let errors = crate::gridding::demap_symbols(&est, &c)
            .chunks(c.bits_per_symbol())
            .zip(bits.chunks(c.bits_per_symbol()))
            .filter(|(a, b)| a != b)
            .count();
        (evm_db(&d, &est), errors as f64 / d.len() as f64)
    }

    #[test]
    fn zt_multipath_leakage() {
        // Exponential profile, 6 dB per tap, delay spread 24 <= Q·tail_len.
        let (evm, _) = zt_multipath_evm(4, 7, &profile(12, 6.0));
        assert!(evm <= -30.0, "{evm}");
        // Flatter profile spanning the full tail: leakage limits 64-QAM first.
        let taps = profile(16, 3.0);
        let (_, ser_qpsk) = zt_multipath_evm(4, 7, &taps);
        let (_, ser_64) = zt_multipath_evm(64, 7, &taps);
        assert!(ser_64 > ser_qpsk, "{ser_64} vs {ser_qpsk}");
    }
}
