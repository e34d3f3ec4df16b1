//! Monte-Carlo execution of a scenario.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use super::scenario::{Metric, Scenario, Waveform};
use crate::channel::{derive_seed, ChannelSpec};
use crate::error::{Error, Result};
use crate::filtered::{
    demod_f_ofdm, demod_ufmc, design_phydyas, fbmc_analysis, mod_f_ofdm, mod_fbmc_oqam, mod_gfdm_transform, mod_ufmc,
    FofdmBand, FofdmLayout, GfdmConfig, GfdmReceiver, PrototypeFilter, SubbandLayout,
};
use crate::gridding::{demap_symbols, map_bits, oqam_destagger, oqam_stagger, random_bits, Constellation, OqamGrid, ResourceGrid};
use crate::metrics::{
    ber_count, ccdf_from_paprs, default_ccdf_thresholds, default_guard, oobe_ratio, papr_db, psd_welch,
    spectral_efficiency, BerCount, BerPoint, EvmAccumulator, MetricReport, Psd, WelchConfig,
};
use crate::numerics::{fde_equalize, frequency_response, EqMode, IqVec};
use crate::singlecarrier::{
    demod_cp_dft_s, demod_zt_uw, mod_dft_s, zadoff_chu, DftSpreadConfig, SpreadGuard,
};
use crate::windowed::{
    demod_cp_ofdm, demod_edge_windowed_ofdm, demod_w_ofdm, mod_cp_ofdm, mod_edge_windowed_ofdm, mod_w_ofdm,
    EdgeWindowPlan, Equalizer, Numerology,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for trial-level parallelism; `None` uses the global
    /// rayon pool. Results do not depend on this.
    pub threads: Option<usize>,
}

/// A waveform transceiver as seen by the harness: data symbols in, samples
/// out, and back.
trait Modem: Send + Sync {
    /// Data symbols carried by one burst.
    fn capacity(&self) -> usize;
    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec>;
    /// Symbol estimates in modulation order, equalized against `taps`.
    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>>;
    /// Transform size defining the subcarrier spacing.
    fn n(&self) -> usize;
    /// Samples per symbol period, used to cut PAPR segments.
    fn symbol_period(&self) -> usize;
    fn band(&self) -> (f64, f64);
    /// Numerology for efficiency accounting (no CP or extension; the actual
    /// burst overhead is charged separately) and the data subcarriers lost to
    /// guards.
    fn accounting(&self) -> Result<(Numerology, usize)>;
}

fn eq<'a>(response: &'a [Complex64], mode: EqMode) -> Option<Equalizer<'a>> {
    Some(Equalizer { response, mode })
}

enum OfdmKind {
    Cp,
    W { rx_window: bool },
    Edge(EdgeWindowPlan),
}

struct Ofdm {
    num: Numerology,
    kind: OfdmKind,
}

impl Modem for Ofdm {
    fn capacity(&self) -> usize {
        self.num.m * self.num.active.len()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        let num = &self.num;
        let grid = ResourceGrid::from_active_symbols(num.m, num.n, num.active.clone(), symbols)?;
        match &self.kind {
            OfdmKind::Cp => mod_cp_ofdm(&grid, num),
            OfdmKind::W { .. } => mod_w_ofdm(&grid, num),
            OfdmKind::Edge(plan) => mod_edge_windowed_ofdm(&grid, num, plan),
        }
    }

    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let h = frequency_response(taps, self.num.n);
        let grid = match &self.kind {
            OfdmKind::Cp => demod_cp_ofdm(rx, &self.num, eq(&h, mode))?,
            OfdmKind::W { rx_window } => demod_w_ofdm(rx, &self.num, *rx_window, eq(&h, mode))?,
            OfdmKind::Edge(_) => demod_edge_windowed_ofdm(rx, &self.num, eq(&h, mode))?,
        };
        Ok(grid.active_values())
    }

    fn n(&self) -> usize {
        self.num.n
    }

    fn symbol_period(&self) -> usize {
        self.num.n + self.num.l_cp + self.num.l_ext
    }

    fn band(&self) -> (f64, f64) {
        self.num.occupied_band()
    }

    fn accounting(&self) -> Result<(Numerology, usize)> {
        Ok((bare(&self.num)?, 0))
    }
}

/// Same subcarriers and symbol count, no CP or extension.
fn bare(num: &Numerology) -> Result<Numerology> {
    Numerology::new(num.n, 0, 0, num.m, num.active.clone())
}

struct Fbmc {
    num: Numerology,
    proto: PrototypeFilter,
}

impl Modem for Fbmc {
    fn capacity(&self) -> usize {
        self.num.m * self.num.active.len()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        let num = &self.num;
        let grid = ResourceGrid::from_active_symbols(num.m, num.n, num.active.clone(), symbols)?;
        mod_fbmc_oqam(&oqam_stagger(&grid), num, &self.proto)
    }

    /// Single-tap equalization acts on the complex analysis output, before
    /// the real part is taken.
    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let num = &self.num;
        let h = frequency_response(taps, num.n);
        let hk: Vec<Complex64> = num.active.iter().map(|&k| h[k]).collect();
        let rows = fbmc_analysis(rx, num, &self.proto)?;
        let mut og = OqamGrid::zeros(2 * num.m, num.n, num.active.clone());
        for (r, row) in rows.iter().enumerate() {
            let y: Vec<Complex64> = num.active.iter().map(|&k| row[k]).collect();
            let d = fde_equalize(&y, &hk, mode)?;
            for (&k, v) in num.active.iter().zip(d) {
                og.set(r, k, v.re);
            }
        }
        Ok(oqam_destagger(&og).active_values())
    }

    fn n(&self) -> usize {
        self.num.n
    }

    fn symbol_period(&self) -> usize {
        self.num.n
    }

    fn band(&self) -> (f64, f64) {
        self.num.occupied_band()
    }

    fn accounting(&self) -> Result<(Numerology, usize)> {
        Ok((self.num.clone(), 0))
    }
}

struct Gfdm {
    cfg: GfdmConfig,
    blocks: usize,
    /// Built on first use; the explicit inverse is the costly part.
    receiver: OnceLock<std::result::Result<GfdmReceiver, String>>,
}

impl Gfdm {
    fn per_block(&self) -> usize {
        self.cfg.m * self.cfg.active.len()
    }

    fn receiver(&self) -> Result<&GfdmReceiver> {
        let built = self.receiver.get_or_init(|| GfdmReceiver::new(&self.cfg).map_err(|e| e.to_string()));
        match built {
            Ok(r) => Ok(r),
            // Rebuild to recover the typed error; this path is cold.
            Err(_) => Err(GfdmReceiver::new(&self.cfg).err().expect("receiver construction failed before")),
        }
    }
}

impl Modem for Gfdm {
    fn capacity(&self) -> usize {
        self.blocks * self.per_block()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        let cfg = &self.cfg;
        let mut out = Vec::with_capacity(self.blocks * cfg.burst_len());
        for chunk in symbols.chunks(self.per_block()) {
            let grid = ResourceGrid::from_active_symbols(cfg.m, cfg.n, cfg.active.clone(), chunk)?;
            out.extend(mod_gfdm_transform(&grid, cfg)?.into_inner());
        }
        IqVec::new(out)
    }

    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let rcv = self.receiver()?;
        let cfg = &self.cfg;
        let h = frequency_response(taps, cfg.block_len());
        let mut out = Vec::with_capacity(self.capacity());
        for b in 0..self.blocks {
            let start = b * cfg.burst_len();
            let block = rx.get(start..).ok_or(Error::TruncatedBurst {
                needed: start + cfg.burst_len(),
                got: rx.len(),
            })?;
            out.extend(rcv.demodulate(block, Some((&h, mode)))?.active_values());
        }
        Ok(out)
    }

    fn n(&self) -> usize {
        self.cfg.n
    }

    fn symbol_period(&self) -> usize {
        self.cfg.burst_len()
    }

    fn band(&self) -> (f64, f64) {
        let num = Numerology::new(self.cfg.n, 0, 0, 1, self.cfg.active.clone()).expect("validated at build");
        num.occupied_band()
    }

    fn accounting(&self) -> Result<(Numerology, usize)> {
        let cfg = &self.cfg;
        Ok((Numerology::new(cfg.n, 0, 0, cfg.m * self.blocks, cfg.active.clone())?, 0))
    }
}

struct Ufmc {
    num: Numerology,
    layout: SubbandLayout,
}

impl Modem for Ufmc {
    fn capacity(&self) -> usize {
        self.num.m * self.num.active.len()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        let num = &self.num;
        let grid = ResourceGrid::from_active_symbols(num.m, num.n, num.active.clone(), symbols)?;
        mod_ufmc(&grid, num, &self.layout)
    }

    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let h = frequency_response(taps, self.num.n);
        Ok(demod_ufmc(rx, &self.num, &self.layout, eq(&h, mode))?.active_values())
    }

    fn n(&self) -> usize {
        self.num.n
    }

    fn symbol_period(&self) -> usize {
        self.num.n + self.layout.max_filter_len() - 1
    }

    fn band(&self) -> (f64, f64) {
        self.num.occupied_band()
    }

    fn accounting(&self) -> Result<(Numerology, usize)> {
        Ok((self.num.clone(), 0))
    }
}

struct Fofdm {
    layout: FofdmLayout,
}

impl Fofdm {
    fn num(&self) -> &Numerology {
        &self.layout.bands[0].num
    }
}

impl Modem for Fofdm {
    fn capacity(&self) -> usize {
        self.num().m * self.num().active.len()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        let num = self.num();
        let grid = ResourceGrid::from_active_symbols(num.m, num.n, num.active.clone(), symbols)?;
        mod_f_ofdm(std::slice::from_ref(&grid), &self.layout)
    }

    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let grids = demod_f_ofdm(rx, &self.layout, Some((taps, mode)))?;
        Ok(grids[0].active_values())
    }

    fn n(&self) -> usize {
        self.num().n
    }

    fn symbol_period(&self) -> usize {
        self.num().cp_symbol_len()
    }

    fn band(&self) -> (f64, f64) {
        self.num().occupied_band()
    }

    fn accounting(&self) -> Result<(Numerology, usize)> {
        Ok((bare(self.num())?, 0))
    }
}

struct Spread {
    cfg: DftSpreadConfig,
    blocks: usize,
}

impl Modem for Spread {
    fn capacity(&self) -> usize {
        self.blocks * self.cfg.payload_len()
    }

    fn modulate(&self, symbols: &[Complex64]) -> Result<IqVec> {
        mod_dft_s(symbols, &self.cfg)
    }

    fn demodulate(&self, rx: &[Complex64], taps: &[Complex64], mode: EqMode) -> Result<Vec<Complex64>> {
        let h = frequency_response(taps, self.cfg.n);
        let cfg = &self.cfg;
        let usable = rx.len().min(self.blocks * cfg.block_len());
        match cfg.guard {
            SpreadGuard::Cp => demod_cp_dft_s(&rx[..usable], cfg, eq(&h, mode)),
            SpreadGuard::Zt | SpreadGuard::Uw => demod_zt_uw(&rx[..usable], cfg, eq(&h, mode)),
        }
    }

    fn n(&self) -> usize {
        self.cfg.n
    }

    fn symbol_period(&self) -> usize {
        self.cfg.block_len()
    }

    fn band(&self) -> (f64, f64) {
        self.cfg.numerology(1).expect("validated at build").occupied_band()
    }

    /// Guard words inside the spreading block count as lost data positions.
    fn accounting(&self) -> Result<(Numerology, usize)> {
        let mut num = self.cfg.numerology(self.blocks)?;
        num.l_cp = 0;
        Ok((num, self.cfg.head_len + self.cfg.tail_len))
    }
}

/// Builds the modem for `w` from the scenario parameters.
fn build(s: &Scenario, w: Waveform) -> Result<Box<dyn Modem>> {
    let ns = &s.numerology;
    let f = &s.filter;
    let full = ns.resolve()?;
    let n = full.n;
    let active = full.active.clone();
    let with = |l_cp: usize, l_ext: usize, m: usize| Numerology::new(n, l_cp, l_ext, m, active.clone());
    let modem: Box<dyn Modem> = match w {
        Waveform::CpOfdm => Box::new(Ofdm {
            num: with(full.l_cp, 0, full.m)?,
            kind: OfdmKind::Cp,
        }),
        Waveform::WOfdm => Box::new(Ofdm {
            num: full.clone(),
            kind: OfdmKind::W { rx_window: f.rx_window },
        }),
        Waveform::EdgeWindowedOfdm => {
            let num = with(full.l_cp, 0, full.m)?;
            let edge = f.l_ext_edge.unwrap_or(num.l_cp / 2);
            let inner = f.l_ext_inner.unwrap_or(edge / 4);
            let plan = EdgeWindowPlan::outer(&num, f.edge_per_side, edge, inner);
            plan.validate(&num)?;
            Box::new(Ofdm {
                num,
                kind: OfdmKind::Edge(plan),
            })
        }
        Waveform::FbmcOqam => {
            let num = with(0, 0, full.m)?;
            if n % 2 != 0 {
                return Err(Error::config("numerology.n", "FBMC-OQAM needs an even transform size"));
            }
            let proto = design_phydyas(n, f.overlap)?;
            Box::new(Fbmc { num, proto })
        }
        Waveform::Gfdm => {
            let cfg = GfdmConfig::new(n, f.gfdm_subsymbols, full.l_cp, active.clone(), f.gfdm_prototype)?;
            Box::new(Gfdm {
                cfg,
                blocks: full.m,
                receiver: OnceLock::new(),
            })
        }
        Waveform::Ufmc => {
            let num = with(0, 0, full.m)?;
            let layout = SubbandLayout::chebyshev(&num, f.ufmc_subband_width, f.ufmc_filter_len, f.ufmc_sidelobe_db)?;
            layout.validate(&num)?;
            if layout.max_filter_len() > n {
                return Err(Error::FilterTooLong {
                    len: layout.max_filter_len(),
                    n,
                });
            }
            Box::new(Ufmc { num, layout })
        }
        Waveform::FOfdm => {
            let num = with(full.l_cp, 0, full.m)?;
            let len = f.fofdm_filter_len.unwrap_or(n / 2 + 1);
            let layout = FofdmLayout {
                bands: vec![FofdmBand::with_filter_len(num, len)?],
            };
            layout.validate()?;
            Box::new(Fofdm { layout })
        }
        Waveform::CpDftSOfdm | Waveform::ZtDftSOfdm | Waveform::UwDftSOfdm => {
            let head = f.head_len.unwrap_or(f.tail_len / 4);
            let cfg = match w {
                Waveform::CpDftSOfdm => DftSpreadConfig::cp(f.m_data, n, full.l_cp)?,
                Waveform::ZtDftSOfdm => DftSpreadConfig::zt_with_head(f.m_data, n, head, f.tail_len)?,
                _ => DftSpreadConfig::uw_with_word(f.m_data, n, head, f.tail_len, zadoff_chu(head + f.tail_len, 1))?,
            };
            Box::new(Spread { cfg, blocks: full.m })
        }
    };
    let (acct, lost) = modem.accounting()?;
    if f.guard_subcarriers + lost >= acct.active.len() {
        return Err(Error::config(
            "filter.guard_subcarriers",
            format!("{} guard positions leave no data subcarriers", f.guard_subcarriers + lost),
        ));
    }
    Ok(modem)
}

/// Validation hook: constructs the modem configuration without running it.
pub(crate) fn build_config_only(s: &Scenario, w: Waveform) -> Result<()> {
    build(s, w).map(|_| ())
}

/// What one trial of one waveform produced.
struct TrialOutcome {
    paprs: Vec<f64>,
    psd: Option<Psd>,
    evm: Option<EvmAccumulator>,
    ber: Vec<BerCount>,
    burst_len: usize,
}

struct Plan<'a> {
    s: &'a Scenario,
    modem: &'a dyn Modem,
    constellation: &'a Constellation,
    channel: &'a ChannelSpec,
}

impl Plan<'_> {
    fn needs_psd(&self) -> bool {
        self.s.wants(Metric::Psd) || self.s.wants(Metric::Oobe)
    }

    fn mode(&self, snr_db: Option<f64>) -> EqMode {
        self.s.filter.equalizer.mode(snr_db)
    }

    fn trial(&self, trial: usize) -> Result<TrialOutcome> {
        let s = self.s;
        let modem = self.modem;
        let bps = self.constellation.bits_per_symbol();
        // One stream per trial shared by every waveform: each takes the prefix
        // it can carry.
        let bits = random_bits(modem.capacity() * bps, derive_seed(s.seed, &[trial as u64]));
        let symbols = map_bits(&bits, self.constellation)?;
        let tx = modem.modulate(&symbols)?;

        let paprs = if s.wants(Metric::Papr) {
            let period = modem.symbol_period().max(1);
            let mut v: Vec<f64> = tx.as_slice().chunks_exact(period).map(papr_db).collect();
            if v.is_empty() {
                v.push(papr_db(tx.as_slice()));
            }
            v
        } else {
            Vec::new()
        };

        let psd = if self.needs_psd() {
            Some(psd_welch(tx.as_slice(), &welch_for(tx.len()))?)
        } else {
            None
        };

        let taps = &self.channel.taps;
        let n = modem.n();
        let evm = if s.wants(Metric::Evm) {
            let rx = self.channel.apply(tx.as_slice(), n, 0)?;
            let est = modem.demodulate(rx.as_slice(), taps, EqMode::Zf)?;
            Some(EvmAccumulator::from_symbols(&symbols, &est))
        } else {
            None
        };

        let mut ber = Vec::new();
        if s.wants(Metric::Ber) {
            for (i, &snr) in s.channel.snr_db.iter().enumerate() {
                let spec = ChannelSpec {
                    snr_db: snr,
                    ..self.channel.clone()
                };
                let noise_seed = derive_seed(s.seed, &[trial as u64, i as u64, 0x4e]);
                let rx = spec.apply(tx.as_slice(), n, noise_seed)?;
                let est = modem.demodulate(rx.as_slice(), taps, self.mode(snr))?;
                let rx_bits = demap_symbols(&est, self.constellation);
                ber.push(ber_count(&bits, &rx_bits)?);
            }
        }
        Ok(TrialOutcome {
            paprs,
            psd,
            evm,
            ber,
            burst_len: tx.len(),
        })
    }
}

/// Welch defaults, shortened to the largest power of two that fits a burst
/// shorter than the default segment.
fn welch_for(len: usize) -> WelchConfig {
    let mut cfg = WelchConfig::default();
    if len < cfg.segment_len && len > 0 {
        cfg.segment_len = 1 << (usize::BITS - 1 - len.leading_zeros());
    }
    cfg
}

fn trial_error(e: Error, snr_db: Option<f64>, trial: usize) -> Error {
    if e.is_config_error() {
        return e;
    }
    Error::Trial {
        snr_db: snr_db.unwrap_or(f64::INFINITY),
        trial,
        source: Box::new(e),
    }
}

fn run_waveform(s: &Scenario, w: Waveform, opts: RunOptions) -> Result<MetricReport> {
    let constellation = s.constellation()?;
    let channel = s.channel.spec()?;
    let modem = build(s, w)?;
    let plan = Plan {
        s,
        modem: modem.as_ref(),
        constellation: &constellation,
        channel: &channel,
    };
    let run = || -> Vec<Result<TrialOutcome>> {
        (0..s.trials)
            .into_par_iter()
            .map(|t| plan.trial(t).map_err(|e| trial_error(e, first_snr(s), t)))
            .collect()
    };
    let outcomes = match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::config("threads", e.to_string()))?
            .install(run),
        None => run(),
    };
    // Aggregation runs in trial order on this thread.
    let outcomes: Vec<TrialOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let paprs: Vec<f64> = outcomes.iter().flat_map(|o| o.paprs.iter().copied()).collect();
    let papr_ccdf = if s.wants(Metric::Papr) {
        ccdf_from_paprs(&paprs, &default_ccdf_thresholds())
    } else {
        Vec::new()
    };

    let psds: Vec<Psd> = outcomes.iter().filter_map(|o| o.psd.clone()).collect();
    let avg = Psd::average(&psds);
    let psd = match (&avg, s.wants(Metric::Psd)) {
        (Some(p), true) => p.freqs.iter().copied().zip(p.power_db()).collect(),
        _ => Vec::new(),
    };
    let oobe_ratio_db = match (&avg, s.wants(Metric::Oobe)) {
        (Some(p), true) => {
            let band = modem.band();
            let guard = s.filter.oobe_guard.unwrap_or_else(|| default_guard(band));
            Some(oobe_ratio(p, band, guard)?)
        }
        _ => None,
    };

    let evm_db = if s.wants(Metric::Evm) {
        let acc = outcomes
            .iter()
            .filter_map(|o| o.evm)
            .fold(EvmAccumulator::default(), EvmAccumulator::merge);
        Some(acc.db())
    } else {
        None
    };

    let ber = if s.wants(Metric::Ber) {
        s.channel
            .snr_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| BerPoint {
                snr_db: snr,
                trials: s.trials,
                count: outcomes
                    .iter()
                    .map(|o| o.ber[i])
                    .fold(BerCount::default(), BerCount::merge),
            })
            .collect()
    } else {
        Vec::new()
    };

    let (acct, lost) = modem.accounting()?;
    let burst = outcomes[0].burst_len;
    let overhead = burst.saturating_sub(acct.m * acct.n);
    let spectral_efficiency = spectral_efficiency(&acct, &constellation, s.filter.guard_subcarriers + lost, overhead)?;

    Ok(MetricReport {
        scenario_id: s.id.clone(),
        waveform: w.tag().to_string(),
        papr_ccdf,
        psd,
        oobe_ratio_db,
        ber,
        evm_db,
        spectral_efficiency,
    })
}

fn first_snr(s: &Scenario) -> Option<f64> {
    s.channel.snr_db.first().copied().flatten()
}

/// Runs every waveform of the scenario; one report per waveform, in scenario
/// order.
pub fn run_scenario(s: &Scenario, opts: RunOptions) -> Result<Vec<MetricReport>> {
    s.validate()?;
    s.waveform.iter().map(|&w| run_waveform(s, w, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::parse_scenario;

    fn scenario(waveform: &str, extra: &str) -> Scenario {
        parse_scenario(&format!(
            r#"{{"id": "t", "waveform": {waveform}, "numerology": {{"n": 64, "m": 6, "active_subcarriers": 36}},
                "filter": {{"m_data": 16, "fofdm_filter_len": 9}}{extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn noiseless_loopback_every_waveform() {
        let all: Vec<String> = Waveform::ALL.iter().map(|w| format!("\"{w}\"")).collect();
        let s = scenario(&format!("[{}]", all.join(",")), "");
        let reports = run_scenario(&s, RunOptions::default()).unwrap();
        assert_eq!(reports.len(), 10);
        for r in &reports {
            assert_eq!(r.ber.len(), 1);
            assert_eq!(r.ber[0].count.errors, 0, "{}", r.waveform);
            assert!(r.ber[0].count.total > 0);
            assert!(r.spectral_efficiency > 0.0);
            assert_eq!(r.papr_ccdf.len(), 49);
        }
    }

    #[test]
    fn threads_do_not_change_results() {
        let s = scenario(
            r#"["cp-ofdm", "fbmc-oqam"]"#,
            r#", "trials": 5, "channel": {"snr_db": [0, 6], "taps_re": [1, 0.3], "taps_im": [0, 0.2]}"#,
        );
        let one = run_scenario(&s, RunOptions { threads: Some(1) }).unwrap();
        let four = run_scenario(&s, RunOptions { threads: Some(4) }).unwrap();
        assert_eq!(one, four);
        assert!(one[0].ber[0].count.errors > 0);
    }

    #[test]
    fn w_ofdm_confines_better_than_cp_ofdm() {
        let s = parse_scenario(r#"{"id": "ab", "waveform": ["cp-ofdm", "w-ofdm"], "trials": 2, "metrics": ["oobe"]}"#)
            .unwrap();
        let r = run_scenario(&s, RunOptions::default()).unwrap();
        assert!(r[1].oobe_ratio_db.unwrap() < r[0].oobe_ratio_db.unwrap());
    }
}
