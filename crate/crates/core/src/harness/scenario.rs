//! Scenario files: JSON schema, defaults and validation.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::filtered::GfdmPrototype;
use crate::gridding::Constellation;
use crate::numerics::EqMode;
use crate::windowed::Numerology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    CpOfdm,
    WOfdm,
    EdgeWindowedOfdm,
    FbmcOqam,
    Gfdm,
    Ufmc,
    FOfdm,
    CpDftSOfdm,
    ZtDftSOfdm,
    UwDftSOfdm,
}

impl Waveform {
    pub const ALL: [Waveform; 10] = [
        Waveform::CpOfdm,
        Waveform::WOfdm,
        Waveform::EdgeWindowedOfdm,
        Waveform::FbmcOqam,
        Waveform::Gfdm,
        Waveform::Ufmc,
        Waveform::FOfdm,
        Waveform::CpDftSOfdm,
        Waveform::ZtDftSOfdm,
        Waveform::UwDftSOfdm,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Waveform::CpOfdm => "cp-ofdm",
            Waveform::WOfdm => "w-ofdm",
            Waveform::EdgeWindowedOfdm => "edge-windowed-ofdm",
            Waveform::FbmcOqam => "fbmc-oqam",
            Waveform::Gfdm => "gfdm",
            Waveform::Ufmc => "ufmc",
            Waveform::FOfdm => "f-ofdm",
            Waveform::CpDftSOfdm => "cp-dft-s-ofdm",
            Waveform::ZtDftSOfdm => "zt-dft-s-ofdm",
            Waveform::UwDftSOfdm => "uw-dft-s-ofdm",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Waveform::ALL
            .into_iter()
            .find(|w| w.tag() == tag)
            .ok_or_else(|| Error::UnknownWaveform(tag.to_string()))
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

const UNKNOWN_WAVEFORM: &str = "unknown-waveform: ";

/// Accepts `"cp-ofdm"` or `["cp-ofdm", "w-ofdm"]`.
fn waveforms<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Waveform>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    let tags = match OneOrMany::deserialize(d)? {
        OneOrMany::One(t) => vec![t],
        OneOrMany::Many(v) => v,
    };
    tags.iter()
        .map(|t| Waveform::from_tag(t).map_err(|_| serde::de::Error::custom(format!("{UNKNOWN_WAVEFORM}{t}"))))
        .collect()
}

/// Either a count of subcarriers centred on DC or an explicit bin list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActiveSpec {
    Count(usize),
    Bins(Vec<usize>),
}

impl ActiveSpec {
    pub fn resolve(&self, n: usize) -> Vec<usize> {
        match self {
            ActiveSpec::Count(c) => Numerology::centered_active(n, *c),
            ActiveSpec::Bins(b) => b.clone(),
        }
    }
}

fn default_n() -> usize {
    256
}
fn default_m() -> usize {
    14
}
fn default_active() -> ActiveSpec {
    ActiveSpec::Count(120)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumerologySpec {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Defaults to `n / 8`.
    #[serde(default)]
    pub l_cp: Option<usize>,
    /// Defaults to `min(16, l_cp)`.
    #[serde(default)]
    pub l_ext: Option<usize>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_active")]
    pub active_subcarriers: ActiveSpec,
}

impl Default for NumerologySpec {
    fn default() -> Self {
        NumerologySpec {
            n: default_n(),
            l_cp: None,
            l_ext: None,
            m: default_m(),
            active_subcarriers: default_active(),
        }
    }
}

impl NumerologySpec {
    fn fill_defaults(&mut self) {
        let l_cp = *self.l_cp.get_or_insert(self.n / 8);
        self.l_ext.get_or_insert(16.min(l_cp));
    }

    pub fn l_cp(&self) -> usize {
        self.l_cp.unwrap_or(self.n / 8)
    }

    pub fn l_ext(&self) -> usize {
        self.l_ext.unwrap_or(16.min(self.l_cp()))
    }

    /// The full numerology, including the window extension.
    pub fn resolve(&self) -> Result<Numerology> {
        Numerology::new(self.n, self.l_cp(), self.l_ext(), self.m, self.active_subcarriers.resolve(self.n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqualizerKind {
    #[default]
    Zf,
    Mmse,
}

impl EqualizerKind {
    /// MMSE needs an SNR; noiseless runs fall back to zero forcing.
    pub fn mode(&self, snr_db: Option<f64>) -> EqMode {
        match (self, snr_db) {
            (EqualizerKind::Mmse, Some(snr)) => EqMode::Mmse {
                snr_linear: 10f64.powf(snr / 10.0),
            },
            _ => EqMode::Zf,
        }
    }
}

/// Waveform-specific shaping parameters; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSpec {
    /// FBMC overlap factor K.
    pub overlap: usize,
    pub gfdm_prototype: GfdmPrototype,
    /// GFDM subsymbols per block; `numerology.m` counts blocks.
    pub gfdm_subsymbols: usize,
    pub ufmc_subband_width: usize,
    pub ufmc_filter_len: usize,
    pub ufmc_sidelobe_db: f64,
    /// Defaults to `n / 2 + 1`.
    pub fofdm_filter_len: Option<usize>,
    /// Edge-windowed OFDM: outermost subcarriers per side given the long
    /// window.
    pub edge_per_side: usize,
    /// Defaults to `l_cp / 2`.
    pub l_ext_edge: Option<usize>,
    /// Defaults to `l_ext_edge / 4`.
    pub l_ext_inner: Option<usize>,
    /// W-OFDM receiver windowing.
    pub rx_window: bool,
    pub m_data: usize,
    pub tail_len: usize,
    /// Defaults to `tail_len / 4`.
    pub head_len: Option<usize>,
    pub guard_subcarriers: usize,
    /// OOBE guard offset; defaults to 10% of the occupied bandwidth.
    pub oobe_guard: Option<f64>,
    pub equalizer: EqualizerKind,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            overlap: 4,
            gfdm_prototype: GfdmPrototype::default(),
            gfdm_subsymbols: 5,
            ufmc_subband_width: 12,
            ufmc_filter_len: 16,
            ufmc_sidelobe_db: 40.0,
            fofdm_filter_len: None,
            edge_per_side: 12,
            l_ext_edge: None,
            l_ext_inner: None,
            rx_window: true,
            m_data: 64,
            tail_len: 8,
            head_len: None,
            guard_subcarriers: 0,
            oobe_guard: None,
            equalizer: EqualizerKind::Zf,
        }
    }
}

impl FilterSpec {
    fn fill_defaults(&mut self, num: &NumerologySpec) {
        self.fofdm_filter_len.get_or_insert(num.n / 2 + 1);
        let edge = *self.l_ext_edge.get_or_insert(num.l_cp() / 2);
        self.l_ext_inner.get_or_insert(edge / 4);
        let tail = self.tail_len;
        self.head_len.get_or_insert(tail / 4);
    }
}

fn default_order() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSpec {
    #[serde(default = "default_order")]
    pub order: usize,
}

impl Default for ModulationSpec {
    fn default() -> Self {
        ModulationSpec { order: default_order() }
    }
}

fn default_taps_re() -> Vec<f64> {
    vec![1.0]
}
fn default_taps_im() -> Vec<f64> {
    vec![0.0]
}
fn default_snr() -> Vec<Option<f64>> {
    vec![None]
}

/// SNR points in dB; `null` is a noiseless point (written as `inf`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    #[serde(default = "default_taps_re")]
    pub taps_re: Vec<f64>,
    #[serde(default = "default_taps_im")]
    pub taps_im: Vec<f64>,
    #[serde(default)]
    pub cfo_norm: f64,
    #[serde(default)]
    pub timing_offset: i64,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<Option<f64>>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            taps_re: default_taps_re(),
            taps_im: default_taps_im(),
            cfo_norm: 0.0,
            timing_offset: 0,
            snr_db: default_snr(),
        }
    }
}

impl ChannelConfig {
    /// Taps rescaled to unit energy.
    pub fn taps(&self) -> Result<Vec<Complex64>> {
        if self.taps_re.len() != self.taps_im.len() {
            return Err(Error::config(
                "channel.taps_im",
                format!("length {} differs from taps_re length {}", self.taps_im.len(), self.taps_re.len()),
            ));
        }
        let taps: Vec<Complex64> = self
            .taps_re
            .iter()
            .zip(&self.taps_im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        let e: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        if taps.is_empty() || !(e > 0.0 && e.is_finite()) {
            return Err(Error::config("channel.taps_re", "taps must be non-empty with finite, non-zero energy"));
        }
        Ok(ChannelSpec::normalized_taps(&taps))
    }

    /// Noise-free channel (multipath, CFO, timing).
    pub fn spec(&self) -> Result<ChannelSpec> {
        let spec = ChannelSpec {
            taps: self.taps()?,
            cfo_norm: self.cfo_norm,
            timing_offset: self.timing_offset,
            snr_db: None,
        };
        spec.validate()
            .map_err(|e| Error::config("channel", e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ber,
    Evm,
    Papr,
    Psd,
    Oobe,
    Efficiency,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Ber,
        Metric::Evm,
        Metric::Papr,
        Metric::Psd,
        Metric::Oobe,
        Metric::Efficiency,
    ];
}

fn default_trials() -> usize {
    1
}
fn default_metrics() -> Vec<Metric> {
    Metric::ALL.to_vec()
}

fn serialize_waveforms<S: Serializer>(w: &[Waveform], s: S) -> std::result::Result<S::Ok, S::Error> {
    w.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    /// One waveform tag or a list; listed waveforms share one payload.
    #[serde(deserialize_with = "waveforms", serialize_with = "serialize_waveforms")]
    pub waveform: Vec<Waveform>,
    #[serde(default)]
    pub numerology: NumerologySpec,
    #[serde(default)]
    pub filter: FilterSpec,
    #[serde(default)]
    pub modulation: ModulationSpec,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
}

impl Scenario {
    /// A scenario with every optional field at its default.
    pub fn new(id: impl Into<String>, waveform: Vec<Waveform>) -> Self {
        let mut s = Scenario {
            id: id.into(),
            waveform,
            numerology: NumerologySpec::default(),
            filter: FilterSpec::default(),
            modulation: ModulationSpec::default(),
            channel: ChannelConfig::default(),
            trials: default_trials(),
            seed: 0,
            metrics: default_metrics(),
        };
        s.fill_defaults();
        s
    }

    /// Replaces every `None` default with its resolved value.
    pub fn fill_defaults(&mut self) {
        self.numerology.fill_defaults();
        self.filter.fill_defaults(&self.numerology);
    }

    pub fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.modulation.order).map_err(|e| Error::config("modulation.order", e.to_string()))
    }

    /// Structural checks plus construction of every requested modem's
    /// configuration.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::config("id", "must be non-empty"));
        }
        if self.waveform.is_empty() {
            return Err(Error::config("waveform", "at least one waveform is required"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.metrics.is_empty() {
            return Err(Error::config("metrics", "select at least one metric"));
        }
        if self.wants(Metric::Ber) && self.channel.snr_db.is_empty() {
            return Err(Error::config(
                "channel.snr_db",
                "must be non-empty when ber is requested (use null for a noiseless point)",
            ));
        }
        if let Some(Some(bad)) = self.channel.snr_db.iter().find(|s| s.is_some_and(|v| !v.is_finite())) {
            return Err(Error::config("channel.snr_db", format!("{bad} is not finite")));
        }
        self.constellation()?;
        self.channel.spec()?;
        self.numerology.resolve()?;
        if let Some(g) = self.filter.oobe_guard {
            if !(0.0..0.5).contains(&g) {
                return Err(Error::config("filter.oobe_guard", format!("{g} outside [0, 0.5)")));
            }
        }
        for &w in &self.waveform {
            super::run::build_config_only(self, w)?;
        }
        Ok(())
    }
}

/// Maps a path-annotated JSON error onto the crate error, naming the field.
fn json_error(err: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = err.path().to_string();
    let inner = err.into_inner();
    let msg = inner.to_string();
    if let Some(pos) = msg.find(UNKNOWN_WAVEFORM) {
        let tag = msg[pos + UNKNOWN_WAVEFORM.len()..]
            .split(" at line")
            .next()
            .unwrap_or_default();
        return Error::UnknownWaveform(tag.to_string());
    }
    // The path already ends in an unknown key; a missing key is named only in
    // the message.
    let field = match msg.strip_prefix("missing field `") {
        Some(rest) => {
            let name = rest.split('`').next().unwrap_or_default();
            if path == "." {
                name.to_string()
            } else {
                format!("{path}.{name}")
            }
        }
        None => path,
    };
    Error::config(field, msg)
}

/// Parses and validates a scenario from JSON text, filling defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut s: Scenario = serde_path_to_error::deserialize(de).map_err(json_error)?;
    s.fill_defaults();
    s.validate()?;
    Ok(s)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}
