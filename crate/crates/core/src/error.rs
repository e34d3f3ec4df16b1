use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the waveform, channel and measurement routines.
///
/// The `Display` text of each variant starts with a stable kebab-case tag so
/// that callers (and the CLI) can match on it without parsing prose.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty-signal")]
    EmptySignal,
    #[error("non-finite-sample at index {0}")]
    NonFiniteSample(usize),
    #[error("period-too-short: period {period} < operand length {len}")]
    PeriodTooShort { period: usize, len: usize },
    #[error("length-mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("singular-bin at bin {bin}")]
    SingularBin { bin: usize },
    #[error("invalid-snr: {0}")]
    InvalidSnr(f64),

    #[error("ragged-bits: {len} bits is not a multiple of {bits_per_symbol}")]
    RaggedBits { len: usize, bits_per_symbol: usize },
    #[error("unsupported-order: {0}")]
    UnsupportedOrder(usize),

    #[error("invalid-numerology: {0}")]
    InvalidNumerology(String),
    #[error("grid-numerology-mismatch: {0}")]
    GridNumerologyMismatch(String),
    #[error("truncated-burst: need {needed} samples, got {got}")]
    TruncatedBurst { needed: usize, got: usize },
    #[error("window-exceeds-cp: l_ext {l_ext} > l_cp {l_cp}")]
    WindowExceedsCp { l_ext: usize, l_cp: usize },
    #[error("bad-edge-plan: {0}")]
    BadEdgePlan(String),

    #[error("unsupported-overlap: {0}")]
    UnsupportedOverlap(usize),
    #[error("proto-grid-mismatch: {0}")]
    ProtoGridMismatch(String),
    #[error("grid-config-mismatch: {0}")]
    GridConfigMismatch(String),
    #[error("nonorthogonal-prototype-singular: condition estimate {0:.3e}")]
    SingularPrototype(f64),
    #[error("layout-overlap: bin {0} assigned to more than one subband")]
    LayoutOverlap(usize),
    #[error("layout-mismatch: {0}")]
    LayoutMismatch(String),
    #[error("filter-too-long-for-2N-receiver: filter length {len} with N = {n}")]
    FilterTooLong { len: usize, n: usize },

    #[error("spread-exceeds-transform: M_data {m_data} > N {n}")]
    SpreadExceedsTransform { m_data: usize, n: usize },
    #[error("guard-swallows-data: head {head} + tail {tail} >= M_data {m_data}")]
    GuardSwallowsData { head: usize, tail: usize, m_data: usize },
    #[error("invalid-spread-config: {0}")]
    InvalidSpreadConfig(String),

    #[error("invalid-channel: {0}")]
    InvalidChannel(String),
    #[error("offset-exceeds-signal: |{offset}| >= {len}")]
    OffsetExceedsSignal { offset: i64, len: usize },
    #[error("zero-signal-snr-undefined")]
    ZeroSignalSnr,

    #[error("no-segments")]
    NoSegments,
    #[error("signal-too-short: {len} samples < segment length {segment_len}")]
    SignalTooShort { len: usize, segment_len: usize },
    #[error("invalid-psd-config: {0}")]
    InvalidPsdConfig(String),
    #[error("invalid-band: {0}")]
    InvalidBand(String),
    #[error("no-oob-bins")]
    NoOobBins,
    #[error("no-data-subcarriers")]
    NoDataSubcarriers,

    #[error("unknown-waveform: {0}")]
    UnknownWaveform(String),
    #[error("invalid field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("at snr {snr_db} dB, trial {trial}: {source}")]
    Trial {
        snr_db: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("no-reports")]
    NoReports,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True when the error stems from scenario/configuration validation
    /// rather than from a numeric failure during a run.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config { .. }
            | Error::UnknownWaveform(_)
            | Error::InvalidNumerology(_)
            | Error::WindowExceedsCp { .. }
            | Error::BadEdgePlan(_)
            | Error::UnsupportedOverlap(_)
            | Error::UnsupportedOrder(_)
            | Error::LayoutOverlap(_)
            | Error::LayoutMismatch(_)
            | Error::FilterTooLong { .. }
            | Error::SpreadExceedsTransform { .. }
            | Error::GuardSwallowsData { .. }
            | Error::InvalidSpreadConfig(_)
            | Error::InvalidChannel(_)
            | Error::NoDataSubcarriers => true,
            Error::Trial { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
