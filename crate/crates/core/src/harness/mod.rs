//! Scenario-driven comparison runs: load a JSON scenario, run every listed
//! waveform over trials and SNR points, and write CSV/JSON reports.

mod report;
mod run;
mod scenario;

pub use report::{
    emit_report, format_value, reports_to_json, round9, ReportFormat, BER_CSV, CCDF_CSV, PSD_CSV, REPORT_JSON,
    SUMMARY_CSV,
};
pub use run::{run_scenario, RunOptions};
pub use scenario::{
    load_scenario, parse_scenario, scenario_to_json, ActiveSpec, ChannelConfig, EqualizerKind, FilterSpec, Metric,
    ModulationSpec, NumerologySpec, Scenario, Waveform,
};
