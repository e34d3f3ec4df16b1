//! CSV and JSON emission of metric reports.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::{BerPoint, CcdfPoint, MetricReport, DB_FLOOR};

pub const BER_CSV: &str = "ber.csv";
pub const CCDF_CSV: &str = "ccdf.csv";
pub const PSD_CSV: &str = "psd.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Rounds to 9 significant digits. Non-finite values are capped: `-inf`
/// and NaN go to the dB floor, `+inf` stays (only used for noiseless SNR).
pub fn round9(x: f64) -> f64 {
    if x.is_nan() || x == f64::NEG_INFINITY {
        return DB_FLOOR;
    }
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Text form of an already-rounded value; exponent notation outside
/// `[1e-4, 1e9)`.
pub fn format_value(x: f64) -> String {
    let x = round9(x);
    if x == f64::INFINITY {
        return "inf".into();
    }
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e9).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn snr_text(snr: Option<f64>) -> String {
    snr.map(format_value).unwrap_or_else(|| "inf".into())
}

fn opt_text(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

/// A copy with every float rounded as in the CSV tables.
pub fn rounded(r: &MetricReport) -> MetricReport {
    MetricReport {
        scenario_id: r.scenario_id.clone(),
        waveform: r.waveform.clone(),
        papr_ccdf: r
            .papr_ccdf
            .iter()
            .map(|p| CcdfPoint {
                threshold_db: round9(p.threshold_db),
                probability: round9(p.probability),
            })
            .collect(),
        psd: r.psd.iter().map(|&(f, p)| (round9(f), round9(p))).collect(),
        oobe_ratio_db: r.oobe_ratio_db.map(round9),
        ber: r
            .ber
            .iter()
            .map(|b| BerPoint {
                snr_db: b.snr_db.map(round9),
                ..*b
            })
            .collect(),
        evm_db: r.evm_db.map(round9),
        spectral_efficiency: round9(r.spectral_efficiency),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn ber_rows(reports: &[MetricReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.ber.iter().map(move |b| {
                vec![
                    r.scenario_id.clone(),
                    r.waveform.clone(),
                    snr_text(b.snr_db),
                    b.trials.to_string(),
                    b.count.errors.to_string(),
                    b.count.total.to_string(),
                    format_value(b.count.ber()),
                ]
            })
        })
        .collect()
}

fn ccdf_rows(reports: &[MetricReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.papr_ccdf.iter().map(move |p| {
                vec![
                    r.scenario_id.clone(),
                    r.waveform.clone(),
                    format_value(p.threshold_db),
                    format_value(p.probability),
                ]
            })
        })
        .collect()
}

fn psd_rows(reports: &[MetricReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.psd
                .iter()
                .map(move |&(f, p)| vec![r.scenario_id.clone(), r.waveform.clone(), format_value(f), format_value(p)])
        })
        .collect()
}

fn summary_rows(reports: &[MetricReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.scenario_id.clone(),
                r.waveform.clone(),
                opt_text(r.oobe_ratio_db),
                opt_text(r.evm_db),
                format_value(r.spectral_efficiency),
            ]
        })
        .collect()
}

/// JSON document: the rounded reports, with BER values included so the two
/// formats carry the same numbers.
pub fn reports_to_json(reports: &[MetricReport]) -> String {
    let docs: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            let r = rounded(r);
            let mut v = serde_json::to_value(&r).expect("report serializes");
            if let Some(points) = v.get_mut("ber").and_then(|b| b.as_array_mut()) {
                for (p, b) in points.iter_mut().zip(&r.ber) {
                    p["ber"] = serde_json::json!(round9(b.count.ber()));
                }
            }
            v
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&docs).expect("json value serializes");
    s.push('\n');
    s
}

/// Writes the files of `format` into `dir` (created if missing) and returns
/// their paths.
pub fn emit_report(reports: &[MetricReport], format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::NoReports);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            let tables: [(&str, &[&str], Vec<Vec<String>>); 4] = [
                (
                    BER_CSV,
                    &["scenario_id", "waveform", "snr_db", "trials", "bit_errors", "bits_total", "ber"],
                    ber_rows(reports),
                ),
                (CCDF_CSV, &["scenario_id", "waveform", "threshold_db", "ccdf"], ccdf_rows(reports)),
                (PSD_CSV, &["scenario_id", "waveform", "freq_norm", "power_db"], psd_rows(reports)),
                (
                    SUMMARY_CSV,
                    &["scenario_id", "waveform", "oobe_ratio_db", "evm_db", "spectral_efficiency"],
                    summary_rows(reports),
                ),
            ];
            for (name, header, rows) in tables {
                let path = dir.join(name);
                write_table(&path, header, rows)?;
                written.push(path);
            }
        }
        ReportFormat::Json => {
            let path = dir.join(REPORT_JSON);
            fs::write(&path, reports_to_json(reports)).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::BerCount;

    fn report() -> MetricReport {
        MetricReport {
            scenario_id: "s".into(),
            waveform: "cp-ofdm".into(),
            papr_ccdf: (0..20)
                .map(|i| CcdfPoint {
                    threshold_db: i as f64 * 0.5,
                    probability: 1.0 / (i + 3) as f64,
                })
                .collect(),
            psd: vec![(-0.5, f64::NEG_INFINITY), (0.0, 3.0123456789123)],
            oobe_ratio_db: Some(-31.123456789123),
            ber: vec![BerPoint {
                snr_db: None,
                trials: 1,
                count: BerCount { errors: 0, total: 480 },
            }],
            evm_db: None,
            spectral_efficiency: 2.0 / 3.0,
        }
    }

    #[test]
    fn rounding_and_text() {
        assert_eq!(round9(2.0 / 3.0), 0.666666667);
        assert_eq!(format_value(0.5), "0.5");
        assert_eq!(format_value(1e-7), "1e-7");
        assert_eq!(format_value(123456789012.0), "1.23456789e11");
        assert_eq!(format_value(f64::NEG_INFINITY), "-120");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }

    #[test]
    fn tables_have_expected_rows() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[report()], ReportFormat::Csv, dir.path()).unwrap();
        let ber = fs::read_to_string(dir.path().join(BER_CSV)).unwrap();
        assert_eq!(ber, "scenario_id,waveform,snr_db,trials,bit_errors,bits_total,ber\ns,cp-ofdm,inf,1,0,480,0\n");
        let ccdf = fs::read_to_string(dir.path().join(CCDF_CSV)).unwrap();
        assert_eq!(ccdf.lines().count(), 21);
        let summary = fs::read_to_string(dir.path().join(SUMMARY_CSV)).unwrap();
        assert_eq!(summary.lines().nth(1).unwrap(), "s,cp-ofdm,-31.1234568,,0.666666667");
        assert!(!ccdf.contains('\r'));
    }

    #[test]
    fn json_matches_csv_values() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[report()], ReportFormat::Csv, dir.path()).unwrap();
        emit_report(&[report()], ReportFormat::Json, dir.path()).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
        let psd = fs::read_to_string(dir.path().join(PSD_CSV)).unwrap();
        for (line, pair) in psd.lines().skip(1).zip(json[0]["psd"].as_array().unwrap()) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[2].parse::<f64>().unwrap(), pair[0].as_f64().unwrap());
            assert_eq!(cols[3].parse::<f64>().unwrap(), pair[1].as_f64().unwrap());
        }
        assert_eq!(json[0]["ber"][0]["snr_db"], serde_json::Value::Null);
        assert_eq!(json[0]["spectral_efficiency"].as_f64().unwrap(), 0.666666667);
    }

    #[test]
    fn empty_and_unwritable() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_report(&[], ReportFormat::Csv, dir.path()), Err(Error::NoReports)));
        let file = dir.path().join("f");
        fs::write(&file, "x").unwrap();
        let err = emit_report(&[report()], ReportFormat::Csv, &file.join("sub")).unwrap_err();
        assert!(matches!(err, Error::Io { ref path, .. } if path.starts_with(&file)));
    }
}
