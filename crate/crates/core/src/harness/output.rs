//! CSV and plot-data emitters.
//!
//! Metrics CSV columns, in order:
//! `algorithm, noise_var_uw, avg_snr_db, avg_sir_db, avg_throughput_bits,
//! avg_power_uw, active_fraction, n_trials, master_seed`.
//! Floats are written in shortest round-trip form, `-inf`/`inf` for infinite
//! dB values, and an empty field when there is no SIR to report.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::experiment::{AlgorithmTag, Experiment, MetricsRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "algorithm",
    "noise_var_uw",
    "avg_snr_db",
    "avg_sir_db",
    "avg_throughput_bits",
    "avg_power_uw",
    "active_fraction",
    "n_trials",
    "master_seed",
];

pub const CHANNEL_CSV_HEADER: [&str; 6] = [
    "trial",
    "subcarrier",
    "re_h",
    "im_h",
    "gain_sq",
    "interf_var_uw",
];

fn float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn emit_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.algorithm.to_string(),
            float(r.noise_var),
            float(r.avg_snr_db),
            r.avg_sir_db.map(float).unwrap_or_default(),
            float(r.avg_throughput),
            float(r.avg_power),
            float(r.active_fraction),
            r.n_trials.to_string(),
            r.master_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(records: &[MetricsRecord]) -> Result<String> {
    let mut buf = Vec::new();
    emit_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected CSV header: {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (idx, row) in rdr.records().enumerate() {
        let row = row?;
        let line = idx + 2;
        let bad = |field: &str, e: String| Error::Parse {
            line,
            message: format!("{field}: {e}"),
        };
        let f = |k: usize| -> Result<f64> {
            row[k]
                .parse::<f64>()
                .map_err(|e| bad(CSV_HEADER[k], e.to_string()))
        };
        out.push(MetricsRecord {
            algorithm: row[0].parse().map_err(|e| bad("algorithm", e))?,
            noise_var: f(1)?,
            avg_snr_db: f(2)?,
            avg_sir_db: if row[3].is_empty() { None } else { Some(f(3)?) },
            avg_throughput: f(4)?,
            avg_power: f(5)?,
            active_fraction: f(6)?,
            n_trials: row[7]
                .parse()
                .map_err(|e| bad("n_trials", format!("{e}")))?,
            master_seed: row[8]
                .parse()
                .map_err(|e| bad("master_seed", format!("{e}")))?,
        });
    }
    Ok(out)
}

/// Writes one whitespace-separated file per algorithm into `dir`:
/// `<stem>_<algorithm>.dat` with columns
/// `avg_snr_db avg_throughput_bits avg_power_uw noise_var_uw`.
pub fn emit_plot_data(records: &[MetricsRecord], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for tag in [AlgorithmTag::Proposed, AlgorithmTag::Baseline] {
        let rows: Vec<&MetricsRecord> = records.iter().filter(|r| r.algorithm == tag).collect();
        if rows.is_empty() {
            continue;
        }
        let path = dir.join(format!("{stem}_{tag}.dat"));
        let mut f = fs::File::create(&path)?;
        writeln!(
            f,
            "# avg_snr_db avg_throughput_bits avg_power_uw noise_var_uw"
        )?;
        for r in rows {
            writeln!(
                f,
                "{} {} {} {}",
                float(r.avg_snr_db),
                float(r.avg_throughput),
                float(r.avg_power),
                float(r.noise_var)
            )?;
        }
        paths.push(path);
    }
    Ok(paths)
}

/// Dumps the channels of `trials` for offline inspection or cross-checking.
pub fn write_channel_csv<W: Write>(
    exp: &Experiment,
    trials: impl IntoIterator<Item = u64>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHANNEL_CSV_HEADER)?;
    let variances = &exp.profile().variances;
    for trial in trials {
        let r = exp.realization(trial);
        for (i, h) in r.gains.iter().enumerate() {
            w.write_record([
                trial.to_string(),
                i.to_string(),
                float(h.re),
                float(h.im),
                float(r.gain_sq[i]),
                float(variances[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(sir: Option<f64>, snr: f64) -> MetricsRecord {
        MetricsRecord {
            algorithm: AlgorithmTag::Baseline,
            noise_var: 1e-3,
            avg_snr_db: snr,
            avg_sir_db: sir,
            avg_throughput: 384.0,
            avg_power: 161.58184457956,
            active_fraction: 0.984375,
            n_trials: 1000,
            master_seed: 42,
        }
    }

    #[test]
    fn header_and_sentinels() {
        let s = csv_string(&[
            record(None, f64::NEG_INFINITY),
            record(Some(f64::INFINITY), 3.0),
        ])
        .unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let first = lines.next().unwrap();
        assert!(first.starts_with("baseline,1e-3,-inf,,"), "{first}");
        assert!(lines.next().unwrap().contains(",inf,"));
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn plot_files_per_curve() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = record(Some(12.0), 20.0);
        p.algorithm = AlgorithmTag::Proposed;
        let paths = emit_plot_data(&[p, record(Some(1.0), 10.0)], dir.path(), "curves").unwrap();
        assert_eq!(paths.len(), 2);
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(paths[0].ends_with("curves_proposed.dat"));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 4);
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            snr in prop_oneof![Just(f64::NEG_INFINITY), -50.0f64..80.0],
            sir in prop::option::of(prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY), -30.0f64..60.0]),
            thr in 0.0f64..5000.0,
            pw in 0.0f64..500.0,
            nv in 1e-9f64..10.0,
            seed in any::<u64>(),
        ) {
            let rec = MetricsRecord {
                noise_var: nv,
                avg_snr_db: snr,
                avg_sir_db: sir,
                avg_throughput: thr,
                avg_power: pw,
                master_seed: seed,
                ..record(None, 0.0)
            };
            let back = read_csv(csv_string(&[rec]).unwrap().as_bytes()).unwrap();
            prop_assert_eq!(back, vec![rec]);
        }
    }
}
