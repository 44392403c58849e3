//! CSV output for runs and sweeps.
//!
//! Floats are written in `{:.16e}` scientific notation, which round-trips
//! every `f64` exactly. Integers are written plainly.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ObjectiveKind, FIELD_NAMES};
use crate::engine::{mean_std, RunSummary, SlotRecord};
use crate::error::IoError;

pub const SLOTS_HEADER: &str = "slot,occupancy,jain,messages,mean_rate_bps,min_rate_bps,max_rate_bps";
pub const SUMMARY_HEADER: &str = "seed,objective,n_users,n_bands,ell,n_particles,pu_busy_prob,avg_throughput_bps,avg_jain,total_messages";
pub const SWEEP_HEADER: &str = "parameter,value,metric,mean,std";

pub const SLOTS_FILE: &str = "slots.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// The per-slot columns that reach disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRow {
    pub slot: usize,
    pub occupancy: f64,
    pub jain: f64,
    pub messages: u64,
    pub mean_rate_bps: f64,
    pub min_rate_bps: f64,
    pub max_rate_bps: f64,
}

impl From<&SlotRecord> for SlotRow {
    fn from(r: &SlotRecord) -> Self {
        SlotRow {
            slot: r.slot,
            occupancy: r.occupancy,
            jain: r.jain,
            messages: r.messages,
            mean_rate_bps: r.mean_rate(),
            min_rate_bps: r.min_rate(),
            max_rate_bps: r.max_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub seed: u64,
    pub objective: ObjectiveKind,
    pub n_users: usize,
    pub n_bands: usize,
    pub ell: usize,
    pub n_particles: usize,
    pub pu_busy_prob: f64,
    pub avg_throughput_bps: f64,
    pub avg_jain: f64,
    pub total_messages: u64,
}

impl From<&RunSummary> for SummaryRow {
    fn from(s: &RunSummary) -> Self {
        SummaryRow {
            seed: s.seed,
            objective: s.config.objective,
            n_users: s.config.n_users,
            n_bands: s.config.n_bands,
            ell: s.config.max_bands_per_user,
            n_particles: s.config.n_particles,
            pu_busy_prob: s.config.pu_busy_prob,
            avg_throughput_bps: s.per_user_avg_throughput,
            avg_jain: s.avg_jain,
            total_messages: s.total_messages,
        }
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_csv<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn slots_csv(records: &[SlotRecord]) -> String {
    to_csv(
        SLOTS_HEADER,
        records.iter().map(SlotRow::from).map(|r| {
            [
                r.slot.to_string(),
                f(r.occupancy),
                f(r.jain),
                r.messages.to_string(),
                f(r.mean_rate_bps),
                f(r.min_rate_bps),
                f(r.max_rate_bps),
            ]
        }),
    )
}

pub fn summary_csv(summaries: &[RunSummary]) -> String {
    to_csv(
        SUMMARY_HEADER,
        summaries.iter().map(SummaryRow::from).map(|s| {
            [
                s.seed.to_string(),
                s.objective.to_string(),
                s.n_users.to_string(),
                s.n_bands.to_string(),
                s.ell.to_string(),
                s.n_particles.to_string(),
                f(s.pu_busy_prob),
                f(s.avg_throughput_bps),
                f(s.avg_jain),
                s.total_messages.to_string(),
            ]
        }),
    )
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|e| IoError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub slots: PathBuf,
    pub summary: PathBuf,
}

/// Writes `slots.csv` and `summary.csv` into `out_dir`, creating it if needed.
pub fn write_run(records: &[SlotRecord], summary: &RunSummary, out_dir: &Path) -> Result<RunPaths, IoError> {
    fs::create_dir_all(out_dir).map_err(|e| IoError::io(out_dir, e))?;
    let paths = RunPaths {
        slots: out_dir.join(SLOTS_FILE),
        summary: out_dir.join(SUMMARY_FILE),
    };
    write_file(&paths.slots, &slots_csv(records))?;
    write_file(&paths.summary, &summary_csv(std::slice::from_ref(summary)))?;
    Ok(paths)
}

struct Fields<'a> {
    path: &'a Path,
    line: usize,
    record: csv::StringRecord,
    next: usize,
}

impl Fields<'_> {
    fn format_error(&self, reason: String) -> IoError {
        IoError::Format {
            path: self.path.to_path_buf(),
            line: self.line,
            reason,
        }
    }

    fn next<T: std::str::FromStr>(&mut self, name: &str) -> Result<T, IoError> {
        let raw = self
            .record
            .get(self.next)
            .ok_or_else(|| self.format_error(format!("missing column {name}")))?;
        self.next += 1;
        raw.parse()
            .map_err(|_| self.format_error(format!("bad {name} value {raw:?}")))
    }

    fn finish(self) -> Result<(), IoError> {
        if self.record.len() > self.next {
            Err(self.format_error("too many columns".into()))
        } else {
            Ok(())
        }
    }
}

fn parse_rows<T>(
    text: &str,
    header: &str,
    path: &Path,
    mut row: impl FnMut(&mut Fields<'_>) -> Result<T, IoError>,
) -> Result<Vec<T>, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(text.as_bytes());
    let bad_header = || IoError::Format {
        path: path.to_path_buf(),
        line: 1,
        reason: format!("expected header {header:?}"),
    };
    let found = reader.headers().map_err(|_| bad_header())?;
    if !found.iter().eq(header.split(',')) {
        return Err(bad_header());
    }
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let record = rec.map_err(|e| IoError::Format {
            path: path.to_path_buf(),
            line,
            reason: e.to_string(),
        })?;
        let mut fields = Fields {
            path,
            line,
            record,
            next: 0,
        };
        out.push(row(&mut fields)?);
        fields.finish()?;
    }
    Ok(out)
}

/// Parses a slots file; `path` is only used in error messages.
pub fn parse_slots_csv(text: &str, path: &Path) -> Result<Vec<SlotRow>, IoError> {
    parse_rows(text, SLOTS_HEADER, path, |c| {
        Ok(SlotRow {
            slot: c.next("slot")?,
            occupancy: c.next("occupancy")?,
            jain: c.next("jain")?,
            messages: c.next("messages")?,
            mean_rate_bps: c.next("mean_rate_bps")?,
            min_rate_bps: c.next("min_rate_bps")?,
            max_rate_bps: c.next("max_rate_bps")?,
        })
    })
}

pub fn parse_summary_csv(text: &str, path: &Path) -> Result<Vec<SummaryRow>, IoError> {
    parse_rows(text, SUMMARY_HEADER, path, |c| {
        Ok(SummaryRow {
            seed: c.next("seed")?,
            objective: c.next("objective")?,
            n_users: c.next("n_users")?,
            n_bands: c.next("n_bands")?,
            ell: c.next("ell")?,
            n_particles: c.next("n_particles")?,
            pu_busy_prob: c.next("pu_busy_prob")?,
            avg_throughput_bps: c.next("avg_throughput_bps")?,
            avg_jain: c.next("avg_jain")?,
            total_messages: c.next("total_messages")?,
        })
    })
}

/// One line of the long-format sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: String,
    pub metric: &'static str,
    pub mean: f64,
    pub std: f64,
}

pub const SWEEP_METRICS: [&str; 3] = ["avg_throughput_bps", "avg_jain", "total_messages"];

fn metric(s: &RunSummary, name: &str) -> f64 {
    match name {
        "avg_throughput_bps" => s.per_user_avg_throughput,
        "avg_jain" => s.avg_jain,
        "total_messages" => s.total_messages as f64,
        _ => unreachable!("unknown metric {name}"),
    }
}

/// Aggregates per-value groups of replications into mean and sample std of
/// each metric. Groups are sorted by value (numerically when every value
/// parses as a number). Summaries must agree on every field except the
/// swept one and the seed.
pub fn sweep_table(parameter: &str, groups: &[(String, Vec<RunSummary>)]) -> Result<Vec<SweepRow>, IoError> {
    let reference = groups
        .iter()
        .flat_map(|(_, g)| g.first())
        .next()
        .ok_or(IoError::EmptySweep)?;
    for s in groups.iter().flat_map(|(_, g)| g) {
        for name in FIELD_NAMES.iter().filter(|&&n| n != parameter && n != "seed") {
            if s.config.field(name) != reference.config.field(name) {
                return Err(IoError::MixedConfigs {
                    field: (*name).to_string(),
                });
            }
        }
    }
    let mut order: Vec<&(String, Vec<RunSummary>)> = groups.iter().collect();
    let numeric: Option<Vec<f64>> = order.iter().map(|(v, _)| v.trim().parse::<f64>().ok()).collect();
    match numeric {
        Some(_) => order.sort_by(|a, b| {
            let x: f64 = a.0.trim().parse().unwrap();
            let y: f64 = b.0.trim().parse().unwrap();
            x.total_cmp(&y)
        }),
        None => order.sort_by(|a, b| a.0.cmp(&b.0)),
    }
    let mut out = Vec::new();
    for (value, summaries) in order {
        for name in SWEEP_METRICS {
            let xs: Vec<f64> = summaries.iter().map(|s| metric(s, name)).collect();
            let (mean, std) = mean_std(&xs);
            out.push(SweepRow {
                parameter: parameter.to_string(),
                value: value.clone(),
                metric: name,
                mean,
                std,
            });
        }
    }
    Ok(out)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    to_csv(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            [
                r.parameter.clone(),
                r.value.clone(),
                r.metric.to_string(),
                f(r.mean),
                f(r.std),
            ]
        }),
    )
}

pub fn write_sweep(rows: &[SweepRow], path: &Path) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    }
    write_file(path, &sweep_csv(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;

    fn record(slot: usize, rates: Vec<f64>) -> SlotRecord {
        SlotRecord {
            slot,
            realized_rewards: rates.clone(),
            jain: crate::engine::jain_index(&rates),
            occupancy: 0.25,
            messages: 6,
            selections: vec![vec![0]; rates.len()],
            powers: vec![vec![1e-3]; rates.len()],
            realized_rates: rates,
        }
    }

    fn summary(seed: u64, thr: f64, config: SystemConfig) -> RunSummary {
        RunSummary {
            seed,
            config,
            per_user_avg_throughput: thr,
            avg_jain: 0.5,
            total_messages: 12,
            n_slots: 2,
        }
    }

    #[test]
    fn empty_run_is_header_only() {
        assert_eq!(slots_csv(&[]), format!("{SLOTS_HEADER}\n"));
    }

    #[test]
    fn slots_round_trip() {
        let recs = vec![record(0, vec![1.0, 2.5e6, 1.0 / 3.0]), record(1, vec![0.1, 0.2, 0.7])];
        let text = slots_csv(&recs);
        assert_eq!(text.lines().count(), 3);
        let parsed = parse_slots_csv(&text, Path::new("x")).unwrap();
        let want: Vec<SlotRow> = recs.iter().map(SlotRow::from).collect();
        assert_eq!(parsed, want);
    }

    #[test]
    fn summary_round_trip() {
        let s = summary(7, std::f64::consts::PI * 1e5, SystemConfig::default());
        let text = summary_csv(std::slice::from_ref(&s));
        let parsed = parse_summary_csv(&text, Path::new("x")).unwrap();
        assert_eq!(parsed, vec![SummaryRow::from(&s)]);
    }

    #[test]
    fn parse_errors_carry_line() {
        let bad = format!("{SLOTS_HEADER}\n0,1,1,2,3,4,5\n1,1,oops,2,3,4,5\n");
        match parse_slots_csv(&bad, Path::new("f.csv")) {
            Err(IoError::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_sorted_with_sample_std() {
        let cfg = |n: usize| SystemConfig {
            n_particles: n,
            ..SystemConfig::default()
        };
        let groups = vec![
            ("10".to_string(), vec![summary(1, 3.0, cfg(10)), summary(2, 5.0, cfg(10))]),
            ("2".to_string(), vec![summary(1, 1.0, cfg(2))]),
        ];
        let rows = sweep_table("n_particles", &groups).unwrap();
        assert_eq!(rows.len(), 2 * SWEEP_METRICS.len());
        assert_eq!(rows[0].value, "2");
        assert_eq!(rows[0].std, 0.0);
        let thr10 = rows.iter().find(|r| r.value == "10" && r.metric == "avg_throughput_bps").unwrap();
        assert_eq!(thr10.mean, 4.0);
        assert!((thr10.std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sweep_rejects_mixed_configs() {
        let other = SystemConfig {
            n_users: 3,
            ..SystemConfig::default()
        };
        let groups = vec![
            ("a".to_string(), vec![summary(1, 1.0, SystemConfig::default())]),
            ("b".to_string(), vec![summary(1, 1.0, other)]),
        ];
        match sweep_table("objective", &groups) {
            Err(IoError::MixedConfigs { field }) => assert_eq!(field, "n_users"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(sweep_table("x", &[]), Err(IoError::EmptySweep)));
    }
}
