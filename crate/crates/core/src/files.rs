//! JSON documents: network files and run reports.
//!
//! Complex gains are `[re, im]` pairs. Floats are written in shortest
//! round-trip form, so parsing a written file reproduces every gain
//! bit-exactly.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::network::NetworkModel;
use crate::oracle::{N2DiamondCheck, VerificationReport};
use crate::schedule::{Schedule, INPUT_SUM_TOL};
use crate::scheduler::{Method, Permutation, ScheduleResult, SolveStats};

pub const NETWORK_FILE_VERSION: u32 = 1;
pub const RUN_REPORT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported version {found}, expected {expected}")]
    Version { found: u32, expected: u32 },
    #[error("invalid document: {0}")]
    Invalid(String),
}

/// On-disk network description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub version: u32,
    pub num_relays: usize,
    /// `(N+2) x (N+2)` rows of `[re, im]`; entry `(i, j)` is transmitter `j`
    /// to receiver `i`.
    pub gains: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl NetworkFile {
    pub fn from_network(net: &NetworkModel, label: Option<String>) -> Self {
        Self {
            version: NETWORK_FILE_VERSION,
            num_relays: net.num_relays(),
            gains: net
                .gain_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|g| [g.re, g.im]).collect())
                .collect(),
            label,
        }
    }

    pub fn to_network(&self) -> Result<NetworkModel, FormatError> {
        if self.version != NETWORK_FILE_VERSION {
            return Err(FormatError::Version {
                found: self.version,
                expected: NETWORK_FILE_VERSION,
            });
        }
        let gains = self
            .gains
            .iter()
            .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
            .collect();
        NetworkModel::new(self.num_relays, gains).map_err(|e| FormatError::Invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("network files always serialize");
        s.push('\n');
        s
    }
}

/// Parses a network file into a validated model and its optional label.
pub fn parse_network(text: &str) -> Result<(NetworkModel, Option<String>), FormatError> {
    let file: NetworkFile = serde_json::from_str(text)?;
    let net = file.to_network()?;
    Ok((net, file.label))
}

/// Result of a single solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub version: u32,
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub num_relays: usize,
    pub method: Method,
    pub tolerance: f64,
    pub value: f64,
    /// Decimal state index to probability.
    #[serde(with = "int_keys")]
    pub schedule: BTreeMap<u32, f64>,
    pub active_states: usize,
    pub certifying_cut: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Permutation>,
    /// Deterministic work counters; wall-clock time is not recorded so that
    /// identical runs produce identical reports.
    pub timings: SolveStats,
}

impl SolveReport {
    pub fn new(
        fingerprint: String,
        label: Option<String>,
        tolerance: f64,
        result: &ScheduleResult,
    ) -> Self {
        Self {
            version: RUN_REPORT_VERSION,
            fingerprint,
            label,
            num_relays: result.schedule.num_relays(),
            method: result.method,
            tolerance,
            value: result.value,
            schedule: schedule_map(&result.schedule),
            active_states: result.active_states,
            certifying_cut: result.certifying_cut.0,
            permutation: result.winning_permutation.clone(),
            timings: result.stats,
        }
    }

    /// The schedule, revalidated.
    pub fn schedule(&self) -> Result<Schedule, FormatError> {
        schedule_from_map(self.num_relays, &self.schedule)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub report: VerificationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n2_diamond: Option<N2DiamondCheck>,
    pub passed: bool,
}

/// Per-network line of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub index: usize,
    pub seed: u64,
    pub fingerprint: String,
    pub value: f64,
    pub active_states: usize,
    pub max_deviation: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_assertions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub version: u32,
    pub num_relays: usize,
    pub topology: String,
    pub seed: u64,
    pub count: usize,
    pub mode: Method,
    pub prng: String,
    pub passed: usize,
    pub failed: usize,
    pub pass_rate: f64,
    pub max_deviation: f64,
    /// Active-state count of the selected method's schedule to number of networks.
    #[serde(with = "int_keys")]
    pub active_state_histogram: BTreeMap<usize, usize>,
    pub entries: Vec<SweepEntry>,
}

/// Any report the command-line tool writes, tagged by `command`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunReport {
    Solve(SolveReport),
    Verify(VerifyReport),
    Sweep(SweepReport),
}

impl RunReport {
    pub fn version(&self) -> u32 {
        match self {
            RunReport::Solve(r) => r.version,
            RunReport::Verify(r) => r.version,
            RunReport::Sweep(r) => r.version,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

/// Parses a run report, checking its version and that any schedule it
/// carries is a probability mass function.
pub fn parse_run_report(text: &str) -> Result<RunReport, FormatError> {
    let report: RunReport = serde_json::from_str(text)?;
    let version = report.version();
    if let RunReport::Solve(r) = &report {
        r.schedule()?;
    }
    if version != RUN_REPORT_VERSION {
        return Err(FormatError::Version {
            found: version,
            expected: RUN_REPORT_VERSION,
        });
    }
    Ok(report)
}

/// Maps with integer keys, written as JSON objects with decimal string keys
/// in numeric order.
mod int_keys {
    use std::collections::BTreeMap;
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::de::Error as _;
    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K, V, S>(map: &BTreeMap<K, V>, ser: S) -> Result<S::Ok, S::Error>
    where
        K: Display,
        V: Serialize,
        S: Serializer,
    {
        let mut out = ser.serialize_map(Some(map.len()))?;
        for (k, v) in map {
            out.serialize_entry(&k.to_string(), v)?;
        }
        out.end()
    }

    pub fn deserialize<'de, K, V, D>(de: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: FromStr + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let raw = BTreeMap::<String, V>::deserialize(de)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<K>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("invalid integer key {k:?}")))
            })
            .collect()
    }
}

pub fn schedule_map(sched: &Schedule) -> BTreeMap<u32, f64> {
    sched.iter().map(|(s, p)| (s.0, p)).collect()
}

pub fn schedule_from_map(
    num_relays: usize,
    map: &BTreeMap<u32, f64>,
) -> Result<Schedule, FormatError> {
    let total: f64 = map.values().sum();
    let off = (total - 1.0).abs();
    if off.is_nan() || off > INPUT_SUM_TOL {
        return Err(FormatError::Invalid(format!(
            "schedule probabilities sum to {total}"
        )));
    }
    let pairs: Vec<(u32, f64)> = map.iter().map(|(&s, &p)| (s, p)).collect();
    Schedule::from_pairs(num_relays, &pairs).map_err(|e| FormatError::Invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_network, Topology};
    use crate::scheduler::solve_exhaustive;

    #[test]
    fn network_round_trip_is_bit_exact() {
        let net = random_network(3, Topology::General, 99).unwrap();
        let text = NetworkFile::from_network(&net, Some("x".into())).to_json();
        let (back, label) = parse_network(&text).unwrap();
        assert_eq!(label.as_deref(), Some("x"));
        for (a, b) in net
            .gain_rows()
            .iter()
            .flatten()
            .zip(back.gain_rows().iter().flatten())
        {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn network_errors() {
        assert!(matches!(parse_network("{"), Err(FormatError::Json(_))));
        let wrong_version = r#"{"version":2,"num_relays":1,"gains":[[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]]}"#;
        assert!(matches!(
            parse_network(wrong_version),
            Err(FormatError::Version { .. })
        ));
        let wrong_shape = r#"{"version":1,"num_relays":2,"gains":[[[0,0]]]}"#;
        assert!(matches!(
            parse_network(wrong_shape),
            Err(FormatError::Invalid(_))
        ));
        let extra = r#"{"version":1,"num_relays":1,"gains":[],"colour":1}"#;
        assert!(matches!(parse_network(extra), Err(FormatError::Json(_))));
    }

    #[test]
    fn solve_report_round_trip() {
        let net = NetworkModel::diamond(&[1.0], &[1.0]).unwrap();
        let r = solve_exhaustive(&net).unwrap();
        let report = RunReport::Solve(SolveReport::new("f".into(), None, 1e-9, &r));
        let text = report.to_json();
        assert!(text.contains("\"command\": \"solve\""));
        assert!(text.contains("\"0\": 0.5"));
        assert_eq!(parse_run_report(&text).unwrap(), report);
    }

    #[test]
    fn report_schedule_must_sum_to_one() {
        let net = NetworkModel::diamond(&[1.0], &[1.0]).unwrap();
        let r = solve_exhaustive(&net).unwrap();
        let mut report = SolveReport::new("f".into(), None, 1e-9, &r);
        report.schedule.insert(0, 0.7);
        let text = RunReport::Solve(report).to_json();
        assert!(matches!(
            parse_run_report(&text),
            Err(FormatError::Invalid(_))
        ));
    }
}
