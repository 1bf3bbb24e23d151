//! Command implementations behind the `hdsched` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use hdsched::files::{
    parse_network, FormatError, NetworkFile, RunReport, SolveReport, SweepEntry, SweepReport,
    VerifyReport, RUN_REPORT_VERSION,
};
use hdsched::generate::{random_network, Topology, PRNG_NAME};
use hdsched::oracle::{self, fingerprint, VerificationReport};
use hdsched::scheduler::{self, Method, MAX_EXHAUSTIVE_RELAYS};
use hdsched::{Error, NetworkModel};

/// Failure of a command, with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Numerical(String),
    /// The report was written but at least one check failed.
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Assertion(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Guard(_) => "guard",
            CliError::Numerical(_) => "numerical",
            CliError::Assertion(_) => "assertion",
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            exit_code: i32,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrapper {
            error: Body {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
            },
        })
        .expect("error body serializes")
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::TooLarge(_) => CliError::Guard(e.to_string()),
            Error::Numerical(_) | Error::ExtractionFailed { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Writes `contents` through a temporary file in the same directory and
/// renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn read_network(path: &Path) -> CliResult<(NetworkModel, Option<String>)> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_network(&text)?)
}

/// `gen`: writes a seeded random network file.
pub fn cmd_gen(
    relays: usize,
    topology: Topology,
    seed: u64,
    out: &Path,
) -> CliResult<NetworkModel> {
    if relays == 0 {
        return Err(CliError::Guard("--relays must be at least 1".into()));
    }
    let net = random_network(relays, topology, seed)?;
    let label = format!("{topology} N={relays} seed={seed} prng={PRNG_NAME}");
    write_atomic(out, &NetworkFile::from_network(&net, Some(label)).to_json())?;
    Ok(net)
}

/// Runs one solver on a network.
pub fn solve_network(
    net: &NetworkModel,
    mode: Method,
    tol: f64,
) -> CliResult<scheduler::ScheduleResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(CliError::Guard(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(match mode {
        Method::Exhaustive => scheduler::solve_exhaustive(net)?,
        Method::CuttingPlane => scheduler::solve_cutting_plane(net, tol)?,
        Method::Oracle => oracle::solve_oracle(net)?,
    })
}

/// `solve`: runs the selected solver on a network file.
pub fn cmd_solve(input: &Path, mode: Method, tol: f64, out: &Path) -> CliResult<RunReport> {
    let (net, label) = read_network(input)?;
    let result = solve_network(&net, mode, tol)?;
    let report = RunReport::Solve(SolveReport::new(fingerprint(&net), label, tol, &result));
    write_atomic(out, &report.to_json())?;
    Ok(report)
}

fn verify_network(net: &NetworkModel, label: Option<String>) -> CliResult<VerifyReport> {
    let report = oracle::check_theorem(net)?;
    let n2_diamond = if net.num_relays() == 2 && net.is_diamond() {
        Some(oracle::check_n2_diamond(net)?)
    } else {
        None
    };
    let passed = report.passed && n2_diamond.as_ref().is_none_or(|c| c.passed);
    Ok(VerifyReport {
        version: RUN_REPORT_VERSION,
        label,
        report,
        n2_diamond,
        passed,
    })
}

/// `verify`: cross-checks all solvers on a network file. The report is
/// written even when a check fails; the error then carries exit code 5.
pub fn cmd_verify(input: &Path, out: &Path) -> CliResult<RunReport> {
    let (net, label) = read_network(input)?;
    let report = verify_network(&net, label)?;
    let passed = report.passed;
    let run = RunReport::Verify(report);
    write_atomic(out, &run.to_json())?;
    if !passed {
        return Err(CliError::Assertion(format!(
            "verification failed; see {}",
            out.display()
        )));
    }
    Ok(run)
}

fn failed_names(report: &VerificationReport) -> Vec<String> {
    report
        .assertions
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.clone())
        .collect()
}

fn sweep_entry(index: usize, seed: u64, net: &NetworkModel, mode: Method) -> CliResult<SweepEntry> {
    let n = net.num_relays();
    if n <= MAX_EXHAUSTIVE_RELAYS {
        let verify = verify_network(net, None)?;
        let report = &verify.report;
        let active_states = report
            .methods
            .iter()
            .find(|m| m.method == mode)
            .map(|m| m.active_states)
            .unwrap_or(0);
        let mut failed_assertions = failed_names(report);
        if verify.n2_diamond.as_ref().is_some_and(|c| !c.passed) {
            failed_assertions.push("n2_diamond".into());
        }
        return Ok(SweepEntry {
            index,
            seed,
            fingerprint: report.fingerprint.clone(),
            value: report.oracle_value,
            active_states,
            max_deviation: report.max_deviation,
            passed: verify.passed,
            failed_assertions,
        });
    }
    // beyond the oracle's reach only the cutting-plane solver runs
    if mode != Method::CuttingPlane {
        return Err(CliError::Guard(format!(
            "mode {mode} needs N <= {MAX_EXHAUSTIVE_RELAYS}; use cutting-plane"
        )));
    }
    let r = scheduler::solve_cutting_plane(net, scheduler::DEFAULT_EPSILON)?;
    let (verified, _) = scheduler::verify_schedule(net, &r.schedule)?;
    let deviation = (verified - r.value).abs();
    let mut failed_assertions = Vec::new();
    if deviation > oracle::VALUE_TOL {
        failed_assertions.push("cutting_plane_schedule_verified".into());
    }
    if r.active_states > n + 1 {
        failed_assertions.push("cutting_plane_active_states_at_most_n_plus_1".into());
    }
    Ok(SweepEntry {
        index,
        seed,
        fingerprint: fingerprint(net),
        value: r.value,
        active_states: r.active_states,
        max_deviation: deviation,
        passed: failed_assertions.is_empty(),
        failed_assertions,
    })
}

/// Builds the sweep report without writing it. Networks use seeds
/// `seed, seed + 1, …` and are processed in parallel; the report does not
/// depend on scheduling.
pub fn sweep(
    relays: usize,
    count: usize,
    topology: Topology,
    seed: u64,
    mode: Method,
) -> CliResult<SweepReport> {
    if count == 0 {
        return Err(CliError::Guard("--count must be at least 1".into()));
    }
    if relays == 0 {
        return Err(CliError::Guard("--relays must be at least 1".into()));
    }
    let entries: Vec<SweepEntry> = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub_seed = seed.wrapping_add(i as u64);
            let net = random_network(relays, topology, sub_seed)?;
            sweep_entry(i, sub_seed, &net, mode)
        })
        .collect::<CliResult<_>>()?;

    let passed = entries.iter().filter(|e| e.passed).count();
    let mut histogram = BTreeMap::new();
    for e in &entries {
        *histogram.entry(e.active_states).or_insert(0) += 1;
    }
    Ok(SweepReport {
        version: RUN_REPORT_VERSION,
        num_relays: relays,
        topology: topology.to_string(),
        seed,
        count,
        mode,
        prng: PRNG_NAME.to_owned(),
        passed,
        failed: count - passed,
        pass_rate: passed as f64 / count as f64,
        max_deviation: entries.iter().map(|e| e.max_deviation).fold(0.0, f64::max),
        active_state_histogram: histogram,
        entries,
    })
}

/// `sweep`: verifies `count` generated networks and writes the aggregate.
pub fn cmd_sweep(
    relays: usize,
    count: usize,
    topology: Topology,
    seed: u64,
    mode: Method,
    out: &Path,
) -> CliResult<RunReport> {
    let report = sweep(relays, count, topology, seed, mode)?;
    let failed = report.failed;
    let run = RunReport::Sweep(report);
    write_atomic(out, &run.to_json())?;
    if failed > 0 {
        return Err(CliError::Assertion(format!(
            "{failed} of {count} networks failed verification"
        )));
    }
    Ok(run)
}
