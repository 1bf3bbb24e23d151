//! Brute-force reference: the max-min LP over every cut and every state,
//! and the verification battery comparing it against the other solvers.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::network::{CutMask, CutRateTable, NetworkModel};
use crate::schedule::Schedule;
use crate::scheduler::{
    self, max_min, verify_schedule, Method, ScheduleResult, SolveStats, DEFAULT_EPSILON,
    MAX_EXHAUSTIVE_RELAYS,
};

/// Tolerance on value agreement between methods.
pub const VALUE_TOL: f64 = 1e-7;

/// Optimum of the full LP. The schedule is a basic solution of a system with
/// `2^N + 1` rows and need not be simple.
#[derive(Clone, Debug, PartialEq)]
pub struct FullLpSolution {
    pub value: f64,
    pub schedule: Schedule,
    pub pivots: usize,
}

fn guard(net: &NetworkModel) -> Result<()> {
    let n = net.num_relays();
    if n > MAX_EXHAUSTIVE_RELAYS {
        return Err(Error::TooLarge(format!(
            "the full LP has 2^{n} rows; oracle limit is N = {MAX_EXHAUSTIVE_RELAYS}"
        )));
    }
    Ok(())
}

/// `max τ s.t. τ ≤ Σ_s λ_s f_s(A) ∀A ⊆ [1:N], 1ᵀλ = 1, λ ≥ 0`.
pub fn solve_full_lp(net: &NetworkModel) -> Result<FullLpSolution> {
    guard(net)?;
    full_lp(net, &CutRateTable::new(net), &[])
}

fn full_lp(
    net: &NetworkModel,
    table: &CutRateTable,
    zero_states: &[u32],
) -> Result<FullLpSolution> {
    let rows: Vec<&[f64]> = (0..net.num_states() as u32)
        .map(|a| table.row(CutMask(a)))
        .collect();
    let game = max_min(net.num_relays(), &rows, zero_states)?;
    Ok(FullLpSolution {
        value: game.value,
        schedule: game.schedule,
        pivots: game.lp.pivots,
    })
}

/// Oracle result in the common [`ScheduleResult`] shape.
pub fn solve_oracle(net: &NetworkModel) -> Result<ScheduleResult> {
    let full = solve_full_lp(net)?;
    let (_, certifying_cut) = verify_schedule(net, &full.schedule)?;
    Ok(ScheduleResult {
        value: full.value,
        active_states: full.schedule.active_states(),
        schedule: full.schedule,
        winning_permutation: None,
        certifying_cut,
        method: Method::Oracle,
        stats: SolveStats {
            lp_solves: 1,
            pivots: full.pivots,
            ..SolveStats::default()
        },
    })
}

/// Stable identifier of a network: SHA-256 over `N` and the bit patterns of
/// every gain, hex encoded.
pub fn fingerprint(net: &NetworkModel) -> String {
    let mut h = Sha256::new();
    h.update((net.num_relays() as u64).to_le_bytes());
    for row in net.gain_rows() {
        for g in row {
            h.update(g.re.to_bits().to_le_bytes());
            h.update(g.im.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub value: f64,
    /// Min-cut value of the returned schedule, recomputed independently.
    pub verified_value: f64,
    pub active_states: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    /// Absent when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub deviation: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

impl Assertion {
    fn within(name: &str, deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            passed: deviation <= tolerance,
            deviation: Some(deviation),
            tolerance,
            detail: None,
        }
    }

    fn failed(name: &str, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            passed: false,
            deviation: None,
            tolerance: 0.0,
            detail: Some(detail),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub fingerprint: String,
    pub num_relays: usize,
    pub oracle_value: f64,
    pub methods: Vec<MethodOutcome>,
    pub assertions: Vec<Assertion>,
    /// Largest deviation over all evaluated assertions.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Runs the oracle, the exhaustive solver and the cutting-plane solver and
/// checks value agreement and the `N+1` active-state bound.
pub fn check_theorem(net: &NetworkModel) -> Result<VerificationReport> {
    guard(net)?;
    let n = net.num_relays();
    let oracle = solve_full_lp(net)?;
    let mut methods = Vec::new();
    let mut assertions = Vec::new();

    let (oracle_verified, _) = verify_schedule(net, &oracle.schedule)?;
    methods.push(MethodOutcome {
        method: Method::Oracle,
        value: oracle.value,
        verified_value: oracle_verified,
        active_states: oracle.schedule.active_states(),
    });
    assertions.push(Assertion::within(
        "oracle_schedule_attains_value",
        (oracle.value - oracle_verified).abs(),
        VALUE_TOL,
    ));

    let runs: [(Method, &str, Result<ScheduleResult>); 2] = [
        (
            Method::Exhaustive,
            "exhaustive",
            scheduler::solve_exhaustive(net),
        ),
        (
            Method::CuttingPlane,
            "cutting_plane",
            scheduler::solve_cutting_plane(net, DEFAULT_EPSILON),
        ),
    ];
    for (method, label, run) in runs {
        match run {
            Ok(r) => {
                let (verified, _) = verify_schedule(net, &r.schedule)?;
                assertions.push(Assertion::within(
                    &format!("{label}_value_matches_oracle"),
                    (r.value - oracle.value).abs(),
                    VALUE_TOL,
                ));
                assertions.push(Assertion::within(
                    &format!("{label}_schedule_verified"),
                    (verified - oracle.value).abs(),
                    VALUE_TOL,
                ));
                assertions.push(Assertion {
                    name: format!("{label}_active_states_at_most_n_plus_1"),
                    passed: r.active_states <= n + 1,
                    deviation: Some(r.active_states.saturating_sub(n + 1) as f64),
                    tolerance: 0.0,
                    detail: Some(format!(
                        "{} active states, bound {}",
                        r.active_states,
                        n + 1
                    )),
                });
                methods.push(MethodOutcome {
                    method,
                    value: r.value,
                    verified_value: verified,
                    active_states: r.active_states,
                });
            }
            Err(e) => assertions.push(Assertion::failed(
                &format!("{label}_completed"),
                e.to_string(),
            )),
        }
    }

    if n == 2 && net.is_diamond() {
        let check = check_n2_diamond(net)?;
        assertions.push(Assertion::within(
            "n2_diamond_lambda0_or_lambda3_zero",
            check.deviation,
            VALUE_TOL,
        ));
    }

    Ok(finish(net, oracle.value, methods, assertions))
}

fn finish(
    net: &NetworkModel,
    oracle_value: f64,
    methods: Vec<MethodOutcome>,
    assertions: Vec<Assertion>,
) -> VerificationReport {
    let max_deviation = assertions
        .iter()
        .filter_map(|a| a.deviation)
        .fold(0.0, f64::max);
    VerificationReport {
        fingerprint: fingerprint(net),
        num_relays: net.num_relays(),
        oracle_value,
        passed: assertions.iter().all(|a| a.passed),
        methods,
        assertions,
        max_deviation,
    }
}

/// Outcome of the two-relay diamond check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct N2DiamondCheck {
    pub unrestricted: f64,
    /// Optimum with `λ_0 = 0` (no all-listen state).
    pub without_all_listen: f64,
    /// Optimum with `λ_3 = 0` (no all-transmit state).
    pub without_all_transmit: f64,
    /// `|unrestricted - max(restricted)|`.
    pub deviation: f64,
    pub passed: bool,
}

/// For a two-relay diamond, checks that some optimal schedule leaves either
/// the all-listen state 0 or the all-transmit state 3 unused.
pub fn check_n2_diamond(net: &NetworkModel) -> Result<N2DiamondCheck> {
    if net.num_relays() != 2 || !net.is_diamond() {
        return Err(invalid("the λ0/λ3 check needs a two-relay diamond network"));
    }
    let table = CutRateTable::new(net);
    let unrestricted = full_lp(net, &table, &[])?.value;
    let without_all_listen = full_lp(net, &table, &[0])?.value;
    let without_all_transmit = full_lp(net, &table, &[3])?.value;
    let deviation = (unrestricted - without_all_listen.max(without_all_transmit)).abs();
    Ok(N2DiamondCheck {
        unrestricted,
        without_all_listen,
        without_all_transmit,
        deviation,
        passed: deviation <= VALUE_TOL,
    })
}
