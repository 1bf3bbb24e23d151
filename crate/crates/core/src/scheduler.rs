//! Optimal simple schedules.
//!
//! For a relay ordering `π`, the chain cuts `∅ ⊂ {π1} ⊂ … ⊂ [1:N]` give the
//! `(N+1) x 2^N` matrix `F_π` of per-state rates. The small LP
//! `max τ s.t. τ ≤ F_π λ, 1ᵀλ = 1, λ ≥ 0` has `N+2` rows, so a basic optimum
//! uses at most `N+1` states; minimizing its value over all orderings gives
//! the max-min cut-set value `C'`. The cutting-plane solver reaches the same
//! value without enumerating orderings, by alternating an LP over schedules
//! with exhaustive submodular minimization over cuts.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::network::{
    check_schedule, cut_rate_unchecked, ifix_unchecked, CutMask, CutRateTable, NetworkModel,
    StateMask,
};
use crate::schedule::Schedule;
use crate::simplex::{self, LinearProgram, LpSolution, LpStatus};
use crate::submodular::{self, FnSetFunction, Memoized, SetFunction};

/// Largest `N` for which all `N!` orderings are enumerated.
pub const MAX_EXHAUSTIVE_RELAYS: usize = 8;

/// Ties between orderings are resolved within this margin.
pub const PERMUTATION_TIE_TOL: f64 = 1e-9;

/// Agreement required between a schedule's verified min-cut value and the
/// LP value it was produced with.
pub const CERTIFY_TOL: f64 = 1e-7;

/// Default cutting-plane stopping gap, bits per channel use.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// An ordering of the relays `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n + 1];
        for &k in &order {
            if k == 0 || k > n || seen[k] {
                return Err(invalid(format!(
                    "{order:?} is not a permutation of 1..={n}"
                )));
            }
            seen[k] = true;
        }
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    /// All `n!` orderings in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The chain cut `{π1, …, πi}`; `i = 0` is the empty cut.
    pub fn chain_cut(&self, i: usize) -> CutMask {
        CutMask(self.0[..i].iter().fold(0u32, |m, &k| m | 1 << (k - 1)))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Rates of every state across the chain cuts of one ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct FMatrix {
    pub permutation: Permutation,
    /// `rows[i][s] = f_s({π1..πi})`.
    pub rows: Vec<Vec<f64>>,
}

impl FMatrix {
    pub fn num_relays(&self) -> usize {
        self.permutation.len()
    }
}

fn check_permutation(net: &NetworkModel, pi: &Permutation) -> Result<()> {
    if pi.len() != net.num_relays() {
        return Err(invalid(format!(
            "permutation of {} relays for a {}-relay network",
            pi.len(),
            net.num_relays()
        )));
    }
    Permutation::new(pi.0.clone()).map(|_| ())
}

pub fn build_f_matrix(net: &NetworkModel, pi: &Permutation) -> Result<FMatrix> {
    check_permutation(net, pi)?;
    let rows = (0..=pi.len())
        .map(|i| {
            let a = pi.chain_cut(i);
            (0..net.num_states())
                .map(|s| cut_rate_unchecked(net, StateMask(s as u32), a))
                .collect()
        })
        .collect();
    Ok(FMatrix {
        permutation: pi.clone(),
        rows,
    })
}

fn f_matrix_from_table(table: &CutRateTable, pi: &Permutation) -> FMatrix {
    FMatrix {
        permutation: pi.clone(),
        rows: (0..=pi.len())
            .map(|i| table.row(pi.chain_cut(i)).to_vec())
            .collect(),
    }
}

/// Optimum of a max-min game `max_λ min_rows row·λ` over the simplex.
#[derive(Clone, Debug)]
pub(crate) struct MaxMin {
    pub value: f64,
    pub schedule: Schedule,
    /// LP multipliers of the rows; non-negative, summing to one.
    pub row_weights: Vec<f64>,
    pub lp: LpSolution,
}

/// Solves `max τ s.t. τ ≤ rows[k]·λ ∀k, 1ᵀλ = 1, λ ≥ 0, λ_s = 0 for s in
/// `zero_states``.
pub(crate) fn max_min<R: AsRef<[f64]>>(
    num_relays: usize,
    rows: &[R],
    zero_states: &[u32],
) -> Result<MaxMin> {
    let states = 1usize << num_relays;
    let mut lp = LinearProgram::maximize(
        std::iter::once(1.0)
            .chain(std::iter::repeat_n(0.0, states))
            .collect(),
    )
    .free(0);
    for row in rows {
        let row = row.as_ref();
        debug_assert_eq!(row.len(), states);
        let coeffs = std::iter::once(1.0).chain(row.iter().map(|v| -v)).collect();
        lp = lp.le(coeffs, 0.0);
    }
    lp = lp.eq(
        std::iter::once(0.0)
            .chain(std::iter::repeat_n(1.0, states))
            .collect(),
        1.0,
    );
    for &s in zero_states {
        let mut coeffs = vec![0.0; states + 1];
        coeffs[s as usize + 1] = 1.0;
        lp = lp.eq(coeffs, 0.0);
    }
    let sol = simplex::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        // the game is always feasible and bounded
        other => {
            return Err(Error::Numerical(format!(
                "max-min LP returned {other:?}: {}",
                sol.detail.clone().unwrap_or_default()
            )))
        }
    }
    let schedule = Schedule::from_dense(num_relays, &sol.x[1..])?;
    Ok(MaxMin {
        value: sol.x[0],
        schedule,
        row_weights: sol.duals_ub.clone(),
        lp: sol,
    })
}

/// Optimum of the chain-cut LP for one ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct P2Solution {
    pub tau: f64,
    pub schedule: Schedule,
    /// Constraint rows of the LP (`N+2`).
    pub lp_rows: usize,
    /// Unknowns of the LP (`2^N + 1`).
    pub lp_vars: usize,
}

pub fn solve_p2(net: &NetworkModel, pi: &Permutation) -> Result<P2Solution> {
    let f = build_f_matrix(net, pi)?;
    solve_p2_matrix(&f)
}

/// Chain-cut LP on a prebuilt [`FMatrix`].
pub fn solve_p2_matrix(f: &FMatrix) -> Result<P2Solution> {
    let n = f.num_relays();
    let game = max_min(n, &f.rows, &[])?;
    Ok(P2Solution {
        tau: game.value,
        schedule: game.schedule,
        lp_rows: game.lp.duals_ub.len() + game.lp.duals_eq.len(),
        lp_vars: game.lp.x.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exhaustive,
    CuttingPlane,
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exhaustive => "exhaustive",
            Method::CuttingPlane => "cutting-plane",
            Method::Oracle => "oracle",
        })
    }
}

/// Deterministic work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub lp_solves: usize,
    pub pivots: usize,
    /// Cutting-plane iterations (0 for other methods).
    pub iterations: usize,
    /// Cuts in the final working set (cutting plane only).
    pub cuts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleResult {
    /// Max-min cut-set value `C'`, bits per channel use.
    pub value: f64,
    pub schedule: Schedule,
    pub active_states: usize,
    pub winning_permutation: Option<Permutation>,
    /// Cut attaining the minimum for `schedule`.
    pub certifying_cut: CutMask,
    pub method: Method,
    pub stats: SolveStats,
}

/// Min-cut value of a schedule and the cut attaining it.
///
/// Minimizes `g(A) = ifix(A) - ifix(∅)` exhaustively and adds `ifix(∅)` back.
pub fn verify_schedule(net: &NetworkModel, sched: &Schedule) -> Result<(f64, CutMask)> {
    check_schedule(net, sched)?;
    let n = net.num_relays();
    if n > submodular::MAX_GROUND_SIZE {
        return Err(Error::TooLarge(format!(
            "verification enumerates 2^{n} cuts; limit is N = {}",
            submodular::MAX_GROUND_SIZE
        )));
    }
    let rate = Memoized::new(FnSetFunction::new(n, |m| {
        ifix_unchecked(net, sched, CutMask(m))
    }))?;
    let base = rate.eval(0);
    let g = FnSetFunction::new(n, |m| rate.eval(m) - base);
    let (mask, g_min) = submodular::minimize(&g)?;
    Ok((g_min + base, CutMask(mask)))
}

/// Enumerates every ordering and keeps the smallest chain-LP value.
pub fn solve_exhaustive(net: &NetworkModel) -> Result<ScheduleResult> {
    let n = net.num_relays();
    if n > MAX_EXHAUSTIVE_RELAYS {
        return Err(Error::TooLarge(format!(
            "{n}! orderings exceed the exhaustive limit N = {MAX_EXHAUSTIVE_RELAYS}; use the cutting-plane solver"
        )));
    }
    let table = CutRateTable::new(net);
    let perms = Permutation::all(n);
    let solved: Vec<(f64, Schedule, usize)> = perms
        .par_iter()
        .map(|pi| {
            let f = f_matrix_from_table(&table, pi);
            let game = max_min(n, &f.rows, &[])?;
            Ok((game.value, game.schedule, game.lp.pivots))
        })
        .collect::<Result<_>>()?;

    let best = solved
        .iter()
        .map(|(tau, _, _)| *tau)
        .fold(f64::INFINITY, f64::min);
    // the chain LP ignores non-chain cuts, so certify against all of them;
    // among tied orderings the lexicographically first certified one wins
    let mut chosen = None;
    for (idx, (tau, sched, _)) in solved.iter().enumerate() {
        if *tau > best + PERMUTATION_TIE_TOL {
            continue;
        }
        let (v, cut) = verify_schedule(net, sched)?;
        if (v - best).abs() <= CERTIFY_TOL {
            chosen = Some((idx, cut));
            break;
        }
    }
    let Some((idx, certifying_cut)) = chosen else {
        return Err(Error::Numerical(format!(
            "no ordering attaining {best} yields a schedule certified within {CERTIFY_TOL:e}"
        )));
    };
    let schedule = solved[idx].1.clone();
    Ok(ScheduleResult {
        value: best,
        active_states: schedule.active_states(),
        schedule,
        winning_permutation: Some(perms[idx].clone()),
        certifying_cut,
        method: Method::Exhaustive,
        stats: SolveStats {
            lp_solves: perms.len(),
            pivots: solved.iter().map(|(_, _, p)| p).sum(),
            ..SolveStats::default()
        },
    })
}

/// One pass of the cutting-plane loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Value of the LP restricted to the current cut set.
    pub restricted_value: f64,
    /// True min-cut value of that LP's schedule.
    pub min_cut_value: f64,
    /// Cut attaining `min_cut_value`.
    pub min_cut: u32,
    pub cuts_in_set: usize,
}

/// Cutting-plane solver; see [`solve_cutting_plane_traced`].
pub fn solve_cutting_plane(net: &NetworkModel, epsilon: f64) -> Result<ScheduleResult> {
    solve_cutting_plane_traced(net, epsilon).map(|(r, _)| r)
}

/// Alternates an LP over schedules restricted to a working cut set with
/// exhaustive minimization of the schedule's cut function, adding the
/// minimizing cut until it is within `epsilon` of the restricted value.
/// The final schedule is then reduced to at most `N+1` states.
pub fn solve_cutting_plane_traced(
    net: &NetworkModel,
    epsilon: f64,
) -> Result<(ScheduleResult, Vec<IterationRecord>)> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = net.num_relays();
    if n > submodular::MAX_GROUND_SIZE {
        return Err(Error::TooLarge(format!(
            "cut minimization enumerates 2^{n} cuts; limit is N = {}",
            submodular::MAX_GROUND_SIZE
        )));
    }
    let states = net.num_states();
    let rates_for = |a: CutMask| -> Vec<f64> {
        (0..states)
            .into_par_iter()
            .map(|s| cut_rate_unchecked(net, StateMask(s as u32), a))
            .collect()
    };

    let mut cuts = vec![CutMask::EMPTY, CutMask::full(n)];
    let mut rows = vec![rates_for(cuts[0]), rates_for(cuts[1])];
    let mut trace = Vec::new();
    let mut stats = SolveStats::default();

    let (game, value) = loop {
        let game = max_min(n, &rows, &[])?;
        stats.lp_solves += 1;
        stats.pivots += game.lp.pivots;
        let (v, a) = verify_schedule(net, &game.schedule)?;
        trace.push(IterationRecord {
            restricted_value: game.value,
            min_cut_value: v,
            min_cut: a.0,
            cuts_in_set: cuts.len(),
        });
        if v >= game.value - epsilon {
            break (game, v);
        }
        if cuts.contains(&a) {
            return Err(Error::Numerical(format!(
                "cut {} already in the working set but violated by {:e}",
                a.0,
                game.value - v
            )));
        }
        cuts.push(a);
        rows.push(rates_for(a));
    };
    stats.iterations = trace.len();
    stats.cuts = cuts.len();

    // ordering hint: the LP multipliers mix the working cuts into a point of
    // the cube whose coordinate order is an optimal ordering
    let mut hint = vec![0.0; n];
    for (a, &mu) in cuts.iter().zip(&game.row_weights) {
        for (k, h) in hint.iter_mut().enumerate() {
            if a.contains(k + 1) {
                *h += mu.max(0.0);
            }
        }
    }
    let tol = epsilon + PERMUTATION_TIE_TOL;
    let extracted = extract(net, &game.schedule, value, tol, Some(&hint))?;
    stats.lp_solves += extracted.lp_solves;
    let (verified, certifying_cut) = verify_schedule(net, &extracted.schedule)?;
    Ok((
        ScheduleResult {
            value: verified,
            active_states: extracted.schedule.active_states(),
            schedule: extracted.schedule,
            winning_permutation: extracted.permutation,
            certifying_cut,
            method: Method::CuttingPlane,
            stats,
        },
        trace,
    ))
}

struct Extracted {
    schedule: Schedule,
    permutation: Option<Permutation>,
    lp_solves: usize,
}

/// Reduces a schedule of min-cut value `value` to one with at most `N+1`
/// active states and min-cut value at least `value - epsilon`.
///
/// Orders the cuts tight at `sched` by inclusion, completes them to a
/// maximal chain (missing relays in ascending order) and solves the
/// chain-cut LP for the induced ordering. Falls back to the exhaustive
/// solver for `N <= 8`; beyond that, failure is reported as
/// [`Error::ExtractionFailed`] carrying `sched`.
pub fn extract_simple(
    net: &NetworkModel,
    sched: &Schedule,
    value: f64,
    epsilon: f64,
) -> Result<Schedule> {
    extract(net, sched, value, epsilon, None).map(|e| e.schedule)
}

fn extract(
    net: &NetworkModel,
    sched: &Schedule,
    value: f64,
    epsilon: f64,
    hint: Option<&[f64]>,
) -> Result<Extracted> {
    let n = net.num_relays();
    let (current, _) = verify_schedule(net, sched)?;
    if current < value - epsilon {
        return Err(invalid(format!(
            "schedule has min-cut value {current}, below the claimed {value} - {epsilon}"
        )));
    }
    if sched.is_simple() {
        return Ok(Extracted {
            schedule: sched.clone(),
            permutation: None,
            lp_solves: 0,
        });
    }

    let mut candidates: Vec<Permutation> = Vec::new();
    if let Some(w) = hint {
        candidates.push(Permutation(submodular::greedy_order(w)));
    }
    let chain_pi = tight_chain_ordering(net, sched, value, epsilon);
    if !candidates.contains(&chain_pi) {
        candidates.push(chain_pi);
    }

    let mut lp_solves = 0;
    for pi in candidates {
        let p2 = solve_p2(net, &pi)?;
        lp_solves += 1;
        if p2.tau > value + epsilon {
            continue;
        }
        let (v, _) = verify_schedule(net, &p2.schedule)?;
        if v >= value - epsilon && p2.schedule.is_simple() {
            return Ok(Extracted {
                schedule: p2.schedule,
                permutation: Some(pi),
                lp_solves,
            });
        }
    }

    if n <= MAX_EXHAUSTIVE_RELAYS {
        let r = solve_exhaustive(net)?;
        let (v, _) = verify_schedule(net, &r.schedule)?;
        if v >= value - epsilon && r.schedule.is_simple() {
            return Ok(Extracted {
                schedule: r.schedule,
                permutation: r.winning_permutation,
                lp_solves: lp_solves + r.stats.lp_solves,
            });
        }
    }
    Err(Error::ExtractionFailed {
        value,
        schedule: sched.clone(),
        reason: format!("no chain ordering reproduced the value within {epsilon:e} for N = {n}"),
    })
}

/// Ordering induced by the cuts tight at `sched`: the tight cuts are scanned
/// by (cardinality, mask), each superset of the last kept cut extends the
/// chain, and leftover relays are appended in ascending order.
fn tight_chain_ordering(
    net: &NetworkModel,
    sched: &Schedule,
    value: f64,
    epsilon: f64,
) -> Permutation {
    let n = net.num_relays();
    let mut tight: Vec<u32> = (0..1u32 << n)
        .filter(|&m| ifix_unchecked(net, sched, CutMask(m)) <= value + epsilon)
        .collect();
    tight.sort_by_key(|&m| (m.count_ones(), m));
    let mut order = Vec::with_capacity(n);
    let mut last = 0u32;
    for m in tight {
        if m & last == last && m != last {
            order.extend((1..=n).filter(|&k| (m & !last) >> (k - 1) & 1 == 1));
            last = m;
        }
    }
    order.extend((1..=n).filter(|&k| last >> (k - 1) & 1 == 0));
    Permutation(order)
}
