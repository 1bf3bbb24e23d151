//! Set functions over `[1:n]`: submodularity checks, the greedy vertex of
//! the submodular polyhedron, the Lovász extension and exhaustive
//! minimization.
//!
//! Subsets are bit masks: bit `i-1` set means element `i` is in the set.

use std::cmp::Ordering;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Largest ground set accepted by the enumerating operations.
pub const MAX_GROUND_SIZE: usize = 20;

/// Up to this size [`is_submodular`] compares every pair of subsets; above
/// it the equivalent diminishing-returns form is checked instead.
pub const FULL_PAIR_CHECK_LIMIT: usize = 10;

/// A real-valued function on the subsets of `[1:n]`.
///
/// Implementations must be pure: the same mask always yields the same value.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;
    fn eval(&self, mask: u32) -> f64;
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn eval(&self, mask: u32) -> f64 {
        (**self).eval(mask)
    }
}

/// Set function given by its full table of `2^n` values.
#[derive(Clone, Debug)]
pub struct TableFunction {
    n: usize,
    values: Vec<f64>,
}

impl TableFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_GROUND_SIZE {
            return Err(too_large(n));
        }
        if values.len() != 1 << n {
            return Err(invalid(format!(
                "table for n={n} needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        Ok(Self { n, values })
    }

    /// Modular function `A -> sum_{i in A} c_i`.
    pub fn modular(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        if n > MAX_GROUND_SIZE {
            return Err(too_large(n));
        }
        let values = (0..1u32 << n)
            .map(|m| {
                weights
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m >> i & 1 == 1)
                    .map(|(_, c)| c)
                    .sum()
            })
            .collect();
        Ok(Self { n, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SetFunction for TableFunction {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn eval(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }
}

/// Wraps a closure as a [`SetFunction`].
pub struct FnSetFunction<F> {
    n: usize,
    f: F,
}

impl<F: Fn(u32) -> f64 + Sync> FnSetFunction<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(u32) -> f64 + Sync> SetFunction for FnSetFunction<F> {
    fn ground_size(&self) -> usize {
        self.n
    }
    fn eval(&self, mask: u32) -> f64 {
        (self.f)(mask)
    }
}

/// Thread-safe per-mask cache in front of an expensive set function.
pub struct Memoized<F> {
    inner: F,
    cache: Vec<OnceLock<f64>>,
}

impl<F: SetFunction> Memoized<F> {
    pub fn new(inner: F) -> Result<Self> {
        let n = inner.ground_size();
        if n > MAX_GROUND_SIZE {
            return Err(too_large(n));
        }
        Ok(Self {
            inner,
            cache: (0..1usize << n).map(|_| OnceLock::new()).collect(),
        })
    }
}

impl<F: SetFunction> SetFunction for Memoized<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn eval(&self, mask: u32) -> f64 {
        *self.cache[mask as usize].get_or_init(|| self.inner.eval(mask))
    }
}

fn too_large(n: usize) -> Error {
    Error::TooLarge(format!(
        "ground set of size {n} exceeds the enumeration limit {MAX_GROUND_SIZE}"
    ))
}

fn check_size<F: SetFunction + ?Sized>(f: &F) -> Result<usize> {
    let n = f.ground_size();
    if n > MAX_GROUND_SIZE {
        return Err(too_large(n));
    }
    Ok(n)
}

/// Outcome of [`is_submodular`].
#[derive(Clone, Debug, PartialEq)]
pub enum SubmodularCheck {
    Pass,
    /// `f(a1) + f(a2) < f(a1 | a2) + f(a1 & a2) - tol`, by `violation`.
    Counterexample {
        a1: u32,
        a2: u32,
        violation: f64,
    },
}

impl SubmodularCheck {
    pub fn passed(&self) -> bool {
        matches!(self, SubmodularCheck::Pass)
    }
}

/// Tests `f(A1) + f(A2) >= f(A1 ∪ A2) + f(A1 ∩ A2) - tol`.
///
/// Returns the worst violating pair (ties go to the smallest masks).
pub fn is_submodular<F: SetFunction + ?Sized>(f: &F, tol: f64) -> Result<SubmodularCheck> {
    let n = check_size(f)?;
    let size = 1u32 << n;
    let values: Vec<f64> = (0..size).into_par_iter().map(|m| f.eval(m)).collect();
    let violation = |a1: u32, a2: u32| {
        values[(a1 | a2) as usize] + values[(a1 & a2) as usize]
            - values[a1 as usize]
            - values[a2 as usize]
    };

    let worst = if n <= FULL_PAIR_CHECK_LIMIT {
        (0..size)
            .into_par_iter()
            .filter_map(|a1| {
                let mut best: Option<(f64, u32, u32)> = None;
                for a2 in (a1 + 1)..size {
                    // nested pairs hold with equality
                    if a1 & a2 == a1 || a1 & a2 == a2 {
                        continue;
                    }
                    let v = violation(a1, a2);
                    if v > tol && best.is_none_or(|b| v > b.0) {
                        best = Some((v, a1, a2));
                    }
                }
                best
            })
            .reduce_with(pick_worst)
    } else {
        // f(A+i) + f(A+j) >= f(A+i+j) + f(A) for all A and i, j outside A
        (0..size)
            .into_par_iter()
            .filter_map(|a| {
                let mut best: Option<(f64, u32, u32)> = None;
                for i in 0..n {
                    if a >> i & 1 == 1 {
                        continue;
                    }
                    for j in (i + 1)..n {
                        if a >> j & 1 == 1 {
                            continue;
                        }
                        let (ai, aj) = (a | 1 << i, a | 1 << j);
                        let v = violation(ai, aj);
                        if v > tol && best.is_none_or(|b| v > b.0) {
                            best = Some((v, ai.min(aj), ai.max(aj)));
                        }
                    }
                }
                best
            })
            .reduce_with(pick_worst)
    };

    Ok(match worst {
        None => SubmodularCheck::Pass,
        Some((violation, a1, a2)) => SubmodularCheck::Counterexample { a1, a2, violation },
    })
}

fn pick_worst(x: (f64, u32, u32), y: (f64, u32, u32)) -> (f64, u32, u32) {
    match x.0.total_cmp(&y.0) {
        Ordering::Greater => x,
        Ordering::Less => y,
        Ordering::Equal => {
            if (x.1, x.2) <= (y.1, y.2) {
                x
            } else {
                y
            }
        }
    }
}

/// Vertex of the submodular polyhedron picked by the greedy algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyVertex {
    /// `x[i-1]` is the coordinate of element `i`.
    pub x: Vec<f64>,
    /// 1-based elements in non-increasing weight order.
    pub permutation: Vec<usize>,
}

/// Elements sorted by descending weight, ties by ascending index (1-based).
pub fn greedy_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=w.len()).collect();
    order.sort_by(|&a, &b| w[b - 1].total_cmp(&w[a - 1]));
    order
}

fn check_weights<F: SetFunction + ?Sized>(f: &F, w: &[f64]) -> Result<usize> {
    let n = check_size(f)?;
    if w.len() != n {
        return Err(invalid(format!(
            "weight vector has length {}, ground set has {n} elements",
            w.len()
        )));
    }
    if w.iter().any(|x| !x.is_finite()) {
        return Err(invalid("weights must be finite"));
    }
    let empty = f.eval(0);
    if empty != 0.0 {
        return Err(invalid(format!(
            "set function must vanish on ∅, got {empty}"
        )));
    }
    Ok(n)
}

/// Greedy vertex: `x_{π_i} = f({π_1..π_i}) - f({π_1..π_{i-1}})`.
pub fn greedy_vertex<F: SetFunction + ?Sized>(f: &F, w: &[f64]) -> Result<GreedyVertex> {
    let n = check_weights(f, w)?;
    let permutation = greedy_order(w);
    let mut x = vec![0.0; n];
    let mut prefix = 0u32;
    let mut prev = 0.0;
    for &e in &permutation {
        prefix |= 1 << (e - 1);
        let cur = f.eval(prefix);
        x[e - 1] = cur - prev;
        prev = cur;
    }
    Ok(GreedyVertex { x, permutation })
}

/// Lovász extension at `w`.
///
/// Evaluated in level-set form `sum_i (w_{π_i} - w_{π_{i+1}}) f(S_i)`, which
/// equals `w^T x` for the greedy vertex and reproduces `f(A)` bit-exactly at
/// indicator vectors.
pub fn lovasz_eval<F: SetFunction + ?Sized>(f: &F, w: &[f64]) -> Result<f64> {
    let n = check_weights(f, w)?;
    let order = greedy_order(w);
    let mut prefix = 0u32;
    let mut total = 0.0;
    for (i, &e) in order.iter().enumerate() {
        prefix |= 1 << (e - 1);
        let next = if i + 1 < n { w[order[i + 1] - 1] } else { 0.0 };
        let step = w[e - 1] - next;
        if step != 0.0 {
            total += step * f.eval(prefix);
        }
    }
    Ok(total)
}

/// Exhaustive minimization over all `2^n` subsets.
///
/// Returns the minimizer of smallest cardinality, ties by smallest mask.
pub fn minimize<F: SetFunction + ?Sized>(f: &F) -> Result<(u32, f64)> {
    let n = check_size(f)?;
    let better = |x: (f64, u32), y: (f64, u32)| match x.0.total_cmp(&y.0) {
        Ordering::Less => x,
        Ordering::Greater => y,
        Ordering::Equal => {
            if (x.1.count_ones(), x.1) <= (y.1.count_ones(), y.1) {
                x
            } else {
                y
            }
        }
    };
    let (value, mask) = if n >= 12 {
        (0..1u32 << n)
            .into_par_iter()
            .map(|m| (f.eval(m), m))
            .reduce_with(better)
            .expect("non-empty")
    } else {
        (0..1u32 << n)
            .map(|m| (f.eval(m), m))
            .reduce(better)
            .expect("non-empty")
    };
    Ok((mask, value))
}
