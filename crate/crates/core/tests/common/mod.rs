//! Reference computations for tests, written independently of the library
//! internals: determinants by complex Gaussian elimination and brute-force
//! enumeration of cuts.

#![allow(dead_code)]

use hdsched::{NetworkModel, Schedule};
use num_complex::Complex64;

/// `det` of a square complex matrix by elimination with partial pivoting.
pub fn det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        if m[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            m.swap(pivot, col);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            let (upper, lower) = m.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= factor * src;
            }
        }
    }
    d
}

/// `f_s(A)` from its definition: receivers are the destination and the
/// listening relays in `A`, transmitters are the source and the
/// transmitting relays outside `A`.
pub fn cut_rate_ref(net: &NetworkModel, state: u32, cut: u32) -> f64 {
    let n = net.num_relays();
    let transmits = |k: usize| state >> (k - 1) & 1 == 1;
    let in_cut = |k: usize| cut >> (k - 1) & 1 == 1;
    let mut rx = vec![n + 1];
    rx.extend((1..=n).filter(|&k| in_cut(k) && !transmits(k)));
    let mut tx = vec![0];
    tx.extend((1..=n).filter(|&k| !in_cut(k) && transmits(k)));

    let m: Vec<Vec<Complex64>> = rx
        .iter()
        .map(|&i| {
            rx.iter()
                .map(|&j| {
                    let mut v: Complex64 = tx
                        .iter()
                        .map(|&t| net.gain(i, t) * net.gain(j, t).conj())
                        .sum();
                    if i == j {
                        v += 1.0;
                    }
                    v
                })
                .collect()
        })
        .collect();
    det(m).re.log2()
}

/// `Σ_s λ_s f_s(A)`.
pub fn cut_value_ref(net: &NetworkModel, sched: &Schedule, cut: u32) -> f64 {
    sched
        .iter()
        .map(|(s, p)| p * cut_rate_ref(net, s.0, cut))
        .sum()
}

/// Minimum over all `2^N` cuts of the schedule's cut value.
pub fn min_cut_ref(net: &NetworkModel, sched: &Schedule) -> f64 {
    (0..1u32 << net.num_relays())
        .map(|a| cut_value_ref(net, sched, a))
        .fold(f64::INFINITY, f64::min)
}

/// All subsets of `{0..n}` as bit masks.
pub fn masks(n: usize) -> impl Iterator<Item = u32> {
    0..1u32 << n
}

/// A random submodular function on `n` elements with `f(∅) = 0`: concave
/// functions of non-negative weighted cardinalities plus a modular term.
pub fn random_submodular(n: usize, seed: u64) -> hdsched::submodular::TableFunction {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(usize, f64, Vec<f64>)> = (0..3)
        .map(|k| {
            let weights = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            (k, rng.random_range(0.1..3.0), weights)
        })
        .collect();
    let modular: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let values = (0..1u32 << n)
        .map(|m| {
            let members = || (0..n).filter(move |&i| m >> i & 1 == 1);
            let mut v: f64 = members().map(|i| modular[i]).sum();
            for (kind, scale, weights) in &terms {
                let load: f64 = members().map(|i| weights[i]).sum();
                v += scale
                    * match kind {
                        0 => load.sqrt(),
                        1 => load.ln_1p(),
                        _ => load.min(1.5),
                    };
            }
            v
        })
        .collect();
    hdsched::submodular::TableFunction::new(n, values).unwrap()
}

/// `max w^T x` over the submodular polyhedron of `f`, by the library
/// simplex on the explicit constraint list. Requires `w >= 0`.
pub fn polyhedron_max<F: hdsched::submodular::SetFunction>(f: &F, w: &[f64]) -> f64 {
    use hdsched::simplex::{solve, LinearProgram, LpStatus};
    let n = f.ground_size();
    let mut lp = LinearProgram::maximize(w.to_vec());
    for i in 0..n {
        lp = lp.free(i);
    }
    for a in 1..1u32 << n {
        let row = (0..n).map(|i| f64::from(a >> i & 1)).collect();
        lp = lp.le(row, f.eval(a));
    }
    let sol = solve(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal, "{:?}", sol.detail);
    sol.objective_value
}

/// Whether `x` satisfies every constraint of the submodular polyhedron.
pub fn in_polyhedron<F: hdsched::submodular::SetFunction>(f: &F, x: &[f64], tol: f64) -> bool {
    (0..1u32 << f.ground_size()).all(|a| {
        let lhs: f64 = (0..x.len())
            .filter(|&i| a >> i & 1 == 1)
            .map(|i| x[i])
            .sum();
        lhs <= f.eval(a) + tol
    })
}
