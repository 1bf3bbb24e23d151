use crate::error::{invalid, Result};
use crate::network::StateMask;

/// Probabilities below this are dropped from the support.
pub const PRUNE_TOL: f64 = 1e-12;

/// Tolerance on `sum = 1` accepted when building a schedule from outside data.
pub const INPUT_SUM_TOL: f64 = 1e-9;

/// A probability mass function over relay states, stored sparsely in
/// ascending state order.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    num_relays: usize,
    support: Vec<(u32, f64)>,
}

impl Schedule {
    /// All mass on one state.
    pub fn point_mass(num_relays: usize, s: StateMask) -> Result<Self> {
        Self::from_pairs(num_relays, &[(s.0, 1.0)])
    }

    /// Uniform over all `2^N` states.
    pub fn uniform(num_relays: usize) -> Self {
        let states = 1usize << num_relays;
        let p = 1.0 / states as f64;
        Self {
            num_relays,
            support: (0..states as u32).map(|s| (s, p)).collect(),
        }
    }

    /// Validated construction from `(state, probability)` pairs. The sum must
    /// be within [`INPUT_SUM_TOL`] of one; it is then renormalized.
    pub fn from_pairs(num_relays: usize, pairs: &[(u32, f64)]) -> Result<Self> {
        if num_relays == 0 || num_relays > 31 {
            return Err(invalid(format!("unsupported relay count {num_relays}")));
        }
        let limit = 1u64 << num_relays;
        let mut support: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for &(s, p) in pairs {
            if s as u64 >= limit {
                return Err(invalid(format!("state {s} out of range")));
            }
            if !p.is_finite() || !(0.0..=1.0 + INPUT_SUM_TOL).contains(&p) {
                return Err(invalid(format!(
                    "probability {p} of state {s} not in [0, 1]"
                )));
            }
            support.push((s, p));
        }
        support.sort_by_key(|&(s, _)| s);
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate state in schedule"));
        }
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > INPUT_SUM_TOL {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self::normalized(num_relays, support))
    }

    /// Builds a schedule from a dense weight vector indexed by state, as
    /// returned by an LP. Slightly negative round-off is clamped, tiny
    /// entries are pruned and the rest renormalized.
    pub(crate) fn from_dense(num_relays: usize, weights: &[f64]) -> Result<Self> {
        let support: Vec<(u32, f64)> = weights
            .iter()
            .enumerate()
            .map(|(s, &p)| (s as u32, p.max(0.0)))
            .collect();
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        if !total.is_finite() || (total - 1.0).abs() > 1e-6 {
            return Err(crate::error::Error::Numerical(format!(
                "LP schedule sums to {total}"
            )));
        }
        Ok(Self::normalized(num_relays, support))
    }

    fn normalized(num_relays: usize, mut support: Vec<(u32, f64)>) -> Self {
        support.retain(|&(_, p)| p >= PRUNE_TOL);
        let total: f64 = support.iter().map(|&(_, p)| p).sum();
        for entry in &mut support {
            entry.1 = (entry.1 / total).min(1.0);
        }
        Self {
            num_relays,
            support,
        }
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    /// Number of states with nonzero probability.
    pub fn active_states(&self) -> usize {
        self.support.len()
    }

    /// True when at most `N+1` states are active.
    pub fn is_simple(&self) -> bool {
        self.support.len() <= self.num_relays + 1
    }

    pub fn probability(&self, s: StateMask) -> f64 {
        self.support
            .binary_search_by_key(&s.0, |&(k, _)| k)
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    /// `(state, probability)` over the support in ascending state order.
    pub fn iter(&self) -> impl Iterator<Item = (StateMask, f64)> + '_ {
        self.support.iter().map(|&(s, p)| (StateMask(s), p))
    }

    /// Dense vector of length `2^N`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.num_relays];
        for &(s, p) in &self.support {
            out[s as usize] = p;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prunes_and_renormalizes() {
        let s = Schedule::from_dense(2, &[0.5, 1e-15, -1e-14, 0.5]).unwrap();
        assert_eq!(s.active_states(), 2);
        assert_eq!(s.probability(StateMask(3)), 0.5);
        assert!(s.is_simple());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Schedule::from_pairs(1, &[(0, 0.5)]).is_err());
        assert!(Schedule::from_pairs(1, &[(2, 1.0)]).is_err());
        assert!(Schedule::from_pairs(1, &[(0, 0.5), (0, 0.5)]).is_err());
        assert!(Schedule::from_pairs(1, &[(0, -0.5), (1, 1.5)]).is_err());
        assert!(Schedule::from_pairs(1, &[(0, f64::NAN), (1, 1.0)]).is_err());
    }

    #[test]
    fn uniform_sums_to_one() {
        let s = Schedule::uniform(3);
        let total: f64 = s.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.active_states(), 8);
        assert!(!s.is_simple());
    }
}
