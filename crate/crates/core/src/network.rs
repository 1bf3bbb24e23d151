//! Gaussian half-duplex relay network and its per-state cut rates.
//!
//! Node indexing: `0` is the source, `1..=N` are the relays and `N+1` is the
//! destination. Every transmitter uses an independent unit-power Gaussian
//! input and every receiver sees unit-variance noise, so the rate across a
//! cut in a fixed state is `log2 det(I + G G^H)` for the appropriate
//! sub-matrix `G` of the gain matrix.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::linalg::{hermitian_log2_det, CMatrix};
use crate::schedule::Schedule;

/// Largest relay count a [`NetworkModel`] accepts (masks are `u32`).
pub const MAX_RELAYS: usize = 24;

/// Largest accepted gain magnitude.
pub const MAX_GAIN: f64 = 1e100;

/// Complex gain matrix of an N-relay half-duplex network.
///
/// Entry `(i, j)` is the gain from transmitter `j` to receiver `i`. Row 0
/// (source as receiver), column `N+1` (destination as transmitter) and the
/// diagonal are never read.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkModel {
    num_relays: usize,
    gains: Vec<Complex64>,
}

impl NetworkModel {
    /// Builds a network from an `(N+2) x (N+2)` gain matrix.
    pub fn new(num_relays: usize, gains: Vec<Vec<Complex64>>) -> Result<Self> {
        if num_relays == 0 || num_relays > MAX_RELAYS {
            return Err(invalid(format!(
                "num_relays must be in [1, {MAX_RELAYS}], got {num_relays}"
            )));
        }
        let dim = num_relays + 2;
        if gains.len() != dim || gains.iter().any(|row| row.len() != dim) {
            return Err(invalid(format!(
                "gain matrix must be {dim}x{dim} for {num_relays} relays"
            )));
        }
        let flat: Vec<Complex64> = gains.into_iter().flatten().collect();
        if flat.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(invalid("gain matrix contains a non-finite entry"));
        }
        // |g|^2 summed over a cut must stay finite
        if flat.iter().any(|g| g.norm() > MAX_GAIN) {
            return Err(invalid(format!("gain magnitude exceeds {MAX_GAIN:e}")));
        }
        Ok(Self {
            num_relays,
            gains: flat,
        })
    }

    /// All-zero network.
    pub fn zeros(num_relays: usize) -> Result<Self> {
        let dim = num_relays + 2;
        Self::new(num_relays, vec![vec![Complex64::new(0.0, 0.0); dim]; dim])
    }

    /// Diamond network with real gains: `source_to_relay[k-1]` is the gain
    /// into relay `k`, `relay_to_dest[k-1]` the gain out of relay `k`.
    pub fn diamond(source_to_relay: &[f64], relay_to_dest: &[f64]) -> Result<Self> {
        if source_to_relay.len() != relay_to_dest.len() {
            return Err(invalid("diamond gain vectors differ in length"));
        }
        let n = source_to_relay.len();
        let mut net = Self::zeros(n)?;
        for k in 1..=n {
            net.gains[k * (n + 2)] = Complex64::new(source_to_relay[k - 1], 0.0);
            net.gains[(n + 1) * (n + 2) + k] = Complex64::new(relay_to_dest[k - 1], 0.0);
        }
        Ok(net)
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    /// Number of joint relay states, `2^N`.
    pub fn num_states(&self) -> usize {
        1 << self.num_relays
    }

    pub fn destination(&self) -> usize {
        self.num_relays + 1
    }

    /// Gain from transmitter `tx` to receiver `rx`.
    #[inline]
    pub fn gain(&self, rx: usize, tx: usize) -> Complex64 {
        self.gains[rx * (self.num_relays + 2) + tx]
    }

    /// The full matrix as rows, for serialization.
    pub fn gain_rows(&self) -> Vec<Vec<Complex64>> {
        self.gains
            .chunks(self.num_relays + 2)
            .map(<[Complex64]>::to_vec)
            .collect()
    }

    /// Returns a copy with every gain multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            num_relays: self.num_relays,
            gains: self.gains.iter().map(|g| g * factor).collect(),
        }
    }

    /// No direct source-destination link and no relay-to-relay links.
    pub fn is_diamond(&self) -> bool {
        let zero = Complex64::new(0.0, 0.0);
        if self.gain(self.destination(), 0) != zero {
            return false;
        }
        (1..=self.num_relays)
            .all(|i| (1..=self.num_relays).all(|j| i == j || self.gain(i, j) == zero))
    }

    fn check_mask(&self, bits: u32, what: &str) -> Result<()> {
        if (bits as u64) >= (1u64 << self.num_relays) {
            return Err(invalid(format!(
                "{what} mask {bits} out of range for {} relays",
                self.num_relays
            )));
        }
        Ok(())
    }
}

/// Joint listen/transmit state: bit `k-1` set means relay `k` transmits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateMask(pub u32);

/// Cut: bit `k-1` set means relay `k` sits on the destination side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CutMask(pub u32);

impl StateMask {
    #[inline]
    pub fn transmits(self, relay: usize) -> bool {
        self.0 >> (relay - 1) & 1 == 1
    }
}

impl CutMask {
    pub const EMPTY: CutMask = CutMask(0);

    /// The cut holding every relay.
    pub fn full(num_relays: usize) -> Self {
        CutMask(((1u64 << num_relays) - 1) as u32)
    }

    #[inline]
    pub fn contains(self, relay: usize) -> bool {
        self.0 >> (relay - 1) & 1 == 1
    }

    /// 1-based relay indices in the cut.
    pub fn relays(self) -> Vec<usize> {
        (1..=32).filter(|&k| self.0 >> (k - 1) & 1 == 1).collect()
    }
}

/// Rate `f_s(A)` across cut `a` when the relays are in state `s`.
pub fn cut_rate(net: &NetworkModel, s: StateMask, a: CutMask) -> Result<f64> {
    net.check_mask(s.0, "state")?;
    net.check_mask(a.0, "cut")?;
    Ok(cut_rate_unchecked(net, s, a))
}

pub(crate) fn cut_rate_unchecked(net: &NetworkModel, s: StateMask, a: CutMask) -> f64 {
    let n = net.num_relays;
    // receivers: destination plus listening relays on the destination side
    let mut rx = Vec::with_capacity(n + 1);
    rx.push(n + 1);
    // transmitters: source plus transmitting relays on the source side
    let mut tx = Vec::with_capacity(n + 1);
    tx.push(0);
    for k in 1..=n {
        match (a.contains(k), s.transmits(k)) {
            (true, false) => rx.push(k),
            (false, true) => tx.push(k),
            _ => {}
        }
    }
    let mut g = CMatrix::zeros(rx.len(), tx.len());
    for (i, &r) in rx.iter().enumerate() {
        for (j, &t) in tx.iter().enumerate() {
            g.set(i, j, net.gain(r, t));
        }
    }
    let rate = hermitian_log2_det(&g.gram_plus_identity())
        .expect("I + G G^H is positive definite for finite gains");
    rate.max(0.0)
}

/// Schedule-weighted cut rate `sum_s lambda_s f_s(A)`, summed over the
/// schedule's support only.
pub fn ifix(net: &NetworkModel, sched: &Schedule, a: CutMask) -> Result<f64> {
    check_schedule(net, sched)?;
    net.check_mask(a.0, "cut")?;
    Ok(ifix_unchecked(net, sched, a))
}

pub(crate) fn ifix_unchecked(net: &NetworkModel, sched: &Schedule, a: CutMask) -> f64 {
    sched
        .iter()
        .map(|(s, p)| p * cut_rate_unchecked(net, s, a))
        .sum()
}

/// `ifix(A) - ifix(∅)`; exactly zero at the empty cut.
pub fn g_normalized(net: &NetworkModel, sched: &Schedule, a: CutMask) -> Result<f64> {
    Ok(ifix(net, sched, a)? - ifix(net, sched, CutMask::EMPTY)?)
}

pub(crate) fn check_schedule(net: &NetworkModel, sched: &Schedule) -> Result<()> {
    if sched.num_relays() != net.num_relays {
        return Err(invalid(format!(
            "schedule is for {} relays, network has {}",
            sched.num_relays(),
            net.num_relays
        )));
    }
    Ok(())
}

/// Every `f_s(A)` of a network, indexed by cut then state.
#[derive(Clone, Debug)]
pub struct CutRateTable {
    num_relays: usize,
    rates: Vec<f64>,
}

impl CutRateTable {
    /// Evaluates all `4^N` cut rates (in parallel over cuts).
    pub fn new(net: &NetworkModel) -> Self {
        let states = net.num_states();
        let rates = (0..states)
            .into_par_iter()
            .flat_map_iter(|a| {
                (0..states)
                    .map(move |s| cut_rate_unchecked(net, StateMask(s as u32), CutMask(a as u32)))
            })
            .collect();
        Self {
            num_relays: net.num_relays,
            rates,
        }
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    /// Rates of every state across cut `a`.
    #[inline]
    pub fn row(&self, a: CutMask) -> &[f64] {
        let states = 1usize << self.num_relays;
        let start = a.0 as usize * states;
        &self.rates[start..start + states]
    }

    #[inline]
    pub fn get(&self, s: StateMask, a: CutMask) -> f64 {
        self.row(a)[s.0 as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_diamond() -> NetworkModel {
        NetworkModel::diamond(&[1.0], &[1.0]).unwrap()
    }

    #[test]
    fn zero_network_carries_nothing() {
        let net = NetworkModel::zeros(3).unwrap();
        for s in 0..8 {
            for a in 0..8 {
                assert_eq!(cut_rate(&net, StateMask(s), CutMask(a)).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn single_relay_diamond_rates() {
        let net = unit_diamond();
        let rate = |s, a| cut_rate(&net, StateMask(s), CutMask(a)).unwrap();
        assert!((rate(0, 1) - 1.0).abs() < 1e-15);
        assert!((rate(1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(rate(0, 0), 0.0);
        assert_eq!(rate(1, 1), 0.0);
    }

    #[test]
    fn ifix_and_g_on_diamond() {
        let net = unit_diamond();
        let half = Schedule::from_pairs(1, &[(0, 0.5), (1, 0.5)]).unwrap();
        assert!((ifix(&net, &half, CutMask(1)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(g_normalized(&net, &half, CutMask::EMPTY).unwrap(), 0.0);
        assert!(g_normalized(&net, &half, CutMask(1)).unwrap().abs() < 1e-15);

        let point = Schedule::point_mass(1, StateMask(1)).unwrap();
        assert_eq!(
            ifix(&net, &point, CutMask(0)).unwrap(),
            cut_rate(&net, StateMask(1), CutMask(0)).unwrap()
        );
    }

    #[test]
    fn masks_out_of_range_are_rejected() {
        let net = unit_diamond();
        assert!(cut_rate(&net, StateMask(2), CutMask(0)).is_err());
        assert!(cut_rate(&net, StateMask(0), CutMask(2)).is_err());
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        let z = Complex64::new(0.0, 0.0);
        assert!(NetworkModel::new(1, vec![vec![z; 3]; 2]).is_err());
        assert!(NetworkModel::new(0, vec![]).is_err());
        let mut rows = vec![vec![z; 3]; 3];
        rows[1][0] = Complex64::new(f64::NAN, 0.0);
        assert!(NetworkModel::new(1, rows).is_err());
    }

    #[test]
    fn ignored_entries_do_not_matter() {
        let mut rows = unit_diamond().gain_rows();
        rows[0][1] = Complex64::new(5.0, 1.0); // source as receiver
        rows[1][2] = Complex64::new(0.0, 0.0); // destination as transmitter
        rows[1][1] = Complex64::new(9.0, 9.0); // diagonal
        rows[2][2] = Complex64::new(3.0, 0.0);
        let noisy = NetworkModel::new(1, rows).unwrap();
        let clean = unit_diamond();
        for s in 0..2 {
            for a in 0..2 {
                assert_eq!(
                    cut_rate(&noisy, StateMask(s), CutMask(a)).unwrap(),
                    cut_rate(&clean, StateMask(s), CutMask(a)).unwrap()
                );
            }
        }
    }

    #[test]
    fn diamond_detection() {
        assert!(unit_diamond().is_diamond());
        let mut rows = unit_diamond().gain_rows();
        rows[2][0] = Complex64::new(0.1, 0.0);
        assert!(!NetworkModel::new(1, rows).unwrap().is_diamond());
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let net = NetworkModel::diamond(&[1.0, 0.5], &[2.0, 0.3]).unwrap();
        let table = CutRateTable::new(&net);
        for a in 0..4 {
            for s in 0..4 {
                assert_eq!(
                    table.get(StateMask(s), CutMask(a)),
                    cut_rate(&net, StateMask(s), CutMask(a)).unwrap()
                );
            }
        }
    }
}
