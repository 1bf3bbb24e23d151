//! Seeded random networks.
//!
//! Gains are i.i.d. circularly-symmetric complex normal with unit variance
//! (real and imaginary parts each `N(0, 1/2)`), drawn from ChaCha20 seeded by
//! `rand_chacha::ChaCha20Rng::seed_from_u64`. Entries are drawn row-major
//! over receivers `1..=N+1` and transmitters `0..=N`, skipping the diagonal;
//! the diamond topology draws the same sequence and then zeroes the
//! source-destination and relay-relay links.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::network::NetworkModel;

/// PRNG description recorded in reports.
pub const PRNG_NAME: &str =
    "ChaCha20Rng::seed_from_u64 (rand_chacha 0.9), StandardNormal * sqrt(1/2) per component";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    General,
    Diamond,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::General => "general",
            Topology::Diamond => "diamond",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Topology::General),
            "diamond" => Ok(Topology::Diamond),
            other => Err(invalid(format!("unknown topology {other:?}"))),
        }
    }
}

/// Random network with `num_relays` relays.
pub fn random_network(num_relays: usize, topology: Topology, seed: u64) -> Result<NetworkModel> {
    if num_relays == 0 {
        return Err(invalid("at least one relay is required"));
    }
    let dim = num_relays + 2;
    let dest = num_relays + 1;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut gains = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (rx, row) in gains.iter_mut().enumerate().skip(1) {
        for (tx, g) in row.iter_mut().enumerate().take(dest) {
            if rx == tx {
                continue;
            }
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *g = Complex64::new(re * scale, im * scale);
        }
    }
    if topology == Topology::Diamond {
        gains[dest][0] = Complex64::new(0.0, 0.0);
        for row in &mut gains[1..=num_relays] {
            row[1..=num_relays].fill(Complex64::new(0.0, 0.0));
        }
    }
    NetworkModel::new(num_relays, gains)
}
