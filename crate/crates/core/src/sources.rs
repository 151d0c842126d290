//! The binary source model `Y = X ⊕ Z` and reproducible sampling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVector, MAX_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
        })
    }
}

/// `X ~ Bern(p_h)`, `Z ~ Bern(c_h)` i.i.d. under hypothesis `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisPair {
    p0: f64,
    c0: f64,
    p1: f64,
    c1: f64,
}

impl HypothesisPair {
    /// Checks `0 < p0 <= 0.5`, `p0 <= p1`, `0 < c0 <= c1 <= 0.5`. Since `p1`
    /// only enters through Bernoulli draws it must lie in `[p0, 1)`.
    pub fn new(p0: f64, c0: f64, p1: f64, c1: f64) -> Result<Self> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{what} (p0={p0}, c0={c0}, p1={p1}, c1={c1})")));
        if !(p0 > 0.0 && p0 <= 0.5) {
            return bad("p0 must lie in (0, 0.5]");
        }
        if !(p1 >= p0 && p1 < 1.0) {
            return bad("p1 must lie in [p0, 1)");
        }
        if !(c0 > 0.0 && c0 <= c1 && c1 <= 0.5) {
            return bad("crossovers must satisfy 0 < c0 <= c1 <= 0.5");
        }
        Ok(Self { p0, c0, p1, c1 })
    }

    /// Accepts any probabilities in `[0, 1]`, including degenerate ones.
    #[cfg(test)]
    pub(crate) fn new_unchecked(p0: f64, c0: f64, p1: f64, c1: f64) -> Self {
        for v in [p0, c0, p1, c1] {
            assert!((0.0..=1.0).contains(&v), "probability {v} outside [0, 1]");
        }
        Self { p0, c0, p1, c1 }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn p(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.p0,
            Hypothesis::H1 => self.p1,
        }
    }

    pub fn c(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H0 => self.c0,
            Hypothesis::H1 => self.c1,
        }
    }
}

/// Purpose of a random stream, mixed into the key so calibration and
/// evaluation runs never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamDomain {
    Evaluation,
    Calibration,
}

/// A point in the counter-based seed space: master seed plus stream index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// Independent key for one (domain, hypothesis) arm of an experiment.
    pub fn derive(self, domain: StreamDomain, h: Hypothesis) -> Seed {
        let tag = match (domain, h) {
            (StreamDomain::Evaluation, Hypothesis::H0) => 1,
            (StreamDomain::Evaluation, Hypothesis::H1) => 2,
            (StreamDomain::Calibration, Hypothesis::H0) => 3,
            (StreamDomain::Calibration, Hypothesis::H1) => 4,
        };
        Seed {
            master: splitmix64(splitmix64(self.master) ^ tag),
            stream: self.stream,
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Parses a decimal or `0x`-prefixed hexadecimal 64-bit seed.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse(),
    };
    parsed.map_err(|e| Error::InvalidParameter(format!("seed `{s}`: {e}")))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. Bernoulli(`p`) bits, bit `i` first.
pub(crate) fn bernoulli_word(rng: &mut impl Rng, n: usize, p: f64) -> u64 {
    let mut w = 0u64;
    for i in 0..n {
        if rng.random_bool(p) {
            w |= 1 << i;
        }
    }
    w
}

/// One sample `(x, y = x ⊕ z)` of length `n` under hypothesis `h`.
pub fn sample_pair(
    pair: &HypothesisPair,
    h: Hypothesis,
    n: usize,
    seed: Seed,
) -> Result<(BitVector, BitVector)> {
    if n == 0 || n > MAX_LEN {
        return Err(Error::InvalidLength(n));
    }
    let (x, y) = sample_words(pair, h, n, &mut seed.rng());
    Ok((BitVector::from_word(n, x), BitVector::from_word(n, y)))
}

#[inline]
pub(crate) fn sample_words(pair: &HypothesisPair, h: Hypothesis, n: usize, rng: &mut impl Rng) -> (u64, u64) {
    let x = bernoulli_word(rng, n, pair.p(h));
    let z = bernoulli_word(rng, n, pair.c(h));
    (x, x ^ z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_are_enforced() {
        assert!(HypothesisPair::new(0.5, 0.1, 0.5, 0.5).is_ok());
        assert!(HypothesisPair::new(0.08, 0.1, 0.5, 0.35).is_ok());
        assert!(HypothesisPair::new(0.0, 0.1, 0.5, 0.5).is_err());
        assert!(HypothesisPair::new(0.6, 0.1, 0.7, 0.5).is_err());
        assert!(HypothesisPair::new(0.3, 0.1, 0.2, 0.5).is_err());
        assert!(HypothesisPair::new(0.5, 0.2, 0.5, 0.1).is_err());
        assert!(HypothesisPair::new(0.5, 0.1, 0.5, 0.6).is_err());
        assert!(HypothesisPair::new(0.5, f64::NAN, 0.5, 0.5).is_err());
    }

    #[test]
    fn degenerate_parameters() {
        let pair = HypothesisPair::new_unchecked(0.0, 0.0, 0.0, 0.0);
        for s in 0..20 {
            let (x, y) = sample_pair(&pair, Hypothesis::H0, 40, Seed::new(s)).unwrap();
            assert!(x.is_zero());
            assert_eq!(x, y);
        }
        let copy = HypothesisPair::new_unchecked(0.5, 0.0, 0.5, 0.0);
        let (x, y) = sample_pair(&copy, Hypothesis::H1, 64, Seed::new(1)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn sampling_is_reproducible_and_stream_dependent() {
        let pair = HypothesisPair::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let seed = Seed::new(42).with_stream(7);
        assert_eq!(
            sample_pair(&pair, Hypothesis::H0, 31, seed).unwrap(),
            sample_pair(&pair, Hypothesis::H0, 31, seed).unwrap()
        );
        assert_ne!(
            sample_pair(&pair, Hypothesis::H0, 31, seed).unwrap(),
            sample_pair(&pair, Hypothesis::H0, 31, seed.with_stream(8)).unwrap()
        );
        assert!(sample_pair(&pair, Hypothesis::H0, 0, seed).is_err());
        assert!(sample_pair(&pair, Hypothesis::H0, 65, seed).is_err());
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let s = Seed::new(5);
        let mut keys: Vec<u64> = [StreamDomain::Evaluation, StreamDomain::Calibration]
            .into_iter()
            .flat_map(|d| Hypothesis::BOTH.map(|h| s.derive(d, h).master))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn noise_weight_mean_and_output_marginal() {
        let pair = HypothesisPair::new(0.2, 0.1, 0.5, 0.5).unwrap();
        let (n, trials) = (31usize, 100_000u64);
        let base = Seed::new(2024).derive(StreamDomain::Evaluation, Hypothesis::H0);
        let (mut z_sum, mut y_ones) = (0u64, 0u64);
        for t in 0..trials {
            let (x, y) = sample_pair(&pair, Hypothesis::H0, n, base.with_stream(t)).unwrap();
            z_sum += (x ^ y).weight() as u64;
            y_ones += y.weight() as u64;
        }
        let mean = z_sum as f64 / trials as f64;
        let se = (n as f64 * 0.1 * 0.9 / trials as f64).sqrt();
        assert!((mean - 3.1).abs() < 3.0 * se, "mean noise weight {mean}");

        // P(Y = 1) = p * c = (1 - p) c + (1 - c) p = 0.26 here.
        let bits = (trials * n as u64) as f64;
        let py = y_ones as f64 / bits;
        assert!((py - 0.26).abs() < 3.0 * (0.26 * 0.74 / bits).sqrt(), "P(Y=1) = {py}");
    }

    #[test]
    fn seeds_parse_in_both_bases() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0xff").unwrap(), 255);
        assert_eq!(parse_seed("0xDEAD_BEEF").unwrap(), 0xdead_beef);
        assert!(parse_seed("-1").is_err());
        assert!(parse_seed("0xg").is_err());
    }
}
