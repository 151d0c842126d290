//! Weight spectra of decision regions and codes.

use serde::{Deserialize, Serialize};

use super::decode::{Decoder, SyndromeTable, DEFAULT_TABLE_BITS};
use super::enumerate::{binomial, Deposit};
use super::{concatenated_subcode, echelon, LinearCode, TieRule};
use crate::error::{Error, Result};
use crate::gf2::{low_mask, GF2Matrix};
use crate::par::{add_counts, Execution};

/// Largest dimension enumerated codeword by codeword.
pub const MAX_ENUMERATION_DIM: usize = 26;
/// Longest code whose decision regions are swept word by word.
pub const MAX_SWEEP_LEN: usize = 32;

/// Weight enumerator `E_γ` of the set of words decoded to the zero codeword.
/// Since that set holds exactly one word per coset, `total() = 2^(n − dim)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetSpectrum {
    counts: Vec<u64>,
}

impl CosetSpectrum {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("spectrum needs at least one entry".into()));
        }
        let n = counts.len() - 1;
        if let Some(g) = (0..=n).find(|&g| counts[g] > binomial(n, g)) {
            return Err(Error::InvalidParameter(format!(
                "spectrum count at weight {g} exceeds C({n}, {g})"
            )));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of words in the region, `N₀`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Largest weight present in the region.
    pub fn d_max(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }
}

/// Codeword weight distribution `A_t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDistribution {
    counts: Vec<u64>,
}

impl WeightDistribution {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.first() != Some(&1) {
            return Err(Error::InvalidParameter(
                "weight distribution must count the zero codeword once".into(),
            ));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Smallest nonzero weight, `None` for the zero code.
    pub fn minimum_distance(&self) -> Option<usize> {
        (1..self.counts.len()).find(|&t| self.counts[t] > 0)
    }
}

pub fn weight_distribution(code: &LinearCode) -> Result<WeightDistribution> {
    weight_distribution_with(code, Execution::default())
}

/// Enumerates all `2^k` codewords in Gray-code order.
pub fn weight_distribution_with(code: &LinearCode, exec: Execution) -> Result<WeightDistribution> {
    let k = code.k();
    if k > MAX_ENUMERATION_DIM {
        return Err(Error::BudgetExceeded {
            what: "weight distribution",
            required: k,
            limit: MAX_ENUMERATION_DIM,
        });
    }
    let n = code.n();
    let rows = code.generator().row_words();
    let low = k.min(14);
    let counts = exec.map_reduce(
        1usize << (k - low),
        |chunk| {
            let mut counts = vec![0u64; n + 1];
            let mut c = code.encode_word((chunk as u64) << low);
            counts[c.count_ones() as usize] += 1;
            for i in 1..1u64 << low {
                c ^= rows[i.trailing_zeros() as usize];
                counts[c.count_ones() as usize] += 1;
            }
            counts
        },
        Vec::new,
        add_counts,
    );
    WeightDistribution::from_counts(counts)
}

pub fn coset_leader_spectrum(code: &LinearCode, tie: TieRule) -> Result<CosetSpectrum> {
    coset_leader_spectrum_with(code, tie, Execution::default())
}

/// `E_γ`: number of weight-γ words that decode to the zero codeword, from
/// the syndrome table when it fits and otherwise by sweeping all `2^n` words.
pub fn coset_leader_spectrum_with(
    code: &LinearCode,
    tie: TieRule,
    exec: Execution,
) -> Result<CosetSpectrum> {
    let r = code.n() - code.k();
    if r <= DEFAULT_TABLE_BITS {
        return match &*code.decoder(tie)? {
            Decoder::Table(t) => CosetSpectrum::from_counts(t.leader_weights()),
            _ => CosetSpectrum::from_counts(
                SyndromeTable::build(code, tie, DEFAULT_TABLE_BITS)?.leader_weights(),
            ),
        };
    }
    if code.n() <= MAX_SWEEP_LEN && code.k() <= MAX_ENUMERATION_DIM {
        return region_sweep(code, tie, exec);
    }
    Err(Error::BudgetExceeded {
        what: "coset leader enumeration",
        required: r,
        limit: DEFAULT_TABLE_BITS,
    })
}

pub fn zero_region_spectrum(gq: &LinearCode, hb: &GF2Matrix, tie: TieRule) -> Result<CosetSpectrum> {
    zero_region_spectrum_with(gq, hb, tie, Execution::default())
}

/// `E_ν^(qb)`: weights of the words `y` that the constrained decoder maps
/// to `u = 0` when the syndrome is `r = 0`. Competitors range over the
/// constrained set `{u : Hb·u = 0}`, so the region is the zero region of the
/// concatenated subcode.
pub fn zero_region_spectrum_with(
    gq: &LinearCode,
    hb: &GF2Matrix,
    tie: TieRule,
    exec: Execution,
) -> Result<CosetSpectrum> {
    let sub = concatenated_subcode(gq, hb)?;
    coset_leader_spectrum_with(&sub, tie, exec)
}

/// One representative per coset (zero on the echelon pivots of `G`), each
/// reduced to its leader by scanning the coset.
fn region_sweep(code: &LinearCode, tie: TieRule, exec: Execution) -> Result<CosetSpectrum> {
    let n = code.n();
    let (pivots, _) = echelon(code.generator());
    let pivot_mask = pivots.iter().fold(0u64, |m, &p| m | (1 << p));
    let deposit = Deposit::new(low_mask(n) & !pivot_mask);
    let codewords: Vec<u64> = (1..1u64 << code.k()).map(|u| code.encode_word(u)).collect();

    let free = n - code.k();
    let chunk_bits = free.min(14);
    let counts = exec.map_reduce(
        1usize << (free - chunk_bits),
        |chunk| {
            let mut counts = vec![0u64; n + 1];
            let base = (chunk as u64) << chunk_bits;
            for idx in base..base + (1u64 << chunk_bits) {
                let y = deposit.apply(idx);
                let (mut best, mut bw) = (y, y.count_ones());
                for &c in &codewords {
                    let e = y ^ c;
                    let ew = e.count_ones();
                    if ew < bw || (ew == bw && tie.prefers(e, best)) {
                        best = e;
                        bw = ew;
                    }
                }
                counts[bw as usize] += 1;
            }
            counts
        },
        Vec::new,
        add_counts,
    );
    CosetSpectrum::from_counts(counts)
}
