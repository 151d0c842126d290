//! Exact nearest-codeword decoders.
//!
//! Three strategies, all returning the same codeword for every input:
//! a full syndrome table, a scan over all codewords, and a meet-in-the-middle
//! search over error patterns split into two halves of the coordinates.

use std::sync::OnceLock;

use super::enumerate::{binomial, for_each_weight, for_each_weight_lex, SyndromeMap};
use super::{LinearCode, TieRule};
use crate::error::{Error, Result};

/// Largest redundancy `n − k` for which a syndrome table is built implicitly.
pub const DEFAULT_TABLE_BITS: usize = 24;
/// Largest redundancy accepted when a table is explicitly requested.
pub const LARGE_TABLE_BITS: usize = 27;
/// Codeword scans are used up to this dimension.
const MAX_SCAN_DIM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    SyndromeTable,
    CodewordScan,
    SplitSearch,
}

/// Coset leader of every syndrome under one tie rule.
#[derive(Clone, Debug)]
pub struct SyndromeTable {
    n: usize,
    r: usize,
    tie: TieRule,
    map: SyndromeMap,
    leaders: Vec<u64>,
    covering_radius: usize,
}

impl SyndromeTable {
    /// Builds the table by visiting error patterns in order of weight, and
    /// within a weight in the tie rule's order, until every syndrome has a
    /// leader. Fails when `n − k > max_bits`.
    pub fn build(code: &LinearCode, tie: TieRule, max_bits: usize) -> Result<Self> {
        let (n, r) = (code.n(), code.n() - code.k());
        if r > max_bits.min(LARGE_TABLE_BITS) {
            return Err(Error::BudgetExceeded {
                what: "syndrome table",
                required: r,
                limit: max_bits.min(LARGE_TABLE_BITS),
            });
        }
        let map = SyndromeMap::new(code.parity_check());
        let size = 1usize << r;
        let mut leaders = vec![0u64; size];
        // Leader weight + 1, or 0 while unassigned.
        let mut level = vec![0u8; size];
        let mut remaining = size;
        let mut covering_radius = 0;
        for w in 0..=n {
            let tag = w as u8 + 1;
            for_each_weight_lex(n, w, |p| {
                let s = map.apply(p) as usize;
                if level[s] == 0 {
                    level[s] = tag;
                    leaders[s] = p;
                    remaining -= 1;
                } else if level[s] == tag && tie.prefers(p, leaders[s]) {
                    leaders[s] = p;
                }
                // Lexicographic visiting order makes the first hit final
                // for the smallest-pattern rule.
                !(remaining == 0 && tie == TieRule::SmallestPattern)
            });
            if remaining < size {
                covering_radius = w;
            }
            if remaining == 0 {
                break;
            }
        }
        Ok(Self {
            n,
            r,
            tie,
            map,
            leaders,
            covering_radius,
        })
    }

    /// Reassembles a table from stored leaders, validating every entry.
    pub(crate) fn from_leaders(code: &LinearCode, tie: TieRule, leaders: Vec<u64>) -> Result<Self> {
        let (n, r) = (code.n(), code.n() - code.k());
        if leaders.len() != 1usize << r {
            return Err(Error::Cache("syndrome table has the wrong number of entries".into()));
        }
        let map = SyndromeMap::new(code.parity_check());
        let mut covering_radius = 0;
        for (s, &l) in leaders.iter().enumerate() {
            if l >> n != 0 || map.apply(l) != s as u64 {
                return Err(Error::Cache(format!("stored leader for syndrome {s} is inconsistent")));
            }
            covering_radius = covering_radius.max(l.count_ones() as usize);
        }
        Ok(Self {
            n,
            r,
            tie,
            map,
            leaders,
            covering_radius,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of syndrome bits, `n − k`.
    pub fn redundancy(&self) -> usize {
        self.r
    }

    pub fn tie(&self) -> TieRule {
        self.tie
    }

    pub fn len(&self) -> usize {
        self.leaders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaders.is_empty()
    }

    pub fn covering_radius(&self) -> usize {
        self.covering_radius
    }

    pub fn leaders(&self) -> &[u64] {
        &self.leaders
    }

    /// Leader weight histogram, indexed by weight `0..=n`.
    pub fn leader_weights(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n + 1];
        for l in &self.leaders {
            counts[l.count_ones() as usize] += 1;
        }
        counts
    }

    #[inline]
    pub fn decode_word(&self, y: u64) -> u64 {
        y ^ self.leaders[self.map.apply(y) as usize]
    }
}

/// All codewords of a low-dimension code.
#[derive(Clone, Debug)]
pub(crate) struct CodewordScan {
    tie: TieRule,
    codewords: Vec<u64>,
}

impl CodewordScan {
    fn new(code: &LinearCode, tie: TieRule) -> Self {
        let codewords = (0..1u64 << code.k()).map(|u| code.encode_word(u)).collect();
        Self { tie, codewords }
    }

    #[inline]
    fn decode_word(&self, y: u64) -> u64 {
        let mut best = 0u64;
        let mut best_key = self.tie.key(y);
        for &c in &self.codewords[1..] {
            let e = y ^ c;
            if e.count_ones() <= best_key.0 {
                let key = self.tie.key(e);
                if key < best_key {
                    best_key = key;
                    best = c;
                }
            }
        }
        best
    }
}

/// Sorted `(syndrome, pattern)` pairs for all patterns of one weight on one
/// half of the coordinates, packed as `syndrome << 32 | local pattern`.
#[derive(Debug)]
struct HalfTable {
    entries: Vec<u64>,
    buckets: Vec<u32>,
    shift: u32,
}

impl HalfTable {
    fn build(map: &SyndromeMap, r: usize, offset: usize, len: usize, w: usize) -> Self {
        let mut entries = Vec::with_capacity(binomial(len, w) as usize);
        for_each_weight(0, len, w, |p| entries.push((map.apply(p << offset) << 32) | p));
        entries.sort_unstable();
        // About four entries per bucket.
        let bits = (usize::BITS - entries.len().leading_zeros())
            .saturating_sub(2)
            .min(r as u32);
        let shift = r as u32 - bits;
        let mut buckets = Vec::with_capacity((1 << bits) + 1);
        let mut i = 0usize;
        for b in 0..=(1u64 << bits) {
            while i < entries.len() && (entries[i] >> 32) >> shift < b {
                i += 1;
            }
            buckets.push(i as u32);
        }
        Self {
            entries,
            buckets,
            shift,
        }
    }

    #[inline]
    fn matches(&self, s: u64) -> impl Iterator<Item = u64> + '_ {
        let b = (s >> self.shift) as usize;
        let range = self.buckets[b] as usize..self.buckets[b + 1] as usize;
        self.entries[range]
            .iter()
            .filter(move |&&e| e >> 32 == s)
            .map(|&e| e & 0xffff_ffff)
    }
}

/// Meet-in-the-middle decoder: the lightest error pattern `e` with
/// `H e = H y` is found by splitting `e` into a left and right half and
/// matching half-syndromes. Half tables are built per weight on demand.
#[derive(Debug)]
pub struct SplitDecoder {
    n: usize,
    r: usize,
    tie: TieRule,
    left_len: usize,
    map: SyndromeMap,
    halves: [Vec<OnceLock<HalfTable>>; 2],
}

impl SplitDecoder {
    pub fn new(code: &LinearCode, tie: TieRule) -> Result<Self> {
        let (n, r) = (code.n(), code.n() - code.k());
        if r > 32 || n > 64 {
            return Err(Error::BudgetExceeded {
                what: "split decoder syndrome width",
                required: r,
                limit: 32,
            });
        }
        let left_len = n.div_ceil(2);
        let right_len = n - left_len;
        Ok(Self {
            n,
            r,
            tie,
            left_len,
            map: SyndromeMap::new(code.parity_check()),
            halves: [
                (0..=left_len).map(|_| OnceLock::new()).collect(),
                (0..=right_len).map(|_| OnceLock::new()).collect(),
            ],
        })
    }

    fn half(&self, side: usize, w: usize) -> &HalfTable {
        let (offset, len) = self.span(side);
        self.halves[side][w].get_or_init(|| HalfTable::build(&self.map, self.r, offset, len, w))
    }

    fn span(&self, side: usize) -> (usize, usize) {
        if side == 0 {
            (0, self.left_len)
        } else {
            (self.left_len, self.n - self.left_len)
        }
    }

    pub fn decode_word(&self, y: u64) -> u64 {
        let s = self.map.apply(y);
        if s == 0 {
            return y;
        }
        let (l, rl) = (self.left_len, self.n - self.left_len);
        for w in 1..=self.n {
            let mut best: Option<u64> = None;
            for a in w.saturating_sub(rl)..=w.min(l) {
                let b = w - a;
                // Walk the smaller half, look up the larger one.
                let (small, big, ws, wb) = if binomial(l, a) <= binomial(rl, b) {
                    (0, 1, a, b)
                } else {
                    (1, 0, b, a)
                };
                let (off_s, _) = self.span(small);
                let (off_b, _) = self.span(big);
                let big_table = self.half(big, wb);
                for &e in &self.half(small, ws).entries {
                    let part = (e & 0xffff_ffff) << off_s;
                    for other in big_table.matches(s ^ (e >> 32)) {
                        let cand = part | (other << off_b);
                        best = Some(match best {
                            Some(cur) => self.tie.pick(cand, cur),
                            None => cand,
                        });
                    }
                }
            }
            if let Some(e) = best {
                return y ^ e;
            }
        }
        unreachable!("every syndrome has some error pattern of weight <= n")
    }
}

#[derive(Debug)]
pub(crate) enum Decoder {
    Table(SyndromeTable),
    Scan(CodewordScan),
    Split(SplitDecoder),
}

impl Decoder {
    pub(crate) fn build(code: &LinearCode, tie: TieRule) -> Result<Self> {
        let r = code.n() - code.k();
        if r <= DEFAULT_TABLE_BITS {
            Ok(Decoder::Table(SyndromeTable::build(code, tie, DEFAULT_TABLE_BITS)?))
        } else if code.k() <= MAX_SCAN_DIM {
            Ok(Decoder::Scan(CodewordScan::new(code, tie)))
        } else {
            Ok(Decoder::Split(SplitDecoder::new(code, tie)?))
        }
    }

    pub(crate) fn kind(&self) -> DecoderKind {
        match self {
            Decoder::Table(_) => DecoderKind::SyndromeTable,
            Decoder::Scan(_) => DecoderKind::CodewordScan,
            Decoder::Split(_) => DecoderKind::SplitSearch,
        }
    }

    /// Nearest codeword to `y`.
    #[inline]
    pub(crate) fn decode(&self, y: u64) -> u64 {
        match self {
            Decoder::Table(t) => t.decode_word(y),
            Decoder::Scan(s) => s.decode_word(y),
            Decoder::Split(s) => s.decode_word(y),
        }
    }
}
