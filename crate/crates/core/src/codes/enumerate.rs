//! Enumeration primitives: binomials, fixed-weight patterns, fast syndromes.

use crate::gf2::GF2Matrix;

/// Exact `C(n, k)` for `n <= 64` (0 when `k > n`).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Stays integral: acc = C(n, i) before the step.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflows u64")
}

/// Calls `f` on every `n`-bit word of weight `w`, in increasing
/// lexicographic order (bit 0 most significant). Stops early when `f`
/// returns `false`.
pub(crate) fn for_each_weight_lex(n: usize, w: usize, mut f: impl FnMut(u64) -> bool) {
    if w > n {
        return;
    }
    if w == 0 {
        f(0);
        return;
    }
    // Gosper's hack in the bit-reversed domain, where numeric order is
    // lexicographic order of the original word.
    let shift = 64 - n as u32;
    let mut r: u64 = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    loop {
        if !f(r.reverse_bits() >> shift) {
            return;
        }
        match next_same_weight(r) {
            Some(next) if n == 64 || next >> n == 0 => r = next,
            _ => return,
        }
    }
}

/// Calls `f` on every word of weight `w` supported on `len` bits starting at
/// `offset`, in unspecified order.
pub(crate) fn for_each_weight(offset: usize, len: usize, w: usize, mut f: impl FnMut(u64)) {
    if w > len {
        return;
    }
    if w == 0 {
        f(0);
        return;
    }
    let mut r: u64 = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    loop {
        f(r << offset);
        match next_same_weight(r) {
            Some(next) if len == 64 || next >> len == 0 => r = next,
            _ => return,
        }
    }
}

#[inline]
fn next_same_weight(r: u64) -> Option<u64> {
    let c = r & r.wrapping_neg();
    let s = r.checked_add(c)?;
    Some((((r ^ s) >> 2) / c) | s)
}

/// `M · y` for a fixed matrix with at most 64 rows, evaluated one byte of
/// `y` at a time from precomputed column combinations.
#[derive(Clone, Debug)]
pub(crate) struct SyndromeMap {
    tables: Vec<[u64; 256]>,
}

impl SyndromeMap {
    pub(crate) fn new(m: &GF2Matrix) -> Self {
        let cols: Vec<u64> = (0..m.cols()).map(|j| m.column_word(j)).collect();
        let tables = cols
            .chunks(8)
            .map(|chunk| {
                let mut t = [0u64; 256];
                for (b, slot) in t.iter_mut().enumerate() {
                    *slot = chunk
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| (b >> i) & 1 == 1)
                        .fold(0, |acc, (_, c)| acc ^ c);
                }
                t
            })
            .collect();
        Self { tables }
    }

    #[inline]
    pub(crate) fn apply(&self, y: u64) -> u64 {
        let mut s = 0;
        for (i, t) in self.tables.iter().enumerate() {
            s ^= t[((y >> (8 * i)) & 0xff) as usize];
        }
        s
    }
}

/// Scatters the low bits of `index` into the positions set in `mask`, one
/// byte at a time.
#[derive(Clone, Debug)]
pub(crate) struct Deposit {
    tables: Vec<[u64; 256]>,
}

impl Deposit {
    pub(crate) fn new(mask: u64) -> Self {
        let positions: Vec<u32> = (0..64).filter(|i| (mask >> i) & 1 == 1).collect();
        let tables = positions
            .chunks(8)
            .map(|chunk| {
                let mut t = [0u64; 256];
                for (b, slot) in t.iter_mut().enumerate() {
                    *slot = chunk
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| (b >> i) & 1 == 1)
                        .fold(0, |acc, (_, &p)| acc | (1u64 << p));
                }
                t
            })
            .collect();
        Self { tables }
    }

    #[inline]
    pub(crate) fn apply(&self, index: u64) -> u64 {
        let mut w = 0;
        for (i, t) in self.tables.iter().enumerate() {
            w |= t[((index >> (8 * i)) & 0xff) as usize];
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::lex_key;
    use proptest::prelude::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(31, 15), 300_540_195);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn lex_enumeration_is_complete_and_ordered() {
        for n in 1..=10 {
            for w in 0..=n {
                let mut seen = Vec::new();
                for_each_weight_lex(n, w, |p| {
                    seen.push(p);
                    true
                });
                assert_eq!(seen.len() as u64, binomial(n, w));
                assert!(seen.iter().all(|p| p.count_ones() as usize == w && p >> n == 0));
                assert!(seen.windows(2).all(|x| lex_key(x[0]) < lex_key(x[1])));
            }
        }
        let mut count = 0;
        for_each_weight_lex(64, 1, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 64);
    }

    #[test]
    fn offset_enumeration() {
        let mut seen = Vec::new();
        for_each_weight(3, 4, 2, |p| seen.push(p));
        assert_eq!(seen.len(), 6);
        assert!(seen.iter().all(|p| p & 0b111 == 0 && p >> 7 == 0));
    }

    proptest! {
        #[test]
        fn syndrome_map_matches_mat_vec(rows in proptest::collection::vec(any::<u64>(), 1..30), y in any::<u64>()) {
            let m = GF2Matrix::new(rows.len(), 64, rows).unwrap();
            prop_assert_eq!(SyndromeMap::new(&m).apply(y), m.mul_word(y));
        }

        #[test]
        fn deposit_preserves_popcount(mask in any::<u64>(), idx in any::<u64>()) {
            let d = Deposit::new(mask);
            let k = mask.count_ones();
            let idx = if k == 64 { idx } else { idx & ((1u64 << k) - 1) };
            let w = d.apply(idx);
            prop_assert_eq!(w & !mask, 0);
            prop_assert_eq!(w.count_ones(), idx.count_ones());
        }
    }
}
