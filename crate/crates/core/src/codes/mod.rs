//! Short binary linear block codes.
//!
//! Codes use the row convention throughout: a message row-vector `u` of
//! length `k` is encoded as `u · G`. Column-convention generator matrices
//! (`x = G u`) are the transpose of what this module stores.

mod binning;
mod cache;
pub(crate) mod decode;
mod enumerate;
mod spectrum;

use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf2::{lex_key, rref, BitVector, GF2Matrix, MAX_LEN};

pub use binning::{constrained_ml_decode, joint_constrained_decode, Binning};
pub use cache::{CacheStatus, SpectrumCache, CACHE_ENV};
pub use decode::{DecoderKind, SplitDecoder, SyndromeTable, DEFAULT_TABLE_BITS, LARGE_TABLE_BITS};
pub use enumerate::binomial;
pub use spectrum::{
    coset_leader_spectrum, coset_leader_spectrum_with, weight_distribution, weight_distribution_with,
    zero_region_spectrum, zero_region_spectrum_with, CosetSpectrum, WeightDistribution,
    MAX_ENUMERATION_DIM, MAX_SWEEP_LEN,
};

/// Deterministic rule for choosing among equidistant codewords, expressed
/// on the error pattern `y ⊕ codeword`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TieRule {
    /// Lexicographically smallest error pattern, bit 0 most significant.
    #[default]
    SmallestPattern,
    /// Lexicographically largest error pattern.
    LargestPattern,
}

impl TieRule {
    /// Total order on error patterns: lighter first, then the rule's
    /// lexicographic preference. Smaller key wins.
    #[inline]
    pub fn key(self, pattern: u64) -> (u32, u64) {
        let lex = match self {
            TieRule::SmallestPattern => lex_key(pattern),
            TieRule::LargestPattern => !lex_key(pattern),
        };
        (pattern.count_ones(), lex)
    }

    /// Among patterns of equal weight, whether `a` beats `b`.
    #[inline]
    pub(crate) fn prefers(self, a: u64, b: u64) -> bool {
        match self {
            TieRule::SmallestPattern => lex_key(a) < lex_key(b),
            TieRule::LargestPattern => lex_key(a) > lex_key(b),
        }
    }

    /// Of two vectors, the one the rule picks (used for message ties).
    #[inline]
    pub(crate) fn pick(self, a: u64, b: u64) -> u64 {
        if self.prefers(a, b) {
            a
        } else {
            b
        }
    }

    fn index(self) -> usize {
        match self {
            TieRule::SmallestPattern => 0,
            TieRule::LargestPattern => 1,
        }
    }

    pub(crate) fn tag(self) -> &'static str {
        match self {
            TieRule::SmallestPattern => "lex-min",
            TieRule::LargestPattern => "lex-max",
        }
    }
}

/// Recovers `u` from a codeword `u · G` through the reduced echelon form
/// of `G`.
#[derive(Clone, Debug)]
struct MessageRecovery {
    pivots: Vec<usize>,
    /// `T` with `T · G` in reduced echelon form.
    transform: Vec<u64>,
}

impl MessageRecovery {
    #[inline]
    fn message(&self, codeword: u64) -> u64 {
        let mut u = 0u64;
        for (p, t) in self.pivots.iter().zip(&self.transform) {
            if (codeword >> p) & 1 == 1 {
                u ^= t;
            }
        }
        u
    }
}

/// Binary linear `[n, k]` code with generator `G` (k×n) and parity-check
/// `H` ((n−k)×n).
pub struct LinearCode {
    name: String,
    n: usize,
    k: usize,
    g: GF2Matrix,
    h: GF2Matrix,
    recovery: MessageRecovery,
    decoders: [OnceLock<Arc<decode::Decoder>>; 2],
}

impl Clone for LinearCode {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            n: self.n,
            k: self.k,
            g: self.g.clone(),
            h: self.h.clone(),
            recovery: self.recovery.clone(),
            decoders: self.decoders.clone(),
        }
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearCode")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("k", &self.k)
            .finish()
    }
}

impl LinearCode {
    /// Builds a code from a full-rank generator matrix.
    pub fn from_generator(name: impl Into<String>, g: GF2Matrix) -> Result<Self> {
        let (k, n) = (g.rows(), g.cols());
        if n == 0 || n > MAX_LEN {
            return Err(Error::InvalidLength(n));
        }
        let mut reduced = g.row_words().to_vec();
        let mut transform: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
        let pivots = crate::gf2::rref_tracked(&mut reduced, n, &mut transform);
        if pivots.len() != k {
            return Err(Error::RankDeficient {
                rows: k,
                rank: pivots.len(),
            });
        }
        let h = g.null_space_basis();
        Ok(Self {
            name: name.into(),
            n,
            k,
            g,
            h,
            recovery: MessageRecovery { pivots, transform },
            decoders: Default::default(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator(&self) -> &GF2Matrix {
        &self.g
    }

    pub fn parity_check(&self) -> &GF2Matrix {
        &self.h
    }

    pub fn encode(&self, u: BitVector) -> Result<BitVector> {
        self.g.vec_mat_mul(u)
    }

    #[inline]
    pub(crate) fn encode_word(&self, u: u64) -> u64 {
        self.g.combine_word(u)
    }

    /// Message of a codeword; the result is meaningless for non-codewords.
    #[inline]
    pub(crate) fn message_word(&self, codeword: u64) -> u64 {
        self.recovery.message(codeword)
    }

    pub fn syndrome(&self, y: BitVector) -> Result<BitVector> {
        self.h.mat_vec_mul(y)
    }

    pub fn is_codeword(&self, y: BitVector) -> bool {
        y.len() == self.n && self.h.mul_word(y.bits()) == 0
    }

    /// Content hash of `(G, H)`, stable across platforms and runs.
    pub fn content_hash(&self) -> u64 {
        let mut hasher = Sha256::new();
        hash_matrix(&mut hasher, &self.g);
        hash_matrix(&mut hasher, &self.h);
        truncate_digest(hasher)
    }

    /// The nearest-codeword decoder for `tie`, built on first use.
    pub(crate) fn decoder(&self, tie: TieRule) -> Result<Arc<decode::Decoder>> {
        let slot = &self.decoders[tie.index()];
        if let Some(d) = slot.get() {
            return Ok(d.clone());
        }
        let built = Arc::new(decode::Decoder::build(self, tie)?);
        Ok(slot.get_or_init(|| built).clone())
    }

    /// Installs a prebuilt syndrome table (for example a large one loaded
    /// from disk) as this code's decoder for the table's tie rule.
    pub fn install_table(&self, table: SyndromeTable) -> Result<()> {
        if table.n() != self.n || table.redundancy() != self.n - self.k {
            return Err(Error::DimensionMismatch {
                context: "syndrome table",
                expected: self.n - self.k,
                found: table.redundancy(),
            });
        }
        let tie = table.tie();
        let _ = self.decoders[tie.index()].set(Arc::new(decode::Decoder::Table(table)));
        Ok(())
    }

    pub fn decoder_kind(&self, tie: TieRule) -> Result<DecoderKind> {
        Ok(self.decoder(tie)?.kind())
    }

    /// Minimum distance by exhaustive enumeration (`k ≤ 26`).
    pub fn minimum_distance(&self) -> Result<Option<usize>> {
        Ok(weight_distribution(self)?.minimum_distance())
    }
}

pub(crate) fn hash_matrix(hasher: &mut Sha256, m: &GF2Matrix) {
    hasher.update((m.rows() as u64).to_le_bytes());
    hasher.update((m.cols() as u64).to_le_bytes());
    for w in m.row_words() {
        hasher.update(w.to_le_bytes());
    }
}

pub(crate) fn truncate_digest(hasher: Sha256) -> u64 {
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

/// Nearest codeword to `y`, returned as `(u, u · G)`.
pub fn ml_decode(code: &LinearCode, y: BitVector, tie: TieRule) -> Result<(BitVector, BitVector)> {
    check_len("ml_decode", code.n, y.len())?;
    let c = code.decoder(tie)?.decode(y.bits());
    Ok((
        BitVector::from_word(code.k, code.message_word(c)),
        BitVector::from_word(code.n, c),
    ))
}

/// Syndrome table of `code` under the default budget.
pub fn build_syndrome_table(code: &LinearCode, tie: TieRule) -> Result<SyndromeTable> {
    SyndromeTable::build(code, tie, DEFAULT_TABLE_BITS)
}

/// The subcode `{u · G : Hb · u = 0}` of dimension `k − rank(Hb)`.
pub fn concatenated_subcode(gq: &LinearCode, hb: &GF2Matrix) -> Result<LinearCode> {
    check_len("binning matrix columns", gq.k, hb.cols())?;
    let null = hb.null_space_basis();
    let rows: Vec<u64> = null
        .row_words()
        .iter()
        .map(|&u| gq.encode_word(u))
        .collect();
    let g = GF2Matrix::new(rows.len(), gq.n, rows)?;
    LinearCode::from_generator(format!("{}/binned", gq.name), g)
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// Names accepted by [`make_code`] besides file paths.
pub const BUILTIN_CODES: &[&str] = &[
    "hamming-7-4",
    "bch-31-16",
    "bch-63-36",
    "rm-16-5",
    "identity-<n>",
    "repetition-<n>",
    "parity-<n>",
];

/// Narrow-sense BCH generator polynomials, bit `j` = coefficient of `x^j`.
/// (31,16), t = 3: x^15+x^11+x^10+x^9+x^8+x^7+x^5+x^3+x^2+x+1.
const BCH_31_16: u64 = 0x8faf;
/// (63,36), t = 5.
const BCH_63_36: u64 = 0x86e_8113;

/// Resolves a built-in name or reads a generator-matrix file.
pub fn make_code(spec: &str) -> Result<LinearCode> {
    let spec = spec.trim();
    if let Some(code) = builtin(spec)? {
        return Ok(code);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(spec)
            .to_string();
        return parse_code_file(&name, &text);
    }
    Err(Error::UnknownCode(spec.to_string()))
}

fn builtin(spec: &str) -> Result<Option<LinearCode>> {
    let code = match spec {
        "hamming-7-4" => LinearCode::from_generator(
            spec,
            GF2Matrix::parse_rows(&["1000110", "0100101", "0010011", "0001111"])?,
        )?,
        "bch-31-16" => cyclic_code(spec, 31, BCH_31_16)?,
        "bch-63-36" => cyclic_code(spec, 63, BCH_63_36)?,
        "rm-16-5" => reed_muller_first_order(spec, 4)?,
        _ => {
            let Some((family, n)) = spec.rsplit_once('-') else {
                return Ok(None);
            };
            let Ok(n) = n.parse::<usize>() else {
                return Ok(None);
            };
            if !matches!(family, "identity" | "repetition" | "parity") {
                return Ok(None);
            }
            if n == 0 || n > MAX_LEN || (family == "parity" && n < 2) {
                return Err(Error::InvalidLength(n));
            }
            let g = match family {
                "identity" => GF2Matrix::identity(n),
                "repetition" => GF2Matrix::new(1, n, vec![crate::gf2::low_mask(n)])?,
                _ => {
                    let last = 1u64 << (n - 1);
                    GF2Matrix::new(n - 1, n, (0..n - 1).map(|i| (1u64 << i) | last).collect())?
                }
            };
            LinearCode::from_generator(spec, g)?
        }
    };
    Ok(Some(code))
}

/// Cyclic code generated by `g(x)`: rows are `x^i g(x)` for `i < k`.
pub fn cyclic_code(name: &str, n: usize, g: u64) -> Result<LinearCode> {
    let degree = 63 - g.leading_zeros() as usize;
    if g == 0 || degree >= n || n > MAX_LEN {
        return Err(Error::InvalidParameter(format!(
            "generator polynomial {g:#x} does not fit length {n}"
        )));
    }
    let k = n - degree;
    let rows = (0..k).map(|i| g << i).collect();
    LinearCode::from_generator(name, GF2Matrix::new(k, n, rows)?)
}

/// First-order Reed–Muller code RM(1, m) of length 2^m.
pub fn reed_muller_first_order(name: &str, m: usize) -> Result<LinearCode> {
    if m == 0 || m > 6 {
        return Err(Error::InvalidParameter(format!("RM(1, {m}) needs 1 <= m <= 6")));
    }
    let n = 1usize << m;
    let mut rows = vec![crate::gf2::low_mask(n)];
    for i in 0..m {
        rows.push((0..n).filter(|j| (j >> i) & 1 == 1).fold(0u64, |acc, j| acc | (1 << j)));
    }
    LinearCode::from_generator(name, GF2Matrix::new(m + 1, n, rows)?)
}

/// Parses the plain-text generator format: a line `n k`, then `k` rows of
/// `0`/`1` characters. Text after `#` is ignored.
pub fn parse_code_file(name: &str, text: &str) -> Result<LinearCode> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let malformed = |line, message: String| Error::MalformedCodeFile { line, message };

    let (line, header) = lines.next().ok_or_else(|| malformed(1, "missing `n k` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|e| malformed(line, format!("bad header: {e}")))?;
    let [n, k] = dims[..] else {
        return Err(malformed(line, format!("header needs two numbers, found {}", dims.len())));
    };
    if n == 0 || n > MAX_LEN {
        return Err(malformed(line, format!("length {n} outside 1..=64")));
    }
    if k > n {
        return Err(malformed(line, format!("dimension {k} exceeds length {n}")));
    }

    let mut rows = Vec::with_capacity(k);
    for (line, row) in lines {
        if rows.len() == k {
            return Err(malformed(line, format!("more than {k} generator rows")));
        }
        if row.len() != n {
            return Err(malformed(line, format!("row has {} symbols, expected {n}", row.len())));
        }
        let v = BitVector::parse(row).map_err(|e| malformed(line, e.to_string()))?;
        rows.push(v.bits());
    }
    if rows.len() != k {
        return Err(malformed(
            text.lines().count(),
            format!("expected {k} generator rows, found {}", rows.len()),
        ));
    }
    LinearCode::from_generator(name, GF2Matrix::new(k, n, rows)?)
}

/// Renders a code in the format read by [`parse_code_file`].
pub fn format_code_file(code: &LinearCode) -> String {
    let mut out = format!("# {}\n{} {}\n", code.name, code.n, code.k);
    for i in 0..code.k {
        out.push_str(&code.g.row(i).to_string());
        out.push('\n');
    }
    out
}

/// Reduced echelon form of a generator: pivot columns plus reduced rows.
pub(crate) fn echelon(g: &GF2Matrix) -> (Vec<usize>, Vec<u64>) {
    let mut rows = g.row_words().to_vec();
    let pivots = rref(&mut rows, g.cols());
    rows.truncate(pivots.len());
    (pivots, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_codewords(code: &LinearCode) -> Vec<u64> {
        (0..1u64 << code.k()).map(|u| code.encode_word(u)).collect()
    }

    #[test]
    fn builtin_dimensions() {
        for (name, n, k) in [
            ("hamming-7-4", 7, 4),
            ("bch-31-16", 31, 16),
            ("bch-63-36", 63, 36),
            ("rm-16-5", 16, 5),
            ("identity-8", 8, 8),
            ("repetition-5", 5, 1),
            ("parity-4", 4, 3),
        ] {
            let c = make_code(name).unwrap();
            assert_eq!((c.n(), c.k()), (n, k), "{name}");
            assert_eq!(c.parity_check().rows(), n - k);
            assert_eq!(c.parity_check().rank(), n - k);
            for i in 0..k {
                assert!(c.is_codeword(c.generator().row(i)), "{name} row {i}");
            }
        }
    }

    #[test]
    fn unknown_and_invalid_names() {
        assert!(matches!(make_code("golay-24"), Err(Error::UnknownCode(_))));
        assert!(matches!(make_code("identity-65"), Err(Error::InvalidLength(65))));
        assert!(matches!(make_code("repetition-0"), Err(Error::InvalidLength(0))));
    }

    #[test]
    fn hamming_minimum_distance_by_enumeration() {
        let c = make_code("hamming-7-4").unwrap();
        let d = all_codewords(&c)
            .into_iter()
            .filter(|&w| w != 0)
            .map(u64::count_ones)
            .min();
        assert_eq!(d, Some(3));
    }

    #[test]
    fn bch_31_16_has_minimum_distance_seven() {
        let c = make_code("bch-31-16").unwrap();
        assert_eq!(c.minimum_distance().unwrap(), Some(7));
    }

    /// Multiplication in GF(2^m) modulo a primitive polynomial.
    fn gf_mul(mut a: u64, mut b: u64, m: usize, prim: u64) -> u64 {
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a >> m) & 1 == 1 {
                a ^= prim;
            }
        }
        acc
    }

    fn eval_poly(g: u64, x: u64, m: usize, prim: u64) -> u64 {
        // Horner from the top coefficient down.
        let deg = 63 - g.leading_zeros() as usize;
        (0..=deg)
            .rev()
            .fold(0, |acc, j| gf_mul(acc, x, m, prim) ^ ((g >> j) & 1))
    }

    fn poly_mod(mut a: u128, b: u128) -> u128 {
        let db = 127 - b.leading_zeros();
        while a != 0 && 127 - a.leading_zeros() >= db {
            a ^= b << (127 - a.leading_zeros() - db);
        }
        a
    }

    #[test]
    fn bch_generators_have_designed_roots() {
        // alpha = x in GF(2^m) built from x^5+x^2+1 and x^6+x+1.
        for (g, n, m, prim, t) in [(BCH_31_16, 31usize, 5usize, 0b100101u64, 3usize), (BCH_63_36, 63, 6, 0b1000011, 5)] {
            let xn1 = (1u128 << n) | 1;
            assert_eq!(poly_mod(xn1, g as u128), 0, "g must divide x^n + 1");
            let mut alpha_i = 1u64;
            for i in 1..=2 * t {
                alpha_i = gf_mul(alpha_i, 2, m, prim);
                assert_eq!(eval_poly(g, alpha_i, m, prim), 0, "alpha^{i} is not a root");
            }
            // The designed distance 2t+1 lower-bounds d_min (BCH bound).
        }
    }

    #[test]
    fn reed_muller_weights() {
        let c = make_code("rm-16-5").unwrap();
        let mut weights: Vec<u32> = all_codewords(&c).into_iter().map(u64::count_ones).collect();
        weights.sort_unstable();
        assert_eq!(weights[0], 0);
        assert_eq!(weights[31], 16);
        assert!(weights[1..31].iter().all(|&w| w == 8));
    }

    #[test]
    fn message_recovery_inverts_encoding() {
        for name in ["hamming-7-4", "bch-31-16", "rm-16-5", "parity-6"] {
            let c = make_code(name).unwrap();
            for u in (0..1u64 << c.k()).step_by(97) {
                assert_eq!(c.message_word(c.encode_word(u)), u, "{name}");
            }
        }
    }

    #[test]
    fn code_file_round_trip_and_errors() {
        let c = make_code("hamming-7-4").unwrap();
        let text = format_code_file(&c);
        let back = parse_code_file("h", &text).unwrap();
        assert_eq!(back.generator(), c.generator());

        let commented = "# a comment\n3 1 # trailing\n\n111\n";
        assert_eq!(parse_code_file("r", commented).unwrap().k(), 1);

        for bad in ["", "3\n111", "3 2\n111", "3 1\n11", "3 1\n1a1", "2 2\n11\n11"] {
            assert!(parse_code_file("bad", bad).is_err(), "{bad:?} should fail");
        }
        assert!(matches!(
            parse_code_file("dup", "2 2\n11\n11\n"),
            Err(Error::RankDeficient { rows: 2, rank: 1 })
        ));
    }

    #[test]
    fn concatenated_subcode_examples() {
        let gq = make_code("hamming-7-4").unwrap();
        let same = concatenated_subcode(&gq, &GF2Matrix::empty(4)).unwrap();
        assert_eq!(same.k(), 4);

        let trivial = concatenated_subcode(&gq, &GF2Matrix::identity(4)).unwrap();
        assert_eq!(trivial.k(), 0);

        let bch = make_code("bch-31-16").unwrap();
        let hb = make_code("rm-16-5").unwrap().parity_check().clone();
        let sub = concatenated_subcode(&bch, &hb).unwrap();
        assert_eq!(sub.k(), 16 - hb.rank());
        assert_eq!(sub.k(), 5);
        for v in 0..1u64 << sub.k() {
            let c = sub.encode_word(v);
            assert!(bch.is_codeword(BitVector::from_word(31, c)));
            assert_eq!(hb.mul_word(bch.message_word(c)), 0);
        }
    }

    #[test]
    fn content_hash_distinguishes_codes() {
        let a = make_code("hamming-7-4").unwrap();
        let b = make_code("hamming-7-4").unwrap();
        let c = make_code("parity-7").unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
    }
}
