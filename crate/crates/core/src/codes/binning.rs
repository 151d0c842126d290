//! Binning of quantizer messages by a syndrome `r = Hb · u` and the
//! constrained decoders that search one bin.

use super::{check_len, LinearCode, TieRule};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, GF2Matrix, LinearSolver};

/// Largest kernel `{u : Hb·u = 0}` searched exhaustively.
const MAX_KERNEL_DIM: usize = 24;

/// A quantizer together with a binning matrix `Hb` (`ℓ' × k`).
#[derive(Clone, Debug)]
pub struct Binning {
    code: LinearCode,
    hb: GF2Matrix,
    solver: LinearSolver,
    /// Every `(u, u·G)` with `Hb·u = 0`, zero first.
    kernel: Vec<(u64, u64)>,
}

impl Binning {
    pub fn new(code: &LinearCode, hb: GF2Matrix) -> Result<Self> {
        check_len("binning matrix columns", code.k(), hb.cols())?;
        let solver = LinearSolver::new(&hb)?;
        let basis = solver.null_basis();
        if basis.rows() > MAX_KERNEL_DIM {
            return Err(Error::BudgetExceeded {
                what: "binning kernel search",
                required: basis.rows(),
                limit: MAX_KERNEL_DIM,
            });
        }
        let kernel = (0..1u64 << basis.rows())
            .map(|i| {
                let u = basis.combine_word(i);
                (u, code.encode_word(u))
            })
            .collect();
        Ok(Self {
            code: code.clone(),
            hb,
            solver,
            kernel,
        })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn matrix(&self) -> &GF2Matrix {
        &self.hb
    }

    /// `rank(Hb)`: bits that carry information in each syndrome.
    pub fn rank(&self) -> usize {
        self.solver.rank()
    }

    /// Length of the transmitted syndrome, `Hb.rows()`.
    pub fn syndrome_len(&self) -> usize {
        self.hb.rows()
    }

    pub fn syndrome(&self, u: BitVector) -> Result<BitVector> {
        self.hb.mat_vec_mul(u)
    }

    #[inline]
    pub(crate) fn syndrome_word(&self, u: u64) -> u64 {
        self.hb.mul_word(u)
    }

    fn coset_base(&self, r: u64) -> Result<u64> {
        self.solver.particular_word(r).ok_or(Error::InvalidSyndrome)
    }

    /// `argmin_{Hb·u = r} d(u·G, y)` on raw words.
    pub(crate) fn constrained_word(&self, r: u64, y: u64, tie: TieRule) -> Result<u64> {
        let u0 = self.coset_base(r)?;
        let e0 = y ^ self.code.encode_word(u0);
        let (mut best_u, mut best_e) = (0u64, e0);
        let mut best_w = e0.count_ones();
        for &(nu, nc) in &self.kernel[1..] {
            let e = e0 ^ nc;
            let w = e.count_ones();
            if w < best_w || (w == best_w && tie.prefers(e, best_e)) {
                best_u = nu;
                best_e = e;
                best_w = w;
            }
        }
        Ok(u0 ^ best_u)
    }

    /// Pair `(u, t)` from the two bins minimizing `d(u·G, t·G)`.
    pub(crate) fn joint_word(&self, r: u64, s: u64, tie: TieRule) -> Result<(u64, u64)> {
        let u0 = self.coset_base(r)?;
        let t0 = self.coset_base(s)?;
        let d0 = u0 ^ t0;
        let c0 = self.code.encode_word(d0);
        // t = u ⊕ δ with δ ranging over d0 + kernel; the distance only
        // depends on δ, so u is the rule's choice within its own bin.
        let min_w = self
            .kernel
            .iter()
            .map(|&(_, nc)| (c0 ^ nc).count_ones())
            .min()
            .expect("kernel contains zero");
        let u = self.kernel[1..]
            .iter()
            .fold(u0, |best, &(nu, _)| tie.pick(u0 ^ nu, best));
        let t = self
            .kernel
            .iter()
            .filter(|&&(_, nc)| (c0 ^ nc).count_ones() == min_w)
            .map(|&(nu, _)| u ^ d0 ^ nu)
            .reduce(|best, cand| tie.pick(cand, best))
            .expect("minimum is attained");
        Ok((u, t))
    }
}

/// Message `u` with `Hb·u = r` whose codeword is nearest to `y`.
pub fn constrained_ml_decode(
    binning: &Binning,
    r: BitVector,
    y: BitVector,
    tie: TieRule,
) -> Result<BitVector> {
    check_len("syndrome", binning.syndrome_len(), r.len())?;
    check_len("constrained decode input", binning.code.n(), y.len())?;
    let u = binning.constrained_word(r.bits(), y.bits(), tie)?;
    Ok(BitVector::from_word(binning.code.k(), u))
}

/// Messages `(u, t)` with `Hb·u = r`, `Hb·t = s` minimizing `d(u·G, t·G)`.
pub fn joint_constrained_decode(
    binning: &Binning,
    r: BitVector,
    s: BitVector,
    tie: TieRule,
) -> Result<(BitVector, BitVector)> {
    check_len("syndrome", binning.syndrome_len(), r.len())?;
    check_len("syndrome", binning.syndrome_len(), s.len())?;
    let (u, t) = binning.joint_word(r.bits(), s.bits(), tie)?;
    let k = binning.code.k();
    Ok((BitVector::from_word(k, u), BitVector::from_word(k, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_code;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hamming_binning(rows: &[&str]) -> Binning {
        let code = make_code("hamming-7-4").unwrap();
        Binning::new(&code, GF2Matrix::parse_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn codeword_in_bin_is_recovered() {
        let b = hamming_binning(&["1111"]);
        for u in 0..16u64 {
            let r = b.syndrome_word(u);
            let y = b.code().encode_word(u);
            assert_eq!(b.constrained_word(r, y, TieRule::default()).unwrap(), u);
        }
        assert_eq!(b.constrained_word(0, 0, TieRule::default()).unwrap(), 0);
    }

    #[test]
    fn constrained_decode_matches_brute_force() {
        let b = hamming_binning(&["1111"]);
        let code = b.code().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for tie in [TieRule::SmallestPattern, TieRule::LargestPattern] {
            for _ in 0..300 {
                let y = rng.random_range(0..128u64);
                let r = rng.random_range(0..2u64);
                let want = (0..16u64)
                    .filter(|&u| b.syndrome_word(u) == r)
                    .min_by_key(|&u| tie.key(y ^ code.encode_word(u)))
                    .unwrap();
                assert_eq!(b.constrained_word(r, y, tie).unwrap(), want);
            }
        }
    }

    #[test]
    fn joint_decode_matches_brute_force() {
        let b = hamming_binning(&["1100", "0110"]);
        let code = b.code().clone();
        let lex = |u: u64, k: usize| crate::gf2::lex_key(u) >> (64 - k);
        for r in 0..4u64 {
            for s in 0..4u64 {
                let bin = |x: u64| -> Vec<u64> { (0..16u64).filter(|&u| b.syndrome_word(u) == x).collect() };
                let (us, ts) = (bin(r), bin(s));
                let want = us
                    .iter()
                    .flat_map(|&u| ts.iter().map(move |&t| (u, t)))
                    .min_by_key(|&(u, t)| {
                        let d = (code.encode_word(u) ^ code.encode_word(t)).count_ones();
                        (d, lex(u, 4), lex(t, 4))
                    })
                    .unwrap();
                assert_eq!(b.joint_word(r, s, TieRule::default()).unwrap(), want, "r={r} s={s}");
            }
        }
    }

    #[test]
    fn joint_decode_examples() {
        let b = hamming_binning(&["1111"]);
        let (u, t) = b.joint_word(1, 1, TieRule::default()).unwrap();
        assert_eq!(u, t);

        let id = hamming_binning(&["1000", "0100", "0010", "0001"]);
        assert_eq!(id.joint_word(0b1010, 0b0111, TieRule::default()).unwrap(), (0b1010, 0b0111));
    }

    #[test]
    fn inconsistent_syndrome_is_rejected() {
        let b = hamming_binning(&["1111", "1111"]);
        assert!(matches!(
            b.constrained_word(0b01, 0, TieRule::default()),
            Err(Error::InvalidSyndrome)
        ));
        let r = BitVector::from_word(2, 0b10);
        assert!(matches!(
            joint_constrained_decode(&b, r, BitVector::zeros(2), TieRule::default()),
            Err(Error::InvalidSyndrome)
        ));
    }

    #[test]
    fn rank_of_reed_muller_binning() {
        let bch = make_code("bch-31-16").unwrap();
        let hb = make_code("rm-16-5").unwrap().parity_check().clone();
        let b = Binning::new(&bch, hb).unwrap();
        assert_eq!(b.rank(), 11);
        assert_eq!(b.syndrome_len(), 11);
    }
}
