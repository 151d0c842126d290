//! Closed-form Type-I/II error probabilities and the error-exponent bound.
//!
//! The quantization and quantize-binning formulas cover the asymmetric
//! setup with `p0 = p1 = 1/2`. Thresholds follow the analytic convention
//! "decide H0 iff weight ≤ λ"; the simulator's "weight < λ" threshold maps
//! to `λ − 1` here, with negative values accepting nothing.

use serde::{Deserialize, Serialize};

use crate::codes::{binomial, CosetSpectrum, WeightDistribution};
use crate::error::{Error, Result};
use crate::schemes::{log_ratio, DecisionRule, Observation};
use crate::sources::HypothesisPair;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Number of words at distance `j` from a fixed weight-`lambda` word that
/// have weight `gamma`: `C(λ,u)·C(n−λ, j−u)` with `γ = j + λ − 2u`.
pub fn gamma_coeff(lambda: usize, j: usize, gamma: usize, n: usize) -> u128 {
    if lambda > n || j > n || gamma > n {
        return 0;
    }
    let sum = j + lambda;
    if sum < gamma || !(sum - gamma).is_multiple_of(2) {
        return 0;
    }
    let u = (sum - gamma) / 2;
    if u > lambda || u > j || j - u > n - lambda {
        return 0;
    }
    binomial_u128(lambda, u) * binomial_u128(n - lambda, j - u)
}

/// `Γ / Σ_i C(λ,i)·C(n−λ, j−i)`; the denominator is `C(n, j)`.
pub fn delta_coeff(lambda: usize, j: usize, gamma: usize, n: usize) -> f64 {
    if lambda > n || j > n {
        return 0.0;
    }
    gamma_coeff(lambda, j, gamma, n) as f64 / binomial_u128(n, j) as f64
}

pub(crate) fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    (binomial_u128(n, k) as f64).ln()
}

/// `C(n,k) p^k (1−p)^(n−k)`, evaluated in log space.
pub fn binomial_pmf(n: usize, k: usize, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

fn pmf_vector(n: usize, p: f64) -> Vec<f64> {
    (0..=n).map(|k| binomial_pmf(n, k, p)).collect()
}

/// Number of indices `≤ t` in `0..=n`, for a signed threshold.
fn accepted(t: i64, n: usize) -> usize {
    if t < 0 {
        0
    } else {
        (t as usize).min(n) + 1
    }
}

/// `Σ_{k<cut}` of a distribution, exact at the empty and full ranges.
fn lower_mass(pmf: &[f64], cut: usize) -> f64 {
    if cut >= pmf.len() {
        1.0
    } else if cut == 0 {
        0.0
    } else {
        pmf[..cut].iter().sum::<f64>().clamp(0.0, 1.0)
    }
}

fn upper_mass(pmf: &[f64], cut: usize) -> f64 {
    if cut == 0 {
        1.0
    } else if cut >= pmf.len() {
        0.0
    } else {
        pmf[cut.min(pmf.len())..].iter().sum::<f64>().clamp(0.0, 1.0)
    }
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} is not a probability")))
    }
}

/// Separate scheme: H0 iff `w(x) ≤ γ1`.
pub fn separate_errors(n: usize, p0: f64, p1: f64, gamma1: i64) -> ErrorPair {
    let cut = accepted(gamma1, n);
    let pm0 = pmf_vector(n, p0);
    let pm1 = pmf_vector(n, p1);
    ErrorPair {
        threshold: gamma1 as f64,
        alpha: upper_mass(&pm0, cut),
        beta: lower_mass(&pm1, cut),
    }
}

/// Treatment of outcomes whose statistic equals the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryConvention {
    /// `β` over `T < τ` and `α` over `T ≥ τ`, matching the strict test.
    #[default]
    Partition,
    /// `T = τ` counted in both `α` and `β`.
    DoubleCounted,
}

/// Truncation scheme with the true parameters: `T = λ·L_p + j·L_c` where
/// `λ ~ Bin(l, p_h)` and `j ~ Bin(l, c_h)` independently.
pub fn truncation_errors(
    l: usize,
    pair: &HypothesisPair,
    tau: f64,
    convention: BoundaryConvention,
) -> Result<ErrorPair> {
    if l == 0 || l > 64 {
        return Err(Error::InvalidParameter(format!("truncation length {l} outside 1..=64")));
    }
    let lp = log_ratio(pair.p0(), pair.p1());
    let lc = log_ratio(pair.c0(), pair.c1());
    if lp == 0.0 && lc == 0.0 {
        return Err(Error::DegenerateTest);
    }
    let rule = DecisionRule::WeightedBelow { lp, lc };
    let (px0, pz0) = (pmf_vector(l, pair.p0()), pmf_vector(l, pair.c0()));
    let (px1, pz1) = (pmf_vector(l, pair.p1()), pmf_vector(l, pair.c1()));
    let (mut alpha, mut beta) = (0.0, 0.0);
    let (mut alpha_cells, mut beta_cells) = (0, 0);
    for a in 0..=l {
        for j in 0..=l {
            let t = rule
                .statistic(Observation {
                    x_weight: a as u8,
                    v_weight: j as u8,
                })
                .value();
            if t >= tau {
                alpha += px0[a] * pz0[j];
                alpha_cells += 1;
            }
            let in_beta = match convention {
                BoundaryConvention::Partition => t < tau,
                BoundaryConvention::DoubleCounted => t <= tau,
            };
            if in_beta {
                beta += px1[a] * pz1[j];
                beta_cells += 1;
            }
        }
    }
    let cells = (l + 1) * (l + 1);
    if alpha_cells == cells {
        alpha = 1.0;
    }
    if beta_cells == cells {
        beta = 1.0;
    }
    Ok(ErrorPair {
        threshold: tau,
        alpha: alpha.min(1.0),
        beta: beta.min(1.0),
    })
}

/// Distribution of `w(e ⊕ z)` for `e` uniform on the quantizer's zero
/// decision region (weights given by `spectrum`) and `z ~ Bern(δ)^n`.
pub fn output_weight_pmf(spectrum: &CosetSpectrum, delta: f64) -> Vec<f64> {
    let n = spectrum.n();
    let n0 = spectrum.total() as f64;
    let lp = delta.ln();
    let lq = (-delta).ln_1p();
    // Γ·δ^j(1−δ)^(n−j) with the degenerate δ ∈ {0, 1} handled exactly.
    let noise = |j: usize| -> f64 {
        if delta <= 0.0 {
            (j == 0) as u8 as f64
        } else if delta >= 1.0 {
            (j == n) as u8 as f64
        } else {
            (j as f64 * lp + (n - j) as f64 * lq).exp()
        }
    };
    let mut out = vec![0.0; n + 1];
    for (g, &eg) in spectrum.counts().iter().enumerate() {
        if eg == 0 {
            continue;
        }
        let weight = eg as f64 / n0;
        for j in 0..=n {
            let nj = noise(j);
            if nj == 0.0 {
                continue;
            }
            for (lam, slot) in out.iter_mut().enumerate() {
                let gc = gamma_coeff(g, j, lam, n);
                if gc != 0 {
                    *slot += weight * gc as f64 * nj;
                }
            }
        }
    }
    out
}

fn check_spectrum_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
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

/// Quantization scheme, asymmetric setup, `p0 = p1 = 1/2`: H0 iff
/// `w(x_q ⊕ y) ≤ λ_q`.
pub fn quantization_errors(spectrum: &CosetSpectrum, n: usize, c0: f64, c1: f64, lambda_q: i64) -> Result<ErrorPair> {
    check_spectrum_len("quantizer spectrum length", n, spectrum.n())?;
    check_prob("c0", c0)?;
    check_prob("c1", c1)?;
    let cut = accepted(lambda_q, n);
    let w0 = output_weight_pmf(spectrum, c0);
    let w1 = output_weight_pmf(spectrum, c1);
    Ok(ErrorPair {
        threshold: lambda_q as f64,
        alpha: upper_mass(&w0, cut),
        beta: lower_mass(&w1, cut),
    })
}

/// The two event probabilities of the quantize-binning formula before they
/// are combined: `P_B` (the bin search returns the quantized codeword and
/// H0 is decided) and `P_B̄` (a wrong codeword is returned and H0 decided).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbTerms {
    pub p_b: f64,
    pub p_b_bar: f64,
}

/// Raw `P_B(δ)` and `P_B̄(δ)` at threshold `λ_qb`. These are expectations
/// under a weight-class uniformity assumption and need not sum to at most 1.
pub fn qb_terms(
    q_spectrum: &CosetSpectrum,
    qb_spectrum: &CosetSpectrum,
    a_dist: &WeightDistribution,
    delta: f64,
    lambda_qb: i64,
) -> Result<QbTerms> {
    let n = q_spectrum.n();
    check_spectrum_len("binning spectrum length", n, qb_spectrum.n())?;
    check_spectrum_len("subcode weight distribution length", n, a_dist.n())?;
    check_prob("crossover", delta)?;
    let py = output_weight_pmf(q_spectrum, delta);
    // Fraction of weight-ν words inside the subcode's zero region.
    let frac: Vec<f64> = qb_spectrum
        .counts()
        .iter()
        .enumerate()
        .map(|(nu, &e)| e as f64 / binomial(n, nu) as f64)
        .collect();
    let cut = accepted(lambda_qb, n);
    let p_b = (0..cut.min(qb_spectrum.d_max() + 1)).fold(0.0, |acc, nu| acc + frac[nu] * py[nu]);

    let mut p_b_bar = 0.0;
    for (i, &pi) in py.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        let ci = binomial(n, i) as f64;
        let mut inner = 0.0;
        for (t, &at) in a_dist.counts().iter().enumerate().skip(1) {
            if at == 0 {
                continue;
            }
            for (nu, &f) in frac.iter().enumerate().take(cut) {
                if f != 0.0 {
                    inner += f * at as f64 * gamma_coeff(t, nu, i, n) as f64 / ci;
                }
            }
        }
        p_b_bar += pi * inner;
    }
    Ok(QbTerms { p_b, p_b_bar })
}

/// Quantize-binning, asymmetric setup, `p0 = p1 = 1/2`: H0 iff
/// `w(x̂ ⊕ y) ≤ λ_qb`. The combined terms are clipped to `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn qb_errors(
    q_spectrum: &CosetSpectrum,
    qb_spectrum: &CosetSpectrum,
    a_dist: &WeightDistribution,
    n: usize,
    c0: f64,
    c1: f64,
    lambda_qb: i64,
) -> Result<ErrorPair> {
    check_spectrum_len("quantizer spectrum length", n, q_spectrum.n())?;
    let t0 = qb_terms(q_spectrum, qb_spectrum, a_dist, c0, lambda_qb)?;
    let t1 = qb_terms(q_spectrum, qb_spectrum, a_dist, c1, lambda_qb)?;
    Ok(ErrorPair {
        threshold: lambda_qb as f64,
        alpha: (1.0 - t0.p_b - t0.p_b_bar).clamp(0.0, 1.0),
        beta: (t1.p_b + t1.p_b_bar).clamp(0.0, 1.0),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }
}

/// `x * y = (1−x)y + (1−y)x`.
pub fn binary_convolution(x: f64, y: f64) -> f64 {
    (1.0 - x) * y + (1.0 - y) * x
}

pub fn binary_entropy(x: f64, base: LogBase) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * base.log(p) };
    term(x) + term(1.0 - x)
}

/// `D(Bern(a) ‖ Bern(b))`.
pub fn binary_divergence(a: f64, b: f64, base: LogBase) -> f64 {
    let term = |p: f64, q: f64| {
        if p <= 0.0 {
            0.0
        } else if q <= 0.0 {
            f64::INFINITY
        } else {
            p * base.log(p / q)
        }
    };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// The two competing terms at one `δ`: the rate margin
/// `R1 − [H2(p0*δ) − H2(δ)]` and the divergence `D(p0*δ ‖ p1*δ)`.
pub fn exponent_terms(p0: f64, p1: f64, r1: f64, delta: f64, base: LogBase) -> (f64, f64) {
    let a = binary_convolution(p0, delta);
    let b = binary_convolution(p1, delta);
    let rate = r1 - (binary_entropy(a, base) - binary_entropy(delta, base));
    (rate, binary_divergence(a, b, base))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentBound {
    /// Per-symbol exponent, `≥ 0`.
    pub theta: f64,
    pub delta_star: f64,
    pub log_base: LogBase,
}

impl ExponentBound {
    /// `β_n ≈ e^(−nθ)`, reading `θ` as a nats value whatever its base.
    pub fn beta_exp(&self, n: usize) -> f64 {
        (-(n as f64) * self.theta).exp()
    }

    /// `β_n ≈ 2^(−nθ)`, reading `θ` as a bits value.
    pub fn beta_pow2(&self, n: usize) -> f64 {
        (-(n as f64) * self.theta).exp2()
    }
}

/// Uniform grid `0, step, 2·step, …, 1`.
pub fn delta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!("grid step {step} outside (0, 1]")));
    }
    let m = (1.0 / step).round() as usize;
    Ok((0..=m).map(|i| (i as f64 * step).min(1.0)).collect())
}

/// `θ = max over the grid of min(rate margin, divergence)`, clamped at 0.
pub fn exponent_bound(p0: f64, p1: f64, r1: f64, grid: &[f64], base: LogBase) -> Result<ExponentBound> {
    check_prob("p0", p0)?;
    check_prob("p1", p1)?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty δ grid".into()));
    }
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &d in grid {
        check_prob("δ", d)?;
        let (rate, div) = exponent_terms(p0, p1, r1, d, base);
        let v = rate.min(div);
        if v > best.0 {
            best = (v, d);
        }
    }
    Ok(ExponentBound {
        theta: best.0.max(0.0),
        delta_star: best.1,
        log_base: base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{coset_leader_spectrum, make_code, TieRule};

    #[test]
    fn gamma_examples() {
        for n in 0..=8 {
            for j in 0..=n {
                for g in 0..=n {
                    let want = if g == j { binomial(n, j) as u128 } else { 0 };
                    assert_eq!(gamma_coeff(0, j, g, n), want);
                }
            }
        }
        assert_eq!(gamma_coeff(1, 1, 0, 3), 1);
        assert_eq!(gamma_coeff(1, 1, 2, 3), 2);
        assert_eq!(gamma_coeff(1, 1, 1, 3), 0);
        assert_eq!(gamma_coeff(2, 5, 1, 4), 0);
    }

    #[test]
    fn delta_examples() {
        assert!((delta_coeff(1, 1, 0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(delta_coeff(0, 4, 4, 9), 1.0);
    }

    #[test]
    fn pmf_edges_and_normalization() {
        assert_eq!(binomial_pmf(5, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(5, 5, 1.0), 1.0);
        assert_eq!(binomial_pmf(5, 6, 0.3), 0.0);
        let s: f64 = (0..=64).map(|k| binomial_pmf(64, k, 0.37)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((binomial_pmf(3, 1, 0.5) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn separate_endpoints() {
        let e = separate_errors(30, 0.08, 0.5, 30);
        assert_eq!((e.alpha, e.beta), (0.0, 1.0));
        let e = separate_errors(30, 0.08, 0.5, -1);
        assert_eq!((e.alpha, e.beta), (1.0, 0.0));
        let e = separate_errors(30, 0.08, 0.5, 0);
        assert!((e.alpha - (1.0 - 0.92f64.powi(30))).abs() < 1e-12);
    }

    #[test]
    fn truncation_conventions() {
        let pair = HypothesisPair::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let lc = log_ratio(0.1, 0.5);
        let hi = truncation_errors(16, &pair, 16.0 * lc + 1.0, BoundaryConvention::Partition).unwrap();
        assert_eq!((hi.alpha, hi.beta), (0.0, 1.0));
        let lo = truncation_errors(16, &pair, 0.0, BoundaryConvention::Partition).unwrap();
        assert_eq!((lo.alpha, lo.beta), (1.0, 0.0));

        let tau = 3.0 * lc;
        let part = truncation_errors(16, &pair, tau, BoundaryConvention::Partition).unwrap();
        let dbl = truncation_errors(16, &pair, tau, BoundaryConvention::DoubleCounted).unwrap();
        assert_eq!(part.alpha, dbl.alpha);
        assert!((dbl.beta - part.beta - binomial_pmf(16, 3, 0.5)).abs() < 1e-15);

        let flat = HypothesisPair::new(0.3, 0.2, 0.3, 0.2).unwrap();
        assert!(truncation_errors(4, &flat, 0.0, BoundaryConvention::Partition).is_err());
    }

    #[test]
    fn output_weights_are_a_distribution() {
        let s = coset_leader_spectrum(&make_code("hamming-7-4").unwrap(), TieRule::default()).unwrap();
        for d in [0.0, 0.05, 0.5, 1.0] {
            let p = output_weight_pmf(&s, d);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // Identity code: zero region is {0}, so the output is the noise itself.
        let id = coset_leader_spectrum(&make_code("identity-10").unwrap(), TieRule::default()).unwrap();
        let p = output_weight_pmf(&id, 0.3);
        for (k, v) in p.iter().enumerate() {
            assert!((v - binomial_pmf(10, k, 0.3)).abs() < 1e-14);
        }
    }

    #[test]
    fn quantization_matches_exhaustive_sum_on_hamming() {
        let code = make_code("hamming-7-4").unwrap();
        let s = coset_leader_spectrum(&code, TieRule::default()).unwrap();
        // Zero region of the Hamming code: the zero word and the 7 unit vectors.
        let region: Vec<u64> = std::iter::once(0).chain((0..7).map(|i| 1u64 << i)).collect();
        for c in [0.1f64, 0.5] {
            for lq in -1..=7i64 {
                let mut accept = 0.0;
                for &e in &region {
                    for z in 0..128u64 {
                        let w = z.count_ones() as usize;
                        if ((e ^ z).count_ones() as i64) <= lq {
                            accept += c.powi(w as i32) * (1.0 - c).powi(7 - w as i32) / 8.0;
                        }
                    }
                }
                let got = quantization_errors(&s, 7, c, c, lq).unwrap();
                assert!((got.beta - accept).abs() < 1e-12, "c={c} lq={lq}");
                assert!((got.alpha - (1.0 - accept)).abs() < 1e-12);
            }
        }
        assert!(quantization_errors(&s, 8, 0.1, 0.5, 3).is_err());
    }

    #[test]
    fn qb_terms_are_monotone_and_clamped() {
        let gq = make_code("hamming-7-4").unwrap();
        let hb = crate::gf2::GF2Matrix::parse_rows(&["1111"]).unwrap();
        let tie = TieRule::default();
        let q = coset_leader_spectrum(&gq, tie).unwrap();
        let sub = crate::codes::concatenated_subcode(&gq, &hb).unwrap();
        let qb = coset_leader_spectrum(&sub, tie).unwrap();
        let a = crate::codes::weight_distribution(&sub).unwrap();
        let mut last = ErrorPair {
            threshold: -2.0,
            alpha: 1.0,
            beta: 0.0,
        };
        for l in -1..=7 {
            let e = qb_errors(&q, &qb, &a, 7, 0.1, 0.5, l).unwrap();
            assert!((0.0..=1.0).contains(&e.alpha) && (0.0..=1.0).contains(&e.beta));
            assert!(e.alpha <= last.alpha + 1e-15 && e.beta >= last.beta - 1e-15);
            last = e;
        }
        let t = qb_terms(&q, &qb, &a, 0.1, -1).unwrap();
        assert_eq!((t.p_b, t.p_b_bar), (0.0, 0.0));
    }

    #[test]
    fn convolution_and_information_measures() {
        for x in [0.0, 0.2, 0.7, 1.0] {
            assert!((binary_convolution(x, 0.5) - 0.5).abs() < 1e-15);
        }
        assert_eq!(binary_entropy(0.5, LogBase::Bits), 1.0);
        assert!((binary_entropy(0.5, LogBase::Nats) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(binary_divergence(0.3, 0.3, LogBase::Bits), 0.0);
        assert_eq!(binary_divergence(0.3, 0.0, LogBase::Bits), f64::INFINITY);
    }

    #[test]
    fn exponent_example_and_degenerate_case() {
        let (rate, div) = exponent_terms(0.05, 0.5, 0.4, 0.1, LogBase::Bits);
        let inner = rate.min(div);
        assert!((0.27..=0.30).contains(&inner), "{inner}");

        let grid = delta_grid(1e-3).unwrap();
        assert_eq!(grid.len(), 1001);
        let same = exponent_bound(0.3, 0.3, 0.4, &grid, LogBase::Bits).unwrap();
        assert_eq!(same.theta, 0.0);

        let fine = exponent_bound(0.05, 0.5, 0.4, &delta_grid(1e-4).unwrap(), LogBase::Bits).unwrap();
        let coarse = exponent_bound(0.05, 0.5, 0.4, &grid, LogBase::Bits).unwrap();
        assert!(fine.theta >= coarse.theta && fine.theta - coarse.theta < 1e-4);
        assert!(delta_grid(0.0).is_err());
    }
}
