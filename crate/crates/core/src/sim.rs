//! ROC curves from three engines: Monte-Carlo simulation, the closed-form
//! analysis, and exhaustive enumeration for small blocks.
//!
//! Every engine first reduces a scheme to the distribution of its
//! [`Observation`] under each hypothesis, then evaluates all thresholds on
//! that one distribution. Monte-Carlo histograms are integer counters merged
//! across chunks, so results never depend on the thread count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    quantization_errors, qb_errors, separate_errors, truncation_errors, BoundaryConvention, ErrorPair,
};
use crate::codes::{concatenated_subcode, SpectrumCache};
use crate::error::{Error, Result};
use crate::par::{add_counts, Execution};
use crate::schemes::{
    Calibration, DecisionRule, EstimatedParams, Observation, Scheme, SchemeConfig, SchemeKind, Setup,
    DEFAULT_CALIBRATION_TRIALS,
};
use crate::sources::{sample_words, Hypothesis, HypothesisPair, Seed, StreamDomain};

/// Radius of the reported confidence intervals, in standard errors.
pub const CI_Z: f64 = 3.0;
/// Largest block for exhaustive evaluation of coded schemes.
pub const MAX_BRUTE_FORCE_CODED: usize = 15;
/// Largest number of source/noise bits enumerated for uncoded schemes.
pub const MAX_BRUTE_FORCE_BITS: usize = 26;

const TRIAL_CHUNK: u64 = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    MonteCarlo,
    Analytic,
    BruteForce,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::MonteCarlo => "montecarlo",
            Engine::Analytic => "analytic",
            Engine::BruteForce => "bruteforce",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "montecarlo" | "mc" => Ok(Engine::MonteCarlo),
            "analytic" => Ok(Engine::Analytic),
            "bruteforce" | "brute-force" => Ok(Engine::BruteForce),
            other => Err(Error::InvalidParameter(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_ci: f64,
    pub beta_ci: f64,
    pub trials_h0: u64,
    pub trials_h1: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub scheme: SchemeKind,
    pub setup: Setup,
    pub descriptor: String,
    pub n: usize,
    pub rate_bits: usize,
    pub rate: f64,
    pub engine: Engine,
    pub seed: Option<u64>,
    pub nuisance: Option<EstimatedParams>,
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// α non-increasing and β non-decreasing along the points, up to `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].alpha <= w[0].alpha + tol && w[1].beta >= w[0].beta - tol)
    }

    /// Whether the first point is `(α, β) = (1, 0)` and the last `(0, 1)`.
    pub fn has_trivial_endpoints(&self) -> bool {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => (a.alpha, a.beta) == (1.0, 0.0) && (b.alpha, b.beta) == (0.0, 1.0),
            _ => false,
        }
    }
}

/// `z·sqrt(p(1−p)/trials)`.
pub fn ci_radius(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    CI_Z * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Knobs of a Monte-Carlo run beyond the scheme itself.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub trials: u64,
    pub seed: u64,
    /// Defaults to the scheme's full attainable grid.
    pub thresholds: Option<Vec<f64>>,
    pub calibration_trials: u64,
    pub exec: Execution,
}

impl RunOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            thresholds: None,
            calibration_trials: DEFAULT_CALIBRATION_TRIALS,
            exec: Execution::default(),
        }
    }
}

fn describe(config: &SchemeConfig) -> String {
    let code = config.quantizer.as_ref().map_or("", |c| c.name());
    match config.kind {
        SchemeKind::Separate => "separate".into(),
        SchemeKind::Truncation => format!("truncation[l={}]", config.trunc_len.unwrap_or(0)),
        SchemeKind::Quantization => format!("quantization[{code}]"),
        SchemeKind::QuantizeBinning => {
            let hb = config.binning.as_ref().map_or((0, 0), |m| (m.rows(), m.cols()));
            format!("qb[{code};hb {}x{}]", hb.0, hb.1)
        }
    }
}

fn new_curve(scheme: &Scheme, config: &SchemeConfig, engine: Engine, seed: Option<u64>) -> RocCurve {
    RocCurve {
        scheme: scheme.kind(),
        setup: scheme.setup(),
        descriptor: describe(config),
        n: scheme.n(),
        rate_bits: scheme.rate_bits(),
        rate: scheme.rate(),
        engine,
        seed,
        nuisance: scheme.nuisance(),
        points: Vec::new(),
    }
}

/// Flattened `(x_weight, v_weight)` cells of a scheme.
struct Cells {
    v_len: usize,
    len: usize,
}

impl Cells {
    fn of(scheme: &Scheme) -> Self {
        let (x, v) = scheme.observation_bounds();
        Self {
            v_len: v + 1,
            len: (x + 1) * (v + 1),
        }
    }

    #[inline]
    fn index(&self, obs: Observation) -> usize {
        obs.x_weight as usize * self.v_len + obs.v_weight as usize
    }

    fn observation(&self, i: usize) -> Observation {
        Observation {
            x_weight: (i / self.v_len) as u8,
            v_weight: (i % self.v_len) as u8,
        }
    }
}

/// Histogram of observations over `trials` samples under `h`.
fn histogram(scheme: &Scheme, pair: &HypothesisPair, h: Hypothesis, trials: u64, seed: u64, exec: Execution) -> Result<Vec<u64>> {
    let cells = Cells::of(scheme);
    let key = Seed::new(seed).derive(StreamDomain::Evaluation, h);
    let n = scheme.n();
    exec.try_map_reduce(
        trials.div_ceil(TRIAL_CHUNK) as usize,
        |c| {
            let mut counts = vec![0u64; cells.len];
            let start = c as u64 * TRIAL_CHUNK;
            for t in start..(start + TRIAL_CHUNK).min(trials) {
                let (x, y) = sample_words(pair, h, n, &mut key.with_stream(t).rng());
                counts[cells.index(scheme.observe_words(x, y)?)] += 1;
            }
            Ok::<_, Error>(counts)
        },
        Vec::new,
        add_counts,
    )
}

/// Monte-Carlo ROC over `thresholds` (the scheme's full grid if `None`).
pub fn run_roc(
    config: &SchemeConfig,
    pair: &HypothesisPair,
    n: usize,
    thresholds: Option<&[f64]>,
    trials: u64,
    seed: u64,
) -> Result<RocCurve> {
    let mut opts = RunOptions::new(trials, seed);
    opts.thresholds = thresholds.map(<[f64]>::to_vec);
    run_roc_with(config, pair, n, &opts)
}

pub fn run_roc_with(config: &SchemeConfig, pair: &HypothesisPair, n: usize, opts: &RunOptions) -> Result<RocCurve> {
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("at least one trial per hypothesis is needed".into()));
    }
    let calibration = Calibration {
        trials: opts.calibration_trials,
        seed: opts.seed,
    };
    let scheme = Scheme::new_with(config, pair, n, calibration, opts.exec)?;
    let h0 = histogram(&scheme, pair, Hypothesis::H0, opts.trials, opts.seed, opts.exec)?;
    let h1 = histogram(&scheme, pair, Hypothesis::H1, opts.trials, opts.seed, opts.exec)?;
    let thresholds = opts.thresholds.clone().unwrap_or_else(|| scheme.thresholds());
    let cells = Cells::of(&scheme);
    let rule = scheme.rule();
    let t = opts.trials;
    let mut curve = new_curve(&scheme, config, Engine::MonteCarlo, Some(opts.seed));
    curve.points = thresholds
        .iter()
        .map(|&tau| {
            let (mut rejected0, mut accepted1) = (0u64, 0u64);
            for i in 0..cells.len {
                match rule.decide(cells.observation(i), tau) {
                    Hypothesis::H1 => rejected0 += h0[i],
                    Hypothesis::H0 => accepted1 += h1[i],
                }
            }
            let alpha = rejected0 as f64 / t as f64;
            let beta = accepted1 as f64 / t as f64;
            RocPoint {
                threshold: tau,
                alpha,
                beta,
                alpha_ci: ci_radius(alpha, t),
                beta_ci: ci_radius(beta, t),
                trials_h0: t,
                trials_h1: t,
            }
        })
        .collect();
    Ok(curve)
}

fn scope(msg: &str) -> Error {
    Error::ScopeViolation(format!("analytic engine: {msg}"))
}

/// Spectra-based ROC. Quantization and quantize-binning are limited to
/// the asymmetric setup with `p0 = p1 = 1/2`.
pub fn analytic_roc(
    config: &SchemeConfig,
    pair: &HypothesisPair,
    n: usize,
    thresholds: Option<&[f64]>,
    cache: &SpectrumCache,
    convention: BoundaryConvention,
) -> Result<RocCurve> {
    let coded = matches!(config.kind, SchemeKind::Quantization | SchemeKind::QuantizeBinning);
    if coded {
        if config.setup != Setup::Asymmetric {
            return Err(scope(
                "asymmetric setup only (no closed form is available for the symmetric setup)",
            ));
        }
        if pair.p0() != 0.5 || pair.p1() != 0.5 {
            return Err(scope("p0 = p1 = 1/2 only"));
        }
        if config.nuisance.is_some_and(|p| !p.pooled()) {
            return Err(scope("pure-weight test only (estimated p0 and p1 must coincide)"));
        }
    }
    let scheme = Scheme::new(config, pair, n, Calibration::default())?;
    let thresholds = thresholds.map_or_else(|| scheme.thresholds(), <[f64]>::to_vec);
    // Integer "w < λ" thresholds become "w ≤ λ − 1".
    let below = |tau: f64| tau.ceil() as i64 - 1;
    let pairs: Vec<ErrorPair> = match config.kind {
        SchemeKind::Separate => thresholds
            .iter()
            .map(|&tau| separate_errors(n, pair.p0(), pair.p1(), below(tau)))
            .collect(),
        SchemeKind::Truncation => {
            let l = scheme.rate_bits();
            thresholds
                .iter()
                .map(|&tau| truncation_errors(l, pair, tau, convention))
                .collect::<Result<_>>()?
        }
        SchemeKind::Quantization => {
            let code = config.quantizer.as_ref().expect("validated by Scheme::new");
            let (spec, _) = cache.coset_leader_spectrum(code, config.tie)?;
            thresholds
                .iter()
                .map(|&tau| quantization_errors(&spec, n, pair.c0(), pair.c1(), below(tau)))
                .collect::<Result<_>>()?
        }
        SchemeKind::QuantizeBinning => {
            let code = config.quantizer.as_ref().expect("validated by Scheme::new");
            let hb = config.binning.as_ref().expect("validated by Scheme::new");
            let (q, _) = cache.coset_leader_spectrum(code, config.tie)?;
            let (qb, _) = cache.zero_region_spectrum(code, hb, config.tie)?;
            let (a, _) = cache.weight_distribution(&concatenated_subcode(code, hb)?)?;
            thresholds
                .iter()
                .map(|&tau| qb_errors(&q, &qb, &a, n, pair.c0(), pair.c1(), below(tau)))
                .collect::<Result<_>>()?
        }
    };
    let mut curve = new_curve(&scheme, config, Engine::Analytic, None);
    curve.points = thresholds.iter().zip(pairs).map(|(&tau, e)| exact_point(tau, e.alpha, e.beta)).collect();
    Ok(curve)
}

fn exact_point(threshold: f64, alpha: f64, beta: f64) -> RocPoint {
    RocPoint {
        threshold,
        alpha,
        beta,
        alpha_ci: 0.0,
        beta_ci: 0.0,
        trials_h0: 0,
        trials_h1: 0,
    }
}

/// Exact probability of every observation cell under each hypothesis, by
/// pushing every source/noise word through the scheme.
fn exact_cell_masses(scheme: &Scheme, pair: &HypothesisPair, exec: Execution) -> Result<[Vec<f64>; 2]> {
    let n = scheme.n();
    let (x_bits, z_bits) = match scheme.kind() {
        SchemeKind::Separate => (n, 0),
        SchemeKind::Truncation => (scheme.rate_bits(), scheme.rate_bits()),
        SchemeKind::Quantization | SchemeKind::QuantizeBinning => {
            if n > MAX_BRUTE_FORCE_CODED {
                return Err(Error::BudgetExceeded {
                    what: "exhaustive evaluation of a coded scheme",
                    required: n,
                    limit: MAX_BRUTE_FORCE_CODED,
                });
            }
            (n, n)
        }
    };
    if scheme.kind() != SchemeKind::Quantization
        && scheme.kind() != SchemeKind::QuantizeBinning
        && x_bits + z_bits > MAX_BRUTE_FORCE_BITS
    {
        return Err(Error::BudgetExceeded {
            what: "exhaustive evaluation of an uncoded scheme",
            required: x_bits + z_bits,
            limit: MAX_BRUTE_FORCE_BITS,
        });
    }
    let cells = Cells::of(scheme);
    // counts[(cell · (x_bits+1) + w(x)) · (z_bits+1) + w(z)]
    let (wx, wz) = (x_bits + 1, z_bits + 1);
    let counts = exec.try_map_reduce(
        1usize << x_bits,
        |x| {
            let x = x as u64;
            let mut counts = vec![0u64; cells.len * wx * wz];
            let xw = x.count_ones() as usize;
            for z in 0..1u64 << z_bits {
                let obs = scheme.observe_words(x, x ^ z)?;
                counts[(cells.index(obs) * wx + xw) * wz + z.count_ones() as usize] += 1;
            }
            Ok::<_, Error>(counts)
        },
        Vec::new,
        add_counts,
    )?;
    let word_prob = |bits: usize, w: usize, p: f64| p.powi(w as i32) * (1.0 - p).powi((bits - w) as i32);
    let masses = Hypothesis::BOTH.map(|h| {
        let (p, c) = (pair.p(h), pair.c(h));
        let px: Vec<f64> = (0..wx).map(|w| word_prob(x_bits, w, p)).collect();
        let pz: Vec<f64> = (0..wz).map(|w| word_prob(z_bits, w, c)).collect();
        (0..cells.len)
            .map(|cell| {
                let mut m = 0.0;
                for a in 0..wx {
                    for b in 0..wz {
                        let k = counts[(cell * wx + a) * wz + b];
                        if k != 0 {
                            m += k as f64 * px[a] * pz[b];
                        }
                    }
                }
                m
            })
            .collect()
    });
    Ok(masses)
}

#[allow(clippy::needless_range_loop)]
fn exact_errors(rule: DecisionRule, cells: &Cells, masses: &[Vec<f64>; 2], tau: f64) -> ErrorPair {
    let (mut alpha, mut beta) = (0.0, 0.0);
    let (mut any_h0, mut any_h1) = (false, false);
    for i in 0..cells.len {
        match rule.decide(cells.observation(i), tau) {
            Hypothesis::H1 => {
                alpha += masses[0][i];
                any_h1 |= masses[0][i] > 0.0 || masses[1][i] > 0.0;
            }
            Hypothesis::H0 => {
                beta += masses[1][i];
                any_h0 |= masses[0][i] > 0.0 || masses[1][i] > 0.0;
            }
        }
    }
    // A decision that never varies gives exact endpoints.
    if !any_h0 {
        (alpha, beta) = (1.0, 0.0);
    } else if !any_h1 {
        (alpha, beta) = (0.0, 1.0);
    }
    ErrorPair {
        threshold: tau,
        alpha: alpha.clamp(0.0, 1.0),
        beta: beta.clamp(0.0, 1.0),
    }
}

/// Exact `(α, β)` at one threshold by exhaustive enumeration.
pub fn brute_force_errors(config: &SchemeConfig, pair: &HypothesisPair, n: usize, threshold: f64) -> Result<ErrorPair> {
    let curve = brute_force_roc(config, pair, n, Some(&[threshold]), Execution::default())?;
    let p = curve.points[0];
    Ok(ErrorPair {
        threshold,
        alpha: p.alpha,
        beta: p.beta,
    })
}

pub fn brute_force_roc(
    config: &SchemeConfig,
    pair: &HypothesisPair,
    n: usize,
    thresholds: Option<&[f64]>,
    exec: Execution,
) -> Result<RocCurve> {
    let scheme = Scheme::new_with(config, pair, n, Calibration::default(), exec)?;
    let masses = exact_cell_masses(&scheme, pair, exec)?;
    let cells = Cells::of(&scheme);
    let thresholds = thresholds.map_or_else(|| scheme.thresholds(), <[f64]>::to_vec);
    let mut curve = new_curve(&scheme, config, Engine::BruteForce, None);
    curve.points = thresholds
        .iter()
        .map(|&tau| {
            let e = exact_errors(scheme.rule(), &cells, &masses, tau);
            exact_point(tau, e.alpha, e.beta)
        })
        .collect();
    Ok(curve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winner {
    First,
    Second,
    Tie,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceEntry {
    pub alpha: f64,
    pub beta_first: f64,
    pub beta_second: f64,
    pub ci_first: f64,
    pub ci_second: f64,
    pub winner: Winner,
    /// The two β intervals `β ± ci` are disjoint.
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub entries: Vec<DominanceEntry>,
}

/// Smallest β among points with `α_i ≤ a`, with its CI radius.
fn staircase_beta(curve: &RocCurve, a: f64) -> Option<(f64, f64)> {
    curve
        .points
        .iter()
        .filter(|p| p.alpha <= a)
        .map(|p| (p.beta, p.beta_ci))
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
}

/// Compares two curves at each α level using the conservative staircase
/// `β(a) = min{β_i : α_i ≤ a}`.
pub fn compare_curves(first: &RocCurve, second: &RocCurve, alphas: &[f64]) -> Result<DominanceReport> {
    if first.n != second.n {
        return Err(Error::DimensionMismatch {
            context: "compared curves' block length",
            expected: first.n,
            found: second.n,
        });
    }
    let entries = alphas
        .iter()
        .map(|&a| {
            let missing = |c: &RocCurve| {
                Error::InvalidParameter(format!("α = {a} is below every point of curve `{}`", c.descriptor))
            };
            let (b1, c1) = staircase_beta(first, a).ok_or_else(|| missing(first))?;
            let (b2, c2) = staircase_beta(second, a).ok_or_else(|| missing(second))?;
            let winner = if b1 < b2 {
                Winner::First
            } else if b2 < b1 {
                Winner::Second
            } else {
                Winner::Tie
            };
            let significant = b1 + c1 < b2 - c2 || b2 + c2 < b1 - c1;
            Ok(DominanceEntry {
                alpha: a,
                beta_first: b1,
                beta_second: b2,
                ci_first: c1,
                ci_second: c2,
                winner,
                significant,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DominanceReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_code;
    use crate::gf2::GF2Matrix;

    fn half_pair() -> HypothesisPair {
        HypothesisPair::new(0.5, 0.1, 0.5, 0.5).unwrap()
    }

    #[test]
    fn single_trial_endpoints() {
        let pair = half_pair();
        let cfg = SchemeConfig::quantization(Setup::Asymmetric, make_code("hamming-7-4").unwrap());
        let curve = run_roc(&cfg, &pair, 7, None, 1, 3).unwrap();
        assert_eq!(curve.points.len(), 9);
        assert!(curve.has_trivial_endpoints());
        assert_eq!(curve.points[8].trials_h0, 1);
    }

    #[test]
    fn reruns_are_identical_and_thread_independent() {
        let pair = HypothesisPair::new(0.08, 0.1, 0.5, 0.35).unwrap();
        let cfg = SchemeConfig::truncation(10);
        let mut opts = RunOptions::new(3000, 11);
        let a = run_roc_with(&cfg, &pair, 20, &opts).unwrap();
        let b = run_roc_with(&cfg, &pair, 20, &opts).unwrap();
        opts.exec = Execution::Sequential;
        let c = run_roc_with(&cfg, &pair, 20, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.is_monotone(0.0));
    }

    #[test]
    fn brute_force_separate_matches_binomial_formula() {
        let pair = HypothesisPair::new(0.08, 0.1, 0.5, 0.35).unwrap();
        let curve = brute_force_roc(&SchemeConfig::separate(), &pair, 12, None, Execution::default()).unwrap();
        for p in &curve.points {
            let e = separate_errors(12, 0.08, 0.5, p.threshold as i64 - 1);
            assert!((p.alpha - e.alpha).abs() < 1e-14 && (p.beta - e.beta).abs() < 1e-14);
        }
        assert!(curve.has_trivial_endpoints());
    }

    #[test]
    fn brute_force_truncation_matches_formula() {
        let pair = HypothesisPair::new(0.3, 0.1, 0.5, 0.35).unwrap();
        let cfg = SchemeConfig::truncation(6);
        let curve = brute_force_roc(&cfg, &pair, 10, None, Execution::default()).unwrap();
        for p in &curve.points {
            let e = truncation_errors(6, &pair, p.threshold, BoundaryConvention::Partition).unwrap();
            assert!((p.alpha - e.alpha).abs() < 1e-12 && (p.beta - e.beta).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_scope_rules() {
        let cache = SpectrumCache::new(tempfile::tempdir().unwrap().path());
        let code = make_code("hamming-7-4").unwrap();
        let hb = GF2Matrix::parse_rows(&["1111"]).unwrap();
        let sym = SchemeConfig::quantize_binning(Setup::Symmetric, code.clone(), hb);
        let err = analytic_roc(&sym, &half_pair(), 7, None, &cache, BoundaryConvention::Partition).unwrap_err();
        assert!(matches!(err, Error::ScopeViolation(ref m) if m.starts_with("analytic engine: asymmetric setup only")));

        let skew = HypothesisPair::new(0.2, 0.1, 0.5, 0.5).unwrap();
        let asym = SchemeConfig::quantization(Setup::Asymmetric, code);
        assert!(matches!(
            analytic_roc(&asym, &skew, 7, None, &cache, BoundaryConvention::Partition),
            Err(Error::ScopeViolation(_))
        ));
    }

    #[test]
    fn staircase_comparison() {
        let pair = half_pair();
        let cfg = SchemeConfig::truncation(5);
        let c = run_roc(&cfg, &pair, 8, None, 2000, 1).unwrap();
        let r = compare_curves(&c, &c, &[0.05, 0.5, 1.0]).unwrap();
        assert!(r.entries.iter().all(|e| e.winner == Winner::Tie && !e.significant));

        let mut short = c.clone();
        short.points.retain(|p| p.alpha > 0.3);
        assert!(compare_curves(&c, &short, &[0.1]).is_err());
    }
}
