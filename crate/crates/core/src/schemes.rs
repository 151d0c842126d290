//! The four encoder/decoder schemes and their threshold tests.
//!
//! Every trial reduces to an [`Observation`]: two Hamming weights that the
//! scheme's test combines into its statistic. Separate: `w(x)`.
//! Truncation: `w(x^l)` and `w(x^l ⊕ y^l)`. Quantization and
//! quantize-binning: the weight of the (decoded) quantized `x` and the
//! weight of its difference with `y` (asymmetric) or with the quantized `y`
//! (symmetric).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codes::{ml_decode, Binning, LinearCode, TieRule};
use crate::error::{Error, Result};
use crate::gf2::{low_mask, BitVector, GF2Matrix};
use crate::par::Execution;
use crate::sources::{sample_words, Hypothesis, HypothesisPair, Seed, StreamDomain};

pub type Decision = Hypothesis;

/// Default number of calibration trials per hypothesis.
pub const DEFAULT_CALIBRATION_TRIALS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Separate,
    Truncation,
    Quantization,
    #[serde(rename = "qb")]
    QuantizeBinning,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Separate => "separate",
            SchemeKind::Truncation => "truncation",
            SchemeKind::Quantization => "quantization",
            SchemeKind::QuantizeBinning => "qb",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separate" => Ok(SchemeKind::Separate),
            "truncation" => Ok(SchemeKind::Truncation),
            "quantization" => Ok(SchemeKind::Quantization),
            "qb" | "quantize-binning" => Ok(SchemeKind::QuantizeBinning),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setup {
    /// `y` is available uncompressed at the decider.
    #[default]
    #[serde(rename = "asym")]
    Asymmetric,
    /// Both sources are encoded with the same scheme.
    #[serde(rename = "sym")]
    Symmetric,
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setup::Asymmetric => "asym",
            Setup::Symmetric => "sym",
        })
    }
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asym" | "asymmetric" => Ok(Setup::Asymmetric),
            "sym" | "symmetric" => Ok(Setup::Symmetric),
            other => Err(Error::InvalidParameter(format!("unknown setup `{other}`"))),
        }
    }
}

/// Estimated Bernoulli parameters of the quantized sources, strictly
/// inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParams {
    pub p0_hat: f64,
    pub c0_hat: f64,
    pub p1_hat: f64,
    pub c1_hat: f64,
}

impl EstimatedParams {
    pub fn new(p0_hat: f64, c0_hat: f64, p1_hat: f64, c1_hat: f64) -> Result<Self> {
        for v in [p0_hat, c0_hat, p1_hat, c1_hat] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "estimated parameter {v} must lie strictly inside (0, 1)"
                )));
            }
        }
        Ok(Self {
            p0_hat,
            c0_hat,
            p1_hat,
            c1_hat,
        })
    }

    /// Whether the source term drops out of the test.
    pub fn pooled(&self) -> bool {
        self.p0_hat == self.p1_hat
    }

    /// Base-2 log-likelihood weights `(L_p, L_c)` of the two weights.
    pub fn log_weights(&self) -> (f64, f64) {
        (
            log_ratio(self.p0_hat, self.p1_hat),
            log_ratio(self.c0_hat, self.c1_hat),
        )
    }
}

/// `log2( b (1 − a) / (a (1 − b)) )`, zero when `a == b`.
pub fn log_ratio(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b * (1.0 - a) / (a * (1.0 - b))).log2()
    }
}

/// Static description of a scheme before it is bound to a source.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub setup: Setup,
    pub quantizer: Option<LinearCode>,
    pub binning: Option<GF2Matrix>,
    pub trunc_len: Option<usize>,
    pub nuisance: Option<EstimatedParams>,
    pub tie: TieRule,
}

impl SchemeConfig {
    fn base(kind: SchemeKind, setup: Setup) -> Self {
        Self {
            kind,
            setup,
            quantizer: None,
            binning: None,
            trunc_len: None,
            nuisance: None,
            tie: TieRule::default(),
        }
    }

    pub fn separate() -> Self {
        Self::base(SchemeKind::Separate, Setup::Symmetric)
    }

    pub fn truncation(l: usize) -> Self {
        Self {
            trunc_len: Some(l),
            ..Self::base(SchemeKind::Truncation, Setup::Symmetric)
        }
    }

    pub fn quantization(setup: Setup, code: LinearCode) -> Self {
        Self {
            quantizer: Some(code),
            ..Self::base(SchemeKind::Quantization, setup)
        }
    }

    pub fn quantize_binning(setup: Setup, code: LinearCode, hb: GF2Matrix) -> Self {
        Self {
            quantizer: Some(code),
            binning: Some(hb),
            ..Self::base(SchemeKind::QuantizeBinning, setup)
        }
    }

    pub fn with_nuisance(mut self, params: EstimatedParams) -> Self {
        self.nuisance = Some(params);
        self
    }

    pub fn with_tie(mut self, tie: TieRule) -> Self {
        self.tie = tie;
        self
    }

    /// Block length implied by the quantizer, if any.
    pub fn code_len(&self) -> Option<usize> {
        self.quantizer.as_ref().map(LinearCode::n)
    }

    fn observer(&self, n: usize) -> Result<Observer> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidLength(n));
        }
        let need_code = || {
            let code = self.quantizer.as_ref().ok_or_else(|| {
                Error::InvalidParameter(format!("the {} scheme needs a quantizer code", self.kind))
            })?;
            if code.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "quantizer length",
                    expected: n,
                    found: code.n(),
                });
            }
            Ok(code)
        };
        Ok(match self.kind {
            SchemeKind::Separate => Observer::Separate,
            SchemeKind::Truncation => {
                let l = self.trunc_len.ok_or_else(|| {
                    Error::InvalidParameter("truncation needs a length l".into())
                })?;
                if l == 0 || l > n {
                    return Err(Error::InvalidParameter(format!("truncation length {l} outside 1..={n}")));
                }
                Observer::Truncation { mask: low_mask(l) }
            }
            SchemeKind::Quantization => {
                let code = need_code()?;
                Observer::Quantization {
                    decoder: code.decoder(self.tie)?,
                    setup: self.setup,
                }
            }
            SchemeKind::QuantizeBinning => {
                let code = need_code()?;
                let hb = self.binning.clone().ok_or_else(|| {
                    Error::InvalidParameter("quantize-binning needs a binning matrix".into())
                })?;
                Observer::QuantizeBinning {
                    decoder: code.decoder(self.tie)?,
                    binning: Arc::new(Binning::new(code, hb)?),
                    setup: self.setup,
                    tie: self.tie,
                }
            }
        })
    }
}

/// The two weights a trial contributes to the decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    pub x_weight: u8,
    pub v_weight: u8,
}

#[derive(Clone, Debug)]
enum Observer {
    Separate,
    Truncation {
        mask: u64,
    },
    Quantization {
        decoder: Arc<crate::codes::decode::Decoder>,
        setup: Setup,
    },
    QuantizeBinning {
        decoder: Arc<crate::codes::decode::Decoder>,
        binning: Arc<Binning>,
        setup: Setup,
        tie: TieRule,
    },
}

impl Observer {
    #[inline]
    fn observe(&self, x: u64, y: u64) -> Result<Observation> {
        let (xw, vw) = match self {
            Observer::Separate => (x.count_ones(), 0),
            Observer::Truncation { mask } => ((x & mask).count_ones(), ((x ^ y) & mask).count_ones()),
            Observer::Quantization { decoder, setup } => {
                let xq = decoder.decode(x);
                let other = match setup {
                    Setup::Asymmetric => y,
                    Setup::Symmetric => decoder.decode(y),
                };
                (xq.count_ones(), (xq ^ other).count_ones())
            }
            Observer::QuantizeBinning {
                decoder,
                binning,
                setup,
                tie,
            } => {
                let code = binning.code();
                let r = binning.syndrome_word(code.message_word(decoder.decode(x)));
                match setup {
                    Setup::Asymmetric => {
                        let xh = code.encode_word(binning.constrained_word(r, y, *tie)?);
                        (xh.count_ones(), (xh ^ y).count_ones())
                    }
                    Setup::Symmetric => {
                        let s = binning.syndrome_word(code.message_word(decoder.decode(y)));
                        let (u, t) = binning.joint_word(r, s, *tie)?;
                        let (xh, yh) = (code.encode_word(u), code.encode_word(t));
                        (xh.count_ones(), (xh ^ yh).count_ones())
                    }
                }
            }
        };
        Ok(Observation {
            x_weight: xw as u8,
            v_weight: vw as u8,
        })
    }
}

/// Value of a test statistic: an integer weight or a weighted sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestStatistic {
    Weight(u32),
    Weighted(f64),
}

impl TestStatistic {
    pub fn value(self) -> f64 {
        match self {
            TestStatistic::Weight(w) => w as f64,
            TestStatistic::Weighted(v) => v,
        }
    }
}

/// A threshold test in reduced form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecisionRule {
    /// H0 iff `w(x) < λ`.
    SourceWeightBelow,
    /// H0 iff `w(v) < λ`.
    DifferenceWeightBelow,
    /// H0 iff `w_x·lp + w_v·lc < τ`.
    WeightedBelow { lp: f64, lc: f64 },
    /// H0 iff `w_x·lp + w_v·lc ≤ τ`.
    WeightedAtMost { lp: f64, lc: f64 },
}

impl DecisionRule {
    #[inline]
    pub fn statistic(&self, obs: Observation) -> TestStatistic {
        match *self {
            DecisionRule::SourceWeightBelow => TestStatistic::Weight(obs.x_weight as u32),
            DecisionRule::DifferenceWeightBelow => TestStatistic::Weight(obs.v_weight as u32),
            DecisionRule::WeightedBelow { lp, lc } | DecisionRule::WeightedAtMost { lp, lc } => {
                TestStatistic::Weighted(weighted(obs, lp, lc))
            }
        }
    }

    #[inline]
    pub fn decide(&self, obs: Observation, threshold: f64) -> Decision {
        let accept = match self {
            DecisionRule::WeightedAtMost { .. } => self.statistic(obs).value() <= threshold,
            _ => self.statistic(obs).value() < threshold,
        };
        if accept {
            Hypothesis::H0
        } else {
            Hypothesis::H1
        }
    }

    /// The full attainable threshold grid, increasing. The first value
    /// rejects H0 always and the last accepts it always.
    pub fn thresholds(&self, x_max: usize, v_max: usize) -> Vec<f64> {
        match *self {
            DecisionRule::SourceWeightBelow => (0..=x_max + 1).map(|t| t as f64).collect(),
            DecisionRule::DifferenceWeightBelow => (0..=v_max + 1).map(|t| t as f64).collect(),
            DecisionRule::WeightedBelow { lp, lc } => {
                let mut values = weighted_values(x_max, v_max, lp, lc);
                values.push(values.last().copied().unwrap_or(0.0) + 1.0);
                values
            }
            DecisionRule::WeightedAtMost { lp, lc } => {
                let values = weighted_values(x_max, v_max, lp, lc);
                std::iter::once(values[0] - 1.0).chain(values).collect()
            }
        }
    }
}

#[inline]
fn weighted(obs: Observation, lp: f64, lc: f64) -> f64 {
    obs.x_weight as f64 * lp + obs.v_weight as f64 * lc
}

fn weighted_values(x_max: usize, v_max: usize, lp: f64, lc: f64) -> Vec<f64> {
    let mut values: Vec<f64> = (0..=x_max)
        .flat_map(|a| {
            (0..=v_max).map(move |b| {
                weighted(
                    Observation {
                        x_weight: a as u8,
                        v_weight: b as u8,
                    },
                    lp,
                    lc,
                )
            })
        })
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// How nuisance parameters are estimated when a scheme needs them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Calibration {
    pub trials: u64,
    pub seed: u64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            trials: DEFAULT_CALIBRATION_TRIALS,
            seed: 0x5eed_ca11_b7a7_e000,
        }
    }
}

/// A scheme bound to a block length and a source pair, ready to run.
#[derive(Clone, Debug)]
pub struct Scheme {
    kind: SchemeKind,
    setup: Setup,
    n: usize,
    rate_bits: usize,
    x_max: usize,
    v_max: usize,
    observer: Observer,
    rule: DecisionRule,
    nuisance: Option<EstimatedParams>,
}

impl Scheme {
    /// Compiles `config` for length `n`. Quantization and quantize-binning
    /// tests with `p0 ≠ p1` need estimated parameters: they are taken from
    /// the config or estimated with `calibration`.
    pub fn new(config: &SchemeConfig, pair: &HypothesisPair, n: usize, calibration: Calibration) -> Result<Self> {
        Self::new_with(config, pair, n, calibration, Execution::default())
    }

    pub fn new_with(
        config: &SchemeConfig,
        pair: &HypothesisPair,
        n: usize,
        calibration: Calibration,
        exec: Execution,
    ) -> Result<Self> {
        let observer = config.observer(n)?;
        let (rate_bits, x_max) = match &observer {
            Observer::Separate => (1, n),
            Observer::Truncation { mask } => (mask.count_ones() as usize, mask.count_ones() as usize),
            Observer::Quantization { .. } => (config.quantizer.as_ref().map_or(0, LinearCode::k), n),
            Observer::QuantizeBinning { binning, .. } => (binning.rank(), n),
        };
        let v_max = x_max;
        let mut nuisance = None;
        let rule = match config.kind {
            SchemeKind::Separate => DecisionRule::SourceWeightBelow,
            SchemeKind::Truncation => {
                let lp = log_ratio(pair.p0(), pair.p1());
                let lc = log_ratio(pair.c0(), pair.c1());
                if lp == 0.0 && lc == 0.0 {
                    return Err(Error::DegenerateTest);
                }
                DecisionRule::WeightedBelow { lp, lc }
            }
            SchemeKind::Quantization | SchemeKind::QuantizeBinning => {
                let params = match config.nuisance {
                    Some(p) => Some(p),
                    None if pair.p0() == pair.p1() => None,
                    None => Some(estimate_with(&observer, pair, n, calibration, exec)?),
                };
                nuisance = params;
                match params {
                    None => DecisionRule::DifferenceWeightBelow,
                    Some(p) if p.pooled() => DecisionRule::DifferenceWeightBelow,
                    Some(p) => {
                        let (lp, lc) = p.log_weights();
                        if lp == 0.0 && lc == 0.0 {
                            return Err(Error::DegenerateTest);
                        }
                        DecisionRule::WeightedAtMost { lp, lc }
                    }
                }
            }
        };
        Ok(Self {
            kind: config.kind,
            setup: config.setup,
            n,
            rate_bits,
            x_max,
            v_max,
            observer,
            rule,
            nuisance,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn setup(&self) -> Setup {
        self.setup
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Bits sent per encoder per block.
    pub fn rate_bits(&self) -> usize {
        self.rate_bits
    }

    pub fn rate(&self) -> f64 {
        self.rate_bits as f64 / self.n as f64
    }

    pub fn rule(&self) -> DecisionRule {
        self.rule
    }

    pub fn nuisance(&self) -> Option<EstimatedParams> {
        self.nuisance
    }

    /// Largest values of the two observed weights.
    pub fn observation_bounds(&self) -> (usize, usize) {
        (self.x_max, self.v_max)
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.rule.thresholds(self.x_max, self.v_max)
    }

    #[inline]
    pub fn observe_words(&self, x: u64, y: u64) -> Result<Observation> {
        self.observer.observe(x, y)
    }

    pub fn observe(&self, x: BitVector, y: BitVector) -> Result<Observation> {
        crate::codes::check_len("source length", self.n, x.len())?;
        crate::codes::check_len("source length", self.n, y.len())?;
        self.observer.observe(x.bits(), y.bits())
    }

    #[inline]
    pub fn decide(&self, obs: Observation, threshold: f64) -> Decision {
        self.rule.decide(obs, threshold)
    }
}

/// Two-bit fusion of the separate scheme. Each encoder votes H0 when its
/// weight is below its threshold; on disagreement the decider follows
/// encoder 1, so the outcome is always encoder 1's vote.
#[allow(clippy::if_same_then_else)]
pub fn separate_decide(x: BitVector, y: BitVector, lambda1: u32, lambda2: u32) -> Decision {
    let vote = |w: u32, l: u32| if w < l { Hypothesis::H0 } else { Hypothesis::H1 };
    let (b1, b2) = (vote(x.weight(), lambda1), vote(y.weight(), lambda2));
    if b1 == b2 {
        b1
    } else {
        b1
    }
}

/// `w(x^l)·L_p + w(x^l ⊕ y^l)·L_c` with the true parameters (base 2).
pub fn truncation_statistic(
    x: BitVector,
    y: BitVector,
    l: usize,
    pair: &HypothesisPair,
) -> Result<TestStatistic> {
    crate::codes::check_len("truncation inputs", x.len(), y.len())?;
    if l == 0 || l > x.len() {
        return Err(Error::InvalidParameter(format!("truncation length {l} outside 1..={}", x.len())));
    }
    let lp = log_ratio(pair.p0(), pair.p1());
    let lc = log_ratio(pair.c0(), pair.c1());
    if lp == 0.0 && lc == 0.0 {
        return Err(Error::DegenerateTest);
    }
    let (xl, yl) = (x.prefix(l), y.prefix(l));
    let obs = Observation {
        x_weight: xl.weight() as u8,
        v_weight: (xl ^ yl).weight() as u8,
    };
    Ok(TestStatistic::Weighted(weighted(obs, lp, lc)))
}

/// Nearest codeword `x_q` and its message `u_q`.
pub fn quantize(code: &LinearCode, x: BitVector, tie: TieRule) -> Result<(BitVector, BitVector)> {
    ml_decode(code, x, tie)
}

/// Quantization test on `x_q` and `y` (asymmetric) or `y_q` (symmetric):
/// `w(v) < τ` when `p̂0 = p̂1`, otherwise the weighted statistic `≤ τ`.
pub fn quant_test(x_q: BitVector, other: BitVector, params: &EstimatedParams, tau: f64) -> Decision {
    let obs = Observation {
        x_weight: x_q.weight() as u8,
        v_weight: (x_q ^ other).weight() as u8,
    };
    params_rule(params).decide(obs, tau)
}

fn params_rule(params: &EstimatedParams) -> DecisionRule {
    if params.pooled() {
        DecisionRule::DifferenceWeightBelow
    } else {
        let (lp, lc) = params.log_weights();
        DecisionRule::WeightedAtMost { lp, lc }
    }
}

/// Syndrome `Hb · u_q` of the quantized message.
pub fn qb_encode(binning: &Binning, x: BitVector, tie: TieRule) -> Result<BitVector> {
    let (u, _) = quantize(binning.code(), x, tie)?;
    binning.syndrome(u)
}

pub fn qb_decide_asym(
    binning: &Binning,
    r: BitVector,
    y: BitVector,
    params: &EstimatedParams,
    tau: f64,
    tie: TieRule,
) -> Result<Decision> {
    let u = crate::codes::constrained_ml_decode(binning, r, y, tie)?;
    let xh = binning.code().encode(u)?;
    Ok(quant_test(xh, y, params, tau))
}

pub fn qb_decide_sym(
    binning: &Binning,
    r: BitVector,
    s: BitVector,
    params: &EstimatedParams,
    tau: f64,
    tie: TieRule,
) -> Result<Decision> {
    let (u, t) = crate::codes::joint_constrained_decode(binning, r, s, tie)?;
    let code = binning.code();
    Ok(quant_test(code.encode(u)?, code.encode(t)?, params, tau))
}

/// Monte-Carlo estimates of the Bernoulli parameters of `x_q` and `v`
/// under each hypothesis, clamped to `[1/(2·trials·n), 1 − 1/(2·trials·n)]`.
pub fn estimate_nuisance(
    config: &SchemeConfig,
    pair: &HypothesisPair,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<EstimatedParams> {
    let observer = config.observer(n)?;
    estimate_with(&observer, pair, n, Calibration { trials, seed }, Execution::default())
}

const CALIBRATION_CHUNK: u64 = 1024;

fn estimate_with(
    observer: &Observer,
    pair: &HypothesisPair,
    n: usize,
    calibration: Calibration,
    exec: Execution,
) -> Result<EstimatedParams> {
    let trials = calibration.trials;
    if trials == 0 {
        return Err(Error::InvalidParameter("calibration needs at least one trial".into()));
    }
    let mut hats = [[0f64; 2]; 2];
    for h in Hypothesis::BOTH {
        let key = Seed::new(calibration.seed).derive(StreamDomain::Calibration, h);
        let chunks = trials.div_ceil(CALIBRATION_CHUNK) as usize;
        let sums = exec.try_map_reduce(
            chunks,
            |c| {
                let start = c as u64 * CALIBRATION_CHUNK;
                let mut acc = (0u64, 0u64);
                for t in start..(start + CALIBRATION_CHUNK).min(trials) {
                    let (x, y) = sample_words(pair, h, n, &mut key.with_stream(t).rng());
                    let obs = observer.observe(x, y)?;
                    acc.0 += obs.x_weight as u64;
                    acc.1 += obs.v_weight as u64;
                }
                Ok::<_, Error>(acc)
            },
            || (0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1),
        )?;
        let total = (trials * n as u64) as f64;
        let floor = 1.0 / (2.0 * total);
        let clamp = |v: f64| v.clamp(floor, 1.0 - floor);
        hats[h as usize] = [clamp(sums.0 as f64 / total), clamp(sums.1 as f64 / total)];
    }
    EstimatedParams::new(hats[0][0], hats[0][1], hats[1][0], hats[1][1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::make_code;

    fn bv(s: &str) -> BitVector {
        BitVector::parse(s).unwrap()
    }

    #[test]
    fn separate_collapses_to_encoder_one() {
        let x = bv("1100000");
        let y = bv("1111111");
        assert_eq!(separate_decide(x, y, 8, 0), Hypothesis::H0);
        assert_eq!(separate_decide(x, y, 0, 8), Hypothesis::H1);
        assert_eq!(separate_decide(x, y, 3, 3), Hypothesis::H0);
        assert_eq!(separate_decide(x, y, 2, 3), Hypothesis::H1);
    }

    #[test]
    fn truncation_statistic_examples() {
        let pair = HypothesisPair::new(0.08, 0.1, 0.5, 0.35).unwrap();
        let z = BitVector::zeros(10);
        assert_eq!(truncation_statistic(z, z, 5, &pair).unwrap(), TestStatistic::Weighted(0.0));

        let same_p = HypothesisPair::new(0.5, 0.1, 0.5, 0.35).unwrap();
        let x = bv("1111000000");
        let y = bv("1010000000");
        let lc = log_ratio(0.1, 0.35);
        assert_eq!(truncation_statistic(x, y, 4, &same_p).unwrap(), TestStatistic::Weighted(2.0 * lc));

        let flat = HypothesisPair::new(0.3, 0.2, 0.3, 0.2).unwrap();
        assert!(matches!(truncation_statistic(x, y, 4, &flat), Err(Error::DegenerateTest)));
    }

    #[test]
    fn quantize_examples() {
        let id = make_code("identity-6").unwrap();
        let x = bv("101101");
        assert_eq!(quantize(&id, x, TieRule::default()).unwrap(), (x, x));

        let ham = make_code("hamming-7-4").unwrap();
        for w in 0..128 {
            let x = BitVector::from_word(7, w);
            let (u, xq) = quantize(&ham, x, TieRule::default()).unwrap();
            assert!(x.distance(&xq) <= 1);
            assert_eq!(ham.encode(u).unwrap(), xq);
        }
    }

    #[test]
    fn quant_test_pooled_and_weighted() {
        let pooled = EstimatedParams::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let xq = bv("1110000");
        assert_eq!(quant_test(xq, xq, &pooled, 1.0), Hypothesis::H0);
        assert_eq!(quant_test(xq, bv("0000000"), &pooled, 3.0), Hypothesis::H1);
        assert_eq!(quant_test(xq, bv("0000000"), &pooled, 4.0), Hypothesis::H0);

        let weighted = EstimatedParams::new(0.1, 0.1, 0.4, 0.4).unwrap();
        let (lp, lc) = weighted.log_weights();
        let stat = 3.0 * lp + 1.0 * lc;
        assert_eq!(quant_test(xq, bv("1100000"), &weighted, stat), Hypothesis::H0);
        assert_eq!(quant_test(xq, bv("1100000"), &weighted, stat - 1e-9), Hypothesis::H1);
    }

    #[test]
    fn qb_encode_and_decide() {
        let code = make_code("hamming-7-4").unwrap();
        let binning = Binning::new(&code, GF2Matrix::parse_rows(&["1111"]).unwrap()).unwrap();
        let tie = TieRule::default();
        assert!(qb_encode(&binning, BitVector::zeros(7), tie).unwrap().is_zero());

        let u1 = BitVector::from_word(4, 0b0011);
        let u2 = BitVector::from_word(4, 0b0110);
        let r = |u| qb_encode(&binning, code.encode(u).unwrap(), tie).unwrap();
        assert_eq!(r(u1 ^ u2), r(u1) ^ r(u2));

        let params = EstimatedParams::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let y = code.encode(u1).unwrap();
        assert_eq!(qb_decide_asym(&binning, r(u1), y, &params, 1.0, tie).unwrap(), Hypothesis::H0);
        assert_eq!(qb_decide_asym(&binning, r(u1), y, &params, 0.0, tie).unwrap(), Hypothesis::H1);
        assert_eq!(qb_decide_sym(&binning, r(u1), r(u1), &params, 1.0, tie).unwrap(), Hypothesis::H0);
    }

    #[test]
    fn thresholds_cover_both_endpoints() {
        let rules = [
            DecisionRule::SourceWeightBelow,
            DecisionRule::DifferenceWeightBelow,
            DecisionRule::WeightedBelow { lp: 0.7, lc: 1.3 },
            DecisionRule::WeightedAtMost { lp: -0.2, lc: 1.1 },
        ];
        for rule in rules {
            let grid = rule.thresholds(6, 6);
            assert!(grid.windows(2).all(|w| w[0] < w[1]));
            for a in 0..=6u8 {
                for b in 0..=6u8 {
                    let obs = Observation { x_weight: a, v_weight: b };
                    assert_eq!(rule.decide(obs, grid[0]), Hypothesis::H1, "{rule:?}");
                    assert_eq!(rule.decide(obs, *grid.last().unwrap()), Hypothesis::H0, "{rule:?}");
                }
            }
        }
        assert_eq!(DecisionRule::WeightedBelow { lp: 1.0, lc: 1.0 }.thresholds(2, 2).len(), 6);
    }

    #[test]
    fn rate_accounting() {
        let pair = HypothesisPair::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let cal = Calibration::default();
        let rate = |cfg: SchemeConfig, n| Scheme::new(&cfg, &pair, n, cal).unwrap().rate_bits();
        assert_eq!(rate(SchemeConfig::separate(), 30), 1);
        assert_eq!(rate(SchemeConfig::truncation(16), 31), 16);
        let bch = make_code("bch-31-16").unwrap();
        assert_eq!(rate(SchemeConfig::quantization(Setup::Asymmetric, bch.clone()), 31), 16);
        let hb = make_code("rm-16-5").unwrap().parity_check().clone();
        assert_eq!(rate(SchemeConfig::quantize_binning(Setup::Symmetric, bch, hb), 31), 11);
    }

    #[test]
    fn config_validation() {
        let pair = HypothesisPair::new(0.5, 0.1, 0.5, 0.5).unwrap();
        let cal = Calibration::default();
        assert!(Scheme::new(&SchemeConfig::truncation(0), &pair, 10, cal).is_err());
        assert!(Scheme::new(&SchemeConfig::truncation(11), &pair, 10, cal).is_err());
        let ham = make_code("hamming-7-4").unwrap();
        assert!(Scheme::new(&SchemeConfig::quantization(Setup::Asymmetric, ham.clone()), &pair, 8, cal).is_err());
        let wrong = SchemeConfig::quantize_binning(Setup::Asymmetric, ham, GF2Matrix::parse_rows(&["111"]).unwrap());
        assert!(Scheme::new(&wrong, &pair, 7, cal).is_err());
    }

    #[test]
    fn identity_quantizer_estimates_true_parameters() {
        let pair = HypothesisPair::new(0.2, 0.1, 0.4, 0.3).unwrap();
        let cfg = SchemeConfig::quantization(Setup::Asymmetric, make_code("identity-16").unwrap());
        let est = estimate_nuisance(&cfg, &pair, 16, 20_000, 9).unwrap();
        for (hat, truth) in [(est.p0_hat, 0.2), (est.c0_hat, 0.1), (est.p1_hat, 0.4), (est.c1_hat, 0.3)] {
            assert!((hat - truth).abs() < 0.01, "{hat} vs {truth}");
        }
    }

    #[test]
    fn repetition_quantizer_is_unbiased_at_one_half() {
        let pair = HypothesisPair::new(0.5, 0.1, 0.5, 0.3).unwrap();
        let cfg = SchemeConfig::quantization(Setup::Symmetric, make_code("repetition-9").unwrap());
        let est = estimate_nuisance(&cfg, &pair, 9, 20_000, 4).unwrap();
        // A repetition codeword has weight 0 or n, so p̂ is a mean of 20000 fair coin flips.
        let tol = 3.0 * 0.5 / 20_000f64.sqrt();
        assert!((est.p0_hat - 0.5).abs() < tol, "{}", est.p0_hat);
        assert!((est.p1_hat - 0.5).abs() < tol, "{}", est.p1_hat);
    }

    #[test]
    fn estimates_are_clamped_inside_the_unit_interval() {
        let pair = HypothesisPair::new_unchecked(0.0, 0.0, 0.0, 0.0);
        let cfg = SchemeConfig::quantization(Setup::Asymmetric, make_code("identity-4").unwrap());
        let est = estimate_nuisance(&cfg, &pair, 4, 10, 1).unwrap();
        assert_eq!(est.p0_hat, 1.0 / 80.0);
        assert_eq!(est.c1_hat, 1.0 / 80.0);
    }
}
