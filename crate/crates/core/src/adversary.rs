//! Classical strategies against the probabilistic oracle, and the quantum
//! repeated-measurement experiment they are compared with.
//!
//! Every strategy is charged per oracle interaction: one classical query,
//! or one circuit execution on the quantum side. All strategies are told
//! `k`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Binomial, Discrete};

use crate::analytics::{
    count_consistent_keysets, prob_all_keys, ConsistencyCount, EnumerationOptions,
    RecoveryProbability,
};
use crate::error::{Error, Result};
use crate::exact::ExactProbability;
use crate::keyspace::{rq_profile, BitString, KeySet, RqProfile, SecretKey};
use crate::rng::{self, SimRng};
use crate::simulator::{run_circuit, ClassicalOracle};

pub const ASSUMPTION_K_KNOWN: &str = "the number of keys k is known to every strategy";
pub const ASSUMPTION_DISTINCT: &str = "the classical guesser assumes the keys are pairwise distinct";

/// Recovers the single key of a deterministic oracle with one query per bit,
/// `x = 2^q` revealing bit `q`.
pub fn classical_bv_single_key(oracle: &mut ClassicalOracle) -> Result<SecretKey> {
    if oracle.k() != 1 {
        return Err(Error::input(format!(
            "bitwise recovery is only sound for a single-key oracle, this one holds {} keys",
            oracle.k()
        )));
    }
    let n = oracle.width();
    let mut value = 0u64;
    for q in 0..n {
        if oracle.query(&BitString::unit(q, n)?)? {
            value |= 1 << q;
        }
    }
    BitString::from_value(value, n)
}

/// Real-valued `r_q` estimates, `k` times the observed frequency of a 1 on
/// input `2^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RqEstimate {
    pub k: usize,
    pub trials_per_bit: u64,
    /// Little-endian: `raw[q]` estimates `r_q`.
    pub raw: Vec<f64>,
    pub queries: u64,
}

impl RqEstimate {
    /// Nearest-integer profile, clamped to `0..=k`. Kept separate from the
    /// raw estimate so sampling error stays visible.
    pub fn rounded(&self) -> RqProfile {
        let counts = self.raw.iter().map(|&r| round_estimate(r, self.k)).collect();
        RqProfile::new(counts, self.k).expect("rounded estimates lie in 0..=k")
    }

    pub fn msb_first(&self) -> Vec<f64> {
        self.raw.iter().rev().copied().collect()
    }
}

fn round_estimate(raw: f64, k: usize) -> usize {
    (raw.round().max(0.0) as usize).min(k)
}

pub fn estimate_rq(oracle: &mut ClassicalOracle, trials_per_bit: u64) -> Result<RqEstimate> {
    if trials_per_bit == 0 {
        return Err(Error::input("trials per bit must be at least 1"));
    }
    let n = oracle.width();
    let k = oracle.k();
    let start = oracle.queries();
    let mut raw = Vec::with_capacity(n);
    for q in 0..n {
        let x = BitString::unit(q, n)?;
        let mut ones = 0u64;
        for _ in 0..trials_per_bit {
            ones += u64::from(oracle.query(&x)?);
        }
        raw.push(k as f64 * ones as f64 / trials_per_bit as f64);
    }
    Ok(RqEstimate {
        k,
        trials_per_bit,
        raw,
        queries: oracle.queries() - start,
    })
}

/// Candidate key sets for a profile, fixed once so repeated guesses only
/// draw an index.
#[derive(Debug, Clone)]
pub struct GuessPool {
    candidates: Vec<Vec<u64>>,
    width: usize,
}

impl GuessPool {
    pub fn new(profile: &RqProfile, k: usize, assume_distinct: bool, work_bound: u64) -> Result<Self> {
        let opts = EnumerationOptions {
            work_bound,
            keep_multisets: true,
        };
        let count = count_consistent_keysets(profile, k, opts)?;
        Ok(Self::from_count(&count, assume_distinct))
    }

    pub fn from_count(count: &ConsistencyCount, assume_distinct: bool) -> Self {
        let candidates = count
            .multisets
            .as_deref()
            .unwrap_or_default()
            .iter()
            .map(|m| m.keys.iter().map(BitString::value).collect::<Vec<u64>>())
            .filter(|v| !assume_distinct || v.windows(2).all(|w| w[0] < w[1]))
            .collect();
        Self {
            candidates,
            width: count.n,
        }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// A uniformly chosen candidate as sorted key values, `None` when the
    /// pool is empty.
    pub fn guess<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&[u64]> {
        if self.candidates.is_empty() {
            return None;
        }
        Some(&self.candidates[rng.random_range(0..self.candidates.len())])
    }

    pub fn to_keys(&self, values: &[u64]) -> Vec<SecretKey> {
        values
            .iter()
            .map(|&v| BitString::from_value(v, self.width).expect("candidate fits width"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessAttackOutcome {
    pub candidates: usize,
    pub runs: u64,
    pub successes: u64,
    pub frequency: f64,
    /// `1 / candidates`, or zero when nothing is consistent.
    pub predicted: ExactProbability,
    pub last_guess: Vec<SecretKey>,
}

/// Guesses uniformly among the key sets consistent with `profile`, `runs`
/// times, scoring each guess against `truth` as an unordered multiset.
pub fn classical_guess_attack<R: Rng + ?Sized>(
    profile: &RqProfile,
    k: usize,
    truth: &KeySet,
    runs: u64,
    assume_distinct: bool,
    rng: &mut R,
) -> Result<GuessAttackOutcome> {
    if profile.width() != truth.width() {
        return Err(Error::LengthMismatch {
            expected: truth.width(),
            found: profile.width(),
        });
    }
    let pool = GuessPool::new(profile, k, assume_distinct, crate::analytics::DEFAULT_WORK_BOUND)?;
    let target = truth.sorted_values();
    let mut successes = 0u64;
    let mut last = Vec::new();
    for _ in 0..runs {
        match pool.guess(rng) {
            Some(g) => {
                successes += u64::from(g == target.as_slice());
                last = pool.to_keys(g);
            }
            None => break,
        }
    }
    let predicted = if pool.is_empty() {
        ExactProbability::zero()
    } else {
        ExactProbability::new(BigUint::one(), BigUint::from(pool.len()))
    };
    Ok(GuessAttackOutcome {
        candidates: pool.len(),
        runs,
        successes,
        frequency: if runs == 0 { 0.0 } else { successes as f64 / runs as f64 },
        predicted,
        last_guess: last,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouponOutcome {
    pub k: usize,
    pub m: u64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub expected: RecoveryProbability,
    /// Binomial standard error of `estimate` under `expected`.
    pub sigma: f64,
    /// Circuit executions charged, `m` per trial.
    pub queries: u64,
}

impl CouponOutcome {
    /// Distance from the exact value in standard errors; zero when both
    /// agree exactly at a degenerate probability.
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.expected.to_f64()).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.sigma
        }
    }
}

/// Runs the circuit `m` times per trial and records whether every key was
/// observed. Requires distinct keys, since all-keys recovery is defined over
/// `k` equiprobable outcomes.
pub fn quantum_coupon_experiment<R: Rng + ?Sized>(
    keys: &KeySet,
    m: u64,
    trials: u64,
    rng: &mut R,
) -> Result<CouponOutcome> {
    if !keys.all_distinct() {
        return Err(Error::input(
            "the all-keys experiment assumes k distinct, equiprobable keys; this key set has duplicates",
        ));
    }
    if trials == 0 {
        return Err(Error::input("trials must be at least 1"));
    }
    let k = keys.len();
    let output = run_circuit(keys)?;
    let sampler = output.exact_distribution()?.sampler()?;
    let slot: HashMap<u64, usize> = keys
        .keys()
        .iter()
        .enumerate()
        .map(|(i, key)| (key.value(), i))
        .collect();
    let full = (1u128 << k) - 1;
    let mut successes = 0u64;
    for _ in 0..trials {
        let mut seen = 0u128;
        for _ in 0..m {
            let outcome = sampler.sample(rng);
            let i = slot
                .get(&outcome)
                .copied()
                .ok_or_else(|| Error::input(format!("measured non-key outcome {outcome}")))?;
            seen |= 1 << i;
        }
        successes += u64::from(seen == full);
    }
    let expected = prob_all_keys(k as u64, m)?;
    let p = expected.to_f64();
    Ok(CouponOutcome {
        k,
        m,
        trials,
        successes,
        estimate: successes as f64 / trials as f64,
        sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        expected,
        queries: trials * m,
    })
}

/// Per-run summary shared by all strategies in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub strategy: String,
    /// Oracle interactions charged per run.
    pub queries_per_run: u64,
    pub runs: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Model probability of success for one run, when available.
    pub predicted_success: Option<f64>,
    /// Exact upper bound on the success probability of one run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_upper_bound: Option<ExactProbability>,
    pub recovered: Vec<SecretKey>,
    pub seed: u64,
    pub assumptions: Vec<String>,
}

/// Probability that rounding `k * B / trials` recovers `r`, with
/// `B ~ Binomial(trials, r / k)`.
fn rounding_success(r: usize, k: usize, trials: u64) -> f64 {
    if r == 0 || r == k {
        return 1.0;
    }
    let dist = Binomial::new(r as f64 / k as f64, trials).expect("valid binomial");
    (0..=trials)
        .filter(|&b| round_estimate(k as f64 * b as f64 / trials as f64, k) == r)
        .map(|b| dist.pmf(b))
        .sum()
}

/// `1 - max_q (p_q^T + (1-p_q)^T)` over columns with `0 < r_q < k`: a run
/// fails whenever such a column returns a constant answer. Equals one when
/// no column is mixed.
pub fn estimation_success_bound(profile: &RqProfile, k: usize, trials: u64) -> ExactProbability {
    let k_pow: BigUint = Pow::pow(BigUint::from(k), trials);
    let worst = profile
        .counts()
        .iter()
        .filter(|&&r| r > 0 && r < k)
        .map(|&r| {
            let num: BigUint = Pow::pow(BigUint::from(r), trials) + Pow::pow(BigUint::from(k - r), trials);
            BigRational::new(num.into(), k_pow.clone().into())
        })
        .max();
    match worst {
        Some(w) => ExactProbability::from_ratio(BigRational::one() - w),
        None => ExactProbability::one(),
    }
}

/// End-to-end classical attack on all keys: estimate `r_q` with
/// `trials_per_bit` queries per bit, round, then guess uniformly among the
/// consistent key sets. A single-key oracle uses bitwise recovery instead.
pub fn classical_pipeline(
    keys: &KeySet,
    trials_per_bit: u64,
    runs: u64,
    assume_distinct: bool,
    seed: u64,
) -> Result<ExperimentReport> {
    let n = keys.width();
    let k = keys.len();
    let target = keys.sorted_values();
    let mut assumptions = vec![ASSUMPTION_K_KNOWN.to_string()];
    if k == 1 {
        let mut successes = 0;
        let mut recovered = Vec::new();
        for run in 0..runs {
            let mut oracle = ClassicalOracle::with_rng(keys.clone(), rng::derived(seed, run));
            let key = classical_bv_single_key(&mut oracle)?;
            successes += u64::from(key == keys.keys()[0]);
            recovered = vec![key];
        }
        return Ok(ExperimentReport {
            strategy: "classical-bitwise".into(),
            queries_per_run: n as u64,
            runs,
            successes,
            success_rate: rate(successes, runs),
            predicted_success: Some(1.0),
            success_upper_bound: Some(ExactProbability::one()),
            recovered,
            seed,
            assumptions,
        });
    }
    if assume_distinct {
        assumptions.push(ASSUMPTION_DISTINCT.to_string());
    }
    let true_profile = rq_profile(keys);
    let mut pools: HashMap<RqProfile, GuessPool> = HashMap::new();
    let mut guess_rng: SimRng = rng::derived(seed, u64::MAX);
    let mut successes = 0u64;
    let mut recovered = Vec::new();
    for run in 0..runs {
        let mut oracle = ClassicalOracle::with_rng(keys.clone(), rng::derived(seed, run));
        let profile = estimate_rq(&mut oracle, trials_per_bit)?.rounded();
        let pool = match pools.get(&profile) {
            Some(p) => p,
            None => {
                let p = GuessPool::new(&profile, k, assume_distinct, crate::analytics::DEFAULT_WORK_BOUND)?;
                pools.entry(profile.clone()).or_insert(p)
            }
        };
        if let Some(guess) = pool.guess(&mut guess_rng) {
            successes += u64::from(guess == target.as_slice());
            recovered = pool.to_keys(guess);
        }
    }
    let true_pool = GuessPool::new(&true_profile, k, assume_distinct, crate::analytics::DEFAULT_WORK_BOUND)?;
    let contains_truth = true_pool.candidates.iter().any(|c| c == &target);
    let guess_given_profile = if contains_truth {
        1.0 / true_pool.len() as f64
    } else {
        0.0
    };
    let estimation: f64 = true_profile
        .counts()
        .iter()
        .map(|&r| rounding_success(r, k, trials_per_bit))
        .product();
    let bound = estimation_success_bound(&true_profile, k, trials_per_bit);
    Ok(ExperimentReport {
        strategy: "classical-estimate-and-guess".into(),
        queries_per_run: n as u64 * trials_per_bit,
        runs,
        successes,
        success_rate: rate(successes, runs),
        predicted_success: Some(estimation * guess_given_profile),
        success_upper_bound: Some(bound),
        recovered,
        seed,
        assumptions,
    })
}

/// Quantum side of the comparison: `m` circuit executions per run, success
/// when every key has been measured.
pub fn quantum_pipeline(keys: &KeySet, m: u64, runs: u64, seed: u64) -> Result<ExperimentReport> {
    let outcome = quantum_coupon_experiment(keys, m, runs, &mut rng::derived(seed, 0))?;
    Ok(ExperimentReport {
        strategy: "quantum-repeated-measurement".into(),
        queries_per_run: m,
        runs,
        successes: outcome.successes,
        success_rate: outcome.estimate,
        predicted_success: Some(outcome.expected.to_f64()),
        success_upper_bound: None,
        recovered: if outcome.successes > 0 {
            let mut v = keys.keys().to_vec();
            v.sort();
            v
        } else {
            Vec::new()
        },
        seed,
        assumptions: vec![ASSUMPTION_K_KNOWN.to_string()],
    })
}

fn rate(successes: u64, runs: u64) -> f64 {
    if runs == 0 {
        0.0
    } else {
        successes as f64 / runs as f64
    }
}
