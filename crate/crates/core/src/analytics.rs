//! Exact combinatorics for the multi-key problem: the probability that `m`
//! uniform draws reveal all `k` keys, the column-sum-consistent key
//! multisets, and the classical guessing odds derived from them.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, ExactProbability};
use crate::keyspace::{multiplicity, rq_profile, BitString, KeySet, RqProfile, SecretKey};

/// Largest `k` accepted by the surjection formula.
pub const MAX_SURJECTION_K: u64 = 4096;

/// Largest bit size of `k^m` accepted by the surjection formula.
pub const MAX_SURJECTION_BITS: u64 = 1 << 18;

/// Default refusal threshold for consistent-multiset enumeration, counted in
/// ordered column assignments.
pub const DEFAULT_WORK_BOUND: u64 = 10_000_000;

fn check_surjection_capacity(m: u64, k: u64) -> Result<()> {
    if k > MAX_SURJECTION_K {
        return Err(Error::capacity(format!(
            "k = {k} exceeds the supported maximum {MAX_SURJECTION_K}"
        )));
    }
    let bits_per_factor = 64 - k.leading_zeros() as u64;
    if m.saturating_mul(bits_per_factor) > MAX_SURJECTION_BITS {
        return Err(Error::capacity(format!(
            "{k}^{m} exceeds the supported size of {MAX_SURJECTION_BITS} bits"
        )));
    }
    Ok(())
}

/// Number of surjections from an `m`-set onto a `k`-set,
/// `sum_{i<k} (-1)^i C(k,i) (k-i)^m`.
pub fn surjection_count(m: u64, k: u64) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    check_surjection_capacity(m, k)?;
    if m < k {
        return Ok(BigUint::zero());
    }
    let mut total = BigInt::zero();
    for i in 0..k {
        let term = BigInt::from(binomial(k, i) * Pow::pow(BigUint::from(k - i), m));
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total
        .to_biguint()
        .expect("inclusion-exclusion sum is a nonnegative count"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryProbability {
    pub k: u64,
    pub m: u64,
    pub probability: ExactProbability,
}

/// `P(k, m)`: probability that `m` uniform draws from `k` keys see every key.
pub fn prob_all_keys(k: u64, m: u64) -> Result<RecoveryProbability> {
    let hits = surjection_count(m, k)?;
    let probability = if hits.is_zero() {
        ExactProbability::zero()
    } else {
        ExactProbability::new(hits, Pow::pow(BigUint::from(k), m))
    };
    Ok(RecoveryProbability { k, m, probability })
}

/// `P(2, m) = 1 - 2^{1-m}` for `m >= 2`, zero otherwise.
pub fn prob_two_keys(m: u64) -> ExactProbability {
    if m < 2 {
        return ExactProbability::zero();
    }
    let den: BigUint = BigUint::one() << (m - 1);
    ExactProbability::new(&den - 1u32, den)
}

/// `prod_q C(k, r_q)`: ordered assignments of bits consistent with a profile.
pub fn ordered_count(profile: &RqProfile, k: usize) -> BigUint {
    profile
        .counts()
        .iter()
        .fold(BigUint::one(), |acc, &r| acc * binomial(k as u64, r as u64))
}

fn check_profile(profile: &RqProfile, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    if let Some((q, &r)) = profile.counts().iter().enumerate().find(|(_, &r)| r > k) {
        return Err(Error::input(format!("r_{q} = {r} exceeds k = {k}")));
    }
    Ok(())
}

/// Upper bound on the classical guessing probability, `min(k! / P, 1)`.
pub fn classical_guess_bound(profile: &RqProfile, k: usize) -> Result<ExactProbability> {
    check_profile(profile, k)?;
    let p = ExactProbability::new(factorial(k as u64), ordered_count(profile, k));
    Ok(p.min(ExactProbability::one()))
}

/// Exact ordered-assignment guessing probability `R / P` for a known key
/// multiset, `R` counting its distinct orderings.
pub fn classical_guess_exact(keys: &KeySet) -> ExactProbability {
    let profile = rq_profile(keys);
    let m = multiplicity(keys);
    ExactProbability::new(m.permutations, ordered_count(&profile, keys.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    /// Refuse when the number of ordered assignments exceeds this.
    pub work_bound: u64,
    /// Keep the list of multisets, not only their number.
    pub keep_multisets: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            work_bound: DEFAULT_WORK_BOUND,
            keep_multisets: false,
        }
    }
}

/// One unordered key multiset consistent with a profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistentMultiset {
    /// Keys sorted by integer value.
    pub keys: Vec<SecretKey>,
    /// Ordered column assignments producing this multiset.
    pub assignments: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyCount {
    pub profile: RqProfile,
    pub k: usize,
    pub n: usize,
    #[serde(serialize_with = "serialize_biguint")]
    pub ordered_count: BigUint,
    /// Consistent multisets, repeated keys allowed.
    pub multiset_count: usize,
    /// Consistent sets of `k` pairwise distinct keys.
    pub distinct_keyset_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multisets: Option<Vec<ConsistentMultiset>>,
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl ConsistencyCount {
    pub fn contains(&self, keys: &KeySet) -> Option<bool> {
        let target = keys.sorted_values();
        self.multisets.as_ref().map(|list| {
            list.iter()
                .any(|m| m.keys.iter().map(BitString::value).eq(target.iter().copied()))
        })
    }
}

/// Lexicographic `r`-subsets of `0..k`.
struct Combinations {
    k: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(k: usize, r: usize) -> Self {
        Self {
            k,
            current: (r <= k).then(|| (0..r).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let r = out.len();
        let mut next = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.k - r + i {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Enumerates every choice of which rows carry a 1 in each column and
/// deduplicates the resulting row multisets.
pub fn count_consistent_keysets(
    profile: &RqProfile,
    k: usize,
    options: EnumerationOptions,
) -> Result<ConsistencyCount> {
    check_profile(profile, k)?;
    let n = profile.width();
    let ordered = ordered_count(profile, k);
    if ordered > BigUint::from(options.work_bound) {
        return Err(Error::capacity(format!(
            "enumeration needs {ordered} ordered assignments, above the work bound of {}",
            options.work_bound
        )));
    }
    let columns: Vec<Vec<Vec<usize>>> = profile
        .counts()
        .iter()
        .map(|&r| Combinations::new(k, r).collect())
        .collect();
    let mut orbits: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut rows = vec![0u64; k];
    enumerate_columns(&columns, 0, &mut rows, &mut orbits);

    let multiset_count = orbits.len();
    let distinct_keyset_count = orbits
        .keys()
        .filter(|rows| rows.windows(2).all(|w| w[0] < w[1]))
        .count();
    let multisets = options.keep_multisets.then(|| {
        let mut list: Vec<ConsistentMultiset> = orbits
            .into_iter()
            .map(|(values, assignments)| ConsistentMultiset {
                keys: values
                    .into_iter()
                    .map(|v| BitString::from_value(v, n).expect("row fits width"))
                    .collect(),
                assignments,
            })
            .collect();
        list.sort_by(|a, b| a.keys.cmp(&b.keys));
        list
    });
    Ok(ConsistencyCount {
        profile: profile.clone(),
        k,
        n,
        ordered_count: ordered,
        multiset_count,
        distinct_keyset_count,
        multisets,
    })
}

fn enumerate_columns(
    columns: &[Vec<Vec<usize>>],
    q: usize,
    rows: &mut [u64],
    orbits: &mut HashMap<Vec<u64>, u64>,
) {
    if q == columns.len() {
        let mut key = rows.to_vec();
        key.sort_unstable();
        *orbits.entry(key).or_default() += 1;
        return;
    }
    let bit = 1u64 << q;
    for choice in &columns[q] {
        for &j in choice {
            rows[j] |= bit;
        }
        enumerate_columns(columns, q + 1, rows, orbits);
        for &j in choice {
            rows[j] &= !bit;
        }
    }
}

/// Probability of picking the right multiset when guessing uniformly among
/// the consistent multisets.
pub fn uniform_multiset_guess(count: &ConsistencyCount) -> ExactProbability {
    ExactProbability::new(BigUint::one(), BigUint::from(count.multiset_count))
}

/// Same as [`uniform_multiset_guess`] for a guesser who knows the keys are
/// pairwise distinct. Zero when no distinct-key set is consistent.
pub fn uniform_distinct_guess(count: &ConsistencyCount) -> ExactProbability {
    if count.distinct_keyset_count == 0 {
        return ExactProbability::zero();
    }
    ExactProbability::new(BigUint::one(), BigUint::from(count.distinct_keyset_count))
}

impl RecoveryProbability {
    pub fn to_f64(&self) -> f64 {
        self.probability.to_f64()
    }
}

/// Helper for callers holding a `usize` count.
pub fn biguint_to_f64(v: &BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    /// Brute force: count maps from an m-set to a k-set that hit every value.
    fn brute_surjections(m: u32, k: u32) -> u64 {
        let total = (k as u64).pow(m);
        (0..total)
            .filter(|&code| {
                let mut seen = 0u64;
                let mut c = code;
                for _ in 0..m {
                    seen |= 1 << (c % k as u64);
                    c /= k as u64;
                }
                seen.count_ones() == k
            })
            .count() as u64
    }

    fn keyset(texts: &[&str]) -> KeySet {
        KeySet::parse(texts).unwrap()
    }

    #[test]
    fn surjection_examples() {
        assert_eq!(brute_surjections(3, 2), 6);
        assert_eq!(surjection_count(3, 2).unwrap(), BigUint::from(6u32));
        for k in 1..=8 {
            assert_eq!(surjection_count(k, k).unwrap(), factorial(k));
        }
        assert!(surjection_count(2, 3).unwrap().is_zero());
        assert!(surjection_count(0, 0).is_err());
        assert_eq!(surjection_count(0, 1).unwrap(), BigUint::zero());
    }

    #[test]
    fn surjections_match_brute_force() {
        for k in 1..=5u32 {
            for m in 0..=8u32 {
                assert_eq!(
                    surjection_count(m as u64, k as u64).unwrap(),
                    BigUint::from(brute_surjections(m, k)),
                    "m={m} k={k}"
                );
            }
        }
    }

    #[test]
    fn surjection_capacity() {
        assert!(surjection_count(10, 5000).unwrap_err().is_capacity());
        assert!(surjection_count(1 << 20, 3).unwrap_err().is_capacity());
    }

    #[test]
    fn recovery_probability_examples() {
        assert_eq!(prob_all_keys(2, 3).unwrap().to_f64(), 0.75);
        assert_eq!(prob_all_keys(4, 3).unwrap().probability, ExactProbability::zero());
        // 3^5 = 243 sequences; 150 hit all three values
        assert_eq!(brute_surjections(5, 3), 150);
        let p = prob_all_keys(3, 5).unwrap();
        assert_eq!(p.probability, ExactProbability::new(150u32.into(), 243u32.into()));
        assert!((p.to_f64() - 150.0 / 243.0).abs() < 1e-12);
    }

    #[test]
    fn two_key_closed_form() {
        assert_eq!(prob_two_keys(2).to_f64(), 0.5);
        assert_eq!(prob_two_keys(1), ExactProbability::zero());
        assert_eq!(prob_two_keys(0), ExactProbability::zero());
        let p20 = prob_two_keys(20);
        assert_eq!(p20.to_string(), format!("{}/{}", (1u64 << 19) - 1, 1u64 << 19));
        for m in 0..=64 {
            assert_eq!(prob_two_keys(m), prob_all_keys(2, m).unwrap().probability, "m={m}");
        }
    }

    #[test]
    fn recovery_is_monotone_and_bounded() {
        for k in 1..=6u64 {
            let mut prev = BigRational::zero();
            for m in 0..=30u64 {
                let p = prob_all_keys(k, m).unwrap().probability.ratio().clone();
                assert!(p >= prev && p <= BigRational::one(), "k={k} m={m}");
                if m < k {
                    assert!(p.is_zero());
                }
                prev = p;
            }
        }
    }

    /// Monte Carlo over uniform index sequences.
    #[test]
    fn recovery_matches_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let trials = 1_000_000u32;
        let hits = (0..trials)
            .filter(|_| {
                let mut seen = 0u8;
                for _ in 0..5 {
                    seen |= 1 << rng.random_range(0..3);
                }
                seen == 0b111
            })
            .count() as f64;
        let p = 150.0 / 243.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn worked_example_enumeration() {
        let profile = RqProfile::from_msb_first(&[2, 1, 3, 3], 4).unwrap();
        let opts = EnumerationOptions {
            keep_multisets: true,
            ..Default::default()
        };
        let count = count_consistent_keysets(&profile, 4, opts).unwrap();
        // 12 sets of distinct keys, 8 more once repeated keys are allowed
        assert_eq!(count.distinct_keyset_count, 12);
        assert_eq!(count.multiset_count, 20);
        assert_eq!(count.ordered_count, BigUint::from(384u32));
        assert_eq!(count.contains(&keyset(&["0001", "0011", "1011", "1110"])), Some(true));
        let orbit_sum: u64 = count.multisets.as_ref().unwrap().iter().map(|m| m.assignments).sum();
        assert_eq!(orbit_sum, 384);
        let list = count.multisets.unwrap();
        let distinct_orbits: u64 = list
            .iter()
            .filter(|m| m.keys.windows(2).all(|w| w[0] < w[1]))
            .map(|m| m.assignments)
            .sum();
        assert_eq!(distinct_orbits, 12 * 24);
        assert!(list.windows(2).all(|w| w[0].keys < w[1].keys));
        assert!(list.iter().all(|m| m.keys.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn all_zero_profile_has_one_multiset() {
        for (k, n) in [(1, 1), (3, 4), (5, 2)] {
            let profile = RqProfile::new(vec![0; n], k).unwrap();
            let count = count_consistent_keysets(&profile, k, Default::default()).unwrap();
            assert_eq!(count.multiset_count, 1);
            assert_eq!(count.distinct_keyset_count, usize::from(k == 1));
            assert_eq!(count.ordered_count, BigUint::one());
            assert!(count.multisets.is_none());
        }
    }

    #[test]
    fn enumeration_respects_work_bound() {
        let profile = RqProfile::new(vec![4; 10], 8).unwrap();
        // C(8,4)^10 = 70^10
        let err = count_consistent_keysets(&profile, 8, Default::default()).unwrap_err();
        assert!(err.is_capacity());
        assert!(err.to_string().contains("work bound"));
        let tight = EnumerationOptions {
            work_bound: 383,
            keep_multisets: false,
        };
        let profile = RqProfile::from_msb_first(&[2, 1, 3, 3], 4).unwrap();
        assert!(count_consistent_keysets(&profile, 4, tight).is_err());
    }

    #[test]
    fn orbit_identity_exhaustive() {
        // every profile for n <= 3, k <= 4, and a sample at n = 4
        for n in 1..=4usize {
            for k in 1..=4usize.min(1 << n) {
                let total = (k + 1).pow(n as u32);
                let step = if n == 4 { 7 } else { 1 };
                for code in (0..total).step_by(step) {
                    let counts: Vec<usize> = (0..n).map(|q| (code / (k + 1).pow(q as u32)) % (k + 1)).collect();
                    let profile = RqProfile::new(counts, k).unwrap();
                    let opts = EnumerationOptions { keep_multisets: true, ..Default::default() };
                    let count = count_consistent_keysets(&profile, k, opts).unwrap();
                    let mut sum = BigUint::zero();
                    for m in count.multisets.as_ref().unwrap() {
                        let ks = KeySet::new(m.keys.clone()).unwrap();
                        let r = multiplicity(&ks).permutations;
                        assert_eq!(r, BigUint::from(m.assignments), "orbit size");
                        assert_eq!(rq_profile(&ks), profile);
                        sum += r;
                    }
                    assert_eq!(sum, count.ordered_count);
                    assert!(BigUint::from(count.multiset_count) <= count.ordered_count);
                }
            }
        }
    }

    #[test]
    fn guess_bound_examples() {
        let profile = RqProfile::from_msb_first(&[2, 1, 3, 3], 4).unwrap();
        assert_eq!(classical_guess_bound(&profile, 4).unwrap().to_string(), "1/16");
        let pinned = RqProfile::new(vec![0, 3, 3, 0], 3).unwrap();
        assert!(classical_guess_bound(&pinned, 3).unwrap().is_one());
        let single = RqProfile::new(vec![1, 0, 1], 1).unwrap();
        assert!(classical_guess_bound(&single, 1).unwrap().is_one());
        assert!(classical_guess_bound(&profile, 2).is_err());
    }

    /// Brute force: fraction of consistent ordered assignments whose rows
    /// form the true multiset.
    fn brute_guess(keys: &KeySet) -> ExactProbability {
        let profile = rq_profile(keys);
        let opts = EnumerationOptions { keep_multisets: true, ..Default::default() };
        let count = count_consistent_keysets(&profile, keys.len(), opts).unwrap();
        let target = keys.sorted_values();
        let good = count
            .multisets
            .unwrap()
            .into_iter()
            .find(|m| m.keys.iter().map(BitString::value).eq(target.iter().copied()))
            .map(|m| m.assignments)
            .unwrap();
        ExactProbability::new(good.into(), count.ordered_count)
    }

    #[test]
    fn guess_exact_examples() {
        let ks = keyset(&["0001", "0011", "1011", "1110"]);
        assert_eq!(classical_guess_exact(&ks).to_string(), "1/16");
        assert_eq!(brute_guess(&ks).to_string(), "1/16");

        assert!(classical_guess_exact(&keyset(&["01", "01"])).is_one());

        // (r_2, r_1, r_0) = (1, 3, 3): P = C(4,1) C(4,3) C(4,3) = 64, R = 12
        let dup = keyset(&["010", "011", "011", "101"]);
        assert_eq!(rq_profile(&dup).msb_first(), vec![1, 3, 3]);
        assert_eq!(ordered_count(&rq_profile(&dup), 4), BigUint::from(64u32));
        assert_eq!(classical_guess_exact(&dup).to_string(), "3/16");
        assert_eq!(brute_guess(&dup), classical_guess_exact(&dup));
    }

    #[test]
    fn guess_exact_is_bounded_and_meets_the_bound_for_distinct_keys() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.random_range(1..=4usize);
            let k = rng.random_range(1..=(1usize << n).min(5));
            let keys: Vec<SecretKey> = (0..k)
                .map(|_| BitString::from_value(rng.random_range(0..1u64 << n), n).unwrap())
                .collect();
            let ks = KeySet::new(keys).unwrap();
            let exact = classical_guess_exact(&ks);
            assert!(exact <= ExactProbability::one());
            assert_eq!(exact, brute_guess(&ks));
            let bound = classical_guess_bound(&rq_profile(&ks), k).unwrap();
            if ks.all_distinct() {
                assert_eq!(exact, bound);
            } else {
                assert!(exact <= bound);
            }
        }
    }

    #[test]
    fn uniform_guess_on_worked_example() {
        let profile = RqProfile::from_msb_first(&[2, 1, 3, 3], 4).unwrap();
        let count = count_consistent_keysets(&profile, 4, Default::default()).unwrap();
        assert_eq!(uniform_distinct_guess(&count).to_string(), "1/12");
        assert_eq!(uniform_multiset_guess(&count).to_string(), "1/20");
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
    }
}
