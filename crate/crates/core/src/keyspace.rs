//! Bit-level algebra on secret keys.
//!
//! Bit `q` of a key is the coefficient of `2^q` in its integer value. Text
//! is always most-significant-bit first, so `"0001"` is the key with value 1.
//! Conversion between the two orders happens only in [`BitString::parse`] and
//! the `Display` impl.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::factorial;

pub const MAX_WIDTH: usize = 64;

/// An `n`-bit string, stored little-endian in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    value: u64,
    width: u8,
}

/// Keys and oracle inputs share the same representation.
pub type SecretKey = BitString;

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::InvalidWidth(width));
    }
    Ok(())
}

fn width_mask(width: usize) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitString {
    pub fn from_value(value: u64, width: usize) -> Result<Self> {
        check_width(width)?;
        if value & !width_mask(width) != 0 {
            return Err(Error::input(format!(
                "value {value} does not fit in {width} bits"
            )));
        }
        Ok(Self {
            value,
            width: width as u8,
        })
    }

    /// Parses an MSB-first binary string of exactly `width` characters.
    pub fn parse(text: &str, width: usize) -> Result<Self> {
        check_width(width)?;
        let len = text.chars().count();
        if len != width {
            return Err(Error::LengthMismatch {
                expected: width,
                found: len,
            });
        }
        let mut value = 0u64;
        for (position, c) in text.chars().enumerate() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                found => return Err(Error::InvalidBit { position, found }),
            };
            value = (value << 1) | bit;
        }
        Ok(Self {
            value,
            width: width as u8,
        })
    }

    /// `2^q` as an `n`-bit string.
    pub fn unit(q: usize, width: usize) -> Result<Self> {
        if q >= width {
            return Err(Error::IndexOutOfRange {
                index: q,
                limit: width,
            });
        }
        Self::from_value(1u64 << q, width)
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::from_value(0, width)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Coefficient of `2^q`.
    pub fn bit(&self, q: usize) -> bool {
        q < self.width() && (self.value >> q) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.value.count_ones()
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.same_width(other)?;
        Ok(Self {
            value: self.value ^ other.value,
            width: self.width,
        })
    }

    fn same_width(&self, other: &Self) -> Result<()> {
        if self.width != other.width {
            return Err(Error::LengthMismatch {
                expected: self.width(),
                found: other.width(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.width()).rev() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, s.chars().count())
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parity of the bitwise AND, i.e. `x · s mod 2`.
pub fn dot_mod2(x: &BitString, s: &BitString) -> Result<bool> {
    x.same_width(s)?;
    Ok(parity(x.value & s.value))
}

#[inline]
pub(crate) fn parity(v: u64) -> bool {
    v.count_ones() & 1 == 1
}

/// Ordered list of `k` keys of a common width. Duplicates are allowed and
/// position `i` identifies which controlled unitary the key drives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySet {
    keys: Vec<SecretKey>,
    width: usize,
}

impl KeySet {
    pub fn new(keys: Vec<SecretKey>) -> Result<Self> {
        let first = keys
            .first()
            .ok_or_else(|| Error::input("a key set needs at least one key"))?;
        let width = first.width();
        for key in &keys {
            first.same_width(key)?;
        }
        // k <= 2^n; only reachable for narrow keys.
        if width < 64 && keys.len() as u128 > 1u128 << width {
            return Err(Error::input(format!(
                "{} keys exceed the 2^{width} possible {width}-bit keys",
                keys.len()
            )));
        }
        Ok(Self { keys, width })
    }

    /// Parses MSB-first strings; the width is taken from the first key.
    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<Self> {
        let width = texts
            .first()
            .map(|t| t.as_ref().chars().count())
            .ok_or_else(|| Error::input("a key set needs at least one key"))?;
        let keys = texts
            .iter()
            .map(|t| BitString::parse(t.as_ref(), width))
            .collect::<Result<Vec<_>>>()?;
        Self::new(keys)
    }

    /// Parses a comma-separated list such as `"011,101"`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let parts: Vec<&str> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        Self::parse(&parts)
    }

    pub fn keys(&self) -> &[SecretKey] {
        &self.keys
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&SecretKey> {
        self.keys.get(i)
    }

    pub fn all_distinct(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.keys.len());
        self.keys.iter().all(|k| seen.insert(k.value()))
    }

    /// Keys sorted by integer value; the canonical form of the multiset.
    pub fn sorted_values(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.keys.iter().map(BitString::value).collect();
        v.sort_unstable();
        v
    }
}

impl fmt::Display for KeySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, key) in self.keys.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{key}")?;
        }
        Ok(())
    }
}

/// `r_q`: how many keys have bit `q` set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RqProfile {
    counts: Vec<usize>,
}

impl RqProfile {
    /// `counts[q]` is `r_q` (little-endian order).
    pub fn new(counts: Vec<usize>, k: usize) -> Result<Self> {
        check_width(counts.len())?;
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if let Some((q, &r)) = counts.iter().enumerate().find(|(_, &r)| r > k) {
            return Err(Error::input(format!("r_{q} = {r} exceeds k = {k}")));
        }
        Ok(Self { counts })
    }

    /// Builds a profile from values listed MSB first, `(r_{n-1}, ..., r_0)`,
    /// the order in which profiles are usually written down.
    pub fn from_msb_first(counts: &[usize], k: usize) -> Result<Self> {
        Self::new(counts.iter().rev().copied().collect(), k)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn width(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, q: usize) -> usize {
        self.counts[q]
    }

    pub fn msb_first(&self) -> Vec<usize> {
        self.counts.iter().rev().copied().collect()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

impl Serialize for RqProfile {
    /// Serialized MSB first, matching the key text order.
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.counts.iter().rev())
    }
}

pub fn rq_profile(keys: &KeySet) -> RqProfile {
    let counts = (0..keys.width())
        .map(|q| keys.keys().iter().filter(|key| key.bit(q)).count())
        .collect();
    RqProfile { counts }
}

/// Distinct keys with their occurrence counts and the number of distinct
/// orderings `R = k! / prod(b_i!)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMultiplicity {
    pub distinct: Vec<SecretKey>,
    pub counts: Vec<usize>,
    pub permutations: BigUint,
}

impl KeyMultiplicity {
    pub fn distinct_count(&self) -> usize {
        self.distinct.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Occurrences of `key`, zero if absent.
    pub fn count_of(&self, key: &SecretKey) -> usize {
        self.distinct
            .iter()
            .position(|t| t == key)
            .map_or(0, |i| self.counts[i])
    }

    /// Each distinct key repeated by its count.
    pub fn expand(&self) -> Vec<SecretKey> {
        self.distinct
            .iter()
            .zip(&self.counts)
            .flat_map(|(t, &b)| std::iter::repeat_n(*t, b))
            .collect()
    }
}

pub fn multiplicity(keys: &KeySet) -> KeyMultiplicity {
    let mut distinct: Vec<SecretKey> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for key in keys.keys() {
        match distinct.iter().position(|t| t == key) {
            Some(i) => counts[i] += 1,
            None => {
                distinct.push(*key);
                counts.push(1);
            }
        }
    }
    let denom = counts
        .iter()
        .fold(BigUint::from(1u32), |acc, &b| acc * factorial(b as u64));
    let permutations = factorial(keys.len() as u64) / denom;
    KeyMultiplicity {
        distinct,
        counts,
        permutations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(text: &str) -> SecretKey {
        text.parse().unwrap()
    }

    fn keyset(texts: &[&str]) -> KeySet {
        KeySet::parse(texts).unwrap()
    }

    #[test]
    fn parse_msb_first() {
        assert_eq!(BitString::parse("0001", 4).unwrap().value(), 1);
        assert_eq!(BitString::parse("0000", 4).unwrap().value(), 0);
        assert_eq!(BitString::parse("1110", 4).unwrap().value(), 14);
        let k = key("1110");
        assert!(!k.bit(0));
        assert!(k.bit(3));
        assert_eq!(k.to_string(), "1110");
    }

    #[test]
    fn parse_errors_name_position() {
        assert_eq!(
            BitString::parse("01a1", 4),
            Err(Error::InvalidBit {
                position: 2,
                found: 'a'
            })
        );
        assert_eq!(
            BitString::parse("011", 4),
            Err(Error::LengthMismatch {
                expected: 4,
                found: 3
            })
        );
        assert_eq!(BitString::parse("", 0), Err(Error::InvalidWidth(0)));
        let msg = BitString::parse("0x", 2).unwrap_err().to_string();
        assert!(msg.contains("position 1"), "{msg}");
    }

    #[test]
    fn wide_keys_round_trip() {
        let text = "1".repeat(64);
        let k = BitString::parse(&text, 64).unwrap();
        assert_eq!(k.value(), u64::MAX);
        assert_eq!(k.to_string(), text);
        assert!(BitString::from_value(8, 3).is_err());
    }

    #[test]
    fn dot_examples() {
        assert!(dot_mod2(&key("0001"), &key("0001")).unwrap());
        assert!(!dot_mod2(&key("0000"), &key("1111")).unwrap());
        // 0110 & 0011 = 0010: a single overlapping bit.
        assert!(dot_mod2(&key("0110"), &key("0011")).unwrap());
        assert!(dot_mod2(&key("011"), &key("0011")).is_err());
    }

    #[test]
    fn dot_matches_bitwise_sum_exhaustively() {
        for x in 0..16u64 {
            for s in 0..16u64 {
                let xs = BitString::from_value(x, 4).unwrap();
                let ss = BitString::from_value(s, 4).unwrap();
                let sum: u64 = (0..4).map(|q| ((x >> q) & 1) * ((s >> q) & 1)).sum();
                assert_eq!(dot_mod2(&xs, &ss).unwrap(), sum % 2 == 1);
                assert_eq!(dot_mod2(&xs, &ss), dot_mod2(&ss, &xs));
            }
        }
    }

    #[test]
    fn dot_is_linear_exhaustively() {
        for n in 1..=6usize {
            let size = 1u64 << n;
            for x in 0..size {
                let x = BitString::from_value(x, n).unwrap();
                for s in 0..size {
                    let s = BitString::from_value(s, n).unwrap();
                    for t in 0..size {
                        let t = BitString::from_value(t, n).unwrap();
                        let lhs = dot_mod2(&x, &s.xor(&t).unwrap()).unwrap();
                        let rhs = dot_mod2(&x, &s).unwrap() ^ dot_mod2(&x, &t).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn profile_examples() {
        let p = rq_profile(&keyset(&["0001", "0011", "1011", "1110"]));
        assert_eq!(p.msb_first(), vec![2, 1, 3, 3]);
        assert_eq!(p.get(0), 3);
        assert_eq!(rq_profile(&keyset(&["0000", "0000"])).counts(), &[0, 0, 0, 0]);
        assert_eq!(rq_profile(&keyset(&["111"])).counts(), &[1, 1, 1]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2,1,3,3]");
    }

    #[test]
    fn profile_rejects_counts_above_k() {
        assert!(RqProfile::new(vec![3, 5], 4).is_err());
        assert!(RqProfile::new(vec![], 4).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        let m = multiplicity(&keyset(&["010", "011", "011", "101"]));
        assert_eq!(m.distinct_count(), 3);
        assert_eq!(m.counts, vec![1, 2, 1]);
        assert_eq!(m.distinct[1], key("011"));
        assert_eq!(m.permutations, BigUint::from(12u32));

        let m = multiplicity(&keyset(&["011", "101"]));
        assert_eq!((m.counts.clone(), m.permutations), (vec![1, 1], BigUint::from(2u32)));

        let m = multiplicity(&keyset(&["01", "01"]));
        assert_eq!((m.counts.clone(), m.permutations), (vec![2], BigUint::from(1u32)));
    }

    #[test]
    fn keyset_validation() {
        assert!(KeySet::parse::<&str>(&[]).is_err());
        assert!(KeySet::parse(&["01", "011"]).is_err());
        // five 2-bit keys cannot fit in a 4-element key space
        assert!(KeySet::parse(&["00", "01", "10", "11", "00"]).is_err());
        assert!(KeySet::parse(&["00", "00", "00", "00"]).is_ok());
        let ks = KeySet::parse_list(" 011, 101 ").unwrap();
        assert_eq!(ks.to_string(), "011,101");
    }

    fn arb_keyset() -> impl Strategy<Value = KeySet> {
        (1usize..=6).prop_flat_map(|n| {
            let max_k = (1usize << n).min(10);
            prop::collection::vec(0u64..(1u64 << n), 1..=max_k).prop_map(move |vals| {
                KeySet::new(
                    vals.into_iter()
                        .map(|v| BitString::from_value(v, n).unwrap())
                        .collect(),
                )
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn profile_double_counts_popcounts(ks in arb_keyset()) {
            let total: u32 = ks.keys().iter().map(BitString::popcount).sum();
            prop_assert_eq!(rq_profile(&ks).total(), total as usize);
        }

        #[test]
        fn multiplicity_reexpands_to_same_multiset(ks in arb_keyset()) {
            let m = multiplicity(&ks);
            prop_assert_eq!(m.total(), ks.len());
            prop_assert!(m.counts.iter().all(|&b| b >= 1));
            let mut expanded: Vec<u64> = m.expand().iter().map(BitString::value).collect();
            expanded.sort_unstable();
            prop_assert_eq!(expanded, ks.sorted_values());
            if ks.all_distinct() {
                prop_assert_eq!(m.permutations, factorial(ks.len() as u64));
            }
        }

        #[test]
        fn text_round_trip(v in any::<u64>(), n in 1usize..=64) {
            let v = v & width_mask(n);
            let k = BitString::from_value(v, n).unwrap();
            prop_assert_eq!(BitString::parse(&k.to_string(), n).unwrap(), k);
        }
    }
}
