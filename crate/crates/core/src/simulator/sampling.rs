use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::circuit::CircuitOutput;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::keyspace::BitString;

/// Probabilities below this are treated as exact zeros (floating-point
/// residue of destructive interference).
pub const SUPPORT_EPSILON: f64 = 1e-12;

/// Marginal probabilities of the data register.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    width: usize,
    probs: Vec<f64>,
}

impl ExactDistribution {
    pub fn from_probabilities(width: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << width {
            return Err(Error::input(format!(
                "{} probabilities for a {width}-bit register",
                probs.len()
            )));
        }
        Ok(Self { width, probs })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, outcome: u64) -> f64 {
        self.probs.get(outcome as usize).copied().unwrap_or(0.0)
    }

    /// Outcomes with non-negligible probability, in increasing order.
    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > SUPPORT_EPSILON)
            .map(|(x, &p)| (x as u64, p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn outcome(&self, value: u64) -> BitString {
        BitString::from_value(value, self.width).expect("outcome fits register")
    }

    /// Sampler restricted to the support.
    pub fn sampler(&self) -> Result<DataSampler> {
        let (outcomes, weights): (Vec<u64>, Vec<f64>) = self.support().unzip();
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::input(format!("cannot sample distribution: {e}")))?;
        Ok(DataSampler { outcomes, index })
    }
}

#[derive(Debug, Clone)]
pub struct DataSampler {
    outcomes: Vec<u64>,
    index: WeightedIndex<f64>,
}

impl DataSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.outcomes[self.index.sample(rng)]
    }
}

/// Marginal over the low `data_width` qubits, summing `|a|^2` over every
/// ancilla configuration.
pub fn exact_distribution(state: &StateVector, data_width: usize) -> Result<ExactDistribution> {
    if data_width == 0 || data_width > state.num_qubits() {
        return Err(Error::input(format!(
            "data width {data_width} invalid for a {}-qubit state",
            state.num_qubits()
        )));
    }
    let mask = (1usize << data_width) - 1;
    let mut probs = vec![0.0; 1usize << data_width];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        probs[idx & mask] += a.norm_sqr();
    }
    ExactDistribution::from_probabilities(data_width, probs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    width: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramRecord {
    pub outcome: BitString,
    pub count: u64,
    pub probability: f64,
}

impl Histogram {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            counts: BTreeMap::new(),
            shots: 0,
        }
    }

    pub fn record(&mut self, outcome: u64) {
        *self.counts.entry(outcome).or_default() += 1;
        self.shots += 1;
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn frequency(&self, outcome: u64) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.count(outcome) as f64 / self.shots as f64
        }
    }

    /// Observed outcomes with their counts, in increasing order.
    pub fn counts(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn records(&self) -> Vec<HistogramRecord> {
        self.counts()
            .map(|(x, count)| HistogramRecord {
                outcome: BitString::from_value(x, self.width).expect("outcome fits register"),
                count,
                probability: count as f64 / self.shots as f64,
            })
            .collect()
    }
}

/// `shots` i.i.d. measurements of the data register.
pub fn measure_data_register<R: Rng + ?Sized>(
    state: &StateVector,
    data_width: usize,
    shots: u64,
    rng: &mut R,
) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::input("shots must be at least 1"));
    }
    let dist = exact_distribution(state, data_width)?;
    let norm = dist.total();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!("state is not normalized (norm^2 = {norm})")));
    }
    let sampler = dist.sampler()?;
    let mut hist = Histogram::new(data_width);
    for _ in 0..shots {
        hist.record(sampler.sample(rng));
    }
    Ok(hist)
}

impl CircuitOutput {
    pub fn exact_distribution(&self) -> Result<ExactDistribution> {
        exact_distribution(&self.state, self.layout.data)
    }

    pub fn measure<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Histogram> {
        measure_data_register(&self.state, self.layout.data, shots, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit over the support of `expected`. `None` when the
/// test is undefined: fewer than two shots or fewer than two categories.
/// Any count on an impossible outcome gives an infinite statistic.
pub fn chi_square(hist: &Histogram, expected: &ExactDistribution) -> Option<ChiSquareTest> {
    let support: Vec<(u64, f64)> = expected.support().collect();
    if hist.shots() < 2 || support.len() < 2 {
        return None;
    }
    let dof = support.len() - 1;
    let shots = hist.shots() as f64;
    let outside = hist
        .counts()
        .any(|(x, _)| expected.probability(x) <= SUPPORT_EPSILON);
    let statistic = if outside {
        f64::INFINITY
    } else {
        support
            .iter()
            .map(|&(x, p)| {
                let e = shots * p;
                let o = hist.count(x) as f64;
                (o - e) * (o - e) / e
            })
            .sum()
    };
    let p_value = if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(statistic))
    };
    Some(ChiSquareTest {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    })
}
