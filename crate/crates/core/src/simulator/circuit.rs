//! The multi-key circuit: data register, one target ancilla prepared in
//! `|->`, and `r = ceil(log2 k)` control ancillas that select which
//! key-controlled unitary acts.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use super::state::{check_capacity, StateVector, DEFAULT_MAX_QUBITS};
use crate::error::{Error, Result};
use crate::keyspace::{parity, KeySet, SecretKey};

/// Qubit positions: data `0..n`, target `n`, controls `n+1..n+1+r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    pub data: usize,
    pub controls: usize,
}

impl RegisterLayout {
    pub fn for_keys(n: usize, k: usize) -> Self {
        Self {
            data: n,
            controls: control_width(k),
        }
    }

    pub fn total(&self) -> usize {
        self.data + 1 + self.controls
    }

    pub fn target(&self) -> usize {
        self.data
    }

    pub fn control(&self, j: usize) -> usize {
        self.data + 1 + j
    }

    pub fn data_mask(&self) -> usize {
        (1usize << self.data) - 1
    }

    /// Number of distinct values the control register can address.
    pub fn control_capacity(&self) -> usize {
        1usize << self.controls
    }

    pub(crate) fn split(&self, index: usize) -> (usize, bool, usize) {
        (
            index & self.data_mask(),
            (index >> self.data) & 1 == 1,
            index >> (self.data + 1),
        )
    }

    pub(crate) fn join(&self, data: usize, target: bool, control: usize) -> usize {
        data | (usize::from(target) << self.data) | (control << (self.data + 1))
    }
}

/// `ceil(log2 k)`, zero for a single key.
pub fn control_width(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    X(usize),
    H(usize),
    /// Uniform superposition over `|0>..|k-1>` on the listed qubits,
    /// used when `k` is not a power of two.
    PrepareUniform { k: usize, qubits: Vec<usize> },
    /// Multi-controlled X; `false` controls fire on `|0>`.
    Mcx {
        controls: Vec<(usize, bool)>,
        target: usize,
    },
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X(q) => write!(f, "x q{q}"),
            Gate::H(q) => write!(f, "h q{q}"),
            Gate::PrepareUniform { k, qubits } => {
                write!(f, "uniform({k})")?;
                for q in qubits {
                    write!(f, " q{q}")?;
                }
                Ok(())
            }
            Gate::Mcx { controls, target } => {
                f.write_str("mcx")?;
                for (q, v) in controls {
                    write!(f, " {}q{q}", if *v { "" } else { "!" })?;
                }
                write!(f, " -> q{target}")
            }
        }
    }
}

/// Which oracle construction produces the statevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OraclePath {
    /// Gate-by-gate: X/H on the target, uniform preparation on the controls,
    /// one multi-controlled X per set key bit.
    #[default]
    Gate,
    /// Writes the post-oracle state `sum_i |i> (x) |Psi_i> (x) |->` directly.
    Fast,
}

impl std::str::FromStr for OraclePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate" => Ok(OraclePath::Gate),
            "fast" => Ok(OraclePath::Fast),
            other => Err(Error::input(format!(
                "unknown oracle path {other:?} (expected gate or fast)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    pub layout: RegisterLayout,
    pub keys: KeySet,
    /// Gates in application order, including the trailing data-register
    /// Hadamard layer.
    pub gates: Vec<Gate>,
    /// Index in `gates` where the oracle ends (exclusive).
    pub oracle_end: usize,
}

impl CircuitSpec {
    pub fn total_qubits(&self) -> usize {
        self.layout.total()
    }

    pub fn k(&self) -> usize {
        self.keys.len()
    }
}

/// The multi-controlled X decomposition of the `i`-th key unitary: one
/// CNOT from every data qubit where the key has a 1 onto the target,
/// conditioned on the control register holding `i`.
pub fn controlled_key_gates(layout: &RegisterLayout, i: usize, key: &SecretKey) -> Vec<Gate> {
    (0..layout.data)
        .filter(|&q| key.bit(q))
        .map(|q| {
            let mut controls = vec![(q, true)];
            controls.extend((0..layout.controls).map(|j| (layout.control(j), (i >> j) & 1 == 1)));
            Gate::Mcx {
                controls,
                target: layout.target(),
            }
        })
        .collect()
}

pub fn build_circuit(keys: &KeySet) -> Result<CircuitSpec> {
    let n = keys.width();
    let k = keys.len();
    if n < usize::BITS as usize && k > 1usize << n {
        return Err(Error::input(format!("k = {k} exceeds 2^{n}")));
    }
    let layout = RegisterLayout::for_keys(n, k);
    let mut gates = vec![Gate::X(layout.target()), Gate::H(layout.target())];
    gates.extend((0..n).map(Gate::H));
    let control_qubits: Vec<usize> = (0..layout.controls).map(|j| layout.control(j)).collect();
    if k == layout.control_capacity() {
        gates.extend(control_qubits.iter().copied().map(Gate::H));
    } else {
        gates.push(Gate::PrepareUniform {
            k,
            qubits: control_qubits,
        });
    }
    for (i, key) in keys.keys().iter().enumerate() {
        gates.extend(controlled_key_gates(&layout, i, key));
    }
    let oracle_end = gates.len();
    gates.extend((0..n).map(Gate::H));
    Ok(CircuitSpec {
        layout,
        keys: keys.clone(),
        gates,
        oracle_end,
    })
}

/// Puts the qubits `qubits` (a contiguous little-endian register, all in
/// `|0>`) into `(1/sqrt k) sum_{j<k} |j>`. Powers of two use Hadamards, so
/// the result is bit-identical to `H^{(x)r}`; other `k` are initialized
/// directly.
pub fn prepare_uniform(state: &mut StateVector, k: usize, qubits: &[usize]) -> Result<()> {
    let capacity = 1usize.checked_shl(qubits.len() as u32).unwrap_or(usize::MAX);
    if k == 0 || k > capacity {
        return Err(Error::capacity(format!(
            "cannot spread {k} branches over a {}-qubit register",
            qubits.len()
        )));
    }
    if k == capacity {
        for &q in qubits {
            state.apply_hadamard(q)?;
        }
        return Ok(());
    }
    let mut mask = 0usize;
    for &q in qubits {
        if q >= state.num_qubits() {
            return Err(Error::IndexOutOfRange {
                index: q,
                limit: state.num_qubits(),
            });
        }
        mask |= 1 << q;
    }
    let amps = state.amplitudes_mut();
    if amps.iter().enumerate().any(|(idx, a)| idx & mask != 0 && a.norm_sqr() != 0.0) {
        return Err(Error::input("uniform preparation requires the register in |0...0>"));
    }
    let scale = 1.0 / (k as f64).sqrt();
    let spread = |j: usize| {
        qubits
            .iter()
            .enumerate()
            .filter(|&(b, _)| (j >> b) & 1 == 1)
            .fold(0usize, |acc, (_, &q)| acc | (1 << q))
    };
    let offsets: Vec<usize> = (0..k).map(spread).collect();
    for idx in 0..amps.len() {
        if idx & mask != 0 {
            continue;
        }
        let a = amps[idx] * scale;
        for &off in &offsets {
            amps[idx | off] = a;
        }
    }
    Ok(())
}

/// Applies the `i`-th key unitary in one pass: on basis states whose
/// control register holds `i`, flips the target iff `key · x = 1`.
pub fn apply_controlled_key_unitary(
    state: &mut StateVector,
    layout: &RegisterLayout,
    i: usize,
    key: &SecretKey,
) -> Result<()> {
    if state.num_qubits() != layout.total() {
        return Err(Error::input(format!(
            "state has {} qubits, layout needs {}",
            state.num_qubits(),
            layout.total()
        )));
    }
    if i >= layout.control_capacity() {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: layout.control_capacity(),
        });
    }
    if key.width() != layout.data {
        return Err(Error::LengthMismatch {
            expected: layout.data,
            found: key.width(),
        });
    }
    let s = key.value() as usize;
    let amps = state.amplitudes_mut();
    for x in 0..1usize << layout.data {
        if parity((x & s) as u64) {
            let lo = layout.join(x, false, i);
            amps.swap(lo, lo | (1 << layout.target()));
        }
    }
    Ok(())
}

pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    match gate {
        Gate::X(q) => state.apply_x(*q),
        Gate::H(q) => state.apply_hadamard(*q),
        Gate::PrepareUniform { k, qubits } => prepare_uniform(state, *k, qubits),
        Gate::Mcx { controls, target } => state.apply_mcx(controls, *target),
    }
}

/// Full-register state after the circuit has run.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitOutput {
    pub layout: RegisterLayout,
    pub state: StateVector,
}

impl CircuitOutput {
    /// Data amplitudes in control branch `i` with the target projected onto
    /// `|->`.
    pub fn control_branch(&self, i: usize) -> Result<Vec<Complex64>> {
        control_branch(&self.state, &self.layout, i)
    }

    /// Pure data-register amplitudes, available when every data basis state
    /// is paired with at most one control value (always true for distinct
    /// keys after the final Hadamard layer). Each amplitude is the single
    /// nonzero branch amplitude with the target projected onto `|->`.
    pub fn data_register_amplitudes(&self) -> Result<Vec<Complex64>> {
        let layout = &self.layout;
        let dim = 1usize << layout.data;
        check_target_minus(&self.state, layout)?;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        let mut owner: Vec<Option<usize>> = vec![None; dim];
        for c in 0..layout.control_capacity() {
            let branch = self.control_branch(c)?;
            for (x, a) in branch.into_iter().enumerate() {
                if a.norm_sqr() <= NEGLIGIBLE {
                    continue;
                }
                if let Some(prev) = owner[x] {
                    return Err(Error::input(format!(
                        "data state {x} is entangled with control values {prev} and {c}; \
                         use the marginal distribution instead"
                    )));
                }
                owner[x] = Some(c);
                out[x] = a;
            }
        }
        Ok(out)
    }
}

pub(crate) const NEGLIGIBLE: f64 = 1e-24;

fn control_branch(state: &StateVector, layout: &RegisterLayout, i: usize) -> Result<Vec<Complex64>> {
    if i >= layout.control_capacity() {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: layout.control_capacity(),
        });
    }
    let amps = state.amplitudes();
    Ok((0..1usize << layout.data)
        .map(|x| {
            let zero = amps[layout.join(x, false, i)];
            let one = amps[layout.join(x, true, i)];
            (zero - one) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect())
}

fn check_target_minus(state: &StateVector, layout: &RegisterLayout) -> Result<()> {
    let plus_weight: f64 = (0..state.dim())
        .filter(|idx| !layout.split(*idx).1)
        .map(|idx| {
            let (x, _, c) = layout.split(idx);
            (state.amplitude(idx) + state.amplitude(layout.join(x, true, c))).norm_sqr() / 2.0
        })
        .sum();
    if plus_weight > 1e-20 {
        return Err(Error::input("target ancilla is not in the |-> state"));
    }
    Ok(())
}

pub fn run_circuit(keys: &KeySet) -> Result<CircuitOutput> {
    run_circuit_with(keys, OraclePath::Gate, DEFAULT_MAX_QUBITS)
}

pub fn run_circuit_with(keys: &KeySet, path: OraclePath, max_qubits: usize) -> Result<CircuitOutput> {
    let spec = build_circuit(keys)?;
    check_capacity(spec.total_qubits(), max_qubits)?;
    let mut state = match path {
        OraclePath::Gate => run_oracle_gates(&spec, max_qubits)?,
        OraclePath::Fast => fast_oracle_state(&spec, max_qubits)?,
    };
    for gate in &spec.gates[spec.oracle_end..] {
        apply_gate(&mut state, gate)?;
    }
    Ok(CircuitOutput {
        layout: spec.layout,
        state,
    })
}

/// State right after the oracle, gate by gate.
pub fn run_oracle_gates(spec: &CircuitSpec, max_qubits: usize) -> Result<StateVector> {
    let mut state = StateVector::zeros_with_limit(spec.total_qubits(), max_qubits)?;
    for gate in &spec.gates[..spec.oracle_end] {
        apply_gate(&mut state, gate)?;
    }
    Ok(state)
}

/// State right after the oracle, written directly:
/// `(1/sqrt k) sum_i |i>_c (x) |Psi_i> (x) |->` with
/// `|Psi_i> = (1/sqrt N) sum_x (-1)^{s_i . x} |x>`.
pub fn fast_oracle_state(spec: &CircuitSpec, max_qubits: usize) -> Result<StateVector> {
    let layout = spec.layout;
    check_capacity(layout.total(), max_qubits)?;
    let k = spec.k();
    let dim_data = 1usize << layout.data;
    let scale = 1.0 / ((k * dim_data * 2) as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << layout.total()];
    for (i, key) in spec.keys.keys().iter().enumerate() {
        let s = key.value() as usize;
        for x in 0..dim_data {
            let sign = if parity((x & s) as u64) { -scale } else { scale };
            amps[layout.join(x, false, i)] = Complex64::new(sign, 0.0);
            amps[layout.join(x, true, i)] = Complex64::new(-sign, 0.0);
        }
    }
    StateVector::from_amplitudes(amps)
}
