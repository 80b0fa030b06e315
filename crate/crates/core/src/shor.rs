//! Nine-qubit Shor code.
//!
//! Encoding is the phase-level three-repetition of the bit-level
//! three-repetition: `|0⟩ ↦ (|000⟩+|111⟩)^⊗3 / 2√2`,
//! `|1⟩ ↦ (|000⟩−|111⟩)^⊗3 / 2√2`. Block position 0 carries the logical
//! qubit; positions 3 and 6 lead the other two triples.
//!
//! Decoding runs the encoding circuit backwards, reading the redundant
//! qubits after each level and applying a majority-vote correction to the
//! leader. [`frame_decode`] evaluates exactly the same decision logic on a
//! Pauli pattern without touching amplitudes.

use rand::Rng;
use rayon::prelude::*;
use std::sync::OnceLock;

use crate::qchannel::{apply_pauli, sample_pauli, DepolarizingParams, PauliError};
use crate::qstate::{fidelity, make_bell, BellKind, Gate, StateVector, MAX_QUBITS};
use crate::rng::stream_rng;
use crate::{Error, Result};

pub const BLOCK_SIZE: usize = 9;

/// Leaders of the three triples, relative to the block.
const LEADERS: [usize; 3] = [0, 3, 6];

/// Physical qubits of one logical qubit inside a host register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShorBlock {
    pub qubits: [usize; BLOCK_SIZE],
}

impl ShorBlock {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::domain(format!("block qubit {q} out of range")));
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::domain(format!("block qubit {q} repeated")));
            }
        }
        Ok(())
    }

    fn cnot(&self, c: usize, t: usize) -> Gate {
        Gate::Cnot {
            control: self.qubits[c],
            target: self.qubits[t],
        }
    }

    fn inner_cnots(&self) -> Vec<Gate> {
        LEADERS
            .iter()
            .flat_map(|&l| [self.cnot(l, l + 1), self.cnot(l, l + 2)])
            .collect()
    }

    fn outer_cnots(&self) -> [Gate; 2] {
        [self.cnot(0, 3), self.cnot(0, 6)]
    }

    fn leader_hadamards(&self) -> [Gate; 3] {
        LEADERS.map(|l| Gate::H(self.qubits[l]))
    }
}

/// One Pauli per physical qubit of a block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PauliPattern {
    pub errors: [PauliError; BLOCK_SIZE],
}

impl PauliPattern {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn single(position: usize, pauli: PauliError) -> Self {
        let mut p = Self::default();
        p.errors[position] = pauli;
        p
    }

    /// Pattern number `index` in base-4 digits (qubit 0 most significant,
    /// digit order I, X, Y, Z).
    pub fn from_index(mut index: usize) -> Self {
        let mut p = Self::default();
        for slot in p.errors.iter_mut().rev() {
            *slot = PauliError::ALL[index & 3];
            index >>= 2;
        }
        p
    }

    pub fn weight(&self) -> usize {
        self.errors.iter().filter(|&&e| e != PauliError::I).count()
    }

    pub fn sample<R: Rng + ?Sized>(params: DepolarizingParams, rng: &mut R) -> Self {
        let mut p = Self::default();
        for slot in p.errors.iter_mut() {
            *slot = sample_pauli(params, rng);
        }
        p
    }
}

/// Outcome of one decode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyndromeResult {
    /// Redundant-qubit readouts in block positions 1, 2, 4, 5, 7, 8, 3, 6.
    pub syndrome: [u8; 8],
    /// Whether any correction was applied.
    pub corrected: bool,
    /// Residual logical Pauli, when the decoder can know it.
    pub logical_error: Option<PauliError>,
}

impl SyndromeResult {
    pub fn is_logical_error(&self) -> bool {
        matches!(self.logical_error, Some(e) if e != PauliError::I)
    }
}

/// Appends eight `|0⟩` ancillas and encodes `logical_qubit` into a block with
/// them.
pub fn shor_encode(host: &StateVector, logical_qubit: usize) -> Result<(StateVector, ShorBlock)> {
    let n = host.n_qubits();
    if logical_qubit >= n {
        return Err(Error::domain(format!("logical qubit {logical_qubit} out of range")));
    }
    if n + BLOCK_SIZE - 1 > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: n + BLOCK_SIZE - 1,
            max: MAX_QUBITS,
        });
    }
    let mut qubits = [0; BLOCK_SIZE];
    qubits[0] = logical_qubit;
    for (i, q) in qubits.iter_mut().enumerate().skip(1) {
        *q = n + i - 1;
    }
    let block = ShorBlock { qubits };
    let mut s = host.tensor(&StateVector::zeros(BLOCK_SIZE - 1)?)?;
    s.apply_all(&block.outer_cnots())?;
    s.apply_all(&block.leader_hadamards())?;
    s.apply_all(&block.inner_cnots())?;
    Ok((s, block))
}

pub fn apply_pattern(host: &mut StateVector, block: &ShorBlock, pattern: &PauliPattern) -> Result<()> {
    block.validate(host.n_qubits())?;
    for (&q, &e) in block.qubits.iter().zip(&pattern.errors) {
        apply_pauli(host, q, e)?;
    }
    Ok(())
}

/// Decodes `block`, removing its eight redundant qubits. The logical qubit
/// keeps its position relative to the remaining host qubits.
pub fn shor_decode<R: Rng + ?Sized>(
    host: &StateVector,
    block: &ShorBlock,
    rng: &mut R,
) -> Result<(StateVector, SyndromeResult)> {
    block.validate(host.n_qubits())?;
    let q = &block.qubits;
    let mut s = host.clone();
    let mut syndrome = [0u8; 8];

    s.apply_all(&block.inner_cnots())?;
    for (t, &l) in LEADERS.iter().enumerate() {
        let a = s.measure(q[l + 1], rng)?;
        let b = s.measure(q[l + 2], rng)?;
        syndrome[2 * t] = a;
        syndrome[2 * t + 1] = b;
        if a == 1 && b == 1 {
            s.apply(Gate::X(q[l]))?;
        }
    }

    s.apply_all(&block.leader_hadamards())?;
    s.apply_all(&block.outer_cnots())?;
    let a = s.measure(q[3], rng)?;
    let b = s.measure(q[6], rng)?;
    syndrome[6] = a;
    syndrome[7] = b;
    if a == 1 && b == 1 {
        s.apply(Gate::X(q[0]))?;
    }

    let mut redundant: Vec<usize> = q[1..].to_vec();
    redundant.sort_unstable_by(|a, b| b.cmp(a));
    for r in redundant {
        s.discard(r)?;
    }
    Ok((
        s,
        SyndromeResult {
            syndrome,
            corrected: syndrome.contains(&1),
            logical_error: None,
        },
    ))
}

fn majority(a: bool, b: bool, c: bool) -> bool {
    (a & b) | (a & c) | (b & c)
}

/// Symbolic decode of a Pauli pattern through the same circuit.
pub fn frame_decode(pattern: &PauliPattern) -> SyndromeResult {
    let x = pattern.errors.map(PauliError::flips_bit);
    let z = pattern.errors.map(PauliError::flips_phase);
    let mut syndrome = [0u8; 8];
    // Leader residuals after the bit-level stage: X survives by majority,
    // Z on any member of a triple propagates back to its leader.
    let mut lead_x = [false; 3];
    let mut lead_z = [false; 3];
    for (t, &l) in LEADERS.iter().enumerate() {
        syndrome[2 * t] = u8::from(x[l] ^ x[l + 1]);
        syndrome[2 * t + 1] = u8::from(x[l] ^ x[l + 2]);
        lead_x[t] = majority(x[l], x[l + 1], x[l + 2]);
        lead_z[t] = z[l] ^ z[l + 1] ^ z[l + 2];
    }
    // Hadamard on the leaders swaps the components.
    let (outer_x, outer_z) = (lead_z, lead_x);
    syndrome[6] = u8::from(outer_x[0] ^ outer_x[1]);
    syndrome[7] = u8::from(outer_x[0] ^ outer_x[2]);
    let logical_x = majority(outer_x[0], outer_x[1], outer_x[2]);
    let logical_z = outer_z[0] ^ outer_z[1] ^ outer_z[2];
    SyndromeResult {
        syndrome,
        corrected: syndrome.contains(&1),
        logical_error: Some(PauliError::from_components(logical_x, logical_z)),
    }
}

/// Classifies `pattern` by full state-vector simulation: encodes one half of
/// `β00`, applies the pattern, decodes, and identifies which Pauli (if any)
/// maps `β00` onto the result.
pub fn state_vector_classify<R: Rng + ?Sized>(pattern: &PauliPattern, rng: &mut R) -> Result<SyndromeResult> {
    let bell = make_bell(BellKind::PHI_PLUS);
    let (mut s, block) = shor_encode(&bell, 1)?;
    apply_pattern(&mut s, &block, pattern)?;
    let (decoded, mut result) = shor_decode(&s, &block, rng)?;
    for p in PauliError::ALL {
        let mut reference = bell.clone();
        apply_pauli(&mut reference, 1, p)?;
        if (fidelity(&decoded, &reference)? - 1.0).abs() < 1e-9 {
            result.logical_error = Some(p);
            return Ok(result);
        }
    }
    Err(Error::domain("decoded state is not a Pauli image of the input"))
}

/// One Monte Carlo trial: sample a pattern with the channel rule per qubit
/// and decode it symbolically.
pub fn pauli_frame_trial<R: Rng + ?Sized>(params: DepolarizingParams, rng: &mut R) -> SyndromeResult {
    frame_decode(&PauliPattern::sample(params, rng))
}

/// Counts logical errors over `trials` frame trials. Trials are split into
/// fixed chunks with their own streams, so the count is independent of the
/// thread pool.
pub fn count_logical_errors(params: DepolarizingParams, trials: u64, seed: u64) -> u64 {
    const CHUNK: u64 = 1 << 16;
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let n = CHUNK.min(trials - c * CHUNK);
            (0..n)
                .filter(|_| pauli_frame_trial(params, &mut rng).is_logical_error())
                .count() as u64
        })
        .sum()
}

/// `table[w][class]`: how many of the 4⁹ patterns of weight `w` decode to the
/// logical class `I, X, Y, Z`.
fn class_table() -> &'static [[u32; 4]; BLOCK_SIZE + 1] {
    static TABLE: OnceLock<[[u32; 4]; BLOCK_SIZE + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [[0u32; 4]; BLOCK_SIZE + 1];
        for index in 0..1usize << (2 * BLOCK_SIZE) {
            let p = PauliPattern::from_index(index);
            let class = frame_decode(&p).logical_error.expect("frame path knows the error");
            table[p.weight()][class as usize] += 1;
        }
        table
    })
}

/// Exact probabilities of each residual logical Pauli, indexed `I, X, Y, Z`,
/// from enumerating all 4⁹ patterns.
pub fn exact_logical_distribution(params: DepolarizingParams) -> [f64; 4] {
    let (p_e, p_ok) = (params.p_e(), 1.0 - params.p_eq());
    let mut dist = [0.0; 4];
    for (w, counts) in class_table().iter().enumerate() {
        let pw = p_e.powi(w as i32) * p_ok.powi((BLOCK_SIZE - w) as i32);
        for (d, &n) in dist.iter_mut().zip(counts) {
            *d += n as f64 * pw;
        }
    }
    dist
}

/// Probability that a decoded block carries any logical error.
pub fn exact_logical_rate(params: DepolarizingParams) -> f64 {
    let d = exact_logical_distribution(params);
    d[1] + d[2] + d[3]
}

/// Probability of a logical error with an X component, the part visible to
/// computational-basis comparisons.
pub fn exact_bit_flip_rate(params: DepolarizingParams) -> f64 {
    let d = exact_logical_distribution(params);
    d[PauliError::X as usize] + d[PauliError::Y as usize]
}
