//! Dense state-vector register.
//!
//! Qubit 0 is the most significant bit of the basis index: in a 3-qubit
//! register, basis index 5 = `0b101` is `|101⟩` with qubit 0 and qubit 2 set.
//! States are compared only through [`fidelity`], so global phase never
//! matters.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 16;

const NORM_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex amplitudes over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// The gate set: Hadamard, the three Paulis and CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
}

/// One of the four Bell states `β_{phase,parity}`.
///
/// `β00 = (|00⟩+|11⟩)/√2`, `β10 = (|00⟩−|11⟩)/√2`,
/// `β01 = (|01⟩+|10⟩)/√2`, `β11 = (|01⟩−|10⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BellKind {
    pub phase_bit: u8,
    pub parity_bit: u8,
}

impl BellKind {
    pub const PHI_PLUS: BellKind = BellKind::new(0, 0);
    pub const PHI_MINUS: BellKind = BellKind::new(1, 0);
    pub const PSI_PLUS: BellKind = BellKind::new(0, 1);
    pub const PSI_MINUS: BellKind = BellKind::new(1, 1);

    pub const ALL: [BellKind; 4] = [
        BellKind::PHI_PLUS,
        BellKind::PSI_PLUS,
        BellKind::PHI_MINUS,
        BellKind::PSI_MINUS,
    ];

    pub const fn new(phase_bit: u8, parity_bit: u8) -> Self {
        BellKind {
            phase_bit: phase_bit & 1,
            parity_bit: parity_bit & 1,
        }
    }
}

/// Result of measuring one qubit.
#[derive(Clone, Debug)]
pub struct MeasureOutcome {
    pub bit: u8,
    pub post_state: StateVector,
}

impl StateVector {
    /// Computational basis state `|index⟩`.
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::domain(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zeros(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    /// Builds a state from explicit amplitudes, which must be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::domain(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_size(n_qubits)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("state is not normalized (norm² = {norm})")));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Single qubit `α|0⟩ + β|1⟩`.
    pub fn qubit(alpha: Complex64, beta: Complex64) -> Result<Self> {
        Self::from_amplitudes(vec![alpha, beta])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::domain(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::H(q) => {
                self.check_qubit(q)?;
                let s = FRAC_1_SQRT_2;
                self.for_pairs(q, |a, b| (s * (a + b), s * (a - b)));
            }
            Gate::X(q) => {
                self.check_qubit(q)?;
                self.for_pairs(q, |a, b| (b, a));
            }
            Gate::Y(q) => {
                self.check_qubit(q)?;
                let i = Complex64::i();
                self.for_pairs(q, |a, b| (-i * b, i * a));
            }
            Gate::Z(q) => {
                self.check_qubit(q)?;
                self.for_pairs(q, |a, b| (a, -b));
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(Error::domain(format!(
                        "CNOT control and target are both qubit {control}"
                    )));
                }
                let cmask = self.mask(control);
                let tmask = self.mask(target);
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() < NORM_TOL);
        Ok(())
    }

    /// Applies a sequence of gates.
    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    /// Returns a copy with `gate` applied.
    pub fn with_gate(mut self, gate: Gate) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    /// Calls `f(amp0, amp1)` for every pair of indices differing only in `qubit`.
    fn for_pairs(&mut self, qubit: usize, f: impl Fn(Complex64, Complex64) -> (Complex64, Complex64)) {
        let mask = self.mask(qubit);
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + mask {
                let (a, b) = f(self.amps[i], self.amps[i | mask]);
                self.amps[i] = a;
                self.amps[i | mask] = b;
            }
            base += 2 * mask;
        }
    }

    /// Kronecker product; `self`'s qubits come first.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        let mut amps = Vec::with_capacity(1 << n);
        for &a in &self.amps {
            amps.extend(other.amps.iter().map(|&b| a * b));
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Probability that measuring `qubit` yields 1.
    pub fn probability_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Measures `qubit` in the computational basis, collapsing in place.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        let p1 = self.probability_one(qubit)?.clamp(0.0, 1.0);
        let u: f64 = rng.random();
        // Zero-probability branches are never selected: u ∈ [0, 1).
        let bit = if p1 <= 0.0 {
            0
        } else if p1 >= 1.0 {
            1
        } else {
            u8::from(u < p1)
        };
        self.collapse(qubit, bit)?;
        Ok(bit)
    }

    /// Measures `qubit`, leaving `self` untouched.
    pub fn measure_qubit<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<MeasureOutcome> {
        let mut post_state = self.clone();
        let bit = post_state.measure(qubit, rng)?;
        Ok(MeasureOutcome { bit, post_state })
    }

    /// Projects `qubit` onto `bit` and renormalizes.
    pub fn collapse(&mut self, qubit: usize, bit: u8) -> Result<()> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        let keep = if bit == 0 { 0 } else { mask };
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == keep {
                norm += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if norm <= 0.0 {
            return Err(Error::domain(format!(
                "cannot collapse qubit {qubit} onto a zero-probability outcome {bit}"
            )));
        }
        let scale = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
        Ok(())
    }

    /// Removes `qubit`, which must be in a definite computational state
    /// (for example right after measuring it). Returns that bit.
    pub fn discard(&mut self, qubit: usize) -> Result<u8> {
        self.check_qubit(qubit)?;
        if self.n_qubits == 1 {
            return Err(Error::domain("cannot discard the last qubit"));
        }
        let p1 = self.probability_one(qubit)?;
        let bit = if p1 < NORM_TOL {
            0
        } else if p1 > 1.0 - NORM_TOL {
            1
        } else {
            return Err(Error::domain(format!(
                "qubit {qubit} is not in a definite state (P(1) = {p1})"
            )));
        };
        let mask = self.mask(qubit);
        let low = mask - 1;
        let want = if bit == 0 { 0 } else { mask };
        let amps = (0..self.amps.len() / 2)
            .map(|k| {
                let i = ((k & !low) << 1) | want | (k & low);
                self.amps[i]
            })
            .collect();
        self.amps = amps;
        self.n_qubits -= 1;
        Ok(bit)
    }

    /// Measures and removes `qubit`, returning the outcome.
    pub fn measure_and_discard<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<u8> {
        self.measure(qubit, rng)?;
        self.discard(qubit)
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::domain("a register needs at least one qubit"));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: n_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Bell state built by the H-then-CNOT circuit from `|phase, parity⟩`.
pub fn make_bell(kind: BellKind) -> StateVector {
    let index = ((kind.phase_bit as usize) << 1) | kind.parity_bit as usize;
    let mut s = StateVector::basis_state(2, index).expect("2-qubit basis state");
    s.apply_all(&[Gate::H(0), Gate::Cnot { control: 0, target: 1 }])
        .expect("valid 2-qubit circuit");
    s
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::domain(format!(
            "fidelity between {} and {} qubit states",
            a.n_qubits, b.n_qubits
        )));
    }
    let overlap: Complex64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr().min(1.0))
}
