//! Single-qubit teleportation.
//!
//! The joint register is ordered (input ψ, sender's EPR half, receiver's EPR
//! half). The sender applies CNOT(0→1) then H(0) and measures qubit 0 into
//! `m1` and qubit 1 into `m2`. The receiver corrects with
//!
//! | (m1, m2) | receiver holds | correction |
//! |----------|----------------|------------|
//! | 0, 0     | α|0⟩ + β|1⟩    | none       |
//! | 0, 1     | α|1⟩ + β|0⟩    | X          |
//! | 1, 0     | α|0⟩ − β|1⟩    | Z          |
//! | 1, 1     | α|1⟩ − β|0⟩    | X, then Z  |

use num_complex::Complex64;
use rand::Rng;

use crate::qchannel::{apply_pauli, PauliError};
use crate::qstate::{fidelity, make_bell, BellKind, Gate, StateVector};
use crate::{Error, Result};

/// A teleported qubit counts as erroneous when its fidelity to the input is
/// below `1 - QUBIT_ERROR_TOL`.
pub const QUBIT_ERROR_TOL: f64 = 1e-9;

/// The two classical bits carried from sender to receiver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct BellOutcome {
    pub m1: u8,
    pub m2: u8,
}

impl BellOutcome {
    pub const fn new(m1: u8, m2: u8) -> Self {
        BellOutcome { m1: m1 & 1, m2: m2 & 1 }
    }

    /// `m1 * 2 + m2`.
    pub fn index(self) -> usize {
        ((self.m1 as usize) << 1) | self.m2 as usize
    }

    pub fn xor(self, other: BellOutcome) -> BellOutcome {
        BellOutcome::new(self.m1 ^ other.m1, self.m2 ^ other.m2)
    }

    /// Wire order: `[m1, m2]`.
    pub fn bits(self) -> [u8; 2] {
        [self.m1, self.m2]
    }
}

#[derive(Clone, Debug)]
pub struct TeleportResult {
    pub outcome: BellOutcome,
    pub receiver_state: StateVector,
    pub fidelity_to_input: f64,
}

impl TeleportResult {
    pub fn is_error(&self) -> bool {
        is_qubit_error(self.fidelity_to_input)
    }
}

pub fn is_qubit_error(fidelity_to_input: f64) -> bool {
    fidelity_to_input < 1.0 - QUBIT_ERROR_TOL
}

/// Default probe state `0.6|0⟩ + 0.8·e^{iπ/5}|1⟩`.
///
/// No Pauli leaves it invariant up to phase, so every uncorrected X, Y or Z
/// shows up as fidelity below one.
pub fn probe_state() -> StateVector {
    let beta = Complex64::from_polar(0.8, std::f64::consts::PI / 5.0);
    StateVector::qubit(Complex64::new(0.6, 0.0), beta).expect("normalized probe")
}

/// Bell-basis measurement of qubits 0 and 1 of a 3-qubit register.
/// Returns the outcome and the receiver's residual qubit.
pub fn sender_measure<R: Rng + ?Sized>(
    joint: &StateVector,
    rng: &mut R,
) -> Result<(BellOutcome, StateVector)> {
    if joint.n_qubits() != 3 {
        return Err(Error::domain(format!(
            "teleportation register must have 3 qubits, got {}",
            joint.n_qubits()
        )));
    }
    let mut s = joint.clone();
    s.apply(Gate::Cnot { control: 0, target: 1 })?;
    s.apply(Gate::H(0))?;
    let m1 = s.measure_and_discard(0, rng)?;
    let m2 = s.measure_and_discard(0, rng)?;
    Ok((BellOutcome::new(m1, m2), s))
}

/// Receiver-side correction for the received bits.
pub fn receiver_correct(qubit: &StateVector, outcome: BellOutcome) -> Result<StateVector> {
    if qubit.n_qubits() != 1 {
        return Err(Error::domain("receiver correction expects a single qubit"));
    }
    let mut s = qubit.clone();
    if outcome.m2 == 1 {
        s.apply(Gate::X(0))?;
    }
    if outcome.m1 == 1 {
        s.apply(Gate::Z(0))?;
    }
    Ok(s)
}

/// Teleports `psi` over a fresh `β00` pair.
///
/// `pauli_on_pair` corrupts the receiver's half before the protocol runs and
/// `classical_error` is XORed onto the bits in transit.
pub fn teleport_once<R: Rng + ?Sized>(
    psi: &StateVector,
    classical_error: BellOutcome,
    pauli_on_pair: PauliError,
    rng: &mut R,
) -> Result<TeleportResult> {
    let mut pair = make_bell(BellKind::PHI_PLUS);
    apply_pauli(&mut pair, 1, pauli_on_pair)?;
    teleport_over_pair(psi, &pair, |sent| Ok(sent.xor(classical_error)), rng)
}

/// Teleports `psi` over an arbitrary shared `pair` (sender half = qubit 0).
/// `link` maps the sent bits to the bits the receiver sees.
pub fn teleport_over_pair<R, F>(
    psi: &StateVector,
    pair: &StateVector,
    link: F,
    rng: &mut R,
) -> Result<TeleportResult>
where
    R: Rng + ?Sized,
    F: FnOnce(BellOutcome) -> Result<BellOutcome>,
{
    if psi.n_qubits() != 1 || pair.n_qubits() != 2 {
        return Err(Error::domain("teleportation needs a 1-qubit input and a 2-qubit pair"));
    }
    let joint = psi.tensor(pair)?;
    let (outcome, residual) = sender_measure(&joint, rng)?;
    let received = link(outcome)?;
    let receiver_state = receiver_correct(&residual, received)?;
    let fidelity_to_input = fidelity(psi, &receiver_state)?;
    Ok(TeleportResult {
        outcome,
        receiver_state,
        fidelity_to_input,
    })
}
