//! Depolarizing channel and eavesdropper models.

use rand::Rng;
use std::fmt;
use std::str::FromStr;

use crate::qstate::{make_bell, BellKind, Gate, StateVector};
use crate::teleport::BellOutcome;
use crate::{Error, Result};

/// Smallest depolarization increase an active boost-mode eavesdropper adds.
pub const MIN_EVE_BOOST: f64 = 0.10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PauliError {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl PauliError {
    pub const ALL: [PauliError; 4] = [PauliError::I, PauliError::X, PauliError::Y, PauliError::Z];

    /// Has an X component (X or Y).
    pub fn flips_bit(self) -> bool {
        matches!(self, PauliError::X | PauliError::Y)
    }

    /// Has a Z component (Z or Y).
    pub fn flips_phase(self) -> bool {
        matches!(self, PauliError::Z | PauliError::Y)
    }

    pub fn from_components(bit: bool, phase: bool) -> Self {
        match (bit, phase) {
            (false, false) => PauliError::I,
            (true, false) => PauliError::X,
            (false, true) => PauliError::Z,
            (true, true) => PauliError::Y,
        }
    }

    /// Product up to global phase.
    pub fn compose(self, other: PauliError) -> PauliError {
        PauliError::from_components(
            self.flips_bit() ^ other.flips_bit(),
            self.flips_phase() ^ other.flips_phase(),
        )
    }
}

impl fmt::Display for PauliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliError::I => "I",
            PauliError::X => "X",
            PauliError::Y => "Y",
            PauliError::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Applies `pauli` to `qubit`.
pub fn apply_pauli(state: &mut StateVector, qubit: usize, pauli: PauliError) -> Result<()> {
    match pauli {
        PauliError::I => Ok(()),
        PauliError::X => state.apply(Gate::X(qubit)),
        PauliError::Y => state.apply(Gate::Y(qubit)),
        PauliError::Z => state.apply(Gate::Z(qubit)),
    }
}

/// Depolarizing strength: total error probability `p_eq`, split evenly so each
/// of X, Y, Z occurs with `p_e = p_eq / 3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepolarizingParams {
    p_eq: f64,
}

impl DepolarizingParams {
    pub const NOISELESS: DepolarizingParams = DepolarizingParams { p_eq: 0.0 };

    /// From the total error probability.
    pub fn from_total(p_eq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_eq) {
            return Err(Error::domain(format!("P_eq = {p_eq} is not a probability")));
        }
        Ok(DepolarizingParams { p_eq })
    }

    /// From the probability of each individual Pauli.
    pub fn from_per_pauli(p_e: f64) -> Result<Self> {
        if !(0.0..=1.0 / 3.0).contains(&p_e) {
            return Err(Error::domain(format!("p_e = {p_e} must lie in [0, 1/3]")));
        }
        Ok(DepolarizingParams { p_eq: 3.0 * p_e })
    }

    pub fn p_eq(self) -> f64 {
        self.p_eq
    }

    pub fn p_e(self) -> f64 {
        self.p_eq / 3.0
    }
}

/// Maps one uniform draw `n ∈ [0, 1)` onto a Pauli:
/// X below `P_eq/3`, Z below `2P_eq/3`, Y below `P_eq`, identity otherwise.
pub fn pauli_from_uniform(params: DepolarizingParams, n: f64) -> PauliError {
    let p = params.p_eq;
    if n < p / 3.0 {
        PauliError::X
    } else if n < 2.0 * p / 3.0 {
        PauliError::Z
    } else if n < p {
        PauliError::Y
    } else {
        PauliError::I
    }
}

pub fn sample_pauli<R: Rng + ?Sized>(params: DepolarizingParams, rng: &mut R) -> PauliError {
    pauli_from_uniform(params, rng.random::<f64>())
}

/// Passes `qubit` through the channel. The returned Pauli is a diagnostic;
/// protocol code must not branch on it.
pub fn depolarize_qubit<R: Rng + ?Sized>(
    state: &mut StateVector,
    qubit: usize,
    params: DepolarizingParams,
    rng: &mut R,
) -> Result<PauliError> {
    if qubit >= state.n_qubits() {
        return Err(Error::domain(format!("qubit {qubit} out of range")));
    }
    let pauli = sample_pauli(params, rng);
    apply_pauli(state, qubit, pauli)?;
    Ok(pauli)
}

/// Eavesdropper behaviour on the receiver-bound qubits.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum EveModel {
    #[default]
    None,
    /// Entanglement swap on each transiting qubit with this probability.
    Swap { intercept_fraction: f64 },
    /// Raises the channel depolarization by `delta_pe`.
    DepolarizeBoost { delta_pe: f64 },
}

impl EveModel {
    pub fn validate(self) -> Result<Self> {
        match self {
            EveModel::None => Ok(self),
            EveModel::Swap { intercept_fraction: f } if (0.0..=1.0).contains(&f) => Ok(self),
            EveModel::Swap { intercept_fraction } => Err(Error::domain(format!(
                "intercept fraction {intercept_fraction} is not a probability"
            ))),
            EveModel::DepolarizeBoost { delta_pe } if (MIN_EVE_BOOST..=1.0).contains(&delta_pe) => {
                Ok(self)
            }
            EveModel::DepolarizeBoost { delta_pe } => Err(Error::domain(format!(
                "boost {delta_pe} outside [{MIN_EVE_BOOST}, 1]"
            ))),
        }
    }

    pub fn is_present(self) -> bool {
        !matches!(self, EveModel::None)
    }
}

impl fmt::Display for EveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EveModel::None => f.write_str("none"),
            EveModel::Swap { intercept_fraction } => write!(f, "swap:{intercept_fraction}"),
            EveModel::DepolarizeBoost { delta_pe } => write!(f, "boost:{delta_pe}"),
        }
    }
}

impl FromStr for EveModel {
    type Err = Error;

    /// `none`, `swap:<fraction>` or `boost:<delta>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number in eve model {s:?}")))
        };
        let model = match s.split_once(':') {
            None if s == "none" => EveModel::None,
            None if s == "swap" => EveModel::Swap { intercept_fraction: 1.0 },
            None if s == "boost" => EveModel::DepolarizeBoost { delta_pe: MIN_EVE_BOOST },
            Some(("swap", v)) => EveModel::Swap { intercept_fraction: parse(v)? },
            Some(("boost", v)) => EveModel::DepolarizeBoost { delta_pe: parse(v)? },
            _ => return Err(Error::Config(format!("unknown eve model {s:?}"))),
        };
        model.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Channel strength seen with a boost-mode eavesdropper: `P_eq + delta`.
pub fn effective_params(base: DepolarizingParams, eve: EveModel) -> Result<DepolarizingParams> {
    match eve.validate()? {
        EveModel::DepolarizeBoost { delta_pe } => DepolarizingParams::from_total(base.p_eq + delta_pe),
        other => Err(Error::domain(format!(
            "effective parameters need boost mode, got {other}"
        ))),
    }
}

/// Intercept-and-entangle attack on qubit 1 (B) of `pair`.
///
/// Eve prepares `β00` on (C, D), Bell-measures (B, D) and forwards C. Returns
/// the (A, C) state and Eve's outcome (`m1` from B, `m2` from D).
pub fn eve_entanglement_swap<R: Rng + ?Sized>(
    pair: &StateVector,
    rng: &mut R,
) -> Result<(StateVector, BellOutcome)> {
    if pair.n_qubits() != 2 {
        return Err(Error::domain("entanglement swap expects a 2-qubit pair"));
    }
    // Register order: A=0, B=1, C=2, D=3.
    let mut s = pair.tensor(&make_bell(BellKind::PHI_PLUS))?;
    s.apply(Gate::Cnot { control: 1, target: 3 })?;
    s.apply(Gate::H(1))?;
    let m_d = s.measure_and_discard(3, rng)?;
    let m_b = s.measure_and_discard(1, rng)?;
    Ok((s, BellOutcome::new(m_b, m_d)))
}
