//! End-to-end classical link for the teleportation measurement bits.

use rand::Rng;

use crate::cchannel::{hard_decisions, send_bits, Fading};
use crate::turbo::{TurboCodec, TurboConfig};
use crate::{Error, Result};

/// How measurement bits reach the receiver.
#[derive(Clone, Debug)]
pub enum ClassicalLink {
    /// Error-free.
    Ideal,
    /// Independent bit flips with probability `ber`, bypassing modulation.
    BitFlip { ber: f64 },
    /// Uncoded QPSK over the fading channel with hard decisions.
    Uncoded { fading: Fading, snr_db: f64 },
    /// Turbo-coded QPSK over the fading channel.
    Turbo {
        codec: TurboCodec,
        fading: Fading,
        snr_db: f64,
    },
}

impl ClassicalLink {
    pub fn bit_flip(ber: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ber) {
            return Err(Error::domain(format!("BER {ber} is not a probability")));
        }
        Ok(ClassicalLink::BitFlip { ber })
    }

    pub fn qpsk(turbo: Option<TurboConfig>, fading: Fading, snr_db: f64) -> Result<Self> {
        Ok(match turbo {
            Some(cfg) => ClassicalLink::Turbo {
                codec: TurboCodec::new(cfg)?,
                fading,
                snr_db,
            },
            None => ClassicalLink::Uncoded { fading, snr_db },
        })
    }

    /// Bits the receiver decides on, same length as `bits`.
    pub fn send<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Result<Vec<u8>> {
        match self {
            ClassicalLink::Ideal => Ok(bits.to_vec()),
            ClassicalLink::BitFlip { ber } => Ok(bits
                .iter()
                .map(|&b| b ^ u8::from(rng.random::<f64>() < *ber))
                .collect()),
            ClassicalLink::Uncoded { fading, snr_db } => {
                let padded = pad_even(bits);
                let llrs = send_bits(&padded, fading, *snr_db, rng)?;
                let mut out = hard_decisions(&llrs.llrs);
                out.truncate(bits.len());
                Ok(out)
            }
            ClassicalLink::Turbo { codec, fading, snr_db } => {
                let k = codec.config().block_length;
                let mut out = Vec::with_capacity(bits.len());
                for chunk in bits.chunks(k) {
                    let mut info = chunk.to_vec();
                    info.resize(k, 0);
                    let decoded = send_turbo_block(codec, &info, fading, *snr_db, rng)?;
                    out.extend_from_slice(&decoded[..chunk.len()]);
                }
                Ok(out)
            }
        }
    }
}

/// Encodes, transmits and decodes one full block of `K` information bits.
pub fn send_turbo_block<R: Rng + ?Sized>(
    codec: &TurboCodec,
    info: &[u8],
    fading: &Fading,
    snr_db: f64,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let coded = pad_even(&codec.encode(info)?.to_bits());
    let mut llrs = send_bits(&coded, fading, snr_db, rng)?.llrs;
    llrs.truncate(codec.coded_len());
    codec.decode(&llrs)
}

fn pad_even(bits: &[u8]) -> Vec<u8> {
    let mut v = bits.to_vec();
    if v.len() % 2 == 1 {
        v.push(0);
    }
    v
}
