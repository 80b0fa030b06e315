//! Classical link: Gray-mapped QPSK, Rician fading, AWGN and soft demodulation.
//!
//! SNR values are Es/N0: average received symbol energy `E[|H|²]` over the
//! complex noise variance N0. With 2 bits per symbol and code rate `r`,
//! `Eb/N0 = Es/N0 − 10·log10(2r)` dB.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result};

/// Rician fading parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RicianParams {
    /// Channel power loss at the reference distance.
    pub p0: f64,
    /// Link distance.
    pub d: f64,
    /// Rician factor ζ (LOS to scatter power ratio). `f64::INFINITY` is pure LOS.
    pub zeta: f64,
    /// Phase of the LOS component, radians.
    pub los_phase: f64,
}

impl Default for RicianParams {
    fn default() -> Self {
        RicianParams {
            p0: 1.0,
            d: 1.0,
            zeta: 10.0,
            los_phase: 0.0,
        }
    }
}

impl RicianParams {
    pub fn validate(self) -> Result<Self> {
        if !(self.zeta >= 0.0) {
            return Err(Error::domain(format!("Rician factor {} must be ≥ 0", self.zeta)));
        }
        if !(self.d > 0.0) || !(self.p0 > 0.0) {
            return Err(Error::domain("p0 and d must be positive"));
        }
        Ok(self)
    }

    /// `E[|H|²] = p0 / d²`.
    pub fn mean_power(&self) -> f64 {
        self.p0 / (self.d * self.d)
    }

    fn split(&self) -> (f64, f64) {
        if self.zeta.is_infinite() {
            (1.0, 0.0)
        } else {
            let z = self.zeta;
            ((z / (z + 1.0)).sqrt(), (1.0 / (z + 1.0)).sqrt())
        }
    }
}

/// How often the fading coefficient is redrawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coherence {
    #[default]
    PerSymbol,
    PerFrame,
}

/// Fading model of the link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fading {
    /// No fading, `H = 1`.
    None,
    Rician(RicianParams, Coherence),
}

impl Default for Fading {
    fn default() -> Self {
        Fading::Rician(RicianParams::default(), Coherence::PerSymbol)
    }
}

impl Fading {
    pub fn mean_power(&self) -> f64 {
        match self {
            Fading::None => 1.0,
            Fading::Rician(p, _) => p.mean_power(),
        }
    }
}

/// Unit-average-energy constellation points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
}

/// Channel output plus the coefficients the coherent receiver knows.
#[derive(Clone, Debug)]
pub struct Received {
    pub symbols: SymbolFrame,
    pub csi: Vec<Complex64>,
    /// Complex noise variance N0 (zero when noise is disabled).
    pub noise_var: f64,
}

/// Per-bit LLRs; positive favours bit 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LlrFrame {
    pub llrs: Vec<f64>,
}

/// Gray QPSK: `(b0, b1) → ((1−2b0) + i(1−2b1))/√2`.
pub fn qpsk_modulate(bits: &[u8]) -> Result<SymbolFrame> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::domain(format!("QPSK needs an even bit count, got {}", bits.len())));
    }
    let symbols = bits
        .chunks_exact(2)
        .map(|p| {
            let re = 1.0 - 2.0 * f64::from(p[0] & 1);
            let im = 1.0 - 2.0 * f64::from(p[1] & 1);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    Ok(SymbolFrame { symbols })
}

/// Circularly-symmetric complex Gaussian with `E[|z|²] = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// One draw of `H = √(p0/d²)·(√(ζ/(ζ+1))·H_LOS + √(1/(ζ+1))·H_NLOS)` with
/// `H_LOS = e^{iφ}` and `H_NLOS ~ CN(0, 1)`.
pub fn fading_coefficient<R: Rng + ?Sized>(params: &RicianParams, rng: &mut R) -> Complex64 {
    let (k_los, k_nlos) = params.split();
    let los = Complex64::from_polar(1.0, params.los_phase);
    let nlos = if k_nlos > 0.0 {
        complex_gaussian(1.0, rng)
    } else {
        Complex64::new(0.0, 0.0)
    };
    params.mean_power().sqrt() * (k_los * los + k_nlos * nlos)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Es/N0 in dB for a given Eb/N0, QPSK and code rate `rate`.
pub fn es_n0_db(eb_n0_db: f64, rate: f64) -> f64 {
    eb_n0_db + 10.0 * (2.0 * rate).log10()
}

/// Noise variance N0 for the given Es/N0; zero when `snr_db` is `+∞`.
pub fn noise_variance(fading: &Fading, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        fading.mean_power() / db_to_linear(snr_db)
    }
}

/// `y_k = H_k·x_k + n_k`.
pub fn transmit<R: Rng + ?Sized>(
    frame: &SymbolFrame,
    fading: &Fading,
    snr_db: f64,
    rng: &mut R,
) -> Received {
    let noise_var = noise_variance(fading, snr_db);
    let n = frame.symbols.len();
    let csi: Vec<Complex64> = match fading {
        Fading::None => vec![Complex64::new(1.0, 0.0); n],
        Fading::Rician(p, Coherence::PerSymbol) => (0..n).map(|_| fading_coefficient(p, rng)).collect(),
        Fading::Rician(p, Coherence::PerFrame) => vec![fading_coefficient(p, rng); n],
    };
    let symbols = frame
        .symbols
        .iter()
        .zip(&csi)
        .map(|(&x, &h)| {
            let y = h * x;
            if noise_var > 0.0 {
                y + complex_gaussian(noise_var, rng)
            } else {
                y
            }
        })
        .collect();
    Received {
        symbols: SymbolFrame { symbols },
        csi,
        noise_var,
    }
}

/// Noise variance used for LLR scaling when the link is noiseless.
const MIN_NOISE_VAR: f64 = 1e-12;

/// Coherent max-likelihood bit LLRs with perfect CSI:
/// `LLR = 2√2·Re/Im(conj(h)·y) / N0`.
pub fn qpsk_demodulate_soft(received: &SymbolFrame, csi: &[Complex64], noise_var: f64) -> Result<LlrFrame> {
    if csi.len() != received.symbols.len() {
        return Err(Error::domain(format!(
            "{} channel coefficients for {} symbols",
            csi.len(),
            received.symbols.len()
        )));
    }
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var.max(MIN_NOISE_VAR);
    let mut llrs = Vec::with_capacity(2 * csi.len());
    for (&y, &h) in received.symbols.iter().zip(csi) {
        let z = h.conj() * y;
        llrs.push(scale * z.re);
        llrs.push(scale * z.im);
    }
    Ok(LlrFrame { llrs })
}

/// Sign slicing: bit 0 for non-negative LLRs.
pub fn hard_decisions(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

/// Runs `bits` through modulate → channel → demodulate.
pub fn send_bits<R: Rng + ?Sized>(bits: &[u8], fading: &Fading, snr_db: f64, rng: &mut R) -> Result<LlrFrame> {
    let frame = qpsk_modulate(bits)?;
    let rx = transmit(&frame, fading, snr_db, rng);
    qpsk_demodulate_soft(&rx.symbols, &rx.csi, rx.noise_var)
}
