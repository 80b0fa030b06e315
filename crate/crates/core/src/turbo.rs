//! Rate-1/3 parallel concatenated convolutional (turbo) code.
//!
//! Two identical recursive systematic convolutional (RSC) encoders: the first
//! sees the information bits in natural order and is terminated back to the
//! zero state, the second sees them through a pseudorandom interleaver and is
//! left open. A coded block of `K` information bits with encoder memory `m`
//! is laid out on the wire as
//!
//! ```text
//! systematic[0..K] ‖ parity1[0..K] ‖ parity2[0..K] ‖ u_1 p_1 u_2 p_2 … u_m p_m
//! ```
//!
//! where `(u_j, p_j)` are the first encoder's termination input and parity.
//! Decoding is iterative BCJR (log-MAP or max-log-MAP) with extrinsic
//! exchange. LLRs are `ln P(0)/P(1)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

pub const MIN_BLOCK_LENGTH: usize = 40;

/// Channel LLRs are clipped to this magnitude before decoding.
const LLR_CLIP: f64 = 200.0;
const NEG: f64 = -1e30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecoderKind {
    #[default]
    LogMap,
    MaxLogMap,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::LogMap => "log_map",
            DecoderKind::MaxLogMap => "max_log_map",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log_map" | "log-map" => Ok(DecoderKind::LogMap),
            "max_log_map" | "max-log-map" => Ok(DecoderKind::MaxLogMap),
            other => Err(Error::Config(format!("unknown turbo decoder {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TurboConfig {
    /// Information bits per block.
    pub block_length: usize,
    /// Feedback polynomial, octal digits read as in `0o13` (MSB is the D⁰ tap).
    pub feedback: u32,
    /// Feedforward (parity) polynomial in the same convention.
    pub feedforward: u32,
    pub interleaver_seed: u64,
    pub iterations: u32,
    pub decoder: DecoderKind,
}

impl Default for TurboConfig {
    fn default() -> Self {
        TurboConfig {
            block_length: 1024,
            feedback: 0o13,
            feedforward: 0o15,
            interleaver_seed: 0x7ea1_5eed,
            iterations: 8,
            decoder: DecoderKind::LogMap,
        }
    }
}

impl TurboConfig {
    pub fn validate(&self) -> Result<()> {
        if self.block_length < MIN_BLOCK_LENGTH {
            return Err(Error::domain(format!(
                "turbo block length {} below minimum {MIN_BLOCK_LENGTH}",
                self.block_length
            )));
        }
        if self.iterations == 0 {
            return Err(Error::domain("turbo decoding needs at least one iteration"));
        }
        Trellis::new(self.feedback, self.feedforward).map(|_| ())
    }
}

/// RSC state machine tables. State bit `k-1` holds the register cell `s_k`
/// (delay `D^k`).
#[derive(Clone, Debug)]
struct Trellis {
    memory: usize,
    n_states: usize,
    /// `next[s][u]`
    next: Vec<[usize; 2]>,
    /// `parity[s][u]`
    parity: Vec<[u8; 2]>,
    /// Input that drives the feedback bit to zero from `s`.
    term_input: Vec<u8>,
}

impl Trellis {
    fn new(feedback: u32, feedforward: u32) -> Result<Self> {
        let degree = |p: u32| 31 - p.leading_zeros() as usize;
        if feedback == 0 || feedforward == 0 {
            return Err(Error::domain("RSC polynomials must be non-zero"));
        }
        let memory = degree(feedback.max(feedforward));
        if memory == 0 || memory > 8 {
            return Err(Error::domain(format!("unsupported RSC memory {memory}")));
        }
        let coef = |p: u32, k: usize| ((p >> (memory - k)) & 1) as u8;
        if coef(feedback, 0) != 1 {
            return Err(Error::domain(format!(
                "feedback polynomial {feedback:o} lacks the D^0 tap"
            )));
        }
        let n_states = 1 << memory;
        let mut next = Vec::with_capacity(n_states);
        let mut parity = Vec::with_capacity(n_states);
        let mut term_input = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let cell = |k: usize| ((s >> (k - 1)) & 1) as u8;
            let fb: u8 = (1..=memory).map(|k| coef(feedback, k) & cell(k)).fold(0, |a, b| a ^ b);
            let ff: u8 = (1..=memory).map(|k| coef(feedforward, k) & cell(k)).fold(0, |a, b| a ^ b);
            let mut nx = [0; 2];
            let mut px = [0; 2];
            for u in 0..2u8 {
                let a = u ^ fb;
                px[u as usize] = (coef(feedforward, 0) & a) ^ ff;
                nx[u as usize] = ((s << 1) | a as usize) & (n_states - 1);
            }
            next.push(nx);
            parity.push(px);
            term_input.push(fb);
        }
        Ok(Trellis {
            memory,
            n_states,
            next,
            parity,
            term_input,
        })
    }

    /// Encodes from the zero state; returns parity and the final state.
    fn encode(&self, bits: &[u8]) -> (Vec<u8>, usize) {
        let mut s = 0;
        let parity = bits
            .iter()
            .map(|&u| {
                let u = (u & 1) as usize;
                let p = self.parity[s][u];
                s = self.next[s][u];
                p
            })
            .collect();
        (parity, s)
    }

    /// Tail `(u_j, p_j)` pairs returning `state` to zero.
    fn terminate(&self, mut state: usize) -> Vec<(u8, u8)> {
        (0..self.memory)
            .map(|_| {
                let u = self.term_input[state];
                let p = self.parity[state][u as usize];
                state = self.next[state][u as usize];
                (u, p)
            })
            .collect()
    }
}

/// Pseudorandom permutation: `interleave(x)[i] = x[perm[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Interleaver { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len(), "interleaver length mismatch");
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.perm.len(), "interleaver length mismatch");
        let mut out = vec![T::default(); y.len()];
        for (&p, &v) in self.perm.iter().zip(y) {
            out[p] = v;
        }
        out
    }
}

/// Convenience wrappers with a throwaway permutation.
pub fn interleave<T: Copy>(x: &[T], seed: u64) -> Vec<T> {
    Interleaver::new(x.len(), seed).interleave(x)
}

pub fn deinterleave<T: Copy + Default>(y: &[T], seed: u64) -> Vec<T> {
    Interleaver::new(y.len(), seed).deinterleave(y)
}

/// Encoder output for one block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedFrame {
    pub systematic: Vec<u8>,
    pub parity1: Vec<u8>,
    pub parity2: Vec<u8>,
    /// First encoder's termination, interleaved as `u_1 p_1 u_2 p_2 …`.
    pub tail: Vec<u8>,
}

impl CodedFrame {
    pub fn len(&self) -> usize {
        self.systematic.len() + self.parity1.len() + self.parity2.len() + self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Serializes in wire order.
    pub fn to_bits(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.systematic);
        out.extend_from_slice(&self.parity1);
        out.extend_from_slice(&self.parity2);
        out.extend_from_slice(&self.tail);
        out
    }
}

/// Immutable encoder/decoder pair for one [`TurboConfig`].
#[derive(Clone, Debug)]
pub struct TurboCodec {
    cfg: TurboConfig,
    trellis: Trellis,
    interleaver: Interleaver,
}

impl TurboCodec {
    pub fn new(cfg: TurboConfig) -> Result<Self> {
        cfg.validate()?;
        let trellis = Trellis::new(cfg.feedback, cfg.feedforward)?;
        let interleaver = Interleaver::new(cfg.block_length, cfg.interleaver_seed);
        Ok(TurboCodec {
            cfg,
            trellis,
            interleaver,
        })
    }

    pub fn config(&self) -> &TurboConfig {
        &self.cfg
    }

    /// Number of coded bits per block, `3K + 2m`.
    pub fn coded_len(&self) -> usize {
        3 * self.cfg.block_length + 2 * self.trellis.memory
    }

    /// Information bits per transmitted bit.
    pub fn rate(&self) -> f64 {
        self.cfg.block_length as f64 / self.coded_len() as f64
    }

    pub fn encode(&self, info: &[u8]) -> Result<CodedFrame> {
        if info.len() != self.cfg.block_length {
            return Err(Error::domain(format!(
                "turbo block expects {} bits, got {}",
                self.cfg.block_length,
                info.len()
            )));
        }
        let systematic: Vec<u8> = info.iter().map(|b| b & 1).collect();
        let (parity1, end) = self.trellis.encode(&systematic);
        let tail = self
            .trellis
            .terminate(end)
            .into_iter()
            .flat_map(|(u, p)| [u, p])
            .collect();
        let (parity2, _) = self.trellis.encode(&self.interleaver.interleave(&systematic));
        Ok(CodedFrame {
            systematic,
            parity1,
            parity2,
            tail,
        })
    }

    /// Hard decisions after the configured number of iterations.
    pub fn decode(&self, llrs: &[f64]) -> Result<Vec<u8>> {
        let mut trace = self.decode_trace(llrs)?;
        Ok(trace.pop().expect("at least one iteration"))
    }

    /// Hard decisions after each iteration.
    pub fn decode_trace(&self, llrs: &[f64]) -> Result<Vec<Vec<u8>>> {
        if llrs.len() != self.coded_len() {
            return Err(Error::domain(format!(
                "turbo decoder expects {} LLRs, got {}",
                self.coded_len(),
                llrs.len()
            )));
        }
        match self.cfg.decoder {
            DecoderKind::LogMap => Ok(self.iterate::<LogMap>(llrs)),
            DecoderKind::MaxLogMap => Ok(self.iterate::<MaxLog>(llrs)),
        }
    }

    fn iterate<M: MaxStar>(&self, llrs: &[f64]) -> Vec<Vec<u8>> {
        let k = self.cfg.block_length;
        let m = self.trellis.memory;
        let clip = |l: &f64| l.clamp(-LLR_CLIP, LLR_CLIP);
        let sys: Vec<f64> = llrs[..k].iter().map(clip).collect();
        let par1: Vec<f64> = llrs[k..2 * k].iter().map(clip).collect();
        let par2: Vec<f64> = llrs[2 * k..3 * k].iter().map(clip).collect();
        let tail: Vec<f64> = llrs[3 * k..].iter().map(clip).collect();

        // Decoder 1 runs over K + m steps including the termination tail.
        let mut sys1 = sys.clone();
        let mut par1_ext = par1;
        for j in 0..m {
            sys1.push(tail[2 * j]);
            par1_ext.push(tail[2 * j + 1]);
        }
        let sys2 = self.interleaver.interleave(&sys);

        let mut bcjr = Bcjr::new(self.trellis.n_states, k + m);
        let mut apriori1 = vec![0.0; k + m];
        let mut trace = Vec::with_capacity(self.cfg.iterations as usize);
        for _ in 0..self.cfg.iterations {
            let ext1 = bcjr.run::<M>(&self.trellis, &sys1, &par1_ext, &apriori1, true);
            let apriori2 = self.interleaver.interleave(&ext1[..k]);
            let ext2 = bcjr.run::<M>(&self.trellis, &sys2, &par2, &apriori2, false);
            let ext2 = self.interleaver.deinterleave(&ext2);
            let decisions = (0..k)
                .map(|i| u8::from(sys[i] + ext1[i] + ext2[i] < 0.0))
                .collect();
            trace.push(decisions);
            apriori1[..k].copy_from_slice(&ext2);
        }
        trace
    }
}

trait MaxStar {
    fn op(a: f64, b: f64) -> f64;
}

struct LogMap;
struct MaxLog;

impl MaxStar for LogMap {
    #[inline(always)]
    fn op(a: f64, b: f64) -> f64 {
        let (hi, d) = if a > b { (a, a - b) } else { (b, b - a) };
        // ln(1 + e^-d) < 1e-15 beyond this.
        if d > 35.0 {
            hi
        } else {
            hi + (-d).exp().ln_1p()
        }
    }
}

impl MaxStar for MaxLog {
    #[inline(always)]
    fn op(a: f64, b: f64) -> f64 {
        a.max(b)
    }
}

/// Scratch buffers for one soft-in soft-out constituent decoder.
struct Bcjr {
    n_states: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Bcjr {
    fn new(n_states: usize, max_len: usize) -> Self {
        Bcjr {
            n_states,
            alpha: vec![NEG; (max_len + 1) * n_states],
            beta: vec![NEG; (max_len + 1) * n_states],
        }
    }

    /// Returns extrinsic LLRs for every trellis step.
    fn run<M: MaxStar>(
        &mut self,
        t: &Trellis,
        sys: &[f64],
        par: &[f64],
        apriori: &[f64],
        terminated: bool,
    ) -> Vec<f64> {
        let n = sys.len();
        let ns = self.n_states;
        // gamma(u, p) = ±a ± b with a = (La + Ls)/2, b = Lp/2; + for bit 0.
        let half: Vec<(f64, f64)> = (0..n)
            .map(|i| (0.5 * (apriori[i] + sys[i]), 0.5 * par[i]))
            .collect();
        let gamma = |i: usize, u: usize, p: u8| {
            let (a, b) = half[i];
            let a = if u == 0 { a } else { -a };
            if p == 0 {
                a + b
            } else {
                a - b
            }
        };

        let alpha = &mut self.alpha[..(n + 1) * ns];
        alpha.fill(NEG);
        alpha[0] = 0.0;
        for i in 0..n {
            let (cur, nxt) = alpha[i * ns..(i + 2) * ns].split_at_mut(ns);
            nxt.fill(NEG);
            for s in 0..ns {
                let a = cur[s];
                if a <= NEG {
                    continue;
                }
                for u in 0..2 {
                    let s2 = t.next[s][u];
                    nxt[s2] = M::op(nxt[s2], a + gamma(i, u, t.parity[s][u]));
                }
            }
            let norm = nxt.iter().cloned().fold(NEG, f64::max);
            nxt.iter_mut().for_each(|x| *x -= norm);
        }

        let beta = &mut self.beta[..(n + 1) * ns];
        let end = &mut beta[n * ns..];
        if terminated {
            end.fill(NEG);
            end[0] = 0.0;
        } else {
            end.fill(0.0);
        }
        for i in (0..n).rev() {
            let (cur, nxt) = beta[i * ns..(i + 2) * ns].split_at_mut(ns);
            for s in 0..ns {
                let mut acc = NEG;
                for u in 0..2 {
                    acc = M::op(acc, nxt[t.next[s][u]] + gamma(i, u, t.parity[s][u]));
                }
                cur[s] = acc;
            }
            let norm = cur.iter().cloned().fold(NEG, f64::max);
            cur.iter_mut().for_each(|x| *x -= norm);
        }

        (0..n)
            .map(|i| {
                let mut l = [NEG; 2];
                for s in 0..ns {
                    let a = alpha[i * ns + s];
                    if a <= NEG {
                        continue;
                    }
                    for (u, lu) in l.iter_mut().enumerate() {
                        let s2 = t.next[s][u];
                        *lu = M::op(*lu, a + gamma(i, u, t.parity[s][u]) + beta[(i + 1) * ns + s2]);
                    }
                }
                l[0] - l[1] - apriori[i] - sys[i]
            })
            .collect()
    }
}
