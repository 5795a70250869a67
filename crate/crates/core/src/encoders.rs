//! Symbolic encoders applied to sequences before matching.
//!
//! Three encoders are provided:
//!
//! - [`Encoder::Identity`] leaves the sequence unchanged.
//! - [`Encoder::ZeroInflation`] multiplies each symbol by a Bernoulli mask bit
//!   `xi_i` with `P(xi_i = 1) = 1 - epsilon`, so masked positions read `0`.
//! - [`Encoder::Stretch`] repeats each input symbol `a` exactly `v(a)` times.
//!
//! Every encoder also reports its *block span*: how many input symbols are
//! needed to determine `n` output symbols.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;
use crate::symbolic::{Alphabet, Symbol, SymbolSeq};

/// Positive integer weights `v(a)`, indexed by symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weights(Vec<u32>);

impl Weights {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("weights must cover at least one symbol");
        }
        if let Some(pos) = weights.iter().position(|&w| w == 0) {
            return invalid(format!("weight of symbol {pos} must be positive"));
        }
        Ok(Weights(weights))
    }

    pub fn unit(size: usize) -> Self {
        Weights(vec![1; size.max(1)])
    }

    #[inline]
    pub fn get(&self, s: Symbol) -> Option<u32> {
        self.0.get(s as usize).copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(1)
    }

    pub fn max(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(1)
    }

    pub fn gcd(&self) -> u32 {
        self.0.iter().copied().fold(0, gcd)
    }

    /// Errors unless every symbol of `alphabet` has a weight.
    pub fn check_covers(&self, alphabet: Alphabet) -> Result<()> {
        if self.0.len() < alphabet.size() {
            return invalid(format!(
                "missing weight for symbol {} (weights cover {} of {} symbols)",
                self.0.len(),
                self.0.len(),
                alphabet.size()
            ));
        }
        Ok(())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zero-inflation with noise level `epsilon`; the mask stream is a pure
/// function of `mask_seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroInflation {
    epsilon: f64,
    mask_seed: u64,
}

impl ZeroInflation {
    pub fn new(epsilon: f64, mask_seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        Ok(ZeroInflation { epsilon, mask_seed })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mask_seed(&self) -> u64 {
        self.mask_seed
    }

    /// Same noise level, different mask stream.
    pub fn with_mask_seed(&self, mask_seed: u64) -> Self {
        ZeroInflation { mask_seed, ..*self }
    }

    /// The first `n` mask bits `xi_0 .. xi_{n-1}`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut rng = rng_from_seed(self.mask_seed);
        let keep = 1.0 - self.epsilon;
        (0..n).map(|_| rng.random::<f64>() < keep).collect()
    }
}

/// The stretch encoder: symbol `a` is emitted `v(a)` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StretchEncoder {
    weights: Weights,
}

impl StretchEncoder {
    pub fn new(weights: Weights) -> Self {
        if weights.gcd() != 1 {
            log::warn!(
                "stretch weights {:?} have gcd {} != 1; the encoded chain may be periodic",
                weights.as_slice(),
                weights.gcd()
            );
        }
        StretchEncoder { weights }
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Length of the full image of `input`.
    pub fn image_len(&self, input: &[Symbol]) -> Result<usize> {
        input
            .iter()
            .try_fold(0usize, |acc, &s| self.weight_of(s).map(|w| acc + w as usize))
    }

    fn weight_of(&self, s: Symbol) -> Result<u32> {
        self.weights
            .get(s)
            .ok_or_else(|| Error::InvalidArgument(format!("missing weight for symbol {s}")))
    }

    /// The full image of `input`, untruncated.
    pub fn stretch(&self, input: &SymbolSeq) -> Result<SymbolSeq> {
        let mut out = Vec::with_capacity(self.image_len(input.as_slice())?);
        for &s in input.as_slice() {
            let w = self.weight_of(s)?;
            out.extend(std::iter::repeat_n(s, w as usize));
        }
        SymbolSeq::new(input.alphabet(), out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Identity,
    ZeroInflation(ZeroInflation),
    Stretch(StretchEncoder),
}

impl Encoder {
    pub fn output_alphabet(&self, input: Alphabet) -> Alphabet {
        input
    }

    /// The first `n_out` symbols of the encoded image of `input`.
    pub fn encode(&self, input: &SymbolSeq, n_out: usize) -> Result<SymbolSeq> {
        let consumed = self.required_input_length(n_out, input)?;
        match self {
            Encoder::Identity => Ok(input.prefix(n_out)),
            Encoder::ZeroInflation(z) => apply_mask(&z.mask(n_out), input, n_out),
            Encoder::Stretch(st) => {
                let mut out = Vec::with_capacity(n_out);
                for &s in &input.as_slice()[..consumed] {
                    let w = st.weight_of(s)? as usize;
                    let take = w.min(n_out - out.len());
                    out.extend(std::iter::repeat_n(s, take));
                }
                SymbolSeq::new(input.alphabet(), out)
            }
        }
    }

    /// Worst-case number of input symbols that determine `n` output symbols.
    pub fn block_span(&self, n: usize) -> usize {
        match self {
            Encoder::Identity | Encoder::ZeroInflation(_) => n,
            Encoder::Stretch(st) => n.div_ceil(st.weights.min() as usize),
        }
    }

    /// The exact input prefix consumed to emit `n_out` symbols of `input`'s image.
    pub fn required_input_length(&self, n_out: usize, input: &SymbolSeq) -> Result<usize> {
        match self {
            Encoder::Identity | Encoder::ZeroInflation(_) => {
                if input.len() < n_out {
                    return Err(Error::InputExhausted {
                        required: n_out,
                        available: input.len(),
                    });
                }
                Ok(n_out)
            }
            Encoder::Stretch(st) => {
                if n_out == 0 {
                    return Ok(0);
                }
                let mut emitted = 0usize;
                for (i, &s) in input.as_slice().iter().enumerate() {
                    emitted += st.weight_of(s)? as usize;
                    if emitted >= n_out {
                        return Ok(i + 1);
                    }
                }
                // Even at maximal weight the remainder needs this many more symbols.
                let short = n_out - emitted;
                Err(Error::InputExhausted {
                    required: input.len() + short.div_ceil(st.weights.max() as usize),
                    available: input.len(),
                })
            }
        }
    }
}

/// `f_xi(z)_i = xi_i * z_i` for an explicit mask, truncated to `n_out`.
pub fn apply_mask(mask: &[bool], input: &SymbolSeq, n_out: usize) -> Result<SymbolSeq> {
    if input.len() < n_out {
        return Err(Error::InputExhausted {
            required: n_out,
            available: input.len(),
        });
    }
    if mask.len() < n_out {
        return invalid(format!("mask has {} bits, {n_out} needed", mask.len()));
    }
    let data = input.as_slice()[..n_out]
        .iter()
        .zip(mask)
        .map(|(&s, &keep)| if keep { s } else { 0 })
        .collect();
    SymbolSeq::new(input.alphabet(), data)
}
