//! Finite-alphabet sequences, block counting, and i.i.d./Markov samplers.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;

/// Symbols are small integers `0..alphabet.size()`.
pub type Symbol = u8;

const STOCHASTIC_TOL: f64 = 1e-12;

/// A finite alphabet `{0, 1, ..., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub const MAX_SIZE: usize = 256;

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > Self::MAX_SIZE {
            return invalid(format!("alphabet size must be in 1..={}, got {size}", Self::MAX_SIZE));
        }
        Ok(Alphabet { size })
    }

    #[inline]
    pub fn size(self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(self, s: Symbol) -> bool {
        (s as usize) < self.size
    }

    /// Bits needed to store one symbol.
    pub fn bits(self) -> u32 {
        usize::BITS - (self.size - 1).leading_zeros()
    }
}

/// A finite realization over an [`Alphabet`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymbolSeq {
    alphabet: Alphabet,
    data: Vec<Symbol>,
}

impl SymbolSeq {
    pub fn new(alphabet: Alphabet, data: Vec<Symbol>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|&s| !alphabet.contains(s)) {
            return invalid(format!(
                "symbol {} at position {pos} is outside an alphabet of size {}",
                data[pos],
                alphabet.size()
            ));
        }
        Ok(SymbolSeq { alphabet, data })
    }

    /// Parses a digit string such as `"0110"` (digits, then `a..z` for 10..35).
    pub fn from_digits(alphabet: Alphabet, digits: &str) -> Result<Self> {
        let data = digits
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as Symbol)
                    .ok_or_else(|| Error::InvalidArgument(format!("not a symbol digit: {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolSeq::new(alphabet, data)
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Symbol] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.data
    }

    /// The first `n` symbols (or the whole sequence when shorter).
    pub fn prefix(&self, n: usize) -> SymbolSeq {
        SymbolSeq {
            alphabet: self.alphabet,
            data: self.data[..n.min(self.data.len())].to_vec(),
        }
    }

    /// Newline-free digit string, used for debugging dumps.
    pub fn to_digit_string(&self) -> String {
        self.data
            .iter()
            .map(|&s| char::from_digit(u32::from(s), 36).unwrap_or('?'))
            .collect()
    }
}

impl fmt::Debug for SymbolSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet.size() <= 36 {
            write!(f, "SymbolSeq({})", self.to_digit_string())
        } else {
            f.debug_tuple("SymbolSeq").field(&self.data).finish()
        }
    }
}

fn check_probability_vector(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Validation(format!("{what} is empty")));
    }
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Validation(format!("{what} has invalid entry {v}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::Validation(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Inverse-CDF draw; the last symbol absorbs round-off in the final bin.
#[inline]
fn draw(cdf: &[f64], u: f64) -> Symbol {
    let idx = cdf.partition_point(|&c| c <= u);
    idx.min(cdf.len() - 1) as Symbol
}

/// A Bernoulli (i.i.d.) source.
#[derive(Debug, Clone, PartialEq)]
pub struct IidSource {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl IidSource {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probability_vector(&probs, "probability vector")?;
        Alphabet::new(probs.len())?;
        let cdf = cumulative(&probs);
        Ok(IidSource { probs, cdf })
    }

    /// The uniform source on `size` symbols.
    pub fn uniform(size: usize) -> Result<Self> {
        IidSource::new(vec![1.0 / size as f64; size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet { size: self.probs.len() }
    }

    /// The equivalent Markov chain whose rows all equal `probs`.
    pub fn to_markov(&self) -> MarkovSource {
        let rows: Vec<Vec<f64>> = vec![self.probs.clone(); self.probs.len()];
        MarkovSource::new(
            Matrix::from_rows(&rows).expect("square by construction"),
            self.probs.clone(),
        )
        .expect("valid by construction")
    }
}

/// A finite-state Markov source: transition matrix and initial distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    transition: Matrix,
    initial: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
    initial_cdf: Vec<f64>,
}

impl MarkovSource {
    pub fn new(transition: Matrix, initial: Vec<f64>) -> Result<Self> {
        check_stochastic(&transition)?;
        if initial.len() != transition.dim() {
            return Err(Error::Validation(format!(
                "initial distribution has {} entries for a {}-state chain",
                initial.len(),
                transition.dim()
            )));
        }
        check_probability_vector(&initial, "initial distribution")?;
        Alphabet::new(transition.dim())?;
        let row_cdfs = transition.rows().map(cumulative).collect();
        let initial_cdf = cumulative(&initial);
        Ok(MarkovSource {
            transition,
            initial,
            row_cdfs,
            initial_cdf,
        })
    }

    /// A chain started from its stationary distribution.
    pub fn stationary(transition: Matrix) -> Result<Self> {
        check_stochastic(&transition)?;
        let mu = stationary_distribution(&transition)?;
        MarkovSource::new(transition, mu)
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet {
            size: self.transition.dim(),
        }
    }
}

/// Rejects matrices that are not row-stochastic within `1e-12`.
pub fn check_stochastic(p: &Matrix) -> Result<()> {
    for (i, row) in p.rows().enumerate() {
        check_probability_vector(row, &format!("transition row {i}"))?;
    }
    Ok(())
}

/// Either kind of source, as consumed by the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Iid(IidSource),
    Markov(MarkovSource),
}

impl Source {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            Source::Iid(s) => s.alphabet(),
            Source::Markov(s) => s.alphabet(),
        }
    }

    /// Draws `n` symbols using the stream seeded by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SymbolSeq> {
        if n == 0 {
            return invalid("sample length must be at least 1");
        }
        let mut rng = rng_from_seed(seed);
        Ok(self.sample_with(n, &mut rng))
    }

    /// Inverse-CDF sampling, one uniform draw per symbol.
    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> SymbolSeq {
        let mut data = Vec::with_capacity(n);
        match self {
            Source::Iid(s) => {
                data.extend((0..n).map(|_| draw(&s.cdf, rng.random::<f64>())));
            }
            Source::Markov(s) => {
                if n > 0 {
                    let mut cur = draw(&s.initial_cdf, rng.random::<f64>());
                    data.push(cur);
                    for _ in 1..n {
                        cur = draw(&s.row_cdfs[cur as usize], rng.random::<f64>());
                        data.push(cur);
                    }
                }
            }
        }
        SymbolSeq {
            alphabet: self.alphabet(),
            data,
        }
    }
}

impl From<IidSource> for Source {
    fn from(s: IidSource) -> Self {
        Source::Iid(s)
    }
}

impl From<MarkovSource> for Source {
    fn from(s: MarkovSource) -> Self {
        Source::Markov(s)
    }
}

/// A length-`k` block, stored as its symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block(pub Box<[Symbol]>);

impl Block {
    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

fn check_block_len(seq: &SymbolSeq, k: usize) -> Result<()> {
    if k == 0 || k > seq.len() {
        return invalid(format!(
            "block length {k} out of range 1..={} for this sequence",
            seq.len()
        ));
    }
    Ok(())
}

/// Occurrence counts of every overlapping length-`k` window.
pub fn block_counts(seq: &SymbolSeq, k: usize) -> Result<HashMap<Block, usize>> {
    check_block_len(seq, k)?;
    let mut counts = HashMap::new();
    for w in seq.as_slice().windows(k) {
        *counts.entry(Block(w.into())).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Sorted multiplicities of the overlapping `k`-blocks.
///
/// Blocks are packed into `u128` codes when they fit, which is the case for
/// every block length the entropy estimators use on small alphabets.
pub(crate) fn block_multiplicities(seq: &SymbolSeq, k: usize) -> Result<Vec<u64>> {
    check_block_len(seq, k)?;
    let bits = seq.alphabet().bits().max(1) as usize;
    if bits * k <= 128 {
        let mask: u128 = if bits * k == 128 {
            u128::MAX
        } else {
            (1u128 << (bits * k)) - 1
        };
        let data = seq.as_slice();
        let mut code: u128 = 0;
        for &s in &data[..k - 1] {
            code = (code << bits) | u128::from(s);
        }
        let mut codes = Vec::with_capacity(data.len() - k + 1);
        for &s in &data[k - 1..] {
            code = ((code << bits) | u128::from(s)) & mask;
            codes.push(code);
        }
        codes.sort_unstable();
        Ok(run_lengths(&codes))
    } else {
        let mut windows: Vec<&[Symbol]> = seq.as_slice().windows(k).collect();
        windows.sort_unstable();
        Ok(run_lengths(&windows))
    }
}

fn run_lengths<T: PartialEq>(sorted: &[T]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push((j - i) as u64);
        i = j;
    }
    out
}

/// Plug-in collision probability `sum_C (N_C / M)^2` over the `M`
/// overlapping `k`-windows.
pub fn collision_probability(seq: &SymbolSeq, k: usize) -> Result<f64> {
    Ok(collision_with_support(seq, k)?.0)
}

/// Collision probability together with the number of distinct blocks seen.
pub(crate) fn collision_with_support(seq: &SymbolSeq, k: usize) -> Result<(f64, usize)> {
    let mult = block_multiplicities(seq, k)?;
    let total: u64 = mult.iter().sum();
    let sq: u128 = mult.iter().map(|&c| u128::from(c) * u128::from(c)).sum();
    let m = total as f64;
    Ok((sq as f64 / (m * m), mult.len()))
}

/// Stationary vector of a row-stochastic matrix by power iteration.
///
/// Iterates the lazy chain `(I + P) / 2`, which has the same stationary
/// vector and converges for every irreducible `P`. Stops once
/// `max |mu P - mu| < 1e-12`; gives up after `10^6` steps.
pub fn stationary_distribution(p: &Matrix) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 1_000_000;
    check_stochastic(p)?;
    let n = p.dim();
    let mut mu = vec![1.0 / n as f64; n];
    for _ in 0..MAX_ITER {
        let next = p.vec_mul(&mu);
        let resid = next.iter().zip(&mu).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if resid < TOL {
            let s: f64 = next.iter().sum();
            return Ok(next.into_iter().map(|v| v / s).collect());
        }
        let s: f64 = next.iter().zip(&mu).map(|(a, b)| 0.5 * (a + b)).sum();
        mu = next.iter().zip(&mu).map(|(a, b)| 0.5 * (a + b) / s).collect();
    }
    Err(Error::Numerical(format!(
        "stationary distribution did not converge in {MAX_ITER} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> SymbolSeq {
        SymbolSeq::from_digits(Alphabet::new(2).unwrap(), s).unwrap()
    }

    #[test]
    fn single_symbol_source_is_constant() {
        let src = Source::Iid(IidSource::new(vec![1.0]).unwrap());
        for seed in [0, 1, u64::MAX] {
            assert_eq!(src.sample(5, seed).unwrap().to_digit_string(), "00000");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let src = Source::Iid(IidSource::uniform(3).unwrap());
        assert_eq!(src.sample(1000, 42).unwrap(), src.sample(1000, 42).unwrap());
        assert_ne!(src.sample(1000, 42).unwrap(), src.sample(1000, 43).unwrap());
    }

    #[test]
    fn fair_coin_frequency() {
        // 3 sigma of Binomial(10^6, 1/2) frequency is 3 * 0.5 / 1000 = 0.0015.
        let src = Source::Iid(IidSource::uniform(2).unwrap());
        let s = src.sample(1_000_000, 9).unwrap();
        let zeros = s.as_slice().iter().filter(|&&v| v == 0).count() as f64 / 1e6;
        assert!((zeros - 0.5).abs() < 0.002, "{zeros}");
    }

    #[test]
    fn rejects_non_stochastic() {
        assert!(IidSource::new(vec![0.5, 0.6]).is_err());
        assert!(IidSource::new(vec![-0.1, 1.1]).is_err());
        let p = Matrix::from_rows(&[[0.5, 0.4], [0.5, 0.5]]).unwrap();
        assert!(matches!(
            MarkovSource::new(p, vec![0.5, 0.5]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn zero_length_sample_is_rejected() {
        let src = Source::Iid(IidSource::uniform(2).unwrap());
        assert!(src.sample(0, 1).is_err());
    }

    #[test]
    fn block_count_examples() {
        let c = block_counts(&bin("0101"), 2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[&Block(vec![0, 1].into())], 2);
        assert_eq!(c[&Block(vec![1, 0].into())], 1);

        let c = block_counts(&bin("0000"), 1).unwrap();
        assert_eq!(c[&Block(vec![0].into())], 4);

        let s = Source::Iid(IidSource::uniform(2).unwrap()).sample(100, 3).unwrap();
        assert_eq!(block_counts(&s, 3).unwrap().values().sum::<usize>(), 98);

        assert!(block_counts(&bin("01"), 0).is_err());
        assert!(block_counts(&bin("01"), 3).is_err());
    }

    #[test]
    fn collision_examples() {
        assert_eq!(collision_probability(&bin("0000"), 1).unwrap(), 1.0);
        assert_eq!(collision_probability(&bin("0000"), 3).unwrap(), 1.0);
        assert_eq!(collision_probability(&bin("01"), 1).unwrap(), 0.5);
        let c = collision_probability(&bin("0101"), 2).unwrap();
        assert!((c - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn wide_blocks_fall_back_to_slices() {
        // 200 symbols of a 3-letter alphabet take 400 bits, beyond u128 packing.
        let a = Alphabet::new(3).unwrap();
        let data: Vec<u8> = (0..400).map(|i| (i % 3) as u8).collect();
        let s = SymbolSeq::new(a, data).unwrap();
        let c = collision_probability(&s, 200).unwrap();
        // Period 3: the 201 windows fall into 3 classes of sizes 67 each.
        assert!((c - 3.0 * (67.0f64 / 201.0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn stationary_examples() {
        let p = Matrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        let mu = stationary_distribution(&p).unwrap();
        assert!((mu[0] - 0.5).abs() < 1e-12 && (mu[1] - 0.5).abs() < 1e-12);

        let p = Matrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(stationary_distribution(&p).unwrap(), vec![1.0]);

        // Balance: 0.1 mu0 = 0.3 mu1 with mu0 + mu1 = 1.
        let p = Matrix::from_rows(&[[0.9, 0.1], [0.3, 0.7]]).unwrap();
        let mu = stationary_distribution(&p).unwrap();
        assert!((mu[0] - 0.75).abs() < 1e-10 && (mu[1] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn periodic_chain_still_converges() {
        let p = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let mu = stationary_distribution(&p).unwrap();
        assert!((mu[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn alphabet_bits() {
        assert_eq!(Alphabet::new(1).unwrap().bits(), 0);
        assert_eq!(Alphabet::new(2).unwrap().bits(), 1);
        assert_eq!(Alphabet::new(5).unwrap().bits(), 3);
        assert_eq!(Alphabet::new(256).unwrap().bits(), 8);
        assert!(Alphabet::new(0).is_err());
        assert!(Alphabet::new(257).is_err());
    }

    #[test]
    fn digit_round_trip() {
        let a = Alphabet::new(12).unwrap();
        let s = SymbolSeq::from_digits(a, "09ab").unwrap();
        assert_eq!(s.as_slice(), &[0, 9, 10, 11]);
        assert_eq!(s.to_digit_string(), "09ab");
        assert!(SymbolSeq::from_digits(a, "0c").is_err());
    }
}
