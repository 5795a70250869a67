//! Longest common substring, its encoded variant, and the highest-scoring
//! common substring.
//!
//! Each statistic has an exact quadratic reference ([`lcs_oracle`],
//! [`highest_score`]) and the longest-match statistic also has a linear-time
//! path built on a [`SuffixAutomaton`] ([`lcs_fast`]). Ties between optimal
//! matches are broken by the smallest start in `x`, then the smallest start in
//! `y`, so both paths report the same witness.

mod automaton;
mod oracle;
mod score;

pub use automaton::SuffixAutomaton;
pub use oracle::lcs_oracle;
pub use score::highest_score;

use crate::encoders::Encoder;
use crate::error::{invalid, Result};
use crate::symbolic::SymbolSeq;

/// Positions realizing an optimal match: `x[x_start..x_start + len]` equals
/// `y[y_start..y_start + len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub x_start: usize,
    pub y_start: usize,
    pub len: usize,
}

/// The optimum of a matching statistic and a witness for it.
///
/// `value` is the match length for the longest-substring statistics and the
/// total weight for [`highest_score`]. `witness` is `None` when the two
/// sequences share no symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub value: usize,
    pub witness: Option<Witness>,
}

impl MatchResult {
    pub(crate) const NONE: MatchResult = MatchResult {
        value: 0,
        witness: None,
    };
}

pub(crate) fn check_pair(x: &SymbolSeq, y: &SymbolSeq) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return invalid("matching needs two nonempty sequences");
    }
    if x.alphabet() != y.alphabet() {
        return invalid(format!(
            "alphabet mismatch: {} vs {} symbols",
            x.alphabet().size(),
            y.alphabet().size()
        ));
    }
    Ok(())
}

/// Longest common substring through a suffix automaton of `x` streamed by `y`.
pub fn lcs_fast(x: &SymbolSeq, y: &SymbolSeq) -> Result<MatchResult> {
    check_pair(x, y)?;
    Ok(SuffixAutomaton::new(x).longest_common_substring(y.as_slice()))
}

/// `M_n^f(x, y)`: the longest common substring of the first `n` symbols of
/// `f(x)` and `f(y)`.
pub fn encoded_lcs(x: &SymbolSeq, y: &SymbolSeq, encoder: &Encoder, n: usize) -> Result<MatchResult> {
    let fx = encoder.encode(x, n)?;
    let fy = encoder.encode(y, n)?;
    lcs_fast(&fx, &fy)
}

/// Longest common substring of the complete images `f(x[..n])` and
/// `f(y[..n])`.
///
/// For the stretch encoder this is the quantity that coincides with the
/// highest score over the raw prefixes: maximal runs in the image always have
/// lengths divisible by the weight of their symbol, so an optimal encoded
/// match decodes to a raw match of equal score.
pub fn encoded_prefix_lcs(x: &SymbolSeq, y: &SymbolSeq, encoder: &Encoder, n: usize) -> Result<MatchResult> {
    if n == 0 || n > x.len() || n > y.len() {
        return invalid(format!(
            "prefix length {n} out of range for sequences of lengths {} and {}",
            x.len(),
            y.len()
        ));
    }
    let (fx, fy) = match encoder {
        Encoder::Stretch(st) => (st.stretch(&x.prefix(n))?, st.stretch(&y.prefix(n))?),
        _ => (encoder.encode(x, n)?, encoder.encode(y, n)?),
    };
    lcs_fast(&fx, &fy)
}
