use super::{check_pair, MatchResult, Witness};
use crate::error::Result;
use crate::symbolic::SymbolSeq;

/// Exact longest common substring by the match-suffix table.
///
/// `L[i][j]` is the length of the longest common suffix of `x[..=i]` and
/// `y[..=j]`; the answer is its maximum. Runs in `O(|x| |y|)` time with one
/// rolling row.
pub fn lcs_oracle(x: &SymbolSeq, y: &SymbolSeq) -> Result<MatchResult> {
    check_pair(x, y)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let mut prev = vec![0usize; ys.len() + 1];
    let mut cur = vec![0usize; ys.len() + 1];
    let mut best = MatchResult::NONE;
    for (i, &a) in xs.iter().enumerate() {
        for (j, &b) in ys.iter().enumerate() {
            cur[j + 1] = if a == b { prev[j] + 1 } else { 0 };
            let len = cur[j + 1];
            if len > 0 && len >= best.value {
                let cand = Witness {
                    x_start: i + 1 - len,
                    y_start: j + 1 - len,
                    len,
                };
                let better = match best.witness {
                    _ if len > best.value => true,
                    Some(w) => (cand.x_start, cand.y_start) < (w.x_start, w.y_start),
                    None => true,
                };
                if better {
                    best = MatchResult {
                        value: len,
                        witness: Some(cand),
                    };
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(best)
}
