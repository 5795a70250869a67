use super::{check_pair, MatchResult, Witness};
use crate::encoders::Weights;
use crate::error::{invalid, Result};
use crate::symbolic::SymbolSeq;

/// `V_n(x, y)`: the largest total weight `sum v(z_j)` of a string `z` that
/// occurs in both `x[..n]` and `y[..n]`.
///
/// Quadratic dynamic program over the match-suffix table, carrying the
/// accumulated weight alongside the suffix length. Weights are positive, so
/// within one diagonal run the score only grows and the optimum is always a
/// maximal common suffix.
pub fn highest_score(x: &SymbolSeq, y: &SymbolSeq, n: usize, weights: &Weights) -> Result<MatchResult> {
    check_pair(x, y)?;
    weights.check_covers(x.alphabet())?;
    if n == 0 || n > x.len() || n > y.len() {
        return invalid(format!(
            "n = {n} out of range for sequences of lengths {} and {}",
            x.len(),
            y.len()
        ));
    }
    let w = weights.as_slice();
    let (xs, ys) = (&x.as_slice()[..n], &y.as_slice()[..n]);
    let mut prev = vec![(0usize, 0usize); n + 1];
    let mut cur = vec![(0usize, 0usize); n + 1];
    let mut best = MatchResult::NONE;
    for (i, &a) in xs.iter().enumerate() {
        for (j, &b) in ys.iter().enumerate() {
            cur[j + 1] = if a == b {
                let (len, score) = prev[j];
                (len + 1, score + w[a as usize] as usize)
            } else {
                (0, 0)
            };
            let (len, score) = cur[j + 1];
            if len == 0 || score < best.value {
                continue;
            }
            let cand = Witness {
                x_start: i + 1 - len,
                y_start: j + 1 - len,
                len,
            };
            let better = match best.witness {
                _ if score > best.value => true,
                Some(bw) => (cand.x_start, cand.y_start) < (bw.x_start, bw.y_start),
                None => true,
            };
            if better {
                best = MatchResult {
                    value: score,
                    witness: Some(cand),
                };
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoders::{Encoder, StretchEncoder};
    use crate::matching::{encoded_prefix_lcs, lcs_oracle};
    use crate::symbolic::Alphabet;
    use proptest::prelude::*;

    fn seq(s: &str) -> SymbolSeq {
        SymbolSeq::from_digits(Alphabet::new(2).unwrap(), s).unwrap()
    }

    /// Scores every common substring directly.
    fn brute_force_score(x: &[u8], y: &[u8], w: &[u32]) -> usize {
        let mut best = 0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                let mut k = 0;
                let mut score = 0;
                while i + k < x.len() && j + k < y.len() && x[i + k] == y[j + k] {
                    score += w[x[i + k] as usize] as usize;
                    k += 1;
                    best = best.max(score);
                }
            }
        }
        best
    }

    #[test]
    fn lighter_long_match_loses_to_heavy_short_one() {
        // a=0 (v=1), b=1 (v=2): x=ab, y=ba. Candidates "a" (1) and "b" (2).
        let w = Weights::new(vec![1, 2]).unwrap();
        let r = highest_score(&seq("01"), &seq("10"), 2, &w).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(
            r.witness,
            Some(Witness {
                x_start: 1,
                y_start: 0,
                len: 1
            })
        );
    }

    #[test]
    fn unit_weights_reduce_to_lcs() {
        let x = seq("0110100110");
        let y = seq("1101001011");
        let r = highest_score(&x, &y, 10, &Weights::unit(2)).unwrap();
        assert_eq!(r, lcs_oracle(&x, &y).unwrap());
    }

    #[test]
    fn self_match_scores_everything() {
        let x = seq("0110100");
        let w = Weights::new(vec![3, 5]).unwrap();
        let total: usize = x.as_slice()[..6].iter().map(|&s| [3, 5][s as usize]).sum();
        assert_eq!(highest_score(&x, &x, 6, &w).unwrap().value, total);
    }

    #[test]
    fn argument_errors() {
        let w = Weights::new(vec![1]).unwrap();
        assert!(highest_score(&seq("01"), &seq("10"), 2, &w).is_err());
        let w = Weights::unit(2);
        assert!(highest_score(&seq("01"), &seq("10"), 3, &w).is_err());
        assert!(highest_score(&seq("01"), &seq("10"), 0, &w).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            x in proptest::collection::vec(0u8..3, 1..40),
            y in proptest::collection::vec(0u8..3, 1..40),
            w in proptest::collection::vec(1u32..5, 3),
        ) {
            let a = Alphabet::new(3).unwrap();
            let n = x.len().min(y.len());
            let xs = SymbolSeq::new(a, x.clone()).unwrap();
            let ys = SymbolSeq::new(a, y.clone()).unwrap();
            let r = highest_score(&xs, &ys, n, &Weights::new(w.clone()).unwrap()).unwrap();
            prop_assert_eq!(r.value, brute_force_score(&x[..n], &y[..n], &w));
            prop_assert!(r.value <= n * *w.iter().max().unwrap() as usize);
            if let Some(wit) = r.witness {
                prop_assert_eq!(&x[wit.x_start..wit.x_start + wit.len], &y[wit.y_start..wit.y_start + wit.len]);
            }
        }

        #[test]
        fn symmetric(
            x in proptest::collection::vec(0u8..2, 1..60),
            y in proptest::collection::vec(0u8..2, 1..60),
        ) {
            let a = Alphabet::new(2).unwrap();
            let n = x.len().min(y.len());
            let xs = SymbolSeq::new(a, x).unwrap();
            let ys = SymbolSeq::new(a, y).unwrap();
            let w = Weights::new(vec![1, 3]).unwrap();
            prop_assert_eq!(
                highest_score(&xs, &ys, n, &w).unwrap().value,
                highest_score(&ys, &xs, n, &w).unwrap().value
            );
        }

        #[test]
        fn stretched_prefixes_score_exactly(
            x in proptest::collection::vec(0u8..3, 1..50),
            y in proptest::collection::vec(0u8..3, 1..50),
            w in proptest::collection::vec(1u32..5, 3),
        ) {
            let a = Alphabet::new(3).unwrap();
            let n = x.len().min(y.len());
            let xs = SymbolSeq::new(a, x).unwrap();
            let ys = SymbolSeq::new(a, y).unwrap();
            let weights = Weights::new(w).unwrap();
            let v = highest_score(&xs, &ys, n, &weights).unwrap().value;
            let enc = Encoder::Stretch(StretchEncoder::new(weights));
            let m = encoded_prefix_lcs(&xs, &ys, &enc, n).unwrap().value;
            prop_assert_eq!(m, v);
        }
    }
}
