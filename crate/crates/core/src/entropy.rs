//! Order-2 Rényi entropies: closed forms for i.i.d., Markov, zero-inflated
//! and stretched (scrabble) sources, plug-in empirical estimates, and the
//! Perron-root solver they rest on.
//!
//! All entropies are in nats.

use std::collections::HashMap;

use crate::encoders::{apply_mask, Weights};
use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::symbolic::{check_stochastic, collision_with_support, Source, SymbolSeq};

/// Convergence tolerance for the Perron roots behind the closed forms.
pub const EIGEN_TOL: f64 = 1e-13;

/// Agreement required between the two scrabble solvers.
pub const SCRABBLE_AGREEMENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    /// `-log(collision) / k` over `k`-blocks.
    Empirical,
    /// `-log(C_{k+1} / C_k)`, the per-symbol decay of the block collision
    /// probability.
    BlockIncrement,
}

/// A Rényi entropy value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Entropy in nats.
    pub value: f64,
    /// Block length, for empirical estimates.
    pub k: Option<usize>,
    /// The collision probability the value was derived from.
    pub collision: f64,
    /// Distinct blocks observed, for empirical estimates.
    pub distinct_blocks: Option<usize>,
    pub method: Method,
}

/// The expanded chain of a stretched Markov source and its collision rate.
#[derive(Debug, Clone)]
pub struct ScrabbleSpectrum {
    /// Transition matrix of the encoded chain on `sum v(i)` states.
    pub qstar: Matrix,
    /// Perron root of the entrywise square of `qstar`.
    pub p_eigen: f64,
    /// Largest root of `det([p_ij^2] - diag(lambda^v(i))) = 0`.
    pub p_root: f64,
    pub expanded_size: usize,
}

impl ScrabbleSpectrum {
    /// `-log p`, using the eigenvalue route.
    pub fn entropy(&self) -> f64 {
        -self.p_eigen.ln()
    }
}

/// Perron root of a nonnegative matrix.
///
/// Power iteration on the shifted matrix `M + sI`, which is primitive
/// whenever `M` is irreducible, so periodic matrices converge too. Each step
/// brackets the root between the smallest and largest componentwise ratios
/// `(Mx)_i / x_i` (Collatz–Wielandt); iteration stops once the bracket is
/// narrower than `tol`.
pub fn dominant_eigenvalue(m: &Matrix, tol: f64) -> Result<f64> {
    const MAX_ITER: usize = 1_000_000;
    if !m.is_nonnegative() {
        return invalid("Perron root requested for a matrix with negative entries");
    }
    let n = m.dim();
    let scale = m.rows().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let shift = 0.25 * scale;
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..MAX_ITER {
        let mut y = m.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Numerical(
                "power iteration lost positivity; is the matrix irreducible?".into(),
            ));
        }
        if hi - lo < tol {
            return Ok((0.5 * (lo + hi) - shift).max(0.0));
        }
        let s: f64 = y.iter().sum();
        x = y.into_iter().map(|v| v / s).collect();
    }
    Err(Error::Numerical(format!(
        "Perron root did not converge to {tol:e} within {MAX_ITER} iterations"
    )))
}

/// `-log sum p_i^2`.
pub fn renyi2_iid(probs: &[f64]) -> f64 {
    let c: f64 = probs.iter().map(|p| p * p).sum();
    -c.ln()
}

/// `-log p` with `p` the Perron root of `[p_ij^2]`. Independent of the
/// initial distribution.
pub fn renyi2_markov(p: &Matrix) -> Result<f64> {
    check_stochastic(p)?;
    Ok(-dominant_eigenvalue(&p.entrywise_square(), EIGEN_TOL)?.ln())
}

/// `(1 - epsilon) H_2(P)` for an i.i.d. source under a fixed typical mask.
pub fn renyi2_zero_inflated(probs: &[f64], epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("epsilon must lie in [0, 1], got {epsilon}"));
    }
    Ok((1.0 - epsilon) * renyi2_iid(probs))
}

/// Collision entropy of the zero-inflated process with the mask averaged out:
/// the encoded symbols are i.i.d. with `q_0 = epsilon + (1 - epsilon) p_0` and
/// `q_a = (1 - epsilon) p_a` otherwise.
pub fn renyi2_zero_inflated_annealed(probs: &[f64], epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("epsilon must lie in [0, 1], got {epsilon}"));
    }
    let q: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(a, &p)| {
            if a == 0 {
                epsilon + (1.0 - epsilon) * p
            } else {
                (1.0 - epsilon) * p
            }
        })
        .collect();
    Ok(renyi2_iid(&q))
}

/// Exact collision probability of the first `mask.len()` encoded symbols for
/// a fixed mask: unmasked positions contribute `sum p_i^2`, masked ones 1.
pub fn zero_inflation_quenched_collision(probs: &[f64], mask: &[bool]) -> f64 {
    let c: f64 = probs.iter().map(|p| p * p).sum();
    mask.iter().filter(|&&b| b).fold(1.0, |acc, _| acc * c)
}

/// Monte Carlo estimate of the fixed-mask collision probability of the block
/// `f_xi(x)_0^{k-1}`, from `draws` independent realizations of the source.
pub fn zero_inflation_quenched_empirical(
    source: &Source,
    mask: &[bool],
    draws: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    let k = mask.len();
    if k == 0 || draws < 2 {
        return invalid("quenched estimate needs a nonempty mask and at least two draws");
    }
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    for _ in 0..draws {
        let x = source.sample_with(k, &mut rng);
        let fx = apply_mask(mask, &x, k)?;
        *counts.entry(fx.into_vec()).or_insert(0) += 1;
    }
    let m = draws as f64;
    let collision: f64 = counts.values().map(|&c| (c as f64 / m).powi(2)).sum();
    Ok(EntropyEstimate {
        value: -collision.ln() / k as f64,
        k: Some(k),
        collision,
        distinct_blocks: Some(counts.len()),
        method: Method::Empirical,
    })
}

/// Transition matrix of the stretched chain.
///
/// States are ordered `0_1 .. 0_{v(0)}, 1_1 .. 1_{v(1)}, ...`. Within a
/// symbol's block the chain moves deterministically `i_l -> i_{l+1}`; from
/// the last copy `i_{v(i)}` it jumps to `j_1` with probability `P_ij`.
pub fn build_qstar(p: &Matrix, weights: &Weights) -> Result<Matrix> {
    check_stochastic(p)?;
    let d = p.dim();
    if weights.len() < d {
        return invalid(format!(
            "missing weight for symbol {} of a {d}-state chain",
            weights.len()
        ));
    }
    let w = &weights.as_slice()[..d];
    let offsets: Vec<usize> = w
        .iter()
        .scan(0usize, |acc, &v| {
            let o = *acc;
            *acc += v as usize;
            Some(o)
        })
        .collect();
    let size: usize = w.iter().map(|&v| v as usize).sum();
    let mut q = Matrix::zeros(size);
    for i in 0..d {
        let vi = w[i] as usize;
        for l in 0..vi - 1 {
            q[(offsets[i] + l, offsets[i] + l + 1)] = 1.0;
        }
        let last = offsets[i] + vi - 1;
        for j in 0..d {
            q[(last, offsets[j])] = p[(i, j)];
        }
    }
    Ok(q)
}

/// `det([p_ij^2] - diag(lambda^v(i)))`.
fn scrabble_determinant(p_sq: &Matrix, weights: &[u32], lambda: f64) -> f64 {
    let mut m = p_sq.clone();
    for (i, &v) in weights.iter().enumerate() {
        m[(i, i)] -= lambda.powi(v as i32);
    }
    m.determinant()
}

/// Largest root in `(0, 1]` of the scrabble determinant.
///
/// Above the Perron-type root the matrix `diag(lambda^v) - [p_ij^2]` is a
/// nonsingular M-matrix, so the determinant has the sign `(-1)^d` on `(p, 1]`.
/// A downward scan finds the first sign change, which bisection then refines.
fn largest_scrabble_root(p_sq: &Matrix, weights: &[u32]) -> Result<f64> {
    const LO: f64 = 1e-9;
    const HI: f64 = 1.0 - 1e-9;
    const GRID: usize = 8192;
    let g = |lambda: f64| scrabble_determinant(p_sq, weights, lambda);
    if g(1.0).abs() <= 1e-13 {
        return Ok(1.0);
    }
    let upper_sign = if p_sq.dim().is_multiple_of(2) { 1.0 } else { -1.0 };
    if g(HI) * upper_sign <= 0.0 {
        return Err(Error::Numerical(
            "scrabble determinant has the wrong sign just below 1".into(),
        ));
    }
    let step = (HI - LO) / GRID as f64;
    let mut above = HI;
    let mut changes = 0usize;
    let mut bracket = None;
    let mut prev_sign = upper_sign;
    for k in 1..=GRID {
        let lambda = HI - step * k as f64;
        let v = g(lambda);
        let s = if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        };
        if s != prev_sign {
            changes += 1;
            if bracket.is_none() {
                bracket = Some((lambda, above));
            }
            prev_sign = s;
        }
        above = lambda;
    }
    log::debug!("scrabble determinant: {changes} sign changes on (0, 1)");
    let (mut lo, mut hi) =
        bracket.ok_or_else(|| Error::Numerical("scrabble determinant has no root in (0, 1)".into()))?;
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) * upper_sign > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Collision rate of a stretched Markov source, by two independent routes.
pub fn renyi2_scrabble(p: &Matrix, weights: &Weights) -> Result<ScrabbleSpectrum> {
    if weights.gcd() != 1 {
        log::warn!(
            "weights {:?} have gcd {}; the stretched chain is periodic",
            weights.as_slice(),
            weights.gcd()
        );
    }
    let qstar = build_qstar(p, weights)?;
    let p_eigen = dominant_eigenvalue(&qstar.entrywise_square(), EIGEN_TOL)?;
    let p_root = largest_scrabble_root(&p.entrywise_square(), &weights.as_slice()[..p.dim()])?;
    if (p_eigen - p_root).abs() > SCRABBLE_AGREEMENT {
        return Err(Error::Consistency(format!(
            "scrabble eigenvalue {p_eigen} and determinant root {p_root} disagree"
        )));
    }
    Ok(ScrabbleSpectrum {
        expanded_size: qstar.dim(),
        qstar,
        p_eigen,
        p_root,
    })
}

/// Plug-in estimate `-log(sum_C (N_C / M)^2) / k` over overlapping `k`-blocks.
pub fn renyi2_empirical(seq: &SymbolSeq, k: usize) -> Result<EntropyEstimate> {
    let blocks = (seq.alphabet().size() as f64).powi(k as i32);
    if (seq.len() as f64) < 100.0 * blocks {
        log::warn!(
            "block length {k} is undersampled: {} symbols for {blocks} possible blocks",
            seq.len()
        );
    }
    plug_in(seq, k)
}

fn plug_in(seq: &SymbolSeq, k: usize) -> Result<EntropyEstimate> {
    let (collision, distinct) = collision_with_support(seq, k)?;
    Ok(EntropyEstimate {
        value: -collision.ln() / k as f64,
        k: Some(k),
        collision,
        distinct_blocks: Some(distinct),
        method: Method::Empirical,
    })
}

/// Empirical estimate at the plateau block length.
///
/// Evaluates `k = 2 ..= floor(log n / log |alphabet|) - 2` and returns the
/// estimate at the `k` minimizing `|H(k+1) - H(k)|` (smallest such `k` on
/// ties).
pub fn renyi2_plateau(seq: &SymbolSeq) -> Result<EntropyEstimate> {
    let sigma = seq.alphabet().size();
    if sigma == 1 {
        return plug_in(seq, 1);
    }
    let k_max = ((seq.len() as f64).ln() / (sigma as f64).ln()).floor() as i64 - 2;
    if k_max < 2 {
        return invalid(format!(
            "sequence of length {} is too short for plateau selection",
            seq.len()
        ));
    }
    let k_max = k_max as usize;
    let estimates = (2..=k_max + 1).map(|k| plug_in(seq, k)).collect::<Result<Vec<_>>>()?;
    let best = estimates
        .windows(2)
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a[1].value - a[0].value)
                .abs()
                .total_cmp(&(b[1].value - b[0].value).abs())
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(estimates[best])
}

/// `-log(C_{k+1} / C_k)` from plug-in collision probabilities at two
/// consecutive block lengths.
///
/// For a Markov source `C_k` behaves like `c p^k`, so the plain estimate
/// `-log(C_k) / k` carries a `-log(c) / k` bias that decays slowly; the ratio
/// cancels the constant.
pub fn renyi2_increment(seq: &SymbolSeq, k: usize) -> Result<EntropyEstimate> {
    if k == 0 {
        return invalid("block length must be positive");
    }
    let (c_k, _) = collision_with_support(seq, k)?;
    let (c_next, distinct) = collision_with_support(seq, k + 1)?;
    Ok(EntropyEstimate {
        value: (c_k / c_next).ln().max(0.0),
        k: Some(k),
        collision: c_next / c_k,
        distinct_blocks: Some(distinct),
        method: Method::BlockIncrement,
    })
}

/// Closed-form estimate wrapper.
pub fn closed_form(value: f64) -> EntropyEstimate {
    EntropyEstimate {
        value,
        k: None,
        collision: (-value).exp(),
        distinct_blocks: None,
        method: Method::ClosedForm,
    }
}
