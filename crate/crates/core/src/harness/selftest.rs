//! Release gate: fast paths against their oracles and closed forms against
//! independent solvers.

use rand::Rng;
use rayon::prelude::*;

use crate::dynamics::{Orbit, Point, Space};
use crate::encoders::{Encoder, StretchEncoder, Weights};
use crate::entropy::{renyi2_iid, renyi2_markov, renyi2_scrabble, renyi2_zero_inflated, SCRABBLE_AGREEMENT};
use crate::error::Result;
use crate::geometry::{shortest_distance, shortest_distance_fast};
use crate::linalg::Matrix;
use crate::matching::{encoded_prefix_lcs, highest_score, lcs_fast, lcs_oracle, MatchResult};
use crate::rng::{derive_seed, rng_from_seed};
use crate::symbolic::{Alphabet, SymbolSeq};

const SELFTEST_SEED: u64 = 0x5e1f_7e57;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Case counts for each suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestSize {
    pub lcs_pairs: usize,
    pub score_pairs: usize,
    pub distance_pairs: usize,
    pub scrabble_specs: usize,
}

impl SelftestSize {
    pub const FULL: SelftestSize = SelftestSize {
        lcs_pairs: 10_000,
        score_pairs: 2_000,
        distance_pairs: 1_000,
        scrabble_specs: 100,
    };
    pub const QUICK: SelftestSize = SelftestSize {
        lcs_pairs: 500,
        score_pairs: 200,
        distance_pairs: 50,
        scrabble_specs: 20,
    };
}

/// Full-size self test of the shipped implementations.
pub fn selftest() -> SelftestReport {
    selftest_with(lcs_fast, SelftestSize::FULL)
}

/// Self test with a substitute longest-common-substring routine, used to
/// confirm that a broken implementation is caught.
pub fn selftest_with<F>(lcs: F, size: SelftestSize) -> SelftestReport
where
    F: Fn(&SymbolSeq, &SymbolSeq) -> Result<MatchResult> + Sync,
{
    SelftestReport {
        checks: vec![
            lcs_suite(&lcs, size.lcs_pairs),
            score_suite(size.score_pairs),
            distance_suite(size.distance_pairs),
            rank_one_suite(),
            zero_inflation_suite(),
            scrabble_suite(size.scrabble_specs),
        ],
    }
}

fn random_seq(rng: &mut impl Rng, alphabet: Alphabet, len: usize) -> SymbolSeq {
    let data = (0..len).map(|_| rng.random_range(0..alphabet.size() as u8)).collect();
    SymbolSeq::new(alphabet, data).expect("symbols drawn from the alphabet")
}

fn first_failure<T: Send>(cases: usize, f: impl Fn(usize) -> Option<T> + Sync) -> (usize, Option<T>) {
    let failures: Vec<(usize, T)> = (0..cases)
        .into_par_iter()
        .filter_map(|i| f(i).map(|t| (i, t)))
        .collect();
    let count = failures.len();
    (count, failures.into_iter().next().map(|(_, t)| t))
}

/// Lengths up to 200 over alphabets of 2 to 8 symbols.
fn lcs_suite<F>(lcs: &F, cases: usize) -> Check
where
    F: Fn(&SymbolSeq, &SymbolSeq) -> Result<MatchResult> + Sync,
{
    let (bad, example) = first_failure(cases, |i| {
        let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[1, i as u64]));
        let a = Alphabet::new(rng.random_range(2..=8)).unwrap();
        let len_x = rng.random_range(1..=200);
        let x = random_seq(&mut rng, a, len_x);
        let len_y = rng.random_range(1..=200);
        let y = random_seq(&mut rng, a, len_y);
        let want = lcs_oracle(&x, &y).ok()?;
        match lcs(&x, &y) {
            Ok(got) if got == want => None,
            other => Some(format!(
                "x={} y={} got {other:?}, oracle {want:?}",
                x.to_digit_string(),
                y.to_digit_string()
            )),
        }
    });
    Check {
        name: "lcs_oracle",
        pass: bad == 0,
        detail: match example {
            None => format!("{cases} random pairs agree with the quadratic oracle"),
            Some(e) => format!("{bad} of {cases} pairs disagree, first: {e}"),
        },
    }
}

/// Highest score equals the longest match of the stretched full prefixes.
fn score_suite(cases: usize) -> Check {
    let (bad, example) = first_failure(cases, |i| {
        let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[2, i as u64]));
        let d = rng.random_range(2..=4);
        let a = Alphabet::new(d).unwrap();
        let w = Weights::new((0..d).map(|_| rng.random_range(1..=4)).collect()).unwrap();
        let n = rng.random_range(1..=60);
        let x = random_seq(&mut rng, a, n);
        let y = random_seq(&mut rng, a, n);
        let enc = Encoder::Stretch(StretchEncoder::new(w.clone()));
        let v = highest_score(&x, &y, n, &w).ok()?.value;
        let m = encoded_prefix_lcs(&x, &y, &enc, n).ok()?.value;
        (v != m).then(|| format!("weights {:?}: V = {v}, stretched match = {m}", w.as_slice()))
    });
    Check {
        name: "score_stretch",
        pass: bad == 0,
        detail: match example {
            None => format!("{cases} weighted pairs agree with the stretched match"),
            Some(e) => format!("{bad} of {cases} pairs disagree, first: {e}"),
        },
    }
}

/// Grid search against pair enumeration on T^1 and T^2, `n` up to 2048.
fn distance_suite(cases: usize) -> Check {
    let (bad, example) = first_failure(cases, |i| {
        let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[3, i as u64]));
        let space = if i % 2 == 0 { Space::Torus(1) } else { Space::Torus(2) };
        let n = rng.random_range(1..=2048);
        let mut orbit = || {
            let pts = (0..n)
                .map(|_| {
                    let c: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
                    Point::new(space, &c).unwrap()
                })
                .collect();
            Orbit::new(pts).unwrap()
        };
        let a = orbit();
        let b = orbit();
        let want = shortest_distance(&a, &b, n).ok()?;
        let got = shortest_distance_fast(&a, &b, n).ok()?;
        (got.distance != want.distance).then(|| format!("n = {n}: fast {} vs naive {}", got.distance, want.distance))
    });
    Check {
        name: "distance_oracle",
        pass: bad == 0,
        detail: match example {
            None => format!("{cases} random orbit pairs agree with pair enumeration"),
            Some(e) => format!("{bad} of {cases} pairs disagree, first: {e}"),
        },
    }
}

fn random_stochastic(rng: &mut impl Rng, d: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|_| {
            let r: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

/// A Markov chain whose rows are all equal is i.i.d.
fn rank_one_suite() -> Check {
    let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[4]));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let row = random_stochastic(&mut rng, d).row(0).to_vec();
        let p = Matrix::from_rows(&vec![row.clone(); d]).unwrap();
        let diff = match renyi2_markov(&p) {
            Ok(h) => (h - renyi2_iid(&row)).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(diff);
    }
    Check {
        name: "rank_one_markov",
        pass: worst < 1e-9,
        detail: format!("max |H_markov - H_iid| over 100 rank-one chains = {worst:.2e}"),
    }
}

fn zero_inflation_suite() -> Check {
    let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[5]));
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let probs = random_stochastic(&mut rng, d).row(0).to_vec();
        let eps = rng.random_range(0.0..0.95);
        let diff = match renyi2_zero_inflated(&probs, eps) {
            Ok(h) => (h - (1.0 - eps) * renyi2_iid(&probs)).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(diff);
    }
    Check {
        name: "zero_inflation_closed_form",
        pass: worst < 1e-12,
        detail: format!("max deviation from (1 - eps) H_2 = {worst:.2e}"),
    }
}

/// 2 to 4 symbols, weights at most 4 with gcd 1.
fn scrabble_suite(specs: usize) -> Check {
    let mut rng = rng_from_seed(derive_seed(SELFTEST_SEED, &[6]));
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < specs {
        let d = rng.random_range(2..=4);
        let Ok(w) = Weights::new((0..d).map(|_| rng.random_range(1..=4)).collect()) else {
            continue;
        };
        if w.gcd() != 1 {
            continue;
        }
        let p = random_stochastic(&mut rng, d);
        let diff = match renyi2_scrabble(&p, &w) {
            Ok(s) => (s.p_eigen - s.p_root).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(diff);
        done += 1;
    }
    Check {
        name: "scrabble_eigen_vs_root",
        pass: worst < SCRABBLE_AGREEMENT,
        detail: format!("max |p_eigen - p_root| over {specs} specs = {worst:.2e}"),
    }
}
