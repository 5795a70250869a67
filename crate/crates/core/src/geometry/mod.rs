//! Shortest distance between two orbits and correlation sums.
//!
//! The distance search buckets one orbit into a uniform grid and probes the
//! neighbouring cells of each point of the other. A pair found closer than
//! the cell width is certified: every pair at least as close lies in
//! neighbouring cells too, so the grid result equals the quadratic reference
//! bit for bit, witness included. Ties are resolved towards the smallest
//! `(i, j)`.

mod correlation;
mod grid;

pub use correlation::{correlation_dimension, correlation_sum, correlation_sums, default_radius_window, DimensionFit};

use std::collections::HashMap;

use crate::dynamics::{Orbit, Space};
use crate::error::{invalid, Result};
use grid::{bounding_box, Grid};

/// `m_n` together with the pair `(i, j)` realizing it:
/// `distance = d(a[i], b[j])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closest {
    pub distance: f64,
    pub i: usize,
    pub j: usize,
}

impl Closest {
    #[inline]
    fn improves_on(&self, other: &Option<Closest>) -> bool {
        match other {
            None => true,
            Some(o) => self.distance < o.distance || (self.distance == o.distance && (self.i, self.j) < (o.i, o.j)),
        }
    }
}

/// `m_n` along an increasing schedule of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub schedule: Vec<usize>,
    pub m_values: Vec<f64>,
    pub witnesses: Vec<(usize, usize)>,
}

fn check_inputs(a: &Orbit, b: &Orbit, n: usize) -> Result<()> {
    if a.space() != b.space() {
        return invalid(format!(
            "orbits live in different spaces: {:?} and {:?}",
            a.space(),
            b.space()
        ));
    }
    if n == 0 || n > a.len() || n > b.len() {
        return invalid(format!("n = {n} exceeds the orbit lengths {} and {}", a.len(), b.len()));
    }
    Ok(())
}

/// `m_n = min_{i, j < n} d(a_i, b_j)` by exhaustive comparison.
pub fn shortest_distance(a: &Orbit, b: &Orbit, n: usize) -> Result<Closest> {
    check_inputs(a, b, n)?;
    Ok(naive(a.space(), &a.raw()[..n], &b.raw()[..n]))
}

fn naive(space: Space, a: &[[f64; 2]], b: &[[f64; 2]]) -> Closest {
    let mut best = Closest {
        distance: f64::INFINITY,
        i: 0,
        j: 0,
    };
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = space.metric(p, q);
            if d < best.distance {
                best = Closest { distance: d, i, j };
            }
        }
    }
    best
}

/// Key identifying points at distance zero: equal coordinates, with `-0.0`
/// folded into `0.0`.
#[inline]
fn exact_key(p: &[f64; 2]) -> [u64; 2] {
    [(p[0] + 0.0).to_bits(), (p[1] + 0.0).to_bits()]
}

/// The lexicographically smallest pair at distance zero, if any.
fn zero_pair(a: &[[f64; 2]], b: &[[f64; 2]]) -> Option<Closest> {
    let mut first_in_b: HashMap<[u64; 2], usize> = HashMap::with_capacity(b.len());
    for (j, q) in b.iter().enumerate() {
        first_in_b.entry(exact_key(q)).or_insert(j);
    }
    a.iter()
        .enumerate()
        .find_map(|(i, p)| first_in_b.get(&exact_key(p)).map(|&j| Closest { distance: 0.0, i, j }))
}

fn cells_per_dim(space: Space, n: usize) -> usize {
    ((n as f64).powf(1.0 / space.dim() as f64).floor() as usize).max(1)
}

/// Same value and witness as [`shortest_distance`], in expected near-linear
/// time for orbits without heavy clustering.
///
/// The grid starts with about one point of `a` per cell. When no pair within
/// the certified radius turns up, the cell width is doubled and the search
/// repeated; once the grid gets too coarse it falls back to the exhaustive
/// search.
pub fn shortest_distance_fast(a: &Orbit, b: &Orbit, n: usize) -> Result<Closest> {
    check_inputs(a, b, n)?;
    let space = a.space();
    let (pa, pb) = (&a.raw()[..n], &b.raw()[..n]);
    if let Some(z) = zero_pair(pa, pb) {
        return Ok(z);
    }
    let bbox = bounding_box(&[pa, pb]);
    let mut k = cells_per_dim(space, n);
    while Grid::supports(space, k) && k > 1 {
        let g = Grid::build(space, pa, k, bbox);
        let mut best: Option<Closest> = None;
        for (j, q) in pb.iter().enumerate() {
            g.for_each_near(q, u32::MAX, |i| {
                let c = Closest {
                    distance: space.metric(&pa[i as usize], q),
                    i: i as usize,
                    j,
                };
                if c.improves_on(&best) {
                    best = Some(c);
                }
            });
        }
        if let Some(c) = best {
            if c.distance <= g.safe_radius() {
                return Ok(c);
            }
        }
        k /= 2;
    }
    Ok(naive(space, pa, pb))
}

/// `m_n` at every `n` of an increasing schedule.
///
/// Points are added one index at a time: the new point of `b` is probed
/// against the grid of `a` restricted to indices already added, and vice
/// versa, so the visible minimum is maintained in one pass over the longest
/// prefix. At each scheduled `n` the visible minimum is exact whenever it is
/// certified by the grid; otherwise (typically for very small `n`) that entry
/// is recomputed with [`shortest_distance_fast`].
pub fn distance_profile(a: &Orbit, b: &Orbit, schedule: &[usize]) -> Result<DistanceProfile> {
    if schedule.is_empty() {
        return invalid("schedule is empty");
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("schedule must be strictly increasing");
    }
    let n_max = *schedule.last().unwrap();
    check_inputs(a, b, n_max)?;
    check_inputs(a, b, schedule[0])?;
    let space = a.space();
    let (pa, pb) = (&a.raw()[..n_max], &b.raw()[..n_max]);

    // Once a zero-distance pair is present every later value is zero; the
    // exact-key pass then gives the witness directly and avoids scanning
    // degenerate clusters.
    let zero_from = first_zero_prefix(pa, pb);

    let k = cells_per_dim(space, n_max);
    let grids = if Grid::supports(space, k) && k > 1 {
        let bbox = bounding_box(&[pa, pb]);
        Some((Grid::build(space, pa, k, bbox), Grid::build(space, pb, k, bbox)))
    } else {
        None
    };

    let mut profile = DistanceProfile {
        schedule: schedule.to_vec(),
        m_values: Vec::with_capacity(schedule.len()),
        witnesses: Vec::with_capacity(schedule.len()),
    };
    let mut best: Option<Closest> = None;
    let mut next = 0;
    let incremental_end = zero_from.map_or(n_max, |z| z.min(n_max));
    for t in 0..n_max {
        if let (Some((ga, gb)), true) = (&grids, t < incremental_end) {
            let limit = t as u32;
            ga.for_each_near(&pb[t], limit, |i| {
                let c = Closest {
                    distance: space.metric(&pa[i as usize], &pb[t]),
                    i: i as usize,
                    j: t,
                };
                if c.improves_on(&best) {
                    best = Some(c);
                }
            });
            gb.for_each_near(&pa[t], limit, |j| {
                if j as usize == t {
                    return;
                }
                let c = Closest {
                    distance: space.metric(&pa[t], &pb[j as usize]),
                    i: t,
                    j: j as usize,
                };
                if c.improves_on(&best) {
                    best = Some(c);
                }
            });
        }
        let n = t + 1;
        if schedule[next] != n {
            continue;
        }
        let exact = match (best, &grids) {
            _ if zero_from.is_some_and(|z| n >= z) => zero_pair(&pa[..n], &pb[..n]).expect("zero pair present"),
            (Some(c), Some((ga, _))) if c.distance <= ga.safe_radius() => c,
            _ => shortest_distance_fast(a, b, n)?,
        };
        profile.m_values.push(exact.distance);
        profile.witnesses.push((exact.i, exact.j));
        next += 1;
        if next == schedule.len() {
            break;
        }
    }
    Ok(profile)
}

/// Smallest `n` such that the first `n` points of `a` and `b` contain a pair
/// at distance zero.
fn first_zero_prefix(a: &[[f64; 2]], b: &[[f64; 2]]) -> Option<usize> {
    let mut first_in_a: HashMap<[u64; 2], usize> = HashMap::new();
    for (i, p) in a.iter().enumerate() {
        first_in_a.entry(exact_key(p)).or_insert(i);
    }
    b.iter()
        .enumerate()
        .filter_map(|(j, q)| first_in_a.get(&exact_key(q)).map(|&i| i.max(j) + 1))
        .min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{iterate_seeded, observe, MapSpec, Observation, Point, Start};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_orbit(space: Space, n: usize, rng: &mut impl Rng) -> Orbit {
        let pts = (0..n)
            .map(|_| {
                let c: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
                Point::new(space, &c).unwrap()
            })
            .collect();
        Orbit::new(pts).unwrap()
    }

    #[test]
    fn identical_orbits_give_zero() {
        let mut rng = rng_from_seed(1);
        let a = random_orbit(Space::Torus(1), 100, &mut rng);
        let r = shortest_distance(&a, &a, 100).unwrap();
        assert_eq!(
            r,
            Closest {
                distance: 0.0,
                i: 0,
                j: 0
            }
        );
        assert_eq!(shortest_distance_fast(&a, &a, 100).unwrap(), r);
    }

    #[test]
    fn wrap_example() {
        let a = Orbit::from_values(Space::Torus(1), &[0.1]).unwrap();
        let b = Orbit::from_values(Space::Torus(1), &[0.9]).unwrap();
        let r = shortest_distance(&a, &b, 1).unwrap();
        assert!((r.distance - 0.2).abs() < 1e-15);
        assert_eq!(shortest_distance_fast(&a, &b, 1).unwrap(), r);
        assert!(shortest_distance(&a, &b, 2).is_err());
    }

    #[test]
    fn separated_orbits() {
        let mut rng = rng_from_seed(2);
        let a: Vec<Point> = (0..500)
            .map(|_| Point::torus2(rng.random::<f64>() * 0.1, rng.random::<f64>() * 0.1).unwrap())
            .collect();
        let b: Vec<Point> = a
            .iter()
            .map(|p| Point::torus2(p.coords()[0] + 0.4, p.coords()[1] + 0.4).unwrap())
            .collect();
        let (a, b) = (Orbit::new(a).unwrap(), Orbit::new(b).unwrap());
        let slow = shortest_distance(&a, &b, 500).unwrap();
        let fast = shortest_distance_fast(&a, &b, 500).unwrap();
        assert_eq!(slow, fast);
        assert!(slow.distance > 0.3 - 1e-12);
    }

    #[test]
    fn collapse_gives_zero_for_every_n() {
        let t2 = MapSpec::times(2).unwrap();
        let f = Observation::collapse(0.0, 0.5, 0.25).unwrap();
        let a = observe(
            &f,
            &iterate_seeded(&t2, Start::At(Point::circle(0.1).unwrap()), 1000, 1).unwrap(),
        )
        .unwrap();
        let b = observe(
            &f,
            &iterate_seeded(&t2, Start::At(Point::circle(0.3).unwrap()), 1000, 2).unwrap(),
        )
        .unwrap();
        let prof = distance_profile(&a, &b, &[1, 2, 4, 64, 1000]).unwrap();
        assert!(prof.m_values.iter().all(|&m| m == 0.0));
        for n in [1, 7, 1000] {
            assert_eq!(
                shortest_distance_fast(&a, &b, n).unwrap(),
                shortest_distance(&a, &b, n).unwrap()
            );
        }
    }

    #[test]
    fn randomized_exactness() {
        let mut rng = rng_from_seed(77);
        for case in 0..300 {
            let space = if case % 2 == 0 {
                Space::Torus(1)
            } else {
                Space::Torus(2)
            };
            let n = rng.random_range(1..=2048);
            let a = random_orbit(space, n, &mut rng);
            let b = random_orbit(space, n, &mut rng);
            let m = rng.random_range(1..=n);
            assert_eq!(
                shortest_distance_fast(&a, &b, m).unwrap(),
                shortest_distance(&a, &b, m).unwrap()
            );
        }
    }

    #[test]
    fn euclidean_observations_agree() {
        let mut rng = rng_from_seed(8);
        let f = Observation::affine(vec![vec![3.0, -1.0], vec![0.5, 2.0]], vec![1.0, -2.0]).unwrap();
        for _ in 0..30 {
            let a = observe(&f, &random_orbit(Space::Torus(2), 700, &mut rng)).unwrap();
            let b = observe(&f, &random_orbit(Space::Torus(2), 700, &mut rng)).unwrap();
            assert_eq!(
                shortest_distance_fast(&a, &b, 700).unwrap(),
                shortest_distance(&a, &b, 700).unwrap()
            );
        }
        // Degenerate extent along one axis.
        let g = Observation::affine(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0]).unwrap();
        let a = observe(&g, &random_orbit(Space::Torus(2), 300, &mut rng)).unwrap();
        let b = observe(&g, &random_orbit(Space::Torus(2), 300, &mut rng)).unwrap();
        assert_eq!(
            shortest_distance_fast(&a, &b, 300).unwrap(),
            shortest_distance(&a, &b, 300).unwrap()
        );
    }

    #[test]
    fn clustered_orbits_fall_back_correctly() {
        let mut rng = rng_from_seed(9);
        // Two tight clusters far apart: the first grid certifies nothing.
        let a: Vec<f64> = (0..400).map(|_| 0.1 + rng.random::<f64>() * 1e-3).collect();
        let b: Vec<f64> = (0..400).map(|_| 0.6 + rng.random::<f64>() * 1e-3).collect();
        let a = Orbit::from_values(Space::Torus(1), &a).unwrap();
        let b = Orbit::from_values(Space::Torus(1), &b).unwrap();
        assert_eq!(
            shortest_distance_fast(&a, &b, 400).unwrap(),
            shortest_distance(&a, &b, 400).unwrap()
        );
        let prof = distance_profile(&a, &b, &[1, 10, 100, 400]).unwrap();
        for (k, &n) in prof.schedule.iter().enumerate() {
            let s = shortest_distance(&a, &b, n).unwrap();
            assert_eq!((prof.m_values[k], prof.witnesses[k]), (s.distance, (s.i, s.j)));
        }
    }

    #[test]
    fn profile_matches_direct_computation() {
        let mut rng = rng_from_seed(10);
        for space in [Space::Torus(1), Space::Torus(2)] {
            for _ in 0..10 {
                let a = random_orbit(space, 3000, &mut rng);
                let b = random_orbit(space, 3000, &mut rng);
                let schedule = [1, 2, 3, 5, 16, 100, 512, 1024, 2047, 3000];
                let prof = distance_profile(&a, &b, &schedule).unwrap();
                for (k, &n) in schedule.iter().enumerate() {
                    let s = shortest_distance(&a, &b, n).unwrap();
                    assert_eq!(prof.m_values[k], s.distance);
                    assert_eq!(prof.witnesses[k], (s.i, s.j));
                }
            }
        }
    }

    #[test]
    fn profile_on_identical_orbits() {
        let mut rng = rng_from_seed(4);
        let a = random_orbit(Space::Torus(1), 10, &mut rng);
        let p = distance_profile(&a, &a, &[1, 2, 4]).unwrap();
        assert_eq!(p.m_values, vec![0.0, 0.0, 0.0]);
        assert!(distance_profile(&a, &a, &[2, 2]).is_err());
        assert!(distance_profile(&a, &a, &[]).is_err());
        assert!(distance_profile(&a, &a, &[4, 11]).is_err());
    }

    #[test]
    fn dynamical_orbits_certify() {
        let t2 = MapSpec::times(2).unwrap();
        let a = iterate_seeded(&t2, Start::Uniform, 1 << 14, 1).unwrap();
        let b = iterate_seeded(&t2, Start::Uniform, 1 << 14, 2).unwrap();
        let fast = shortest_distance_fast(&a, &b, 1 << 14).unwrap();
        let p = distance_profile(&a, &b, &[1 << 12, 1 << 13, 1 << 14]).unwrap();
        assert_eq!(p.m_values[2], fast.distance);
        assert_eq!(fast, shortest_distance(&a, &b, 1 << 14).unwrap());
    }

    proptest! {
        #[test]
        fn profile_is_nonincreasing_and_witnessed(seed in 0u64..1000, n in 2usize..400) {
            let mut rng = rng_from_seed(seed);
            let a = random_orbit(Space::Torus(1), n, &mut rng);
            let b = random_orbit(Space::Torus(1), n, &mut rng);
            let schedule: Vec<usize> = (0..).map(|e| 1usize << e).take_while(|&s| s <= n).collect();
            let p = distance_profile(&a, &b, &schedule).unwrap();
            for w in p.m_values.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            for (k, &(i, j)) in p.witnesses.iter().enumerate() {
                let d = crate::dynamics::torus_distance(&a.point(i), &b.point(j)).unwrap();
                prop_assert_eq!(d, p.m_values[k]);
                prop_assert!(i < p.schedule[k] && j < p.schedule[k]);
            }
        }
    }
}
