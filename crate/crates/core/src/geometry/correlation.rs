use rayon::prelude::*;

use super::grid::{bounding_box, Grid};
use crate::dynamics::Orbit;
use crate::error::{invalid, Error, Result};
use crate::stats::{fit_slope, LinearFit};

/// Least-squares correlation dimension and what went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub fit: LinearFit,
    /// Radii with a positive correlation sum, ascending.
    pub radii: Vec<f64>,
    pub sums: Vec<f64>,
    /// Radii dropped because no pair fell inside them.
    pub excluded: Vec<f64>,
}

impl DimensionFit {
    pub fn dimension(&self) -> f64 {
        self.fit.slope
    }
}

/// `2 / (M (M - 1)) * #{i < j : d(p_i, p_j) < r}`.
pub fn correlation_sum(points: &Orbit, r: f64) -> Result<f64> {
    Ok(correlation_sums(points, &[r])?[0])
}

/// Correlation sums at several radii from a single pass over close pairs.
pub fn correlation_sums(points: &Orbit, radii: &[f64]) -> Result<Vec<f64>> {
    let m = points.len();
    if m < 2 {
        return invalid(format!("correlation sums need at least two points, got {m}"));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return invalid("radii must be positive and finite");
    }
    let space = points.space();
    let pts = points.raw();
    let total_pairs = (m as f64) * (m as f64 - 1.0) / 2.0;
    let bbox = bounding_box(&[pts]);
    let diameter = space.diameter().unwrap_or_else(|| {
        let e0 = bbox.1[0] - bbox.0[0];
        let e1 = bbox.1[1] - bbox.0[1];
        e0.hypot(e1)
    });

    let mut sorted: Vec<f64> = radii.iter().copied().filter(|&r| r <= diameter).collect();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let counts = if let Some(&r_max) = sorted.last() {
        count_close_pairs(points, &sorted, r_max, bbox)
    } else {
        Vec::new()
    };
    Ok(radii
        .iter()
        .map(|&r| {
            if r > diameter {
                1.0
            } else {
                let k = sorted.partition_point(|&s| s < r);
                counts[k] as f64 / total_pairs
            }
        })
        .collect())
}

/// For each radius in ascending `sorted`, the number of pairs `i < j` with
/// distance strictly below it.
fn count_close_pairs(points: &Orbit, sorted: &[f64], r_max: f64, bbox: ([f64; 2], [f64; 2])) -> Vec<u64> {
    let space = points.space();
    let pts = points.raw();
    let m = pts.len();
    let occupancy_cap = ((m as f64).powf(1.0 / space.dim() as f64).ceil() as usize).max(1);
    let by_radius = match space.diameter() {
        Some(_) => (1.0 / (r_max * 1.0011)).floor() as usize,
        None => {
            // The narrowest nondegenerate axis bounds the cell width.
            let extent = (0..space.dim())
                .map(|d| bbox.1[d] - bbox.0[d])
                .filter(|&e| e > 0.0)
                .fold(f64::INFINITY, f64::min);
            if extent.is_finite() {
                (extent / (r_max * 1.0011)).floor() as usize
            } else {
                1
            }
        }
    };
    let k = by_radius.min(occupancy_cap);
    let bins = sorted.len();
    let tally = |acc: &mut Vec<u64>, d: f64| {
        if d < r_max {
            // First radius strictly above d.
            let b = sorted.partition_point(|&s| s <= d);
            if b < bins {
                acc[b] += 1;
            }
        }
    };

    let hist: Vec<u64> = if Grid::supports(space, k) && k > 1 {
        let grid = Grid::build(space, pts, k, bbox);
        (0..m)
            .into_par_iter()
            .fold(
                || vec![0u64; bins],
                |mut acc, i| {
                    grid.for_each_near(&pts[i], u32::MAX, |j| {
                        if (j as usize) > i {
                            tally(&mut acc, space.metric(&pts[i], &pts[j as usize]));
                        }
                    });
                    acc
                },
            )
            .reduce(|| vec![0u64; bins], add)
    } else {
        (0..m)
            .into_par_iter()
            .fold(
                || vec![0u64; bins],
                |mut acc, i| {
                    for j in i + 1..m {
                        tally(&mut acc, space.metric(&pts[i], &pts[j]));
                    }
                    acc
                },
            )
            .reduce(|| vec![0u64; bins], add)
    };
    // Cumulative: pairs below sorted[b] are those binned at or before b.
    hist.iter()
        .scan(0u64, |s, &h| {
            *s += h;
            Some(*s)
        })
        .collect()
}

fn add(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Default radius window: geometric from `4 M^{-1/N}` down one decade.
pub fn default_radius_window(points: usize, dim: usize) -> (f64, f64) {
    let r_hi = 4.0 * (points as f64).powf(-1.0 / dim as f64);
    (r_hi / 10.0, r_hi)
}

/// Slope of `log C(r)` against `log r` over `n_radii` geometric radii.
pub fn correlation_dimension(points: &Orbit, r_lo: f64, r_hi: f64, n_radii: usize) -> Result<DimensionFit> {
    if !(r_lo > 0.0 && r_lo < r_hi) {
        return invalid(format!("radius window [{r_lo}, {r_hi}] is empty or nonpositive"));
    }
    if n_radii < 3 {
        return invalid(format!("need at least 3 radii, got {n_radii}"));
    }
    let step = (r_hi / r_lo).ln() / (n_radii - 1) as f64;
    let radii: Vec<f64> = (0..n_radii).map(|k| r_lo * (step * k as f64).exp()).collect();
    let sums = correlation_sums(points, &radii)?;
    let mut fit_r = Vec::new();
    let mut fit_c = Vec::new();
    let mut excluded = Vec::new();
    for (&r, &c) in radii.iter().zip(&sums) {
        if c > 0.0 {
            fit_r.push(r);
            fit_c.push(c);
        } else {
            log::warn!("no pair closer than r = {r:e}; radius excluded from the fit");
            excluded.push(r);
        }
    }
    if fit_r.len() < 3 {
        return Err(Error::Numerical(format!(
            "only {} radii with positive correlation sum; widen the window",
            fit_r.len()
        )));
    }
    let xs: Vec<f64> = fit_r.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = fit_c.iter().map(|c| c.ln()).collect();
    Ok(DimensionFit {
        fit: fit_slope(&xs, &ys)?,
        radii: fit_r,
        sums: fit_c,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Point, Space};
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn uniform(space: Space, m: usize, seed: u64) -> Orbit {
        let mut rng = rng_from_seed(seed);
        Orbit::new(
            (0..m)
                .map(|_| {
                    let c: Vec<f64> = (0..space.dim()).map(|_| rng.random::<f64>()).collect();
                    Point::new(space, &c).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn naive_sum(o: &Orbit, r: f64) -> f64 {
        let m = o.len();
        let mut c = 0u64;
        for i in 0..m {
            for j in i + 1..m {
                if o.space().metric(&o.raw()[i], &o.raw()[j]) < r {
                    c += 1;
                }
            }
        }
        c as f64 / (m as f64 * (m as f64 - 1.0) / 2.0)
    }

    #[test]
    fn trivial_cases() {
        let o = Orbit::from_values(Space::Torus(1), &[0.1, 0.4]).unwrap();
        assert_eq!(correlation_sum(&o, 0.1).unwrap(), 0.0);
        assert_eq!(correlation_sum(&o, 0.6).unwrap(), 1.0);
        assert_eq!(correlation_sum(&o, 0.31).unwrap(), 1.0);
        let single = Orbit::from_values(Space::Torus(1), &[0.1]).unwrap();
        assert!(correlation_sum(&single, 0.1).is_err());
        assert!(correlation_sum(&o, 0.0).is_err());
    }

    #[test]
    fn agrees_with_pair_enumeration() {
        for (space, seed) in [(Space::Torus(1), 1), (Space::Torus(2), 2)] {
            let o = uniform(space, 3000, seed);
            let radii = [1e-4, 1e-3, 5e-3, 0.02, 0.1, 0.3, 0.6];
            let fast = correlation_sums(&o, &radii).unwrap();
            for (r, c) in radii.iter().zip(fast) {
                assert_eq!(c, naive_sum(&o, *r), "r = {r}");
            }
        }
    }

    #[test]
    fn uniform_circle_is_two_r() {
        let o = uniform(Space::Torus(1), 10_000, 3);
        let c = correlation_sum(&o, 0.01).unwrap();
        assert!((c - 0.02).abs() < 0.002, "{c}");
    }

    #[test]
    fn uniform_dimensions() {
        let o = uniform(Space::Torus(1), 100_000, 4);
        let (lo, hi) = default_radius_window(o.len(), 1);
        let d = correlation_dimension(&o, lo, hi, 8).unwrap();
        assert!((d.dimension() - 1.0).abs() < 0.05, "{:?}", d.fit);
        let o = uniform(Space::Torus(2), 100_000, 5);
        let (lo, hi) = default_radius_window(o.len(), 2);
        let d = correlation_dimension(&o, lo, hi, 8).unwrap();
        assert!((d.dimension() - 2.0).abs() < 0.1, "{:?}", d.fit);
    }

    #[test]
    fn identical_points_have_dimension_zero() {
        let o = Orbit::from_values(Space::Torus(1), &[0.3; 50]).unwrap();
        for r in [1e-9, 1e-3, 0.1] {
            assert_eq!(correlation_sum(&o, r).unwrap(), 1.0);
        }
        let d = correlation_dimension(&o, 1e-4, 1e-1, 5).unwrap();
        assert_eq!(d.dimension(), 0.0);
    }

    #[test]
    fn sparse_radii_are_excluded() {
        let o = Orbit::from_values(Space::Torus(1), &[0.0, 0.25, 0.5, 0.75]).unwrap();
        let d = correlation_dimension(&o, 1e-3, 0.3, 8);
        assert!(d.is_err());
        assert!(correlation_dimension(&o, 0.3, 0.1, 8).is_err());
        assert!(correlation_dimension(&o, 0.1, 0.3, 2).is_err());
    }

    #[test]
    fn euclidean_points() {
        let mut rng = rng_from_seed(6);
        let pts: Vec<Point> = (0..2000)
            .map(|_| {
                Point::new(
                    Space::Euclidean(2),
                    &[rng.random::<f64>() * 5.0, rng.random::<f64>() * 2.0],
                )
                .unwrap()
            })
            .collect();
        let o = Orbit::new(pts).unwrap();
        let radii = [0.01, 0.1, 0.5, 10.0];
        let fast = correlation_sums(&o, &radii).unwrap();
        for (r, c) in radii.iter().zip(fast) {
            assert_eq!(c, naive_sum(&o, *r));
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_in_r(seed in 0u64..500, r in 1e-4f64..0.5, s in 1e-4f64..0.5) {
            let o = uniform(Space::Torus(2), 300, seed);
            let (lo, hi) = if r < s { (r, s) } else { (s, r) };
            let c = correlation_sums(&o, &[lo, hi]).unwrap();
            prop_assert!(c[0] <= c[1]);
            prop_assert!((0.0..=1.0).contains(&c[0]) && (0.0..=1.0).contains(&c[1]));
        }
    }
}
