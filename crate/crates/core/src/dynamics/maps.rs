use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Orbit, Point, Space};
use crate::error::{invalid, Error, Result};
use crate::rng::{derive_seed, rng_from_seed, stream};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;
const TWO_NEG_64: f64 = 1.0 / TWO_POW_64;
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `H / 2^64` as an `f64` in `[0, 1)`.
#[inline]
pub(crate) fn to_unit(h: u64) -> f64 {
    let v = h as f64 * TWO_NEG_64;
    if v >= 1.0 {
        BELOW_ONE
    } else {
        v
    }
}

/// The register of a coordinate in `[0, 1)`; exact for every `f64`.
#[inline]
pub(crate) fn from_unit(x: f64) -> u64 {
    (x * TWO_POW_64) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Kind {
    TimesM(u32),
    Toral([[i64; 2]; 2]),
    Perturbed { base: Box<MapSpec>, epsilon: f64 },
}

/// A map of `T^1` or `T^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub(crate) kind: Kind,
}

impl MapSpec {
    /// `x -> m x mod 1` on `T^1`.
    pub fn times(m: u32) -> Result<Self> {
        if m < 2 {
            return invalid(format!("times-m map needs m >= 2, got {m}"));
        }
        Ok(MapSpec { kind: Kind::TimesM(m) })
    }

    /// `x -> A x mod 1` on `T^2` for an integer matrix with `|det A| = 1` and
    /// no eigenvalue on the unit circle.
    pub fn toral(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        if det.abs() != 1 {
            return invalid(format!("toral matrix {matrix:?} has determinant {det}, expected +-1"));
        }
        let tr = (a + d) as f64;
        let disc = tr * tr - 4.0 * det as f64;
        let moduli = if disc < 0.0 {
            // Complex pair with modulus sqrt(|det|) = 1.
            [1.0, 1.0]
        } else {
            let s = disc.sqrt();
            [((tr + s) / 2.0).abs(), ((tr - s) / 2.0).abs()]
        };
        if moduli.iter().any(|m| (m - 1.0).abs() <= 1e-9) {
            return invalid(format!("toral matrix {matrix:?} is not hyperbolic"));
        }
        Ok(MapSpec {
            kind: Kind::Toral(matrix),
        })
    }

    /// A hyperbolic toral automorphism whose entries are all positive.
    pub fn toral_positive(matrix: [[i64; 2]; 2]) -> Result<Self> {
        if matrix.iter().flatten().any(|&e| e <= 0) {
            return invalid(format!("toral matrix {matrix:?} must have positive entries"));
        }
        MapSpec::toral(matrix)
    }

    /// `x -> T(x) + omega mod 1` with `omega` uniform on `(-epsilon, epsilon)`,
    /// for a one-dimensional base map `T`.
    pub fn perturbed(base: MapSpec, epsilon: f64) -> Result<Self> {
        if base.space() != Space::Torus(1) || matches!(base.kind, Kind::Perturbed { .. }) {
            return invalid("perturbation needs an unperturbed map of the circle");
        }
        if !(0.0..0.5).contains(&epsilon) {
            return invalid(format!("noise radius must lie in [0, 0.5), got {epsilon}"));
        }
        Ok(MapSpec {
            kind: Kind::Perturbed {
                base: Box::new(base),
                epsilon,
            },
        })
    }

    pub fn space(&self) -> Space {
        match &self.kind {
            Kind::TimesM(_) => Space::Torus(1),
            Kind::Toral(_) => Space::Torus(2),
            Kind::Perturbed { base, .. } => base.space(),
        }
    }

    /// The toral matrix, if this is a toral automorphism.
    pub fn matrix(&self) -> Option<[[i64; 2]; 2]> {
        match self.kind {
            Kind::Toral(m) => Some(m),
            _ => None,
        }
    }

    pub fn multiplier(&self) -> Option<u32> {
        match self.kind {
            Kind::TimesM(m) => Some(m),
            _ => None,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.kind {
            Kind::Perturbed { epsilon, .. } => Some(epsilon),
            _ => None,
        }
    }

    /// Applies one step to the fixed-point state. With `rng`, the digits
    /// below `2^-64` are a fresh uniform tail; without, they are zero.
    pub(crate) fn step(&self, s: &mut [u64; 2], rng: Option<&mut ChaCha8Rng>) {
        match &self.kind {
            Kind::TimesM(m) => {
                let c = rng.map_or(0, |r| r.random_range(0..*m) as u64);
                s[0] = s[0].wrapping_mul(*m as u64).wrapping_add(c);
            }
            Kind::Toral(a) => {
                let (t0, t1) = rng.map_or((0.0, 0.0), |r| (r.random::<f64>(), r.random::<f64>()));
                let carry = |row: [i64; 2]| (row[0] as f64 * t0 + row[1] as f64 * t1).floor() as i64;
                let (x, y) = (s[0], s[1]);
                let lin = |row: [i64; 2]| {
                    x.wrapping_mul(row[0] as u64)
                        .wrapping_add(y.wrapping_mul(row[1] as u64))
                        .wrapping_add(carry(row) as u64)
                };
                s[0] = lin(a[0]);
                s[1] = lin(a[1]);
            }
            Kind::Perturbed { base, .. } => base.step(s, rng),
        }
    }
}

/// Where an orbit starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// A given point; its digits below `2^-64` are unknown and drawn lazily.
    At(Point),
    /// A Lebesgue-random point, every register bit drawn from the RNG.
    Uniform,
}

pub(crate) fn check_start(space: Space, start: &Start) -> Result<()> {
    if let Start::At(p) = start {
        if p.space() != space {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: p.dim(),
            });
        }
    }
    Ok(())
}

pub(crate) fn start_registers(start: &Start, rng: &mut ChaCha8Rng) -> [u64; 2] {
    match start {
        Start::At(p) => [from_unit(p.raw()[0]), from_unit(p.raw()[1])],
        Start::Uniform => [rng.random(), rng.random()],
    }
}

pub(crate) fn registers_to_point(s: &[u64; 2], dim: usize) -> [f64; 2] {
    if dim == 1 {
        [to_unit(s[0]), 0.0]
    } else {
        [to_unit(s[0]), to_unit(s[1])]
    }
}

/// The exact orbit `x0, T x0, ..., T^{n-1} x0` of a deterministic map, to
/// 64-bit precision.
///
/// Digits of `x0` beyond `2^-64` are taken as zero, so for `m`-adic maps the
/// orbit eventually reaches the fixed point 0 exactly as the true orbit of
/// that dyadic point would. Use [`iterate_seeded`] for typical orbits.
pub fn iterate(map: &MapSpec, x0: &Point, n: usize) -> Result<Orbit> {
    if n == 0 {
        return invalid("orbit length must be positive");
    }
    if matches!(map.kind, Kind::Perturbed { .. }) {
        return invalid("a perturbed map needs a noise seed; use iterate_seeded or iterate_random");
    }
    check_start(map.space(), &Start::At(*x0))?;
    let dim = map.space().dim();
    let mut s = [from_unit(x0.raw()[0]), from_unit(x0.raw()[1])];
    let mut pts = Vec::with_capacity(n);
    pts.push(*x0.raw());
    for _ in 1..n {
        map.step(&mut s, None);
        pts.push(registers_to_point(&s, dim));
    }
    Ok(Orbit::from_raw(map.space(), pts))
}

/// An orbit of length `n` whose sub-register digits are drawn from `seed`.
///
/// For `Start::Uniform` the result has exactly the law of the orbit of a
/// Lebesgue-random point under `x -> m x`. For toral maps the carries come
/// from a fresh uniform tail each step, a pseudo-orbit with errors of order
/// `2^-64` that a true orbit shadows. Perturbed maps draw their noise from an
/// independent stream of the same seed.
pub fn iterate_seeded(map: &MapSpec, start: Start, n: usize, seed: u64) -> Result<Orbit> {
    if let Kind::Perturbed { .. } = map.kind {
        let system = super::SkewSystem::perturbed(map.clone())?;
        return Ok(super::iterate_random(&system, super::skew::DriverStart::Uniform, start, n, seed)?.orbit);
    }
    if n == 0 {
        return invalid("orbit length must be positive");
    }
    check_start(map.space(), &start)?;
    let dim = map.space().dim();
    let mut rng = rng_from_seed(derive_seed(seed, &[stream::DYNAMICS]));
    let mut s = start_registers(&start, &mut rng);
    let mut pts = Vec::with_capacity(n);
    pts.push(start_point(&start, &s, dim));
    for _ in 1..n {
        map.step(&mut s, Some(&mut rng));
        pts.push(registers_to_point(&s, dim));
    }
    Ok(Orbit::from_raw(map.space(), pts))
}

pub(crate) fn start_point(start: &Start, s: &[u64; 2], dim: usize) -> [f64; 2] {
    match start {
        Start::At(p) => *p.raw(),
        Start::Uniform => registers_to_point(s, dim),
    }
}

/// A Lebesgue-random point of `space`.
pub fn uniform_start(space: Space, rng: &mut ChaCha8Rng) -> Result<Point> {
    let s: [u64; 2] = [rng.random(), rng.random()];
    let c = registers_to_point(&s, space.dim());
    Point::new(space, &c[..space.dim()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn fixed_points() {
        let o = iterate(&MapSpec::times(2).unwrap(), &Point::circle(0.0).unwrap(), 50).unwrap();
        assert!(o.points().all(|p| p.coords() == [0.0]));
        let cat = MapSpec::toral([[2, 1], [1, 1]]).unwrap();
        let o = iterate(&cat, &Point::torus2(0.0, 0.0).unwrap(), 50).unwrap();
        assert!(o.points().all(|p| p.coords() == [0.0, 0.0]));
    }

    #[test]
    fn doubling_arithmetic() {
        let o = iterate(&MapSpec::times(2).unwrap(), &Point::circle(0.3).unwrap(), 3).unwrap();
        let v: Vec<f64> = o.points().map(|p| p.coords()[0]).collect();
        assert!(close(v[0], 0.3) && close(v[1], 0.6) && close(v[2], 0.2), "{v:?}");
        // A dyadic point of the register hits 0 after 64 doublings.
        let o = iterate(&MapSpec::times(2).unwrap(), &Point::circle(0.3).unwrap(), 70).unwrap();
        assert_eq!(o.point(69).coords(), &[0.0]);
    }

    #[test]
    fn toral_arithmetic() {
        let cat = MapSpec::toral([[2, 1], [1, 1]]).unwrap();
        let o = iterate(&cat, &Point::torus2(0.25, 0.5).unwrap(), 3).unwrap();
        assert_eq!(o.point(1).coords(), &[0.0, 0.75]);
        assert_eq!(o.point(2).coords(), &[0.75, 0.75]);
        let neg = MapSpec::toral([[1, -1], [-1, 2]]).unwrap();
        let o = iterate(&neg, &Point::torus2(0.25, 0.5).unwrap(), 2).unwrap();
        assert_eq!(o.point(1).coords(), &[0.75, 0.75]);
    }

    #[test]
    fn construction_checks() {
        assert!(MapSpec::times(1).is_err());
        assert!(MapSpec::toral([[1, 1], [0, 1]]).is_err());
        assert!(MapSpec::toral([[0, -1], [1, 0]]).is_err());
        assert!(MapSpec::toral([[2, 0], [0, 1]]).is_err());
        assert!(MapSpec::toral_positive([[1, -1], [-1, 2]]).is_err());
        assert!(MapSpec::toral_positive([[2, 1], [1, 1]]).is_ok());
        assert!(MapSpec::toral_positive([[3, 2], [1, 1]]).is_ok());
        let t2 = MapSpec::times(2).unwrap();
        assert!(MapSpec::perturbed(t2.clone(), 0.6).is_err());
        assert!(MapSpec::perturbed(MapSpec::toral([[2, 1], [1, 1]]).unwrap(), 0.1).is_err());
        let p = MapSpec::perturbed(t2, 1e-3).unwrap();
        assert!(iterate(&p, &Point::circle(0.1).unwrap(), 3).is_err());
        assert!(iterate(&MapSpec::times(2).unwrap(), &Point::torus2(0.1, 0.1).unwrap(), 3).is_err());
    }

    #[test]
    fn seeded_orbits_stay_random() {
        let o = iterate_seeded(&MapSpec::times(2).unwrap(), Start::Uniform, 100_000, 7).unwrap();
        let v: Vec<f64> = o.points().map(|p| p.coords()[0]).collect();
        assert!(v.iter().all(|&x| (0.0..1.0).contains(&x)));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        let tail_mean = v[90_000..].iter().sum::<f64>() / 10_000.0;
        assert!((tail_mean - 0.5).abs() < 0.02, "{tail_mean}");
        let again = iterate_seeded(&MapSpec::times(2).unwrap(), Start::Uniform, 100_000, 7).unwrap();
        assert_eq!(o, again);
    }

    #[test]
    fn seeded_orbit_tracks_exact_orbit_early() {
        // Tail digits only reach the top of the register after ~64/log2(m) steps.
        let x0 = Point::circle(0.123456789).unwrap();
        let t3 = MapSpec::times(3).unwrap();
        let exact = iterate(&t3, &x0, 20).unwrap();
        let seeded = iterate_seeded(&t3, Start::At(x0), 20, 1).unwrap();
        for i in 0..20 {
            let d = super::super::torus_distance(&exact.point(i), &seeded.point(i)).unwrap();
            assert!(d < 3f64.powi(i as i32) * 2f64.powi(-63), "step {i}: {d}");
        }
    }

    #[test]
    fn seeded_toral_orbit_is_equidistributed() {
        let cat = MapSpec::toral_positive([[3, 2], [1, 1]]).unwrap();
        let o = iterate_seeded(&cat, Start::Uniform, 40_000, 3).unwrap();
        let mut bins = [0usize; 16];
        for p in o.points() {
            let c = p.coords();
            bins[(c[0] * 4.0) as usize * 4 + (c[1] * 4.0) as usize] += 1;
        }
        for b in bins {
            assert!((b as f64 - 2500.0).abs() < 5.0 * 50.0, "{bins:?}");
        }
    }
}
