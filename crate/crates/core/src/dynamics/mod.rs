//! Maps on the circle and the 2-torus, random compositions of them, and
//! observations of their orbits.
//!
//! Orbits of expanding maps are generated in 64-bit fixed point. A point of
//! `T^1` is held as `H / 2^64` for a `u64` register `H`; the binary digits
//! beyond the register are treated as an unseen uniform tail, so each step of
//! `x -> m x` shifts in a fresh digit block `c` uniform in `{0, ..., m-1}`.
//! For a Lebesgue-random starting point this produces orbits with exactly the
//! right law, where naive `f64` doubling would reach `0` after about 53 steps.

mod maps;
mod observation;
mod skew;

pub use maps::{iterate, iterate_seeded, uniform_start, MapSpec, Start};
pub use observation::{observe, Observation};
pub use skew::{iterate_random, theta_driver, theta_selector, Driver, DriverStart, RandomOrbit, SkewSystem};

use crate::error::{Error, Result};

/// The state space of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    /// `T^N = [0,1)^N` with the sup wrap metric.
    Torus(u8),
    /// `R^N` with the Euclidean metric (images of observations).
    Euclidean(u8),
}

impl Space {
    pub fn dim(self) -> usize {
        match self {
            Space::Torus(n) | Space::Euclidean(n) => n as usize,
        }
    }

    fn check(self) -> Result<Self> {
        match self.dim() {
            1 | 2 => Ok(self),
            d => Err(Error::InvalidArgument(format!(
                "dimension {d} not supported; use 1 or 2"
            ))),
        }
    }

    /// Largest possible distance, `None` when unbounded.
    pub fn diameter(self) -> Option<f64> {
        match self {
            Space::Torus(_) => Some(0.5),
            Space::Euclidean(_) => None,
        }
    }

    /// Distance between coordinate arrays, unchecked.
    #[inline]
    pub fn metric(self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        match self {
            Space::Torus(n) => {
                let mut d = 0.0f64;
                for k in 0..n as usize {
                    let t = (a[k] - b[k]).abs();
                    d = d.max(t.min(1.0 - t));
                }
                d
            }
            Space::Euclidean(1) => (a[0] - b[0]).abs(),
            Space::Euclidean(_) => (a[0] - b[0]).hypot(a[1] - b[1]),
        }
    }
}

/// A point in a [`Space`]; unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 2],
    space: Space,
}

impl Point {
    pub fn new(space: Space, coords: &[f64]) -> Result<Self> {
        let space = space.check()?;
        if coords.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: coords.len(),
            });
        }
        let mut c = [0.0; 2];
        for (slot, &v) in c.iter_mut().zip(coords) {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("coordinate {v} is not finite")));
            }
            *slot = match space {
                Space::Torus(_) => wrap(v),
                Space::Euclidean(_) => v,
            };
        }
        Ok(Point { coords: c, space })
    }

    /// A point of the circle `T^1`.
    pub fn circle(x: f64) -> Result<Self> {
        Point::new(Space::Torus(1), &[x])
    }

    /// A point of the 2-torus.
    pub fn torus2(x: f64, y: f64) -> Result<Self> {
        Point::new(Space::Torus(2), &[x, y])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.space.dim()]
    }

    pub(crate) fn raw(&self) -> &[f64; 2] {
        &self.coords
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Reduces into `[0, 1)`.
fn wrap(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance in the common space of `a` and `b`: the sup wrap metric on a
/// torus, Euclidean otherwise.
pub fn torus_distance(a: &Point, b: &Point) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.space.metric(&a.coords, &b.coords))
}

/// A finite, nonempty sequence of points in one space.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    space: Space,
    points: Vec<[f64; 2]>,
}

impl Orbit {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("an orbit needs at least one point".into()))?;
        let space = first.space;
        let mut raw = Vec::with_capacity(points.len());
        for p in &points {
            if p.space != space {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    got: p.dim(),
                });
            }
            raw.push(p.coords);
        }
        Ok(Orbit { space, points: raw })
    }

    /// Builds an orbit from coordinate rows without per-point checks.
    pub(crate) fn from_raw(space: Space, points: Vec<[f64; 2]>) -> Self {
        debug_assert!(!points.is_empty());
        Orbit { space, points }
    }

    /// Builds a one-dimensional orbit in `space` from plain values.
    pub fn from_values(space: Space, values: &[f64]) -> Result<Self> {
        if space.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: space.dim(),
            });
        }
        let pts = values
            .iter()
            .map(|&v| Point::new(space, &[v]))
            .collect::<Result<Vec<_>>>()?;
        Orbit::new(pts)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point {
        Point {
            coords: self.points[i],
            space: self.space,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().map(|&coords| Point {
            coords,
            space: self.space,
        })
    }

    pub(crate) fn raw(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// First `n` points.
    pub fn prefix(&self, n: usize) -> Result<Orbit> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix length {n} out of range for an orbit of length {}",
                self.len()
            )));
        }
        Ok(Orbit::from_raw(self.space, self.points[..n].to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let a = Point::circle(0.1).unwrap();
        let b = Point::circle(0.9).unwrap();
        assert!((torus_distance(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(torus_distance(&a, &a).unwrap(), 0.0);
        let p = Point::torus2(0.0, 0.0).unwrap();
        let q = Point::torus2(0.5, 0.5).unwrap();
        assert_eq!(torus_distance(&p, &q).unwrap(), 0.5);
        let e = Point::new(Space::Euclidean(2), &[0.0, 0.0]).unwrap();
        let f = Point::new(Space::Euclidean(2), &[3.0, 4.0]).unwrap();
        assert_eq!(torus_distance(&e, &f).unwrap(), 5.0);
        assert!(torus_distance(&a, &p).is_err());
    }

    #[test]
    fn torus_points_are_reduced() {
        assert_eq!(Point::circle(1.25).unwrap().coords(), &[0.25]);
        assert_eq!(Point::circle(-0.25).unwrap().coords(), &[0.75]);
        assert_eq!(Point::circle(-1e-20).unwrap().coords(), &[0.0]);
        assert!(Point::new(Space::Torus(3), &[0.0, 0.0, 0.0]).is_err());
        assert!(Point::new(Space::Torus(2), &[0.0]).is_err());
        assert!(Point::circle(f64::NAN).is_err());
    }

    #[test]
    fn orbits_are_homogeneous() {
        assert!(Orbit::new(vec![]).is_err());
        let mixed = vec![Point::circle(0.1).unwrap(), Point::torus2(0.1, 0.2).unwrap()];
        assert!(Orbit::new(mixed).is_err());
        let o = Orbit::from_values(Space::Torus(1), &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(o.len(), 3);
        assert_eq!(o.prefix(2).unwrap().len(), 2);
        assert!(o.prefix(4).is_err());
    }
}
