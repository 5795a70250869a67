use rand::Rng;

use super::maps::{check_start, registers_to_point, start_point, start_registers, Kind, Start};
use super::{MapSpec, Orbit, Space};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from_seed, stream};

/// The piecewise linear map of `[0, 1]` driving the 2x/3x system. It
/// preserves Lebesgue measure and is Markov for the partition at
/// `1/5, 2/5, 3/5`.
pub fn theta_driver(omega: f64) -> f64 {
    let w = if omega < 0.2 {
        2.0 * omega
    } else if omega < 0.4 {
        3.0 * omega - 0.2
    } else if omega < 0.6 {
        2.0 * omega - 0.8
    } else {
        1.5 * omega - 0.5
    };
    w.clamp(0.0, 1.0)
}

/// Map index chosen at driver state `omega`: the first map on `[0, 2/5)`,
/// the second otherwise.
pub fn theta_selector(omega: f64) -> usize {
    usize::from(omega >= 0.4)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Driver {
    /// Deterministic `theta_driver` dynamics with [`theta_selector`].
    PiecewiseTheta,
    /// I.i.d. uniform `omega`; the first map is used when `omega < q`.
    IidBernoulli { q: f64 },
    /// I.i.d. additive noise `omega` uniform on `(-epsilon, epsilon)`.
    IidUniformBall { epsilon: f64 },
}

/// A skew product `S(omega, x) = (theta(omega), T_omega(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewSystem {
    driver: Driver,
    maps: Vec<MapSpec>,
}

/// Initial driver state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriverStart {
    Value(f64),
    /// Drawn from the driver's invariant law.
    Uniform,
}

/// A random orbit together with the driver states that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomOrbit {
    pub orbit: Orbit,
    /// `omega_k` used for the step from `x_k` to `x_{k+1}`; length `n - 1`.
    pub driver: Vec<f64>,
}

impl SkewSystem {
    /// Doubling and tripling on the circle chosen by the piecewise driver.
    pub fn two_three() -> Self {
        SkewSystem {
            driver: Driver::PiecewiseTheta,
            maps: vec![MapSpec::times(2).unwrap(), MapSpec::times(3).unwrap()],
        }
    }

    /// Two maps of one space chosen by the piecewise driver.
    pub fn piecewise(first: MapSpec, second: MapSpec) -> Result<Self> {
        SkewSystem::pair(Driver::PiecewiseTheta, first, second)
    }

    /// Two maps of one space chosen independently with probabilities `q`
    /// and `1 - q`.
    pub fn bernoulli(q: f64, first: MapSpec, second: MapSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return invalid(format!("selection probability must lie in [0, 1], got {q}"));
        }
        SkewSystem::pair(Driver::IidBernoulli { q }, first, second)
    }

    /// The default random toral pair `[[2,1],[1,1]]`, `[[3,2],[1,1]]`.
    pub fn toral_pair(q: f64) -> Result<Self> {
        SkewSystem::bernoulli(
            q,
            MapSpec::toral_positive([[2, 1], [1, 1]])?,
            MapSpec::toral_positive([[3, 2], [1, 1]])?,
        )
    }

    /// The random system of a perturbed map.
    pub fn perturbed(map: MapSpec) -> Result<Self> {
        match map.kind {
            Kind::Perturbed { epsilon, .. } => Ok(SkewSystem {
                driver: Driver::IidUniformBall { epsilon },
                maps: vec![map],
            }),
            _ => invalid("expected a perturbed map"),
        }
    }

    fn pair(driver: Driver, first: MapSpec, second: MapSpec) -> Result<Self> {
        if first.space() != second.space() {
            return invalid("both maps of a random system must act on the same space");
        }
        if matches!(first.kind, Kind::Perturbed { .. }) || matches!(second.kind, Kind::Perturbed { .. }) {
            return invalid("perturbed maps carry their own noise; use SkewSystem::perturbed");
        }
        Ok(SkewSystem {
            driver,
            maps: vec![first, second],
        })
    }

    pub fn driver(&self) -> Driver {
        self.driver
    }

    pub fn maps(&self) -> &[MapSpec] {
        &self.maps
    }

    pub fn space(&self) -> Space {
        self.maps[0].space()
    }
}

/// The random orbit `x_{k+1} = T_{omega_k}(x_k)`.
///
/// The piecewise driver evolves deterministically from `omega0`; the i.i.d.
/// drivers draw `omega_k` from a stream of `seed` (a given `omega0` is used
/// as the first draw). Sub-register digits of `x` come from a second,
/// independent stream, exactly as in [`super::iterate_seeded`].
pub fn iterate_random(system: &SkewSystem, omega0: DriverStart, x0: Start, n: usize, seed: u64) -> Result<RandomOrbit> {
    if n == 0 {
        return invalid("orbit length must be positive");
    }
    let space = system.space();
    check_start(space, &x0)?;
    let mut driver_rng = rng_from_seed(derive_seed(seed, &[stream::DRIVER]));
    let mut dyn_rng = rng_from_seed(derive_seed(seed, &[stream::DYNAMICS]));
    let mut s = start_registers(&x0, &mut dyn_rng);
    let dim = space.dim();

    let mut omega = match (omega0, system.driver) {
        (DriverStart::Value(w), Driver::PiecewiseTheta) if !(0.0..=1.0).contains(&w) => {
            return invalid(format!("driver state {w} outside [0, 1]"));
        }
        (DriverStart::Value(w), Driver::IidBernoulli { .. }) if !(0.0..1.0).contains(&w) => {
            return invalid(format!("driver state {w} outside [0, 1)"));
        }
        (DriverStart::Value(w), Driver::IidUniformBall { epsilon }) if w.abs() > epsilon => {
            return invalid(format!("noise {w} outside the ball of radius {epsilon}"));
        }
        (DriverStart::Value(w), _) => w,
        (DriverStart::Uniform, d) => draw(d, &mut driver_rng),
    };

    let mut pts = Vec::with_capacity(n);
    let mut trajectory = Vec::with_capacity(n - 1);
    pts.push(start_point(&x0, &s, dim));
    for k in 1..n {
        trajectory.push(omega);
        match system.driver {
            Driver::PiecewiseTheta => system.maps[theta_selector(omega)].step(&mut s, Some(&mut dyn_rng)),
            Driver::IidBernoulli { q } => {
                let idx = usize::from(omega >= q);
                system.maps[idx].step(&mut s, Some(&mut dyn_rng));
            }
            Driver::IidUniformBall { .. } => {
                system.maps[0].step(&mut s, Some(&mut dyn_rng));
                s[0] = s[0].wrapping_add(noise_register(omega));
            }
        }
        pts.push(registers_to_point(&s, dim));
        if k + 1 < n {
            omega = match system.driver {
                Driver::PiecewiseTheta => theta_driver(omega),
                d => draw(d, &mut driver_rng),
            };
        }
    }
    Ok(RandomOrbit {
        orbit: Orbit::from_raw(space, pts),
        driver: trajectory,
    })
}

fn draw(driver: Driver, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    match driver {
        Driver::PiecewiseTheta | Driver::IidBernoulli { .. } => rng.random::<f64>(),
        Driver::IidUniformBall { epsilon } if epsilon > 0.0 => rng.random_range(-epsilon..epsilon),
        Driver::IidUniformBall { .. } => 0.0,
    }
}

/// Two's-complement register of a small signed offset.
fn noise_register(omega: f64) -> u64 {
    (omega * 18_446_744_073_709_551_616.0).round() as i64 as u64
}

#[cfg(test)]
mod tests {
    use super::super::{iterate, iterate_seeded, Point};
    use super::*;
    use crate::linalg::Matrix;
    use crate::rng::rng_from_seed;
    use crate::symbolic::stationary_distribution;

    #[test]
    fn theta_branches() {
        assert_eq!(theta_driver(0.0), 0.0);
        assert!((theta_driver(0.3) - 0.7).abs() < 1e-15);
        assert!((theta_driver(0.5) - 0.2).abs() < 1e-15);
        assert!((theta_driver(0.1) - 0.2).abs() < 1e-15);
        assert!((theta_driver(0.8) - 0.7).abs() < 1e-15);
        assert_eq!(theta_driver(1.0), 1.0);
        assert_eq!(theta_selector(0.39), 0);
        assert_eq!(theta_selector(0.4), 1);
    }

    #[test]
    fn theta_preserves_lebesgue() {
        let mut rng = rng_from_seed(11);
        let n = 1_000_000;
        let bins = 20;
        let mut counts = vec![0f64; bins];
        for _ in 0..n {
            let w = theta_driver(rng.random::<f64>());
            counts[((w * bins as f64) as usize).min(bins - 1)] += 1.0;
        }
        let expect = n as f64 / bins as f64;
        let sd = (expect * (1.0 - 1.0 / bins as f64)).sqrt();
        for c in counts {
            assert!((c - expect).abs() < 3.0 * sd, "{c} vs {expect}");
        }
    }

    #[test]
    fn selector_frequency_is_stationary_weight() {
        let chain = Matrix::from_rows(&[[0.5, 0.5], [1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let pi = stationary_distribution(&chain).unwrap();
        assert!((pi[0] - 0.4).abs() < 1e-10);
        let r = iterate_random(
            &SkewSystem::two_three(),
            DriverStart::Uniform,
            Start::Uniform,
            200_001,
            5,
        )
        .unwrap();
        let freq = r.driver.iter().filter(|&&w| theta_selector(w) == 0).count() as f64 / r.driver.len() as f64;
        assert!((freq - pi[0]).abs() < 0.01, "{freq}");
    }

    #[test]
    fn constant_driver_gives_pure_doubling() {
        let x0 = Point::circle(0.3).unwrap();
        let r = iterate_random(&SkewSystem::two_three(), DriverStart::Value(0.0), Start::At(x0), 40, 1).unwrap();
        let d = iterate_seeded(&MapSpec::times(2).unwrap(), Start::At(x0), 40, 1).unwrap();
        assert_eq!(r.orbit, d);
        let exact = iterate(&MapSpec::times(2).unwrap(), &x0, 10).unwrap();
        for i in 0..10 {
            assert!((r.orbit.point(i).coords()[0] - exact.point(i).coords()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_noise_is_the_base_map() {
        let p = MapSpec::perturbed(MapSpec::times(2).unwrap(), 0.0).unwrap();
        let a = iterate_seeded(&p, Start::Uniform, 1000, 9).unwrap();
        let b = iterate_seeded(&MapSpec::times(2).unwrap(), Start::Uniform, 1000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_moves_points_by_at_most_epsilon() {
        let eps = 1e-3;
        let p = MapSpec::perturbed(MapSpec::times(2).unwrap(), eps).unwrap();
        let sys = SkewSystem::perturbed(p).unwrap();
        let r = iterate_random(&sys, DriverStart::Uniform, Start::Uniform, 1000, 4).unwrap();
        assert!(r.driver.iter().all(|w| w.abs() < eps));
        assert!(r.driver.iter().any(|w| w.abs() > eps / 2.0));
    }

    #[test]
    fn degenerate_bernoulli_is_the_first_map() {
        let sys = SkewSystem::toral_pair(1.0).unwrap();
        let r = iterate_random(&sys, DriverStart::Uniform, Start::Uniform, 500, 2).unwrap();
        let a0 = MapSpec::toral([[2, 1], [1, 1]]).unwrap();
        assert_eq!(r.orbit, iterate_seeded(&a0, Start::Uniform, 500, 2).unwrap());
        let sys = SkewSystem::toral_pair(0.0).unwrap();
        let r = iterate_random(&sys, DriverStart::Uniform, Start::Uniform, 500, 2).unwrap();
        let a1 = MapSpec::toral([[3, 2], [1, 1]]).unwrap();
        assert_eq!(r.orbit, iterate_seeded(&a1, Start::Uniform, 500, 2).unwrap());
    }

    #[test]
    fn domain_checks() {
        let sys = SkewSystem::two_three();
        assert!(iterate_random(&sys, DriverStart::Value(1.5), Start::Uniform, 5, 0).is_err());
        let x = Point::torus2(0.1, 0.2).unwrap();
        assert!(iterate_random(&sys, DriverStart::Uniform, Start::At(x), 5, 0).is_err());
        assert!(SkewSystem::bernoulli(1.2, MapSpec::times(2).unwrap(), MapSpec::times(3).unwrap()).is_err());
        assert!(SkewSystem::bernoulli(
            0.5,
            MapSpec::times(2).unwrap(),
            MapSpec::toral([[2, 1], [1, 1]]).unwrap()
        )
        .is_err());
        assert!(SkewSystem::perturbed(MapSpec::times(2).unwrap()).is_err());
    }

    #[test]
    fn every_coordinate_in_unit_interval() {
        let sys = SkewSystem::toral_pair(0.5).unwrap();
        let r = iterate_random(&sys, DriverStart::Uniform, Start::Uniform, 20_000, 8).unwrap();
        assert!(r
            .orbit
            .points()
            .flat_map(|p| p.coords().to_vec())
            .all(|c| (0.0..1.0).contains(&c)));
    }
}
