use super::{Orbit, Space};
use crate::error::{invalid, Error, Result};

/// A map `f` applied pointwise to an orbit before distances are measured.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Identity,
    /// Keeps one coordinate of a torus point.
    Projection {
        coord: usize,
    },
    /// `y = A x + b` into Euclidean space. `lipschitz` is the constant for
    /// the sup metric on the source and the Euclidean metric on the target.
    LipschitzAffine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
        lipschitz: f64,
    },
    /// Sends the interval `[lo, hi]` of the circle to the point `c` and fixes
    /// everything else.
    Collapse {
        lo: f64,
        hi: f64,
        c: f64,
    },
}

impl Observation {
    /// An affine observation; the Lipschitz constant is computed here.
    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        let rows = matrix.len();
        if !(1..=2).contains(&rows) || offset.len() != rows {
            return invalid("affine observation needs 1 or 2 rows and a matching offset");
        }
        let cols = matrix[0].len();
        if !(1..=2).contains(&cols) || matrix.iter().any(|r| r.len() != cols) {
            return invalid("affine observation rows must have 1 or 2 equal-length columns");
        }
        if matrix.iter().flatten().chain(&offset).any(|v| !v.is_finite()) {
            return invalid("affine observation entries must be finite");
        }
        // A linear map attains its sup-to-Euclidean norm at a cube vertex.
        let vertices: &[[f64; 2]] = if cols == 1 {
            &[[1.0, 0.0]]
        } else {
            &[[1.0, 1.0], [1.0, -1.0]]
        };
        let lipschitz = vertices
            .iter()
            .map(|v| {
                matrix
                    .iter()
                    .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        Ok(Observation::LipschitzAffine {
            matrix,
            offset,
            lipschitz,
        })
    }

    /// A collapse of the arc `[lo, hi]` to `c`.
    pub fn collapse(lo: f64, hi: f64, c: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return invalid(format!(
                "collapse set [{lo}, {hi}] must be a nondegenerate subinterval of [0, 1]"
            ));
        }
        Ok(Observation::Collapse { lo, hi, c })
    }

    /// The Lipschitz constant, when the observation is Lipschitz.
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Observation::Identity | Observation::Projection { .. } => Some(1.0),
            Observation::LipschitzAffine { lipschitz, .. } => Some(*lipschitz),
            Observation::Collapse { .. } => None,
        }
    }

    /// Target space for orbits in `space`.
    pub fn target(&self, space: Space) -> Result<Space> {
        match self {
            Observation::Identity => Ok(space),
            Observation::Projection { coord } => match space {
                Space::Torus(d) if (*coord as u8) < d => Ok(Space::Torus(1)),
                Space::Euclidean(d) if (*coord as u8) < d => Ok(Space::Euclidean(1)),
                _ => Err(Error::DimensionMismatch {
                    expected: coord + 1,
                    got: space.dim(),
                }),
            },
            Observation::LipschitzAffine { matrix, .. } => {
                if matrix[0].len() != space.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: matrix[0].len(),
                        got: space.dim(),
                    });
                }
                Ok(Space::Euclidean(matrix.len() as u8))
            }
            Observation::Collapse { .. } => {
                if space != Space::Torus(1) {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: space.dim(),
                    });
                }
                Ok(space)
            }
        }
    }
}

/// The observed orbit `f(x_0), f(x_1), ...`.
pub fn observe(obs: &Observation, orbit: &Orbit) -> Result<Orbit> {
    let target = obs.target(orbit.space())?;
    let pts: Vec<[f64; 2]> = match obs {
        Observation::Identity => return Ok(orbit.clone()),
        Observation::Projection { coord } => orbit.raw().iter().map(|p| [p[*coord], 0.0]).collect(),
        Observation::LipschitzAffine { matrix, offset, .. } => orbit
            .raw()
            .iter()
            .map(|p| {
                let mut y = [0.0; 2];
                for (k, (row, b)) in matrix.iter().zip(offset).enumerate() {
                    y[k] = row.iter().zip(p).map(|(a, x)| a * x).sum::<f64>() + b;
                }
                y
            })
            .collect(),
        Observation::Collapse { lo, hi, c } => {
            let c = *c - c.floor();
            orbit
                .raw()
                .iter()
                .map(|p| if (*lo..=*hi).contains(&p[0]) { [c, 0.0] } else { *p })
                .collect()
        }
    };
    Ok(Orbit::from_raw(target, pts))
}
