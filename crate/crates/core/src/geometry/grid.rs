use crate::dynamics::Space;

/// Fraction of the cell width inside which a pair is guaranteed to land in
/// neighbouring cells, with room for rounding in the cell computation.
const SAFETY: f64 = 0.999;

/// Uniform bucket grid over a point set, stored as compressed cell lists.
/// Within a cell, point indices are ascending.
#[derive(Debug, Clone)]
pub(crate) struct Grid {
    space: Space,
    dims: usize,
    k: [usize; 2],
    origin: [f64; 2],
    width: [f64; 2],
    start: Vec<u32>,
    items: Vec<u32>,
}

/// Axis-aligned box containing every point of the given sets.
pub(crate) fn bounding_box(sets: &[&[[f64; 2]]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in sets.iter().flat_map(|s| s.iter()) {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

impl Grid {
    /// Whether a grid with `k` cells per dimension is usable in `space`:
    /// torus grids need three distinct neighbouring cells per axis.
    pub(crate) fn supports(space: Space, k: usize) -> bool {
        match space {
            Space::Torus(_) => k >= 3,
            Space::Euclidean(_) => k >= 1,
        }
    }

    /// Buckets `points` into `k` cells per dimension. On Euclidean spaces
    /// the cells tile `bbox`, which must contain every point later queried.
    pub(crate) fn build(space: Space, points: &[[f64; 2]], k: usize, bbox: ([f64; 2], [f64; 2])) -> Grid {
        let dims = space.dim();
        let mut g = Grid {
            space,
            dims,
            k: [1, 1],
            origin: [0.0; 2],
            width: [f64::INFINITY; 2],
            start: Vec::new(),
            items: Vec::new(),
        };
        for d in 0..dims {
            match space {
                Space::Torus(_) => {
                    g.k[d] = k;
                    g.width[d] = 1.0 / k as f64;
                }
                Space::Euclidean(_) => {
                    let extent = bbox.1[d] - bbox.0[d];
                    g.origin[d] = bbox.0[d];
                    if extent > 0.0 {
                        g.k[d] = k;
                        g.width[d] = extent / k as f64;
                    }
                }
            }
        }
        let cells = g.k[0] * g.k[1];
        let mut counts = vec![0u32; cells + 1];
        let ids: Vec<usize> = points.iter().map(|p| g.index_of(p)).collect();
        for &c in &ids {
            counts[c + 1] += 1;
        }
        for c in 0..cells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (i, &c) in ids.iter().enumerate() {
            items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        g.start = counts;
        g.items = items;
        g
    }

    /// Pairs closer than this are always found among neighbouring cells.
    pub(crate) fn safe_radius(&self) -> f64 {
        SAFETY * self.width[..self.dims].iter().copied().fold(f64::INFINITY, f64::min)
    }

    #[inline]
    fn coord(&self, p: &[f64; 2], d: usize) -> i64 {
        if self.k[d] == 1 {
            return 0;
        }
        let c = ((p[d] - self.origin[d]) / self.width[d]).floor();
        (c.max(0.0) as i64).min(self.k[d] as i64 - 1)
    }

    #[inline]
    fn index_of(&self, p: &[f64; 2]) -> usize {
        let c0 = self.coord(p, 0) as usize;
        let c1 = if self.dims == 2 { self.coord(p, 1) as usize } else { 0 };
        c0 * self.k[1] + c1
    }

    #[inline]
    fn neighbour(&self, c: i64, off: i64, d: usize) -> Option<usize> {
        let k = self.k[d] as i64;
        if k == 1 {
            return (off == 0).then_some(0);
        }
        let v = c + off;
        match self.space {
            Space::Torus(_) => Some(v.rem_euclid(k) as usize),
            Space::Euclidean(_) => (0..k).contains(&v).then_some(v as usize),
        }
    }

    /// Calls `f` with every indexed point in the cells around `p`, stopping
    /// inside each cell at the first index above `limit`.
    #[inline]
    pub(crate) fn for_each_near(&self, p: &[f64; 2], limit: u32, mut f: impl FnMut(u32)) {
        let c0 = self.coord(p, 0);
        let c1 = if self.dims == 2 { self.coord(p, 1) } else { 0 };
        let offs1: &[i64] = if self.dims == 2 { &[-1, 0, 1] } else { &[0] };
        for o0 in [-1i64, 0, 1] {
            let Some(a) = self.neighbour(c0, o0, 0) else { continue };
            for &o1 in offs1 {
                let b = if self.dims == 2 {
                    match self.neighbour(c1, o1, 1) {
                        Some(b) => b,
                        None => continue,
                    }
                } else {
                    0
                };
                let cell = a * self.k[1] + b;
                for &i in &self.items[self.start[cell] as usize..self.start[cell + 1] as usize] {
                    if i > limit {
                        break;
                    }
                    f(i);
                }
            }
        }
    }
}
