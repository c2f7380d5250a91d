//! Rectangular point lattices standing in for a coordinate patch of the
//! Riemann surface `L`, with second-order difference stencils.

use serde::{Deserialize, Serialize};

use super::LatticeError;

/// Boundary treatment of the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Indices wrap around (a flat torus).
    Periodic,
    /// One-sided stencils on the edges (a closed rectangle).
    Clamped,
}

/// Coordinate axis of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// `nx × ny` points at spacing `h`; point `(i, j)` sits at `(i h, j h)` and is
/// stored at the row-major index `j·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    nx: usize,
    ny: usize,
    h: f64,
    boundary: Boundary,
}

impl LatticeGrid {
    /// Validated grid; both point counts must be at least 3.
    pub fn new(nx: usize, ny: usize, h: f64, boundary: Boundary) -> Result<Self, LatticeError> {
        if nx < 3 || ny < 3 {
            return Err(LatticeError::GridTooSmall { nx, ny });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(LatticeError::BadSpacing(h));
        }
        Ok(LatticeGrid { nx, ny, h, boundary })
    }

    /// Square clamped grid covering `[0, 1]²` with spacing `1/cells`.
    pub fn unit_square(cells: usize) -> Result<Self, LatticeError> {
        Self::new(cells + 1, cells + 1, 1.0 / cells as f64, Boundary::Clamped)
    }

    /// Points along `x`.
    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Points along `y`.
    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Boundary treatment.
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    /// Always false: a valid grid has at least nine points.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major index of `(i, j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Grid indices of a row-major index.
    #[inline]
    pub fn ij(&self, p: usize) -> (usize, usize) {
        (p % self.nx, p / self.nx)
    }

    /// Coordinates of a point.
    pub fn point(&self, p: usize) -> (f64, f64) {
        let (i, j) = self.ij(p);
        (i as f64 * self.h, j as f64 * self.h)
    }

    /// False for edge points of a clamped grid, true otherwise.
    pub fn is_interior(&self, p: usize) -> bool {
        match self.boundary {
            Boundary::Periodic => true,
            Boundary::Clamped => {
                let (i, j) = self.ij(p);
                i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny
            }
        }
    }

    /// Number of points between `p` and the nearest clamped edge
    /// (`usize::MAX` on periodic grids).
    pub fn edge_distance(&self, p: usize) -> usize {
        match self.boundary {
            Boundary::Periodic => usize::MAX,
            Boundary::Clamped => {
                let (i, j) = self.ij(p);
                i.min(j).min(self.nx - 1 - i).min(self.ny - 1 - j)
            }
        }
    }

    /// Forward neighbour along an axis, if the link exists.
    pub fn forward(&self, p: usize, axis: Axis) -> Option<usize> {
        let (i, j) = self.ij(p);
        match (axis, self.boundary) {
            (Axis::X, Boundary::Periodic) => Some(self.index((i + 1) % self.nx, j)),
            (Axis::Y, Boundary::Periodic) => Some(self.index(i, (j + 1) % self.ny)),
            (Axis::X, Boundary::Clamped) => (i + 1 < self.nx).then(|| self.index(i + 1, j)),
            (Axis::Y, Boundary::Clamped) => (j + 1 < self.ny).then(|| self.index(i, j + 1)),
        }
    }

    /// Backward neighbour along an axis, if the link exists.
    pub fn backward(&self, p: usize, axis: Axis) -> Option<usize> {
        let (i, j) = self.ij(p);
        match (axis, self.boundary) {
            (Axis::X, Boundary::Periodic) => Some(self.index((i + self.nx - 1) % self.nx, j)),
            (Axis::Y, Boundary::Periodic) => Some(self.index(i, (j + self.ny - 1) % self.ny)),
            (Axis::X, Boundary::Clamped) => (i > 0).then(|| self.index(i - 1, j)),
            (Axis::Y, Boundary::Clamped) => (j > 0).then(|| self.index(i, j - 1)),
        }
    }

    /// Weights `(point, weight)` of the first-derivative stencil at `p`,
    /// not yet divided by `h`; unused slots carry weight 0.
    ///
    /// Edge points of clamped axes take the central difference against a
    /// ghost value extrapolated by the cubic through the first four points
    /// (the quadratic through three on 3-point axes). The cubic ghost gives
    /// the edge the same leading error `h² f‴/6` as the interior, so
    /// differentiating a differentiated field stays second order up to the edge.
    pub fn stencil(&self, p: usize, axis: Axis) -> [(usize, f64); 4] {
        let (i, j) = self.ij(p);
        let (pos, n) = match axis {
            Axis::X => (i, self.nx),
            Axis::Y => (j, self.ny),
        };
        let at = |q: usize| match axis {
            Axis::X => self.index(q, j),
            Axis::Y => self.index(i, q),
        };
        let central = |lo: usize, hi: usize| [(at(lo), -0.5), (at(hi), 0.5), (at(pos), 0.0), (at(pos), 0.0)];
        match self.boundary {
            Boundary::Periodic => central((pos + n - 1) % n, (pos + 1) % n),
            Boundary::Clamped if pos == 0 || pos + 1 == n => {
                // Points counted inwards from the edge; the weights flip sign on the far edge.
                let q = |o: usize| if pos == 0 { o } else { n - 1 - o };
                let s = if pos == 0 { 1.0 } else { -1.0 };
                if n >= 4 {
                    let w = [-2.0, 3.5, -2.0, 0.5];
                    [
                        (at(q(0)), s * w[0]),
                        (at(q(1)), s * w[1]),
                        (at(q(2)), s * w[2]),
                        (at(q(3)), s * w[3]),
                    ]
                } else {
                    [
                        (at(q(0)), -1.5 * s),
                        (at(q(1)), 2.0 * s),
                        (at(q(2)), -0.5 * s),
                        (at(pos), 0.0),
                    ]
                }
            }
            Boundary::Clamped => central(pos - 1, pos + 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(matches!(
            LatticeGrid::new(2, 5, 0.1, Boundary::Periodic),
            Err(LatticeError::GridTooSmall { .. })
        ));
        assert!(matches!(
            LatticeGrid::new(4, 4, 0.0, Boundary::Clamped),
            Err(LatticeError::BadSpacing(_))
        ));
    }

    #[test]
    fn edge_stencils_share_the_central_error_on_cubics() {
        // Central differences of a cubic return f' + h² f‴/6 exactly.
        let g = LatticeGrid::new(6, 4, 0.2, Boundary::Clamped).unwrap();
        let h2 = g.h() * g.h();
        let f = |p: usize| {
            let (x, y) = g.point(p);
            x * x * x - 2.0 * x * y * y + y * y * y
        };
        for p in 0..g.len() {
            let (x, y) = g.point(p);
            let dx: f64 = g.stencil(p, Axis::X).iter().map(|(q, w)| w * f(*q)).sum::<f64>() / g.h();
            let dy: f64 = g.stencil(p, Axis::Y).iter().map(|(q, w)| w * f(*q)).sum::<f64>() / g.h();
            assert!((dx - (3.0 * x * x - 2.0 * y * y + h2)).abs() < 1e-12, "dx at {p}");
            assert!((dy - (3.0 * y * y - 4.0 * x * y + h2)).abs() < 1e-12, "dy at {p}");
        }
    }

    #[test]
    fn three_point_axes_fall_back_to_second_order() {
        let g = LatticeGrid::new(3, 5, 0.5, Boundary::Clamped).unwrap();
        let w: Vec<f64> = g.stencil(0, Axis::X).iter().map(|(_, w)| *w).collect();
        assert_eq!(w, vec![-1.5, 2.0, -0.5, 0.0]);
    }

    #[test]
    fn stencils_differentiate_quadratics_exactly() {
        let g = LatticeGrid::new(5, 4, 0.25, Boundary::Clamped).unwrap();
        let f = |p: usize| {
            let (x, y) = g.point(p);
            3.0 * x * x - 2.0 * x * y + y
        };
        for p in 0..g.len() {
            let (x, y) = g.point(p);
            let dx: f64 = g.stencil(p, Axis::X).iter().map(|(q, w)| w * f(*q)).sum::<f64>() / g.h();
            let dy: f64 = g.stencil(p, Axis::Y).iter().map(|(q, w)| w * f(*q)).sum::<f64>() / g.h();
            assert!((dx - (6.0 * x - 2.0 * y)).abs() < 1e-12);
            assert!((dy - (1.0 - 2.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_links_wrap() {
        let g = LatticeGrid::new(3, 4, 1.0, Boundary::Periodic).unwrap();
        assert_eq!(g.forward(g.index(2, 3), Axis::X), Some(g.index(0, 3)));
        assert_eq!(g.forward(g.index(2, 3), Axis::Y), Some(g.index(2, 0)));
        let c = LatticeGrid::new(3, 4, 1.0, Boundary::Clamped).unwrap();
        assert_eq!(c.forward(c.index(2, 3), Axis::X), None);
        assert_eq!(c.backward(c.index(0, 3), Axis::X), None);
        assert_eq!(g.backward(g.index(0, 0), Axis::Y), Some(g.index(0, 3)));
        assert!(!c.is_interior(c.index(0, 1)));
        assert!(c.is_interior(c.index(1, 1)));
    }
}
