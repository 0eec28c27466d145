//! Equispaced node grids and their extensions beyond the original interval.

use crate::error::{Error, Result};

/// Equispaced nodes `x_i = a + i*h` for `0 <= i <= n`, with `h = (b - a)/n`.
///
/// Nodes are always computed as `a + i*h` rather than by repeated addition,
/// so that a node value is a deterministic function of its index. Grids are
/// immutable; downstream code indexes nodes by integer, never by
/// floating-point lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquispacedGrid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl EquispacedGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(b > a) {
            return Err(Error::EmptyInterval { a, b });
        }
        if n == 0 {
            return Err(Error::ZeroIntervalCount);
        }
        let h = (b - a) / n as f64;
        Ok(Self { a, b, n, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Index of the last node; the grid has `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        self.a + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// The open internodal intervals `(x_k, x_{k+1})`, `k = 0..n-1`.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n).map(|k| (self.node(k), self.node(k + 1)))
    }

    pub fn extend(&self, d: usize) -> ExtendedGrid {
        ExtendedGrid { base: *self, d }
    }
}

/// An equispaced grid together with `d` extra nodes on each side,
/// `x_i = x_0 + i*h` for `-d <= i <= n + d`. The restriction to `0..=n`
/// is exactly the base grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedGrid {
    base: EquispacedGrid,
    d: usize,
}

impl ExtendedGrid {
    pub fn base(&self) -> &EquispacedGrid {
        &self.base
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn first_index(&self) -> isize {
        -(self.d as isize)
    }

    pub fn last_index(&self) -> isize {
        self.base.n as isize + self.d as isize
    }

    /// Number of nodes, `n + 2d + 1`.
    pub fn len(&self) -> usize {
        self.base.n + 2 * self.d + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same formula as the base grid, so the restriction to `0..=n` is
    /// bit-for-bit identical to it.
    pub fn node(&self, i: isize) -> f64 {
        debug_assert!(i >= self.first_index() && i <= self.last_index());
        self.base.a + i as f64 * self.base.h
    }

    pub fn indices(&self) -> impl Iterator<Item = isize> + '_ {
        self.first_index()..=self.last_index()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_intervals() {
        assert_eq!(
            EquispacedGrid::new(1.0, 1.0, 4).unwrap_err(),
            Error::EmptyInterval { a: 1.0, b: 1.0 }
        );
        assert_eq!(
            EquispacedGrid::new(2.0, -1.0, 4).unwrap_err(),
            Error::EmptyInterval { a: 2.0, b: -1.0 }
        );
        assert_eq!(EquispacedGrid::new(0.0, 1.0, 0).unwrap_err(), Error::ZeroIntervalCount);
    }

    #[test]
    fn matches_reference_nodes() {
        let g = EquispacedGrid::new(-1.0, 1.0, 50).unwrap();
        assert_eq!(g.spacing(), 0.04);
        assert!((g.node(2) - -0.92).abs() < 1e-15);
        assert!((g.node(3) - -0.88).abs() < 1e-15);
        assert_eq!(g.node(0), -1.0);
        assert!((g.node(50) - 1.0).abs() <= f64::EPSILON);

        let g = EquispacedGrid::new(0.0, 1.0, 1).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 1.0]);
        assert_eq!(g.spacing(), 1.0);

        let g = EquispacedGrid::new(0.0, 10.0, 10).unwrap();
        for i in 0..=10 {
            assert_eq!(g.node(i), i as f64);
        }
    }

    #[test]
    fn extension_indexing() {
        let g = EquispacedGrid::new(-1.0, 1.0, 50).unwrap();
        let gx = g.extend(3);
        assert!((gx.node(-1) - -1.04).abs() < 1e-15);
        assert_eq!(gx.first_index(), -3);
        assert_eq!(gx.last_index(), 53);
        assert_eq!(gx.node(-3), g.a() - 3.0 * g.spacing());

        // d = 0 is the identity extension.
        let gx0 = g.extend(0);
        assert_eq!(gx0.len(), 51);
        for i in 0..=50 {
            assert_eq!(gx0.node(i as isize), g.node(i));
        }

        let g = EquispacedGrid::new(0.0, 1.0, 1).unwrap();
        let gx = g.extend(2);
        let got: Vec<f64> = gx.indices().map(|i| gx.node(i)).collect();
        assert_eq!(got, vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn extension_restriction_is_bitwise() {
        let g = EquispacedGrid::new(-1.0, 1.0, 37).unwrap();
        let gx = g.extend(5);
        for i in 0..=37 {
            assert_eq!(gx.node(i as isize).to_bits(), g.node(i).to_bits());
        }
    }

    #[test]
    fn spacing_within_two_ulp() {
        for &(a, b, n) in &[(-1.0, 1.0, 50usize), (0.0, 2.0, 7), (-3.5, 9.25, 201)] {
            let g = EquispacedGrid::new(a, b, n).unwrap();
            let h = g.spacing();
            for i in 0..n {
                let gap = g.node(i + 1) - g.node(i);
                // Node rounding scales with |a| + i*h, not with the node value
                // (which may sit near a cancellation).
                let scale = a.abs() + (i + 1) as f64 * h;
                assert!(
                    (gap - h).abs() <= 2.0 * scale * f64::EPSILON,
                    "gap {gap} vs h {h} at i = {i} for ({a}, {b}, {n})"
                );
            }
        }
    }
}
