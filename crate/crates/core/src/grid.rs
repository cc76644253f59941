//! Uniform cell-centred window on the meridian half-plane.
//!
//! Cell `(i, j)` covers `[z_lo + i h, z_lo + (i+1) h] × [r_min + j h, r_min + (j+1) h]`
//! where `z_lo = z_min + offset_cells · h`. Arrays are stored row-major in
//! `j` (index `j * nz + i`). The stream function lives on the `(nz+1) × (nr+1)`
//! cell corners.

use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Lower x1 edge of the window before any translation.
    pub z_min: f64,
    pub r_min: f64,
    pub spacing: f64,
    pub nz: usize,
    pub nr: usize,
    /// Whole-cell translation of the window along x1.
    pub offset_cells: i64,
}

/// Builds a grid covering `[z_min, z_max] × [r_min, r_max]`.
///
/// Both extents must be integer multiples of `spacing`.
pub fn make_grid(extents: [f64; 4], spacing: f64) -> Result<Grid> {
    let [z_min, z_max, r_min, r_max] = extents;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
    }
    if !(r_min >= 0.0) {
        return Err(Error::InvalidGrid(format!("r_min must be non-negative, got {r_min}")));
    }
    if !(z_max > z_min) || !(r_max > r_min) {
        return Err(Error::InvalidGrid("extents must be well ordered".into()));
    }
    let cells = |lo: f64, hi: f64, name: &str| -> Result<usize> {
        let n = ((hi - lo) / spacing).round();
        if n < 1.0 || ((hi - lo) - n * spacing).abs() > 1e-6 * spacing {
            return Err(Error::InvalidGrid(format!(
                "{name} extent {} is not a multiple of spacing {spacing}",
                hi - lo
            )));
        }
        Ok(n as usize)
    };
    let nz = cells(z_min, z_max, "x1")?;
    let nr = cells(r_min, r_max, "x2")?;
    if r_min > 0.0 && r_min < spacing {
        return Err(Error::InvalidGrid("r_min must be 0 or at least one cell width".into()));
    }
    Ok(Grid { z_min, r_min, spacing, nz, nr, offset_cells: 0 })
}

impl Grid {
    #[inline]
    pub fn len(&self) -> usize {
        self.nz * self.nr
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nz + i
    }

    /// Current lower x1 edge of the window.
    #[inline]
    pub fn z_lo(&self) -> f64 {
        self.z_min + self.offset_cells as f64 * self.spacing
    }

    pub fn z_hi(&self) -> f64 {
        self.z_lo() + self.nz as f64 * self.spacing
    }

    pub fn r_max(&self) -> f64 {
        self.r_min + self.nr as f64 * self.spacing
    }

    #[inline]
    pub fn x1(&self, i: usize) -> f64 {
        self.z_min + (self.offset_cells as f64 + i as f64 + 0.5) * self.spacing
    }

    #[inline]
    pub fn x2(&self, j: usize) -> f64 {
        self.r_min + (j as f64 + 0.5) * self.spacing
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Point {
        [self.x1(i), self.x2(j)]
    }

    /// x1 of corner column `i` (0..=nz).
    #[inline]
    pub fn node_x1(&self, i: usize) -> f64 {
        self.z_min + (self.offset_cells as f64 + i as f64) * self.spacing
    }

    /// x2 of corner row `j` (0..=nr).
    #[inline]
    pub fn node_x2(&self, j: usize) -> f64 {
        self.r_min + j as f64 * self.spacing
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Cell containing `p`, if inside the window.
    pub fn index_of(&self, p: Point) -> Option<(usize, usize)> {
        let fi = ((p[0] - self.z_lo()) / self.spacing).floor();
        let fj = ((p[1] - self.r_min) / self.spacing).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nz as f64 || fj >= self.nr as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn centers(&self) -> impl Iterator<Item = (usize, usize, Point)> + '_ {
        (0..self.nr).flat_map(move |j| (0..self.nz).map(move |i| (i, j, self.center(i, j))))
    }

    /// Same geometry, window translated by `cells` along x1.
    pub fn shifted(&self, cells: i64) -> Grid {
        Grid { offset_cells: self.offset_cells + cells, ..self.clone() }
    }

    /// Same cell layout (translation included).
    pub fn same_layout(&self, other: &Grid) -> bool {
        self == other
    }

    /// Window centre along x1.
    pub fn z_center(&self) -> f64 {
        0.5 * (self.z_lo() + self.z_hi())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_square_half_spacing() {
        let g = make_grid([0.0, 1.0, 0.0, 1.0], 0.5).unwrap();
        assert_eq!((g.nz, g.nr), (2, 2));
        let c: Vec<Point> = g.centers().map(|(_, _, p)| p).collect();
        assert_eq!(c, vec![[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]);
    }

    #[test]
    fn window_counts() {
        let g = make_grid([-1.0, 1.0, 0.5, 1.5], 0.01).unwrap();
        assert_eq!((g.nz, g.nr), (200, 100));
        assert!(g.centers().all(|(_, _, p)| p[1] >= 0.505 - 1e-12));
        assert!((g.x2(0) - 0.505).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_grid([0.0, 1.0, 0.0, 1.0], 0.0).is_err());
        assert!(make_grid([0.0, 1.0, 0.0, 1.0], -0.1).is_err());
        assert!(make_grid([0.0, 1.0, -0.5, 1.0], 0.1).is_err());
        assert!(make_grid([1.0, 0.0, 0.0, 1.0], 0.1).is_err());
        assert!(make_grid([0.0, 1.0, 0.0, 1.0], 0.3).is_err());
    }

    #[test]
    fn shift_moves_centres_by_whole_cells() {
        let g = make_grid([0.0, 1.0, 0.5, 1.5], 0.1).unwrap();
        let s = g.shifted(3);
        assert_eq!(s.center(0, 0), g.center(3, 0));
        assert!((s.z_center() - g.z_center() - 0.3).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn index_coordinate_round_trip(nz in 1usize..60, nr in 1usize..60, h in 0.001f64..0.5, z0 in -5.0f64..5.0, off in -20i64..20) {
            let g = Grid { z_min: z0, r_min: 0.0, spacing: h, nz, nr, offset_cells: off };
            for (i, j, p) in g.centers() {
                prop_assert_eq!(g.index_of(p), Some((i, j)));
            }
        }
    }
}
