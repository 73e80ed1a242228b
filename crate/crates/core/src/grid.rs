//! Regular grids of evaluation points and scalar fields living on them.
//!
//! Grid points double as cell centers: point `i` represents the cell
//! `[point - h/2, point + h/2]^N`, so a field integrates as a cell sum.

use crate::error::{Error, Result};
use crate::geometry::{validate_point, AxisBox, Point};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Point,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Point, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        validate_point(&origin)?;
        if spacing <= 0.0 || !spacing.is_finite() {
            return Err(Error::invalid("grid.spacing", "must be positive"));
        }
        if shape.len() != origin.len() {
            return Err(Error::DimensionMismatch {
                expected: origin.len(),
                got: shape.len(),
            });
        }
        if shape.iter().any(|&s| s == 0) {
            return Err(Error::invalid("grid.shape", "extents must be positive"));
        }
        Ok(GridSpec {
            origin,
            spacing,
            shape,
        })
    }

    /// Centered grid helper: `n` points per axis spanning `[-half, half]^dim`.
    pub fn centered(dim: usize, half: f64, points_per_axis: usize) -> Self {
        let spacing = 2.0 * half / (points_per_axis - 1).max(1) as f64;
        GridSpec {
            origin: vec![-half; dim],
            spacing,
            shape: vec![points_per_axis; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn point(&self, flat: usize) -> Point {
        let mut idx = flat;
        let mut p = self.origin.clone();
        // row-major: last axis fastest
        for k in (0..self.dim()).rev() {
            let s = self.shape[k];
            p[k] += (idx % s) as f64 * self.spacing;
            idx /= s;
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Bounding box of the cells (half a spacing beyond the outer points).
    pub fn bounding_box(&self) -> AxisBox {
        let h = 0.5 * self.spacing;
        let min: Point = self.origin.iter().map(|c| c - h).collect();
        let max: Point = self
            .origin
            .iter()
            .zip(&self.shape)
            .map(|(c, &s)| c + (s - 1) as f64 * self.spacing + h)
            .collect();
        AxisBox { min, max }
    }

    /// Grid with the same coverage and halved spacing (each axis extent
    /// 2s-1 points).
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            origin: self.origin.clone(),
            spacing: 0.5 * self.spacing,
            shape: self.shape.iter().map(|&s| 2 * s - 1).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "field.values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![value; n],
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn has_non_finite(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }

    /// Cell-sum integral of `g(value)` over the grid's box.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let vol = self.grid.cell_volume();
        self.values.iter().map(|&v| g(v) * vol).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_indexing() {
        let g = GridSpec::new(vec![0.0, 0.0], 0.5, vec![3, 4]).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, 0.5]);
        assert_eq!(g.point(4), vec![0.5, 0.0]);
        assert_eq!(g.point(11), vec![1.0, 1.5]);
    }

    #[test]
    fn bounding_box_covers_cells() {
        let g = GridSpec::new(vec![-1.0, -1.0], 1.0, vec![3, 3]).unwrap();
        let b = g.bounding_box();
        assert_eq!(b.min, vec![-1.5, -1.5]);
        assert_eq!(b.max, vec![1.5, 1.5]);
        assert!((b.volume() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_preserves_coverage() {
        let g = GridSpec::new(vec![0.0, 0.0], 1.0, vec![5, 5]).unwrap();
        let r = g.refined();
        assert_eq!(r.shape, vec![9, 9]);
        let last = r.point(r.len() - 1);
        assert_eq!(last, g.point(g.len() - 1));
    }

    #[test]
    fn integrate_constant() {
        let g = GridSpec::new(vec![0.0, 0.0], 0.25, vec![4, 4]).unwrap();
        let f = ScalarField::constant(g, 2.0);
        assert!((f.integrate(|v| v) - 2.0).abs() < 1e-12);
    }
}
