//! Points, balls, axis-aligned boxes, and intersection volumes.
//!
//! The volume engine reduces an N-dimensional intersection of one box and a
//! set of balls to nested 1-D integrals of cross-sections: a slice of a ball
//! is a ball of reduced radius and a slice of a box is a box, so the
//! recursion closes. Dimension stays data, not a compile-time constant.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::special::ball_volume;

pub type Point = Vec<f64>;

pub fn validate_point(p: &[f64]) -> Result<()> {
    if p.len() < 2 {
        return Err(Error::invalid("point", "ambient dimension must be >= 2"));
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("point", "coordinates must be finite"));
    }
    Ok(())
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        dist2(&self.center, p) <= self.radius * self.radius
    }

    /// True iff `self` contains `other` entirely.
    pub fn contains_ball(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) + other.radius <= self.radius
    }

    pub fn disjoint_ball(&self, other: &Ball) -> bool {
        dist(&self.center, &other.center) >= self.radius + other.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub min: Point,
    pub max: Point,
}

impl AxisBox {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.iter().zip(&max).any(|(a, b)| a > b) {
            return Err(Error::invalid("box", "min must be <= max componentwise"));
        }
        Ok(AxisBox { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn volume(&self) -> f64 {
        self.min.iter().zip(&self.max).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(x, (a, b))| x >= a && x <= b)
    }

    pub fn center(&self) -> Point {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    /// Distance from `p` to the box (0 when inside).
    pub fn dist_to(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for (x, (a, b)) in p.iter().zip(self.min.iter().zip(&self.max)) {
            let d = if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                0.0
            };
            s += d * d;
        }
        s.sqrt()
    }

    /// Largest distance from `p` to a point of the box.
    pub fn max_dist_to(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for (x, (a, b)) in p.iter().zip(self.min.iter().zip(&self.max)) {
            let d = (x - a).abs().max((x - b).abs());
            s += d * d;
        }
        s.sqrt()
    }

    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let min: Point = self
            .min
            .iter()
            .zip(&other.min)
            .map(|(a, b)| a.max(*b))
            .collect();
        let max: Point = self
            .max
            .iter()
            .zip(&other.max)
            .map(|(a, b)| a.min(*b))
            .collect();
        if min.iter().zip(&max).any(|(a, b)| a > b) {
            None
        } else {
            Some(AxisBox { min, max })
        }
    }

    pub fn inflate(&self, margin: f64) -> AxisBox {
        AxisBox {
            min: self.min.iter().map(|a| a - margin).collect(),
            max: self.max.iter().map(|b| b + margin).collect(),
        }
    }
}

/// Volume of the intersection of an optional axis box with a collection of
/// balls, to relative tolerance `rel_tol`.
pub fn region_volume(dim: usize, bx: Option<&AxisBox>, balls: &[Ball], rel_tol: f64) -> f64 {
    // pairwise disjointness
    for (i, a) in balls.iter().enumerate() {
        if a.radius <= 0.0 {
            return 0.0;
        }
        for b in &balls[i + 1..] {
            if a.disjoint_ball(b) {
                return 0.0;
            }
        }
        if let Some(bx) = bx {
            if bx.dist_to(&a.center) >= a.radius {
                return 0.0;
            }
        }
    }

    // Drop balls that contain the bounding box of the other constraints.
    let mut active: Vec<&Ball> = balls.iter().collect();
    loop {
        let Some(bbox) = bounding_box(dim, bx, &active) else {
            return 0.0;
        };
        if let Some(bx) = bx {
            if active.is_empty() {
                return bx.volume();
            }
        }
        let mut dropped = false;
        for i in 0..active.len() {
            let others: Vec<&Ball> = active
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| *b)
                .collect();
            let redundant = if others.is_empty() && bx.is_none() {
                false
            } else {
                match bounding_box(dim, bx, &others) {
                    Some(inner) => active[i].center.len() == dim && {
                        // ball ⊇ bounding box of the rest
                        active[i].radius >= inner.max_dist_to(&active[i].center)
                    },
                    None => return 0.0,
                }
            };
            if redundant {
                active.remove(i);
                dropped = true;
                break;
            }
        }
        if !dropped {
            let _ = bbox;
            break;
        }
    }

    match (bx, active.len()) {
        (Some(b), 0) => return b.volume(),
        (None, 1) => return ball_volume(dim, active[0].radius),
        (None, 2) => {
            if active[0].contains_ball(active[1]) {
                return ball_volume(dim, active[1].radius);
            }
            if active[1].contains_ball(active[0]) {
                return ball_volume(dim, active[0].radius);
            }
        }
        _ => {}
    }

    let owned: Vec<Ball> = active.into_iter().cloned().collect();
    slice_volume(dim, bx, &owned, rel_tol)
}

fn bounding_box(dim: usize, bx: Option<&AxisBox>, balls: &[&Ball]) -> Option<AxisBox> {
    let mut min = vec![f64::NEG_INFINITY; dim];
    let mut max = vec![f64::INFINITY; dim];
    if let Some(b) = bx {
        min.clone_from_slice(&b.min);
        max.clone_from_slice(&b.max);
    }
    for ball in balls {
        for k in 0..dim {
            min[k] = min[k].max(ball.center[k] - ball.radius);
            max[k] = max[k].min(ball.center[k] + ball.radius);
        }
    }
    if min.iter().zip(&max).any(|(a, b)| a >= b) {
        return None;
    }
    Some(AxisBox { min, max })
}

/// Recursive slicing: integrate (dim-1)-volumes of cross-sections along the
/// first remaining axis.
fn slice_volume(dim: usize, bx: Option<&AxisBox>, balls: &[Ball], rel_tol: f64) -> f64 {
    if dim == 1 {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        if let Some(b) = bx {
            lo = b.min[0];
            hi = b.max[0];
        }
        for ball in balls {
            lo = lo.max(ball.center[0] - ball.radius);
            hi = hi.min(ball.center[0] + ball.radius);
        }
        return (hi - lo).max(0.0);
    }

    let refs: Vec<&Ball> = balls.iter().collect();
    let Some(bbox) = bounding_box(dim, bx, &refs) else {
        return 0.0;
    };
    let (lo, hi) = (bbox.min[0], bbox.max[0]);

    let cross = |z: f64| -> f64 {
        let sub_box = bx.map(|b| AxisBox {
            min: b.min[1..].to_vec(),
            max: b.max[1..].to_vec(),
        });
        let mut sub_balls = Vec::with_capacity(balls.len());
        for ball in balls {
            let dz = z - ball.center[0];
            let r2 = ball.radius * ball.radius - dz * dz;
            if r2 <= 0.0 {
                return 0.0;
            }
            sub_balls.push(Ball::new(ball.center[1..].to_vec(), r2.sqrt()));
        }
        region_volume(dim - 1, sub_box.as_ref(), &sub_balls, rel_tol)
    };

    // Breakpoints: ball extents, ball centers, box faces that fall inside.
    let mut cuts = vec![lo, hi];
    for ball in balls {
        for c in [
            ball.center[0] - ball.radius,
            ball.center[0],
            ball.center[0] + ball.radius,
        ] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * (1.0 + a.abs()));

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = cross(0.5 * (a + b));
        let tol = (mid * (b - a)).max(1e-300) * rel_tol;
        total += adaptive_simpson(&cross, a, b, tol);
    }
    total
}

/// A compact test set: a finite union of closed balls and boxes.
#[derive(Debug, Clone)]
pub struct CompactSet {
    pub dim: usize,
    pub balls: Vec<Ball>,
    pub boxes: Vec<AxisBox>,
}

impl CompactSet {
    pub fn empty(dim: usize) -> Self {
        CompactSet {
            dim,
            balls: Vec::new(),
            boxes: Vec::new(),
        }
    }

    pub fn single_ball(center: Point, radius: f64) -> Self {
        let dim = center.len();
        CompactSet {
            dim,
            balls: vec![Ball::new(center, radius)],
            boxes: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty() && self.boxes.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.balls.len() + self.boxes.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.balls.iter().any(|b| b.contains(p)) || self.boxes.iter().any(|b| b.contains(p))
    }

    pub fn bounding_box(&self) -> Option<AxisBox> {
        if self.is_empty() {
            return None;
        }
        let mut min = vec![f64::INFINITY; self.dim];
        let mut max = vec![f64::NEG_INFINITY; self.dim];
        for b in &self.balls {
            for k in 0..self.dim {
                min[k] = min[k].min(b.center[k] - b.radius);
                max[k] = max[k].max(b.center[k] + b.radius);
            }
        }
        for b in &self.boxes {
            for k in 0..self.dim {
                min[k] = min[k].min(b.min[k]);
                max[k] = max[k].max(b.max[k]);
            }
        }
        Some(AxisBox { min, max })
    }

    /// Sample points on component boundaries (constraint probes for the
    /// capacity minimization).
    pub fn boundary_samples(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for b in &self.balls {
            for k in 0..self.dim {
                for sign in [-1.0, 1.0] {
                    let mut p = b.center.clone();
                    p[k] += sign * b.radius;
                    out.push(p);
                }
            }
        }
        for b in &self.boxes {
            out.push(b.min.clone());
            out.push(b.max.clone());
            out.push(b.center());
            for k in 0..self.dim {
                let mut p = b.center();
                p[k] = b.min[k];
                out.push(p.clone());
                p[k] = b.max[k];
                out.push(p);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn full_ball_shortcut() {
        let b = Ball::new(vec![0.0, 0.0, 0.0], 1.0);
        let v = region_volume(3, None, &[b], 1e-10);
        assert!(rel(v, 4.0 * PI / 3.0) < 1e-14);
    }

    #[test]
    fn ball_contained_in_query() {
        let support = Ball::new(vec![0.0, 0.0, 0.0], 1.0);
        let query = Ball::new(vec![0.0, 0.0, 0.0], 2.0);
        let v = region_volume(3, None, &[support, query], 1e-10);
        assert!(rel(v, 4.0 * PI / 3.0) < 1e-14);
    }

    #[test]
    fn disjoint_balls() {
        let a = Ball::new(vec![0.0, 0.0], 1.0);
        let b = Ball::new(vec![3.0, 0.0], 1.0);
        assert_eq!(region_volume(2, None, &[a, b], 1e-10), 0.0);
    }

    #[test]
    fn lens_area_matches_closed_form() {
        // two unit disks, centers distance d apart:
        // A = 2 r^2 cos^{-1}(d/2r) - (d/2) sqrt(4r^2 - d^2)
        for d in [0.5, 1.0, 1.5] {
            let a = Ball::new(vec![0.0, 0.0], 1.0);
            let b = Ball::new(vec![d, 0.0], 1.0);
            let v = region_volume(2, None, &[a, b], 1e-11);
            let exact = 2.0 * (d / 2.0).acos() - (d / 2.0) * (4.0 - d * d).sqrt();
            assert!(rel(v, exact) < 1e-9, "d={d}: {v} vs {exact}");
        }
    }

    #[test]
    fn lens_volume_3d_matches_closed_form() {
        // two unit balls in R^3 at distance d: V = π (2r - d/2)^2 (d/2 + 2r - ... )
        // standard form: V = π (4r + d)(2r - d)^2 / 12 for equal radii
        for d in [0.5, 1.0, 1.8] {
            let a = Ball::new(vec![0.0, 0.0, 0.0], 1.0);
            let b = Ball::new(vec![0.0, 0.0, d], 1.0);
            let v = region_volume(3, None, &[a, b], 1e-11);
            let exact = PI * (4.0 + d) * (2.0 - d) * (2.0 - d) / 12.0;
            assert!(rel(v, exact) < 1e-9, "d={d}: {v} vs {exact}");
        }
    }

    #[test]
    fn half_ball_via_box() {
        let ball = Ball::new(vec![0.0, 0.0, 0.0], 1.0);
        let bx = AxisBox::new(vec![0.0, -2.0, -2.0], vec![2.0, 2.0, 2.0]).unwrap();
        let v = region_volume(3, Some(&bx), &[ball], 1e-11);
        assert!(rel(v, 2.0 * PI / 3.0) < 1e-9);
    }

    #[test]
    fn box_ball_full_containment() {
        let ball = Ball::new(vec![0.5, 0.5], 0.25);
        let bx = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let v = region_volume(2, Some(&bx), &[ball], 1e-11);
        assert!(rel(v, PI * 0.0625) < 1e-9);
    }

    #[test]
    fn box_quarter_disk() {
        let ball = Ball::new(vec![0.0, 0.0], 1.0);
        let bx = AxisBox::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let v = region_volume(2, Some(&bx), &[ball], 1e-11);
        assert!(rel(v, PI / 4.0) < 1e-9);
    }

    #[test]
    fn compact_set_membership() {
        let e = CompactSet {
            dim: 2,
            balls: vec![Ball::new(vec![0.0, 0.0], 1.0)],
            boxes: vec![AxisBox::new(vec![2.0, 2.0], vec![3.0, 3.0]).unwrap()],
        };
        assert!(e.contains(&[0.5, 0.0]));
        assert!(e.contains(&[2.5, 2.5]));
        assert!(!e.contains(&[1.5, 1.5]));
        assert!(!CompactSet::empty(2).contains(&[0.0, 0.0]));
    }
}
