//! The Bessel kernel G_α (Fourier symbol (1+|ξ|²)^{−α/2}) and its potential.
//!
//! G_α is evaluated radially from the subordination integral
//!   G_α(z) = (4π)^{−α/2} / Γ(α/2) ∫_0^∞ e^{−π|z|²/s − s/(4π)} s^{(α−N)/2} ds/s,
//! normalized so that ∫ G_α = 1.

use crate::error::{Error, Result};
use crate::geometry::{dist, AxisBox, Ball};
use crate::grid::GridSpec;
use crate::measure::{Component, Measure};
use crate::quad::adaptive_simpson;
use crate::special::{ln_gamma, unit_ball_volume};
use std::f64::consts::PI;

/// Cells per axis when a continuous component is collapsed to a grid sum.
const DENSITY_RASTER: usize = 33;

#[derive(Debug, Clone)]
pub struct BesselKernel {
    pub n: usize,
    pub alpha: f64,
    ln_norm: f64,
}

impl BesselKernel {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("n", "ambient dimension must be >= 2"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", "Bessel order must be positive"));
        }
        let ln_norm = -(alpha / 2.0) * (4.0 * PI).ln() - ln_gamma(alpha / 2.0);
        Ok(BesselKernel { n, alpha, ln_norm })
    }

    /// G_α at radius `r` (+∞ at r = 0 when α ≤ N).
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        if r == 0.0 && self.alpha <= self.n as f64 {
            return f64::INFINITY;
        }
        if r >= 60.0 {
            // decay is e^{-r}; below every tolerance in use
            return 0.0;
        }
        let half = 0.5 * (self.alpha - self.n as f64);
        let pr2 = PI * r * r;
        let g = |u: f64| {
            let s = u.exp();
            (-pr2 / s - s / (4.0 * PI) + half * u + self.ln_norm).exp()
        };
        let u_hi = (4.0 * PI * (120.0 + 40.0 * half.abs())).ln();
        let u_lo = if r > 0.0 {
            // below s = πr²/45 the Gaussian factor is under e^{−45}
            (pr2 / 45.0).ln().min(u_hi - 1.0)
        } else {
            -700.0 / (1.0 + half.abs())
        };
        let mut scale = 0.0_f64;
        const SCAN: usize = 128;
        for i in 0..=SCAN {
            let u = u_lo + (u_hi - u_lo) * i as f64 / SCAN as f64;
            scale = scale.max(g(u));
        }
        if scale == 0.0 {
            return 0.0;
        }
        let tol = scale * (u_hi - u_lo) * 1e-10;
        adaptive_simpson(&g, u_lo, u_hi, tol)
    }

    /// Average of the kernel over a ball of the same volume as a grid cell;
    /// the self-interaction weight when the kernel is collapsed to cells.
    pub fn cell_average(&self, cell_volume: f64) -> f64 {
        let rho = (cell_volume / unit_ball_volume(self.n)).powf(1.0 / self.n as f64);
        self.radial_integral(rho) / cell_volume
    }

    /// ∫_{B_ρ} G_α dz by graded radial quadrature.
    pub fn radial_integral(&self, rho: f64) -> f64 {
        let n = self.n as f64;
        let surf = n * unit_ball_volume(self.n);
        let f = |r: f64| self.eval(r) * surf * r.powf(n - 1.0);
        let mut total = 0.0;
        let mut hi = rho;
        // geometric grading toward the r^{α−1} singularity at 0
        for _ in 0..40 {
            let lo = hi / 4.0;
            let mid = f(0.5 * (lo + hi));
            total += adaptive_simpson(&f, lo, hi, (mid * (hi - lo)).max(1e-300) * 1e-9);
            hi = lo;
            if hi < 1e-14 * rho {
                break;
            }
        }
        total
    }

    /// ∫_{R^N} G_α, by radial quadrature (equals 1 up to quadrature error).
    pub fn total_integral(&self) -> f64 {
        let n = self.n as f64;
        let surf = n * unit_ball_volume(self.n);
        let f = |r: f64| self.eval(r) * surf * r.powf(n - 1.0);
        let mut total = self.radial_integral(1.0);
        let mut lo = 1.0;
        for _ in 0..20 {
            let hi = lo * 2.0;
            let mid = f(0.5 * (lo + hi));
            let piece = adaptive_simpson(&f, lo, hi, (mid * (hi - lo)).max(1e-300) * 1e-9);
            total += piece;
            if piece < 1e-12 * total {
                break;
            }
            lo = hi;
        }
        total
    }
}

/// (G_α ∗ m)(x): finite sum over atoms, grid sum over densities.
pub fn bessel_potential(m: &Measure, alpha: f64, x: &[f64]) -> f64 {
    let kernel = BesselKernel::new(m.dim(), alpha).expect("bessel parameters");
    let mut total = 0.0;
    for c in m.components() {
        total += match c {
            Component::Atomic { atoms } => atoms
                .iter()
                .map(|(p, mass)| mass * kernel.eval(dist(p, x)))
                .sum(),
            Component::GridDensity { grid, values } => grid_sum(&kernel, grid, values, x),
            Component::BallUniform { support, density } => {
                let (grid, values) = raster_ball(support, *density, m.dim());
                grid_sum(&kernel, &grid, &values, x)
            }
            Component::UniformBox { support, density } => {
                let (grid, values) = raster_box(support, *density);
                grid_sum(&kernel, &grid, &values, x)
            }
        };
        if total.is_infinite() {
            return f64::INFINITY;
        }
    }
    total
}

fn grid_sum(kernel: &BesselKernel, grid: &GridSpec, values: &[f64], x: &[f64]) -> f64 {
    let vol = grid.cell_volume();
    let half = 0.5 * grid.spacing;
    let mut own_avg = None;
    let mut total = 0.0;
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            continue;
        }
        let p = grid.point(i);
        let r = dist(&p, x);
        let w = if r < half {
            *own_avg.get_or_insert_with(|| kernel.cell_average(vol))
        } else {
            kernel.eval(r)
        };
        total += values[i] * vol * w;
    }
    total
}

fn raster_ball(support: &Ball, density: f64, dim: usize) -> (GridSpec, Vec<f64>) {
    let spacing = 2.0 * support.radius / DENSITY_RASTER as f64;
    let origin: Vec<f64> = support
        .center
        .iter()
        .map(|c| c - support.radius + 0.5 * spacing)
        .collect();
    let grid = GridSpec {
        origin,
        spacing,
        shape: vec![DENSITY_RASTER; dim],
    };
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            if support.contains(&grid.point(i)) {
                density
            } else {
                0.0
            }
        })
        .collect();
    (grid, values)
}

fn raster_box(support: &AxisBox, density: f64) -> (GridSpec, Vec<f64>) {
    let longest = support
        .min
        .iter()
        .zip(&support.max)
        .map(|(a, b)| b - a)
        .fold(0.0_f64, f64::max);
    let spacing = longest / DENSITY_RASTER as f64;
    let shape: Vec<usize> = support
        .min
        .iter()
        .zip(&support.max)
        .map(|(a, b)| (((b - a) / spacing).round() as usize).max(1))
        .collect();
    let origin: Vec<f64> = support.min.iter().map(|a| a + 0.5 * spacing).collect();
    let grid = GridSpec {
        origin,
        spacing,
        shape,
    };
    let n = grid.len();
    (grid, vec![density; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn kernel_integrates_to_one() {
        for (n, alpha) in [(2, 1.0), (3, 2.0), (3, 1.0), (2, 0.5)] {
            let k = BesselKernel::new(n, alpha).unwrap();
            let total = k.total_integral();
            assert!(rel(total, 1.0) < 1e-6, "n={n} α={alpha}: {total}");
        }
    }

    #[test]
    fn kernel_behaves_like_riesz_near_zero() {
        // G_α(z) / |z|^{−(N−α)} stays bounded as z → 0 for α < N
        let k = BesselKernel::new(3, 1.0).unwrap();
        let ratio1 = k.eval(1e-3) / 1e-3_f64.powf(-2.0);
        let ratio2 = k.eval(1e-5) / 1e-5_f64.powf(-2.0);
        assert!(ratio1.is_finite() && ratio1 > 0.0);
        assert!(rel(ratio1, ratio2) < 0.05, "{ratio1} vs {ratio2}");
    }

    #[test]
    fn kernel_decays_fast() {
        let k = BesselKernel::new(2, 1.0).unwrap();
        assert!(k.eval(20.0) < 1e-8);
        assert!(k.eval(1.0) > k.eval(2.0));
    }

    #[test]
    fn potential_of_zero_measure() {
        let z = Measure::zero(3);
        assert_eq!(bessel_potential(&z, 2.0, &[0.0; 3]), 0.0);
    }

    #[test]
    fn potential_diverges_at_atom() {
        let m = Measure::dirac(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(bessel_potential(&m, 2.0, &[0.0; 3]), f64::INFINITY);
        assert!(bessel_potential(&m, 2.0, &[0.5, 0.0, 0.0]).is_finite());
    }

    #[test]
    fn cell_average_is_finite_and_dominates_far_field() {
        let k = BesselKernel::new(2, 1.0).unwrap();
        let avg = k.cell_average(0.01);
        assert!(avg.is_finite() && avg > k.eval(0.5));
    }
}
