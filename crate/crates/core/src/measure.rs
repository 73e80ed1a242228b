//! Nonnegative Radon measures on R^N in computable form.
//!
//! A measure is a finite sum of components: atoms, a uniform density on a
//! ball, a piecewise-constant density on a regular grid, and a constant
//! background density on a box. The one primitive everything else needs is
//! the open-ball mass t ↦ μ(B_t(x)); `MassProfile` exposes its structure
//! (jump radii and smooth pieces) so the potential kernels can integrate it
//! piecewise instead of sampling blindly.

use crate::error::{Error, Result};
use crate::geometry::{dist, region_volume, validate_point, AxisBox, Ball, CompactSet, Point};
use crate::grid::GridSpec;
use crate::special::unit_ball_volume;

/// Relative tolerance for intersection volumes.
const VOL_TOL: f64 = 1e-10;
/// Cells per axis when a restriction forces rasterization of a continuous
/// component.
const RESTRICT_RASTER: usize = 65;

#[derive(Debug, Clone)]
pub enum Component {
    Atomic {
        atoms: Vec<(Point, f64)>,
    },
    BallUniform {
        support: Ball,
        density: f64,
    },
    GridDensity {
        grid: GridSpec,
        values: Vec<f64>,
    },
    /// Constant background density on a bounding box; houses the lifted
    /// constants of the solver's majorant measures.
    UniformBox {
        support: AxisBox,
        density: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Measure {
    dim: usize,
    components: Vec<Component>,
}

impl Measure {
    pub fn zero(dim: usize) -> Self {
        Measure {
            dim,
            components: Vec::new(),
        }
    }

    pub fn atomic(dim: usize, atoms: Vec<(Point, f64)>) -> Result<Self> {
        for (p, m) in &atoms {
            validate_point(p)?;
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if *m < 0.0 || !m.is_finite() {
                return Err(Error::invalid("atom.mass", "must be finite and >= 0"));
            }
        }
        Ok(Measure {
            dim,
            components: vec![Component::Atomic { atoms }],
        })
    }

    pub fn dirac(location: Point, mass: f64) -> Result<Self> {
        let dim = location.len();
        Measure::atomic(dim, vec![(location, mass)])
    }

    pub fn ball_uniform(center: Point, radius: f64, density: f64) -> Result<Self> {
        validate_point(&center)?;
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::invalid("ball.radius", "must be positive"));
        }
        if density < 0.0 || !density.is_finite() {
            return Err(Error::invalid("ball.density", "must be finite and >= 0"));
        }
        let dim = center.len();
        Ok(Measure {
            dim,
            components: vec![Component::BallUniform {
                support: Ball::new(center, radius),
                density,
            }],
        })
    }

    pub fn grid_density(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "grid_density.values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::invalid(
                "grid_density.values",
                "densities must be finite and >= 0",
            ));
        }
        let dim = grid.dim();
        Ok(Measure {
            dim,
            components: vec![Component::GridDensity { grid, values }],
        })
    }

    pub fn uniform_box(support: AxisBox, density: f64) -> Result<Self> {
        if density < 0.0 || !density.is_finite() {
            return Err(Error::invalid("box.density", "must be finite and >= 0"));
        }
        let dim = support.dim();
        Ok(Measure {
            dim,
            components: vec![Component::UniformBox { support, density }],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// Sum measure: ball masses add componentwise.
    pub fn add(&self, other: &Measure) -> Result<Measure> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(Measure {
            dim: self.dim,
            components,
        })
    }

    pub fn scale(&self, factor: f64) -> Measure {
        assert!(factor >= 0.0 && factor.is_finite());
        let components = self
            .components
            .iter()
            .map(|c| match c {
                Component::Atomic { atoms } => Component::Atomic {
                    atoms: atoms.iter().map(|(p, m)| (p.clone(), m * factor)).collect(),
                },
                Component::BallUniform { support, density } => Component::BallUniform {
                    support: support.clone(),
                    density: density * factor,
                },
                Component::GridDensity { grid, values } => Component::GridDensity {
                    grid: grid.clone(),
                    values: values.iter().map(|v| v * factor).collect(),
                },
                Component::UniformBox { support, density } => Component::UniformBox {
                    support: support.clone(),
                    density: density * factor,
                },
            })
            .collect();
        Measure {
            dim: self.dim,
            components,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match c {
                Component::Atomic { atoms } => atoms.iter().map(|(_, m)| m).sum(),
                Component::BallUniform { support, density } => {
                    density * unit_ball_volume(self.dim) * support.radius.powi(self.dim as i32)
                }
                Component::GridDensity { grid, values } => {
                    let vol = grid.cell_volume();
                    values.iter().map(|v| v * vol).sum()
                }
                Component::UniformBox { support, density } => density * support.volume(),
            })
            .sum()
    }

    /// Mass of the open ball B_t(x).
    ///
    /// Exact for atoms (strict inequality membership) and within quadrature
    /// tolerance for continuous densities; grid densities follow the
    /// cell-center inclusion rule.
    pub fn ball_mass(&self, x: &[f64], t: f64) -> f64 {
        assert!(t > 0.0, "ball_mass requires t > 0");
        let query = Ball::new(x.to_vec(), t);
        self.components
            .iter()
            .map(|c| match c {
                Component::Atomic { atoms } => atoms
                    .iter()
                    .filter(|(p, _)| dist(p, x) < t)
                    .map(|(_, m)| m)
                    .sum(),
                Component::BallUniform { support, density } => {
                    if *density == 0.0 {
                        0.0
                    } else {
                        density
                            * region_volume(
                                self.dim,
                                None,
                                &[support.clone(), query.clone()],
                                VOL_TOL,
                            )
                    }
                }
                Component::GridDensity { grid, values } => {
                    let vol = grid.cell_volume();
                    let mut sum = 0.0;
                    for_cells_in_ball(grid, x, t, |flat, center| {
                        if dist(&center, x) < t {
                            sum += values[flat] * vol;
                        }
                    });
                    sum
                }
                Component::UniformBox { support, density } => {
                    if *density == 0.0 {
                        0.0
                    } else {
                        density
                            * region_volume(
                                self.dim,
                                Some(support),
                                std::slice::from_ref(&query),
                                VOL_TOL,
                            )
                    }
                }
            })
            .sum()
    }

    /// Restriction to the open ball B_r(center). Atoms are filtered and grid
    /// cells masked by the center rule; a continuous component cut by the
    /// ball is rasterized onto a grid density.
    pub fn restrict(&self, center: &[f64], r: f64) -> Measure {
        assert!(r > 0.0, "restrict requires r > 0");
        let window = Ball::new(center.to_vec(), r);
        let mut components = Vec::new();
        for c in &self.components {
            match c {
                Component::Atomic { atoms } => {
                    let kept: Vec<(Point, f64)> = atoms
                        .iter()
                        .filter(|(p, _)| dist(p, center) < r)
                        .cloned()
                        .collect();
                    if !kept.is_empty() {
                        components.push(Component::Atomic { atoms: kept });
                    }
                }
                Component::GridDensity { grid, values } => {
                    let masked: Vec<f64> = (0..grid.len())
                        .map(|i| {
                            if dist(&grid.point(i), center) < r {
                                values[i]
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    if masked.iter().any(|v| *v > 0.0) {
                        components.push(Component::GridDensity {
                            grid: grid.clone(),
                            values: masked,
                        });
                    }
                }
                Component::BallUniform { support, density } => {
                    if *density == 0.0 || window.disjoint_ball(support) {
                        continue;
                    }
                    if window.contains_ball(support) {
                        components.push(c.clone());
                    } else {
                        let bbox = AxisBox {
                            min: support
                                .center
                                .iter()
                                .map(|v| v - support.radius)
                                .collect(),
                            max: support
                                .center
                                .iter()
                                .map(|v| v + support.radius)
                                .collect(),
                        };
                        components.push(rasterize(&bbox, *density, &window, |p| {
                            support.contains(p)
                        }));
                    }
                }
                Component::UniformBox { support, density } => {
                    if *density == 0.0 || support.dist_to(center) >= r {
                        continue;
                    }
                    if support.max_dist_to(center) < r {
                        components.push(c.clone());
                    } else {
                        components.push(rasterize(support, *density, &window, |p| {
                            support.contains(p)
                        }));
                    }
                }
            }
        }
        Measure {
            dim: self.dim,
            components,
        }
    }

    /// Bounding box of the support (None for the zero measure).
    pub fn support_box(&self) -> Option<AxisBox> {
        let mut min = vec![f64::INFINITY; self.dim];
        let mut max = vec![f64::NEG_INFINITY; self.dim];
        let mut any = false;
        let mut take = |lo: Vec<f64>, hi: Vec<f64>| {
            for k in 0..lo.len() {
                min[k] = min[k].min(lo[k]);
                max[k] = max[k].max(hi[k]);
            }
            any = true;
        };
        for c in &self.components {
            match c {
                Component::Atomic { atoms } => {
                    for (p, m) in atoms {
                        if *m > 0.0 {
                            take(p.clone(), p.clone());
                        }
                    }
                }
                Component::BallUniform { support, density } => {
                    if *density > 0.0 {
                        take(
                            support
                                .center
                                .iter()
                                .map(|v| v - support.radius)
                                .collect(),
                            support
                                .center
                                .iter()
                                .map(|v| v + support.radius)
                                .collect(),
                        );
                    }
                }
                Component::GridDensity { grid, values } => {
                    if values.iter().any(|v| *v > 0.0) {
                        let b = grid.bounding_box();
                        take(b.min, b.max);
                    }
                }
                Component::UniformBox { support, density } => {
                    if *density > 0.0 {
                        take(support.min.clone(), support.max.clone());
                    }
                }
            }
        }
        if any {
            Some(AxisBox { min, max })
        } else {
            None
        }
    }

    /// Locations of point masses (used by sup-norm probes: the maximal
    /// potential diverges there).
    pub fn atom_locations(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for c in &self.components {
            if let Component::Atomic { atoms } = c {
                out.extend(atoms.iter().filter(|(_, m)| *m > 0.0).map(|(p, _)| p.clone()));
            }
        }
        out
    }

    /// μ(E) for a finite union of balls and boxes, by inclusion-exclusion
    /// over the union's components.
    pub fn mass_of_set(&self, set: &CompactSet) -> Result<f64> {
        if set.is_empty() {
            return Ok(0.0);
        }
        let n_comp = set.component_count();
        if n_comp > 12 {
            return Err(Error::invalid(
                "set",
                "inclusion-exclusion supports at most 12 components",
            ));
        }
        let mut total = 0.0;
        for c in &self.components {
            match c {
                Component::Atomic { atoms } => {
                    total += atoms
                        .iter()
                        .filter(|(p, _)| set.contains(p))
                        .map(|(_, m)| m)
                        .sum::<f64>();
                }
                Component::GridDensity { grid, values } => {
                    let vol = grid.cell_volume();
                    for i in 0..grid.len() {
                        if values[i] > 0.0 && set.contains(&grid.point(i)) {
                            total += values[i] * vol;
                        }
                    }
                }
                Component::BallUniform { support, density } => {
                    if *density > 0.0 {
                        total +=
                            density * union_intersection_volume(self.dim, set, None, Some(support));
                    }
                }
                Component::UniformBox { support, density } => {
                    if *density > 0.0 {
                        total +=
                            density * union_intersection_volume(self.dim, set, Some(support), None);
                    }
                }
            }
        }
        Ok(total)
    }

    /// Structure of t ↦ μ(B_t(x)) for the potential integrators.
    pub fn mass_profile(&self, x: &[f64], rule: GridRule) -> MassProfile {
        let mut steps: Vec<(f64, f64)> = Vec::new();
        let mut mass_at_zero = 0.0;
        let mut smooth: Vec<SmoothPart> = Vec::new();

        for c in &self.components {
            match c {
                Component::Atomic { atoms } => {
                    for (p, m) in atoms {
                        if *m == 0.0 {
                            continue;
                        }
                        let d = dist(p, x);
                        if d == 0.0 {
                            mass_at_zero += m;
                        } else {
                            steps.push((d, *m));
                        }
                    }
                }
                Component::GridDensity { grid, values } => {
                    let vol = grid.cell_volume();
                    let own = match rule {
                        GridRule::CellCenter => None,
                        GridRule::OwnCellExact => cell_of(grid, x),
                    };
                    for i in 0..grid.len() {
                        if values[i] == 0.0 {
                            continue;
                        }
                        if Some(i) == own {
                            continue;
                        }
                        let d = dist(&grid.point(i), x);
                        if d == 0.0 {
                            mass_at_zero += values[i] * vol;
                        } else {
                            steps.push((d, values[i] * vol));
                        }
                    }
                    if let Some(i) = own {
                        if values[i] > 0.0 {
                            let center = grid.point(i);
                            let h = 0.5 * grid.spacing;
                            let cell = AxisBox {
                                min: center.iter().map(|v| v - h).collect(),
                                max: center.iter().map(|v| v + h).collect(),
                            };
                            smooth.push(SmoothPart::for_box(x, &cell, values[i]));
                        }
                    }
                }
                Component::BallUniform { support, density } => {
                    if *density > 0.0 {
                        smooth.push(SmoothPart::for_ball(x, support, *density, self.dim));
                    }
                }
                Component::UniformBox { support, density } => {
                    if *density > 0.0 {
                        smooth.push(SmoothPart::for_box(x, support, *density));
                    }
                }
            }
        }

        steps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        MassProfile {
            dim: self.dim,
            steps,
            mass_at_zero,
            smooth,
        }
    }
}

/// Which ball-mass model a grid density uses inside potential integrals.
///
/// `CellCenter` is the plain counting rule. `OwnCellExact` additionally
/// replaces the cell containing the evaluation point by its exact
/// ball-overlap volume; without this the t-integral of a grid density
/// diverges spuriously at its own grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridRule {
    CellCenter,
    OwnCellExact,
}

fn cell_of(grid: &GridSpec, x: &[f64]) -> Option<usize> {
    let mut flat = 0usize;
    for k in 0..grid.dim() {
        let rel = (x[k] - grid.origin[k]) / grid.spacing;
        let idx = rel.round();
        if idx < 0.0 || idx >= grid.shape[k] as f64 || (rel - idx).abs() > 0.5 {
            return None;
        }
        flat = flat * grid.shape[k] + idx as usize;
    }
    Some(flat)
}

/// Visit grid cells whose centers can lie in B_t(x); calls `f(flat, center)`.
fn for_cells_in_ball(grid: &GridSpec, x: &[f64], t: f64, mut f: impl FnMut(usize, Point)) {
    let dim = grid.dim();
    let mut lo = vec![0usize; dim];
    let mut hi = vec![0usize; dim];
    for k in 0..dim {
        let a = ((x[k] - t - grid.origin[k]) / grid.spacing).floor().max(0.0);
        let b = ((x[k] + t - grid.origin[k]) / grid.spacing).ceil();
        if b < 0.0 || a >= grid.shape[k] as f64 {
            return;
        }
        lo[k] = a as usize;
        hi[k] = (b as usize).min(grid.shape[k] - 1);
    }
    let mut idx = lo.clone();
    loop {
        let mut flat = 0usize;
        let mut center = vec![0.0; dim];
        for k in 0..dim {
            flat = flat * grid.shape[k] + idx[k];
            center[k] = grid.origin[k] + idx[k] as f64 * grid.spacing;
        }
        f(flat, center);
        // advance multi-index
        let mut k = dim;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if idx[k] < hi[k] {
                idx[k] += 1;
                for j in k + 1..dim {
                    idx[j] = lo[j];
                }
                break;
            }
        }
    }
}

fn rasterize(
    support_bbox: &AxisBox,
    density: f64,
    window: &Ball,
    in_support: impl Fn(&[f64]) -> bool,
) -> Component {
    let dim = support_bbox.dim();
    let longest = support_bbox
        .min
        .iter()
        .zip(&support_bbox.max)
        .map(|(a, b)| b - a)
        .fold(0.0_f64, f64::max);
    let spacing = longest / RESTRICT_RASTER as f64;
    let shape: Vec<usize> = support_bbox
        .min
        .iter()
        .zip(&support_bbox.max)
        .map(|(a, b)| (((b - a) / spacing).ceil() as usize).max(1))
        .collect();
    let origin: Point = support_bbox.min.iter().map(|a| a + 0.5 * spacing).collect();
    let grid = GridSpec {
        origin,
        spacing,
        shape,
    };
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            if in_support(&p) && dist(&p, &window.center) < window.radius {
                density
            } else {
                0.0
            }
        })
        .collect();
    let _ = dim;
    Component::GridDensity { grid, values }
}

fn union_intersection_volume(
    dim: usize,
    set: &CompactSet,
    support_box: Option<&AxisBox>,
    support_ball: Option<&Ball>,
) -> f64 {
    // inclusion-exclusion over the union's components
    #[derive(Clone)]
    enum Comp {
        Ball(Ball),
        Box(AxisBox),
    }
    let comps: Vec<Comp> = set
        .balls
        .iter()
        .cloned()
        .map(Comp::Ball)
        .chain(set.boxes.iter().cloned().map(Comp::Box))
        .collect();
    let n = comps.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut boxes: Vec<AxisBox> = support_box.cloned().into_iter().collect();
        let mut balls: Vec<Ball> = support_ball.cloned().into_iter().collect();
        for (j, comp) in comps.iter().enumerate() {
            if mask & (1 << j) != 0 {
                match comp {
                    Comp::Ball(b) => balls.push(b.clone()),
                    Comp::Box(b) => boxes.push(b.clone()),
                }
            }
        }
        let folded_box = match boxes.split_first() {
            None => None,
            Some((first, rest)) => {
                let mut acc = Some(first.clone());
                for b in rest {
                    acc = acc.and_then(|a| a.intersect(b));
                }
                match acc {
                    Some(b) => Some(b),
                    None => continue, // empty intersection term
                }
            }
        };
        let v = region_volume(dim, folded_box.as_ref(), &balls, VOL_TOL);
        let sign = if mask.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * v;
    }
    total.max(0.0)
}

/// Structure of t ↦ μ(B_t(x)) for fixed x: pure jumps plus smooth parts.
#[derive(Debug, Clone)]
pub struct MassProfile {
    dim: usize,
    /// (radius, mass added there), sorted by radius, radii > 0.
    pub steps: Vec<(f64, f64)>,
    /// Mass sitting exactly at x: forces divergence of every potential.
    pub mass_at_zero: f64,
    pub smooth: Vec<SmoothPart>,
}

/// One continuous component seen from x.
#[derive(Debug, Clone)]
pub struct SmoothPart {
    /// Mass is zero for t <= activation.
    pub activation: f64,
    /// For activation == 0 and t <= full_ball_until, mass = density·|B_1|·t^N.
    pub full_ball_until: f64,
    /// Mass equals `total` for t >= saturation.
    pub saturation: f64,
    pub total: f64,
    pub density: f64,
    kind: SmoothKind,
    x: Point,
}

#[derive(Debug, Clone)]
enum SmoothKind {
    BallSupport(Ball),
    BoxSupport(AxisBox),
}

impl SmoothPart {
    fn for_ball(x: &[f64], support: &Ball, density: f64, dim: usize) -> SmoothPart {
        let d = dist(x, &support.center);
        let (activation, full_ball_until) = if d < support.radius {
            (0.0, support.radius - d)
        } else {
            (d - support.radius, 0.0)
        };
        SmoothPart {
            activation,
            full_ball_until,
            saturation: d + support.radius,
            total: density * unit_ball_volume(dim) * support.radius.powi(dim as i32),
            density,
            kind: SmoothKind::BallSupport(support.clone()),
            x: x.to_vec(),
        }
    }

    fn for_box(x: &[f64], support: &AxisBox, density: f64) -> SmoothPart {
        let d = support.dist_to(x);
        let full_ball_until = if d == 0.0 {
            // nearest face distance from inside
            x.iter()
                .zip(support.min.iter().zip(&support.max))
                .map(|(v, (a, b))| (v - a).min(b - v))
                .fold(f64::INFINITY, f64::min)
        } else {
            0.0
        };
        SmoothPart {
            activation: d,
            full_ball_until,
            saturation: support.max_dist_to(x),
            total: density * support.volume(),
            density,
            kind: SmoothKind::BoxSupport(support.clone()),
            x: x.to_vec(),
        }
    }

    pub fn mass(&self, t: f64, dim: usize) -> f64 {
        if t <= self.activation {
            return 0.0;
        }
        if t >= self.saturation {
            return self.total;
        }
        if self.activation == 0.0 && t <= self.full_ball_until {
            return self.density * unit_ball_volume(dim) * t.powi(dim as i32);
        }
        let query = Ball::new(self.x.clone(), t);
        match &self.kind {
            SmoothKind::BallSupport(b) => {
                self.density * region_volume(dim, None, &[b.clone(), query], VOL_TOL)
            }
            SmoothKind::BoxSupport(b) => {
                self.density * region_volume(dim, Some(b), std::slice::from_ref(&query), VOL_TOL)
            }
        }
    }

    /// True when the part contributes density·|B_1|·t^N on the whole of (a, b].
    pub fn is_full_ball_on(&self, a: f64, b: f64) -> bool {
        self.activation == 0.0 && b <= self.full_ball_until && a >= 0.0
    }

    /// True when the part is constant on (a, b].
    pub fn is_flat_on(&self, a: f64, b: f64) -> bool {
        b <= self.activation || a >= self.saturation
    }

    pub fn flat_value(&self, a: f64) -> f64 {
        if a >= self.saturation {
            self.total
        } else {
            0.0
        }
    }
}

impl MassProfile {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total mass of the profile's components.
    pub fn total(&self) -> f64 {
        self.mass_at_zero
            + self.steps.iter().map(|(_, m)| m).sum::<f64>()
            + self.smooth.iter().map(|s| s.total).sum::<f64>()
    }

    /// μ(B_t(x)) under this profile's grid rule.
    pub fn mass(&self, t: f64) -> f64 {
        let step_mass: f64 = self
            .steps
            .iter()
            .take_while(|(r, _)| *r < t)
            .map(|(_, m)| m)
            .sum();
        let smooth_mass: f64 = self.smooth.iter().map(|s| s.mass(t, self.dim)).sum();
        self.mass_at_zero + step_mass + smooth_mass
    }

    /// All radii in (0, t_max) where the profile changes regime, sorted and
    /// deduplicated, with t_max appended.
    pub fn breakpoints(&self, t_max: f64) -> Vec<f64> {
        let mut cuts: Vec<f64> = Vec::with_capacity(self.steps.len() + 4);
        for (r, _) in &self.steps {
            if *r < t_max {
                cuts.push(*r);
            }
        }
        for s in &self.smooth {
            for c in [s.activation, s.full_ball_until, s.saturation] {
                if c > 0.0 && c < t_max {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * 4.0 * b.abs());
        cuts.push(t_max);
        cuts
    }

    /// First radius with positive mass (INFINITY for the zero profile).
    pub fn onset(&self) -> f64 {
        if self.mass_at_zero > 0.0 {
            return 0.0;
        }
        let step = self.steps.first().map(|(r, _)| *r).unwrap_or(f64::INFINITY);
        let smooth = self
            .smooth
            .iter()
            .map(|s| s.activation)
            .fold(f64::INFINITY, f64::min);
        step.min(smooth)
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
    fn atom_strictly_inside_counts() {
        let m = Measure::dirac(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(m.ball_mass(&[0.0, 0.0, 0.0], 0.5), 1.0);
    }

    #[test]
    fn open_ball_excludes_boundary_atom() {
        let m = Measure::dirac(vec![0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(m.ball_mass(&[0.5, 0.0, 0.0], 0.5), 0.0);
    }

    #[test]
    fn full_ball_uniform_mass() {
        // oracle: |B_1| r^N = 4π/3 for N = 3, r = 1
        let m = Measure::ball_uniform(vec![0.0, 0.0, 0.0], 1.0, 1.0).unwrap();
        let v = m.ball_mass(&[0.0, 0.0, 0.0], 2.0);
        assert!(rel(v, 4.0 * PI / 3.0) < 1e-12);
        assert!(rel(m.total_mass(), 4.0 * PI / 3.0) < 1e-12);
    }

    #[test]
    fn grid_density_cell_center_rule() {
        let grid = GridSpec::new(vec![0.0, 0.0], 1.0, vec![3, 3]).unwrap();
        let m = Measure::grid_density(grid, vec![1.0; 9]).unwrap();
        // t = 1.1 around the middle point (1,1): centers at distance 0 and 1 count
        let v = m.ball_mass(&[1.0, 1.0], 1.1);
        assert!(rel(v, 5.0) < 1e-12);
        // t = 0.5: only the own center
        assert!(rel(m.ball_mass(&[1.0, 1.0], 0.5), 1.0) < 1e-12);
    }

    #[test]
    fn add_is_identity_with_zero() {
        let m = Measure::dirac(vec![0.0, 0.0], 2.0).unwrap();
        let z = Measure::zero(2);
        let s = m.add(&z).unwrap();
        assert_eq!(s.ball_mass(&[0.1, 0.0], 1.0), m.ball_mass(&[0.1, 0.0], 1.0));
        assert_eq!(s.total_mass(), 2.0);
    }

    #[test]
    fn add_dimension_mismatch() {
        let a = Measure::zero(2);
        let b = Measure::zero(3);
        assert!(matches!(
            a.add(&b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ball_mass_additivity() {
        let a = Measure::dirac(vec![0.2, 0.0], 1.0).unwrap();
        let b = Measure::ball_uniform(vec![0.0, 0.0], 0.7, 0.3).unwrap();
        let s = a.add(&b).unwrap();
        for (x, t) in [([0.0, 0.0], 0.5), ([0.3, 0.1], 1.2), ([-0.5, 0.2], 0.9)] {
            let lhs = s.ball_mass(&x, t);
            let rhs = a.ball_mass(&x, t) + b.ball_mass(&x, t);
            assert!(rel(lhs, rhs.max(1e-300)) < 1e-12);
        }
    }

    #[test]
    fn saturation_reaches_total_mass() {
        let m = Measure::atomic(2, vec![(vec![0.0, 0.0], 1.0), (vec![1.0, 1.0], 2.0)]).unwrap();
        assert_eq!(m.ball_mass(&[5.0, 5.0], 100.0), 3.0);
    }

    #[test]
    fn restrict_filters_atoms() {
        let m = Measure::atomic(2, vec![(vec![0.0, 0.0], 1.0), (vec![2.0, 0.0], 1.0)]).unwrap();
        let r = m.restrict(&[0.0, 0.0], 1.0);
        assert_eq!(r.total_mass(), 1.0);
        assert_eq!(r.total_mass(), m.ball_mass(&[0.0, 0.0], 1.0));
    }

    #[test]
    fn restrict_zero_measure() {
        let z = Measure::zero(2);
        assert_eq!(z.restrict(&[0.0, 0.0], 1.0).total_mass(), 0.0);
    }

    #[test]
    fn restrict_ball_uniform_contained() {
        let m = Measure::ball_uniform(vec![0.0, 0.0], 0.5, 1.0).unwrap();
        let r = m.restrict(&[0.0, 0.0], 2.0);
        assert!(rel(r.total_mass(), m.total_mass()) < 1e-12);
    }

    #[test]
    fn restrict_ball_uniform_partial_mass() {
        // half of the disk: rasterized, so only O(spacing) accuracy
        let m = Measure::ball_uniform(vec![0.0, 0.0], 1.0, 1.0).unwrap();
        let r = m.restrict(&[1.0, 0.0], 1.0);
        let exact = 2.0 * (0.5_f64).acos() - 0.5 * (4.0_f64 - 1.0).sqrt();
        assert!(rel(r.total_mass(), exact) < 0.05);
    }

    #[test]
    fn mass_of_single_ball_set() {
        let m = Measure::uniform_box(
            AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
            2.0,
        )
        .unwrap();
        let e = CompactSet::single_ball(vec![0.0, 0.0], 0.5);
        let v = m.mass_of_set(&e).unwrap();
        assert!(rel(v, 2.0 * PI * 0.25) < 1e-8);
    }

    #[test]
    fn mass_of_union_inclusion_exclusion() {
        let m = Measure::uniform_box(
            AxisBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap(),
            1.0,
        )
        .unwrap();
        // two overlapping unit disks at distance 1
        let e = CompactSet {
            dim: 2,
            balls: vec![
                Ball::new(vec![0.0, 0.0], 1.0),
                Ball::new(vec![1.0, 0.0], 1.0),
            ],
            boxes: vec![],
        };
        let lens = 2.0 * (0.5_f64).acos() - 0.5 * 3.0_f64.sqrt();
        let exact = 2.0 * PI - lens;
        assert!(rel(m.mass_of_set(&e).unwrap(), exact) < 1e-7);
    }

    #[test]
    fn profile_matches_ball_mass_for_atoms() {
        let m = Measure::atomic(2, vec![(vec![0.3, 0.0], 1.0), (vec![0.0, 0.9], 2.0)]).unwrap();
        let p = m.mass_profile(&[0.0, 0.0], GridRule::CellCenter);
        for t in [0.1, 0.4, 1.0, 2.0] {
            assert_eq!(p.mass(t), m.ball_mass(&[0.0, 0.0], t));
        }
        assert_eq!(p.onset(), 0.3);
    }

    #[test]
    fn profile_own_cell_regularizes_grid_points() {
        let grid = GridSpec::new(vec![0.0, 0.0], 1.0, vec![3, 3]).unwrap();
        let m = Measure::grid_density(grid, vec![1.0; 9]).unwrap();
        let p = m.mass_profile(&[1.0, 1.0], GridRule::OwnCellExact);
        assert_eq!(p.mass_at_zero, 0.0);
        // small t: exact disk area, not the whole cell
        let t = 0.25;
        assert!(rel(p.mass(t), PI * t * t) < 1e-10);
        // cell-center rule still reports the full own cell
        let q = m.mass_profile(&[1.0, 1.0], GridRule::CellCenter);
        assert_eq!(q.mass_at_zero, 1.0);
    }
}
