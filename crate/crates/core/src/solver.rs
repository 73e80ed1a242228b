//! Monotone fixed-point solver for u = K·W^R_{α,p}[P_{l,a,β}(u) + μ] + f.
//!
//! The iteration u_{m+1} = K·W^R[P(u_m) + μ] + f starting from u₀ = f is
//! pointwise nondecreasing. While the fractional-maximal smallness condition
//! holds, every iterate stays under the majorant
//! 2c_p K (W^R[ω₁] + W^R[ω₂]) + f built from the background-lifted measures;
//! a violation of that envelope is the divergence certificate.

use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::grid::{GridSpec, ScalarField};
use crate::kernels::{
    frac_maximal_sup_norm, grid_eval, h_eta, PotentialOp, PotentialParams,
};
use crate::measure::Measure;
use crate::nonlinearity::ExpNonlinearity;
use crate::special::unit_ball_volume;

/// c_p, c_{a,ε} and ā of the iteration estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConstants {
    pub c_p: f64,
    pub c_a_eps: f64,
    pub a_bar: f64,
}

/// c_p = 1 ∨ 4^{(2−p)/(p−1)}, c_{a,ε} = 2(1−(a/(a+ε))^{1/β})^{−1},
/// ā = a(4 c_{a,ε} c_p K)^β.
pub fn constants(nl: &ExpNonlinearity, p: f64, k_const: f64, epsilon: f64) -> IterationConstants {
    let c_p = 1.0_f64.max(4.0_f64.powf((2.0 - p) / (p - 1.0)));
    let ratio = (nl.a / (nl.a + epsilon)).powf(1.0 / nl.beta);
    let c_a_eps = 2.0 / (1.0 - ratio);
    let a_bar = nl.a * (4.0 * c_a_eps * c_p * k_const).powf(nl.beta);
    IterationConstants {
        c_p,
        c_a_eps,
        a_bar,
    }
}

/// The two constants the threshold formula leaves as configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralConstants {
    pub delta0: f64,
    pub c_growth: f64,
}

impl Default for StructuralConstants {
    fn default() -> Self {
        // conservative defaults; the resulting threshold M is deliberately
        // small, use `m_override` to calibrate experimentally
        StructuralConstants {
            delta0: 0.1,
            c_growth: 10.0,
        }
    }
}

/// One Wolff integral equation instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Potential parameters with s = p and trunc = R (finite or +∞).
    pub pp: PotentialParams,
    pub nl: ExpNonlinearity,
    pub mu: Measure,
    /// Nonnegative forcing term on the solve grid.
    pub f: ScalarField,
    pub epsilon: f64,
    /// Iteration constant K (1 for the pure integral equation).
    pub k_const: f64,
    pub m_override: Option<f64>,
    pub structural: StructuralConstants,
    /// Carrier radius of the χ_{B_R} background when trunc = +∞; inferred
    /// from the data support when absent.
    pub support_radius: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        self.pp.validate_wolff()?;
        self.nl.validate()?;
        if self.mu.dim() != self.pp.n {
            return Err(Error::DimensionMismatch {
                expected: self.pp.n,
                got: self.mu.dim(),
            });
        }
        if self.f.grid.dim() != self.pp.n {
            return Err(Error::DimensionMismatch {
                expected: self.pp.n,
                got: self.f.grid.dim(),
            });
        }
        if self.f.values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::invalid("f", "forcing term must be finite and >= 0"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        if !(self.k_const > 0.0) {
            return Err(Error::invalid("k_const", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be positive"));
        }
        if let Some(m) = self.m_override {
            if !(m > 0.0) {
                return Err(Error::invalid("m_override", "must be positive"));
            }
        }
        let p = self.pp.s;
        if self.pp.trunc.is_finite() {
            if !self.nl.admits_finite_truncation(p) {
                return Err(Error::admissibility(
                    "l*beta > p-1",
                    format!("got l*beta = {}, p-1 = {}", self.nl.l_beta(), p - 1.0),
                ));
            }
        } else if !self.nl.admits_infinite_truncation(self.pp.n, self.pp.alpha, p) {
            return Err(Error::admissibility(
                "l*beta > N(p-1)/(N-alpha*p)",
                format!(
                    "got l*beta = {}, N(p-1)/(N-alpha*p) = {}",
                    self.nl.l_beta(),
                    self.pp.n as f64 * (p - 1.0) / (self.pp.n as f64 - self.pp.alpha * p)
                ),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.f.grid
    }

    /// The maximal-function exponent η = (p−1)(β−1)/β of the smallness norm.
    pub fn maximal_eta(&self) -> f64 {
        let p = self.pp.s;
        (p - 1.0) * (self.nl.beta - 1.0) / self.nl.beta
    }

    /// μ₁ = P_{l,a+ε,β}(f) as a grid density.
    pub fn mu1(&self) -> Result<Measure> {
        let lifted_nl = ExpNonlinearity {
            l: self.nl.l,
            a: self.nl.a + self.epsilon,
            beta: self.nl.beta,
        };
        let values: Vec<f64> = self.f.values.iter().map(|&v| lifted_nl.p(v)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "f",
                "P_{l,a+eps,beta}(f) overflows; forcing term too large",
            ));
        }
        Measure::grid_density(self.grid().clone(), values)
    }

    /// The smallness threshold: the override when given, otherwise
    /// M = 1 ∧ (δ₀/ā)^{(½(β/(p−1)−1/l))^{−1}} ∧ c^{−(β l/(p−1)−1)^{−1}·2(p−1)}.
    pub fn threshold_m(&self) -> f64 {
        if let Some(m) = self.m_override {
            return m;
        }
        let p = self.pp.s;
        let cs = constants(&self.nl, p, self.k_const, self.epsilon);
        let beta = self.nl.beta;
        let l = self.nl.l as f64;
        let e1 = 0.5 * (beta / (p - 1.0) - 1.0 / l);
        let e2 = (beta * l / (p - 1.0) - 1.0) / (2.0 * (p - 1.0));
        let m1 = (self.structural.delta0 / cs.a_bar).powf(1.0 / e1);
        let m2 = self.structural.c_growth.powf(-1.0 / e2);
        1.0_f64.min(m1).min(m2)
    }

    fn maximal_params(&self) -> PotentialParams {
        PotentialParams {
            n: self.pp.n,
            alpha: self.pp.alpha * self.pp.s,
            s: self.pp.s,
            trunc: self.pp.trunc,
            eta: self.maximal_eta(),
        }
    }
}

/// The background-lifted majorant measures. For finite R the background is
/// a constant density on a box covering every queried ball; for R = +∞ it
/// is supported on the carrier ball B_R.
#[derive(Debug, Clone)]
pub struct LiftedMeasures {
    /// μ plus background (the paper's ω₁, or ω₃ for R = +∞).
    pub omega1: Measure,
    /// μ₁ plus background (ω₂, or ω₄ for R = +∞).
    pub omega2: Measure,
    pub m_used: f64,
    pub background_level: f64,
}

/// sup_{0<t≤T} t^a / h_η(t), in closed form.
pub fn sup_power_over_weight(a: f64, eta: f64, t_max: f64) -> f64 {
    debug_assert!(a > 0.0 && t_max > 0.0);
    let phi = |t: f64| t.powf(a) / h_eta(t, eta);
    if eta == 0.0 {
        return t_max.powf(a);
    }
    // below 1/2 the weighted power rises to t* = e^{−η/a} then falls
    let t_star = (-eta / a).exp();
    let mut best = phi(t_max.min(0.5));
    if t_star < t_max.min(0.5) {
        best = best.max(phi(t_star));
    }
    if t_max > 0.5 {
        best = best.max(phi(t_max));
    }
    best
}

/// ‖M^η_{αp,T}[1]‖_{L∞} = |B₁| sup_{t≤T} t^{αp}/h_η(t); for the χ_{B_R}
/// data of the untruncated case the same expression applies with T = R.
pub fn unit_maximal_norm(n: usize, alpha_p: f64, eta: f64, t_max: f64) -> f64 {
    unit_ball_volume(n) * sup_power_over_weight(alpha_p, eta, t_max)
}

pub fn lift_measures(spec: &ProblemSpec) -> Result<LiftedMeasures> {
    let m_used = spec.threshold_m();
    let eta = spec.maximal_eta();
    let alpha_p = spec.pp.alpha * spec.pp.s;
    let mu1 = spec.mu1()?;

    let background = if spec.pp.trunc.is_finite() {
        let r = spec.pp.trunc;
        let level = m_used / unit_maximal_norm(spec.pp.n, alpha_p, eta, r);
        // every W^R query ball from a grid point stays inside this box
        let bx = spec.grid().bounding_box().inflate(r + spec.grid().spacing);
        Measure::uniform_box(bx, level)?
    } else {
        let r = carrier_radius(spec)?;
        let level = m_used / unit_maximal_norm(spec.pp.n, alpha_p, eta, r);
        Measure::ball_uniform(vec![0.0; spec.pp.n], r, level)?
    };

    let level = match background.components() {
        [crate::measure::Component::UniformBox { density, .. }] => *density,
        [crate::measure::Component::BallUniform { density, .. }] => *density,
        _ => unreachable!(),
    };

    Ok(LiftedMeasures {
        omega1: background.add(&spec.mu)?,
        omega2: background.add(&mu1)?,
        m_used,
        background_level: level,
    })
}

fn carrier_radius(spec: &ProblemSpec) -> Result<f64> {
    if let Some(r) = spec.support_radius {
        if !(r > 0.0) {
            return Err(Error::invalid("support_radius", "must be positive"));
        }
        return Ok(r);
    }
    // smallest origin-centered ball containing the data supports and grid
    let mut r = 0.0_f64;
    let mut take = |bx: &AxisBox| {
        let d2: f64 = bx
            .min
            .iter()
            .zip(&bx.max)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum();
        r = r.max(d2.sqrt());
    };
    take(&spec.grid().bounding_box());
    if let Some(bx) = spec.mu.support_box() {
        take(&bx);
    }
    Ok(r.max(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessReport {
    pub passed: bool,
    pub sup_mu: f64,
    pub sup_mu1: f64,
    pub m_used: f64,
}

/// Check ‖M^η_{αp,R}[μ]‖ ≤ M and ‖M^η_{αp,R}[μ₁]‖ ≤ M over the solve grid
/// probes (plus atom locations, where the norm is +∞).
pub fn smallness_check(spec: &ProblemSpec) -> Result<SmallnessReport> {
    let m_used = spec.threshold_m();
    let pp = spec.maximal_params();
    let sup_mu = frac_maximal_sup_norm(&spec.mu, &pp, spec.grid());
    let sup_mu1 = frac_maximal_sup_norm(&spec.mu1()?, &pp, spec.grid());
    Ok(SmallnessReport {
        passed: sup_mu <= m_used && sup_mu1 <= m_used,
        sup_mu,
        sup_mu1,
        m_used,
    })
}

/// The envelope 2c_pK·W^R[ω₁] + 2c_pK·W^R[ω₂] + f; the ω₂ term drops when
/// f ≡ 0.
pub fn apriori_bound(spec: &ProblemSpec, lifted: &LiftedMeasures) -> ScalarField {
    let cs = constants(&spec.nl, spec.pp.s, spec.k_const, spec.epsilon);
    let factor = 2.0 * cs.c_p * spec.k_const;
    let w1 = grid_eval(PotentialOp::Wolff, &lifted.omega1, &spec.pp, spec.grid());
    let f_is_zero = spec.f.values.iter().all(|v| *v == 0.0);
    if f_is_zero {
        w1.map(|v| factor * v)
    } else {
        let w2 = grid_eval(PotentialOp::Wolff, &lifted.omega2, &spec.pp, spec.grid());
        let mut out = w1.zip_with(&w2, |a, b| factor * (a + b));
        out = out.zip_with(&spec.f, |a, b| a + b);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    /// An iterate overflowed to +∞ (the reaction left the floating range).
    Overflow,
    /// An iterate exceeded the a-priori envelope somewhere.
    BoundViolation,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterates_sup_norm: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub diverged: Option<DivergenceKind>,
    pub iterations: usize,
    /// min over the grid of (envelope − u); nonnegative while the bound holds.
    pub apriori_margin: f64,
    /// Iterates were pointwise nondecreasing (up to quadrature slack).
    pub monotone: bool,
    pub smallness: SmallnessReport,
    pub constants: IterationConstants,
    pub solution: ScalarField,
    pub envelope: ScalarField,
}

/// Run the monotone iteration from u₀ = f.
///
/// Stops on sup|u_{m+1} − u_m| < tol (converged), on envelope violation or
/// overflow (diverged), or at `max_iters`. When smallness fails the caller
/// may still run; divergence detection stays active either way.
pub fn picard_solve(spec: &ProblemSpec) -> Result<SolveReport> {
    spec.validate()?;
    let lifted = lift_measures(spec)?;
    let smallness = smallness_check(spec)?;
    let cs = constants(&spec.nl, spec.pp.s, spec.k_const, spec.epsilon);
    let envelope = apriori_bound(spec, &lifted);
    let grid = spec.grid().clone();

    let mut u = spec.f.clone();
    let mut iterates_sup_norm = vec![u.sup()];
    let mut monotone = true;
    let mut converged = false;
    let mut diverged = None;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for _ in 0..spec.max_iters {
        iterations += 1;
        let reaction: Vec<f64> = u.values.iter().map(|&v| spec.nl.p(v)).collect();
        if reaction.iter().any(|v| !v.is_finite()) {
            diverged = Some(DivergenceKind::Overflow);
            break;
        }
        let reaction_measure = Measure::grid_density(grid.clone(), reaction)?;
        let rhs = reaction_measure.add(&spec.mu)?;
        let w = grid_eval(PotentialOp::Wolff, &rhs, &spec.pp, &grid);
        let next = w
            .map(|v| spec.k_const * v)
            .zip_with(&spec.f, |a, b| a + b);

        if next.has_non_finite() {
            diverged = Some(DivergenceKind::Overflow);
            u = next;
            iterates_sup_norm.push(f64::INFINITY);
            break;
        }

        let slack = 1e-9 * (1.0 + next.sup().abs());
        if next
            .values
            .iter()
            .zip(&u.values)
            .any(|(n, p)| *n < *p - slack)
        {
            monotone = false;
        }

        residual = next.sup_abs_diff(&u);
        iterates_sup_norm.push(next.sup());
        u = next;

        let violation = u
            .values
            .iter()
            .zip(&envelope.values)
            .any(|(uv, bv)| *uv > *bv + 1e-9 * (1.0 + bv.abs()));
        if violation {
            diverged = Some(DivergenceKind::BoundViolation);
            break;
        }

        if residual < spec.tol {
            converged = true;
            break;
        }
    }

    // fixed-point residual of the final iterate
    if converged {
        let reaction: Vec<f64> = u.values.iter().map(|&v| spec.nl.p(v)).collect();
        let rhs = Measure::grid_density(grid.clone(), reaction)?.add(&spec.mu)?;
        let w = grid_eval(PotentialOp::Wolff, &rhs, &spec.pp, &grid);
        let fixed = w
            .map(|v| spec.k_const * v)
            .zip_with(&spec.f, |a, b| a + b);
        residual = fixed.sup_abs_diff(&u);
    }

    let apriori_margin = u
        .values
        .iter()
        .zip(&envelope.values)
        .map(|(uv, bv)| bv - uv)
        .fold(f64::INFINITY, f64::min);

    Ok(SolveReport {
        iterates_sup_norm,
        residual,
        converged,
        diverged,
        iterations,
        apriori_margin,
        monotone,
        smallness,
        constants: cs,
        solution: u,
        envelope,
    })
}

/// Which Dirichlet problem the Wolff envelope stands in for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurrogateKind {
    PLaplace { p: f64 },
    KHessian { k: u32 },
}

#[derive(Debug, Clone)]
pub struct SurrogateOptions {
    /// Boundary offset b of the Hessian upper envelope.
    pub b_offset: f64,
    /// Domain box; enables the lower envelope with its interior truncation.
    pub domain: Option<AxisBox>,
}

impl Default for SurrogateOptions {
    fn default() -> Self {
        SurrogateOptions {
            b_offset: 0.0,
            domain: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SurrogateEnvelopes {
    pub upper: ScalarField,
    pub lower: Option<ScalarField>,
}

/// Upper envelope 2c_pK·W^{2diam}_{1,p}[μ] (p-Laplace) or
/// 2K·W^{2diam}_{2k/(k+1),k+1}[μ] + b (k-Hessian), plus the optional lower
/// envelope with truncation d(x,∂Ω)/3 (respectively /8).
pub fn pde_surrogate_bound(
    kind: SurrogateKind,
    mu: &Measure,
    domain_diam: f64,
    k_const: f64,
    grid: &GridSpec,
    opts: &SurrogateOptions,
) -> Result<SurrogateEnvelopes> {
    if !(domain_diam > 0.0) {
        return Err(Error::invalid("domain_diam", "must be positive"));
    }
    let n = grid.dim();
    let (alpha, s, factor, offset, lower_frac) = match kind {
        SurrogateKind::PLaplace { p } => {
            if !(p > 1.0 && p < n as f64) {
                return Err(Error::admissibility(
                    "1 < p < N",
                    format!("got p = {p}, N = {n}"),
                ));
            }
            let c_p = 1.0_f64.max(4.0_f64.powf((2.0 - p) / (p - 1.0)));
            (1.0, p, 2.0 * c_p * k_const, 0.0, 1.0 / 3.0)
        }
        SurrogateKind::KHessian { k } => {
            if 2 * k as usize >= n {
                return Err(Error::admissibility(
                    "2k < N",
                    format!("got k = {k}, N = {n}"),
                ));
            }
            let kf = k as f64;
            (
                2.0 * kf / (kf + 1.0),
                kf + 1.0,
                2.0 * k_const,
                opts.b_offset,
                1.0 / 8.0,
            )
        }
    };

    let pp = PotentialParams {
        n,
        alpha,
        s,
        trunc: 2.0 * domain_diam,
        eta: 0.0,
    };
    pp.validate_wolff()?;
    let upper = grid_eval(PotentialOp::Wolff, mu, &pp, grid).map(|v| factor * v + offset);

    let lower = match &opts.domain {
        None => None,
        Some(domain) => {
            let values: Vec<f64> = (0..grid.len())
                .map(|i| {
                    let x = grid.point(i);
                    let d = boundary_distance(domain, &x);
                    if d <= 0.0 {
                        return 0.0;
                    }
                    let local = PotentialParams {
                        trunc: lower_frac * d,
                        ..pp.clone()
                    };
                    crate::kernels::wolff(mu, &local, &x) / k_const
                })
                .collect();
            Some(ScalarField {
                grid: grid.clone(),
                values,
            })
        }
    };

    Ok(SurrogateEnvelopes { upper, lower })
}

/// Distance to the boundary of a box domain (0 outside).
fn boundary_distance(domain: &AxisBox, x: &[f64]) -> f64 {
    if !domain.contains(x) {
        return 0.0;
    }
    x.iter()
        .zip(domain.min.iter().zip(&domain.max))
        .map(|(v, (a, b))| (v - a).min(b - v))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn base_spec(mu: Measure) -> ProblemSpec {
        let grid = GridSpec::centered(2, 0.5, 9);
        ProblemSpec {
            pp: PotentialParams {
                n: 2,
                alpha: 0.5,
                s: 2.0,
                trunc: 1.0,
                eta: 0.0,
            },
            nl: ExpNonlinearity {
                l: 2,
                a: 1.0,
                beta: 1.0,
            },
            mu,
            f: ScalarField::constant(grid, 0.0),
            epsilon: 1.0,
            k_const: 1.0,
            m_override: Some(0.05),
            structural: StructuralConstants::default(),
            support_radius: None,
            max_iters: 60,
            tol: 1e-8,
        }
    }

    fn small_constant_mu() -> Measure {
        let bx = AxisBox::new(vec![-1.7, -1.7], vec![1.7, 1.7]).unwrap();
        Measure::uniform_box(bx, 0.01).unwrap()
    }

    #[test]
    fn constants_examples() {
        let nl = ExpNonlinearity {
            l: 1,
            a: 1.0,
            beta: 1.0,
        };
        assert_eq!(constants(&nl, 2.0, 1.0, 1.0).c_p, 1.0);
        assert!(rel(constants(&nl, 1.5, 1.0, 1.0).c_p, 4.0) < 1e-14);
        // large ε: c_{a,ε} → 2
        let cs = constants(&nl, 2.0, 1.0, 1e12);
        assert!((cs.c_a_eps - 2.0).abs() < 1e-10);
    }

    #[test]
    fn structural_threshold_positive_and_capped() {
        let mut spec = base_spec(Measure::zero(2));
        spec.m_override = None;
        let m = spec.threshold_m();
        assert!(m > 0.0 && m <= 1.0);
    }

    #[test]
    fn unit_maximal_norm_closed_form() {
        // η = 0, N = 3, αp = 2, R = 1: |B₁| = 4π/3
        let v = unit_maximal_norm(3, 2.0, 0.0, 1.0);
        assert!(rel(v, 4.0 * PI / 3.0) < 1e-14);
        // η > 0, t* = e^{−η/a} < T: the interior maximum wins
        let a = 1.0;
        let eta = 0.5;
        let sup = sup_power_over_weight(a, eta, 0.4);
        let mut oracle = 0.0_f64;
        for i in 1..400_000 {
            let t = 0.4 * i as f64 / 400_000.0;
            oracle = oracle.max(t.powf(a) / h_eta(t, eta));
        }
        assert!(rel(sup, oracle) < 1e-6);
    }

    #[test]
    fn lift_builds_pure_backgrounds_for_zero_data() {
        let spec = base_spec(Measure::zero(2));
        let lifted = lift_measures(&spec).unwrap();
        // ω₁ and ω₂ are pure constant backgrounds of equal level
        assert!(rel(lifted.omega1.total_mass(), lifted.omega2.total_mass()) < 1e-12);
        let expected_level = 0.05 / unit_maximal_norm(2, 1.0, 0.0, 1.0);
        assert!(rel(lifted.background_level, expected_level) < 1e-12);
        // additivity of the lift
        let spec2 = base_spec(small_constant_mu());
        let lifted2 = lift_measures(&spec2).unwrap();
        let x = [0.1, 0.0];
        let lhs = lifted2.omega1.ball_mass(&x, 0.3);
        let rhs = spec2.mu.ball_mass(&x, 0.3)
            + lifted2.background_level * PI * 0.09;
        assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn smallness_rejects_atoms_and_accepts_zero() {
        let spec = base_spec(Measure::dirac(vec![0.0, 0.0], 1.0).unwrap());
        let rep = smallness_check(&spec).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.sup_mu, f64::INFINITY);

        let spec0 = base_spec(Measure::zero(2));
        let rep0 = smallness_check(&spec0).unwrap();
        assert!(rep0.passed);
        assert_eq!(rep0.sup_mu, 0.0);
    }

    #[test]
    fn smallness_constant_density_closed_form() {
        let spec = base_spec(small_constant_mu());
        let rep = smallness_check(&spec).unwrap();
        // interior probes see exactly c·|B₁|·R^{αp}
        let expected = 0.01 * PI;
        assert!(rel(rep.sup_mu, expected) < 0.01, "{}", rep.sup_mu);
        assert!(rep.passed);
    }

    #[test]
    fn apriori_bound_positive_and_monotone_in_m() {
        let spec = base_spec(Measure::zero(2));
        let lifted = lift_measures(&spec).unwrap();
        let bound = apriori_bound(&spec, &lifted);
        assert!(bound.min() > 0.0);

        let mut bigger = spec.clone();
        bigger.m_override = Some(0.1);
        let lifted2 = lift_measures(&bigger).unwrap();
        let bound2 = apriori_bound(&bigger, &lifted2);
        for (a, b) in bound.values.iter().zip(&bound2.values) {
            assert!(b >= a);
        }
    }

    #[test]
    fn picard_zero_data_converges_immediately() {
        let spec = base_spec(Measure::zero(2));
        let report = picard_solve(&spec).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!(report.solution.values.iter().all(|v| *v == 0.0));
        assert!(report.monotone);
    }

    #[test]
    fn picard_small_data_converges_under_bound() {
        let spec = base_spec(small_constant_mu());
        let report = picard_solve(&spec).unwrap();
        assert!(report.converged, "{:?}", report.iterates_sup_norm);
        assert!(report.smallness.passed);
        assert!(report.monotone);
        assert!(report.residual <= 2.0 * spec.tol);
        assert!(report.apriori_margin >= 0.0);
        assert!(report.iterations > 2);
        // iterates nondecreasing in sup norm
        for w in report.iterates_sup_norm.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn picard_huge_data_trips_divergence() {
        let spec = base_spec(small_constant_mu().scale(1e6));
        let report = picard_solve(&spec).unwrap();
        assert!(!report.converged);
        assert!(report.diverged.is_some());
        assert!(!report.smallness.passed);
    }

    #[test]
    fn surrogate_hessian_k1_matches_p_laplace_p2() {
        let mu = Measure::atomic(3, vec![(vec![0.2, 0.0, 0.0], 1.0)]).unwrap();
        let grid = GridSpec::centered(3, 1.0, 5);
        let a = pde_surrogate_bound(
            SurrogateKind::PLaplace { p: 2.0 },
            &mu,
            1.0,
            1.0,
            &grid,
            &SurrogateOptions::default(),
        )
        .unwrap();
        let b = pde_surrogate_bound(
            SurrogateKind::KHessian { k: 1 },
            &mu,
            1.0,
            1.0,
            &grid,
            &SurrogateOptions::default(),
        )
        .unwrap();
        for (x, y) in a.upper.values.iter().zip(&b.upper.values) {
            if x.is_finite() {
                assert!(rel(*x, y.max(1e-300)) < 1e-12);
            }
        }
    }

    #[test]
    fn surrogate_zero_measure_gives_offset_envelope() {
        let grid = GridSpec::centered(3, 1.0, 3);
        let z = Measure::zero(3);
        let env = pde_surrogate_bound(
            SurrogateKind::KHessian { k: 1 },
            &z,
            1.0,
            1.0,
            &grid,
            &SurrogateOptions {
                b_offset: 0.7,
                domain: None,
            },
        )
        .unwrap();
        assert!(env.upper.values.iter().all(|v| (*v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn surrogate_lower_below_upper() {
        let mu = Measure::ball_uniform(vec![0.0, 0.0, 0.0], 0.5, 0.4).unwrap();
        let grid = GridSpec::centered(3, 0.8, 5);
        let domain = AxisBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let env = pde_surrogate_bound(
            SurrogateKind::PLaplace { p: 2.0 },
            &mu,
            2.0,
            1.5,
            &grid,
            &SurrogateOptions {
                b_offset: 0.0,
                domain: Some(domain),
            },
        )
        .unwrap();
        let lower = env.lower.unwrap();
        for (lo, hi) in lower.values.iter().zip(&env.upper.values) {
            assert!(lo <= hi, "{lo} vs {hi}");
        }
    }

    #[test]
    fn surrogate_rejects_inadmissible_hessian() {
        let grid = GridSpec::centered(3, 1.0, 3);
        let z = Measure::zero(3);
        let err = pde_surrogate_bound(
            SurrogateKind::KHessian { k: 2 },
            &z,
            1.0,
            1.0,
            &grid,
            &SurrogateOptions::default(),
        );
        assert!(matches!(err, Err(Error::Admissibility { .. })));
    }

    #[test]
    fn f_zero_reduction_matches_two_term_envelope() {
        // with f ≡ 0 the ω₂ term is dropped; forcing a tiny f brings it back
        let spec = base_spec(small_constant_mu());
        let lifted = lift_measures(&spec).unwrap();
        let one_term = apriori_bound(&spec, &lifted);

        let mut with_f = spec.clone();
        with_f.f = ScalarField::constant(spec.grid().clone(), 1e-12);
        let lifted_f = lift_measures(&with_f).unwrap();
        let two_term = apriori_bound(&with_f, &lifted_f);
        // the two-term envelope is strictly larger (extra ω₂ Wolff term)
        for (a, b) in one_term.values.iter().zip(&two_term.values) {
            assert!(b > a);
        }
    }
}
