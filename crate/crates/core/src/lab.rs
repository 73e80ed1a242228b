//! Numerical experiments on the quantitative potential estimates: the
//! Wolff/Riesz/Bessel norm sandwich, exponential integrability of truncated
//! Wolff potentials, and boundedness of exponential compositions.

use crate::bessel::bessel_potential;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::kernels::{frac_maximal, frac_maximal_sup_norm, grid_eval, wolff, PotentialOp, PotentialParams};
use crate::measure::Measure;
use crate::nonlinearity::{h_l, ExpNonlinearity};
use crate::solver::unit_maximal_norm;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandwichVariant {
    /// ∫(I^R_{αp})^{q/(p−1)} vs ∫(W^R_{α,p})^q.
    RieszIne0,
    /// ∫(G_{αp})^{q/(p−1)} vs ∫(W^R_{α,p})^q (R finite).
    BesselIne2,
    /// ∫(G_{αp})^q vs ∫(I^R_{αp})^q (R finite, q ≥ 1).
    RieszBesselIne3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub q: f64,
    pub lhs_integral: f64,
    pub mid_integral: f64,
    /// Smallest constants making the two one-sided inequalities hold at
    /// this q (NaN when an integral is zero or infinite).
    pub implied_lower_c: f64,
    pub implied_upper_c: f64,
    pub degenerate: bool,
}

/// Grid-quadrature comparison of the potential norms entering the sandwich
/// inequalities, reporting the implied constants.
pub fn sandwich(
    m: &Measure,
    pp: &PotentialParams,
    q: f64,
    variant: SandwichVariant,
    grid: &GridSpec,
) -> Result<SandwichReport> {
    pp.validate_wolff()?;
    let p = pp.s;
    match variant {
        SandwichVariant::RieszBesselIne3 => {
            if q < 1.0 {
                return Err(Error::admissibility("q >= 1", format!("got q = {q}")));
            }
        }
        _ => {
            if q < p - 1.0 {
                return Err(Error::admissibility(
                    "q >= p-1",
                    format!("got q = {q}, p-1 = {}", p - 1.0),
                ));
            }
        }
    }
    if !pp.trunc.is_finite() && variant != SandwichVariant::RieszIne0 {
        return Err(Error::invalid("trunc", "Bessel comparisons need finite R"));
    }

    let alpha_p = pp.alpha * pp.s;
    let order_params = PotentialParams {
        alpha: alpha_p,
        ..pp.clone()
    };

    let (lhs_field, lhs_exp, mid_field, mid_exp) = match variant {
        SandwichVariant::RieszIne0 => (
            grid_eval(PotentialOp::Riesz, m, &order_params, grid),
            q / (p - 1.0),
            grid_eval(PotentialOp::Wolff, m, pp, grid),
            q,
        ),
        SandwichVariant::BesselIne2 => (
            grid_eval(PotentialOp::Bessel, m, &order_params, grid),
            q / (p - 1.0),
            grid_eval(PotentialOp::Wolff, m, pp, grid),
            q,
        ),
        SandwichVariant::RieszBesselIne3 => (
            grid_eval(PotentialOp::Bessel, m, &order_params, grid),
            q,
            grid_eval(PotentialOp::Riesz, m, &order_params, grid),
            q,
        ),
    };

    let lhs_integral = lhs_field.integrate(|v| v.powf(lhs_exp));
    let mid_integral = mid_field.integrate(|v| v.powf(mid_exp));

    let degenerate = !(lhs_integral.is_finite() && mid_integral.is_finite())
        || lhs_integral == 0.0
        || mid_integral == 0.0;
    let (implied_lower_c, implied_upper_c) = if degenerate {
        (f64::NAN, f64::NAN)
    } else {
        match variant {
            SandwichVariant::RieszBesselIne3 => (
                (lhs_integral / mid_integral).powf(1.0 / q),
                (mid_integral / lhs_integral).powf(1.0 / q),
            ),
            _ => (
                (lhs_integral / mid_integral).powf((p - 1.0) / q) / q,
                (mid_integral / lhs_integral).powf(1.0 / q) / q,
            ),
        }
    };

    Ok(SandwichReport {
        q,
        lhs_integral,
        mid_integral,
        implied_lower_c,
        implied_upper_c,
        degenerate,
    })
}

/// The default exponent δ = ½((p−1−η)/(12(p−1)))^{(p−1)/(p−1−η)}·αp·ln 2 of
/// the exponential-integrability estimate.
pub fn default_delta(pp: &PotentialParams) -> f64 {
    let p = pp.s;
    let eta = pp.eta;
    let alpha_p = pp.alpha * pp.s;
    0.5 * ((p - 1.0 - eta) / (12.0 * (p - 1.0))).powf((p - 1.0) / (p - 1.0 - eta))
        * alpha_p
        * std::f64::consts::LN_2
}

/// Average over B_{2r}(a) of
/// exp(δ W^R[μ_{B_r(a)}]^{(p−1)/(p−1−η)} / ‖M^η_{αp,R}[μ_{B_r(a)}]‖^{1/(p−1−η)}_{L∞(B_r(a))}),
/// the quantity whose uniform boundedness the truncation estimates assert.
/// The zero-restriction convention 0/0 ↦ exp(0) = 1 applies.
pub fn exp_integrability(
    m: &Measure,
    pp: &PotentialParams,
    a_center: &[f64],
    r: f64,
    delta: Option<f64>,
    grid: &GridSpec,
) -> Result<f64> {
    pp.validate_wolff()?;
    let p = pp.s;
    let eta = pp.eta;
    if !(eta >= 0.0 && eta < p - 1.0) {
        return Err(Error::admissibility(
            "0 <= eta < p-1",
            format!("got eta = {eta}, p-1 = {}", p - 1.0),
        ));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("r", "radius must be positive"));
    }
    let delta = delta.unwrap_or_else(|| default_delta(pp));
    let restricted = m.restrict(a_center, r);

    let alpha_p = pp.alpha * pp.s;
    let maximal_pp = PotentialParams {
        alpha: alpha_p,
        eta,
        ..pp.clone()
    };
    // ‖·‖_{L∞(B_r(a))}: probes limited to the inner ball
    let inner: Vec<usize> = (0..grid.len())
        .filter(|&i| crate::geometry::dist(&grid.point(i), a_center) < r)
        .collect();
    let norm = if restricted.is_zero() {
        0.0
    } else if !restricted.atom_locations().is_empty() {
        f64::INFINITY
    } else {
        inner
            .par_iter()
            .map(|&i| frac_maximal(&restricted, &maximal_pp, &grid.point(i)))
            .reduce(|| 0.0, f64::max)
    };

    let outer: Vec<usize> = (0..grid.len())
        .filter(|&i| crate::geometry::dist(&grid.point(i), a_center) < 2.0 * r)
        .collect();
    if outer.is_empty() {
        return Err(Error::invalid("grid", "no grid points inside B_{2r}(a)"));
    }
    let exp_power = (p - 1.0) / (p - 1.0 - eta);
    let norm_power = norm.powf(1.0 / (p - 1.0 - eta));
    let sum: f64 = outer
        .par_iter()
        .map(|&i| {
            let w = wolff(&restricted, pp, &grid.point(i));
            let arg = if w == 0.0 {
                0.0
            } else {
                delta * w.powf(exp_power) / norm_power
            };
            arg.exp()
        })
        .sum();
    Ok(sum / outer.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionVariant {
    /// ‖W^R[exp(δ(W^R[ω])^β)]‖_{L∞} bounded (finite R).
    ExpSupBound,
    /// W^R[exp(δ(W^R[ω])^β)] ≤ c·W^R[ω] pointwise (finite R).
    ExpPointwise,
    /// W[H_l(δ(W[ω])^β)] ≤ C·W[ω] pointwise, untruncated with a B_R carrier.
    TruncatedExpPointwise,
}

#[derive(Debug, Clone)]
pub struct CompositionReport {
    pub lhs: ScalarField,
    pub rhs: ScalarField,
    /// sup of lhs (ExpSupBound) or of lhs/rhs (pointwise variants).
    pub ratio_sup: f64,
    pub delta_used: f64,
    /// The composed density overflowed somewhere (δ too large for the data).
    pub overflowed: bool,
}

/// Build ω = ‖M^η[1]‖^{−1} + μ (or its B_R-carried analogue), compose the
/// inner Wolff potential through the exponential, apply the outer Wolff
/// potential, and report the empirical comparison constant.
pub fn composition_bound(
    m: &Measure,
    pp: &PotentialParams,
    nl: &ExpNonlinearity,
    variant: CompositionVariant,
    delta: Option<f64>,
    grid: &GridSpec,
) -> Result<CompositionReport> {
    pp.validate_wolff()?;
    nl.validate()?;
    let p = pp.s;
    let alpha_p = pp.alpha * pp.s;
    let eta = (p - 1.0) * (nl.beta - 1.0) / nl.beta;
    let delta = delta.unwrap_or(0.05);

    let untruncated = matches!(variant, CompositionVariant::TruncatedExpPointwise);
    if untruncated && pp.trunc.is_finite() {
        return Err(Error::invalid(
            "trunc",
            "this composition variant is untruncated; set trunc = inf",
        ));
    }
    if !untruncated && !pp.trunc.is_finite() {
        return Err(Error::invalid("trunc", "this composition variant needs finite R"));
    }

    // smallness normalization for the data measure, checked first
    let maximal_pp = PotentialParams {
        alpha: alpha_p,
        eta,
        ..pp.clone()
    };
    let sup = frac_maximal_sup_norm(m, &maximal_pp, grid);
    if sup > 1.0 {
        return Err(Error::admissibility(
            "||M^eta[mu]||_Linf <= 1",
            format!("got {sup}"),
        ));
    }

    // ω: the normalized constant plus μ
    let omega = if untruncated {
        let radius = carrier_radius_for(m, grid);
        let level = 1.0 / unit_maximal_norm(pp.n, alpha_p, eta, radius);
        Measure::ball_uniform(vec![0.0; pp.n], radius, level)?.add(m)?
    } else {
        let level = 1.0 / unit_maximal_norm(pp.n, alpha_p, eta, pp.trunc);
        let bx = grid.bounding_box().inflate(pp.trunc + grid.spacing);
        Measure::uniform_box(bx, level)?.add(m)?
    };

    let inner = grid_eval(PotentialOp::Wolff, &omega, pp, grid);
    let composed: Vec<f64> = inner
        .values
        .iter()
        .map(|&w| {
            let arg = delta * w.powf(nl.beta);
            match variant {
                CompositionVariant::TruncatedExpPointwise => h_l(arg, nl.l),
                _ => arg.exp(),
            }
        })
        .collect();
    let overflowed = composed.iter().any(|v| !v.is_finite());
    if overflowed {
        return Ok(CompositionReport {
            lhs: ScalarField::constant(grid.clone(), f64::INFINITY),
            rhs: inner,
            ratio_sup: f64::INFINITY,
            delta_used: delta,
            overflowed,
        });
    }
    let composed_measure = Measure::grid_density(grid.clone(), composed)?;
    let lhs = grid_eval(PotentialOp::Wolff, &composed_measure, pp, grid);

    let ratio_sup = match variant {
        CompositionVariant::ExpSupBound => lhs.sup(),
        _ => lhs
            .values
            .iter()
            .zip(&inner.values)
            .map(|(l, r)| if *r > 0.0 { l / r } else { 0.0 })
            .fold(0.0, f64::max),
    };

    Ok(CompositionReport {
        lhs,
        rhs: inner,
        ratio_sup,
        delta_used: delta,
        overflowed,
    })
}

fn carrier_radius_for(m: &Measure, grid: &GridSpec) -> f64 {
    let mut r: f64 = 1.0;
    let mut take = |bx: &crate::geometry::AxisBox| {
        let d2: f64 = bx
            .min
            .iter()
            .zip(&bx.max)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum();
        r = r.max(d2.sqrt());
    };
    take(&grid.bounding_box());
    if let Some(bx) = m.support_box() {
        take(&bx);
    }
    r
}
