//! The truncated exponential H_l, the reaction P_{l,a,β}(r) = H_l(a r^β),
//! the Young function Q_p and its complementary function.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The reaction triple (l, a, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpNonlinearity {
    pub l: u32,
    pub a: f64,
    pub beta: f64,
}

impl ExpNonlinearity {
    pub fn new(l: u32, a: f64, beta: f64) -> Result<Self> {
        let nl = ExpNonlinearity { l, a, beta };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::admissibility("l >= 1", format!("got l = {}", self.l)));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::admissibility(
                "a > 0",
                format!("got a = {}", self.a),
            ));
        }
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(Error::admissibility(
                "beta >= 1",
                format!("got beta = {}", self.beta),
            ));
        }
        Ok(())
    }

    pub fn l_beta(&self) -> f64 {
        self.l as f64 * self.beta
    }

    /// lβ > p−1: the finite-truncation solvability threshold.
    pub fn admits_finite_truncation(&self, p: f64) -> bool {
        self.l_beta() > p - 1.0
    }

    /// lβ > N(p−1)/(N−αp): the whole-space Wolff-equation threshold.
    pub fn admits_infinite_truncation(&self, n: usize, alpha: f64, p: f64) -> bool {
        let n = n as f64;
        self.l_beta() > n * (p - 1.0) / (n - alpha * p)
    }

    /// lβ > N(p−1)/(N−p): the whole-space p-Laplace threshold.
    pub fn admits_whole_space_p_laplace(&self, n: usize, p: f64) -> bool {
        let n = n as f64;
        self.l_beta() > n * (p - 1.0) / (n - p)
    }

    /// lβ > k: the bounded-domain Hessian threshold.
    pub fn admits_hessian(&self, k: u32) -> bool {
        self.l_beta() > k as f64
    }

    /// lβ > Nk/(N−2k): the whole-space Hessian threshold.
    pub fn admits_whole_space_hessian(&self, n: usize, k: u32) -> bool {
        let n = n as f64;
        let k = k as f64;
        self.l_beta() > n * k / (n - 2.0 * k)
    }

    /// P_{l,a,β}(r) = H_l(a r^β).
    pub fn p(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        h_l(self.a * r.powf(self.beta), self.l)
    }
}

/// H_l(r) = e^r − Σ_{j<l} r^j/j!.
///
/// Small arguments sum the tail series Σ_{j≥l} r^j/j! directly (the
/// subtractive form loses all digits for r ≪ l); large arguments subtract.
/// Overflow maps to +∞.
pub fn h_l(r: f64, l: u32) -> f64 {
    debug_assert!(r >= 0.0, "h_l needs r >= 0");
    if r == 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return f64::INFINITY;
    }
    if r <= l as f64 {
        // tail series from j = l
        let mut term = 1.0;
        for j in 1..=l {
            term *= r / j as f64;
        }
        let mut sum = term;
        let mut j = l as f64 + 1.0;
        loop {
            term *= r / j;
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
            j += 1.0;
        }
        sum
    } else {
        let mut partial = 0.0;
        let mut term = 1.0;
        for j in 0..l {
            if j > 0 {
                term *= r / j as f64;
            }
            partial += term;
        }
        let e = r.exp();
        if e.is_infinite() {
            f64::INFINITY
        } else {
            e - partial
        }
    }
}

/// The Young function Q_p and its complementary function.
///
/// p = 2 collapses to H_l(s^β); otherwise the series
/// Σ_{j≥l} s^{βj/(p−1)} / (j^{βj/(p−1)} j!) is summed with a certified
/// relative tail bound. (The summation index is j here; it plays no other
/// role.)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrliczPair {
    pub p: f64,
    pub l: u32,
    pub beta: f64,
    /// Hard cap on series terms.
    pub max_terms: u32,
    /// Certified relative tail bound for the series.
    pub tail_rel_bound: f64,
}

impl OrliczPair {
    pub fn new(p: f64, l: u32, beta: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::admissibility("p > 1", format!("got p = {p}")));
        }
        if l < 1 {
            return Err(Error::admissibility("l >= 1", format!("got l = {l}")));
        }
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::admissibility(
                "beta >= 1",
                format!("got beta = {beta}"),
            ));
        }
        Ok(OrliczPair {
            p,
            l,
            beta,
            max_terms: 400,
            tail_rel_bound: 1e-12,
        })
    }

    /// Q_p(s); `q_with_terms` also reports the number of series terms used.
    pub fn q(&self, s: f64) -> f64 {
        self.q_with_terms(s).0
    }

    pub fn q_with_terms(&self, s: f64) -> (f64, u32) {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return (0.0, 0);
        }
        if self.p == 2.0 {
            return (h_l(s.powf(self.beta), self.l), 0);
        }
        let expo = self.beta / (self.p - 1.0);
        let ln_s = s.ln();
        let mut sum = 0.0_f64;
        let mut ln_fact = ln_factorial(self.l);
        let mut terms = 0;
        let mut j = self.l;
        loop {
            let ln_term = expo * j as f64 * (ln_s - (j as f64).ln()) - ln_fact;
            let term = ln_term.exp();
            sum += term;
            terms += 1;
            if term.is_infinite() || sum.is_infinite() {
                return (f64::INFINITY, terms);
            }
            // ratio of consecutive terms; beyond j ≈ e·s^{β/(p−1)} it
            // decreases, certifying a geometric tail
            let ratio = ((expo * (j + 1) as f64)
                * (ln_s - ((j + 1) as f64).ln())
                - expo * j as f64 * (ln_s - (j as f64).ln())
                - ((j + 1) as f64).ln())
            .exp();
            if ratio < 0.5 && term * ratio / (1.0 - ratio) < self.tail_rel_bound * sum {
                break;
            }
            if terms >= self.max_terms {
                break;
            }
            j += 1;
            ln_fact += (j as f64).ln();
        }
        (sum, terms)
    }

    /// Derivative Q_p'(s), term-by-term inside the truncation radius.
    pub fn q_prime(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if self.p == 2.0 {
            // d/ds H_l(s^β) = β s^{β−1} H_{l−1}(s^β), with H_0 = exp
            if s == 0.0 {
                return if self.l == 1 && self.beta == 1.0 { 1.0 } else { 0.0 };
            }
            let u = s.powf(self.beta);
            return h_l(u, self.l - 1) * self.beta * s.powf(self.beta - 1.0);
        }
        if s == 0.0 {
            return 0.0;
        }
        let expo = self.beta / (self.p - 1.0);
        let ln_s = s.ln();
        let mut sum = 0.0_f64;
        let mut ln_fact = ln_factorial(self.l);
        let mut terms = 0;
        let mut j = self.l;
        loop {
            let c = expo * j as f64;
            let ln_term = (c - 1.0) * ln_s - c * (j as f64).ln() - ln_fact + c.ln();
            let term = ln_term.exp();
            sum += term;
            terms += 1;
            if term.is_infinite() || sum.is_infinite() {
                return f64::INFINITY;
            }
            if term < self.tail_rel_bound * sum && j > self.l + 2 {
                break;
            }
            if terms >= self.max_terms {
                break;
            }
            j += 1;
            ln_fact += (j as f64).ln();
        }
        sum
    }

    /// Complementary function Q_p*(r) = max_{s≥0} (rs − Q_p(s)), by monotone
    /// bisection on Q_p'(s) = r with bracketing growth.
    pub fn q_star(&self, r: f64) -> f64 {
        self.q_star_with_argmax(r).0
    }

    pub fn q_star_with_argmax(&self, r: f64) -> (f64, f64) {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        // Q'(0+) >= r: maximizer at 0
        if self.q_prime(0.0) >= r {
            return (0.0, 0.0);
        }
        // bracket
        let mut hi = 1.0_f64;
        let mut guard = 0;
        while self.q_prime(hi) < r {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                break;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.q_prime(mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-10 * (1.0 + hi) {
                break;
            }
        }
        let s_star = 0.5 * (lo + hi);
        ((r * s_star - self.q(s_star)).max(0.0), s_star)
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn h_l_base_cases() {
        for l in 1..=5 {
            assert_eq!(h_l(0.0, l), 0.0);
        }
        assert!(rel(h_l(1.0, 1), E - 1.0) < 1e-14);
        assert!(rel(h_l(1.0, 2), E - 2.0) < 1e-14);
    }

    #[test]
    fn h_l_recurrence() {
        // H_l(r) = H_{l+1}(r) + r^l/l!
        for l in 1..=4u32 {
            for i in 0..=30 {
                let r = i as f64;
                let lhs = h_l(r, l);
                let mut pow = 1.0;
                for j in 1..=l {
                    pow *= r / j as f64;
                }
                let rhs = h_l(r, l + 1) + pow;
                if lhs.is_finite() {
                    assert!(rel(lhs, rhs.max(1e-300)) < 1e-12, "l={l} r={r}");
                }
            }
        }
    }

    #[test]
    fn h_l_no_cancellation_for_small_r() {
        // subtractive form would lose everything here
        let v = h_l(1e-8, 3);
        let expected = 1e-24 / 6.0;
        assert!(rel(v, expected) < 1e-10);
    }

    #[test]
    fn h_l_overflow_to_infinity() {
        assert_eq!(h_l(1e4, 2), f64::INFINITY);
    }

    #[test]
    fn reaction_examples() {
        let nl = ExpNonlinearity::new(2, 1.0, 1.0).unwrap();
        assert_eq!(nl.p(0.0), 0.0);
        assert!(rel(nl.p(1.0), E - 2.0) < 1e-14);
    }

    #[test]
    fn reaction_convex_nondecreasing() {
        let nl = ExpNonlinearity::new(2, 0.7, 1.5).unwrap();
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&r| nl.p(r)).collect();
        for w in ys.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in ys.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-10);
        }
    }

    #[test]
    fn reaction_lower_power_bound() {
        // P_{l,a,β}(u) >= (a^l/l!) u^{lβ} (leading series term)
        let nl = ExpNonlinearity::new(2, 1.3, 1.2).unwrap();
        let c = nl.a.powi(nl.l as i32) / 2.0;
        for i in 1..100 {
            let u = i as f64 * 0.1;
            assert!(nl.p(u) >= c * u.powf(nl.l_beta()) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn q_p2_equals_h_l() {
        let q = OrliczPair::new(2.0, 1, 1.0).unwrap();
        assert!(rel(q.q(1.0), E - 1.0) < 1e-14);
        assert_eq!(q.q(0.0), 0.0);
    }

    #[test]
    fn q_series_value_p3() {
        // brute-force oracle: Σ_{j≥2} j^{−j/2}/j!, 30 terms
        let mut oracle = 0.0;
        let mut fact = 2.0_f64;
        for j in 2..=30u32 {
            if j > 2 {
                fact *= j as f64;
            }
            oracle += (j as f64).powf(-(j as f64) / 2.0) / fact;
        }
        let q = OrliczPair::new(3.0, 2, 1.0).unwrap();
        let (v, terms) = q.q_with_terms(1.0);
        assert!(rel(v, oracle) < 1e-12, "{v} vs {oracle}");
        assert!(terms > 2 && terms < 60);
        assert!((oracle - 0.2848).abs() < 5e-4);
    }

    #[test]
    fn q_star_closed_form_exponential() {
        // p=2, l=1, β=1: Q(s) = e^s − 1, Q*(r) = r ln r − r + 1 for r ≥ 1
        let q = OrliczPair::new(2.0, 1, 1.0).unwrap();
        assert!(rel(q.q_star(E), 1.0) < 1e-9);
        assert_eq!(q.q_star(0.5), 0.0);
        assert_eq!(q.q_star(0.0), 0.0);
        for r in [1.5, 3.0, 10.0] {
            let exact = r * r.ln() - r + 1.0;
            assert!(rel(q.q_star(r), exact) < 1e-9, "r={r}");
        }
    }

    #[test]
    fn q_star_closed_form_h2() {
        // p=2, l=2, β=1: Q(s)=e^s−1−s, Q*(r) = (1+r)ln(1+r) − r
        let q = OrliczPair::new(2.0, 2, 1.0).unwrap();
        for r in [0.1, 1.0, 4.0, 20.0] {
            let exact = (1.0 + r) * (1.0 + r).ln() - r;
            assert!(rel(q.q_star(r), exact) < 1e-9, "r={r}");
        }
    }

    #[test]
    fn youngs_inequality_random() {
        let q = OrliczPair::new(3.0, 2, 1.5).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let r = 10.0 * next();
            let s = 10.0 * next();
            let lhs = r * s;
            let rhs = q.q(s) + q.q_star(r);
            assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "r={r} s={s}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn young_equality_at_argmax() {
        let q = OrliczPair::new(2.0, 1, 1.0).unwrap();
        for r in [1.5, 2.0, 8.0] {
            let (qs, s_star) = q.q_star_with_argmax(r);
            let lhs = r * s_star;
            let rhs = q.q(s_star) + qs;
            assert!(rel(lhs, rhs) < 1e-8, "r={r}");
        }
    }

    #[test]
    fn q_monotone_convex_sampled() {
        for q in [
            OrliczPair::new(2.0, 2, 1.0).unwrap(),
            OrliczPair::new(3.0, 2, 1.0).unwrap(),
            OrliczPair::new(2.5, 1, 2.0).unwrap(),
        ] {
            let ys: Vec<f64> = (0..160).map(|i| q.q(i as f64 * 0.05)).collect();
            for w in ys.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for w in ys.windows(3) {
                assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-10);
            }
        }
    }

    #[test]
    fn admissibility_flags() {
        let nl = ExpNonlinearity::new(2, 1.0, 1.0).unwrap();
        assert!(nl.admits_finite_truncation(2.0)); // lβ = 2 > 1
        assert!(!nl.admits_finite_truncation(3.5)); // 2 < 2.5
        assert!(nl.admits_hessian(1));
        assert!(!nl.admits_hessian(2));
        // N=2, α=0.5, p=2: N(p−1)/(N−αp) = 2/(2−1) = 2, need strict
        assert!(!nl.admits_infinite_truncation(2, 0.5, 2.0));
        let nl3 = ExpNonlinearity::new(3, 1.0, 1.0).unwrap();
        assert!(nl3.admits_infinite_truncation(2, 0.5, 2.0));
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(ExpNonlinearity::new(0, 1.0, 1.0).is_err());
        assert!(ExpNonlinearity::new(1, 0.0, 1.0).is_err());
        assert!(ExpNonlinearity::new(1, 1.0, 0.5).is_err());
        assert!(OrliczPair::new(1.0, 1, 1.0).is_err());
    }
}
