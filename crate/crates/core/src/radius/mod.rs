//! Radius of the stationary hypersphere.
//!
//! The uniform distribution on a sphere of radius `rho` in `d >= 3`
//! dimensions is stationary for the loss when
//!
//! ```text
//! integral_{1}^{1 + 2/a} f_{d,a}(u) du = 1/mu,     a = N / (2 rho^2)
//! f_{d,a}(u) = (2a/sqrt(pi)) * Gamma(d/2)/Gamma((d-1)/2)
//!              * (a(u-1))^((d-1)/2) * (2 - a(u-1))^((d-3)/2) / u
//! ```
//!
//! The left side decreases monotonically in `rho`, so the root is found by
//! bisection. The same density also backs two checks on it: the first moment
//! `integral u f du` equals 2 for every `a`, and the mode solves a quadratic
//! in `u`.

pub mod gamma;
pub mod quadrature;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ParamSet;
use quadrature::{integrate, DEFAULT_REL_TOL};

/// Solver tolerance on `|integral - 1/mu|`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative width at which the bisection bracket is considered collapsed.
pub const RHO_REL_TOL: f64 = 1e-12;
pub const MAX_BISECTIONS: usize = 200;
const MAX_BRACKET_EXPANSIONS: usize = 60;

/// Step in `mu` used for desk-scale sweeps.
pub const DESK_MU_STEP: f64 = 0.25;
/// The full-resolution sweep step.
pub const FULL_MU_STEP: f64 = 0.01;

/// `Gamma(d/2) / Gamma((d-1)/2)` through a log-gamma difference.
pub fn gamma_ratio(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::invalid(format!("gamma ratio needs d >= 2, got {dim}")));
    }
    Ok(ln_gamma_ratio(dim).exp())
}

fn ln_gamma_ratio(dim: usize) -> f64 {
    let d = dim as f64;
    gamma::ln_gamma(0.5 * d) - gamma::ln_gamma(0.5 * (d - 1.0))
}

/// The density `f_{d,a}` on `u in [1, 1 + 2/a]`, evaluated in log space.
#[derive(Debug, Clone, Copy)]
pub struct Density {
    dim: usize,
    a: f64,
    ln_prefactor: f64,
    rise: f64,
    fall: f64,
}

impl Density {
    pub fn new(dim: usize, a: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::invalid(format!(
                "the stationary-sphere condition requires d >= 3, got {dim}"
            )));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid(format!("a must be positive and finite, got {a}")));
        }
        let d = dim as f64;
        Ok(Self {
            dim,
            a,
            ln_prefactor: (2.0 * a / PI.sqrt()).ln() + ln_gamma_ratio(dim),
            rise: 0.5 * (d - 1.0),
            fall: 0.5 * (d - 3.0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Upper end `1 + 2/a` of the support.
    pub fn upper(&self) -> f64 {
        1.0 + 2.0 / self.a
    }

    pub fn eval(&self, u: f64) -> f64 {
        let t = self.a * (u - 1.0);
        if t <= 0.0 || t > 2.0 {
            return 0.0;
        }
        let rest = 2.0 - t;
        let fall_term = if self.fall == 0.0 {
            0.0
        } else if rest <= 0.0 {
            return 0.0;
        } else {
            self.fall * rest.ln()
        };
        (self.ln_prefactor + self.rise * t.ln() + fall_term - u.ln()).exp()
    }

    fn ln_eval(&self, u: f64) -> f64 {
        self.eval(u).ln()
    }
}

/// Parameters of one stationarity problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusProblem {
    pub dim: usize,
    pub mu: f64,
    pub big_n: f64,
}

impl RadiusProblem {
    pub fn new(dim: usize, mu: f64, big_n: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::invalid(format!(
                "the stationary-sphere condition requires d >= 3, got {dim}"
            )));
        }
        if !(big_n.is_finite() && big_n > 0.0) {
            return Err(Error::invalid(format!("N must be positive, got {big_n}")));
        }
        if !mu.is_finite() || mu <= 0.5 {
            return Err(Error::invalid(format!("mu must exceed 1/2, got {mu}")));
        }
        Ok(Self { dim, mu, big_n })
    }

    /// `a = N / (2 rho^2)`.
    pub fn a_at(&self, rho: f64) -> f64 {
        self.big_n / (2.0 * rho * rho)
    }
}

fn integral_with_nodes(rho: f64, problem: &RadiusProblem) -> Result<(f64, usize)> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    let density = Density::new(problem.dim, problem.a_at(rho))?;
    let q = integrate(|u| density.eval(u), 1.0, density.upper(), DEFAULT_REL_TOL)?;
    Ok((q.value, q.nodes))
}

/// Left-hand side of the stationarity condition at radius `rho`.
pub fn stationarity_integral(rho: f64, problem: &RadiusProblem) -> Result<f64> {
    integral_with_nodes(rho, problem).map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusSolution {
    pub rho: f64,
    /// Integral minus `1/mu` at `rho`.
    pub residual: f64,
    pub iterations: usize,
    pub quadrature_points: usize,
}

/// Solves the stationarity condition for `rho` by bisection.
///
/// The bracket starts at `[sqrt(d)/4, 4 sqrt(d)]` and is widened
/// geometrically until the residual changes sign.
pub fn solve_radius(dim: usize, mu: f64, big_n: f64) -> Result<RadiusSolution> {
    if mu < 1.0 {
        return Err(Error::invalid(format!("mu must be at least 1, got {mu}")));
    }
    let problem = RadiusProblem::new(dim, mu, big_n)?;
    let target = 1.0 / mu;
    let residual = |rho: f64| integral_with_nodes(rho, &problem).map(|(v, n)| (v - target, n));

    let root = (dim as f64).sqrt();
    let (mut lo, mut hi) = (0.25 * root, 4.0 * root);
    let (mut r_lo, _) = residual(lo)?;
    let (mut r_hi, _) = residual(hi)?;
    let mut expansions = 0;
    while r_lo < 0.0 || r_hi > 0.0 {
        expansions += 1;
        if expansions > MAX_BRACKET_EXPANSIONS {
            return Err(Error::NoSignChange { dim, mu, big_n });
        }
        if r_lo < 0.0 {
            lo *= 0.5;
            r_lo = residual(lo)?.0;
        }
        if r_hi > 0.0 {
            hi *= 2.0;
            r_hi = residual(hi)?.0;
        }
    }

    let mut last = (0.0, 0);
    for iteration in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let (r, nodes) = residual(mid)?;
        last = (r, nodes);
        if r.abs() < RESIDUAL_TOL && (hi - lo) < RHO_REL_TOL * mid {
            return Ok(RadiusSolution {
                rho: mid,
                residual: r,
                iterations: iteration,
                quadrature_points: nodes,
            });
        }
        if r > 0.0 {
            lo = mid;
        } else if r < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid {
            let (r, nodes) = residual(mid)?;
            if r.abs() < RESIDUAL_TOL {
                return Ok(RadiusSolution {
                    rho: mid,
                    residual: r,
                    iterations: iteration,
                    quadrature_points: nodes,
                });
            }
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_BISECTIONS,
        residual: last.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub dim: usize,
    /// `max over mu of 100 |rho - sqrt(d)| / sqrt(d)`.
    pub max_percent_diff: f64,
    /// The `mu` attaining the maximum.
    pub worst_mu: f64,
}

/// Values `1, 1 + step, ...` up to and including `2d + 1`.
pub fn mu_grid(dim: usize, step: f64) -> Vec<f64> {
    let span = 2.0 * dim as f64;
    let count = (span / step + 1e-9).floor() as usize;
    (0..=count).map(|k| 1.0 + k as f64 * step).collect()
}

/// Worst relative deviation of the solved radius from `sqrt(d)` over
/// `mu in [1, 2d + 1]`, with `N` derived from `(d, mu)`.
pub fn sweep_radius(dims: &[usize], mu_step: f64) -> Result<Vec<SweepRow>> {
    if !(mu_step.is_finite() && mu_step > 0.0) {
        return Err(Error::invalid(format!("mu step must be positive, got {mu_step}")));
    }
    if let Some(&bad) = dims.iter().find(|&&d| d < 3) {
        return Err(Error::invalid(format!(
            "the stationary-sphere condition requires d >= 3, got {bad}"
        )));
    }
    let cells: Vec<(usize, usize, f64)> = dims
        .iter()
        .enumerate()
        .flat_map(|(row, &d)| mu_grid(d, mu_step).into_iter().map(move |mu| (row, d, mu)))
        .collect();

    let results: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(_, d, mu)| {
            let big_n = crate::kernel::choose_big_n(d, mu)?;
            let sol = solve_radius(d, mu, big_n).map_err(|e| Error::Sweep {
                dim: d,
                mu,
                source: Box::new(e),
            })?;
            let root = (d as f64).sqrt();
            Ok(100.0 * (sol.rho - root).abs() / root)
        })
        .collect();

    let mut rows: Vec<SweepRow> = dims
        .iter()
        .map(|&dim| SweepRow {
            dim,
            max_percent_diff: f64::NEG_INFINITY,
            worst_mu: f64::NAN,
        })
        .collect();
    for (&(row, _, mu), result) in cells.iter().zip(results) {
        let pct = result?;
        if pct > rows[row].max_percent_diff {
            rows[row].max_percent_diff = pct;
            rows[row].worst_mu = mu;
        }
    }
    Ok(rows)
}

/// First moment `integral u f_{d,a}(u) du`, which should equal 2.
pub fn lemma_a_check(dim: usize, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::invalid(format!("a must lie in (0, 2), got {a}")));
    }
    let density = Density::new(dim, a)?;
    let q = integrate(|u| u * density.eval(u), 1.0, density.upper(), DEFAULT_REL_TOL)?;
    Ok(q.value)
}

fn check_mode_args(dim: usize, a: f64) -> Result<()> {
    if dim < 4 {
        return Err(Error::invalid(format!("the mode formula requires d >= 4, got {dim}")));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid(format!("a must be positive, got {a}")));
    }
    Ok(())
}

/// Mode of `f_{d,a}` in closed form.
///
/// The derivative vanishes where `(a(u-1) - 1)(u(d-3) + 1) = 1`, i.e. on the
/// positive root of `a c u^2 + (a - (a+1) c) u - (a + 2) = 0` with `c = d - 3`.
pub fn lemma_b_argmax(dim: usize, a: f64) -> Result<f64> {
    check_mode_args(dim, a)?;
    let c = dim as f64 - 3.0;
    let qa = a * c;
    let qb = a - (a + 1.0) * c;
    let qc = -(a + 2.0);
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    // qc < 0 < qa, so the roots have opposite signs; pick the positive one
    // in the form that avoids cancellation.
    let root = if qb <= 0.0 {
        (-qb + disc) / (2.0 * qa)
    } else {
        2.0 * qc / (-qb - disc)
    };
    Ok(root)
}

/// `a` recovered from a mode location: `a = (1 + 1/(u(d-3) + 1)) / (u - 1)`.
pub fn lemma_b_a_of(dim: usize, u: f64) -> f64 {
    (1.0 + 1.0 / (u * (dim as f64 - 3.0) + 1.0)) / (u - 1.0)
}

/// Mode of `f_{d,a}` located numerically: a uniform grid scan followed by
/// golden-section refinement of `ln f` around the best grid node.
pub fn lemma_b_numeric_argmax(dim: usize, a: f64) -> Result<f64> {
    check_mode_args(dim, a)?;
    let density = Density::new(dim, a)?;
    let (lo, hi) = (1.0, density.upper());
    const GRID: usize = 4096;
    let h = (hi - lo) / GRID as f64;
    let best = (1..GRID)
        .map(|k| (k, density.ln_eval(lo + k as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
        .0;
    let (mut x0, mut x1) = (lo + (best - 1) as f64 * h, lo + (best + 1) as f64 * h);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = x1 - ratio * (x1 - x0);
    let mut d = x0 + ratio * (x1 - x0);
    let (mut fc, mut fd) = (density.ln_eval(c), density.ln_eval(d));
    for _ in 0..200 {
        if x1 - x0 < 1e-13 * x1 {
            break;
        }
        if fc > fd {
            x1 = d;
            d = c;
            fd = fc;
            c = x1 - ratio * (x1 - x0);
            fc = density.ln_eval(c);
        } else {
            x0 = c;
            c = d;
            fc = fd;
            d = x0 + ratio * (x1 - x0);
            fd = density.ln_eval(d);
        }
    }
    Ok(0.5 * (x0 + x1))
}

/// Magnitude of the pairwise repulsion `2 mu r / (1 + r^2/N)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceProfile {
    pub distances: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl ForceProfile {
    /// Grid point with the largest magnitude (first one on ties).
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, &m) in self.magnitudes.iter().enumerate() {
            if m > self.magnitudes[best] {
                best = i;
            }
        }
        (self.distances[best], self.magnitudes[best])
    }

    pub fn grid_step(&self) -> f64 {
        self.distances[1] - self.distances[0]
    }
}

pub fn force_magnitude(r: f64, mu: f64, big_n: f64) -> f64 {
    2.0 * mu * r / (1.0 + r * r / big_n)
}

pub fn force_profile(params: &ParamSet, r_max: f64, steps: usize) -> Result<ForceProfile> {
    params.validate()?;
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
    }
    if steps < 2 {
        return Err(Error::invalid(format!("need at least 2 grid points, got {steps}")));
    }
    let h = r_max / (steps - 1) as f64;
    let distances: Vec<f64> = (0..steps).map(|i| i as f64 * h).collect();
    let magnitudes = distances
        .iter()
        .map(|&r| force_magnitude(r, params.mu, params.big_n))
        .collect();
    Ok(ForceProfile {
        distances,
        magnitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::choose_big_n;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_ratio_textbook() {
        assert_relative_eq!(gamma_ratio(3).unwrap(), PI.sqrt() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_ratio(4).unwrap(), 2.0 / PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn gamma_ratio_large_dims() {
        // mpmath, 40 digits
        assert_relative_eq!(gamma_ratio(300).unwrap(), 12.216_800_292_176_046, max_relative = 1e-12);
        assert_relative_eq!(gamma_ratio(1_000_000).unwrap(), 707.106_250_856_306_95, max_relative = 1e-8);
        assert!(gamma_ratio(1).is_err());
    }

    #[test]
    fn density_edges() {
        let f = Density::new(3, 1.0).unwrap();
        assert_eq!(f.eval(1.0), 0.0);
        assert!(f.eval(3.0) > 0.0, "d = 3 density stays positive at the far end");
        assert_eq!(f.eval(3.5), 0.0);
        let g = Density::new(5, 1.0).unwrap();
        assert_eq!(g.eval(3.0), 0.0);
        assert!(Density::new(2, 1.0).is_err());
    }

    #[test]
    fn integral_near_one_at_sqrt_d() {
        let problem = RadiusProblem::new(64, 1.0, choose_big_n(64, 1.0).unwrap()).unwrap();
        let v = stationarity_integral(8.0, &problem).unwrap();
        assert!((v - 1.0).abs() < 2e-4, "integral = {v}");
    }

    #[test]
    fn solution_satisfies_condition() {
        let n = choose_big_n(3, 2.0).unwrap();
        let sol = solve_radius(3, 2.0, n).unwrap();
        let problem = RadiusProblem::new(3, 2.0, n).unwrap();
        let v = stationarity_integral(sol.rho, &problem).unwrap();
        assert!((v - 0.5).abs() < RESIDUAL_TOL);
        assert!(sol.residual.abs() < RESIDUAL_TOL);
    }

    #[test]
    fn solve_d64() {
        let sol = solve_radius(64, 1.0, 129.016).unwrap();
        assert!((sol.rho - 8.0).abs() / 8.0 < 1e-4, "rho = {}", sol.rho);
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        assert!(solve_radius(2, 1.0, 6.0).is_err());
        assert!(solve_radius(5, 0.9, 6.0).is_err());
        assert!(solve_radius(5, 1.0, -1.0).is_err());
    }

    #[test]
    fn rho_scales_with_sqrt_n() {
        let a = solve_radius(10, 1.5, 7.0).unwrap();
        let b = solve_radius(10, 1.5, 14.0).unwrap();
        assert_relative_eq!(b.rho / a.rho, 2f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn mu_grid_hits_both_ends() {
        let g = mu_grid(3, 0.25);
        assert_eq!(g.first(), Some(&1.0));
        assert_eq!(g.last(), Some(&7.0));
        assert_eq!(g.len(), 25);
    }

    #[test]
    fn lemma_a_spot_values() {
        for (d, a) in [(3, 1.0), (64, 0.05), (4, 1.999)] {
            let v = lemma_a_check(d, a).unwrap();
            assert!((v - 2.0).abs() < 1e-8, "d={d} a={a}: {v}");
        }
        assert!(lemma_a_check(3, 2.0).is_err());
        assert!(lemma_a_check(3, 0.0).is_err());
    }

    #[test]
    fn lemma_b_d4_quadratic() {
        let u = lemma_b_argmax(4, 1.0).unwrap();
        assert_relative_eq!(u, 0.5 * (1.0 + 13f64.sqrt()), max_relative = 1e-15);
        let numeric = lemma_b_numeric_argmax(4, 1.0).unwrap();
        assert!((numeric - u).abs() < 1e-6);
    }

    #[test]
    fn lemma_b_round_trip() {
        for d in [4, 5, 17, 64] {
            for a in [0.1, 0.7, 1.9] {
                let u = lemma_b_argmax(d, a).unwrap();
                assert!(u > 1.0 && u < 1.0 + 2.0 / a);
                assert_relative_eq!(lemma_b_a_of(d, u), a, max_relative = 1e-12);
            }
        }
        assert!(lemma_b_argmax(3, 1.0).is_err());
    }

    #[test]
    fn force_profile_shape() {
        let params = ParamSet::new(64, 1.0, 129.016, 0.0).unwrap();
        let prof = force_profile(&params, 40.0, 40_001).unwrap();
        assert_eq!(prof.magnitudes[0], 0.0);
        let (r, m) = prof.peak();
        assert!((r - 129.016f64.sqrt()).abs() <= prof.grid_step());
        assert_relative_eq!(m, 129.016f64.sqrt(), max_relative = 1e-6);
        assert!(force_profile(&params, 1.0, 1).is_err());
        assert!(force_profile(&params, 0.0, 10).is_err());
    }
}
