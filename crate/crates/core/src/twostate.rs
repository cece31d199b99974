//! Exact two-state machinery.
//!
//! For two inputs with `η_in = |⟨Φ₁|Φ₂⟩|` and outputs with
//! `η_out = |⟨Ψ₁|Ψ₂⟩|`, a machine with success probabilities `(γ₁, γ₂)`
//! exists iff
//!
//! ```text
//! √((1−γ₁)(1−γ₂)) − η_in + η_out·√(γ₁γ₂) ≥ 0.
//! ```
//!
//! The left-hand side is concave in `(γ₁, γ₂)`, so the achievable region is
//! convex and every ray from the origin leaves it exactly once. Note that
//! its upper boundary is *not* monotone: for `η_out > 0` the region reaches
//! out to `γ₁ = (1−η_in²)/(1−η_out²)`, past the axis intercept `1−η_in²`.
//!
//! Only moduli of the overlaps enter; complex phases are accepted and ignored.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::serde_cplx;
use crate::{Error, Result, C64};

/// Slack allowed when evaluating the region inequality.
pub const REGION_SLACK: f64 = 1e-12;

/// Residual accepted when a root of a squared boundary equation is substituted back.
const ROOT_CHECK: f64 = 1e-10;

/// Bisection stopping width.
const BISECTION_TOL: f64 = 1e-12;

/// Overlap moduli `(η_in, η_out)` of a two-state transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region2 {
    pub eta_in: f64,
    pub eta_out: f64,
}

impl Region2 {
    pub fn new(eta_in: f64, eta_out: f64) -> Result<Self> {
        check_unit("eta_in", eta_in)?;
        check_unit("eta_out", eta_out)?;
        Ok(Region2 { eta_in, eta_out })
    }

    /// Left-hand side of the region inequality.
    pub fn slack(&self, g1: f64, g2: f64) -> f64 {
        ((1.0 - g1) * (1.0 - g2)).max(0.0).sqrt() - self.eta_in
            + self.eta_out * (g1 * g2).max(0.0).sqrt()
    }

    /// `(1, 1)` is achievable.
    pub fn is_deterministic(&self) -> bool {
        self.eta_in <= self.eta_out
    }

    /// Largest `γ₁` appearing anywhere in the region.
    pub fn max_gamma1(&self) -> f64 {
        if self.is_deterministic() {
            1.0
        } else {
            (1.0 - self.eta_in * self.eta_in) / (1.0 - self.eta_out * self.eta_out)
        }
    }

    /// Point where the region boundary crosses the diagonal `γ₁ = γ₂`.
    pub fn symmetric_point(&self) -> f64 {
        if self.is_deterministic() {
            1.0
        } else {
            (1.0 - self.eta_in) / (1.0 - self.eta_out)
        }
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::out_of_range(name, v, "[0, 1]"))
    }
}

/// Whether `(g1, g2)` is achievable.
pub fn region_feasible(r: &Region2, g1: f64, g2: f64) -> Result<bool> {
    check_unit("gamma1", g1)?;
    check_unit("gamma2", g2)?;
    Ok(r.slack(g1, g2) >= -REGION_SLACK)
}

/// Real roots of `a·x² + b·x + c = 0`, using the cancellation-free form.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a.abs() < 1e-300 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Last point in `[lo, hi]` where `f` is still nonnegative, given `f(lo) ≥ 0 > f(hi)`.
fn bisect_down(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest `γ₂ ∈ [0,1]` with `(g1, γ₂)` achievable.
///
/// Solves the squared boundary equation as a quadratic in `s = √γ₂`,
/// `[(1−γ₁) + η_out²γ₁]s² − 2η_inη_out√γ₁·s + [η_in² − (1−γ₁)] = 0`, keeps
/// roots that satisfy the unsquared equation, and falls back to bisection
/// when none survives. Errors if no `γ₂` is achievable for this `g1`.
pub fn boundary_gamma2(r: &Region2, g1: f64) -> Result<f64> {
    check_unit("gamma1", g1)?;
    let f = |s: f64| r.slack(g1, s * s);
    if f(1.0) >= -REGION_SLACK {
        return Ok(1.0);
    }
    let (ei, eo) = (r.eta_in, r.eta_out);
    let a = (1.0 - g1) + eo * eo * g1;
    let b = -2.0 * ei * eo * g1.sqrt();
    let c = ei * ei - (1.0 - g1);
    let best = quadratic_roots(a, b, c)
        .into_iter()
        .filter(|s| (-1e-12..=1.0 + 1e-12).contains(s))
        .map(|s| s.clamp(0.0, 1.0))
        .filter(|&s| f(s).abs() <= ROOT_CHECK)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |t| t.max(s))));
    let s = match best {
        Some(s) => s,
        None => {
            // f(s) = p·√(1−s²) + q·s − η_in peaks at s = q/√(p²+q²)
            let p = (1.0 - g1).sqrt();
            let q = eo * g1.sqrt();
            let norm = p.hypot(q);
            let peak = if norm > 0.0 { q / norm } else { 0.0 };
            if f(peak) < -REGION_SLACK {
                return Err(Error::Infeasible(format!(
                    "no achievable gamma2 for gamma1 = {g1}"
                )));
            }
            bisect_down(f, peak, 1.0)
        }
    };
    Ok((s * s).min(1.0))
}

/// Scale `t` at which the ray `t·dir` leaves the region (or the unit square).
///
/// `dir` has nonnegative components, not both zero.
pub fn ray_boundary(r: &Region2, dir: [f64; 2]) -> f64 {
    let [c, s] = dir;
    let edge = 1.0 / c.max(s);
    let along = |t: f64| r.slack(t * c, t * s);
    if along(edge) >= -REGION_SLACK {
        return edge;
    }
    let (ei, eo) = (r.eta_in, r.eta_out);
    let cs = c * s;
    let a = cs * (1.0 - eo * eo);
    let b = -(c + s - 2.0 * ei * eo * cs.sqrt());
    let k = 1.0 - ei * ei;
    let root = quadratic_roots(a, b, k)
        .into_iter()
        .filter(|&t| t >= -1e-12 && t <= edge)
        .map(|t| t.max(0.0))
        .filter(|&t| along(t).abs() <= ROOT_CHECK)
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |u| u.min(t))));
    // along() is concave with along(0) = 1 − η_in ≥ 0 > along(edge)
    root.unwrap_or_else(|| bisect_down(along, 0.0, edge))
}

/// `steps + 1` points tracing the boundary curve from `(0, 1−η_in²)` to
/// `(1−η_in², 0)`, equally spaced in ray angle. Empty in the deterministic
/// regime, where the boundary is the unit square itself.
pub fn boundary_curve(r: &Region2, steps: usize) -> Vec<[f64; 2]> {
    if r.is_deterministic() || steps == 0 {
        return Vec::new();
    }
    (0..=steps)
        .map(|k| {
            let dir = if k == 0 {
                [0.0, 1.0]
            } else if k == steps {
                [1.0, 0.0]
            } else {
                let theta = FRAC_PI_2 * (1.0 - k as f64 / steps as f64);
                [theta.cos(), theta.sin()]
            };
            let t = ray_boundary(r, dir);
            [t * dir[0], t * dir[1]]
        })
        .collect()
}

/// Two originals `|ψᵢ⟩` with supplements `|φᵢ⟩`, to be turned into
/// `|ψᵢ⟩^⊗m` with prior probabilities `pᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemJson", into = "ProblemJson")]
pub struct TwoStateProblem {
    alpha: C64,
    beta: C64,
    m: u32,
    priors: [f64; 2],
}

impl TwoStateProblem {
    pub fn new(alpha: C64, beta: C64, m: u32, priors: [f64; 2]) -> Result<Self> {
        if alpha.norm().is_nan() || alpha.norm() >= 1.0 {
            return Err(Error::out_of_range("|alpha|", alpha.norm(), "[0, 1)"));
        }
        check_unit("|beta|", beta.norm())?;
        if m < 2 {
            return Err(Error::out_of_range("m", m as f64, "[2, ∞)"));
        }
        for p in priors {
            check_unit("prior", p)?;
        }
        if (priors[0] + priors[1] - 1.0).abs() > 1e-12 {
            return Err(Error::out_of_range(
                "p1 + p2",
                priors[0] + priors[1],
                "{1}",
            ));
        }
        Ok(TwoStateProblem {
            alpha,
            beta,
            m,
            priors,
        })
    }

    /// Real overlaps and equal priors.
    pub fn equal_priors(alpha: f64, beta: f64, m: u32) -> Result<Self> {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0), m, [0.5, 0.5])
    }

    pub fn alpha_abs(&self) -> f64 {
        self.alpha.norm()
    }

    pub fn beta_abs(&self) -> f64 {
        self.beta.norm()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn priors(&self) -> [f64; 2] {
        self.priors
    }

    /// Region of the joint machine `|ψᵢ⟩|φᵢ⟩ → |ψᵢ⟩^⊗m`.
    pub fn region(&self) -> Region2 {
        let a = self.alpha_abs();
        Region2 {
            eta_in: a * self.beta_abs(),
            eta_out: a.powi(self.m as i32),
        }
    }

    /// Region of the supplement-only machine `|φᵢ⟩ → |ψᵢ⟩^⊗(m−1)`.
    pub fn supplement_region(&self) -> Region2 {
        Region2 {
            eta_in: self.beta_abs(),
            eta_out: self.alpha_abs().powi(self.m as i32 - 1),
        }
    }

    /// Region of the original-only machine `|ψᵢ⟩ → |ψᵢ⟩^⊗m`.
    pub fn original_region(&self) -> Region2 {
        let a = self.alpha_abs();
        Region2 {
            eta_in: a,
            eta_out: a.powi(self.m as i32),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    #[serde(with = "serde_cplx::pair")]
    alpha: C64,
    #[serde(with = "serde_cplx::pair")]
    beta: C64,
    m: u32,
    #[serde(default = "equal")]
    priors: [f64; 2],
}

fn equal() -> [f64; 2] {
    [0.5, 0.5]
}

impl TryFrom<ProblemJson> for TwoStateProblem {
    type Error = Error;

    fn try_from(j: ProblemJson) -> Result<Self> {
        TwoStateProblem::new(j.alpha, j.beta, j.m, j.priors)
    }
}

impl From<TwoStateProblem> for ProblemJson {
    fn from(p: TwoStateProblem) -> Self {
        ProblemJson {
            alpha: p.alpha,
            beta: p.beta,
            m: p.m,
            priors: p.priors,
        }
    }
}

/// Maximum of `p₁γ₁ + p₂γ₂` over a region, with an achieving point.
///
/// Golden-section search of `p₁γ₁ + p₂·boundary_gamma2(γ₁)` over
/// `γ₁ ∈ [0, max_gamma1]`; the upper boundary of a convex region is
/// concave, so the objective is unimodal.
pub fn gamma_totmax_region(r: &Region2, priors: [f64; 2]) -> (f64, [f64; 2]) {
    if r.is_deterministic() {
        return (priors[0] + priors[1], [1.0, 1.0]);
    }
    let [p1, p2] = priors;
    let objective = |g1: f64| -> f64 {
        boundary_gamma2(r, g1).map_or(f64::NEG_INFINITY, |g2| p1 * g1 + p2 * g2)
    };
    let hi = r.max_gamma1();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while b - a > 1e-10 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        }
    }
    let best = [0.0, hi, 0.5 * (a + b), x1, x2]
        .into_iter()
        .map(|g1| (objective(g1), g1))
        .fold((f64::NEG_INFINITY, 0.0), |acc, c| if c.0 > acc.0 { c } else { acc });
    let g1 = best.1;
    let g2 = boundary_gamma2(r, g1).unwrap_or(0.0);
    (best.0, [g1, g2])
}

/// Optimal prior-weighted success probability `γ_totmax` of the joint machine.
pub fn gamma_totmax_2(problem: &TwoStateProblem) -> (f64, [f64; 2]) {
    gamma_totmax_region(&problem.region(), problem.priors())
}

/// `(1−|αβ|)/(1−|α|^m)`, the equal-prior optimum.
pub fn equal_prior_closed_form(problem: &TwoStateProblem) -> f64 {
    let r = problem.region();
    if r.is_deterministic() {
        1.0
    } else {
        (1.0 - r.eta_in) / (1.0 - r.eta_out)
    }
}

/// `γ_totmax` as `m → ∞`, i.e. unambiguous discrimination of the product states.
pub fn discrimination_limit(problem: &TwoStateProblem) -> f64 {
    let r = Region2 {
        eta_in: problem.region().eta_in,
        eta_out: 0.0,
    };
    gamma_totmax_region(&r, problem.priors()).0
}

/// Two-step protocol: Bob's machine `γ^B` on the supplement, then Alice's
/// machine `γ^A` on the original if Bob failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub gamma_b: [f64; 2],
    pub gamma_a: [f64; 2],
    /// `γᵢ^B + (1−γᵢ^B)γᵢ^A`.
    pub achieved: [f64; 2],
    pub target: [f64; 2],
    /// Region inequality left-hand side for Bob's machine.
    pub slack_b: f64,
    /// Region inequality left-hand side for Alice's machine.
    pub slack_a: f64,
    /// `min_i(achievedᵢ − targetᵢ)`.
    pub margin: f64,
}

/// Splits an achievable `(g1, g2)` of the joint machine into a two-step
/// protocol doing at least as well.
///
/// The target is scaled out along its ray to the boundary; Bob's pair is
/// the boundary point of his own region on the same ray, and Alice's pair
/// follows from `1−γᵢ^A = (1−γᵢ)/(1−γᵢ^B)`.
pub fn decompose(problem: &TwoStateProblem, g1: f64, g2: f64) -> Result<Decomposition> {
    let joint = problem.region();
    if !region_feasible(&joint, g1, g2)? {
        return Err(Error::Infeasible(format!(
            "({g1}, {g2}) is outside the achievable region (slack {:e})",
            joint.slack(g1, g2)
        )));
    }
    let bob = problem.supplement_region();
    let alice = problem.original_region();

    let (gamma_b, gamma_a) = if bob.is_deterministic() {
        ([1.0, 1.0], [0.0, 0.0])
    } else if g1 == 0.0 && g2 == 0.0 {
        ([0.0, 0.0], [0.0, 0.0])
    } else {
        let swap = g1 < g2;
        let (h1, h2) = if swap { (g2, g1) } else { (g1, g2) };
        let x = h2 / h1;
        let t = ray_boundary(&joint, [1.0, x]);
        let tb = ray_boundary(&bob, [1.0, x]);
        let b = [tb, x * tb];
        let a = [
            (1.0 - (1.0 - t) / (1.0 - b[0])).clamp(0.0, 1.0),
            (1.0 - (1.0 - x * t) / (1.0 - b[1])).clamp(0.0, 1.0),
        ];
        if swap {
            ([b[1], b[0]], [a[1], a[0]])
        } else {
            (b, a)
        }
    };
    let achieved = [0, 1].map(|i| gamma_b[i] + (1.0 - gamma_b[i]) * gamma_a[i]);
    Ok(Decomposition {
        gamma_b,
        gamma_a,
        achieved,
        target: [g1, g2],
        slack_b: bob.slack(gamma_b[0], gamma_b[1]),
        slack_a: alice.slack(gamma_a[0], gamma_a[1]),
        margin: (achieved[0] - g1).min(achieved[1] - g2),
    })
}
