//! Equal-overlap state families and the one-way assistance gap.
//!
//! The originals `|ψⱼ⟩` have common overlap `α = −|α|` with
//! `0 < |α| < 1/(n−1)`; the supplements `|φⱼ⟩` have common overlap
//! `β = −1/(n−1)`, so `Σⱼ|φⱼ⟩ = 0`. With quantum assistance the uniform-prior
//! optimum is at least `(n−1−|α|)/(n−1−|α|^m)`; with only classical
//! assistance it is at most `(1−|α|)/(1−(n−1)|α|^m)`.

use serde::{Deserialize, Serialize};

use crate::feasibility::{self, FeasibilityReport, MachineSpec};
use crate::gram::{gram_of, GramMatrix, NullVector, StateSet, Tolerances};
use crate::{CVector, Error, Result, C64};

/// Points in the coarse scan that locates the first sign change of the overlap curve.
const Z_SCAN: usize = 1024;

/// Common pairwise overlap `z[(n−2)z − 2√(1−(n−1)z²)]` of the family built from `z`.
pub fn family_overlap(n: usize, z: f64) -> f64 {
    let nf = n as f64;
    z * ((nf - 2.0) * z - 2.0 * (1.0 - (nf - 1.0) * z * z).max(0.0).sqrt())
}

/// Upper end `1/√(n(n−1))` of the construction parameter.
pub fn z_max(n: usize) -> f64 {
    let nf = n as f64;
    1.0 / (nf * (nf - 1.0)).sqrt()
}

/// `n` states with equal pairwise overlap, parameterized by `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricFamily {
    pub n: usize,
    pub z: f64,
    pub overlap: f64,
}

impl SymmetricFamily {
    /// The explicit vectors `√(1−(n−1)z²)|j⟩ − z·Σ_{i≠j}|i⟩`.
    pub fn states(&self) -> Result<StateSet> {
        let n = self.n;
        let diag = (1.0 - (n as f64 - 1.0) * self.z * self.z).max(0.0).sqrt();
        let vectors = (0..n)
            .map(|j| {
                CVector::from_fn(n, |i, _| {
                    C64::new(if i == j { diag } else { -self.z }, 0.0)
                })
            })
            .collect();
        StateSet::new(vectors)
    }
}

/// Builds a family with the requested common overlap.
///
/// `z` is found by bisection on the overlap curve, starting from the first
/// sign change of a coarse scan so the smallest root wins. The resulting
/// Gram matrix is checked against the target.
pub fn build_family(n: usize, target_overlap: f64) -> Result<(SymmetricFamily, StateSet)> {
    if n < 2 {
        return Err(Error::out_of_range("n", n as f64, "[2, ∞)"));
    }
    let floor = -1.0 / (n as f64 - 1.0);
    if !(floor..=0.0).contains(&target_overlap) {
        return Err(Error::out_of_range(
            "target overlap",
            target_overlap,
            format!("[{floor}, 0]"),
        ));
    }
    let g = |z: f64| family_overlap(n, z) - target_overlap;
    let zmax = z_max(n);
    let z = if target_overlap == 0.0 {
        0.0
    } else if target_overlap == floor {
        // the curve bottoms out here, so bisection would only resolve z to ~√ε
        zmax
    } else {
        let step = zmax / Z_SCAN as f64;
        let k = (1..=Z_SCAN)
            .find(|&k| g(if k == Z_SCAN { zmax } else { k as f64 * step }) <= 0.0)
            .unwrap_or(Z_SCAN);
        let mut lo = (k - 1) as f64 * step;
        let mut hi = if k == Z_SCAN { zmax } else { k as f64 * step };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if g(lo).abs() < g(hi).abs() {
            lo
        } else {
            hi
        }
    };
    let bisection = Tolerances::default().bisection;
    if g(z).abs() > bisection {
        return Err(Error::Consistency(format!(
            "overlap bisection stalled at z = {z} (residual {:e})",
            g(z)
        )));
    }
    let family = SymmetricFamily {
        n,
        z,
        overlap: family_overlap(n, z),
    };
    let states = family.states()?;
    let gram = gram_of(&states);
    for i in 0..n {
        for j in 0..n {
            if i != j && (gram.entry(i, j) - C64::new(target_overlap, 0.0)).norm() > 1e-10 {
                return Err(Error::Consistency(format!(
                    "family Gram entry ({i},{j}) = {} differs from {target_overlap}",
                    gram.entry(i, j)
                )));
            }
        }
    }
    Ok((family, states))
}

/// `(n, m, |α|)` with `β = −1/(n−1)` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GapInstanceJson", into = "GapInstanceJson")]
pub struct GapInstance {
    n: usize,
    m: u32,
    alpha_abs: f64,
}

#[derive(Serialize, Deserialize)]
struct GapInstanceJson {
    n: usize,
    m: u32,
    alpha_abs: f64,
}

impl TryFrom<GapInstanceJson> for GapInstance {
    type Error = Error;

    fn try_from(j: GapInstanceJson) -> Result<Self> {
        GapInstance::new(j.n, j.m, j.alpha_abs)
    }
}

impl From<GapInstance> for GapInstanceJson {
    fn from(g: GapInstance) -> Self {
        GapInstanceJson {
            n: g.n,
            m: g.m,
            alpha_abs: g.alpha_abs,
        }
    }
}

impl GapInstance {
    pub fn new(n: usize, m: u32, alpha_abs: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::out_of_range("n", n as f64, "[3, ∞)"));
        }
        if m < 2 {
            return Err(Error::out_of_range("m", m as f64, "[2, ∞)"));
        }
        let cap = 1.0 / (n as f64 - 1.0);
        if !(alpha_abs > 0.0 && alpha_abs < cap) {
            return Err(Error::out_of_range(
                "|alpha|",
                alpha_abs,
                format!("(0, {cap})"),
            ));
        }
        Ok(GapInstance { n, m, alpha_abs })
    }

    /// Only uniform priors `pᵢ = 1/n` are supported.
    pub fn with_priors(n: usize, m: u32, alpha_abs: f64, priors: &[f64]) -> Result<Self> {
        let inst = Self::new(n, m, alpha_abs)?;
        if priors.len() != n {
            return Err(Error::DimensionMismatch {
                what: "priors",
                expected: n,
                found: priors.len(),
            });
        }
        let uniform = 1.0 / n as f64;
        if priors.iter().any(|p| (p - uniform).abs() > 1e-12) {
            return Err(Error::NonUniformPriors);
        }
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha_abs(&self) -> f64 {
        self.alpha_abs
    }

    pub fn beta_abs(&self) -> f64 {
        1.0 / (self.n as f64 - 1.0)
    }

    /// Signed overlap `α = −|α|`.
    pub fn alpha(&self) -> f64 {
        -self.alpha_abs
    }

    /// Signed overlap `β = −1/(n−1)`.
    pub fn beta(&self) -> f64 {
        -self.beta_abs()
    }

    /// Gram matrix of `|ψᵢ⟩|φᵢ⟩`: off-diagonal `αβ = |α|/(n−1)`.
    pub fn input_gram(&self) -> GramMatrix {
        uniform_trusted(self.n, self.alpha() * self.beta())
    }

    /// Gram matrix of `|ψᵢ⟩^⊗k`: off-diagonal `α^k`, sign included.
    pub fn copies_gram(&self, k: u32) -> GramMatrix {
        uniform_trusted(self.n, self.alpha().powi(k as i32))
    }
}

/// `(1−c)I + cZ`; all callers pass `c` inside `[−1/(n−1), 1]`.
fn uniform_trusted(n: usize, c: f64) -> GramMatrix {
    GramMatrix::uniform_real(n, c).expect("overlap inside the PSD range")
}

/// Lower bound on the quantum-assisted optimum together with a machine attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOneWitness {
    /// `(n−1−|α|)/(n−1−|α|^m)`.
    pub bound: f64,
    pub witness: MachineSpec,
    /// Uniform-prior total `Σᵢγᵢ/n` of the witness.
    pub total: f64,
    pub report: FeasibilityReport,
}

/// `(n−1−|α|)/(n−1−|α|^m)`.
pub fn scenario1_bound(inst: &GapInstance) -> f64 {
    let (nm1, a) = (inst.n as f64 - 1.0, inst.alpha_abs);
    (nm1 - a) / (nm1 - a.powi(inst.m as i32))
}

/// Lower bound plus an explicit witness machine.
///
/// Even `m`: `γᵢ = (1−|β||α|)/(1−|α|^m)` with identical flags. Odd `m`:
/// `γᵢ = (1−|β||α|)/(1−|β||α|^m)` with flags of common overlap `−1/(n−1)`.
/// In both cases the residual is a nonnegative multiple of the all-ones matrix.
pub fn scenario1_lower(inst: &GapInstance) -> Result<ScenarioOneWitness> {
    let n = inst.n;
    let (a, b) = (inst.alpha_abs, inst.beta_abs());
    let am = a.powi(inst.m as i32);
    let (gamma, flags) = if inst.m.is_multiple_of(2) {
        ((1.0 - b * a) / (1.0 - am), GramMatrix::all_ones(n))
    } else {
        ((1.0 - b * a) / (1.0 - b * am), uniform_trusted(n, inst.beta()))
    };
    let witness = MachineSpec::new(
        inst.input_gram(),
        inst.copies_gram(inst.m),
        vec![gamma; n],
        flags,
    )?;
    let report = feasibility::check(&witness, Tolerances::default().psd);
    if !report.feasible {
        return Err(Error::Consistency(format!(
            "scenario I witness rejected (min eigenvalue {:e})",
            report.min_eigenvalue
        )));
    }
    let total = witness.gammas().iter().sum::<f64>() / n as f64;
    Ok(ScenarioOneWitness {
        bound: scenario1_bound(inst),
        witness,
        total,
        report,
    })
}

/// `(1−|α|)/(1−(n−1)|α|^m)`.
pub fn scenario2_upper(inst: &GapInstance) -> f64 {
    let a = inst.alpha_abs;
    (1.0 - a) / (1.0 - (inst.n as f64 - 1.0) * a.powi(inst.m as i32))
}

/// `(n−2)|α|(1+|α|^m−n|α|^{m−1}) / [(n−1−|α|^m)(1−(n−1)|α|^m)]`.
pub fn gap_closed_form(inst: &GapInstance) -> f64 {
    let (nf, a, m) = (inst.n as f64, inst.alpha_abs, inst.m as i32);
    let am = a.powi(m);
    (nf - 2.0) * a * (1.0 + am - nf * a.powi(m - 1)) / ((nf - 1.0 - am) * (1.0 - (nf - 1.0) * am))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub n: usize,
    pub m: u32,
    pub alpha_abs: f64,
    pub lower_i: f64,
    pub upper_ii: f64,
    pub gap_lower_bound: f64,
    /// `|(lower_i − upper_ii) − gap_lower_bound|`.
    pub identity_residual: f64,
    pub positive: bool,
    pub summary: String,
}

/// Identity tolerance between the bound difference and the gap closed form.
pub const GAP_IDENTITY_TOL: f64 = 1e-12;

pub fn gap_certificate(inst: &GapInstance) -> Result<GapCertificate> {
    let lower_i = scenario1_bound(inst);
    let upper_ii = scenario2_upper(inst);
    let gap = gap_closed_form(inst);
    let identity_residual = ((lower_i - upper_ii) - gap).abs();
    if identity_residual > GAP_IDENTITY_TOL {
        return Err(Error::Consistency(format!(
            "bound difference and gap formula disagree by {identity_residual:e}"
        )));
    }
    let positive = gap > 0.0;
    let summary = format!(
        "n={} m={} |alpha|={}: quantum >= {:.6}, classical <= {:.6}, gap >= {:.6} ({})",
        inst.n,
        inst.m,
        inst.alpha_abs,
        lower_i,
        upper_ii,
        gap,
        if positive { "strict gap certified" } else { "no gap certified" }
    );
    Ok(GapCertificate {
        n: inst.n,
        m: inst.m,
        alpha_abs: inst.alpha_abs,
        lower_i,
        upper_ii,
        gap_lower_bound: gap,
        identity_residual,
        positive,
        summary,
    })
}

/// Outcome of applying the support obstruction to the supplement-only machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOneReport {
    pub n: usize,
    pub m: u32,
    pub alpha_abs: f64,
    pub beta: f64,
    /// Copies Bob is asked to produce (`m − 1`).
    pub k: u32,
    pub null_vectors: Vec<NullVector>,
    /// Zero-based indices forced to `γ = 0`.
    pub killed: Vec<usize>,
    pub all_killed: bool,
}

/// Shows that Bob alone cannot produce `m−1` copies from the supplements.
pub fn lemma1_demo(n: usize, m: u32, alpha_abs: f64) -> Result<LemmaOneReport> {
    lemma1_demo_with_beta(n, m, alpha_abs, -1.0 / (n as f64 - 1.0))
}

/// As [`lemma1_demo`] with a caller-chosen supplement overlap `beta`.
pub fn lemma1_demo_with_beta(
    n: usize,
    m: u32,
    alpha_abs: f64,
    beta: f64,
) -> Result<LemmaOneReport> {
    lemma1_demo_with_tol(n, m, alpha_abs, beta, Tolerances::default().null)
}

/// As [`lemma1_demo_with_beta`] with an explicit relative null-space tolerance.
pub fn lemma1_demo_with_tol(
    n: usize,
    m: u32,
    alpha_abs: f64,
    beta: f64,
    tol: f64,
) -> Result<LemmaOneReport> {
    let inst = GapInstance::new(n, m, alpha_abs)?;
    let (_, phi) = build_family(n, beta)?;
    let phi_gram = gram_of(&phi);
    let k = m - 1;
    let outputs = inst.copies_gram(k);
    let killed: Vec<usize> = feasibility::killed_support(&phi_gram, &outputs, tol)?
        .into_iter()
        .collect();
    Ok(LemmaOneReport {
        n,
        m,
        alpha_abs,
        beta,
        k,
        null_vectors: crate::gram::null_space(&phi_gram, tol),
        all_killed: killed.len() == n,
        killed,
    })
}
