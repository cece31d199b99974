//! Machine existence at the Gram-matrix level.
//!
//! A machine `{|Φᵢ⟩ →γᵢ→ |Ψᵢ⟩}` exists iff for some normalized flag states
//! the residual `Ω = X − √Γ·Y·√Γ` is PSD, with `X = [⟨Φᵢ|Φⱼ⟩]`,
//! `Y = [⟨Ψᵢ|Ψⱼ⟩⟨P⁽ⁱ⁾|P⁽ʲ⁾⟩]` and `Γ = diag(γ)`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gram::{eigh, gram_of, null_space, verdict_from, GramMatrix, StateSet, Tolerances};
use crate::serde_cplx;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Input Gram, output overlaps, success probabilities and flag Gram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MachineSpecJson", into = "MachineSpecJson")]
pub struct MachineSpec {
    input_gram: GramMatrix,
    output_overlaps: GramMatrix,
    gammas: Vec<f64>,
    flag_gram: GramMatrix,
}

impl MachineSpec {
    pub fn new(
        input_gram: GramMatrix,
        output_overlaps: GramMatrix,
        gammas: Vec<f64>,
        flag_gram: GramMatrix,
    ) -> Result<Self> {
        validate_dims(&input_gram, &output_overlaps, &gammas)?;
        if flag_gram.n() != input_gram.n() {
            return Err(Error::DimensionMismatch {
                what: "flag Gram",
                expected: input_gram.n(),
                found: flag_gram.n(),
            });
        }
        Ok(MachineSpec {
            input_gram,
            output_overlaps,
            gammas,
            flag_gram,
        })
    }

    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    pub fn input_gram(&self) -> &GramMatrix {
        &self.input_gram
    }

    pub fn output_overlaps(&self) -> &GramMatrix {
        &self.output_overlaps
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn flag_gram(&self) -> &GramMatrix {
        &self.flag_gram
    }
}

#[derive(Serialize, Deserialize)]
struct MachineSpecJson {
    input_gram: GramMatrix,
    output_overlaps: GramMatrix,
    gammas: Vec<f64>,
    flag_gram: GramMatrix,
}

impl TryFrom<MachineSpecJson> for MachineSpec {
    type Error = Error;

    fn try_from(j: MachineSpecJson) -> Result<Self> {
        MachineSpec::new(j.input_gram, j.output_overlaps, j.gammas, j.flag_gram)
    }
}

impl From<MachineSpec> for MachineSpecJson {
    fn from(s: MachineSpec) -> Self {
        MachineSpecJson {
            input_gram: s.input_gram,
            output_overlaps: s.output_overlaps,
            gammas: s.gammas,
            flag_gram: s.flag_gram,
        }
    }
}

fn validate_dims(input: &GramMatrix, output: &GramMatrix, gammas: &[f64]) -> Result<()> {
    let n = input.n();
    if output.n() != n {
        return Err(Error::DimensionMismatch {
            what: "output overlaps",
            expected: n,
            found: output.n(),
        });
    }
    if gammas.len() != n {
        return Err(Error::DimensionMismatch {
            what: "success probabilities",
            expected: n,
            found: gammas.len(),
        });
    }
    for &g in gammas {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::out_of_range("gamma", g, "[0, 1]"));
        }
    }
    Ok(())
}

/// How the flag Gram of a report was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlagSearch {
    /// Supplied by the caller.
    Given,
    /// Optimal choice, exact for n ≤ 2.
    Exact,
    /// Best of a finite candidate list (n ≥ 3); a negative verdict is not a proof.
    Heuristic { candidates: usize },
}

/// Verdict plus the PSD witness `Ω` behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    #[serde(with = "serde_cplx::matrix")]
    pub residual: CMatrix,
    /// Eigenvalues of `Ω`, ascending.
    pub residual_eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    pub flag_gram_used: GramMatrix,
    pub tolerance: f64,
    pub search: FlagSearch,
}

/// `Ω = X − √Γ·(O∘F)·√Γ`.
pub fn residual(
    input: &GramMatrix,
    output: &GramMatrix,
    flags: &GramMatrix,
    gammas: &[f64],
) -> CMatrix {
    let n = input.n();
    let root: Vec<f64> = gammas.iter().map(|g| g.sqrt()).collect();
    CMatrix::from_fn(n, n, |i, j| {
        input.entry(i, j) - output.entry(i, j) * flags.entry(i, j) * (root[i] * root[j])
    })
}

fn report(
    input: &GramMatrix,
    output: &GramMatrix,
    flags: GramMatrix,
    gammas: &[f64],
    tol: f64,
    search: FlagSearch,
) -> FeasibilityReport {
    let omega = residual(input, output, &flags, gammas);
    let verdict = verdict_from(eigh(&omega), tol);
    FeasibilityReport {
        feasible: verdict.psd,
        residual: omega,
        residual_eigenvalues: verdict.eigenvalues,
        min_eigenvalue: verdict.min_eigenvalue,
        flag_gram_used: flags,
        tolerance: tol,
        search,
    }
}

/// Tests a fully specified machine.
pub fn check(spec: &MachineSpec, tol: f64) -> FeasibilityReport {
    report(
        &spec.input_gram,
        &spec.output_overlaps,
        spec.flag_gram.clone(),
        &spec.gammas,
        tol,
        FlagSearch::Given,
    )
}

/// Knobs for [`feasible_any_flags`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub tol_psd: f64,
    /// Random flag Grams tried after the structured candidates (n ≥ 3).
    pub iterations: usize,
    pub seed: u64,
    /// Grid points for the symmetric-candidate overlap sweep (n ≥ 3).
    pub symmetric_grid: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tol_psd: Tolerances::default().psd,
            iterations: 200,
            seed: 0,
            symmetric_grid: 21,
        }
    }
}

/// Optimal flag overlap for two states: the `c` with `|c| ≤ 1` minimizing
/// `|X₁₂ − √(γ₁γ₂)·O₁₂·c|`.
pub fn optimal_pair_flag(x12: C64, o12: C64, g1: f64, g2: f64) -> C64 {
    let y = o12 * (g1 * g2).sqrt();
    if y.norm() == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let ratio = x12 / y;
    let modulus = ratio.norm();
    if modulus <= 1.0 {
        ratio
    } else {
        ratio / modulus
    }
}

/// Searches flag Grams for one that makes `Ω` PSD.
///
/// For n ≤ 2 the optimum is analytic and the verdict is exact. For n ≥ 3
/// the all-ones, identity, equal-overlap and random candidates are tried in
/// turn; the first feasible one is returned, otherwise the one with the
/// largest `λ_min(Ω)`.
pub fn feasible_any_flags(
    input: &GramMatrix,
    output: &GramMatrix,
    gammas: &[f64],
    cfg: &SearchConfig,
) -> Result<FeasibilityReport> {
    validate_dims(input, output, gammas)?;
    let n = input.n();
    let tol = cfg.tol_psd;
    if n == 1 {
        return Ok(report(input, output, GramMatrix::all_ones(1), gammas, tol, FlagSearch::Exact));
    }
    if n == 2 {
        let c = optimal_pair_flag(input.entry(0, 1), output.entry(0, 1), gammas[0], gammas[1]);
        let mut f = CMatrix::identity(2, 2);
        f[(0, 1)] = c;
        f[(1, 0)] = c.conj();
        let flags = GramMatrix::from_trusted(f);
        return Ok(report(input, output, flags, gammas, tol, FlagSearch::Exact));
    }

    let mut tried = 0usize;
    let mut best: Option<FeasibilityReport> = None;
    let mut consider = |flags: GramMatrix| -> bool {
        tried += 1;
        let r = report(input, output, flags, gammas, tol, FlagSearch::Heuristic { candidates: 0 });
        let done = r.feasible;
        if best.as_ref().is_none_or(|b| r.min_eigenvalue > b.min_eigenvalue) {
            best = Some(r);
        }
        done
    };

    let mut found = consider(GramMatrix::all_ones(n)) || consider(GramMatrix::identity(n));
    if !found {
        let lo = -1.0 / (n as f64 - 1.0);
        let steps = cfg.symmetric_grid.max(2) - 1;
        for k in 0..=steps {
            let c = lo + (1.0 - lo) * k as f64 / steps as f64;
            if consider(uniform_flags(n, c)) {
                found = true;
                break;
            }
        }
    }
    if !found {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.iterations {
            if consider(random_flags(n, &mut rng)) {
                break;
            }
        }
    }
    let mut r = best.expect("at least one candidate was evaluated");
    r.search = FlagSearch::Heuristic { candidates: tried };
    Ok(r)
}

/// `(1−c)I + cZ` without re-validation; `c ∈ [−1/(n−1), 1]` keeps it PSD.
fn uniform_flags(n: usize, c: f64) -> GramMatrix {
    GramMatrix::from_trusted(CMatrix::from_fn(n, n, |i, j| {
        C64::new(if i == j { 1.0 } else { c }, 0.0)
    }))
}

/// Gram matrix of n independent, uniformly distributed unit vectors in ℂⁿ.
fn random_flags(n: usize, rng: &mut ChaCha8Rng) -> GramMatrix {
    let vectors = (0..n)
        .map(|_| {
            let v = CVector::from_fn(n, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let norm = v.norm();
            v.unscale(norm)
        })
        .collect();
    let set = StateSet::with_tolerance(vectors, 1e-12).expect("normalized by construction");
    gram_of(&set)
}

/// Indices `j` that any machine `{Φ → Ψ}` must leave with `γⱼ = 0`: the
/// union of supports of the input null vectors, provided the outputs are
/// linearly independent.
///
/// `tol` is used both as the null-space threshold and as the cutoff on
/// `|bⱼ|`.
pub fn killed_support(
    input: &GramMatrix,
    output: &GramMatrix,
    tol: f64,
) -> Result<BTreeSet<usize>> {
    if output.n() != input.n() {
        return Err(Error::DimensionMismatch {
            what: "output overlaps",
            expected: input.n(),
            found: output.n(),
        });
    }
    let out_eig = eigh(output.entries());
    if out_eig.min() <= tol * out_eig.spectral_norm() {
        return Err(Error::LemmaInapplicable {
            min_eigenvalue: out_eig.min(),
        });
    }
    Ok(null_space(input, tol)
        .iter()
        .flat_map(|b| {
            b.coefficients
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(j, _)| j)
                .collect::<Vec<_>>()
        })
        .collect())
}

/// Largest n accepted by [`brute_region`].
pub const BRUTE_REGION_MAX_N: usize = 3;

/// Every point of a `step`-spaced grid over `[0,1]ⁿ` that
/// [`feasible_any_flags`] accepts, in row-major grid order.
pub fn brute_region(
    input: &GramMatrix,
    output: &GramMatrix,
    step: f64,
    cfg: &SearchConfig,
) -> Result<Vec<Vec<f64>>> {
    let n = input.n();
    if n > BRUTE_REGION_MAX_N {
        return Err(Error::TooLarge {
            what: "brute-force region",
            n,
            max: BRUTE_REGION_MAX_N,
        });
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::out_of_range("grid step", step, "(0, 1]"));
    }
    validate_dims(input, output, &vec![0.0; n])?;
    let per_axis = (1.0 / step).round() as usize + 1;
    let total = per_axis.pow(n as u32);
    let point = |mut idx: usize| -> Vec<f64> {
        let mut g = vec![0.0; n];
        for slot in g.iter_mut().rev() {
            *slot = ((idx % per_axis) as f64 / (per_axis - 1) as f64).min(1.0);
            idx /= per_axis;
        }
        g
    };
    let feasible = (0..total)
        .into_par_iter()
        .map(|idx| {
            let g = point(idx);
            feasible_any_flags(input, output, &g, cfg).map(|r| r.feasible.then_some(g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(feasible.into_iter().flatten().collect())
}
