//! State sets, Gram matrices and the Hermitian linear algebra underneath them.
//!
//! Inner products are conjugate-linear in the first argument:
//! `⟨u|v⟩ = Σₖ conj(uₖ)·vₖ`.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::serde_cplx::{from_pair, matrix_to_rows, rows_to_matrix, vector_to_rows};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// PSD slack, relative to `max(1, ‖M‖₂)`.
    pub psd: f64,
    /// Null-space threshold, relative to `‖G‖₂`.
    pub null: f64,
    /// Eigenvalues at or below this are dropped when factorizing a Gram matrix.
    pub rank: f64,
    /// Allowed `‖M − M†‖_F / ‖M‖_F` before a matrix is rejected as non-Hermitian.
    pub hermitian: f64,
    /// Allowed deviation of squared norms and Gram diagonals from 1.
    pub unit: f64,
    /// Target accuracy of scalar root finding.
    pub bisection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: 1e-9,
            null: 1e-9,
            rank: 1e-10,
            hermitian: 1e-12,
            unit: 1e-9,
            bisection: 1e-12,
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub(crate) struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the same order as `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Decomposes an (already Hermitian) matrix.
pub(crate) fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Replaces `m` by `(m + m†)/2` when its asymmetry is round-off sized.
pub(crate) fn hermitize(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let adj = m.adjoint();
    let asymmetry = (m - &adj).norm();
    let allowed = rel_tol * m.norm();
    if asymmetry > allowed {
        return Err(Error::NotHermitian { asymmetry, allowed });
    }
    Ok((m + adj).unscale(2.0))
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub spectral_norm: f64,
    /// Relative tolerance the verdict was taken at.
    pub tolerance: f64,
}

/// PSD test: `λ_min(M) ≥ −tol·max(1, ‖M‖₂)`.
///
/// `m` is symmetrized first; an asymmetry beyond round-off is an error.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<PsdVerdict> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::out_of_range("tolerance", tol, "[0, ∞)"));
    }
    let h = hermitize(m, Tolerances::default().hermitian)?;
    let eig = eigh(&h);
    Ok(verdict_from(eig, tol))
}

pub(crate) fn verdict_from(eig: HermitianEigen, tol: f64) -> PsdVerdict {
    let spectral_norm = eig.spectral_norm();
    let min_eigenvalue = eig.min();
    PsdVerdict {
        psd: min_eigenvalue >= -tol * spectral_norm.max(1.0),
        min_eigenvalue,
        eigenvalues: eig.values,
        spectral_norm,
        tolerance: tol,
    }
}

/// A list of normalized pure states sharing one Hilbert-space dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSetJson", into = "StateSetJson")]
pub struct StateSet {
    dimension: usize,
    vectors: Vec<CVector>,
    labels: Option<Vec<String>>,
}

impl StateSet {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        Self::with_tolerance(vectors, Tolerances::default().unit)
    }

    /// Validates with an explicit bound on `|‖v‖² − 1|`.
    pub fn with_tolerance(vectors: Vec<CVector>, unit_tol: f64) -> Result<Self> {
        let dimension = vectors.first().map_or(0, |v| v.len());
        if vectors.is_empty() || dimension == 0 {
            return Err(Error::Empty);
        }
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::VectorDimension {
                    index,
                    expected: dimension,
                    found: v.len(),
                });
            }
            let norm_sq = v.norm_squared();
            if norm_sq.is_nan() || (norm_sq - 1.0).abs() > unit_tol {
                return Err(Error::NotNormalized { index, norm_sq });
            }
        }
        Ok(StateSet {
            dimension,
            vectors,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.vectors.len() {
            return Err(Error::DimensionMismatch {
                what: "labels",
                expected: self.vectors.len(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

#[derive(Serialize, Deserialize)]
struct StateSetJson {
    dimension: usize,
    vectors: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<StateSetJson> for StateSet {
    type Error = Error;

    fn try_from(j: StateSetJson) -> Result<Self> {
        let vectors = j
            .vectors
            .iter()
            .map(|v| CVector::from_iterator(v.len(), v.iter().copied().map(from_pair)))
            .collect();
        let set = StateSet::new(vectors)?;
        if set.dimension != j.dimension {
            return Err(Error::DimensionMismatch {
                what: "state set dimension",
                expected: j.dimension,
                found: set.dimension,
            });
        }
        match j.labels {
            Some(labels) => set.with_labels(labels),
            None => Ok(set),
        }
    }
}

impl From<StateSet> for StateSetJson {
    fn from(s: StateSet) -> Self {
        StateSetJson {
            dimension: s.dimension,
            vectors: s.vectors.iter().map(vector_to_rows).collect(),
            labels: s.labels,
        }
    }
}

/// Hermitian, unit-diagonal, positive semidefinite matrix of pairwise overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GramMatrixJson", into = "GramMatrixJson")]
pub struct GramMatrix {
    entries: CMatrix,
}

impl GramMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tolerances(entries, &Tolerances::default())
    }

    pub fn with_tolerances(entries: CMatrix, tol: &Tolerances) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        let entries = hermitize(&entries, tol.hermitian)?;
        for index in 0..n {
            let value = entries[(index, index)].re;
            if value.is_nan() || (value - 1.0).abs() > tol.unit {
                return Err(Error::NotUnitDiagonal { index, value });
            }
        }
        for row in 0..n {
            for col in row + 1..n {
                let modulus = entries[(row, col)].norm();
                if modulus > 1.0 + tol.psd {
                    return Err(Error::EntryTooLarge { row, col, modulus });
                }
            }
        }
        let verdict = verdict_from(eigh(&entries), tol.psd);
        if !verdict.psd {
            return Err(Error::NotPsd {
                min_eigenvalue: verdict.min_eigenvalue,
            });
        }
        Ok(GramMatrix { entries })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        GramMatrix { entries }
    }

    pub fn identity(n: usize) -> Self {
        GramMatrix::from_trusted(CMatrix::identity(n, n))
    }

    /// The all-ones matrix `Z` (every state identical).
    pub fn all_ones(n: usize) -> Self {
        GramMatrix::from_trusted(CMatrix::from_element(n, n, C64::new(1.0, 0.0)))
    }

    /// `(1−c)I + cZ` generalized to complex `c`: every entry above the
    /// diagonal is `c`, every entry below is `conj(c)`.
    pub fn uniform(n: usize, c: C64) -> Result<Self> {
        let entries = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
            std::cmp::Ordering::Less => c,
            std::cmp::Ordering::Greater => c.conj(),
        });
        GramMatrix::new(entries)
    }

    /// Convenience for real uniform overlaps.
    pub fn uniform_real(n: usize, c: f64) -> Result<Self> {
        Self::uniform(n, C64::new(c, 0.0))
    }

    /// 2×2 Gram matrix with the given overlap `⟨1|2⟩`.
    pub fn pair(overlap: C64) -> Result<Self> {
        Self::uniform(2, overlap)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.entries).values
    }

    /// Entrywise (Schur) product; the result is again a Gram matrix.
    pub fn hadamard(&self, other: &GramMatrix) -> Result<GramMatrix> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                what: "Gram matrix product",
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(GramMatrix::from_trusted(
            self.entries.component_mul(&other.entries),
        ))
    }

    /// Conjugates by `diag(e^{iθⱼ})`, i.e. multiplies state `j` by a global phase.
    pub fn rephase(&self, phases: &[f64]) -> Result<GramMatrix> {
        if phases.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "phase vector",
                expected: self.n(),
                found: phases.len(),
            });
        }
        let n = self.n();
        Ok(GramMatrix::from_trusted(CMatrix::from_fn(n, n, |i, j| {
            self.entries[(i, j)] * C64::from_polar(1.0, phases[j] - phases[i])
        })))
    }
}

#[derive(Serialize, Deserialize)]
struct GramMatrixJson {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<GramMatrixJson> for GramMatrix {
    type Error = Error;

    fn try_from(j: GramMatrixJson) -> Result<Self> {
        let m = rows_to_matrix(&j.entries).ok_or(Error::NotSquare {
            rows: j.entries.len(),
            cols: 0,
        })?;
        if m.nrows() != j.n {
            return Err(Error::DimensionMismatch {
                what: "Gram matrix size",
                expected: j.n,
                found: m.nrows(),
            });
        }
        GramMatrix::new(m)
    }
}

impl From<GramMatrix> for GramMatrixJson {
    fn from(g: GramMatrix) -> Self {
        GramMatrixJson {
            n: g.n(),
            entries: matrix_to_rows(&g.entries),
        }
    }
}

/// Gram matrix `[⟨vᵢ|vⱼ⟩]` of a state set.
pub fn gram_of(states: &StateSet) -> GramMatrix {
    let n = states.len();
    let vs = states.vectors();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = C64::new(vs[i].norm_squared(), 0.0);
        for j in i + 1..n {
            let ip = vs[i].dotc(&vs[j]);
            g[(i, j)] = ip;
            g[(j, i)] = ip.conj();
        }
    }
    GramMatrix::from_trusted(g)
}

/// Factorizes `G = V·diag(λ)·V†` and returns the columns of `diag(√λ)·V†`
/// for the eigenvalues above the rank threshold. The vector dimension is
/// the numerical rank of `G`.
pub fn realize(g: &GramMatrix) -> Result<StateSet> {
    realize_with(g, &Tolerances::default())
}

pub fn realize_with(g: &GramMatrix, tol: &Tolerances) -> Result<StateSet> {
    let n = g.n();
    let eig = eigh(g.entries());
    let scale = eig.spectral_norm().max(1.0);
    if eig.min() < -tol.psd * scale {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min(),
        });
    }
    let kept: Vec<usize> = (0..n).filter(|&k| eig.values[k] > tol.rank).collect();
    let vectors = (0..n)
        .map(|i| {
            CVector::from_iterator(
                kept.len(),
                kept.iter()
                    .map(|&k| eig.vectors[(i, k)].conj() * eig.values[k].sqrt()),
            )
        })
        .collect();
    // Dropped eigenvalues lie in [−psd·scale, rank], so each squared norm
    // moves by at most n times the larger of the two.
    let dropped = tol.rank.max(tol.psd * scale);
    StateSet::with_tolerance(vectors, tol.unit.max(n as f64 * dropped))
}

/// Unit vector `b` with `G·b ≈ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullVector {
    #[serde(with = "coeffs")]
    pub coefficients: CVector,
    /// `‖G·b‖`.
    pub residual: f64,
}

mod coeffs {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        vector_to_rows(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let rows = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVector::from_iterator(
            rows.len(),
            rows.into_iter().map(from_pair),
        ))
    }
}

/// Orthonormal basis of the eigenspace with eigenvalues `≤ tol·‖G‖₂`.
///
/// Each vector's phase is fixed so that its largest-modulus component is
/// real and positive.
pub fn null_space(g: &GramMatrix, tol: f64) -> Vec<NullVector> {
    let eig = eigh(g.entries());
    let threshold = tol * eig.spectral_norm();
    eig.values
        .iter()
        .enumerate()
        .take_while(|(_, &lambda)| lambda <= threshold)
        .map(|(k, _)| {
            let mut b: CVector = eig.vectors.column(k).into_owned();
            let pivot = b
                .iter()
                .copied()
                .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                .unwrap_or(C64::new(1.0, 0.0));
            if pivot.norm() > 0.0 {
                b *= pivot.conj() / pivot.norm();
            }
            let residual = (g.entries() * &b).norm();
            NullVector {
                coefficients: b,
                residual,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn basis(n: usize, k: usize) -> CVector {
        CVector::from_fn(n, |i, _| if i == k { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn gram_of_orthonormal_basis_is_identity() {
        let set = StateSet::new((0..3).map(|k| basis(3, k)).collect()).unwrap();
        let g = gram_of(&set);
        assert_eq!(g.entries(), &CMatrix::identity(3, 3));
    }

    #[test]
    fn gram_of_matches_direct_dot_products() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let v2 = CVector::from_vec(vec![c(s, 0.0), c(0.5, 0.5)]);
        let g = gram_of(&StateSet::new(vec![v1, v2]).unwrap());
        // ⟨v1|v2⟩ summed by hand
        let expected = c(0.8242640687119285, -0.4);
        assert!((g.entry(0, 1) - expected).norm() < 1e-15);
        assert!((g.entry(1, 0) - expected.conj()).norm() < 1e-15);
    }

    #[test]
    fn unnormalized_vector_is_named() {
        let err = StateSet::new(vec![basis(2, 0), CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])])
            .unwrap_err();
        assert!(matches!(err, Error::NotNormalized { index: 1, .. }));
    }

    #[test]
    fn all_ones_is_psd_with_single_nonzero_eigenvalue() {
        for n in 2..6 {
            let v = is_psd(GramMatrix::all_ones(n).entries(), 1e-9).unwrap();
            assert!(v.psd);
            for lambda in &v.eigenvalues[..n - 1] {
                assert!(lambda.abs() < 1e-12);
            }
            assert!((v.eigenvalues[n - 1] - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_negative_eigenvalue_fails() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-0.1, 0.0)]));
        let v = is_psd(&m, 1e-9).unwrap();
        assert!(!v.psd);
        assert!((v.min_eigenvalue + 0.1).abs() < 1e-15);
    }

    #[test]
    fn power_gram_eigenvalues() {
        // (1 − α²)I + α²Z with α = −0.1, n = 3
        let g = GramMatrix::uniform_real(3, 0.01).unwrap();
        let v = is_psd(g.entries(), 1e-9).unwrap();
        assert!(v.psd);
        let expected = [0.99, 0.99, 1.02];
        for (got, want) in v.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn non_hermitian_rejected_but_round_off_absorbed() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(is_psd(&m, 1e-9), Err(Error::NotHermitian { .. })));
        m[(1, 0)] = c(0.5 + 1e-16, 0.0);
        assert!(is_psd(&m, 1e-9).unwrap().psd);
    }

    #[test]
    fn gram_validation_errors() {
        let mut m = CMatrix::identity(2, 2);
        m[(1, 1)] = c(0.5, 0.0);
        assert!(matches!(GramMatrix::new(m), Err(Error::NotUnitDiagonal { index: 1, .. })));
        assert!(matches!(GramMatrix::uniform_real(2, 1.5), Err(Error::EntryTooLarge { .. })));
        assert!(matches!(GramMatrix::uniform_real(3, -0.9), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn realize_identity_gives_orthonormal_set() {
        let set = realize(&GramMatrix::identity(3)).unwrap();
        assert_eq!(set.dimension(), 3);
        let g = gram_of(&set);
        assert!((g.entries() - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn realize_rank_deficient_symmetric_gram() {
        // (3/2)I − (1/2)Z has eigenvalues {0, 3/2, 3/2}
        let target = GramMatrix::uniform_real(3, -0.5).unwrap();
        let set = realize(&target).unwrap();
        assert_eq!(set.dimension(), 2);
        assert!((gram_of(&set).entries() - target.entries()).norm() < 1e-10);
    }

    #[test]
    fn realize_full_rank_gram() {
        let target = GramMatrix::uniform_real(3, -0.1).unwrap();
        let set = realize(&target).unwrap();
        assert_eq!(set.dimension(), 3);
        assert!((gram_of(&set).entries() - target.entries()).norm() < 1e-10);
    }

    #[test]
    fn null_space_of_phi_grams() {
        for n in [3usize, 4] {
            let beta = -1.0 / (n as f64 - 1.0);
            let g = GramMatrix::uniform_real(n, beta).unwrap();
            let ns = null_space(&g, 1e-9);
            assert_eq!(ns.len(), 1);
            let want = 1.0 / (n as f64).sqrt();
            for b in ns[0].coefficients.iter() {
                assert!((b - c(want, 0.0)).norm() < 1e-10);
            }
            assert!(ns[0].residual < 1e-12);
        }
    }

    #[test]
    fn null_space_of_positive_definite_is_empty() {
        assert!(null_space(&GramMatrix::identity(4), 1e-9).is_empty());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = GramMatrix::uniform(2, c(0.3, 0.4)).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"n":2,"entries":[[[1.0,0.0],[0.3,0.4]],[[0.3,-0.4],[1.0,0.0]]]}"#);
        let back: GramMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);

        let bad = r#"{"n":2,"entries":[[[1.0,0.0],[2.0,0.0]],[[2.0,0.0],[1.0,0.0]]]}"#;
        assert!(serde_json::from_str::<GramMatrix>(bad).is_err());

        let set = r#"{"dimension":2,"vectors":[[[1,0],[0,0]],[[0,0],[0,1]]],"labels":["a","b"]}"#;
        let set: StateSet = serde_json::from_str(set).unwrap();
        assert_eq!(set.labels().unwrap(), ["a", "b"]);
        let bad_norm = r#"{"dimension":2,"vectors":[[[1,0],[0,0]],[[1,0],[0,1]]]}"#;
        let err = serde_json::from_str::<StateSet>(bad_norm).unwrap_err();
        assert!(err.to_string().contains("vector 1"));
    }
}
