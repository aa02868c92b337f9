//! Energy-level grouping, Bohr-frequency decomposition of operators and the
//! secular filter that keeps only the frequency-zero part of an operator.
//!
//! For an operator `A` and the eigenprojectors `Π(ε)` of a Hamiltonian,
//! `A(ω) = Σ_{ε' - ε = ω} Π(ε) A Π(ε')`. With this convention `A(ω)` lowers
//! the energy by `ω`, `Σ_ω A(ω) = A` and, for Hermitian `A`,
//! `A(ω)† = A(-ω)`.

use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianEigenSystem};
use crate::{Error, Result};

/// Relative factor for the default grouping tolerance.
pub const DEFAULT_RELATIVE_GROUPING_TOL: f64 = 1e-9;

/// Components with `max|A(ω)| < ZERO_TERM_TOL · max|A|` are dropped.
pub const ZERO_TERM_TOL: f64 = 1e-12;

/// Ratio below which a spectral gap is flagged as a warning.
pub const WARN_RATIO: f64 = 10.0;
/// Ratio below which a spectral gap invalidates the secular approximation.
pub const FAIL_RATIO: f64 = 1.0;

/// `1e-9 · max|λ|`, floored at `1e-9` absolute so a null Hamiltonian still
/// gets a positive tolerance.
pub fn default_grouping_tol(eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    DEFAULT_RELATIVE_GROUPING_TOL * scale.max(1.0)
}

/// Distinct energies of a Hamiltonian with their eigenprojectors.
#[derive(Debug, Clone)]
pub struct EnergyLevels {
    pub distinct_energies: Vec<f64>,
    pub projectors: Vec<ComplexMatrix>,
    pub grouping_tol: f64,
}

impl EnergyLevels {
    pub fn from_hamiltonian(h: &ComplexMatrix, tol: Option<f64>) -> Result<Self> {
        let eig = hermitian_eig(h)?;
        let tol = tol.unwrap_or_else(|| default_grouping_tol(&eig.eigenvalues));
        group_levels(&eig, tol)
    }

    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, ComplexMatrix::rows)
    }

    pub fn len(&self) -> usize {
        self.distinct_energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinct_energies.is_empty()
    }

    /// Distinct Bohr frequencies `ε_n - ε_m`, merged at the grouping tolerance.
    pub fn bohr_frequencies(&self) -> Vec<f64> {
        let mut diffs = Vec::with_capacity(self.len() * self.len());
        for &em in &self.distinct_energies {
            for &en in &self.distinct_energies {
                diffs.push(en - em);
            }
        }
        cluster_sorted(&mut diffs, self.grouping_tol)
            .into_iter()
            .map(|c| c.center)
            .collect()
    }
}

/// Single-linkage clustering of the spectrum: a new level starts wherever
/// consecutive eigenvalues differ by more than `tol`.
pub fn group_levels(eigs: &HermitianEigenSystem, tol: f64) -> Result<EnergyLevels> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("grouping tolerance must be positive, got {tol}")));
    }
    let n = eigs.dim();
    let mut distinct_energies = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigs.eigenvalues[end] - eigs.eigenvalues[end - 1] <= tol {
            end += 1;
        }
        let members = &eigs.eigenvalues[start..end];
        let width = members[members.len() - 1] - members[0];
        if width > 10.0 * tol {
            return Err(Error::AmbiguousSpectrum { width, tol });
        }
        distinct_energies.push(members.iter().sum::<f64>() / members.len() as f64);

        let mut proj = ComplexMatrix::zeros(n, n);
        for k in start..end {
            proj += &ComplexMatrix::outer(&eigs.eigenvector(k), &eigs.eigenvector(k));
        }
        projectors.push(proj);
        start = end;
    }
    Ok(EnergyLevels { distinct_energies, projectors, grouping_tol: tol })
}

/// One frequency component `A(ω)` of an operator.
#[derive(Debug, Clone)]
pub struct BohrTerm {
    pub omega: f64,
    pub op: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct BohrDecomposition {
    pub terms: Vec<BohrTerm>,
    pub source: ComplexMatrix,
}

impl BohrDecomposition {
    /// `Σ_ω A(ω)`
    pub fn resum(&self) -> ComplexMatrix {
        let n = self.source.rows();
        self.terms.iter().fold(ComplexMatrix::zeros(n, n), |acc, t| &acc + &t.op)
    }

    /// The component at `omega` (matched within `tol`), if present.
    pub fn component(&self, omega: f64, tol: f64) -> Option<&BohrTerm> {
        self.terms.iter().find(|t| (t.omega - omega).abs() <= tol)
    }
}

struct Cluster {
    center: f64,
    members: std::ops::Range<usize>,
}

/// Sorts `values` and groups them by single linkage at `tol`. The cluster
/// center is the midpoint of its extremes, which keeps centers of a
/// negation-symmetric set exactly negation-symmetric.
fn cluster_sorted(values: &mut [f64], tol: f64) -> Vec<Cluster> {
    values.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        out.push(Cluster { center: 0.5 * (values[start] + values[end - 1]), members: start..end });
        start = end;
    }
    out
}

pub fn decompose_operator(a: &ComplexMatrix, levels: &EnergyLevels) -> Result<BohrDecomposition> {
    let n = a.dim()?;
    if n != levels.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {n} does not match Hamiltonian dimension {}",
            levels.dim()
        )));
    }

    // (ω, m, n) for every ordered pair of levels
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (m, &em) in levels.distinct_energies.iter().enumerate() {
        for (k, &en) in levels.distinct_energies.iter().enumerate() {
            pairs.push((en - em, m, k));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut omegas: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let clusters = cluster_sorted(&mut omegas, levels.grouping_tol);

    let cutoff = ZERO_TERM_TOL * a.max_abs();
    let mut terms = Vec::new();
    for cluster in clusters {
        let mut op = ComplexMatrix::zeros(n, n);
        for &(_, m, k) in &pairs[cluster.members] {
            op += &(&levels.projectors[m] * a).matmul(&levels.projectors[k]);
        }
        if op.max_abs() >= cutoff && op.max_abs() > 0.0 {
            terms.push(BohrTerm { omega: cluster.center, op });
        }
    }
    Ok(BohrDecomposition { terms, source: a.clone() })
}

/// `Σ_ε Π(ε) H Π(ε)`: the part of `h` that commutes with the Hamiltonian
/// behind `levels`.
pub fn secular_filter(h: &ComplexMatrix, levels: &EnergyLevels) -> Result<ComplexMatrix> {
    h.ensure_hermitian(1e-10)?;
    let n = h.dim()?;
    if n != levels.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {n} does not match Hamiltonian dimension {}",
            levels.dim()
        )));
    }
    let filtered = levels
        .projectors
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, p| &acc + &(p * h).matmul(p));
    // the zero-frequency component is dropped by decompose_operator below this size
    if filtered.max_abs() < ZERO_TERM_TOL * h.max_abs() {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    Ok(filtered.hermitian_part())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticStatus {
    Pass,
    Warn,
    Fail,
}

/// Sparse-spectrum check of the secular approximation against the
/// interaction strength `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDiagnostics {
    /// Smallest nonzero `|ω|`, if any nonzero Bohr frequency exists.
    pub min_frequency: Option<f64>,
    /// Smallest nonzero `|ω - ω'|` over distinct Bohr frequencies.
    pub min_frequency_gap: Option<f64>,
    pub frequency_ratio: Option<f64>,
    pub gap_ratio: Option<f64>,
    pub status: DiagnosticStatus,
}

impl SpectrumDiagnostics {
    pub fn summary(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
        format!(
            "min |w| = {} (ratio to alpha {}), min |w - w'| = {} (ratio {}), status {:?}",
            fmt(self.min_frequency),
            fmt(self.frequency_ratio),
            fmt(self.min_frequency_gap),
            fmt(self.gap_ratio),
            self.status
        )
    }
}

pub fn sparse_spectrum_diagnostics(levels: &EnergyLevels, alpha: f64) -> Result<SpectrumDiagnostics> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive for diagnostics, got {alpha}")));
    }
    let freqs = levels.bohr_frequencies();
    let tol = levels.grouping_tol;
    let min_frequency =
        freqs.iter().map(|w| w.abs()).filter(|&w| w > tol).min_by(f64::total_cmp);
    let min_frequency_gap = freqs
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > tol)
        .min_by(f64::total_cmp);

    let frequency_ratio = min_frequency.map(|w| w / alpha);
    let gap_ratio = min_frequency_gap.map(|g| g / alpha);
    let worst = [frequency_ratio, gap_ratio].into_iter().flatten().min_by(f64::total_cmp);
    let status = match worst {
        Some(r) if r < FAIL_RATIO => DiagnosticStatus::Fail,
        Some(r) if r < WARN_RATIO => DiagnosticStatus::Warn,
        _ => DiagnosticStatus::Pass,
    };
    Ok(SpectrumDiagnostics { min_frequency, min_frequency_gap, frequency_ratio, gap_ratio, status })
}
