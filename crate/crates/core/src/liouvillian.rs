//! Assembly of the local master-equation generator
//!
//! ```text
//! L[ρ] = -i[H_s + α H_I(0), ρ] + β² Σ_i D_i[ρ]
//! D_i[ρ] = Σ_ω γ_i(ω) (A_i(ω) ρ A_i(ω)† - ½{A_i(ω)†A_i(ω), ρ})
//! ```
//!
//! where `H_I(0)` is the secular-filtered intersubsystem interaction and the
//! jump operators `A_i(ω)` come from decomposing each bath coupling operator
//! in the eigenbasis of its own subsystem. The partial generator `L′` drops
//! `α H_I(0)`. A naive local baseline keeps the full `α H_I` instead.
//!
//! Superoperator matrices use column stacking: `vec(ρ)[j·d + i] = ρ_ij`, so
//! `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use std::sync::OnceLock;

use log::{info, warn};

use crate::baths::{rate, BathSpec};
use crate::linalg::{embed, gibbs_state, kron, kron_all, log_gibbs_state, ComplexMatrix, C64};
use crate::spectral::{
    decompose_operator, secular_filter, sparse_spectrum_diagnostics, DiagnosticStatus, EnergyLevels,
    SpectrumDiagnostics,
};
use crate::{Error, Result};

/// Largest system dimension for which the dense `d² × d²` superoperator is
/// built.
pub const DENSE_SUPEROP_LIMIT: usize = 32;

#[derive(Debug, Clone)]
pub struct Subsystem {
    pub label: String,
    pub hamiltonian: ComplexMatrix,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, hamiltonian: ComplexMatrix) -> Self {
        Self { label: label.into(), hamiltonian }
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }
}

/// Subsystems with local Hamiltonians, the intersubsystem interaction terms
/// on the full space, and one bath per subsystem.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub subsystems: Vec<Subsystem>,
    /// Hermitian terms on the full space summing to `H_I`.
    pub interactions: Vec<ComplexMatrix>,
    /// Intersubsystem coupling strength.
    pub alpha: f64,
    /// `baths[i]` couples to `subsystems[i]`.
    pub baths: Vec<BathSpec>,
    /// System-bath coupling strength; dissipators carry its square.
    pub beta_coupling: f64,
    /// Absolute energy tolerance for level grouping; `None` selects
    /// [`crate::spectral::default_grouping_tol`].
    pub grouping_tol: Option<f64>,
}

impl SystemSpec {
    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(Subsystem::dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.subsystems.is_empty() {
            return Err(Error::InvalidModel("no subsystems".into()));
        }
        for s in &self.subsystems {
            if !s.hamiltonian.is_square() || s.dim() == 0 {
                return Err(Error::InvalidModel(format!(
                    "subsystem {}: Hamiltonian must be square and non-empty",
                    s.label
                )));
            }
            s.hamiltonian
                .ensure_hermitian(1e-10)
                .map_err(|e| Error::InvalidModel(format!("subsystem {}: {e}", s.label)))?;
        }
        let d = self.dim();
        for (k, term) in self.interactions.iter().enumerate() {
            if term.rows() != d || term.cols() != d {
                return Err(Error::InvalidModel(format!(
                    "interaction term {k} is {}x{}, system dimension is {d}",
                    term.rows(),
                    term.cols()
                )));
            }
            term.ensure_hermitian(1e-10)
                .map_err(|e| Error::InvalidModel(format!("interaction term {k}: {e}")))?;
        }
        if self.baths.len() != self.subsystems.len() {
            return Err(Error::InvalidModel(format!(
                "{} baths for {} subsystems; baths pair one-to-one with subsystems",
                self.baths.len(),
                self.subsystems.len()
            )));
        }
        for (i, bath) in self.baths.iter().enumerate() {
            bath.validate()?;
            let local = self.subsystems[i].dim();
            for (k, op) in bath.coupling_ops.iter().enumerate() {
                if op.rows() != local && op.rows() != d {
                    return Err(Error::InvalidModel(format!(
                        "bath {} coupling operator {k} has dimension {}, expected {local} (local) or {d} (full)",
                        bath.label,
                        op.rows()
                    )));
                }
            }
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidModel(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta_coupling >= 0.0) || !self.beta_coupling.is_finite() {
            return Err(Error::InvalidModel(format!("beta_coupling must be >= 0, got {}", self.beta_coupling)));
        }
        if let Some(tol) = self.grouping_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidModel(format!("grouping_tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    /// `H_s = Σ_i H_i` on the full space.
    pub fn bare_hamiltonian(&self) -> Result<ComplexMatrix> {
        let dims = self.dims();
        let d = self.dim();
        let mut h = ComplexMatrix::zeros(d, d);
        for (i, s) in self.subsystems.iter().enumerate() {
            h += &embed(&s.hamiltonian, i, &dims)?;
        }
        Ok(h)
    }

    /// `H_I = Σ interactions`, unscaled.
    pub fn interaction(&self) -> ComplexMatrix {
        let d = self.dim();
        self.interactions.iter().fold(ComplexMatrix::zeros(d, d), |acc, t| &acc + t)
    }

    /// Product Gibbs state `⊗_i e^{-β_i H_i}/Z_i`.
    pub fn product_gibbs_state(&self) -> Result<ComplexMatrix> {
        let factors = self
            .subsystems
            .iter()
            .zip(&self.baths)
            .map(|(s, b)| gibbs_state(&s.hamiltonian, b.beta))
            .collect::<Result<Vec<_>>>()?;
        Ok(kron_all(&factors))
    }
}

/// One jump channel `γ(ω)`, `A(ω)` on the full space; the rate already
/// includes the `β²` coupling factor.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub omega: f64,
    pub rate: f64,
    pub op: ComplexMatrix,
    op_dag: ComplexMatrix,
    op_dag_op: ComplexMatrix,
}

impl JumpChannel {
    pub fn new(omega: f64, rate: f64, op: ComplexMatrix) -> Self {
        let op_dag = op.adjoint();
        let op_dag_op = &op_dag * &op;
        Self { omega, rate, op, op_dag, op_dag_op }
    }

    fn apply_into(&self, rho: &ComplexMatrix, out: &mut ComplexMatrix) {
        let jump = (&self.op * rho).matmul(&self.op_dag);
        let anti = self.op_dag_op.anticommutator(rho);
        *out += &(&jump - &anti.scale_real(0.5)).scale_real(self.rate);
    }

    fn superop(&self) -> ComplexMatrix {
        let d = self.op.rows();
        let id = ComplexMatrix::identity(d);
        let jump = kron(&self.op.conj(), &self.op);
        let left = kron(&id, &self.op_dag_op);
        let right = kron(&self.op_dag_op.transpose(), &id);
        (&jump - &(&left + &right).scale_real(0.5)).scale_real(self.rate)
    }
}

/// Dissipator of one bath.
#[derive(Debug, Clone)]
pub struct BathDissipator {
    pub label: String,
    pub beta: f64,
    pub subsystem: usize,
    pub channels: Vec<JumpChannel>,
}

impl BathDissipator {
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.rows(), rho.cols());
        for ch in &self.channels {
            ch.apply_into(rho, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Coherent interaction reduced to `α H_I(0)`.
    ModifiedLocal,
    /// Full `α H_I` in the commutator.
    NaiveLocal,
}

/// The assembled master-equation generator. Immutable once built; dense
/// superoperators are formed lazily on first request.
#[derive(Debug)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub dims: Vec<usize>,
    pub h_s: ComplexMatrix,
    /// Coherent interaction term, already multiplied by `α`.
    pub h_i0: ComplexMatrix,
    pub dissipators: Vec<BathDissipator>,
    pub alpha: f64,
    pub beta_coupling: f64,
    /// Product Gibbs state, the fixed point of the partial generator.
    pub tau_s: ComplexMatrix,
    pub log_tau_s: ComplexMatrix,
    pub diagnostics: Option<SpectrumDiagnostics>,
    hamiltonian: ComplexMatrix,
    superop: OnceLock<ComplexMatrix>,
    partial_superop: OnceLock<ComplexMatrix>,
}

pub fn build_modified_local(spec: &SystemSpec) -> Result<Generator> {
    build(spec, GeneratorKind::ModifiedLocal)
}

pub fn build_naive_local(spec: &SystemSpec) -> Result<Generator> {
    build(spec, GeneratorKind::NaiveLocal)
}

fn build(spec: &SystemSpec, kind: GeneratorKind) -> Result<Generator> {
    spec.validate()?;
    let dims = spec.dims();
    let d = spec.dim();
    let h_s = spec.bare_hamiltonian()?;
    let levels = EnergyLevels::from_hamiltonian(&h_s, spec.grouping_tol)?;

    let diagnostics = if spec.alpha > 0.0 && !spec.interactions.is_empty() {
        let diag = sparse_spectrum_diagnostics(&levels, spec.alpha)?;
        check_diagnostics(spec, &diag)?;
        Some(diag)
    } else {
        None
    };

    let h_int = spec.interaction();
    let h_i0 = match kind {
        GeneratorKind::ModifiedLocal => secular_filter(&h_int, &levels)?.scale_real(spec.alpha),
        GeneratorKind::NaiveLocal => h_int.scale_real(spec.alpha),
    };

    let strength = spec.beta_coupling * spec.beta_coupling;
    let mut dissipators = Vec::with_capacity(spec.baths.len());
    for (i, bath) in spec.baths.iter().enumerate() {
        let local_levels = EnergyLevels::from_hamiltonian(&spec.subsystems[i].hamiltonian, spec.grouping_tol)?;
        let mut channels = Vec::new();
        for op in &bath.coupling_ops {
            let local = op.rows() == dims[i];
            let dec = if local { decompose_operator(op, &local_levels)? } else { decompose_operator(op, &levels)? };
            for term in dec.terms {
                let gamma = strength * rate(term.omega, bath);
                if gamma == 0.0 {
                    continue;
                }
                let full = if local { embed(&term.op, i, &dims)? } else { term.op };
                channels.push(JumpChannel::new(term.omega, gamma, full));
            }
        }
        dissipators.push(BathDissipator { label: bath.label.clone(), beta: bath.beta, subsystem: i, channels });
    }

    let tau_s = spec.product_gibbs_state()?;
    let mut log_tau_s = ComplexMatrix::zeros(d, d);
    for (i, (s, b)) in spec.subsystems.iter().zip(&spec.baths).enumerate() {
        log_tau_s += &embed(&log_gibbs_state(&s.hamiltonian, b.beta)?, i, &dims)?;
    }

    let hamiltonian = &h_s + &h_i0;
    info!(
        "built {kind:?} generator: dimension {d}, {} baths, {} jump channels",
        dissipators.len(),
        dissipators.iter().map(|b| b.channels.len()).sum::<usize>()
    );
    Ok(Generator {
        kind,
        dims,
        h_s,
        h_i0,
        dissipators,
        alpha: spec.alpha,
        beta_coupling: spec.beta_coupling,
        tau_s,
        log_tau_s,
        diagnostics,
        hamiltonian,
        superop: OnceLock::new(),
        partial_superop: OnceLock::new(),
    })
}

/// A too-small Bohr frequency always fails. A too-small gap between Bohr
/// frequencies fails only when it already occurs within a single
/// subsystem; gaps that arise only across subsystems are logged.
fn check_diagnostics(spec: &SystemSpec, diag: &SpectrumDiagnostics) -> Result<()> {
    match diag.status {
        DiagnosticStatus::Pass => Ok(()),
        DiagnosticStatus::Warn => {
            warn!("sparse-spectrum condition is marginal: {}", diag.summary());
            Ok(())
        }
        DiagnosticStatus::Fail => {
            if diag.frequency_ratio.is_some_and(|r| r < crate::spectral::FAIL_RATIO) {
                return Err(Error::SpectrumTooDense(diag.summary()));
            }
            for s in &spec.subsystems {
                let local = EnergyLevels::from_hamiltonian(&s.hamiltonian, spec.grouping_tol)?;
                let local_diag = sparse_spectrum_diagnostics(&local, spec.alpha)?;
                if local_diag.status == DiagnosticStatus::Fail {
                    return Err(Error::SpectrumTooDense(format!(
                        "subsystem {}: {}",
                        s.label,
                        local_diag.summary()
                    )));
                }
            }
            warn!("near-degenerate Bohr frequencies across subsystems: {}", diag.summary());
            Ok(())
        }
    }
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.h_s.rows()
    }

    /// `H_s + h_i0`, the full coherent part.
    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn bath_count(&self) -> usize {
        self.dissipators.len()
    }

    pub fn bath_betas(&self) -> Vec<f64> {
        self.dissipators.iter().map(|b| b.beta).collect()
    }

    /// Smallest positive jump rate, a proxy for the slowest relaxation time.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.dissipators
            .iter()
            .flat_map(|b| b.channels.iter().map(|c| c.rate))
            .filter(|&r| r > 0.0)
            .min_by(f64::total_cmp)
    }

    fn check_dim(&self, rho: &ComplexMatrix) -> Result<()> {
        let d = self.dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "state is {}x{}, generator dimension is {d}",
                rho.rows(),
                rho.cols()
            )));
        }
        Ok(())
    }

    /// `L[ρ]` by direct operator arithmetic.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_with(&self.hamiltonian, rho)
    }

    /// `L′[ρ] = -i[H_s, ρ] + Σ_i D_i[ρ]`.
    pub fn apply_partial(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.apply_with(&self.h_s, rho)
    }

    /// `D_i[ρ]` including the coupling-strength factor.
    pub fn apply_dissipator(&self, bath: usize, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(rho)?;
        let diss = self
            .dissipators
            .get(bath)
            .ok_or(Error::BadBathIndex { index: bath, count: self.dissipators.len() })?;
        Ok(diss.apply(rho))
    }

    fn apply_with(&self, h: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(rho)?;
        let mut out = h.commutator(rho).scale(C64::new(0.0, -1.0));
        for diss in &self.dissipators {
            for ch in &diss.channels {
                ch.apply_into(rho, &mut out);
            }
        }
        Ok(out)
    }

    /// Dense matrix of `L` acting on column-stacked states.
    pub fn superop(&self) -> Result<&ComplexMatrix> {
        self.dense(&self.superop, &self.hamiltonian)
    }

    /// Dense matrix of `L′`.
    pub fn partial_superop(&self) -> Result<&ComplexMatrix> {
        self.dense(&self.partial_superop, &self.h_s)
    }

    fn dense<'a>(&'a self, cell: &'a OnceLock<ComplexMatrix>, h: &ComplexMatrix) -> Result<&'a ComplexMatrix> {
        let d = self.dim();
        if d > DENSE_SUPEROP_LIMIT {
            return Err(Error::TooLarge { dim: d, limit: DENSE_SUPEROP_LIMIT });
        }
        Ok(cell.get_or_init(|| {
            let id = ComplexMatrix::identity(d);
            let comm = &kron(&id, h) - &kron(&h.transpose(), &id);
            let mut l = comm.scale(C64::new(0.0, -1.0));
            for diss in &self.dissipators {
                for ch in &diss.channels {
                    l += &ch.superop();
                }
            }
            l
        }))
    }

    /// Row-sum norm of the superoperator: exact when the dense matrix is
    /// available, otherwise the Kronecker-product bound
    /// `2‖H‖∞ + Σ γ (‖A‖∞² + ‖A†A‖∞)`.
    pub fn superop_norm_inf(&self) -> f64 {
        if let Ok(l) = self.superop() {
            return l.norm_inf();
        }
        let mut bound = 2.0 * self.hamiltonian.norm_inf();
        for diss in &self.dissipators {
            for ch in &diss.channels {
                let a = ch.op.norm_inf();
                bound += ch.rate * (a * a + ch.op_dag_op.norm_inf());
            }
        }
        bound
    }

    /// The jump channels of bath `i` (rates include the coupling factor).
    pub fn channels(&self, bath: usize) -> Result<&[JumpChannel]> {
        self.dissipators
            .get(bath)
            .map(|d| d.channels.as_slice())
            .ok_or(Error::BadBathIndex { index: bath, count: self.dissipators.len() })
    }
}

/// Column-stacking vectorization: `[[a, b], [c, d]] -> (a, c, b, d)`.
pub fn vectorize(rho: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = (rho.rows(), rho.cols());
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(rho[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch(format!("vector length {} is not a perfect square", v.len())));
    }
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            m[(i, j)] = v[j * d + i];
        }
    }
    Ok(m)
}
