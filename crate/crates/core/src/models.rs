//! Ready-made system specifications: a single thermalizing qubit, the
//! two-qubit heat-transfer network and an open nearest-neighbour qubit chain.
//!
//! Every qubit has `H_i = (E_i/2) σ^z` and couples to its bath through
//! `σ^x`; neighbours interact through `σ^x ⊗ σ^x`.

use crate::baths::{BathSpec, SpectralModel};
use crate::linalg::{embed, kron, pauli, ComplexMatrix};
use crate::liouvillian::{Subsystem, SystemSpec};
use crate::{Error, Result};

/// Largest supported chain length.
pub const MAX_CHAIN_LENGTH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitParams {
    pub e1: f64,
    pub e2: f64,
    pub alpha: f64,
    pub beta_coupling: f64,
    pub t1: f64,
    pub t2: f64,
    pub spectral: SpectralModel,
}

impl Default for TwoQubitParams {
    /// Resonant qubits `E = 1`, `α = β = 0.01`, flat `κ = 1/(2π)`, `T_1 = 2`, `T_2 = 1`.
    fn default() -> Self {
        Self {
            e1: 1.0,
            e2: 1.0,
            alpha: 0.01,
            beta_coupling: 0.01,
            t1: 2.0,
            t2: 1.0,
            spectral: SpectralModel::default(),
        }
    }
}

fn qubit_hamiltonian(e: f64) -> ComplexMatrix {
    pauli::sigma_z().scale_real(e / 2.0)
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive, got {value}")))
    }
}

pub fn single_qubit_model(e: f64, t: f64, spectral: SpectralModel, beta_coupling: f64) -> Result<SystemSpec> {
    check_positive("qubit splitting", e)?;
    check_positive("beta_coupling", beta_coupling)?;
    Ok(SystemSpec {
        subsystems: vec![Subsystem::new("q1", qubit_hamiltonian(e))],
        interactions: vec![],
        alpha: 0.0,
        baths: vec![BathSpec::from_temperature("b1", t, spectral, vec![pauli::sigma_x()])?],
        beta_coupling,
        grouping_tol: None,
    })
}

pub fn two_qubit_model(p: &TwoQubitParams) -> Result<SystemSpec> {
    qubit_chain_model(2, &[p.e1, p.e2], p.alpha, p.beta_coupling, &[p.t1, p.t2], p.spectral)
}

/// `n` qubits with open boundaries: `n - 1` terms `σ^x_k σ^x_{k+1}`.
pub fn qubit_chain_model(
    n: usize,
    energies: &[f64],
    alpha: f64,
    beta_coupling: f64,
    temps: &[f64],
    spectral: SpectralModel,
) -> Result<SystemSpec> {
    if n == 0 {
        return Err(Error::InvalidModel("chain needs at least one qubit".into()));
    }
    if n > MAX_CHAIN_LENGTH {
        return Err(Error::InvalidModel(format!(
            "chain of {n} qubits exceeds the dimension guard of {MAX_CHAIN_LENGTH} qubits"
        )));
    }
    if energies.len() != n || temps.len() != n {
        return Err(Error::InvalidModel(format!(
            "chain of {n} qubits needs {n} energies and {n} temperatures, got {} and {}",
            energies.len(),
            temps.len()
        )));
    }
    for &e in energies {
        check_positive("qubit splitting", e)?;
    }
    check_positive("beta_coupling", beta_coupling)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidModel(format!("alpha must be >= 0, got {alpha}")));
    }

    let dims = vec![2; n];
    let subsystems = energies
        .iter()
        .enumerate()
        .map(|(k, &e)| Subsystem::new(format!("q{}", k + 1), qubit_hamiltonian(e)))
        .collect();
    let interactions = (0..n.saturating_sub(1))
        .map(|k| Ok(embed(&pauli::sigma_x(), k, &dims)?.matmul(&embed(&pauli::sigma_x(), k + 1, &dims)?)))
        .collect::<Result<Vec<_>>>()?;
    let baths = temps
        .iter()
        .enumerate()
        .map(|(k, &t)| BathSpec::from_temperature(format!("b{}", k + 1), t, spectral, vec![pauli::sigma_x()]))
        .collect::<Result<Vec<_>>>()?;

    Ok(SystemSpec { subsystems, interactions, alpha, baths, beta_coupling, grouping_tol: None })
}

/// Resonant qubits exchanging through `(|0⟩⟨1| + |1⟩⟨0|) ⊗ σ^x`, where the
/// first subsystem is a qutrit with levels `0, 1, 2.5` and the second a qubit
/// of splitting 1.
pub fn qutrit_qubit_model(alpha: f64, beta_coupling: f64, t_qutrit: f64, t_qubit: f64) -> Result<SystemSpec> {
    let r = |rows: &[[f64; 3]]| ComplexMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let h3 = ComplexMatrix::from_real_diag(&[0.0, 1.0, 2.5]);
    let swap01 = r(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])?;
    let ladder = r(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])?;
    let sp = SpectralModel::default();
    let spec = SystemSpec {
        subsystems: vec![
            Subsystem::new("qutrit", h3),
            Subsystem::new("qubit", ComplexMatrix::from_real_diag(&[-0.5, 0.5])),
        ],
        interactions: vec![kron(&swap01, &pauli::sigma_x())],
        alpha,
        baths: vec![
            BathSpec::from_temperature("hot", t_qutrit, sp, vec![ladder])?,
            BathSpec::from_temperature("cold", t_qubit, sp, vec![pauli::sigma_y()])?,
        ],
        beta_coupling,
        grouping_tol: None,
    };
    spec.validate()?;
    Ok(spec)
}

/// The reference models behind the bundled CLI configs, at the default
/// desk-scale parameters.
pub fn bundled_models() -> Vec<(&'static str, SystemSpec)> {
    let sp = SpectralModel::default();
    let defaults = TwoQubitParams::default();
    let mut zz = two_qubit_model(&defaults).expect("valid defaults");
    zz.interactions = vec![kron(&pauli::sigma_z(), &pauli::sigma_z())];
    vec![
        ("single_qubit", single_qubit_model(1.0, 1.0, sp, 0.01).expect("valid defaults")),
        ("two_qubit_resonant", two_qubit_model(&defaults).expect("valid defaults")),
        (
            "two_qubit_detuned",
            two_qubit_model(&TwoQubitParams { e2: 1.5, ..defaults }).expect("valid defaults"),
        ),
        ("two_qubit_zz", zz),
        (
            "chain3",
            qubit_chain_model(3, &[1.0; 3], 0.01, 0.01, &[2.0, 1.5, 1.0], sp).expect("valid defaults"),
        ),
        ("qutrit_qubit", qutrit_qubit_model(0.01, 0.01, 2.0, 1.0).expect("valid defaults")),
    ]
}
