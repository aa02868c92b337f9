//! Dense complex linear algebra: matrices, Kronecker products, partial
//! traces, the Hermitian eigensolver and spectral matrix functions.

mod eigen;
mod matrix;
pub mod pauli;

pub use eigen::{hermitian_eig, HermitianEigenSystem, HERMITIAN_INPUT_TOL};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Eigenvalues in `[-POSITIVITY_CLIP, 0)` are treated as roundoff and clipped.
pub const POSITIVITY_CLIP: f64 = 1e-9;

/// Density matrices must have unit trace to this tolerance.
pub const TRACE_TOL: f64 = 1e-8;

/// Kronecker product `a ⊗ b`; row `i·rows(b) + k`, column `j·cols(b) + l`
/// holds `a_ij b_kl`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a sequence of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Places `op` on factor `site` of a tensor product with local dimensions
/// `dims`, identities elsewhere.
pub fn embed(op: &ComplexMatrix, site: usize, dims: &[usize]) -> Result<ComplexMatrix> {
    let d = *dims.get(site).ok_or_else(|| {
        Error::DimensionMismatch(format!("site {site} out of range for {} factors", dims.len()))
    })?;
    if op.rows() != d || op.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but factor {site} has dimension {d}",
            op.rows(),
            op.cols()
        )));
    }
    let left: usize = dims[..site].iter().product();
    let right: usize = dims[site + 1..].iter().product();
    Ok(kron(&kron(&ComplexMatrix::identity(left), op), &ComplexMatrix::identity(right)))
}

/// Reduced matrix over the factors listed in `keep` (ascending order of
/// factors is used regardless of the order given).
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let n = rho.dim()?;
    if let Some((k, _)) = dims.iter().enumerate().find(|(_, &d)| d == 0) {
        return Err(Error::DimensionMismatch(format!("factor {k} has dimension 0")));
    }
    let total: usize = dims.iter().product();
    if total != n {
        return Err(Error::DimensionMismatch(format!(
            "factor dimensions {dims:?} multiply to {total}, matrix dimension is {n}"
        )));
    }
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("no factors selected to keep".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "factor {bad} does not exist ({} factors)",
            dims.len()
        )));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        kept[k] = true;
    }

    let kept_dims: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).map(|k| dims[k]).collect();
    let traced_dims: Vec<usize> = (0..dims.len()).filter(|&k| !kept[k]).map(|k| dims[k]).collect();
    let m: usize = kept_dims.iter().product();
    let t: usize = traced_dims.iter().product();

    // full index from (kept multi-index, traced multi-index)
    let compose = |kept_idx: usize, traced_idx: usize| -> usize {
        let mut kd = split_index(kept_idx, &kept_dims).into_iter();
        let mut td = split_index(traced_idx, &traced_dims).into_iter();
        let mut full = 0;
        for (k, &d) in dims.iter().enumerate() {
            let digit = if kept[k] { kd.next() } else { td.next() }.unwrap_or(0);
            full = full * d + digit;
        }
        full
    };

    let mut out = ComplexMatrix::zeros(m, m);
    for j in 0..m {
        for jp in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..t {
                acc += rho[(compose(j, k), compose(jp, k))];
            }
            out[(j, jp)] = acc;
        }
    }
    Ok(out)
}

fn split_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
    digits
}

/// Checks trace, Hermiticity and positivity of a density matrix.
pub fn validate_density(rho: &ComplexMatrix, positivity_tol: f64) -> Result<HermitianEigenSystem> {
    rho.dim()?;
    let eig = hermitian_eig(rho)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::Domain(format!("density matrix trace is {tr}, expected 1")));
    }
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -positivity_tol {
            return Err(Error::PositivityViolation { eigenvalue: min, tolerance: positivity_tol });
        }
    }
    Ok(eig)
}

/// `S = -Σ p ln p` over the spectrum of `rho`, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let eig = validate_density(rho, POSITIVITY_CLIP)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
        .sum())
}

/// Mixing weight towards `I/d` used when a state is too close to singular
/// for its logarithm.
pub const LOG_REGULARIZATION: f64 = 1e-12;

/// Returns `rho` itself if its smallest eigenvalue is at least
/// [`LOG_REGULARIZATION`], otherwise `(1-ε)ρ + ε I/d`, together with the
/// eigensystem of the returned matrix.
pub fn regularize_state(rho: &ComplexMatrix) -> Result<(ComplexMatrix, HermitianEigenSystem)> {
    let eig = hermitian_eig(rho)?;
    if eig.eigenvalues.first().is_none_or(|&p| p >= LOG_REGULARIZATION) {
        return Ok((rho.clone(), eig));
    }
    let n = rho.rows();
    let eps = LOG_REGULARIZATION;
    let mixed = &rho.scale_real(1.0 - eps) + &ComplexMatrix::identity(n).scale_real(eps / n as f64);
    let eig = hermitian_eig(&mixed)?;
    Ok((mixed, eig))
}

/// Matrix logarithm of a positive-definite Hermitian matrix given its
/// eigensystem. Roundoff eigenvalues in `[-POSITIVITY_CLIP, 0]` are lifted to
/// the smallest positive double; regularize first with [`regularize_state`].
pub fn log_from_eig(eig: &HermitianEigenSystem) -> Result<ComplexMatrix> {
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -POSITIVITY_CLIP {
            return Err(Error::PositivityViolation { eigenvalue: min, tolerance: POSITIVITY_CLIP });
        }
    }
    Ok(eig.map_eigenvalues(|p| p.max(f64::MIN_POSITIVE).ln()))
}

/// Gibbs state `e^{-βH}/Z`.
pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let e0 = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let z: f64 = eig.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    Ok(eig.map_eigenvalues(|e| (-beta * (e - e0)).exp() / z))
}

/// `ln(e^{-βH}/Z) = -βH - ln Z`, evaluated on the spectrum.
pub fn log_gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let e0 = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let log_z =
        -beta * e0 + eig.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum::<f64>().ln();
    Ok(eig.map_eigenvalues(|e| -beta * e - log_z))
}
