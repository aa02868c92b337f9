//! Time integration and steady states.
//!
//! Evolution uses the classical fixed-step fourth-order Runge-Kutta scheme.
//! For a linear time-independent generator one RK4 step is exactly
//! multiplication by `P = Σ_{k≤4} (hL)^k/k!`, so for small systems the step
//! matrix is formed once and raised to the record stride by repeated
//! squaring; larger systems step stage by stage through [`Generator::apply`].

use log::warn;
use nalgebra::DMatrix;

use crate::linalg::{validate_density, ComplexMatrix, C64, TRACE_TOL};
use crate::liouvillian::{unvectorize, vectorize, Generator};
use crate::thermo::ThermoReport;
use crate::{Error, Result};

/// Required bound on `dt · ‖L‖∞`.
pub const STABILITY_LIMIT: f64 = 0.1;

/// Largest system dimension integrated with the dense step matrix.
pub const DENSE_PROPAGATOR_LIMIT: usize = 16;

/// Recorded states must be Hermitian to this absolute tolerance.
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Singular values below `NULL_SPACE_TOL · σ_max` count as zero.
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Required separation between the smallest and next singular values.
pub const NULL_SEPARATION: f64 = 1e3;

/// Steady states with `‖L[ρ]‖_max` above this are reported as suspect.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    /// Rounded to a whole number of steps.
    pub t_max: f64,
    pub record_stride: usize,
    pub positivity_tol: f64,
}

impl SolverConfig {
    pub fn new(dt: f64, t_max: f64, record_stride: usize) -> Self {
        Self { dt, t_max, record_stride, positivity_tol: crate::linalg::POSITIVITY_CLIP }
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidSolverConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidSolverConfig(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidSolverConfig("record_stride must be at least 1".into()));
        }
        if !(self.positivity_tol >= 0.0) {
            return Err(Error::InvalidSolverConfig(format!(
                "positivity_tol must be non-negative, got {}",
                self.positivity_tol
            )));
        }
        Ok(())
    }
}

/// Recorded states of one run. `reports` stays empty until filled by
/// [`crate::thermo::audit_trajectory`].
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexMatrix>,
    pub reports: Vec<ThermoReport>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&ComplexMatrix> {
        self.states.last()
    }
}

/// Checks the stability bound `dt · ‖L‖∞ ≤ 0.1`.
pub fn check_stability(gen: &Generator, dt: f64) -> Result<()> {
    let norm = gen.superop_norm_inf();
    if dt * norm > STABILITY_LIMIT {
        return Err(Error::InvalidSolverConfig(format!(
            "dt * |L|_inf = {:.4} exceeds {STABILITY_LIMIT}; use dt <= {:.6e}",
            dt * norm,
            STABILITY_LIMIT / norm
        )));
    }
    Ok(())
}

pub fn evolve(gen: &Generator, rho0: &ComplexMatrix, cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let d = gen.dim();
    if rho0.rows() != d || rho0.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {}x{}, generator dimension is {d}",
            rho0.rows(),
            rho0.cols()
        )));
    }
    if rho0.hermiticity_defect() > HERMITICITY_TOL {
        return Err(Error::NotHermitian { asymmetry: rho0.hermiticity_defect() });
    }
    validate_density(rho0, cfg.positivity_tol)?;
    check_stability(gen, cfg.dt)?;
    if gen.alpha > 0.0 && cfg.t_max >= 0.1 / (gen.alpha * gen.alpha) {
        warn!(
            "t_max = {} reaches the validity limit 0.1/alpha^2 = {:.4e} of the weak-coupling generator",
            cfg.t_max,
            0.1 / (gen.alpha * gen.alpha)
        );
    }

    let steps = cfg.steps();
    let mut traj = Trajectory { times: vec![0.0], states: vec![rho0.clone()], reports: Vec::new() };
    let mut stepper = Stepper::new(gen, cfg.dt, cfg.record_stride)?;
    let mut state = vectorize(rho0);
    let mut done = 0;
    while done < steps {
        let block = cfg.record_stride.min(steps - done);
        state = stepper.advance(&state, block)?;
        done += block;
        let t = done as f64 * cfg.dt;
        let rho = unvectorize(&state)?;
        check_recorded_state(&rho, t, cfg.positivity_tol)?;
        traj.times.push(t);
        traj.states.push(rho);
    }
    Ok(traj)
}

fn check_recorded_state(rho: &ComplexMatrix, t: f64, positivity_tol: f64) -> Result<()> {
    let fail = |reason: String| Err(Error::IntegrationFailure { time: t, reason });
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return fail(format!("trace drifted to {tr}"));
    }
    let defect = rho.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return fail(format!("Hermiticity defect {defect:.3e}"));
    }
    match validate_density(&rho.hermitian_part(), positivity_tol) {
        Ok(_) => Ok(()),
        Err(e) => fail(e.to_string()),
    }
}

enum Stepper<'a> {
    Dense { step: ComplexMatrix, stride: usize, block: ComplexMatrix },
    Stagewise { gen: &'a Generator, dt: f64 },
}

impl<'a> Stepper<'a> {
    fn new(gen: &'a Generator, dt: f64, stride: usize) -> Result<Self> {
        if gen.dim() <= DENSE_PROPAGATOR_LIMIT {
            let step = rk4_step_matrix(gen.superop()?, dt);
            let block = matrix_power(&step, stride);
            Ok(Stepper::Dense { step, stride, block })
        } else {
            Ok(Stepper::Stagewise { gen, dt })
        }
    }

    fn advance(&mut self, v: &[C64], steps: usize) -> Result<Vec<C64>> {
        match self {
            Stepper::Dense { step, stride, block } => {
                if steps == *stride {
                    Ok(block.matvec(v))
                } else {
                    Ok(matrix_power(step, steps).matvec(v))
                }
            }
            Stepper::Stagewise { gen, dt } => {
                let mut rho = unvectorize(v)?;
                for _ in 0..steps {
                    rho = rk4_step(gen, &rho, *dt)?;
                }
                Ok(vectorize(&rho))
            }
        }
    }
}

/// `I + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24`, evaluated in Horner form.
pub fn rk4_step_matrix(superop: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let n = superop.rows();
    let id = ComplexMatrix::identity(n);
    let hl = superop.scale_real(dt);
    let mut m = &id + &hl.scale_real(0.25);
    for k in [3.0, 2.0, 1.0] {
        m = &id + &hl.scale_real(1.0 / k).matmul(&m);
    }
    m
}

/// One classical RK4 step through the operator form of the generator.
pub fn rk4_step(gen: &Generator, rho: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    let k1 = gen.apply(rho)?;
    let k2 = gen.apply(&(rho + &k1.scale_real(0.5 * dt)))?;
    let k3 = gen.apply(&(rho + &k2.scale_real(0.5 * dt)))?;
    let k4 = gen.apply(&(rho + &k3.scale_real(dt)))?;
    let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_real(2.0);
    Ok(rho + &incr.scale_real(dt / 6.0))
}

fn matrix_power(m: &ComplexMatrix, mut k: usize) -> ComplexMatrix {
    let mut result = ComplexMatrix::identity(m.rows());
    let mut base = m.clone();
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first { base.clone() } else { result.matmul(&base) };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = base.matmul(&base);
        }
    }
    result
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho_ss: ComplexMatrix,
    /// `‖L[ρ_ss]‖_max`
    pub residual: f64,
    pub null_dim: usize,
    /// Smallest singular values of the superoperator, ascending.
    pub smallest_singular_values: Vec<f64>,
}

/// Unique steady state from the right singular vector belonging to the
/// smallest singular value of the superoperator.
pub fn steady_state(gen: &Generator) -> Result<SteadyStateResult> {
    let l = gen.superop()?;
    let n = l.rows();
    let dense = DMatrix::from_row_slice(n, n, l.as_slice());
    let svd = dense.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Domain("SVD did not return right singular vectors".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let sigma_max = sigma.last().copied().unwrap_or(0.0);
    let null_dim = sigma.iter().filter(|&&s| s <= NULL_SPACE_TOL * sigma_max).count();
    if null_dim > 1 {
        return Err(Error::NonUniqueSteadyState { null_dim });
    }
    if null_dim == 0 {
        warn!("superoperator has no numerically zero singular value (smallest {:.3e})", sigma[0]);
    }
    if sigma.len() > 1 && sigma[0] * NULL_SEPARATION > sigma[1] {
        warn!(
            "steady state is ill-conditioned: smallest singular values {:.3e} and {:.3e}",
            sigma[0], sigma[1]
        );
    }

    let row = order[0];
    let v: Vec<C64> = (0..n).map(|j| v_t[(row, j)].conj()).collect();
    let raw = unvectorize(&v)?.hermitian_part();
    let tr = raw.trace().re;
    if tr.abs() < f64::MIN_POSITIVE {
        return Err(Error::Domain("null vector of the generator is traceless".into()));
    }
    let rho_ss = raw.scale_real(1.0 / tr);
    let residual = gen.apply(&rho_ss)?.max_abs();
    if residual > STEADY_RESIDUAL_TOL {
        warn!("steady-state residual {residual:.3e} exceeds {STEADY_RESIDUAL_TOL:e}");
    }
    validate_density(&rho_ss, crate::linalg::POSITIVITY_CLIP)?;
    Ok(SteadyStateResult {
        rho_ss,
        residual,
        null_dim: null_dim.max(1),
        smallest_singular_values: sigma.into_iter().take(4).collect(),
    })
}
