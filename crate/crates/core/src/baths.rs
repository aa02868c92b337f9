//! Bosonic bath models and the transition rates they induce.

use std::f64::consts::PI;

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Squared coupling function `h²(ω)` of a bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralModel {
    /// `h²(ω) = κ`
    Flat { coupling_scale: f64 },
    /// `h²(ω) = κ ω e^{-ω/ω_c}`
    Ohmic { coupling_scale: f64, cutoff: f64 },
}

impl Default for SpectralModel {
    /// Flat with `κ = 1/(2π)`, so that `2π h² = 1`.
    fn default() -> Self {
        SpectralModel::Flat { coupling_scale: 1.0 / (2.0 * PI) }
    }
}

impl SpectralModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SpectralModel::Flat { coupling_scale } if coupling_scale >= 0.0 => Ok(()),
            SpectralModel::Ohmic { coupling_scale, cutoff } if coupling_scale >= 0.0 && cutoff > 0.0 => {
                Ok(())
            }
            other => Err(Error::InvalidModel(format!("invalid spectral model parameters: {other:?}"))),
        }
    }

    /// `h²(ω)` for `ω > 0`.
    pub fn coupling_squared(&self, omega: f64) -> f64 {
        match *self {
            SpectralModel::Flat { coupling_scale } => coupling_scale,
            SpectralModel::Ohmic { coupling_scale, cutoff } => coupling_scale * omega * (-omega / cutoff).exp(),
        }
    }
}

/// A thermal bath attached to one subsystem.
#[derive(Debug, Clone)]
pub struct BathSpec {
    pub label: String,
    /// Inverse temperature.
    pub beta: f64,
    pub spectral: SpectralModel,
    /// Hermitian system operators coupled to the bath. Each may be given on
    /// the local factor of the subsystem or on the full system space.
    /// Distinct operators are treated as uncorrelated channels.
    pub coupling_ops: Vec<ComplexMatrix>,
}

impl BathSpec {
    pub fn from_temperature(
        label: impl Into<String>,
        temperature: f64,
        spectral: SpectralModel,
        coupling_ops: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidModel(format!("bath temperature must be positive, got {temperature}")));
        }
        Ok(Self { label: label.into(), beta: 1.0 / temperature, spectral, coupling_ops })
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidModel(format!(
                "bath {}: inverse temperature must be positive and finite, got {}",
                self.label, self.beta
            )));
        }
        self.spectral.validate()?;
        for (k, op) in self.coupling_ops.iter().enumerate() {
            op.ensure_hermitian(1e-10).map_err(|e| {
                Error::InvalidModel(format!("bath {} coupling operator {k}: {e}", self.label))
            })?;
        }
        Ok(())
    }
}

/// Bose-Einstein occupation `1/(e^{βω} - 1)`.
pub fn bose_einstein(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("Bose-Einstein occupation needs omega > 0, got {omega}")));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("Bose-Einstein occupation needs beta > 0, got {beta}")));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// Transition rate `γ(ω)`: emission `2π h²(ω)(n(ω)+1)` for `ω > 0`,
/// absorption `2π h²(|ω|) n(|ω|)` for `ω < 0`, and zero at `ω = 0`.
pub fn rate(omega: f64, bath: &BathSpec) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    let w = omega.abs();
    let h2 = bath.spectral.coupling_squared(w);
    if h2 == 0.0 {
        return 0.0;
    }
    let n = 1.0 / (bath.beta * w).exp_m1();
    if omega > 0.0 {
        2.0 * PI * h2 * (n + 1.0)
    } else {
        2.0 * PI * h2 * n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bath(beta: f64, spectral: SpectralModel) -> BathSpec {
        BathSpec { label: "b".into(), beta, spectral, coupling_ops: vec![] }
    }

    #[test]
    fn frozen_occupation() {
        let n = bose_einstein(50.0, 1.0).unwrap();
        assert!(n < 2e-22 && n > 0.0);
    }

    #[test]
    fn unit_occupation() {
        let expected = 1.0 / (std::f64::consts::E - 1.0);
        assert!((bose_einstein(1.0, 1.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn occupation_domain() {
        assert!(bose_einstein(0.0, 1.0).is_err());
        assert!(bose_einstein(-1.0, 1.0).is_err());
        assert!(bose_einstein(1.0, 0.0).is_err());
    }

    #[test]
    fn occupation_identity_on_grid() {
        for i in 1..=20 {
            for j in 1..=20 {
                let (w, b) = (0.1 * i as f64, 0.15 * j as f64);
                let n = bose_einstein(w, b).unwrap();
                assert!(((n + 1.0) - (b * w).exp() * n).abs() <= 1e-12 * (n + 1.0));
            }
        }
    }

    #[test]
    fn flat_rates_are_occupation_factors() {
        let e = 0.8;
        let b = bath(1.7, SpectralModel::default());
        let n = 1.0 / ((1.7 * e) as f64).exp_m1();
        assert!((rate(e, &b) - (n + 1.0)).abs() < 1e-14);
        assert!((rate(-e, &b) - n).abs() < 1e-14);
        assert_eq!(rate(0.0, &b), 0.0);
        let ohmic = bath(1.0, SpectralModel::Ohmic { coupling_scale: 0.3, cutoff: 5.0 });
        assert_eq!(rate(0.0, &ohmic), 0.0);
    }

    #[test]
    fn detailed_balance_examples() {
        for spectral in [
            SpectralModel::default(),
            SpectralModel::Ohmic { coupling_scale: 0.2, cutoff: 3.0 },
        ] {
            let b = bath(0.9, spectral);
            for w in [0.5, 1.0, 2.0] {
                let lhs = rate(w, &b);
                let rhs = rate(-w, &b) * (b.beta * w).exp();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{spectral:?} w={w}");
            }
        }
    }

    #[test]
    fn validation() {
        assert!(bath(-1.0, SpectralModel::default()).validate().is_err());
        assert!(bath(1.0, SpectralModel::Ohmic { coupling_scale: 1.0, cutoff: 0.0 }).validate().is_err());
        assert!(bath(1.0, SpectralModel::Flat { coupling_scale: -1.0 }).validate().is_err());
        let mut b = bath(1.0, SpectralModel::default());
        b.coupling_ops.push(crate::linalg::pauli::sigma_plus());
        assert!(b.validate().is_err());
        assert!(BathSpec::from_temperature("x", 0.0, SpectralModel::default(), vec![]).is_err());
    }

    proptest! {
        #[test]
        fn detailed_balance_holds(
            w in 1e-3f64..20.0,
            beta in 0.05f64..5.0,
            kappa in 0.0f64..3.0,
            cutoff in 0.1f64..10.0,
            ohmic in any::<bool>(),
        ) {
            let spectral = if ohmic {
                SpectralModel::Ohmic { coupling_scale: kappa, cutoff }
            } else {
                SpectralModel::Flat { coupling_scale: kappa }
            };
            let b = bath(beta, spectral);
            let emit = rate(w, &b);
            let absorb = rate(-w, &b);
            prop_assert!(emit >= 0.0 && absorb >= 0.0);
            prop_assert!((emit - absorb * (beta * w).exp()).abs() <= 1e-12 * emit.max(f64::MIN_POSITIVE));
        }
    }
}
