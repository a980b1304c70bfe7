//! Ground-state Berry phase of the central spin.
//!
//! With the chain held in the ground state of the g-branch Hamiltonian, the
//! central spin sees the mean-field Hamiltonian
//! `(mu/2 + 2g f) sigma_z + (nu/2) sigma_x`, where
//! `f(lambda, gamma, N) = (1/N) sum_{k=1..M} cos(theta_k)`. Winding its
//! transverse part once about z gives
//!
//! ```text
//! beta_g = pi (1 + x / sqrt(x^2 + nu^2)),   x = mu + 4 g f
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::search::{bracketed_peak, Maximum};
use crate::spectrum::{
    derive_branch_params, df_dlambda, f_function, CentralSpinParams, ChainParams,
};

/// Peak-position scaling exponent of `df/dlambda` reported in the literature.
pub const REFERENCE_EXPONENT: f64 = 1.803;

/// Central finite-difference step used by [`DerivativeMethod::FiniteDifference`].
pub const FD_STEP: f64 = 1e-5;

const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 5000;
const PEAK_GRID: usize = 200;
const PEAK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    FiniteN,
    Thermodynamic,
}

/// A lambda-derivative that may be one-sided or undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Regular(f64),
    /// Kink: left and right derivatives differ (or one diverges).
    OneSided {
        left: f64,
        right: f64,
    },
    /// Jump in the underlying function (a degenerate finite-N mode).
    Singular,
}

impl Slope {
    /// The derivative if it is two-sided.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Slope::Regular(v) => Some(v),
            _ => None,
        }
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Slope {
        match self {
            Slope::Regular(v) => Slope::Regular(f(v)),
            Slope::OneSided { left, right } => Slope::OneSided {
                left: f(left),
                right: f(right),
            },
            Slope::Singular => Slope::Singular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryResult {
    pub beta: f64,
    pub dbeta_dlambda: Slope,
    pub f_value: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    Analytic,
    FiniteDifference,
}

/// Which lambda-derivative a peak search maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakTarget {
    /// `d beta_g / d lambda`, with the g-branch shift `delta = g cos(theta) / N`.
    Dbeta,
    /// `df / d lambda` of the bare chain (`delta = 0`).
    Df,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub target: PeakTarget,
    pub sizes: Vec<usize>,
    pub peak_positions: Vec<f64>,
    /// Negated least-squares slope of `ln(1 - lambda_m)` against `ln N`.
    pub exponent: f64,
    pub reference_exponent: f64,
}

fn effective_x(f: f64, cs: &CentralSpinParams) -> f64 {
    cs.mu + 4.0 * cs.g * f
}

/// `beta_g` for a given value of `f`.
pub fn berry_phase_from_f(f: f64, cs: &CentralSpinParams) -> Result<f64> {
    let x = effective_x(f, cs);
    let norm = x.hypot(cs.nu);
    if norm == 0.0 {
        return Err(Error::DegenerateEffectiveField);
    }
    Ok(PI * (1.0 + x / norm))
}

/// Chain rule `d beta / d lambda = pi nu^2 (4 g df) / (x^2 + nu^2)^{3/2}`.
pub fn dbeta_from_df(f: f64, df: f64, cs: &CentralSpinParams) -> Result<f64> {
    if cs.g == 0.0 {
        return Ok(0.0);
    }
    let x = effective_x(f, cs);
    let norm = x.hypot(cs.nu);
    if norm == 0.0 {
        return Err(Error::DegenerateEffectiveField);
    }
    Ok(PI * cs.nu * cs.nu * 4.0 * cs.g * df / (norm * norm * norm))
}

fn derived_delta(chain: &ChainParams, cs: &CentralSpinParams) -> Result<f64> {
    Ok(derive_branch_params(cs, chain.n_sites())?.delta)
}

pub fn berry_phase_finite(chain: &ChainParams, cs: &CentralSpinParams) -> Result<BerryResult> {
    let delta = derived_delta(chain, cs)?;
    berry_phase_finite_with_delta(chain, cs, delta)
}

/// Finite-N Berry phase with an explicit g-branch field shift.
pub fn berry_phase_finite_with_delta(
    chain: &ChainParams,
    cs: &CentralSpinParams,
    delta: f64,
) -> Result<BerryResult> {
    let f_value = f_function(chain, delta);
    let beta = berry_phase_from_f(f_value, cs)?;
    let dbeta_dlambda = match df_dlambda(chain, delta) {
        Ok(df) => Slope::Regular(dbeta_from_df(f_value, df, cs)?),
        Err(Error::SingularDerivative { .. }) => Slope::Singular,
        Err(e) => return Err(e),
    };
    Ok(BerryResult {
        beta,
        dbeta_dlambda,
        f_value,
        regime: Regime::FiniteN,
    })
}

pub fn dbeta_dlambda(
    chain: &ChainParams,
    cs: &CentralSpinParams,
    method: DerivativeMethod,
) -> Result<f64> {
    let delta = derived_delta(chain, cs)?;
    dbeta_dlambda_with_delta(chain, cs, delta, method)
}

pub fn dbeta_dlambda_with_delta(
    chain: &ChainParams,
    cs: &CentralSpinParams,
    delta: f64,
    method: DerivativeMethod,
) -> Result<f64> {
    match method {
        DerivativeMethod::Analytic => {
            let df = df_dlambda(chain, delta)?;
            dbeta_from_df(f_function(chain, delta), df, cs)
        }
        DerivativeMethod::FiniteDifference => {
            let lambda = chain.lambda();
            let beta_at = |l: f64| -> Result<f64> {
                let f = f_function(&chain.with_lambda(l)?, delta);
                berry_phase_from_f(f, cs)
            };
            Ok((beta_at(lambda + FD_STEP)? - beta_at(lambda - FD_STEP)?) / (2.0 * FD_STEP))
        }
    }
}

fn check_gamma(gamma: f64, lambda: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite gamma >= 0 and finite lambda (got {gamma}, {lambda})"
        )));
    }
    Ok(())
}

fn split_point(lambda: f64) -> f64 {
    lambda.clamp(-1.0, 1.0).acos()
}

/// Thermodynamic limit of `f`:
/// `(1/2pi) int_0^pi (lambda - cos p) / sqrt((lambda - cos p)^2 + gamma^2 sin^2 p) dp`.
///
/// For `gamma = 0` the closed form `1/2 - arccos(lambda)/pi` (`|lambda| <= 1`)
/// or `sign(lambda)/2` is returned.
pub fn f_thermodynamic(gamma: f64, lambda: f64) -> Result<f64> {
    check_gamma(gamma, lambda)?;
    if gamma == 0.0 {
        return Ok(if lambda.abs() <= 1.0 {
            0.5 - lambda.acos() / PI
        } else {
            0.5 * lambda.signum()
        });
    }
    let integrand = |p: f64| {
        let x = lambda - p.cos();
        let norm = x.hypot(gamma * p.sin());
        if norm == 0.0 {
            0.0
        } else {
            x / norm
        }
    };
    let q = integrate(
        integrand,
        0.0,
        PI,
        &[split_point(lambda)],
        2.0 * PI * QUAD_TOL,
        QUAD_MAX_INTERVALS,
    )?;
    Ok(q.value / (2.0 * PI))
}

/// Thermodynamic limit of `df/dlambda`.
pub fn df_thermodynamic(gamma: f64, lambda: f64) -> Result<Slope> {
    check_gamma(gamma, lambda)?;
    if gamma == 0.0 {
        return Ok(if lambda.abs() < 1.0 {
            Slope::Regular(1.0 / (PI * (1.0 - lambda * lambda).sqrt()))
        } else if lambda == 1.0 {
            Slope::OneSided {
                left: f64::INFINITY,
                right: 0.0,
            }
        } else if lambda == -1.0 {
            Slope::OneSided {
                left: 0.0,
                right: f64::INFINITY,
            }
        } else {
            Slope::Regular(0.0)
        });
    }
    if lambda.abs() == 1.0 {
        // integrand ~ 1/(gamma p) at the gapless momentum
        return Ok(Slope::Regular(f64::INFINITY));
    }
    let g2 = gamma * gamma;
    let integrand = |p: f64| {
        let s = p.sin();
        let x = lambda - p.cos();
        let norm = x.hypot(gamma * s);
        g2 * s * s / (norm * norm * norm)
    };
    let q = integrate(
        integrand,
        0.0,
        PI,
        &[split_point(lambda)],
        2.0 * PI * QUAD_TOL,
        QUAD_MAX_INTERVALS,
    )?;
    Ok(Slope::Regular(q.value / (2.0 * PI)))
}

pub fn berry_phase_thermodynamic(
    gamma: f64,
    lambda: f64,
    cs: &CentralSpinParams,
) -> Result<BerryResult> {
    let f_value = f_thermodynamic(gamma, lambda)?;
    let beta = berry_phase_from_f(f_value, cs)?;
    let x = effective_x(f_value, cs);
    let norm = x.hypot(cs.nu);
    let scale = PI * cs.nu * cs.nu * 4.0 * cs.g / (norm * norm * norm);
    let dbeta_dlambda = if cs.g == 0.0 {
        Slope::Regular(0.0)
    } else {
        df_thermodynamic(gamma, lambda)?.map(|df| scale * df)
    };
    Ok(BerryResult {
        beta,
        dbeta_dlambda,
        f_value,
        regime: Regime::Thermodynamic,
    })
}

/// Locates the maximum of the chosen lambda-derivative inside `bracket`.
/// `chain` fixes `gamma` and `N`; its own `lambda` is ignored.
pub fn find_peak(
    chain: &ChainParams,
    cs: &CentralSpinParams,
    bracket: (f64, f64),
    target: PeakTarget,
) -> Result<Maximum> {
    let (lo, hi) = bracket;
    match target {
        PeakTarget::Dbeta => {
            let delta = derived_delta(chain, cs)?;
            bracketed_peak(
                |l| {
                    dbeta_dlambda_with_delta(
                        &chain.with_lambda(l)?,
                        cs,
                        delta,
                        DerivativeMethod::Analytic,
                    )
                },
                lo,
                hi,
                PEAK_GRID,
                PEAK_TOL,
            )
        }
        PeakTarget::Df => bracketed_peak(
            |l| df_dlambda(&chain.with_lambda(l)?, 0.0),
            lo,
            hi,
            PEAK_GRID,
            PEAK_TOL,
        ),
    }
}

/// Pseudocritical field `lambda_m(N)`: position of the peak of `d beta_g / d lambda`.
pub fn find_pseudocritical(
    chain: &ChainParams,
    cs: &CentralSpinParams,
    bracket: (f64, f64),
) -> Result<f64> {
    Ok(find_peak(chain, cs, bracket, PeakTarget::Dbeta)?.x)
}

/// Least-squares slope of `y` against `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Finite-size scaling of the peak position, `1 - lambda_m ~ N^{-exponent}`,
/// with the default bracket `[0.5, 1.0]`.
pub fn scaling_fit(
    sizes: &[usize],
    cs: &CentralSpinParams,
    gamma: f64,
    target: PeakTarget,
) -> Result<ScalingFit> {
    scaling_fit_in(sizes, cs, gamma, target, (0.5, 1.0))
}

pub fn scaling_fit_in(
    sizes: &[usize],
    cs: &CentralSpinParams,
    gamma: f64,
    target: PeakTarget,
    bracket: (f64, f64),
) -> Result<ScalingFit> {
    if sizes.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 4 sizes (got {})",
            sizes.len()
        )));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "sizes must be strictly increasing".into(),
        ));
    }
    let peak_positions = sizes
        .par_iter()
        .map(|&n| {
            let chain = ChainParams::with_any_parity(gamma, bracket.0, n)?;
            Ok(find_peak(&chain, cs, bracket, target)?.x)
        })
        .collect::<Result<Vec<f64>>>()?;
    let exponent = peak_exponent(sizes, &peak_positions)?;
    Ok(ScalingFit {
        target,
        sizes: sizes.to_vec(),
        peak_positions,
        exponent,
        reference_exponent: REFERENCE_EXPONENT,
    })
}

/// Negated least-squares slope of `ln(1 - lambda_m)` against `ln N`.
pub fn peak_exponent(sizes: &[usize], peaks: &[f64]) -> Result<f64> {
    if sizes.len() != peaks.len() || sizes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need matching sizes and peaks, at least two (got {} and {})",
            sizes.len(),
            peaks.len()
        )));
    }
    if let Some(&bad) = peaks.iter().find(|&&l| !(l < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "peak position {bad} is not below the critical point; log(1 - lambda_m) undefined"
        )));
    }
    let ln_n: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ln_gap: Vec<f64> = peaks.iter().map(|l| (1.0 - l).ln()).collect();
    Ok(-ls_slope(&ln_n, &ln_gap))
}

/// Eigen-energies `(E_g, E_e) = (-E, E)` of the mean-field central-spin
/// Hamiltonian, `E = sqrt((mu/2 + 2 g f)^2 + nu^2/4)`.
pub fn effective_energies(chain: &ChainParams, cs: &CentralSpinParams) -> Result<(f64, f64)> {
    let delta = derived_delta(chain, cs)?;
    let f = f_function(chain, delta);
    let e = (0.5 * cs.mu + 2.0 * cs.g * f).hypot(0.5 * cs.nu);
    Ok((-e, e))
}
