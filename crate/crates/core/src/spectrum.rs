//! Bogoliubov spectrum of the two effective chain Hamiltonians.
//!
//! Conditioned on the central spin being in `|g>` or `|e>`, the chain sees a
//! transverse field shifted to `lambda + kappa * delta` with `kappa = +1` for
//! the g-branch and `-1` for the e-branch. Each momentum pair `(k, -k)` with
//! `k = 1..=M` is diagonalised independently:
//!
//! ```text
//! eps_k    = lambda - cos(phi_k) + kappa * delta,    phi_k = 2 pi k / N
//! Lambda_k = sqrt(eps_k^2 + gamma^2 sin^2(phi_k))
//! cos(theta_k) = eps_k / Lambda_k,  sin(theta_k) = gamma sin(phi_k) / Lambda_k
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Sign of the field shift seen by the chain when the central spin is in `|g>`.
pub const KAPPA_G: f64 = 1.0;
/// Sign of the field shift seen by the chain when the central spin is in `|e>`.
pub const KAPPA_E: f64 = -1.0;

/// Parameters of the environment XY chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    gamma: f64,
    lambda: f64,
    n_sites: usize,
}

impl ChainParams {
    /// Chain with an even number of sites, as required by the pair structure
    /// of the echo product.
    pub fn new(gamma: f64, lambda: f64, n_sites: usize) -> Result<Self> {
        let chain = Self::with_any_parity(gamma, lambda, n_sites)?;
        if !n_sites.is_multiple_of(2) {
            return Err(Error::OddSites(n_sites));
        }
        Ok(chain)
    }

    /// Chain that also admits odd `n_sites`. The pair range becomes
    /// `k = 1..=floor(N/2)`; the unpaired `k = 0` mode is never included.
    /// Used by the Berry-phase and finite-size-scaling paths.
    pub fn with_any_parity(gamma: f64, lambda: f64, n_sites: usize) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be finite and >= 0 (got {gamma})"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite (got {lambda})"
            )));
        }
        if n_sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_sites must be >= 2 (got {n_sites})"
            )));
        }
        Ok(Self {
            gamma,
            lambda,
            n_sites,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Number of momentum pairs `M`.
    pub fn pair_count(&self) -> usize {
        self.n_sites / 2
    }

    /// Same chain at a different field. Used by derivative and peak searches.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::with_any_parity(self.gamma, lambda, self.n_sites)
    }
}

/// Parameters of the central two-level system and its coupling to the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralSpinParams {
    pub mu: f64,
    pub nu: f64,
    pub g: f64,
}

impl CentralSpinParams {
    pub fn new(mu: f64, nu: f64, g: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("nu", nu), ("g", g)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite (got {v})"
                )));
            }
        }
        Ok(Self { mu, nu, g })
    }

    /// Tilt of the bare central-spin eigenbasis, `atan2(nu, mu)`.
    pub fn tilt(&self) -> Result<f64> {
        if self.mu == 0.0 && self.nu == 0.0 {
            return Err(Error::DegenerateCentralSpin);
        }
        Ok(self.nu.atan2(self.mu))
    }
}

/// Field shift and energy offset of the two effective chain Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams {
    /// `delta = g cos(theta) / N`.
    pub delta: f64,
    /// `Delta = sqrt(mu^2 + nu^2) / 2`. A constant energy offset; it never
    /// enters the echo.
    pub big_delta: f64,
}

impl BranchParams {
    pub const KAPPA_G: f64 = KAPPA_G;
    pub const KAPPA_E: f64 = KAPPA_E;
}

pub fn derive_branch_params(cs: &CentralSpinParams, n_sites: usize) -> Result<BranchParams> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_sites must be >= 2 (got {n_sites})"
        )));
    }
    let theta = cs.tilt()?;
    let norm = cs.mu.hypot(cs.nu);
    Ok(BranchParams {
        delta: cs.g * theta.cos() / n_sites as f64,
        big_delta: norm / 2.0,
    })
}

/// One momentum pair of the Bogoliubov diagonalisation, for both branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub k: usize,
    pub phi: f64,
    pub lambda_g: f64,
    pub lambda_e: f64,
    pub theta_g: f64,
    pub theta_e: f64,
    /// `(theta_e - theta_g) / 2`.
    pub alpha: f64,
    /// `sin(2 alpha)`, evaluated as `gamma sin(phi) (eps_g - eps_e) / (Lambda_g Lambda_e)`
    /// so that it vanishes identically when `gamma = 0` or `delta = 0`.
    pub sin_two_alpha: f64,
    /// Set when either branch has `Lambda = 0`; the angle is then pinned to 0.
    pub degenerate: bool,
}

/// `(phi, sin phi, cos phi)` for `phi = 2 pi k / N`, exact at `phi = pi/2` and `phi = pi`.
pub(crate) fn momentum(k: usize, n_sites: usize) -> (f64, f64, f64) {
    let phi = 2.0 * PI * k as f64 / n_sites as f64;
    if 2 * k == n_sites {
        (phi, 0.0, -1.0)
    } else if 4 * k == n_sites {
        (phi, 1.0, 0.0)
    } else {
        let (s, c) = phi.sin_cos();
        (phi, s, c)
    }
}

/// Single-branch quantities `(eps, Lambda)` for mode `k`.
#[inline]
pub(crate) fn branch_energy(
    chain: &ChainParams,
    cos_phi: f64,
    sin_phi: f64,
    shift: f64,
) -> (f64, f64) {
    let eps = chain.lambda - cos_phi + shift;
    let off = chain.gamma * sin_phi;
    (eps, eps.hypot(off))
}

fn angle(eps: f64, off: f64, big_lambda: f64) -> f64 {
    if big_lambda == 0.0 {
        0.0
    } else {
        // off >= 0 on k = 1..=M, so the result lies in [0, pi].
        off.atan2(eps)
    }
}

pub fn mode_table(chain: &ChainParams, delta: f64) -> Result<Vec<ModeData>> {
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be finite (got {delta})"
        )));
    }
    let n = chain.n_sites;
    Ok((1..=chain.pair_count())
        .map(|k| {
            let (phi, sin_phi, cos_phi) = momentum(k, n);
            let off = chain.gamma * sin_phi;
            let (eps_g, lambda_g) = branch_energy(chain, cos_phi, sin_phi, KAPPA_G * delta);
            let (eps_e, lambda_e) = branch_energy(chain, cos_phi, sin_phi, KAPPA_E * delta);
            let theta_g = angle(eps_g, off, lambda_g);
            let theta_e = angle(eps_e, off, lambda_e);
            let degenerate = lambda_g == 0.0 || lambda_e == 0.0;
            let sin_two_alpha = if degenerate {
                (theta_e - theta_g).sin()
            } else {
                off * (2.0 * delta) / (lambda_g * lambda_e)
            };
            ModeData {
                k,
                phi,
                lambda_g,
                lambda_e,
                theta_g,
                theta_e,
                alpha: 0.5 * (theta_e - theta_g),
                sin_two_alpha,
                degenerate,
            }
        })
        .collect())
}

/// `f(lambda, gamma, N) = (1/N) sum_{k=1..M} cos(theta_k)` over the g-branch angles.
pub fn f_function(chain: &ChainParams, delta: f64) -> f64 {
    let n = chain.n_sites;
    let sum: f64 = (1..=chain.pair_count())
        .map(|k| {
            let (_, s, c) = momentum(k, n);
            let (eps, big_lambda) = branch_energy(chain, c, s, KAPPA_G * delta);
            if big_lambda == 0.0 {
                1.0
            } else {
                eps / big_lambda
            }
        })
        .sum();
    sum / n as f64
}

/// `df/dlambda = (1/N) sum gamma^2 sin^2(phi_k) / Lambda_k^3` (g-branch).
pub fn df_dlambda(chain: &ChainParams, delta: f64) -> Result<f64> {
    let n = chain.n_sites;
    let mut sum = 0.0;
    for k in 1..=chain.pair_count() {
        let (_, s, c) = momentum(k, n);
        let (_, big_lambda) = branch_energy(chain, c, s, KAPPA_G * delta);
        if big_lambda == 0.0 {
            return Err(Error::SingularDerivative { k });
        }
        let off = chain.gamma * s;
        sum += off * off / (big_lambda * big_lambda * big_lambda);
    }
    Ok(sum / n as f64)
}
