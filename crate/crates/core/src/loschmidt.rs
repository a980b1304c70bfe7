//! Loschmidt echo of the chain under the two effective Hamiltonians.
//!
//! The exact echo factorises over momentum pairs,
//!
//! ```text
//! L(t) = prod_{k=1..M} F_k(t),   F_k(t) = 1 - sin^2(2 alpha_k) sin^2(2 Lambda_{k,e} t)
//! ```
//!
//! and is accumulated as `sum ln F_k` so that many factors close to one do
//! not lose precision.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectrum::{ChainParams, ModeData};

/// `1 - F_k(t)`.
#[inline]
fn decay_term(mode: &ModeData, t: f64) -> f64 {
    let s = mode.sin_two_alpha;
    let w = (2.0 * mode.lambda_e * t).sin();
    // both squares are <= 1; clamp guards the product against rounding above 1
    (s * s * w * w).min(1.0)
}

/// Single-pair factor `F_k(t)`.
pub fn mode_factor(mode: &ModeData, t: f64) -> f64 {
    1.0 - decay_term(mode, t)
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and >= 0 (got {t})"
        )));
    }
    Ok(())
}

fn log_product(modes: &[ModeData], t: f64) -> f64 {
    let mut acc = 0.0;
    for mode in modes {
        let term = decay_term(mode, t);
        if term >= 1.0 {
            return f64::NEG_INFINITY;
        }
        acc += (-term).ln_1p();
    }
    acc
}

/// `ln L(t)`; `-inf` when some factor vanishes exactly.
pub fn log_echo(modes: &[ModeData], t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(log_product(modes, t))
}

pub fn loschmidt_echo(modes: &[ModeData], t: f64) -> Result<f64> {
    log_echo(modes, t).map(f64::exp)
}

/// Product of the first `cutoff` factors. Never smaller than the full echo.
pub fn partial_product(modes: &[ModeData], t: f64, cutoff: usize) -> Result<f64> {
    check_time(t)?;
    if cutoff == 0 || cutoff > modes.len() {
        return Err(Error::InvalidParameter(format!(
            "cutoff must lie in 1..={} (got {cutoff})",
            modes.len()
        )));
    }
    Ok(log_product(&modes[..cutoff], t).exp())
}

/// Echo values on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
}

impl EchoSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest echo value on the grid.
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates the echo at every grid time. Grid points run in parallel; each
/// value is computed by the same sequential sum, so the output does not
/// depend on the thread count.
pub fn echo_series(modes: &[ModeData], times: &[f64]) -> Result<EchoSeries> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be sorted ascending".into(),
        ));
    }
    let log_values: Vec<f64> = times.par_iter().map(|&t| log_product(modes, t)).collect();
    let values = log_values.iter().map(|l| l.exp()).collect();
    Ok(EchoSeries {
        times: times.to_vec(),
        values,
        log_values,
    })
}

/// Populations of the central spin's initial superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityInput {
    c_g_sq: f64,
    c_e_sq: f64,
}

impl PurityInput {
    pub fn new(c_g_sq: f64, c_e_sq: f64) -> Result<Self> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(c_g_sq) || !in_unit(c_e_sq) || (c_g_sq + c_e_sq - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "populations must lie in [0, 1] and sum to 1 (got {c_g_sq}, {c_e_sq})"
            )));
        }
        Ok(Self { c_g_sq, c_e_sq })
    }

    pub fn c_g_sq(&self) -> f64 {
        self.c_g_sq
    }

    pub fn c_e_sq(&self) -> f64 {
        self.c_e_sq
    }
}

/// Purity of the reduced central-spin state, `1 - 2 |c_g c_e|^2 (1 - L)`.
pub fn purity(le: f64, p: &PurityInput) -> f64 {
    1.0 - 2.0 * p.c_g_sq * p.c_e_sq * (1.0 - le)
}

/// Small-k Gaussian-envelope parameters for a cutoff `N_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicParams {
    pub cutoff: usize,
    pub tau: f64,
    /// `E(N_c) = 4 pi^2 N_c (N_c + 1) (2 N_c + 1) / (6 N^2)`.
    pub e_factor: f64,
}

impl HeuristicParams {
    /// `exp(-tau t^2)`.
    pub fn envelope(&self, t: f64) -> f64 {
        (-self.tau * t * t).exp()
    }
}

pub fn e_factor(cutoff: usize, n_sites: usize) -> f64 {
    let nc = cutoff as f64;
    let n = n_sites as f64;
    4.0 * std::f64::consts::PI.powi(2) * nc * (nc + 1.0) * (2.0 * nc + 1.0) / (6.0 * n * n)
}

fn check_heuristic(chain: &ChainParams, delta: f64, cutoff: usize) -> Result<f64> {
    let half = chain.pair_count();
    if cutoff == 0 {
        return Err(Error::InvalidParameter("cutoff must be >= 1".into()));
    }
    if cutoff >= half {
        return Err(Error::CutoffOutsideSmallK { cutoff, half });
    }
    let lambda = chain.lambda();
    let denom = lambda + delta - 1.0;
    if denom.abs() <= 4.0 * f64::EPSILON * (1.0 + lambda.abs() + delta.abs()) {
        return Err(Error::TauPole { lambda, delta });
    }
    Ok(denom)
}

/// `tau = 16 E(N_c) gamma^2 delta^2 / (lambda + delta - 1)^2`.
pub fn heuristic_tau(chain: &ChainParams, delta: f64, cutoff: usize) -> Result<HeuristicParams> {
    let denom = check_heuristic(chain, delta, cutoff)?;
    let e = e_factor(cutoff, chain.n_sites());
    let gamma = chain.gamma();
    Ok(HeuristicParams {
        cutoff,
        tau: 16.0 * e * gamma * gamma * delta * delta / (denom * denom),
        e_factor: e,
    })
}

/// Small-k estimate of `S(t) = ln L_c(t)`:
///
/// ```text
/// S(t) = -4 E(N_c) gamma^2 delta^2 sin^2(2 t |lambda - delta - 1|)
///        / ((lambda - delta - 1)^2 (lambda + delta - 1)^2)
/// ```
///
/// At `lambda - delta - 1 = 0` the ratio `sin^2(2tx)/x^2` takes its limit `4 t^2`.
pub fn small_k_log_echo(chain: &ChainParams, delta: f64, cutoff: usize, t: f64) -> Result<f64> {
    check_time(t)?;
    let plus = check_heuristic(chain, delta, cutoff)?;
    let minus = chain.lambda() - delta - 1.0;
    let e = e_factor(cutoff, chain.n_sites());
    let gamma = chain.gamma();
    let ratio = if minus == 0.0 {
        4.0 * t * t
    } else {
        (2.0 * t * minus.abs()).sin().powi(2) / (minus * minus)
    };
    Ok(-4.0 * e * gamma * gamma * delta * delta * ratio / (plus * plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::mode_table;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn modes(gamma: f64, lambda: f64, n: usize, delta: f64) -> Vec<ModeData> {
        mode_table(&ChainParams::new(gamma, lambda, n).unwrap(), delta).unwrap()
    }

    #[test]
    fn unity_at_time_zero() {
        let m = modes(0.7, 0.9, 50, 0.2);
        assert_eq!(loschmidt_echo(&m, 0.0).unwrap(), 1.0);
        assert_eq!(partial_product(&m, 0.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn xx_chain_never_decays() {
        for lambda in [0.3, 1.0, 1.7] {
            let m = modes(0.0, lambda, 100, 0.05);
            for i in 0..500 {
                let t = 0.1 * i as f64;
                assert_eq!(loschmidt_echo(&m, t).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn no_backaction_no_decay() {
        let m = modes(1.0, 1.0, 100, 0.0);
        let times: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let series = echo_series(&m, &times).unwrap();
        assert!(series.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn full_cutoff_equals_echo() {
        let m = modes(0.5, 1.1, 40, 0.1);
        for t in [0.3, 2.0, 7.5] {
            assert_eq!(
                partial_product(&m, t, m.len()).unwrap(),
                loschmidt_echo(&m, t).unwrap()
            );
        }
    }

    #[test]
    fn input_errors() {
        let m = modes(0.5, 1.1, 40, 0.1);
        assert!(loschmidt_echo(&m, -1.0).is_err());
        assert!(partial_product(&m, 1.0, 0).is_err());
        assert!(partial_product(&m, 1.0, 21).is_err());
        assert_eq!(echo_series(&m, &[]), Err(Error::EmptyGrid));
        assert!(echo_series(&m, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn vanishing_factor_gives_neg_infinity() {
        let mode = ModeData {
            k: 1,
            phi: 0.0,
            lambda_g: 1.0,
            lambda_e: 1.0,
            theta_g: 0.0,
            theta_e: PI / 2.0,
            alpha: PI / 4.0,
            sin_two_alpha: 1.0,
            degenerate: false,
        };
        let t = PI / 4.0;
        assert_eq!(log_echo(&[mode], t).unwrap(), f64::NEG_INFINITY);
        assert_eq!(loschmidt_echo(&[mode], t).unwrap(), 0.0);
    }

    #[test]
    fn purity_cases() {
        let p = PurityInput::new(0.3, 0.7).unwrap();
        assert_eq!(purity(1.0, &p), 1.0);
        assert_eq!(purity(0.2, &PurityInput::new(1.0, 0.0).unwrap()), 1.0);
        assert_eq!(purity(0.0, &PurityInput::new(0.5, 0.5).unwrap()), 0.5);
        assert!(PurityInput::new(0.5, 0.6).is_err());
    }

    #[test]
    fn e_factor_single_mode() {
        let chain = ChainParams::new(1.0, 1.2, 100).unwrap();
        let h = heuristic_tau(&chain, 0.05, 1).unwrap();
        assert_relative_eq!(h.e_factor, 4.0 * PI * PI * 1e-4, max_relative = 1e-15);
        assert_relative_eq!(
            h.tau,
            16.0 * h.e_factor * 0.0025 / (0.25f64 * 0.25),
            max_relative = 1e-12
        );
    }

    #[test]
    fn tau_vanishes_without_anisotropy_or_backaction() {
        let xx = ChainParams::new(0.0, 1.2, 100).unwrap();
        assert_eq!(heuristic_tau(&xx, 0.05, 5).unwrap().tau, 0.0);
        let ising = ChainParams::new(1.0, 1.2, 100).unwrap();
        assert_eq!(heuristic_tau(&ising, 0.0, 5).unwrap().tau, 0.0);
    }

    #[test]
    fn tau_errors() {
        let chain = ChainParams::new(1.0, 0.95, 100).unwrap();
        assert!(matches!(
            heuristic_tau(&chain, 0.05, 3),
            Err(Error::TauPole { .. })
        ));
        let chain = ChainParams::new(1.0, 1.2, 100).unwrap();
        assert_eq!(
            heuristic_tau(&chain, 0.05, 50),
            Err(Error::CutoffOutsideSmallK {
                cutoff: 50,
                half: 50
            })
        );
    }

    #[test]
    fn envelope_tracks_partial_product_in_small_k_regime() {
        // N large enough that gamma sin(phi) << |lambda + delta - 1| for k <= N_c
        let n = 100_000;
        let chain = ChainParams::new(1.0, 1.05, n).unwrap();
        let m = mode_table(&chain, 0.05).unwrap();
        let h = heuristic_tau(&chain, 0.05, 10).unwrap();
        let t_max = (0.5 / h.tau).sqrt();
        for i in 0..=20 {
            let t = t_max * i as f64 / 20.0;
            let pp = partial_product(&m, t, 10).unwrap();
            let env = h.envelope(t);
            assert!((pp - env).abs() / env < 0.01, "t={t} pp={pp} env={env}");
            let s = small_k_log_echo(&chain, 0.05, 10, t).unwrap();
            assert_relative_eq!(s, -h.tau * t * t, max_relative = 1e-12);
        }
    }

    #[test]
    fn factor_period() {
        let m = modes(0.8, 0.6, 30, 0.1);
        for mode in &m {
            let period = PI / (2.0 * mode.lambda_e);
            for t in [0.1, 0.77, 3.2] {
                assert!((mode_factor(mode, t) - mode_factor(mode, t + period)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn echo_in_unit_interval_and_monotone_in_modes(
            gamma in 0.0..1.2f64, lambda in 0.0..2.0f64, m in 2usize..40,
            delta in -0.3..0.3f64, t in 0.0..20.0f64,
        ) {
            let table = modes(gamma, lambda, 2 * m, delta);
            let mut prev = 1.0;
            for c in 1..=table.len() {
                let pp = partial_product(&table, t, c).unwrap();
                prop_assert!((0.0..=1.0).contains(&pp));
                prop_assert!(pp <= prev);
                prev = pp;
            }
            prop_assert_eq!(prev, loschmidt_echo(&table, t).unwrap());
        }

        #[test]
        fn series_is_pointwise(
            gamma in 0.0..1.2f64, lambda in 0.0..2.0f64, delta in 0.0..0.2f64,
        ) {
            let table = modes(gamma, lambda, 24, delta);
            let times: Vec<f64> = (0..64).map(|i| 0.13 * i as f64).collect();
            let series = echo_series(&table, &times).unwrap();
            for (i, &t) in times.iter().enumerate() {
                prop_assert_eq!(series.values[i], loschmidt_echo(&table, t).unwrap());
                if series.log_values[i] > f64::NEG_INFINITY {
                    prop_assert_eq!(series.values[i], series.log_values[i].exp());
                }
            }
        }

        #[test]
        fn delta_sign_swaps_branches(
            gamma in 0.0..1.2f64, lambda in 0.0..2.0f64, delta in 0.001..0.3f64, t in 0.0..10.0f64,
        ) {
            let plus = modes(gamma, lambda, 20, delta);
            let minus = modes(gamma, lambda, 20, -delta);
            let swapped: f64 = plus
                .iter()
                .map(|m| 1.0 - m.sin_two_alpha.powi(2) * (2.0 * m.lambda_g * t).sin().powi(2))
                .product();
            for (p, q) in plus.iter().zip(&minus) {
                prop_assert!((p.alpha.abs() - q.alpha.abs()).abs() < 1e-12);
            }
            prop_assert!((loschmidt_echo(&minus, t).unwrap() - swapped).abs() < 1e-12);
        }
    }
}
