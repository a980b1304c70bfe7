//! Brute-force check of the echo product formula.
//!
//! Each momentum pair `(k, -k)` of the fermionised chain lives in the
//! two-dimensional space spanned by `|0_k 0_-k>` and `|1_k 1_-k>`. Here the
//! e-branch pair Hamiltonian is built as an explicit 2x2 matrix, diagonalised
//! numerically, and used to evolve the g-branch ground state directly:
//!
//! ```text
//! L(t) = prod_k |<G_g,k| exp(-i h_{e,k} t) |G_g,k>|^2
//! ```
//!
//! Nothing here uses `alpha_k` or the closed-form echo. The construction
//! checks that the analytic angles agree with the numerical eigenvectors and
//! fails with `ConventionMismatch` when they do not.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::{branch_energy, mode_table, momentum, ChainParams, ModeData, KAPPA_E};

/// Largest chain the oracle accepts.
pub const MAX_ORACLE_SITES: usize = 200;

const CHECK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PairSubspace {
    pub k: usize,
    /// Basis `{|0_k 0_-k>, |1_k 1_-k>}`, zero trace.
    pub h_e: Matrix2<Complex64>,
    /// `(cos(theta_g/2), i sin(theta_g/2))`.
    pub ground_g: Vector2<Complex64>,
    /// Eigenvalues of `h_e`, ascending.
    pub energies: [f64; 2],
    /// Columns are the eigenvectors matching `energies`.
    pub eigenvectors: Matrix2<Complex64>,
}

fn pair_state(theta: f64) -> Vector2<Complex64> {
    let (s, c) = (0.5 * theta).sin_cos();
    Vector2::new(Complex64::new(c, 0.0), Complex64::new(0.0, s))
}

fn mismatch(k: usize, detail: String) -> Error {
    Error::ConventionMismatch { k, detail }
}

pub fn build_pair_subspace(
    mode: &ModeData,
    chain: &ChainParams,
    delta: f64,
) -> Result<PairSubspace> {
    let k = mode.k;
    let (_, sin_phi, cos_phi) = momentum(k, chain.n_sites());
    let (eps, _) = branch_energy(chain, cos_phi, sin_phi, KAPPA_E * delta);
    let off = chain.gamma() * sin_phi;

    let i = Complex64::i();
    let h_e = Matrix2::new(
        Complex64::new(-2.0 * eps, 0.0),
        i * (2.0 * off),
        -i * (2.0 * off),
        Complex64::new(2.0 * eps, 0.0),
    );

    let eig = h_e.symmetric_eigen();
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
        (0, 1)
    } else {
        (1, 0)
    };
    let energies = [eig.eigenvalues[lo], eig.eigenvalues[hi]];
    let mut eigenvectors = Matrix2::zeros();
    eigenvectors.set_column(0, &eig.eigenvectors.column(lo));
    eigenvectors.set_column(1, &eig.eigenvectors.column(hi));

    let scale = CHECK_TOL * (1.0 + mode.lambda_e);
    let expected = 2.0 * mode.lambda_e;
    if (energies[0] + expected).abs() > scale || (energies[1] - expected).abs() > scale {
        return Err(mismatch(
            k,
            format!("eigenvalues {energies:?} differ from +-2 Lambda_e = +-{expected}"),
        ));
    }

    // the analytic e-branch pair state must be the lowest eigenvector
    let reference = pair_state(mode.theta_e);
    let residual = (h_e * reference + reference * Complex64::new(expected, 0.0)).norm();
    if residual > 2.0 * scale {
        return Err(mismatch(
            k,
            format!("(cos(theta_e/2), i sin(theta_e/2)) is not the ground state (residual {residual:e})"),
        ));
    }
    if mode.lambda_e > 1e-6 {
        let overlap = eigenvectors.column(0).dotc(&reference).norm();
        if (1.0 - overlap).abs() > 1e-10 {
            return Err(mismatch(
                k,
                format!("lowest eigenvector overlap {overlap} with the analytic ground state"),
            ));
        }
    }

    Ok(PairSubspace {
        k,
        h_e,
        ground_g: pair_state(mode.theta_g),
        energies,
        eigenvectors,
    })
}

impl PairSubspace {
    /// `<G_g| exp(-i h_e t) |G_g>` evaluated through the eigen-decomposition.
    pub fn return_amplitude(&self, t: f64) -> Complex64 {
        let phases = Matrix2::from_diagonal(&Vector2::new(
            Complex64::from_polar(1.0, -self.energies[0] * t),
            Complex64::from_polar(1.0, -self.energies[1] * t),
        ));
        let u = self.eigenvectors * phases * self.eigenvectors.adjoint();
        self.ground_g.dotc(&(u * self.ground_g))
    }
}

pub fn oracle_echo(chain: &ChainParams, delta: f64, t: f64) -> Result<f64> {
    if chain.n_sites() > MAX_ORACLE_SITES {
        return Err(Error::InvalidParameter(format!(
            "oracle limited to N <= {MAX_ORACLE_SITES} (got {})",
            chain.n_sites()
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and >= 0 (got {t})"
        )));
    }
    let mut product = 1.0;
    for mode in mode_table(chain, delta)? {
        let pair = build_pair_subspace(&mode, chain, delta)?;
        product *= pair.return_amplitude(t).norm_sqr();
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loschmidt::loschmidt_echo;
    use proptest::prelude::*;

    #[test]
    fn xx_subspace_is_diagonal() {
        let chain = ChainParams::new(0.0, 0.4, 12).unwrap();
        for mode in mode_table(&chain, 0.1).unwrap() {
            let pair = build_pair_subspace(&mode, &chain, 0.1).unwrap();
            assert_eq!(pair.h_e[(0, 1)], Complex64::new(0.0, 0.0));
            let g = pair.ground_g;
            assert!(g[0].norm() == 1.0 || g[1].norm() == 1.0);
        }
        assert!((oracle_echo(&chain, 0.1, 3.7).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_pair() {
        let chain = ChainParams::new(0.9, 0.6, 10).unwrap();
        let table = mode_table(&chain, 0.05).unwrap();
        let pair = build_pair_subspace(table.last().unwrap(), &chain, 0.05).unwrap();
        assert_eq!(pair.h_e[(0, 1)].norm(), 0.0);
        let expected = 2.0 * (0.6 + 1.0 - 0.05);
        assert!((pair.energies[1] - expected).abs() < 1e-12);
        assert!((pair.energies[0] + expected).abs() < 1e-12);
    }

    #[test]
    fn time_zero_and_limits() {
        let chain = ChainParams::new(0.7, 0.9, 12).unwrap();
        assert!((oracle_echo(&chain, 0.1, 0.0).unwrap() - 1.0).abs() < 1e-14);
        let big = ChainParams::new(0.7, 0.9, 202).unwrap();
        assert!(oracle_echo(&big, 0.1, 1.0).is_err());
    }

    #[test]
    fn reference_instance() {
        let chain = ChainParams::new(0.7, 0.9, 12).unwrap();
        let modes = mode_table(&chain, 0.1).unwrap();
        let exact = loschmidt_echo(&modes, 1.3).unwrap();
        let brute = oracle_echo(&chain, 0.1, 1.3).unwrap();
        assert!((exact - brute).abs() < 1e-9, "{exact} vs {brute}");
    }

    #[test]
    fn flipped_convention_is_caught() {
        let chain = ChainParams::new(0.8, 0.5, 12).unwrap();
        let mut mode = mode_table(&chain, 0.1).unwrap()[1];
        mode.theta_e = std::f64::consts::PI - mode.theta_e;
        assert!(matches!(
            build_pair_subspace(&mode, &chain, 0.1),
            Err(Error::ConventionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn eigenvalues_match_spectrum(
            gamma in 0.0..1.0f64, lambda in 0.0..2.0f64, delta in 0.0..0.2f64, m in 4usize..7,
        ) {
            let chain = ChainParams::new(gamma, lambda, 2 * m).unwrap();
            for mode in mode_table(&chain, delta).unwrap() {
                let pair = build_pair_subspace(&mode, &chain, delta).unwrap();
                prop_assert!((pair.energies[1] - 2.0 * mode.lambda_e).abs() < 1e-12 * (1.0 + mode.lambda_e));
            }
        }

        #[test]
        fn amplitude_is_bounded_and_phase_blind(
            gamma in 0.0..1.0f64, lambda in 0.0..2.0f64, delta in 0.0..0.2f64,
            t in 0.0..5.0f64, phase in 0.0..std::f64::consts::TAU,
        ) {
            let chain = ChainParams::new(gamma, lambda, 10).unwrap();
            for mode in mode_table(&chain, delta).unwrap() {
                let mut pair = build_pair_subspace(&mode, &chain, delta).unwrap();
                let a = pair.return_amplitude(t);
                prop_assert!(a.norm() <= 1.0 + 1e-12);
                pair.ground_g *= Complex64::from_polar(1.0, phase);
                prop_assert!((pair.return_amplitude(t).norm_sqr() - a.norm_sqr()).abs() < 1e-14);
            }
        }

        #[test]
        fn oracle_agrees_with_product_formula(
            gamma in 0.0..1.0f64, lambda in 0.0..2.0f64, delta in 0.0..0.2f64,
            t in 0.0..5.0f64, m in prop::sample::select(vec![4usize, 5, 6]),
        ) {
            let chain = ChainParams::new(gamma, lambda, 2 * m).unwrap();
            let modes = mode_table(&chain, delta).unwrap();
            let exact = loschmidt_echo(&modes, t).unwrap();
            prop_assert!((exact - oracle_echo(&chain, delta, t).unwrap()).abs() < 1e-9);
            // swapped roles: oracle at -delta equals the product with Lambda_g in the phase
            let swapped: f64 = modes
                .iter()
                .map(|md| 1.0 - md.sin_two_alpha.powi(2) * (2.0 * md.lambda_g * t).sin().powi(2))
                .product();
            prop_assert!((swapped - oracle_echo(&chain, -delta, t).unwrap()).abs() < 1e-9);
        }
    }
}
