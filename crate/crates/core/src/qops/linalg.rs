use nalgebra::DMatrix;

use super::{ComplexMatrix, DensityMatrix, QopsError};

/// Input to [`hermitian_eig`] must be Hermitian to this elementwise tolerance.
const EIG_HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
const ENTROPY_ZERO: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V·f(Λ)·V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * mapped[k])
                .sum()
        })
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen, QopsError> {
    if !m.is_square() {
        return Err(QopsError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let residual = m.hermiticity_residual();
    if residual >= EIG_HERMITIAN_TOL {
        return Err(QopsError::NotHermitian { residual });
    }
    let n = m.rows();
    // Symmetrize exactly so the solver sees a Hermitian input.
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let eig = sym
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(QopsError::EigenFailed)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/4, the
/// series is summed until terms drop below machine precision relative to the
/// partial sum, and the result is squared `s` times.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix, QopsError> {
    if !m.is_square() {
        return Err(QopsError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let norm = m.norm_one();
    let mut squarings = 0u32;
    if norm > 0.25 {
        squarings = (norm / 0.25).log2().ceil() as u32;
    }
    let a = m.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul(&a)?.scale_real(1.0 / k as f64);
        sum = &sum + &term;
        if term.norm_one() <= f64::EPSILON * 1e-2 * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum)?;
    }
    Ok(sum)
}

/// `-Σ λ log₂ λ` over a spectrum, with `0·log 0 ≡ 0`.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > ENTROPY_ZERO)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        + 0.0 // no negative zero for pure states
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, QopsError> {
    let eig = hermitian_eig(rho.matrix())?;
    if let Some(&min) = eig.values.first() {
        if min < -super::density::POSITIVITY_TOL {
            return Err(QopsError::NegativeEigenvalue(min));
        }
    }
    Ok(entropy_of_spectrum(&eig.values))
}

#[cfg(test)]
mod tests {
    use super::super::pauli;
    use num_complex::Complex64 as C64;
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
        })
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n, 1.0);
        (&a + &a.adjoint()).scale_real(0.5)
    }

    /// Plain truncated power series, no scaling. Only trustworthy for small norms.
    fn series_exp(m: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let mut sum = ComplexMatrix::identity(m.rows());
        let mut term = ComplexMatrix::identity(m.rows());
        for k in 1..terms {
            term = (&term * m).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn eig_of_diagonal_and_pauli() {
        let eig = hermitian_eig(&ComplexMatrix::real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.values.len(), 3);
        for (v, e) in eig.values.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-14);
        }
        let eig = hermitian_eig(&pauli::sigma_x()).unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        assert!(matches!(
            hermitian_eig(&pauli::sigma_plus()),
            Err(QopsError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in [2, 4, 16] {
            let h = random_hermitian(&mut rng, n);
            let eig = hermitian_eig(&h).unwrap();
            let rebuilt = eig.map_spectrum(|l| l);
            assert!(rebuilt.max_abs_diff(&h) < 1e-10);
            let vtv = &eig.vectors.adjoint() * &eig.vectors;
            assert!(vtv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            for (k, &l) in eig.values.iter().enumerate() {
                let v: Vec<C64> = (0..n).map(|i| eig.vectors[(i, k)]).collect();
                let hv = h.apply(&v).unwrap();
                let res = hv.iter().zip(&v).map(|(a, b)| (a - b * l).norm()).fold(0.0, f64::max);
                assert!(res < 1e-10 * h.norm_one());
            }
            let tr: f64 = eig.values.iter().sum();
            assert_abs_diff_eq!(tr, h.trace().re, epsilon = 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn expm_identity_diagonal_rotation() {
        let z = ComplexMatrix::zeros(3, 3);
        assert!(expm(&z).unwrap().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let d = ComplexMatrix::diagonal(&[C64::new(0.3, 0.0), C64::new(-1.7, 2.0)]);
        let e = expm(&d).unwrap();
        assert_abs_diff_eq!((e[(0, 0)] - C64::new(0.3f64.exp(), 0.0)).norm(), 0.0, epsilon = 1e-14);
        let want = C64::new(-1.7, 2.0).exp();
        assert!((e[(1, 1)] - want).norm() < 1e-14);

        // exp(-iπ/2 σx) = -i σx; cross-checked against the raw series.
        let arg = pauli::sigma_x().scale(C64::new(0.0, -std::f64::consts::FRAC_PI_2));
        let rot = expm(&arg).unwrap();
        let closed = pauli::sigma_x().scale(C64::new(0.0, -1.0));
        assert!(rot.max_abs_diff(&closed) < 1e-13);
        assert!(rot.max_abs_diff(&series_exp(&arg, 40)) < 1e-13);
    }

    #[test]
    fn expm_matches_series_at_moderate_norm() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 6, 0.5);
        let reference = series_exp(&a, 60);
        let e = expm(&a).unwrap();
        assert!(e.max_abs_diff(&reference) < 1e-10 * reference.max_abs());
    }

    #[test]
    fn expm_large_norm_unitary_agrees_with_eigen_route() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 8).scale_real(20.0);
        let u = expm(&h.scale(C64::new(0.0, -1.0))).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        let n = 8;
        let reference = ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| {
                    eig.vectors[(i, k)]
                        * eig.vectors[(j, k)].conj()
                        * C64::new(0.0, -eig.values[k]).exp()
                })
                .sum()
        });
        assert!(u.max_abs_diff(&reference) < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        let pure = DensityMatrix::basis_state(4, 2);
        assert_abs_diff_eq!(von_neumann_entropy(&pure).unwrap(), 0.0, epsilon = 1e-12);
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed).unwrap(), 2.0, epsilon = 1e-12);
        let half = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&half).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_rejects_negative_spectrum() {
        let bad = DensityMatrix::new_unchecked(ComplexMatrix::real_diagonal(&[1.2, -0.2]));
        assert!(matches!(von_neumann_entropy(&bad), Err(QopsError::NegativeEigenvalue(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn expm_inverse_pair(seed in any::<u64>()) {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 5, 1.0);
            let norm = a.norm_one();
            let a = a.scale_real(10.0 * rng.gen_range(0.0..1.0) / norm);
            let prod = &expm(&a).unwrap() * &expm(&a.scale_real(-1.0)).unwrap();
            prop_assert!(prod.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-9);
        }
    }
}
