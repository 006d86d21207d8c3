//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies an ordinary real Jacobi rotation to the resulting
//! real symmetric 2x2 block.

use super::{Complex64, ComplexMatrix, LinalgError, ONE, ZERO};

const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.vectors.column(i)
    }

    /// `V diag(f(λ)) V^H`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    /// `V Λ V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_map(|l| l)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input must satisfy `max |A - A^H| <= tol`; it is symmetrized before
/// the iteration starts.
pub fn eig_hermitian(a: &ComplexMatrix, tol: f64) -> Result<HermitianEig, LinalgError> {
    a.check_hermitian(tol)?;
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = m.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * scale;
    let mut converged = off_diagonal_norm(&m) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        converged = off_diagonal_norm(&m) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));

    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(HermitianEig { values, vectors })
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = m.rows();
    let phase = apq / b;
    let alpha = m[(p, p)].re;
    let gamma = m[(q, q)].re;
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    // A <- A J
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * jpp + akq * jqp;
        m[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J^H A
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);

    // V <- V J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Largest entrywise deviation of `V^H V` from the identity.
pub fn orthonormality_error(v: &ComplexMatrix) -> f64 {
    let g = &v.adjoint() * v;
    let n = g.rows();
    let mut err = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            err = err.max((g[(i, j)] - target).norm());
        }
    }
    err
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] =
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        m.hermitian_part()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let e = eig_hermitian(&ComplexMatrix::identity(3), 1e-9).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig_hermitian(&x, 1e-9).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_has_complex_eigenvectors() {
        let y = ComplexMatrix::new(
            2,
            2,
            vec![
                ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                ZERO,
            ],
        )
        .unwrap();
        let e = eig_hermitian(&y, 1e-9).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn seeded_9x9_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(&mut rng, 9);
        let e = eig_hermitian(&a, 1e-9).unwrap();
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-10);
        assert!(orthonormality_error(&e.vectors) < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn degenerate_spectrum_still_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 4);
        let u = eig_hermitian(&a, 1e-9).unwrap().vectors;
        // U diag(2,2,-1,-1) U^H
        let d = ComplexMatrix::diagonal(&[2.0, 2.0, -1.0, -1.0]);
        let m = &(&u * &d) * &u.adjoint();
        let e = eig_hermitian(&m.hermitian_part(), 1e-9).unwrap();
        assert!((e.values[1] - 2.0).abs() < 1e-12);
        assert!((e.values[2] + 1.0).abs() < 1e-12);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn zero_matrix_is_fine() {
        let e = eig_hermitian(&ComplexMatrix::zeros(3, 3), 1e-9).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            eig_hermitian(&a, 1e-9),
            Err(LinalgError::NotHermitian { .. })
        ));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            eig_hermitian(&r, 1e-9),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn small_asymmetry_within_tol_is_symmetrized() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 0.5 + 1e-11, 0.5, -1.0]).unwrap();
        let e = eig_hermitian(&a, 1e-9).unwrap();
        let expected = (1.0f64 + 0.25).sqrt();
        assert!((e.values[0] - expected).abs() < 1e-10);
    }
}
