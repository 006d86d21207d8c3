use super::{eig_hermitian, ComplexMatrix, LinalgError, Party};

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = (a.rows(), a.cols());
    let (br, bc) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace of an operator on `C^dA ⊗ C^dB` over `traced`.
pub fn partial_trace(
    a: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    traced: Party,
) -> Result<ComplexMatrix, LinalgError> {
    let n = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || a.rows() != n || a.cols() != n {
        return Err(LinalgError::DimensionMismatch(format!(
            "partial trace over {dim_a}x{dim_b} needs a {n}x{n} operator, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(match traced {
        Party::B => {
            let mut out = ComplexMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    out[(i, j)] = (0..dim_b).map(|k| a[(i * dim_b + k, j * dim_b + k)]).sum();
                }
            }
            out
        }
        Party::A => {
            let mut out = ComplexMatrix::zeros(dim_b, dim_b);
            for i in 0..dim_b {
                for j in 0..dim_b {
                    out[(i, j)] = (0..dim_a).map(|k| a[(k * dim_b + i, k * dim_b + j)]).sum();
                }
            }
            out
        }
    })
}

/// Projector onto the eigenspace of eigenvalues strictly above `tol`.
pub fn positive_projector(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = eig_hermitian(a, tol)?;
    Ok(eig.spectral_map(|l| if l > tol { 1.0 } else { 0.0 }))
}

/// Square root of a PSD operator together with the projector onto its support.
#[derive(Debug, Clone)]
pub struct PseudoSqrt {
    pub sqrt: ComplexMatrix,
    pub support: ComplexMatrix,
}

/// Eigenvalues in `[-tol, 0]` are clamped to zero; anything below `-tol`
/// is rejected.
pub fn psd_pseudo_sqrt(a: &ComplexMatrix, tol: f64) -> Result<PseudoSqrt, LinalgError> {
    let eig = eig_hermitian(a, tol)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(LinalgError::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(PseudoSqrt {
        sqrt: eig.spectral_map(|l| l.max(0.0).sqrt()),
        support: eig.spectral_map(|l| if l > tol { 1.0 } else { 0.0 }),
    })
}
