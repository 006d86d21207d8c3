//! Correlator functionals `Σ M_ij c_ij` for binary-outcome settings.
//!
//! The local value is found by enumerating Bob's sign vectors and letting
//! Alice best-respond; quantum-like values come from unit-vector
//! strategies in `R^N`.

mod vectors;

pub use vectors::{vector_seesaw, VectorSeesawResult, VectorStrategy};

use thiserror::Error;

use crate::scenario::{BellFunctional, BellScenario};

/// Largest `m` accepted by [`local_norm`].
pub const MAX_SIGN_SETTINGS: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrothendieckError {
    #[error("matrix must be square and non-empty: {0}")]
    Shape(String),
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("sign enumeration over m = {m} settings exceeds the limit of {MAX_SIGN_SETTINGS}")]
    TooLarge { m: usize },
    #[error("zero matrix cannot be normalized")]
    ZeroMatrix,
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

/// Real `m x m` coefficient matrix over correlators, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunctional {
    m: usize,
    matrix: Vec<f64>,
    local_norm: Option<f64>,
}

impl CorrelationFunctional {
    pub fn new(m: usize, matrix: Vec<f64>) -> Result<Self, GrothendieckError> {
        if m == 0 || matrix.len() != m * m {
            return Err(GrothendieckError::Shape(format!(
                "{} entries for m = {m}",
                matrix.len()
            )));
        }
        if let Some(k) = matrix.iter().position(|v| !v.is_finite()) {
            return Err(GrothendieckError::NonFinite {
                row: k / m,
                col: k % m,
            });
        }
        Ok(Self {
            m,
            matrix,
            local_norm: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GrothendieckError> {
        let m = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(GrothendieckError::Shape(format!(
                "row of length {} in a {m}-row matrix",
                r.len()
            )));
        }
        Self::new(m, rows.concat())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// Cached local norm, set by [`normalize`].
    pub fn cached_local_norm(&self) -> Option<f64> {
        self.local_norm
    }

    fn rows_iter(&self) -> std::slice::Chunks<'_, f64> {
        self.matrix.chunks(self.m)
    }

    /// `Σ_ij M_ij x_i y_j` for sign vectors (or any reals).
    pub fn sign_value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.rows_iter()
            .zip(x)
            .map(|(row, xi)| xi * row.iter().zip(y).map(|(m, yj)| m * yj).sum::<f64>())
            .sum()
    }
}

/// `max_{x,y ∈ {±1}^m} Σ M_ij x_i y_j`.
///
/// Flipping every sign leaves the value unchanged, so only `y_0 = +1` is
/// enumerated; for fixed `y` the best `x_i` is the sign of row `i`.
pub fn local_norm(f: &CorrelationFunctional) -> Result<f64, GrothendieckError> {
    let m = f.m();
    if m > MAX_SIGN_SETTINGS {
        return Err(GrothendieckError::TooLarge { m });
    }
    Ok(sign_search(f).0)
}

/// Optimal sign vectors `(x, y)`; the first optimal `y` in enumeration
/// order wins. Callers must ensure `m <= 26`.
pub(crate) fn best_signs(f: &CorrelationFunctional) -> (Vec<f64>, Vec<f64>) {
    let (_, mask) = sign_search(f);
    let y = signs_of(mask, f.m());
    let x = (0..f.m())
        .map(|i| {
            let row: f64 = (0..f.m()).map(|j| f.get(i, j) * y[j]).sum();
            if row < 0.0 {
                -1.0
            } else {
                1.0
            }
        })
        .collect();
    (x, y)
}

fn signs_of(mask: u64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            if j > 0 && (mask >> (j - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        })
        .collect()
}

fn sign_search(f: &CorrelationFunctional) -> (f64, u64) {
    let m = f.m();
    let mut best = (0.0f64, 0u64);
    for mask in 0u64..(1u64 << (m - 1)) {
        let y = signs_of(mask, m);
        let value: f64 = (0..m)
            .map(|i| (0..m).map(|j| f.get(i, j) * y[j]).sum::<f64>().abs())
            .sum();
        if value > best.0 {
            best = (value, mask);
        }
    }
    best
}

/// Divides by the local norm so that the classical maximum becomes 1.
pub fn normalize(f: &CorrelationFunctional) -> Result<CorrelationFunctional, GrothendieckError> {
    let norm = local_norm(f)?;
    if norm == 0.0 {
        return Err(GrothendieckError::ZeroMatrix);
    }
    let mut out = CorrelationFunctional::new(f.m, f.matrix.iter().map(|w| w / norm).collect())?;
    out.local_norm = Some(1.0);
    Ok(out)
}

/// Probability form with `c_xy = P(a=b|xy) - P(a≠b|xy)` on binary settings.
pub fn correlator_bell(f: &CorrelationFunctional) -> BellFunctional {
    let scenario = BellScenario::uniform(f.m, 2).expect("m >= 1 binary settings");
    let mut out = BellFunctional::zero(scenario);
    for x in 0..f.m {
        for y in 0..f.m {
            let w = f.get(x, y);
            for a in 0..2 {
                for b in 0..2 {
                    out.add_joint(x, y, a, b, if a == b { w } else { -w });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localbound::local_bound;
    use proptest::prelude::*;

    fn chsh() -> CorrelationFunctional {
        CorrelationFunctional::new(2, vec![1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    fn brute_force(f: &CorrelationFunctional) -> f64 {
        let m = f.m();
        let signs = |mask: u64| -> Vec<f64> {
            (0..m)
                .map(|i| if (mask >> i) & 1 == 1 { -1.0 } else { 1.0 })
                .collect()
        };
        let mut best = f64::NEG_INFINITY;
        for mx in 0..(1u64 << m) {
            for my in 0..(1u64 << m) {
                best = best.max(f.sign_value(&signs(mx), &signs(my)).abs());
            }
        }
        best
    }

    #[test]
    fn chsh_local_norm_is_two() {
        assert_eq!(local_norm(&chsh()).unwrap(), 2.0);
    }

    #[test]
    fn identity_local_norm_is_m() {
        for m in 1..6 {
            let mut id = vec![0.0; m * m];
            for i in 0..m {
                id[i * m + i] = 1.0;
            }
            let f = CorrelationFunctional::new(m, id).unwrap();
            assert_eq!(local_norm(&f).unwrap(), m as f64);
        }
    }

    #[test]
    fn zero_matrix_has_zero_norm_and_cannot_normalize() {
        let z = CorrelationFunctional::new(3, vec![0.0; 9]).unwrap();
        assert_eq!(local_norm(&z).unwrap(), 0.0);
        assert_eq!(normalize(&z), Err(GrothendieckError::ZeroMatrix));
    }

    #[test]
    fn normalize_chsh_halves_it() {
        let n = normalize(&chsh()).unwrap();
        assert_eq!(n.as_slice(), &[0.5, 0.5, 0.5, -0.5]);
        assert_eq!(n.cached_local_norm(), Some(1.0));
        let again = normalize(&n).unwrap();
        assert_eq!(again.as_slice(), n.as_slice());
    }

    #[test]
    fn too_large_is_rejected() {
        let f = CorrelationFunctional::new(27, vec![1.0; 27 * 27]).unwrap();
        assert_eq!(local_norm(&f), Err(GrothendieckError::TooLarge { m: 27 }));
    }

    #[test]
    fn shape_and_finiteness_checked() {
        assert!(CorrelationFunctional::new(2, vec![1.0; 3]).is_err());
        assert_eq!(
            CorrelationFunctional::new(2, vec![1.0, f64::NAN, 0.0, 0.0]),
            Err(GrothendieckError::NonFinite { row: 0, col: 1 })
        );
        assert!(CorrelationFunctional::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn correlator_bell_of_zero_is_zero() {
        let z = CorrelationFunctional::new(2, vec![0.0; 4]).unwrap();
        let f = correlator_bell(&z);
        assert_eq!(f.abs_coefficient_sum(), 0.0);
    }

    #[test]
    fn correlator_bell_local_bound_matches_normalization() {
        let n = normalize(&chsh()).unwrap();
        let (value, _) = local_bound(&correlator_bell(&n)).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    fn matrix_strategy() -> impl Strategy<Value = CorrelationFunctional> {
        (1usize..=4).prop_flat_map(|m| {
            prop::collection::vec(-3.0f64..3.0, m * m)
                .prop_map(move |v| CorrelationFunctional::new(m, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn local_norm_matches_brute_force(f in matrix_strategy()) {
            let fast = local_norm(&f).unwrap();
            let slow = brute_force(&f);
            prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow));
        }

        #[test]
        fn normalize_is_scale_invariant(f in matrix_strategy(), alpha in 0.1f64..10.0) {
            prop_assume!(local_norm(&f).unwrap() > 1e-6);
            let scaled = CorrelationFunctional::new(
                f.m(),
                f.as_slice().iter().map(|w| w * alpha).collect(),
            ).unwrap();
            let a = normalize(&f).unwrap();
            let b = normalize(&scaled).unwrap();
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn correlator_bell_local_bound_is_local_norm(f in matrix_strategy()) {
            let (value, _) = local_bound(&correlator_bell(&f)).unwrap();
            prop_assert!((value - local_norm(&f).unwrap()).abs() < 1e-9);
        }
    }
}
