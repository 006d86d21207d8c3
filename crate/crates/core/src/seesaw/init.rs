use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{eig_hermitian, vec_norm, Complex64, ComplexMatrix, HERMITIAN_TOL};
use crate::localbound::DeterministicStrategy;
use crate::scenario::{BellScenario, Povm, QuantumModel};

/// Generator for restart `index` under master seed `seed`.
pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re = gaussian(rng);
    let im = gaussian(rng);
    Complex64::new(re, im)
}

/// Splits an eigenbasis of a random Hermitian matrix into `outcomes`
/// contiguous blocks whose sizes differ by at most one, larger blocks first.
fn random_projective(rng: &mut ChaCha8Rng, dim: usize, outcomes: usize) -> Povm {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] = gaussian_complex(rng);
        }
    }
    let basis = eig_hermitian(&h.hermitian_part(), HERMITIAN_TOL)
        .expect("Hermitian part is Hermitian")
        .vectors;
    let (q, r) = (dim / outcomes, dim % outcomes);
    let mut start = 0;
    (0..outcomes)
        .map(|o| {
            let size = q + usize::from(o < r);
            let mut m = ComplexMatrix::zeros(dim, dim);
            for k in start..start + size {
                let v = basis.column(k);
                m.add_scaled(1.0, &ComplexMatrix::outer(&v, &v));
            }
            start += size;
            m
        })
        .collect()
}

/// Initial model for one restart: a normalized complex-Gaussian state and
/// projective measurements from random eigenbases.
pub fn random_model(
    scenario: &BellScenario,
    dim_a: usize,
    dim_b: usize,
    seed: u64,
    index: usize,
) -> QuantumModel {
    let mut rng = restart_rng(seed, index);
    let mut state: Vec<Complex64> = (0..dim_a * dim_b)
        .map(|_| gaussian_complex(&mut rng))
        .collect();
    let norm = vec_norm(&state);
    state.iter_mut().for_each(|c| *c /= norm);
    let povms_a = scenario
        .outcomes_a()
        .iter()
        .map(|&v| random_projective(&mut rng, dim_a, v))
        .collect();
    let povms_b = scenario
        .outcomes_b()
        .iter()
        .map(|&v| random_projective(&mut rng, dim_b, v))
        .collect();
    QuantumModel::new(dim_a, dim_b, state, povms_a, povms_b).expect("random models are valid")
}

/// `count` reproducible initial models; entry `r` is the start of restart `r`.
pub fn seeded_models(
    scenario: &BellScenario,
    dim_a: usize,
    dim_b: usize,
    seed: u64,
    count: usize,
) -> Vec<QuantumModel> {
    (0..count)
        .map(|r| random_model(scenario, dim_a, dim_b, seed, r))
        .collect()
}

/// Product state `|00>` with `M^x_{a(x)} = I`, reproducing a deterministic
/// strategy exactly.
pub fn deterministic_model(
    scenario: &BellScenario,
    strategy: &DeterministicStrategy,
    dim_a: usize,
    dim_b: usize,
) -> QuantumModel {
    assert!(
        strategy.fits(scenario),
        "strategy does not fit the scenario"
    );
    let mut state = vec![Complex64::new(0.0, 0.0); dim_a * dim_b];
    state[0] = Complex64::new(1.0, 0.0);
    let povms = |outcomes: &[usize], assignment: &[usize], dim: usize| -> Vec<Povm> {
        outcomes
            .iter()
            .zip(assignment)
            .map(|(&v, &chosen)| {
                (0..v)
                    .map(|o| {
                        if o == chosen {
                            ComplexMatrix::identity(dim)
                        } else {
                            ComplexMatrix::zeros(dim, dim)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    QuantumModel::new(
        dim_a,
        dim_b,
        state,
        povms(scenario.outcomes_a(), &strategy.assignment_a, dim_a),
        povms(scenario.outcomes_b(), &strategy.assignment_b, dim_b),
    )
    .expect("deterministic models are valid")
}

/// Every POVM element is an orthogonal projector within `tol`.
pub fn is_projective(model: &QuantumModel, tol: f64) -> bool {
    [crate::linalg::Party::A, crate::linalg::Party::B]
        .into_iter()
        .flat_map(|p| model.povms(p).iter())
        .flatten()
        .all(|m| (m * m).max_abs_diff(m) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Party;
    use crate::localbound::{local_bound, strategy_value};
    use crate::scenario::{model_value, BellFunctional};

    #[test]
    fn same_seed_same_models() {
        let sc = BellScenario::new(vec![2, 3], vec![2, 2, 2]).unwrap();
        assert_eq!(
            seeded_models(&sc, 3, 3, 42, 4),
            seeded_models(&sc, 3, 3, 42, 4)
        );
        assert_ne!(
            seeded_models(&sc, 3, 3, 42, 2),
            seeded_models(&sc, 3, 3, 43, 2)
        );
        let many = seeded_models(&sc, 3, 3, 42, 4);
        assert_eq!(many[3], random_model(&sc, 3, 3, 42, 3));
    }

    #[test]
    fn outputs_are_valid_and_projective() {
        let sc = BellScenario::new(vec![2, 3, 4], vec![3, 2]).unwrap();
        for (da, db) in [(2, 2), (2, 3), (3, 3), (4, 2)] {
            for m in seeded_models(&sc, da, db, 9, 5) {
                assert!(m.povm_feasibility_error() < 1e-9);
                assert!(is_projective(&m, 1e-9));
                assert!(m.check_scenario(&sc).is_ok());
            }
        }
    }

    #[test]
    fn qubit_binary_settings_get_rank_one_projectors() {
        let sc = BellScenario::uniform(2, 2).unwrap();
        let m = random_model(&sc, 2, 2, 1, 0);
        for povm in m.povms(Party::A).iter().chain(m.povms(Party::B)) {
            for e in povm {
                assert!((e.trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_model_reproduces_strategy_value() {
        let sc = BellScenario::new(vec![2, 3], vec![2, 2, 2]).unwrap();
        let mut f = BellFunctional::zero(sc.clone());
        for (k, (x, y, a, b)) in sc.joint_indices().enumerate() {
            f.add_joint(x, y, a, b, ((k * 5) % 7) as f64 - 3.0);
        }
        f.add_marginal(Party::A, 1, 2, 1.5);
        f.set_constant(-0.5);
        let (v, s) = local_bound(&f).unwrap();
        let m = deterministic_model(&sc, &s, 3, 2);
        assert!((model_value(&f, &m).unwrap() - v).abs() < 1e-12);
        assert_eq!(strategy_value(&f, &s), v);
    }
}
