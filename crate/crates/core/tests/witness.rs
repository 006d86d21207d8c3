use std::f64::consts::{FRAC_PI_4, PI};

use dimwit_core::catalog::{
    by_name, expression_e, expression_e_theta_value, i_phi, theta_state, witness_report, Verdict,
    DEFAULT_GAP_THRESHOLD,
};
use dimwit_core::grothendieck::{correlator_bell, normalize, vector_seesaw, CorrelationFunctional};
use dimwit_core::scenario::model_value;
use dimwit_core::seesaw::{seesaw, seesaw_with_seeds, SeesawConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(restarts: usize) -> SeesawConfig {
    SeesawConfig {
        restarts,
        seed: 2,
        ..SeesawConfig::default()
    }
}

#[test]
fn theta_sweep_matches_closed_form() {
    let f = expression_e();
    for k in 1..=8 {
        let theta = PI * k as f64 / 32.0;
        let c = SeesawConfig {
            fixed_state: Some(theta_state(theta)),
            ..cfg(12)
        };
        let r = seesaw(&f, 2, 2, &c).unwrap();
        let expected = expression_e_theta_value(theta);
        assert!(
            (r.best_value - expected).abs() < 1e-5,
            "θ = {theta}: {} vs {expected}",
            r.best_value
        );
        assert_eq!(r.best_model.state(), theta_state(theta).as_slice());
    }
}

#[test]
fn best_values_grow_with_embedding_dimension() {
    let f = i_phi(FRAC_PI_4);
    let mut prev = seesaw(&f, 2, 2, &cfg(10)).unwrap();
    for d in 3..=4 {
        let seed = prev.best_model.embed(d, d).unwrap();
        let next = seesaw_with_seeds(&f, d, d, &cfg(10), &[seed]).unwrap();
        assert!(next.best_value >= prev.best_value - 1e-12);
        assert!((model_value(&f, &next.best_model).unwrap() - next.best_value).abs() < 1e-10);
        prev = next;
    }
}

#[test]
fn witness_verdicts() {
    let e = witness_report("E", &expression_e(), 2, &cfg(30), DEFAULT_GAP_THRESHOLD).unwrap();
    assert_eq!(e.verdict, Verdict::Witnessed);
    assert!((e.gap - 0.0461).abs() < 1e-3, "{}", e.gap);
    assert!(e.value_d_plus >= e.value_d && e.value_d >= e.local_bound);

    let phi = witness_report(
        "iphi",
        &i_phi(FRAC_PI_4),
        2,
        &cfg(30),
        DEFAULT_GAP_THRESHOLD,
    )
    .unwrap();
    assert_eq!(phi.verdict, Verdict::Witnessed);
    assert!(phi.value_d <= 1e-6);

    let chsh = by_name("chsh").unwrap();
    let c = witness_report("chsh", &chsh, 2, &cfg(30), DEFAULT_GAP_THRESHOLD).unwrap();
    assert_eq!(c.verdict, Verdict::NotWitnessed);
    assert!((c.value_d - 2.0 * 2f64.sqrt()).abs() < 1e-8);
}

#[test]
fn correlator_and_vector_pictures_agree_on_small_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let vcfg = SeesawConfig {
        max_iterations: 5000,
        convergence_tol: 1e-14,
        ..cfg(20)
    };
    for m in 2..=3 {
        for _ in 0..3 {
            let data = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = normalize(&CorrelationFunctional::new(m, data).unwrap()).unwrap();
            let vector = vector_seesaw(&f, 3, &vcfg, &[]).unwrap().value;
            let qubit = seesaw(&correlator_bell(&f), 2, 2, &cfg(40))
                .unwrap()
                .best_value;
            assert!(
                qubit <= vector + 1e-6,
                "qubit {qubit} above vector {vector}"
            );
            assert!(qubit >= 1.0 - 1e-9);
        }
    }
}
