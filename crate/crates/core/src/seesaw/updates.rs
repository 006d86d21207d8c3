use super::SeesawError;
use crate::linalg::{
    eig_hermitian, inner, positive_projector, psd_pseudo_sqrt, vec_norm, Complex64, ComplexMatrix,
    Party, HERMITIAN_TOL,
};
use crate::scenario::{bell_operator, BellFunctional, Povm, QuantumModel};

/// Eigenvalues of `F_0 - F_1` (or `RΔR`) above this count as positive.
pub(crate) const POSITIVE_TOL: f64 = 1e-12;
/// Relative gain a pairwise exchange needs before it replaces the pair.
const EXCHANGE_MIN_GAIN: f64 = 1e-14;
/// Relative gap under which top eigenvalues are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;
/// Minimum norm of the previous state's projection onto the top eigenspace.
const PROJECTION_MIN_NORM: f64 = 1e-6;

/// Operators `F_o` with `value = Σ_o tr(M^s_o F_o) + (terms without M^s)`.
///
/// For Alice, `F_a = Ψ G_a^T Ψ^H` where `G_a = Σ_{y,b} w_{ab,sy} N^y_b + wA_{s,a} I`
/// and `Ψ` is the `dA x dB` amplitude matrix; Bob's case is symmetric with
/// `F_b = Ψ^T H_b^T conj(Ψ)`.
pub fn reduced_operators(
    f: &BellFunctional,
    model: &QuantumModel,
    party: Party,
    setting: usize,
) -> Result<Vec<ComplexMatrix>, SeesawError> {
    model.check_scenario(f.scenario())?;
    let outcomes = f.scenario().outcomes(party)[setting];
    let partner = party.other();
    let partner_dim = model.dim(partner);
    let psi = model.state_matrix();
    let (left, right) = match party {
        Party::A => (psi.clone(), psi.adjoint()),
        Party::B => (psi.transpose(), psi.conj()),
    };
    let mut out = Vec::with_capacity(outcomes);
    for o in 0..outcomes {
        let mut g = ComplexMatrix::identity(partner_dim).scale(f.marginal(party, setting, o));
        for (s2, povm) in model.povms(partner).iter().enumerate() {
            for (o2, n) in povm.iter().enumerate() {
                let w = match party {
                    Party::A => f.joint(setting, s2, o, o2),
                    Party::B => f.joint(s2, setting, o2, o),
                };
                if w != 0.0 {
                    g.add_scaled(w, n);
                }
            }
        }
        let reduced = (&(&left * &g.transpose()) * &right).hermitian_part();
        out.push(reduced);
    }
    Ok(out)
}

/// `Re tr(M F)`.
fn trace_product(m: &ComplexMatrix, f: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += (m[(i, j)] * f[(j, i)]).re;
        }
    }
    total
}

fn local_objective(povm: &[ComplexMatrix], ops: &[ComplexMatrix]) -> f64 {
    povm.iter()
        .zip(ops)
        .map(|(m, op)| trace_product(m, op))
        .sum()
}

/// Replaces the state by the top eigenvector of the Bell operator.
///
/// When the top eigenvalue is degenerate, the previous state's projection
/// onto the top eigenspace is kept if its norm is at least 1e-6. If the
/// new state would score lower than the old one, the old state is kept.
pub fn update_state(f: &BellFunctional, model: &QuantumModel) -> Result<QuantumModel, SeesawError> {
    model.check_scenario(f.scenario())?;
    let op = bell_operator(f, model.povms(Party::A), model.povms(Party::B))?;
    let eig = eig_hermitian(&op, HERMITIAN_TOL)?;
    let top = eig.values[0];
    let cutoff = top - DEGENERACY_TOL * top.abs().max(1.0);
    let old = model.state();
    let mut projected = vec![Complex64::new(0.0, 0.0); old.len()];
    for k in (0..eig.dim()).take_while(|&k| eig.values[k] >= cutoff) {
        let v = eig.vector(k);
        let c = inner(&v, old);
        for (p, vi) in projected.iter_mut().zip(&v) {
            *p += vi * c;
        }
    }
    let norm = vec_norm(&projected);
    let candidate = if norm >= PROJECTION_MIN_NORM {
        projected.iter().map(|p| p / norm).collect()
    } else {
        eig.vector(0)
    };
    let before = op.expectation(old)?;
    let after = op.expectation(&candidate)?;
    let mut next = model.clone();
    if after >= before {
        next.set_state_unchecked(candidate);
    }
    Ok(next)
}

fn check_outcomes(
    f: &BellFunctional,
    party: Party,
    setting: usize,
    allowed: impl Fn(usize) -> bool,
    expected: &'static str,
) -> Result<(), SeesawError> {
    let outcomes = f.scenario().outcomes(party);
    match outcomes.get(setting) {
        Some(&v) if allowed(v) => Ok(()),
        Some(&v) => Err(SeesawError::WrongOutcomeCount {
            party,
            setting,
            expected,
            found: v,
        }),
        None => Err(SeesawError::ConfigInvalid(format!(
            "party {party} has no setting {setting}"
        ))),
    }
}

/// Exact optimum for a two-outcome setting: `M_0` projects onto the
/// positive eigenspace of `F_0 - F_1`, `M_1 = I - M_0`.
pub fn update_measurement_binary(
    f: &BellFunctional,
    model: &QuantumModel,
    party: Party,
    setting: usize,
) -> Result<QuantumModel, SeesawError> {
    check_outcomes(f, party, setting, |v| v == 2, "exactly 2")?;
    let ops = reduced_operators(f, model, party, setting)?;
    let delta = &ops[0] - &ops[1];
    let m0 = positive_projector(&delta, POSITIVE_TOL)?;
    let m1 = &ComplexMatrix::identity(m0.rows()) - &m0;
    let candidate = vec![m0, m1];
    Ok(accept_if_better(model, party, setting, candidate, &ops))
}

/// Pairwise exchanges for a setting with at least three outcomes.
///
/// For each pair `(a, a')` with `S = M_a + M_a'` and `R = S^{1/2}`, the
/// pair is replaced by `M_a = R P R`, `M_a' = S - M_a` where `P` projects
/// onto the positive eigenspace of `R (F_a - F_a') R`. This maximizes the
/// objective over `0 ⪯ M_a ⪯ S`. An exchange that does not strictly
/// improve the objective leaves the pair untouched.
pub fn update_measurement_multi(
    f: &BellFunctional,
    model: &QuantumModel,
    party: Party,
    setting: usize,
    passes: usize,
) -> Result<QuantumModel, SeesawError> {
    check_outcomes(f, party, setting, |v| v >= 3, "at least 3")?;
    let ops = reduced_operators(f, model, party, setting)?;
    let mut povm: Povm = model.povms(party)[setting].clone();
    let v = povm.len();
    for _ in 0..passes {
        for a in 0..v {
            for a2 in (a + 1)..v {
                exchange(&mut povm, &ops, a, a2)?;
            }
        }
    }
    Ok(accept_if_better(model, party, setting, povm, &ops))
}

fn exchange(
    povm: &mut Povm,
    ops: &[ComplexMatrix],
    a: usize,
    a2: usize,
) -> Result<(), SeesawError> {
    let s = (&povm[a] + &povm[a2]).hermitian_part();
    if s.max_abs() == 0.0 {
        return Ok(());
    }
    let root = psd_pseudo_sqrt(&s, HERMITIAN_TOL)?;
    let r = root.sqrt;
    let delta = &ops[a] - &ops[a2];
    let rdr = (&(&r * &delta) * &r).hermitian_part();
    let p = positive_projector(&rdr, POSITIVE_TOL)?;
    let ma = (&(&r * &p) * &r).hermitian_part();
    let ma2 = &s - &ma;
    let before = trace_product(&povm[a], &ops[a]) + trace_product(&povm[a2], &ops[a2]);
    let after = trace_product(&ma, &ops[a]) + trace_product(&ma2, &ops[a2]);
    if after > before + EXCHANGE_MIN_GAIN * before.abs().max(1.0) {
        povm[a] = ma;
        povm[a2] = ma2;
    }
    Ok(())
}

fn accept_if_better(
    model: &QuantumModel,
    party: Party,
    setting: usize,
    candidate: Povm,
    ops: &[ComplexMatrix],
) -> QuantumModel {
    let current = &model.povms(party)[setting];
    let mut next = model.clone();
    if local_objective(&candidate, ops) >= local_objective(current, ops) {
        next.set_povm_unchecked(party, setting, candidate);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, partial_trace};
    use crate::scenario::{model_value, BellScenario};
    use crate::seesaw::seeded_models;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn chsh() -> BellFunctional {
        let mut f = BellFunctional::zero(BellScenario::uniform(2, 2).unwrap());
        for x in 0..2 {
            for y in 0..2 {
                let sign = if x == 1 && y == 1 { -1.0 } else { 1.0 };
                for a in 0..2 {
                    for b in 0..2 {
                        f.add_joint(x, y, a, b, if a == b { sign } else { -sign });
                    }
                }
            }
        }
        f
    }

    fn projective_qubit(angle: f64) -> Povm {
        let (s, co) = angle.sin_cos();
        let v = [c(co), c(s)];
        let m0 = ComplexMatrix::outer(&v, &v);
        let m1 = &ComplexMatrix::identity(2) - &m0;
        vec![m0, m1]
    }

    fn phi_plus() -> Vec<Complex64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(h), c(0.0), c(0.0), c(h)]
    }

    #[test]
    fn reduced_operators_match_partial_trace() {
        let mut f = chsh();
        f.add_marginal(Party::A, 1, 0, 0.3);
        f.add_marginal(Party::B, 0, 1, -0.7);
        let sc = BellScenario::new(vec![2, 3], vec![3, 2]).unwrap();
        let mut g = BellFunctional::zero(sc.clone());
        for (k, (x, y, a, b)) in sc.joint_indices().enumerate() {
            g.add_joint(x, y, a, b, ((k * 7) % 5) as f64 - 2.0);
        }
        g.add_marginal(Party::A, 1, 2, 0.5);
        g.add_marginal(Party::B, 0, 1, 1.5);
        for (func, da, db) in [(f, 2, 2), (g, 3, 2)] {
            let model = seeded_models(func.scenario(), da, db, 7, 1).remove(0);
            let psi = model.state();
            let rho = ComplexMatrix::outer(psi, psi);
            for party in [Party::A, Party::B] {
                for s in 0..func.scenario().settings(party) {
                    let ops = reduced_operators(&func, &model, party, s).unwrap();
                    let partner = party.other();
                    for (o, op) in ops.iter().enumerate() {
                        let mut g_op = ComplexMatrix::identity(model.dim(partner))
                            .scale(func.marginal(party, s, o));
                        for (s2, povm) in model.povms(partner).iter().enumerate() {
                            for (o2, n) in povm.iter().enumerate() {
                                let w = match party {
                                    Party::A => func.joint(s, s2, o, o2),
                                    Party::B => func.joint(s2, s, o2, o),
                                };
                                g_op.add_scaled(w, n);
                            }
                        }
                        let (lifted, traced) = match party {
                            Party::A => (kron(&ComplexMatrix::identity(da), &g_op), Party::B),
                            Party::B => (kron(&g_op, &ComplexMatrix::identity(db)), Party::A),
                        };
                        let oracle = partial_trace(&(&lifted * &rho), da, db, traced).unwrap();
                        assert!(op.max_abs_diff(&oracle) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn binary_update_examples() {
        let sc = BellScenario::uniform(1, 2).unwrap();
        let model = QuantumModel::new(
            2,
            2,
            phi_plus(),
            vec![projective_qubit(0.4)],
            vec![projective_qubit(0.0)],
        )
        .unwrap();

        // With Bob measuring σ_z on |Φ+>, these weights give F_0 - F_1 = σ_z.
        let mut f = BellFunctional::zero(sc.clone());
        f.add_joint(0, 0, 0, 0, 2.0);
        f.add_joint(0, 0, 0, 1, -2.0);
        let ops = reduced_operators(&f, &model, Party::A, 0).unwrap();
        let sigma_z = ComplexMatrix::diagonal(&[1.0, -1.0]);
        assert!((&ops[0] - &ops[1]).max_abs_diff(&sigma_z) < 1e-15);
        let m = update_measurement_binary(&f, &model, Party::A, 0).unwrap();
        let new = &m.povms(Party::A)[0];
        assert!(new[0].max_abs_diff(&ComplexMatrix::diagonal(&[1.0, 0.0])) < 1e-15);

        let zero = BellFunctional::zero(sc);
        let m = update_measurement_binary(&zero, &model, Party::A, 0).unwrap();
        let new = &m.povms(Party::A)[0];
        assert_eq!(new[0].max_abs(), 0.0);
        assert_eq!(new[1].max_abs_diff(&ComplexMatrix::identity(2)), 0.0);
    }

    #[test]
    fn binary_update_rejects_three_outcomes() {
        let f = BellFunctional::zero(BellScenario::uniform(1, 3).unwrap());
        let model = seeded_models(f.scenario(), 3, 3, 1, 1).remove(0);
        assert!(matches!(
            update_measurement_binary(&f, &model, Party::A, 0),
            Err(SeesawError::WrongOutcomeCount { .. })
        ));
        let g = chsh();
        let model = seeded_models(g.scenario(), 2, 2, 1, 1).remove(0);
        assert!(matches!(
            update_measurement_multi(&g, &model, Party::B, 1, 3),
            Err(SeesawError::WrongOutcomeCount { .. })
        ));
    }

    #[test]
    fn chsh_one_round_reaches_tsirelson() {
        let f = chsh();
        let tsirelson = 2.0 * std::f64::consts::SQRT_2;
        let model = QuantumModel::new(
            2,
            2,
            phi_plus(),
            vec![projective_qubit(0.0), projective_qubit(0.3)],
            vec![projective_qubit(1.1), projective_qubit(-0.2)],
        )
        .unwrap();
        assert!(model_value(&f, &model).unwrap() < 2.0);
        let mut m = model;
        for party in [Party::A, Party::B] {
            for s in 0..2 {
                m = update_measurement_binary(&f, &m, party, s).unwrap();
            }
        }
        let v = model_value(&f, &m).unwrap();
        assert!((v - tsirelson).abs() < 1e-9, "{v}");
    }

    #[test]
    fn chsh_canonical_measurements_give_maximally_entangled_state() {
        let f = chsh();
        let pi = std::f64::consts::PI;
        let start = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        let model = QuantumModel::new(
            2,
            2,
            start,
            vec![projective_qubit(0.0), projective_qubit(pi / 4.0)],
            vec![projective_qubit(pi / 8.0), projective_qubit(-pi / 8.0)],
        )
        .unwrap();
        let m = update_state(&f, &model).unwrap();
        let v = model_value(&f, &m).unwrap();
        assert!((v - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        let overlap = inner(&phi_plus(), m.state()).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_operator_keeps_state() {
        let mut f = BellFunctional::zero(BellScenario::uniform(2, 2).unwrap());
        f.set_constant(0.7);
        let model = seeded_models(f.scenario(), 2, 2, 3, 1).remove(0);
        let m = update_state(&f, &model).unwrap();
        for (a, b) in m.state().iter().zip(model.state()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn multi_update_degenerate_is_unchanged() {
        let f = BellFunctional::zero(BellScenario::uniform(1, 3).unwrap());
        let third = ComplexMatrix::identity(3).scale(1.0 / 3.0);
        let povm = vec![third.clone(), third.clone(), third.clone()];
        let state = seeded_models(f.scenario(), 3, 3, 2, 1)
            .remove(0)
            .state()
            .to_vec();
        let model = QuantumModel::new(3, 3, state, vec![povm.clone()], vec![povm.clone()]).unwrap();
        let m = update_measurement_multi(&f, &model, Party::A, 0, 3).unwrap();
        for (a, b) in m.povms(Party::A)[0].iter().zip(&povm) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn multi_update_with_empty_outcome_reduces_to_binary() {
        // Outcome 2 carries no weight and starts at zero; exchanges between 0
        // and 1 see S = I and must match the binary rule.
        let sc3 = BellScenario::new(vec![3], vec![2]).unwrap();
        let sc2 = BellScenario::new(vec![2], vec![2]).unwrap();
        let mut f3 = BellFunctional::zero(sc3);
        let mut f2 = BellFunctional::zero(sc2);
        let weights = [[0.9, -0.4], [-1.3, 0.6]];
        for a in 0..2 {
            for b in 0..2 {
                f3.add_joint(0, 0, a, b, weights[a][b]);
                f2.add_joint(0, 0, a, b, weights[a][b]);
            }
        }
        f3.add_joint(0, 0, 2, 0, -5.0);
        f3.add_joint(0, 0, 2, 1, -5.0);
        let base = seeded_models(f2.scenario(), 2, 2, 11, 1).remove(0);
        let alice2 = base.povms(Party::A)[0].clone();
        let alice3 = vec![
            alice2[0].clone(),
            alice2[1].clone(),
            ComplexMatrix::zeros(2, 2),
        ];
        let m3 = QuantumModel::new(
            2,
            2,
            base.state().to_vec(),
            vec![alice3],
            base.povms(Party::B).to_vec(),
        )
        .unwrap();
        let r2 = update_measurement_binary(&f2, &base, Party::A, 0).unwrap();
        let r3 = update_measurement_multi(&f3, &m3, Party::A, 0, 1).unwrap();
        let got = &r3.povms(Party::A)[0];
        let want = &r2.povms(Party::A)[0];
        assert!(got[0].max_abs_diff(&want[0]) < 1e-10);
        assert!(got[1].max_abs_diff(&want[1]) < 1e-10);
        assert!(got[2].max_abs() < 1e-10);
    }
}
