use super::{BellFunctional, BellScenario, ProbabilityTable, ScenarioError};
use crate::linalg::{eig_hermitian, kron, vec_norm, Complex64, ComplexMatrix, Party, ZERO};

const STATE_NORM_TOL: f64 = 1e-10;
const POVM_TOL: f64 = 1e-9;

/// Measurement as a list of PSD elements summing to the identity.
pub type Povm = Vec<ComplexMatrix>;

/// Pure state on `C^dA ⊗ C^dB` with one POVM per setting on each side.
///
/// Amplitudes are indexed `i * dB + j` for `|i>_A |j>_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    dim_a: usize,
    dim_b: usize,
    state: Vec<Complex64>,
    povms_a: Vec<Povm>,
    povms_b: Vec<Povm>,
}

impl QuantumModel {
    pub fn new(
        dim_a: usize,
        dim_b: usize,
        state: Vec<Complex64>,
        povms_a: Vec<Povm>,
        povms_b: Vec<Povm>,
    ) -> Result<Self, ScenarioError> {
        if dim_a == 0 || dim_b == 0 {
            return Err(ScenarioError::InvalidModel(
                "local dimensions must be positive".into(),
            ));
        }
        let model = Self {
            dim_a,
            dim_b,
            state,
            povms_a,
            povms_b,
        };
        model.check_state(&model.state)?;
        for (party, povms) in [(Party::A, &model.povms_a), (Party::B, &model.povms_b)] {
            for (s, povm) in povms.iter().enumerate() {
                check_povm(povm, model.dim(party)).map_err(|e| {
                    ScenarioError::InvalidModel(format!("party {party}, setting {s}: {e}"))
                })?;
            }
        }
        Ok(model)
    }

    fn check_state(&self, state: &[Complex64]) -> Result<(), ScenarioError> {
        if state.len() != self.dim_a * self.dim_b {
            return Err(ScenarioError::InvalidModel(format!(
                "state has {} amplitudes, expected {}",
                state.len(),
                self.dim_a * self.dim_b
            )));
        }
        let norm = vec_norm(state);
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(ScenarioError::InvalidModel(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(())
    }

    /// Scenario implied by the number of elements of each POVM.
    pub fn scenario(&self) -> Result<BellScenario, ScenarioError> {
        let counts = |povms: &[Povm]| povms.iter().map(Vec::len).collect();
        BellScenario::new(counts(&self.povms_a), counts(&self.povms_b))
    }

    /// Checks settings and outcome counts against `scenario`.
    pub fn check_scenario(&self, scenario: &BellScenario) -> Result<(), ScenarioError> {
        for party in [Party::A, Party::B] {
            let povms = self.povms(party);
            let outcomes = scenario.outcomes(party);
            if povms.len() != outcomes.len() {
                return Err(ScenarioError::ScenarioMismatch(format!(
                    "party {party} has {} measurements, scenario {} needs {}",
                    povms.len(),
                    scenario.describe(),
                    outcomes.len()
                )));
            }
            for (s, (povm, &v)) in povms.iter().zip(outcomes).enumerate() {
                if povm.len() != v {
                    return Err(ScenarioError::ScenarioMismatch(format!(
                        "party {party}, setting {s}: {} elements, scenario needs {v}",
                        povm.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self, party: Party) -> usize {
        match party {
            Party::A => self.dim_a,
            Party::B => self.dim_b,
        }
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    pub fn povms(&self, party: Party) -> &[Povm] {
        match party {
            Party::A => &self.povms_a,
            Party::B => &self.povms_b,
        }
    }

    /// Replaces the state; it must be a unit vector of the right length.
    pub fn with_state(mut self, state: Vec<Complex64>) -> Result<Self, ScenarioError> {
        self.check_state(&state)?;
        self.state = state;
        Ok(self)
    }

    pub(crate) fn set_state_unchecked(&mut self, state: Vec<Complex64>) {
        self.state = state;
    }

    pub(crate) fn set_povm_unchecked(&mut self, party: Party, setting: usize, povm: Povm) {
        match party {
            Party::A => self.povms_a[setting] = povm,
            Party::B => self.povms_b[setting] = povm,
        }
    }

    /// Amplitudes as the `dA x dB` matrix `Ψ` with `ψ = vec(Ψ)`.
    pub(crate) fn state_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim_a, self.dim_b, self.state.clone())
            .expect("state length checked")
    }

    /// Worst violation of the POVM constraints (Hermiticity, positivity,
    /// completeness) over all measurements.
    pub fn povm_feasibility_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for party in [Party::A, Party::B] {
            for povm in self.povms(party) {
                worst = worst.max(povm_error(povm, self.dim(party)));
            }
        }
        worst
    }

    /// Embeds into larger local dimensions: amplitudes are zero-padded and
    /// each POVM's first element absorbs the new basis vectors.
    pub fn embed(&self, dim_a: usize, dim_b: usize) -> Result<Self, ScenarioError> {
        if dim_a < self.dim_a || dim_b < self.dim_b {
            return Err(ScenarioError::DimensionMismatch(format!(
                "cannot embed {}x{} model into {dim_a}x{dim_b}",
                self.dim_a, self.dim_b
            )));
        }
        let mut state = vec![ZERO; dim_a * dim_b];
        for i in 0..self.dim_a {
            for j in 0..self.dim_b {
                state[i * dim_b + j] = self.state[i * self.dim_b + j];
            }
        }
        let pad = |povm: &Povm, old: usize, new: usize| -> Povm {
            povm.iter()
                .enumerate()
                .map(|(k, m)| {
                    let mut big = ComplexMatrix::zeros(new, new);
                    for i in 0..old {
                        for j in 0..old {
                            big[(i, j)] = m[(i, j)];
                        }
                    }
                    if k == 0 {
                        for i in old..new {
                            big[(i, i)] = Complex64::new(1.0, 0.0);
                        }
                    }
                    big
                })
                .collect()
        };
        Ok(Self {
            dim_a,
            dim_b,
            state,
            povms_a: self
                .povms_a
                .iter()
                .map(|p| pad(p, self.dim_a, dim_a))
                .collect(),
            povms_b: self
                .povms_b
                .iter()
                .map(|p| pad(p, self.dim_b, dim_b))
                .collect(),
        })
    }
}

fn povm_error(povm: &Povm, dim: usize) -> f64 {
    let mut total = ComplexMatrix::zeros(dim, dim);
    let mut worst = 0.0f64;
    for m in povm {
        if m.rows() != dim || m.cols() != dim {
            return f64::INFINITY;
        }
        worst = worst.max(m.hermitian_deviation());
        if let Ok(e) = eig_hermitian(&m.hermitian_part(), f64::INFINITY) {
            let min = e.values.last().copied().unwrap_or(0.0);
            worst = worst.max(-min);
        } else {
            return f64::INFINITY;
        }
        total.add_scaled(1.0, m);
    }
    worst.max(total.max_abs_diff(&ComplexMatrix::identity(dim)))
}

/// Validates one POVM on `C^dim` at tolerance 1e-9.
pub(crate) fn check_povm(povm: &Povm, dim: usize) -> Result<(), String> {
    if povm.is_empty() {
        return Err("measurement has no elements".into());
    }
    if let Some(m) = povm.iter().find(|m| m.rows() != dim || m.cols() != dim) {
        return Err(format!(
            "element is {}x{}, expected {dim}x{dim}",
            m.rows(),
            m.cols()
        ));
    }
    let err = povm_error(povm, dim);
    if err > POVM_TOL || err.is_nan() {
        return Err(format!("POVM constraints violated by {err:.3e}"));
    }
    Ok(())
}

fn check_povm_counts(
    scenario: &BellScenario,
    party: Party,
    povms: &[Povm],
) -> Result<usize, ScenarioError> {
    let outcomes = scenario.outcomes(party);
    if povms.len() != outcomes.len() {
        return Err(ScenarioError::DimensionMismatch(format!(
            "party {party}: {} measurements for {} settings",
            povms.len(),
            outcomes.len()
        )));
    }
    let dim = povms[0]
        .first()
        .map(|m| m.rows())
        .ok_or_else(|| ScenarioError::DimensionMismatch(format!("party {party}: empty POVM")))?;
    for (s, (povm, &v)) in povms.iter().zip(outcomes).enumerate() {
        if povm.len() != v {
            return Err(ScenarioError::DimensionMismatch(format!(
                "party {party}, setting {s}: {} elements for {v} outcomes",
                povm.len()
            )));
        }
        if povm.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(ScenarioError::DimensionMismatch(format!(
                "party {party}, setting {s}: elements are not all {dim}x{dim}"
            )));
        }
    }
    Ok(dim)
}

/// `Σ w M^x_a⊗M^y_b + Σ wA M^x_a⊗I + Σ wB I⊗M^y_b + w0 I`.
pub fn bell_operator(
    f: &BellFunctional,
    povms_a: &[Povm],
    povms_b: &[Povm],
) -> Result<ComplexMatrix, ScenarioError> {
    let s = f.scenario();
    let dim_a = check_povm_counts(s, Party::A, povms_a)?;
    let dim_b = check_povm_counts(s, Party::B, povms_b)?;
    let id_a = ComplexMatrix::identity(dim_a);
    let id_b = ComplexMatrix::identity(dim_b);

    let mut op = ComplexMatrix::identity(dim_a * dim_b).scale(f.constant());
    for (x, povm) in povms_a.iter().enumerate() {
        for (a, m) in povm.iter().enumerate() {
            // Bob-side operator multiplying M^x_a.
            let mut partner = id_b.scale(f.marginal(Party::A, x, a));
            for (y, bob) in povms_b.iter().enumerate() {
                for (b, n) in bob.iter().enumerate() {
                    partner.add_scaled(f.joint(x, y, a, b), n);
                }
            }
            op.add_scaled(1.0, &kron(m, &partner));
        }
    }
    let mut bob_only = ComplexMatrix::zeros(dim_b, dim_b);
    for (y, bob) in povms_b.iter().enumerate() {
        for (b, n) in bob.iter().enumerate() {
            bob_only.add_scaled(f.marginal(Party::B, y, b), n);
        }
    }
    op.add_scaled(1.0, &kron(&id_a, &bob_only));
    Ok(op)
}

/// `<ψ|B|ψ>` for the model's state and measurements.
pub fn model_value(f: &BellFunctional, m: &QuantumModel) -> Result<f64, ScenarioError> {
    m.check_scenario(f.scenario())?;
    let op = bell_operator(f, &m.povms_a, &m.povms_b)?;
    Ok(op.expectation(&m.state)?)
}

/// Probabilities `<ψ|M^x_a ⊗ M^y_b|ψ>` generated by a model.
pub fn table_of(m: &QuantumModel) -> Result<ProbabilityTable, ScenarioError> {
    let scenario = m.scenario()?;
    let psi = m.state_matrix();
    let psi_h = psi.adjoint();
    let mut p = vec![0.0; scenario.joint_len()];
    for (x, povm) in m.povms_a.iter().enumerate() {
        for (a, ma) in povm.iter().enumerate() {
            // Ψ^H M Ψ, so that P = Σ_jk (Ψ^H M Ψ)_jk (N)_jk
            let reduced = &(&psi_h * ma) * &psi;
            for (y, bob) in m.povms_b.iter().enumerate() {
                for (b, nb) in bob.iter().enumerate() {
                    let v: f64 = reduced
                        .as_slice()
                        .iter()
                        .zip(nb.as_slice())
                        .map(|(r, n)| (r * n).re)
                        .sum();
                    p[scenario.joint_index(x, y, a, b)] = v.max(0.0);
                }
            }
        }
    }
    ProbabilityTable::new(scenario, p)
}
