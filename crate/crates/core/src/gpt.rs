//! Model-independent state/effect/measurement layer.
//!
//! A model is a convex state space together with the affine effects on it.
//! Three concrete models are supported: the classical `d`-outcome simplex,
//! the squared model (state space `[0,1]^2`, a gbit) and the qubit in Bloch
//! coordinates. States are plain coordinate vectors; effects are affine
//! functionals `offset + gradient . coords`; measurements are tuples of
//! effects summing to the unit effect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric membership tolerance. Fixed globally: membership is a property
/// of the state space, not of any optimization budget.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance for purity predicates and measurement closure checks.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Weights below this are dropped when decoding decompositions.
pub const WEIGHT_DROP_TOL: f64 = 1e-9;

/// A general probabilistic model instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Classical theory on `d` outcomes; states are probability vectors.
    Classical { d: usize },
    /// The squared model: states are `(c1, c2)` in the unit square.
    Squared,
    /// A qubit in Bloch coordinates: states are `r` with `|r| <= 1`.
    Qubit,
}

impl Model {
    pub fn from_name(name: &str, dim: usize) -> Result<Model> {
        match name {
            "classical" => {
                if dim < 2 {
                    return Err(Error::BadArgument(format!(
                        "classical model needs d >= 2 coordinates, got {dim}"
                    )));
                }
                Ok(Model::Classical { d: dim })
            }
            "squared" => {
                if dim != 2 {
                    return Err(Error::BadArgument(format!(
                        "squared model states have 2 coordinates, got {dim}"
                    )));
                }
                Ok(Model::Squared)
            }
            "qubit" => {
                if dim != 3 {
                    return Err(Error::BadArgument(format!(
                        "qubit states are Bloch 3-vectors, got {dim} coordinates"
                    )));
                }
                Ok(Model::Qubit)
            }
            other => Err(Error::BadArgument(format!("unknown model '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Classical { .. } => "classical",
            Model::Squared => "squared",
            Model::Qubit => "qubit",
        }
    }

    /// Dimension of the coordinate representation.
    pub fn dim(&self) -> usize {
        match self {
            Model::Classical { d } => *d,
            Model::Squared => 2,
            Model::Qubit => 3,
        }
    }

    /// Membership predicate of the state space, tolerance [`MEMBERSHIP_TOL`].
    pub fn contains(&self, coords: &[f64]) -> bool {
        if coords.len() != self.dim() {
            return false;
        }
        match self {
            Model::Classical { .. } => {
                coords.iter().all(|&p| p >= -MEMBERSHIP_TOL)
                    && (coords.iter().sum::<f64>() - 1.0).abs() <= MEMBERSHIP_TOL * 10.0
            }
            Model::Squared => coords
                .iter()
                .all(|&c| (-MEMBERSHIP_TOL..=1.0 + MEMBERSHIP_TOL).contains(&c)),
            Model::Qubit => norm3(coords) <= 1.0 + MEMBERSHIP_TOL,
        }
    }

    /// Purity predicate: extreme points of the state space.
    pub fn is_pure(&self, s: &State) -> bool {
        let c = s.coords();
        if c.len() != self.dim() {
            return false;
        }
        match self {
            Model::Classical { .. } => c.iter().any(|&p| p >= 1.0 - GEOMETRY_TOL),
            Model::Squared => c
                .iter()
                .all(|&x| x.abs() <= GEOMETRY_TOL || (x - 1.0).abs() <= GEOMETRY_TOL),
            Model::Qubit => (norm3(c) - 1.0).abs() <= GEOMETRY_TOL,
        }
    }

    /// The pure states spanning the space, for models with finitely many.
    /// Used to validate effects and measurement closure; the qubit sphere is
    /// handled analytically instead.
    pub fn pure_generators(&self) -> Option<Vec<State>> {
        match self {
            Model::Classical { d } => Some(
                (0..*d)
                    .map(|i| {
                        let mut v = vec![0.0; *d];
                        v[i] = 1.0;
                        State::new(v)
                    })
                    .collect(),
            ),
            Model::Squared => Some(
                [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
                    .iter()
                    .map(|&(a, b)| State::new(vec![a, b]))
                    .collect(),
            ),
            Model::Qubit => None,
        }
    }
}

fn norm3(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A state: a coordinate vector in the owning model's representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    coords: Vec<f64>,
}

impl State {
    pub fn new(coords: Vec<f64>) -> State {
        State { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// `true` iff `s` lies in the model's state space within [`MEMBERSHIP_TOL`].
/// A coordinate-count mismatch is an input error, not `false`.
pub fn validate_state(model: &Model, s: &State) -> Result<bool> {
    if s.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: s.dim(),
        });
    }
    Ok(model.contains(s.coords()))
}

fn require_valid_state(model: &Model, s: &State) -> Result<()> {
    if !validate_state(model, s)? {
        return Err(Error::InvalidState {
            model: model.name(),
            reason: format!("{:?} is outside the state space", s.coords()),
        });
    }
    Ok(())
}

/// An affine functional `s -> offset + gradient . coords(s)`, valued in [0,1]
/// on the whole state space. For the qubit the pair encodes the operator
/// `offset*I + gradient . sigma` through the Bloch inner product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub offset: f64,
    pub gradient: Vec<f64>,
}

impl Effect {
    pub fn new(offset: f64, gradient: Vec<f64>) -> Effect {
        Effect { offset, gradient }
    }

    /// The unit effect: 1 everywhere.
    pub fn unit(dim: usize) -> Effect {
        Effect::new(1.0, vec![0.0; dim])
    }

    pub fn raw_value(&self, s: &State) -> f64 {
        self.offset
            + self
                .gradient
                .iter()
                .zip(s.coords())
                .map(|(g, c)| g * c)
                .sum::<f64>()
    }

    /// Range of the effect over the model's pure states.
    fn range_on_pure(&self, model: &Model) -> Result<(f64, f64)> {
        if self.gradient.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: self.gradient.len(),
            });
        }
        match model {
            Model::Qubit => {
                let g = norm3(&self.gradient);
                Ok((self.offset - g, self.offset + g))
            }
            _ => {
                let gens = model.pure_generators().expect("finite pure set");
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in &gens {
                    let v = self.raw_value(p);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok((lo, hi))
            }
        }
    }

    /// Checks that the effect is valued in [0,1] at every pure state; by
    /// affinity this extends to the whole state space.
    pub fn validate(&self, model: &Model) -> Result<()> {
        let (lo, hi) = self.range_on_pure(model)?;
        if lo < -GEOMETRY_TOL || hi > 1.0 + GEOMETRY_TOL {
            return Err(Error::InvalidEffect(format!(
                "value range [{lo:.3e}, {hi:.3e}] leaves [0,1] on pure states"
            )));
        }
        Ok(())
    }
}

/// Born-rule style evaluation: the probability assigned by effect `e` at
/// state `s`. Raw values within 1e-9 of [0,1] are clamped; anything farther
/// out indicates an invalid effect and is a contract error.
pub fn effect_value(model: &Model, e: &Effect, s: &State) -> Result<f64> {
    require_valid_state(model, s)?;
    e.validate(model)?;
    let raw = e.raw_value(s);
    if !(-GEOMETRY_TOL..=1.0 + GEOMETRY_TOL).contains(&raw) {
        return Err(Error::InvalidEffect(format!(
            "effect evaluated to {raw} at a valid state"
        )));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// An ordered tuple of effects summing to the unit effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub effects: Vec<Effect>,
    pub label: Option<String>,
}

impl Measurement {
    pub fn new(effects: Vec<Effect>) -> Measurement {
        Measurement {
            effects,
            label: None,
        }
    }

    pub fn with_label(effects: Vec<Effect>, label: impl Into<String>) -> Measurement {
        Measurement {
            effects,
            label: Some(label.into()),
        }
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    /// Validates every effect and the closure `sum_y e_y = unit` on pure
    /// states (analytically for the qubit).
    pub fn validate(&self, model: &Model) -> Result<()> {
        if self.effects.is_empty() {
            return Err(Error::InvalidMeasurement("no outcomes".into()));
        }
        for e in &self.effects {
            e.validate(model)?;
        }
        let offset_sum: f64 = self.effects.iter().map(|e| e.offset).sum();
        let mut grad_sum = vec![0.0; model.dim()];
        for e in &self.effects {
            for (acc, g) in grad_sum.iter_mut().zip(&e.gradient) {
                *acc += g;
            }
        }
        let closed = match model {
            Model::Qubit => {
                (offset_sum - 1.0).abs() <= GEOMETRY_TOL && norm3(&grad_sum) <= GEOMETRY_TOL
            }
            _ => {
                let gens = model.pure_generators().expect("finite pure set");
                gens.iter().all(|p| {
                    let total: f64 = self.effects.iter().map(|e| e.raw_value(p)).sum();
                    (total - 1.0).abs() <= GEOMETRY_TOL
                })
            }
        };
        if !closed {
            return Err(Error::InvalidMeasurement(format!(
                "effects sum to offset {offset_sum} (gradient residual {grad_sum:?}), not the unit effect"
            )));
        }
        Ok(())
    }
}

/// Outcome distribution of measurement `m` at state `s`.
pub fn measurement_probs(model: &Model, m: &Measurement, s: &State) -> Result<Vec<f64>> {
    m.validate(model)?;
    require_valid_state(model, s)?;
    probs_of_validated(m, s)
}

/// Probability evaluation for a measurement and state that have already
/// passed validation; hot paths call this after validating once.
pub(crate) fn probs_of_validated(m: &Measurement, s: &State) -> Result<Vec<f64>> {
    m.effects
        .iter()
        .map(|e| {
            let raw = e.raw_value(s);
            if !(-GEOMETRY_TOL..=1.0 + GEOMETRY_TOL).contains(&raw) {
                return Err(Error::InvalidEffect(format!(
                    "effect evaluated to {raw} at a valid state"
                )));
            }
            Ok(raw.clamp(0.0, 1.0))
        })
        .collect()
}

/// A weighted list of states. `pure_only` marks membership in the set of
/// pure-state decompositions P(s) rather than the general D(s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<State>,
    pure_only: bool,
}

impl Ensemble {
    pub fn new(
        model: &Model,
        weights: Vec<f64>,
        states: Vec<State>,
        pure_only: bool,
    ) -> Result<Ensemble> {
        if weights.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} weights but {} states",
                weights.len(),
                states.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidEnsemble("empty ensemble".into()));
        }
        if weights.iter().any(|&p| p < -MEMBERSHIP_TOL) {
            return Err(Error::InvalidEnsemble("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        for s in &states {
            require_valid_state(model, s)?;
        }
        if pure_only {
            if let Some(bad) = states.iter().find(|s| !model.is_pure(s)) {
                return Err(Error::InvalidEnsemble(format!(
                    "pure_only ensemble contains mixed state {:?}",
                    bad.coords()
                )));
            }
        }
        let weights = weights.iter().map(|&p| p.max(0.0)).collect();
        Ok(Ensemble {
            weights,
            states,
            pure_only,
        })
    }

    /// The deterministic preparation of `s`.
    pub fn trivial(s: State) -> Ensemble {
        Ensemble {
            weights: vec![1.0],
            states: vec![s],
            pure_only: false,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn pure_only(&self) -> bool {
        self.pure_only
    }

    pub fn members(&self) -> impl Iterator<Item = (f64, &State)> {
        self.weights.iter().copied().zip(self.states.iter())
    }
}

/// Barycenter of the ensemble: the prepared mixed state.
pub fn mix(model: &Model, ens: &Ensemble) -> Result<State> {
    let mut coords = vec![0.0; model.dim()];
    for (p, s) in ens.members() {
        for (acc, c) in coords.iter_mut().zip(s.coords()) {
            *acc += p * c;
        }
    }
    let out = State::new(coords);
    require_valid_state(model, &out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validate_state_examples() {
        let sq = Model::Squared;
        assert!(validate_state(&sq, &State::new(vec![0.3, 0.7])).unwrap());
        assert!(!validate_state(&sq, &State::new(vec![1.2, 0.5])).unwrap());
        let qb = Model::Qubit;
        assert!(validate_state(&qb, &State::new(vec![0.6, 0.0, 0.8])).unwrap());
        assert!(!validate_state(&qb, &State::new(vec![0.9, 0.0, 0.9])).unwrap());
    }

    #[test]
    fn validate_state_dimension_mismatch_is_an_error() {
        let sq = Model::Squared;
        assert!(validate_state(&sq, &State::new(vec![0.1, 0.2, 0.3])).is_err());
    }

    #[test]
    fn effect_value_examples() {
        let sq = Model::Squared;
        // First fine-grained outcome at alpha = 0.5: value alpha*c1.
        let e = Effect::new(0.0, vec![0.5, 0.0]);
        let v = effect_value(&sq, &e, &State::new(vec![0.8, 0.1])).unwrap();
        assert!((v - 0.4).abs() < 1e-12);

        let unit = Effect::unit(2);
        let v = effect_value(&sq, &unit, &State::new(vec![0.3, 0.9])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let qb = Model::Qubit;
        let proj = Effect::new(0.5, vec![0.0, 0.0, 0.5]);
        let v = effect_value(&qb, &proj, &State::new(vec![0.0, 0.0, 1.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_effect_is_a_contract_error() {
        let sq = Model::Squared;
        let e = Effect::new(0.0, vec![2.0, 0.0]); // value 2 at corner (1, *)
        assert!(effect_value(&sq, &e, &State::new(vec![0.5, 0.5])).is_err());
    }

    #[test]
    fn measurement_probs_examples() {
        let sq = Model::Squared;
        let m = models::squared::fg_measurement(0.5).unwrap();
        let p = measurement_probs(&sq, &m, &State::new(vec![0.5, 0.5])).unwrap();
        for &pi in &p {
            assert!((pi - 0.25).abs() < 1e-12);
        }

        let m1 = models::squared::fg_measurement(1.0).unwrap();
        let p = measurement_probs(&sq, &m1, &State::new(vec![0.3, 0.9])).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12);
        assert!((p[1] - 0.7).abs() < 1e-12);
        assert!(p[2].abs() < 1e-12 && p[3].abs() < 1e-12);

        let cl = Model::Classical { d: 2 };
        let can = models::classical::canonical_measurement(2).unwrap();
        let p = measurement_probs(&cl, &can, &State::new(vec![0.2, 0.8])).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12 && (p[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn mix_examples() {
        let sq = Model::Squared;
        let s = State::new(vec![0.4, 0.9]);
        let m = mix(&sq, &Ensemble::trivial(s.clone())).unwrap();
        assert_eq!(m.coords(), s.coords());

        let ens = Ensemble::new(
            &sq,
            vec![0.5, 0.5],
            vec![State::new(vec![1.0, 1.0]), State::new(vec![0.0, 0.0])],
            true,
        )
        .unwrap();
        let m = mix(&sq, &ens).unwrap();
        assert!((m.coords()[0] - 0.5).abs() < 1e-12);
        assert!((m.coords()[1] - 0.5).abs() < 1e-12);

        // Edge decomposition s = c1 (1, c2) + (1 - c1) (0, c2).
        let (c1, c2) = (0.3, 0.8);
        let ens = Ensemble::new(
            &sq,
            vec![c1, 1.0 - c1],
            vec![State::new(vec![1.0, c2]), State::new(vec![0.0, c2])],
            false,
        )
        .unwrap();
        let m = mix(&sq, &ens).unwrap();
        assert!((m.coords()[0] - c1).abs() < 1e-12);
        assert!((m.coords()[1] - c2).abs() < 1e-12);
    }

    #[test]
    fn pure_only_ensemble_rejects_mixed_members() {
        let sq = Model::Squared;
        let res = Ensemble::new(
            &sq,
            vec![0.5, 0.5],
            vec![State::new(vec![1.0, 1.0]), State::new(vec![0.5, 0.0])],
            true,
        );
        assert!(res.is_err());
    }

    fn random_state(model: &Model, rng: &mut impl Rng) -> State {
        match model {
            Model::Classical { d } => {
                let mut v: Vec<f64> = (0..*d).map(|_| -(rng.gen::<f64>()).ln()).collect();
                let t: f64 = v.iter().sum();
                v.iter_mut().for_each(|x| *x /= t);
                State::new(v)
            }
            Model::Squared => State::new(vec![rng.gen(), rng.gen()]),
            Model::Qubit => loop {
                let v: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                if norm3(&v) <= 1.0 {
                    return State::new(v);
                }
            },
        }
    }

    #[test]
    fn fine_grained_probs_sum_to_one_at_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut cases: Vec<(Model, Measurement)> = Vec::new();
        for i in 0..=20 {
            let alpha = i as f64 / 20.0;
            cases.push((
                Model::Squared,
                models::squared::fg_measurement(alpha).unwrap(),
            ));
        }
        for d in 2..=4 {
            cases.push((
                Model::Classical { d },
                models::classical::canonical_measurement(d).unwrap(),
            ));
        }
        for n in 2..=4 {
            for _ in 0..8 {
                let chart = models::FgChart::QubitRankOne { n };
                let b = chart.free_bounds();
                let x: Vec<f64> = b
                    .lower()
                    .iter()
                    .zip(b.upper())
                    .map(|(&lo, &hi)| rng.gen_range(lo..=hi))
                    .collect();
                if let Some(param) = chart.decode(&x) {
                    cases.push((Model::Qubit, param.measurement().unwrap()));
                }
            }
        }
        assert!(cases.len() > 30);
        let per_case = 1000 / cases.len() + 1;
        for (model, m) in &cases {
            for _ in 0..per_case {
                let s = random_state(model, &mut rng);
                let p = measurement_probs(model, m, &s).unwrap();
                let total: f64 = p.iter().sum();
                assert!(
                    (total - 1.0).abs() <= 1e-9,
                    "{} probs sum to {total}",
                    model.name()
                );
            }
        }
    }

    proptest! {
        #[test]
        fn effect_is_affine(c1 in 0.0..1.0f64, c2 in 0.0..1.0f64,
                            d1 in 0.0..1.0f64, d2 in 0.0..1.0f64,
                            lam in 0.0..1.0f64,
                            off in 0.0..0.5f64, g1 in -0.25..0.25f64, g2 in -0.25..0.25f64) {
            let e = Effect::new(off, vec![g1, g2]);
            let s = State::new(vec![c1, c2]);
            let t = State::new(vec![d1, d2]);
            let mixed = State::new(vec![
                lam * c1 + (1.0 - lam) * d1,
                lam * c2 + (1.0 - lam) * d2,
            ]);
            let lhs = e.raw_value(&mixed);
            let rhs = lam * e.raw_value(&s) + (1.0 - lam) * e.raw_value(&t);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn mix_stays_in_state_space(ws in proptest::collection::vec(0.01..1.0f64, 2..5),
                                    seed in 0u64..1000) {
            let sq = Model::Squared;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total: f64 = ws.iter().sum();
            let weights: Vec<f64> = ws.iter().map(|w| w / total).collect();
            let states: Vec<State> = weights.iter().map(|_| random_state(&sq, &mut rng)).collect();
            let ens = Ensemble::new(&sq, weights, states, false).unwrap();
            let m = mix(&sq, &ens).unwrap();
            prop_assert!(validate_state(&sq, &m).unwrap());
        }
    }
}
