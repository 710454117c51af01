//! The classical d-outcome model: states are probability vectors, pure
//! states are the simplex vertices and the canonical readout `m_i(p) = p_i`
//! is the only fine-grained measurement that matters.

use crate::error::{Error, Result};
use crate::gpt::{Effect, Ensemble, Measurement, Model, State};

/// The d-outcome readout `m_i(p) = p_i`.
pub fn canonical_measurement(d: usize) -> Result<Measurement> {
    if d < 2 {
        return Err(Error::BadArgument(format!(
            "classical readout needs d >= 2, got {d}"
        )));
    }
    let effects = (0..d)
        .map(|i| {
            let mut g = vec![0.0; d];
            g[i] = 1.0;
            Effect::new(0.0, g)
        })
        .collect();
    Ok(Measurement::with_label(effects, format!("canonical({d})")))
}

/// The unique pure decomposition of `p`: vertices weighted by `p_i`.
/// Zero-weight vertices are dropped.
pub fn vertex_decomposition(s: &State) -> Result<Ensemble> {
    let d = s.dim();
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (i, &p) in s.coords().iter().enumerate() {
        if p > 1e-15 {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            weights.push(p);
            states.push(State::new(v));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ensemble::new(&Model::Classical { d }, weights, states, true)
}
