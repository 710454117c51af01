//! The squared model (gbit): state space [0,1]^2 with four pure corners.
//!
//! The fine-grained measurements form a one-parameter family
//! `(alpha c1, alpha (1-c1), (1-alpha) c2, (1-alpha) (1-c2))`, and the main
//! entropies have closed forms: S1 = min[h(c1), h(c2)],
//! S2 = max[h(c1), h(c2)] and the induced S2' = S3' = h(c1) + h(c2).

use crate::error::{Error, Result};
use crate::gpt::{Effect, Ensemble, Measurement, Model, State};
use crate::info::{entropy_of, h};

fn unpack(s: &State) -> (f64, f64) {
    let c = s.coords();
    assert_eq!(c.len(), 2, "squared states have two coordinates");
    (c[0], c[1])
}

/// The fine-grained measurement at parameter `alpha`.
pub fn fg_measurement(alpha: f64) -> Result<Measurement> {
    if !(-1e-12..=1.0 + 1e-12).contains(&alpha) {
        return Err(Error::OutOfRange(format!("alpha {alpha} outside [0,1]")));
    }
    let a = alpha.clamp(0.0, 1.0);
    Ok(Measurement::with_label(
        vec![
            Effect::new(0.0, vec![a, 0.0]),
            Effect::new(a, vec![-a, 0.0]),
            Effect::new(0.0, vec![0.0, 1.0 - a]),
            Effect::new(1.0 - a, vec![0.0, a - 1.0]),
        ],
        format!("fg(alpha={a})"),
    ))
}

/// S1(s) = min[h(c1), h(c2)].
pub fn s1_closed(s: &State) -> f64 {
    let (c1, c2) = unpack(s);
    h(c1).min(h(c2))
}

/// S2(s) = max[h(c1), h(c2)].
pub fn s2_closed(s: &State) -> f64 {
    let (c1, c2) = unpack(s);
    h(c1).max(h(c2))
}

/// S2'(s) = S3'(s) = h(c1) + h(c2), the invariant entropy of the model.
pub fn s2prime_closed(s: &State) -> f64 {
    let (c1, c2) = unpack(s);
    h(c1) + h(c2)
}

/// Feasible range of the corner weight `t = p11` in the one-parameter family
/// of pure decompositions of `s`.
pub fn corner_weight_range(s: &State) -> (f64, f64) {
    let (c1, c2) = unpack(s);
    ((c1 + c2 - 1.0).max(0.0), c1.min(c2))
}

/// Mixing-weight distribution of the pure-corner decomposition at `t`:
/// (p11, p10, p01, p00).
fn corner_weights(s: &State, t: f64) -> [f64; 4] {
    let (c1, c2) = unpack(s);
    [t, c1 - t, c2 - t, 1.0 - c1 - c2 + t]
}

/// The pure-corner decomposition of `s` at parameter `t`, zero-weight
/// corners dropped.
pub fn corner_decomposition(s: &State, t: f64) -> Result<Ensemble> {
    let ws = corner_weights(s, t);
    let corners = [
        vec![1.0, 1.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 0.0],
    ];
    let mut weights = Vec::new();
    let mut states = Vec::new();
    for (w, c) in ws.iter().zip(corners) {
        if *w > 1e-15 {
            weights.push(*w);
            states.push(State::new(c));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ensemble::new(&Model::Squared, weights, states, true)
}

/// S3(s): exact infimum of H(p) over pure decompositions, computed on the
/// one-parameter corner family by a 1024-point grid plus golden-section
/// refinement to 1e-9 in `t`.
pub fn s3_exact(s: &State) -> f64 {
    let (t_lo, t_hi) = corner_weight_range(s);
    let f = |t: f64| entropy_of(&corner_weights(s, t));
    if t_hi - t_lo <= 1e-15 {
        return f(t_lo);
    }
    const GRID: usize = 1024;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=GRID {
        let t = t_lo + (t_hi - t_lo) * i as f64 / GRID as f64;
        let v = f(t);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let span = (t_hi - t_lo) / GRID as f64;
    let mut a = t_lo + span * best_i.saturating_sub(1) as f64;
    let mut b = (t_lo + span * (best_i + 1) as f64).min(t_hi);
    // Golden-section minimization inside the bracketing interval.
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    best.min(fc).min(fd)
}

/// Closed-form accessible information, exact by affinity of the mutual
/// information in alpha: max over i = 1,2 of h(c_i) - sum_x p_x h(c_ix),
/// ties toward i = 1.
pub fn accinfo_closed(ens: &Ensemble) -> f64 {
    let mut mix = [0.0; 2];
    for (p, s) in ens.members() {
        mix[0] += p * s.coords()[0];
        mix[1] += p * s.coords()[1];
    }
    let mut best = f64::NEG_INFINITY;
    for i in 0..2 {
        let avg: f64 = ens.members().map(|(p, s)| p * h(s.coords()[i])).sum();
        let v = h(mix[i]) - avg;
        if v > best {
            best = v;
        }
    }
    best.max(0.0)
}

/// The two edge decompositions `s = c1 (1, c2) + (1-c1) (0, c2)` and
/// `s = c2 (c1, 1) + (1-c2) (c1, 0)`, skipping degenerate weights. These
/// attain the suprema behind S1' = S2 and S2' = h(c1) + h(c2).
pub fn edge_decompositions(s: &State) -> Vec<Ensemble> {
    let (c1, c2) = unpack(s);
    let mut out = Vec::new();
    let mut push = |p: f64, a: State, b: State| {
        if p > 1e-12 && p < 1.0 - 1e-12 {
            out.push(
                Ensemble::new(&Model::Squared, vec![p, 1.0 - p], vec![a, b], false).unwrap(),
            );
        }
    };
    push(c1, State::new(vec![1.0, c2]), State::new(vec![0.0, c2]));
    push(c2, State::new(vec![c1, 1.0]), State::new(vec![c1, 0.0]));
    out
}

/// Canonical pure-state seeds for P(s): both endpoints of the corner family
/// and the product decomposition `t = c1 c2`.
pub fn pure_seed_decompositions(s: &State) -> Vec<Ensemble> {
    let (t_lo, t_hi) = corner_weight_range(s);
    let (c1, c2) = unpack(s);
    let mut ts = vec![t_lo, t_hi];
    let prod = c1 * c2;
    if prod > t_lo && prod < t_hi {
        ts.push(prod);
    }
    ts.iter()
        .filter_map(|&t| corner_decomposition(s, t).ok())
        .collect()
}
