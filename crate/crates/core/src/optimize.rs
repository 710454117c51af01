//! Derivative-free optimization over boxes with feasibility predicates, and
//! the coordinate charts that turn decompositions into box points.
//!
//! The search is multi-start coordinate pattern search: cheap objectives,
//! low dimensions and non-smooth entropy terms make robustness and
//! determinism worth more than convergence rate. Infeasible points are
//! rejected by a sentinel, never penalized.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gpt::{mix, Ensemble, Model, State, MEMBERSHIP_TOL, WEIGHT_DROP_TOL};
use crate::models::{classical, qubit};

/// Smallest pattern step before a restart stops.
const MIN_STEP: f64 = 1e-9;

/// A box of search coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Bounds> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::EmptyBox);
        }
        Ok(Bounds { lower, upper })
    }

    /// The zero-dimensional box: a single point.
    pub fn empty() -> Bounds {
        Bounds {
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (xi, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *xi = xi.clamp(*l, *u);
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| if u > l { rng.gen_range(l..=u) } else { l })
            .collect()
    }
}

/// Result of a box search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evals: u64,
    pub feasible: bool,
}

fn pattern_search<F>(
    score: &F,
    bounds: &Bounds,
    iters: usize,
    start: Vec<f64>,
) -> (Vec<f64>, f64, u64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = bounds.dim();
    let mut x = start;
    bounds.clamp(&mut x);
    let mut fx = score(&x);
    let mut evals = 1u64;
    if dim == 0 {
        return (x, fx, evals);
    }
    let mut steps: Vec<f64> = bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(l, u)| 0.25 * (u - l))
        .collect();
    for _ in 0..iters {
        let mut improved = false;
        for i in 0..dim {
            if steps[i] <= 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                let xi = (x[i] + dir * steps[i]).clamp(bounds.lower[i], bounds.upper[i]);
                if xi == x[i] {
                    continue;
                }
                let old = x[i];
                x[i] = xi;
                let f_trial = score(&x);
                evals += 1;
                if f_trial > fx {
                    fx = f_trial;
                    improved = true;
                } else {
                    x[i] = old;
                }
            }
        }
        if !improved {
            let mut max_step = 0.0f64;
            for s in steps.iter_mut() {
                *s *= 0.5;
                max_step = max_step.max(*s);
            }
            if max_step < MIN_STEP {
                break;
            }
        }
    }
    (x, fx, evals)
}

/// Multi-start pattern search over a box. The objective returns `None` for
/// infeasible points. Restart `r` starts from `warm_starts[r]` when present,
/// otherwise from a uniform draw seeded with `seed + r`, so the result is
/// identical for a fixed seed no matter how many threads run the restarts;
/// ties between restarts resolve to the lowest restart index.
pub fn local_search<F>(
    objective: &F,
    bounds: &Bounds,
    maximize: bool,
    restarts: usize,
    iters: usize,
    seed: u64,
    warm_starts: &[Vec<f64>],
) -> Result<OptimOutcome>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    if restarts == 0 || iters == 0 {
        return Err(Error::BadArgument("restarts and iters must be >= 1".into()));
    }
    let sign = if maximize { 1.0 } else { -1.0 };
    let score = |x: &[f64]| objective(x).map_or(f64::NEG_INFINITY, |v| sign * v);
    let runs: Vec<(Vec<f64>, f64, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = match warm_starts.get(r) {
                Some(w) if w.len() == bounds.dim() => w.clone(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                    bounds.sample(&mut rng)
                }
            };
            pattern_search(&score, bounds, iters, start)
        })
        .collect();
    let mut best: Option<(usize, &(Vec<f64>, f64, u64))> = None;
    let mut evals = 0u64;
    for (r, run) in runs.iter().enumerate() {
        evals += run.2;
        if best.map_or(true, |(_, b)| run.1 > b.1) {
            best = Some((r, run));
        }
    }
    let (_, (point, scored, _)) = best.expect("restarts >= 1");
    Ok(OptimOutcome {
        best_point: point.clone(),
        best_value: sign * *scored,
        evals,
        feasible: *scored > f64::NEG_INFINITY,
    })
}

fn stick_break(betas: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(betas.len() + 1);
    let mut rest = 1.0;
    for &b in betas {
        let w = b.clamp(0.0, 1.0) * rest;
        out.push(w);
        rest = (rest - w).max(0.0);
    }
    out.push(rest);
    out
}

fn stick_encode(weights: &[f64]) -> Vec<f64> {
    let mut betas = Vec::with_capacity(weights.len().saturating_sub(1));
    let mut rest = 1.0;
    for &w in &weights[..weights.len() - 1] {
        let b = if rest > 1e-15 { (w / rest).clamp(0.0, 1.0) } else { 0.0 };
        betas.push(b);
        rest -= w;
    }
    betas
}

fn snap_corner(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect()
}

/// Search chart over decompositions of a target state. Mixed charts solve
/// the k-th component from the barycenter constraint; pure charts keep every
/// component on the extreme boundary by construction where the geometry
/// allows it (qubit chords) and by snap-plus-rejection otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompChart {
    MixedBarycenter { k: usize },
    SquaredPureCorners { k: usize },
    QubitPureChords { k: usize },
    ClassicalPureVertices,
}

pub fn decomp_chart(model: &Model, pure_only: bool, k: usize) -> DecompChart {
    if !pure_only {
        return DecompChart::MixedBarycenter { k };
    }
    match model {
        Model::Squared => DecompChart::SquaredPureCorners { k },
        Model::Qubit => DecompChart::QubitPureChords { k: k.max(2) },
        Model::Classical { .. } => DecompChart::ClassicalPureVertices,
    }
}

fn free_state_dim(model: &Model) -> usize {
    match model {
        Model::Classical { d } => d - 1,
        Model::Squared => 2,
        Model::Qubit => 3,
    }
}

fn free_state_bounds(model: &Model, lo: &mut Vec<f64>, hi: &mut Vec<f64>) {
    match model {
        Model::Classical { d } => {
            lo.extend(std::iter::repeat(0.0).take(d - 1));
            hi.extend(std::iter::repeat(1.0).take(d - 1));
        }
        Model::Squared => {
            lo.extend_from_slice(&[0.0, 0.0]);
            hi.extend_from_slice(&[1.0, 1.0]);
        }
        Model::Qubit => {
            lo.extend_from_slice(&[-1.0, -1.0, -1.0]);
            hi.extend_from_slice(&[1.0, 1.0, 1.0]);
        }
    }
}

fn decode_free_state(model: &Model, x: &[f64]) -> Option<State> {
    match model {
        Model::Classical { .. } => Some(State::new(stick_break(x))),
        Model::Squared => Some(State::new(x.to_vec())),
        Model::Qubit => {
            let n: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1.0 {
                None
            } else {
                Some(State::new(x.to_vec()))
            }
        }
    }
}

fn encode_free_state(model: &Model, s: &State) -> Vec<f64> {
    match model {
        Model::Classical { .. } => stick_encode(s.coords()),
        _ => s.coords().to_vec(),
    }
}

impl DecompChart {
    pub fn bounds(&self, model: &Model) -> Bounds {
        use std::f64::consts::PI;
        match self {
            DecompChart::MixedBarycenter { k } | DecompChart::SquaredPureCorners { k } => {
                let k = *k;
                let mut lo = vec![0.0; k.saturating_sub(1)];
                let mut hi = vec![1.0; k.saturating_sub(1)];
                for _ in 0..k.saturating_sub(1) {
                    match self {
                        DecompChart::SquaredPureCorners { .. } => {
                            lo.extend_from_slice(&[0.0, 0.0]);
                            hi.extend_from_slice(&[1.0, 1.0]);
                        }
                        _ => free_state_bounds(model, &mut lo, &mut hi),
                    }
                }
                Bounds::new(lo, hi).expect("well-formed chart box")
            }
            DecompChart::QubitPureChords { k } => {
                let m = k - 2;
                let mut lo = vec![0.0; m];
                let mut hi = vec![1.0; m];
                for _ in 0..m {
                    lo.extend_from_slice(&[0.0, 0.0]);
                    hi.extend_from_slice(&[PI, 2.0 * PI]);
                }
                lo.extend_from_slice(&[0.0, 0.0]);
                hi.extend_from_slice(&[PI, 2.0 * PI]);
                Bounds::new(lo, hi).expect("well-formed chart box")
            }
            DecompChart::ClassicalPureVertices => Bounds::empty(),
        }
    }

    pub fn decode(&self, model: &Model, target: &State, x: &[f64]) -> Option<Ensemble> {
        match self {
            DecompChart::MixedBarycenter { k } => {
                decode_barycenter(model, target, *k, x, false)
            }
            DecompChart::SquaredPureCorners { k } => {
                decode_barycenter(model, target, *k, x, true)
            }
            DecompChart::QubitPureChords { k } => decode_chords(target, *k, x),
            DecompChart::ClassicalPureVertices => classical::vertex_decomposition(target).ok(),
        }
    }

    pub fn encode(&self, model: &Model, target: &State, ens: &Ensemble) -> Option<Vec<f64>> {
        match self {
            DecompChart::MixedBarycenter { k } | DecompChart::SquaredPureCorners { k } => {
                encode_barycenter(model, target, *k, ens)
            }
            DecompChart::QubitPureChords { k } => encode_chords(*k, ens),
            DecompChart::ClassicalPureVertices => Some(Vec::new()),
        }
    }
}

fn finish_ensemble(
    model: &Model,
    target: &State,
    mut weights: Vec<f64>,
    mut states: Vec<State>,
    pure_only: bool,
) -> Option<Ensemble> {
    let mut i = 0;
    while i < weights.len() {
        if weights[i] < WEIGHT_DROP_TOL {
            weights.remove(i);
            states.remove(i);
        } else {
            i += 1;
        }
    }
    if weights.is_empty() {
        return None;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let ens = Ensemble::new(model, weights, states, pure_only).ok()?;
    let m = mix(model, &ens).ok()?;
    let err: f64 = m
        .coords()
        .iter()
        .zip(target.coords())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if err > 1e-9 {
        return None;
    }
    Some(ens)
}

fn decode_barycenter(
    model: &Model,
    target: &State,
    k: usize,
    x: &[f64],
    pure_corners: bool,
) -> Option<Ensemble> {
    let free_dim = if pure_corners { 2 } else { free_state_dim(model) };
    if x.len() != (k - 1) + (k - 1) * free_dim {
        return None;
    }
    let weights = stick_break(&x[..k - 1]);
    let mut states = Vec::with_capacity(k);
    for i in 0..k - 1 {
        let chunk = &x[(k - 1) + i * free_dim..(k - 1) + (i + 1) * free_dim];
        let s = if pure_corners {
            State::new(snap_corner(chunk))
        } else {
            decode_free_state(model, chunk)?
        };
        states.push(s);
    }
    // Solve the last component from the barycenter constraint.
    let p_last = weights[k - 1];
    let mut residual: Vec<f64> = target.coords().to_vec();
    for (p, s) in weights[..k - 1].iter().zip(&states) {
        for (r, c) in residual.iter_mut().zip(s.coords()) {
            *r -= p * c;
        }
    }
    let (weights, states) = if p_last > WEIGHT_DROP_TOL {
        let solved: Vec<f64> = residual.iter().map(|r| r / p_last).collect();
        if !model.contains(&solved) {
            return None;
        }
        let solved = if pure_corners {
            let snapped = snap_corner(&solved);
            let dist = solved
                .iter()
                .zip(&snapped)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dist > 1e-9 {
                return None;
            }
            State::new(snapped)
        } else {
            State::new(solved)
        };
        states.push(solved);
        (weights, states)
    } else {
        (weights[..k - 1].to_vec(), states)
    };
    finish_ensemble(model, target, weights, states, pure_corners)
}

fn encode_barycenter(
    model: &Model,
    target: &State,
    k: usize,
    ens: &Ensemble,
) -> Option<Vec<f64>> {
    if ens.len() > k {
        return None;
    }
    let mut weights: Vec<f64> = Vec::with_capacity(k);
    let mut states: Vec<State> = Vec::with_capacity(k);
    // Pad with zero-weight copies of the target, keeping the real last
    // member in the solved slot.
    for (p, s) in ens.members().take(ens.len() - 1) {
        weights.push(p);
        states.push(s.clone());
    }
    while weights.len() < k - 1 {
        weights.push(0.0);
        states.push(target.clone());
    }
    let (p_last, s_last) = ens.members().last()?;
    weights.push(p_last);
    states.push(s_last.clone());
    let mut code = stick_encode(&weights);
    for s in &states[..k - 1] {
        code.extend(encode_free_state(model, s));
    }
    Some(code)
}

fn decode_chords(target: &State, k: usize, x: &[f64]) -> Option<Ensemble> {
    let m = k - 2;
    if x.len() != m + 2 * m + 2 {
        return None;
    }
    let model = Model::Qubit;
    let sticks = stick_break(&x[..m]);
    let mut weights = Vec::with_capacity(k);
    let mut states = Vec::with_capacity(k);
    let mut residual: Vec<f64> = target.coords().to_vec();
    for i in 0..m {
        let u = qubit::unit_from_angles(x[m + 2 * i], x[m + 2 * i + 1]);
        let p = sticks[i];
        weights.push(p);
        states.push(State::new(u.to_vec()));
        for (r, c) in residual.iter_mut().zip(u) {
            *r -= p * c;
        }
    }
    let q = sticks[m];
    if q > WEIGHT_DROP_TOL {
        let c = [residual[0] / q, residual[1] / q, residual[2] / q];
        if c.iter().map(|v| v * v).sum::<f64>().sqrt() > 1.0 + MEMBERSHIP_TOL {
            return None;
        }
        let u = qubit::unit_from_angles(x[3 * m], x[3 * m + 1]);
        let (a, b, lam) = qubit::chord_decomposition(c, u)?;
        weights.push(q * lam);
        states.push(State::new(a.to_vec()));
        weights.push(q * (1.0 - lam));
        states.push(State::new(b.to_vec()));
    }
    finish_ensemble(&model, target, weights, states, true)
}

fn encode_chords(k: usize, ens: &Ensemble) -> Option<Vec<f64>> {
    let m = k - 2;
    if ens.len() > k {
        return None;
    }
    let take_free = ens.len().saturating_sub(2).min(m);
    let mut weights: Vec<f64> = Vec::new();
    let mut angles: Vec<f64> = Vec::new();
    for (p, s) in ens.members().take(take_free) {
        let c = s.coords();
        let (t, f) = qubit::angles_from_unit([c[0], c[1], c[2]]);
        weights.push(p);
        angles.push(t);
        angles.push(f);
    }
    while weights.len() < m {
        weights.push(0.0);
        angles.extend_from_slice(&[0.0, 0.0]);
    }
    let tail: Vec<(f64, &State)> = ens.members().skip(take_free).collect();
    let chord_u = match tail.len() {
        1 => {
            let c = tail[0].1.coords();
            [c[0], c[1], c[2]]
        }
        2 => {
            let a = tail[0].1.coords();
            let b = tail[1].1.coords();
            let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < 1e-12 {
                [a[0], a[1], a[2]]
            } else {
                [d[0] / n, d[1] / n, d[2] / n]
            }
        }
        _ => return None,
    };
    let q: f64 = tail.iter().map(|(p, _)| p).sum();
    weights.push(q);
    let mut code = stick_encode(&weights);
    code.extend(angles);
    let (t, f) = qubit::angles_from_unit(chord_u);
    code.push(t);
    code.push(f);
    Some(code)
}

/// The spec-level decode: turns a flat code into an ensemble of the target
/// state, or `None` where the chart point is infeasible.
pub fn decode_decomposition(
    model: &Model,
    s: &State,
    code: &[f64],
    pure_only: bool,
    k: usize,
) -> Result<Option<Ensemble>> {
    if k == 0 {
        return Err(Error::BadArgument("k must be >= 1".into()));
    }
    if k == 1 {
        if pure_only && !model.is_pure(s) {
            return Ok(None);
        }
        return Ok(Some(Ensemble::trivial(s.clone())));
    }
    let chart = decomp_chart(model, pure_only, k);
    let expected = chart.bounds(model).dim();
    if code.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: code.len(),
        });
    }
    Ok(chart.decode(model, s, code))
}

/// Outcome of a decomposition search: the best feasible ensemble found.
#[derive(Debug, Clone)]
pub struct DecompOutcome {
    pub value: f64,
    pub ensemble: Ensemble,
    pub evals: u64,
}

/// Optimizes `objective` over decompositions of `s` with at most `k`
/// components. Seed ensembles (and the trivial preparation, whenever it is
/// admissible) are evaluated directly and also injected as warm starts, so
/// the result is never worse than the best seed.
#[allow(clippy::too_many_arguments)]
pub fn optimize_decomposition<F>(
    model: &Model,
    s: &State,
    objective: &F,
    k: usize,
    pure_only: bool,
    maximize: bool,
    restarts: usize,
    iters: usize,
    seed: u64,
    seeds: &[Ensemble],
) -> Result<DecompOutcome>
where
    F: Fn(&Ensemble) -> Option<f64> + Sync,
{
    if k == 0 {
        return Err(Error::BadArgument("k must be >= 1".into()));
    }
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut candidates: Vec<Ensemble> = Vec::new();
    if !pure_only || model.is_pure(s) {
        candidates.push(Ensemble::trivial(s.clone()));
    }
    for ens in seeds {
        if ens.len() > k {
            continue;
        }
        if pure_only && ens.states().iter().any(|m| !model.is_pure(m)) {
            continue;
        }
        let m = mix(model, ens)?;
        let err = m
            .coords()
            .iter()
            .zip(s.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err <= 1e-9 {
            candidates.push(ens.clone());
        }
    }

    let mut best: Option<(f64, Ensemble)> = None;
    let mut evals = 0u64;
    for cand in &candidates {
        evals += 1;
        if let Some(v) = objective(cand) {
            if best.as_ref().map_or(true, |(bv, _)| sign * v > sign * bv) {
                best = Some((v, cand.clone()));
            }
        }
    }

    if k > 1 {
        let chart = decomp_chart(model, pure_only, k);
        let bounds = chart.bounds(model);
        let warm: Vec<Vec<f64>> = candidates
            .iter()
            .filter_map(|c| chart.encode(model, s, c))
            .collect();
        let boxed = |x: &[f64]| chart.decode(model, s, x).and_then(|ens| objective(&ens));
        let out = local_search(&boxed, &bounds, maximize, restarts, iters, seed, &warm)?;
        evals += out.evals;
        if out.feasible {
            if let Some(ens) = chart.decode(model, s, &out.best_point) {
                if best
                    .as_ref()
                    .map_or(true, |(bv, _)| sign * out.best_value > sign * bv)
                {
                    best = Some((out.best_value, ens));
                }
            }
        }
    }

    match best {
        Some((value, ensemble)) => Ok(DecompOutcome {
            value,
            ensemble,
            evals,
        }),
        None => Err(Error::InfeasibleParam(
            "no feasible decomposition found".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::h;
    use crate::models::squared;

    #[test]
    fn quadratic_maximum() {
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let f = |x: &[f64]| Some(-(x[0] - 0.3) * (x[0] - 0.3));
        let out = local_search(&f, &b, true, 4, 200, 1, &[]).unwrap();
        assert!(out.feasible);
        assert!((out.best_point[0] - 0.3).abs() < 1e-6);
        assert!(out.best_value.abs() < 1e-6);
    }

    #[test]
    fn affine_objective_hits_the_endpoint() {
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let f = |x: &[f64]| Some(2.0 * x[0] + 1.0);
        let out = local_search(&f, &b, true, 4, 200, 2, &[]).unwrap();
        assert!((out.best_point[0] - 1.0).abs() < 1e-6);
        assert!((out.best_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn binary_entropy_maximum() {
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let f = |x: &[f64]| Some(h(x[0]));
        let out = local_search(&f, &b, true, 4, 400, 3, &[]).unwrap();
        assert!((out.best_point[0] - 0.5).abs() < 1e-6);
        assert!((out.best_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn affine_coordinate_is_pinned_in_higher_dimensions() {
        let b = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        // Affine in x0, smooth in x1.
        let f = |x: &[f64]| Some(0.7 * x[0] + h(x[1]));
        let out = local_search(&f, &b, true, 8, 400, 4, &[]).unwrap();
        assert!((out.best_point[0] - 1.0).abs() < 1e-6);
        assert!((out.best_point[1] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn deterministic_for_a_fixed_seed_across_thread_counts() {
        let b = Bounds::new(vec![-1.0, -1.0, -1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let f = |x: &[f64]| {
            Some(-(x[0] - 0.2).powi(2) - (x[1] + 0.4).powi(2) - (x[2] - 0.9).powi(2))
        };
        let run = || local_search(&f, &b, true, 16, 300, 42, &[]).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(single, multi);
        assert_eq!(single, run());
    }

    #[test]
    fn infeasible_region_is_rejected_not_crashed() {
        let b = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                None
            } else {
                Some(1.0 - x[0])
            }
        };
        let out = local_search(&f, &b, true, 8, 200, 5, &[]).unwrap();
        assert!(out.feasible);
        assert!((out.best_point[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn empty_box_is_an_error() {
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn decode_examples() {
        let sq = Model::Squared;
        // k = 1: the deterministic preparation.
        let s = State::new(vec![0.5, 0.3]);
        let ens = decode_decomposition(&sq, &s, &[], false, 1).unwrap().unwrap();
        assert_eq!(ens.len(), 1);
        assert_eq!(ens.states()[0].coords(), s.coords());

        // k = 2: free weight 0.5, free component (1, 0.3) solves to (0, 0.3).
        let ens = decode_decomposition(&sq, &s, &[0.5, 1.0, 0.3], false, 2)
            .unwrap()
            .unwrap();
        assert_eq!(ens.len(), 2);
        assert!((ens.states()[1].coords()[0]).abs() < 1e-12);
        assert!((ens.states()[1].coords()[1] - 0.3).abs() < 1e-12);

        // Solved component leaves the box: infeasible, not an error.
        let s = State::new(vec![0.9, 0.5]);
        let out = decode_decomposition(&sq, &s, &[0.5, 0.1, 0.5], false, 2).unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn decode_rejects_wrong_code_length() {
        let sq = Model::Squared;
        let s = State::new(vec![0.5, 0.3]);
        assert!(decode_decomposition(&sq, &s, &[0.5], false, 2).is_err());
    }

    #[test]
    fn encode_then_decode_reproduces_seeds() {
        let sq = Model::Squared;
        let s = State::new(vec![0.4, 0.7]);
        for k in [2usize, 4] {
            let chart = decomp_chart(&sq, false, k);
            for ens in squared::edge_decompositions(&s) {
                let code = chart.encode(&sq, &s, &ens).unwrap();
                let back = chart.decode(&sq, &s, &code).unwrap();
                assert_eq!(back.len(), ens.len());
                for ((pw, ps), (qw, qs)) in back.members().zip(ens.members()) {
                    assert!((pw - qw).abs() < 1e-12);
                    for (a, b) in ps.coords().iter().zip(qs.coords()) {
                        assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
        // Pure corner chart round-trip.
        let chart = decomp_chart(&sq, true, 4);
        for ens in squared::pure_seed_decompositions(&s) {
            let code = chart.encode(&sq, &s, &ens).unwrap();
            let back = chart.decode(&sq, &s, &code).unwrap();
            assert_eq!(back.len(), ens.len());
        }
        // Qubit chord chart round-trip.
        let qb = Model::Qubit;
        let r = State::new(vec![0.1, -0.3, 0.4]);
        let chart = decomp_chart(&qb, true, 2);
        let ens = qubit::eigen_decomposition(&r).unwrap();
        let code = chart.encode(&qb, &r, &ens).unwrap();
        let back = chart.decode(&qb, &r, &code).unwrap();
        for ((pw, ps), (qw, qs)) in back.members().zip(ens.members()) {
            assert!((pw - qw).abs() < 1e-9);
            for (a, b) in ps.coords().iter().zip(qs.coords()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn optimize_decomposition_baseline_and_known_optima() {
        let sq = Model::Squared;
        let s = State::new(vec![0.5, 0.5]);

        // Constant objective: the trivial ensemble is good enough.
        let constant = |_: &Ensemble| Some(0.0);
        let out =
            optimize_decomposition(&sq, &s, &constant, 4, false, true, 4, 100, 1, &[]).unwrap();
        assert_eq!(out.value, 0.0);

        // Induction body with closed inner S2: optimum h(c1) + h(c2) = 2.
        let body = |ens: &Ensemble| {
            let i = squared::accinfo_closed(ens);
            let avg: f64 = ens.members().map(|(p, m)| p * squared::s2_closed(m)).sum();
            Some(i + avg)
        };
        let seeds = squared::edge_decompositions(&s);
        let out =
            optimize_decomposition(&sq, &s, &body, 4, false, true, 8, 200, 2, &seeds).unwrap();
        assert!((out.value - 2.0).abs() < 5e-3, "got {}", out.value);

        // Mixing-weight entropy minimized over pure decompositions: 1.0.
        let hp = |ens: &Ensemble| Some(crate::info::entropy_of(ens.weights()));
        let seeds = squared::pure_seed_decompositions(&s);
        let out =
            optimize_decomposition(&sq, &s, &hp, 4, true, false, 8, 200, 3, &seeds).unwrap();
        assert!((out.value - 1.0).abs() < 5e-3, "got {}", out.value);
        assert!(out.ensemble.states().iter().all(|m| sq.is_pure(m)));
    }

    #[test]
    fn optimize_decomposition_respects_baseline_dominance() {
        let sq = Model::Squared;
        let s = State::new(vec![0.3, 0.8]);
        let obj = |ens: &Ensemble| Some(crate::info::entropy_of(ens.weights()));
        let trivial_value = obj(&Ensemble::trivial(s.clone())).unwrap();
        let out =
            optimize_decomposition(&sq, &s, &obj, 4, false, true, 4, 100, 7, &[]).unwrap();
        assert!(out.value >= trivial_value);
    }
}
