//! The qubit in Bloch coordinates. A state is `r` with `|r| <= 1`, the
//! density operator spectrum is `(1 +- |r|)/2`, and the indecomposable
//! effects are the rank-one ones, `e_y(r) = (w_y/2)(1 + u_y . r)` with unit
//! `u_y`. A rank-one POVM needs `sum w_y = 2` and `sum w_y u_y = 0`.

use crate::error::{Error, Result};
use crate::gpt::{Effect, Ensemble, Measurement, Model, State, GEOMETRY_TOL};
use crate::info::h;

pub type Vec3 = [f64; 3];

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn bloch(s: &State) -> Vec3 {
    let c = s.coords();
    assert_eq!(c.len(), 3, "qubit states are Bloch 3-vectors");
    [c[0], c[1], c[2]]
}

/// Eigenvalues `(1 +- |r|)/2` of the density operator behind `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochSpectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

pub fn bloch_spectrum(s: &State) -> Result<BlochSpectrum> {
    let r = norm(s.coords());
    if r > 1.0 + 1e-12 {
        return Err(Error::InvalidState {
            model: "qubit",
            reason: format!("|r| = {r} > 1"),
        });
    }
    let r = r.min(1.0);
    Ok(BlochSpectrum {
        lambda_plus: (1.0 + r) / 2.0,
        lambda_minus: (1.0 - r) / 2.0,
    })
}

/// Von Neumann entropy `h((1 + |r|)/2)` in bits.
pub fn vn_entropy(s: &State) -> Result<f64> {
    let spec = bloch_spectrum(s)?;
    Ok(h(spec.lambda_plus))
}

/// Holevo quantity `chi = S_q(mix) - sum_x p_x S_q(s_x)`.
pub fn chi(ens: &Ensemble) -> Result<f64> {
    let mixed = crate::gpt::mix(&Model::Qubit, ens)?;
    let avg: f64 = ens
        .members()
        .map(|(p, s)| Ok(p * vn_entropy(s)?))
        .sum::<Result<f64>>()?;
    Ok(vn_entropy(&mixed)? - avg)
}

pub fn unit_from_angles(theta: f64, phi: f64) -> Vec3 {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

pub fn angles_from_unit(u: Vec3) -> (f64, f64) {
    let theta = u[2].clamp(-1.0, 1.0).acos();
    let mut phi = u[1].atan2(u[0]);
    if phi < 0.0 {
        phi += 2.0 * std::f64::consts::PI;
    }
    (theta, phi)
}

/// The projective measurement along `u`: effects `(1 +- u . r)/2`.
pub fn projective(u: Vec3) -> Measurement {
    Measurement::with_label(
        vec![
            Effect::new(0.5, vec![u[0] / 2.0, u[1] / 2.0, u[2] / 2.0]),
            Effect::new(0.5, vec![-u[0] / 2.0, -u[1] / 2.0, -u[2] / 2.0]),
        ],
        "projective",
    )
}

/// Builds the rank-one POVM `e_y(r) = (w_y/2)(1 + u_y . r)` after checking
/// weights, unit directions, normalization and closure. A closure residual
/// within 1e-9 is repaired by absorbing it into the last effect; anything
/// larger is an infeasible-parameter signal, not a crash.
pub fn rank1_povm(weights: &[f64], dirs: &[Vec3]) -> Result<Measurement> {
    let n = weights.len();
    if !(2..=4).contains(&n) || dirs.len() != n {
        return Err(Error::BadArgument(format!(
            "rank-one family needs 2..=4 outcomes, got {n} weights and {} directions",
            dirs.len()
        )));
    }
    if weights.iter().any(|&w| w < -1e-12) {
        return Err(Error::InfeasibleParam("negative weight".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 2.0).abs() > GEOMETRY_TOL {
        return Err(Error::InfeasibleParam(format!("weights sum to {wsum}")));
    }
    for u in dirs {
        if (norm(u) - 1.0).abs() > GEOMETRY_TOL {
            return Err(Error::InfeasibleParam(format!(
                "direction {u:?} is not a unit vector"
            )));
        }
    }
    let mut residual = [0.0; 3];
    for (w, u) in weights.iter().zip(dirs) {
        for (acc, x) in residual.iter_mut().zip(u) {
            *acc += w * x;
        }
    }
    if norm(&residual) > GEOMETRY_TOL {
        return Err(Error::InfeasibleParam(format!(
            "closure residual {:.3e}",
            norm(&residual)
        )));
    }
    let mut effects: Vec<Effect> = weights
        .iter()
        .zip(dirs)
        .map(|(w, u)| Effect::new(w / 2.0, u.iter().map(|x| w * x / 2.0).collect()))
        .collect();
    // Repair: make the tuple close exactly on the unit effect.
    let off_deficit = 1.0 - effects.iter().map(|e| e.offset).sum::<f64>();
    let last = effects.last_mut().expect("n >= 2");
    last.offset += off_deficit;
    for (g, r) in last.gradient.iter_mut().zip(residual) {
        *g -= r / 2.0;
    }
    let m = Measurement::with_label(effects, format!("rank1({n})"));
    m.validate(&Model::Qubit)?;
    Ok(m)
}

/// Solves the free chart values of an n-outcome rank-one family into full
/// weights and directions. Free values are n-1 weights then n-1
/// (theta, phi) pairs; the last outcome direction is solved from closure and
/// the weights are rescaled to sum to 2, which preserves closure. Returns
/// `None` for degenerate configurations where the solved outcome vanishes.
pub fn solve_rank1_family(n: usize, free: &[f64]) -> Option<(Vec<f64>, Vec<Vec3>)> {
    if n == 2 {
        if free.len() != 2 {
            return None;
        }
        let u = unit_from_angles(free[0], free[1]);
        return Some((vec![1.0, 1.0], vec![u, [-u[0], -u[1], -u[2]]]));
    }
    let m = n - 1;
    if free.len() != 3 * m {
        return None;
    }
    let mut weights: Vec<f64> = free[..m].to_vec();
    if weights.iter().any(|&w| w <= 0.0) {
        return None;
    }
    let mut dirs: Vec<Vec3> = (0..m)
        .map(|y| unit_from_angles(free[m + 2 * y], free[m + 2 * y + 1]))
        .collect();
    let mut v = [0.0; 3];
    for (w, u) in weights.iter().zip(&dirs) {
        for (acc, x) in v.iter_mut().zip(u) {
            *acc += w * x;
        }
    }
    let w_last = norm(&v);
    if w_last < 1e-9 {
        return None;
    }
    dirs.push([-v[0] / w_last, -v[1] / w_last, -v[2] / w_last]);
    weights.push(w_last);
    let scale = 2.0 / weights.iter().sum::<f64>();
    weights.iter_mut().for_each(|w| *w *= scale);
    Some((weights, dirs))
}

/// Eigendecomposition seed: `r = lambda_plus (+u) + lambda_minus (-u)` with
/// `u = r/|r|` (the z axis when r = 0). Zero-weight members are dropped.
pub fn eigen_decomposition(s: &State) -> Result<Ensemble> {
    let r = bloch(s);
    let len = norm(&r);
    let u = if len > 1e-12 {
        [r[0] / len, r[1] / len, r[2] / len]
    } else {
        [0.0, 0.0, 1.0]
    };
    let p_plus = (1.0 + len.min(1.0)) / 2.0;
    let mut weights = vec![p_plus];
    let mut states = vec![State::new(u.to_vec())];
    if 1.0 - p_plus > 1e-15 {
        weights.push(1.0 - p_plus);
        states.push(State::new(vec![-u[0], -u[1], -u[2]]));
    } else {
        weights[0] = 1.0;
    }
    Ensemble::new(&Model::Qubit, weights, states, true)
}

/// Endpoints of the chord through `r` in direction `u`, with the weight on
/// the forward endpoint making the pair mix back to `r`.
pub fn chord_decomposition(r: Vec3, u: Vec3) -> Option<(Vec3, Vec3, f64)> {
    let ru: f64 = r.iter().zip(&u).map(|(a, b)| a * b).sum();
    let r2: f64 = r.iter().map(|x| x * x).sum();
    let disc = ru * ru + 1.0 - r2;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let t_plus = -ru + root;
    let t_minus = -ru - root;
    if t_plus - t_minus < 1e-15 {
        return None;
    }
    let a = [r[0] + t_plus * u[0], r[1] + t_plus * u[1], r[2] + t_plus * u[2]];
    let b = [
        r[0] + t_minus * u[0],
        r[1] + t_minus * u[1],
        r[2] + t_minus * u[2],
    ];
    let p = -t_minus / (t_plus - t_minus);
    Some((a, b, p.clamp(0.0, 1.0)))
}
