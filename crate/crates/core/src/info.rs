//! Classical information primitives, all in bits (binary logarithm).

use crate::error::{Error, Result};
use crate::gpt::{Ensemble, Measurement, Model};

/// Binary entropy with the `0 log 0 = 0` convention, inputs clamped against
/// float noise. Total on all of `f64`; callers own range checking.
pub(crate) fn h(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    term(x) + term(1.0 - x)
}

fn term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of an unvalidated slice, zero terms skipped.
pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    p.iter().map(|&pi| term(pi.max(0.0))).sum()
}

/// `h(x) = -x log x - (1-x) log (1-x)` in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "binary_entropy argument {x} outside [0,1]"
        )));
    }
    Ok(h(x))
}

/// A probability vector; negative float noise down to -1e-12 is clamped to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<ProbVector> {
        if entries.is_empty() {
            return Err(Error::InvalidProbVector("empty".into()));
        }
        if let Some(bad) = entries.iter().find(|&&p| p < -1e-12) {
            return Err(Error::InvalidProbVector(format!("negative entry {bad}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbVector(format!("entries sum to {total}")));
        }
        Ok(ProbVector {
            entries: entries.iter().map(|&p| p.max(0.0)).collect(),
        })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// `H(p) = -sum_i p_i log p_i` in bits.
pub fn shannon_entropy(p: &ProbVector) -> f64 {
    entropy_of(&p.entries)
}

/// A joint law p(x, y): rows indexed by message x, columns by outcome y.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn new(rows: usize, cols: usize, table: Vec<f64>) -> Result<JointDistribution> {
        if rows == 0 || cols == 0 || table.len() != rows * cols {
            return Err(Error::InvalidJoint(format!(
                "{rows}x{cols} table with {} entries",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&p| p < -1e-12) {
            return Err(Error::InvalidJoint(format!("negative entry {bad}")));
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidJoint(format!("entries sum to {total}")));
        }
        Ok(JointDistribution {
            rows,
            cols,
            table: table.iter().map(|&p| p.max(0.0)).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.cols + y]
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|x| self.table[x * self.cols..(x + 1) * self.cols].iter().sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for x in 0..self.rows {
            for (y, acc) in out.iter_mut().enumerate() {
                *acc += self.at(x, y);
            }
        }
        out
    }

    /// Merges outcome columns `a` and `b` into one (coarse-graining).
    pub fn merge_cols(&self, a: usize, b: usize) -> Result<JointDistribution> {
        if a == b || a >= self.cols || b >= self.cols {
            return Err(Error::BadArgument(format!("cannot merge columns {a},{b}")));
        }
        let (keep, drop) = (a.min(b), a.max(b));
        let mut table = Vec::with_capacity(self.rows * (self.cols - 1));
        for x in 0..self.rows {
            for y in 0..self.cols {
                if y == drop {
                    continue;
                }
                let mut v = self.at(x, y);
                if y == keep {
                    v += self.at(x, drop);
                }
                table.push(v);
            }
        }
        JointDistribution::new(self.rows, self.cols - 1, table)
    }
}

/// Joint law of message and outcome when each member of `ens` is read out
/// with measurement `m`: p(x, y) = p_x * m_y(s_x). The measurement is
/// validated once; ensemble members were validated at construction.
pub fn joint_distribution(
    model: &Model,
    ens: &Ensemble,
    m: &Measurement,
) -> Result<JointDistribution> {
    m.validate(model)?;
    let cols = m.outcomes();
    let mut table = Vec::with_capacity(ens.len() * cols);
    for (p, s) in ens.members() {
        let probs = crate::gpt::probs_of_validated(m, s)?;
        table.extend(probs.into_iter().map(|q| p * q));
    }
    JointDistribution::new(ens.len(), cols, table)
}

/// `I(X:Y) = H(X) + H(Y) - H(X,Y)`, clamped to be nonnegative.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    let hx = entropy_of(&j.row_marginal());
    let hy = entropy_of(&j.col_marginal());
    let hxy = entropy_of(&j.table);
    (hx + hy - hxy).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpt::State;
    use crate::models;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Frozen against a 30-digit evaluation of the defining formula.
    const H_02: f64 = 0.721928094887362_35;

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.2).unwrap() - H_02).abs() < 1e-12);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn shannon_entropy_examples() {
        let u = ProbVector::new(vec![0.25; 4]).unwrap();
        assert_eq!(shannon_entropy(&u), 2.0);
        let det = ProbVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&det), 0.0);
        let p = ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert!((shannon_entropy(&p) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn prob_vector_rejects_bad_input() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbVector::new(vec![]).is_err());
    }

    #[test]
    fn joint_distribution_examples() {
        let sq = Model::Squared;
        let ens = Ensemble::new(
            &sq,
            vec![0.5, 0.5],
            vec![State::new(vec![1.0, 0.0]), State::new(vec![0.0, 1.0])],
            true,
        )
        .unwrap();
        let m = models::squared::fg_measurement(1.0).unwrap();
        let j = joint_distribution(&sq, &ens, &m).unwrap();
        let expect = [[0.5, 0.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0]];
        for (x, row) in expect.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                assert!((j.at(x, y) - v).abs() < 1e-12);
            }
        }
        assert!((mutual_information(&j) - 1.0).abs() < 1e-12);

        // Single-member ensemble: the one row is the outcome distribution.
        let s = State::new(vec![0.4, 0.7]);
        let single = Ensemble::trivial(s.clone());
        let m5 = models::squared::fg_measurement(0.5).unwrap();
        let j = joint_distribution(&sq, &single, &m5).unwrap();
        let probs = crate::gpt::measurement_probs(&sq, &m5, &s).unwrap();
        for (y, &p) in probs.iter().enumerate() {
            assert!((j.at(0, y) - p).abs() < 1e-12);
        }

        // All members identical: product law, zero information.
        let same = Ensemble::new(
            &sq,
            vec![0.3, 0.7],
            vec![s.clone(), s.clone()],
            false,
        )
        .unwrap();
        let j = joint_distribution(&sq, &same, &m5).unwrap();
        for x in 0..2 {
            for y in 0..4 {
                let expected = same.weights()[x] * probs[y];
                assert!((j.at(x, y) - expected).abs() < 1e-12);
            }
        }
        assert!(mutual_information(&j).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_diagonal() {
        let j = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&j) - 1.0).abs() < 1e-12);
    }

    fn random_joint(rng: &mut impl Rng) -> JointDistribution {
        let rows = rng.gen_range(2..=5);
        let cols = rng.gen_range(2..=5);
        let mut table: Vec<f64> = (0..rows * cols).map(|_| -(rng.gen::<f64>()).ln()).collect();
        let total: f64 = table.iter().sum();
        table.iter_mut().for_each(|p| *p /= total);
        JointDistribution::new(rows, cols, table).unwrap()
    }

    #[test]
    fn mutual_information_bounds_on_random_joints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let j = random_joint(&mut rng);
            let i = mutual_information(&j);
            let hx = entropy_of(&j.row_marginal());
            let hy = entropy_of(&j.col_marginal());
            assert!(i >= 0.0);
            assert!(i <= hx.min(hy) + 1e-9, "I = {i} > min({hx}, {hy})");
        }
    }

    #[test]
    fn merging_outcomes_never_increases_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let j = random_joint(&mut rng);
            let a = rng.gen_range(0..j.cols());
            let b = (a + 1 + rng.gen_range(0..j.cols() - 1)) % j.cols();
            if a == b {
                continue;
            }
            let merged = j.merge_cols(a, b).unwrap();
            assert!(
                mutual_information(&merged) <= mutual_information(&j) + 1e-9,
                "merge increased information"
            );
        }
    }

    proptest! {
        #[test]
        fn shannon_entropy_is_concave(
            raw_p in proptest::collection::vec(0.01..1.0f64, 4),
            raw_q in proptest::collection::vec(0.01..1.0f64, 4),
            lam in 0.0..1.0f64,
        ) {
            let norm = |v: &[f64]| {
                let t: f64 = v.iter().sum();
                v.iter().map(|x| x / t).collect::<Vec<_>>()
            };
            let p = norm(&raw_p);
            let q = norm(&raw_q);
            let m: Vec<f64> = p.iter().zip(&q).map(|(a, b)| lam * a + (1.0 - lam) * b).collect();
            let hp = entropy_of(&p);
            let hq = entropy_of(&q);
            let hm = entropy_of(&m);
            prop_assert!(hm >= lam * hp + (1.0 - lam) * hq - 1e-9);
        }
    }
}
