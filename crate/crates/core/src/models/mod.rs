//! Concrete model instances and their fine-grained measurement families.

pub mod classical;
pub mod qubit;
pub mod squared;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gpt::{Measurement, Model};
use crate::optimize::Bounds;

/// A coordinate chart for one fine-grained measurement family. Each chart is
/// a plain box of free parameters plus a decoder that fills in whatever the
/// closure constraint determines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FgChart {
    /// One parameter alpha in [0,1].
    SquaredAlpha,
    /// The canonical readout; the box is empty.
    ClassicalCanonical { d: usize },
    /// An n-outcome rank-one family, n in {2,3,4}. Free values are n-1
    /// weights followed by n-1 (theta, phi) direction pairs; for n = 2 the
    /// antipodal pair leaves only one (theta, phi).
    QubitRankOne { n: usize },
}

impl FgChart {
    /// Box of free parameters searched by the optimizer.
    pub fn free_bounds(&self) -> Bounds {
        use std::f64::consts::PI;
        match self {
            FgChart::SquaredAlpha => Bounds::new(vec![0.0], vec![1.0]).unwrap(),
            FgChart::ClassicalCanonical { .. } => Bounds::empty(),
            FgChart::QubitRankOne { n: 2 } => {
                Bounds::new(vec![0.0, 0.0], vec![PI, 2.0 * PI]).unwrap()
            }
            FgChart::QubitRankOne { n } => {
                let m = n - 1;
                let mut lo = vec![0.05; m];
                let mut hi = vec![1.0; m];
                for _ in 0..m {
                    lo.extend_from_slice(&[0.0, 0.0]);
                    hi.extend_from_slice(&[PI, 2.0 * PI]);
                }
                Bounds::new(lo, hi).unwrap()
            }
        }
    }

    /// Decodes a box point into a full parameter set, or `None` where the
    /// closure constraint cannot be met (degenerate qubit configurations).
    pub fn decode(&self, free: &[f64]) -> Option<FgParam> {
        match self {
            FgChart::SquaredAlpha => {
                if free.len() != 1 || !(0.0..=1.0).contains(&free[0]) {
                    return None;
                }
                Some(FgParam {
                    chart: *self,
                    values: free.to_vec(),
                })
            }
            FgChart::ClassicalCanonical { .. } => Some(FgParam {
                chart: *self,
                values: Vec::new(),
            }),
            FgChart::QubitRankOne { n } => {
                let (weights, dirs) = qubit::solve_rank1_family(*n, free)?;
                let mut values = weights;
                for u in dirs {
                    let (theta, phi) = qubit::angles_from_unit(u);
                    values.push(theta);
                    values.push(phi);
                }
                Some(FgParam {
                    chart: *self,
                    values,
                })
            }
        }
    }
}

/// A decoded point of a fine-grained family: the full parameter vector, with
/// all closure-determined entries filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgParam {
    pub chart: FgChart,
    /// Squared: `[alpha]`. Classical: empty. Qubit: `n` weights followed by
    /// `n` (theta, phi) pairs.
    pub values: Vec<f64>,
}

impl FgParam {
    pub fn squared_alpha(alpha: f64) -> FgParam {
        FgParam {
            chart: FgChart::SquaredAlpha,
            values: vec![alpha],
        }
    }

    pub fn classical(d: usize) -> FgParam {
        FgParam {
            chart: FgChart::ClassicalCanonical { d },
            values: Vec::new(),
        }
    }

    /// A projective qubit measurement along `u`.
    pub fn qubit_projective(u: [f64; 3]) -> FgParam {
        let (theta, phi) = qubit::angles_from_unit(u);
        let (t2, p2) = qubit::angles_from_unit([-u[0], -u[1], -u[2]]);
        FgParam {
            chart: FgChart::QubitRankOne { n: 2 },
            values: vec![1.0, 1.0, theta, phi, t2, p2],
        }
    }

    /// Materializes the measurement this parameter point describes.
    pub fn measurement(&self) -> Result<Measurement> {
        match self.chart {
            FgChart::SquaredAlpha => squared::fg_measurement(self.values[0]),
            FgChart::ClassicalCanonical { d } => classical::canonical_measurement(d),
            FgChart::QubitRankOne { n } => {
                let weights = &self.values[..n];
                let dirs: Vec<[f64; 3]> = (0..n)
                    .map(|y| {
                        qubit::unit_from_angles(self.values[n + 2 * y], self.values[n + 2 * y + 1])
                    })
                    .collect();
                qubit::rank1_povm(weights, &dirs)
            }
        }
    }
}

/// The fine-grained measurement charts of a model. Classical fine-grained
/// measurements reduce to the canonical readout (outcome splitting by
/// independent randomness changes neither inf H nor sup I), so the classical
/// family is the single canonical chart.
pub fn fg_charts(model: &Model) -> Vec<FgChart> {
    match model {
        Model::Classical { d } => vec![FgChart::ClassicalCanonical { d: *d }],
        Model::Squared => vec![FgChart::SquaredAlpha],
        Model::Qubit => vec![
            FgChart::QubitRankOne { n: 2 },
            FgChart::QubitRankOne { n: 3 },
            FgChart::QubitRankOne { n: 4 },
        ],
    }
}
