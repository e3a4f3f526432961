//! Stereographic charts on round spheres and flat tori.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    /// Projection from the north pole; `y = 0` is the south pole.
    North,
    /// Projection from the south pole; `y = 0` is the north pole.
    South,
}

/// Stereographic chart of the unit sphere `Sⁿ ⊂ Rⁿ⁺¹`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StereoChart {
    pub n: usize,
    pub pole: Pole,
}

impl StereoChart {
    pub fn new(n: usize, pole: Pole) -> Self {
        StereoChart { n, pole }
    }

    fn sign(&self) -> f64 {
        match self.pole {
            Pole::North => 1.0,
            Pole::South => -1.0,
        }
    }

    pub fn embed(&self, y: &[f64]) -> DVector<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let d = 1.0 + r2;
        let mut x = DVector::zeros(self.n + 1);
        for i in 0..self.n {
            x[i] = 2.0 * y[i] / d;
        }
        x[self.n] = self.sign() * (r2 - 1.0) / d;
        x
    }

    /// Inverse projection; undefined at the projection pole.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        let denom = 1.0 - self.sign() * x[self.n];
        (0..self.n).map(|i| x[i] / denom).collect()
    }

    /// `∂x/∂y`, an `(n+1) × n` matrix whose columns are the coordinate vectors.
    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let r2: f64 = y.iter().map(|v| v * v).sum();
        let d = 1.0 + r2;
        let mut e = DMatrix::zeros(n + 1, n);
        for j in 0..n {
            for i in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                e[(i, j)] = 2.0 * delta / d - 4.0 * y[i] * y[j] / (d * d);
            }
            e[(n, j)] = self.sign() * 4.0 * y[j] / (d * d);
        }
        e
    }

    /// Round metric `4 / (1 + |y|²)² δ`.
    pub fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        DMatrix::identity(self.n, self.n) * (4.0 / ((1.0 + r2) * (1.0 + r2)))
    }

    /// Coordinates of the same point in the opposite chart, `y / |y|²`.
    pub fn transition(&self, y: &[f64]) -> Vec<f64> {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        y.iter().map(|v| v / r2).collect()
    }

    pub fn opposite(&self) -> StereoChart {
        StereoChart {
            n: self.n,
            pole: match self.pole {
                Pole::North => Pole::South,
                Pole::South => Pole::North,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ChartKind {
    Stereo(StereoChart),
    /// Flat coordinates on a torus of the given period.
    Torus { dim: usize, period: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartSpec {
    pub id: String,
    pub kind: ChartKind,
    pub param_box: Vec<(f64, f64)>,
}

impl ChartSpec {
    pub fn metric(&self, y: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            ChartKind::Stereo(c) => c.metric(y),
            ChartKind::Torus { dim, .. } => DMatrix::identity(*dim, *dim),
        }
    }
}

/// A manifold covered by charts, with a finite-difference step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartAtlas {
    pub manifold: String,
    pub charts: Vec<ChartSpec>,
    pub step: f64,
}

impl ChartAtlas {
    /// Two stereographic charts, each covering `|y_i| ≤ radius`; with
    /// `radius = 1.25` the overlap collar around the equator is 25% wide.
    pub fn sphere(n: usize, radius: f64, step: f64) -> Self {
        let charts = [Pole::North, Pole::South]
            .into_iter()
            .map(|p| ChartSpec {
                id: format!("{:?}", p).to_lowercase(),
                kind: ChartKind::Stereo(StereoChart::new(n, p)),
                param_box: vec![(-radius, radius); n],
            })
            .collect();
        ChartAtlas { manifold: format!("S{n}"), charts, step }
    }

    pub fn torus(dim: usize, period: f64, step: f64) -> Self {
        ChartAtlas {
            manifold: format!("T{dim}"),
            charts: vec![ChartSpec {
                id: "flat".into(),
                kind: ChartKind::Torus { dim, period },
                param_box: vec![(0.0, period); dim],
            }],
            step,
        }
    }

    pub fn dim(&self) -> usize {
        self.charts[0].param_box.len()
    }

    /// Max round-trip error `φ₂₁(φ₁₂(y)) − y` and embedding mismatch over overlap samples.
    pub fn transition_residual(&self, samples: &[Vec<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.charts {
            if let ChartKind::Stereo(s) = &c.kind {
                for y in samples {
                    let z = s.transition(y);
                    let back = s.opposite().transition(&z);
                    let there = s.opposite().embed(&z);
                    let here = s.embed(y);
                    let r = y.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst = worst.max(r).max((here - there).amax());
                }
            }
        }
        worst
    }
}
