//! One-dimensional rules and their tensor products.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    GaussLegendre,
    /// Equispaced periodic rule; exact for `e^{ikx}` with `|k| < n` on one period.
    Trapezoid,
}

#[derive(Clone, Debug)]
pub struct AxisRule {
    pub kind: AxisKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(kind: AxisKind, n: usize, lo: f64, hi: f64) -> Self {
        match kind {
            AxisKind::GaussLegendre => {
                let (x, w) = gauss_legendre(n);
                let half = 0.5 * (hi - lo);
                AxisRule {
                    kind,
                    nodes: x.iter().map(|t| lo + half * (t + 1.0)).collect(),
                    weights: w.iter().map(|wi| wi * half).collect(),
                }
            }
            AxisKind::Trapezoid => {
                let h = (hi - lo) / n as f64;
                AxisRule { kind, nodes: (0..n).map(|k| lo + h * k as f64).collect(), weights: vec![h; n] }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Per-axis rule kinds and node counts, independent of the integration box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    pub axes: Vec<(AxisKind, usize)>,
}

impl RuleSpec {
    pub fn new(axes: Vec<(AxisKind, usize)>) -> Self {
        RuleSpec { axes }
    }

    /// Same rule with the node count of one axis doubled.
    pub fn doubled(&self, axis: usize) -> Self {
        let mut s = self.clone();
        s.axes[axis].1 *= 2;
        s
    }

    pub fn total_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.1).product()
    }

    pub fn on_box(&self, bounds: &[(f64, f64)]) -> TensorRule {
        assert_eq!(bounds.len(), self.axes.len(), "rule and box dimensions differ");
        TensorRule {
            axes: self.axes.iter().zip(bounds).map(|(&(k, n), &(lo, hi))| AxisRule::new(k, n, lo, hi)).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TensorRule {
    pub axes: Vec<AxisRule>,
}

impl TensorRule {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Visits every node of the sub-product over axes `1..` with its weight.
    pub fn for_each_tail(&self, point: &mut [f64], mut visit: impl FnMut(&[f64], f64)) {
        let d = self.axes.len();
        if d == 1 {
            visit(point, 1.0);
            return;
        }
        let mut idx = vec![0usize; d];
        loop {
            let mut w = 1.0;
            for a in 1..d {
                point[a] = self.axes[a].nodes[idx[a]];
                w *= self.axes[a].weights[idx[a]];
            }
            visit(point, w);
            let mut a = d - 1;
            loop {
                idx[a] += 1;
                if idx[a] < self.axes[a].len() {
                    break;
                }
                idx[a] = 0;
                if a == 1 {
                    return;
                }
                a -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..2 * n {
                let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn trapezoid_is_exact_on_low_frequencies() {
        let r = AxisRule::new(AxisKind::Trapezoid, 4, 0.0, 2.0 * PI);
        for k in 1..4 {
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (k as f64 * x).cos()).sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn tail_iteration_covers_product() {
        let rule = RuleSpec::new(vec![(AxisKind::Trapezoid, 2), (AxisKind::GaussLegendre, 3), (AxisKind::Trapezoid, 5)])
            .on_box(&[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)]);
        let mut count = 0;
        let mut total = 0.0;
        let mut p = vec![0.0; 3];
        rule.for_each_tail(&mut p, |_, w| {
            count += 1;
            total += w;
        });
        assert_eq!(count, 15);
        assert!((total - 6.0).abs() < 1e-13);
    }
}
