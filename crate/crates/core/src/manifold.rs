//! The supported base manifolds (circle and 2-torus), their periodic
//! quadrature grids, and coordinate tangent frames.
//!
//! Both manifolds are covered by a single periodic chart with period `2π` in
//! each coordinate, so the cotangent bundle is trivial and the Liouville
//! volume of a region `⋃ₓ K(x)` is the base integral of the fiber volumes
//! measured in the dual coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PERIOD: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Circle,
    Torus2,
}

impl Manifold {
    pub fn dim(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus2 => 2,
        }
    }

    pub fn periods(self) -> Vec<f64> {
        vec![PERIOD; self.dim()]
    }

    /// Total coordinate volume of the fundamental domain, `(2π)ⁿ`.
    pub fn total_volume(self) -> f64 {
        PERIOD.powi(self.dim() as i32)
    }

    /// Standard coordinate basis `∂/∂θ₁, …, ∂/∂θₙ`.
    pub fn coordinate_frame(self, _point: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect()
    }
}

/// Uniform periodic (trapezoidal) grid. Nodes are ordered row-major, the first
/// coordinate varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    manifold: Manifold,
    counts: Vec<usize>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(manifold: Manifold, counts: &[usize]) -> Result<Self> {
        if counts.len() != manifold.dim() {
            return Err(Error::mismatch(format!(
                "{manifold:?} needs {} node counts, got {}",
                manifold.dim(),
                counts.len()
            )));
        }
        if counts.contains(&0) {
            return Err(Error::config("node counts must be positive"));
        }
        let total: usize = counts.iter().product();
        let w: f64 = counts.iter().map(|&c| PERIOD / c as f64).product();
        Ok(Self { manifold, counts: counts.to_vec(), weights: vec![w; total] })
    }

    /// Same node count along every coordinate.
    pub fn uniform(manifold: Manifold, nodes_per_dim: usize) -> Result<Self> {
        Self::new(manifold, &vec![nodes_per_dim; manifold.dim()])
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
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

    /// Grid step along coordinate `r`.
    pub fn step(&self, r: usize) -> f64 {
        PERIOD / self.counts[r] as f64
    }

    /// Multi-index of node `idx`.
    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        let mut out = vec![0; self.counts.len()];
        for r in (0..self.counts.len()).rev() {
            out[r] = rem % self.counts[r];
            rem /= self.counts[r];
        }
        out
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx).iter().enumerate().map(|(r, &i)| i as f64 * self.step(r)).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Same nodes and counts, ignoring weights (restriction masks).
    pub fn same_nodes(&self, other: &QuadratureGrid) -> bool {
        self.manifold == other.manifold && self.counts == other.counts
    }

    /// `Σ wᵢ fᵢ`, reduced in node order.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::mismatch(format!("field has {} samples, grid has {} nodes", values.len(), self.len())));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Zero the weights of nodes outside `domain`.
    ///
    /// Boundary cells are not split: when box edges are not multiples of the
    /// grid step, restricted integrals carry an `O(h)` bias.
    pub fn restrict(&self, domain: &SubdomainBox) -> Result<QuadratureGrid> {
        if domain.intervals.len() != self.manifold.dim() {
            return Err(Error::mismatch("subdomain dimension differs from manifold dimension"));
        }
        let mut out = self.clone();
        for (idx, w) in out.weights.iter_mut().enumerate() {
            if !domain.contains(&self.node(idx)) {
                *w = 0.0;
            }
        }
        Ok(out)
    }
}

/// A product of half-open intervals `[lo, hi)` inside the fundamental domain `[0, 2π)ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdomainBox {
    intervals: Vec<(f64, f64)>,
}

impl SubdomainBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(0.0 <= lo && lo <= hi && hi <= PERIOD) {
                return Err(Error::config(format!("interval [{lo}, {hi}) not inside [0, 2π)")));
            }
        }
        Ok(Self { intervals })
    }

    /// The whole fundamental domain.
    pub fn full(manifold: Manifold) -> Self {
        Self { intervals: vec![(0.0, PERIOD); manifold.dim()] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Membership for a point; coordinates are first reduced mod `2π`.
    pub fn contains(&self, point: &[f64]) -> bool {
        self.intervals.iter().zip(point).all(|(&(lo, hi), &x)| {
            let x = x.rem_euclid(PERIOD);
            lo <= x && x < hi
        })
    }
}
