//! Banach sets sampled on a quadrature grid: one centrally symmetric convex
//! body per node, in fiber coordinates dual to the chart coordinates.

use std::sync::Arc;

use crate::convex::{self, BodyCombination, ConvexBody};
use crate::error::{Error, Result};
use crate::manifold::{QuadratureGrid, SubdomainBox};

#[derive(Debug, Clone, PartialEq)]
pub struct BanachField {
    grid: Arc<QuadratureGrid>,
    fibers: Arc<Vec<BodyCombination>>,
}

impl BanachField {
    pub fn new(grid: QuadratureGrid, fibers: Vec<BodyCombination>) -> Result<Self> {
        if fibers.len() != grid.len() {
            return Err(Error::mismatch(format!("{} fibers for a grid of {} nodes", fibers.len(), grid.len())));
        }
        let n = grid.manifold().dim();
        if let Some(i) = fibers.iter().position(|f| f.dim().is_some_and(|d| d != n)) {
            return Err(Error::mismatch(format!(
                "fiber at node {i} has dimension {:?}, manifold has {n}",
                fibers[i].dim()
            )));
        }
        Ok(Self { grid: Arc::new(grid), fibers: Arc::new(fibers) })
    }

    /// The same body at every node.
    pub fn constant(grid: QuadratureGrid, body: ConvexBody) -> Result<Self> {
        let fiber = BodyCombination::single(body);
        let fibers = vec![fiber; grid.len()];
        Self::new(grid, fibers)
    }

    pub fn from_fn(grid: QuadratureGrid, mut f: impl FnMut(&[f64]) -> Result<ConvexBody>) -> Result<Self> {
        let fibers = grid.nodes().map(|x| f(&x).map(BodyCombination::single)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, fibers)
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn fibers(&self) -> &[BodyCombination] {
        &self.fibers
    }

    pub fn fiber(&self, idx: usize) -> &BodyCombination {
        &self.fibers[idx]
    }

    pub fn dim(&self) -> usize {
        self.grid.manifold().dim()
    }

    /// Nodewise Minkowski combination `Σ λᵢ ℰᵢ`.
    pub fn combine(terms: &[(f64, &BanachField)]) -> Result<BanachField> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::mismatch("empty combination"));
        };
        for (c, f) in terms {
            if !(*c >= 0.0) {
                return Err(Error::numeric("Banach field combinations need nonnegative coefficients"));
            }
            if f.grid != first.grid {
                return Err(Error::mismatch("combined fields live on different grids"));
            }
        }
        let fibers = (0..first.grid.len())
            .map(|idx| {
                let mut body = BodyCombination::default();
                for (c, f) in terms {
                    body.add_scaled(*c, &f.fibers[idx]);
                }
                body
            })
            .collect();
        Ok(Self { grid: first.grid.clone(), fibers: Arc::new(fibers) })
    }

    pub fn scaled(&self, c: f64) -> Result<BanachField> {
        Self::combine(&[(c, self)])
    }

    /// Liouville volume of `⋃ₓ ℰ(x)`: the base integral of fiber volumes.
    pub fn volume(&self) -> Result<f64> {
        let vols = self.fibers.iter().map(|b| b.volume()).collect::<Result<Vec<_>>>()?;
        self.grid.integrate(&vols)
    }

    /// Mixed volume `vol(ℰ₁, …, ℰₙ)`: the base integral of fiber mixed volumes.
    pub fn mixed_volume(fields: &[&BanachField]) -> Result<f64> {
        let Some(first) = fields.first() else {
            return Err(Error::mismatch("mixed volume of zero fields"));
        };
        let n = first.dim();
        if fields.len() != n {
            return Err(Error::mismatch(format!(
                "mixed volume on an {n}-manifold needs {n} fields, got {}",
                fields.len()
            )));
        }
        if fields.iter().any(|f| f.grid != first.grid) {
            return Err(Error::mismatch("fields live on different grids"));
        }
        let mut values = Vec::with_capacity(first.grid.len());
        let mut slots = Vec::with_capacity(n);
        for idx in 0..first.grid.len() {
            slots.clear();
            slots.extend(fields.iter().map(|f| f.fibers[idx].clone()));
            values.push(convex::mixed_volume(&slots, n)?);
        }
        first.grid.integrate(&values)
    }

    /// `Res_U ℰ`: same fibers, quadrature weights zeroed outside `domain`.
    pub fn restrict(&self, domain: &SubdomainBox) -> Result<BanachField> {
        Ok(Self { grid: Arc::new(self.grid.restrict(domain)?), fibers: self.fibers.clone() })
    }
}

/// Formal difference `Σ⁺ cᵢ ℰᵢ − Σ⁻ dⱼ ℬⱼ` of Banach fields.
#[derive(Debug, Clone, Default)]
pub struct VirtualBanachField {
    pub positive: Vec<(f64, BanachField)>,
    pub negative: Vec<(f64, BanachField)>,
}

impl From<BanachField> for VirtualBanachField {
    fn from(f: BanachField) -> Self {
        Self { positive: vec![(1.0, f)], negative: Vec::new() }
    }
}

impl VirtualBanachField {
    pub fn difference(plus: BanachField, minus: BanachField) -> Self {
        Self { positive: vec![(1.0, plus)], negative: vec![(1.0, minus)] }
    }

    /// `(−1)·(ℰ − ℬ) = ℬ − ℰ`.
    pub fn neg(&self) -> Self {
        Self { positive: self.negative.clone(), negative: self.positive.clone() }
    }

    /// Multiplication by any real; negative scalars swap the two parts.
    pub fn scale(&self, c: f64) -> Self {
        let a = c.abs();
        let pos = self.positive.iter().map(|(k, f)| (k * a, f.clone())).collect();
        let neg = self.negative.iter().map(|(k, f)| (k * a, f.clone())).collect();
        let v = Self { positive: pos, negative: neg };
        if c < 0.0 {
            v.neg()
        } else {
            v
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut v = self.clone();
        v.positive.extend(other.positive.iter().cloned());
        v.negative.extend(other.negative.iter().cloned());
        v
    }

    /// Signed terms `(±c, field)`.
    pub fn signed_terms(&self) -> impl Iterator<Item = (f64, &BanachField)> {
        self.positive.iter().map(|(c, f)| (*c, f)).chain(self.negative.iter().map(|(c, f)| (-c, f)))
    }

    /// Evaluate a multilinear functional of concrete fields on virtual
    /// arguments by expanding every slot into its signed terms.
    pub fn eval_multilinear(
        slots: &[VirtualBanachField],
        functional: impl Fn(&[&BanachField]) -> Result<f64>,
    ) -> Result<f64> {
        let terms: Vec<Vec<(f64, &BanachField)>> = slots.iter().map(|s| s.signed_terms().collect()).collect();
        let mut total = 0.0;
        let mut idx = vec![0usize; slots.len()];
        if terms.iter().any(Vec::is_empty) {
            return Ok(0.0);
        }
        loop {
            let coef: f64 = idx.iter().enumerate().map(|(s, &i)| terms[s][i].0).product();
            if coef != 0.0 {
                let fields: Vec<&BanachField> = idx.iter().enumerate().map(|(s, &i)| terms[s][i].1).collect();
                total += coef * functional(&fields)?;
            }
            // odometer increment
            let mut s = 0;
            loop {
                if s == slots.len() {
                    return Ok(total);
                }
                idx[s] += 1;
                if idx[s] < terms[s].len() {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
        }
    }

    /// Mixed volume with virtual arguments, by multilinear expansion.
    pub fn mixed_volume(slots: &[VirtualBanachField]) -> Result<f64> {
        Self::eval_multilinear(slots, BanachField::mixed_volume)
    }
}
