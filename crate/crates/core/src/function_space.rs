//! Finite-dimensional spaces `V` of smooth functions on the base manifold,
//! their inner products, and the ellipsoid field `ℰ_V` obtained from the
//! normalized evaluation map `Θ(x) = θ(x)/‖θ(x)‖`.
//!
//! With `{eᵢ}` an orthonormal basis of `V`, the evaluation functional has
//! coordinates `e(x) = (eᵢ(x))ᵢ`. Differentiating `e/‖e‖` and taking the
//! adjoint gives the `n × N` matrix
//!
//! ```text
//! D(x) = (De(x) − (De(x)·ê) êᵀ) / ‖e(x)‖,    ê = e/‖e‖,
//! ```
//!
//! and `ℰ_V(x) = D(x)·B` is the ellipsoid with support matrix `D Dᵀ`.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::banach_field::BanachField;
use crate::convex::{BodyCombination, ConvexBody, Ellipsoid};
use crate::error::{Error, Result};
use crate::manifold::{Manifold, QuadratureGrid, PERIOD};

/// Gram matrices with condition number above this are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProductRule {
    /// `⟨f, g⟩ = (1/vol X) ∫_X f g`
    #[default]
    NormalizedL2,
    /// `⟨f, g⟩ = ∫_X f g`
    PlainL2,
    /// Identity Gram on the given basis.
    CoefficientWise,
}

/// One-variable trigonometric factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigFactor {
    Const,
    Cos(u32),
    Sin(u32),
}

impl TrigFactor {
    #[inline]
    pub fn value(self, t: f64) -> f64 {
        match self {
            TrigFactor::Const => 1.0,
            TrigFactor::Cos(k) => (k as f64 * t).cos(),
            TrigFactor::Sin(k) => (k as f64 * t).sin(),
        }
    }

    #[inline]
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            TrigFactor::Const => 0.0,
            TrigFactor::Cos(k) => -(k as f64) * (k as f64 * t).sin(),
            TrigFactor::Sin(k) => k as f64 * (k as f64 * t).cos(),
        }
    }

    /// `(1/2π) ∫₀^{2π} self · other`.
    fn normalized_product(self, other: TrigFactor) -> f64 {
        match (self, other) {
            (TrigFactor::Const, TrigFactor::Const) => 1.0,
            (TrigFactor::Cos(a), TrigFactor::Cos(b)) | (TrigFactor::Sin(a), TrigFactor::Sin(b)) if a == b => 0.5,
            _ => 0.0,
        }
    }
}

/// Tensor-product trigonometric basis: every tuple of one factor per coordinate.
/// Basis functions are ordered row-major over the per-coordinate factor lists.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigBasis {
    factors: Vec<Vec<TrigFactor>>,
}

impl TrigBasis {
    /// Per coordinate: `{1 (if included), cos kθ, sin kθ : 1 ≤ k ≤ degree}`.
    pub fn new(degrees: &[u32], include_constant: bool) -> Result<Self> {
        let mut factors = Vec::with_capacity(degrees.len());
        for &m in degrees {
            let mut list = Vec::with_capacity(2 * m as usize + 1);
            if include_constant {
                list.push(TrigFactor::Const);
            }
            for k in 1..=m {
                list.push(TrigFactor::Cos(k));
                list.push(TrigFactor::Sin(k));
            }
            if list.is_empty() {
                return Err(Error::config("degree 0 without the constant term gives an empty space"));
            }
            factors.push(list);
        }
        Ok(Self { factors })
    }

    pub fn from_factors(factors: Vec<Vec<TrigFactor>>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
            return Err(Error::config("empty factor list"));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[Vec<TrigFactor>] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_degree(&self) -> u32 {
        self.factors
            .iter()
            .flatten()
            .map(|f| match f {
                TrigFactor::Const => 0,
                TrigFactor::Cos(k) | TrigFactor::Sin(k) => *k,
            })
            .max()
            .unwrap_or(0)
    }

    fn tuple(&self, mut idx: usize) -> Vec<TrigFactor> {
        let mut out = vec![TrigFactor::Const; self.factors.len()];
        for r in (0..self.factors.len()).rev() {
            let k = self.factors[r].len();
            out[r] = self.factors[r][idx % k];
            idx /= k;
        }
        out
    }

    /// Values and first partials of every basis function at `x`.
    /// `grads` is `n × N`, row `r` holding `∂/∂θ_r`.
    pub fn eval(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.factors.len();
        let big_n = self.len();
        let mut values = DVector::zeros(big_n);
        let mut grads = DMatrix::zeros(n, big_n);
        for j in 0..big_n {
            let tuple = self.tuple(j);
            let vals: Vec<f64> = tuple.iter().zip(x).map(|(f, &t)| f.value(t)).collect();
            values[j] = vals.iter().product();
            for r in 0..n {
                let mut g = tuple[r].derivative(x[r]);
                for (s, v) in vals.iter().enumerate() {
                    if s != r {
                        g *= v;
                    }
                }
                grads[(r, j)] = g;
            }
        }
        (values, grads)
    }

    /// Closed-form Gram matrix from trigonometric orthogonality.
    pub fn gram(&self, rule: InnerProductRule) -> DMatrix<f64> {
        let big_n = self.len();
        let n = self.factors.len();
        match rule {
            InnerProductRule::CoefficientWise => DMatrix::identity(big_n, big_n),
            InnerProductRule::NormalizedL2 | InnerProductRule::PlainL2 => {
                let scale = if rule == InnerProductRule::PlainL2 { PERIOD.powi(n as i32) } else { 1.0 };
                let tuples: Vec<Vec<TrigFactor>> = (0..big_n).map(|j| self.tuple(j)).collect();
                DMatrix::from_fn(big_n, big_n, |a, b| {
                    scale * tuples[a].iter().zip(&tuples[b]).map(|(f, g)| f.normalized_product(*g)).product::<f64>()
                })
            }
        }
    }
}

/// Basis values and derivatives tabulated on a quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedBasis {
    counts: Vec<usize>,
    basis_count: usize,
    /// `nodes × N`, row-major.
    values: Vec<f64>,
    /// `nodes × N × n`, row-major.
    derivatives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Basis {
    Trig(TrigBasis),
    Tabulated(TabulatedBasis),
}

impl Basis {
    pub fn len(&self) -> usize {
        match self {
            Basis::Trig(b) => b.len(),
            Basis::Tabulated(t) => t.basis_count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Inner product on `V`, as a rule tag (when built-in) plus its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProduct {
    pub rule: Option<InnerProductRule>,
    pub gram: DMatrix<f64>,
}

/// Change of basis `R` with `R G Rᵀ = I`: row `i` holds the raw coefficients of `eᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFrame {
    r: DMatrix<f64>,
}

impl OrthonormalFrame {
    /// `R = Λ^{-1/2} Qᵀ` from `G = Q Λ Qᵀ`.
    pub fn from_gram(gram: &DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() || gram.nrows() == 0 {
            return Err(Error::numeric("Gram matrix must be square and nonempty"));
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("Gram matrix has non-finite entries"));
        }
        let asym = (gram - gram.transpose()).abs().max();
        let scale = gram.abs().max();
        if asym > 1e-10 * scale {
            return Err(Error::numeric("Gram matrix is not symmetric"));
        }
        let sym = (gram + gram.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(min > 0.0) {
            return Err(Error::numeric(format!("Gram matrix is not positive definite (smallest eigenvalue {min:e})")));
        }
        if max / min > MAX_GRAM_CONDITION {
            return Err(Error::numeric(format!(
                "Gram matrix condition number {:e} exceeds {MAX_GRAM_CONDITION:e}",
                max / min
            )));
        }
        let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
        let r = DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
        Ok(Self { r })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }
}

/// A finite-dimensional function space with an inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpace {
    manifold: Manifold,
    basis: Basis,
    inner: InnerProduct,
    frame: OrthonormalFrame,
    warnings: Vec<String>,
}

/// Per-node orthonormal evaluation data: `e(x)` and `De(x)` (`n × N`).
#[derive(Debug, Clone)]
pub struct EllipsoidFieldSpec {
    pub values: Vec<DVector<f64>>,
    pub derivatives: Vec<DMatrix<f64>>,
}

impl EllipsoidFieldSpec {
    /// The factor `D = (De − (De·ê)êᵀ)/|e|` at node `idx`, so that `M(x) = D Dᵀ`.
    pub fn ellipsoid_factor(&self, idx: usize) -> Result<DMatrix<f64>> {
        let e = &self.values[idx];
        let de = &self.derivatives[idx];
        let norm = e.norm();
        if !(norm > 0.0) {
            return Err(Error::numeric(format!("every function in V vanishes at node {idx}: θ(x) = 0")));
        }
        let hat = e / norm;
        let radial = de * &hat;
        Ok((de - radial * hat.transpose()) / norm)
    }

    /// Support matrix `M(x) = D Dᵀ` at node `idx`.
    pub fn ellipsoid_matrix(&self, idx: usize) -> Result<DMatrix<f64>> {
        let d = self.ellipsoid_factor(idx)?;
        Ok(&d * d.transpose())
    }
}

impl FunctionSpace {
    /// Trigonometric space on the circle or torus. On the torus `degrees` are
    /// per coordinate and the basis is the full tensor product; a degree of 0
    /// with the constant term gives a factor that does not depend on that
    /// coordinate.
    pub fn trig(manifold: Manifold, degrees: &[u32], include_constant: bool, rule: InnerProductRule) -> Result<Self> {
        if degrees.len() != manifold.dim() {
            return Err(Error::config(format!("{manifold:?} needs {} degrees, got {}", manifold.dim(), degrees.len())));
        }
        let basis = TrigBasis::new(degrees, include_constant)?;
        let gram = basis.gram(rule);
        let frame = OrthonormalFrame::from_gram(&gram)?;
        Ok(Self {
            manifold,
            basis: Basis::Trig(basis),
            inner: InnerProduct { rule: Some(rule), gram },
            frame,
            warnings: Vec::new(),
        })
    }

    /// A trigonometric space from explicit factor lists and a user Gram matrix.
    pub fn trig_with_gram(manifold: Manifold, basis: TrigBasis, gram: DMatrix<f64>) -> Result<Self> {
        if basis.factors.len() != manifold.dim() {
            return Err(Error::config("factor lists must match the manifold dimension"));
        }
        if gram.nrows() != basis.len() {
            return Err(Error::mismatch("Gram size differs from basis size"));
        }
        let frame = OrthonormalFrame::from_gram(&gram)?;
        Ok(Self {
            manifold,
            basis: Basis::Trig(basis),
            inner: InnerProduct { rule: None, gram },
            frame,
            warnings: Vec::new(),
        })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn inner_product(&self) -> &InnerProduct {
        &self.inner
    }

    pub fn frame(&self) -> &OrthonormalFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Diagnostics collected while loading (derivative consistency).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Same space with the Gram matrix multiplied by `c > 0`.
    pub fn with_scaled_inner_product(&self, c: f64) -> Result<Self> {
        let gram = &self.inner.gram * c;
        let frame = OrthonormalFrame::from_gram(&gram)?;
        Ok(Self { inner: InnerProduct { rule: None, gram }, frame, ..self.clone() })
    }

    /// Largest trigonometric degree, if the basis is trigonometric.
    pub fn max_degree(&self) -> Option<u32> {
        match &self.basis {
            Basis::Trig(b) => Some(b.max_degree()),
            Basis::Tabulated(_) => None,
        }
    }

    fn raw_at_node(&self, grid: &QuadratureGrid, idx: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
        match &self.basis {
            Basis::Trig(b) => Ok(b.eval(&grid.node(idx))),
            Basis::Tabulated(t) => {
                if t.counts != grid.counts() {
                    return Err(Error::mismatch(format!(
                        "tabulated basis lives on grid {:?}, requested {:?}",
                        t.counts,
                        grid.counts()
                    )));
                }
                let big_n = t.basis_count;
                let n = self.manifold.dim();
                let values = DVector::from_column_slice(&t.values[idx * big_n..(idx + 1) * big_n]);
                let base = idx * big_n * n;
                let grads = DMatrix::from_fn(n, big_n, |r, j| t.derivatives[base + j * n + r]);
                Ok((values, grads))
            }
        }
    }

    /// Orthonormal coordinates `e(x)` and `De(x)` at every grid node.
    pub fn field_spec(&self, grid: &QuadratureGrid) -> Result<EllipsoidFieldSpec> {
        if grid.manifold() != self.manifold {
            return Err(Error::mismatch("space and grid live on different manifolds"));
        }
        let r = self.frame.matrix();
        let mut values = Vec::with_capacity(grid.len());
        let mut derivatives = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let (v, g) = self.raw_at_node(grid, idx)?;
            values.push(r * v);
            derivatives.push(g * r.transpose());
        }
        Ok(EllipsoidFieldSpec { values, derivatives })
    }

    /// The Banach field `ℰ_V`: at each node the ellipsoid `d*Θₓ(B)`.
    pub fn ellipsoid_field(&self, grid: &QuadratureGrid) -> Result<BanachField> {
        let spec = self.field_spec(grid)?;
        let fibers = (0..grid.len())
            .map(|idx| {
                let d = spec.ellipsoid_factor(idx)?;
                Ok(BodyCombination::single(ConvexBody::Ellipsoid(Ellipsoid::from_factor(d)?)))
            })
            .collect::<Result<Vec<_>>>()?;
        BanachField::new(grid.clone(), fibers)
    }

    /// Draw `f = Σ zᵢ eᵢ` with `zᵢ` independent standard normals.
    pub fn gaussian_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RandomFunction<'_> {
        let big_n = self.dim();
        let z = DVector::from_iterator(big_n, (0..big_n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let coeffs = self.frame.matrix().transpose() * z;
        RandomFunction { space: self, coeffs: coeffs.iter().cloned().collect() }
    }

    /// Precomputed evaluator for random functions on a shifted uniform grid:
    /// coordinate `r` is sampled at `offsets[r] + i·2π/counts[r]`.
    pub fn grid_evaluator(&self, counts: &[usize], offsets: &[f64]) -> Result<GridEvaluator> {
        let n = self.manifold.dim();
        if counts.len() != n || offsets.len() != n {
            return Err(Error::mismatch("grid evaluator dimension differs from manifold"));
        }
        match &self.basis {
            Basis::Trig(b) => {
                let tables = b
                    .factors
                    .iter()
                    .zip(counts.iter().zip(offsets))
                    .map(|(facs, (&c, &off))| {
                        let k = facs.len();
                        let mut t = vec![0.0; c * k];
                        for i in 0..c {
                            let theta = off + i as f64 * PERIOD / c as f64;
                            for (j, f) in facs.iter().enumerate() {
                                t[i * k + j] = f.value(theta);
                            }
                        }
                        t
                    })
                    .collect();
                Ok(GridEvaluator {
                    counts: counts.to_vec(),
                    kind: EvaluatorKind::Trig { sizes: b.factors.iter().map(Vec::len).collect(), tables },
                })
            }
            Basis::Tabulated(t) => Ok(GridEvaluator {
                counts: counts.to_vec(),
                kind: EvaluatorKind::Tabulated { basis: t.clone(), offsets: offsets.to_vec() },
            }),
        }
    }

    /// Load a basis tabulated on `grid` from a JSON file (schema: [`TabulatedSpaceFile`]).
    pub fn load_tabulated(path: impl AsRef<Path>, manifold: Manifold, grid: &QuadratureGrid) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let file: TabulatedSpaceFile =
            serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_tabulated(&file, manifold, grid)
    }

    pub fn from_tabulated(file: &TabulatedSpaceFile, manifold: Manifold, grid: &QuadratureGrid) -> Result<Self> {
        if file.manifold != manifold || grid.manifold() != manifold {
            return Err(Error::config(format!("tabulated space is on {:?}, expected {manifold:?}", file.manifold)));
        }
        if file.grid != grid.counts() {
            return Err(Error::config(format!(
                "tabulated grid {:?} differs from active grid {:?}",
                file.grid,
                grid.counts()
            )));
        }
        let n = manifold.dim();
        let big_n = file.basis_count;
        if big_n == 0 {
            return Err(Error::config("basis_count must be positive"));
        }
        if file.nodes.len() != grid.len() {
            return Err(Error::config(format!(
                "tabulated space has {} nodes, grid has {}",
                file.nodes.len(),
                grid.len()
            )));
        }
        if file.gram.len() != big_n * big_n {
            return Err(Error::config(format!("gram must have {} entries", big_n * big_n)));
        }
        let mut values = Vec::with_capacity(grid.len() * big_n);
        let mut derivatives = Vec::with_capacity(grid.len() * big_n * n);
        for (idx, node) in file.nodes.iter().enumerate() {
            if node.values.len() != big_n {
                return Err(Error::config(format!("node {idx}: expected {big_n} values")));
            }
            if node.derivatives.len() != big_n * n {
                return Err(Error::config(format!(
                    "node {idx}: expected {} derivative entries, got {}",
                    big_n * n,
                    node.derivatives.len()
                )));
            }
            values.extend_from_slice(&node.values);
            derivatives.extend_from_slice(&node.derivatives);
        }
        let gram = DMatrix::from_row_slice(big_n, big_n, &file.gram);
        let frame = OrthonormalFrame::from_gram(&gram)?;
        let basis = TabulatedBasis { counts: grid.counts().to_vec(), basis_count: big_n, values, derivatives };
        let warnings = derivative_consistency(&basis, grid);
        Ok(Self { manifold, basis: Basis::Tabulated(basis), inner: InnerProduct { rule: None, gram }, frame, warnings })
    }

    /// Tabulate this space on `grid` in the file schema.
    pub fn to_tabulated(&self, grid: &QuadratureGrid) -> Result<TabulatedSpaceFile> {
        let n = self.manifold.dim();
        let big_n = self.dim();
        let nodes = (0..grid.len())
            .map(|idx| {
                let (v, g) = self.raw_at_node(grid, idx)?;
                let mut derivatives = Vec::with_capacity(big_n * n);
                for j in 0..big_n {
                    for r in 0..n {
                        derivatives.push(g[(r, j)]);
                    }
                }
                Ok(TabulatedNode { values: v.iter().cloned().collect(), derivatives })
            })
            .collect::<Result<Vec<_>>>()?;
        let g = &self.inner.gram;
        Ok(TabulatedSpaceFile {
            manifold: self.manifold,
            grid: grid.counts().to_vec(),
            basis_count: big_n,
            gram: (0..big_n).flat_map(|a| (0..big_n).map(move |b| g[(a, b)])).collect(),
            nodes,
        })
    }
}

/// Relative error threshold above which tabulated derivatives draw a warning.
const DERIVATIVE_WARN: f64 = 1e-3;

/// Compare tabulated derivatives with central differences of the tabulated values.
fn derivative_consistency(t: &TabulatedBasis, grid: &QuadratureGrid) -> Vec<String> {
    let n = t.counts.len();
    let big_n = t.basis_count;
    let mut warnings = Vec::new();
    for r in 0..n {
        if t.counts[r] < 3 {
            continue;
        }
        let h = grid.step(r);
        for j in 0..big_n {
            let mut err: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for idx in 0..grid.len() {
                let mi = grid.multi_index(idx);
                let shifted = |delta: isize| {
                    let mut m = mi.clone();
                    m[r] = (m[r] as isize + delta).rem_euclid(t.counts[r] as isize) as usize;
                    let flat = m.iter().zip(&t.counts).fold(0, |acc, (&i, &c)| acc * c + i);
                    t.values[flat * big_n + j]
                };
                let fd = (shifted(1) - shifted(-1)) / (2.0 * h);
                let tab = t.derivatives[idx * big_n * n + j * n + r];
                err = err.max((fd - tab).abs());
                scale = scale.max(tab.abs());
            }
            if scale > 0.0 && err > DERIVATIVE_WARN * scale {
                warnings.push(format!(
                    "basis function {j}: tabulated d/dθ{} disagrees with finite differences (rel err {:.3e})",
                    r + 1,
                    err / scale
                ));
            }
        }
    }
    warnings
}

/// On-disk schema of a tabulated space (JSON).
///
/// `gram` is `N × N` row-major. `nodes` are in grid row-major order; each has
/// `N` values and `N × n` derivatives, grouped per basis function
/// (`[∂₁b₀, …, ∂ₙb₀, ∂₁b₁, …]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedSpaceFile {
    pub manifold: Manifold,
    pub grid: Vec<usize>,
    pub basis_count: usize,
    pub gram: Vec<f64>,
    pub nodes: Vec<TabulatedNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedNode {
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

/// A sampled element of `V`, stored by its raw-basis coefficients.
#[derive(Debug, Clone)]
pub struct RandomFunction<'a> {
    space: &'a FunctionSpace,
    coeffs: Vec<f64>,
}

impl<'a> RandomFunction<'a> {
    pub fn from_coefficients(space: &'a FunctionSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::mismatch("coefficient count differs from space dimension"));
        }
        Ok(Self { space, coeffs })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn space(&self) -> &FunctionSpace {
        self.space
    }

    /// Value at an arbitrary chart point. Tabulated spaces interpolate
    /// (multi)linearly between nodes.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.space.basis {
            Basis::Trig(b) => {
                let (v, _) = b.eval(x);
                v.iter().zip(&self.coeffs).map(|(a, c)| a * c).sum()
            }
            Basis::Tabulated(t) => tabulated_interpolate(t, &self.coeffs, x),
        }
    }

    /// Gradient at a point (trigonometric spaces only; tabulated spaces
    /// return the derivative at the nearest node).
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.space.basis {
            Basis::Trig(b) => {
                let (_, g) = b.eval(x);
                let c = DVector::from_column_slice(&self.coeffs);
                (g * c).iter().cloned().collect()
            }
            Basis::Tabulated(t) => {
                let n = t.counts.len();
                let flat = x.iter().zip(&t.counts).fold(0, |acc, (&xi, &c)| {
                    let i = (xi.rem_euclid(PERIOD) / (PERIOD / c as f64)).round() as usize % c;
                    acc * c + i
                });
                (0..n)
                    .map(|r| {
                        (0..t.basis_count)
                            .map(|j| self.coeffs[j] * t.derivatives[flat * t.basis_count * n + j * n + r])
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

fn tabulated_interpolate(t: &TabulatedBasis, coeffs: &[f64], x: &[f64]) -> f64 {
    let n = t.counts.len();
    let node_value = |m: &[usize]| {
        let flat = m.iter().zip(&t.counts).fold(0, |acc, (&i, &c)| acc * c + i);
        (0..t.basis_count).map(|j| coeffs[j] * t.values[flat * t.basis_count + j]).sum::<f64>()
    };
    let mut base = vec![0usize; n];
    let mut frac = vec![0.0; n];
    for r in 0..n {
        let s = x[r].rem_euclid(PERIOD) / (PERIOD / t.counts[r] as f64);
        let fl = s.floor();
        base[r] = (fl as usize) % t.counts[r];
        frac[r] = s - fl;
    }
    let mut total = 0.0;
    for corner in 0..(1usize << n) {
        let mut w = 1.0;
        let mut m = base.clone();
        for r in 0..n {
            if corner & (1 << r) != 0 {
                w *= frac[r];
                m[r] = (m[r] + 1) % t.counts[r];
            } else {
                w *= 1.0 - frac[r];
            }
        }
        if w != 0.0 {
            total += w * node_value(&m);
        }
    }
    total
}

#[derive(Debug, Clone)]
enum EvaluatorKind {
    Trig { sizes: Vec<usize>, tables: Vec<Vec<f64>> },
    Tabulated { basis: TabulatedBasis, offsets: Vec<f64> },
}

/// Evaluates raw-coefficient vectors on a fixed (possibly shifted) uniform grid.
#[derive(Debug, Clone)]
pub struct GridEvaluator {
    counts: Vec<usize>,
    kind: EvaluatorKind,
}

impl GridEvaluator {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Grid values, row-major with the first coordinate slowest.
    pub fn eval(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.kind {
            EvaluatorKind::Trig { sizes, tables } => match sizes.len() {
                1 => {
                    let k = sizes[0];
                    tables[0].chunks_exact(k).map(|row| dot(row, coeffs)).collect()
                }
                2 => {
                    let (k1, k2) = (sizes[0], sizes[1]);
                    let (n1, n2) = (self.counts[0], self.counts[1]);
                    // partial[j1][i2] = Σ_{j2} C[j1][j2] T2[i2][j2]
                    let mut partial = vec![0.0; k1 * n2];
                    for j1 in 0..k1 {
                        let c = &coeffs[j1 * k2..(j1 + 1) * k2];
                        for (i2, row) in tables[1].chunks_exact(k2).enumerate() {
                            partial[j1 * n2 + i2] = dot(row, c);
                        }
                    }
                    let mut out = vec![0.0; n1 * n2];
                    for (i1, t1) in tables[0].chunks_exact(k1).enumerate() {
                        let dst = &mut out[i1 * n2..(i1 + 1) * n2];
                        for (j1, &w) in t1.iter().enumerate() {
                            if w == 0.0 {
                                continue;
                            }
                            let src = &partial[j1 * n2..(j1 + 1) * n2];
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += w * s;
                            }
                        }
                    }
                    out
                }
                _ => unreachable!("manifolds have dimension 1 or 2"),
            },
            EvaluatorKind::Tabulated { basis, offsets } => {
                let total: usize = self.counts.iter().product();
                (0..total)
                    .map(|idx| {
                        let mut rem = idx;
                        let mut x = vec![0.0; self.counts.len()];
                        for r in (0..self.counts.len()).rev() {
                            let i = rem % self.counts[r];
                            rem /= self.counts[r];
                            x[r] = offsets[r] + i as f64 * PERIOD / self.counts[r] as f64;
                        }
                        tabulated_interpolate(basis, coeffs, &x)
                    })
                    .collect()
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
