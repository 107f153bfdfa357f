//! Centrally symmetric convex bodies in a cotangent fiber, represented through
//! their support functions, together with Minkowski combinations, volumes,
//! linear projections and mixed volumes.
//!
//! Fiber dimensions 1 and 2 are fully supported. In dimension 1 every body is
//! an interval; in dimension 2 areas of combinations are assembled from exact
//! pairwise mixed areas (see [`planar`]). Higher dimensions only support the
//! closed-form volume of a single ellipsoid or segment.

pub mod planar;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use planar::Atom;

/// Relative tolerance for PSD repair of ellipsoid matrices.
const PSD_TOL: f64 = 1e-12;

/// Default size of the direction grid used for support-sampled bodies.
pub const DEFAULT_DIRECTIONS: usize = 720;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    /// `{x : h(u) = √(uᵀMu)}` for a symmetric PSD matrix `M`.
    Ellipsoid(Ellipsoid),
    /// The segment `[-a, a]`.
    Segment(DVector<f64>),
    SupportSampled(SampledBody),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    m: DMatrix<f64>,
    /// `L` with `M = L Lᵀ`; projections act on it directly.
    factor: DMatrix<f64>,
}

impl Ellipsoid {
    /// Symmetrizes `m` and clamps slightly negative eigenvalues to zero.
    /// Eigenvalues below `-1e-12·‖M‖` are rejected.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::numeric("ellipsoid matrix must be square and nonempty"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("ellipsoid matrix has non-finite entries"));
        }
        let sym = (&m + m.transpose()) * 0.5;
        if sym.nrows() == 1 {
            let v = sym[(0, 0)];
            if v < 0.0 {
                return Err(Error::numeric(format!("ellipsoid matrix not PSD: {v}")));
            }
            return Ok(Self { factor: DMatrix::from_element(1, 1, v.sqrt()), m: sym });
        }
        let eig = SymmetricEigen::new(sym.clone());
        let norm = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL * norm {
            return Err(Error::numeric(format!("ellipsoid matrix not PSD: eigenvalue {min:e} (norm {norm:e})")));
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let factor = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
        if min < 0.0 {
            let repaired = &factor * factor.transpose();
            return Ok(Self { m: (&repaired + repaired.transpose()) * 0.5, factor });
        }
        Ok(Self { m: sym, factor })
    }

    /// The ellipsoid `L·B` with support matrix `L Lᵀ`; `L` is `d × r` for any `r ≥ 1`.
    pub fn from_factor(l: DMatrix<f64>) -> Result<Self> {
        if l.nrows() == 0 || l.ncols() == 0 {
            return Err(Error::numeric("ellipsoid factor must be nonempty"));
        }
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("ellipsoid factor has non-finite entries"));
        }
        Ok(Self::from_factor_unchecked(l))
    }

    fn from_factor_unchecked(l: DMatrix<f64>) -> Self {
        let d = l.nrows();
        // wide factors are reduced to d x d by QR of Lᵀ: L = Rᵀ Qᵀ
        let factor = if l.ncols() > d {
            let r = l.transpose().qr().r();
            r.transpose()
        } else {
            l
        };
        let m = &factor * factor.transpose();
        Self { m: (&m + m.transpose()) * 0.5, factor }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: DMatrix::identity(dim, dim), factor: DMatrix::identity(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn planar_atom(&self) -> Atom {
        let f = &self.factor;
        match f.ncols() {
            1 => Atom::Segment([f[(0, 0)], f[(1, 0)]]),
            _ => planar::classify_factor(&[[f[(0, 0)], f[(0, 1)]], [f[(1, 0)], f[(1, 1)]]]),
        }
    }
}

/// A body known only through support values on a direction grid.
///
/// In dimension 2 the grid is `n` equiangular directions `φⱼ = 2πj/n` and the
/// body is the circumscribed polygon those samples determine. In dimension 1
/// the grid is `{+1, -1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledBody {
    dim: usize,
    values: Vec<f64>,
    vertices: Vec<[f64; 2]>,
}

impl SampledBody {
    /// Samples `support` on the standard direction grid of the given size.
    pub fn from_support(dim: usize, directions: usize, support: impl Fn(&[f64]) -> f64) -> Result<Self> {
        match dim {
            1 => Self::from_values(1, vec![support(&[1.0]), support(&[-1.0])]),
            2 => {
                let values = (0..directions)
                    .map(|j| {
                        let phi = 2.0 * PI * j as f64 / directions as f64;
                        support(&[phi.cos(), phi.sin()])
                    })
                    .collect();
                Self::from_values(2, values)
            }
            _ => Err(Error::Unsupported(format!("support-sampled bodies in dimension {dim}"))),
        }
    }

    /// Builds a body from raw support samples. Central symmetry is enforced by
    /// averaging each sample with its antipode.
    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::numeric("support samples must be finite and nonnegative"));
        }
        match dim {
            1 => {
                if values.len() != 2 {
                    return Err(Error::mismatch("1-D sampled body needs values at +1 and -1"));
                }
                let h = 0.5 * (values[0] + values[1]);
                Ok(Self { dim, values: vec![h, h], vertices: vec![[h, 0.0], [-h, 0.0]] })
            }
            2 => {
                let n = values.len();
                if n < 4 || !n.is_multiple_of(2) {
                    return Err(Error::mismatch("2-D direction grid must have an even count of at least 4"));
                }
                let half = n / 2;
                let sym: Vec<f64> = (0..n).map(|j| 0.5 * (values[j] + values[(j + half) % n])).collect();
                let vertices = planar::polygon_from_support(&sym);
                Ok(Self { dim, values: sym, vertices })
            }
            _ => Err(Error::Unsupported(format!("support-sampled bodies in dimension {dim}"))),
        }
    }

    fn from_polygon(vertices: Vec<[f64; 2]>, directions: usize) -> Self {
        let values = (0..directions)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / directions as f64;
                planar::polygon_support(&vertices, [phi.cos(), phi.sin()])
            })
            .collect();
        Self { dim: 2, values, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Symmetrized support samples on the direction grid.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Vertices of the reconstructed polygon (2-D only).
    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    fn support(&self, u: &[f64]) -> f64 {
        match self.dim {
            1 => self.values[0] * u[0].abs(),
            _ => planar::polygon_support(&self.vertices, [u[0], u[1]]),
        }
    }
}

impl ConvexBody {
    pub fn ellipsoid(m: DMatrix<f64>) -> Result<Self> {
        Ellipsoid::new(m).map(ConvexBody::Ellipsoid)
    }

    /// The Euclidean unit ball, as an ellipsoid.
    pub fn unit_ball(dim: usize) -> Self {
        ConvexBody::Ellipsoid(Ellipsoid::identity(dim))
    }

    pub fn segment(a: &[f64]) -> Self {
        ConvexBody::Segment(DVector::from_column_slice(a))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ellipsoid(e) => e.dim(),
            ConvexBody::Segment(a) => a.len(),
            ConvexBody::SupportSampled(s) => s.dim(),
        }
    }

    /// Support function `h(u) = max_{a∈K} ⟨a, u⟩`; `u` need not be a unit vector.
    pub fn support(&self, u: &[f64]) -> f64 {
        match self {
            ConvexBody::Ellipsoid(e) => {
                let f = &e.factor;
                (0..f.ncols())
                    .map(|j| (0..f.nrows()).map(|i| u[i] * f[(i, j)]).sum::<f64>().powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
            ConvexBody::Segment(a) => a.iter().zip(u).map(|(x, y)| x * y).sum::<f64>().abs(),
            ConvexBody::SupportSampled(s) => s.support(u),
        }
    }

    /// Lebesgue volume in fiber coordinates.
    pub fn volume(&self) -> Result<f64> {
        BodyCombination::single(self.clone()).volume()
    }

    /// Image under `a ↦ (⟨a, ξ₁⟩, …, ⟨a, ξ_k⟩)`.
    pub fn project(&self, frame: &[Vec<f64>]) -> Result<ConvexBody> {
        let xi = frame_matrix(frame, self.dim())?;
        Ok(self.project_unchecked(&xi))
    }

    fn project_unchecked(&self, xi: &DMatrix<f64>) -> ConvexBody {
        match self {
            ConvexBody::Ellipsoid(e) => ConvexBody::Ellipsoid(Ellipsoid::from_factor_unchecked(xi * &e.factor)),
            ConvexBody::Segment(a) => ConvexBody::Segment(xi * a),
            ConvexBody::SupportSampled(s) => {
                let k = xi.nrows();
                if k == 1 {
                    let u: Vec<f64> = xi.row(0).iter().cloned().collect();
                    ConvexBody::Segment(DVector::from_element(1, s.support(&u)))
                } else if s.dim == 1 {
                    // k ≤ d, so this is the 1x1 case
                    ConvexBody::SupportSampled(s.clone())
                } else {
                    let r0 = [xi[(0, 0)], xi[(0, 1)]];
                    let r1 = [xi[(1, 0)], xi[(1, 1)]];
                    let vs = planar::map_polygon(&s.vertices, r0, r1);
                    ConvexBody::SupportSampled(SampledBody::from_polygon(vs, s.values.len()))
                }
            }
        }
    }

    fn planar_atom(&self) -> Atom {
        match self {
            ConvexBody::Ellipsoid(e) => e.planar_atom(),
            ConvexBody::Segment(a) => Atom::Segment([a[0], a[1]]),
            ConvexBody::SupportSampled(s) => Atom::Polygon(s.vertices.clone()),
        }
    }

    /// Support at `+1` of a 1-D body: its half-length.
    fn half_length_1d(&self) -> f64 {
        self.support(&[1.0])
    }
}

/// Check a tangent frame and assemble the `k × d` matrix with rows `ξᵢ`.
pub(crate) fn frame_matrix(frame: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    let k = frame.len();
    if k == 0 || k > dim {
        return Err(Error::numeric(format!("frame of {k} vectors in dimension {dim}")));
    }
    if frame.iter().any(|v| v.len() != dim) {
        return Err(Error::mismatch(format!("frame vectors must have length {dim}")));
    }
    let xi = DMatrix::from_fn(k, dim, |i, j| frame[i][j]);
    let sv = xi.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::numeric("frame is rank-deficient (degenerate subspace H)"));
    }
    Ok(xi)
}

/// A nonnegative Minkowski combination `Σ cᵢ Kᵢ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BodyCombination {
    terms: Vec<(f64, ConvexBody)>,
}

impl From<ConvexBody> for BodyCombination {
    fn from(body: ConvexBody) -> Self {
        Self::single(body)
    }
}

impl BodyCombination {
    pub fn single(body: ConvexBody) -> Self {
        Self { terms: vec![(1.0, body)] }
    }

    pub fn new(terms: Vec<(f64, ConvexBody)>) -> Result<Self> {
        if terms.iter().any(|(c, _)| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::numeric("combination coefficients must be finite and nonnegative"));
        }
        if let Some((_, first)) = terms.first() {
            let d = first.dim();
            if terms.iter().any(|(_, b)| b.dim() != d) {
                return Err(Error::mismatch("combined bodies live in different dimensions"));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(f64, ConvexBody)] {
        &self.terms
    }

    pub fn dim(&self) -> Option<usize> {
        self.terms.first().map(|(_, b)| b.dim())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { terms: self.terms.iter().map(|(k, b)| (k * c, b.clone())).collect() }
    }

    /// Minkowski sum with `c · other`.
    pub fn add_scaled(&mut self, c: f64, other: &BodyCombination) {
        self.terms.extend(other.terms.iter().map(|(k, b)| (k * c, b.clone())));
    }

    pub fn support(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|(c, b)| c * b.support(u)).sum()
    }

    pub fn project(&self, frame: &[Vec<f64>]) -> Result<BodyCombination> {
        let Some(d) = self.dim() else { return Ok(Self::default()) };
        let xi = frame_matrix(frame, d)?;
        Ok(self.project_with(&xi))
    }

    pub(crate) fn project_with(&self, xi: &DMatrix<f64>) -> BodyCombination {
        Self { terms: self.terms.iter().map(|(c, b)| (*c, b.project_unchecked(xi))).collect() }
    }

    /// Volume of the combination in its own dimension.
    pub fn volume(&self) -> Result<f64> {
        let Some(d) = self.dim() else { return Ok(0.0) };
        let live: Vec<&(f64, ConvexBody)> = self.terms.iter().filter(|(c, _)| *c > 0.0).collect();
        match d {
            1 => Ok(2.0 * live.iter().map(|(c, b)| c * b.half_length_1d()).sum::<f64>()),
            2 => {
                let atoms: Vec<(f64, Atom)> = live.iter().map(|(c, b)| (*c, b.planar_atom())).collect();
                Ok(planar::combination_area(&atoms))
            }
            _ => match live.as_slice() {
                [] => Ok(0.0),
                [(c, ConvexBody::Ellipsoid(e))] => {
                    let det = e.m.determinant().max(0.0);
                    Ok(c.powi(d as i32) * unit_ball_volume(d) * det.sqrt())
                }
                [(_, ConvexBody::Segment(_))] => Ok(0.0),
                _ => Err(Error::Unsupported(format!("volumes of combinations in dimension {d}"))),
            },
        }
    }
}

/// Volume of the Euclidean unit ball in `ℝᵈ`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Mixed volume of `d` bodies in `ℝᵈ` by polarization:
/// `(1/d!) Σ_{∅≠S⊆[d]} (−1)^{d−|S|} vol(Σ_{i∈S} Kᵢ)`.
///
/// Normalized so that `mixed_volume([K; d]) = vol(K)`.
pub fn mixed_volume(bodies: &[BodyCombination], dim: usize) -> Result<f64> {
    if bodies.len() != dim {
        return Err(Error::mismatch(format!(
            "mixed volume in dimension {dim} needs {dim} bodies, got {}",
            bodies.len()
        )));
    }
    if dim == 0 {
        return Ok(1.0);
    }
    if bodies.iter().any(|b| b.dim().is_some_and(|d| d != dim)) {
        return Err(Error::mismatch("body dimension differs from mixed-volume dimension"));
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << dim) {
        let mut sum = BodyCombination::default();
        for (i, b) in bodies.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum.add_scaled(1.0, b);
            }
        }
        let sign = if (dim as u32 - mask.count_ones()).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * sum.volume()?;
    }
    Ok(total / factorial(dim))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
