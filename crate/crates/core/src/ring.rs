//! The ring of virtual Banach sets, realized over a finite family of
//! generator fields.
//!
//! `S` is the symmetric algebra on the generators, graded by degree. The
//! functional `I` vanishes outside degree `n` and sends a degree-`n` monomial
//! `ℬ₁⋯ℬₙ` to the mixed volume `vol(ℬ₁, …, ℬₙ)`. The pairing `L(x, y) = I(xy)`
//! restricted to `S_p × S_{n−p}` is a matrix over monomial bases; its left
//! kernel in degree `p` is the degree-`p` part of `J`, and `dim 𝔖_p = rank L_p`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::banach_field::BanachField;
use crate::error::{Error, Result};

pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

/// A multiset of generator indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    pub fn new(mut gens: Vec<usize>) -> Self {
        gens.sort_unstable();
        Self(gens)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn generators(&self) -> &[usize] {
        &self.0
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut g = self.0.clone();
        g.extend_from_slice(&other.0);
        Monomial::new(g)
    }
}

/// All degree-`p` monomials in `g` generators, in lexicographic order.
pub fn monomials(g: usize, p: usize) -> Vec<Monomial> {
    fn rec(g: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Monomial>) {
        if cur.len() == p {
            out.push(Monomial(cur.clone()));
            return;
        }
        for i in start..g {
            cur.push(i);
            rec(g, p, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, p, 0, &mut Vec::with_capacity(p), &mut out);
    out
}

/// Named degree-1 generators on a shared grid.
#[derive(Debug, Clone)]
pub struct GeneratorFamily {
    names: Vec<String>,
    fields: Vec<BanachField>,
}

impl GeneratorFamily {
    pub fn new(generators: Vec<(String, BanachField)>) -> Result<Self> {
        let Some((_, first)) = generators.first() else {
            return Err(Error::config("a generator family needs at least one field"));
        };
        if generators.iter().any(|(_, f)| f.grid() != first.grid()) {
            return Err(Error::mismatch("generators live on different grids"));
        }
        let (names, fields) = generators.into_iter().unzip();
        Ok(Self { names, fields })
    }

    pub fn from_fields(fields: Vec<BanachField>) -> Result<Self> {
        Self::new(fields.into_iter().enumerate().map(|(i, f)| (format!("B{i}"), f)).collect())
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn fields(&self) -> &[BanachField] {
        &self.fields
    }

    /// Manifold dimension `n`.
    pub fn top_degree(&self) -> usize {
        self.fields[0].dim()
    }
}

/// An element of `S_p`: coefficients over the degree-`p` monomials of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct RingElement {
    degree: usize,
    coeffs: Vec<f64>,
}

impl RingElement {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        if self.degree != other.degree || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::mismatch("adding ring elements of different degrees"));
        }
        Ok(RingElement {
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> RingElement {
        RingElement { degree: self.degree, coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }
}

/// The degree-`p` pairing matrix: rows index `S_p` monomials, columns `S_{n−p}`.
#[derive(Debug, Clone)]
pub struct PairingMatrix {
    pub degree: usize,
    pub rows: Vec<Monomial>,
    pub cols: Vec<Monomial>,
    pub matrix: DMatrix<f64>,
}

impl PairingMatrix {
    pub fn singular_values(&self) -> Vec<f64> {
        if self.matrix.is_empty() {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self.matrix.singular_values().iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Numerical rank with singular values below `tol·σ_max` treated as zero.
    pub fn rank(&self, tol: f64) -> usize {
        let sv = self.singular_values();
        let max = sv.first().cloned().unwrap_or(0.0);
        if !(max > 0.0) {
            return 0;
        }
        sv.iter().filter(|&&s| s > tol * max).count()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().cloned().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct KernelInfo {
    pub degree: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub basis: Vec<RingElement>,
}

impl KernelInfo {
    /// `dim 𝔖_p`.
    pub fn quotient_dim(&self) -> usize {
        self.rank
    }
}

#[derive(Debug, Clone)]
pub struct IdealCheck {
    pub generator: usize,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct IdealReport {
    /// Relative pairing residual of the input vector itself.
    pub input_residual: f64,
    pub input_in_kernel: bool,
    pub checks: Vec<IdealCheck>,
}

impl IdealReport {
    pub fn passed(&self) -> bool {
        self.input_in_kernel && self.checks.iter().all(|c| c.passed)
    }
}

/// `S` over a generator family, with the values of `I` on all top-degree
/// monomials precomputed.
#[derive(Debug, Clone)]
pub struct PairingRing {
    family: GeneratorFamily,
    top: HashMap<Monomial, f64>,
}

impl PairingRing {
    pub fn new(family: GeneratorFamily) -> Result<Self> {
        let n = family.top_degree();
        let mons = monomials(family.len(), n);
        let values = mons
            .par_iter()
            .map(|m| {
                let fields: Vec<&BanachField> = m.0.iter().map(|&i| &family.fields[i]).collect();
                BanachField::mixed_volume(&fields)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { family, top: mons.into_iter().zip(values).collect() })
    }

    pub fn family(&self) -> &GeneratorFamily {
        &self.family
    }

    pub fn top_degree(&self) -> usize {
        self.family.top_degree()
    }

    pub fn monomials(&self, p: usize) -> Vec<Monomial> {
        monomials(self.family.len(), p)
    }

    pub fn zero(&self, p: usize) -> RingElement {
        RingElement { degree: p, coeffs: vec![0.0; self.monomials(p).len()] }
    }

    /// The unit of `S₀`.
    pub fn one(&self) -> RingElement {
        RingElement { degree: 0, coeffs: vec![1.0] }
    }

    pub fn generator(&self, i: usize) -> Result<RingElement> {
        self.monomial(&Monomial::new(vec![i]))
    }

    pub fn monomial(&self, m: &Monomial) -> Result<RingElement> {
        if m.0.iter().any(|&i| i >= self.family.len()) {
            return Err(Error::mismatch("monomial uses an unknown generator"));
        }
        let basis = self.monomials(m.degree());
        let pos = basis.iter().position(|b| b == m).expect("sorted monomial is enumerated");
        let mut e = self.zero(m.degree());
        e.coeffs[pos] = 1.0;
        Ok(e)
    }

    pub fn element(&self, degree: usize, coeffs: Vec<f64>) -> Result<RingElement> {
        if coeffs.len() != self.monomials(degree).len() {
            return Err(Error::mismatch(format!(
                "degree {degree} needs {} coefficients",
                self.monomials(degree).len()
            )));
        }
        Ok(RingElement { degree, coeffs })
    }

    /// Nonzero terms of an element as `(coefficient, monomial)`.
    pub fn terms(&self, elem: &RingElement) -> Vec<(f64, Monomial)> {
        self.monomials(elem.degree)
            .into_iter()
            .zip(&elem.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| (c, m))
            .collect()
    }

    pub fn multiply(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let degree = a.degree + b.degree;
        let basis = self.monomials(degree);
        let index: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut coeffs = vec![0.0; basis.len()];
        for (ca, ma) in self.terms(a) {
            for (cb, mb) in self.terms(b) {
                coeffs[index[&ma.times(&mb)]] += ca * cb;
            }
        }
        RingElement { degree, coeffs }
    }

    /// `I(ℬ₁⋯ℬₙ) = vol(ℬ₁, …, ℬₙ)`, zero outside degree `n`.
    pub fn functional_i(&self, elem: &RingElement) -> f64 {
        if elem.degree != self.top_degree() {
            return 0.0;
        }
        self.terms(elem).iter().map(|(c, m)| c * self.top[m]).sum()
    }

    pub fn pairing_matrix(&self, p: usize) -> Result<PairingMatrix> {
        let n = self.top_degree();
        if p > n {
            return Err(Error::mismatch(format!("pairing degree {p} exceeds {n}")));
        }
        let rows = self.monomials(p);
        let cols = self.monomials(n - p);
        let matrix = DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.top[&rows[i].times(&cols[j])]);
        Ok(PairingMatrix { degree: p, rows, cols, matrix })
    }

    /// Basis of the degree-`p` part of `J`: vectors `v` with `vᵀ L_p = 0`,
    /// singular values below `tol·σ_max` counted as zero.
    pub fn kernel(&self, p: usize, tol: f64) -> Result<KernelInfo> {
        let pm = self.pairing_matrix(p)?;
        let r = pm.rows.len();
        let c = pm.cols.len();
        // left kernel = null space of Lᵀ (c × r); pad with zero rows to square
        let size = r.max(c);
        let mut lt = DMatrix::zeros(size, r);
        lt.view_mut((0, 0), (c, r)).copy_from(&pm.matrix.transpose());
        let svd = lt.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let max = svd.singular_values.max();
        let mut basis = Vec::new();
        let mut rank = 0;
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if max > 0.0 && s > tol * max {
                rank += 1;
            } else if k < r {
                let row = v_t.row(k);
                basis.push(RingElement { degree: p, coeffs: row.iter().cloned().collect() });
            }
        }
        Ok(KernelInfo { degree: p, rank, singular_values: pm.singular_values(), basis })
    }

    /// Relative residual `‖vᵀ L_p‖ / (‖L_p‖₂ ‖v‖)`.
    pub fn pairing_residual(&self, v: &RingElement) -> Result<f64> {
        let pm = self.pairing_matrix(v.degree)?;
        let norm = pm.spectral_norm();
        let vn = v.norm();
        if norm == 0.0 || vn == 0.0 {
            return Ok(0.0);
        }
        let row = DVector::from_column_slice(&v.coeffs).transpose() * &pm.matrix;
        Ok(row.norm() / (norm * vn))
    }

    /// Checks that `ℬᵢ · v` lies in the next kernel for every generator.
    pub fn ideal_check(&self, v: &RingElement, tol: f64) -> Result<IdealReport> {
        let input_residual = self.pairing_residual(v)?;
        let mut checks = Vec::new();
        if v.degree < self.top_degree() {
            for i in 0..self.family.len() {
                let w = self.multiply(&self.generator(i)?, v);
                let residual = self.pairing_residual(&w)?;
                checks.push(IdealCheck { generator: i, residual, passed: residual <= tol });
            }
        }
        Ok(IdealReport { input_residual, input_in_kernel: input_residual <= tol, checks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::ConvexBody;
    use crate::manifold::{Manifold, QuadratureGrid};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn circle_segment(c: f64) -> BanachField {
        let g = QuadratureGrid::uniform(Manifold::Circle, 16).unwrap();
        BanachField::constant(g, ConvexBody::segment(&[c])).unwrap()
    }

    fn random_ellipsoid_field(rng: &mut ChaCha8Rng) -> BanachField {
        let g = QuadratureGrid::uniform(Manifold::Torus2, 6).unwrap();
        let p: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        BanachField::from_fn(g, |x| {
            let a = 1.0 + 0.3 * (x[0] + p[0]).cos();
            let b = p[1] + 0.2 * x[1].sin();
            let c = 0.5 + 0.25 * (p[2] + 1.0) + 0.1 * (x[0] + x[1] + p[3]).sin();
            ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[a * a, a * b, a * b, b * b + c * c]))
        })
        .unwrap()
    }

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(3, 0).len(), 1);
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(2, 2), vec![Monomial(vec![0, 0]), Monomial(vec![0, 1]), Monomial(vec![1, 1])]);
    }

    #[test]
    fn functional_examples() {
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![circle_segment(1.0)]).unwrap()).unwrap();
        assert_eq!(ring.functional_i(&ring.one()), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_ellipsoid_field(&mut rng);
        let vol = b.volume().unwrap();
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![b]).unwrap()).unwrap();
        let bb = ring.monomial(&Monomial::new(vec![0, 0])).unwrap();
        assert!((ring.functional_i(&bb) - vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn pairing_on_circle() {
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![circle_segment(1.0)]).unwrap()).unwrap();
        let l1 = ring.pairing_matrix(1).unwrap();
        assert_eq!(l1.matrix.shape(), (1, 1));
        assert!((l1.matrix[(0, 0)] - 4.0 * PI).abs() < 1e-13);

        let fam = vec![circle_segment(1.0), circle_segment(2.0)];
        let ring = PairingRing::new(GeneratorFamily::from_fields(fam).unwrap()).unwrap();
        let l1 = ring.pairing_matrix(1).unwrap();
        assert!((l1.matrix[(0, 0)] - 4.0 * PI).abs() < 1e-13);
        assert!((l1.matrix[(1, 0)] - 8.0 * PI).abs() < 1e-13);
        assert_eq!(l1.rank(DEFAULT_KERNEL_TOL), 1);
        let l0 = ring.pairing_matrix(0).unwrap();
        assert_eq!(l0.matrix, l1.matrix.transpose());
    }

    #[test]
    fn kernel_of_scaled_pair() {
        let fam = vec![circle_segment(1.0), circle_segment(2.0)];
        let ring = PairingRing::new(GeneratorFamily::from_fields(fam).unwrap()).unwrap();
        let k = ring.kernel(1, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(k.basis.len(), 1);
        assert_eq!(k.quotient_dim(), 1);
        // proportional to (2ℬ) − 2·ℬ
        let v = &k.basis[0].coefficients();
        assert!((v[0] / v[1] + 2.0).abs() < 1e-10);
        let top = ring.kernel(ring.top_degree(), DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(top.quotient_dim(), 1);
    }

    #[test]
    fn generic_family_has_trivial_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam: Vec<BanachField> = (0..3).map(|_| random_ellipsoid_field(&mut rng)).collect();
        let ring = PairingRing::new(GeneratorFamily::from_fields(fam).unwrap()).unwrap();
        let k = ring.kernel(1, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(k.basis.len(), 0, "singular values {:?}", k.singular_values);
        assert_eq!(ring.kernel(2, DEFAULT_KERNEL_TOL).unwrap().quotient_dim(), 1);
        assert_eq!(ring.kernel(0, DEFAULT_KERNEL_TOL).unwrap().quotient_dim(), 1);
    }

    #[test]
    fn ideal_property_on_torus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random_ellipsoid_field(&mut rng);
        let fam = vec![b.clone(), b.scaled(2.0).unwrap()];
        let ring = PairingRing::new(GeneratorFamily::from_fields(fam).unwrap()).unwrap();
        // (2ℬ) − 2ℬ
        let v = ring.element(1, vec![-2.0, 1.0]).unwrap();
        let report = ring.ideal_check(&v, 1e-10).unwrap();
        assert!(report.passed(), "{report:?}");
        let not_kernel = ring.element(1, vec![1.0, 1.0]).unwrap();
        let report = ring.ideal_check(&not_kernel, 1e-10).unwrap();
        assert!(!report.input_in_kernel);
        assert!(!report.passed());
    }

    #[test]
    fn homogeneity_of_pairing_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_ellipsoid_field(&mut rng);
        let b = random_ellipsoid_field(&mut rng);
        let c = 1.7;
        let r1 = PairingRing::new(GeneratorFamily::from_fields(vec![a.clone(), b.clone()]).unwrap()).unwrap();
        let r2 = PairingRing::new(GeneratorFamily::from_fields(vec![a.scaled(c).unwrap(), b]).unwrap()).unwrap();
        let l1 = r1.pairing_matrix(1).unwrap().matrix;
        let l2 = r2.pairing_matrix(1).unwrap().matrix;
        // entry (i, j) contains generator 0 exactly [i == 0] + [j == 0] times
        for i in 0..2 {
            for j in 0..2 {
                let k = (i == 0) as i32 + (j == 0) as i32;
                assert!((l2[(i, j)] - c.powi(k) * l1[(i, j)]).abs() <= 1e-12 * l2[(i, j)].abs());
            }
        }
    }

    #[test]
    fn multiplication_is_commutative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam: Vec<BanachField> = (0..3).map(|_| random_ellipsoid_field(&mut rng)).collect();
        let ring = PairingRing::new(GeneratorFamily::from_fields(fam).unwrap()).unwrap();
        let x = ring.element(1, vec![1.0, -2.0, 0.5]).unwrap();
        let y = ring.element(1, vec![0.0, 3.0, 1.0]).unwrap();
        assert_eq!(ring.multiply(&x, &y), ring.multiply(&y, &x));
        assert_eq!(ring.multiply(&ring.one(), &x), x);
    }
}
