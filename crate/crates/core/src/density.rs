//! Densities of ring elements.
//!
//! For a degree-`k` monomial `ℬ₁⋯ℬ_k`, the density at a node `x` on a frame
//! `ξ₁, …, ξ_k` of tangent vectors is the `k`-dimensional mixed volume of the
//! projections of the fibers `ℬᵢ(x)` under `a ↦ (⟨a, ξ₁⟩, …, ⟨a, ξ_k⟩)`. It is
//! extended linearly to `S_k`. In top degree the integral of the density over
//! the manifold reproduces `I`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::convex::{factorial, frame_matrix, mixed_volume, BodyCombination};
use crate::error::{Error, Result};
use crate::ring::{PairingRing, RingElement};

/// `d_k(x; ξ)` for a homogeneous element of degree `k = frame.len()`.
pub fn density_eval(ring: &PairingRing, elem: &RingElement, node: usize, frame: &[Vec<f64>]) -> Result<f64> {
    let k = elem.degree();
    if frame.len() != k {
        return Err(Error::mismatch(format!("degree {k} element needs a {k}-vector frame, got {}", frame.len())));
    }
    let family = ring.family();
    let grid = family.fields()[0].grid();
    if node >= grid.len() {
        return Err(Error::mismatch(format!("node {node} outside grid of {}", grid.len())));
    }
    if k == 0 {
        return Ok(elem.coefficients()[0]);
    }
    let xi = frame_matrix(frame, family.top_degree())?;
    let projected: Vec<BodyCombination> = family.fields().iter().map(|f| f.fiber(node).project_with(&xi)).collect();
    let mut total = 0.0;
    for (c, m) in ring.terms(elem) {
        let bodies: Vec<BodyCombination> = m.generators().iter().map(|&i| projected[i].clone()).collect();
        total += c * mixed_volume(&bodies, k)?;
    }
    Ok(total)
}

/// `Σ wₓ d_n(x; ∂/∂θ)` over the family's grid, for a top-degree element.
pub fn density_integrate(ring: &PairingRing, elem: &RingElement) -> Result<f64> {
    let n = ring.top_degree();
    if elem.degree() != n {
        return Err(Error::mismatch(format!("only degree-{n} densities integrate to numbers")));
    }
    let grid = ring.family().fields()[0].grid();
    let mut total = 0.0;
    for (idx, &w) in grid.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let frame = grid.manifold().coordinate_frame(&grid.node(idx));
        total += w * density_eval(ring, elem, idx, &frame)?;
    }
    Ok(total)
}

/// Density of the segment product `[-a₁, a₁]⋯[-a_k, a_k]` on a frame.
pub fn segment_density(covectors: &[Vec<f64>], frame: &[Vec<f64>]) -> Result<f64> {
    let k = covectors.len();
    if frame.len() != k {
        return Err(Error::mismatch("segment count must equal frame size"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let n = covectors[0].len();
    let xi = frame_matrix(frame, n)?;
    let bodies: Vec<BodyCombination> = covectors
        .iter()
        .map(|a| BodyCombination::single(crate::convex::ConvexBody::segment(a)).project_with(&xi))
        .collect();
    mixed_volume(&bodies, k)
}

#[derive(Debug, Clone)]
pub struct SegmentDeterminantCheck {
    /// `k! · d_k`.
    pub lhs: f64,
    /// `|det(2⟨aᵢ, ξⱼ⟩)|`.
    pub rhs: f64,
    pub rel_error: f64,
}

/// Compares `k!·d_k` of a segment product against the determinant formula.
pub fn segment_determinant_check(covectors: &[Vec<f64>], frame: &[Vec<f64>]) -> Result<SegmentDeterminantCheck> {
    let k = covectors.len();
    let lhs = factorial(k) * segment_density(covectors, frame)?;
    let a = DMatrix::from_fn(k, k, |i, j| 2.0 * covectors[i].iter().zip(&frame[j]).map(|(x, y)| x * y).sum::<f64>());
    let rhs = a.determinant().abs();
    let scale = lhs.abs().max(rhs.abs());
    let rel_error = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
    Ok(SegmentDeterminantCheck { lhs, rhs, rel_error })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Separation {
    /// A node and frame on which the two densities differ by more than the tolerance.
    Separated { node: usize, frame: Vec<Vec<f64>>, values: (f64, f64) },
    /// No witness within the budget; `max_gap` is the largest relative gap seen.
    Inconclusive { max_gap: f64 },
}

/// Random search for a point and frame separating the densities of `s` and `t`.
pub fn density_separation<R: Rng + ?Sized>(
    ring: &PairingRing,
    s: &RingElement,
    t: &RingElement,
    budget: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Separation> {
    if s.degree() != t.degree() {
        return Err(Error::mismatch("separation compares elements of equal degree"));
    }
    let k = s.degree();
    let n = ring.top_degree();
    let nodes = ring.family().fields()[0].grid().len();
    let mut max_gap: f64 = 0.0;
    for _ in 0..budget {
        let node = rng.random_range(0..nodes);
        let frame: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let (ds, dt) = (density_eval(ring, s, node, &frame)?, density_eval(ring, t, node, &frame)?);
        let scale = ds.abs().max(dt.abs());
        let gap = if scale == 0.0 { 0.0 } else { (ds - dt).abs() / scale };
        if gap > tol {
            return Ok(Separation::Separated { node, frame, values: (ds, dt) });
        }
        max_gap = max_gap.max(gap);
    }
    Ok(Separation::Inconclusive { max_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banach_field::BanachField;
    use crate::convex::ConvexBody;
    use crate::function_space::{FunctionSpace, InnerProductRule};
    use crate::manifold::{Manifold, QuadratureGrid};
    use crate::ring::{GeneratorFamily, Monomial};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus_ring(seed: u64) -> PairingRing {
        let g = QuadratureGrid::uniform(Manifold::Torus2, 8).unwrap();
        let s1 = FunctionSpace::trig(Manifold::Torus2, &[1, 2], true, InnerProductRule::NormalizedL2).unwrap();
        let e1 = s1.ellipsoid_field(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: f64 = rng.random_range(0.5..1.5);
        let e2 = BanachField::from_fn(g, |x| Ok(ConvexBody::segment(&[p + 0.3 * x[0].cos(), 1.0 + 0.2 * x[1].sin()])))
            .unwrap();
        PairingRing::new(GeneratorFamily::from_fields(vec![e1, e2]).unwrap()).unwrap()
    }

    fn random_frame(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Vec<Vec<f64>> {
        (0..k).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn single_segment_width() {
        // d₁ of [-a, a] on ξ is the length of the projected segment, 2|⟨a, ξ⟩|
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let xi = random_frame(&mut rng, 1, 2);
            let d = segment_density(std::slice::from_ref(&a), &xi).unwrap();
            let want = 2.0 * (a[0] * xi[0][0] + a[1] * xi[0][1]).abs();
            assert!((d - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn segment_determinant_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..500 {
            let a = random_frame(&mut rng, 2, 2);
            let xi = random_frame(&mut rng, 2, 2);
            let c = segment_determinant_check(&a, &xi).unwrap();
            assert!(c.rel_error <= 1e-10, "{c:?}");
        }
    }

    #[test]
    fn frame_change_and_scaling() {
        let ring = torus_ring(1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let elems = [
            ring.monomial(&Monomial::new(vec![0, 0])).unwrap(),
            ring.monomial(&Monomial::new(vec![0, 1])).unwrap(),
            ring.element(2, vec![1.0, -0.5, 2.0]).unwrap(),
        ];
        for _ in 0..200 {
            let node = rng.random_range(0..64);
            let xi = random_frame(&mut rng, 2, 2);
            let a = random_frame(&mut rng, 2, 2);
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let xi2: Vec<Vec<f64>> =
                (0..2).map(|i| (0..2).map(|r| a[i][0] * xi[0][r] + a[i][1] * xi[1][r]).collect()).collect();
            let c: f64 = rng.random_range(-3.0..3.0);
            let xi_c: Vec<Vec<f64>> = vec![xi[0].iter().map(|v| v * c).collect(), xi[1].clone()];
            for e in &elems {
                let d = density_eval(&ring, e, node, &xi).unwrap();
                let d2 = density_eval(&ring, e, node, &xi2).unwrap();
                let dc = density_eval(&ring, e, node, &xi_c).unwrap();
                let scale = d.abs().max(1e-300);
                assert!((d2 - det.abs() * d).abs() <= 1e-10 * scale * det.abs().max(1.0));
                assert!((dc - c.abs() * d).abs() <= 1e-10 * scale * c.abs().max(1.0));
            }
        }
    }

    #[test]
    fn integral_matches_functional() {
        let ring = torus_ring(2);
        for coeffs in [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.3, -1.0, 2.5]] {
            let e = ring.element(2, coeffs).unwrap();
            let i = ring.functional_i(&e);
            let d = density_integrate(&ring, &e).unwrap();
            assert!((i - d).abs() <= 1e-8 * i.abs().max(1e-12), "{i} vs {d}");
        }
    }

    #[test]
    fn monotone_under_inclusion() {
        let g = QuadratureGrid::uniform(Manifold::Circle, 8).unwrap();
        let small = BanachField::constant(g.clone(), ConvexBody::segment(&[1.0])).unwrap();
        let big = BanachField::constant(g, ConvexBody::segment(&[1.5])).unwrap();
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![small, big]).unwrap()).unwrap();
        let frame = vec![vec![0.7]];
        let ds = density_eval(&ring, &ring.generator(0).unwrap(), 3, &frame).unwrap();
        let db = density_eval(&ring, &ring.generator(1).unwrap(), 3, &frame).unwrap();
        assert!(ds <= db);
    }

    #[test]
    fn separation() {
        let ring = torus_ring(3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = ring.generator(0).unwrap();
        let t = ring.generator(1).unwrap();
        assert!(matches!(density_separation(&ring, &s, &t, 50, 1e-8, &mut rng).unwrap(), Separation::Separated { .. }));
        let same = density_separation(&ring, &s, &s.scale(1.0), 20, 1e-8, &mut rng).unwrap();
        assert_eq!(same, Separation::Inconclusive { max_gap: 0.0 });
    }

    #[test]
    fn degenerate_frame_rejected() {
        let ring = torus_ring(4);
        let e = ring.monomial(&Monomial::new(vec![0, 1])).unwrap();
        assert!(density_eval(&ring, &e, 0, &[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
    }
}
