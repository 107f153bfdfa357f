//! Densities of ring elements: evaluation on frames, the scaling and
//! frame-change rules, integration to the top-degree functional, the segment
//! determinant identity, and a separation search.
//!
//! cargo run --example densities

use banach_zeros::density::{density_eval, density_integrate, density_separation, segment_determinant_check};
use banach_zeros::ring::{GeneratorFamily, Monomial, PairingRing};
use banach_zeros::{BanachField, ConvexBody, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> banach_zeros::Result<()> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 16)?;
    let space = FunctionSpace::trig(Manifold::Torus2, &[2, 1], true, InnerProductRule::NormalizedL2)?;
    let seg = BanachField::from_fn(grid.clone(), |x| Ok(ConvexBody::segment(&[1.0 + 0.3 * x[1].cos(), 0.4])))?;
    let ring = PairingRing::new(GeneratorFamily::from_fields(vec![space.ellipsoid_field(&grid)?, seg])?)?;

    let es = ring.monomial(&Monomial::new(vec![0, 1]))?;
    let frame = vec![vec![1.0, 0.2], vec![-0.3, 0.9]];
    let d = density_eval(&ring, &es, 5, &frame)?;
    let doubled = vec![vec![2.0, 0.4], frame[1].clone()];
    println!("d2(E·S) at node 5: {d:.12}; first vector doubled: {:.12}", density_eval(&ring, &es, 5, &doubled)?);

    let e = ring.generator(0)?;
    let u = vec![vec![0.6, -0.8]];
    let h = ring.family().fields()[0].fiber(5).support(&u[0]);
    println!("d1(E) on u = {:.12}, twice the support = {:.12}", density_eval(&ring, &e, 5, &u)?, 2.0 * h);

    let top = ring.element(2, vec![1.0, 0.5, 0.0])?;
    println!("∫ d2(E² + ½E·S) = {:.12}, I(·) = {:.12}", density_integrate(&ring, &top)?, ring.functional_i(&top));

    let check = segment_determinant_check(&[vec![1.0, 0.5], vec![-0.2, 0.7]], &frame)?;
    println!("segments: 2!·d2 = {:.12}, |det(2⟨a_i, ξ_j⟩)| = {:.12}", check.lhs, check.rhs);

    let other = ring.element(2, vec![1.0, 0.0, 0.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    println!("separation of E² + ½E·S from E²: {:?}", density_separation(&ring, &top, &other, 100, 1e-8, &mut rng)?);
    Ok(())
}
