//! Systems of two random functions on the torus: product systems factorize
//! into circle counts, and full tensor spaces follow Kac–Rice.
//!
//! cargo run --example torus_systems

use std::f64::consts::PI;

use banach_zeros::{expected_zeros_of_spaces, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid};

fn trig(manifold: Manifold, degrees: &[u32]) -> banach_zeros::Result<FunctionSpace> {
    FunctionSpace::trig(manifold, degrees, true, InnerProductRule::NormalizedL2)
}

fn main() -> banach_zeros::Result<()> {
    let circle = QuadratureGrid::uniform(Manifold::Circle, 256)?;
    let torus = QuadratureGrid::uniform(Manifold::Torus2, 64)?;
    println!("product systems (f(θ₁), g(θ₂)):");
    for (a, b) in [(1, 1), (1, 3), (2, 2), (2, 3), (3, 3)] {
        let v1 = trig(Manifold::Torus2, &[a, 0])?;
        let v2 = trig(Manifold::Torus2, &[0, b])?;
        let q = expected_zeros_of_spaces(&[&v1, &v2], &torus)?;
        let ca = expected_zeros_of_spaces(&[&trig(Manifold::Circle, &[a])?], &circle)?;
        let cb = expected_zeros_of_spaces(&[&trig(Manifold::Circle, &[b])?], &circle)?;
        println!("  ({a},{b}): {q:.12}  circle product {:.12}", ca * cb);
    }
    println!("full tensor spaces, both equations from V:");
    for (a, b) in [(1, 1), (1, 2), (2, 3)] {
        let v = trig(Manifold::Torus2, &[a, b])?;
        let q = expected_zeros_of_spaces(&[&v, &v], &torus)?;
        let r = |m: u32| (m * (m + 1)) as f64 / 3.0;
        println!("  ({a},{b}): {q:.12}  Kac–Rice {:.12}", 2.0 * PI * (r(a) * r(b)).sqrt());
    }
    Ok(())
}
