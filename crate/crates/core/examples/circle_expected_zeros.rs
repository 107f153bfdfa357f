//! Expected zeros of random trigonometric polynomials on the circle, from the
//! volume of the ellipsoid field, for degrees 1 to 8.
//!
//! cargo run --example circle_expected_zeros

use banach_zeros::{expected_zeros_of_spaces, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid};

fn main() -> banach_zeros::Result<()> {
    let grid = QuadratureGrid::uniform(Manifold::Circle, 256)?;
    println!("{:>2} {:>20} {:>20} {:>18}", "m", "expected zeros", "2·sqrt(m(m+1)/3)", "ratio to sqrt(..)");
    for m in 1..=8u32 {
        let space = FunctionSpace::trig(Manifold::Circle, &[m], true, InnerProductRule::NormalizedL2)?;
        let value = expected_zeros_of_spaces(&[&space], &grid)?;
        let shape = (m as f64 * (m as f64 + 1.0) / 3.0).sqrt();
        println!("{m:>2} {value:>20.15} {:>20.15} {:>18.15}", 2.0 * shape, value / shape);
    }

    // without the constant term the count changes; the inner product rule does not matter
    let no_const = FunctionSpace::trig(Manifold::Circle, &[3], false, InnerProductRule::NormalizedL2)?;
    let plain = FunctionSpace::trig(Manifold::Circle, &[3], true, InnerProductRule::PlainL2)?;
    println!("m=3 without constant: {:.15}", expected_zeros_of_spaces(&[&no_const], &grid)?);
    println!("m=3 with PlainL2:     {:.15}", expected_zeros_of_spaces(&[&plain], &grid)?);
    Ok(())
}
