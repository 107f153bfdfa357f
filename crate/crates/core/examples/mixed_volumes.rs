//! Convex bodies in a 2-D fiber: support functions, Minkowski sums, areas,
//! projections and mixed areas.
//!
//! cargo run --example mixed_volumes

use banach_zeros::convex::planar::ellipse_perimeter;
use banach_zeros::convex::SampledBody;
use banach_zeros::{mixed_volume, BodyCombination, ConvexBody};
use nalgebra::DMatrix;

fn main() -> banach_zeros::Result<()> {
    let disk = BodyCombination::single(ConvexBody::unit_ball(2));
    let square =
        BodyCombination::new(vec![(1.0, ConvexBody::segment(&[1.0, 0.0])), (1.0, ConvexBody::segment(&[0.0, 1.0]))])?;
    println!("area(disk)            = {:.15}", disk.volume()?);
    println!("area(square, side 2)  = {:.15}", square.volume()?);
    println!(
        "V(disk, square)       = {:.15}  (half the perimeter: 4)",
        mixed_volume(&[disk.clone(), square.clone()], 2)?
    );

    let mut sum = disk.clone();
    sum.add_scaled(1.0, &square);
    println!("area(disk + square)   = {:.15}  (4 + 2·4 + π)", sum.volume()?);

    // the ellipse with semi-axes 2 and 0.5
    let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]);
    let ellipse = BodyCombination::single(ConvexBody::ellipsoid(m)?);
    let v = mixed_volume(&[disk.clone(), ellipse.clone()], 2)?;
    println!("V(disk, ellipse)      = {v:.15}  (perimeter/2 = {:.15})", ellipse_perimeter(2.0, 0.5) / 2.0);

    // a body known only by its support function
    let sampled = SampledBody::from_support(2, 3600, |u| u[0].abs().max(u[1].abs()) + 0.5 * u[0].abs())?;
    let sampled = BodyCombination::single(ConvexBody::SupportSampled(sampled));
    println!(
        "sampled body: area {:.10}, V(disk, ·) {:.10}",
        sampled.volume()?,
        mixed_volume(&[disk, sampled.clone()], 2)?
    );

    let p = ellipse.project(&[vec![1.0, 1.0]])?;
    println!("ellipse projected to the line (1,1): length {:.15}", p.volume()?);
    let p = sampled.project(&[vec![2.0, 0.0], vec![0.5, 1.0]])?;
    println!("sampled body under a map of |det| 2: area {:.10}", p.volume()?);
    Ok(())
}
