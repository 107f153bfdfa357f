//! Banach fields on the torus: volumes, mixed volumes, combinations,
//! restriction to a box, and virtual (signed) fields.
//!
//! cargo run --example banach_fields

use banach_zeros::{BanachField, ConvexBody, Manifold, QuadratureGrid, SubdomainBox, VirtualBanachField};
use nalgebra::DMatrix;

fn main() -> banach_zeros::Result<()> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 32)?;
    let ball = BanachField::constant(grid.clone(), ConvexBody::unit_ball(2))?;
    let wobble = BanachField::from_fn(grid.clone(), |x| {
        let a = 1.0 + 0.4 * x[0].cos();
        let b = 0.6 + 0.2 * x[1].sin();
        ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &[a * a, 0.1, 0.1, b * b]))
    })?;
    let seg = BanachField::constant(grid.clone(), ConvexBody::segment(&[1.0, 0.0]))?;

    println!("vol(B)          = {:.12}  ((2π)²·π)", ball.volume()?);
    println!("vol(E)          = {:.12}", wobble.volume()?);
    println!("vol(B, E)       = {:.12}", BanachField::mixed_volume(&[&ball, &wobble])?);
    println!("vol(B, S)       = {:.12}  ((2π)²·2)", BanachField::mixed_volume(&[&ball, &seg])?);

    let sum = BanachField::combine(&[(1.0, &ball), (2.0, &seg)])?;
    let expand = ball.volume()? + 4.0 * BanachField::mixed_volume(&[&ball, &seg])?;
    println!("vol(B + 2S)     = {:.12}  (expanded: {expand:.12})", sum.volume()?);

    let quarter = SubdomainBox::new(vec![(0.0, std::f64::consts::PI), (0.0, std::f64::consts::PI)])?;
    println!("vol(Res_U B)    = {:.12}  (a quarter of vol(B))", ball.restrict(&quarter)?.volume()?);

    // (E − B) paired with S, by multilinear expansion
    let diff = VirtualBanachField::difference(wobble.clone(), ball.clone());
    let v = VirtualBanachField::mixed_volume(&[diff, seg.clone().into()])?;
    let direct = BanachField::mixed_volume(&[&wobble, &seg])? - BanachField::mixed_volume(&[&ball, &seg])?;
    println!("vol(E − B, S)   = {v:.12}  (difference of terms: {direct:.12})");
    Ok(())
}
