//! The ring generated by a few Banach fields on the torus: pairing matrices,
//! ranks, kernels and the ideal property of the kernel.
//!
//! cargo run --example ring_report

use banach_zeros::ring::{GeneratorFamily, PairingRing, DEFAULT_KERNEL_TOL};
use banach_zeros::{BanachField, ConvexBody, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid};

fn main() -> banach_zeros::Result<()> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 16)?;
    let space = FunctionSpace::trig(Manifold::Torus2, &[1, 2], true, InnerProductRule::NormalizedL2)?;
    let e = space.ellipsoid_field(&grid)?;
    let s = BanachField::constant(grid.clone(), ConvexBody::segment(&[1.0, 0.3]))?;
    // E + S is linearly dependent on the first two, so J has a degree-1 element
    let sum = BanachField::combine(&[(1.0, &e), (1.0, &s)])?;
    let ring = PairingRing::new(GeneratorFamily::new(vec![("E".into(), e), ("S".into(), s), ("E+S".into(), sum)])?)?;

    for p in 0..=ring.top_degree() {
        let l = ring.pairing_matrix(p)?;
        let k = ring.kernel(p, DEFAULT_KERNEL_TOL)?;
        println!(
            "degree {p}: L is {}x{}, rank {}, kernel dim {}, quotient dim {}",
            l.rows.len(),
            l.cols.len(),
            k.rank,
            k.basis.len(),
            k.quotient_dim()
        );
    }

    let k1 = ring.kernel(1, DEFAULT_KERNEL_TOL)?;
    for v in &k1.basis {
        let c = v.coefficients();
        println!("kernel vector (E, S, E+S) ∝ ({:.6}, {:.6}, {:.6})", c[0] / c[2], c[1] / c[2], 1.0);
        let report = ring.ideal_check(v, 10.0 * DEFAULT_KERNEL_TOL)?;
        for chk in &report.checks {
            println!(
                "  v·{}: residual {:.2e} passed {}",
                ring.family().names()[chk.generator],
                chk.residual,
                chk.passed
            );
        }
    }

    let e = ring.generator(0)?;
    let s = ring.generator(1)?;
    println!("I(E·E) = {:.10}", ring.functional_i(&ring.multiply(&e, &e)));
    println!("I(E·S) = {:.10}", ring.functional_i(&ring.multiply(&e, &s)));
    println!("I(S·S) = {:.10}", ring.functional_i(&ring.multiply(&s, &s)));
    Ok(())
}
