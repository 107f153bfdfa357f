//! Monte Carlo zero counting against the quadrature value, on the circle, on
//! the torus, and on a sub-box of the torus.
//!
//! cargo run --release --example monte_carlo_zeros

use std::f64::consts::PI;

use banach_zeros::zeros::{estimate_expectation, TrialPlan, ZeroSampler};
use banach_zeros::{
    expected_zeros, expected_zeros_of_spaces, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid, SubdomainBox,
};

fn main() -> banach_zeros::Result<()> {
    let circle = QuadratureGrid::uniform(Manifold::Circle, 256)?;
    let s = FunctionSpace::trig(Manifold::Circle, &[4], true, InnerProductRule::NormalizedL2)?;
    let est = estimate_expectation(&TrialPlan::new(vec![s.clone()], 20_000, 1)?, None)?;
    let q = expected_zeros_of_spaces(&[&s], &circle)?;
    println!("circle m=4: MC {:.4} ± {:.4}, quadrature {q:.6}", est.mean, est.std_error);

    let plan = TrialPlan::new(vec![s], 3, 1)?;
    let sampler = ZeroSampler::new(&plan)?;
    for trial in 0..3 {
        let zeros = sampler.zeros(trial)?;
        let shown: Vec<String> = zeros.iter().map(|z| format!("{:.4}", z[0])).collect();
        println!("  trial {trial}: {} zeros at [{}]", zeros.len(), shown.join(", "));
    }

    let torus = QuadratureGrid::uniform(Manifold::Torus2, 48)?;
    let v = FunctionSpace::trig(Manifold::Torus2, &[1, 2], true, InnerProductRule::NormalizedL2)?;
    let mut plan = TrialPlan::new(vec![v.clone(), v.clone()], 2000, 2)?;
    plan.resolution = vec![256, 256];
    let est = estimate_expectation(&plan, None)?;
    let q = expected_zeros_of_spaces(&[&v, &v], &torus)?;
    println!("torus (1,2): MC {:.4} ± {:.4}, quadrature {q:.6}", est.mean, est.std_error);

    // edges on multiples of the grid step 2π/48; other boxes pick up an O(h) quadrature bias
    let u = SubdomainBox::new(vec![(0.0, PI), (PI / 2.0, 3.0 * PI / 2.0)])?;
    plan.domain = Some(u.clone());
    let est = estimate_expectation(&plan, None)?;
    let field = v.ellipsoid_field(&torus)?.restrict(&u)?;
    let q = expected_zeros(&[&field, &field])?;
    println!("torus (1,2) on [0,π)×[π/2,3π/2): MC {:.4} ± {:.4}, quadrature {q:.6}", est.mean, est.std_error);
    Ok(())
}
