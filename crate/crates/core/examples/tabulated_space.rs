//! A function space given by tabulated values and derivatives on the grid,
//! written to the JSON schema, read back, and used for expected zeros.
//!
//! cargo run --example tabulated_space

use banach_zeros::function_space::TabulatedSpaceFile;
use banach_zeros::{expected_zeros_of_spaces, FunctionSpace, InnerProductRule, Manifold, QuadratureGrid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = QuadratureGrid::uniform(Manifold::Circle, 256)?;
    // basis 1, cos θ, sin θ, cos 2θ, sin 2θ with the PlainL2 Gram diag(2π, π, π, π, π)
    let basis = |t: f64| [1.0, t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()];
    let deriv = |t: f64| [0.0, -t.sin(), t.cos(), -2.0 * (2.0 * t).sin(), 2.0 * (2.0 * t).cos()];
    let pi = std::f64::consts::PI;
    let mut gram = vec![0.0; 25];
    for (i, g) in [2.0 * pi, pi, pi, pi, pi].into_iter().enumerate() {
        gram[i * 5 + i] = g;
    }
    let nodes = grid
        .nodes()
        .map(|x| banach_zeros::function_space::TabulatedNode {
            values: basis(x[0]).to_vec(),
            derivatives: deriv(x[0]).to_vec(),
        })
        .collect();
    let file = TabulatedSpaceFile { manifold: Manifold::Circle, grid: vec![256], basis_count: 5, gram, nodes };

    let dir = std::env::temp_dir().join("banach_zeros_tabulated_example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("trig2.json");
    std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
    println!("wrote {}", path.display());

    let tab = FunctionSpace::load_tabulated(&path, Manifold::Circle, &grid)?;
    let trig = FunctionSpace::trig(Manifold::Circle, &[2], true, InnerProductRule::NormalizedL2)?;
    println!("tabulated: {:.15}", expected_zeros_of_spaces(&[&tab], &grid)?);
    println!("trig:      {:.15}", expected_zeros_of_spaces(&[&trig], &grid)?);
    // the derivative spot check compares against grid central differences, whose
    // truncation error exceeds its threshold on coarse grids
    if !tab.warnings().is_empty() {
        println!("warnings: {:?}", tab.warnings());
    }
    Ok(())
}
