//! The end-to-end verification suite behind `banach-zeros verify`.
//!
//! Eight criteria, each reported with its sub-checks. Thresholds come from
//! [`Tolerances`] and problem sizes from [`VerifyScale`].

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::commands::{cmd_mc_zeros, RunOptions};
use super::config::{LoadedConfig, Tolerances, VerifyScale};
use crate::banach_field::BanachField;
use crate::convex::{mixed_volume, BodyCombination, ConvexBody, SampledBody};
use crate::density::{density_eval, density_integrate, segment_determinant_check};
use crate::error::Result;
use crate::expectation::expected_zeros_of_spaces;
use crate::function_space::{FunctionSpace, InnerProductRule};
use crate::manifold::{Manifold, QuadratureGrid};
use crate::ring::{GeneratorFamily, Monomial, PairingRing};
use crate::zeros::{estimate_expectation, TrialPlan};

#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(label: impl Into<String>, value: f64, reference: f64, error: f64, tolerance: f64) -> Self {
        Self { label: label.into(), value, reference, error, tolerance, passed: error <= tolerance }
    }

    /// A check that is simply true or false.
    fn flag(label: impl Into<String>, value: f64, reference: f64, ok: bool) -> Self {
        let error = if ok { 0.0 } else { 1.0 };
        Self { label: label.into(), value, reference, error, tolerance: 0.0, passed: ok }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    /// The headline number: the worst error over all checks.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    /// Summarizes by the check with the largest error relative to its own tolerance.
    fn from_checks(id: usize, name: &str, tolerance: f64, checks: Vec<Check>) -> Self {
        let ratio = |c: &Check| {
            if c.tolerance > 0.0 {
                c.error / c.tolerance
            } else if c.error > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        let worst = checks.iter().max_by(|a, b| ratio(a).total_cmp(&ratio(b)));
        let (value, tolerance) = worst.map_or((0.0, tolerance), |c| (c.error, c.tolerance));
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Self { id, name: name.to_string(), value, tolerance, passed, checks, notes: Vec::new() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn circle_space(m: u32) -> Result<FunctionSpace> {
    FunctionSpace::trig(Manifold::Circle, &[m], true, InnerProductRule::NormalizedL2)
}

/// A smooth random ellipsoid field on the torus, `M(x) = A(x)A(x)ᵀ + εI`.
pub fn random_ellipsoid_field<R: Rng + ?Sized>(grid: &QuadratureGrid, rng: &mut R) -> Result<BanachField> {
    let mut c = [0.0; 10];
    for v in c.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    BanachField::from_fn(grid.clone(), |x| {
        let a11 = 1.5 + c[0] * 0.5 + 0.4 * (x[0] + c[1]).cos();
        let a12 = c[2] * (x[1] + c[3]).sin();
        let a21 = c[4] * (x[0] - x[1] + c[5]).cos();
        let a22 = 1.5 + c[6] * 0.5 + 0.4 * (x[0] + c[7]).sin() * (x[1] + c[8]).cos();
        let eps = 0.05 * (1.0 + c[9].abs());
        let m =
            [a11 * a11 + a12 * a12 + eps, a11 * a21 + a12 * a22, a11 * a21 + a12 * a22, a21 * a21 + a22 * a22 + eps];
        ConvexBody::ellipsoid(DMatrix::from_row_slice(2, 2, &m))
    })
}

fn mc_plan(spaces: Vec<FunctionSpace>, trials: usize, seed: u64) -> Result<TrialPlan> {
    TrialPlan::new(spaces, trials, seed)
}

/// Quadrature against Monte Carlo on the circle.
pub fn criterion_1(scale: &VerifyScale, tol: &Tolerances, threads: Option<usize>) -> Result<CriterionResult> {
    let start = Instant::now();
    let grid = QuadratureGrid::uniform(Manifold::Circle, scale.circle_nodes)?;
    let mut checks = Vec::new();
    for &m in &scale.circle_degrees {
        let s = circle_space(m)?;
        let quad = expected_zeros_of_spaces(&[&s], &grid)?;
        let est = estimate_expectation(&mc_plan(vec![s], scale.circle_trials, scale.seed + m as u64)?, threads)?;
        let z = if est.std_error > 0.0 { (est.mean - quad).abs() / est.std_error } else { f64::INFINITY };
        checks.push(Check::new(format!("m={m} |mean-quad|/stderr"), est.mean, quad, z, tol.mc_sigmas));
    }
    let secs = start.elapsed().as_secs_f64();
    checks.push(Check::new("runtime seconds", secs, tol.circle_seconds, secs, tol.circle_seconds));
    Ok(CriterionResult::from_checks(1, "circle quadrature vs Monte Carlo", tol.mc_sigmas, checks))
}

/// `𝔐(m)/√(m(m+1)/3)` is constant in `m`.
pub fn criterion_2(scale: &VerifyScale, tol: &Tolerances) -> Result<CriterionResult> {
    let grid = QuadratureGrid::uniform(Manifold::Circle, scale.circle_nodes)?;
    let mut ratios = Vec::new();
    let mut checks = Vec::new();
    for &m in &scale.shape_degrees {
        let s = circle_space(m)?;
        let quad = expected_zeros_of_spaces(&[&s], &grid)?;
        let printed = (m as f64 * (m as f64 + 1.0) / 3.0).sqrt();
        ratios.push(quad / printed);
        checks.push(Check::flag(format!("m={m} ratio"), quad / printed, printed, true));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let spread = if ratios.is_empty() {
        f64::INFINITY
    } else {
        (ratios.iter().cloned().fold(f64::MIN, f64::max) - ratios.iter().cloned().fold(f64::MAX, f64::min)) / mean.abs()
    };
    checks.push(Check::new("relative spread of ratio", spread, 0.0, spread, tol.shape_spread));
    let mut r = CriterionResult::from_checks(2, "circle shape sqrt(m(m+1)/3)", tol.shape_spread, checks);
    r.notes.push(format!("Example constant under the default convention: {mean:.12}"));
    Ok(r)
}

/// Product systems on the torus factorize.
pub fn criterion_3(scale: &VerifyScale, tol: &Tolerances, threads: Option<usize>) -> Result<CriterionResult> {
    let cgrid = QuadratureGrid::uniform(Manifold::Circle, scale.circle_nodes)?;
    let tgrid = QuadratureGrid::uniform(Manifold::Torus2, scale.torus_nodes)?;
    let circle_value = |m: u32| -> Result<f64> { expected_zeros_of_spaces(&[&circle_space(m)?], &cgrid) };
    let product = |a: u32, b: u32| -> Result<(FunctionSpace, FunctionSpace)> {
        Ok((
            FunctionSpace::trig(Manifold::Torus2, &[a, 0], true, InnerProductRule::NormalizedL2)?,
            FunctionSpace::trig(Manifold::Torus2, &[0, b], true, InnerProductRule::NormalizedL2)?,
        ))
    };
    let mut checks = Vec::new();
    for &[a, b] in &scale.torus_degrees {
        let (v1, v2) = product(a, b)?;
        let quad = expected_zeros_of_spaces(&[&v1, &v2], &tgrid)?;
        let want = circle_value(a)? * circle_value(b)?;
        checks.push(Check::new(
            format!("({a},{b}) quadrature vs product"),
            quad,
            want,
            rel(quad, want),
            tol.factorization,
        ));
    }
    let [a, b] = scale.torus_mc_degrees;
    let (v1, v2) = product(a, b)?;
    let quad = expected_zeros_of_spaces(&[&v1, &v2], &tgrid)?;
    let mut plan = mc_plan(vec![v1, v2], scale.torus_trials, scale.seed + 100)?;
    plan.resolution = vec![scale.torus_cells; 2];
    let est = estimate_expectation(&plan, threads)?;
    let z = if est.std_error > 0.0 { (est.mean - quad).abs() / est.std_error } else { f64::INFINITY };
    checks.push(Check::new(format!("({a},{b}) |mean-quad|/stderr"), est.mean, quad, z, tol.mc_sigmas));
    Ok(CriterionResult::from_checks(3, "torus product factorization", tol.factorization, checks))
}

/// Integrated densities reproduce mixed volumes.
pub fn criterion_4(scale: &VerifyScale, tol: &Tolerances) -> Result<CriterionResult> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed + 4);
    let fields =
        (0..scale.bridge_fields).map(|_| random_ellipsoid_field(&grid, &mut rng)).collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for i in 0..fields.len() {
        let j = (i + 1) % fields.len();
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![fields[i].clone(), fields[j].clone()])?)?;
        for (label, gens, direct) in [
            ("B_i^2", vec![0, 0], BanachField::mixed_volume(&[&fields[i], &fields[i]])?),
            ("B_i B_j", vec![0, 1], BanachField::mixed_volume(&[&fields[i], &fields[j]])?),
        ] {
            let d = density_integrate(&ring, &ring.monomial(&Monomial::new(gens))?)?;
            checks.push(Check::new(format!("field {i}: {label}"), d, direct, rel(d, direct), tol.bridge));
        }
    }
    Ok(CriterionResult::from_checks(4, "density integral equals mixed volume", tol.bridge, checks))
}

/// Polarization diagonal and the disk/square mixed area.
pub fn criterion_5(scale: &VerifyScale, tol: &Tolerances) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed + 5);
    let mut worst = (0.0, 0.0, 0.0);
    for _ in 0..scale.polarization_samples {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                a[0] * a[0] + a[1] * a[1] + 1e-3,
                a[0] * a[2] + a[1] * a[3],
                a[0] * a[2] + a[1] * a[3],
                a[2] * a[2] + a[3] * a[3] + 1e-3,
            ],
        );
        let k = BodyCombination::single(ConvexBody::ellipsoid(m)?);
        let mv = mixed_volume(&[k.clone(), k.clone()], 2)?;
        let v = k.volume()?;
        if rel(mv, v) >= worst.2 {
            worst = (mv, v, rel(mv, v));
        }
    }
    let mut checks =
        vec![Check::new("worst mixed_volume(K,K) vs volume(K)", worst.0, worst.1, worst.2, tol.polarization)];
    let square = SampledBody::from_support(2, scale.square_directions, |u| u[0].abs() + u[1].abs())?;
    let mv = mixed_volume(
        &[
            BodyCombination::single(ConvexBody::unit_ball(2)),
            BodyCombination::single(ConvexBody::SupportSampled(square)),
        ],
        2,
    )?;
    checks.push(Check::new("mixed_volume(unit disk, square side 2)", mv, 4.0, (mv - 4.0).abs(), tol.disk_square));
    Ok(CriterionResult::from_checks(5, "polarization oracle", tol.polarization, checks))
}

/// Kernel, quotient and ideal properties of the pairing.
pub fn criterion_6(scale: &VerifyScale, tol: &Tolerances) -> Result<CriterionResult> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 12)?;
    let ideal_tol = tol.ideal_factor * tol.kernel;
    let mut checks = Vec::new();

    let s = FunctionSpace::trig(Manifold::Torus2, &[1, 1], true, InnerProductRule::NormalizedL2)?;
    let b = s.ellipsoid_field(&grid)?;
    let ring = PairingRing::new(GeneratorFamily::from_fields(vec![b.clone(), b.scaled(2.0)?])?)?;
    let k1 = ring.kernel(1, tol.kernel)?;
    checks.push(Check::flag("{B, 2B}: kernel dim at degree 1", k1.basis.len() as f64, 1.0, k1.basis.len() == 1));
    let kn = ring.kernel(2, tol.kernel)?;
    checks.push(Check::flag("{B, 2B}: degree-n quotient dim", kn.quotient_dim() as f64, 1.0, kn.quotient_dim() == 1));

    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed + 6);
    let (mut worst_residual, mut ideal_ok, mut dims_ok, mut ranks_ok, mut top_ok) = (0.0f64, true, true, true, true);
    for _ in 0..scale.ring_families {
        let a = random_ellipsoid_field(&grid, &mut rng)?;
        let b = random_ellipsoid_field(&grid, &mut rng)?;
        let (x, y) = (rng.random_range(0.2..2.0), rng.random_range(0.2..2.0));
        let c = BanachField::combine(&[(x, &a), (y, &b)])?;
        let ring = PairingRing::new(GeneratorFamily::from_fields(vec![a, b, c])?)?;
        let k = ring.kernel(1, tol.kernel)?;
        dims_ok &= k.basis.len() == 1;
        for v in &k.basis {
            let rep = ring.ideal_check(v, ideal_tol)?;
            ideal_ok &= rep.passed();
            worst_residual = worst_residual.max(rep.input_residual);
            for c in &rep.checks {
                worst_residual = worst_residual.max(c.residual);
            }
        }
        for p in 0..=2 {
            ranks_ok &= ring.pairing_matrix(p)?.rank(tol.kernel) == ring.pairing_matrix(2 - p)?.rank(tol.kernel);
        }
        top_ok &= ring.kernel(2, tol.kernel)?.quotient_dim() == 1;
    }
    checks.push(Check::new(
        "rank-deficient families: worst ideal residual",
        worst_residual,
        0.0,
        worst_residual,
        ideal_tol,
    ));
    checks.push(Check::flag("rank-deficient families: ideal_check passes", 0.0, 0.0, ideal_ok));
    checks.push(Check::flag("rank-deficient families: kernel dim 1", 0.0, 0.0, dims_ok));
    checks.push(Check::flag("degree-n quotient dim 1", 0.0, 0.0, top_ok));
    checks.push(Check::flag("rank(L_p) = rank(L_{n-p})", 0.0, 0.0, ranks_ok));
    Ok(CriterionResult::from_checks(6, "ring suite", ideal_tol, checks))
}

/// Density axioms on random frames.
pub fn criterion_7(scale: &VerifyScale, tol: &Tolerances) -> Result<CriterionResult> {
    let grid = QuadratureGrid::uniform(Manifold::Torus2, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scale.seed + 7);
    let a = random_ellipsoid_field(&grid, &mut rng)?;
    let p: f64 = rng.random_range(0.5..1.5);
    let seg = BanachField::from_fn(grid.clone(), |x| {
        Ok(ConvexBody::segment(&[p + 0.3 * x[0].cos(), 0.7 + 0.2 * x[1].sin()]))
    })?;
    let ring = PairingRing::new(GeneratorFamily::from_fields(vec![a, seg])?)?;
    let elems = [
        ring.monomial(&Monomial::new(vec![0, 0]))?,
        ring.monomial(&Monomial::new(vec![0, 1]))?,
        ring.element(2, vec![1.0, -0.7, 0.4])?,
    ];
    let gens = [ring.generator(0)?, ring.generator(1)?];
    let frame = |rng: &mut ChaCha8Rng, k: usize| -> Vec<Vec<f64>> {
        (0..k).map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    };
    let (mut scaling, mut change, mut width, mut det) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..scale.density_frames {
        let node = rng.random_range(0..grid.len());
        let xi = frame(&mut rng, 2);
        let m = frame(&mut rng, 2);
        let det_m = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let xi2: Vec<Vec<f64>> =
            (0..2).map(|i| (0..2).map(|r| m[i][0] * xi[0][r] + m[i][1] * xi[1][r]).collect()).collect();
        let c: f64 = rng.random_range(-3.0..3.0);
        let xi_c = vec![xi[0].iter().map(|v| v * c).collect(), xi[1].clone()];
        for e in &elems {
            let d = density_eval(&ring, e, node, &xi)?;
            change = change.max(rel(density_eval(&ring, e, node, &xi2)?, det_m.abs() * d));
            scaling = scaling.max(rel(density_eval(&ring, e, node, &xi_c)?, c.abs() * d));
        }
        let u = frame(&mut rng, 1);
        for (g, e) in gens.iter().enumerate() {
            let d1 = density_eval(&ring, e, node, &u)?;
            let h = ring.family().fields()[g].fiber(node).support(&u[0]);
            width = width.max(rel(d1, 2.0 * h));
        }
        let segs = frame(&mut rng, 2);
        det = det.max(segment_determinant_check(&segs, &xi)?.rel_error);
    }
    let checks = vec![
        Check::new("frame scaling |c|", scaling, 0.0, scaling, tol.density),
        Check::new("frame change |det A|", change, 0.0, change, tol.density),
        Check::new("d1 = 2 h(xi)", width, 0.0, width, tol.density),
        Check::new("segment determinant identity", det, 0.0, det, tol.density),
    ];
    Ok(CriterionResult::from_checks(7, "density axioms", tol.density, checks))
}

/// Per-trial counts do not depend on the thread count.
pub fn criterion_8(scale: &VerifyScale) -> Result<CriterionResult> {
    let text = format!(
        "manifold = \"circle\"\n[[spaces]]\nkind = \"trig\"\ndegrees = [3]\n[mc]\ntrials = {}\nseed = {}\n",
        scale.determinism_trials,
        scale.seed + 200
    );
    let lc = LoadedConfig::parse(&text, Default::default())?;
    let mut outputs = Vec::new();
    for &t in &scale.determinism_threads {
        let rep = cmd_mc_zeros(&lc, &RunOptions { threads: Some(t), ..Default::default() })?;
        let counts = rep.table("mc_counts").expect("mc-zeros emits counts").to_csv()?;
        outputs.push((t, counts));
    }
    let checks = outputs
        .iter()
        .map(|(t, bytes)| {
            Check::flag(
                format!("{t} threads byte-identical"),
                *t as f64,
                scale.determinism_threads[0] as f64,
                *bytes == outputs[0].1,
            )
        })
        .collect();
    Ok(CriterionResult::from_checks(8, "determinism across thread counts", 0.0, checks))
}

pub fn run_all(scale: &VerifyScale, tol: &Tolerances, threads: Option<usize>) -> Result<Vec<CriterionResult>> {
    Ok(vec![
        criterion_1(scale, tol, threads)?,
        criterion_2(scale, tol)?,
        criterion_3(scale, tol, threads)?,
        criterion_4(scale, tol)?,
        criterion_5(scale, tol)?,
        criterion_6(scale, tol)?,
        criterion_7(scale, tol)?,
        criterion_8(scale)?,
    ])
}
