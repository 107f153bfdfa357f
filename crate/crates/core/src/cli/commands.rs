//! The five subcommands, as library functions returning a [`Report`].

use std::path::PathBuf;

use nalgebra::DMatrix;

use super::config::{LoadedConfig, RunConfig, SpaceConfig};
use super::report::{Cell, Report, Table};
use super::verify;
use crate::banach_field::BanachField;
use crate::convex::{ConvexBody, SampledBody};
use crate::density::{density_eval, density_integrate, density_separation, Separation};
use crate::error::{Error, Result};
use crate::expectation::{expected_zeros, expected_zeros_of_spaces};
use crate::function_space::FunctionSpace;
use crate::manifold::{Manifold, QuadratureGrid, SubdomainBox};
use crate::ring::{GeneratorFamily, Monomial, PairingRing};
use crate::zeros::{estimate_expectation, TrialPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ExpectedZeros,
    McZeros,
    RingReport,
    DensityEval,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ExpectedZeros => "expected-zeros",
            Command::McZeros => "mc-zeros",
            Command::RingReport => "ring-report",
            Command::DensityEval => "density-eval",
            Command::Verify => "verify",
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub tol_scale: f64,
    pub out: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: None, seed: None, tol_scale: 1.0, out: None }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_scale > 0.0 && self.tol_scale.is_finite()) {
            return Err(Error::config("--tol-scale must be a positive number"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("--threads must be at least 1"));
        }
        Ok(())
    }
}

pub fn run(cmd: Command, cfg: &LoadedConfig, opts: &RunOptions) -> Result<Report> {
    opts.validate()?;
    let mut report = match cmd {
        Command::ExpectedZeros => cmd_expected_zeros(cfg)?,
        Command::McZeros => cmd_mc_zeros(cfg, opts)?,
        Command::RingReport => cmd_ring_report(cfg)?,
        Command::DensityEval => cmd_density_eval(cfg, opts)?,
        Command::Verify => cmd_verify(cfg, opts)?,
    };
    report.finish();
    Ok(report)
}

pub(crate) fn quadrature_grid(cfg: &RunConfig) -> Result<QuadratureGrid> {
    QuadratureGrid::new(cfg.manifold, &cfg.grid_counts())
}

pub(crate) fn build_spaces(lc: &LoadedConfig, grid: &QuadratureGrid) -> Result<Vec<FunctionSpace>> {
    lc.config
        .spaces
        .iter()
        .map(|s| match s {
            SpaceConfig::Trig { degrees, constant, inner_product } => {
                FunctionSpace::trig(lc.config.manifold, degrees, *constant, *inner_product)
            }
            SpaceConfig::Tabulated { path } => {
                FunctionSpace::load_tabulated(lc.resolve(path), lc.config.manifold, grid)
            }
        })
        .collect()
}

/// One space per equation, or a single space used for every equation.
fn system(spaces: &[FunctionSpace], manifold: Manifold) -> Result<Vec<&FunctionSpace>> {
    let n = manifold.dim();
    match spaces.len() {
        0 => Err(Error::config("no [[spaces]] configured")),
        1 => Ok(vec![&spaces[0]; n]),
        k if k == n => Ok(spaces.iter().collect()),
        k => Err(Error::config(format!("{manifold:?} needs 1 or {n} spaces, got {k}"))),
    }
}

fn domain(cfg: &RunConfig) -> Result<Option<SubdomainBox>> {
    cfg.mc.domain.as_ref().map(|d| SubdomainBox::new(d.iter().map(|&[lo, hi]| (lo, hi)).collect())).transpose()
}

pub fn cmd_expected_zeros(lc: &LoadedConfig) -> Result<Report> {
    let cfg = &lc.config;
    let mut report = Report::new("expected-zeros", &lc.hash);
    let grid = quadrature_grid(cfg)?;
    if cfg.spaces.is_empty() && cfg.sweep.is_none() {
        return Err(Error::config("expected-zeros needs [[spaces]] or a [sweep]"));
    }
    if !cfg.spaces.is_empty() {
        let spaces = build_spaces(lc, &grid)?;
        for s in &spaces {
            report.notes.extend(s.warnings().iter().cloned());
        }
        let sys = system(&spaces, cfg.manifold)?;
        let value = expected_zeros_of_spaces(&sys, &grid)?;
        report.entry("expected_zeros", value);
        let mut t = Table::new("expected_zeros", &["quantity", "value"]);
        t.push(vec!["expected_zeros".into(), value.into()]);
        t.push(vec!["grid_nodes".into(), grid.len().into()]);
        report.tables.push(t);
    }
    if let Some(sw) = &cfg.sweep {
        let mut t = Table::new("circle_sweep", &["m", "expected_zeros_quad", "ratio_to_sqrt_m_m1_over_3"]);
        for &m in &sw.degrees {
            let s = FunctionSpace::trig(Manifold::Circle, &[m], sw.constant, sw.inner_product)?;
            let v = expected_zeros_of_spaces(&[&s], &grid)?;
            let shape = (m as f64 * (m as f64 + 1.0) / 3.0).sqrt();
            let ratio = if shape > 0.0 { v / shape } else { f64::NAN };
            t.push(vec![m.into(), v.into(), ratio.into()]);
        }
        report.tables.push(t);
    }
    Ok(report)
}

pub fn cmd_mc_zeros(lc: &LoadedConfig, opts: &RunOptions) -> Result<Report> {
    let cfg = &lc.config;
    let mut report = Report::new("mc-zeros", &lc.hash);
    let grid = quadrature_grid(cfg)?;
    let spaces = build_spaces(lc, &grid)?;
    let sys = system(&spaces, cfg.manifold)?;
    let seed = opts.seed.unwrap_or(cfg.mc.seed);
    let mut plan = TrialPlan::new(sys.iter().map(|&s| s.clone()).collect(), cfg.mc.trials, seed)?;
    if let Some(r) = &cfg.mc.resolution {
        plan.resolution = r.clone();
    }
    plan.refine_tol = cfg.mc.refine_tol;
    plan.domain = domain(cfg)?;
    let est = estimate_expectation(&plan, opts.threads)?;

    // quadrature value over the same region
    let mut fields: Vec<BanachField> = Vec::new();
    for s in &spaces {
        let f = s.ellipsoid_field(&grid)?;
        fields.push(match &plan.domain {
            Some(d) => f.restrict(d)?,
            None => f,
        });
    }
    let refs: Vec<&BanachField> =
        if fields.len() == 1 { vec![&fields[0]; cfg.manifold.dim()] } else { fields.iter().collect() };
    let quad = expected_zeros(&refs)?;
    let z = if est.std_error > 0.0 { (est.mean - quad) / est.std_error } else { f64::NAN };

    report.seed = Some(seed);
    report.entry("mean", est.mean);
    report.entry("std_error", est.std_error);
    report.entry("trials", est.trials);
    report.entry("expected_zeros_quad", quad);
    report.entry("z_score", z);
    let mut t = Table::new("mc_zeros", &["mean", "std_error", "trials", "seed", "expected_zeros_quad", "z_score"]);
    t.push(vec![est.mean.into(), est.std_error.into(), est.trials.into(), seed.into(), quad.into(), z.into()]);
    report.tables.push(t);
    let mut c = Table::new("mc_counts", &["trial", "count"]);
    for (i, &k) in est.counts.iter().enumerate() {
        c.push(vec![i.into(), k.into()]);
    }
    report.tables.push(c);
    Ok(report)
}

pub(crate) fn build_ring(lc: &LoadedConfig) -> Result<PairingRing> {
    let cfg = &lc.config;
    let ring = cfg.ring.as_ref().ok_or_else(|| Error::config("no [ring] section"))?;
    let grid = quadrature_grid(cfg)?;
    let spaces = build_spaces(lc, &grid)?;
    let n = cfg.manifold.dim();
    let mut gens = Vec::new();
    for (i, g) in ring.generators.iter().enumerate() {
        let field = if let Some(s) = g.space {
            spaces[s].ellipsoid_field(&grid)?
        } else if let Some(a) = &g.segment {
            if a.len() != n {
                return Err(Error::config(format!("generator {i}: segment needs {n} coordinates")));
            }
            BanachField::constant(grid.clone(), ConvexBody::segment(a))?
        } else if let Some(rows) = &g.ellipsoid {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::config(format!("generator {i}: ellipsoid needs an {n}×{n} matrix")));
            }
            let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
            BanachField::constant(grid.clone(), ConvexBody::ellipsoid(m)?)?
        } else if let Some(vs) = &g.polygon {
            if n != 2 {
                return Err(Error::config(format!("generator {i}: polygons need the torus")));
            }
            let body = SampledBody::from_support(2, cfg.directions, |u| {
                vs.iter().map(|v| (v[0] * u[0] + v[1] * u[1]).abs()).fold(0.0, f64::max)
            })?;
            BanachField::constant(grid.clone(), ConvexBody::SupportSampled(body))?
        } else {
            unreachable!("validated")
        };
        let name = g.name.clone().unwrap_or_else(|| format!("B{i}"));
        gens.push((name, if g.scale == 1.0 { field } else { field.scaled(g.scale)? }));
    }
    PairingRing::new(GeneratorFamily::new(gens)?)
}

fn monomial_label(ring: &PairingRing, m: &Monomial) -> String {
    if m.degree() == 0 {
        return "1".to_string();
    }
    let names = ring.family().names();
    m.generators().iter().map(|&i| names[i].as_str()).collect::<Vec<_>>().join("*")
}

pub fn cmd_ring_report(lc: &LoadedConfig) -> Result<Report> {
    let ring_cfg = lc.config.ring.as_ref().ok_or_else(|| Error::config("ring-report needs a [ring] section"))?;
    let tol = ring_cfg.kernel_tol;
    let ideal_tol = ring_cfg.ideal_tol.unwrap_or(10.0 * tol);
    let ring = build_ring(lc)?;
    let n = ring.top_degree();
    let mut report = Report::new("ring-report", &lc.hash);

    let mut ranks = Table::new(
        "ring_ranks",
        &["degree", "rows", "cols", "rank", "kernel_dim", "quotient_dim", "rank_complement", "ranks_match"],
    );
    let mut pairing = Table::new("ring_pairing", &["degree", "row", "col", "value"]);
    let mut ideal =
        Table::new("ring_ideal", &["degree", "kernel_vector", "input_residual", "generator", "residual", "passed"]);
    let mut all_ok = true;
    let rank_of = |p: usize| -> Result<usize> { Ok(ring.pairing_matrix(p)?.rank(tol)) };
    for p in 0..=n {
        let pm = ring.pairing_matrix(p)?;
        for (i, r) in pm.rows.iter().enumerate() {
            for (j, c) in pm.cols.iter().enumerate() {
                pairing.push(vec![
                    p.into(),
                    monomial_label(&ring, r).into(),
                    monomial_label(&ring, c).into(),
                    pm.matrix[(i, j)].into(),
                ]);
            }
        }
        let k = ring.kernel(p, tol)?;
        let rc = rank_of(n - p)?;
        let matches = rc == k.rank;
        all_ok &= matches;
        ranks.push(vec![
            p.into(),
            pm.rows.len().into(),
            pm.cols.len().into(),
            k.rank.into(),
            k.basis.len().into(),
            k.quotient_dim().into(),
            rc.into(),
            matches.into(),
        ]);
        report.entry(
            &format!("rank(L_{p}) = rank(L_{})", n - p),
            Cell::Text(format!("{} = {rc} {}", k.rank, if matches { "ok" } else { "MISMATCH" })),
        );
        for (vi, v) in k.basis.iter().enumerate() {
            let rep = ring.ideal_check(v, ideal_tol)?;
            all_ok &= rep.passed();
            if rep.checks.is_empty() {
                ideal.push(vec![
                    p.into(),
                    vi.into(),
                    rep.input_residual.into(),
                    "-".into(),
                    0.0.into(),
                    rep.passed().into(),
                ]);
            }
            for c in &rep.checks {
                ideal.push(vec![
                    p.into(),
                    vi.into(),
                    rep.input_residual.into(),
                    ring.family().names()[c.generator].clone().into(),
                    c.residual.into(),
                    c.passed.into(),
                ]);
            }
        }
    }
    report.entry("kernel_tol", tol);
    report.entry("ideal_tol", ideal_tol);
    report.tables.extend([ranks, pairing, ideal]);
    report.passed = Some(all_ok);
    Ok(report)
}

pub fn cmd_density_eval(lc: &LoadedConfig, opts: &RunOptions) -> Result<Report> {
    let dc = lc.config.density.as_ref().ok_or_else(|| Error::config("density-eval needs a [density] section"))?;
    let ring = build_ring(lc)?;
    let n = ring.top_degree();
    let elem = ring.element(dc.degree, dc.coefficients.clone()).map_err(|e| Error::config(e.to_string()))?;
    let grid = ring.family().fields()[0].grid().clone();
    let nodes = dc.nodes.clone().unwrap_or_else(|| (0..grid.len()).collect());
    if let Some(&bad) = nodes.iter().find(|&&i| i >= grid.len()) {
        return Err(Error::config(format!("density node {bad} outside the grid")));
    }
    let frames = dc.frames.clone().unwrap_or_else(|| {
        vec![(0..dc.degree).map(|i| (0..n).map(|r| if r == i { 1.0 } else { 0.0 }).collect()).collect()]
    });
    let mut report = Report::new("density-eval", &lc.hash);
    let mut t = Table::new("density", &["node", "frame", "density"]);
    for &node in &nodes {
        for (fi, frame) in frames.iter().enumerate() {
            t.push(vec![node.into(), fi.into(), density_eval(&ring, &elem, node, frame)?.into()]);
        }
    }
    report.tables.push(t);
    if dc.degree == n {
        let integral = density_integrate(&ring, &elem)?;
        let i = ring.functional_i(&elem);
        report.entry("density_integral", integral);
        report.entry("functional_I", i);
        report.entry("relative_gap", if i != 0.0 { (integral - i).abs() / i.abs() } else { integral.abs() });
    }
    if let Some(other) = &dc.compare {
        use rand::SeedableRng;
        let t2 = ring.element(dc.degree, other.clone()).map_err(|e| Error::config(e.to_string()))?;
        let seed = opts.seed.unwrap_or(lc.config.mc.seed);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        report.seed = Some(seed);
        match density_separation(&ring, &elem, &t2, dc.budget, 1e-8, &mut rng)? {
            Separation::Separated { node, frame, values } => {
                report.entry("separation", "separated");
                report.entry("separation_node", node);
                report.entry("separation_frame", format!("{frame:?}"));
                report.entry("separation_values", format!("{:?}", values));
            }
            Separation::Inconclusive { max_gap } => {
                report.entry("separation", "inconclusive");
                report.entry("max_gap", max_gap);
            }
        }
    }
    Ok(report)
}

pub fn cmd_verify(lc: &LoadedConfig, opts: &RunOptions) -> Result<Report> {
    let mut report = Report::new("verify", &lc.hash);
    let tol = lc.config.tolerances.scaled(opts.tol_scale);
    let mut scale = lc.config.verify.clone();
    if let Some(s) = opts.seed {
        scale.seed = s;
    }
    report.seed = Some(scale.seed);
    let results = verify::run_all(&scale, &tol, opts.threads)?;
    let mut summary = Table::new("verify", &["criterion", "name", "value", "tolerance", "passed"]);
    let mut detail =
        Table::new("verify_details", &["criterion", "check", "value", "reference", "error", "tolerance", "passed"]);
    for r in &results {
        summary.push(vec![r.id.into(), r.name.clone().into(), r.value.into(), r.tolerance.into(), r.passed.into()]);
        for c in &r.checks {
            detail.push(vec![
                r.id.into(),
                c.label.clone().into(),
                c.value.into(),
                c.reference.into(),
                c.error.into(),
                c.tolerance.into(),
                c.passed.into(),
            ]);
        }
        report.entry(&format!("criterion_{}", r.id), if r.passed { "PASS" } else { "FAIL" });
        report.notes.extend(r.notes.iter().cloned());
    }
    report.entry("tol_scale", opts.tol_scale);
    report.tables.extend([summary, detail]);
    report.passed = Some(results.iter().all(|r| r.passed));
    Ok(report)
}
