//! Monte Carlo zero counting for random systems.
//!
//! One equation on the circle: sign changes on a periodic scan, refined by
//! bisection. Two equations on the torus: marching squares on each function's
//! corner values, counting intersections of the two bilinear zero segments
//! cell by cell. A scan value that is exactly zero shifts the whole scan by a
//! fraction of a step and starts over.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function_space::{FunctionSpace, GridEvaluator, RandomFunction};
use crate::manifold::{Manifold, SubdomainBox, PERIOD};

pub const DEFAULT_SCAN_1D: usize = 4096;
pub const DEFAULT_CELLS_2D: usize = 512;
pub const DEFAULT_REFINE_TOL: f64 = 1e-12;
/// Dedupe radius as a fraction of the cell step.
pub const DEFAULT_DEDUPE_FRACTION: f64 = 1e-6;

/// Scan shifts tried in order, as fractions of a step.
const SHIFTS: [f64; 5] = [0.0, 0.5, 0.25, 0.75, 0.125];
/// Torus shifts differ between coordinates so diagonal zero sets are avoided too.
const SHIFTS_2D: [[f64; 2]; 5] = [[0.0, 0.0], [0.5, 0.25], [0.25, 0.625], [0.75, 0.375], [0.125, 0.9375]];

/// Roots from a periodic scan `values[i] = f(offset + i·h)`. `None` if a scan
/// value is exactly zero.
pub fn roots_from_scan(values: &[f64], offset: f64, f: impl Fn(f64) -> f64, refine_tol: f64) -> Option<Vec<f64>> {
    if values.contains(&0.0) {
        return None;
    }
    let n = values.len();
    let h = PERIOD / n as f64;
    let mut roots = Vec::new();
    for i in 0..n {
        let (fa, fb) = (values[i], values[(i + 1) % n]);
        if (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let (mut a, mut b) = (offset + i as f64 * h, offset + (i + 1) as f64 * h);
        let sa = fa > 0.0;
        while b - a > refine_tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if (fm > 0.0) == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        roots.push((0.5 * (a + b)).rem_euclid(PERIOD));
    }
    Some(roots)
}

/// Zeros of `f` on the circle from a scan with `resolution` points.
pub fn count_zeros_1d(f: impl Fn(f64) -> f64, resolution: usize, refine_tol: f64) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(Error::config("scan resolution must be at least 2"));
    }
    let h = PERIOD / resolution as f64;
    for s in SHIFTS {
        let offset = s * h;
        let values: Vec<f64> = (0..resolution).map(|i| f(offset + i as f64 * h)).collect();
        if let Some(r) = roots_from_scan(&values, offset, &f, refine_tol) {
            return Ok(r);
        }
    }
    Err(Error::numeric("every shifted scan hit an exact zero"))
}

/// Zero segment of one bilinear cell with corners `c = [f(0,0), f(1,0), f(1,1), f(0,1)]`
/// in local coordinates. Up to two segments (saddle case).
fn cell_segments(c: [f64; 4]) -> ([[f64; 4]; 2], usize) {
    let pos = c.map(|v| v > 0.0);
    // crossing on edge k between corner k and corner k+1
    let corner = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut cross = [[0.0; 2]; 4];
    let mut has = [false; 4];
    for k in 0..4 {
        let j = (k + 1) % 4;
        if pos[k] != pos[j] {
            // interpolate from the lower-numbered grid corner so neighbours agree bitwise
            let (lo, hi) = if k < j { (k, j) } else { (j, k) };
            let t = c[lo] / (c[lo] - c[hi]);
            let p = [
                corner[lo][0] + t * (corner[hi][0] - corner[lo][0]),
                corner[lo][1] + t * (corner[hi][1] - corner[lo][1]),
            ];
            cross[k] = p;
            has[k] = true;
        }
    }
    let seg = |a: usize, b: usize| [cross[a][0], cross[a][1], cross[b][0], cross[b][1]];
    let crossings: Vec<usize> = (0..4).filter(|&k| has[k]).collect();
    match crossings.len() {
        2 => ([seg(crossings[0], crossings[1]), [0.0; 4]], 1),
        4 => {
            let centre = 0.25 * (c[0] + c[1] + c[2] + c[3]);
            if (centre > 0.0) == pos[0] {
                // corners 1 and 3 are cut off
                ([seg(0, 1), seg(2, 3)], 2)
            } else {
                ([seg(3, 0), seg(1, 2)], 2)
            }
        }
        _ => ([[0.0; 4]; 2], 0),
    }
}

fn intersect(p: [f64; 4], q: [f64; 4]) -> Option<[f64; 2]> {
    const SLACK: f64 = 1e-12;
    let r = [p[2] - p[0], p[3] - p[1]];
    let w = [q[2] - q[0], q[3] - q[1]];
    let denom = r[0] * w[1] - r[1] * w[0];
    if denom == 0.0 {
        return None;
    }
    let d = [q[0] - p[0], q[1] - p[1]];
    let t = (d[0] * w[1] - d[1] * w[0]) / denom;
    let s = (d[0] * r[1] - d[1] * r[0]) / denom;
    if (-SLACK..=1.0 + SLACK).contains(&t) && (-SLACK..=1.0 + SLACK).contains(&s) {
        Some([p[0] + t * r[0], p[1] + t * r[1]])
    } else {
        None
    }
}

fn periodic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PERIOD);
    d.min(PERIOD - d)
}

/// Common zeros from two periodic grid samplings (row-major, first coordinate
/// slowest) at `offset + (i₁h₁, i₂h₂)`. `None` if any corner value is exactly zero.
pub fn zeros_from_grids(
    f1: &[f64],
    f2: &[f64],
    counts: [usize; 2],
    offset: [f64; 2],
    dedupe_radius: f64,
) -> Option<Vec<[f64; 2]>> {
    if f1.iter().chain(f2).any(|&v| v == 0.0) {
        return None;
    }
    let [n1, n2] = counts;
    let h = [PERIOD / n1 as f64, PERIOD / n2 as f64];
    let s1: Vec<bool> = f1.iter().map(|&v| v > 0.0).collect();
    let s2: Vec<bool> = f2.iter().map(|&v| v > 0.0).collect();
    let mut found: Vec<[f64; 2]> = Vec::new();
    for i1 in 0..n1 {
        let j1 = (i1 + 1) % n1;
        for i2 in 0..n2 {
            let j2 = (i2 + 1) % n2;
            let idx = [i1 * n2 + i2, j1 * n2 + i2, j1 * n2 + j2, i1 * n2 + j2];
            let mixed = |s: &[bool]| {
                let a = s[idx[0]];
                s[idx[1]] != a || s[idx[2]] != a || s[idx[3]] != a
            };
            if !mixed(&s1) || !mixed(&s2) {
                continue;
            }
            let (a, na) = cell_segments(idx.map(|k| f1[k]));
            let (b, nb) = cell_segments(idx.map(|k| f2[k]));
            for p in &a[..na] {
                for q in &b[..nb] {
                    if let Some(u) = intersect(*p, *q) {
                        let x = [
                            (offset[0] + (i1 as f64 + u[0]) * h[0]).rem_euclid(PERIOD),
                            (offset[1] + (i2 as f64 + u[1]) * h[1]).rem_euclid(PERIOD),
                        ];
                        let dup = found.iter().any(|y| {
                            let g0 = periodic_gap(x[0], y[0]);
                            let g1 = periodic_gap(x[1], y[1]);
                            (g0 * g0 + g1 * g1).sqrt() < dedupe_radius
                        });
                        if !dup {
                            found.push(x);
                        }
                    }
                }
            }
        }
    }
    Some(found)
}

/// Common zeros of `(f₁, f₂)` on the torus using `cells[0] × cells[1]` cells.
pub fn count_zeros_2d(
    f1: impl Fn(&[f64]) -> f64,
    f2: impl Fn(&[f64]) -> f64,
    cells: [usize; 2],
    dedupe_radius: f64,
) -> Result<Vec<[f64; 2]>> {
    if cells.iter().any(|&c| c < 2) {
        return Err(Error::config("need at least 2 cells per coordinate"));
    }
    let h = [PERIOD / cells[0] as f64, PERIOD / cells[1] as f64];
    for s in SHIFTS_2D {
        let offset = [s[0] * h[0], s[1] * h[1]];
        let sample = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
            (0..cells[0] * cells[1])
                .map(|k| f(&[offset[0] + (k / cells[1]) as f64 * h[0], offset[1] + (k % cells[1]) as f64 * h[1]]))
                .collect()
        };
        let (v1, v2) = (sample(&f1), sample(&f2));
        if let Some(z) = zeros_from_grids(&v1, &v2, cells, offset, dedupe_radius) {
            return Ok(z);
        }
    }
    Err(Error::numeric("every shifted grid hit an exact zero"))
}

/// One Monte Carlo experiment: `n` independent Gaussian functions, one from
/// each space, on an `n`-dimensional manifold.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub spaces: Vec<FunctionSpace>,
    pub trials: usize,
    pub seed: u64,
    /// Scan points on the circle, or cells per coordinate on the torus.
    pub resolution: Vec<usize>,
    pub refine_tol: f64,
    pub domain: Option<SubdomainBox>,
}

impl TrialPlan {
    /// Defaults for everything except the spaces, trials and seed.
    pub fn new(spaces: Vec<FunctionSpace>, trials: usize, seed: u64) -> Result<Self> {
        let manifold = spaces.first().map(|s| s.manifold()).ok_or_else(|| Error::config("no spaces"))?;
        let resolution = match manifold {
            Manifold::Circle => vec![DEFAULT_SCAN_1D],
            Manifold::Torus2 => vec![DEFAULT_CELLS_2D; 2],
        };
        Ok(Self { spaces, trials, seed, resolution, refine_tol: DEFAULT_REFINE_TOL, domain: None })
    }

    pub fn manifold(&self) -> Manifold {
        self.spaces[0].manifold()
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.spaces.first() else {
            return Err(Error::config("a trial plan needs at least one space"));
        };
        let m = first.manifold();
        if self.spaces.iter().any(|s| s.manifold() != m) {
            return Err(Error::config("spaces live on different manifolds"));
        }
        if self.spaces.len() != m.dim() {
            return Err(Error::config(format!("{m:?} needs {} equations, got {}", m.dim(), self.spaces.len())));
        }
        if self.trials == 0 {
            return Err(Error::config("trial count must be at least 1"));
        }
        if self.resolution.len() != m.dim() {
            return Err(Error::config("resolution needs one entry per coordinate"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::config("refine tolerance must be positive"));
        }
        let factor = if m == Manifold::Circle { 4 } else { 8 };
        let degree = self.spaces.iter().filter_map(|s| s.max_degree()).max().unwrap_or(0) as usize;
        for &r in &self.resolution {
            if r < (factor * degree).max(4) {
                return Err(Error::config(format!("resolution {r} is below {factor}× the degree {degree}")));
            }
        }
        if let Some(d) = &self.domain {
            if d.intervals().len() != m.dim() {
                return Err(Error::config("subdomain dimension differs from manifold dimension"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCountEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
    pub counts: Vec<u32>,
}

impl ZeroCountEstimate {
    pub fn from_counts(counts: Vec<u32>, seed: u64) -> Self {
        let n = counts.len();
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error, trials: n, seed, counts }
    }
}

/// Precomputed scan tables for a validated plan.
pub struct ZeroSampler<'a> {
    plan: &'a TrialPlan,
    /// `evaluators[shift][space]`, one per entry of the shift table
    evaluators: Vec<Vec<GridEvaluator>>,
}

impl<'a> ZeroSampler<'a> {
    pub fn new(plan: &'a TrialPlan) -> Result<Self> {
        plan.validate()?;
        let steps: Vec<f64> = plan.resolution.iter().map(|&r| PERIOD / r as f64).collect();
        let evaluators = SHIFTS_2D
            .iter()
            .map(|s| {
                let offsets: Vec<f64> = steps.iter().zip(s).map(|(h, f)| f * h).collect();
                plan.spaces.iter().map(|sp| sp.grid_evaluator(&plan.resolution, &offsets)).collect()
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Self { plan, evaluators })
    }

    /// The functions drawn in trial `trial`.
    pub fn draw(&self, trial: usize) -> Vec<RandomFunction<'a>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.plan.seed);
        rng.set_stream(trial as u64);
        self.plan.spaces.iter().map(|s| s.gaussian_sample(&mut rng)).collect()
    }

    /// Locations of all zeros in trial `trial`, before any domain filter.
    pub fn zeros(&self, trial: usize) -> Result<Vec<Vec<f64>>> {
        let fs = self.draw(trial);
        let res = &self.plan.resolution;
        for (k, s) in SHIFTS_2D.iter().enumerate() {
            let ev = &self.evaluators[k];
            match self.plan.manifold() {
                Manifold::Circle => {
                    let values = ev[0].eval(fs[0].coefficients());
                    let offset = s[0] * PERIOD / res[0] as f64;
                    if let Some(r) = roots_from_scan(&values, offset, |t| fs[0].value(&[t]), self.plan.refine_tol) {
                        return Ok(r.into_iter().map(|t| vec![t]).collect());
                    }
                }
                Manifold::Torus2 => {
                    let v1 = ev[0].eval(fs[0].coefficients());
                    let v2 = ev[1].eval(fs[1].coefficients());
                    let h = [PERIOD / res[0] as f64, PERIOD / res[1] as f64];
                    let radius = DEFAULT_DEDUPE_FRACTION * h[0].min(h[1]);
                    if let Some(z) = zeros_from_grids(&v1, &v2, [res[0], res[1]], [s[0] * h[0], s[1] * h[1]], radius) {
                        return Ok(z.into_iter().map(|p| p.to_vec()).collect());
                    }
                }
            }
        }
        Err(Error::numeric(format!("trial {trial}: every shifted scan hit an exact zero")))
    }

    /// Zero count of trial `trial` inside the plan's domain.
    pub fn count(&self, trial: usize) -> Result<u32> {
        let z = self.zeros(trial)?;
        Ok(match &self.plan.domain {
            Some(d) => z.iter().filter(|p| d.contains(p)).count(),
            None => z.len(),
        } as u32)
    }
}

/// Runs all trials. The result depends only on the plan, never on `threads`.
pub fn estimate_expectation(plan: &TrialPlan, threads: Option<usize>) -> Result<ZeroCountEstimate> {
    let sampler = ZeroSampler::new(plan)?;
    let run = || (0..plan.trials).into_par_iter().map(|t| sampler.count(t)).collect::<Result<Vec<u32>>>();
    let counts = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(ZeroCountEstimate::from_counts(counts, plan.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::InnerProductRule;
    use rand::Rng;
    use std::f64::consts::PI;

    fn circle(m: u32, constant: bool) -> FunctionSpace {
        FunctionSpace::trig(Manifold::Circle, &[m], constant, InnerProductRule::NormalizedL2).unwrap()
    }

    #[test]
    fn simple_circle_counts() {
        assert_eq!(count_zeros_1d(|t| t.cos(), 64, 1e-12).unwrap().len(), 2);
        assert_eq!(count_zeros_1d(|_| 1.0, 64, 1e-12).unwrap().len(), 0);
        // sin hits zero exactly at θ = 0, forcing a shifted scan
        let r = count_zeros_1d(|t| t.sin(), 64, 1e-12).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().any(|&x| (x - PI).abs() < 1e-10));
    }

    #[test]
    fn roots_are_refined() {
        let r = count_zeros_1d(|t| (3.0 * t).cos(), 128, 1e-13).unwrap();
        assert_eq!(r.len(), 6);
        for x in r {
            assert!((3.0 * x).cos().abs() < 1e-11);
        }
    }

    #[test]
    fn fine_scan_oracle() {
        let brute = |f: &dyn Fn(f64) -> f64, n: usize| {
            let v: Vec<f64> = (0..n).map(|i| f(0.1234 + i as f64 * PERIOD / n as f64)).collect();
            (0..n).filter(|&i| (v[i] > 0.0) != (v[(i + 1) % n] > 0.0)).count()
        };
        let f = |t: f64| (3.0 * t).cos() + 0.1 * t.sin();
        assert_eq!(count_zeros_1d(f, 64, 1e-12).unwrap().len(), brute(&f, 640));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let c: Vec<f64> = (0..17).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = |t: f64| {
                f(t) + 0.3 * (1..=8).map(|k| c[k] * (k as f64 * t).cos() + c[8 + k] * (k as f64 * t).sin()).sum::<f64>()
            };
            assert_eq!(count_zeros_1d(g, 512, 1e-12).unwrap().len(), brute(&g, 5120));
        }
    }

    #[test]
    fn torus_examples() {
        let z = count_zeros_2d(|x| x[0].sin(), |x| x[1].sin(), [32, 32], 1e-9).unwrap();
        assert_eq!(z.len(), 4);
        // θ₁ ± θ₂ ∈ πℤ: θ₁ = (a + b)π/2, θ₂ = (a − b)π/2, eight classes mod 2π
        let mut oracle = Vec::new();
        for a in 0..4i32 {
            for b in 0..4i32 {
                let p =
                    [((a + b) as f64 * PI / 2.0).rem_euclid(PERIOD), ((a - b) as f64 * PI / 2.0).rem_euclid(PERIOD)];
                if !oracle.iter().any(|q: &[f64; 2]| periodic_gap(p[0], q[0]) + periodic_gap(p[1], q[1]) < 1e-9) {
                    oracle.push(p);
                }
            }
        }
        let z = count_zeros_2d(|x| (x[0] + x[1]).sin(), |x| (x[0] - x[1]).sin(), [40, 40], 1e-9).unwrap();
        assert_eq!(z.len(), oracle.len());
        assert_eq!(z.len(), 8);
        for p in z {
            assert!((p[0] + p[1]).sin().abs() < 1e-2 && (p[0] - p[1]).sin().abs() < 1e-2);
        }
        let z = count_zeros_2d(|x| (2.0 * x[0]).cos() + 0.3, |x| (3.0 * x[1]).sin() + 0.2, [48, 48], 1e-9).unwrap();
        assert_eq!(z.len(), 4 * 6);
    }

    #[test]
    fn saddle_cells() {
        // f = (u - ½)(v - ½) has a saddle in the cell centre
        let c = [0.25, -0.25, 0.25, -0.25];
        let (_, n) = cell_segments(c);
        assert_eq!(n, 2);
        let (_, n) = cell_segments([1.0, 1.0, -1.0, -1.0]);
        assert_eq!(n, 1);
        let (_, n) = cell_segments([1.0, 1.0, 1.0, 1.0]);
        assert_eq!(n, 0);
    }

    #[test]
    fn grid_doubling_is_stable() {
        let s = FunctionSpace::trig(Manifold::Torus2, &[2, 2], true, InnerProductRule::NormalizedL2).unwrap();
        let mut coarse = TrialPlan::new(vec![s.clone(), s], 1000, 5).unwrap();
        coarse.resolution = vec![128, 128];
        let mut fine = coarse.clone();
        fine.resolution = vec![256, 256];
        let a = estimate_expectation(&coarse, None).unwrap();
        let b = estimate_expectation(&fine, None).unwrap();
        let same = a.counts.iter().zip(&b.counts).filter(|(x, y)| x == y).count();
        assert!(same >= 990, "{same} of 1000 agree");
    }

    #[test]
    fn constants_have_no_zeros() {
        let s = circle(0, true);
        let mut plan = TrialPlan::new(vec![s], 50, 1).unwrap();
        plan.resolution = vec![16];
        let e = estimate_expectation(&plan, None).unwrap();
        assert_eq!((e.mean, e.std_error), (0.0, 0.0));
    }

    #[test]
    fn first_harmonic_has_two_zeros() {
        let plan = TrialPlan::new(vec![circle(1, false)], 500, 3).unwrap();
        let e = estimate_expectation(&plan, None).unwrap();
        assert_eq!((e.mean, e.std_error), (2.0, 0.0));
    }

    #[test]
    fn determinism_across_threads() {
        let mut plan = TrialPlan::new(vec![circle(3, true)], 300, 42).unwrap();
        plan.resolution = vec![256];
        let a = estimate_expectation(&plan, Some(1)).unwrap();
        let b = estimate_expectation(&plan, Some(4)).unwrap();
        assert_eq!(a, b);
        plan.seed = 43;
        assert_ne!(estimate_expectation(&plan, Some(2)).unwrap().counts, a.counts);
    }

    #[test]
    fn subdomain_counts_add_up() {
        let s = FunctionSpace::trig(Manifold::Torus2, &[2, 1], true, InnerProductRule::NormalizedL2).unwrap();
        let mut plan = TrialPlan::new(vec![s.clone(), s], 40, 9).unwrap();
        plan.resolution = vec![64, 64];
        let cuts = [0.0, 2.0, 4.5, PERIOD];
        let total = estimate_expectation(&plan, None).unwrap();
        let mut sum = vec![0u32; 40];
        for i in 0..3 {
            for j in 0..3 {
                let mut p = plan.clone();
                p.domain = Some(SubdomainBox::new(vec![(cuts[i], cuts[i + 1]), (cuts[j], cuts[j + 1])]).unwrap());
                for (s, c) in sum.iter_mut().zip(estimate_expectation(&p, None).unwrap().counts) {
                    *s += c;
                }
            }
        }
        assert_eq!(sum, total.counts);
    }

    #[test]
    fn plan_validation() {
        let s = circle(3, true);
        let mut plan = TrialPlan::new(vec![s.clone()], 10, 0).unwrap();
        plan.resolution = vec![8];
        assert!(plan.validate().is_err());
        plan.resolution = vec![12];
        assert!(plan.validate().is_ok());
        plan.trials = 0;
        assert!(plan.validate().is_err());
        assert!(TrialPlan::new(vec![s.clone(), s], 10, 0).unwrap().validate().is_err());
    }
}
