//! Exact planar mixed areas between the atoms a 2-D fiber body decomposes
//! into: full-rank ellipses, segments, and convex polygons.
//!
//! The area of a Minkowski combination `Σ cᵢ Kᵢ` is the quadratic form
//! `Σᵢⱼ cᵢ cⱼ V(Kᵢ, Kⱼ)`, so pairwise mixed areas are all that is needed.

use std::f64::consts::PI;

/// Squared singular-value ratios below this are treated as rank loss.
pub(crate) const RANK_TOL: f64 = 1e-12;

/// A 2x2 matrix in row-major order.
pub(crate) type Mat2 = [[f64; 2]; 2];

/// A symmetric 2x2 matrix stored as `[m11, m12, m22]`.
pub(crate) type Sym2 = [f64; 3];

#[derive(Debug, Clone)]
pub(crate) enum Atom {
    Point,
    Segment([f64; 2]),
    /// The ellipse `F·B`, with support matrix `F Fᵀ`. Working with the factor
    /// keeps projected areas accurate to the conditioning of `F` itself.
    Ellipse(Mat2),
    /// Counter-clockwise vertices of a centrally symmetric polygon.
    Polygon(Vec<[f64; 2]>),
}

/// Eigen-decomposition of a symmetric 2x2 matrix: `(λ_max, λ_min, unit eigenvector of λ_max)`.
pub(crate) fn sym2_eigen(m: &Sym2) -> (f64, f64, [f64; 2]) {
    let [a, b, c] = *m;
    let half_tr = 0.5 * (a + c);
    let diff = 0.5 * (a - c);
    let r = diff.hypot(b);
    let l1 = half_tr + r;
    let l2 = half_tr - r;
    // eigenvector of l1: angle phi with tan(2 phi) = 2b / (a - c)
    let phi = 0.5 * b.atan2(diff);
    (l1, l2, [phi.cos(), phi.sin()])
}

pub(crate) fn det2(f: &Mat2) -> f64 {
    f[0][0] * f[1][1] - f[0][1] * f[1][0]
}

/// Singular values `(σ₁, σ₂)` of a 2x2 matrix from its Frobenius norm and
/// determinant; `σ₂ = |det|/σ₁` avoids cancellation.
fn singular_values2(f: &Mat2) -> (f64, f64) {
    let fro = f[0][0] * f[0][0] + f[0][1] * f[0][1] + f[1][0] * f[1][0] + f[1][1] * f[1][1];
    let d = det2(f).abs();
    let s1 = 0.5 * ((fro + 2.0 * d).sqrt() + (fro - 2.0 * d).max(0.0).sqrt());
    if s1 == 0.0 {
        (0.0, 0.0)
    } else {
        (s1, d / s1)
    }
}

/// Classify the image of the unit disk under `f` as a point, a segment or a
/// genuine ellipse.
pub(crate) fn classify_factor(f: &Mat2) -> Atom {
    let (s1, s2) = singular_values2(f);
    if !(s1 > 0.0) {
        Atom::Point
    } else if s2 * s2 <= RANK_TOL * s1 * s1 {
        let m = [
            f[0][0] * f[0][0] + f[0][1] * f[0][1],
            f[0][0] * f[1][0] + f[0][1] * f[1][1],
            f[1][0] * f[1][0] + f[1][1] * f[1][1],
        ];
        let (l1, _, v) = sym2_eigen(&m);
        let s = l1.max(0.0).sqrt();
        Atom::Segment([s * v[0], s * v[1]])
    } else {
        Atom::Ellipse(*f)
    }
}

pub(crate) fn support(atom: &Atom, u: [f64; 2]) -> f64 {
    match atom {
        Atom::Point => 0.0,
        Atom::Segment(a) => (a[0] * u[0] + a[1] * u[1]).abs(),
        Atom::Ellipse(f) => (f[0][0] * u[0] + f[1][0] * u[1]).hypot(f[0][1] * u[0] + f[1][1] * u[1]),
        Atom::Polygon(vs) => polygon_support(vs, u),
    }
}

pub(crate) fn polygon_support(vs: &[[f64; 2]], u: [f64; 2]) -> f64 {
    vs.iter().map(|v| v[0] * u[0] + v[1] * u[1]).fold(0.0, f64::max)
}

pub(crate) fn polygon_area(vs: &[[f64; 2]]) -> f64 {
    let n = vs.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let p = vs[i];
            let q = vs[(i + 1) % n];
            p[0] * q[1] - p[1] * q[0]
        })
        .sum();
    0.5 * twice.abs()
}

/// Perimeter of an ellipse with semi-axes `a`, `b` via the arithmetic-geometric
/// mean (Gauss-Kummer form), accurate to rounding for all eccentricities.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let (mut a, mut g) = if a >= b { (a, b) } else { (b, a) };
    if a == 0.0 {
        return 0.0;
    }
    if g == 0.0 {
        return 4.0 * a;
    }
    let a0 = a;
    let mut weight = 0.5;
    let mut sum = weight * (a * a - g * g);
    for _ in 0..64 {
        let c = 0.5 * (a - g);
        let next_a = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = next_a;
        weight *= 2.0;
        sum += weight * c * c;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    2.0 * PI * (a0 * a0 - sum) / a
}

/// Mixed area of the ellipses `F₁B` and `F₂B`.
///
/// With `C = adj(F₁) F₂ = det(F₁) F₁⁻¹F₂`, mapping `E₁` to the unit disk gives
/// `V(E₁, E₂) = |det F₁| · perimeter(F₁⁻¹E₂) / 2 = perimeter(σ(C)) / 2`.
fn ellipse_ellipse(f1: &Mat2, f2: &Mat2) -> f64 {
    let adj = [[f1[1][1], -f1[0][1]], [-f1[1][0], f1[0][0]]];
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = adj[i][0] * f2[0][j] + adj[i][1] * f2[1][j];
        }
    }
    let fro = c.iter().flatten().map(|v| v * v).sum::<f64>();
    let d = (det2(f1) * det2(f2)).abs();
    let s1 = 0.5 * ((fro + 2.0 * d).sqrt() + (fro - 2.0 * d).max(0.0).sqrt());
    if s1 == 0.0 {
        return 0.0;
    }
    0.5 * ellipse_perimeter(s1, d / s1)
}

/// `V(P, L) = ½ Σ_edges |e| h_L(n_e)` for a counter-clockwise polygon `P`.
fn polygon_mixed(vs: &[[f64; 2]], other: &Atom) -> f64 {
    let n = vs.len();
    if n < 2 {
        return 0.0;
    }
    0.5 * (0..n)
        .map(|i| {
            let p = vs[i];
            let q = vs[(i + 1) % n];
            // outward normal scaled by edge length for ccw orientation
            support(other, [q[1] - p[1], p[0] - q[0]])
        })
        .sum::<f64>()
}

/// Mixed area `V(K, L)`, normalized so that `V(K, K)` is the area of `K`.
pub(crate) fn mixed_area(k: &Atom, l: &Atom) -> f64 {
    use Atom::*;
    match (k, l) {
        (Point, _) | (_, Point) => 0.0,
        (Segment(a), Segment(b)) => 2.0 * (a[0] * b[1] - a[1] * b[0]).abs(),
        (Segment(a), other) | (other, Segment(a)) => 2.0 * support(other, [-a[1], a[0]]),
        (Ellipse(f1), Ellipse(f2)) => {
            if std::ptr::eq(f1, f2) || f1 == f2 {
                PI * det2(f1).abs()
            } else {
                ellipse_ellipse(f1, f2)
            }
        }
        (Polygon(p), Polygon(q)) if std::ptr::eq(p, q) || p == q => polygon_area(p),
        (Polygon(p), other) => polygon_mixed(p, other),
        (other, Polygon(p)) => polygon_mixed(p, other),
    }
}

/// Area of `Σ cᵢ Kᵢ` from pairwise mixed areas.
pub(crate) fn combination_area(atoms: &[(f64, Atom)]) -> f64 {
    let mut total = 0.0;
    for (i, (ci, ki)) in atoms.iter().enumerate() {
        total += ci * ci * mixed_area(ki, ki);
        for (cj, kj) in &atoms[i + 1..] {
            total += 2.0 * ci * cj * mixed_area(ki, kj);
        }
    }
    total.max(0.0)
}

/// Circumscribed polygon of a centrally symmetric body from support values at
/// `n` equiangular directions `φⱼ = 2πj/n`: the intersection of the half-planes
/// `⟨x, uⱼ⟩ ≤ hⱼ`, computed by successive clipping.
pub fn polygon_from_support(values: &[f64]) -> Vec<[f64; 2]> {
    let n = values.len();
    let r = 2.0 * values.iter().cloned().fold(0.0, f64::max) + 1.0;
    let mut poly: Vec<[f64; 2]> = vec![[-r, -r], [r, -r], [r, r], [-r, r]];
    for (j, &h) in values.iter().enumerate() {
        let phi = 2.0 * PI * j as f64 / n as f64;
        let u = [phi.cos(), phi.sin()];
        poly = clip(&poly, u, h);
        if poly.is_empty() {
            break;
        }
    }
    dedupe_vertices(poly, 1e-13 * r)
}

fn clip(poly: &[[f64; 2]], u: [f64; 2], h: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    let side = |p: [f64; 2]| p[0] * u[0] + p[1] * u[1] - h;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = side(p);
        let sq = side(q);
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn dedupe_vertices(poly: Vec<[f64; 2]>, eps: f64) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for p in poly {
        if let Some(last) = out.last() {
            if (p[0] - last[0]).hypot(p[1] - last[1]) <= eps {
                continue;
            }
        }
        out.push(p);
    }
    while out.len() > 1 {
        let (f, l) = (out[0], out[out.len() - 1]);
        if (f[0] - l[0]).hypot(f[1] - l[1]) <= eps {
            out.pop();
        } else {
            break;
        }
    }
    out
}

/// Apply a 2x2 linear map (rows `r0`, `r1`) to a polygon, keeping ccw order.
pub(crate) fn map_polygon(vs: &[[f64; 2]], r0: [f64; 2], r1: [f64; 2]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> =
        vs.iter().map(|v| [r0[0] * v[0] + r0[1] * v[1], r1[0] * v[0] + r1[1] * v[1]]).collect();
    if r0[0] * r1[1] - r0[1] * r1[0] < 0.0 {
        out.reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force perimeter by arc-length quadrature.
    fn perimeter_quadrature(a: f64, b: f64) -> f64 {
        let n = 200_000;
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                (a * t.sin()).hypot(b * t.cos()) * 2.0 * PI / n as f64
            })
            .sum()
    }

    #[test]
    fn perimeter_matches_quadrature() {
        for &(a, b) in &[(1.0, 1.0), (2.0, 1.0), (1.0, 0.1), (3.0, 0.001), (0.5, 4.0)] {
            let p = ellipse_perimeter(a, b);
            let q = perimeter_quadrature(a, b);
            assert!((p - q).abs() <= 1e-9 * q, "a={a} b={b}: {p} vs {q}");
        }
        assert_eq!(ellipse_perimeter(2.0, 0.0), 8.0);
        assert!((ellipse_perimeter(1.0, 1.0) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn ellipse_pair_against_polygon_route() {
        // polygonal circumscription of both bodies at many directions
        let f1 = [[1.4, 0.2], [-0.3, 0.8]];
        let f2 = [[0.5, -0.4], [0.1, 1.2]];
        let n = 20_000;
        // support from the matrix F Fᵀ, independently of the factor route
        let sample = |f: &Mat2| -> Vec<f64> {
            let m = [
                f[0][0] * f[0][0] + f[0][1] * f[0][1],
                f[0][0] * f[1][0] + f[0][1] * f[1][1],
                f[1][0] * f[1][0] + f[1][1] * f[1][1],
            ];
            (0..n)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / n as f64;
                    let (c, s) = (phi.cos(), phi.sin());
                    (m[0] * c * c + 2.0 * m[1] * c * s + m[2] * s * s).sqrt()
                })
                .collect()
        };
        let h1 = sample(&f1);
        let h2 = sample(&f2);
        let hs: Vec<f64> = h1.iter().zip(&h2).map(|(a, b)| a + b).collect();
        let a1 = polygon_area(&polygon_from_support(&h1));
        let a2 = polygon_area(&polygon_from_support(&h2));
        let a12 = polygon_area(&polygon_from_support(&hs));
        let oracle = 0.5 * (a12 - a1 - a2);
        let exact = ellipse_ellipse(&f1, &f2);
        assert!((exact - oracle).abs() < 1e-6 * exact, "{exact} vs {oracle}");
        assert!((ellipse_ellipse(&f2, &f1) - exact).abs() < 1e-14 * exact);
        // rotating a factor on the right leaves the ellipse unchanged
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = [
            [f2[0][0] * c - f2[0][1] * s, f2[0][0] * s + f2[0][1] * c],
            [f2[1][0] * c - f2[1][1] * s, f2[1][0] * s + f2[1][1] * c],
        ];
        assert!((ellipse_ellipse(&f1, &r) - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn disk_segment_and_square() {
        let disk = Atom::Ellipse([[1.0, 0.0], [0.0, 1.0]]);
        let s1 = Atom::Segment([1.0, 0.0]);
        let s2 = Atom::Segment([0.0, 1.0]);
        assert!((mixed_area(&disk, &s1) - 2.0).abs() < 1e-15);
        assert!((mixed_area(&s1, &s2) - 2.0).abs() < 1e-15);
        let area = combination_area(&[(1.0, disk), (1.0, s1), (1.0, s2)]);
        assert!((area - (4.0 + 8.0 + PI)).abs() < 1e-13);
    }

    #[test]
    fn polygon_reconstruction_of_square_is_exact() {
        let n = 3600;
        let values: Vec<f64> = (0..n)
            .map(|j| {
                let phi = 2.0 * PI * j as f64 / n as f64;
                phi.cos().abs() + phi.sin().abs()
            })
            .collect();
        let poly = polygon_from_support(&values);
        assert!((polygon_area(&poly) - 4.0).abs() < 1e-10);
        let disk = Atom::Ellipse([[1.0, 0.0], [0.0, 1.0]]);
        assert!((mixed_area(&Atom::Polygon(poly), &disk) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn classify_rank_one() {
        match classify_factor(&[[0.0, 2.0], [0.0, 0.0]]) {
            Atom::Segment(a) => assert!((a[0].abs() - 2.0).abs() < 1e-15 && a[1].abs() < 1e-15),
            other => panic!("expected segment, got {other:?}"),
        }
        assert!(matches!(classify_factor(&[[0.0; 2]; 2]), Atom::Point));
        assert!(matches!(classify_factor(&[[1.0, 0.0], [0.0, 1e-3]]), Atom::Ellipse(_)));
    }
}
