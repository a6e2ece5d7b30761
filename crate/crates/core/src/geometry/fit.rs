//! Direct least-squares ellipse fitting.
//!
//! Minimizes the algebraic distance of a conic to the sample points under
//! the constraint `4AC - B^2 = 1`, which forces an elliptical solution. The
//! quadratic and linear halves of the scatter matrix are separated so the
//! problem reduces to a 3x3 eigenproblem, solved here with a closed-form
//! characteristic cubic. Input points are shifted to their centroid and
//! scaled before fitting, and the conic is mapped back afterwards.

use super::{Ellipse, GeometryError, Point2};
use crate::scalar::Real;

type Vec3<R> = [R; 3];
type Mat3<R> = [[R; 3]; 3];

/// General conic `Ax^2 + Bxy + Cy^2 + Dx + Ey + F = 0`.
#[derive(Clone, Copy, Debug)]
pub struct Conic<R> {
    pub coeffs: [R; 6],
}

impl<R: Real> Conic<R> {
    /// Value of the conic polynomial at a point.
    pub fn eval(&self, p: Point2<R>) -> R {
        let [a, b, c, d, e, f] = self.coeffs;
        a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y + f
    }

    /// Converts to an ellipse. Fails when the conic is a parabola, a
    /// hyperbola, or has no real boundary.
    pub fn to_ellipse(&self) -> Result<Ellipse<R>, GeometryError> {
        let [a, b, c, d, e, f] = self.coeffs;
        let four = R::from_f64_lossy(4.0);
        let two = R::from_f64_lossy(2.0);
        let half = R::from_f64_lossy(0.5);

        let disc = four * a * c - b * b;
        if disc <= R::zero() {
            return Err(GeometryError::DegenerateConfiguration("conic is not an ellipse"));
        }

        let cx = (b * e - two * c * d) / disc;
        let cy = (b * d - two * a * e) / disc;
        // Constant term after translating the conic to its center.
        let fc = a * cx * cx + b * cx * cy + c * cy * cy + d * cx + e * cy + f;

        // Eigenvalues of the quadratic part [[A, B/2], [B/2, C]].
        let tr = a + c;
        let gap = ((a - c) * (a - c) + b * b).sqrt();
        let (l1, l2) = ((tr + gap) * half, (tr - gap) * half);
        // disc > 0 makes both eigenvalues share the sign of the trace; flip
        // so they are positive and -fc must be too.
        let (l1, l2, fc) = if tr < R::zero() { (-l2, -l1, -fc) } else { (l1, l2, fc) };
        if l2 <= R::zero() || -fc <= R::zero() {
            return Err(GeometryError::DegenerateConfiguration("conic has no real boundary"));
        }

        let major = (-fc / l2).sqrt();
        let minor = (-fc / l1).sqrt();

        // Major axis points along the eigenvector of the smaller eigenvalue.
        // Two candidate expressions exist; take the better-conditioned one.
        let sign = if tr < R::zero() { -R::one() } else { R::one() };
        let v1 = Point2::new(b * half * sign, l2 - a * sign);
        let v2 = Point2::new(l2 - c * sign, b * half * sign);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        let scale = a.abs() + b.abs() + c.abs();
        let theta = if v.norm() <= R::epsilon() * scale { R::zero() } else { v.y.atan2(v.x) };

        Ellipse::new(cx, cy, major, minor, theta)
    }
}

/// Fits an ellipse to `points` by direct least squares.
///
/// Needs at least 5 points. Returns [`GeometryError::DegenerateConfiguration`]
/// when the points are coincident or collinear, or when no elliptical
/// solution exists.
pub fn fit_ellipse_dls<R: Real>(points: &[Point2<R>]) -> Result<Ellipse<R>, GeometryError> {
    if points.len() < 5 {
        return Err(GeometryError::TooFewPoints { needed: 5, got: points.len() });
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(GeometryError::DegenerateConfiguration("non-finite input point"));
    }

    let norm = Normalization::of(points)?;
    let normalized: Vec<Point2<R>> = points.iter().map(|&p| norm.apply(p)).collect();

    // Scatter blocks over the quadratic basis [x^2, xy, y^2] and the linear
    // basis [x, y, 1].
    let mut s11 = [[R::zero(); 3]; 3];
    let mut s12 = [[R::zero(); 3]; 3];
    let mut s22 = [[R::zero(); 3]; 3];
    for p in &normalized {
        let q = [p.x * p.x, p.x * p.y, p.y * p.y];
        let l = [p.x, p.y, R::one()];
        for i in 0..3 {
            for j in 0..3 {
                s11[i][j] += q[i] * q[j];
                s12[i][j] += q[i] * l[j];
                s22[i][j] += l[i] * l[j];
            }
        }
    }

    let s22_inv = invert3(&s22)
        .ok_or(GeometryError::DegenerateConfiguration("collinear or coincident points"))?;
    // a2 = T a1 recovers the linear coefficients from the quadratic ones.
    let t = mat_scale(&mat_mul(&s22_inv, &transpose3(&s12)), -R::one());
    let reduced = mat_add(&s11, &mat_mul(&s12, &t));
    // Left-multiply by the inverse of the constraint matrix
    // [[0, 0, 2], [0, -1, 0], [2, 0, 0]].
    let half = R::from_f64_lossy(0.5);
    let m = [
        [reduced[2][0] * half, reduced[2][1] * half, reduced[2][2] * half],
        [-reduced[1][0], -reduced[1][1], -reduced[1][2]],
        [reduced[0][0] * half, reduced[0][1] * half, reduced[0][2] * half],
    ];

    // Among the real eigenvectors, keep those satisfying the ellipse
    // constraint and take the one with the smallest algebraic residual.
    let mut best: Option<(R, Conic<R>)> = None;
    for lambda in eigenvalues3(&m) {
        let Some(a1) = null_vector(&mat_sub_diag(&m, lambda)) else {
            continue;
        };
        let four = R::from_f64_lossy(4.0);
        if four * a1[0] * a1[2] - a1[1] * a1[1] <= R::zero() {
            continue;
        }
        let a2 = mat_vec(&t, &a1);
        let conic = Conic { coeffs: [a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]] };
        let scale = conic.coeffs.iter().fold(R::zero(), |s, &c| s + c * c);
        let mut residual = R::zero();
        for &p in &normalized {
            let v = conic.eval(p);
            residual += v * v;
        }
        residual /= scale;
        if best.map_or(true, |(r, _)| residual < r) {
            best = Some((residual, conic));
        }
    }

    let (_, conic) = best
        .ok_or(GeometryError::DegenerateConfiguration("no elliptical solution"))?;
    norm.undo(&conic).to_ellipse()
}

/// Centroid shift and isotropic scale taking the points to mean distance
/// sqrt(2) from the origin.
struct Normalization<R> {
    mx: R,
    my: R,
    s: R,
}

impl<R: Real> Normalization<R> {
    fn of(points: &[Point2<R>]) -> Result<Self, GeometryError> {
        let n = R::from_usize_lossy(points.len());
        let mut mx = R::zero();
        let mut my = R::zero();
        for p in points {
            mx += p.x;
            my += p.y;
        }
        mx /= n;
        my /= n;
        let mut mean_dist = R::zero();
        for p in points {
            let dx = p.x - mx;
            let dy = p.y - my;
            mean_dist += (dx * dx + dy * dy).sqrt();
        }
        mean_dist /= n;
        if mean_dist <= R::epsilon() {
            return Err(GeometryError::DegenerateConfiguration("coincident points"));
        }
        let s = R::from_f64_lossy(std::f64::consts::SQRT_2) / mean_dist;
        Ok(Normalization { mx, my, s })
    }

    fn apply(&self, p: Point2<R>) -> Point2<R> {
        Point2::new((p.x - self.mx) * self.s, (p.y - self.my) * self.s)
    }

    /// Rewrites a conic on normalized coordinates as one on the originals.
    fn undo(&self, conic: &Conic<R>) -> Conic<R> {
        let [a, b, c, d, e, f] = conic.coeffs;
        let s = self.s;
        let (mx, my) = (self.mx, self.my);
        let two = R::from_f64_lossy(2.0);
        // First absorb the scale, then the centroid shift.
        let (a, b, c, d, e, f) = (a * s * s, b * s * s, c * s * s, d * s, e * s, f);
        Conic {
            coeffs: [
                a,
                b,
                c,
                d - two * a * mx - b * my,
                e - b * mx - two * c * my,
                f + a * mx * mx + b * mx * my + c * my * my - d * mx - e * my,
            ],
        }
    }
}

fn transpose3<R: Real>(m: &Mat3<R>) -> Mat3<R> {
    let mut t = [[R::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn mat_mul<R: Real>(a: &Mat3<R>, b: &Mat3<R>) -> Mat3<R> {
    let mut out = [[R::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn mat_add<R: Real>(a: &Mat3<R>, b: &Mat3<R>) -> Mat3<R> {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

fn mat_scale<R: Real>(a: &Mat3<R>, k: R) -> Mat3<R> {
    let mut out = *a;
    for row in &mut out {
        for v in row {
            *v *= k;
        }
    }
    out
}

fn mat_vec<R: Real>(m: &Mat3<R>, v: &Vec3<R>) -> Vec3<R> {
    let mut out = [R::zero(); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

fn mat_sub_diag<R: Real>(m: &Mat3<R>, lambda: R) -> Mat3<R> {
    let mut out = *m;
    for i in 0..3 {
        out[i][i] -= lambda;
    }
    out
}

fn det3<R: Real>(m: &Mat3<R>) -> R {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by adjugate, `None` when the determinant is negligible against
/// the Hadamard bound of the rows.
fn invert3<R: Real>(m: &Mat3<R>) -> Option<Mat3<R>> {
    let det = det3(m);
    let bound = m
        .iter()
        .map(|r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt())
        .fold(R::one(), |acc, n| acc * n);
    if det.abs() <= R::epsilon().sqrt() * bound {
        return None;
    }
    let inv_det = R::one() / det;
    let mut adj = [[R::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let r0 = (i + 1) % 3;
            let r1 = (i + 2) % 3;
            let c0 = (j + 1) % 3;
            let c1 = (j + 2) % 3;
            // Cofactor transposed: note the swapped indices.
            adj[j][i] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) * inv_det;
        }
    }
    Some(adj)
}

/// Real eigenvalues of a (not necessarily symmetric) 3x3 matrix via the
/// characteristic cubic.
fn eigenvalues3<R: Real>(m: &Mat3<R>) -> Vec<R> {
    let c2 = m[0][0] + m[1][1] + m[2][2];
    let c1 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        + m[0][0] * m[2][2]
        - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let c0 = det3(m);
    // det(M - lambda I) = -(lambda^3 - c2 lambda^2 + c1 lambda - c0)
    solve_cubic(-c2, c1, -c0)
}

/// Real roots of `x^3 + p2 x^2 + p1 x + p0`.
fn solve_cubic<R: Real>(p2: R, p1: R, p0: R) -> Vec<R> {
    let third = R::from_f64_lossy(1.0 / 3.0);
    let two = R::from_f64_lossy(2.0);
    let twenty_seven = R::from_f64_lossy(27.0);

    // Depress with x = t - p2/3.
    let shift = p2 * third;
    let p = p1 - p2 * p2 * third;
    let q = p2 * p2 * p2 * two / twenty_seven - p2 * p1 * third + p0;

    let half_q = q * R::from_f64_lossy(0.5);
    let disc = half_q * half_q + p * p * p / twenty_seven;

    if disc > R::zero() {
        // One real root, by Cardano.
        let sq = disc.sqrt();
        let u = cbrt(-half_q + sq);
        let v = cbrt(-half_q - sq);
        vec![u + v - shift]
    } else if p.abs() <= R::epsilon() {
        // Triple root.
        vec![cbrt(-q) - shift]
    } else {
        // Three real roots, by the trigonometric method.
        let r = (-p * p * p / twenty_seven).sqrt();
        let cos_phi = (-half_q / r).max(-R::one()).min(R::one());
        let phi = cos_phi.acos();
        let mag = two * (-p * third).sqrt();
        let tau = R::from_f64_lossy(std::f64::consts::TAU);
        (0..3)
            .map(|k| mag * ((phi + tau * R::from_usize_lossy(k)) * third).cos() - shift)
            .collect()
    }
}

fn cbrt<R: Real>(v: R) -> R {
    let third = R::from_f64_lossy(1.0 / 3.0);
    if v < R::zero() {
        -(-v).powf(third)
    } else {
        v.powf(third)
    }
}

/// Null vector of a (near-)singular matrix: the largest pairwise cross
/// product of its rows, normalized. `None` when every cross product is
/// negligible.
fn null_vector<R: Real>(m: &Mat3<R>) -> Option<Vec3<R>> {
    let rows: Vec<Point3<R>> = m.iter().map(|r| Point3(r[0], r[1], r[2])).collect();
    let candidates = [
        rows[0].cross(rows[1]),
        rows[1].cross(rows[2]),
        rows[2].cross(rows[0]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("norms are not NaN"))?;
    let n = best.norm();
    let scale = rows.iter().fold(R::zero(), |acc, r| acc.max(r.norm()));
    if n <= R::epsilon() * scale * scale {
        return None;
    }
    Some([best.0 / n, best.1 / n, best.2 / n])
}

#[derive(Clone, Copy)]
struct Point3<R>(R, R, R);

impl<R: Real> Point3<R> {
    fn cross(self, o: Self) -> Self {
        Point3(
            self.1 * o.2 - self.2 * o.1,
            self.2 * o.0 - self.0 * o.2,
            self.0 * o.1 - self.1 * o.0,
        )
    }

    fn norm(self) -> R {
        (self.0 * self.0 + self.1 * self.1 + self.2 * self.2).sqrt()
    }
}
