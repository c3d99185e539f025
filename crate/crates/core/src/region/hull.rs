use super::constraints::{RatePoint, RegionConstraints};

const FEAS_TOL: f64 = 1e-9;

/// The facet planes `a . r <= b` of one region polytope in
/// `(r_e, r_s, r_t)`.
fn planes(c: &RegionConstraints) -> Vec<([f64; 3], f64)> {
    let ell = c.ell();
    vec![
        ([-1.0, 0.0, 0.0], 0.0),          // r_e >= 0
        ([1.0, -1.0, 0.0], 0.0),          // r_e <= r_s
        ([1.0, 0.0, 0.0], c.i_diff),      // equivocation bound
        ([0.0, -1.0, 0.0], 0.0),          // r_s >= 0
        ([0.0, 0.0, -1.0], 0.0),          // r_t >= 0
        ([0.0, 0.0, 1.0], ell),           // tapped bound
        ([0.0, 1.0, 1.0], c.i_v + ell),   // sum bound
    ]
}

fn solve3(rows: [[f64; 3]; 3], rhs: [f64; 3]) -> Option<[f64; 3]> {
    let m = nalgebra::Matrix3::from_rows(&[
        nalgebra::RowVector3::from_row_slice(&rows[0]),
        nalgebra::RowVector3::from_row_slice(&rows[1]),
        nalgebra::RowVector3::from_row_slice(&rows[2]),
    ]);
    let b = nalgebra::Vector3::from_column_slice(&rhs);
    m.lu().solve(&b).map(|v| [v[0], v[1], v[2]])
}

/// Vertices of one region polytope: all feasible intersections of three
/// facet planes. Empty when `i_diff < 0` (no admissible equivocation).
pub fn polytope_vertices(c: &RegionConstraints) -> Vec<RatePoint> {
    let planes = planes(c);
    let mut out: Vec<[f64; 3]> = Vec::new();
    let k = planes.len();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let Some(p) = solve3(
                    [planes[i].0, planes[j].0, planes[l].0],
                    [planes[i].1, planes[j].1, planes[l].1],
                ) else {
                    continue;
                };
                if planes
                    .iter()
                    .all(|(a, b)| a[0] * p[0] + a[1] * p[1] + a[2] * p[2] <= b + FEAS_TOL)
                    && !out.iter().any(|q| dist2(q, &p) < FEAS_TOL * FEAS_TOL)
                {
                    out.push(p);
                }
            }
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2])));
    out.into_iter()
        .map(|p| RatePoint {
            r_e: p[0].max(0.0),
            r_s: p[1].max(0.0),
            r_t: p[2].max(0.0),
        })
        .collect()
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Squared distance from `p` to the convex hull of `pts`, by the
/// Wolfe/GJK minimum-norm-point iteration with exact projections onto
/// simplices of at most four active points.
fn hull_distance2(p: &[f64; 3], pts: &[[f64; 3]]) -> f64 {
    if pts.is_empty() {
        return f64::INFINITY;
    }
    // Start from the nearest single point.
    let mut active: Vec<[f64; 3]> = vec![*pts
        .iter()
        .min_by(|a, b| dist2(a, p).total_cmp(&dist2(b, p)))
        .unwrap()];
    let mut x = active[0];
    for _ in 0..200 {
        let d = sub(p, &x);
        let norm2 = dot(&d, &d);
        if norm2 < 1e-24 {
            return 0.0;
        }
        // Support point of the hull in direction d.
        let s = *pts
            .iter()
            .max_by(|a, b| dot(&d, a).total_cmp(&dot(&d, b)))
            .unwrap();
        if dot(&d, &s) <= dot(&d, &x) + 1e-14 {
            return norm2; // no point improves: x is the projection
        }
        if !active.iter().any(|q| dist2(q, &s) < 1e-28) {
            active.push(s);
        }
        let (nx, support) = project_onto_simplex(p, &active);
        x = nx;
        active = support;
        if active.len() > 4 {
            active.truncate(4);
        }
    }
    dist2(p, &x)
}

/// Exact projection of `p` onto the convex hull of up to four points:
/// tries every nonempty subset, keeps the best feasible affine solve.
fn project_onto_simplex(p: &[f64; 3], pts: &[[f64; 3]]) -> ([f64; 3], Vec<[f64; 3]>) {
    let n = pts.len().min(4);
    let mut best: Option<(f64, [f64; 3], Vec<[f64; 3]>)> = None;
    for mask in 1u32..(1 << n) {
        let subset: Vec<[f64; 3]> =
            (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pts[i]).collect();
        if let Some((proj, lambdas)) = affine_projection(p, &subset) {
            if lambdas.iter().all(|&l| l >= -1e-12) {
                let d = dist2(&proj, p);
                if best.as_ref().map_or(true, |(bd, _, _)| d < *bd - 1e-18) {
                    best = Some((d, proj, subset));
                }
            }
        }
    }
    let (_, proj, subset) = best.expect("singleton subsets always feasible");
    (proj, subset)
}

/// Least-squares affine combination of `pts` closest to `p`, with its
/// barycentric coordinates. `None` for degenerate (rank-deficient)
/// subsets — a smaller subset covers that case.
fn affine_projection(p: &[f64; 3], pts: &[[f64; 3]]) -> Option<([f64; 3], Vec<f64>)> {
    let k = pts.len();
    if k == 1 {
        return Some((pts[0], vec![1.0]));
    }
    // Solve min |p - q0 - D mu| with D = [q_i - q0], then lambda_0 = 1 - sum mu.
    let q0 = pts[0];
    let cols = k - 1;
    let mut gram = vec![vec![0.0; cols]; cols];
    let mut rhs = vec![0.0; cols];
    let rel = sub(p, &q0);
    let dirs: Vec<[f64; 3]> = pts[1..].iter().map(|q| sub(q, &q0)).collect();
    for i in 0..cols {
        rhs[i] = dot(&dirs[i], &rel);
        for j in 0..cols {
            gram[i][j] = dot(&dirs[i], &dirs[j]);
        }
    }
    let mu = solve_small(&mut gram, &mut rhs)?;
    let mut lambdas = Vec::with_capacity(k);
    lambdas.push(1.0 - mu.iter().sum::<f64>());
    lambdas.extend(&mu);
    let mut proj = q0;
    for (m, d) in mu.iter().zip(&dirs) {
        proj[0] += m * d[0];
        proj[1] += m * d[1];
        proj[2] += m * d[2];
    }
    Some((proj, lambdas))
}

/// Gaussian elimination with partial pivoting for systems of size <= 3.
fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Filters a point cloud down to the vertices of its convex hull: a
/// point stays iff it is not within `tol` of the hull of the others.
pub fn extreme_points(points: &[RatePoint], tol: f64) -> Vec<RatePoint> {
    let arr: Vec<[f64; 3]> = points.iter().map(RatePoint::as_array).collect();
    // Dedupe first so copies do not mask each other.
    let mut unique: Vec<[f64; 3]> = Vec::new();
    for p in &arr {
        if !unique.iter().any(|q| dist2(q, p) < tol * tol) {
            unique.push(*p);
        }
    }
    let mut out = Vec::new();
    for (i, p) in unique.iter().enumerate() {
        let others: Vec<[f64; 3]> = unique
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| *q)
            .collect();
        if hull_distance2(p, &others) > tol * tol {
            out.push(RatePoint { r_e: p[0], r_s: p[1], r_t: p[2] });
        }
    }
    out.sort_by(|a, b| {
        a.r_e
            .total_cmp(&b.r_e)
            .then(a.r_s.total_cmp(&b.r_s))
            .then(a.r_t.total_cmp(&b.r_t))
    });
    out
}
