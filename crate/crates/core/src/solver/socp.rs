use std::f64::consts::SQRT_2;

use super::{BlockKind, ConicProblem, ProblemError, SolveOutcome, Status};

#[derive(Debug, Clone)]
pub struct SocpSettings {
    /// Required `max |A w - b|` at an accepted point.
    pub feas_tol: f64,
    /// Allowed cone violation at an accepted point.
    pub cone_tol: f64,
    pub max_iter: usize,
    /// Iterations between two samples of the fixed-point residual.
    pub stall_window: usize,
    /// Relative decrease over one window below which the residual is taken
    /// to have stalled.
    pub stall_rel: f64,
}

impl Default for SocpSettings {
    fn default() -> Self {
        SocpSettings {
            feas_tol: 1e-8,
            cone_tol: 1e-8,
            max_iter: 50_000,
            stall_window: 1000,
            stall_rel: 1e-4,
        }
    }
}

/// Douglas-Rachford splitting between the affine set `{A w = b}` and the
/// product cone.
///
/// Columns are rescaled in a cone-preserving way and each rotated cone is
/// mapped orthogonally onto a standard second-order cone, so both
/// projections are exact. When the fixed-point residual stops shrinking at
/// a positive value the sets are judged disjoint and `NotFound` is returned.
pub fn solve_socp(prob: &ConicProblem<f64>, settings: &SocpSettings) -> Result<SolveOutcome<f64>, ProblemError> {
    prob.validate()?;
    let n = prob.ncols;

    // Column scaling: w = scale .* v.
    let mut colnorm = vec![0.0f64; n];
    for row in &prob.rows {
        for &(j, v) in row {
            colnorm[j] += v * v;
        }
    }
    let inv = |s: f64| if s > 0.0 { 1.0 / s.sqrt() } else { 1.0 };
    let mut scale = vec![1.0f64; n];
    for b in &prob.blocks {
        match b.kind {
            BlockKind::Free | BlockKind::Nonneg => {
                for j in b.range.clone() {
                    scale[j] = inv(colnorm[j]);
                }
            }
            BlockKind::Rsoc => {
                let s = b.range.start;
                let (sa, sb) = (inv(colnorm[s]), inv(colnorm[s + 1]));
                scale[s] = sa;
                scale[s + 1] = sb;
                // v-space triple (a, b, tau) with 2ab >= tau^2.
                scale[s + 2] = (sa * sb).sqrt() / SQRT_2;
            }
        }
    }

    // Rows of A*diag(scale), normalized; empty rows are dropped here and
    // caught by the final residual check.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (row, &b) in prob.rows.iter().zip(&prob.rhs) {
        let r: Vec<(usize, f64)> = row.iter().map(|&(j, v)| (j, v * scale[j])).filter(|(_, v)| *v != 0.0).collect();
        let nrm = r.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            if b.abs() > settings.feas_tol {
                return Ok(not_found(0));
            }
            continue;
        }
        rows.push(r.into_iter().map(|(j, v)| (j, v / nrm)).collect());
        rhs.push(b / nrm);
    }

    let affine = match AffineProjector::new(rows, rhs, n) {
        Some(a) => a,
        None => return Ok(not_found(0)),
    };

    let mut z = vec![0.0f64; n];
    let mut x = vec![0.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut reflect = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let mut history: Vec<f64> = Vec::new();

    // An inconsistent affine system already rules out feasibility.
    affine.project(&z, &mut x);
    for j in 0..n {
        w[j] = x[j] * scale[j];
    }
    if prob.residual_f64(&w) > 1e-6 * (1.0 + max_abs(&prob.rhs)) {
        return Ok(not_found(0));
    }

    for it in 1..=settings.max_iter {
        affine.project(&z, &mut x);
        for j in 0..n {
            reflect[j] = 2.0 * x[j] - z[j];
        }
        project_cone(&prob.blocks, &reflect, &mut y);
        let mut gap = 0.0;
        for j in 0..n {
            let d = y[j] - x[j];
            z[j] += d;
            gap += d * d;
        }
        let gap = gap.sqrt();

        if it % 10 == 0 || gap == 0.0 {
            for j in 0..n {
                w[j] = y[j] * scale[j];
            }
            let res = prob.residual_f64(&w);
            if res <= settings.feas_tol {
                let viol = prob.cone_violation_f64(&w);
                if viol <= settings.cone_tol {
                    return Ok(SolveOutcome {
                        status: Status::Feasible(w),
                        iterations: it,
                        primal_residual: res,
                        cone_violation: viol,
                    });
                }
            }
        }
        if it % settings.stall_window == 0 {
            if let Some(&prev) = history.last() {
                if gap > 1e-7 && prev - gap <= settings.stall_rel * prev {
                    return Ok(not_found(it));
                }
            }
            history.push(gap);
        }
    }
    Ok(SolveOutcome {
        status: Status::NonConverged,
        iterations: settings.max_iter,
        primal_residual: prob.residual_f64(&w),
        cone_violation: prob.cone_violation_f64(&w),
    })
}

fn not_found(iterations: usize) -> SolveOutcome<f64> {
    SolveOutcome {
        status: Status::NotFound,
        iterations,
        primal_residual: 0.0,
        cone_violation: 0.0,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn project_cone(blocks: &[super::Block], src: &[f64], dst: &mut [f64]) {
    for b in blocks {
        match b.kind {
            BlockKind::Free => dst[b.range.clone()].copy_from_slice(&src[b.range.clone()]),
            BlockKind::Nonneg => {
                for j in b.range.clone() {
                    dst[j] = src[j].max(0.0);
                }
            }
            BlockKind::Rsoc => {
                let s = b.range.start;
                let (a, bb, tau) = (src[s], src[s + 1], src[s + 2]);
                let p = (a + bb) / SQRT_2;
                let q = (a - bb) / SQRT_2;
                let nrm = q.hypot(tau);
                let (p2, q2, t2) = if nrm <= p {
                    (p, q, tau)
                } else if nrm <= -p {
                    (0.0, 0.0, 0.0)
                } else {
                    let alpha = 0.5 * (p + nrm);
                    (alpha, alpha * q / nrm, alpha * tau / nrm)
                };
                dst[s] = (p2 + q2) / SQRT_2;
                dst[s + 1] = (p2 - q2) / SQRT_2;
                dst[s + 2] = t2;
            }
        }
    }
}

/// Orthogonal projection onto `{v : A v = b}` through a Cholesky factor of
/// `A A^T` restricted to a maximal independent subset of rows.
struct AffineProjector {
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    /// Lower-triangular factor, row-major, `m x m`.
    l: Vec<f64>,
    m: usize,
}

impl AffineProjector {
    fn new(rows: Vec<Vec<(usize, f64)>>, rhs: Vec<f64>, n: usize) -> Option<Self> {
        let m = rows.len();
        if m == 0 {
            return Some(AffineProjector {
                rows,
                rhs,
                l: Vec::new(),
                m: 0,
            });
        }
        // Dense Gram matrix via a column-indexed scatter.
        let mut dense = vec![0.0f64; n];
        let mut g = vec![0.0f64; m * m];
        for i in 0..m {
            for &(j, v) in &rows[i] {
                dense[j] = v;
            }
            for k in 0..=i {
                let s: f64 = rows[k].iter().map(|&(j, v)| v * dense[j]).sum();
                g[i * m + k] = s;
                g[k * m + i] = s;
            }
            for &(j, _) in &rows[i] {
                dense[j] = 0.0;
            }
        }
        // Greedy pivoted Cholesky picks an independent subset of rows.
        let keep = independent_rows(&g, m);
        let sub_rows: Vec<Vec<(usize, f64)>> = keep.iter().map(|&i| rows[i].clone()).collect();
        let sub_rhs: Vec<f64> = keep.iter().map(|&i| rhs[i]).collect();
        let r = keep.len();
        let mut gs = vec![0.0f64; r * r];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &k) in keep.iter().enumerate() {
                gs[a * r + b] = g[i * m + k];
            }
        }
        let l = cholesky(&gs, r)?;
        Some(AffineProjector {
            rows: sub_rows,
            rhs: sub_rhs,
            l,
            m: r,
        })
    }

    fn project(&self, z: &[f64], out: &mut [f64]) {
        out.copy_from_slice(z);
        if self.m == 0 {
            return;
        }
        let m = self.m;
        let mut t: Vec<f64> = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| row.iter().map(|&(j, v)| v * z[j]).sum::<f64>() - b)
            .collect();
        // Solve L L^T s = t in place.
        for i in 0..m {
            let mut s = t[i];
            for k in 0..i {
                s -= self.l[i * m + k] * t[k];
            }
            t[i] = s / self.l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = t[i];
            for k in i + 1..m {
                s -= self.l[k * m + i] * t[k];
            }
            t[i] = s / self.l[i * m + i];
        }
        for (row, s) in self.rows.iter().zip(&t) {
            for &(j, v) in row {
                out[j] -= v * s;
            }
        }
    }
}

fn independent_rows(g: &[f64], m: usize) -> Vec<usize> {
    let mut a = g.to_vec();
    let mut perm: Vec<usize> = (0..m).collect();
    let maxdiag = (0..m).map(|i| g[i * m + i]).fold(0.0, f64::max);
    let tol = 1e-10 * maxdiag.max(1e-300);
    let mut rank = 0;
    for k in 0..m {
        // Choose the largest remaining diagonal.
        let (mut best, mut bv) = (k, a[perm[k] * m + perm[k]]);
        for i in k + 1..m {
            let v = a[perm[i] * m + perm[i]];
            if v > bv {
                best = i;
                bv = v;
            }
        }
        if bv <= tol {
            break;
        }
        perm.swap(k, best);
        let p = perm[k];
        let d = bv.sqrt();
        // Column k of the factor, stored back into `a` at (i, p).
        for &i in &perm[k + 1..m] {
            a[i * m + p] /= d;
        }
        for ii in k + 1..m {
            let i = perm[ii];
            let lik = a[i * m + p];
            for &j in &perm[k + 1..=ii] {
                let v = lik * a[j * m + p];
                a[i * m + j] -= v;
                if i != j {
                    a[j * m + i] -= v;
                }
            }
        }
        rank += 1;
    }
    let mut keep = perm[..rank].to_vec();
    keep.sort_unstable();
    keep
}

fn cholesky(g: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0f64; m * m];
    for i in 0..m {
        for k in 0..=i {
            let mut s = g[i * m + k];
            for j in 0..k {
                s -= l[i * m + j] * l[k * m + j];
            }
            if i == k {
                if s <= 0.0 {
                    return None;
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + k] = s / l[k * m + k];
            }
        }
    }
    Some(l)
}
