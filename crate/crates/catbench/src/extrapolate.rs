//! Minimal polynomial extrapolation for vector sequences: estimates the
//! fixed point of a convergent iteration from its last few iterates.

/// Extrapolates from the trailing `window` iterates of `sequence`. Each
/// iterate is one parameter vector; all must share a dimension. The degree
/// of the fitted minimal polynomial grows from 1 until the residual of the
/// difference-sequence fit vanishes, so a sequence whose recurrence has low
/// degree is extrapolated exactly. Returns the last iterate unchanged when
/// the sequence is too short, already at a fixed point, or degenerate.
pub fn minimal_polynomial_extrapolate(sequence: &[Vec<f64>], window: usize) -> Vec<f64> {
    let take = window.min(sequence.len());
    let iterates = &sequence[sequence.len() - take..];
    let Some(last) = iterates.last() else {
        return Vec::new();
    };
    if iterates.len() < 3 {
        return last.clone();
    }

    // First differences u_j = x_{j+1} - x_j over the whole window.
    let all_diffs: Vec<Vec<f64>> = iterates
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect();
    let scale = all_diffs
        .iter()
        .flat_map(|u| u.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale < 1e-12 {
        // Already at a fixed point.
        return last.clone();
    }

    let mut best: Option<Vec<f64>> = None;
    for degree in 1..all_diffs.len() {
        // Fit over the last `degree + 1` differences, which involve the
        // last `degree + 2` iterates.
        let diffs = &all_diffs[all_diffs.len() - (degree + 1)..];
        let tail = &iterates[iterates.len() - (degree + 2)..];
        let Some((s, residual)) = fit(tail, diffs, degree) else {
            continue;
        };
        best = Some(s.clone());
        if residual <= 1e-8 * scale {
            return s;
        }
    }
    best.unwrap_or_else(|| last.clone())
}

/// Solves min ||sum c_i u_i + u_last|| over the first `degree` differences,
/// forms the normalized coefficients, and combines the matching iterates.
/// Returns the extrapolation and the fit residual (infinity norm).
fn fit(iterates: &[Vec<f64>], diffs: &[Vec<f64>], degree: usize) -> Option<(Vec<f64>, f64)> {
    let u_last = &diffs[degree];
    let mut ata = vec![vec![0.0; degree]; degree];
    let mut atb = vec![0.0; degree];
    for i in 0..degree {
        for j in 0..degree {
            ata[i][j] = dot(&diffs[i], &diffs[j]);
        }
        atb[i] = -dot(&diffs[i], u_last);
    }
    let c = solve(&mut ata, &mut atb)?;

    let dim = u_last.len();
    let mut residual = 0.0f64;
    for d in 0..dim {
        let mut r = u_last[d];
        for (ci, u) in c.iter().zip(diffs) {
            r += ci * u[d];
        }
        residual = residual.max(r.abs());
    }

    let mut gamma = c;
    gamma.push(1.0);
    let total: f64 = gamma.iter().sum();
    if total.abs() < 1e-12 {
        return None;
    }
    let mut out = vec![0.0; dim];
    for (g, x) in gamma.iter().zip(iterates) {
        for (o, v) in out.iter_mut().zip(x) {
            *o += g * v;
        }
    }
    for o in &mut out {
        *o /= total;
    }
    Some((out, residual))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; None if singular.
fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let norm = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = 1e-12 * norm.max(1e-300);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}
