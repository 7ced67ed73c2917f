//! Starting values for the CSS optimizer.
//!
//! Hannan-Rissanen two-stage regression: a long autoregression supplies
//! innovation estimates, then the ARMA coefficients come from an ordinary
//! least-squares fit of the series on its own lags and the lagged
//! innovations. The result only needs to be good enough to seed the simplex
//! search, so a small ridge term keeps the normal equations solvable on
//! degenerate (for example noiseless) inputs.

use crate::error::{Error, Result};

/// Solve `X beta = y` in the least-squares sense via the normal equations.
///
/// `rows` holds the design matrix one row per observation. A ridge
/// proportional to the mean diagonal of `X^T X` guards against singular
/// systems; the distortion is far below the optimizer's own tolerance.
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidArgument(format!(
            "least squares needs matching nonempty rows and targets, got {n} rows, {} targets",
            y.len()
        )));
    }
    let k = rows[0].len();
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!(
            "least squares is underdetermined: {n} rows for {k} coefficients"
        )));
    }

    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for (row, &target) in rows.iter().zip(y) {
        debug_assert_eq!(row.len(), k);
        for i in 0..k {
            xty[i] += row[i] * target;
            for j in i..k {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }

    let trace: f64 = (0..k).map(|i| xtx[i][i]).sum();
    let ridge = 1e-8 * (trace / k as f64).max(1e-12);
    for i in 0..k {
        xtx[i][i] += ridge;
    }

    solve_linear(&mut xtx, &mut xty)
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_linear(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty column");
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::InvalidArgument(
                "singular system in least-squares initializer".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..k {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for j in col + 1..k {
            acc -= a[col][j] * x[j];
        }
        x[col] = acc / a[col][col];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite solution in least-squares initializer".into(),
        ));
    }
    Ok(x)
}

/// Two-stage Hannan-Rissanen estimate of `(c, phi, theta)` for an ARMA(p, q)
/// model on the (already differenced) series `w`.
pub(crate) fn hannan_rissanen(w: &[f64], p: usize, q: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let n = w.len();
    if p == 0 && q == 0 {
        let mean = w.iter().sum::<f64>() / n.max(1) as f64;
        return Ok((mean, Vec::new(), Vec::new()));
    }

    // Stage 1: long AR to approximate the innovation sequence.
    let long_order = (n / 10).clamp(1, 20);
    let innovations = if q == 0 {
        // Pure AR needs no innovation regressors; skip the long fit.
        vec![0.0; n]
    } else {
        long_ar_innovations(w, long_order)?
    };

    // Stage 2: regress w_t on an intercept, p lags of w and q lagged
    // innovations. Innovations are only defined from `long_order` on, so the
    // usable rows start where every regressor exists.
    let start = if q == 0 { p } else { p.max(long_order + q) };
    if start >= n {
        return Err(Error::InvalidArgument(format!(
            "series of length {n} too short to initialize ARMA({p}, {q})"
        )));
    }
    let mut rows = Vec::with_capacity(n - start);
    let mut targets = Vec::with_capacity(n - start);
    for t in start..n {
        let mut row = Vec::with_capacity(1 + p + q);
        row.push(1.0);
        for i in 1..=p {
            row.push(w[t - i]);
        }
        for j in 1..=q {
            row.push(innovations[t - j]);
        }
        rows.push(row);
        targets.push(w[t]);
    }
    let beta = least_squares(&rows, &targets)?;

    let c = beta[0];
    let phi = beta[1..1 + p].to_vec();
    let theta = beta[1 + p..1 + p + q].to_vec();
    Ok((c, phi, theta))
}

/// Fit a long AR(m) by least squares and return the one-step residuals,
/// zero-filled over the first `m` positions where no estimate exists.
fn long_ar_innovations(w: &[f64], m: usize) -> Result<Vec<f64>> {
    let n = w.len();
    if n <= m + 1 {
        return Err(Error::InvalidArgument(format!(
            "series of length {n} too short for a long AR({m}) pre-fit"
        )));
    }
    let mut rows = Vec::with_capacity(n - m);
    let mut targets = Vec::with_capacity(n - m);
    for t in m..n {
        let mut row = Vec::with_capacity(1 + m);
        row.push(1.0);
        for i in 1..=m {
            row.push(w[t - i]);
        }
        rows.push(row);
        targets.push(w[t]);
    }
    let beta = least_squares(&rows, &targets)?;

    let mut innovations = vec![0.0; n];
    for t in m..n {
        let mut pred = beta[0];
        for i in 1..=m {
            pred += beta[i] * w[t - i];
        }
        innovations[t] = w[t] - pred;
    }
    Ok(innovations)
}
