//! ARIMA(p, d, q) estimation by conditional sum of squares.
//!
//! The model convention is
//!
//! ```text
//! x_t = c + phi_1 x_{t-1} + ... + phi_p x_{t-p}
//!         + theta_1 eps_{t-1} + ... + theta_q eps_{t-q} + eps_t
//! ```
//!
//! applied to the series after `d` rounds of first differencing. Note the
//! positive sign on the moving-average terms. Estimation conditions on the
//! first `max(p, q)` observations: residuals before that point are treated
//! as zero and the sum of squared residuals over the remainder is minimized
//! with a Nelder-Mead simplex seeded by a Hannan-Rissanen regression.

mod init;
mod optim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{difference, undifference, TimeSeries};

/// Default cap on each of p, d and q. Callers with a reason to go higher
/// (long-memory AR approximations of sharp spectral peaks, for instance)
/// can raise it per order via [`ArimaOrder::with_max_order`], up to
/// [`ORDER_CEILING`].
pub const DEFAULT_MAX_ORDER: usize = 12;

/// Absolute ceiling on any order component, whatever the configured cap.
/// Beyond this the conditioning window eats the sample and fits are
/// meaningless on the series lengths this crate targets.
pub const ORDER_CEILING: usize = 64;

/// A validated (p, d, q) triple.
///
/// `new` rejects `p + q == 0` so that a pure-intercept model can only be
/// requested deliberately through [`ArimaOrder::intercept_only`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ArimaOrder {
    p: usize,
    d: usize,
    q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        Self::with_max_order(p, d, q, DEFAULT_MAX_ORDER)
    }

    /// Like [`ArimaOrder::new`] but with an explicit cap on each component.
    pub fn with_max_order(p: usize, d: usize, q: usize, max_order: usize) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::InvalidArgument(
                "order (0, d, 0) must be requested via ArimaOrder::intercept_only".into(),
            ));
        }
        Self::from_parts(p, d, q, max_order)
    }

    /// A model with no AR or MA terms: a constant on the differenced scale.
    pub fn intercept_only(d: usize) -> Result<Self> {
        Self::from_parts(0, d, 0, DEFAULT_MAX_ORDER)
    }

    fn from_parts(p: usize, d: usize, q: usize, max_order: usize) -> Result<Self> {
        let cap = max_order.min(ORDER_CEILING);
        for (name, v) in [("p", p), ("d", d), ("q", q)] {
            if v > cap {
                return Err(Error::InvalidArgument(format!(
                    "order component {name} = {v} exceeds the maximum {cap}"
                )));
            }
        }
        Ok(Self { p, d, q })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of free parameters: the intercept plus the AR and MA terms.
    pub fn num_params(&self) -> usize {
        self.p + self.q + 1
    }

    pub fn label(&self) -> String {
        format!("arima({},{},{})", self.p, self.d, self.q)
    }
}

impl<'de> Deserialize<'de> for ArimaOrder {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            p: usize,
            d: usize,
            q: usize,
        }
        let raw = Raw::deserialize(deserializer)?;
        // A config stating (0, d, 0) outright counts as an explicit request
        // for the intercept-only model, and a config stating a large order is
        // itself the act of configuring the cap, so only the hard ceiling
        // applies here.
        ArimaOrder::from_parts(raw.p, raw.d, raw.q, ORDER_CEILING)
            .map_err(serde::de::Error::custom)
    }
}

/// Knobs for the CSS optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Reject parameter points that are non-stationary or non-invertible.
    pub enforce_stationarity: bool,
    pub max_iterations: usize,
    /// Simplex terminates when the best-to-worst objective spread falls
    /// below this value.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            enforce_stationarity: true,
            max_iterations: 2000,
            tolerance: 1e-8,
        }
    }
}

/// A fitted model, sufficient to forecast from the end of its training data.
#[derive(Debug, Clone)]
pub struct FittedArima {
    pub order: ArimaOrder,
    pub c: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// SSE divided by the number of conditioned residuals.
    pub sigma2: f64,
    pub aic: f64,
    /// Conditioned one-step residuals on the differenced scale.
    pub residuals: Vec<f64>,
    /// Last `max(p, q) + d` training observations on the original scale;
    /// enough to rebuild the lag window and undo the differencing.
    pub train_tail: Vec<f64>,
    /// Whether the simplex met its tolerance before the iteration cap.
    /// Hitting the cap is a valid (if less polished) termination, so this
    /// is a diagnostic, not an error.
    pub converged: bool,
}

impl FittedArima {
    pub fn label(&self) -> String {
        self.order.label()
    }

    pub fn summary(&self) -> ArimaSummary {
        ArimaSummary {
            p: self.order.p(),
            d: self.order.d(),
            q: self.order.q(),
            c: self.c,
            phi: self.phi.clone(),
            theta: self.theta.clone(),
            sigma2: self.sigma2,
            aic: self.aic,
        }
    }
}

/// Flat, serializable record of a fitted model for report embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaSummary {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub c: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma2: f64,
    pub aic: f64,
}

/// Conditional residuals of an ARMA(p, q) model on `values`.
///
/// Residuals for `t < max(p, q)` are fixed at zero and not returned; the
/// output has length `values.len() - max(p, q)`.
pub fn css_residuals(values: &[f64], c: f64, phi: &[f64], theta: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    let m = phi.len().max(theta.len());
    if n <= m {
        return Err(Error::InvalidArgument(format!(
            "need more than {m} observations to condition an ARMA({}, {}) model, got {n}",
            phi.len(),
            theta.len()
        )));
    }
    let mut eps = vec![0.0; n];
    for t in m..n {
        let mut pred = c;
        for (i, ph) in phi.iter().enumerate() {
            pred += ph * values[t - 1 - i];
        }
        for (j, th) in theta.iter().enumerate() {
            pred += th * eps[t - 1 - j];
        }
        eps[t] = values[t] - pred;
    }
    eps.drain(..m);
    Ok(eps)
}

/// True when all roots of `1 - a_1 z - ... - a_k z^k` lie strictly outside
/// the unit circle, tested by the Levinson step-down recursion: the model is
/// admissible exactly when every reflection coefficient has magnitude
/// below one.
fn all_roots_outside_unit_circle(coeffs: &[f64]) -> bool {
    let mut a = coeffs.to_vec();
    for m in (1..=a.len()).rev() {
        let k = a[m - 1];
        if !k.is_finite() || k.abs() >= 1.0 {
            return false;
        }
        if m == 1 {
            break;
        }
        let denom = 1.0 - k * k;
        let prev = a[..m - 1].to_vec();
        for i in 0..m - 1 {
            a[i] = (prev[i] + k * prev[m - 2 - i]) / denom;
        }
    }
    true
}

/// Stationarity of the AR polynomial `1 - phi_1 z - ... - phi_p z^p`.
pub fn is_stationary(phi: &[f64]) -> bool {
    all_roots_outside_unit_circle(phi)
}

/// Invertibility of the MA polynomial `1 + theta_1 z + ... + theta_q z^q`.
pub fn is_invertible(theta: &[f64]) -> bool {
    let negated: Vec<f64> = theta.iter().map(|t| -t).collect();
    all_roots_outside_unit_circle(&negated)
}

/// Akaike information criterion for a CSS fit: `n ln(SSE / n) + 2 k` over
/// the `n` conditioned residuals, with the variance floored to keep exact
/// fits finite.
pub fn aic(n_residuals: usize, sse: f64, n_params: usize) -> f64 {
    let n = n_residuals as f64;
    n * (sse / n).max(1e-300).ln() + 2.0 * n_params as f64
}

/// Scale coefficients by `s^i` so every root of the associated polynomial
/// moves outward by `1/s`, repeated until the admissibility test passes.
/// Preserves root phases, which matters for oscillatory fits.
fn shrink_until<F>(coeffs: &mut [f64], ok: F)
where
    F: Fn(&[f64]) -> bool,
{
    const SHRINK: f64 = 0.98;
    for _ in 0..600 {
        if ok(coeffs) {
            return;
        }
        let mut factor = 1.0;
        for c in coeffs.iter_mut() {
            factor *= SHRINK;
            *c *= factor;
        }
    }
    // 0.98^600 is ~5e-6; if the test still fails the coefficients are
    // degenerate, and zero is always admissible.
    for c in coeffs.iter_mut() {
        *c = 0.0;
    }
}

/// Pull an initial guess into the admissible region, leaving it untouched
/// when it is already valid.
pub(crate) fn make_feasible(phi: &mut [f64], theta: &mut [f64]) {
    shrink_until(phi, is_stationary);
    shrink_until(theta, is_invertible);
}

fn sum_squares(residuals: &[f64]) -> f64 {
    residuals.iter().map(|e| e * e).sum()
}

/// CSS objective over packed parameters `[c, phi.., theta..]`; infinite for
/// inadmissible or numerically exploded points.
fn css_objective(w: &[f64], p: usize, q: usize, enforce: bool, params: &[f64]) -> f64 {
    let c = params[0];
    let phi = &params[1..1 + p];
    let theta = &params[1 + p..1 + p + q];
    if enforce && !(is_stationary(phi) && is_invertible(theta)) {
        return f64::INFINITY;
    }
    match css_residuals(w, c, phi, theta) {
        Ok(residuals) => {
            let sse = sum_squares(&residuals);
            if sse.is_finite() {
                sse
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Fit an ARIMA model to `train` by conditional sum of squares.
///
/// Requires `train.len() >= p + q + d + 10` so the conditioned fit has a
/// sensible number of residuals to work with.
pub fn fit(train: &TimeSeries, order: ArimaOrder, options: &FitOptions) -> Result<FittedArima> {
    let (p, d, q) = (order.p(), order.d(), order.q());
    let min_len = p + q + d + 10;
    if train.len() < min_len {
        return Err(Error::InvalidArgument(format!(
            "{} needs at least {min_len} observations, got {}",
            order.label(),
            train.len()
        )));
    }
    let w = difference(train.values(), d)?;

    let (c0, mut phi0, mut theta0) = init::hannan_rissanen(&w, p, q)?;
    if options.enforce_stationarity {
        make_feasible(&mut phi0, &mut theta0);
    }
    let mut x0 = Vec::with_capacity(1 + p + q);
    x0.push(c0);
    x0.extend_from_slice(&phi0);
    x0.extend_from_slice(&theta0);

    let mut steps = Vec::with_capacity(x0.len());
    steps.push(0.05 * (1.0 + c0.abs()));
    steps.extend(std::iter::repeat(0.1).take(p + q));

    let enforce = options.enforce_stationarity;
    let objective = |params: &[f64]| css_objective(&w, p, q, enforce, params);
    let solution = optim::minimize(
        objective,
        &x0,
        &steps,
        options.tolerance,
        options.max_iterations,
    );
    if !solution.value.is_finite() {
        return Err(Error::ConvergenceFailure {
            reason: format!(
                "no admissible parameters found for {} in {} iterations",
                order.label(),
                solution.iterations
            ),
            best: solution.point,
            objective: solution.value,
        });
    }

    let c = solution.point[0];
    let phi = solution.point[1..1 + p].to_vec();
    let theta = solution.point[1 + p..1 + p + q].to_vec();
    let residuals = css_residuals(&w, c, &phi, &theta)?;
    let sse = sum_squares(&residuals);
    let sigma2 = sse / residuals.len() as f64;
    let aic = aic(residuals.len(), sse, order.num_params());

    let tail_len = p.max(q) + d;
    let train_tail = train.values()[train.len() - tail_len..].to_vec();

    Ok(FittedArima {
        order,
        c,
        phi,
        theta,
        sigma2,
        aic,
        residuals,
        train_tail,
        converged: solution.converged,
    })
}

/// Mean forecast `horizon` steps past the end of the training data.
///
/// Future innovations are set to their zero mean; lagged innovations inside
/// the window come from the stored residuals. The recursion runs on the
/// differenced scale and is integrated back through the training tail.
pub fn forecast(model: &FittedArima, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument(
            "forecast horizon must be at least 1".into(),
        ));
    }
    let (p, d, q) = (model.order.p(), model.order.d(), model.order.q());

    let mut hist = if model.train_tail.len() > d {
        difference(&model.train_tail, d)?
    } else {
        Vec::new()
    };
    if hist.len() < p {
        return Err(Error::InvalidArgument(format!(
            "training tail of {} differenced values cannot seed {} AR lags",
            hist.len(),
            p
        )));
    }
    let mut eps: Vec<f64> = if q == 0 {
        Vec::new()
    } else {
        let have = model.residuals.len().min(q);
        let mut padded = vec![0.0; q - have];
        padded.extend_from_slice(&model.residuals[model.residuals.len() - have..]);
        padded
    };

    let mut preds = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut next = model.c;
        for i in 1..=p {
            next += model.phi[i - 1] * hist[hist.len() - i];
        }
        for j in 1..=q {
            next += model.theta[j - 1] * eps[eps.len() - j];
        }
        hist.push(next);
        if q > 0 {
            eps.push(0.0);
        }
        preds.push(next);
    }

    let seeds = &model.train_tail[model.train_tail.len() - d..];
    undifference(&preds, seeds, d)
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Pick (p, d, q) for `train` by AIC over a grid.
///
/// The differencing depth is chosen first: `d` grows while one more round
/// of differencing still shrinks the variance to at most 90% of the
/// current level, capped at `max_d`. Every (p, q) in the grid is then fitted
/// at that `d` and the lowest AIC wins; exact ties go to the smaller
/// `p + q`, then to the smaller `p`. Candidates that fail to fit are
/// skipped.
pub fn select_order(
    train: &TimeSeries,
    max_p: usize,
    max_d: usize,
    max_q: usize,
    options: &FitOptions,
) -> Result<ArimaOrder> {
    for (name, v) in [("max_p", max_p), ("max_d", max_d), ("max_q", max_q)] {
        if v > ORDER_CEILING {
            return Err(Error::InvalidArgument(format!(
                "{name} = {v} exceeds the maximum order {ORDER_CEILING}"
            )));
        }
    }

    let mut d = 0usize;
    let mut current = train.values().to_vec();
    let mut current_var = variance(&current);
    while d < max_d && current.len() >= 2 && current_var > 1e-24 {
        let next = difference(&current, 1)?;
        let next_var = variance(&next);
        if next_var <= 0.9 * current_var {
            d += 1;
            current = next;
            current_var = next_var;
        } else {
            break;
        }
    }

    let mut best: Option<(f64, usize, usize, ArimaOrder)> = None;
    for p in 0..=max_p {
        for q in 0..=max_q {
            let order = if p + q == 0 {
                ArimaOrder::intercept_only(d)?
            } else {
                // The caller's grid bounds are the configured cap here.
                ArimaOrder::with_max_order(p, d, q, max_p.max(max_d).max(max_q))?
            };
            let Ok(fitted) = fit(train, order, options) else {
                continue;
            };
            let key = (fitted.aic, p + q, p);
            let better = match &best {
                None => true,
                Some((aic, complexity, best_p, _)) => {
                    match key.0.total_cmp(aic) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => {
                            (key.1, key.2) < (*complexity, *best_p)
                        }
                    }
                }
            };
            if better {
                best = Some((key.0, key.1, key.2, order));
            }
        }
    }

    match best {
        Some((_, _, _, order)) => Ok(order),
        None => Err(Error::ConvergenceFailure {
            reason: format!(
                "no candidate order up to ({max_p}, {max_d}, {max_q}) could be fitted"
            ),
            best: Vec::new(),
            objective: f64::INFINITY,
        }),
    }
}
