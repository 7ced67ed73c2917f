//! Derivative-free simplex minimizer used by the CSS fitter.
//!
//! Standard Nelder-Mead with reflection, expansion, contraction and shrink.
//! The objective may return `f64::INFINITY` to reject a point, which is how
//! stationarity and invertibility constraints are enforced.

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// True when the objective spread fell below the tolerance.
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `objective` starting from `x0`.
///
/// The initial simplex is `x0` plus one vertex per coordinate, stepped by
/// `initial_steps[i]`. Terminates when the spread between the best and worst
/// vertex values drops below `tolerance`, or after `max_iterations`.
pub fn minimize<F>(
    mut objective: F,
    x0: &[f64],
    initial_steps: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(initial_steps.len(), dim);
    if dim == 0 {
        let value = objective(x0);
        return SimplexResult {
            point: x0.to_vec(),
            value,
            iterations: 0,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += initial_steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| objective(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;

        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        if spread.is_finite() && spread < tolerance {
            converged = true;
            break;
        }

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; dim];
        for &idx in &order[..dim] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let reflected = blend(&centroid, &simplex[worst], REFLECT);
        let f_reflected = objective(&reflected);

        if f_reflected < values[best] {
            let expanded = blend(&centroid, &simplex[worst], EXPAND);
            let f_expanded = objective(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        // Contract toward the centroid, outside or inside depending on
        // whether the reflection beat the worst vertex.
        let contracted = if f_reflected < values[worst] {
            blend(&centroid, &reflected, -CONTRACT)
        } else {
            blend(&centroid, &simplex[worst], -CONTRACT)
        };
        let f_contracted = objective(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        // Shrink everything toward the best vertex.
        let anchor = simplex[best].clone();
        for &idx in &order[1..] {
            for (x, a) in simplex[idx].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[idx] = objective(&simplex[idx]);
        }
    }

    let best = (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("nonempty simplex");
    SimplexResult {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

/// `centroid + coeff * (centroid - from)`; negative `coeff` lands between.
fn blend(centroid: &[f64], from: &[f64], coeff: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(from)
        .map(|(c, f)| c + coeff * (c - f))
        .collect()
}
