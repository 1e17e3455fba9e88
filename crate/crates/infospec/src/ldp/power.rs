//! Perron root and eigenvector computation for nonnegative matrices held in
//! log space, plus extreme cycle means for tilt-limit slopes.
//!
//! Matrices arrive as log entries with `NEG_INFINITY` marking structural
//! zeros.  All iteration happens on log scale so heavily tilted kernels
//! (entries spanning hundreds of orders of magnitude) stay representable.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200_000;
/// Collatz-Wielandt enclosure width on log scale; equals relative tolerance
/// on the spectral radius.
const RADIUS_TOLERANCE: f64 = 1e-12;

/// Perron data of an irreducible nonnegative matrix.
#[derive(Debug, Clone)]
pub struct PerronTriple {
    /// Natural log of the spectral radius.
    pub log_radius: f64,
    /// Right eigenvector, positive, normalized to sum 1.
    pub right: Vec<f64>,
    /// Left eigenvector, positive, normalized to sum 1.
    pub left: Vec<f64>,
}

impl PerronTriple {
    /// Stationary law of the tilted chain: proportional to left * right.
    pub fn tilted_stationary(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| l * r)
            .collect();
        let total: f64 = out.iter().sum();
        for v in &mut out {
            *v /= total;
        }
        out
    }
}

fn log_sum_exp_pair(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_mat_vec(log_entries: &[Vec<f64>], u: &[f64], out: &mut [f64]) {
    for (i, row) in log_entries.iter().enumerate() {
        let mut m = f64::NEG_INFINITY;
        for (j, &e) in row.iter().enumerate() {
            if e > f64::NEG_INFINITY {
                let v = e + u[j];
                if v > m {
                    m = v;
                }
            }
        }
        if m == f64::NEG_INFINITY {
            out[i] = f64::NEG_INFINITY;
            continue;
        }
        let mut s = 0.0;
        for (j, &e) in row.iter().enumerate() {
            if e > f64::NEG_INFINITY {
                s += (e + u[j] - m).exp();
            }
        }
        out[i] = m + s.ln();
    }
}

fn strongly_connected(log_entries: &[Vec<f64>]) -> bool {
    let n = log_entries.len();
    let reach = |forward: bool| -> usize {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let edge = if forward {
                    log_entries[i][j]
                } else {
                    log_entries[j][i]
                };
                if edge > f64::NEG_INFINITY && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count
    };
    reach(true) == n && reach(false) == n
}

fn transpose(log_entries: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = log_entries.len();
    let mut t = vec![vec![f64::NEG_INFINITY; n]; n];
    for i in 0..n {
        for j in 0..n {
            t[j][i] = log_entries[i][j];
        }
    }
    t
}

/// Power iteration with an adaptive diagonal shift.  The shift magnitude
/// tracks the current radius estimate so periodic support graphs and tiny
/// spectral radii both converge; the Collatz-Wielandt enclosure is measured
/// on the unshifted matrix.
fn perron_vector(log_entries: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = log_entries.len();
    let mut u = vec![0.0f64; n];
    let mut t = vec![0.0f64; n];
    let mut last_gap = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        log_mat_vec(log_entries, &u, &mut t);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let d = t[i] - u[i];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let estimate = 0.5 * (lo + hi);
        last_gap = hi - lo;
        if last_gap <= RADIUS_TOLERANCE {
            let mut m = f64::NEG_INFINITY;
            for &v in u.iter() {
                m = m.max(v);
            }
            let mut vec_lin: Vec<f64> = u.iter().map(|&v| (v - m).exp()).collect();
            let total: f64 = vec_lin.iter().sum();
            for v in &mut vec_lin {
                *v /= total;
            }
            return Ok((estimate, vec_lin));
        }
        let mut top = f64::NEG_INFINITY;
        for i in 0..n {
            u[i] = log_sum_exp_pair(t[i], estimate + u[i]);
            top = top.max(u[i]);
        }
        for v in &mut u {
            *v -= top;
        }
    }
    Err(Error::Numeric(format!(
        "power iteration stalled: enclosure width {last_gap:.3e} after {MAX_ITERATIONS} iterations"
    )))
}

/// Log spectral radius and both Perron vectors of an irreducible nonnegative
/// matrix given by its log entries.
pub fn log_spectral_radius(log_entries: &[Vec<f64>]) -> Result<PerronTriple> {
    let n = log_entries.len();
    if n == 0 || log_entries.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
    }
    for row in log_entries {
        for &e in row {
            if e.is_nan() || e == f64::INFINITY {
                return Err(Error::InvalidInput("matrix entries must be finite or -inf".into()));
            }
        }
    }
    if !strongly_connected(log_entries) {
        return Err(Error::Degenerate(
            "support graph is not strongly connected".into(),
        ));
    }
    let mut shift = f64::NEG_INFINITY;
    for row in log_entries {
        for &e in row {
            shift = shift.max(e);
        }
    }
    let scaled: Vec<Vec<f64>> = log_entries
        .iter()
        .map(|row| row.iter().map(|&e| e - shift).collect())
        .collect();
    let (log_r, right) = perron_vector(&scaled)?;
    let (_, left) = perron_vector(&transpose(&scaled))?;
    Ok(PerronTriple {
        log_radius: log_r + shift,
        right,
        left,
    })
}

/// Maximum mean weight over directed cycles (Karp).  Weights use
/// `NEG_INFINITY` for absent edges; the graph must be strongly connected.
pub fn max_cycle_mean(weights: &[Vec<f64>]) -> Result<f64> {
    let n = weights.len();
    if n == 0 || weights.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("weight matrix must be square".into()));
    }
    if !strongly_connected(weights) {
        return Err(Error::Degenerate(
            "support graph is not strongly connected".into(),
        ));
    }
    // d[k][v] = best weight of a k-step walk from vertex 0 to v.
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    d[0][0] = 0.0;
    for k in 1..=n {
        for v in 0..n {
            let mut best = f64::NEG_INFINITY;
            for u in 0..n {
                if d[k - 1][u] > f64::NEG_INFINITY && weights[u][v] > f64::NEG_INFINITY {
                    best = best.max(d[k - 1][u] + weights[u][v]);
                }
            }
            d[k][v] = best;
        }
    }
    let mut overall = f64::NEG_INFINITY;
    for v in 0..n {
        if d[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for (k, dk) in d.iter().enumerate().take(n) {
            if dk[v] > f64::NEG_INFINITY {
                worst = worst.min((d[n][v] - dk[v]) / (n - k) as f64);
            }
        }
        overall = overall.max(worst);
    }
    Ok(overall)
}

/// Minimum mean cycle weight; negated maximum over the negated weights.
pub fn min_cycle_mean(weights: &[Vec<f64>]) -> Result<f64> {
    let negated: Vec<Vec<f64>> = weights
        .iter()
        .map(|row| {
            row.iter()
                .map(|&w| {
                    if w == f64::NEG_INFINITY {
                        f64::NEG_INFINITY
                    } else {
                        -w
                    }
                })
                .collect()
        })
        .collect();
    Ok(-max_cycle_mean(&negated)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logm(entries: &[&[f64]]) -> Vec<Vec<f64>> {
        entries
            .iter()
            .map(|row| row.iter().map(|&v| v.ln()).collect())
            .collect()
    }

    #[test]
    fn stochastic_matrix_has_unit_radius_and_stationary_product() {
        let m = logm(&[&[0.9, 0.1], &[0.2, 0.8]]);
        let triple = log_spectral_radius(&m).unwrap();
        assert!(triple.log_radius.abs() < 1e-11);
        let pi = triple.tilted_stationary();
        // stationary law of the chain is (2/3, 1/3)
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn periodic_permutation_converges() {
        let m = logm(&[&[2.0, 2.0], &[2.0, 0.0]]);
        // radius of [[2,2],[2,0]] is 1+sqrt(5)
        let expect = (1.0 + 5.0f64.sqrt()).ln();
        let triple = log_spectral_radius(&m).unwrap();
        assert!((triple.log_radius - expect).abs() < 1e-10);

        let swap = vec![
            vec![f64::NEG_INFINITY, 2.0f64.ln()],
            vec![2.0f64.ln(), f64::NEG_INFINITY],
        ];
        let triple = log_spectral_radius(&swap).unwrap();
        assert!((triple.log_radius - 2.0f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn off_diagonal_two_state_matches_closed_form() {
        let m = logm(&[&[0.0f64 + 1e-300, 2.0], &[8.0, 1e-300]]);
        // effectively [[0,2],[8,0]]: radius 4
        let triple = log_spectral_radius(&m).unwrap();
        assert!((triple.log_radius - 4.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn extreme_scale_two_by_two_matches_quadratic_formula() {
        // [[a,b],[c,d]] with entries spanning 200 orders of magnitude; the
        // diagonal is negligible against sqrt(b*c), so the radius sits at
        // log (lb+lc)/2 = -250 far below any single entry scale.
        let (la, lb, lc, ld) = (-460.0, 0.0, -500.0, -480.0);
        let m = vec![vec![la, lb], vec![lc, ld]];
        let triple = log_spectral_radius(&m).unwrap();
        assert!((triple.log_radius - (lb + lc) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn reducible_matrix_rejected() {
        let m = vec![
            vec![0.0, f64::NEG_INFINITY],
            vec![0.0, 0.0],
        ];
        assert!(matches!(
            log_spectral_radius(&m),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cycle_means_on_small_graphs() {
        let inf = f64::NEG_INFINITY;
        // two-cycle with weights 1 and 3, plus a self-loop of weight 1.5
        let w = vec![vec![1.5, 1.0], vec![3.0, inf]];
        assert!((max_cycle_mean(&w).unwrap() - 2.0).abs() < 1e-12);
        assert!((min_cycle_mean(&w).unwrap() - 1.5).abs() < 1e-12);

        // self-loop dominates
        let w = vec![vec![5.0, 1.0], vec![3.0, inf]];
        assert!((max_cycle_mean(&w).unwrap() - 5.0).abs() < 1e-12);
    }
}
