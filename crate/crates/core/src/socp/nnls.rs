use nalgebra::{DMatrix, DVector};

/// Lawson–Hanson active-set solution of `min ‖A·x − b‖` subject to `x ⪰ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(enter) = candidate else { break };
        passive[enter] = true;

        loop {
            let z = solve_passive(a, b, &passive);
            let blocking = (0..n).filter(|&j| passive[j] && z[j] <= 0.0);
            let step = blocking.map(|j| x[j] / (x[j] - z[j])).fold(f64::INFINITY, f64::min);
            if step.is_infinite() {
                x = z;
                break;
            }
            x += (z - &x) * step;
            for j in 0..n {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    x
}

/// Unconstrained least squares restricted to the passive columns.
fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    let coef = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut z = DVector::zeros(passive.len());
    for (k, &j) in cols.iter().enumerate() {
        z[j] = coef[k];
    }
    z
}
