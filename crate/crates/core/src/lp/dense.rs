/// Solves the square system `a x = rhs` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `rel_tol` times the
/// largest entry of `a`.
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>, rel_tol: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if n == 0 {
        return Some(Vec::new());
    }
    if scale == 0.0 {
        return None;
    }
    let tol = rel_tol * scale;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|r| (r, a[r][k].abs()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= tol {
            return None;
        }
        a.swap(k, p);
        rhs.swap(k, p);
        for r in k + 1..n {
            let f = a[r][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for col in k..n {
                a[r][col] -= f * a[k][col];
            }
            rhs[r] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|col| a[k][col] * x[col]).sum();
        x[k] = (rhs[k] - s) / a[k][k];
    }
    Some(x)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
