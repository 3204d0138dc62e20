//! Small dense solvers: 3x3 elimination and Householder least squares.

use crate::error::{Error, Result};

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
///
/// Pivots whose magnitude falls below `1e-14` times the largest entry of `a`
/// are treated as singular.
pub fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3]> {
    let mut m = a;
    let mut rhs = b;
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = 1e-14 * scale.max(f64::MIN_POSITIVE);

    for col in 0..3 {
        let pivot_row = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty range");
        if m[pivot_row][col].abs() <= threshold {
            return Err(Error::SingularSystem {
                pivot: m[pivot_row][col],
            });
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            let (upper, lower) = m.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= factor * src;
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Ok(x)
}

/// Ordinary least squares `min |design * coef - ys|` by Householder QR.
///
/// `design` is row-major with `ncols` columns. Returns the coefficients.
pub fn least_squares(design: &[f64], ncols: usize, ys: &[f64]) -> Result<Vec<f64>> {
    let nrows = ys.len();
    assert_eq!(design.len(), nrows * ncols, "design shape mismatch");
    if nrows < ncols {
        return Err(Error::RankDeficient);
    }
    let mut a = design.to_vec();
    let mut b = ys.to_vec();
    let at = |r: usize, c: usize| r * ncols + c;

    let col_norms: Vec<f64> = (0..ncols)
        .map(|c| (0..nrows).map(|r| a[at(r, c)].powi(2)).sum::<f64>().sqrt())
        .collect();

    for k in 0..ncols {
        let norm = (k..nrows).map(|r| a[at(r, k)].powi(2)).sum::<f64>().sqrt();
        if norm <= 1e-12 * col_norms[k].max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient);
        }
        let alpha = if a[at(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..nrows).map(|r| a[at(r, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|e| e * e).sum();
        if vnorm2 > 0.0 {
            for c in k..ncols {
                let dot: f64 = (k..nrows).map(|r| v[r - k] * a[at(r, c)]).sum();
                let f = 2.0 * dot / vnorm2;
                for r in k..nrows {
                    a[at(r, c)] -= f * v[r - k];
                }
            }
            let dot: f64 = (k..nrows).map(|r| v[r - k] * b[r]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in k..nrows {
                b[r] -= f * v[r - k];
            }
        }
        if a[at(k, k)].abs() <= 1e-12 * col_norms[k] {
            return Err(Error::RankDeficient);
        }
    }

    let mut coef = vec![0.0; ncols];
    for k in (0..ncols).rev() {
        let tail: f64 = (k + 1..ncols).map(|c| a[at(k, c)] * coef[c]).sum();
        coef[k] = (b[k] - tail) / a[at(k, k)];
    }
    Ok(coef)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve3_needs_pivoting() {
        let a = [[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]];
        let x = solve3(a, [5.0, 10.0, 22.0]).unwrap();
        for (i, row) in a.iter().enumerate() {
            let lhs: f64 = row.iter().zip(&x).map(|(p, q)| p * q).sum();
            assert!((lhs - [5.0, 10.0, 22.0][i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve3_singular() {
        let a = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(matches!(solve3(a, [1.0, 2.0, 3.0]), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn least_squares_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let design: Vec<f64> = xs.iter().flat_map(|&x| [x, 1.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let c = least_squares(&design, 2, &ys).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-14 && (c[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn least_squares_duplicate_column() {
        let design = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        assert!(matches!(
            least_squares(&design, 2, &[1.0, 2.0, 3.0]),
            Err(Error::RankDeficient)
        ));
    }
}
