//! Small dense matrix helpers for the characteristic polynomial.

pub(crate) type Dense = Vec<Vec<f64>>;

/// Determinant by LU decomposition with partial pivoting.
pub(crate) fn lu_determinant(mut a: Dense) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let diag = a[col][col];
        det *= diag;
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / diag;
            if factor != 0.0 {
                for (r, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *r -= factor * p;
                }
            }
        }
    }
    det
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

/// Characteristic polynomial `det(xI - A)` by the Faddeev–LeVerrier trace
/// recurrence. Coefficients are returned leading first, so `coeffs[0] = 1`
/// multiplies `x^n`.
pub(crate) fn faddeev_leverrier(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        let prev = coeffs[k - 1];
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += prev;
        }
        let am = matmul(a, &next);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-trace / k as f64);
        m = next;
    }
    coeffs
}

/// Horner evaluation of a leading-first coefficient list.
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}
