use crate::scalar::Scalar;

/// Solves the dense `q×q` system `a·x = b` (row-major `a`) by Gaussian
/// elimination with partial pivoting. Returns `None` when a pivot falls
/// below `16·ε·max|a|`.
pub(crate) fn solve<S: Scalar>(a: &[S], b: &[S], q: usize) -> Option<Vec<S>> {
    debug_assert_eq!(a.len(), q * q);
    debug_assert_eq!(b.len(), q);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(S::zero(), |acc, v| acc.max(v.abs()));
    if !(scale > S::zero()) || !scale.is_finite() {
        return None;
    }
    let tol = S::lit(16.0) * S::epsilon() * scale * S::count(q);
    for col in 0..q {
        let pivot_row = (col..q)
            .max_by(|&i, &j| m[i * q + col].abs().partial_cmp(&m[j * q + col].abs()).unwrap())
            .unwrap();
        if m[pivot_row * q + col].abs() <= tol {
            return None;
        }
        if pivot_row != col {
            for k in 0..q {
                m.swap(col * q + k, pivot_row * q + k);
            }
            x.swap(col, pivot_row);
        }
        let p = m[col * q + col];
        for row in col + 1..q {
            let f = m[row * q + col] / p;
            if f == S::zero() {
                continue;
            }
            for k in col..q {
                m[row * q + k] = m[row * q + k] - f * m[col * q + k];
            }
            x[row] = x[row] - f * x[col];
        }
    }
    for col in (0..q).rev() {
        let mut acc = x[col];
        for k in col + 1..q {
            acc = acc - m[col * q + k] * x[k];
        }
        x[col] = acc / m[col * q + col];
    }
    Some(x)
}
