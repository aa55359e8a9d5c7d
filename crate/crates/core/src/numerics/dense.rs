//! Dense Gaussian elimination with partial pivoting.
//!
//! Used for the small normal-equation solves inside Levenberg-Marquardt
//! and for the Pade denominator (Toeplitz) system, and doubles as the
//! independent oracle the cyclic solver is tested against.

use super::{BigReal, NumericsError, PrecisionContext};

/// Solve `A x = b` in place of copies; `a` is row-major `n x n`.
pub fn solve_dense(
    a: &[Vec<BigReal>],
    b: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>, NumericsError> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<BigReal>> = a.to_vec();
    let mut rhs: Vec<BigReal> = b.to_vec();
    let threshold = ctx.eps_at(5);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().cmp_total(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < threshold {
            return Err(NumericsError::SingularSystem {
                row: col,
                pivot_magnitude: m[pivot_row][col].abs().to_f64(),
            });
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in col + 1..n {
            if m[row][col].is_zero() {
                continue;
            }
            let factor = &m[row][col] / &m[col][col];
            for k in col..n {
                let t = &factor * &m[col][k];
                m[row][k] -= &t;
            }
            let t = &factor * &rhs[col];
            rhs[row] -= &t;
        }
    }

    let mut x = vec![ctx.zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..n {
            let t = &m[row][k] * &x[k];
            acc -= &t;
        }
        x[row] = acc / &m[row][row];
    }
    Ok(x)
}
