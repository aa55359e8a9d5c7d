//! Cyclic (periodic) tridiagonal solver.
//!
//! The Newton step for a periodic orbit of period `q` is a symmetric
//! tridiagonal system with populated `(1,q)`/`(q,1)` corners. We solve the
//! plain tridiagonal part with the Thomas algorithm and fold the corners
//! back in with a Sherman-Morrison rank-one correction, O(q) total.

use super::{BigReal, NumericsError, PrecisionContext};

/// Symmetric cyclic tridiagonal system of size `q`.
///
/// `diag[i]` is `A[i][i]`; `off[i]` for `i < q-1` is the shared
/// sub/super-diagonal pair `A[i][i+1] = A[i+1][i]`; `off[q-1]` is the corner
/// pair `A[0][q-1] = A[q-1][0]`.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonalSystem {
    pub diag: Vec<BigReal>,
    pub off: Vec<BigReal>,
    pub rhs: Vec<BigReal>,
}

impl CyclicTridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Dense matrix view; only sensible for small `q` (tests, oracles).
    pub fn to_dense(&self, ctx: &PrecisionContext) -> Vec<Vec<BigReal>> {
        let q = self.len();
        let mut m = vec![vec![ctx.zero(); q]; q];
        for i in 0..q {
            m[i][i] = self.diag[i].clone();
        }
        match q {
            1 => {
                // both "neighbours" wrap onto the single diagonal entry
                let w = &self.off[0] + &self.off[0];
                m[0][0] = &m[0][0] + &w;
            }
            2 => {
                // super and wrap corner land on the same entries
                let w = &self.off[0] + &self.off[1];
                m[0][1] = w.clone();
                m[1][0] = w;
            }
            _ => {
                for i in 0..q - 1 {
                    m[i][i + 1] = self.off[i].clone();
                    m[i + 1][i] = self.off[i].clone();
                }
                m[0][q - 1] = self.off[q - 1].clone();
                m[q - 1][0] = self.off[q - 1].clone();
            }
        }
        m
    }
}

/// Thomas solve of the non-cyclic part. `diag` may carry modified corner
/// entries. Fails if a forward-elimination pivot underflows the threshold.
fn thomas(
    diag: &[BigReal],
    off: &[BigReal],
    rhs: &[BigReal],
    threshold: &BigReal,
) -> Result<Vec<BigReal>, NumericsError> {
    let n = diag.len();
    let mut c_prime = Vec::with_capacity(n - 1);
    let mut d_prime = Vec::with_capacity(n);

    let mut beta = diag[0].clone();
    if beta.abs() < *threshold {
        return Err(NumericsError::SingularSystem {
            row: 0,
            pivot_magnitude: beta.abs().to_f64(),
        });
    }
    d_prime.push(&rhs[0] / &beta);
    for j in 1..n {
        c_prime.push(&off[j - 1] / &beta);
        beta = &diag[j] - &(&off[j - 1] * c_prime.last().unwrap());
        if beta.abs() < *threshold {
            return Err(NumericsError::SingularSystem {
                row: j,
                pivot_magnitude: beta.abs().to_f64(),
            });
        }
        let num = &rhs[j] - &(&off[j - 1] * d_prime.last().unwrap());
        d_prime.push(num / &beta);
    }

    let mut x = d_prime;
    for j in (0..n - 1).rev() {
        let t = &c_prime[j] * &x[j + 1];
        x[j] = &x[j] - &t;
    }
    Ok(x)
}

/// Solve the cyclic system. O(q) time and memory.
///
/// Errors with [`NumericsError::SingularSystem`] when a pivot or the
/// Sherman-Morrison denominator falls below `10^(-digits+5)`; for orbit
/// Jacobians that signals a parabolic/bifurcating orbit and the caller is
/// expected to raise precision or reject.
pub fn solve_cyclic_tridiagonal(
    sys: &CyclicTridiagonalSystem,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>, NumericsError> {
    let q = sys.len();
    assert!(q >= 1, "empty system");
    let threshold = ctx.eps_at(5);

    if q == 1 {
        let a = &sys.diag[0] + &(&sys.off[0] + &sys.off[0]);
        if a.abs() < threshold {
            return Err(NumericsError::SingularSystem {
                row: 0,
                pivot_magnitude: a.abs().to_f64(),
            });
        }
        return Ok(vec![&sys.rhs[0] / &a]);
    }
    if q == 2 {
        // 2x2 dense: corners merge with the super/sub entries.
        let b = &sys.off[0] + &sys.off[1];
        let det = &(&sys.diag[0] * &sys.diag[1]) - &(&b * &b);
        let scale = sys.diag[0]
            .abs()
            .max(&sys.diag[1].abs())
            .max(&b.abs())
            .max(&ctx.one());
        if (det.abs() / &scale) < threshold {
            return Err(NumericsError::SingularSystem {
                row: 1,
                pivot_magnitude: det.abs().to_f64(),
            });
        }
        let x0 = &(&(&sys.diag[1] * &sys.rhs[0]) - &(&b * &sys.rhs[1])) / &det;
        let x1 = &(&(&sys.diag[0] * &sys.rhs[1]) - &(&b * &sys.rhs[0])) / &det;
        return Ok(vec![x0, x1]);
    }

    // A = A~ + u v^T with
    //   u = (gamma, 0, .., 0, off[q-1])^T, v = (1, 0, .., 0, off[q-1]/gamma)^T,
    //   A~ = A with A[0][0] -= gamma, A[q-1][q-1] -= off[q-1]^2/gamma.
    // gamma = -diag[0] doubles the first pivot; fall back to -1 when the
    // diagonal entry is too small to be a safe pivot itself.
    let half = ctx.from_f64(0.5);
    let gamma = if sys.diag[0].abs() >= half { -&sys.diag[0] } else { -ctx.one() };
    let corner = &sys.off[q - 1];
    let mut diag = sys.diag.clone();
    diag[0] = &diag[0] - &gamma;
    let corr = &(corner * corner) / &gamma;
    diag[q - 1] = &diag[q - 1] - &corr;

    let inner_off = &sys.off[..q - 1];
    let x1 = thomas(&diag, inner_off, &sys.rhs, &threshold)?;
    let mut u = vec![ctx.zero(); q];
    u[0] = gamma.clone();
    u[q - 1] = corner.clone();
    let x2 = thomas(&diag, inner_off, &u, &threshold)?;

    // v^T x = x[0] + (corner/gamma) x[q-1]
    let vr = corner / &gamma;
    let vx1 = &x1[0] + &(&vr * &x1[q - 1]);
    let vx2 = &x2[0] + &(&vr * &x2[q - 1]);
    let denom = &ctx.one() + &vx2;
    if denom.abs() < threshold {
        return Err(NumericsError::SingularSystem {
            row: 0,
            pivot_magnitude: denom.abs().to_f64(),
        });
    }
    let factor = vx1 / denom;
    Ok(x1
        .into_iter()
        .zip(x2)
        .map(|(a, b)| {
            let t = &b * &factor;
            a - t
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::solve_dense;
    use super::*;

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    #[test]
    fn identity_system_returns_rhs() {
        let c = ctx(30);
        let q = 7;
        let sys = CyclicTridiagonalSystem {
            diag: vec![c.one(); q],
            off: vec![c.zero(); q],
            rhs: (0..q).map(|i| c.from_i64(i as i64 + 1)).collect(),
        };
        let x = solve_cyclic_tridiagonal(&sys, &c).unwrap();
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - &sys.rhs[i]).abs() < c.eps_at(8));
        }
    }

    #[test]
    fn zero_row_sum_is_singular() {
        let c = ctx(30);
        let sys = CyclicTridiagonalSystem {
            diag: vec![c.from_i64(-2), c.from_i64(-2)],
            off: vec![c.one(), c.one()],
            rhs: vec![c.one(), c.one()],
        };
        assert!(matches!(
            solve_cyclic_tridiagonal(&sys, &c),
            Err(NumericsError::SingularSystem { .. })
        ));
    }

    #[test]
    fn q1_wraps_onto_diagonal() {
        let c = ctx(30);
        let sys = CyclicTridiagonalSystem {
            diag: vec![c.from_i64(-3)],
            off: vec![c.one()],
            rhs: vec![c.from_i64(5)],
        };
        // effective scalar is -3 + 2 = -1
        let x = solve_cyclic_tridiagonal(&sys, &c).unwrap();
        assert!((&x[0] + c.from_i64(5)).abs() < c.eps_at(8));
    }

    /// Deterministic xorshift so the oracle comparison is reproducible.
    fn pseudo(seed: &mut u64) -> f64 {
        *seed ^= *seed << 13;
        *seed ^= *seed >> 7;
        *seed ^= *seed << 17;
        (*seed % 10_000) as f64 / 10_000.0 - 0.5
    }

    #[test]
    fn matches_dense_oracle_q50_at_60_digits() {
        let c = ctx(60);
        let q = 50;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let sys = CyclicTridiagonalSystem {
            // diagonally dominant so both routes are well conditioned
            diag: (0..q).map(|_| c.from_f64(4.0 + pseudo(&mut seed))).collect(),
            off: (0..q).map(|_| c.from_f64(pseudo(&mut seed))).collect(),
            rhs: (0..q).map(|_| c.from_f64(pseudo(&mut seed) * 3.0)).collect(),
        };
        let fast = solve_cyclic_tridiagonal(&sys, &c).unwrap();
        let dense = solve_dense(&sys.to_dense(&c), &sys.rhs, &c).unwrap();
        let tol = c.eps_at(10);
        for (a, b) in fast.iter().zip(&dense) {
            assert!((a - b).abs() < tol, "mismatch: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn residual_bound_random_sizes() {
        let c = ctx(45);
        let mut seed = 0x2545f4914f6cdd1du64;
        for q in [3usize, 4, 9, 33, 200] {
            let sys = CyclicTridiagonalSystem {
                diag: (0..q).map(|_| c.from_f64(-2.2 + 0.3 * pseudo(&mut seed))).collect(),
                off: (0..q).map(|_| c.from_f64(1.0 + 0.01 * pseudo(&mut seed))).collect(),
                rhs: (0..q).map(|_| c.from_f64(pseudo(&mut seed))).collect(),
            };
            let x = solve_cyclic_tridiagonal(&sys, &c).unwrap();
            // componentwise residual ||Ax-b||_inf / ||b||_inf <= 1e(-digits+8)
            let dense = sys.to_dense(&c);
            let mut worst = c.zero();
            let mut bnorm = c.zero();
            for i in 0..q {
                let mut acc = c.zero();
                for j in 0..q {
                    acc += &(&dense[i][j] * &x[j]);
                }
                worst = worst.max(&(acc - &sys.rhs[i]).abs());
                bnorm = bnorm.max(&sys.rhs[i].abs());
            }
            assert!(&worst / &bnorm < c.eps_at(8), "q={q} residual too large");
        }
    }
}
