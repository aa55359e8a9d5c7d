//! Simultaneous polynomial root finding (Aberth-Ehrlich iteration).
//!
//! Works directly on `BigComplex` so Pade denominators of degree ~100 can
//! be resolved at hundreds of digits. Exact zero roots are deflated first;
//! the remaining roots are polished until the residual test
//! `|p(z)| <= 10^(-digits/2) * max|coeff|` holds.

use super::{BigComplex, BigReal, NumericsError, PrecisionContext};

/// Evaluate `p` and `p'` at `z` by a joint Horner pass.
fn eval_with_derivative(coeffs: &[BigComplex], z: &BigComplex) -> (BigComplex, BigComplex) {
    let n = coeffs.len();
    let mut p = coeffs[n - 1].clone();
    let mut dp = None::<BigComplex>;
    for k in (0..n - 1).rev() {
        dp = Some(match dp {
            None => p.clone(),
            Some(d) => &(&d * z) + &p,
        });
        p = &(&p * z) + &coeffs[k];
    }
    let zero = BigComplex(rug::Complex::with_val(coeffs[0].0.prec(), (0, 0)));
    (p, dp.unwrap_or(zero))
}

/// All complex roots of `sum_k coeffs[k] eps^k`, leading coefficient last.
///
/// Real input coefficients; roots come back unordered except that exact
/// zeros (from trailing zero coefficients) lead. Multiple roots are found
/// with the usual accuracy loss of clustered zeros; they still satisfy the
/// residual bound.
pub fn polynomial_roots(
    coeffs: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<Vec<BigComplex>, NumericsError> {
    assert!(coeffs.len() >= 2, "degree must be at least 1");
    assert!(
        !coeffs.last().unwrap().is_zero(),
        "leading coefficient must be nonzero"
    );
    let max_iter = 1000usize;

    // Deflate exact zero roots.
    let zero_roots = coeffs.iter().take_while(|c| c.is_zero()).count();
    let work: Vec<BigComplex> = coeffs[zero_roots..]
        .iter()
        .map(|c| ctx.complex(c.clone(), ctx.zero()))
        .collect();
    let mut out = vec![ctx.complex_zero(); zero_roots];
    let degree = work.len() - 1;
    if degree == 0 {
        return Ok(out);
    }

    let max_coeff = coeffs
        .iter()
        .fold(ctx.zero(), |m, c| m.max(&c.abs()));
    let tol = {
        let half = ctx.eps_at((ctx.digits() / 2) as i32);
        half * &max_coeff
    };

    // Initial guesses on a circle of the Cauchy-bound radius, irrationally
    // rotated so no guess starts on a symmetry axis.
    let lead = work[degree].abs();
    let mut radius = ctx.zero();
    for c in &work[..degree] {
        radius = radius.max(&(c.abs() / &lead));
    }
    let radius = &ctx.one() + &radius;
    let two_pi = ctx.two_pi();
    let mut z: Vec<BigComplex> = (0..degree)
        .map(|i| {
            let angle = &(&two_pi * &ctx.from_f64(i as f64 + 0.3718)) / &ctx.from_i64(degree as i64);
            let (s, c) = angle.sin_cos();
            ctx.complex(&radius * &c, &radius * &s)
        })
        .collect();

    let stop_step = ctx.eps_at(12);
    for iteration in 0..max_iter {
        let mut done = true;
        let mut worst = ctx.zero();
        for i in 0..degree {
            let (p, dp) = eval_with_derivative(&work, &z[i]);
            worst = worst.max(&p.abs());
            if p.abs() < tol {
                continue;
            }
            done = false;
            let newton = if dp.abs().is_zero() {
                // nudge off a stationary point
                ctx.complex(ctx.eps_at(2), ctx.eps_at(2))
            } else {
                &p / &dp
            };
            let mut repulsion = ctx.complex_zero();
            for j in 0..degree {
                if j != i {
                    let diff = &z[i] - &z[j];
                    if !diff.abs().is_zero() {
                        repulsion = &repulsion + &(&ctx.complex(ctx.one(), ctx.zero()) / &diff);
                    }
                }
            }
            let denom = &ctx.complex(ctx.one(), ctx.zero()) - &(&newton * &repulsion);
            let step = if denom.abs().is_zero() { newton } else { &newton / &denom };
            z[i] = &z[i] - &step;
            if step.abs() > stop_step {
                done = false;
            }
        }
        if done {
            break;
        }
        if iteration == max_iter - 1 {
            return Err(NumericsError::NoConvergence {
                iterations: max_iter,
                best: z.iter().map(|r| r.abs()).collect(),
            });
        }
    }

    // Newton polish (quadratic convergence squeezes simple roots to the
    // last ulps), then the residual contract check.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(&work, zi);
            if p.abs().is_zero() || dp.abs().is_zero() {
                break;
            }
            *zi = &*zi - &(&p / &dp);
        }
        let (p, _) = eval_with_derivative(&work, zi);
        if !(p.abs() < tol) {
            return Err(NumericsError::NoConvergence {
                iterations: max_iter,
                best: vec![p.abs()],
            });
        }
    }

    out.extend(z);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    fn sorted_reals(roots: &[BigComplex]) -> Vec<f64> {
        let mut v: Vec<f64> = roots.iter().map(|r| r.re().to_f64()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn quadratic_eps2_minus_1() {
        let c = ctx(40);
        let coeffs = vec![c.from_i64(-1), c.zero(), c.one()];
        let roots = polynomial_roots(&coeffs, &c).unwrap();
        assert_eq!(roots.len(), 2);
        let re = sorted_reals(&roots);
        assert!((re[0] + 1.0).abs() < 1e-30);
        assert!((re[1] - 1.0).abs() < 1e-30);
        for r in &roots {
            assert!(r.im().abs() < c.eps_at(8), "im = {:?}", r.im());
        }
    }

    #[test]
    fn triple_root_at_zero() {
        let c = ctx(40);
        let coeffs = vec![c.zero(), c.zero(), c.zero(), c.one()];
        let roots = polynomial_roots(&coeffs, &c).unwrap();
        assert_eq!(roots.len(), 3);
        // exact deflation: all three are exactly zero
        for r in &roots {
            assert!(r.abs().is_zero());
        }
    }

    #[test]
    fn wilkinson_5() {
        let c = ctx(60);
        // expand prod_{j=1..5} (x - j) by integer convolution
        let mut coeffs = vec![c.one()];
        for j in 1..=5i64 {
            let mut next = vec![c.zero(); coeffs.len() + 1];
            for (k, ck) in coeffs.iter().enumerate() {
                next[k + 1] = &next[k + 1] + ck;
                next[k] = &next[k] - &(ck * &c.from_i64(j));
            }
            coeffs = next;
        }
        let roots = polynomial_roots(&coeffs, &c).unwrap();
        let re = sorted_reals(&roots);
        let tol = 10f64.powi(-(60 - 10));
        for (i, r) in re.iter().enumerate() {
            assert!((r - (i as f64 + 1.0)).abs() < tol.max(1e-45), "root {r}");
        }
    }

    #[test]
    fn vieta_round_trip() {
        let c = ctx(50);
        // p(x) with random-ish real coefficients; re-expand from roots
        let coeffs: Vec<BigReal> = [3.5, -1.25, 0.75, 2.0, -4.0, 1.0]
            .iter()
            .map(|&v| c.from_f64(v))
            .collect();
        let roots = polynomial_roots(&coeffs, &c).unwrap();
        // rebuild the monic polynomial (ascending powers) from the roots,
        // then scale by the leading coefficient
        let one = ctx(50).complex(c.one(), c.zero());
        let mut rebuilt = vec![one];
        for r in &roots {
            let mut next = vec![c.complex_zero(); rebuilt.len() + 1];
            for (k, ck) in rebuilt.iter().enumerate() {
                next[k + 1] = &next[k + 1] + ck;
                let t = ck * r;
                next[k] = &next[k] - &t;
            }
            rebuilt = next;
        }
        let lead = coeffs.last().unwrap();
        let tol = c.eps_at((c.digits() / 2) as i32) * c.from_i64(100);
        for (a, b) in coeffs.iter().zip(&rebuilt) {
            let scaled = &b.re() * lead;
            assert!((a - &scaled).abs() < tol, "{a:?} vs {scaled:?}");
            assert!(b.im().abs() < tol);
        }
    }
}
