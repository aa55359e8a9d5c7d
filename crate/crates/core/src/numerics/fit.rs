//! Least squares: ordinary linear fit and Levenberg-Marquardt.

use super::{solve_dense, BigReal, NumericsError, PrecisionContext};

#[derive(Debug, Clone)]
pub struct LinearFit {
    pub slope: BigReal,
    pub intercept: BigReal,
    /// Mean of squared residuals.
    pub mean_square_distance: BigReal,
}

/// Ordinary least squares line through `(xs, ys)`.
pub fn linear_fit(xs: &[BigReal], ys: &[BigReal]) -> Result<LinearFit, NumericsError> {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two points");
    let prec = xs[0].0.prec();
    let ctx = PrecisionContext::new(((prec as u64) * 30103 / 100000) as u32)
        .unwrap_or_else(|_| PrecisionContext::new(PrecisionContext::MIN_DIGITS).unwrap());
    let n = ctx.from_i64(xs.len() as i64);
    let mut sx = ctx.zero();
    let mut sy = ctx.zero();
    for (x, y) in xs.iter().zip(ys) {
        sx += x;
        sy += y;
    }
    let mx = &sx / &n;
    let my = &sy / &n;
    let mut sxx = ctx.zero();
    let mut sxy = ctx.zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - &mx;
        sxx += &(&dx * &dx);
        sxy += &(&dx * &(y - &my));
    }
    if sxx.abs() < ctx.eps_at(8) {
        return Err(NumericsError::DegenerateAbscissae);
    }
    let slope = &sxy / &sxx;
    let intercept = &my - &(&slope * &mx);
    let mut ssr = ctx.zero();
    for (x, y) in xs.iter().zip(ys) {
        let r = y - &(&(&slope * x) + &intercept);
        ssr += &(&r * &r);
    }
    Ok(LinearFit {
        slope,
        intercept,
        mean_square_distance: ssr / n,
    })
}

#[derive(Debug, Clone)]
pub struct LmFit {
    pub params: Vec<BigReal>,
    /// Mean of squared residuals at the returned parameters.
    pub mean_square_distance: BigReal,
    pub iterations: usize,
}

fn sum_of_squares(r: &[BigReal], ctx: &PrecisionContext) -> BigReal {
    let mut s = ctx.zero();
    for v in r {
        s += &(v * v);
    }
    s
}

/// Central-difference Jacobian of the residual vector.
fn jacobian<F>(
    residuals: &F,
    params: &[BigReal],
    ctx: &PrecisionContext,
    step_scale: &BigReal,
) -> Vec<Vec<BigReal>>
where
    F: Fn(&[BigReal]) -> Vec<BigReal>,
{
    let m = residuals(params).len();
    let n = params.len();
    let mut jac = vec![vec![ctx.zero(); n]; m];
    for j in 0..n {
        let h = &params[j].abs().max(&ctx.one()) * step_scale;
        let mut plus = params.to_vec();
        plus[j] = &plus[j] + &h;
        let mut minus = params.to_vec();
        minus[j] = &minus[j] - &h;
        let rp = residuals(&plus);
        let rm = residuals(&minus);
        let two_h = &h + &h;
        for i in 0..m {
            jac[i][j] = &(&rp[i] - &rm[i]) / &two_h;
        }
    }
    jac
}

/// Levenberg-Marquardt minimisation of `sum residuals(p)^2`.
///
/// Standard Marquardt damping: lambda starts at 1e-3, x10 on a rejected
/// step, /10 on an accepted one. Terminates on relative decrease or step
/// norm below 1e-12; gives up after 500 iterations, reporting the best
/// parameters seen in the error payload.
pub fn levenberg_marquardt<F>(
    residuals: F,
    init: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<LmFit, NumericsError>
where
    F: Fn(&[BigReal]) -> Vec<BigReal>,
{
    let max_iter = 500usize;
    let n = init.len();
    let mut params: Vec<BigReal> = init.to_vec();
    let mut r = residuals(&params);
    let m = r.len();
    assert!(m >= n, "need at least as many residuals as parameters");
    let mut ssq = sum_of_squares(&r, ctx);

    let mut lambda = ctx.from_f64(1e-3);
    let ten = ctx.from_i64(10);
    let ftol = ctx.from_f64(1e-12);
    let xtol = ctx.from_f64(1e-12);
    // FD step ~ 10^(-digits/3): keeps truncation and roundoff balanced.
    let step_scale = ctx.eps_at((2 * ctx.digits() / 3) as i32);

    for iteration in 0..max_iter {
        let jac = jacobian(&residuals, &params, ctx, &step_scale);
        // normal equations: (J^T J + lambda diag(J^T J)) delta = -J^T r
        let mut jtj = vec![vec![ctx.zero(); n]; n];
        let mut jtr = vec![ctx.zero(); n];
        for i in 0..m {
            for a in 0..n {
                for b in a..n {
                    jtj[a][b] = &jtj[a][b] + &(&jac[i][a] * &jac[i][b]);
                }
                jtr[a] = &jtr[a] + &(&jac[i][a] * &r[i]);
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a][b] = jtj[b][a].clone();
            }
        }

        let mut accepted = false;
        for _ in 0..16 {
            let mut lhs = jtj.clone();
            for a in 0..n {
                let damp = &lhs[a][a] * &lambda;
                // keep strictly positive damping even for flat directions
                lhs[a][a] = &(&lhs[a][a] + &damp) + &(&lambda * &ctx.eps_at(6));
            }
            let rhs: Vec<BigReal> = jtr.iter().map(|v| -v).collect();
            let delta = match solve_dense(&lhs, &rhs, ctx) {
                Ok(d) => d,
                Err(_) => {
                    lambda = &lambda * &ten;
                    continue;
                }
            };
            let trial: Vec<BigReal> = params
                .iter()
                .zip(&delta)
                .map(|(p, d)| p + d)
                .collect();
            let trial_r = residuals(&trial);
            let trial_ssq = sum_of_squares(&trial_r, ctx);
            if trial_ssq <= ssq {
                let decrease = &(&ssq - &trial_ssq) / &ssq.max(&ctx.eps_at(0));
                let step_norm = delta
                    .iter()
                    .fold(ctx.zero(), |acc, d| acc.max(&d.abs()));
                params = trial;
                r = trial_r;
                ssq = trial_ssq;
                lambda = &lambda / &ten;
                accepted = true;
                if decrease < ftol || step_norm < xtol {
                    let msd = ssq / ctx.from_i64(m as i64);
                    return Ok(LmFit {
                        params,
                        mean_square_distance: msd,
                        iterations: iteration + 1,
                    });
                }
                break;
            }
            lambda = &lambda * &ten;
        }
        if !accepted {
            // damping saturated: current point is the (local) answer
            let msd = ssq / ctx.from_i64(m as i64);
            return Ok(LmFit {
                params,
                mean_square_distance: msd,
                iterations: iteration + 1,
            });
        }
    }
    Err(NumericsError::NoConvergence {
        iterations: max_iter,
        best: params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn exact_line() {
        let c = ctx();
        let xs: Vec<BigReal> = (0..6).map(|i| c.from_i64(i)).collect();
        let ys: Vec<BigReal> = (0..6).map(|i| c.from_i64(2 * i + 1)).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((&fit.slope - c.from_i64(2)).abs() < c.eps_at(10));
        assert!((&fit.intercept - c.one()).abs() < c.eps_at(10));
        assert!(fit.mean_square_distance < c.eps_at(10));
    }

    #[test]
    fn degenerate_abscissae() {
        let c = ctx();
        let xs = vec![c.one(), c.one(), c.one()];
        let ys = vec![c.one(), c.from_i64(2), c.from_i64(3)];
        assert!(matches!(
            linear_fit(&xs, &ys),
            Err(NumericsError::DegenerateAbscissae)
        ));
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let c = ctx();
        let xs: Vec<BigReal> = [0.1, 0.7, 1.3, 2.9, 4.2]
            .iter()
            .map(|&v| c.from_f64(v))
            .collect();
        let ys: Vec<BigReal> = [1.0, -0.3, 2.2, 0.9, 3.4]
            .iter()
            .map(|&v| c.from_f64(v))
            .collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        let mut dot1 = c.zero();
        let mut dotx = c.zero();
        for (x, y) in xs.iter().zip(&ys) {
            let r = y - &(&(&fit.slope * x) + &fit.intercept);
            dot1 += &r;
            dotx += &(&r * x);
        }
        assert!(dot1.abs() < c.eps_at(10));
        assert!(dotx.abs() < c.eps_at(10));
    }

    #[test]
    fn lm_recovers_exact_proportionality() {
        let c = ctx();
        let xs: Vec<BigReal> = (1..8).map(|i| c.from_i64(i)).collect();
        let ys: Vec<BigReal> = xs.iter().map(|x| x * &c.from_f64(3.25)).collect();
        let model = |p: &[BigReal]| -> Vec<BigReal> {
            xs.iter().zip(&ys).map(|(x, y)| &(x * &p[0]) - y).collect()
        };
        let fit = levenberg_marquardt(model, &[c.one()], &c).unwrap();
        assert!((&fit.params[0] - c.from_f64(3.25)).abs() < c.from_f64(1e-10));
    }

    #[test]
    fn lm_never_worse_than_init() {
        let c = ctx();
        let xs: Vec<BigReal> = (0..9).map(|i| c.from_f64(0.5 * i as f64)).collect();
        let data: Vec<BigReal> = xs
            .iter()
            .map(|x| (x * &c.from_f64(-0.9)).exp() * &c.from_f64(2.0))
            .collect();
        let model = |p: &[BigReal]| -> Vec<BigReal> {
            xs.iter()
                .zip(&data)
                .map(|(x, y)| &(&(x * &p[1]).exp() * &p[0]) - y)
                .collect()
        };
        let init = vec![c.from_f64(1.0), c.from_f64(-0.2)];
        let init_ssq = sum_of_squares(&model(&init), &c);
        let fit = levenberg_marquardt(model, &init, &c).unwrap();
        let final_ssq = &fit.mean_square_distance * &c.from_i64(xs.len() as i64);
        assert!(final_ssq <= init_ssq);
        assert!((&fit.params[0] - c.from_i64(2)).abs() < c.from_f64(1e-8));
        assert!((&fit.params[1] + c.from_f64(0.9)).abs() < c.from_f64(1e-8));
    }

    #[test]
    fn forward_generate_then_invert() {
        // synthetic y = c0 + c1*B + c2*exp(-a*B), zero noise
        let c = ctx();
        let truth = [
            c.from_f64(-2.3),
            c.from_f64(1.01),
            c.from_f64(1.6),
            c.from_f64(0.33),
        ];
        let bs: Vec<BigReal> = (0..12).map(|i| c.from_f64(3.0 + 0.7 * i as f64)).collect();
        let ys: Vec<BigReal> = bs
            .iter()
            .map(|b| {
                &(&truth[0] + &(&truth[1] * b)) + &(&truth[2] * &(-(b * &truth[3])).exp())
            })
            .collect();
        let model = |p: &[BigReal]| -> Vec<BigReal> {
            bs.iter()
                .zip(&ys)
                .map(|(b, y)| {
                    &(&(&p[0] + &(&p[1] * b)) + &(&p[2] * &(-(b * &p[3])).exp())) - y
                })
                .collect()
        };
        let init = vec![
            c.from_f64(-2.0),
            c.from_f64(1.0),
            c.from_f64(1.0),
            c.from_f64(0.4),
        ];
        let fit = levenberg_marquardt(model, &init, &c).unwrap();
        for (got, want) in fit.params.iter().zip(&truth) {
            assert!((got - want).abs() < c.from_f64(1e-8), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn central_difference_richardson_consistency() {
        let c = ctx();
        // f(p) = p^3 at p=1.2: central difference error ~ h^2, so halving h
        // divides the error by ~4.
        let f = |p: &[BigReal]| -> Vec<BigReal> { vec![p[0].pow_i(3)] };
        let p = vec![c.from_f64(1.2)];
        let exact = c.from_f64(1.2 * 1.2 * 3.0);
        let h1 = c.from_f64(1e-4);
        let h2 = c.from_f64(5e-5);
        let d = |h: &BigReal| {
            let jac = jacobian(&f, &p, &c, &(h / &p[0].abs().max(&c.one())));
            jac[0][0].clone()
        };
        let e1 = (d(&h1) - &exact).abs();
        let e2 = (d(&h2) - &exact).abs();
        let ratio = (&e1 / &e2).to_f64();
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }
}
