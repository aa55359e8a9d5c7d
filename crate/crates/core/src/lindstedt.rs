//! Lindstedt series of the conjugating function.
//!
//! The conjugacy `u(alpha, eps)` solving
//! `D^2_omega u = eps sin(alpha + u)` is expanded as a power series in
//! `eps` whose order-`k` term is a degree-`k` trigonometric polynomial.
//! Oddness of the nonlinearity makes every term a pure sine series with
//! only modes `nu = k (mod 2)`, so we carry real sine/cosine coefficient
//! vectors instead of complex exponentials.
//!
//! The recursion maintains the expansions of `sin(alpha + u)` and
//! `cos(alpha + u)` order by order through the derivative identities
//! `m A_m = sum_j j u_j * B_{m-j}`, `m B_m = -sum_j j u_j * A_{m-j}`;
//! each new order is divided mode-by-mode by the small divisors
//! `-4 sin^2(pi nu omega)`. Convolutions are direct (no FFT): slower but
//! with transparent error behaviour at high precision.

use thiserror::Error;

use crate::dynamics::PhasePoint;
use crate::numerics::{BigReal, PrecisionContext};
use crate::rotation::ContinuedFraction;

#[derive(Debug, Error)]
pub enum LindstedtError {
    #[error("small divisor underflow at mode {nu}: |sin(pi nu omega)| < 10^(-digits/2)")]
    SmallDivisorUnderflow { nu: usize },
    #[error("Lindstedt series requires an irrational rotation number")]
    RationalRotation,
}

/// Order-`k` term: `u^(k)(alpha) = sum_nu sine[nu] sin(nu alpha)`,
/// `1 <= nu <= k`, with only `nu = k (mod 2)` entries nonzero.
#[derive(Debug, Clone)]
pub struct FourierPolynomial {
    pub order: usize,
    /// Index is the mode number; entry 0 is structurally zero.
    pub sine: Vec<BigReal>,
}

impl FourierPolynomial {
    pub fn coefficient(&self, nu: usize) -> Option<&BigReal> {
        self.sine.get(nu)
    }

    /// Evaluate at `alpha` with the Chebyshev-style recurrence for
    /// `sin(nu alpha)`.
    pub fn evaluate(&self, alpha: &BigReal, ctx: &PrecisionContext) -> BigReal {
        let (s1, c1) = alpha.sin_cos();
        let two_c = &c1 + &c1;
        let mut sin_prev = ctx.zero(); // sin(0)
        let mut sin_cur = s1; // sin(alpha)
        let mut acc = ctx.zero();
        for nu in 1..self.sine.len() {
            if !self.sine[nu].is_zero() {
                acc += &(&self.sine[nu] * &sin_cur);
            }
            let next = &(&two_c * &sin_cur) - &sin_prev;
            sin_prev = std::mem::replace(&mut sin_cur, next);
        }
        acc
    }

    fn sup_on_grid(&self, grid: usize, ctx: &PrecisionContext) -> BigReal {
        let two_pi = ctx.two_pi();
        let mut sup = ctx.zero();
        for i in 0..grid {
            let alpha = &two_pi * &(ctx.from_i64(i as i64) / ctx.from_i64(grid as i64));
            sup = sup.max(&self.evaluate(&alpha, ctx).abs());
        }
        sup
    }
}

/// Truncated Lindstedt series: terms of order 1..=K.
#[derive(Debug, Clone)]
pub struct LindstedtSeries {
    pub omega: ContinuedFraction,
    pub terms: Vec<FourierPolynomial>,
    pub digits: u32,
}

// --- internal trig-polynomial arithmetic -----------------------------------

/// sine coeffs (index nu) x cosine coeffs (index mu) -> sine coeffs.
fn sin_times_cos(s: &[BigReal], c: &[BigReal], ctx: &PrecisionContext) -> Vec<BigReal> {
    let deg = (s.len() - 1) + (c.len() - 1);
    let mut out = vec![ctx.zero(); deg + 1];
    let half = ctx.from_f64(0.5);
    for (nu, sv) in s.iter().enumerate().skip(1) {
        if sv.is_zero() {
            continue;
        }
        for (mu, cv) in c.iter().enumerate() {
            if cv.is_zero() {
                continue;
            }
            let w = &(sv * cv) * &half;
            out[nu + mu] += &w;
            let d = nu as i64 - mu as i64;
            match d.cmp(&0) {
                std::cmp::Ordering::Greater => out[d as usize] += &w,
                std::cmp::Ordering::Less => out[(-d) as usize] -= &w,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    out
}

/// sine x sine -> cosine coeffs (index nu, entry 0 is the mean).
fn sin_times_sin(a: &[BigReal], b: &[BigReal], ctx: &PrecisionContext) -> Vec<BigReal> {
    let deg = (a.len() - 1) + (b.len() - 1);
    let mut out = vec![ctx.zero(); deg + 1];
    let half = ctx.from_f64(0.5);
    for (nu, av) in a.iter().enumerate().skip(1) {
        if av.is_zero() {
            continue;
        }
        for (mu, bv) in b.iter().enumerate().skip(1) {
            if bv.is_zero() {
                continue;
            }
            let w = &(av * bv) * &half;
            out[(nu as i64 - mu as i64).unsigned_abs() as usize] += &w;
            out[nu + mu] -= &w;
        }
    }
    out
}

fn add_scaled(acc: &mut Vec<BigReal>, term: &[BigReal], scale: &BigReal, ctx: &PrecisionContext) {
    if acc.len() < term.len() {
        acc.resize(term.len(), ctx.zero());
    }
    for (a, t) in acc.iter_mut().zip(term) {
        if !t.is_zero() {
            *a += &(t * scale);
        }
    }
}

/// Compute the series to order `big_k` at context precision.
pub fn coefficients(
    omega: &ContinuedFraction,
    big_k: usize,
    ctx: &PrecisionContext,
) -> Result<LindstedtSeries, LindstedtError> {
    assert!(big_k >= 1);
    if omega.is_rational() {
        return Err(LindstedtError::RationalRotation);
    }
    let w = omega.value(ctx);
    let pi_w = ctx.pi() * &w;

    // small divisors d_nu = -4 sin^2(pi nu omega), nu = 1..=big_k
    let mut divisors = Vec::with_capacity(big_k + 1);
    divisors.push(ctx.zero());
    let floor = ctx.eps_at((ctx.digits() / 2) as i32);
    for nu in 1..=big_k {
        let s = (&pi_w * &ctx.from_i64(nu as i64)).sin();
        if s.abs() < floor {
            return Err(LindstedtError::SmallDivisorUnderflow { nu });
        }
        let d = -(&(&s * &s) * &ctx.from_i64(4));
        divisors.push(d);
    }

    // A_m, B_m: order-m coefficients of sin(alpha + u), cos(alpha + u)
    let mut a_series: Vec<Vec<BigReal>> = Vec::with_capacity(big_k);
    let mut b_series: Vec<Vec<BigReal>> = Vec::with_capacity(big_k);
    a_series.push(vec![ctx.zero(), ctx.one()]); // sin(alpha)
    b_series.push(vec![ctx.zero(), ctx.one()]); // cos(alpha)
    let mut terms: Vec<FourierPolynomial> = Vec::with_capacity(big_k);

    for k in 1..=big_k {
        // u_k = A_{k-1} with each mode divided by d_nu
        let rhs = &a_series[k - 1];
        let mut sine = vec![ctx.zero(); k + 1];
        for nu in 1..rhs.len().min(k + 1) {
            if !rhs[nu].is_zero() {
                sine[nu] = &rhs[nu] / &divisors[nu];
            }
        }
        terms.push(FourierPolynomial { order: k, sine });

        if k == big_k {
            break;
        }
        // extend A, B to order k: m A_m = sum_j j u_j * B_{m-j}, etc.
        let m = k;
        let m_inv = ctx.from_i64(m as i64).recip();
        let mut a_next: Vec<BigReal> = vec![ctx.zero(); m + 2];
        let mut b_next: Vec<BigReal> = vec![ctx.zero(); m + 2];
        for j in 1..=m {
            let uj = &terms[j - 1].sine;
            let jf = ctx.from_i64(j as i64);
            let sa = sin_times_cos(uj, &b_series[m - j], ctx);
            add_scaled(&mut a_next, &sa, &(&jf * &m_inv), ctx);
            let sb = sin_times_sin(uj, &a_series[m - j], ctx);
            add_scaled(&mut b_next, &sb, &(-&(&jf * &m_inv)), ctx);
        }
        a_series.push(a_next);
        b_series.push(b_next);
    }

    Ok(LindstedtSeries { omega: omega.clone(), terms, digits: ctx.digits() })
}

impl LindstedtSeries {
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    /// Truncated sum `sum_{k<=K} eps^k u^(k)(alpha)` (Horner in `eps`).
    pub fn evaluate(&self, alpha: &BigReal, epsilon: &BigReal, ctx: &PrecisionContext) -> BigReal {
        let mut acc = ctx.zero();
        for term in self.terms.iter().rev() {
            acc = &(&acc * epsilon) + &term.evaluate(alpha, ctx);
        }
        acc * epsilon
    }

    /// Parametric point of the invariant curve:
    /// `x = alpha + u(alpha)`, `y = 2 pi omega + u(alpha) - u(alpha - 2 pi omega)`.
    pub fn curve(&self, alpha: &BigReal, epsilon: &BigReal, ctx: &PrecisionContext) -> PhasePoint {
        let two_pi_w = ctx.two_pi() * &self.omega.value(ctx);
        let u = self.evaluate(alpha, epsilon, ctx);
        let u_back = self.evaluate(&(alpha - &two_pi_w), epsilon, ctx);
        PhasePoint { x: alpha + &u, y: &(&two_pi_w + &u) - &u_back }
    }

    /// Power series in `eps` at fixed `alpha` (index k, entry 0 = 0);
    /// this is the input to the Pade analysis.
    pub fn coefficients_at(&self, alpha: &BigReal, ctx: &PrecisionContext) -> Vec<BigReal> {
        let mut out = Vec::with_capacity(self.terms.len() + 1);
        out.push(ctx.zero());
        for term in &self.terms {
            out.push(term.evaluate(alpha, ctx));
        }
        out
    }

    /// Coefficient dump: `k,nu,s_nu` rows at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,nu,s_nu\n");
        let digits = self.digits as usize;
        for term in &self.terms {
            for (nu, s) in term.sine.iter().enumerate().skip(1) {
                if !s.is_zero() {
                    out.push_str(&format!("{},{},{}\n", term.order, nu, s.to_significant(digits)));
                }
            }
        }
        out
    }
}

/// Root-test estimate of the radius of convergence with the spread between
/// two tail windows.
#[derive(Debug, Clone)]
pub struct RootTestRadius {
    pub estimate: BigReal,
    pub spread: BigReal,
    pub grid_points: usize,
}

/// `(limsup_k sup_alpha |u^(k)|^(1/k))^(-1)` proxied by a tail-windowed max
/// over the last third of the computed orders, sup over a fixed alpha grid.
pub fn radius_root_test(
    series: &LindstedtSeries,
    grid_points: usize,
    ctx: &PrecisionContext,
) -> RootTestRadius {
    let big_k = series.order();
    assert!(big_k >= 20, "root test needs at least 20 orders");
    let window = |len: usize| -> BigReal {
        let mut best = ctx.zero();
        for term in series.terms.iter().skip(big_k - len) {
            let sup = term.sup_on_grid(grid_points, ctx);
            if sup.is_zero() {
                continue;
            }
            let root = sup.pow(&ctx.from_i64(term.order as i64).recip());
            best = best.max(&root);
        }
        best.recip()
    };
    let wide = window(big_k / 3);
    let narrow = window(big_k / 6);
    let spread = (&wide - &narrow).abs();
    RootTestRadius { estimate: wide, spread, grid_points }
}

/// Independent route to the order-by-order functional equation residual:
/// recompose `sin(alpha + u)` through explicit Taylor powers of `u` (not
/// the derivative recurrence) and subtract `D^2 u` mode by mode.
///
/// Returns the largest coefficient magnitude of
/// `[D^2_omega u - eps sin(alpha + u)]_k` over `k <= K`.
pub fn functional_equation_residual(series: &LindstedtSeries, ctx: &PrecisionContext) -> BigReal {
    let big_k = series.order();
    let w = series.omega.value(ctx);
    let pi_w = ctx.pi() * &w;

    // powers[j][m] = coefficients of [u^j]_m as trig polys, j >= 1
    // u^j has parity: sine for odd j, cosine for even j.
    #[derive(Clone)]
    enum Poly {
        Sin(Vec<BigReal>),
        Cos(Vec<BigReal>),
    }
    let u: Vec<&FourierPolynomial> = series.terms.iter().collect();
    let mut powers: Vec<Vec<Poly>> = Vec::new();
    // u^1
    let mut first = Vec::new();
    for m in 1..=big_k {
        first.push(Poly::Sin(u[m - 1].sine.clone()));
    }
    powers.push(first);
    let mut j = 1usize;
    loop {
        j += 1;
        if j > big_k {
            break;
        }
        // u^j = u^(j-1) * u, truncated at total order big_k
        let prev = &powers[j - 2];
        let mut cur = Vec::new();
        for m in j..=big_k {
            let mut acc: Option<Poly> = None;
            for split in 1..=(m - (j - 1)) {
                let left = &u[split - 1].sine;
                let right = &prev[(m - split) - (j - 1)];
                let piece = match right {
                    Poly::Sin(r) => Poly::Cos(sin_times_sin(left, r, ctx)),
                    Poly::Cos(r) => Poly::Sin(sin_times_cos(left, r, ctx)),
                };
                acc = Some(match (acc, piece) {
                    (None, p) => p,
                    (Some(Poly::Sin(mut a)), Poly::Sin(b)) => {
                        add_scaled(&mut a, &b, &ctx.one(), ctx);
                        Poly::Sin(a)
                    }
                    (Some(Poly::Cos(mut a)), Poly::Cos(b)) => {
                        add_scaled(&mut a, &b, &ctx.one(), ctx);
                        Poly::Cos(a)
                    }
                    _ => unreachable!("parity is uniform within u^j"),
                });
            }
            cur.push(acc.unwrap());
        }
        powers.push(cur);
    }

    // sin(alpha + u) = sin a cos u + cos a sin u with
    // cos u = 1 - u^2/2! + ..., sin u = u - u^3/3! + ...
    let sin_alpha = vec![ctx.zero(), ctx.one()];
    let mut worst = ctx.zero();
    for k in 1..=big_k {
        // coefficient of eps^k in sin(alpha + u) is needed at order k-1
        let m = k - 1;
        let mut rhs: Vec<BigReal> = vec![ctx.zero(); 1];
        if m == 0 {
            rhs = sin_alpha.clone();
        } else {
            // j-th Taylor terms contributing at order m
            let mut factorial = ctx.one();
            for j in 1..=m {
                factorial *= &ctx.from_i64(j as i64);
                let sign = if (j / 2) % 2 == 0 { ctx.one() } else { -ctx.one() };
                let scale = &sign / &factorial;
                match &powers[j - 1][m - j] {
                    // even j: cos-u branch pairs with sin(alpha)
                    Poly::Cos(c) => {
                        let term = sin_times_cos(&sin_alpha, c, ctx);
                        add_scaled(&mut rhs, &term, &scale, ctx);
                    }
                    // odd j: sin-u branch pairs with cos(alpha)
                    Poly::Sin(s) => {
                        let cos_alpha = vec![ctx.zero(), ctx.one()];
                        let term = sin_times_cos(s, &cos_alpha, ctx);
                        add_scaled(&mut rhs, &term, &scale, ctx);
                    }
                }
            }
        }
        // D^2 u_k mode nu is -4 sin^2(pi nu omega) * s_nu
        let uk = &series.terms[k - 1].sine;
        let deg = uk.len().max(rhs.len());
        for nu in 1..deg {
            let lhs = if nu < uk.len() && !uk[nu].is_zero() {
                let s = (&pi_w * &ctx.from_i64(nu as i64)).sin();
                -(&(&(&s * &s) * &ctx.from_i64(4)) * &uk[nu])
            } else {
                ctx.zero()
            };
            let r = if nu < rhs.len() { rhs[nu].clone() } else { ctx.zero() };
            worst = worst.max(&(lhs - r).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{self, MapParams};

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    fn golden() -> ContinuedFraction {
        ContinuedFraction::parse("[(1)]").unwrap()
    }

    #[test]
    fn first_order_closed_form() {
        let c = ctx(40);
        for s in ["[(1)]", "[2,10,(1)]", "[(1,2)]", "[3,(2)]", "[7,(1)]", "[(3)]", "[5,2,(1)]"] {
            let omega = ContinuedFraction::parse(s).unwrap();
            let series = coefficients(&omega, 1, &c).unwrap();
            let w = omega.value(&c);
            let d = (c.pi() * &w).sin().square() * c.from_i64(4);
            let expect = -d.recip();
            let got = &series.terms[0].sine[1];
            assert!((got - &expect).abs() < c.eps_at(10), "{s}");
        }
    }

    #[test]
    fn second_order_has_only_mode_two() {
        let c = ctx(40);
        let series = coefficients(&golden(), 2, &c).unwrap();
        let u2 = &series.terms[1];
        assert!(u2.sine[1].is_zero());
        assert!(!u2.sine[2].is_zero());
    }

    #[test]
    fn parity_structure_holds() {
        let c = ctx(40);
        let series = coefficients(&golden(), 9, &c).unwrap();
        for term in &series.terms {
            for (nu, s) in term.sine.iter().enumerate().skip(1) {
                if nu % 2 != term.order % 2 {
                    assert!(s.is_zero(), "order {} mode {nu} should vanish", term.order);
                }
            }
        }
    }

    #[test]
    fn evaluate_trivial_points() {
        let c = ctx(40);
        let series = coefficients(&golden(), 8, &c).unwrap();
        assert!(series.evaluate(&c.from_f64(0.7), &c.zero(), &c).is_zero());
        let at_zero = series.evaluate(&c.zero(), &c.from_f64(0.3), &c);
        assert!(at_zero.abs() < c.eps_at(12));
        let at_pi = series.evaluate(&c.pi(), &c.from_f64(0.3), &c);
        assert!(at_pi.abs() < c.eps_at(10));
    }

    #[test]
    fn functional_equation_residual_vanishes_modewise() {
        let c = ctx(45);
        for s in ["[(1)]", "[2,5,(1)]"] {
            let omega = ContinuedFraction::parse(s).unwrap();
            let series = coefficients(&omega, 10, &c).unwrap();
            let worst = functional_equation_residual(&series, &c);
            assert!(worst < c.eps_at(18), "{s}: residual {worst:?}");
        }
    }

    #[test]
    fn numeric_residual_scales_as_next_order() {
        // D^2 u - eps sin(alpha+u) = O(eps^{K+1}): halving eps divides the
        // residual by ~2^{K+1}
        let c = ctx(50);
        let big_k = 6;
        let series = coefficients(&golden(), big_k, &c).unwrap();
        let w = golden().value(&c);
        let two_pi_w = c.two_pi() * &w;
        let residual = |eps: &BigReal| -> BigReal {
            let mut worst = c.zero();
            for i in 0..7 {
                let alpha = c.from_f64(0.37 + 0.801 * i as f64);
                let u_plus = series.evaluate(&(&alpha + &two_pi_w), eps, &c);
                let u_mid = series.evaluate(&alpha, eps, &c);
                let u_minus = series.evaluate(&(&alpha - &two_pi_w), eps, &c);
                let d2 = &(&u_plus - &(&u_mid + &u_mid)) + &u_minus;
                let rhs = (&alpha + &u_mid).sin() * eps;
                worst = worst.max(&(d2 - rhs).abs());
            }
            worst
        };
        let e1 = residual(&c.from_f64(0.04));
        let e2 = residual(&c.from_f64(0.02));
        let ratio = (&e1 / &e2).to_f64();
        let expect = 2f64.powi(big_k as i32 + 1);
        assert!(
            (ratio / expect - 1.0).abs() < 0.2,
            "ratio {ratio}, expected about {expect}"
        );
    }

    #[test]
    fn curve_at_zero_eps_is_unperturbed_circle() {
        let c = ctx(40);
        let series = coefficients(&golden(), 5, &c).unwrap();
        let alpha = c.from_f64(1.234);
        let pt = series.curve(&alpha, &c.zero(), &c);
        assert!((&pt.x - &alpha).abs().is_zero());
        let expect_y = c.two_pi() * golden().value(&c);
        assert!((&pt.y - &expect_y).abs() < c.eps_at(10));
    }

    #[test]
    fn curve_conjugates_the_dynamics() {
        // step(curve(alpha)) = curve(alpha + 2 pi omega) + O(eps^{K+1})
        let c = ctx(50);
        let big_k = 8;
        let series = coefficients(&golden(), big_k, &c).unwrap();
        let w = golden().value(&c);
        let two_pi_w = c.two_pi() * &w;
        let eps = c.from_f64(0.05);
        let params = MapParams::new(eps.clone());
        let mut worst = c.zero();
        for i in 0..5 {
            let alpha = c.from_f64(0.21 + 1.17 * i as f64);
            let here = series.curve(&alpha, &eps, &c);
            let stepped = dynamics::step(&here, &params);
            let there = series.curve(&(&alpha + &two_pi_w), &eps, &c);
            worst = worst.max(&(&stepped.x - &there.x).abs());
            worst = worst.max(&(&stepped.y - &there.y).abs());
        }
        // eps^{K+1} = 0.05^9 ~ 2e-12, allow a wide constant
        assert!(worst.to_f64() < 1e-9, "conjugacy residual {worst:?}");
    }

    #[test]
    fn y_average_is_rotation_number() {
        let c = ctx(40);
        let series = coefficients(&golden(), 8, &c).unwrap();
        let eps = c.from_f64(0.1);
        let n = 64;
        let mut acc = c.zero();
        for i in 0..n {
            let alpha = c.two_pi() * c.from_i64(i) / c.from_i64(n);
            acc += &series.curve(&alpha, &eps, &c).y;
        }
        let mean = acc / c.from_i64(n);
        let expect = c.two_pi() * golden().value(&c);
        // grid-quadrature of a trig polynomial of degree < n is exact
        assert!((mean - expect).abs() < c.eps_at(8));
    }

    #[test]
    fn root_test_on_synthetic_geometric_series() {
        let c = ctx(40);
        let r = c.from_f64(0.75);
        let terms: Vec<FourierPolynomial> = (1..=60)
            .map(|k| {
                let mut sine = vec![c.zero(); k + 1];
                sine[1] = r.pow_i(-(k as i32));
                FourierPolynomial { order: k, sine }
            })
            .collect();
        let series = LindstedtSeries { omega: golden(), terms, digits: 40 };
        let est = radius_root_test(&series, 64, &c);
        assert!((est.estimate.to_f64() / 0.75 - 1.0).abs() < 0.02, "{:?}", est.estimate);
    }

    #[test]
    fn golden_growth_is_bounded() {
        // |u_k|^{1/k} stays bounded for the golden mean (positive radius)
        let c = ctx(60);
        let series = coefficients(&golden(), 30, &c).unwrap();
        let est = radius_root_test(&series, 64, &c);
        let rho = est.estimate.to_f64();
        assert!(rho > 0.3 && rho < 3.0, "implausible radius {rho}");
    }

    #[test]
    fn rejects_rational_rotation() {
        let c = ctx(40);
        let half = ContinuedFraction::parse("[2]").unwrap();
        assert!(matches!(
            coefficients(&half, 4, &c),
            Err(LindstedtError::RationalRotation)
        ));
    }

    #[test]
    fn csv_dump_shape() {
        let c = ctx(40);
        let series = coefficients(&golden(), 3, &c).unwrap();
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,nu,s_nu");
        assert!(lines.next().unwrap().starts_with("1,1,"));
    }
}
