//! Pade approximants of the Lindstedt series in `eps` at fixed `alpha`,
//! pole extraction for the radius of convergence `rho_P`, and the
//! heuristic near-resonance radius `rho_1`.
//!
//! The denominator comes from the classical Toeplitz linear system; poles
//! are the denominator roots, filtered for Froissart doublets (a spurious
//! pole paired with a nearby numerator zero). `rho_P` is the smallest
//! surviving pole modulus; the direction of that pole is reported, and an
//! optional direction filter restricts which poles count.

use thiserror::Error;

use crate::lindstedt::{self, LindstedtError, LindstedtSeries, RootTestRadius};
use crate::numerics::{
    polynomial_roots, solve_dense, BigComplex, BigReal, NumericsError, PrecisionContext,
};
use crate::rotation::{ContinuedFraction, RotationError};

#[derive(Debug, Error)]
pub enum PadeError {
    #[error("need at least L+M+1 = {needed} series coefficients, got {got}")]
    InsufficientCoefficients { needed: usize, got: usize },
    #[error("Toeplitz denominator system is near-singular; reduce M or raise precision")]
    DegenerateSystem,
    #[error("order-of-contact check failed at order {order}")]
    ContactLost { order: usize },
    #[error("all {count} poles were filtered as spurious; raise order or precision")]
    AllPolesSpurious { count: usize },
    #[error("rotation number is not near a supported resonance (0/1, 1/2, 1/3)")]
    UnsupportedResonance { omega: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lindstedt(#[from] LindstedtError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
}

/// Rational approximant `num/den` of a power series, `den(0) = 1`.
#[derive(Debug, Clone)]
pub struct PadeApproximant {
    pub l: usize,
    pub m: usize,
    /// Ascending powers of eps.
    pub num: Vec<BigReal>,
    pub den: Vec<BigReal>,
    /// Evaluation angle of the input series.
    pub alpha0: BigReal,
}

/// Construct the `[L/M]` approximant of `sum_k coeffs[k] eps^k`.
///
/// Solves the Toeplitz system for the denominator, builds the numerator by
/// convolution and verifies the order-of-contact postcondition.
pub fn pade(
    coeffs: &[BigReal],
    l: usize,
    m: usize,
    alpha0: &BigReal,
    ctx: &PrecisionContext,
) -> Result<PadeApproximant, PadeError> {
    let needed = l + m + 1;
    if coeffs.len() < needed {
        return Err(PadeError::InsufficientCoefficients { needed, got: coeffs.len() });
    }
    let c = |i: i64| -> BigReal {
        if i < 0 {
            ctx.zero()
        } else {
            coeffs[i as usize].clone()
        }
    };

    // sum_{j=1..M} b_j c_{k-j} = -c_k for k = L+1 .. L+M
    let mut den = vec![ctx.one()];
    if m > 0 {
        let mut a = vec![vec![ctx.zero(); m]; m];
        let mut rhs = vec![ctx.zero(); m];
        for row in 0..m {
            let k = (l + 1 + row) as i64;
            for col in 0..m {
                a[row][col] = c(k - (col as i64 + 1));
            }
            rhs[row] = -c(k);
        }
        let b = solve_dense(&a, &rhs, ctx).map_err(|e| match e {
            NumericsError::SingularSystem { .. } => PadeError::DegenerateSystem,
            other => PadeError::Numerics(other),
        })?;
        den.extend(b);
    }

    // numerator a_k = sum_{j=0..min(k,M)} b_j c_{k-j}, k = 0..L
    let mut num = Vec::with_capacity(l + 1);
    for k in 0..=l as i64 {
        let mut acc = ctx.zero();
        for j in 0..=(k.min(m as i64)) {
            acc += &(&den[j as usize] * &c(k - j));
        }
        num.push(acc);
    }

    let approx = PadeApproximant { l, m, num, den, alpha0: alpha0.clone() };
    verify_contact(&approx, coeffs, ctx)?;
    Ok(approx)
}

/// Taylor re-expansion of `num/den` must match the input through order
/// `L+M` within `10^(-digits/2)` relative to the coefficient scale.
fn verify_contact(
    approx: &PadeApproximant,
    coeffs: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<(), PadeError> {
    let total = approx.l + approx.m;
    let expanded = approx.taylor(total, ctx);
    let scale = coeffs[..=total]
        .iter()
        .fold(ctx.one(), |acc, v| acc.max(&v.abs()));
    let tol = ctx.eps_at((ctx.digits() / 2) as i32) * scale;
    for (k, (a, b)) in expanded.iter().zip(coeffs).enumerate() {
        if (a - b).abs() > tol {
            return Err(PadeError::ContactLost { order: k });
        }
    }
    Ok(())
}

impl PadeApproximant {
    /// Taylor coefficients of `num/den` through the given order
    /// (series division).
    pub fn taylor(&self, order: usize, ctx: &PrecisionContext) -> Vec<BigReal> {
        let mut out = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = if k < self.num.len() { self.num[k].clone() } else { ctx.zero() };
            for j in 1..=k.min(self.den.len() - 1) {
                let t = &self.den[j] * &out[k - j];
                acc -= &t;
            }
            out.push(acc); // den[0] = 1
        }
        out
    }

    pub fn eval_poly(poly: &[BigReal], z: &BigComplex, ctx: &PrecisionContext) -> BigComplex {
        let mut acc = ctx.complex_zero();
        for c in poly.iter().rev() {
            acc = &(&acc * z) + &ctx.complex(c.clone(), ctx.zero());
        }
        acc
    }
}

/// A denominator root with its Froissart diagnostics.
#[derive(Debug, Clone)]
pub struct Pole {
    pub location: BigComplex,
    pub modulus: BigReal,
    /// Distance to the nearest numerator zero.
    pub nearest_zero: Option<BigReal>,
    pub froissart: bool,
    /// |num(z) / den'(z)| at the pole.
    pub residue_magnitude: BigReal,
}

/// All poles of the approximant, each annotated with the distance to the
/// nearest numerator zero; a pole closer than `10^(-digits/4)` to a zero
/// is flagged as a Froissart doublet.
pub fn poles(approx: &PadeApproximant, ctx: &PrecisionContext) -> Result<Vec<Pole>, PadeError> {
    if approx.m == 0 {
        return Ok(vec![]);
    }
    let den_roots = polynomial_roots(&approx.den, ctx)?;
    let num_roots = if approx.num.iter().any(|c| !c.is_zero()) && approx.num.len() >= 2 {
        // strip trailing zero coefficients so the leading one is nonzero
        let mut trimmed = approx.num.clone();
        while trimmed.len() >= 2 && trimmed.last().unwrap().is_zero() {
            trimmed.pop();
        }
        if trimmed.len() >= 2 {
            polynomial_roots(&trimmed, ctx)?
        } else {
            vec![]
        }
    } else {
        vec![]
    };

    // Froissart threshold 10^(-digits/8): with exact high-precision input
    // coefficients the doublet separations land around 10^(-digits/6),
    // while genuine pole-zero gaps stay many orders larger
    let threshold = ctx.eps_at((7 * ctx.digits() / 8) as i32);
    // den'(z)
    let dden: Vec<BigReal> = approx
        .den
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| c * &ctx.from_i64(j as i64))
        .collect();

    let mut out = Vec::with_capacity(den_roots.len());
    for root in den_roots {
        let nearest_zero = num_roots
            .iter()
            .map(|z| (&root - z).abs())
            .min_by(|a, b| a.cmp_total(b));
        let froissart = nearest_zero.as_ref().is_some_and(|d| *d < threshold);
        let numerator = PadeApproximant::eval_poly(&approx.num, &root, ctx);
        let derivative = PadeApproximant::eval_poly(&dden, &root, ctx);
        let residue_magnitude = if derivative.abs().is_zero() {
            BigReal::infinity(ctx)
        } else {
            (&numerator / &derivative).abs()
        };
        out.push(Pole {
            modulus: root.abs(),
            location: root,
            nearest_zero,
            froissart,
            residue_magnitude,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusMethod {
    PadePoles,
    HeuristicRho1,
    RootTest,
}

#[derive(Debug, Clone)]
pub enum RadiusDetails {
    Poles {
        kept: Vec<Pole>,
        discarded: usize,
        /// Argument (radians) of the minimal-modulus pole.
        direction: BigReal,
    },
    Formula {
        resonance: (u64, u64),
        eta: BigReal,
        lambda_c: BigReal,
    },
    RootTest {
        spread: BigReal,
    },
}

/// Radius-of-convergence estimate with provenance.
#[derive(Debug, Clone)]
pub struct RadiusEstimate {
    pub rho: BigReal,
    pub method: RadiusMethod,
    pub details: RadiusDetails,
}

/// Restrict which poles count toward the radius: keep only poles whose
/// argument lies within `tolerance` of `angle` (both radians), modulo
/// conjugation symmetry.
#[derive(Debug, Clone, Copy)]
pub struct DirectionFilter {
    pub angle: f64,
    pub tolerance: f64,
}

/// `rho_P`: minimum modulus over Froissart-surviving poles of the `[N/N]`
/// approximant of the series at angle `alpha0`.
pub fn rho_pade(
    omega: &ContinuedFraction,
    alpha0: &BigReal,
    order: usize,
    ctx: &PrecisionContext,
    direction: Option<DirectionFilter>,
) -> Result<RadiusEstimate, PadeError> {
    let series = lindstedt::coefficients(omega, 2 * order, ctx)?;
    rho_pade_from_series(&series, alpha0, order, ctx, direction)
}

/// Same as [`rho_pade`] but reusing an already computed series.
pub fn rho_pade_from_series(
    series: &LindstedtSeries,
    alpha0: &BigReal,
    order: usize,
    ctx: &PrecisionContext,
    direction: Option<DirectionFilter>,
) -> Result<RadiusEstimate, PadeError> {
    let coeffs = series.coefficients_at(alpha0, ctx);
    let approx = pade(&coeffs, order, order, alpha0, ctx)?;
    let all = poles(&approx, ctx)?;
    let total = all.len();
    let mut kept: Vec<Pole> = all
        .into_iter()
        .filter(|p| !p.froissart && p.modulus > ctx.eps_at((ctx.digits() / 2) as i32))
        .filter(|p| match direction {
            None => true,
            Some(f) => {
                let arg = p.location.arg().to_f64().abs();
                (arg - f.angle.abs()).abs() <= f.tolerance
            }
        })
        .collect();
    if kept.is_empty() {
        return Err(PadeError::AllPolesSpurious { count: total });
    }
    kept.sort_by(|a, b| a.modulus.cmp_total(&b.modulus));
    let rho = kept[0].modulus.clone();
    let direction_out = kept[0].location.arg();
    Ok(RadiusEstimate {
        rho,
        method: RadiusMethod::PadePoles,
        details: RadiusDetails::Poles { kept, discarded: total, direction: direction_out },
    })
}

/// Stability cross-check: `rho_P` at orders `[n/n]` and `[n+10/n+10]`.
///
/// Returns both estimates and their relative difference; a spread above
/// 1% marks the estimate unstable (callers should warn, not silently
/// accept).
pub fn rho_pade_stability(
    omega: &ContinuedFraction,
    alpha0: &BigReal,
    order: usize,
    ctx: &PrecisionContext,
) -> Result<(RadiusEstimate, RadiusEstimate, f64), PadeError> {
    let series = lindstedt::coefficients(omega, 2 * (order + 10), ctx)?;
    let base = rho_pade_from_series(&series, alpha0, order, ctx, None)?;
    let deeper = rho_pade_from_series(&series, alpha0, order + 10, ctx, None)?;
    let rel = ((base.rho.to_f64() / deeper.rho.to_f64()) - 1.0).abs();
    Ok((base, deeper, rel))
}

/// Root-test variant packaged as a [`RadiusEstimate`].
pub fn rho_root_test(series: &LindstedtSeries, grid: usize, ctx: &PrecisionContext) -> RadiusEstimate {
    let RootTestRadius { estimate, spread, .. } = lindstedt::radius_root_test(series, grid, ctx);
    RadiusEstimate {
        rho: estimate,
        method: RadiusMethod::RootTest,
        details: RadiusDetails::RootTest { spread },
    }
}

/// `lambda_c = 4 pi^2 x 0.827524`, the critical coupling constant of the
/// heuristic radius formula.
pub fn lambda_c(ctx: &PrecisionContext) -> BigReal {
    let pi2 = ctx.pi().square();
    &(&pi2 * &ctx.from_i64(4)) * &ctx.parse("0.827524").unwrap()
}

/// Resonance `p/q` the rotation number approaches, read off the continued
/// fraction head: the convergent just before the largest head quotient.
pub fn nearest_resonance(omega: &ContinuedFraction) -> Result<(u64, u64), PadeError> {
    let head = omega.head();
    if head.is_empty() {
        return Err(PadeError::UnsupportedResonance { omega: omega.to_bracket() });
    }
    let k_star = head
        .iter()
        .enumerate()
        .max_by_key(|(_, &a)| a)
        .map(|(i, _)| i + 1)
        .unwrap();
    let (p, q) = if k_star == 1 {
        (0u64, 1u64)
    } else {
        let conv = omega.convergents(k_star - 1)?;
        conv.last().unwrap().as_u64().ok_or_else(|| PadeError::UnsupportedResonance {
            omega: omega.to_bracket(),
        })?
    };
    Ok((p, q))
}

/// Heuristic radius `rho_1 = eta^(2/q) (q |C_{p/q}|^{-1} lambda_c)^(1/q)`
/// with `eta = |omega - p/q|`; the constants `C_{p/q}` are known for the
/// resonances 0/1, 1/2 and 1/3 only.
pub fn rho1(omega: &ContinuedFraction, ctx: &PrecisionContext) -> Result<RadiusEstimate, PadeError> {
    let (p, q) = nearest_resonance(omega)?;
    let c_abs_inv = match (p, q) {
        (0, 1) => ctx.one(),          // C = 1
        (1, 2) => ctx.from_i64(8),    // C = -1/8
        (1, 3) => ctx.from_i64(24),   // C = -1/24
        _ => return Err(PadeError::UnsupportedResonance { omega: omega.to_bracket() }),
    };
    let w = omega.value(ctx);
    let eta = (&w - &(ctx.from_i64(p as i64) / ctx.from_i64(q as i64))).abs();
    let lc = lambda_c(ctx);
    let qf = ctx.from_i64(q as i64);
    let base = &(&qf * &c_abs_inv) * &lc;
    let rho = eta.pow(&(&ctx.from_i64(2) / &qf)) * base.pow(&qf.recip());
    Ok(RadiusEstimate {
        rho,
        method: RadiusMethod::HeuristicRho1,
        details: RadiusDetails::Formula { resonance: (p, q), eta, lambda_c: lc },
    })
}

/// Pole-cloud CSV for plotting: `re,im,residue_magnitude,froissart_flag`.
pub fn poles_to_csv(poles: &[Pole]) -> String {
    let mut out = String::from("re,im,residue_magnitude,froissart\n");
    for p in poles {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.location.re().to_significant(17),
            p.location.im().to_significant(17),
            p.residue_magnitude.to_significant(8),
            u8::from(p.froissart)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    fn cf(s: &str) -> ContinuedFraction {
        ContinuedFraction::parse(s).unwrap()
    }

    #[test]
    fn geometric_series_01_pade() {
        let c = ctx(40);
        let coeffs: Vec<BigReal> = (0..3).map(|_| c.one()).collect();
        let approx = pade(&coeffs, 0, 1, &c.zero(), &c).unwrap();
        // 1/(1 - eps)
        assert!((approx.den[1].clone() + c.one()).abs() < c.eps_at(10));
        let ps = poles(&approx, &c).unwrap();
        assert_eq!(ps.len(), 1);
        assert!((ps[0].modulus.clone() - c.one()).abs() < c.eps_at(10));
        assert!(!ps[0].froissart);
    }

    #[test]
    fn exact_rational_recovered() {
        let c = ctx(40);
        // (1 - eps)/(1 - 2 eps): c_0 = 1, c_k = 2^(k-1)
        let mut coeffs = vec![c.one()];
        for k in 1..=4 {
            coeffs.push(c.from_i64(1i64 << (k - 1)));
        }
        let approx = pade(&coeffs, 1, 1, &c.zero(), &c).unwrap();
        let ps = poles(&approx, &c).unwrap();
        assert_eq!(ps.len(), 1);
        assert!((ps[0].modulus.clone() - c.from_f64(0.5)).abs() < c.eps_at(8));
        // numerator zero at 1
        let z = ps[0].nearest_zero.clone().unwrap();
        assert!((z - c.from_f64(0.5)).abs() < c.eps_at(8)); // |pole - zero| = |0.5 - 1|
        assert!(!ps[0].froissart);
    }

    #[test]
    fn froissart_doublet_is_flagged() {
        let c = ctx(80);
        // (1 - eps(1 + 1e-30))/(1 - eps): c_0 = 1, c_k = -1e-30 for k >= 1
        let delta = c.parse("1e-30").unwrap();
        let mut coeffs = vec![c.one()];
        for _ in 1..=4 {
            coeffs.push(-&delta);
        }
        let approx = pade(&coeffs, 1, 1, &c.zero(), &c).unwrap();
        let ps = poles(&approx, &c).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].froissart, "doublet distance {:?}", ps[0].nearest_zero);
    }

    #[test]
    fn order_of_contact_on_lindstedt_series() {
        let c = ctx(50);
        let series = lindstedt::coefficients(&cf("[(1)]"), 16, &c).unwrap();
        let coeffs = series.coefficients_at(&c.one(), &c);
        let approx = pade(&coeffs, 8, 8, &c.one(), &c).unwrap();
        let back = approx.taylor(16, &c);
        let scale = coeffs.iter().fold(c.zero(), |m, v| m.max(&v.abs()));
        for (a, b) in back.iter().zip(&coeffs) {
            assert!((a - b).abs() <= c.eps_at((c.digits() / 2) as i32) * &scale);
        }
    }

    #[test]
    fn conjugate_pole_symmetry() {
        let c = ctx(50);
        let series = lindstedt::coefficients(&cf("[2,10,(1)]"), 20, &c).unwrap();
        let coeffs = series.coefficients_at(&c.one(), &c);
        let approx = pade(&coeffs, 10, 10, &c.one(), &c).unwrap();
        let ps = poles(&approx, &c).unwrap();
        let tol = c.from_f64(1e-25);
        for p in &ps {
            if p.location.im().abs() > tol {
                let conj = p.location.conj();
                let found = ps.iter().any(|other| (&other.location - &conj).abs() < tol);
                assert!(found, "conjugate of {:?} missing", p.location);
            }
        }
    }

    #[test]
    fn rho1_published_values() {
        let c = ctx(60);
        for (omega, expect) in [
            ("[2,10,(1)]", 0.51409),
            ("[3,10,(1)]", 0.62329),
            ("[500,(1)]", 0.000130355),
            ("[2,500,(1)]", 0.011405915),
            ("[3,500,(1)]", 0.04873028),
        ] {
            let est = rho1(&cf(omega), &c).unwrap();
            let got = est.rho.to_f64();
            assert!(
                (got / expect - 1.0).abs() < 1e-4,
                "{omega}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn resonance_detection() {
        assert_eq!(nearest_resonance(&cf("[500,(1)]")).unwrap(), (0, 1));
        assert_eq!(nearest_resonance(&cf("[2,10,(1)]")).unwrap(), (1, 2));
        assert_eq!(nearest_resonance(&cf("[3,200,(1)]")).unwrap(), (1, 3));
        assert_eq!(nearest_resonance(&cf("[500,20,(1)]")).unwrap(), (0, 1));
        assert!(matches!(
            rho1(&cf("[4,500,(1)]"), &ctx(40)),
            Err(PadeError::UnsupportedResonance { .. })
        ));
        assert!(matches!(
            rho1(&cf("[(1)]"), &ctx(40)),
            Err(PadeError::UnsupportedResonance { .. })
        ));
    }

    #[test]
    fn insufficient_coefficients_rejected() {
        let c = ctx(40);
        let coeffs = vec![c.one(), c.one()];
        assert!(matches!(
            pade(&coeffs, 1, 1, &c.zero(), &c),
            Err(PadeError::InsufficientCoefficients { .. })
        ));
    }
}
