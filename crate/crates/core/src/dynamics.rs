//! The standard map on the plane lift, and its tangent map.
//!
//! All dynamics run on the lift (real angle coordinate, no wrapping);
//! reduction mod 2*pi happens only at presentation time. The shared
//! `sin`/`cos` of the angle is computed once per step.

use crate::numerics::{BigReal, PrecisionContext};

/// Perturbation strength of the map.
#[derive(Debug, Clone)]
pub struct MapParams {
    pub epsilon: BigReal,
}

impl MapParams {
    pub fn new(epsilon: BigReal) -> Self {
        debug_assert!(!epsilon.is_negative(), "negative epsilon is excluded by symmetry");
        Self { epsilon }
    }
}

/// Point on the lift: angle `x` (radians, on the real line) and momentum `y`.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    pub x: BigReal,
    pub y: BigReal,
}

/// One step of the lifted map: `(x, y) -> (x + y + eps sin x, y + eps sin x)`.
pub fn step(p: &PhasePoint, params: &MapParams) -> PhasePoint {
    let kick = p.x.sin() * &params.epsilon;
    let y = &p.y + &kick;
    PhasePoint {
        x: &p.x + &y,
        y,
    }
}

/// Tangent map factor at `p`: `[[1 + eps cos x, 1], [eps cos x, 1]]`,
/// row-major. Its determinant is exactly 1 up to rounding.
pub fn tangent(p: &PhasePoint, params: &MapParams, ctx: &PrecisionContext) -> [BigReal; 4] {
    let c = p.x.cos() * &params.epsilon;
    [&ctx.one() + &c, ctx.one(), c, ctx.one()]
}

/// `n`-fold composition of [`step`] on the lift.
pub fn iterate(p: &PhasePoint, params: &MapParams, n: usize) -> PhasePoint {
    let mut current = p.clone();
    for _ in 0..n {
        current = step(&current, params);
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn unperturbed_shear() {
        let c = ctx();
        let p = PhasePoint { x: c.parse("0.3").unwrap(), y: c.parse("0.7").unwrap() };
        let out = step(&p, &MapParams::new(c.zero()));
        assert!((out.x.clone() - c.one()).abs() < c.eps_at(10));
        assert!((out.y.clone() - c.parse("0.7").unwrap()).abs() < c.eps_at(10));
    }

    #[test]
    fn fixed_point_at_pi() {
        let c = ctx();
        let p = PhasePoint { x: c.pi(), y: c.zero() };
        let out = step(&p, &MapParams::new(c.from_f64(0.8)));
        assert!((out.x.clone() - c.pi()).abs() < c.eps_at(10));
        assert!(out.y.abs() < c.eps_at(10));
    }

    #[test]
    fn direct_substitution() {
        let c = ctx();
        let half_pi = c.pi() / c.from_i64(2);
        let p = PhasePoint { x: half_pi.clone(), y: c.zero() };
        let out = step(&p, &MapParams::new(c.from_f64(0.5)));
        assert!((out.x.clone() - (half_pi + c.from_f64(0.5))).abs() < c.eps_at(10));
        assert!((out.y.clone() - c.from_f64(0.5)).abs() < c.eps_at(10));
    }

    #[test]
    fn tangent_values() {
        let c = ctx();
        let eps = c.from_f64(0.37);
        // x = pi: [[1 - eps, 1], [-eps, 1]]
        let m = tangent(&PhasePoint { x: c.pi(), y: c.zero() }, &MapParams::new(eps.clone()), &c);
        assert!((m[0].clone() - (c.one() - &eps)).abs() < c.eps_at(10));
        assert!((m[2].clone() + &eps).abs() < c.eps_at(10));
        // x = pi/2: cos = 0
        let m = tangent(
            &PhasePoint { x: c.pi() / c.from_i64(2), y: c.zero() },
            &MapParams::new(eps),
            &c,
        );
        assert!((m[0].clone() - c.one()).abs() < c.eps_at(10));
        assert!(m[2].abs() < c.eps_at(10));
    }

    #[test]
    fn tangent_determinant_is_one() {
        let c = ctx();
        for (x, e) in [(0.1, 0.0), (1.7, 0.4), (3.9, 1.3), (5.2, 0.97)] {
            let m = tangent(
                &PhasePoint { x: c.from_f64(x), y: c.zero() },
                &MapParams::new(c.from_f64(e)),
                &c,
            );
            let det = &(&m[0] * &m[3]) - &(&m[1] * &m[2]);
            assert!((det - c.one()).abs() < c.eps_at(5), "x={x} e={e}");
        }
    }

    #[test]
    fn iterate_identity_and_rotation() {
        let c = ctx();
        let p = PhasePoint { x: c.from_f64(0.21), y: c.from_f64(0.9) };
        let same = iterate(&p, &MapParams::new(c.from_f64(0.5)), 0);
        assert!((same.x.clone() - &p.x).abs().is_zero());
        // eps = 0, y = 2 pi p / q: after q steps x advances by 2 pi p
        let (pp, qq) = (2i64, 5usize);
        let y = c.two_pi() * c.from_i64(pp) / c.from_i64(qq as i64);
        let start = PhasePoint { x: c.from_f64(0.123), y };
        let out = iterate(&start, &MapParams::new(c.zero()), qq);
        let advance = out.x - &start.x;
        assert!((advance - c.two_pi() * c.from_i64(pp)).abs() < c.eps_at(10));
    }

    #[test]
    fn odd_symmetry_of_step() {
        let c = ctx();
        let params = MapParams::new(c.from_f64(0.73));
        let p = PhasePoint { x: c.from_f64(1.9), y: c.from_f64(-0.4) };
        let neg = PhasePoint { x: -&p.x, y: -&p.y };
        let a = step(&p, &params);
        let b = step(&neg, &params);
        assert!((&a.x + &b.x).abs() < c.eps_at(10));
        assert!((&a.y + &b.y).abs() < c.eps_at(10));
    }

    #[test]
    fn lagrangian_consistency_along_iterates() {
        // x_{n+1} - 2 x_n + x_{n-1} = eps sin x_n
        let c = ctx();
        let params = MapParams::new(c.from_f64(0.6));
        let mut pts = vec![PhasePoint { x: c.from_f64(0.4), y: c.from_f64(1.1) }];
        for _ in 0..6 {
            pts.push(step(pts.last().unwrap(), &params));
        }
        for n in 1..pts.len() - 1 {
            let lhs = &(&pts[n + 1].x - &(&pts[n].x + &pts[n].x)) + &pts[n - 1].x;
            let rhs = pts[n].x.sin() * &params.epsilon;
            assert!((lhs - rhs).abs() < c.eps_at(10), "n={n}");
        }
    }
}
