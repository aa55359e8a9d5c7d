//! Perturbative periodic orbits and their Greene residues.
//!
//! An orbit of rotation number `p/q` at strength `eps` is found by Newton
//! iteration on the Lagrangian system
//!
//! ```text
//! F_i(x) = x_{i+1} - 2 x_i + x_{i-1} - eps sin x_i,   x_{i+q} = x_i + 2 pi p,
//! ```
//!
//! whose Jacobian is cyclic tridiagonal (diagonal `-2 - eps cos x_i`, all
//! off-diagonal entries 1) and is solved in O(q).
//!
//! Cold starts walk a ladder of semiconvergents of `p/q`: the exact
//! elliptic orbits of 0/1 (`x = pi`) and 1/2 (`x in {0, pi}`) anchor the
//! chain, and each rung seeds the next through interpolation of the
//! conjugacy profile, staying on the elliptic branch (checked a posteriori
//! by the residue sign). Warm starts reuse a prior orbit at a nearby `eps`
//! or at lower precision.
//!
//! The residue is `R = (2 - T)/4` with `T` the trace of the tangent
//! product over one period. Near resonances the partial products carry
//! huge, nearly cancelling entries; we track the loss and escalate the
//! working precision on a fixed schedule until at least 30 digits of
//! headroom survive.

use thiserror::Error;

use crate::dynamics::{self, MapParams, PhasePoint};
use crate::numerics::{
    solve_cyclic_tridiagonal, BigReal, CyclicTridiagonalSystem, NumericsError, PrecisionContext,
};

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("Newton iteration diverged for {p}/{q} at eps={eps}: {reason}")]
    NewtonDivergence { p: u64, q: u64, eps: String, reason: String },
    #[error("singular orbit Jacobian for {p}/{q} (near-parabolic orbit); raise precision")]
    SingularJacobian { p: u64, q: u64 },
    #[error(
        "trace cancellation ({cancellation_digits} digits) leaves fewer than 30 digits of \
         headroom at {digits} working digits"
    )]
    PrecisionExhausted { cancellation_digits: i64, digits: u32 },
    #[error("precision schedule exhausted for {p}/{q} at eps={eps} (top tier {top} digits)")]
    BudgetExhausted { p: u64, q: u64, eps: String, top: u32 },
    #[error("invalid rotation number {p}/{q}")]
    InvalidRotation { p: u64, q: u64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// The `q` lift angles of a periodic orbit, in time order, together with
/// the achieved closure quality and the precision it was computed at.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub p: u64,
    pub q: u64,
    pub epsilon: BigReal,
    pub points: Vec<BigReal>,
    pub closure_error: BigReal,
    pub digits: u32,
}

/// Greene residue of an orbit: `value = (2 - trace)/4`.
#[derive(Debug, Clone)]
pub struct Residue {
    pub value: BigReal,
    pub trace: BigReal,
    /// Decimal digits lost to cancellation while accumulating the trace.
    pub cancellation_digits: i64,
    /// Decimal digits of the value that can actually be believed, limited
    /// by both the working precision and the orbit's own closure error
    /// (each degraded by the trace cancellation).
    pub accuracy_digits: i64,
}

/// Escalating working precisions used by [`residue_at`].
#[derive(Debug, Clone)]
pub struct PrecisionSchedule {
    pub tiers: Vec<u32>,
}

impl Default for PrecisionSchedule {
    fn default() -> Self {
        Self { tiers: vec![38, 76, 150, 300, 600, 1200] }
    }
}

impl PrecisionSchedule {
    pub fn capped(max_digits: u32) -> Self {
        let mut tiers: Vec<u32> = Self::default()
            .tiers
            .into_iter()
            .filter(|&d| d <= max_digits)
            .collect();
        if tiers.is_empty() {
            tiers.push(max_digits.max(PrecisionContext::MIN_DIGITS));
        }
        Self { tiers }
    }
}

/// Digits of headroom the trace must retain for a residue to be trusted.
pub const CANCELLATION_HEADROOM: i64 = 30;

fn eps_key(eps: &BigReal) -> String {
    eps.to_significant(25)
}

// ---------------------------------------------------------------------------
// Newton refinement
// ---------------------------------------------------------------------------

/// One full Newton solve at fixed `(p, q, eps)` from the given seed points.
fn newton(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    mut points: Vec<BigReal>,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>, OrbitError> {
    let n = q as usize;
    let tol = ctx.eps_at(10);
    let two_pi_p = ctx.two_pi() * ctx.from_i64(p as i64);
    let fail = |reason: &str| OrbitError::NewtonDivergence {
        p,
        q,
        eps: eps_key(epsilon),
        reason: format!("{reason} at {} digits", ctx.digits()),
    };

    // residual, Jacobian diagonal and both residual norms in one pass
    // over shared sin/cos
    let assemble = |pts: &[BigReal]| -> (Vec<BigReal>, Vec<BigReal>, BigReal, BigReal) {
        let mut f = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        let mut norm = ctx.zero();
        let mut merit = ctx.zero();
        let mut trig = Vec::with_capacity(n);
        for x in pts {
            trig.push(x.sin_cos());
        }
        for i in 0..n {
            let next = if i + 1 < n { pts[i + 1].clone() } else { &pts[0] + &two_pi_p };
            let prev = if i > 0 { pts[i - 1].clone() } else { &pts[n - 1] - &two_pi_p };
            let (s, c) = &trig[i];
            let fi = &(&next - &(&pts[i] + &pts[i])) + &(&prev - &(epsilon * s));
            norm = norm.max(&fi.abs());
            merit += &fi.square();
            f.push(fi);
            diag.push(-(&ctx.from_i64(2) + &(epsilon * c)));
        }
        (f, diag, norm, merit)
    };

    let solve = |f: Vec<BigReal>, diag: Vec<BigReal>| -> Result<Vec<BigReal>, OrbitError> {
        let sys = CyclicTridiagonalSystem { diag, off: vec![ctx.one(); n], rhs: f };
        solve_cyclic_tridiagonal(&sys, ctx).map_err(|e| match e {
            NumericsError::SingularSystem { .. } => OrbitError::SingularJacobian { p, q },
            other => OrbitError::Numerics(other),
        })
    };

    // fast path: undamped Newton (quadratic once inside the basin)
    let mut initial_norm: Option<BigReal> = None;
    let mut best: Option<(BigReal, Vec<BigReal>)> = None;
    for _iter in 0..40 {
        let (f, diag, norm, _) = assemble(&points);
        if !norm.is_finite() {
            break;
        }
        if norm <= tol {
            return Ok(points);
        }
        let improved = match &best {
            None => true,
            Some((b, _)) => norm < *b,
        };
        if improved {
            best = Some((norm.clone(), points.clone()));
        }
        match &initial_norm {
            None => initial_norm = Some(norm.clone()),
            Some(start) => {
                if norm > &(start * &ctx.from_i64(1000)) + &ctx.one() {
                    break;
                }
            }
        }
        let delta = solve(f, diag)?;
        for (x, d) in points.iter_mut().zip(&delta) {
            *x -= d;
        }
    }

    // rescue path: the symmetry-reduced half system (it has no soft phase
    // mode at all), tried over the symmetry classes with the best point
    // set as the shape seed
    if let Some((_, pts)) = best {
        points = pts;
    }
    if n >= 2 {
        let shape = PeriodicOrbit {
            p,
            q,
            epsilon: epsilon.clone(),
            points,
            closure_error: BigReal::infinity(ctx),
            digits: ctx.digits(),
        };
        let mut first_err: Option<OrbitError> = None;
        for class in SymmetryClass::all() {
            match symmetric_candidate(p, q, epsilon, class, &shape, ctx) {
                Ok(orbit) => return Ok(orbit.points),
                Err(e) => {
                    if first_err.is_none() {
                        first_err = Some(e);
                    }
                }
            }
        }
        return Err(first_err.unwrap_or_else(|| fail("iteration cap reached")));
    }
    Err(fail("iteration cap reached"))
}

/// Plain (non-cyclic) Thomas solve for the pinned rescue system.
fn pinned_thomas(
    diag: &[BigReal],
    off: &[BigReal],
    rhs: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>, NumericsError> {
    let m = diag.len();
    if m == 1 {
        let threshold = ctx.eps_at(5);
        if diag[0].abs() < threshold {
            return Err(NumericsError::SingularSystem {
                row: 0,
                pivot_magnitude: diag[0].abs().to_f64(),
            });
        }
        return Ok(vec![&rhs[0] / &diag[0]]);
    }
    let threshold = ctx.eps_at(5);
    let mut c_prime = Vec::with_capacity(m - 1);
    let mut x = Vec::with_capacity(m);
    let mut beta = diag[0].clone();
    if beta.abs() < threshold {
        return Err(NumericsError::SingularSystem { row: 0, pivot_magnitude: beta.abs().to_f64() });
    }
    x.push(&rhs[0] / &beta);
    for j in 1..m {
        c_prime.push(&off[j - 1] / &beta);
        beta = &diag[j] - &(&off[j - 1] * c_prime.last().unwrap());
        if beta.abs() < threshold {
            return Err(NumericsError::SingularSystem {
                row: j,
                pivot_magnitude: beta.abs().to_f64(),
            });
        }
        let num = &rhs[j] - &(&off[j - 1] * x.last().unwrap());
        x.push(num / &beta);
    }
    for j in (0..m - 1).rev() {
        let t = &c_prime[j] * &x[j + 1];
        x[j] = &x[j] - &t;
    }
    Ok(x)
}

/// Verify strict monotonicity on the lift, including the wrap-around.
fn is_monotone(points: &[BigReal], p: u64, ctx: &PrecisionContext) -> bool {
    for w in points.windows(2) {
        if !(w[1] > w[0]) {
            return false;
        }
    }
    if points.len() == 1 {
        return true;
    }
    let wrap = &points[0] + &(ctx.two_pi() * ctx.from_i64(p as i64));
    wrap > *points.last().unwrap()
}

/// Shift all angles so the first lies in [0, 2 pi).
fn canonicalize(points: &mut [BigReal], ctx: &PrecisionContext) {
    let two_pi = ctx.two_pi();
    let turns = (&points[0] / &two_pi).floor();
    if turns.is_zero() {
        return;
    }
    let shift = turns * two_pi;
    for x in points.iter_mut() {
        *x -= &shift;
    }
}

/// Closure check through the actual map: reconstruct the momentum, iterate
/// `q` steps and measure the mismatch against one full translation.
fn closure_error(points: &[BigReal], p: u64, epsilon: &BigReal, ctx: &PrecisionContext) -> BigReal {
    let n = points.len();
    let two_pi_p = ctx.two_pi() * ctx.from_i64(p as i64);
    let x_prev = &points[n - 1] - &two_pi_p;
    let start = PhasePoint { x: points[0].clone(), y: &points[0] - &x_prev };
    let params = MapParams::new(epsilon.clone());
    let end = dynamics::iterate(&start, &params, n);
    let dx = (&end.x - &(&start.x + &two_pi_p)).abs();
    let dy = (&end.y - &start.y).abs();
    dx.max(&dy)
}

fn finish_orbit(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    mut points: Vec<BigReal>,
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    canonicalize(&mut points, ctx);
    if !is_monotone(&points, p, ctx) {
        return Err(OrbitError::NewtonDivergence {
            p,
            q,
            eps: eps_key(epsilon),
            reason: "converged to a non-monotone point set".into(),
        });
    }
    let closure = closure_error(&points, p, epsilon, ctx);
    Ok(PeriodicOrbit {
        p,
        q,
        epsilon: epsilon.clone(),
        points,
        closure_error: closure,
        digits: ctx.digits(),
    })
}

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

/// Modular inverse of `p` mod `q` for reindexing orbit points by angle.
fn inv_mod(p: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (q as i128, (p % q) as i128);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    debug_assert_eq!(r, 1, "p and q must be coprime");
    t.rem_euclid(q as i128) as u64
}

/// Seed an orbit of `(p, q)` from a converged orbit of a different rotation
/// number at the same `eps`, interpolating the conjugacy profile
/// `u(theta) = x - theta` on the donor's angle grid. `phase` shifts the new
/// rigid grid (used to hop between the elliptic and hyperbolic branches).
fn interpolated_seed(
    donor: &PeriodicOrbit,
    p: u64,
    q: u64,
    phase: &BigReal,
    parity: Option<u8>,
    ctx: &PrecisionContext,
) -> Vec<BigReal> {
    let dq = donor.q as usize;
    let two_pi = ctx.two_pi();
    let donor_step = &two_pi * &(ctx.from_i64(donor.p as i64) / ctx.from_i64(donor.q as i64));

    // u at donor grid angle (x1 + 2 pi m / q'), m = 0..q'-1: the time index
    // of lattice site m is m * p'^{-1} mod q'.
    let inv = inv_mod(donor.p % donor.q, donor.q) as usize;
    let mut u_sorted = Vec::with_capacity(dq);
    for m in 0..dq {
        let i = (m * inv) % dq;
        let theta_i = &donor.points[0] + &(&donor_step * &ctx.from_i64(i as i64));
        let mut u = &donor.points[i] - &theta_i;
        // fold the lift shift out of u (it is 2 pi periodic)
        let turns = (&u / &two_pi + &ctx.from_f64(0.5)).floor();
        if !turns.is_zero() {
            u -= &(turns * &two_pi);
        }
        u_sorted.push(u);
    }

    let n = q as usize;
    let new_step = &two_pi * &(ctx.from_i64(p as i64) / ctx.from_i64(q as i64));
    let grid_h = &two_pi / &ctx.from_i64(dq as i64);
    let mut seed = Vec::with_capacity(n);
    for i in 0..n {
        let theta = &(&donor.points[0] + phase) + &(&new_step * &ctx.from_i64(i as i64));
        // donor grid coordinate of theta
        let t = &(&theta - &donor.points[0]) / &grid_h;
        let lo = t.floor();
        let frac = &t - &lo;
        let lo_idx = {
            let v = lo.to_f64() as i64;
            v.rem_euclid(dq as i64) as usize
        };
        let hi_idx = (lo_idx + 1) % dq;
        let u = &u_sorted[lo_idx] + &(&frac * &(&u_sorted[hi_idx] - &u_sorted[lo_idx]));
        seed.push(theta + u);
    }
    snap_phase_to_class(&mut seed, ctx, parity);
    seed
}

/// As [`snap_phase_to_symmetry`], but restricted to even (`x = 0 mod 2pi`)
/// or odd (`x = pi mod 2pi`) symmetry values: for odd periods the elliptic
/// and hyperbolic Birkhoff partners pin to opposite classes, so forcing
/// the class is how a branch hop escapes the wrong partner.
fn snap_phase_to_class(
    points: &mut [BigReal],
    ctx: &PrecisionContext,
    parity: Option<u8>,
) -> usize {
    let pi = ctx.pi();
    let mut best: Option<(usize, BigReal)> = None; // (index, offset)
    for (i, x) in points.iter().enumerate() {
        let k = (&(x / &pi) + &ctx.from_f64(0.5)).floor();
        let k = match parity {
            None => k,
            Some(want) => {
                let k_i = k.to_f64() as i64;
                if k_i.rem_euclid(2) == i64::from(want) {
                    k
                } else {
                    // choose the closer neighbouring multiple of the
                    // requested parity
                    let lo = ctx.from_i64(k_i - 1);
                    let hi = ctx.from_i64(k_i + 1);
                    if (x - &(&lo * &pi)).abs() < (x - &(&hi * &pi)).abs() {
                        lo
                    } else {
                        hi
                    }
                }
            }
        };
        let offset = x - &(&k * &pi);
        let better = match &best {
            None => true,
            Some((_, b)) => offset.abs() < b.abs(),
        };
        if better {
            best = Some((i, offset));
        }
    }
    let (idx, offset) = best.expect("nonempty orbit");
    for x in points.iter_mut() {
        *x -= &offset;
    }
    idx
}

/// One rung of the cold-start ladder: a semiconvergent
/// `(p_prev + t p_cur)/(q_prev + t q_cur)` of the target fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LadderStep {
    p: u64,
    q: u64,
    /// Digit group: base pair the semiconvergent is built on.
    base: (u64, u64, u64, u64), // (p_prev, q_prev, p_cur, q_cur)
    t: u64,
}

impl LadderStep {
    fn at(base: (u64, u64, u64, u64), t: u64) -> Self {
        let (p_prev, q_prev, p_cur, q_cur) = base;
        LadderStep { p: p_prev + t * p_cur, q: q_prev + t * q_cur, base, t }
    }
}

/// Semiconvergent ladder of `p/q`: a short chain of reduced fractions
/// climbing geometrically in denominator from 1/2 up to `p/q` itself.
fn semiconvergent_ladder(p: u64, q: u64) -> Vec<LadderStep> {
    debug_assert!(q >= 2);
    // continued fraction digits of p/q in (0, 1): expand q/p
    let mut digits = Vec::new();
    let (mut num, mut den) = (q, p);
    while den != 0 {
        digits.push(num / den);
        (num, den) = (den, num % den);
    }
    let (mut p_prev, mut p_cur) = (1u64, 0u64);
    let (mut q_prev, mut q_cur) = (0u64, 1u64);
    let mut ladder = Vec::new();
    for &b in &digits {
        let base = (p_prev, q_prev, p_cur, q_cur);
        // geometric selection of intermediate fractions within this digit
        let mut t = 1u64;
        let mut picks = Vec::new();
        while t < b {
            picks.push(t);
            t *= 2;
        }
        picks.push(b);
        for t in picks {
            let step = LadderStep::at(base, t);
            if step.q >= 2 && step.p < step.q {
                ladder.push(step);
            }
        }
        let p_next = b * p_cur + p_prev;
        let q_next = b * q_cur + q_prev;
        (p_prev, p_cur) = (p_cur, p_next);
        (q_prev, q_cur) = (q_cur, q_next);
    }
    ladder.dedup();
    debug_assert_eq!(
        (ladder.last().unwrap().p, ladder.last().unwrap().q),
        (p, q)
    );
    ladder
}

/// Exact elliptic anchors: `x = pi` for 0/1, `{0, pi}` for 1/2. Both solve
/// the Lagrangian system identically in `eps`, with residues `eps/4` and
/// `eps^2/4`.
fn exact_anchor(p: u64, q: u64, epsilon: &BigReal, ctx: &PrecisionContext) -> Option<PeriodicOrbit> {
    let points = match (p, q) {
        // any rotation p/1 has the same Lagrangian equation as 0/1
        (_, 1) => vec![ctx.pi()],
        (1, 2) => vec![ctx.zero(), ctx.pi()],
        _ => return None,
    };
    Some(PeriodicOrbit {
        p,
        q,
        epsilon: epsilon.clone(),
        points,
        closure_error: ctx.zero(),
        digits: ctx.digits(),
    })
}

/// Sign of the residue, or `None` when it is numerically unresolved.
fn residue_sign(orbit: &PeriodicOrbit, ctx: &PrecisionContext) -> Option<bool> {
    let r = residue_unchecked(orbit, ctx);
    let noise_exp = (r.cancellation_digits + 6).min(i64::from(ctx.digits()) - 1);
    let noise = ctx.eps_at(noise_exp as i32);
    if r.value.abs() < noise {
        None
    } else {
        Some(!r.value.is_negative())
    }
}

/// Newton solve from an interpolated seed, hopping to the elliptic branch
/// if the first attempt lands on the hyperbolic partner.
///
/// The hop reseeds from the hyperbolic orbit itself shifted by half a cell
/// (`pi/q`): the centers sit halfway between the saddles along the same
/// remnant curve.
fn climb_rung(
    donor: &PeriodicOrbit,
    p: u64,
    q: u64,
    epsilon: &BigReal,
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    let half_cell = ctx.pi() / ctx.from_i64(q as i64);
    let attempt = |donor: &PeriodicOrbit,
                   phase: &BigReal,
                   parity: Option<u8>|
     -> Result<PeriodicOrbit, OrbitError> {
        let seed = interpolated_seed(donor, p, q, phase, parity, ctx);
        newton(p, q, epsilon, seed, ctx).and_then(|pts| finish_orbit(p, q, epsilon, pts, ctx))
    };

    let mut first_err = None;
    let mut fallback: Option<PeriodicOrbit> = None;
    'outer: for phase in [ctx.zero(), half_cell.clone(), -&half_cell] {
        match attempt(donor, &phase, None) {
            Ok(orbit) => match residue_sign(&orbit, ctx) {
                // sign unresolved at this precision: accept, the trace
                // cancellation check downstream decides whether to trust it
                Some(true) | None => return Ok(orbit),
                Some(false) => {
                    // hop to the partner through the symmetry classes
                    // (the class determines the branch deterministically)
                    for class in SymmetryClass::all() {
                        if let Ok(partner) =
                            symmetric_candidate(p, q, epsilon, class, &orbit, ctx)
                        {
                            if residue_sign(&partner, ctx) == Some(true) {
                                return Ok(partner);
                            }
                        }
                    }
                    fallback = Some(orbit);
                    break 'outer;
                }
            },
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    if let Some(orbit) = fallback {
        // everything converged hyperbolic; supercritical residues
        // legitimately leave (0,1), so report the orbit rather than fail
        return Ok(orbit);
    }
    Err(first_err.unwrap_or(OrbitError::InvalidRotation { p, q }))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Find the stable perturbative periodic orbit of rotation number `p/q` at
/// `eps`.
///
/// `seed` may be a converged orbit of the same rotation number at a nearby
/// `eps` (or lower precision), or an orbit of a neighbouring rotation
/// number at the same `eps` (continuation along a convergent chain); cold
/// starts are laddered automatically.
pub fn find_orbit(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    ctx: &PrecisionContext,
    seed: Option<&PeriodicOrbit>,
) -> Result<PeriodicOrbit, OrbitError> {
    // reduced fractions only; p may reach q exactly once (1/1, a legitimate
    // first convergent of rotation numbers above 1/2)
    let valid = q >= 1
        && (p != 0 || q == 1)
        && (p < q || q == 1)
        && gcd(p.max(1), q) == 1;
    if !valid {
        return Err(OrbitError::InvalidRotation { p, q });
    }
    debug_assert!(!epsilon.is_negative());

    if let Some(orbit) = exact_anchor(p, q, epsilon, ctx) {
        return Ok(orbit);
    }

    if let Some(prior) = seed {
        if prior.p == p && prior.q == q {
            return continue_in_eps(prior, epsilon, ctx);
        }
        // donor of a neighbouring rotation number at (essentially) the same
        // eps; a failed climb falls through to the full ladder below
        if (&prior.epsilon - epsilon).abs() < ctx.eps_at(6) {
            if let Ok(orbit) = climb_rung(prior, p, q, epsilon, ctx) {
                return Ok(orbit);
            }
        }
    }

    // cold start. Large orbits near criticality sit behind an
    // exponentially soft phase mode that donor interpolation cannot seed
    // reliably, so the ladder is climbed at a reduced eps where the orbit
    // family is tame and the result is continued upward in eps (the
    // symmetric point is pinned for all eps, so continuation never fights
    // the soft mode). Small orbits ladder directly at the target.
    if q > 128 && epsilon > &ctx.from_f64(0.02) {
        let mut start_eps = epsilon * &ctx.from_f64(0.5);
        let floor = ctx.from_f64(0.005);
        loop {
            match cold_ladder(p, q, &start_eps, ctx) {
                Ok(orbit) => return continue_in_eps(&orbit, epsilon, ctx),
                Err(e) => {
                    start_eps = &start_eps * &ctx.from_f64(0.5);
                    if start_eps < floor {
                        return Err(e);
                    }
                }
            }
        }
    }
    cold_ladder(p, q, epsilon, ctx)
}

/// Semiconvergent-ladder climb at fixed eps: each rung seeds the next
/// through conjugacy-profile interpolation. A failed rung densifies its
/// digit group by bisecting the semiconvergent index t; if that cannot
/// help (Farey-adjacent rung), the coarser grandparent donor is tried --
/// profiles of very close fractions can alias badly on each other's grids
/// while a coarser donor interpolates fine.
fn cold_ladder(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    let ladder = semiconvergent_ladder(p, q);
    let mut donor = exact_anchor(1, 2, epsilon, ctx).expect("1/2 anchor");
    let mut grandparent: Option<PeriodicOrbit> = None;
    let mut last_t_in_group: Option<(u64, u64, u64, u64, u64)> = None; // base + t
    for step in &ladder {
        if (step.p, step.q) == (donor.p, donor.q) {
            last_t_in_group = Some((step.base.0, step.base.1, step.base.2, step.base.3, step.t));
            continue;
        }
        match climb_rung(&donor, step.p, step.q, epsilon, ctx)
            .or_else(|e| match &grandparent {
                Some(older) => climb_rung(older, step.p, step.q, epsilon, ctx),
                None => Err(e),
            }) {
            Ok(orbit) => {
                grandparent = Some(std::mem::replace(&mut donor, orbit));
            }
            Err(e) => {
                // densify: bisect t between the last success in this group
                // and the failing rung
                let mut lo = match last_t_in_group {
                    Some((a, b, c, d, t)) if (a, b, c, d) == step.base => t,
                    _ => 0,
                };
                let mut hi = step.t;
                let mut recovered = None;
                while hi - lo > 1 {
                    let mid = LadderStep::at(step.base, lo + (hi - lo) / 2);
                    if mid.q < 2 || mid.p >= mid.q {
                        lo = mid.t;
                        continue;
                    }
                    match climb_rung(&donor, mid.p, mid.q, epsilon, ctx) {
                        Ok(orbit) => {
                            grandparent = Some(std::mem::replace(&mut donor, orbit));
                            lo = mid.t;
                            if let Ok(full) = climb_rung(&donor, step.p, step.q, epsilon, ctx) {
                                recovered = Some(full);
                                break;
                            }
                        }
                        Err(_) => hi = mid.t,
                    }
                }
                match recovered {
                    Some(orbit) => {
                        let _ = std::mem::replace(&mut grandparent, None);
                        donor = orbit;
                    }
                    None => return Err(e),
                }
            }
        }
        last_t_in_group = Some((step.base.0, step.base.1, step.base.2, step.base.3, step.t));
    }
    Ok(donor)
}

/// Continuation in `eps` from a converged orbit of the same rotation
/// number, stepping at most 0.05 at a time (halved on Newton failure, with
/// a floor of 1e-4 per step).
fn continue_in_eps(
    prior: &PeriodicOrbit,
    target: &BigReal,
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    let (p, q) = (prior.p, prior.q);
    let mut current_eps = prior.epsilon.clone();
    let mut points: Vec<BigReal> = prior
        .points
        .iter()
        .map(|x| ctx.parse(&x.to_exact_string()).unwrap())
        .collect();
    let max_step = ctx.from_f64(0.05);
    let floor = ctx.from_f64(1e-4);

    loop {
        let remaining = target - &current_eps;
        if remaining.abs().is_zero() {
            break;
        }
        let mut step = remaining.abs().min(&max_step);
        loop {
            let signed = if remaining.is_negative() { -&step } else { step.clone() };
            let trial_eps = &current_eps + &signed;
            match newton(p, q, &trial_eps, points.clone(), ctx) {
                Ok(new_points) => {
                    points = new_points;
                    current_eps = trial_eps;
                    break;
                }
                Err(e) => {
                    if step <= floor {
                        return Err(e);
                    }
                    step = &step / &ctx.from_i64(2);
                    if step < floor {
                        step = floor.clone();
                    }
                }
            }
        }
    }
    // final polish at the target: a prior orbit carried from a lower
    // precision tier must be refined to this context's tolerance
    points = newton(p, q, target, points, ctx)?;
    finish_orbit(p, q, target, points, ctx)
}

// ---------------------------------------------------------------------------
// Residues
// ---------------------------------------------------------------------------

fn residue_unchecked(orbit: &PeriodicOrbit, ctx: &PrecisionContext) -> Residue {
    let one = ctx.one();
    // running 2x2 product, row-major [a, b; c, d]
    let mut m = [one.clone(), ctx.zero(), ctx.zero(), one.clone()];
    let mut max_entry = ctx.one();
    for x in &orbit.points {
        let ec = x.cos() * &orbit.epsilon;
        let a = &one + &ec;
        // [[a, 1], [ec, 1]] * m
        let r0 = &(&a * &m[0]) + &m[2];
        let r1 = &(&a * &m[1]) + &m[3];
        let r2 = &(&ec * &m[0]) + &m[2];
        let r3 = &(&ec * &m[1]) + &m[3];
        m = [r0, r1, r2, r3];
        for entry in &m {
            max_entry = max_entry.max(&entry.abs());
        }
    }
    let trace = &m[0] + &m[3];
    let value = (ctx.from_i64(2) - &trace) / ctx.from_i64(4);
    // Cancellation relative to the larger of |T| and |2 - T|: either one
    // may legitimately vanish (parabolic orbit, residue exactly 1/2), but
    // not both, and the error in the product scales with max_entry.
    let scale = trace.abs().max(&(ctx.from_i64(2) - &trace).abs());
    let cancellation_digits = match (max_entry.magnitude10(), scale.magnitude10()) {
        (Some(hi), Some(lo)) => (hi - lo).max(0),
        (Some(hi), None) => hi + i64::from(ctx.digits()),
        _ => 0,
    };
    let orbit_digits = match orbit.closure_error.magnitude10() {
        Some(m) => -m,
        None => i64::from(ctx.digits()),
    };
    let accuracy_digits = i64::from(ctx.digits()).min(orbit_digits) - cancellation_digits;
    Residue { value, trace, cancellation_digits, accuracy_digits }
}

/// Residue of a converged orbit at the given precision.
///
/// Errors with [`OrbitError::PrecisionExhausted`] when trace cancellation
/// leaves fewer than [`CANCELLATION_HEADROOM`] digits; the caller should
/// recompute orbit and residue at higher precision.
pub fn residue(orbit: &PeriodicOrbit, ctx: &PrecisionContext) -> Result<Residue, OrbitError> {
    let r = residue_unchecked(orbit, ctx);
    if r.cancellation_digits > i64::from(ctx.digits()) - CANCELLATION_HEADROOM {
        return Err(OrbitError::PrecisionExhausted {
            cancellation_digits: r.cancellation_digits,
            digits: ctx.digits(),
        });
    }
    // orbit-quality gate: trace errors are amplified from the orbit's own
    // residual by the same factor the cancellation accounting measures, so
    // a loosely converged orbit cannot be allowed to fake a residue
    if r.accuracy_digits < 8 {
        return Err(OrbitError::PrecisionExhausted {
            cancellation_digits: r.cancellation_digits,
            digits: ctx.digits(),
        });
    }
    Ok(r)
}

/// Orbit plus residue under escalating precision: climbs the schedule until
/// the cancellation headroom is at least 30 digits, reusing each tier's
/// orbit to seed the next.
pub fn residue_at(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    schedule: &PrecisionSchedule,
    seed: Option<&PeriodicOrbit>,
) -> Result<(PeriodicOrbit, Residue), OrbitError> {
    let mut carried: Option<PeriodicOrbit> = None;
    let top = *schedule.tiers.last().unwrap();
    for &digits in &schedule.tiers {
        let ctx = PrecisionContext::new(digits)?;
        let eps_here = ctx.parse(&epsilon.to_exact_string()).unwrap();
        let tier_seed = carried.as_ref().or(seed);
        // a warm seed that leads Newton astray (e.g. a loosely accepted
        // lower-tier orbit) falls back to a cold ladder at this tier
        if std::env::var_os("STDMAP_TRACE").is_some() {
            eprintln!("[trace] residue_at {p}/{q} tier {digits} seed={:?}",
                tier_seed.map(|o| (o.p, o.q, o.digits)));
        }
        let found = find_orbit(p, q, &eps_here, &ctx, tier_seed).or_else(|e| {
            if std::env::var_os("STDMAP_TRACE").is_some() {
                eprintln!("[trace]   seeded attempt failed: {e}");
            }
            if tier_seed.is_some()
                && matches!(
                    e,
                    OrbitError::SingularJacobian { .. } | OrbitError::NewtonDivergence { .. }
                )
            {
                find_orbit(p, q, &eps_here, &ctx, None)
            } else {
                Err(e)
            }
        });
        let orbit = match found {
            Ok(o) => o,
            Err(e) => {
                if std::env::var_os("STDMAP_TRACE").is_some() {
                    eprintln!("[trace]   tier {digits} failed: {e}");
                }
                if digits != top
                    && matches!(
                        e,
                        OrbitError::SingularJacobian { .. }
                            | OrbitError::NewtonDivergence { .. }
                    )
                {
                    continue;
                }
                return Err(e);
            }
        };
        match residue(&orbit, &ctx) {
            Ok(r) => return Ok((orbit, r)),
            Err(OrbitError::PrecisionExhausted { .. }) => carried = Some(orbit),
            Err(e) => return Err(e),
        }
    }
    Err(OrbitError::BudgetExhausted { p, q, eps: eps_key(epsilon), top })
}

// ---------------------------------------------------------------------------
// Serialization (cache format)
// ---------------------------------------------------------------------------

impl PeriodicOrbit {
    /// Cache text format: header `p q eps digits`, then one angle per line.
    /// Decimal strings carry enough digits for an exact binary round trip.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.p,
            self.q,
            self.epsilon.to_exact_string(),
            self.digits
        );
        for x in &self.points {
            out.push_str(&x.to_exact_string());
            out.push('\n');
        }
        out
    }

    pub fn deserialize(text: &str) -> Option<PeriodicOrbit> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next()?.split_whitespace().collect();
        if header.len() != 4 {
            return None;
        }
        let p: u64 = header[0].parse().ok()?;
        let q: u64 = header[1].parse().ok()?;
        let digits: u32 = header[3].parse().ok()?;
        let ctx = PrecisionContext::new(digits).ok()?;
        let epsilon = ctx.parse(header[2]).ok()?;
        let points: Option<Vec<BigReal>> = lines.map(|l| ctx.parse(l.trim()).ok()).collect();
        let points = points?;
        if points.len() != q as usize {
            return None;
        }
        let closure = closure_error(&points, p, &epsilon, &ctx);
        Some(PeriodicOrbit { p, q, epsilon, points, closure_error: closure, digits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(digits: u32) -> PrecisionContext {
        PrecisionContext::new(digits).unwrap()
    }

    #[test]
    fn fixed_point_is_pi_with_residue_eps_over_4() {
        let c = ctx(40);
        for e in [0.1, 0.5, 2.0, 3.5] {
            let eps = c.from_f64(e);
            let orbit = find_orbit(0, 1, &eps, &c, None).unwrap();
            assert_eq!(orbit.points.len(), 1);
            assert!((orbit.points[0].clone() - c.pi()).abs() < c.eps_at(10));
            let r = residue(&orbit, &c).unwrap();
            assert!((r.value.clone() - eps / c.from_i64(4)).abs() < c.eps_at(10), "eps={e}");
        }
    }

    #[test]
    fn one_half_orbit_closes_under_the_map() {
        let c = ctx(40);
        let eps = c.from_f64(0.1);
        let orbit = find_orbit(1, 2, &eps, &c, None).unwrap();
        assert_eq!(orbit.points.len(), 2);
        assert!(orbit.closure_error < c.eps_at(10));
        let r = residue(&orbit, &c).unwrap();
        // R = eps^2 / 4
        let expect = eps.square() / c.from_i64(4);
        assert!((r.value.clone() - expect).abs() < c.eps_at(8));
    }

    #[test]
    fn unperturbed_orbit_has_zero_residue() {
        let c = ctx(40);
        let orbit = find_orbit(2, 5, &c.zero(), &c, None).unwrap();
        let r = residue(&orbit, &c).unwrap();
        assert!(r.value.abs() < c.eps_at(10));
        assert!((r.trace.clone() - c.from_i64(2)).abs() < c.eps_at(10));
    }

    #[test]
    fn small_orbits_converge_and_are_monotone() {
        let c = ctx(40);
        for (p, q) in [(1u64, 3u64), (2, 5), (3, 8), (1, 4), (2, 7)] {
            let eps = c.from_f64(0.4);
            let orbit = find_orbit(p, q, &eps, &c, None).unwrap();
            assert_eq!(orbit.points.len(), q as usize);
            assert!(is_monotone(&orbit.points, p, &c), "{p}/{q}");
            assert!(orbit.closure_error < c.eps_at(8), "{p}/{q}");
            let r = residue(&orbit, &c).unwrap();
            assert!(!r.value.is_negative(), "{p}/{q}: elliptic branch expected, R={:?}", r.value);
            assert!(r.value < c.one(), "{p}/{q}: stable branch expected");
        }
    }

    #[test]
    fn residue_matches_reflected_rotation_number() {
        // orbit of p/q and its mirror (q-p)/q have equal residues
        let c = ctx(40);
        let eps = c.from_f64(0.3);
        let a = find_orbit(1, 3, &eps, &c, None).unwrap();
        let b = find_orbit(2, 3, &eps, &c, None).unwrap();
        let ra = residue(&a, &c).unwrap();
        let rb = residue(&b, &c).unwrap();
        assert!((ra.value.clone() - rb.value.clone()).abs() < c.eps_at(8));
    }

    #[test]
    fn eps_continuation_reaches_larger_eps() {
        let c = ctx(40);
        let eps1 = c.from_f64(0.2);
        let orbit1 = find_orbit(1, 3, &eps1, &c, None).unwrap();
        let eps2 = c.from_f64(0.8);
        let orbit2 = find_orbit(1, 3, &eps2, &c, Some(&orbit1)).unwrap();
        assert!(orbit2.closure_error < c.eps_at(8));
        assert!((&orbit2.epsilon - &eps2).abs().is_zero());
    }

    #[test]
    fn residue_at_lowest_tier_for_fixed_point() {
        let c = ctx(38);
        let eps = c.from_f64(0.5);
        let (orbit, r) = residue_at(0, 1, &eps, &PrecisionSchedule::default(), None).unwrap();
        assert_eq!(orbit.digits, 38);
        assert!((r.value.to_f64() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn precision_monotonicity_of_residue() {
        let lo = ctx(38);
        let hi = ctx(76);
        let r_lo = residue(&find_orbit(2, 5, &lo.from_f64(0.4), &lo, None).unwrap(), &lo).unwrap();
        let r_hi = residue(&find_orbit(2, 5, &hi.from_f64(0.4), &hi, None).unwrap(), &hi).unwrap();
        assert!((r_lo.value.clone() - r_hi.value.clone()).abs() < lo.eps_at(12));
    }

    #[test]
    fn ladder_covers_published_critical_orbit() {
        // approximant 3/4 of sqrt(3)-1 at its critical eps: residue 0.24871
        let c = ctx(40);
        let eps = c.parse("0.876067426").unwrap();
        let orbit = find_orbit(3, 4, &eps, &c, None).unwrap();
        let r = residue(&orbit, &c).unwrap();
        assert!((r.value.to_f64() - 0.24871).abs() < 2e-3, "R = {:?}", r.value);
    }

    #[test]
    fn near_critical_golden_plateau() {
        // 5/8 approximant of the golden mean at the critical eps: the
        // residue sits on the ~0.25 plateau (coarse, k is small)
        let c = ctx(40);
        let eps = c.parse("0.971635406").unwrap();
        let orbit = find_orbit(5, 8, &eps, &c, None).unwrap();
        let r = residue(&orbit, &c).unwrap();
        assert!((r.value.to_f64() - 0.25).abs() < 0.05, "R = {:?}", r.value);
    }

    #[test]
    fn serialization_round_trip() {
        let c = ctx(40);
        let eps = c.from_f64(0.35);
        let orbit = find_orbit(2, 5, &eps, &c, None).unwrap();
        let text = orbit.serialize();
        let back = PeriodicOrbit::deserialize(&text).unwrap();
        assert_eq!((back.p, back.q, back.digits), (2, 5, 40));
        for (a, b) in orbit.points.iter().zip(&back.points) {
            assert!((a - b).abs() < c.eps_at(2));
        }
        assert!(back.closure_error < c.eps_at(8));
    }

    #[test]
    fn rejects_unreduced_rotation() {
        let c = ctx(40);
        assert!(matches!(
            find_orbit(2, 4, &c.from_f64(0.1), &c, None),
            Err(OrbitError::InvalidRotation { .. })
        ));
        assert!(matches!(
            find_orbit(5, 3, &c.from_f64(0.1), &c, None),
            Err(OrbitError::InvalidRotation { .. })
        ));
    }

    #[test]
    fn semiconvergent_ladder_shape() {
        let frac = |s: &LadderStep| (s.p, s.q);
        let ladder = semiconvergent_ladder(1, 500);
        assert_eq!(frac(ladder.first().unwrap()), (1, 2));
        assert_eq!(frac(ladder.last().unwrap()), (1, 500));
        assert!(ladder.len() < 16, "{ladder:?}");
        let fours: Vec<(u64, u64)> = semiconvergent_ladder(3, 4).iter().map(frac).collect();
        assert_eq!(fours, vec![(1, 2), (2, 3), (3, 4)]);
        let ladder = semiconvergent_ladder(500, 1001);
        assert_eq!(frac(ladder.last().unwrap()), (500, 1001));
        assert!(ladder.iter().all(|s| s.p < s.q && s.q >= 2));
    }

    #[test]
    fn inverse_mod() {
        assert_eq!(inv_mod(3, 8), 3); // 3*3 = 9 = 1 mod 8
        assert_eq!(inv_mod(5, 8), 5);
        assert_eq!(inv_mod(1, 7), 1);
        assert_eq!(inv_mod(153, 209) * 153 % 209, 1);
    }
}

// ---------------------------------------------------------------------------
// Branch-certain symmetric orbits
// ---------------------------------------------------------------------------

/// Symmetry class of a reversible Birkhoff orbit: reflection through a
/// point of the orbit (vertex) or through the midpoint of two consecutive
/// points (edge), about an even (`x = 0`) or odd (`x = pi`) symmetry value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetryClass {
    pub edge: bool,
    pub parity: u8,
}

impl SymmetryClass {
    pub fn all() -> [SymmetryClass; 4] {
        [
            SymmetryClass { edge: false, parity: 0 },
            SymmetryClass { edge: false, parity: 1 },
            SymmetryClass { edge: true, parity: 0 },
            SymmetryClass { edge: true, parity: 1 },
        ]
    }
}

/// Newton on the symmetry-reduced half system.
///
/// The full orbit satisfies `X(i0+m) + X(i0-m) = 2c` (vertex) or
/// `X(i0+m) + X(i0+1-m) = 2c` (edge) with `c` a multiple of pi, so only
/// half the points are unknowns; the reflected neighbours fold into the
/// boundary rows of a plain tridiagonal Jacobian. No phase mode exists at
/// all, which is what makes deep near-critical orbits solvable and the
/// branch (which of the two Birkhoff partners) a deterministic function of
/// the symmetry class.
fn half_system_newton(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    class: SymmetryClass,
    center: &BigReal,
    mut u: Vec<BigReal>,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>, OrbitError> {
    let h = u.len();
    debug_assert!(h >= 1);
    let tol = ctx.eps_at(10);
    let loose = ctx.eps_at((ctx.digits() / 2) as i32);
    let two_pi_p = ctx.two_pi() * ctx.from_i64(p as i64);
    let q_even = q % 2 == 0;
    let fail = |reason: &str| OrbitError::NewtonDivergence {
        p,
        q,
        eps: eps_key(epsilon),
        reason: format!("{reason} at {} digits", ctx.digits()),
    };

    // neighbour configuration:
    //   vertex, q odd:  left(1) = c;              right(h) = 2c + 2pi p - u_h
    //   vertex, q even: left(1) = c;              right(h) = c + pi p (const)
    //   edge,   q odd:  left(1) = 2c - u_1;       right(h) = c + pi p (const)
    //   edge,   q even: left(1) = 2c - u_1;       right(h) = 2c + 2pi p - u_h
    let left_reflects = class.edge;
    let right_reflects = class.edge == q_even;
    let right_const = center + &(&two_pi_p * &ctx.from_f64(0.5));

    let assemble = |u: &[BigReal]| -> (Vec<BigReal>, Vec<BigReal>, BigReal, BigReal) {
        let mut f = Vec::with_capacity(h);
        let mut diag = Vec::with_capacity(h);
        let mut norm = ctx.zero();
        let mut merit = ctx.zero();
        for m in 0..h {
            let left = if m > 0 {
                u[m - 1].clone()
            } else if left_reflects {
                &(center + center) - &u[0]
            } else {
                center.clone()
            };
            let right = if m + 1 < h {
                u[m + 1].clone()
            } else if right_reflects {
                &(&(center + center) + &two_pi_p) - &u[h - 1]
            } else {
                right_const.clone()
            };
            let (s, c_) = u[m].sin_cos();
            let fi = &(&right - &(&u[m] + &u[m])) + &(&left - &(epsilon * &s));
            norm = norm.max(&fi.abs());
            merit += &fi.square();
            let mut d = -(&ctx.from_i64(2) + &(epsilon * &c_));
            if (m == 0 && left_reflects) || (m + 1 == h && right_reflects) {
                d -= &ctx.one();
            }
            f.push(fi);
            diag.push(d);
        }
        (f, diag, norm, merit)
    };

    let (mut f, mut diag, mut norm, mut merit) = assemble(&u);
    for _iter in 0..60 {
        if !norm.is_finite() {
            return Err(fail("residual overflow"));
        }
        if norm <= tol {
            return Ok(u);
        }
        let off = vec![ctx.one(); h.saturating_sub(1)];
        let delta = pinned_thomas(&diag, &off, &f, ctx).map_err(|e| match e {
            NumericsError::SingularSystem { .. } => OrbitError::SingularJacobian { p, q },
            other => OrbitError::Numerics(other),
        })?;
        let mut scale = ctx.one();
        let mut accepted = false;
        for _ in 0..10 {
            let trial: Vec<BigReal> = u
                .iter()
                .zip(&delta)
                .map(|(x, d)| x - &(d * &scale))
                .collect();
            let (tf, tdiag, tnorm, tmerit) = assemble(&trial);
            if tmerit.is_finite() && tmerit < merit {
                u = trial;
                f = tf;
                diag = tdiag;
                norm = tnorm;
                merit = tmerit;
                accepted = true;
                break;
            }
            scale = &scale * &ctx.from_f64(0.5);
        }
        if !accepted {
            break;
        }
    }
    if norm <= tol || norm <= loose {
        return Ok(u);
    }
    Err(fail(&format!("half-system Newton left residual {:.2e}", norm.to_f64())))
}

/// Find the elliptic Birkhoff orbit with branch certainty: solve the
/// symmetry-reduced system in every symmetry class, compute the residues
/// of the distinct solutions, and return the stable one.
pub fn find_elliptic(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    ctx: &PrecisionContext,
    donor: Option<&PeriodicOrbit>,
) -> Result<PeriodicOrbit, OrbitError> {
    if q <= 2 {
        return find_orbit(p, q, epsilon, ctx, donor);
    }
    // a donor orbit supplies the shape; fall back to the generic finder
    let shape = match donor {
        Some(d) if (&d.epsilon - epsilon).abs() < ctx.eps_at(6) => d.clone(),
        _ => find_orbit(p, q, epsilon, ctx, donor)?,
    };
    let mut stable: Option<PeriodicOrbit> = None;
    let mut any: Option<PeriodicOrbit> = None;
    let mut first_err: Option<OrbitError> = None;
    for class in SymmetryClass::all() {
        match symmetric_candidate(p, q, epsilon, class, &shape, ctx) {
            Ok(orbit) => {
                let is_stable = residue_sign(&orbit, ctx) != Some(false);
                if is_stable && stable.is_none() {
                    stable = Some(orbit);
                } else if any.is_none() {
                    any = Some(orbit);
                }
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
        if stable.is_some() {
            break;
        }
    }
    stable
        .or(any)
        .ok_or_else(|| first_err.unwrap_or(OrbitError::InvalidRotation { p, q }))
}

/// Expand a half representation into the full canonical orbit (time
/// order): `u` holds `X(j0+1) .. X(j0+h)` on the lift with the symmetric
/// site at time `j0` mapped to lift index 0.
fn expand_half(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    class: SymmetryClass,
    center: &BigReal,
    u: &[BigReal],
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    let n = q as usize;
    let two_pi_p = ctx.two_pi() * ctx.from_i64(p as i64);
    let h = u.len();
    // lift values for time indices j = -(n - h - 1) ..= h relative to the
    // symmetric site; X(j) + X(-j) = 2c (vertex) or X(j) + X(1 - j) = 2c
    // (edge), and X(j + q) = X(j) + 2 pi p.
    let mut points = vec![ctx.zero(); n];
    // the slot just past the unknowns is pinned for the classes where the
    // chain does not reflect back onto itself (see half_system_newton)
    let far_const = center + &(&two_pi_p * &ctx.from_f64(0.5));
    let x_at = |u: &[BigReal], j: i64| -> BigReal {
        // j = 0 is the centre (vertex) or derived from u[0] (edge);
        // j in 1..=h comes from u; j = h+1 is the pinned far constant.
        debug_assert!((0..=h as i64 + 1).contains(&j), "j {j} h {h}");
        if j == 0 {
            if class.edge {
                &(center + center) - &u[0]
            } else {
                center.clone()
            }
        } else if j == h as i64 + 1 {
            far_const.clone()
        } else {
            u[(j - 1) as usize].clone()
        }
    };
    let right_reflects = class.edge == (q % 2 == 0);
    for (offset, point) in points.iter_mut().enumerate() {
        // time index relative to the symmetric site, folded into one period
        let j = offset as i64;
        let direct_far = !right_reflects && j == h as i64 + 1;
        let (j_folded, wraps) = if j <= h as i64 || direct_far {
            (j, 0i64)
        } else {
            (j - n as i64, 1i64)
        };
        let value = if j_folded >= 0 {
            x_at(u, j_folded)
        } else {
            // reflection: vertex partner -j, edge partner 1 - j
            let partner = if class.edge { 1 - j_folded } else { -j_folded };
            debug_assert!(
                (0..=h as i64 + 1).contains(&partner),
                "partner {partner} h {h} q {q}"
            );
            &(center + center) - &x_at(u, partner)
        };
        *point = value + &(&two_pi_p * &ctx.from_i64(wraps));
    }
    finish_orbit(p, q, epsilon, points, ctx)
}

/// Half-system candidate in a given symmetry class, seeded from the shape
/// of a converged orbit (either branch).
fn symmetric_candidate(
    p: u64,
    q: u64,
    epsilon: &BigReal,
    class: SymmetryClass,
    shape: &PeriodicOrbit,
    ctx: &PrecisionContext,
) -> Result<PeriodicOrbit, OrbitError> {
    let n = q as usize;
    // seed in time order from the donor profile
    let seed = if (shape.p, shape.q) == (p, q) {
        shape.points.clone()
    } else {
        interpolated_seed(shape, p, q, &ctx.zero(), None, ctx)
    };
    let two_pi_p = ctx.two_pi() * ctx.from_i64(p as i64);
    let x_lift = |j: i64| -> BigReal {
        let idx = j.rem_euclid(n as i64) as usize;
        let wraps = (j - idx as i64).div_euclid(n as i64);
        &seed[idx] + &(&two_pi_p * &ctx.from_i64(wraps))
    };
    // choose the time index whose vertex (or following-edge midpoint) sits
    // closest to a symmetry value of the requested parity
    let pi = ctx.pi();
    let half = ctx.from_f64(0.5);
    let mut best: Option<(usize, BigReal, BigReal)> = None;
    for j0 in 0..n {
        let pos = if class.edge {
            (&x_lift(j0 as i64) + &x_lift(j0 as i64 + 1)) * &half
        } else {
            seed[j0].clone()
        };
        let k = (&(&pos / &pi) + &half).floor();
        let k_i = k.to_f64() as i64;
        let k = if k_i.rem_euclid(2) == i64::from(class.parity) {
            k
        } else {
            let lo = ctx.from_i64(k_i - 1);
            let hi = ctx.from_i64(k_i + 1);
            if (&pos - &(&lo * &pi)).abs() < (&pos - &(&hi * &pi)).abs() { lo } else { hi }
        };
        let target = &k * &pi;
        let offset = pos - &target;
        let better = match &best {
            None => true,
            Some((_, b, _)) => offset.abs() < b.abs(),
        };
        if better {
            best = Some((j0, offset, target));
        }
    }
    let (j0, offset, center) = best.expect("nonempty");
    let h = if q % 2 == 0 {
        if class.edge { n / 2 } else { n / 2 - 1 }
    } else {
        (n - 1) / 2
    };
    if h == 0 {
        return Err(OrbitError::InvalidRotation { p, q });
    }
    let mut u = Vec::with_capacity(h);
    for m in 1..=h {
        u.push(&x_lift((j0 + m) as i64) - &offset);
    }
    let u = half_system_newton(p, q, epsilon, class, &center, u, ctx)?;
    expand_half(p, q, epsilon, class, &center, &u, ctx)
}
