//! Greene's residue criterion: classify a perturbation strength as sub- or
//! supercritical from the residues of periodic orbits along the convergents
//! of the rotation number, and bisect to the critical function `eps_c`.
//!
//! A single engine instance carries the precision schedule, the
//! classification thresholds, an in-memory orbit store (so orbits seed
//! their neighbours along the convergent chain and across nearby `eps`)
//! and an optional on-disk cache keyed by `(p, q, eps, schedule)`.
//! Residues computed once are reused across bisection steps and across
//! rotation numbers that share convergents.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::{CacheKey, DiskCache};
use crate::numerics::{linear_fit, BigReal, NumericsError, PrecisionContext};
use crate::orbits::{self, OrbitError, PeriodicOrbit, PrecisionSchedule};
use crate::rotation::{ContinuedFraction, RotationError};

#[derive(Debug, Error)]
pub enum GreeneError {
    #[error("bisection inconclusive for {omega}: bracket [{lo}, {hi}] at k_max={k_max}")]
    Inconclusive { omega: String, lo: String, hi: String, k_max: usize },
    #[error("decay rate requires a subcritical eps; classification was {got:?}")]
    NotSubcritical { got: Classification },
    #[error("convergent denominator exceeds the configured budget (q_{k} > {max_q})")]
    BudgetExceeded { k: usize, max_q: u64 },
    #[error("supercritical verdict at eps={lower} contradicts subcritical at eps={higher}")]
    NonMonotone { lower: String, higher: String },
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Rotation(#[from] RotationError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Subcritical,
    Supercritical,
    Undecided,
}

/// Thresholds for the residue criterion.
///
/// The absolute rules sit far from the critical plateau (residues near
/// criticality hover around 0.25 for noble tails). Close to `eps_c` the
/// decay/divergence is too slow for the absolute thresholds at realistic
/// convergent depth, so a second pair of trend rules compares residues one
/// tail period apart: ratios consistently below `ratio_down` mean decay
/// (subcritical), consistently above `ratio_up` mean divergence. The
/// plateau itself holds the ratio within a fraction of a percent of 1, so
/// the undecidable zone shrinks geometrically with depth.
#[derive(Debug, Clone)]
pub struct ClassificationRules {
    /// `|R| > r_high` at any depth means unstable: supercritical.
    pub r_high: f64,
    /// The last `window` residues below `r_low` and decreasing: subcritical.
    pub r_low: f64,
    pub window: usize,
    /// Period-strided ratio bounds for the near-critical trend rules.
    pub ratio_down: f64,
    pub ratio_up: f64,
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self { r_high: 10.0, r_low: 1e-3, window: 3, ratio_down: 0.98, ratio_up: 1.02 }
    }
}

#[derive(Debug, Clone)]
pub struct GreeneOptions {
    pub schedule: PrecisionSchedule,
    pub rules: ClassificationRules,
    /// Orbits with larger denominators are out of budget.
    pub max_q: Option<u64>,
    /// How far `k_max` may escalate beyond the initial request before a
    /// bisection gives up.
    pub k_escalation_limit: usize,
    /// Stop a bisection after this many classification steps, returning
    /// the partial estimate (used to exercise crash-resume).
    pub bisection_step_limit: Option<usize>,
}

impl Default for GreeneOptions {
    fn default() -> Self {
        Self {
            schedule: PrecisionSchedule::default(),
            rules: ClassificationRules::default(),
            max_q: None,
            k_escalation_limit: 16,
            bisection_step_limit: None,
        }
    }
}

/// One residue along a convergent chain.
#[derive(Debug, Clone)]
pub struct ResidueEntry {
    pub k: usize,
    pub p: u64,
    pub q: u64,
    pub value: BigReal,
    pub trace: BigReal,
    pub cancellation_digits: i64,
    pub accuracy_digits: i64,
    pub digits: u32,
}

impl ResidueEntry {
    /// Below this magnitude the residue is indistinguishable from zero at
    /// the accuracy it was computed with.
    pub fn noise_floor(&self) -> f64 {
        10f64.powf(-(self.accuracy_digits as f64) + 6.0)
    }

    pub fn is_negligible(&self) -> bool {
        self.value.abs().to_f64() < self.noise_floor()
    }
}

/// Residues of the periodic orbits approximating `omega` at fixed `eps`.
#[derive(Debug, Clone)]
pub struct ResidueSequence {
    pub omega: ContinuedFraction,
    pub epsilon: BigReal,
    pub entries: Vec<ResidueEntry>,
}

impl ResidueSequence {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,p,q,residue,digits\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.k,
                e.p,
                e.q,
                e.value.to_significant(20),
                e.digits
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BisectionStep {
    pub epsilon: String,
    pub verdict: Classification,
    pub k_used: usize,
}

/// Bisection bracket and classification history for `eps_c(omega)`.
///
/// The reported value is the bracket midpoint with half-width error.
#[derive(Debug, Clone)]
pub struct CriticalEstimate {
    pub omega: ContinuedFraction,
    pub lo: BigReal,
    pub hi: BigReal,
    pub k_max: usize,
    pub history: Vec<BisectionStep>,
}

impl CriticalEstimate {
    pub fn value(&self) -> BigReal {
        (&self.lo + &self.hi) / bracket_ctx().from_i64(2)
    }

    pub fn error(&self) -> BigReal {
        (&self.hi - &self.lo) / bracket_ctx().from_i64(2)
    }
}

/// Bracket arithmetic context: bisection midpoints are dyadic, and 38
/// digits hold them exactly for any realistic target.
fn bracket_ctx() -> PrecisionContext {
    PrecisionContext::new(38).unwrap()
}

fn eps_key(eps: &BigReal) -> String {
    eps.to_significant(25)
}

pub struct GreeneEngine {
    pub options: GreeneOptions,
    cache: Option<DiskCache>,
    store: HashMap<(u64, u64), Vec<PeriodicOrbit>>,
}

impl GreeneEngine {
    pub fn new(options: GreeneOptions) -> Self {
        Self { options, cache: None, store: HashMap::new() }
    }

    pub fn with_cache(options: GreeneOptions, cache: DiskCache) -> Self {
        Self { options, cache: Some(cache), store: HashMap::new() }
    }

    fn schedule_fingerprint(&self) -> String {
        self.options
            .schedule
            .tiers
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Convergents of `omega` as machine integers, respecting the budget.
    fn convergent_u64(
        &self,
        omega: &ContinuedFraction,
        k: usize,
    ) -> Result<(u64, u64), GreeneError> {
        let conv = omega.convergents(k)?;
        let last = conv.last().unwrap();
        let (p, q) = last
            .as_u64()
            .ok_or(GreeneError::BudgetExceeded { k, max_q: u64::MAX })?;
        if let Some(max_q) = self.options.max_q {
            if q > max_q {
                return Err(GreeneError::BudgetExceeded { k, max_q });
            }
        }
        Ok((p, q))
    }

    /// Deepest usable k not exceeding `k_max` under the q budget.
    pub fn deepest_k(&self, omega: &ContinuedFraction, k_max: usize) -> usize {
        let cap = match self.options.max_q {
            None => k_max,
            Some(max_q) => {
                let mut k = 0;
                for kk in 1..=k_max {
                    match omega.convergents(kk) {
                        Ok(conv) => match conv.last().unwrap().as_u64() {
                            Some((_, q)) if q <= max_q => k = kk,
                            _ => break,
                        },
                        Err(_) => break,
                    }
                }
                k
            }
        };
        if let Some(len) = omega.expansion_len() {
            cap.min(len)
        } else {
            cap
        }
    }

    fn remember(&mut self, orbit: PeriodicOrbit) {
        let slot = self.store.entry((orbit.p, orbit.q)).or_default();
        slot.push(orbit);
        if slot.len() > 3 {
            slot.remove(0);
        }
    }

    fn seed_from_store(&self, p: u64, q: u64, eps: &BigReal) -> Option<&PeriodicOrbit> {
        let slot = self.store.get(&(p, q))?;
        slot.iter().min_by(|a, b| {
            (&a.epsilon - eps).abs().cmp_total(&(&b.epsilon - eps).abs())
        })
    }

    fn load_cached_orbit(&self, p: u64, q: u64, eps: &BigReal) -> Option<PeriodicOrbit> {
        let cache = self.cache.as_ref()?;
        for &digits in self.options.schedule.tiers.iter().rev() {
            let key = CacheKey::Orbit { p, q, eps: eps_key(eps), digits };
            if let Some(text) = cache.get(&key) {
                if let Some(orbit) = PeriodicOrbit::deserialize(&text) {
                    return Some(orbit);
                }
            }
        }
        None
    }

    /// Residue of the `(p, q)` orbit at `eps` under the engine schedule,
    /// consulting caches and the orbit store. `chain` is the orbit of the
    /// previous convergent at the same `eps`, used as a cold-start donor.
    pub fn residue_for(
        &mut self,
        k: usize,
        p: u64,
        q: u64,
        eps: &BigReal,
        chain: Option<&PeriodicOrbit>,
    ) -> Result<ResidueEntry, GreeneError> {
        let fingerprint = self.schedule_fingerprint();
        let rkey = CacheKey::Residue { p, q, eps: eps_key(eps), schedule: fingerprint };
        if let Some(payload) = self.cache.as_ref().and_then(|c| c.get(&rkey)) {
            if let Some(entry) = parse_residue_payload(&payload, k, p, q) {
                return Ok(entry);
            }
        }

        let disk_orbit = self.load_cached_orbit(p, q, eps);
        let seed = disk_orbit.as_ref().or_else(|| {
            let near = self.seed_from_store(p, q, eps);
            if let Some(orbit) = near {
                // an own-orbit at nearby eps beats a chain donor: the
                // 0.05-step continuation is cheaper than a cold ladder
                let close = (&orbit.epsilon - eps).abs().to_f64() <= 0.3;
                if close {
                    return Some(orbit);
                }
            }
            chain.or(near)
        });

        let (orbit, res) = orbits::residue_at(p, q, eps, &self.options.schedule, seed)?;
        if let Some(cache) = self.cache.as_ref() {
            let okey = CacheKey::Orbit { p, q, eps: eps_key(eps), digits: orbit.digits };
            let _ = cache.put(&okey, &orbit.serialize());
            let payload = format!(
                "{} {} {} {} {}",
                orbit.digits,
                res.cancellation_digits,
                res.accuracy_digits,
                res.value.to_exact_string(),
                res.trace.to_exact_string(),
            );
            let _ = cache.put(&rkey, &payload);
        }
        let entry = ResidueEntry {
            k,
            p,
            q,
            value: res.value,
            trace: res.trace,
            cancellation_digits: res.cancellation_digits,
            accuracy_digits: res.accuracy_digits,
            digits: orbit.digits,
        };
        self.remember(orbit);
        Ok(entry)
    }

    /// Classify `eps` against `eps_c(omega)` from residues along the first
    /// `k_max` convergents. Early exit on divergence.
    pub fn classify(
        &mut self,
        omega: &ContinuedFraction,
        eps: &BigReal,
        k_max: usize,
    ) -> Result<(Classification, ResidueSequence), GreeneError> {
        if eps.is_zero() {
            // all residues are exactly zero
            return Ok((
                Classification::Subcritical,
                ResidueSequence { omega: omega.clone(), epsilon: eps.clone(), entries: vec![] },
            ));
        }
        let rules = self.options.rules.clone();
        let mut entries: Vec<ResidueEntry> = Vec::new();
        let mut chain: Option<PeriodicOrbit> = None;
        let deepest = self.deepest_k(omega, k_max);
        for k in 1..=deepest {
            let (p, q) = self.convergent_u64(omega, k)?;
            let entry = self.residue_for(k, p, q, eps, chain.as_ref())?;
            chain = self.store.get(&(p, q)).and_then(|v| v.last().cloned());
            let blown = entry.value.abs().to_f64() > rules.r_high;
            entries.push(entry);
            if blown {
                return Ok((
                    Classification::Supercritical,
                    ResidueSequence { omega: omega.clone(), epsilon: eps.clone(), entries },
                ));
            }
        }
        let mut verdict = subcritical_verdict(&entries, &rules);
        if verdict == Classification::Undecided {
            verdict = trend_verdict(&entries, omega.tail().len().max(1), &rules);
        }
        Ok((verdict, ResidueSequence { omega: omega.clone(), epsilon: eps.clone(), entries }))
    }

    /// Bisect to the critical function of `omega`.
    ///
    /// The bracket starts at [0, 2] (the critical function is maximal at
    /// the golden mean, well below 1) unless `resume` carries the state of
    /// an interrupted run. `observer` sees the estimate after every
    /// classification, which is what makes runs resumable.
    pub fn critical_function(
        &mut self,
        omega: &ContinuedFraction,
        target_digits: u32,
        k_max: usize,
        resume: Option<CriticalEstimate>,
        mut observer: impl FnMut(&CriticalEstimate),
    ) -> Result<CriticalEstimate, GreeneError> {
        let ctx = bracket_ctx();
        let mut estimate = resume.unwrap_or_else(|| CriticalEstimate {
            omega: omega.clone(),
            lo: ctx.zero(),
            hi: ctx.from_i64(2),
            k_max,
            history: Vec::new(),
        });
        let k_ceiling = k_max + self.options.k_escalation_limit;
        let half = ctx.from_f64(0.5);
        let width_target = ctx.eps_at(ctx.digits() as i32 - target_digits as i32);

        while &(&estimate.hi - &estimate.lo) * &half > width_target {
            if let Some(limit) = self.options.bisection_step_limit {
                if estimate.history.len() >= limit {
                    return Ok(estimate);
                }
            }
            let mid = (&estimate.lo + &estimate.hi) * &half;
            let (verdict, seq) = self.classify(omega, &mid, estimate.k_max)?;
            estimate.history.push(BisectionStep {
                epsilon: eps_key(&mid),
                verdict,
                k_used: seq.entries.len(),
            });
            match verdict {
                Classification::Subcritical => estimate.lo = mid,
                Classification::Supercritical => estimate.hi = mid,
                Classification::Undecided => {
                    let next_k = estimate.k_max + 4;
                    let deepest = self.deepest_k(omega, next_k);
                    if next_k > k_ceiling || deepest <= estimate.k_max {
                        return Err(GreeneError::Inconclusive {
                            omega: omega.to_bracket(),
                            lo: eps_key(&estimate.lo),
                            hi: eps_key(&estimate.hi),
                            k_max: estimate.k_max,
                        });
                    }
                    estimate.k_max = next_k;
                }
            }
            observer(&estimate);
        }
        Ok(estimate)
    }

    /// Residues at fixed `eps` (typically a critical value) along the
    /// convergents `k_range`.
    ///
    /// Here, unlike during classification, the branch matters: published
    /// critical residues belong to the elliptic partner, so each orbit is
    /// re-solved through the symmetry-reduced system that makes the branch
    /// choice deterministic.
    pub fn critical_residues(
        &mut self,
        omega: &ContinuedFraction,
        eps: &BigReal,
        k_range: std::ops::RangeInclusive<usize>,
    ) -> Result<ResidueSequence, GreeneError> {
        let mut entries = Vec::new();
        let mut chain: Option<PeriodicOrbit> = None;
        for k in 1..=*k_range.end() {
            let (p, q) = self.convergent_u64(omega, k)?;
            let entry = self.residue_for_elliptic(k, p, q, eps, chain.as_ref())?;
            chain = self.store.get(&(p, q)).and_then(|v| v.last().cloned());
            if k >= *k_range.start() {
                entries.push(entry);
            }
        }
        Ok(ResidueSequence { omega: omega.clone(), epsilon: eps.clone(), entries })
    }

    /// Branch-certain variant of [`Self::residue_for`]: the elliptic orbit
    /// via the symmetry-reduced solver, escalating precision on the same
    /// schedule.
    pub fn residue_for_elliptic(
        &mut self,
        k: usize,
        p: u64,
        q: u64,
        eps: &BigReal,
        chain: Option<&PeriodicOrbit>,
    ) -> Result<ResidueEntry, GreeneError> {
        let fingerprint = format!("ell-{}", self.schedule_fingerprint());
        let rkey = CacheKey::Residue { p, q, eps: eps_key(eps), schedule: fingerprint };
        if let Some(payload) = self.cache.as_ref().and_then(|c| c.get(&rkey)) {
            if let Some(entry) = parse_residue_payload(&payload, k, p, q) {
                return Ok(entry);
            }
        }
        let mut result: Option<(PeriodicOrbit, orbits::Residue)> = None;
        let mut last_err: Option<OrbitError> = None;
        for &digits in &self.options.schedule.tiers.clone() {
            let ctx = match PrecisionContext::new(digits) {
                Ok(c) => c,
                Err(e) => return Err(GreeneError::Numerics(e)),
            };
            let eps_here = ctx.parse(&eps.to_exact_string()).unwrap();
            let seed = self
                .seed_from_store(p, q, eps)
                .cloned()
                .or_else(|| chain.cloned());
            match orbits::find_elliptic(p, q, &eps_here, &ctx, seed.as_ref()) {
                Ok(orbit) => match orbits::residue(&orbit, &ctx) {
                    Ok(res) => {
                        result = Some((orbit, res));
                        break;
                    }
                    Err(OrbitError::PrecisionExhausted { .. }) => {
                        self.remember(orbit);
                    }
                    Err(e) => return Err(e.into()),
                },
                Err(e) => last_err = Some(e),
            }
        }
        let (orbit, res) = match result {
            Some(v) => v,
            None => {
                return Err(last_err
                    .unwrap_or(OrbitError::BudgetExhausted {
                        p,
                        q,
                        eps: eps_key(eps),
                        top: *self.options.schedule.tiers.last().unwrap(),
                    })
                    .into())
            }
        };
        if let Some(cache) = self.cache.as_ref() {
            let payload = format!(
                "{} {} {} {} {}",
                orbit.digits,
                res.cancellation_digits,
                res.accuracy_digits,
                res.value.to_exact_string(),
                res.trace.to_exact_string(),
            );
            let _ = cache.put(&rkey, &payload);
        }
        let entry = ResidueEntry {
            k,
            p,
            q,
            value: res.value,
            trace: res.trace,
            cancellation_digits: res.cancellation_digits,
            accuracy_digits: res.accuracy_digits,
            digits: orbit.digits,
        };
        self.remember(orbit);
        Ok(entry)
    }

    /// Residue with its *value* resolved: deep-subcritical residues pass
    /// the trace-cancellation gate long before the tiny value itself is
    /// distinguishable from rounding noise, so climb the remaining tiers
    /// until it is (or the schedule runs out).
    pub fn residue_value_resolved(
        &mut self,
        k: usize,
        p: u64,
        q: u64,
        eps: &BigReal,
        chain: Option<&PeriodicOrbit>,
    ) -> Result<ResidueEntry, GreeneError> {
        let mut entry = self.residue_for(k, p, q, eps, chain)?;
        let tiers: Vec<u32> = self.options.schedule.tiers.clone();
        for digits in tiers {
            if !entry.is_negligible() {
                break;
            }
            if digits <= entry.digits {
                continue;
            }
            let single = PrecisionSchedule { tiers: vec![digits] };
            let seed = self.seed_from_store(p, q, eps).cloned();
            match orbits::residue_at(p, q, eps, &single, seed.as_ref()) {
                Ok((orbit, res)) => {
                    entry = ResidueEntry {
                        k,
                        p,
                        q,
                        value: res.value,
                        trace: res.trace,
                        cancellation_digits: res.cancellation_digits,
                        accuracy_digits: res.accuracy_digits,
                        digits: orbit.digits,
                    };
                    self.remember(orbit);
                }
                // best effort: residues this deep below threshold decide
                // nothing, so an unresolved value is kept as negligible
                Err(_) => break,
            }
        }
        Ok(entry)
    }

    /// Refine a bracketed critical value by plateau matching: exactly at
    /// `eps_c` the deep residues sit on their limit cycle, so the strided
    /// difference `R_k(eps) - R_{k-2m}(eps)` (m = tail period, stride
    /// doubled to stay on the same cycle phase) vanishes; away from it the
    /// difference grows geometrically in k. A few secant steps on that
    /// difference sharpen a bisection bracket by several digits.
    pub fn refine_critical_plateau(
        &mut self,
        omega: &ContinuedFraction,
        guess: &BigReal,
        spread: &BigReal,
        k_hi: usize,
    ) -> Result<BigReal, GreeneError> {
        let ctx = bracket_ctx();
        let period = omega.tail().len().max(1);
        let stride = 2 * period;
        let k_hi = self.deepest_k(omega, k_hi);
        if k_hi <= stride {
            return Ok(guess.clone());
        }
        let k_lo = k_hi - stride;
        let (p_hi, q_hi) = self.convergent_u64(omega, k_hi)?;
        let (p_lo, q_lo) = self.convergent_u64(omega, k_lo)?;
        let mut diff_at = |eps: &BigReal| -> Result<BigReal, GreeneError> {
            let lo = self.residue_for_elliptic(k_lo, p_lo, q_lo, eps, None)?;
            let hi = self.residue_for_elliptic(k_hi, p_hi, q_hi, eps, None)?;
            Ok(&hi.value - &lo.value)
        };
        let mut e0 = guess - spread;
        let mut e1 = guess + spread;
        let mut g0 = diff_at(&e0)?;
        let mut g1 = diff_at(&e1)?;
        for _ in 0..8 {
            let denom = &g1 - &g0;
            if denom.abs() < ctx.eps_at(8) {
                break;
            }
            let next = &e1 - &(&g1 * &(&e1 - &e0) / &denom);
            if (&next - &e1).abs() < ctx.eps_at(28) {
                return Ok(next);
            }
            e0 = std::mem::replace(&mut e1, next);
            g0 = std::mem::replace(&mut g1, diff_at(&e1)?);
        }
        Ok(e1)
    }

    /// Exponential decay rate of subcritical residues: minus the
    /// least-squares slope of `log R_k` against `q_k`.
    ///
    /// At `eps = 0` all residues vanish identically and the rate is
    /// reported as the `+inf` sentinel rather than an error.
    pub fn decay_rate(
        &mut self,
        omega: &ContinuedFraction,
        eps: &BigReal,
        k_range: std::ops::RangeInclusive<usize>,
    ) -> Result<BigReal, GreeneError> {
        let ctx = bracket_ctx();
        if eps.is_zero() {
            return Ok(BigReal::infinity(&ctx));
        }
        let (verdict, _) = self.classify(omega, eps, *k_range.end())?;
        if verdict != Classification::Subcritical {
            return Err(GreeneError::NotSubcritical { got: verdict });
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in *k_range.start()..=self.deepest_k(omega, *k_range.end()) {
            let (p, q) = self.convergent_u64(omega, k)?;
            let entry = self.residue_value_resolved(k, p, q, eps, None)?;
            if entry.is_negligible() || entry.value.is_zero() {
                continue;
            }
            xs.push(ctx.from_i64(entry.q as i64));
            ys.push(ctx.parse(&entry.value.abs().to_significant(30)).unwrap().ln());
        }
        if xs.len() < 2 {
            return Ok(BigReal::infinity(&ctx));
        }
        let fit = linear_fit(&xs, &ys)?;
        Ok(-fit.slope)
    }
}

/// Subcritical test: the last `window` residues all below `r_low`, each
/// one smaller than its predecessor or indistinguishable from zero.
fn subcritical_verdict(entries: &[ResidueEntry], rules: &ClassificationRules) -> Classification {
    if entries.len() < rules.window {
        return Classification::Undecided;
    }
    let tail = &entries[entries.len() - rules.window..];
    if !tail.iter().all(|e| e.value.abs().to_f64() < rules.r_low) {
        return Classification::Undecided;
    }
    for pair in tail.windows(2) {
        let decreasing = pair[1].value.abs() < pair[0].value.abs();
        if !(decreasing || pair[1].is_negligible()) {
            return Classification::Undecided;
        }
    }
    Classification::Subcritical
}



/// Near-critical trend rule: residues one tail period apart shrink
/// (subcritical) or grow (supercritical) consistently. Quadratic
/// irrationals with period-m tails approach an m-periodic residue cycle at
/// criticality, so the stride keeps like with like.
fn trend_verdict(
    entries: &[ResidueEntry],
    period: usize,
    rules: &ClassificationRules,
) -> Classification {
    const BAND_FLOOR: f64 = 1e-6;
    let below_band = |e: &ResidueEntry| e.is_negligible() || e.value.abs().to_f64() < BAND_FLOOR;

    // Trailing residues that already collapsed below the band are decay
    // evidence on their own; divergence can never produce them (the
    // absolute r_high exit fires first).
    let mut end = entries.len();
    let mut collapsed = 0usize;
    while end > 0 && below_band(&entries[end - 1]) {
        end -= 1;
        collapsed += 1;
    }
    if collapsed >= rules.window {
        return Classification::Subcritical;
    }
    if end < period + rules.window {
        return Classification::Undecided;
    }
    let mut ratios = Vec::with_capacity(rules.window);
    for j in 0..rules.window {
        let hi = &entries[end - 1 - j];
        let lo = &entries[end - 1 - j - period];
        if below_band(lo) || lo.value.abs().to_f64() > rules.r_high {
            return Classification::Undecided;
        }
        ratios.push(hi.value.abs().to_f64() / lo.value.abs().to_f64());
    }
    if collapsed == 0 && ratios.iter().all(|&r| r > rules.ratio_up) {
        Classification::Supercritical
    } else if ratios.iter().all(|&r| r < rules.ratio_down) {
        Classification::Subcritical
    } else {
        Classification::Undecided
    }
}

fn parse_residue_payload(payload: &str, k: usize, p: u64, q: u64) -> Option<ResidueEntry> {
    let mut it = payload.split_whitespace();
    let digits: u32 = it.next()?.parse().ok()?;
    let cancellation_digits: i64 = it.next()?.parse().ok()?;
    let accuracy_digits: i64 = it.next()?.parse().ok()?;
    let ctx = PrecisionContext::new(digits).ok()?;
    let value = ctx.parse(it.next()?).ok()?;
    let trace = ctx.parse(it.next()?).ok()?;
    Some(ResidueEntry { k, p, q, value, trace, cancellation_digits, accuracy_digits, digits })
}
