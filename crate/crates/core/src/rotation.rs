//! Rotation numbers as continued fractions: convergents, numeric value,
//! Bryuno function, and the near-resonance families used throughout.
//!
//! A rotation number lives in (0,1) and is written `[a1,a2,...]` meaning
//! `1/(a1 + 1/(a2 + ...))`. We represent a finite head plus an eventually
//! periodic tail, so rationals (empty tail) and quadratic irrationals are
//! both first-class. The periodic tail is handled in closed form (the tail
//! value solves a quadratic), never by deep truncation: Bryuno values for
//! heads like `[60000, (1)]` then cost O(head length) at full accuracy.

use std::fmt;

use rug::Integer;
use thiserror::Error;

use crate::numerics::{BigReal, PrecisionContext};

#[derive(Debug, Error)]
pub enum RotationError {
    #[error("invalid bracket notation `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("rational rotation number has only {available} convergents, {requested} requested")]
    ExhaustedExpansion { available: usize, requested: usize },
    #[error("Bryuno function diverges at rational rotation numbers")]
    RationalRotation,
    #[error("family descriptor must contain exactly one `n` placeholder: `{0}`")]
    BadFamily(String),
}

/// Rotation number in (0,1): finite head of partial quotients plus an
/// eventually repeating tail (empty tail = rational).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContinuedFraction {
    head: Vec<u64>,
    tail: Vec<u64>,
}

impl ContinuedFraction {
    pub fn new(head: Vec<u64>, tail: Vec<u64>) -> Result<Self, RotationError> {
        if head.is_empty() && tail.is_empty() {
            return Err(RotationError::Parse {
                input: String::new(),
                reason: "empty expansion".into(),
            });
        }
        if head.iter().chain(&tail).any(|&a| a == 0) {
            return Err(RotationError::Parse {
                input: format!("{head:?},{tail:?}"),
                reason: "partial quotients must be positive".into(),
            });
        }
        Ok(Self { head, tail })
    }

    pub fn head(&self) -> &[u64] {
        &self.head
    }

    pub fn tail(&self) -> &[u64] {
        &self.tail
    }

    pub fn is_rational(&self) -> bool {
        self.tail.is_empty()
    }

    /// Partial quotient `a_k`, 1-based, unfolding the periodic tail.
    pub fn quotient(&self, k: usize) -> Option<u64> {
        debug_assert!(k >= 1);
        let idx = k - 1;
        if idx < self.head.len() {
            Some(self.head[idx])
        } else if self.tail.is_empty() {
            None
        } else {
            Some(self.tail[(idx - self.head.len()) % self.tail.len()])
        }
    }

    /// Number of convergents a rational expansion supports (`None` if
    /// infinite).
    pub fn expansion_len(&self) -> Option<usize> {
        self.is_rational().then_some(self.head.len())
    }

    /// Canonical bracket notation, e.g. `[2,500,(1)]` or `[3,7]`.
    pub fn to_bracket(&self) -> String {
        let head: Vec<String> = self.head.iter().map(|a| a.to_string()).collect();
        let mut parts = head;
        if !self.tail.is_empty() {
            let tail: Vec<String> = self.tail.iter().map(|a| a.to_string()).collect();
            parts.push(format!("({})", tail.join(",")));
        }
        format!("[{}]", parts.join(","))
    }

    /// Parse bracket notation.
    ///
    /// Accepted forms: `[a1,...,aN]` (rational), `[a1,...,(t1,...,tm)]`
    /// (periodic tail), and the superscript alias `d^inf` for `(d)` as the
    /// last element. Whitespace is ignored.
    pub fn parse(input: &str) -> Result<Self, RotationError> {
        let err = |reason: &str| RotationError::Parse {
            input: input.into(),
            reason: reason.into(),
        };
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err("expected [...]"))?;
        if inner.is_empty() || inner.ends_with(',') {
            return Err(err("empty expansion element"));
        }
        let mut head = Vec::new();
        let mut tail = Vec::new();
        let mut rest = inner;
        while !rest.is_empty() {
            if !tail.is_empty() {
                return Err(err("periodic tail must be the final element"));
            }
            if let Some(t) = rest.strip_prefix('(') {
                let close = t.find(')').ok_or_else(|| err("unterminated ("))?;
                for piece in t[..close].split(',') {
                    tail.push(parse_quotient(piece).ok_or_else(|| err("bad tail digit"))?);
                }
                rest = &t[close + 1..];
                rest = rest.strip_prefix(',').unwrap_or(rest);
                continue;
            }
            let (piece, remainder) = match rest.find(',') {
                Some(i) => (&rest[..i], &rest[i + 1..]),
                None => (rest, ""),
            };
            rest = remainder;
            // "d^inf" / "d^∞" means an all-d periodic tail
            if let Some(base) = piece.strip_suffix("^inf").or_else(|| piece.strip_suffix("^∞")) {
                tail.push(parse_quotient(base).ok_or_else(|| err("bad tail digit"))?);
                continue;
            }
            head.push(parse_quotient(piece).ok_or_else(|| err("bad partial quotient"))?);
        }
        Self::new(head, tail).map_err(|_| err("invalid partial quotients"))
    }

    /// First `count` convergents by the standard recurrence
    /// `p_k = a_k p_{k-1} + p_{k-2}`, `q_k = a_k q_{k-1} + q_{k-2}`
    /// with exact integer arithmetic.
    pub fn convergents(&self, count: usize) -> Result<Vec<Convergent>, RotationError> {
        assert!(count >= 1);
        if let Some(len) = self.expansion_len() {
            if count > len {
                return Err(RotationError::ExhaustedExpansion {
                    available: len,
                    requested: count,
                });
            }
        }
        let mut out = Vec::with_capacity(count);
        let (mut p_prev, mut p) = (Integer::from(1), Integer::from(0));
        let (mut q_prev, mut q) = (Integer::from(0), Integer::from(1));
        for k in 1..=count {
            let a = self.quotient(k).expect("length checked");
            let p_next = Integer::from(&p * a) + &p_prev;
            let q_next = Integer::from(&q * a) + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            out.push(Convergent {
                k,
                p: p.clone(),
                q: q.clone(),
            });
        }
        Ok(out)
    }

    /// Numeric value at context precision.
    ///
    /// The periodic tail value is the positive root of its fixed-point
    /// quadratic; the head is then unwound by `x -> 1/(a + x)`.
    pub fn value(&self, ctx: &PrecisionContext) -> BigReal {
        let mut x = if self.tail.is_empty() {
            ctx.zero()
        } else {
            tail_value(&self.tail, ctx)
        };
        for &a in self.head.iter().rev() {
            x = (ctx.from_i64(a as i64) + x).recip();
        }
        x
    }

    /// Bryuno function `B(omega)`, finite iff the tail is nonempty.
    ///
    /// Over one tail period the recursion composes to an affine relation
    /// `B = L + M B`, solved exactly; the head is unwound afterwards.
    pub fn bryuno(&self, ctx: &PrecisionContext) -> Result<BryunoValue, RotationError> {
        if self.is_rational() {
            return Err(RotationError::RationalRotation);
        }
        let tau = tail_value(&self.tail, ctx);
        // One period starting at the tail: y_{i+1} = frac(1/y_i) is realised
        // exactly by y_{i+1} = 1/y_i - t_i.
        let mut l = ctx.zero();
        let mut m = ctx.one();
        let mut y = tau.clone();
        for &t in &self.tail {
            l += &(&m * &(-y.ln()));
            m *= &y;
            y = y.recip() - ctx.from_i64(t as i64);
        }
        let mut b = l / (ctx.one() - m);
        // Unwind the head: B(1/(a+x)) = log(a+x) + B(x)/(a+x).
        let mut x = tau;
        for &a in self.head.iter().rev() {
            let denom = ctx.from_i64(a as i64) + &x;
            b = denom.ln() + &(&b / &denom);
            x = denom.recip();
        }
        let ops = (self.head.len() + self.tail.len()) as f64;
        let digits_valid = ctx.digits().saturating_sub(2 + ops.log10().ceil().max(0.0) as u32);
        Ok(BryunoValue {
            omega: self.clone(),
            value: b,
            digits_valid,
        })
    }
}

fn parse_quotient(s: &str) -> Option<u64> {
    let v = s.parse::<u64>().ok()?;
    (v >= 1).then_some(v)
}

/// `[(t1,...,tm)]` as the positive root of its fixed-point quadratic.
///
/// One period acts as the Moebius map `x -> (p_{m-1} x + p_m)/(q_{m-1} x + q_m)`
/// built from the period's convergents, so the tail value solves
/// `q_{m-1} x^2 + (q_m - p_{m-1}) x - p_m = 0`.
fn tail_value(tail: &[u64], ctx: &PrecisionContext) -> BigReal {
    let (mut p_prev, mut p) = (Integer::from(1), Integer::from(0));
    let (mut q_prev, mut q) = (Integer::from(0), Integer::from(1));
    for &a in tail {
        let p_next = Integer::from(&p * a) + &p_prev;
        let q_next = Integer::from(&q * a) + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
    let a = ctx.from_integer(&q_prev);
    let b = ctx.from_integer(&q) - ctx.from_integer(&p_prev);
    let c = -ctx.from_integer(&p);
    // positive root of a x^2 + b x + c
    let disc = (&b * &b - &(&(&a * &c) * &ctx.from_i64(4))).sqrt();
    (disc - b) / (&a + &a)
}

/// Reduced rational approximant `p_k/q_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub k: usize,
    pub p: Integer,
    pub q: Integer,
}

impl Convergent {
    pub fn value(&self, ctx: &PrecisionContext) -> BigReal {
        ctx.from_integer(&self.p) / ctx.from_integer(&self.q)
    }

    /// Both parts as u64 when they fit (desk/lab scale always does).
    pub fn as_u64(&self) -> Option<(u64, u64)> {
        Some((self.p.to_u64()?, self.q.to_u64()?))
    }
}

impl fmt::Display for Convergent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Value of the Bryuno function together with a conservative accuracy
/// estimate.
#[derive(Debug, Clone)]
pub struct BryunoValue {
    pub omega: ContinuedFraction,
    pub value: BigReal,
    pub digits_valid: u32,
}

/// Family of rotation numbers sharing a head pattern with one `n` slot,
/// e.g. `[n,(1)]` or `[2,n,(1)]`.
#[derive(Debug, Clone)]
pub struct Family {
    before: Vec<u64>,
    after: Vec<u64>,
    tail: Vec<u64>,
    descriptor: String,
}

impl Family {
    /// Parse a descriptor in bracket notation with one `n` placeholder,
    /// e.g. `[n,(1)]`, `[n,20,(1)]`, `[2,n,(1)]`; `1^inf` tail syntax is
    /// accepted as in [`ContinuedFraction::parse`].
    pub fn parse(descriptor: &str) -> Result<Self, RotationError> {
        let marker = "18446744073709551615"; // u64::MAX as a stand-in for n
        let occurrences = descriptor.matches('n').count();
        let without_inf = descriptor.replace("^inf", "").replace("^∞", "");
        if without_inf.matches('n').count() != 1 || occurrences > 2 {
            return Err(RotationError::BadFamily(descriptor.into()));
        }
        let expanded = descriptor.replacen('n', marker, 1);
        let cf = ContinuedFraction::parse(&expanded)?;
        if cf.tail.contains(&u64::MAX) {
            return Err(RotationError::BadFamily(descriptor.into()));
        }
        let pos = cf
            .head
            .iter()
            .position(|&a| a == u64::MAX)
            .ok_or_else(|| RotationError::BadFamily(descriptor.into()))?;
        Ok(Self {
            before: cf.head[..pos].to_vec(),
            after: cf.head[pos + 1..].to_vec(),
            tail: cf.tail.clone(),
            descriptor: descriptor.into(),
        })
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn instantiate(&self, n: u64) -> ContinuedFraction {
        let mut head = self.before.clone();
        head.push(n);
        head.extend(&self.after);
        ContinuedFraction::new(head, self.tail.clone()).expect("validated template")
    }

    /// Members at the given indices.
    pub fn sequence(&self, indices: &[u64]) -> Vec<ContinuedFraction> {
        indices.iter().map(|&n| self.instantiate(n)).collect()
    }
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
    fn golden_convergents_are_fibonacci() {
        let conv = cf("[(1)]").convergents(5).unwrap();
        let expect = [(1u64, 1u64), (1, 2), (2, 3), (3, 5), (5, 8)];
        for (c, (p, q)) in conv.iter().zip(expect) {
            assert_eq!(c.as_u64().unwrap(), (p, q));
        }
    }

    #[test]
    fn near_half_convergents() {
        let conv = cf("[2,500,(1)]").convergents(2).unwrap();
        assert_eq!(conv[0].as_u64().unwrap(), (1, 2));
        assert_eq!(conv[1].as_u64().unwrap(), (500, 1001));
    }

    #[test]
    fn sqrt3_minus_1_approximants() {
        // [1,2,1,2,...]; the approximant list includes 3/4, 8/11, 11/15, 30/41
        let conv = cf("[(1,2)]").convergents(8).unwrap();
        let got: Vec<(u64, u64)> = conv.iter().map(|c| c.as_u64().unwrap()).collect();
        for pair in [(3u64, 4u64), (8, 11), (11, 15), (30, 41)] {
            assert!(got.contains(&pair), "{pair:?} missing from {got:?}");
        }
    }

    #[test]
    fn rational_expansion_exhausts() {
        let r = cf("[2,3]");
        assert_eq!(r.convergents(2).unwrap().len(), 2);
        assert!(matches!(
            r.convergents(3),
            Err(RotationError::ExhaustedExpansion { available: 2, requested: 3 })
        ));
    }

    #[test]
    fn value_golden_mean() {
        let c = ctx(60);
        let v = cf("[(1)]").value(&c);
        let golden = (c.from_i64(5).sqrt() - c.one()) / c.from_i64(2);
        assert!((v - golden).abs() < c.eps_at(5));
    }

    #[test]
    fn value_of_d_periodic_solves_quadratic() {
        let c = ctx(50);
        for d in [1i64, 2, 3, 7] {
            let v = cf(&format!("[({d})]")).value(&c);
            // x^2 + d x - 1 = 0
            let res = &(&v * &v) + &(&(&c.from_i64(d) * &v) - &c.one());
            assert!(res.abs() < c.eps_at(5), "d={d}");
        }
    }

    #[test]
    fn value_head_and_rational() {
        let c = ctx(40);
        let v = cf("[500,(1)]").value(&c);
        // 1/(500 + golden)
        let golden = (c.from_i64(5).sqrt() - c.one()) / c.from_i64(2);
        assert!((v.recip() - (c.from_i64(500) + golden)).abs() < c.eps_at(12));
        let half = cf("[2]").value(&c);
        assert!((half - c.from_f64(0.5)).abs() < c.eps_at(20));
    }

    #[test]
    fn bryuno_golden_closed_form() {
        let c = ctx(60);
        let b = cf("[(1)]").bryuno(&c).unwrap();
        let gamma = (c.from_i64(5).sqrt() - c.one()) / c.from_i64(2);
        let expect = -gamma.ln() / (c.one() - &gamma);
        assert!((b.value.clone() - expect).abs() < c.eps_at(5));
        assert!((b.value.to_f64() - 1.25983).abs() < 1e-5);
    }

    #[test]
    fn bryuno_truncated_recursion_cross_check() {
        // Deep truncation of [(1,2)] should agree with the closed form.
        let c = ctx(60);
        let exact = cf("[(1,2)]").bryuno(&c).unwrap().value;
        // B via 80 explicit unwinding steps, tail error ~ prod omega_i
        let mut digits = Vec::new();
        for _ in 0..40 {
            digits.extend([1u64, 2]);
        }
        let mut b = c.zero();
        let mut m = c.one();
        let mut y = cf("[(1,2)]").value(&c);
        for &t in &digits {
            b += &(&m * &(-y.ln()));
            m *= &y;
            y = y.recip() - c.from_i64(t as i64);
        }
        assert!((exact - b).abs() < c.from_f64(1e-20));
    }

    #[test]
    fn bryuno_rejects_rationals() {
        let c = ctx(30);
        assert!(matches!(
            cf("[2]").bryuno(&c),
            Err(RotationError::RationalRotation)
        ));
    }

    #[test]
    fn bryuno_satisfies_recursion() {
        // B(omega) = -log omega + omega B(frac(1/omega))
        let c = ctx(70);
        for s in ["[(1)]", "[2,500,(1)]", "[3,10,(1)]", "[(2,1)]", "[7,(3)]"] {
            let omega = cf(s);
            let b = omega.bryuno(&c).unwrap().value;
            // frac(1/omega) drops the first partial quotient
            let mut shifted_head: Vec<u64> = omega.head().to_vec();
            let shifted = if shifted_head.is_empty() {
                let mut t = omega.tail().to_vec();
                t.rotate_left(1);
                ContinuedFraction::new(vec![], t).unwrap()
            } else {
                shifted_head.remove(0);
                ContinuedFraction::new(shifted_head, omega.tail().to_vec()).unwrap()
            };
            let b_shift = shifted.bryuno(&c).unwrap().value;
            let w = omega.value(&c);
            let residual = &b + &(&w.ln() - &(&w * &b_shift));
            assert!(residual.abs() < c.eps_at(12), "{s}: {residual:?}");
        }
    }

    #[test]
    fn convergent_alternation_and_quality() {
        let c = ctx(60);
        for s in ["[(1)]", "[2,500,(1)]", "[(1,2)]", "[10,(2)]"] {
            let omega = cf(s);
            let w = omega.value(&c);
            let conv = omega.convergents(12).unwrap();
            let mut last_sign = 0i32;
            for (i, cv) in conv.iter().enumerate() {
                let diff = cv.value(&c) - &w;
                let sign = if diff.is_negative() { -1 } else { 1 };
                if i > 0 {
                    assert_eq!(sign, -last_sign, "{s}: alternation broken at k={}", cv.k);
                }
                last_sign = sign;
                // |omega - p/q| < 1/(q_k q_{k+1})
                if i + 1 < conv.len() {
                    let bound = (ctx(60).from_integer(&cv.q)
                        * ctx(60).from_integer(&conv[i + 1].q))
                    .recip();
                    assert!(diff.abs() < bound, "{s}: quality bound broken at k={}", cv.k);
                }
            }
        }
    }

    #[test]
    fn bryuno_head_asymptotics() {
        // B([n,(1)]) - (log(n+gamma) + B(gamma)/(n+gamma)) is exactly zero in
        // closed form; check the identity numerically for large n.
        let c = ctx(50);
        let bg = cf("[(1)]").bryuno(&c).unwrap().value;
        let gamma = cf("[(1)]").value(&c);
        for n in [500u64, 7000, 60000] {
            let b = cf(&format!("[{n},(1)]")).bryuno(&c).unwrap().value;
            let denom = c.from_i64(n as i64) + &gamma;
            let expect = denom.ln() + &(&bg / &denom);
            assert!((b - expect).abs() < c.eps_at(10), "n={n}");
        }
    }

    #[test]
    fn bracket_round_trip() {
        for s in ["[(1)]", "[500,(1)]", "[2,500,(1)]", "[3,7]", "[(1,2)]", "[10,(2,1,2)]"] {
            let parsed = cf(s);
            assert_eq!(parsed.to_bracket(), s);
            assert_eq!(ContinuedFraction::parse(&parsed.to_bracket()).unwrap(), parsed);
        }
    }

    #[test]
    fn parse_superscript_alias() {
        assert_eq!(cf("[500,1^inf]"), cf("[500,(1)]"));
        assert_eq!(cf("[2,10,1^∞]"), cf("[2,10,(1)]"));
    }

    #[test]
    fn parse_rejects_garbage() {
        for s in ["", "[]", "[0]", "[1,]", "(1)", "[1,(2),3]", "[x]"] {
            assert!(ContinuedFraction::parse(s).is_err(), "{s} should fail");
        }
    }

    #[test]
    fn families_instantiate() {
        let f = Family::parse("[n,(1)]").unwrap();
        let members = f.sequence(&[500, 700]);
        assert_eq!(members[0].to_bracket(), "[500,(1)]");
        assert_eq!(members[1].to_bracket(), "[700,(1)]");
        let f2 = Family::parse("[2,n,1^inf]").unwrap();
        assert_eq!(f2.instantiate(20000).to_bracket(), "[2,20000,(1)]");
        let f3 = Family::parse("[n,20,(1)]").unwrap();
        assert_eq!(f3.instantiate(500).to_bracket(), "[500,20,(1)]");
        assert!(Family::parse("[2,(1)]").is_err());
    }
}
