//! Root-sum gadget: greedy p-th power decomposition, the three-layer chain
//! whose initial-state value encodes `sum a_i^((p-1)/p)`, and exact interval
//! enclosures for deciding the comparison with a threshold.
//!
//! The chain's transient states carry Lp balls whose worst case is
//! irrational in general, so its values are never computed by the solvers.
//! They come from closed forms, enclosed by rational intervals.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Norm, Rmc, Transition, UncertaintySet};
use crate::rational::Rational;

/// `floor(n^(1/p))`.
pub fn integer_root_floor(n: &BigUint, p: u32) -> Result<BigUint> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("integer root of zero".into()));
    }
    if p == 0 {
        return Err(Error::InvalidArgument(
            "root exponent must be at least 1".into(),
        ));
    }
    let r = n.nth_root(p);
    debug_assert!(r.pow(p) <= *n && (&r + 1u32).pow(p) > *n);
    Ok(r)
}

/// `n = sum u_i^p`, terms in greedy (non-increasing) order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub n: BigUint,
    pub p: u32,
    pub terms: Vec<BigUint>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn power_sum(&self) -> BigUint {
        self.terms.iter().map(|u| u.pow(self.p)).sum()
    }
}

/// Repeatedly subtracts the largest p-th power not exceeding the remainder.
pub fn greedy_power_decomposition(n: &BigUint, p: u32) -> Result<Decomposition> {
    if n.is_zero() {
        return Err(Error::InvalidArgument("cannot decompose zero".into()));
    }
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "decomposition exponent must be at least 2, got {p}"
        )));
    }
    let mut rest = n.clone();
    let mut terms = Vec::new();
    while !rest.is_zero() {
        let u = integer_root_floor(&rest, p)?;
        rest -= u.pow(p);
        terms.push(u);
    }
    Ok(Decomposition {
        n: n.clone(),
        p,
        terms,
    })
}

/// Closed interval with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Scales by a non-negative factor.
    fn scale(&self, k: &Rational) -> Interval {
        debug_assert!(*k >= Rational::zero());
        Interval {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// Compares with `x`. A non-point interval never equals the true value at
    /// its endpoints, which settles `hi == x` as below.
    pub fn decide_at_least(&self, x: &Rational) -> Decision {
        if self.lo >= *x {
            Decision::True
        } else if self.hi < *x || (!self.is_point() && self.hi == *x) {
            Decision::False
        } else {
            Decision::Inconclusive
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    True,
    False,
    Inconclusive,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::True => "true",
            Decision::False => "false",
            Decision::Inconclusive => "inconclusive",
        })
    }
}

/// Encloses `base^(num/den)`. Exact when the result is rational, otherwise an
/// interval `[r, r+1] / 2^bits` with `r = floor(base^(num/den) * 2^bits)`.
/// Raising `bits` gives nested intervals.
pub fn power_enclosure(base: &BigUint, num: u32, den: u32, bits: u32) -> Interval {
    assert!(den >= 1);
    let n = base.pow(num);
    if n.is_zero() {
        return Interval::point(Rational::zero());
    }
    let s = n.nth_root(den);
    if s.pow(den) == n {
        return Interval::point(Rational::from_integer(s.into()));
    }
    let scale = BigUint::one() << (bits as usize);
    let r = (&n << (den as usize * bits as usize)).nth_root(den);
    let denom = BigInt::from(scale);
    let lo = BigInt::from(r);
    let hi = &lo + 1;
    Interval {
        lo: Rational::new(lo, denom.clone()),
        hi: Rational::new(hi, denom),
    }
}

/// Encloses `sum a_i^(num/den)` with total width at most `len(a) * 2^-bits`.
pub fn power_sum_enclosure(a: &[BigUint], num: u32, den: u32, bits: u32) -> Interval {
    a.iter()
        .map(|x| power_enclosure(x, num, den, bits))
        .fold(Interval::point(Rational::zero()), |acc, x| acc.add(&x))
}

fn check_terms(a: &[u64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::InvalidArgument(
            "root-sum instance needs at least one term".into(),
        ));
    }
    if let Some(i) = a.iter().position(|&x| x == 0) {
        return Err(Error::InvalidArgument(format!(
            "term a_{} must be positive",
            i + 1
        )));
    }
    Ok(())
}

fn check_precision(precision: u32) -> Result<()> {
    if precision < 16 {
        return Err(Error::InvalidArgument(format!(
            "precision must be at least 16 bits, got {precision}"
        )));
    }
    Ok(())
}

/// Decides `sum a_i^(num/den) >= alpha` by interval enclosure. Inconclusive
/// only when the enclosure still straddles `alpha` and some root is irrational.
pub fn decide_power_sum(
    a: &[u64],
    alpha: &BigInt,
    num: u32,
    den: u32,
    precision: u32,
) -> Result<Decision> {
    check_terms(a)?;
    check_precision(precision)?;
    if den == 0 {
        return Err(Error::InvalidArgument(
            "exponent denominator must be positive".into(),
        ));
    }
    let a: Vec<BigUint> = a.iter().map(|&x| BigUint::from(x)).collect();
    let bits = precision + crate::bounds::ceil_log2(a.len() as u64) as u32;
    let sum = power_sum_enclosure(&a, num, den, bits);
    Ok(sum.decide_at_least(&Rational::from_integer(alpha.clone())))
}

/// Decides `sum a_i^((p-1)/p) >= alpha`, the comparison the gadget encodes.
pub fn decide_root_sum(a: &[u64], alpha: &BigInt, p: u32, precision: u32) -> Result<Decision> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "root-sum exponent p must be at least 2, got {p}"
        )));
    }
    decide_power_sum(a, alpha, p - 1, p, precision)
}

/// The three-layer chain built from a root-sum instance `(a, alpha, p)`.
///
/// State 0 is the initial state, `1..=n` the transient states, then `2M*`
/// absorbing states per transient: first the `+` copies, then the `-` ones.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub a: Vec<u64>,
    pub alpha: BigInt,
    pub p: u32,
    pub gamma: Rational,
    /// `b_i = 2^p a_i`.
    pub b: Vec<BigUint>,
    /// `x_i = b_i / 2`, decomposed greedily.
    pub decompositions: Vec<Decomposition>,
    /// Decomposition terms padded with zeros to `m_star` entries.
    pub terms: Vec<Vec<BigUint>>,
    pub m_star: usize,
    /// `K = 2^(p-1) alpha`.
    pub k_threshold: BigInt,
    /// `1 / (2 M*)`, the transient radius.
    pub delta: Rational,
    /// `gamma^2 delta K / n`.
    pub lambda: Rational,
    pub rmc: Rmc,
}

impl GadgetInstance {
    pub fn n_terms(&self) -> usize {
        self.a.len()
    }

    pub fn initial_state(&self) -> usize {
        0
    }

    /// Transient state of term `i` (0-based).
    pub fn transient_state(&self, i: usize) -> usize {
        1 + i
    }

    /// Absorbing state `k` (0-based) of term `i`, `+` or `-` copy.
    pub fn absorbing_state(&self, i: usize, k: usize, positive: bool) -> usize {
        let base = 1 + self.n_terms() + 2 * self.m_star * i;
        if positive {
            base + k
        } else {
            base + self.m_star + k
        }
    }

    /// `+-u_{i,k}^(p-1)`.
    pub fn absorbing_value(&self, i: usize, k: usize, positive: bool) -> Rational {
        let v = Rational::from_integer(self.terms[i][k].pow(self.p - 1).into());
        if positive {
            v
        } else {
            -v
        }
    }

    /// `gamma delta b_i^((p-1)/p)`.
    pub fn transient_value(&self, i: usize, precision: u32) -> Result<Interval> {
        check_precision(precision)?;
        let root = power_enclosure(&self.b[i], self.p - 1, self.p, precision);
        Ok(root.scale(&(&self.gamma * &self.delta)))
    }

    /// Encloses `v(s0) = (gamma^2 delta / n) sum b_i^((p-1)/p)` with width at
    /// most `2^-precision * hi`.
    pub fn closed_form_value(&self, precision: u32) -> Result<Interval> {
        check_precision(precision)?;
        // Each b_i^((p-1)/p) >= 2^(p-1) >= 1, so the sum is at least n and a
        // per-term width of 2^-precision meets the relative target.
        let sum = power_sum_enclosure(&self.b, self.p - 1, self.p, precision);
        let n = Rational::from_integer(BigInt::from(self.n_terms()));
        Ok(sum.scale(&(&self.gamma * &self.gamma * &self.delta / n)))
    }

    /// Decides `v(s0) >= lambda` from the closed form.
    pub fn decide(&self, precision: u32) -> Result<Decision> {
        Ok(self
            .closed_form_value(precision)?
            .decide_at_least(&self.lambda))
    }
}

/// Builds the gadget for `sum a_i^((p-1)/p) >= alpha` at discount `gamma`.
pub fn build_root_sum_gadget(
    a: &[u64],
    alpha: &BigInt,
    p: u32,
    gamma: &Rational,
) -> Result<GadgetInstance> {
    check_terms(a)?;
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "root-sum exponent p must be at least 2, got {p}"
        )));
    }
    if *gamma <= Rational::zero() || *gamma >= Rational::one() {
        return Err(Error::InvalidArgument(
            "gadget discount must lie in (0,1)".into(),
        ));
    }
    let n = a.len();
    let b: Vec<BigUint> = a.iter().map(|&x| BigUint::from(x) << p as usize).collect();
    let decompositions = b
        .iter()
        .map(|bi| greedy_power_decomposition(&(bi >> 1usize), p))
        .collect::<Result<Vec<_>>>()?;
    let m_star = decompositions
        .iter()
        .map(Decomposition::len)
        .max()
        .expect("n >= 1");
    let terms: Vec<Vec<BigUint>> = decompositions
        .iter()
        .map(|d| {
            let mut t = d.terms.clone();
            t.resize(m_star, BigUint::zero());
            t
        })
        .collect();
    let two_m = 2 * m_star;
    let delta = Rational::new(BigInt::one(), BigInt::from(two_m));
    let k_threshold = alpha << (p as usize - 1);
    let lambda = gamma * gamma * &delta * Rational::from_integer(k_threshold.clone())
        / Rational::from_integer(BigInt::from(n));

    let n_states = 1 + n + n * two_m;
    let mut cost = vec![Rational::zero(); 1 + n];
    let mut transitions = Vec::with_capacity(n_states);
    transitions.push(Transition::new(
        (1..=n).collect(),
        UncertaintySet::point(vec![Rational::new(BigInt::one(), BigInt::from(n)); n]),
    ));
    for i in 0..n {
        let first = 1 + n + two_m * i;
        transitions.push(Transition::new(
            (first..first + two_m).collect(),
            UncertaintySet::new(vec![delta.clone(); two_m], delta.clone(), Norm::Lp(p)),
        ));
    }
    let one_minus_gamma = Rational::one() - gamma;
    for row in &terms {
        for sign in [1i32, -1] {
            for u in row {
                let c = Rational::from_integer(u.pow(p - 1).into()) * &one_minus_gamma;
                cost.push(if sign > 0 { c } else { -c });
                transitions.push(Transition::absorbing(transitions.len()));
            }
        }
    }
    let rmc = Rmc {
        cost,
        transitions,
        discount: gamma.clone(),
    };
    rmc.ensure_valid()?;
    Ok(GadgetInstance {
        a: a.to_vec(),
        alpha: alpha.clone(),
        p,
        gamma: gamma.clone(),
        b,
        decompositions,
        terms,
        m_star,
        k_threshold,
        delta,
        lambda,
        rmc,
    })
}

/// [`GadgetInstance::closed_form_value`] as a free function.
pub fn gadget_closed_form_value(g: &GadgetInstance, precision: u32) -> Result<Interval> {
    g.closed_form_value(precision)
}
