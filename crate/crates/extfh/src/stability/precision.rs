//! Software floating-point arithmetic with a configurable mantissa width and
//! per-operation rounding direction.
//!
//! A [`MpFloat`] is a sign/magnitude binary float `sign * mant * 2^exp` with an
//! arbitrary-length mantissa kept in canonical form (odd, or zero). Values are
//! exact; rounding happens only when an operation is performed through a
//! [`MpContext`], which carries the target mantissa width `p` and the rounding
//! direction. Add, subtract and multiply are computed exactly and then rounded
//! once; division is rounded correctly using the remainder as a sticky bit. So
//! each operation satisfies the standard model: relative error at most
//! `u = 2^-p` for round-to-nearest and `2u` for the directed modes.
//!
//! A context can carry a [`RoundingMonitor`] which compares every rounded add
//! and multiply against the exact result and records the largest relative
//! deviation seen.

use std::cell::Cell;
use std::cmp::Ordering;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Rounding policy of a precision context.
///
/// `AlternateByIndex` is resolved to `Up` for even indices and `Down` for odd
/// ones via [`PrecisionPolicy::direction_for_index`]; the other three map to
/// themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    Up,
    Down,
    AlternateByIndex,
}

impl Rounding {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nearest" => Some(Self::Nearest),
            "up" => Some(Self::Up),
            "down" => Some(Self::Down),
            "alternate_by_index" | "alternate-by-index" => Some(Self::AlternateByIndex),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Nearest => "nearest",
            Self::Up => "up",
            Self::Down => "down",
            Self::AlternateByIndex => "alternate_by_index",
        }
    }
}

/// A concrete rounding direction for a single operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Round to nearest, ties to even.
    Nearest,
    /// Round towards +infinity.
    Up,
    /// Round towards -infinity.
    Down,
}

/// Mantissa width plus rounding policy. `mantissa_bits` counts significand
/// bits including the leading one, so `u = 2^-mantissa_bits` and binary64
/// corresponds to 53 bits with nearest rounding. A policy may carry a
/// [`RoundingMonitor`]; contexts derived from it then record the relative
/// rounding error of every add and multiply.
#[derive(Debug, Clone)]
pub struct PrecisionPolicy {
    pub mantissa_bits: u32,
    pub rounding: Rounding,
    pub label: String,
    monitor: Option<RoundingMonitor>,
}

impl PartialEq for PrecisionPolicy {
    fn eq(&self, other: &Self) -> bool {
        self.mantissa_bits == other.mantissa_bits
            && self.rounding == other.rounding
            && self.label == other.label
    }
}

/// Minimum supported mantissa width.
pub const MIN_MANTISSA_BITS: u32 = 24;

/// Working precision of the experiments: binary64-equivalent.
pub const WORKING_PRECISION_BITS: u32 = 53;

impl PrecisionPolicy {
    pub fn new(mantissa_bits: u32, rounding: Rounding, label: impl Into<String>) -> Self {
        assert!(
            mantissa_bits >= MIN_MANTISSA_BITS,
            "mantissa_bits must be at least {MIN_MANTISSA_BITS}"
        );
        Self { mantissa_bits, rounding, label: label.into(), monitor: None }
    }

    /// Enable per-operation error monitoring on every context derived from
    /// this policy.
    pub fn with_monitor(mut self, monitor: &RoundingMonitor) -> Self {
        self.monitor = Some(monitor.clone());
        self
    }

    pub fn monitor(&self) -> Option<&RoundingMonitor> {
        self.monitor.as_ref()
    }

    /// Binary64-equivalent working precision, round to nearest.
    pub fn working() -> Self {
        Self::new(WORKING_PRECISION_BITS, Rounding::Nearest, "double")
    }

    /// High-precision nearest-rounding policy with the given width.
    pub fn precise(bits: u32) -> Self {
        Self::new(bits, Rounding::Nearest, format!("{bits}-bit"))
    }

    /// Unit roundoff `u = 2^-mantissa_bits`.
    pub fn unit_roundoff(&self) -> f64 {
        (-(self.mantissa_bits as f64)).exp2()
    }

    /// The rounding direction applied while computing the extended value of
    /// index `i` (relevant only for `AlternateByIndex`).
    pub fn direction_for_index(&self, i: isize) -> Direction {
        match self.rounding {
            Rounding::Nearest => Direction::Nearest,
            Rounding::Up => Direction::Up,
            Rounding::Down => Direction::Down,
            Rounding::AlternateByIndex => {
                if i.rem_euclid(2) == 0 {
                    Direction::Up
                } else {
                    Direction::Down
                }
            }
        }
    }

    /// Context for operations not tied to a vector index.
    pub fn context(&self) -> MpContext {
        self.context_with_direction(self.direction_for_index(0))
    }

    /// Context for the computation of the extended value at index `i`.
    pub fn context_for_index(&self, i: isize) -> MpContext {
        self.context_with_direction(self.direction_for_index(i))
    }

    /// Context with an explicit direction, carrying this policy's monitor.
    pub fn context_with_direction(&self, direction: Direction) -> MpContext {
        let ctx = MpContext::new(self.mantissa_bits, direction);
        match &self.monitor {
            Some(m) => ctx.with_monitor(m),
            None => ctx,
        }
    }
}

/// Tracks the largest relative rounding error observed on adds and multiplies.
#[derive(Debug, Clone, Default)]
pub struct RoundingMonitor {
    max_relative_error: Rc<Cell<f64>>,
    operations: Rc<Cell<u64>>,
}

impl RoundingMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest `|rounded - exact| / |exact|` seen so far; 0 for an empty stream.
    pub fn max_relative_error(&self) -> f64 {
        self.max_relative_error.get()
    }

    /// Number of monitored operations.
    pub fn operations(&self) -> u64 {
        self.operations.get()
    }

    fn record(&self, rel: f64) {
        self.operations.set(self.operations.get() + 1);
        if rel > self.max_relative_error.get() {
            self.max_relative_error.set(rel);
        }
    }
}

/// An arithmetic context: every operation rounds its result to `precision`
/// mantissa bits in the given direction.
#[derive(Debug, Clone)]
pub struct MpContext {
    precision: u32,
    direction: Direction,
    monitor: Option<RoundingMonitor>,
}

impl MpContext {
    pub fn new(precision: u32, direction: Direction) -> Self {
        assert!(precision >= 2, "precision must be at least 2 bits");
        Self { precision, direction, monitor: None }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn with_direction(&self, direction: Direction) -> Self {
        Self { direction, ..self.clone() }
    }

    pub fn with_monitor(&self, monitor: &RoundingMonitor) -> Self {
        Self { monitor: Some(monitor.clone()), ..self.clone() }
    }

    fn observe(&self, exact: &MpFloat, rounded: &MpFloat) {
        if let Some(monitor) = &self.monitor {
            if exact.is_zero() {
                return;
            }
            let diff = exact.sub_exact(rounded);
            if diff.is_zero() {
                monitor.record(0.0);
            } else {
                let rel = ratio_abs_f64(&diff, exact);
                monitor.record(rel);
            }
        }
    }

    pub fn add(&self, a: &MpFloat, b: &MpFloat) -> MpFloat {
        let exact = a.add_exact(b);
        let rounded = exact.round(self.precision, self.direction, false);
        self.observe(&exact, &rounded);
        rounded
    }

    pub fn sub(&self, a: &MpFloat, b: &MpFloat) -> MpFloat {
        self.add(a, &b.neg())
    }

    pub fn mul(&self, a: &MpFloat, b: &MpFloat) -> MpFloat {
        let exact = a.mul_exact(b);
        let rounded = exact.round(self.precision, self.direction, false);
        self.observe(&exact, &rounded);
        rounded
    }

    /// Correctly rounded quotient. Panics on a zero divisor: callers
    /// short-circuit exact node hits before dividing.
    pub fn div(&self, a: &MpFloat, b: &MpFloat) -> MpFloat {
        assert!(!b.is_zero(), "division by zero in precision context");
        if a.is_zero() {
            return MpFloat::zero();
        }
        // Scale the dividend so the integer quotient carries at least
        // precision + 2 bits, then fold the remainder into a sticky bit.
        let a_bits = a.mant.bits() as i64;
        let b_bits = b.mant.bits() as i64;
        let shift = (self.precision as i64 + 2 + b_bits - a_bits).max(0) as u64;
        let scaled = &a.mant << shift;
        let q = &scaled / &b.mant;
        let sticky = &scaled - &q * &b.mant != BigUint::zero();
        let sign = a.sign * b.sign;
        let value = MpFloat::from_raw(sign, q, a.exp - b.exp - shift as i64);
        if sticky {
            value.round(self.precision, self.direction, true)
        } else {
            value.round(self.precision, self.direction, false)
        }
    }

    pub fn from_f64(&self, x: f64) -> MpFloat {
        MpFloat::from_f64(x)
    }

    pub fn from_i64(&self, x: i64) -> MpFloat {
        MpFloat::from_i64(x)
    }

    /// `base^k` by repeated multiplication, each step rounded by the context.
    pub fn powi(&self, base: &MpFloat, k: u32) -> MpFloat {
        let mut acc = MpFloat::one();
        for _ in 0..k {
            acc = self.mul(&acc, base);
        }
        acc
    }

    /// Sum of `terms` accumulated left to right.
    pub fn sum(&self, terms: impl IntoIterator<Item = MpFloat>) -> MpFloat {
        let mut acc = MpFloat::zero();
        for t in terms {
            acc = self.add(&acc, &t);
        }
        acc
    }
}

/// Arbitrary-precision binary float in canonical sign/magnitude form.
///
/// Invariant: either `sign == 0` and the mantissa is zero, or `sign` is
/// `+1`/`-1` and the mantissa is odd. The value is `sign * mant * 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpFloat {
    sign: i8,
    mant: BigUint,
    exp: i64,
}

impl MpFloat {
    pub fn zero() -> Self {
        Self { sign: 0, mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self { sign: 1, mant: BigUint::one(), exp: 0 }
    }

    fn from_raw(sign: i8, mant: BigUint, exp: i64) -> Self {
        if mant.is_zero() || sign == 0 {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        Self { sign, mant: mant >> tz, exp: exp + tz as i64 }
    }

    /// Exact conversion; every finite f64 is representable.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot represent a non-finite f64");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        Self::from_raw(sign, BigUint::from(mant), exp)
    }

    pub fn from_i64(x: i64) -> Self {
        if x == 0 {
            return Self::zero();
        }
        let sign = if x < 0 { -1 } else { 1 };
        Self::from_raw(sign, BigUint::from(x.unsigned_abs()), 0)
    }

    pub fn from_i128(x: i128) -> Self {
        if x == 0 {
            return Self::zero();
        }
        let sign = if x < 0 { -1 } else { 1 };
        Self::from_raw(sign, BigUint::from(x.unsigned_abs()), 0)
    }

    /// Exact conversion of a nonnegative integer.
    pub fn from_biguint(x: BigUint) -> Self {
        if x.is_zero() {
            return Self::zero();
        }
        Self::from_raw(1, x, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }

    pub fn neg(&self) -> Self {
        Self { sign: -self.sign, mant: self.mant.clone(), exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Self { sign: self.sign.abs(), mant: self.mant.clone(), exp: self.exp }
    }

    /// Nearest f64, ties to even. Saturates to +/-infinity far outside the
    /// binary64 range (not reachable from the computations in this crate).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, Direction::Nearest, false);
        let bits = r.mant.bits();
        let m = r.mant.to_u64().expect("53-bit mantissa fits u64");
        let exp = r.exp;
        // Value is m * 2^exp with m < 2^53.
        let total = exp + bits as i64 - 1;
        if total > 1023 {
            return if r.sign < 0 { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        if total < -1100 {
            return if r.sign < 0 { -0.0 } else { 0.0 };
        }
        let magnitude = ldexp(m as f64, exp);
        if r.sign < 0 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Compare by value.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return ord,
        }
        if self.sign == 0 {
            return Ordering::Equal;
        }
        let mag = self.cmp_magnitude(other);
        if self.sign > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    fn cmp_magnitude(&self, other: &Self) -> Ordering {
        let sa = self.exp + self.mant.bits() as i64;
        let sb = other.exp + other.mant.bits() as i64;
        match sa.cmp(&sb) {
            Ordering::Equal => {}
            ord => return ord,
        }
        // Same leading-bit position: align and compare mantissas.
        let e = self.exp.min(other.exp);
        let ma = &self.mant << (self.exp - e) as u64;
        let mb = &other.mant << (other.exp - e) as u64;
        ma.cmp(&mb)
    }

    fn add_exact(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let ma = &self.mant << (self.exp - e) as u64;
        let mb = &other.mant << (other.exp - e) as u64;
        if self.sign == other.sign {
            return Self::from_raw(self.sign, ma + mb, e);
        }
        match ma.cmp(&mb) {
            Ordering::Equal => Self::zero(),
            Ordering::Greater => Self::from_raw(self.sign, ma - mb, e),
            Ordering::Less => Self::from_raw(other.sign, mb - ma, e),
        }
    }

    fn sub_exact(&self, other: &Self) -> Self {
        self.add_exact(&other.neg())
    }

    fn mul_exact(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        Self::from_raw(self.sign * other.sign, &self.mant * &other.mant, self.exp + other.exp)
    }

    /// Round to `p` mantissa bits in the given direction. `sticky_extra`
    /// marks truncated nonzero bits below the stored mantissa (used by
    /// division). An increment that overflows the kept width produces a
    /// power of two, which `from_raw` renormalizes exactly.
    fn round(&self, p: u32, direction: Direction, sticky_extra: bool) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let bits = self.mant.bits();
        if bits <= p as u64 && !sticky_extra {
            return self.clone();
        }
        let (kept, round_bit, sticky_low) = if bits <= p as u64 {
            (self.mant.clone(), false, false)
        } else {
            let shift = bits - p as u64;
            let kept = &self.mant >> shift;
            let round_bit = self.mant.bit(shift - 1);
            let below = if shift >= 2 {
                let mask = (BigUint::one() << (shift - 1)) - BigUint::one();
                (&self.mant & mask) != BigUint::zero()
            } else {
                false
            };
            (kept, round_bit, below)
        };
        let sticky = sticky_low || sticky_extra;
        let exp = self.exp + (bits.saturating_sub(p as u64)) as i64;
        if !round_bit && !sticky {
            return Self::from_raw(self.sign, kept, exp);
        }
        let increment = match direction {
            Direction::Nearest => {
                if round_bit && sticky {
                    true
                } else if round_bit {
                    // Exact tie: round to even.
                    kept.bit(0)
                } else {
                    false
                }
            }
            Direction::Up => self.sign > 0,
            Direction::Down => self.sign < 0,
        };
        if increment {
            Self::from_raw(self.sign, kept + BigUint::one(), exp)
        } else {
            Self::from_raw(self.sign, kept, exp)
        }
    }
}

/// `|a| / |b|` as an f64, for monitor bookkeeping. Both inputs are exact and
/// nonzero; one 53-bit division gives the ratio to full double accuracy.
fn ratio_abs_f64(a: &MpFloat, b: &MpFloat) -> f64 {
    let ctx = MpContext::new(53, Direction::Nearest);
    ctx.div(&a.abs(), &b.abs()).to_f64()
}

/// Exact scaling `m * 2^e` for |e| up to a few thousand, staged to avoid
/// overflowing the intermediate scale factor.
fn ldexp(m: f64, e: i64) -> f64 {
    let mut value = m;
    let mut e = e;
    while e > 900 {
        value *= 900f64.exp2();
        e -= 900;
    }
    while e < -900 {
        value *= (-900f64).exp2();
        e += 900;
    }
    value * (e as f64).exp2()
}

/// `sin(x)` by the alternating Taylor series, evaluated with guard bits and
/// rounded to `p` bits to nearest. Intended for moderate arguments (the test
/// functions use |x| <= 20); the guard width absorbs the cancellation of the
/// growing leading terms.
pub fn mp_sin(x: &MpFloat, p: u32) -> MpFloat {
    if x.is_zero() {
        return MpFloat::zero();
    }
    let guard = MpContext::new(p + 96, Direction::Nearest);
    let x2 = guard.mul(x, x);
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut k: i64 = 1;
    loop {
        // term *= -x^2 / ((k+1)(k+2))
        term = guard.mul(&term, &x2).neg();
        term = guard.div(&term, &MpFloat::from_i64((k + 1) * (k + 2)));
        let next = guard.add(&sum, &term);
        if next == sum {
            break;
        }
        sum = next;
        k += 2;
        assert!(k < 10_000, "sin series failed to converge");
    }
    sum.round(p, Direction::Nearest, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mp(x: f64) -> MpFloat {
        MpFloat::from_f64(x)
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for &x in &[0.0, 1.0, -1.0, 0.1, -0.04, 3.5e300, -7.25e-300, f64::MIN_POSITIVE, 1.5e-310] {
            assert_eq!(mp(x).to_f64().to_bits(), x.to_bits(), "x = {x}");
        }
    }

    #[test]
    fn exact_small_arithmetic() {
        let ctx = MpContext::new(53, Direction::Nearest);
        assert_eq!(ctx.add(&mp(1.5), &mp(2.25)).to_f64(), 3.75);
        assert_eq!(ctx.sub(&mp(1.5), &mp(2.25)).to_f64(), -0.75);
        assert_eq!(ctx.mul(&mp(-3.0), &mp(0.5)).to_f64(), -1.5);
        assert_eq!(ctx.div(&mp(1.0), &mp(4.0)).to_f64(), 0.25);
        assert_eq!(ctx.div(&mp(1.0), &mp(3.0)).to_f64(), 1.0 / 3.0);
    }

    #[test]
    fn directed_rounding_brackets_nearest() {
        // 1/3 is inexact at any binary precision: up and down must straddle it.
        for &p in &[24u32, 53, 120] {
            let up = MpContext::new(p, Direction::Up).div(&mp(1.0), &mp(3.0));
            let down = MpContext::new(p, Direction::Down).div(&mp(1.0), &mp(3.0));
            assert_eq!(up.cmp_value(&down), Ordering::Greater, "p = {p}");
            let near = MpContext::new(p, Direction::Nearest).div(&mp(1.0), &mp(3.0));
            assert!(near.cmp_value(&down) != Ordering::Less);
            assert!(near.cmp_value(&up) != Ordering::Greater);
        }
    }

    #[test]
    fn ties_round_to_even() {
        // At p = 3, 1001b = 9 is a tie between 1000b and 1010b: even mantissa wins.
        let ctx = MpContext::new(3, Direction::Nearest);
        let r = ctx.add(&MpFloat::from_i64(8), &MpFloat::from_i64(1));
        assert_eq!(r.to_f64(), 8.0);
        // 1011b = 11 rounds up to 1100b = 12.
        let r = ctx.add(&MpFloat::from_i64(8), &MpFloat::from_i64(3));
        assert_eq!(r.to_f64(), 12.0);
    }

    #[test]
    fn division_sticky_affects_directed_rounding() {
        // 2^60 / 3 is inexact; with p large enough that the integer quotient
        // is exact to the stored width, the remainder must still push an
        // upward rounding.
        let a = MpFloat::from_raw(1, BigUint::one(), 60);
        let up = MpContext::new(61, Direction::Up).div(&a, &mp(3.0));
        let down = MpContext::new(61, Direction::Down).div(&a, &mp(3.0));
        assert_eq!(up.cmp_value(&down), Ordering::Greater);
    }

    #[test]
    fn monitor_on_empty_stream_reports_zero() {
        let monitor = RoundingMonitor::new();
        assert_eq!(monitor.max_relative_error(), 0.0);
        assert_eq!(monitor.operations(), 0);
    }

    #[test]
    fn monitor_bounds_by_rounding_mode() {
        let cases = [
            (Direction::Nearest, 1.0),
            (Direction::Up, 2.0),
            (Direction::Down, 2.0),
        ];
        let p = 24u32;
        let u = (-(p as f64)).exp2();
        for (direction, factor) in cases {
            let monitor = RoundingMonitor::new();
            let ctx = MpContext::new(p, direction).with_monitor(&monitor);
            let mut x = mp(1.0 / 3.0);
            for i in 1..200u32 {
                let y = mp(1.0 + f64::from(i) * 0.001);
                x = ctx.mul(&x, &y);
                x = ctx.add(&x, &mp(0.017));
            }
            assert!(monitor.operations() > 0);
            let max = monitor.max_relative_error();
            assert!(max <= factor * u, "{direction:?}: {max} > {factor}u");
            assert!(max > 0.0, "{direction:?}: expected some rounding");
        }
    }

    #[test]
    fn sin_matches_f64_reference() {
        for &x in &[0.1, -0.5, 1.0, 2.0, -13.7, 20.0] {
            let s = mp_sin(&mp(x), 120).to_f64();
            assert!((s - x.sin()).abs() <= 4.0 * f64::EPSILON * x.sin().abs().max(1e-3), "x = {x}");
        }
    }

    #[test]
    fn sin_high_precision_self_consistent() {
        // sin at 320 bits re-rounded to 160 bits equals sin at 160 bits.
        let x = mp(0.7625);
        let a = mp_sin(&x, 320).round(160, Direction::Nearest, false);
        let b = mp_sin(&x, 160);
        assert_eq!(a, b);
    }

    /// Keep magnitudes in a comfortably normal range so native f64 reference
    /// results involve neither overflow nor subnormals.
    fn normalish() -> impl Strategy<Value = f64> {
        prop_oneof![
            (1e-50f64..1e12),
            (1e-50f64..1e12).prop_map(|x| -x),
            Just(0.0),
        ]
    }

    /// Bit pattern with -0.0 folded onto +0.0 (MpFloat has no signed zero).
    fn bits_mod_zero(x: f64) -> u64 {
        if x == 0.0 {
            0
        } else {
            x.to_bits()
        }
    }

    proptest! {
        /// Soft arithmetic at (53, nearest) is exactly native f64 arithmetic
        /// away from overflow, subnormals and the sign of zero.
        #[test]
        fn soft_53_nearest_matches_native(a in normalish(), b in normalish()) {
            let ctx = MpContext::new(53, Direction::Nearest);
            prop_assert_eq!(bits_mod_zero(ctx.add(&mp(a), &mp(b)).to_f64()), bits_mod_zero(a + b));
            prop_assert_eq!(bits_mod_zero(ctx.sub(&mp(a), &mp(b)).to_f64()), bits_mod_zero(a - b));
            prop_assert_eq!(bits_mod_zero(ctx.mul(&mp(a), &mp(b)).to_f64()), bits_mod_zero(a * b));
            if b != 0.0 {
                prop_assert_eq!(bits_mod_zero(ctx.div(&mp(a), &mp(b)).to_f64()), bits_mod_zero(a / b));
            }
        }

        /// The standard-model bound |fl(x o y) - (x o y)| <= 2u|x o y| holds in
        /// every mode, and nearest stays within u.
        #[test]
        fn rounding_error_within_model_bound(
            a in normalish(),
            b in normalish(),
            p in 24u32..80,
            mode in 0usize..3,
        ) {
            let direction = [Direction::Nearest, Direction::Up, Direction::Down][mode];
            let ctx = MpContext::new(p, direction);
            let wide = MpContext::new(p + 64, Direction::Nearest);
            let u = (-(p as f64)).exp2();
            let bound = if direction == Direction::Nearest { u } else { 2.0 * u };
            for (r, e) in [
                (ctx.add(&mp(a), &mp(b)), wide.add(&mp(a), &mp(b))),
                (ctx.mul(&mp(a), &mp(b)), wide.mul(&mp(a), &mp(b))),
            ] {
                if e.is_zero() { continue; }
                let diff = wide.sub(&r, &e);
                if diff.is_zero() { continue; }
                let rel = ratio_abs_f64(&diff, &e);
                prop_assert!(rel <= bound, "rel {} vs bound {} (p={}, {:?})", rel, bound, p, direction);
            }
        }

        /// Directed modes always land on the correct side of the exact result.
        #[test]
        fn directed_modes_land_on_correct_side(
            a in normalish(),
            b in normalish(),
            p in 24u32..60,
        ) {
            let exact = mp(a).mul_exact(&mp(b));
            let up = MpContext::new(p, Direction::Up).mul(&mp(a), &mp(b));
            let down = MpContext::new(p, Direction::Down).mul(&mp(a), &mp(b));
            prop_assert!(up.cmp_value(&exact) != Ordering::Less);
            prop_assert!(down.cmp_value(&exact) != Ordering::Greater);
        }
    }
}
