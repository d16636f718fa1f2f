//! Exact money arithmetic and the extended non-negative money line.
//!
//! All prices, costs and cost-of-pass values are exact rationals. Decimal
//! literals such as `0.15` or `4.8e-5` parse to the exact rational they
//! denote, so sums over thousands of attempts never pick up binary rounding
//! error. Conversion to `f64` happens only at the statistics boundary.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal amount {input:?}: {reason}")]
pub struct ParseAmountError {
    pub input: String,
    pub reason: &'static str,
}

/// An exact monetary amount (or any exact quantity measured in money units).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn from_integer(value: i64) -> Self {
        Money(BigRational::from_integer(BigInt::from(value)))
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Money(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_rational(value: BigRational) -> Self {
        Money(value)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Multiplies by an exact rational factor.
    pub fn scale(&self, factor: &BigRational) -> Money {
        Money(&self.0 * factor)
    }

    /// Divides by an exact rational; `None` when the divisor is zero.
    pub fn checked_div_rational(&self, divisor: &BigRational) -> Option<Money> {
        if divisor.is_zero() {
            None
        } else {
            Some(Money(&self.0 / divisor))
        }
    }

    /// Arithmetic mean; `None` for an empty slice.
    pub fn mean<'a, I>(values: I) -> Option<Money>
    where
        I: IntoIterator<Item = &'a Money>,
    {
        let mut total = BigRational::zero();
        let mut count: i64 = 0;
        for v in values {
            total += &v.0;
            count += 1;
        }
        if count == 0 {
            None
        } else {
            Some(Money(
                total / BigRational::from_integer(BigInt::from(count)),
            ))
        }
    }

    /// True when the value has a finite decimal expansion.
    pub fn is_terminating_decimal(&self) -> bool {
        let mut d = self.0.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        while d.is_even() {
            d /= &two;
        }
        while (&d % &five).is_zero() {
            d /= &five;
        }
        d.is_one()
    }

    /// Decimal rendering rounded half-away-from-zero to at most
    /// `max_fraction_digits` places, trailing zeros trimmed.
    pub fn to_decimal_string(&self, max_fraction_digits: usize) -> String {
        let negative = self.0.is_negative();
        let abs = self.0.abs();
        let denom = abs.denom().clone();
        let (mut int_part, mut rem) = abs.numer().div_rem(&denom);
        let ten = BigInt::from(10);
        let mut digits: Vec<u8> = Vec::with_capacity(max_fraction_digits.min(64));
        for _ in 0..max_fraction_digits {
            if rem.is_zero() {
                break;
            }
            rem *= &ten;
            let (q, r) = rem.div_rem(&denom);
            digits.push(q.to_u8().unwrap_or(0));
            rem = r;
        }
        if !rem.is_zero() && (&rem * BigInt::from(2)) >= denom {
            // round up with carry
            let mut i = digits.len();
            loop {
                if i == 0 {
                    int_part += BigInt::one();
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        let mut out = String::new();
        if negative && (!int_part.is_zero() || !digits.is_empty()) {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if !digits.is_empty() {
            out.push('.');
            out.extend(digits.iter().map(|d| char::from(b'0' + d)));
        }
        out
    }

    /// Full-precision text: the exact decimal when it terminates, otherwise
    /// 30 significant digits.
    pub fn to_full_precision_string(&self) -> String {
        if self.is_terminating_decimal() {
            // a terminating expansion has at most max(twos, fives) digits
            return self.to_decimal_string(usize::MAX);
        }
        let exp = decimal_exponent(&self.0.abs());
        let frac = (29 - exp).max(0) as usize;
        self.to_decimal_string(frac)
    }

    /// Display with `sig` significant figures; scientific notation for very
    /// small or very large magnitudes.
    pub fn format_significant(&self, sig: usize) -> String {
        format_significant(&self.0, sig)
    }
}

/// floor(log10(|x|)) for x != 0.
fn decimal_exponent(x: &BigRational) -> i64 {
    let ten = BigRational::from_integer(BigInt::from(10));
    let x = x.abs();
    if x.is_zero() {
        return 0;
    }
    let mut e: i64 = 0;
    let mut p = BigRational::one();
    if x >= p {
        while x >= &p * &ten {
            p = &p * &ten;
            e += 1;
        }
    } else {
        while x < p {
            p = &p / &ten;
            e -= 1;
        }
    }
    e
}

fn pow10(e: i64) -> BigRational {
    let ten = BigInt::from(10);
    if e >= 0 {
        BigRational::from_integer(num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(BigInt::one(), num_traits::pow(ten, (-e) as usize))
    }
}

fn format_significant(x: &BigRational, sig: usize) -> String {
    let sig = sig.max(1);
    if x.is_zero() {
        return "0".to_string();
    }
    let negative = x.is_negative();
    let abs = x.abs();
    let mut exp = decimal_exponent(&abs);
    let mut scaled = (&abs / pow10(exp - sig as i64 + 1)).round().to_integer();
    if scaled >= num_traits::pow(BigInt::from(10), sig) {
        exp += 1;
        scaled = (&abs / pow10(exp - sig as i64 + 1)).round().to_integer();
    }
    let digits = scaled.to_string();
    let sign = if negative { "-" } else { "" };
    if !(-4..6).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    } else if exp >= sig as i64 - 1 {
        let zeros = (exp - (sig as i64 - 1)) as usize;
        format!("{sign}{digits}{}", "0".repeat(zeros))
    } else if exp >= 0 {
        let (head, tail) = digits.split_at(exp as usize + 1);
        format!("{sign}{head}.{tail}")
    } else {
        let zeros = (-exp - 1) as usize;
        format!("{sign}0.{}{digits}", "0".repeat(zeros))
    }
}

/// Parses a decimal literal (`12`, `-0.15`, `4.8e-5`, `1,000.5`) or an exact
/// fraction (`175/3`) into a rational.
pub fn parse_rational(input: &str) -> Result<BigRational, ParseAmountError> {
    let err = |reason| ParseAmountError {
        input: input.to_string(),
        reason,
    };
    let s = input.trim();
    if s.is_empty() {
        return Err(err("empty"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| err("bad exponent"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let mantissa: String = mantissa
        .chars()
        .filter(|c| *c != ',' && *c != '_')
        .collect();
    let (int_digits, frac_digits) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa.as_str(), ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(err("no digits"));
    }
    if !int_digits.bytes().all(|b| b.is_ascii_digit())
        || !frac_digits.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err("unexpected character"));
    }
    let all = format!("{int_digits}{frac_digits}");
    let numer = BigInt::parse_bytes(all.as_bytes(), 10).unwrap_or_else(BigInt::zero);
    let numer = if negative { -numer } else { numer };
    let value = BigRational::from_integer(numer) * pow10(exponent - frac_digits.len() as i64);
    Ok(value)
}

impl FromStr for Money {
    type Err = ParseAmountError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Money)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_full_precision_string())
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({})", self.0)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Money> for &'a Money {
    type Output = Money;
    fn add(self, rhs: &Money) -> Money {
        Money(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl<'a> Sub<&'a Money> for &'a Money {
    type Output = Money;
    fn sub(self, rhs: &Money) -> Money {
        Money(&self.0 - &rhs.0)
    }
}

impl Mul<&BigRational> for &Money {
    type Output = Money;
    fn mul(self, rhs: &BigRational) -> Money {
        Money(&self.0 * rhs)
    }
}

impl Div<&BigRational> for &Money {
    type Output = Money;
    fn div(self, rhs: &BigRational) -> Money {
        Money(&self.0 / rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        let mut acc = Money::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Exact serialized form: the decimal literal when it terminates, else `p/q`.
pub fn exact_string(value: &BigRational) -> String {
    let m = Money(value.clone());
    if m.is_terminating_decimal() {
        m.to_decimal_string(usize::MAX)
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&exact_string(&self.0))
    }
}

struct AmountVisitor;

impl Visitor<'_> for AmountVisitor {
    type Value = BigRational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a decimal amount as a string or number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        parse_rational(v).map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        Ok(BigRational::from_integer(BigInt::from(v)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        Ok(BigRational::from_integer(BigInt::from(v)))
    }

    // Rust's shortest round-trip float formatting recovers the literal the
    // file author wrote (0.15 -> "0.15"), which then parses exactly.
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite amount"));
        }
        parse_rational(&format!("{v:e}")).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(AmountVisitor).map(Money)
    }
}

/// A value on the extended non-negative money line: finite money or INFINITY.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtMoney {
    Finite(Money),
    Infinite,
}

impl ExtMoney {
    pub fn zero() -> Self {
        ExtMoney::Finite(Money::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtMoney::Finite(_))
    }

    pub fn finite(&self) -> Option<&Money> {
        match self {
            ExtMoney::Finite(m) => Some(m),
            ExtMoney::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtMoney::Finite(m) => m.to_f64(),
            ExtMoney::Infinite => f64::INFINITY,
        }
    }

    /// Mean with INFINITY absorbing; `None` when empty.
    pub fn mean<'a, I>(values: I) -> Option<ExtMoney>
    where
        I: IntoIterator<Item = &'a ExtMoney>,
    {
        let mut finite = Vec::new();
        let mut any = false;
        let mut infinite = false;
        for v in values {
            any = true;
            match v {
                ExtMoney::Finite(m) => finite.push(m),
                ExtMoney::Infinite => infinite = true,
            }
        }
        if !any {
            None
        } else if infinite {
            Some(ExtMoney::Infinite)
        } else {
            Money::mean(finite).map(ExtMoney::Finite)
        }
    }

    /// Frontier difference `self - other` where `other <= self` is expected:
    /// INFINITY - finite = INFINITY, INFINITY - INFINITY = 0. Returns `None`
    /// for finite - INFINITY, which has no value on this line.
    pub fn reduction_to(&self, other: &ExtMoney) -> Option<ExtMoney> {
        match (self, other) {
            (ExtMoney::Infinite, ExtMoney::Infinite) => Some(ExtMoney::zero()),
            (ExtMoney::Infinite, ExtMoney::Finite(_)) => Some(ExtMoney::Infinite),
            (ExtMoney::Finite(_), ExtMoney::Infinite) => None,
            (ExtMoney::Finite(a), ExtMoney::Finite(b)) => Some(ExtMoney::Finite(a - b)),
        }
    }

    /// `self / other` under finite / INFINITY = 0. `None` for INFINITY
    /// numerators over anything and for a zero finite divisor.
    pub fn ratio(&self, other: &ExtMoney) -> Option<BigRational> {
        match (self, other) {
            (ExtMoney::Finite(_), ExtMoney::Infinite) => Some(BigRational::zero()),
            (ExtMoney::Infinite, _) => None,
            (ExtMoney::Finite(a), ExtMoney::Finite(b)) => {
                if b.is_zero() {
                    None
                } else {
                    Some(a.as_rational() / b.as_rational())
                }
            }
        }
    }

    pub fn scale(&self, factor: &BigRational) -> ExtMoney {
        match self {
            ExtMoney::Finite(m) => ExtMoney::Finite(m.scale(factor)),
            ExtMoney::Infinite => ExtMoney::Infinite,
        }
    }

    pub fn format_significant(&self, sig: usize) -> String {
        match self {
            ExtMoney::Finite(m) => m.format_significant(sig),
            ExtMoney::Infinite => "inf".to_string(),
        }
    }

    pub fn to_full_precision_string(&self) -> String {
        match self {
            ExtMoney::Finite(m) => m.to_full_precision_string(),
            ExtMoney::Infinite => "inf".to_string(),
        }
    }
}

impl From<Money> for ExtMoney {
    fn from(m: Money) -> Self {
        ExtMoney::Finite(m)
    }
}

impl PartialOrd for ExtMoney {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtMoney {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtMoney::Finite(a), ExtMoney::Finite(b)) => a.cmp(b),
            (ExtMoney::Finite(_), ExtMoney::Infinite) => Ordering::Less,
            (ExtMoney::Infinite, ExtMoney::Finite(_)) => Ordering::Greater,
            (ExtMoney::Infinite, ExtMoney::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_full_precision_string())
    }
}

impl Serialize for ExtMoney {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtMoney::Finite(m) => m.serialize(serializer),
            ExtMoney::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtMoney {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = ExtMoney;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal amount or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtMoney, E> {
                if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") {
                    Ok(ExtMoney::Infinite)
                } else {
                    AmountVisitor
                        .visit_str(v)
                        .map(|r| ExtMoney::Finite(Money(r)))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtMoney, E> {
                AmountVisitor
                    .visit_i64(v)
                    .map(|r| ExtMoney::Finite(Money(r)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtMoney, E> {
                AmountVisitor
                    .visit_u64(v)
                    .map(|r| ExtMoney::Finite(Money(r)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtMoney, E> {
                AmountVisitor
                    .visit_f64(v)
                    .map(|r| ExtMoney::Finite(Money(r)))
            }
        }
        deserializer.deserialize_any(ExtVisitor)
    }
}

/// An exact proportion, used for relative gains and essentialness shares.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub BigRational);

impl Fraction {
    pub fn zero() -> Self {
        Fraction(BigRational::zero())
    }

    pub fn one() -> Self {
        Fraction(BigRational::one())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// The fraction times 100, exactly.
    pub fn percent(&self) -> Money {
        Money(&self.0 * BigRational::from_integer(BigInt::from(100)))
    }

    pub fn percent_string(&self, decimals: usize) -> String {
        self.percent().to_decimal_string(decimals)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&exact_string(&self.0))
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(AmountVisitor).map(Fraction)
    }
}

/// Builds a rational `n / d` from unsigned counts.
pub fn count_ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, n.into()),
        BigInt::from_biguint(Sign::Plus, d.into()),
    )
}
