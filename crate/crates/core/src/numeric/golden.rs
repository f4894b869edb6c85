//! Elements `a + b·φ` of the quadratic field ℚ(φ), φ = (1 + √5)/2.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{NumericError, Rational};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GoldenNumber {
    a: Rational,
    b: Rational,
}

/// Arithmetic selector for [`gn_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic; the only failure is division by zero.
pub fn gn_arith(x: &GoldenNumber, y: &GoldenNumber, op: ArithOp) -> Result<GoldenNumber, NumericError> {
    Ok(match op {
        ArithOp::Add => x + y,
        ArithOp::Sub => x - y,
        ArithOp::Mul => x * y,
        ArithOp::Div => x.checked_div(y).ok_or(NumericError::DivisionByZero)?,
    })
}

/// Exact sign of `x`.
pub fn gn_sign(x: &GoldenNumber) -> i32 {
    x.signum()
}

/// φⁿ = F(n)·φ + F(n−1).
pub fn phi_pow(n: u32) -> GoldenNumber {
    if n == 0 {
        return GoldenNumber::one();
    }
    let (mut prev, mut cur) = (BigInt::zero(), BigInt::from(1));
    for _ in 1..n {
        let next = &prev + &cur;
        prev = std::mem::replace(&mut cur, next);
    }
    GoldenNumber::new(Rational::from(prev), Rational::from(cur))
}

impl GoldenNumber {
    pub fn new(a: Rational, b: Rational) -> Self {
        GoldenNumber { a, b }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn phi() -> Self {
        GoldenNumber { a: Rational::zero(), b: Rational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        GoldenNumber { a: Rational::from_integer(n), b: Rational::zero() }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        GoldenNumber { a: Rational::new(num, den), b: Rational::zero() }
    }

    pub fn from_rational(a: Rational) -> Self {
        GoldenNumber { a, b: Rational::zero() }
    }

    /// Rational part.
    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// Coefficient of φ.
    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.b.is_zero() && self.a.is_integer()
    }

    /// The value as `i64` when it is an integer that fits.
    pub fn to_i64(&self) -> Option<i64> {
        if self.b.is_zero() {
            self.a.to_i64()
        } else {
            None
        }
    }

    pub fn signum(&self) -> i32 {
        // value = (x + y√5) / 2 with x = 2a + b, y = b
        let x = &(&self.a + &self.a) + &self.b;
        let y = &self.b;
        let (sx, sy) = (x.signum(), y.signum());
        if sy == 0 {
            return sx;
        }
        if sx == 0 {
            return sy;
        }
        if sx == sy {
            return sx;
        }
        // mixed signs: the term with the larger square wins
        let x2 = &x * &x;
        let y2 = &(y * y) * &Rational::from_integer(5);
        match x2.cmp(&y2) {
            Ordering::Greater => sx,
            Ordering::Less => sy,
            Ordering::Equal => unreachable!("√5 is irrational"),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `a + b·φ̄` with φ̄ = 1 − φ.
    pub fn conjugate(&self) -> Self {
        GoldenNumber { a: &self.a + &self.b, b: -&self.b }
    }

    /// Field norm `a² + ab − b²`; zero only for zero.
    pub fn norm(&self) -> Rational {
        &(&(&self.a * &self.a) + &(&self.a * &self.b)) - &(&self.b * &self.b)
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.b.is_zero() {
            return Some(GoldenNumber::from_rational(self.a.recip()?));
        }
        let n = self.norm().recip()?;
        let c = self.conjugate();
        Some(GoldenNumber { a: &c.a * &n, b: &c.b * &n })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.b.is_zero() {
            let r = rhs.a.recip()?;
            return Some(GoldenNumber { a: &self.a * &r, b: &self.b * &r });
        }
        Some(self * &rhs.recip()?)
    }

    /// Multiplies by a rational scalar.
    pub fn scale(&self, k: &Rational) -> Self {
        GoldenNumber { a: &self.a * k, b: &self.b * k }
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.scale(&Rational::from_integer(n))
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor();
        }
        let approx = self.to_decimal_scaled(4);
        // floor(value * 10^4) / 10^4 is within one of the answer
        let mut n = num_integer::Integer::div_floor(&approx, &BigInt::from(10_000));
        loop {
            let g = GoldenNumber::from_rational(Rational::from(n.clone()));
            if &g > self {
                n -= 1;
                continue;
            }
            let g1 = GoldenNumber::from_rational(Rational::from(&n + 1));
            if &g1 <= self {
                n += 1;
                continue;
            }
            return n;
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `true` when `self / divisor` is an integer.
    pub fn is_multiple_of(&self, divisor: &Self) -> bool {
        match self.checked_div(divisor) {
            Some(q) => q.is_integer(),
            None => false,
        }
    }

    /// floor(value · 10^digits) computed with integer square roots only.
    fn to_decimal_scaled(&self, digits: u32) -> BigInt {
        // value = (x + y√5)/2; bring x, y to a common denominator d.
        let x = &(&self.a + &self.a) + &self.b;
        let y = self.b.clone();
        let d = num_integer::Integer::lcm(&x.denom(), &y.denom());
        let xn = x.numer() * (&d / x.denom());
        let yn = y.numer() * (&d / y.denom());
        let guard = 8u32;
        let scale = BigInt::from(10).pow(digits + guard);
        // √5 · scale, floored; error below one unit of the guard digits
        let sqrt5 = (BigInt::from(5) * &scale * &scale).sqrt();
        let num = &xn * &scale + &yn * &sqrt5;
        let den = BigInt::from(2) * &d;
        let q = num_integer::Integer::div_floor(&num, &den);
        num_integer::Integer::div_floor(&q, &BigInt::from(10).pow(guard))
    }

    /// Decimal rendering with `digits` places after the point (display only).
    pub fn to_decimal(&self, digits: u32) -> String {
        let scaled = self.to_decimal_scaled(digits + 1);
        // round half away from zero on the extra digit
        let ten = BigInt::from(10);
        let rounded = if scaled.is_negative() {
            -num_integer::Integer::div_floor(&(-&scaled + 5), &ten)
        } else {
            num_integer::Integer::div_floor(&(&scaled + 5), &ten)
        };
        let neg = rounded.is_negative();
        let mut s = rounded.abs().to_string();
        let digits = digits as usize;
        if digits > 0 {
            if s.len() <= digits {
                s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
            }
            s.insert(s.len() - digits, '.');
        }
        if neg {
            s.insert(0, '-');
        }
        s
    }

    /// Approximate value (display and plotting only).
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64();
        }
        self.to_decimal(17).parse().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<i64> for GoldenNumber {
    fn from(n: i64) -> Self {
        GoldenNumber::from_int(n)
    }
}

impl From<Rational> for GoldenNumber {
    fn from(r: Rational) -> Self {
        GoldenNumber::from_rational(r)
    }
}

impl Ord for GoldenNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        match (self - other).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

impl PartialOrd for GoldenNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for &GoldenNumber {
    type Output = GoldenNumber;
    fn neg(self) -> GoldenNumber {
        GoldenNumber { a: -&self.a, b: -&self.b }
    }
}

impl Neg for GoldenNumber {
    type Output = GoldenNumber;
    fn neg(self) -> GoldenNumber {
        -&self
    }
}

fn add(x: &GoldenNumber, y: &GoldenNumber) -> GoldenNumber {
    GoldenNumber { a: &x.a + &y.a, b: &x.b + &y.b }
}

fn sub(x: &GoldenNumber, y: &GoldenNumber) -> GoldenNumber {
    GoldenNumber { a: &x.a - &y.a, b: &x.b - &y.b }
}

fn mul(x: &GoldenNumber, y: &GoldenNumber) -> GoldenNumber {
    if x.b.is_zero() {
        return y.scale(&x.a);
    }
    if y.b.is_zero() {
        return x.scale(&y.a);
    }
    // φ² = φ + 1
    let bb = &x.b * &y.b;
    GoldenNumber {
        a: &(&x.a * &y.a) + &bb,
        b: &(&(&x.a * &y.b) + &(&y.a * &x.b)) + &bb,
    }
}

fn div(x: &GoldenNumber, y: &GoldenNumber) -> GoldenNumber {
    x.checked_div(y).expect("division by zero")
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl $trait<&GoldenNumber> for &GoldenNumber {
            type Output = GoldenNumber;
            fn $method(self, rhs: &GoldenNumber) -> GoldenNumber {
                $f(self, rhs)
            }
        }
        impl $trait<GoldenNumber> for GoldenNumber {
            type Output = GoldenNumber;
            fn $method(self, rhs: GoldenNumber) -> GoldenNumber {
                $f(&self, &rhs)
            }
        }
        impl $trait<&GoldenNumber> for GoldenNumber {
            type Output = GoldenNumber;
            fn $method(self, rhs: &GoldenNumber) -> GoldenNumber {
                $f(&self, rhs)
            }
        }
        impl $trait<GoldenNumber> for &GoldenNumber {
            type Output = GoldenNumber;
            fn $method(self, rhs: GoldenNumber) -> GoldenNumber {
                $f(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add);
forward_binop!(Sub, sub, sub);
forward_binop!(Mul, mul, mul);
forward_binop!(Div, div, div);

impl std::iter::Sum for GoldenNumber {
    fn sum<I: Iterator<Item = GoldenNumber>>(iter: I) -> Self {
        iter.fold(GoldenNumber::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a GoldenNumber> for GoldenNumber {
    fn sum<I: Iterator<Item = &'a GoldenNumber>>(iter: I) -> Self {
        iter.fold(GoldenNumber::zero(), |acc, x| acc + x)
    }
}

/// Literal form `a/b + c/d*phi`; either term may be omitted.
impl fmt::Display for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi_term = |f: &mut fmt::Formatter<'_>, c: &Rational| -> fmt::Result {
            if *c == Rational::one() {
                write!(f, "phi")
            } else {
                write!(f, "{c}*phi")
            }
        };
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => {
                if self.b.signum() < 0 {
                    write!(f, "-")?;
                    phi_term(f, &self.b.abs())
                } else {
                    phi_term(f, &self.b)
                }
            }
            (false, false) => {
                write!(f, "{}", self.a)?;
                if self.b.signum() < 0 {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                phi_term(f, &self.b.abs())
            }
        }
    }
}

impl fmt::Debug for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for GoldenNumber {
    type Err = NumericError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericError::Literal(s.trim().to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        // split into signed terms at every '+'/'-' that starts a term
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut negative = false;
        let mut prev: Option<char> = None;
        for c in compact.chars() {
            let starts_term = (c == '+' || c == '-') && !matches!(prev, Some('/') | Some('*'));
            if starts_term {
                if !cur.is_empty() {
                    terms.push((negative, std::mem::take(&mut cur)));
                    negative = false;
                } else if prev.is_some() && !matches!(prev, Some('+') | Some('-')) {
                    return Err(bad());
                }
                if c == '-' {
                    negative = !negative;
                }
            } else {
                cur.push(c);
            }
            prev = Some(c);
        }
        if cur.is_empty() {
            return Err(bad());
        }
        terms.push((negative, cur));

        let mut value = GoldenNumber::zero();
        for (neg, term) in terms {
            let lower = term.to_ascii_lowercase();
            let (coef, is_phi) = if lower == "phi" {
                (Rational::one(), true)
            } else if let Some(c) = lower.strip_suffix("*phi") {
                (c.parse::<Rational>().map_err(|_| bad())?, true)
            } else {
                (lower.parse::<Rational>().map_err(|_| bad())?, false)
            };
            let coef = if neg { -coef } else { coef };
            let t = if is_phi {
                GoldenNumber::new(Rational::zero(), coef)
            } else {
                GoldenNumber::from_rational(coef)
            };
            value = value + t;
        }
        Ok(value)
    }
}

/// Parses a literal, for tests and examples.
pub fn g(s: &str) -> GoldenNumber {
    s.parse().unwrap_or_else(|e| panic!("bad literal {s:?}: {e}"))
}

impl GoldenNumber {
    /// Value rounded to `u64` when non-negative and representable; counts only.
    pub fn floor_u64(&self) -> Option<u64> {
        self.floor().to_u64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relation() {
        let phi = GoldenNumber::phi();
        assert_eq!(&phi * &phi, g("1 + phi"));
        assert_eq!(gn_sign(&(&(&phi * &phi) - &phi - GoldenNumber::one())), 0);
        assert_eq!(gn_arith(&GoldenNumber::from_int(2), &phi, ArithOp::Mul).unwrap(), g("2*phi"));
    }

    #[test]
    fn reciprocal_of_phi() {
        let inv = gn_arith(&GoldenNumber::one(), &GoldenNumber::phi(), ArithOp::Div).unwrap();
        assert_eq!(inv, g("-1 + phi"));
        assert_eq!(&inv * &GoldenNumber::phi(), GoldenNumber::one());
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let r = gn_arith(&GoldenNumber::one(), &GoldenNumber::zero(), ArithOp::Div);
        assert_eq!(r, Err(NumericError::DivisionByZero));
    }

    #[test]
    fn signs() {
        assert_eq!(gn_sign(&g("-1 + phi")), 1);
        // mixed-sign branch: x = -9/4, y = 1
        assert_eq!(gn_sign(&g("-13/8 + phi")), -1);
        assert_eq!(gn_sign(&g("13/8 - phi")), 1);
        assert_eq!(gn_sign(&GoldenNumber::zero()), 0);
    }

    #[test]
    fn powers() {
        assert_eq!(phi_pow(0), GoldenNumber::one());
        assert_eq!(phi_pow(2), g("1 + phi"));
        let phi = GoldenNumber::phi();
        let by_mul = (0..4).fold(GoldenNumber::one(), |acc, _| &acc * &phi);
        assert_eq!(phi_pow(4), by_mul);
        assert_eq!(phi_pow(4), g("2 + 3*phi"));
    }

    #[test]
    fn literal_round_trip() {
        for lit in ["0", "3/2", "phi", "-phi", "1/2 + 3/4*phi", "-7 - 2/3*phi", "5*phi"] {
            let v = g(lit);
            assert_eq!(g(&v.to_string()), v, "{lit}");
        }
        assert_eq!(g("1/2+3/4*phi"), g("1/2 + 3/4*phi"));
        assert_eq!(g("2*phi + 1"), g("1 + 2*phi"));
    }

    #[test]
    fn literal_errors_name_the_token() {
        let e = "1/2 + x*phi".parse::<GoldenNumber>().unwrap_err();
        assert!(e.to_string().contains("1/2 + x*phi"));
        assert!("".parse::<GoldenNumber>().is_err());
        assert!("1 +".parse::<GoldenNumber>().is_err());
        assert!("1/0".parse::<GoldenNumber>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(GoldenNumber::phi().to_decimal(12), "1.618033988750");
        assert_eq!(g("-1/3").to_decimal(4), "-0.3333");
        assert_eq!(g("1 - phi").to_decimal(6), "-0.618034");
        assert_eq!(g("7").to_decimal(0), "7");
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(GoldenNumber::phi().floor(), BigInt::from(1));
        assert_eq!(g("-phi").floor(), BigInt::from(-2));
        assert_eq!(g("3 - 2*phi").ceil(), BigInt::from(0));
        assert_eq!(g("4").floor(), BigInt::from(4));
    }

    #[test]
    fn multiples() {
        assert!(g("4").is_multiple_of(&g("2")));
        assert!(!g("3").is_multiple_of(&g("2")));
        assert!(g("2 + 2*phi").is_multiple_of(&g("1 + phi")));
        assert!(!g("phi").is_multiple_of(&g("1")));
    }
}
