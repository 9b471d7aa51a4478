//! Closed intervals with rational endpoints and outward rounding, used to
//! evaluate expressions involving ln, exp and square roots rigorously.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Endpoints are rounded outward to multiples of 2^-BITS.
const BITS: u64 = 100;
/// Series are summed until the next term drops below 2^-(BITS + 8); the
/// remainder is then bounded explicitly.
const CUTOFF: u64 = BITS + 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn scale() -> BigInt {
    BigInt::one() << BITS
}

fn negligible(x: &BigRational) -> bool {
    x.abs() * BigRational::from_integer(BigInt::one() << CUTOFF) < BigRational::one()
}

fn round_down(x: &BigRational) -> BigRational {
    let s = scale();
    let n = (x.numer() * &s).div_floor(x.denom());
    BigRational::new(n, s)
}

fn round_up(x: &BigRational) -> BigRational {
    let s = scale();
    let n = (x.numer() * &s).div_ceil(x.denom());
    BigRational::new(n, s)
}

impl Interval {
    pub fn exact(x: BigRational) -> Interval {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn int(n: i64) -> Interval {
        Interval::exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Interval {
        Interval::exact(rat(n, d))
    }

    fn rounded(lo: BigRational, hi: BigRational) -> Interval {
        debug_assert!(lo <= hi);
        Interval { lo: round_down(&lo), hi: round_up(&hi) }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))).to_f64().unwrap_or(f64::NAN)
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::rounded(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::rounded(lo, hi)
    }

    pub fn recip(&self) -> Interval {
        assert!(self.lo.is_positive() || self.hi.is_negative(), "reciprocal of an interval containing 0");
        Interval::rounded(self.hi.recip(), self.lo.recip())
    }

    pub fn div(&self, o: &Interval) -> Interval {
        self.mul(&o.recip())
    }

    pub fn scale(&self, n: i64) -> Interval {
        self.mul(&Interval::int(n))
    }

    pub fn square(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = (&self.lo * &self.lo).max(&self.hi * &self.hi);
            return Interval::rounded(BigRational::zero(), m);
        }
        self.mul(self)
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: (&self.lo).max(&o.lo).clone(), hi: (&self.hi).max(&o.hi).clone() }
    }

    /// ln of a positive interval.
    pub fn ln(&self) -> Interval {
        assert!(self.lo.is_positive(), "ln of a non-positive interval");
        Interval { lo: ln_rat(&self.lo).lo, hi: ln_rat(&self.hi).hi }
    }

    pub fn exp(&self) -> Interval {
        Interval { lo: exp_rat(&self.lo).lo, hi: exp_rat(&self.hi).hi }
    }

    pub fn sqrt(&self) -> Interval {
        assert!(!self.lo.is_negative(), "square root of a negative interval");
        Interval { lo: sqrt_rat(&self.lo).lo, hi: sqrt_rat(&self.hi).hi }
    }

    /// x^y = exp(y ln x) for x > 0.
    pub fn pow(&self, y: &Interval) -> Interval {
        let l = self.ln();
        let c = [y.lo.clone() * &l.lo, y.lo.clone() * &l.hi, y.hi.clone() * &l.lo, y.hi.clone() * &l.hi];
        let e = Interval { lo: c.iter().min().unwrap().clone(), hi: c.iter().max().unwrap().clone() };
        e.exp()
    }

    /// log_b(x) = ln x / ln b.
    pub fn log(&self, b: &Interval) -> Interval {
        self.ln().div(&b.ln())
    }

    /// Whether every point of self is ≤ every point of o.
    pub fn certainly_le(&self, o: &Interval) -> bool {
        self.hi <= o.lo
    }

    pub fn certainly_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

fn decimal(x: &BigRational, digits: usize, up: bool) -> String {
    let s = BigInt::from(10).pow(digits as u32);
    let n = if up { (x.numer() * &s).div_ceil(x.denom()) } else { (x.numer() * &s).div_floor(x.denom()) };
    let neg = n.is_negative();
    let a = n.abs().to_string();
    let a = format!("{:0>width$}", a, width = digits + 1);
    let (ip, fp) = a.split_at(a.len() - digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, ip, fp)
}

impl Interval {
    /// Endpoints as decimals rounded outward.
    pub fn to_decimal(&self, digits: usize) -> (String, String) {
        (decimal(&self.lo, digits, false), decimal(&self.hi, digits, true))
    }
}

impl serde::Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (lo, hi) = self.to_decimal(12);
        let mut st = ser.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &lo)?;
        st.serialize_field("hi", &hi)?;
        st.end()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal(15);
        write!(f, "[{lo}, {hi}]")
    }
}

/// 2·atanh(y) for 0 ≤ y ≤ 1/2 with the remainder bounded by the geometric tail.
fn two_atanh(y: &BigRational) -> Interval {
    let y2 = y * y;
    let mut term = y.clone();
    let mut sum = BigRational::zero();
    let mut j = 0usize;
    while !negligible(&term) {
        sum += &term / BigRational::from_integer(BigInt::from(2 * j + 1));
        term *= &y2;
        j += 1;
    }
    // Remaining terms: Σ_{i ≥ j} y^{2i+1}/(2i+1) ≤ y^{2j+1}/((2j+1)(1 − y²)).
    let tail = &term / (BigRational::from_integer(BigInt::from(2 * j + 1)) * (BigRational::one() - &y2));
    let two = BigRational::from_integer(BigInt::from(2));
    Interval::rounded(&sum * &two, (&sum + &tail) * &two)
}

pub fn ln2() -> Interval {
    static LN2: OnceLock<Interval> = OnceLock::new();
    LN2.get_or_init(|| two_atanh(&rat(1, 3))).clone()
}

fn ln_rat(x: &BigRational) -> Interval {
    assert!(x.is_positive());
    // x = 2^k m with 1 ≤ m < 2.
    let mut k: i64 = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = BigRational::from_integer(BigInt::from(2));
    let pow2 = |e: i64| two.pow(e as i32);
    let mut m = x / pow2(k);
    while m >= two {
        m /= &two;
        k += 1;
    }
    while m < BigRational::one() {
        m *= &two;
        k -= 1;
    }
    let y = (&m - BigRational::one()) / (&m + BigRational::one());
    two_atanh(&y).add(&ln2().scale(k))
}

fn exp_rat(x: &BigRational) -> Interval {
    // exp(x) = exp(x / 2^s)^(2^s) with |x / 2^s| ≤ 1/2.
    let mut s = 0u32;
    let half = rat(1, 2);
    let mut t = x.clone();
    while t.abs() > half {
        t /= BigRational::from_integer(BigInt::from(2));
        s += 1;
    }
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    let mut j = 0i64;
    while !negligible(&term) {
        sum += &term;
        j += 1;
        term = term * &t / BigRational::from_integer(BigInt::from(j));
    }
    // |remainder| ≤ 2|t|^j/j! for |t| ≤ 1/2.
    let tail = term.abs() * BigRational::from_integer(BigInt::from(2));
    let mut r = Interval::rounded(&sum - &tail, &sum + &tail);
    for _ in 0..s {
        r = r.square();
    }
    r
}

fn sqrt_rat(x: &BigRational) -> Interval {
    let s = scale();
    // floor and ceil of x·4^BITS, then integer square roots.
    let big = x.numer() * &s * &s;
    let fl = big.div_floor(x.denom());
    let ce = big.div_ceil(x.denom());
    let r_lo = fl.to_biguint().map(|u| u.sqrt()).unwrap_or_else(BigUint::zero);
    let mut r_hi = ce.to_biguint().map(|u| u.sqrt()).unwrap_or_else(BigUint::zero);
    if BigInt::from(r_hi.clone() * r_hi.clone()) < ce {
        r_hi += 1u32;
    }
    Interval { lo: BigRational::new(BigInt::from(r_lo), s.clone()), hi: BigRational::new(BigInt::from(r_hi), s) }
}
