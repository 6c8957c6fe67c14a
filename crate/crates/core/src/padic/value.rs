use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NormValue;
use crate::error::{Error, Result};

/// Largest digit count `L` with `p^L <= 2^62` for prime `p`.
pub fn capacity(p: u32) -> u32 {
    (1u64 << 62).ilog(u64::from(p))
}

/// `p^e` as `u64`. Panics on overflow, which callers avoid by respecting [`capacity`].
pub fn pow_u64(p: u32, e: u32) -> u64 {
    u64::from(p).checked_pow(e).expect("p^e overflows u64")
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A truncated p-adic number `p^base * mantissa`, exact modulo `p^(base+len)`.
///
/// Nonzero values are kept normalized (`mantissa % p != 0`), so `base` is the
/// valuation. A zero mantissa means "zero to the known precision".
#[derive(Clone, Copy, Debug)]
pub struct PAdic {
    prime: u32,
    base: i32,
    len: u32,
    mantissa: u64,
}

impl PAdic {
    fn raw(prime: u32, base: i32, len: u32, mantissa: u64) -> Self {
        let mut x = PAdic { prime, base, len, mantissa };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let p = u64::from(self.prime);
        if self.mantissa == 0 {
            let prec = self.prec();
            let cap = capacity(self.prime) as i32;
            self.base = if prec <= 0 {
                prec
            } else if prec <= cap {
                0
            } else {
                prec - cap
            };
            self.len = (prec - self.base) as u32;
            return;
        }
        while self.mantissa.is_multiple_of(p) {
            self.mantissa /= p;
            self.base += 1;
            self.len -= 1;
        }
    }

    /// Zero known modulo `p^prec`.
    pub fn zero(prime: u32, prec: i32) -> Self {
        PAdic::raw(prime, prec, 0, 0)
    }

    /// Builds `sum digits[i] * p^(u+i)`, exact modulo `p^(u+len)`.
    ///
    /// Digits past the capacity of the prime are dropped, lowering the precision.
    pub fn from_digits(prime: u32, u: i32, digits: &[u32]) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::BadParams(format!("{prime} is not prime")));
        }
        for (position, &d) in digits.iter().enumerate() {
            if d >= prime {
                return Err(Error::AlphabetViolation { digit: u64::from(d), position, prime });
            }
        }
        let first = digits.iter().position(|&d| d != 0);
        let Some(first) = first else {
            return Ok(PAdic::zero(prime, u + digits.len() as i32));
        };
        let cap = capacity(prime) as usize;
        let kept = &digits[first..digits.len().min(first + cap)];
        let mut mantissa = 0u64;
        for &d in kept.iter().rev() {
            mantissa = mantissa * u64::from(prime) + u64::from(d);
        }
        Ok(PAdic::raw(prime, u + first as i32, kept.len() as u32, mantissa))
    }

    /// The integer `value` (taken modulo `p^prec`), exact modulo `p^prec`.
    pub fn from_i64(prime: u32, value: i64, prec: i32) -> Self {
        if prec <= 0 {
            return PAdic::zero(prime, prec);
        }
        let cap = capacity(prime);
        let len = (prec as u32).min(cap);
        let modulus = pow_u64(prime, len);
        let r = value.unsigned_abs() % modulus;
        let m = if value < 0 && r != 0 { modulus - r } else { r };
        PAdic::raw(prime, 0, len, m)
    }

    /// The integer `value` with as many digits as the prime allows.
    pub fn constant(prime: u32, value: i64) -> Self {
        PAdic::from_i64(prime, value, capacity(prime) as i32)
    }

    /// `index * p^floor`, exact modulo `p^prec`. Inverse of [`PAdic::index`].
    pub fn from_index(prime: u32, floor: i32, prec: i32, index: u64) -> Self {
        let len = (prec - floor).max(0) as u32;
        let m = if len == 0 { 0 } else { index % pow_u64(prime, len) };
        PAdic::raw(prime, floor, len, m)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// Exponent of the first stored digit; the valuation when nonzero.
    pub fn base_exp(&self) -> i32 {
        self.base
    }

    /// Absolute precision: the value is exact modulo `p^prec`.
    pub fn prec(&self) -> i32 {
        self.base + self.len as i32
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn mantissa(&self) -> u64 {
        self.mantissa
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    pub fn valuation(&self) -> Option<i32> {
        (!self.is_zero()).then_some(self.base)
    }

    /// Lower bound on the valuation (the precision itself for zero).
    pub fn val_lower(&self) -> i32 {
        if self.is_zero() {
            self.prec()
        } else {
            self.base
        }
    }

    pub fn norm(&self) -> NormValue {
        match self.valuation() {
            Some(v) => NormValue::Pow(v),
            None => NormValue::Zero,
        }
    }

    pub fn known_radius(&self) -> NormValue {
        NormValue::Pow(self.prec())
    }

    /// Little-endian digits starting at [`PAdic::base_exp`].
    pub fn digits(&self) -> Vec<u32> {
        let p = u64::from(self.prime);
        let mut m = self.mantissa;
        (0..self.len)
            .map(|_| {
                let d = (m % p) as u32;
                m /= p;
                d
            })
            .collect()
    }

    /// Digit at absolute position `pos`, or `None` past the precision.
    pub fn digit(&self, pos: i32) -> Option<u32> {
        if pos >= self.prec() {
            return None;
        }
        if pos < self.base {
            return Some(0);
        }
        let shift = (pos - self.base) as u32;
        Some(((self.mantissa / pow_u64(self.prime, shift)) % u64::from(self.prime)) as u32)
    }

    /// Digits at positions `floor..prec` read as an integer. `None` if the
    /// value is not known that far or has digits below `floor`.
    pub fn index(&self, floor: i32, prec: i32) -> Option<u64> {
        if self.prec() < prec || self.val_lower() < floor {
            return None;
        }
        if self.is_zero() || self.base >= prec {
            return Some(0);
        }
        let keep = (prec - self.base) as u32;
        let m = self.mantissa % pow_u64(self.prime, keep);
        Some(m * pow_u64(self.prime, (self.base - floor) as u32))
    }

    /// Like [`PAdic::index`] but pads unknown digits with zeros.
    pub fn index_padded(&self, floor: i32, prec: i32) -> Option<u64> {
        if self.val_lower() < floor && !self.is_zero() {
            return None;
        }
        if self.is_zero() || self.base >= prec {
            return Some(0);
        }
        let keep = ((prec - self.base) as u32).min(self.len);
        let m = self.mantissa % pow_u64(self.prime, keep);
        Some(m * pow_u64(self.prime, (self.base - floor) as u32))
    }

    /// Reads the stored digits as an exact value (zeros beyond the precision).
    pub fn exact(&self) -> Self {
        let cap = capacity(self.prime);
        if self.is_zero() {
            return PAdic::zero(self.prime, self.prec().max(0) + cap as i32);
        }
        PAdic { len: cap, ..*self }
    }

    /// Forget everything past `p^prec`.
    pub fn truncate(&self, prec: i32) -> Self {
        if prec >= self.prec() {
            return *self;
        }
        if prec <= self.base {
            return PAdic::zero(self.prime, prec);
        }
        let len = (prec - self.base) as u32;
        PAdic::raw(self.prime, self.base, len, self.mantissa % pow_u64(self.prime, len))
    }

    /// Multiply by `p^m`.
    pub fn shift(&self, m: i32) -> Self {
        if self.is_zero() {
            return PAdic::zero(self.prime, self.prec() + m);
        }
        PAdic { base: self.base + m, ..*self }
    }

    fn check_prime(&self, other: &PAdic) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    /// Mantissa re-expressed relative to base `b <= self.base`, modulo `p^(prec-b)`.
    fn aligned(&self, b: i32, prec: i32) -> u64 {
        let shift = self.base - b;
        if self.is_zero() || self.base >= prec {
            return 0;
        }
        let keep = (prec - self.base) as u32;
        (self.mantissa % pow_u64(self.prime, keep)) * pow_u64(self.prime, shift as u32)
    }

    pub fn checked_add(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        let prec = self.prec().min(other.prec());
        let b = self.base.min(other.base).min(prec);
        let len = (prec - b) as u32;
        if len == 0 {
            return Ok(PAdic::zero(self.prime, prec));
        }
        let modulus = pow_u64(self.prime, len);
        let s = (self.aligned(b, prec) + other.aligned(b, prec)) % modulus;
        Ok(PAdic::raw(self.prime, b, len, s))
    }

    pub fn neg(&self) -> PAdic {
        if self.is_zero() {
            return *self;
        }
        let modulus = pow_u64(self.prime, self.len);
        PAdic::raw(self.prime, self.base, self.len, modulus - self.mantissa)
    }

    pub fn checked_sub(&self, other: &PAdic) -> Result<PAdic> {
        self.checked_add(&other.neg())
    }

    pub fn checked_mul(&self, other: &PAdic) -> Result<PAdic> {
        self.check_prime(other)?;
        let mut prec = (self.prec() + other.val_lower()).min(other.prec() + self.val_lower());
        if self.is_zero() || other.is_zero() {
            return Ok(PAdic::zero(self.prime, prec));
        }
        let base = self.base + other.base;
        let cap = capacity(self.prime) as i32;
        prec = prec.min(base + cap);
        if prec <= base {
            return Ok(PAdic::zero(self.prime, prec));
        }
        let len = (prec - base) as u32;
        let modulus = u128::from(pow_u64(self.prime, len));
        let m = (u128::from(self.mantissa) * u128::from(other.mantissa)) % modulus;
        Ok(PAdic::raw(self.prime, base, len, m as u64))
    }

    /// `‖self - other‖`, with zero-to-precision reported as `Zero`.
    pub fn dist(&self, other: &PAdic) -> NormValue {
        (*self - *other).norm()
    }

    /// Equal at the smaller of the two precisions.
    pub fn agrees(&self, other: &PAdic) -> bool {
        (*self - *other).is_zero()
    }

    /// Equal modulo `p^prec`; false if either side is not known that far.
    pub fn eq_mod(&self, other: &PAdic, prec: i32) -> bool {
        self.prec() >= prec && other.prec() >= prec && (*self - *other).truncate(prec).is_zero()
    }

    /// `(⌊x⌋, {x})`: the digits at non-negative and negative positions.
    pub fn int_frac_split(&self) -> (PAdic, PAdic) {
        let prec = self.prec();
        if self.is_zero() || self.base >= 0 {
            return (*self, PAdic::zero(self.prime, prec));
        }
        if prec <= 0 {
            return (PAdic::zero(self.prime, prec), *self);
        }
        let frac_len = (-self.base) as u32;
        let split = pow_u64(self.prime, frac_len);
        let frac = PAdic::raw(self.prime, self.base, self.len, self.mantissa % split);
        let int = PAdic::raw(self.prime, 0, (prec) as u32, self.mantissa / split);
        (int, frac)
    }

    /// Canonical text `p:<prime>;u:<base>;d:<d0,...>`.
    pub fn to_text(&self) -> String {
        let digits: Vec<String> = self.digits().iter().map(u32::to_string).collect();
        format!("p:{};u:{};d:{}", self.prime, self.base, digits.join(","))
    }

    pub fn parse(text: &str) -> Result<PAdic> {
        let err = |position: usize, message: String| Error::Parse { position, message };
        let rest = text.strip_prefix("p:").ok_or_else(|| err(0, "expected `p:`".into()))?;
        let semi = rest.find(';').ok_or_else(|| err(2, "expected `;` after prime".into()))?;
        let prime: u32 = rest[..semi]
            .parse()
            .map_err(|_| err(2, format!("bad prime `{}`", &rest[..semi])))?;
        if !is_prime(prime) {
            return Err(err(2, format!("{prime} is not prime")));
        }
        let mut offset = 2 + semi + 1;
        let rest = &rest[semi + 1..];
        let rest = rest.strip_prefix("u:").ok_or_else(|| err(offset, "expected `u:`".into()))?;
        offset += 2;
        let semi = rest.find(';').ok_or_else(|| err(offset, "expected `;` after exponent".into()))?;
        let u: i32 = rest[..semi]
            .parse()
            .map_err(|_| err(offset, format!("bad exponent `{}`", &rest[..semi])))?;
        offset += semi + 1;
        let rest = &rest[semi + 1..];
        let rest = rest.strip_prefix("d:").ok_or_else(|| err(offset, "expected `d:`".into()))?;
        offset += 2;
        let mut digits = Vec::new();
        if !rest.is_empty() {
            for piece in rest.split(',') {
                let d: u32 = piece.parse().map_err(|_| err(offset, format!("bad digit `{piece}`")))?;
                if d >= prime {
                    return Err(err(offset, format!("digit {d} is not below {prime}")));
                }
                digits.push(d);
                offset += piece.len() + 1;
            }
        }
        PAdic::from_digits(prime, u, &digits)
    }
}

impl PartialEq for PAdic {
    fn eq(&self, other: &Self) -> bool {
        self.prime == other.prime
            && self.prec() == other.prec()
            && (self.mantissa == other.mantissa && (self.is_zero() || self.base == other.base))
    }
}

impl Eq for PAdic {}

impl Hash for PAdic {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.prime.hash(state);
        self.prec().hash(state);
        self.mantissa.hash(state);
        if !self.is_zero() {
            self.base.hash(state);
        }
    }
}

impl std::ops::Add for PAdic {
    type Output = PAdic;
    /// Panics if the primes differ.
    fn add(self, rhs: PAdic) -> PAdic {
        self.checked_add(&rhs).expect("prime mismatch")
    }
}

impl std::ops::Sub for PAdic {
    type Output = PAdic;
    fn sub(self, rhs: PAdic) -> PAdic {
        self.checked_sub(&rhs).expect("prime mismatch")
    }
}

impl std::ops::Mul for PAdic {
    type Output = PAdic;
    fn mul(self, rhs: PAdic) -> PAdic {
        self.checked_mul(&rhs).expect("prime mismatch")
    }
}

impl std::ops::Neg for PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        PAdic::neg(&self)
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for PAdic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PAdic::parse(s)
    }
}

#[derive(Serialize, Deserialize)]
struct PAdicJson {
    p: u32,
    u: i32,
    digits: Vec<u32>,
}

impl Serialize for PAdic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PAdicJson { p: self.prime, u: self.base, digits: self.digits() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PAdicJson::deserialize(d)?;
        PAdic::from_digits(j.p, j.u, &j.digits).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(p: u32, u: i32, d: &[u32]) -> PAdic {
        PAdic::from_digits(p, u, d).unwrap()
    }

    #[test]
    fn capacities() {
        assert_eq!(capacity(2), 62);
        assert_eq!(capacity(3), 39);
        assert_eq!(capacity(5), 26);
    }

    #[test]
    fn make_normalizes_leading_zeros() {
        let x = pa(3, 0, &[0, 2, 1]);
        assert_eq!(x.base_exp(), 1);
        assert_eq!(x.mantissa(), 2 + 3);
        assert_eq!(x.prec(), 3);
        assert_eq!(x.norm(), NormValue::Pow(1));
        let one = pa(2, 0, &[1, 0, 0, 0]);
        assert_eq!(one.norm(), NormValue::ONE);
        let y = pa(5, -2, &[3, 0, 0]);
        assert_eq!(y.norm(), NormValue::Pow(-2));
    }

    #[test]
    fn alphabet_violation() {
        assert!(matches!(
            PAdic::from_digits(3, 0, &[1, 3]),
            Err(Error::AlphabetViolation { digit: 3, position: 1, prime: 3 })
        ));
    }

    #[test]
    fn carries() {
        let one = PAdic::from_digits(2, 0, &[1, 0]).unwrap();
        let two = one + one;
        assert_eq!(two.base_exp(), 1);
        assert_eq!(two, PAdic::from_digits(2, 0, &[0, 1]).unwrap());
        let x = pa(5, 0, &[2, 3, 0, 0]);
        let y = PAdic::from_i64(5, 4, 4);
        assert_eq!((x * y).to_text(), "p:5;u:0;d:3,3,2,0");
    }

    #[test]
    fn zero_to_precision() {
        let z = pa(2, 0, &[0; 8]);
        assert!(z.is_zero());
        assert_eq!(z.norm(), NormValue::Zero);
        assert_eq!(z.known_radius(), NormValue::Pow(8));
        assert_eq!(z.to_text(), "p:2;u:0;d:0,0,0,0,0,0,0,0");
    }

    #[test]
    fn precision_tracking_in_products() {
        let x = PAdic::from_i64(3, 2, 6);
        let three = PAdic::constant(3, 3);
        assert_eq!((x * three).prec(), 7);
        assert_eq!((x + three).prec(), 6);
    }

    #[test]
    fn split_parts() {
        let x = pa(5, -1, &[3, 2, 1]);
        let (int, frac) = x.int_frac_split();
        assert_eq!(int.to_text(), "p:5;u:0;d:2,1");
        assert_eq!(frac.to_text(), "p:5;u:-1;d:3,0,0");
        assert_eq!(int + frac, x);
        let digits = [1u32; 7];
        let y = pa(2, -3, &digits);
        let (_, frac) = y.int_frac_split();
        assert_eq!(frac.digits().iter().take(3).filter(|&&d| d == 1).count(), 3);
        assert_eq!(frac.base_exp(), -3);
    }

    #[test]
    fn text_format() {
        let x = PAdic::parse("p:3;u:0;d:1,2,0").unwrap();
        assert_eq!(x.digits(), vec![1, 2, 0]);
        assert_eq!(x.to_text(), "p:3;u:0;d:1,2,0");
        match PAdic::parse("p:3;u:0;d:1,5") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 12),
            other => panic!("{other:?}"),
        }
        assert!(PAdic::parse("p:4;u:0;d:1").is_err());
    }

    #[test]
    fn json_embedding() {
        let x = PAdic::parse("p:3;u:0;d:1,2,0").unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"p":3,"u":0,"digits":[1,2,0]}"#);
        let back: PAdic = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..81u64 {
            let x = PAdic::from_index(3, 0, 4, i);
            assert_eq!(x.index(0, 4), Some(i));
        }
        let q = PAdic::from_index(2, -2, 3, 5);
        assert_eq!(q.base_exp(), -2);
        assert_eq!(q.index(-2, 3), Some(5));
    }
}
