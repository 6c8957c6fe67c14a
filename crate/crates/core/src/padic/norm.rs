use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value of the p-adic norm: either exactly zero or `p^-k`.
///
/// The prime is implicit; comparisons only make sense between norms of the
/// same space. `Zero` is the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum NormValue {
    Zero,
    /// `p^-k`
    Pow(i32),
}

impl NormValue {
    pub const ONE: NormValue = NormValue::Pow(0);

    pub fn pow(k: i32) -> Self {
        NormValue::Pow(k)
    }

    /// The exponent `k` of `p^-k`, or `None` for zero.
    pub fn exponent(self) -> Option<i32> {
        match self {
            NormValue::Zero => None,
            NormValue::Pow(k) => Some(k),
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, NormValue::Zero)
    }

    /// Multiply by `p^m`.
    pub fn scale(self, m: i32) -> Self {
        match self {
            NormValue::Zero => NormValue::Zero,
            NormValue::Pow(k) => NormValue::Pow(k - m),
        }
    }

    pub fn times(self, other: NormValue) -> Self {
        match (self, other) {
            (NormValue::Pow(a), NormValue::Pow(b)) => NormValue::Pow(a + b),
            _ => NormValue::Zero,
        }
    }

    /// Ratio `self / other` as a power of p, `None` if `other` is zero.
    pub fn ratio(self, other: NormValue) -> Option<NormValue> {
        match (self, other) {
            (_, NormValue::Zero) => None,
            (NormValue::Zero, _) => Some(NormValue::Zero),
            (NormValue::Pow(a), NormValue::Pow(b)) => Some(NormValue::Pow(a - b)),
        }
    }

    pub fn to_ratio(self, p: u32) -> Ratio<i128> {
        match self {
            NormValue::Zero => Ratio::from_integer(0),
            NormValue::Pow(k) => {
                let base = i128::from(p).pow(k.unsigned_abs());
                if k >= 0 {
                    Ratio::new(1, base)
                } else {
                    Ratio::from_integer(base)
                }
            }
        }
    }

    /// Largest power of p not exceeding the positive rational `r`.
    pub fn floor_of(r: Ratio<i128>, p: u32) -> NormValue {
        if r <= Ratio::from_integer(0) {
            return NormValue::Zero;
        }
        let mut k = 0i32;
        while NormValue::Pow(k).to_ratio(p) > r {
            k += 1;
        }
        while NormValue::Pow(k - 1).to_ratio(p) <= r {
            k -= 1;
        }
        NormValue::Pow(k)
    }

    /// Parses `p^-k`, `p^k`, `1` or `0`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "0" => return Ok(NormValue::Zero),
            "1" => return Ok(NormValue::ONE),
            _ => {}
        }
        let rest = t.strip_prefix("p^").ok_or_else(|| Error::Parse {
            position: 0,
            message: format!("expected `p^-k`, got `{t}`"),
        })?;
        let k: i32 = rest.parse().map_err(|_| Error::Parse {
            position: 2,
            message: format!("bad exponent `{rest}`"),
        })?;
        Ok(NormValue::Pow(-k))
    }
}

impl Ord for NormValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NormValue::Zero, NormValue::Zero) => Ordering::Equal,
            (NormValue::Zero, _) => Ordering::Less,
            (_, NormValue::Zero) => Ordering::Greater,
            (NormValue::Pow(a), NormValue::Pow(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for NormValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Zero => write!(f, "0"),
            NormValue::Pow(k) => write!(f, "p^{}", -k),
        }
    }
}

impl From<NormValue> for String {
    fn from(n: NormValue) -> String {
        n.to_string()
    }
}

impl std::str::FromStr for NormValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NormValue::parse(s)
    }
}

impl TryFrom<String> for NormValue {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        NormValue::parse(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_zero_first() {
        assert!(NormValue::Zero < NormValue::Pow(100));
        assert!(NormValue::Pow(3) < NormValue::Pow(2));
        assert!(NormValue::Pow(-1) > NormValue::ONE);
    }

    #[test]
    fn text_round_trip() {
        for n in [NormValue::Zero, NormValue::Pow(3), NormValue::Pow(-2), NormValue::ONE] {
            assert_eq!(NormValue::parse(&n.to_string()).unwrap(), n);
        }
        assert_eq!(NormValue::parse("p^-3").unwrap(), NormValue::Pow(3));
        assert!(NormValue::parse("2^-3").is_err());
    }

    #[test]
    fn floor_of_rational() {
        let r = Ratio::new(9, 26);
        assert_eq!(NormValue::floor_of(r, 3), NormValue::Pow(1));
        assert_eq!(NormValue::floor_of(Ratio::new(1, 3), 3), NormValue::Pow(1));
        assert_eq!(NormValue::floor_of(Ratio::from_integer(10), 3), NormValue::Pow(-2));
    }
}
