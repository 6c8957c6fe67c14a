use serde::{Deserialize, Serialize};

use super::value::{capacity, is_prime, pow_u64};
use super::{NormValue, PAdic};
use crate::error::{Error, Result};

/// Default ceiling on residue enumerations.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Zp,
    Qp,
}

/// Finite model of ℤ_p or of a window of ℚ_p.
///
/// Residues are the classes of `p^u_min ℤ_p` modulo `p^(u_max + N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub prime: u32,
    pub digit_budget: u32,
    pub u_min: i32,
    pub u_max: i32,
    pub space: Space,
    #[serde(default = "default_budget")]
    pub enum_budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl PrecisionContext {
    pub fn zp(prime: u32, n: u32) -> Result<Self> {
        Self::new(prime, n, 0, 0, Space::Zp)
    }

    pub fn qp(prime: u32, n: u32, u_min: i32, u_max: i32) -> Result<Self> {
        Self::new(prime, n, u_min, u_max, Space::Qp)
    }

    fn new(prime: u32, n: u32, u_min: i32, u_max: i32, space: Space) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::BadParams(format!("{prime} is not prime")));
        }
        if n == 0 {
            return Err(Error::BadParams("digit budget must be at least 1".into()));
        }
        if u_min > u_max {
            return Err(Error::BadParams(format!("empty window [{u_min}, {u_max}]")));
        }
        if space == Space::Zp && (u_min != 0 || u_max != 0) {
            return Err(Error::BadParams("ℤ_p contexts use the window [0, 0]".into()));
        }
        let digits = (u_max + n as i32 - u_min) as u32;
        if digits > capacity(prime) {
            return Err(Error::BadParams(format!(
                "{digits} residue digits exceed the capacity {} for p = {prime}",
                capacity(prime)
            )));
        }
        Ok(PrecisionContext { prime, digit_budget: n, u_min, u_max, space, enum_budget: DEFAULT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.enum_budget = budget;
        self
    }

    /// Same window with a different digit budget.
    pub fn with_digits(&self, n: u32) -> Result<Self> {
        Self::new(self.prime, n, self.u_min, self.u_max, self.space).map(|c| c.with_budget(self.enum_budget))
    }

    /// Absolute exponent up to which residues are exact.
    pub fn cap(&self) -> i32 {
        self.u_max + self.digit_budget as i32
    }

    pub fn floor(&self) -> i32 {
        self.u_min
    }

    /// Number of residue digits `cap - floor`.
    pub fn width(&self) -> u32 {
        (self.cap() - self.floor()) as u32
    }

    /// Smallest positive distance between distinct residues.
    pub fn resolution(&self) -> NormValue {
        NormValue::Pow(self.cap() - 1)
    }

    pub fn residue_count(&self) -> u64 {
        pow_u64(self.prime, self.width())
    }

    pub fn residue(&self, index: u64) -> PAdic {
        PAdic::from_index(self.prime, self.floor(), self.cap(), index)
    }

    /// Index of `x` modulo `p^cap`, `None` if `x` is not known that far.
    pub fn index_of(&self, x: &PAdic) -> Option<u64> {
        x.index(self.floor(), self.cap())
    }

    /// Index of `x`, padding unknown digits with zeros.
    pub fn index_padded(&self, x: &PAdic) -> Option<u64> {
        x.index_padded(self.floor(), self.cap())
    }

    pub fn check_budget(&self, count: u128) -> Result<()> {
        if count > u128::from(self.enum_budget) {
            return Err(Error::BudgetExceeded { requested: count, budget: self.enum_budget });
        }
        Ok(())
    }

    /// All residues in index order.
    pub fn residues(&self) -> Result<impl Iterator<Item = PAdic> + '_> {
        self.check_budget(u128::from(self.residue_count()))?;
        Ok((0..self.residue_count()).map(move |i| self.residue(i)))
    }

    pub fn check_window(&self, x: &PAdic) -> Result<()> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(x.prime(), self.prime));
        }
        if !x.is_zero() && x.base_exp() < self.u_min {
            return Err(Error::WindowViolation(format!(
                "valuation {} below u_min = {}",
                x.base_exp(),
                self.u_min
            )));
        }
        Ok(())
    }

    /// `make_padic`: digits from exponent `u`, validated against the window.
    pub fn make(&self, u: i32, digits: &[u32]) -> Result<PAdic> {
        if u < self.u_min || u > self.u_max {
            return Err(Error::WindowViolation(format!(
                "base exponent {u} outside [{}, {}]",
                self.u_min, self.u_max
            )));
        }
        let x = PAdic::from_digits(self.prime, u, digits)?;
        Ok(x.truncate(self.cap()))
    }

    pub fn int(&self, value: i64) -> PAdic {
        PAdic::from_i64(self.prime, value, self.cap())
    }

    /// Residues of the closed ball `B(center, radius)`, each once.
    pub fn enumerate_ball(&self, center: &PAdic, radius: NormValue) -> Result<Vec<PAdic>> {
        let k = match radius {
            NormValue::Zero => self.cap(),
            NormValue::Pow(k) => k,
        };
        if k > self.cap() {
            return Err(Error::DeltaTooSmall(format!("radius {radius} is below the resolution")));
        }
        if k < self.floor() {
            return Err(Error::WindowViolation(format!("ball of radius {radius} leaves the window")));
        }
        self.check_window(center)?;
        let free = (self.cap() - k) as u32;
        let count = pow_u64(self.prime, free);
        self.check_budget(u128::from(count))?;
        let c = center.index_padded(self.floor(), k).unwrap_or(0);
        let c = PAdic::from_index(self.prime, self.floor(), self.cap(), c);
        Ok((0..count)
            .map(|j| c + PAdic::from_index(self.prime, k, self.cap(), j))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balls() {
        let ctx = PrecisionContext::zp(2, 3).unwrap();
        let b = ctx.enumerate_ball(&ctx.int(0), NormValue::ONE).unwrap();
        let mut idx: Vec<u64> = b.iter().map(|x| ctx.index_of(x).unwrap()).collect();
        idx.sort();
        assert_eq!(idx, (0..8).collect::<Vec<_>>());

        let ctx = PrecisionContext::zp(3, 2).unwrap();
        let b = ctx.enumerate_ball(&ctx.int(1), NormValue::Pow(1)).unwrap();
        let mut idx: Vec<u64> = b.iter().map(|x| ctx.index_of(x).unwrap()).collect();
        idx.sort();
        assert_eq!(idx, vec![1, 4, 7]);
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = PrecisionContext::zp(2, 20).unwrap().with_budget(1000);
        assert!(matches!(
            ctx.enumerate_ball(&ctx.int(0), NormValue::ONE),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn window_rejects_low_exponents() {
        let ctx = PrecisionContext::qp(5, 4, -2, 0).unwrap();
        assert!(ctx.make(-2, &[3, 0, 0]).is_ok());
        assert!(matches!(ctx.make(-3, &[1]), Err(Error::WindowViolation(_))));
        assert_eq!(ctx.residue_count(), 5u64.pow(6));
    }
}
