//! Conjugacy builders and the exhaustive conjugacy verifier.

mod homogeneity;
mod partition;
mod thm1;
mod thm3;
mod transfer;

pub use homogeneity::{homogeneity_homeomorphism, seeded_proper_pair};
pub use partition::{partition_contraction_domain, PartitionAB};
pub use thm1::{build_conjugacy_thm1, build_inverse_conjugacy_thm1};
pub use thm3::{build_conjugacy_thm3, fixed_point, Thm3Build};
pub use transfer::{lemma51_bound, transfer_family, transfer_right_inverse, Transfer};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicMap, MapTag};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Thm1H,
    Thm1HTilde,
    Thm3H,
    Homogeneity,
    Identity,
}

/// A residue table for `h`, exact modulo `p^certified_exp`.
#[derive(Clone, Debug)]
pub struct ConjugacyMap {
    ctx: PrecisionContext,
    table: Arc<Vec<PAdic>>,
    pub closeness: NormValue,
    pub certified_exp: i32,
    pub horizon: usize,
    pub direction: Direction,
    /// Truncation error of the construction, when it is not exact.
    pub error_budget: Option<NormValue>,
}

impl ConjugacyMap {
    pub fn from_table(
        ctx: PrecisionContext,
        table: Vec<PAdic>,
        certified_exp: i32,
        horizon: usize,
        direction: Direction,
    ) -> Result<Self> {
        if table.len() as u64 != ctx.residue_count() {
            return Err(Error::BadParams("table size differs from the residue count".into()));
        }
        let closeness = table
            .iter()
            .enumerate()
            .map(|(i, y)| (*y - ctx.residue(i as u64)).truncate(certified_exp).norm())
            .max()
            .unwrap_or(NormValue::Zero);
        Ok(ConjugacyMap { ctx, table: Arc::new(table), closeness, certified_exp, horizon, direction, error_budget: None })
    }

    pub fn identity(ctx: PrecisionContext) -> Result<Self> {
        let table = ctx.residues()?.collect();
        Self::from_table(ctx, table, ctx.cap(), 0, Direction::Identity)
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn table(&self) -> &[PAdic] {
        &self.table
    }

    /// `h(x)`, known to the smaller of the certified precision and `x`'s own.
    pub fn apply(&self, x: &PAdic) -> Result<PAdic> {
        let i = self
            .ctx
            .index_padded(x)
            .ok_or_else(|| Error::WindowViolation(format!("{x} outside the window")))?;
        Ok(self.table[i as usize].truncate(self.certified_exp.min(x.prec())))
    }

    /// Copy with one entry replaced (fault injection in tests).
    pub fn with_entry(&self, index: u64, value: PAdic) -> Self {
        let mut table = (*self.table).clone();
        table[index as usize] = value;
        ConjugacyMap { table: Arc::new(table), ..self.clone() }
    }

    /// Injectivity of the map induced on residues modulo `p^c`, `c` the
    /// certified precision: `x ≢ y` implies `h(x) ≢ h(y)`, and `h(x) mod p^c`
    /// depends only on `x mod p^c`.
    pub fn is_injective(&self) -> bool {
        let c = self.ctx.cap().min(self.certified_exp);
        let floor = self.ctx.floor();
        let mut induced: HashMap<u64, u64> = HashMap::new();
        let mut hit = HashSet::new();
        for (i, y) in self.table.iter().enumerate() {
            let (Some(x), Some(y)) = (self.ctx.residue(i as u64).index(floor, c), y.index_padded(floor, c)) else {
                return false;
            };
            match induced.get(&x) {
                Some(&prev) if prev != y => return false,
                Some(_) => {}
                None => {
                    if !hit.insert(y) {
                        return false;
                    }
                    induced.insert(x, y);
                }
            }
        }
        true
    }

    pub fn as_map(&self) -> DynamicMap {
        let h = self.clone();
        DynamicMap::new(self.ctx, MapTag::new("conjugacy"), 0, move |x| h.apply(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub max_defect: NormValue,
    /// Every defect was computed modulo at least `p^defect_precision`.
    pub defect_precision: i32,
    pub defect_histogram: BTreeMap<String, u64>,
    pub injective: bool,
    pub closeness: NormValue,
    pub checked: u64,
    pub exhaustive: bool,
}

impl ConjugacyReport {
    pub fn zero_defect(&self) -> bool {
        self.max_defect.is_zero()
    }
}

/// Scans `‖f(h(x)) − h(g(x))‖` over every residue.
pub fn verify_conjugacy(f: &DynamicMap, g: &DynamicMap, h: &ConjugacyMap) -> Result<ConjugacyReport> {
    let ctx = *h.ctx();
    ctx.check_budget(u128::from(ctx.residue_count()))?;
    let rows: Vec<(NormValue, i32)> = (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let x = ctx.residue(i);
            let hx = h.table[i as usize].truncate(h.certified_exp);
            let lhs = f.eval(&hx)?;
            let rhs = h.apply(&g.eval(&x)?)?;
            let d = lhs - rhs;
            Ok((d.norm(), d.prec()))
        })
        .collect::<Result<_>>()?;
    let mut hist = BTreeMap::new();
    for (d, _) in &rows {
        *hist.entry(d.to_string()).or_insert(0) += 1;
    }
    Ok(ConjugacyReport {
        max_defect: rows.iter().map(|r| r.0).max().unwrap_or(NormValue::Zero),
        defect_precision: rows.iter().map(|r| r.1).min().unwrap_or(ctx.cap()),
        defect_histogram: hist,
        injective: h.is_injective(),
        closeness: h.closeness,
        checked: rows.len() as u64,
        exhaustive: true,
    })
}

/// Largest `‖a(b(x)) − x‖` over residues, at the certified precision of both.
pub fn composition_defect(a: &ConjugacyMap, b: &ConjugacyMap) -> NormValue {
    let ctx = *a.ctx();
    let prec = a.certified_exp.min(b.certified_exp);
    (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let x = ctx.residue(i);
            let y = b.table[i as usize].truncate(prec);
            match a.apply(&y) {
                Ok(z) => (z - x).truncate(prec).norm(),
                Err(_) => NormValue::ONE,
            }
        })
        .max()
        .unwrap_or(NormValue::Zero)
}
