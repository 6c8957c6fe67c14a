use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::padic::{NormValue, PAdic, PrecisionContext};

pub type EvalFn = dyn Fn(&PAdic) -> Result<PAdic> + Send + Sync;

/// Catalog name plus parameters, printed in map-spec syntax.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapTag {
    pub name: String,
    pub params: Vec<(String, String)>,
}

impl MapTag {
    pub fn new(name: impl Into<String>) -> Self {
        MapTag { name: name.into(), params: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }
}

impl fmt::Display for MapTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self
                .params
                .iter()
                .map(|(k, v)| if k.is_empty() { v.clone() } else { format!("{k}={v}") })
                .collect();
            write!(f, "({})", parts.join(", "))?;
        }
        Ok(())
    }
}

/// An evaluable map on truncated p-adics with precision and Lipschitz metadata.
///
/// `lip_upper`/`lip_lower` are powers of p; `None` means no uniform bound is
/// claimed. Outputs are never truncated to the context, so contractions gain
/// digits.
#[derive(Clone)]
pub struct DynamicMap {
    ctx: PrecisionContext,
    eval: Arc<EvalFn>,
    pub precision_loss: u32,
    pub lip_upper: Option<NormValue>,
    pub lip_lower: Option<NormValue>,
    pub tag: MapTag,
}

impl fmt::Debug for DynamicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicMap")
            .field("tag", &self.tag.to_string())
            .field("precision_loss", &self.precision_loss)
            .field("lip_upper", &self.lip_upper)
            .field("lip_lower", &self.lip_lower)
            .finish()
    }
}

impl DynamicMap {
    pub fn new<F>(ctx: PrecisionContext, tag: MapTag, precision_loss: u32, eval: F) -> Self
    where
        F: Fn(&PAdic) -> Result<PAdic> + Send + Sync + 'static,
    {
        DynamicMap { ctx, eval: Arc::new(eval), precision_loss, lip_upper: None, lip_lower: None, tag }
    }

    pub fn with_lip(mut self, upper: Option<NormValue>, lower: Option<NormValue>) -> Self {
        self.lip_upper = upper;
        self.lip_lower = lower;
        self
    }

    pub fn identity(ctx: PrecisionContext) -> Self {
        DynamicMap::new(ctx, MapTag::new("identity"), 0, |x| Ok(*x))
            .with_lip(Some(NormValue::ONE), Some(NormValue::ONE))
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn eval(&self, x: &PAdic) -> Result<PAdic> {
        self.ctx.check_window(x)?;
        let y = (self.eval)(x)?;
        self.ctx.check_window(&y)?;
        Ok(y)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DynamicMap) -> DynamicMap {
        let (outer_f, inner_f) = (self.clone(), inner.clone());
        let tag = MapTag::new("compose").with("", &self.tag).with("", &inner.tag);
        let mul = |a: Option<NormValue>, b: Option<NormValue>| Some(a?.times(b?));
        DynamicMap::new(self.ctx, tag, self.precision_loss + inner.precision_loss, move |x| {
            outer_f.eval(&inner_f.eval(x)?)
        })
        .with_lip(mul(self.lip_upper, inner.lip_upper), mul(self.lip_lower, inner.lip_lower))
    }

    /// Pointwise sum `self + other`.
    pub fn plus(&self, other: &DynamicMap) -> DynamicMap {
        let (a, b) = (self.clone(), other.clone());
        let tag = MapTag::new("sum").with("", &self.tag).with("", &other.tag);
        let upper = match (self.lip_upper, other.lip_upper) {
            (Some(u), Some(v)) => Some(u.max(v)),
            _ => None,
        };
        let lower = match (self.lip_lower, other.lip_upper) {
            (Some(l), Some(u)) if u < l => Some(l),
            _ => None,
        };
        DynamicMap::new(self.ctx, tag, self.precision_loss.max(other.precision_loss), move |x| {
            Ok(a.eval(x)? + b.eval(x)?)
        })
        .with_lip(upper, lower)
    }

    /// Outputs on every residue, in index order.
    pub fn residue_table(&self) -> Result<Vec<PAdic>> {
        let ctx = self.ctx;
        ctx.check_budget(u128::from(ctx.residue_count()))?;
        (0..ctx.residue_count()).into_par_iter().map(|i| self.eval(&ctx.residue(i))).collect()
    }

    /// Same map backed by a residue table.
    ///
    /// Inputs known past the resolution use the table directly; coarser inputs
    /// use the table with the output precision cut by the Lipschitz bound.
    pub fn tabulate(&self) -> Result<DynamicMap> {
        let table = Arc::new(self.residue_table()?);
        let direct = self.clone();
        let ctx = self.ctx;
        let lip = self.lip_upper;
        let mut out = DynamicMap::new(ctx, self.tag.clone(), self.precision_loss, move |x| {
            if let Some(i) = ctx.index_of(x) {
                return Ok(table[i as usize]);
            }
            match (lip, ctx.index_padded(x)) {
                (Some(l), Some(i)) => {
                    let gain = l.exponent().unwrap_or(0);
                    Ok(table[i as usize].truncate(x.prec() + gain))
                }
                _ => direct.eval(x),
            }
        });
        out.lip_upper = self.lip_upper;
        out.lip_lower = self.lip_lower;
        Ok(out)
    }

    /// `‖self − other‖_∞` over residues.
    pub fn sup_distance(&self, other: &DynamicMap) -> Result<NormValue> {
        let ctx = self.ctx;
        ctx.check_budget(u128::from(ctx.residue_count()))?;
        (0..ctx.residue_count())
            .into_par_iter()
            .map(|i| {
                let x = ctx.residue(i);
                Ok(self.eval(&x)?.dist(&other.eval(&x)?))
            })
            .try_reduce(|| NormValue::Zero, |a, b| Ok(a.max(b)))
    }
}
