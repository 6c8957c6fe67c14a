use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicMap;
use crate::error::{Error, Result};

/// Residue partition `X = B_core ∪ ⋃_{n ≤ depth} Tⁿ(U)`, `U = X \ T(X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAB {
    /// `layers[n] = Tⁿ(X) \ Tⁿ⁺¹(X)` as sorted residue indices.
    pub layers: Vec<Vec<u64>>,
    /// `T^{depth+1}(X)`.
    pub core: Vec<u64>,
    /// Residue index of `T(x)` for every residue `x`.
    pub image_of: Vec<u64>,
}

impl PartitionAB {
    pub fn u(&self) -> &[u64] {
        &self.layers[0]
    }

    /// Layer containing residue `i`, `None` for the core.
    pub fn layer_of(&self, i: u64) -> Option<usize> {
        self.layers.iter().position(|l| l.binary_search(&i).is_ok())
    }
}

/// Outputs of `t` on residues, checked distinct at their common precision.
pub fn check_injective(t: &DynamicMap) -> Result<()> {
    let ctx = *t.ctx();
    let outs = t.residue_table()?;
    let prec = outs.iter().map(|y| y.prec()).min().unwrap_or(ctx.cap());
    let mut seen = HashSet::new();
    for (i, y) in outs.iter().enumerate() {
        let key = y.index_padded(ctx.floor(), prec).ok_or_else(|| Error::WindowViolation(y.to_string()))?;
        if !seen.insert(key) {
            let j = outs.iter().position(|z| z.index_padded(ctx.floor(), prec) == Some(key)).unwrap();
            return Err(Error::NotInjective(format!(
                "{} and {} both map to {}",
                ctx.residue(j as u64),
                ctx.residue(i as u64),
                y.truncate(prec)
            )));
        }
    }
    Ok(())
}

pub fn partition_contraction_domain(t: &DynamicMap, depth: usize) -> Result<PartitionAB> {
    let ctx = *t.ctx();
    check_injective(t)?;
    let image_of: Vec<u64> = (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let y = t.eval(&ctx.residue(i))?;
            ctx.index_of(&y)
                .or_else(|| ctx.index_padded(&y))
                .ok_or_else(|| Error::WindowViolation(y.to_string()))
        })
        .collect::<Result<_>>()?;
    let n = ctx.residue_count() as usize;
    let mut current = vec![true; n];
    let mut layers = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        let mut next = vec![false; n];
        for (i, &inside) in current.iter().enumerate() {
            if inside {
                next[image_of[i] as usize] = true;
            }
        }
        layers.push((0..n).filter(|&i| current[i] && !next[i]).map(|i| i as u64).collect());
        current = next;
    }
    let core = (0..n).filter(|&i| current[i]).map(|i| i as u64).collect();
    Ok(PartitionAB { layers, core, image_of })
}
