use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::CantorChart;
use crate::dynamics::{affine, image_set, perturb, DynamicMap, LipschitzPerturbation, MapTag, RightInverseFamily};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, PrecisionContext};

/// `s = w∘S∘w⁻¹` on `ℤ_p` at the chart's depth, tabulated on residues.
pub fn transported_shift(chart: &Arc<CantorChart>) -> Result<DynamicMap> {
    let p = chart.p();
    let ctx = PrecisionContext::zp(p, chart.depth as u32)?;
    let table: Arc<Vec<PAdic>> = Arc::new(
        (0..ctx.residue_count())
            .into_par_iter()
            .map(|i| chart.shift_image(&ctx.residue(i)))
            .collect::<Result<_>>()?,
    );
    let c = chart.clone();
    let tag = MapTag::new("transported_shift").with("depth", chart.depth);
    Ok(DynamicMap::new(ctx, tag, 1, move |x| match ctx.index_of(x) {
        Some(i) => Ok(table[i as usize]),
        None => c.shift_image(x),
    }))
}

/// The piecewise map `x = a + bp + zp² ↦ x | z | a + (b+1)p + s(z)p² | a + p + s(z)p²`
/// and its right inverses `R_a(x) = a + p²x`, `a ≠ 0`.
pub fn build_thm2_map(s: &DynamicMap, ctx: &PrecisionContext) -> Result<(DynamicMap, RightInverseFamily)> {
    let ctx = *ctx;
    let p = ctx.prime;
    if p < 3 {
        return Err(Error::BadParams("the piecewise map needs p ≥ 3".into()));
    }
    if s.ctx().prime != p {
        return Err(Error::PrimeMismatch(s.ctx().prime, p));
    }
    if (s.ctx().cap() as i64) < ctx.cap() as i64 - 2 {
        return Err(Error::DepthInsufficient(format!(
            "chart depth {} below the {} digits of z",
            s.ctx().cap(),
            ctx.cap() - 2
        )));
    }
    let s = s.clone();
    let tag = MapTag::new("thm2_map").with("depth", s.ctx().cap());
    let f = DynamicMap::new(ctx, tag, 2, move |x| {
        let unknown = PAdic::zero(p, 0);
        let Some(a) = x.digit(0) else { return Ok(unknown) };
        if a == 0 {
            return Ok(*x);
        }
        let Some(b) = x.digit(1) else { return Ok(unknown) };
        let low = PAdic::constant(p, i64::from(a) + i64::from(b) * i64::from(p));
        let z = (*x - low).shift(-2);
        if b == 0 {
            return Ok(z);
        }
        let b1 = if b == p - 1 { 1 } else { b + 1 };
        let sz = s.eval(&z)?;
        Ok(PAdic::constant(p, i64::from(a) + i64::from(b1) * i64::from(p)) + sz.shift(2))
    });
    let members = (1..p)
        .map(|a| affine(ctx, PAdic::constant(p, i64::from(p * p)), PAdic::constant(p, i64::from(a))))
        .collect::<Result<Vec<_>>>()?;
    let labels = (1..p).map(|a| format!("R_{a}")).collect();
    let family = RightInverseFamily::new(members, labels, false, true, move |x| match (x.digit(0), x.digit(1)) {
        (Some(a), Some(0)) if a != 0 => Some(a as usize - 1),
        _ => None,
    });
    Ok((f, family))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringCount {
    pub image_residues: u64,
    pub total_residues: u64,
    pub covering: bool,
}

/// Size of `⋃ R_a(𝕏)` against the residue count.
pub fn covering_count(family: &RightInverseFamily) -> Result<CoveringCount> {
    let ctx = *family.members[0].ctx();
    let mut union = vec![false; ctx.residue_count() as usize];
    for r in &family.members {
        for (u, hit) in union.iter_mut().zip(image_set(r)?) {
            *u |= hit;
        }
    }
    let image_residues = union.iter().filter(|&&b| b).count() as u64;
    Ok(CoveringCount { image_residues, total_residues: ctx.residue_count(), covering: image_residues == ctx.residue_count() })
}

/// Largest `k` such that `B(x, p^-k)` holds a residue whose image is
/// distinguishable from `f(x)`.
pub fn local_variation(f: &DynamicMap, x: &PAdic) -> Result<Option<i32>> {
    let ctx = *f.ctx();
    let fx = f.eval(x)?;
    for k in (ctx.floor()..ctx.cap()).rev() {
        for y in ctx.enumerate_ball(x, NormValue::Pow(k))? {
            if f.eval(&y)?.dist(&fx) > NormValue::Zero {
                return Ok(Some(k));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// Residues with `g(x) = x` at the common precision, `g = f + φ`.
    pub fixed_residues: Vec<PAdic>,
    pub ball_residues: u64,
    /// Fixed residues with `‖x‖ ≤ p⁻¹`, where `φ ≠ 0` and `f = id`.
    pub fixed_in_ball: u64,
    /// Whether the fixed set contains a ball coarser than the resolution.
    pub fixed_set_open: bool,
}

/// Conjugacy obstruction: `f∘h = h∘g` forces `g = id` on the open set
/// `h⁻¹(B(0, p⁻¹))`, but `g` only has isolated fixed points.
pub fn obstruction_scan(f: &DynamicMap, phi: &LipschitzPerturbation) -> Result<ObstructionReport> {
    let ctx = *f.ctx();
    let g = perturb(f, phi);
    let fixed: Vec<bool> = (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let x = ctx.residue(i);
            let gx = g.eval(&x)?;
            Ok(gx.prec() > ctx.floor() && gx.dist(&x).is_zero())
        })
        .collect::<Result<_>>()?;
    let fixed_residues: Vec<PAdic> =
        fixed.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| ctx.residue(i as u64)).collect();
    let ball = NormValue::Pow(1);
    let fixed_in_ball = fixed_residues.iter().filter(|x| x.norm() <= ball).count() as u64;
    let fixed_set_open = fixed.iter().any(|&b| b) && crate::padic::ball_union_radius(&ctx, &fixed).is_some();
    Ok(ObstructionReport {
        fixed_residues,
        ball_residues: ctx.residue_count() / u64::from(ctx.prime),
        fixed_in_ball,
        fixed_set_open,
    })
}
