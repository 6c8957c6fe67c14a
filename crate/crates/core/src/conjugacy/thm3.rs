use std::collections::HashMap;

use rayon::prelude::*;

use super::partition::{partition_contraction_domain, PartitionAB};
use super::{ConjugacyMap, Direction};
use crate::analysis::{estimate_lipschitz, image_openness, scaling_profile};
use crate::dynamics::{perturb, DynamicMap, LipschitzPerturbation};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, Space};

/// Fixed point of a contraction by Picard iteration from 0, modulo `p^cap`.
pub fn fixed_point(t: &DynamicMap) -> Result<PAdic> {
    let ctx = *t.ctx();
    let mut x = PAdic::zero(ctx.prime, ctx.cap());
    for _ in 0..=ctx.width() as usize * 2 + 2 {
        let y = t.eval(&x)?.truncate(ctx.cap());
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Err(Error::NonConvergence(format!("{} has no fixed point at resolution", t.tag)))
}

#[derive(Clone, Debug)]
pub struct Thm3Build {
    pub h: ConjugacyMap,
    pub t: DynamicMap,
    pub partition: PartitionAB,
    pub c1: NormValue,
    pub c2: NormValue,
    pub rho: NormValue,
    /// `c₂^M·δ`, the truncation error of the windowed recursion on the core.
    pub error_budget: NormValue,
    /// Shortest backward chain available on the core.
    pub window_used: usize,
    pub fixed_r: Option<PAdic>,
    pub fixed_t: Option<PAdic>,
    /// `h(x_T) = x_R` at resolution (ℤ_p only).
    pub fixed_points_match: Option<bool>,
}

/// Conjugacy `h` with `R∘h = h∘T` for `T = R + φ`, `R` a bi-Lipschitz contraction.
pub fn build_conjugacy_thm3(
    r: &DynamicMap,
    phi: &LipschitzPerturbation,
    depth: usize,
    window: usize,
) -> Result<Thm3Build> {
    let ctx = *r.ctx();
    let p = ctx.prime;
    let est = estimate_lipschitz(r)?;
    let (Some(c1), Some(c2)) = (est.c1_lower, est.c2_upper) else {
        return Err(Error::BiLipschitzViolation("no resolved pairs".into()));
    };
    if c2 >= NormValue::ONE {
        return Err(Error::BiLipschitzViolation(format!("c₂ = {c2} is not a contraction")));
    }
    let rho = image_openness(r)?.ok_or_else(|| Error::BiLipschitzViolation("image is not open at resolution".into()))?;
    if ctx.space == Space::Qp && !scaling_profile(r)?.consistent {
        return Err(Error::BiLipschitzViolation("ℚ_p mode needs a scaling contraction".into()));
    }
    let limit = c1.min(rho).scale(-1);
    if phi.delta > limit {
        return Err(Error::DeltaTooLarge(format!("δ = {} exceeds min(c₁, ρ)/p = {limit}", phi.delta)));
    }
    let t = perturb(r, phi).tabulate()?;
    let r_tab = r.tabulate()?;
    let partition = partition_contraction_domain(&t, depth)?;
    let r_index: Vec<u64> = (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let y = r_tab.eval(&ctx.residue(i))?;
            ctx.index_of(&y).ok_or_else(|| Error::WindowViolation(y.to_string()))
        })
        .collect::<Result<_>>()?;

    let n = ctx.residue_count() as usize;
    let mut h: Vec<Option<u64>> = vec![None; n];
    for &x in partition.u() {
        h[x as usize] = Some(x);
    }
    for layer in partition.layers.iter().take(depth) {
        for &x in layer {
            let y = partition.image_of[x as usize] as usize;
            let hy = r_index[h[x as usize].expect("layer assigned") as usize];
            match h[y] {
                None => h[y] = Some(hy),
                Some(prev) if prev != hy => {
                    return Err(Error::BiLipschitzViolation(format!(
                        "layer images disagree at {}",
                        ctx.residue(y as u64)
                    )))
                }
                _ => {}
            }
        }
    }

    // Windowed recursion on the core: z_{-M} = 0, z_n = R(T^{n-1}x + z_{n-1}) − Tⁿx.
    let mut preimage: HashMap<u64, u64> = HashMap::new();
    for (x, &y) in partition.image_of.iter().enumerate() {
        preimage.entry(y).or_insert(x as u64);
    }
    let core_set: std::collections::HashSet<u64> = partition.core.iter().copied().collect();
    let mut shortest = window;
    for &x in &partition.core {
        let mut chain = vec![x];
        while chain.len() <= window {
            let last = *chain.last().unwrap();
            match preimage.get(&last).filter(|pre| core_set.contains(pre) || partition.layer_of(**pre).is_some()) {
                Some(&pre) => chain.push(pre),
                None => break,
            }
        }
        shortest = shortest.min(chain.len() - 1);
        let mut z = PAdic::zero(p, ctx.cap());
        for k in (1..chain.len()).rev() {
            let prev = ctx.residue(chain[k]);
            let cur = ctx.residue(chain[k - 1]);
            z = (r_tab.eval(&(prev + z))? - cur).truncate(ctx.cap());
        }
        let hx = (ctx.residue(x) + z).truncate(ctx.cap());
        h[x as usize] = Some(ctx.index_of(&hx).ok_or_else(|| Error::WindowViolation(hx.to_string()))?);
    }
    let l2 = c2.exponent().unwrap_or(ctx.cap());
    let error_budget = match phi.delta.exponent() {
        None => NormValue::Zero,
        Some(k) => NormValue::Pow(k + l2 * shortest as i32),
    };
    if !partition.core.is_empty() && error_budget > NormValue::Pow(ctx.cap()) {
        return Err(Error::WindowTooSmall(format!(
            "c₂^M·δ = {error_budget} with M = {shortest} is coarser than p^-{}",
            ctx.cap()
        )));
    }

    let table: Vec<PAdic> = h
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.map(|j| ctx.residue(j))
                .ok_or_else(|| Error::BiLipschitzViolation(format!("residue {} left unassigned", ctx.residue(i as u64))))
        })
        .collect::<Result<_>>()?;
    let mut hmap = ConjugacyMap::from_table(ctx, table, ctx.cap(), depth, Direction::Thm3H)?;
    hmap.error_budget = Some(error_budget);

    let (fixed_r, fixed_t, fixed_points_match) = if ctx.space == Space::Zp {
        let xr = fixed_point(r)?;
        let xt = fixed_point(&t)?;
        let ok = hmap.apply(&xt)?.eq_mod(&xr, ctx.cap());
        (Some(xr), Some(xt), Some(ok))
    } else {
        (None, None, None)
    };
    Ok(Thm3Build {
        h: hmap,
        t,
        partition,
        c1,
        c2,
        rho,
        error_budget,
        window_used: shortest,
        fixed_r,
        fixed_t,
        fixed_points_match,
    })
}
