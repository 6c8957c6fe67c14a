//! Exhaustive estimators for Lipschitz constants, local scaling, the scaling
//! function κ, image openness and expansivity.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{image_set, DynamicMap};
use crate::error::Result;
use crate::padic::{ball_union_radius, NormValue, PAdic, PrecisionContext};

/// Pair budget above which scans fall back to seeded sampling.
pub const PAIR_BUDGET: u64 = 1 << 23;

/// Residue pairs `(i, j)`, `i < j`: all of them when within budget, else a
/// seeded sample of `PAIR_BUDGET` pairs.
fn pair_indices(ctx: &PrecisionContext, seed: u64) -> (Vec<(u64, u64)>, bool) {
    let m = ctx.residue_count();
    let total = u128::from(m) * u128::from(m.saturating_sub(1)) / 2;
    if total <= u128::from(PAIR_BUDGET) {
        let all = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        return (all, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = (0..PAIR_BUDGET)
        .map(|_| {
            let i = rng.gen_range(0..m);
            let mut j = rng.gen_range(0..m - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect();
    (sample, false)
}

/// Outputs reduced modulo the resolution. Evaluation failures become `None`.
fn reduced_table(f: &DynamicMap) -> Result<Vec<Option<PAdic>>> {
    let ctx = *f.ctx();
    ctx.check_budget(u128::from(ctx.residue_count()))?;
    Ok((0..ctx.residue_count())
        .into_par_iter()
        .map(|i| f.eval(&ctx.residue(i)).ok().map(|y| y.truncate(ctx.cap())))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Smallest resolved ratio `‖f(x)−f(y)‖/‖x−y‖`; `None` if no pair resolved.
    pub c1_lower: Option<NormValue>,
    pub c2_upper: Option<NormValue>,
    pub exhaustive: bool,
    pub pairs_scanned: u64,
    /// Pairs whose outputs agree modulo the resolution.
    pub unresolved_pairs: u64,
}

/// Min and max distance ratios over residue pairs, outputs compared modulo
/// the resolution.
pub fn estimate_lipschitz(f: &DynamicMap) -> Result<LipschitzEstimate> {
    let ctx = *f.ctx();
    let table = reduced_table(f)?;
    let (pairs, exhaustive) = pair_indices(&ctx, 0x11);
    let (lo, hi, unresolved) = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (a, b) = (table[i as usize]?, table[j as usize]?);
            let din = ctx.residue(i).dist(&ctx.residue(j));
            Some(a.dist(&b).ratio(din).filter(|r| !r.is_zero()))
        })
        .fold(
            || (None::<NormValue>, None::<NormValue>, 0u64),
            |(lo, hi, u), r| match r {
                None => (lo, hi, u + 1),
                Some(r) => (Some(lo.map_or(r, |l| l.min(r))), Some(hi.map_or(r, |h| h.max(r))), u),
            },
        )
        .reduce(
            || (None, None, 0),
            |a, b| {
                let min = match (a.0, b.0) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                let max = match (a.1, b.1) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                };
                (min, max, a.2 + b.2)
            },
        );
    Ok(LipschitzEstimate {
        c1_lower: lo,
        c2_upper: hi,
        exhaustive,
        pairs_scanned: pairs.len() as u64,
        unresolved_pairs: unresolved,
    })
}

/// Exact `Lip(f)` over all residue pairs, outputs compared modulo the
/// resolution; `None` if every pair is unresolved.
///
/// Pairs at distance `p^-k` inside a ball `B` of radius `p^-k` reach at most
/// `diam f(B)`, and by the ultrametric inequality some cross pair attains it,
/// so one bottom-up pass over the ball tree suffices.
pub fn lipschitz_upper(f: &DynamicMap) -> Result<Option<NormValue>> {
    let ctx = *f.ctx();
    let table = reduced_table(f)?;
    let p = u64::from(ctx.prime);
    let cap = ctx.cap();
    let agree = |a: &PAdic, b: &PAdic| (*a - *b).truncate(cap).valuation().unwrap_or(cap);
    let mut level: Vec<(Option<PAdic>, i32)> = table.into_iter().map(|y| (y, cap)).collect();
    let mut best: Option<i32> = None;
    for w in (0..ctx.width()).rev() {
        let size = level.len() as u64 / p;
        let next: Vec<(Option<PAdic>, i32)> = (0..size)
            .into_par_iter()
            .map(|b| {
                let mut rep = None::<PAdic>;
                let mut e = cap;
                for j in 0..p {
                    let (y, ej) = &level[(b + j * size) as usize];
                    e = e.min(*ej);
                    if let Some(y) = y {
                        match &rep {
                            None => rep = Some(*y),
                            Some(r) => e = e.min(agree(r, y)),
                        }
                    }
                }
                (rep, e)
            })
            .collect();
        let dist_exp = ctx.floor() + w as i32;
        if let Some(e) = next.iter().map(|n| n.1).filter(|&e| e < cap).min() {
            let r = e - dist_exp;
            best = Some(best.map_or(r, |b| b.min(r)));
        }
        level = next;
    }
    Ok(best.map(NormValue::Pow))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub holds: bool,
    pub witness: Option<(PAdic, PAdic)>,
    pub pairs_checked: u64,
}

/// Whether `‖f(x)−f(y)‖ = p^m·‖x−y‖` for every residue pair with `‖x−y‖ ≤ p^-k`.
///
/// Pairs whose expected output distance lies below the output precision
/// cannot be decided and are skipped.
pub fn check_locally_scaling(f: &DynamicMap, k: i32, m: i32) -> Result<ScalingCheck> {
    let ctx = *f.ctx();
    let k = k.max(ctx.floor());
    let offsets = ctx.enumerate_ball(&PAdic::zero(ctx.prime, ctx.cap()), NormValue::Pow(k))?;
    ctx.check_budget(u128::from(ctx.residue_count()) * offsets.len() as u128)?;
    let table: Vec<PAdic> = f.residue_table()?;
    let bad = (0..ctx.residue_count()).into_par_iter().find_map_first(|i| {
        let x = ctx.residue(i);
        for d in offsets.iter().filter(|d| !d.is_zero()) {
            let y = (x + *d).truncate(ctx.cap());
            let j = ctx.index_of(&y)?;
            if j <= i {
                continue;
            }
            let want = d.norm().scale(m);
            let diff = table[i as usize] - table[j as usize];
            let decided = want.exponent().is_some_and(|e| e < diff.prec());
            if decided && diff.norm() != want {
                return Some((x, y));
            }
        }
        None
    });
    let n = ctx.residue_count() * (offsets.len() as u64 - 1) / 2;
    Ok(ScalingCheck { holds: bad.is_none(), witness: bad, pairs_checked: n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingProfile {
    /// Input distance exponent `k` (distance `p^-k`) to output distance.
    pub kappa: BTreeMap<i32, NormValue>,
    pub consistent: bool,
    pub witness: Option<[PAdic; 4]>,
    pub exhaustive: bool,
}

/// Groups residue pairs by distance and checks that each class has a single
/// output distance (outputs compared modulo the resolution).
pub fn scaling_profile(r: &DynamicMap) -> Result<ScalingProfile> {
    let ctx = *r.ctx();
    let table = reduced_table(r)?;
    let (pairs, exhaustive) = pair_indices(&ctx, 0x5ca1e);
    let mut kappa: BTreeMap<i32, (NormValue, u64, u64)> = BTreeMap::new();
    let mut witness = None;
    for &(i, j) in &pairs {
        let (Some(a), Some(b)) = (table[i as usize], table[j as usize]) else { continue };
        let k = ctx.residue(i).dist(&ctx.residue(j)).exponent().unwrap_or(ctx.cap());
        let out = a.dist(&b);
        match kappa.get(&k) {
            None => {
                kappa.insert(k, (out, i, j));
            }
            Some(&(seen, i0, j0)) if seen != out && witness.is_none() => {
                witness = Some([ctx.residue(i0), ctx.residue(j0), ctx.residue(i), ctx.residue(j)]);
            }
            _ => {}
        }
    }
    Ok(ScalingProfile {
        kappa: kappa.into_iter().map(|(k, (v, _, _))| (k, v)).collect(),
        consistent: witness.is_none(),
        witness,
        exhaustive,
    })
}

/// Largest `ρ` such that `R(X)` is a union of `ρ`-balls at resolution.
pub fn image_openness(r: &DynamicMap) -> Result<Option<NormValue>> {
    let set = image_set(r)?;
    Ok(ball_union_radius(r.ctx(), &set))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansivityEstimate {
    /// Smallest (over pairs) largest separation within the horizon.
    pub constant: NormValue,
    /// `constant` exceeds the resolution.
    pub expansive: bool,
    pub horizon: usize,
    pub exhaustive: bool,
}

pub fn expansivity_constant(f: &DynamicMap, horizon: usize) -> Result<ExpansivityEstimate> {
    let ctx = *f.ctx();
    ctx.check_budget(u128::from(ctx.residue_count()) * (horizon as u128 + 1))?;
    let orbits: Vec<Vec<PAdic>> = (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let mut cur = ctx.residue(i);
            let mut orbit = vec![cur];
            for _ in 0..horizon {
                match f.eval(&cur) {
                    Ok(y) => {
                        cur = y;
                        orbit.push(y);
                    }
                    Err(_) => break,
                }
            }
            orbit
        })
        .collect();
    let (pairs, exhaustive) = pair_indices(&ctx, 0xe4);
    let constant = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&orbits[i as usize], &orbits[j as usize]);
            a.iter().zip(b).map(|(x, y)| x.dist(y)).max().unwrap_or(NormValue::Zero)
        })
        .min()
        .unwrap_or(NormValue::Zero);
    Ok(ExpansivityEstimate { constant, expansive: constant > ctx.resolution(), horizon, exhaustive })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateDistanceScan {
    pub holds: bool,
    /// Iterate count and pair where `‖Tⁿx − Tⁿy‖ ≠ ‖Rⁿx − Rⁿy‖`.
    pub witness: Option<(usize, PAdic, PAdic)>,
    pub comparisons: u64,
    /// Comparisons skipped because a difference vanished below its precision.
    pub undecided: u64,
}

/// Compares `‖Tⁿ(x) − Tⁿ(y)‖` with `‖Rⁿ(x) − Rⁿ(y)‖` over all residue pairs, `1 ≤ n ≤ n_max`.
pub fn iterate_distance_scan(r: &DynamicMap, t: &DynamicMap, n_max: usize) -> Result<IterateDistanceScan> {
    let ctx = *r.ctx();
    let m = ctx.residue_count();
    ctx.check_budget(u128::from(m) * u128::from(m) / 2 * n_max as u128)?;
    let orbits = |f: &DynamicMap| -> Result<Vec<Vec<PAdic>>> {
        (0..m)
            .into_par_iter()
            .map(|i| {
                let mut cur = ctx.residue(i);
                let mut out = Vec::with_capacity(n_max);
                for _ in 0..n_max {
                    cur = f.eval(&cur)?;
                    out.push(cur);
                }
                Ok(out)
            })
            .collect()
    };
    let (ro, to) = (orbits(r)?, orbits(t)?);
    type Row = (u64, u64, Option<(usize, u64, u64)>);
    let rows: Vec<Row> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (mut seen, mut skipped, mut bad) = (0, 0, None);
            for j in i + 1..m {
                for n in 0..n_max {
                    let dr = ro[i as usize][n] - ro[j as usize][n];
                    let dt = to[i as usize][n] - to[j as usize][n];
                    if dr.is_zero() || dt.is_zero() {
                        skipped += 1;
                        continue;
                    }
                    seen += 1;
                    if dr.norm() != dt.norm() && bad.is_none() {
                        bad = Some((n + 1, i, j));
                    }
                }
            }
            (seen, skipped, bad)
        })
        .collect();
    let witness = rows.iter().find_map(|r| r.2).map(|(n, i, j)| (n, ctx.residue(i), ctx.residue(j)));
    Ok(IterateDistanceScan {
        holds: witness.is_none(),
        witness,
        comparisons: rows.iter().map(|r| r.0).sum(),
        undecided: rows.iter().map(|r| r.1).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::catalog::{affine, shift_zp};
    use crate::dynamics::{builtin_map, Params};

    #[test]
    fn lipschitz_upper_matches_pair_scan() {
        let ctx = PrecisionContext::zp(3, 5).unwrap();
        for spec in ["shift_zp", "example2_R", "digit_swap(i=0, j=2)", "compose(digit_twist, affine(v=3, w=1))"] {
            let f = crate::dynamics::parse_map(spec, &ctx).unwrap();
            assert_eq!(lipschitz_upper(&f).unwrap(), estimate_lipschitz(&f).unwrap().c2_upper, "{spec}");
        }
        let q = PrecisionContext::qp(2, 4, -2, 1).unwrap();
        let f = crate::dynamics::parse_map("rho_open_Ra(a=1)", &q).unwrap();
        assert_eq!(lipschitz_upper(&f).unwrap(), estimate_lipschitz(&f).unwrap().c2_upper);
    }

    #[test]
    fn shift_and_affine_constants() {
        let ctx = PrecisionContext::zp(3, 5).unwrap();
        let s = estimate_lipschitz(&shift_zp(ctx)).unwrap();
        assert_eq!(s.c2_upper, Some(NormValue::Pow(-1)));
        let a = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 1)).unwrap();
        let e = estimate_lipschitz(&a).unwrap();
        assert_eq!((e.c1_lower, e.c2_upper), (Some(NormValue::Pow(1)), Some(NormValue::Pow(1))));
        assert!(e.exhaustive);
    }

    #[test]
    fn example2_r_lower_constant() {
        let ctx = PrecisionContext::zp(2, 8).unwrap();
        let r = builtin_map("example2_R", &Params::new(), &ctx).unwrap();
        let e = estimate_lipschitz(&r).unwrap();
        assert_eq!(e.c1_lower, Some(NormValue::Pow(4)));
        assert_eq!(e.c2_upper, Some(NormValue::Pow(1)));
        assert_eq!(image_openness(&r).unwrap(), None);
    }

    #[test]
    fn openness_of_simple_images() {
        let ctx = PrecisionContext::zp(3, 6).unwrap();
        let px = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 0)).unwrap();
        assert_eq!(image_openness(&px).unwrap(), Some(NormValue::Pow(1)));
        let a = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 1)).unwrap();
        assert_eq!(image_openness(&a).unwrap(), Some(NormValue::Pow(1)));
    }

    #[test]
    fn local_scaling() {
        let ctx = PrecisionContext::zp(2, 6).unwrap();
        assert!(check_locally_scaling(&shift_zp(ctx), 1, 1).unwrap().holds);
        let a = affine(ctx, PAdic::constant(2, 2), PAdic::constant(2, 1)).unwrap();
        let c = check_locally_scaling(&a, 1, 1).unwrap();
        assert!(!c.holds && c.witness.is_some());
    }

    #[test]
    fn expansivity() {
        let ctx = PrecisionContext::zp(2, 8).unwrap();
        let e = expansivity_constant(&shift_zp(ctx), 8).unwrap();
        assert_eq!(e.constant, NormValue::ONE);
        let a = affine(ctx, PAdic::constant(2, 2), PAdic::constant(2, 1)).unwrap();
        assert!(!expansivity_constant(&a, 8).unwrap().expansive);
    }

    #[test]
    fn affine_kappa() {
        let ctx = PrecisionContext::zp(3, 4).unwrap();
        let a = affine(ctx, PAdic::constant(3, 3), PAdic::constant(3, 2)).unwrap();
        let prof = scaling_profile(&a).unwrap();
        assert!(prof.consistent);
        assert_eq!(prof.kappa[&0], NormValue::Pow(1));
        assert_eq!(prof.kappa[&2], NormValue::Pow(3));
    }
}
