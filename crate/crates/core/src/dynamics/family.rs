use std::sync::Arc;

use rayon::prelude::*;

use super::catalog::{affine, rho_open, shift_zp};
use super::map::{DynamicMap, MapTag};
use crate::error::{Error, Result};
use crate::padic::{ball_union_radius, pow_u64, NormValue, PAdic, PrecisionContext, Space};

type Membership = dyn Fn(&PAdic) -> Option<usize> + Send + Sync;

/// Contractions `R_i` with `f∘R_i = id`.
#[derive(Clone)]
pub struct RightInverseFamily {
    pub members: Vec<DynamicMap>,
    pub labels: Vec<String>,
    pub covering: bool,
    pub disjoint_open: bool,
    membership: Arc<Membership>,
}

/// Result of scanning a family's images on all residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyScan {
    pub covering: bool,
    pub disjoint: bool,
    pub open: bool,
    pub image_sizes: Vec<usize>,
}

impl std::fmt::Debug for RightInverseFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RightInverseFamily")
            .field("labels", &self.labels)
            .field("covering", &self.covering)
            .field("disjoint_open", &self.disjoint_open)
            .finish()
    }
}

impl RightInverseFamily {
    /// Family with an explicit membership rule and declared flags.
    pub fn new<M>(members: Vec<DynamicMap>, labels: Vec<String>, covering: bool, disjoint_open: bool, m: M) -> Self
    where
        M: Fn(&PAdic) -> Option<usize> + Send + Sync + 'static,
    {
        RightInverseFamily { members, labels, covering, disjoint_open, membership: Arc::new(m) }
    }

    /// Family whose membership is found by search: the smallest `i` with
    /// `R_i(f(x)) = x`. Flags come from a residue scan.
    pub fn by_search(f: &DynamicMap, members: Vec<DynamicMap>, labels: Vec<String>) -> Result<Self> {
        let (f2, ms) = (f.clone(), members.clone());
        let mut fam = RightInverseFamily::new(members, labels, false, false, move |x| {
            let y = f2.eval(x).ok()?;
            ms.iter().position(|r| r.eval(&y).map(|z| z.agrees(x)).unwrap_or(false))
        });
        let scan = fam.scan()?;
        fam.covering = scan.covering;
        fam.disjoint_open = scan.disjoint && scan.open;
        Ok(fam)
    }

    pub fn membership(&self, x: &PAdic) -> Option<usize> {
        (self.membership)(x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest declared Lipschitz bound among the members.
    pub fn max_lip(&self) -> Option<NormValue> {
        self.members.iter().map(|m| m.lip_upper).collect::<Option<Vec<_>>>()?.into_iter().max()
    }

    /// Image of every member as a residue indicator vector.
    pub fn image_sets(&self) -> Result<Vec<Vec<bool>>> {
        self.members.iter().map(image_set).collect()
    }

    /// Checks covering, disjointness and openness of the images at resolution.
    pub fn scan(&self) -> Result<FamilyScan> {
        let sets = self.image_sets()?;
        let n = sets.first().map_or(0, Vec::len);
        let mut count = vec![0u32; n];
        for s in &sets {
            for (c, &b) in count.iter_mut().zip(s) {
                *c += u32::from(b);
            }
        }
        let ctx = *self.members[0].ctx();
        Ok(FamilyScan {
            covering: count.iter().all(|&c| c >= 1),
            disjoint: count.iter().all(|&c| c <= 1),
            open: sets.iter().all(|s| ball_union_radius(&ctx, s).is_some()),
            image_sizes: sets.iter().map(|s| s.iter().filter(|&&b| b).count()).collect(),
        })
    }

    /// First `(member, residue)` where `f∘R_i ≠ id`, if any.
    pub fn right_inverse_failure(&self, f: &DynamicMap) -> Result<Option<(usize, PAdic)>> {
        let ctx = *f.ctx();
        ctx.check_budget(u128::from(ctx.residue_count()) * self.members.len() as u128)?;
        for (i, r) in self.members.iter().enumerate() {
            let bad = (0..ctx.residue_count()).into_par_iter().find_first(|&j| {
                let x = ctx.residue(j);
                match r.eval(&x).and_then(|y| f.eval(&y)) {
                    Ok(z) => !z.agrees(&x) || z.prec() < ctx.cap() - f.precision_loss as i32,
                    Err(_) => true,
                }
            });
            if let Some(j) = bad {
                return Ok(Some((i, ctx.residue(j))));
            }
        }
        Ok(None)
    }
}

/// `R(X)` modulo the resolution, as an indicator over residue indices.
pub fn image_set(r: &DynamicMap) -> Result<Vec<bool>> {
    let ctx = *r.ctx();
    let table = r.residue_table()?;
    let mut set = vec![false; ctx.residue_count() as usize];
    for y in table {
        let i = ctx
            .index_of(&y)
            .or_else(|| ctx.index_padded(&y))
            .ok_or_else(|| Error::WindowViolation(format!("image point {y} outside the window")))?;
        set[i as usize] = true;
    }
    Ok(set)
}

/// `R_i(x) = i + p·x`, the right inverses of the shift on ℤ_p.
pub fn shift_right_inverses(ctx: &PrecisionContext) -> Result<RightInverseFamily> {
    if ctx.space != Space::Zp {
        return Err(Error::BadParams("shift_right_inverses needs a ℤ_p context".into()));
    }
    let p = ctx.prime;
    let members = (0..p)
        .map(|i| affine(*ctx, PAdic::constant(p, i64::from(p)), PAdic::constant(p, i64::from(i))))
        .collect::<Result<Vec<_>>>()?;
    let labels = (0..p).map(|i| format!("R_{i}")).collect();
    Ok(RightInverseFamily::new(members, labels, true, true, |x| x.digit(0).map(|d| d as usize)))
}

/// `R_a(x) = p{x} + ap + p²⌊x⌋`, right inverses of `thm1_qp_example`; the
/// member is read off digit 1.
pub fn qp_example_inverses(ctx: &PrecisionContext) -> Result<RightInverseFamily> {
    if ctx.space != Space::Qp {
        return Err(Error::BadParams("qp_example_inverses needs a ℚ_p context".into()));
    }
    let p = ctx.prime;
    let members = (0..p).map(|a| rho_open(*ctx, i64::from(a))).collect();
    let labels = (0..p).map(|a| format!("R_{a}")).collect();
    Ok(RightInverseFamily::new(members, labels, true, true, |x| x.digit(1).map(|d| d as usize)))
}

/// Residue table of a map known to be a bijective isometry, checked level by level.
fn isometry_table(w: &DynamicMap) -> Result<Vec<u64>> {
    let ctx = *w.ctx();
    let table: Vec<u64> = w
        .residue_table()?
        .iter()
        .map(|y| ctx.index_of(y).ok_or_else(|| Error::NotIsometry(format!("output {y} loses precision"))))
        .collect::<Result<_>>()?;
    let p = ctx.prime;
    for level in 1..=ctx.width() {
        let m = pow_u64(p, level);
        let mut image: Vec<Option<u64>> = vec![None; m as usize];
        let mut hit = vec![false; m as usize];
        for (x, &y) in table.iter().enumerate() {
            let (xm, ym) = (x as u64 % m, y % m);
            match image[xm as usize] {
                None => image[xm as usize] = Some(ym),
                Some(prev) if prev != ym => {
                    return Err(Error::NotIsometry(format!("digits below {level} are not preserved as a block")))
                }
                _ => {}
            }
        }
        for y in image.into_iter().flatten() {
            if std::mem::replace(&mut hit[y as usize], true) {
                return Err(Error::NotBijective(format!("collision modulo p^{level}")));
            }
        }
    }
    Ok(table)
}

/// Inverse of a bijective isometry, served from its residue table.
fn inverse_isometry(w: &DynamicMap) -> Result<DynamicMap> {
    let ctx = *w.ctx();
    let table = isometry_table(w)?;
    let mut inv = vec![0u64; table.len()];
    for (x, &y) in table.iter().enumerate() {
        inv[y as usize] = x as u64;
    }
    let inv = Arc::new(inv);
    let tag = MapTag::new("inverse").with("", &w.tag);
    Ok(DynamicMap::new(ctx, tag, 0, move |y| {
        let i = ctx.index_padded(y).ok_or_else(|| Error::WindowViolation(format!("{y}")))?;
        Ok(ctx.residue(inv[i as usize]).truncate(y.prec()))
    })
    .with_lip(Some(NormValue::ONE), Some(NormValue::ONE)))
}

/// `f = S^k ∘ w` for a bijective isometry `w` of ℤ_p.
pub fn furno_compose(w: &DynamicMap, k: u32, ctx: &PrecisionContext) -> Result<DynamicMap> {
    if k == 0 {
        return Err(Error::BadParams("k must be at least 1".into()));
    }
    isometry_table(w)?;
    let s = shift_zp(*ctx);
    let mut f = w.clone();
    for _ in 0..k {
        f = s.compose(&f);
    }
    f.tag = MapTag::new("furno").with("", &w.tag).with("k", k);
    f.lip_upper = Some(NormValue::Pow(-(k as i32)));
    f.lip_lower = None;
    Ok(f)
}

/// The `p^k` right inverses `R_a = w⁻¹∘R_{a_1}∘⋯∘R_{a_k}` of `S^k ∘ w`.
pub fn locally_scaling_inverses(w: &DynamicMap, k: u32, ctx: &PrecisionContext) -> Result<RightInverseFamily> {
    if k == 0 {
        return Err(Error::BadParams("k must be at least 1".into()));
    }
    let p = ctx.prime;
    let winv = inverse_isometry(w)?;
    let count = pow_u64(p, k);
    let pk = PAdic::constant(p, count as i64);
    let mut members = Vec::new();
    let mut labels = Vec::new();
    for word in 0..count {
        let word_value = PAdic::constant(p, word as i64);
        let inner = DynamicMap::new(*ctx, MapTag::new("word").with("a", word), 0, move |x| Ok(word_value + pk * *x));
        let mut r = winv.compose(&inner);
        r.lip_upper = Some(NormValue::Pow(k as i32));
        r.lip_lower = Some(NormValue::Pow(k as i32));
        let digits: Vec<String> = (0..k).map(|i| ((word / pow_u64(p, i)) % u64::from(p)).to_string()).collect();
        labels.push(format!("R_{}", digits.join("")));
        members.push(r);
    }
    let w2 = w.clone();
    Ok(RightInverseFamily::new(members, labels, true, true, move |x| {
        let y = w2.eval(x).ok()?;
        y.index(0, k as i32).map(|i| i as usize)
    }))
}
