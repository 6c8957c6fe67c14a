use num_rational::Ratio;
use rayon::prelude::*;

use super::{ConjugacyMap, Direction};
use crate::dynamics::{DynamicMap, RightInverseFamily};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic};

/// Precision to which the depth-limited recursion pins down `z₀`: the
/// neglected tail is at most `Lip^depth · Lip · δ`.
fn certified_exponent(cap: i32, lip: NormValue, delta: NormValue, depth: usize) -> i32 {
    match (lip.exponent(), delta.exponent()) {
        (_, None) => cap,
        (None, _) => cap,
        (Some(l), Some(k)) => cap.min(l * depth as i32 + k + l),
    }
}

fn check_family(family: &RightInverseFamily, delta: NormValue, p: u32) -> Result<NormValue> {
    if !family.covering || !family.disjoint_open {
        return Err(Error::CoveringViolation("family must cover with disjoint open images".into()));
    }
    let lip = family
        .max_lip()
        .ok_or_else(|| Error::BadParams("every member needs a declared Lipschitz bound".into()))?;
    let r = lip.to_ratio(p);
    if r.is_integer() || delta.to_ratio(p) >= r.recip() - Ratio::from_integer(1) {
        return Err(Error::DeltaTooLarge(format!("‖f − g‖ = {delta} is not below min 1/Lip(R_i) − 1")));
    }
    Ok(lip)
}

/// `h(x) = x + z₀(x)` from the backward recursion along `(gⁿ(x))_{n ≤ depth}`:
/// `z_depth = 0`, `z_n = R_{i_n}(g^{n+1}(x) + z_{n+1}) − gⁿ(x)`.
fn recursion_table(
    walk: &DynamicMap,
    family: &RightInverseFamily,
    depth: usize,
) -> Result<Vec<PAdic>> {
    let ctx = *walk.ctx();
    if ctx.cap() - (depth as i32) * walk.precision_loss as i32 - ctx.floor() < 1 {
        return Err(Error::PrecisionExhausted(format!("depth {depth} leaves no certified digit")));
    }
    ctx.check_budget(u128::from(ctx.residue_count()) * (depth as u128 + 1))?;
    (0..ctx.residue_count())
        .into_par_iter()
        .map(|i| {
            let x = ctx.residue(i);
            let mut orbit = vec![x];
            for _ in 0..depth {
                let y = walk.eval(orbit.last().unwrap())?;
                orbit.push(y);
            }
            let mut z = PAdic::zero(ctx.prime, ctx.cap());
            for n in (0..depth).rev() {
                let idx = family.membership(&orbit[n]).ok_or_else(|| {
                    Error::CoveringViolation(format!("no member image contains {}", orbit[n]))
                })?;
                z = family.members[idx].eval(&(orbit[n + 1] + z))? - orbit[n];
            }
            Ok((x + z).truncate(ctx.cap()))
        })
        .collect()
}

/// Conjugacy `h` with `f∘h = h∘g` for `g` close to `f`.
pub fn build_conjugacy_thm1(
    f: &DynamicMap,
    family: &RightInverseFamily,
    g: &DynamicMap,
    depth: usize,
) -> Result<ConjugacyMap> {
    let ctx = *f.ctx();
    let delta = f.sup_distance(g)?;
    let lip = check_family(family, delta, ctx.prime)?;
    let table = recursion_table(g, family, depth)?;
    let cert = certified_exponent(ctx.cap(), lip, delta, depth);
    let mut h = ConjugacyMap::from_table(ctx, table, cert, depth, Direction::Thm1H)?;
    h.error_budget = Some(NormValue::Pow(cert));
    Ok(h)
}

/// Inverse conjugacy `h̃` with `g∘h̃ = h̃∘f`, from the transferred family of `g`.
pub fn build_inverse_conjugacy_thm1(
    f: &DynamicMap,
    g: &DynamicMap,
    transferred: &RightInverseFamily,
    depth: usize,
) -> Result<ConjugacyMap> {
    let ctx = *f.ctx();
    let delta = f.sup_distance(g)?;
    let lip = check_family(transferred, delta, ctx.prime)?;
    let table = recursion_table(f, transferred, depth)?;
    let cert = certified_exponent(ctx.cap(), lip, delta, depth);
    let mut h = ConjugacyMap::from_table(ctx, table, cert, depth, Direction::Thm1HTilde)?;
    h.error_budget = Some(NormValue::Pow(cert));
    Ok(h)
}
