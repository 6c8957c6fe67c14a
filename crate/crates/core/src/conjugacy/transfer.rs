use num_rational::Ratio;

use crate::analysis::lipschitz_upper;
use crate::dynamics::{image_set, perturb, DynamicMap, LipschitzPerturbation, MapTag, RightInverseFamily};
use crate::error::{Error, Result};
use crate::padic::NormValue;

/// `Lip(R) / (1 − δ·Lip(R))`.
pub fn lemma51_bound(lip: Ratio<i128>, delta: Ratio<i128>) -> Ratio<i128> {
    lip / (Ratio::from_integer(1) - delta * lip)
}

#[derive(Clone, Debug)]
pub struct Transfer {
    /// `R̃ = R∘H⁻¹`, table backed.
    pub map: DynamicMap,
    pub lip_bound: Ratio<i128>,
    /// `Lip(R̃)` measured over residue pairs.
    pub lip_measured: Option<NormValue>,
    pub right_inverse_ok: bool,
    pub image_equal: bool,
}

impl Transfer {
    pub fn lip_within_bound(&self) -> bool {
        let p = self.map.ctx().prime;
        self.lip_measured.is_none_or(|l| l.to_ratio(p) <= self.lip_bound)
    }
}

/// Right inverse of `g = f + φ` from a right inverse `R` of `f`: `R̃(z) = R(x)`
/// where `x` is the fixed point of `Φ_z(x) = z − φ(R(x))`.
pub fn transfer_right_inverse(f: &DynamicMap, r: &DynamicMap, phi: &LipschitzPerturbation) -> Result<Transfer> {
    let ctx = *f.ctx();
    let p = ctx.prime;
    let lip = r.lip_upper.ok_or_else(|| Error::BadParams("R needs a declared Lipschitz bound".into()))?;
    let (lip_q, delta_q) = (lip.to_ratio(p), phi.delta.to_ratio(p));
    if lip_q >= Ratio::from_integer(1) || delta_q >= lip_q.recip() - Ratio::from_integer(1) {
        return Err(Error::DeltaTooLarge(format!("need δ < Lip(R)⁻¹ − 1, got δ = {}, Lip(R) = {lip}", phi.delta)));
    }
    let lip_bound = lemma51_bound(lip_q, delta_q);
    let (r2, phi2) = (r.clone(), phi.map.clone());
    let max_iter = ctx.width() as usize + 4;
    let raw = DynamicMap::new(ctx, MapTag::new("transfer").with("", &r.tag).with("", &phi.map.tag), 0, move |z| {
        let mut x = *z;
        for _ in 0..max_iter {
            let next = *z - phi2.eval(&r2.eval(&x)?)?;
            if next.agrees(&x) && next.prec() >= x.prec().min(z.prec()) {
                return r2.eval(&next);
            }
            x = next;
        }
        Err(Error::NonConvergence(format!("Φ_z did not stabilise for z = {z}")))
    })
    .with_lip(Some(NormValue::floor_of(lip_bound, p)), None);
    let map = raw.tabulate()?;

    let g = perturb(f, phi);
    let target = ctx.cap() - g.precision_loss as i32;
    let right_inverse_ok = ctx.residues()?.all(|z| {
        map.eval(&z)
            .and_then(|y| g.eval(&y))
            .map(|w| w.prec() >= target && w.eq_mod(&z, target))
            .unwrap_or(false)
    });
    let image_equal = image_set(&map)? == image_set(r)?;
    let lip_measured = lipschitz_upper(&map)?;
    Ok(Transfer { map, lip_bound, lip_measured, right_inverse_ok, image_equal })
}

/// Transfers every member; membership is inherited since images agree.
pub fn transfer_family(
    f: &DynamicMap,
    family: &RightInverseFamily,
    phi: &LipschitzPerturbation,
) -> Result<(RightInverseFamily, Vec<Transfer>)> {
    let transfers = family
        .members
        .iter()
        .map(|r| transfer_right_inverse(f, r, phi))
        .collect::<Result<Vec<_>>>()?;
    if let Some(t) = transfers.iter().find(|t| !t.image_equal || !t.right_inverse_ok) {
        return Err(Error::NonConvergence(format!("transfer of {} failed verification", t.map.tag)));
    }
    let base = family.clone();
    let fam = RightInverseFamily::new(
        transfers.iter().map(|t| t.map.clone()).collect(),
        family.labels.iter().map(|l| format!("{l}~")).collect(),
        family.covering,
        family.disjoint_open,
        move |x| base.membership(x),
    );
    Ok((fam, transfers))
}
