use serde::{Deserialize, Serialize};

use super::catalog::example2_phi;
use super::map::{DynamicMap, MapTag};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, PrecisionContext};

/// Families of δ-Lipschitz perturbations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    Zero,
    /// Output digit `m ≥ k` is a seeded hash of the input digits below `m − k + 1`.
    DigitLocal,
    Constant { c: PAdic },
    Example2PhiN { n: u32 },
    /// `c` on the ball `B(center, radius)`, zero elsewhere.
    Indicator { c: PAdic, center: PAdic, radius: NormValue },
}

/// A map `φ` with `Lip(φ) ≤ δ` and `‖φ‖_∞ ≤ δ`.
#[derive(Clone, Debug)]
pub struct LipschitzPerturbation {
    pub map: DynamicMap,
    pub delta: NormValue,
    pub kind: PerturbationKind,
    pub seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn make_lipschitz_perturbation(
    ctx: &PrecisionContext,
    delta: NormValue,
    kind: &PerturbationKind,
    seed: u64,
) -> Result<LipschitzPerturbation> {
    let ctx = *ctx;
    let p = ctx.prime;
    if delta < ctx.resolution() && !(delta.is_zero() && *kind == PerturbationKind::Zero) {
        return Err(Error::DeltaTooSmall(delta.to_string()));
    }
    let map = match kind {
        PerturbationKind::Zero => {
            DynamicMap::new(ctx, MapTag::new("zero"), 0, move |_| Ok(PAdic::constant(p, 0)))
                .with_lip(Some(NormValue::Zero), None)
        }
        PerturbationKind::Constant { c } => {
            if c.norm() > delta {
                return Err(Error::BadParams(format!("‖c‖ = {} exceeds δ = {delta}", c.norm())));
            }
            super::catalog::constant(ctx, *c)
        }
        PerturbationKind::Example2PhiN { n } => {
            let own = NormValue::Pow(*n as i32 + 1);
            if own > delta {
                return Err(Error::BadParams(format!("φ_{n} needs δ ≥ {own}")));
            }
            example2_phi(ctx, *n as i32)
        }
        PerturbationKind::Indicator { c, center, radius } => {
            if c.norm() > delta || c.norm() > delta.times(radius.scale(1)) {
                return Err(Error::BadParams("indicator value too large for δ".into()));
            }
            let (c, center, radius) = (*c, *center, *radius);
            let zero = PAdic::constant(p, 0);
            let k = radius.exponent().unwrap_or(ctx.cap());
            let tag = MapTag::new("indicator").with("c", c).with("center", center).with("radius", radius);
            DynamicMap::new(ctx, tag, 0, move |x| {
                let d = *x - center;
                if d.prec() < k && d.is_zero() {
                    return Ok(PAdic::zero(p, c.val_lower()));
                }
                Ok(if d.norm() <= radius { c } else { zero })
            })
            .with_lip(Some(delta), None)
        }
        PerturbationKind::DigitLocal => {
            let Some(k) = delta.exponent() else {
                return Err(Error::BadParams("digit_local needs δ > 0".into()));
            };
            digit_local(ctx, k, seed)
        }
    };
    Ok(LipschitzPerturbation { map, delta, kind: kind.clone(), seed })
}

fn digit_local(ctx: PrecisionContext, k: i32, seed: u64) -> DynamicMap {
    let p = ctx.prime;
    let floor = ctx.floor();
    let tag = MapTag::new("digit_local").with("delta", NormValue::Pow(k)).with("seed", seed);
    DynamicMap::new(ctx, tag, 0, move |x| {
        let out_prec = x.prec() + k;
        let p64 = u64::from(p);
        let cap = crate::padic::capacity(p);
        // Input digits are consumed in order from position `floor.max(0)`.
        let start = floor.max(0);
        let (base, prec) = (x.val_lower(), x.prec());
        let mut mant = x.mantissa();
        if base < start {
            let drop = (start - base) as u32;
            mant = if drop >= x.len() { 0 } else { mant / crate::padic::pow_u64(p, drop) };
        }
        let mut prefix = 0u64;
        let mut weight = 1u64;
        let (mut out, mut scale, mut count) = (0u64, 1u64, 0u32);
        for m in k..out_prec {
            let pos = m - k;
            if pos >= floor {
                let d = if pos < base.max(start) || pos >= prec {
                    0
                } else {
                    let d = mant % p64;
                    mant /= p64;
                    d
                };
                prefix = prefix.wrapping_add(d.wrapping_mul(weight));
                weight = weight.wrapping_mul(p64);
            }
            let h = splitmix(seed ^ splitmix((m as i64 as u64) ^ splitmix(prefix).rotate_left(17)));
            out += (h % p64) * scale;
            count += 1;
            if count >= cap {
                break;
            }
            scale *= p64;
        }
        if count == 0 {
            return Ok(PAdic::zero(p, out_prec));
        }
        Ok(PAdic::from_index(p, k, k + count as i32, out))
    })
    .with_lip(Some(NormValue::Pow(k)), None)
}

impl LipschitzPerturbation {
    pub fn eval(&self, x: &PAdic) -> Result<PAdic> {
        self.map.eval(x)
    }

    /// `‖φ‖_∞` over all residues.
    pub fn sup_norm(&self) -> Result<NormValue> {
        let zero = super::catalog::constant(*self.map.ctx(), PAdic::constant(self.map.ctx().prime, 0));
        self.map.sup_distance(&zero)
    }
}

/// `g = f + φ`.
pub fn perturb(f: &DynamicMap, phi: &LipschitzPerturbation) -> DynamicMap {
    let mut g = f.plus(&phi.map);
    g.tag = MapTag::new("perturb").with("", &f.tag).with("", &phi.map.tag);
    g
}
