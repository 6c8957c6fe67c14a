use std::collections::BTreeMap;

use super::map::{DynamicMap, MapTag};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, PrecisionContext, Space};

/// Names accepted by [`builtin_map`].
pub const CATALOG: &[&str] = &[
    "identity",
    "shift_zp",
    "shift_qp",
    "example2_R",
    "example2_L",
    "example2_phi_n",
    "rho_open_Ra",
    "affine",
    "remark2_uvw",
    "thm1_qp_example",
    "constant",
    "digit_swap",
    "digit_twist",
    "digit_perm",
];

/// Parameter values for catalog maps.
#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.values.keys()
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// A p-adic parameter given as canonical text or as a (signed) integer.
    pub fn padic(&self, key: &str, ctx: &PrecisionContext) -> Result<PAdic> {
        let raw = self.raw(key).ok_or_else(|| Error::BadParams(format!("missing parameter `{key}`")))?;
        parse_value(raw, ctx)
    }

    pub fn int(&self, key: &str, default: Option<i64>) -> Result<i64> {
        match (self.raw(key), default) {
            (Some(raw), _) => raw
                .trim()
                .parse()
                .map_err(|_| Error::BadParams(format!("`{key}` must be an integer, got `{raw}`"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::BadParams(format!("missing parameter `{key}`"))),
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::BadParams(format!("unexpected parameter `{k}`")));
            }
        }
        Ok(())
    }
}

/// A p-adic literal: `p:..;u:..;d:..` or an integer at full precision.
pub fn parse_value(raw: &str, ctx: &PrecisionContext) -> Result<PAdic> {
    let raw = raw.trim();
    if raw.starts_with("p:") {
        let x = PAdic::parse(raw)?;
        if x.prime() != ctx.prime {
            return Err(Error::PrimeMismatch(x.prime(), ctx.prime));
        }
        return Ok(x.exact());
    }
    let v: i64 = raw
        .parse()
        .map_err(|_| Error::BadParams(format!("expected a p-adic literal or integer, got `{raw}`")))?;
    Ok(PAdic::constant(ctx.prime, v))
}

fn want_space(ctx: &PrecisionContext, space: Space, name: &str) -> Result<()> {
    if ctx.space != space {
        return Err(Error::BadParams(format!("`{name}` needs a {space:?} context")));
    }
    Ok(())
}

/// Looks up a catalog map by name.
pub fn builtin_map(name: &str, params: &Params, ctx: &PrecisionContext) -> Result<DynamicMap> {
    let ctx = *ctx;
    let p = ctx.prime;
    match name {
        "identity" => {
            params.only(&[])?;
            Ok(DynamicMap::identity(ctx))
        }
        "shift_zp" => {
            params.only(&[])?;
            want_space(&ctx, Space::Zp, name)?;
            Ok(shift_zp(ctx))
        }
        "shift_qp" => {
            params.only(&[])?;
            want_space(&ctx, Space::Qp, name)?;
            Ok(DynamicMap::new(ctx, MapTag::new(name), 1, |x| Ok(x.shift(-1)))
                .with_lip(Some(NormValue::Pow(-1)), Some(NormValue::Pow(-1))))
        }
        "example2_R" => {
            params.only(&[])?;
            want_space(&ctx, Space::Zp, name)?;
            Ok(DynamicMap::new(ctx, MapTag::new(name), 0, move |x| {
                let prec = x.prec().max(0);
                let mut out = vec![0u32; (2 * prec + 1) as usize];
                for i in 0..prec {
                    out[(2 * i + 1) as usize] = x.digit(i).unwrap_or(0);
                }
                PAdic::from_digits(p, 0, &out)
            })
            .with_lip(Some(NormValue::Pow(1)), None))
        }
        "example2_L" => {
            params.only(&[])?;
            want_space(&ctx, Space::Zp, name)?;
            let loss = ctx.digit_budget - ctx.digit_budget / 2;
            Ok(DynamicMap::new(ctx, MapTag::new(name), loss, move |x| {
                let prec = x.prec().max(0);
                let out: Vec<u32> = (0..prec / 2).map(|i| x.digit(2 * i + 1).unwrap_or(0)).collect();
                PAdic::from_digits(p, 0, &out)
            }))
        }
        "example2_phi_n" => {
            params.only(&["n"])?;
            want_space(&ctx, Space::Zp, name)?;
            let n = params.int("n", None)?;
            if n < 0 {
                return Err(Error::BadParams("n must be non-negative".into()));
            }
            Ok(example2_phi(ctx, n as i32))
        }
        "rho_open_Ra" => {
            params.only(&["a"])?;
            let a = params.int("a", Some(0))?;
            if a < 0 || a >= i64::from(p) {
                return Err(Error::BadParams(format!("a must be a digit below {p}")));
            }
            Ok(rho_open(ctx, a))
        }
        "affine" => {
            params.only(&["v", "w"])?;
            let v = params.padic("v", &ctx)?;
            let w = params.padic("w", &ctx)?;
            affine(ctx, v, w)
        }
        "remark2_uvw" => {
            params.only(&["u", "v", "w"])?;
            let u = params.padic("u", &ctx)?;
            let v = params.padic("v", &ctx)?;
            let w = params.padic("w", &ctx)?;
            if !(NormValue::Zero < v.norm() && v.norm() < u.norm() && u.norm() < NormValue::ONE) {
                return Err(Error::BadParams("need 0 < ‖v‖ < ‖u‖ < 1".into()));
            }
            let tag = MapTag::new(name).with("u", u).with("v", v).with("w", w);
            Ok(DynamicMap::new(ctx, tag, 0, move |x| {
                let (int, frac) = x.int_frac_split();
                Ok(u * frac + v * int + w)
            })
            .with_lip(Some(u.norm()), Some(v.norm())))
        }
        "thm1_qp_example" => {
            params.only(&[])?;
            want_space(&ctx, Space::Qp, name)?;
            Ok(DynamicMap::new(ctx, MapTag::new(name), 2, move |x| {
                let (int, frac) = x.int_frac_split();
                let a0 = int.digit(0);
                let a1 = int.digit(1);
                let (Some(a0), Some(a1)) = (a0, a1) else {
                    return Ok(PAdic::zero(p, x.prec() - 2));
                };
                let low = PAdic::constant(p, i64::from(a0) + i64::from(a1) * i64::from(p));
                let high = (int - low).shift(-2);
                let fractional = (frac + PAdic::constant(p, i64::from(a0))).shift(-1);
                Ok(fractional + high)
            })
            .with_lip(Some(NormValue::Pow(-2)), Some(NormValue::Pow(-1))))
        }
        "constant" => {
            params.only(&["c"])?;
            let c = params.padic("c", &ctx)?;
            Ok(constant(ctx, c))
        }
        "digit_swap" => {
            params.only(&["i", "j"])?;
            let i = params.int("i", Some(0))? as i32;
            let j = params.int("j", Some(1))? as i32;
            if i == j || i < ctx.floor() || j < ctx.floor() {
                return Err(Error::BadParams("digit_swap needs distinct positions inside the window".into()));
            }
            Ok(digit_swap(ctx, i.min(j), i.max(j)))
        }
        "digit_twist" => {
            params.only(&[])?;
            Ok(digit_twist(ctx))
        }
        "digit_perm" => {
            params.only(&["sigma"])?;
            let raw = params.raw("sigma").ok_or_else(|| Error::BadParams("missing `sigma`".into()))?;
            let sigma: Vec<u32> = raw.trim().chars().map(|c| c.to_digit(10).unwrap_or(u32::MAX)).collect();
            let mut sorted = sigma.clone();
            sorted.sort_unstable();
            if sorted != (0..p).collect::<Vec<_>>() {
                return Err(Error::BadParams(format!("`{raw}` is not a permutation of the digits below {p}")));
            }
            Ok(digit_perm(ctx, sigma))
        }
        _ => Err(Error::UnknownMap(name.to_string())),
    }
}

pub fn shift_zp(ctx: PrecisionContext) -> DynamicMap {
    let p = ctx.prime;
    DynamicMap::new(ctx, MapTag::new("shift_zp"), 1, move |x| {
        let Some(a0) = x.digit(0) else {
            return Ok(PAdic::zero(p, x.prec() - 1));
        };
        Ok((*x - PAdic::constant(p, i64::from(a0))).shift(-1))
    })
    .with_lip(Some(NormValue::Pow(-1)), None)
}

pub fn example2_phi(ctx: PrecisionContext, n: i32) -> DynamicMap {
    let p = ctx.prime;
    let tag = MapTag::new("example2_phi_n").with("n", n);
    DynamicMap::new(ctx, tag, 0, move |x| match x.digit(n) {
        Some(d) => Ok(PAdic::constant(p, -i64::from(d)).shift(2 * n + 1)),
        None => Ok(PAdic::zero(p, 2 * n + 1)),
    })
    .with_lip(Some(NormValue::Pow(n + 1)), None)
}

/// `R_a(x) = p{x} + ap + p²⌊x⌋`.
pub fn rho_open(ctx: PrecisionContext, a: i64) -> DynamicMap {
    let p = ctx.prime;
    let tag = MapTag::new("rho_open_Ra").with("a", a);
    DynamicMap::new(ctx, tag, 0, move |x| {
        let (int, frac) = x.int_frac_split();
        Ok(frac.shift(1) + PAdic::constant(p, a).shift(1) + int.shift(2))
    })
    .with_lip(Some(NormValue::Pow(1)), Some(NormValue::Pow(2)))
}

/// `x ↦ v·x + w`, `v ≠ 0`.
pub fn affine(ctx: PrecisionContext, v: PAdic, w: PAdic) -> Result<DynamicMap> {
    if v.is_zero() {
        return Err(Error::BadParams("affine needs v ≠ 0".into()));
    }
    let loss = (-v.base_exp()).max(0) as u32;
    let tag = MapTag::new("affine").with("v", v).with("w", w);
    Ok(DynamicMap::new(ctx, tag, loss, move |x| Ok(v * *x + w)).with_lip(Some(v.norm()), Some(v.norm())))
}

pub fn constant(ctx: PrecisionContext, c: PAdic) -> DynamicMap {
    let tag = MapTag::new("constant").with("c", c);
    DynamicMap::new(ctx, tag, 0, move |_| Ok(c)).with_lip(Some(NormValue::Zero), None)
}

/// Swaps the digits at absolute positions `i < j`.
pub fn digit_swap(ctx: PrecisionContext, i: i32, j: i32) -> DynamicMap {
    let p = ctx.prime;
    let tag = MapTag::new("digit_swap").with("i", i).with("j", j);
    DynamicMap::new(ctx, tag, 0, move |x| {
        let prec = x.prec();
        if prec <= i {
            return Ok(*x);
        }
        if prec <= j {
            return Ok(x.truncate(i));
        }
        let di = i64::from(x.digit(i).unwrap_or(0));
        let dj = i64::from(x.digit(j).unwrap_or(0));
        let d = PAdic::constant(p, dj - di);
        Ok(*x + d.shift(i) - d.shift(j))
    })
    .with_lip(Some(NormValue::ONE), Some(NormValue::ONE))
}

/// Output digit m is `x_m + x_{m−1} mod p` (the lowest window digit is kept).
pub fn digit_twist(ctx: PrecisionContext) -> DynamicMap {
    let p = ctx.prime;
    let floor = ctx.floor();
    DynamicMap::new(ctx, MapTag::new("digit_twist"), 0, move |x| {
        let prec = x.prec();
        let mut prev = 0u32;
        let out: Vec<u32> = (floor..prec)
            .map(|m| {
                let d = x.digit(m).unwrap_or(0);
                let o = if m == floor { d } else { (d + prev) % p };
                prev = d;
                o
            })
            .collect();
        if out.is_empty() {
            return Ok(*x);
        }
        PAdic::from_digits(p, floor, &out)
    })
    .with_lip(Some(NormValue::ONE), Some(NormValue::ONE))
}

/// Applies the digit permutation `sigma` at every position of the window.
pub fn digit_perm(ctx: PrecisionContext, sigma: Vec<u32>) -> DynamicMap {
    let p = ctx.prime;
    let floor = ctx.floor();
    let label: String = sigma.iter().map(u32::to_string).collect();
    DynamicMap::new(ctx, MapTag::new("digit_perm").with("sigma", label), 0, move |x| {
        let out: Vec<u32> = (floor..x.prec()).map(|m| sigma[x.digit(m).unwrap_or(0) as usize]).collect();
        if out.is_empty() {
            return Ok(*x);
        }
        PAdic::from_digits(p, floor, &out)
    })
    .with_lip(Some(NormValue::ONE), Some(NormValue::ONE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(p: u32, n: u32) -> PrecisionContext {
        PrecisionContext::zp(p, n).unwrap()
    }

    #[test]
    fn shift_drops_first_digit() {
        let ctx = zp(3, 4);
        let s = builtin_map("shift_zp", &Params::new(), &ctx).unwrap();
        let x = ctx.make(0, &[1, 2, 0, 2]).unwrap();
        assert_eq!(s.eval(&x).unwrap(), PAdic::from_digits(3, 0, &[2, 0, 2]).unwrap());
    }

    #[test]
    fn affine_value() {
        let ctx = zp(3, 4);
        let f = builtin_map("affine", &Params::new().set("v", 3).set("w", 1), &ctx).unwrap();
        assert_eq!(f.eval(&ctx.int(2)).unwrap().truncate(4), ctx.int(7));
        assert_eq!(f.eval(&ctx.int(2)).unwrap().prec(), 5);
    }

    #[test]
    fn example2_r_spreads_digits() {
        let ctx = zp(2, 2);
        let r = builtin_map("example2_R", &Params::new(), &ctx).unwrap();
        let y = r.eval(&ctx.make(0, &[1, 1]).unwrap()).unwrap();
        assert_eq!(y.truncate(4), PAdic::from_digits(2, 0, &[0, 1, 0, 1]).unwrap());
        let l = builtin_map("example2_L", &Params::new(), &ctx).unwrap();
        let back = l.eval(&y).unwrap();
        assert_eq!(back.truncate(2), ctx.make(0, &[1, 1]).unwrap());
    }

    #[test]
    fn thm1_qp_example_inverts_rho_open() {
        let ctx = PrecisionContext::qp(3, 3, -2, 0).unwrap();
        let f = builtin_map("thm1_qp_example", &Params::new(), &ctx).unwrap();
        for a in 0..3 {
            let r = rho_open(ctx, a);
            for x in ctx.residues().unwrap() {
                let y = f.eval(&r.eval(&x).unwrap()).unwrap();
                assert!(y.eq_mod(&x, ctx.cap() - 1), "a={a} x={x} y={y}");
            }
        }
    }

    #[test]
    fn twist_and_swap_are_bijective_on_residues() {
        let ctx = zp(2, 6);
        for m in [digit_twist(ctx), digit_swap(ctx, 0, 2), digit_perm(ctx, vec![1, 0])] {
            let mut seen = [false; 64];
            for x in ctx.residues().unwrap() {
                let i = ctx.index_of(&m.eval(&x).unwrap()).unwrap();
                assert!(!seen[i as usize]);
                seen[i as usize] = true;
            }
        }
    }

    #[test]
    fn unknown_and_bad_params() {
        let ctx = zp(3, 4);
        assert!(matches!(builtin_map("nope", &Params::new(), &ctx), Err(Error::UnknownMap(_))));
        assert!(matches!(
            builtin_map("affine", &Params::new().set("v", 0).set("w", 1), &ctx),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(builtin_map("shift_qp", &Params::new(), &ctx), Err(Error::BadParams(_))));
    }
}
