use super::catalog::{builtin_map, Params};
use super::family::{furno_compose, locally_scaling_inverses, qp_example_inverses, shift_right_inverses, RightInverseFamily};
use super::map::DynamicMap;
use super::perturbation::{make_lipschitz_perturbation, LipschitzPerturbation, PerturbationKind};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PrecisionContext};

/// A parsed `name(arg, key=value, ...)` expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecExpr {
    pub name: String,
    pub positional: Vec<SpecExpr>,
    pub named: Vec<(String, String)>,
    pub offset: usize,
}

fn perr(position: usize, message: impl Into<String>) -> Error {
    Error::Parse { position, message: message.into() }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits at top-level commas that start a new argument (the next
/// non-space character is a letter), so digit lists survive inside values.
fn split_args(body: &str, base: usize) -> Result<Vec<(usize, &str)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(perr(base + i, "unbalanced `)`"));
                }
            }
            ',' if depth == 0 => {
                let next = body[i + 1..].trim_start().chars().next();
                if next.is_some_and(|n| n.is_ascii_alphabetic() || n == '_') {
                    out.push((base + start, &body[start..i]));
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(perr(base + body.len(), "unbalanced `(`"));
    }
    if !body[start..].trim().is_empty() {
        out.push((base + start, &body[start..]));
    }
    Ok(out)
}

pub fn parse_spec(text: &str) -> Result<SpecExpr> {
    parse_at(text, 0)
}

fn parse_at(text: &str, base: usize) -> Result<SpecExpr> {
    let lead = text.len() - text.trim_start().len();
    let t = text.trim();
    let base = base + lead;
    let name_len = t.find(|c: char| !is_ident_char(c)).unwrap_or(t.len());
    if name_len == 0 {
        return Err(perr(base, "expected a map name"));
    }
    let name = &t[..name_len];
    let rest = &t[name_len..];
    let mut expr = SpecExpr { name: name.to_string(), positional: vec![], named: vec![], offset: base };
    if rest.trim().is_empty() {
        return Ok(expr);
    }
    let rest_start = base + name_len + (rest.len() - rest.trim_start().len());
    let rest = rest.trim_start();
    if !rest.starts_with('(') {
        return Err(perr(rest_start, format!("expected `(` after `{name}`")));
    }
    if !rest.ends_with(')') {
        return Err(perr(rest_start + rest.len(), "expected closing `)`"));
    }
    let body = &rest[1..rest.len() - 1];
    for (pos, arg) in split_args(body, rest_start + 1)? {
        let a = arg.trim();
        let ident_len = a.find(|c: char| !is_ident_char(c)).unwrap_or(a.len());
        let after = a[ident_len..].trim_start();
        if ident_len > 0 && after.starts_with('=') {
            expr.named.push((a[..ident_len].to_string(), after[1..].trim().to_string()));
        } else {
            expr.positional.push(parse_at(arg, pos)?);
        }
    }
    Ok(expr)
}

/// Builds a map from its spec string, e.g. `affine(v=3, w=1)` or
/// `compose(digit_twist, affine(v=p:3;u:1;d:1, w=1))`.
pub fn parse_map(text: &str, ctx: &PrecisionContext) -> Result<DynamicMap> {
    build(&parse_spec(text)?, ctx)
}

/// A map spec together with its right-inverse family, for the maps that have
/// one: `shift_zp`, `furno(w, k=)` and `thm1_qp_example`.
pub fn parse_map_with_family(text: &str, ctx: &PrecisionContext) -> Result<(DynamicMap, RightInverseFamily)> {
    let e = parse_spec(text)?;
    let map = build(&e, ctx)?;
    let family = match e.name.as_str() {
        "shift_zp" => shift_right_inverses(ctx)?,
        "thm1_qp_example" => qp_example_inverses(ctx)?,
        "furno" => {
            let w = build(&e.positional[0], ctx)?;
            let k = e.named.iter().find(|(k, _)| k == "k").map_or(Ok(1), |(_, v)| v.parse()).unwrap_or(1);
            locally_scaling_inverses(&w, k, ctx)?
        }
        other => return Err(Error::BadParams(format!("no right-inverse family is known for `{other}`"))),
    };
    Ok((map, family))
}

fn build(e: &SpecExpr, ctx: &PrecisionContext) -> Result<DynamicMap> {
    match e.name.as_str() {
        "compose" => {
            if e.positional.len() < 2 || !e.named.is_empty() {
                return Err(perr(e.offset, "compose takes two or more maps"));
            }
            let maps = e.positional.iter().map(|m| build(m, ctx)).collect::<Result<Vec<_>>>()?;
            let mut out = maps.last().unwrap().clone();
            for m in maps.iter().rev().skip(1) {
                out = m.compose(&out);
            }
            Ok(out)
        }
        "furno" => {
            let [w] = e.positional.as_slice() else {
                return Err(perr(e.offset, "furno takes one isometry and k"));
            };
            let mut k = 1;
            for (key, v) in &e.named {
                match key.as_str() {
                    "k" => k = v.parse().map_err(|_| perr(e.offset, format!("bad k `{v}`")))?,
                    _ => return Err(Error::BadParams(format!("unexpected parameter `{key}`"))),
                }
            }
            furno_compose(&build(w, ctx)?, k, ctx)
        }
        name => {
            if !e.positional.is_empty() {
                return Err(perr(e.positional[0].offset, format!("`{name}` takes only key=value parameters")));
            }
            let mut params = Params::new();
            for (k, v) in &e.named {
                params = params.set(k, v);
            }
            let mut m = builtin_map(name, &params, ctx)?;
            m.tag = super::map::MapTag { name: name.to_string(), params: e.named.clone() };
            Ok(m)
        }
    }
}

/// Builds a perturbation from e.g. `digit_local(delta=p^-2, seed=3)`,
/// `constant(c=9, delta=p^-2)`, `example2_phi_n(n=1)` or `zero`.
pub fn parse_perturbation(text: &str, ctx: &PrecisionContext) -> Result<LipschitzPerturbation> {
    parse_perturbation_seeded(text, ctx, None)
}

/// [`parse_perturbation`] with the seed replaced when `seed` is given.
pub fn parse_perturbation_seeded(text: &str, ctx: &PrecisionContext, seed: Option<u64>) -> Result<LipschitzPerturbation> {
    let e = parse_spec(text)?;
    let get = |k: &str| e.named.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    for (k, _) in &e.named {
        if !["delta", "seed", "c", "n", "center", "radius"].contains(&k.as_str()) {
            return Err(Error::BadParams(format!("unexpected parameter `{k}`")));
        }
    }
    let seed: u64 = match (seed, get("seed")) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse().map_err(|_| Error::BadParams(format!("bad seed `{s}`")))?,
        (None, None) => 0,
    };
    let delta = get("delta").map(NormValue::parse).transpose()?;
    let need_delta = || delta.ok_or_else(|| Error::BadParams("missing `delta`".into()));
    let value = |k: &str| -> Result<_> {
        super::catalog::parse_value(get(k).ok_or_else(|| Error::BadParams(format!("missing `{k}`")))?, ctx)
    };
    let (kind, delta) = match e.name.as_str() {
        "zero" => (PerturbationKind::Zero, delta.unwrap_or(NormValue::Zero)),
        "digit_local" => (PerturbationKind::DigitLocal, need_delta()?),
        "constant" => {
            let c = value("c")?;
            (PerturbationKind::Constant { c }, delta.unwrap_or(c.norm().max(ctx.resolution())))
        }
        "example2_phi_n" => {
            let n: u32 = get("n")
                .ok_or_else(|| Error::BadParams("missing `n`".into()))?
                .parse()
                .map_err(|_| Error::BadParams("bad `n`".into()))?;
            (PerturbationKind::Example2PhiN { n }, delta.unwrap_or(NormValue::Pow(n as i32 + 1)))
        }
        "indicator" => {
            let c = value("c")?;
            let center = value("center")?;
            let radius = NormValue::parse(get("radius").ok_or_else(|| Error::BadParams("missing `radius`".into()))?)?;
            (PerturbationKind::Indicator { c, center, radius }, need_delta()?)
        }
        other => return Err(Error::UnknownMap(other.to_string())),
    };
    make_lipschitz_perturbation(ctx, delta, &kind, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PAdic;

    #[test]
    fn parses_nested_specs() {
        let e = parse_spec("compose(digit_twist, affine(v=p:3;u:1;d:1, w=p:3;u:0;d:1,2))").unwrap();
        assert_eq!(e.name, "compose");
        assert_eq!(e.positional.len(), 2);
        assert_eq!(e.positional[1].named[1], ("w".to_string(), "p:3;u:0;d:1,2".to_string()));
    }

    #[test]
    fn builds_affine_from_text() {
        let ctx = PrecisionContext::zp(3, 4).unwrap();
        let f = parse_map("affine(v=p:3;u:1;d:1, w=p:3;u:0;d:1)", &ctx).unwrap();
        assert!(f.eval(&ctx.int(2)).unwrap().eq_mod(&PAdic::constant(3, 7), 4));
        assert_eq!(f.tag.to_string(), "affine(v=p:3;u:1;d:1, w=p:3;u:0;d:1)");
        let again = parse_map(&f.tag.to_string(), &ctx).unwrap();
        assert_eq!(again.tag, f.tag);
    }

    #[test]
    fn malformed_spec_reports_position() {
        match parse_spec("affine(v=3, w=1") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 15),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_spec("(x)"), Err(Error::Parse { position: 0, .. })));
    }

    #[test]
    fn perturbation_specs() {
        let ctx = PrecisionContext::zp(2, 8).unwrap();
        let phi = parse_perturbation("digit_local(delta=p^-2, seed=5)", &ctx).unwrap();
        assert_eq!(phi.delta, NormValue::Pow(2));
        let c = parse_perturbation("constant(c=4)", &ctx).unwrap();
        assert_eq!(c.delta, NormValue::Pow(2));
        assert!(parse_perturbation("bogus", &ctx).is_err());
    }
}
