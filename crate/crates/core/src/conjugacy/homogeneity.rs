use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConjugacyMap, Direction};
use crate::error::{Error, Result};
use crate::padic::{pow_u64, NormValue, PAdic, PrecisionContext};

/// Residue bijection `φ` with `φ(y_n) = z_n` and `‖φ − id‖_∞ < δ`.
///
/// `y_n ↦ z_n` is completed to a permutation `π` of `{y_n} ∪ {z_n}` by sending
/// each chain end back to its chain start; `φ` then translates the ball of
/// radius `r` around each point `s` onto the ball around `π(s)`, with `r`
/// small enough that these balls are disjoint.
pub fn homogeneity_homeomorphism(
    ys: &[PAdic],
    zs: &[PAdic],
    delta: NormValue,
    ctx: &PrecisionContext,
) -> Result<ConjugacyMap> {
    if ys.len() != zs.len() {
        return Err(Error::BadParams("sequences differ in length".into()));
    }
    let key = |x: &PAdic| {
        ctx.check_window(x)?;
        ctx.index_padded(x).ok_or_else(|| Error::WindowViolation(x.to_string()))
    };
    let yi: Vec<u64> = ys.iter().map(key).collect::<Result<_>>()?;
    let zi: Vec<u64> = zs.iter().map(key).collect::<Result<_>>()?;
    for (name, seq) in [("y", &yi), ("z", &zi)] {
        let mut s = seq.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotProper(format!("repeated {name} entry")));
        }
    }
    for (n, (y, z)) in yi.iter().zip(&zi).enumerate() {
        if ctx.residue(*y).dist(&ctx.residue(*z)) >= delta {
            return Err(Error::NotClose(format!("‖y_{n} − z_{n}‖ is not below {delta}")));
        }
    }

    let mut points: Vec<u64> = yi.iter().chain(&zi).copied().collect();
    points.sort_unstable();
    points.dedup();
    let mut pi: std::collections::BTreeMap<u64, u64> = yi.iter().copied().zip(zi.iter().copied()).collect();
    let starts: Vec<u64> = yi.iter().copied().filter(|y| !zi.contains(y)).collect();
    for start in starts {
        let mut end = start;
        while let Some(&next) = pi.get(&end) {
            end = next;
        }
        pi.insert(end, start);
    }

    let sep = points
        .iter()
        .enumerate()
        .flat_map(|(a, &s)| points[a + 1..].iter().map(move |&t| (s, t)))
        .map(|(s, t)| ctx.residue(s).dist(&ctx.residue(t)).exponent().unwrap_or(ctx.cap()))
        .max()
        .unwrap_or(ctx.floor());
    let radius_exp = (sep + 1).min(ctx.cap());

    let table = ctx
        .residues()?
        .map(|x| {
            for &s in &points {
                let sx = ctx.residue(s);
                if (x - sx).truncate(radius_exp).is_zero() {
                    let target = ctx.residue(pi[&s]);
                    return (target + (x - sx)).truncate(ctx.cap());
                }
            }
            x
        })
        .collect();
    ConjugacyMap::from_table(*ctx, table, ctx.cap(), 0, Direction::Homogeneity)
}

/// Seeded proper sequences `(y_n)`, `(z_n)` of length `k` with `‖y_n − z_n‖ < δ`.
pub fn seeded_proper_pair(
    ctx: &PrecisionContext,
    k: usize,
    delta: NormValue,
    seed: u64,
) -> Result<(Vec<PAdic>, Vec<PAdic>)> {
    let Some(e) = delta.exponent() else {
        return Err(Error::BadParams("δ must be positive".into()));
    };
    let from = (e + 1).max(ctx.floor());
    if from >= ctx.cap() || u128::from(ctx.residue_count()) < 2 * k as u128 {
        return Err(Error::DeltaTooSmall(format!("no room for {k} proper pairs closer than {delta}")));
    }
    let span = pow_u64(ctx.prime, (ctx.cap() - from) as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ys, mut zs) = (Vec::with_capacity(k), Vec::with_capacity(k));
    let mut used = HashSet::new();
    let mut tries = 0;
    while ys.len() < k {
        tries += 1;
        if tries > 1000 * k {
            return Err(Error::NotProper(format!("could not draw {k} distinct pairs")));
        }
        let yi = rng.gen_range(0..ctx.residue_count());
        let y = ctx.residue(yi);
        let off = PAdic::from_index(ctx.prime, from, ctx.cap(), rng.gen_range(1..span));
        let z = (y + off).truncate(ctx.cap());
        let Some(zi) = ctx.index_of(&z) else { continue };
        if used.contains(&(0, yi)) || used.contains(&(1, zi)) {
            continue;
        }
        used.insert((0, yi));
        used.insert((1, zi));
        ys.push(y);
        zs.push(z);
    }
    Ok((ys, zs))
}
