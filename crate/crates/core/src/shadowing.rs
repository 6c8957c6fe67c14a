//! Pseudo-orbits, the backward-recursion shadowing solver and its brute-force oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicMap, RightInverseFamily};
use crate::error::{Error, Result};
use crate::padic::{pow_u64, NormValue, PAdic, PrecisionContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbit {
    pub points: Vec<PAdic>,
    pub delta: NormValue,
    pub map_tag: String,
}

impl PseudoOrbit {
    /// Checks `‖f(x_n) − x_{n+1}‖ ≤ δ` before wrapping the points.
    pub fn new(f: &DynamicMap, points: Vec<PAdic>, delta: NormValue) -> Result<Self> {
        let check = verify_pseudo_orbit(f, &points, delta)?;
        if let Some(n) = check.first_failure {
            return Err(Error::BadParams(format!("not a {delta}-pseudo-orbit: step {n} fails")));
        }
        Ok(PseudoOrbit { points, delta, map_tag: f.tag.to_string() })
    }

    /// Number of steps `L` (there are `L + 1` points).
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub ok: bool,
    pub first_failure: Option<usize>,
    /// Largest step error seen.
    pub max_step: NormValue,
}

pub fn verify_pseudo_orbit(f: &DynamicMap, points: &[PAdic], delta: NormValue) -> Result<OrbitCheck> {
    let mut first_failure = None;
    let mut max_step = NormValue::Zero;
    for (n, w) in points.windows(2).enumerate() {
        let step = f.eval(&w[0])?.dist(&w[1]);
        max_step = max_step.max(step);
        if step > delta && first_failure.is_none() {
            first_failure = Some(n);
        }
    }
    Ok(OrbitCheck { ok: first_failure.is_none(), first_failure, max_step })
}

fn random_below(rng: &mut ChaCha8Rng, ctx: &PrecisionContext, from: i32) -> PAdic {
    let from = from.max(ctx.floor());
    if from >= ctx.cap() {
        return PAdic::zero(ctx.prime, ctx.cap());
    }
    let span = pow_u64(ctx.prime, (ctx.cap() - from) as u32);
    PAdic::from_index(ctx.prime, from, ctx.cap(), rng.gen_range(0..span))
}

/// `x_{n+1} = f(x_n) + e_n` with seeded noise `‖e_n‖ ≤ δ` (ChaCha8 stream).
///
/// Digits of `f(x_n)` lost to precision are refilled with noise too, which
/// stays inside the δ budget by the precondition on δ.
pub fn random_pseudo_orbit(f: &DynamicMap, delta: NormValue, length: usize, seed: u64) -> Result<PseudoOrbit> {
    let ctx = *f.ctx();
    let floor_delta = ctx.resolution().scale(f.precision_loss as i32);
    if !delta.is_zero() && delta < floor_delta {
        return Err(Error::DeltaTooSmall(format!("{delta} is below resolution·p^loss = {floor_delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![random_below(&mut rng, &ctx, ctx.floor())];
    for _ in 0..length {
        let y = f.eval(points.last().unwrap())?;
        let mut next = y.truncate(ctx.cap());
        if next.prec() < ctx.cap() {
            let fill = if delta.is_zero() {
                PAdic::zero(ctx.prime, ctx.cap())
            } else {
                random_below(&mut rng, &ctx, next.prec())
            };
            next = PAdic::from_index(ctx.prime, ctx.floor(), ctx.cap(), ctx.index_padded(&next).unwrap_or(0)) + fill;
        }
        if let Some(k) = delta.exponent() {
            next = next + random_below(&mut rng, &ctx, k);
        }
        points.push(next.truncate(ctx.cap()));
    }
    PseudoOrbit::new(f, points, delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowingResult {
    pub start_point: PAdic,
    pub correction: Vec<PAdic>,
    pub achieved_bound: NormValue,
    pub indices_used: Vec<usize>,
    /// `achieved_bound ≤ δ/p`.
    pub bound_ok: bool,
    /// `f(x_n + z_n) = x_{n+1} + z_{n+1}` at certified precision for every step.
    pub step_identity_ok: bool,
    /// Largest `n` for which `fⁿ(x) = x_n + z_n` was checked directly.
    pub orbit_check_horizon: usize,
    pub orbit_check_ok: bool,
    /// Exponent `e` such that step identities hold modulo `p^e`.
    pub certified_exp: i32,
}

/// Backward solver: `z_L = 0`, `z_n = R_{i_n}(x_{n+1} + z_{n+1}) − x_n`.
pub fn solve_shadowing(
    f: &DynamicMap,
    family: &RightInverseFamily,
    orbit: &PseudoOrbit,
) -> Result<ShadowingResult> {
    let ctx = *f.ctx();
    let loss = f.precision_loss as i32;
    let certified_exp = ctx.cap() - loss;
    if certified_exp - ctx.floor() < 2 {
        return Err(Error::PrecisionExhausted(format!(
            "only {} certified digits per step",
            certified_exp - ctx.floor()
        )));
    }
    if !family.covering {
        return Err(Error::CoveringViolation("family does not cover the space".into()));
    }
    let xs = &orbit.points;
    let len = orbit.steps();
    let mut indices = Vec::with_capacity(len);
    for (n, x) in xs.iter().take(len).enumerate() {
        let i = family
            .membership(x)
            .ok_or_else(|| Error::CoveringViolation(format!("no member image contains x_{n} = {x}")))?;
        indices.push(i);
    }
    let mut z = vec![PAdic::zero(ctx.prime, ctx.cap()); len + 1];
    for n in (0..len).rev() {
        let r = &family.members[indices[n]];
        z[n] = (r.eval(&(xs[n + 1] + z[n + 1]))? - xs[n]).truncate(ctx.cap());
    }
    let achieved_bound = z.iter().map(PAdic::norm).max().unwrap_or(NormValue::Zero);
    let shadow: Vec<PAdic> = xs.iter().zip(&z).map(|(x, z)| (*x + *z).truncate(ctx.cap())).collect();

    let mut step_identity_ok = true;
    for n in 0..len {
        let y = f.eval(&shadow[n])?;
        if y.prec() < certified_exp || !y.eq_mod(&shadow[n + 1], certified_exp) {
            step_identity_ok = false;
        }
    }

    let mut orbit_check_ok = true;
    let mut horizon = 0;
    let mut cur = shadow[0];
    for (n, target) in shadow.iter().enumerate().skip(1) {
        cur = f.eval(&cur)?;
        if cur.prec() - ctx.floor() < 1 {
            break;
        }
        horizon = n;
        if !cur.agrees(target) {
            orbit_check_ok = false;
        }
    }

    Ok(ShadowingResult {
        start_point: shadow[0],
        correction: z,
        bound_ok: achieved_bound <= orbit.delta.scale(-1),
        achieved_bound,
        indices_used: indices,
        step_identity_ok,
        orbit_check_horizon: horizon,
        orbit_check_ok,
        certified_exp,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_point: PAdic,
    pub best_error: NormValue,
    /// Residues attaining `best_error`.
    pub minimizers: u64,
}

/// `max_n ‖x_n − fⁿ(x)‖`, comparing only certified digits (unresolved counts as 0).
pub fn shadow_error(f: &DynamicMap, points: &[PAdic], x: &PAdic) -> Option<NormValue> {
    let mut err = points.first()?.dist(x);
    let mut cur = *x;
    for target in &points[1..] {
        cur = f.eval(&cur).ok()?;
        err = err.max(target.dist(&cur));
    }
    Some(err)
}

/// Exhaustive minimization of the shadowing error over all residues.
///
/// Residues whose orbit leaves the window are skipped. Ties go to the
/// smallest residue index.
pub fn brute_force_shadow(f: &DynamicMap, points: &[PAdic]) -> Result<OracleResult> {
    brute_force_shadow_by(f.ctx(), points, |x| shadow_error(f, points, x))
}

/// [`brute_force_shadow`] with a caller-supplied error for each residue.
pub fn brute_force_shadow_by<E>(ctx: &PrecisionContext, points: &[PAdic], error: E) -> Result<OracleResult>
where
    E: Fn(&PAdic) -> Option<NormValue> + Sync,
{
    let ctx = *ctx;
    if points.is_empty() {
        return Err(Error::BadParams("empty pseudo-orbit".into()));
    }
    ctx.check_budget(u128::from(ctx.residue_count()))?;
    let best = (0..ctx.residue_count())
        .into_par_iter()
        .filter_map(|i| error(&ctx.residue(i)).map(|e| (e, i)))
        .fold(
            || (None::<(NormValue, u64)>, 0u64),
            |(best, count), (e, i)| match best {
                None => (Some((e, i)), 1),
                Some((b, _)) if e < b => (Some((e, i)), 1),
                Some((b, j)) if e == b => (Some((b, j.min(i))), count + 1),
                keep => (keep, count),
            },
        )
        .reduce(
            || (None, 0),
            |a, b| match (a.0, b.0) {
                (None, _) => b,
                (_, None) => a,
                (Some((ea, ia)), Some((eb, ib))) => {
                    if ea < eb {
                        a
                    } else if eb < ea {
                        b
                    } else {
                        (Some((ea, ia.min(ib))), a.1 + b.1)
                    }
                }
            },
        );
    let (Some((best_error, i)), minimizers) = best else {
        return Err(Error::NoWitnessFound("every residue leaves the window".into()));
    };
    Ok(OracleResult { best_point: ctx.residue(i), best_error, minimizers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::catalog::shift_zp;
    use crate::dynamics::shift_right_inverses;

    #[test]
    fn hand_built_orbit() {
        let ctx = PrecisionContext::zp(2, 8).unwrap();
        let s = shift_zp(ctx);
        let pts: Vec<PAdic> = [0, 4, 2, 1, 0].iter().map(|&v| ctx.int(v)).collect();
        let orbit = PseudoOrbit::new(&s, pts.clone(), NormValue::Pow(2)).unwrap();
        let fam = shift_right_inverses(&ctx).unwrap();
        let res = solve_shadowing(&s, &fam, &orbit).unwrap();
        assert!(res.achieved_bound <= NormValue::Pow(3));
        assert!(res.bound_ok && res.step_identity_ok && res.orbit_check_ok);
        let oracle = brute_force_shadow(&s, &pts).unwrap();
        assert!(oracle.best_error <= res.achieved_bound);
        assert_eq!(shadow_error(&s, &pts, &res.start_point), Some(res.achieved_bound));
    }

    #[test]
    fn bad_orbit_detected() {
        let ctx = PrecisionContext::zp(2, 8).unwrap();
        let s = shift_zp(ctx);
        let check = verify_pseudo_orbit(&s, &[ctx.int(0), ctx.int(1)], NormValue::Pow(2)).unwrap();
        assert_eq!(check.first_failure, Some(0));
    }

    #[test]
    fn zero_noise_gives_true_orbit() {
        let ctx = PrecisionContext::zp(3, 8).unwrap();
        let s = shift_zp(ctx);
        let orbit = random_pseudo_orbit(&s, NormValue::Zero, 5, 11).unwrap();
        let fam = shift_right_inverses(&ctx).unwrap();
        let res = solve_shadowing(&s, &fam, &orbit).unwrap();
        assert_eq!(res.achieved_bound, NormValue::Zero);
        assert_eq!(res.start_point, orbit.points[0]);
    }
}
