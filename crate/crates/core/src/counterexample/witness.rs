use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chart::CantorChart;
use super::thm2::{build_thm2_map, transported_shift};
use crate::dynamics::{DynamicMap, RightInverseFamily};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic, PrecisionContext};
use crate::shadowing::{brute_force_shadow_by, verify_pseudo_orbit, OracleResult, PseudoOrbit};

const TAIL: usize = 96;

/// A chart, the transported shift `s` and the piecewise map `f` built from it.
#[derive(Clone, Debug)]
pub struct Thm2System {
    pub chart: Arc<CantorChart>,
    pub s: DynamicMap,
    /// `f` on `ℤ/p^(depth+2)`, so that `z` carries the chart's full depth.
    pub f: DynamicMap,
    pub family: RightInverseFamily,
}

impl Thm2System {
    pub fn new(chart: CantorChart) -> Result<Self> {
        let chart = Arc::new(chart);
        let s = transported_shift(&chart)?;
        let ctx = PrecisionContext::zp(chart.p(), chart.depth as u32 + 2)?;
        let (f, family) = build_thm2_map(&s, &ctx)?;
        Ok(Thm2System { chart, s, f, family })
    }

    /// Shadowing error of the residue ball `x` for `points` under `s`: the
    /// step-`n` term is the distance from `points[n]` to the whole image set
    /// `sⁿ(B)`, a lower bound for every point of `B`.
    pub fn s_error(&self, x: &PAdic, points: &[PAdic]) -> Result<NormValue> {
        let d = self.chart.orbit_distances(x, &points[1..])?;
        Ok(d.into_iter().fold(x.dist(&points[0]), NormValue::max))
    }

    /// Same bound for `f` on `ℤ/p^(depth+2)`.
    pub fn f_error(&self, y: &PAdic, points: &[PAdic]) -> Result<NormValue> {
        let p = self.chart.p();
        let mut err = y.dist(&points[0]);
        let mut cur = *y;
        let mut n = 1;
        while n < points.len() {
            let (a, b) = (cur.digit(0), cur.digit(1));
            if a == Some(0) {
                err = err.max(cur.dist(&points[n]));
                n += 1;
                continue;
            }
            let (Some(a), Some(b)) = (a, b) else { break };
            let z = (cur - PAdic::constant(p, i64::from(a) + i64::from(b) * i64::from(p))).shift(-2);
            if b == 0 {
                cur = z;
                err = err.max(cur.dist(&points[n]));
                n += 1;
                continue;
            }
            let mut b = b;
            let mut lows = Vec::new();
            let mut tails = Vec::new();
            for t in &points[n..] {
                b = if b == p - 1 { 1 } else { b + 1 };
                let low = PAdic::constant(p, i64::from(a) + i64::from(b) * i64::from(p));
                lows.push(low.truncate(2).dist(t));
                tails.push((*t - low).shift(-2));
            }
            let zd = self.chart.orbit_distances(&z, &tails)?;
            for (l, d) in lows.into_iter().zip(zd) {
                err = err.max(if l.is_zero() { d.scale(-2) } else { l });
            }
            break;
        }
        Ok(err)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedCheck {
    pub orbit: PseudoOrbit,
    pub epsilon: NormValue,
    pub oracle: OracleResult,
    pub shadowed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceOutcome {
    /// Length of the zero run glued between the two 1s.
    pub zeros: usize,
    pub orbit: PseudoOrbit,
    pub epsilon: NormValue,
    pub oracle: OracleResult,
    /// Whether some residue's orbit stays within `ε`.
    pub shadowed: bool,
    pub lifted: Option<LiftedCheck>,
}

fn sequence(prefix: &[u8]) -> Vec<u8> {
    let mut v = prefix.to_vec();
    v.resize(prefix.len() + TAIL, 0);
    v
}

/// Chart images of `1 0^∞` followed by the orbit of `0^r 1 0^∞`: one jump
/// from `w(0^∞)`, then exact steps back to `w(1 0^∞)`.
pub fn splice_points(chart: &CantorChart, zeros: usize) -> Result<Vec<PAdic>> {
    let d = chart.depth;
    let mut pts = vec![chart.encode(&sequence(&[1]), d)?];
    for m in 0..=zeros {
        let mut pre = vec![0u8; zeros - m];
        pre.push(1);
        pts.push(chart.encode(&sequence(&pre), d)?);
    }
    Ok(pts)
}

/// Smallest odd zero run whose splice is a `δ`-pseudo-orbit of `s`.
pub fn smallest_splice(sys: &Thm2System, delta: NormValue, max_zeros: usize) -> Result<(usize, Vec<PAdic>)> {
    for zeros in (1..=max_zeros).step_by(2) {
        let pts = splice_points(&sys.chart, zeros)?;
        if verify_pseudo_orbit(&sys.s, &pts, delta)?.ok {
            return Ok((zeros, pts));
        }
    }
    Err(Error::DepthInsufficient(format!("no splice up to {max_zeros} zeros is a {delta}-pseudo-orbit")))
}

/// `a + b_n p + x_n p²` with `b_n` running through `1, …, p−1` cyclically.
pub fn lift_orbit(points: &[PAdic], a: u32) -> Vec<PAdic> {
    let p = points[0].prime();
    points
        .iter()
        .enumerate()
        .map(|(n, x)| {
            let b = (n as u32 % (p - 1)) + 1;
            PAdic::constant(p, i64::from(a) + i64::from(b) * i64::from(p)) + x.shift(2)
        })
        .collect()
}

/// Splice pseudo-orbit of `s` and its exhaustive shadowing oracle; optionally
/// the lifted `(δp⁻²)`-pseudo-orbit of `f` against `εp⁻²`.
pub fn run_splice_pipeline(
    sys: &Thm2System,
    delta: NormValue,
    epsilon: NormValue,
    lift: bool,
) -> Result<SpliceOutcome> {
    let (zeros, pts) = smallest_splice(sys, delta, 4 * sys.chart.depth + 9)?;
    let orbit = PseudoOrbit::new(&sys.s, pts, delta)?;
    let oracle = brute_force_shadow_by(sys.s.ctx(), &orbit.points, |x| sys.s_error(x, &orbit.points).ok())?;
    let lifted = if lift {
        let ys = lift_orbit(&orbit.points, 1);
        let lorbit = PseudoOrbit::new(&sys.f, ys, delta.scale(-2))?;
        let eps_f = epsilon.scale(-2);
        let lo = brute_force_shadow_by(sys.f.ctx(), &lorbit.points, |y| sys.f_error(y, &lorbit.points).ok())?;
        Some(LiftedCheck { shadowed: lo.best_error <= eps_f, orbit: lorbit, epsilon: eps_f, oracle: lo })
    } else {
        None
    };
    Ok(SpliceOutcome { zeros, shadowed: oracle.best_error <= epsilon, orbit, epsilon, oracle, lifted })
}

/// A `δ`-pseudo-orbit that no orbit of `s` shadows within `ε` at this resolution.
pub fn demonstrate_non_shadowing(
    sys: &Thm2System,
    delta: NormValue,
    epsilon: NormValue,
    lift: bool,
) -> Result<SpliceOutcome> {
    if delta < sys.s.ctx().resolution() {
        return Err(Error::DeltaTooSmall(delta.to_string()));
    }
    let out = run_splice_pipeline(sys, delta, epsilon, lift)?;
    if out.shadowed {
        return Err(Error::NoWitnessFound(format!(
            "splice with {} zeros is shadowed to {}; try a deeper chart",
            out.zeros, out.oracle.best_error
        )));
    }
    Ok(out)
}
