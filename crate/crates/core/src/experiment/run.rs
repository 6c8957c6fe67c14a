use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::*;
use super::{Check, Tally};
use crate::analysis::{check_locally_scaling, estimate_lipschitz, expansivity_constant, image_openness, scaling_profile};
use crate::conjugacy::{
    build_conjugacy_thm1, build_conjugacy_thm3, build_inverse_conjugacy_thm1, composition_defect,
    homogeneity_homeomorphism, seeded_proper_pair, transfer_family, transfer_right_inverse, verify_conjugacy,
};
use crate::counterexample::{
    build_cantor_chart, build_even_subshift, build_full_shift, covering_count, local_variation, obstruction_scan,
    run_splice_pipeline, SplitRule, Thm2System,
};
use crate::dynamics::{
    make_lipschitz_perturbation, parse_map, parse_map_with_family, parse_perturbation_seeded, perturb,
    PerturbationKind,
};
use crate::error::{Error, Result};
use crate::padic::{NormValue, PAdic};
use crate::shadowing::{brute_force_shadow, random_pseudo_orbit, solve_shadowing};

/// Subshift word length available to the Cantor charts.
const SUBSHIFT_DEPTH: usize = 200;

type Verdicts = Vec<(&'static str, bool, String)>;

struct Case {
    record: Value,
    verdicts: Verdicts,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// A failed case still yields a record; its error becomes a failed check.
fn settle(label: Value, out: Result<Case>) -> Case {
    match out {
        Ok(mut c) => {
            c.verdicts.insert(0, ("case_completed", true, String::new()));
            c
        }
        Err(e) => Case {
            record: json!({ "case": label, "error": e.to_string() }),
            verdicts: vec![("case_completed", false, format!("{label}: {e}"))],
        },
    }
}

fn collect(cases: Vec<Case>) -> (Vec<Value>, Vec<Check>) {
    let mut tally = Tally::default();
    let mut records = Vec::with_capacity(cases.len());
    for c in cases {
        for (inv, ok, detail) in c.verdicts {
            tally.record(inv, ok, || detail);
        }
        records.push(c.record);
    }
    (records, tally.into_checks())
}

pub(super) fn dispatch(config: &ExperimentConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    match config {
        ExperimentConfig::Shadow(c) => shadow(c),
        ExperimentConfig::Conjugate(c) => conjugate(c),
        ExperimentConfig::Analyze(c) => analyze(c),
        ExperimentConfig::Counterexample(c) => counterexample(c),
        ExperimentConfig::Suite(c) => suite(c),
    }
}

fn shadow(c: &ShadowConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    let ctx = c.context.context()?;
    let (f, family) = parse_map_with_family(&c.map, &ctx)?;
    let floor = ctx.resolution().scale(f.precision_loss as i32);
    if c.delta < floor {
        return Err(Error::DeltaTooSmall(format!("{} is below resolution·p^loss = {floor}", c.delta)));
    }
    let oracle = c.oracle == OracleToggle::On && ctx.residue_count() <= c.oracle_limit;
    let cases = (0..c.seeds)
        .into_par_iter()
        .map(|i| {
            let seed = c.seed + i;
            let out = (|| {
                let orbit = random_pseudo_orbit(&f, c.delta, c.length, seed)?;
                let result = solve_shadowing(&f, &family, &orbit)?;
                let mut verdicts: Verdicts = vec![
                    ("shadowing_bound", result.bound_ok, format!("seed {seed}: ‖z‖ = {}", result.achieved_bound)),
                    ("step_identity", result.step_identity_ok, format!("seed {seed}")),
                    ("orbit_identity", result.orbit_check_ok, format!("seed {seed}")),
                ];
                let oracle_result = if oracle {
                    let o = brute_force_shadow(&f, &orbit.points)?;
                    verdicts.push((
                        "oracle_not_worse",
                        o.best_error <= result.achieved_bound,
                        format!("seed {seed}: oracle {} vs solver {}", o.best_error, result.achieved_bound),
                    ));
                    Some(o)
                } else {
                    None
                };
                Ok(Case {
                    record: json!({
                        "seed": seed,
                        "orbit": orbit,
                        "result": result,
                        "oracle": oracle_result,
                        "bound_ok": result.bound_ok,
                    }),
                    verdicts,
                })
            })();
            settle(json!(seed), out)
        })
        .collect();
    Ok(collect(cases))
}

fn conjugate(c: &ConjugateConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    let ctx = c.context.context()?;
    let seeds: Vec<u64> = (0..c.seeds).map(|i| c.seed + i).collect();
    let cases: Vec<Case> = match c.theorem {
        Theorem::One => {
            let (f, family) = parse_map_with_family(&c.map, &ctx)?;
            parse_perturbation_seeded(&c.perturbation, &ctx, Some(c.seed))?;
            seeds
                .par_iter()
                .map(|&seed| {
                    settle(
                        json!(seed),
                        (|| {
                            let phi = parse_perturbation_seeded(&c.perturbation, &ctx, Some(seed))?;
                            let g = perturb(&f, &phi);
                            let h = build_conjugacy_thm1(&f, &family, &g, c.depth)?;
                            let report = verify_conjugacy(&f, &g, &h)?;
                            let (tfam, _) = transfer_family(&f, &family, &phi)?;
                            let ht = build_inverse_conjugacy_thm1(&f, &g, &tfam, c.depth)?;
                            let report_t = verify_conjugacy(&g, &f, &ht)?;
                            let inverse = composition_defect(&ht, &h);
                            let bound = phi.delta.scale(-1);
                            Ok(Case {
                                verdicts: vec![
                                    ("conjugacy_zero_defect", report.zero_defect(), format!("seed {seed}: {}", report.max_defect)),
                                    ("conjugacy_injective", report.injective, format!("seed {seed}")),
                                    (
                                        "certified_to_depth",
                                        h.certified_exp >= c.depth as i32,
                                        format!("seed {seed}: exact mod p^{}", h.certified_exp),
                                    ),
                                    ("closeness_within_delta_over_p", h.closeness <= bound, format!("seed {seed}: {}", h.closeness)),
                                    ("inverse_conjugacy_zero_defect", report_t.zero_defect(), format!("seed {seed}")),
                                    ("inverse_composes_to_identity", inverse.is_zero(), format!("seed {seed}: {inverse}")),
                                ],
                                record: json!({
                                    "seed": seed,
                                    "perturbation": phi.map.tag.to_string(),
                                    "delta": phi.delta,
                                    "certified_exp": h.certified_exp,
                                    "closeness": h.closeness,
                                    "report": report,
                                    "inverse_report": report_t,
                                    "inverse_defect": inverse,
                                }),
                            })
                        })(),
                    )
                })
                .collect()
        }
        Theorem::Three => {
            let r = parse_map(&c.map, &ctx)?;
            parse_perturbation_seeded(&c.perturbation, &ctx, Some(c.seed))?;
            seeds
                .par_iter()
                .map(|&seed| {
                    settle(
                        json!(seed),
                        (|| {
                            let phi = parse_perturbation_seeded(&c.perturbation, &ctx, Some(seed))?;
                            let b = build_conjugacy_thm3(&r, &phi, c.depth, c.window)?;
                            let report = verify_conjugacy(&r, &b.t, &b.h)?;
                            let mut verdicts: Verdicts = vec![
                                ("conjugacy_zero_defect", report.zero_defect(), format!("seed {seed}: {}", report.max_defect)),
                                ("conjugacy_injective", report.injective, format!("seed {seed}")),
                                ("closeness_within_delta", b.h.closeness <= phi.delta, format!("seed {seed}: {}", b.h.closeness)),
                            ];
                            if let Some(ok) = b.fixed_points_match {
                                verdicts.push(("fixed_points_match", ok, format!("seed {seed}")));
                            }
                            Ok(Case {
                                verdicts,
                                record: json!({
                                    "seed": seed,
                                    "perturbation": phi.map.tag.to_string(),
                                    "delta": phi.delta,
                                    "c1": b.c1,
                                    "c2": b.c2,
                                    "rho": b.rho,
                                    "error_budget": b.error_budget,
                                    "window_used": b.window_used,
                                    "fixed_r": b.fixed_r,
                                    "fixed_t": b.fixed_t,
                                    "closeness": b.h.closeness,
                                    "report": report,
                                }),
                            })
                        })(),
                    )
                })
                .collect()
        }
        Theorem::Lemma51 => {
            let (f, family) = parse_map_with_family(&c.map, &ctx)?;
            parse_perturbation_seeded(&c.perturbation, &ctx, Some(c.seed))?;
            seeds
                .iter()
                .map(|&seed| {
                    settle(
                        json!(seed),
                        (|| {
                            let phi = parse_perturbation_seeded(&c.perturbation, &ctx, Some(seed))?;
                            let mut verdicts = Verdicts::new();
                            let mut members = Vec::new();
                            for (r, label) in family.members.iter().zip(&family.labels) {
                                let t = transfer_right_inverse(&f, r, &phi)?;
                                let at = format!("seed {seed}, {label}");
                                verdicts.push(("transfer_right_inverse", t.right_inverse_ok, at.clone()));
                                verdicts.push(("transfer_image_equal", t.image_equal, at.clone()));
                                verdicts.push(("transfer_lip_bound", t.lip_within_bound(), at));
                                members.push(json!({
                                    "label": label,
                                    "lip": r.lip_upper,
                                    "lip_bound": t.lip_bound.to_string(),
                                    "lip_measured": t.lip_measured,
                                    "right_inverse_ok": t.right_inverse_ok,
                                    "image_equal": t.image_equal,
                                }));
                            }
                            Ok(Case {
                                verdicts,
                                record: json!({ "seed": seed, "delta": phi.delta, "members": members }),
                            })
                        })(),
                    )
                })
                .collect()
        }
        Theorem::Homogeneity => {
            let three = Ratio::from_integer(3) * c.delta.to_ratio(ctx.prime);
            seeds
                .par_iter()
                .map(|&seed| {
                    settle(
                        json!(seed),
                        (|| {
                            let (ys, zs) = seeded_proper_pair(&ctx, c.points, c.delta, seed)?;
                            let phi = homogeneity_homeomorphism(&ys, &zs, c.delta, &ctx)?;
                            let hits = ys
                                .iter()
                                .zip(&zs)
                                .all(|(y, z)| phi.apply(y).is_ok_and(|v| v.eq_mod(z, ctx.cap())));
                            Ok(Case {
                                verdicts: vec![
                                    ("homogeneity_bijective", phi.is_injective(), format!("seed {seed}")),
                                    ("homogeneity_interpolates", hits, format!("seed {seed}")),
                                    (
                                        "homogeneity_within_3delta",
                                        phi.closeness.to_ratio(ctx.prime) < three,
                                        format!("seed {seed}: {}", phi.closeness),
                                    ),
                                ],
                                record: json!({ "seed": seed, "ys": ys, "zs": zs, "closeness": phi.closeness }),
                            })
                        })(),
                    )
                })
                .collect()
        }
    };
    Ok(collect(cases))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum AnalysisCheck {
    Lip,
    Scaling,
    Open,
    Expansive,
    LocallyScaling { k: i32, m: i32 },
}

/// Parses `lip,scaling,open,expansive,locally-scaling:k[:m]`.
pub fn parse_checks(text: &str) -> Result<Vec<AnalysisCheck>> {
    let mut out = Vec::new();
    let mut pos = 0;
    for item in text.split(',') {
        let t = item.trim();
        let bad = |msg: String| Error::Parse { position: pos, message: msg };
        let check = match t {
            "lip" => AnalysisCheck::Lip,
            "scaling" => AnalysisCheck::Scaling,
            "open" => AnalysisCheck::Open,
            "expansive" => AnalysisCheck::Expansive,
            _ => {
                let Some(rest) = t.strip_prefix("locally-scaling:") else {
                    return Err(bad(format!("unknown check `{t}`")));
                };
                let nums: Vec<&str> = rest.split(':').collect();
                let parse = |s: &str| s.parse::<i32>().map_err(|_| bad(format!("bad integer `{s}`")));
                match nums.as_slice() {
                    [k] => {
                        let k = parse(k)?;
                        AnalysisCheck::LocallyScaling { k, m: k }
                    }
                    [k, m] => AnalysisCheck::LocallyScaling { k: parse(k)?, m: parse(m)? },
                    _ => return Err(bad(format!("expected locally-scaling:k[:m], got `{t}`"))),
                }
            }
        };
        out.push(check);
        pos += item.len() + 1;
    }
    Ok(out)
}

fn analyze(c: &AnalyzeConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    let ctx = c.context.context()?;
    let f = parse_map(&c.map, &ctx)?;
    let checks = parse_checks(&c.checks)?;
    let horizon = c.horizon.unwrap_or(ctx.digit_budget as usize);
    let cases = checks
        .iter()
        .map(|check| {
            settle(
                to_json(check),
                (|| {
                    let (result, verdicts) = match *check {
                        AnalysisCheck::Lip => (to_json(&estimate_lipschitz(&f)?), vec![]),
                        AnalysisCheck::Scaling => (to_json(&scaling_profile(&f)?), vec![]),
                        AnalysisCheck::Open => (json!({ "rho": image_openness(&f)? }), vec![]),
                        AnalysisCheck::Expansive => (to_json(&expansivity_constant(&f, horizon)?), vec![]),
                        AnalysisCheck::LocallyScaling { k, m } => {
                            let s = check_locally_scaling(&f, k, m)?;
                            let v = vec![("locally_scaling", s.holds, format!("k = {k}, m = {m}: {:?}", s.witness))];
                            (to_json(&s), v)
                        }
                    };
                    Ok(Case { record: json!({ "check": check, "map": f.tag.to_string(), "result": result }), verdicts })
                })(),
            )
        })
        .collect();
    Ok(collect(cases))
}

fn counterexample(c: &CounterexampleConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    let p = c.p;
    if p < 3 {
        return Err(Error::BadParams("the counterexample needs an odd prime p ≥ 3".into()));
    }
    let chart = |x| build_cantor_chart(&x, c.depth, SplitRule::Balanced);
    let even = Thm2System::new(chart(build_even_subshift(p, SUBSHIFT_DEPTH)?)?)?;
    let full = Thm2System::new(chart(build_full_shift(p, SUBSHIFT_DEPTH)?)?)?;
    if c.delta < even.s.ctx().resolution() {
        return Err(Error::DeltaTooSmall(format!("{} is below the chart resolution", c.delta)));
    }
    let lift = !c.no_lift;
    let mut cases = Vec::new();

    cases.push(settle(
        json!("witness"),
        (|| {
            let out = run_splice_pipeline(&even, c.delta, c.epsilon, lift)?;
            let mut verdicts: Verdicts = vec![(
                "non_shadowing_witness",
                !out.shadowed,
                format!("best error {} ≤ ε = {}", out.oracle.best_error, c.epsilon),
            )];
            if let Some(l) = &out.lifted {
                verdicts.push(("lifted_non_shadowing", !l.shadowed, format!("lifted best error {}", l.oracle.best_error)));
            }
            Ok(Case { record: json!({ "case": "witness", "subshift": "even", "outcome": out }), verdicts })
        })(),
    ));
    cases.push(settle(
        json!("sft_control"),
        (|| {
            let out = run_splice_pipeline(&full, c.delta, c.epsilon, lift)?;
            let mut verdicts: Verdicts = vec![(
                "sft_control_shadowed",
                out.shadowed,
                format!("best error {} > ε = {}", out.oracle.best_error, c.epsilon),
            )];
            if let Some(l) = &out.lifted {
                verdicts.push(("lifted_control_shadowed", l.shadowed, format!("lifted best error {}", l.oracle.best_error)));
            }
            Ok(Case { record: json!({ "case": "sft_control", "subshift": "full", "outcome": out }), verdicts })
        })(),
    ));
    cases.push(settle(
        json!("right_inverses"),
        (|| {
            let failure = even.family.right_inverse_failure(&even.f)?;
            let count = covering_count(&even.family)?;
            let expected = u64::from(p - 1) * u64::from(p).pow(c.depth as u32);
            Ok(Case {
                verdicts: vec![
                    ("right_inverse_identity", failure.is_none(), format!("{failure:?}")),
                    (
                        "covering_fails",
                        !count.covering && count.image_residues == expected,
                        format!("{} of {} residues covered", count.image_residues, count.total_residues),
                    ),
                    ("chart_refinement", even.chart.refinement_ok(), String::new()),
                ],
                record: json!({
                    "case": "right_inverses",
                    "labels": even.family.labels,
                    "right_inverse_failure": failure.map(|(i, x)| json!({ "member": i, "residue": x })),
                    "covering": count,
                }),
            })
        })(),
    ));
    cases.push(settle(
        json!("nowhere_locally_constant"),
        (|| {
            let ctx = *even.f.ctx();
            let mut rng = ChaCha8Rng::seed_from_u64(0x10c);
            let (mut checked, mut worst) = (0, None::<(PAdic, Option<i32>)>);
            while checked < 100 {
                let x = ctx.residue(rng.gen_range(0..ctx.residue_count()));
                if x.digit(0) == Some(0) || x.digit(1) == Some(0) {
                    continue;
                }
                let k = local_variation(&even.f, &x)?;
                if worst.is_none() && !k.is_some_and(|k| k >= 2) {
                    worst = Some((x, k));
                }
                checked += 1;
            }
            Ok(Case {
                verdicts: vec![("nowhere_locally_constant", worst.is_none(), format!("{worst:?}"))],
                record: json!({ "case": "nowhere_locally_constant", "samples": checked }),
            })
        })(),
    ));
    cases.push(settle(
        json!("obstruction"),
        (|| {
            let ctx = *even.f.ctx();
            let kind = PerturbationKind::Indicator {
                c: PAdic::constant(p, i64::from(p * p)),
                center: PAdic::constant(p, 0),
                radius: NormValue::Pow(1),
            };
            let phi = make_lipschitz_perturbation(&ctx, NormValue::Pow(2), &kind, 0)?;
            let report = obstruction_scan(&even.f, &phi)?;
            Ok(Case {
                verdicts: vec![
                    ("no_fixed_point_in_ball", report.fixed_in_ball == 0, format!("{} fixed", report.fixed_in_ball)),
                    ("fixed_set_not_open", !report.fixed_set_open, String::new()),
                ],
                record: json!({ "case": "obstruction", "perturbation": phi.map.tag.to_string(), "report": report }),
            })
        })(),
    ));
    Ok(collect(cases))
}

fn battery(c: &SuiteConfig) -> Vec<(String, ExperimentConfig)> {
    let s = c.seed;
    let n = if c.quick { 8 } else { 10 };
    let primes: &[u32] = if c.quick { &[2, 3] } else { &[2, 3, 5] };
    let mut out = Vec::new();
    for &p in primes {
        out.push((
            format!("shadow.shift.p{p}"),
            ExperimentConfig::Shadow(ShadowConfig {
                context: ContextArgs::zp(p, n),
                seeds: 20,
                seed: s,
                ..ShadowConfig::default()
            }),
        ));
        out.push((
            format!("analyze.shift.p{p}"),
            ExperimentConfig::Analyze(AnalyzeConfig {
                context: ContextArgs::zp(p, n.min(8)),
                checks: "lip,scaling,open,expansive,locally-scaling:1".into(),
                ..AnalyzeConfig::default()
            }),
        ));
        out.push((
            format!("conjugate.thm1.p{p}"),
            ExperimentConfig::Conjugate(ConjugateConfig {
                context: ContextArgs::zp(p, n),
                seeds: 5,
                seed: s,
                ..ConjugateConfig::default()
            }),
        ));
        out.push((
            format!("conjugate.lemma51.p{p}"),
            ExperimentConfig::Conjugate(ConjugateConfig {
                context: ContextArgs::zp(p, n.min(8)),
                theorem: Theorem::Lemma51,
                seeds: 3,
                seed: s,
                ..ConjugateConfig::default()
            }),
        ));
        out.push((
            format!("conjugate.homogeneity.p{p}"),
            ExperimentConfig::Conjugate(ConjugateConfig {
                context: ContextArgs::zp(p, n),
                theorem: Theorem::Homogeneity,
                seeds: 10,
                seed: s,
                ..ConjugateConfig::default()
            }),
        ));
    }
    out.push((
        "shadow.furno.p2".into(),
        ExperimentConfig::Shadow(ShadowConfig {
            context: ContextArgs::zp(2, 8),
            map: "furno(digit_twist, k=2)".into(),
            seed: s,
            ..ShadowConfig::default()
        }),
    ));
    out.push((
        "analyze.furno.p2".into(),
        ExperimentConfig::Analyze(AnalyzeConfig {
            context: ContextArgs::zp(2, 8),
            map: "furno(digit_twist, k=2)".into(),
            checks: "locally-scaling:2".into(),
            horizon: None,
        }),
    ));
    for (p, n, map) in [(2, 8, "affine(v=2, w=1)"), (3, 6, "affine(v=3, w=1)"), (3, 6, "compose(digit_twist, affine(v=3, w=1))")] {
        out.push((
            format!("conjugate.thm3.p{p}.{}", if map.starts_with("compose") { "twist" } else { "affine" }),
            ExperimentConfig::Conjugate(ConjugateConfig {
                context: ContextArgs::zp(p, n),
                theorem: Theorem::Three,
                map: map.into(),
                perturbation: "digit_local(delta=p^-3)".into(),
                depth: 8,
                window: 12,
                seeds: 5,
                seed: s,
                ..ConjugateConfig::default()
            }),
        ));
    }
    out.push((
        "counterexample.p3".into(),
        ExperimentConfig::Counterexample(if c.quick {
            CounterexampleConfig { depth: 7, delta: NormValue::Pow(5), ..CounterexampleConfig::default() }
        } else {
            CounterexampleConfig::default()
        }),
    ));
    out
}

fn suite(c: &SuiteConfig) -> Result<(Vec<Value>, Vec<Check>)> {
    let mut tally = Tally::default();
    let mut records = Vec::new();
    for (label, config) in battery(c) {
        let (cases, summary) = dispatch(&config)?;
        tally.absorb(&label, &summary);
        records.push(json!({
            "label": label,
            "config": config,
            "cases": cases.len(),
            "summary": summary,
            "passed": summary.iter().all(|c| c.passed),
        }));
    }
    Ok((records, tally.into_checks()))
}
