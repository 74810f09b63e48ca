//! Acceptance run over the bundled case study and random small instances.
//! Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgm_cli::commands::{check_pairs, reproduce, BundledData, PairsDoc, Reproduction};
use rgm_cli::tradeoff_file::read_json;
use rgm_core::batch::{max_rgm_all, Execution};
use rgm_core::data::{index_sets, Dataset, Dmu};
use rgm_core::diagnostics::{
    self, additive_scores, strong_efficient_set, Feasibility, EFFICIENCY_TOL,
};
use rgm_core::lp::Settings;
use rgm_core::measures::{self, MaxRgmResult, Side};
use rgm_core::oracle::{enumerate_facets, phi_natural, theta_natural, OracleError};
use rgm_core::pps::{self, PpsError};
use rgm_core::technology::{Technology, TradeoffSpec};

const SCORE_TOL: f64 = 1e-3;
const TARGET_TOL: f64 = 0.1;
const MULTIPLIER_TOL: f64 = 1e-5;
const FREE_LUNCH_TOL: f64 = 1e-4;
const ORACLE_TOL: f64 = 1e-7;
const INVARIANCE_TOL: f64 = 1e-9;
const RUNTIME_LIMIT: Duration = Duration::from_secs(120);

const V_STAR: [f64; 3] = [0.00003, 0.00006, 0.00777];
const U_STAR: [f64; 3] = [0.57774, 0.14589, 0.10255];
const FREE_LUNCH: f64 = 29.84183;
const EFFICIENT_SET: [usize; 30] = [
    1, 2, 3, 4, 5, 6, 7, 8, 11, 13, 14, 17, 20, 21, 23, 32, 33, 44, 57, 62, 63, 66, 68, 69, 72, 73,
    75, 79, 81, 85,
];

struct Verdict {
    name: &'static str,
    failures: Vec<String>,
    detail: String,
}

impl Verdict {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
            detail: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn print(&self) -> bool {
        let passed = self.failures.is_empty();
        let status = if passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<34} {}", self.name, self.detail);
        for f in self.failures.iter().take(20) {
            println!("        {f}");
        }
        if self.failures.len() > 20 {
            println!("        ... {} more", self.failures.len() - 20);
        }
        passed
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) * 8.0) as i64;
    lo + rng.gen_range(0..=steps) as f64 / 8.0
}

/// Random instance small enough for exact facet enumeration. Trade-off
/// directions are priced positively so the multiplier system is non-empty.
fn tiny_technology(rng: &mut ChaCha8Rng, with_tradeoffs: bool) -> Technology {
    let (m, s, n) = (
        rng.gen_range(1..=2),
        rng.gen_range(1..=2),
        rng.gen_range(1..=5),
    );
    let dmus = (0..n)
        .map(|k| Dmu {
            id: k + 1,
            name: format!("d{}", k + 1),
            x: (0..m).map(|_| grid(rng, 0.5, 4.0)).collect(),
            y: (0..s).map(|_| grid(rng, 0.5, 4.0)).collect(),
        })
        .collect();
    let labels = |p: &str, k: usize| (0..k).map(|i| format!("{p}_{i}")).collect();
    let ds = Dataset::new(labels("x", m), labels("y", s), dmus).unwrap();
    if !with_tradeoffs {
        return Technology::vrs(ds);
    }
    let pv: Vec<f64> = (0..m).map(|_| grid(rng, 0.25, 2.0)).collect();
    let pu: Vec<f64> = (0..s).map(|_| grid(rng, 0.25, 2.0)).collect();
    let k = rng.gen_range(1..=(8 - n).min(4));
    let mut spec = TradeoffSpec::empty();
    while spec.len() < k {
        let mut rm: Vec<f64> = (0..m).map(|_| grid(rng, -2.0, 2.0)).collect();
        let mut rp: Vec<f64> = (0..s).map(|_| grid(rng, -2.0, 2.0)).collect();
        let value: f64 = rm.iter().zip(&pv).map(|(a, b)| a * b).sum::<f64>()
            - rp.iter().zip(&pu).map(|(a, b)| a * b).sum::<f64>();
        if value == 0.0 {
            continue;
        }
        if value < 0.0 {
            rm.iter_mut().chain(rp.iter_mut()).for_each(|c| *c = -*c);
        }
        spec.push(None, rm, rp);
    }
    Technology::vrs_to(ds, spec).unwrap()
}

fn positive_tiny_instances(seed: u64, count: usize) -> Vec<Technology> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let tech = tiny_technology(&mut rng, true);
        if diagnostics::facet_positivity_check(&tech).unwrap().passed {
            out.push(tech);
        }
    }
    out
}

fn target_of(ds: &Dataset, r: &MaxRgmResult) -> Option<(String, f64)> {
    r.coordinate.map(|k| match r.side {
        Side::Input => (ds.input_labels()[k].clone(), r.target_x[k]),
        _ => (ds.output_labels()[k].clone(), r.target_y[k]),
    })
}

fn score_reproduction(rep: &Reproduction, elapsed: Duration) -> Verdict {
    let mut v = Verdict::new("max RGM scores");
    for (exp, got) in rep.expected.iter().zip(&rep.max_rgm) {
        v.check((got.score - exp.score_maxrgm).abs() <= SCORE_TOL, || {
            format!(
                "DMU {}: {:.6} vs {:.3}",
                exp.dmu, got.score, exp.score_maxrgm
            )
        });
    }
    for id in [1, 4, 7] {
        let got = &rep.max_rgm[id - 1];
        v.check(got.side == Side::Efficient && got.score == 1.0, || {
            format!("DMU {id} is not efficient")
        });
    }
    v.check(elapsed < RUNTIME_LIMIT, || format!("run took {elapsed:?}"));
    v.detail = format!(
        "{} DMUs, full rerun {:.1}s",
        rep.max_rgm.len(),
        elapsed.as_secs_f64()
    );
    v
}

fn target_reproduction(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("closest targets");
    let ds = rep.technology.dataset();
    let mut compared = 0;
    for (exp, got) in rep.expected.iter().zip(&rep.max_rgm) {
        let Some(label) = &exp.target_coordinate else {
            continue;
        };
        compared += 1;
        match target_of(ds, got) {
            Some((c_label, c_value)) => v.check(
                *label == c_label
                    && (c_value - exp.target_value.unwrap_or(f64::NAN)).abs() <= TARGET_TOL,
                || {
                    format!(
                        "DMU {}: {c_label}={c_value:.3} vs {label}={:?}",
                        exp.dmu, exp.target_value
                    )
                },
            ),
            None => v.check(false, || format!("DMU {}: no target", exp.dmu)),
        }
    }
    for (id, label, value) in [
        (2, "y_gold", 134.3),
        (19, "y_silver", 63.9),
        (90, "y_bronze", 40.4),
    ] {
        let got = target_of(ds, &rep.max_rgm[id - 1]);
        v.check(
            matches!(&got, Some((l, x)) if l == label && (x - value).abs() <= TARGET_TOL),
            || format!("DMU {id}: {got:?}, expected {label}={value}"),
        );
    }
    v.detail = format!("{compared} printed targets");
    v
}

fn fgl_reproduction(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("FGL scores");
    for (exp, got) in rep.expected.iter().zip(&rep.fgl) {
        v.check((got.score - exp.score_fgl).abs() <= SCORE_TOL, || {
            format!("DMU {}: {:.6} vs {:.3}", exp.dmu, got.score, exp.score_fgl)
        });
    }
    v.detail = format!("{} DMUs", rep.fgl.len());
    v
}

fn zero_input_flags(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("zero-input target flags");
    for (id, expected) in [
        (23, true),
        (54, true),
        (90, true),
        (1, false),
        (2, false),
        (46, false),
    ] {
        let got = rep.fgl[id - 1].zero_input_target;
        v.check(got == expected, || {
            format!("DMU {id}: probe says {got}, table says {expected}")
        });
    }
    v.detail = "DMUs 23, 54, 90 marked; 1, 2, 46 unmarked".into();
    v
}

fn diagnostics_values(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("positivity multipliers, free lunch");
    let d = &rep.diagnostics;
    for (name, got, want) in d
        .v_star
        .iter()
        .zip(V_STAR)
        .map(|(g, w)| ("v*", g, w))
        .chain(d.u_star.iter().zip(U_STAR).map(|(g, w)| ("u*", g, w)))
    {
        v.check(
            matches!(got, Some(g) if (g - want).abs() <= MULTIPLIER_TOL),
            || format!("{name}: {got:?} vs {want}"),
        );
    }
    let u: Vec<f64> = d.u_star.iter().map(|u| u.unwrap_or(f64::NAN)).collect();
    v.check(u[0] > u[1] && u[1] > u[2] && u[2] > 0.0, || {
        format!("u* not strictly decreasing: {u:?}")
    });
    v.check(d.facet_positivity_passed, || {
        "positivity check failed".into()
    });
    v.check(
        matches!(d.free_lunch_value, Some(f) if (f - FREE_LUNCH).abs() <= FREE_LUNCH_TOL),
        || format!("free lunch {:?} vs {FREE_LUNCH}", d.free_lunch_value),
    );
    v.detail = format!("free lunch {:.6}", d.free_lunch_value.unwrap_or(f64::NAN));
    v
}

fn consistency(rep: &Reproduction, data: &BundledData) -> Verdict {
    let mut v = Verdict::new("trade-off consistency systems");
    let ds = rep.technology.dataset();
    let dir = data.dataset.parent().unwrap();
    for (file, want) in [
        ("paris2024_pairs_top11.json", Feasibility::Infeasible),
        ("paris2024_pairs_top10_hub.json", Feasibility::Feasible),
    ] {
        let doc: PairsDoc = read_json(&dir.join(file)).unwrap();
        let got = check_pairs(ds, &doc, &Settings::default()).unwrap();
        v.check(got == want, || {
            format!("{file}: {got:?}, expected {want:?}")
        });
    }
    v.check(rep.top_set_system == Feasibility::Infeasible, || {
        "top-set system feasible".into()
    });
    v.check(rep.refined_system == Feasibility::Feasible, || {
        "refined system infeasible".into()
    });
    v.detail = format!(
        "top set {:?}, refined with hub {:?}",
        rep.top_set_system, rep.refined_system
    );
    v
}

fn efficient_set(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("strong efficient set (plain VRS)");
    let want: BTreeSet<usize> = EFFICIENT_SET.into_iter().collect();
    let got: BTreeSet<usize> = rep.efficient_set.iter().copied().collect();
    for id in got.difference(&want) {
        v.failures
            .push(format!("DMU {id} computed efficient, not listed"));
    }
    for id in want.difference(&got) {
        v.failures
            .push(format!("DMU {id} listed, not computed efficient"));
    }
    v.detail = format!("{} of {} DMUs", got.len(), rep.technology.dataset().n());
    v
}

fn lower_bound(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("lower bound 1 - 1/(m+s)");
    let n = (rep.technology.m() + rep.technology.s()) as f64;
    let floor = 1.0 - 1.0 / n;
    for (k, r) in rep.max_rgm.iter().enumerate() {
        v.check(r.score > floor, || format!("DMU {}: {}", k + 1, r.score));
    }
    let min = rep
        .max_rgm
        .iter()
        .map(|r| r.score)
        .fold(f64::INFINITY, f64::min);
    v.detail = format!("min score {min:.4} > {floor:.4}");
    v
}

fn indication(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("indication");
    let mut check = |tech: &Technology, results: &[MaxRgmResult], tag: &str| {
        let slack = additive_scores(tech, Execution::Parallel).unwrap();
        for (k, (r, a)) in results.iter().zip(slack).enumerate() {
            let scored_one = r.side == Side::Efficient;
            let no_slack = a <= EFFICIENCY_TOL;
            v.check(scored_one == no_slack, || {
                format!(
                    "{tag} DMU {}: score {} additive slack {a:e}",
                    k + 1,
                    r.score
                )
            });
        }
    };
    check(&rep.technology, &rep.max_rgm, "case study");
    let tiny = positive_tiny_instances(81, 200);
    for (t, tech) in tiny.iter().enumerate() {
        let results: Vec<_> = max_rgm_all(tech, Execution::Sequential)
            .into_iter()
            .map(Result::unwrap)
            .collect();
        check(tech, &results, &format!("instance {t}"));
    }
    v.detail = format!(
        "{} case-study DMUs, {} random instances",
        rep.max_rgm.len(),
        tiny.len()
    );
    v
}

/// Coordinate-wise worse copy of `(x, y)`: some inputs raised, some
/// positive outputs lowered, at least one coordinate changed.
fn dominated(rng: &mut ChaCha8Rng, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut px = x.to_vec();
        let mut py = y.to_vec();
        let mut changed = false;
        for v in px.iter_mut() {
            if rng.gen_bool(0.4) {
                *v = if *v > 0.0 {
                    *v * rng.gen_range(1.02..2.0)
                } else {
                    rng.gen_range(0.5..5.0)
                };
                changed = true;
            }
        }
        for v in py.iter_mut().filter(|v| **v > 0.0) {
            if rng.gen_bool(0.4) {
                *v *= rng.gen_range(0.3..0.98);
                changed = true;
            }
        }
        if changed {
            return (px, py);
        }
    }
}

/// Positive optimal factors on every input, and a target positive
/// wherever the assessed input is.
fn positive_target(x: &[f64], y: &[f64], r: &MaxRgmResult) -> bool {
    r.theta_opt.iter().all(|t| *t > 0.0)
        && index_sets(x, y)
            .i_plus_x
            .iter()
            .all(|&i| r.target_x[i] > 0.0)
}

fn monotonicity_and_positivity(rep: &Reproduction) -> (Verdict, Verdict) {
    let mut mono = Verdict::new("strong monotonicity");
    let mut pos = Verdict::new("positive targets");
    let tech = &rep.technology;
    let dmus = tech.dataset().dmus();
    let mut evaluations = 0;
    for (d, r) in dmus.iter().zip(&rep.max_rgm) {
        evaluations += 1;
        pos.check(positive_target(&d.x, &d.y, r), || {
            format!("DMU {}: {:?}", d.id, r.theta_opt)
        });
    }
    let mut rng = rng(83);
    let mut ids: Vec<usize> = (1..=dmus.len()).collect();
    let sample: Vec<usize> = (0..10)
        .map(|_| ids.swap_remove(rng.gen_range(0..ids.len())))
        .collect();
    for &id in &sample {
        let d = &dmus[id - 1];
        let base = rep.max_rgm[id - 1].score;
        for _ in 0..100 {
            let (x, y) = dominated(&mut rng, &d.x, &d.y);
            match measures::max_rgm(tech, &x, &y) {
                Ok(r) => {
                    evaluations += 1;
                    mono.check(r.score < base, || {
                        format!("DMU {id}: {} !< {base} at {x:?} {y:?}", r.score)
                    });
                    pos.check(positive_target(&x, &y, &r), || {
                        format!("perturbed DMU {id}: {:?}", r.theta_opt)
                    });
                }
                Err(e) => mono.check(false, || format!("DMU {id}: {e}")),
            }
        }
    }
    mono.detail = format!("100 dominated perturbations for each of DMUs {sample:?}");
    pos.detail = format!("{evaluations} evaluations");
    (mono, pos)
}

fn oracle_equivalence() -> Verdict {
    let mut v = Verdict::new("LP vs facet closed forms");
    let mut rng = rng(85);
    let (mut instances, mut compared) = (0, 0);
    while instances < 200 {
        let with_tradeoffs = rng.gen_bool(0.6);
        let tech = tiny_technology(&mut rng, with_tradeoffs);
        instances += 1;
        let facets = match enumerate_facets(&tech) {
            Ok(f) => f,
            Err(e) => {
                v.failures.push(format!("instance {instances}: {e}"));
                continue;
            }
        };
        for d in tech.dataset().dmus() {
            for r in 0..tech.s() {
                match (
                    pps::max_output_expansion(&tech, &d.x, &d.y, r),
                    phi_natural(&facets, &d.x, &d.y, r),
                ) {
                    (Ok(lp), Ok(closed)) => {
                        compared += 1;
                        v.check((lp - closed).abs() <= ORACLE_TOL * closed.max(1.0), || {
                            format!("instance {instances}: phi {lp} vs {closed}")
                        });
                    }
                    (
                        Err(PpsError::UnboundedExpansion(_)),
                        Err(OracleError::DivisionByZeroNormal(_)),
                    ) => {}
                    other => v.failures.push(format!("instance {instances}: {other:?}")),
                }
            }
            for i in 0..tech.m() {
                let lp = pps::min_input_contraction(&tech, &d.x, &d.y, i).unwrap();
                let closed = theta_natural(&facets, &d.x, &d.y, i).unwrap();
                compared += 1;
                v.check((lp - closed).abs() <= ORACLE_TOL, || {
                    format!("instance {instances}: theta {lp} vs {closed}")
                });
            }
        }
    }
    v.detail = format!("{instances} instances, {compared} values");
    v
}

fn lp_duality(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("diagnostic LP duality");
    let mut checks = rep.diagnostics.duality.clone();
    let mut rng = rng(87);
    for _ in 0..200 {
        let with_tradeoffs = rng.gen_bool(0.7);
        let tech = tiny_technology(&mut rng, with_tradeoffs);
        match diagnostics::diagnose(&tech) {
            Ok(d) => checks.extend(d.duality),
            Err(e) => v.failures.push(e.to_string()),
        }
    }
    for c in &checks {
        v.check(c.agrees(), || {
            format!("{}: {} vs {}", c.name, c.primal, c.dual)
        });
    }
    v.detail = format!("{} primal/dual pairs", checks.len());
    v
}

fn unit_invariance(rep: &Reproduction) -> Verdict {
    let mut v = Verdict::new("unit invariance");
    let mut rng = rng(89);
    let mut compared = 0;
    let mut cases: Vec<(Technology, Vec<f64>)> = Vec::new();
    cases.push((
        rep.technology.clone(),
        rep.max_rgm.iter().map(|r| r.score).collect(),
    ));
    for tech in positive_tiny_instances(88, 60) {
        let scores = max_rgm_all(&tech, Execution::Sequential)
            .into_iter()
            .map(|r| r.unwrap().score)
            .collect();
        cases.push((tech, scores));
    }
    for (k, (tech, base)) in cases.iter().enumerate() {
        let rounds = if k == 0 { 3 } else { 1 };
        for _ in 0..rounds {
            let cx: Vec<f64> = (0..tech.m())
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect();
            let cy: Vec<f64> = (0..tech.s())
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect();
            let scaled = tech.rescaled(&cx, &cy);
            for (j, (r, b)) in max_rgm_all(&scaled, Execution::Parallel)
                .into_iter()
                .zip(base)
                .enumerate()
            {
                compared += 1;
                match r {
                    Ok(r) => v.check((r.score - b).abs() <= INVARIANCE_TOL, || {
                        format!("case {k} DMU {}: {} vs {b}", j + 1, r.score)
                    }),
                    Err(e) => v.failures.push(format!("case {k} DMU {}: {e}", j + 1)),
                }
            }
        }
    }
    v.detail = format!("{compared} rescaled evaluations");
    v
}

fn main() {
    let data = BundledData::in_dir(&BundledData::default_dir());
    let start = Instant::now();
    let rep = reproduce(&data, Settings::default(), Execution::Parallel).expect("case study runs");
    let elapsed = start.elapsed();

    // Sanity: the plain VRS efficient set is computed by the library too.
    assert_eq!(
        rep.efficient_set,
        strong_efficient_set(&Technology::vrs(rep.technology.dataset().clone())).unwrap()
    );

    let (mono, pos) = monotonicity_and_positivity(&rep);
    let verdicts = [
        score_reproduction(&rep, elapsed),
        target_reproduction(&rep),
        fgl_reproduction(&rep),
        zero_input_flags(&rep),
        diagnostics_values(&rep),
        consistency(&rep, &data),
        efficient_set(&rep),
        lower_bound(&rep),
        indication(&rep),
        mono,
        pos,
        oracle_equivalence(),
        lp_duality(&rep),
        unit_invariance(&rep),
    ];
    println!();
    let mut failed = 0;
    for v in &verdicts {
        if !v.print() {
            failed += 1;
        }
    }
    println!("\n{} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
