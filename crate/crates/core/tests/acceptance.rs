//! End-to-end acceptance suite. Prints one line per criterion and exits
//! nonzero if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crnc::analysis::{eval_min_formula, eval_spec};
use crnc::compiler::{
    compile_spec, compile_spec_with, compile_with_context, decompose_bimolecular, realize_unit_context,
    CompileOptions,
};
use crnc::composition::{compose, is_output_oblivious, prune_output_consumers, WiringPlan};
use crnc::massaction::{simulate_with, Method, RateAssignment, SimOptions};
use crnc::rational::{int, rat, to_f64};
use crnc::semantics::{
    execute_joint, execute_topological, execute_with_order, is_feedforward, max_output_bound,
    random_segment_walk,
};
use crnc::spec::{parse_function_spec, FunctionSpec};
use crnc::{parse_crc, parse_crn, Crc, Crn, Rational, State};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{corpus, inputs_covering, oracle_eval, positive, props};

const CORPUS_SIZE: usize = 200;
const INPUTS_PER_SPEC: usize = 20;

type Outcome = Result<String, String>;

fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

struct Case {
    spec: FunctionSpec,
    crc: Crc,
    inputs: Vec<Vec<Rational>>,
    expected: Vec<Rational>,
}

fn cases() -> &'static [Case] {
    static CASES: OnceLock<Vec<Case>> = OnceLock::new();
    CASES.get_or_init(|| {
        corpus(CORPUS_SIZE, 2024)
            .into_iter()
            .enumerate()
            .map(|(k, spec)| {
                let (crc, _) = compile_spec(&spec).expect("validated specs compile");
                let inputs = inputs_covering(spec.inputs(), INPUTS_PER_SPEC, 1000 + k as u64);
                let expected = inputs.iter().map(|x| oracle_eval(&spec, x)).collect();
                Case {
                    spec,
                    crc,
                    inputs,
                    expected,
                }
            })
            .collect()
    })
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exec_output(crc: &Crc, x: &[Rational]) -> Result<Rational, String> {
    let s = crc.initial_state(x).map_err(|e| e.to_string())?;
    let e = execute_topological(crc, &s).map_err(|e| e.to_string())?;
    Ok(e.output(crc).clone())
}

/// Reactions as sorted `(reactants, products)` name lists, independent of
/// species numbering.
fn canonical(crn: &Crn) -> Vec<(Vec<(String, u32)>, Vec<(String, u32)>)> {
    let side = |m: &BTreeMap<usize, u32>| {
        let mut v: Vec<(String, u32)> = m.iter().map(|(&s, &k)| (crn.name(s).to_string(), k)).collect();
        v.sort();
        v
    };
    let mut out: Vec<_> = crn.reactions().iter().map(|r| (side(&r.reactants), side(&r.products))).collect();
    out.sort();
    out
}

fn golden_example() -> Outcome {
    let spec = parse_function_spec(&data("example.json")).map_err(|e| e.to_string())?;
    let options = CompileOptions {
        prune: true,
        ..CompileOptions::default()
    };
    let (crc, report) = compile_spec_with(&spec, options).map_err(|e| e.to_string())?;
    let reference = parse_crc(&data("example.crn")).map_err(|e| e.to_string())?;
    // Listed species of the worked example and the role each plays.
    let roles = [
        ("X1", "X1"),
        ("X2", "X2"),
        ("X3", "X3"),
        ("X1''", "X1@g_{3}[0]"),
        ("X1'''", "X1@g_{}[0]"),
        ("X2''", "X2@g_{3}[0]"),
        ("X2'''", "X2@g_{}[1]"),
        ("X3'", "X3@P_{3}"),
        ("P3", "P_{3}"),
        ("Y3", "Y_{3}"),
        ("Y_empty", "Y_{}"),
        ("Y3'", "Y_{3}@H_{3}"),
        ("Y3_empty", "Y_{3}@H_{}"),
        ("Y_empty'", "H_{}"),
        ("Y", "Y"),
    ];
    let mut map = BTreeMap::new();
    for (name, role) in roles {
        let species = report
            .roles
            .get(role)
            .ok_or_else(|| format!("report has no role {role}"))?;
        map.insert(name.to_string(), species.clone());
    }
    check(
        map.len() == reference.crn.num_species() && map.values().collect::<std::collections::BTreeSet<_>>().len() == map.len(),
        || "role map is not a bijection".into(),
    )?;
    let renamed = reference.crn.renamed(|n| map[n].clone()).map_err(|e| e.to_string())?;
    let want = canonical(&renamed);
    let got = canonical(&crc.crn);
    check(want == got, || format!("compiled {got:?}\nexpected {want:?}"))?;
    check(crc.crn.num_species() == reference.crn.num_species(), || "species count differs".into())?;
    for (x, y) in [([2, 3, 1], 5), ([2, 3, 0], 2)] {
        let x: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
        let out = exec_output(&crc, &x)?;
        check(out == int(y), || format!("exec {x:?} gave {out}, expected {y}"))?;
        let listed = exec_output(&reference, &x)?;
        check(listed == int(y), || format!("listed network gave {listed} at {x:?}"))?;
    }
    Ok(format!("{} reactions isomorphic under the role map", got.len()))
}

fn three_way_equality() -> Outcome {
    let mut checked = 0;
    for (k, case) in cases().iter().enumerate() {
        let options = CompileOptions {
            prune: true,
            ..CompileOptions::default()
        };
        let (compact, _) = compile_spec_with(&case.spec, options).map_err(|e| e.to_string())?;
        for (x, want) in case.inputs.iter().zip(&case.expected) {
            let a = eval_spec(&case.spec, x).map_err(|e| e.to_string())?;
            let b = eval_min_formula(&case.spec, x).map_err(|e| e.to_string())?;
            let c = exec_output(&case.crc, x)?;
            let s = case.crc.initial_state(x).map_err(|e| e.to_string())?;
            let d = max_output_bound(&case.crc, &s).map_err(|e| e.to_string())?.value;
            let e = exec_output(&compact, x)?;
            check([&a, &b, &c, &d, &e].iter().all(|v| *v == want), || {
                format!(
                    "spec #{k} at {x:?}: oracle {want}, eval {a}, formula {b}, exec {c}, bound {d}, compact {e}\n{}",
                    case.spec.to_json()
                )
            })?;
            checked += 1;
        }
    }
    Ok(format!("{} specs, {checked} inputs", cases().len()))
}

fn adversarial_stability() -> Outcome {
    let mut walks = 0;
    for (k, case) in cases().iter().enumerate() {
        for (i, (x, want)) in case.inputs.iter().zip(&case.expected).enumerate() {
            let s = case.crc.initial_state(x).map_err(|e| e.to_string())?;
            for seed in 0..5u64 {
                let walk = random_segment_walk(&case.crc, &s, 50, seed + 7 * (k * 100 + i) as u64);
                walk.replay(&case.crc.crn).map_err(|e| e.to_string())?;
                let done = execute_topological(&case.crc, &walk.final_state).map_err(|e| e.to_string())?;
                check(done.output(&case.crc) == want, || {
                    format!("spec #{k} at {x:?}, seed {seed}: got {}, expected {want}", done.output(&case.crc))
                })?;
                walks += 1;
            }
        }
    }
    Ok(format!("{walks} walks"))
}

fn superadditivity_and_homogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let random_point = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Rational> {
        (0..n)
            .map(|_| if rng.gen_bool(0.7) { positive(rng) } else { int(0) })
            .collect()
    };
    for (k, case) in cases().iter().enumerate() {
        let n = case.spec.inputs();
        let f = |x: &[Rational]| eval_spec(&case.spec, x).map_err(|e| e.to_string());
        for _ in 0..1000 {
            let a = random_point(n, &mut rng);
            let b = random_point(n, &mut rng);
            let ab: Vec<Rational> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
            let (fa, fb, fab) = (f(&a)?, f(&b)?, f(&ab)?);
            check(&fa + &fb <= fab, || format!("spec #{k}: f({a:?}) + f({b:?}) = {} > {fab}", &fa + &fb))?;
        }
        let x = random_point(n, &mut rng);
        let s = case.crc.initial_state(&x).map_err(|e| e.to_string())?;
        let fx = f(&x)?;
        let bx = max_output_bound(&case.crc, &s).map_err(|e| e.to_string())?.value;
        for _ in 0..20 {
            let gamma = rat(rng.gen_range(1..=40), rng.gen_range(1..=9));
            let gx: Vec<Rational> = x.iter().map(|v| v * &gamma).collect();
            check(f(&gx)? == &gamma * &fx, || format!("spec #{k}: eval not homogeneous at γ = {gamma}"))?;
            let gs = case.crc.initial_state(&gx).map_err(|e| e.to_string())?;
            let bg = max_output_bound(&case.crc, &gs).map_err(|e| e.to_string())?.value;
            check(bg == &gamma * &bx, || format!("spec #{k}: bound {bg} at γ = {gamma}, expected {}", &gamma * &bx))?;
        }
    }
    Ok(format!("{} specs × 1000 pairs, 20 scalings each", cases().len()))
}

fn composition() -> Outcome {
    let min = parse_function_spec(&data("min2.json")).map_err(|e| e.to_string())?;
    let (crc, _) = compile_spec(&min).map_err(|e| e.to_string())?;
    let composed = compose(&WiringPlan::new(crc.clone(), crc, 0)).map_err(|e| e.to_string())?;
    check(composed.inputs.len() == 3, || "composed CRC should have three inputs".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..100 {
        let x: Vec<Rational> = (0..3).map(|_| if rng.gen_bool(0.9) { positive(&mut rng) } else { int(0) }).collect();
        let want = x.iter().min().unwrap().clone();
        let got = exec_output(&composed, &x)?;
        check(got == want, || format!("min∘min at {x:?}: {got}, expected {want}"))?;
    }

    let max = parse_crc(&data("maxnet.crn")).map_err(|e| e.to_string())?;
    let min_net = parse_crc(&data("minnet.crn")).map_err(|e| e.to_string())?;
    let c = compose(&WiringPlan::new(max, min_net, 0)).map_err(|e| e.to_string())?;
    let s = c.initial_state(&[int(1), int(1), int(2)]).map_err(|e| e.to_string())?;
    let last = c.crn.num_reactions() - 1;
    let max_first: Vec<usize> = (0..=last).collect();
    let min_early = [0, 1, last, 2, 3];
    let a = execute_with_order(&c, &s, &max_first).map_err(|e| e.to_string())?;
    let b = execute_with_order(&c, &s, &min_early).map_err(|e| e.to_string())?;
    let (ya, yb) = (a.output(&c).clone(), b.output(&c).clone());
    check(ya == int(1) && yb == int(2), || format!("schedules gave {ya} and {yb}, expected 1 and 2"))?;
    Ok("min∘min exact on 100 inputs; min∘max schedules give 1 and 2".into())
}

fn output_consumer_pruning() -> Outcome {
    let max = parse_crc(&data("maxnet.crn")).map_err(|e| e.to_string())?;
    let min = parse_crc(&data("minnet.crn")).map_err(|e| e.to_string())?;
    let pruned = prune_output_consumers(&max);
    check(pruned.removed == ["Y + K -> 0"], || format!("removed {:?}", pruned.removed))?;
    let y = exec_output(&pruned.crc, &[int(1), int(2)])?;
    check(y == int(3), || format!("pruned max net gave {y} at (1,2)"))?;
    for (a, b) in [(rat(5, 2), int(4)), (int(0), rat(1, 3)), (int(7), int(0))] {
        let y = exec_output(&pruned.crc, &[a.clone(), b.clone()])?;
        check(y == &a + &b, || format!("pruned max net gave {y} at ({a},{b})"))?;
    }
    let mo = is_output_oblivious(&max);
    check(!mo.is_oblivious(), || "max net classified as output-oblivious".into())?;
    check(
        mo.offenders.iter().map(|&j| max.crn.reaction_string(j)).collect::<Vec<_>>() == ["Y + K -> 0"],
        || "wrong offender list".into(),
    )?;
    check(is_output_oblivious(&min).is_oblivious(), || "min net classified as consuming".into())?;
    check(is_output_oblivious(&pruned.crc).is_oblivious(), || "pruned net still consumes Y".into())?;
    Ok("removed `Y + K -> 0`; pruned net computes x1 + x2".into())
}

fn bimolecular_preservation() -> Outcome {
    let mut cyclic = 0;
    for (k, case) in cases().iter().enumerate() {
        let crn = decompose_bimolecular(&case.crc.crn);
        for j in 0..crn.num_reactions() {
            let r = &crn.reactions()[j];
            check(r.reactant_count() <= 2 && r.product_count() <= 2, || {
                format!("spec #{k}: `{}` is not bimolecular", crn.reaction_string(j))
            })?;
        }
        let feedforward = is_feedforward(&crn).is_some();
        if !feedforward {
            cyclic += 1;
        }
        let d = Crc::new(crn, case.crc.inputs.clone(), case.crc.output, case.crc.context.clone())
            .map_err(|e| e.to_string())?;
        for (x, want) in case.inputs.iter().zip(&case.expected) {
            let s = d.initial_state(x).map_err(|e| e.to_string())?;
            let e = if feedforward { execute_topological(&d, &s) } else { execute_joint(&d, &s) }
                .map_err(|e| format!("spec #{k} at {x:?}: {e}"))?;
            check(e.output(&d) == want, || format!("spec #{k} at {x:?}: {} != {want}", e.output(&d)))?;
        }
    }
    Ok(format!("{} specs ({cyclic} with cyclic aggregation)", cases().len()))
}

fn initial_context() -> Outcome {
    let spec = parse_function_spec(&data("min_with_one.json")).map_err(|e| e.to_string())?;
    let (crc, _) = compile_with_context(&spec, CompileOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut xs = vec![int(0), int(1), rat(1, 2), int(3)];
    while xs.len() < 100 {
        xs.push(rat(rng.gen_range(0..=50), rng.gen_range(1..=20)));
    }
    for x in &xs {
        let y = exec_output(&crc, std::slice::from_ref(x))?;
        let want = x.clone().min(int(1));
        check(y == want, || format!("min({x}, 1) computed as {y}"))?;
    }

    let crn = parse_crn("S -> Y").map_err(|e| e.to_string())?;
    let (s, y) = (crn.id("S").unwrap(), crn.id("Y").unwrap());
    let with_context = Crc::new(crn, vec![], y, BTreeMap::from([(s, rat(2, 3))])).map_err(|e| e.to_string())?;
    let unit = realize_unit_context(&with_context).map_err(|e| e.to_string())?;
    let first = unit.crn.reaction_string(0);
    check(first == "3 S' -> 2 S", || format!("preamble is `{first}`"))?;
    check(unit.context.values().all(|v| *v == int(1)), || "context not unit".into())?;
    let start = unit.initial_state(&[]).map_err(|e| e.to_string())?;
    let after = execute_with_order(&unit, &start, &[0]).map_err(|e| e.to_string())?;
    check(after.final_state.get(s) == &rat(2, 3), || format!("S reached {}", after.final_state.get(s)))?;
    let out = execute_topological(&unit, &start).map_err(|e| e.to_string())?;
    check(out.output(&unit) == &rat(2, 3), || format!("Y reached {}", out.output(&unit)))?;
    Ok("min(x, 1) exact on 100 inputs; 2/3 context realized".into())
}

fn mass_action() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for k in 0..20 {
        let case = &cases()[(k * 37) % cases().len()];
        // Full support: every domain is present, so the most gates fire.
        let x: Vec<Rational> = (0..case.spec.inputs()).map(|_| positive(&mut rng)).collect();
        let x = &x;
        let want = to_f64(&oracle_eval(&case.spec, x));
        let s: State = case.crc.initial_state(x).map_err(|e| e.to_string())?;
        let rates = RateAssignment::random(case.crc.crn.num_reactions(), 0.2, 5.0, 100 + k as u64)
            .map_err(|e| e.to_string())?;
        // Ties in multi-reactant min reactions decay polynomially, so the
        // run needs a long horizon and an implicit method to get there.
        let options = SimOptions {
            method: Method::Rosenbrock,
            t_end: 1e12,
            tol: 1e-12,
            ..SimOptions::default()
        };
        let r = simulate_with(&case.crc.crn, &s, &rates, &options).map_err(|e| format!("instance {k}: {e}"))?;
        let y = r.final_state()[case.crc.output];
        worst = worst.max((y - want).abs());
        check(r.converged, || format!("instance {k}: no convergence by t = {}", r.final_time()))?;
        check((y - want).abs() <= 1e-3, || format!("instance {k} at {x:?}: simulated {y}, exact {want}"))?;
        runs += 1;
    }
    Ok(format!("{runs} runs, worst error {worst:.2e}"))
}

fn semantics_properties() -> Outcome {
    let unattained = parse_crc(&data("unattained.crn")).map_err(|e| e.to_string())?;
    let x = unattained.initial_state(&[int(1)]).map_err(|e| e.to_string())?;
    let b = max_output_bound(&unattained, &x).map_err(|e| e.to_string())?;
    check(b.value == int(1) && b.possibly_unattained, || {
        format!("supremum example bound {} (possibly unattained: {})", b.value, b.possibly_unattained)
    })?;
    check(b.attained_witness.is_none(), || "unattainable bound came with a witness".into())?;

    let config = Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    };
    let runner = || TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner()
        .run(&(props::crc_and_state(), 0u64..1000), |((c, x), seed)| props::closure_is_exact(&c, &x, seed))
        .map_err(|e| format!("closure: {e}"))?;
    runner()
        .run(&(props::crc_and_state(), 0u64..1000, 0u64..1000, 0i64..=8), |((c, x), s1, s2, l)| {
            props::convex_combination_replays(&c, &x, (s1, s2), &rat(l, 8))
        })
        .map_err(|e| format!("convex combination: {e}"))?;
    runner()
        .run(&(props::crc_and_two_states(), 0u64..1000), |((c, x, y), seed)| {
            props::reachability_is_additive(&c, &x, &y, seed)
        })
        .map_err(|e| format!("additivity: {e}"))?;
    Ok("supremum-only bound 1, not attained; 3 × 200 random CRNs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("golden example", golden_example, Some(Duration::from_secs(1))),
        ("three-way equality", three_way_equality, Some(Duration::from_secs(120))),
        ("adversarial stability", adversarial_stability, None),
        ("superadditivity and homogeneity", superadditivity_and_homogeneity, None),
        ("composition", composition, None),
        ("output-consumer pruning", output_consumer_pruning, None),
        ("bimolecular preservation", bimolecular_preservation, None),
        ("initial context", initial_context, None),
        ("mass-action cross-check", mass_action, Some(Duration::from_secs(60))),
        ("semantics properties", semantics_properties, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        // The shared corpus is compiled by its first user, so criterion 2's
        // time includes compilation.
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{elapsed:.2?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{elapsed:.2?}] {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
