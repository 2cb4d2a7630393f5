use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crnc::analysis::{check_superadditivity, eval_min_formula, eval_spec, sample_inputs, validate_spec};
use crnc::compiler::{compile_spec_with, compile_with_context, CompileOptions, CompileReport};
use crnc::composition::{compose, is_output_oblivious, WiringPlan};
use crnc::format::{parse_assignments, serialize_state};
use crnc::massaction::{simulate_with, Method, RateAssignment, SimOptions};
use crnc::rational::to_f64;
use crnc::semantics::{
    execute_joint, execute_topological, is_feedforward, max_output_bound, random_segment_walk,
    species_closure, Execution, SemanticsError,
};
use crnc::spec::{parse_spec_json, FunctionSpec, SpecFile};
use crnc::{parse_crc, serialize_crc, Crc, Error, Rational, State};

const VERIFIED: u8 = 0;
const COUNTEREXAMPLE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const INTERNAL_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "crnc", version, about = "Compile and verify rate-independent chemical reaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a function spec into a CRC.
    Compile {
        #[arg(long)]
        spec: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Compact construction with dead reactions removed.
        #[arg(long)]
        prune: bool,
        /// Merge single-use renaming reactions.
        #[arg(long)]
        contract: bool,
        /// At most two reactant and two product molecules per reaction.
        #[arg(long)]
        bimolecular: bool,
        /// Write the JSON compile report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Feed the output of the first CRC into an input of the second.
    Compose {
        upstream: PathBuf,
        downstream: PathBuf,
        /// `OUT=IN`: upstream output and the downstream input it feeds.
        #[arg(long)]
        wire: String,
        /// Suffix for the other downstream species (default `~2`, `~3`, ...).
        #[arg(long)]
        suffix: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report structural properties of a CRC.
    Check { net: PathBuf },
    /// Run the deterministic executor and print the output.
    Exec {
        net: PathBuf,
        #[command(flatten)]
        input: InputArg,
        /// Also print the final state.
        #[arg(long)]
        state: bool,
    },
    /// Compile a spec and cross-check the evaluators, the LP bound and the
    /// executor on sampled inputs.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Falls back to CRNC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Random segment walk length before completing each execution.
        #[arg(long)]
        adversarial: Option<usize>,
        /// Also simulate mass-action kinetics with random rates.
        #[arg(long)]
        mass_action: bool,
        #[arg(long)]
        prune: bool,
    },
    /// Supremum of the output over reachable states.
    Maxout {
        net: PathBuf,
        #[command(flatten)]
        input: InputArg,
        /// Print the attaining trace.
        #[arg(long)]
        trace: bool,
    },
    /// Integrate mass-action kinetics.
    Simulate {
        net: PathBuf,
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated rate per reaction, or a file with that list.
        #[arg(long)]
        rates: Option<String>,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp5)]
        method: MethodArg,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Explicit Dormand-Prince 5(4).
    Dp5,
    /// Linearly implicit Rosenbrock 2(3), for stiff networks and long horizons.
    Rosenbrock,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Dp5 => Method::DormandPrince,
            MethodArg::Rosenbrock => Method::Rosenbrock,
        }
    }
}

#[derive(Args)]
struct InputArg {
    /// `X1=2,X2=3/2`, or a file of `name = value` lines.
    #[arg(long, default_value = "")]
    input: String,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { INPUT_ERROR } else { INTERNAL_ERROR };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

macro_rules! impl_failure {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::from(Error::from(e))
            }
        }
    )*};
}

impl_failure!(
    crnc::format::FormatError,
    crnc::model::ModelError,
    crnc::spec::SpecError,
    crnc::compiler::CompileError,
    crnc::composition::CompositionError,
    crnc::massaction::MassActionError,
    SemanticsError
);

fn input_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: INPUT_ERROR,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input_failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_crc(path: &Path) -> Result<Crc, Failure> {
    parse_crc(&read(path)?).map_err(|e| input_failure(format!("{}: {e}", path.display())))
}

/// Initial state: context, then the assignments (inputs or any species).
fn load_state(crc: &Crc, arg: &InputArg) -> Result<State, Failure> {
    let text = if !arg.input.contains('=') && !arg.input.is_empty() {
        read(Path::new(&arg.input))?
    } else {
        arg.input.clone()
    };
    let mut s = crc.initial_state(&vec![Rational::default(); crc.inputs.len()])?;
    for (name, value) in parse_assignments(&text)? {
        let id = crc.crn.require(&name)?;
        if value < Rational::default() {
            return Err(input_failure(format!("negative concentration for {name}")));
        }
        s.set(id, value);
    }
    Ok(s)
}

fn execute(crc: &Crc, s: &State) -> Result<Execution, Failure> {
    match execute_topological(crc, s) {
        Err(SemanticsError::NotFeedforward) => {
            log::info!("network is not feedforward; using the joint executor");
            Ok(execute_joint(crc, s)?)
        }
        other => Ok(other?),
    }
}

fn seed_from(arg: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = arg {
        return Ok(s);
    }
    match std::env::var("CRNC_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| input_failure(format!("CRNC_SEED is not an integer: {v}"))),
        Err(_) => Ok(0),
    }
}

fn compile_any(spec: &FunctionSpec, options: CompileOptions) -> Result<(Crc, CompileReport), Failure> {
    if spec.has_constants() {
        Ok(compile_with_context(spec, options)?)
    } else {
        Ok(compile_spec_with(spec, options)?)
    }
}

fn cmd_compile(
    spec: &Path,
    output: Option<&Path>,
    options: CompileOptions,
    report: Option<&Path>,
) -> Result<u8, Failure> {
    let spec = match parse_spec_json(&read(spec)?)? {
        SpecFile::Function(f) => f,
        SpecFile::MaxLike(_) => return Err(input_failure("`max_of` specs cannot be compiled")),
    };
    let (crc, rep) = compile_any(&spec, options)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    write_or_print(output, &serialize_crc(&crc))?;
    if let Some(path) = report {
        let text = serde_json::to_string_pretty(&rep.to_json()).expect("report serializes");
        std::fs::write(path, text + "\n").map_err(|e| input_failure(format!("{}: {e}", path.display())))?;
    }
    Ok(VERIFIED)
}

fn cmd_compose(
    upstream: &Path,
    downstream: &Path,
    wire: &str,
    suffix: Option<String>,
    output: Option<&Path>,
) -> Result<u8, Failure> {
    let up = load_crc(upstream)?;
    let down = load_crc(downstream)?;
    let (out, input) = wire
        .split_once('=')
        .ok_or_else(|| input_failure(format!("--wire expects OUT=IN, got `{wire}`")))?;
    if out.trim() != up.output_name() {
        return Err(input_failure(format!(
            "upstream output is `{}`, not `{}`",
            up.output_name(),
            out.trim()
        )));
    }
    let mut plan = WiringPlan::by_name(up, down, input.trim())?;
    plan.suffix = suffix;
    write_or_print(output, &serialize_crc(&compose(&plan)?))?;
    Ok(VERIFIED)
}

fn cmd_check(net: &Path) -> Result<u8, Failure> {
    let crc = load_crc(net)?;
    let crn = &crc.crn;
    println!("species: {}", crn.num_species());
    println!("reactions: {}", crn.num_reactions());
    let oblivious = is_output_oblivious(&crc);
    if oblivious.is_oblivious() {
        println!("output-oblivious: yes");
    } else {
        let offenders: Vec<String> = oblivious.offenders.iter().map(|&j| crn.reaction_string(j)).collect();
        println!("output-oblivious: NO ({})", offenders.join("; "));
    }
    match is_feedforward(crn) {
        Some(order) => {
            let names: Vec<&str> = order.iter().map(|&s| crn.name(s)).collect();
            println!("feedforward: yes ({})", names.join(" < "));
        }
        None => println!("feedforward: no"),
    }
    // Closure from every input and context species being present.
    let mut present = vec![false; crn.num_species()];
    for &s in crc.inputs.iter().chain(crc.context.keys()) {
        present[s] = true;
    }
    let closure = species_closure(crn, &present);
    let never: Vec<&str> = (0..crn.num_species()).filter(|&s| !closure[s]).map(|s| crn.name(s)).collect();
    println!("producible: {}/{}", crn.num_species() - never.len(), crn.num_species());
    if never.is_empty() {
        println!("siphon: none (every species is producible)");
    } else {
        println!("siphon: {{{}}} stays empty", never.join(", "));
    }
    let output_reachable = closure[crc.output];
    println!("output producible: {}", if output_reachable { "yes" } else { "no" });
    Ok(VERIFIED)
}

fn cmd_exec(net: &Path, input: &InputArg, show_state: bool) -> Result<u8, Failure> {
    let crc = load_crc(net)?;
    let s = load_state(&crc, input)?;
    let e = execute(&crc, &s)?;
    println!("{} = {}", crc.output_name(), e.output(&crc));
    if show_state {
        print!("{}", serialize_state(&crc.crn, &e.final_state));
    }
    Ok(VERIFIED)
}

fn rationals(x: &[Rational]) -> Vec<String> {
    x.iter().map(|v| v.to_string()).collect()
}

fn assignment(crc: &Crc, x: &[Rational]) -> String {
    crc.input_names()
        .iter()
        .zip(x)
        .map(|(n, v)| format!("{n}={v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn counterexample(body: Value) -> Result<u8, Failure> {
    let mut v = json!({"schema": 1, "result": "counterexample"});
    v.as_object_mut()
        .expect("object")
        .extend(body.as_object().expect("object").clone());
    println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
    Ok(COUNTEREXAMPLE)
}

struct VerifyArgs {
    samples: usize,
    seed: u64,
    adversarial: Option<usize>,
    mass_action: bool,
    prune: bool,
}

fn cmd_verify(spec_path: &Path, args: VerifyArgs) -> Result<u8, Failure> {
    let spec = match parse_spec_json(&read(spec_path)?)? {
        SpecFile::MaxLike(f) => {
            let result = check_superadditivity(&f, args.samples.max(1), args.seed);
            if let Some(v) = result.violations.first() {
                return counterexample(json!({
                    "kind": "superadditivity",
                    "a": rationals(&v.a),
                    "b": rationals(&v.b),
                    "f(a)": v.fa.to_string(),
                    "f(b)": v.fb.to_string(),
                    "f(a+b)": v.fab.to_string(),
                }));
            }
            let out = json!({"schema": 1, "result": "verified", "kind": "superadditivity", "pairs": result.pairs, "seed": args.seed});
            println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
            return Ok(VERIFIED);
        }
        SpecFile::Function(f) => f,
    };
    let report = validate_spec(&spec);
    if let Some(v) = report.domain_violations.first() {
        return counterexample(json!({
            "kind": "domain-inequality",
            "input": rationals(&v.witness),
            "validation": report.to_json(),
        }));
    }
    if !report.is_valid() {
        return Err(input_failure(format!("spec is invalid: {}", report.summary())));
    }
    let sampled = check_superadditivity(&spec, args.samples.max(1), args.seed);
    if let Some(v) = sampled.violations.first() {
        return counterexample(json!({
            "kind": "superadditivity",
            "a": rationals(&v.a),
            "b": rationals(&v.b),
            "f(a)": v.fa.to_string(),
            "f(b)": v.fb.to_string(),
            "f(a+b)": v.fab.to_string(),
        }));
    }
    let options = CompileOptions {
        prune: args.prune,
        ..CompileOptions::default()
    };
    let (crc, _) = compile_any(&spec, options)?;
    let n = spec.inputs();
    let mut walks = 0;
    let mut simulations = 0;
    for (k, x) in sample_inputs(n, args.samples, args.seed).into_iter().enumerate() {
        let oracle = eval_spec(&spec, &x)?;
        let formula = eval_min_formula(&spec, &x)?;
        let s = crc.initial_state(&x)?;
        let exec = execute(&crc, &s)?.output(&crc).clone();
        let bound = max_output_bound(&crc, &s)?.value;
        if formula != oracle || exec != oracle || bound != oracle {
            return counterexample(json!({
                "kind": "evaluation",
                "input": assignment(&crc, &x),
                "eval_spec": oracle.to_string(),
                "eval_min_formula": formula.to_string(),
                "exec": exec.to_string(),
                "max_output_bound": bound.to_string(),
            }));
        }
        if let Some(steps) = args.adversarial {
            for w in 0..3u64 {
                let walk_seed = args.seed.wrapping_mul(1_000_003).wrapping_add(k as u64 * 7 + w);
                let walk = random_segment_walk(&crc, &s, steps, walk_seed);
                let done = execute(&crc, &walk.final_state)?;
                if done.output(&crc) != &oracle {
                    return counterexample(json!({
                        "kind": "adversarial",
                        "input": assignment(&crc, &x),
                        "expected": oracle.to_string(),
                        "got": done.output(&crc).to_string(),
                        "walk_seed": walk_seed,
                        "walk": walk.dump(&crc.crn),
                    }));
                }
                walks += 1;
            }
        }
        if args.mass_action {
            let rates = RateAssignment::random(crc.crn.num_reactions(), 0.2, 5.0, args.seed.wrapping_add(k as u64))?;
            let opts = SimOptions {
                method: Method::Rosenbrock,
                t_end: 1e12,
                tol: 1e-12,
                ..SimOptions::default()
            };
            let r = simulate_with(&crc.crn, &s, &rates, &opts)?;
            let y = r.final_state()[crc.output];
            if !r.converged || (y - to_f64(&oracle)).abs() > 1e-3 {
                return counterexample(json!({
                    "kind": "mass-action",
                    "input": assignment(&crc, &x),
                    "expected": oracle.to_string(),
                    "simulated": y,
                    "converged": r.converged,
                    "rates": rates.rates(),
                }));
            }
            simulations += 1;
        }
    }
    let out = json!({
        "schema": 1,
        "result": "verified",
        "seed": args.seed,
        "samples": args.samples,
        "domain_checks": report.domain_checks,
        "superadditivity_pairs": sampled.pairs,
        "walks": walks,
        "simulations": simulations,
        "species": crc.crn.num_species(),
        "reactions": crc.crn.num_reactions(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    Ok(VERIFIED)
}

fn cmd_maxout(net: &Path, input: &InputArg, trace: bool) -> Result<u8, Failure> {
    let crc = load_crc(net)?;
    let s = load_state(&crc, input)?;
    let b = max_output_bound(&crc, &s)?;
    println!("max {} = {}", crc.output_name(), b.value);
    println!("attained: {}", if b.possibly_unattained { "no (supremum only)" } else { "yes" });
    if trace {
        if let Some(t) = &b.attained_witness {
            print!("{}", t.dump(&crc.crn));
        }
    }
    Ok(VERIFIED)
}

fn parse_rates(text: &str, reactions: usize) -> Result<RateAssignment, Failure> {
    let text = if Path::new(text).is_file() { read(Path::new(text))? } else { text.to_string() };
    let rates = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| input_failure(format!("bad rate `{t}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    if rates.len() != reactions {
        return Err(input_failure(format!("{reactions} reactions but {} rates", rates.len())));
    }
    Ok(RateAssignment::new(rates)?)
}

fn cmd_simulate(
    net: &Path,
    input: &InputArg,
    rates: Option<&str>,
    t_end: f64,
    tol: f64,
    method: MethodArg,
    csv: Option<&Path>,
) -> Result<u8, Failure> {
    let crc = load_crc(net)?;
    let s = load_state(&crc, input)?;
    let m = crc.crn.num_reactions();
    let rates = match rates {
        Some(r) => parse_rates(r, m)?,
        None => RateAssignment::uniform(m, 1.0)?,
    };
    let opts = SimOptions {
        method: method.into(),
        t_end,
        tol,
        ..SimOptions::default()
    };
    let r = simulate_with(&crc.crn, &s, &rates, &opts)?;
    println!("t = {}", r.final_time());
    println!("{} = {}", crc.output_name(), r.final_state()[crc.output]);
    println!("converged: {} (|dx/dt| = {:e})", if r.converged { "yes" } else { "no" }, r.derivative_norm);
    if let Some(path) = csv {
        std::fs::write(path, r.to_csv(&crc.crn)).map_err(|e| input_failure(format!("{}: {e}", path.display())))?;
    }
    Ok(VERIFIED)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Compile {
            spec,
            output,
            prune,
            contract,
            bimolecular,
            report,
        } => {
            let options = CompileOptions {
                prune,
                contract,
                bimolecular,
            };
            cmd_compile(&spec, output.as_deref(), options, report.as_deref())
        }
        Command::Compose {
            upstream,
            downstream,
            wire,
            suffix,
            output,
        } => cmd_compose(&upstream, &downstream, &wire, suffix, output.as_deref()),
        Command::Check { net } => cmd_check(&net),
        Command::Exec { net, input, state } => cmd_exec(&net, &input, state),
        Command::Verify {
            spec,
            samples,
            seed,
            adversarial,
            mass_action,
            prune,
        } => {
            let args = VerifyArgs {
                samples,
                seed: seed_from(seed)?,
                adversarial,
                mass_action,
                prune,
            };
            cmd_verify(&spec, args)
        }
        Command::Maxout { net, input, trace } => cmd_maxout(&net, &input, trace),
        Command::Simulate {
            net,
            input,
            rates,
            t_end,
            tol,
            method,
            csv,
        } => cmd_simulate(&net, &input, rates.as_deref(), t_end, tol, method, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { VERIFIED });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
