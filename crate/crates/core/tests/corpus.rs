//! Compiler output on a random corpus against the table-scanning oracle.
mod common;

use common::{corpus, inputs_covering, oracle_eval};
use crnc::compiler::{compile_spec_with, CompileOptions};
use crnc::semantics::{execute_joint, execute_topological, is_feedforward, max_output_bound};
use crnc::analysis::eval_spec;
use crnc::spec::parse_function_spec;
use crnc::{Crc, Rational};

fn run(crc: &Crc, x: &[Rational]) -> Rational {
    let s = crc.initial_state(x).unwrap();
    let done = if is_feedforward(&crc.crn).is_some() {
        execute_topological(crc, &s)
    } else {
        execute_joint(crc, &s)
    };
    done.unwrap().output(crc).clone()
}

fn modes() -> Vec<CompileOptions> {
    let mut out = vec![];
    for prune in [false, true] {
        for contract in [false, true] {
            for bimolecular in [false, true] {
                out.push(CompileOptions {
                    prune,
                    contract,
                    bimolecular,
                });
            }
        }
    }
    out
}

#[test]
fn every_mode_computes_the_spec() {
    for (k, spec) in corpus(30, 77).iter().enumerate() {
        let inputs = inputs_covering(spec.inputs(), 10, k as u64);
        for opts in modes() {
            let (crc, report) = compile_spec_with(spec, opts).unwrap();
            assert_eq!(report.reactions, crc.crn.num_reactions());
            for x in &inputs {
                assert_eq!(run(&crc, x), oracle_eval(spec, x), "spec {k}, {opts:?}, x = {x:?}");
            }
        }
    }
}

#[test]
fn output_bound_equals_the_function() {
    for (k, spec) in corpus(30, 78).iter().enumerate() {
        let (crc, _) = compile_spec_with(spec, CompileOptions { prune: true, ..Default::default() }).unwrap();
        for x in inputs_covering(spec.inputs(), 6, 500 + k as u64) {
            let bound = max_output_bound(&crc, &crc.initial_state(&x).unwrap()).unwrap();
            assert_eq!(bound.value, oracle_eval(spec, &x));
            assert!(bound.attained_witness.is_some());
        }
    }
}

#[test]
fn spec_json_round_trips() {
    for (k, spec) in corpus(40, 79).iter().enumerate() {
        let back = parse_function_spec(&spec.to_json().to_string()).unwrap();
        for x in inputs_covering(spec.inputs(), 8, k as u64) {
            assert_eq!(eval_spec(&back, &x).unwrap(), oracle_eval(spec, &x));
        }
    }
}
