use std::path::PathBuf;

use braidlie::algebra::{poly_gen, primitive_tensor};
use braidlie::syntax::{render_poly, render_tensor};
use braidlie::{CycScalar, GeneratorTable, GradedPoly, Root};
use braidlie_cli::{load_model, parse_model, run_args, CliError};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn run(args: &[&str]) -> braidlie_cli::Outcome {
    let mut argv = vec!["braidlie".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run_args(&argv)
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("braidlie-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn sweedler_model_loads() {
    let doc = load_model(&corpus("sweedler.model")).unwrap();
    assert_eq!(doc.group().torsion(), &[2]);
    assert_eq!(doc.group().free_rank(), 0);
    assert_eq!(doc.presentation.as_ref().unwrap().table.len(), 1);
}

#[test]
fn mixed_ternary_model_has_the_stated_bicharacter() {
    let doc = load_model(&corpus("mixed_ternary.model")).unwrap();
    let g = doc.group();
    let (g1, g2) = (g.generator(0), g.generator(1));
    let zeta = CycScalar::root_of_unity(3, 1);
    assert_eq!(doc.chi.eval(&g1, &g1), zeta);
    assert_eq!(doc.chi.eval(&g1, &g2), zeta.pow(2).unwrap());
    assert_eq!(doc.chi.eval(&g2, &g1), CycScalar::one());
    assert_eq!(doc.chi.eval(&g2, &g2), zeta);
}

#[test]
fn wrong_arity_degree_is_rejected_at_load() {
    let text = std::fs::read_to_string(corpus("sweedler.model")).unwrap().replace("x:1", "x:(1,1)");
    match parse_model("bad.model", &text) {
        Err(CliError::Validation { block, reason }) => {
            assert_eq!(block, "presentation");
            assert!(reason.contains("(1,1)"), "{reason}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn unknown_generator_in_a_relation_points_at_its_column() {
    let text = std::fs::read_to_string(corpus("sweedler.model")).unwrap().replace("relation = x^2", "relation = x^2 - q");
    match parse_model("bad.model", &text) {
        Err(CliError::Parse { line, col, .. }) => assert_eq!((line, col), (17, 18)),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn cyclic_ternary_families() {
    let path = corpus("cyclic_ternary.model");
    let out = run(&["families", path.to_str().unwrap(), "--n", "3", "--zeta", "z^1@3", "--format", "machine"]);
    assert_eq!(out.exit_code, 0);
    assert_eq!(out.stdout, "FAMILY (1,1,1)\nFAMILY (2,2,2)\nCOUNT 2\nSUMMARY checks=0 failures=0\n");
}

#[test]
fn commutator_for_trivial_bicharacter() {
    let path = scratch("trivial.model", "[group]\ntorsion = 2\nchi_level = 1\nchi_matrix = 0\n");
    let out = run(&["bracket", path.to_str().unwrap(), "--family", "1,1", "--zeta", "-1", "--format", "machine"]);
    assert_eq!(out.exit_code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("[x,y] = x*y - y*x\n"), "{}", out.stdout);
}

#[test]
fn rho_of_a_transposition_is_minus_zeta() {
    let path = corpus("lie_color.model");
    let out = run(&["rho", path.to_str().unwrap(), "--family", "(1,0),(0,1)", "--zeta", "-1", "--perm", "2,1"]);
    assert!(out.stdout.contains("RHO [2,1] -1*z^1 @ 3\n"), "{}", out.stdout);
}

#[test]
fn rendering_conventions() {
    let g = braidlie::AbelianGroup::trivial();
    let t = GeneratorTable::new(g.clone(), vec![("x".into(), g.zero())]).unwrap();
    assert_eq!(render_poly(&t, &GradedPoly::zero()), "0");
    assert_eq!(render_tensor(&t, &primitive_tensor(&poly_gen(0))), "x(x)1 + 1(x)x");
    assert_eq!(Root::new(6, 5).to_string(), "-1*z^1 @ 3");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["frobnicate", "x.model"]).exit_code, 2);
    assert!(run(&["frobnicate"]).stderr.contains("unknown command `frobnicate`"));
    assert_eq!(run(&["hopf-check", "/nonexistent/m.model"]).exit_code, 2);

    // x is primitive but x^2 = 0 is not a Hopf ideal when chi(1,1) is a cube root of unity
    let bad = scratch(
        "bad_ideal.model",
        "[group]\ntorsion = 3\nchi_level = 3\nchi_matrix = 1\n[presentation]\ngenerators = x:1\nrelation = x^2\n",
    );
    let out = run(&["hopf-check", bad.to_str().unwrap()]);
    assert_eq!(out.exit_code, 1, "{}", out.stdout);
    assert!(out.stdout.contains("AXIOM delta_multiplicative FAIL"), "{}", out.stdout);

    let ok = run(&["hopf-check", corpus("sweedler.model").to_str().unwrap()]);
    assert_eq!(ok.exit_code, 0);
}

#[test]
fn infinite_algebras_need_truncation() {
    let path = corpus("derivation_enveloping.model");
    let out = run(&["hopf-check", path.to_str().unwrap()]);
    assert_eq!(out.exit_code, 2);
    assert!(out.stderr.contains("--truncate"), "{}", out.stderr);
    let out = run(&["hopf-check", path.to_str().unwrap(), "--truncate", "4"]);
    assert_eq!(out.exit_code, 0);
    assert!(out.stdout.contains("CAVEAT"), "{}", out.stdout);
}

#[test]
fn bracket_in_the_presented_algebra() {
    let path = corpus("ternary_enveloping.model");
    let out = run(&["bracket", path.to_str().unwrap(), "--zeta", "z^1@3", "--args", "x,x,y"]);
    assert!(out.stdout.contains("IN presentation [x,x,y] = 2*x^2*y + 2*x*y*x + 2*y*x^2\n"), "{}", out.stdout);
    assert!(out.stdout.contains("IN lie [x,x,y] = z (declared)\n"), "{}", out.stdout);
}

#[test]
fn corpus_matches_stored_outputs() {
    let out = run(&["paper-examples", "--corpus", corpus("").to_str().unwrap()]);
    assert_eq!(out.exit_code, 0, "{}", out.stdout);
    assert!(out.stdout.ends_with("SUMMARY checks=11 failures=0\n"), "{}", out.stdout);
}
