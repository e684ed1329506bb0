use exactlp::corpus::hilbert_lp;
use exactlp::io::json::{ResultDocument, RESULT_SCHEMA};
use exactlp::rational::parse_rational;
use exactlp::{solve_exact, Mode, RationalLp, SolveConfig, SparseRationalMatrix};

fn lp(a: &[&[&str]], b: &[&str], c: &[&str]) -> RationalLp {
    let q = |s: &&str| parse_rational(s).unwrap();
    let dense: Vec<Vec<_>> = a.iter().map(|r| r.iter().map(q).collect()).collect();
    let zeros = vec![parse_rational("0").unwrap(); c.len()];
    RationalLp::new(SparseRationalMatrix::from_dense(&dense), b.iter().map(q).collect(), c.iter().map(q).collect(), zeros).unwrap()
}

#[test]
fn documents_validate_against_shipped_schema() {
    let schema: serde_json::Value = serde_json::from_str(RESULT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let cases = [
        (lp(&[&["3"]], &["1"], &["1"]), Mode::IrBoosting, "optimal"),
        (lp(&[&["1"]], &["-1"], &["1"]), Mode::IrBoosting, "infeasible"),
        (lp(&[&["1", "-1"]], &["1"], &["-1", "0"]), Mode::IrBoosting, "unbounded"),
        (hilbert_lp(8, 2), Mode::IrDouble, "failure"),
    ];
    for (lp, mode, status) in cases {
        let doc = ResultDocument::new(&solve_exact(&lp, &SolveConfig::with_mode(mode)), None);
        assert_eq!(doc.status, status);
        let value: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{status}: {errors:?}");
        if let Some(obj) = &doc.objective {
            assert_eq!(parse_rational(obj).unwrap().to_string(), obj.as_str());
        }
    }
}

#[test]
fn schema_rejects_float_objectives() {
    let schema: serde_json::Value = serde_json::from_str(RESULT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let bad = serde_json::json!({"status": "optimal", "objective": 0.333, "stats": {
        "boosts": 0, "precision_final": 64, "refinement_rounds": 1, "pivots_initial": 0, "pivots_boosted": 0
    }});
    assert!(!validator.is_valid(&bad));
}
