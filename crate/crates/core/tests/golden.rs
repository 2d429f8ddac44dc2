//! The two seven-vertex planar reference instances, on both backends.

mod common;

use common::*;
use lateration_stress::framework::{check_general_position, GeneralPositionMode};
use lateration_stress::graph::{is_dplus1_tree, Graph};
use lateration_stress::numerics::{self, Rational, Scalar, Tolerances};
use lateration_stress::stress::{
    compute_stress_matrix, pre_stress, verify_stress, ColumnOutcome, LaterationContext, StepAction, StressOptions,
};

const TOL: f64 = 1e-4;

fn first_example<T: Scalar>() {
    let f = fixture("ex1.json");
    let ctx = LaterationContext::<T>::new(&f, &StressOptions::default()).unwrap();
    let l = ctx.gale_matrix().unwrap();
    compare(&l, EX1_L, Printed::Exact, TOL).unwrap();
    let s7 = pre_stress(&l);
    compare(&s7, EX1_S7, Printed::Exact, TOL).unwrap();
    let out = compute_stress_matrix::<T>(&f, &StressOptions::default()).unwrap();
    assert_eq!(out.trace.modifications(), 0);
    compare(&out.stress, EX1_S7, Printed::Exact, TOL).unwrap();
    assert!(out.report.unwrap().passed());
}

#[test]
fn first_example_rational() {
    first_example::<Rational>();
}

#[test]
fn first_example_float() {
    first_example::<f64>();
}

fn second_example<T: Scalar>() {
    let f = fixture("ex2.json");
    let ctx = LaterationContext::<T>::new(&f, &StressOptions::default()).unwrap();
    let l = ctx.gale_matrix().unwrap();
    compare(&l, EX2_L, Printed::Exact, TOL).unwrap();
    let mut s = pre_stress(&l);
    compare(&s, EX2_S7, Printed::Exact, TOL).unwrap();

    assert_eq!(ctx.purify_column(&mut s, 6, true).unwrap(), ColumnOutcome::Skipped);
    let ColumnOutcome::Modified { s: s6 } = ctx.purify_column(&mut s, 5, true).unwrap() else {
        panic!("position 6 must be modified")
    };
    compare_vec(&s6, EX2_S6_VEC, Printed::Exact, TOL).unwrap();
    compare(&s, EX2_S5, Printed::Rounded, TOL).unwrap();
    let ColumnOutcome::Modified { s: s5 } = ctx.purify_column(&mut s, 4, true).unwrap() else {
        panic!("position 5 must be modified")
    };
    compare_vec(&s5, EX2_S5_VEC, Printed::Rounded, TOL).unwrap();
    compare(&s, EX2_S4, Printed::Rounded, TOL).unwrap();

    let out = compute_stress_matrix::<T>(&f, &StressOptions::default()).unwrap();
    assert_eq!(
        out.trace.summary(),
        vec![(7, StepAction::Skip), (6, StepAction::Modify), (5, StepAction::Modify)]
    );
    assert_eq!(out.stress, s);
    let report = out.report.unwrap();
    assert!(report.passed());
    assert_eq!(report.rank, 4);
}

#[test]
fn second_example_rational() {
    second_example::<Rational>();
}

#[test]
fn second_example_float() {
    second_example::<f64>();
}

#[test]
fn second_example_prestress_fails_offedge_check() {
    let f = fixture("ex2.json");
    let ctx = LaterationContext::<Rational>::new(&f, &StressOptions::default()).unwrap();
    let s7 = pre_stress(&ctx.gale_matrix().unwrap());
    let r = verify_stress(&s7, &f, &Tolerances::default()).unwrap();
    assert!(r.null_ok && r.psd_ok && r.rank_ok);
    assert!(!r.offedge_ok);
    assert_eq!(r.first_offedge, Some((1, 6)));
    assert_eq!(s7[(0, 5)], rational("0.9375"));
}

#[test]
fn reference_ranks_and_psd_agree_across_backends() {
    let tol = Tolerances::default();
    for name in ["ex1.json", "ex2.json"] {
        let f = fixture(name);
        let exact = compute_stress_matrix::<Rational>(&f, &StressOptions::default()).unwrap().stress;
        let float = compute_stress_matrix::<f64>(&f, &StressOptions::default()).unwrap().stress;
        assert_eq!(numerics::rank(&exact, &tol), 4);
        assert_eq!(numerics::rank(&float, &tol), 4);
        assert_eq!(oracle_rank(&exact), 4);
        assert!(numerics::psd_check(&exact, &tol).unwrap().psd);
        assert!(numerics::psd_check(&float, &tol).unwrap().psd);
        assert!(oracle_psd(&exact));
        assert!(oracle_eigenvalues(&float)[0] > -1e-9);
    }
}

#[test]
fn reference_instances_are_in_general_position() {
    for name in ["ex1.json", "ex2.json"] {
        assert!(check_general_position(&fixture(name), GeneralPositionMode::Full).general);
    }
}

#[test]
fn tree_structure_of_reference_instances() {
    let id: Vec<usize> = (0..7).collect();
    let f1 = fixture("ex1.json");
    let f2 = fixture("ex2.json");
    assert!(is_dplus1_tree(&Graph::new(7, f1.edges()), &id, 2));
    assert!(!is_dplus1_tree(&Graph::new(7, f2.edges()), &id, 2));
}

#[test]
fn first_example_extended_matrix() {
    let a = fixture("ex1.json").extended_matrix::<Rational>();
    assert_eq!((a.rows(), a.cols()), (3, 7));
    assert!(a.row(2).iter().all(|x| *x == Rational::from_i64(1)));
    assert_eq!(a[(1, 2)], rational("1/2"));
}
