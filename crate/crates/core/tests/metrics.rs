mod common;

use citecrf_core::metrics::{compare_reports, evaluate, evaluate_within, relative_change};
use citecrf_core::{FieldLabel, LabelSet};
use common::{fixture, read_pair};

#[test]
fn basic_fixture_matches_hand_counts() {
    let (gold, pred) = read_pair("metrics/basic.gold.xml", "metrics/basic.pred.xml");
    let r = evaluate(&gold, &pred).unwrap();
    assert_eq!(r.field.micro_precision, 0.75);
    assert_eq!(r.field.micro_recall, 0.6);
    assert_eq!((r.field.micro.tp, r.field.micro.fp, r.field.micro.fn_), (3, 1, 2));
    let expected = std::fs::read_to_string(fixture("metrics/basic.expected.csv")).unwrap();
    assert_eq!(r.to_csv(), expected);
}

#[test]
fn unsupported_field_counts_in_micro_not_macro() {
    let (gold, pred) = read_pair("metrics/unsupported.gold.xml", "metrics/unsupported.pred.xml");
    let r = evaluate(&gold, &pred).unwrap();
    let expected = std::fs::read_to_string(fixture("metrics/unsupported.expected.csv")).unwrap();
    assert_eq!(r.to_csv(), expected);
    assert_eq!(r.field.macro_f1, 1.0);
    assert!(r.field.micro_f1 < 1.0);
}

#[test]
fn fields_outside_universe_are_ignored() {
    let (gold, pred) = read_pair("metrics/unsupported.gold.xml", "metrics/unsupported.pred.xml");
    let universe: LabelSet = [FieldLabel::Author, FieldLabel::Title, FieldLabel::Date].into_iter().collect();
    let r = evaluate_within(&gold, &pred, universe).unwrap();
    assert_eq!(r.field.micro_f1, 1.0);
    assert_eq!(r.token.micro_f1, 1.0);
    assert!(r.field.score(FieldLabel::Journal).is_none());
}

#[test]
fn perfect_prediction_scores_one() {
    let (gold, _) = read_pair("metrics/basic.gold.xml", "metrics/basic.pred.xml");
    let pred: Vec<_> = gold.instances().iter().map(|r| r.tags().to_vec()).collect();
    let r = evaluate(&gold, &pred).unwrap();
    for level in [&r.token, &r.field] {
        assert_eq!((level.micro_f1, level.macro_f1), (1.0, 1.0));
    }
}

#[test]
fn relative_changes_reproduce_reported_arithmetic() {
    let a = relative_change(0.93, 0.69).unwrap();
    assert!((a - 0.3478).abs() < 1e-4);
    assert!((a - 0.35).abs() <= 0.005);
    let b = relative_change(0.84, 0.74).unwrap();
    assert!((b - 0.135).abs() <= 0.0005);
    assert_eq!(relative_change(0.5, 0.0), None);
}

#[test]
fn compare_reports_uses_macro_f1() {
    let (gold, pred) = read_pair("metrics/basic.gold.xml", "metrics/basic.pred.xml");
    let base = evaluate(&gold, &pred).unwrap();
    let mut hi = base.clone();
    let mut lo = base.clone();
    hi.field.macro_f1 = 0.84;
    lo.field.macro_f1 = 0.74;
    let c = compare_reports(&hi, &lo).unwrap();
    assert!((c.field.macro_f1.absolute - 0.10).abs() < 1e-12);
    assert!((c.field.macro_f1.relative.unwrap() - 0.1351).abs() < 1e-4);

    let mut other = base.clone();
    other.universe = other.universe.without(FieldLabel::Date);
    assert!(compare_reports(&base, &other).is_err());
}
