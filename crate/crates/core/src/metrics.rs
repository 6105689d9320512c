//! Precision, recall and F1 per field, with micro and macro averages, at token
//! and field granularity.
//!
//! Token level compares the field of every token (B and I collapsed). Field
//! level derives segments on both sides; a predicted segment counts as correct
//! when its normalized text equals that of a not-yet-matched gold segment of
//! the same field in the same reference (greedy, left to right). Fields outside
//! the evaluation universe are treated as `O` on both sides. A zero
//! denominator gives 0. Macro averages run over fields with gold support.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::label::{FieldLabel, LabelSet, TokenTag};
use crate::reference::{normalize_segment_text, segments_from_tags, LabeledReference};

pub const CSV_VERSION_LINE: &str = "# citecrf-eval-v1";
pub const CSV_HEADER: &str = "level,field,precision,recall,f1,support,tp,fp,fn";

const NF: usize = FieldLabel::ALL.len();

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1_score(self.precision(), self.recall())
    }

    /// Gold items: `tp + fn`.
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }

    fn add(&mut self, o: &Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScore {
    pub field: FieldLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    /// Universe fields that occur in gold or predictions, canonical order.
    pub fields: Vec<FieldScore>,
    pub micro: Counts,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl LevelReport {
    fn from_counts(universe: LabelSet, per_field: &[Counts; NF]) -> Self {
        let mut fields = Vec::new();
        let mut micro = Counts::default();
        for f in universe.iter() {
            let c = per_field[f.index()];
            micro.add(&c);
            if c.tp + c.fp + c.fn_ > 0 {
                fields.push(FieldScore {
                    field: f,
                    precision: c.precision(),
                    recall: c.recall(),
                    f1: c.f1(),
                    support: c.support(),
                    counts: c,
                });
            }
        }
        let supported: Vec<&FieldScore> = fields.iter().filter(|s| s.support > 0).collect();
        let mean = |g: fn(&FieldScore) -> f64| {
            if supported.is_empty() {
                0.0
            } else {
                supported.iter().map(|s| g(s)).sum::<f64>() / supported.len() as f64
            }
        };
        LevelReport {
            micro_precision: micro.precision(),
            micro_recall: micro.recall(),
            micro_f1: micro.f1(),
            macro_precision: mean(|s| s.precision),
            macro_recall: mean(|s| s.recall),
            macro_f1: mean(|s| s.f1),
            fields,
            micro,
        }
    }

    pub fn score(&self, field: FieldLabel) -> Option<&FieldScore> {
        self.fields.iter().find(|s| s.field == field)
    }

    /// F1 of `field`, 0 when the field has no row.
    pub fn f1(&self, field: FieldLabel) -> f64 {
        self.score(field).map_or(0.0, |s| s.f1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub universe: LabelSet,
    pub instances: usize,
    pub token: LevelReport,
    pub field: LevelReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Token,
    Field,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Token => "token",
            Level::Field => "field",
        }
    }
}

fn check_alignment(gold: &[LabeledReference], pred: &[Vec<TokenTag>]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Structural(format!(
            "{} gold instances but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Structural(format!(
                "instance {i}: {} gold tokens but {} predicted tags",
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

fn in_universe(tag: TokenTag, universe: LabelSet) -> Option<FieldLabel> {
    tag.field().filter(|f| universe.contains(*f))
}

fn merge(mut a: [Counts; NF], b: [Counts; NF]) -> [Counts; NF] {
    for (x, y) in a.iter_mut().zip(&b) {
        x.add(y);
    }
    a
}

fn token_counts(gold: &LabeledReference, pred: &[TokenTag], universe: LabelSet) -> [Counts; NF] {
    let mut c = [Counts::default(); NF];
    for (&g, &p) in gold.tags().iter().zip(pred) {
        let (g, p) = (in_universe(g, universe), in_universe(p, universe));
        match (g, p) {
            (Some(g), Some(p)) if g == p => c[g.index()].tp += 1,
            _ => {
                if let Some(p) = p {
                    c[p.index()].fp += 1;
                }
                if let Some(g) = g {
                    c[g.index()].fn_ += 1;
                }
            }
        }
    }
    c
}

fn field_counts(i: usize, gold: &LabeledReference, pred: &[TokenTag], universe: LabelSet) -> Result<[Counts; NF]> {
    let pred_segments = segments_from_tags(pred, gold.tokens())
        .map_err(|e| Error::Structural(format!("instance {i}: predicted tags: {e}")))?;
    let mut c = [Counts::default(); NF];
    let mut gold_texts: Vec<(FieldLabel, String, bool)> = gold
        .segments()
        .into_iter()
        .filter(|s| universe.contains(s.field))
        .map(|s| (s.field, normalize_segment_text(&s.text), false))
        .collect();
    for s in pred_segments.iter().filter(|s| universe.contains(s.field)) {
        let text = normalize_segment_text(&s.text);
        match gold_texts.iter_mut().find(|(f, t, used)| !*used && *f == s.field && *t == text) {
            Some(entry) => {
                entry.2 = true;
                c[s.field.index()].tp += 1;
            }
            None => c[s.field.index()].fp += 1,
        }
    }
    for (f, _, used) in &gold_texts {
        if !used {
            c[f.index()].fn_ += 1;
        }
    }
    Ok(c)
}

pub fn token_report(gold: &Corpus, pred: &[Vec<TokenTag>]) -> Result<LevelReport> {
    Ok(evaluate(gold, pred)?.token)
}

pub fn field_report(gold: &Corpus, pred: &[Vec<TokenTag>]) -> Result<LevelReport> {
    Ok(evaluate(gold, pred)?.field)
}

/// Both levels over the gold corpus's declared labels.
pub fn evaluate(gold: &Corpus, pred: &[Vec<TokenTag>]) -> Result<EvalReport> {
    evaluate_within(gold, pred, gold.labels())
}

/// Both levels, restricted to `universe`.
pub fn evaluate_within(gold: &Corpus, pred: &[Vec<TokenTag>], universe: LabelSet) -> Result<EvalReport> {
    let refs = gold.instances();
    check_alignment(refs, pred)?;
    let zero = || ([Counts::default(); NF], [Counts::default(); NF]);
    let (tok, fld) = refs
        .par_iter()
        .zip(pred.par_iter())
        .enumerate()
        .map(|(i, (g, p))| Ok((token_counts(g, p, universe), field_counts(i, g, p, universe)?)))
        .try_fold(zero, |(ta, fa), r: Result<_>| r.map(|(t, f)| (merge(ta, t), merge(fa, f))))
        .try_reduce(zero, |(ta, fa), (tb, fb)| Ok((merge(ta, tb), merge(fa, fb))))?;
    Ok(EvalReport {
        universe,
        instances: refs.len(),
        token: LevelReport::from_counts(universe, &tok),
        field: LevelReport::from_counts(universe, &fld),
    })
}

/// `(a − b) / b`, or `None` when `b = 0`.
pub fn relative_change(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        None
    } else {
        Some((a - b) / b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub a: f64,
    pub b: f64,
    pub absolute: f64,
    pub relative: Option<f64>,
}

impl Delta {
    pub fn new(a: f64, b: f64) -> Self {
        Delta {
            a,
            b,
            absolute: a - b,
            relative: relative_change(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelComparison {
    pub fields: Vec<(FieldLabel, Delta)>,
    pub micro_f1: Delta,
    pub macro_f1: Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub token: LevelComparison,
    pub field: LevelComparison,
}

fn compare_level(universe: LabelSet, a: &LevelReport, b: &LevelReport) -> LevelComparison {
    let fields = universe
        .iter()
        .filter(|f| a.score(*f).is_some() || b.score(*f).is_some())
        .map(|f| (f, Delta::new(a.f1(f), b.f1(f))))
        .collect();
    LevelComparison {
        fields,
        micro_f1: Delta::new(a.micro_f1, b.micro_f1),
        macro_f1: Delta::new(a.macro_f1, b.macro_f1),
    }
}

/// Per-field and aggregate F1 deltas of `a` relative to `b`.
pub fn compare_reports(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    if a.universe != b.universe {
        return Err(Error::Usage(format!(
            "reports cover different fields ({} vs {})",
            a.universe, b.universe
        )));
    }
    Ok(Comparison {
        token: compare_level(a.universe, &a.token, &b.token),
        field: compare_level(a.universe, &a.field, &b.field),
    })
}

pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:.6}")
}

fn csv_rows(out: &mut String, level: Level, r: &LevelReport) {
    let l = level.as_str();
    for s in &r.fields {
        let _ = writeln!(
            out,
            "{l},{},{},{},{},{},{},{},{}",
            s.field,
            fmt_num(s.precision),
            fmt_num(s.recall),
            fmt_num(s.f1),
            s.support,
            s.counts.tp,
            s.counts.fp,
            s.counts.fn_
        );
    }
    let _ = writeln!(
        out,
        "{l},_micro,{},{},{},{},{},{},{}",
        fmt_num(r.micro_precision),
        fmt_num(r.micro_recall),
        fmt_num(r.micro_f1),
        r.micro.support(),
        r.micro.tp,
        r.micro.fp,
        r.micro.fn_
    );
    let _ = writeln!(
        out,
        "{l},_macro,{},{},{},{},,,",
        fmt_num(r.macro_precision),
        fmt_num(r.macro_recall),
        fmt_num(r.macro_f1),
        r.micro.support()
    );
}

impl EvalReport {
    pub fn level(&self, level: Level) -> &LevelReport {
        match level {
            Level::Token => &self.token,
            Level::Field => &self.field,
        }
    }

    /// Versioned CSV: one row per field and level, then `_micro` and `_macro`
    /// rows. Values carry six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_VERSION_LINE}\n{CSV_HEADER}\n");
        csv_rows(&mut out, Level::Token, &self.token);
        csv_rows(&mut out, Level::Field, &self.field);
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{} instances, fields: {}\n", self.instances, self.universe);
        for level in [Level::Field, Level::Token] {
            let r = self.level(level);
            let _ = writeln!(out, "\n{:<12} {:>9} {:>9} {:>9} {:>8}", format!("[{}]", level.as_str()), "precision", "recall", "f1", "support");
            for s in &r.fields {
                let _ = writeln!(out, "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>8}", s.field.as_str(), s.precision, s.recall, s.f1, s.support);
            }
            let _ = writeln!(out, "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>8}", "micro", r.micro_precision, r.micro_recall, r.micro_f1, r.micro.support());
            let _ = writeln!(out, "{:<12} {:>9.4} {:>9.4} {:>9.4}", "macro", r.macro_precision, r.macro_recall, r.macro_f1);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::TokenizerConfig;

    fn corpus(lines: &[(&str, &[(FieldLabel, std::ops::Range<usize>)])]) -> Corpus {
        let cfg = TokenizerConfig::default();
        Corpus::inferred(
            "t",
            lines
                .iter()
                .map(|(raw, spans)| LabeledReference::from_spans(*raw, spans, &cfg).unwrap())
                .collect(),
        )
    }

    #[test]
    fn perfect_prediction() {
        let g = corpus(&[("Smith 2015", &[(FieldLabel::Author, 0..5), (FieldLabel::Date, 6..10)])]);
        let pred: Vec<Vec<TokenTag>> = g.instances().iter().map(|r| r.tags().to_vec()).collect();
        let r = evaluate(&g, &pred).unwrap();
        assert_eq!(r.token.micro_f1, 1.0);
        assert_eq!(r.field.macro_f1, 1.0);
    }

    #[test]
    fn all_o_scores_zero() {
        let g = corpus(&[("Smith 2015", &[(FieldLabel::Author, 0..5), (FieldLabel::Date, 6..10)])]);
        let pred = vec![vec![TokenTag::O; 2]];
        let r = evaluate(&g, &pred).unwrap();
        for s in &r.token.fields {
            assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        }
        assert_eq!(r.field.macro_f1, 0.0);
    }

    #[test]
    fn misaligned_is_structural() {
        let g = corpus(&[("Smith 2015", &[])]);
        assert!(matches!(evaluate(&g, &[vec![TokenTag::O]]), Err(Error::Structural(_))));
        assert!(matches!(evaluate(&g, &[]), Err(Error::Structural(_))));
    }

    #[test]
    fn paper_relative_changes() {
        assert!((relative_change(0.93, 0.69).unwrap() - 0.3478).abs() < 1e-4);
        assert!((relative_change(0.84, 0.74).unwrap() - 0.1351).abs() < 1e-4);
        assert_eq!(relative_change(1.0, 0.0), None);
    }

    #[test]
    fn csv_is_versioned() {
        let g = corpus(&[("Smith 2015", &[(FieldLabel::Author, 0..5)])]);
        let pred = vec![g.instances()[0].tags().to_vec()];
        let csv = evaluate(&g, &pred).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(csv.contains("field,author,1.000000,1.000000,1.000000,1,1,0,0"));
    }
}
