use std::collections::HashSet;

use citecrf_core::corpus::{parse_conll, parse_inline_xml, read_corpus, to_conll_string, to_inline_xml_string, write_corpus};
use citecrf_core::synthgen::{builtin_styles, generate_corpus, random_records, GenerateOptions};
use citecrf_core::{Corpus, Error, FieldLabel, LabelSet, LabeledReference, TokenizerConfig};
use proptest::prelude::*;

fn generated(n: usize, seed: u64, per_author: bool) -> Corpus {
    let records = random_records(n.max(10), seed);
    let opts = GenerateOptions {
        per_author,
        ..GenerateOptions::default()
    };
    Corpus::inferred("g", generate_corpus(&records, &builtin_styles(), n, seed, &opts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn formats_round_trip(seed in any::<u64>(), n in 1usize..60, per_author in any::<bool>()) {
        let c = generated(n, seed, per_author);
        let cfg = TokenizerConfig::default();
        let xml = to_inline_xml_string(&c).unwrap();
        let back = parse_inline_xml(&xml, "g", &cfg).unwrap();
        prop_assert_eq!(back.instances(), c.instances());
        prop_assert_eq!(back.labels(), c.labels());

        let conll = to_conll_string(&c).unwrap();
        let back = parse_conll(&conll, "g").unwrap();
        prop_assert_eq!(back.instances(), c.instances());
        prop_assert_eq!(back.labels(), c.labels());
    }

    #[test]
    fn split_partitions_and_sample_nests(seed in any::<u64>(), n in 2usize..80, ratio in 0.05f64..0.95) {
        let c = generated(n, seed ^ 1, false);
        let (tr, ev) = c.split(ratio, seed).unwrap();
        prop_assert_eq!(tr.len() + ev.len(), c.len());
        prop_assert_eq!(tr.len(), (ratio * n as f64 + 1e-9).floor() as usize);
        let mut all: Vec<&str> = tr.instances().iter().chain(ev.instances()).map(LabeledReference::raw).collect();
        let mut orig: Vec<&str> = c.instances().iter().map(LabeledReference::raw).collect();
        all.sort_unstable();
        orig.sort_unstable();
        prop_assert_eq!(all, orig);

        let k = 1 + n / 3;
        let small = c.sample(k, seed).unwrap();
        let big = c.sample(n, seed).unwrap();
        prop_assert_eq!(&big.instances()[..k], small.instances());
        if !tr.is_empty() {
            prop_assert_eq!(&big.instances()[..tr.len()], tr.instances());
        }
    }
}

#[test]
fn special_characters_survive() {
    let cfg = TokenizerConfig::default();
    let text = "<author>O'Brien &amp; Co</author>, <title>x &lt; y &gt; z \"q\"</title>\n";
    let c = parse_inline_xml(text, "s", &cfg).unwrap();
    assert_eq!(c.instances()[0].raw(), "O'Brien & Co, x < y > z \"q\"");
    let again = parse_inline_xml(&to_inline_xml_string(&c).unwrap(), "s", &cfg).unwrap();
    assert_eq!(again.instances(), c.instances());
    let conll = parse_conll(&to_conll_string(&c).unwrap(), "s").unwrap();
    assert_eq!(conll.instances(), c.instances());
}

#[test]
fn files_dispatch_on_extension() {
    let dir = tempfile::tempdir().unwrap();
    let c = generated(25, 9, false);
    for name in ["c.xml", "c.txt", "c.conll", "c.tsv", "nested/dir/c.xml"] {
        let path = dir.path().join(name);
        write_corpus(&c, &path).unwrap();
        let back = read_corpus(&path).unwrap();
        assert_eq!(back.instances(), c.instances(), "{name}");
        assert_eq!(back.name(), "c");
    }
    let conll = std::fs::read_to_string(dir.path().join("c.conll")).unwrap();
    assert!(conll.contains("\tB-"));
    let xml = std::fs::read_to_string(dir.path().join("c.xml")).unwrap();
    assert_eq!(xml.lines().count(), 25);
}

#[test]
fn declared_labels_survive_without_support() {
    let cfg = TokenizerConfig::default();
    let c = parse_inline_xml("#labels: author,title,note\n<author>A. B</author> x\n", "d", &cfg).unwrap();
    assert!(c.labels().contains(FieldLabel::Note));
    let text = to_inline_xml_string(&c).unwrap();
    assert!(text.starts_with("#labels: author,title,note\n"));
    assert_eq!(parse_inline_xml(&text, "d", &cfg).unwrap().labels(), c.labels());
    assert_eq!(parse_conll(&to_conll_string(&c).unwrap(), "d").unwrap().labels(), c.labels());
}

#[test]
fn malformed_input_is_data_error_with_line() {
    let cfg = TokenizerConfig::default();
    for (text, line) in [
        ("<author>x</author>\n<title>y</author>\n", "line 2"),
        ("ok\n\n<bogus>y</bogus>\n", "line 3"),
        ("<title>a <author>b</author></title>\n", "line 1"),
        ("<title>never closed\n", "line 1"),
    ] {
        match parse_inline_xml(text, "m", &cfg) {
            Err(Error::Data(m)) => assert!(m.contains(line), "{m}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
    match parse_conll("#labels: author\n\nA\tB-author\nB\tI-title\n", "m") {
        Err(Error::Data(m)) => assert!(m.contains("line 3"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn filter_fields_relabels_to_outside() {
    let c = generated(200, 21, false);
    let drop: LabelSet = [FieldLabel::Location, FieldLabel::Note, FieldLabel::Institution].into_iter().collect();
    let keep = c.labels().difference(drop);
    let f = c.filter_fields(keep).unwrap();
    assert_eq!(f.labels(), keep);
    for (a, b) in c.instances().iter().zip(f.instances()) {
        assert_eq!(a.tokens(), b.tokens());
        for (x, y) in a.tags().iter().zip(b.tags()) {
            match x.field() {
                Some(field) if drop.contains(field) => assert!(y.field().is_none()),
                _ => assert_eq!(x, y),
            }
        }
    }
    assert!(c.filter_fields(LabelSet::empty()).is_err());
}

#[test]
fn split_and_sample_preconditions() {
    let c = generated(10, 1, false);
    assert!(matches!(c.split(0.0, 1), Err(Error::Usage(_))));
    assert!(matches!(c.split(1.0, 1), Err(Error::Usage(_))));
    assert!(matches!(c.sample(11, 1), Err(Error::Usage(_))));
    assert!(matches!(c.sample(0, 1), Err(Error::Usage(_))));
    let all = c.sample(10, 3).unwrap();
    let raws: HashSet<&str> = all.instances().iter().map(|r| r.raw()).collect();
    assert_eq!(raws, c.instances().iter().map(|r| r.raw()).collect::<HashSet<_>>());
}
