//! Random bibliographic records drawn from shipped word lists.

use std::sync::OnceLock;

use rand_chacha::ChaCha8Rng;

use crate::rng::{below, seeded, unit};

use super::record::{BibRecord, ContainerKind, Pages, Person};

struct Lists {
    given: Vec<&'static str>,
    family: Vec<&'static str>,
    words: Vec<&'static str>,
    small: Vec<&'static str>,
    journals: Vec<&'static str>,
    proceedings: Vec<&'static str>,
    publishers: Vec<&'static str>,
    cities: Vec<&'static str>,
    institutions: Vec<&'static str>,
    notes: Vec<&'static str>,
    urls: Vec<&'static str>,
}

fn lines(text: &'static str) -> Vec<&'static str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn lists() -> &'static Lists {
    static LISTS: OnceLock<Lists> = OnceLock::new();
    LISTS.get_or_init(|| Lists {
        given: lines(include_str!("../../data/synth/given.txt")),
        family: lines(include_str!("../../data/synth/family.txt")),
        words: lines(include_str!("../../data/synth/title_words.txt")),
        small: lines(include_str!("../../data/synth/title_small.txt")),
        journals: lines(include_str!("../../data/synth/journals.txt")),
        proceedings: lines(include_str!("../../data/synth/proceedings.txt")),
        publishers: lines(include_str!("../../data/synth/publishers.txt")),
        cities: lines(include_str!("../../data/synth/cities.txt")),
        institutions: lines(include_str!("../../data/synth/institutions.txt")),
        notes: lines(include_str!("../../data/synth/notes.txt")),
        urls: lines(include_str!("../../data/synth/url_hosts.txt")),
    })
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items[below(rng, items.len() as u64) as usize]
}

fn chance(rng: &mut ChaCha8Rng, p: f64) -> bool {
    unit(rng) < p
}

fn range(rng: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    lo + below(rng, hi - lo + 1)
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn phrase(rng: &mut ChaCha8Rng, l: &Lists, words: u64, title_case: bool) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..words {
        if i > 0 && i + 1 < words && chance(rng, 0.3) {
            out.push(pick(rng, &l.small).to_string());
        }
        let w = pick(rng, &l.words);
        out.push(if title_case || out.is_empty() { capitalize(w) } else { w.to_string() });
    }
    out
}

fn title(rng: &mut ChaCha8Rng, l: &Lists) -> String {
    let title_case = chance(rng, 0.5);
    let n = range(rng, 2, 8);
    let mut t = phrase(rng, l, n, title_case).join(" ");
    if chance(rng, 0.25) {
        let n = range(rng, 2, 5);
        t.push_str(": ");
        t.push_str(&phrase(rng, l, n, title_case).join(" "));
    } else if chance(rng, 0.05) {
        t.push('?');
    }
    t
}

fn person(rng: &mut ChaCha8Rng, l: &Lists) -> Person {
    let given = if chance(rng, 0.03) { "" } else { pick(rng, &l.given) };
    Person::new(given, pick(rng, &l.family))
}

fn author_count(rng: &mut ChaCha8Rng) -> usize {
    const CUMULATIVE: [f64; 8] = [0.25, 0.50, 0.70, 0.82, 0.90, 0.95, 0.98, 1.0];
    let u = unit(rng);
    CUMULATIVE.iter().position(|&c| u < c).unwrap_or(7) + 1
}

fn editors(rng: &mut ChaCha8Rng, l: &Lists) -> String {
    let n = range(rng, 1, 3) as usize;
    let names: Vec<String> = (0..n)
        .map(|_| {
            let g = pick(rng, &l.given);
            let initial: String = g.chars().take(1).collect();
            format!("{initial}. {}", pick(rng, &l.family))
        })
        .collect();
    match names.len() {
        1 => names[0].clone(),
        _ => format!("{} and {}", names[..names.len() - 1].join(", "), names[names.len() - 1]),
    }
}

fn url(rng: &mut ChaCha8Rng, l: &Lists) -> String {
    let host = pick(rng, &l.urls);
    format!("{host}{}", range(rng, 1000, 9_999_999))
}

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October", "November",
    "December",
];

/// Fills `{slot}` placeholders in a note template.
fn note(rng: &mut ChaCha8Rng, l: &Lists) -> String {
    let template = pick(rng, &l.notes);
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("unclosed note slot");
        let value = match &rest[open + 1..close] {
            "year" => range(rng, 1900, 2024).to_string(),
            "month" => MONTHS[below(rng, 12) as usize].to_string(),
            "day" => range(rng, 1, 28).to_string(),
            "city" => pick(rng, &l.cities).to_string(),
            "journal" => pick(rng, &l.journals).to_string(),
            "proceedings" => pick(rng, &l.proceedings).to_string(),
            "person" => {
                let p = person(rng, l);
                format!("{} {}", p.given, p.family).trim().to_string()
            }
            "title" => title(rng, l),
            other => panic!("unknown note slot {other}"),
        };
        out.push_str(&value);
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

fn record(rng: &mut ChaCha8Rng) -> BibRecord {
    let l = lists();
    let authors = (0..author_count(rng)).map(|_| person(rng, l)).collect();
    let title = title(rng, l);
    let year = range(rng, 1960, 2024) as i32;
    let journal = chance(rng, 0.6);
    let pages = |rng: &mut ChaCha8Rng| {
        // Log-uniform: most articles start on low page numbers.
        let first = (2000f64.powf(unit(rng)) as u64).max(1);
        Pages {
            first: first.to_string(),
            last: chance(rng, 0.8).then(|| (first + range(rng, 1, 35)).to_string()),
        }
    };
    let mut r = if journal {
        let mut r = BibRecord::article(authors, title, pick(rng, &l.journals), year);
        r.volume = chance(rng, 0.9).then(|| range(rng, 1, 120).to_string());
        r.issue = chance(rng, 0.65).then(|| range(rng, 1, 12).to_string());
        r.pages = chance(rng, 0.9).then(|| pages(rng));
        r
    } else {
        let mut r = BibRecord::article(authors, title, pick(rng, &l.proceedings), year);
        r.container_kind = ContainerKind::Proceedings;
        r.volume = chance(rng, 0.1).then(|| range(rng, 1, 3000).to_string());
        r.pages = chance(rng, 0.85).then(|| pages(rng));
        r.editors = chance(rng, 0.45).then(|| editors(rng, l));
        r.publisher = chance(rng, 0.6).then(|| pick(rng, &l.publishers).to_string());
        r.location = chance(rng, 0.55).then(|| pick(rng, &l.cities).to_string());
        r
    };
    r.institution = chance(rng, 0.12).then(|| pick(rng, &l.institutions).to_string());
    r.note = chance(rng, 0.15).then(|| note(rng, l));
    r.url = chance(rng, 0.15).then(|| url(rng, l));
    r
}

/// `n` random records, a pure function of `(n, seed)`.
pub fn random_records(n: usize, seed: u64) -> Vec<BibRecord> {
    let mut rng = seeded(seed);
    (0..n).map(|_| record(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_valid_and_deterministic() {
        let a = random_records(300, 5);
        assert_eq!(a, random_records(300, 5));
        assert_ne!(a, random_records(300, 6));
        for r in &a {
            r.validate().unwrap();
        }
        assert!(a.iter().any(|r| r.container_kind == ContainerKind::Proceedings));
        assert!(a.iter().any(|r| r.location.is_some() && r.note.is_some() || r.institution.is_some()));
    }

    #[test]
    fn note_templates_expand_fully() {
        let mut rng = seeded(11);
        let notes: Vec<String> = (0..2000).map(|_| note(&mut rng, lists())).collect();
        assert!(notes.iter().all(|n| !n.contains('{') && !n.contains('}') && !n.is_empty()));
        assert!(notes.iter().any(|n| n.starts_with("Accessed") && n.chars().any(|c| c.is_ascii_digit())));
    }
}
