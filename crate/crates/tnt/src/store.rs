//! Single-file text serialization of a trained model.
//!
//! ```text
//! tnt-model 1
//! #SECTION config        key<TAB>value...
//! #SECTION lexicon       word<TAB>total<TAB>tag<TAB>count[<TAB>tag<TAB>count]...
//! #SECTION ngrams        tag<TAB>f / <TAB>tag<TAB>f / <TAB><TAB>tag<TAB>f
//! #SECTION suffix-lower  suffix<TAB>tag<TAB>count
//! #SECTION suffix-upper  suffix<TAB>tag<TAB>count
//! #END <sections> <fnv1a-64 of everything above, hex>
//! ```
//!
//! Only integer counts plus the interpolation weights and θ are stored;
//! probabilities are recomputed on load. Every section is sorted, so the
//! output is byte-identical for equal models.
//!
//! In the n-gram section a capitalized composite state is written as its
//! tag followed by `\c`, and backslashes inside tags are doubled. In suffix
//! sections the empty suffix is written `\e`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tnt_core::ngram::{LexEntry, TagId};
use tnt_core::{
    InterpolationWeights, NGramCounts, State, SuffixModel, SuffixTrie, Tag, TaggerConfig,
    TaggerModel, ThetaMode, TieBreak,
};

use crate::error::{parse_error, Error, Result};

pub const MAGIC: &str = "tnt-model";
pub const VERSION: u32 = 1;

const SECTIONS: [&str; 5] = ["config", "lexicon", "ngrams", "suffix-lower", "suffix-upper"];

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape_tag(tag: &str) -> String {
    tag.replace('\\', "\\\\")
}

fn state_label(counts: &NGramCounts, s: State) -> String {
    match s {
        State::Bos => "<BOS>".into(),
        State::Eos => "<EOS>".into(),
        State::Tag { tag, capitalized } => {
            let mut label = escape_tag(counts.tag(tag).as_str());
            if capitalized {
                label.push_str("\\c");
            }
            label
        }
    }
}

fn escape_suffix(s: &str) -> String {
    if s.is_empty() {
        "\\e".into()
    } else {
        s.replace('\\', "\\\\")
    }
}

fn unescape_suffix(s: &str) -> Option<String> {
    if s == "\\e" {
        return Some(String::new());
    }
    let mut out = String::new();
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('\\') => out.push('\\'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// Writes the nested n-gram table, with labels sorted at every level.
pub fn write_ngrams(counts: &NGramCounts) -> String {
    let label = |s| state_label(counts, s);
    let mut bigrams: BTreeMap<State, Vec<(State, u64)>> = BTreeMap::new();
    for (&(a, b), &f) in counts.bigrams() {
        bigrams.entry(a).or_default().push((b, f));
    }
    let mut trigrams: BTreeMap<(State, State), Vec<(State, u64)>> = BTreeMap::new();
    for (&(a, b, c), &f) in counts.trigrams() {
        trigrams.entry((a, b)).or_default().push((c, f));
    }
    let sorted = |v: &[(State, u64)]| {
        let mut v: Vec<(String, State, u64)> = v.iter().map(|&(s, f)| (label(s), s, f)).collect();
        v.sort();
        v
    };
    let unigrams: Vec<(State, u64)> = counts.unigrams().iter().map(|(&s, &f)| (s, f)).collect();
    let mut out = String::new();
    for (l1, s1, f1) in sorted(&unigrams) {
        let _ = writeln!(out, "{l1}\t{f1}");
        for (l2, s2, f2) in sorted(bigrams.get(&s1).map_or(&[][..], Vec::as_slice)) {
            let _ = writeln!(out, "\t{l2}\t{f2}");
            for (l3, _, f3) in sorted(trigrams.get(&(s1, s2)).map_or(&[][..], Vec::as_slice)) {
                let _ = writeln!(out, "\t\t{l3}\t{f3}");
            }
        }
    }
    out
}

/// Serializes a model to its text form.
pub fn to_string(model: &TaggerModel) -> String {
    let counts = model.counts();
    let config = model.config();
    let w = model.weights();
    let mut out = format!("{MAGIC} {VERSION}\n");

    out.push_str("#SECTION config\n");
    let tags: Vec<&str> = counts.tags().iter().map(Tag::as_str).collect();
    let _ = writeln!(out, "tagset\t{}", tags.join("\t"));
    let _ = writeln!(out, "capitalization\t{}", config.capitalization);
    let _ = writeln!(out, "tokens\t{}", counts.total());
    let _ = writeln!(
        out,
        "beam_theta\t{}",
        config.beam_theta.map_or("off".into(), float)
    );
    let _ = writeln!(out, "max_suffix\t{}", config.max_suffix);
    let _ = writeln!(out, "suffix_freq\t{}", config.suffix_freq_threshold);
    let _ = writeln!(
        out,
        "unknown_candidates\t{}",
        config.unknown_candidates.map_or("off".into(), |c| c.to_string())
    );
    let _ = writeln!(
        out,
        "tie_break\t{}",
        match config.tie_break {
            TieBreak::HigherOrder => "higher-order",
            TieBreak::LowerOrder => "lower-order",
        }
    );
    let _ = writeln!(
        out,
        "theta_mode\t{}",
        match config.theta_mode {
            ThetaMode::Printed => "printed",
            ThetaMode::Sqrt => "sqrt",
        }
    );
    let _ = writeln!(out, "lambda1\t{}", float(w.lambda1));
    let _ = writeln!(out, "lambda2\t{}", float(w.lambda2));
    let _ = writeln!(out, "lambda3\t{}", float(w.lambda3));
    let _ = writeln!(out, "theta\t{}", float(model.suffix_model().theta()));

    out.push_str("#SECTION lexicon\n");
    for (word, entry) in counts.lexicon() {
        let _ = write!(out, "{word}\t{}", entry.total);
        for &(t, c) in &entry.tags {
            let _ = write!(out, "\t{}\t{c}", counts.tag(t));
        }
        out.push('\n');
    }

    out.push_str("#SECTION ngrams\n");
    out.push_str(&write_ngrams(counts));

    for (name, trie) in [
        ("suffix-lower", model.suffix_model().lower()),
        ("suffix-upper", model.suffix_model().upper()),
    ] {
        let _ = writeln!(out, "#SECTION {name}");
        for (suffix, tag, count) in trie.entries() {
            let _ = writeln!(out, "{}\t{}\t{count}", escape_suffix(&suffix), counts.tag(tag));
        }
    }

    let _ = writeln!(out, "#END {} {:016x}", SECTIONS.len(), fnv1a(out.as_bytes()));
    out
}

/// Writes a model file and returns the number of bytes written.
pub fn save(model: &TaggerModel, path: impl AsRef<Path>) -> Result<usize> {
    let text = to_string(model);
    fs::write(path, &text)?;
    Ok(text.len())
}

pub fn load(path: impl AsRef<Path>) -> Result<TaggerModel> {
    from_str(&fs::read_to_string(path)?)
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn parse_u64(s: &str, line: usize) -> Result<u64> {
    s.parse()
        .map_err(|_| parse_error(line, format!("expected a non-negative integer, found {s:?}")))
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse()
        .map_err(|_| parse_error(line, format!("expected a number, found {s:?}")))
}

/// Parses a model from its text form. Either a complete model is returned or
/// an error; nothing is partially built.
pub fn from_str(text: &str) -> Result<TaggerModel> {
    let mut lines = text.split('\n');
    let header = lines.next().unwrap_or("");
    let version = header
        .strip_prefix(MAGIC)
        .and_then(|v| v.strip_prefix(' '))
        .ok_or_else(|| parse_error(1, format!("expected `{MAGIC} {VERSION}` header")))?;
    if version != VERSION.to_string() {
        return Err(Error::UnsupportedVersion(version.to_string()));
    }

    // Integrity check before any parsing.
    let end_at = text
        .rfind("\n#END ")
        .ok_or_else(|| Error::Corrupt("missing end marker".into()))?;
    let end_line = text[end_at + 1..].trim_end_matches('\n');
    if end_line.contains('\n') {
        return Err(Error::Corrupt("data after end marker".into()));
    }
    let mut end = end_line.split(' ').skip(1);
    let (Some(n), Some(sum), None) = (end.next(), end.next(), end.next()) else {
        return Err(Error::Corrupt("malformed end marker".into()));
    };
    if n != SECTIONS.len().to_string() {
        return Err(Error::Corrupt(format!(
            "expected {} sections, end marker says {n}",
            SECTIONS.len()
        )));
    }
    if format!("{:016x}", fnv1a(&text.as_bytes()[..end_at + 1])) != sum {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }

    let body = &text[..end_at + 1];
    let mut sections: Vec<(&str, Vec<Line>)> = Vec::new();
    for (i, line) in body.split('\n').enumerate().skip(1) {
        let no = i + 1;
        if let Some(name) = line.strip_prefix("#SECTION ") {
            sections.push((name, Vec::new()));
        } else if line.is_empty() && no == body.split('\n').count() {
            // Trailing newline before the end marker.
        } else {
            let Some((_, current)) = sections.last_mut() else {
                return Err(parse_error(no, "content before the first section"));
            };
            current.push(Line { no, text: line });
        }
    }
    let names: Vec<&str> = sections.iter().map(|(n, _)| *n).collect();
    if names != SECTIONS {
        return Err(Error::Corrupt(format!(
            "expected sections {SECTIONS:?}, found {names:?}"
        )));
    }
    let mut sections = sections.into_iter().map(|(_, l)| l);
    let config_lines = sections.next().unwrap();
    let lexicon_lines = sections.next().unwrap();
    let ngram_lines = sections.next().unwrap();
    let lower_lines = sections.next().unwrap();
    let upper_lines = sections.next().unwrap();

    let header = parse_config(&config_lines)?;
    let tag_id = |name: &str, line: usize| -> Result<TagId> {
        header
            .tags
            .binary_search_by(|t| t.as_str().cmp(name))
            .map(|i| TagId(i as u32))
            .map_err(|_| parse_error(line, format!("unknown tag {name:?}")))
    };

    let mut lexicon = BTreeMap::new();
    for line in &lexicon_lines {
        let f: Vec<&str> = line.text.split('\t').collect();
        if f.len() < 4 || !f.len().is_multiple_of(2) {
            return Err(parse_error(line.no, "malformed lexicon line"));
        }
        let total = parse_u64(f[1], line.no)?;
        let mut tags = Vec::new();
        for pair in f[2..].chunks(2) {
            tags.push((tag_id(pair[0], line.no)?, parse_u64(pair[1], line.no)?));
        }
        if lexicon
            .insert(f[0].to_string(), LexEntry { total, tags })
            .is_some()
        {
            return Err(parse_error(line.no, format!("duplicate word {:?}", f[0])));
        }
    }

    let (unigrams, bigrams, trigrams) = parse_ngram_lines(&ngram_lines, &header.tags)?;
    let counts = NGramCounts::from_tables(
        header.tags.clone(),
        unigrams,
        bigrams,
        trigrams,
        lexicon,
        header.config.capitalization,
    )?;
    if counts.total() != header.tokens {
        return Err(Error::Corrupt(format!(
            "header says {} tokens, lexicon holds {}",
            header.tokens,
            counts.total()
        )));
    }

    let trie = |lines: &[Line]| -> Result<SuffixTrie> {
        let mut entries = Vec::with_capacity(lines.len());
        for line in lines {
            let f: Vec<&str> = line.text.split('\t').collect();
            let [suffix, tag, count] = f[..] else {
                return Err(parse_error(line.no, "expected `suffix<TAB>tag<TAB>count`"));
            };
            let suffix = unescape_suffix(suffix)
                .ok_or_else(|| parse_error(line.no, format!("bad suffix escape {suffix:?}")))?;
            entries.push((suffix, tag_id(tag, line.no)?, parse_u64(count, line.no)?));
        }
        Ok(SuffixTrie::from_entries(entries)?)
    };
    let suffix = SuffixModel::from_parts(
        &counts,
        trie(&lower_lines)?,
        trie(&upper_lines)?,
        header.theta,
        header.config.max_suffix,
        header.config.suffix_freq_threshold,
    )?;
    Ok(TaggerModel::from_parts(counts, header.weights, suffix, header.config)?)
}

struct Header {
    tags: Vec<Tag>,
    tokens: u64,
    config: TaggerConfig,
    weights: InterpolationWeights,
    theta: f64,
}

fn parse_config(lines: &[Line]) -> Result<Header> {
    let mut map: BTreeMap<&str, (usize, Vec<&str>)> = BTreeMap::new();
    for line in lines {
        let mut f = line.text.split('\t');
        let key = f.next().unwrap_or("");
        if map.insert(key, (line.no, f.collect())).is_some() {
            return Err(parse_error(line.no, format!("duplicate key {key:?}")));
        }
    }
    let mut take = |key: &str| -> Result<(usize, Vec<&str>)> {
        map.remove(key)
            .ok_or_else(|| Error::Corrupt(format!("config is missing {key:?}")))
    };
    let single = |(no, v): (usize, Vec<&str>)| -> Result<(usize, String)> {
        match v[..] {
            [x] => Ok((no, x.to_string())),
            _ => Err(parse_error(no, "expected exactly one value")),
        }
    };

    let (no, tag_names) = take("tagset")?;
    let tags = tag_names
        .iter()
        .map(|t| Tag::new(*t).map_err(|e| parse_error(no, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (no, v) = single(take("capitalization")?)?;
    let capitalization = v
        .parse::<bool>()
        .map_err(|_| parse_error(no, "capitalization must be true or false"))?;
    let (no, v) = single(take("tokens")?)?;
    let tokens = parse_u64(&v, no)?;
    let (no, v) = single(take("beam_theta")?)?;
    let beam_theta = if v == "off" { None } else { Some(parse_f64(&v, no)?) };
    let (no, v) = single(take("max_suffix")?)?;
    let max_suffix = parse_u64(&v, no)? as usize;
    let (no, v) = single(take("suffix_freq")?)?;
    let suffix_freq_threshold = parse_u64(&v, no)?;
    let (no, v) = single(take("unknown_candidates")?)?;
    let unknown_candidates = if v == "off" {
        None
    } else {
        Some(parse_u64(&v, no)? as usize)
    };
    let (no, v) = single(take("tie_break")?)?;
    let tie_break = match v.as_str() {
        "higher-order" => TieBreak::HigherOrder,
        "lower-order" => TieBreak::LowerOrder,
        _ => return Err(parse_error(no, format!("unknown tie_break {v:?}"))),
    };
    let (no, v) = single(take("theta_mode")?)?;
    let theta_mode = match v.as_str() {
        "printed" => ThetaMode::Printed,
        "sqrt" => ThetaMode::Sqrt,
        _ => return Err(parse_error(no, format!("unknown theta_mode {v:?}"))),
    };
    let mut lambda = [0.0; 3];
    for (i, key) in ["lambda1", "lambda2", "lambda3"].iter().enumerate() {
        let (no, v) = single(take(key)?)?;
        lambda[i] = parse_f64(&v, no)?;
    }
    let (no, v) = single(take("theta")?)?;
    let theta = parse_f64(&v, no)?;
    if let Some((key, (no, _))) = map.into_iter().next() {
        return Err(parse_error(no, format!("unknown config key {key:?}")));
    }
    let config = TaggerConfig {
        beam_theta,
        max_suffix,
        suffix_freq_threshold,
        tie_break,
        theta_mode,
        capitalization,
        unknown_candidates,
    };
    config.validate()?;
    Ok(Header {
        tags,
        tokens,
        config,
        weights: InterpolationWeights::new(lambda[0], lambda[1], lambda[2])?,
        theta,
    })
}

type Tables = (
    BTreeMap<State, u64>,
    BTreeMap<(State, State), u64>,
    BTreeMap<(State, State, State), u64>,
);

fn parse_state(label: &str, tags: &[Tag], line: usize) -> Result<State> {
    match label {
        "<BOS>" => return Ok(State::Bos),
        "<EOS>" => return Ok(State::Eos),
        _ => {}
    }
    let mut name = String::new();
    let mut capitalized = false;
    let mut chars = label.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            name.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => name.push('\\'),
            Some('c') if chars.peek().is_none() => capitalized = true,
            _ => return Err(parse_error(line, format!("bad escape in state {label:?}"))),
        }
    }
    let i = tags
        .binary_search_by(|t| t.as_str().cmp(&name))
        .map_err(|_| parse_error(line, format!("unknown tag {name:?}")))?;
    Ok(State::Tag {
        tag: TagId(i as u32),
        capitalized,
    })
}

/// Parses the nested n-gram table written by [`write_ngrams`].
pub fn parse_ngrams(text: &str, tags: &[Tag]) -> Result<Tables> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .map(|(i, text)| Line { no: i + 1, text })
        .collect();
    parse_ngram_lines(&lines, tags)
}

fn parse_ngram_lines(lines: &[Line], tags: &[Tag]) -> Result<Tables> {
    let mut uni = BTreeMap::new();
    let mut bi = BTreeMap::new();
    let mut tri = BTreeMap::new();
    let mut s1 = None;
    let mut s2 = None;
    for line in lines {
        let depth = line.text.chars().take_while(|&c| c == '\t').count();
        let f: Vec<&str> = line.text[depth..].split('\t').collect();
        let [label, count] = f[..] else {
            return Err(parse_error(line.no, "expected `label<TAB>count`"));
        };
        let state = parse_state(label, tags, line.no)?;
        let count = parse_u64(count, line.no)?;
        let fresh = match depth {
            0 => {
                s1 = Some(state);
                s2 = None;
                uni.insert(state, count).is_none()
            }
            1 => {
                let a = s1.ok_or_else(|| parse_error(line.no, "bigram without a unigram"))?;
                s2 = Some(state);
                bi.insert((a, state), count).is_none()
            }
            2 => {
                let (a, b) = s1
                    .zip(s2)
                    .ok_or_else(|| parse_error(line.no, "trigram without a bigram"))?;
                tri.insert((a, b, state), count).is_none()
            }
            _ => return Err(parse_error(line.no, "too deeply nested")),
        };
        if !fresh {
            return Err(parse_error(line.no, format!("duplicate n-gram {label:?}")));
        }
    }
    Ok((uni, bi, tri))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_tagged;
    use crate::FIXTURE_A;

    fn fixture_model() -> TaggerModel {
        TaggerModel::assemble(&parse_tagged(FIXTURE_A).unwrap(), TaggerConfig::default()).unwrap()
    }

    #[test]
    fn deterministic_and_round_trips() {
        let m = fixture_model();
        let a = to_string(&m);
        assert_eq!(a, to_string(&fixture_model()));
        assert!(a.starts_with("tnt-model 1\n"));
        let back = from_str(&a).unwrap();
        assert_eq!(back.counts(), m.counts());
        assert_eq!(back.weights(), m.weights());
        assert_eq!(back.suffix_model(), m.suffix_model());
        assert_eq!(back.config(), m.config());
        assert_eq!(to_string(&back), a);
    }

    #[test]
    fn header_lambdas_sum_to_one() {
        let text = to_string(&fixture_model());
        let sum: f64 = text
            .lines()
            .filter(|l| l.starts_with("lambda"))
            .map(|l| l.split('\t').nth(1).unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fixture_ngram_section() {
        let m = fixture_model();
        let text = write_ngrams(m.counts());
        assert!(text.starts_with("<BOS>\t2\n\t<BOS>\t2\n\t\tDT\t2\n\tDT\t2\n\t\tNN\t2\n"));
        let (u, b, t) = parse_ngrams(&text, m.tags()).unwrap();
        assert_eq!(&u, m.counts().unigrams());
        assert_eq!(&b, m.counts().bigrams());
        assert_eq!(&t, m.counts().trigrams());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let text = to_string(&fixture_model());
        for cut in [text.len() / 3, text.len() / 2, text.len() - 2] {
            assert!(from_str(&text[..cut]).is_err());
        }
        let err = from_str(&text[..text.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::Corrupt(_)), "{err}");
    }

    #[test]
    fn unsupported_version() {
        let text = to_string(&fixture_model()).replacen("tnt-model 1", "tnt-model 2", 1);
        assert!(matches!(from_str(&text), Err(Error::UnsupportedVersion(v)) if v == "2"));
        assert!(matches!(from_str("hello"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn corrupted_content_is_rejected() {
        let text = to_string(&fixture_model()).replace("dog\t1\tNN\t1", "dog\t1\tNN\t2");
        assert!(matches!(from_str(&text), Err(Error::Corrupt(_))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        // Re-seal a file with a bad lexicon line so the checksum passes.
        let text = to_string(&fixture_model());
        let body = &text[..text.rfind("#END").unwrap()];
        let broken = body.replace("dog\t1\tNN\t1", "dog\t1\tNN");
        let resealed = format!("{broken}#END 5 {:016x}\n", fnv1a(broken.as_bytes()));
        let line = broken.lines().position(|l| l == "dog\t1\tNN").unwrap() + 1;
        match from_str(&resealed) {
            Err(Error::Parse { line: got, .. }) => assert_eq!(got, line),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn escapes() {
        assert_eq!(escape_suffix(""), "\\e");
        assert_eq!(unescape_suffix("\\e").unwrap(), "");
        assert_eq!(unescape_suffix(&escape_suffix("a\\b")).unwrap(), "a\\b");
        assert!(unescape_suffix("\\x").is_none());
        let tags = vec![Tag::new("A\\c").unwrap(), Tag::new("B").unwrap()];
        assert_eq!(
            parse_state("A\\\\c", &tags, 1).unwrap(),
            State::Tag { tag: TagId(0), capitalized: false }
        );
        assert_eq!(
            parse_state("B\\c", &tags, 1).unwrap(),
            State::Tag { tag: TagId(1), capitalized: true }
        );
    }
}
