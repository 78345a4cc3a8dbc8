//! Line-oriented text formats: tagged corpora (`token<TAB>tag`, blank line
//! between sentences), untagged input, and tagger output.

use std::fmt::Write as _;

use tnt_core::{split_untagged, Tag, TaggedCorpus, TaggedOutput, TaggedSentence, TaggedToken, TaggerModel};

use crate::error::{parse_error, Result};

/// Parses a tagged corpus. Blank lines separate sentences; a final sentence
/// without a trailing blank line is kept.
pub fn parse_tagged(text: &str) -> Result<TaggedCorpus> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if !tokens.is_empty() {
                sentences.push(TaggedSentence {
                    tokens: std::mem::take(&mut tokens),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [word, tag] = fields[..] else {
            return Err(parse_error(
                lineno,
                format!("expected `token<TAB>tag`, found {} field(s)", fields.len()),
            ));
        };
        let tag = Tag::new(tag).map_err(|e| parse_error(lineno, e.to_string()))?;
        let token = TaggedToken::new(word, tag).map_err(|e| parse_error(lineno, e.to_string()))?;
        tokens.push(token);
    }
    if !tokens.is_empty() {
        sentences.push(TaggedSentence { tokens });
    }
    Ok(TaggedCorpus::new(sentences)?)
}

/// Writes a corpus in the format read by [`parse_tagged`].
pub fn write_tagged(corpus: &TaggedCorpus) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.sentences().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for t in &sentence.tokens {
            let _ = writeln!(out, "{}\t{}", t.surface, t.tag);
        }
    }
    out
}

/// Splits untagged input into sentences.
///
/// If the text contains blank lines between tokens, each blank-line
/// separated block is one sentence. Otherwise the whole text is a raw token
/// stream and sentences end after `.`, `!`, `?` or `;`.
pub fn parse_untagged(text: &str) -> Vec<Vec<String>> {
    let blocks: Vec<Vec<String>> = text
        .split('\n')
        .collect::<Vec<_>>()
        .split(|line| line.trim().is_empty())
        .map(|block| {
            block
                .iter()
                .flat_map(|l| l.split_whitespace())
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .filter(|b| !b.is_empty())
        .collect();
    if blocks.len() > 1 {
        blocks
    } else {
        split_untagged(text)
    }
}

/// Formats a reliability quotient: `inf` for infinity, otherwise a decimal.
pub fn format_quotient(q: f64) -> String {
    if q.is_infinite() {
        "inf".to_string()
    } else if q >= 1e6 {
        format!("{q:.6e}")
    } else {
        format!("{q:.6}")
    }
}

/// Writes tagged sentences as `token<TAB>tag`, with a third quotient column
/// when `reliability` is set. Sentences are separated by a blank line.
pub fn write_output(
    model: &TaggerModel,
    sentences: &[Vec<String>],
    outputs: &[TaggedOutput],
    reliability: bool,
) -> String {
    let mut out = String::new();
    for (i, (words, output)) in sentences.iter().zip(outputs).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (word, token) in words.iter().zip(&output.tokens) {
            let tag = model.tag(token.tag);
            match (reliability, token.quotient) {
                (true, Some(q)) => {
                    let _ = writeln!(out, "{word}\t{tag}\t{}", format_quotient(q));
                }
                _ => {
                    let _ = writeln!(out, "{word}\t{tag}");
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::FIXTURE_A;

    #[test]
    fn fixture_parses() {
        let c = parse_tagged(FIXTURE_A).unwrap();
        assert_eq!(c.sentences().len(), 2);
        assert_eq!(c.token_count(), 8);
        let tags: Vec<&str> = c.tagset().iter().map(|t| t.as_str()).collect();
        assert_eq!(tags, ["DT", "NN", "SENT", "VB"]);
    }

    #[test]
    fn empty_input() {
        let c = parse_tagged("").unwrap();
        assert!(c.is_empty());
        assert_eq!(c.token_count(), 0);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_tagged("a\tX\nthe DT NN\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_tagged("a\tX\n\nb\tY\tZ\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let err = parse_tagged("a\t<BOS>\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_tagged("a b\tX\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_tagged("a\tX Y\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unterminated_final_sentence_and_extra_blanks() {
        let c = parse_tagged("\n\na\tX\n\n\n\nb\tY").unwrap();
        assert_eq!(c.sentences().len(), 2);
    }

    #[test]
    fn write_then_parse() {
        let c = parse_tagged(FIXTURE_A).unwrap();
        assert_eq!(write_tagged(&c), FIXTURE_A);
        assert_eq!(parse_tagged(&write_tagged(&c)).unwrap(), c);
    }

    #[test]
    fn untagged_blocks_or_stream() {
        assert_eq!(
            parse_untagged("the dog barks . the cat sleeps ."),
            vec![vec!["the", "dog", "barks", "."], vec!["the", "cat", "sleeps", "."]]
        );
        assert_eq!(
            parse_untagged("a\nb\n\nc\nd\n"),
            vec![vec!["a", "b"], vec!["c", "d"]]
        );
        // One block and no terminator: a single sentence.
        assert_eq!(parse_untagged("a\nb\n"), vec![vec!["a", "b"]]);
        assert!(parse_untagged("\n\n").is_empty());
    }

    #[test]
    fn quotient_formatting() {
        assert_eq!(format_quotient(f64::INFINITY), "inf");
        assert_eq!(format_quotient(1.0), "1.000000");
        assert_eq!(format_quotient(2.5e7), "2.500000e7");
    }
}
