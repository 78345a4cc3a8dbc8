//! Generates the bundled sample corpus `data/sample.tt`.
//!
//! The text is synthetic English with Penn-Treebank-style tags, produced by
//! a small phrase grammar over a Zipf-weighted vocabulary. It has the
//! properties a tagger evaluation needs: ambiguous words (noun/verb forms,
//! `that`, `like`, `back`, past tense vs participle), a long tail of rare and
//! unseen words built from productive suffixes, proper names, numbers and
//! sentence-initial capitalization.
//!
//! ```text
//! cargo run -p tnt --example make_sample_corpus -- [OUTPUT] [SENTENCES] [SEED]
//! ```

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Pool {
    words: Vec<(String, &'static str)>,
    weights: WeightedIndex<f64>,
}

impl Pool {
    /// Rank `r` gets weight `1 / (r + 1)^s`.
    fn new(words: Vec<(String, &'static str)>, s: f64) -> Pool {
        let weights = WeightedIndex::new((0..words.len()).map(|r| 1.0 / ((r + 1) as f64).powf(s))).unwrap();
        Pool { words, weights }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (String, &'static str) {
        self.words[self.weights.sample(rng)].clone()
    }
}

fn tagged(words: &[&str], tag: &'static str) -> Vec<(String, &'static str)> {
    words.iter().map(|w| (w.to_string(), tag)).collect()
}

const ONSETS: &[&str] = &["b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "br", "cr", "pl", "st", "tr"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "n", "r", "l", "s", "t", "m"];

fn stem(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    for _ in 0..rng.random_range(2..=3) {
        s.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
        s.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
    }
    s.push_str(CODAS[rng.random_range(0..CODAS.len())]);
    s
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Regular inflection: (third person, past, gerund).
fn inflect(base: &str) -> (String, String, String) {
    let s = if base.ends_with('s') || base.ends_with("sh") || base.ends_with("ch") {
        format!("{base}es")
    } else {
        format!("{base}s")
    };
    let (ed, ing) = match base.strip_suffix('e') {
        Some(b) => (format!("{base}d"), format!("{b}ing")),
        None => (format!("{base}ed"), format!("{base}ing")),
    };
    (s, ed, ing)
}

fn plural(noun: &str) -> String {
    if let Some(b) = noun.strip_suffix('y') {
        format!("{b}ies")
    } else if noun.ends_with('s') || noun.ends_with("sh") || noun.ends_with("ch") {
        format!("{noun}es")
    } else {
        format!("{noun}s")
    }
}

struct Lexicon {
    dt: Pool,
    jj: Pool,
    nn: Pool,
    nns: Pool,
    nnp: Pool,
    vb: Pool,
    vbz: Pool,
    vbd: Pool,
    vbn: Pool,
    vbg: Pool,
    md: Pool,
    inp: Pool,
    rb: Pool,
    prp: Pool,
    cc: Pool,
}

fn build_lexicon(rng: &mut ChaCha8Rng) -> Lexicon {
    let nouns = [
        "market", "company", "year", "price", "share", "rate", "government", "plan", "work", "report",
        "increase", "stock", "month", "business", "bank", "group", "week", "interest", "sale", "cost",
        "offer", "change", "control", "issue", "trade", "deal", "fund", "program", "board", "official",
        "investor", "analyst", "unit", "firm", "industry", "loss", "profit", "estimate", "system", "quarter",
        "rise", "bid", "court", "law", "policy", "city", "state", "country", "week", "power",
    ];
    let verbs = [
        "report", "increase", "work", "plan", "expect", "share", "offer", "change", "control", "trade",
        "estimate", "rise", "bid", "show", "add", "help", "need", "continue", "include", "approve",
        "close", "open", "move", "call", "agree", "decline", "acquire", "reduce", "receive", "consider",
        "cost", "issue", "support", "question", "return", "fund", "like", "back",
    ];
    let irregular = [
        ("say", "says", "said", "said", "saying"),
        ("make", "makes", "made", "made", "making"),
        ("sell", "sells", "sold", "sold", "selling"),
        ("buy", "buys", "bought", "bought", "buying"),
        ("take", "takes", "took", "taken", "taking"),
        ("fall", "falls", "fell", "fallen", "falling"),
        ("get", "gets", "got", "gotten", "getting"),
        ("see", "sees", "saw", "seen", "seeing"),
        ("give", "gives", "gave", "given", "giving"),
        ("hold", "holds", "held", "held", "holding"),
    ];
    let adjectives = [
        "new", "big", "small", "old", "good", "early", "long", "major", "economic", "political",
        "federal", "financial", "high", "low", "recent", "foreign", "large", "public", "strong", "last",
        "net", "current", "common", "similar", "back", "like", "that", "close", "open", "total",
    ];

    // Rare tail: synthetic words with productive endings.
    let mut rare_nouns = Vec::new();
    let mut rare_adjs = Vec::new();
    let mut rare_verbs = Vec::new();
    let mut rare_names = Vec::new();
    let mut rare_advs = Vec::new();
    for _ in 0..900 {
        let s = stem(rng);
        match rng.random_range(0..5) {
            0 => rare_nouns.push(format!("{s}{}", ["tion", "ment", "ness", "ity", "er", "ism"][rng.random_range(0..6)])),
            1 => {
                let adj = format!("{s}{}", ["ous", "ive", "able", "al", "ic", "ful"][rng.random_range(0..6)]);
                if rng.random_bool(0.3) {
                    rare_advs.push(format!("{adj}ly"));
                }
                rare_adjs.push(adj);
            }
            2 => rare_verbs.push(format!("{s}{}", ["ize", "ate", "ify", "en"][rng.random_range(0..4)])),
            _ => rare_names.push(capitalize(&s)),
        }
    }

    let mut nn = tagged(&nouns, "NN");
    nn.extend(tagged(&rare_nouns.iter().map(String::as_str).collect::<Vec<_>>(), "NN"));
    let nns: Vec<_> = nn.iter().map(|(w, _)| (plural(w), "NNS")).collect();

    let mut jj = tagged(&adjectives, "JJ");
    jj.extend(rare_adjs.iter().map(|w| (w.clone(), "JJ")));

    let mut nnp = tagged(
        &["Mr.", "John", "Mary", "Smith", "Boston", "Texas", "Japan", "Corp.", "Inc.", "New", "York", "Jones", "Brown", "Street", "Wall", "Ms.", "London", "Bush"],
        "NNP",
    );
    nnp.extend(rare_names.iter().map(|w| (w.clone(), "NNP")));

    let (mut vb, mut vbz, mut vbd, mut vbn, mut vbg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut push = |b: String, s: String, d: String, n: String, g: String| {
        vb.push((b, "VB"));
        vbz.push((s, "VBZ"));
        vbd.push((d, "VBD"));
        vbn.push((n, "VBN"));
        vbg.push((g, "VBG"));
    };
    for (b, s, d, n, g) in irregular {
        push(b.into(), s.into(), d.into(), n.into(), g.into());
    }
    for v in verbs.iter().map(|v| v.to_string()).chain(rare_verbs) {
        let (s, d, g) = inflect(&v);
        push(v, s, d.clone(), d, g);
    }

    let mut rb = tagged(
        &["also", "not", "still", "only", "back", "recently", "now", "already", "about", "just", "very", "so", "more", "yet", "far"],
        "RB",
    );
    rb.extend(rare_advs.iter().map(|w| (w.clone(), "RB")));

    Lexicon {
        dt: Pool::new(tagged(&["the", "a", "an", "this", "that", "these", "some", "every", "no", "any", "each"], "DT"), 1.3),
        jj: Pool::new(jj, 1.0),
        nn: Pool::new(nn, 1.0),
        nns: Pool::new(nns, 1.0),
        nnp: Pool::new(nnp, 0.9),
        vb: Pool::new(vb, 1.0),
        vbz: Pool::new(vbz, 1.0),
        vbd: Pool::new(vbd, 1.0),
        vbn: Pool::new(vbn, 1.0),
        vbg: Pool::new(vbg, 1.0),
        md: Pool::new(tagged(&["will", "would", "could", "may", "can", "should", "might"], "MD"), 1.0),
        inp: Pool::new(
            tagged(&["of", "in", "for", "on", "with", "at", "by", "from", "that", "like", "about", "after", "into", "than"], "IN"),
            1.1,
        ),
        rb: Pool::new(rb, 1.1),
        prp: Pool::new(tagged(&["it", "he", "they", "we", "she", "I", "you"], "PRP"), 1.1),
        cc: Pool::new(tagged(&["and", "but", "or"], "CC"), 1.2),
    }
}

type Sentence = Vec<(String, &'static str)>;

struct Generator {
    lex: Lexicon,
    rng: ChaCha8Rng,
}

impl Generator {
    fn emit(&mut self, out: &mut Sentence, pool: fn(&Lexicon) -> &Pool) {
        let w = pool(&self.lex).draw(&mut self.rng);
        out.push(w);
    }

    fn lit(out: &mut Sentence, word: &str, tag: &'static str) {
        out.push((word.to_string(), tag));
    }

    fn number(&mut self, out: &mut Sentence) {
        let n = match self.rng.random_range(0..4) {
            0 => format!("{}", self.rng.random_range(1..100)),
            1 => format!("{}.{}", self.rng.random_range(1..50), self.rng.random_range(1..10)),
            2 => format!("{}", self.rng.random_range(1980..2000)),
            _ => format!("{},{:03}", self.rng.random_range(1..100), self.rng.random_range(0..1000)),
        };
        out.push((n, "CD"));
    }

    fn noun_phrase(&mut self, out: &mut Sentence, subject: bool) {
        match self.rng.random_range(0..100) {
            0..=44 => {
                self.emit(out, |l| &l.dt);
                for _ in 0..self.rng.random_range(0..=2).min(self.rng.random_range(0..=2)) {
                    self.emit(out, |l| &l.jj);
                }
                if self.rng.random_bool(0.15) {
                    self.emit(out, |l| &l.nn);
                }
                self.emit(out, |l| &l.nn);
            }
            45..=59 => {
                if self.rng.random_bool(0.4) {
                    self.emit(out, |l| &l.jj);
                }
                self.emit(out, |l| &l.nns);
            }
            60..=74 => {
                for _ in 0..self.rng.random_range(1..=2) {
                    self.emit(out, |l| &l.nnp);
                }
            }
            75..=84 if subject => self.emit(out, |l| &l.prp),
            75..=84 => {
                self.emit(out, |l| &l.dt);
                self.emit(out, |l| &l.nns);
            }
            _ => {
                self.number(out);
                self.emit(out, |l| &l.nns);
            }
        }
        match self.rng.random_range(0..100) {
            0..=19 => {
                self.emit(out, |l| &l.inp);
                self.noun_phrase_simple(out);
            }
            // Reduced relative: past participle right after the noun.
            20..=27 => {
                self.emit(out, |l| &l.vbn);
                Self::lit(out, "by", "IN");
                self.noun_phrase_simple(out);
            }
            28..=32 => {
                Self::lit(out, "that", "WDT");
                self.emit(out, |l| &l.vbd);
                self.noun_phrase_simple(out);
            }
            _ => {}
        }
    }

    fn noun_phrase_simple(&mut self, out: &mut Sentence) {
        if self.rng.random_bool(0.7) {
            self.emit(out, |l| &l.dt);
            if self.rng.random_bool(0.3) {
                self.emit(out, |l| &l.jj);
            }
            self.emit(out, |l| &l.nn);
        } else if self.rng.random_bool(0.5) {
            self.emit(out, |l| &l.nnp);
        } else {
            self.emit(out, |l| &l.nns);
        }
    }

    fn verb_phrase(&mut self, out: &mut Sentence, depth: usize) {
        match self.rng.random_range(0..100) {
            0..=24 => {
                self.emit(out, |l| &l.vbd);
                self.noun_phrase(out, false);
            }
            25..=39 => {
                self.emit(out, |l| &l.vbz);
                self.noun_phrase(out, false);
            }
            40..=52 => {
                self.emit(out, |l| &l.md);
                if self.rng.random_bool(0.2) {
                    Self::lit(out, "not", "RB");
                }
                self.emit(out, |l| &l.vb);
                self.noun_phrase(out, false);
            }
            53..=62 => {
                self.emit(out, |l| &l.vbd);
                Self::lit(out, "to", "TO");
                self.emit(out, |l| &l.vb);
                self.noun_phrase_simple(out);
            }
            63..=71 => {
                let (w, t) = [("is", "VBZ"), ("was", "VBD"), ("are", "VBP")][self.rng.random_range(0..3)];
                Self::lit(out, w, t);
                self.emit(out, |l| &l.vbg);
                self.noun_phrase_simple(out);
            }
            72..=80 => {
                let (w, t) = [("has", "VBZ"), ("have", "VBP"), ("had", "VBD")][self.rng.random_range(0..3)];
                Self::lit(out, w, t);
                self.emit(out, |l| &l.vbn);
                self.noun_phrase(out, false);
            }
            81..=88 if depth == 0 => {
                let said = [("said", "VBD"), ("says", "VBZ"), ("expects", "VBZ"), ("reported", "VBD")];
                let (w, t) = said[self.rng.random_range(0..said.len())];
                Self::lit(out, w, t);
                if self.rng.random_bool(0.6) {
                    Self::lit(out, "that", "IN");
                }
                self.clause(out, depth + 1);
            }
            81..=88 => {
                let (w, t) = [("is", "VBZ"), ("was", "VBD")][self.rng.random_range(0..2)];
                Self::lit(out, w, t);
                if self.rng.random_bool(0.3) {
                    self.emit(out, |l| &l.rb);
                }
                self.emit(out, |l| &l.jj);
            }
            _ => {
                self.emit(out, |l| &l.vbd);
                self.emit(out, |l| &l.rb);
            }
        }
        if self.rng.random_bool(0.3) {
            self.emit(out, |l| &l.inp);
            self.noun_phrase(out, false);
        }
    }

    fn clause(&mut self, out: &mut Sentence, depth: usize) {
        self.noun_phrase(out, true);
        if self.rng.random_bool(0.1) {
            self.emit(out, |l| &l.rb);
        }
        self.verb_phrase(out, depth);
    }

    fn sentence(&mut self) -> Sentence {
        let mut out = Vec::new();
        match self.rng.random_range(0..100) {
            0..=9 => {
                self.emit(&mut out, |l| &l.inp);
                self.noun_phrase_simple(&mut out);
                Self::lit(&mut out, ",", ",");
            }
            10..=14 => {
                self.emit(&mut out, |l| &l.rb);
                Self::lit(&mut out, ",", ",");
            }
            _ => {}
        }
        self.clause(&mut out, 0);
        if self.rng.random_bool(0.2) {
            Self::lit(&mut out, ",", ",");
            self.emit(&mut out, |l| &l.cc);
            self.clause(&mut out, 1);
        }
        Self::lit(&mut out, ".", ".");
        // Annotation noise of the kind found in hand-tagged corpora.
        for (_, t) in out.iter_mut() {
            if self.rng.random_bool(0.02) {
                *t = match *t {
                    "NN" => "JJ",
                    "JJ" => "NN",
                    "VBD" => "VBN",
                    "VBN" => "VBD",
                    "IN" => "RB",
                    "RB" => "IN",
                    "NNP" => "NN",
                    "VB" => "VBP",
                    other => other,
                };
            }
        }
        if let Some((w, t)) = out.first_mut() {
            if *t != "NNP" && *w != "I" {
                *w = capitalize(w);
            }
        }
        out
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "crates/tnt/data/sample.tt".into());
    let sentences: usize = args.next().map_or(1500, |s| s.parse().expect("sentence count"));
    let seed: u64 = args.next().map_or(1999, |s| s.parse().expect("seed"));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = build_lexicon(&mut rng);
    let mut generator = Generator { lex, rng };
    let mut text = String::new();
    let mut tokens = 0;
    for i in 0..sentences {
        if i > 0 {
            text.push('\n');
        }
        for (w, t) in generator.sentence() {
            let _ = writeln!(text, "{w}\t{t}");
            tokens += 1;
        }
    }
    std::fs::write(&path, text).expect("write corpus");
    eprintln!("wrote {sentences} sentences, {tokens} tokens to {path}");
}
