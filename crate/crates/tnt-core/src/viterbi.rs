//! Viterbi search over tag-pair states with optional beam pruning, and
//! per-token reliability quotients.
//!
//! A lattice state at position `i` is the pair `(t[i-1], t[i])`, since the
//! trigram transition needs two tags of history. Scores are natural logs of
//! the product of transition and emission factors.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::TaggerModel;
use crate::ngram::{State, TagId};

const NO_BACK: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenOutput {
    pub tag: TagId,
    pub known: bool,
    /// Best assignment over the best alternative at this position, if
    /// computed. Infinite when no alternative tag has positive probability.
    pub quotient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggedOutput {
    pub tokens: Vec<TokenOutput>,
    /// Natural log of the best sequence's score, including the final
    /// end-of-sentence transition.
    pub log_prob: f64,
}

impl TaggedOutput {
    pub fn tags(&self) -> impl Iterator<Item = TagId> + '_ {
        self.tokens.iter().map(|t| t.tag)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cand {
    tag: TagId,
    ctx: usize,
    log_emit: f64,
    known: bool,
}

/// One position of the lattice: a `prev × cur` grid of pair states.
#[derive(Debug, Clone)]
pub struct Column {
    prev_tags: Vec<Option<TagId>>,
    cands: Vec<Cand>,
    delta: Vec<f64>,
    back: Vec<u32>,
    alive: Vec<bool>,
}

/// A pair state as seen from outside the decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeState {
    /// Tag at the previous position; `None` for the sentence start.
    pub prev: Option<TagId>,
    pub tag: TagId,
    pub log_delta: f64,
    /// Tag two positions back on the best path into this state.
    pub back: Option<TagId>,
    pub alive: bool,
}

impl Column {
    fn width(&self) -> usize {
        self.cands.len()
    }

    pub fn states(&self) -> impl Iterator<Item = LatticeState> + '_ {
        let w = self.width();
        (0..self.prev_tags.len() * w).map(move |k| LatticeState {
            prev: self.prev_tags[k / w],
            tag: self.cands[k % w].tag,
            log_delta: self.delta[k],
            back: None,
            alive: self.alive[k],
        })
    }

    pub fn max_log_delta(&self) -> f64 {
        self.delta
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&d, _)| d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn surviving(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }
}

/// Forward Viterbi lattice for one sentence.
#[derive(Debug, Clone)]
pub struct Lattice {
    columns: Vec<Column>,
}

impl Lattice {
    /// Runs the forward pass. With `beam = Some(θ)`, a state whose δ falls
    /// below `max δ / θ` at its position is not extended.
    pub fn build<S: AsRef<str>>(model: &TaggerModel, words: &[S], beam: Option<f64>) -> Self {
        let log_beam = beam.map(libm::log);
        let bos = model.state_index(State::Bos);
        let mut columns: Vec<Column> = Vec::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            let word = word.as_ref();
            let (cands, known) = model.candidates(word);
            let cands: Vec<Cand> = cands
                .into_iter()
                .map(|c| Cand {
                    tag: c.tag,
                    ctx: model.state_index(model.state_for(word, c.tag)),
                    log_emit: libm::log(c.emission),
                    known,
                })
                .collect();
            let w = cands.len();
            let column = if i == 0 {
                let delta: Vec<f64> = cands
                    .iter()
                    .map(|c| libm::log(model.transition_index(bos, bos, c.ctx)) + c.log_emit)
                    .collect();
                Column {
                    prev_tags: vec![None],
                    cands,
                    delta,
                    back: vec![NO_BACK; w],
                    alive: vec![true; w],
                }
            } else {
                let prev = &columns[i - 1];
                let (pw, ppw) = (prev.width(), prev.prev_tags.len());
                let mut delta = vec![f64::NEG_INFINITY; pw * w];
                let mut back = vec![NO_BACK; pw * w];
                let mut alive = vec![false; pw * w];
                let mut live: Vec<(u32, usize, f64)> = Vec::with_capacity(ppw);
                for p in 0..pw {
                    let p_ctx = prev.cands[p].ctx;
                    // Surviving predecessors of (pp, p); pruned ones are never extended.
                    live.clear();
                    for pp in 0..ppw {
                        let k = pp * pw + p;
                        if prev.alive[k] {
                            let pp_ctx = if i == 1 { bos } else { columns[i - 2].cands[pp].ctx };
                            live.push((pp as u32, pp_ctx, prev.delta[k]));
                        }
                    }
                    if live.is_empty() {
                        continue;
                    }
                    for (c, cand) in cands.iter().enumerate() {
                        let mut best = f64::NEG_INFINITY;
                        let mut arg = NO_BACK;
                        for &(pp, pp_ctx, d) in &live {
                            let v = d + libm::log(model.transition_index(pp_ctx, p_ctx, cand.ctx));
                            if arg == NO_BACK || v > best {
                                best = v;
                                arg = pp;
                            }
                        }
                        delta[p * w + c] = best + cand.log_emit;
                        back[p * w + c] = arg;
                        alive[p * w + c] = true;
                    }
                }
                Column {
                    prev_tags: prev.cands.iter().map(|c| Some(c.tag)).collect(),
                    cands,
                    delta,
                    back,
                    alive,
                }
            };
            columns.push(column);
            if let Some(log_beam) = log_beam {
                let col = columns.last_mut().expect("just pushed");
                let floor = col.max_log_delta() - log_beam;
                for (a, &d) in col.alive.iter_mut().zip(&col.delta) {
                    if *a && d < floor {
                        *a = false;
                    }
                }
            }
        }
        Lattice { columns }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    /// States at position `i` with their backpointers resolved to tags.
    pub fn states(&self, i: usize) -> Vec<LatticeState> {
        let col = &self.columns[i];
        col.states()
            .zip(&col.back)
            .map(|(mut s, &b)| {
                if b != NO_BACK && i >= 2 {
                    s.back = Some(self.columns[i - 2].cands[b as usize].tag);
                }
                s
            })
            .collect()
    }

    fn prev_ctx(&self, i: usize, p: usize, bos: usize) -> usize {
        if i == 0 {
            bos
        } else {
            self.columns[i - 1].cands[p].ctx
        }
    }

    /// Best complete path, including the end-of-sentence transition.
    fn best_path(&self, model: &TaggerModel) -> (Vec<usize>, f64) {
        let bos = model.state_index(State::Bos);
        let eos = model.state_index(State::Eos);
        let t = self.columns.len();
        let last = &self.columns[t - 1];
        let w = last.width();
        let mut best = f64::NEG_INFINITY;
        let mut arg = usize::MAX;
        for k in 0..last.delta.len() {
            if !last.alive[k] {
                continue;
            }
            let (p, c) = (k / w, k % w);
            let v = last.delta[k]
                + libm::log(model.transition_index(self.prev_ctx(t - 1, p, bos), last.cands[c].ctx, eos));
            if arg == usize::MAX || v > best {
                best = v;
                arg = k;
            }
        }
        let mut path = vec![0; t];
        let (mut p, mut c) = (arg / w, arg % w);
        for i in (0..t).rev() {
            path[i] = c;
            if i == 0 {
                break;
            }
            let back = self.columns[i].back[p * self.columns[i].width() + c] as usize;
            c = p;
            p = back;
        }
        (path, best)
    }

    /// Max-product completion scores `β` for every pair state, from each
    /// state through the end of the sentence. Ignores pruning.
    fn backward(&self, model: &TaggerModel) -> Vec<Vec<f64>> {
        let bos = model.state_index(State::Bos);
        let eos = model.state_index(State::Eos);
        let t = self.columns.len();
        let mut beta: Vec<Vec<f64>> = self
            .columns
            .iter()
            .map(|c| vec![f64::NEG_INFINITY; c.delta.len()])
            .collect();
        let last = &self.columns[t - 1];
        for (k, b) in beta[t - 1].iter_mut().enumerate() {
            let (p, c) = (k / last.width(), k % last.width());
            *b = libm::log(model.transition_index(self.prev_ctx(t - 1, p, bos), last.cands[c].ctx, eos));
        }
        for i in (0..t - 1).rev() {
            let col = &self.columns[i];
            let next = &self.columns[i + 1];
            let w = col.width();
            for k in 0..col.delta.len() {
                let (p, c) = (k / w, k % w);
                let p_ctx = self.prev_ctx(i, p, bos);
                let c_ctx = col.cands[c].ctx;
                let mut best = f64::NEG_INFINITY;
                for (n, cand) in next.cands.iter().enumerate() {
                    let v = libm::log(model.transition_index(p_ctx, c_ctx, cand.ctx))
                        + cand.log_emit
                        + beta[i + 1][c * next.width() + n];
                    if v > best {
                        best = v;
                    }
                }
                beta[i][k] = best;
            }
        }
        beta
    }

    /// For each position, the best complete-path score with each candidate
    /// fixed at that position. Uses forward scores, so the lattice must be
    /// unpruned.
    fn constrained(&self, model: &TaggerModel) -> Vec<Vec<(TagId, f64)>> {
        let beta = self.backward(model);
        self.columns
            .iter()
            .zip(&beta)
            .map(|(col, beta)| {
                let w = col.width();
                (0..w)
                    .map(|c| {
                        let best = (0..col.prev_tags.len())
                            .map(|p| col.delta[p * w + c] + beta[p * w + c])
                            .fold(f64::NEG_INFINITY, f64::max);
                        (col.cands[c].tag, best)
                    })
                    .collect()
            })
            .collect()
    }
}

/// Most probable tag sequence for a non-empty sentence.
///
/// `beam = None` searches exhaustively and returns the exact argmax. Ties
/// go to the candidate with the lexicographically smaller tag.
pub fn viterbi<S: AsRef<str>>(model: &TaggerModel, words: &[S], beam: Option<f64>) -> TaggedOutput {
    assert!(!words.is_empty(), "cannot tag an empty sentence");
    let lattice = Lattice::build(model, words, beam);
    let (path, log_prob) = lattice.best_path(model);
    let tokens = path
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let cand = lattice.columns[i].cands[c];
            TokenOutput {
                tag: cand.tag,
                known: cand.known,
                quotient: None,
            }
        })
        .collect();
    TaggedOutput { tokens, log_prob }
}

/// Reliability quotient of `output`'s tag at every position: the best
/// sequence through that tag divided by the best sequence through any other
/// tag, computed exactly over the unpruned lattice. An output from exact
/// decoding always yields quotients of at least 1.
pub fn reliability<S: AsRef<str>>(model: &TaggerModel, words: &[S], output: &TaggedOutput) -> Vec<f64> {
    assert_eq!(words.len(), output.tokens.len(), "output does not match sentence");
    let lattice = Lattice::build(model, words, None);
    lattice
        .constrained(model)
        .iter()
        .zip(&output.tokens)
        .map(|(scores, token)| quotient(scores, token.tag))
        .collect()
}

fn quotient(scores: &[(TagId, f64)], chosen: TagId) -> f64 {
    let mut own = f64::NEG_INFINITY;
    let mut alt = f64::NEG_INFINITY;
    let mut alternatives = 0;
    for &(tag, s) in scores {
        if tag == chosen {
            own = s;
        } else {
            alternatives += 1;
            alt = alt.max(s);
        }
    }
    if alternatives == 0 {
        f64::INFINITY
    } else if own == alt {
        1.0
    } else {
        libm::exp(own - alt)
    }
}

/// Exact decoding with reliability quotients filled in.
pub fn tag_with_reliability<S: AsRef<str>>(model: &TaggerModel, words: &[S]) -> TaggedOutput {
    let mut output = viterbi(model, words, None);
    let q = reliability(model, words, &output);
    for (t, q) in output.tokens.iter_mut().zip(q) {
        t.quotient = Some(q);
    }
    output
}

impl TaggerModel {
    /// Tags a sentence with the model's configured beam.
    pub fn tag_sentence<S: AsRef<str>>(&self, words: &[S]) -> TaggedOutput {
        viterbi(self, words, self.config().beam_theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fixtures::fixture_a, TaggedCorpus};
    use crate::model::TaggerConfig;

    fn fixture_model() -> TaggerModel {
        TaggerModel::assemble(&fixture_a(), TaggerConfig::default()).unwrap()
    }

    fn names(m: &TaggerModel, out: &TaggedOutput) -> Vec<String> {
        out.tags().map(|t| m.tag(t).as_str().into()).collect()
    }

    use alloc::string::String;

    #[test]
    fn fixture_sentence() {
        let m = fixture_model();
        let out = viterbi(&m, &["the", "dog", "barks", "."], None);
        assert_eq!(names(&m, &out), ["DT", "NN", "VB", "SENT"]);
        assert!(out.tokens.iter().all(|t| t.known));
        let beamed = viterbi(&m, &["the", "dog", "barks", "."], Some(1e9));
        assert_eq!(beamed, out);
    }

    #[test]
    fn single_candidate_tokens_are_infinitely_reliable() {
        let m = fixture_model();
        let out = tag_with_reliability(&m, &["the", "dog", "barks", "."]);
        assert!(out.tokens.iter().all(|t| t.quotient == Some(f64::INFINITY)));
    }

    #[test]
    fn symmetric_ambiguity_gives_unit_quotient() {
        // "x" is A or B with identical contexts and frequencies.
        let corpus = TaggedCorpus::from_pairs([
            vec![("x", "A"), ("y", "C")],
            vec![("x", "B"), ("y", "C")],
        ])
        .unwrap();
        let m = TaggerModel::assemble(&corpus, TaggerConfig::exact()).unwrap();
        let out = tag_with_reliability(&m, &["x", "y"]);
        assert_eq!(out.tokens[0].quotient, Some(1.0));
        // Tie goes to the lexicographically smaller tag.
        assert_eq!(m.tag(out.tokens[0].tag).as_str(), "A");
        assert_eq!(out.tokens[1].quotient, Some(f64::INFINITY));
    }

    #[test]
    fn unknown_words_are_flagged() {
        let m = fixture_model();
        let out = viterbi(&m, &["the", "blorks"], None);
        assert!(out.tokens[0].known);
        assert!(!out.tokens[1].known);
    }

    #[test]
    fn log_prob_of_fixture_path() {
        let m = fixture_model();
        let out = viterbi(&m, &["the", "dog"], None);
        let c = m.counts();
        let s = |l: &str| c.state(l, false).unwrap();
        let expected = m.transition(State::Bos, State::Bos, s("DT"))
            * 1.0
            * m.transition(State::Bos, s("DT"), s("NN"))
            * 0.5
            * m.transition(s("DT"), s("NN"), State::Eos);
        assert!((libm::exp(out.log_prob) - expected).abs() <= 1e-12 * expected);
    }
}
