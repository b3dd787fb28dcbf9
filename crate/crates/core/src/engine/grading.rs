//! Automatic grading of free-text replies.
//!
//! Replies are lowercased and stripped of punctuation, then scanned for
//! relation and kin terms (longest phrase first). A reply earns full credit
//! when it names an accepted designation and nothing after the last such
//! mention contradicts it. Half credit goes to replies that walk the right
//! chain but land on the wrong term (reasoning) or name the right relation
//! with the wrong ordinal (memory).

use std::collections::HashSet;

use crate::graph::TaskGraph;
use crate::oracle::lexicon::{Lexicon, Link};
use crate::oracle::{inverse_word, DesignationKind, GroundTruth, QuestionForm};
use crate::render::{ordinal_word, parse_ordinal_word};
use crate::schema::{Gender, SchemaRegistry};
use crate::scoring::Grade;

pub const RUBRIC_VERSION: &str = "rubric-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Reasoning,
    Memory,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Reasoning => "reasoning",
            Protocol::Memory => "memory",
        }
    }

    pub fn parse(s: &str) -> Option<Protocol> {
        match s {
            "reasoning" => Some(Protocol::Reasoning),
            "memory" => Some(Protocol::Memory),
            _ => None,
        }
    }
}

pub fn normalize(text: &str) -> String {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
pub struct Rubric {
    version: String,
    /// Normalized phrases, longest first.
    vocabulary: Vec<Vec<String>>,
}

impl Rubric {
    pub fn new(registry: &SchemaRegistry, lexicon: &Lexicon) -> Rubric {
        let mut phrases: HashSet<String> = HashSet::new();
        for t in lexicon.all_terms() {
            phrases.insert(normalize(t));
        }
        for s in registry.entries() {
            let word = s.relation.display();
            phrases.insert(normalize(&word));
            phrases.insert(normalize(&format!("{word}s")));
            for g in [Some(Gender::Female), Some(Gender::Male), None] {
                phrases.insert(normalize(&inverse_word(s.relation.as_str(), g)));
            }
        }
        let mut vocabulary: Vec<Vec<String>> = phrases
            .into_iter()
            .filter(|p| !p.is_empty())
            .map(|p| p.split(' ').map(str::to_string).collect())
            .collect();
        vocabulary.sort_by(|a: &Vec<String>, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        Rubric {
            version: RUBRIC_VERSION.to_string(),
            vocabulary,
        }
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Relation and kin terms in the reply, in order, longest match first.
    pub fn mentions(&self, reply: &str) -> Vec<String> {
        let norm = normalize(reply);
        let tokens: Vec<&str> = norm.split(' ').filter(|t| !t.is_empty()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self.vocabulary.iter().find(|p| {
                p.len() <= tokens.len() - i && p.iter().zip(&tokens[i..]).all(|(a, b)| a == b)
            });
            match hit {
                Some(p) => {
                    out.push(p.join(" "));
                    i += p.len();
                }
                None => i += 1,
            }
        }
        out
    }
}

/// What an answer is graded against.
#[derive(Debug, Clone)]
pub struct GradeTarget<'a> {
    pub truth: &'a GroundTruth,
    pub protocol: Protocol,
    /// Ordinal the answer must state, for memory questions about a single
    /// ordinal edge.
    pub expected_ordinal: Option<u8>,
}

impl GradeTarget<'_> {
    fn accepted(&self) -> HashSet<String> {
        let mut out: HashSet<String> = self.truth.designation_ab.terms().map(normalize).collect();
        if self.truth.form == QuestionForm::Relationship {
            out.extend(self.truth.designation_ba.terms().map(normalize));
        }
        out
    }

    fn chains(&self) -> Vec<Vec<String>> {
        let mut out = vec![self
            .truth
            .designation_ab
            .chain_words
            .iter()
            .map(|w| normalize(w))
            .collect()];
        if self.truth.form == QuestionForm::Relationship {
            out.push(
                self.truth
                    .designation_ba
                    .chain_words
                    .iter()
                    .map(|w| normalize(w))
                    .collect(),
            );
        }
        out
    }
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn chain_matches(chain: &[String], mentions: &[String]) -> bool {
    if chain.is_empty() {
        return false;
    }
    let reversed: Vec<String> = chain.iter().rev().cloned().collect();
    is_subsequence(chain, mentions) || is_subsequence(&reversed, mentions)
}

fn ordinals_in(reply: &str) -> Vec<u8> {
    normalize(reply)
        .split(' ')
        .filter_map(parse_ordinal_word)
        .collect()
}

fn yes_no(reply: &str) -> Option<bool> {
    normalize(reply).split(' ').find_map(|t| match t {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    })
}

/// Grade with a one-line rationale.
pub fn grade_answer(reply: &str, target: &GradeTarget<'_>, rubric: &Rubric) -> (Grade, String) {
    if reply.trim().is_empty() {
        return (Grade::Zero, "empty reply".into());
    }
    let truth = target.truth;
    if let Some(probe) = &truth.probe {
        return match yes_no(reply) {
            Some(a) if a == probe.answer => (
                Grade::Full,
                format!("answered {}", if a { "yes" } else { "no" }),
            ),
            Some(a) => (
                Grade::Zero,
                format!(
                    "answered {} for a {} probe",
                    if a { "yes" } else { "no" },
                    probe.answer
                ),
            ),
            None => (Grade::Zero, "no yes/no answer".into()),
        };
    }
    let mentions = rubric.mentions(reply);
    let accepted = target.accepted();
    let chains = target.chains();
    let neutral: HashSet<&String> = chains.iter().flatten().collect();
    let chain_hit = chains.iter().any(|c| chain_matches(c, &mentions));

    let designation_right = if truth.designation_ab.kind == DesignationKind::ChainDescription {
        chain_hit
    } else {
        match mentions.iter().rposition(|m| accepted.contains(m)) {
            Some(last) => {
                match mentions[last + 1..]
                    .iter()
                    .find(|m| !accepted.contains(*m) && !neutral.contains(m))
                {
                    Some(c) => {
                        return half_or_zero(target, chain_hit, format!("contradicted by `{c}`"))
                    }
                    None => true,
                }
            }
            None => false,
        }
    };
    if !designation_right {
        let named = mentions
            .last()
            .map_or("nothing".to_string(), |m| format!("`{m}`"));
        return half_or_zero(
            target,
            chain_hit,
            format!("designation not found, reply names {named}"),
        );
    }
    if let Some(want) = target.expected_ordinal {
        let found = ordinals_in(reply);
        if !found.contains(&want) {
            let why = format!(
                "designation right, expected ordinal `{}`",
                ordinal_word(want)
            );
            return if target.protocol == Protocol::Memory {
                (Grade::Half, why)
            } else {
                (Grade::Full, "designation matched".into())
            };
        }
    }
    (Grade::Full, "designation matched".into())
}

fn half_or_zero(target: &GradeTarget<'_>, chain_hit: bool, why: String) -> (Grade, String) {
    if chain_hit && target.truth.designation_ab.kind == DesignationKind::KinTerm {
        (Grade::Half, format!("chain right, {why}"))
    } else {
        (Grade::Zero, why)
    }
}

fn possessive_answer(
    truth: &GroundTruth,
    graph: &TaskGraph,
    term: &str,
    ordinal: Option<u8>,
) -> String {
    let a = graph.name(truth.a).unwrap_or("A");
    let b = graph.name(truth.b).unwrap_or("B");
    match ordinal {
        Some(o) => format!("{b} is {a}'s {} {term}.", ordinal_word(o)),
        None => format!("{b} is {a}'s {term}."),
    }
}

/// A reply that earns full credit.
pub fn reference_reply(
    truth: &GroundTruth,
    graph: &TaskGraph,
    expected_ordinal: Option<u8>,
) -> String {
    if let Some(p) = &truth.probe {
        return if p.answer { "Yes." } else { "No." }.to_string();
    }
    let d = &truth.designation_ab;
    match d.kind {
        DesignationKind::KinTerm => possessive_answer(truth, graph, &d.canonical, expected_ordinal),
        DesignationKind::ChainDescription if d.chain_words.len() == 1 => {
            possessive_answer(truth, graph, &d.chain_words[0], expected_ordinal)
        }
        DesignationKind::ChainDescription => {
            let a = graph.name(truth.a).unwrap_or("A");
            let b = graph.name(truth.b).unwrap_or("B");
            format!("{b} is {}.", d.phrase_for(a))
        }
    }
}

/// A reply that earns no credit: a kin term unrelated to the truth, or the
/// opposite yes/no.
pub fn wrong_reply(
    truth: &GroundTruth,
    graph: &TaskGraph,
    lexicon: &Lexicon,
    rubric: &Rubric,
) -> String {
    if let Some(p) = &truth.probe {
        return if p.answer { "No." } else { "Yes." }.to_string();
    }
    let target = GradeTarget {
        truth,
        protocol: Protocol::Reasoning,
        expected_ordinal: None,
    };
    let accepted = target.accepted();
    let chain_words: HashSet<String> = target.chains().into_iter().flatten().collect();
    let term = lexicon
        .entries()
        .iter()
        .filter(|e| e.key.link != Link::SelfRef)
        .map(|e| e.canonical.as_str())
        .find(|t| {
            let n = normalize(t);
            !accepted.contains(&n)
                && !chain_words.contains(&n)
                && rubric.mentions(t) == vec![n.clone()]
        })
        .unwrap_or("stranger");
    possessive_answer(truth, graph, term, None)
}
