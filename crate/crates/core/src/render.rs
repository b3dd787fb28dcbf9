//! Natural-language rendering of edges, rulebooks and questions.

use regex::Regex;
use thiserror::Error;

use crate::graph::{Edge, NodeId, TaskGraph};
use crate::oracle::kinship::{compose_coordinate, KinOutcome, KIN_RELATIONS};
use crate::oracle::lexicon::{Lexicon, LexiconEntry, Link};
use crate::oracle::{inverse_word, GroundTruth, QuestionForm, RelationAtom};
use crate::schema::{Gender, RelationType, SchemaRegistry};

pub const SHIPPED_TEMPLATES: &str = include_str!("../data/templates.txt");

const ORDINAL_WORDS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("malformed template file at line {line}: {reason}")]
    MalformedTemplateFile { line: usize, reason: String },
    #[error("no template for relation `{0}`")]
    MissingTemplate(String),
    #[error("node {0:?} has no name")]
    MissingName(NodeId),
    #[error("edge {0} needs an ordinal")]
    MissingOrdinal(u32),
    #[error("cannot parse prompt `{0}`")]
    UnparseablePrompt(String),
    #[error("cannot split {prompts} prompts into {k} groups")]
    TooFewPrompts { prompts: usize, k: usize },
}

pub fn ordinal_word(n: u8) -> String {
    match ORDINAL_WORDS.get(usize::from(n).wrapping_sub(1)) {
        Some(w) => (*w).to_string(),
        None => {
            let suffix = match (n % 10, n % 100) {
                (1, r) if r != 11 => "st",
                (2, r) if r != 12 => "nd",
                (3, r) if r != 13 => "rd",
                _ => "th",
            };
            format!("{n}{suffix}")
        }
    }
}

pub fn parse_ordinal_word(w: &str) -> Option<u8> {
    if let Some(i) = ORDINAL_WORDS.iter().position(|x| *x == w) {
        return Some(i as u8 + 1);
    }
    let digits = w.trim_end_matches(char::is_alphabetic);
    let n: u8 = digits.parse().ok()?;
    (ordinal_word(n) == w).then_some(n)
}

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub relation: RelationType,
    pub pattern: String,
    matcher: Regex,
}

impl PromptTemplate {
    fn new(relation: RelationType, pattern: String) -> PromptTemplate {
        let mut re = String::from("^");
        let mut rest = pattern.as_str();
        while let Some(open) = rest.find('{') {
            re.push_str(&regex::escape(&rest[..open]));
            let close = open + rest[open..].find('}').expect("validated slot");
            re.push_str(match &rest[open + 1..close] {
                "head" => "(?P<head>.+?)",
                "tail" => "(?P<tail>.+?)",
                _ => "(?P<ord>[a-z]+|[0-9]+[a-z]{2})",
            });
            rest = &rest[close + 1..];
        }
        re.push_str(&regex::escape(rest));
        re.push('$');
        PromptTemplate {
            relation,
            pattern,
            matcher: Regex::new(&re).expect("escaped template regex"),
        }
    }

    pub fn has_ordinal(&self) -> bool {
        self.pattern.contains("{ord}")
    }
}

#[derive(Debug, Clone)]
pub struct TemplateSet {
    version: String,
    templates: Vec<PromptTemplate>,
}

/// What a prompt says about an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeDescriptor {
    pub head: String,
    pub tail: String,
    pub relation: RelationType,
    pub ordinal: Option<u8>,
}

impl TemplateSet {
    pub fn shipped(registry: &SchemaRegistry) -> TemplateSet {
        load_templates(SHIPPED_TEMPLATES, registry).expect("shipped templates are valid")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn templates(&self) -> &[PromptTemplate] {
        &self.templates
    }

    pub fn get(&self, relation: &RelationType) -> Option<&PromptTemplate> {
        self.templates.iter().find(|t| &t.relation == relation)
    }

    pub fn render_descriptor(&self, d: &EdgeDescriptor) -> Result<String, RenderError> {
        let t = self
            .get(&d.relation)
            .ok_or_else(|| RenderError::MissingTemplate(d.relation.to_string()))?;
        let mut text = t
            .pattern
            .replace("{head}", &d.head)
            .replace("{tail}", &d.tail);
        if t.has_ordinal() {
            let o = d.ordinal.ok_or(RenderError::MissingOrdinal(0))?;
            text = text.replace("{ord}", &ordinal_word(o));
        }
        Ok(text)
    }

    /// Renders one edge of a named graph.
    pub fn render_edge_prompt(
        &self,
        edge: &Edge,
        graph: &TaskGraph,
    ) -> Result<String, RenderError> {
        let name = |id: NodeId| {
            graph
                .name(id)
                .map(str::to_string)
                .ok_or(RenderError::MissingName(id))
        };
        let t = self
            .get(&edge.relation)
            .ok_or_else(|| RenderError::MissingTemplate(edge.relation.to_string()))?;
        if t.has_ordinal() && edge.ordinal.is_none() {
            return Err(RenderError::MissingOrdinal(edge.insertion_index));
        }
        self.render_descriptor(&EdgeDescriptor {
            head: name(edge.head)?,
            tail: name(edge.tail)?,
            relation: edge.relation.clone(),
            ordinal: if t.has_ordinal() { edge.ordinal } else { None },
        })
    }

    /// Every edge prompt, in insertion order.
    pub fn render_graph(&self, graph: &TaskGraph) -> Result<Vec<String>, RenderError> {
        let mut edges: Vec<&Edge> = graph.edges.iter().collect();
        edges.sort_by_key(|e| e.insertion_index);
        edges
            .into_iter()
            .map(|e| self.render_edge_prompt(e, graph))
            .collect()
    }

    pub fn parse_prompt(&self, text: &str) -> Result<EdgeDescriptor, RenderError> {
        let text = text.trim();
        let unparseable = || RenderError::UnparseablePrompt(text.to_string());
        for t in &self.templates {
            let Some(c) = t.matcher.captures(text) else {
                continue;
            };
            let ordinal = match c.name("ord") {
                Some(m) => match parse_ordinal_word(m.as_str()) {
                    Some(o) => Some(o),
                    None => continue,
                },
                None => None,
            };
            return Ok(EdgeDescriptor {
                head: c["head"].to_string(),
                tail: c["tail"].to_string(),
                relation: t.relation.clone(),
                ordinal,
            });
        }
        Err(unparseable())
    }
}

/// Parses `relation|pattern` lines. Every relation of the registry needs
/// exactly one template, with an `{ord}` slot iff the relation is ordinal.
pub fn load_templates(source: &str, registry: &SchemaRegistry) -> Result<TemplateSet, RenderError> {
    let mut version = String::from("unversioned");
    let mut templates: Vec<PromptTemplate> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if let Some(v) = text.strip_prefix("# template-set:") {
            version = v.trim().to_string();
            continue;
        }
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let bad = |reason: String| RenderError::MalformedTemplateFile { line, reason };
        let (rel, pattern) = text
            .split_once('|')
            .ok_or_else(|| bad("expected `relation|pattern`".into()))?;
        let relation = RelationType::new(rel.trim());
        let schema = registry
            .lookup(&relation)
            .map_err(|_| bad(format!("unknown relation `{relation}`")))?;
        let slots: Vec<&str> = pattern
            .match_indices('{')
            .map(|(o, _)| {
                let close = pattern[o..].find('}').map_or(pattern.len(), |c| o + c);
                &pattern[o + 1..close]
            })
            .collect();
        for s in &slots {
            if !matches!(*s, "head" | "tail" | "ord") {
                return Err(bad(format!("unknown slot `{{{s}}}`")));
            }
        }
        for required in ["head", "tail"] {
            if slots.iter().filter(|s| **s == required).count() != 1 {
                return Err(bad(format!("needs exactly one {{{required}}}")));
            }
        }
        let ords = slots.iter().filter(|s| **s == "ord").count();
        if ords != usize::from(schema.order.is_ordinal()) {
            return Err(bad(format!(
                "ordinal slot does not match relation `{relation}`"
            )));
        }
        if templates.iter().any(|t| t.relation == relation) {
            return Err(bad(format!("second template for `{relation}`")));
        }
        templates.push(PromptTemplate::new(relation, pattern.to_string()));
    }
    for s in registry.entries() {
        if !templates.iter().any(|t| t.relation == s.relation) {
            return Err(RenderError::MissingTemplate(s.relation.to_string()));
        }
    }
    Ok(TemplateSet { version, templates })
}

/// Derivation rules stated to the model after the term list.
pub const DERIVATION_RULES: [&str; 10] = [
    "Your parent's parent is your grandparent. On your father's side they are paternal, on your mother's side maternal.",
    "Your child's child is your grandchild.",
    "Your parent's sibling is your uncle or aunt.",
    "Your sibling's child is your nephew or niece.",
    "Your parent's sibling's child is your cousin.",
    "Your sibling's sibling is also your sibling.",
    "Your father's wife is your mother, and your mother's husband is your father.",
    "Your spouse's parent is your father-in-law or mother-in-law.",
    "Your child's spouse is your son-in-law or daughter-in-law.",
    "When no family term fits, describe the person by the chain of relations, for example the wife of your teacher.",
];

fn definitional_sentence(relation: &RelationType, symmetric: bool) -> String {
    let word = relation.display();
    if symmetric {
        return format!("If A is B's {word}, then B is also A's {word}.");
    }
    let f = inverse_word(relation.as_str(), Some(Gender::Female));
    let m = inverse_word(relation.as_str(), Some(Gender::Male));
    let inv = if f == m { f } else { format!("{m} or {f}") };
    format!("If A is B's {word}, then B is A's {inv}.")
}

/// Lexicon entries that need more than one relation to reach, each with the
/// first chain (shortest, then in relation order) that reaches it.
pub fn second_order_entries(lexicon: &Lexicon) -> Vec<(&LexiconEntry, Vec<RelationAtom>)> {
    let pool: Vec<RelationAtom> = KIN_RELATIONS
        .iter()
        .map(|(r, _, _)| RelationAtom::forward(r))
        .collect();
    let n = lexicon.entries().len();
    let mut first: Vec<Option<Vec<RelationAtom>>> = vec![None; n];
    let mut frontier: Vec<Vec<RelationAtom>> = vec![Vec::new()];
    for _ in 0..4 {
        let mut next = Vec::with_capacity(frontier.len() * pool.len());
        for chain in &frontier {
            for a in &pool {
                let mut c = chain.clone();
                c.push(a.clone());
                let end = a.target_gender.expect("kin atoms fix gender");
                for start in Gender::ALL {
                    if let KinOutcome::Coord(coord) = compose_coordinate(&c, start, end) {
                        if let Some(e) = lexicon.lookup(&coord) {
                            let idx = lexicon
                                .entries()
                                .iter()
                                .position(|x| std::ptr::eq(x, e))
                                .expect("entry from this lexicon");
                            if first[idx].is_none() {
                                first[idx] = Some(c.clone());
                            }
                        }
                    }
                }
                next.push(c);
            }
        }
        frontier = next;
    }
    lexicon
        .entries()
        .iter()
        .zip(first)
        .filter(|(e, c)| e.key.link != Link::SelfRef && c.as_ref().is_some_and(|c| c.len() >= 2))
        .map(|(e, c)| (e, c.expect("filtered")))
        .collect()
}

/// Rulebook lines: one definition per basic relation (registry order), one
/// line per second-order term (lexicon order), then the derivation rules.
pub fn render_rulebook(registry: &SchemaRegistry, lexicon: &Lexicon) -> Vec<String> {
    let mut out: Vec<String> = registry
        .entries()
        .iter()
        .map(|s| definitional_sentence(&s.relation, s.is_symmetric()))
        .collect();
    for (entry, chain) in second_order_entries(lexicon) {
        let words: Vec<String> = chain.iter().map(RelationAtom::word).collect();
        out.push(format!(
            "Your {} is your {}.",
            words.join("'s "),
            entry.canonical
        ));
    }
    out.extend(DERIVATION_RULES.iter().map(|s| s.to_string()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTask {
    pub question_text: String,
    pub form: QuestionForm,
    pub pair: (NodeId, NodeId),
    pub ground_truth: GroundTruth,
}

fn article(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// "grandma" -> "Grandma", "maternal grandfather" -> "Maternal Grandfather".
pub fn appellation(term: &str) -> String {
    term.split(' ')
        .map(|w| {
            let mut c = w.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn question_text(form: QuestionForm, a: &str, b: &str, asserted: Option<&str>) -> String {
    match form {
        QuestionForm::Relationship => format!("What's the relationship between {a} and {b}?"),
        QuestionForm::Address => format!("What should {a} call {b}?"),
        QuestionForm::RelationProbe => {
            let x = asserted.unwrap_or_default();
            format!(
                "Is there {} {x} relationship between {a} and {b}?",
                article(x)
            )
        }
        QuestionForm::AddressProbe => {
            format!(
                "Should {a} call {} {b}?",
                appellation(asserted.unwrap_or_default())
            )
        }
    }
}

pub fn build_question(truth: &GroundTruth, graph: &TaskGraph) -> Result<RenderedTask, RenderError> {
    let name = |id: NodeId| graph.name(id).ok_or(RenderError::MissingName(id));
    let (a, b) = (name(truth.a)?, name(truth.b)?);
    let asserted = truth.probe.as_ref().map(|p| p.asserted.as_str());
    Ok(RenderedTask {
        question_text: question_text(truth.form, a, b, asserted),
        form: truth.form,
        pair: (truth.a, truth.b),
        ground_truth: truth.clone(),
    })
}

/// Contiguous, order-preserving split into `k` groups whose sizes differ by
/// at most one, larger groups first.
pub fn chunk_prompts<T: Clone>(prompts: &[T], k: usize) -> Result<Vec<Vec<T>>, RenderError> {
    if k == 0 || k > prompts.len() {
        return Err(RenderError::TooFewPrompts {
            prompts: prompts.len(),
            k,
        });
    }
    let base = prompts.len() / k;
    let extra = prompts.len() % k;
    let mut out = Vec::with_capacity(k);
    let mut at = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        out.push(prompts[at..at + size].to_vec());
        at += size;
    }
    Ok(out)
}
