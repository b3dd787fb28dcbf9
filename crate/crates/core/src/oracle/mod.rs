//! Ground truth for node pairs: hop distance, the relation chain along the
//! shortest path, and the designation one endpoint uses for the other.

pub mod genealogy;
pub mod kinship;
pub mod lexicon;

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{NodeId, TaskGraph};
use crate::schema::{Gender, RelationType, SchemaRegistry};

use kinship::{KinOutcome, StepError};
use lexicon::{KinCoord, Lexicon, Link};

/// Chains longer than this are described rather than named.
pub const MAX_KIN_CHAIN: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("node {0:?} is not in the graph")]
    UnknownNode(NodeId),
    #[error("no path between {0:?} and {1:?}")]
    Disconnected(NodeId, NodeId),
    #[error("a node is not related to itself")]
    SameNode,
    #[error("relation chain is unsatisfiable")]
    UnsatisfiableChain,
    #[error("question form {0} needs a family designation")]
    FormNotApplicable(u8),
    #[error("unknown relation `{0}` on an edge")]
    UnknownRelation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// The next person is the current person's `relation`.
    Forward,
    /// The current person is the next person's `relation`.
    Inverse,
    /// Symmetric relation.
    Mutual,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationAtom {
    pub relation: RelationType,
    pub orientation: Orientation,
    pub ordinal: Option<u8>,
    /// Gender of the person this atom leads to, when known.
    pub target_gender: Option<Gender>,
}

impl RelationAtom {
    pub fn forward(relation: &str) -> RelationAtom {
        RelationAtom {
            relation: RelationType::new(relation),
            orientation: Orientation::Forward,
            ordinal: None,
            target_gender: kinship::kin_relation(relation).map(|(_, g)| g),
        }
    }

    pub fn inverse(relation: &str, target_gender: Gender) -> RelationAtom {
        RelationAtom {
            relation: RelationType::new(relation),
            orientation: Orientation::Inverse,
            ordinal: None,
            target_gender: Some(target_gender),
        }
    }

    /// How the walker refers to the person this atom leads to.
    pub fn word(&self) -> String {
        match self.orientation {
            Orientation::Forward | Orientation::Mutual => self.relation.display(),
            Orientation::Inverse => inverse_word(self.relation.as_str(), self.target_gender),
        }
    }
}

fn gendered(g: Option<Gender>, female: &str, male: &str, neutral: &str) -> String {
    match g {
        Some(Gender::Female) => female,
        Some(Gender::Male) => male,
        None => neutral,
    }
    .to_string()
}

/// Word for the tail of an edge as seen from its head.
pub fn inverse_word(relation: &str, g: Option<Gender>) -> String {
    match relation {
        "father" | "mother" => gendered(g, "daughter", "son", "child"),
        "son" | "daughter" => gendered(g, "mother", "father", "parent"),
        "older_brother" | "older_sister" => {
            gendered(g, "younger sister", "younger brother", "younger sibling")
        }
        "younger_brother" | "younger_sister" => {
            gendered(g, "older sister", "older brother", "older sibling")
        }
        "husband" | "wife" => gendered(g, "wife", "husband", "spouse"),
        "boyfriend" | "girlfriend" => gendered(g, "girlfriend", "boyfriend", "partner"),
        "student" => "teacher".into(),
        "teacher" => "student".into(),
        "leader" => "subordinate".into(),
        "subordinate" => "leader".into(),
        "godfather" | "godmother" => gendered(g, "goddaughter", "godson", "godchild"),
        "godson" | "goddaughter" => gendered(g, "godmother", "godfather", "godparent"),
        "sworn_elder_brother" | "sworn_elder_sister" => gendered(
            g,
            "sworn younger sister",
            "sworn younger brother",
            "sworn younger sibling",
        ),
        "sworn_younger_brother" | "sworn_younger_sister" => gendered(
            g,
            "sworn elder sister",
            "sworn elder brother",
            "sworn elder sibling",
        ),
        other => format!("{} counterpart", other.replace('_', " ")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationChain {
    pub from: NodeId,
    pub to: NodeId,
    pub atoms: Vec<RelationAtom>,
}

impl RelationChain {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn words(&self) -> Vec<String> {
        self.atoms.iter().map(RelationAtom::word).collect()
    }

    /// Chain from `to` back to `from`; `start_gender` is the gender of
    /// `from`.
    pub fn reversed(&self, start_gender: Gender) -> RelationChain {
        let n = self.atoms.len();
        let mut genders: Vec<Option<Gender>> = Vec::with_capacity(n + 1);
        genders.push(Some(start_gender));
        genders.extend(self.atoms.iter().map(|a| a.target_gender));
        let atoms = (0..n)
            .rev()
            .map(|i| {
                let a = &self.atoms[i];
                RelationAtom {
                    relation: a.relation.clone(),
                    orientation: match a.orientation {
                        Orientation::Forward => Orientation::Inverse,
                        Orientation::Inverse => Orientation::Forward,
                        Orientation::Mutual => Orientation::Mutual,
                    },
                    ordinal: a.ordinal,
                    target_gender: genders[i],
                }
            })
            .collect();
        RelationChain {
            from: self.to,
            to: self.from,
            atoms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignationKind {
    KinTerm,
    ChainDescription,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Designation {
    pub canonical: String,
    pub synonyms: Vec<String>,
    pub kind: DesignationKind,
    /// Kin coordinate behind a `KinTerm`.
    pub coord: Option<KinCoord>,
    /// Words of the chain, as seen by the walker.
    pub chain_words: Vec<String>,
}

/// Placeholder for the reference person inside chain descriptions.
pub const REFERENCE_PLACEHOLDER: &str = "A's";

impl Designation {
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }

    pub fn accepts(&self, term: &str) -> bool {
        let t = term.trim().to_lowercase();
        self.terms().any(|x| x.to_lowercase() == t)
    }

    /// Canonical phrase with the reference person's name filled in.
    pub fn phrase_for(&self, reference: &str) -> String {
        self.canonical
            .replace(REFERENCE_PLACEHOLDER, &format!("{reference}'s"))
    }

    pub fn is_self(&self) -> bool {
        self.coord.is_some_and(|c| c.link == Link::SelfRef)
    }
}

/// "the wife of A's teacher", with the possessive form as a synonym.
pub fn chain_description(atoms: &[RelationAtom]) -> Designation {
    let words: Vec<String> = atoms.iter().map(RelationAtom::word).collect();
    let possessive = format!("{REFERENCE_PLACEHOLDER} {}", words.join("'s "));
    let canonical = match words.split_last() {
        None => String::from("self"),
        Some((last, [])) => last.clone(),
        Some((last, rest)) => {
            let mut s = format!("the {last}");
            for w in rest[1..].iter().rev() {
                s.push_str(&format!(" of the {w}"));
            }
            s.push_str(&format!(" of {REFERENCE_PLACEHOLDER} {}", rest[0]));
            s
        }
    };
    let synonyms = if possessive == canonical {
        Vec::new()
    } else {
        vec![possessive]
    };
    Designation {
        canonical,
        synonyms,
        kind: DesignationKind::ChainDescription,
        coord: None,
        chain_words: words,
    }
}

fn designate(lexicon: &Lexicon, atoms: &[RelationAtom], outcome: KinOutcome) -> Designation {
    if let KinOutcome::Coord(c) = outcome {
        if let Some(e) = lexicon.lookup(&c) {
            return Designation {
                canonical: e.canonical.clone(),
                synonyms: e.synonyms.clone(),
                kind: DesignationKind::KinTerm,
                coord: Some(c),
                chain_words: atoms.iter().map(RelationAtom::word).collect(),
            };
        }
    }
    chain_description(atoms)
}

/// Designation by left-to-right composition. `start` and `end` are the
/// genders of the chain's first and last person.
pub fn compose_designation(
    lexicon: &Lexicon,
    atoms: &[RelationAtom],
    start: Gender,
    end: Gender,
) -> Designation {
    if atoms.len() > MAX_KIN_CHAIN {
        return chain_description(atoms);
    }
    designate(
        lexicon,
        atoms,
        kinship::compose_coordinate(atoms, start, end),
    )
}

/// Designation by building the family tree explicitly.
pub fn brute_force_designation(
    lexicon: &Lexicon,
    atoms: &[RelationAtom],
    start: Gender,
    end: Gender,
) -> Result<Designation, OracleError> {
    if atoms.len() > MAX_KIN_CHAIN {
        return Ok(chain_description(atoms));
    }
    let outcome = match kinship::kin_steps(atoms, start, end) {
        Ok(steps) => genealogy::walk_steps(start, &steps),
        Err(StepError::Unsatisfiable) => KinOutcome::Unsatisfiable,
        Err(_) => KinOutcome::Unclassified,
    };
    if outcome == KinOutcome::Unsatisfiable {
        return Err(OracleError::UnsatisfiableChain);
    }
    Ok(designate(lexicon, atoms, outcome))
}

fn check_node(graph: &TaskGraph, n: NodeId) -> Result<(), OracleError> {
    if n.index() < graph.nodes.len() {
        Ok(())
    } else {
        Err(OracleError::UnknownNode(n))
    }
}

/// Hop count of the shortest path between `a` and `b`.
pub fn distance(graph: &TaskGraph, a: NodeId, b: NodeId) -> Result<usize, OracleError> {
    check_node(graph, a)?;
    check_node(graph, b)?;
    graph.bfs_distances(a)[b.index()].ok_or(OracleError::Disconnected(a, b))
}

/// Relation chain along the shortest path from `a` to `b`. Among equally
/// short paths, the one whose edge insertion indices are lexicographically
/// smallest wins.
pub fn relation_chain(
    graph: &TaskGraph,
    registry: &SchemaRegistry,
    a: NodeId,
    b: NodeId,
) -> Result<RelationChain, OracleError> {
    check_node(graph, a)?;
    check_node(graph, b)?;
    if a == b {
        return Err(OracleError::SameNode);
    }
    let to_b = graph.bfs_distances(b);
    let mut left = to_b[a.index()].ok_or(OracleError::Disconnected(a, b))?;
    let incidence = graph.incidence();
    let mut atoms = Vec::with_capacity(left);
    let mut at = a;
    while left > 0 {
        let e = incidence[at.index()]
            .iter()
            .map(|&i| &graph.edges[i])
            .filter(|e| to_b[e.other(at).index()] == Some(left - 1))
            .min_by_key(|e| e.insertion_index)
            .expect("a shortest path continues");
        let next = e.other(at);
        let schema = registry
            .lookup(&e.relation)
            .map_err(|_| OracleError::UnknownRelation(e.relation.to_string()))?;
        let orientation = if schema.is_symmetric() {
            Orientation::Mutual
        } else if e.head == next {
            Orientation::Forward
        } else {
            Orientation::Inverse
        };
        atoms.push(RelationAtom {
            relation: e.relation.clone(),
            orientation,
            ordinal: e.ordinal,
            target_gender: Some(graph.gender(next)),
        });
        at = next;
        left -= 1;
    }
    Ok(RelationChain {
        from: a,
        to: b,
        atoms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuestionForm {
    /// "What's the relationship between A and B?"
    Relationship = 1,
    /// "What should A call B?"
    Address = 2,
    /// "Is there an X-Y relationship between A and B?"
    RelationProbe = 3,
    /// "Should A call X B?"
    AddressProbe = 4,
}

impl QuestionForm {
    pub const ALL: [QuestionForm; 4] = [
        QuestionForm::Relationship,
        QuestionForm::Address,
        QuestionForm::RelationProbe,
        QuestionForm::AddressProbe,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<QuestionForm> {
        QuestionForm::ALL.into_iter().find(|f| f.number() == n)
    }

    pub fn is_probe(self) -> bool {
        matches!(
            self,
            QuestionForm::RelationProbe | QuestionForm::AddressProbe
        )
    }
}

/// Asserted designation in a yes/no question, and the right answer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Probe {
    pub asserted: String,
    pub answer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub a: NodeId,
    pub b: NodeId,
    pub form: QuestionForm,
    /// What `b` is to `a`.
    pub designation_ab: Designation,
    /// What `a` is to `b`.
    pub designation_ba: Designation,
    pub chain: RelationChain,
    pub probe: Option<Probe>,
}

fn designations(
    graph: &TaskGraph,
    registry: &SchemaRegistry,
    lexicon: &Lexicon,
    a: NodeId,
    b: NodeId,
) -> Result<(RelationChain, Designation, Designation), OracleError> {
    let chain = relation_chain(graph, registry, a, b)?;
    let back = relation_chain(graph, registry, b, a)?;
    let (ga, gb) = (graph.gender(a), graph.gender(b));
    let ab = compose_designation(lexicon, &chain.atoms, ga, gb);
    let ba = compose_designation(lexicon, &back.atoms, gb, ga);
    Ok((chain, ab, ba))
}

fn pair_matches(asserted: &str, ab: &Designation, ba: &Designation) -> bool {
    let t = asserted.trim().to_lowercase();
    ab.terms().any(|x| {
        ba.terms()
            .any(|y| t == format!("{x}-{y}") || t == format!("{y}-{x}"))
    })
}

/// Ground truth with an explicit assertion for probe forms.
pub fn ground_truth_with_assertion(
    graph: &TaskGraph,
    registry: &SchemaRegistry,
    lexicon: &Lexicon,
    a: NodeId,
    b: NodeId,
    form: QuestionForm,
    asserted: Option<&str>,
) -> Result<GroundTruth, OracleError> {
    let (chain, ab, ba) = designations(graph, registry, lexicon, a, b)?;
    let probe = match form {
        QuestionForm::Relationship | QuestionForm::Address => None,
        _ if ab.kind != DesignationKind::KinTerm || ba.kind != DesignationKind::KinTerm => {
            return Err(OracleError::FormNotApplicable(form.number()))
        }
        QuestionForm::RelationProbe => {
            let asserted = asserted
                .map(str::to_string)
                .unwrap_or_else(|| format!("{}-{}", ab.canonical, ba.canonical));
            Some(Probe {
                answer: pair_matches(&asserted, &ab, &ba),
                asserted,
            })
        }
        QuestionForm::AddressProbe => {
            let asserted = asserted.unwrap_or(&ab.canonical).to_string();
            Some(Probe {
                answer: ab.accepts(&asserted),
                asserted,
            })
        }
    };
    Ok(GroundTruth {
        a,
        b,
        form,
        designation_ab: ab,
        designation_ba: ba,
        chain,
        probe,
    })
}

/// Ground truth for `(a, b)` under `form`. Probe forms draw a correct
/// assertion or a distractor with equal probability.
pub fn ground_truth_for<R: Rng + ?Sized>(
    graph: &TaskGraph,
    registry: &SchemaRegistry,
    lexicon: &Lexicon,
    a: NodeId,
    b: NodeId,
    form: QuestionForm,
    rng: &mut R,
) -> Result<GroundTruth, OracleError> {
    if !form.is_probe() {
        return ground_truth_with_assertion(graph, registry, lexicon, a, b, form, None);
    }
    let truth = ground_truth_with_assertion(graph, registry, lexicon, a, b, form, None)?;
    let (ab, ba) = (&truth.designation_ab, &truth.designation_ba);
    let positive = rng.gen_bool(0.5);
    let asserted = match (form, positive) {
        (QuestionForm::AddressProbe, true) => {
            let terms: Vec<&str> = ab.terms().collect();
            terms.choose(rng).expect("non-empty").to_string()
        }
        (QuestionForm::AddressProbe, false) => {
            let pool: Vec<&str> = lexicon
                .entries()
                .iter()
                .filter(|e| e.key.link != Link::SelfRef)
                .flat_map(|e| e.terms())
                .filter(|t| !ab.accepts(t))
                .collect();
            pool.choose(rng)
                .expect("lexicon has distractors")
                .to_string()
        }
        (_, true) => format!("{}-{}", ab.canonical, ba.canonical),
        (_, false) => {
            let ga = graph.gender(a);
            let pairs: Vec<String> = lexicon
                .entries()
                .iter()
                .filter(|e| e.key.link != Link::SelfRef)
                .filter_map(|e| {
                    let inv = lexicon.lookup(&e.key.representative().inverse(ga))?;
                    let s = format!("{}-{}", e.canonical, inv.canonical);
                    (!pair_matches(&s, ab, ba)).then_some(s)
                })
                .collect();
            pairs.choose(rng).expect("lexicon has distractors").clone()
        }
    };
    ground_truth_with_assertion(graph, registry, lexicon, a, b, form, Some(&asserted))
}

/// Whether the pair has a meaningful designation both ways (not the same
/// person reached by a round trip).
pub fn is_askable(
    graph: &TaskGraph,
    registry: &SchemaRegistry,
    lexicon: &Lexicon,
    a: NodeId,
    b: NodeId,
) -> bool {
    designations(graph, registry, lexicon, a, b)
        .map(|(_, ab, ba)| !ab.is_self() && !ba.is_self())
        .unwrap_or(false)
}

/// Breadth-first enumeration of all shortest-path lengths, used to
/// cross-check [`distance`] in tests.
pub fn all_simple_path_lengths(graph: &TaskGraph, a: NodeId, b: NodeId) -> Vec<usize> {
    let incidence = graph.incidence();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(a, vec![a])]);
    while let Some((at, path)) = queue.pop_front() {
        if at == b {
            out.push(path.len() - 1);
            continue;
        }
        for &i in &incidence[at.index()] {
            let next = graph.edges[i].other(at);
            if !path.contains(&next) {
                let mut p = path.clone();
                p.push(next);
                queue.push_back((next, p));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use Gender::{Female as F, Male as M};

    fn graph(genders: &[Gender], edges: &[(u32, u32, &str, Option<u8>)]) -> TaskGraph {
        let mut g = TaskGraph::default();
        for (i, &gender) in genders.iter().enumerate() {
            g.nodes.push(Node {
                id: NodeId(i as u32),
                gender,
                name: Some(format!("P{i}")),
            });
        }
        for (i, &(h, t, r, o)) in edges.iter().enumerate() {
            g.edges.push(Edge {
                head: NodeId(h),
                tail: NodeId(t),
                relation: RelationType::new(r),
                ordinal: o,
                insertion_index: i as u32 + 1,
            });
        }
        g
    }

    #[test]
    fn grandfather_through_mother() {
        let lex = Lexicon::shipped();
        let atoms = [
            RelationAtom::forward("mother"),
            RelationAtom::forward("father"),
        ];
        let d = compose_designation(&lex, &atoms, M, M);
        assert_eq!(d.canonical, "maternal grandfather");
        assert_eq!(d.kind, DesignationKind::KinTerm);
        assert!(d.accepts("Grandpa"));
        assert_eq!(brute_force_designation(&lex, &atoms, M, M).unwrap(), d);
    }

    #[test]
    fn single_edge_chain_from_graph() {
        let reg = SchemaRegistry::shipped();
        let lex = Lexicon::shipped();
        // P0 is P1's father.
        let g = graph(&[M, F], &[(0, 1, "father", None)]);
        let t = ground_truth_with_assertion(
            &g,
            &reg,
            &lex,
            NodeId(1),
            NodeId(0),
            QuestionForm::Address,
            None,
        )
        .unwrap();
        assert_eq!(t.designation_ab.canonical, "father");
        assert_eq!(t.designation_ba.canonical, "daughter");
        assert_eq!(t.chain.atoms[0].orientation, Orientation::Forward);
        let back = relation_chain(&g, &reg, NodeId(0), NodeId(1)).unwrap();
        assert_eq!(back.atoms[0].orientation, Orientation::Inverse);
    }

    #[test]
    fn non_kin_chain_is_described() {
        let lex = Lexicon::shipped();
        let atoms = [
            RelationAtom::forward("teacher"),
            RelationAtom::forward("wife"),
        ];
        let d = compose_designation(&lex, &atoms, M, F);
        assert_eq!(d.kind, DesignationKind::ChainDescription);
        assert_eq!(d.canonical, "the wife of A's teacher");
        assert_eq!(d.phrase_for("Xiaoming"), "the wife of Xiaoming's teacher");
        assert!(d.accepts("a's teacher's wife"));
        let three = [
            RelationAtom::forward("friend"),
            RelationAtom::forward("teacher"),
            RelationAtom::forward("wife"),
        ];
        assert_eq!(
            chain_description(&three).canonical,
            "the wife of the teacher of A's friend"
        );
    }

    #[test]
    fn unsatisfiable_paths_diverge() {
        let lex = Lexicon::shipped();
        let atoms = [RelationAtom::forward("wife")];
        assert_eq!(
            compose_designation(&lex, &atoms, F, F).kind,
            DesignationKind::ChainDescription
        );
        assert_eq!(
            brute_force_designation(&lex, &atoms, F, F),
            Err(OracleError::UnsatisfiableChain)
        );
    }

    #[test]
    fn long_chain_falls_back() {
        let lex = Lexicon::shipped();
        let atoms: Vec<_> = ["father", "father", "father", "father", "father"]
            .iter()
            .map(|r| RelationAtom::forward(r))
            .collect();
        let d = compose_designation(&lex, &atoms, M, M);
        assert_eq!(d.kind, DesignationKind::ChainDescription);
    }

    #[test]
    fn distance_and_errors() {
        let g = graph(
            &[M, F, M, F],
            &[(0, 1, "friend", None), (1, 2, "friend", None)],
        );
        assert_eq!(distance(&g, NodeId(0), NodeId(2)), Ok(2));
        assert_eq!(distance(&g, NodeId(0), NodeId(0)), Ok(0));
        assert_eq!(
            distance(&g, NodeId(0), NodeId(3)),
            Err(OracleError::Disconnected(NodeId(0), NodeId(3)))
        );
        assert_eq!(
            distance(&g, NodeId(0), NodeId(9)),
            Err(OracleError::UnknownNode(NodeId(9)))
        );
    }

    #[test]
    fn tie_break_prefers_earlier_edges() {
        let reg = SchemaRegistry::shipped();
        // Two 2-hop routes 0-1-3 and 0-2-3; the first uses edges 1 and 3.
        let g = graph(
            &[M, M, F, M],
            &[
                (0, 1, "friend", None),
                (0, 2, "friend", None),
                (1, 3, "teammate", None),
                (2, 3, "colleague", None),
            ],
        );
        let c = relation_chain(&g, &reg, NodeId(0), NodeId(3)).unwrap();
        let rels: Vec<_> = c.atoms.iter().map(|a| a.relation.as_str()).collect();
        assert_eq!(rels, ["friend", "teammate"]);
    }

    #[test]
    fn reversal_matches_extraction() {
        let reg = SchemaRegistry::shipped();
        let g = graph(
            &[M, F, M],
            &[(0, 1, "older_brother", None), (2, 1, "student", Some(2))],
        );
        let c = relation_chain(&g, &reg, NodeId(0), NodeId(2)).unwrap();
        let back = relation_chain(&g, &reg, NodeId(2), NodeId(0)).unwrap();
        assert_eq!(c.reversed(M), back);
    }

    #[test]
    fn probes() {
        let reg = SchemaRegistry::shipped();
        let lex = Lexicon::shipped();
        let g = graph(&[M, F], &[(0, 1, "father", None)]);
        let (a, b) = (NodeId(1), NodeId(0));
        let t = ground_truth_with_assertion(
            &g,
            &reg,
            &lex,
            a,
            b,
            QuestionForm::RelationProbe,
            Some("daughter-father"),
        )
        .unwrap();
        assert!(t.probe.unwrap().answer);
        let t = ground_truth_with_assertion(
            &g,
            &reg,
            &lex,
            a,
            b,
            QuestionForm::AddressProbe,
            Some("uncle"),
        )
        .unwrap();
        assert!(!t.probe.unwrap().answer);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = ground_truth_for(&g, &reg, &lex, a, b, QuestionForm::AddressProbe, &mut rng)
                .unwrap();
            let p = t.probe.unwrap();
            assert_eq!(p.answer, t.designation_ab.accepts(&p.asserted));
        }
    }

    #[test]
    fn probe_needs_kin_term() {
        let reg = SchemaRegistry::shipped();
        let lex = Lexicon::shipped();
        let g = graph(&[M, F], &[(0, 1, "teacher", Some(1))]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            ground_truth_for(
                &g,
                &reg,
                &lex,
                NodeId(0),
                NodeId(1),
                QuestionForm::RelationProbe,
                &mut rng
            ),
            Err(OracleError::FormNotApplicable(3))
        );
    }
}
