//! Random task-graph construction by iterative splicing.
//!
//! A multiset of `n` schemas is drawn with replacement and shuffled. The first
//! schema becomes a two-node graph; every later schema is attached by picking
//! an existing edge uniformly and merging one of the new schema's endpoints
//! onto that edge's head or tail (the four splice methods). Each splice adds
//! exactly one new node, so generated graphs are trees.
//!
//! A splice is feasible when the merged node's gender fits the schema and the
//! new edge keeps every per-node cardinality rule intact:
//!
//! * at most one father and one mother per person, counting `son`/`daughter`
//!   edges as parent claims too;
//! * at most one spouse (`wife`/`husband`) per person;
//! * at most one current edge of any other single-current relation per side;
//! * ordinals 1..=4 stay unique within a (tail, relation) group, so the
//!   tail's third student is a single person.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Edge, Node, NodeId, TaskGraph};
use crate::schema::{CurrentOrder, Gender, RelationType, SchemaEntry, SchemaRegistry};

/// Anchor resamples before a schema is deferred.
pub const ANCHOR_RETRIES: usize = 16;
/// Deferrals of a single schema before generation gives up.
pub const SCHEMA_DEFERRALS: usize = 8;
/// Ordinals are drawn from `1..=MAX_ORDINAL`.
pub const MAX_ORDINAL: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerationError {
    #[error("schema count must be at least 1")]
    EmptyRequest,
    #[error(
        "could not place `{relation}` after all retries ({placed} of {requested} schemas placed)"
    )]
    GenerationExhausted {
        relation: RelationType,
        placed: usize,
        requested: usize,
        partial: Box<TaskGraph>,
    },
    #[error("splice violates a constraint: {0}")]
    InfeasibleSplice(String),
    #[error("no node pair at distance {0}")]
    DistanceUnavailable(usize),
}

/// The four ways of joining a new schema to an existing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpliceMethod {
    /// New head := anchor head.
    HeadHead,
    /// New head := anchor tail.
    HeadTail,
    /// New tail := anchor head.
    TailHead,
    /// New tail := anchor tail.
    TailTail,
}

impl SpliceMethod {
    pub const ALL: [SpliceMethod; 4] = [
        SpliceMethod::HeadHead,
        SpliceMethod::HeadTail,
        SpliceMethod::TailHead,
        SpliceMethod::TailTail,
    ];

    /// Whether the merged node plays the head role of the new edge.
    pub fn merges_head(self) -> bool {
        matches!(self, SpliceMethod::HeadHead | SpliceMethod::HeadTail)
    }

    /// Whether the merged node is taken from the anchor's head.
    pub fn from_anchor_head(self) -> bool {
        matches!(self, SpliceMethod::HeadHead | SpliceMethod::TailHead)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpliceChoice {
    pub anchor_edge: usize,
    pub method: SpliceMethod,
    pub merged_node: NodeId,
}

/// Draws `n` schemas uniformly with replacement, then shuffles them.
pub fn sample_schema_multiset<R: Rng + ?Sized>(
    registry: &SchemaRegistry,
    n: usize,
    rng: &mut R,
) -> Vec<SchemaEntry> {
    let entries = registry.entries();
    let mut picked: Vec<SchemaEntry> = (0..n)
        .map(|_| entries[rng.gen_range(0..entries.len())].clone())
        .collect();
    picked.shuffle(rng);
    picked
}

fn parent_claim(
    relation: &str,
    head: (NodeId, Gender),
    tail: (NodeId, Gender),
) -> Option<(NodeId, Gender)> {
    match relation {
        "father" | "mother" => Some((tail.0, head.1)),
        "son" | "daughter" => Some((head.0, tail.1)),
        _ => None,
    }
}

fn is_spouse(relation: &str) -> bool {
    matches!(relation, "wife" | "husband")
}

/// Checks whether a prospective edge keeps all cardinality rules intact.
fn edge_fits(
    graph: &TaskGraph,
    schema: &SchemaEntry,
    head: (NodeId, Gender),
    tail: (NodeId, Gender),
) -> bool {
    if head.0 == tail.0 {
        return false;
    }
    let rel = schema.relation.as_str();
    let gender_of = |id: NodeId| -> Gender {
        if id == head.0 {
            head.1
        } else if id == tail.0 {
            tail.1
        } else {
            graph.gender(id)
        }
    };

    let new_claim = parent_claim(rel, head, tail);
    let mut ordinals_used = 0u8;
    for e in &graph.edges {
        let erel = e.relation.as_str();
        if e.head == head.0 && e.tail == tail.0 && e.relation == schema.relation {
            return false;
        }
        if let Some(claim) = new_claim {
            let old = parent_claim(
                erel,
                (e.head, gender_of(e.head)),
                (e.tail, gender_of(e.tail)),
            );
            if old == Some(claim) {
                return false;
            }
        }
        if is_spouse(rel) && is_spouse(erel) && (e.touches(head.0) || e.touches(tail.0)) {
            return false;
        }
        if schema.order.current == CurrentOrder::SingleCurrent
            && !is_spouse(rel)
            && e.relation == schema.relation
            && (e.head == head.0 || e.tail == tail.0)
        {
            return false;
        }
        if schema.order.is_ordinal() && e.relation == schema.relation && e.tail == tail.0 {
            ordinals_used += 1;
        }
    }
    if schema.order.is_ordinal() && ordinals_used >= MAX_ORDINAL {
        return false;
    }
    schema.head.admits(head.1) && schema.tail.admits(tail.1)
}

/// Genders the fresh node of a splice may take without breaking any rule.
fn admissible_new_genders(
    graph: &TaskGraph,
    schema: &SchemaEntry,
    method: SpliceMethod,
    merged: NodeId,
) -> Vec<Gender> {
    let fresh = NodeId(graph.nodes.len() as u32);
    let merged_gender = graph.gender(merged);
    Gender::ALL
        .into_iter()
        .filter(|&g| {
            let (head, tail) = if method.merges_head() {
                ((merged, merged_gender), (fresh, g))
            } else {
                ((fresh, g), (merged, merged_gender))
            };
            edge_fits(graph, schema, head, tail)
        })
        .collect()
}

/// Lists the splice methods that can attach `schema` at `anchor`.
pub fn enumerate_feasible_splices(
    graph: &TaskGraph,
    schema: &SchemaEntry,
    anchor: usize,
) -> Vec<SpliceChoice> {
    let Some(edge) = graph.edges.get(anchor) else {
        return Vec::new();
    };
    SpliceMethod::ALL
        .into_iter()
        .filter_map(|method| {
            let merged = if method.from_anchor_head() {
                edge.head
            } else {
                edge.tail
            };
            let merged_gender = graph.gender(merged);
            let endpoint = if method.merges_head() {
                schema.head
            } else {
                schema.tail
            };
            if !endpoint.admits(merged_gender) {
                return None;
            }
            if admissible_new_genders(graph, schema, method, merged).is_empty() {
                return None;
            }
            Some(SpliceChoice {
                anchor_edge: anchor,
                method,
                merged_node: merged,
            })
        })
        .collect()
}

fn draw_ordinal<R: Rng + ?Sized>(
    graph: &TaskGraph,
    tail: NodeId,
    relation: &RelationType,
    rng: &mut R,
) -> Option<u8> {
    let free: Vec<u8> = (1..=MAX_ORDINAL)
        .filter(|o| {
            !graph
                .edges
                .iter()
                .any(|e| e.tail == tail && &e.relation == relation && e.ordinal == Some(*o))
        })
        .collect();
    free.choose(rng).copied()
}

fn draw_gender<R: Rng + ?Sized>(allowed: &[Gender], rng: &mut R) -> Gender {
    *allowed.choose(rng).expect("non-empty gender set")
}

/// Starts a graph from its first schema: two fresh nodes and one edge.
pub fn bootstrap<R: Rng + ?Sized>(schema: &SchemaEntry, seed: u64, rng: &mut R) -> TaskGraph {
    let head_gender = schema
        .head
        .fixed()
        .unwrap_or_else(|| draw_gender(&Gender::ALL, rng));
    let tail_gender = schema
        .tail
        .fixed()
        .unwrap_or_else(|| draw_gender(&Gender::ALL, rng));
    let mut graph = TaskGraph {
        seed,
        ..TaskGraph::default()
    };
    graph.nodes.push(Node {
        id: NodeId(0),
        gender: head_gender,
        name: None,
    });
    graph.nodes.push(Node {
        id: NodeId(1),
        gender: tail_gender,
        name: None,
    });
    let ordinal = if schema.order.is_ordinal() {
        Some(rng.gen_range(1..=MAX_ORDINAL))
    } else {
        None
    };
    graph.edges.push(Edge {
        head: NodeId(0),
        tail: NodeId(1),
        relation: schema.relation.clone(),
        ordinal,
        insertion_index: 1,
    });
    graph.schema_multiset.push(schema.relation.clone());
    graph
}

/// Attaches `schema` according to `choice`, creating one new node.
pub fn apply_splice<R: Rng + ?Sized>(
    mut graph: TaskGraph,
    schema: &SchemaEntry,
    choice: SpliceChoice,
    rng: &mut R,
) -> Result<TaskGraph, GenerationError> {
    let edge = graph
        .edges
        .get(choice.anchor_edge)
        .ok_or_else(|| GenerationError::InfeasibleSplice("anchor edge out of range".into()))?;
    let expected = if choice.method.from_anchor_head() {
        edge.head
    } else {
        edge.tail
    };
    if expected != choice.merged_node {
        return Err(GenerationError::InfeasibleSplice(
            "merged node does not match splice method".into(),
        ));
    }
    let merged_gender = graph.gender(choice.merged_node);
    let endpoint = if choice.method.merges_head() {
        schema.head
    } else {
        schema.tail
    };
    if !endpoint.admits(merged_gender) {
        return Err(GenerationError::InfeasibleSplice(format!(
            "{} endpoint does not admit a {merged_gender} node",
            schema.relation
        )));
    }
    let allowed = admissible_new_genders(&graph, schema, choice.method, choice.merged_node);
    if allowed.is_empty() {
        return Err(GenerationError::InfeasibleSplice(format!(
            "{} would break a cardinality rule",
            schema.relation
        )));
    }
    let fresh = NodeId(graph.nodes.len() as u32);
    let gender = draw_gender(&allowed, rng);
    graph.nodes.push(Node {
        id: fresh,
        gender,
        name: None,
    });
    let (head, tail) = if choice.method.merges_head() {
        (choice.merged_node, fresh)
    } else {
        (fresh, choice.merged_node)
    };
    let ordinal = if schema.order.is_ordinal() {
        Some(
            draw_ordinal(&graph, tail, &schema.relation, rng)
                .ok_or_else(|| GenerationError::InfeasibleSplice("no free ordinal".into()))?,
        )
    } else {
        None
    };
    let insertion_index = graph.edges.len() as u32 + 1;
    graph.edges.push(Edge {
        head,
        tail,
        relation: schema.relation.clone(),
        ordinal,
        insertion_index,
    });
    graph.schema_multiset.push(schema.relation.clone());
    Ok(graph)
}

/// Builds a task graph from `n` random schemas. Pure in `(registry, n, seed)`.
pub fn generate_task_graph(
    registry: &SchemaRegistry,
    n: usize,
    seed: u64,
) -> Result<TaskGraph, GenerationError> {
    if n == 0 {
        return Err(GenerationError::EmptyRequest);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = sample_schema_multiset(registry, n, &mut rng);
    let mut queue: std::collections::VecDeque<(SchemaEntry, usize)> =
        order.into_iter().map(|s| (s, 0)).collect();

    let (first, _) = queue.pop_front().expect("n >= 1");
    let mut graph = bootstrap(&first, seed, &mut rng);

    while let Some((schema, deferrals)) = queue.pop_front() {
        let mut placed = None;
        for _ in 0..ANCHOR_RETRIES {
            let anchor = rng.gen_range(0..graph.edges.len());
            let options = enumerate_feasible_splices(&graph, &schema, anchor);
            if let Some(&choice) = options.choose(&mut rng) {
                placed = Some(choice);
                break;
            }
        }
        match placed {
            Some(choice) => {
                graph = apply_splice(graph, &schema, choice, &mut rng)?;
            }
            None if deferrals < SCHEMA_DEFERRALS => queue.push_back((schema, deferrals + 1)),
            None => {
                return Err(GenerationError::GenerationExhausted {
                    relation: schema.relation.clone(),
                    placed: graph.edges.len(),
                    requested: n,
                    partial: Box::new(graph),
                })
            }
        }
    }
    Ok(graph)
}

/// Unordered node pairs `(a, b)` with `a < b` at exactly `distance` hops.
pub fn pairs_at_distance(graph: &TaskGraph, distance: usize) -> Vec<(NodeId, NodeId)> {
    let matrix = graph.distance_matrix();
    let mut out = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, d) in row.iter().enumerate().skip(i + 1) {
            if *d == Some(distance) {
                out.push((NodeId(i as u32), NodeId(j as u32)));
            }
        }
    }
    out
}

/// Picks one pair uniformly at each requested distance, keeping only pairs
/// accepted by `keep` when any exist.
pub fn distance_buckets_where<R, F>(
    graph: &TaskGraph,
    distances: impl IntoIterator<Item = usize>,
    rng: &mut R,
    mut keep: F,
) -> Result<BTreeMap<usize, (NodeId, NodeId)>, GenerationError>
where
    R: Rng + ?Sized,
    F: FnMut(NodeId, NodeId) -> bool,
{
    let mut out = BTreeMap::new();
    for d in distances {
        let all = pairs_at_distance(graph, d);
        if all.is_empty() {
            return Err(GenerationError::DistanceUnavailable(d));
        }
        let preferred: Vec<_> = all.iter().copied().filter(|&(a, b)| keep(a, b)).collect();
        let pool = if preferred.is_empty() {
            &all
        } else {
            &preferred
        };
        out.insert(d, *pool.choose(rng).expect("non-empty"));
    }
    Ok(out)
}

/// One uniformly chosen pair at each distance 2, 3, 4 and 5.
pub fn distance_bucket_tasks<R: Rng + ?Sized>(
    graph: &TaskGraph,
    rng: &mut R,
) -> Result<BTreeMap<usize, (NodeId, NodeId)>, GenerationError> {
    distance_buckets_where(graph, 2..=5, rng, |_, _| true)
}
