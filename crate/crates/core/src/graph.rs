//! Task graph value types, text serialization and structural queries.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{CurrentOrder, Gender, RelationType, SchemaRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub gender: Gender,
    pub name: Option<String>,
}

/// `head` is the `relation` of `tail` (for symmetric relations, of each other).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub head: NodeId,
    pub tail: NodeId,
    pub relation: RelationType,
    pub ordinal: Option<u8>,
    pub insertion_index: u32,
}

impl Edge {
    pub fn touches(&self, node: NodeId) -> bool {
        self.head == node || self.tail == node
    }

    pub fn other(&self, node: NodeId) -> NodeId {
        if self.head == node {
            self.tail
        } else {
            self.head
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TaskGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub seed: u64,
    pub schema_multiset: Vec<RelationType>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphFormatError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// A broken structural rule, reported by [`TaskGraph::audit`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl TaskGraph {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index()).filter(|n| n.id == id)
    }

    pub fn gender(&self, id: NodeId) -> Gender {
        self.nodes[id.index()].gender
    }

    pub fn name(&self, id: NodeId) -> Option<&str> {
        self.node(id).and_then(|n| n.name.as_deref())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices incident to each node, in insertion order.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            inc[e.head.index()].push(i);
            if e.tail != e.head {
                inc[e.tail.index()].push(i);
            }
        }
        inc
    }

    /// Undirected hop counts from `source` to every node (`None` if unreachable).
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        let inc = self.incidence();
        let mut dist = vec![None; self.nodes.len()];
        if source.index() >= self.nodes.len() {
            return dist;
        }
        dist[source.index()] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap();
            for &ei in &inc[u.index()] {
                let v = self.edges[ei].other(u);
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        self.bfs_distances(NodeId(0)).iter().all(Option::is_some)
    }

    /// All-pairs undirected distance matrix.
    pub fn distance_matrix(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.nodes.len() as u32)
            .map(|i| self.bfs_distances(NodeId(i)))
            .collect()
    }

    /// Checks every structural rule a generated graph must satisfy.
    pub fn audit(&self, registry: &SchemaRegistry) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |rule, detail: String| out.push(Violation { rule, detail });

        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.index() != i {
                bad(
                    "node ids are positional",
                    format!("node {i} has id {}", n.id),
                );
            }
        }
        if self.edges.len() != self.schema_multiset.len() {
            bad(
                "one edge per schema",
                format!(
                    "{} edges, {} schemas",
                    self.edges.len(),
                    self.schema_multiset.len()
                ),
            );
        }
        if !self.is_connected() {
            bad("connected", String::new());
        }

        let mut parallel = HashSet::new();
        let mut ordinals: HashMap<(NodeId, &RelationType), HashSet<u8>> = HashMap::new();
        let mut single: HashMap<(NodeId, &RelationType, bool), usize> = HashMap::new();
        let mut fathers: HashMap<NodeId, usize> = HashMap::new();
        let mut mothers: HashMap<NodeId, usize> = HashMap::new();

        for (i, e) in self.edges.iter().enumerate() {
            if e.insertion_index as usize != i + 1 {
                bad(
                    "insertion order",
                    format!("edge {i} has insertion index {}", e.insertion_index),
                );
            }
            if e.head == e.tail {
                bad("no self relations", format!("edge {i}"));
            }
            if e.head.index() >= self.nodes.len() || e.tail.index() >= self.nodes.len() {
                bad("edge endpoints exist", format!("edge {i}"));
                continue;
            }
            let Ok(schema) = registry.lookup(&e.relation) else {
                bad("known relation", format!("edge {i}: {}", e.relation));
                continue;
            };
            if !schema.head.admits(self.gender(e.head)) || !schema.tail.admits(self.gender(e.tail))
            {
                bad("gender", format!("edge {i} ({})", e.relation));
            }
            match (schema.order.is_ordinal(), e.ordinal) {
                (true, None) => bad("ordinal present", format!("edge {i}")),
                (false, Some(_)) => bad("ordinal absent", format!("edge {i}")),
                (true, Some(o)) => {
                    if o == 0 {
                        bad("ordinal positive", format!("edge {i}"));
                    }
                    if !ordinals.entry((e.tail, &e.relation)).or_default().insert(o) {
                        bad("ordinal uniqueness", format!("edge {i}"));
                    }
                }
                (false, None) => {}
            }
            if !parallel.insert((e.head, e.tail, &e.relation)) {
                bad("no parallel edges", format!("edge {i}"));
            }
            if schema.order.current == CurrentOrder::SingleCurrent {
                for key in [(e.head, &e.relation, true), (e.tail, &e.relation, false)] {
                    let c = single.entry(key).or_default();
                    *c += 1;
                    if *c > 1 {
                        bad(
                            "single current relation",
                            format!("edge {i} ({})", e.relation),
                        );
                    }
                }
            }
            match e.relation.as_str() {
                "father" => {
                    let c = fathers.entry(e.tail).or_default();
                    *c += 1;
                    if *c > 1 {
                        bad("one father", format!("node {}", e.tail));
                    }
                }
                "mother" => {
                    let c = mothers.entry(e.tail).or_default();
                    *c += 1;
                    if *c > 1 {
                        bad("one mother", format!("node {}", e.tail));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Renders the graph in its line-oriented text form.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# task graph v1\n");
        let _ = writeln!(out, "seed|{}", self.seed);
        let schemas: Vec<&str> = self.schema_multiset.iter().map(|r| r.as_str()).collect();
        let _ = writeln!(out, "schemas|{}", schemas.join(","));
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "node|{}|{}|{}",
                n.id,
                n.gender,
                n.name.as_deref().unwrap_or("-")
            );
        }
        for e in &self.edges {
            let ord = e.ordinal.map_or_else(|| "-".to_string(), |o| o.to_string());
            let _ = writeln!(
                out,
                "edge|{}|{}|{}|{}|{}",
                e.head, e.tail, e.relation, ord, e.insertion_index
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<TaskGraph, GraphFormatError> {
        let mut g = TaskGraph::default();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let bad = |reason: &str| GraphFormatError::Malformed {
                line: line_no,
                reason: reason.to_string(),
            };
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('|').collect();
            match f[0] {
                "seed" if f.len() == 2 => {
                    g.seed = f[1].parse().map_err(|_| bad("bad seed"))?;
                }
                "schemas" if f.len() == 2 => {
                    g.schema_multiset = f[1]
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(RelationType::new)
                        .collect();
                }
                "node" if f.len() == 4 => {
                    let id: u32 = f[1].parse().map_err(|_| bad("bad node id"))?;
                    if id as usize != g.nodes.len() {
                        return Err(bad("node ids must be consecutive"));
                    }
                    let gender = Gender::parse(f[2]).ok_or_else(|| bad("bad gender"))?;
                    let name = (f[3] != "-").then(|| f[3].to_string());
                    g.nodes.push(Node {
                        id: NodeId(id),
                        gender,
                        name,
                    });
                }
                "edge" if f.len() == 6 => {
                    let head = NodeId(f[1].parse().map_err(|_| bad("bad head"))?);
                    let tail = NodeId(f[2].parse().map_err(|_| bad("bad tail"))?);
                    if head.index() >= g.nodes.len() || tail.index() >= g.nodes.len() {
                        return Err(bad("edge refers to unknown node"));
                    }
                    let ordinal = match f[4] {
                        "-" => None,
                        s => Some(s.parse().map_err(|_| bad("bad ordinal"))?),
                    };
                    let insertion_index = f[5].parse().map_err(|_| bad("bad insertion index"))?;
                    g.edges.push(Edge {
                        head,
                        tail,
                        relation: RelationType::new(f[3]),
                        ordinal,
                        insertion_index,
                    });
                }
                _ => return Err(bad("unrecognised record")),
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> TaskGraph {
        let mut g = TaskGraph::default();
        for i in 0..n {
            g.nodes.push(Node {
                id: NodeId(i),
                gender: Gender::Female,
                name: None,
            });
        }
        for i in 1..n {
            g.edges.push(Edge {
                head: NodeId(i - 1),
                tail: NodeId(i),
                relation: RelationType::new("friend"),
                ordinal: None,
                insertion_index: i,
            });
            g.schema_multiset.push(RelationType::new("friend"));
        }
        g
    }

    #[test]
    fn path_distances() {
        let g = path(6);
        let d = g.bfs_distances(NodeId(0));
        assert_eq!(d, (0..6).map(Some).collect::<Vec<_>>());
        assert!(g.is_connected());
    }

    #[test]
    fn disconnected_detected() {
        let mut g = path(3);
        g.nodes.push(Node {
            id: NodeId(3),
            gender: Gender::Male,
            name: None,
        });
        assert!(!g.is_connected());
        let reg = SchemaRegistry::shipped();
        assert!(g.audit(&reg).iter().any(|v| v.rule == "connected"));
    }

    #[test]
    fn text_round_trip() {
        let mut g = path(3);
        g.seed = 99;
        g.nodes[1].name = Some("Xiaohong".into());
        g.edges[0].relation = RelationType::new("student");
        g.edges[0].ordinal = Some(3);
        let text = g.to_text();
        assert_eq!(TaskGraph::from_text(&text).unwrap(), g);
    }

    #[test]
    fn from_text_rejects_garbage() {
        assert!(TaskGraph::from_text("node|0|robot|x").is_err());
        assert!(TaskGraph::from_text("edge|0|1|friend|-|1").is_err());
        assert!(TaskGraph::from_text("wat").is_err());
    }

    #[test]
    fn audit_flags_two_fathers() {
        let reg = SchemaRegistry::shipped();
        let mut g = TaskGraph::default();
        for (i, gender) in [Gender::Male, Gender::Female, Gender::Male]
            .into_iter()
            .enumerate()
        {
            g.nodes.push(Node {
                id: NodeId(i as u32),
                gender,
                name: None,
            });
        }
        for (i, head) in [0u32, 2].into_iter().enumerate() {
            g.edges.push(Edge {
                head: NodeId(head),
                tail: NodeId(1),
                relation: RelationType::new("father"),
                ordinal: None,
                insertion_index: i as u32 + 1,
            });
            g.schema_multiset.push(RelationType::new("father"));
        }
        let v = g.audit(&reg);
        assert!(v.iter().any(|v| v.rule == "one father"), "{v:?}");
    }
}
