//! Name surrogates and ordinal finalisation.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::generator::MAX_ORDINAL;
use crate::graph::{NodeId, TaskGraph};
use crate::schema::{Gender, SchemaRegistry};

pub const SHIPPED_SURROGATES: &str = include_str!("../data/surrogates.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NamingError {
    #[error("malformed surrogate file at line {line}: {reason}")]
    MalformedSurrogateFile { line: usize, reason: String },
    #[error("surrogate library has no {0} names")]
    EmptyGenderPool(Gender),
    #[error("need {needed} {gender} names, library has {available}")]
    InsufficientSurrogates {
        gender: Gender,
        needed: usize,
        available: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surrogate {
    pub name: String,
    pub gender: Gender,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurrogateLibrary {
    entries: Vec<Surrogate>,
}

impl SurrogateLibrary {
    pub fn shipped() -> SurrogateLibrary {
        load_surrogates(SHIPPED_SURROGATES).expect("shipped surrogate file is valid")
    }

    pub fn entries(&self) -> &[Surrogate] {
        &self.entries
    }

    pub fn count(&self, gender: Gender) -> usize {
        self.entries.iter().filter(|s| s.gender == gender).count()
    }

    fn pool(&self, gender: Gender) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|s| s.gender == gender)
            .map(|s| s.name.as_str())
            .collect()
    }
}

/// Parses `name|gender_code` lines. A library missing one gender entirely
/// loads fine; [`assign_names`] reports it once a node of that gender needs
/// a name.
pub fn load_surrogates(source: &str) -> Result<SurrogateLibrary, NamingError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let bad = |reason: String| NamingError::MalformedSurrogateFile { line, reason };
        let (name, code) = text
            .split_once('|')
            .ok_or_else(|| bad("expected `name|gender_code`".into()))?;
        let name = name.trim();
        if name.is_empty() || name.contains(['|', '\'', '\n']) || name == "-" {
            return Err(bad(format!("unusable name `{name}`")));
        }
        let gender = Gender::from_code(code.trim())
            .ok_or_else(|| bad(format!("bad gender code `{}`", code.trim())))?;
        if !seen.insert(name.to_string()) {
            return Err(bad(format!("duplicate name `{name}`")));
        }
        entries.push(Surrogate {
            name: name.to_string(),
            gender,
        });
    }
    Ok(SurrogateLibrary { entries })
}

/// Nodes in order of first appearance along the edge list.
fn first_appearance(graph: &TaskGraph) -> Vec<NodeId> {
    let mut seen = vec![false; graph.nodes.len()];
    let mut order = Vec::with_capacity(graph.nodes.len());
    for e in &graph.edges {
        for id in [e.head, e.tail] {
            if !seen[id.index()] {
                seen[id.index()] = true;
                order.push(id);
            }
        }
    }
    for n in &graph.nodes {
        if !seen[n.id.index()] {
            order.push(n.id);
        }
    }
    order
}

/// Gives every node a distinct name of its own gender.
pub fn assign_names<R: Rng + ?Sized>(
    mut graph: TaskGraph,
    library: &SurrogateLibrary,
    rng: &mut R,
) -> Result<TaskGraph, NamingError> {
    let mut pools: HashMap<Gender, Vec<&str>> = HashMap::new();
    for gender in Gender::ALL {
        let needed = graph.nodes.iter().filter(|n| n.gender == gender).count();
        let pool = library.pool(gender);
        if needed > 0 && pool.is_empty() {
            return Err(NamingError::EmptyGenderPool(gender));
        }
        if needed > pool.len() {
            return Err(NamingError::InsufficientSurrogates {
                gender,
                needed,
                available: pool.len(),
            });
        }
        pools.insert(gender, pool);
    }
    for id in first_appearance(&graph) {
        let node = &mut graph.nodes[id.index()];
        let pool = pools.get_mut(&node.gender).expect("pool per gender");
        let pick = rng.gen_range(0..pool.len());
        node.name = Some(pool.swap_remove(pick).to_string());
    }
    Ok(graph)
}

/// Fills in any missing ordinal on ordinal relations, and repairs duplicate
/// ordinals within a (tail, relation) group. Edges that already carry a
/// valid unique ordinal keep it.
pub fn finalize_ordinals<R: Rng + ?Sized>(
    mut graph: TaskGraph,
    registry: &SchemaRegistry,
    rng: &mut R,
) -> TaskGraph {
    let mut used: HashMap<(NodeId, String), HashSet<u8>> = HashMap::new();
    let mut pending = Vec::new();
    for (i, e) in graph.edges.iter_mut().enumerate() {
        let ordinal_relation = registry
            .lookup(&e.relation)
            .map(|s| s.order.is_ordinal())
            .unwrap_or(false);
        if !ordinal_relation {
            e.ordinal = None;
            continue;
        }
        let group = used.entry((e.tail, e.relation.to_string())).or_default();
        match e.ordinal {
            Some(o) if (1..=MAX_ORDINAL).contains(&o) && group.insert(o) => {}
            _ => pending.push(i),
        }
    }
    for i in pending {
        let e = &mut graph.edges[i];
        let group = used.entry((e.tail, e.relation.to_string())).or_default();
        let mut free: Vec<u8> = (1..=MAX_ORDINAL).filter(|o| !group.contains(o)).collect();
        if free.is_empty() {
            // More than MAX_ORDINAL siblings: continue counting upwards.
            let next = (MAX_ORDINAL + 1..=u8::MAX)
                .find(|o| !group.contains(o))
                .unwrap_or(u8::MAX);
            free.push(next);
        }
        let o = *free.choose(rng).expect("non-empty");
        group.insert(o);
        e.ordinal = Some(o);
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node};
    use crate::schema::RelationType;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn graph(genders: &[Gender], edges: &[(u32, u32, &str, Option<u8>)]) -> TaskGraph {
        let mut g = TaskGraph::default();
        for (i, &gender) in genders.iter().enumerate() {
            g.nodes.push(Node {
                id: NodeId(i as u32),
                gender,
                name: None,
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
    fn shipped_library() {
        let lib = SurrogateLibrary::shipped();
        assert_eq!(lib.count(Gender::Female), 64);
        assert_eq!(lib.count(Gender::Male), 64);
        assert!(lib.entries().contains(&Surrogate {
            name: "Xiaohong".into(),
            gender: Gender::Female
        }));
    }

    #[test]
    fn duplicate_name_rejected() {
        assert!(matches!(
            load_surrogates("Xiaohong|0\nXiaohong|0\n"),
            Err(NamingError::MalformedSurrogateFile { line: 2, .. })
        ));
    }

    #[test]
    fn male_only_library_cannot_name_female() {
        let lib = load_surrogates("Xiaoming|1\nXiaogang|1\n").unwrap();
        let g = graph(&[Gender::Female, Gender::Male], &[(0, 1, "friend", None)]);
        assert_eq!(
            assign_names(g, &lib, &mut rng(0)),
            Err(NamingError::EmptyGenderPool(Gender::Female))
        );
    }

    #[test]
    fn forced_assignment() {
        let lib = load_surrogates("Xiaohong|0\nXiaoming|1\n").unwrap();
        let g = graph(&[Gender::Female, Gender::Male], &[(0, 1, "friend", None)]);
        let g = assign_names(g, &lib, &mut rng(0)).unwrap();
        assert_eq!(g.name(NodeId(0)), Some("Xiaohong"));
        assert_eq!(g.name(NodeId(1)), Some("Xiaoming"));
    }

    #[test]
    fn too_few_names() {
        let lib = load_surrogates("A|0\nB|0\nC|0\nD|0\nE|1\n").unwrap();
        let g = graph(&[Gender::Female; 5], &[]);
        assert_eq!(
            assign_names(g, &lib, &mut rng(0)),
            Err(NamingError::InsufficientSurrogates {
                gender: Gender::Female,
                needed: 5,
                available: 4
            })
        );
    }

    #[test]
    fn naming_is_deterministic_and_injective() {
        let lib = SurrogateLibrary::shipped();
        let g = graph(
            &[Gender::Female, Gender::Male, Gender::Female, Gender::Male],
            &[
                (0, 1, "friend", None),
                (2, 1, "friend", None),
                (3, 2, "friend", None),
            ],
        );
        let a = assign_names(g.clone(), &lib, &mut rng(9)).unwrap();
        let b = assign_names(g, &lib, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        let names: HashSet<_> = a.nodes.iter().map(|n| n.name.clone().unwrap()).collect();
        assert_eq!(names.len(), 4);
        for n in &a.nodes {
            let s = lib
                .entries()
                .iter()
                .find(|s| Some(&s.name) == n.name.as_ref())
                .unwrap();
            assert_eq!(s.gender, n.gender);
        }
    }

    #[test]
    fn ordinals_filled_and_unique() {
        let reg = SchemaRegistry::shipped();
        let g = graph(
            &[Gender::Male, Gender::Male, Gender::Male, Gender::Female],
            &[
                (1, 0, "son", None),
                (2, 0, "son", None),
                (0, 3, "father", Some(2)),
                (3, 0, "student", None),
            ],
        );
        let g = finalize_ordinals(g, &reg, &mut rng(4));
        let a = g.edges[0].ordinal.unwrap();
        let b = g.edges[1].ordinal.unwrap();
        assert_ne!(a, b);
        assert!((1..=4).contains(&a) && (1..=4).contains(&b));
        assert_eq!(g.edges[2].ordinal, None);
        assert!((1..=4).contains(&g.edges[3].ordinal.unwrap()));
    }

    #[test]
    fn existing_ordinals_kept() {
        let reg = SchemaRegistry::shipped();
        let g = graph(
            &[Gender::Male, Gender::Female],
            &[(0, 1, "student", Some(3))],
        );
        let g = finalize_ordinals(g, &reg, &mut rng(0));
        assert_eq!(g.edges[0].ordinal, Some(3));
    }
}
