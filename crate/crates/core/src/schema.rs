//! Basic relationship schemas.
//!
//! A schema is one first-order social relation together with the gender
//! constraints on its two endpoints, its order semantics and its direction.
//! The shipped set lives in `data/schemas.txt`; alternative sets can be
//! loaded from any document in the same line format:
//!
//! ```text
//! id|head|tail|relation|order|direction
//! 9|0|1|wife|1/-|1
//! ```
//!
//! Gender codes are `0` female, `1` male, `2` either. Order codes are `0`,
//! `+`, `1/-`, `+/-` (plus the forward-compatible `1`). Direction is `1` for
//! head-to-tail relations and `2` for mutual ones.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The shipped schema document.
pub const SHIPPED_SCHEMAS: &str = include_str!("../data/schemas.txt");

const HEADER: &str = "id|head|tail|relation|order|direction";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("malformed schema file at line {line}: {reason}")]
    MalformedSchemaFile { line: usize, reason: String },
    #[error("schema invariant `{invariant}` violated by row {row}")]
    SchemaInvariantViolation { invariant: &'static str, row: u32 },
    #[error("unknown relation type `{0}`")]
    UnknownRelationType(String),
}

/// Gender of a person in a task graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn code(self) -> u8 {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
        }
    }

    pub fn from_code(code: &str) -> Option<Gender> {
        match code {
            "0" => Some(Gender::Female),
            "1" => Some(Gender::Male),
            _ => None,
        }
    }

    pub fn opposite(self) -> Gender {
        match self {
            Gender::Female => Gender::Male,
            Gender::Male => Gender::Female,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "female" => Some(Gender::Female),
            "male" => Some(Gender::Male),
            _ => None,
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which genders an endpoint of a schema admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenderConstraint {
    FemaleOnly,
    MaleOnly,
    Any,
}

impl GenderConstraint {
    pub fn admits(self, gender: Gender) -> bool {
        match self {
            GenderConstraint::FemaleOnly => gender == Gender::Female,
            GenderConstraint::MaleOnly => gender == Gender::Male,
            GenderConstraint::Any => true,
        }
    }

    /// The single gender this constraint forces, if any.
    pub fn fixed(self) -> Option<Gender> {
        match self {
            GenderConstraint::FemaleOnly => Some(Gender::Female),
            GenderConstraint::MaleOnly => Some(Gender::Male),
            GenderConstraint::Any => None,
        }
    }

    fn code(self) -> &'static str {
        match self {
            GenderConstraint::FemaleOnly => "0",
            GenderConstraint::MaleOnly => "1",
            GenderConstraint::Any => "2",
        }
    }

    fn from_code(code: &str) -> Option<Self> {
        match code {
            "0" => Some(GenderConstraint::FemaleOnly),
            "1" => Some(GenderConstraint::MaleOnly),
            "2" => Some(GenderConstraint::Any),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentOrder {
    /// Needs no order at all (father).
    NoOrder,
    /// Exactly one current relation at a time (wife).
    SingleCurrent,
    /// Several current relations, told apart by ordinal (third student).
    OrdinalCurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderSpec {
    pub current: CurrentOrder,
    pub former_allowed: bool,
}

impl OrderSpec {
    pub fn code(self) -> &'static str {
        match (self.current, self.former_allowed) {
            (CurrentOrder::NoOrder, _) => "0",
            (CurrentOrder::SingleCurrent, false) => "1",
            (CurrentOrder::SingleCurrent, true) => "1/-",
            (CurrentOrder::OrdinalCurrent, false) => "+",
            (CurrentOrder::OrdinalCurrent, true) => "+/-",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        let (current, former_allowed) = match code {
            "0" => (CurrentOrder::NoOrder, false),
            "1" => (CurrentOrder::SingleCurrent, false),
            "1/-" => (CurrentOrder::SingleCurrent, true),
            "+" => (CurrentOrder::OrdinalCurrent, false),
            "+/-" => (CurrentOrder::OrdinalCurrent, true),
            _ => return None,
        };
        Some(OrderSpec {
            current,
            former_allowed,
        })
    }

    pub fn is_ordinal(self) -> bool {
        self.current == CurrentOrder::OrdinalCurrent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// The head is the `relation` of the tail.
    Directed,
    /// The relation holds both ways.
    Symmetric,
}

impl Direction {
    fn code(self) -> &'static str {
        match self {
            Direction::Directed => "1",
            Direction::Symmetric => "2",
        }
    }

    fn from_code(code: &str) -> Option<Self> {
        match code {
            "1" => Some(Direction::Directed),
            "2" => Some(Direction::Symmetric),
            _ => None,
        }
    }
}

/// Stable lowercase relation token such as `sworn_elder_brother`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationType(String);

impl RelationType {
    pub fn new(token: impl Into<String>) -> Self {
        RelationType(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Human-readable form, `sworn_elder_brother` -> `sworn elder brother`.
    pub fn display(&self) -> String {
        self.0.replace('_', " ")
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RelationType {
    fn from(s: &str) -> Self {
        RelationType::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SchemaEntry {
    pub id: u32,
    pub head: GenderConstraint,
    pub tail: GenderConstraint,
    pub relation: RelationType,
    pub order: OrderSpec,
    pub direction: Direction,
}

impl SchemaEntry {
    pub fn is_symmetric(&self) -> bool {
        self.direction == Direction::Symmetric
    }
}

/// Intrinsic gender of the head of well-known relations, used to sanity
/// check a loaded schema document. Relations not listed are not checked.
fn intrinsic_head_gender(relation: &str) -> Option<Gender> {
    const FEMALE: &[&str] = &[
        "wife",
        "girlfriend",
        "mother",
        "daughter",
        "younger_sister",
        "older_sister",
        "sworn_elder_sister",
        "sworn_younger_sister",
        "goddaughter",
        "godmother",
    ];
    const MALE: &[&str] = &[
        "husband",
        "boyfriend",
        "father",
        "son",
        "younger_brother",
        "older_brother",
        "sworn_elder_brother",
        "sworn_younger_brother",
        "godson",
        "godfather",
    ];
    if FEMALE.contains(&relation) {
        Some(Gender::Female)
    } else if MALE.contains(&relation) {
        Some(Gender::Male)
    } else {
        None
    }
}

const SYMMETRIC_RELATIONS: &[&str] = &["friend", "colleague", "teammate"];

/// Immutable set of basic schemas, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaRegistry {
    entries: Vec<SchemaEntry>,
    by_relation: HashMap<RelationType, usize>,
}

impl SchemaRegistry {
    /// Loads the schema set bundled with the crate.
    pub fn shipped() -> SchemaRegistry {
        load_registry(SHIPPED_SCHEMAS).expect("shipped schema file is valid")
    }

    pub fn entries(&self) -> &[SchemaEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, relation: &RelationType) -> Result<&SchemaEntry, SchemaError> {
        self.by_relation
            .get(relation)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| SchemaError::UnknownRelationType(relation.to_string()))
    }

    pub fn lookup_str(&self, relation: &str) -> Result<&SchemaEntry, SchemaError> {
        self.lookup(&RelationType::new(relation))
    }

    pub fn get(&self, id: u32) -> Option<&SchemaEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Writes the registry back out in the document format it was read from.
    pub fn serialize(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{}|{}|{}|{}|{}|{}\n",
                e.id,
                e.head.code(),
                e.tail.code(),
                e.relation,
                e.order.code(),
                e.direction.code()
            ));
        }
        out
    }
}

/// Parses and validates a schema document.
pub fn load_registry(source: &str) -> Result<SchemaRegistry, SchemaError> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((line, _)) => {
            return Err(SchemaError::MalformedSchemaFile {
                line,
                reason: format!("expected header `{HEADER}`"),
            })
        }
        None => {
            return Err(SchemaError::MalformedSchemaFile {
                line: 0,
                reason: "empty document".into(),
            })
        }
    }

    let mut entries = Vec::new();
    for (line, text) in lines {
        entries.push(parse_row(line, text)?);
    }
    validate(&entries)?;

    let by_relation = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.relation.clone(), i))
        .collect();
    Ok(SchemaRegistry {
        entries,
        by_relation,
    })
}

fn parse_row(line: usize, text: &str) -> Result<SchemaEntry, SchemaError> {
    let bad = |reason: String| SchemaError::MalformedSchemaFile { line, reason };
    let fields: Vec<&str> = text.split('|').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(bad(format!("expected 6 fields, found {}", fields.len())));
    }
    let id = fields[0]
        .parse::<u32>()
        .map_err(|_| bad(format!("bad id `{}`", fields[0])))?;
    let head = GenderConstraint::from_code(fields[1])
        .ok_or_else(|| bad(format!("bad head gender `{}`", fields[1])))?;
    let tail = GenderConstraint::from_code(fields[2])
        .ok_or_else(|| bad(format!("bad tail gender `{}`", fields[2])))?;
    let relation = fields[3];
    if relation.is_empty() || !relation.chars().all(|c| c.is_ascii_lowercase() || c == '_') {
        return Err(bad(format!("bad relation token `{relation}`")));
    }
    let order =
        OrderSpec::from_code(fields[4]).ok_or_else(|| bad(format!("bad order `{}`", fields[4])))?;
    let direction = Direction::from_code(fields[5])
        .ok_or_else(|| bad(format!("bad direction `{}`", fields[5])))?;
    Ok(SchemaEntry {
        id,
        head,
        tail,
        relation: RelationType::new(relation),
        order,
        direction,
    })
}

fn validate(entries: &[SchemaEntry]) -> Result<(), SchemaError> {
    let violation = |invariant, row| SchemaError::SchemaInvariantViolation { invariant, row };

    let mut ids = std::collections::HashSet::new();
    let mut relations = std::collections::HashSet::new();
    for e in entries {
        if !ids.insert(e.id) {
            return Err(violation("unique ids", e.id));
        }
        if !relations.insert(e.relation.as_str()) {
            return Err(violation("unique relation types", e.id));
        }
    }
    let n = entries.len() as u32;
    if n == 0 {
        return Err(violation("ids cover 1..n", 0));
    }
    for e in entries {
        if e.id == 0 || e.id > n {
            return Err(violation("ids cover 1..n", e.id));
        }
    }

    for e in entries {
        if let Some(g) = intrinsic_head_gender(e.relation.as_str()) {
            if e.head.fixed() != Some(g) || e.direction != Direction::Directed {
                return Err(violation("head gender matches relation", e.id));
            }
        }
        if SYMMETRIC_RELATIONS.contains(&e.relation.as_str())
            && (e.direction != Direction::Symmetric
                || e.head != GenderConstraint::Any
                || e.tail != GenderConstraint::Any)
        {
            return Err(violation("symmetric relations admit any gender", e.id));
        }
        if e.direction == Direction::Symmetric && e.head != e.tail {
            return Err(violation("symmetric relations have equal endpoints", e.id));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_has_27_rows() {
        let reg = SchemaRegistry::shipped();
        assert_eq!(reg.len(), 27);
        let ids: Vec<u32> = reg.entries().iter().map(|e| e.id).collect();
        assert_eq!(ids, (1..=27).collect::<Vec<_>>());
    }

    #[test]
    fn row_one_is_student() {
        let reg = SchemaRegistry::shipped();
        let e = reg.get(1).unwrap();
        assert_eq!(e.relation.as_str(), "student");
        assert_eq!(e.head, GenderConstraint::Any);
        assert_eq!(e.tail, GenderConstraint::Any);
        assert_eq!(
            e.order,
            OrderSpec {
                current: CurrentOrder::OrdinalCurrent,
                former_allowed: false
            }
        );
        assert_eq!(e.direction, Direction::Directed);
    }

    #[test]
    fn row_nine_is_wife() {
        let reg = SchemaRegistry::shipped();
        let e = reg.get(9).unwrap();
        assert_eq!(e.relation.as_str(), "wife");
        assert_eq!(e.head, GenderConstraint::FemaleOnly);
        assert_eq!(e.tail, GenderConstraint::MaleOnly);
        assert_eq!(e.order.current, CurrentOrder::SingleCurrent);
        assert!(e.order.former_allowed);
        assert_eq!(e.direction, Direction::Directed);
    }

    #[test]
    fn lookup_father_and_colleague() {
        let reg = SchemaRegistry::shipped();
        let father = reg.lookup_str("father").unwrap();
        assert_eq!(father.id, 8);
        assert_eq!(father.head, GenderConstraint::MaleOnly);
        assert_eq!(father.order.current, CurrentOrder::NoOrder);
        assert_eq!(
            reg.lookup_str("colleague").unwrap().direction,
            Direction::Symmetric
        );
    }

    #[test]
    fn hostile_relation_is_unknown() {
        let reg = SchemaRegistry::shipped();
        assert_eq!(
            reg.lookup_str("enemy"),
            Err(SchemaError::UnknownRelationType("enemy".into()))
        );
    }

    #[test]
    fn duplicate_id_rejected() {
        let doc = SHIPPED_SCHEMAS.replacen("2|2|2|teammate", "1|2|2|teammate", 1);
        assert!(matches!(
            load_registry(&doc),
            Err(SchemaError::SchemaInvariantViolation {
                invariant: "unique ids",
                ..
            })
        ));
    }

    #[test]
    fn incoherent_gender_rejected() {
        let doc = SHIPPED_SCHEMAS.replace("9|0|1|wife", "9|1|1|wife");
        assert_eq!(
            load_registry(&doc),
            Err(SchemaError::SchemaInvariantViolation {
                invariant: "head gender matches relation",
                row: 9
            })
        );
    }

    #[test]
    fn malformed_rows_rejected() {
        let doc = SHIPPED_SCHEMAS.replace("8|1|2|father|0|1", "8|1|2|father|7|1");
        assert!(matches!(
            load_registry(&doc),
            Err(SchemaError::MalformedSchemaFile { .. })
        ));
        assert!(matches!(
            load_registry("nonsense"),
            Err(SchemaError::MalformedSchemaFile { line: 1, .. })
        ));
    }

    #[test]
    fn order_codes_round_trip() {
        for code in ["0", "1", "1/-", "+", "+/-"] {
            assert_eq!(OrderSpec::from_code(code).unwrap().code(), code);
        }
    }

    #[test]
    fn serialize_then_load_is_identity() {
        let reg = SchemaRegistry::shipped();
        let again = load_registry(&reg.serialize()).unwrap();
        assert_eq!(reg, again);
        assert_eq!(reg.serialize(), SHIPPED_SCHEMAS);
    }
}
