//! Kinship composition: atoms are reduced to primitive family steps, then
//! folded left to right into a [`KinCoord`].

use crate::schema::Gender;

use super::lexicon::{Elder, KinCoord, Link, Side};
use super::{Orientation, RelationAtom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    Parent,
    Child,
    OlderSibling,
    YoungerSibling,
    Spouse,
}

impl StepKind {
    fn inverse(self) -> StepKind {
        match self {
            StepKind::Parent => StepKind::Child,
            StepKind::Child => StepKind::Parent,
            StepKind::OlderSibling => StepKind::YoungerSibling,
            StepKind::YoungerSibling => StepKind::OlderSibling,
            StepKind::Spouse => StepKind::Spouse,
        }
    }
}

/// "The next person is the current person's `kind`, of `gender`."
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KinStep {
    pub kind: StepKind,
    pub gender: Gender,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepError {
    /// The chain contains a relation outside the family vocabulary.
    NonKin,
    /// The genders along the chain contradict the relations.
    Unsatisfiable,
    /// An intermediate person's gender is not determined.
    UnknownGender,
}

/// The family relations and the gender each one fixes.
pub const KIN_RELATIONS: [(&str, StepKind, Gender); 10] = [
    ("father", StepKind::Parent, Gender::Male),
    ("mother", StepKind::Parent, Gender::Female),
    ("son", StepKind::Child, Gender::Male),
    ("daughter", StepKind::Child, Gender::Female),
    ("older_brother", StepKind::OlderSibling, Gender::Male),
    ("older_sister", StepKind::OlderSibling, Gender::Female),
    ("younger_brother", StepKind::YoungerSibling, Gender::Male),
    ("younger_sister", StepKind::YoungerSibling, Gender::Female),
    ("husband", StepKind::Spouse, Gender::Male),
    ("wife", StepKind::Spouse, Gender::Female),
];

pub fn kin_relation(relation: &str) -> Option<(StepKind, Gender)> {
    KIN_RELATIONS
        .iter()
        .find(|(r, _, _)| *r == relation)
        .map(|&(_, k, g)| (k, g))
}

/// Reduces a chain to primitive steps. `start` and `end` are the genders of
/// the chain's endpoints.
pub fn kin_steps(
    atoms: &[RelationAtom],
    start: Gender,
    end: Gender,
) -> Result<Vec<KinStep>, StepError> {
    let mut steps = Vec::with_capacity(atoms.len());
    let mut current = start;
    for (i, atom) in atoms.iter().enumerate() {
        let last = i + 1 == atoms.len();
        let (kind, intrinsic) = kin_relation(atom.relation.as_str()).ok_or(StepError::NonKin)?;
        let (kind, next) = match atom.orientation {
            Orientation::Forward | Orientation::Mutual => (kind, intrinsic),
            Orientation::Inverse => {
                // The current person is the next person's `relation`.
                if current != intrinsic {
                    return Err(StepError::Unsatisfiable);
                }
                let next = match (atom.target_gender, last) {
                    (Some(g), _) => g,
                    (None, true) => end,
                    (None, false) => return Err(StepError::UnknownGender),
                };
                (kind.inverse(), next)
            }
        };
        if atom.target_gender.is_some_and(|g| g != next) || (last && next != end) {
            return Err(StepError::Unsatisfiable);
        }
        if kind == StepKind::Spouse && next == current {
            return Err(StepError::Unsatisfiable);
        }
        steps.push(KinStep { kind, gender: next });
        current = next;
    }
    Ok(steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KinOutcome {
    Coord(KinCoord),
    Unclassified,
    Unsatisfiable,
}

/// Blood position relative to a reference person: `up` generations to the
/// common ancestor, then `down` along `line` (genders of each person on the
/// way down, the last being the relative).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Blood {
    up: u8,
    side: Option<Side>,
    elder: Option<Elder>,
    line: Vec<Gender>,
    gender: Gender,
}

impl Blood {
    fn ego(gender: Gender) -> Blood {
        Blood {
            up: 0,
            side: None,
            elder: None,
            line: Vec::new(),
            gender,
        }
    }

    fn down(&self) -> usize {
        self.line.len()
    }

    fn is_self(&self) -> bool {
        self.up == 0 && self.line.is_empty()
    }

    fn coord(&self, link: Link) -> KinCoord {
        if link == Link::Blood && self.is_self() {
            return KinCoord::self_ref();
        }
        KinCoord::new(
            link,
            self.up,
            self.down() as u8,
            self.side,
            self.elder,
            Some(self.gender),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum State {
    Blood(Blood),
    /// Spouse (of the given gender) of a blood relative.
    SpouseOf(Blood, Gender),
    /// Blood relative of the reference person's spouse.
    ViaSpouse(Blood),
    Unclassified,
    Unsatisfiable,
}

fn sibling_elder(kind: StepKind) -> Elder {
    if kind == StepKind::OlderSibling {
        Elder::Older
    } else {
        Elder::Younger
    }
}

/// Relative age of a sibling's sibling against the reference person.
fn chain_elder(previous: Option<Elder>, step: Elder) -> Option<Elder> {
    previous.filter(|&p| p == step)
}

/// One step of blood arithmetic. `elder` tracks the age of `line[0]`
/// against the reference person and is only read for blood siblings.
fn blood_step(b: &Blood, step: KinStep, ego_gender: Gender) -> State {
    let g = step.gender;
    let mut n = b.clone();
    n.gender = g;
    match step.kind {
        StepKind::Parent => match b.down() {
            0 => {
                n.up += 1;
                if b.up == 0 {
                    n.side = Some(Side::of_parent(g));
                }
                State::Blood(n)
            }
            1 if b.up == 0 => {
                // Parent of one's own child: oneself or one's spouse.
                if g == ego_gender {
                    State::Blood(Blood::ego(ego_gender))
                } else {
                    State::SpouseOf(Blood::ego(ego_gender), g)
                }
            }
            1 => {
                n.line.clear();
                n.elder = None;
                if b.up == 1 {
                    n.side = Some(Side::of_parent(g));
                }
                State::Blood(n)
            }
            d => {
                let parent = b.line[d - 2];
                n.line.pop();
                if parent == g {
                    State::Blood(n)
                } else {
                    n.gender = parent;
                    State::SpouseOf(n, g)
                }
            }
        },
        StepKind::Child => {
            if b.down() == 0 {
                n.elder = None;
            }
            n.line.push(g);
            State::Blood(n)
        }
        StepKind::OlderSibling | StepKind::YoungerSibling => {
            let e = sibling_elder(step.kind);
            if b.is_self() {
                n.up = 1;
                n.line = vec![g];
                n.elder = Some(e);
            } else if b.down() == 0 {
                n.up += 1;
                n.line = vec![g];
                n.elder = None;
            } else {
                let last = n.line.len() - 1;
                n.line[last] = g;
                if b.down() == 1 {
                    n.elder = chain_elder(b.elder, e);
                }
            }
            State::Blood(n)
        }
        StepKind::Spouse => {
            if b.is_self() {
                State::SpouseOf(Blood::ego(ego_gender), g)
            } else if b.down() == 0 {
                // The other half of an ancestor couple.
                if b.up == 1 {
                    n.side = Some(Side::of_parent(g));
                }
                State::Blood(n)
            } else {
                State::SpouseOf(b.clone(), g)
            }
        }
    }
}

fn through_spouse(inner: State, ego_gender: Gender) -> State {
    match inner {
        State::Blood(b) if b.is_self() => State::SpouseOf(Blood::ego(ego_gender), b.gender),
        State::Blood(b) if b.up == 0 => State::Blood(b),
        State::Blood(b) => State::ViaSpouse(b),
        State::SpouseOf(b, _) if b.is_self() => State::Blood(Blood::ego(ego_gender)),
        State::Unsatisfiable => State::Unsatisfiable,
        _ => State::Unclassified,
    }
}

fn current_gender(state: &State) -> Option<Gender> {
    match state {
        State::Blood(b) | State::ViaSpouse(b) => Some(b.gender),
        State::SpouseOf(_, g) => Some(*g),
        _ => None,
    }
}

fn advance(state: State, step: KinStep, ego_gender: Gender) -> State {
    if step.kind == StepKind::Spouse && current_gender(&state) == Some(step.gender) {
        return State::Unsatisfiable;
    }
    match state {
        State::Blood(b) => blood_step(&b, step, ego_gender),
        State::SpouseOf(b, spouse_gender) => match step.kind {
            StepKind::Spouse => State::Blood(Blood {
                gender: step.gender,
                ..b
            }),
            StepKind::Child => blood_step(&b, step, ego_gender),
            StepKind::Parent | StepKind::OlderSibling | StepKind::YoungerSibling => {
                if b.is_self() {
                    // Family of one's own spouse.
                    let spouse = Blood::ego(spouse_gender);
                    through_spouse(blood_step(&spouse, step, spouse_gender), ego_gender)
                } else {
                    State::Unclassified
                }
            }
        },
        State::ViaSpouse(inner) => {
            let spouse_gender = ego_gender.opposite();
            through_spouse(blood_step(&inner, step, spouse_gender), ego_gender)
        }
        other => other,
    }
}

/// Folds primitive steps from a reference person of gender `start`.
pub fn fold_steps(start: Gender, steps: &[KinStep]) -> KinOutcome {
    let mut state = State::Blood(Blood::ego(start));
    for &step in steps {
        state = advance(state, step, start);
        if matches!(state, State::Unsatisfiable | State::Unclassified) {
            break;
        }
    }
    match state {
        State::Blood(b) => KinOutcome::Coord(b.coord(Link::Blood)),
        State::SpouseOf(b, g) => KinOutcome::Coord(KinCoord::new(
            Link::SpouseOf,
            b.up,
            b.down() as u8,
            b.side,
            None,
            Some(g),
        )),
        State::ViaSpouse(b) => KinOutcome::Coord(b.coord(Link::ViaSpouse)),
        State::Unclassified => KinOutcome::Unclassified,
        State::Unsatisfiable => KinOutcome::Unsatisfiable,
    }
}

/// Compositional kin coordinate of a chain.
pub fn compose_coordinate(atoms: &[RelationAtom], start: Gender, end: Gender) -> KinOutcome {
    match kin_steps(atoms, start, end) {
        Ok(steps) => fold_steps(start, &steps),
        Err(StepError::Unsatisfiable) => KinOutcome::Unsatisfiable,
        Err(_) => KinOutcome::Unclassified,
    }
}
