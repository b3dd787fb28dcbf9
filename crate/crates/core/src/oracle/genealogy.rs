//! Explicit family-tree construction. Walks the chain on a concrete
//! genealogy, creating people as needed, and classifies the endpoint by
//! searching that tree. Used as a second, non-compositional route to the
//! same coordinates as [`super::kinship`].

use std::collections::HashMap;

use crate::schema::Gender;

use super::kinship::{KinOutcome, KinStep, StepKind};
use super::lexicon::{Elder, KinCoord, Link, Side};

type Pid = usize;

#[derive(Debug, Clone)]
struct Person {
    gender: Gender,
    /// (father, mother)
    parents: Option<(Pid, Pid)>,
    spouse: Option<Pid>,
}

#[derive(Debug, Clone, Default)]
struct Genealogy {
    people: Vec<Person>,
    /// (older, younger) birth-order facts.
    births: Vec<(Pid, Pid)>,
}

impl Genealogy {
    fn add(&mut self, gender: Gender) -> Pid {
        self.people.push(Person {
            gender,
            parents: None,
            spouse: None,
        });
        self.people.len() - 1
    }

    fn marry(&mut self, a: Pid, b: Pid) {
        self.people[a].spouse = Some(b);
        self.people[b].spouse = Some(a);
    }

    fn parents_of(&mut self, p: Pid) -> (Pid, Pid) {
        if let Some(pp) = self.people[p].parents {
            return pp;
        }
        let f = self.add(Gender::Male);
        let m = self.add(Gender::Female);
        self.marry(f, m);
        self.people[p].parents = Some((f, m));
        (f, m)
    }

    /// Spouse of `p`; `None` if `p` is married to someone of the same
    /// gender as requested.
    fn spouse_of(&mut self, p: Pid, gender: Gender) -> Option<Pid> {
        if self.people[p].gender == gender {
            return None;
        }
        if let Some(s) = self.people[p].spouse {
            return Some(s);
        }
        let s = self.add(gender);
        self.marry(p, s);
        Some(s)
    }

    fn child_of(&mut self, p: Pid, gender: Gender) -> Option<Pid> {
        let other_gender = self.people[p].gender.opposite();
        let partner = self.spouse_of(p, other_gender)?;
        let (f, m) = if self.people[p].gender == Gender::Male {
            (p, partner)
        } else {
            (partner, p)
        };
        let c = self.add(gender);
        self.people[c].parents = Some((f, m));
        Some(c)
    }

    fn step(&mut self, from: Pid, step: KinStep) -> Option<Pid> {
        match step.kind {
            StepKind::Parent => {
                let (f, m) = self.parents_of(from);
                Some(if step.gender == Gender::Male { f } else { m })
            }
            StepKind::Child => self.child_of(from, step.gender),
            StepKind::Spouse => self.spouse_of(from, step.gender),
            StepKind::OlderSibling | StepKind::YoungerSibling => {
                let parents = self.parents_of(from);
                let s = self.add(step.gender);
                self.people[s].parents = Some(parents);
                if step.kind == StepKind::OlderSibling {
                    self.births.push((s, from));
                } else {
                    self.births.push((from, s));
                }
                Some(s)
            }
        }
    }

    /// Ancestors of `p` (including `p` at depth 0) with their depth.
    fn ancestors(&self, p: Pid) -> HashMap<Pid, u8> {
        let mut out = HashMap::new();
        let mut frontier = vec![p];
        let mut depth = 0u8;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for q in frontier {
                if out.contains_key(&q) {
                    continue;
                }
                out.insert(q, depth);
                if let Some((f, m)) = self.people[q].parents {
                    next.push(f);
                    next.push(m);
                }
            }
            frontier = next;
            depth += 1;
        }
        out
    }

    /// Whether `a` is born before `b` in every birth order of their family
    /// consistent with the recorded facts.
    fn birth_relation(&self, a: Pid, b: Pid) -> Option<Elder> {
        let family = self.people[a].parents?;
        let kids: Vec<Pid> = (0..self.people.len())
            .filter(|&k| self.people[k].parents == Some(family))
            .collect();
        let facts: Vec<(Pid, Pid)> = self
            .births
            .iter()
            .copied()
            .filter(|(x, y)| kids.contains(x) && kids.contains(y))
            .collect();
        let mut a_first = false;
        let mut b_first = false;
        let mut order = kids.clone();
        permutations(&mut order, 0, &mut |perm| {
            let pos = |x: Pid| perm.iter().position(|&k| k == x).expect("member");
            if facts.iter().all(|&(o, y)| pos(o) < pos(y)) {
                if pos(a) < pos(b) {
                    a_first = true;
                } else {
                    b_first = true;
                }
            }
        });
        match (a_first, b_first) {
            (true, false) => Some(Elder::Older),
            (false, true) => Some(Elder::Younger),
            _ => None,
        }
    }

    /// Blood coordinate of `target` relative to `reference`: (up, down,
    /// side, elder) through the nearest common ancestor.
    fn blood(&self, reference: Pid, target: Pid) -> Option<(u8, u8, Option<Side>, Option<Elder>)> {
        let mine = self.ancestors(reference);
        let theirs = self.ancestors(target);
        let (&anc, &up, &down) = mine
            .iter()
            .filter_map(|(a, u)| theirs.get(a).map(|d| (a, u, d)))
            .min_by_key(|&(a, u, d)| (u + d, *u, *a))?;
        let side = if up >= 2 {
            let (f, _) = self.people[reference].parents.expect("has ancestors");
            if self.ancestors(f).contains_key(&anc) {
                Some(Side::Paternal)
            } else {
                Some(Side::Maternal)
            }
        } else {
            None
        };
        let elder = if up == 1 && down == 1 {
            self.birth_relation(target, reference)
        } else {
            None
        };
        Some((up, down, side, elder))
    }

    fn classify(&self, ego: Pid, target: Pid) -> KinOutcome {
        if ego == target {
            return KinOutcome::Coord(KinCoord::self_ref());
        }
        let gender = Some(self.people[target].gender);
        if let Some((u, d, side, elder)) = self.blood(ego, target) {
            return KinOutcome::Coord(KinCoord::new(Link::Blood, u, d, side, elder, gender));
        }
        if let Some(s) = self.people[target].spouse {
            if s == ego {
                return KinOutcome::Coord(KinCoord::new(Link::SpouseOf, 0, 0, None, None, gender));
            }
            if let Some((u, d, side, _)) = self.blood(ego, s) {
                return KinOutcome::Coord(KinCoord::new(Link::SpouseOf, u, d, side, None, gender));
            }
        }
        if let Some(e) = self.people[ego].spouse {
            if let Some((u, d, side, _)) = self.blood(e, target) {
                return KinOutcome::Coord(KinCoord::new(Link::ViaSpouse, u, d, side, None, gender));
            }
        }
        KinOutcome::Unclassified
    }
}

fn permutations(items: &mut Vec<Pid>, k: usize, visit: &mut dyn FnMut(&[Pid])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Walks `steps` from a person of gender `start` on a freshly built family
/// tree and classifies where the walk ends.
pub fn walk_steps(start: Gender, steps: &[KinStep]) -> KinOutcome {
    let mut tree = Genealogy::default();
    let ego = tree.add(start);
    let mut at = ego;
    for &s in steps {
        match tree.step(at, s) {
            Some(next) if tree.people[next].gender == s.gender => at = next,
            _ => return KinOutcome::Unsatisfiable,
        }
    }
    tree.classify(ego, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Gender::{Female as F, Male as M};

    fn s(kind: StepKind, gender: Gender) -> KinStep {
        KinStep { kind, gender }
    }

    fn key(start: Gender, steps: &[KinStep]) -> String {
        match walk_steps(start, steps) {
            KinOutcome::Coord(c) => c.key(),
            other => format!("{other:?}"),
        }
    }

    #[test]
    fn maternal_grandfather() {
        assert_eq!(
            key(M, &[s(StepKind::Parent, F), s(StepKind::Parent, M)]),
            "blood:2:0:mat:*:m"
        );
    }

    #[test]
    fn father_of_son_is_self() {
        assert_eq!(
            key(M, &[s(StepKind::Child, M), s(StepKind::Parent, M)]),
            "self:0:0:*:*:*"
        );
    }

    #[test]
    fn birth_order_resolved() {
        assert_eq!(
            key(
                F,
                &[s(StepKind::OlderSibling, M), s(StepKind::OlderSibling, F)]
            ),
            "blood:1:1:*:older:f"
        );
        assert_eq!(
            key(
                F,
                &[s(StepKind::OlderSibling, M), s(StepKind::YoungerSibling, F)]
            ),
            "blood:1:1:*:*:f"
        );
    }

    #[test]
    fn in_laws() {
        assert_eq!(
            key(M, &[s(StepKind::Spouse, F), s(StepKind::Parent, F)]),
            "inlaw:1:0:*:*:f"
        );
        assert_eq!(
            key(
                F,
                &[
                    s(StepKind::Parent, M),
                    s(StepKind::OlderSibling, M),
                    s(StepKind::Spouse, F)
                ]
            ),
            "spouse:2:1:pat:*:f"
        );
    }

    #[test]
    fn same_gender_spouse_impossible() {
        assert_eq!(key(M, &[s(StepKind::Spouse, M)]), "Unsatisfiable");
    }
}
