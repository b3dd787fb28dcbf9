use rocar::graph::NodeId;
use rocar::oracle::kinship::{compose_coordinate, KinOutcome, KIN_RELATIONS};
use rocar::oracle::lexicon::Lexicon;
use rocar::oracle::{
    brute_force_designation, compose_designation, OracleError, RelationAtom, RelationChain,
};
use rocar::schema::Gender;

fn atom_pool() -> Vec<RelationAtom> {
    let mut pool = Vec::new();
    for (r, _, _) in KIN_RELATIONS {
        pool.push(RelationAtom::forward(r));
        for g in Gender::ALL {
            pool.push(RelationAtom::inverse(r, g));
        }
    }
    pool
}

fn chains(pool: &[RelationAtom], max_len: usize) -> Vec<Vec<RelationAtom>> {
    let mut out: Vec<Vec<RelationAtom>> = Vec::new();
    let mut frontier: Vec<Vec<RelationAtom>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for c in &frontier {
            for a in pool {
                let mut c2 = c.clone();
                c2.push(a.clone());
                next.push(c2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn fold_agrees_with_family_tree_on_short_chains() {
    let lex = Lexicon::shipped();
    let pool = atom_pool();
    let mut checked = 0usize;
    for atoms in chains(&pool, 3) {
        for start in Gender::ALL {
            for end in Gender::ALL {
                let composed = compose_designation(&lex, &atoms, start, end);
                match brute_force_designation(&lex, &atoms, start, end) {
                    Ok(d) => assert_eq!(composed, d, "{atoms:?} {start:?}->{end:?}"),
                    Err(OracleError::UnsatisfiableChain) => {}
                    Err(e) => panic!("{e}"),
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 100_000);
}

#[test]
fn reversed_chain_gives_inverse_coordinate() {
    let pool = atom_pool();
    let mut both = 0usize;
    for atoms in chains(&pool, 3) {
        for start in Gender::ALL {
            for end in Gender::ALL {
                let chain = RelationChain {
                    from: NodeId(0),
                    to: NodeId(1),
                    atoms: atoms.clone(),
                };
                let back = chain.reversed(start);
                let fwd = compose_coordinate(&chain.atoms, start, end);
                let rev = compose_coordinate(&back.atoms, end, start);
                match (fwd, rev) {
                    (KinOutcome::Coord(f), KinOutcome::Coord(r)) => {
                        let mut expected = f.inverse(start);
                        let mut got = r;
                        expected.side = None;
                        got.side = None;
                        assert_eq!(got, expected, "{atoms:?} {start:?}->{end:?}");
                        both += 1;
                    }
                    (KinOutcome::Unsatisfiable, _) => {}
                    (KinOutcome::Unclassified, KinOutcome::Unclassified) => {}
                    (f, r) => panic!("{atoms:?} {start:?}->{end:?}: {f:?} vs {r:?}"),
                }
            }
        }
    }
    assert!(both > 1000);
}
