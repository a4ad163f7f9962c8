use homaloidal::graphs::*;
use homaloidal::models::chordal_phi_unverified;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_from_mask(m: usize, mask: u32) -> UGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for a in 0..m {
        for b in a + 1..m {
            if mask >> bit & 1 == 1 {
                edges.push((a, b));
            }
            bit += 1;
        }
    }
    UGraph::new(m, &edges).unwrap()
}

/// Some vertex subset of size ≥ 4 induces a connected 2-regular graph.
fn has_hole(g: &UGraph) -> bool {
    let m = g.size();
    (0u32..1 << m).any(|s| {
        let vs: Vec<usize> = (0..m).filter(|v| s >> v & 1 == 1).collect();
        vs.len() >= 4 && is_cycle(&g.induced(&vs))
    })
}

fn is_cycle(h: &UGraph) -> bool {
    let n = h.size();
    if (0..n).any(|v| h.neighbors(v).len() != 2) {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(h.neighbors(v));
        }
    }
    seen.iter().all(|&x| x)
}

fn is_induced_cycle(g: &UGraph, c: &[usize]) -> bool {
    let mut vs = c.to_vec();
    vs.sort();
    vs.dedup();
    vs.len() == c.len() && c.len() >= 4 && is_cycle(&g.induced(&vs))
        && (0..c.len()).all(|i| g.has_edge(c[i], c[(i + 1) % c.len()]))
}

#[test]
fn chordality_matches_hole_search() {
    for m in 1..=6 {
        let pairs = m * (m - 1) / 2;
        for mask in 0u32..1 << pairs {
            let g = graph_from_mask(m, mask);
            match g.chordality() {
                Chordality::Chordal(peo) => {
                    assert!(!has_hole(&g), "m={m} mask={mask}");
                    assert!(g.is_perfect_elimination_ordering(&peo));
                }
                Chordality::NotChordal(c) => {
                    assert!(has_hole(&g), "m={m} mask={mask}");
                    assert!(is_induced_cycle(&g, &c), "m={m} mask={mask} cycle {c:?}");
                }
            }
        }
    }
}

#[test]
fn cycles_are_not_chordal() {
    for m in 4..=9 {
        let g = UGraph::cycle(m);
        let Chordality::NotChordal(c) = g.chordality() else { panic!() };
        assert_eq!(c.len(), m);
    }
}

#[test]
fn graph_json() {
    let g = GraphSpec::from_json(r#"{"m": 3, "edges": [[1, 2], [2, 3]]}"#).unwrap();
    assert_eq!(g, Graph::Undirected(UGraph::path(3)));
    assert!(GraphSpec::from_json(r#"{"m": 2, "edges": [[0, 1]]}"#).is_err());
    assert!(GraphSpec::from_json(r#"{"m": 2, "edges": [[1, 2], [2, 1]], "directed": true}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decompositions_are_valid(m in 1usize..=9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_chordal(m, &mut rng);
        let peo = g.is_chordal().expect("generator builds chordal graphs");
        let d = decompose(&g, &peo).unwrap();
        prop_assert!(validate_decomposition(&g, &d).is_ok());
        let r = decompose_random(&g, &mut rng).unwrap();
        prop_assert!(validate_decomposition(&g, &r).is_ok());
        let mut vs = d.vertices();
        vs.sort();
        prop_assert_eq!(vs, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn phi_is_decomposition_independent(m in 2usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_chordal(m, &mut rng);
        let peo = g.is_chordal().unwrap();
        let base = chordal_phi_unverified(&g, &decompose(&g, &peo).unwrap()).unwrap();
        for _ in 0..3 {
            let d = decompose_random(&g, &mut rng).unwrap();
            prop_assert_eq!(&chordal_phi_unverified(&g, &d).unwrap(), &base);
        }
    }

    #[test]
    fn random_dags_are_ordered(m in 1usize..=20, k in 0usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_dag(m, k, &mut rng);
        let order = g.topological_order().unwrap();
        let pos: Vec<usize> = {
            let mut p = vec![0; m];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        for (a, b) in g.edges() {
            prop_assert!(pos[a] < pos[b]);
        }
        for v in 0..m {
            prop_assert!(g.parents(v).unwrap().len() <= k);
        }
        let spec = GraphSpec::of_dag(&g);
        prop_assert_eq!(spec.build().unwrap(), Graph::Directed(g));
    }
}
