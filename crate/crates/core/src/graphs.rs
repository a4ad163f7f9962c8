//! Undirected graphs, DAGs, chordality and weak decompositions.
//!
//! Vertices are zero-based internally. The JSON form uses vertices `1..=m`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UGraph {
    m: usize,
    adj: Vec<Vec<bool>>,
}

impl UGraph {
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![vec![false; m]; m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside {m} vertices")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Ok(UGraph { m, adj })
    }

    pub fn empty(m: usize) -> Self {
        UGraph::new(m, &[]).unwrap()
    }

    pub fn complete(m: usize) -> Self {
        let edges: Vec<_> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        UGraph::new(m, &edges).unwrap()
    }

    pub fn path(m: usize) -> Self {
        let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        UGraph::new(m, &edges).unwrap()
    }

    pub fn cycle(m: usize) -> Self {
        let mut edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        if m > 2 {
            edges.push((m - 1, 0));
        }
        UGraph::new(m, &edges).unwrap()
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|i| (i + 1..self.m).filter(move |&j| self.adj[i][j]).map(move |j| (i, j)))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.m).filter(|&u| self.adj[v][u]).collect()
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(k, &a)| vs[k + 1..].iter().all(|&b| self.adj[a][b]))
    }

    pub fn is_complete(&self) -> bool {
        self.is_clique(&(0..self.m).collect::<Vec<_>>())
    }

    /// Maximum cardinality search visit order (ties broken by smallest vertex).
    pub fn mcs(&self) -> Vec<usize> {
        let mut weight = vec![0usize; self.m];
        let mut done = vec![false; self.m];
        let mut order = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            let v = (0..self.m)
                .filter(|&v| !done[v])
                .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
                .unwrap();
            done[v] = true;
            order.push(v);
            for u in 0..self.m {
                if self.adj[v][u] && !done[u] {
                    weight[u] += 1;
                }
            }
        }
        order
    }

    /// Whether every vertex's later neighbors in `order` form a clique.
    pub fn is_perfect_elimination_ordering(&self, order: &[usize]) -> bool {
        if !is_permutation(order, self.m) {
            return false;
        }
        let mut pos = vec![0; self.m];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        order.iter().all(|&v| {
            let later: Vec<usize> = self.neighbors(v).into_iter().filter(|&u| pos[u] > pos[v]).collect();
            self.is_clique(&later)
        })
    }

    /// A perfect elimination ordering (reverse MCS order), or an induced cycle of length at least four.
    pub fn chordality(&self) -> Chordality {
        let mut peo = self.mcs();
        peo.reverse();
        if self.is_perfect_elimination_ordering(&peo) {
            Chordality::Chordal(peo)
        } else {
            Chordality::NotChordal(self.find_induced_cycle().expect("non-chordal graph has a hole"))
        }
    }

    pub fn is_chordal(&self) -> Option<Vec<usize>> {
        match self.chordality() {
            Chordality::Chordal(p) => Some(p),
            Chordality::NotChordal(_) => None,
        }
    }

    /// A chordless cycle of length at least four, if one exists.
    pub fn find_induced_cycle(&self) -> Option<Vec<usize>> {
        for v in 0..self.m {
            let nb = self.neighbors(v);
            for (k, &a) in nb.iter().enumerate() {
                for &b in &nb[k + 1..] {
                    if self.adj[a][b] {
                        continue;
                    }
                    // shortest a-b path avoiding v and v's other neighbors
                    let blocked: Vec<bool> = (0..self.m)
                        .map(|u| u == v || (self.adj[v][u] && u != a && u != b))
                        .collect();
                    if let Some(path) = self.shortest_path(a, b, &blocked) {
                        let mut cycle = vec![v];
                        cycle.extend(path);
                        return Some(cycle);
                    }
                }
            }
        }
        None
    }

    fn shortest_path(&self, a: usize, b: usize, blocked: &[bool]) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.m];
        let mut seen = vec![false; self.m];
        let mut q = VecDeque::new();
        seen[a] = true;
        q.push_back(a);
        while let Some(x) = q.pop_front() {
            if x == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for y in 0..self.m {
                if self.adj[x][y] && !seen[y] && !blocked[y] {
                    seen[y] = true;
                    prev[y] = x;
                    q.push_back(y);
                }
            }
        }
        None
    }

    /// Induced subgraph on the sorted vertex list, relabelled `0..vs.len()`.
    pub fn induced(&self, vs: &[usize]) -> UGraph {
        let adj = vs
            .iter()
            .map(|&a| vs.iter().map(|&b| self.adj[a][b]).collect())
            .collect();
        UGraph { m: vs.len(), adj }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chordality {
    Chordal(Vec<usize>),
    NotChordal(Vec<usize>),
}

fn is_permutation(order: &[usize], m: usize) -> bool {
    if order.len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    order.iter().all(|&v| v < m && !std::mem::replace(&mut seen[v], true))
}

/// Recursive weak decomposition with complete leaves. Vertex sets are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeakDecomposition {
    Leaf(Vec<usize>),
    Split {
        a: Vec<usize>,
        c: Vec<usize>,
        b: Vec<usize>,
        left: Box<WeakDecomposition>,
        right: Box<WeakDecomposition>,
    },
}

impl WeakDecomposition {
    pub fn vertices(&self) -> Vec<usize> {
        match self {
            WeakDecomposition::Leaf(v) => v.clone(),
            WeakDecomposition::Split { a, c, b, .. } => union(&union(a, c), b),
        }
    }

    /// Number of leaves.
    pub fn leaves(&self) -> usize {
        match self {
            WeakDecomposition::Leaf(_) => 1,
            WeakDecomposition::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Eliminates the first vertex of the perfect elimination ordering (a
/// simplicial vertex `v`): `A = {v}`, `C = N(v)`, `B` the rest, recursing on `B ∪ C`.
pub fn decompose(g: &UGraph, peo: &[usize]) -> Result<WeakDecomposition> {
    if !g.is_perfect_elimination_ordering(peo) {
        return Err(Error::InvalidOrdering(format!("{peo:?} is not a perfect elimination ordering")));
    }
    let vs: Vec<usize> = (0..g.size()).collect();
    let mut order = peo.to_vec();
    Ok(decompose_by(g, &vs, &mut |cands: &[usize]| {
        let pick = *order.iter().find(|v| cands.contains(v)).expect("PEO vertex is simplicial");
        order.retain(|&v| v != pick);
        pick
    }))
}

/// Decomposition that eliminates a uniformly random simplicial vertex at each step.
pub fn decompose_random<R: Rng>(g: &UGraph, rng: &mut R) -> Result<WeakDecomposition> {
    if g.is_chordal().is_none() {
        return Err(Error::NotChordal(g.find_induced_cycle().unwrap_or_default()));
    }
    let vs: Vec<usize> = (0..g.size()).collect();
    Ok(decompose_by(g, &vs, &mut |cands: &[usize]| *cands.choose(rng).unwrap()))
}

fn decompose_by(g: &UGraph, vs: &[usize], choose: &mut dyn FnMut(&[usize]) -> usize) -> WeakDecomposition {
    if g.is_clique(vs) {
        return WeakDecomposition::Leaf(vs.to_vec());
    }
    let in_vs = |u: usize| vs.binary_search(&u).is_ok();
    let simplicial: Vec<usize> = vs
        .iter()
        .copied()
        .filter(|&v| {
            let nb: Vec<usize> = g.neighbors(v).into_iter().filter(|&u| in_vs(u)).collect();
            g.is_clique(&nb)
        })
        .collect();
    let v = choose(&simplicial);
    let c: Vec<usize> = g.neighbors(v).into_iter().filter(|&u| in_vs(u)).collect();
    let b: Vec<usize> = vs.iter().copied().filter(|&u| u != v && !c.contains(&u)).collect();
    let left = WeakDecomposition::Leaf(union(&[v], &c));
    let right = decompose_by(g, &union(&b, &c), choose);
    WeakDecomposition::Split {
        a: vec![v],
        c,
        b,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Checks every structural invariant of a decomposition of `g`.
pub fn validate_decomposition(g: &UGraph, d: &WeakDecomposition) -> Result<()> {
    let all: Vec<usize> = (0..g.size()).collect();
    validate_node(g, d, &all)
}

fn validate_node(g: &UGraph, d: &WeakDecomposition, vs: &[usize]) -> Result<()> {
    let fail = |m: String| Err(Error::InvalidGraph(m));
    match d {
        WeakDecomposition::Leaf(l) => {
            if l != vs {
                return fail(format!("leaf {l:?} does not cover {vs:?}"));
            }
            if !g.is_clique(l) {
                return fail(format!("leaf {l:?} is not complete"));
            }
            Ok(())
        }
        WeakDecomposition::Split { a, c, b, left, right } => {
            if a.is_empty() || b.is_empty() {
                return fail("empty side in a split".into());
            }
            let total = a.len() + b.len() + c.len();
            let u = union(&union(a, c), b);
            if u.len() != total || u != vs {
                return fail(format!("split {a:?}|{c:?}|{b:?} is not a partition of {vs:?}"));
            }
            if !g.is_clique(c) {
                return fail(format!("separator {c:?} is not complete"));
            }
            if a.iter().any(|&x| b.iter().any(|&y| g.has_edge(x, y))) {
                return fail(format!("edge between {a:?} and {b:?}"));
            }
            validate_node(g, left, &union(a, c))?;
            validate_node(g, right, &union(b, c))
        }
    }
}

/// Random chordal graph grown clique by clique: each new vertex attaches to a random clique of the current graph.
pub fn random_chordal<R: Rng>(m: usize, rng: &mut R) -> UGraph {
    let mut edges = Vec::new();
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for v in 0..m {
        if v == 0 {
            cliques.push(vec![0]);
            continue;
        }
        let base = cliques.choose(rng).unwrap().clone();
        let attach: Vec<usize> = base.into_iter().filter(|_| rng.gen_bool(0.6)).collect();
        for &u in &attach {
            edges.push((u, v));
        }
        let mut nc = attach;
        nc.push(v);
        cliques.push(nc);
    }
    UGraph::new(m, &edges).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    m: usize,
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// Edges `(i, j)` mean `i → j`.
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut parents = vec![Vec::new(); m];
        for &(a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside {m} vertices")));
            }
            if a == b {
                return Err(Error::Cyclic);
            }
            if !parents[b].contains(&a) {
                parents[b].push(a);
            }
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        let d = Dag { m, parents };
        d.topological_order()?;
        Ok(d)
    }

    pub fn empty(m: usize) -> Self {
        Dag::new(m, &[]).unwrap()
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn parents(&self, v: usize) -> Result<&[usize]> {
        self.parents
            .get(v)
            .map(|p| p.as_slice())
            .ok_or_else(|| Error::BadIndex(format!("vertex {v} outside 0..{}", self.m)))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(v, ps)| ps.iter().map(move |&p| (p, v)))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut children = vec![Vec::new(); self.m];
        for (v, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(v);
            }
        }
        let mut ready: Vec<usize> = (0..self.m).filter(|&v| indeg[v] == 0).collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.m);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() == self.m {
            Ok(order)
        } else {
            Err(Error::Cyclic)
        }
    }

    /// The undirected skeleton.
    pub fn skeleton(&self) -> UGraph {
        UGraph::new(self.m, &self.edges()).unwrap()
    }
}

/// Random DAG on `m` vertices in which vertex `v` draws at most `max_parents` parents among `0..v`.
pub fn random_dag<R: Rng>(m: usize, max_parents: usize, rng: &mut R) -> Dag {
    let mut edges = Vec::new();
    for v in 1..m {
        let k = rng.gen_range(0..=max_parents.min(v));
        let mut cands: Vec<usize> = (0..v).collect();
        cands.shuffle(rng);
        for &p in &cands[..k] {
            edges.push((p, v));
        }
    }
    Dag::new(m, &edges).expect("edges point forward")
}

/// Graph JSON: `{"m": int, "edges": [[i, j], ...], "directed": bool}` with 1-based vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub m: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub directed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Graph {
    Undirected(UGraph),
    Directed(Dag),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        let mut edges = Vec::with_capacity(self.edges.len());
        for &[a, b] in &self.edges {
            if a == 0 || b == 0 {
                return Err(Error::InvalidGraph("vertices are numbered from 1".into()));
            }
            edges.push((a - 1, b - 1));
        }
        Ok(if self.directed {
            Graph::Directed(Dag::new(self.m, &edges)?)
        } else {
            Graph::Undirected(UGraph::new(self.m, &edges)?)
        })
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let spec: GraphSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("graph JSON: {e}")))?;
        spec.build()
    }

    pub fn of_undirected(g: &UGraph) -> Self {
        GraphSpec {
            m: g.size(),
            edges: g.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect(),
            directed: false,
        }
    }

    pub fn of_dag(g: &Dag) -> Self {
        GraphSpec {
            m: g.size(),
            edges: g.edges().into_iter().map(|(a, b)| [a + 1, b + 1]).collect(),
            directed: true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_is_chordal() {
        let g = UGraph::path(3);
        let peo = g.is_chordal().unwrap();
        let d = decompose(&g, &peo).unwrap();
        validate_decomposition(&g, &d).unwrap();
        assert_eq!(d.leaves(), 2);
    }

    #[test]
    fn path_split_shape() {
        let g = UGraph::path(3);
        let d = decompose(&g, &[0, 1, 2]).unwrap();
        match d {
            WeakDecomposition::Split { a, c, b, left, right } => {
                assert_eq!((a, c, b), (vec![0], vec![1], vec![2]));
                assert_eq!(*left, WeakDecomposition::Leaf(vec![0, 1]));
                assert_eq!(*right, WeakDecomposition::Leaf(vec![1, 2]));
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        match UGraph::cycle(4).chordality() {
            Chordality::NotChordal(c) => assert_eq!(c.len(), 4),
            _ => panic!("four-cycle reported chordal"),
        }
    }

    #[test]
    fn complete_graph_is_a_leaf() {
        let g = UGraph::complete(5);
        let peo = g.is_chordal().unwrap();
        assert_eq!(decompose(&g, &peo).unwrap(), WeakDecomposition::Leaf(vec![0, 1, 2, 3, 4]));
    }

    #[test]
    fn bad_ordering_rejected() {
        let g = UGraph::path(3);
        assert!(matches!(decompose(&g, &[1, 0, 2]), Err(Error::InvalidOrdering(_))));
    }

    #[test]
    fn collider_parents() {
        let d = Dag::new(3, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(d.parents(2).unwrap(), &[0, 1]);
        assert!(d.parents(0).unwrap().is_empty());
        assert!(d.parents(3).is_err());
    }

    #[test]
    fn cycle_rejected() {
        assert_eq!(Dag::new(3, &[(0, 1), (1, 2), (2, 0)]), Err(Error::Cyclic));
    }

    #[test]
    fn json_roundtrip() {
        let g = GraphSpec::from_json(r#"{"m": 3, "edges": [[1, 2], [2, 3]], "directed": false}"#).unwrap();
        assert_eq!(g, Graph::Undirected(UGraph::path(3)));
    }

    #[test]
    fn disconnected_graph_decomposes() {
        let g = UGraph::new(3, &[(0, 1)]).unwrap();
        let peo = g.is_chordal().unwrap();
        let d = decompose(&g, &peo).unwrap();
        validate_decomposition(&g, &d).unwrap();
    }
}
