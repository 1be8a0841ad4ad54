//! Path, branching and parent-map structures, plus the undirected graphs
//! used on the Hamiltonian-path side.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parent set for every variable. No acyclicity requirement.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParentMap(Vec<Vec<usize>>);

impl ParentMap {
    pub fn new(parents: Vec<Vec<usize>>) -> Self {
        ParentMap(parents)
    }

    /// `n` variables, no arcs.
    pub fn empty(n: usize) -> Self {
        ParentMap(vec![Vec::new(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.0.iter()
    }

    /// True when exactly one vertex is parentless, all others have one
    /// parent, and following parents from any vertex reaches the root
    /// without revisiting a vertex or branching.
    pub fn is_path(&self) -> bool {
        self.to_path().is_some()
    }

    /// Recovers the vertex order if this map is a path.
    pub fn to_path(&self) -> Option<PathStructure> {
        let n = self.0.len();
        if n == 0 || self.0.iter().any(|p| p.len() > 1) {
            return None;
        }
        let roots: Vec<usize> = (0..n).filter(|&i| self.0[i].is_empty()).collect();
        if roots.len() != 1 {
            return None;
        }
        let mut child = vec![None; n];
        for (i, p) in self.0.iter().enumerate() {
            if let Some(&p) = p.first() {
                if p >= n || child[p].replace(i).is_some() {
                    return None;
                }
            }
        }
        let mut order = vec![roots[0]];
        while let Some(next) = child[*order.last().unwrap()] {
            order.push(next);
            if order.len() > n {
                return None;
            }
        }
        if order.len() != n {
            return None;
        }
        PathStructure::new(order).ok()
    }
}

impl From<&PathStructure> for ParentMap {
    fn from(path: &PathStructure) -> Self {
        path.to_parent_map()
    }
}

impl From<&Branching> for ParentMap {
    fn from(b: &Branching) -> Self {
        ParentMap(b.parent.iter().map(|p| p.iter().copied().collect()).collect())
    }
}

/// A path model stored as its vertex order; `order[0]` is the root and every
/// later vertex has its predecessor as sole parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PathRepr")]
pub struct PathStructure {
    order: Vec<usize>,
}

#[derive(Deserialize)]
struct PathRepr {
    order: Vec<usize>,
}

impl TryFrom<PathRepr> for PathStructure {
    type Error = Error;

    fn try_from(r: PathRepr) -> Result<Self> {
        PathStructure::new(r.order)
    }
}

impl PathStructure {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        if !is_permutation(&order) {
            return Err(Error::InvalidStructure(format!("{order:?} is not a permutation of 0..{}", order.len())));
        }
        Ok(PathStructure { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.order.first().copied()
    }

    pub fn reversed(&self) -> Self {
        PathStructure {
            order: self.order.iter().rev().copied().collect(),
        }
    }

    pub fn to_parent_map(&self) -> ParentMap {
        let mut parents = vec![Vec::new(); self.order.len()];
        for w in self.order.windows(2) {
            parents[w[1]].push(w[0]);
        }
        ParentMap(parents)
    }

    pub fn to_branching(&self) -> Branching {
        let mut parent = vec![None; self.order.len()];
        for w in self.order.windows(2) {
            parent[w[1]] = Some(w[0]);
        }
        Branching { parent }
    }
}

pub fn path_to_parent_map(path: &PathStructure) -> ParentMap {
    path.to_parent_map()
}

fn is_permutation(order: &[usize]) -> bool {
    let mut seen = vec![false; order.len()];
    order
        .iter()
        .all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
}

/// In-degree at most one, no directed cycles. May be a forest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BranchingRepr")]
pub struct Branching {
    parent: Vec<Option<usize>>,
}

#[derive(Deserialize)]
struct BranchingRepr {
    parent: Vec<Option<usize>>,
}

impl TryFrom<BranchingRepr> for Branching {
    type Error = Error;

    fn try_from(r: BranchingRepr) -> Result<Self> {
        Branching::new(r.parent)
    }
}

impl Branching {
    pub fn new(parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        for (i, p) in parent.iter().enumerate() {
            match *p {
                Some(p) if p >= n => {
                    return Err(Error::InvalidStructure(format!("parent {p} of {i} out of range")))
                }
                Some(p) if p == i => return Err(Error::InvalidStructure(format!("{i} is its own parent"))),
                _ => {}
            }
        }
        // Walk up from every vertex; a walk longer than n means a cycle.
        for start in 0..n {
            let mut v = start;
            let mut steps = 0;
            while let Some(p) = parent[v] {
                v = p;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidStructure(format!("directed cycle through {start}")));
                }
            }
        }
        Ok(Branching { parent })
    }

    /// `n` roots, no arcs.
    pub fn empty(n: usize) -> Self {
        Branching { parent: vec![None; n] }
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.parent.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(i, _)| i)
    }

    pub fn arc_count(&self) -> usize {
        self.parent.iter().flatten().count()
    }

    /// Connected, i.e. a spanning tree with exactly one root.
    pub fn is_tree(&self) -> bool {
        !self.parent.is_empty() && self.roots().count() == 1
    }
}

/// Structure file contents: either `{"order": [...]}` or
/// `{"parent": [..., null, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureDoc {
    Path(PathStructure),
    Branching(Branching),
}

impl StructureDoc {
    pub fn to_parent_map(&self) -> ParentMap {
        match self {
            StructureDoc::Path(p) => p.to_parent_map(),
            StructureDoc::Branching(b) => b.into(),
        }
    }
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpInstance {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<bool>>,
}

impl HpInstance {
    /// Fails on self-loops, out-of-range endpoints and repeated edges
    /// (in either orientation).
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = HpInstance {
            vertex_count,
            edges: BTreeSet::new(),
            adjacency: vec![vec![false; vertex_count]; vertex_count],
        };
        for (u, v) in edges {
            g.insert(u, v)?;
        }
        Ok(g)
    }

    fn insert(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.vertex_count;
        if u >= n || v >= n {
            return Err(Error::InvalidStructure(format!("edge {u}-{v} out of range for {n} vertices")));
        }
        if u == v {
            return Err(Error::InvalidStructure(format!("self-loop at {u}")));
        }
        if !self.edges.insert((u.min(v), u.max(v))) {
            return Err(Error::InvalidStructure(format!("duplicate edge {u}-{v}")));
        }
        self.adjacency[u][v] = true;
        self.adjacency[v][u] = true;
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// Star with center 0.
    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (0, i))).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count && v < self.vertex_count && self.adjacency[u][v]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().enumerate().filter(|(_, &a)| a).map(|(v, _)| v)
    }
}

/// True iff every consecutive pair of `order` is an edge of `g`. `order`
/// must be a permutation of the vertices; anything else yields false.
pub fn is_hamiltonian_path(g: &HpInstance, order: &[usize]) -> bool {
    order.len() == g.vertex_count() && is_permutation(order) && order.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 10;

/// Exhaustive search for a Hamiltonian path. Extends partial sequences
/// vertex by vertex in index order and backtracks, so the first witness
/// found is the lexicographically smallest.
pub fn brute_force_hp(g: &HpInstance, limit: usize) -> Result<Option<Vec<usize>>> {
    let n = g.vertex_count();
    if n > limit {
        return Err(Error::LimitExceeded {
            what: "brute-force Hamiltonian path search",
            n,
            limit,
        });
    }
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    fn extend(g: &HpInstance, seq: &mut Vec<usize>, used: &mut [bool]) -> bool {
        if seq.len() == used.len() {
            return true;
        }
        let last = *seq.last().unwrap();
        for v in 0..used.len() {
            if !used[v] && g.has_edge(last, v) {
                used[v] = true;
                seq.push(v);
                if extend(g, seq, used) {
                    return true;
                }
                seq.pop();
                used[v] = false;
            }
        }
        false
    }
    let mut used = vec![false; n];
    for start in 0..n {
        let mut seq = vec![start];
        used[start] = true;
        if extend(g, &mut seq, &mut used) {
            return Ok(Some(seq));
        }
        used[start] = false;
    }
    Ok(None)
}

/// Reads the edge-list format: a line `n m` followed by `m` lines `u v`
/// (0-based). Blank lines are ignored.
pub fn load_graph<R: BufRead>(source: R) -> Result<HpInstance> {
    let mut lines = source
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty()));

    let parse_pair = |row: usize, line: &str| -> Result<(usize, usize)> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(row, 0, format!("expected two integers, found {line:?}")));
        }
        let num = |c: usize| {
            fields[c]
                .parse::<usize>()
                .map_err(|_| Error::parse(row, c + 1, format!("{:?} is not a non-negative integer", fields[c])))
        };
        Ok((num(0)?, num(1)?))
    };

    let (row, header) = lines.next().ok_or_else(|| Error::parse(1, 0, "empty graph file"))??;
    let (n, m) = parse_pair(row, &header)?;
    let mut g = HpInstance::new(n, [])?;
    let mut read = 0;
    for line in lines {
        let (row, line) = line?;
        let (u, v) = parse_pair(row, &line)?;
        g.insert(u, v).map_err(|e| Error::parse(row, 0, e.to_string()))?;
        read += 1;
    }
    if read != m {
        return Err(Error::parse(row, 2, format!("header declares {m} edges but {read} were listed")));
    }
    Ok(g)
}

pub fn write_graph<W: Write>(g: &HpInstance, mut sink: W) -> Result<()> {
    writeln!(sink, "{} {}", g.vertex_count(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(sink, "{u} {v}")?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_unfolds_to_parents() {
        let p = PathStructure::new(vec![2, 0, 1]).unwrap();
        let map = path_to_parent_map(&p);
        assert_eq!(map.parents(2), &[] as &[usize]);
        assert_eq!(map.parents(0), &[2]);
        assert_eq!(map.parents(1), &[0]);
        assert_eq!(map.to_path(), Some(p));

        let single = PathStructure::new(vec![0]).unwrap();
        assert_eq!(single.to_parent_map(), ParentMap::empty(1));
        assert!(single.to_parent_map().is_path());
        assert_eq!(single.to_branching().arc_count(), 0);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(PathStructure::new(vec![0, 0]).is_err());
        assert!(PathStructure::new(vec![1, 2]).is_err());
    }

    #[test]
    fn is_path_recognition() {
        assert!(!ParentMap::new(vec![vec![], vec![0], vec![0]]).is_path());
        assert!(!ParentMap::new(vec![vec![], vec![2], vec![1]]).is_path());
        assert!(!ParentMap::new(vec![vec![1], vec![0]]).is_path());
        assert!(!ParentMap::empty(2).is_path());
    }

    #[test]
    fn branching_validation() {
        assert!(Branching::new(vec![None, Some(0), Some(0)]).is_ok());
        assert!(Branching::new(vec![Some(1), Some(0)]).is_err());
        assert!(Branching::new(vec![Some(0)]).is_err());
        assert!(Branching::new(vec![None, Some(5)]).is_err());
        let b = Branching::new(vec![None, Some(0), None]).unwrap();
        assert_eq!(b.roots().collect::<Vec<_>>(), vec![0, 2]);
        assert!(!b.is_tree());
    }

    #[test]
    fn hamiltonian_checks() {
        assert!(is_hamiltonian_path(&HpInstance::complete(3), &[0, 1, 2]));
        let star = HpInstance::star(4);
        assert!(!is_hamiltonian_path(&star, &[1, 0, 2, 3]));
        assert!(!is_hamiltonian_path(&HpInstance::path(4), &[0, 2, 1, 3]));
        assert!(is_hamiltonian_path(&HpInstance::path(4), &[3, 2, 1, 0]));
        assert!(!is_hamiltonian_path(&HpInstance::complete(3), &[0, 1]));
    }

    #[test]
    fn brute_force() {
        let w = brute_force_hp(&HpInstance::complete(4), 10).unwrap().unwrap();
        assert!(is_hamiltonian_path(&HpInstance::complete(4), &w));
        assert_eq!(brute_force_hp(&HpInstance::star(4), 10).unwrap(), None);
        let c6 = HpInstance::cycle(6);
        assert!(is_hamiltonian_path(&c6, &brute_force_hp(&c6, 10).unwrap().unwrap()));
        assert!(matches!(
            brute_force_hp(&HpInstance::path(11), 10),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn graph_io() {
        let g = load_graph("3 3\n0 1\n1 2\n0 2\n".as_bytes()).unwrap();
        assert_eq!(g, HpInstance::complete(3));
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        assert_eq!(load_graph(buf.as_slice()).unwrap(), g);

        assert!(load_graph("3 2\n0 1\n1 0\n".as_bytes()).is_err());
        assert!(load_graph("3 1\n1 1\n".as_bytes()).is_err());
        assert!(load_graph("3 1\n0 3\n".as_bytes()).is_err());
        assert!(load_graph("3 1\n0 x\n".as_bytes()).is_err());
        assert!(load_graph("3 2\n0 1\n".as_bytes()).is_err());
        assert!(load_graph("".as_bytes()).is_err());
    }

    #[test]
    fn structure_json() {
        let doc: StructureDoc = serde_json::from_str(r#"{"order":[1,0,2]}"#).unwrap();
        assert_eq!(doc, StructureDoc::Path(PathStructure::new(vec![1, 0, 2]).unwrap()));
        let doc: StructureDoc = serde_json::from_str(r#"{"parent":[null,0,0]}"#).unwrap();
        assert_eq!(doc.to_parent_map(), ParentMap::new(vec![vec![], vec![0], vec![0]]));
        assert!(serde_json::from_str::<StructureDoc>(r#"{"order":[0,0]}"#).is_err());
        assert!(serde_json::from_str::<StructureDoc>(r#"{"parent":[1,0]}"#).is_err());
        let b = Branching::new(vec![None, Some(0)]).unwrap();
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"parent":[null,0]}"#);
    }
}
