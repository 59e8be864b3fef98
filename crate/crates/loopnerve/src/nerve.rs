//! The weighted nerve of the loop set of a bi-secondary structure.
//!
//! Vertices are the loops of both structures; a set of loops spans a
//! simplex when the loops share at least one backbone vertex. Simplex
//! enumeration is incidence-driven: every backbone vertex lies in at most
//! two loops per structure, so it witnesses at most `2^4 - 1` simplices.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::structures::{loops_with_parents, BiSecondaryStructure, Loop, Owner};

/// Index of a loop in the combined loop table of a nerve.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LoopId(pub usize);

/// A simplex of the nerve: loops with a nonempty common vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    vertices: Vec<LoopId>,       // strictly increasing
    intersection: Vec<usize>,    // sorted common backbone vertices, nonempty
}

impl Simplex {
    pub fn vertices(&self) -> &[LoopId] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Common backbone vertices of the member loops.
    pub fn intersection(&self) -> &[usize] {
        &self.intersection
    }

    pub fn weight(&self) -> usize {
        self.intersection.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Purity {
    Pure,
    Mixed,
}

/// A total order on the loops compatible with the nesting posets: within
/// each structure inner loops precede outer ones, and every S-loop
/// precedes every T-loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialOrder {
    rank: Vec<usize>,
}

impl SimplicialOrder {
    pub fn rank(&self, id: LoopId) -> usize {
        self.rank[id.0]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }
}

/// The loop nerve: loop table, strata K0..K3 with weights, the vertex
/// incidence map, and the default simplicial order.
#[derive(Clone, Debug)]
pub struct NerveComplex {
    n: usize,
    loops: Vec<Loop>,
    parent: Vec<Option<LoopId>>, // same-structure tree, rainbow loops are roots
    s_count: usize,
    strata: [Vec<Simplex>; 4],
    incidence: Vec<Vec<LoopId>>, // backbone vertex -> loops containing it
    index: HashMap<Vec<LoopId>, (usize, usize)>, // sorted ids -> (dim, stratum index)
    order: SimplicialOrder,
}

/// Build the nerve of the loops of `r`. Loop ids are assigned in the
/// default simplicial order: S-loops in post-order of the S arc tree,
/// then T-loops in post-order of the T arc tree.
pub fn build_nerve(r: &BiSecondaryStructure) -> NerveComplex {
    let (s_loops, s_parents) = loops_with_parents(&r.s, Owner::S);
    let (t_loops, t_parents) = loops_with_parents(&r.t, Owner::T);
    let s_count = s_loops.len();

    let mut all = s_loops;
    all.extend(t_loops);
    let mut parent: Vec<Option<LoopId>> =
        s_parents.into_iter().map(|p| p.map(LoopId)).collect();
    parent.extend(t_parents.into_iter().map(|p| p.map(|i| LoopId(s_count + i))));

    let n = r.n();
    let mut incidence: Vec<Vec<LoopId>> = vec![Vec::new(); n + 2];
    for (id, lp) in all.iter().enumerate() {
        for v in lp.vertices() {
            incidence[v].push(LoopId(id));
        }
    }

    // Register every nonempty subset of the loops through each vertex;
    // the subset's intersection accumulates exactly the witnessing
    // vertices. Subsets larger than four loops cannot occur on valid
    // input; they are left out of the strata and surface in the lemma
    // report through the incidence map.
    let mut acc: HashMap<Vec<LoopId>, Vec<usize>> = HashMap::new();
    for v in 0..=n + 1 {
        let ids = &incidence[v];
        let k = ids.len().min(4);
        for mask in 1u32..(1 << ids.len()) {
            if mask.count_ones() as usize > k {
                continue;
            }
            let subset: Vec<LoopId> = ids
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &id)| id)
                .collect();
            acc.entry(subset).or_default().push(v);
        }
    }

    let mut strata: [Vec<Simplex>; 4] = Default::default();
    for (vertices, intersection) in acc {
        let d = vertices.len() - 1;
        strata[d].push(Simplex { vertices, intersection });
    }
    for stratum in &mut strata {
        stratum.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    }

    let mut index = HashMap::new();
    for (d, stratum) in strata.iter().enumerate() {
        for (i, sx) in stratum.iter().enumerate() {
            index.insert(sx.vertices.clone(), (d, i));
        }
    }

    let order = SimplicialOrder { rank: (0..all.len()).collect() };
    NerveComplex { n, loops: all, parent, s_count, strata, incidence, index, order }
}

impl NerveComplex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn loop_of(&self, id: LoopId) -> &Loop {
        &self.loops[id.0]
    }

    pub fn owner(&self, id: LoopId) -> Owner {
        self.loops[id.0].owner
    }

    /// Parent loop within the same structure's arc tree.
    pub fn parent(&self, id: LoopId) -> Option<LoopId> {
        self.parent[id.0]
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    pub fn s_loop_count(&self) -> usize {
        self.s_count
    }

    /// The simplices of dimension `d` (0..=3), sorted by vertex ids.
    pub fn stratum(&self, d: usize) -> &[Simplex] {
        &self.strata[d]
    }

    pub fn simplex_counts(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|d| self.strata[d].len())
    }

    /// Loops containing backbone vertex `v`.
    pub fn incidence(&self, v: usize) -> &[LoopId] {
        &self.incidence[v]
    }

    /// Look up a simplex by its sorted vertex ids.
    pub fn simplex(&self, vertices: &[LoopId]) -> Option<&Simplex> {
        let (d, i) = *self.index.get(vertices)?;
        Some(&self.strata[d][i])
    }

    pub fn contains(&self, vertices: &[LoopId]) -> bool {
        self.index.contains_key(vertices)
    }

    pub fn default_order(&self) -> &SimplicialOrder {
        &self.order
    }

    /// The subcomplex of simplices with weight at least `t`. Weights only
    /// shrink along cofaces, so the result is closed under faces.
    pub fn restrict_to_weight(&self, t: usize) -> NerveComplex {
        assert!(t >= 1, "filtration level must be at least 1");
        let mut strata: [Vec<Simplex>; 4] = Default::default();
        for d in 0..4 {
            strata[d] = self.strata[d]
                .iter()
                .filter(|sx| sx.weight() >= t)
                .cloned()
                .collect();
        }
        let mut index = HashMap::new();
        for (d, stratum) in strata.iter().enumerate() {
            for (i, sx) in stratum.iter().enumerate() {
                index.insert(sx.vertices.clone(), (d, i));
            }
        }
        NerveComplex {
            n: self.n,
            loops: self.loops.clone(),
            parent: self.parent.clone(),
            s_count: self.s_count,
            strata,
            incidence: self.incidence.clone(),
            index,
            order: self.order.clone(),
        }
    }

    /// Largest simplex weight (the size of the biggest loop).
    pub fn max_weight(&self) -> usize {
        self.strata[0].iter().map(|sx| sx.weight()).max().unwrap_or(0)
    }
}

/// The default simplicial order: ids were assigned S-post-order then
/// T-post-order, so the order is the identity ranking.
pub fn simplicial_order(nerve: &NerveComplex) -> SimplicialOrder {
    nerve.default_order().clone()
}

/// An edge of the nerve is pure when both loops belong to the same
/// structure, mixed otherwise.
pub fn classify_1simplex(nerve: &NerveComplex, edge: &Simplex) -> Purity {
    assert_eq!(edge.dim(), 1);
    if nerve.owner(edge.vertices()[0]) == nerve.owner(edge.vertices()[1]) {
        Purity::Pure
    } else {
        Purity::Mixed
    }
}

/// The 2-faces of a 3-simplex contained in no other 3-simplex.
pub fn exposed_2faces<'a>(nerve: &'a NerveComplex, y: &Simplex) -> Vec<&'a Simplex> {
    assert_eq!(y.dim(), 3);
    let mut out = Vec::new();
    for skip in 0..4 {
        let face: Vec<LoopId> = y
            .vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, &v)| v)
            .collect();
        let cofaces = nerve
            .stratum(3)
            .iter()
            .filter(|z| face.iter().all(|v| z.vertices().contains(v)))
            .count();
        if cofaces == 1 {
            out.push(nerve.simplex(&face).expect("faces of stored simplices are stored"));
        }
    }
    out
}

/// The neighbor graph of a loop: its cross-structure neighbors in the
/// 1-skeleton, its immediate same-structure children, the induced edges,
/// and the subset of edges that span a 2-simplex with the center.
#[derive(Clone, Debug)]
pub struct NeighborGraph {
    pub center: LoopId,
    pub s_neighbors: Vec<LoopId>,
    pub t_neighbors: Vec<LoopId>,
    pub vertices: Vec<LoopId>,
    pub edges: Vec<(LoopId, LoopId)>,
    pub delta_edges: Vec<(LoopId, LoopId)>,
}

/// Build the neighbor graph of `center`. For a T-loop t, the S side holds
/// every S-loop sharing an edge with t and the T side holds the loops
/// immediately covered by t in the T arc tree (still required to share an
/// edge with t); for an S-loop the roles swap.
pub fn neighbor_graph(nerve: &NerveComplex, center: LoopId) -> NeighborGraph {
    let owner = nerve.owner(center);
    let mut cross = Vec::new();
    for edge in nerve.stratum(1) {
        let vs = edge.vertices();
        let other = if vs[0] == center {
            vs[1]
        } else if vs[1] == center {
            vs[0]
        } else {
            continue;
        };
        if nerve.owner(other) != owner {
            cross.push(other);
        }
    }
    let mut children = Vec::new();
    for id in 0..nerve.loop_count() {
        let id = LoopId(id);
        if nerve.parent(id) == Some(center) {
            let mut key = [center, id];
            key.sort();
            if nerve.contains(&key) {
                children.push(id);
            }
        }
    }
    let (s_neighbors, t_neighbors) = match owner {
        Owner::T => (cross, children),
        Owner::S => (children, cross),
    };
    let mut vertices: Vec<LoopId> =
        s_neighbors.iter().chain(t_neighbors.iter()).copied().collect();
    vertices.sort();
    vertices.dedup();

    let mut edges = Vec::new();
    let mut delta_edges = Vec::new();
    for edge in nerve.stratum(1) {
        let vs = edge.vertices();
        if vertices.binary_search(&vs[0]).is_ok() && vertices.binary_search(&vs[1]).is_ok() {
            edges.push((vs[0], vs[1]));
            let mut tri = vec![vs[0], vs[1], center];
            tri.sort();
            if nerve.contains(&tri) {
                delta_edges.push((vs[0], vs[1]));
            }
        }
    }
    NeighborGraph { center, s_neighbors, t_neighbors, vertices, edges, delta_edges }
}

#[derive(Clone, Debug)]
pub enum DeltaCertificate {
    /// Edges of a spanning tree of the delta-edge subgraph.
    SpanningTree(Vec<(LoopId, LoopId)>),
    /// Connected components of the delta-edge subgraph when it fails to
    /// span the neighbor set.
    Components(Vec<Vec<LoopId>>),
}

#[derive(Clone, Debug)]
pub struct DeltaOutcome {
    pub connected: bool,
    pub certificate: DeltaCertificate,
}

/// Check whether the delta-edge subgraph of the neighbor graph of
/// `center` is a connected spanning subgraph. Neighbor sets with at most
/// one vertex pass vacuously.
pub fn delta_graph_exists(nerve: &NerveComplex, center: LoopId) -> DeltaOutcome {
    let g = neighbor_graph(nerve, center);
    if g.vertices.len() <= 1 {
        return DeltaOutcome {
            connected: true,
            certificate: DeltaCertificate::SpanningTree(Vec::new()),
        };
    }
    let pos: HashMap<LoopId, usize> =
        g.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut root: Vec<usize> = (0..g.vertices.len()).collect();
    fn find(root: &mut Vec<usize>, mut x: usize) -> usize {
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    let mut tree = Vec::new();
    for &(a, b) in &g.delta_edges {
        let (ra, rb) = (find(&mut root, pos[&a]), find(&mut root, pos[&b]));
        if ra != rb {
            root[ra] = rb;
            tree.push((a, b));
        }
    }
    if tree.len() + 1 == g.vertices.len() {
        DeltaOutcome { connected: true, certificate: DeltaCertificate::SpanningTree(tree) }
    } else {
        let mut comps: HashMap<usize, Vec<LoopId>> = HashMap::new();
        for (i, &v) in g.vertices.iter().enumerate() {
            comps.entry(find(&mut root, i)).or_default().push(v);
        }
        let mut components: Vec<Vec<LoopId>> = comps.into_values().collect();
        components.sort();
        DeltaOutcome { connected: false, certificate: DeltaCertificate::Components(components) }
    }
}

/// Outcome of one structural check over a whole nerve.
#[derive(Clone, Debug)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub checked: usize,
    pub failures: usize,
    pub witness: Option<String>,
}

impl LemmaCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(LemmaCheck::passed)
    }

    pub fn first_failure(&self) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| !c.passed())
    }
}

/// Run the structural checks backing the nerve's combinatorics: vertex
/// incidence bounds, pure-edge weights, the 2- and 3-simplex shape
/// constraints, coface bounds for pure edges, exposed faces, and the
/// absence of simplices above dimension three.
pub fn verify_structure_lemmas(nerve: &NerveComplex) -> LemmaReport {
    let mut checks = Vec::new();

    // No backbone vertex lies in three loops of one structure.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for v in 0..=nerve.n() + 1 {
            checked += 1;
            let ids = nerve.incidence(v);
            let s = ids.iter().filter(|&&id| nerve.owner(id) == Owner::S).count();
            let t = ids.len() - s;
            if s > 2 || t > 2 {
                failures += 1;
                witness.get_or_insert_with(|| {
                    format!("vertex {v} lies in {s} S-loops and {t} T-loops")
                });
            }
        }
        checks.push(LemmaCheck { name: "three-loop-intersection", checked, failures, witness });
    }

    // Pure edges carry weight exactly 2.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for edge in nerve.stratum(1) {
            if classify_1simplex(nerve, edge) == Purity::Pure {
                checked += 1;
                if edge.weight() != 2 {
                    failures += 1;
                    witness.get_or_insert_with(|| {
                        format!("pure edge {:?} has weight {}", edge.vertices(), edge.weight())
                    });
                }
            }
        }
        checks.push(LemmaCheck { name: "pure-edge-weight", checked, failures, witness });
    }

    // Every 2-simplex has exactly one pure 1-face and weight at most 2.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for tri in nerve.stratum(2) {
            checked += 1;
            let vs = tri.vertices();
            let pure = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .filter(|&&(a, b)| nerve.owner(vs[a]) == nerve.owner(vs[b]))
                .count();
            if pure != 1 || tri.weight() > 2 {
                failures += 1;
                witness.get_or_insert_with(|| {
                    format!(
                        "2-simplex {:?}: {} pure faces, weight {}",
                        vs,
                        pure,
                        tri.weight()
                    )
                });
            }
        }
        checks.push(LemmaCheck { name: "k2-one-pure-face", checked, failures, witness });
    }

    // Every 3-simplex splits 2+2 across the structures, has exactly two
    // pure 1-faces, and weight at most 2.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for y in nerve.stratum(3) {
            checked += 1;
            let vs = y.vertices();
            let s = vs.iter().filter(|&&id| nerve.owner(id) == Owner::S).count();
            let pure_faces = pairs_of_four()
                .iter()
                .filter(|&&(a, b)| nerve.owner(vs[a]) == nerve.owner(vs[b]))
                .count();
            if s != 2 || pure_faces != 2 || y.weight() > 2 {
                failures += 1;
                witness.get_or_insert_with(|| {
                    format!(
                        "3-simplex {:?}: owner split {}+{}, {} pure faces, weight {}",
                        vs,
                        s,
                        4 - s,
                        pure_faces,
                        y.weight()
                    )
                });
            }
        }
        checks.push(LemmaCheck { name: "k3-shape", checked, failures, witness });
    }

    // A pure edge is a face of at most two 3-simplices.
    {
        let mut cofaces: HashMap<&[LoopId], usize> = HashMap::new();
        for y in nerve.stratum(3) {
            let vs = y.vertices();
            for &(a, b) in pairs_of_four() {
                if nerve.owner(vs[a]) == nerve.owner(vs[b]) {
                    let edge = nerve
                        .simplex(&[vs[a], vs[b]])
                        .expect("faces of stored simplices are stored");
                    *cofaces.entry(edge.vertices()).or_insert(0) += 1;
                }
            }
        }
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for edge in nerve.stratum(1) {
            if classify_1simplex(nerve, edge) == Purity::Pure {
                checked += 1;
                let count = cofaces.get(edge.vertices()).copied().unwrap_or(0);
                if count > 2 {
                    failures += 1;
                    witness.get_or_insert_with(|| {
                        format!("pure edge {:?} lies in {count} 3-simplices", edge.vertices())
                    });
                }
            }
        }
        checks.push(LemmaCheck { name: "pure-edge-cofaces", checked, failures, witness });
    }

    // Every 3-simplex has at least two exposed 2-faces.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for y in nerve.stratum(3) {
            checked += 1;
            let exposed = exposed_2faces(nerve, y).len();
            if exposed < 2 {
                failures += 1;
                witness.get_or_insert_with(|| {
                    format!("3-simplex {:?} has {exposed} exposed faces", y.vertices())
                });
            }
        }
        checks.push(LemmaCheck { name: "exposed-two-faces", checked, failures, witness });
    }

    // No vertex witnesses five or more loops, so no simplex of dimension
    // four or higher exists.
    {
        let mut failures = 0;
        let mut witness = None;
        let mut checked = 0;
        for v in 0..=nerve.n() + 1 {
            checked += 1;
            if nerve.incidence(v).len() > 4 {
                failures += 1;
                witness.get_or_insert_with(|| {
                    format!("vertex {v} lies in {} loops", nerve.incidence(v).len())
                });
            }
        }
        checks.push(LemmaCheck { name: "dimension-cap", checked, failures, witness });
    }

    LemmaReport { checks }
}

fn pairs_of_four() -> &'static [(usize, usize)] {
    &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
}

/// Check that `order` is a linear extension of the combined poset: inner
/// loops precede outer loops within each structure and all S-loops
/// precede all T-loops.
pub fn is_compliant_order(nerve: &NerveComplex, order: &SimplicialOrder) -> bool {
    let m = nerve.loop_count();
    if order.ranks().len() != m {
        return false;
    }
    let mut seen = vec![false; m];
    for &r in order.ranks() {
        if r >= m || seen[r] {
            return false;
        }
        seen[r] = true;
    }
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let (la, lb) = (&nerve.loops()[a], &nerve.loops()[b]);
            let (ra, rb) = (order.rank(LoopId(a)), order.rank(LoopId(b)));
            if la.owner == Owner::S && lb.owner == Owner::T && ra > rb {
                return false;
            }
            if la.owner == lb.owner && la.max_arc.nested_in(&lb.max_arc) && ra > rb {
                return false;
            }
        }
    }
    true
}

/// A random linear extension of the combined poset, drawn by a seeded
/// randomized topological sort (children before parents, S before T).
pub fn random_linear_extension(nerve: &NerveComplex, seed: u64) -> SimplicialOrder {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = nerve.loop_count();
    let mut pending = vec![0usize; m];
    for id in 0..m {
        if let Some(p) = nerve.parent(LoopId(id)) {
            pending[p.0] += 1;
        }
    }
    let mut rank = vec![0usize; m];
    let mut next = 0usize;
    for owner in [Owner::S, Owner::T] {
        let mut ready: Vec<usize> = (0..m)
            .filter(|&id| nerve.owner(LoopId(id)) == owner && pending[id] == 0)
            .collect();
        while !ready.is_empty() {
            let pick = rng.gen_range(0..ready.len());
            let id = ready.swap_remove(pick);
            rank[id] = next;
            next += 1;
            if let Some(p) = nerve.parent(LoopId(id)) {
                pending[p.0] -= 1;
                if pending[p.0] == 0 {
                    ready.push(p.0);
                }
            }
        }
    }
    debug_assert_eq!(next, m);
    SimplicialOrder { rank }
}

/// Reverse the sibling order within each tree while keeping children
/// before parents; a second deterministic compliant extension.
pub fn reversed_sibling_extension(nerve: &NerveComplex) -> SimplicialOrder {
    let m = nerve.loop_count();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut roots: Vec<usize> = Vec::new();
    for id in 0..m {
        match nerve.parent(LoopId(id)) {
            Some(p) => children[p.0].push(id),
            None => roots.push(id),
        }
    }
    let mut rank = vec![0usize; m];
    let mut next = 0usize;
    // roots: the S rainbow first (ids are S-first), then the T rainbow
    for &root in &roots {
        let mut stack = vec![(root, false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                rank[node] = next;
                next += 1;
            } else {
                stack.push((node, true));
                // children pushed in forward order pop in reverse
                for &c in &children[node] {
                    stack.push((c, false));
                }
            }
        }
    }
    debug_assert_eq!(next, m);
    SimplicialOrder { rank }
}

#[derive(Serialize)]
struct LoopRecord {
    id: usize,
    owner: &'static str,
    max_arc: [usize; 2],
    intervals: Vec<[usize; 2]>,
}

/// The loop table as JSON: `[{id, owner, max_arc, intervals}, ...]`.
pub fn loop_table_json(nerve: &NerveComplex) -> String {
    let records: Vec<LoopRecord> = nerve
        .loops()
        .iter()
        .enumerate()
        .map(|(id, lp)| LoopRecord {
            id,
            owner: lp.owner.label(),
            max_arc: [lp.max_arc.start, lp.max_arc.end],
            intervals: lp.intervals().iter().map(|&(a, b)| [a, b]).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("loop table serializes")
}

/// The plain-text complex format: one simplex per line, `d w v0 v1 ...`,
/// dimensions ascending.
pub fn export_complex_text(nerve: &NerveComplex) -> String {
    let mut out = String::new();
    for d in 0..4 {
        for sx in nerve.stratum(d) {
            out.push_str(&format!("{} {}", d, sx.weight()));
            for v in sx.vertices() {
                out.push_str(&format!(" {}", v.0));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::structures::{read_bis, sample_uniform, SamplerConfig, SecondaryStructure};

    fn pair(s: &str, t: &str) -> BiSecondaryStructure {
        read_bis(&format!("{s}\n{t}\n")).unwrap()
    }

    fn sampled_pair(n: usize, seed: u64) -> BiSecondaryStructure {
        let s = sample_uniform(&SamplerConfig { n, min_gap: 0, seed });
        let t = sample_uniform(&SamplerConfig { n, min_gap: 0, seed: seed.wrapping_add(1) });
        BiSecondaryStructure::new(s, t).unwrap()
    }

    #[test]
    fn empty_pair_nerve() {
        let s = SecondaryStructure::empty(4);
        let t = SecondaryStructure::empty(4);
        let nerve = build_nerve(&BiSecondaryStructure::new(s, t).unwrap());
        assert_eq!(nerve.simplex_counts(), [2, 1, 0, 0]);
        let edge = &nerve.stratum(1)[0];
        assert_eq!(edge.weight(), 6);
        assert_eq!(edge.intersection(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(classify_1simplex(&nerve, edge), Purity::Mixed);
    }

    #[test]
    fn crossing_pair_is_tetrahedron_boundary() {
        let nerve = build_nerve(&pair("(.).", ".(.)"));
        assert_eq!(nerve.simplex_counts(), [4, 6, 4, 0]);
    }

    #[test]
    fn nerve_matches_brute_force_on_small_instances() {
        for seed in 0..30u64 {
            let r = sampled_pair(12, seed);
            let nerve = build_nerve(&r);
            oracle::assert_nerve_matches_brute_force(&nerve);
        }
        oracle::assert_nerve_matches_brute_force(&build_nerve(&pair("(.).", ".(.)")));
    }

    #[test]
    fn pure_edges_have_weight_two() {
        for seed in 40..60u64 {
            let nerve = build_nerve(&sampled_pair(25, seed));
            for edge in nerve.stratum(1) {
                if classify_1simplex(&nerve, edge) == Purity::Pure {
                    assert_eq!(edge.weight(), 2);
                }
            }
        }
    }

    #[test]
    fn face_closure_and_weight_monotonicity() {
        let nerve = build_nerve(&sampled_pair(30, 5));
        for d in 1..4 {
            for sx in nerve.stratum(d) {
                for skip in 0..=d {
                    let face: Vec<LoopId> = sx
                        .vertices()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    let f = nerve.simplex(&face).expect("face must be stored");
                    assert!(f.weight() >= sx.weight());
                    assert!(sx.intersection().iter().all(|v| f.intersection().contains(v)));
                }
            }
        }
    }

    #[test]
    fn default_order_is_postorder_and_compliant() {
        // S arcs {(1,4),(2,3)}, T empty: order is inner, outer, S-rainbow,
        // then the T rainbow.
        let r = pair("(())", "....");
        let nerve = build_nerve(&r);
        let arcs: Vec<_> = nerve.loops().iter().map(|l| l.max_arc).collect();
        assert_eq!(
            arcs,
            vec![
                crate::structures::Arc::new(2, 3),
                crate::structures::Arc::new(1, 4),
                crate::structures::Arc::new(0, 5),
                crate::structures::Arc::new(0, 5),
            ]
        );
        assert!(is_compliant_order(&nerve, nerve.default_order()));
    }

    #[test]
    fn random_extensions_are_compliant() {
        let nerve = build_nerve(&sampled_pair(20, 9));
        for seed in 0..10 {
            let order = random_linear_extension(&nerve, seed);
            assert!(is_compliant_order(&nerve, &order));
        }
        assert!(is_compliant_order(&nerve, &reversed_sibling_extension(&nerve)));
    }

    #[test]
    fn unique_3simplex_has_all_faces_exposed() {
        let nerve = build_nerve(&pair(".(..).", "()...."));
        assert_eq!(nerve.stratum(3).len(), 1);
        let y = &nerve.stratum(3)[0];
        assert_eq!(exposed_2faces(&nerve, y).len(), 4);
    }

    #[test]
    fn two_3simplices_share_one_face() {
        // One S helix whose endpoints are touched by two separate T arcs:
        // the pure S edge lies in exactly two 3-simplices, which expose
        // the faces they do not share.
        let nerve = build_nerve(&pair(".(..).", "()..()"));
        assert_eq!(nerve.stratum(3).len(), 2);
        for y in nerve.stratum(3) {
            let exposed = exposed_2faces(&nerve, y);
            assert_eq!(exposed.len(), 3);
        }
        let report = verify_structure_lemmas(&nerve);
        assert!(report.all_pass(), "{:?}", report.first_failure());
    }

    #[test]
    fn neighbor_graph_star_when_s_empty() {
        // S empty: the only S-loop is the rainbow, and the delta graph of
        // any T-loop is the star on its neighbor set centered there.
        let r = pair("......", "(())()");
        let nerve = build_nerve(&r);
        let s_rainbow = LoopId(0);
        assert_eq!(nerve.owner(s_rainbow), Owner::S);
        for id in nerve.s_loop_count()..nerve.loop_count() {
            let center = LoopId(id);
            let g = neighbor_graph(&nerve, center);
            assert_eq!(g.s_neighbors, vec![s_rainbow]);
            let outcome = delta_graph_exists(&nerve, center);
            assert!(outcome.connected);
            match outcome.certificate {
                DeltaCertificate::SpanningTree(tree) => {
                    assert_eq!(tree.len(), g.vertices.len().saturating_sub(1));
                    for (a, b) in tree {
                        assert!(a == s_rainbow || b == s_rainbow);
                    }
                }
                DeltaCertificate::Components(_) => panic!("expected a spanning tree"),
            }
        }
    }

    #[test]
    fn delta_vacuous_on_empty_pair() {
        let s = SecondaryStructure::empty(4);
        let t = SecondaryStructure::empty(4);
        let nerve = build_nerve(&BiSecondaryStructure::new(s, t).unwrap());
        let r_t = LoopId(1);
        assert_eq!(nerve.owner(r_t), Owner::T);
        // the neighbor set is the single S rainbow: no edges at all
        let g = neighbor_graph(&nerve, r_t);
        assert_eq!(g.s_neighbors, vec![LoopId(0)]);
        assert!(g.t_neighbors.is_empty());
        assert_eq!(g.vertices, vec![LoopId(0)]);
        assert!(g.edges.is_empty());
        assert!(g.delta_edges.is_empty());
        let outcome = delta_graph_exists(&nerve, r_t);
        assert!(outcome.connected);
        match outcome.certificate {
            DeltaCertificate::SpanningTree(tree) => assert!(tree.is_empty()),
            DeltaCertificate::Components(_) => panic!("expected vacuous pass"),
        }
    }

    #[test]
    fn delta_holds_on_sampled_instances() {
        for seed in 100..140u64 {
            let nerve = build_nerve(&sampled_pair(30, seed));
            for id in 0..nerve.loop_count() {
                let center = LoopId(id);
                if nerve.owner(center) == Owner::T {
                    assert!(
                        delta_graph_exists(&nerve, center).connected,
                        "seed {seed} loop {id}"
                    );
                }
            }
        }
    }

    #[test]
    fn lemma_report_on_crossing_pair() {
        let nerve = build_nerve(&pair("(.).", ".(.)"));
        let report = verify_structure_lemmas(&nerve);
        assert!(report.all_pass(), "{:?}", report.first_failure());
        let counts: Vec<(&str, usize)> =
            report.checks.iter().map(|c| (c.name, c.checked)).collect();
        // 4 triangles, 2 pure edges, 6 backbone vertices examined
        assert!(counts.contains(&("k2-one-pure-face", 4)));
        assert!(counts.contains(&("pure-edge-weight", 2)));
        assert!(counts.contains(&("three-loop-intersection", 6)));
    }

    #[test]
    fn lemma_report_passes_on_samples() {
        for seed in 200..230u64 {
            let nerve = build_nerve(&sampled_pair(40, seed));
            let report = verify_structure_lemmas(&nerve);
            assert!(report.all_pass(), "seed {seed}: {:?}", report.first_failure());
        }
    }

    #[test]
    fn export_formats() {
        let nerve = build_nerve(&pair("(.).", ".(.)"));
        let text = export_complex_text(&nerve);
        assert_eq!(text.lines().count(), 14);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("0 "));
        let json = loop_table_json(&nerve);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 4);
    }

    #[test]
    fn restrict_to_weight_filters_strata() {
        let nerve = build_nerve(&pair("(.).", ".(.)"));
        let level1 = nerve.restrict_to_weight(1);
        assert_eq!(level1.simplex_counts(), nerve.simplex_counts());
        let level3 = nerve.restrict_to_weight(3);
        assert_eq!(level3.simplex_counts(), [4, 1, 0, 0]);
        let edge = &level3.stratum(1)[0];
        assert_eq!(edge.weight(), 4);
        let beyond = nerve.restrict_to_weight(nerve.max_weight() + 1);
        assert_eq!(beyond.simplex_counts(), [0, 0, 0, 0]);
    }
}
