//! Secondary structures over a linear backbone: dot-bracket parsing,
//! validation, the arc poset, loop decomposition, gaps, exact counting and
//! uniform sampling.
//!
//! Positions run over the backbone `[0, n+1]`, where `0` and `n+1` are the
//! formal endpoints of the rainbow arc that closes every diagram. User
//! arcs live on positions `1..=n`.

use std::collections::BTreeSet;

use num::bigint::RandBigInt;
use num::{BigUint, One};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

/// A base pair between two backbone positions, always with `start < end`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Arc {
    pub start: usize,
    pub end: usize,
}

impl Arc {
    /// Panics if `start >= end`.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start < end, "arc endpoints must satisfy start < end");
        Self { start, end }
    }

    /// Strict nesting: `self` lies strictly inside `other`.
    pub fn nested_in(&self, other: &Arc) -> bool {
        other.start < self.start && self.end < other.end
    }

    /// Two arcs cross when their spans interleave: `i < p < j < q`.
    pub fn crosses(&self, other: &Arc) -> bool {
        (self.start < other.start && other.start < self.end && self.end < other.end)
            || (other.start < self.start && self.start < other.end && other.end < self.end)
    }
}

/// Which half-plane a structure (and each of its loops) belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Owner {
    S,
    T,
}

impl Owner {
    pub fn label(self) -> &'static str {
        match self {
            Owner::S => "S",
            Owner::T => "T",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unbalanced bracket at position {position}")]
    UnbalancedBrackets { position: usize },
    #[error("invalid character {found:?} at position {position}")]
    InvalidCharacter { found: char, position: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("arcs ({},{}) and ({},{}) cross", .0.start, .0.end, .1.start, .1.end)]
    CrossingArcs(Arc, Arc),
    #[error("position {0} is an endpoint of more than one arc")]
    DuplicateEndpoint(usize),
    #[error("arc ({start},{end}) is out of range for length {n}")]
    OutOfRange { start: usize, end: usize, n: usize },
    #[error("structure lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// A set of pairwise non-crossing arcs over positions `1..=n`, closed by
/// the implicit rainbow arc `(0, n+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondaryStructure {
    n: usize,
    arcs: Vec<Arc>, // non-rainbow arcs, sorted by start position
}

impl SecondaryStructure {
    /// The empty structure (no arcs besides the rainbow) on `n` positions.
    pub fn empty(n: usize) -> Self {
        Self { n, arcs: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Non-rainbow arcs, sorted by start position.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn rainbow(&self) -> Arc {
        Arc::new(0, self.n + 1)
    }

    /// Parse a single dot-bracket line; positions are 1-based.
    pub fn parse_dot_bracket(line: &str) -> Result<Self, ParseError> {
        let mut stack: Vec<usize> = Vec::new();
        let mut arcs = Vec::new();
        let mut n = 0;
        for (idx, ch) in line.chars().enumerate() {
            let pos = idx + 1;
            n = pos;
            match ch {
                '(' => stack.push(pos),
                ')' => {
                    let open = stack
                        .pop()
                        .ok_or(ParseError::UnbalancedBrackets { position: pos })?;
                    arcs.push(Arc::new(open, pos));
                }
                '.' => {}
                other => {
                    return Err(ParseError::InvalidCharacter { found: other, position: pos })
                }
            }
        }
        if let Some(&open) = stack.last() {
            return Err(ParseError::UnbalancedBrackets { position: open });
        }
        arcs.sort();
        Ok(Self { n, arcs })
    }

    /// Validate an explicit arc list: arcs must lie in `1..=n`, be
    /// endpoint-disjoint, and pairwise non-crossing.
    pub fn from_arcs(n: usize, mut arcs: Vec<Arc>) -> Result<Self, StructureError> {
        for a in &arcs {
            if a.start < 1 || a.end > n {
                return Err(StructureError::OutOfRange { start: a.start, end: a.end, n });
            }
        }
        let mut endpoint_of = vec![false; n + 1];
        for a in &arcs {
            for p in [a.start, a.end] {
                if endpoint_of[p] {
                    return Err(StructureError::DuplicateEndpoint(p));
                }
                endpoint_of[p] = true;
            }
        }
        arcs.sort();
        // Sweep by start position; an arc crosses the innermost open arc
        // that ends before it does.
        let mut open: Vec<Arc> = Vec::new();
        for a in &arcs {
            while let Some(top) = open.last() {
                if top.end < a.start {
                    open.pop();
                } else {
                    break;
                }
            }
            if let Some(top) = open.last() {
                if top.end < a.end {
                    return Err(StructureError::CrossingArcs(*top, *a));
                }
            }
            open.push(*a);
        }
        Ok(Self { n, arcs })
    }

    /// Render as a dot-bracket line of length `n`.
    pub fn to_dot_bracket(&self) -> String {
        let mut chars = vec!['.'; self.n];
        for a in &self.arcs {
            chars[a.start - 1] = '(';
            chars[a.end - 1] = ')';
        }
        chars.into_iter().collect()
    }

    /// True when `v` (1-based) is an endpoint of a non-rainbow arc.
    pub fn is_paired(&self, v: usize) -> bool {
        self.arcs.iter().any(|a| a.start == v || a.end == v)
    }
}

/// The nesting order on the arcs of one structure. Index 0 is the rainbow;
/// the remaining arcs are sorted by start position. The Hasse diagram is a
/// tree rooted at the rainbow.
#[derive(Clone, Debug)]
pub struct ArcPoset {
    arcs: Vec<Arc>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl ArcPoset {
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Immediate cover of arc `i` (None for the rainbow root).
    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Children of arc `i`, ordered left to right by start position.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Post-order traversal (children before parents, left to right).
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.arcs.len());
        let mut stack = vec![(0usize, false)];
        while let Some((node, expanded)) = stack.pop() {
            if expanded {
                out.push(node);
            } else {
                stack.push((node, true));
                for &c in self.children[node].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }
}

/// Build the arc poset of a structure; the rainbow arc is the root.
pub fn arc_poset(s: &SecondaryStructure) -> ArcPoset {
    let mut arcs = vec![s.rainbow()];
    arcs.extend_from_slice(s.arcs());
    let count = arcs.len();
    let mut parent = vec![None; count];
    let mut children = vec![Vec::new(); count];
    // Arcs are sorted by start (rainbow first); a stack sweep finds each
    // arc's least strict enclosure.
    let mut stack = vec![0usize];
    for i in 1..count {
        while arcs[*stack.last().unwrap()].end < arcs[i].start {
            stack.pop();
        }
        let p = *stack.last().unwrap();
        parent[i] = Some(p);
        children[p].push(i);
        stack.push(i);
    }
    ArcPoset { arcs, parent, children }
}

/// A loop: the vertex set visible under an arc, as a disjoint union of
/// backbone intervals bounded by the arc and its immediate children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub owner: Owner,
    pub max_arc: Arc,
    intervals: Vec<(usize, usize)>,
}

impl Loop {
    /// Disjoint closed intervals, listed left to right.
    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn contains(&self, v: usize) -> bool {
        self.intervals
            .binary_search_by(|&(a, b)| {
                if v < a {
                    std::cmp::Ordering::Greater
                } else if v > b {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Equal
                }
            })
            .is_ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.intervals.iter().map(|&(a, b)| b - a + 1).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.intervals.iter().flat_map(|&(a, b)| a..=b)
    }

    pub fn vertex_set(&self) -> BTreeSet<usize> {
        self.vertices().collect()
    }
}

/// Loops of a structure in post-order of the arc tree, together with the
/// position of each loop's parent loop in the same list (None for the
/// rainbow loop).
pub fn loops_with_parents(
    s: &SecondaryStructure,
    owner: Owner,
) -> (Vec<Loop>, Vec<Option<usize>>) {
    let poset = arc_poset(s);
    let order = poset.post_order();
    let mut slot = vec![0usize; poset.arcs().len()];
    for (pos, &arc_idx) in order.iter().enumerate() {
        slot[arc_idx] = pos;
    }
    let mut loops = Vec::with_capacity(order.len());
    let mut parents = Vec::with_capacity(order.len());
    for &arc_idx in &order {
        let arc = poset.arcs()[arc_idx];
        let kids = poset.children(arc_idx);
        let mut intervals = Vec::with_capacity(kids.len() + 1);
        let mut cursor = arc.start;
        for &k in kids {
            let child = poset.arcs()[k];
            intervals.push((cursor, child.start));
            cursor = child.end;
        }
        intervals.push((cursor, arc.end));
        loops.push(Loop { owner, max_arc: arc, intervals });
        parents.push(poset.parent(arc_idx).map(|p| slot[p]));
    }
    (loops, parents)
}

/// Loop decomposition: exactly one loop per arc (rainbow included), in
/// post-order of the arc tree.
pub fn loops(s: &SecondaryStructure, owner: Owner) -> Vec<Loop> {
    loops_with_parents(s, owner).0
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GapKind {
    Exterior,
    Interior,
}

/// An interval of the backbone complementary to a loop's blocks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Gap {
    pub interval: (usize, usize),
    pub kind: GapKind,
    pub index: usize,
}

/// The k+1 gaps of a k-block loop: `[0, a1]`, the intervals between
/// consecutive blocks, and `[bk, n+1]`. First and last are exterior.
pub fn loop_gaps(lp: &Loop, n: usize) -> Vec<Gap> {
    let blocks = lp.intervals();
    let k = blocks.len();
    let mut gaps = Vec::with_capacity(k + 1);
    gaps.push(Gap { interval: (0, blocks[0].0), kind: GapKind::Exterior, index: 0 });
    for i in 1..k {
        gaps.push(Gap {
            interval: (blocks[i - 1].1, blocks[i].0),
            kind: GapKind::Interior,
            index: i,
        });
    }
    gaps.push(Gap { interval: (blocks[k - 1].1, n + 1), kind: GapKind::Exterior, index: k });
    gaps
}

/// DP table: `table[m]` counts structures on `m` consecutive positions in
/// which every arc spans at least `min_gap` unpaired-capacity positions.
pub(crate) fn count_table(n: usize, min_gap: usize) -> Vec<BigUint> {
    let mut table: Vec<BigUint> = Vec::with_capacity(n + 1);
    table.push(BigUint::one());
    for m in 1..=n {
        // First position unpaired, or paired with the j-th position of the
        // window (inner span j-2 must admit min_gap positions).
        let mut total = table[m - 1].clone();
        let lo = min_gap + 2;
        for j in lo..=m {
            total += &table[j - 2] * &table[m - j];
        }
        table.push(total);
    }
    table
}

/// Number of non-crossing partial matchings on `n` positions where every
/// arc `(i,j)` satisfies `j - i - 1 >= min_gap`. Exact.
pub fn count_structures(n: usize, min_gap: usize) -> BigUint {
    count_table(n, min_gap).pop().unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct SamplerConfig {
    pub n: usize,
    pub min_gap: usize,
    pub seed: u64,
}

/// Exact uniform sampler over the structures counted by
/// [`count_structures`]. The DP table is built once and reused per draw.
pub struct Sampler {
    n: usize,
    min_gap: usize,
    table: Vec<BigUint>,
}

impl Sampler {
    pub fn new(n: usize, min_gap: usize) -> Self {
        Self { n, min_gap, table: count_table(n, min_gap) }
    }

    pub fn count(&self) -> &BigUint {
        &self.table[self.n]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> SecondaryStructure {
        let mut arcs = Vec::new();
        self.fill(0, self.n, rng, &mut arcs);
        arcs.sort();
        SecondaryStructure { n: self.n, arcs }
    }

    /// Sample the window of `m` positions starting at absolute position
    /// `offset + 1`, proportionally to the DP weights.
    fn fill<R: Rng>(&self, mut offset: usize, mut m: usize, rng: &mut R, arcs: &mut Vec<Arc>) {
        while m > 0 {
            let x = rng.gen_biguint_below(&self.table[m]);
            if x < self.table[m - 1] {
                offset += 1;
                m -= 1;
                continue;
            }
            let mut rem = x - &self.table[m - 1];
            let lo = self.min_gap + 2;
            let mut paired_at = None;
            for j in lo..=m {
                let w = &self.table[j - 2] * &self.table[m - j];
                if rem < w {
                    paired_at = Some(j);
                    break;
                }
                rem -= w;
            }
            let j = paired_at.expect("DP weights exhausted; count table inconsistent");
            arcs.push(Arc::new(offset + 1, offset + j));
            self.fill(offset + 1, j - 2, rng, arcs);
            offset += j;
            m -= j;
        }
    }
}

/// Draw one structure exactly uniformly; deterministic given the seed.
pub fn sample_uniform(cfg: &SamplerConfig) -> SecondaryStructure {
    let sampler = Sampler::new(cfg.n, cfg.min_gap);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    sampler.sample(&mut rng)
}

/// Deterministic per-instance RNG for batch drivers: the stream is keyed
/// by (master seed, instance index), so parallel and serial runs agree.
pub fn instance_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A pair of secondary structures over the same backbone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSecondaryStructure {
    pub s: SecondaryStructure,
    pub t: SecondaryStructure,
}

impl BiSecondaryStructure {
    pub fn new(s: SecondaryStructure, t: SecondaryStructure) -> Result<Self, StructureError> {
        if s.n() != t.n() {
            return Err(StructureError::LengthMismatch(s.n(), t.n()));
        }
        Ok(Self { s, t })
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// Two dot-bracket lines, S first.
    pub fn to_bis(&self) -> String {
        format!("{}\n{}\n", self.s.to_dot_bracket(), self.t.to_dot_bracket())
    }
}

#[derive(Debug, Error)]
pub enum BisError {
    #[error("line {line}: expected a non-empty dot-bracket line")]
    MissingLine { line: usize },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Read the two-line `.bis` format: line 1 = S, line 2 = T, equal length,
/// characters `(`, `)`, `.` only. Later lines are ignored; trailing
/// whitespace is stripped.
pub fn read_bis(text: &str) -> Result<BiSecondaryStructure, BisError> {
    let mut lines = text.lines();
    let first = lines.next().map(str::trim_end).unwrap_or("");
    if first.is_empty() {
        return Err(BisError::MissingLine { line: 1 });
    }
    let second = lines.next().map(str::trim_end).unwrap_or("");
    if second.is_empty() {
        return Err(BisError::MissingLine { line: 2 });
    }
    let s = SecondaryStructure::parse_dot_bracket(first)
        .map_err(|source| BisError::Parse { line: 1, source })?;
    let t = SecondaryStructure::parse_dot_bracket(second)
        .map_err(|source| BisError::Parse { line: 2, source })?;
    Ok(BiSecondaryStructure::new(s, t)?)
}

#[derive(Debug, Error)]
pub enum ArcJsonError {
    #[error("invalid arc-list JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Deserialize)]
struct ArcListJson {
    n: usize,
    s_arcs: Vec<(usize, usize)>,
    t_arcs: Vec<(usize, usize)>,
}

/// Read the arc-list JSON alternative:
/// `{"n": int, "s_arcs": [[i,j],...], "t_arcs": [[i,j],...]}` with 1-based
/// positions and the rainbow implicit.
pub fn read_arc_json(text: &str) -> Result<BiSecondaryStructure, ArcJsonError> {
    let raw: ArcListJson = serde_json::from_str(text)?;
    let build = |pairs: &[(usize, usize)]| -> Result<SecondaryStructure, StructureError> {
        let mut arcs = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            if i >= j {
                return Err(StructureError::OutOfRange { start: i, end: j, n: raw.n });
            }
            arcs.push(Arc::new(i, j));
        }
        SecondaryStructure::from_arcs(raw.n, arcs)
    };
    let s = build(&raw.s_arcs)?;
    let t = build(&raw.t_arcs)?;
    Ok(BiSecondaryStructure::new(s, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn arcs(pairs: &[(usize, usize)]) -> Vec<Arc> {
        pairs.iter().map(|&(a, b)| Arc::new(a, b)).collect()
    }

    #[test]
    fn parse_simple_hairpin() {
        let s = SecondaryStructure::parse_dot_bracket("(.).").unwrap();
        assert_eq!(s.n(), 4);
        assert_eq!(s.arcs(), &[Arc::new(1, 3)]);
        assert_eq!(s.rainbow(), Arc::new(0, 5));
    }

    #[test]
    fn parse_all_dots() {
        let s = SecondaryStructure::parse_dot_bracket("....").unwrap();
        assert_eq!(s.n(), 4);
        assert!(s.arcs().is_empty());
        assert_eq!(s.rainbow(), Arc::new(0, 5));
    }

    #[test]
    fn parse_unclosed_bracket() {
        let err = SecondaryStructure::parse_dot_bracket("(().").unwrap_err();
        assert_eq!(err, ParseError::UnbalancedBrackets { position: 1 });
    }

    #[test]
    fn parse_stray_close() {
        let err = SecondaryStructure::parse_dot_bracket(".)..").unwrap_err();
        assert_eq!(err, ParseError::UnbalancedBrackets { position: 2 });
    }

    #[test]
    fn parse_invalid_character() {
        let err = SecondaryStructure::parse_dot_bracket("(.x)").unwrap_err();
        assert_eq!(err, ParseError::InvalidCharacter { found: 'x', position: 3 });
    }

    #[test]
    fn parse_empty_line_gives_length_zero() {
        let s = SecondaryStructure::parse_dot_bracket("").unwrap();
        assert_eq!(s.n(), 0);
        assert_eq!(s.rainbow(), Arc::new(0, 1));
    }

    #[test]
    fn validate_rejects_crossing() {
        let err = SecondaryStructure::from_arcs(4, arcs(&[(1, 3), (2, 4)])).unwrap_err();
        assert_eq!(err, StructureError::CrossingArcs(Arc::new(1, 3), Arc::new(2, 4)));
    }

    #[test]
    fn validate_accepts_nested() {
        let s = SecondaryStructure::from_arcs(4, arcs(&[(1, 4), (2, 3)])).unwrap();
        assert_eq!(s.arcs().len(), 2);
    }

    #[test]
    fn validate_rejects_duplicate_endpoint() {
        let err = SecondaryStructure::from_arcs(2, arcs(&[(1, 2), (1, 2)])).unwrap_err();
        assert_eq!(err, StructureError::DuplicateEndpoint(1));
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let err = SecondaryStructure::from_arcs(4, arcs(&[(1, 5)])).unwrap_err();
        assert_eq!(err, StructureError::OutOfRange { start: 1, end: 5, n: 4 });
    }

    #[test]
    fn poset_direct_nesting() {
        let s = SecondaryStructure::from_arcs(4, arcs(&[(1, 4), (2, 3)])).unwrap();
        let p = arc_poset(&s);
        // arcs: [rainbow, (1,4), (2,3)]
        assert_eq!(p.arcs(), &[Arc::new(0, 5), Arc::new(1, 4), Arc::new(2, 3)]);
        assert_eq!(p.parent(2), Some(1));
        assert_eq!(p.parent(1), Some(0));
        assert_eq!(p.parent(0), None);
    }

    #[test]
    fn poset_empty_structure() {
        let p = arc_poset(&SecondaryStructure::empty(4));
        assert_eq!(p.arcs().len(), 1);
        assert_eq!(p.parent(0), None);
    }

    #[test]
    fn poset_two_siblings_under_common_cover() {
        let s =
            SecondaryStructure::from_arcs(21, arcs(&[(4, 19), (5, 11), (14, 18)])).unwrap();
        let p = arc_poset(&s);
        let idx = |a: Arc| p.arcs().iter().position(|&x| x == a).unwrap();
        let outer = idx(Arc::new(4, 19));
        assert_eq!(p.parent(idx(Arc::new(5, 11))), Some(outer));
        assert_eq!(p.parent(idx(Arc::new(14, 18))), Some(outer));
        assert_eq!(p.parent(outer), Some(0));
    }

    #[test]
    fn loop_of_multiblock_arc() {
        let s =
            SecondaryStructure::from_arcs(21, arcs(&[(4, 19), (5, 11), (14, 18)])).unwrap();
        let lps = loops(&s, Owner::S);
        let lp = lps.iter().find(|l| l.max_arc == Arc::new(4, 19)).unwrap();
        assert_eq!(lp.intervals(), &[(4, 5), (11, 14), (18, 19)]);
    }

    #[test]
    fn loop_of_empty_structure_is_whole_backbone() {
        let lps = loops(&SecondaryStructure::empty(4), Owner::S);
        assert_eq!(lps.len(), 1);
        assert_eq!(lps[0].intervals(), &[(0, 5)]);
    }

    #[test]
    fn loops_of_hairpin() {
        let s = SecondaryStructure::parse_dot_bracket("(.).").unwrap();
        let lps = loops(&s, Owner::S);
        assert_eq!(lps.len(), 2);
        let inner = lps.iter().find(|l| l.max_arc == Arc::new(1, 3)).unwrap();
        let outer = lps.iter().find(|l| l.max_arc == Arc::new(0, 5)).unwrap();
        assert_eq!(inner.intervals(), &[(1, 3)]);
        assert_eq!(outer.intervals(), &[(0, 1), (3, 5)]);
    }

    // Loop decomposition properties: every unpaired vertex in exactly one
    // loop, loops biject with arcs, arc endpoints lie in exactly two
    // loops, and the loop vertex sets cover [0, n+1].
    fn check_loop_properties(s: &SecondaryStructure) {
        let lps = loops(s, Owner::S);
        assert_eq!(lps.len(), s.arcs().len() + 1);
        let mut max_arcs: Vec<Arc> = lps.iter().map(|l| l.max_arc).collect();
        max_arcs.sort();
        max_arcs.dedup();
        assert_eq!(max_arcs.len(), lps.len(), "loop -> max arc must be injective");

        let n = s.n();
        for v in 0..=n + 1 {
            let containing = lps.iter().filter(|l| l.contains(v)).count();
            let expected = if v >= 1 && v <= n && s.is_paired(v) { 2 } else { 1 };
            assert_eq!(containing, expected, "vertex {v} in wrong number of loops");
        }
    }

    #[test]
    fn loop_properties_on_small_corpus() {
        for line in ["", "....", "(.).", "((..))", "(())()", "(.(..).)..()"] {
            let s = SecondaryStructure::parse_dot_bracket(line).unwrap();
            check_loop_properties(&s);
        }
    }

    #[test]
    fn loop_properties_on_sampled_structures() {
        let sampler = Sampler::new(30, 0);
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = sampler.sample(&mut rng);
            check_loop_properties(&s);
            // no crossing pair
            for (i, a) in s.arcs().iter().enumerate() {
                for b in &s.arcs()[i + 1..] {
                    assert!(!a.crosses(b));
                }
            }
        }
    }

    #[test]
    fn gaps_of_multiblock_loop() {
        let s =
            SecondaryStructure::from_arcs(21, arcs(&[(4, 19), (5, 11), (14, 18)])).unwrap();
        let lps = loops(&s, Owner::S);
        let lp = lps.iter().find(|l| l.max_arc == Arc::new(4, 19)).unwrap();
        let gaps = loop_gaps(lp, 21);
        let intervals: Vec<_> = gaps.iter().map(|g| g.interval).collect();
        assert_eq!(intervals, vec![(0, 4), (5, 11), (14, 18), (19, 22)]);
        assert_eq!(gaps[0].kind, GapKind::Exterior);
        assert_eq!(gaps[3].kind, GapKind::Exterior);
        assert_eq!(gaps[1].kind, GapKind::Interior);
        assert_eq!(gaps[2].kind, GapKind::Interior);
    }

    #[test]
    fn gaps_of_rainbow_loop_of_empty_structure() {
        let n = 4;
        let lps = loops(&SecondaryStructure::empty(n), Owner::S);
        let gaps = loop_gaps(&lps[0], n);
        let intervals: Vec<_> = gaps.iter().map(|g| g.interval).collect();
        assert_eq!(intervals, vec![(0, 0), (5, 5)]);
        assert!(gaps.iter().all(|g| g.kind == GapKind::Exterior));
    }

    #[test]
    fn gaps_of_single_block_loop() {
        let s = SecondaryStructure::parse_dot_bracket("(.).").unwrap();
        let lps = loops(&s, Owner::S);
        let inner = lps.iter().find(|l| l.max_arc == Arc::new(1, 3)).unwrap();
        let intervals: Vec<_> = loop_gaps(inner, 4).iter().map(|g| g.interval).collect();
        assert_eq!(intervals, vec![(0, 1), (3, 5)]);
    }

    #[test]
    fn gaps_and_blocks_tile_the_backbone() {
        let sampler = Sampler::new(25, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = sampler.sample(&mut rng);
            for lp in loops(&s, Owner::S) {
                let gaps = loop_gaps(&lp, s.n());
                let blocks = lp.intervals();
                assert_eq!(gaps.len(), blocks.len() + 1);
                assert_eq!(gaps[0].interval.0, 0);
                assert_eq!(gaps.last().unwrap().interval.1, s.n() + 1);
                for (i, b) in blocks.iter().enumerate() {
                    assert_eq!(gaps[i].interval.1, b.0);
                    assert_eq!(gaps[i + 1].interval.0, b.1);
                }
            }
        }
    }

    #[test]
    fn counts_match_known_values() {
        let got: Vec<_> = (0..=4).map(|n| count_structures(n, 0)).collect();
        let want: Vec<BigUint> =
            [1u32, 1, 2, 4, 9].iter().map(|&v| BigUint::from(v)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn counts_with_min_gap() {
        assert_eq!(count_structures(3, 3), BigUint::one());
        assert_eq!(count_structures(5, 3), BigUint::from(2u32));
    }

    #[test]
    fn counts_match_exhaustive_enumeration() {
        for min_gap in [0, 1, 3] {
            for n in 0..=10 {
                let brute = oracle::enumerate_structures(n, min_gap).len();
                assert_eq!(
                    count_structures(n, min_gap),
                    BigUint::from(brute),
                    "n={n} min_gap={min_gap}"
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = SamplerConfig { n: 50, min_gap: 0, seed: 42 };
        let a = sample_uniform(&cfg);
        let b = sample_uniform(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_with_singleton_support() {
        for seed in 0..5 {
            let cfg = SamplerConfig { n: 3, min_gap: 3, seed };
            assert!(sample_uniform(&cfg).arcs().is_empty());
        }
    }

    #[test]
    fn sampling_respects_min_gap() {
        let sampler = Sampler::new(20, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = sampler.sample(&mut rng);
            for a in s.arcs() {
                assert!(a.end - a.start - 1 >= 3);
            }
        }
    }

    #[test]
    fn sampling_n4_is_uniform_within_three_sigma() {
        // 9 structures on 4 positions; 90 000 draws, expect 10 000 each.
        let all = oracle::enumerate_structures(4, 0);
        assert_eq!(all.len(), 9);
        let sampler = Sampler::new(4, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = vec![0usize; all.len()];
        let draws = 90_000;
        for _ in 0..draws {
            let s = sampler.sample(&mut rng);
            let idx = all.iter().position(|x| *x == s).unwrap();
            counts[idx] += 1;
        }
        // 3 sigma of a Bin(90000, 1/9) is ~ 283; allow 0.5% of the total
        // (450) on each bin.
        for &c in &counts {
            assert!((c as f64 - 10_000.0).abs() < 450.0, "counts={counts:?}");
        }
    }

    #[test]
    fn sampling_with_min_gap_is_uniform() {
        // 8 structures exist at n=6 with min_gap=2; chi-square over 80k
        // draws at significance 0.001 (critical value for 7 df)
        let all = oracle::enumerate_structures(6, 2);
        assert_eq!(all.len(), 8);
        let sampler = Sampler::new(6, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 80_000;
        let mut counts = vec![0usize; all.len()];
        for _ in 0..draws {
            let s = sampler.sample(&mut rng);
            counts[all.iter().position(|x| *x == s).unwrap()] += 1;
        }
        let expected = draws as f64 / all.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 24.322, "chi-square {chi2:.2} too large; counts={counts:?}");
    }

    #[test]
    fn bis_round_trip() {
        let r = read_bis("(.).\n.(.)\n").unwrap();
        assert_eq!(r.s.arcs(), &[Arc::new(1, 3)]);
        assert_eq!(r.t.arcs(), &[Arc::new(2, 4)]);
        assert_eq!(r.to_bis(), "(.).\n.(.)\n");
    }

    #[test]
    fn bis_ignores_trailing_lines_and_whitespace() {
        let r = read_bis("(.). \n.(.)\t\n# anything goes here\n").unwrap();
        assert_eq!(r.n(), 4);
    }

    #[test]
    fn bis_rejects_missing_or_unequal_lines() {
        assert!(matches!(read_bis("(.).\n"), Err(BisError::MissingLine { line: 2 })));
        assert!(matches!(read_bis(""), Err(BisError::MissingLine { line: 1 })));
        assert!(matches!(
            read_bis("(.).\n..\n"),
            Err(BisError::Structure(StructureError::LengthMismatch(4, 2)))
        ));
    }

    #[test]
    fn arc_json_reads_pairs() {
        let r = read_arc_json(r#"{"n":4,"s_arcs":[[1,3]],"t_arcs":[[2,4]]}"#).unwrap();
        assert_eq!(r.s.arcs(), &[Arc::new(1, 3)]);
        assert_eq!(r.t.arcs(), &[Arc::new(2, 4)]);
    }

    #[test]
    fn arc_json_rejects_bad_pairs() {
        assert!(matches!(
            read_arc_json(r#"{"n":4,"s_arcs":[[3,3]],"t_arcs":[]}"#),
            Err(ArcJsonError::Structure(StructureError::OutOfRange { .. }))
        ));
        assert!(matches!(
            read_arc_json(r#"{"n":4,"s_arcs":[[1,3],[2,4]],"t_arcs":[]}"#),
            Err(ArcJsonError::Structure(StructureError::CrossingArcs(..)))
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn dot_bracket_line() -> impl Strategy<Value = String> {
            proptest::collection::vec(
                prop_oneof![Just('('), Just(')'), Just('.')],
                0..40,
            )
            .prop_map(|chars| chars.into_iter().collect())
        }

        proptest! {
            #[test]
            fn parse_never_panics_and_valid_lines_round_trip(line in dot_bracket_line()) {
                if let Ok(s) = SecondaryStructure::parse_dot_bracket(&line) {
                    prop_assert_eq!(s.to_dot_bracket(), line);
                    for (i, a) in s.arcs().iter().enumerate() {
                        for b in &s.arcs()[i + 1..] {
                            prop_assert!(!a.crosses(b));
                        }
                    }
                    check_loop_properties(&s);
                }
            }

            #[test]
            fn sampled_structures_satisfy_loop_properties(
                n in 0usize..25,
                min_gap in 0usize..4,
                seed in any::<u64>(),
            ) {
                let s = sample_uniform(&SamplerConfig { n, min_gap, seed });
                prop_assert_eq!(s.n(), n);
                for a in s.arcs() {
                    prop_assert!(a.end - a.start - 1 >= min_gap);
                }
                check_loop_properties(&s);
            }
        }
    }
}
