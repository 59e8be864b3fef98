//! Integer chain complexes over the loop nerve and their exact homology.
//!
//! Boundary matrices are assembled under a simplicial order, reduced by
//! Smith normal form, and checked against the structure theorems: on any
//! valid bi-secondary structure the homology is free with `b0 = 1`,
//! `b1 = 0`, `b3 = 0`, so the whole invariant content is the rank of the
//! second homology group.

mod persistence;
pub mod snf;

pub use persistence::{persistence_spectrum, FilteredHomology, SpectrumError};
pub use snf::{smith_diagonal, smith_normal_form, DenseMat, SmithForm};

use snf::rounded_div;

use std::collections::{BTreeSet, HashMap};

use num::{BigInt, One, Signed, Zero};
use thiserror::Error;

use crate::nerve::{LoopId, NerveComplex, SimplicialOrder};
use crate::structures::{Arc, Owner};

/// Sparse column-major integer matrix; entries are stored as
/// `(row, coefficient)` pairs sorted by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, i64)>>,
}

impl SparseMat {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.columns[c]
    }

    pub fn to_dense(&self) -> DenseMat<BigInt> {
        let mut m = DenseMat::zeros(self.rows, self.cols);
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                *m.at_mut(r, c) = BigInt::from(v);
            }
        }
        m
    }

    /// Whether `self * other` is the zero matrix.
    pub fn compose_is_zero(&self, other: &SparseMat) -> bool {
        assert_eq!(self.cols, other.rows);
        for col in &other.columns {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(k, a) in col {
                for &(r, b) in &self.columns[k] {
                    *acc.entry(r).or_insert(0) += a * b;
                }
            }
            if acc.values().any(|&v| v != 0) {
                return false;
            }
        }
        true
    }
}

/// The integer chain complex of a nerve under a simplicial order: ordered
/// simplex tuples per dimension and the three boundary matrices.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    bases: [Vec<Vec<LoopId>>; 4],
    boundaries: [SparseMat; 3],
}

impl ChainComplex {
    /// Basis tuples of dimension `d`, each sorted by the simplicial order.
    pub fn basis(&self, d: usize) -> &[Vec<LoopId>] {
        &self.bases[d]
    }

    pub fn size(&self, d: usize) -> usize {
        self.bases[d].len()
    }

    /// The boundary matrix from dimension `d` to `d - 1`, for `d` in 1..=3.
    pub fn boundary(&self, d: usize) -> &SparseMat {
        &self.boundaries[d - 1]
    }
}

/// Assemble the signed boundary matrices of `nerve` under `order`. The
/// compositions of consecutive boundary maps are verified to vanish.
pub fn boundary_matrices(nerve: &NerveComplex, order: &SimplicialOrder) -> ChainComplex {
    let mut bases: [Vec<Vec<LoopId>>; 4] = Default::default();
    let mut maps: [HashMap<Vec<LoopId>, usize>; 4] = Default::default();
    for d in 0..4 {
        let mut keyed: Vec<(Vec<usize>, Vec<LoopId>)> = nerve
            .stratum(d)
            .iter()
            .map(|sx| {
                let mut vs = sx.vertices().to_vec();
                vs.sort_by_key(|&id| order.rank(id));
                let key: Vec<usize> = vs.iter().map(|&id| order.rank(id)).collect();
                (key, vs)
            })
            .collect();
        keyed.sort();
        bases[d] = keyed.into_iter().map(|(_, vs)| vs).collect();
        maps[d] = bases[d].iter().enumerate().map(|(i, vs)| (vs.clone(), i)).collect();
    }

    let boundaries = [1, 2, 3].map(|d| {
        let mut columns = Vec::with_capacity(bases[d].len());
        for tuple in &bases[d] {
            let mut col = Vec::with_capacity(d + 1);
            for skip in 0..=d {
                let face: Vec<LoopId> = tuple
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let row = maps[d - 1][&face];
                let coeff = if skip % 2 == 0 { 1 } else { -1 };
                col.push((row, coeff));
            }
            col.sort();
            columns.push(col);
        }
        SparseMat { rows: bases[d - 1].len(), cols: bases[d].len(), columns }
    });

    assert!(
        boundaries[0].compose_is_zero(&boundaries[1]),
        "boundary composition d1*d2 must vanish"
    );
    assert!(
        boundaries[1].compose_is_zero(&boundaries[2]),
        "boundary composition d2*d3 must vanish"
    );
    ChainComplex { bases, boundaries }
}

/// An integer 2-chain as sparse (basis index, coefficient) pairs.
pub type GeneratorChain = Vec<(usize, BigInt)>;

/// Exact homology of a chain complex: Betti numbers, invariant factors
/// above 1 per dimension, generators of the second homology group, and
/// the Euler characteristic.
#[derive(Clone, Debug)]
pub struct HomologyResult {
    pub betti: [usize; 4],
    pub torsion: [Vec<BigInt>; 4],
    pub h2_generators: Vec<GeneratorChain>,
    pub euler: i64,
}

impl HomologyResult {
    pub fn h2_rank(&self) -> usize {
        self.betti[2]
    }
}

/// Raised when a computed homology contradicts the structure theorems;
/// on valid input this can only mean an implementation bug.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error(
    "homology violates the structure theorems: dimension {dimension}, betti {betti:?}, \
     boundary ranks {ranks:?}, torsion present: {has_torsion}"
)]
pub struct TheoremViolation {
    pub dimension: usize,
    pub betti: [usize; 4],
    pub ranks: [usize; 3],
    pub has_torsion: bool,
}

fn homology_with_ranks(cc: &ChainComplex) -> (HomologyResult, [usize; 3]) {
    let (ranks, torsion) = boundary_ranks(cc);
    let betti = betti_from_ranks(cc, &ranks);
    let euler = euler_from_sizes(cc);
    let h2_generators =
        if betti[2] > 0 { compute_h2_generators(cc) } else { Vec::new() };
    (HomologyResult { betti, torsion, h2_generators, euler }, ranks)
}

/// Homology without the theorem checks; used for filtration levels, where
/// intermediate subcomplexes are not full nerves.
pub fn homology_unchecked(cc: &ChainComplex) -> HomologyResult {
    homology_with_ranks(cc).0
}

/// Homology of the full nerve complex. Violations of the structure
/// theorems (nontrivial H1, H3, disconnectedness, or any torsion) are
/// reported as errors, never returned silently.
pub fn homology(cc: &ChainComplex) -> Result<HomologyResult, TheoremViolation> {
    let (result, ranks) = homology_with_ranks(cc);
    let has_torsion = result.torsion.iter().any(|t| !t.is_empty());
    let violation = |dimension: usize| TheoremViolation {
        dimension,
        betti: result.betti,
        ranks,
        has_torsion,
    };
    if let Some(d) = result.torsion.iter().position(|t| !t.is_empty()) {
        return Err(violation(d));
    }
    if result.betti[0] != 1 {
        return Err(violation(0));
    }
    if result.betti[1] != 0 {
        return Err(violation(1));
    }
    if result.betti[3] != 0 {
        return Err(violation(3));
    }
    Ok(result)
}

fn boundary_ranks(cc: &ChainComplex) -> ([usize; 3], [Vec<BigInt>; 4]) {
    let mut ranks = [0usize; 3];
    let mut torsion: [Vec<BigInt>; 4] = Default::default();
    for d in 1..=3 {
        let m = cc.boundary(d);
        if m.rows() == 0 || m.cols() == 0 {
            continue;
        }
        let (diag, rank) = smith_diagonal(&m.to_dense());
        ranks[d - 1] = rank;
        torsion[d - 1] = diag.into_iter().filter(|v| !v.is_one()).collect();
    }
    (ranks, torsion)
}

fn betti_from_ranks(cc: &ChainComplex, ranks: &[usize; 3]) -> [usize; 4] {
    let mut betti = [0usize; 4];
    for d in 0..4 {
        let below = if d == 0 { 0 } else { ranks[d - 1] };
        let above = if d == 3 { 0 } else { ranks[d] };
        betti[d] = cc.size(d) - below - above;
    }
    betti
}

fn euler_from_sizes(cc: &ChainComplex) -> i64 {
    (0..4).map(|d| {
        let v = cc.size(d) as i64;
        if d % 2 == 0 {
            v
        } else {
            -v
        }
    }).sum()
}

/// Alternating sum of simplex counts of the nerve.
pub fn euler_characteristic(nerve: &NerveComplex) -> i64 {
    nerve
        .simplex_counts()
        .iter()
        .enumerate()
        .map(|(d, &count)| if d % 2 == 0 { count as i64 } else { -(count as i64) })
        .sum()
}

/// The subcomplex of simplices with weight at least `t` (`t >= 1`).
pub fn filtered_complex(nerve: &NerveComplex, t: usize) -> NerveComplex {
    nerve.restrict_to_weight(t)
}

/// Generators whose classes freely generate the second homology group:
/// a kernel basis of the degree-2 boundary map is computed from the Smith
/// transforms, the image of the degree-3 boundary map is split off, and
/// coefficients are reduced to small representatives against a column
/// echelon basis of that image.
pub fn h2_generators(cc: &ChainComplex) -> Vec<GeneratorChain> {
    compute_h2_generators(cc)
}

fn compute_h2_generators(cc: &ChainComplex) -> Vec<GeneratorChain> {
    let k2 = cc.size(2);
    if k2 == 0 {
        return Vec::new();
    }
    let d2 = cc.boundary(2);
    let snf2 = smith_normal_form(&d2.to_dense());
    let kernel_rank = k2 - snf2.rank;
    if kernel_rank == 0 {
        return Vec::new();
    }

    // Coordinates of the degree-3 boundary columns in the kernel basis:
    // the top rows of v_inv * d3 vanish because those columns are cycles.
    let k3 = cc.size(3);
    let d3 = cc.boundary(3);
    let mut lattice = DenseMat::<BigInt>::zeros(kernel_rank, k3);
    for c in 0..k3 {
        for &(row, val) in d3.column(c) {
            let val = BigInt::from(val);
            for i in snf2.rank..k2 {
                let contrib = snf2.v_inv.at(i, row) * &val;
                let cell = lattice.at_mut(i - snf2.rank, c);
                *cell += contrib;
            }
        }
    }
    #[cfg(debug_assertions)]
    {
        // the boundary columns must lie in the kernel of d2
        let d3_dense = d3.to_dense();
        let top = snf2.v_inv.mul(&d3_dense).unwrap();
        for i in 0..snf2.rank {
            for c in 0..k3 {
                assert!(top.at(i, c).is_zero(), "degree-3 boundary is not a cycle");
            }
        }
    }

    let snf_lattice = smith_normal_form(&lattice);
    let quotient_rank = kernel_rank - snf_lattice.rank;

    // Free generators of the quotient: preimages of the unit vectors past
    // the lattice rank, mapped back through the kernel basis.
    let echelon = column_echelon(d3.to_dense());
    let mut out = Vec::with_capacity(quotient_rank);
    for g_idx in snf_lattice.rank..kernel_rank {
        let y = snf_lattice.u_inv.column(g_idx);
        let mut chain: Vec<BigInt> = vec![BigInt::zero(); k2];
        for (k, coeff) in y.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (row, entry) in chain.iter_mut().enumerate() {
                *entry += snf2.v.at(row, snf2.rank + k) * coeff;
            }
        }
        reduce_against_echelon(&mut chain, &echelon);
        #[cfg(debug_assertions)]
        {
            let mut acc = vec![BigInt::zero(); cc.size(1)];
            for (j, coeff) in chain.iter().enumerate() {
                for &(row, val) in d2.column(j) {
                    acc[row] += BigInt::from(val) * coeff;
                }
            }
            assert!(acc.iter().all(Zero::is_zero), "generator is not a cycle");
        }
        let sparse: GeneratorChain = chain
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .collect();
        out.push(sparse);
    }
    out
}

/// Column echelon basis of the column lattice of `m`: pairs of pivot row
/// and column vector, with strictly increasing pivot rows.
fn column_echelon(m: DenseMat<BigInt>) -> Vec<(usize, Vec<BigInt>)> {
    let rows = m.rows();
    let mut cols: Vec<Vec<BigInt>> = (0..m.cols()).map(|c| m.column(c)).collect();
    cols.retain(|c| c.iter().any(|v| !v.is_zero()));
    let mut out = Vec::new();
    for row in 0..rows {
        if cols.is_empty() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for (i, col) in cols.iter().enumerate() {
                if col[row].is_zero() {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => {
                        if col[row].magnitude() < cols[b][row].magnitude() {
                            Some(i)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let Some(p) = best else { break };
            let mut settled = true;
            for i in 0..cols.len() {
                if i == p || cols[i][row].is_zero() {
                    continue;
                }
                let q = rounded_div(&cols[i][row], &cols[p][row]);
                if !q.is_zero() {
                    for r in 0..rows {
                        let sub = &cols[p][r] * &q;
                        cols[i][r] -= sub;
                    }
                }
                if !cols[i][row].is_zero() {
                    settled = false;
                }
            }
            if settled {
                let mut pivot = cols.swap_remove(p);
                if pivot[row].is_negative() {
                    for v in &mut pivot {
                        *v = -&*v;
                    }
                }
                out.push((row, pivot));
                break;
            }
        }
    }
    out
}

/// Reduce `chain` modulo the lattice spanned by the echelon columns,
/// leaving minimal residues at the pivot rows.
fn reduce_against_echelon(chain: &mut [BigInt], echelon: &[(usize, Vec<BigInt>)]) {
    for (pivot_row, col) in echelon {
        let q = rounded_div(&chain[*pivot_row], &col[*pivot_row]);
        if q.is_zero() {
            continue;
        }
        for (entry, base) in chain.iter_mut().zip(col.iter()) {
            *entry -= base * &q;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportEntry {
    pub id: LoopId,
    pub owner: Owner,
    pub max_arc: Arc,
}

/// The loops touched by a generator, grouped by owner: a human-readable
/// certificate of the mutually exclusive substructure pair.
#[derive(Clone, Debug, Default)]
pub struct SupportReport {
    pub s_loops: Vec<SupportEntry>,
    pub t_loops: Vec<SupportEntry>,
}

pub fn generator_support(
    gen: &GeneratorChain,
    cc: &ChainComplex,
    nerve: &NerveComplex,
) -> SupportReport {
    let mut ids: BTreeSet<LoopId> = BTreeSet::new();
    for &(idx, ref coeff) in gen {
        if !coeff.is_zero() {
            ids.extend(cc.basis(2)[idx].iter().copied());
        }
    }
    let mut report = SupportReport::default();
    for id in ids {
        let lp = nerve.loop_of(id);
        let entry = SupportEntry { id, owner: lp.owner, max_arc: lp.max_arc };
        match lp.owner {
            Owner::S => report.s_loops.push(entry),
            Owner::T => report.t_loops.push(entry),
        }
    }
    report
}
