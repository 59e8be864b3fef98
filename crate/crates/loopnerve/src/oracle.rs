//! Independent oracles used to cross-validate the main pipeline: an
//! exhaustive enumerator for structures, a subset-scan nerve builder with
//! explicit set intersections, and rational-arithmetic rank computations.
//! None of these share code with the implementations they check.

use std::collections::BTreeSet;

use num::{BigInt, BigRational, Zero};

use crate::homology::{ChainComplex, DenseMat, GeneratorChain, SparseMat};
use crate::nerve::{LoopId, NerveComplex};
use crate::structures::{Arc, SecondaryStructure};

/// All non-crossing partial matchings on `n` positions in which every arc
/// `(i,j)` satisfies `j - i - 1 >= min_gap`. Intended for small `n`.
pub fn enumerate_structures(n: usize, min_gap: usize) -> Vec<SecondaryStructure> {
    fn gen(lo: usize, hi: usize, min_gap: usize) -> Vec<Vec<Arc>> {
        if lo > hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for rest in gen(lo + 1, hi, min_gap) {
            out.push(rest);
        }
        for j in lo + 1..=hi {
            if j - lo - 1 < min_gap {
                continue;
            }
            for inner in gen(lo + 1, j - 1, min_gap) {
                for outer in gen(j + 1, hi, min_gap) {
                    let mut arcs = vec![Arc::new(lo, j)];
                    arcs.extend(inner.iter().copied());
                    arcs.extend(outer.iter().copied());
                    out.push(arcs);
                }
            }
        }
        out
    }
    gen(1, n, min_gap)
        .into_iter()
        .map(|arcs| SecondaryStructure::from_arcs(n, arcs).expect("enumerated arcs are valid"))
        .collect()
}

/// Brute-force strata of the loop nerve: every loop subset of size 1..=5
/// is intersected explicitly. Entry `d` of the result lists the
/// d-simplices as (sorted loop ids, sorted intersection); entry 4 must be
/// empty on valid input.
pub fn brute_force_strata(nerve: &NerveComplex) -> [Vec<(Vec<usize>, Vec<usize>)>; 5] {
    let sets: Vec<BTreeSet<usize>> =
        nerve.loops().iter().map(|lp| lp.vertex_set()).collect();
    let m = sets.len();
    let mut out: [Vec<(Vec<usize>, Vec<usize>)>; 5] = Default::default();
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        m: usize,
        sets: &[BTreeSet<usize>],
        chosen: &mut Vec<usize>,
        out: &mut [Vec<(Vec<usize>, Vec<usize>)>; 5],
    ) {
        if !chosen.is_empty() {
            let mut inter = sets[chosen[0]].clone();
            for &i in &chosen[1..] {
                inter = inter.intersection(&sets[i]).copied().collect();
            }
            if inter.is_empty() {
                return; // supersets intersect in subsets of this
            }
            out[chosen.len() - 1]
                .push((chosen.clone(), inter.into_iter().collect()));
        }
        if chosen.len() == 5 {
            return;
        }
        for next in start..m {
            chosen.push(next);
            rec(next + 1, m, sets, chosen, out);
            chosen.pop();
        }
    }
    rec(0, m, &sets, &mut chosen, &mut out);
    for stratum in &mut out {
        stratum.sort();
    }
    out
}

/// Compare the incidence-built nerve against the brute-force subset scan,
/// simplex for simplex and weight for weight, and confirm that no five
/// loops intersect.
pub fn nerve_matches_brute_force(nerve: &NerveComplex) -> Result<(), String> {
    let brute = brute_force_strata(nerve);
    if let Some((ids, inter)) = brute[4].first() {
        return Err(format!("five loops {ids:?} share vertices {inter:?}"));
    }
    for d in 0..4 {
        let got: Vec<(Vec<usize>, Vec<usize>)> = nerve
            .stratum(d)
            .iter()
            .map(|sx| {
                (
                    sx.vertices().iter().map(|id| id.0).collect(),
                    sx.intersection().to_vec(),
                )
            })
            .collect();
        if got != brute[d] {
            return Err(format!(
                "stratum {d} differs: incidence-built {} simplices vs brute-force {}",
                got.len(),
                brute[d].len()
            ));
        }
    }
    Ok(())
}

pub fn assert_nerve_matches_brute_force(nerve: &NerveComplex) {
    if let Err(msg) = nerve_matches_brute_force(nerve) {
        panic!("nerve mismatch: {msg}");
    }
}

/// Rank over the rationals by Gaussian elimination; independent of the
/// Smith normal form path.
pub fn rational_rank_dense(m: &DenseMat<BigInt>) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| (0..cols).map(|c| BigRational::from(m.at(r, c).clone())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let pivot = (rank..rows).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { continue };
        a.swap(rank, p);
        let inv = a[rank][col].recip();
        for c in col..cols {
            let scaled = &a[rank][c] * &inv;
            a[rank][c] = scaled;
        }
        for r in 0..rows {
            if r != rank && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in col..cols {
                    let sub = &a[rank][c] * &factor;
                    a[r][c] -= sub;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

pub fn rational_rank(m: &SparseMat) -> usize {
    rational_rank_dense(&m.to_dense())
}

/// Betti numbers from rational ranks of the boundary maps.
pub fn rational_betti(cc: &ChainComplex) -> [usize; 4] {
    let ranks: [usize; 3] = [1, 2, 3].map(|d| {
        let m = cc.boundary(d);
        if m.rows() == 0 || m.cols() == 0 {
            0
        } else {
            rational_rank(m)
        }
    });
    let mut betti = [0usize; 4];
    for d in 0..4 {
        let below = if d == 0 { 0 } else { ranks[d - 1] };
        let above = if d == 3 { 0 } else { ranks[d] };
        betti[d] = cc.size(d) - below - above;
    }
    betti
}

/// Rank of the column space of the degree-3 boundary matrix extended by
/// the given 2-chains; used to certify that generators are independent
/// modulo boundaries.
pub fn rank_of_image_with_chains(cc: &ChainComplex, chains: &[GeneratorChain]) -> usize {
    let k2 = cc.size(2);
    let d3 = cc.boundary(3);
    let mut rows: Vec<Vec<BigInt>> =
        vec![vec![BigInt::zero(); d3.cols() + chains.len()]; k2];
    for c in 0..d3.cols() {
        for &(r, v) in d3.column(c) {
            rows[r][c] = BigInt::from(v);
        }
    }
    for (j, chain) in chains.iter().enumerate() {
        for (r, v) in chain {
            rows[*r][d3.cols() + j] = v.clone();
        }
    }
    rational_rank_dense(&DenseMat::from_rows(rows))
}

/// Loops of the nerve containing a given backbone vertex, recomputed from
/// the interval lists rather than the incidence table.
pub fn loops_containing(nerve: &NerveComplex, v: usize) -> Vec<LoopId> {
    nerve
        .loops()
        .iter()
        .enumerate()
        .filter(|(_, lp)| lp.contains(v))
        .map(|(i, _)| LoopId(i))
        .collect()
}
