//! The weight-filtered homology spectrum.
//!
//! For each level `t`, `K^t` is the subcomplex of simplices with weight at
//! least `t`; decreasing `t` from the maximum weight to 1 grows the
//! complex, which makes decreasing weight a valid filtration (faces carry
//! at least the weight of their cofaces). Per-level Betti numbers are
//! computed over the integers; persistence bars are computed by the
//! standard column reduction over the field of two elements, and the two
//! views are cross-checked level by level.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{boundary_matrices, homology_unchecked};
use crate::nerve::{LoopId, NerveComplex};

/// Per-level Betti numbers and persistence bars of the weight filtration.
///
/// A bar `(birth, death)` in dimension `d` means the class exists in
/// `K^t` exactly for `death < t <= birth`; essential classes (alive in
/// the full complex at `t = 1`) carry `death = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredHomology {
    pub levels: BTreeMap<usize, [usize; 4]>,
    pub bars: [Vec<(usize, usize)>; 4],
}

impl FilteredHomology {
    /// Bars of dimension `d` alive at level `t`.
    pub fn alive(&self, d: usize, t: usize) -> usize {
        self.bars[d].iter().filter(|&&(birth, death)| death < t && t <= birth).count()
    }
}

/// Raised when the integer per-level Betti numbers disagree with the
/// bar decomposition over the two-element field, which can only happen if
/// a level carries torsion (never observed) or an implementation bug.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error(
    "level {t} dimension {dim}: integer betti {z_betti} disagrees with alive bar count \
     {bar_count}"
)]
pub struct SpectrumError {
    pub t: usize,
    pub dim: usize,
    pub z_betti: usize,
    pub bar_count: usize,
}

/// Compute the full weight spectrum of a nerve: integer Betti numbers for
/// every level from the maximum weight down to 1, and persistence bars in
/// the weight parameter.
pub fn persistence_spectrum(nerve: &NerveComplex) -> Result<FilteredHomology, SpectrumError> {
    let max_w = nerve.max_weight();
    let mut levels = BTreeMap::new();
    for t in 1..=max_w {
        let level = nerve.restrict_to_weight(t);
        let cc = boundary_matrices(&level, level.default_order());
        levels.insert(t, homology_unchecked(&cc).betti);
    }
    let bars = reduce_bars(nerve);
    let spectrum = FilteredHomology { levels, bars };
    for (&t, betti) in &spectrum.levels {
        for d in 0..4 {
            let alive = spectrum.alive(d, t);
            if alive != betti[d] {
                return Err(SpectrumError { t, dim: d, z_betti: betti[d], bar_count: alive });
            }
        }
    }
    Ok(spectrum)
}

/// Standard persistence reduction over the two-element field. Simplices
/// enter by decreasing weight; zero-persistence pairs are dropped from
/// the bar lists.
fn reduce_bars(nerve: &NerveComplex) -> [Vec<(usize, usize)>; 4] {
    // filtration order: weight descending, dimension ascending, then the
    // vertex tuple for determinism
    let mut cells: Vec<(usize, Vec<LoopId>, usize)> = Vec::new(); // (dim, vertices, weight)
    for d in 0..4 {
        for sx in nerve.stratum(d) {
            cells.push((d, sx.vertices().to_vec(), sx.weight()));
        }
    }
    cells.sort_by(|a, b| {
        b.2.cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1))
    });
    let position: HashMap<Vec<LoopId>, usize> =
        cells.iter().enumerate().map(|(i, (_, vs, _))| (vs.clone(), i)).collect();

    // boundary columns as sorted position lists over the two-element field
    let mut reduced: Vec<Option<Vec<usize>>> = Vec::with_capacity(cells.len());
    let mut low_of: HashMap<usize, usize> = HashMap::new(); // low row -> column
    let mut pair_of: Vec<Option<usize>> = vec![None; cells.len()]; // birth cell -> death cell

    for (j, (dim, vertices, _)) in cells.iter().enumerate() {
        let mut col: Vec<usize> = if *dim == 0 {
            Vec::new()
        } else {
            let mut rows: Vec<usize> = (0..=*dim)
                .map(|skip| {
                    let face: Vec<LoopId> = vertices
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    position[&face]
                })
                .collect();
            rows.sort_unstable();
            rows
        };
        loop {
            let Some(&low) = col.last() else {
                // j creates a class
                reduced.push(None);
                break;
            };
            match low_of.get(&low) {
                Some(&k) => {
                    let other = reduced[k].as_ref().expect("pivot columns are stored");
                    col = symmetric_difference(&col, other);
                }
                None => {
                    low_of.insert(low, j);
                    pair_of[low] = Some(j);
                    reduced.push(Some(col));
                    break;
                }
            }
        }
    }

    let mut bars: [Vec<(usize, usize)>; 4] = Default::default();
    for (i, (dim, _, weight)) in cells.iter().enumerate() {
        if reduced[i].is_some() {
            continue; // i is a death cell, not a birth
        }
        let (birth, death) = match pair_of[i] {
            Some(j) => (*weight, cells[j].2),
            None => (*weight, 0),
        };
        if birth > death {
            bars[*dim].push((birth, death));
        }
    }
    for list in &mut bars {
        list.sort_by(|a, b| b.cmp(a));
    }
    bars
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
