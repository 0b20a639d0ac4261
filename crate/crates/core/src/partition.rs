//! Finite measurable partitions and their refinements.
//!
//! A partition owns its cells, per-cell measures with a provenance flag,
//! and a label index mapping points to cells. Cells of measure zero are
//! dropped when partitions are built or refined (the entropy sums skip
//! them anyway); the raw combinatorial cardinality at construction is kept
//! separately because the dimension-bound constants are stated in terms of
//! the partition's cardinality.
//!
//! Refinements are exact set arithmetic on the distinguished cell
//! families. The interval family additionally gets a sweep-based join so
//! deep dyadic refinements stay linear in the number of pieces instead of
//! quadratic in the number of cells.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::systems::dyadic::DyadicIv;
use crate::systems::symbolic::Cylinder;
use crate::systems::torus::{AngleCoord, ArcIv};
use crate::systems::{Cell, Point, System, SystemKind};

/// Default ceiling on refinement cell counts.
pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// Where the per-cell measures come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    MonteCarlo { n: u64, seed: u64 },
}

/// Shared pool of i.i.d. sample points used by every Monte-Carlo measure
/// in an experiment, so estimates are consistent across refinements.
#[derive(Debug)]
pub struct SamplePool {
    pub seed: u64,
    pub points: Vec<Point>,
}

impl SamplePool {
    pub fn draw(system: &System, n: usize, seed: u64) -> Result<Arc<SamplePool>> {
        Ok(Arc::new(SamplePool { seed, points: system.sample_measure(n, seed)? }))
    }
}

#[derive(Debug, Clone)]
enum LabelIndex {
    /// Interval pieces grouped by level.
    Intervals(Vec<(u8, HashMap<u64, usize>)>),
    /// Rectangle pieces grouped by level pair.
    Rects(Vec<((u8, u8), HashMap<(u64, u64), usize>)>),
    /// Cylinder cells grouped by constraint coordinates.
    Cylinders(Vec<(Vec<i64>, HashMap<Vec<u8>, usize>)>),
    /// Sorted arc pieces `(lo, hi, cell)`.
    Arcs(Vec<(f64, f64, usize)>),
    /// Small fallback: scan each cell.
    Scan,
}

/// A finite measurable partition of a system's state space.
#[derive(Debug, Clone)]
pub struct Partition {
    system: Arc<System>,
    cells: Vec<Cell>,
    measures: Vec<f64>,
    rationals: Option<Vec<BigRational>>,
    provenance: Provenance,
    combinatorial_cells: usize,
    pool: Option<Arc<SamplePool>>,
    index: LabelIndex,
}

impl Partition {
    /// Partition from explicit cells with exact measures. Cells of zero
    /// measure are dropped; the combinatorial count remembers them.
    pub fn exact(system: Arc<System>, cells: Vec<Cell>) -> Result<Partition> {
        Ok(Partition::exact_inner(system, cells)?.0)
    }

    fn exact_inner(system: Arc<System>, cells: Vec<Cell>) -> Result<(Partition, Vec<usize>)> {
        let combinatorial = cells.len();
        let mut kept = Vec::with_capacity(cells.len());
        let mut kept_indices = Vec::with_capacity(cells.len());
        let mut measures = Vec::with_capacity(cells.len());
        let mut rationals: Vec<BigRational> = Vec::new();
        let mut all_rational = true;
        for (i, cell) in cells.into_iter().enumerate() {
            let m = system.exact_cell_measure(&cell)?;
            let v = m.to_f64();
            if v <= 0.0 {
                continue;
            }
            match m.rational() {
                Some(r) if all_rational => rationals.push(r.clone()),
                _ => all_rational = false,
            }
            kept.push(cell);
            kept_indices.push(i);
            measures.push(v);
        }
        let total: f64 = measures.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "partition cells cover measure {total}, not 1"
            )));
        }
        let index = build_index(&system, &kept);
        Ok((
            Partition {
                system,
                cells: kept,
                measures,
                rationals: all_rational.then_some(rationals),
                provenance: Provenance::Exact,
                combinatorial_cells: combinatorial,
                pool: None,
                index,
            },
            kept_indices,
        ))
    }

    /// Partition from explicit cells with measures counted on a shared
    /// sample pool.
    pub fn monte_carlo(
        system: Arc<System>,
        cells: Vec<Cell>,
        pool: Arc<SamplePool>,
    ) -> Result<Partition> {
        let combinatorial = cells.len();
        let index = build_index(&system, &cells);
        let mut counts = vec![0u64; cells.len()];
        let mut labeled = 0u64;
        for p in &pool.points {
            if let Some(i) = label_with(&system, &cells, &index, p)? {
                counts[i] += 1;
                labeled += 1;
            }
        }
        let n = pool.points.len() as u64;
        if labeled != n {
            return Err(Error::InvalidParameter(format!(
                "cells cover only {labeled} of {n} sample points"
            )));
        }
        let measures: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        Ok(Partition {
            system,
            cells,
            measures,
            rationals: None,
            provenance: Provenance::MonteCarlo { n, seed: pool.seed },
            combinatorial_cells: combinatorial,
            pool: Some(pool),
            index,
        })
    }

    /// The level-`m` dyadic partition of the unit interval.
    pub fn dyadic(system: Arc<System>, level: u8) -> Result<Partition> {
        if !matches!(system.kind(), SystemKind::Doubling) {
            return Err(Error::UnsupportedCellFamily {
                system: system.name(),
                family: "dyadic intervals".into(),
            });
        }
        let cells = (0..(1u64 << level)).map(|i| Cell::dyadic_interval(level, i)).collect();
        Partition::exact(system, cells)
    }

    /// The `2^xl x 2^yl` dyadic grid on the unit square.
    pub fn grid(system: Arc<System>, xl: u8, yl: u8) -> Result<Partition> {
        if !matches!(system.kind(), SystemKind::Baker) {
            return Err(Error::UnsupportedCellFamily {
                system: system.name(),
                family: "dyadic rectangles".into(),
            });
        }
        let mut cells = Vec::new();
        for xi in 0..(1u64 << xl) {
            for yi in 0..(1u64 << yl) {
                cells.push(Cell::dyadic_rect(xl, xi, yl, yi));
            }
        }
        Partition::exact(system, cells)
    }

    /// All length-`m` cylinders on coordinates `0..m`.
    pub fn cylinders(system: Arc<System>, m: u32) -> Result<Partition> {
        let k = system.alphabet_len().ok_or_else(|| Error::UnsupportedCellFamily {
            system: system.name(),
            family: "cylinders".into(),
        })?;
        let mut cells = Vec::new();
        let mut word = vec![0u8; m as usize];
        loop {
            cells.push(Cell::cylinder(0, &word));
            // Odometer over the alphabet.
            let mut pos = 0;
            loop {
                if pos == word.len() {
                    return Partition::exact(system, cells);
                }
                word[pos] += 1;
                if (word[pos] as usize) < k {
                    break;
                }
                word[pos] = 0;
                pos += 1;
            }
        }
    }

    /// `k` equal arcs on the circle.
    pub fn arcs(system: Arc<System>, k: u32) -> Result<Partition> {
        if !matches!(system.kind(), SystemKind::Rotation { .. }) {
            return Err(Error::UnsupportedCellFamily {
                system: system.name(),
                family: "arcs".into(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidParameter("arc count must be >= 1".into()));
        }
        let cells = (0..k)
            .map(|i| {
                Cell::Arcs(vec![ArcIv {
                    lo: AngleCoord::rational(i as i64, k as i64),
                    hi: AngleCoord::rational(i as i64 + 1, k as i64),
                }])
            })
            .collect();
        Partition::exact(system, cells)
    }

    pub fn system(&self) -> &Arc<System> {
        &self.system
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Cardinality at construction, including zero-measure cells.
    pub fn combinatorial_count(&self) -> usize {
        self.combinatorial_cells
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measures[i]
    }

    pub fn rational_measures(&self) -> Option<&[BigRational]> {
        self.rationals.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_exact(&self) -> bool {
        self.provenance == Provenance::Exact
    }

    pub fn pool(&self) -> Option<&Arc<SamplePool>> {
        self.pool.as_ref()
    }

    /// Cell index of the point.
    pub fn label(&self, p: &Point) -> Result<usize> {
        label_with(&self.system, &self.cells, &self.index, p)?.ok_or_else(|| {
            Error::InvalidParameter("point not covered by partition".into())
        })
    }

    /// Common refinement `self v other`, dropping empty intersections.
    pub fn refine(&self, other: &Partition, budget: usize) -> Result<Partition> {
        Ok(self.refine_with_parents(other, budget)?.0)
    }

    /// Common refinement along with, per refined cell, the indices of its
    /// parents in `self` and `other`.
    pub fn refine_with_parents(
        &self,
        other: &Partition,
        budget: usize,
    ) -> Result<(Partition, Vec<(usize, usize)>)> {
        self.check_same_system(other)?;
        let pairs = match (&self.index, &other.index) {
            (LabelIndex::Intervals(_), LabelIndex::Intervals(_)) => {
                interval_join(&self.cells, &other.cells)
            }
            _ => {
                let product = self.cells.len().checked_mul(other.cells.len());
                match product {
                    Some(p) if p <= 200_000_000 => {}
                    _ => {
                        return Err(Error::BudgetExceeded {
                            needed: product.unwrap_or(usize::MAX),
                            budget,
                        })
                    }
                }
                let unit = self.system.angle_unit().unwrap_or(0.0);
                let mut pairs = Vec::new();
                for (i, a) in self.cells.iter().enumerate() {
                    for (j, b) in other.cells.iter().enumerate() {
                        if let Some(c) = a.intersect(b, unit) {
                            pairs.push((i, j, c));
                        }
                    }
                }
                pairs
            }
        };
        if pairs.len() > budget {
            return Err(Error::BudgetExceeded { needed: pairs.len(), budget });
        }
        let mut cells = Vec::with_capacity(pairs.len());
        let mut parents = Vec::with_capacity(pairs.len());
        for (i, j, c) in pairs {
            cells.push(c);
            parents.push((i, j));
        }
        match (&self.provenance, &other.provenance) {
            (Provenance::Exact, Provenance::Exact) => {
                let (mut part, kept) = Partition::exact_inner(self.system.clone(), cells)?;
                part.combinatorial_cells = part.cells.len();
                let parents = kept.into_iter().map(|i| parents[i]).collect();
                Ok((part, parents))
            }
            _ => {
                let pool = self
                    .pool
                    .as_ref()
                    .or(other.pool.as_ref())
                    .cloned()
                    .ok_or_else(|| {
                        Error::InvalidParameter("monte-carlo partition lost its pool".into())
                    })?;
                let part = Partition::monte_carlo(self.system.clone(), cells, pool)?;
                Ok((part, parents))
            }
        }
    }

    /// The partition `phi^{-1}(alpha)`.
    pub fn preimage(&self) -> Result<Partition> {
        let cells: Result<Vec<Cell>> =
            self.cells.iter().map(|c| self.system.cell_preimage(c)).collect();
        let cells = cells?;
        match &self.provenance {
            Provenance::Exact => {
                let mut part = Partition::exact(self.system.clone(), cells)?;
                part.combinatorial_cells = self.combinatorial_cells;
                Ok(part)
            }
            Provenance::MonteCarlo { .. } => {
                let pool = self
                    .pool
                    .clone()
                    .ok_or_else(|| Error::InvalidParameter("monte-carlo partition lost its pool".into()))?;
                Partition::monte_carlo(self.system.clone(), cells, pool)
            }
        }
    }

    /// Dynamical refinement `alpha v phi^{-1} alpha v ... v phi^{-(n-1)} alpha`.
    pub fn dynamical_refinement(&self, n: usize, budget: usize) -> Result<Partition> {
        if n == 0 {
            return Err(Error::InvalidParameter("refinement depth must be >= 1".into()));
        }
        let mut acc = self.clone();
        let mut pre = self.clone();
        for _ in 1..n {
            pre = pre.preimage()?;
            acc = acc.refine(&pre, budget)?;
        }
        Ok(acc)
    }

    /// For each cell of `finer`, the index of the cell of `self` that
    /// contains it. Errors if `finer` does not refine `self`.
    pub fn parent_of(&self, finer: &Partition) -> Result<Vec<usize>> {
        self.check_same_system(finer)?;
        let unit = self.system.angle_unit().unwrap_or(0.0);
        let mut out = Vec::with_capacity(finer.cells.len());
        for (fi, fine) in finer.cells.iter().enumerate() {
            let mut found = None;
            for (ci, coarse) in self.cells.iter().enumerate() {
                if let Some(common) = fine.intersect(coarse, unit) {
                    let full = self.system.exact_cell_measure(fine)?.to_f64();
                    let part = self.system.exact_cell_measure(&common)?.to_f64();
                    if (full - part).abs() <= 1e-15 * full.max(1e-300) {
                        found = Some(ci);
                        break;
                    }
                }
            }
            out.push(found.ok_or_else(|| {
                Error::InvalidParameter(format!("cell {fi} is not contained in a single coarse cell"))
            })?);
        }
        Ok(out)
    }

    fn check_same_system(&self, other: &Partition) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || self.system.kind() == other.system.kind() {
            Ok(())
        } else {
            Err(Error::SystemMismatch {
                left: self.system.name(),
                right: other.system.name(),
            })
        }
    }
}

fn build_index(system: &System, cells: &[Cell]) -> LabelIndex {
    match cells.first() {
        Some(Cell::Intervals(_)) => {
            let mut groups: HashMap<u8, HashMap<u64, usize>> = HashMap::new();
            for (ci, cell) in cells.iter().enumerate() {
                if let Cell::Intervals(ivs) = cell {
                    for iv in ivs {
                        groups.entry(iv.level).or_default().insert(iv.index, ci);
                    }
                }
            }
            let mut v: Vec<_> = groups.into_iter().collect();
            v.sort_by_key(|(l, _)| *l);
            LabelIndex::Intervals(v)
        }
        Some(Cell::Rects(_)) => {
            let mut groups: HashMap<(u8, u8), HashMap<(u64, u64), usize>> = HashMap::new();
            for (ci, cell) in cells.iter().enumerate() {
                if let Cell::Rects(rs) = cell {
                    for r in rs {
                        groups
                            .entry((r.x.level, r.y.level))
                            .or_default()
                            .insert((r.x.index, r.y.index), ci);
                    }
                }
            }
            LabelIndex::Rects(groups.into_iter().collect())
        }
        Some(Cell::Cylinder(_)) => {
            let mut groups: HashMap<Vec<i64>, HashMap<Vec<u8>, usize>> = HashMap::new();
            for (ci, cell) in cells.iter().enumerate() {
                if let Cell::Cylinder(c) = cell {
                    let coords: Vec<i64> = c.constraints.keys().copied().collect();
                    let word: Vec<u8> = c.constraints.values().copied().collect();
                    groups.entry(coords).or_default().insert(word, ci);
                }
            }
            LabelIndex::Cylinders(groups.into_iter().collect())
        }
        Some(Cell::Arcs(_)) => {
            let unit = system.angle_unit().unwrap_or(0.0);
            let mut pieces = Vec::new();
            for (ci, cell) in cells.iter().enumerate() {
                if let Cell::Arcs(arcs) = cell {
                    for a in arcs {
                        pieces.push((a.lo_value(unit), a.hi_value(unit), ci));
                    }
                }
            }
            pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            LabelIndex::Arcs(pieces)
        }
        _ => LabelIndex::Scan,
    }
}

fn label_with(
    system: &System,
    cells: &[Cell],
    index: &LabelIndex,
    p: &Point,
) -> Result<Option<usize>> {
    match (index, p) {
        (LabelIndex::Intervals(groups), Point::Interval(x)) => {
            for (level, map) in groups {
                if let Some(&ci) = map.get(&x.dyadic_index(*level)) {
                    return Ok(Some(ci));
                }
            }
            Ok(None)
        }
        (LabelIndex::Rects(groups), Point::Square(x, y)) => {
            for ((xl, yl), map) in groups {
                if let Some(&ci) = map.get(&(x.dyadic_index(*xl), y.dyadic_index(*yl))) {
                    return Ok(Some(ci));
                }
            }
            Ok(None)
        }
        (LabelIndex::Cylinders(groups), Point::Symbols(s)) => {
            for (coords, map) in groups {
                let mut word = Vec::with_capacity(coords.len());
                for &i in coords {
                    word.push(s.symbol(i)?);
                }
                if let Some(&ci) = map.get(&word) {
                    return Ok(Some(ci));
                }
            }
            Ok(None)
        }
        (LabelIndex::Arcs(pieces), Point::Torus1(a)) => {
            let unit = system.angle_unit().unwrap_or(0.0);
            let v = a.value(unit);
            let pos = pieces.partition_point(|(lo, _, _)| *lo <= v);
            if pos == 0 {
                return Ok(None);
            }
            let (lo, hi, ci) = pieces[pos - 1];
            Ok((lo <= v && v < hi).then_some(ci))
        }
        (LabelIndex::Scan, _) => {
            for (ci, cell) in cells.iter().enumerate() {
                if system.cell_contains(cell, p)? {
                    return Ok(Some(ci));
                }
            }
            Ok(None)
        }
        _ => Err(Error::PointMismatch(system.name())),
    }
}

/// Sweep-join for interval partitions: linear in the total piece count.
fn interval_join(a_cells: &[Cell], b_cells: &[Cell]) -> Vec<(usize, usize, Cell)> {
    fn flatten(cells: &[Cell]) -> Vec<(u64, DyadicIv, usize)> {
        let mut v = Vec::new();
        for (ci, cell) in cells.iter().enumerate() {
            if let Cell::Intervals(ivs) = cell {
                for iv in ivs {
                    v.push((iv.start(), *iv, ci));
                }
            }
        }
        v.sort_by_key(|(s, _, _)| *s);
        v
    }
    let a = flatten(a_cells);
    let b = flatten(b_cells);
    let end = |iv: &DyadicIv| -> u128 { iv.start() as u128 + (1u128 << (64 - iv.level as u32)) };
    let mut out: HashMap<(usize, usize), Vec<DyadicIv>> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let (ai, bi) = (&a[i], &b[j]);
        if let Some(common) = ai.1.intersect(bi.1) {
            let key = (ai.2, bi.2);
            let entry = out.entry(key).or_insert_with(|| {
                order.push(key);
                Vec::new()
            });
            entry.push(common);
        }
        // Advance the piece that ends first.
        if end(&ai.1) <= end(&bi.1) {
            i += 1;
        } else {
            j += 1;
        }
    }
    order
        .into_iter()
        .map(|key| {
            let mut ivs = out.remove(&key).unwrap();
            ivs.sort_by_key(|iv| iv.start());
            (key.0, key.1, Cell::Intervals(ivs))
        })
        .collect()
}

/// Drop zero-measure cylinders correctly by delegating to the system
/// measure; helper for tests needing a hand-rolled two-cell partition.
pub fn two_cell_interval_partition(system: Arc<System>, cell: Cell) -> Result<Partition> {
    let complement = interval_complement(&cell)?;
    Partition::exact(system, vec![cell, complement])
}

fn interval_complement(cell: &Cell) -> Result<Cell> {
    let Cell::Intervals(ivs) = cell else {
        return Err(Error::InvalidParameter("complement needs an interval cell".into()));
    };
    let max_level = ivs.iter().map(|iv| iv.level).max().unwrap_or(0);
    if max_level > 24 {
        return Err(Error::InvalidParameter("complement only supported up to level 24".into()));
    }
    let mut covered = vec![false; 1usize << max_level];
    for iv in ivs {
        let scale = 1u64 << (max_level - iv.level);
        for k in 0..scale {
            covered[(iv.index * scale + k) as usize] = true;
        }
    }
    let free: Vec<DyadicIv> = covered
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(k, _)| DyadicIv::new(max_level, k as u64))
        .collect();
    Ok(Cell::Intervals(free))
}
