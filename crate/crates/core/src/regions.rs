//! Region algebra: the merging iteration behind the block-scale analysis.
//!
//! A *region* is a set of occupied sites that is connected after weak
//! enhancement — close the set under the bootstrap rule, let every
//! occupied-but-not-initially-occupied site draw axis segments to the
//! finally occupied sites of its neighborhood, and ask that the result is a
//! single nearest-neighbor component. The covering block of a region is
//! therefore weakly crossed.
//!
//! [`decompose_regions`] replays a configuration as a deterministic merging
//! iteration: start from the singletons of the initial configuration, then
//! repeatedly either (i) merge two regions whose union is again a region,
//! or, when no pair qualifies, (ii) pick an empty site whose neighborhood
//! already holds enough occupied sites, shrink the regions contributing
//! those neighbors to a minimal *influencing set* (removing any one member
//! leaves the site unspannable), and merge the set together with the site.
//! All tie-breaks are lexicographic, so traces are reproducible. Influence
//! sites are taken from the first generation of the closure of the current
//! configuration; that choice keeps every invariant structural: influencing
//! sets have between 1 and a+b+c members, members sit within Chebyshev
//! distance 2c+1 of one another, and the maximal diameter D grows by at
//! most D → κ(D + 2c+1) per step with κ = a+b+c, λ = (2c+1)κ.
//!
//! On an internally spanned cube the iteration ends in a single region of
//! full diameter, so for every k in [1, (l−λ)/κ] some step first reaches
//! diameter ≥ k, and the region created there has diameter at most κk+λ:
//! that is the weakly crossed block [`find_weakly_crossed_block`] returns.
//!
//! Everything here is a desk-scale correctness witness, not a production
//! path: inputs are capped at 12³ sites and the searches are brute force.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::dynamics::{closure, has_crossing, weak_enhance_with_baseline};
use crate::error::{Error, Result};
use crate::lattice::{chebyshev, Block, Coord, Dims, Lattice, NeighborhoodSpec};

/// Largest lattice volume accepted by the region machinery (12³).
pub const REGION_CAP: usize = 1728;

/// Constants of the region-merging iteration for a 3D model:
/// κ = a+b+c and λ = (2c+1)(a+b+c) with c the largest radius.
pub fn kappa_lambda(spec: &NeighborhoodSpec) -> Result<(u32, u32)> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "region constants need a 3D spec, got {spec}"
        )));
    }
    let kappa = spec.k();
    let lambda = (2 * spec.radius(2) + 1) * kappa;
    Ok((kappa, lambda))
}

/// A set of occupied sites connected after weak enhancement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    sites: Vec<Coord>,
    bbox: Block,
}

impl Region {
    fn new(mut sites: Vec<Coord>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        let mut bbox = Block::of_site(sites[0]);
        for &s in &sites[1..] {
            bbox.include(s);
        }
        Region { sites, bbox }
    }

    /// Sites, lexicographically sorted.
    pub fn sites(&self) -> &[Coord] {
        &self.sites
    }

    pub fn bbox(&self) -> &Block {
        &self.bbox
    }

    /// Longest side of the covering block.
    pub fn diameter(&self) -> usize {
        self.bbox.longest_side()
    }

    /// Lexicographically smallest site; unique among coexisting regions.
    pub fn key(&self) -> Coord {
        self.sites[0]
    }
}

/// What happened at one step of the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// Two regions whose union is a region were merged; `direct` records
    /// whether the union was already nearest-neighbor connected without
    /// weak enhancement.
    Merge { direct: bool },
    /// An influencing set was merged with the site it spans.
    Influence { site: Coord, set_size: usize, direct: bool },
}

/// The sequence of region sets C₁, C₂, … produced by the iteration.
#[derive(Clone, Debug)]
pub struct RegionTrace {
    pub kappa: u32,
    pub lambda: u32,
    steps: Vec<Vec<Arc<Region>>>,
    events: Vec<StepKind>,
}

impl RegionTrace {
    /// Number of snapshots (≥ 1; the first is the singleton set).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Regions of snapshot `i` (0-based), sorted by key.
    pub fn step(&self, i: usize) -> &[Arc<Region>] {
        &self.steps[i]
    }

    pub fn events(&self) -> &[StepKind] {
        &self.events
    }

    pub fn final_regions(&self) -> &[Arc<Region>] {
        self.steps.last().expect("trace has at least one snapshot")
    }

    /// Largest region diameter in snapshot `i`; 0 when the snapshot is empty.
    pub fn max_diameter(&self, i: usize) -> usize {
        self.steps[i].iter().map(|r| r.diameter()).max().unwrap_or(0)
    }

    /// Check the trace-wide invariants: covering blocks are minimal, the
    /// maximal diameter never decreases, and each step grows it by at most
    /// D → κ·D + λ.
    pub fn verify(&self) -> Result<()> {
        for (i, snap) in self.steps.iter().enumerate() {
            for r in snap {
                let rebuilt = Region::new(r.sites.clone());
                if rebuilt.bbox != r.bbox {
                    return Err(Error::BadParameter(format!(
                        "step {i}: covering block is not minimal for region at {:?}",
                        r.key()
                    )));
                }
            }
        }
        for i in 1..self.steps.len() {
            let (prev, cur) = (self.max_diameter(i - 1), self.max_diameter(i));
            if cur < prev {
                return Err(Error::BadParameter(format!(
                    "step {i}: max diameter dropped from {prev} to {cur}"
                )));
            }
            let bound = self.kappa as usize * prev + self.lambda as usize;
            if cur > bound {
                return Err(Error::BadParameter(format!(
                    "step {i}: max diameter jumped from {prev} to {cur} > {bound}"
                )));
            }
        }
        Ok(())
    }

    /// Line-oriented dump: one line per snapshot.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.steps.len() {
            writeln!(
                out,
                "step {}: regions={} max_diameter={}",
                i + 1,
                self.steps[i].len(),
                self.max_diameter(i)
            )
            .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Chebyshev dilation: spread occupied sites to everything within `radius`,
/// as three separable per-axis sweeps.
fn dilate(lat: &Lattice, radius: usize) -> Lattice {
    let dims = *lat.dims();
    let vol = dims.volume();
    let mut cur: Vec<bool> = (0..vol).map(|i| lat.get_index(i)).collect();
    for d in 0..dims.rank() {
        let ext = dims.extent(d);
        let mut next = vec![false; vol];
        for start in dims.iter().filter(|c| c[d] == 0) {
            let mut c = start;
            let mut last: Option<usize> = None;
            for v in 0..ext {
                c[d] = v;
                let i = dims.index(c);
                if cur[i] {
                    last = Some(v);
                }
                if matches!(last, Some(l) if v - l <= radius) {
                    next[i] = true;
                }
            }
            let mut last: Option<usize> = None;
            for v in (0..ext).rev() {
                c[d] = v;
                let i = dims.index(c);
                if cur[i] {
                    last = Some(v);
                }
                if matches!(last, Some(l) if l - v <= radius) {
                    next[i] = true;
                }
            }
        }
        cur = next;
    }
    let mut out = Lattice::empty(dims);
    for (i, &b) in cur.iter().enumerate() {
        if b {
            out.set_index(i, true);
        }
    }
    out
}

/// True iff the occupied sites form one nearest-neighbor component
/// (vacuously true when empty).
fn nn_connected(lat: &Lattice) -> bool {
    let dims = *lat.dims();
    let total = lat.occupied_count();
    if total <= 1 {
        return true;
    }
    let start = (0..dims.volume()).find(|&i| lat.get_index(i)).expect("nonempty");
    let mut seen = vec![false; dims.volume()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut reached = 0usize;
    while let Some(i) = stack.pop() {
        reached += 1;
        let c = dims.coord(i);
        for d in 0..dims.rank() {
            for n in [c[d].wrapping_sub(1), c[d] + 1] {
                if n >= dims.extent(d) {
                    continue;
                }
                let mut cc = c;
                cc[d] = n;
                let j = dims.index(cc);
                if lat.get_index(j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    reached == total
}

/// Driver state for one decomposition.
struct Decomposer<'a> {
    init: &'a Lattice,
    spec: &'a NeighborhoodSpec,
    dims: Dims,
    k: u32,
    /// Interaction reach 2c+1: unions of regions farther apart than this can
    /// never be connected, even weakly.
    margin: usize,
    arena: Vec<Arc<Region>>,
    alive: std::collections::BTreeMap<Coord, usize>,
    is_alive: Vec<bool>,
    /// Whether each region's raw site set is NN-connected on its own.
    conn: Vec<bool>,
    /// Each region's weakly enhanced site set, and its Chebyshev-2c
    /// dilation. Two regions whose union is a region must have enhanced
    /// sets within 2c of each other: closure interaction puts witnesses of
    /// both inside one site's axis cross, and plain touching is distance 1.
    enh: Vec<Lattice>,
    enh_dilated: Vec<Lattice>,
    /// Site index → arena id of the region owning it.
    owner: Vec<Option<usize>>,
    /// Union of all alive regions' sites.
    t: Lattice,
    /// Occupied-neighbor counts in `t`.
    counts: Vec<u32>,
    /// Known-mergeable pairs, keyed for lexicographic popping.
    mergeable: BTreeSet<(Coord, Coord, usize, usize)>,
    steps: Vec<Vec<Arc<Region>>>,
    events: Vec<StepKind>,
}

impl<'a> Decomposer<'a> {
    fn new(init: &'a Lattice, spec: &'a NeighborhoodSpec) -> Self {
        let dims = *init.dims();
        let volume = dims.volume();
        let mut counts = vec![0u32; volume];
        for c in init.iter_occupied() {
            spec.for_each_neighbor(c, &dims, |n| counts[dims.index(n)] += 1);
        }
        Decomposer {
            init,
            spec,
            dims,
            k: spec.k(),
            margin: 2 * spec.radius(2) as usize + 1,
            arena: Vec::new(),
            alive: Default::default(),
            is_alive: Vec::new(),
            conn: Vec::new(),
            enh: Vec::new(),
            enh_dilated: Vec::new(),
            owner: vec![None; volume],
            t: init.clone(),
            counts,
            mergeable: BTreeSet::new(),
            steps: Vec::new(),
            events: Vec::new(),
        }
    }

    fn lattice_of(&self, sites: impl IntoIterator<Item = Coord>) -> Lattice {
        let mut lat = Lattice::empty(self.dims);
        for c in sites {
            lat.set(c, true);
        }
        lat
    }

    /// Initially-occupied subset of `config`, the reference against which
    /// "newly occupied" is judged during weak enhancement.
    fn baseline_of(&self, config: &Lattice) -> Lattice {
        let mut base = config.clone();
        base.intersect_with(self.init);
        base
    }

    /// Weakly enhance a configuration against its initially occupied subset.
    fn enhanced_of(&self, config: &Lattice) -> Lattice {
        let baseline = self.baseline_of(config);
        weak_enhance_with_baseline(config, &baseline, self.spec)
            .expect("config and baseline share dims")
    }

    /// Does some site of one region have a nearest neighbor owned by the
    /// other?
    fn touching(&self, a: usize, b: usize) -> bool {
        let (small, big) = if self.arena[a].sites.len() <= self.arena[b].sites.len() {
            (a, b)
        } else {
            (b, a)
        };
        for &s in self.arena[small].sites.iter() {
            for d in 0..3 {
                for n in [s[d].wrapping_sub(1), s[d] + 1] {
                    if n >= self.dims.extent(d) {
                        continue;
                    }
                    let mut cc = s;
                    cc[d] = n;
                    if self.owner[self.dims.index(cc)] == Some(big) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Is the union of two live regions again a region? Cheap certificates
    /// first, the full enhance-and-connect decision only when neither side
    /// settles it.
    fn mergeable_pair(&self, a: usize, b: usize) -> bool {
        let (ra, rb) = (&self.arena[a], &self.arena[b]);
        if !ra.bbox.intersects_inflated(&rb.bbox, self.margin) {
            return false;
        }
        // singleton pairs: no closure growth, no segments; the union is a
        // region exactly when the two sites are adjacent
        if ra.sites.len() == 1 && rb.sites.len() == 1 {
            let (u, v) = (ra.sites[0], rb.sites[0]);
            return (0..3).map(|d| u[d].abs_diff(v[d])).sum::<usize>() == 1;
        }
        if self.conn[a] && self.conn[b] && self.touching(a, b) {
            return true;
        }
        if !self.enh_dilated[a].intersects(&self.enh[b]) {
            return false;
        }
        let config = self.lattice_of(ra.sites.iter().chain(&rb.sites).copied());
        nn_connected(&config) || nn_connected(&self.enhanced_of(&config))
    }

    fn add_region(&mut self, region: Region, conn: bool, enh: Lattice) -> usize {
        let id = self.arena.len();
        let rc = Arc::new(region);
        for &s in rc.sites.iter() {
            self.owner[self.dims.index(s)] = Some(id);
        }
        self.arena.push(rc.clone());
        self.is_alive.push(true);
        self.conn.push(conn);
        self.enh_dilated.push(dilate(&enh, self.margin - 1));
        self.enh.push(enh);
        // probe the newcomer against every live region once; regions are
        // immutable, so a pair's verdict never changes
        for (&key, &other) in self.alive.iter() {
            if self.mergeable_pair(id, other) {
                let (ka, ia, kb, ib) = if key < rc.key() {
                    (key, other, rc.key(), id)
                } else {
                    (rc.key(), id, key, other)
                };
                self.mergeable.insert((ka, kb, ia, ib));
            }
        }
        self.alive.insert(rc.key(), id);
        id
    }

    fn remove_region(&mut self, id: usize) {
        self.is_alive[id] = false;
        self.alive.remove(&self.arena[id].key());
    }

    fn snapshot(&mut self) {
        self.steps.push(self.alive.values().map(|&id| self.arena[id].clone()).collect());
    }

    /// Lexicographically first live mergeable pair, if any.
    fn pop_mergeable(&mut self) -> Option<(usize, usize)> {
        while let Some(&entry) = self.mergeable.iter().next() {
            self.mergeable.remove(&entry);
            let (_, _, ia, ib) = entry;
            if self.is_alive[ia] && self.is_alive[ib] {
                return Some((ia, ib));
            }
        }
        None
    }

    /// Does `site` lie in the closure of the listed regions' sites?
    fn spanned_by(&self, site: Coord, members: &[usize]) -> bool {
        let config =
            self.lattice_of(members.iter().flat_map(|&id| self.arena[id].sites.iter().copied()));
        let fin = closure(&config, self.spec).expect("dims already validated").final_state;
        fin.get(site)
    }

    /// Pick the next influence site and its minimal influencing set:
    /// the lexicographically smallest empty site whose neighborhood holds at
    /// least k occupied sites, with its contributing regions greedily pruned
    /// until every member is essential. Returns (site, member ids, witness
    /// sites).
    fn find_influence(&self) -> Option<(Coord, Vec<usize>, Vec<Coord>)> {
        let site = self
            .dims
            .iter()
            .filter(|&c| !self.t.get(c) && self.counts[self.dims.index(c)] >= self.k)
            .min()?;

        // contributing regions keyed lexicographically, with one witness
        // neighbor each
        let mut members: Vec<(Coord, usize, Coord)> = Vec::new();
        self.spec.for_each_neighbor(site, &self.dims, |n| {
            if self.t.get(n) {
                let id = self.owner[self.dims.index(n)].expect("occupied sites are owned");
                if !members.iter().any(|&(_, m, _)| m == id) {
                    members.push((self.arena[id].key(), id, n));
                }
            }
        });
        members.sort_unstable();

        // greedy lexicographic pruning: drop a member whenever the rest
        // still spans the site (pruning against the shrinking set keeps
        // every survivor essential)
        let mut idx = 0;
        while idx < members.len() {
            if members.len() > 1 {
                let rest: Vec<usize> = members
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != idx)
                    .map(|(_, &(_, id, _))| id)
                    .collect();
                if self.spanned_by(site, &rest) {
                    members.remove(idx);
                    continue;
                }
            }
            idx += 1;
        }

        let ids: Vec<usize> = members.iter().map(|&(_, id, _)| id).collect();
        let witnesses: Vec<Coord> = members.iter().map(|&(_, _, w)| w).collect();
        Some((site, ids, witnesses))
    }

    fn occupy(&mut self, site: Coord) {
        debug_assert!(!self.t.get(site));
        self.t.set(site, true);
        self.spec
            .for_each_neighbor(site, &self.dims, |n| self.counts[self.dims.index(n)] += 1);
    }

    fn run(mut self) -> RegionTrace {
        let singles: Vec<Coord> = self.init.iter_occupied().collect();
        for s in singles {
            // a lone site closes to itself and draws no segments
            let enh = self.lattice_of([s]);
            self.add_region(Region::new(vec![s]), true, enh);
        }
        self.snapshot();

        loop {
            if let Some((ia, ib)) = self.pop_mergeable() {
                let union: Vec<Coord> = self.arena[ia]
                    .sites
                    .iter()
                    .chain(self.arena[ib].sites.iter())
                    .copied()
                    .collect();
                let config = self.lattice_of(union.iter().copied());
                let direct = nn_connected(&config);
                let enh = self.enhanced_of(&config);
                assert!(
                    direct || nn_connected(&enh),
                    "mergeable pair at {:?}/{:?} lost connectivity",
                    self.arena[ia].key(),
                    self.arena[ib].key()
                );
                self.remove_region(ia);
                self.remove_region(ib);
                self.add_region(Region::new(union), direct, enh);
                self.events.push(StepKind::Merge { direct });
                self.snapshot();
                continue;
            }

            let Some((site, ids, witnesses)) = self.find_influence() else {
                break;
            };
            let k = self.k as usize;
            assert!(
                (1..=k).contains(&ids.len()),
                "influencing set at {site:?} has {} members, expected 1..={k}",
                ids.len()
            );
            for i in 0..witnesses.len() {
                for j in i + 1..witnesses.len() {
                    assert!(
                        chebyshev(witnesses[i], witnesses[j]) <= self.margin,
                        "influencing regions at {site:?} are farther than {} apart",
                        self.margin
                    );
                }
            }

            let mut union: Vec<Coord> = ids
                .iter()
                .flat_map(|&id| self.arena[id].sites.iter().copied())
                .collect();
            union.push(site);
            let config = self.lattice_of(union.iter().copied());

            self.occupy(site);
            let direct = nn_connected(&config);
            let enh = self.enhanced_of(&config);
            assert!(
                direct || nn_connected(&enh),
                "influence union at {site:?} is not connected even after weak enhancement"
            );
            for &id in &ids {
                self.remove_region(id);
            }
            self.add_region(Region::new(union), direct, enh);
            self.events
                .push(StepKind::Influence { site, set_size: ids.len(), direct });
            self.snapshot();
        }

        let (kappa, lambda) = kappa_lambda(self.spec).expect("spec validated as 3D");
        RegionTrace { kappa, lambda, steps: self.steps, events: self.events }
    }
}

fn check_region_input(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<()> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "region decomposition needs a 3D spec, got {spec}"
        )));
    }
    spec.check_rank(lat.dims())?;
    if lat.volume() > REGION_CAP {
        return Err(Error::OracleCap { volume: lat.volume(), cap: REGION_CAP });
    }
    Ok(())
}

/// Run the merging iteration to exhaustion and return every snapshot.
/// On an internally spanned input the final snapshot is a single region
/// covering the whole box; otherwise the trace just stops early.
pub fn decompose_regions(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<RegionTrace> {
    check_region_input(lat, spec)?;
    Ok(Decomposer::new(lat, spec).run())
}

/// Is the covering block of this region weakly crossed? The region's sites
/// are replayed inside their block, with initially-empty members drawing
/// segments, and the enhanced configuration must cross along every axis.
fn region_block_weakly_crossed(
    region: &Region,
    init: &Lattice,
    spec: &NeighborhoodSpec,
) -> Result<bool> {
    let bbox = region.bbox();
    let sub_dims = Dims::new(&[bbox.side(0), bbox.side(1), bbox.side(2)])?;
    let mut config = Lattice::empty(sub_dims);
    let mut baseline = Lattice::empty(sub_dims);
    for &s in region.sites() {
        let local = [s[0] - bbox.min[0], s[1] - bbox.min[1], s[2] - bbox.min[2]];
        config.set(local, true);
        if init.get(s) {
            baseline.set(local, true);
        }
    }
    let weak = weak_enhance_with_baseline(&config, &baseline, spec)?;
    for axis in 0..3 {
        if !has_crossing(&weak, axis)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Find a weakly crossed block at scale k: the covering block of a region
/// with longest side in [k, κk+λ]. The trace's first snapshot reaching
/// diameter ≥ k necessarily stays ≤ κk+λ, so a spanned input always yields
/// a block for every k in [1, (l−λ)/κ]; an unspanned input may yield none.
pub fn find_weakly_crossed_block(
    lat: &Lattice,
    spec: &NeighborhoodSpec,
    k: usize,
) -> Result<Option<Block>> {
    check_region_input(lat, spec)?;
    let (kappa, lambda) = kappa_lambda(spec)?;
    let (kappa, lambda) = (kappa as usize, lambda as usize);
    let l = (0..3).map(|d| lat.dims().extent(d)).max().expect("rank 3");
    let k_max = l.saturating_sub(lambda) / kappa;
    if k < 1 || k > k_max {
        return Err(Error::BadParameter(format!(
            "k = {k} outside [1, (l-lambda)/kappa] = [1, {k_max}] for side {l}"
        )));
    }

    let trace = decompose_regions(lat, spec)?;
    let hi = kappa * k + lambda;
    for i in 0..trace.len() {
        if trace.max_diameter(i) < k {
            continue;
        }
        for region in trace.step(i) {
            let d = region.diameter();
            if (k..=hi).contains(&d) && region_block_weakly_crossed(region, lat, spec)? {
                return Ok(Some(*region.bbox()));
            }
        }
    }
    Ok(None)
}
