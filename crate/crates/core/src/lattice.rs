//! Finite lattices and anisotropic neighborhoods.
//!
//! A [`Lattice`] is a finite box of sites in one, two, or three dimensions
//! with a bit per site (occupied / empty) and free boundaries: sites outside
//! the box simply do not exist, so boundary sites have clipped neighborhoods.
//! Coordinates are `[x, y, z]` with unused trailing axes pinned to zero, and
//! the linear site index is row-major with x fastest:
//! `index = x + ext_x * (y + ext_y * z)`.
//!
//! A [`NeighborhoodSpec`] holds one radius per axis. Under the `(a, b, c)`
//! convention the neighborhood of a site consists of its `a` nearest sites in
//! each x direction, `b` nearest in y, `c` nearest in z, so an interior site
//! has `2(a+b+c)` neighbors and the update threshold used by the dynamics is
//! `k = a + b + c`. Radii are canonicalized to ascending order on
//! construction — the models are symmetric under axis relabeling — and the
//! applied permutation is kept so callers can still ask which lattice axis an
//! original model axis became ([`NeighborhoodSpec::original_axis`]).
//!
//! Random fills draw one uniform per cell from a counter-based stream keyed
//! by the seed (see [`crate::rng`]), which makes fills reproducible cell by
//! cell: the same seed compared against a larger `p` occupies a superset of
//! cells, the coupling the estimator relies on.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Site coordinate; axes beyond the lattice rank are zero.
pub type Coord = [usize; 3];

/// Chebyshev distance between two sites.
pub fn chebyshev(u: Coord, v: Coord) -> usize {
    (0..3).map(|d| u[d].abs_diff(v[d])).max().unwrap()
}

// ─────────────────────────────────────────────────────────────────────────
// Extents

/// Box extents: number of sites along each axis (1 ≤ rank ≤ 3).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    ext: [usize; 3],
    rank: usize,
}

impl Dims {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(Error::InvalidDims(format!(
                "need 1 to 3 axes, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidDims("zero-length axis".into()));
        }
        let volume = extents
            .iter()
            .try_fold(1usize, |acc, &e| acc.checked_mul(e))
            .filter(|&v| v <= 1 << 40)
            .ok_or_else(|| Error::InvalidDims("volume overflows".into()))?;
        let _ = volume;
        let mut ext = [1usize; 3];
        ext[..extents.len()].copy_from_slice(extents);
        Ok(Dims { ext, rank: extents.len() })
    }

    pub fn cube(rank: usize, side: usize) -> Result<Self> {
        Dims::new(&vec![side; rank])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Extent along `axis`; 1 for axes beyond the rank.
    pub fn extent(&self, axis: usize) -> usize {
        self.ext[axis]
    }

    pub fn extents(&self) -> &[usize] {
        &self.ext[..self.rank]
    }

    pub fn volume(&self) -> usize {
        self.ext.iter().product()
    }

    pub fn contains(&self, c: Coord) -> bool {
        (0..3).all(|d| c[d] < self.ext[d])
    }

    #[inline(always)]
    pub fn index(&self, c: Coord) -> usize {
        debug_assert!(self.contains(c));
        c[0] + self.ext[0] * (c[1] + self.ext[1] * c[2])
    }

    #[inline(always)]
    pub fn coord(&self, index: usize) -> Coord {
        debug_assert!(index < self.volume());
        let x = index % self.ext[0];
        let rest = index / self.ext[0];
        [x, rest % self.ext[1], rest / self.ext[1]]
    }

    /// All sites in linear-index order.
    pub fn iter(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.volume()).map(move |i| self.coord(i))
    }
}

impl fmt::Debug for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dims{:?}", self.extents())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.extents().iter().map(|e| e.to_string()).collect();
        write!(f, "{}", s.join("x"))
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Axis-aligned blocks

/// Inclusive axis-aligned box of sites, used for bounding boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub min: Coord,
    pub max: Coord,
}

impl Block {
    pub fn of_site(c: Coord) -> Self {
        Block { min: c, max: c }
    }

    pub fn include(&mut self, c: Coord) {
        for d in 0..3 {
            self.min[d] = self.min[d].min(c[d]);
            self.max[d] = self.max[d].max(c[d]);
        }
    }

    /// Number of sites along `axis`.
    pub fn side(&self, axis: usize) -> usize {
        self.max[axis] - self.min[axis] + 1
    }

    pub fn longest_side(&self) -> usize {
        (0..3).map(|d| self.side(d)).max().unwrap()
    }

    pub fn contains(&self, c: Coord) -> bool {
        (0..3).all(|d| self.min[d] <= c[d] && c[d] <= self.max[d])
    }

    /// Whether the blocks intersect after growing each by `margin` in every
    /// direction (saturating at zero).
    pub fn intersects_inflated(&self, other: &Block, margin: usize) -> bool {
        (0..3).all(|d| {
            self.min[d].saturating_sub(margin) <= other.max[d] + margin
                && other.min[d].saturating_sub(margin) <= self.max[d] + margin
        })
    }

    pub fn union(&self, other: &Block) -> Block {
        let mut b = *self;
        b.include(other.min);
        b.include(other.max);
        b
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Neighborhood specification

/// Per-axis radii of an anisotropic neighborhood, canonicalized ascending.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct NeighborhoodSpec {
    radii: [u32; 3],
    rank: usize,
    /// `perm[i]` = caller's axis label that became canonical axis `i`.
    perm: [usize; 3],
}

impl NeighborhoodSpec {
    /// Build from radii in the caller's axis order. Radii are sorted
    /// ascending (stable, so ties keep the caller's order) and the applied
    /// permutation is remembered.
    pub fn new(radii: &[u32]) -> Result<Self> {
        if radii.is_empty() || radii.len() > 3 {
            return Err(Error::InvalidSpec(format!(
                "need 1 to 3 radii, got {}",
                radii.len()
            )));
        }
        if radii.iter().any(|&r| r == 0) {
            return Err(Error::InvalidSpec("radius must be ≥ 1".into()));
        }
        if radii.iter().any(|&r| r > 4096) {
            return Err(Error::InvalidSpec("radius above 4096".into()));
        }
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by_key(|&i| radii[i]);
        let mut sorted = [0u32; 3];
        let mut perm = [0usize; 3];
        for (canon, &orig) in order.iter().enumerate() {
            sorted[canon] = radii[orig];
            perm[canon] = orig;
        }
        Ok(NeighborhoodSpec { radii: sorted, rank: radii.len(), perm })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Radius along canonical `axis`.
    pub fn radius(&self, axis: usize) -> u32 {
        self.radii[axis]
    }

    /// Canonical radii, ascending.
    pub fn radii(&self) -> &[u32] {
        &self.radii[..self.rank]
    }

    /// The caller's axis label that canonical `axis` corresponds to.
    pub fn original_axis(&self, axis: usize) -> usize {
        self.perm[axis]
    }

    /// Update threshold `k = a + b (+ c)`: half the interior neighborhood.
    pub fn k(&self) -> u32 {
        self.radii().iter().sum()
    }

    /// Interior neighborhood size, `2k`.
    pub fn neighborhood_size(&self) -> u32 {
        2 * self.k()
    }

    pub fn check_rank(&self, dims: &Dims) -> Result<()> {
        if self.rank == dims.rank() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "spec {} has rank {}, lattice {} has rank {}",
                self,
                self.rank,
                dims,
                dims.rank()
            )))
        }
    }

    /// Neighborhood of `site` clipped to the box: along each axis `d`, the
    /// sites at offsets 1..=radius(d) in both directions.
    pub fn neighborhood(&self, site: Coord, dims: &Dims) -> Result<Vec<Coord>> {
        self.check_rank(dims)?;
        if !dims.contains(site) {
            return Err(Error::DimensionMismatch(format!(
                "site {site:?} outside {dims}"
            )));
        }
        let mut out = Vec::with_capacity(self.neighborhood_size() as usize);
        self.for_each_neighbor(site, dims, |c| out.push(c));
        Ok(out)
    }

    /// Internal neighbor walk without validation; same order as
    /// [`Self::neighborhood`]: axis 0 negative then positive offsets, axis 1, …
    #[inline]
    pub(crate) fn for_each_neighbor(
        &self,
        site: Coord,
        dims: &Dims,
        mut f: impl FnMut(Coord),
    ) {
        for d in 0..self.rank {
            let r = self.radii[d] as usize;
            let lo = site[d].saturating_sub(r);
            for v in lo..site[d] {
                let mut c = site;
                c[d] = v;
                f(c);
            }
            let hi = (site[d] + r).min(dims.extent(d) - 1);
            for v in site[d] + 1..=hi {
                let mut c = site;
                c[d] = v;
                f(c);
            }
        }
    }
}

impl fmt::Display for NeighborhoodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.radii().iter().map(|r| r.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl fmt::Debug for NeighborhoodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NeighborhoodSpec{self}")
    }
}

impl FromStr for NeighborhoodSpec {
    type Err = Error;

    /// Parse `"a,b,c"` (or `"a,b"`, `"a"`).
    fn from_str(s: &str) -> Result<Self> {
        let radii: Vec<u32> = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("radius {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        NeighborhoodSpec::new(&radii)
    }
}

// ─────────────────────────────────────────────────────────────────────────
// Lattice

/// Bit-packed occupancy over a finite box.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    dims: Dims,
    words: Vec<u64>,
}

impl Lattice {
    pub fn empty(dims: Dims) -> Self {
        let words = vec![0u64; dims.volume().div_ceil(64)];
        Lattice { dims, words }
    }

    pub fn full(dims: Dims) -> Self {
        let mut lat = Lattice::empty(dims);
        for i in 0..dims.volume() {
            lat.set_index(i, true);
        }
        lat
    }

    pub fn from_coords(dims: Dims, occupied: &[Coord]) -> Result<Self> {
        let mut lat = Lattice::empty(dims);
        for &c in occupied {
            if !dims.contains(c) {
                return Err(Error::DimensionMismatch(format!(
                    "site {c:?} outside {dims}"
                )));
            }
            lat.set(c, true);
        }
        Ok(lat)
    }

    /// Occupy each cell independently with probability `p`, one uniform per
    /// cell drawn from the counter stream keyed by `seed` with the cell's
    /// linear index as the counter.
    pub fn random_fill(dims: Dims, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadProbability { value: p, expected: "[0, 1]" });
        }
        let mut lat = Lattice::empty(dims);
        lat.refill(p, Stream::new(seed));
        Ok(lat)
    }

    /// Re-fill in place from an explicit stream; used by the estimator's
    /// per-trial substreams. Counter = cell linear index, independent of `p`.
    pub fn refill(&mut self, p: f64, stream: Stream) {
        self.words.fill(0);
        for i in 0..self.dims.volume() {
            if stream.uniform(i as u64) < p {
                self.set_index(i, true);
            }
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn volume(&self) -> usize {
        self.dims.volume()
    }

    #[inline(always)]
    pub fn get(&self, c: Coord) -> bool {
        self.get_index(self.dims.index(c))
    }

    #[inline(always)]
    pub fn set(&mut self, c: Coord, value: bool) {
        self.set_index(self.dims.index(c), value);
    }

    #[inline(always)]
    pub(crate) fn get_index(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline(always)]
    pub(crate) fn set_index(&mut self, i: usize, value: bool) {
        if value {
            self.words[i >> 6] |= 1u64 << (i & 63);
        } else {
            self.words[i >> 6] &= !(1u64 << (i & 63));
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_full(&self) -> bool {
        self.occupied_count() == self.volume()
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.volume()).filter(|&i| self.get_index(i)).map(|i| self.dims.coord(i))
    }

    /// True if every occupied site of `self` is occupied in `other`.
    pub fn subset_of(&self, other: &Lattice) -> bool {
        self.dims == other.dims
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// In-place union with a same-shaped lattice.
    pub fn union_with(&mut self, other: &Lattice) {
        assert_eq!(self.dims, other.dims, "union of differently shaped lattices");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// In-place intersection with a same-shaped lattice.
    pub fn intersect_with(&mut self, other: &Lattice) {
        assert_eq!(self.dims, other.dims, "intersection of differently shaped lattices");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    /// Do the two lattices share any occupied site?
    pub fn intersects(&self, other: &Lattice) -> bool {
        assert_eq!(self.dims, other.dims, "intersection of differently shaped lattices");
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Bounding box of occupied sites, or `None` when empty.
    pub fn occupied_bbox(&self) -> Option<Block> {
        let mut bbox: Option<Block> = None;
        for c in self.iter_occupied() {
            match &mut bbox {
                None => bbox = Some(Block::of_site(c)),
                Some(b) => b.include(c),
            }
        }
        bbox
    }

    // ── Snapshot format ───────────────────────────────────────────────────
    //
    // Header `dims: x y [z]`, then the cells as '0'/'1' characters in linear
    // index order, broken into one line per x-row with a blank line between
    // z-planes. The reader accepts any whitespace layout after the header.

    pub fn to_snapshot(&self) -> String {
        let ext: Vec<String> =
            self.dims.extents().iter().map(|e| e.to_string()).collect();
        let mut out = format!("dims: {}\n", ext.join(" "));
        for z in 0..self.dims.extent(2) {
            if z > 0 {
                out.push('\n');
            }
            for y in 0..self.dims.extent(1) {
                for x in 0..self.dims.extent(0) {
                    out.push(if self.get([x, y, z]) { '1' } else { '0' });
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
        let rest = header
            .strip_prefix("dims:")
            .ok_or_else(|| Error::Parse(format!("expected `dims:` header, got {header:?}")))?;
        let extents: Vec<usize> = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("extent {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let dims = Dims::new(&extents)?;
        let mut lat = Lattice::empty(dims);
        let mut i = 0usize;
        for line in lines {
            for ch in line.chars() {
                match ch {
                    '0' | '1' => {
                        if i >= dims.volume() {
                            return Err(Error::Parse(format!(
                                "more than {} cells in snapshot",
                                dims.volume()
                            )));
                        }
                        if ch == '1' {
                            lat.set_index(i, true);
                        }
                        i += 1;
                    }
                    c if c.is_whitespace() => {}
                    c => return Err(Error::Parse(format!("unexpected character {c:?}"))),
                }
            }
        }
        if i != dims.volume() {
            return Err(Error::Parse(format!(
                "snapshot has {i} cells, dims {dims} needs {}",
                dims.volume()
            )));
        }
        Ok(lat)
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice({}, {} occupied)", self.dims, self.occupied_count())
    }
}
