//! Critical-droplet planning and seeded-growth simulation.
//!
//! A critical droplet is a small fully occupied block, just large enough
//! that — embedded in an ambient density-p environment — its closure keeps
//! recruiting fresh sites instead of stalling: first advancing along the
//! easiest axis slab by slab, then in all directions at once. The planner
//! sizes the block side N from the droplet density of the easiest 2D
//! reduced model and budgets M slabs so that the droplet outgrows the
//! hardest model's upper threshold length. The simulator occupies the
//! planned block at the center of an arena, fills the remainder
//! independently at density p, closes, and measures how far the cluster
//! seeded by the block actually grew.
//!
//! Sizes are carried as [`Length`] so that plans remain meaningful at
//! densities where N no longer fits in a machine word; integer ceilings
//! are applied whenever the value is exactly representable.

use crate::bounds::{f_scaling, DropletConstants, Length, ScalingForm, ThresholdBracket};
use crate::dynamics::closure;
use crate::dynamics::reduce;
use crate::error::{Error, Result};
use crate::lattice::{Block, Dims, Lattice, NeighborhoodSpec};
use crate::rng::Stream;

/// Below ln 2^53 a length is an exactly representable integer, so ceilings
/// are taken literally; above, the raw exponent is kept.
const EXACT_LN: f64 = 36.7;

fn ceil_length(ln_raw: f64) -> Length {
    if ln_raw <= EXACT_LN {
        Length::Ln(ln_raw.exp().ceil().max(1.0).ln())
    } else {
        Length::Ln(ln_raw)
    }
}

/// Plan for a seeded droplet: an N × N × 2 block and a slab budget M.
#[derive(Clone, Copy, Debug)]
pub struct CriticalDropletPlan {
    /// Block extents, N × N × 2.
    pub block: [Length; 3],
    /// Block side N = ⌈P^{−(1+ε)/2}⌉, where P is the droplet density of
    /// the easiest reduced model.
    pub n: Length,
    /// Slab budget M = ⌈(L̄⁺)²/N⌉ against the largest reduced upper length.
    pub m: Length,
    /// Supercriticality margin ε.
    pub eps: f64,
    /// ln of the probability that every block cell is occupied: 2N²·ln p.
    pub ln_density: f64,
    /// The exponent −(1+ε)/2·ln P before the integer ceiling.
    pub ln_n_raw: f64,
    /// Axis whose reduced model has the smallest scaling exponent
    /// (ties broken towards z).
    pub easy_axis: usize,
}

/// A length as an exact site count, when it is one.
fn as_count(l: &Length) -> Option<u64> {
    l.value().and_then(|v| (v <= 9.0e15).then(|| v.round() as u64))
}

impl CriticalDropletPlan {
    /// N as a site count, for plans small enough to realize.
    pub fn n_sites(&self) -> Option<u64> {
        as_count(&self.n)
    }

    /// M as a slab count, for plans small enough to realize.
    pub fn m_slabs(&self) -> Option<u64> {
        as_count(&self.m)
    }

    /// Block extents as site counts, for plans small enough to realize.
    pub fn block_extents(&self) -> Option<[u64; 3]> {
        let n = self.n_sites()?;
        Some([n, n, 2])
    }
}

/// Size a critical droplet for a 3D model at density p with margin eps.
/// `brackets[d]` must be the threshold bracket of the model reduced along
/// axis d, all evaluated at the same p.
pub fn plan_droplet(
    spec: &NeighborhoodSpec,
    p: f64,
    eps: f64,
    brackets: &[ThresholdBracket; 3],
) -> Result<CriticalDropletPlan> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "droplet planning needs a 3D spec, got {spec}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::BadParameter(format!("eps must be finite and >= 0, got {eps}")));
    }

    let mut reduced = Vec::with_capacity(3);
    let mut fs = [0.0f64; 3];
    for d in 0..3 {
        let r = reduce(spec, d)?;
        fs[d] = f_scaling(r.radius(0), r.radius(1), p)?;
        if brackets[d].form != ScalingForm::of(r.radius(0), r.radius(1)) {
            return Err(Error::BadParameter(format!(
                "bracket for axis {d} has form {} but the reduced model is {r}",
                brackets[d].form
            )));
        }
        reduced.push(r);
    }
    let mut easy = 2;
    for d in [1, 0] {
        if fs[d] < fs[easy] {
            easy = d;
        }
    }

    // droplet density P of the easiest model: the closed form for (1,1),
    // otherwise the reciprocal lower threshold length
    let ln_p_seed = if reduced[easy].radii() == [1, 1] {
        -DropletConstants::new().two_c_h / p
    } else {
        -brackets[easy].l_minus.ln()
    };

    let ln_n_raw = -0.5 * (1.0 + eps) * ln_p_seed;
    let n = ceil_length(ln_n_raw);
    let l_plus_bar = brackets
        .iter()
        .map(|b| b.l_plus)
        .reduce(|acc, l| if acc.leq(&l) { l } else { acc })
        .expect("three brackets");
    let m = ceil_length((2.0 * l_plus_bar.ln() - n.ln()).max(0.0));

    assert!(
        2.0 * n.ln() >= -(1.0 + eps) * ln_p_seed - 1e-9,
        "plan violates N^2 >= P^-(1+eps)"
    );
    assert!(
        m.ln() + n.ln() >= 2.0 * l_plus_bar.ln() - 1e-9,
        "plan violates M*N >= (L+)^2"
    );

    let nd = n.value().unwrap_or(f64::INFINITY);
    Ok(CriticalDropletPlan {
        block: [n, n, Length::Ln(2f64.ln())],
        n,
        m,
        eps,
        ln_density: 2.0 * nd * nd * p.ln(),
        ln_n_raw,
        easy_axis: easy,
    })
}

/// ln of the probability that every cell of a block is occupied at
/// density p: (cell count)·ln p.
pub fn droplet_seed_probability(block: &[usize], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
    }
    if block.is_empty() || block.iter().any(|&e| e == 0) {
        return Err(Error::BadParameter(format!("block extents must all be >= 1, got {block:?}")));
    }
    let cells: f64 = block.iter().map(|&e| e as f64).product();
    Ok(cells * p.ln())
}

/// What a seeded-growth run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthOutcome {
    /// Whole arena occupied after closure.
    pub filled: bool,
    /// Bounding box of the closure component connected to the seed block.
    pub final_bbox: Block,
    /// Whole slabs of thickness c+1 gained along the last axis.
    pub slabs_advanced: usize,
    /// Extent growth of the seeded component beyond the block, per axis.
    pub advance: [usize; 3],
}

/// Occupy `block` centered in `arena`, fill the rest independently at p,
/// close, and measure the cluster grown from the block. Randomness is one
/// uniform per cell keyed by the cell index, so outcomes at the same seed
/// couple monotonically across p and across nested blocks.
pub fn simulate_growth(
    block: &[usize],
    p: f64,
    arena: &[usize],
    spec: &NeighborhoodSpec,
    seed: u64,
) -> Result<GrowthOutcome> {
    let dims = Dims::new(arena)?;
    spec.check_rank(&dims)?;
    if block.len() != dims.rank() {
        return Err(Error::DimensionMismatch(format!(
            "block has {} extents but the arena is {}-dimensional",
            block.len(),
            dims.rank()
        )));
    }
    if block.iter().any(|&e| e == 0) {
        return Err(Error::BadParameter(format!("block extents must all be >= 1, got {block:?}")));
    }
    if block.iter().zip(arena).any(|(&b, &a)| b > a) {
        return Err(Error::InvalidDims(format!("block {block:?} does not fit in arena {arena:?}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability { value: p, expected: "[0, 1]" });
    }

    let rank = dims.rank();
    let mut off = [0usize; 3];
    let mut blk = [1usize; 3];
    for d in 0..rank {
        blk[d] = block[d];
        off[d] = (dims.extent(d) - block[d]) / 2;
    }
    let inside = |c: &[usize; 3]| (0..rank).all(|d| (off[d]..off[d] + blk[d]).contains(&c[d]));

    let stream = Stream::new(seed);
    let mut lat = Lattice::empty(dims);
    for i in 0..dims.volume() {
        let c = dims.coord(i);
        if inside(&c) || stream.uniform(i as u64) < p {
            lat.set_index(i, true);
        }
    }

    let fin = closure(&lat, spec)?.final_state;
    let filled = fin.is_full();

    // flood the component holding the block
    let mut seen = vec![false; dims.volume()];
    let mut stack = Vec::new();
    let mut bbox = Block { min: off, max: [off[0] + blk[0] - 1, off[1] + blk[1] - 1, off[2] + blk[2] - 1] };
    for i in 0..dims.volume() {
        if inside(&dims.coord(i)) {
            seen[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let c = dims.coord(i);
        bbox.include(c);
        for d in 0..rank {
            for n in [c[d].wrapping_sub(1), c[d] + 1] {
                if n >= dims.extent(d) {
                    continue;
                }
                let mut cc = c;
                cc[d] = n;
                let j = dims.index(cc);
                if fin.get_index(j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }

    let mut advance = [0usize; 3];
    for d in 0..rank {
        advance[d] = bbox.side(d) - blk[d];
    }
    let slab = spec.radius(rank - 1) as usize + 1;
    Ok(GrowthOutcome { filled, final_bbox: bbox, slabs_advanced: advance[rank - 1] / slab, advance })
}
