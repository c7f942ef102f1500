//! Bootstrap closure and derived predicates.
//!
//! The update rule: an empty site with at least `k = a + b (+ c)` occupied
//! neighbors becomes occupied; occupied sites stay occupied. [`closure`]
//! iterates the rule to its fixpoint with a frontier worklist that only
//! re-examines neighbors of newly occupied sites; [`closure_naive`] is the
//! brute-force oracle (full-lattice synchronous sweeps) used to validate it,
//! and refuses lattices above a volume cap.
//!
//! On top of the closure sit the predicates the analysis needs: internal
//! spanning (the closure fills the box), crossings (a nearest-neighbor path
//! of occupied sites joining two opposite faces — 4-connectivity in 2D, 6 in
//! 3D), weak enhancement (newly occupied sites draw axis-aligned segments to
//! the finally occupied sites of their neighborhood, and empty sites strictly
//! interior to a segment count as occupied), and the dimensional reduction
//! that deletes one axis from a 3D spec.
//!
//! Weak enhancement is applied once, after the closure fixpoint; it is not
//! interleaved with the dynamics and does not trigger further closure.

use crate::error::{Error, Result};
use crate::lattice::{Dims, Lattice, NeighborhoodSpec};

/// Volume cap for [`closure_naive`].
pub const ORACLE_CAP: usize = 1_000_000;

/// Fixpoint of the bootstrap rule plus bookkeeping.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    /// Fixpoint configuration; superset of the input.
    pub final_state: Lattice,
    /// Number of synchronous sweeps that occupied at least one site.
    pub generations: usize,
    /// Total sites occupied by the dynamics (final minus initial).
    pub newly_occupied: usize,
}

/// Closure via a frontier worklist. Wave `g+1` consists of exactly the empty
/// sites whose occupied-neighbor count reaches `k` in the configuration after
/// wave `g`, so `generations` matches the synchronous sweep count of the
/// naive oracle.
pub fn closure(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<ClosureResult> {
    spec.check_rank(lat.dims())?;
    let dims = *lat.dims();
    let volume = dims.volume();
    let k = spec.k();
    let mut state = lat.clone();

    let mut counts = vec![0u32; volume];
    for i in 0..volume {
        if state.get_index(i) {
            spec.for_each_neighbor(dims.coord(i), &dims, |c| {
                counts[dims.index(c)] += 1;
            });
        }
    }

    let mut frontier: Vec<usize> = (0..volume)
        .filter(|&i| !state.get_index(i) && counts[i] >= k)
        .collect();
    let mut next: Vec<usize> = Vec::new();
    let mut generations = 0usize;
    let mut newly = 0usize;

    while !frontier.is_empty() {
        generations += 1;
        newly += frontier.len();
        for &i in &frontier {
            state.set_index(i, true);
        }
        for &i in &frontier {
            spec.for_each_neighbor(dims.coord(i), &dims, |c| {
                let j = dims.index(c);
                counts[j] += 1;
                // counts pass k exactly once; occupied sites never re-enter
                if counts[j] == k && !state.get_index(j) {
                    next.push(j);
                }
            });
        }
        frontier.clear();
        std::mem::swap(&mut frontier, &mut next);
    }

    Ok(ClosureResult { final_state: state, generations, newly_occupied: newly })
}

/// Brute-force closure oracle: full synchronous sweeps until no change.
pub fn closure_naive(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<ClosureResult> {
    closure_naive_with_cap(lat, spec, ORACLE_CAP)
}

pub fn closure_naive_with_cap(
    lat: &Lattice,
    spec: &NeighborhoodSpec,
    cap: usize,
) -> Result<ClosureResult> {
    spec.check_rank(lat.dims())?;
    if lat.volume() > cap {
        return Err(Error::OracleCap { volume: lat.volume(), cap });
    }
    let dims = *lat.dims();
    let k = spec.k();
    let mut state = lat.clone();
    let mut generations = 0usize;
    let mut newly = 0usize;
    loop {
        let mut to_occupy = Vec::new();
        for i in 0..dims.volume() {
            if state.get_index(i) {
                continue;
            }
            let mut cnt = 0u32;
            spec.for_each_neighbor(dims.coord(i), &dims, |c| {
                if state.get(c) {
                    cnt += 1;
                }
            });
            if cnt >= k {
                to_occupy.push(i);
            }
        }
        if to_occupy.is_empty() {
            break;
        }
        generations += 1;
        newly += to_occupy.len();
        for i in to_occupy {
            state.set_index(i, true);
        }
    }
    Ok(ClosureResult { final_state: state, generations, newly_occupied: newly })
}

/// True iff the closure fills the whole box.
pub fn is_internally_spanned(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<bool> {
    let res = closure(lat, spec)?;
    Ok(res.final_state.is_full())
}

/// True iff the configuration as given (no closure) contains a
/// nearest-neighbor path of occupied sites joining the two opposite faces
/// orthogonal to `axis`. A lattice of extent 1 along `axis` is crossed by any
/// occupied site of that single face.
pub fn has_crossing(lat: &Lattice, axis: usize) -> Result<bool> {
    let dims = *lat.dims();
    if axis >= dims.rank() {
        return Err(Error::DimensionMismatch(format!(
            "axis {axis} invalid for rank {}",
            dims.rank()
        )));
    }
    let far = dims.extent(axis) - 1;
    let volume = dims.volume();
    let mut visited = vec![false; volume];
    let mut stack: Vec<usize> = Vec::new();

    for c in dims.iter().filter(|c| c[axis] == 0) {
        let i = dims.index(c);
        if lat.get_index(i) && !visited[i] {
            visited[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let c = dims.coord(i);
        if c[axis] == far {
            return Ok(true);
        }
        for d in 0..dims.rank() {
            for n in [c[d].wrapping_sub(1), c[d] + 1] {
                if n >= dims.extent(d) {
                    continue;
                }
                let mut cc = c;
                cc[d] = n;
                let j = dims.index(cc);
                if lat.get_index(j) && !visited[j] {
                    visited[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Ok(false)
}

/// True iff the closure of `lat` is crossed along `axis`.
pub fn is_crossed(lat: &Lattice, spec: &NeighborhoodSpec, axis: usize) -> Result<bool> {
    let res = closure(lat, spec)?;
    has_crossing(&res.final_state, axis)
}

/// Closure plus weakly spanned sites. Every site occupied in the final but
/// not the initial configuration draws an axis-aligned segment to each
/// finally occupied site of its neighborhood; empty sites strictly interior
/// to a segment become occupied. Applied once; the additions do not cascade.
pub fn weak_enhance(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<Lattice> {
    weak_enhance_with_baseline(lat, lat, spec)
}

/// [`weak_enhance`] with an explicit baseline: segment-drawing sites are
/// those occupied in the closure of `config` but empty in `baseline`. The
/// region machinery uses this to treat sites it occupied along the way as
/// newly occupied even though they are part of its current configuration.
pub fn weak_enhance_with_baseline(
    config: &Lattice,
    baseline: &Lattice,
    spec: &NeighborhoodSpec,
) -> Result<Lattice> {
    if config.dims() != baseline.dims() {
        return Err(Error::DimensionMismatch(format!(
            "config {} vs baseline {}",
            config.dims(),
            baseline.dims()
        )));
    }
    let res = closure(config, spec)?;
    let fin = res.final_state;
    let dims = *fin.dims();
    let mut out = fin.clone();

    for i in 0..dims.volume() {
        if !fin.get_index(i) || baseline.get_index(i) {
            continue;
        }
        let s = dims.coord(i);
        for d in 0..spec.rank() {
            let r = spec.radius(d) as usize;
            for sign in [-1isize, 1] {
                // segments of length ≥ 2 have interior sites
                for j in 2..=r {
                    let end = s[d] as isize + sign * j as isize;
                    if end < 0 || end as usize >= dims.extent(d) {
                        break;
                    }
                    let mut n = s;
                    n[d] = end as usize;
                    if !fin.get(n) {
                        continue;
                    }
                    for t in 1..j {
                        let mut m = s;
                        m[d] = (s[d] as isize + sign * t as isize) as usize;
                        if !fin.get(m) {
                            out.set(m, true);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// True iff the weakly enhanced configuration is crossed along every axis
/// (no further closure is applied to the enhanced configuration).
pub fn is_weakly_crossed(lat: &Lattice, spec: &NeighborhoodSpec) -> Result<bool> {
    spec.check_rank(lat.dims())?;
    let weak = weak_enhance(lat, spec)?;
    for axis in 0..lat.dims().rank() {
        if !has_crossing(&weak, axis)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Delete `axis` from a 3D spec: reducing (a,b,c) along x yields (b,c).
/// `axis` indexes the canonical (ascending-radius) order.
pub fn reduce(spec: &NeighborhoodSpec, axis: usize) -> Result<NeighborhoodSpec> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "reduce needs a 3D spec, got {spec}"
        )));
    }
    if axis >= 3 {
        return Err(Error::DimensionMismatch(format!("axis {axis} invalid for 3D")));
    }
    let radii: Vec<u32> = (0..3)
        .filter(|&d| d != axis)
        .map(|d| spec.radius(d))
        .collect();
    NeighborhoodSpec::new(&radii)
}

/// Growth-off-a-block experiment for one slab: build a 3D lattice whose
/// first `r_axis` layers along `axis` are fully occupied with the slab's
/// occupancy in the next layer, and compare the slab layer's fate under the
/// 3D closure against the slab's spanning under the reduced 2D model.
/// Returns `(slab layer fully occupied in 3D, slab spans under reduce)`;
/// the two agree on every instance.
pub fn check_slab_reduction(
    spec: &NeighborhoodSpec,
    axis: usize,
    slab: &Lattice,
) -> Result<(bool, bool)> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "slab reduction needs a 3D spec, got {spec}"
        )));
    }
    if slab.dims().rank() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "slab must be 2D, got {}",
            slab.dims()
        )));
    }
    if axis >= 3 {
        return Err(Error::DimensionMismatch(format!("axis {axis} invalid for 3D")));
    }
    let r = spec.radius(axis) as usize;
    let others: Vec<usize> = (0..3).filter(|&d| d != axis).collect();

    let mut ext = [0usize; 3];
    ext[axis] = r + 1;
    ext[others[0]] = slab.dims().extent(0);
    ext[others[1]] = slab.dims().extent(1);
    let dims3 = Dims::new(&ext)?;

    let mut lat3 = Lattice::empty(dims3);
    for c in dims3.iter() {
        if c[axis] < r {
            lat3.set(c, true);
        } else if slab.get([c[others[0]], c[others[1]], 0]) {
            lat3.set(c, true);
        }
    }

    let fin = closure(&lat3, spec)?.final_state;
    let layer_full = dims3
        .iter()
        .filter(|c| c[axis] == r)
        .all(|c| fin.get(c));
    let spans_reduced = is_internally_spanned(slab, &reduce(spec, axis)?)?;
    Ok((layer_full, spans_reduced))
}
