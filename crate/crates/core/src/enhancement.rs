//! Slice/minicolumn enhancement and the stepping-stone statistic.
//!
//! The easiest growth direction of a 3D (a,b,c) model is the canonical z
//! axis (largest radius c). The cube is cut into slices of thickness
//! s = c+1 along z — the minimal thickness such that a site in a slice
//! still needs a+b occupied neighbors *within its own slice* even if every
//! other slice is fully occupied. A *minicolumn* is the s consecutive sites
//! of one (x,y) position inside one slice; treating minicolumns as sites
//! turns each slice into a 2D (a,b) lattice with per-site occupation
//! probability q = 1 − (1−p)^s ∈ [p, sp].
//!
//! [`enhance`] applies five occupancy-only steps in order: (1) fill every
//! minicolumn containing an occupied site, (2) close each slice under the
//! 2D (a,b) rule, (3) flood (fully occupy) each slice whose largest
//! occupied minicolumn component reaches size S, (4) fill minicolumns
//! containing a weakly spanned site of the 3D configuration, (5) fill the
//! first and last slice. The output dominates the weakly enhanced
//! configuration site-for-site, so a weak z-crossing implies an e-crossing;
//! that domination is what links the crossing bounds back to plain
//! spanning.
//!
//! [`measure_chi`] estimates χ, the expected size of the origin's occupied
//! component in the 2D weak-enhanced closure, conditioned on the component
//! bounding box staying below the stepping-stone caps (x_c, y_c); for small
//! p this is at most √p, which is the engine behind the slice-skipping
//! crossing bound.

use rayon::prelude::*;

use crate::bounds::DEFAULT_EPS;
use crate::dynamics::{closure, weak_enhance};
use crate::error::{Error, Result};
use crate::lattice::{Block, Dims, Lattice, NeighborhoodSpec};
use crate::rng::Stream;

/// How a cube splits into slices of minicolumns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceDecomposition {
    /// Slice thickness s = c+1.
    pub s: usize,
    /// Number of slices along the enhanced axis.
    pub slice_count: usize,
    /// The enhanced (easiest-growth) axis; canonical z for 3D models.
    pub axis: usize,
    /// Minicolumn occupation probability q = 1 − (1−p)^s.
    pub q: f64,
}

/// Tunables of the enhancement: the flooding size S and the stepping-stone
/// bounding-box caps. `d_s = p^{−b+ε}` is the diameter scale the caps stay
/// below; components this large behave like critical droplets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnhanceParams {
    /// Flooding threshold S, in minicolumns.
    pub flood_size: usize,
    /// Cap on the component bounding box along the a-axis (exclusive).
    pub x_c: usize,
    /// Cap along the b-axis (exclusive); x_c < y_c < p^{−b+ε}.
    pub y_c: usize,
    /// Exponent margin ε.
    pub eps: f64,
    /// Diameter scale p^{−b+ε}.
    pub d_s: f64,
}

impl EnhanceParams {
    /// Validated constructor: requires 1 ≤ x_c < y_c < p^{−b+ε}.
    pub fn new(
        flood_size: usize,
        x_c: usize,
        y_c: usize,
        eps: f64,
        p: f64,
        b: u32,
    ) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadParameter(format!("need 0 < eps < 1, got {eps}")));
        }
        let d_s = ((-(b as f64) + eps) * p.ln()).exp();
        if !(1 <= x_c && x_c < y_c) {
            return Err(Error::BadParameter(format!(
                "need 1 <= x_c < y_c, got x_c={x_c} y_c={y_c}"
            )));
        }
        if (y_c as f64) >= d_s {
            return Err(Error::BadParameter(format!(
                "y_c={y_c} must stay below p^(-b+eps) = {d_s:.3}"
            )));
        }
        Ok(EnhanceParams { flood_size, x_c, y_c, eps, d_s })
    }

    /// Default parameters for the 2D (a,b) model at density p:
    /// y_c = ⌈p^{−b+ε}⌉ − 1, x_c = ⌈p^{−a} ln(1/p)⌉ capped at y_c − 1
    /// (the cap binds for symmetric radii), S = x_c·y_c, ε = 0.25.
    pub fn defaults(p: f64, a: u32, b: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
        }
        if a < 1 || b < a {
            return Err(Error::BadParameter(format!(
                "radii must satisfy 1 <= a <= b, got a={a} b={b}"
            )));
        }
        let eps = DEFAULT_EPS;
        let d_s = ((-(b as f64) + eps) * p.ln()).exp();
        if !(d_s.is_finite() && d_s < 1e12) {
            return Err(Error::BadParameter(format!(
                "stepping-stone scale p^(-b+eps) = {d_s:.3e} out of usable range"
            )));
        }
        let y_c = d_s.ceil() as usize - 1;
        if y_c < 2 {
            return Err(Error::BadParameter(format!(
                "p = {p} too large: y_c cap would be {y_c}"
            )));
        }
        let x_raw = ((-(a as f64) * p.ln()).exp() * (1.0 / p).ln()).ceil() as usize;
        let x_c = x_raw.min(y_c - 1);
        Self::new(x_c * y_c, x_c, y_c, eps, p, b)
    }
}

/// Monte Carlo estimate of the stepping-stone statistic χ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteppingStoneStats {
    /// Mean conditioned component size.
    pub chi: f64,
    pub trials: u64,
    /// 95% confidence half-width.
    pub ci: f64,
    /// Trials whose origin component violated the caps (contributed 0).
    pub cap_violations: u64,
}

fn slice_shape(dims: &Dims, spec: &NeighborhoodSpec) -> Result<(usize, usize)> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "slice decomposition needs a 3D spec, got {spec}"
        )));
    }
    spec.check_rank(dims)?;
    let s = spec.radius(2) as usize + 1;
    let ext = dims.extent(2);
    if ext % s != 0 {
        return Err(Error::BadParameter(format!(
            "extent {ext} along the enhanced axis is not a multiple of s = {s}"
        )));
    }
    Ok((s, ext / s))
}

/// Split a cube into thickness-(c+1) slices and report the minicolumn
/// occupation probability at site density p.
pub fn decompose(dims: &Dims, spec: &NeighborhoodSpec, p: f64) -> Result<SliceDecomposition> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
    }
    let (s, slice_count) = slice_shape(dims, spec)?;
    let q = 1.0 - (1.0 - p).powi(s as i32);
    Ok(SliceDecomposition { s, slice_count, axis: 2, q })
}

/// Largest occupied component of a minicolumn configuration under the
/// in-plane (a,b) adjacency.
fn largest_component(plane: &Lattice, spec2: &NeighborhoodSpec) -> usize {
    let dims = *plane.dims();
    let mut seen = vec![false; dims.volume()];
    let mut best = 0usize;
    let mut stack = Vec::new();
    for start in 0..dims.volume() {
        if !plane.get_index(start) || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0usize;
        while let Some(i) = stack.pop() {
            size += 1;
            spec2.for_each_neighbor(dims.coord(i), &dims, |c| {
                let j = dims.index(c);
                if plane.get_index(j) && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            });
        }
        best = best.max(size);
    }
    best
}

/// The five-step enhancement. Each step only adds occupancy, and every step
/// acts on whole minicolumns or whole slices, so the output is exactly a
/// union of minicolumns.
pub fn enhance(lat: &Lattice, spec: &NeighborhoodSpec, params: &EnhanceParams) -> Result<Lattice> {
    let dims = *lat.dims();
    let (s, slice_count) = slice_shape(&dims, spec)?;
    let spec2 = NeighborhoodSpec::new(&[spec.radius(0), spec.radius(1)])?;
    let plane = Dims::new(&[dims.extent(0), dims.extent(1)])?;

    // step 1: fill every minicolumn containing an occupied site
    let mut slices = vec![Lattice::empty(plane); slice_count];
    for c in lat.iter_occupied() {
        slices[c[2] / s].set([c[0], c[1], 0], true);
    }

    // step 2: close each slice under the in-plane rule
    for sl in slices.iter_mut() {
        *sl = closure(sl, &spec2)?.final_state;
    }

    // step 3: flood slices carrying a component of size >= S
    for sl in slices.iter_mut() {
        if !sl.is_full() && largest_component(sl, &spec2) >= params.flood_size {
            *sl = Lattice::full(plane);
        }
    }

    // step 4: fill minicolumns containing a weakly spanned site of the
    // original 3D configuration
    let closed = closure(lat, spec)?.final_state;
    let weak = weak_enhance(lat, spec)?;
    for c in weak.iter_occupied() {
        if !closed.get(c) {
            slices[c[2] / s].set([c[0], c[1], 0], true);
        }
    }

    // step 5: fill the boundary slices
    slices[0] = Lattice::full(plane);
    slices[slice_count - 1] = Lattice::full(plane);

    let mut out = Lattice::empty(dims);
    for (i, sl) in slices.iter().enumerate() {
        for c in sl.iter_occupied() {
            for z in i * s..(i + 1) * s {
                out.set([c[0], c[1], z], true);
            }
        }
    }
    Ok(out)
}

/// True iff the enhanced configuration is crossed along the enhanced axis.
pub fn is_e_crossed(
    lat: &Lattice,
    spec: &NeighborhoodSpec,
    params: &EnhanceParams,
) -> Result<bool> {
    let enhanced = enhance(lat, spec, params)?;
    crate::dynamics::has_crossing(&enhanced, 2)
}

/// Size of the origin component for one sampled window, or `None` when the
/// component violates the bounding-box caps (or leaves the window, which is
/// possible only when a cap exceeds the window radius).
fn origin_component(
    weak: &Lattice,
    origin: [usize; 3],
    params: &EnhanceParams,
    spec2: &NeighborhoodSpec,
) -> Option<usize> {
    let dims = *weak.dims();
    if !weak.get(origin) {
        return Some(0);
    }
    let mut seen = vec![false; dims.volume()];
    let mut stack = vec![dims.index(origin)];
    seen[dims.index(origin)] = true;
    let mut size = 0usize;
    let mut bbox = Block::of_site(origin);
    while let Some(i) = stack.pop() {
        size += 1;
        let c = dims.coord(i);
        bbox.include(c);
        spec2.for_each_neighbor(c, &dims, |n| {
            let j = dims.index(n);
            if weak.get_index(j) && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        });
    }
    let touches_border = bbox.min[0] == 0
        || bbox.min[1] == 0
        || bbox.max[0] + 1 == dims.extent(0)
        || bbox.max[1] + 1 == dims.extent(1);
    if bbox.side(0) >= params.x_c || bbox.side(1) >= params.y_c || touches_border {
        None
    } else {
        Some(size)
    }
}

/// Half-extent of the sampling window. Fixed (not derived from the caps) so
/// that runs with the same seed sample identical configurations whatever the
/// caps are; conditioning then only truncates, never resamples.
const WINDOW_HALF: usize = 64;

/// Monte Carlo estimate of χ = E[|C(origin)|·1{bbox within caps}] where C
/// is the origin's occupied component, under the in-plane adjacency, of the
/// weak-enhanced 2D closure of a p-random window. Components that violate
/// the caps (or outgrow the window) contribute 0 and are tallied in
/// `cap_violations`. Accumulation is integer-only, so the result does not
/// depend on the parallel schedule.
pub fn measure_chi(
    spec2d: &NeighborhoodSpec,
    p: f64,
    params: &EnhanceParams,
    trials: u64,
    seed: u64,
) -> Result<SteppingStoneStats> {
    if spec2d.rank() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "stepping-stone statistic needs a 2D spec, got {spec2d}"
        )));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::BadProbability { value: p, expected: "[0, 1)" });
    }
    if trials == 0 {
        return Err(Error::BadParameter("need at least one trial".into()));
    }
    let dims = Dims::new(&[2 * WINDOW_HALF + 1, 2 * WINDOW_HALF + 1])?;
    let origin = [WINDOW_HALF, WINDOW_HALF, 0];
    let base = Stream::new(seed);

    let (sum, sum_sq, violations) = (0..trials)
        .into_par_iter()
        .fold(
            || (0u64, 0u128, 0u64, Lattice::empty(dims)),
            |(mut sum, mut sq, mut viol, mut lat), trial| {
                lat.refill(p, base.substream(trial));
                let weak = weak_enhance(&lat, spec2d).expect("window matches 2D spec");
                match origin_component(&weak, origin, params, spec2d) {
                    Some(size) => {
                        sum += size as u64;
                        sq += (size as u128) * (size as u128);
                    }
                    None => viol += 1,
                }
                (sum, sq, viol, lat)
            },
        )
        .map(|(s, q, v, _)| (s, q, v))
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    let n = trials as f64;
    let chi = sum as f64 / n;
    let ci = if trials >= 2 {
        let mean_sq = sum_sq as f64 / n;
        let var = (mean_sq - chi * chi).max(0.0) * n / (n - 1.0);
        1.96 * (var / n).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(SteppingStoneStats { chi, trials, ci, cap_violations: violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{has_crossing, is_weakly_crossed};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(radii: &[u32]) -> NeighborhoodSpec {
        NeighborhoodSpec::new(radii).unwrap()
    }

    fn cube(n: usize) -> Dims {
        Dims::new(&[n, n, n]).unwrap()
    }

    /// Fill every minicolumn that contains an occupied site.
    fn minicolumn_hull(lat: &Lattice, s: usize) -> Lattice {
        let dims = *lat.dims();
        let mut out = Lattice::empty(dims);
        for c in lat.iter_occupied() {
            let base = c[2] / s * s;
            for z in base..base + s {
                out.set([c[0], c[1], z], true);
            }
        }
        out
    }

    // ── Decomposition ────────────────────────────────────────────────────

    #[test]
    fn decompose_examples() {
        let d = decompose(&cube(12), &spec(&[1, 1, 2]), 0.1).unwrap();
        assert_eq!((d.s, d.slice_count, d.axis), (3, 4, 2));
        assert_relative_eq!(d.q, 0.271, max_relative = 1e-12);

        let d = decompose(&cube(10), &spec(&[1, 1, 1]), 0.1).unwrap();
        assert_eq!((d.s, d.slice_count), (2, 5));

        assert!(decompose(&cube(10), &spec(&[1, 1, 2]), 0.1).is_err());
        assert!(decompose(&cube(12), &spec(&[1, 2]), 0.1).is_err());
        assert!(decompose(&cube(12), &spec(&[1, 1, 2]), 0.0).is_err());
    }

    #[test]
    fn minicolumn_probability_brackets() {
        for p in [0.01, 0.1, 0.4] {
            let d = decompose(&cube(12), &spec(&[1, 1, 2]), p).unwrap();
            assert!(d.q >= p && d.q <= d.s as f64 * p);
        }
    }

    // ── Parameters ───────────────────────────────────────────────────────

    #[test]
    fn default_params_anisotropic() {
        let pr = EnhanceParams::defaults(0.01, 1, 2).unwrap();
        assert_eq!(pr.y_c, 3162);
        assert_eq!(pr.x_c, 461);
        assert_eq!(pr.flood_size, 461 * 3162);
        assert_relative_eq!(pr.d_s, 3162.2776601683795, max_relative = 1e-12);
    }

    #[test]
    fn default_params_symmetric_cap_binds() {
        // raw x_c = ⌈200 ln 200... ln(1/p)⌉ = 1060 overshoots y_c; it is
        // pulled down to keep x_c < y_c
        let pr = EnhanceParams::defaults(0.005, 1, 1).unwrap();
        assert_eq!(pr.y_c, 53);
        assert_eq!(pr.x_c, 52);
        assert_eq!(pr.flood_size, 52 * 53);
        assert!(pr.x_c < pr.y_c && (pr.y_c as f64) < pr.d_s);
    }

    #[test]
    fn params_validation() {
        assert!(EnhanceParams::new(10, 5, 5, 0.25, 0.01, 2).is_err());
        assert!(EnhanceParams::new(10, 3, 4000, 0.25, 0.01, 2).is_err());
        assert!(EnhanceParams::new(10, 0, 4, 0.25, 0.01, 2).is_err());
        assert!(EnhanceParams::new(10, 2, 4, 1.5, 0.01, 2).is_err());
        assert!(EnhanceParams::defaults(0.9, 1, 1).is_err());
    }

    // ── Enhancement steps ────────────────────────────────────────────────

    #[test]
    fn enhance_extremes() {
        let s3 = spec(&[1, 1, 2]);
        let params = EnhanceParams::defaults(0.2, 1, 1).unwrap();
        let dims = cube(12);

        let full = enhance(&Lattice::full(dims), &s3, &params).unwrap();
        assert!(full.is_full());
        assert!(is_e_crossed(&Lattice::full(dims), &s3, &params).unwrap());

        // empty input: only the two boundary slices are occupied
        let empty = enhance(&Lattice::empty(dims), &s3, &params).unwrap();
        assert_eq!(empty.occupied_count(), 2 * 3 * 12 * 12);
        assert!(empty.get([5, 5, 0]) && empty.get([5, 5, 2]) && !empty.get([5, 5, 3]));
        assert!(!is_e_crossed(&Lattice::empty(dims), &s3, &params).unwrap());
    }

    #[test]
    fn flooding_threshold_is_sharp() {
        // a 5×5 block of minicolumns in slice 1 is closed under the
        // in-plane rule and has component size exactly 25
        let dims = cube(12);
        let s3 = spec(&[1, 1, 2]);
        let mut lat = Lattice::empty(dims);
        for x in 0..5 {
            for y in 0..5 {
                lat.set([x, y, 3], true);
            }
        }
        let base = EnhanceParams::defaults(0.2, 1, 1).unwrap();

        let flooded = enhance(&lat, &s3, &EnhanceParams { flood_size: 25, ..base }).unwrap();
        assert!(flooded.get([11, 11, 4]), "slice 1 must be flooded at S = 25");

        let not = enhance(&lat, &s3, &EnhanceParams { flood_size: 26, ..base }).unwrap();
        assert!(!not.get([11, 11, 4]), "slice 1 must stay partial at S = 26");
        assert!(not.get([4, 4, 5]), "the block's minicolumns stay occupied");
    }

    #[test]
    fn enhance_output_is_union_of_minicolumns() {
        let dims = cube(12);
        let s3 = spec(&[1, 1, 2]);
        let params = EnhanceParams::defaults(0.2, 1, 1).unwrap();
        for seed in 0..5 {
            let lat = Lattice::random_fill(dims, 0.15, seed).unwrap();
            let out = enhance(&lat, &s3, &params).unwrap();
            for x in 0..12 {
                for y in 0..12 {
                    for slice in 0..4 {
                        let occ: Vec<bool> =
                            (0..3).map(|dz| out.get([x, y, slice * 3 + dz])).collect();
                        assert!(
                            occ.iter().all(|&v| v) || occ.iter().all(|&v| !v),
                            "mixed minicolumn at ({x},{y},slice {slice})"
                        );
                    }
                }
            }
            assert!(lat.subset_of(&out));
        }
    }

    #[test]
    fn enhance_dominates_weak_enhancement() {
        let dims = cube(12);
        let s3 = spec(&[1, 1, 2]);
        let base = EnhanceParams::defaults(0.2, 1, 1).unwrap();
        let params = EnhanceParams { flood_size: 25, ..base };
        for seed in 0..10 {
            let lat = Lattice::random_fill(dims, 0.2, seed).unwrap();
            let weak = weak_enhance(&lat, &s3).unwrap();
            let enhanced = enhance(&lat, &s3, &params).unwrap();
            assert!(
                minicolumn_hull(&weak, 3).subset_of(&enhanced),
                "seed {seed}: weak enhancement escaped the enhanced configuration"
            );
        }
    }

    #[test]
    fn weak_z_crossing_implies_e_crossing() {
        let dims = cube(12);
        let s3 = spec(&[1, 1, 2]);
        let params = EnhanceParams::defaults(0.2, 1, 1).unwrap();
        let mut crossings = 0;
        for seed in 0..40 {
            let lat = Lattice::random_fill(dims, 0.2, seed).unwrap();
            let weak = weak_enhance(&lat, &s3).unwrap();
            if has_crossing(&weak, 2).unwrap() {
                crossings += 1;
                assert!(is_e_crossed(&lat, &s3, &params).unwrap(), "seed {seed}");
            }
        }
        assert!(crossings > 0, "sample produced no weak z-crossings");
    }

    // ── Stepping-stone statistic ─────────────────────────────────────────

    #[test]
    fn chi_is_zero_at_zero_density() {
        let params = EnhanceParams::defaults(0.01, 1, 1).unwrap();
        let st = measure_chi(&spec(&[1, 1]), 0.0, &params, 500, 7).unwrap();
        assert_eq!(st.chi, 0.0);
        assert_eq!(st.cap_violations, 0);
        assert_eq!(st.trials, 500);
    }

    #[test]
    fn chi_is_deterministic() {
        let params = EnhanceParams::defaults(0.05, 1, 2).unwrap();
        let a = measure_chi(&spec(&[1, 2]), 0.05, &params, 2000, 42).unwrap();
        let b = measure_chi(&spec(&[1, 2]), 0.05, &params, 2000, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chi_grows_when_caps_relax() {
        // identical fills; tighter caps can only discard more mass
        let sp = spec(&[1, 1]);
        let tight = EnhanceParams { flood_size: 4, x_c: 2, y_c: 3, eps: 0.25, d_s: 1e9 };
        let loose = EnhanceParams { flood_size: 4, x_c: 20, y_c: 30, eps: 0.25, d_s: 1e9 };
        let a = measure_chi(&sp, 0.12, &tight, 4000, 9).unwrap();
        let b = measure_chi(&sp, 0.12, &loose, 4000, 9).unwrap();
        assert!(a.chi <= b.chi);
        assert!(a.cap_violations >= b.cap_violations);
    }

    #[test]
    fn chi_small_p_sanity() {
        // miniature of the √p comparison: at p = 0.01 the component of the
        // origin is almost always just the origin itself or empty
        let params = EnhanceParams::defaults(0.01, 1, 1).unwrap();
        let st = measure_chi(&spec(&[1, 1]), 0.01, &params, 20_000, 3).unwrap();
        assert!(st.chi > 0.0);
        assert!(st.chi + st.ci < 0.1, "chi = {} ci = {}", st.chi, st.ci);
        assert_eq!(st.cap_violations, 0);
    }

    #[test]
    fn chi_rejects_bad_input() {
        let params = EnhanceParams::defaults(0.01, 1, 1).unwrap();
        assert!(measure_chi(&spec(&[1, 1, 2]), 0.01, &params, 10, 0).is_err());
        assert!(measure_chi(&spec(&[1, 1]), 1.0, &params, 10, 0).is_err());
        assert!(measure_chi(&spec(&[1, 1]), 0.01, &params, 0, 0).is_err());
    }

    // ── Property tests ───────────────────────────────────────────────────

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn enhancement_contains_weak_hull(seed in 0u64..10_000, p in 0.05f64..0.3) {
            let dims = cube(6);
            let s3 = spec(&[1, 1, 1]);
            let params = EnhanceParams { flood_size: 6, x_c: 2, y_c: 3, eps: 0.25, d_s: 1e9 };
            let lat = Lattice::random_fill(dims, p, seed).unwrap();
            let weak = weak_enhance(&lat, &s3).unwrap();
            let out = enhance(&lat, &s3, &params).unwrap();
            prop_assert!(minicolumn_hull(&weak, 2).subset_of(&out));
            prop_assert!(lat.subset_of(&out));
            if is_weakly_crossed(&lat, &s3).unwrap() {
                prop_assert!(is_e_crossed(&lat, &s3, &params).unwrap());
            }
        }
    }
}
