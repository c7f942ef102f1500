//! Internal consistency suites behind `anisoboot verify`.
//!
//! Each suite replays, at configurable volume, one of the cross-checks the
//! library rests on: the frontier closure against the naive fixpoint
//! oracle, spanning monotonicity under coupled densities, slab reduction
//! against the lower-dimensional model, the region-decomposition
//! invariants, and domination of empirical rectangle frequencies by the
//! closed-form bounds. Failure counts are exact integers, so a run is
//! deterministic in (cases, seed) at any thread count.

use rayon::prelude::*;

use anisoboot_core::bounds::{effective_densities, rect_span_upper, rect_weak_span_upper};
use anisoboot_core::dynamics::{
    check_slab_reduction, closure, closure_naive, is_internally_spanned, weak_enhance,
};
use anisoboot_core::regions::decompose_regions;
use anisoboot_core::rng::{mix64, Stream};
use anisoboot_core::{Dims, Lattice, NeighborhoodSpec, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Monotone,
    Slab,
    Regions,
    Domination,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Oracle,
        Suite::Monotone,
        Suite::Slab,
        Suite::Regions,
        Suite::Domination,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Monotone => "monotone",
            Suite::Slab => "slab",
            Suite::Regions => "regions",
            Suite::Domination => "domination",
        }
    }

    fn default_cases(self) -> u64 {
        match self {
            Suite::Oracle => 1_000,
            Suite::Monotone => 500,
            Suite::Slab => 500,
            Suite::Regions => 200,
            // trials per rectangle grid point
            Suite::Domination => 5_000,
        }
    }
}

pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
}

pub fn run_suite(suite: Suite, cases: Option<u64>, seed: u64) -> Result<SuiteOutcome> {
    let cases = cases.unwrap_or_else(|| suite.default_cases()).max(1);
    let failures = match suite {
        Suite::Oracle => oracle(cases, seed)?,
        Suite::Monotone => monotone(cases, seed)?,
        Suite::Slab => slab(cases, seed)?,
        Suite::Regions => regions(cases, seed)?,
        Suite::Domination => domination(cases, seed)?,
    };
    Ok(SuiteOutcome { name: suite.name(), cases, failures })
}

fn pick(st: Stream, counter: u64, n: usize) -> usize {
    ((st.uniform(counter) * n as f64) as usize).min(n - 1)
}

fn models() -> Vec<NeighborhoodSpec> {
    [&[1u32, 1][..], &[1, 2], &[2, 3], &[1, 1, 1], &[1, 1, 2], &[2, 3, 4]]
        .iter()
        .map(|r| NeighborhoodSpec::new(r).expect("fixed radii"))
        .collect()
}

/// Random extents: sides 2..=12 in 2D, 2..=6 in 3D.
fn random_dims(st: Stream, rank: usize) -> Result<Dims> {
    let max = if rank == 3 { 6 } else { 12 };
    let ext: Vec<usize> = (0..rank).map(|d| 2 + pick(st, 1 + d as u64, max - 1)).collect();
    Dims::new(&ext)
}

fn oracle(cases: u64, seed: u64) -> Result<u64> {
    let models = models();
    let ps = [0.05, 0.15, 0.3];
    (0..cases)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let st = Stream::new(seed).substream(1).substream(i);
            let spec = &models[pick(st, 0, models.len())];
            let dims = random_dims(st, spec.rank())?;
            let p = ps[pick(st, 7, ps.len())];
            let lat = Lattice::random_fill(dims, p, mix64(seed ^ mix64(i)))?;
            let fast = closure(&lat, spec)?;
            let slow = closure_naive(&lat, spec)?;
            let differs = fast.final_state != slow.final_state
                || fast.generations != slow.generations;
            Ok(differs as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn monotone(cases: u64, seed: u64) -> Result<u64> {
    let models = models();
    (0..cases)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let st = Stream::new(seed).substream(2).substream(i);
            let spec = &models[pick(st, 0, models.len())];
            let dims = random_dims(st, spec.rank())?;
            let p1 = 0.02 + 0.38 * st.uniform(10);
            let p2 = (p1 + 0.02 + 0.5 * st.uniform(11)).min(0.95);
            // identical uniforms at both densities: coupled fills
            let fill = st.substream(99);
            let mut lat = Lattice::empty(dims);
            lat.refill(p1, fill);
            let sparse = is_internally_spanned(&lat, spec)?;
            lat.refill(p2, fill);
            let dense = is_internally_spanned(&lat, spec)?;
            Ok((sparse && !dense) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn slab(cases: u64, seed: u64) -> Result<u64> {
    let spec = NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii");
    let ps = [0.1, 0.3, 0.5];
    let dims = Dims::new(&[12, 12])?;
    (0..cases)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let st = Stream::new(seed).substream(3).substream(i);
            let axis = (i % 3) as usize;
            let p = ps[pick(st, 0, ps.len())];
            let lat = Lattice::random_fill(dims, p, mix64(seed ^ mix64(i ^ 0x51ab)))?;
            let (full, reduced) = check_slab_reduction(&spec, axis, &lat)?;
            Ok((full != reduced) as u64)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn regions(cases: u64, seed: u64) -> Result<u64> {
    let specs = [
        NeighborhoodSpec::new(&[1, 1, 1]).expect("fixed radii"),
        NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii"),
    ];
    let ps = [0.1, 0.2, 0.3];
    let dims = Dims::cube(3, 6)?;
    (0..cases)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let st = Stream::new(seed).substream(4).substream(i);
            let spec = &specs[(i % 2) as usize];
            let p = ps[pick(st, 0, ps.len())];
            let lat = Lattice::random_fill(dims, p, mix64(seed ^ mix64(i ^ 0x1ea1)))?;
            let trace = decompose_regions(&lat, spec)?;
            if trace.verify().is_err() {
                return Ok(1);
            }
            if is_internally_spanned(&lat, spec)? {
                let fin = trace.final_regions();
                if fin.len() != 1 || fin[0].diameter() != 6 {
                    return Ok(1);
                }
            }
            Ok(0)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn domination(trials: u64, seed: u64) -> Result<u64> {
    let models = [
        NeighborhoodSpec::new(&[1, 2]).expect("fixed radii"),
        NeighborhoodSpec::new(&[2, 3]).expect("fixed radii"),
    ];
    let mut failures = 0u64;
    for (mi, spec) in models.iter().enumerate() {
        let (a, b) = (spec.radius(0), spec.radius(1));
        for &x in &[2usize, 4, 6] {
            for &y in &[2usize, 4, 6] {
                for (pi, &p) in [0.1, 0.2, 0.3].iter().enumerate() {
                    let gi = ((mi * 3 + pi) * 7 + x) * 7 + y;
                    let st = Stream::new(seed).substream(5).substream(gi as u64);
                    let dims = Dims::new(&[x, y])?;
                    let (spanned, weak) = (0..trials)
                        .into_par_iter()
                        .fold(
                            || (0u64, 0u64, Lattice::empty(dims)),
                            |(mut s, mut w, mut lat), t| {
                                lat.refill(p, st.substream(t));
                                s += is_internally_spanned(&lat, spec)
                                    .expect("validated shapes") as u64;
                                w += weak_enhance(&lat, spec)
                                    .expect("validated shapes")
                                    .is_full() as u64;
                                (s, w, lat)
                            },
                        )
                        .map(|(s, w, _)| (s, w))
                        .reduce(|| (0, 0), |l, r| (l.0 + r.0, l.1 + r.1));

                    let (pt, ph) = effective_densities(a, b, p)?;
                    if pt >= 1.0 || ph >= 1.0 {
                        continue; // bound vacuous at this density
                    }
                    let n = trials as f64;
                    let check = |hits: u64, bound: f64| {
                        if bound >= 1.0 {
                            return 0; // nothing to dominate
                        }
                        let sigma = (bound * (1.0 - bound) / n).sqrt();
                        (hits as f64 / n > bound + 3.0 * sigma) as u64
                    };
                    let (xu, yu) = (x as u64, y as u64);
                    failures += check(spanned, rect_span_upper(xu, yu, a, b, pt, ph)?);
                    failures += check(weak, rect_weak_span_upper(xu, yu, a, b, pt, ph)?);
                }
            }
        }
    }
    Ok(failures)
}
