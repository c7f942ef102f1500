//! Acceptance gate: one check per shipped guarantee, each printing a single
//! pass/fail line. Everything is seed-deterministic, so a green run stays
//! green at any thread count. Pass check numbers after `--` to run a subset,
//! e.g. `cargo test -p anisoboot-cli --test acceptance -- 9`.

use std::panic::catch_unwind;
use std::process::Command;
use std::time::Instant;

use anisoboot_core::bounds::{effective_densities, rect_span_upper, rect_weak_span_upper};
use anisoboot_core::droplets::simulate_growth;
use anisoboot_core::dynamics::{
    check_slab_reduction, closure, closure_naive, has_crossing, is_internally_spanned,
    weak_enhance,
};
use anisoboot_core::enhancement::{enhance, measure_chi, EnhanceParams};
use anisoboot_core::estimator::{estimate_spanning, threshold_p};
use anisoboot_core::regions::{decompose_regions, find_weakly_crossed_block, kappa_lambda};
use anisoboot_core::rng::Stream;
use anisoboot_core::{Dims, Lattice, NeighborhoodSpec};

const SEED: u64 = 7;

type Check = fn() -> Result<String, String>;

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let checks: [(&str, Check); 11] = [
        ("closure matches the naive fixpoint oracle", oracle_equivalence),
        ("spanning is monotone under coupled fills", coupled_monotonicity),
        ("radius-1 line estimates cover the closed form", line_exactness),
        ("slab fate agrees with the reduced model", slab_reduction),
        ("spanned cubes decompose into weakly crossed blocks", spanned_decomposition),
        ("rectangle bounds dominate empirical frequencies", bound_domination),
        ("conditioned component mass stays below sqrt(p)", stepping_stone_mass),
        ("slice enhancement dominates weak enhancement", enhancement_domination),
        ("square thresholds scale like 1/ln L", threshold_scaling),
        ("seeded droplets grow fastest along z", droplet_anisotropy),
        ("reruns are byte-identical at any thread count", rerun_determinism),
    ];

    let mut ran = 0usize;
    let mut failed = 0usize;
    for (i, (label, check)) in checks.iter().enumerate() {
        let id = i + 1;
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let outcome = catch_unwind(*check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| e.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("check {id:>2}  {label:<52} pass  {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("check {id:>2}  {label:<52} FAIL  {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} of {ran} checks FAILED");
        std::process::exit(1);
    }
    println!("acceptance: all {ran} checks passed");
}

fn models() -> Vec<NeighborhoodSpec> {
    [&[1u32, 1][..], &[1, 2], &[2, 3], &[1, 1, 1], &[1, 1, 2], &[2, 3, 4]]
        .iter()
        .map(|r| NeighborhoodSpec::new(r).expect("fixed radii"))
        .collect()
}

fn pick(st: Stream, counter: u64, n: usize) -> usize {
    ((st.uniform(counter) * n as f64) as usize).min(n - 1)
}

/// Random extents: sides 2..=12 in 2D, 2..=6 in 3D.
fn random_dims(st: Stream, rank: usize) -> Dims {
    let max = if rank == 3 { 6 } else { 12 };
    let ext: Vec<usize> = (0..rank).map(|d| 2 + pick(st, 1 + d as u64, max - 1)).collect();
    Dims::new(&ext).expect("positive extents")
}

// ── 1: frontier closure vs naive oracle ─────────────────────────────────

fn oracle_equivalence() -> Result<String, String> {
    let t0 = Instant::now();
    let ps = [0.05, 0.15, 0.3];
    let mut mismatches = 0u64;
    let mut lattices = 0u64;
    for (mi, spec) in models().iter().enumerate() {
        for i in 0..1_000u64 {
            let st = Stream::new(SEED).substream(1).substream(mi as u64).substream(i);
            let dims = random_dims(st, spec.rank());
            let p = ps[pick(st, 7, ps.len())];
            let lat = Lattice::random_fill(dims, p, st.bits(3)).expect("valid dims");
            let fast = closure(&lat, spec).expect("rank matches");
            let slow = closure_naive(&lat, spec).expect("rank matches");
            mismatches += (fast.final_state != slow.final_state
                || fast.generations != slow.generations) as u64;
            lattices += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if mismatches > 0 {
        return Err(format!("{mismatches}/{lattices} mismatches"));
    }
    if secs >= 120.0 {
        return Err(format!("took {secs:.0}s, budget 120s"));
    }
    Ok(format!("{lattices} lattices, 0 mismatches"))
}

// ── 2: per-sample monotonicity in p ──────────────────────────────────────

fn coupled_monotonicity() -> Result<String, String> {
    let models = models();
    let mut violations = 0u64;
    for i in 0..500u64 {
        let st = Stream::new(SEED).substream(2).substream(i);
        let spec = &models[pick(st, 0, models.len())];
        let dims = random_dims(st, spec.rank());
        let p1 = 0.02 + 0.38 * st.uniform(10);
        let p2 = (p1 + 0.02 + 0.5 * st.uniform(11)).min(0.95);
        // identical uniforms at both densities: coupled fills
        let fill = st.substream(99);
        let mut lat = Lattice::empty(dims);
        lat.refill(p1, fill);
        let sparse = is_internally_spanned(&lat, spec).expect("rank matches");
        lat.refill(p2, fill);
        let dense = is_internally_spanned(&lat, spec).expect("rank matches");
        violations += (sparse && !dense) as u64;
    }
    if violations > 0 {
        return Err(format!("{violations}/500 coupled pairs lost spanning at higher p"));
    }
    Ok("500 coupled pairs, 0 violations".into())
}

// ── 3: radius-1 line vs 1 − (1−p)^(L+1) ──────────────────────────────────

const C3_SALT: u64 = 4;

fn line_exactness() -> Result<String, String> {
    // trial counts sit where the interval's discrete coverage is decent
    let combos: [(usize, f64, u64); 6] = [
        (10, 0.001, 2_000),
        (10, 0.01, 1_250),
        (100, 0.001, 1_000),
        (100, 0.01, 2_500),
        (1000, 0.001, 6_750),
        (1000, 0.01, 4_250),
    ];
    let line = NeighborhoodSpec::new(&[1]).expect("fixed radii");
    let mut detail = String::new();
    for (ci, &(l, p, trials)) in combos.iter().enumerate() {
        let truth = 1.0 - (1.0 - p).powi(l as i32 + 1);
        let dims = Dims::new(&[l + 1]).expect("positive extent");
        let runs = Stream::new(C3_SALT).substream(ci as u64);
        let mut covered = 0u32;
        for run in 0..40u64 {
            let est = estimate_spanning(dims, p, &line, trials, runs.bits(run))
                .expect("valid inputs");
            covered += (est.ci_low <= truth && truth <= est.ci_high) as u32;
        }
        if !detail.is_empty() {
            detail.push(' ');
        }
        detail.push_str(&format!("{covered}/40"));
        if covered < 38 {
            return Err(format!(
                "L={l} p={p}: true value covered in only {covered}/40 runs"
            ));
        }
    }
    Ok(format!("coverage {detail}"))
}

// ── 4: slab reduction on (1,1,2) ─────────────────────────────────────────

fn slab_reduction() -> Result<String, String> {
    let spec = NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii");
    let ps = [0.1, 0.3, 0.5];
    let dims = Dims::new(&[12, 12]).expect("valid dims");
    let mut mismatches = 0u64;
    for axis in 0..3usize {
        for i in 0..500u64 {
            let st = Stream::new(SEED).substream(4).substream(axis as u64).substream(i);
            let p = ps[pick(st, 0, ps.len())];
            let slab = Lattice::random_fill(dims, p, st.bits(1)).expect("valid dims");
            let (full, reduced) = check_slab_reduction(&spec, axis, &slab).expect("valid slab");
            mismatches += (full != reduced) as u64;
        }
    }
    if mismatches > 0 {
        return Err(format!("{mismatches}/1500 slabs disagreed with the reduced model"));
    }
    Ok("500 slabs per axis, 0 mismatches".into())
}

// ── 5: region traces on spanned side-10 cubes ────────────────────────────

fn spanned_decomposition() -> Result<String, String> {
    let side = 10usize;
    let cases = [
        (NeighborhoodSpec::new(&[1, 1, 1]).expect("fixed radii"), 0.3),
        (NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii"), 0.45),
    ];
    let dims = Dims::cube(3, side).expect("valid dims");
    let mut instances = 0u32;
    let mut k_maxes = Vec::new();
    for (mi, (spec, p)) in cases.iter().enumerate() {
        let (kappa, lambda) = kappa_lambda(spec).expect("3D spec");
        let (kappa, lambda) = (kappa as usize, lambda as usize);
        let k_max = side.saturating_sub(lambda) / kappa;
        k_maxes.push(k_max);
        let st = Stream::new(SEED).substream(5).substream(mi as u64);
        let mut found = 0u32;
        for attempt in 0..10_000u64 {
            let lat = Lattice::random_fill(dims, *p, st.bits(attempt)).expect("valid dims");
            if !is_internally_spanned(&lat, spec).expect("rank matches") {
                continue;
            }
            let trace = decompose_regions(&lat, spec).expect("within region cap");
            trace.verify().map_err(|e| format!("{spec}: trace invariant broken: {e}"))?;
            let fin = trace.final_regions();
            if fin.len() != 1 || fin[0].diameter() != side {
                return Err(format!(
                    "{spec}: spanned cube ended as {} regions, max diameter {}",
                    fin.len(),
                    trace.max_diameter(trace.len() - 1)
                ));
            }
            for k in 1..=k_max {
                match find_weakly_crossed_block(&lat, spec, k).expect("k in range") {
                    Some(b) if (k..=kappa * k + lambda).contains(&b.longest_side()) => {}
                    Some(b) => {
                        return Err(format!(
                            "{spec}: block side {} outside [{k}, {}]",
                            b.longest_side(),
                            kappa * k + lambda
                        ))
                    }
                    None => return Err(format!("{spec}: no weakly crossed block at k = {k}")),
                }
            }
            instances += 1;
            found += 1;
            if found == 100 {
                break;
            }
        }
        if found < 100 {
            return Err(format!("{spec}: only {found}/100 spanned cubes at p = {p}"));
        }
    }
    let scales = if k_maxes.iter().all(|&k| k == 0) {
        "no admissible block scale at this side".to_string()
    } else {
        format!("block scales up to {k_maxes:?}")
    };
    Ok(format!("{instances} spanned cubes, traces verified, {scales}"))
}

// ── 6: rectangle bounds vs empirical frequencies ─────────────────────────

fn bound_domination() -> Result<String, String> {
    let trials = 100_000u64;
    let n = trials as f64;
    let radii = [(1u32, 2u32), (2, 3)];
    let mut points = 0u32;
    let mut worst = f64::NEG_INFINITY;
    for (mi, &(a, b)) in radii.iter().enumerate() {
        let spec = NeighborhoodSpec::new(&[a, b]).expect("fixed radii");
        for x in 2usize..=8 {
            for y in 2usize..=8 {
                for (pi, &p) in [0.1, 0.2, 0.3].iter().enumerate() {
                    let gi = (((mi * 3 + pi) * 9 + x) * 9 + y) as u64;
                    let st = Stream::new(SEED).substream(6).substream(gi);
                    let dims = Dims::new(&[x, y]).expect("valid dims");
                    let mut lat = Lattice::empty(dims);
                    let (mut spanned, mut weak) = (0u64, 0u64);
                    for t in 0..trials {
                        lat.refill(p, st.substream(t));
                        spanned += is_internally_spanned(&lat, &spec).expect("rank") as u64;
                        weak += weak_enhance(&lat, &spec).expect("rank").is_full() as u64;
                    }
                    let (pt, ph) = effective_densities(a, b, p).expect("valid density");
                    let span_bound =
                        rect_span_upper(x as u64, y as u64, a, b, pt, ph).expect("valid rect");
                    let weak_bound = rect_weak_span_upper(x as u64, y as u64, a, b, pt, ph)
                        .expect("valid rect");
                    for (hits, bound, what) in
                        [(spanned, span_bound, "span"), (weak, weak_bound, "weak span")]
                    {
                        if bound >= 1.0 {
                            continue; // vacuous at this density
                        }
                        let sigma = (bound * (1.0 - bound) / n).sqrt();
                        let freq = hits as f64 / n;
                        worst = worst.max((freq - bound) / sigma);
                        if freq > bound + 3.0 * sigma {
                            return Err(format!(
                                "{what} rate {freq:.4} above bound {bound:.4} + 3 sigma \
                                 at ({a},{b}) {x}x{y} p={p}"
                            ));
                        }
                    }
                    points += 1;
                }
            }
        }
    }
    Ok(format!("{points} grid points x {trials} trials, worst margin {worst:+.1} sigma"))
}

// ── 7: stepping-stone statistic ──────────────────────────────────────────

fn stepping_stone_mass() -> Result<String, String> {
    let cases = [(&[1u32, 1][..], 0.005), (&[1, 2], 0.01)];
    let mut detail = String::new();
    for (ri, (radii, p)) in cases.iter().enumerate() {
        let spec = NeighborhoodSpec::new(radii).expect("fixed radii");
        let params =
            EnhanceParams::defaults(*p, spec.radius(0), spec.radius(1)).expect("small density");
        let st = measure_chi(&spec, *p, &params, 100_000, SEED + ri as u64).expect("valid inputs");
        let cap = p.sqrt();
        if st.chi + st.ci >= cap {
            return Err(format!(
                "{spec} at p={p}: chi {:.4} + ci {:.4} reaches sqrt(p) = {cap:.4}",
                st.chi, st.ci
            ));
        }
        if !detail.is_empty() {
            detail.push_str(", ");
        }
        detail.push_str(&format!("{spec} chi+ci {:.4} < {cap:.4}", st.chi + st.ci));
    }
    Ok(detail)
}

// ── 8: slice enhancement vs weak enhancement ─────────────────────────────

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

fn enhancement_domination() -> Result<String, String> {
    let spec = NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii");
    let dims = Dims::cube(3, 12).expect("valid dims");
    let s = spec.radius(2) as usize + 1;
    let mut weak_crossings = 0u32;
    for (pi, &p) in [0.1, 0.2].iter().enumerate() {
        let params = EnhanceParams::defaults(p, 1, 1).expect("small density");
        let st = Stream::new(SEED).substream(8).substream(pi as u64);
        for i in 0..300u64 {
            let lat = Lattice::random_fill(dims, p, st.bits(i)).expect("valid dims");
            let weak = weak_enhance(&lat, &spec).expect("rank matches");
            let enhanced = enhance(&lat, &spec, &params).expect("divisible extent");
            if !minicolumn_hull(&weak, s).subset_of(&enhanced) {
                return Err(format!(
                    "p={p} case {i}: weakly enhanced site escaped its minicolumn"
                ));
            }
            if has_crossing(&weak, 2).expect("axis 2") {
                weak_crossings += 1;
                if !has_crossing(&enhanced, 2).expect("axis 2") {
                    return Err(format!("p={p} case {i}: weak z-crossing without e-crossing"));
                }
            }
        }
    }
    Ok(format!("600 cubes, 0 escapes, {weak_crossings} weak z-crossings all e-crossed"))
}

// ── 9: threshold scaling of the symmetric planar model ───────────────────

fn threshold_scaling() -> Result<String, String> {
    let t0 = Instant::now();
    let spec = NeighborhoodSpec::new(&[1, 1]).expect("fixed radii");
    let ls = [32usize, 64, 128, 256];
    let mut ths = Vec::new();
    for (li, &l) in ls.iter().enumerate() {
        let seed = Stream::new(SEED).substream(9).bits(li as u64);
        let p = threshold_p(l, &spec, 0.5, 1e-3, 1_500, seed).expect("valid inputs");
        ths.push(p);
    }
    let secs = t0.elapsed().as_secs_f64();
    for w in ths.windows(2) {
        if w[1] >= w[0] {
            return Err(format!("thresholds not strictly decreasing: {ths:?}"));
        }
    }
    let band: Vec<f64> = ls.iter().zip(&ths).map(|(&l, &p)| (l as f64).ln() * p).collect();
    let (lo, hi) = band.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi / lo >= 1.6 {
        return Err(format!("ln L * p_th spans {lo:.3}..{hi:.3}, ratio >= 1.6"));
    }
    if secs >= 1_800.0 {
        return Err(format!("took {secs:.0}s, budget 1800s"));
    }
    let ths_text: Vec<String> = ths.iter().map(|p| format!("{p:.4}")).collect();
    Ok(format!("p_th {} , ln L * p_th ratio {:.2}", ths_text.join(" "), hi / lo))
}

// ── 10: anisotropic droplet growth ───────────────────────────────────────

fn droplet_anisotropy() -> Result<String, String> {
    let spec = NeighborhoodSpec::new(&[1, 1, 2]).expect("fixed radii");
    let runs = 200u64;
    let mut diffs = Vec::with_capacity(runs as usize);
    let (mut z_sum, mut x_sum, mut filled) = (0u64, 0u64, 0u64);
    for i in 0..runs {
        let seed = Stream::new(SEED).substream(10).bits(i);
        let out = simulate_growth(&[8, 8, 2], 0.25, &[40, 40, 40], &spec, seed)
            .expect("block fits arena");
        z_sum += out.advance[2] as u64;
        x_sum += out.advance[0] as u64;
        filled += out.filled as u64;
        diffs.push(out.advance[2] as f64 - out.advance[0] as f64);
    }
    let n = runs as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = mean / (var / n).sqrt();
    // one-sided 99% quantile of Student's t at 199 degrees of freedom
    if !(t > 2.3452) {
        return Err(format!(
            "mean z advance {:.2} vs x {:.2}: t = {t:.2} <= 2.3452",
            z_sum as f64 / n,
            x_sum as f64 / n
        ));
    }
    Ok(format!(
        "{filled}/{runs} filled, mean advance z {:.1} vs x {:.1}, t = {t:.1}",
        z_sum as f64 / n,
        x_sum as f64 / n
    ))
}

// ── 11: byte-identical reruns across thread counts ───────────────────────

fn rerun_determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = dir.path().join("rows.csv");
    let (out, err, code) = run_binary(
        &["sweep", "--model", "1,1", "--L", "8,12,16", "--p", "0.1,0.15", "--trials", "400",
            "--seed", "3", "--out", csv.to_str().expect("utf-8 path")],
        &[("SOURCE_DATE_EPOCH", "1700000000")],
    );
    if code != 0 {
        return Err(format!("sweep --out failed ({code}): {err}{out}"));
    }
    let csv_arg = csv.to_str().expect("utf-8 path");

    let invocations: Vec<Vec<&str>> = vec![
        vec!["span", "--model", "1,1", "--L", "24", "--p", "0.08", "--trials", "3000",
            "--seed", "11"],
        vec!["span", "--model", "1,1,2", "--dims", "8x8x8", "--p", "0.3", "--trials", "1500",
            "--seed", "2", "--format", "json"],
        vec!["threshold", "--model", "1,1", "--L", "16", "--tol", "0.01", "--trials", "400",
            "--seed", "9"],
        vec!["sweep", "--model", "1,2", "--L", "8,12", "--p", "0.1,0.2", "--trials", "500",
            "--seed", "3"],
        vec!["sweep", "--model", "1,2", "--L", "8,12", "--p", "0.1,0.2", "--trials", "500",
            "--seed", "3", "--format", "json"],
        vec!["fit", "--model", "1,1", "--input", csv_arg],
        vec!["droplet", "plan", "--model", "1,1,2", "--p", "0.3", "--eps", "0.1"],
        vec!["droplet", "grow", "--model", "1,1,2", "--p", "0.25", "--arena", "16",
            "--block", "6x6x2", "--seed", "4", "--trials", "5"],
        vec!["bounds", "rect-span", "--model", "1,2", "--x", "6", "--y", "6", "--p", "0.1"],
        vec!["bounds", "rect-weak-span", "--model", "1,2", "--x", "6", "--y", "6", "--p", "0.1"],
        vec!["bounds", "f", "--model", "1,2", "--p", "0.1"],
        vec!["bounds", "droplet-density", "--p", "0.02"],
        vec!["bounds", "bracket", "--model", "1,2", "--p", "0.05"],
        vec!["bounds", "e-crossed", "--model", "1,1,2", "--L", "1000", "--p", "0.05"],
        vec!["bounds", "spanned", "--model", "1,1,2", "--L", "1000", "--p", "0.05"],
        vec!["verify", "--suite", "oracle", "--cases", "120", "--seed", "1"],
        vec!["enhance", "--model", "1,1,2", "--dims", "12", "--p", "0.2", "--seed", "5"],
    ];

    let env = [("SOURCE_DATE_EPOCH", "1700000000")];
    for args in &invocations {
        let mut first: Option<(String, String, i32)> = None;
        for threads in ["1", "3"] {
            let mut full = args.clone();
            full.extend(["--threads", threads]);
            let got = run_binary(&full, &env);
            match &first {
                None => first = Some(got),
                Some(prev) => {
                    if *prev != got {
                        return Err(format!("`{}` differs between thread counts", args.join(" ")));
                    }
                }
            }
        }
    }
    Ok(format!("{} invocations x 2 thread counts", invocations.len()))
}

fn run_binary(args: &[&str], envs: &[(&str, &str)]) -> (String, String, i32) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anisoboot"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        String::from_utf8(out.stderr).expect("stderr is UTF-8"),
        out.status.code().expect("exit code"),
    )
}
