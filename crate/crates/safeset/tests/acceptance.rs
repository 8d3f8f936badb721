//! Acceptance suite: nine criteria, each with its tolerance and runtime
//! limit. Prints one PASS/FAIL line per criterion and fails if any does.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use safeset::config::{AnalysisConfig, OssChoice};
use safeset::{analyze_dataset, emit_report, Analysis};
use safeset_core::geometry::{alpha_complex, delaunay, mc_volume, search_optimal_alpha, Membership};
use safeset_core::metrics::{
    loop_epsilon_bar, epsilon_bar_bruteforce, epsilon_bar_exact, epsilon_from_count, fatality_rate_bound,
    trailing_run_pmf,
};
use safeset_core::oss::{OssState, StateTrajectory};
use safeset_core::safe_set::extract_safe_states;
use safeset_core::simgen::{ncap_battery, IDM_0, IDM_1};
use safeset_core::ReachMode;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fatality_table() -> Outcome {
    let table = [(3276.48, 0.0034), (551.81, 0.0199), (5725.99, 0.0019), (40.778, 0.2386), (399.195, 0.0275)];
    let mut worst: f64 = 0.0;
    for (km, want) in table {
        let got = fatality_rate_bound(km, 0.001, false).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 5e-4, || format!("{km} km: {got} vs {want}"))?;
    }
    Ok(format!("max abs error {worst:.2e}"))
}

fn epsilon_oracles() -> Outcome {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for beta in [0.5, 0.1, 0.001] {
        for total in 1..=8usize {
            for s in 0..=total {
                let c = total - s;
                let mut labels = vec![true; s];
                labels.extend(vec![false; c]);
                let exact = epsilon_bar_exact(s, c, beta).map_err(|e| e.to_string())?;
                let brute = epsilon_bar_bruteforce(&labels, beta, 10).map_err(|e| e.to_string())?;
                worst = worst.max((exact - brute).abs());
                ensure((exact - brute).abs() <= 1e-12, || format!("s={s} c={c} beta={beta}: {exact} vs {brute}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases, max diff {worst:.1e}"))
}

fn quantification_loop_fidelity() -> Outcome {
    let b = 0.001;
    let e = |n| epsilon_from_count(n, b).unwrap();
    let a3 = |s, t| loop_epsilon_bar(s, t, b).unwrap();
    let third = 1.0 / 3.0;
    ensure(a3(1, 2) == e(1) * 0.5, || format!("(1,2): {}", a3(1, 2)))?;
    ensure(a3(2, 3) == e(1) * third + e(2) * third, || format!("(2,3): {}", a3(2, 3)))?;
    ensure(a3(3, 3) == e(1) * third + e(2) * third + e(3), || format!("(3,3): {}", a3(3, 3)))?;
    ensure((a3(1, 2) - 0.4995).abs() < 1e-15, || "(1,2) decimal value".into())?;
    // s = 2, c = 2: the loop weights N = 1 by 1/C(4,1) = 1/4, the replay
    // distribution gives P(N = 1) = 1/3.
    let pmf = trailing_run_pmf(2, 2).unwrap();
    ensure((pmf[1] - third).abs() < 1e-15, || format!("P(N=1) = {}", pmf[1]))?;
    let loop_value = a3(2, 4);
    let replay = epsilon_bar_exact(2, 2, b).unwrap();
    ensure((loop_value - (e(1) / 4.0 + e(2) / 6.0)).abs() < 1e-15, || format!("loop {loop_value}"))?;
    ensure((replay - (0.5 + e(1) / 3.0 + e(2) / 6.0)).abs() < 1e-15, || format!("replay {replay}"))?;
    ensure(replay - loop_value > 0.5, || "the two expectations should differ".into())?;
    Ok(format!("(2,2): loop {loop_value:.6}, replay {replay:.6}"))
}

/// Volume of the convex hull of points in general position, from every
/// supporting triangle.
fn hull_volume_oracle(p: &[[f64; 3]]) -> f64 {
    let n = p.len();
    let mut c = [0.0; 3];
    for q in p {
        for k in 0..3 {
            c[k] += q[k] / n as f64;
        }
    }
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let det = |a: [f64; 3], b: [f64; 3], d: [f64; 3]| {
        a[0] * (b[1] * d[2] - b[2] * d[1]) - a[1] * (b[0] * d[2] - b[2] * d[0]) + a[2] * (b[0] * d[1] - b[1] * d[0])
    };
    let mut vol = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (u, v) = (sub(p[j], p[i]), sub(p[k], p[i]));
                let mut pos = false;
                let mut neg = false;
                for (m, q) in p.iter().enumerate() {
                    if m == i || m == j || m == k {
                        continue;
                    }
                    let s = det(u, v, sub(*q, p[i]));
                    pos |= s > 0.0;
                    neg |= s < 0.0;
                }
                if pos != neg {
                    vol += det(sub(p[i], c), sub(p[j], c), sub(p[k], c)).abs() / 6.0;
                }
            }
        }
    }
    vol
}

fn alpha_shape_correctness() -> Outcome {
    let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
    let cx = Arc::new(delaunay(&square, 6).map_err(|e| e.to_string())?);
    for a in [0.71, 1.0, 10.0] {
        let m = alpha_complex(cx.clone(), a).measure();
        ensure((m - 1.0).abs() < 1e-12, || format!("measure {m} at alpha {a}"))?;
    }
    let m = alpha_complex(cx.clone(), 0.4).measure();
    ensure(m == 0.0, || format!("measure {m} at alpha 0.4"))?;
    let search = search_optimal_alpha(&square, 0.01, 100.0, 0.1, 6).map_err(|e| e.to_string())?;
    let star = search.alpha_star;
    ensure((star - 0.7071).abs() <= 0.1, || format!("alpha* = {star}"))?;
    ensure(search.is_monotone(), || "search probes are not monotone".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(8..40);
        let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
        let vecs: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        let cx = Arc::new(delaunay(&vecs, 6).map_err(|e| e.to_string())?);
        let diameter = 3f64.sqrt();
        let got = alpha_complex(cx, 1e6 * diameter).measure();
        let want = hull_volume_oracle(&pts);
        let rel = (got - want).abs() / want;
        worst = worst.max(rel);
        ensure(rel <= 1e-9, || format!("hull limit {got} vs {want}"))?;
    }
    Ok(format!("alpha* = {star:.4}, hull-limit max rel err {worst:.1e}"))
}

fn mc_calibration() -> Outcome {
    let disc = |p: &[f64]| p[0] * p[0] + p[1] * p[1] <= 1.0;
    let ball = |p: &[f64]| p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cloud: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.gen::<f64>()).collect()).collect();
    let arr: Vec<[f64; 3]> = cloud.iter().map(|p| [p[0], p[1], p[2]]).collect();
    let hull = alpha_complex(Arc::new(delaunay(&cloud, 6).map_err(|e| e.to_string())?), 1e6);
    let hull_exact = hull_volume_oracle(&arr);
    let mut report = Vec::new();
    let fixtures: [(&str, f64, usize); 3] =
        [("disc", std::f64::consts::PI, 2), ("ball", 4.0 * std::f64::consts::PI / 3.0, 3), ("hull", hull_exact, 3)];
    for (name, exact, dim) in fixtures {
        let (lo, hi) = if name == "hull" { (vec![0.0; dim], vec![1.0; dim]) } else { (vec![-1.0; dim], vec![1.0; dim]) };
        let mut covered = 0;
        for seed in 0..100u64 {
            let v = match name {
                "disc" => mc_volume(disc, &lo, &hi, 4000, seed),
                "ball" => mc_volume(ball, &lo, &hi, 4000, seed),
                _ => mc_volume(|p| hull.contains(p).unwrap_or(false), &lo, &hi, 4000, seed),
            }
            .map_err(|e| e.to_string())?;
            covered += usize::from((v.estimate - exact).abs() <= v.half_width_95);
        }
        ensure(covered >= 93, || format!("{name}: {covered}/100 intervals cover"))?;
        report.push(format!("{name} {covered}/100"));
    }
    Ok(report.join(", "))
}

fn state(v: f64, unsafe_: bool, tid: &str, i: usize) -> OssState {
    OssState { values: vec![v, 0.0, 0.0], time: i as f64, frame: i as u64, trajectory_id: tid.into(), is_unsafe: unsafe_ }
}

fn pruning_traces() -> Outcome {
    let chain = StateTrajectory::from_states("safe".into(), (1..=3).map(|i| state(i as f64, false, "safe", i)).collect());
    let hit = StateTrajectory::from_states("hit".into(), vec![state(2.0, true, "hit", 0)]);
    let ts = vec![chain.clone(), hit];
    let sorted = |mode| {
        let (ds, _) = extract_safe_states(&ts, mode, 0.0);
        let mut v: Vec<f64> = ds.points().iter().map(|p| p[0]).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let undirected = sorted(ReachMode::Undirected);
    ensure(undirected.is_empty(), || format!("undirected: {undirected:?}"))?;
    let ancestors = sorted(ReachMode::Ancestors);
    ensure(ancestors == [3.0], || format!("ancestors: {ancestors:?}"))?;
    let (all, _) = extract_safe_states(&[chain], ReachMode::Undirected, 0.0);
    let mut v: Vec<f64> = all.points().iter().map(|p| p[0]).collect();
    v.sort_by(f64::total_cmp);
    ensure(v == [1.0, 2.0, 3.0], || format!("no unsafe: {v:?}"))?;
    Ok("undirected {}, ancestors {s3}, no-unsafe {s1,s2,s3}".into())
}

fn ncap_config(seed: u64) -> AnalysisConfig {
    AnalysisConfig {
        input: "ncap-battery.csv".into(),
        oss: OssChoice::Preset("ncap-lead".into()),
        seed,
        ..Default::default()
    }
}

fn ncap_run(name: &str, idm: &safeset_core::simgen::IdmParams) -> Result<Analysis, String> {
    let d = ncap_battery(idm, 0).map_err(|e| e.to_string())?;
    ensure(d.has_collisions(), || format!("{name}: battery has no collision"))?;
    analyze_dataset(&ncap_config(0), d).map_err(|e| format!("{name}: {e}"))
}

fn ncap_properties() -> Outcome {
    let mut out = Vec::new();
    for (name, idm) in [("IDM_0", IDM_0), ("IDM_1", IDM_1)] {
        let run = ncap_run(name, &idm)?;
        let r = &run.report;
        ensure(r.dataset.collision_events >= 1, || format!("{name}: no collisions"))?;
        ensure(r.shape.exclusion_passed, || format!("{name}: exclusion check failed"))?;
        ensure(r.epsilon.c_count >= 1, || format!("{name}: c = 0"))?;
        ensure(r.safe_states.proper_subset, || format!("{name}: D_s is not a proper subset"))?;
        let occ = r.coverage.occupancy;
        ensure(occ > 0.0 && occ <= 1.0, || format!("{name}: occupancy {occ}"))?;
        let eps = r.epsilon.epsilon_bar_exact;
        ensure(eps > 0.0 && eps < 1.0, || format!("{name}: epsilon {eps}"))?;
        ensure(r.baseline.fatality_bound.is_none(), || format!("{name}: mileage bound despite collisions"))?;
        out.push(format!("{name}: {} collisions, occupancy {occ:.4}, eps {eps:.4}", r.dataset.collision_events));
    }
    Ok(out.join("; "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for (name, idm) in [("IDM_0", IDM_0), ("IDM_1", IDM_1)] {
        let mut files = Vec::new();
        for rep in 0..2 {
            let run = ncap_run(name, &idm)?;
            let sub = dir.path().join(format!("{name}-{rep}"));
            emit_report(&run.report, &run.spec, &run.outcome, &sub).map_err(|e| e.to_string())?;
            files.push(std::fs::read(sub.join("report.json")).map_err(|e| e.to_string())?);
        }
        ensure(files[0] == files[1], || format!("{name}: reports differ"))?;
        sizes.push(format!("{name} {} bytes", files[0].len()));
    }
    Ok(format!("identical reports ({})", sizes.join(", ")))
}

fn pipeline_13d() -> Outcome {
    let d = common::multilane();
    let frames: std::collections::BTreeSet<(&str, u64)> = d.samples().iter().map(|s| (s.trajectory_id.as_str(), s.frame)).collect();
    let lanes: std::collections::BTreeSet<i64> = d.samples().iter().filter_map(|s| s.lane_id).collect();
    ensure(frames.len() == 2000 && lanes.len() == 3, || format!("{} frames, {} lanes", frames.len(), lanes.len()))?;
    let cfg = AnalysisConfig {
        input: "multilane.csv".into(),
        oss: OssChoice::Preset("highd-multi".into()),
        cluster_max: Some(1000),
        ..Default::default()
    };
    let run = analyze_dataset(&cfg, d).map_err(|e| e.to_string())?;
    let r = &run.report;
    ensure(r.state_space.dimension_names.len() == 13, || "not 13-dimensional".into())?;
    ensure(r.shape.exclusion_passed, || "exclusion check failed".into())?;
    ensure(r.shape.members.iter().all(|m| m.size <= 1000), || "a cluster exceeds 1000 points".into())?;
    ensure(r.shape.clusters >= 2, || format!("{} clusters", r.shape.clusters))?;
    let ds = run.outcome.safe_states.points();
    ensure(!ds.is_empty(), || "empty D_s".into())?;
    let mut missing = 0;
    for p in ds {
        missing += usize::from(!run.outcome.contains(p).map_err(|e| e.to_string())?);
    }
    ensure(missing == 0, || format!("{missing} of {} D_s points outside the shape", ds.len()))?;
    Ok(format!(
        "{} D_s points in {} clusters (sizes {:?}), {} excluded states outside",
        ds.len(),
        r.shape.clusters,
        r.shape.members.iter().map(|m| m.size).collect::<Vec<_>>(),
        r.shape.excluded_states
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "fatality-rate table", limit: Duration::from_millis(1), run: fatality_table },
        Criterion { id: 2, name: "epsilon oracle equivalence", limit: Duration::from_secs(10), run: epsilon_oracles },
        Criterion { id: 3, name: "quantification loop fidelity", limit: Duration::from_secs(1), run: quantification_loop_fidelity },
        Criterion { id: 4, name: "alpha-shape correctness", limit: Duration::from_secs(30), run: alpha_shape_correctness },
        Criterion { id: 5, name: "Monte-Carlo calibration", limit: Duration::from_secs(60), run: mc_calibration },
        Criterion { id: 6, name: "safe-state pruning traces", limit: Duration::from_secs(1), run: pruning_traces },
        Criterion { id: 7, name: "NCAP-style end-to-end", limit: Duration::from_secs(120), run: ncap_properties },
        Criterion { id: 8, name: "report determinism", limit: Duration::from_secs(240), run: determinism },
        Criterion { id: 9, name: "13-D pipeline", limit: Duration::from_secs(300), run: pipeline_13d },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str()) || c.id.to_string() == *f) {
            continue;
        }
        let t0 = Instant::now();
        let result = (c.run)();
        let elapsed = t0.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= c.limit => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("over the {:?} limit; {detail}", c.limit)),
            Err(e) => ("FAIL", e),
        };
        failed += usize::from(verdict.0 == "FAIL");
        println!("criterion {} [{}] {}: {:.3?} (limit {:?}) {}", c.id, verdict.0, c.name, elapsed, c.limit, verdict.1);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
