//! Batch runner: one command per invocation, artifacts land in --out.
//!
//! Every flag can also come from a config file of flat `key=value` lines
//! (keys named like the flags); explicit flags win. Exit codes: 0 success,
//! 2 validation or usage error, 3 a run that finished but failed its goal
//! (non-convergence, failed verification).

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use hplateau::energy::{breakdown, identity_residual, volume_identity_residual};
use hplateau::intersect::{default_tolerance, is_embedded};
use hplateau::io::{read_curve_file, read_hpmesh, write_hpmesh, write_hpmesh_file};
use hplateau::refmap::disk_reference_map;
use hplateau::region::{fan_region, surface_area};
use hplateau::scenarios::registry::{
    run_scenario, scenario_curve, write_scenario, ScenarioParams, SCENARIO_IDS,
};
use hplateau::scenarios::{gamma1, gamma2, spherical_cap, Gamma1Params, Gamma2Params};
use hplateau::solver::{
    initialize_sweep, minimize_ih, near_feasibility_warning, rellich_pair, SolveOptions,
};
use hplateau::{AmbientDomain, BoundaryCurve, Error, MetricField, Result, Side};

#[derive(Parser)]
#[command(name = "hplateau", version, about = "Prescribed-mean-curvature disk runner")]
struct Cli {
    /// Config file of key=value lines supplying defaults for the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the disk energy over one side of a boundary curve.
    Solve(SolveArgs),
    /// Solve both sides of the curve and compare the pair.
    Rellich(SolveArgs),
    /// Evaluate the staircase family and fit the energy slope in n.
    Counterexample(CounterexampleArgs),
    /// Run the built-in consistency suite.
    Verify(VerifyArgs),
    /// Build named scenarios and write their meshes and manifests.
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Ambient domain: ball:R or modcyl:EPS.
    #[arg(long)]
    domain: Option<String>,
    /// Boundary curve: equator, latitude:RHO, gamma1_bridge,
    /// gamma2_symmetric, or a path to a curve JSON file.
    #[arg(long)]
    curve: Option<String>,
    /// Prescribed mean curvature.
    #[arg(long = "H")]
    h: Option<f64>,
    /// Side of the curve to span: minus or plus.
    #[arg(long)]
    side: Option<String>,
    /// Rim sample count for generated curves.
    #[arg(long)]
    resolution: Option<usize>,
    /// Convergence threshold on the 95th-percentile curvature defect.
    #[arg(long)]
    tol: Option<f64>,
    /// Descent step budget per refinement level.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Recorded in the report; the descent itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CounterexampleArgs {
    /// Prescribed mean curvature; the fitted slope should be 2 pi (1 - H).
    #[arg(long = "H")]
    h: Option<f64>,
    /// Largest staircase height in the sweep.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct VerifyArgs {
    /// Seed for the randomized identity checks.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OracleArgs {
    /// Scenario id; omit to build all of them.
    scenario: Option<String>,
    #[arg(long = "H")]
    h: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; scenarios are independent and the output order is
    /// fixed regardless.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.config.as_deref().map(load_config).transpose() {
        Ok(map) => map.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a, &config),
        Command::Rellich(a) => cmd_rellich(a, &config),
        Command::Counterexample(a) => cmd_counterexample(a, &config),
        Command::Verify(a) => cmd_verify(a, &config),
        Command::Oracle(a) => cmd_oracle(a, &config),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Fill a missing flag from the config map, named like the flag itself.
fn fill<T: FromStr>(slot: &mut Option<T>, config: &HashMap<String, String>, key: &str) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if slot.is_none() {
        if let Some(raw) = config.get(key) {
            *slot = Some(raw.parse().map_err(|e| {
                Error::Invalid(format!("config key {key} = {raw:?}: {e}"))
            })?);
        }
    }
    Ok(())
}

fn parse_domain(spec: &str) -> Result<AmbientDomain> {
    if let Some(r) = spec.strip_prefix("ball:") {
        let radius: f64 = r
            .parse()
            .map_err(|e| Error::Invalid(format!("bad ball radius: {e}")))?;
        if !(radius > 0.0) {
            return Err(Error::Invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(AmbientDomain::Ball { radius })
    } else if let Some(e) = spec.strip_prefix("modcyl:") {
        let eps: f64 = e
            .parse()
            .map_err(|e| Error::Invalid(format!("bad blend width: {e}")))?;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Invalid(format!("blend width must be in (0, 0.5), got {eps}")));
        }
        Ok(AmbientDomain::ModifiedCylinder { eps })
    } else {
        Err(Error::Invalid(format!(
            "unknown domain {spec:?}; expected ball:R or modcyl:EPS"
        )))
    }
}

fn resolve_curve(spec: &str, params: &ScenarioParams) -> Result<BoundaryCurve> {
    let path = Path::new(spec);
    if path.exists() {
        read_curve_file(path)
    } else {
        scenario_curve(spec, params)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn merge_solve(a: &mut SolveArgs, config: &HashMap<String, String>) -> Result<()> {
    fill(&mut a.domain, config, "domain")?;
    fill(&mut a.curve, config, "curve")?;
    fill(&mut a.h, config, "H")?;
    fill(&mut a.side, config, "side")?;
    fill(&mut a.resolution, config, "resolution")?;
    fill(&mut a.tol, config, "tol")?;
    fill(&mut a.max_iters, config, "max-iters")?;
    fill(&mut a.seed, config, "seed")?;
    fill(&mut a.out, config, "out")?;
    Ok(())
}

fn solve_setup(a: &SolveArgs) -> Result<(AmbientDomain, f64, BoundaryCurve, SolveOptions, PathBuf)> {
    let domain = parse_domain(a.domain.as_deref().unwrap_or("ball:1"))?;
    let h = a.h.unwrap_or(0.5);
    domain.require_feasible(h)?;
    let params = ScenarioParams {
        h,
        resolution: a.resolution,
        ..ScenarioParams::default()
    };
    let curve = resolve_curve(a.curve.as_deref().unwrap_or("equator"), &params)?;
    if curve.domain != domain {
        return Err(Error::Invalid(
            "the curve lives on the unit sphere; use --domain ball:1".into(),
        ));
    }
    if let Some(warning) = near_feasibility_warning(&domain, h) {
        eprintln!("warning: {warning}");
    }
    let mut opts = SolveOptions {
        seed: a.seed.unwrap_or(0),
        ..SolveOptions::default()
    };
    if let Some(tol) = a.tol {
        opts.residual_tol = tol;
    }
    if let Some(iters) = a.max_iters {
        opts.max_iterations = iters;
    }
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    Ok((domain, h, curve, opts, out))
}

fn cmd_solve(mut a: SolveArgs, config: &HashMap<String, String>) -> Result<u8> {
    merge_solve(&mut a, config)?;
    let side: Side = a.side.as_deref().unwrap_or("minus").parse()?;
    let (domain, h, curve, mut opts, out) = solve_setup(&a)?;
    opts.side = side;
    let init = initialize_sweep(&curve, &domain, side)?;
    let (disk, report) = minimize_ih(&init, &curve, &domain, h, &opts)?;
    write_hpmesh_file(&out.join(format!("disk_{}.hpmesh", side.label())), &disk)?;
    write_json(&out.join("report.json"), &report)?;
    println!(
        "solve side={} H={h}: converged={} iterations={} residual={:.3e} area={:.6} embedded={}",
        side.label(),
        report.converged,
        report.iterations,
        report.residual,
        report.energies.area,
        report.embedded,
    );
    Ok(if report.converged { 0 } else { 3 })
}

fn cmd_rellich(mut a: SolveArgs, config: &HashMap<String, String>) -> Result<u8> {
    merge_solve(&mut a, config)?;
    let (domain, h, curve, opts, out) = solve_setup(&a)?;
    let (disk_minus, disk_plus, pair) = rellich_pair(&curve, &domain, h, &opts)?;
    write_hpmesh_file(&out.join("disk_minus.hpmesh"), &disk_minus)?;
    write_hpmesh_file(&out.join("disk_plus.hpmesh"), &disk_plus)?;
    write_json(&out.join("report.json"), &pair)?;
    let ok = pair.report_minus.converged && pair.report_plus.converged;
    println!(
        "rellich H={h}: converged={ok} hausdorff={:.6} embedded=({}, {}) graphs=({}, {})",
        pair.hausdorff,
        pair.report_minus.embedded,
        pair.report_plus.embedded,
        pair.graph_minus,
        pair.graph_plus,
    );
    Ok(if ok { 0 } else { 3 })
}

fn cmd_counterexample(mut a: CounterexampleArgs, config: &HashMap<String, String>) -> Result<u8> {
    fill(&mut a.h, config, "H")?;
    fill(&mut a.n_max, config, "n-max")?;
    fill(&mut a.seed, config, "seed")?;
    fill(&mut a.out, config, "out")?;
    let params = ScenarioParams {
        h: a.h.unwrap_or(0.5),
        n_max: a.n_max.unwrap_or(10),
        ..ScenarioParams::default()
    };
    let scenario = run_scenario("counterexample_straight", &params)?;
    let out = a.out.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    for (stem, mesh) in &scenario.meshes {
        write_hpmesh_file(&out.join(format!("{stem}.hpmesh")), mesh)?;
    }
    write_json(&out.join("report.json"), &scenario.manifest)?;
    let fitted = scenario.manifest["measured"]["slope_fitted"]
        .as_f64()
        .expect("manifest carries the fit");
    let reference = scenario.manifest["reference"]["slope"]
        .as_f64()
        .expect("manifest carries the formula value");
    println!(
        "counterexample H={} n=1..{}: slope {fitted:.9} vs 2 pi (1 - H) = {reference:.9}",
        params.h, params.n_max,
    );
    Ok(0)
}

fn cmd_oracle(mut a: OracleArgs, config: &HashMap<String, String>) -> Result<u8> {
    fill(&mut a.scenario, config, "scenario")?;
    fill(&mut a.h, config, "H")?;
    fill(&mut a.resolution, config, "resolution")?;
    fill(&mut a.n_max, config, "n-max")?;
    fill(&mut a.seed, config, "seed")?;
    fill(&mut a.out, config, "out")?;
    fill(&mut a.jobs, config, "jobs")?;
    let params = ScenarioParams {
        h: a.h.unwrap_or(0.5),
        resolution: a.resolution,
        n_max: a.n_max.unwrap_or(10),
        ..ScenarioParams::default()
    };
    let ids: Vec<String> = match a.scenario {
        Some(id) => vec![id],
        None => SCENARIO_IDS.iter().map(|s| s.to_string()).collect(),
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from("."));
    let jobs = a.jobs.unwrap_or(1).max(1).min(ids.len().max(1));

    // Fan the ids over the workers, keep results indexed so the output
    // order never depends on thread timing.
    let mut results: Vec<Option<Result<usize>>> = Vec::new();
    results.resize_with(ids.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= ids.len() {
                    break;
                }
                let outcome = run_scenario(&ids[i], &params)
                    .and_then(|s| write_scenario(&s, &out.join(&ids[i])))
                    .map(|written| written.len());
                slots.lock().expect("no panics hold the slot lock")[i] = Some(outcome);
            });
        }
    });
    for (id, slot) in ids.iter().zip(results) {
        let count = slot.expect("every index was claimed")?;
        println!("oracle {id}: wrote {count} files under {}", out.join(id).display());
    }
    Ok(0)
}

struct Suite {
    checks: Vec<serde_json::Value>,
    all_ok: bool,
}

impl Suite {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "ok  " } else { "FAIL" });
        self.checks.push(json!({ "name": name, "pass": pass, "detail": detail }));
        self.all_ok &= pass;
    }
}

fn cmd_verify(mut a: VerifyArgs, config: &HashMap<String, String>) -> Result<u8> {
    fill(&mut a.seed, config, "seed")?;
    fill(&mut a.out, config, "out")?;
    let seed = a.seed.unwrap_or(0);
    let mut suite = Suite {
        checks: Vec::new(),
        all_ok: true,
    };

    // Closed-form cap against its own mesh quadrature.
    let cap = spherical_cap(0.0, 1.0, 0.5, 128, Side::Minus)?;
    let mesh_area = surface_area(&cap.mesh, &MetricField::Euclidean);
    let gap = ((mesh_area - cap.area) / cap.area).abs();
    suite.record(
        "cap_quadrature",
        gap < 0.01,
        format!("mesh area {mesh_area:.6} vs closed form {:.6} (gap {gap:.2e})", cap.area),
    );

    // The text format must reproduce the mesh byte for byte.
    let text = write_hpmesh(&cap.mesh);
    let round = write_hpmesh(&read_hpmesh(&text)?);
    suite.record(
        "hpmesh_round_trip",
        text == round,
        format!("{} bytes", text.len()),
    );

    // Staircase slope against the formula.
    let params = ScenarioParams {
        h: 1.5,
        n_max: 4,
        segments: 512,
        ..ScenarioParams::default()
    };
    let manifest = run_scenario("counterexample_straight", &params)?.manifest;
    let fitted = manifest["measured"]["slope_fitted"].as_f64().unwrap();
    let reference = manifest["reference"]["slope"].as_f64().unwrap();
    let rel = ((fitted - reference) / reference).abs();
    suite.record(
        "staircase_slope",
        rel < 1e-3,
        format!("fitted {fitted:.6} vs {reference:.6} (rel {rel:.2e})"),
    );

    // The functional identities on seeded random fan regions.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = rng.gen_range(6..=12);
        let rim: Vec<_> = (0..k)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                nalgebra::Point3::new(
                    a.cos() + rng.gen_range(-0.2..0.2),
                    a.sin() + rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.3..0.3),
                )
            })
            .collect();
        let region = fan_region(
            &rim,
            nalgebra::Point3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(0.5..1.2)),
            nalgebra::Point3::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-1.2..-0.5)),
        )?;
        let map = disk_reference_map(&region.disk)?;
        let b = breakdown(&map, &region, &MetricField::Euclidean, rng.gen_range(0.1..0.9))?;
        let scale = b.f_h.abs().max(1.0);
        worst = worst
            .max(identity_residual(&b) / scale)
            .max(volume_identity_residual(&b) / scale);
    }
    suite.record(
        "functional_identities",
        worst <= 1e-9,
        format!("worst relative residual {worst:.2e} over 20 random maps"),
    );

    // The bridged fixture self-intersects; the symmetric weave mirrors.
    let bridged = gamma1(&Gamma1Params::default(), 0.5)?;
    let fixture = bridged.fixture.expect("bridged construction has a fixture");
    let crossed = !is_embedded(&fixture, default_tolerance(&fixture));
    suite.record(
        "bridged_fixture_crosses",
        crossed,
        "two caps of radius 2 over circles at z = +/-0.1".into(),
    );
    let weave = gamma2(&Gamma2Params::default(), 0.5)?;
    let samples = &weave.curve.samples;
    let l = samples.len();
    let mirror_gap = (0..l)
        .map(|i| {
            let p = samples[i];
            let q = samples[(l - i) % l];
            ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z + q.z).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    suite.record(
        "weave_mirror_symmetry",
        mirror_gap <= 1e-9,
        format!("largest gap {mirror_gap:.2e}"),
    );

    // End to end: a coarse equator solve should converge onto the cap.
    let curve = scenario_curve("equator", &ScenarioParams {
        resolution: Some(48),
        ..ScenarioParams::default()
    })?;
    let domain = AmbientDomain::unit_ball();
    let opts = SolveOptions {
        seed,
        ..SolveOptions::default()
    };
    let init = initialize_sweep(&curve, &domain, Side::Minus)?;
    let (disk, report) = minimize_ih(&init, &curve, &domain, 0.5, &opts)?;
    let solved_area = surface_area(&disk, &MetricField::Euclidean);
    let area_gap = ((solved_area - cap.area) / cap.area).abs();
    suite.record(
        "equator_solve",
        report.converged && area_gap < 0.05,
        format!(
            "converged={} residual={:.2e} area gap {area_gap:.2e} at 48 rim samples",
            report.converged, report.residual,
        ),
    );

    let passed = suite.all_ok;
    if let Some(out) = a.out {
        std::fs::create_dir_all(&out)?;
        write_json(
            &out.join("report.json"),
            &json!({ "seed": seed, "passed": passed, "checks": suite.checks }),
        )?;
    }
    println!("verify: {}", if passed { "all checks passed" } else { "FAILURES" });
    Ok(if passed { 0 } else { 3 })
}
