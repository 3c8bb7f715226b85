//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! line even when all pass; exits non-zero if any fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use hyposym::conditions::{
    check_condition_s, check_condition_sprime, check_curvature_equality, check_main_assumption,
    max_sprime_radius,
};
use hyposym::config::{Command, RunConfig};
use hyposym::corpus::{self, CorpusParams};
use hyposym::curvature::curvature_field;
use hyposym::region::{build_region, erode, measure_difference, Bounds, GridRegion, Vec2};
use hyposym::run::{cutoff_contract_holds, hessian_audit, run};
use hyposym::surface::{area, make_double_graph, DoubleGraphSurface, FnHeight};
use hyposym::variation::{
    build_cutoff, claim1_bound, claim2_check, decompose_i, detect_symmetry,
    first_variation_analytic, first_variation_fd, hessian_a, random_fields, ConstantField,
    VerticalField,
};

const H: f64 = 0.01;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lift<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn three_surfaces() -> Result<Vec<DoubleGraphSurface>, String> {
    Ok(vec![
        lift(corpus::sphere(1.0, 0.0, H))?,
        lift(corpus::ellipsoid(1.0, 0.5, 0.0, H))?,
        lift(corpus::torus(2.0, 0.5, 0.0, H))?,
    ])
}

fn max_curvature_error(s: &DoubleGraphSurface, exact: f64) -> Result<f64, String> {
    Ok(lift(curvature_field(s, 0.1))?
        .iter()
        .map(|(_, c)| (c.h_upper - exact).abs().max((c.h_lower - exact).abs()))
        .fold(0.0, f64::max))
}

fn sphere_curvature() -> Outcome {
    let start = Instant::now();
    let analytic = lift(corpus::sphere(1.0, 0.0, H))?;
    let err_a = max_curvature_error(&analytic, 1.0)?;
    let region = analytic.region().clone();
    let cap = |p: Vec2| (1.0 - p.norm_squared()).max(0.0).sqrt();
    let fd = lift(make_double_graph(
        region,
        Arc::new(FnHeight(cap)),
        Arc::new(FnHeight(move |p: Vec2| -cap(p))),
        0.0,
        "sphere-fd",
    ))?;
    let err_fd = max_curvature_error(&fd, 1.0)?;
    let secs = start.elapsed().as_secs_f64();
    ensure(
        err_a <= 1e-6 && err_fd <= 1e-3 && secs < 5.0,
        format!("max |H-1| analytic {err_a:.2e} (<= 1e-6), finite differences {err_fd:.2e} (<= 1e-3), {secs:.2} s (< 5 s)"),
    )
}

fn translation_invariance() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in three_surfaces()? {
        let total = lift(area(&s, 2.0 * H))?.total;
        let fd = lift(first_variation_fd(&s, Arc::new(ConstantField(1.0)), 1e-3))?;
        let pass = fd.rate.abs() <= 1e-6 * total;
        ok &= pass;
        parts.push(format!(
            "{} {:.1e}/S={:.1e}",
            s.label(),
            fd.rate.abs(),
            fd.rate.abs() / total
        ));
    }
    ensure(ok, format!("|dS/dt| for e3: {}", parts.join(", ")))
}

fn variation_oracle() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for (i, s) in three_surfaces()?.iter().enumerate() {
        let fields = random_fields(s, 0.1, 20, 100 + i as u64);
        if fields.len() != 20 {
            return Err(format!("{}: only {} fields", s.label(), fields.len()));
        }
        for (j, f) in fields.into_iter().enumerate() {
            let f: Arc<dyn VerticalField> = Arc::new(f);
            let analytic = lift(first_variation_analytic(s, f.as_ref()))?;
            let fd = lift(first_variation_fd(s, f, 1e-3))?.rate;
            let gap = (analytic - fd).abs();
            let allowed = (1e-3 * analytic.abs().max(fd.abs())).max(1e-5);
            worst_rel = worst_rel.max(gap / allowed);
            count += 1;
            if gap > allowed {
                failures.push(format!("{}#{j}: {analytic:.6e} vs {fd:.6e}", s.label()));
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "{count} fields, worst gap/allowance {worst_rel:.3} {}",
            failures.join("; ")
        ),
    )
}

fn equality_on_symmetric() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let mut surfaces = three_surfaces()?;
    surfaces.push(lift(corpus::perturbed_sphere(0.1, H))?);
    for s in &surfaces {
        if !detect_symmetry(s, 1e-6).symmetric {
            parts.push(format!("{} skipped (asymmetric)", s.label()));
            continue;
        }
        let gap = lift(curvature_field(s, 0.1))?
            .iter()
            .map(|(_, c)| (c.h_upper - c.h_lower).abs())
            .fold(0.0, f64::max);
        ok &= gap <= 1e-3;
        parts.push(format!("{} {gap:.1e}", s.label()));
    }
    ensure(
        ok,
        format!("max |H_upper - H_lower| on R_0.1: {}", parts.join(", ")),
    )
}

fn torus_ladder() -> Outcome {
    let s = lift(corpus::torus(2.0, 0.5, 0.0, H))?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, want) in [
        (0.5, true),
        (1.0, true),
        (1.4, true),
        (1.6, false),
        (2.0, false),
    ] {
        let pass = lift(check_condition_sprime(&s, r, 0.0))?.pass;
        ok &= pass == want;
        parts.push(format!("r={r}:{}", if pass { "pass" } else { "fail" }));
    }
    let radius = lift(max_sprime_radius(&s, 0.005))?.radius;
    ok &= (radius - 1.5).abs() <= 0.02;
    let cond_s = check_condition_s(&s, 0.0);
    let witness = cond_s
        .witnesses
        .first()
        .and_then(|w| w.points.first())
        .copied();
    let witness_radius = witness.map(|p| p[0].hypot(p[1])).unwrap_or(f64::NAN);
    ok &= !cond_s.pass && (witness_radius - 1.5).abs() <= 3.0 * H;
    ensure(
        ok,
        format!(
            "{}; max radius {radius:.4}; Condition S {} with witness at |x'| = {witness_radius:.3}",
            parts.join(" "),
            if cond_s.pass { "passes" } else { "fails" }
        ),
    )
}

fn tangent_alignment() -> Outcome {
    let s = lift(corpus::torus(2.0, 0.5, 0.0, H))?;
    let (rho, r) = (0.5, 1.5);
    let rows = lift(claim2_check(&s, rho, r, &[0.2, 0.1, 0.05]))?;
    let mut ok = rows.len() == 3;
    let mut parts = Vec::new();
    for row in &rows {
        let bound = 2.0 * (2.0 * (rho + r) * row.delta / (rho * r)).sqrt();
        ok &= (row.bound - bound).abs() <= 1e-12 * bound;
        ok &= row.t3_sum.max(row.t3_normals) <= bound && row.identity_gap <= 1e-9;
        parts.push(format!(
            "delta {}: T3 {:.2e} <= {bound:.3}, identity gap {:.1e}",
            row.delta, row.t3_sum, row.identity_gap
        ));
    }
    ensure(ok, parts.join("; "))
}

fn cutoff_contract() -> Outcome {
    let s = lift(corpus::sphere(1.0, 0.0, H))?;
    let mut scaled = Vec::new();
    let mut ok = true;
    for delta in [0.3, 0.15] {
        let c = lift(build_cutoff(s.region(), delta))?;
        ok &= cutoff_contract_holds(&c) && !c.is_degenerate();
        let region = s.region();
        for k in region.inside_cells() {
            let d = region.dist(k);
            let v = c.value_at_cell(k);
            if (d > delta && v != 1.0) || (d <= delta / 3.0 && v != 0.0) {
                ok = false;
            }
        }
        scaled.push(c.sup_gradient() * delta);
    }
    let spread = (scaled[0] - scaled[1]).abs() / scaled[0].min(scaled[1]);
    ok &= spread < 0.15;
    ensure(
        ok,
        format!(
            "exact 1 on R_delta and 0 near the boundary; sup|grad|*delta = {:.3}, {:.3} (spread {:.1}%)",
            scaled[0],
            scaled[1],
            100.0 * spread
        ),
    )
}

fn hessian_bound() -> Outcome {
    let audit = hessian_audit(7, 1000);
    let at = hessian_a(&[1.0, 0.0]);
    let along = at.direction[0].abs();
    let equal = (at.lambda_min - at.bound).abs() <= 1e-12 && (along - 1.0).abs() <= 1e-12;
    ensure(
        audit.pass && audit.samples == 1000 && equal,
        format!(
            "1000 samples, worst lambda_min - bound {:.2e}; at q=(1,0) lambda_min = {:.6} along q (|cos| = {along:.12})",
            audit.worst_gap, at.lambda_min
        ),
    )
}

fn bulk_lower_bound() -> Outcome {
    let s = lift(corpus::perturbed_sphere(0.1, H))?;
    let bound = lift(claim1_bound(&s, 0.3))?;
    let mut ok = bound.a0 > 0.0;
    let mut parts = vec![format!("a0 = {:.3e}", bound.a0)];
    let mut constant = 0.0f64;
    for delta in [0.3, 0.15] {
        let c = lift(build_cutoff(s.region(), delta))?;
        let d = lift(decompose_i(&s, &c))?;
        ok &= d.i_bulk >= bound.a0;
        constant = constant.max(d.i_collar.abs() / delta.sqrt());
        parts.push(format!(
            "delta {delta}: bulk {:.4e}, collar {:.3e}",
            d.i_bulk, d.i_collar
        ));
    }
    ok &= constant.is_finite();
    parts.push(format!("collar constant {constant:.3e}"));
    ensure(ok, parts.join("; "))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let base = |surface: &str| RunConfig {
        command: Command::All,
        surface: surface.into(),
        params: CorpusParams::default(),
        h: H,
        deltas: vec![0.3],
        delta_eval: 0.1,
        r: None,
        tol: 1e-3,
        sym_tol: 1e-6,
        ht: 1e-3,
        out: None,
        csv_dir: None,
        seed: 0,
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["sphere", "ellipsoid", "torus"] {
        let rep = run(&base(name));
        let main = rep
            .conditions
            .iter()
            .any(|c| c.condition == "main_assumption" && c.pass);
        let radius = rep.sprime_radius.map(|r| r.radius).unwrap_or(0.0);
        let sym = rep
            .symmetry
            .map(|s| s.symmetric && s.max_deviation <= 1e-6)
            .unwrap_or(false);
        ok &= main && radius > 0.0 && sym && rep.summary.pass;
        parts.push(format!(
            "{name}: main {main}, S' radius {radius:.3}, symmetric {sym}"
        ));
    }
    let perturbed = run(&base("perturbed_sphere"));
    let main_fail = perturbed
        .conditions
        .iter()
        .any(|c| c.condition == "main_assumption" && !c.pass);
    ok &= main_fail && perturbed.summary.pass;
    parts.push(format!("perturbed_sphere: main fails {main_fail}"));

    let fork = run(&base("slanted_tube"));
    let eq = fork
        .conditions
        .iter()
        .find(|c| c.condition.contains("equality"))
        .map(|c| c.pass && c.tolerance <= 1e-3)
        .unwrap_or(false);
    let asym = fork.symmetry.map(|s| !s.symmetric).unwrap_or(false);
    let no_radius = fork.sprime_radius.is_none() && fork.errors.is_empty();
    ok &= eq && asym && no_radius && fork.summary.pass;
    parts.push(format!(
        "slanted_tube: equality {eq}, asymmetric {asym}, no S' radius {no_radius}"
    ));

    let s = lift(corpus::sphere(1.0, 0.0, H))?;
    ok &= lift(check_main_assumption(&s, 0.1, 1e-3))?.pass
        && lift(check_curvature_equality(&s, 0.1, 1e-3))?.pass;
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 120.0;
    parts.push(format!("{secs:.1} s"));
    ensure(ok, parts.join("; "))
}

fn erosion_ratio() -> Outcome {
    let disk = Arc::new(lift(build_region(
        |p: Vec2| p.norm() <= 1.0,
        Bounds::square(1.1),
        H,
    ))?);
    let annulus = Arc::new(lift(build_region(
        |p: Vec2| (0.5..=1.0).contains(&p.norm()),
        Bounds::square(1.1),
        H,
    ))?);
    let exact_disk = |d: f64| PI * (2.0 * d - d * d);
    let exact_annulus = |d: f64| 3.0 * PI * d;
    let mut ok = true;
    let mut parts = Vec::new();
    let cases: [(&str, &Arc<GridRegion>, &dyn Fn(f64) -> f64); 2] = [
        ("disk", &disk, &exact_disk),
        ("annulus", &annulus, &exact_annulus),
    ];
    for (name, region, exact) in cases {
        let mut ratios = Vec::new();
        for delta in [0.2, 0.1, 0.05] {
            let m = lift(measure_difference(region.as_ref(), &erode(region, delta)))?;
            ok &= (m - exact(delta)).abs() <= 0.05 * exact(delta);
            ratios.push(m / delta);
        }
        for w in ratios.windows(2) {
            ok &= w[0].is_finite() && (w[1] - w[0]).abs() <= 0.1 * w[0];
        }
        parts.push(format!(
            "{name} ratios {}",
            ratios
                .iter()
                .map(|r| format!("{r:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    ensure(ok, parts.join("; "))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("sphere curvature", sphere_curvature),
        ("translation invariance", translation_invariance),
        ("first-variation oracle", variation_oracle),
        (
            "equal curvature on symmetric surfaces",
            equality_on_symmetric,
        ),
        ("torus condition ladder", torus_ladder),
        ("tangent alignment bound", tangent_alignment),
        ("cut-off contract", cutoff_contract),
        ("area-integrand Hessian bound", hessian_bound),
        ("bulk lower bound", bulk_lower_bound),
        ("corpus end to end", end_to_end),
        ("erosion ratio", erosion_ratio),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name} [{secs:.1} s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1} s]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed, {:.1} s total",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
