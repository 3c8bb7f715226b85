//! Run orchestration and the JSON report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_condition_s, check_condition_s_curve, check_condition_sprime,
    check_condition_sprime_curve, check_curvature_equality, check_main_assumption,
    check_pairwise_main_assumption, max_sprime_radius, max_sprime_radius_curve, ConditionVerdict,
    PairwiseOptions, SprimeRadius,
};
use crate::config::{Command, RunConfig};
use crate::corpus::{
    corpus, expected_profile, interior_ball_radius, CorpusEntry, ExpectedProfile, CURVE_NAMES,
    SURFACE_NAMES,
};
use crate::curvature::curvature_field;
use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::surface::{area, AreaReport, DoubleGraphSurface, Sheet};
use crate::variation::{
    build_cutoff, claim1_bound, claim2_check, decompose_i, detect_symmetry, detect_symmetry_curve,
    first_variation_analytic, first_variation_fd, hessian_a, AlignmentRow, BulkBound,
    ConstantField, CutoffField, CutoffSummary, Decomposition, FdVariation, ShearField, Symmetry,
    VerticalField,
};

pub const SCHEMA: u32 = 1;

pub const CONVENTION: &str = "H = (k1 + ... + kn)/n with respect to the outer normal; \
the unit sphere has H = +1; dS/dt = integral of v (H_sum_upper - H_sum_lower) dx'";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub h: f64,
    pub cells_inside: usize,
    pub measure: f64,
    pub inradius: f64,
    pub diameter: f64,
    pub boundary_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusListing {
    pub name: String,
    pub kind: String,
    pub expected: Option<ExpectedProfile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TranslationCheck {
    pub rate: f64,
    pub area: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LadderEntry {
    pub delta: f64,
    pub cutoff: CutoffSummary,
    pub cutoff_contract: bool,
    pub decomposition: Decomposition,
    pub analytic: f64,
    pub finite_difference: FdVariation,
    pub agreement: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BulkRow {
    pub delta: f64,
    pub i_bulk: f64,
    pub a0: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CollarTable {
    pub rho: f64,
    pub r: f64,
    pub rows: Vec<AlignmentRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HessianAudit {
    pub samples: usize,
    pub worst_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VariationReport {
    pub translation: TranslationCheck,
    pub ladder: Vec<LadderEntry>,
    pub bulk_bound: Option<BulkBound>,
    pub bulk_bound_status: String,
    pub bulk_rows: Vec<BulkRow>,
    /// `max |I_δ²|/√δ` over the ladder.
    pub collar_constant: f64,
    pub collar_table: Option<CollarTable>,
    pub hessian_audit: HessianAudit,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub observed: bool,
    pub expected: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComponentError {
    pub component: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub schema: u32,
    pub convention: String,
    pub config: RunConfig,
    pub expected: Option<ExpectedProfile>,
    pub region: Option<RegionSummary>,
    pub area: Option<AreaReport>,
    pub conditions: Vec<ConditionVerdict>,
    pub sprime_radius: Option<SprimeRadius>,
    pub variation: Option<VariationReport>,
    pub symmetry: Option<Symmetry>,
    pub corpus: Vec<CorpusListing>,
    pub notes: Vec<String>,
    pub errors: Vec<ComponentError>,
    pub summary: Summary,
    /// Wall-clock seconds per component; the only non-deterministic field.
    pub timings: BTreeMap<String, f64>,
}

struct Builder {
    report: RunReport,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, observed: bool, expected: bool) {
        self.report.summary.checks.push(CheckOutcome {
            name: name.into(),
            observed,
            expected,
            ok: observed == expected,
        });
    }

    fn error(&mut self, component: &str, e: impl ToString) {
        self.report.errors.push(ComponentError {
            component: component.into(),
            message: e.to_string(),
        });
    }

    fn time<T>(&mut self, key: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        *self.report.timings.entry(key.into()).or_insert(0.0) += t.elapsed().as_secs_f64();
        out
    }
}

pub fn run(cfg: &RunConfig) -> RunReport {
    let start = Instant::now();
    let mut b = Builder {
        report: RunReport {
            schema: SCHEMA,
            convention: CONVENTION.into(),
            config: cfg.clone(),
            expected: expected_profile(&cfg.surface),
            region: None,
            area: None,
            conditions: Vec::new(),
            sprime_radius: None,
            variation: None,
            symmetry: None,
            corpus: Vec::new(),
            notes: Vec::new(),
            errors: Vec::new(),
            summary: Summary {
                pass: false,
                checks: Vec::new(),
            },
            timings: BTreeMap::new(),
        },
    };
    if cfg.command == Command::CorpusList {
        b.report.corpus = SURFACE_NAMES
            .iter()
            .map(|n| (n, "surface"))
            .chain(CURVE_NAMES.iter().map(|n| (n, "curve")))
            .map(|(n, kind)| CorpusListing {
                name: n.to_string(),
                kind: kind.into(),
                expected: expected_profile(n),
            })
            .collect();
    } else {
        let entry = b.time("region", |_| corpus(&cfg.surface, &cfg.params, cfg.h));
        match entry {
            Ok(CorpusEntry::Surface(s)) => run_surface(&mut b, cfg, &s),
            Ok(CorpusEntry::Curve(c)) => run_curve(&mut b, cfg, c.as_ref()),
            Err(e) => b.error("surface", e),
        }
    }
    b.report
        .timings
        .insert("total".into(), start.elapsed().as_secs_f64());
    let r = &mut b.report;
    r.summary.pass = r.errors.is_empty() && r.summary.checks.iter().all(|c| c.ok);
    b.report
}

fn wants(cfg: &RunConfig, c: Command) -> bool {
    cfg.command == c || cfg.command == Command::All
}

fn run_surface(b: &mut Builder, cfg: &RunConfig, s: &DoubleGraphSurface) {
    let expected = b.report.expected.unwrap_or(ExpectedProfile {
        main_assumption: true,
        curvature_equality: true,
        condition_s: true,
        condition_sprime: true,
        symmetric: true,
    });
    let region = s.region();
    b.report.region = Some(RegionSummary {
        h: region.h(),
        cells_inside: region.inside_cells().count(),
        measure: region.measure(),
        inradius: region.inradius(),
        diameter: region.diameter(),
        boundary_samples: region.boundary().len(),
    });
    b.report.notes.push(
        "Main Assumption checked in its two-sheet form: pairs (f2(x'), f1(x')) over R_delta_eval"
            .into(),
    );
    if let Some(dir) = &cfg.csv_dir {
        if let Err(e) = dump_surface_fields(dir, cfg, s) {
            b.error("csv", e);
        }
    }
    if wants(cfg, Command::Check) {
        // an exact collar allows a deeper cut, away from the singular rim
        let cut = if s.collar().is_some() {
            cfg.delta_eval.max(2.0 * cfg.h)
        } else {
            2.0 * cfg.h
        };
        b.time("area", |b| match area(s, cut) {
            Ok(a) => b.report.area = Some(a),
            Err(e) => b.error("area", e),
        });
        b.time("conditions", |b| {
            match check_main_assumption(s, cfg.delta_eval, cfg.tol) {
                Ok(v) => {
                    b.check("main_assumption", v.pass, expected.main_assumption);
                    b.report.conditions.push(v);
                }
                Err(e) => b.error("main_assumption", e),
            }
            match check_curvature_equality(s, cfg.delta_eval, cfg.tol) {
                Ok(v) => {
                    b.check("curvature_equality", v.pass, expected.curvature_equality);
                    b.report.conditions.push(v);
                }
                Err(e) => b.error("curvature_equality", e),
            }
            let sv = check_condition_s(s, 0.0);
            b.check("condition_s", sv.pass, expected.condition_s);
            b.report.conditions.push(sv);
            let radius = max_sprime_radius(s, 0.005);
            let mut sprime_ok = match &radius {
                Ok(r) => r.radius > 0.0,
                Err(Error::NoSprimeRadius) => false,
                Err(e) => {
                    b.error("condition_sprime", e);
                    false
                }
            };
            b.report.sprime_radius = radius.ok();
            if let Some(r) = cfg.r {
                match check_condition_sprime(s, r, 0.0) {
                    Ok(v) => {
                        sprime_ok &= v.pass;
                        b.report.conditions.push(v);
                    }
                    Err(e) => b.error("condition_sprime", e),
                }
            }
            b.check("condition_sprime", sprime_ok, expected.condition_sprime);
        });
    }
    if wants(cfg, Command::Variation) {
        b.time("variation", |b| {
            match variation_report(cfg, s, expected.symmetric) {
                Ok((rep, checks)) => {
                    for (name, observed) in checks {
                        b.check(name, observed, true);
                    }
                    b.report.variation = Some(rep);
                }
                Err(e) => b.error("variation", e),
            }
        });
    }
    if wants(cfg, Command::Symmetry) {
        b.time("symmetry", |b| {
            let sym = detect_symmetry(s, cfg.sym_tol);
            b.check("symmetric", sym.symmetric, expected.symmetric);
            b.report.symmetry = Some(sym);
        });
    }
}

fn run_curve(b: &mut Builder, cfg: &RunConfig, c: &dyn ClosedCurve) {
    let expected = b.report.expected.expect("corpus curves declare a profile");
    if wants(cfg, Command::Check) {
        b.time("conditions", |b| {
            let opts = PairwiseOptions::default();
            let ineq = check_pairwise_main_assumption(c, cfg.tol, opts);
            b.check("main_assumption", ineq.pass, expected.main_assumption);
            b.report.conditions.push(ineq);
            let eq = check_pairwise_main_assumption(
                c,
                cfg.tol,
                PairwiseOptions {
                    equality: true,
                    ..opts
                },
            );
            b.check("curvature_equality", eq.pass, expected.curvature_equality);
            b.report.conditions.push(eq);
            let sv = check_condition_s_curve(c, 1e-6);
            b.check("condition_s", sv.pass, expected.condition_s);
            b.report.conditions.push(sv);
            let radius = max_sprime_radius_curve(c, 1e-3);
            let mut sprime_ok = radius.is_ok();
            if let Err(e) = &radius {
                if *e != Error::NoSprimeRadius {
                    b.error("condition_sprime", e);
                }
            }
            b.report.sprime_radius = radius.ok();
            if let Some(r) = cfg.r {
                match check_condition_sprime_curve(c, r, 1e-6) {
                    Ok(v) => {
                        sprime_ok &= v.pass;
                        b.report.conditions.push(v);
                    }
                    Err(e) => b.error("condition_sprime", e),
                }
            }
            b.check("condition_sprime", sprime_ok, expected.condition_sprime);
        });
    }
    if wants(cfg, Command::Variation) {
        b.report
            .notes
            .push("shear variation is defined for surfaces only; skipped".into());
    }
    if wants(cfg, Command::Symmetry) {
        let sym = detect_symmetry_curve(c, cfg.sym_tol);
        b.check("symmetric", sym.symmetric, expected.symmetric);
        b.report.symmetry = Some(sym);
    }
}

/// Exactly 1 on `R_δ` cells, exactly 0 on cells within `δ/3` of the boundary,
/// within `[0, 1]` everywhere.
pub fn cutoff_contract_holds(cutoff: &CutoffField) -> bool {
    let region = cutoff.region();
    let d = cutoff.delta();
    (0..region.len()).all(|k| {
        let v = cutoff.value_at_cell(k);
        let dist = if region.is_inside(k) {
            region.dist(k)
        } else {
            0.0
        };
        (0.0..=1.0).contains(&v) && (dist <= d || v == 1.0) && (dist > d / 3.0 || v == 0.0)
    })
}

/// `max(1e−3 relative, 1e−5 absolute)`.
pub fn rates_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= (1e-3 * a.abs().max(b.abs())).max(1e-5)
}

/// Seeded audit of `λ_min(∇²A(q)) ≥ (1+|q|²)^{−3/2}` for `|q| ≤ 10`.
pub fn hessian_audit(seed: u64, samples: usize) -> HessianAudit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let radius = rng.gen_range(0.0..=10.0);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let q = [radius * angle.cos(), radius * angle.sin()];
        let hs = hessian_a(&q);
        worst = worst.min(hs.lambda_min - hs.bound);
    }
    HessianAudit {
        samples,
        worst_gap: worst,
        pass: worst >= -1e-12,
    }
}

type NamedChecks = Vec<(String, bool)>;

fn variation_report(
    cfg: &RunConfig,
    s: &DoubleGraphSurface,
    symmetric: bool,
) -> Result<(VariationReport, NamedChecks)> {
    let mut checks: NamedChecks = Vec::new();
    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));

    let translate: Arc<dyn VerticalField> = Arc::new(ConstantField(1.0));
    let tfd = first_variation_fd(s, translate, cfg.ht)?;
    let total = area(s, 2.0 * cfg.h)?.total;
    let translation = TranslationCheck {
        rate: tfd.rate,
        area: total,
        pass: tfd.rate.abs() <= 1e-6 * total,
    };
    checks.push(("translation_invariance".into(), translation.pass));

    let mut ladder = Vec::new();
    for &delta in &deltas {
        let cutoff = Arc::new(build_cutoff(s.region(), delta)?);
        let contract = cutoff_contract_holds(&cutoff);
        let decomposition = decompose_i(s, &cutoff)?;
        let shear: Arc<dyn VerticalField> = Arc::new(ShearField::new(s, cutoff.clone()));
        let analytic = first_variation_analytic(s, shear.as_ref())?;
        let fd = first_variation_fd(s, shear, cfg.ht)?;
        let half_ok = rates_agree(fd.rate, fd.rate_half_step);
        if !half_ok {
            return Err(Error::Tolerance(format!(
                "difference quotients disagree: step {} gives {}, half step gives {}",
                cfg.ht, fd.rate, fd.rate_half_step
            )));
        }
        let agreement =
            rates_agree(analytic, fd.rate) && rates_agree(decomposition.i_total, fd.rate);
        let split_ok = decomposition.split_error()
            <= 1e-8 * (decomposition.i_bulk.abs() + decomposition.i_collar.abs() + 1.0);
        checks.push((format!("cutoff_contract[{delta}]"), contract));
        checks.push((format!("first_variation_agreement[{delta}]"), agreement));
        checks.push((format!("decomposition_exact[{delta}]"), split_ok));
        checks.push((
            format!("f_nonnegative[{delta}]"),
            decomposition.f_min >= -1e-9,
        ));
        if symmetric {
            checks.push((
                format!("shear_vanishes[{delta}]"),
                decomposition.i_total.abs() <= 1e-4,
            ));
        }
        ladder.push(LadderEntry {
            delta,
            cutoff: cutoff.summary(),
            cutoff_contract: contract,
            decomposition,
            analytic,
            finite_difference: fd,
            agreement,
        });
    }

    let collar_constant = ladder
        .iter()
        .map(|e| e.decomposition.i_collar.abs() / e.delta.sqrt())
        .fold(0.0, f64::max);

    let (bulk_bound, bulk_bound_status, bulk_rows) = match claim1_bound(s, deltas[0]) {
        Ok(c) => {
            let rows: Vec<BulkRow> = ladder
                .iter()
                .filter(|e| e.delta <= c.delta)
                .map(|e| BulkRow {
                    delta: e.delta,
                    i_bulk: e.decomposition.i_bulk,
                    a0: c.a0,
                    pass: c.a0 > 0.0 && e.decomposition.i_bulk >= c.a0,
                })
                .collect();
            (Some(c), "ok".to_string(), rows)
        }
        Err(e) => (None, e.to_string(), Vec::new()),
    };
    if !symmetric {
        let ok = bulk_bound.is_some() && !bulk_rows.is_empty() && bulk_rows.iter().all(|r| r.pass);
        checks.push(("bulk_lower_bound".into(), ok));
    } else {
        checks.push(("bulk_bound_reports_symmetric".into(), bulk_bound.is_none()));
    }

    let rho = interior_ball_radius(&cfg.surface, &cfg.params);
    let r = cfg
        .r
        .or_else(|| max_sprime_radius(s, 0.005).ok().map(|r| r.radius));
    let collar_table = match (rho, r) {
        (Some(rho), Some(r)) => {
            let rows = claim2_check(s, rho, r, &deltas)?;
            checks.push((
                "collar_alignment_bound".into(),
                rows.iter().all(|row| row.pass && row.identity_gap <= 1e-9),
            ));
            Some(CollarTable { rho, r, rows })
        }
        _ => None,
    };

    let audit = hessian_audit(cfg.seed, 1000);
    checks.push(("hessian_bound".into(), audit.pass));

    Ok((
        VariationReport {
            translation,
            ladder,
            bulk_bound,
            bulk_bound_status,
            bulk_rows,
            collar_constant,
            collar_table,
            hessian_audit: audit,
        },
        checks,
    ))
}

fn write_field(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = (f64, f64, f64)>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# {header}")?;
    writeln!(w, "x1,x2,value")?;
    for (x, y, v) in rows {
        writeln!(w, "{x},{y},{v}")?;
    }
    w.flush()
}

fn dump_surface_fields(dir: &Path, cfg: &RunConfig, s: &DoubleGraphSurface) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidParameter(format!("csv dump: {e}"));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = &cfg.surface;
    let header = |field: &str| format!("surface={name} h={} field={field}", cfg.h);
    let region = s.region();
    let inside: Vec<usize> = region.inside_cells().collect();
    for sheet in [Sheet::Upper, Sheet::Lower] {
        let tag = if sheet == Sheet::Upper { "f1" } else { "f2" };
        write_field(
            &dir.join(format!("{name}_{tag}.csv")),
            &header(tag),
            inside.iter().map(|&k| {
                let p = region.cell_center(k);
                (p.x, p.y, s.height(sheet, p))
            }),
        )
        .map_err(io)?;
    }
    let curv = curvature_field(s, cfg.delta_eval)?;
    for (tag, pick) in [("h_upper", 0), ("h_lower", 1)] {
        write_field(
            &dir.join(format!("{name}_{tag}.csv")),
            &header(tag),
            curv.iter().map(|(_, c)| {
                (
                    c.point[0],
                    c.point[1],
                    if pick == 0 { c.h_upper } else { c.h_lower },
                )
            }),
        )
        .map_err(io)?;
    }
    for &delta in &cfg.deltas {
        let cutoff = Arc::new(build_cutoff(region, delta)?);
        let shear = ShearField::new(s, cutoff.clone());
        write_field(
            &dir.join(format!("{name}_phi_{delta}.csv")),
            &header("phi"),
            inside.iter().map(|&k| {
                let p = region.cell_center(k);
                (p.x, p.y, cutoff.value_at_cell(k))
            }),
        )
        .map_err(io)?;
        write_field(
            &dir.join(format!("{name}_v_{delta}.csv")),
            &header("v"),
            inside.iter().map(|&k| {
                let p = region.cell_center(k);
                (p.x, p.y, shear.value(p))
            }),
        )
        .map_err(io)?;
        write_field(
            &dir.join(format!("{name}_F_{delta}.csv")),
            &header("F"),
            inside
                .iter()
                .filter(|&&k| cutoff.value_at_cell(k) > 0.0)
                .map(|&k| {
                    let p = region.cell_center(k);
                    let f = crate::variation::f_from_gradients(
                        s.gradient_at_cell(Sheet::Upper, k),
                        s.gradient_at_cell(Sheet::Lower, k),
                    );
                    (p.x, p.y, f.value)
                }),
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Serializes the report, writing to a temporary file that is then renamed
/// over `path`.
pub fn write_report(report: &RunReport, path: &Path) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("report.json")
    ));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// JSON with the timing block removed, for determinism comparisons.
pub fn report_without_timings(report: &RunReport) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Some(o) = v.as_object_mut() {
        o.remove("timings");
    }
    v
}
