use std::collections::BTreeMap;

use conley_kit::conley::{build_conley_pair, verify_conley_pair, ConleyPair};
use conley_kit::flow::{Flow, FlowParams};
use conley_kit::geometry::{
    build_mesh, builtin_field, find_critical_points, rp2_mesh, CriticalPoint, FieldKind, Mesh, ScalarField,
    SurfaceKind, DEFAULT_TOL_CRIT, DEFAULT_TOL_EIG,
};
use conley_kit::homology::{cat_bounds, cuplength, subordinating_class, subordination_number, ChainComplexGF2};
use conley_kit::minimax::{inequality_report, kappa, no_gap_interval, refined_minimax, Filtration, ReportInputs, SCHEMA};
use conley_kit::thicken::{ambient_thickenings, forward_thickenings, verify_cover};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Result of a subcommand: the JSON printed to stdout, extra files for `--out`, and the verdict.
pub struct Outcome {
    pub json: Value,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    fn new(json: Value, passed: bool) -> Self {
        Self { json, files: Vec::new(), passed }
    }
}

struct Setup {
    field: ScalarField<f64>,
    mesh: Mesh<f64>,
    crits: Vec<CriticalPoint<f64>>,
}

fn flow_params(cfg: &RunConfig) -> FlowParams<f64> {
    FlowParams { h: cfg.h, h_min: cfg.h_min, delta_conv: cfg.delta_conv, horizon: cfg.horizon, ..Default::default() }
}

fn setup_field(cfg: &RunConfig, negate: bool) -> Result<Setup, CliError> {
    let kind = FieldKind::parse(&cfg.field).map_err(CliError::from_core)?;
    let mut field = builtin_field(kind, cfg.surface()).map_err(CliError::from_core)?;
    if negate {
        field = field.negated();
    }
    let mesh = build_mesh(&field.surface, Some(&field), cfg.n).map_err(CliError::from_core)?;
    let crits = find_critical_points(&field, &mesh, DEFAULT_TOL_CRIT, DEFAULT_TOL_EIG).points;
    Ok(Setup { field, mesh, crits })
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    setup_field(cfg, false)
}

fn bare_mesh(cfg: &RunConfig) -> Result<Mesh<f64>, CliError> {
    let surface = cfg.surface();
    match surface.kind {
        SurfaceKind::Rp2Triangulation => Ok(rp2_mesh(0)),
        _ => build_mesh(&surface, None, cfg.n).map_err(CliError::from_core),
    }
}

fn all_pairs(flow: &Flow<'_, f64>, s: &Setup, cfg: &RunConfig) -> Result<Vec<ConleyPair<f64>>, CliError> {
    s.crits
        .iter()
        .map(|x| build_conley_pair(flow, &s.mesh, x, cfg.epsilon, cfg.tau))
        .collect::<Result<_, _>>()
        .map_err(CliError::from_core)
}

fn header(cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("config".into(), json!(cfg.entries()));
    m
}

pub fn crit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let kind = FieldKind::parse(&cfg.field).map_err(CliError::from_core)?;
    let field = builtin_field(kind, cfg.surface()).map_err(CliError::from_core)?;
    let mesh = build_mesh(&field.surface, Some(&field), cfg.n).map_err(CliError::from_core)?;
    let search = find_critical_points(&field, &mesh, DEFAULT_TOL_CRIT, DEFAULT_TOL_EIG);
    let mut out = header(cfg);
    out.insert("critical_points".into(), json!(search.points));
    out.insert("seeds".into(), json!(search.seeds));
    out.insert("nonconverged_seeds".into(), json!(search.nonconverged_seeds));
    out.insert("min_separation".into(), json!(search.min_separation));
    Ok(Outcome::new(Value::Object(out), !search.points.is_empty()))
}

/// Indices of the critical points named by `selector`: `all`, `min`, `max`, `saddle`,
/// `degenerate`, or a position in the value-sorted list.
fn select(crits: &[CriticalPoint<f64>], selector: &str) -> Result<Vec<usize>, CliError> {
    let all: Vec<usize> = (0..crits.len()).collect();
    let picked: Vec<usize> = match selector {
        "all" => all,
        "min" => all.into_iter().take(1).collect(),
        "max" => all.into_iter().last().into_iter().collect(),
        "saddle" => all.into_iter().filter(|&i| crits[i].morse_index() == Some(1) && crits.len() > 2).collect(),
        "degenerate" => all.into_iter().filter(|&i| crits[i].is_degenerate()).collect(),
        other => {
            let i: usize = other.parse().map_err(|_| CliError::Usage(format!("unknown critical point selector `{other}`")))?;
            if i >= crits.len() {
                return Err(CliError::Usage(format!("critical point {i} out of range ({} found)", crits.len())));
            }
            vec![i]
        }
    };
    if picked.is_empty() {
        return Err(CliError::Usage(format!("selector `{selector}` matches no critical point")));
    }
    Ok(picked)
}

pub fn conley(cfg: &RunConfig, selector: &str) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let flow = Flow::new(&s.field, flow_params(cfg));
    let mut results = Vec::new();
    let mut files = Vec::new();
    let mut passed = true;
    for i in select(&s.crits, selector)? {
        let pair = build_conley_pair(&flow, &s.mesh, &s.crits[i], cfg.epsilon, cfg.tau).map_err(CliError::from_core)?;
        let report =
            verify_conley_pair(&flow, &s.mesh, &pair, &s.crits, cfg.samples, cfg.seed).map_err(CliError::from_core)?;
        passed &= report.passed();
        files.push((format!("pair_{i}.json"), pair.to_json()));
        results.push(json!({
            "index": i,
            "critical_point": s.crits[i],
            "sizes": {
                "N": pair.n.len(), "L": pair.l.len(),
                "Nplus": pair.n_plus.len(), "Nzero": pair.n_zero.len(), "Nminus": pair.n_minus.len(),
            },
            "passed": report.passed(),
            "verification": report,
        }));
    }
    let mut out = header(cfg);
    out.insert("pairs".into(), json!(results));
    out.insert("passed".into(), json!(passed));
    Ok(Outcome { json: Value::Object(out), files, passed })
}

pub fn thicken(cfg: &RunConfig, kind: &str) -> Result<Outcome, CliError> {
    let negate = match kind {
        "forward" | "ambient" => false,
        "unstable" => true,
        other => return Err(CliError::Usage(format!("unknown thickening kind `{other}`"))),
    };
    let s = setup_field(cfg, negate)?;
    let flow = Flow::new(&s.field, flow_params(cfg));
    let pairs = all_pairs(&flow, &s, cfg)?;
    let mut out = header(cfg);
    let ths = if kind == "forward" {
        forward_thickenings(&flow, &s.mesh, &pairs, cfg.w_horizon).map_err(CliError::from_core)?
    } else {
        let (ths, entrance) = ambient_thickenings(&flow, &s.mesh, &pairs).map_err(CliError::from_core)?;
        out.insert("entrance_times".into(), json!(entrance));
        ths
    };
    out.insert("kind".into(), json!(kind));
    out.insert("thickenings".into(), json!(ths));
    Ok(Outcome::new(Value::Object(out), true))
}

pub fn cover(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let flow = Flow::new(&s.field, flow_params(cfg));
    let pairs = all_pairs(&flow, &s, cfg)?;
    let forward = forward_thickenings(&flow, &s.mesh, &pairs, cfg.w_horizon).map_err(CliError::from_core)?;
    let forward_report = verify_cover(&forward, &s.mesh);
    let (ambient, _) = ambient_thickenings(&flow, &s.mesh, &pairs).map_err(CliError::from_core)?;
    let ambient_report = verify_cover(&ambient, &s.mesh);
    let passed = forward_report.passed && forward_report.acyclic.iter().all(|&a| a) && ambient_report.uncovered == 0;
    let mut out = header(cfg);
    out.insert("forward".into(), json!(forward_report));
    out.insert("ambient".into(), json!(ambient_report));
    out.insert("passed".into(), json!(passed));
    Ok(Outcome::new(Value::Object(out), passed))
}

pub fn homology(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mesh = bare_mesh(cfg)?;
    let cx = ChainComplexGF2::from_mesh(&mesh);
    let bounds = cat_bounds(&cx, None).map_err(CliError::from_core)?;
    let mut out = serde_json::Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("surface".into(), json!(mesh.surface.descriptor()));
    out.insert("vertices".into(), json!(mesh.len()));
    out.insert("betti".into(), json!(cx.betti()));
    out.insert("reduced_betti".into(), json!(cx.reduced_betti()));
    out.insert("cuplength".into(), json!(cuplength(&cx)));
    out.insert("subordination".into(), json!(subordination_number(&cx)));
    out.insert("cat_bounds".into(), json!(bounds));
    Ok(Outcome::new(Value::Object(out), cx.check_complex()))
}

fn parse_band(band: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("band must be `a,b`, got `{band}`"));
    let (a, b) = band.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn minimax(cfg: &RunConfig, band: Option<&str>) -> Result<Outcome, CliError> {
    let s = setup(cfg)?;
    let filt = match band {
        Some(b) => {
            let (a, b) = parse_band(b)?;
            Filtration::new(&s.mesh, a, b)
        }
        None => Filtration::global(&s.mesh),
    }
    .map_err(CliError::from_core)?;
    let mut table = Vec::new();
    let mut files = Vec::new();
    let mut passed = true;
    for k in 0..=filt.complex.dim() {
        for (i, cls) in filt.essential_classes(k).iter().enumerate() {
            let r = kappa(&filt, cls, &s.crits).map_err(CliError::from_core)?;
            let gap = no_gap_interval(&filt, cls);
            let no_gap = gap.as_ref().is_ok_and(|g| g.s0 == r.kappa);
            if let Ok(g) = &gap {
                files.push((format!("scan_k{k}_{i}.csv"), g.to_csv()));
            }
            passed &= no_gap && r.kappa == r.kappa_vanishing && r.critical_point.is_some() && r.morse_index_match != Some(false);
            table.push(json!({
                "degree": k,
                "class": i,
                "kappa": r.kappa,
                "kappa_vanishing": r.kappa_vanishing,
                "critical_value": r.critical_point.as_ref().map(|x| x.value),
                "critical_param": r.critical_point.as_ref().map(|x| x.param),
                "morse_index_match": r.morse_index_match,
                "no_gap": no_gap,
                "s0": gap.as_ref().ok().map(|g| g.s0),
            }));
        }
    }

    // refined minimax along a longest subordination chain (whole-manifold band only)
    let mut refined = Vec::new();
    if band.is_none() {
        let cx = &filt.complex;
        let chain = subordination_number(cx).chain;
        for w in chain.windows(2) {
            let lower = cls_of(cx, &w[0]);
            let upper = cls_of(cx, &w[1]);
            let omega = subordinating_class(cx, &lower, &upper).map_err(CliError::from_core)?;
            let Some(omega) = omega else {
                passed = false;
                continue;
            };
            let r = refined_minimax(&filt, &lower, &upper, &omega, &s.crits).map_err(CliError::from_core)?;
            passed &= r.strict;
            refined.push(json!({
                "degrees": [lower.degree, upper.degree],
                "kappa": [r.lower.kappa, r.upper.kappa],
                "strict": r.strict,
            }));
        }
    }
    let mut out = header(cfg);
    out.insert("band".into(), json!([filt.a, filt.b]));
    out.insert("tol_match".into(), json!(filt.tol_match));
    out.insert("classes".into(), json!(table));
    out.insert("refined".into(), json!(refined));
    out.insert("passed".into(), json!(passed));
    Ok(Outcome { json: Value::Object(out), files, passed })
}

fn cls_of(cx: &ChainComplexGF2, r: &conley_kit::homology::ClassRef) -> conley_kit::homology::HomologyClass {
    let g = cx.homology_group(r.degree).expect("degree within range");
    conley_kit::homology::HomologyClass { degree: r.degree, chain: g.combine(&r.coordinates) }
}

pub fn report(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if matches!(cfg.surface().kind, SurfaceKind::Rp2Triangulation) {
        let cx = ChainComplexGF2::from_mesh(&rp2_mesh::<f64>(0));
        let cited = BTreeMap::from([("cat".to_string(), 3), ("cupp".to_string(), 2), ("dim_H".to_string(), 3)]);
        let mut config = cfg.entries();
        config.remove("field");
        let r = inequality_report(&ReportInputs {
            complex: &cx,
            critical_points: None,
            morse: false,
            ambient_cover: None,
            categorical_cover: None,
            cited,
            config,
        })
        .map_err(CliError::from_core)?;
        let passed = r.passed;
        return Ok(Outcome::new(serde_json::to_value(&r).expect("report serializes"), passed));
    }

    let s = setup(cfg)?;
    let flow = Flow::new(&s.field, flow_params(cfg));
    let pairs = all_pairs(&flow, &s, cfg)?;
    let forward = forward_thickenings(&flow, &s.mesh, &pairs, cfg.w_horizon).map_err(CliError::from_core)?;
    let forward_report = verify_cover(&forward, &s.mesh);
    let (ambient, _) = ambient_thickenings(&flow, &s.mesh, &pairs).map_err(CliError::from_core)?;
    let ambient_report = verify_cover(&ambient, &s.mesh);

    let categorical: Option<Vec<Vec<usize>>> = (forward_report.passed && forward_report.acyclic.iter().all(|&a| a))
        .then(|| forward.iter().map(|t| t.vertices.clone()).collect());
    let cx = ChainComplexGF2::from_mesh(&s.mesh);
    let r = inequality_report(&ReportInputs {
        complex: &cx,
        critical_points: Some(s.crits.len()),
        morse: s.crits.iter().all(|x| !x.is_degenerate()),
        ambient_cover: (ambient_report.uncovered == 0).then_some(ambient.len()),
        categorical_cover: categorical.as_deref(),
        cited: BTreeMap::new(),
        config: cfg.entries(),
    })
    .map_err(CliError::from_core)?;
    let mut out = serde_json::to_value(&r).expect("report serializes");
    out["chain"] = json!(r.chain_string());
    out["covers"] = json!({
        "forward": { "uncovered": forward_report.uncovered, "acyclic": forward_report.acyclic, "same_level_disjoint": forward_report.same_level_disjoint },
        "ambient": { "uncovered": ambient_report.uncovered, "size": ambient.len() },
    });
    Ok(Outcome::new(out, r.passed))
}
