use std::fs;
use std::path::Path;

use dimwit_core::bellfmt::{parse_correlation_matrix, parse_functional, serialize_functional};
use dimwit_core::catalog::{self, gamma_state, iphi_curve, theta_state, witness_report, Verdict};
use dimwit_core::grothendieck::{local_norm, normalize, vector_seesaw};
use dimwit_core::localbound::local_bound_with_cap;
use dimwit_core::scenario::{evaluate, BellFunctional, MarginalPolicy, ProbabilityTable};
use dimwit_core::seesaw::{seesaw as run_seesaw, SeesawConfig, SeesawResult};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, EXIT_NOT_WITNESSED, EXIT_OTHER};
use crate::output::{fmt_value, model_json, print_json, Manifest};
use crate::{Marginals, SearchArgs};

const BASE_RESTARTS: usize = 50;

/// 50 restarts, plus `50·d − 50` more when the larger local dimension `d` is at least 3.
pub fn default_restarts(dim: usize) -> usize {
    if dim >= 3 {
        BASE_RESTARTS + BASE_RESTARTS * dim - BASE_RESTARTS
    } else {
        BASE_RESTARTS
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::new(EXIT_OTHER, format!("cannot write {}: {e}", path.display())))
}

/// Reads a `.bell` file, or looks the argument up in the catalog when no
/// such file exists.
fn load_functional(arg: &str) -> CliResult<BellFunctional> {
    let path = Path::new(arg);
    if path.is_file() {
        return parse_functional(&read(path)?)
            .map_err(|e| CliError::from(e).with_context(&path.display().to_string()));
    }
    if arg.ends_with(".bell") || arg.contains(std::path::MAIN_SEPARATOR) {
        return Err(CliError::new(EXIT_OTHER, format!("no such file: {arg}")));
    }
    Ok(catalog::by_name(arg)?)
}

fn search_config(search: &SearchArgs, dim: usize) -> SeesawConfig {
    SeesawConfig {
        restarts: search.restarts.unwrap_or_else(|| default_restarts(dim)),
        max_iterations: search.max_iterations,
        convergence_tol: search.tol,
        seed: search.seed.seed,
        ..SeesawConfig::default()
    }
}

fn config_json(cfg: &SeesawConfig) -> Value {
    json!({
        "restarts": cfg.restarts,
        "max_iterations": cfg.max_iterations,
        "convergence_tol": cfg.convergence_tol,
        "pair_pass_count": cfg.pair_pass_count,
        "projective_only": cfg.projective_only,
        "fixed_state": cfg.fixed_state.is_some(),
    })
}

pub fn eval(functional: &str, table: &Path, marginals: Marginals, json: bool) -> CliResult<u8> {
    let manifest = Manifest::start(None, json!({ "marginals": marginal_name(marginals) }));
    let f = load_functional(functional)?;
    let t = ProbabilityTable::from_csv(&read(table)?, f.scenario())
        .map_err(|e| CliError::from(e).with_context(&table.display().to_string()))?;
    let policy = match marginals {
        Marginals::PartnerZero => MarginalPolicy::PartnerSettingZero,
        Marginals::Average => MarginalPolicy::Average,
    };
    let value = evaluate(&f, &t, policy)?;
    if t.was_renormalized() {
        eprintln!("warning: table rows were renormalized");
    }
    if json {
        print_json(&manifest.wrap(
            "eval",
            json!({ "value": value, "renormalized": t.was_renormalized() }),
        ));
    } else {
        println!("{}", fmt_value(value));
    }
    Ok(0)
}

fn marginal_name(m: Marginals) -> &'static str {
    match m {
        Marginals::PartnerZero => "partner-zero",
        Marginals::Average => "average",
    }
}

pub fn local_bound(functional: &str, cap: u128, json: bool) -> CliResult<u8> {
    let manifest = Manifest::start(None, json!({ "max_strategies": cap.to_string() }));
    let f = load_functional(functional)?;
    let (value, strategy) = local_bound_with_cap(&f, cap)?;
    let count = f.scenario().strategy_count();
    if json {
        print_json(&manifest.wrap(
            "local_bound",
            json!({
                "scenario": f.scenario().describe(),
                "value": value,
                "strategy": {
                    "assignment_a": strategy.assignment_a,
                    "assignment_b": strategy.assignment_b,
                },
                "strategies_enumerated": count.to_string(),
            }),
        ));
    } else {
        println!("local bound: {}", fmt_value(value));
        println!("strategy: {strategy}");
        println!("strategies enumerated: {count}");
    }
    Ok(0)
}

pub struct SeesawArgs<'a> {
    pub functional: &'a str,
    pub da: usize,
    pub db: usize,
    pub search: &'a SearchArgs,
    pub fixed_theta: Option<f64>,
    pub fixed_gamma: Option<f64>,
    pub projective_only: bool,
    pub json: bool,
}

pub fn seesaw(args: SeesawArgs<'_>) -> CliResult<u8> {
    let SeesawArgs { da, db, .. } = args;
    let mut cfg = search_config(args.search, da.max(db));
    cfg.projective_only = args.projective_only;
    cfg.fixed_state = match (args.fixed_theta, args.fixed_gamma) {
        (Some(theta), _) => {
            if (da, db) != (2, 2) {
                return Err(CliError::config("--fixed-theta needs --da 2 --db 2"));
            }
            Some(theta_state(theta))
        }
        (None, Some(gamma)) => {
            if (da, db) != (3, 3) {
                return Err(CliError::config("--fixed-gamma needs --da 3 --db 3"));
            }
            Some(gamma_state(gamma))
        }
        (None, None) => None,
    };
    let mut config = config_json(&cfg);
    config["dim_a"] = json!(da);
    config["dim_b"] = json!(db);
    config["fixed_theta"] = json!(args.fixed_theta);
    config["fixed_gamma"] = json!(args.fixed_gamma);
    let manifest = Manifest::start(Some(cfg.seed), config);
    let f = load_functional(args.functional)?;
    let result = run_seesaw(&f, da, db, &cfg)?;
    if args.json {
        print_json(&manifest.wrap("seesaw", seesaw_json(&result)));
    } else {
        print_seesaw(&result);
    }
    Ok(0)
}

fn seesaw_json(r: &SeesawResult) -> Value {
    let restarts: Vec<Value> = r
        .restarts
        .iter()
        .map(|s| {
            json!({
                "index": s.index,
                "seeded": s.seeded,
                "value": s.value,
                "iterations": s.iterations,
                "converged": s.converged,
                "error": s.error,
            })
        })
        .collect();
    json!({
        "best_value": r.best_value,
        "best_restart": r.best_restart,
        "converged_count": r.converged_flags().iter().filter(|c| **c).count(),
        "failed_count": r.failed_count(),
        "restarts": restarts,
        "best_model": model_json(&r.best_model),
    })
}

fn print_seesaw(r: &SeesawResult) {
    let iterations = r.iterations_used();
    let converged = r.converged_flags().iter().filter(|c| **c).count();
    println!("best found value (heuristic): {}", fmt_value(r.best_value));
    println!("best restart: {}", r.best_restart);
    println!(
        "restarts: {} ({converged} converged, {} failed)",
        r.restarts.len(),
        r.failed_count()
    );
    println!(
        "iterations: total {}, max {}",
        iterations.iter().sum::<usize>(),
        iterations.iter().max().copied().unwrap_or(0)
    );
    println!(
        "{:>7}  {:>20}  {:>10}  converged",
        "restart", "value", "iterations"
    );
    for s in &r.restarts {
        let value = match (&s.value, &s.error) {
            (Some(v), _) => fmt_value(*v),
            (None, Some(e)) => format!("failed: {e}"),
            (None, None) => "failed".to_string(),
        };
        println!(
            "{:>7}  {value:>20}  {:>10}  {}",
            s.index,
            s.iterations,
            if s.converged { "yes" } else { "no" }
        );
    }
}

pub fn curve(steps: usize, dims: &str, search: &SearchArgs, out: Option<&Path>) -> CliResult<u8> {
    let parsed: Vec<usize> = dims
        .split(',')
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad --dims `{dims}`")))?;
    if parsed != [2, 3] {
        return Err(CliError::config(format!(
            "--dims must be 2,3, got `{dims}`"
        )));
    }
    let cfg = search_config(search, 3);
    let mut config = config_json(&cfg);
    config["family"] = json!("iphi");
    config["steps"] = json!(steps);
    config["dims"] = json!(parsed);
    let manifest = Manifest::start(Some(cfg.seed), config);
    let rows = iphi_curve(steps, &cfg)?;
    let mut csv = String::from("phi,local_bound,value_d2,value_d3\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.phi, r.local_bound, r.value_d2, r.value_d3
        ));
    }
    let sidecar =
        serde_json::to_string_pretty(&manifest.wrap("curve", json!({ "rows": rows.len() })))
            .expect("JSON values serialize");
    match out {
        Some(path) => {
            write(path, &csv)?;
            let mut name = path.as_os_str().to_owned();
            name.push(".manifest.json");
            write(Path::new(&name), &(sidecar + "\n"))?;
        }
        None => {
            print!("{csv}");
            eprintln!("{sidecar}");
        }
    }
    Ok(0)
}

pub fn witness(functional: &str, d: usize, threshold: f64, search: &SearchArgs) -> CliResult<u8> {
    let cfg = search_config(search, d + 1);
    let mut config = config_json(&cfg);
    config["d"] = json!(d);
    config["threshold"] = json!(threshold);
    let manifest = Manifest::start(Some(cfg.seed), config);
    let f = load_functional(functional)?;
    let report = witness_report(functional, &f, d, &cfg, threshold)?;
    print_json(&manifest.wrap(
        "report",
        json!({
            "functional_id": report.functional_id,
            "dimension": report.dimension,
            "local_bound": report.local_bound,
            "value_d": report.value_d,
            "value_d_plus": report.value_d_plus,
            "gap": report.gap,
            "threshold": report.threshold,
            "verdict": report.verdict.to_string(),
        }),
    ));
    Ok(match report.verdict {
        Verdict::Witnessed => 0,
        Verdict::NotWitnessed => EXIT_NOT_WITNESSED,
    })
}

pub fn catalog_list() -> CliResult<u8> {
    for name in catalog::NAMES {
        let f = catalog::by_name(name)?;
        println!("{name:<22} {}", f.scenario().describe());
    }
    println!("(iphi:<phi> accepts any angle in radians)");
    Ok(0)
}

pub fn catalog_emit(name: &str, out: Option<&Path>) -> CliResult<u8> {
    let text = serialize_functional(&catalog::by_name(name)?);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

pub fn grothendieck(matrix: &Path, n: usize, search: &SearchArgs, json: bool) -> CliResult<u8> {
    let cfg = SeesawConfig {
        restarts: search.restarts.unwrap_or(BASE_RESTARTS),
        ..search_config(search, 0)
    };
    let mut config = config_json(&cfg);
    config["n"] = json!(n);
    let manifest = Manifest::start(Some(cfg.seed), config);
    let f = parse_correlation_matrix(&read(matrix)?)
        .map_err(|e| CliError::from(e).with_context(&matrix.display().to_string()))?;
    let norm = local_norm(&f)?;
    let unit = normalize(&f)?;
    let r = vector_seesaw(&unit, n, &cfg, &[])?;
    if json {
        print_json(&manifest.wrap(
            "grothendieck",
            json!({
                "m": f.m(),
                "n": n,
                "local_norm": norm,
                "normalized_value": r.value,
                "value": r.value * norm,
                "best_restart": r.best_restart,
                "x_vectors": r.strategy.x_vectors,
                "y_vectors": r.strategy.y_vectors,
            }),
        ));
    } else {
        println!("local norm: {}", fmt_value(norm));
        println!("value: {}", fmt_value(r.value * norm));
        println!("ratio to local norm: {}", fmt_value(r.value));
        println!("best restart: {}", r.best_restart);
        let show = |v: &[f64]| {
            v.iter()
                .map(|c| fmt_value(*c))
                .collect::<Vec<_>>()
                .join(", ")
        };
        for (i, x) in r.strategy.x_vectors.iter().enumerate() {
            println!("x_{i}: [{}]", show(x));
        }
        for (j, y) in r.strategy.y_vectors.iter().enumerate() {
            println!("y_{j}: [{}]", show(y));
        }
    }
    Ok(0)
}
