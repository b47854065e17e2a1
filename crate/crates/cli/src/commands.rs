use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use hawkes_branch::badmm::{structure_matrix, BadmmConfig, Regularizer};
use hawkes_branch::em::{fit, responsibilities, EmConfig};
use hawkes_branch::eval::{chance_parent_accuracy, influence_ranking, parent_recovery, structure_stats, BranchReport, MetricsReport};
use hawkes_branch::io::{self, FitRecord, MatrixLayout, TypeMap};
use hawkes_branch::simulate::{simulate_dataset, SimConfig, SimMethod, DEFAULT_MAX_EVENTS};
use hawkes_branch::{Dataset, EventSequence, ExpKernel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{parse_grid, BadmmFlags, EvalArgs, FileConfig, FitArgs, InferArgs, Layout, Method, RankArgs, Reg, SimulateArgs, DEFAULT_MAX_N};
use crate::failure::Failure;

type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    version: &'static str,
    inputs: BTreeMap<&'static str, String>,
    outputs: Vec<String>,
    seed: Option<u64>,
    config: Value,
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::io(path, e))
}

fn read_with<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> hawkes_branch::Result<T>) -> Result<T, Failure> {
    let reader = open(path)?;
    f(reader).map_err(|e| Failure::from(e).in_file(path))
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> hawkes_branch::Result<()>) -> Outcome {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Failure::from(e).in_file(path))?;
    write_bytes(path, &buf)
}

fn inputs(pairs: &[(&'static str, Option<&Path>)]) -> BTreeMap<&'static str, String> {
    pairs.iter().filter_map(|(k, p)| p.map(|p| (*k, p.display().to_string()))).collect()
}

fn read_dataset(data: &Path, types: Option<&Path>) -> Result<Vec<EventSequence<f64>>, Failure> {
    let map: Option<TypeMap> = types.map(|p| read_with(p, io::read_type_map)).transpose()?;
    read_with(data, |r| io::read_sequences(r, map.as_ref()))
}

fn check_max_n(sequences: &[EventSequence<f64>], max_n: usize) -> Outcome {
    match sequences.iter().find(|s| s.len() > max_n) {
        Some(s) => Err(Failure::domain(format!(
            "sequence `{}` has {} events, above --max-n {max_n}; dense responsibility matrices would be too large",
            s.id(),
            s.len()
        ))),
        None => Ok(()),
    }
}

fn badmm_config(flags: &BadmmFlags, tol: Option<f64>) -> Result<BadmmConfig<f64>, Failure> {
    let d = BadmmConfig::<f64>::default();
    let cfg = BadmmConfig {
        lambda: flags.lambda.unwrap_or(d.lambda),
        alpha: flags.alpha.unwrap_or(d.alpha),
        rho: flags.rho.unwrap_or(d.rho),
        regularizer: match flags.reg {
            None | Some(Reg::Nuclear) => Regularizer::Nuclear,
            Some(Reg::Group) => Regularizer::GroupL12,
        },
        max_iters: flags.badmm_iters.unwrap_or(d.max_iters),
        tol: tol.unwrap_or(d.tol),
        floor: d.floor,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs, file: &FileConfig) -> Outcome {
    let params = read_with(&args.params, io::read_params::<f64, _>)?;
    let count = args.sequences.or(file.sequences).unwrap_or(100);
    let horizon = args.horizon.or(file.horizon).unwrap_or(100.0);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let method = args.method.or(file.method).unwrap_or(Method::Branching);
    let max_events = args.max_events.or(file.max_events).unwrap_or(DEFAULT_MAX_EVENTS);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Failure::validation(format!("--horizon must be positive and finite, got {horizon}")));
    }
    let cfg = SimConfig::new(horizon, seed).with_max_events(max_events);
    let sim_method = match method {
        Method::Branching => SimMethod::Branching,
        Method::Thinning => SimMethod::Thinning,
    };
    let sim = simulate_dataset(&params, &cfg, count, sim_method)?;

    create_dir(&args.out)?;
    let mut outputs = vec!["sequences.jsonl".to_owned()];
    write_with(&args.out.join("sequences.jsonl"), |w| io::write_sequences(w, &sim.sequences))?;
    if let Some(labels) = &sim.labels {
        write_with(&args.out.join("labels.jsonl"), |w| io::write_labels(w, labels))?;
        outputs.push("labels.jsonl".to_owned());
    }
    let manifest = Manifest {
        command: "simulate",
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs(&[("params", Some(&args.params))]),
        outputs,
        seed: Some(seed),
        config: json!({
            "params": io::ParamsRecord::from_params(&params),
            "sequences": count,
            "horizon": horizon,
            "method": method,
            "max_events": max_events,
        }),
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

fn grid_file_name(lambda: f64) -> String {
    format!("fit_lambda_{lambda}.json")
}

pub fn fit_cmd(args: &FitArgs, file: &FileConfig) -> Outcome {
    let sequences = read_dataset(&args.data, args.types.as_deref())?;
    let max_n = args.max_n.or(file.max_n).unwrap_or(DEFAULT_MAX_N);
    check_max_n(&sequences, max_n)?;
    let ids: Vec<String> = sequences.iter().map(|s| s.id().to_owned()).collect();
    let dataset = match args.num_types {
        Some(c) => Dataset::new(sequences, c),
        None => Dataset::infer(sequences),
    }
    .map_err(|e| Failure::from(e).in_file(&args.data))?;

    let beta = args.beta.or(file.beta).unwrap_or(1.0);
    let kernel = ExpKernel::new(beta)?;
    let defaults = EmConfig::<f64>::default();
    let flags = args.badmm.merged(file);
    let grid = args.lambda_grid.as_deref().or(file.lambda_grid.as_deref()).map(parse_grid).transpose()?;
    let badmm_tol = args.badmm_tol.or(file.badmm_tol);
    let base = EmConfig {
        max_em_iters: args.em_iters.or(file.em_iters).unwrap_or(defaults.max_em_iters),
        loglik_tol: args.tol.or(file.tol).unwrap_or(defaults.loglik_tol),
        badmm: None,
        param_floor: defaults.param_floor,
    };
    let layout = match args.responsibilities.or(file.responsibilities).unwrap_or(Layout::None) {
        Layout::None => None,
        Layout::Dense => Some(MatrixLayout::Dense),
        Layout::Triplet => Some(MatrixLayout::Triplet),
    };

    let runs: Vec<(String, EmConfig<f64>)> = match &grid {
        Some(lambdas) => lambdas
            .iter()
            .map(|&l| {
                let flags = BadmmFlags { lambda: Some(l), ..flags.clone() };
                Ok((grid_file_name(l), EmConfig { badmm: Some(badmm_config(&flags, badmm_tol)?), ..base }))
            })
            .collect::<Result<_, Failure>>()?,
        None if flags.any() => vec![("fit.json".to_owned(), EmConfig { badmm: Some(badmm_config(&flags, badmm_tol)?), ..base })],
        None => vec![("fit.json".to_owned(), base)],
    };

    create_dir(&args.out)?;
    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let mut outputs = Vec::new();
    let mut configs = Vec::new();
    for (name, cfg) in &runs {
        let result = fit(&dataset, &kernel, cfg)?;
        write_json(&args.out.join(name), &FitRecord::new(&result, cfg, &id_refs, layout))?;
        outputs.push(name.clone());
        configs.push(io::EmRecord::from_config(cfg));
    }
    let manifest = Manifest {
        command: "fit",
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs(&[("data", Some(&args.data)), ("types", args.types.as_deref())]),
        outputs,
        seed: args.seed.or(file.seed),
        config: json!({
            "beta": beta,
            "num_types": dataset.num_types(),
            "max_n": max_n,
            "responsibilities": layout.map(|l| format!("{l:?}").to_lowercase()),
            "runs": configs,
        }),
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

pub fn infer(args: &InferArgs, file: &FileConfig) -> Outcome {
    let b0 = read_with(&args.matrix, io::read_transition_matrix::<f64, _>)?;
    let max_n = args.max_n.or(file.max_n).unwrap_or(DEFAULT_MAX_N);
    if b0.n() > max_n {
        return Err(Failure::domain(format!("matrix is {0}x{0}, above --max-n {max_n}", b0.n())));
    }
    let cfg = badmm_config(&args.badmm.merged(file), args.tol.or(file.tol))?;
    let state = structure_matrix(&b0, &cfg)?;
    let stats = structure_stats(&state)?;

    create_dir(&args.out)?;
    write_with(&args.out.join("B.json"), |w| io::write_matrix(w, state.b.as_matrix(), MatrixLayout::Dense))?;
    write_with(&args.out.join("X1.json"), |w| io::write_matrix(w, &state.x1, MatrixLayout::Triplet))?;
    write_with(&args.out.join("X2.json"), |w| io::write_matrix(w, &state.x2, MatrixLayout::Dense))?;
    let mut log = String::from("iteration\tresidual_x1\tresidual_x2\n");
    for (k, (r1, r2)) in state.residual_history.iter().enumerate() {
        log.push_str(&format!("{}\t{r1}\t{r2}\n", k + 1));
    }
    write_bytes(&args.out.join("residuals.tsv"), log.as_bytes())?;
    write_json(
        &args.out.join("stats.json"),
        &json!({
            "iterations": state.iterations,
            "objective": state.objective,
            "support_size": stats.support_size,
            "numerical_rank": stats.numerical_rank,
            "primal_residuals": [state.primal_residuals.0, state.primal_residuals.1],
        }),
    )?;
    let manifest = Manifest {
        command: "infer",
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs(&[("matrix", Some(&args.matrix))]),
        outputs: ["B.json", "X1.json", "X2.json", "residuals.tsv", "stats.json"].map(String::from).to_vec(),
        seed: args.seed.or(file.seed),
        config: json!({ "badmm": io::BadmmRecord::from_config(&cfg), "max_n": max_n }),
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

pub fn eval(args: &EvalArgs, file: &FileConfig) -> Outcome {
    let record = read_with(&args.fit, io::read_fit)?;
    let params = record.params.to_params::<f64>().map_err(|e| Failure::from(e).in_file(&args.fit))?;
    let badmm = record
        .config
        .badmm
        .as_ref()
        .map(|b| b.to_config::<f64>())
        .transpose()
        .map_err(|e| Failure::from(e).in_file(&args.fit))?;
    let sequences = read_dataset(&args.data, args.types.as_deref())?;
    let dataset = Dataset::new(sequences, params.num_types()).map_err(|e| Failure::from(e).in_file(&args.data))?;

    let metrics = MetricsReport::evaluate(&params, &dataset)?;
    create_dir(&args.out)?;
    write_json(
        &args.out.join("metrics.json"),
        &json!({
            "ell": metrics.ell,
            "acc": metrics.acc,
            "per_type_acc": metrics.per_type_acc,
            "n_events": metrics.n_events,
        }),
    )?;
    let tsv = format!("{}\n{}\n", MetricsReport::<f64>::tsv_header(params.num_types()), metrics.tsv_row());
    write_bytes(&args.out.join("metrics.tsv"), tsv.as_bytes())?;
    let mut outputs = vec!["metrics.json".to_owned(), "metrics.tsv".to_owned()];

    let max_n = args.max_n.or(file.max_n).unwrap_or(DEFAULT_MAX_N);
    if let Some(path) = &args.labels {
        let labels = read_with(path, io::read_labels)?;
        if labels.len() != dataset.len() {
            return Err(Failure::validation(format!(
                "{} has {} label records for {} sequences",
                path.display(),
                labels.len(),
                dataset.len()
            )));
        }
        for (l, s) in labels.iter().zip(dataset.sequences()) {
            if l.id() != s.id() || l.len() != s.len() {
                return Err(Failure::validation(format!(
                    "labels `{}` ({} events) do not match sequence `{}` ({} events)",
                    l.id(),
                    l.len(),
                    s.id(),
                    s.len()
                )));
            }
        }
        check_max_n(dataset.sequences(), max_n)?;
        let rs = responsibilities(&params, &dataset, badmm.as_ref())?;
        let reports = rs.iter().zip(&labels).map(|(r, l)| parent_recovery(r, l)).collect::<Result<Vec<_>, _>>()?;
        let pooled = BranchReport::pool(&reports);
        let sizes: Vec<usize> = dataset.sequences().iter().map(|s| s.len()).collect();
        write_json(
            &args.out.join("branch.json"),
            &json!({
                "parent_accuracy": pooled.parent_accuracy,
                "chance_parent_accuracy": chance_parent_accuracy(&sizes),
                "immigrant_f1": pooled.immigrant_f1,
                "support_size": pooled.support_size,
                "numerical_rank": pooled.numerical_rank,
                "n_events": pooled.n_events,
                "structured": badmm.is_some(),
            }),
        )?;
        let tsv = format!("{}\n{}\n", BranchReport::<f64>::tsv_header(), pooled.tsv_row());
        write_bytes(&args.out.join("branch.tsv"), tsv.as_bytes())?;
        outputs.extend(["branch.json".to_owned(), "branch.tsv".to_owned()]);
    }
    let manifest = Manifest {
        command: "eval",
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs(&[
            ("fit", Some(&args.fit)),
            ("data", Some(&args.data)),
            ("types", args.types.as_deref()),
            ("labels", args.labels.as_deref()),
        ]),
        outputs,
        seed: None,
        config: json!({ "max_n": max_n }),
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn rank(args: &RankArgs) -> Outcome {
    let b = read_with(&args.matrix, io::read_transition_matrix::<f64, _>)?;
    let text = fs::read_to_string(&args.event_types).map_err(|e| Failure::io(&args.event_types, e))?;
    let types: Vec<usize> = serde_json::from_str(&text)
        .map_err(|e| Failure::validation(format!("line {}: {e}", e.line())).in_file(&args.event_types))?;
    let ranking = influence_ranking(&b, &types)?;
    let mut tsv = String::from("type\tscore\n");
    for (k, score) in &ranking {
        tsv.push_str(&format!("{k}\t{score}\n"));
    }
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_bytes(&args.out, tsv.as_bytes())?;
    let manifest = Manifest {
        command: "rank",
        version: env!("CARGO_PKG_VERSION"),
        inputs: inputs(&[("matrix", Some(&args.matrix)), ("event_types", Some(&args.event_types))]),
        outputs: vec![args.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()],
        seed: None,
        config: json!({}),
    };
    write_json(&manifest_path(&args.out), &manifest)
}
