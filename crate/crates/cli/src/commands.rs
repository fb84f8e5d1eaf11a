use std::path::Path;

use marginloss::boosting::{staged_diagnostics, train_adaboost, BoostOptions};
use marginloss::datagen::{generate, GenConfig};
use marginloss::estimator::{exp_empirical_risk, fit, pnorm_fit, BasisFn, FitResult};
use marginloss::io::{read_dataset, read_model, write_dataset, BoostModelFile, LinearModelFile, LossDescriptor, ModelFile};
use marginloss::loss_factory::{
    build_loss, conformability_check, convexity_check, default_check_grid, odds_ratio_check, tabulate,
};
use marginloss::residuals::{partition, slrr};
use marginloss::{AnyLoss, Dataset, FitOptions, MarginLoss, ModelSpec, NamedLoss, SymmetricCdf, WeightFn};
use serde_json::{json, Value};

use crate::args::{
    BoostArgs, CheckArgs, FitArgs, FitSettings, Format, GlobalArgs, LossArgs, ModelKind, PnormFitArgs, ResidualsArgs,
    SimulateArgs, TabulateArgs,
};
use crate::output::{header_comments, sink, summary, table_format, write_document, CliResult, Failure, NumericTable};

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Validation(message.into())
}

/// Builds the loss and the descriptor recorded in outputs.
fn resolve_loss(args: &LossArgs) -> CliResult<(AnyLoss, LossDescriptor)> {
    if let Some(name) = &args.loss {
        let named: NamedLoss = name.parse()?;
        let loss = named.build()?;
        let descriptor = match named.triple() {
            Some((dist, weight, k)) => LossDescriptor {
                name: named.identifier(),
                dist: dist.name().into(),
                weight: Some(weight.identifier()),
                k: Some(k),
            },
            None => LossDescriptor {
                name: named.identifier(),
                dist: SymmetricCdf::Logistic.name().into(),
                weight: None,
                k: None,
            },
        };
        return Ok((loss, descriptor));
    }
    let (Some(dist), Some(weight)) = (&args.dist, &args.weight) else {
        return Err(invalid("give --loss <name>, or --dist and --weight"));
    };
    let dist: SymmetricCdf = dist.parse()?;
    let weight: WeightFn = weight.parse()?;
    let loss = build_loss(dist, weight, args.k)?;
    let descriptor = LossDescriptor {
        name: loss.name(),
        dist: dist.name().into(),
        weight: Some(loss.weight().identifier()),
        k: Some(loss.k()),
    };
    Ok((AnyLoss::Conformable(loss), descriptor))
}

fn parse_range(raw: &str) -> CliResult<(f64, f64)> {
    let parsed = raw.split_once(':').and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)));
    parsed.ok_or_else(|| invalid(format!("range `{raw}` is not of the form a:b")))
}

fn path_value(path: Option<&Path>) -> Value {
    path.map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

pub fn losses_tabulate(global: &GlobalArgs, args: &TabulateArgs) -> CliResult<()> {
    let (loss, descriptor) = resolve_loss(&args.loss)?;
    let (a, b) = parse_range(&args.range)?;
    let table = tabulate(&loss, a, b, args.points)?;
    let format = table_format(global.format, args.out.as_deref(), Format::Tsv);
    let config = json!({
        "loss": descriptor,
        "range": [a, b],
        "points": args.points,
        "format": format,
        "out": path_value(args.out.as_deref()),
    });
    let rows = (0..table.len()).map(|i| vec![table.grid[i], table.values[i], table.derivatives[i]]).collect();
    let columns = ["v", "phi", "dphi"].map(String::from).to_vec();
    NumericTable { columns, rows }.write(args.out.as_deref(), format, "losses tabulate", &config)
}

pub fn losses_check(args: &CheckArgs) -> CliResult<()> {
    let (loss, descriptor) = resolve_loss(&args.loss)?;
    let report = match &loss {
        AnyLoss::Conformable(l) => {
            let grid = default_check_grid(l.dist());
            let conformability = conformability_check(l, &grid);
            // weights without a log-derivative fall back to the registered flag
            let (convex, convexity) = match convexity_check(l, &grid) {
                Ok(r) => (r.convex, serde_json::to_value(&r).map_err(|e| invalid(e.to_string()))?),
                Err(_) => (l.is_convex(), Value::Null),
            };
            json!({
                "loss": descriptor,
                "conformable": conformability.pass,
                "convex": convex,
                "conformability": conformability,
                "convexity": convexity,
            })
        }
        AnyLoss::Exponential(_) => {
            let grid = default_check_grid(SymmetricCdf::Logistic);
            let conformability = odds_ratio_check(&loss, SymmetricCdf::Logistic, &grid);
            json!({
                "loss": descriptor,
                "conformable": conformability.pass,
                "convex": loss.is_convex(),
                "conformability": conformability,
                "convexity": Value::Null,
            })
        }
    };
    summary(&report)
}

fn model_spec(settings: &FitSettings) -> CliResult<ModelSpec> {
    match settings.model {
        ModelKind::Linear => Ok(ModelSpec::Linear { intercept: settings.intercept }),
        ModelKind::Basis => {
            if settings.intercept {
                return Err(invalid("--intercept applies to --model linear; add a constant basis function instead"));
            }
            let path = settings.basis.as_deref().ok_or_else(|| invalid("--model basis needs --basis <file>"))?;
            let basis: Vec<BasisFn> = serde_json::from_reader(marginloss::io::open(path)?)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok(ModelSpec::BasisExpansion { basis })
        }
    }
}

fn fit_options(global: &GlobalArgs, settings: &FitSettings) -> FitOptions {
    FitOptions {
        tolerance: settings.tol,
        max_iter: settings.max_iter,
        restarts: settings.restarts,
        seed: global.seed.unwrap_or(0),
        divergence_threshold: settings.divergence_threshold,
    }
}

/// A finished fit on its way to a model file.
struct FitRun<'a> {
    command: &'a str,
    loss: LossDescriptor,
    spec: ModelSpec,
    opts: FitOptions,
    result: FitResult,
}

/// Writes the model file and prints a summary line when it went to a file.
fn finish_fit(global: &GlobalArgs, settings: &FitSettings, data: &Dataset, run: FitRun<'_>) -> CliResult<()> {
    let FitRun { command, loss, spec, opts, result } = run;
    let r_emp = exp_empirical_risk(&spec, &result.beta, data)?;
    let config = json!({
        "command": command,
        "loss": &loss,
        "data": settings.data.display().to_string(),
        "model": &spec,
        "options": &opts,
        "threads": global.threads,
        "out": path_value(settings.out.as_deref()),
    });
    let file = ModelFile::Linear(LinearModelFile {
        loss,
        model: spec,
        features: data.names().to_vec(),
        beta: result.beta,
        status: result.status,
        iterations: result.iterations,
        final_risk: result.final_risk,
        gradient_norm: result.gradient_norm,
        r_emp,
        config,
    });
    write_document(settings.out.as_deref(), &file)?;
    if settings.out.is_some() {
        summary(&json!({
            "status": result.status.name(),
            "iterations": result.iterations,
            "final_risk": result.final_risk,
            "r_emp": r_emp,
        }))?;
    }
    Ok(())
}

pub fn fit_command(global: &GlobalArgs, args: &FitArgs) -> CliResult<()> {
    let (loss, descriptor) = resolve_loss(&args.loss)?;
    let spec = model_spec(&args.settings)?;
    let data = read_dataset(&args.settings.data)?;
    let opts = fit_options(global, &args.settings);
    let result = fit(&loss, &spec, &data, &opts)?;
    let run = FitRun { command: "fit", loss: descriptor, spec, opts, result };
    finish_fit(global, &args.settings, &data, run)
}

pub fn pnorm_fit_command(global: &GlobalArgs, args: &PnormFitArgs) -> CliResult<()> {
    let spec = model_spec(&args.settings)?;
    let data = read_dataset(&args.settings.data)?;
    let opts = fit_options(global, &args.settings);
    let result = pnorm_fit(&spec, &data, args.p, &opts)?;
    let descriptor = LossDescriptor {
        name: format!("pnorm:{}", args.p),
        dist: SymmetricCdf::Logistic.name().into(),
        weight: None,
        k: None,
    };
    let run = FitRun { command: "pnorm-fit", loss: descriptor, spec, opts, result };
    finish_fit(global, &args.settings, &data, run)
}

pub fn boost(global: &GlobalArgs, args: &BoostArgs) -> CliResult<()> {
    let data = read_dataset(&args.data)?;
    let opts = BoostOptions { r_emp_stop: args.r_emp_stop, seed: global.seed.unwrap_or(0), record_weights: false };
    let model = train_adaboost(&data, args.stages, &opts)?;
    let r_emp = *model.staged_r_emp.last().expect("staged R_Emp starts at stage 0");
    let diag_format = table_format(global.format, args.diag.as_deref(), Format::Csv);
    let config = json!({
        "command": "boost",
        "data": args.data.display().to_string(),
        "stages": args.stages,
        "options": &opts,
        "threads": global.threads,
        "out": path_value(args.out.as_deref()),
        "diag": path_value(args.diag.as_deref()),
        "diag_format": diag_format,
    });
    if let Some(diag) = &args.diag {
        let rows = staged_diagnostics(&model, &data)?
            .iter()
            .map(|d| vec![d.stage as f64, d.train_risk, d.r_emp, d.misclassification])
            .collect();
        let columns = ["stage", "train_risk", "r_emp", "misclassification"].map(String::from).to_vec();
        NumericTable { columns, rows }.write(Some(diag), diag_format, "boost", &config)?;
    }
    let status = model.status;
    let stages = model.len();
    let file = ModelFile::Adaboost(BoostModelFile { features: data.names().to_vec(), model, r_emp, config });
    write_document(args.out.as_deref(), &file)?;
    if args.out.is_some() {
        summary(&json!({ "status": status, "stages": stages, "r_emp": r_emp }))?;
    }
    Ok(())
}

pub fn simulate(global: &GlobalArgs, args: &SimulateArgs) -> CliResult<()> {
    let mut cfg: GenConfig = serde_json::from_reader(marginloss::io::open(&args.config)?)
        .map_err(|e| invalid(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    let data = generate(&cfg)?;
    let format = table_format(global.format, args.out.as_deref(), Format::Csv);
    let config = json!({
        "generator": &cfg,
        "format": format,
        "out": path_value(args.out.as_deref()),
    });
    match format {
        Format::Json => {
            let mut columns = data.names().to_vec();
            columns.push(marginloss::io::LABEL_COLUMN.into());
            let rows = data
                .rows()
                .map(|(x, y)| {
                    let mut row = x.to_vec();
                    row.push(y.sign());
                    row
                })
                .collect();
            NumericTable { columns, rows }.write(args.out.as_deref(), format, "simulate", &config)
        }
        Format::Csv | Format::Tsv => {
            let mut w = sink(args.out.as_deref())?;
            write_dataset(&mut w, &data, &header_comments("simulate", &config), crate::output::delimiter(format))?;
            w.flush()?;
            Ok(())
        }
    }
}

/// `(theta_m, b_m(x))` pairs of a fitted score and a name per component.
struct Components {
    names: Vec<String>,
    spec: ModelSpec,
    coefficients: Vec<f64>,
}

impl Components {
    fn of(model: &ModelFile) -> Self {
        let (spec, coefficients) = model.score_model();
        let names = match (model, &spec) {
            (ModelFile::Adaboost(_), _) => (1..=coefficients.len()).map(|m| format!("stage{m}")).collect(),
            (_, ModelSpec::Linear { intercept }) => {
                let features = model.features().iter().cloned();
                if *intercept {
                    std::iter::once("intercept".to_string()).chain(features).collect()
                } else {
                    features.collect()
                }
            }
            (_, ModelSpec::BasisExpansion { basis }) => basis.iter().map(basis_name).collect(),
        };
        Components { names, spec, coefficients }
    }

    fn at(&self, x: &[f64], buf: &mut [f64]) -> Vec<(f64, f64)> {
        self.spec.design_row(x, buf);
        self.coefficients.iter().copied().zip(buf.iter().copied()).collect()
    }
}

fn basis_name(b: &BasisFn) -> String {
    match b {
        BasisFn::Constant => "constant".into(),
        BasisFn::Feature { index } => format!("x[{index}]"),
        BasisFn::Square { index } => format!("x[{index}]^2"),
        BasisFn::Product { a, b } => format!("x[{a}]*x[{b}]"),
        BasisFn::Stump { feature, threshold, polarity } => format!("stump(x[{feature}],{threshold},{polarity})"),
    }
}

pub fn diagnose_residuals(global: &GlobalArgs, args: &ResidualsArgs) -> CliResult<()> {
    let model = read_model(&args.model)?;
    let data = read_dataset(&args.data)?;
    if data.names() != model.features() {
        return Err(invalid(format!(
            "dataset features {:?} do not match model features {:?}",
            data.names(),
            model.features()
        )));
    }
    let components = Components::of(&model);
    components.spec.validate(data.p())?;
    if components.coefficients.len() != components.spec.n_params(data.p()) {
        return Err(invalid("model coefficients do not match its basis"));
    }
    let format = table_format(global.format, args.out.as_deref(), Format::Csv);
    let config = json!({
        "command": "diagnose residuals",
        "model": args.model.display().to_string(),
        "data": args.data.display().to_string(),
        "components": &components.names,
        "format": format,
        "out": path_value(args.out.as_deref()),
    });
    let mut columns = ["y_star", "f", "margin", "s", "s_squared"].map(String::from).to_vec();
    columns.extend((1..=components.names.len()).map(|m| format!("ln_s2_{m}")));
    let mut buf = vec![0.0; components.coefficients.len()];
    let mut rows = Vec::with_capacity(data.len());
    for (x, y) in data.rows() {
        let parts = components.at(x, &mut buf);
        let split = partition(y, &parts)?;
        let f: f64 = parts.iter().map(|(theta, b)| theta * b).sum();
        let value = slrr(y, f)?;
        let mut row = vec![y.sign(), f, value.margin, value.s, value.s_squared()];
        row.extend(split.factor_ln_s2);
        rows.push(row);
    }
    NumericTable { columns, rows }.write(args.out.as_deref(), format, "diagnose residuals", &config)
}
