use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use vidpop::fit::{classify_trace, daily_views, FitOptions, FitResult};
use vidpop::metrics::{corpus_summary, entropy as trace_entropy, EntropyReport};
use vidpop::sim::{aggregate, simulate_parallel, SimConfig, RNG_ALGORITHM};
use vidpop::spread::{eval_x, scan_signs};
use vidpop::{
    critical_times, find_peak, sample_spread, solve_reaction, ModelParams, Regime, TimeGrid,
    ViewTrace,
};

use crate::error::{CliError, Result};
use crate::ingest::{input_files, read_traces};
use crate::output::{file_digest, num, OutDir, RunManifest, Table};
use crate::{ClassifyArgs, EntropyArgs, EvalArgs, FitArgs, ParamArgs, ReplayArgs, SimulateArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    n_users: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    q: Option<f64>,
    gamma: Option<f64>,
}

/// Merges `--params` and flags. Without `need_gamma`, a missing gamma defaults to 1.
fn resolve_params(args: &ParamArgs, need_gamma: bool) -> Result<(ModelParams, Option<String>)> {
    let (file, digest) = match &args.params {
        Some(path) => {
            let data = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            let file: ParamFile = serde_json::from_slice(&data).map_err(|e| CliError::Parse {
                path: path.clone(),
                line: e.line() as u64,
                message: e.to_string(),
            })?;
            (file, Some(crate::output::sha256_hex(&data)))
        }
        None => (ParamFile::default(), None),
    };
    let pick = |flag: Option<f64>, file: Option<f64>, name: &'static str| {
        flag.or(file).ok_or(CliError::MissingParameter(name))
    };
    let n = pick(args.n, file.n_users, "n")?;
    let alpha = pick(args.alpha, file.alpha, "alpha")?;
    let beta = pick(args.beta, file.beta, "beta")?;
    let q = pick(args.q, file.q, "q")?;
    let gamma = match pick(args.gamma, file.gamma, "gamma") {
        Ok(g) => g,
        Err(_) if !need_gamma => 1.0,
        Err(e) => return Err(e),
    };
    let params = ModelParams::new(n, alpha, beta, q, gamma)?;
    Ok((params, digest))
}

fn record_param_file(manifest: &mut RunManifest, args: &ParamArgs, digest: Option<String>) {
    if let (Some(path), Some(d)) = (&args.params, digest) {
        manifest.inputs.insert(path.display().to_string(), d);
    }
}

fn print_done(out: &Path, manifest: &RunManifest) {
    let files: Vec<&String> = manifest.outputs.keys().collect();
    println!(
        "{}",
        json!({ "ok": true, "subcommand": manifest.subcommand, "out": out.display().to_string(), "files": files })
    );
}

fn classification(params: &ModelParams, scan_points: usize) -> Result<serde_json::Value> {
    let regime = vidpop::classify(params);
    let ct = critical_times(params);
    let consistent = if scan_points >= 2 {
        let horizon = (2.0 * ct.t_one).max(10.0 / params.tau());
        let grid = TimeGrid::spanning(horizon, scan_points)?;
        Some(scan_signs(params, &grid).matches(regime, &ct))
    } else {
        None
    };
    Ok(json!({
        "regime": regime.name(),
        "family": format!("{:?}", regime.family()),
        "t_prime": ct.t_prime,
        "t_one": ct.t_one,
        "t_two": ct.t_two,
        "sign_scan_consistent": consistent,
    }))
}

pub fn eval(a: &EvalArgs, argv: &[String]) -> Result<()> {
    let (params, digest) = resolve_params(&a.params, true)?;
    let grid = TimeGrid::new(a.dt, a.steps)?;
    let spread = sample_spread(&params, &grid);
    let reaction = solve_reaction(&params, &grid)?;

    let mut table = Table::new(&["t", "x", "y", "s", "dx", "z", "w", "dw"]);
    for k in 0..grid.n_steps {
        table.row([
            num(spread.t[k]),
            num(spread.x[k]),
            num(spread.y[k]),
            num(spread.s[k]),
            num(spread.dx[k]),
            num(reaction.z[k]),
            num(reaction.w[k]),
            num(reaction.dw[k]),
        ]);
    }

    let (peak, peak_error) = match find_peak(&params, grid.horizon()) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = json!({
        "params": params,
        "reduced": params.reduced(),
        "classification": classification(&params, 0)?,
        "critical_times": critical_times(&params),
        "peak": peak,
        "peak_error": peak_error,
    });

    let mut manifest = RunManifest::new("eval", argv);
    manifest.params = Some(params);
    manifest.grid = Some(grid);
    record_param_file(&mut manifest, &a.params, digest);
    let mut out = OutDir::create(&a.out, manifest)?;
    out.write("trajectory.csv", &table.into_bytes())?;
    out.write_json("summary.json", &summary)?;
    let manifest = out.finish()?;
    print_done(&a.out, &manifest);
    Ok(())
}

pub fn classify(a: &ClassifyArgs, argv: &[String]) -> Result<()> {
    let (params, digest) = resolve_params(&a.params, false)?;
    let result = classification(&params, a.scan_points)?;
    println!("{result}");
    if let Some(dir) = &a.out {
        let mut manifest = RunManifest::new("classify", argv);
        manifest.params = Some(params);
        record_param_file(&mut manifest, &a.params, digest);
        let mut out = OutDir::create(dir, manifest)?;
        out.write_json("classify.json", &result)?;
        out.finish()?;
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs, argv: &[String]) -> Result<()> {
    let seed = a.seed.ok_or(CliError::MissingParameter("seed"))?;
    let (params, digest) = resolve_params(&a.params, true)?;
    let mut config = SimConfig::new(params, a.dt_slot, a.slots, seed, a.runs);
    config.linearized = a.linearized;
    let traces = simulate_parallel(&config)?;
    let agg = aggregate(&traces)?;

    let mut manifest = RunManifest::new("simulate", argv);
    manifest.params = Some(params);
    manifest.seeds = Some(vec![seed]);
    manifest.rng = Some(RNG_ALGORITHM.into());
    manifest.options = Some(json!({
        "dt_slot": a.dt_slot,
        "n_slots": a.slots,
        "n_runs": a.runs,
        "linearized": a.linearized,
    }));
    record_param_file(&mut manifest, &a.params, digest);
    let mut out = OutDir::create(&a.out, manifest)?;

    for (i, tr) in traces.iter().enumerate() {
        let mut table = Table::new(&["slot", "x", "y", "s", "z", "w", "dw"]);
        for k in 0..tr.len() {
            table.row([
                k.to_string(),
                tr.x[k].to_string(),
                tr.y[k].to_string(),
                tr.s[k].to_string(),
                tr.z[k].to_string(),
                tr.w[k].to_string(),
                tr.dw[k].to_string(),
            ]);
        }
        out.write(&format!("run_{i:04}.csv"), &table.into_bytes())?;
    }

    let mut table = Table::new(&[
        "slot", "t", "x_mean", "x_sd", "y_mean", "y_sd", "s_mean", "s_sd", "z_mean", "z_sd",
        "w_mean", "w_sd", "dw_mean", "dw_sd", "x_fluid",
    ]);
    let (m, s) = (&agg.mean, &agg.sd);
    for k in 0..m.x.len() {
        let t = k as f64 * a.dt_slot;
        table.row([
            k.to_string(),
            num(t),
            num(m.x[k]),
            num(s.x[k]),
            num(m.y[k]),
            num(s.y[k]),
            num(m.s[k]),
            num(s.s[k]),
            num(m.z[k]),
            num(s.z[k]),
            num(m.w[k]),
            num(s.w[k]),
            num(m.dw[k]),
            num(s.dw[k]),
            num(eval_x(&params, t)),
        ]);
    }
    out.write("aggregate.csv", &table.into_bytes())?;
    let manifest = out.finish()?;
    print_done(&a.out, &manifest);
    Ok(())
}

pub fn fit(a: &FitArgs, argv: &[String]) -> Result<()> {
    let mut traces = read_traces(&a.trace)?;
    if let Some(id) = &a.video {
        traces.retain(|t| &t.video_id == id);
        if traces.is_empty() {
            return Err(CliError::Usage(format!("video `{id}` not found in {}", a.trace.display())));
        }
    }
    let options = FitOptions {
        max_evals_per_start: a.max_evals_per_start,
        ..FitOptions::default()
    };
    let results: Vec<FitResult> = traces
        .par_iter()
        .map(|t| vidpop::fit::fit(t, &options))
        .collect::<std::result::Result<_, _>>()?;

    let mut header = vec!["video_id", "day", "observed", "fitted"];
    if a.normalize {
        header.extend(["observed_normalized", "fitted_normalized"]);
    }
    let mut table = Table::new(&header);
    let mut fits_json = Vec::new();
    for (trace, r) in traces.iter().zip(&results) {
        let fitted = daily_views(&r.reduced(), trace.len())?;
        let norm = if a.normalize {
            let obs = trace.normalize_peak()?;
            let fit = ViewTrace::new(trace.video_id.clone(), fitted.clone()).normalize_peak()?;
            Some((obs, fit))
        } else {
            None
        };
        for d in 0..trace.len() {
            let mut row = vec![
                trace.video_id.clone(),
                d.to_string(),
                num(trace.counts[d]),
                num(fitted[d]),
            ];
            if let Some((obs, fit)) = &norm {
                row.push(num(obs[d]));
                row.push(num(fit[d]));
            }
            table.row(row);
        }
        let regime: Regime = classify_trace(r);
        let mut v = serde_json::to_value(r).expect("serializable fit");
        v["regime"] = regime.name().into();
        v["family"] = format!("{:?}", regime.family()).into();
        fits_json.push(v);
    }

    let mut manifest = RunManifest::new("fit", argv);
    manifest
        .inputs
        .insert(a.trace.display().to_string(), file_digest(&a.trace)?);
    manifest.options = Some(serde_json::to_value(&options).expect("serializable options"));
    let mut out = OutDir::create(&a.out, manifest)?;
    out.write_json("fits.json", &fits_json)?;
    out.write("overlay.csv", &table.into_bytes())?;
    let manifest = out.finish()?;
    print_done(&a.out, &manifest);
    Ok(())
}

pub fn entropy(a: &EntropyArgs, argv: &[String]) -> Result<()> {
    let files = input_files(&a.input)?;
    if files.is_empty() {
        return Err(CliError::Model(vidpop::Error::EmptyInput("no CSV files in input")));
    }
    let mut manifest = RunManifest::new("entropy", argv);
    let mut traces = Vec::new();
    for f in &files {
        manifest
            .inputs
            .insert(f.display().to_string(), file_digest(f)?);
        traces.extend(read_traces(f)?);
    }
    traces.sort_by(|a, b| a.video_id.cmp(&b.video_id));

    let outcomes: Vec<_> = traces
        .par_iter()
        .map(|t| trace_entropy(t, a.window))
        .collect();
    let mut reports: Vec<EntropyReport> = Vec::new();
    let mut skipped = Vec::new();
    for (trace, outcome) in traces.iter().zip(outcomes) {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) if a.skip_invalid => skipped.push(json!({
                "video_id": trace.video_id,
                "reason": e.to_string(),
            })),
            Err(e) => return Err(e.into()),
        }
    }
    let summary = corpus_summary(&reports)?;

    let mut lines = Vec::new();
    for r in &reports {
        lines.extend(serde_json::to_vec(r).expect("serializable report"));
        lines.push(b'\n');
    }
    let mut cdf = Table::new(&["entropy", "cdf"]);
    for (e, p) in &summary.cdf {
        cdf.row([num(*e), num(*p)]);
    }
    let mut scatter = Table::new(&["video_id", "entropy", "total_views"]);
    for p in &summary.scatter {
        scatter.row([p.video_id.clone(), num(p.entropy), num(p.total_views)]);
    }

    manifest.options = Some(json!({ "window": a.window, "skipped": skipped }));
    let mut out = OutDir::create(&a.out, manifest)?;
    out.write("entropy.jsonl", &lines)?;
    out.write("cdf.csv", &cdf.into_bytes())?;
    out.write("scatter.csv", &scatter.into_bytes())?;
    let manifest = out.finish()?;
    print_done(&a.out, &manifest);
    Ok(())
}

/// Replaces the `--out` value of a recorded command line.
fn redirect_out(args: &[String], out: &Path) -> Vec<String> {
    let out = out.display().to_string();
    let mut result = Vec::with_capacity(args.len() + 2);
    let mut replaced = false;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
            result.push(a.clone());
            result.push(out.clone());
            replaced = true;
        } else if a.starts_with("--out=") {
            result.push(format!("--out={out}"));
            replaced = true;
        } else {
            result.push(a.clone());
        }
    }
    if !replaced {
        result.push("--out".into());
        result.push(out);
    }
    result
}

pub fn replay(a: &ReplayArgs) -> Result<()> {
    let data = std::fs::read(&a.manifest).map_err(|e| CliError::io(&a.manifest, e))?;
    let recorded: RunManifest = serde_json::from_slice(&data).map_err(|e| CliError::Parse {
        path: a.manifest.clone(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    if recorded.subcommand == "replay" {
        return Err(CliError::Usage("cannot replay a replay".into()));
    }
    for (path, digest) in &recorded.inputs {
        if file_digest(Path::new(path))? != *digest {
            return Err(CliError::ReplayMismatch(format!("input {path}")));
        }
    }
    crate::dispatch(redirect_out(&recorded.args, &a.out))?;
    let fresh_path = a.out.join("manifest.json");
    let fresh_data = std::fs::read(&fresh_path).map_err(|e| CliError::io(&fresh_path, e))?;
    let fresh: RunManifest = serde_json::from_slice(&fresh_data).map_err(|e| CliError::Parse {
        path: fresh_path.clone(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    if let Some((name, _)) = recorded
        .outputs
        .iter()
        .find(|(name, digest)| fresh.outputs.get(*name) != Some(digest))
    {
        return Err(CliError::ReplayMismatch(name.clone()));
    }
    if fresh.outputs.len() != recorded.outputs.len() {
        return Err(CliError::ReplayMismatch("output file set".into()));
    }
    println!(
        "{}",
        json!({ "replay": "identical", "outputs": recorded.outputs.len() })
    );
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_redirection() {
        let args: Vec<String> = ["eval", "--out", "a", "--dt", "1"].map(String::from).to_vec();
        assert_eq!(
            redirect_out(&args, Path::new("b")),
            ["eval", "--out", "b", "--dt", "1"].map(String::from).to_vec()
        );
        let args: Vec<String> = ["eval", "--out=a"].map(String::from).to_vec();
        assert_eq!(redirect_out(&args, Path::new("b")), vec!["eval", "--out=b"]);
    }
}
