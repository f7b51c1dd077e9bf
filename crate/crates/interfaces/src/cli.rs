//! The `cardionet` command line.
//!
//! Scalar results print as `key<TAB>value` lines with floats in shortest
//! round-trip form; the analysis commands print aligned tables. `--json`
//! switches every command to the structured form served over HTTP.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use cardionet_core::analysis::{
    compare_proportions, influential_findings, prevalence_table, whatif_improvements, BetaPosterior,
    DEFAULT_COMPARISON_SAMPLES,
};
use cardionet_core::inference::{parse_evidence, parse_item, posterior_marginals, Method};
use cardionet_core::io::{infer_variables, parse_dataset, parse_structure, serialize_network, serialize_structure};
use cardionet_core::learning::{cross_validate, fit_network, forward_sample, DEFAULT_ALPHA, DEFAULT_FOLDS};
use cardionet_core::structure::{apply_edits, greedy_thick_thinning, parse_arc_list, EditScript, StructureConstraints};
use cardionet_core::{Dataset, Evidence, VariableSpec};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::{answer_query, load_network, parse_method, read_text, write_text, AppError};

#[derive(Debug, Parser)]
#[command(name = "cardionet", version, about = "Discrete Bayesian networks for cardiovascular risk factors")]
struct Cli {
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct NetArg {
    /// Network document, or `fixture` for the built-in model.
    #[arg(long)]
    net: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit Dirichlet-posterior CPTs for a fixed structure.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Output network document; `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a structure by greedy thick thinning.
    LearnStructure {
        #[arg(long)]
        data: PathBuf,
        /// Arcs every candidate must contain, one `FROM TO` per line.
        #[arg(long)]
        required: Option<PathBuf>,
        /// Arcs no candidate may contain, one `FROM TO` per line.
        #[arg(long)]
        forbidden: Option<PathBuf>,
        /// Structure or network document declaring the variables and states.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        max_parents: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an edit script to a structure.
    Edit {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Conditional probability of a target given evidence.
    Query {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, num_args = 1..)]
        evidence: Vec<String>,
        #[arg(long)]
        target: String,
        /// `ve` (variable elimination) or `enum` (full enumeration).
        #[arg(long, default_value = "ve", value_parser = method_arg)]
        method: Method,
    },
    /// Posterior marginal of every variable.
    Marginals {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, num_args = 1..)]
        evidence: Vec<String>,
    },
    /// Effect of dropping each evidence item on the target.
    Influence {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, num_args = 1.., required = true)]
        evidence: Vec<String>,
        #[arg(long)]
        target: String,
    },
    /// Target probability after improving one base finding at a time.
    Whatif {
        #[command(flatten)]
        net: NetArg,
        #[arg(long, num_args = 1.., required = true)]
        base: Vec<String>,
        #[arg(long, num_args = 1.., required = true)]
        improve: Vec<String>,
        /// Also apply all improvements together.
        #[arg(long)]
        combined: bool,
        #[arg(long)]
        target: String,
    },
    /// Outcome probabilities for each state of a grouping variable.
    Prevalence {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        group: String,
        #[arg(long, num_args = 1.., required = true)]
        outcome: Vec<String>,
    },
    /// Draw records by ancestral sampling.
    Sample {
        #[command(flatten)]
        net: NetArg,
        #[arg(short = 'n')]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// K-fold held-out log-likelihood of a structure.
    Crossval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Monte Carlo estimate of P(theta1 > theta2) for two Beta posteriors.
    CompareBeta {
        /// First posterior as `A,B`.
        #[arg(long, value_parser = beta_arg)]
        a: BetaPosterior,
        /// Second posterior as `A,B`.
        #[arg(long, value_parser = beta_arg)]
        b: BetaPosterior,
        #[arg(short = 'n', default_value_t = DEFAULT_COMPARISON_SAMPLES)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the JSON API for one network.
    Serve {
        #[command(flatten)]
        net: NetArg,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn method_arg(s: &str) -> Result<Method, String> {
    parse_method(s).ok_or_else(|| format!("unknown method {s:?}; expected ve or enum"))
}

fn beta_arg(s: &str) -> Result<BetaPosterior, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected A,B, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    BetaPosterior::new(num(a)?, num(b)?).map_err(|e| e.to_string())
}

/// Runs one command line (without the program name) and returns the exit
/// code: 0 on success, 2 on usage errors, 1 on domain errors.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once("cardionet".into()).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}: {}", e.name(), e);
            1
        }
    }
}

/// Writes `text` to `path`, or to `out` when the path is `-`.
fn emit(path: &Path, text: &str, out: &mut dyn Write) -> Result<bool, AppError> {
    if path == Path::new("-") {
        out.write_all(text.as_bytes()).map_err(|e| AppError::io("<stdout>", e))?;
        Ok(true)
    } else {
        write_text(path, text)?;
        Ok(false)
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| AppError::Request(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| AppError::io("<stdout>", e))
}

fn print_lines(out: &mut dyn Write, lines: &[(&str, String)]) -> Result<(), AppError> {
    for (k, v) in lines {
        writeln!(out, "{k}\t{v}").map_err(|e| AppError::io("<stdout>", e))?;
    }
    Ok(())
}

fn print_text(out: &mut dyn Write, value: &impl std::fmt::Display) -> Result<(), AppError> {
    write!(out, "{value}").map_err(|e| AppError::io("<stdout>", e))
}

/// Result reported after writing a file.
#[derive(Serialize)]
struct Written {
    path: PathBuf,
    #[serde(flatten)]
    details: BTreeMap<&'static str, serde_json::Value>,
}

fn report_written(
    out: &mut dyn Write,
    json: bool,
    path: &Path,
    details: Vec<(&'static str, serde_json::Value)>,
) -> Result<(), AppError> {
    if json {
        return print_json(
            out,
            &Written {
                path: path.to_path_buf(),
                details: details.into_iter().collect(),
            },
        );
    }
    let mut lines = vec![("written", path.display().to_string())];
    lines.extend(details.into_iter().map(|(k, v)| {
        let text = match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        (k, text)
    }));
    print_lines(out, &lines)
}

fn load_dataset(path: &Path, variables: &[VariableSpec]) -> Result<Dataset, AppError> {
    Ok(parse_dataset(&read_text(path)?, variables)?)
}

fn target_evidence(item: &str) -> Result<Evidence, AppError> {
    let (var, states) = parse_item(item)?;
    Ok(Evidence::new().with_any(var, states))
}

fn arc_file(path: Option<&Path>) -> Result<Vec<(String, String)>, AppError> {
    match path {
        Some(p) => Ok(parse_arc_list(&read_text(p)?)?),
        None => Ok(Vec::new()),
    }
}

#[derive(Serialize)]
struct CrossvalReport {
    folds: Vec<cardionet_core::learning::FoldScore>,
    mean_train_per_record: f64,
    mean_holdout_per_record: f64,
    gap: f64,
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), AppError> {
    let json = cli.json;
    match cli.command {
        Command::Fit {
            data,
            structure,
            alpha,
            out: dest,
        } => {
            let (variables, dag, _) = parse_structure(&read_text(&structure)?)?;
            let data = load_dataset(&data, &variables)?;
            let net = fit_network(&data, &dag, alpha)?;
            if !emit(&dest, &serialize_network(&net), out)? {
                report_written(
                    out,
                    json,
                    &dest,
                    vec![("records", data.len().into()), ("alpha", alpha.into())],
                )?;
            }
        }
        Command::LearnStructure {
            data,
            required,
            forbidden,
            schema,
            alpha,
            max_parents,
            out: dest,
        } => {
            let text = read_text(&data)?;
            let variables = match &schema {
                Some(p) => parse_structure(&read_text(p)?)?.0,
                None => infer_variables(&text)?,
            };
            let data = parse_dataset(&text, &variables)?;
            let constraints = StructureConstraints {
                required: arc_file(required.as_deref())?.into_iter().collect(),
                forbidden: arc_file(forbidden.as_deref())?.into_iter().collect(),
                max_parents,
            };
            let found = greedy_thick_thinning(&data, &constraints, alpha)?;
            let notes = BTreeMap::from([
                ("search_alpha".to_string(), alpha.to_string()),
                ("search_score".to_string(), found.score.to_string()),
                ("training_records".to_string(), data.len().to_string()),
            ]);
            if !emit(&dest, &serialize_structure(data.variables(), &found.dag, notes), out)? {
                report_written(
                    out,
                    json,
                    &dest,
                    vec![
                        ("score", found.score.into()),
                        ("arcs", found.dag.arc_count().into()),
                        ("steps", found.steps.len().into()),
                        ("local_optimum", found.local_optimum.into()),
                    ],
                )?;
            }
        }
        Command::Edit {
            structure,
            script,
            out: dest,
        } => {
            let (variables, dag, notes) = parse_structure(&read_text(&structure)?)?;
            let script: EditScript = read_text(&script)?.parse()?;
            let edited = apply_edits(&dag, &script)?;
            if !emit(&dest, &serialize_structure(&variables, &edited, notes), out)? {
                report_written(
                    out,
                    json,
                    &dest,
                    vec![("edits", script.len().into()), ("arcs", edited.arc_count().into())],
                )?;
            }
        }
        Command::Query {
            net,
            evidence,
            target,
            method,
        } => {
            let net = load_network(&net.net)?;
            let r = answer_query(&net, &parse_evidence(&evidence)?, &target_evidence(&target)?, method)?;
            if json {
                print_json(out, &r)?;
            } else {
                print_lines(
                    out,
                    &[
                        ("probability", r.probability.to_string()),
                        ("evidence_probability", r.evidence_probability.to_string()),
                        ("method", method_name(r.method).to_string()),
                    ],
                )?;
            }
        }
        Command::Marginals { net, evidence } => {
            let net = load_network(&net.net)?;
            let marginals = posterior_marginals(&net, &parse_evidence(&evidence)?)?;
            if json {
                print_json(out, &marginals)?;
            } else {
                for m in &marginals {
                    for (s, p) in m.states.iter().zip(&m.probabilities) {
                        writeln!(out, "{}\t{}\t{}", m.variable, s, p).map_err(|e| AppError::io("<stdout>", e))?;
                    }
                }
            }
        }
        Command::Influence { net, evidence, target } => {
            let net = load_network(&net.net)?;
            let report = influential_findings(&net, &parse_evidence(&evidence)?, &target_evidence(&target)?)?;
            if json {
                print_json(out, &report)?;
            } else {
                print_text(out, &report)?;
            }
        }
        Command::Whatif {
            net,
            base,
            improve,
            combined,
            target,
        } => {
            let net = load_network(&net.net)?;
            let improvements = improve
                .iter()
                .map(|i| crate::http::single_state(i))
                .collect::<Result<Vec<_>, _>>()?;
            let table = whatif_improvements(
                &net,
                &parse_evidence(&base)?,
                &improvements,
                &target_evidence(&target)?,
                combined,
            )?;
            if json {
                print_json(out, &table)?;
            } else {
                print_text(out, &table)?;
            }
        }
        Command::Prevalence { net, group, outcome } => {
            let net = load_network(&net.net)?;
            let outcomes = outcome
                .iter()
                .map(|o| parse_item(o))
                .collect::<Result<Vec<_>, _>>()?;
            let table = prevalence_table(&net, &group, &outcomes)?;
            if json {
                print_json(out, &table)?;
            } else {
                print_text(out, &table)?;
            }
        }
        Command::Sample {
            net,
            count,
            seed,
            out: dest,
        } => {
            let net = load_network(&net.net)?;
            let data = forward_sample(&net, count, seed);
            if !emit(&dest, &data.to_csv(), out)? {
                report_written(out, json, &dest, vec![("records", count.into()), ("seed", seed.into())])?;
            }
        }
        Command::Crossval {
            data,
            structure,
            folds,
            seed,
            alpha,
        } => {
            let (variables, dag, _) = parse_structure(&read_text(&structure)?)?;
            let data = load_dataset(&data, &variables)?;
            let scores = cross_validate(&data, &dag, folds, alpha, seed)?;
            let mean = |f: fn(&cardionet_core::learning::FoldScore) -> f64| {
                scores.iter().map(f).sum::<f64>() / scores.len() as f64
            };
            let report = CrossvalReport {
                mean_train_per_record: mean(|s| s.train_per_record()),
                mean_holdout_per_record: mean(|s| s.holdout_per_record()),
                gap: mean(|s| s.train_per_record()) - mean(|s| s.holdout_per_record()),
                folds: scores,
            };
            if json {
                print_json(out, &report)?;
            } else {
                let io = |e| AppError::io("<stdout>", e);
                writeln!(out, "fold\ttrain_records\tholdout_records\ttrain_per_record\tholdout_per_record").map_err(io)?;
                for s in &report.folds {
                    writeln!(
                        out,
                        "{}\t{}\t{}\t{}\t{}",
                        s.fold,
                        s.train_records,
                        s.holdout_records,
                        s.train_per_record(),
                        s.holdout_per_record()
                    )
                    .map_err(io)?;
                }
                print_lines(
                    out,
                    &[
                        ("mean_train_per_record", report.mean_train_per_record.to_string()),
                        ("mean_holdout_per_record", report.mean_holdout_per_record.to_string()),
                        ("gap", report.gap.to_string()),
                    ],
                )?;
            }
        }
        Command::CompareBeta { a, b, samples, seed } => {
            let c = compare_proportions(a, b, samples, seed)?;
            if json {
                print_json(out, &c)?;
            } else {
                print_lines(
                    out,
                    &[
                        ("probability", c.probability.to_string()),
                        ("standard_error", c.standard_error.to_string()),
                        ("first", c.first.to_string()),
                        ("second", c.second.to_string()),
                        ("samples", c.samples.to_string()),
                        ("seed", c.seed.to_string()),
                    ],
                )?;
            }
        }
        Command::Serve { net, port, host } => {
            let net = load_network(&net.net)?;
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| AppError::io("<runtime>", e))?;
            runtime.block_on(crate::http::serve(net, SocketAddr::new(host, port), |addr| {
                let _ = writeln!(out, "listening on http://{addr}");
                let _ = out.flush();
            }))?;
        }
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Elimination => "ve",
        Method::Enumeration => "enum",
    }
}
