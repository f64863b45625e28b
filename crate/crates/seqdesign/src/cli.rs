//! The `seqdesign` command-line surface.
//!
//! Commands: sequence, rho, design, verify, carthage, locate, flat,
//! estimate, table2. Reports are JSON by default (`--format text` for
//! aligned human output); JSON keys are emitted in sorted order so that
//! identical inputs produce byte-identical reports, the `elapsed_ms`
//! timing field aside.
//!
//! Exit codes: 0 for success (and valid verdicts), 1 for an invalid
//! verdict, 2 for usage or input errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::actions::{Action, Label, DEFAULT_CLOSURE_BUDGET};
use crate::designs::{self, DesignMatrix, FlatMode, Sidecar};
use crate::finfield::FieldSpec;
use crate::rhospace::{self, RhoViolation};
use crate::sequencer::{self, SearchMode, SearchResult, Sequencing};

/// Environment variable capping the number of group elements a permfile
/// closure may materialize.
pub const BUDGET_ENV: &str = "SEQDESIGN_BUDGET";

#[derive(Parser)]
#[command(
    name = "seqdesign",
    about = "Sequence sharply transitive group actions and build permutation designs",
    version
)]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    First,
    Count,
    Enumerate,
}

#[derive(Subcommand)]
pub enum Command {
    /// Depth-first search for sequencings of an action.
    Sequence {
        /// `affine:<q>` | `pgl2:<q>` | `alt:<n>` | `sym:<n>` | `cyclic:<n>` |
        /// `dihedral:<n>` | `permfile:<path>:<k>`
        #[arg(long)]
        action: String,
        #[arg(long, value_enum, default_value_t = Mode::Count)]
        mode: Mode,
        /// Cap on collected sequencings in enumerate mode.
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
    },
    /// Check or search sequences of orbit-invariant values.
    Rho {
        #[arg(long)]
        action: String,
        /// Comma-separated values to check for realizability.
        #[arg(long)]
        check: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Count)]
        mode: Mode,
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
    },
    /// Build the orbit design of a sequencing and write it to CSV
    /// (a JSON sidecar goes to `<out>.json`).
    Design {
        #[arg(long)]
        action: String,
        /// zigzag | first | comma-separated labels
        #[arg(long, default_value = "first")]
        seq: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify the coverage of a design file (CSV with --t, or a sidecar).
    Verify {
        file: PathBuf,
        /// Window length; required for bare CSV input.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        lambda: Option<u32>,
        /// Domain size when it exceeds the largest label in the file.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Carthaginian rectangle analysis and group reconstruction.
    Carthage {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Locate a (k+1)-tuple inside the orbit design of a sequencing.
    Locate {
        #[arg(long)]
        action: String,
        #[arg(long, default_value = "first")]
        seq: String,
        /// Comma-separated tuple of k+1 distinct labels.
        #[arg(long)]
        tuple: String,
    },
    /// Wide/narrow designs of a flat action.
    Flat {
        #[arg(long)]
        action: String,
        #[arg(long, conflicts_with = "narrow")]
        wide: bool,
        #[arg(long)]
        narrow: bool,
        /// zigzag | first | comma-separated labels
        #[arg(long, default_value = "first")]
        seq: String,
        /// Multiplicity for narrow designs built by search.
        #[arg(long, default_value_t = 1)]
        lambda: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected sequencing and node counts for m free choices.
    Estimate {
        #[arg(long)]
        m: u64,
    },
    /// Predicted and actual search counts for the field-based actions.
    Table2 {
        #[arg(long, default_value_t = 13)]
        qmax: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Field(#[from] crate::finfield::FieldError),
    #[error(transparent)]
    Action(#[from] crate::actions::ActionError),
    #[error(transparent)]
    Sequencer(#[from] sequencer::SequencerError),
    #[error(transparent)]
    Design(#[from] designs::DesignError),
}

/// Parses an action spec string; the permfile closure budget comes from
/// SEQDESIGN_BUDGET when set.
pub fn parse_action_spec(spec: &str) -> Result<Action, CliError> {
    let bad = || CliError::Usage(format!("bad action spec {spec:?}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let number = |s: &str| s.parse::<u64>().map_err(|_| bad());
    match kind {
        "affine" => Ok(Action::affine(FieldSpec::new(number(rest)?)?)?),
        "pgl2" => Ok(Action::pgl2(FieldSpec::new(number(rest)?)?)?),
        "alt" => Ok(Action::alt(number(rest)? as usize)?),
        "sym" => Ok(Action::sym(number(rest)? as usize)?),
        "cyclic" => Ok(Action::cyclic(number(rest)? as usize)?),
        "dihedral" => Ok(Action::dihedral(number(rest)? as usize)?),
        "permfile" => {
            let (path, k) = rest.rsplit_once(':').ok_or_else(bad)?;
            let k = k.parse::<usize>().map_err(|_| bad())?;
            let budget = std::env::var(BUDGET_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(DEFAULT_CLOSURE_BUDGET);
            Ok(Action::load_perm_group(Path::new(path), k, budget)?)
        }
        _ => Err(bad()),
    }
}

fn parse_labels(action: &Action, list: &str) -> Result<Vec<Label>, CliError> {
    list.split(',')
        .map(|c| {
            action
                .parse_label(c.trim())
                .ok_or_else(|| CliError::Usage(format!("bad label {c:?} for this action")))
        })
        .collect()
}

fn labels_string(action: &Action, labels: &[Label]) -> Vec<String> {
    labels.iter().map(|&x| action.label_string(x)).collect()
}

/// Resolves a `--seq` argument: a construction name or an explicit order.
fn resolve_sequence(action: &Action, seq: &str) -> Result<Sequencing, CliError> {
    match seq {
        "zigzag" => {
            if action.kind_name() != "affine" {
                return Err(CliError::Usage(
                    "--seq zigzag needs an affine action (use flat for dihedral)".into(),
                ));
            }
            Ok(sequencer::zigzag_affine(action.field().unwrap().order())?)
        }
        "first" => sequencer::dfs_sequence(action, SearchMode::FindFirst)
            .first
            .ok_or_else(|| CliError::Usage("action has no sequencing".into())),
        list => {
            let order = parse_labels(action, list)?;
            Ok(Sequencing::checked(action, order)?)
        }
    }
}

fn search_report(action: &Action, spec: &str, result: &SearchResult) -> Value {
    let mut report = json!({
        "command": "sequence",
        "action": spec,
        "kind": action.kind_name(),
        "n": action.n(),
        "k": action.k(),
        "m": action.m(),
        "S": result.stats.sequencings,
        "T": result.stats.nodes,
        "elapsed_ms": result.stats.elapsed.as_millis() as u64,
    });
    if let Some(first) = &result.first {
        report["first"] = json!(labels_string(action, first.order()));
    }
    if !result.all.is_empty() {
        report["all"] = json!(result
            .all
            .iter()
            .map(|s| labels_string(action, s.order()))
            .collect::<Vec<_>>());
    }
    report
}

fn mode_of(mode: Mode, limit: usize) -> SearchMode {
    match mode {
        Mode::First => SearchMode::FindFirst,
        Mode::Count => SearchMode::CountAll,
        Mode::Enumerate => SearchMode::EnumerateAll { cap: limit },
    }
}

/// Runs a parsed command line; returns (report, exit code).
pub fn execute(cli: &Cli) -> Result<(Value, i32), CliError> {
    match &cli.command {
        Command::Sequence {
            action,
            mode,
            limit,
        } => {
            let act = parse_action_spec(action)?;
            let result = sequencer::dfs_sequence(&act, mode_of(*mode, *limit));
            Ok((search_report(&act, action, &result), 0))
        }

        Command::Rho {
            action,
            check,
            mode,
            limit,
        } => {
            let act = parse_action_spec(action)?;
            if let Some(values) = check {
                let vals = parse_labels(&act, values)?;
                let report = rhospace::rho_check(&act, &vals);
                let mut out = json!({
                    "command": "rho",
                    "action": action,
                    "values": labels_string(&act, &vals),
                    "valid": report.valid,
                });
                match report.violation {
                    Some(RhoViolation::DuplicateValue { first, second }) => {
                        out["violation"] = json!({
                            "kind": "duplicate-value",
                            "positions": [first + 1, second + 1],
                        });
                    }
                    Some(RhoViolation::ReferenceValue {
                        position,
                        reference_index,
                    }) => {
                        out["violation"] = json!({
                            "kind": "forbidden-reference-value",
                            "position": position + 1,
                            "reference_index": reference_index + 1,
                        });
                    }
                    Some(RhoViolation::Collision { start, end }) => {
                        out["violation"] = json!({
                            "kind": "vanishing-distinguisher",
                            "order": end - start + 1,
                            "window": [start + 1, end + 1],
                        });
                    }
                    None => {}
                }
                let code = if report.valid { 0 } else { 1 };
                return Ok((out, code));
            }
            let result = rhospace::rho_dfs(&act, mode_of(*mode, *limit));
            let mut out = json!({
                "command": "rho",
                "action": action,
                "S": result.stats.sequencings,
                "T": result.stats.nodes,
                "elapsed_ms": result.stats.elapsed.as_millis() as u64,
            });
            if let Some(first) = &result.first {
                out["first_values"] = json!(labels_string(&act, first.values()));
                if let Some(seq) = rhospace::rho_to_x(&act, first.values()) {
                    out["first"] = json!(labels_string(&act, seq.order()));
                }
            }
            Ok((out, 0))
        }

        Command::Design { action, seq, out } => {
            let act = parse_action_spec(action)?;
            let sequencing = resolve_sequence(&act, seq)?;
            let design = designs::build_design(&act, &sequencing)?;
            designs::write_design_csv(&design, Some(&act), out)?;
            let sidecar = Sidecar {
                n: design.n(),
                t: act.k() + 1,
                lambda: 1,
                action: action.clone(),
                sequencing: labels_string(&act, sequencing.order()),
                row_count: design.rows().len(),
            };
            let sidecar_path = sidecar_path_for(out);
            designs::write_sidecar(&sidecar, &sidecar_path)?;
            Ok((
                json!({
                    "command": "design",
                    "action": action,
                    "n": design.n(),
                    "t": act.k() + 1,
                    "lambda": 1,
                    "rows": design.rows().len(),
                    "sequencing": labels_string(&act, sequencing.order()),
                    "out": out.display().to_string(),
                    "sidecar": sidecar_path.display().to_string(),
                }),
                0,
            ))
        }

        Command::Verify { file, t, lambda, n } => {
            let (matrix, t, lambda) = load_design(file, *t, *lambda, *n)?;
            let report = designs::verify_pd(&matrix, t, lambda)?;
            let histogram: Value = report
                .histogram
                .iter()
                .map(|(&mult, &count)| (mult.to_string(), json!(count)))
                .collect::<serde_json::Map<String, Value>>()
                .into();
            let mut out = json!({
                "command": "verify",
                "file": file.display().to_string(),
                "n": report.n,
                "t": report.t,
                "lambda": report.lambda,
                "rows": matrix.rows().len(),
                "expected_tuples": report.expected_tuples,
                "histogram": histogram,
                "valid": report.valid,
            });
            if let Some(missing) = &report.first_missing {
                out["first_missing"] = json!(missing);
            }
            if let Some(dup) = &report.first_duplicated {
                out["first_duplicated"] = json!(dup);
            }
            Ok((out, if report.valid { 0 } else { 1 }))
        }

        Command::Carthage { file, k, n } => {
            let matrix = designs::read_design_csv(file, *n)?;
            let report = designs::analyze_carthage(&matrix, *k)?;
            let mut out = json!({
                "command": "carthage",
                "file": file.display().to_string(),
                "k": k,
                "n": matrix.n(),
                "rows": matrix.rows().len(),
                "is_carthaginian": report.is_carthaginian,
                "rectangle_condition": report.rectangle_condition,
            });
            if let Some(g) = &report.group {
                out["group_order"] = json!(g.group_order());
                out["sharply_transitive"] = json!(g.is_sharp());
            }
            Ok((out, if report.is_carthaginian { 0 } else { 1 }))
        }

        Command::Locate { action, seq, tuple } => {
            let act = parse_action_spec(action)?;
            let sequencing = resolve_sequence(&act, seq)?;
            let t = parse_labels(&act, tuple)?;
            if t.len() != act.k() + 1 {
                return Err(CliError::Usage(format!(
                    "tuple must have k+1 = {} entries",
                    act.k() + 1
                )));
            }
            let mut sorted = t.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != t.len() {
                return Err(CliError::Usage("tuple entries must be distinct".into()));
            }
            let (g, offset) = designs::locate(&act, &sequencing, &t);
            Ok((
                json!({
                    "command": "locate",
                    "action": action,
                    "tuple": labels_string(&act, &t),
                    "offset": offset,
                    "row": labels_string(&act, &g.apply_slice(sequencing.order())),
                    "element_image": labels_string(&act, g.image()),
                }),
                0,
            ))
        }

        Command::Flat {
            action,
            wide,
            narrow,
            seq,
            lambda,
            out,
        } => {
            let act = parse_action_spec(action)?;
            let mode = if *narrow { FlatMode::Narrow } else { FlatMode::Wide };
            if !*wide && !*narrow {
                return Err(CliError::Usage("choose --wide or --narrow".into()));
            }
            let order: Vec<Label> = match (mode, seq.as_str()) {
                (FlatMode::Wide, "zigzag") | (FlatMode::Narrow, "zigzag") => {
                    if act.kind_name() != "dihedral" {
                        return Err(CliError::Usage(
                            "--seq zigzag here needs a dihedral action".into(),
                        ));
                    }
                    let full = sequencer::zigzag_order(act.n());
                    match mode {
                        FlatMode::Wide => full,
                        FlatMode::Narrow => {
                            let len = act.k() + *lambda as usize * (act.m() / act.flatness());
                            full[..len].to_vec()
                        }
                    }
                }
                (FlatMode::Wide, "first") => designs::flat_long_sequence(&act, SearchMode::FindFirst)
                    .first
                    .ok_or_else(|| CliError::Usage("no long sequencing found".into()))?
                    .order()
                    .to_vec(),
                (FlatMode::Narrow, "first") => {
                    designs::flat_short_sequence(&act, *lambda, SearchMode::FindFirst)?
                        .first
                        .ok_or_else(|| CliError::Usage("no short sequencing found".into()))?
                        .order()
                        .to_vec()
                }
                (_, list) => parse_labels(&act, list)?,
            };
            let design = designs::build_flat_design(&act, &order, mode)?;
            let lambda_built = design.lambda.unwrap_or(1);
            let report = designs::verify_pd(&design, act.k() + 1, lambda_built)?;
            if let Some(path) = out {
                designs::write_design_csv(&design, Some(&act), path)?;
                let sidecar = Sidecar {
                    n: design.n(),
                    t: act.k() + 1,
                    lambda: lambda_built,
                    action: action.clone(),
                    sequencing: labels_string(&act, &order),
                    row_count: design.rows().len(),
                };
                designs::write_sidecar(&sidecar, &sidecar_path_for(path))?;
            }
            Ok((
                json!({
                    "command": "flat",
                    "action": action,
                    "mode": if *narrow { "narrow" } else { "wide" },
                    "sequence": labels_string(&act, &order),
                    "rows": design.rows().len(),
                    "width": design.row_width(),
                    "lambda": lambda_built,
                    "valid": report.valid,
                }),
                if report.valid { 0 } else { 1 },
            ))
        }

        Command::Estimate { m } => {
            if *m == 0 {
                return Err(CliError::Usage("m must be at least 1".into()));
            }
            let s = sequencer::expected_s(*m);
            let t = sequencer::expected_t(*m);
            Ok((
                json!({
                    "command": "estimate",
                    "m": m,
                    "expected_S": {
                        "exact": s.exact().to_string(),
                        "decimal": s.to_f64(),
                        "rendered": s.render(),
                    },
                    "expected_T": {
                        "exact": t.exact().to_string(),
                        "decimal": t.to_f64(),
                        "rendered": t.render(),
                    },
                }),
                0,
            ))
        }

        Command::Table2 { qmax } => {
            let mut rows = Vec::new();
            for q in [3u64, 4, 5, 7, 8, 9, 11, 13] {
                if q > *qmax {
                    continue;
                }
                let m = q - 2;
                let es = sequencer::expected_s(m);
                let et = sequencer::expected_t(m);
                let counts = |action: &Action| {
                    let r = sequencer::dfs_sequence(action, SearchMode::CountAll);
                    json!({"S": r.stats.sequencings, "T": r.stats.nodes})
                };
                rows.push(json!({
                    "q": q,
                    "m": m,
                    "predicted": {"S": es.render(), "T": et.render()},
                    "cyclic": counts(&Action::cyclic(q as usize - 1).unwrap()),
                    "affine": counts(&Action::affine(FieldSpec::new(q)?)?),
                    "pgl2": counts(&Action::pgl2(FieldSpec::new(q)?)?),
                }));
            }
            Ok((json!({"command": "table2", "rows": rows}), 0))
        }
    }
}

fn sidecar_path_for(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

fn load_design(
    file: &Path,
    t: Option<usize>,
    lambda: Option<u32>,
    n: Option<usize>,
) -> Result<(DesignMatrix, usize, u32), CliError> {
    if file.extension().is_some_and(|e| e == "json") {
        let sidecar = designs::read_sidecar(file)?;
        let csv = file.with_extension("");
        let matrix = designs::read_design_csv(&csv, Some(sidecar.n))?;
        Ok((
            matrix,
            t.unwrap_or(sidecar.t),
            lambda.unwrap_or(sidecar.lambda),
        ))
    } else {
        let t = t.ok_or_else(|| CliError::Usage("--t is required for CSV input".into()))?;
        let matrix = designs::read_design_csv(file, n)?;
        Ok((matrix, t, lambda.unwrap_or(1)))
    }
}

/// Renders a report as aligned text.
pub fn render_text(report: &Value) -> String {
    if report["command"] == "table2" {
        let mut out = String::new();
        out.push_str(&format!(
            "{:>4} {:>14} {:>16} {:>16} {:>16}\n",
            "q", "predicted S/T", "cyclic S/T", "affine S/T", "pgl2 S/T"
        ));
        for row in report["rows"].as_array().unwrap() {
            let pair = |v: &Value| format!("{} / {}", v["S"].to_string().trim_matches('"'), v["T"].to_string().trim_matches('"'));
            out.push_str(&format!(
                "{:>4} {:>14} {:>16} {:>16} {:>16}\n",
                row["q"],
                pair(&row["predicted"]),
                pair(&row["cyclic"]),
                pair(&row["affine"]),
                pair(&row["pgl2"]),
            ));
        }
        return out;
    }
    let mut out = String::new();
    if let Some(obj) = report.as_object() {
        for (key, value) in obj {
            out.push_str(&format!("{key}: {value}\n"));
        }
    }
    out
}

/// Full command-line entry: executes and prints; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok((report, code)) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                Format::Text => print!("{}", render_text(&report)),
            }
            code
        }
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}
