//! `nullcount`: batch front end for counting valuations and completions of
//! incomplete databases.
//!
//! Exit codes: 0 success, 1 usage, 2 parse error in an input, 3 semantic
//! error (schema mismatch, intractable instance, resource limit, ...).
//! Counts and reports go to stdout, diagnostics to stderr, and stdout is
//! byte-identical across runs for identical inputs and seeds.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nullcount::error::Error as CoreError;
use nullcount::exact;
use nullcount::format::{parse_completion_text, parse_database};
use nullcount::graph::parse_graph;
use nullcount::model::IncompleteDatabase;
use nullcount::oracle;
use nullcount::query::{
    classify, parse_query, DomainKind, Problem, SjfBCQ, TableKind, UnionQuery,
};
use nullcount::reductions;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SEMANTIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nullcount",
    about = "Counting valuations and completions of incomplete databases",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Val,
    Comp,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::Val => Problem::Valuations,
            ProblemArg::Comp => Problem::Completions,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableArg {
    Naive,
    Codd,
}

impl From<TableArg> for TableKind {
    fn from(t: TableArg) -> TableKind {
        match t {
            TableArg::Naive => TableKind::Naive,
            TableArg::Codd => TableKind::Codd,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    Nonuniform,
    Uniform,
}

impl From<DomainArg> for DomainKind {
    fn from(d: DomainArg) -> DomainKind {
        match d {
            DomainArg::Nonuniform => DomainKind::NonUniform,
            DomainArg::Uniform => DomainKind::Uniform,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Exact,
    Brute,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a query against the counting dichotomies
    Classify {
        /// query text, e.g. "R(x) & S(x,y)"
        #[arg(short, long)]
        query: String,
        /// restrict to one problem
        #[arg(long)]
        problem: Option<ProblemArg>,
        /// restrict to one table kind
        #[arg(long)]
        table: Option<TableArg>,
        /// restrict to one domain kind
        #[arg(long)]
        domain: Option<DomainArg>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Count satisfying valuations or completions of a database
    Count {
        #[arg(short, long)]
        query: String,
        /// database file
        #[arg(short, long)]
        database: PathBuf,
        #[arg(long, value_enum, default_value_t = ProblemArg::Val)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// treat the database as this table kind (claiming codd for a naive
        /// table is an error; claiming naive for a Codd table forgoes the
        /// Codd algorithms)
        #[arg(long)]
        table: Option<TableArg>,
        /// treat the database as this domain kind
        #[arg(long)]
        domain: Option<DomainArg>,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Estimate the number of satisfying valuations (Karp-Luby)
    Estimate {
        #[arg(short, long)]
        query: String,
        #[arg(short, long)]
        database: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        /// parallel sampling workers (results are deterministic per
        /// (seed, threads) pair)
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Decide whether a set of ground facts is a completion of a Codd table
    CheckCompletion {
        #[arg(short, long)]
        database: PathBuf,
        /// candidate completion: a file of ground facts
        #[arg(short, long)]
        candidate: PathBuf,
    },
    /// Encode a graph reduction: writes <out>.idb and <out>.identity.json
    Reduce {
        /// one of: 3col, is-path, is-rxysxy, vc, is-comp-uniform, gadget,
        /// avoidance, pseudoforest
        kind: String,
        /// graph file: `u v` per edge, single name per isolated node
        #[arg(short, long)]
        graph: PathBuf,
        /// output path base
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Recover the number of independent sets of a bipartite graph from
    /// oracle counts over the surjection system
    RecoverBis {
        #[arg(short, long)]
        graph: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("nullcount: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn parse_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: e.to_string(),
    }
}

fn semantic_failure(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_SEMANTIC,
        message: e.to_string(),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| parse_failure(format!("{}: {e}", path.display())))
}

fn load_query(text: &str) -> Result<UnionQuery, Failure> {
    parse_query(text).map_err(parse_failure)
}

fn load_single_query(text: &str) -> Result<SjfBCQ, Failure> {
    let q = load_query(text)?;
    q.as_single().cloned().ok_or_else(|| {
        semantic_failure("this command takes a single conjunctive query, not a union")
    })
}

fn load_database(path: &PathBuf) -> Result<IncompleteDatabase, Failure> {
    parse_database(&read_file(path)?).map_err(parse_failure)
}

fn enum_cap() -> Result<u64, Failure> {
    match std::env::var("NULLCOUNT_ENUM_CAP") {
        Err(_) => Ok(oracle::DEFAULT_ENUM_CAP),
        Ok(v) => v.parse::<u64>().map_err(|_| Failure {
            code: EXIT_USAGE,
            message: format!("NULLCOUNT_ENUM_CAP must be an integer, got {v:?}"),
        }),
    }
}

fn effective_setting(
    db: &IncompleteDatabase,
    table: Option<TableArg>,
    domain: Option<DomainArg>,
) -> Result<(TableKind, DomainKind), Failure> {
    let t = match table {
        None => exact::instance_table(db),
        Some(t) => {
            let t = TableKind::from(t);
            if t == TableKind::Codd && !db.is_codd() {
                return Err(semantic_failure("--table codd, but the database is not a Codd table"));
            }
            t
        }
    };
    let d = match domain {
        None => exact::instance_domain(db),
        Some(d) => {
            let d = DomainKind::from(d);
            if d == DomainKind::Uniform && !db.is_uniform() {
                return Err(semantic_failure(
                    "--domain uniform, but the database declares per-null domains",
                ));
            }
            d
        }
    };
    Ok((t, d))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Classify {
            query,
            problem,
            table,
            domain,
            format,
        } => {
            let q = load_single_query(&query)?;
            let problems = match problem {
                Some(p) => vec![Problem::from(p)],
                None => vec![Problem::Valuations, Problem::Completions],
            };
            let tables = match table {
                Some(t) => vec![TableKind::from(t)],
                None => vec![TableKind::Naive, TableKind::Codd],
            };
            let domains = match domain {
                Some(d) => vec![DomainKind::from(d)],
                None => vec![DomainKind::NonUniform, DomainKind::Uniform],
            };
            for p in &problems {
                for t in &tables {
                    for d in &domains {
                        let v = classify(&q, *t, *d, *p);
                        match format {
                            Format::Plain => println!("{v}"),
                            Format::Json => println!(
                                "{}",
                                serde_json::to_string(&v.to_json()).expect("serializable")
                            ),
                        }
                    }
                }
            }
            Ok(())
        }

        Command::Count {
            query,
            database,
            problem,
            method,
            table,
            domain,
            format,
        } => {
            let db = load_database(&database)?;
            let q = load_query(&query)?;
            exact::validate_schema(&q.signature(), &db).map_err(semantic_failure)?;
            let problem = Problem::from(problem);
            let cap = enum_cap()?;
            let (t, d) = effective_setting(&db, table, domain)?;

            let brute = |q: &UnionQuery| -> Result<nullcount::Count, Failure> {
                match problem {
                    Problem::Valuations => oracle::brute_count_val(q, &db, cap),
                    Problem::Completions => oracle::brute_count_comp(q, &db, cap),
                }
                .map_err(semantic_failure)
            };

            let count = match method {
                Method::Brute => brute(&q)?,
                Method::Exact => {
                    let single = q.as_single().cloned().ok_or_else(|| {
                        semantic_failure("exact counting takes a single conjunctive query")
                    })?;
                    exact::count_exact_as(&single, &db, problem, t, d).map_err(semantic_failure)?
                }
                Method::Auto => {
                    let exact_result = q
                        .as_single()
                        .cloned()
                        .ok_or(CoreError::NotTractable { witnesses: vec![] })
                        .and_then(|single| exact::count_exact_as(&single, &db, problem, t, d));
                    match exact_result {
                        Ok(c) => c,
                        Err(CoreError::NotTractable { .. })
                        | Err(CoreError::PatternMismatch(_)) => brute(&q)?,
                        Err(other) => return Err(semantic_failure(other)),
                    }
                }
            };
            match format {
                Format::Plain => println!("{count}"),
                Format::Json => println!("{{\"count\":\"{count}\"}}"),
            }
            Ok(())
        }

        Command::Estimate {
            query,
            database,
            epsilon,
            delta,
            seed,
            threads,
        } => {
            let db = load_database(&database)?;
            let q = load_query(&query)?;
            exact::validate_schema(&q.signature(), &db).map_err(semantic_failure)?;
            let report = nullcount::approx::karp_luby_estimate(&q, &db, epsilon, delta, seed, threads)
                .map_err(semantic_failure)?;
            println!(
                "{}",
                serde_json::to_string(&report.to_json()).expect("serializable")
            );
            Ok(())
        }

        Command::CheckCompletion {
            database,
            candidate,
        } => {
            let db = load_database(&database)?;
            let comp = parse_completion_text(&read_file(&candidate)?).map_err(parse_failure)?;
            let ok = oracle::is_completion(&db, &comp).map_err(semantic_failure)?;
            println!("{ok}");
            Ok(())
        }

        Command::Reduce { kind, graph, out } => {
            let g = parse_graph(&read_file(&graph)?).map_err(parse_failure)?;
            if !reductions::ENCODER_NAMES.contains(&kind.as_str()) {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: format!(
                        "unknown reduction {kind:?}; expected one of {}",
                        reductions::ENCODER_NAMES.join(", ")
                    ),
                });
            }
            let inst = reductions::encode_by_name(&kind, &g).map_err(semantic_failure)?;
            let db_path = out.with_extension("idb");
            let id_path = out.with_extension("identity.json");
            let db_text = nullcount::format::database_to_text(&inst.db);
            fs::write(&db_path, db_text)
                .map_err(|e| semantic_failure(format!("{}: {e}", db_path.display())))?;
            let id_text = format!(
                "{}\n",
                serde_json::to_string_pretty(&inst.identity_json()).expect("serializable")
            );
            fs::write(&id_path, id_text)
                .map_err(|e| semantic_failure(format!("{}: {e}", id_path.display())))?;
            Ok(())
        }

        Command::RecoverBis { graph } => {
            let g = parse_graph(&read_file(&graph)?).map_err(parse_failure)?;
            let b = g
                .to_bipartite()
                .ok_or_else(|| semantic_failure("the graph is not bipartite"))?;
            let count = reductions::recover_bis(&b, enum_cap()?).map_err(semantic_failure)?;
            println!("{count}");
            Ok(())
        }
    }
}
