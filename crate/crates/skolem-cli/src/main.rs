//! `skolem`: expansions, comparisons and classification of Skolem functions.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Rational;
use serde::{Deserialize, Serialize};

use skolem_core::asymptotics::{self, Config, Limit, OracleStatus, Rel, Verdict};
use skolem_core::constants::{set_precision_cap, Constant, DEFAULT_PRECISION_CAP};
use skolem_core::interval::Interval;
use skolem_core::oracle;
use skolem_core::ordinal::parse_ordinal;
use skolem_core::skolem::{self, BoundSpec, Case};
use skolem_core::transseries::{expand, render_parts, DEFAULT_DEPTH};
use skolem_core::Error;

#[derive(Parser)]
#[command(name = "skolem", version, about = "Asymptotics of Skolem functions")]
struct Cli {
    /// Series terms kept per expansion.
    #[arg(long, global = true, env = "SKOLEM_DEPTH", default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// Bits available for deciding signs of constants.
    #[arg(long, global = true, env = "SKOLEM_PRECISION_CAP", default_value_t = DEFAULT_PRECISION_CAP)]
    precision_cap: u32,
    /// Sample points of the numeric cross-check, comma separated.
    #[arg(long, global = true, env = "SKOLEM_POINTS", default_value = "20,40")]
    points: String,
    #[arg(long, global = true, env = "SKOLEM_OUTPUT", value_enum, default_value_t = Output::Text)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated series expansion.
    Expand { expr: String },
    /// Eventual order of two terms.
    Compare { f: String, g: String },
    /// Limit of f/g at infinity.
    Limit { f: String, g: String },
    /// Structural case with witnesses.
    Classify { expr: String },
    /// Regularity test below 2^(x^x).
    Regular { expr: String },
    /// Least k with f < 2^(n^x*x^k).
    Stratify { expr: String, n: u64 },
    /// Least n with f < 2^(n^x).
    Fragment { expr: String },
    /// Ratios r with h ~ r*Q over enumerated terms.
    Spectrum { q: String, size: usize },
    /// Normalize an ordinal expression to Cantor normal form.
    Ordinal { expr: String },
    /// Order-type bound below 2^(2^x), 2^(n^x) or 2^(x^x).
    Bound {
        #[arg(value_enum)]
        kind: BoundKind,
        n: Option<u64>,
    },
    /// Rigorous enclosure of ln f(x).
    Oracle {
        expr: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value_t = oracle::DEFAULT_PRECISION)]
        prec: u32,
    },
    /// Re-render a JSON report as text.
    #[command(hide = true)]
    Render,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    #[value(name = "2pow2x")]
    TwoPow2x,
    #[value(name = "2pownx")]
    TwoPowNx,
    #[value(name = "2powxx")]
    TwoPowXx,
}

#[derive(Serialize, Deserialize)]
struct SeriesTerm {
    monomial: String,
    coeff_expr: String,
    coeff_enclosure: Option<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
struct ConstantReport {
    expr: String,
    enclosure: Option<[String; 2]>,
    flag: String,
}

#[derive(Serialize, Deserialize)]
struct OracleReport {
    x_values: Vec<String>,
    residuals: Vec<[String; 2]>,
    status: String,
}

#[derive(Serialize, Deserialize)]
struct SpectrumItem {
    ratio: ConstantReport,
    witness: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Report {
    Expand {
        input: String,
        depth: usize,
        terms: Vec<SeriesTerm>,
        error_order: Option<String>,
    },
    Compare {
        verdict: String,
        depth: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_check: Option<OracleReport>,
    },
    Limit {
        verdict: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        ratio: Option<ConstantReport>,
    },
    Classify {
        case: String,
        f: Option<String>,
        g: Option<String>,
        f_is_component: bool,
    },
    Regular {
        regular: bool,
    },
    Stratify {
        k: u64,
    },
    Fragment {
        n: u64,
    },
    Spectrum {
        ratios: Vec<SpectrumItem>,
        min_gap: Option<String>,
        overlaps: Vec<[usize; 2]>,
        undetermined: Vec<[String; 2]>,
    },
    Ordinal {
        value: String,
    },
    Bound {
        bound: String,
    },
    Oracle {
        x: String,
        precision: u32,
        ln_value: String,
        error_bound: String,
        value_enclosure: Option<[String; 2]>,
    },
}

fn pair((a, b): (String, String)) -> [String; 2] {
    [a, b]
}

fn constant_report(c: &Constant) -> ConstantReport {
    ConstantReport {
        expr: c.to_string(),
        enclosure: c.enclosure_strings(128).map(pair),
        flag: format!("{:?}", c.flag()),
    }
}

fn interval_pair(i: &Interval) -> [String; 2] {
    pair(i.to_decimal(20))
}

fn render(r: &Report) -> String {
    match r {
        Report::Expand { terms, error_order, .. } => {
            let parts: Vec<(String, String)> =
                terms.iter().map(|t| (t.coeff_expr.clone(), t.monomial.clone())).collect();
            render_parts(&parts, error_order.as_deref(), false)
        }
        Report::Compare { verdict, depth, .. } if verdict == "EqualToDepth" => format!("EqualToDepth({depth})"),
        Report::Compare { verdict, .. } => verdict.clone(),
        Report::Limit { verdict, ratio: Some(r) } => format!("{verdict}({})", r.expr),
        Report::Limit { verdict, ratio: None } => verdict.clone(),
        Report::Classify { case, f, g, f_is_component } => {
            let mut s = case.clone();
            if let Some(f) = f {
                s.push_str(&format!(": f = {f}"));
            }
            if let Some(g) = g {
                s.push_str(&format!(", g = {g}"));
            }
            if !f_is_component {
                s.push_str(" (f is not a component)");
            }
            s
        }
        Report::Regular { regular } => regular.to_string(),
        Report::Stratify { k } => k.to_string(),
        Report::Fragment { n } => n.to_string(),
        Report::Spectrum { ratios, min_gap, overlaps, undetermined } => {
            let mut lines: Vec<String> = ratios
                .iter()
                .map(|it| match &it.ratio.enclosure {
                    Some([lo, hi]) => format!("{}  [{lo}, {hi}]  via {}", it.ratio.expr, it.witness),
                    None => format!("{}  via {}", it.ratio.expr, it.witness),
                })
                .collect();
            if let Some(g) = min_gap {
                lines.push(format!("min gap {g}"));
            }
            for [i, j] in overlaps {
                lines.push(format!("unresolved order between entries {i} and {j}"));
            }
            for [t, why] in undetermined {
                lines.push(format!("undetermined {t}: {why}"));
            }
            lines.join("\n")
        }
        Report::Ordinal { value } => value.clone(),
        Report::Bound { bound } => bound.clone(),
        Report::Oracle { ln_value, error_bound, value_enclosure, .. } => {
            let mut s = format!("ln f = {ln_value} +/- {error_bound}");
            if let Some([lo, hi]) = value_enclosure {
                s.push_str(&format!("\nf in [{lo}, {hi}]"));
            }
            s
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse { pos: 0, msg: format!("not a rational number: {s}") };
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}/1{}", "0".repeat(frac.len()));
        return Rational::parse(&digits).map(Rational::from).map_err(|_| bad());
    }
    Rational::parse(s).map(Rational::from).map_err(|_| bad())
}

fn term(s: &str) -> Result<skolem::Term, Error> {
    skolem::parse(s)
}

fn verdict_name(v: &Verdict) -> String {
    v.name().to_string()
}

/// A report and, for undetermined verdicts, the reason.
fn run(cli: &Cli) -> Result<(Report, Option<String>), Error> {
    let cfg = Config {
        depth: cli.depth,
        oracle_points: cli.points.split(',').map(parse_rational).collect::<Result<_, _>>()?,
        oracle_precision: oracle::DEFAULT_PRECISION,
    };
    Ok(match &cli.command {
        Command::Expand { expr } => {
            let s = expand(&term(expr)?, cli.depth)?;
            let terms = s
                .terms()
                .iter()
                .zip(s.term_parts())
                .map(|(t, (coeff_expr, monomial))| SeriesTerm {
                    monomial,
                    coeff_expr,
                    coeff_enclosure: t.coeff.enclosure_strings(128).map(pair),
                })
                .collect();
            (Report::Expand { input: expr.clone(), depth: cli.depth, terms, error_order: s.error_text() }, None)
        }
        Command::Compare { f, g } => {
            let r = asymptotics::compare_with(&term(f)?, &term(g)?, &cfg)?;
            let reason = match &r.verdict {
                Verdict::Undetermined(m) => Some(m.clone()),
                _ => None,
            };
            let oracle_check = r.oracle_check.as_ref().map(|c| OracleReport {
                x_values: c.x_values.iter().map(|x| x.to_string()).collect(),
                residuals: c.residuals.iter().map(interval_pair).collect(),
                status: match &c.status {
                    OracleStatus::Agree => "agree".to_string(),
                    OracleStatus::Escalated(k) => format!("agree after {k} escalations"),
                    OracleStatus::Inconclusive(m) => format!("inconclusive: {m}"),
                },
            });
            let report =
                Report::Compare { verdict: verdict_name(&r.verdict), depth: r.depth, reason: reason.clone(), oracle_check };
            (report, reason)
        }
        Command::Limit { f, g } => {
            let d = asymptotics::dom_rel_with(&term(f)?, &term(g)?, cli.depth)?;
            let limit = match d.rel {
                Rel::StrictlyDominated => Limit::Zero,
                Rel::StrictlyDominates => Limit::Infinite,
                Rel::SameArchimedeanClass => Limit::Finite(d.ratio.expect("ratio of same class")),
            };
            let report = match limit {
                Limit::Zero => Report::Limit { verdict: "Zero".into(), ratio: None },
                Limit::Infinite => Report::Limit { verdict: "Infinite".into(), ratio: None },
                Limit::Finite(r) => Report::Limit { verdict: "Finite".into(), ratio: Some(constant_report(&r)) },
            };
            (report, None)
        }
        Command::Classify { expr } => {
            let c = skolem::classify(&term(expr)?)?;
            let report = Report::Classify {
                case: c.case.to_string(),
                f: c.f.map(|t| t.to_string()),
                g: c.g.map(|t| t.to_string()),
                f_is_component: c.f_is_component || c.case == Case::Atom,
            };
            (report, None)
        }
        Command::Regular { expr } => (Report::Regular { regular: skolem::is_regular_below_xx(&term(expr)?)? }, None),
        Command::Stratify { expr, n } => (Report::Stratify { k: skolem::stratify(&term(expr)?, *n)? }, None),
        Command::Fragment { expr } => (Report::Fragment { n: skolem::fragment_index(&term(expr)?)? }, None),
        Command::Spectrum { q, size } => {
            let s = asymptotics::ratio_spectrum(&term(q)?, *size)?;
            let report = Report::Spectrum {
                ratios: s
                    .entries
                    .iter()
                    .map(|e| SpectrumItem { ratio: constant_report(&e.ratio), witness: e.witness.to_string() })
                    .collect(),
                min_gap: s.min_gap.map(|g| g.to_f64().to_string()),
                overlaps: s.overlaps.iter().map(|&(i, j)| [i, j]).collect(),
                undetermined: s.undetermined.iter().map(|(t, m)| [t.to_string(), m.clone()]).collect(),
            };
            (report, None)
        }
        Command::Ordinal { expr } => (Report::Ordinal { value: parse_ordinal(expr)?.to_string() }, None),
        Command::Bound { kind, n } => {
            let spec = match (kind, n) {
                (BoundKind::TwoPow2x, None) => BoundSpec::TwoPow2x,
                (BoundKind::TwoPowXx, None) => BoundSpec::TwoPowXx,
                (BoundKind::TwoPowNx, Some(n)) => BoundSpec::TwoPowNx(*n),
                (BoundKind::TwoPowNx, None) => return Err(Error::Precondition("2pownx needs N".into())),
                (_, Some(_)) => return Err(Error::Precondition("only 2pownx takes N".into())),
            };
            (Report::Bound { bound: skolem::order_type_bound(spec)?.to_string() }, None)
        }
        Command::Oracle { expr, at, prec } => {
            let x = parse_rational(at)?;
            let v = oracle::eval_ln(&term(expr)?, &x, *prec)?;
            let report = Report::Oracle {
                x: x.to_string(),
                precision: *prec,
                ln_value: v.ln_value().to_string_radix(10, Some(30)),
                error_bound: v.error_bound().to_string_radix(10, Some(6)),
                value_enclosure: v.value(*prec).ok().map(|i| interval_pair(&i)),
            };
            (report, None)
        }
        Command::Render => unreachable!("handled before dispatch"),
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Undetermined(_) | Error::Depth(_) => 3,
        Error::Precondition(_) => 4,
        Error::Resource(_) | Error::Range(_) => 5,
        Error::Fault(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Render) {
        let mut buf = String::new();
        if std::io::stdin().read_to_string(&mut buf).is_err() {
            return ExitCode::from(1);
        }
        return match serde_json::from_str::<Report>(&buf) {
            Ok(r) => {
                println!("{}", render(&r));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    if cli.depth == 0 {
        eprintln!("error: depth must be at least 1");
        return ExitCode::from(4);
    }
    if cli.precision_cap < 32 {
        eprintln!("error: precision cap must be at least 32 bits");
        return ExitCode::from(4);
    }
    set_precision_cap(cli.precision_cap);
    match run(&cli) {
        Ok((report, reason)) => {
            match cli.output {
                Output::Text => println!("{}", render(&report)),
                Output::Json => println!("{}", serde_json::to_string_pretty(&report).expect("serializable report")),
            }
            match reason {
                Some(why) => {
                    eprintln!("undetermined: {why}");
                    ExitCode::from(3)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
