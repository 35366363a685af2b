//! Command-line front end: argument parsing and report rendering. All
//! computation lives in `skel-core`; every subcommand is deterministic
//! byte-for-byte for a fixed invocation.

use clap::{Parser, Subcommand, ValueEnum};
use skel_core::covering::{enumerate_connected_double_covers, enumerate_connected_triple_covers};
use skel_core::error::Error;
use skel_core::graph::{EdgeId, Graph, MetricGraph};
use skel_core::io;
use skel_core::loops::{loop_length, DEFAULT_LOOP_CAP};
use skel_core::pipeline::{recover_all, RecoverConfig};
use skel_core::rational::{format_q, parse_q, Q};
use skel_core::reconstruct::{
    constraint_matrix, extend_with_triple_covers, solve_lengths, verify_full_rank, CoverId,
    TRIPLE_COVER_LIMIT,
};
use skel_core::tate::{distinguish, p1_edge_length, SplitInterval};
use skel_core::valuation::{is_split_ball, preimage_count, preimage_exponent, KummerQuery};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "skel",
    version,
    about = "Metric-graph splitting laws and loop-length reconstruction"
)]
pub struct Cli {
    /// Seed for randomized generators; reserved, current subcommands are
    /// fully deterministic
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Preimage count and splitting of z -> z^(p^e) over a disc point
    Kummer {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        /// Valuation of the disc radius, as num/den
        #[arg(long)]
        v: String,
    },
    /// Distinguish two punctured Tate curves by torsor splitting intervals
    Tate {
        #[arg(long)]
        valpha: String,
        #[arg(long)]
        vbeta: String,
        #[arg(long)]
        p: u64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
    },
    /// Skeleton edge length of a four-punctured projective line
    P1 {
        /// Valuation of the cross ratio, as num/den
        #[arg(long)]
        vlambda: String,
    },
    /// Enumerate the connected covers of a graph
    Covers {
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Print the edge list of every cover
        #[arg(long)]
        list: bool,
        /// Write all covers as DOT to this file
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Recover edge lengths from exact loop lengths of the graph and its covers
    Reconstruct {
        graph: PathBuf,
        /// Hidden lengths as JSON {"edge": "num/den"}; falls back to the
        /// lengths embedded in the graph file
        #[arg(long)]
        lengths: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        /// Write the recovered metric graph as DOT to this file
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Recover the hidden metric using only split-oracle booleans
    Pipeline {
        graph: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 64)]
        e_max: u32,
        #[arg(long, default_value_t = 256)]
        i_max: usize,
        #[arg(long, default_value_t = 16)]
        denom_bound: u64,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        /// Write the recovered metric graph as DOT to this file
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check that loop lengths determine every edge length (full rank)
    VerifyA1 {
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
    },
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn ok(stdout: String) -> RunOutput {
    RunOutput {
        stdout,
        stderr: String::new(),
        code: 0,
    }
}

fn fail(code: i32, err: impl std::fmt::Display) -> RunOutput {
    RunOutput {
        stdout: String::new(),
        stderr: format!("error: {err}\n"),
        code,
    }
}

/// Loop-enumeration cap, overridable through SKEL_MAX_LOOPS.
pub fn loop_cap() -> usize {
    std::env::var("SKEL_MAX_LOOPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_LOOP_CAP)
}

pub fn run(cli: &Cli) -> RunOutput {
    match &cli.command {
        Command::Kummer { p, e, v } => run_kummer(*p, *e, v),
        Command::Tate {
            valpha,
            vbeta,
            p,
            report,
        } => run_tate(valpha, vbeta, *p, *report),
        Command::P1 { vlambda } => run_p1(vlambda),
        Command::Covers {
            graph,
            degree,
            list,
            dot,
        } => run_covers(graph, *degree, *list, dot.as_deref()),
        Command::Reconstruct {
            graph,
            lengths,
            max_degree,
            dot,
        } => run_reconstruct(graph, lengths.as_deref(), *max_degree, dot.as_deref()),
        Command::Pipeline {
            graph,
            p,
            e_max,
            i_max,
            denom_bound,
            max_degree,
            dot,
        } => run_pipeline(
            graph,
            *p,
            *e_max,
            *i_max,
            *denom_bound,
            *max_degree,
            dot.as_deref(),
        ),
        Command::VerifyA1 { graph, max_degree } => run_verify(graph, *max_degree),
    }
}

fn run_kummer(p: u64, e: u32, v: &str) -> RunOutput {
    let v = match parse_q(v) {
        Ok(v) => v,
        Err(err) => return fail(2, err),
    };
    let query = match KummerQuery::new(p, e, v) {
        Ok(q) => q,
        Err(err) => return fail(1, err),
    };
    let i = preimage_exponent(&query);
    let count = preimage_count(&query);
    let split = is_split_ball(&query);
    ok(format!("i={i} preimages={count} split={split}\n"))
}

fn run_p1(vlambda: &str) -> RunOutput {
    let v = match parse_q(vlambda) {
        Ok(v) => v,
        Err(err) => return fail(2, err),
    };
    match p1_edge_length(&v) {
        Ok(len) => ok(format!("edge_length={}\n", format_q(&len))),
        Err(err) => fail(1, err),
    }
}

fn ints_joined(interval: &SplitInterval) -> String {
    interval
        .integer_points()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn run_tate(valpha: &str, vbeta: &str, p: u64, report: ReportFormat) -> RunOutput {
    let (va, vb) = match (parse_q(valpha), parse_q(vbeta)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(2, e),
    };
    let rep = match distinguish(&va, &vb, p) {
        Ok(r) => r,
        Err(err) => return fail(1, err),
    };
    let mut out = String::new();
    match report {
        ReportFormat::Text => {
            writeln!(out, "n={} l={} m={}", rep.alpha.n, rep.alpha.l, rep.alpha.m).unwrap();
            for (side, params, long, short) in [
                ("alpha", &rep.alpha, &rep.long_alpha, &rep.short_alpha),
                ("beta", &rep.beta, &rep.long_beta, &rep.short_beta),
            ] {
                writeln!(
                    out,
                    "{side}: v={} long_arc={} ints={{{}}} short_arc={} ints={{{}}}",
                    format_q(&params.v),
                    long,
                    ints_joined(long),
                    short,
                    ints_joined(short),
                )
                .unwrap();
            }
            writeln!(
                out,
                "sets_differ={} length_gap={}",
                rep.sets_differ,
                format_q(&rep.length_gap)
            )
            .unwrap();
        }
        ReportFormat::Csv => {
            writeln!(
                out,
                "side,v,n,l,m,long_lo,long_hi,long_ints,short_lo,short_hi,short_ints"
            )
            .unwrap();
            for (side, params, long, short) in [
                ("alpha", &rep.alpha, &rep.long_alpha, &rep.short_alpha),
                ("beta", &rep.beta, &rep.long_beta, &rep.short_beta),
            ] {
                writeln!(
                    out,
                    "{side},{},{},{},{},{},{},{},{},{},{}",
                    format_q(&params.v),
                    params.n,
                    params.l,
                    params.m,
                    format_q(&long.lo),
                    format_q(&long.hi),
                    ints_joined(long),
                    format_q(&short.lo),
                    format_q(&short.hi),
                    ints_joined(short),
                )
                .unwrap();
            }
            writeln!(
                out,
                "verdict,sets_differ,{},length_gap,{},,,,,,",
                rep.sets_differ,
                format_q(&rep.length_gap)
            )
            .unwrap();
        }
    }
    ok(out)
}

fn graph_stats(g: &Graph) -> String {
    format!(
        "V={} E={} b1={}",
        g.vertex_count(),
        g.edge_count(),
        g.betti()
    )
}

fn base_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "g".to_string())
}

fn run_covers(path: &Path, degree: u32, list: bool, dot: Option<&Path>) -> RunOutput {
    let loaded = match io::read_graph(path) {
        Ok(l) => l,
        Err(err) => return fail(2, err),
    };
    let name = base_name(path);
    let mut out = String::new();
    writeln!(out, "base: {name} {}", graph_stats(&loaded.graph)).unwrap();
    let covers: Vec<(String, Graph)> = match degree {
        2 => match enumerate_connected_double_covers(&loaded.graph) {
            Ok(cs) => cs
                .into_iter()
                .map(|dc| (format!("{name}-{}", dc.label()), dc.total().clone()))
                .collect(),
            Err(err) => return fail(1, err),
        },
        3 => match enumerate_connected_triple_covers(&loaded.graph, TRIPLE_COVER_LIMIT) {
            Ok(cs) => cs
                .into_iter()
                .map(|tc| (format!("{name}-{}", tc.label()), tc.total().clone()))
                .collect(),
            Err(err) => return fail(1, err),
        },
        d => return fail(2, Error::Other(format!("unsupported degree {d}"))),
    };
    writeln!(out, "covers degree={degree}: {}", covers.len()).unwrap();
    let mut dots = String::new();
    for (label, total) in &covers {
        writeln!(out, "{label} {}", graph_stats(total)).unwrap();
        if list {
            for (e, (u, v)) in total.edges() {
                writeln!(out, "  {e}: {u} -- {v}").unwrap();
            }
        }
        if dot.is_some() {
            dots.push_str(&io::graph_dot(label, total, &BTreeMap::new()));
        }
    }
    if let Some(dot_path) = dot {
        if let Err(e) = std::fs::write(dot_path, dots) {
            return fail(1, format!("writing {}: {e}", dot_path.display()));
        }
    }
    ok(out)
}

/// Shared tail of reconstruct/pipeline: hidden-vs-recovered table, DOT
/// dump, exit 0 only on exact agreement.
fn finish_recovery(
    mut out: String,
    hidden: &MetricGraph,
    recovered: &MetricGraph,
    dot: Option<&Path>,
) -> RunOutput {
    let mut exact = true;
    for (e, want) in hidden.lengths() {
        let got = &recovered.lengths()[e];
        let matches = got == want;
        exact &= matches;
        writeln!(
            out,
            "edge {e} hidden={} recovered={} match={}",
            format_q(want),
            format_q(got),
            matches
        )
        .unwrap();
    }
    writeln!(out, "exact={exact}").unwrap();
    if let Some(dot_path) = dot {
        let dot_text = io::graph_dot("recovered", recovered.graph(), recovered.lengths());
        if let Err(e) = std::fs::write(dot_path, dot_text) {
            return fail(1, format!("writing {}: {e}", dot_path.display()));
        }
    }
    RunOutput {
        stdout: out,
        stderr: String::new(),
        code: if exact { 0 } else { 1 },
    }
}

fn run_reconstruct(
    path: &Path,
    lengths_path: Option<&Path>,
    max_degree: u32,
    dot: Option<&Path>,
) -> RunOutput {
    let loaded = match io::read_graph(path) {
        Ok(l) => l,
        Err(err) => return fail(2, err),
    };
    let hidden_lengths = match lengths_path {
        Some(p) => match io::read_lengths(p) {
            Ok(l) => l,
            Err(err) => return fail(2, err),
        },
        None => loaded.lengths.clone(),
    };
    let hidden = match MetricGraph::new(loaded.graph.clone(), hidden_lengths) {
        Ok(m) => m,
        Err(err) => return fail(1, err),
    };
    let cap = loop_cap();
    let structure = hidden.graph();
    let report = match verify_full_rank(structure, max_degree, cap) {
        Ok(r) => r,
        Err(err) => return fail(1, err),
    };
    let mut out = String::new();
    writeln!(
        out,
        "rank={} edges={} degree_used={} full_rank={} min_valency_ok={}",
        report.rank, report.edge_count, report.degree_used, report.full_rank, report.min_valency_ok
    )
    .unwrap();

    // exact observables: loop lengths of the base and of every cover
    let mut sys = match constraint_matrix(structure, cap) {
        Ok(s) => s,
        Err(err) => return fail(1, err),
    };
    let solve_with_rhs = |sys: &mut skel_core::reconstruct::ConstraintSystem| -> Result<BTreeMap<EdgeId, Q>, Error> {
        let doubles = enumerate_connected_double_covers(structure)?;
        let triples = enumerate_connected_triple_covers(structure, TRIPLE_COVER_LIMIT)?;
        for idx in 0..sys.rows.len() {
            if sys.rows[idx].rhs.is_some() {
                continue;
            }
            let src = &sys.sources[idx];
            let rhs = match &src.cover {
                CoverId::Base => loop_length(&src.cycle, &hidden)?,
                CoverId::Double(k) => loop_length(&src.cycle, &doubles[*k].lift_metric(&hidden)?)?,
                CoverId::Triple(k) => loop_length(&src.cycle, &triples[*k].lift_metric(&hidden)?)?,
            };
            sys.rows[idx].rhs = Some(rhs);
        }
        solve_lengths(sys)
    };
    let solution = match solve_with_rhs(&mut sys) {
        Ok(s) => s,
        Err(Error::RankDeficient { .. }) if max_degree >= 3 => {
            if let Err(err) =
                extend_with_triple_covers(&mut sys, structure, cap, TRIPLE_COVER_LIMIT)
            {
                return fail(1, err);
            }
            match solve_with_rhs(&mut sys) {
                Ok(s) => s,
                Err(err) => return fail(1, err),
            }
        }
        Err(err) => return fail(1, err),
    };
    writeln!(out, "rows={}", sys.rows.len()).unwrap();
    let recovered = match MetricGraph::new(structure.clone(), solution) {
        Ok(m) => m,
        Err(err) => return fail(1, err),
    };
    finish_recovery(out, &hidden, &recovered, dot)
}

fn run_pipeline(
    path: &Path,
    p: u64,
    e_max: u32,
    i_max: usize,
    denom_bound: u64,
    max_degree: u32,
    dot: Option<&Path>,
) -> RunOutput {
    let hidden = match io::read_graph(path).and_then(|l| l.into_metric()) {
        Ok(m) => m,
        Err(err) => return fail(2, err),
    };
    let cfg = RecoverConfig {
        p,
        e_max,
        i_max,
        denom_bound,
        max_degree,
        loop_cap: loop_cap(),
    };
    let outcome = match recover_all(&hidden, &cfg) {
        Ok(o) => o,
        Err(err) => return fail(1, err),
    };
    let mut out = String::new();
    writeln!(
        out,
        "rows={} degree_used={}",
        outcome.rows, outcome.degree_used
    )
    .unwrap();
    finish_recovery(out, &hidden, &outcome.recovered, dot)
}

fn run_verify(path: &Path, max_degree: u32) -> RunOutput {
    let loaded = match io::read_graph(path) {
        Ok(l) => l,
        Err(err) => return fail(2, err),
    };
    let report = match verify_full_rank(&loaded.graph, max_degree, loop_cap()) {
        Ok(r) => r,
        Err(err) => return fail(1, err),
    };
    let mut out = String::new();
    writeln!(
        out,
        "min_valency_ok={} rank={} edges={} degree_used={} full_rank={}",
        report.min_valency_ok, report.rank, report.edge_count, report.degree_used, report.full_rank
    )
    .unwrap();
    if !report.full_rank {
        for (i, vec) in report.null_space.iter().enumerate() {
            let body = vec
                .iter()
                .map(|(e, x)| format!("{e}: {}", format_q(x)))
                .collect::<Vec<_>>()
                .join(", ");
            writeln!(out, "null_vector_{i}: {body}").unwrap();
        }
    }
    RunOutput {
        stdout: out,
        stderr: String::new(),
        code: if report.full_rank { 0 } else { 1 },
    }
}
