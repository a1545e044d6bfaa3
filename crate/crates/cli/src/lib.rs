//! Command dispatch for the `resolvedk` binary.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use resolvedk_core::deloc::{
    assemble_complex, chern_character, deloc_cohomology, les_of_pruning, single_node_cohomology, window_stabilization,
    DelocError,
};
use resolvedk_core::descriptor::{load_fixture, ActionDescriptor, DescriptorError};
use resolvedk_core::fixtures::{generate_fixture, FixtureError, FIXTURE_NAMES};
use resolvedk_core::ktheory::{compare_ranks, node_equivariant_k, KError};
use resolvedk_core::redbun::{canonicalize, check_iterated, BundleError};
use resolvedk_core::{Fixture, ModelError};

pub use resolvedk_core::fixtures;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Parse and validate a descriptor.
    Validate,
    /// Node K-groups and canonical reduced bundles.
    Kred,
    /// Delocalized cohomology.
    Deloc,
    /// Chern characters of the descriptor's bundles.
    Ch,
    /// K-theory ranks against delocalized dimensions.
    Compare,
    /// Six-term sequence of one pruning step.
    Les,
    /// Dimensions for windows 0..=M.
    Stabilize,
    /// Print a built-in example descriptor.
    Example,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "resolvedk", version, about = "Equivariant K-theory and delocalized cohomology of resolved actions")]
pub struct Args {
    pub command: Command,
    /// Descriptor file (JSON).
    #[arg(long, conflicts_with = "example")]
    pub input: Option<PathBuf>,
    /// Built-in example instead of a file, e.g. `sphere_rotation` or
    /// `sphere_rotation_speed(3)`.
    #[arg(long)]
    pub example: Option<String>,
    /// Window size m.
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    /// Pruned node; repeatable. For `les` the last one is the node being pruned.
    #[arg(long = "prune")]
    pub prune: Vec<String>,
    /// Node whose cohomology relative to its faces is reported; repeatable.
    #[arg(long = "relative")]
    pub relative: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

/// Process outcome: exit status and text for stdout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub output: String,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Math(String),
}

impl From<DescriptorError> for CliError {
    fn from(e: DescriptorError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::Model(m) => m.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<DelocError> for CliError {
    fn from(e: DelocError) -> Self {
        match e {
            DelocError::Model(m) => m.into(),
            DelocError::Pruning(_) | DelocError::MissingChern(_) => CliError::Input(e.to_string()),
            other => CliError::Math(other.to_string()),
        }
    }
}

impl From<KError> for CliError {
    fn from(e: KError) -> Self {
        match e {
            KError::Deloc(d) => d.into(),
            KError::Model(m) => m.into(),
            KError::Mismatch(_) | KError::Refuted(_) => CliError::Math(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

/// An example name with an optional parameter: `name` or `name(n)`.
fn parse_example(text: &str) -> Result<(String, Option<i64>), CliError> {
    match text.split_once('(') {
        None => Ok((text.to_string(), None)),
        Some((name, rest)) => {
            let n = rest
                .strip_suffix(')')
                .and_then(|x| x.trim().parse().ok())
                .ok_or_else(|| CliError::Input(format!("bad example parameter in {text:?}")))?;
            Ok((name.to_string(), Some(n)))
        }
    }
}

fn load(args: &Args) -> Result<Fixture, CliError> {
    match (&args.input, &args.example) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            Ok(load_fixture(&text)?)
        }
        (None, Some(text)) => {
            let (name, n) = parse_example(text)?;
            Ok(generate_fixture(&name, n)?)
        }
        (None, None) => Err(CliError::Input("one of --input or --example is required".into())),
    }
}

fn pair(p: (usize, usize)) -> Value {
    json!({"even": p.0, "odd": p.1})
}

fn chars(c: &[num_bigint::BigInt]) -> String {
    let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

struct Report {
    status: i32,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { status: 0, text, json }
    }
}

fn pruned_set(args: &Args) -> BTreeSet<String> {
    args.prune.iter().cloned().collect()
}

fn validate(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let a = &f.action;
    let mut text = format!(
        "valid: {} nodes, {} faces, {} corner chains, group {}\n",
        a.tree.nodes.len(),
        a.tree.faces.len(),
        a.tree.corners.len(),
        a.tree.group
    );
    let mut bundles = Vec::new();
    let mut status = 0;
    for (label, b) in &f.bundles {
        let r = check_iterated(a, &s, b)?;
        let ok = r.is_consistent();
        if !ok {
            status = 1;
        }
        let _ = writeln!(text, "bundle {label}: {}", if ok { "consistent" } else { "INCONSISTENT" });
        for m in &r.mismatches {
            let _ = writeln!(text, "  face {} at {}: {:?} vs {:?}", m.face, chars(&m.character), m.restricted, m.pulled_back);
        }
        bundles.push(json!({"label": label, "consistent": ok, "mismatched_faces": r.mismatches.iter().map(|m| m.face.clone()).collect::<Vec<_>>()}));
    }
    let sizes: Vec<Value> = w.iter().map(|(n, c)| json!({"node": n, "window": c.len()})).collect();
    Ok(Report {
        status,
        text,
        json: json!({"valid": true, "nodes": a.tree.nodes.len(), "faces": a.tree.faces.len(), "windows": sizes, "bundles": bundles}),
    })
}

fn kred(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let a = &f.action;
    let mut text = String::new();
    let mut nodes = Vec::new();
    for id in a.tree.sorted_nodes() {
        let k = node_equivariant_k(a, &id, &w[&id])?;
        let data = a.node(&id)?;
        let (e, o) = k.ranks();
        let _ = writeln!(
            text,
            "{id}: K0 = {}, K1 = {}, {} sectors, ranks even {e} odd {o}",
            data.k.k0,
            data.k.k1,
            k.sectors.len()
        );
        nodes.push(json!({"node": id, "k0": data.k.k0.to_string(), "k1": data.k.k1.to_string(), "sectors": k.sectors.len(), "ranks": pair((e, o))}));
    }
    let mut bundles = Vec::new();
    let mut status = 0;
    for (label, b) in &f.bundles {
        let _ = writeln!(text, "bundle {label}:");
        let mut tables = serde_json::Map::new();
        for (id, node) in &b.nodes {
            let c = canonicalize(a, &s, id, &node.entries)?;
            let entries: Vec<String> = c
                .entries
                .iter()
                .map(|(ch, x)| format!("{} -> {}", chars(ch), chars(x)))
                .collect();
            let _ = writeln!(text, "  {id}: {}", if entries.is_empty() { "0".to_string() } else { entries.join(", ") });
            tables.insert(id.clone(), json!(entries));
        }
        let r = check_iterated(a, &s, b)?;
        if !r.is_consistent() {
            status = 1;
            let _ = writeln!(text, "  inconsistent on faces {:?}", r.mismatches.iter().map(|m| &m.face).collect::<Vec<_>>());
        }
        bundles.push(json!({"label": label, "tables": tables, "consistent": r.is_consistent()}));
    }
    Ok(Report { status, text, json: json!({"window": args.window, "nodes": nodes, "bundles": bundles}) })
}

fn deloc(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let a = &f.action;
    if !args.relative.is_empty() {
        let mut text = String::new();
        let mut out = Vec::new();
        for id in &args.relative {
            let rel = single_node_cohomology(a, id, true)?;
            let abs = single_node_cohomology(a, id, false)?;
            let _ = writeln!(text, "{id}: absolute even {} odd {}, relative even {} odd {}", abs.0, abs.1, rel.0, rel.1);
            out.push(json!({"node": id, "absolute": pair(abs), "relative": pair(rel)}));
        }
        return Ok(Report::ok(text, json!({"nodes": out})));
    }
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let c = assemble_complex(a, &s, &w, &pruned_set(args))?;
    let h = deloc_cohomology(&c);
    let mut text = format!("window {}: complex even {} odd {}\n", args.window, c.total_dim().0, c.total_dim().1);
    let _ = writeln!(text, "cohomology even {} odd {}", h.even, h.odd);
    for (sector, e, o) in &h.per_sector {
        let _ = writeln!(text, "  sector {}: even {e} odd {o}", chars(sector));
    }
    let sectors: Vec<Value> = h
        .per_sector
        .iter()
        .map(|(k, e, o)| json!({"sector": chars(k), "even": e, "odd": o}))
        .collect();
    let ok = c.d_squared_zero();
    Ok(Report {
        status: if ok { 0 } else { 1 },
        text,
        json: json!({"window": args.window, "complex": pair(c.total_dim()), "even": h.even, "odd": h.odd, "sectors": sectors, "d_squared_zero": ok}),
    })
}

fn ch(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let a = &f.action;
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let c = assemble_complex(a, &s, &w, &BTreeSet::new())?;
    let mut text = String::new();
    let mut out = Vec::new();
    let mut status = 0;
    for (label, b) in &f.bundles {
        let t = chern_character(a, &s, b)?;
        let mut located = false;
        for block in &c.blocks {
            if let Some(v) = t.in_block(a, block)? {
                let dv = block.d.apply(&v);
                if dv.iter().any(|x| !x.is_zero()) {
                    status = 1;
                }
                located = true;
            }
        }
        if !located {
            status = 1;
        }
        let _ = writeln!(text, "bundle {label}: closed, compatible, {}", if located { "inside the window" } else { "OUTSIDE the window" });
        let mut forms = serde_json::Map::new();
        for (node, sector) in &t.forms {
            let entries: Vec<String> = sector
                .entries
                .iter()
                .map(|(k, v)| {
                    let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    format!("{} -> [{}]", chars(k), vals.join(" "))
                })
                .collect();
            let _ = writeln!(text, "  {node}: {}", entries.join(", "));
            forms.insert(node.clone(), json!(entries));
        }
        out.push(json!({"label": label, "in_window": located, "forms": forms}));
    }
    Ok(Report { status, text, json: json!({"bundles": out}) })
}

fn compare(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let a = &f.action;
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let pruned = pruned_set(args);
    let h = deloc_cohomology(&assemble_complex(a, &s, &w, &pruned)?);
    let r = compare_ranks(a, &s, &w, &pruned)?;
    let mut text = String::new();
    for n in &r.nodes {
        let _ = writeln!(
            text,
            "node {}: K ({}, {}) = H ({}, {}) per sector, {} sectors",
            n.node, n.k_absolute.0, n.k_absolute.1, n.h_absolute.0, n.h_absolute.1, n.sectors
        );
    }
    let _ = writeln!(text, "even {} = {}", h.even, r.global.even);
    let _ = writeln!(text, "odd {} = {}", h.odd, r.global.odd);
    let agree = h.even == r.global.even && h.odd == r.global.odd;
    Ok(Report {
        status: if agree { 0 } else { 1 },
        text,
        json: json!({
            "window": args.window,
            "deloc": pair((h.even, h.odd)),
            "k": pair((r.global.even, r.global.odd)),
            "agree": agree,
            "steps": r.global.steps.iter().map(|st| json!({"node": st.node, "deloc": pair(st.deloc), "node_term": pair(st.node_term.0)})).collect::<Vec<_>>(),
        }),
    })
}

fn les(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let Some((alpha, rest)) = args.prune.split_last() else {
        return Err(CliError::Input("les needs at least one --prune NODE".into()));
    };
    let w = f.windows(args.window)?;
    let s = f.sections(args.window)?;
    let pruned: BTreeSet<String> = rest.iter().cloned().collect();
    let r = les_of_pruning(&f.action, &s, &w, &pruned, alpha)?;
    let exact = r.verdict.is_exact();
    let mut text = format!("prune {alpha} from {:?}\n{}\n", pruned, r.instance);
    if exact {
        text.push_str("exact at all six positions, alternating sum 0\n");
    } else {
        let _ = writeln!(text, "INEXACT at positions {:?}", r.verdict.inexact_positions());
    }
    Ok(Report {
        status: if exact { 0 } else { 1 },
        text,
        json: json!({
            "node": alpha,
            "pruned": pruned,
            "dims": r.instance.dims,
            "ranks": r.instance.ranks,
            "exact": exact,
            "inexact_positions": r.verdict.inexact_positions(),
        }),
    })
}

fn stabilize(f: &Fixture, args: &Args) -> Result<Report, CliError> {
    let s = f.sections(args.window)?;
    let ws = (0..=args.window).map(|m| f.windows(m).map(|w| (m, w))).collect::<Result<Vec<_>, _>>()?;
    let r = window_stabilization(&f.action, &s, &ws, &pruned_set(args), None)?;
    let mut text = String::new();
    for (m, (e, o)) in r.sizes.iter().zip(&r.dims) {
        let _ = writeln!(text, "m = {m}: even {e} odd {o}");
    }
    match r.stable_from {
        Some(m) => {
            let _ = writeln!(text, "stable from m = {m}");
        }
        None => text.push_str("not stable in this range\n"),
    }
    Ok(Report::ok(
        text,
        json!({"dims": r.sizes.iter().zip(&r.dims).map(|(m, d)| json!({"window": m, "even": d.0, "odd": d.1})).collect::<Vec<_>>(), "stable_from": r.stable_from}),
    ))
}

fn example(args: &Args) -> Result<Report, CliError> {
    match &args.example {
        None => Ok(Report::ok(FIXTURE_NAMES.join("\n") + "\n", json!(FIXTURE_NAMES))),
        Some(_) => {
            let f = load(args)?;
            let d = ActionDescriptor::from_fixture(&f);
            let v = serde_json::to_value(&d).expect("descriptor serializes");
            Ok(Report::ok(resolvedk_core::descriptor::to_json(&d) + "\n", v))
        }
    }
}

fn dispatch(args: &Args) -> Result<Report, CliError> {
    if args.command == Command::Example {
        return example(args);
    }
    let f = load(args)?;
    match args.command {
        Command::Validate => validate(&f, args),
        Command::Kred => kred(&f, args),
        Command::Deloc => deloc(&f, args),
        Command::Ch => ch(&f, args),
        Command::Compare => compare(&f, args),
        Command::Les => les(&f, args),
        Command::Stabilize => stabilize(&f, args),
        Command::Example => unreachable!(),
    }
}

/// Runs one command. Status 0 on success, 1 on a mathematical failure
/// (inexact sequence, rank mismatch, inconsistent bundle), 2 on bad input.
pub fn run(args: &Args) -> Outcome {
    match dispatch(args) {
        Ok(r) => {
            let output = match (args.format, args.command) {
                (_, Command::Example) | (Format::Table, _) => r.text,
                (Format::Json, _) => {
                    let mut v = r.json;
                    if let Value::Object(m) = &mut v {
                        m.insert("status".into(), json!(r.status));
                    }
                    serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
                }
            };
            Outcome { status: r.status, output }
        }
        Err(CliError::Input(msg)) => Outcome { status: 2, output: format!("error: {msg}\n") },
        Err(CliError::Math(msg)) => Outcome { status: 1, output: format!("failure: {msg}\n") },
    }
}
