//! `welded`: evaluate, inspect, scramble and verify welded link diagrams.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use welded_core::diagram::{Diagram, Sign};
use welded_core::moves::{
    check_invariance, scramble_with, InvarianceConfig, InvarianceOutcome, MoveKind,
};
use welded_core::skein::{specialize_rs, y_invariant_with, CoefficientSystem, EvalOptions, NuChoice};
use welded_core::verifier::{
    builtin_move, f1_branches, move_constraints, t4_identity, verify_solution, ConstraintSet,
    VerifyReport,
};

#[derive(Parser, Debug)]
#[command(name = "welded", version, about = "Skein invariant of extended welded links")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the normalized invariant Y of a diagram.
    Eval {
        file: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        /// Output form.
        #[arg(long, value_enum, default_value_t = Form::Ab)]
        form: Form,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print writhe, virtual crossings, wens and components.
    Info {
        file: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Apply random moves and print the resulting diagram.
    Scramble {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of moves.
        #[arg(long, default_value_t = 20)]
        moves: usize,
        /// Vertex count above which removals are favoured [default: vertices + 4]
        #[arg(long)]
        size_cap: Option<usize>,
        /// Comma-separated move names [default: all equivalence moves]
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scramble repeatedly and check that Y never changes.
    CheckInvariance {
        file: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Moves per trial.
        #[arg(long, default_value_t = 20)]
        moves: usize,
        /// Vertex count above which removals are favoured [default: vertices + 4]
        #[arg(long)]
        size_cap: Option<usize>,
        /// Comma-separated move names [default: every move valid for the mode]
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Derive coefficient constraints from the built-in move tangles.
    VerifyMoves {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Extended)]
    mode: ModeArg,
    /// nu for welded mode: 1, -1 or sym.
    #[arg(long, default_value = "sym", allow_hyphen_values = true)]
    nu: String,
    /// Fix r or s: `--set r=1`, `--set s=-1`.
    #[arg(long = "set", allow_hyphen_values = true)]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Write output here instead of stdout.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Emit JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Generic,
    Welded,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Form {
    Ab,
    Alphabeta,
    Lambda,
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<Outcome, Failure>;

/// Text or JSON to print, and whether the check passed.
struct Outcome {
    text: String,
    json: Value,
    ok: bool,
}

struct Family {
    cs: CoefficientSystem,
    r: Option<i8>,
    s: Option<i8>,
}

fn parse_sign(v: &str) -> Option<i8> {
    match v {
        "1" | "+1" => Some(1),
        "-1" => Some(-1),
        _ => None,
    }
}

fn family(args: &FamilyArgs) -> Result<Family, Failure> {
    let nu = match args.nu.as_str() {
        "sym" | "nu" => NuChoice::Symbolic,
        v => match parse_sign(v) {
            Some(1) => NuChoice::Plus,
            Some(_) => NuChoice::Minus,
            None => return Err(input_error(format!("--nu must be 1, -1 or sym, got `{v}`"))),
        },
    };
    let cs = match args.mode {
        ModeArg::Generic => CoefficientSystem::generic(),
        ModeArg::Welded => CoefficientSystem::welded(nu),
        ModeArg::Extended => {
            if nu == NuChoice::Minus {
                return Err(input_error("extended mode fixes nu = 1"));
            }
            CoefficientSystem::extended()
        }
    };
    let (mut r, mut s) = (None, None);
    for a in &args.set {
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| input_error(format!("--set expects name=value, got `{a}`")))?;
        let v = parse_sign(v.trim())
            .ok_or_else(|| input_error(format!("--set {k} must be 1 or -1")))?;
        match k.trim() {
            "r" => r = Some(v),
            "s" => s = Some(v),
            other => return Err(input_error(format!("--set accepts r or s, got `{other}`"))),
        }
    }
    Ok(Family { cs, r, s })
}

fn read_diagram(path: &Path) -> Result<Diagram, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Diagram::parse(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn eval_options(threads: usize) -> EvalOptions {
    EvalOptions {
        threads,
        ..Default::default()
    }
}

fn skein_failure(e: impl std::fmt::Display) -> Failure {
    input_error(e.to_string())
}

fn cmd_eval(file: &Path, fam: &FamilyArgs, form: Form, common: &CommonArgs) -> CmdResult {
    let f = family(fam)?;
    if !f.cs.is_solved() {
        return Err(input_error("eval needs a solved family: use --mode welded or extended"));
    }
    if form == Form::Lambda && fam.mode != ModeArg::Extended {
        return Err(input_error("--form lambda requires --mode extended"));
    }
    let d = read_diagram(file)?;
    let y = y_invariant_with(&d, &f.cs, &eval_options(common.threads)).map_err(skein_failure)?;
    let y = specialize_rs(&y, f.r, f.s).map_err(skein_failure)?;
    let value = match form {
        Form::Ab => y.to_string(),
        Form::Alphabeta => y.to_alpha_beta().map_err(skein_failure)?.to_string(),
        Form::Lambda => y
            .to_alpha_beta()
            .and_then(|l| l.dehomogenize())
            .map_err(skein_failure)?
            .to_string(),
    };
    Ok(Outcome {
        json: json!({
            "file": file.display().to_string(),
            "mode": format!("{:?}", f.cs.mode),
            "form": format!("{form:?}").to_lowercase(),
            "value": value,
        }),
        text: format!("{value}\n"),
        ok: true,
    })
}

fn cmd_info(file: &Path) -> CmdResult {
    let d = read_diagram(file)?;
    let (pos, neg) = d.crossing_counts();
    let vw = d.virtual_writhe();
    let wens = d.wen_count();
    let text = format!(
        "writhe: {}\nvirtual crossings: {} (parity {})\nwens: {} (parity {})\ncomponents: {}\nclassical crossings: {} (+{} / -{})\n",
        d.writhe(),
        vw.count,
        vw.parity,
        wens,
        wens % 2,
        d.components(),
        pos + neg,
        pos,
        neg
    );
    Ok(Outcome {
        json: json!({
            "writhe": d.writhe(),
            "virtual_crossings": vw.count,
            "virtual_parity": vw.parity,
            "wens": wens,
            "wen_parity": wens % 2,
            "components": d.components(),
            "classical_crossings": pos + neg,
            "positive": pos,
            "negative": neg,
        }),
        text,
        ok: true,
    })
}

fn parse_kinds(kinds: &Option<Vec<String>>, default: Vec<MoveKind>) -> Result<Vec<MoveKind>, Failure> {
    match kinds {
        None => Ok(default),
        Some(list) => list
            .iter()
            .map(|k| k.trim().parse::<MoveKind>().map_err(|e| input_error(e.to_string())))
            .collect(),
    }
}

fn cmd_scramble(
    file: &Path,
    seed: u64,
    moves: usize,
    size_cap: Option<usize>,
    kinds: &Option<Vec<String>>,
) -> CmdResult {
    use rand::SeedableRng;
    let d = read_diagram(file)?;
    let kinds = parse_kinds(kinds, MoveKind::EQUIVALENCES.to_vec())?;
    let cap = size_cap.unwrap_or(d.vertices.len() + 4);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (out, log) = scramble_with(&d, &mut rng, moves, cap, &kinds);
    let out = out.renumbered();
    let log: Vec<String> = log.iter().map(|m| m.to_string()).collect();
    Ok(Outcome {
        json: json!({ "diagram": out.serialize(), "moves": log }),
        text: out.serialize(),
        ok: true,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    fam: &FamilyArgs,
    seed: u64,
    trials: usize,
    moves: usize,
    size_cap: Option<usize>,
    kinds: &Option<Vec<String>>,
    common: &CommonArgs,
) -> CmdResult {
    let f = family(fam)?;
    if !f.cs.is_solved() {
        return Err(input_error("check-invariance needs --mode welded or extended"));
    }
    let d = read_diagram(file)?;
    let default: Vec<MoveKind> = MoveKind::EQUIVALENCES
        .iter()
        .copied()
        .filter(|k| fam.mode == ModeArg::Extended || !k.uses_wens())
        .collect();
    let cfg = InvarianceConfig {
        seed,
        trials,
        moves,
        size_cap: size_cap.unwrap_or(d.vertices.len() + 4),
        kinds: parse_kinds(kinds, default)?,
    };
    let outcome = check_invariance(&d, &f.cs, &eval_options(common.threads), &cfg)
        .map_err(skein_failure)?;
    Ok(match outcome {
        InvarianceOutcome::Pass { trials } => Outcome {
            text: format!("pass: {trials} trials of {moves} moves (seed {seed})\n"),
            json: json!({ "pass": true, "trials": trials, "moves": moves, "seed": seed }),
            ok: true,
        },
        InvarianceOutcome::Fail {
            trial,
            expected,
            found,
            moves: log,
            diagram,
        } => {
            let steps: Vec<String> = log.iter().map(|m| m.to_string()).collect();
            let mut text = format!(
                "FAIL: trial {trial} changed Y\n  expected: {expected}\n  found: {found}\n  moves:\n"
            );
            for (i, s) in steps.iter().enumerate() {
                text.push_str(&format!("    {}. {s}\n", i + 1));
            }
            text.push_str("  diagram:\n");
            for line in diagram.serialize().lines() {
                text.push_str(&format!("    {line}\n"));
            }
            Outcome {
                json: json!({
                    "pass": false,
                    "trial": trial,
                    "expected": expected.to_string(),
                    "found": found.to_string(),
                    "moves": steps,
                    "diagram": diagram.serialize(),
                }),
                text,
                ok: false,
            }
        }
    })
}

fn sign_txt(s: Option<Sign>) -> &'static str {
    match s {
        Some(Sign::Pos) => "+",
        Some(Sign::Neg) => "-",
        None => "",
    }
}

fn constraints_json(c: &ConstraintSet) -> Value {
    Value::Array(
        c.equations
            .iter()
            .map(|e| {
                json!({
                    "equation": format!("{} = 0", e.normalized),
                    "raw": e.raw.to_string(),
                    "sources": e.sources.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn push_equations(text: &mut String, c: &ConstraintSet) {
    for e in &c.equations {
        let src: Vec<String> = e.sources.iter().map(|p| p.to_string()).collect();
        text.push_str(&format!("    {} = 0    [{}]\n", e.normalized, src.join(" ")));
    }
}

fn report_table(rep: &VerifyReport, solved: bool) -> String {
    let mut t = format!("family: {}\n", rep.family);
    t.push_str(&format!(
        "kink coefficients: positive {}, negative {}",
        rep.kinks.positive, rep.kinks.negative
    ));
    if let Some(m) = rep.kinks.matches_omega {
        t.push_str(&format!(
            " (omega: {}, reciprocal: {})",
            if m { "yes" } else { "no" },
            if rep.kinks.reciprocal { "yes" } else { "no" }
        ));
    }
    t.push_str("\n\n");
    t.push_str(&format!(
        "{:<6}{:<6}{:>10}{:>11}  {}\n",
        "move", "sign", "closures", "equations", "result"
    ));
    for m in &rep.moves {
        let result = match (solved, m.pass) {
            (true, true) => "pass",
            (true, false) => "FAIL",
            (false, true) => "none",
            (false, false) => "constraints",
        };
        t.push_str(&format!(
            "{:<6}{:<6}{:>10}{:>11}  {}\n",
            m.name,
            sign_txt(m.sign),
            m.constraints.closures,
            m.constraints.len(),
            result
        ));
    }
    for m in rep.moves.iter().filter(|m| !m.pass) {
        t.push_str(&format!("\n{} {}:\n", m.name, sign_txt(m.sign)));
        push_equations(&mut t, &m.constraints);
    }
    t
}

fn cmd_verify(fam: &FamilyArgs) -> CmdResult {
    let f = family(fam)?;
    let rep = verify_solution(&f.cs).map_err(skein_failure)?;
    let solved = f.cs.is_solved();
    let mut text = report_table(&rep, solved);
    let moves_json: Vec<Value> = rep
        .moves
        .iter()
        .map(|m| {
            json!({
                "move": m.name,
                "sign": sign_txt(m.sign),
                "closures": m.constraints.closures,
                "equations": constraints_json(&m.constraints),
                "pass": m.pass,
            })
        })
        .collect();
    let mut extra = serde_json::Map::new();
    let ok = if solved {
        let nus = match f.cs.nu_sign() {
            Some(nu) => vec![nu],
            None => vec![1, -1],
        };
        let mut ids = serde_json::Map::new();
        text.push('\n');
        for nu in nus {
            let id = t4_identity(nu);
            text.push_str(&format!("T4 identity at nu = {nu}: {id}\n"));
            ids.insert(nu.to_string(), json!(id.to_string()));
        }
        extra.insert("t4_identity".into(), Value::Object(ids));
        rep.all_pass()
    } else {
        let g = &f.cs;
        let f1 = builtin_move("F1", Sign::Pos).expect("built in");
        let r3 = builtin_move("R3", Sign::Pos).expect("built in");
        let f1c = move_constraints(&f1.lhs, &f1.rhs, g).map_err(skein_failure)?;
        let r3c = move_constraints(&r3.lhs, &r3.rhs, g).map_err(skein_failure)?;
        let mut all = true;
        let mut branches = Vec::new();
        text.push_str("\nF1 solution branches:\n");
        for (name, assign) in f1_branches() {
            let f1r = f1c.substitute(&assign).map_err(skein_failure)?;
            let r3r = r3c.substitute(&assign).map_err(skein_failure)?;
            let good = f1r.is_empty() && r3r.is_empty();
            all &= good;
            text.push_str(&format!(
                "  {name}: F1 {} remaining, R3 {} remaining\n",
                f1r.len(),
                r3r.len()
            ));
            branches.push(json!({
                "branch": name,
                "f1_remaining": f1r.len(),
                "r3_remaining": r3r.len(),
            }));
        }
        let m_empty = rep
            .moves
            .iter()
            .filter(|m| m.name.starts_with('M'))
            .all(|m| m.pass);
        all &= m_empty;
        text.push_str(&format!(
            "M with no constraints: {}\n",
            if m_empty { "no equations" } else { "equations remain" }
        ));
        extra.insert("branches".into(), Value::Array(branches));
        extra.insert("m_unconstrained".into(), json!(m_empty));
        all
    };
    let mut j = json!({
        "family": rep.family,
        "kinks": {
            "positive": rep.kinks.positive.to_string(),
            "negative": rep.kinks.negative.to_string(),
            "matches_omega": rep.kinks.matches_omega,
            "reciprocal": rep.kinks.reciprocal,
        },
        "moves": moves_json,
        "pass": ok,
    });
    if let Value::Object(o) = &mut j {
        o.extend(extra);
    }
    Ok(Outcome { text, json: j, ok })
}

fn emit(out: &Outcome, common: &CommonArgs) -> Result<(), Failure> {
    let body = if common.json {
        format!("{}\n", serde_json::to_string_pretty(&out.json).expect("json"))
    } else {
        out.text.clone()
    };
    match &common.output {
        Some(p) => fs::write(p, body).map_err(|e| input_error(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let common = match &cli.cmd {
        Cmd::Eval { common, .. }
        | Cmd::Info { common, .. }
        | Cmd::Scramble { common, .. }
        | Cmd::CheckInvariance { common, .. }
        | Cmd::VerifyMoves { common, .. } => common,
    };
    if common.threads > 0 {
        // an already initialized pool is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global();
    }
    let out = match &cli.cmd {
        Cmd::Eval {
            file,
            family,
            form,
            common,
        } => cmd_eval(file, family, *form, common)?,
        Cmd::Info { file, .. } => cmd_info(file)?,
        Cmd::Scramble {
            file,
            seed,
            moves,
            size_cap,
            kinds,
            ..
        } => cmd_scramble(file, *seed, *moves, *size_cap, kinds)?,
        Cmd::CheckInvariance {
            file,
            family,
            seed,
            trials,
            moves,
            size_cap,
            kinds,
            common,
        } => cmd_check(file, family, *seed, *trials, *moves, *size_cap, kinds, common)?,
        Cmd::VerifyMoves { family, .. } => cmd_verify(family)?,
    };
    emit(&out, common)?;
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
