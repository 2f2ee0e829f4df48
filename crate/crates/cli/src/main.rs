//! Batch front-end: load immersion squares (linear or polynomial), run the
//! regularity check, emit symmetry certificates, run the double-category law
//! suites, and generate deterministic regular squares.
//!
//! Exit codes: 0 = pass, 1 = mathematical failure, 2 = input/config error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvb_core::error::Error;
use dvb_core::json;
use dvb_core::poly::linearize_square_at;
use dvb_core::symmetry::{
    is_regular, random_regular_square, symmetry_iso, DimBounds, ImmersionSquare,
};
use serde_json::{json, Value};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dvb",
    version,
    about = "Exact verification of iterated normal bundles of immersion squares"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Args)]
struct OutputOpts {
    /// report format
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// write the machine report to this path instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the regularity criteria on a square (exit 0 regular, 1 not)
    Check {
        input: PathBuf,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Construct and verify the symmetry isomorphism of a regular square
    Verify {
        input: PathBuf,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Run the seeded double-category law suites
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Emit a deterministic regular square for a seed and dimension bounds
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// bounds as m1,n1,m2,n2
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 2, 4])]
        bounds: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Linearize a polynomial square at its base point
    Linearize {
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            classify(&e)
        }
    };
    ExitCode::from(code)
}

/// Mathematical failures exit 1; malformed input or configuration exits 2.
fn classify(e: &Error) -> u8 {
    match e {
        Error::NotRegular | Error::ImmersionFailure(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Check { input, out } => cmd_check(&input, &out),
        Command::Verify { input, out } => cmd_verify(&input, &out),
        Command::Laws {
            seed,
            trials,
            max_dim,
            out,
        } => cmd_laws(seed, trials, max_dim, &out),
        Command::Gen {
            seed,
            bounds,
            output,
        } => cmd_gen(seed, &bounds, output.as_deref()),
        Command::Linearize { input, output } => cmd_linearize(&input, output.as_deref()),
    }
}

fn read_json(path: &std::path::Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse(format!(
            "{}: invalid JSON at line {}, column {}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Loads a square, linearizing polynomial input at its base point first.
fn load_square(path: &std::path::Path) -> Result<ImmersionSquare, Error> {
    let v = read_json(path)?;
    if json::is_poly_input(&v) {
        let p = json::poly_square_from_json(&v)?;
        linearize_square_at(&p.top, &p.bottom, &p.left, &p.right, &p.point)
    } else {
        json::square_from_json(&v)
    }
}

fn emit(out: &OutputOpts, machine: &Value, human: &str) -> Result<(), Error> {
    // a file always receives the machine document (byte-deterministic);
    // stdout gets the requested rendering
    if let Some(path) = &out.output {
        fs::write(path, machine_bytes(machine))
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
        if out.format == Format::Human {
            print!("{human}");
        }
    } else {
        match out.format {
            Format::Machine => print!(
                "{}",
                String::from_utf8(machine_bytes(machine)).expect("utf8")
            ),
            Format::Human => print!("{human}"),
        }
    }
    Ok(())
}

fn machine_bytes(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("serializable report");
    bytes.push(b'\n');
    bytes
}

fn cmd_check(input: &std::path::Path, out: &OutputOpts) -> Result<u8, Error> {
    let sq = load_square(input)?;
    let (regular, report) = is_regular(&sq)?;
    let machine = json!({
        "regular": regular,
        "criteria": {
            "normal_differential_first": report.criterion_nu_i,
            "normal_differential_second": report.criterion_nu_j,
            "exact_sequence": report.criterion_exact,
        },
        "spaces": {"M1": sq.m1(), "M2": sq.m2(), "N1": sq.n1(), "N2": sq.n2()},
    });
    let verdict = |b: bool| if b { "pass" } else { "FAIL" };
    let human = format!(
        "square M1={} M2={} N1={} N2={}\n\
         criterion                        verdict\n\
         -------------------------------- -------\n\
         normal differential (first)      {}\n\
         normal differential (second)     {}\n\
         exact sequence                   {}\n\
         regular: {}\n",
        sq.m1(),
        sq.m2(),
        sq.n1(),
        sq.n2(),
        verdict(report.criterion_nu_i),
        verdict(report.criterion_nu_j),
        verdict(report.criterion_exact),
        regular
    );
    emit(out, &machine, &human)?;
    Ok(if regular { 0 } else { 1 })
}

fn cmd_verify(input: &std::path::Path, out: &OutputOpts) -> Result<u8, Error> {
    let sq = load_square(input)?;
    let cert = symmetry_iso(&sq)?;
    let machine = json::certificate_to_json(&cert);
    let mut human = String::new();
    human.push_str(&format!("regular: {}\n", cert.regular));
    if cert.regular {
        human.push_str("lemma                            verdict\n");
        human.push_str("-------------------------------- -------\n");
        for l in &cert.lemmas {
            human.push_str(&format!(
                "{:<32} {}\n",
                l.name,
                if l.pass { "pass" } else { "FAIL" }
            ));
        }
        for (name, ok) in [
            ("lambda bijective", cert.bijective),
            ("lambda flip-equivariant", cert.equivariant),
            ("constructions agree", cert.alt_agreement),
            ("sides exchanged", cert.side_match),
            ("core formula", cert.core_formula),
        ] {
            human.push_str(&format!(
                "{:<32} {}\n",
                name,
                if ok { "pass" } else { "FAIL" }
            ));
        }
    }
    emit(out, &machine, &human)?;
    Ok(if cert.all_pass() { 0 } else { 1 })
}

fn cmd_laws(seed: u64, trials: usize, max_dim: usize, out: &OutputOpts) -> Result<u8, Error> {
    if trials < 1 {
        return Err(Error::InfeasibleBounds("trials must be at least 1".into()));
    }
    if max_dim < 1 {
        return Err(Error::InfeasibleBounds("max-dim must be at least 1".into()));
    }
    let reports = dvb_core::dblcat::lin_sq_law_suite(seed, trials, max_dim);
    let all_pass = reports.iter().all(|r| r.passed());
    let machine = serde_json::to_value(&reports).expect("serializable law reports");
    let mut human = String::new();
    human.push_str("axiom             trials  failures\n");
    human.push_str("----------------- ------- --------\n");
    for r in &reports {
        human.push_str(&format!("{:<17} {:<7} {}\n", r.axiom, r.trials, r.failures));
        if let Some(w) = &r.first_witness {
            human.push_str(&format!("  first witness: {w}\n"));
        }
    }
    emit(out, &machine, &human)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_gen(seed: u64, bounds: &[usize], output: Option<&std::path::Path>) -> Result<u8, Error> {
    if bounds.len() != 4 {
        return Err(Error::InfeasibleBounds("bounds must be m1,n1,m2,n2".into()));
    }
    let bounds = DimBounds {
        m1: bounds[0],
        n1: bounds[1],
        m2: bounds[2],
        n2: bounds[3],
    };
    let sq = random_regular_square(seed, bounds)?;
    let v = json::square_to_json(&sq);
    let bytes = machine_bytes(&v);
    match output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", String::from_utf8(bytes).expect("utf8 json")),
    }
    Ok(0)
}

fn cmd_linearize(input: &std::path::Path, output: Option<&std::path::Path>) -> Result<u8, Error> {
    let v = read_json(input)?;
    if !json::is_poly_input(&v) {
        return Err(Error::Parse(
            "linearize expects a polynomial input with \"poly\": true".into(),
        ));
    }
    let p = json::poly_square_from_json(&v)?;
    let sq = linearize_square_at(&p.top, &p.bottom, &p.left, &p.right, &p.point)?;
    let out = json::square_to_json(&sq);
    let bytes = machine_bytes(&out);
    match output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", String::from_utf8(bytes).expect("utf8 json")),
    }
    Ok(0)
}
