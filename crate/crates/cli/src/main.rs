mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hermsurg::exactalg::RingSpec;
use hermsurg::formcore::{classes, gw0, witt_group, Flavor, FormParameter, GroupComputation, UnimodularForm};
use hermsurg::json::{self, FormJson, QuadraticComplexJson};
use hermsurg::qcat::{build_hermitian_q, q_to_dot, q_to_json, witt_coordinates};
use hermsurg::qsurgery::random::fatten_randomly;
use hermsurg::qsurgery::{normalize_to_heart, QuadraticComplex, DEFAULT_STEP_CAP};
use hermsurg::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use report::{invariants, Table};

#[derive(Parser)]
#[command(name = "hermsurg", version, about = "Unimodular forms, Witt groups and algebraic surgery in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FormOpts {
    /// Z, F<p>, or Z/<n>.
    #[arg(long, default_value = "Z")]
    ring: String,
    /// symmetric, quadratic or even.
    #[arg(long, default_value = "symmetric")]
    flavor: String,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    epsilon: i64,
    /// Rank cap for enumeration.
    #[arg(long, default_value_t = 4)]
    cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Witt group presentation.
    Witt {
        #[command(flatten)]
        form: FormOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grothendieck-Witt group (over Z: the image of the default generators).
    Gw {
        #[command(flatten)]
        form: FormOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant table of one form (--in) or of every class up to the cap.
    Classify {
        #[command(flatten)]
        form: FormOpts,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Surgery a quadratic complex (or a fattened form) back into degree 0.
    Normalize {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of random fattening surgeries applied first.
        #[arg(long, default_value_t = 0)]
        fatten: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        steps: usize,
        /// Step log as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hermitian Q-construction over a prime field.
    Qcat {
        #[command(flatten)]
        form: FormOpts,
        #[arg(long)]
        components: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Validate a matrix, form, complex or quadratic complex file.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> u8 {
        match self {
            Failure::Core(Error::CapExceeded(_) | Error::Obstruction(_)) => 3,
            Failure::Core(Error::Internal(_)) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(s) => write!(f, "{s}"),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Witt { form, out } => group_command(&form, true, out.as_deref()),
        Command::Gw { form, out } => group_command(&form, false, out.as_deref()),
        Command::Classify { form, input, out, csv } => classify(&form, input.as_deref(), out.as_deref(), csv.as_deref()),
        Command::Normalize { input, fatten, seed, steps, log, out } => {
            normalize(&input, fatten, seed, steps, log.as_deref(), out.as_deref())
        }
        Command::Qcat { form, components, jobs, out, dot } => qcat(&form, components, jobs, out.as_deref(), dot.as_deref()),
        Command::Check { input } => check(&input),
    }
}

fn parse_ring(s: &str) -> Result<RingSpec, Error> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("z") {
        return Ok(RingSpec::Integers);
    }
    let digits = t
        .strip_prefix('F')
        .or_else(|| t.strip_prefix("Z/"))
        .or_else(|| t.strip_prefix("Zmod"))
        .ok_or_else(|| Error::Parse(format!("unknown ring '{s}' (use Z, F<p> or Z/<n>)")))?;
    let n: u64 = digits.parse().map_err(|_| Error::Parse(format!("bad modulus in '{s}'")))?;
    let r = RingSpec::zmod(n)?;
    if t.starts_with('F') && !r.is_field() {
        return Err(Error::Invalid(format!("F{n} is not a prime field")));
    }
    Ok(r)
}

fn param_of(o: &FormOpts) -> Result<FormParameter, Error> {
    let flavor: Flavor = o.flavor.parse()?;
    FormParameter::new(parse_ring(&o.ring)?, flavor, o.epsilon)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_json(path: Option<&Path>, v: &Value) -> Outcome {
    match path {
        Some(p) => write(p, &(serde_json::to_string_pretty(v).expect("json value") + "\n")),
        None => Ok(()),
    }
}

fn group_json(g: &GroupComputation) -> Value {
    let gens: Vec<Value> = g
        .group
        .generators
        .iter()
        .map(|l| json!({"label": l.label, "coords": l.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>()}))
        .collect();
    json!({
        "group": g.display,
        "free_rank": g.group.free_rank,
        "factors": g.group.factors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "generators": gens,
    })
}

fn group_command(o: &FormOpts, witt: bool, out: Option<&Path>) -> Outcome {
    let param = param_of(o)?;
    let g = if witt { witt_group(param.ring, &param, o.cap)? } else { gw0(param.ring, &param, &[], o.cap)? };
    let name = if witt { "W" } else { "GW0" };
    println!("{name}({}, {}): {}", param.ring, param.flavor, g.display);
    let mut t = Table::new(&["generator", "coordinates"]);
    for l in &g.group.generators {
        t.row(vec![l.label.clone(), report::coords(&l.coords)]);
    }
    print!("{}", t.render());
    write_json(out, &group_json(&g))
}

fn classify(o: &FormOpts, input: Option<&Path>, out: Option<&Path>, csv_path: Option<&Path>) -> Outcome {
    let forms: Vec<UnimodularForm> = match input {
        Some(p) => vec![json::form_from_json(&json::parse::<FormJson>(&read(p)?)?)?],
        None => {
            let param = param_of(o)?;
            classes(&param, o.cap)?.into_iter().flatten().map(|c| c.form).collect()
        }
    };
    let cap = o.cap.max(forms.iter().map(|f| f.rank()).max().unwrap_or(0));
    let mut t = Table::new(&report::INVARIANT_COLUMNS);
    let mut rows = Vec::new();
    for f in &forms {
        let row = invariants(f, cap)?;
        rows.push(json!({
            "form": json::form_to_json(f)?,
            "rank": row[0], "signature": row[1], "parity": row[2], "det_class": row[3], "witt_class": row[4],
        }));
        t.row(row);
    }
    print!("{}", t.render());
    if let Some(p) = csv_path {
        write(p, &t.csv().map_err(Failure::Io)?)?;
    }
    write_json(out, &json!({ "classes": rows }))
}

/// A form file is placed in degree 0; a quadratic-complex file is used as is.
fn load_complex(text: &str) -> Result<QuadraticComplex, Error> {
    let v: Value = json::parse(text)?;
    if v.get("gram").is_some() {
        let f = json::form_from_json(&serde_json::from_value::<FormJson>(v).map_err(|e| Error::Parse(e.to_string()))?)?;
        return QuadraticComplex::from_form(&f);
    }
    let j: QuadraticComplexJson = serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))?;
    json::quadratic_complex_from_json(&j)
}

fn normalize(input: &Path, fatten: usize, seed: u64, steps: usize, log: Option<&Path>, out: Option<&Path>) -> Outcome {
    let mut x = load_complex(&read(input)?)?;
    if fatten > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total = x.complex().total_rank() + 4 * fatten;
        x = fatten_randomly(&x, fatten, total, &mut rng)?.0;
        println!("fattened: dims {:?} from degree {}", x.complex().dims(), x.complex().lo());
    }
    let n = normalize_to_heart(&x, steps)?;
    let f = &n.form;
    println!("recovered form (rank {}):", f.rank());
    for row in f.gram().to_i64_rows() {
        println!("  {}", row.iter().map(|v| format!("{v:>3}")).collect::<Vec<_>>().join(" "));
    }
    let mut t = Table::new(&report::INVARIANT_COLUMNS);
    let row = invariants(f, f.rank().max(4))?;
    t.row(row.clone());
    print!("{}", t.render());
    let lines: Vec<String> = n.log.iter().map(|s| s.to_json_line()).collect();
    match log {
        Some(p) => write(p, &lines.iter().map(|l| format!("{l}\n")).collect::<String>())?,
        None => {
            println!("step log:");
            for l in &lines {
                println!("{l}");
            }
        }
    }
    write_json(
        out,
        &json!({
            "form": json::form_to_json(f)?,
            "invariants": {"rank": row[0], "signature": row[1], "parity": row[2], "det_class": row[3], "witt_class": row[4]},
            "steps": n.log.len(),
        }),
    )
}

fn qcat(o: &FormOpts, components: bool, jobs: usize, out: Option<&Path>, dot: Option<&Path>) -> Outcome {
    let param = param_of(o)?;
    let (q, rep) = build_hermitian_q(&param, o.cap, jobs)?;
    println!(
        "Q({}, {}, cap {}): {} objects, {} morphisms, {} composable pairs, {} associativity triples checked",
        param.ring, param.flavor, o.cap, rep.objects, rep.arrows, rep.laws.composable_pairs, rep.laws.associativity_triples
    );
    let comps = q.components();
    if components {
        let coords = witt_coordinates(&q, &param, o.cap.max(2))?;
        println!("{} components", comps.len());
        let mut t = Table::new(&["component", "object", "witt-class"]);
        for (c, comp) in comps.iter().enumerate() {
            for &x in comp {
                t.row(vec![c.to_string(), q.objects()[x].label.clone(), report::coords(&coords[x])]);
            }
        }
        print!("{}", t.render());
    } else {
        let mut t = Table::new(&["source", "target", "morphisms"]);
        for ((x, y), n) in q.hom_sizes() {
            t.row(vec![q.objects()[x].label.clone(), q.objects()[y].label.clone(), n.to_string()]);
        }
        print!("{}", t.render());
    }
    if let Some(p) = dot {
        write(p, &q_to_dot(&q))?;
    }
    write_json(out, &q_to_json(&q)?)
}

fn check(input: &Path) -> Outcome {
    let text = read(input)?;
    let v: Value = json::parse(&text)?;
    let parse_err = |e: serde_json::Error| Error::Parse(e.to_string());
    let what = if v.get("gram").is_some() {
        let f = json::form_from_json(&serde_json::from_value(v).map_err(parse_err)?)?;
        format!("form of rank {} over {} ({})", f.rank(), f.ring(), f.param().label())
    } else if v.get("psi").is_some() {
        let x = json::quadratic_complex_from_json(&serde_json::from_value(v).map_err(parse_err)?)?;
        let poincare = if x.is_poincare() { "Poincare" } else { "not Poincare" };
        format!("quadratic complex of dimension {}, {poincare}", x.dimension())
    } else if v.get("differentials").is_some() {
        let c = json::complex_from_json(&serde_json::from_value(v).map_err(parse_err)?)?;
        format!("complex in degrees {}..={}", c.lo(), c.hi())
    } else if v.get("entries").is_some() {
        let m = json::matrix_from_json(&serde_json::from_value(v).map_err(parse_err)?)?;
        format!("{}x{} matrix over {}", m.rows(), m.cols(), m.ring())
    } else {
        return Err(Error::Parse("unrecognized document: expected a matrix, form or complex".into()).into());
    };
    println!("OK: {what}");
    Ok(())
}
