use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use motivic_steenrod::chern::{chern_action, thom_action, ChernPoly};
use motivic_steenrod::milnor::milnor_basis_name;
use motivic_steenrod::{
    parse, verify_adem, Action, BmuClass, BmuRing, DualAlgebra, DualElement, DualTensor, Duality,
    Error, Expr, MilnorElement, MotCoeff, Prime, SteenrodAlgebra, SteenrodElement, SteenrodTensor,
    TotalPowerExpansion,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "msteen",
    version,
    about = "Motivic Steenrod algebra calculator"
)]
struct Cli {
    #[arg(long, global = true, default_value_t = 2)]
    prime: u32,
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Admissible form of an operation
    Normalize { expr: String },
    /// Product of two operations
    Multiply { x: String, y: String },
    /// Coproduct of an operation
    Coproduct { expr: String },
    /// Product in the dual algebra
    DualMul { x: String, y: String },
    /// Coproduct in the dual algebra
    DualCoproduct { expr: String },
    /// Pairing of an operation with a dual element
    Pair { op: String, dual: String },
    /// Milnor basis expansion of an operation
    ToMilnor { expr: String },
    /// Admissible expansion of Milnor basis elements
    ToAdmissible { expr: String },
    /// Action of an operation on a class of a product of B mu_l
    Act {
        op: String,
        class: String,
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long)]
        truncation: Option<u32>,
    },
    /// Total power expansion of a class of bidegree (2r, r)
    TotalPower {
        class: String,
        r: Option<u32>,
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long)]
        truncation: Option<u32>,
    },
    /// P^(r) on the Chern class c_i of bundles of rank at most d
    Chern { milnor: String, i: usize, d: usize },
    /// Multiplier of the Thom class under P^(r) for rank at most d
    Thom { milnor: String, d: usize },
    /// Cross-check the Adem relations
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Classical image under t = 1, r = 0
    Specialize { expr: String },
}

#[derive(Subcommand)]
enum VerifyWhat {
    Adem {
        #[arg(long, default_value_t = 100)]
        max: u32,
        #[arg(long, default_value_t = 6)]
        module_cutoff: u64,
    },
}

/// Rendered text plus the machine form.
struct Output {
    text: String,
    json: Value,
}

fn coeff_json(c: &MotCoeff) -> Vec<Value> {
    c.terms()
        .iter()
        .map(|t| json!({"scalar": t.scalar, "t": t.t, "r": t.r}))
        .collect()
}

fn terms_json<'a>(
    prime: Prime,
    basis: &str,
    terms: impl IntoIterator<Item = (String, &'a MotCoeff)>,
) -> Value {
    let mut out = Vec::new();
    for (m, c) in terms {
        for coeff in coeff_json(c) {
            out.push(json!({"monomial": m, "coeff": coeff}));
        }
    }
    json!({"prime": prime.value(), "basis": basis, "terms": out})
}

fn steenrod_out(e: &SteenrodElement) -> Output {
    let p = e.prime();
    let json = terms_json(
        p,
        "admissible",
        e.sorted_terms()
            .into_iter()
            .map(|(m, c)| (m.display(p).to_string(), c)),
    );
    Output {
        text: e.to_string(),
        json,
    }
}

fn steenrod_tensor_out(x: &SteenrodTensor) -> Output {
    let p = x.prime();
    let json = terms_json(
        p,
        "admissible",
        x.terms()
            .iter()
            .map(|((a, b), c)| (format!("{} ⊗ {}", a.display(p), b.display(p)), c)),
    );
    Output {
        text: x.to_string(),
        json,
    }
}

fn milnor_out(x: &MilnorElement) -> Output {
    let json = terms_json(
        x.prime(),
        "milnor",
        x.terms().iter().map(|(m, c)| (milnor_basis_name(m), c)),
    );
    Output {
        text: x.to_string(),
        json,
    }
}

fn dual_out(x: &DualElement) -> Output {
    let json = terms_json(
        x.prime(),
        "dual",
        x.terms().iter().map(|(m, c)| (m.to_string(), c)),
    );
    Output {
        text: x.to_string(),
        json,
    }
}

fn dual_tensor_out(x: &DualTensor) -> Output {
    let json = terms_json(
        x.prime(),
        "dual",
        x.terms()
            .iter()
            .map(|((a, b), c)| (format!("{a} ⊗ {b}"), c)),
    );
    Output {
        text: x.to_string(),
        json,
    }
}

fn class_out(x: &BmuClass) -> Output {
    let p = x.ring().prime();
    let json = terms_json(
        p,
        "class",
        x.terms().iter().map(|(m, c)| (m.to_string(), c)),
    );
    Output {
        text: x.to_string(),
        json,
    }
}

fn total_power_out(p: Prime, x: &TotalPowerExpansion) -> Output {
    let mut named: Vec<(String, &MotCoeff)> = Vec::new();
    for (&(j, c), class) in x.terms() {
        let mut sym = Vec::new();
        if c {
            sym.push("c".to_string());
        }
        if j > 0 {
            sym.push(format!("d^{j}"));
        }
        for (m, k) in class.terms() {
            let mut name = if m.is_one() && !sym.is_empty() {
                vec![]
            } else {
                vec![m.to_string()]
            };
            name.extend(sym.iter().cloned());
            named.push((name.join(" "), k));
        }
    }
    Output {
        text: x.to_string(),
        json: terms_json(p, "class", named),
    }
}

fn chern_out(x: &ChernPoly) -> Output {
    let terms: Vec<Value> = x
        .exponent_maps()
        .into_iter()
        .zip(x.sorted_terms())
        .map(|((exps, c), (e, _))| {
            json!({
                "monomial": motivic_steenrod::chern::monomial_name(&e),
                "exponents": exps,
                "coeff": {"scalar": c, "t": 0, "r": 0},
            })
        })
        .collect();
    let json =
        json!({"prime": x.prime().value(), "basis": "chern", "rank": x.rank(), "terms": terms});
    Output {
        text: x.to_string(),
        json,
    }
}

fn parse_expr(text: &str, p: Prime) -> anyhow::Result<Expr> {
    let e = parse(text, p)
        .map_err(|err| anyhow!(err))
        .with_context(|| format!("in `{text}`"))?;
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    Ok(e)
}

fn ring_for(
    p: Prime,
    class: &Expr,
    op_weight: u64,
    arity: Option<usize>,
    truncation: Option<u32>,
) -> anyhow::Result<BmuRing> {
    let (a, degree) = class.class_extent();
    let arity = arity.unwrap_or(a.max(1));
    let truncation = truncation.unwrap_or(degree + op_weight as u32 + 2);
    Ok(BmuRing::new(p, arity, truncation)?)
}

fn threads() -> anyhow::Result<Option<usize>> {
    match std::env::var("MSTEEN_THREADS") {
        Ok(s) => Ok(Some(
            s.trim()
                .parse()
                .context("MSTEEN_THREADS must be a positive integer")?,
        )),
        Err(_) => Ok(None),
    }
}

enum Outcome {
    Done(Output),
    Counterexample(Output),
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let p = Prime::new(cli.prime)?;
    let alg = SteenrodAlgebra::new(p);
    let duality = Duality::new(p);
    let dual = DualAlgebra::new(p);
    let op = |s: &str| -> anyhow::Result<SteenrodElement> {
        Ok(parse_expr(s, p)?.steenrod(&alg, &duality)?)
    };
    let out = match &cli.command {
        Command::Normalize { expr } => steenrod_out(&op(expr)?),
        Command::Multiply { x, y } => steenrod_out(&alg.multiply(&op(x)?, &op(y)?)?),
        Command::Coproduct { expr } => steenrod_tensor_out(&alg.coproduct(&op(expr)?)?),
        Command::DualMul { x, y } => {
            let (x, y) = (
                parse_expr(x, p)?.dual(&dual)?,
                parse_expr(y, p)?.dual(&dual)?,
            );
            dual_out(&dual.mul(&x, &y)?)
        }
        Command::DualCoproduct { expr } => {
            dual_tensor_out(&dual.coproduct(&parse_expr(expr, p)?.dual(&dual)?)?)
        }
        Command::Pair { op: f, dual: w } => {
            let c = duality.pair_element(&op(f)?, &parse_expr(w, p)?.dual(&dual)?)?;
            let json = terms_json(p, "coefficient", [("1".to_string(), &c)]);
            Output {
                text: c.to_string(),
                json,
            }
        }
        Command::ToMilnor { expr } => milnor_out(&duality.admissible_to_milnor(&op(expr)?)?),
        Command::ToAdmissible { expr } => steenrod_out(&op(expr)?),
        Command::Act {
            op: f,
            class,
            arity,
            truncation,
        } => {
            let f_expr = parse_expr(f, p)?;
            let c_expr = parse_expr(class, p)?;
            let ring = ring_for(p, &c_expr, f_expr.operation_weight(), *arity, *truncation)?;
            let x = c_expr.class(ring)?;
            let f = f_expr.steenrod(&alg, &duality)?;
            class_out(&Action::new(ring).act(&f, &x)?)
        }
        Command::TotalPower {
            class,
            r,
            arity,
            truncation,
        } => {
            let c_expr = parse_expr(class, p)?;
            let (_, degree) = c_expr.class_extent();
            let ring = ring_for(
                p,
                &c_expr,
                (p.value() as u64) * degree as u64,
                *arity,
                *truncation,
            )?;
            let x = c_expr.class(ring)?;
            let r = match r {
                Some(r) => *r,
                None => match x.bidegree() {
                    Some(b) if b.degree == 2 * b.weight && b.weight >= 0 => b.weight as u32,
                    _ => bail!("class must be homogeneous of bidegree (2r, r)"),
                },
            };
            total_power_out(p, &Action::new(ring).total_power(&x, r)?)
        }
        Command::Chern { milnor, i, d } => {
            let r = parse_expr(milnor, p)?.r_sequence()?;
            chern_out(&chern_action(&r, *i, *d, p))
        }
        Command::Thom { milnor, d } => {
            let r = parse_expr(milnor, p)?.r_sequence()?;
            chern_out(&thom_action(&r, *d, p))
        }
        Command::Verify {
            what: VerifyWhat::Adem { max, module_cutoff },
        } => {
            let report = verify_adem(p, *max, *module_cutoff, threads()?)?;
            let module = report.checks.iter().filter(|c| c.module.is_some()).count();
            let text = if report.success() {
                format!(
                    "ok: {} inadmissible pairs with a + b <= {} at l = {} ({} through the module action) in {} ms",
                    report.checks.len(),
                    max,
                    p,
                    module,
                    report.millis
                )
            } else {
                format!(
                    "FAILED: {} counterexamples: {}",
                    report.counterexamples.len(),
                    report.counterexamples.join(", ")
                )
            };
            let out = Output {
                text,
                json: serde_json::to_value(&report)?,
            };
            return Ok(if report.success() {
                Outcome::Done(out)
            } else {
                Outcome::Counterexample(out)
            });
        }
        Command::Specialize { expr } => {
            let c = op(expr)?.specialize_classical();
            let terms: Vec<Value> = c
                .terms
                .iter()
                .map(|(m, &k)| json!({"monomial": m.display(p).to_string(), "coeff": {"scalar": k, "t": 0, "r": 0}}))
                .collect();
            Output {
                text: c.to_string(),
                json: json!({"prime": p.value(), "basis": "classical", "terms": terms}),
            }
        }
    };
    Ok(Outcome::Done(out))
}

fn print(cli: &Cli, out: &Output) {
    if cli.json {
        println!("{}", out.json);
    } else {
        println!("{}", out.text);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done(out)) => {
            print(&cli, &out);
            ExitCode::SUCCESS
        }
        Ok(Outcome::Counterexample(out)) => {
            print(&cli, &out);
            ExitCode::from(1)
        }
        Err(err) => {
            if cli.json {
                let pos = match err.downcast_ref::<Error>() {
                    Some(Error::Parse { pos, .. }) => json!(pos),
                    _ => Value::Null,
                };
                eprintln!("{}", json!({"error": format!("{err:#}"), "position": pos}));
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(2)
        }
    }
}
