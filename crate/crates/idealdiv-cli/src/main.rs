//! Command-line front end for the division toolkit.
//!
//! Every subcommand maps to exactly one library operation.  Exit codes are
//! stable: 0 for feasible/true, 2 for infeasible/false, 1 for any usage or
//! input error.  Generators are separated by ';' so that '+' never fights
//! the shell; `--target -` reads the target polynomial from stdin.

use std::collections::BTreeMap;
use std::error::Error;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use idealdiv::kernel::{bergman_reproduce, fs_quadrature, hefer_decompose, kernel_divide};
use idealdiv::membership::{
    bezout, degree_threshold, divide, koszul_divide, macaulay_budget, power_divide,
    CertificateFile, DivideOutcome, DivisionCertificate, GeneratorSystem, KoszulOutcome,
    KoszulTuple, PowerDivideOutcome, Threshold,
};
use idealdiv::poly::{monomial_string, HomogeneousSection, Monomial, Polynomial};
use idealdiv::residue::{annihilates, annihilates_projective, MonomialCI};

const FEASIBLE: u8 = 0;
const ERROR: u8 = 1;
const INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "idealdiv", version, about = "Degree-bounded polynomial ideal division")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide Φ ∈ (F) under deg(F_j·Q_j) ≤ r and print the certificate.
    Divide(DivideArgs),
    /// Decide 1 ∈ (F) under the budget r, or the classical automatic one.
    Bezout(BezoutArgs),
    /// Search the smallest power ν with Φ^ν divisible at budget r(ν).
    PowerDivide(PowerDivideArgs),
    /// Divide a tuple of level ell against the alternating contraction.
    Koszul(KoszulArgs),
    /// Test whether the target annihilates the residue current of
    /// coordinate-power generators.
    ResidueAnnihilates(ResidueArgs),
    /// Print the decomposition F(ζ) − F(z) = Σ h_k·(ζ_k − z_k).
    Hefer(HeferArgs),
    /// Evaluate the degree-r reproducing integral of the target at a point.
    Bergman(BergmanArgs),
    /// Recover cofactors numerically from the explicit integral formula.
    KernelDivide(KernelDivideArgs),
    /// Print the degree threshold granted by the generator degrees.
    Threshold(ThresholdArgs),
    /// Re-check a certificate file from scratch.
    Verify(VerifyArgs),
}

/// The flags that name a generator system.
#[derive(Args)]
struct SystemArgs {
    /// Number of affine variables z1..zN.
    #[arg(long)]
    n: usize,
    /// Generator polynomials separated by ';'.
    #[arg(long)]
    gens: String,
    /// Declared degrees d1,d2,…; defaults to the actual degrees.
    #[arg(long)]
    degrees: Option<String>,
}

impl SystemArgs {
    fn build(&self) -> Result<GeneratorSystem, Box<dyn Error>> {
        let polys = parse_list(&self.gens, self.n)?;
        let system = match &self.degrees {
            Some(text) => GeneratorSystem::new(self.n, polys, parse_usizes(text)?)?,
            None => GeneratorSystem::with_actual_degrees(self.n, polys)?,
        };
        Ok(system)
    }
}

#[derive(Args)]
struct DivideArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Target polynomial Φ, or '-' for stdin.
    #[arg(long)]
    target: String,
    /// Degree budget for every product F_j·Q_j.
    #[arg(long)]
    r: usize,
    /// Emit the certificate as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BezoutArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Degree budget, or 'auto' for the classical value Σd_j − n.
    #[arg(long)]
    r: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PowerDivideArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    target: String,
    /// Largest power of the target to try.
    #[arg(long)]
    nu_max: u32,
    /// Budget per power, e.g. 'linear:3' for r(ν) = 3ν.
    #[arg(long)]
    budget_rule: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KoszulArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Level of the input tuple.
    #[arg(long)]
    ell: usize,
    /// Shared degree budget of the tuple.
    #[arg(long)]
    r: usize,
    /// JSON file listing {indices, poly} components.
    #[arg(long)]
    components: String,
}

#[derive(Args)]
struct ResidueArgs {
    /// Dimension n (affine variables, or projective dimension).
    #[arg(long)]
    n: usize,
    /// Coordinate powers separated by ';', e.g. "z1^2;z2^3".
    #[arg(long)]
    gens: String,
    /// Test polynomial, or '-' for stdin.
    #[arg(long)]
    target: String,
    /// Work in homogeneous coordinates z0..zn.
    #[arg(long)]
    projective: bool,
    /// Extra factors of z0 granted to the section before the test.
    #[arg(long, default_value_t = 0)]
    z0_power: usize,
}

#[derive(Args)]
struct HeferArgs {
    /// The polynomial to decompose.
    #[arg(long)]
    gen: String,
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct BergmanArgs {
    /// Target polynomial; the point dimension fixes the variable count.
    #[arg(long)]
    target: String,
    /// Reproduction degree; must cover the target degree.
    #[arg(long)]
    r: usize,
    /// Evaluation point "re,im" per variable, variables separated by ';'.
    #[arg(long)]
    at: String,
    /// Nodes per axis direction.
    #[arg(long)]
    resolution: usize,
}

#[derive(Args)]
struct KernelDivideArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    target: String,
    /// Degree budget fed to the kernel; must cover the target degree.
    #[arg(long)]
    r: usize,
    #[arg(long)]
    resolution: usize,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Declared generator degrees d1,d2,…
    #[arg(long)]
    degrees: String,
    #[arg(long)]
    n: usize,
    /// Tuple level; 0 is plain division.
    #[arg(long, default_value_t = 0)]
    ell: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate JSON file, or '-' for stdin.
    #[arg(long)]
    certificate: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { ERROR } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(ERROR)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Box<dyn Error>> {
    match command {
        Command::Divide(args) => divide_cmd(args),
        Command::Bezout(args) => bezout_cmd(args),
        Command::PowerDivide(args) => power_divide_cmd(args),
        Command::Koszul(args) => koszul_cmd(args),
        Command::ResidueAnnihilates(args) => residue_cmd(args),
        Command::Hefer(args) => hefer_cmd(args),
        Command::Bergman(args) => bergman_cmd(args),
        Command::KernelDivide(args) => kernel_divide_cmd(args),
        Command::Threshold(args) => threshold_cmd(args),
        Command::Verify(args) => verify_cmd(args),
    }
}

// ============================================================================
// Subcommands
// ============================================================================

fn divide_cmd(args: DivideArgs) -> Result<u8, Box<dyn Error>> {
    let g = args.system.build()?;
    let phi = Polynomial::parse(&read_inline(&args.target)?, g.n())?;
    match divide(&g, &phi, args.r)? {
        DivideOutcome::Certificate(cert) => {
            report_certificate(&g, &phi, &cert, args.json)?;
            Ok(FEASIBLE)
        }
        DivideOutcome::Infeasible { witness } => {
            report_infeasible(&witness);
            Ok(INFEASIBLE)
        }
    }
}

fn bezout_cmd(args: BezoutArgs) -> Result<u8, Box<dyn Error>> {
    let g = args.system.build()?;
    let r = match args.r.as_str() {
        "auto" => {
            let r = macaulay_budget(&g)?;
            println!("auto r = {r}");
            r
        }
        text => text.parse::<usize>().map_err(|_| "budget must be a number or 'auto'")?,
    };
    let one = Polynomial::one(g.n());
    match bezout(&g, r)? {
        DivideOutcome::Certificate(cert) => {
            report_certificate(&g, &one, &cert, args.json)?;
            Ok(FEASIBLE)
        }
        DivideOutcome::Infeasible { witness } => {
            report_infeasible(&witness);
            Ok(INFEASIBLE)
        }
    }
}

fn power_divide_cmd(args: PowerDivideArgs) -> Result<u8, Box<dyn Error>> {
    let g = args.system.build()?;
    let phi = Polynomial::parse(&read_inline(&args.target)?, g.n())?;
    let slope = parse_budget_rule(&args.budget_rule)?;
    match power_divide(&g, &phi, args.nu_max, |nu| slope * nu as usize)? {
        PowerDivideOutcome::Found(cert) => {
            println!("nu = {}", cert.nu());
            report_certificate(&g, &phi, &cert, args.json)?;
            Ok(FEASIBLE)
        }
        PowerDivideOutcome::Infeasible { witness } => {
            report_infeasible(&witness);
            Ok(INFEASIBLE)
        }
    }
}

fn koszul_cmd(args: KoszulArgs) -> Result<u8, Box<dyn Error>> {
    let g = args.system.build()?;
    let text = std::fs::read_to_string(&args.components)?;
    let entries: Vec<ComponentEntry> = serde_json::from_str(&text)?;
    let mut components = BTreeMap::new();
    for entry in entries {
        components.insert(entry.indices, Polynomial::parse(&entry.poly, g.n())?);
    }
    let tuple = KoszulTuple::new(&g, args.ell, args.r, components)?;
    match koszul_divide(&g, &tuple)? {
        KoszulOutcome::Tuple(solution) => {
            println!("feasible (level = {}, r = {})", solution.ell(), solution.r());
            for (indices, poly) in solution.components() {
                println!("R{indices:?} = {poly}");
            }
            Ok(FEASIBLE)
        }
        KoszulOutcome::Infeasible { witness_indices, witness_monomial } => {
            println!(
                "infeasible (block {witness_indices:?}, witness monomial: {})",
                monomial_string(&witness_monomial)
            );
            Ok(INFEASIBLE)
        }
    }
}

fn residue_cmd(args: ResidueArgs) -> Result<u8, Box<dyn Error>> {
    let nvars = if args.projective { args.n + 1 } else { args.n };
    let parse = |text: &str| -> Result<Polynomial, Box<dyn Error>> {
        let poly = if args.projective {
            Polynomial::parse_projective(text, nvars)?
        } else {
            Polynomial::parse(text, nvars)?
        };
        Ok(poly)
    };
    let mut powers = Vec::new();
    for piece in split_list(&args.gens) {
        powers.push(coordinate_power(&parse(piece)?)?);
    }
    let ci = if args.projective {
        MonomialCI::projective(args.n, &powers)?
    } else {
        MonomialCI::affine(args.n, &powers)?
    };
    let target = parse(&read_inline(&args.target)?)?;
    let holds = if args.projective {
        let degree = target.degree();
        let section = HomogeneousSection::new(target, degree)?;
        annihilates_projective(&ci, &section, args.z0_power)
    } else {
        annihilates(&ci, &target)
    };
    if holds {
        println!("annihilates");
        Ok(FEASIBLE)
    } else {
        println!("does not annihilate");
        Ok(INFEASIBLE)
    }
}

fn hefer_cmd(args: HeferArgs) -> Result<u8, Box<dyn Error>> {
    let f = Polynomial::parse(&args.gen, args.n)?;
    let decomposition = hefer_decompose(&f);
    let name = |slot: usize| {
        if slot < args.n {
            format!("zeta{}", slot + 1)
        } else {
            format!("z{}", slot - args.n + 1)
        }
    };
    for k in 1..=args.n {
        println!("h{k} = {}", decomposition.form(k).format_with_names(&name));
    }
    Ok(FEASIBLE)
}

fn bergman_cmd(args: BergmanArgs) -> Result<u8, Box<dyn Error>> {
    let point = parse_point(&args.at)?;
    let n = point.len();
    let phi = Polynomial::parse(&read_inline(&args.target)?, n)?;
    let rule = fs_quadrature(n, args.resolution)?;
    let value = bergman_reproduce(&phi, args.r, &point, &rule)?;
    println!("value = {}", format_complex(value));
    Ok(FEASIBLE)
}

fn kernel_divide_cmd(args: KernelDivideArgs) -> Result<u8, Box<dyn Error>> {
    let g = args.system.build()?;
    let phi = Polynomial::parse(&read_inline(&args.target)?, g.n())?;
    let rule = fs_quadrature(g.n(), args.resolution)?;
    let division = kernel_divide(&g, &phi, args.r, &rule)?;
    println!("degree bound = {}", division.degree_bound());
    for (j, q) in division.cofactors().iter().enumerate() {
        println!("Q{} = {q}", j + 1);
    }
    for (j, residual) in division.fit_residuals().iter().enumerate() {
        println!("fit residual {} = {:.11e}", j + 1, residual);
    }
    Ok(FEASIBLE)
}

fn threshold_cmd(args: ThresholdArgs) -> Result<u8, Box<dyn Error>> {
    let degrees = parse_usizes(&args.degrees)?;
    match degree_threshold(&degrees, args.n, args.ell) {
        Threshold::AutoSatisfied => println!("auto-satisfied"),
        Threshold::MinimalR(r) => println!("minimal r = {r}"),
    }
    Ok(FEASIBLE)
}

fn verify_cmd(args: VerifyArgs) -> Result<u8, Box<dyn Error>> {
    let text = if args.certificate == "-" {
        read_stdin()?
    } else {
        std::fs::read_to_string(&args.certificate)?
    };
    let file: CertificateFile = serde_json::from_str(&text)?;
    if file.check()? {
        println!("certificate verifies");
        Ok(FEASIBLE)
    } else {
        println!("certificate rejected");
        Ok(INFEASIBLE)
    }
}

// ============================================================================
// Shared plumbing
// ============================================================================

#[derive(serde::Deserialize)]
struct ComponentEntry {
    indices: Vec<usize>,
    poly: String,
}

fn report_certificate(
    g: &GeneratorSystem,
    phi: &Polynomial,
    cert: &DivisionCertificate,
    json: bool,
) -> Result<(), Box<dyn Error>> {
    if json {
        let file = CertificateFile::from_certificate(g, phi, cert);
        println!("{}", serde_json::to_string_pretty(&file)?);
        return Ok(());
    }
    println!(
        "feasible (nu = {}, r = {}, max deg F*Q = {})",
        cert.nu(),
        cert.r(),
        cert.max_product_degree(g)
    );
    for (j, q) in cert.cofactors().iter().enumerate() {
        println!("Q{} = {q}", j + 1);
    }
    Ok(())
}

fn report_infeasible(witness: &Monomial) {
    println!("infeasible (witness monomial: {})", monomial_string(witness));
}

/// A single generator of a coordinate-power intersection: one term, one
/// variable.  The scalar in front never changes annihilation, so it is
/// accepted and dropped.
fn coordinate_power(poly: &Polynomial) -> Result<(usize, u32), Box<dyn Error>> {
    let terms: Vec<_> = poly.terms().collect();
    if terms.len() != 1 {
        return Err("residue generators must be single coordinate powers".into());
    }
    let exponents = terms[0].0.exponents();
    let mut found = None;
    for (slot, &e) in exponents.iter().enumerate() {
        if e > 0 {
            if found.is_some() {
                return Err("residue generators must involve a single variable".into());
            }
            found = Some((slot, e));
        }
    }
    found.ok_or_else(|| "residue generators must be nonconstant".into())
}

fn parse_budget_rule(text: &str) -> Result<usize, Box<dyn Error>> {
    match text.strip_prefix("linear:") {
        Some(slope) => Ok(slope.parse::<usize>()?),
        None => Err(format!("unknown budget rule '{text}', expected linear:<slope>").into()),
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(';').map(str::trim).filter(|piece| !piece.is_empty())
}

fn parse_list(text: &str, nvars: usize) -> Result<Vec<Polynomial>, Box<dyn Error>> {
    let mut out = Vec::new();
    for piece in split_list(text) {
        out.push(Polynomial::parse(piece, nvars)?);
    }
    Ok(out)
}

fn parse_usizes(text: &str) -> Result<Vec<usize>, Box<dyn Error>> {
    text.split(',')
        .map(|piece| piece.trim().parse::<usize>().map_err(Into::into))
        .collect()
}

fn parse_point(text: &str) -> Result<Vec<Complex64>, Box<dyn Error>> {
    let mut out = Vec::new();
    for piece in split_list(text) {
        let (re, im) = piece
            .split_once(',')
            .ok_or_else(|| format!("coordinate '{piece}' must look like re,im"))?;
        out.push(Complex64::new(re.trim().parse()?, im.trim().parse()?));
    }
    if out.is_empty() {
        return Err("the evaluation point needs at least one coordinate".into());
    }
    Ok(out)
}

/// Inline text, or stdin when the argument is '-'.
fn read_inline(text: &str) -> Result<String, Box<dyn Error>> {
    if text == "-" {
        read_stdin()
    } else {
        Ok(text.to_string())
    }
}

fn read_stdin() -> Result<String, Box<dyn Error>> {
    let mut buffer = String::new();
    std::io::stdin().read_to_string(&mut buffer)?;
    Ok(buffer)
}

/// Twelve significant digits, the stable numeric output width.
fn format_complex(value: Complex64) -> String {
    let sign = if value.im < 0.0 { '-' } else { '+' };
    format!("{:.11e} {sign} {:.11e}i", value.re, value.im.abs())
}
