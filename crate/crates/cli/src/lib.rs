//! Command-line front-end for mubkit.

pub mod demo;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mubkit::finite_field::{FieldElement, FieldSpec, QuadraticExtension};
use mubkit::multiplier_lab::{
    appendix_b_multiplier, enumerate_weyl_multipliers, invariant_multipliers, is_weyl_multiplier, m_inv, torus_average,
    MultiplierError, MultiplierJson, MultiplierTable,
};
use mubkit::phase_space::{LinearMap2, PhaseSpace, PhaseVector, SymplecticForm};
use mubkit::quadrature::{centered_weyl_from_quadratures, quadratures_from_weyl, verify_quadrature_axioms, MubBundle};
use mubkit::symplectic_actions::{
    covariance_residual, maximal_nonsplit_torus, metaplectic_operator, ordinary_phase_fix, sl_enumerate,
    sl_extension_probe, torus_commutant, torus_orbits_on_directions, MetaplecticOp,
};
use mubkit::weyl_rep::{matrix_to_json, weyl_system_from_multiplier, DEFAULT_SEED, TOL_IDENTITY};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "mub", version, about = "Covariant mutually unbiased bases over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Field as `p` or `p^r`.
    #[arg(long, global = true, default_value = "2")]
    pub field: String,
    /// Modulus coefficients, constant term first, e.g. `1,1,0,1`.
    #[arg(long, global = true)]
    pub poly: Option<String>,
    /// Symplectic scale λ as a field element index.
    #[arg(long, global = true, default_value_t = 1)]
    pub lambda: usize,
    /// `inv`, `appendix-b`, `t-invariant`, an enumeration index, or a JSON file.
    #[arg(long, global = true)]
    pub multiplier: Option<String>,
    /// Origin as two field element indices `x,y`.
    #[arg(long, global = true, default_value = "0,0")]
    pub origin: String,
    /// Output file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance for matrix identities.
    #[arg(long, global = true, default_value_t = TOL_IDENTITY)]
    pub tol: f64,
    /// Seed for randomized fallbacks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Indented JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Field tables and derived data.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Weyl multipliers.
    Multipliers {
        #[command(subcommand)]
        action: MultiplierAction,
    },
    /// Quadrature system bundles.
    Mub {
        #[command(subcommand)]
        action: MubAction,
    },
    /// Multiplier and equivalence-class counts.
    Classify,
    /// The maximal nonsplit torus and its orbits on directions.
    Torus,
    /// Metaplectic operators on the maximal nonsplit torus.
    Metaplectic,
    /// Cocycle defects of an SL(V) family of covariance operators.
    ProbeSl,
    /// Worked examples.
    Demo {
        #[command(subcommand)]
        which: DemoAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum FieldAction {
    Info,
}

#[derive(Subcommand, Debug)]
pub enum MultiplierAction {
    Enumerate,
    Show,
}

#[derive(Subcommand, Debug)]
pub enum MubAction {
    Generate,
    Verify {
        /// Bundle file to check.
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoAction {
    Qubit,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("construction failed: {0}")]
    Construction(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Construction(_) => 3,
        }
    }
}

/// A finished command: the report and whether every check passed.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, passed: true }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            4
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn construction<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Construction(e.to_string())
}

pub fn to_json_string(v: &impl Serialize, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(v).expect("serializable")
    } else {
        serde_json::to_string(v).expect("serializable")
    }
}

fn complex_json(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

struct Setup {
    space: PhaseSpace,
    form: SymplecticForm,
}

fn setup(opts: &Opts) -> Result<Setup, CliError> {
    let field = FieldSpec::parse(&opts.field, opts.poly.as_deref()).map_err(config)?;
    let lambda = field.from_index(opts.lambda).map_err(config)?;
    let form = SymplecticForm::new(lambda).map_err(config)?;
    Ok(Setup { space: PhaseSpace::new(&field), form })
}

fn parse_origin(space: &PhaseSpace, s: &str) -> Result<PhaseVector, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!("origin must be `x,y`, got `{s}`")));
    }
    let f = space.field();
    let coord = |t: &str| -> Result<FieldElement, CliError> {
        let i: usize = t.parse().map_err(|_| CliError::Config(format!("bad origin coordinate `{t}`")))?;
        f.from_index(i).map_err(config)
    };
    Ok(PhaseVector::new(coord(parts[0])?, coord(parts[1])?))
}

fn multiplier_error(e: MultiplierError) -> CliError {
    match e {
        MultiplierError::EvenCharacteristic
        | MultiplierError::OddCharacteristic
        | MultiplierError::BadTable(_)
        | MultiplierError::SpaceMismatch
        | MultiplierError::Field(_) => config(e),
        _ => construction(e),
    }
}

fn default_selector(space: &PhaseSpace) -> &'static str {
    if space.field().characteristic() == 2 {
        "appendix-b"
    } else {
        "inv"
    }
}

fn select_multiplier(st: &Setup, selector: &str) -> Result<MultiplierTable, CliError> {
    let (space, form) = (&st.space, &st.form);
    let m = match selector {
        "inv" => m_inv(space, form).map_err(multiplier_error)?,
        "appendix-b" => appendix_b_multiplier(space, form).map_err(multiplier_error)?,
        "t-invariant" => {
            if space.field().characteristic() == 2 {
                let t = maximal_nonsplit_torus(space);
                let base = appendix_b_multiplier(space, form).map_err(multiplier_error)?;
                torus_average(&base, &t.elements).map_err(multiplier_error)?
            } else {
                m_inv(space, form).map_err(multiplier_error)?
            }
        }
        other => {
            if let Ok(k) = other.parse::<usize>() {
                let all = enumerate_weyl_multipliers(space, form).map_err(multiplier_error)?;
                let n = all.len();
                all.into_iter().nth(k).ok_or_else(|| CliError::Config(format!("index {k} out of range 0..{n}")))?
            } else {
                let text = std::fs::read_to_string(other)
                    .map_err(|e| CliError::Config(format!("multiplier `{other}`: {e}")))?;
                let j: MultiplierJson = serde_json::from_str(&text).map_err(config)?;
                let m = MultiplierTable::from_json_on(space, &j).map_err(multiplier_error)?;
                match is_weyl_multiplier(&m, form) {
                    Ok(true) => m,
                    _ => return Err(CliError::Config(format!("`{other}` is not a Weyl multiplier for λ"))),
                }
            }
        }
    };
    Ok(m)
}

fn selector<'a>(opts: &'a Opts, space: &PhaseSpace) -> &'a str {
    opts.multiplier.as_deref().unwrap_or(default_selector(space))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Construction(format!("{}: {e}", path.display())))
}

fn map_json(space: &PhaseSpace, a: &LinearMap2) -> Value {
    json!(a.to_coeffs(space.field()))
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Field { action: FieldAction::Info } => field_info(opts),
        Command::Multipliers { action } => match action {
            MultiplierAction::Enumerate => multipliers_enumerate(opts),
            MultiplierAction::Show => multipliers_show(opts),
        },
        Command::Mub { action } => match action {
            MubAction::Generate => mub_generate(opts),
            MubAction::Verify { file } => mub_verify(opts, file),
        },
        Command::Classify => classify(opts),
        Command::Torus => torus(opts),
        Command::Metaplectic => metaplectic(opts),
        Command::ProbeSl => probe_sl(opts),
        Command::Demo { which: DemoAction::Qubit } => Ok(demo::qubit_report(opts.seed)),
    }
}

fn field_info(opts: &Opts) -> Result<Outcome, CliError> {
    let f = FieldSpec::parse(&opts.field, opts.poly.as_deref()).map_err(config)?;
    let ext = QuadraticExtension::new(&f);
    let (c0, c1) = ext.defining_coeffs();
    let z0 = ext.norm_one_generator();
    let mut report = json!({
        "version": VERSION,
        "field": f.descriptor(),
        "order": f.order(),
        "generator": f.coeffs(f.generator()),
        "trace": f.elements().map(|a| f.trace(a)).collect::<Vec<_>>(),
        "quadratic_extension": { "c0": f.coeffs(c0), "c1": f.coeffs(c1) },
        "norm_one_generator": [f.coeffs(z0.a), f.coeffs(z0.b)],
    });
    if f.characteristic() == 2 {
        let basis = f.self_dual_basis(f.one()).map_err(construction)?;
        report["self_dual_basis"] = json!(basis.iter().map(|&e| f.coeffs(e)).collect::<Vec<_>>());
    }
    Ok(Outcome::ok(report))
}

fn multipliers_enumerate(opts: &Opts) -> Result<Outcome, CliError> {
    let st = setup(opts)?;
    let all = enumerate_weyl_multipliers(&st.space, &st.form).map_err(multiplier_error)?;
    let tables: Vec<MultiplierJson> = all.iter().map(MultiplierTable::to_json).collect();
    let report = json!({
        "version": VERSION,
        "field": st.space.field().descriptor(),
        "lambda": opts.lambda,
        "count": tables.len(),
        "multipliers": tables,
    });
    if let Some(path) = &opts.out {
        write_file(path, &to_json_string(&report, opts.pretty))?;
        return Ok(Outcome::ok(json!({ "version": VERSION, "count": all.len(), "written": path })));
    }
    Ok(Outcome::ok(report))
}

fn multipliers_show(opts: &Opts) -> Result<Outcome, CliError> {
    let st = setup(opts)?;
    let sel = selector(opts, &st.space);
    let m = select_multiplier(&st, sel)?;
    let weyl = matches!(is_weyl_multiplier(&m, &st.form), Ok(true));
    Ok(Outcome {
        report: json!({
            "version": VERSION,
            "selector": sel,
            "lambda": opts.lambda,
            "weyl": weyl,
            "multiplier": m.to_json(),
        }),
        passed: weyl,
    })
}

/// Bundle file: the quadrature data plus reproducibility metadata.
#[derive(Serialize, Deserialize)]
pub struct BundleFile {
    pub version: String,
    pub seed: u64,
    #[serde(flatten)]
    pub bundle: MubBundle,
}

fn mub_generate(opts: &Opts) -> Result<Outcome, CliError> {
    let st = setup(opts)?;
    let o = parse_origin(&st.space, &opts.origin)?;
    let sel = selector(opts, &st.space);
    let m = select_multiplier(&st, sel)?;
    let w = weyl_system_from_multiplier(&m).map_err(construction)?;
    let qs = quadratures_from_weyl(&w, o).map_err(construction)?;
    let axioms = verify_quadrature_axioms(&qs, opts.tol);
    let file = BundleFile {
        version: VERSION.to_string(),
        seed: opts.seed,
        bundle: MubBundle::from_system(&qs, &st.form, &m, o),
    };
    let mut report = json!({
        "version": VERSION,
        "seed": opts.seed,
        "selector": sel,
        "lines": st.space.num_lines(),
        "axioms": axioms,
    });
    match &opts.out {
        Some(path) => {
            write_file(path, &to_json_string(&file, opts.pretty))?;
            report["written"] = json!(path);
        }
        None => report["bundle"] = serde_json::to_value(&file).expect("serializable"),
    }
    Ok(Outcome { report, passed: axioms.all_passed() })
}

fn mub_verify(opts: &Opts, path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let file: BundleFile = serde_json::from_str(&text).map_err(config)?;
    let (qs, form, m, o) = file.bundle.to_system().map_err(config)?;
    let axioms = verify_quadrature_axioms(&qs, opts.tol);
    let weyl = matches!(is_weyl_multiplier(&m, &form), Ok(true));
    let centered = centered_weyl_from_quadratures(&qs, o, &form);
    let covariant = centered.as_ref().map(|w| w.multiplier() == &m).unwrap_or(false);
    let passed = axioms.all_passed() && weyl && covariant;
    Ok(Outcome {
        report: json!({
            "version": VERSION,
            "file": path,
            "axioms": axioms,
            "declared_multiplier_is_weyl": weyl,
            "covariant_with_declared_multiplier": covariant,
            "passed": passed,
        }),
        passed,
    })
}

fn classify(opts: &Opts) -> Result<Outcome, CliError> {
    let field = FieldSpec::parse(&opts.field, opts.poly.as_deref()).map_err(config)?;
    let space = PhaseSpace::new(&field);
    let q = space.q();
    if q > 5 {
        return Err(CliError::Construction(format!("classification needs q <= 5, got {q}")));
    }
    let sl = sl_enumerate(&space).map_err(construction)?;
    let torus = maximal_nonsplit_torus(&space);
    let mut forms = Vec::new();
    let mut total = 0usize;
    for form in SymplecticForm::all(&field) {
        let all = enumerate_weyl_multipliers(&space, &form).map_err(multiplier_error)?;
        let sl_inv = invariant_multipliers(&space, &form, &sl).map_err(multiplier_error)?.len();
        let t_inv = invariant_multipliers(&space, &form, &torus.elements).map_err(multiplier_error)?.len();
        total += all.len();
        forms.push(json!({
            "lambda": form.lambda().index(),
            "count": all.len(),
            "sl_invariant": sl_inv,
            "t_invariant": t_inv,
        }));
    }
    Ok(Outcome::ok(json!({
        "version": VERSION,
        "field": field.descriptor(),
        "per_form": forms[0]["count"],
        "sl_invariant": forms[0]["sl_invariant"],
        "t_invariant": forms[0]["t_invariant"],
        "total": total,
        "forms": forms,
    })))
}

fn torus(opts: &Opts) -> Result<Outcome, CliError> {
    let field = FieldSpec::parse(&opts.field, opts.poly.as_deref()).map_err(config)?;
    let space = PhaseSpace::new(&field);
    let t = maximal_nonsplit_torus(&space);
    let orbits = torus_orbits_on_directions(&space, &t);
    let mut report = json!({
        "version": VERSION,
        "field": field.descriptor(),
        "generator": map_json(&space, &t.generator),
        "order": t.order(),
        "orbits": orbits,
        "elements": t.elements.iter().map(|a| map_json(&space, a)).collect::<Vec<_>>(),
    });
    let mut passed = t.order() == space.q() + 1;
    if space.q() <= 5 {
        let mut comm = torus_commutant(&space, &t).map_err(construction)?;
        let mut elems = t.elements.clone();
        comm.sort_by_key(|a| a.to_coeffs(&field));
        elems.sort_by_key(|a| a.to_coeffs(&field));
        report["commutant_is_torus"] = json!(comm == elems);
        passed &= comm == elems;
    }
    Ok(Outcome { report, passed })
}

fn metaplectic(opts: &Opts) -> Result<Outcome, CliError> {
    let st = setup(opts)?;
    let sel = opts.multiplier.as_deref().unwrap_or("t-invariant");
    let m = select_multiplier(&st, sel)?;
    let w = weyl_system_from_multiplier(&m).map_err(construction)?;
    let t = maximal_nonsplit_torus(&st.space);
    let raw: Vec<MetaplecticOp> =
        t.elements[1..].iter().map(|a| metaplectic_operator(a, &w)).collect::<Result<_, _>>().map_err(construction)?;
    let rep = ordinary_phase_fix(&t, &raw).map_err(construction)?;
    let qs = quadratures_from_weyl(&w, PhaseVector::ZERO).map_err(construction)?;
    let family: Vec<(LinearMap2, _)> = t.elements.iter().cloned().zip(rep.ops.iter().cloned()).collect();
    let hom = rep.homomorphism_residual();
    let cov = covariance_residual(&qs, &family);
    let passed = hom <= opts.tol && cov <= opts.tol;
    let n = t.order() as u32;
    Ok(Outcome {
        report: json!({
            "version": VERSION,
            "seed": opts.seed,
            "selector": sel,
            "order": t.order(),
            "raw_power": complex_json(rep.raw_power),
            "c": complex_json(rep.phase),
            "c_power": complex_json(rep.phase.powu(n)),
            "operators": t.elements.iter().zip(&rep.ops).map(|(a, u)| json!({
                "A": map_json(&st.space, a),
                "matrix": matrix_to_json(u),
            })).collect::<Vec<_>>(),
            "raw": raw.iter().map(|op| json!({
                "A": map_json(&st.space, &op.map),
                "matrix": matrix_to_json(&op.matrix),
                "c": complex_json(op.phase),
            })).collect::<Vec<_>>(),
            "homomorphism_residual": hom,
            "covariance_residual": cov,
        }),
        passed,
    })
}

fn probe_sl(opts: &Opts) -> Result<Outcome, CliError> {
    let st = setup(opts)?;
    let sel = selector(opts, &st.space);
    let m = select_multiplier(&st, sel)?;
    let w = weyl_system_from_multiplier(&m).map_err(construction)?;
    let probe = sl_extension_probe(&w, opts.seed).map_err(construction)?;
    let mut report = json!({
        "version": VERSION,
        "seed": opts.seed,
        "selector": sel,
        "defective_pair_count": probe.defective_pairs.len(),
        "probe": probe,
    });
    let mut passed = true;
    if st.space.q() == 2 {
        let (checks, _) = demo::qubit_checks();
        let flip: Vec<_> = checks.iter().filter(|c| c.name.starts_with("U(F)")).collect();
        passed = flip.iter().all(|c| c.passed);
        report["flip_relations"] = json!(flip);
    }
    Ok(Outcome { report, passed })
}
