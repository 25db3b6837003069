//! Batch command-line front end: parses inputs, dispatches to the
//! library, and emits machine-readable reports.
//!
//! Exit codes: 0 for a computed result (including UNDECIDED/UNKNOWN
//! statuses), 2 for input errors, 1 for internal faults.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opradius_core::defaults;
use opradius_core::error::Error as CoreError;
use opradius_core::groups::{self, GroupSpec};
use opradius_core::io;
use opradius_core::jointrad::{self, OperatorTuple};
use opradius_core::numrad;
use opradius_core::opsys::{self, ObstructionOutcome, UcpVerdict};
use opradius_core::psdfeas::{self, FeasibilityStatus};
use opradius_core::ranges::{self, Evidence};

use report::Report;

#[derive(Parser)]
#[command(name = "opradius", version, about = "Numerical radii, group-algebra truncations, and operator-system certificates", max_term_width = 100)]
struct Cli {
    /// Tolerance for enclosures and positivity checks.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    /// Seed for every randomized search; fixed seed means identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker thread budget (default: OPRADIUS_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Numerical radius of a square matrix with a certified enclosure.
    Radius(RadiusArgs),
    /// Joint numerical radius bounds for an operator tuple.
    Joint(JointArgs),
    /// Lower bound for the norm of the real part of a group-algebra
    /// element on a Cayley-ball truncation.
    GroupNorm(GroupNormArgs),
    /// Kesten-criterion contrast across a radius schedule.
    Amenability(AmenabilityArgs),
    /// UCP / k-positivity certification of a generator assignment.
    Ucp(UcpArgs),
    /// Matrix-range membership tests.
    Range(RangeArgs),
    /// Search for a certified refutation of k-min membership.
    Refute(RefuteArgs),
    /// Solve a PSD feasibility problem from a manifest.
    Feas(FeasArgs),
    /// Closed-form bound calculators.
    Bounds(BoundsArgs),
    /// Lifting-obstruction demonstration.
    Obstruction(ObstructionArgs),
}

#[derive(Args)]
struct RadiusArgs {
    /// Matrix file in the shared text format.
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Args)]
struct JointArgs {
    /// Tuple file: header `d p`, then d matrices.
    #[arg(long)]
    tuple: PathBuf,
    /// Also compute the level-k lower bound.
    #[arg(long)]
    k: Option<usize>,
    /// Random restarts for the unitary ascent.
    #[arg(long, default_value_t = 16)]
    budget: usize,
    /// Also run the tridiagonal-certificate upper-bound search.
    #[arg(long)]
    upper: bool,
}

#[derive(Args)]
struct GroupNormArgs {
    /// Group spec: free:n, abelian:d, cyclic:m.
    #[arg(long)]
    group: String,
    /// Comma-separated complex coefficients, one per generator.
    #[arg(long)]
    coeffs: String,
    /// Truncation radius.
    #[arg(long)]
    radius: usize,
}

#[derive(Args)]
struct AmenabilityArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    coeffs: String,
    /// Comma-separated radius schedule (overrides --radius).
    #[arg(long)]
    schedule: Option<String>,
    /// Largest radius; the schedule steps up to it.
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Args)]
struct UcpArgs {
    #[arg(long)]
    tuple: PathBuf,
    /// Also run the k-positivity check at this level.
    #[arg(long)]
    k: Option<usize>,
    /// Random restarts per level.
    #[arg(long, default_value_t = 16)]
    budget: usize,
}

#[derive(Args)]
struct RangeArgs {
    /// Which range: sn, un, kmax, or w (general, needs --target).
    #[arg(long)]
    set: String,
    #[arg(long)]
    tuple: PathBuf,
    /// Target tuple B for the general membership test.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    budget: usize,
}

#[derive(Args)]
struct RefuteArgs {
    #[arg(long)]
    tuple: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 32)]
    budget: usize,
}

#[derive(Args)]
struct FeasArgs {
    /// Problem manifest file.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
}

#[derive(Args)]
struct ObstructionArgs {
    /// Free-group spec (free:n) for the truncated-generator path.
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    radius: Option<usize>,
    /// Alternatively: a tuple file of unitaries.
    #[arg(long)]
    tuple: Option<PathBuf>,
    /// Iteration budget for the completion feasibility problems.
    #[arg(long, default_value_t = defaults::FEAS_MAX_ITER)]
    budget: usize,
}

enum CliError {
    Input(String),
    Internal(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Internal(msg) => CliError::Internal(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("OPRADIUS_THREADS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    match run(&cli, threads) {
        Ok(text) => match &cli.out {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write report to {}: {e}", path.display());
                    ExitCode::from(1)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn read_tuple(path: &PathBuf) -> Result<OperatorTuple, CliError> {
    Ok(io::parse_tuple(&read_file(path)?)?)
}

fn base_report(cli: &Cli, command: &str, threads: usize) -> Report {
    let mut r = Report::new(command);
    r.kv_f64("config.tol", cli.tol);
    r.kv("config.seed", cli.seed);
    r.kv("config.threads", threads);
    r.kv(
        "config.out",
        cli.out.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
    );
    r
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!("tolerance must be positive and finite, got {tol}")))
    }
}

fn run(cli: &Cli, threads: usize) -> Result<String, CliError> {
    check_tol(cli.tol)?;
    match &cli.command {
        Command::Radius(args) => cmd_radius(cli, args, threads),
        Command::Joint(args) => cmd_joint(cli, args, threads),
        Command::GroupNorm(args) => cmd_group_norm(cli, args, threads),
        Command::Amenability(args) => cmd_amenability(cli, args, threads),
        Command::Ucp(args) => cmd_ucp(cli, args, threads),
        Command::Range(args) => cmd_range(cli, args, threads),
        Command::Refute(args) => cmd_refute(cli, args, threads),
        Command::Feas(args) => cmd_feas(cli, args, threads),
        Command::Bounds(args) => cmd_bounds(cli, args, threads),
        Command::Obstruction(args) => cmd_obstruction(cli, args, threads),
    }
}

fn cmd_radius(cli: &Cli, args: &RadiusArgs, threads: usize) -> Result<String, CliError> {
    let m = io::parse_matrix(&read_file(&args.matrix)?)?;
    let est = numrad::numerical_radius(&m, cli.tol)?;
    let mut r = base_report(cli, "radius", threads);
    r.kv("arg.matrix", args.matrix.display());
    r.kv("matrix.rows", m.rows());
    r.kv("matrix.cols", m.cols());
    r.estimate("radius", "numrad.numerical_radius", cli.tol, &est);
    Ok(r.emit())
}

fn cmd_joint(cli: &Cli, args: &JointArgs, threads: usize) -> Result<String, CliError> {
    let t = read_tuple(&args.tuple)?;
    let mut r = base_report(cli, "joint", threads);
    r.kv("arg.tuple", args.tuple.display());
    r.kv("tuple.d", t.len());
    r.kv("tuple.p", t.dim());

    let w1 = jointrad::w1(&t, cli.tol, cli.seed)?;
    r.estimate("w1", "jointrad.w1", cli.tol, &w1);

    if let Some(k) = args.k {
        let wk = jointrad::wk_lower(&t, k, args.budget, cli.seed)?;
        r.kv("wk.k", k);
        r.kv("wk.restarts", args.budget);
        r.estimate("wk", "jointrad.wk_lower", cli.tol, &wk);
    }
    if args.upper {
        let ub = jointrad::wcb_upper_search(&t, defaults::FEAS_MAX_ITER.min(5000), 1e-3, cli.seed)?;
        r.kv("wcb_upper.op", "jointrad.wcb_upper_search");
        r.kv_f64("wcb_upper.raw_diag_sum_norm", ub.raw_diag_sum_norm);
        r.kv_f64("wcb_upper.kappa", ub.kappa);
        r.kv_f64("wcb_upper.bound", ub.bound);
        r.kv("wcb_upper.feasibility_iterations", ub.feasibility_iterations);
    }
    Ok(r.emit())
}

fn cmd_group_norm(cli: &Cli, args: &GroupNormArgs, threads: usize) -> Result<String, CliError> {
    let spec = GroupSpec::parse(&args.group)?;
    let coeffs = io::parse_coeff_list(&args.coeffs)?;
    let mut r = base_report(cli, "group-norm", threads);
    r.kv("arg.group", &args.group);
    r.kv("arg.coeffs", &args.coeffs);
    r.kv("arg.radius", args.radius);

    let nonneg_real = coeffs.iter().all(|c| c.im == 0.0 && c.re >= 0.0);
    if nonneg_real {
        let real: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
        let est = groups::re_norm_lower(&spec, &real, args.radius, cli.tol, cli.seed)?;
        r.estimate("re_norm", "groups.re_norm_lower", cli.tol, &est);
    } else {
        // Phases are absorbed by the regular representation; the value
        // equals the one for the coefficient moduli, verified on the same
        // truncation by the phase-optimized search.
        let moduli: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
        let est = groups::re_norm_lower(&spec, &moduli, args.radius, cli.tol, cli.seed)?;
        r.kv("note", "complex coefficients: phases absorb into the regular representation; values computed for the moduli");
        r.estimate("re_norm", "groups.re_norm_lower", cli.tol, &est);
        let check = groups::w1_group_check(&spec, &coeffs, args.radius, cli.seed)?;
        r.kv("phase_check.op", "groups.w1_group_check");
        r.kv_f64("phase_check.phase_optimized", check.phase_optimized);
        r.kv_f64("phase_check.re_norm", check.re_norm);
        r.kv_f64("phase_check.agreement", check.agreement());
    }
    Ok(r.emit())
}

fn cmd_amenability(cli: &Cli, args: &AmenabilityArgs, threads: usize) -> Result<String, CliError> {
    let spec = GroupSpec::parse(&args.group)?;
    let coeffs: Vec<f64> = io::parse_coeff_list(&args.coeffs)?
        .iter()
        .map(|c| {
            if c.im == 0.0 && c.re > 0.0 {
                Ok(c.re)
            } else {
                Err(CliError::Input("amenability contrast needs positive real coefficients".into()))
            }
        })
        .collect::<Result<_, _>>()?;
    let schedule: Vec<usize> = match (&args.schedule, args.radius) {
        (Some(s), _) => s
            .split(',')
            .map(|tok| tok.trim().parse().map_err(|_| CliError::Input(format!("bad radius '{tok}'"))))
            .collect::<Result<_, _>>()?,
        (None, Some(r)) => {
            let step = (r / 5).max(1);
            let mut sched: Vec<usize> = (1..=5).map(|i| i * step).filter(|&x| x <= r).collect();
            if sched.last() != Some(&r) {
                sched.push(r);
            }
            sched
        }
        (None, None) => vec![4, 8, 12, 16, 20],
    };
    let report = groups::amenability_gap(&spec, &coeffs, &schedule, cli.tol, cli.seed)?;
    let mut r = base_report(cli, "amenability", threads);
    r.kv("arg.group", &args.group);
    r.kv("arg.coeffs", &args.coeffs);
    r.kv("op", "groups.amenability_gap");
    r.kv_f64("tol", cli.tol);
    for (radius, value) in &report.estimates {
        r.kv_f64(&format!("estimate.r{radius}"), *value);
    }
    r.kv_f64("coeff_sum", report.coeff_sum);
    r.kv_f64("gap", report.gap);
    r.kv("verdict_hint", report.verdict.as_str());
    r.kv("note", "heuristic verdict: compressions certify lower bounds only, never amenability itself");
    Ok(r.emit())
}

fn cmd_ucp(cli: &Cli, args: &UcpArgs, threads: usize) -> Result<String, CliError> {
    let t = read_tuple(&args.tuple)?;
    let mut r = base_report(cli, "ucp", threads);
    r.kv("arg.tuple", args.tuple.display());
    r.kv("op", "opsys.ucp_check");
    r.kv("budget", args.budget);
    match opsys::ucp_check(&t, args.budget, cli.seed)? {
        UcpVerdict::Certified { upper, kind } => {
            r.kv("verdict", "UCP_CERTIFIED");
            r.kv("certificate.kind", kind);
            r.kv_f64("certificate.upper", upper);
        }
        UcpVerdict::Refuted { k, value, violation } => {
            r.kv("verdict", "REFUTED");
            r.kv("violation.k", k);
            r.kv_f64("violation.wk_lower", value);
            r.kv_f64("violation.quadratic_form", violation.quadratic_form);
            r.kv_bool("violation.cross_validated", violation.cross_validated);
            r.vector("violation.witness_vector", &violation.witness_vector);
        }
        UcpVerdict::Undecided { lower, upper } => {
            r.kv("verdict", "UNDECIDED");
            r.kv_f64("interval.lower", lower);
            match upper {
                Some(u) => r.kv_f64("interval.upper", u),
                None => r.kv("interval.upper", "inf"),
            }
        }
    }
    if let Some(k) = args.k {
        r.kv("kpos.op", "opsys.kpos_check");
        r.kv("kpos.k", k);
        match opsys::kpos_check(&t, k, args.budget, cli.seed)? {
            opsys::KposVerdict::PositiveRefuted { value, violation, .. } => {
                r.kv("kpos.verdict", "POSITIVE_REFUTED");
                r.kv_f64("kpos.wk_lower", value);
                r.kv_bool("kpos.cross_validated", violation.cross_validated);
            }
            opsys::KposVerdict::Consistent { lower, upper } => {
                r.kv("kpos.verdict", "CONSISTENT");
                r.kv_f64("kpos.lower", lower);
                if let Some(u) = upper {
                    r.kv_f64("kpos.upper", u);
                }
            }
        }
    }
    Ok(r.emit())
}

fn emit_membership(r: &mut Report, prefix: &str, v: &ranges::MembershipVerdict) {
    r.kv(&format!("{prefix}.status"), v.status.as_str());
    match &v.evidence {
        Evidence::Norms(norms) => {
            for (i, n) in norms.iter().enumerate() {
                r.kv_f64(&format!("{prefix}.norm.{i}"), *n);
            }
        }
        Evidence::Certificate { kind, upper } => {
            r.kv(&format!("{prefix}.certificate.kind"), kind);
            r.kv_f64(&format!("{prefix}.certificate.upper"), *upper);
        }
        Evidence::Violation { k, value, violation } => {
            r.kv(&format!("{prefix}.violation.k"), *k);
            r.kv_f64(&format!("{prefix}.violation.wk_lower"), *value);
            r.kv_bool(&format!("{prefix}.violation.cross_validated"), violation.cross_validated);
            r.vector(&format!("{prefix}.violation.witness_vector"), &violation.witness_vector);
        }
        Evidence::Interval { lower, upper } => {
            r.kv_f64(&format!("{prefix}.interval.lower"), *lower);
            match upper {
                Some(u) => r.kv_f64(&format!("{prefix}.interval.upper"), *u),
                None => r.kv(&format!("{prefix}.interval.upper"), "inf"),
            }
        }
        Evidence::Choi { witness, unital_residual, constraint_residual, assumption } => {
            r.kv_f64(&format!("{prefix}.choi.unital_residual"), *unital_residual);
            r.kv_f64(&format!("{prefix}.choi.constraint_residual"), *constraint_residual);
            r.kv(&format!("{prefix}.choi.assumption"), assumption);
            r.matrix(&format!("{prefix}.choi.witness"), &witness.to_matrix());
        }
        Evidence::CrossFlag { lower, upper, flagged_out_by } => {
            r.kv_f64(&format!("{prefix}.cross_flag.lower"), *lower);
            match upper {
                Some(u) => r.kv_f64(&format!("{prefix}.cross_flag.upper"), *u),
                None => r.kv(&format!("{prefix}.cross_flag.upper"), "inf"),
            }
            r.kv(&format!("{prefix}.cross_flag.flagged_out_by"), flagged_out_by);
        }
    }
}

fn cmd_range(cli: &Cli, args: &RangeArgs, threads: usize) -> Result<String, CliError> {
    let t = read_tuple(&args.tuple)?;
    let mut r = base_report(cli, "range", threads);
    r.kv("arg.set", &args.set);
    r.kv("arg.tuple", args.tuple.display());
    match args.set.as_str() {
        "sn" => {
            r.kv("op", "ranges.membership_sn");
            let v = ranges::membership_sn(&t, cli.tol);
            emit_membership(&mut r, "membership", &v);
        }
        "un" => {
            r.kv("op", "ranges.membership_un");
            let v = ranges::membership_un(&t, args.budget, cli.seed)?;
            emit_membership(&mut r, "membership", &v);
        }
        "kmax" => {
            r.kv("op", "ranges.membership_kmax_un");
            r.kv("arg.k", args.k);
            let v = ranges::membership_kmax_un(&t, args.k, args.budget, cli.seed)?;
            emit_membership(&mut r, "membership", &v);
        }
        "w" => {
            let target = args
                .target
                .as_ref()
                .ok_or_else(|| CliError::Input("--set w needs --target".into()))?;
            let b = read_tuple(target)?;
            r.kv("arg.target", target.display());
            r.kv("op", "ranges.membership_w");
            let v = ranges::membership_w(&t, &b, defaults::FEAS_MAX_ITER, cli.seed)?;
            emit_membership(&mut r, "membership", &v);
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown range set '{other}' (expected sn, un, kmax, or w)"
            )));
        }
    }
    Ok(r.emit())
}

fn cmd_refute(cli: &Cli, args: &RefuteArgs, threads: usize) -> Result<String, CliError> {
    let b = read_tuple(&args.tuple)?;
    let mut r = base_report(cli, "refute", threads);
    r.kv("arg.tuple", args.tuple.display());
    r.kv("arg.k", args.k);
    r.kv("op", "ranges.omin_refute");
    match ranges::omin_refute(&b, args.k, args.budget, cli.seed)? {
        ranges::RefuteOutcome::Refuted { witness, admissibility, certificate_value, value } => {
            r.kv("outcome", "REFUTED");
            r.kv_f64("value", value);
            r.kv("admissibility", &admissibility);
            r.kv_f64("certificate_value", certificate_value);
            for (i, m) in witness.matrices().iter().enumerate() {
                r.matrix(&format!("witness.{i}"), m);
            }
        }
        ranges::RefuteOutcome::NoWitnessFound { tried, best } => {
            r.kv("outcome", "NO_WITNESS_FOUND");
            r.kv("tried", tried);
            r.kv_f64("best", best);
        }
    }
    Ok(r.emit())
}

fn cmd_feas(cli: &Cli, args: &FeasArgs, threads: usize) -> Result<String, CliError> {
    let problem = psdfeas::parse_problem(&read_file(&args.problem)?)?;
    let mut r = base_report(cli, "feas", threads);
    r.kv("arg.problem", args.problem.display());
    r.kv("op", "psdfeas.solve");
    r.kv_f64("problem.tol", problem.tol);
    r.kv("problem.max_iter", problem.max_iter);
    let res = psdfeas::solve(&problem, cli.seed)?;
    r.kv("iterations", res.iterations);
    r.kv_f64("psd_residual", res.psd_residual);
    r.kv_f64("affine_residual", res.affine_residual);
    match res.status {
        FeasibilityStatus::Feasible(witness) => {
            r.kv("status", "FEASIBLE");
            for (i, w) in witness.iter().enumerate() {
                r.matrix(&format!("witness.{}", problem.block_name(i)), &w.to_matrix());
            }
        }
        FeasibilityStatus::Unknown => {
            r.kv("status", "UNKNOWN");
            r.kv("note", "the engine is one-sided: UNKNOWN never certifies infeasibility");
        }
    }
    Ok(r.emit())
}

fn cmd_bounds(cli: &Cli, args: &BoundsArgs, threads: usize) -> Result<String, CliError> {
    let b = opsys::bound_calculators(args.n)?;
    let mut r = base_report(cli, "bounds", threads);
    r.kv("arg.n", args.n);
    r.kv("op", "opsys.bound_calculators");
    r.kv_f64("d_inf_un_lower", b.d_inf_un_lower);
    r.kv_f64("kesten_w", b.kesten_w);
    r.kv_f64("hausdorff_lower", b.hausdorff_lower);
    r.kv_f64("hausdorff_floor", b.hausdorff_floor);
    r.kv_f64("dinf_sn_lower", b.dinf_sn_lower);
    r.kv_bool("verdict.d_inf_un_lower_gt_1", b.verdict_un());
    r.kv_bool("verdict.hausdorff_lower_gt_floor", b.verdict_hausdorff());
    r.kv_bool("verdict.dinf_sn_lower_ge_half", b.verdict_sn());
    Ok(r.emit())
}

fn cmd_obstruction(cli: &Cli, args: &ObstructionArgs, threads: usize) -> Result<String, CliError> {
    let mut r = base_report(cli, "obstruction", threads);
    let rep = match (&args.group, args.radius, &args.tuple) {
        (Some(g), Some(radius), None) => {
            let spec = GroupSpec::parse(g)?;
            let n = match spec {
                GroupSpec::Free(n) => n,
                _ => return Err(CliError::Input("obstruction needs a free group (free:n)".into())),
            };
            r.kv("arg.group", g);
            r.kv("arg.radius", radius);
            r.kv("op", "opsys.free_group_obstruction");
            opsys::free_group_obstruction(n, radius, args.budget, cli.seed)?
        }
        (None, None, Some(path)) => {
            let u = read_tuple(path)?;
            r.kv("arg.tuple", path.display());
            r.kv("op", "opsys.lp_obstruction_demo");
            opsys::lp_obstruction_demo(&u, args.budget, cli.seed)?
        }
        _ => {
            return Err(CliError::Input(
                "obstruction needs either --group free:n with --radius, or --tuple".into(),
            ));
        }
    };
    r.kv("budget", args.budget);
    r.kv("n", rep.n);
    r.kv("dim", rep.dim);
    if let Some(w) = &rep.w {
        r.kv_f64("w.value", w.value);
        r.kv("w.provenance", &w.provenance);
    }
    match &rep.outcome {
        ObstructionOutcome::Demonstrated => {
            r.kv("outcome", "DEMONSTRATED");
            r.kv_f64("chain.per_block_trace_bound", rep.per_block_bound);
            r.kv_f64("chain.total_trace_bound", rep.total_bound);
            r.kv(
                "chain.statement",
                "any unital completion satisfies sum_j tau(P_j + Q_j) >= n/w > 1 = tau(I): contradiction",
            );
        }
        ObstructionOutcome::NotApplicable { reason } => {
            r.kv("outcome", "NOT_APPLICABLE");
            r.kv("reason", reason);
        }
    }
    if let Some(shadow) = &rep.trace_shadow {
        r.kv("trace_shadow.op", "psdfeas.solve");
        r.kv("trace_shadow.status", if shadow.unknown { "UNKNOWN" } else { "FEASIBLE" });
        r.kv("trace_shadow.iterations", shadow.iterations);
        r.kv_f64("trace_shadow.psd_residual", shadow.psd_residual);
        r.kv_f64("trace_shadow.affine_residual", shadow.affine_residual);
    }
    if let Some(full) = &rep.full_completion {
        r.kv("full_completion.op", "psdfeas.solve");
        r.kv("full_completion.status", if full.unknown { "UNKNOWN" } else { "FEASIBLE" });
        r.kv("full_completion.iterations", full.iterations);
        r.kv_f64("full_completion.psd_residual", full.psd_residual);
        r.kv_f64("full_completion.affine_residual", full.affine_residual);
    }
    for (i, p) in rep.perturbation_norms.iter().enumerate() {
        r.kv_f64(&format!("perturbation.{i}.norm"), *p);
    }
    for (i, c) in rep.completed_entries.iter().enumerate() {
        r.kv(&format!("perturbation.{i}.completed_entries"), *c);
    }
    r.kv_bool("branch_discrepancy", rep.branch_discrepancy);
    Ok(r.emit())
}
