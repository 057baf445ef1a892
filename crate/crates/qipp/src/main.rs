use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qipp::checks::{self, Check};
use qipp::{meshio, report};
use qipp_core::mesh::{generate_structured, refine_uniform};
use qipp_core::negproj::Variant;
use qipp_core::study::{self, ladder};
use qipp_core::{Kind, PatchPolicy, QuasiInterpolator};

#[derive(Parser)]
#[command(name = "qipp", version, about = "Quasi-interpolation studies and verification checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Check tolerances; exit with status 1 if any fails.
    #[arg(long = "assert", global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or refine meshes in the plain-text format.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Convergence of a quasi-interpolator applied to the projected smooth solution.
    Interp {
        #[arg(long)]
        p: usize,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = PatchArg::Default)]
        patch: PatchArg,
        /// Dump the operator of the coarsest level as `row col value` lines.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Lowest-order mixed method and its postprocessings.
    Mixed {
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[command(flatten)]
        output: Output,
    },
    /// HDG solution postprocessed with I0.
    Hdg {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Defaults to `small` for p >= 2.
        #[arg(long, value_enum)]
        patch: Option<PatchArg>,
        #[command(flatten)]
        output: Output,
    },
    /// Projection bounded in negative norms.
    Negproj {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::ZeroBoundary)]
        variant: VariantArg,
        #[command(flatten)]
        output: Output,
    },
    /// Rank and nullspace checks.
    Verify {
        #[command(subcommand)]
        check: VerifyAction,
    },
}

#[derive(Subcommand)]
enum MeshAction {
    /// Structured mesh of the unit interval or square.
    Gen {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Uniform red refinement of a mesh file.
    Refine {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    /// Gram kernel on random interior-vertex patches and vicinity orders on structured meshes.
    Rank {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Two-triangle nullspace table.
    Appendix {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Random full vertex patches checked alongside the table.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "J0")]
    J0,
    #[value(name = "J")]
    J,
    #[value(name = "I0")]
    I0,
    #[value(name = "I")]
    I,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::J0 => Kind::J0,
            KindArg::J => Kind::J,
            KindArg::I0 => Kind::I0,
            KindArg::I => Kind::I,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PatchArg {
    Default,
    Small,
}

impl From<PatchArg> for PatchPolicy {
    fn from(p: PatchArg) -> Self {
        match p {
            PatchArg::Default => PatchPolicy::Default,
            PatchArg::Small => PatchPolicy::Small,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    ZeroBoundary,
    Free,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<Vec<Check>> {
    let (checks, output) = match cli.command {
        Command::Mesh { action } => match action {
            MeshAction::Gen { dim, n, output } => {
                meshio::write_mesh(&generate_structured(dim, n)?, sink(&output.out)?)?;
                (Vec::new(), output)
            }
            MeshAction::Refine { input, times, output } => {
                let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
                let mut mesh =
                    meshio::read_mesh(BufReader::new(file)).with_context(|| format!("reading {}", input.display()))?;
                for _ in 0..times {
                    mesh = refine_uniform(&mesh);
                }
                meshio::write_mesh(&mesh, sink(&output.out)?)?;
                (Vec::new(), output)
            }
        },
        Command::Interp { p, kind, levels, patch, dump_matrix, output } => {
            if let Some(path) = dump_matrix {
                let mesh = generate_structured(2, ladder(1)[0])?;
                let qi = QuasiInterpolator::build(&mesh, p, kind.into(), patch.into())?;
                meshio::write_triplets(qi.operator_matrix(), BufWriter::new(File::create(&path)?))?;
            }
            let s = study::run_interp_study(p, kind.into(), levels, patch.into())?;
            eprint!("{}", report::study_metadata(&s));
            report::write_study(&s, sink(&output.out)?)?;
            (checks::interp_checks(&s, p), output)
        }
        Command::Mixed { levels, output } => {
            let s = study::run_mixed_study(levels)?;
            eprint!("{}", report::study_metadata(&s));
            report::write_study(&s, sink(&output.out)?)?;
            (checks::mixed_checks(&s), output)
        }
        Command::Hdg { p, tau, levels, patch, output } => {
            let policy =
                patch.map(PatchPolicy::from).unwrap_or(if p >= 2 { PatchPolicy::Small } else { PatchPolicy::Default });
            let s = study::run_hdg_study(p, levels, tau, policy)?;
            eprint!("{}", report::study_metadata(&s));
            report::write_study(&s, sink(&output.out)?)?;
            (checks::hdg_checks(&s, p), output)
        }
        Command::Negproj { p, levels, variant, output } => {
            let variant = match variant {
                VariantArg::ZeroBoundary => Variant::ZeroBoundary,
                VariantArg::Free => Variant::Free,
            };
            let s = study::run_negproj_study(p, levels, variant)?;
            eprint!("{}", report::study_metadata(&s));
            report::write_study(&s, sink(&output.out)?)?;
            (checks::negproj_checks(&s, p), output)
        }
        Command::Verify { check } => match check {
            VerifyAction::Rank { p, trials, output } => {
                let rows = study::run_rank_study(p, trials)?;
                report::write_rank(&rows, sink(&output.out)?)?;
                let mut checks = checks::rank_checks(&rows, trials);
                let (order, first) = study::structured_vicinity_orders(8, p)?;
                eprintln!("structured n=8: max vicinity order {order}, all vertex patches: {first}");
                checks.push(Check::new(
                    format!("vicinity order <= {}", p + 1),
                    order <= p + 1,
                    format!("max order {order}"),
                ));
                if p == 0 {
                    checks.push(Check::new("vicinity is the vertex patch", first, ""));
                }
                (checks, output)
            }
            VerifyAction::Appendix { n, grid, trials, output } => {
                let rows = qipp_core::orthocheck::appendix_table(n, grid)?;
                report::write_appendix(&rows, sink(&output.out)?)?;
                let mut checks = checks::appendix_checks(&rows);
                let patches = study::run_patch_nullspace_study(n, trials)?;
                let bad = patches.iter().filter(|r| r.kernel != 0).count();
                eprintln!("{} random vertex patches, {bad} with a nontrivial nullspace", patches.len());
                checks.push(Check::new(
                    "full patch nullspace",
                    bad == 0,
                    format!("{bad} of {} nontrivial", patches.len()),
                ));
                (checks, output)
            }
        },
    };
    Ok(if output.check { checks } else { Vec::new() })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(checks) => {
            for c in &checks {
                eprintln!("{c}");
            }
            if checks::all_pass(&checks) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
