//! The `seqsym` command line.
//!
//! Exit codes: 0 on success, 2 when the data or a parameter fails
//! validation, 64 on a usage error, 1 when output cannot be written.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use seqsym_core::{generate_synthetic_cohort, write_cohort, SyntheticSpec};

use crate::config::{load, DataSource, LoadError, SessionConfig};
use crate::engine::{
    ClusterRequest, Engine, MineRequest, PatientProjectionQuery, PrevalenceQuery, ProfilesQuery, SankeyQuery,
    SymptomProjectionQuery, TimelineQuery,
};
use crate::error::ApiError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "seqsym", version, about = "Acute-to-late symptom rule mining, clustering and analytics")]
pub struct Cli {
    /// Worker thread cap for data-parallel work.
    #[arg(long, global = true, env = "SEQSYM_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine acute→late rules for one treatment.
    Mine(MineArgs),
    /// Mine, then cluster the rules of one treatment.
    Cluster(ClusterArgs),
    /// Compute analyst products for one treatment.
    Analytics(AnalyticsArgs),
    /// Write a synthetic cohort as CSV.
    Synth(SynthArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Clinical CSV (with --ratings).
    #[arg(long, requires = "ratings", conflicts_with_all = ["data", "synthetic"])]
    pub clinical: Option<PathBuf>,
    /// Ratings CSV (with --clinical).
    #[arg(long, requires = "clinical", conflicts_with_all = ["data", "synthetic"])]
    pub ratings: Option<PathBuf>,
    /// Directory holding clinical.csv and ratings.csv.
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Synthetic cohort spec (JSON).
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Seed for layouts and burden tiers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MiningArgs {
    #[arg(long)]
    pub treatment: String,
    #[arg(long)]
    pub acute_threshold: Option<u8>,
    #[arg(long)]
    pub late_threshold: Option<u8>,
    #[arg(long)]
    pub min_support: Option<f64>,
    #[arg(long)]
    pub min_confidence: Option<f64>,
    #[arg(long)]
    pub min_lift: Option<f64>,
    #[arg(long)]
    pub max_itemset_size: Option<usize>,
}

impl MiningArgs {
    fn request(&self) -> MineRequest {
        MineRequest {
            treatment: self.treatment.clone(),
            theta_acute: self.acute_threshold,
            theta_late: self.late_threshold,
            min_support: self.min_support,
            min_confidence: self.min_confidence,
            min_lift: self.min_lift,
            max_itemset_size: self.max_itemset_size,
        }
    }
}

#[derive(Debug, Args)]
pub struct CutArgs {
    #[arg(long, conflicts_with = "clusters")]
    pub cut_height: Option<f64>,
    #[arg(long)]
    pub clusters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    #[command(flatten)]
    pub cut: CutArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Product {
    Profiles,
    Prevalence,
    SymptomProjection,
    PatientProjection,
    Sankey,
    Timeline,
    All,
}

#[derive(Debug, Args)]
pub struct AnalyticsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    #[command(flatten)]
    pub cut: CutArgs,
    #[arg(long, value_enum, default_value_t = Product::All)]
    pub product: Product,
    /// Comma-separated symptom subset for profiles and the patient projection.
    #[arg(long)]
    pub symptoms: Option<String>,
    /// Comma-separated patient ids for the timeline.
    #[arg(long)]
    pub patients: Option<String>,
    /// Collision diameter for projections; derived from the data when omitted.
    #[arg(long)]
    pub diameter: Option<f64>,
    #[arg(long)]
    pub t_stage: Option<String>,
    #[arg(long)]
    pub n_stage: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory that receives clinical.csv and ratings.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
}

enum Failure {
    Usage(String),
    Invalid(String),
    Io(String),
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Invalid(ref report) => Failure::Invalid(format!(
                "{e}\n{}",
                serde_json::to_string_pretty(report).unwrap_or_default()
            )),
            LoadError::Core(err) => Failure::Invalid(err.to_string()),
        }
    }
}

fn read_spec(path: &Path) -> Result<SyntheticSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

impl DataArgs {
    fn config(&self) -> Result<SessionConfig, Failure> {
        let source = match (&self.clinical, &self.ratings, &self.data, &self.synthetic) {
            (Some(c), Some(r), None, None) => DataSource::Files {
                clinical: c.clone(),
                ratings: r.clone(),
            },
            (None, None, Some(dir), None) => DataSource::directory(dir),
            (None, None, None, Some(spec)) => DataSource::Synthetic(read_spec(spec)?),
            _ => {
                return Err(Failure::Usage(
                    "a data source is required: --clinical and --ratings, --data DIR, or --synthetic SPEC".into(),
                ))
            }
        };
        let mut config = SessionConfig::new(source);
        config.seed = self.seed;
        Ok(config)
    }

    fn engine(&self) -> Result<Engine, Failure> {
        let config = self.config()?;
        let (cohort, report) = load(&config.source)?;
        Ok(Engine::new(config, cohort, report))
    }
}

fn cluster_request(treatment: &str, cut: &CutArgs) -> ClusterRequest {
    ClusterRequest {
        treatment: treatment.to_string(),
        cut_height: cut.cut_height,
        clusters: cut.clusters,
    }
}

fn emit(value: &Value, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn analytics(args: &AnalyticsArgs) -> Result<Value, Failure> {
    let engine = args.data.engine()?;
    let treatment = args.mining.treatment.clone();
    engine.mine(&args.mining.request())?;
    engine.cluster(&cluster_request(&treatment, &args.cut))?;
    let seed = Some(args.data.seed);
    let one = |product: Product| -> Result<Value, ApiError> {
        match product {
            Product::Profiles => engine.profiles(&ProfilesQuery {
                treatment: treatment.clone(),
                symptoms: args.symptoms.clone(),
            }),
            Product::Prevalence => engine.prevalence(&PrevalenceQuery {
                treatment: treatment.clone(),
                theta_acute: args.mining.acute_threshold,
                theta_late: args.mining.late_threshold,
                t_stage: args.t_stage.clone(),
                n_stage: args.n_stage.clone(),
            }),
            Product::SymptomProjection => engine.symptom_projection(&SymptomProjectionQuery {
                treatment: treatment.clone(),
                seed,
                diameter: args.diameter,
            }),
            Product::PatientProjection => engine.patient_projection(&PatientProjectionQuery {
                treatment: treatment.clone(),
                symptoms: args.symptoms.clone(),
                seed,
                diameter: args.diameter,
            }),
            Product::Sankey => engine.sankey(&SankeyQuery {
                treatment: treatment.clone(),
                seed,
            }),
            Product::Timeline => engine.timeline(&TimelineQuery {
                treatment: treatment.clone(),
                patients: args.patients.clone(),
            }),
            Product::All => unreachable!("expanded by the caller"),
        }
    };
    if args.product != Product::All {
        return Ok(one(args.product)?);
    }
    let mut all = serde_json::Map::new();
    for (name, product) in [
        ("profiles", Product::Profiles),
        ("prevalence", Product::Prevalence),
        ("symptom_projection", Product::SymptomProjection),
        ("patient_projection", Product::PatientProjection),
        ("sankey", Product::Sankey),
        ("timeline", Product::Timeline),
    ] {
        // a product whose precondition fails is reported in place
        let value = one(product).unwrap_or_else(|e| json!({ "error": e.kind(), "message": e.to_string() }));
        all.insert(name.to_string(), value);
    }
    Ok(Value::Object(all))
}

fn serve(args: &ServeArgs, stderr: &mut dyn Write) -> Result<(), Failure> {
    let engine = Arc::new(args.data.engine()?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&args.addr)
            .await
            .map_err(|e| Failure::Io(format!("{}: {e}", args.addr)))?;
        let addr = listener.local_addr().map_err(|e| Failure::Io(e.to_string()))?;
        let _ = writeln!(stderr, "seqsym listening on http://{addr}");
        axum::serve(listener, crate::http::router(engine))
            .await
            .map_err(|e| Failure::Io(e.to_string()))
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    seqsym_core::exec::init_thread_pool(cli.threads);
    match &cli.command {
        Command::Mine(args) => {
            let engine = args.data.engine()?;
            emit(&engine.mine(&args.mining.request())?, args.out.as_deref(), stdout)
        }
        Command::Cluster(args) => {
            let engine = args.data.engine()?;
            engine.mine(&args.mining.request())?;
            let value = engine.cluster(&cluster_request(&args.mining.treatment, &args.cut))?;
            emit(&value, args.out.as_deref(), stdout)
        }
        Command::Analytics(args) => emit(&analytics(args)?, args.out.as_deref(), stdout),
        Command::Synth(args) => {
            let spec = read_spec(&args.spec)?;
            let cohort = generate_synthetic_cohort(&spec).map_err(|e| Failure::Invalid(e.to_string()))?;
            std::fs::create_dir_all(&args.out).map_err(|e| Failure::Io(format!("{}: {e}", args.out.display())))?;
            write_cohort(&cohort, &args.out).map_err(|e| Failure::Io(e.to_string()))?;
            let _ = writeln!(stderr, "wrote {} patients to {}", cohort.len(), args.out.display());
            Ok(())
        }
        Command::Serve(args) => serve(args, stderr),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_IO
        }
    }
}
