//! `cdtl`: train, apply and evaluate coupled deep transforms from the shell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coupled_transform::config::{DatasetManifest, Split, TrainConfig};
use coupled_transform::io::{self, MatrixFormat};
use coupled_transform::matching::{read_rankings_csv, write_rankings_csv};
use coupled_transform::*;

#[derive(Parser)]
#[command(name = "cdtl", version, about = "Coupled deep transform learning for cross-domain matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted two-domain dataset with train/gallery/probe manifests.
    GenSynth(GenSynthArgs),
    /// Train a model from a train manifest.
    Train(TrainArgs),
    /// Encode samples of one domain.
    Encode(EncodeArgs),
    /// Map final-layer codes into the other domain.
    Map(MapArgs),
    /// Rank gallery identities for every probe.
    Match(MatchArgs),
    /// Turn a rankings file into a CMC curve.
    EvalCmc(EvalCmcArgs),
    /// Summarise a model, or print the default training config.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenSynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 32)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    subjects: usize,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    /// Noise norm relative to the clean signal norm.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Condition-number bound of the planted matrices.
    #[arg(long, default_value_t = 50.0)]
    cond_bound: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per subject used for training; default all but two.
    #[arg(long)]
    train_samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = FileFormat::Csv)]
    format: FileFormat,
}

#[derive(Args)]
struct TrainArgs {
    /// Manifest with `split = "train"` naming both domains.
    #[arg(long)]
    manifest: PathBuf,
    /// Training config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's model kind.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    model: PathBuf,
    /// Per-iteration cost trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    domain: DomainArg,
    #[arg(long)]
    output: PathBuf,
    /// Threshold every layer's output to its training budget.
    #[arg(long)]
    thresholded: bool,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    model: PathBuf,
    /// Manifest with `split = "gallery"`, features from the target domain.
    #[arg(long)]
    gallery: PathBuf,
    /// Manifest with `split = "probe"`, features from the source domain.
    #[arg(long)]
    probe: PathBuf,
    /// Domain the probes come from.
    #[arg(long, value_enum, default_value_t = DomainArg::D1)]
    probe_domain: DomainArg,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalCmcArgs {
    #[arg(long)]
    rankings: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Last rank of the curve; defaults to the number of gallery identities.
    #[arg(long)]
    max_rank: Option<usize>,
    /// Ranks to print in the summary.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    report: Vec<usize>,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["model", "defaults"])))]
struct InspectArgs {
    model: Option<PathBuf>,
    /// Print the default training config instead.
    #[arg(long)]
    defaults: bool,
    /// Also print every matrix.
    #[arg(long)]
    matrices: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FileFormat {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Semi,
    Symmetric,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    #[value(name = "1")]
    D1,
    #[value(name = "2")]
    D2,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    #[value(name = "1to2")]
    OneToTwo,
    #[value(name = "2to1")]
    TwoToOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Cosine,
}

impl From<DomainArg> for Domain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::D1 => Domain::One,
            DomainArg::D2 => Domain::Two,
        }
    }
}

/// Exit codes.
const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERICAL: u8 = 3;

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::GenSynth(a) => gen_synth(a),
        Command::Train(a) => train(a),
        Command::Encode(a) => encode(a),
        Command::Map(a) => map(a),
        Command::Match(a) => run_match(a),
        Command::EvalCmc(a) => eval_cmc(a),
        Command::Inspect(a) => inspect(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("cdtl: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("cdtl: error: {e}");
            ExitCode::from(if e.is_numerical() { NUMERICAL } else { DATA })
        }
    }
}

fn gen_synth(a: GenSynthArgs) -> CliResult {
    let r = a.samples;
    let train_samples = a.train_samples.unwrap_or(r.saturating_sub(2).max(1));
    if train_samples == 0 || train_samples > r {
        return Err(Failure::Usage(format!("--train-samples must lie in 1..={r}")));
    }
    let spec = SyntheticSpec {
        dim: a.dim,
        subjects: a.subjects,
        samples_per_subject: r,
        noise: a.noise,
        cond_bound: a.cond_bound,
        seed: a.seed,
    };
    let data = gen_synthetic_coupled::<f64>(&spec)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;

    // Gallery from domain 2 takes the first held-out sample, probes from
    // domain 1 take the rest. With nothing held out both reuse the last one.
    let gallery_sample = train_samples.min(r - 1);
    let probe_samples: Vec<usize> = if gallery_sample + 1 < r {
        (gallery_sample + 1..r).collect()
    } else {
        vec![gallery_sample]
    };
    let train_cols = data.columns_for_samples(&(0..train_samples).collect::<Vec<_>>());
    let gallery_cols = data.columns_for_samples(&[gallery_sample]);
    let probe_cols = data.columns_for_samples(&probe_samples);

    let ext = match a.format {
        FileFormat::Csv => "csv",
        FileFormat::Bin => "bin",
    };
    let out = |name: &str| a.out.join(name);
    let save = |name: &str, m: &FeatureMatrix<f64>, cols: &[usize]| -> CliResult<String> {
        let file = format!("{name}.{ext}");
        io::save_matrix(&out(&file), &m.select_columns(cols)?)?;
        Ok(file)
    };
    let labels = |name: &str, cols: &[usize]| -> CliResult<String> {
        let file = format!("{name}_labels.txt");
        io::save_labels(&out(&file), &data.labels_for(cols))?;
        Ok(file)
    };

    let t1 = save("train_x1", &data.x1, &train_cols)?;
    let t2 = save("train_x2", &data.x2, &train_cols)?;
    let tl = labels("train", &train_cols)?;
    let g2 = save("gallery_x2", &data.x2, &gallery_cols)?;
    let gl = labels("gallery", &gallery_cols)?;
    let p1 = save("probe_x1", &data.x1, &probe_cols)?;
    let pl = labels("probe", &probe_cols)?;
    let manifest = |name: &str, text: String| io::write_atomic(&out(name), text.as_bytes());
    manifest("train.toml", DatasetManifest::render(Split::Train, Some(&t1), Some(&t2), Some(&tl)))?;
    manifest("gallery.toml", DatasetManifest::render(Split::Gallery, None, Some(&g2), Some(&gl)))?;
    manifest("probe.toml", DatasetManifest::render(Split::Probe, Some(&p1), None, Some(&pl)))?;

    let truth = &data.truth;
    for (name, m) in [("t1", &truth.t1), ("t2", &truth.t2), ("m12", &truth.m12), ("m21", &truth.m21)] {
        io::save_matrix(&out(&format!("truth_{name}.{ext}")), &FeatureMatrix::new(m.clone())?)?;
    }
    println!(
        "wrote {} train, {} gallery and {} probe samples to {}",
        train_cols.len(),
        gallery_cols.len(),
        probe_cols.len(),
        a.out.display()
    );
    Ok(())
}

fn load_split(path: &Path, want: Split) -> CliResult<(DatasetManifest, coupled_transform::config::Dataset<f64>)> {
    let manifest = DatasetManifest::load(path)?;
    if manifest.split != want {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            reason: format!("expected split {want:?}, found {:?}", manifest.split),
        }
        .into());
    }
    let data = manifest.load_data()?;
    Ok((manifest, data))
}

fn missing(path: &Path, what: &str) -> Failure {
    Error::Manifest {
        path: path.to_path_buf(),
        reason: format!("{what} is required here"),
    }
    .into()
}

fn train(a: TrainArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => TrainConfig::load(p)?,
        None => TrainConfig::default(),
    };
    if let Some(k) = a.kind {
        cfg.kind = match k {
            KindArg::Semi => ModelKind::Semi,
            KindArg::Symmetric => ModelKind::Symmetric,
        };
    }
    let schedule = cfg.schedule::<f64>()?;
    let (_, data) = load_split(&a.manifest, Split::Train)?;
    let x1 = data.x1.ok_or_else(|| missing(&a.manifest, "domain1"))?;
    let x2 = data.x2.ok_or_else(|| missing(&a.manifest, "domain2"))?;
    let fit = fit_deep(&x1, &x2, cfg.kind, &schedule, cfg.ridge)?;
    io::save_model(&a.model, &fit.model)?;

    if let Some(path) = &a.trace {
        let mut s = String::from("layer,part,iteration,residual,frob_penalty,logdet_penalty,coupling,total\n");
        for (i, layer) in fit.traces.iter().enumerate() {
            let parts: Vec<(&str, &[CostBreakdown<f64>])> = match layer {
                LayerTrace::Independent { domain1, domain2 } => vec![("domain1", domain1), ("domain2", domain2)],
                LayerTrace::Coupled(t) => vec![("coupled", t)],
            };
            for (part, trace) in parts {
                for (k, c) in trace.iter().enumerate() {
                    let _ = writeln!(
                        s,
                        "{},{part},{},{:?},{:?},{:?},{:?},{:?}",
                        i + 1,
                        k + 1,
                        c.residual,
                        c.frob_penalty,
                        c.logdet_penalty,
                        c.coupling,
                        c.total
                    );
                }
            }
        }
        io::write_atomic(path, s.as_bytes())?;
    }
    let last = fit.traces.last().and_then(|t| t.traces().first().and_then(|c| c.last().copied()));
    println!(
        "trained {} model, depth {}, dim {}; final coupled cost {}",
        cfg.kind,
        fit.model.depth(),
        fit.model.dim(),
        last.map_or("n/a".into(), |c| format!("{:.6e}", c.total))
    );
    Ok(())
}

fn save_like_input(path: &Path, m: &FeatureMatrix<f64>) -> CliResult {
    io::save_matrix_as(path, m, MatrixFormat::from_path(path))?;
    Ok(())
}

fn encode(a: EncodeArgs) -> CliResult {
    let model = io::load_model::<f64>(&a.model)?;
    let x = io::load_matrix::<f64>(&a.input)?;
    let coding = if a.thresholded { Coding::Thresholded } else { Coding::Dense };
    let z = model.encode_with(&x, a.domain.into(), coding)?;
    save_like_input(&a.output, &z)
}

fn map(a: MapArgs) -> CliResult {
    let model = io::load_model::<f64>(&a.model)?;
    let z = io::load_matrix::<f64>(&a.input)?;
    let direction = match a.direction {
        DirectionArg::OneToTwo => Direction::OneToTwo,
        DirectionArg::TwoToOne => Direction::TwoToOne,
    };
    save_like_input(&a.output, &model.map_codes(&z, direction)?)
}

fn run_match(a: MatchArgs) -> CliResult {
    let model = io::load_model::<f64>(&a.model)?;
    let (probe_domain, gallery_domain, direction) = match a.probe_domain {
        DomainArg::D1 => (Domain::One, Domain::Two, Direction::OneToTwo),
        DomainArg::D2 => (Domain::Two, Domain::One, Direction::TwoToOne),
    };
    let pick = |d: coupled_transform::config::Dataset<f64>, domain: Domain| match domain {
        Domain::One => (d.x1, d.labels),
        Domain::Two => (d.x2, d.labels),
    };
    let (_, gdata) = load_split(&a.gallery, Split::Gallery)?;
    let (gx, gl) = pick(gdata, gallery_domain);
    let gx = gx.ok_or_else(|| missing(&a.gallery, domain_key(gallery_domain)))?;
    let gl = gl.ok_or_else(|| missing(&a.gallery, "labels"))?;
    let (_, pdata) = load_split(&a.probe, Split::Probe)?;
    let (px, pl) = pick(pdata, probe_domain);
    let px = px.ok_or_else(|| missing(&a.probe, domain_key(probe_domain)))?;
    let pl = pl.ok_or_else(|| missing(&a.probe, "labels"))?;

    let metric = match a.metric {
        MetricArg::Euclidean => Metric::Euclidean,
        MetricArg::Cosine => Metric::Cosine,
    };
    let gallery = enroll(model.encode(&gx, gallery_domain)?, gl, metric)?;
    let probes = model.map_codes(&model.encode(&px, probe_domain)?, direction)?;
    let results = identify(&gallery, &probes, &pl)?;
    let mut buf = Vec::new();
    write_rankings_csv(&results, &mut buf)?;
    io::write_atomic(&a.output, &buf)?;
    println!(
        "{} probes against {} identities; rank-1 {:.4}",
        results.len(),
        gallery.distinct_labels().len(),
        rank_k_accuracy(&results, 1)?
    );
    Ok(())
}

fn domain_key(d: Domain) -> &'static str {
    match d {
        Domain::One => "domain1",
        Domain::Two => "domain2",
    }
}

fn eval_cmc(a: EvalCmcArgs) -> CliResult {
    let file = std::fs::File::open(&a.rankings).map_err(|e| Error::Io {
        path: a.rankings.clone(),
        source: e,
    })?;
    let records = read_rankings_csv(std::io::BufReader::new(file), &a.rankings)?;
    let labels = records.iter().map(|r| r.gallery_labels).min().unwrap_or(0);
    let ranks: Vec<Option<usize>> = records.iter().map(|r| r.true_rank).collect();
    let curve = CmcCurve::from_ranks(&ranks, labels, a.max_rank.unwrap_or(labels))?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    io::write_atomic(&a.output, &buf)?;
    println!("probes: {}", curve.n_probes);
    for k in a.report {
        match curve.at(k) {
            Some(acc) => println!("rank-{k}: {acc:.4}"),
            None => return Err(Failure::Usage(format!("cannot report rank {k}"))),
        }
    }
    Ok(())
}

fn inspect(a: InspectArgs) -> CliResult {
    if a.defaults {
        print!("{}", TrainConfig::default().to_toml());
        return Ok(());
    }
    let path = a.model.expect("clap enforces the group");
    let model = io::load_model::<f64>(&path)?;
    println!("kind: {}", model.kind());
    println!("depth: {}", model.depth());
    println!("dim: {}", model.dim());
    for domain in [Domain::One, Domain::Two] {
        for (i, layer) in model.layers(domain).iter().enumerate() {
            let (sign, log) = layer.log_abs_det();
            let p = layer.params;
            let tau = layer.budget.tau().map_or("none".to_string(), |t| t.to_string());
            println!(
                "{} layer {}: det sign {:+}, log|det| {:.6}, lambda {}, epsilon {}, mu {}, tau {}",
                domain_key(domain),
                i + 1,
                sign,
                log,
                p.lambda,
                p.epsilon,
                p.mu,
                tau
            );
            if a.matrices {
                print_matrix("  T", &layer.t);
            }
        }
    }
    let mut maps = vec![("map_12", model.map_12())];
    if let Some(m) = model.map_21() {
        maps.push(("map_21", m));
    }
    for (name, m) in maps {
        println!("{name}: frobenius norm {:.6}", m.as_matrix().norm());
        if a.matrices {
            print_matrix("  M", m.as_matrix());
        }
    }
    Ok(())
}

fn print_matrix(prefix: &str, m: &nalgebra::DMatrix<f64>) {
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        println!("{prefix} {}", cells.join(","));
    }
}
