use std::fmt::Write as _;
use std::path::Path;

use eccentric::autoencoder::checkpoint::{encode_autoencoder, load_autoencoder};
use eccentric::autoencoder::{encode_dataset, load_dataset, train, DataSource, Dataset, DenseNetSpec, TrainConfig};
use eccentric::csv::{format_number, read_batch, write_batch, write_matrix, write_table};
use eccentric::kernel::choose_big_n;
use eccentric::latent::{
    self, align, cross_correlation, decode_eigen_components, knn_classify, sample_latents,
    similarity_metrics, Decoder, Embedding, IdentityDecoder, SampleMode,
};
use eccentric::particle::{radial_stats, simulate, SimConfig};
use eccentric::radius::{
    force_profile, lemma_a_check, lemma_b_argmax, lemma_b_numeric_argmax, solve_radius, sweep_radius,
};
use eccentric::{ParamSet, PointBatch};
use serde::Serialize;

use crate::args::*;
use crate::output::{Artifact, Outcome};
use crate::CliError;

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::SolveRadius(a) => solve(a),
        Command::SweepRadius(a) => sweep(a),
        Command::ForceProfile(a) => force(a),
        Command::LemmaCheck(a) => lemmas(a),
        Command::Simulate(a) => particles(a),
        Command::Train(a) => train_model(a),
        Command::Encode(a) => encode(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Align(a) => align_embeddings(a),
        Command::Metrics(a) => metrics(a),
        Command::Sample(a) => sample(a),
        Command::Knn(a) => knn(a),
        Command::DecodeComponents(a) => decode_components(a),
    }
}

/// Both renderings of a result; `format` (or `default`) picks the primary.
fn pair(csv: Artifact, json: Artifact, format: Option<Format>, default: Format) -> Outcome {
    let primary = match format.unwrap_or(default) {
        Format::Csv => 0,
        Format::Json => 1,
    };
    Outcome {
        files: vec![csv, json],
        primary,
    }
}

fn csv_only(format: Option<Format>, command: &str) -> Result<(), CliError> {
    match format {
        Some(Format::Json) => Err(CliError::Usage(format!("`{command}` writes CSV only; drop --format json"))),
        _ => Ok(()),
    }
}

fn big_n(scale: &ScaleArgs, dim: usize) -> Result<f64, CliError> {
    match scale.big_n {
        Some(n) => Ok(n),
        None => Ok(choose_big_n(dim, scale.mu)?),
    }
}

fn read_embedding(path: &Path) -> Result<(PointBatch, Option<Vec<u32>>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    read_batch(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Dataset, CliError> {
    let seed = args.data_seed.unwrap_or(seed);
    let source = match args.data {
        DataKind::GaussianMixture => DataSource::GaussianMixture {
            k: args.clusters,
            n: args.n,
            dim: args.data_dim,
            seed,
        },
        DataKind::NoisyRing => DataSource::NoisyRing {
            rings: args.rings,
            n: args.n,
            noise: args.noise,
            seed,
        },
        DataKind::SwissRoll => DataSource::SwissRoll { n: args.n, seed },
        DataKind::Idx => {
            let images = args.images.clone().ok_or_else(|| CliError::Usage("missing key `images` for --data idx".into()))?;
            let labels = args.labels.clone().ok_or_else(|| CliError::Usage("missing key `labels` for --data idx".into()))?;
            DataSource::Idx {
                images,
                labels,
                limit: args.limit,
            }
        }
    };
    Ok(load_dataset(&source)?)
}

#[derive(Serialize)]
struct RadiusOut {
    dim: usize,
    mu: f64,
    big_n: f64,
    rho: f64,
    sqrt_d: f64,
    percent_diff: f64,
    residual: f64,
    iterations: usize,
    quadrature_points: usize,
}

fn solve(a: &SolveRadiusArgs) -> Result<Outcome, CliError> {
    if a.dim < 3 {
        return Err(CliError::Validation(format!(
            "the stationary-sphere condition requires d >= 3, got dim = {}",
            a.dim
        )));
    }
    let n = big_n(&a.scale, a.dim)?;
    let sol = solve_radius(a.dim, a.scale.mu, n)?;
    let sqrt_d = (a.dim as f64).sqrt();
    let out = RadiusOut {
        dim: a.dim,
        mu: a.scale.mu,
        big_n: n,
        rho: sol.rho,
        sqrt_d,
        percent_diff: 100.0 * (sol.rho - sqrt_d).abs() / sqrt_d,
        residual: sol.residual,
        iterations: sol.iterations,
        quadrature_points: sol.quadrature_points,
    };
    let csv = write_table(
        &["d", "mu", "big_n", "rho", "sqrt_d", "percent_diff", "residual"],
        [vec![a.dim as f64, out.mu, n, out.rho, sqrt_d, out.percent_diff, out.residual]],
    );
    Ok(pair(
        Artifact::new("radius.csv", csv),
        Artifact::json("radius.json", &out)?,
        a.common.format,
        Format::Json,
    ))
}

fn sweep(a: &SweepRadiusArgs) -> Result<Outcome, CliError> {
    let rows = sweep_radius(&a.dims, a.mu_step)?;
    let csv = write_table(
        &["d", "max_percent_diff"],
        rows.iter().map(|r| vec![r.dim as f64, r.max_percent_diff]),
    );
    Ok(pair(
        Artifact::new("sweep.csv", csv),
        Artifact::json("sweep.json", &rows)?,
        a.common.format,
        Format::Csv,
    ))
}

#[derive(Serialize)]
struct ForceOut {
    mu: f64,
    big_n: f64,
    sqrt_n: f64,
    peak_r: f64,
    peak_magnitude: f64,
    grid_step: f64,
}

fn force(a: &ForceProfileArgs) -> Result<Outcome, CliError> {
    let n = big_n(&a.scale, a.dim)?;
    let params = ParamSet::new(a.dim, a.scale.mu, n, 0.0)?;
    let r_max = a.r_max.unwrap_or(3.0 * n.sqrt());
    let profile = force_profile(&params, r_max, a.steps)?;
    let (peak_r, peak_magnitude) = profile.peak();
    let csv = write_table(
        &["r", "magnitude"],
        profile.distances.iter().zip(&profile.magnitudes).map(|(&r, &m)| vec![r, m]),
    );
    let out = ForceOut {
        mu: a.scale.mu,
        big_n: n,
        sqrt_n: n.sqrt(),
        peak_r,
        peak_magnitude,
        grid_step: profile.grid_step(),
    };
    Ok(pair(
        Artifact::new("force.csv", csv),
        Artifact::json("force.json", &out)?,
        a.common.format,
        Format::Csv,
    ))
}

#[derive(Serialize)]
struct LemmaRow {
    d: usize,
    a: f64,
    first_moment: f64,
    mode_closed: Option<f64>,
    mode_numeric: Option<f64>,
}

fn lemmas(args: &LemmaCheckArgs) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for &d in &args.dims {
        for &a in &args.a_values {
            let (mode_closed, mode_numeric) = if d >= 4 {
                (Some(lemma_b_argmax(d, a)?), Some(lemma_b_numeric_argmax(d, a)?))
            } else {
                (None, None)
            };
            rows.push(LemmaRow {
                d,
                a,
                first_moment: lemma_a_check(d, a)?,
                mode_closed,
                mode_numeric,
            });
        }
    }
    let cell = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    let mut csv = String::from("d,a,first_moment,mode_closed,mode_numeric\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.d,
            format_number(r.a),
            format_number(r.first_moment),
            cell(r.mode_closed),
            cell(r.mode_numeric)
        );
    }
    Ok(pair(
        Artifact::new("lemmas.csv", csv),
        Artifact::json("lemmas.json", &rows)?,
        args.common.format,
        Format::Csv,
    ))
}

fn particles(a: &SimulateArgs) -> Result<Outcome, CliError> {
    let n = big_n(&a.scale, a.dim)?;
    let params = ParamSet::new(a.dim, a.scale.mu, n, 1.0)?;
    let mut config = SimConfig::new(params, a.count, a.steps, a.step_size, a.common.seed);
    config.init_scale = a.init_scale;
    config.record_every = a.record_every;
    let report = simulate(&config)?;
    let trace = write_table(
        &["step", "loss"],
        report.trace_steps.iter().zip(&report.loss_trace).map(|(&s, &l)| vec![s as f64, l]),
    );
    let points = Artifact::new("points.csv", write_batch(&report.final_batch, None));
    let json = Artifact::json("report.json", &report)?;
    let primary = match a.common.format.unwrap_or(Format::Json) {
        Format::Csv => 0,
        Format::Json => 1,
    };
    Ok(Outcome {
        files: vec![points, json, Artifact::new("trace.csv", trace)],
        primary,
    })
}

#[derive(Serialize)]
struct TrainOut {
    epochs: usize,
    train_count: usize,
    holdout_count: usize,
    final_recon: Option<f64>,
    final_reg: Option<f64>,
    encoder_widths: Vec<usize>,
    decoder_widths: Vec<usize>,
    big_n: f64,
    holdout_radial_mean: Option<f64>,
    holdout_radial_std: Option<f64>,
    holdout_eigenvalues: Option<Vec<f64>>,
}

fn train_model(a: &TrainArgs) -> Result<Outcome, CliError> {
    let dataset = load_data(&a.data, a.common.seed)?;
    let n = big_n(&a.scale, a.latent_dim)?;
    let params = ParamSet::new(a.latent_dim, a.scale.mu, n, a.lambda)?;
    let mut enc_widths = vec![dataset.dim()];
    enc_widths.extend(&a.hidden);
    enc_widths.push(a.latent_dim);
    let dec_widths: Vec<usize> = enc_widths.iter().rev().copied().collect();
    let mut config = TrainConfig::new(
        DenseNetSpec::encoder(enc_widths.clone())?,
        DenseNetSpec::decoder(dec_widths.clone())?,
        params,
    );
    config.batch_size = a.batch_size;
    config.epochs = a.epochs;
    config.learning_rate = a.learning_rate;
    config.weight_decay = a.weight_decay;
    config.adam_beta1 = a.adam_beta1;
    config.adam_beta2 = a.adam_beta2;
    config.adam_epsilon = a.adam_epsilon;
    config.holdout_fraction = a.holdout_fraction;
    config.seed = a.common.seed;
    let report = train(&config, &dataset)?;

    let holdout = &report.holdout_embedding;
    let (radial, eig) = if holdout.count() >= 2 {
        let (m, s) = radial_stats(holdout)?;
        (Some((m, s)), Some(latent::spectrum(holdout)?.eigenvalues))
    } else {
        (None, None)
    };
    let out = TrainOut {
        epochs: a.epochs,
        train_count: report.train_indices.len(),
        holdout_count: report.holdout_indices.len(),
        final_recon: report.recon_trace.last().copied(),
        final_reg: report.reg_trace.last().copied(),
        encoder_widths: enc_widths,
        decoder_widths: dec_widths,
        big_n: n,
        holdout_radial_mean: radial.map(|r| r.0),
        holdout_radial_std: radial.map(|r| r.1),
        holdout_eigenvalues: eig,
    };
    let trace = write_table(
        &["epoch", "recon", "reg"],
        report
            .recon_trace
            .iter()
            .zip(&report.reg_trace)
            .enumerate()
            .map(|(e, (&r, &g))| vec![e as f64, r, g]),
    );
    let holdout_labels = dataset.select(&report.holdout_indices).labels;
    let latent = encode_dataset(&report.model, &dataset)?;
    let primary = match a.common.format.unwrap_or(Format::Json) {
        Format::Csv => 0,
        Format::Json => 1,
    };
    Ok(Outcome {
        files: vec![
            Artifact::new("trace.csv", trace),
            Artifact::json("report.json", &out)?,
            Artifact::new("model.eae", encode_autoencoder(&report.model)?),
            Artifact::new("latent.csv", write_batch(&latent, dataset.labels.as_deref())),
            Artifact::new("holdout.csv", write_batch(holdout, holdout_labels.as_deref())),
        ],
        primary,
    })
}

fn encode(a: &EncodeArgs) -> Result<Outcome, CliError> {
    csv_only(a.common.format, "encode")?;
    let model = load_autoencoder(&a.model)?;
    let dataset = load_data(&a.data, a.common.seed)?;
    let latent = encode_dataset(&model, &dataset)?;
    Ok(Outcome::single(Artifact::new(
        "latent.csv",
        write_batch(&latent, dataset.labels.as_deref()),
    )))
}

#[derive(Serialize)]
struct SpectrumOut {
    #[serde(flatten)]
    report: latent::SpectrumReport,
    max_deviation_from_unit: f64,
    condition_ratio: f64,
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome, CliError> {
    let (batch, _) = read_embedding(&a.input)?;
    let report = latent::spectrum(&batch)?;
    let csv = write_table(
        &["k", "eigenvalue"],
        report.eigenvalues.iter().enumerate().map(|(k, &v)| vec![k as f64, v]),
    );
    let out = SpectrumOut {
        max_deviation_from_unit: report.max_deviation_from_unit(),
        condition_ratio: report.condition_ratio(),
        report,
    };
    Ok(pair(
        Artifact::new("eigenvalues.csv", csv),
        Artifact::json("spectrum.json", &out)?,
        a.common.format,
        Format::Json,
    ))
}

#[derive(Serialize)]
struct AlignOut {
    permutation_a: Vec<usize>,
    permutation_b: Vec<usize>,
    signs_a: Vec<i8>,
    signs_b: Vec<i8>,
    iterations: usize,
    converged: bool,
    correlation_split: &'static str,
    diagonal_mass_before: f64,
    diagonal_mass_after: f64,
    diagonal_after: Vec<f64>,
}

fn align_embeddings(a: &AlignArgs) -> Result<Outcome, CliError> {
    let (train_a, _) = read_embedding(&a.a)?;
    let (train_b, _) = read_embedding(&a.b)?;
    let tests = match (&a.a_test, &a.b_test) {
        (Some(ta), Some(tb)) => Some((read_embedding(ta)?, read_embedding(tb)?)),
        _ => None,
    };
    let to_embedding = |train: &PointBatch, other: Option<&PointBatch>| -> Result<(Embedding, Option<Embedding>), CliError> {
        if a.principal {
            let rep = latent::spectrum(train)?;
            let other = other.map(|o| rep.project(o)).transpose()?;
            Ok((rep.project(train)?, other))
        } else {
            Ok((Embedding::new(train.clone()), other.map(|o| Embedding::new(o.clone()))))
        }
    };
    let (ea, ta) = to_embedding(&train_a, tests.as_ref().map(|t| &t.0 .0))?;
    let (eb, tb) = to_embedding(&train_b, tests.as_ref().map(|t| &t.1 .0))?;
    let result = align(&ea, &eb)?;

    let (report_a, report_b, labels, split) = match (ta, tb) {
        (Some(ta), Some(tb)) => {
            let labels = tests.as_ref().and_then(|t| t.0 .1.clone());
            (ta, tb, labels, "test")
        }
        _ => (ea, eb, None, "train"),
    };
    let before = cross_correlation(&report_a, &report_b)?;
    let aligned_a = result.apply_p(&report_a)?;
    let aligned_b = result.apply_q(&report_b)?;
    let after = cross_correlation(&aligned_a, &aligned_b)?;
    let out = AlignOut {
        permutation_a: result.permutation_p.clone(),
        permutation_b: result.permutation_q.clone(),
        signs_a: result.signs_p.clone(),
        signs_b: result.signs_q.clone(),
        iterations: result.iterations,
        converged: result.converged,
        correlation_split: split,
        diagonal_mass_before: before.diagonal_mass(),
        diagonal_mass_after: after.diagonal_mass(),
        diagonal_after: after.diagonal(),
    };
    if !result.converged {
        eprintln!("warning: alignment stopped at the sweep cap without settling");
    }
    let d = before.dim;
    let primary = match a.common.format.unwrap_or(Format::Json) {
        Format::Csv => 1,
        Format::Json => 0,
    };
    Ok(Outcome {
        files: vec![
            Artifact::json("alignment.json", &out)?,
            Artifact::new("corr_after.csv", write_matrix(&after.values, d)),
            Artifact::new("corr_before.csv", write_matrix(&before.values, d)),
            Artifact::new("aligned_a.csv", write_batch(&aligned_a.coords, labels.as_deref())),
            Artifact::new("aligned_b.csv", write_batch(&aligned_b.coords, labels.as_deref())),
        ],
        primary,
    })
}

#[derive(Serialize)]
struct MetricsOut {
    #[serde(flatten)]
    similarity: latent::SimilarityMetrics,
    diagonal_mass: f64,
    degenerate_entries: Vec<bool>,
}

fn metrics(a: &MetricsArgs) -> Result<Outcome, CliError> {
    let (ba, _) = read_embedding(&a.a)?;
    let (bb, _) = read_embedding(&a.b)?;
    let (ea, eb) = (Embedding::new(ba), Embedding::new(bb));
    let corr = cross_correlation(&ea, &eb)?;
    let out = MetricsOut {
        similarity: similarity_metrics(&ea, &eb)?,
        diagonal_mass: corr.diagonal_mass(),
        degenerate_entries: corr.degenerate,
    };
    Ok(pair(
        Artifact::new("correlation.csv", write_matrix(&corr.values, corr.dim)),
        Artifact::json("metrics.json", &out)?,
        a.common.format,
        Format::Json,
    ))
}

fn sample(a: &SampleArgs) -> Result<Outcome, CliError> {
    csv_only(a.common.format, "sample")?;
    let reference = a.reference.as_deref().map(read_embedding).transpose()?.map(|r| r.0);
    let model = a.model.as_deref().map(load_autoencoder).transpose()?;
    let dim = a
        .dim
        .or(reference.as_ref().map(PointBatch::dim))
        .or(model.as_ref().map(|m| m.latent_dim()))
        .ok_or_else(|| CliError::Usage("missing key `dim` (or give `reference` or `model`)".into()))?;
    let mode = match a.mode {
        SampleKind::Standard => SampleMode::Standard,
        SampleKind::Matched => SampleMode::Matched,
    };
    let sampled = sample_latents(mode, reference.as_ref(), a.n, dim, a.common.seed)?;
    if sampled.rank_deficient {
        eprintln!("warning: reference has too few items for a full-rank covariance");
    }
    let mut files = vec![Artifact::new("samples.csv", write_batch(&sampled.batch, None))];
    if let Some(model) = &model {
        let mut rows = Vec::with_capacity(sampled.batch.count());
        for z in sampled.batch.rows() {
            rows.push(model.decoder.decode(z)?);
        }
        let decoded = PointBatch::from_rows(&rows)?;
        files.push(Artifact::new("decoded.csv", write_batch(&decoded, None)));
    }
    let primary = files.len() - 1;
    Ok(Outcome { files, primary })
}

#[derive(Serialize)]
struct KnnOut {
    k: usize,
    count: usize,
    error_rate: Option<f64>,
}

fn knn(a: &KnnArgs) -> Result<Outcome, CliError> {
    let (train, labels) = read_embedding(&a.train)?;
    let labels = labels.ok_or_else(|| {
        CliError::Validation(format!("{}: training CSV needs a final `label` column", a.train.display()))
    })?;
    let (test, truth) = read_embedding(&a.test)?;
    let res = knn_classify(&train, &labels, &test, a.k, truth.as_deref())?;
    let mut csv = String::from("index,prediction\n");
    for (i, p) in res.predictions.iter().enumerate() {
        let _ = writeln!(csv, "{i},{p}");
    }
    let out = KnnOut {
        k: a.k,
        count: res.predictions.len(),
        error_rate: res.error_rate,
    };
    Ok(pair(
        Artifact::new("predictions.csv", csv),
        Artifact::json("knn.json", &out)?,
        a.common.format,
        Format::Csv,
    ))
}

fn decode_components(a: &DecodeComponentsArgs) -> Result<Outcome, CliError> {
    csv_only(a.common.format, "decode-components")?;
    let (batch, _) = read_embedding(&a.input)?;
    let report = latent::spectrum(&batch)?;
    let pairs = match &a.model {
        Some(path) => {
            let model = load_autoencoder(path)?;
            decode_eigen_components(&model.decoder, &report, a.scale)?
        }
        None => decode_eigen_components(&IdentityDecoder(batch.dim()), &report, a.scale)?,
    };
    let width = pairs.first().map_or(0, |p| p.plus.len());
    let mut header = vec!["component".to_string(), "eigenvalue".into(), "direction".into()];
    header.extend((0..width).map(|k| format!("x{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = pairs.iter().flat_map(|p| {
        let head = |dir: f64| vec![p.component as f64, p.eigenvalue, dir];
        let mut plus = head(1.0);
        plus.extend(&p.plus);
        let mut minus = head(-1.0);
        minus.extend(&p.minus);
        [plus, minus]
    });
    Ok(Outcome::single(Artifact::new("components.csv", write_table(&header, rows))))
}
