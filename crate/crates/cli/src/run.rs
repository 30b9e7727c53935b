use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use affect_probe::report;
use affect_probe::synth::generate;
use affect_probe::{
    aggregate_first_pc, align, load_word_sample, parse_embedding_text_filtered, parse_lexicon, parse_occurrences,
    run_classifier_probe, run_pca_probe, run_similarity_probe, AffectLexicon, AggregateOptions, Dimension,
    EmbeddingTable, SynthConfig, WordSample,
};

use crate::args::{AggregateArgs, Format, ProbeArgs, ProbeKind, SynthArgs};
use crate::config::RunConfig;
use crate::CliError;

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path.display(), e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

fn sample_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".into())
}

fn load_sample(path: &Path) -> Result<WordSample, CliError> {
    load_word_sample(open(path)?, &sample_label(path)).map_err(|e| CliError::data(path.display(), e))
}

fn load_tables(config: &RunConfig, lexicon: &AffectLexicon) -> Result<Vec<EmbeddingTable>, CliError> {
    let mut tables = Vec::new();
    for src in &config.embeddings {
        let table = parse_embedding_text_filtered(open(&src.path)?, &src.label, |w| lexicon.contains(w))
            .map_err(|e| CliError::data(src.path.display(), e))?;
        tables.push(table);
    }
    let opts = AggregateOptions {
        center: config.center_aggregation,
    };
    for src in &config.occurrences {
        let occ = parse_occurrences(open(&src.path)?).map_err(|e| CliError::data(src.path.display(), e))?;
        let table = aggregate_first_pc(&occ, &src.label, opts).map_err(|e| CliError::data(src.path.display(), e))?;
        tables.push(table);
    }
    Ok(tables)
}

/// Writes the CSV report plus any requested Markdown/JSON mirrors.
fn write_reports<T: serde::Serialize>(
    config: &RunConfig,
    stem: &str,
    csv: &str,
    markdown: impl FnOnce() -> String,
    value: &T,
) -> Result<(), CliError> {
    let out = &config.out;
    write_file(&out.join(format!("{stem}.csv")), csv)?;
    if config.wants(Format::Md) {
        write_file(&out.join(format!("{stem}.md")), &markdown())?;
    }
    if config.wants(Format::Json) {
        let json = report::to_json(value).map_err(|e| CliError::data(stem, e))?;
        write_file(&out.join(format!("{stem}.json")), &json)?;
    }
    Ok(())
}

pub fn validate(args: &ProbeArgs) -> Result<(), CliError> {
    let config = RunConfig::from_args(args)?;
    let probes: Vec<&str> = config
        .probes
        .iter()
        .map(|p| match p {
            ProbeKind::Pca => "pca",
            ProbeKind::Similarity => "similarity",
            ProbeKind::Classifier => "classifier",
        })
        .collect();
    println!(
        "ok: {} source(s), probes: {}",
        config.embeddings.len() + config.occurrences.len(),
        probes.join(",")
    );
    Ok(())
}

pub fn probe(args: &ProbeArgs) -> Result<(), CliError> {
    let config = RunConfig::from_args(args)?;
    let lexicon = parse_lexicon(open(&config.lexicon)?).map_err(|e| CliError::data(config.lexicon.display(), e))?;
    let tables = load_tables(&config, &lexicon)?;
    fs::create_dir_all(&config.out).map_err(|e| CliError::io(config.out.display(), e))?;

    let needs_alignment = config.probes.iter().any(|p| *p != ProbeKind::Similarity);
    let datasets = if needs_alignment {
        align(&tables, &lexicon).map_err(|e| CliError::data("aligning embeddings with the lexicon", e))?
    } else {
        Vec::new()
    };

    if config.probes.contains(&ProbeKind::Pca) {
        let rep = run_pca_probe(&datasets, config.k).map_err(|e| CliError::data("pca probe", e))?;
        write_reports(&config, "pca_probe", &report::pca_csv(&rep), || report::pca_markdown(&rep), &rep)?;
        write_file(
            &config.out.join("explained_variance.csv"),
            &report::explained_variance_csv(&rep),
        )?;
        if config.plots {
            for summary in &rep.embeddings {
                for dim in Dimension::ALL {
                    let path = config.out.join(report::scatter_file_name(&summary.embedding, dim));
                    write_file(&path, &report::scatter_svg(summary, dim))?;
                }
            }
        }
    }

    if config.probes.contains(&ProbeKind::Similarity) {
        let path = config.sample.as_deref().expect("validated");
        let sample = load_sample(path)?;
        let rep = run_similarity_probe(&sample, &lexicon, &tables).map_err(|e| CliError::data("similarity probe", e))?;
        write_reports(
            &config,
            "similarity_probe",
            &report::similarity_csv(&rep),
            || report::similarity_markdown(&rep),
            &rep,
        )?;
    }

    if config.probes.contains(&ProbeKind::Classifier) {
        let path = config.test_sample.as_deref().expect("validated");
        let sample = load_sample(path)?;
        let rep = run_classifier_probe(
            &datasets,
            &lexicon,
            &sample,
            &config.split,
            &config.train,
            &config.classifier,
        )
        .map_err(|e| CliError::data("classifier probe", e))?;
        write_reports(
            &config,
            "classifier_probe",
            &report::classifier_csv(&rep),
            || report::classifier_markdown(&rep),
            &rep,
        )?;
        if config.save_models {
            let dir = config.out.join("models");
            fs::create_dir_all(&dir).map_err(|e| CliError::io(dir.display(), e))?;
            for (cell, model) in rep.cells.iter().zip(&rep.models) {
                let path = dir.join(format!("{}_{}.model", cell.embedding, cell.dimension));
                write_file(&path, &model.to_record())?;
            }
        }
    }
    Ok(())
}

pub fn aggregate(args: &AggregateArgs) -> Result<(), CliError> {
    let occ = parse_occurrences(open(&args.input)?).map_err(|e| CliError::data(args.input.display(), e))?;
    let opts = AggregateOptions {
        center: !args.no_center_aggregation,
    };
    let table = aggregate_first_pc(&occ, "aggregated", opts).map_err(|e| CliError::data(args.input.display(), e))?;
    let file = File::create(&args.out).map_err(|e| CliError::io(args.out.display(), e))?;
    let mut w = BufWriter::new(file);
    table.write_text(&mut w).map_err(|e| CliError::data(args.out.display(), e))?;
    w.flush().map_err(|e| CliError::io(args.out.display(), e))
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = SynthConfig::new(args.n_words, args.dim, args.seed)
        .with_snr(Dimension::Valence, args.snr_valence)
        .with_snr(Dimension::Arousal, args.snr_arousal)
        .with_snr(Dimension::Dominance, args.snr_dominance);
    let config = SynthConfig {
        noise_sigma: args.noise_sigma,
        ..config
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let source = match &args.lexicon {
        Some(p) => Some(parse_lexicon(open(p)?).map_err(|e| CliError::data(p.display(), e))?),
        None => None,
    };
    let (table, lexicon) = generate(&config, source.as_ref()).map_err(|e| CliError::data("synth", e))?;

    fs::create_dir_all(&args.out).map_err(|e| CliError::io(args.out.display(), e))?;
    let header = config.header();
    let mut emb = Vec::new();
    writeln!(emb, "{header}").expect("in-memory write");
    table.write_text(&mut emb).map_err(|e| CliError::data("synth", e))?;
    let mut lex = Vec::new();
    writeln!(lex, "{header}").expect("in-memory write");
    lexicon.write_tsv(&mut lex).map_err(|e| CliError::data("synth", e))?;

    let emb_path = args.out.join("synth_embeddings.txt");
    let lex_path = args.out.join("synth_lexicon.tsv");
    fs::write(&emb_path, emb).map_err(|e| CliError::io(emb_path.display(), e))?;
    fs::write(&lex_path, lex).map_err(|e| CliError::io(lex_path.display(), e))?;
    Ok(())
}
