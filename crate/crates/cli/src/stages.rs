use std::io::Write;

use anyhow::{bail, Context, Result};
use chrono::Datelike;
use serde::Serialize;

use variability::describe::{describe as describe_corpus, Description};
use variability::ingest::{parse_corpus, write_corpus_to, ColumnMapping};
use variability::models::{predict_decision_suite, ForestParams, SplitSpec, SuiteOptions, SvcParams};
use variability::scoring::{build_index, score_corpus_with, ConsistencyWeighting, ScoringOptions};
use variability::stats::{bag_importances, build_feature_matrix, prune_correlated_detailed, BaggingParams};
use variability::synth::{self, ScenarioConfig};
use variability::timeseries::{
    aggregate_weekly, decompose, fit_model, grid_search, write_decomposition_csv, CvOptions, FitOptions,
    DEFAULT_CHANGEPOINT_SCALES, DEFAULT_SEASONALITY_SCALES,
};
use variability::{ProceedingRecord, ReferenceTables, ScoreTable};

use crate::run::Run;
use crate::svg::{line_chart, Line};
use crate::{Common, CorrelateArgs, PredictArgs, ScoreArgs, SimulateArgs, TrendArgs};

pub struct Corpus {
    pub records: Vec<ProceedingRecord>,
    pub mapping: ColumnMapping,
}

fn tables(common: &Common) -> Result<ReferenceTables> {
    Ok(match (&common.administrations, &common.state_votes) {
        (Some(a), Some(s)) => ReferenceTables::load(a, s)?,
        _ => ReferenceTables::shipped(),
    })
}

pub fn simulate(run: &mut Run, common: &Common, args: &SimulateArgs) -> Result<()> {
    run.stage("simulate", |st| {
        let mut config = match &args.scenario {
            Some(p) => ScenarioConfig::load(p)?,
            None => ScenarioConfig::default(),
        };
        // an explicit --seed wins over the scenario file
        if args.scenario.is_none() || common.seed != 0 {
            config.seed = common.seed;
        }
        if let Some(n) = args.cases {
            config.cases = n;
        }
        if let Some(d) = args.climate_effect {
            config.climate_effect = d;
        }
        let records = synth::generate_with_tables(&config, &tables(common)?)?;
        st.write("corpus.csv", |w| Ok(write_corpus_to(&records, w)?))?;
        let text = toml::to_string_pretty(&config).context("serializing scenario")?;
        st.write("scenario.toml", |w| Ok(w.write_all(text.as_bytes())?))?;
        Ok(())
    })?;
    if let Some(p) = &args.scenario {
        run.add_input(p)?;
    }
    Ok(())
}

pub fn ingest(run: &mut Run, common: &Common, write_corpus: bool) -> Result<Corpus> {
    run.stage("ingest", |st| {
        let Some(input) = &common.input else {
            bail!("--input is required");
        };
        let mapping = match &common.mapping {
            Some(p) => ColumnMapping::load(p)?,
            None => ColumnMapping::canonical(),
        };
        let (records, report) = parse_corpus(input, &mapping, &tables(common)?)?;
        for w in &report.warnings {
            st.warn(w.clone());
        }
        if report.rejected > 0 {
            st.warn(format!("{} of {} rows rejected", report.rejected, report.rows_read));
        }
        if records.is_empty() {
            bail!("no usable rows in {}", input.display());
        }
        st.json("ingest_report.json", &report)?;
        if write_corpus {
            st.write("corpus.csv", |w| Ok(write_corpus_to(&records, w)?))?;
        }
        Ok(Corpus { records, mapping })
    })
}

pub fn describe(run: &mut Run, corpus: &Corpus, plots: bool) -> Result<()> {
    run.stage("describe", |st| {
        let desc = describe_corpus(&corpus.records)?;
        st.write("describe_years.csv", |w| Ok(desc.write_years_csv(w)?))?;
        st.write("describe_custody.csv", |w| Ok(Description::write_breakdown_csv(&desc.by_custody, w)?))?;
        st.write("describe_duration.csv", |w| Ok(Description::write_breakdown_csv(&desc.by_duration, w)?))?;
        if plots {
            let grant = desc.years.iter().map(|y| (y.year as f64, y.grant_rate)).collect();
            let rep = desc
                .years
                .iter()
                .filter_map(|y| y.representation_rate.map(|r| (y.year as f64, r)))
                .collect();
            let svg = line_chart(
                "Grant and representation rates",
                "decision year",
                &[
                    Line { label: "grant rate", color: "#1f77b4", points: grant },
                    Line { label: "represented", color: "#ff7f0e", points: rep },
                ],
            );
            st.write("grant_rate.svg", |w| Ok(w.write_all(svg.as_bytes())?))?;
        }
        Ok(())
    })
}

pub fn score(run: &mut Run, corpus: &Corpus, args: &ScoreArgs) -> Result<ScoreTable> {
    run.stage("score", |st| {
        let index = build_index(&corpus.records);
        let options = ScoringOptions {
            weighting: if args.judge_weighted {
                ConsistencyWeighting::JudgeMajority
            } else {
                ConsistencyWeighting::PerProceeding
            },
        };
        let table = score_corpus_with(&corpus.records, &index, options)?;
        let summary = table.summary();
        if summary.gamma_count == 0 {
            st.warn("no proceeding has a partisanship score");
        }
        st.write("proceeding_scores.csv", |w| Ok(table.write_proceedings_csv(w)?))?;
        st.write("judge_scores.csv", |w| Ok(table.write_judges_csv(w)?))?;
        st.json("score_summary.json", &summary)?;
        Ok(table)
    })
}

#[derive(Serialize)]
struct CorrelateSummary {
    rows: usize,
    prune: variability::stats::PruneReport,
    targets: Vec<TargetSummary>,
}

#[derive(Serialize)]
struct TargetSummary {
    target: &'static str,
    rows: usize,
    tested: usize,
    significant: Vec<String>,
}

pub fn correlate(run: &mut Run, corpus: &Corpus, scores: &ScoreTable, args: &CorrelateArgs, seed: u64) -> Result<()> {
    run.stage("correlate", |st| {
        let decided: Vec<ProceedingRecord> =
            corpus.records.iter().filter(|r| r.decision.is_decided()).cloned().collect();
        let full = build_feature_matrix(&decided, &corpus.mapping.null_indicators)?;
        let (matrix, prune) = prune_correlated_detailed(&full, args.prune_threshold);
        let lookup = scores.lookup();
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let omega: Vec<f64> = decided
            .iter()
            .map(|r| nan(lookup.get(&*r.proceeding_id).and_then(|s| s.omega)))
            .collect();
        let gamma: Vec<f64> = decided
            .iter()
            .map(|r| nan(lookup.get(&*r.proceeding_id).and_then(|s| s.gamma)))
            .collect();
        let phi: Vec<f64> = decided
            .iter()
            .map(|r| nan(r.judge_id.as_deref().and_then(|j| scores.phi_of(j))))
            .collect();

        let mut targets = Vec::new();
        for (k, (name, target)) in [("omega", omega), ("gamma", gamma), ("phi", phi)].into_iter().enumerate() {
            let rows = target.iter().filter(|v| !v.is_nan()).count();
            let params = BaggingParams {
                replicates: args.replicates,
                sample_size: args.sample_size.min(rows.max(2)),
                task: None,
                forest: ForestParams {
                    n_trees: args.trees,
                    max_samples: Some(args.max_samples),
                    ..ForestParams::default()
                },
                alpha: args.alpha,
                seed: seed.wrapping_add(k as u64),
            };
            let summary = match bag_importances(&matrix, &target, &params) {
                Ok(s) => s,
                Err(e) => {
                    st.warn(format!("{name}: skipped ({e})"));
                    continue;
                }
            };
            st.write(&format!("importances_{name}.csv"), |w| Ok(summary.write_csv(w)?))?;
            targets.push(TargetSummary {
                target: name,
                rows: summary.rows,
                tested: summary.tested,
                significant: summary
                    .features
                    .iter()
                    .filter(|f| f.significant)
                    .map(|f| f.feature.clone())
                    .collect(),
            });
        }
        st.json(
            "correlate_summary.json",
            &CorrelateSummary {
                rows: decided.len(),
                prune,
                targets,
            },
        )
    })
}

pub fn predict(run: &mut Run, corpus: &Corpus, scores: &ScoreTable, args: &PredictArgs, seed: u64) -> Result<()> {
    run.stage("predict", |st| {
        let options = SuiteOptions {
            split: SplitSpec {
                train_fraction: args.train_fraction,
                seed,
            },
            svc: SvcParams {
                c: args.svc_c,
                seed,
                ..SvcParams::default()
            },
            ..SuiteOptions::default()
        };
        let report = predict_decision_suite(scores, &corpus.records, &options)?;
        for w in &report.warnings {
            st.warn(w.clone());
        }
        st.write("predict_report.json", |w| {
            report.write_json(&mut *w)?;
            writeln!(w)?;
            Ok(())
        })
    })
}

pub fn trend(run: &mut Run, corpus: &Corpus, scores: &ScoreTable, args: &TrendArgs, plots: bool) -> Result<()> {
    run.stage("trend", |st| {
        let series = aggregate_weekly(scores, &corpus.records)?;
        st.write("weekly_gamma.csv", |w| Ok(series.write_csv(w)?))?;
        let mut options = FitOptions {
            changepoint_scale: args.changepoint_scale,
            seasonality_scale: args.seasonality_scale,
            n_changepoints: args.n_changepoints,
            fourier_order: args.fourier_order,
            count_weighted: args.count_weighted_weeks,
            ..FitOptions::default()
        };
        if args.grid_search {
            let result = grid_search(
                &series,
                &DEFAULT_CHANGEPOINT_SCALES,
                &DEFAULT_SEASONALITY_SCALES,
                &options,
                &CvOptions::default(),
            )?;
            st.json("trend_cv.json", &result)?;
            options.changepoint_scale = result.best.changepoint_scale;
            options.seasonality_scale = result.best.seasonality_scale;
        }
        let model = fit_model(&series, &options)?;
        if !model.diagnostics.converged {
            st.warn("trend fit stopped before converging");
        }
        st.json("trend_model.json", &model)?;
        let (Some(first), Some(last)) = (series.first_week(), series.last_week()) else {
            bail!("empty weekly series");
        };
        let rows = decompose(&model, first, last, Some(&series));
        st.write("trend_decomposition.csv", |w| Ok(write_decomposition_csv(&rows, w)?))?;
        if plots {
            let x = |d: chrono::NaiveDate| d.year() as f64 + d.ordinal0() as f64 / 365.25;
            let actual = rows.iter().filter_map(|r| r.actual.map(|a| (x(r.week_start), a))).collect();
            let fitted = rows.iter().map(|r| (x(r.week_start), r.fitted)).collect();
            let trend = rows.iter().map(|r| (x(r.week_start), r.trend)).collect();
            let svg = line_chart(
                "Weekly partisanship",
                "year",
                &[
                    Line { label: "weekly mean", color: "#bbbbbb", points: actual },
                    Line { label: "fitted", color: "#1f77b4", points: fitted },
                    Line { label: "trend", color: "#d62728", points: trend },
                ],
            );
            st.write("trend.svg", |w| Ok(w.write_all(svg.as_bytes())?))?;
        }
        Ok(())
    })
}
