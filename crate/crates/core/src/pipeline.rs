//! End-to-end flow: encode → audit → split → (reweigh | pass) → train →
//! evaluate → re-audit → verdict.
//!
//! The dataset-level audit looks at labels over the full table, but
//! reweighing weights are computed from the training partition alone so the
//! test split never informs training. Every learner is trained twice on the
//! same split: once with unit weights ("original") and once with the
//! reweighed training data ("transformed").

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, EncodeConfig, EncodedDataset, GroupSpec, RecordTable};
use crate::error::{Error, Result};
use crate::fairness::{self, AuditReport, FairnessReport, DEFAULT_AUDIT_THRESHOLD};
use crate::learners::{classify, GbmHyper, LearnerSpec, LogisticHyper, Model};
use crate::posthoc::{self, CostKind, EqOddsMixer};
use crate::reweigh::{self, ReweighingWeights};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortFilter {
    pub column: String,
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PosthocConfig {
    pub enabled: bool,
    pub cost_kind: CostKind,
    /// Learner whose original scores get post-processed; the first learner if unset.
    pub learner: Option<String>,
}

impl Default for PosthocConfig {
    fn default() -> Self {
        Self { enabled: false, cost_kind: CostKind::Gfpr, learner: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data_path: String,
    pub id_columns: Vec<String>,
    pub label_column: String,
    pub numeric_columns: Vec<String>,
    pub include_protected: bool,
    pub cohort_filter: Option<CohortFilter>,
    pub group_specs: Vec<GroupSpec>,
    pub mitigation_spec: String,
    pub audit_threshold: f64,
    /// Score cut-off turning probabilities into predicted labels.
    pub decision_threshold: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub learners: Vec<LearnerSpec>,
    pub posthoc: PosthocConfig,
    pub report_path: String,
    /// Reruns with reweighing forced on while the verdict is `reprocess`.
    pub max_reprocess: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let enc = EncodeConfig::default();
        Self {
            data_path: "diabetic_data.csv".into(),
            id_columns: enc.id_columns,
            label_column: enc.label_column,
            numeric_columns: enc.numeric_columns,
            include_protected: enc.include_protected,
            cohort_filter: None,
            group_specs: enc.group_specs,
            mitigation_spec: "age".into(),
            audit_threshold: DEFAULT_AUDIT_THRESHOLD,
            decision_threshold: 0.5,
            test_fraction: 0.3,
            seed: 42,
            learners: vec![
                LearnerSpec::Logistic { name: "LG".into(), hyper: LogisticHyper::default() },
                LearnerSpec::Gbm { name: "GBM".into(), hyper: GbmHyper::default() },
            ],
            posthoc: PosthocConfig::default(),
            report_path: "report".into(),
            max_reprocess: 0,
        }
    }
}

impl PipelineConfig {
    pub fn encode_config(&self) -> EncodeConfig {
        EncodeConfig {
            id_columns: self.id_columns.clone(),
            label_column: self.label_column.clone(),
            numeric_columns: self.numeric_columns.clone(),
            group_specs: self.group_specs.clone(),
            include_protected: self.include_protected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.group_specs.is_empty() {
            return bad("group_specs is empty".into());
        }
        for (i, spec) in self.group_specs.iter().enumerate() {
            spec.validate()?;
            if self.group_specs[..i].iter().any(|s| s.name == spec.name) {
                return bad(format!("duplicate group spec name `{}`", spec.name));
            }
        }
        if !self.group_specs.iter().any(|s| s.name == self.mitigation_spec) {
            return bad(format!("mitigation_spec `{}` is not one of group_specs", self.mitigation_spec));
        }
        if !(0.0..=1.0).contains(&self.audit_threshold) {
            return bad(format!("audit_threshold {} outside [0, 1]", self.audit_threshold));
        }
        if !(0.0..=1.0).contains(&self.decision_threshold) {
            return bad(format!("decision_threshold {} outside [0, 1]", self.decision_threshold));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction {} must lie strictly between 0 and 1", self.test_fraction));
        }
        if self.learners.is_empty() {
            return bad("learners is empty".into());
        }
        for (i, l) in self.learners.iter().enumerate() {
            l.validate()?;
            if self.learners[..i].iter().any(|o| o.name() == l.name()) {
                return bad(format!("duplicate learner name `{}`", l.name()));
            }
        }
        if let Some(name) = &self.posthoc.learner {
            if !self.learners.iter().any(|l| l.name() == name) {
                return bad(format!("posthoc learner `{name}` is not configured"));
            }
        }
        Ok(())
    }

    fn mitigation_group(&self) -> &GroupSpec {
        self.group_specs.iter().find(|s| s.name == self.mitigation_spec).expect("validated")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Filter,
    Encode,
    Audit,
    Split,
    Mitigate,
    Train,
    Evaluate,
    Posthoc,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Filter => "filter",
            Stage::Encode => "encode",
            Stage::Audit => "audit",
            Stage::Split => "split",
            Stage::Mitigate => "mitigate",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Posthoc => "posthoc",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("stage `{stage}`: {error}")]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Deploy,
    Reprocess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweighingSummary {
    pub forced: bool,
    pub weights: ReweighingWeights,
    /// Disparate impact of the training labels under the new weights.
    pub weighted_train_di: f64,
    pub weight_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub kind: String,
    pub n_features: usize,
    pub final_train_loss: f64,
    /// Gradient-descent iterations or boosting rounds.
    pub iterations: usize,
}

impl ModelSummary {
    fn of(model: &Model) -> Self {
        let (kind, iterations) = match model {
            Model::Logistic(m) => ("logistic", m.iterations),
            Model::Gbm(m) => ("gbm", m.trees.len()),
        };
        Self { kind: kind.into(), n_features: model.n_features(), final_train_loss: model.final_loss(), iterations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerResult {
    pub name: String,
    pub original_model: ModelSummary,
    pub transformed_model: ModelSummary,
    /// One report per group spec, in config order.
    /// Trained with unit weights ("Original").
    pub before: Vec<FairnessReport>,
    /// Trained on the reweighed partition ("Transformed").
    pub after: Vec<FairnessReport>,
}

impl LearnerResult {
    pub fn original_for(&self, spec: &str) -> Option<&FairnessReport> {
        self.before.iter().find(|r| r.spec_name == spec)
    }

    pub fn transformed_for(&self, spec: &str) -> Option<&FairnessReport> {
        self.after.iter().find(|r| r.spec_name == spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosthocResult {
    pub learner: String,
    pub mixer: EqOddsMixer,
    pub report: FairnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub config: PipelineConfig,
    pub metrics_scope: String,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub decision_log: Vec<String>,
    pub dataset_audit: Vec<AuditReport>,
    pub reweighing_cells: Option<ReweighingSummary>,
    pub learners: Vec<LearnerResult>,
    pub posthoc: Option<PosthocResult>,
    pub reprocess_rounds: usize,
    pub final_verdict: Option<Verdict>,
    pub error: Option<StageFailure>,
}

impl PipelineReport {
    pub fn new(config: &PipelineConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config: config.clone(),
            metrics_scope: "test_split".into(),
            n_rows: 0,
            n_train: 0,
            n_test: 0,
            n_features: 0,
            decision_log: Vec::new(),
            dataset_audit: Vec::new(),
            reweighing_cells: None,
            learners: Vec::new(),
            posthoc: None,
            reprocess_rounds: 0,
            final_verdict: None,
            error: None,
        }
    }

    /// Report for a run that failed before (or while) producing results.
    pub fn failed(config: &PipelineConfig, err: &StageError) -> Self {
        let mut r = Self::new(config);
        r.mark_failed(err);
        r
    }

    fn mark_failed(&mut self, err: &StageError) {
        self.decision_log.push(format!("error at stage {}: {}", err.stage, err.error));
        self.error = Some(StageFailure { stage: err.stage, message: err.error.to_string() });
    }

    fn log(&mut self, line: String) {
        self.decision_log.push(line);
    }
}

/// A trained model kept alongside the report.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub learner: String,
    pub variant: &'static str,
    pub model: Model,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: PipelineReport,
    pub models: Vec<TrainedModel>,
}

/// Audits the labels of every group spec over the whole table.
pub fn audit_table(table: &RecordTable, config: &PipelineConfig) -> core::result::Result<Vec<AuditReport>, StageError> {
    config.validate().at(Stage::Config)?;
    let mut table = table.clone();
    apply_filter(&mut table, config).at(Stage::Filter)?;
    let labels = dataset::derive_label(&table, &config.label_column).at(Stage::Encode)?;
    config
        .group_specs
        .iter()
        .map(|spec| {
            let (group, mask) = dataset::binarize_protected(&table, spec).at(Stage::Encode)?;
            fairness::audit(&labels, &group, &mask, &spec.name, spec.favorable_label, config.audit_threshold)
                .at(Stage::Audit)
        })
        .collect()
}

fn apply_filter(table: &mut RecordTable, config: &PipelineConfig) -> Result<usize> {
    match &config.cohort_filter {
        Some(f) => table.exclude_rows(&f.column, &f.exclude),
        None => Ok(0),
    }
}

/// Runs the pipeline, rerunning with reweighing forced on (up to
/// `max_reprocess` times) while the verdict is `reprocess`.
pub fn run(table: &RecordTable, config: &PipelineConfig) -> RunOutput {
    let mut out = run_once(table, config, false);
    let mut log = Vec::new();
    let mut round = 0;
    while round < config.max_reprocess && out.report.final_verdict == Some(Verdict::Reprocess) {
        if out.report.reweighing_cells.is_some() {
            // A rerun is deterministic and would repeat this result; keep the verdict line last.
            let at = out.report.decision_log.len().saturating_sub(1);
            out.report
                .decision_log
                .insert(at, "reprocess: reweighing already applied, no rerun".into());
            break;
        }
        round += 1;
        log.append(&mut out.report.decision_log);
        log.push(format!("reprocess round {round}: rerunning with reweighing forced on"));
        out = run_once(table, config, true);
    }
    if !log.is_empty() {
        log.append(&mut out.report.decision_log);
        out.report.decision_log = log;
    }
    out.report.reprocess_rounds = round;
    out
}

fn run_once(table: &RecordTable, config: &PipelineConfig, force_reweigh: bool) -> RunOutput {
    let mut report = PipelineReport::new(config);
    let mut models = Vec::new();
    if let Err(err) = run_stages(table, config, force_reweigh, &mut report, &mut models) {
        report.mark_failed(&err);
    }
    RunOutput { report, models }
}

fn run_stages(
    table: &RecordTable,
    config: &PipelineConfig,
    force_reweigh: bool,
    report: &mut PipelineReport,
    models: &mut Vec<TrainedModel>,
) -> core::result::Result<(), StageError> {
    config.validate().at(Stage::Config)?;
    report.log(format!("loaded {} rows", table.n_rows()));

    let mut table = table.clone();
    if let Some(f) = &config.cohort_filter {
        let removed = apply_filter(&mut table, config).at(Stage::Filter)?;
        report.log(format!("cohort filter: removed {removed} rows by `{}`", f.column));
    }

    let data = dataset::encode_features(&table, &config.encode_config()).at(Stage::Encode)?;
    report.n_rows = data.n_rows();
    report.n_features = data.n_features();
    report.log(format!("encoded {} rows into {} features", data.n_rows(), data.n_features()));

    for spec in &config.group_specs {
        let p = data.protected(&spec.name).at(Stage::Audit)?;
        let a = fairness::audit(&data.labels, &p.values, &p.missing, &spec.name, spec.favorable_label, config.audit_threshold)
            .at(Stage::Audit)?;
        let flipped = fairness::disparate_impact(&data.labels, &p.values, &p.missing, 1 - spec.favorable_label)
            .map(|d| format!("{:.6}", fairness::di_score(d.value)))
            .unwrap_or_else(|e| e.to_string());
        report.log(format!(
            "dataset audit [{}] (favorable label {}): DI {:.6}, di_score {:.6} → {}; flipped orientation di_score {}",
            spec.name,
            spec.favorable_label,
            a.di,
            a.di_score,
            if a.biased { "biased" } else { "fair" },
            flipped
        ));
        report.dataset_audit.push(a);
    }
    let mitigation = config.mitigation_group();
    let flagged = report.dataset_audit.iter().find(|a| a.spec_name == mitigation.name).is_some_and(|a| a.biased);

    let (train, test) = dataset::split(&data, config.test_fraction, config.seed).at(Stage::Split)?;
    report.n_train = train.n_rows();
    report.n_test = test.n_rows();
    report.log(format!(
        "split: {} train / {} test (test_fraction {}, seed {})",
        train.n_rows(),
        test.n_rows(),
        config.test_fraction,
        config.seed
    ));

    let transformed_train = if flagged || force_reweigh {
        let rw = reweigh::compute_weights(&train, &mitigation.name).at(Stage::Mitigate)?;
        let reweighed = reweigh::apply_weights(&train, &rw).at(Stage::Mitigate)?;
        let p = reweighed.protected(&mitigation.name).at(Stage::Mitigate)?;
        let di = fairness::weighted_disparate_impact(
            &reweighed.labels,
            &p.values,
            &p.missing,
            p.favorable_label,
            Some(&reweighed.weights),
        )
        .at(Stage::Mitigate)?;
        report.log(if flagged {
            format!("dataset audit: biased → reweighing applied on training partition ({})", mitigation.name)
        } else {
            format!("dataset audit: fair, reweighing forced on training partition ({})", mitigation.name)
        });
        report.reweighing_cells = Some(ReweighingSummary {
            forced: !flagged,
            weights: rw,
            weighted_train_di: di.value,
            weight_sum: reweighed.weights.iter().sum(),
        });
        reweighed
    } else {
        report.log(format!("dataset audit: fair → standard preprocessing, no reweighing ({})", mitigation.name));
        train.clone()
    };

    let y_test = &test.labels;
    for learner in &config.learners {
        let original = learner.train(&train).at(Stage::Train)?;
        let transformed = learner.train(&transformed_train).at(Stage::Train)?;
        let evaluate_all = |model: &Model| -> core::result::Result<Vec<FairnessReport>, StageError> {
            let scores = model.predict_scores(&test.features).at(Stage::Evaluate)?;
            let y_hat = classify(&scores, config.decision_threshold);
            test.protected
                .iter()
                .map(|p| fairness::evaluate(y_test, &y_hat, p, config.audit_threshold).at(Stage::Evaluate))
                .collect()
        };
        let result = LearnerResult {
            name: learner.name().into(),
            original_model: ModelSummary::of(&original),
            transformed_model: ModelSummary::of(&transformed),
            before: evaluate_all(&original)?,
            after: evaluate_all(&transformed)?,
        };
        let re = result.transformed_for(&mitigation.name).expect("every spec evaluated");
        report.log(format!(
            "re-audit [{} / {}]: test DI {:.6} → {}",
            learner.name(),
            mitigation.name,
            re.di,
            if re.biased { "biased" } else { "fair" }
        ));
        report.learners.push(result);

        if config.posthoc.enabled && config.posthoc.learner.as_deref().unwrap_or(config.learners[0].name()) == learner.name() {
            report.posthoc = Some(run_posthoc(config, &train, &test, learner.name(), &original).at(Stage::Posthoc)?);
            report.log(format!("posthoc: calibrated equalized odds applied to {}", learner.name()));
        }

        models.push(TrainedModel { learner: learner.name().into(), variant: "original", model: original });
        models.push(TrainedModel { learner: learner.name().into(), variant: "transformed", model: transformed });
    }

    let pass = report
        .learners
        .iter()
        .all(|l| l.transformed_for(&mitigation.name).is_some_and(|r| !r.biased));
    let verdict = if pass { Verdict::Deploy } else { Verdict::Reprocess };
    report.final_verdict = Some(verdict);
    report.log(format!("final verdict: {}", if pass { "deploy" } else { "reprocess" }));
    Ok(())
}

fn run_posthoc(
    config: &PipelineConfig,
    train: &EncodedDataset,
    test: &EncodedDataset,
    learner: &str,
    model: &Model,
) -> Result<PosthocResult> {
    let spec = &config.mitigation_spec;
    let p_train = train.protected(spec)?;
    let train_scores = model.predict_scores(&train.features)?;
    let mixer = posthoc::fit_mixer(
        &train_scores,
        &train.labels,
        &p_train.values,
        &p_train.missing,
        config.posthoc.cost_kind,
        None,
    )?;
    let p_test = test.protected(spec)?;
    let test_scores = model.predict_scores(&test.features)?;
    let mixed = posthoc::apply_mixer(&mixer, &test_scores, &p_test.values, &p_test.missing, config.seed);
    let y_hat = classify(&mixed, config.decision_threshold);
    let report = fairness::evaluate(&test.labels, &y_hat, p_test, config.audit_threshold)?;
    Ok(PosthocResult { learner: learner.into(), mixer, report })
}
