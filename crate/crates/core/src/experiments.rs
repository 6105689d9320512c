//! Cross-corpus train/eval matrices, training-size curves and field
//! ablations, driven either directly from in-memory corpora or from a JSON
//! plan file that also fixes the output directory.
//!
//! Training failures do not abort a grid: the affected cells are marked
//! failed, the completed ones are still written, and the manifest records
//! every failure.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::corpus::{read_corpus, read_text, write_text, Corpus};
use crate::crf::{predict_all, train, CrfModel, TrainConfig, MODEL_FORMAT};
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::label::LabelSet;
use crate::metrics::{compare_reports, evaluate, evaluate_within, fmt_num, Comparison, EvalReport, Level};

pub const MATRIX_VERSION_LINE: &str = "# citecrf-matrix-v1";
pub const MATRIX_HEADER: &str = "train,eval,instances,field_macro_f1,field_micro_f1,token_macro_f1,token_micro_f1,status";
pub const CURVE_VERSION_LINE: &str = "# citecrf-curve-v1";
pub const ABLATION_VERSION_LINE: &str = "# citecrf-ablation-v1";
pub const ABLATION_HEADER: &str =
    "train,eval,level,full_macro_f1,reduced_macro_f1,absolute_change,relative_change,status";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const DEFAULT_SIZES: [usize; 6] = [1000, 3000, 5000, 10000, 20000, 40000];

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}

/// Label subsets of the two ablation arms. Without `full`, the full arm keeps
/// every label its training corpus declares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmLabels {
    #[serde(default)]
    pub full: Option<LabelSet>,
    pub reduced: LabelSet,
}

/// An experiment plan as read from JSON. Corpus paths and `out_dir` are
/// resolved against the plan file's directory by [`ExperimentPlan::from_file`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub trains: IndexMap<String, PathBuf>,
    #[serde(default)]
    pub evals: IndexMap<String, PathBuf>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub keep_labels: Option<ArmLabels>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    /// Worker threads for training and prediction; the rayon default if unset.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentPlan {
    pub fn parse(text: &str) -> Result<Self> {
        let plan: ExperimentPlan =
            serde_json::from_str(text).map_err(|e| Error::Data(format!("malformed plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut plan = Self::parse(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        plan.trains.values_mut().for_each(resolve);
        plan.evals.values_mut().for_each(resolve);
        resolve(&mut plan.out_dir);
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        for name in self.trains.keys().chain(self.evals.keys()) {
            check_name(name)?;
        }
        if self.sizes.contains(&0) {
            return Err(Error::Usage("training sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Usage(format!("training sizes must be sorted ascending, got {:?}", self.sizes)));
        }
        if self.workers == Some(0) {
            return Err(Error::Usage("workers must be at least 1".into()));
        }
        self.train.validate()
    }

    /// Runs `f` on a pool of `workers` threads, or on the global pool.
    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Usage(format!("cannot start {n} workers: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// Names double as directory components and CSV cells.
fn check_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !name.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(Error::Usage(format!(
            "corpus name `{name}` must be non-empty ASCII letters, digits, `-`, `_` or `.`"
        )))
    }
}

fn check_unique(corpora: &[Corpus], role: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for c in corpora {
        check_name(c.name())?;
        if !seen.insert(c.name()) {
            return Err(Error::Usage(format!("duplicate {role} corpus name `{}`", c.name())));
        }
    }
    Ok(())
}

/// A training or evaluation failure inside a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub job: String,
    pub error: String,
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "failed"
    }
}

fn train_job(corpus: &Corpus, features: &FeatureConfig, config: &TrainConfig) -> std::result::Result<CrfModel, String> {
    log::info!("training on `{}` ({} instances)", corpus.name(), corpus.len());
    train(corpus, features, config).map_err(|e| e.to_string())
}

fn eval_job(model: &CrfModel, eval: &Corpus, universe: Option<LabelSet>) -> std::result::Result<EvalReport, String> {
    let pred = predict_all(model, eval.instances()).map_err(|e| e.to_string())?;
    match universe {
        Some(u) => evaluate_within(eval, &pred, u),
        None => evaluate(eval, &pred),
    }
    .map_err(|e| e.to_string())
}

#[derive(Debug, Clone)]
pub struct MatrixCell {
    pub train: String,
    pub eval: String,
    pub outcome: std::result::Result<EvalReport, String>,
}

/// Every train corpus evaluated on every eval corpus, train-major.
#[derive(Debug, Clone)]
pub struct Matrix {
    pub trains: Vec<String>,
    pub evals: Vec<String>,
    pub cells: Vec<MatrixCell>,
}

impl Matrix {
    pub fn cell(&self, train: &str, eval: &str) -> Option<&MatrixCell> {
        self.cells.iter().find(|c| c.train == train && c.eval == eval)
    }

    pub fn report(&self, train: &str, eval: &str) -> Option<&EvalReport> {
        self.cell(train, eval).and_then(|c| c.outcome.as_ref().ok())
    }

    /// Field-level macro-F1 of a completed cell.
    pub fn macro_f1(&self, train: &str, eval: &str) -> Option<f64> {
        self.report(train, eval).map(|r| r.field.macro_f1)
    }

    pub fn failures(&self) -> Vec<Failure> {
        self.cells
            .iter()
            .filter_map(|c| {
                c.outcome.as_ref().err().map(|e| Failure {
                    job: format!("{}__{}", c.train, c.eval),
                    error: e.clone(),
                })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{MATRIX_VERSION_LINE}\n{MATRIX_HEADER}\n");
        for c in &self.cells {
            match &c.outcome {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},ok",
                        c.train,
                        c.eval,
                        r.instances,
                        fmt_num(r.field.macro_f1),
                        fmt_num(r.field.micro_f1),
                        fmt_num(r.token.macro_f1),
                        fmt_num(r.token.micro_f1)
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},{},,,,,,failed", c.train, c.eval);
                }
            }
        }
        out
    }

    /// Field-level macro-F1 with trains as rows and evals as columns.
    pub fn to_table(&self) -> String {
        let w = self.trains.iter().chain(&self.evals).map(String::len).max().unwrap_or(0).max(8);
        let mut out = format!("{:<w$}", "train\\eval");
        for e in &self.evals {
            let _ = write!(out, " {e:>w$}");
        }
        out.push('\n');
        for t in &self.trains {
            let _ = write!(out, "{t:<w$}");
            for e in &self.evals {
                match self.macro_f1(t, e) {
                    Some(f) => {
                        let _ = write!(out, " {f:>w$.4}");
                    }
                    None => {
                        let _ = write!(out, " {:>w$}", "failed");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Trains one model per train corpus with a shared configuration and
/// evaluates it on every eval corpus.
pub fn run_matrix(trains: &[Corpus], evals: &[Corpus], features: &FeatureConfig, config: &TrainConfig) -> Result<Matrix> {
    if trains.is_empty() || evals.is_empty() {
        return Err(Error::Usage("a matrix needs at least one train and one eval corpus".into()));
    }
    check_unique(trains, "train")?;
    check_unique(evals, "eval")?;
    config.validate()?;
    let mut cells = Vec::with_capacity(trains.len() * evals.len());
    for t in trains {
        let model = train_job(t, features, config);
        for e in evals {
            let outcome = match &model {
                Ok(m) => eval_job(m, e, None),
                Err(err) => Err(format!("training failed: {err}")),
            };
            cells.push(MatrixCell {
                train: t.name().to_string(),
                eval: e.name().to_string(),
                outcome,
            });
        }
    }
    Ok(Matrix {
        trains: trains.iter().map(|c| c.name().to_string()).collect(),
        evals: evals.iter().map(|c| c.name().to_string()).collect(),
        cells,
    })
}

/// Prefixes of one seeded shuffle, so each subset contains every smaller one.
pub fn nested_subsets(corpus: &Corpus, sizes: &[usize], seed: u64) -> Result<Vec<Corpus>> {
    if let Some(&n) = sizes.iter().find(|&&n| n > corpus.len()) {
        return Err(Error::Usage(format!(
            "training size {n} exceeds the {} instances of `{}`",
            corpus.len(),
            corpus.name()
        )));
    }
    sizes.iter().map(|&n| corpus.sample(n, seed)).collect()
}

#[derive(Debug, Clone)]
pub struct CurveRow {
    pub train: String,
    pub size: usize,
    /// One report per eval corpus, in eval order.
    pub outcome: std::result::Result<Vec<EvalReport>, String>,
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub evals: Vec<String>,
    pub rows: Vec<CurveRow>,
}

impl Curve {
    /// Field-level macro-F1 for `train` at `size` on `eval`.
    pub fn macro_f1(&self, train: &str, size: usize, eval: &str) -> Option<f64> {
        let j = self.evals.iter().position(|e| e == eval)?;
        let row = self.rows.iter().find(|r| r.train == train && r.size == size)?;
        row.outcome.as_ref().ok().map(|reps| reps[j].field.macro_f1)
    }

    pub fn failures(&self) -> Vec<Failure> {
        self.rows
            .iter()
            .filter_map(|r| {
                r.outcome.as_ref().err().map(|e| Failure {
                    job: format!("{}@{}", r.train, r.size),
                    error: e.clone(),
                })
            })
            .collect()
    }

    /// One row per (train, size); one field-level macro-F1 column per eval.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CURVE_VERSION_LINE}\ntrain,size");
        for e in &self.evals {
            let _ = write!(out, ",{e}");
        }
        out.push_str(",status\n");
        for r in &self.rows {
            let _ = write!(out, "{},{}", r.train, r.size);
            match &r.outcome {
                Ok(reps) => reps.iter().for_each(|rep| {
                    let _ = write!(out, ",{}", fmt_num(rep.field.macro_f1));
                }),
                Err(_) => self.evals.iter().for_each(|_| out.push(',')),
            }
            let _ = writeln!(out, ",{}", status(r.outcome.is_ok()));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12} {:>7}", "train", "size");
        for e in &self.evals {
            let _ = write!(out, " {e:>10}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{:<12} {:>7}", r.train, r.size);
            match &r.outcome {
                Ok(reps) => reps.iter().for_each(|rep| {
                    let _ = write!(out, " {:>10.4}", rep.field.macro_f1);
                }),
                Err(_) => out.push_str(" failed"),
            }
            out.push('\n');
        }
        out
    }
}

/// Trains on nested subsets of each train corpus and evaluates every model
/// on every eval corpus. Repeated sizes reuse the previous model.
pub fn run_curve(
    trains: &[Corpus],
    evals: &[Corpus],
    sizes: &[usize],
    seed: u64,
    features: &FeatureConfig,
    config: &TrainConfig,
) -> Result<Curve> {
    if trains.is_empty() || evals.is_empty() || sizes.is_empty() {
        return Err(Error::Usage("a size curve needs train corpora, eval corpora and sizes".into()));
    }
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Usage(format!("training sizes must be sorted ascending, got {sizes:?}")));
    }
    check_unique(trains, "train")?;
    check_unique(evals, "eval")?;
    config.validate()?;
    let subsets = trains
        .iter()
        .map(|t| nested_subsets(t, sizes, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<CurveRow> = Vec::new();
    for (t, subs) in trains.iter().zip(subsets) {
        for (&size, sub) in sizes.iter().zip(&subs) {
            let outcome = match rows.last() {
                Some(prev) if prev.train == t.name() && prev.size == size => prev.outcome.clone(),
                _ => match train_job(sub, features, config) {
                    Ok(m) => evals.iter().map(|e| eval_job(&m, e, None)).collect(),
                    Err(err) => Err(format!("training failed: {err}")),
                },
            };
            rows.push(CurveRow {
                train: t.name().to_string(),
                size,
                outcome,
            });
        }
    }
    Ok(Curve {
        evals: evals.iter().map(|c| c.name().to_string()).collect(),
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct AblationPair {
    pub full: EvalReport,
    pub reduced: EvalReport,
    /// `full` relative to `reduced`.
    pub comparison: Comparison,
}

#[derive(Debug, Clone)]
pub struct AblationCell {
    pub train: String,
    pub eval: String,
    pub full_labels: LabelSet,
    pub reduced_labels: LabelSet,
    pub shared: LabelSet,
    pub outcome: std::result::Result<AblationPair, String>,
}

#[derive(Debug, Clone)]
pub struct Ablation {
    pub cells: Vec<AblationCell>,
}

impl Ablation {
    pub fn cell(&self, train: &str, eval: &str) -> Option<&AblationCell> {
        self.cells.iter().find(|c| c.train == train && c.eval == eval)
    }

    pub fn failures(&self) -> Vec<Failure> {
        self.cells
            .iter()
            .filter_map(|c| {
                c.outcome.as_ref().err().map(|e| Failure {
                    job: format!("{}__{}", c.train, c.eval),
                    error: e.clone(),
                })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{ABLATION_VERSION_LINE}\n{ABLATION_HEADER}\n");
        for c in &self.cells {
            for level in [Level::Field, Level::Token] {
                match &c.outcome {
                    Ok(p) => {
                        let d = match level {
                            Level::Field => &p.comparison.field.macro_f1,
                            Level::Token => &p.comparison.token.macro_f1,
                        };
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},ok",
                            c.train,
                            c.eval,
                            level.as_str(),
                            fmt_num(d.a),
                            fmt_num(d.b),
                            fmt_num(d.absolute),
                            d.relative.map(fmt_num).unwrap_or_default()
                        );
                    }
                    Err(_) => {
                        let _ = writeln!(out, "{},{},{},,,,,failed", c.train, c.eval, level.as_str());
                    }
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<12} {:<12} {:>8} {:>8} {:>9}\n", "train", "eval", "full", "reduced", "change");
        for c in &self.cells {
            match &c.outcome {
                Ok(p) => {
                    let d = &p.comparison.field.macro_f1;
                    let rel = d.relative.map_or_else(|| "n/a".to_string(), |r| format!("{:+.1}%", 100.0 * r));
                    let _ = writeln!(out, "{:<12} {:<12} {:>8.4} {:>8.4} {:>9}", c.train, c.eval, d.a, d.b, rel);
                }
                Err(_) => {
                    let _ = writeln!(out, "{:<12} {:<12} failed", c.train, c.eval);
                }
            }
        }
        out
    }
}

/// Trains a full-label and a reduced-label model on the same instances and
/// evaluates both on the fields they share.
///
/// Identical arms are a usage error unless `allow_identical` is set.
pub fn run_ablation(
    trains: &[Corpus],
    evals: &[Corpus],
    arms: &ArmLabels,
    features: &FeatureConfig,
    config: &TrainConfig,
    allow_identical: bool,
) -> Result<Ablation> {
    if trains.is_empty() || evals.is_empty() {
        return Err(Error::Usage("an ablation needs at least one train and one eval corpus".into()));
    }
    check_unique(trains, "train")?;
    check_unique(evals, "eval")?;
    config.validate()?;
    let mut plans = Vec::new();
    for t in trains {
        let full = arms.full.unwrap_or_else(|| t.labels());
        if full == arms.reduced && !allow_identical {
            return Err(Error::Usage(format!(
                "ablation arms for `{}` keep the same labels ({full})",
                t.name()
            )));
        }
        let shared = full.intersection(arms.reduced);
        if shared.is_empty() {
            return Err(Error::Usage(format!("ablation arms for `{}` share no field", t.name())));
        }
        plans.push((t, full, shared));
    }
    let mut cells = Vec::new();
    for (t, full, shared) in plans {
        let models = t
            .filter_fields(full)
            .and_then(|c| Ok((c, t.filter_fields(arms.reduced)?)))
            .map_err(|e| e.to_string())
            .and_then(|(fc, rc)| {
                let fm = train_job(&fc, features, config)?;
                let rm = train_job(&rc, features, config)?;
                Ok((fm, rm))
            });
        for e in evals {
            let outcome = match &models {
                Ok((fm, rm)) => eval_job(fm, e, Some(shared)).and_then(|full| {
                    let reduced = eval_job(rm, e, Some(shared))?;
                    let comparison = compare_reports(&full, &reduced).map_err(|e| e.to_string())?;
                    Ok(AblationPair {
                        full,
                        reduced,
                        comparison,
                    })
                }),
                Err(err) => Err(format!("training failed: {err}")),
            };
            cells.push(AblationCell {
                train: t.name().to_string(),
                eval: e.name().to_string(),
                full_labels: full,
                reduced_labels: arms.reduced,
                shared,
                outcome,
            });
        }
    }
    Ok(Ablation { cells })
}

/// A plan corpus with its path as written and the digest of its bytes.
#[derive(Debug, Clone)]
pub struct Source {
    pub corpus: Corpus,
    pub path: PathBuf,
    pub sha256: String,
}

fn load_sources(map: &IndexMap<String, PathBuf>) -> Result<Vec<Source>> {
    map.iter()
        .map(|(name, path)| {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let corpus = read_corpus(path)?.renamed(name.clone());
            Ok(Source {
                corpus,
                path: path.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            })
        })
        .collect()
}

fn corpora(sources: &[Source]) -> Vec<Corpus> {
    sources.iter().map(|s| s.corpus.clone()).collect()
}

/// Writes `files` under `out_dir` and merges this experiment's entry into
/// the manifest. Returns the manifest path.
fn write_outputs(
    plan: &ExperimentPlan,
    experiment: &str,
    trains: &[Source],
    evals: &[Source],
    files: &[(String, String)],
    failures: &[Failure],
    extra: Value,
) -> Result<PathBuf> {
    let mut outputs = Vec::new();
    for (rel, text) in files {
        write_text(&plan.out_dir.join(rel), text)?;
        outputs.push(json!({ "path": rel, "sha256": hex::encode(Sha256::digest(text.as_bytes())) }));
    }
    let src = |role: &str, s: &Source| {
        json!({
            "role": role,
            "name": s.corpus.name(),
            "path": s.path.display().to_string(),
            "sha256": s.sha256,
            "instances": s.corpus.len(),
        })
    };
    let mut entry = json!({
        "seed": plan.seed,
        "train_config": plan.train,
        "features": plan.features,
        "corpora": trains.iter().map(|s| src("train", s)).chain(evals.iter().map(|s| src("eval", s))).collect::<Vec<_>>(),
        "outputs": outputs,
        "failures": failures,
        "status": if failures.is_empty() { "complete" } else { "partial" },
    });
    if let (Value::Object(e), Value::Object(x)) = (&mut entry, extra) {
        e.extend(x);
    }

    let path = plan.out_dir.join(MANIFEST_FILE);
    let mut manifest = std::fs::read_to_string(&path)
        .ok()
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .filter(|v| v.get("experiments").is_some_and(Value::is_object))
        .unwrap_or_else(|| json!({ "experiments": {} }));
    manifest["tool"] = json!("citecrf");
    manifest["version"] = json!(crate::VERSION);
    manifest["model_format"] = json!(MODEL_FORMAT);
    manifest["experiments"][experiment] = entry;
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_text(&path, &text)?;
    Ok(path)
}

/// Runs [`run_matrix`] over the plan's corpora and writes `matrix.csv`,
/// `cells/<train>__<eval>/fields.csv` and the manifest.
pub fn cross_matrix(plan: &ExperimentPlan) -> Result<Matrix> {
    plan.validate()?;
    let trains = load_sources(&plan.trains)?;
    let evals = load_sources(&plan.evals)?;
    let m = plan.install(|| run_matrix(&corpora(&trains), &corpora(&evals), &plan.features, &plan.train))??;
    let mut files = vec![("matrix.csv".to_string(), m.to_csv())];
    for c in &m.cells {
        if let Ok(r) = &c.outcome {
            files.push((format!("cells/{}__{}/fields.csv", c.train, c.eval), r.to_csv()));
        }
    }
    write_outputs(plan, "matrix", &trains, &evals, &files, &m.failures(), json!({}))?;
    Ok(m)
}

/// Runs [`run_curve`] with the plan's sizes and seed and writes `curve.csv`
/// and the manifest.
pub fn size_curve(plan: &ExperimentPlan) -> Result<Curve> {
    plan.validate()?;
    let trains = load_sources(&plan.trains)?;
    let evals = load_sources(&plan.evals)?;
    let c = plan.install(|| {
        run_curve(&corpora(&trains), &corpora(&evals), &plan.sizes, plan.seed, &plan.features, &plan.train)
    })??;
    let files = vec![("curve.csv".to_string(), c.to_csv())];
    write_outputs(plan, "curve", &trains, &evals, &files, &c.failures(), json!({ "sizes": plan.sizes }))?;
    Ok(c)
}

/// Runs [`run_ablation`] with the plan's `keep_labels` and writes
/// `ablation.csv`, per-arm field reports under `ablation/` and the manifest.
pub fn field_ablation(plan: &ExperimentPlan) -> Result<Ablation> {
    plan.validate()?;
    let arms = plan
        .keep_labels
        .clone()
        .ok_or_else(|| Error::Usage("the plan has no keep_labels for the ablation arms".into()))?;
    let trains = load_sources(&plan.trains)?;
    let evals = load_sources(&plan.evals)?;
    let a = plan.install(|| {
        run_ablation(&corpora(&trains), &corpora(&evals), &arms, &plan.features, &plan.train, false)
    })??;
    let mut files = vec![("ablation.csv".to_string(), a.to_csv())];
    for c in &a.cells {
        if let Ok(p) = &c.outcome {
            files.push((format!("ablation/{}__{}/full.csv", c.train, c.eval), p.full.to_csv()));
            files.push((format!("ablation/{}__{}/reduced.csv", c.train, c.eval), p.reduced.to_csv()));
        }
    }
    let arms_json: Vec<Value> = a
        .cells
        .iter()
        .map(|c| {
            json!({
                "train": c.train,
                "eval": c.eval,
                "full": c.full_labels,
                "reduced": c.reduced_labels,
                "shared": c.shared,
            })
        })
        .collect();
    write_outputs(plan, "ablation", &trains, &evals, &files, &a.failures(), json!({ "arms": arms_json }))?;
    Ok(a)
}
