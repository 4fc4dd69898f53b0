use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use fusekit_core::driving::{
    collision_rate, grounding_map, l2_corpus, ora_score, risk_grounding_map, AgentBox, CollisionSample,
    ImageDetections, ImageGroundTruth, MapConfig, OraSample, TrajectoryPlan,
};
use fusekit_core::metrics::{caption_report, EvalPair};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::args::{EvalArgs, EvalCommon, EvalTask};
use crate::config::{Config, MetricScale};
use crate::error::CliError;
use crate::io::{parse_jsonl, read_tracked, write, write_json};
use crate::provenance::{Envelope, Provenance};

/// How many offending ids to print per category.
const MAX_LISTED_IDS: usize = 20;

#[derive(Deserialize)]
struct CaptionPred {
    id: String,
    #[serde(alias = "candidate", alias = "caption", alias = "prediction")]
    answer: String,
}

#[derive(Deserialize)]
struct CaptionGt {
    id: String,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default)]
    answer: Option<String>,
    #[serde(default, alias = "task")]
    task_tag: Option<String>,
}

#[derive(Deserialize)]
struct PlanPred {
    id: String,
    plan: TrajectoryPlan,
}

#[derive(Deserialize)]
struct PlanGt {
    id: String,
    plan: TrajectoryPlan,
    /// Agents at each waypoint time; enables the collision metric.
    #[serde(default)]
    agents: Option<Vec<Vec<AgentBox>>>,
}

#[derive(Serialize)]
struct Body {
    task: &'static str,
    count: usize,
    scale: MetricScale,
    /// Metric name to value; `null` where a metric is undefined.
    scores: Map<String, Value>,
    detail: Value,
}

impl Body {
    fn csv(&self) -> String {
        let cells: Vec<String> = self
            .scores
            .values()
            .map(|v| v.as_f64().map_or_else(|| "N/A".to_string(), |x| format!("{x:.2}")))
            .collect();
        let header: Vec<&str> = self.scores.keys().map(String::as_str).collect();
        format!("{}\n{}\n", header.join(","), cells.join(","))
    }
}

fn listed(ids: &[&str]) -> String {
    let mut s = ids.iter().take(MAX_LISTED_IDS).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > MAX_LISTED_IDS {
        s.push_str(&format!(" and {} more", ids.len() - MAX_LISTED_IDS));
    }
    s
}

fn duplicates<'a>(ids: &[&'a str]) -> Vec<&'a str> {
    let mut seen = HashSet::new();
    let dup: BTreeSet<&str> = ids.iter().copied().filter(|id| !seen.insert(*id)).collect();
    dup.into_iter().collect()
}

/// Predictions and ground truth must cover the same ids, each once.
fn check_alignment(pred: &[&str], gt: &[&str]) -> Result<(), CliError> {
    let p: BTreeSet<&str> = pred.iter().copied().collect();
    let g: BTreeSet<&str> = gt.iter().copied().collect();
    let missing: Vec<&str> = g.difference(&p).copied().collect();
    let extra: Vec<&str> = p.difference(&g).copied().collect();
    let mut problems = Vec::new();
    for (what, ids) in [
        ("missing predictions", missing),
        ("predictions without ground truth", extra),
        ("duplicate prediction ids", duplicates(pred)),
        ("duplicate ground-truth ids", duplicates(gt)),
    ] {
        if !ids.is_empty() {
            problems.push(format!("{what} ({}): {}", ids.len(), listed(&ids)));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Semantic(format!("id mismatch; {}", problems.join("; "))))
    }
}

fn read_pair<P, G>(c: &EvalCommon, prov: &mut Provenance) -> Result<(Vec<P>, Vec<G>), CliError>
where
    P: for<'de> Deserialize<'de>,
    G: for<'de> Deserialize<'de>,
{
    let load = |path: &Path, prov: &mut Provenance| read_tracked(path, prov);
    let pred_text = load(&c.pred, prov)?;
    let gt_text = load(&c.gt, prov)?;
    Ok((parse_jsonl(&pred_text, &c.pred)?, parse_jsonl(&gt_text, &c.gt)?))
}

fn semantic(e: impl std::fmt::Display) -> CliError {
    CliError::Semantic(e.to_string())
}

fn caption(c: &EvalCommon, scale: MetricScale, prov: &mut Provenance) -> Result<Body, CliError> {
    let (preds, gts): (Vec<CaptionPred>, Vec<CaptionGt>) = read_pair(c, prov)?;
    let pid: Vec<&str> = preds.iter().map(|p| p.id.as_str()).collect();
    let gid: Vec<&str> = gts.iter().map(|g| g.id.as_str()).collect();
    check_alignment(&pid, &gid)?;
    let by_id: BTreeMap<&str, &CaptionPred> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let pairs = gts
        .iter()
        .map(|g| {
            let mut refs = g.references.clone();
            if let Some(a) = &g.answer {
                refs.insert(0, a.clone());
            }
            if refs.is_empty() {
                return Err(CliError::Input(format!("ground truth '{}' has no reference", g.id)));
            }
            let mut pair = EvalPair::new(&g.id, &by_id[g.id.as_str()].answer, refs);
            pair.task_tag = g.task_tag.clone();
            Ok(pair)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = caption_report(&pairs).map_err(semantic)?;
    // MAE is an absolute error in the answer's own unit, not a percentage.
    let scaled = |m: &BTreeMap<String, f64>| -> Map<String, Value> {
        m.iter()
            .map(|(k, v)| (k.clone(), json!(if k == "MAE" { *v } else { scale.apply(*v) })))
            .collect()
    };
    let per_task: Map<String, Value> = report.per_task.iter().map(|(t, m)| (t.clone(), Value::Object(scaled(m)))).collect();
    let all = scaled(&report.scores);
    let scores = fusekit_core::metrics::CAPTION_COLUMNS
        .iter()
        .map(|k| (k.to_string(), all.get(*k).cloned().unwrap_or(Value::Null)))
        .collect();
    Ok(Body {
        task: "caption",
        count: report.count,
        scale,
        scores,
        detail: json!({ "per_task": per_task, "metadata": report.metadata }),
    })
}

fn grounding(c: &EvalCommon, map: MapConfig, risk: bool, scale: MetricScale, prov: &mut Provenance) -> Result<Body, CliError> {
    let (preds, gts): (Vec<ImageDetections>, Vec<ImageGroundTruth>) = read_pair(c, prov)?;
    let pid: Vec<&str> = preds.iter().map(|p| p.id.as_str()).collect();
    let gid: Vec<&str> = gts.iter().map(|g| g.id.as_str()).collect();
    check_alignment(&pid, &gid)?;
    let score = |cfg: &MapConfig| if risk { risk_grounding_map(&preds, &gts, cfg) } else { grounding_map(&preds, &gts, cfg) };
    let total = score(&map).map_err(semantic)?;
    let mut per_threshold = Map::new();
    for t in &map.iou_thresholds {
        let single = MapConfig {
            iou_thresholds: vec![*t],
            interpolation: map.interpolation,
        };
        per_threshold.insert(t.to_string(), json!(scale.apply(score(&single).map_err(semantic)?)));
    }
    let mut scores = Map::new();
    scores.insert("mAP".into(), json!(scale.apply(total)));
    Ok(Body {
        task: "grounding",
        count: gts.len(),
        scale,
        scores,
        detail: json!({ "per_threshold": per_threshold, "risk_target_only": risk }),
    })
}

fn planning(c: &EvalCommon, cfg: &Config, scale: MetricScale, prov: &mut Provenance) -> Result<Body, CliError> {
    let (preds, gts): (Vec<PlanPred>, Vec<PlanGt>) = read_pair(c, prov)?;
    let pid: Vec<&str> = preds.iter().map(|p| p.id.as_str()).collect();
    let gid: Vec<&str> = gts.iter().map(|g| g.id.as_str()).collect();
    check_alignment(&pid, &gid)?;
    let by_id: BTreeMap<&str, &PlanPred> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let pairs: Vec<(TrajectoryPlan, TrajectoryPlan)> =
        gts.iter().map(|g| (by_id[g.id.as_str()].plan.clone(), g.plan.clone())).collect();
    let l2 = l2_corpus(&pairs, cfg.l2_mode).map_err(semantic)?;

    let samples: Vec<CollisionSample> = gts
        .iter()
        .filter_map(|g| {
            g.agents.as_ref().map(|agents| CollisionSample {
                plan: by_id[g.id.as_str()].plan.clone(),
                agents: agents.clone(),
            })
        })
        .collect();
    let mut scores = Map::new();
    for (h, v) in ["1s", "2s", "3s", "avg"].iter().zip([l2.h1, l2.h2, l2.h3, l2.avg]) {
        scores.insert(format!("L2_{h}"), json!(v));
    }
    if !samples.is_empty() {
        let col = collision_rate(&samples, cfg.ego_dims()).map_err(semantic)?;
        for (h, v) in ["1s", "2s", "3s", "avg"].iter().zip([col.h1, col.h2, col.h3, col.avg]) {
            scores.insert(format!("Collision_{h}"), json!(scale.apply(v)));
        }
    }
    Ok(Body {
        task: "planning",
        count: gts.len(),
        scale,
        scores,
        detail: json!({ "l2_mode": cfg.l2_mode, "l2_unit": "m", "collision_samples": samples.len() }),
    })
}

fn ora(c: &EvalCommon, cfg: &Config, scale: MetricScale, prov: &mut Provenance) -> Result<Body, CliError> {
    let (preds, gts): (Vec<OraSample>, Vec<OraSample>) = read_pair(c, prov)?;
    let pid: Vec<&str> = preds.iter().map(|p| p.id.as_str()).collect();
    let gid: Vec<&str> = gts.iter().map(|g| g.id.as_str()).collect();
    check_alignment(&pid, &gid)?;
    let r = ora_score(&preds, &gts, cfg.ora_gating).map_err(semantic)?;
    let cell = |v: Option<f64>| v.map_or(Value::Null, |x| json!(scale.apply(x)));
    let mut scores = Map::new();
    scores.insert("exist".into(), cell(Some(r.exist_acc)));
    scores.insert("level".into(), cell(r.level_acc));
    scores.insert("cate".into(), cell(r.cate_acc));
    scores.insert("object".into(), cell(r.object_acc));
    Ok(Body {
        task: "ora",
        count: r.total,
        scale,
        scores,
        detail: json!({ "gated": r.gated, "gating": r.gating }),
    })
}

pub fn run(mut cfg: Config, a: EvalArgs) -> Result<(), CliError> {
    let (common, name) = match &a.task {
        EvalTask::Caption(c) => (c, "eval caption"),
        EvalTask::Grounding(g) => (&g.common, "eval grounding"),
        EvalTask::Planning(p) => (&p.common, "eval planning"),
        EvalTask::Ora(o) => (&o.common, "eval ora"),
    };
    if let Some(s) = common.scale {
        cfg.metric_scale = s;
    }
    let mut risk = false;
    match &a.task {
        EvalTask::Grounding(g) => {
            if let Some(t) = &g.iou {
                cfg.iou_thresholds = t.clone();
            }
            if let Some(i) = g.interpolation {
                cfg.ap_interpolation = i;
            }
            risk = g.risk;
        }
        EvalTask::Planning(p) => {
            if let Some(m) = p.l2_mode {
                cfg.l2_mode = m;
            }
        }
        EvalTask::Ora(o) => {
            if let Some(g) = o.gating {
                cfg.ora_gating = g;
            }
        }
        EvalTask::Caption(_) => {}
    }
    let mut prov = Provenance::new(name, &cfg, json!({ "risk_target_only": risk }));
    let scale = cfg.metric_scale;
    let body = match &a.task {
        EvalTask::Caption(c) => caption(c, scale, &mut prov)?,
        EvalTask::Grounding(g) => grounding(&g.common, cfg.map(), risk, scale, &mut prov)?,
        EvalTask::Planning(p) => planning(&p.common, &cfg, scale, &mut prov)?,
        EvalTask::Ora(o) => ora(&o.common, &cfg, scale, &mut prov)?,
    };
    write_json(&common.out, &Envelope { provenance: &prov, body: &body })?;
    if let Some(csv) = &common.csv {
        write(csv, body.csv())?;
    }
    print!("{}", body.csv());
    Ok(())
}
