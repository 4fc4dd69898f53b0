use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    build_qa_prompt, build_risk_prompt, categorize_qa, derive_grounding_targets, parse_qa_response,
    parse_risk_response, ChatClient, ChatMessage, ChatRequest, GroundingDerivation, GroundingTarget, QaCategory,
    QaPair, RiskAssessmentDoc, RiskQaError, Scene, REPAIR_INSTRUCTION,
};

pub const STEP_RISK: &str = "step1";
pub const STEP_QA: &str = "step2";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub risk_model: String,
    pub qa_model: String,
    pub temperature: f64,
    pub seed: Option<u64>,
    /// Extra attempts after a response fails validation.
    pub retries: u32,
    pub max_in_flight: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            risk_model: "gpt-4o".into(),
            qa_model: "gpt-4o-mini".into(),
            temperature: 0.0,
            seed: Some(0),
            retries: 2,
            max_in_flight: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFailure {
    pub scene_id: String,
    pub stage: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneResult {
    pub scene_id: String,
    pub doc: Option<RiskAssessmentDoc>,
    pub pairs: Vec<QaPair>,
    pub grounding: GroundingDerivation,
    pub retries: u32,
    pub failure: Option<SceneFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneGroundingTarget {
    pub scene_id: String,
    #[serde(flatten)]
    pub target: GroundingTarget,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenes: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub retries: u32,
    pub scenes_without_risk: usize,
    pub pairs: usize,
    pub pairs_per_category: BTreeMap<QaCategory, usize>,
    pub grounding_targets: usize,
    pub unmatched_objects: usize,
    pub failures: Vec<SceneFailure>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutput {
    pub pairs: Vec<QaPair>,
    pub grounding: Vec<SceneGroundingTarget>,
    pub report: RunReport,
    pub scenes: Vec<SceneResult>,
}

/// One prompt, retried with a repair turn while the answer fails `parse`.
/// Client errors are not retried. Returns the value and the retries used.
fn ask<T>(
    client: &dyn ChatClient,
    model: &str,
    prompt: String,
    cfg: &PipelineConfig,
    parse: fn(&str) -> Result<T, RiskQaError>,
    retries: &mut u32,
) -> Result<T, RiskQaError> {
    let mut messages = vec![ChatMessage::user(prompt)];
    let mut attempt = 0;
    loop {
        let request = ChatRequest {
            model: model.to_string(),
            messages: messages.clone(),
            temperature: cfg.temperature,
            seed: cfg.seed,
        };
        let text = client.complete(&request)?;
        match parse(&text) {
            Ok(v) => return Ok(v),
            Err(e) if attempt >= cfg.retries => return Err(e),
            Err(e) => {
                attempt += 1;
                *retries += 1;
                messages.push(ChatMessage::assistant(text));
                messages.push(ChatMessage::user(REPAIR_INSTRUCTION.replace("{error}", &e.to_string())));
            }
        }
    }
}

fn run_scene(scene: &Scene, client: &dyn ChatClient, cfg: &PipelineConfig) -> SceneResult {
    let mut result = SceneResult {
        scene_id: scene.id.clone(),
        doc: None,
        pairs: Vec::new(),
        grounding: GroundingDerivation::default(),
        retries: 0,
        failure: None,
    };
    let fail = |stage: &str, e: RiskQaError| SceneFailure {
        scene_id: scene.id.clone(),
        stage: stage.into(),
        error: e.to_string(),
    };
    if scene.objects.is_empty() {
        result.failure = Some(fail("input", RiskQaError::EmptyInput("scene has no objects".into())));
        return result;
    }
    let doc = match ask(client, &cfg.risk_model, build_risk_prompt(&scene.objects), cfg, parse_risk_response, &mut result.retries) {
        Ok(d) => d,
        Err(e) => {
            result.failure = Some(fail(STEP_RISK, e));
            return result;
        }
    };
    result.grounding = derive_grounding_targets(&doc, &scene.objects);
    if !doc.is_empty() {
        match ask(client, &cfg.qa_model, build_qa_prompt(&doc), cfg, parse_qa_response, &mut result.retries) {
            Ok(pairs) => {
                result.pairs = pairs
                    .iter()
                    .map(|p| {
                        let mut p = categorize_qa(p, &doc);
                        p.scene_id = scene.id.clone();
                        p.step = STEP_QA.into();
                        p
                    })
                    .collect();
            }
            Err(e) => result.failure = Some(fail(STEP_QA, e)),
        }
    }
    result.doc = Some(doc);
    result
}

/// Both generation steps for every scene, with at most
/// `cfg.max_in_flight` scenes in progress. A failing scene is reported and
/// skipped. Outputs follow the input scene order whatever the scheduling.
pub fn run_pipeline(scenes: &[Scene], client: &dyn ChatClient, cfg: &PipelineConfig) -> Result<PipelineOutput, RiskQaError> {
    let mut seen = HashSet::new();
    if let Some(dup) = scenes.iter().find(|s| !seen.insert(s.id.as_str())) {
        return Err(RiskQaError::EmptyInput(format!("duplicate scene id '{}'", dup.id)));
    }
    let slots: Vec<Mutex<Option<SceneResult>>> = scenes.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = cfg.max_in_flight.max(1).min(scenes.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(scene) = scenes.get(i) else { break };
                let r = run_scene(scene, client, cfg);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let results: Vec<SceneResult> = slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every scene ran"))
        .collect();

    let mut report = RunReport {
        scenes: scenes.len(),
        ..Default::default()
    };
    let mut pairs = Vec::new();
    let mut grounding = Vec::new();
    for r in &results {
        report.retries += r.retries;
        match &r.failure {
            Some(f) => {
                report.failed += 1;
                report.failures.push(f.clone());
            }
            None => report.succeeded += 1,
        }
        if r.doc.as_ref().is_some_and(RiskAssessmentDoc::is_empty) {
            report.scenes_without_risk += 1;
        }
        for p in &r.pairs {
            if let Some(c) = p.qa_category {
                *report.pairs_per_category.entry(c).or_default() += 1;
            }
        }
        pairs.extend(r.pairs.iter().cloned());
        report.unmatched_objects += r.grounding.unmatched.len();
        grounding.extend(r.grounding.targets.iter().map(|t| SceneGroundingTarget {
            scene_id: r.scene_id.clone(),
            target: t.clone(),
        }));
    }
    report.pairs = pairs.len();
    report.grounding_targets = grounding.len();
    Ok(PipelineOutput {
        pairs,
        grounding,
        report,
        scenes: results,
    })
}
