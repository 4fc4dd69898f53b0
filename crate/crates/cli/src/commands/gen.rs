use fusekit_core::riskqa::{run_pipeline, ChatClient, ReplayClient, RunReport, Scene, ENDPOINT_ENV};
use serde::Serialize;
use serde_json::json;

use crate::args::GenArgs;
use crate::config::Config;
use crate::error::CliError;
use crate::io::{parse_jsonl, read_tracked, to_jsonl, write, write_json};
use crate::provenance::{Envelope, Provenance};

#[derive(Serialize)]
struct Body<'a> {
    report: &'a RunReport,
}

fn live_client(cfg: &Config, a: &GenArgs) -> Result<Box<dyn ChatClient>, CliError> {
    let endpoint = cfg.client.endpoint.clone().or_else(|| std::env::var(ENDPOINT_ENV).ok());
    let Some(endpoint) = endpoint.filter(|e| !e.trim().is_empty()) else {
        return Err(CliError::Input(format!(
            "no chat endpoint: pass --mock DIR, --endpoint URL, or set {ENDPOINT_ENV}"
        )));
    };
    let key = std::env::var(fusekit_core::riskqa::API_KEY_ENV).ok();
    let http = fusekit_core::riskqa::HttpChatClient::new(endpoint, key, cfg.client.timeout())
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(match &a.record {
        Some(dir) => Box::new(
            fusekit_core::riskqa::RecordingClient::new(http, dir).map_err(|e| CliError::Input(e.to_string()))?,
        ),
        None => Box::new(http),
    })
}

/// Both generation steps over a scene file. Scenes that fail are reported
/// and skipped; the command fails with 3 only when every scene failed.
pub fn run(mut cfg: Config, a: GenArgs) -> Result<(), CliError> {
    let c = &mut cfg.client;
    if let Some(v) = &a.endpoint {
        c.endpoint = Some(v.clone());
    }
    if let Some(v) = &a.risk_model {
        c.risk_model = v.clone();
    }
    if let Some(v) = &a.qa_model {
        c.qa_model = v.clone();
    }
    if let Some(v) = a.retries {
        c.retries = v;
    }
    if let Some(v) = a.max_in_flight {
        c.max_in_flight = v;
    }
    if cfg.client.max_in_flight == 0 {
        return Err(CliError::Input("max_in_flight must be at least 1".into()));
    }
    let client: Box<dyn ChatClient> = match &a.mock {
        Some(dir) if !dir.is_dir() => {
            return Err(CliError::Input(format!("mock directory {} does not exist", dir.display())))
        }
        Some(dir) => Box::new(ReplayClient::from_dir(dir)),
        None => live_client(&cfg, &a)?,
    };
    let mode = if a.mock.is_some() { "replay" } else { "live" };
    let mut prov = Provenance::new("gen-risk-qa", &cfg, json!({ "client": mode }));
    let text = read_tracked(&a.scenes, &mut prov)?;
    let scenes: Vec<Scene> = parse_jsonl(&text, &a.scenes)?;

    let out = run_pipeline(&scenes, client.as_ref(), &cfg.client.pipeline()).map_err(|e| CliError::Input(e.to_string()))?;
    write(&a.out_pairs, to_jsonl(&out.pairs))?;
    write(&a.out_grounding, to_jsonl(&out.grounding))?;
    write_json(&a.report, &Envelope { provenance: &prov, body: Body { report: &out.report } })?;

    let r = &out.report;
    for f in &r.failures {
        eprintln!("scene {} failed at {}: {}", f.scene_id, f.stage, f.error);
    }
    if r.scenes > 0 && r.succeeded == 0 {
        return Err(CliError::Semantic(format!("all {} scenes failed", r.scenes)));
    }
    eprintln!(
        "{} pairs and {} grounding targets from {} of {} scenes",
        r.pairs, r.grounding_targets, r.succeeded, r.scenes
    );
    Ok(())
}
