use std::path::PathBuf;
use std::time::Instant;

use fusekit_core::interactor::{fuse, token_budget, TokenBudget, TokenSource, ViewAttention};
use serde::Serialize;
use serde_json::json;

use crate::args::{DemoArgs, InteractorArgs};
use crate::config::Config;
use crate::error::CliError;
use crate::io::{to_pretty_json, write_json, write_matrix};
use crate::provenance::{Envelope, Provenance};
use crate::synthetic::{attention_params, load_inputs};

#[derive(Serialize)]
struct Sidecar<'a> {
    budget: TokenBudget,
    fused_shape: [usize; 2],
    view_names: &'a [String],
    view_tokens: Vec<usize>,
    bev_tokens: usize,
    /// Origin of every fused row, in order.
    token_sources: &'a [TokenSource],
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

/// Applies the interactor flags shared with `mask-exp` onto the config.
pub fn apply_interactor_flags(cfg: &mut Config, a: &InteractorArgs) -> Result<(), CliError> {
    if let Some(v) = a.k_img {
        cfg.k_img = v;
    }
    if let Some(v) = a.k_bev {
        cfg.k_bev = v;
    }
    if let Some(v) = a.reduction {
        cfg.reduction = v;
    }
    if let Some(v) = a.heads {
        cfg.attn_heads = v;
    }
    if let Some(v) = a.layers {
        cfg.attn_layers = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    cfg.selection().validate().map_err(|e| CliError::Input(e.to_string()))
}

pub fn run(mut cfg: Config, a: DemoArgs) -> Result<(), CliError> {
    apply_interactor_flags(&mut cfg, &a.interactor)?;
    let sidecar_path = a.sidecar.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    });
    let mut prov = Provenance::new("interactor-demo", &cfg, json!({ "synthetic": a.interactor.synthetic }));
    let inputs = load_inputs(&a.interactor, cfg.seed, &mut prov)?;
    let (attn_views, attn_bev) = attention_params(inputs.inst.dim(), cfg.attn_layers, cfg.attn_heads, cfg.seed)?;

    let start = Instant::now();
    let fused = fuse(
        &inputs.views,
        &inputs.bev,
        &inputs.inst,
        &cfg.selection(),
        &ViewAttention::Shared(attn_views),
        &attn_bev,
    )
    .map_err(|e| CliError::Semantic(format!("shape mismatch: {e}")))?;
    let elapsed = start.elapsed();

    let view_tokens = inputs.views.token_counts();
    let bev_tokens = inputs.bev.tokens().rows();
    let budget = token_budget(&cfg.selection(), &view_tokens, bev_tokens).map_err(|e| CliError::Semantic(e.to_string()))?;
    debug_assert_eq!(budget.fused, fused.len());

    write_matrix(&a.out, &fused.tokens)?;
    let sidecar = Sidecar {
        budget,
        fused_shape: [fused.tokens.rows(), fused.tokens.cols()],
        view_names: inputs.views.view_names(),
        view_tokens,
        bev_tokens,
        token_sources: &fused.provenance,
        timing_ms: (!a.no_timing).then_some(elapsed.as_secs_f64() * 1e3),
    };
    write_json(&sidecar_path, &Envelope { provenance: &prov, body: &sidecar })?;
    let summary = json!({ "budget": budget, "fused_shape": sidecar.fused_shape });
    print!("{}", to_pretty_json(&summary));
    Ok(())
}

