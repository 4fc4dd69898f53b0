use std::collections::HashSet;
use std::path::PathBuf;

use fusekit_core::interactor::{
    fuse, project_features, BevFeatureMap, FusedTokenSequence, InstructionEmbedding, SelectionConfig,
    TokenSource, ViewAttention, ViewFeatureSet,
};
use fusekit_core::mask::{run_mask_experiment, MaskExperimentConfig, MaskMetrics, MaskRunReport};
use fusekit_core::metrics::{bleu, EvalPair};
use fusekit_core::numerics::CrossAttnParams;
use serde::Serialize;
use serde_json::json;

use crate::args::MaskArgs;
use crate::commands::demo::apply_interactor_flags;
use crate::config::Config;
use crate::error::CliError;
use crate::io::{read_tracked, write, write_json};
use crate::provenance::{Envelope, Provenance};
use crate::synthetic::{attention_params, load_inputs, projection_params, top_third_candidates};

/// What each CSV column measures when the downstream model is the
/// interactor itself, compared against the unmasked run.
const PROXY_METRICS: [(&str, &str); 4] = [
    ("MAE", "mean absolute difference of fused view tokens"),
    ("ACC", "percent of fused view positions holding the same source token"),
    ("mAP", "percent of the unmasked selection still selected"),
    ("BLEU", "BLEU-4 of the per-view selected index sequences"),
];

#[derive(Serialize)]
struct Body<'a> {
    #[serde(flatten)]
    run: &'a MaskRunReport,
    proxy_metrics: serde_json::Map<String, serde_json::Value>,
}

/// Everything but the views that fusion needs.
struct Fuser {
    bev: BevFeatureMap,
    inst: InstructionEmbedding,
    sel: SelectionConfig,
    attn_views: ViewAttention,
    attn_bev: CrossAttnParams,
}

impl Fuser {
    fn fuse(&self, views: &ViewFeatureSet) -> Result<FusedTokenSequence, String> {
        fuse(views, &self.bev, &self.inst, &self.sel, &self.attn_views, &self.attn_bev).map_err(|e| e.to_string())
    }
}

/// Proxy downstream evaluation: fuse the (masked) views and compare the
/// result with the fusion of the unmasked views.
struct Downstream {
    fuser: Fuser,
    baseline: FusedTokenSequence,
    /// Leading fused rows that come from camera views.
    view_rows: usize,
}

impl Downstream {
    fn evaluate(&self, views: &ViewFeatureSet) -> Result<MaskMetrics, String> {
        let fused = self.fuser.fuse(views)?;
        let n = self.view_rows;
        let len = n * fused.tokens.cols();
        let (a, b) = (&fused.tokens.data()[..len], &self.baseline.tokens.data()[..len]);
        let mae = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64;

        let (got, base) = (&fused.provenance[..n], &self.baseline.provenance[..n]);
        let same = got.iter().zip(base).filter(|(x, y)| x == y).count();
        let acc = 100.0 * same as f64 / n as f64;
        let chosen: HashSet<_> = got.iter().collect();
        let recall = 100.0 * base.iter().filter(|t| chosen.contains(t)).count() as f64 / n as f64;

        let pairs: Vec<EvalPair> = views
            .view_names()
            .iter()
            .map(|name| {
                let seq = |ts: &[TokenSource]| {
                    ts.iter().filter(|t| &t.source == name).map(|t| t.index.to_string()).collect::<Vec<_>>().join(" ")
                };
                EvalPair::new(name, seq(got), vec![seq(base)])
            })
            .collect();
        let bleu4 = bleu(&pairs, 4).map_err(|e| e.to_string())?;
        Ok(MaskMetrics {
            mae,
            acc,
            map: recall,
            bleu: bleu4,
        })
    }
}

pub fn run(mut cfg: Config, a: MaskArgs) -> Result<(), CliError> {
    apply_interactor_flags(&mut cfg, &a.interactor)?;
    if let Some(r) = a.rates.iter().find(|r| **r > 100) {
        return Err(CliError::Input(format!("mask rate {r} exceeds 100")));
    }
    let exp = MaskExperimentConfig {
        rates: a.rates.clone(),
        blind: a.blind && !a.no_blind,
        seed: cfg.seed,
        stage: a.mask_stage,
    };
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    });
    let mut prov = Provenance::new(
        "mask-exp",
        &cfg,
        json!({ "rates": exp.rates, "blind": exp.blind, "mask_stage": exp.stage, "synthetic": a.interactor.synthetic }),
    );
    let inputs = load_inputs(&a.interactor, cfg.seed, &mut prov)?;
    let candidates: Vec<Vec<usize>> = match &a.candidates {
        Some(path) => serde_json::from_str(&read_tracked(path, &mut prov)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
        None => top_third_candidates(&inputs.views),
    };

    let d = inputs.inst.dim();
    let projection = projection_params(inputs.views.dim(), cfg.seed);
    let (attn_views, attn_bev) = attention_params(d, cfg.attn_layers, cfg.attn_heads, cfg.seed)?;
    let projected = inputs
        .views
        .views()
        .iter()
        .map(|m| project_features(m, &projection))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| inputs.views.replace_views(v))
        .map_err(|e| CliError::Semantic(format!("shape mismatch: {e}")))?;
    let fuser = Fuser {
        bev: inputs.bev,
        inst: inputs.inst,
        sel: cfg.selection(),
        attn_views: ViewAttention::Shared(attn_views),
        attn_bev,
    };
    let baseline = fuser.fuse(&projected).map_err(|e| CliError::Semantic(format!("shape mismatch: {e}")))?;
    let downstream = Downstream {
        fuser,
        baseline,
        view_rows: inputs.views.token_counts().iter().map(|n| (*n).min(cfg.k_img)).sum(),
    };

    let report = run_mask_experiment(&exp, &inputs.views, &candidates, Some(&projection), |v| downstream.evaluate(v))
        .map_err(|e| CliError::Semantic(e.to_string()))?;
    let csv = report.to_csv();
    write(&a.out, &csv)?;
    let proxy_metrics = PROXY_METRICS.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    write_json(&report_path, &Envelope { provenance: &prov, body: Body { run: &report, proxy_metrics } })?;
    print!("{csv}");
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("row {} failed: {}", r.exp, r.error.as_deref().unwrap_or_default());
    }
    Ok(())
}
