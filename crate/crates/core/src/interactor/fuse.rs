use rayon::prelude::*;

use super::select::{score_tokens, select_topk};
use super::{
    BevFeatureMap, FusedTokenSequence, InstructionEmbedding, InteractorError, SelectionConfig, TokenSource,
    ViewFeatureSet,
};
use crate::numerics::{cross_attention, mlp_forward, CrossAttnParams, Matrix, MlpParams};

/// Maps encoder features to the language hidden size with the two-layer MLP.
pub fn project_features(raw: &Matrix, p: &MlpParams) -> Result<Matrix, InteractorError> {
    Ok(mlp_forward(raw, p)?)
}

/// Selected tokens attend over the full token set of their source.
pub fn interact(selected: &Matrix, full: &Matrix, p: &CrossAttnParams) -> Result<Matrix, InteractorError> {
    Ok(cross_attention(selected, full, full, p)?)
}

/// Attention parameters for the camera views.
#[derive(Clone, Debug)]
pub enum ViewAttention {
    /// One parameter set reused for every view.
    Shared(CrossAttnParams),
    /// One parameter set per view, in view order.
    PerView(Vec<CrossAttnParams>),
}

impl ViewAttention {
    fn for_view(&self, i: usize) -> Result<&CrossAttnParams, InteractorError> {
        match self {
            ViewAttention::Shared(p) => Ok(p),
            ViewAttention::PerView(ps) => ps.get(i).ok_or_else(|| {
                InteractorError::Precondition(format!("no attention parameters for view {i}"))
            }),
        }
    }
}

impl From<CrossAttnParams> for ViewAttention {
    fn from(p: CrossAttnParams) -> Self {
        ViewAttention::Shared(p)
    }
}

fn fuse_source(
    label: &str,
    tokens: &Matrix,
    inst: &InstructionEmbedding,
    cfg: &SelectionConfig,
    k: usize,
    attn: &CrossAttnParams,
) -> Result<(Matrix, Vec<TokenSource>), InteractorError> {
    let run = || -> Result<_, InteractorError> {
        let scores = score_tokens(tokens, inst, cfg.reduction)?;
        let sel = select_topk(tokens, &scores, k)?;
        let out = interact(&sel.features, tokens, attn)?;
        let prov = sel
            .indices
            .iter()
            .map(|&index| TokenSource {
                source: label.to_string(),
                index,
            })
            .collect();
        Ok((out, prov))
    };
    run().map_err(|e| e.labelled(label))
}

/// Runs selection and interaction for every view and the BEV map, then
/// concatenates the results (views in order, BEV last).
pub fn fuse(
    views: &ViewFeatureSet,
    bev: &BevFeatureMap,
    inst: &InstructionEmbedding,
    cfg: &SelectionConfig,
    attn_mv: &ViewAttention,
    attn_bev: &CrossAttnParams,
) -> Result<FusedTokenSequence, InteractorError> {
    cfg.validate()?;
    let d = inst.dim();
    if views.dim() != d || bev.tokens().cols() != d {
        return Err(InteractorError::Precondition(format!(
            "hidden sizes disagree: instruction {d}, views {}, bev {}",
            views.dim(),
            bev.tokens().cols()
        )));
    }
    let per_view: Vec<_> = views
        .views()
        .par_iter()
        .zip(views.view_names().par_iter())
        .enumerate()
        .map(|(i, (tokens, name))| {
            let attn = attn_mv.for_view(i).map_err(|e| e.labelled(name))?;
            fuse_source(name, tokens, inst, cfg, cfg.k_img, attn)
        })
        .collect::<Result<_, _>>()?;
    let bev_part = fuse_source("bev", bev.tokens(), inst, cfg, cfg.k_bev, attn_bev)?;

    let mut parts: Vec<&Matrix> = per_view.iter().map(|(m, _)| m).collect();
    parts.push(&bev_part.0);
    let tokens = Matrix::vstack(&parts)?;
    let provenance = per_view
        .iter()
        .flat_map(|(_, p)| p.iter().cloned())
        .chain(bev_part.1)
        .collect();
    Ok(FusedTokenSequence { tokens, provenance })
}
