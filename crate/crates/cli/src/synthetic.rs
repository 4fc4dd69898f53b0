//! Interactor inputs and parameters for the demo and the mask experiment,
//! either read from FKMX files or generated from a seed.

use fusekit_core::interactor::{BevFeatureMap, InstructionEmbedding, ViewFeatureSet};
use fusekit_core::mask::rng::{derive_seed, stream};
use fusekit_core::numerics::{CrossAttnParams, MlpParams};
use fusekit_core::{CameraView, Matrix};
use rand::Rng;

use crate::args::InteractorArgs;
use crate::error::CliError;
use crate::io::read_matrix;
use crate::provenance::Provenance;

pub const SYNTH_VIEW_TOKENS: usize = 576;
pub const SYNTH_BEV_SIDE: usize = 50;
pub const SYNTH_DIM: usize = 64;
pub const SYNTH_INST_TOKENS: usize = 16;

pub struct InteractorInputs {
    pub views: ViewFeatureSet,
    pub bev: BevFeatureMap,
    pub inst: InstructionEmbedding,
}

fn uniform(rows: usize, cols: usize, seed: u64, label: &str) -> Matrix {
    let mut rng = stream(seed, label);
    Matrix::new(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .expect("positive shape")
}

/// Six camera views of 576 tokens, a 50×50 BEV grid and 16 instruction
/// tokens, all of width 64, with entries uniform in [-1, 1).
pub fn synthetic_inputs(seed: u64) -> InteractorInputs {
    let views = CameraView::ALL
        .iter()
        .map(|v| uniform(SYNTH_VIEW_TOKENS, SYNTH_DIM, seed, &format!("synthetic/{v}")))
        .collect();
    let names = CameraView::ALL.iter().map(|v| v.to_string()).collect();
    let bev = uniform(SYNTH_BEV_SIDE * SYNTH_BEV_SIDE, SYNTH_DIM, seed, "synthetic/bev");
    InteractorInputs {
        views: ViewFeatureSet::with_names(views, names).expect("synthetic views agree"),
        bev: BevFeatureMap::new(bev, (SYNTH_BEV_SIDE, SYNTH_BEV_SIDE)).expect("grid matches token count"),
        inst: InstructionEmbedding::new(uniform(SYNTH_INST_TOKENS, SYNTH_DIM, seed, "synthetic/instruction")),
    }
}

/// Leading `⌊n/3⌋` rows of each view, i.e. the top third of a row-major
/// token grid; the synthetic stand-in for sky regions.
pub fn top_third_candidates(views: &ViewFeatureSet) -> Vec<Vec<usize>> {
    views.token_counts().into_iter().map(|n| (0..n / 3).collect()).collect()
}

/// Loads inputs named on the command line, or generates them.
pub fn load_inputs(a: &InteractorArgs, seed: u64, prov: &mut Provenance) -> Result<InteractorInputs, CliError> {
    if a.synthetic {
        return Ok(synthetic_inputs(seed));
    }
    let (Some(bev_path), Some(inst_path)) = (&a.bev, &a.instruction) else {
        return Err(CliError::Input("--bev and --instruction are required without --synthetic".into()));
    };
    let views = a
        .views
        .iter()
        .map(|p| read_matrix(p, prov))
        .collect::<Result<Vec<_>, _>>()?;
    let bev = read_matrix(bev_path, prov)?;
    let inst = read_matrix(inst_path, prov)?;
    let views = ViewFeatureSet::new(views).map_err(|e| CliError::Semantic(format!("view shapes: {e}")))?;
    Ok(InteractorInputs {
        views,
        bev: BevFeatureMap::flat(bev),
        inst: InstructionEmbedding::new(inst),
    })
}

/// Cross-attention weights for the views (shared) and for BEV, each drawn
/// from its own stream of `seed`.
pub fn attention_params(d: usize, layers: usize, heads: usize, seed: u64) -> Result<(CrossAttnParams, CrossAttnParams), CliError> {
    let build = |label: &str| {
        CrossAttnParams::seeded(d, layers, heads, derive_seed(seed, label))
            .map_err(|e| CliError::Input(format!("attention parameters: {e}")))
    };
    Ok((build("attn/views")?, build("attn/bev")?))
}

/// Square projection MLP with weights and biases uniform of variance `1/d`.
pub fn projection_params(d: usize, seed: u64) -> MlpParams {
    let bound = (3.0 / d as f64).sqrt();
    let mut rng = stream(seed, "projection");
    let mut draw = |n: usize| (0..n).map(|_| rng.random_range(-bound..bound)).collect::<Vec<_>>();
    let w1 = Matrix::new(d, d, draw(d * d)).expect("positive shape");
    let b1 = draw(d);
    let w2 = Matrix::new(d, d, draw(d * d)).expect("positive shape");
    let b2 = draw(d);
    MlpParams::new(w1, b1, w2, b2).expect("consistent shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_shapes_and_determinism() {
        let a = synthetic_inputs(3);
        assert_eq!(a.views.token_counts(), vec![SYNTH_VIEW_TOKENS; 6]);
        assert_eq!(a.bev.tokens().shape(), (2500, SYNTH_DIM));
        assert_eq!(a.inst.dim(), SYNTH_DIM);
        let b = synthetic_inputs(3);
        assert_eq!(a.views.views(), b.views.views());
        assert_ne!(synthetic_inputs(4).views.views(), a.views.views());
    }

    #[test]
    fn candidates_are_leading_third() {
        let a = synthetic_inputs(0);
        let c = top_third_candidates(&a.views);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], (0..192).collect::<Vec<_>>());
    }
}
