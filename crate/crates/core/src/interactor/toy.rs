use super::{FusedTokenSequence, InstructionEmbedding, InteractorError, ToyDecoderOutput};
use crate::numerics::{cross_attention, CrossAttnParams, Matrix};

/// Shape-level stand-in for the language decoder: `n_resp` fixed query rows
/// attend over the instruction tokens followed by the fused visual tokens.
///
/// Query row `r` is zero except component 0, which holds `r / n_resp`.
pub fn toy_pipeline(
    inst: &InstructionEmbedding,
    fused: &FusedTokenSequence,
    decoder: &CrossAttnParams,
    n_resp: usize,
) -> Result<ToyDecoderOutput, InteractorError> {
    if n_resp == 0 {
        return Err(InteractorError::Precondition("n_resp must be at least 1".into()));
    }
    let d = inst.dim();
    let context = Matrix::vstack(&[inst.tokens(), &fused.tokens])?;
    let mut queries = Matrix::zeros(n_resp, d);
    for r in 0..n_resp {
        queries.set(r, 0, r as f64 / n_resp as f64)?;
    }
    let response_tokens = cross_attention(&queries, &context, &context, decoder)?;
    Ok(ToyDecoderOutput { response_tokens })
}
