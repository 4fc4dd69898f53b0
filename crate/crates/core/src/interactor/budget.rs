use serde::Serialize;

use super::{InteractorError, SelectionConfig};

/// Sequence length before and after selection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TokenBudget {
    pub fused: usize,
    pub raw: usize,
    /// `fused / raw`.
    pub ratio: f64,
}

/// Fused length `Σ min(k_img, N_view) + min(k_bev, N_bev)` against the
/// unfused total.
pub fn token_budget(cfg: &SelectionConfig, view_tokens: &[usize], bev_tokens: usize) -> Result<TokenBudget, InteractorError> {
    cfg.validate()?;
    if view_tokens.is_empty() {
        return Err(InteractorError::Precondition("at least one view is required".into()));
    }
    if bev_tokens == 0 {
        return Err(InteractorError::Precondition("BEV token count must be positive".into()));
    }
    let fused = view_tokens.iter().map(|&n| n.min(cfg.k_img)).sum::<usize>() + bev_tokens.min(cfg.k_bev);
    let raw = view_tokens.iter().sum::<usize>() + bev_tokens;
    Ok(TokenBudget {
        fused,
        raw,
        ratio: fused as f64 / raw as f64,
    })
}
