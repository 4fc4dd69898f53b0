use fusekit_core::interactor::{token_budget, TokenBudget};
use serde::Serialize;
use serde_json::json;

use crate::args::BudgetArgs;
use crate::config::Config;
use crate::error::CliError;
use crate::io::{to_pretty_json, write};
use crate::provenance::{Envelope, Provenance};

#[derive(Serialize)]
struct Body {
    view_tokens: Vec<usize>,
    bev_tokens: usize,
    budget: TokenBudget,
}

pub fn run(mut cfg: Config, a: BudgetArgs) -> Result<(), CliError> {
    if let Some(k) = a.k_img {
        cfg.k_img = k;
    }
    if let Some(k) = a.k_bev {
        cfg.k_bev = k;
    }
    let view_tokens = a.view_tokens.clone().unwrap_or_else(|| vec![a.tokens_per_view; a.views]);
    if view_tokens.is_empty() {
        return Err(CliError::Input("at least one camera view is required".into()));
    }
    if let Some(i) = view_tokens.iter().position(|n| *n == 0) {
        return Err(CliError::Input(format!("view {i} has no tokens")));
    }
    let budget = token_budget(&cfg.selection(), &view_tokens, a.bev_tokens).map_err(|e| CliError::Input(e.to_string()))?;
    let prov = Provenance::new("budget", &cfg, json!({}));
    let text = to_pretty_json(&Envelope {
        provenance: &prov,
        body: Body {
            view_tokens,
            bev_tokens: a.bev_tokens,
            budget,
        },
    });
    match &a.out {
        Some(path) => {
            write(path, &text)?;
            eprintln!("{} -> {} tokens (ratio {:.4})", budget.raw, budget.fused, budget.ratio);
        }
        None => print!("{text}"),
    }
    Ok(())
}
