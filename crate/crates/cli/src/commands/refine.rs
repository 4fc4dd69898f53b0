use std::path::PathBuf;

use fusekit_core::refinery::{refine_jsonl, RefineConfig, RefineReport};
use serde::Serialize;
use serde_json::json;

use crate::args::RefineArgs;
use crate::config::Config;
use crate::error::CliError;
use crate::io::{read_tracked, to_jsonl, write, write_json};
use crate::provenance::{Envelope, Provenance};

#[derive(Serialize)]
struct Body<'a> {
    report: &'a RefineReport,
    errors: &'a [String],
}

/// Writes the refined JSONL and the report. Records that fail validation
/// are dropped, listed in the report, and turn the exit code into 3.
pub fn run(mut cfg: Config, a: RefineArgs) -> Result<(), CliError> {
    if let Some(t) = a.short_threshold {
        cfg.short_threshold = t;
    }
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    let mut prov = Provenance::new("refine", &cfg, json!({ "source": a.source }));
    let input = read_tracked(&a.input, &mut prov)?;

    let out = refine_jsonl(
        &input,
        &RefineConfig {
            source: a.source,
            short_threshold: cfg.short_threshold,
        },
    );
    write(&a.output, to_jsonl(&out.records))?;
    write_json(
        &report_path,
        &Envelope {
            provenance: &prov,
            body: Body {
                report: &out.report,
                errors: &out.errors,
            },
        },
    )?;

    let invalid = out.report.validation_drops();
    if invalid > 0 {
        for e in out.errors.iter().take(10) {
            eprintln!("{e}");
        }
        return Err(CliError::Semantic(format!(
            "{invalid} of {} records failed validation; see {}",
            out.report.input,
            report_path.display()
        )));
    }
    eprintln!("refined {} of {} records", out.report.kept, out.report.input);
    Ok(())
}
