#![allow(dead_code)]

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fusekit_core::riskqa::{
    build_qa_prompt, build_risk_prompt, parse_risk_response, ChatMessage, ChatRequest, PipelineConfig, ReplayClient,
    Scene,
};

pub const BIN: &str = env!("CARGO_BIN_EXE_fusekit");

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn riskqa_fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/riskqa").join(name);
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Runs the binary with the endpoint variables cleared.
pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(BIN)
        .args(args)
        .env_remove("FK_API_ENDPOINT")
        .env_remove("FK_API_KEY")
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

pub fn write_jsonl<T: serde::Serialize>(p: &Path, items: &[T]) {
    let mut s = String::new();
    for i in items {
        s.push_str(&serde_json::to_string(i).unwrap());
        s.push('\n');
    }
    fs::write(p, s).unwrap();
}

pub fn appendix_scene() -> Scene {
    let text = fs::read_to_string(fixture("appendix_scene.jsonl")).unwrap();
    serde_json::from_str(text.lines().next().unwrap()).unwrap()
}

/// Replay directory answering the two appendix exchanges for the default
/// client settings.
pub fn appendix_mock_dir(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let cfg = PipelineConfig::default();
    let step1 = riskqa_fixture("step1_response.txt");
    let step2 = riskqa_fixture("step2_response.txt");
    let request = |model: &str, prompt: String| ChatRequest {
        model: model.into(),
        messages: vec![ChatMessage::user(prompt)],
        temperature: cfg.temperature,
        seed: cfg.seed,
    };
    let scene = appendix_scene();
    let r1 = request(&cfg.risk_model, build_risk_prompt(&scene.objects));
    let doc = parse_risk_response(&step1).unwrap();
    let r2 = request(&cfg.qa_model, build_qa_prompt(&doc));
    let entries: HashMap<PathBuf, String> = HashMap::from([
        (ReplayClient::entry_path(dir, &r1), step1),
        (ReplayClient::entry_path(dir, &r2), step2),
    ]);
    for (p, text) in entries {
        fs::write(p, text).unwrap();
    }
}
