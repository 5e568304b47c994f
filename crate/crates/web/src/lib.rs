//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no glue
//! beyond `JSON.parse`. The logic lives in [`api`] and is tested natively.

use wasm_bindgen::prelude::*;

pub mod api;

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

/// Workload spec JSON for preset `n`.
#[wasm_bindgen]
pub fn usecase(n: u32) -> Result<String, JsValue> {
    api::usecase(n).map_err(js_err)
}

/// Profile JSON for a bundled profile name.
#[wasm_bindgen]
pub fn bundled_profile(name: &str) -> Result<String, JsValue> {
    api::bundled_profile(name).map_err(js_err)
}

/// Per-core loads of the shared and separate allocations for one workload.
#[wasm_bindgen]
pub fn packing(spec_json: &str, seed: u64, separate_sdn: &str) -> Result<String, JsValue> {
    api::packing(spec_json, seed, separate_sdn).map_err(js_err)
}

/// Full comparison report (trials plus boxplot statistics).
#[wasm_bindgen]
pub fn compare(
    spec_json: &str,
    profile_json: &str,
    trials: u32,
    seed: u64,
    separate_sdn: &str,
) -> Result<String, JsValue> {
    api::compare(spec_json, profile_json, trials as usize, seed, separate_sdn).map_err(js_err)
}

/// `[[load, watts], ...]` sampled at `steps` evenly spaced loads.
#[wasm_bindgen]
pub fn power_curve(profile_json: &str, steps: u32) -> Result<String, JsValue> {
    api::power_curve(profile_json, steps as usize).map_err(js_err)
}
