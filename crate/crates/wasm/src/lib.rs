//! wasm-bindgen exports used by the static demo page in `www/`.
//!
//! Every function takes plain strings and numbers and returns a JSON string,
//! or throws a string error.

use std::path::Path;

use crlscore::aggregate::{build_scorecard, resolve_models, CardConfig, ValuesTable};
use crlscore::graph::{d_separated, find_confounders, junction_census};
use crlscore::scm::render_pendulum;
use crlscore::svg::{emit_svg, PlotKind, PlotSpec};
use crlscore::CausalGraph;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Scores a card. `values_csv` may be empty when the config lists values
/// inline. Returns `{card, svg}`.
pub fn scorecard_json(config_toml: &str, values_csv: &str, plot: &str) -> Result<String, String> {
    let config = CardConfig::from_toml_str(config_toml).map_err(|e| e.to_string())?;
    let values = if values_csv.trim().is_empty() {
        None
    } else {
        Some(ValuesTable::parse_csv(values_csv).map_err(|e| e.to_string())?)
    };
    let models = resolve_models(&config, Path::new("."), values.as_ref()).map_err(|e| e.to_string())?;
    let card = build_scorecard(&config, &models).map_err(|e| e.to_string())?;
    let kind = match plot {
        "radar" => PlotKind::Radar,
        "origami" => PlotKind::Origami { h: card.h },
        other => return Err(format!("unknown plot kind {other:?}")),
    };
    let svg = emit_svg(&PlotSpec::from_card(&card, kind)).map_err(|e| e.to_string())?;
    Ok(json!({ "card": card, "svg": svg }).to_string())
}

/// Renders one scene. Returns the shadow variables and the raster as rows of
/// 0/1.
pub fn pendulum_json(angle: f64, light: f64) -> Result<String, String> {
    let scene = render_pendulum(angle, light).map_err(|e| e.to_string())?;
    let m = &scene.raster;
    let rows: Vec<Vec<u8>> = (0..m.height()).map(|y| (0..m.width()).map(|x| m.get(x, y) as u8).collect()).collect();
    Ok(json!({
        "shadow_length": scene.shadow_length,
        "shadow_position": scene.shadow_position,
        "width": m.width(),
        "height": m.height(),
        "raster": rows,
    })
    .to_string())
}

/// d-separation plus the junction census of the same graph.
pub fn dsep_json(graph_json: &str, x: &str, y: &str, given: &str) -> Result<String, String> {
    let g = CausalGraph::from_json_str(graph_json).map_err(|e| e.to_string())?;
    let given: Vec<&str> = given.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let separated = d_separated(&g, x, y, &given).map_err(|e| e.to_string())?;
    let c = junction_census(&g);
    let confounders: Vec<String> = find_confounders(&g)
        .iter()
        .map(|f| format!("{} -> {} confounded by {}", f.cause, f.effect, f.confounder))
        .collect();
    Ok(json!({
        "separated": separated,
        "chains": c.chains,
        "forks": c.forks,
        "colliders": c.colliders,
        "confounders": confounders,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn scorecard(config_toml: &str, values_csv: &str, plot: &str) -> Result<String, JsValue> {
    scorecard_json(config_toml, values_csv, plot).map_err(fail)
}

#[wasm_bindgen]
pub fn pendulum(angle: f64, light: f64) -> Result<String, JsValue> {
    pendulum_json(angle, light).map_err(fail)
}

#[wasm_bindgen]
pub fn dsep(graph_json: &str, x: &str, y: &str, given: &str) -> Result<String, JsValue> {
    dsep_json(graph_json, x, y, given).map_err(fail)
}
