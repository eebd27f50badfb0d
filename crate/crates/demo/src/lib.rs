//! Browser bindings for the demo page. Each export returns a JSON string the
//! page draws on a canvas.

use graph_max_shift::experiments::{self, EpsRule, ExperimentConfig};
use graph_max_shift::{build_geometric_graph, cluster, GaussianMixture, MergeParams};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct ClusterView {
    points: Vec<[f64; 2]>,
    labels: Vec<usize>,
    degrees: Vec<u32>,
    endpoints: Vec<usize>,
    k: usize,
    eps: f64,
}

fn planar(name: &str) -> Result<GaussianMixture, String> {
    let gm = GaussianMixture::fixture(name).map_err(|e| e.to_string())?;
    if gm.dim() != 2 {
        return Err(format!("{name} is not planar"));
    }
    Ok(gm)
}

/// Samples `n` points, builds the eps graph and clusters it.
pub fn cluster_view(
    mixture: &str,
    n: usize,
    seed: u64,
    eps: f64,
    tau: usize,
) -> Result<String, String> {
    let gm = planar(mixture)?;
    let ps = gm.sample(n, seed).map_err(|e| e.to_string())?;
    let g = build_geometric_graph(&ps, eps).map_err(|e| e.to_string())?;
    let shift = cluster(&g, MergeParams::new(tau));
    let view = ClusterView {
        points: ps.iter().map(|p| [p[0], p[1]]).collect(),
        labels: shift
            .clustering
            .labels()
            .iter()
            .map(|l| l.expect("every node is labeled"))
            .collect(),
        degrees: g.degrees().as_slice().to_vec(),
        endpoints: shift.endpoints,
        k: shift.clustering.k(),
        eps,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Graph path and density Max Shift path from data point `start`.
pub fn paths_view(
    mixture: &str,
    n: usize,
    seed: u64,
    eps: f64,
    start: usize,
) -> Result<String, String> {
    planar(mixture)?;
    let cfg = ExperimentConfig::new(mixture, n, EpsRule::Fixed(eps), 0, seed);
    let pair = experiments::paths(&cfg, start).map_err(|e| e.to_string())?;
    let out = json!({
        "graph": pair.graph_points,
        "nodes": pair.graph_path.nodes(),
        "density": pair.density_path,
        "modes": pair.modes.modes,
        "deviation": experiments::path_deviation(&pair.graph_points, &pair.density_path),
    });
    Ok(out.to_string())
}

/// Density on a `res x res` grid over the mixture's 3-sigma box, row-major
/// from the top-left, plus the box itself.
pub fn density_view(mixture: &str, res: usize) -> Result<String, String> {
    let gm = planar(mixture)?;
    if res < 2 {
        return Err("resolution must be at least 2".into());
    }
    let (lo, hi) = gm.bounding_box(3.0);
    let mut values = Vec::with_capacity(res * res);
    for r in 0..res {
        let y = hi[1] - (hi[1] - lo[1]) * r as f64 / (res - 1) as f64;
        for c in 0..res {
            let x = lo[0] + (hi[0] - lo[0]) * c as f64 / (res - 1) as f64;
            values.push(gm.pdf(&[x, y]).map_err(|e| e.to_string())?);
        }
    }
    Ok(json!({ "lo": lo, "hi": hi, "res": res, "values": values }).to_string())
}

#[wasm_bindgen(js_name = clusterSample)]
pub fn cluster_sample(
    mixture: &str,
    n: usize,
    seed: u32,
    eps: f64,
    tau: usize,
) -> Result<String, JsValue> {
    cluster_view(mixture, n, seed as u64, eps, tau).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = climbPaths)]
pub fn climb_paths(
    mixture: &str,
    n: usize,
    seed: u32,
    eps: f64,
    start: usize,
) -> Result<String, JsValue> {
    paths_view(mixture, n, seed as u64, eps, start).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = densityGrid)]
pub fn density_grid(mixture: &str, res: usize) -> Result<String, JsValue> {
    density_view(mixture, res).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_view_shapes() {
        let v: serde_json::Value =
            serde_json::from_str(&cluster_view("trimodal", 300, 1, 0.5, 1).unwrap()).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 300);
        assert_eq!(v["labels"].as_array().unwrap().len(), 300);
        let k = v["k"].as_u64().unwrap() as usize;
        assert!(v["labels"]
            .as_array()
            .unwrap()
            .iter()
            .all(|l| (l.as_u64().unwrap() as usize) < k));
    }

    #[test]
    fn paths_view_starts_at_point() {
        let v: serde_json::Value =
            serde_json::from_str(&paths_view("bimodal-close", 200, 3, 0.4, 7).unwrap()).unwrap();
        assert_eq!(v["graph"][0], v["density"][0]);
        assert_eq!(v["nodes"][0], 7);
    }

    #[test]
    fn density_view_grid() {
        let v: serde_json::Value =
            serde_json::from_str(&density_view("bimodal-close", 8).unwrap()).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), 64);
        assert!(density_view("bimodal-close", 1).is_err());
        assert!(cluster_view("no-such", 10, 0, 0.1, 1).is_err());
    }
}
