mod common;

use std::path::Path;

use safeset::config::{AnalysisConfig, OssChoice};
use safeset::{analyze_dataset, emit_report, AnalysisReport};
use safeset_core::simgen::{ncap_battery, IDM_0};

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, report: &serde_json::Value) {
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

fn ncap_config() -> AnalysisConfig {
    AnalysisConfig { oss: OssChoice::Preset("ncap-lead".into()), ..Default::default() }
}

#[test]
fn lead_following_outputs_match_schema_and_slices() {
    let run = analyze_dataset(&ncap_config(), ncap_battery(&IDM_0, 0).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&run.report, &run.spec, &run.outcome, dir.path()).unwrap();
    assert_eq!(files.len(), 3 + run.report.slices.len());
    assert!(!run.report.slices.is_empty());

    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_valid(&schema(), &json);
    let back: AnalysisReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, run.report);
    assert_eq!(back.to_json().unwrap(), text);

    let ds = run.outcome.safe_states.points();
    let ds_rows = std::fs::read_to_string(dir.path().join("ds.csv")).unwrap().lines().count();
    assert_eq!(ds_rows, ds.len() + 1);

    for plan in &run.report.slices {
        let mut rdr = csv::Reader::from_path(dir.path().join(&plan.file_name)).unwrap();
        let headers = rdr.headers().unwrap().clone();
        assert_eq!(headers.iter().collect::<Vec<_>>(), ["ix", "iy", "v1", "p", "member", "ds_points"]);
        let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 100 * 100);
        let resolution = 100;
        let bounds = run.spec.dimension_bounds();
        let (xr, yr) = (bounds[plan.x_axis], bounds[plan.y_axis]);
        let idx = |v: f64, lo: f64, len: f64| (((v - lo) / len * resolution as f64).floor().max(0.0) as usize).min(resolution - 1);
        let in_band: Vec<&Vec<f64>> = ds.iter().filter(|p| plan.band.contains(p[plan.band_axis])).collect();
        assert!(!in_band.is_empty());
        let total: u64 = rows.iter().map(|r| r[5].parse::<u64>().unwrap()).sum();
        assert_eq!(total, in_band.len() as u64);
        for p in in_band {
            let (ix, iy) = (idx(p[plan.x_axis], xr.lo, xr.len()), idx(p[plan.y_axis], yr.lo, yr.len()));
            let row = &rows[iy * resolution + ix];
            assert_eq!((&row[0], &row[1]), (ix.to_string().as_str(), iy.to_string().as_str()));
            assert_eq!(&row[4], "1", "safe state {p:?} not in a member cell of {}", plan.file_name);
        }
        // Members are a strict part of the plane.
        let members = rows.iter().filter(|r| &r[4] == "1").count();
        assert!(members > 0 && members < rows.len());
    }

    let shape: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("shape.json")).unwrap()).unwrap();
    assert_eq!(shape["empty"], false);
    assert_eq!(shape["dimension_names"], serde_json::json!(["v0", "v1", "p"]));
    for m in shape["members"].as_array().unwrap() {
        let lo = m["lower"].as_array().unwrap();
        let hi = m["upper"].as_array().unwrap();
        for v in m["vertices"].as_array().unwrap() {
            for (k, x) in v.as_array().unwrap().iter().enumerate() {
                let x = x.as_f64().unwrap();
                assert!(x >= lo[k].as_f64().unwrap() - 1e-9 && x <= hi[k].as_f64().unwrap() + 1e-9);
            }
        }
    }
}

#[test]
fn multi_vehicle_report_matches_schema() {
    let cfg = AnalysisConfig {
        oss: OssChoice::Preset("highd-multi".into()),
        cluster_max: Some(1000),
        ..Default::default()
    };
    let run = analyze_dataset(&cfg, common::multilane()).unwrap();
    assert_eq!(run.report.state_space.dimension_names.len(), 13);
    assert_eq!(run.report.slices.len(), 6);
    let json = serde_json::to_value(&run.report).unwrap();
    assert_valid(&schema(), &json);
}

#[test]
fn schema_rejects_unknown_and_missing_fields() {
    let run = analyze_dataset(&ncap_config(), ncap_battery(&IDM_0, 3).unwrap()).unwrap();
    let v = schema();
    let mut json = serde_json::to_value(&run.report).unwrap();
    json["extra"] = serde_json::json!(1);
    assert!(!v.is_valid(&json));
    let mut json = serde_json::to_value(&run.report).unwrap();
    json.as_object_mut().unwrap().remove("epsilon");
    assert!(!v.is_valid(&json));
}
