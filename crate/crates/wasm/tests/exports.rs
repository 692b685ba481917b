use btmem_wasm::{bifset_json, portrait_json, sphere_json};
use serde_json::Value;

#[test]
fn diagram_has_all_curves() {
    let v: Value = serde_json::from_str(&bifset_json(0.1, 40).unwrap()).unwrap();
    assert_eq!(v["curves"].as_array().unwrap().len(), 7);
    assert_eq!(v["points"].as_array().unwrap().len(), 8);
    assert!(bifset_json(-1.0, 40).is_err());
}

#[test]
fn portrait_of_limit_cycle_point() {
    let v: Value = serde_json::from_str(&portrait_json(0.0, -0.3, 0.1, 40.0).unwrap()).unwrap();
    assert_eq!(v["has_limit_cycle"], true);
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 3);
    assert_eq!(v["orbits"].as_array().unwrap().len(), 8);
    assert_eq!(v["cycle"].as_array().unwrap().len(), 1);
    assert!(portrait_json(f64::NAN, 0.0, 0.1, 1.0).is_err());
}

#[test]
fn sphere_slices_close() {
    let v: Value = serde_json::from_str(&sphere_json(1.0, 4.8, 5.0, 80.0, 5).unwrap()).unwrap();
    assert_eq!(v["slices"].as_array().unwrap().len(), 5);
    assert!(sphere_json(3.0, 1.0, 5.0, 80.0, 5).is_err());
}
