use verikit_wasm_demo::{shift_graph, shift_report, tiling, tiling_report, wilber_report};

#[test]
fn tiling_construction_and_perturbation() {
    let ok = tiling_report(0, 1, 5, 2, 0, 1).unwrap();
    assert_eq!(ok["holds"], true);
    assert_eq!(ok["fibers"].as_array().unwrap().len(), 3);
    let bad = tiling_report(0, 1, 5, 2, 1, 10).unwrap();
    assert_eq!(bad["holds"], false);
    assert_eq!(bad["residues"][1]["partition"], false);
    assert!(bad["residues"][1]["witness"]["kind"].is_string());
}

#[test]
fn errors_come_back_as_json() {
    let v: serde_json::Value = serde_json::from_str(&tiling(1, 0, 5, 0, 0, 1)).unwrap();
    assert!(v["error"].as_str().unwrap().contains("rational"));
    let v: serde_json::Value = serde_json::from_str(&shift_graph(40)).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn wilber_and_shift() {
    let w = wilber_report(3, 32, 100).unwrap();
    assert_eq!(w["holds"], true);
    assert_eq!(w["decomposition_holds"], true);
    let s = shift_report(5).unwrap();
    assert_eq!(s["chi"], 3);
    assert_eq!(s["vertices"].as_array().unwrap().len(), 10);
}
