use pyo3::prelude::*;
use pyo3::types::PyDict;
use robsel::robsel;
use std::ffi::CString;

fn run(code: &str) -> PyResult<()> {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(robsel);
        Python::initialize();
    });
    Python::attach(|py| {
        let globals = PyDict::new(py);
        py.run(&CString::new(code).unwrap(), Some(&globals), None)
    })
}

#[test]
fn minmax_example_round_trip() {
    run(r#"
import robsel
inst = robsel.Instance.minmax_discrete(2, [[1, 5, 3, 4], [4, 2, 5, 1]])
assert inst.robust_value([0, 3]) == 5
assert inst.brute_force() == ([0, 3], 5)
out = inst.solve()
assert out["objective"] == 5 and out["solution"] == [0, 3], out
"#)
    .unwrap();
}

#[test]
fn errors_map_to_value_error() {
    run(r#"
import robsel
try:
    robsel.Instance.sample("MM-D-U", 4, 2, seed=1)
except ValueError as e:
    assert "N" in str(e), e
else:
    raise AssertionError("missing N accepted")
"#)
    .unwrap();
}

#[test]
fn sampled_instances_harden_soundly() {
    run(r#"
import robsel
s = robsel.Instance.sample("MMR-D-1", 5, 2, seed=3, N=2)
h, t = s.harden(1)
assert robsel.within_neighborhood(s, h, 1)
assert t["best_value"] >= t["initial_value"]
assert h.brute_force()[1] == t["best_value"]
"#)
    .unwrap();
}
