use pyo3::ffi::c_str;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

use variability_py::variability_py;

fn run(code: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("v", wrap_pymodule!(variability_py)(py)).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn scores_match_oracle_from_python() {
    run(c_str!(
        r#"
c = v.Corpus.synthetic(cases=800, seed=3, climate_effect=0.2)
assert len(c) == 800
a = c.score()
assert a == c.oracle_score()
s = a.summary()
assert s["proceedings"] == 800
assert 0.0 <= s["mean_gamma"] <= 1.0
assert len(a.proceedings()) == 800
assert all(phi is None or 0.0 <= phi <= 1.0 for phi in a.judges().values())
"#
    ));
}

#[test]
fn stats_kit_from_python() {
    run(c_str!(
        r#"
rho, p = v.spearman([1.0, 2.0, 3.0], [1.0, 3.0, 2.0])
assert rho == 0.5
assert v.bonferroni([0.001, 0.02, 0.5], 0.05) == [True, False, False]
try:
    v.bonferroni([], 0.05)
    raise AssertionError("expected ValueError")
except ValueError:
    pass
"#
    ));
}

#[test]
fn trend_from_python() {
    run(c_str!(
        r#"
import datetime
start = datetime.date(2010, 1, 4)
weeks = [(start + datetime.timedelta(weeks=i)).isoformat() for i in range(200)]
values = [0.2 + 0.001 * i for i in range(200)]
fit = v.fit_trend(weeks, values)
assert all(abs(a - b) < 1e-3 for a, b in zip(fit["fitted"], values))
assert len(fit["changepoints"]) == 25
"#
    ));
}
