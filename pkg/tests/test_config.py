import numpy as np
import pytest

from sabc.config import load_config, resolve_config, validate_config
from sabc.errors import ConfigError
from sabc.presets import PRESETS, preset_config


def minimal_doc(**over):
    doc = {
        "dataset": {"benchmark": "linear", "noise_pct": 0.0, "seed": 0},
        "dictionary": [
            {"kind": "constant"},
            {"kind": "monomial", "px": 1, "pv": 0},
            {"kind": "monomial", "px": 0, "pv": 1},
        ],
        "sabc": {
            "N_S": 20, "alpha": 0.2, "eta": 0.9, "beta": 0.1, "lambda": 0.2,
            "K_max": 2, "epsilon1": 1e5, "epsilon_tol": 0.01, "gamma": 2.0,
            "seed": 0, "slab": {"scheme": "uniform", "a": 1.0},
        },
        "output": "runs/test",
    }
    doc.update(over)
    return doc


def test_minimal_doc_resolves():
    r = resolve_config(minimal_doc())
    assert len(r.dictionary) == 3
    assert r.cfg.N_S == 20
    assert r.dataset.m == 1000
    assert r.truth is None
    assert str(r.output) == "runs/test"


def test_missing_section_reports_path():
    doc = minimal_doc()
    del doc["sabc"]
    with pytest.raises(ConfigError, match="<root>"):
        validate_config(doc)


def test_bad_value_reports_path():
    doc = minimal_doc()
    doc["sabc"]["alpha"] = 1.5
    with pytest.raises(ConfigError, match="sabc/alpha"):
        validate_config(doc)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        validate_config(minimal_doc(extra=1))
    doc = minimal_doc()
    doc["sabc"]["typo"] = 3
    with pytest.raises(ConfigError):
        validate_config(doc)
    doc = minimal_doc()
    doc["dataset"]["benchmark"] = "lorenz"
    with pytest.raises(ConfigError):
        validate_config(doc)


def test_rounds_schema():
    doc = minimal_doc()
    doc["sabc"]["rounds"] = [{}, {"epsilon1": 50.0}]
    r = resolve_config(doc)
    assert len(r.cfg.resolved_rounds()) == 2
    doc["sabc"]["rounds"] = [{"gamma": 2.0}]
    with pytest.raises(ConfigError):
        validate_config(doc)
    doc["sabc"]["rounds"] = []
    with pytest.raises(ConfigError):
        validate_config(doc)


def test_scalar_lambda_scales_with_slab():
    doc = minimal_doc()
    doc["sabc"]["slab"] = {"scheme": "uniform", "a": 10.0}
    r = resolve_config(doc)
    assert np.allclose(r.cfg.lam, 2.0)  # 0.2 * half-width 10


def test_scalar_lambda_informed_per_coordinate():
    doc = minimal_doc()
    doc["dictionary"] = [
        {"kind": "monomial", "px": 1, "pv": 0},
        {"kind": "monomial", "px": 3, "pv": 0},
        {"kind": "monomial", "px": 0, "pv": 1},
    ]
    doc["sabc"]["slab"] = {"scheme": "informed"}
    r = resolve_config(doc)
    # slab widths: x -> 1000, x^3 -> 100000, xd -> 1
    assert np.allclose(r.cfg.lam, [200.0, 20000.0, 0.2])


def test_vector_lambda_checked_against_dictionary():
    doc = minimal_doc()
    doc["sabc"]["lambda"] = [0.1, 0.2]
    with pytest.raises(ConfigError, match="lambda"):
        resolve_config(doc)
    doc["sabc"]["lambda"] = [0.1, 0.2, 0.3]
    assert np.allclose(resolve_config(doc).cfg.lam, [0.1, 0.2, 0.3])


def test_informed_slab_rejects_extra_keys():
    doc = minimal_doc()
    doc["sabc"]["slab"] = {"scheme": "informed", "a": 2.0}
    with pytest.raises(ConfigError):
        validate_config(doc)


def test_truth_maps_labels_to_indices():
    doc = minimal_doc(truth={"x": -500.0, "xd": -0.5})
    r = resolve_config(doc)
    assert r.truth == {1: -500.0, 2: -0.5}


def test_truth_unknown_label_rejected():
    doc = minimal_doc(truth={"sin(x)": -1.0})
    with pytest.raises(ConfigError):
        resolve_config(doc)


def test_truth_zero_coefficient_rejected():
    doc = minimal_doc(truth={"x": 0.0})
    with pytest.raises(ConfigError, match="zero"):
        resolve_config(doc)


def test_preset_dictionary_by_name():
    doc = minimal_doc(dictionary="pendulum23")
    doc["dataset"] = {"benchmark": "pendulum"}
    r = resolve_config(doc)
    assert len(r.dictionary) == 23
    assert r.dataset.m == 300


def test_dataset_from_saved_files(tmp_path, linear_dataset):
    from sabc.simulator import save_dataset

    save_dataset(linear_dataset, tmp_path, seed=3, truth_name="linear")
    doc = minimal_doc(dataset={"path": str(tmp_path)})
    r = resolve_config(doc)
    assert r.dataset.m == linear_dataset.m
    assert np.array_equal(r.dataset.acc, linear_dataset.acc)
    assert r.dataset_meta["truth_name"] == "linear"


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(bad)


def test_all_presets_validate():
    for name in PRESETS:
        doc = preset_config(name, seed=1)
        r = resolve_config(doc)
        assert r.cfg.N_S == 400
        assert r.cfg.alpha == 0.05
        assert r.cfg.eta == 0.9
        assert r.cfg.K_max == 5
        assert r.truth, name
        assert len(r.cfg.resolved_rounds()) == 2


def test_preset_schedules_match_published_settings():
    r = resolve_config(preset_config("pendulum-paper", seed=0))
    assert len(r.dictionary) == 23
    assert r.cfg.beta == 1.0 and r.cfg.gamma == 4.0
    assert np.allclose(r.cfg.lam, 0.2)
    r2 = r.cfg.resolved_rounds()[1]
    assert r2.epsilon1 == 60.0 and r2.epsilon_tol == 0.001

    r = resolve_config(preset_config("linear-paper", seed=0))
    assert len(r.dictionary) == 21
    assert r.cfg.beta == 0.05 and r.cfg.gamma == 2.0
    assert r.cfg.lam[r.dictionary.index_of("x")] == 200.0  # informed slab
    r2 = r.cfg.resolved_rounds()[1]
    assert r2.epsilon1 == 20.0 and r2.epsilon_tol == 1e-5

    r = resolve_config(preset_config("duffing-paper", seed=0))
    r2 = r.cfg.resolved_rounds()[1]
    assert r2.epsilon1 == 20.0 and r2.beta == 0.5

    r = resolve_config(preset_config("viscous-paper", seed=0))
    r2 = r.cfg.resolved_rounds()[1]
    assert r2.epsilon1 == 50.0 and r2.beta == 0.005
