import cmath
import math

import numpy as np
import pytest

from fibanyon.errors import FusionError, ModelFormatError
from fibanyon.model import (
    AnyonModel,
    build_model,
    load_model_text,
    pentagon_residual,
    validate_model,
)

PHI_INV = (math.sqrt(5.0) - 1.0) / 2.0


def test_fusion_table(model):
    assert model.fusion_outcomes("tau", "tau") == ("e", "tau")
    assert model.fusion_outcomes("e", "tau") == ("tau",)
    assert model.fusion_outcomes("tau", "e") == ("tau",)
    assert model.fusion_outcomes("e", "e") == ("e",)


def test_fusion_unknown_charge(model):
    with pytest.raises(FusionError):
        model.fusion_outcomes("sigma", "tau")


def test_nontrivial_f_matrix(model):
    assert model.f_symbol("tau", "tau", "tau", "tau", "e", "e") == pytest.approx(PHI_INV)
    assert model.f_symbol("tau", "tau", "tau", "tau", "tau", "tau") == pytest.approx(-PHI_INV)
    assert model.f_symbol("tau", "tau", "tau", "tau", "e", "tau") == pytest.approx(
        math.sqrt(PHI_INV)
    )
    ds, fs, mat = model.f_matrix("tau", "tau", "tau", "tau")
    assert ds == ("e", "tau") and fs == ("e", "tau")
    np.testing.assert_allclose(mat.conj().T @ mat, np.eye(2), atol=1e-15)


def test_vacuum_f_symbols_trivial(model):
    # any labeling with a vacuum among (a, b, c) is 1 when consistent, 0 otherwise
    assert model.f_symbol("e", "tau", "tau", "e", "tau", "e") == 1.0
    assert model.f_symbol("e", "tau", "tau", "e", "tau", "tau") == 0.0
    # 1x1 all-tau matrix at global charge e
    assert model.f_symbol("tau", "tau", "tau", "e", "tau", "tau") == 1.0


def test_r_symbols(model):
    assert model.r_symbol("tau", "tau", "e") == pytest.approx(cmath.exp(-4j * math.pi / 5))
    assert model.r_symbol("tau", "tau", "tau") == pytest.approx(cmath.exp(3j * math.pi / 5))
    assert model.r_symbol("e", "tau", "tau") == 1.0
    assert model.r_symbol("tau", "e", "tau") == 1.0


def test_quantum_dims(model):
    assert model.quantum_dims["e"] == 1.0
    assert model.quantum_dims["tau"] == pytest.approx((1 + math.sqrt(5)) / 2)


def test_conjugates_self(model):
    assert model.conjugate("e") == "e"
    assert model.conjugate("tau") == "tau"


def test_validate_clean(model):
    assert validate_model(model, 1e-12) == []


def test_pentagon_residual_tiny(model):
    assert pentagon_residual(model) <= 1e-12


def _corrupt(model, **overrides) -> AnyonModel:
    fields = dict(
        name="broken",
        charges=model.charges,
        vacuum=model.vacuum,
        fusion=model.fusion,
        f_symbols=model.f_symbols,
        r_symbols=model.r_symbols,
        quantum_dims=model.quantum_dims,
    )
    fields.update(overrides)
    return AnyonModel(**fields)


def test_validate_flags_broken_f(model):
    broken_f = dict(model.f_symbols)
    broken_f[("tau", "tau", "tau", "tau", "e", "e")] = 0.0
    report = validate_model(_corrupt(model, f_symbols=broken_f))
    assert any("unitary" in item for item in report)


def test_validate_flags_broken_vacuum(model):
    broken_fusion = dict(model.fusion)
    broken_fusion[("e", "tau")] = ("e",)
    report = validate_model(_corrupt(model, fusion=broken_fusion))
    assert any("vacuum" in item for item in report)


def test_validate_flags_broken_r(model):
    broken_r = dict(model.r_symbols)
    broken_r[("tau", "tau", "e")] = 0.5 + 0.0j
    report = validate_model(_corrupt(model, r_symbols=broken_r))
    assert any("phase" in item for item in report)


MODEL_TEXT = """
# Fibonacci written out in the text format
charges e tau
vacuum e
dim tau 1.618033988749895
fusion e e -> e
fusion e tau -> tau
fusion tau tau -> e tau
F tau tau tau ; tau ; e e = 0.6180339887498949 0.0
F tau tau tau ; tau ; e tau = 0.7861513777574233 0.0
F tau tau tau ; tau ; tau e = 0.7861513777574233 0.0
F tau tau tau ; tau ; tau tau = -0.6180339887498949 0.0
R tau tau ; e = -0.8090169943749475 -0.5877852522924731
R tau tau ; tau = -0.3090169943749473 0.9510565162951536
"""


def test_load_model_text_matches_builtin(model):
    loaded = load_model_text(MODEL_TEXT)
    assert validate_model(loaded, 1e-10) == []
    assert loaded.fusion_outcomes("tau", "tau") == ("e", "tau")
    for key, val in model.f_symbols.items():
        assert loaded.f_symbols[key] == pytest.approx(val, abs=1e-12)
    for key, val in model.r_symbols.items():
        assert loaded.r_symbols[key] == pytest.approx(val, abs=1e-12)


def test_load_model_text_unicode_tau():
    loaded = load_model_text(MODEL_TEXT.replace("tau", "τ"))
    assert loaded.charges == ("e", "tau")


def test_load_model_text_rejects_garbage():
    with pytest.raises(ModelFormatError):
        load_model_text("charges e tau\nvacuum e\nwobble 3")
    with pytest.raises(ModelFormatError):
        load_model_text("vacuum e")  # no charges line


def test_build_model_rejects_inconsistent_override():
    with pytest.raises(ModelFormatError):
        build_model(
            "bad",
            ("e", "tau"),
            "e",
            {("e", "e"): ("e",), ("e", "tau"): ("tau",), ("tau", "tau"): ("e", "tau")},
            f_overrides={("e", "e", "e", "tau", "e", "e"): 1.0},
        )
