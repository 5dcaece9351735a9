import numpy as np
import pytest

from corecast.errors import DomainError, ValidationError
from corecast.library import (EQUILIBRIUM_XENON, FIELDS, XENON_FREE,
                              AssemblyLibrary, GroupConstants, default_library,
                              k_inf, load_library, save_library)


def test_lookup_on_grid_point(library):
    x = library.exposure_grid[3]
    gc = library.lookup_constants(5, x, EQUILIBRIUM_XENON)
    expected = library.table[5][EQUILIBRIUM_XENON][3]
    assert np.allclose(gc.as_array(), expected, rtol=0, atol=0)


def test_lookup_midpoint_is_mean(library):
    g = library.exposure_grid
    mid = 0.5 * (g[2] + g[3])
    gc = library.lookup_constants(3, mid, XENON_FREE)
    rows = library.table[3][XENON_FREE]
    assert np.allclose(gc.as_array(), 0.5 * (rows[2] + rows[3]), rtol=1e-15)


def test_lookup_clamps_beyond_grid(library):
    gc = library.lookup_constants(2, 1e9, EQUILIBRIUM_XENON)
    assert np.allclose(gc.as_array(), library.table[2][EQUILIBRIUM_XENON][-1])


def test_lookup_unknown_type(library):
    with pytest.raises(DomainError):
        library.lookup_constants(11, 0.0, XENON_FREE)
    with pytest.raises(DomainError):
        library.lookup_constants(1, 0.0, "transient_xenon")


def test_lookup_many_matches_scalar_lookup(library):
    rng = np.random.default_rng(3)
    types = rng.integers(1, 10, size=40)
    expo = rng.uniform(0, 900, size=40)
    block = library.lookup_many(types, expo, EQUILIBRIUM_XENON)
    for i in range(40):
        gc = library.lookup_constants(int(types[i]), expo[i], EQUILIBRIUM_XENON)
        assert np.allclose(block[i], gc.as_array(), rtol=1e-15)


def test_fresh_kinf_ordered_by_enrichment(library):
    ks = [k_inf(library.lookup_constants(t, 0.0, XENON_FREE)) for t in (1, 2, 5)]
    assert ks[0] < ks[1] < ks[2]


def test_ba_types_rise_then_fall(library):
    for tid, _name, _enr, ba in library.assemblies:
        if not ba:
            continue
        curve = library.kinf_curve(tid, EQUILIBRIUM_XENON)
        peak = int(np.argmax(curve))
        assert peak > 0, f"type {tid} has no early reactivity rise"
        assert curve[-1] < curve[peak]


def test_reflector_produces_no_neutrons(library):
    gc = library.lookup_constants(10, 123.0, EQUILIBRIUM_XENON)
    assert gc.nuSigma_f1 == 0.0 and gc.nuSigma_f2 == 0.0
    assert gc.fission_power_weight == 0.0


def test_xenon_variant_absorbs_more(library):
    for t in library.fuel_ids():
        free = library.lookup_constants(t, 50.0, XENON_FREE)
        eq = library.lookup_constants(t, 50.0, EQUILIBRIUM_XENON)
        assert eq.Sigma_a2 > free.Sigma_a2


def test_save_load_roundtrip(tmp_path, library):
    path = tmp_path / "lib.json"
    save_library(library, str(path))
    again = load_library(str(path))
    assert np.array_equal(again.exposure_grid, library.exposure_grid)
    assert again.node_pitch == library.node_pitch
    for t in library.table:
        for v in (XENON_FREE, EQUILIBRIUM_XENON):
            assert np.array_equal(again.table[t][v], library.table[t][v])


def test_validation_rejects_unordered_enrichment(library):
    table = {t: {v: library.table[t][v].copy() for v in library.table[t]}
             for t in library.table}
    table[1][XENON_FREE] = table[5][XENON_FREE]  # FA1 now as reactive as FA5
    with pytest.raises(ValidationError):
        AssemblyLibrary(library.exposure_grid, table)


def test_validation_rejects_descending_grid(library):
    grid = library.exposure_grid[::-1]
    with pytest.raises(ValidationError):
        AssemblyLibrary(grid, library.table)


def test_kinf_analytic_form():
    gc = GroupConstants(D1=1.4, D2=0.4, Sigma_a1=0.01, Sigma_a2=0.08,
                        Sigma_s12=0.016, nuSigma_f1=0.005, nuSigma_f2=0.1)
    assert k_inf(gc) == pytest.approx(0.025 / 0.026, abs=1e-15)


def test_field_order_stable():
    assert FIELDS == ("D1", "D2", "Sigma_a1", "Sigma_a2", "Sigma_s12",
                      "nuSigma_f1", "nuSigma_f2", "fission_power_weight")
