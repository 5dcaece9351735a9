"""Two-group assembly constants tabulated against exposure.

The library carries, for each assembly type, two variants of the group
constants on a shared exposure grid: a xenon-free table used at startup
and an equilibrium-xenon table used at power. Values are synthetic but
built to sit in the usual PWR range and to satisfy three structural
requirements the rest of the pipeline leans on:

* fresh xenon-free k_inf grows strictly with enrichment for the
  no-absorber types (FA1 < FA2 < FA5),
* burnable-absorber types gain reactivity over early exposure as the
  absorber burns out, then decline like everyone else,
* a typical random core stays supercritical for a few hundred effective
  full-power days and ends its cycle before the last simulated statepoint.

Only thermal absorption and the fission terms vary between types; the
diffusion and slowing-down terms are shared. Keeping the migration side
fixed makes "more enrichment never hurts" provable instead of hopeful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ValidationError

NODE_PITCH_CM = 21.5

FIELDS = ("D1", "D2", "Sigma_a1", "Sigma_a2", "Sigma_s12",
          "nuSigma_f1", "nuSigma_f2", "fission_power_weight")

XENON_FREE = "xenon_free"
EQUILIBRIUM_XENON = "equilibrium_xenon"
VARIANTS = (XENON_FREE, EQUILIBRIUM_XENON)

REFLECTOR_ID = 10

# id, name, enrichment wt%, burnable absorber rod count
ASSEMBLY_TABLE = (
    (1, "FA1", 1.6, 0),
    (2, "FA2", 2.4, 0),
    (3, "FA3", 2.4, 12),
    (4, "FA4", 2.4, 16),
    (5, "FA5", 3.1, 0),
    (6, "FA6", 3.1, 6),
    (7, "FA7", 3.1, 15),
    (8, "FA8", 3.1, 16),
    (9, "FA9", 3.1, 20),
    (10, "REFLECTOR", None, None),
)

EXPOSURE_GRID_EFPD = (0.0, 25.0, 50.0, 100.0, 150.0, 200.0, 300.0,
                      400.0, 500.0, 650.0, 800.0, 1000.0)

# Shared fuel base (cm / 1/cm)
_D1, _D2 = 1.40, 0.40
_SA1 = 0.0096
_SS12 = 0.0172
_SA2_BASE = 0.0940

# Fresh xenon-free k_inf targets per enrichment, no absorber
_KINF_FRESH = {1.6: 1.115, 2.4: 1.255, 3.1: 1.345}

# Exposure model knobs
_FP_SAT = 0.0012          # fast-saturating poison absorption (Sm-like)
_FP_SAT_TAU = 40.0        # EFPD
_FP_LINEAR = 2.0e-5       # slow fission-product growth per EFPD
_BA_BURNABLE = 0.00124    # burnable absorber cross-section per rod, fresh
_BA_RESIDUAL = 0.00006    # per-rod residue (cladding + displaced moderator)
_BA_TAU = 60.0            # absorber burnout time constant, EFPD
_XENON_SA2 = 0.0026       # equilibrium xenon thermal absorption
_FISSILE_LIN = 2.0e-4     # fissile depletion, linear part per EFPD
_FISSILE_QUAD = 2.0e-7    # fissile depletion, quadratic part

_REFLECTOR = (1.30, 0.35, 0.0008, 0.0200, 0.0450, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GroupConstants:
    """Homogenized two-group constants for one node."""

    D1: float
    D2: float
    Sigma_a1: float
    Sigma_a2: float
    Sigma_s12: float
    nuSigma_f1: float
    nuSigma_f2: float
    fission_power_weight: float = 1.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in FIELDS])


def k_inf(gc: GroupConstants) -> float:
    """Infinite-medium multiplication factor (no leakage, no upscatter)."""
    thermal = gc.nuSigma_f2 * gc.Sigma_s12 / gc.Sigma_a2
    return (gc.nuSigma_f1 + thermal) / (gc.Sigma_a1 + gc.Sigma_s12)


def _nu_sigma_f1(enr: float) -> float:
    return 0.0020 + 0.0013 * enr


def _nu_sigma_f2_fresh(enr: float) -> float:
    # back-solved so the fresh xenon-free k_inf hits its target exactly
    k0 = _KINF_FRESH[enr]
    return (k0 * (_SA1 + _SS12) - _nu_sigma_f1(enr)) * _SA2_BASE / _SS12


def _fuel_row(enr: float, ba_rods: int, x: float, with_xenon: bool) -> list:
    fp = _FP_SAT * (1.0 - math.exp(-x / _FP_SAT_TAU)) + _FP_LINEAR * x
    ba = ba_rods * (_BA_BURNABLE * math.exp(-x / _BA_TAU) + _BA_RESIDUAL)
    xe = _XENON_SA2 if with_xenon else 0.0
    sa2 = _SA2_BASE + fp + ba + xe
    burn = max(1.0 - _FISSILE_LIN * x - _FISSILE_QUAD * x * x, 0.05)
    nsf2 = _nu_sigma_f2_fresh(enr) * burn
    return [_D1, _D2, _SA1, sa2, _SS12, _nu_sigma_f1(enr), nsf2, 1.0]


class AssemblyLibrary:
    """Exposure-tabulated constants for types 1..10 plus core geometry data.

    table[type_id][variant] is an (n_grid, 8) array in FIELDS order.
    """

    def __init__(self, exposure_grid, table, assemblies=ASSEMBLY_TABLE,
                 node_pitch: float = NODE_PITCH_CM):
        self.exposure_grid = np.asarray(exposure_grid, dtype=float)
        self.table = {
            int(t): {v: np.asarray(table[t][v], dtype=float) for v in VARIANTS}
            for t in table
        }
        self.assemblies = tuple(tuple(row) for row in assemblies)
        self.node_pitch = float(node_pitch)
        self.validate()

    # -- lookups ---------------------------------------------------------

    def lookup_constants(self, type_id: int, exposure: float,
                         variant: str = EQUILIBRIUM_XENON) -> GroupConstants:
        """Piecewise-linear interpolation on the exposure grid, clamped
        to the last entry beyond the end of the grid."""
        rows = self._rows(type_id, variant)
        x = max(float(exposure), 0.0)
        vals = [float(np.interp(x, self.exposure_grid, rows[:, f]))
                for f in range(len(FIELDS))]
        return GroupConstants(*vals)

    def lookup_many(self, type_ids: np.ndarray, exposures: np.ndarray,
                    variant: str) -> np.ndarray:
        """Vectorized lookup: (n,) type ids + (n,) exposures -> (n, 8)."""
        type_ids = np.asarray(type_ids)
        exposures = np.maximum(np.asarray(exposures, dtype=float), 0.0)
        out = np.empty((len(type_ids), len(FIELDS)))
        for t in np.unique(type_ids):
            rows = self._rows(int(t), variant)
            sel = type_ids == t
            x = exposures[sel]
            for f in range(len(FIELDS)):
                out[sel, f] = np.interp(x, self.exposure_grid, rows[:, f])
        return out

    def _rows(self, type_id: int, variant: str) -> np.ndarray:
        if type_id not in self.table:
            raise DomainError(f"unknown assembly type {type_id}")
        if variant not in VARIANTS:
            raise DomainError(f"unknown xenon variant {variant!r}")
        return self.table[type_id][variant]

    def kinf_curve(self, type_id: int, variant: str) -> np.ndarray:
        rows = self._rows(type_id, variant)
        return np.array([k_inf(GroupConstants(*r)) for r in rows])

    def fuel_ids(self) -> tuple:
        return tuple(a[0] for a in self.assemblies if a[0] != REFLECTOR_ID)

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        g = self.exposure_grid
        if g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ValidationError("exposure grid must ascend from 0")
        for t, variants in self.table.items():
            for v, rows in variants.items():
                if rows.shape != (len(g), len(FIELDS)):
                    raise ValidationError(f"type {t} {v}: bad table shape {rows.shape}")
                if np.any(rows < 0):
                    raise ValidationError(f"type {t} {v}: negative constants")
                if np.any(rows[:, 0] <= 0) or np.any(rows[:, 1] <= 0):
                    raise ValidationError(f"type {t} {v}: non-positive diffusion")
        refl = self.table[REFLECTOR_ID][XENON_FREE]
        if np.any(refl[:, 5:7] != 0):
            raise ValidationError("reflector must not produce neutrons")
        # fresh xenon-free k_inf ordered by enrichment for 0-BA types
        k1, k2, k5 = (k_inf(self.lookup_constants(t, 0.0, XENON_FREE))
                      for t in (1, 2, 5))
        if not k1 < k2 < k5:
            raise ValidationError(
                f"fresh k_inf not ordered by enrichment: {k1:.4f}, {k2:.4f}, {k5:.4f}")
        # absorber burnout: equilibrium-xenon k_inf rises first, falls later
        for tid, _name, _enr, ba in self.assemblies:
            if not ba:
                continue
            curve = self.kinf_curve(tid, EQUILIBRIUM_XENON)
            peak = int(np.argmax(curve))
            if peak == 0 or curve[-1] >= curve[peak]:
                raise ValidationError(
                    f"type {tid}: no burnout rise-then-fall in k_inf")


@lru_cache(maxsize=1)
def default_library() -> AssemblyLibrary:
    """The embedded default library, built from the parametric model."""
    table = {}
    for tid, _name, enr, ba in ASSEMBLY_TABLE:
        if tid == REFLECTOR_ID:
            rows = [list(_REFLECTOR) for _ in EXPOSURE_GRID_EFPD]
            table[tid] = {XENON_FREE: rows, EQUILIBRIUM_XENON: rows}
        else:
            table[tid] = {
                XENON_FREE: [_fuel_row(enr, ba, x, False) for x in EXPOSURE_GRID_EFPD],
                EQUILIBRIUM_XENON: [_fuel_row(enr, ba, x, True) for x in EXPOSURE_GRID_EFPD],
            }
    return AssemblyLibrary(EXPOSURE_GRID_EFPD, table)


# -- file format -----------------------------------------------------------

def save_library(lib: AssemblyLibrary, path: str) -> None:
    doc = {
        "v": 1,
        "node_pitch_cm": lib.node_pitch,
        "exposure_grid_efpd": lib.exposure_grid.tolist(),
        "fields": list(FIELDS),
        "assemblies": [
            {"id": tid, "name": name, "enrichment_wt_pct": enr, "ba_rods": ba}
            for tid, name, enr, ba in lib.assemblies
        ],
        "constants": {
            str(t): {v: lib.table[t][v].tolist() for v in VARIANTS}
            for t in sorted(lib.table)
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_library(path: str) -> AssemblyLibrary:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("v") != 1:
        raise ValidationError(f"unsupported library schema version {doc.get('v')!r}")
    if doc.get("fields") != list(FIELDS):
        raise ValidationError("library file field order does not match")
    assemblies = tuple(
        (a["id"], a["name"], a["enrichment_wt_pct"], a["ba_rods"])
        for a in doc["assemblies"]
    )
    table = {int(t): {v: doc["constants"][t][v] for v in VARIANTS}
             for t in doc["constants"]}
    return AssemblyLibrary(doc["exposure_grid_efpd"], table, assemblies,
                           doc["node_pitch_cm"])
