"""Core map, octant symmetry, and loading-pattern handling.

The core holds 193 fuel assemblies on a 17x17 grid with full eighth-core
(D4) symmetry: 4 rotations x mirror. Because of that symmetry a loading
pattern is fully described by 32 octant slots; every slot unfolds to 1, 4
or 8 full-core positions.

The fuel outline is stored as per-row half-widths measured from the center
assembly. Row offset 0 is the middle row; ``HALF_WIDTHS[a]`` says how far
fuel extends sideways in the row ``a`` steps from center. This particular
outline is the one row-convex symmetric shape with 193 positions whose
octant census comes out to exactly {1 slot x1, 14 slots x4, 17 slots x8}
= 32 slots, which the startup assertion below enforces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

GRID = 17                    # full-core map is GRID x GRID
CENTER = GRID // 2           # row/col index of the center assembly
N_FUEL = 193
N_SLOTS = 32
N_TYPES = 9                  # fuel assembly type ids 1..9
REFLECTOR_TYPE = 10
OUTSIDE = 0

# Fuel half-width per row offset from center (offset 0..8). Width of the
# row at offset a is 2*HALF_WIDTHS[a] + 1.
HALF_WIDTHS = (8, 7, 7, 6, 6, 6, 6, 2, 0)


@dataclass(frozen=True)
class CoreMap:
    """Constant geometry of the 193-assembly core.

    grid          17x17 int mask: 1 = fuel, 2 = reflector, 0 = outside
    fuel_count    number of fuel positions (193)
    octant_slots  for each of the 32 slots, its (row, col) in the wedge
                  row >= CENTER, col >= row (the slot's representative)
    octant_index  per slot, every full-core (row, col) it unfolds to
    multiplicity  per slot, len(octant_index[slot]) in {1, 4, 8}
    """

    grid: np.ndarray
    fuel_count: int
    octant_slots: tuple
    octant_index: tuple
    multiplicity: tuple

    def slot_of(self, row: int, col: int) -> int:
        """Octant slot owning full-core fuel position (row, col)."""
        a, b = sorted((abs(row - CENTER), abs(col - CENTER)))
        return self.octant_slots.index((CENTER + a, CENTER + b))


def _fuel_mask() -> np.ndarray:
    mask = np.zeros((GRID, GRID), dtype=bool)
    for r in range(GRID):
        a = abs(r - CENTER)
        h = HALF_WIDTHS[a]
        mask[r, CENTER - h:CENTER + h + 1] = True
    return mask


def _unfold_offsets(da: int, db: int):
    """All distinct D4 images of offset (da, db) from the center."""
    seen = []
    for a, b in ((da, db), (db, da)):
        for sa in (1, -1):
            for sb in (1, -1):
                p = (a * sa, b * sb)
                if p not in seen:
                    seen.append(p)
    return seen


@lru_cache(maxsize=1)
def build_core_map() -> CoreMap:
    """Build (and memoize) the shipped constant core map."""
    mask = _fuel_mask()

    slots = []
    index = []
    for a in range(CENTER + 1):
        for b in range(a, CENTER + 1):
            if b > HALF_WIDTHS[a]:
                continue
            slots.append((CENTER + a, CENTER + b))
            positions = tuple((CENTER + da, CENTER + db)
                              for da, db in _unfold_offsets(a, b))
            index.append(positions)

    grid = np.zeros((GRID, GRID), dtype=np.int8)
    grid[mask] = 1
    # Reflector: every non-fuel cell touching fuel (8-neighborhood).
    for r in range(GRID):
        for c in range(GRID):
            if grid[r, c]:
                continue
            r0, r1 = max(r - 1, 0), min(r + 2, GRID)
            c0, c1 = max(c - 1, 0), min(c + 2, GRID)
            if mask[r0:r1, c0:c1].any():
                grid[r, c] = 2

    core = CoreMap(
        grid=grid,
        fuel_count=int(mask.sum()),
        octant_slots=tuple(slots),
        octant_index=tuple(index),
        multiplicity=tuple(len(p) for p in index),
    )
    _check_census(core)
    return core


def _check_census(core: CoreMap) -> None:
    """Structural validation of the shipped map; runs once at startup."""
    if core.fuel_count != N_FUEL:
        raise AssertionError(f"core map has {core.fuel_count} fuel positions")
    if len(core.octant_slots) != N_SLOTS:
        raise AssertionError(f"core map has {len(core.octant_slots)} octant slots")
    census = {m: core.multiplicity.count(m) for m in set(core.multiplicity)}
    if census != {1: 1, 4: 14, 8: 17}:
        raise AssertionError(f"octant multiplicity census {census}")
    cover = [p for plist in core.octant_index for p in plist]
    if len(cover) != N_FUEL or len(set(cover)) != N_FUEL:
        raise AssertionError("octant unfolding does not partition the fuel map")
    fuel = core.grid == 1
    for quarter_turns in range(4):
        rot = np.rot90(fuel, quarter_turns)
        if not (np.array_equal(rot, fuel) and np.array_equal(rot.T, fuel)):
            raise AssertionError("fuel mask is not eighth-core symmetric")


@dataclass(frozen=True)
class LoadingPattern:
    """A 32-slot octant assignment plus its unfolded 17x17 type map."""

    octant: tuple
    full_map: np.ndarray

    def __post_init__(self):
        if len(self.octant) != N_SLOTS:
            raise ValidationError(
                f"octant must have {N_SLOTS} entries, got {len(self.octant)}")

    def pattern_string(self) -> str:
        return ",".join(str(t) for t in self.octant)


def validate_octant(octant) -> tuple:
    """Check length and 1..9 range; returns the octant as a tuple of ints."""
    vals = tuple(int(t) for t in octant)
    if len(vals) != N_SLOTS:
        raise ValidationError(
            f"octant must have {N_SLOTS} entries, got {len(vals)}")
    for i, t in enumerate(vals):
        if not 1 <= t <= N_TYPES:
            raise ValidationError(
                f"octant slot {i} has type {t}, expected 1..{N_TYPES}")
    return vals


def unfold(octant) -> np.ndarray:
    """Expand a 32-entry octant to the full 17x17 type-id map.

    Fuel positions get the type of their octant representative, the
    reflector ring gets type 10, cells outside the core stay 0.
    """
    vals = validate_octant(octant)
    core = build_core_map()
    full = np.zeros((GRID, GRID), dtype=np.int8)
    full[core.grid == 2] = REFLECTOR_TYPE
    for slot, positions in enumerate(core.octant_index):
        for r, c in positions:
            full[r, c] = vals[slot]
    return full


def refold(full_map: np.ndarray) -> tuple:
    """Read the octant vector back off a full-core map."""
    core = build_core_map()
    return tuple(int(full_map[r, c]) for r, c in core.octant_slots)


def make_pattern(octant) -> LoadingPattern:
    vals = validate_octant(octant)
    return LoadingPattern(octant=vals, full_map=unfold(vals))


def random_pattern(rng_seed: int) -> LoadingPattern:
    """Draw 32 i.i.d. uniform types from 1..9; deterministic per seed."""
    rng = np.random.default_rng(rng_seed)
    octant = tuple(int(t) for t in rng.integers(1, N_TYPES + 1, size=N_SLOTS))
    return make_pattern(octant)


def parse_pattern_string(text: str) -> LoadingPattern:
    """Parse the CLI/API text form: 32 comma-separated integers."""
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    try:
        octant = [int(p) for p in parts]
    except ValueError as exc:
        raise ValidationError(f"pattern entries must be integers: {exc}") from exc
    return make_pattern(octant)
