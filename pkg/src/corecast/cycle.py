"""Quasi-static fuel-cycle simulation over a fixed statepoint schedule.

A cycle is 70 statepoints: startup at t=0 evaluated xenon-free, the first
at-power point at t=1 EFPD, then 9-EFPD steps out to t=613. At every point
the node constants are interpolated at the current local exposure, the
eigenvalue problem is solved, and node exposures are advanced to the next
point with the node's relative power as the local burnup rate.

The computational lattice embeds the 17x17 core map in a 19x19 grid so the
reflector ring is complete even where fuel touches the map edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import geometry
from .dataset import cycle_length_from_trace
from .errors import DomainError
from .library import (EQUILIBRIUM_XENON, REFLECTOR_ID, XENON_FREE,
                      AssemblyLibrary, default_library)
from .solver import SolveResult, Stencil, solve_on_stencil

N_STATEPOINTS = 70

# t = 0, 1, then 9-EFPD steps to 613
STATEPOINT_TIMES = np.array([0.0] + [1.0 + 9.0 * i for i in range(N_STATEPOINTS - 1)])


def deplete_step(node_exposure: np.ndarray, node_power: np.ndarray,
                 dt: float) -> np.ndarray:
    """Advance local exposure by dt at each node's relative power."""
    if dt < 0:
        raise DomainError(f"depletion step must be non-negative, got {dt}")
    return np.asarray(node_exposure, dtype=float) + dt * np.asarray(node_power, dtype=float)


@dataclass
class CycleTrace:
    """One simulated cycle: k/rho trajectory plus per-node power history."""

    times: np.ndarray          # (70,) EFPD
    k_eff: np.ndarray          # (70,)
    rho: np.ndarray            # (70,)
    node_power: np.ndarray     # (70, 193), mean 1 per statepoint
    node_exposure: np.ndarray  # (70, 193), EFPD-equivalent at each point
    cycle_length: float | None # EFPD; None when censored
    censored: bool

    @property
    def rho_max(self) -> float:
        return float(self.rho.max())


class _CoreLattice:
    """Solver lattice shared by every simulation against one library."""

    def __init__(self, library: AssemblyLibrary):
        core = geometry.build_core_map()
        pad = 1
        size = geometry.GRID + 2 * pad
        fuel = np.zeros((size, size), dtype=bool)
        fuel[pad:pad + geometry.GRID, pad:pad + geometry.GRID] = core.grid == 1
        reflector = np.zeros_like(fuel)
        for r in range(size):
            for c in range(size):
                if fuel[r, c]:
                    continue
                r0, r1 = max(r - 1, 0), min(r + 2, size)
                c0, c1 = max(c - 1, 0), min(c + 2, size)
                if fuel[r0:r1, c0:c1].any():
                    reflector[r, c] = True

        self.library = library
        self.stencil = Stencil(fuel | reflector)
        flat_fuel = self.stencil.gather(fuel) > 0
        self.fuel_sel = flat_fuel
        self.n_fuel = int(flat_fuel.sum())
        # (row, col) of each fuel node in 17x17 coordinates, stencil order
        self.fuel_positions = [(r - pad, c - pad)
                               for r, c, isf in zip(self.stencil.rows,
                                                    self.stencil.cols, flat_fuel)
                               if isf]
        refl_row = library.lookup_many(np.array([REFLECTOR_ID]),
                                       np.zeros(1), XENON_FREE)[0]
        self._base = np.tile(refl_row, (self.stencil.n, 1))

    def fuel_types(self, full_map: np.ndarray) -> np.ndarray:
        return np.array([full_map[r, c] for r, c in self.fuel_positions])

    def constants(self, types: np.ndarray, exposures: np.ndarray,
                  variant: str) -> np.ndarray:
        arr = self._base.copy()
        arr[self.fuel_sel] = self.library.lookup_many(types, exposures, variant)
        return arr


@lru_cache(maxsize=4)
def _lattice_for(library: AssemblyLibrary) -> _CoreLattice:
    return _CoreLattice(library)


def solve_pattern(pattern: geometry.LoadingPattern,
                  library: AssemblyLibrary | None = None,
                  exposures: np.ndarray | None = None,
                  variant: str = XENON_FREE,
                  method: str = "wielandt") -> tuple[SolveResult, "_CoreLattice"]:
    """Single eigenvalue solve of a pattern at given local exposures."""
    lib = library if library is not None else default_library()
    lattice = _lattice_for(lib)
    types = lattice.fuel_types(pattern.full_map)
    if exposures is None:
        exposures = np.zeros(lattice.n_fuel)
    constants = lattice.constants(types, exposures, variant)
    result = solve_on_stencil(lattice.stencil, constants, lib.node_pitch,
                              method=method)
    return result, lattice


def simulate_cycle(pattern: geometry.LoadingPattern,
                   library: AssemblyLibrary | None = None,
                   method: str = "wielandt") -> CycleTrace:
    """Run the 70-point depletion trace for one loading pattern."""
    lib = library if library is not None else default_library()
    lattice = _lattice_for(lib)
    types = lattice.fuel_types(pattern.full_map)

    times = STATEPOINT_TIMES
    k_hist = np.empty(N_STATEPOINTS)
    rho_hist = np.empty(N_STATEPOINTS)
    power_hist = np.empty((N_STATEPOINTS, lattice.n_fuel))
    exposure_hist = np.empty((N_STATEPOINTS, lattice.n_fuel))

    exposure = np.zeros(lattice.n_fuel)
    warm = None
    for i, t in enumerate(times):
        variant = XENON_FREE if i == 0 else EQUILIBRIUM_XENON
        constants = lattice.constants(types, exposure, variant)
        result = solve_on_stencil(lattice.stencil, constants,
                                  lib.node_pitch, method=method, warm=warm)
        warm = result.warm
        k = result.k_eff
        power = result.node_power[lattice.fuel_sel]
        k_hist[i] = k
        rho_hist[i] = (k - 1.0) / k
        power_hist[i] = power
        exposure_hist[i] = exposure
        if i + 1 < N_STATEPOINTS:
            exposure = deplete_step(exposure, power, times[i + 1] - t)

    censored = bool(rho_hist[-1] > 0.0)
    length = None if censored else cycle_length_from_trace(times, rho_hist)
    return CycleTrace(times=times.copy(), k_eff=k_hist, rho=rho_hist,
                      node_power=power_hist, node_exposure=exposure_hist,
                      cycle_length=length, censored=censored)


def trace_to_csv(trace: CycleTrace, path: str, include_power: bool = False) -> None:
    """Write `time_efpd,k_eff,rho` rows, optionally with per-node powers."""
    n_fuel = trace.node_power.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["time_efpd", "k_eff", "rho"]
        if include_power:
            header += [f"p{i:03d}" for i in range(n_fuel)]
        writer.writerow(header)
        for i in range(len(trace.times)):
            row = [f"{trace.times[i]:.10g}", f"{trace.k_eff[i]:.10g}",
                   f"{trace.rho[i]:.10g}"]
            if include_power:
                row += [f"{p:.10g}" for p in trace.node_power[i]]
            writer.writerow(row)
