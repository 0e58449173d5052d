"""Scenario documents.

A scenario is a YAML mapping; every quantity is in SI units.

    name: expanding_pipe
    geometry:
      profile:            # rows of (x [m], Z axis altitude [m], R radius [m])
        - [0.0, 1.0, 1.0]
        - [5.0, 1.0, 1.1]
    constants: {g: 9.81, c: 20.0, Ks: 100.0}   # m/s^2, m/s, m^(1/3)/s
    initial:
      head: 1.0           # still water at this piezometric head [m]
      regions:            # optional overrides: head [m] on from <= x <= to
        - {from: 25.0, to: 75.0, head: 1.8}
      # or instead: cells: [[A, Q, E], ...], one row per cell
    boundary:
      upstream:   {kind: head, series: [[0, 1.0], [5, 3.2]]}   # s -> m
      downstream: {kind: discharge, series: [[0, 0.0]]}        # s -> m^3/s
    n_cells: 100
    cfl: 0.8
    t_end: 100.0          # s
    friction: "off"       # upwinded | centered | off
    gauges: [0.5]         # x [m]
    snapshots: [0, 5, 100]  # s
    output_interval: 0.05   # s, gauge sampling period
    symmetry_metric: false
    output: runs/expanding_pipe  # default output directory

``g`` defaults to 9.81 and ``Ks`` to 100.  A wall boundary needs no series.
"""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import yaml

from .errors import ConfigurationError
from .geometry import build_geometry
from .model import PhysicalConstants
from .solver import BoundaryCondition, FrictionMode, SimulationState, still_water_state

REQUIRED_KEYS = ("geometry", "constants", "initial", "boundary", "n_cells", "cfl",
                 "t_end", "friction")
OPTIONAL_KEYS = ("name", "description", "gauges", "snapshots", "output_interval",
                 "symmetry_metric", "output")


class ScenarioError(ConfigurationError):
    """Validation failure; ``errors`` lists ``(key, reason)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n" + "\n".join(f"  {k}: {r}" for k, r in self.errors))


@dataclass(frozen=True, eq=False)
class Scenario:
    profile: np.ndarray
    constants: PhysicalConstants
    initial: dict
    bc_up: BoundaryCondition
    bc_down: BoundaryCondition
    n_cells: int
    cfl: float
    t_end: float
    friction: str
    name: str = "scenario"
    description: str = ""
    gauges: tuple = ()
    snapshots: tuple = ()
    output_interval: float = 0.0
    symmetry_metric: bool = False
    output: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def geometry(self):
        if "geometry" not in self._cache:
            self._cache["geometry"] = build_geometry(self.profile, self.n_cells)
        return self._cache["geometry"]

    def initial_state(self):
        geo = self.geometry
        if "cells" in self.initial:
            cells = np.asarray(self.initial["cells"], dtype=float)
            return SimulationState(cells[:, 0].copy(), cells[:, 1].copy(),
                                   cells[:, 2].astype(np.int64), geo)
        head = np.full(geo.n_cells, float(self.initial["head"]))
        for reg in self.initial.get("regions", ()):
            head[(geo.x >= reg["from"]) & (geo.x <= reg["to"])] = reg["head"]
        return still_water_state(geo, head, self.constants)

    def with_overrides(self, cfl=None, n_cells=None, friction=None, symmetry_metric=None,
                       t_end=None):
        """Copy with command-line overrides applied and re-validated."""
        doc = self.to_dict()
        if cfl is not None:
            doc["cfl"] = cfl
        if n_cells is not None:
            doc["n_cells"] = n_cells
        if friction is not None:
            doc["friction"] = friction
        if symmetry_metric is not None:
            doc["symmetry_metric"] = symmetry_metric
        if t_end is not None:
            doc["t_end"] = t_end
        return from_dict(doc)

    def to_dict(self):
        def bc(b):
            d = {"kind": b.kind}
            if b.kind != "wall":
                d["series"] = b.series.tolist()
            return d

        initial = {}
        for k, v in self.initial.items():
            initial[k] = np.asarray(v).tolist() if k == "cells" else v
        doc = {
            "name": self.name,
            "description": self.description,
            "geometry": {"profile": np.asarray(self.profile).tolist()},
            "constants": {"g": self.constants.g, "c": self.constants.c,
                          "Ks": self.constants.Ks},
            "initial": initial,
            "boundary": {"upstream": bc(self.bc_up), "downstream": bc(self.bc_down)},
            "n_cells": self.n_cells,
            "cfl": self.cfl,
            "t_end": self.t_end,
            "friction": self.friction,
            "gauges": list(self.gauges),
            "snapshots": list(self.snapshots),
            "output_interval": self.output_interval,
            "symmetry_metric": self.symmetry_metric,
            "output": self.output,
        }
        if not self.output_interval:
            # zero only for a zero-duration run, where it is the default anyway
            del doc["output_interval"]
        return doc


# ---------------------------------------------------------------------------
# validation


def _key_lines(node, prefix=""):
    """Map dotted key paths to 1-based source lines."""
    out = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            out.update(_key_lines(v, path))
    return out


class _Checker:
    def __init__(self, lines=None):
        self.errors = []
        self.lines = lines or {}

    def fail(self, key, reason):
        line = self.lines.get(key)
        self.errors.append((key, f"{reason} (line {line})" if line else reason))

    def number(self, doc, key, path, positive=False, integer=False, default=None):
        if key not in doc:
            if default is None:
                self.fail(path, "missing required key")
            return default
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(path, f"expected a number, got {type(v).__name__}")
            return None
        if integer and int(v) != v:
            self.fail(path, "expected an integer")
            return None
        if not np.isfinite(v):
            self.fail(path, "must be finite")
            return None
        if positive and v <= 0:
            self.fail(path, "must be positive")
            return None
        return int(v) if integer else float(v)

    def table(self, v, path, width):
        try:
            arr = np.asarray(v, dtype=float)
        except (TypeError, ValueError):
            self.fail(path, f"expected a table of {width}-number rows")
            return None
        if arr.ndim != 2 or arr.shape[1] != width or arr.shape[0] == 0:
            self.fail(path, f"expected a table of {width}-number rows")
            return None
        if not np.all(np.isfinite(arr)):
            self.fail(path, "table contains non-finite values")
            return None
        return arr


def _friction_value(v):
    # an unquoted YAML `off` loads as boolean false
    if v is False:
        return "off"
    return v


def from_dict(doc, lines=None):
    """Validated :class:`Scenario` from a parsed mapping."""
    chk = _Checker(lines)
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ScenarioError([("<document>", "top level must be a mapping")])
    for key in REQUIRED_KEYS:
        if key not in doc:
            chk.fail(key, "missing required key")
    for key in doc:
        if key not in REQUIRED_KEYS + OPTIONAL_KEYS:
            chk.fail(str(key), "unknown key")

    profile = None
    geo = doc.get("geometry")
    if "geometry" in doc:
        if not isinstance(geo, dict) or "profile" not in geo:
            chk.fail("geometry.profile", "missing required key")
        else:
            profile = chk.table(geo["profile"], "geometry.profile", 3)
            if profile is not None:
                if profile.shape[0] < 2:
                    chk.fail("geometry.profile", "needs at least 2 rows")
                elif np.any(np.diff(profile[:, 0]) <= 0):
                    chk.fail("geometry.profile", "x must be strictly increasing")
                if np.any(profile[:, 2] <= 0):
                    chk.fail("geometry.profile", "radius must be positive")

    const = None
    cdoc = doc.get("constants")
    if "constants" in doc:
        if not isinstance(cdoc, dict):
            chk.fail("constants", "expected a mapping")
        else:
            c = chk.number(cdoc, "c", "constants.c", positive=True)
            g = chk.number(cdoc, "g", "constants.g", positive=True, default=9.81)
            ks = chk.number(cdoc, "Ks", "constants.Ks", positive=True, default=100.0)
            if None not in (c, g, ks):
                const = PhysicalConstants(c=c, Ks=ks, g=g)

    n_cells = chk.number(doc, "n_cells", "n_cells", integer=True) if "n_cells" in doc else None
    if n_cells is not None and n_cells < 2:
        chk.fail("n_cells", "must be at least 2")
        n_cells = None
    cfl = chk.number(doc, "cfl", "cfl") if "cfl" in doc else None
    if cfl is not None and not 0 < cfl < 1:
        chk.fail("cfl", "must lie in (0, 1)")
    t_end = chk.number(doc, "t_end", "t_end") if "t_end" in doc else None
    if t_end is not None and t_end < 0:
        chk.fail("t_end", "must not be negative")

    friction = None
    if "friction" in doc:
        friction = _friction_value(doc["friction"])
        if friction not in [m.value for m in FrictionMode]:
            chk.fail("friction", "must be one of upwinded, centered, off")

    initial = None
    idoc = doc.get("initial")
    if "initial" in doc:
        if not isinstance(idoc, dict):
            chk.fail("initial", "expected a mapping")
        elif "cells" in idoc:
            cells = chk.table(idoc["cells"], "initial.cells", 3)
            if cells is not None:
                if n_cells is not None and cells.shape[0] != n_cells:
                    chk.fail("initial.cells", f"has {cells.shape[0]} rows, n_cells is {n_cells}")
                if np.any(cells[:, 0] < 0):
                    chk.fail("initial.cells", "wet area must not be negative")
                if not np.all(np.isin(cells[:, 2], (0, 1))):
                    chk.fail("initial.cells", "regime flag must be 0 or 1")
                initial = {"cells": cells}
        elif "head" in idoc:
            head = chk.number(idoc, "head", "initial.head")
            regions = []
            for j, reg in enumerate(idoc.get("regions") or []):
                path = f"initial.regions[{j}]"
                if not isinstance(reg, dict):
                    chk.fail(path, "expected a mapping with from, to, head")
                    continue
                vals = [chk.number(reg, k, f"{path}.{k}") for k in ("from", "to", "head")]
                if None not in vals:
                    if vals[1] < vals[0]:
                        chk.fail(path, "to must not be below from")
                    regions.append(dict(zip(("from", "to", "head"), vals)))
            if head is not None:
                initial = {"head": head, "regions": regions}
        else:
            chk.fail("initial", "needs either head or cells")

    bcs = {}
    bdoc = doc.get("boundary")
    if "boundary" in doc:
        if not isinstance(bdoc, dict):
            chk.fail("boundary", "expected a mapping")
            bdoc = {}
        for side in ("upstream", "downstream"):
            path = f"boundary.{side}"
            b = bdoc.get(side)
            if b is None:
                chk.fail(path, "missing required key")
            elif not isinstance(b, dict) or "kind" not in b:
                chk.fail(f"{path}.kind", "missing required key")
            elif b["kind"] == "wall":
                bcs[side] = BoundaryCondition("wall")
            elif b["kind"] not in ("head", "discharge"):
                chk.fail(f"{path}.kind", "must be one of head, discharge, wall")
            elif "series" not in b:
                chk.fail(f"{path}.series", "missing required key")
            else:
                series = chk.table(b["series"], f"{path}.series", 2)
                if series is not None:
                    try:
                        bcs[side] = BoundaryCondition(b["kind"], series)
                    except ConfigurationError as exc:
                        chk.fail(f"{path}.series", str(exc))

    gauges = []
    for j, x in enumerate(doc.get("gauges") or []):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            chk.fail(f"gauges[{j}]", "expected a position in m")
        elif profile is not None and not profile[0, 0] <= x <= profile[-1, 0]:
            chk.fail(f"gauges[{j}]", f"x = {x} lies outside the pipe")
        else:
            gauges.append(float(x))
    snapshots = []
    for j, t in enumerate(doc.get("snapshots") or []):
        if isinstance(t, bool) or not isinstance(t, (int, float)) or t < 0:
            chk.fail(f"snapshots[{j}]", "expected a non-negative time in s")
        else:
            snapshots.append(float(t))
    interval = 0.0
    if "output_interval" in doc:
        interval = chk.number(doc, "output_interval", "output_interval", positive=True) or 0.0
    sym = doc.get("symmetry_metric", False)
    if not isinstance(sym, bool):
        chk.fail("symmetry_metric", "expected true or false")
    for key in ("name", "description", "output"):
        if key in doc and not isinstance(doc[key], str):
            chk.fail(key, "expected a string")

    if chk.errors:
        raise ScenarioError(chk.errors)
    return Scenario(
        profile=profile, constants=const, initial=initial, bc_up=bcs["upstream"],
        bc_down=bcs["downstream"], n_cells=n_cells, cfl=cfl, t_end=t_end, friction=friction,
        name=doc.get("name", "scenario"), description=doc.get("description", ""),
        gauges=tuple(gauges), snapshots=tuple(snapshots),
        output_interval=interval or (t_end / 100.0 if t_end else 0.0),
        symmetry_metric=bool(sym), output=doc.get("output", ""),
    )


def parse_scenario(text):
    """Parse and validate a scenario document.

    Raises :class:`ScenarioError` listing every problem with its key path
    and, where known, its line.
    """
    try:
        node = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([("<document>", f"not valid YAML: {exc}")]) from exc
    lines = _key_lines(node) if node is not None else {}
    return from_dict(doc, lines)


def serialize(scenario):
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False, default_flow_style=None)


def bundled_names():
    files = resources.files("mixedpipe") / "scenarios"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def bundled_text(name):
    path = resources.files("mixedpipe") / "scenarios" / f"{name}.yaml"
    if not path.is_file():
        raise ConfigurationError(
            f"no bundled scenario {name!r}; available: {', '.join(bundled_names())}")
    return path.read_text()


def load_scenario(ref):
    """Scenario from a file path or the name of a bundled scenario."""
    try:
        with open(ref) as fh:
            text = fh.read()
    except (FileNotFoundError, IsADirectoryError):
        text = bundled_text(ref)
    return parse_scenario(text)


def equivalent(a, b):
    """Scenarios with identical content."""
    return _same(a.to_dict(), b.to_dict())


def _same(x, y):
    if isinstance(x, dict) and isinstance(y, dict):
        return x.keys() == y.keys() and all(_same(x[k], y[k]) for k in x)
    if isinstance(x, (list, tuple)) and isinstance(y, (list, tuple)):
        return len(x) == len(y) and all(_same(p, q) for p, q in zip(x, y))
    return x == y


__all__ = ["Scenario", "ScenarioError", "parse_scenario", "serialize", "from_dict",
           "load_scenario", "bundled_names", "bundled_text", "equivalent"]
