"""Project files: one JSON document holding named systems, lenses, and charts.

Every entry carries a `kind` tag ("deterministic", "stochastic", or "ode")
so wiring commands can refuse cross-doctrine combinations up front. Loading
validates every module-level invariant and reports the offending entry by
name; serialization is deterministic (construction order, fixed key order),
so identical projects produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .deterministic import DetChart, DetInterface, DetLens, DetSystem
from .errors import OpendynError, ValidationError
from .expr import to_text
from .finset import FinMap, FinSet
from .ode import OdeLens, OdeSystem
from .stochastic import Dist, StochSystem

SystemEntry = Union[DetSystem, StochSystem, OdeSystem]
LensEntry = Union[DetLens, OdeLens]

DOCTRINE_DET = "deterministic"
DOCTRINE_STOCH = "stochastic"
DOCTRINE_ODE = "ode"


def doctrine_of(entry: object) -> str:
    if isinstance(entry, (DetSystem, DetLens, DetChart)):
        return DOCTRINE_DET
    if isinstance(entry, StochSystem):
        return DOCTRINE_STOCH
    if isinstance(entry, (OdeSystem, OdeLens)):
        return DOCTRINE_ODE
    raise ValidationError(f"not a project entry: {type(entry).__name__}")


@dataclass
class ProjectFile:
    """A validated project: named entries, insertion-ordered."""

    version: int = 1
    systems: dict[str, SystemEntry] = field(default_factory=dict)
    lenses: dict[str, LensEntry] = field(default_factory=dict)
    charts: dict[str, DetChart] = field(default_factory=dict)

    def system(self, name: str) -> SystemEntry:
        if name not in self.systems:
            raise ValidationError(f"no system named {name!r}")
        return self.systems[name]

    def lens(self, name: str) -> LensEntry:
        if name not in self.lenses:
            raise ValidationError(f"no lens named {name!r}")
        return self.lenses[name]

    def chart(self, name: str) -> DetChart:
        if name not in self.charts:
            raise ValidationError(f"no chart named {name!r}")
        return self.charts[name]


def _expect_obj(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(f"{what} must be an object")
    return value


def _expect_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise ValidationError(f"{what} must be a string")
    return value


def _expect_str_list(value, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ValidationError(f"{what} must be an array of strings")
    return value


def _take(obj: dict, what: str, required: tuple[str, ...]) -> dict:
    for key in obj:
        if key not in required and key != "kind":
            raise ValidationError(f"{what} has an unknown field {key!r}")
    out = {}
    for key in required:
        if key not in obj:
            raise ValidationError(f"{what} is missing the field {key!r}")
        out[key] = obj[key]
    return out


def _str_table(value, what: str) -> dict[str, str]:
    table = _expect_obj(value, what)
    return {k: _expect_str(v, f"{what}[{k!r}]") for k, v in table.items()}


def _nested_table(value, what: str) -> dict[str, dict[str, str]]:
    table = _expect_obj(value, what)
    return {k: _str_table(v, f"{what}[{k!r}]") for k, v in table.items()}


def _finmap(dom: FinSet, cod: FinSet, value, what: str) -> FinMap:
    return FinMap(dom, cod, _str_table(value, what))


def det_system_to_obj(sys: DetSystem) -> dict:
    return {
        "kind": DOCTRINE_DET,
        "states": list(sys.states),
        "inputs": list(sys.interface.inputs),
        "outputs": list(sys.interface.outputs),
        "readout": {s: sys.readout(s) for s in sys.states},
        "update": {s: dict(row) for s, row in sys.update.items()},
    }


def det_system_from_obj(obj: dict, what: str) -> DetSystem:
    fields = _take(obj, what, ("states", "inputs", "outputs", "readout", "update"))
    states = FinSet(_expect_str_list(fields["states"], f"{what}.states"))
    iface = DetInterface(
        FinSet(_expect_str_list(fields["inputs"], f"{what}.inputs")),
        FinSet(_expect_str_list(fields["outputs"], f"{what}.outputs")),
    )
    readout = _finmap(states, iface.outputs, fields["readout"], f"{what}.readout")
    update = _nested_table(fields["update"], f"{what}.update")
    return DetSystem(states, iface, readout, update)


def stoch_system_to_obj(sys: StochSystem) -> dict:
    return {
        "kind": DOCTRINE_STOCH,
        "states": list(sys.states),
        "inputs": list(sys.interface.inputs),
        "outputs": list(sys.interface.outputs),
        "readout": {s: sys.readout(s) for s in sys.states},
        "update": {
            s: {i: d.to_obj() for i, d in row.items()} for s, row in sys.update.items()
        },
    }


def stoch_system_from_obj(obj: dict, what: str) -> StochSystem:
    fields = _take(obj, what, ("states", "inputs", "outputs", "readout", "update"))
    states = FinSet(_expect_str_list(fields["states"], f"{what}.states"))
    iface = DetInterface(
        FinSet(_expect_str_list(fields["inputs"], f"{what}.inputs")),
        FinSet(_expect_str_list(fields["outputs"], f"{what}.outputs")),
    )
    readout = _finmap(states, iface.outputs, fields["readout"], f"{what}.readout")
    raw = _expect_obj(fields["update"], f"{what}.update")
    update = {
        s: {
            i: Dist(states, _str_table(w, f"{what}.update[{s!r}][{i!r}]"))
            for i, w in _expect_obj(row, f"{what}.update[{s!r}]").items()
        }
        for s, row in raw.items()
    }
    return StochSystem(states, iface, readout, update)


def ode_system_to_obj(sys: OdeSystem) -> dict:
    return {
        "kind": DOCTRINE_ODE,
        "stateVars": list(sys.state_vars),
        "outputVars": list(sys.output_vars),
        "paramVars": list(sys.param_vars),
        "readout": {v: to_text(sys.readout[v]) for v in sys.output_vars},
        "field": {v: to_text(sys.field[v]) for v in sys.state_vars},
    }


def ode_system_from_obj(obj: dict, what: str) -> OdeSystem:
    fields = _take(obj, what, ("stateVars", "outputVars", "paramVars", "readout", "field"))
    return OdeSystem(
        _expect_str_list(fields["stateVars"], f"{what}.stateVars"),
        _expect_str_list(fields["outputVars"], f"{what}.outputVars"),
        _expect_str_list(fields["paramVars"], f"{what}.paramVars"),
        _str_table(fields["readout"], f"{what}.readout"),
        _str_table(fields["field"], f"{what}.field"),
    )


def det_lens_to_obj(lens: DetLens) -> dict:
    return {
        "kind": DOCTRINE_DET,
        "sourceInputs": list(lens.source.inputs),
        "sourceOutputs": list(lens.source.outputs),
        "targetInputs": list(lens.target.inputs),
        "targetOutputs": list(lens.target.outputs),
        "fwd": {o: lens.fwd(o) for o in lens.source.outputs},
        "bwd": {o: dict(row) for o, row in lens.bwd.items()},
    }


def det_lens_from_obj(obj: dict, what: str) -> DetLens:
    fields = _take(
        obj,
        what,
        ("sourceInputs", "sourceOutputs", "targetInputs", "targetOutputs", "fwd", "bwd"),
    )
    source = DetInterface(
        FinSet(_expect_str_list(fields["sourceInputs"], f"{what}.sourceInputs")),
        FinSet(_expect_str_list(fields["sourceOutputs"], f"{what}.sourceOutputs")),
    )
    target = DetInterface(
        FinSet(_expect_str_list(fields["targetInputs"], f"{what}.targetInputs")),
        FinSet(_expect_str_list(fields["targetOutputs"], f"{what}.targetOutputs")),
    )
    fwd = _finmap(source.outputs, target.outputs, fields["fwd"], f"{what}.fwd")
    bwd = _nested_table(fields["bwd"], f"{what}.bwd")
    return DetLens(source, target, fwd, bwd)


def det_chart_to_obj(chart: DetChart) -> dict:
    return {
        "kind": DOCTRINE_DET,
        "sourceInputs": list(chart.source.inputs),
        "sourceOutputs": list(chart.source.outputs),
        "targetInputs": list(chart.target.inputs),
        "targetOutputs": list(chart.target.outputs),
        "fwd": {o: chart.fwd(o) for o in chart.source.outputs},
        "push": {o: dict(row) for o, row in chart.push.items()},
    }


def det_chart_from_obj(obj: dict, what: str) -> DetChart:
    fields = _take(
        obj,
        what,
        ("sourceInputs", "sourceOutputs", "targetInputs", "targetOutputs", "fwd", "push"),
    )
    source = DetInterface(
        FinSet(_expect_str_list(fields["sourceInputs"], f"{what}.sourceInputs")),
        FinSet(_expect_str_list(fields["sourceOutputs"], f"{what}.sourceOutputs")),
    )
    target = DetInterface(
        FinSet(_expect_str_list(fields["targetInputs"], f"{what}.targetInputs")),
        FinSet(_expect_str_list(fields["targetOutputs"], f"{what}.targetOutputs")),
    )
    fwd = _finmap(source.outputs, target.outputs, fields["fwd"], f"{what}.fwd")
    push = _nested_table(fields["push"], f"{what}.push")
    return DetChart(source, target, fwd, push)


def ode_lens_to_obj(lens: OdeLens) -> dict:
    return {
        "kind": DOCTRINE_ODE,
        "sourceOutputVars": list(lens.source_outputs),
        "sourceParamVars": list(lens.source_params),
        "targetOutputVars": list(lens.target_outputs),
        "targetParamVars": list(lens.target_params),
        "fwd": {o: to_text(lens.fwd[o]) for o in lens.target_outputs},
        "bwd": {p: to_text(lens.bwd[p]) for p in lens.source_params},
    }


def ode_lens_from_obj(obj: dict, what: str) -> OdeLens:
    fields = _take(
        obj,
        what,
        (
            "sourceOutputVars",
            "sourceParamVars",
            "targetOutputVars",
            "targetParamVars",
            "fwd",
            "bwd",
        ),
    )
    return OdeLens(
        _expect_str_list(fields["sourceOutputVars"], f"{what}.sourceOutputVars"),
        _expect_str_list(fields["sourceParamVars"], f"{what}.sourceParamVars"),
        _expect_str_list(fields["targetOutputVars"], f"{what}.targetOutputVars"),
        _expect_str_list(fields["targetParamVars"], f"{what}.targetParamVars"),
        _str_table(fields["fwd"], f"{what}.fwd"),
        _str_table(fields["bwd"], f"{what}.bwd"),
    )


def system_to_obj(sys: SystemEntry) -> dict:
    kind = doctrine_of(sys)
    if kind == DOCTRINE_DET:
        return det_system_to_obj(sys)
    if kind == DOCTRINE_STOCH:
        return stoch_system_to_obj(sys)
    return ode_system_to_obj(sys)


def system_from_obj(obj: dict, what: str) -> SystemEntry:
    kind = _expect_str(_expect_obj(obj, what).get("kind"), f"{what}.kind")
    if kind == DOCTRINE_DET:
        return det_system_from_obj(obj, what)
    if kind == DOCTRINE_STOCH:
        return stoch_system_from_obj(obj, what)
    if kind == DOCTRINE_ODE:
        return ode_system_from_obj(obj, what)
    raise ValidationError(f"{what}: unknown kind {kind!r}")


def lens_to_obj(lens: LensEntry) -> dict:
    return det_lens_to_obj(lens) if isinstance(lens, DetLens) else ode_lens_to_obj(lens)


def lens_from_obj(obj: dict, what: str) -> LensEntry:
    kind = _expect_str(_expect_obj(obj, what).get("kind"), f"{what}.kind")
    if kind == DOCTRINE_DET:
        return det_lens_from_obj(obj, what)
    if kind == DOCTRINE_ODE:
        return ode_lens_from_obj(obj, what)
    raise ValidationError(f"{what}: unknown kind {kind!r}")


def chart_from_obj(obj: dict, what: str) -> DetChart:
    kind = _expect_str(_expect_obj(obj, what).get("kind"), f"{what}.kind")
    if kind != DOCTRINE_DET:
        raise ValidationError(f"{what}: charts exist only in the deterministic doctrine")
    return det_chart_from_obj(obj, what)


def project_to_obj(project: ProjectFile) -> dict:
    obj: dict = {"version": project.version}
    if project.systems:
        obj["systems"] = {name: system_to_obj(s) for name, s in project.systems.items()}
    if project.lenses:
        obj["lenses"] = {name: lens_to_obj(l) for name, l in project.lenses.items()}
    if project.charts:
        obj["charts"] = {name: det_chart_to_obj(c) for name, c in project.charts.items()}
    return obj


def project_from_obj(obj) -> ProjectFile:
    top = _expect_obj(obj, "project")
    for key in top:
        if key not in ("version", "systems", "lenses", "charts"):
            raise ValidationError(f"project has an unknown field {key!r}")
    if top.get("version") != 1:
        raise ValidationError(f"unsupported project version {top.get('version')!r}")
    project = ProjectFile(version=1)

    def load_section(section: str, loader) -> dict:
        out: dict = {}
        for name, entry in _expect_obj(top.get(section, {}), section).items():
            what = f"{section[:-1]} {name!r}"
            try:
                out[name] = loader(_expect_obj(entry, what), what)
            except OpendynError as exc:
                raise ValidationError(f"{what}: {exc}") from None
        return out

    project.systems = load_section("systems", system_from_obj)
    project.lenses = load_section("lenses", lens_from_obj)
    project.charts = load_section("charts", chart_from_obj)
    return project


def load_project(path: Union[str, Path]) -> ProjectFile:
    """Read and fully validate a project file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    try:
        return project_from_obj(obj)
    except OpendynError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def save_project(project: ProjectFile, path: Union[str, Path]) -> None:
    """Write a project deterministically (stable key order, trailing newline)."""
    Path(path).write_text(
        json.dumps(project_to_obj(project), indent=2) + "\n", encoding="utf-8"
    )
