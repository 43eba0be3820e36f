"""JSON/CSV formats for networks, signals, certificates and traces."""

from __future__ import annotations

import io as _io
import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, PortSet, WeightedGraph

__all__ = [
    "InputError",
    "NetworkFile",
    "parse_network",
    "load_network",
    "parse_signal",
    "load_signal",
    "signal_to_dict",
    "network_to_dict",
    "certificate_to_dict",
    "bound_to_dict",
    "allocation_to_dict",
    "signed_check_to_dict",
    "trace_to_csv",
    "dumps",
    "atomic_write",
    "GRAPH_SCHEMA",
    "SIGNAL_SCHEMA",
    "CERTIFICATE_SCHEMA",
    "BOUND_SCHEMA",
    "ALLOCATION_SCHEMA",
    "SIGNED_SCHEMA",
]


class InputError(ValueError):
    """Malformed or inconsistent input file."""


_NUM_OR_INF = {"anyOf": [{"type": "number"}, {"const": "inf"}]}
_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

GRAPH_SCHEMA = {
    "type": "object",
    "required": ["n", "edges"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["u", "v"],
                "properties": {
                    "u": {"type": "integer", "minimum": 0},
                    "v": {"type": "integer", "minimum": 0},
                    "w": {"type": ["number", "null"]},
                },
            },
        },
        "ports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["in", "out"],
                "properties": {"in": {"type": "integer"}, "out": {"type": "integer"}},
            },
        },
        "negative_edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["u", "v", "w"],
                "properties": {
                    "u": {"type": "integer"},
                    "v": {"type": "integer"},
                    "w": {"type": "number", "exclusiveMaximum": 0},
                },
            },
        },
    },
}

SIGNAL_SCHEMA = {
    "type": "object",
    "required": ["breakpoints", "values", "after"],
    "properties": {
        "breakpoints": {"type": "array", "items": {"type": "number"}},
        "values": _MATRIX,
        "after": {"type": "array", "items": {"type": "number"}},
    },
}

CERTIFICATE_SCHEMA = {
    "type": "object",
    "required": ["gamma", "gain_matrix", "lmi_margin", "riccati_lambda_max", "bound"],
    "properties": {
        "gamma": _NUM_OR_INF,
        "gain_matrix": {"anyOf": [_MATRIX, {"type": "null"}]},
        "lmi_margin": {"type": ["number", "null"]},
        "riccati_lambda_max": {"type": ["number", "null"]},
        "bound": _NUM_OR_INF,
        "lambda2": {"type": "number"},
        "effective_resistances": {"type": "array", "items": _NUM_OR_INF},
    },
}

BOUND_SCHEMA = {
    "type": "object",
    "required": ["bound", "lambda2", "lambda_max_EEt"],
    "properties": {
        "bound": _NUM_OR_INF,
        "lambda2": {"type": "number"},
        "lambda_max_EEt": {"type": "number"},
    },
}

ALLOCATION_SCHEMA = {
    "type": "object",
    "required": ["weights", "gamma", "iterations", "restarts", "suboptimality_vs_oracle"],
    "properties": {
        "weights": {"type": "array", "items": {"type": "number"}},
        "gamma": _NUM_OR_INF,
        "iterations": {"type": "integer", "minimum": 0},
        "restarts": {"type": "integer", "minimum": 0},
        "suboptimality_vs_oracle": {"type": ["number", "null"]},
    },
}

SIGNED_SCHEMA = {
    "type": "object",
    "required": ["psd", "lambda_min", "threshold"],
    "properties": {
        "psd": {"type": "boolean"},
        "lambda_min": {"type": "number"},
        "threshold": {"type": ["number", "null"]},
    },
}


@dataclass(frozen=True)
class NetworkFile:
    """Contents of a graph JSON file. ``None`` weights mark free edges."""

    n: int
    edges: tuple
    ports: tuple
    negative_edges: tuple = ()

    @property
    def pairs(self):
        return [(u, v) for u, v, _ in self.edges]

    @property
    def has_free_weights(self) -> bool:
        return any(w is None for _, _, w in self.edges)

    def graph(self) -> WeightedGraph:
        """Fixed-weight graph; raises InputError if any weight is free."""
        if self.has_free_weights:
            raise InputError("graph has free (null) weights; fix them before analysis")
        try:
            return WeightedGraph(self.n, self.edges)
        except GraphError as exc:
            raise InputError(str(exc)) from exc

    def topology(self) -> WeightedGraph:
        """Same edges with unit weights, for the allocator."""
        try:
            return WeightedGraph(self.n, [(u, v, 1.0) for u, v, _ in self.edges])
        except GraphError as exc:
            raise InputError(str(exc)) from exc

    def port_set(self) -> PortSet:
        try:
            return PortSet(self.n, self.ports)
        except GraphError as exc:
            raise InputError(str(exc)) from exc


def _loads(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _field(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{what}: missing field {key!r}")
    return obj[key]


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(f"{what}: expected an integer, got {x!r}")
    return x


def _num(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{what}: expected a number, got {x!r}")
    return float(x)


def parse_network(text: str) -> NetworkFile:
    data = _loads(text, "graph")
    n = _int(_field(data, "n", "graph"), "graph.n")
    if n < 1:
        raise InputError("graph.n must be positive")
    edges = []
    for idx, e in enumerate(_field(data, "edges", "graph")):
        where = f"graph.edges[{idx}]"
        u = _int(_field(e, "u", where), where + ".u")
        v = _int(_field(e, "v", where), where + ".v")
        w = e.get("w")
        edges.append((u, v, None if w is None else _num(w, where + ".w")))
    ports = []
    for idx, p in enumerate(data.get("ports", [])):
        where = f"graph.ports[{idx}]"
        ports.append((_int(_field(p, "in", where), where + ".in"), _int(_field(p, "out", where), where + ".out")))
    negs = []
    for idx, e in enumerate(data.get("negative_edges", [])):
        where = f"graph.negative_edges[{idx}]"
        negs.append(
            (
                _int(_field(e, "u", where), where + ".u"),
                _int(_field(e, "v", where), where + ".v"),
                _num(_field(e, "w", where), where + ".w"),
            )
        )
    net = NetworkFile(n, tuple(edges), tuple(ports), tuple(negs))
    # surface structural problems (bad indices, duplicates, negative weights) now
    net.topology()
    if not net.has_free_weights:
        net.graph()
    net.port_set()
    return net


def load_network(path) -> NetworkFile:
    with open(path) as fh:
        return parse_network(fh.read())


def network_to_dict(g: WeightedGraph, p: PortSet | None = None) -> dict:
    out = {"n": g.n_nodes, "edges": [{"u": u, "v": v, "w": w} for u, v, w in g.edges]}
    if p is not None:
        out["ports"] = [{"in": i, "out": j} for i, j in p.ports]
    return out


def parse_signal(text: str):
    from .simulator import PiecewiseConstantSignal

    data = _loads(text, "signal")
    try:
        return PiecewiseConstantSignal(
            _field(data, "breakpoints", "signal"),
            _field(data, "values", "signal"),
            _field(data, "after", "signal"),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"signal: {exc}") from exc


def load_signal(path):
    with open(path) as fh:
        return parse_signal(fh.read())


def signal_to_dict(sig) -> dict:
    return {
        "breakpoints": [float(b) for b in sig.breakpoints],
        "values": np.asarray(sig.values).tolist(),
        "after": np.asarray(sig.after).tolist(),
    }


def _num_or_inf(x):
    return "inf" if math.isinf(x) else float(x)


def _num_or_null(x):
    return None if (x is None or math.isnan(x)) else float(x)


def certificate_to_dict(cert, bound=None, resistances=None) -> dict:
    out = {
        "gamma": _num_or_inf(cert.gamma),
        "gain_matrix": None if cert.gain_matrix is None else cert.gain_matrix.tolist(),
        "achieving_direction": None if cert.achieving_direction is None else cert.achieving_direction.tolist(),
        "lmi_margin": _num_or_null(cert.lmi_margin),
        "riccati_lambda_max": _num_or_null(cert.riccati_margin),
        "bound": None if bound is None else _num_or_inf(bound.bound),
    }
    if bound is not None:
        out["lambda2"] = float(bound.lambda2)
        out["lambda_max_EEt"] = float(bound.lambda_max_EEt)
    if resistances is not None:
        out["effective_resistances"] = [_num_or_inf(r) for r in resistances]
    return out


def bound_to_dict(report) -> dict:
    return {
        "bound": _num_or_inf(report.bound),
        "lambda2": float(report.lambda2),
        "lambda_max_EEt": float(report.lambda_max_EEt),
    }


def allocation_to_dict(result, suboptimality=None) -> dict:
    return {
        "weights": [float(w) for w in result.weights],
        "gamma": _num_or_inf(result.gamma),
        "iterations": int(result.iterations),
        "restarts": int(result.restarts),
        "converged": bool(result.converged),
        "objective": _num_or_inf(result.objective),
        "suboptimality_vs_oracle": None if suboptimality is None else float(suboptimality),
    }


def signed_check_to_dict(check) -> dict:
    return {
        "psd": bool(check.psd),
        "lambda_min": float(check.lambda_min),
        "threshold": float(check.threshold),
        "numeric_psd": bool(check.numeric_psd),
        "analytic_psd": bool(check.analytic_psd),
    }


def trace_to_csv(trace, gamma: float) -> str:
    """Trace as CSV; the last two columns are the two curves of the gain plot."""
    n = trace.states.shape[1]
    k = trace.outputs.shape[1]
    header = ["t"] + [f"x_{i}" for i in range(n)] + [f"y_{i}" for i in range(k)]
    header += ["d_l2_running", "y_l2_running", "gamma_times_d_l2"]
    cols = np.column_stack(
        [
            trace.times,
            trace.states,
            trace.outputs,
            trace.running_input_l2,
            trace.running_output_l2,
            gamma * trace.running_input_l2,
        ]
    )
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in cols:
        buf.write(",".join(repr(float(x)) for x in row) + "\n")
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write(path, text: str):
    """Write through a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
