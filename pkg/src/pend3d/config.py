"""Scenario files.

A scenario is a list of ``key = value`` lines.  ``#`` starts a comment,
vectors are whitespace separated, and keys carry a dotted section prefix::

    task = simulate
    body.J = 0.13 0.28 0.17
    body.rho = 0 0 0.3
    initial.omega = 1 1 1
    integrator.h = 1e-3
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .dynamics import BodyParams
from .equilibria import sort_principal_axes
from .errors import InvalidBody, ParseError, ValidationError
from .integrate import METHODS, IntegratorConfig

log = logging.getLogger("pend3d")

TASKS = ("simulate", "equilibria", "linearize", "poincare", "reconstruct", "phase")


def _float(s):
    v = float(s)
    if not np.isfinite(v):
        raise ValueError("not finite")
    return v


def _floats(n=None):
    def conv(s):
        v = tuple(_float(x) for x in s.split())
        if n is not None and len(v) not in (n if isinstance(n, tuple) else (n,)):
            raise ValueError(f"expected {n} numbers, got {len(v)}")
        if not v:
            raise ValueError("expected at least one number")
        return v
    return conv


def _int(s):
    return int(s)


def _bool(s):
    t = s.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError("expected true or false")


def _choice(*opts):
    def conv(s):
        if s not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}")
        return s
    return conv


def _choices(*opts):
    def conv(s):
        v = tuple(s.split())
        bad = [x for x in v if x not in opts]
        if bad or not v:
            raise ValueError(f"expected a list drawn from {', '.join(opts)}")
        return v
    return conv


def _str(s):
    return s


# key -> (converter, default)
SCHEMA = {
    "task": (_choice(*TASKS), "simulate"),
    "body.J": (_floats((3, 9)), None),
    "body.m": (_float, 1.0),
    "body.g": (_float, 9.81),
    "body.rho": (_floats(3), None),
    "body.balanced": (_bool, False),
    "model": (_choice("full", "lp", "lr"), "full"),
    "initial.R": (_floats(9), (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)),
    "initial.omega": (_floats(3), (0.0, 0.0, 0.0)),
    "initial.perturb": (_float, 0.0),
    "integrator.method": (_choice(*METHODS), "liegroup-rk4"),
    "integrator.h": (_float, 1e-3),
    "integrator.T": (_float, None),
    "integrator.renormalize_every": (_int, 1),
    "output.sample_every": (_int, 1),
    "equilibria.alpha_samples": (_int, 100),
    "equilibria.alpha_clamp": (_float, 1e-6),
    "equilibria.gamma_min": (_float, -5.0),
    "equilibria.gamma_max": (_float, 5.0),
    "equilibria.gamma_samples": (_int, 21),
    "equilibria.degeneracy_tol": (_float, 1e-12),
    "linearize.which": (_choices("hanging", "inverted"), ("hanging", "inverted")),
    "linearize.models": (_choices("full", "lp", "lr"), ("full", "lp", "lr")),
    "linearize.fd_step": (_float, 1e-5),
    "linearize.certify": (_bool, True),
    "poincare.energies": (_floats(), (-2.65, 0.0, 2.03, 8.83, 11.95)),
    "poincare.max_crossings": (_int, 2000),
    "poincare.tolerance": (_float, 1e-10),
    "poincare.energy_projection": (_bool, True),
    "reconstruct.input": (_str, ""),
    "reconstruct.mu": (_float, 0.0),
    "reconstruct.quadrature": (_choice("trapezoid", "simpson"), "trapezoid"),
    "phase.colatitude": (_float, 0.5),
    "phase.axis": (_floats(3), (0.0, 0.0, 1.0)),
    "phase.samples": (_int, 2001),
    "phase.n_sub": (_int, 16),
}

# integrator horizon defaults per task
DEFAULT_T = {"poincare": 100.0, "reconstruct": 5.0}


@dataclass(eq=False)
class Scenario:
    task: str
    body: BodyParams
    options: dict
    permutation: np.ndarray = None  # user -> principal axes, if reordered
    base_dir: str = "."

    def __getitem__(self, key):
        return self.options[key]

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (self.task == other.task and self.body == other.body
                and self.options == other.options)

    @property
    def integrator(self):
        T = self.options["integrator.T"]
        if T is None:
            T = DEFAULT_T.get(self.task, 10.0)
        return IntegratorConfig(method=self.options["integrator.method"],
                                h=self.options["integrator.h"], T=T,
                                renormalize_every=self.options["integrator.renormalize_every"])


def _split(text):
    """Yield ``(line_number, key, raw_value)``."""
    seen = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", no)
        key, val = (x.strip() for x in line.split("=", 1))
        if not key or any(c.isspace() for c in key):
            raise ParseError(f"malformed key {key!r}", no)
        if not val:
            raise ParseError(f"missing value for {key}", no)
        if key in seen:
            raise ParseError(f"duplicate key {key} (first on line {seen[key]})", no)
        seen[key] = no
        yield no, key, val


def parse_config(text, task=None, base_dir="."):
    """Parse and validate a scenario.

    Parameters
    ----------
    text : str
    task : str, optional
        Overrides the ``task`` key (the CLI passes its positional argument).

    Raises
    ------
    ParseError
        Malformed lines, unknown keys or unreadable values.
    ValidationError
        Values that parse but violate a physical or numerical constraint.
    """
    opts = {k: d for k, (_, d) in SCHEMA.items()}
    for no, key, val in _split(text):
        if key not in SCHEMA:
            raise ParseError(f"unknown key {key}", no)
        conv = SCHEMA[key][0]
        try:
            opts[key] = conv(val)
        except ValueError as exc:
            raise ParseError(f"{key}: {exc}", no) from None
    if task is not None:
        if task not in TASKS:
            raise ValidationError(f"unknown task {task!r}", "task")
        opts["task"] = task
    body, perm = _validate(opts)
    return Scenario(opts["task"], body, opts, perm, base_dir)


def _validate(o):
    for k in ("body.J", "body.rho"):
        if o[k] is None:
            raise ValidationError("required", k)
    if o["body.m"] <= 0:
        raise ValidationError("mass must be positive", "body.m")
    if o["body.g"] <= 0:
        raise ValidationError("gravity must be positive", "body.g")
    J = np.array(o["body.J"])
    J = np.diag(J) if J.size == 3 else J.reshape(3, 3)
    if np.max(np.abs(J - J.T)) > 1e-12 * np.max(np.abs(J)):
        raise ValidationError("inertia must be symmetric", "body.J")
    if np.min(np.linalg.eigvalsh(0.5 * (J + J.T))) <= 0:
        raise ValidationError("inertia must be positive definite", "body.J")
    rho = np.array(o["body.rho"])
    if np.linalg.norm(rho) == 0.0 and not o["body.balanced"]:
        raise ValidationError("rho is zero; set body.balanced = true", "body.rho")
    try:
        body = BodyParams(J=J, m=o["body.m"], g=o["body.g"], rho=rho,
                          balanced=o["body.balanced"])
    except InvalidBody as exc:
        raise ValidationError(str(exc), "body") from None

    if o["integrator.h"] <= 0:
        raise ValidationError("step must be positive", "integrator.h")
    T = o["integrator.T"]
    if T is not None and T < o["integrator.h"]:
        raise ValidationError("horizon must be at least one step", "integrator.T")
    for k in ("integrator.renormalize_every", "output.sample_every",
              "poincare.max_crossings", "phase.samples", "phase.n_sub"):
        if o[k] < 1:
            raise ValidationError("must be at least 1", k)
    if o["equilibria.alpha_samples"] < 2:
        raise ValidationError("must be at least 2", "equilibria.alpha_samples")
    if o["equilibria.gamma_samples"] < 1:
        raise ValidationError("must be at least 1", "equilibria.gamma_samples")
    if not 0 < o["equilibria.alpha_clamp"] < 0.5:
        raise ValidationError("must lie in (0, 0.5)", "equilibria.alpha_clamp")
    if not 1e-7 <= o["linearize.fd_step"] <= 1e-4:
        raise ValidationError("must lie in [1e-7, 1e-4]", "linearize.fd_step")
    if o["poincare.tolerance"] <= 0:
        raise ValidationError("must be positive", "poincare.tolerance")
    if not 0 < o["phase.colatitude"] < np.pi / 2 + 1e-12:
        raise ValidationError("must lie in (0, pi/2]", "phase.colatitude")
    if np.linalg.norm(o["phase.axis"]) == 0:
        raise ValidationError("axis must be nonzero", "phase.axis")
    R = np.array(o["initial.R"]).reshape(3, 3)
    if (np.max(np.abs(R.T @ R - np.eye(3))) > 1e-10
            or abs(np.linalg.det(R) - 1) > 1e-10):
        raise ValidationError("not a rotation matrix", "initial.R")

    perm = None
    d = np.diag(body.J)
    if body.is_diagonal and not (d[0] >= d[1] >= d[2]):
        _, perm = sort_principal_axes(body)
        log.warning("body.J is not ordered J1 >= J2 >= J3; principal-axis "
                    "computations use the reordered frame %s",
                    np.array2string(perm, precision=0).replace("\n", ""))
    return body, perm


def _render_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, tuple):
        return " ".join(repr(x) if isinstance(x, float) else str(x) for x in v)
    return str(v)


def render(s):
    """Inverse of :func:`parse_config` (up to comments and ordering)."""
    lines = []
    for k in SCHEMA:
        v = s.options[k]
        if v is None or v == "":
            continue
        lines.append(f"{k} = {_render_value(v)}")
    return "\n".join(lines) + "\n"
