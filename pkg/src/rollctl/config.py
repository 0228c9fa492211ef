"""Flat key-value scenario configuration files.

The format is INI-style sections with plain scalar values, chosen so that
presets diff cleanly. All physical quantities are SI; `J_kgcm2` converts the
rotor spin inertia from kg cm^2 on load. Attitudes are written as
compositions of elementary rotations, e.g. `rx(pi/9) ry(pi/18) rz(pi/3)`,
applied left to right; angles accept plain floats or fractions of pi
(`pi`, `-pi/6`, `2*pi/3`).
"""

from __future__ import annotations

import configparser
import re
from pathlib import Path

import numpy as np

from .geometry import Gains
from .liegroup import elem_rot
from .model import RobotParams, RobotState
from .sim import (
    CircleReference,
    LineReference,
    OrientationConstant,
    OrientationSinusoid,
    RestReference,
    ScenarioConfig,
)

__all__ = ["load_config", "parse_rotation", "parse_angle", "ConfigError"]


class ConfigError(ValueError):
    """Malformed configuration; message names the offending key."""


_ANGLE_RE = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?:(?P<num>\d+(?:\.\d+)?)\s*\*\s*)?pi(?:\s*/\s*(?P<den>\d+(?:\.\d+)?))?\s*$"
)


def parse_angle(text: str) -> float:
    """Angle in radians from a float literal or a pi fraction like `-pi/6`."""
    m = _ANGLE_RE.match(text)
    if m:
        val = np.pi
        if m.group("num"):
            val *= float(m.group("num"))
        if m.group("den"):
            val /= float(m.group("den"))
        return -val if m.group("sign") == "-" else val
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}")


_ROT_RE = re.compile(r"r([xyz])\s*\(([^)]*)\)")


def parse_rotation(text: str) -> np.ndarray:
    """Rotation from a composition of elementary rotations, left to right."""
    text = text.strip()
    if not text or text == "identity":
        return np.eye(3)
    R = np.eye(3)
    consumed = 0
    for m in _ROT_RE.finditer(text):
        axis = {"x": 1, "y": 2, "z": 3}[m.group(1)]
        R = R @ elem_rot(axis, parse_angle(m.group(2)))
        consumed += 1
    leftovers = _ROT_RE.sub("", text).strip()
    if consumed == 0 or leftovers:
        raise ConfigError(f"cannot parse rotation expression {text!r}")
    return R


def _vector(text: str, n: int, key: str) -> np.ndarray:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != n:
        raise ConfigError(f"{key}: expected {n} components, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"{key}: non-numeric component in {text!r}")


def _get_float(sec, key, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r} in section [{sec.name}]")
        return default
    try:
        return float(sec[key])
    except ValueError:
        raise ConfigError(f"{sec.name}.{key}: cannot parse {sec[key]!r} as a number")


def _parse_params(cp) -> RobotParams:
    if not cp.has_section("params"):
        return RobotParams.default()
    sec = cp["params"]
    kwargs = dict(
        m_s=_get_float(sec, "m_s", 1.0),
        m_rotor=_get_float(sec, "m_rotor", 0.672),
        r=_get_float(sec, "r", 0.176),
    )
    i_s = _get_float(sec, "I_s", 0.0153)
    kwargs["I_s_diag"] = (i_s, i_s, i_s)
    if "J_kgcm2" in sec:
        kwargs["J_a"] = _get_float(sec, "J_kgcm2") * 1e-4
    else:
        kwargs["J_a"] = _get_float(sec, "J_a", 0.672e-4)
    kwargs["J_b"] = 0.5 * kwargs["J_a"]
    try:
        return RobotParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[params]: {exc}")


def _parse_gains(cp) -> Gains:
    if not cp.has_section("gains"):
        return Gains()
    sec = cp["gains"]
    kp_diag = tuple(_vector(sec.get("Kp", "2, 8, 1"), 3, "gains.Kp"))
    try:
        return Gains(
            Kp_diag=kp_diag,
            Kv=_get_float(sec, "Kv", 0.5),
            kp=_get_float(sec, "kp", 1.0),
            kd=_get_float(sec, "kd", 0.12),
            alpha=_get_float(sec, "alpha", 0.0),
            k_gamma=_get_float(sec, "k_gamma", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"[gains]: {exc}")


def _parse_reference(cp, r: float):
    if not cp.has_section("reference"):
        return OrientationConstant(np.eye(3))
    sec = cp["reference"]
    kind = sec.get("kind", "orientation_constant").strip()
    if kind == "orientation_constant":
        return OrientationConstant(parse_rotation(sec.get("attitude", "identity")))
    if kind == "orientation_sinusoid":
        return OrientationSinusoid()
    if kind == "circle":
        center = _vector(sec.get("center", "0, 0"), 2, "reference.center")
        return CircleReference(
            radius=_get_float(sec, "radius"),
            rate=_get_float(sec, "rate", 1.0),
            center=center,
            r=r,
        )
    if kind == "line":
        return LineReference(
            velocity=_vector(sec.get("velocity", "0, 0"), 2, "reference.velocity"),
            offset=_vector(sec.get("offset", "0, 0"), 2, "reference.offset"),
            r=r,
        )
    if kind == "rest":
        return RestReference(point=_vector(sec.get("point", "0, 0"), 2, "reference.point"))
    raise ConfigError(f"reference.kind: unknown kind {kind!r}")


def _parse_init(cp) -> RobotState:
    if not cp.has_section("init"):
        return RobotState.from_attitude(np.eye(3))
    sec = cp["init"]
    return RobotState.from_attitude(
        parse_rotation(sec.get("attitude", "identity")),
        omega=_vector(sec.get("omega", "0, 0, 0"), 3, "init.omega"),
        theta=_vector(sec.get("theta", "0, 0, 0"), 3, "init.theta"),
        theta_dot=_vector(sec.get("theta_dot", "0, 0, 0"), 3, "init.theta_dot"),
        x=_vector(sec.get("x", "0, 0, 0"), 3, "init.x"),
    )


def _parse_torque_table(cp, base: Path):
    if not cp.has_section("controller"):
        return None
    sec = cp["controller"]
    if "torque" in sec:
        u = _vector(sec["torque"], 3, "controller.torque")
        if np.any(u != 0.0):
            return np.array([[0.0, u[0], u[1], u[2]], [1.0, u[0], u[1], u[2]]])
        return None
    if "table" in sec:
        path = Path(sec["table"])
        if not path.is_absolute():
            path = base / path
        try:
            table = np.loadtxt(path, delimiter=",", ndmin=2)
        except OSError as exc:
            raise ConfigError(f"controller.table: {exc}")
        if table.shape[1] != 4:
            raise ConfigError("controller.table: expected columns t,u1,u2,u3")
        return table
    return None


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    """Load a scenario configuration file.

    `overrides` may set dt, duration, seed and name (the CLI flags). Raises
    ConfigError naming the offending key on malformed input.
    """
    path = Path(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keys are case-sensitive (Kp and kp are distinct gains)
    try:
        with open(path) as f:
            cp.read_file(f)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}")

    params = _parse_params(cp)
    gains = _parse_gains(cp)
    reference = _parse_reference(cp, params.r)
    init = _parse_init(cp)

    if cp.has_section("run"):
        run = cp["run"]
        dt = _get_float(run, "dt", 1e-3)
        duration = _get_float(run, "duration", 10.0)
        seed = int(_get_float(run, "seed", 0))
        name = run.get("name", path.stem)
    else:
        dt, duration, seed, name = 1e-3, 10.0, 0, path.stem
    controller = "open_loop"
    if cp.has_section("controller"):
        controller = cp["controller"].get("kind", "open_loop").strip()

    cfg = dict(
        params=params,
        gains=gains,
        reference=reference,
        controller=controller,
        init=init,
        dt=dt,
        duration=duration,
        seed=seed,
        name=name,
        torque_table=_parse_torque_table(cp, path.parent),
    )
    for key in ("dt", "duration", "seed", "name"):
        if overrides and overrides.get(key) is not None:
            cfg[key] = overrides[key]
    try:
        return ScenarioConfig(**cfg)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")
