"""Plain-text model/noise configuration (INI syntax, JSON-style array values).

Example::

    [model]
    F = [[1, 3], [0, 1]]
    G = [[1, 0], [0, 1]]
    H = [[1, 0]]
    Q = [[0.1, 0], [0, 0.1]]
    R = [[0.1]]
    x0 = [0, 0]
    P0 = [[1, 0], [0, 1]]
    # optional constant input added at every time update
    drift = [0, 0.5]

    [process_noise]
    kind = shot          # gaussian | shot | mixture
    shot_prob = 0.1
    shot_scale = 10

    [measurement_noise]
    kind = mixture
    mean1 = [2]
    mean2 = [-2]
    weight1 = 0.5

Noise means default to zero and covariances to the model's Q (process) or
R (measurement), so only the distinctive fields need to be given.
"""

import configparser
import json

import numpy as np

from .model import Gaussian, GaussianMixture, GaussianPlusShot, StateSpaceModel

MODEL_KEYS = ("F", "G", "H", "Q", "R", "x0", "P0")


class ConfigError(ValueError):
    pass


def _array(section, key, default=None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{section.name}] is missing {key!r}")
        return default
    try:
        return np.array(json.loads(section[key]), dtype=float)
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise ConfigError(f"[{section.name}] {key}: {exc}") from None


def _noise(section, cov):
    dim = cov.shape[0]
    zero = np.zeros(dim)
    kind = section.get("kind", "gaussian").strip().lower()
    if kind == "gaussian":
        return Gaussian(_array(section, "mean", zero), _array(section, "cov", cov))
    if kind == "shot":
        return GaussianPlusShot(
            _array(section, "mean", zero),
            _array(section, "cov", cov),
            section.getfloat("shot_prob", 0.1),
            section.getfloat("shot_scale", 10.0),
        )
    if kind == "mixture":
        return GaussianMixture(
            _array(section, "mean1", zero),
            _array(section, "cov1", cov),
            _array(section, "mean2", zero),
            _array(section, "cov2", cov),
            section.getfloat("weight1", 0.5),
        )
    raise ConfigError(f"[{section.name}] unknown noise kind {kind!r}")


def parse_config(text):
    """Parse config text into ``(model, process_noise, measurement_noise)``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if "model" not in parser:
        raise ConfigError("missing [model] section")
    sec = parser["model"]
    arrays = {k: _array(sec, k) for k in MODEL_KEYS}
    if "drift" in sec:
        arrays["drift"] = _array(sec, "drift")
    try:
        model = StateSpaceModel(**arrays)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"invalid model: {exc}") from None
    empty = configparser.SectionProxy(parser, "DEFAULT")
    w_sec = parser["process_noise"] if "process_noise" in parser else empty
    v_sec = parser["measurement_noise"] if "measurement_noise" in parser else empty
    try:
        return model, _noise(w_sec, model.Q), _noise(v_sec, model.R)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _dump(a):
    return json.dumps(np.asarray(a).tolist())


def _noise_lines(spec):
    if isinstance(spec, Gaussian):
        return ["kind = gaussian", f"mean = {_dump(spec.mean)}", f"cov = {_dump(spec.cov)}"]
    if isinstance(spec, GaussianPlusShot):
        return [
            "kind = shot",
            f"mean = {_dump(spec.mean)}",
            f"cov = {_dump(spec.cov)}",
            f"shot_prob = {spec.shot_prob!r}",
            f"shot_scale = {spec.shot_scale!r}",
        ]
    return [
        "kind = mixture",
        f"mean1 = {_dump(spec.mean1)}",
        f"cov1 = {_dump(spec.cov1)}",
        f"mean2 = {_dump(spec.mean2)}",
        f"cov2 = {_dump(spec.cov2)}",
        f"weight1 = {spec.weight1!r}",
    ]


def dump_config(model, w_spec, v_spec):
    """Inverse of :func:`parse_config`."""
    lines = ["[model]"] + [f"{k} = {_dump(getattr(model, k))}" for k in MODEL_KEYS]
    if model.drift is not None:
        lines.append(f"drift = {_dump(model.drift)}")
    lines += ["", "[process_noise]", *_noise_lines(w_spec), "", "[measurement_noise]", *_noise_lines(v_spec)]
    return "\n".join(lines) + "\n"
