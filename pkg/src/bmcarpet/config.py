"""Line-oriented ``key = value`` run configuration.

Example::

    # exceptional measure on the 2 x 3 carpet
    m = 2
    n = 3
    n0 = 2
    n1 = 1
    q0 = exceptional

or, with an explicit digit set::

    m = 2
    n = 3
    digits = 0,0; 0,1; 1,0
    p = 0.2, 0.2, 0.6        # or: p = uniform
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from bmcarpet.carpet import BernoulliWeights, CarpetSpec, DomainError, TwoRowMeasure, ValidationError
from bmcarpet.spectra import exceptional_q0

KNOWN_KEYS = {"m", "n", "digits", "p", "n0", "n1", "q0"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: int
    n: int
    digits: tuple[tuple[int, int], ...] | None = None
    p: tuple[float, ...] | None = None
    n0: int | None = None
    n1: int | None = None
    q0: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def is_two_row(self) -> bool:
        return self.n0 is not None

    def carpet(self) -> CarpetSpec:
        if self.is_two_row:
            return self.two_row().carpet()
        return CarpetSpec(self.m, self.n, self.digits)

    def weights(self) -> BernoulliWeights:
        if self.is_two_row:
            return self.two_row().weights()
        return BernoulliWeights(self.carpet(), dict(zip(self.digits, self.p)))

    def two_row(self) -> TwoRowMeasure:
        """The two-row measure, converting an explicit digit table when it has that shape."""
        if self.is_two_row:
            return TwoRowMeasure(self.m, self.n, self.n0, self.n1, self.q0)
        try:
            return TwoRowMeasure.from_weights(self.weights())
        except (ValidationError, DomainError) as exc:
            raise ConfigError(f"this command needs a two-row measure with uniform columns: {exc}") from exc


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_float(key: str, text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(val):
        raise ConfigError(f"{key}: must be finite")
    return val


def _parse_digits(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [s.strip() for s in chunk.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"digits: expected 'i,j' pairs separated by ';', got {chunk!r}")
        out.append((_parse_int("digits", parts[0]), _parse_int("digits", parts[1])))
    if not out:
        raise ConfigError("digits: empty digit set")
    return tuple(out)


def parse_config_text(text: str) -> RunConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    extras = {k: v for k, v in values.items() if k not in KNOWN_KEYS}
    if extras:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(extras))}")
    for key in ("m", "n"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")
    m, n = _parse_int("m", values["m"]), _parse_int("n", values["n"])

    explicit = "digits" in values or "p" in values
    shorthand = any(k in values for k in ("n0", "n1", "q0"))
    if explicit == shorthand:
        raise ConfigError("give exactly one of {digits + p} or the two-row shorthand {n0, n1, q0}")

    try:
        if shorthand:
            missing = [k for k in ("n0", "n1", "q0") if k not in values]
            if missing:
                raise ConfigError(f"two-row shorthand is missing {', '.join(missing)}")
            n0, n1 = _parse_int("n0", values["n0"]), _parse_int("n1", values["n1"])
            if values["q0"].lower() == "exceptional":
                sigma = math.log(m) / math.log(n) if m >= 2 and n > m else math.nan
                q0 = exceptional_q0(n0, n1, sigma)
            else:
                q0 = _parse_float("q0", values["q0"])
            cfg = RunConfig(m, n, n0=n0, n1=n1, q0=q0)
            cfg.two_row()
            return cfg
        if "digits" not in values or "p" not in values:
            raise ConfigError("explicit form needs both 'digits' and 'p'")
        digits = _parse_digits(values["digits"])
        if values["p"].lower() == "uniform":
            p = tuple(1.0 / len(digits) for _ in digits)
        else:
            p = tuple(_parse_float("p", s) for s in values["p"].split(",") if s.strip())
        if len(p) != len(digits):
            raise ConfigError(f"p has {len(p)} entries for {len(digits)} digits")
        cfg = RunConfig(m, n, digits=digits, p=p)
        cfg.weights()
        return cfg
    except (ValidationError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config_text(text)
