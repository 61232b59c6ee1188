"""Experiment configuration files.

Flat UTF-8 key-value format: `[section]` headers, `key = value` lines,
`#` comments. Sections: [experiment], [initial], [solver], [run],
[diagnostics]. Values that may scale with resolution (rho, samples) accept
the forms `<float>/N` and `N`.

Example::

    [experiment]
    name = flat_sheet_smooth
    base_seed = 1234
    output_dir = out/flat_sheet_smooth

    [initial]
    family = flat_sheet
    rho = 0.1
    delta = 0.025

    [solver]
    eps = 0.05

    [run]
    resolutions = 64 128
    samples = N
    output_times = 0 0.4

    [diagnostics]
    structure = on
    spectrum = 2
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

from .initial import FAMILIES, InitialMeasureSpec
from .solver import SolverParams

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "canonical_manifest_text"]


class ConfigError(ValueError):
    """Schema violation in a config file, anchored to a source line."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_KNOWN_SECTIONS = ("experiment", "initial", "solver", "run", "diagnostics")

_DIAG_KEYS = ("structure", "spectrum", "wasserstein", "cauchy", "mean_variance", "time_regularity")


@dataclass
class ExperimentConfig:
    """Parsed experiment description, before per-resolution resolution."""

    name: str = "experiment"
    base_seed: int = 0
    output_dir: str = "out"
    family: str = "flat_sheet"
    rho_rule: tuple = ("const", 0.0)     # ("const", x) or ("over_n", x) for x/N
    delta: float = 0.0
    q: int = 10
    d: float = 0.2
    quad_points: int = 400
    hurst: float = 0.5
    sigma0: float = 1.0
    s: int = 1
    eps: float = 1.0 / 20.0
    multiplier: str = "standard"
    theta: float | None = None
    m_n: float | None = None
    cfl: float = 0.5
    visc_safety: float = 0.9
    dealias: float = 1.5
    resolutions: tuple = (64,)
    samples_rule: tuple = ("match_n",)   # ("match_n",) or ("fixed", m)
    output_times: tuple = (0.0,)
    tolerate_failures: bool = False
    diagnostics: dict = dataclass_field(default_factory=dict)

    def rho(self, N: int) -> float:
        kind, x = self.rho_rule
        return x / N if kind == "over_n" else x

    def samples(self, N: int) -> int:
        return N if self.samples_rule[0] == "match_n" else int(self.samples_rule[1])

    def initial_spec(self, N: int) -> InitialMeasureSpec:
        return InitialMeasureSpec(
            family=self.family,
            N=N,
            rho=self.rho(N),
            delta=self.delta,
            q=self.q,
            d=self.d,
            quad_points=self.quad_points,
            hurst=self.hurst,
            sigma0=self.sigma0,
            base_seed=self.base_seed,
        )

    def solver_params(self, N: int) -> SolverParams:
        return SolverParams(
            N=N,
            s=self.s,
            eps=self.eps,
            m_n=self.m_n,
            multiplier=self.multiplier,
            theta=self.theta,
            cfl=self.cfl,
            visc_safety=self.visc_safety,
            dealias=self.dealias,
        )


def _parse_sections(text: str):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in _KNOWN_SECTIONS:
                raise ConfigError(f"unknown section [{current}]", lineno)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        sections[current][key.lower()] = (value, lineno)
    return sections


def _get(sections, section, key, default=None):
    return sections.get(section, {}).get(key, (default, None))


def _as_float(value, line, key):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {value!r}", line) from None


def _as_int(value, line, key):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}", line) from None


def _as_bool(value, line, key):
    v = str(value).strip().lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be on/off, got {value!r}", line)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config file; raise ConfigError with line anchors."""
    sections = _parse_sections(text)
    cfg = ExperimentConfig()

    value, line = _get(sections, "experiment", "name")
    if value is not None:
        cfg.name = value
    value, line = _get(sections, "experiment", "base_seed")
    if value is not None:
        cfg.base_seed = _as_int(value, line, "base_seed")
    value, line = _get(sections, "experiment", "output_dir")
    if value is not None:
        cfg.output_dir = value

    value, line = _get(sections, "initial", "family")
    if value is not None:
        fam = value.strip().lower()
        if fam not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {value!r}", line)
        cfg.family = fam
    value, line = _get(sections, "initial", "rho")
    if value is not None:
        v = value.strip()
        if v.endswith("/N"):
            cfg.rho_rule = ("over_n", _as_float(v[:-2], line, "rho"))
        else:
            cfg.rho_rule = ("const", _as_float(v, line, "rho"))
    for key, attr, conv in (
        ("delta", "delta", _as_float),
        ("d", "d", _as_float),
        ("hurst", "hurst", _as_float),
        ("sigma0", "sigma0", _as_float),
    ):
        value, line = _get(sections, "initial", key)
        if value is not None:
            setattr(cfg, attr, conv(value, line, key))
    value, line = _get(sections, "initial", "q")
    if value is not None:
        cfg.q = _as_int(value, line, "q")
    value, line = _get(sections, "initial", "quadrature_points")
    if value is not None:
        cfg.quad_points = _as_int(value, line, "quadrature_points")

    for key, attr, conv in (
        ("eps", "eps", _as_float),
        ("cfl", "cfl", _as_float),
        ("visc_safety", "visc_safety", _as_float),
        ("dealias", "dealias", _as_float),
        ("theta", "theta", _as_float),
        ("m_n", "m_n", _as_float),
    ):
        value, line = _get(sections, "solver", key)
        if value is not None:
            setattr(cfg, attr, conv(value, line, key))
    value, line = _get(sections, "solver", "s")
    if value is not None:
        cfg.s = _as_int(value, line, "s")
    value, line = _get(sections, "solver", "multiplier")
    if value is not None:
        if value not in ("standard", "power"):
            raise ConfigError(f"multiplier must be standard or power, got {value!r}", line)
        cfg.multiplier = value

    value, line = _get(sections, "run", "resolutions")
    if value is not None:
        try:
            res = tuple(int(tok) for tok in value.split())
        except ValueError:
            raise ConfigError(f"resolutions must be integers, got {value!r}", line) from None
        if not res:
            raise ConfigError("resolutions must not be empty", line)
        if any(b <= a for a, b in zip(res, res[1:])):
            raise ConfigError("resolutions must be sorted ascending", line)
        if any(n < 8 or n % 2 for n in res):
            raise ConfigError("each resolution must be even and >= 8", line)
        cfg.resolutions = res
    value, line = _get(sections, "run", "samples")
    if value is not None:
        v = value.strip()
        if v.upper() == "N":
            cfg.samples_rule = ("match_n",)
        else:
            m = _as_int(v, line, "samples")
            if m < 1:
                raise ConfigError("samples must be >= 1", line)
            cfg.samples_rule = ("fixed", m)
    value, line = _get(sections, "run", "output_times")
    if value is not None:
        try:
            times = tuple(float(tok) for tok in value.split())
        except ValueError:
            raise ConfigError(f"output_times must be numbers, got {value!r}", line) from None
        if not times or times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("output_times must be nonnegative and strictly increasing", line)
        cfg.output_times = times
    value, line = _get(sections, "run", "tolerate_failures")
    if value is not None:
        cfg.tolerate_failures = _as_bool(value, line, "tolerate_failures")

    for key in sections.get("diagnostics", {}):
        if key not in _DIAG_KEYS:
            _, line = sections["diagnostics"][key]
            raise ConfigError(f"unknown diagnostic {key!r}", line)
    for key in ("structure", "cauchy", "mean_variance"):
        value, line = _get(sections, "diagnostics", key)
        if value is not None and _as_bool(value, line, key):
            cfg.diagnostics[key] = True
    value, line = _get(sections, "diagnostics", "spectrum")
    if value is not None:
        cfg.diagnostics["spectrum"] = _as_float(value, line, "spectrum")
    value, line = _get(sections, "diagnostics", "wasserstein")
    if value is not None:
        k = _as_int(value, line, "wasserstein")
        if k not in (1, 2, 3):
            raise ConfigError("wasserstein order must be 1, 2 or 3", line)
        cfg.diagnostics["wasserstein"] = k
    value, line = _get(sections, "diagnostics", "time_regularity")
    if value is not None:
        cfg.diagnostics["time_regularity"] = _as_float(value, line, "time_regularity")

    # family-specific sanity, anchored to the family line when possible
    _, fam_line = _get(sections, "initial", "family")
    if cfg.family == "sinusoidal_sheet":
        if cfg.rho_rule == ("const", 0.0):
            raise ConfigError("sinusoidal_sheet requires rho > 0 (e.g. rho = 5/N)", fam_line)
    if cfg.family == "fbm" and not 0.0 < cfg.hurst < 1.0:
        raise ConfigError("fbm requires 0 < hurst < 1", fam_line)
    return cfg


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def canonical_manifest_text(cfg: ExperimentConfig, N: int, prng_id: str, version: str) -> str:
    """Resolved, canonically ordered manifest for one resolution.

    This text is what snapshot files fingerprint (FNV-1a 64); it records
    every parameter the run depended on, including the PRNG algorithm.
    """
    kind, x = cfg.rho_rule
    lines = [
        "[experiment]",
        f"name = {cfg.name}",
        f"base_seed = {cfg.base_seed}",
        "",
        "[initial]",
        f"family = {cfg.family}",
        f"rho = {_fmt(cfg.rho(N))}",
        f"rho_rule = {_fmt(x)}{'/N' if kind == 'over_n' else ''}",
        f"delta = {_fmt(cfg.delta)}",
        f"q = {cfg.q}",
        f"d = {_fmt(cfg.d)}",
        f"quadrature_points = {cfg.quad_points}",
        f"hurst = {_fmt(cfg.hurst)}",
        f"sigma0 = {_fmt(cfg.sigma0)}",
        "",
        "[solver]",
        f"n = {N}",
        f"s = {cfg.s}",
        f"eps = {_fmt(cfg.eps)}",
        f"multiplier = {cfg.multiplier}",
        f"theta = {_fmt(cfg.theta) if cfg.theta is not None else 'default'}",
        f"m_n = {_fmt(cfg.m_n) if cfg.m_n is not None else 'default'}",
        f"cfl = {_fmt(cfg.cfl)}",
        f"visc_safety = {_fmt(cfg.visc_safety)}",
        f"dealias = {_fmt(cfg.dealias)}",
        "",
        "[run]",
        f"samples = {cfg.samples(N)}",
        f"output_times = {' '.join(_fmt(t) for t in cfg.output_times)}",
        f"tolerate_failures = {'on' if cfg.tolerate_failures else 'off'}",
        "",
        "[provenance]",
        f"prng = {prng_id}",
        f"package_version = {version}",
        "format_version = 1",
        "",
    ]
    return "\n".join(lines)
