"""Experiment configuration: a sectioned key-value text file, strictly validated.

Unknown sections or keys are rejected with their location; validation
collects every violation before failing.  ``parse_config`` and
``ExperimentConfig.to_text`` round-trip.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import os

import numpy as np

from .errors import ConfigError

PRESETS = (
    "dispersion",
    "scaling",
    "convergence",
    "paralin_residual",
    "rt_crosscheck",
    "freeplay",
)

_SCHEMA = {
    "experiment": ("preset", "seed", "resolutions", "z_levels"),
    "physics": (
        "phase",
        "kappa",
        "mu_minus",
        "mu_plus",
        "rho_minus",
        "rho_plus",
        "depth",
        "top_depth",
        "h",
    ),
    "initial": ("modes", "file"),
    "run": ("dt", "t_end", "scheme", "epsilon", "monitor_every", "hs_order"),
}


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    seed: int = 0
    resolutions: tuple = (128,)
    z_levels: int = 48
    phase: str = "one"
    kappa: float = 1.0
    mu_minus: float = 1.0
    mu_plus: float = 1.0
    rho_minus: float = 2.0
    rho_plus: float = 1.0
    depth: float = np.inf
    top_depth: float = np.inf
    h: float = 0.3
    modes: tuple = ((1, 0.1), (2, 0.05))
    initial_file: str = ""
    dt: float = 0.01
    t_end: float = 0.5
    scheme: str = "semi_implicit"
    epsilon: float = 0.0
    monitor_every: int = 1
    hs_order: float = 2.0

    def to_text(self) -> str:
        def depth_str(d):
            return "inf" if np.isinf(d) else f"{d:.17g}"

        modes = " ".join(f"{k}:{a:.17g}" for k, a in self.modes)
        res = " ".join(str(r) for r in self.resolutions)
        lines = [
            "[experiment]",
            f"preset = {self.preset}",
            f"seed = {self.seed}",
            f"resolutions = {res}",
            f"z_levels = {self.z_levels}",
            "",
            "[physics]",
            f"phase = {self.phase}",
            f"kappa = {self.kappa:.17g}",
            f"mu_minus = {self.mu_minus:.17g}",
            f"mu_plus = {self.mu_plus:.17g}",
            f"rho_minus = {self.rho_minus:.17g}",
            f"rho_plus = {self.rho_plus:.17g}",
            f"depth = {depth_str(self.depth)}",
            f"top_depth = {depth_str(self.top_depth)}",
            f"h = {self.h:.17g}",
            "",
            "[initial]",
            f"modes = {modes}",
        ]
        if self.initial_file:
            lines.append(f"file = {self.initial_file}")
        lines += [
            "",
            "[run]",
            f"dt = {self.dt:.17g}",
            f"t_end = {self.t_end:.17g}",
            f"scheme = {self.scheme}",
            f"epsilon = {self.epsilon:.17g}",
            f"monitor_every = {self.monitor_every}",
            f"hs_order = {self.hs_order:.17g}",
            "",
        ]
        return "\n".join(lines)

    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _parse_depth(raw: str) -> float:
    raw = raw.strip().lower()
    if raw in ("inf", "infinite", "none"):
        return np.inf
    return float(raw)


def parse_config_text(text: str, base_dir: str = ".") -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    violations = []
    for section in cp.sections():
        if section not in _SCHEMA:
            violations.append(f"[{section}]: unknown section")
            continue
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                violations.append(f"[{section}].{key}: unknown key")

    def get(section, key, default, conv=str):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError):
            violations.append(f"[{section}].{key}: cannot parse {raw!r}")
            return default

    preset = get("experiment", "preset", "")
    if preset not in PRESETS:
        violations.append(
            f"[experiment].preset: must be one of {', '.join(PRESETS)} (got {preset!r})"
        )
    seed = get("experiment", "seed", 0, int)
    res_raw = get("experiment", "resolutions", "128")
    resolutions = []
    for tok in str(res_raw).split():
        try:
            r = int(tok)
        except ValueError:
            violations.append(f"[experiment].resolutions: bad entry {tok!r}")
            continue
        if r < 8 or r & (r - 1) != 0:
            violations.append(f"[experiment].resolutions: {r} is not a power of two >= 8")
        else:
            resolutions.append(r)
    if not resolutions:
        resolutions = [128]
    z_levels = get("experiment", "z_levels", 48, int)
    if z_levels < 8:
        violations.append("[experiment].z_levels: need at least 8")

    phase = get("physics", "phase", "one")
    if phase not in ("one", "two"):
        violations.append(f"[physics].phase: must be 'one' or 'two' (got {phase!r})")
    kappa = get("physics", "kappa", 1.0, float)
    mu_minus = get("physics", "mu_minus", 1.0, float)
    mu_plus = get("physics", "mu_plus", 1.0, float)
    rho_minus = get("physics", "rho_minus", 2.0, float)
    rho_plus = get("physics", "rho_plus", 1.0, float)
    depth = get("physics", "depth", np.inf, _parse_depth)
    top_depth = get("physics", "top_depth", np.inf, _parse_depth)
    h = get("physics", "h", 0.3, float)
    for name, value in (("kappa", kappa), ("mu_minus", mu_minus), ("mu_plus", mu_plus), ("h", h)):
        if not value > 0.0:
            violations.append(f"[physics].{name}: must be positive")
    if phase == "two" and not rho_minus > rho_plus:
        violations.append("[physics].rho_minus: must exceed rho_plus (stable stratification)")

    modes_raw = get("initial", "modes", "1:0.1 2:0.05")
    modes = []
    for tok in str(modes_raw).split():
        try:
            kstr, astr = tok.split(":")
            k, a = int(kstr), float(astr)
        except ValueError:
            violations.append(f"[initial].modes: bad entry {tok!r} (want k:amplitude)")
            continue
        if not np.isfinite(a):
            violations.append(f"[initial].modes: amplitude for mode {k} is not finite")
        modes.append((k, a))
    initial_file = get("initial", "file", "")
    if initial_file:
        full = os.path.join(base_dir, initial_file)
        if not os.path.exists(full):
            violations.append(f"[initial].file: {initial_file!r} does not exist")

    dt = get("run", "dt", 0.01, float)
    t_end = get("run", "t_end", 0.5, float)
    scheme = get("run", "scheme", "semi_implicit")
    if scheme not in ("semi_implicit", "rk4"):
        violations.append(f"[run].scheme: must be semi_implicit or rk4 (got {scheme!r})")
    epsilon = get("run", "epsilon", 0.0, float)
    monitor_every = get("run", "monitor_every", 1, int)
    hs_order = get("run", "hs_order", 2.0, float)
    if not dt > 0.0:
        violations.append("[run].dt: must be positive")
    if not t_end > 0.0:
        violations.append("[run].t_end: must be positive")
    if epsilon < 0.0:
        violations.append("[run].epsilon: must be nonnegative")
    if monitor_every < 1:
        violations.append("[run].monitor_every: must be >= 1")

    if violations:
        raise ConfigError(
            "invalid configuration:\n  " + "\n  ".join(violations), violations=violations
        )

    return ExperimentConfig(
        preset=preset,
        seed=seed,
        resolutions=tuple(resolutions),
        z_levels=z_levels,
        phase=phase,
        kappa=kappa,
        mu_minus=mu_minus,
        mu_plus=mu_plus,
        rho_minus=rho_minus,
        rho_plus=rho_plus,
        depth=depth,
        top_depth=top_depth,
        h=h,
        modes=tuple(modes),
        initial_file=initial_file,
        dt=dt,
        t_end=t_end,
        scheme=scheme,
        epsilon=epsilon,
        monitor_every=monitor_every,
        hs_order=hs_order,
    )


def parse_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, base_dir=os.path.dirname(os.path.abspath(path)))
