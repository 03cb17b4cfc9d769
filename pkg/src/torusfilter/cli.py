"""Config-driven experiment runner.

A config is a flat ``key = value`` file with dotted keys, e.g.::

    experiment = rate-fit
    scenario.kind = integrable
    curve.seeds = 10

Every run writes ``manifest.json`` first, then its CSV/PGM artifacts into ``--out``.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    LimitTarget,
    brownian_moment_oracle,
    filter_error_curve,
    geometric_sum_oracle,
    smoother_error_curve,
)
from .export import (
    write_chain,
    write_coefficients,
    write_curve,
    write_pgm,
    write_rows,
    write_state,
)
from .gaussian import GaussianSampler, GridWhite, LaplacianPower
from .kalman import assimilate, filter_mean, initial_state, smoother_closed_form
from .mcmc import (
    FlatBox,
    GaussianVelocityPrior,
    GibbsConfig,
    PcnConfig,
    gibbs_sample_velocity_and_ic,
    pcn_sample_initial_condition,
    velocity_proposal_std,
    velocity_seed,
)
from .operators import AdvectionOperator
from .spectral import SpectralField, WavenumberLattice, partial_fourier_projection
from .tolerances import TOL
from .truthgen import Scenario, ScenarioConfig, generate_observations, reference_truth_ic
from .velocity import ConstantVelocity

__all__ = ["EXPERIMENTS", "ConfigError", "load_config", "parse_config", "run", "main"]

EXPERIMENTS = ("smoother-limit", "filter-limit", "rate-fit", "mcmc-ic", "gibbs-velocity", "oracle-suite")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default); None defaults are resolved per experiment
SCHEMA: dict[str, tuple] = {
    "experiment": (str, "smoother-limit"),
    "grid.size": (int, 32),
    "grid.max_mode": (int, None),
    "time.dt": (float, 0.1),
    "obs.n": (int, 1024),
    "obs.sigma2": (float, 1e-4),
    "obs.noise_seed": (int, 0),
    "model.c": (_floats, (-0.5, -1.0)),
    "truth.ic": (str, "reference"),
    "truth.seed": (int, 0),
    "scenario.kind": (str, "none"),
    "scenario.shift": (_floats, None),
    "scenario.alpha": (_floats, (0.5, 0.5)),
    "scenario.beta": (float, 1.0),
    "scenario.t0": (float, None),
    "scenario.epsilon": (float, 0.1),
    "scenario.path_seed": (int, 0),
    "prior.scale": (float, 1.0),
    "prior.exponent": (float, 2.0),
    "prior.shift": (float, 0.0),
    "curve.checkpoints": (_ints, (8, 16, 32, 64, 128, 256, 512, 1024)),
    "curve.seeds": (int, 10),
    "curve.target": (str, "auto"),
    "curve.s": (float, 0.0),
    "curve.discard": (int, 2),
    "curve.squared": (_bool, None),
    "check.slope_low": (float, None),
    "check.slope_high": (float, None),
    "check.z_max": (float, 3.0),
    "check.c_tol": (float, 0.05),
    "mcmc.beta": (float, 0.3),
    "mcmc.n_burn": (int, 10_000),
    "mcmc.n_keep": (int, 100_000),
    "mcmc.seed": (int, 0),
    "mcmc.c": (_floats, None),
    "gibbs.inner_v_steps": (int, 10),
    "gibbs.inner_c_steps": (int, 1),
    "gibbs.c_prior": (str, "flat"),
    "gibbs.c_prior_low": (_floats, (-10.0, -10.0)),
    "gibbs.c_prior_high": (_floats, (10.0, 10.0)),
    "gibbs.c_prior_mean": (_floats, (0.0, 0.0)),
    "gibbs.c_prior_std": (_floats, (1.0, 1.0)),
    "gibbs.c_step_factor": (float, 1.5),
    "gibbs.c_proposal_std": (_floats, None),
    "oracle.triples": (int, 100),
    "oracle.realizations": (int, 1000),
    "oracle.seed": (int, 0),
}


def parse_config(text: str) -> dict:
    """Parse and validate config text; unknown keys are a hard error."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = dict(cp["run"])
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for key, (conv, default) in SCHEMA.items():
        if key in raw:
            try:
                out[key] = conv(raw[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
        else:
            out[key] = default
    if out["experiment"] not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {out['experiment']!r}")
    for key in ("model.c", "scenario.alpha", "gibbs.c_prior_low", "gibbs.c_prior_high",
                "gibbs.c_prior_mean", "gibbs.c_prior_std"):
        if len(out[key]) != 2:
            raise ConfigError(f"{key} needs two components")
    for key in ("scenario.shift", "mcmc.c", "gibbs.c_proposal_std"):
        if out[key] is not None and len(out[key]) != 2:
            raise ConfigError(f"{key} needs two components")
    if out["truth.ic"] not in ("reference", "prior-draw"):
        raise ConfigError("truth.ic must be 'reference' or 'prior-draw'")
    if out["gibbs.c_prior"] not in ("flat", "gaussian"):
        raise ConfigError("gibbs.c_prior must be 'flat' or 'gaussian'")
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())


@dataclass
class _Setup:
    lattice: WavenumberLattice
    prior: LaplacianPower
    noise: GridWhite
    truth: SpectralField
    scenario_cfg: ScenarioConfig


def _setup(cfg: dict) -> _Setup:
    size = cfg["grid.size"]
    mm = cfg["grid.max_mode"] if cfg["grid.max_mode"] is not None else (size - 1) // 2
    lat = WavenumberLattice(mm, size)
    prior = LaplacianPower(cfg["prior.scale"], cfg["prior.exponent"], cfg["prior.shift"])
    noise = GridWhite(cfg["obs.sigma2"])
    if cfg["truth.ic"] == "reference":
        truth = reference_truth_ic(lat)
    else:
        truth = GaussianSampler(prior, SpectralField.zeros(lat), seed=cfg["truth.seed"]).sample()
    sc = Scenario(
        cfg["scenario.kind"], cfg["scenario.shift"], cfg["scenario.alpha"],
        cfg["scenario.beta"], cfg["scenario.t0"], cfg["scenario.epsilon"],
    )
    scfg = ScenarioConfig(sc, cfg["time.dt"], cfg["obs.n"], truth, noise,
                          cfg["obs.noise_seed"], cfg["scenario.path_seed"], cfg["model.c"])
    return _Setup(lat, prior, noise, truth, scfg)


def _aliasing_period(shift) -> tuple[int, int]:
    """Denominators (p, q) of a rational per-step shift."""
    fr = [Fraction(x).limit_denominator(1000) for x in shift]
    for x, f in zip(shift, fr):
        if abs(float(f) - x) > 1e-12:
            raise ConfigError(f"scenario.shift component {x} is not a small-denominator rational")
    return fr[0].denominator, fr[1].denominator


def _smoother_target(cfg, s: _Setup) -> LimitTarget:
    kind = s.scenario_cfg.scenario.kind
    name = cfg["curve.target"]
    if name == "auto":
        name = {"none": "truth", "const_rational": "projection", "const_irrational": "average",
                "integrable": "shifted", "brownian": "average"}[kind]
    if name == "truth":
        return LimitTarget.truth(s.truth)
    if name == "projection":
        return LimitTarget.projection(s.truth, *_aliasing_period(s.scenario_cfg.scenario.shift))
    if name == "average":
        return LimitTarget.average(s.truth)
    if name == "shifted":
        return LimitTarget.shifted(s.truth, s.scenario_cfg.scenario.alpha)
    raise ConfigError(f"unknown curve.target {name!r}")


def _slope_band(cfg, squared: bool):
    lo, hi = cfg["check.slope_low"], cfg["check.slope_high"]
    if lo is not None or hi is not None:
        return lo if lo is not None else -np.inf, hi if hi is not None else np.inf
    if squared:
        return -2.5, -1.0
    return -0.65, -0.35


class _Run:
    def __init__(self, cfg: dict, out: Path, seeds: int):
        self.cfg = cfg
        self.out = out
        self.seeds = seeds
        self.failures: list[str] = []
        self.lines: list[str] = []

    def check(self, ok: bool, what: str):
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {what}")
        if not ok:
            self.failures.append(what)

    def path(self, name: str) -> Path:
        return self.out / name


def _run_curve(r: _Run, filt: bool, squared_default: bool):
    cfg, s = r.cfg, _setup(r.cfg)
    kind = s.scenario_cfg.scenario.kind
    squared = squared_default if cfg["curve.squared"] is None else cfg["curve.squared"]
    cps = cfg["curve.checkpoints"]
    if filt:
        target = None
        if cfg["curve.target"] == "projection" or (cfg["curve.target"] == "auto" and kind == "const_rational"):
            p, q = _aliasing_period(s.scenario_cfg.scenario.shift)
            proj = partial_fourier_projection(s.truth, p, q)

            def target(op, n, proj=proj):
                return op.propagate(proj, n * s.scenario_cfg.dt)

        fit = filter_error_curve(s.scenario_cfg, s.prior, s.noise, cps, r.seeds, cfg["curve.s"],
                                 target, discard=cfg["curve.discard"])
    else:
        tgt = _smoother_target(cfg, s)
        fit = smoother_error_curve(s.scenario_cfg, s.prior, s.noise, tgt, cfg["curve.s"], cps,
                                   r.seeds, discard=cfg["curve.discard"])
    if squared:
        fit = fit.squared()
    write_curve(r.path("curve.csv"), fit)

    # one representative realization at the largest checkpoint
    one = ScenarioConfig(s.scenario_cfg.scenario, s.scenario_cfg.dt, cps[-1], s.truth, s.noise,
                         cfg["obs.noise_seed"], cfg["scenario.path_seed"], cfg["model.c"])
    ys = generate_observations(one)
    op = AdvectionOperator(one.model_path())
    state = assimilate(initial_state(SpectralField.zeros(s.lattice), s.prior, op, one.dt), ys, s.noise)
    field = filter_mean(state) if filt else state.smoother_mean
    write_state(r.path("state.csv"), state.smoother_mean, state.variance)
    write_coefficients(r.path("mean_coefficients.csv"), field)
    write_pgm(r.path("mean.pgm"), field)
    write_pgm(r.path("truth.pgm"), s.truth)

    if kind == "const_irrational" and not filt and cfg["check.slope_low"] is None:
        e = fit.errors[1:]
        r.check(bool(np.all(np.diff(e) < 0)), f"error decreases at every checkpoint from n={cps[1]}")
    else:
        lo, hi = _slope_band(cfg, squared)
        r.check(lo <= fit.slope <= hi, f"slope {fit.slope:.4f} within [{lo}, {hi}]")
    return fit


def _run_mcmc_ic(r: _Run):
    cfg, s = r.cfg, _setup(r.cfg)
    c = cfg["mcmc.c"] or cfg["model.c"]
    ys = generate_observations(s.scenario_cfg)
    pcfg = PcnConfig(cfg["mcmc.beta"], cfg["mcmc.n_burn"], cfg["mcmc.n_keep"], cfg["mcmc.seed"])
    chain = pcn_sample_initial_condition(pcfg, s.prior, c, ys, s.scenario_cfg.dt, s.noise)
    write_coefficients(r.path("v0_mean_coefficients.csv"), chain.mean)
    write_pgm(r.path("v0_mean.pgm"), chain.mean)
    write_pgm(r.path("truth.pgm"), s.truth)
    cs = np.tile(np.asarray(c, dtype=float), (len(chain.phi_trace), 1))
    write_chain(r.path("chain.csv"), cs, chain.phi_trace, chain.accepted)
    op = AdvectionOperator(ConstantVelocity(c))
    kf = smoother_closed_form(SpectralField.zeros(s.lattice), s.prior, s.noise, op, ys, s.scenario_cfg.dt)
    d = chain.mean.coeff - kf.smoother_mean.coeff
    rep = s.lattice.representatives & (kf.variance > 0)
    z = np.concatenate([np.abs(d.real[rep]) / chain.stderr_re[rep], np.abs(d.imag[rep]) / chain.stderr_im[rep]])
    r.lines.append(f"acceptance rate {chain.acceptance_rate:.4f}")
    r.check(float(z.max()) <= cfg["check.z_max"], f"max |z| vs Kalman mean {z.max():.3f} <= {cfg['check.z_max']}")
    return chain


def _run_gibbs(r: _Run):
    cfg, s = r.cfg, _setup(r.cfg)
    dt = s.scenario_cfg.dt
    ys = generate_observations(s.scenario_cfg)
    c0 = velocity_seed(ys, dt)
    kf = smoother_closed_form(SpectralField.zeros(s.lattice), s.prior, s.noise,
                              AdvectionOperator(ConstantVelocity(c0)), ys, dt)
    if cfg["gibbs.c_proposal_std"] is not None:
        step = cfg["gibbs.c_proposal_std"]
    else:
        step = tuple(velocity_proposal_std(ys, kf.smoother_mean, dt, s.noise, cfg["gibbs.c_step_factor"]))
    if cfg["gibbs.c_prior"] == "flat":
        rho = FlatBox(cfg["gibbs.c_prior_low"], cfg["gibbs.c_prior_high"])
    else:
        rho = GaussianVelocityPrior(cfg["gibbs.c_prior_mean"], cfg["gibbs.c_prior_std"])
    gcfg = GibbsConfig(
        PcnConfig(cfg["mcmc.beta"], cfg["mcmc.n_burn"], cfg["mcmc.n_keep"], cfg["mcmc.seed"]),
        step, rho, cfg["gibbs.inner_v_steps"], cfg["gibbs.inner_c_steps"],
    )
    chain = gibbs_sample_velocity_and_ic(gcfg, s.prior, ys, dt, s.noise, c0, v_init=kf.smoother_mean)
    write_chain(r.path("chain.csv"), chain.c_samples, chain.phi_trace, chain.c_accepted)
    write_coefficients(r.path("v0_mean_coefficients.csv"), chain.v0_mean)
    write_pgm(r.path("v0_mean.pgm"), chain.v0_mean)
    write_rows(r.path("velocity_summary.csv"), ["quantity", "c1", "c2"], [
        ("seed", *c0), ("proposal_std", *step), ("mean", *chain.c_mean), ("std", *chain.c_std),
    ])
    err = float(np.max(np.abs(chain.c_mean - np.asarray(cfg["model.c"]))))
    r.lines.append(f"velocity seed {c0.tolist()}; acceptance c={chain.c_acceptance_rate:.3f} v={chain.v_acceptance_rate:.3f}")
    r.check(err <= cfg["check.c_tol"], f"posterior mean of c within {cfg['check.c_tol']} of {cfg['model.c']} (max err {err:.3g})")
    return chain


def _run_oracles(r: _Run):
    cfg = r.cfg
    rng = np.random.default_rng(cfg["oracle.seed"])
    rows, worst = [], 0.0
    for i in range(cfg["oracle.triples"]):
        k = rng.integers(-15, 16, size=2)
        dc = rng.uniform(-5, 5, size=2)
        n = int(rng.integers(1, 2000))
        g = geometric_sum_oracle(k, dc, cfg["time.dt"], n)
        rel = abs(g.modulus_sq - g.closed_form) / max(g.closed_form, 1.0)
        worst = max(worst, rel)
        rows.append((i, int(k[0]), int(k[1]), dc[0], dc[1], n, g.modulus_sq, g.closed_form, g.resonant))
    write_rows(r.path("geometric_sums.csv"),
               ["i", "k1", "k2", "dc1", "dc2", "n", "modulus_sq", "closed_form", "resonant"], rows)
    r.check(worst <= TOL.geometric_sum_rel, f"geometric sums: worst relative error {worst:.2e} <= {TOL.geometric_sum_rel}")

    rows = []
    eps = cfg["scenario.epsilon"]
    for j, (k, n) in enumerate((((1, 0), 100), ((1, 1), 100), ((2, 1), 50), ((0, 3), 200))):
        b = brownian_moment_oracle(k, eps, cfg["time.dt"], n, cfg["oracle.realizations"], seed=cfg["oracle.seed"] + j)
        rows.append((k[0], k[1], n, b.estimate, b.stderr, b.closed_form, b.bound))
        r.check(abs(b.zscore) <= 3.0, f"brownian moment k={k} n={n}: |z|={abs(b.zscore):.2f} <= 3")
        r.check(b.estimate <= b.bound, f"brownian moment k={k} n={n}: estimate below linear bound")
    write_rows(r.path("brownian_moments.csv"),
               ["k1", "k2", "n", "estimate", "stderr", "closed_form", "bound"], rows)


def _manifest(cfg: dict, out: Path, seeds: int, outputs: list[str]) -> dict:
    return {
        "experiment": cfg["experiment"],
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.items()},
        "seeds": {"curve_seeds": seeds, "noise_seed": cfg["obs.noise_seed"],
                  "path_seed": cfg["scenario.path_seed"], "mcmc_seed": cfg["mcmc.seed"],
                  "truth_seed": cfg["truth.seed"], "oracle_seed": cfg["oracle.seed"]},
        "code_version": __version__,
        "outputs": outputs,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


_OUTPUTS = {
    "smoother-limit": ["curve.csv", "state.csv", "mean_coefficients.csv", "mean.pgm", "truth.pgm"],
    "filter-limit": ["curve.csv", "state.csv", "mean_coefficients.csv", "mean.pgm", "truth.pgm"],
    "rate-fit": ["curve.csv", "state.csv", "mean_coefficients.csv", "mean.pgm", "truth.pgm"],
    "mcmc-ic": ["chain.csv", "v0_mean_coefficients.csv", "v0_mean.pgm", "truth.pgm"],
    "gibbs-velocity": ["chain.csv", "v0_mean_coefficients.csv", "v0_mean.pgm", "velocity_summary.csv"],
    "oracle-suite": ["geometric_sums.csv", "brownian_moments.csv"],
}


def run(cfg: dict, out, seeds: int | None = None) -> _Run:
    """Execute one experiment; returns the run record with check results."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = cfg["curve.seeds"] if seeds is None else seeds
    if seeds < 1:
        raise ConfigError("seeds must be positive")
    exp = cfg["experiment"]
    outputs = [str(out / f) for f in _OUTPUTS[exp]]
    (out / "manifest.json").write_text(json.dumps(_manifest(cfg, out, seeds, outputs), indent=2) + "\n")
    r = _Run(cfg, out, seeds)
    if exp == "smoother-limit":
        _run_curve(r, filt=False, squared_default=False)
    elif exp == "filter-limit":
        _run_curve(r, filt=True, squared_default=False)
    elif exp == "rate-fit":
        _run_curve(r, filt=True, squared_default=True)
    elif exp == "mcmc-ic":
        _run_mcmc_ic(r)
    elif exp == "gibbs-velocity":
        _run_gibbs(r)
    else:
        _run_oracles(r)
    return r


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="torusfilter", description="Run a filtering/smoothing experiment from a config file.")
    ap.add_argument("--config", required=True, help="flat key = value config file")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--seeds", type=int, default=None, help="number of noise/path seeds for error curves")
    ap.add_argument("--check", action="store_true", help="exit nonzero if an acceptance threshold is breached")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        r = run(cfg, args.out, args.seeds)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in r.lines:
        print(line)
    if r.failures and (args.check or cfg["experiment"] == "oracle-suite"):
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
