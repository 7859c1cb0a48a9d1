"""Scenario files: parsing, engine construction, probe dispatch and artifacts.

A scenario is an INI file::

    [scenario]
    name = translation_expdecay
    seed = 7

    [engine]
    kind = translation          ; translation | hhte | wave | blackscholes
    weight = expdecay
    rate = 1.0

    [probe dichotomy]
    kind = equivalences
    expect = consistent         ; compared with the probe's verdict
    expect_integral = 0.999999999:1.000000001   ; numeric range on a summary key

    [tolerances]
    membership = 1e-9

Probe sections run in file order. Each writes ``<name>.csv`` whose last line
is ``# summary,key=value,...``; ``report.txt`` copies those lines.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import criteria as cr
from . import probes as pr
from . import semigroups as sg
from .function_spaces import (
    MonomialCombo,
    SpaceParams,
    make_weight,
    tent,
)
from .shadowing import (
    NoFiniteGapError,
    construct_shadowing_point,
    random_spec,
    required_gap,
    verify_shadowing,
)

EXIT_OK, EXIT_EXPECTATION, EXIT_CONFIG = 0, 1, 2
DEFAULT_TOLERANCES = {"membership": 1e-9, "eigen_residual": 1e-3, "span": 1e-2}


class ConfigError(ValueError):
    def __init__(self, message, location=""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass
class ProbeConfig:
    name: str
    kind: str
    params: dict
    seed: int | None = None


@dataclass
class Scenario:
    name: str
    engine: dict
    probes: list
    output: str | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int | None = None
    source: str = "<scenario>"


# ---------------------------------------------------------------------------
# parsing


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    cp.optionxform = str
    return cp


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], source) from exc
    if not cp.has_section("scenario"):
        raise ConfigError("missing [scenario] section", source)
    if not cp.has_section("engine"):
        raise ConfigError("missing [engine] section", source)
    sc = dict(cp["scenario"])
    name = sc.get("name") or Path(source).stem
    seed = _int(sc["seed"], f"{source}:[scenario] seed") if "seed" in sc else None
    tolerances = dict(DEFAULT_TOLERANCES)
    if cp.has_section("tolerances"):
        for key, value in cp["tolerances"].items():
            tolerances[key] = _float(value, f"{source}:[tolerances] {key}")
    probes = []
    for section in cp.sections():
        if section in ("scenario", "engine", "tolerances"):
            continue
        if not section.startswith("probe "):
            raise ConfigError(f"unknown section [{section}]", source)
        params = dict(cp[section])
        loc = f"{source}:[{section}]"
        if "kind" not in params:
            raise ConfigError("probe needs a kind", loc)
        pseed = _int(params.pop("seed"), f"{loc} seed") if "seed" in params else None
        probes.append(ProbeConfig(section[6:].strip(), params.pop("kind"), params, pseed))
    return Scenario(name, dict(cp["engine"]), probes, sc.get("output"), tolerances, seed, source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    return parse_scenario(text, str(path))


def dumps_scenario(scenario: Scenario) -> str:
    cp = _parser()
    cp["scenario"] = {"name": scenario.name}
    if scenario.seed is not None:
        cp["scenario"]["seed"] = str(scenario.seed)
    if scenario.output:
        cp["scenario"]["output"] = scenario.output
    cp["engine"] = scenario.engine
    for probe in scenario.probes:
        sec = {"kind": probe.kind, **probe.params}
        if probe.seed is not None:
            sec["seed"] = str(probe.seed)
        cp[f"probe {probe.name}"] = sec
    cp["tolerances"] = {k: repr(v) for k, v in scenario.tolerances.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _float(text, loc) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {text!r}", loc) from None


def _int(text, loc) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"expected an integer, got {text!r}", loc) from None


# ---------------------------------------------------------------------------
# engines


ENGINE_KEYS = {
    "translation": {"weight", "rate", "level", "q", "p"},
    "hhte": {"alpha", "tau", "rho", "n_trunc"},
    "wave": {"alpha", "rho", "n_trunc"},
    "blackscholes": {"sigma", "r", "p", "s", "tau_y"},
}


def build_engine(engine: dict, source: str = "<scenario>"):
    loc = f"{source}:[engine]"
    kind = engine.get("kind", "").lower()
    allowed = ENGINE_KEYS.get(kind)
    if allowed is None:
        raise ConfigError(f"unknown engine kind {kind!r}", loc)
    unknown = sorted(set(engine) - allowed - {"kind"})
    if unknown:
        raise ConfigError(f"unknown engine key(s) {', '.join(unknown)}", loc)
    num = {k: _float(v, f"{loc} {k}") for k, v in engine.items()
           if k not in ("kind", "weight", "tau")}
    try:
        if kind == "translation":
            weight = engine.get("weight", "expdecay")
            params = {k: v for k, v in num.items() if k != "p"}
            return sg.Translation(make_weight(weight, **params), num.get("p", 1.0))
        if kind == "hhte":
            tau = _float(engine.get("tau", "1.0"), f"{loc} tau")
            return sg.SecondOrder(num.get("alpha", 1.0), tau, num.get("rho", 3.0),
                                  int(num.get("n_trunc", 60)))
        if kind == "wave":
            return sg.SecondOrder(num.get("alpha", 1.0), None, num.get("rho", 3.0),
                                  int(num.get("n_trunc", 60)))
        if kind == "blackscholes":
            space = SpaceParams(num.get("p", 1.0), num.get("s", 4.0), num.get("tau_y", 0.0))
            return sg.BlackScholes(num.get("sigma", 0.4), num.get("r", 0.05), space)
    except ValueError as exc:
        raise ConfigError(str(exc), loc) from exc
    raise ConfigError(f"unknown engine kind {kind!r}", loc)


# ---------------------------------------------------------------------------
# probe results


@dataclass
class ProbeResult:
    header: tuple
    rows: list
    summary: dict
    verdict: str
    extra: dict = field(default_factory=dict)  # file suffix -> (header, rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return repr(complex(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def summary_line(summary: dict) -> str:
    # commas separate fields, so free text swaps them for semicolons
    return ",".join(["# summary"] + [f"{k}={_cell(v).replace(',', ';')}"
                                     for k, v in summary.items()])


def dumps_csv(header, rows, summary=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(c) for c in row])
    if summary is not None:
        buf.write(summary_line(summary) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# probes


class Context:
    def __init__(self, handle, kind, params, seed, tolerances, loc):
        self.handle, self.engine_kind, self.params = handle, kind, params
        self.seed, self.tol, self.loc = seed, tolerances, loc
        self.used = {"expect"}

    def get(self, key, default, cast=float):
        self.used.add(key)
        if key not in self.params:
            return default
        return (_int if cast is int else _float)(self.params[key], f"{self.loc} {key}") \
            if cast in (int, float) else cast(self.params[key])

    def rng(self):
        if self.seed is None:
            raise ConfigError("randomized probe needs a seed", self.loc)
        return np.random.default_rng(self.seed)


def _probe_shadow(ctx: Context) -> ProbeResult:
    rng = ctx.rng()
    count = ctx.get("count", 20, int)
    n_max = ctx.get("n_max", 3, int)
    s_min, s_max = ctx.get("s_min", 2, int), ctx.get("s_max", 5, int)
    d_min, d_max = ctx.get("delta_min", 0.1), ctx.get("delta_max", 1.0)
    t_step = ctx.get("t_step", 0.01)
    v, p = ctx.handle.v, ctx.handle.p
    rows, passed, worst = [], 0, 0.0
    try:
        required_gap(d_min, n_max, v, p)
    except NoFiniteGapError as exc:
        return ProbeResult(("spec", "n", "s", "delta", "period", "max_error", "period_residual",
                            "class_ok", "passed"), [], {"specs": 0, "refusal": str(exc)}, "refused")
    for k in range(count):
        n = int(rng.integers(1, n_max + 1))
        s = int(rng.integers(s_min, s_max + 1))
        delta = float(rng.uniform(d_min, d_max))
        spec = random_spec(rng, n, s, delta, v, p)
        cert = construct_shadowing_point(spec, t_step)
        rep = verify_shadowing(cert, spec)
        err = max(rep.per_piece_max)
        worst = max(worst, err / delta)
        passed += rep.passed
        rows.append((k, n, s, delta, cert.P, err, rep.period_residual, rep.class_member, rep.passed))
    summary = {"specs": count, "passed": passed, "max_error_over_delta": worst}
    return ProbeResult(("spec", "n", "s", "delta", "period", "max_error", "period_residual",
                        "class_ok", "passed"), rows, summary,
                       "pass" if passed == count else "fail")


def _probe_mixing(ctx: Context) -> ProbeResult:
    h = ctx.get("h", 0.01)
    u = tent(h, height=ctx.get("center_height", 1.0))
    ru, rw = ctx.get("radius_u", 0.5), ctx.get("radius_w", 0.5)
    t_max, t_step = ctx.get("t_max", 50.0), ctx.get("t_step", 0.1)
    grid = np.round(np.arange(int(round(t_max / t_step)) + 1) * t_step, 12)
    rep = pr.return_set_scan(ctx.handle, u, ru, rw, grid)
    rows = []
    for t, a, b, w in zip(grid, rep.in_uw, rep.in_wu, rep.witnesses):
        vals = (w.x_to_u, w.tx_norm, w.w_norm, w.tw_to_u) if w else (None,) * 4
        rows.append((t, a, b) + vals)
    summary = {"first_all_pass": rep.first_all_pass, "status": rep.status}
    if rep.status == "ok" and math.isfinite(min(ru, rw)):
        summary["threshold"] = required_gap(min(ru, rw) / 2, 1, ctx.handle.v, ctx.handle.p).M
    verdict = ("unavailable" if rep.status != "ok"
               else "bounded" if rep.first_all_pass is not None else "unbounded")
    return ProbeResult(("t", "in_uw", "in_wu", "x_to_u", "tx_norm", "w_norm", "tw_to_u"),
                       rows, summary, verdict)


def _indicator(ctx: Context, horizon):
    kind = ctx.get("set", "dyadic", str)
    if kind == "dyadic":
        return pr.dyadic_union(horizon)
    if kind == "full":
        return [(0.0, math.inf)]
    if kind == "empty":
        return []
    if kind == "intervals":
        spec = ctx.get("intervals", "", str)
        out = []
        for part in filter(None, (s.strip() for s in spec.split(","))):
            a, _, b = part.partition(":")
            out.append((_float(a, ctx.loc), _float(b, ctx.loc)))
        return out
    raise ConfigError(f"unknown set {kind!r}", ctx.loc)


def _probe_densities(ctx: Context) -> ProbeResult:
    horizon, step = ctx.get("horizon", 4.0 ** 10), ctx.get("step", 1.0)
    ind = _indicator(ctx, horizon)
    up = pr.density_estimate(ind, horizon, step, "upper")
    summary = {"upper": up.upper, "lower": up.lower, "low_confidence": up.low_confidence}
    return ProbeResult(("t", "ratio"), [tuple(r) for r in up.ratios], summary, "ok")


def _probe_irregular(ctx: Context) -> ProbeResult:
    eps, horizon = ctx.get("epsilon", 0.1), ctx.get("horizon", 1e4)
    growth, h = ctx.get("growth", 19.0), ctx.get("h", 0.05)
    stride = ctx.get("stride", 20, int)
    threshold = ctx.get("density_threshold", 0.9)
    try:
        iv = pr.irregular_vector(ctx.handle.v, eps, horizon, ctx.handle.p, h, growth)
    except ValueError as exc:
        return ProbeResult(("t", "value", "event"), [], {"refusal": str(exc)}, "refused")
    event = np.where(iv.norms >= 1 / eps, "big", np.where(iv.norms < eps, "small", ""))
    rows = [(t, n, e) for t, n, e in zip(iv.times[::stride], iv.norms[::stride], event[::stride])]
    dens = [(t, a, b) for (t, a), (_, b) in zip(iv.big.ratios, iv.small.ratios)]
    summary = {"height": iv.height, "big_upper": iv.big.upper, "small_upper": iv.small.upper}
    ok = iv.big.upper >= threshold and iv.small.upper >= threshold
    return ProbeResult(("t", "value", "event"), rows, summary,
                       "irregular" if ok else "not irregular",
                       {"densities": (("t", "ratio_big", "ratio_small"), dens)})


def _probe_equivalences(ctx: Context) -> ProbeResult:
    ctx.rng()
    cfg = cr.EquivalenceConfig(seed=ctx.seed,
                               suite_size=ctx.get("suite_size", 10, int),
                               delta=ctx.get("delta", 0.3),
                               tol=ctx.tol["membership"])
    rep = cr.translation_equivalences(ctx.handle.v, ctx.handle.p, config=cfg)
    predicted = {"finite": True, "divergent": False}.get(rep.integral_verdict)
    rows = [(item, obs, predicted) for item, obs in rep.items().items()]
    rows += [(f"fh target {k}", d, None) for k, d in enumerate(rep.fh_evidence)]
    rows += [(f"periodic error {k}", e, None) for k, e in enumerate(rep.periodic_errors)]
    summary = {"integral": rep.integral_value, "integral_verdict": rep.integral_verdict,
               "admissibility": rep.admissibility, "shadowing": rep.shadowing_detail,
               "overall": rep.overall}
    return ProbeResult(("item", "observed", "predicted"), rows, summary, rep.overall)


def _probe_periodic(ctx: Context) -> ProbeResult:
    delta, theta = ctx.get("delta", 0.3), ctx.get("theta", 1.0)
    h = ctx.handle
    if isinstance(h, sg.Translation):
        target = tent()
    elif isinstance(h, sg.BlackScholes):
        betas = [b for b in h.exponents_for(1j * theta) if -h.space.tau_y < b.real < h.space.s]
        if not betas:
            return ProbeResult(("period", "error", "return_residual"), [],
                               {"refusal": "no exponent inside the space"}, "refused")
        target = MonomialCombo.monomial(betas[0])
    else:
        target = cr.hhte_field(h)(theta)
    try:
        res = pr.periodic_approximant(h, target, delta, theta=theta)
    except (NoFiniteGapError, pr.NoEigenDictionaryError) as exc:
        return ProbeResult(("period", "error", "return_residual"), [],
                           {"refusal": str(exc)}, "refused")
    summary = {"period": res.period, "error": res.error, "return_residual": res.return_residual}
    return ProbeResult(("period", "error", "return_residual"),
                       [(res.period, res.error, res.return_residual)], summary, "ok")


def _probe_hits(ctx: Context) -> ProbeResult:
    delta = ctx.get("delta", 0.3)
    radii = [_float(r, ctx.loc) for r in ctx.get("radii", "0.1,0.3", str).split(",")]
    periods, step = ctx.get("periods", 10, int), ctx.get("step", 0.05)
    try:
        q = pr.periodic_approximant(ctx.handle, tent(), delta).q
    except NoFiniteGapError as exc:
        return ProbeResult(("t", "target", "value", "event"), [], {"refusal": str(exc)}, "refused")
    scan = pr.fh_hit_density(ctx.handle, q, [(q, r) for r in radii], periods * q.period,
                             step, ctx.tol["membership"])
    rows = [(t, k, d, hit) for k in range(len(radii))
            for t, d, hit in zip(scan.times, scan.distances[k], scan.hits[k])]
    summary = {"period": q.period}
    summary.update({f"lower_{k}": d.lower for k, d in enumerate(scan.densities)})
    verdict = "positive" if all(d.lower > 0 for d in scan.densities) else "not positive"
    return ProbeResult(("t", "target", "value", "event"), rows, summary, verdict)


_FIELDS = {"translation_eigenfield": ("translation",), "hhte_eigenfield": ("hhte", "wave"),
           "blackscholes_eigenfield": ("blackscholes",)}


def _probe_eigenfield(ctx: Context) -> ProbeResult:
    h = ctx.handle
    t_min, t_max = ctx.get("t_min", -1.0), ctx.get("t_max", 1.0)
    count = ctx.get("count", 21, int)
    ts = np.linspace(t_min, t_max, count)
    if isinstance(h, sg.Translation):
        sampler = cr.translation_field(ctx.get("h", 1e-4), ctx.get("x_max", 40.0))
        dictionary = {"tent": tent()}
    elif isinstance(h, sg.SecondOrder):
        sampler = cr.hhte_field(h)
        dictionary = {"eigen_mid": sampler(0.5 * (t_min + t_max) + 0.123)}
    else:
        sampler = cr.blackscholes_field(h)
        dictionary = {"x^2": MonomialCombo.monomial(2.0)}
    rep = cr.eigenfield_check(h, sampler, ts, dictionary=dictionary,
                              tol=ctx.tol["eigen_residual"], span_tol=ctx.tol["span"])
    rows = [(t, r) for t, r in zip(rep.t_samples, rep.residuals)]
    rows += [(t, None) for t, _ in rep.rejected]
    summary = {"residual_sup": rep.residual_sup, "boundedness": rep.boundedness,
               "rejected": len(rep.rejected)}
    summary.update({f"span_{k}": v[-1] if v else None for k, v in rep.span_surrogate.items()})
    verdict = "degenerate" if rep.degenerate else (
        "satisfied" if rep.satisfied else "not satisfied")
    return ProbeResult(("t", "residual"), rows, summary, verdict)


LAW_LIMITS = {"translation": 0.0, "blackscholes": 1e-12, "hhte": 1e-8, "wave": 1e-8}


def _probe_laws(ctx: Context) -> ProbeResult:
    rng = ctx.rng()
    count = ctx.get("count", 20, int)
    h = ctx.handle
    rows = []
    for k in range(count):
        f = sg.random_state(h, rng)
        if isinstance(h, sg.Translation):
            t1, t2 = 0.01 * int(rng.integers(0, 300)), 0.01 * int(rng.integers(0, 300))
        else:
            t1, t2 = float(rng.uniform(0, 0.5)), float(rng.uniform(0, 0.5))
        rep = sg.check_semigroup_laws(h, f, t1, t2)
        rows.append((k, t1, t2) + tuple(rep))
    ident = max((r[3] for r in rows), default=0.0)
    comp = max((r[4] for r in rows), default=0.0)
    limit = LAW_LIMITS[sg.engine_name(h)]
    summary = {"states": count, "identity_max": ident, "composition_max": comp,
               "composition_limit": limit}
    return ProbeResult(("state", "t1", "t2", "identity", "composition", "continuity"), rows,
                       summary, "pass" if ident == 0 and comp <= limit else "fail")


def _probe_gate(ctx: Context) -> ProbeResult:
    h = ctx.handle
    if isinstance(h, sg.SecondOrder):
        value = cr.hhte_parameter_gate(h.alpha, h.tau, h.rho)
    else:
        value = cr.blackscholes_parameter_gate(h.space.s, h.space.tau_y, h.sigma)
    return ProbeResult(("gate", "value"), [(ctx.engine_kind, value)], {"gate": value},
                       "true" if value else "false")


ALL_ENGINES = ("translation", "hhte", "wave", "blackscholes")
PROBES = {
    # kind: (runner, engines, randomized)
    "shadow": (_probe_shadow, ("translation",), True),
    "mixing": (_probe_mixing, ("translation",), False),
    "densities": (_probe_densities, ALL_ENGINES, False),
    "irregular": (_probe_irregular, ("translation",), False),
    "equivalences": (_probe_equivalences, ("translation",), True),
    "periodic": (_probe_periodic, ALL_ENGINES, False),
    "hits": (_probe_hits, ("translation",), False),
    "eigenfield": (_probe_eigenfield, ALL_ENGINES, False),
    "laws": (_probe_laws, ALL_ENGINES, True),
    "gate": (_probe_gate, ("hhte", "blackscholes"), False),
}
PROBES.update({k: (_probe_eigenfield, engines, False) for k, engines in _FIELDS.items()})


# ---------------------------------------------------------------------------
# expectations


def check_expectations(params: dict, result: ProbeResult, loc: str) -> list:
    """Failed expectations; ``expect`` matches the verdict, ``expect_KEY = lo:hi``
    bounds a summary number (either side may be empty)."""
    failed = []
    for key, want in params.items():
        if key == "expect":
            if result.verdict != want:
                failed.append(f"verdict {result.verdict!r} != expected {want!r}")
        elif key.startswith("expect_"):
            name = key[7:]
            if name not in result.summary:
                raise ConfigError(f"expectation on unknown summary key {name!r}", f"{loc} {key}")
            lo, sep, hi = want.partition(":")
            if not sep:
                raise ConfigError("range expectations look like lo:hi", f"{loc} {key}")
            value = result.summary[name]
            ok = value is not None and not (lo and value < _float(lo, loc)) \
                and not (hi and value > _float(hi, loc))
            if not ok:
                failed.append(f"{name} = {_cell(value)} outside [{lo}, {hi}]")
    return failed


# ---------------------------------------------------------------------------
# runner


def resolve(scenario: Scenario, seed_override: int | None = None):
    """Engine and validated probe list; raises ConfigError before any work."""
    handle = build_engine(scenario.engine, scenario.source)
    kind = sg.engine_name(handle)
    plan = []
    for probe in scenario.probes:
        loc = f"{scenario.source}:[probe {probe.name}]"
        if probe.kind not in PROBES:
            raise ConfigError(f"unknown probe kind {probe.kind!r}", loc)
        runner, engines, randomized = PROBES[probe.kind]
        if kind not in engines:
            raise ConfigError(f"probe {probe.kind!r} does not run on engine {kind!r}", loc)
        seed = seed_override if seed_override is not None else (
            probe.seed if probe.seed is not None else scenario.seed)
        if randomized and seed is None:
            raise ConfigError("randomized probe needs a seed", loc)
        plan.append((probe, runner, seed, loc))
    return handle, kind, plan


def run_scenario(scenario: Scenario, out_root=None, seed: int | None = None,
                 tol: float | None = None, echo=None) -> int:
    """Run every probe, write CSVs and ``report.txt``; return the exit code."""
    tolerances = dict(scenario.tolerances)
    if tol is not None:
        tolerances["membership"] = tol
    handle, kind, plan = resolve(scenario, seed)
    root = Path(out_root or scenario.output or os.environ.get("SGSP_OUT", "sgsp_out"))
    out = root / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"scenario: {scenario.name}", f"engine: {kind}"]
    failures = 0
    for probe, runner, pseed, loc in plan:
        ctx = Context(handle, kind, probe.params, pseed, tolerances, loc)
        result = runner(ctx)
        unknown = [k for k in probe.params
                   if k not in ctx.used and not k.startswith("expect_")]
        if unknown:
            raise ConfigError(f"unknown parameter(s) {', '.join(sorted(unknown))}", loc)
        (out / f"{probe.name}.csv").write_text(
            dumps_csv(result.header, result.rows, result.summary))
        for suffix, (header, rows) in result.extra.items():
            (out / f"{probe.name}_{suffix}.csv").write_text(dumps_csv(header, rows))
        failed = check_expectations(probe.params, result, loc)
        failures += bool(failed)
        status = "failed" if failed else ("met" if any(
            k == "expect" or k.startswith("expect_") for k in probe.params) else "none")
        lines.append(f"[probe {probe.name}] kind={probe.kind} verdict={result.verdict} "
                     f"expectation={status}")
        lines.append(summary_line(result.summary))
        lines.extend(f"  expectation failed: {msg}" for msg in failed)
        if echo:
            echo(f"{probe.name}: {result.verdict}" + (" (expectation failed)" if failed else ""))
    lines.append(f"result: {'expectation failed' if failures else 'ok'}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    return EXIT_EXPECTATION if failures else EXIT_OK


def bundled_scenarios() -> dict:
    here = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(here.glob("*.ini"))}
