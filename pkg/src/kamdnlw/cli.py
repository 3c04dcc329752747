"""Command-line driver: every experiment as a subcommand.

JSON config in, CSV/JSON artifacts plus a provenance sidecar out.  Exit
status 0 on success, 2 on configuration/validation errors, 3 on numerical
failures (Newton divergence and friends).  Artifacts are rendered in memory
and written only after the computation succeeded, so a failing run leaves
no partial outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .algebra import (
    NormContext,
    SiteSet,
    Truncation,
    apply_involution,
    evaluate,
    lie_bracket,
    majorant_norm,
    momentum,
    momentum_field,
    project_momentum,
    symmetrize,
    VectorField,
)
from .model import (
    FieldState,
    GTerm,
    ModelError,
    ModelParams,
    NonlinearitySpec,
    lambda_j,
    linear_solution,
    state_to_csv,
    x_grid,
)
from .normal_form import (
    MelnikovReport,
    NormalFormError,
    birkhoff_third_order,
    melnikov_density,
    solve_homological,
)
from .qp import NewtonDivergenceError, lyapunov_exponent, newton_qp, continuation
from .sampling import (
    random_even_point,
    random_field,
    random_monomial,
    random_reversible_field,
)
from .simulate import (
    ConfigError,
    blow_up_certificate,
    dH_dt_identity,
    dM_dt_identity,
    integrate,
    mean_average_diagnostic,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header, rows, provenance: str) -> str:
    lines = [f"# {provenance}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


_REQUIRED = object()


class _Config:
    """Dict wrapper with path-aware error messages."""

    def __init__(self, data: dict, path: str = "config"):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self.data = data
        self.path = path

    def get(self, key, kind=None, default=_REQUIRED):
        if key not in self.data:
            if default is not _REQUIRED:
                return default
            raise ConfigError(f"{self.path}.{key}: missing required key")
        val = self.data[key]
        if kind is not None and not isinstance(val, kind):
            raise ConfigError(f"{self.path}.{key}: expected {kind}")
        return val

    def sub(self, key, default=None):
        if key not in self.data:
            if default is not None:
                return _Config(default, f"{self.path}.{key}")
            raise ConfigError(f"{self.path}.{key}: missing required section")
        return _Config(self.data[key], f"{self.path}.{key}")


def _model_from(cfg: _Config) -> ModelParams:
    mc = cfg.sub("model")
    sites = SiteSet(tuple(mc.get("plus_sites", list)))
    xi_raw = mc.get("xi", dict)
    try:
        xi = {int(k): float(v) for k, v in xi_raw.items()}
    except (TypeError, ValueError) as err:
        raise ConfigError(f"model.xi: {err}") from None
    trunc = Truncation(int(mc.get("j_max", int)), int(mc.get("k_max", (int,), 12)),
                       int(mc.get("d_max", (int,), 3)))
    try:
        return ModelParams(m=float(mc.get("m", (int, float))), sites=sites, xi=xi,
                           grid_N=int(mc.get("grid_N", int)), truncation=trunc,
                           allow_zero_mass=bool(mc.get("allow_zero_mass", (bool,), False)))
    except ModelError as err:
        raise ConfigError(f"model: {err}") from None


def _g_from(cfg: _Config, key="nonlinearity") -> NonlinearitySpec:
    if key not in cfg.data:
        return NonlinearitySpec()
    gc = cfg.sub(key)
    hot = []
    for row in gc.get("hot", list, []):
        try:
            coeff, q, trig, dy, dyx, dv = row
            hot.append(GTerm(float(coeff), int(q), str(trig), int(dy), int(dyx), int(dv)))
        except (TypeError, ValueError, ModelError) as err:
            raise ConfigError(f"nonlinearity.hot: bad term {row!r}: {err}") from None
    return NonlinearitySpec(leading=bool(gc.get("leading", (bool,), True)), hot=tuple(hot))


def _initial_state(cfg: _Config, N: int) -> FieldState:
    ic = cfg.sub("initial")
    kind = ic.get("type", str)
    x = x_grid(N)
    if kind == "modes":
        y = np.zeros(N)
        v = np.zeros(N)
        for j, amp in ic.get("y", list, []):
            y += float(amp) * np.cos(int(j) * x)
        for j, amp in ic.get("v", list, []):
            v += float(amp) * np.cos(int(j) * x)
        return FieldState(y, v)
    if kind == "constant_velocity":
        val = float(ic.get("value", (int, float)))
        pert = float(ic.get("perturbation", (int, float), 0.0))
        return FieldState(np.zeros(N), val + pert * np.cos(x))
    raise ConfigError(f"initial.type: unknown kind {kind!r}")


def _trajectory_rows(traj):
    d = traj.diagnostics
    rows = []
    for i, t in enumerate(traj.times):
        flag = 1 if (traj.blew_up and traj.blow_up_time is not None
                     and t >= traj.blow_up_time) else 0
        rows.append((t, d["energy"][i], d["M"][i], d["H"][i], d["mean"][i],
                     d["meanvel"][i], flag))
    return rows


# ---------------------------------------------------------------------------
# subcommand implementations: each returns {filename: text}
# ---------------------------------------------------------------------------

def _cmd_algebra_check(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    sites = SiteSet(tuple(cfg.get("plus_sites", list, [1, 3])))
    trunc = Truncation(int(cfg.get("j_max", int, 16)), int(cfg.get("k_max", int, 8)),
                       int(cfg.get("d_max", int, 3)))
    n_mono = int(cfg.get("n_monomials", int, 500))
    rng = np.random.default_rng(seed)
    rows = []

    XM = momentum_field(sites, trunc)
    worst = 0.0
    for _ in range(n_mono):
        t = random_monomial(rng, sites, trunc)
        X = VectorField(sites, trunc, [t])
        pi = momentum(t, sites)
        worst = max(worst, lie_bracket(X, XM).max_coeff_delta(X * (1j * pi)))
    rows.append(("adjoint_action_eigenvalue", n_mono, worst, 1e-12, worst <= 1e-12))

    # bracket identities need headroom: double brackets of degree-2 terms reach
    # degree 4 and stacked Fourier orders, so test in a widened truncation
    wide = Truncation(trunc.j_max, 3 * trunc.k_max, max(6, 3 * trunc.d_max))
    worst_a = worst_j = 0.0
    for _ in range(20):
        A = random_field(rng, sites, wide, 8, max_k=2).filter(lambda t: t.degree <= 2)
        B = random_field(rng, sites, wide, 8, max_k=2).filter(lambda t: t.degree <= 2)
        C = random_field(rng, sites, wide, 8, max_k=2).filter(lambda t: t.degree <= 2)
        worst_a = max(worst_a, lie_bracket(A, B).max_coeff_delta(-lie_bracket(B, A)))
        inner = [lie_bracket(B, C), lie_bracket(C, A), lie_bracket(A, B)]
        jac = lie_bracket(A, inner[0]) + lie_bracket(B, inner[1]) + lie_bracket(C, inner[2])
        assert all(f.discarded_mass == 0.0 for f in inner)
        if len(jac):
            worst_j = max(worst_j, max(abs(t.coeff) for t in jac))
    rows.append(("bracket_antisymmetry", 20, worst_a, 1e-10, worst_a <= 1e-10))
    rows.append(("jacobi_identity", 20, worst_j, 1e-10, worst_j <= 1e-10))

    ctx0 = NormContext(s=0.4, r=0.6, a_weight=0.0, a_space=0.05, p=1.0)
    X = random_field(rng, sites, trunc, 30)
    worst_pen = -math.inf
    viol = 0
    n_pen = int(cfg.get("n_penalization", int, 100))
    for _ in range(n_pen):
        a = rng.uniform(0.0, 1.5)
        a2 = rng.uniform(0.0, a)
        K = int(rng.integers(0, 12))
        lhs = majorant_norm(project_momentum(X, K, "high"), ctx0.with_a_weight(a2))
        rhs = math.exp(-K * (a - a2)) * majorant_norm(X, ctx0.with_a_weight(a))
        excess = lhs - rhs * (1 + 1e-12)
        worst_pen = max(worst_pen, excess)
        viol += excess > 0
    rows.append(("penalization_inequality", n_pen, max(worst_pen, 0.0), 0.0, viol == 0))

    worst_e = 0.0
    n_fields = int(cfg.get("n_fields", int, 20))
    n_pts = int(cfg.get("n_points_E", int, 200))
    per = max(1, n_pts // n_fields)
    for _ in range(n_fields):
        Xr = random_reversible_field(rng, sites, trunc, 12)
        SX = symmetrize(Xr)
        for _ in range(per):
            u = random_even_point(rng, sites, trunc)
            worst_e = max(worst_e, evaluate(Xr, u).max_abs_delta(evaluate(SX, u)))
    rows.append(("symmetrize_E_restriction", n_fields * per, worst_e, 1e-12, worst_e <= 1e-12))

    worst_i = 0.0
    for _ in range(20):
        Xr = random_field(rng, sites, trunc, 15)
        worst_i = max(worst_i, apply_involution(apply_involution(Xr)).max_coeff_delta(Xr))
    rows.append(("involution_squared_identity", 20, worst_i, 0.0, worst_i == 0.0))

    return {"algebra_check.csv": _csv(
        ("check", "trials", "max_error", "tolerance", "passed"), rows, prov)}


def _cmd_birkhoff(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    nf = birkhoff_third_order(params, float(cfg.get("divisor_floor", (int, float), 1e-8)))
    fit = nf.details["asymptotic_fit"]
    rows = [(j, om, res) for (j, om, res) in fit.rows]
    out = {
        "normal_form.json": nf.to_json(),
        "asymptotics.csv": _csv(("j", "Omega", "residual"), rows,
                                prov + f" m={params.m} a_const={fit.a_const!r}"),
    }
    return out


def _cmd_asymptotics(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    window = tuple(cfg.get("window", list, [8, min(32, params.truncation.j_max)]))
    from .normal_form import asymptotic_fit

    if bool(cfg.get("at_zero", bool, False)):
        Om = {j: lambda_j(params.m, j) for j in range(0, params.truncation.j_max + 1)
              if j not in params.sites}
        fit = asymptotic_fit(Om, params.m, window)
    else:
        nf = birkhoff_third_order(params)
        fit = asymptotic_fit({j: v for j, v in nf.Omega.items() if j > 0},
                             params.m, window)
    rows = [(j, om, res) for (j, om, res) in fit.rows]
    return {"asymptotics.csv": _csv(("j", "Omega", "residual"), rows,
                                    prov + f" m={params.m} a_const={fit.a_const!r}")}


def _cmd_homological(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    sites = SiteSet(tuple(cfg.get("plus_sites", list, [1, 3])))
    trunc = Truncation(int(cfg.get("j_max", int, 10)), int(cfg.get("k_max", int, 8)),
                       int(cfg.get("d_max", int, 3)))
    m = float(cfg.get("m", (int, float), 1.0))
    n_trials = int(cfg.get("n_trials", int, 50))
    floor = float(cfg.get("divisor_floor", (int, float), 1e-8))
    rng = np.random.default_rng(seed)

    omega = {j: lambda_j(m, j) for j in sites.ordering}
    Omega = {j: lambda_j(m, j) for j in range(-trunc.j_max, trunc.j_max + 1)
             if j not in sites}
    from .normal_form import NormalForm

    nfield = NormalForm(sites, m, omega, Omega, np.zeros((len(sites.plus_sites),) * 2),
                        0.0, trunc.j_max).to_vector_field(trunc)
    ctx = NormContext(s=0.3, r=0.5, a_weight=0.2, a_space=0.02, p=1.0)
    rows = []
    for trial in range(n_trials):
        P = symmetrize(random_reversible_field(rng, sites, trunc, 16,
                                               real_coefficients=True))
        hom = solve_homological(nfield, P, floor)
        resid = lie_bracket(nfield, hom.F) + P - hom.resonant - hom.skipped_field
        rel = majorant_norm(resid, ctx) / max(majorant_norm(P, ctx), 1e-300)
        max_imag = 0.0
        for t in hom.resonant:
            if t.comp[0] == "z" and t.k_order == 0 and t.alpha == ((t.comp[1], 1),):
                max_imag = max(max_imag, abs((1j * t.coeff).imag))
        rows.append((trial, rel, len(hom.resonant), len(hom.skipped), max_imag,
                     rel <= 1e-10 and max_imag <= 1e-12))
    return {"homological.csv": _csv(
        ("trial", "residual_rel", "n_resonant", "n_skipped", "max_imag_correction", "passed"),
        rows, prov)}


def _cmd_melnikov(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    nf = birkhoff_third_order(params)
    scales = [float(s) for s in cfg.get("scales", list, [1e-2, 1e-3, 1e-4])]
    samples = int(cfg.get("samples", int, 1000))
    gamma = float(cfg.get("gamma", (int, float), 1e-2))
    tau = cfg.get("tau", (int, float), None)
    k_max = int(cfg.get("k_max_scan", int, 16))
    j_max = int(cfg.get("scan_j_max", int, min(24, params.truncation.j_max)))

    if threads > 1 and samples >= 2 * threads:
        chunk = samples // threads
        sizes = [chunk] * (threads - 1) + [samples - chunk * (threads - 1)]
        offsets = [20 + sum(sizes[:i]) for i in range(len(sizes))]

        def run(args):
            n, off = args
            return melnikov_density(nf, scales, n, gamma, tau, k_max, j_max,
                                    halton_skip=off)

        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, zip(sizes, offsets)))
        reports = []
        for si, scale in enumerate(scales):
            good = sum(p[si].density * p[si].n_samples for p in parts)
            viols = [v for p in parts for v in p[si].violations][:20]
            rep = MelnikovReport(gamma, parts[0][si].tau,
                                 sum(p[si].checked for p in parts), viols,
                                 good / samples, samples, scale)
            reports.append(rep)
    else:
        reports = melnikov_density(nf, scales, samples, gamma, tau, k_max, j_max)

    rows = [(r.scale, r.density) for r in reports]
    info = {
        "gamma": gamma,
        "tau": reports[0].tau,
        "k_max": k_max,
        "j_max": j_max,
        "samples": samples,
        "densities": {str(r.scale): r.density for r in reports},
        "example_violations": [list(map(str, v)) for r in reports for v in r.violations][:20],
        "provenance": prov,
    }
    return {"density.csv": _csv(("scale", "density"), rows, prov),
            "melnikov.json": json.dumps(info, indent=1)}


def _cmd_qp_solve(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    g = _g_from(cfg)
    sc = cfg.sub("solver", {})
    L = int(sc.get("L", int, 6))
    tol = float(sc.get("tol", (int, float), 1e-12))
    sol = newton_qp(linear_solution(params, L=L), params, g, tol=tol,
                    max_iter=int(sc.get("max_iter", int, 30)))
    data = json.loads(sol.to_json())
    data["provenance"] = prov
    return {"solution.json": json.dumps(data, indent=1)}


def _cmd_continuation(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    g = _g_from(cfg)
    sc = cfg.sub("solver", {})
    L = int(sc.get("L", int, 6))
    tol = float(sc.get("tol", (int, float), 1e-12))
    xi_path = [{int(k): float(v) for k, v in step.items()}
               for step in cfg.get("xi_path", list)]
    res = continuation(params, g, xi_path, L=L, tol=tol)
    if not res.path:
        raise NewtonDivergenceError("continuation produced no accepted points",
                                    [r for _, r in res.failures])
    ps = params.sites.plus_sites
    header = ("xi",) + tuple(f"omega_{p}" for p in ps) + ("residual", "iters")
    rows = []
    for xi, sol, resid, iters in res.path:
        rows.append((max(xi.values()),) + tuple(sol.omega_inf) + (resid, iters))
    out = {"continuation.csv": _csv(header, rows, prov)}
    if res.failures:
        out["continuation_failures.json"] = json.dumps(
            [{"xi": {str(k): v for k, v in xi.items()}, "reason": r}
             for xi, r in res.failures], indent=1)
    return out


def _cmd_simulate(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    N = int(cfg.get("grid_N", int, 128))
    state0 = _initial_state(cfg, N)
    g = _g_from(cfg)
    snapshot = bool(cfg.get("final_state", bool, False))
    traj = integrate(state0, g, float(cfg.get("m", (int, float), 1.0)),
                     T=float(cfg.get("T", (int, float))),
                     dt=float(cfg.get("dt", (int, float))),
                     sample_every=int(cfg.get("sample_every", int, 1)),
                     store_states=snapshot)
    out = {"trajectory.csv": _csv(("t", "energy", "M", "H", "mean", "meanvel", "flag"),
                                  _trajectory_rows(traj), prov)}
    if snapshot and traj.states:
        out["final_state.csv"] = f"# {prov}\n" + state_to_csv(traj.states[-1])
    return out


def _cmd_lyapunov(cfg: _Config, seed: int, threads: int, prov: str) -> dict:
    params = _model_from(cfg)
    g = _g_from(cfg)
    sc = cfg.sub("solver", {})
    sol = newton_qp(linear_solution(params, L=int(sc.get("L", int, 6))), params, g,
                    tol=float(sc.get("tol", (int, float), 1e-12)))
    est = lyapunov_exponent(sol, params, g, T=float(cfg.get("T", (int, float), 1e4)),
                            grid_N=int(cfg.get("lyap_grid_N", int, 64)),
                            seed=seed, base=str(cfg.get("base", str, "torus")))
    rows = [(t, c, 5.0 * math.log(max(t, math.e)) / t) for t, c in est.series]
    info = {"chi": est.chi, "T": est.T, "bound_constant": est.bound_constant,
            "error_bar": est.error_bar, "provenance": prov}
    return {"lyapunov.csv": _csv(("T", "chi", "bound"), rows, prov),
            "lyapunov.json": json.dumps(info, indent=1)}


def _cmd_nonexistence(cfg: _Config, seed: int, threads: int, prov: str, mode: str) -> dict:
    if mode == "average":
        params = _model_from(cfg)
        sol = linear_solution(params, L=int(cfg.get("L", int, 4)))
        rep = mean_average_diagnostic(sol, int(cfg.get("p", int, 2)),
                                      int(cfg.get("q", int, 2)))
        return {"average.json": json.dumps({
            "avg_yx_p": rep.avg_yx_p, "avg_v_q": rep.avg_v_q, "p": rep.p, "q": rep.q,
            "verdict": rep.verdict(), "provenance": prov}, indent=1)}

    N = int(cfg.get("grid_N", int, 64))
    T = float(cfg.get("T", (int, float), 10.0))
    dt = float(cfg.get("dt", (int, float), 5e-4))
    p = int(cfg.get("p", int, 3))
    state0 = _initial_state(cfg, N)

    if mode == "blowup":
        g = NonlinearitySpec(leading=False, hot=(GTerm(1.0, 0, "cos", 0, 0, 2),))
        traj = integrate(state0, g, 0.0, T=T, dt=dt, sample_every=1, store_states=False)
        rep = blow_up_certificate(traj)
        info = {"conclusive": rep.conclusive, "bound_holds": rep.bound_holds,
                "cauchy_schwarz_holds": rep.cauchy_schwarz_holds, "w0": rep.w0,
                "predicted_blowup_time": rep.predicted_blowup_time,
                "flagged": rep.flagged, "flag_time": rep.flag_time,
                "max_time_deficit": rep.max_time_deficit, "provenance": prov}
        return {"trajectory.csv": _csv(("t", "energy", "M", "H", "mean", "meanvel", "flag"),
                                       _trajectory_rows(traj), prov),
                "blowup.json": json.dumps(info, indent=1)}

    if mode == "M":
        g = NonlinearitySpec(leading=False, hot=(GTerm(1.0, 0, "cos", 0, p, 0),))
    elif mode == "H":
        g = NonlinearitySpec(leading=False, hot=(GTerm(1.0, 0, "cos", 0, 0, p),))
    else:
        raise ConfigError(f"unknown nonexistence mode {mode!r}")
    traj = integrate(state0, g, 0.0, T=T, dt=dt, sample_every=1, store_states=True)
    rep = dM_dt_identity(traj, p) if mode == "M" else dH_dt_identity(traj, p)
    info = {"mode": mode, "p": p, "max_identity_dev": rep.max_identity_dev,
            "monotone": rep.monotone, "tolerance": rep.tolerance,
            "passed": rep.passed, "provenance": prov}
    sample = max(1, traj.times.size // 2000)
    thin = [(traj.times[i], traj.diagnostics["energy"][i], rep.functional[i],
             traj.diagnostics["H"][i] if mode == "M" else rep.functional[i],
             traj.diagnostics["mean"][i], traj.diagnostics["meanvel"][i], 0)
            for i in range(0, traj.times.size, sample)]
    return {"trajectory.csv": _csv(("t", "energy", "M", "H", "mean", "meanvel", "flag"),
                                   thin, prov),
            "identity.json": json.dumps(info, indent=1)}


_COMMANDS = {
    "algebra-check": _cmd_algebra_check,
    "birkhoff": _cmd_birkhoff,
    "asymptotics": _cmd_asymptotics,
    "homological": _cmd_homological,
    "melnikov-scan": _cmd_melnikov,
    "qp-solve": _cmd_qp_solve,
    "continuation": _cmd_continuation,
    "simulate": _cmd_simulate,
    "lyapunov-exponent": _cmd_lyapunov,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kamdnlw",
        description="Truncated reversible-KAM experiments for derivative wave equations")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(_COMMANDS) + ["nonexistence"]:
        p = sub.add_parser(name)
        if name == "nonexistence":
            p.add_argument("mode", choices=["M", "H", "blowup", "average"])
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = fh.read()
        data = json.loads(raw)
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as err:
        print(f"config error: malformed JSON: {err}", file=sys.stderr)
        return EXIT_CONFIG

    cfg = _Config(data)
    try:
        seed = args.seed if args.seed is not None else int(cfg.get("seed", int, 0))
        env_threads = os.environ.get("KAMDNLW_THREADS")
        threads = (args.threads if args.threads is not None
                   else int(env_threads) if env_threads
                   else int(cfg.get("threads", int, 1)))
        digest = hashlib.sha256(
            json.dumps(data, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
        prov = f"config_sha256={digest} seed={seed} package=kamdnlw-{__version__}"
        if args.command == "nonexistence":
            artifacts = _cmd_nonexistence(cfg, seed, threads, prov, args.mode)
        else:
            artifacts = _COMMANDS[args.command](cfg, seed, threads, prov)
    except (ConfigError, ModelError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NewtonDivergenceError, NormalFormError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL

    os.makedirs(args.out, exist_ok=True)
    sidecar = {
        "command": args.command,
        "config_sha256": digest,
        "seed": seed,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "artifacts": sorted(artifacts),
    }
    for name, text in artifacts.items():
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)
    with open(os.path.join(args.out, "provenance.json"), "w") as fh:
        fh.write(json.dumps(sidecar, indent=1, sort_keys=True))
    for name in sorted(artifacts):
        print(os.path.join(args.out, name))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
