"""The four headline experiments.

Each runner splits its sweep into independent parameter points, evaluates
them (optionally in worker processes) and assembles rows in parameter
order, so the output does not depend on the worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..bogoliubov import SymplecticState, beta_apply
from ..correlations import hartree_projector, reduced_density, trace_distance
from ..errors import ConfigError
from ..fock.basis import build_basis
from ..fock.io import save as save_vector
from ..fock.operators import create, weyl_apply
from ..fock.states import hermite_state, required_n_max
from ..fock.vector import FockVector, LadderConvention
from ..hamiltonian import QuadraticGenerator, assemble_h_epsilon
from ..nls import NlsTrajectory, nls_evolve, omega_at
from ..propagate import evolve_autonomous, evolve_nonautonomous
from ..space import Field, Grid, inner_product, plane_wave
from .config import ExperimentConfig
from .invariants import (
    INEQUALITY_LENGTH,
    INEQUALITY_SITES,
    check_quartic_form_bound,
    check_diagonal_trace_bound,
    check_number_bound,
    gamma_n,
    hermite_from_coherent,
    diagonal_trace_ratio,
)
from .output import ExperimentResult
from .profiles import make_profile

RDM_TOL = 1e-10


def _pool_map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _grid(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg["grid.m"], cfg["grid.length"])


def initial_field(cfg: ExperimentConfig, mass: float | None = None) -> Field:
    return make_profile(_grid(cfg), cfg["init.profile"], cfg.params("init.params."),
                        cfg["init.mass"] if mass is None else mass, seed=cfg["init.seed"])


def sample_times(cfg: ExperimentConfig) -> list[float]:
    t_final = cfg["run.t_final"]
    times = cfg["run.sample_times"]
    times = [0.0, t_final] if times is None else sorted(set(float(t) for t in times))
    if any(t > t_final + 1e-12 for t in times):
        raise ConfigError(f"sample times {times} exceed run.t_final = {t_final}")
    return times


def trajectory(cfg: ExperimentConfig, phi0: Field) -> NlsTrajectory:
    return nls_evolve(phi0, cfg["run.t_final"], cfg["run.dt"], cfg["grid.laplacian"])


def _monotone_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _combine_losses(losses: Sequence[float]) -> float:
    # distances add, losses are squared distances
    return float(np.sum(np.sqrt(np.maximum(losses, 0.0)))) ** 2


# --- propagation of chaos -------------------------------------------------

def _chaos_point(args) -> dict:
    cfg, n = args
    start = time.perf_counter()
    grid = _grid(cfg)
    phi0 = initial_field(cfg, mass=1.0)
    traj = trajectory(cfg, phi0)
    conv = LadderConvention(1.0 / n, grid)
    basis = build_basis(grid.m, n, n, cfg["fock.max_states"])
    ham = assemble_h_epsilon(conv, basis, cfg["grid.laplacian"])
    psi = hermite_state(conv, basis, phi0, n)
    rows, bad_rdm, loss, defects = [], [], 0.0, []
    t_prev = 0.0
    for t in sample_times(cfg):
        run = evolve_autonomous(ham, psi, t - t_prev, tol=cfg["krylov.tol"])
        psi, t_prev = run.state, t
        loss = _combine_losses([loss, run.cumulative_loss])
        defects.append(run.max_unitarity_defect)
        phit = traj.field_at(t)
        for k in cfg["chaos.k_list"]:
            if k > n:
                continue
            gamma = reduced_density(conv, psi, k)
            bad_rdm += [f"N={n} t={t:g} k={k}: {v}" for v in gamma.check(RDM_TOL)]
            rows.append((n, t, k, trace_distance(gamma, hartree_projector(phit, k)), loss))
    return {"n": n, "rows": rows, "dim": basis.dim, "bad_rdm": bad_rdm, "loss": loss,
            "defect": max(defects, default=0.0), "wall": time.perf_counter() - start}


def run_chaos(cfg: ExperimentConfig, workers: int = 1, out_dir: Path | None = None) -> ExperimentResult:
    """Trace distance between ``gamma_k`` of the evolved product state and the Hartree projector."""
    n_list = list(cfg["sweep.n_list"])
    if n_list != sorted(n_list):
        raise ConfigError("sweep.n_list must be ascending")
    res = ExperimentResult("chaos", ["N", "t", "k", "distance", "truncation_loss"],
                           truncation_budget=cfg["fock.truncation_budget"])
    for point in _pool_map(_chaos_point, [(cfg, n) for n in n_list], workers):
        res.rows += point["rows"]
        key = f"N={point['n']}"
        res.basis_sizes[key] = point["dim"]
        res.wall_times[key] = point["wall"]
        res.truncation_losses[key] = point["loss"]
        res.check(f"rdm_invariants[{key}]", not point["bad_rdm"], "; ".join(point["bad_rdm"]))
        res.check(f"unitarity[{key}]", point["defect"] <= 10 * cfg["krylov.tol"], value=point["defect"])
    t0 = [r[3] for r in res.rows if r[1] == 0.0]
    res.check("initial_distance_zero", all(d <= 1e-12 for d in t0), value=max(t0, default=0.0))
    t_last = sample_times(cfg)[-1]
    for k in cfg["chaos.k_list"]:
        series = [r[3] for r in res.rows if r[1] == t_last and r[2] == k]
        if len(series) > 1:
            res.check(f"decreasing_in_N[k={k}]", _monotone_decreasing(series),
                      " > ".join("%.4e" % d for d in series))
    by_point = {}
    for n, t, k, d, _ in res.rows:
        by_point.setdefault((n, t), {})[k] = d
    ok = all(ks[2] >= ks[1] - 1e-12 for ks in by_point.values() if 1 in ks and 2 in ks)
    res.check("k2_at_least_k1", ok)
    _budget_check(res)
    return res


def _budget_check(res: ExperimentResult) -> None:
    worst = max(res.truncation_losses.values(), default=0.0)
    res.check("truncation_budget", worst <= res.truncation_budget,
              f"worst cumulative loss {worst:.3e}", value=worst)


# --- shared pieces of the Hepp and CCR runs --------------------------------

def probe_state(label: str, conv: LadderConvention, basis) -> FockVector:
    """``vacuum`` or the normalized one-particle state in the lowest nonzero plane wave."""
    vac = FockVector.vacuum(basis)
    if label == "vacuum":
        return vac
    if label == "one_particle":
        out, _ = create(conv, plane_wave(conv.grid, 1), vac)
        return out.normalized()
    raise ConfigError(f"unknown test state {label!r}")


# --- Hepp (coherent-state) propagation -------------------------------------

def _u2_states(cfg: ExperimentConfig, traj: NlsTrajectory, times: list[float]) -> dict:
    """``U2(t, 0) Psi`` for every test state and sample time (epsilon independent)."""
    grid = traj.grid
    conv = LadderConvention(1.0, grid)
    basis = build_basis(grid.m, cfg["hepp.u2_n_max"], 0, cfg["fock.max_states"])
    family = QuadraticGenerator(conv, basis, cfg["grid.laplacian"])

    def gen(s):
        return family(traj.field_at(s))

    out = {}
    for label in cfg["hepp.states"]:
        psi = probe_state(label, conv, basis)
        for t in times:
            n_steps = cfg["hepp.n_steps"] or max(1, int(round(t / cfg["run.dt"])))
            run = evolve_nonautonomous(gen, psi, 0.0, t, n_steps, tol=cfg["krylov.tol"],
                                       freeze=cfg["hepp.freeze"])
            out[(label, t)] = (run.state, run.cumulative_loss)
    return out


def _hepp_point(args) -> dict:
    cfg, eps, u2 = args
    start = time.perf_counter()
    grid = _grid(cfg)
    phi0 = initial_field(cfg)
    traj = trajectory(cfg, phi0)
    conv = LadderConvention(eps, grid)
    mean = phi0.norm() ** 2 / eps
    n_max = cfg["fock.n_max"]
    if n_max is None:
        n_max = required_n_max(mean, cfg["fock.tail_threshold"]) + cfg["hepp.cutoff_margin"]
    basis = build_basis(grid.m, n_max, 0, cfg["fock.max_states"])
    ham = assemble_h_epsilon(conv, basis, cfg["grid.laplacian"])
    shift = np.sqrt(2.0) / (1j * eps)
    xi = make_profile(grid, cfg["hepp.observable.profile"], cfg.params("hepp.observable.params."),
                      cfg["hepp.observable.mass"])
    tol = cfg["krylov.tol"]
    rows, losses = [], {}
    for label in cfg["hepp.states"]:
        psi = probe_state(label, conv, basis)
        v1, l_start = weyl_apply(conv, phi0 * shift, psi, tol=tol, max_loss=np.inf)
        t_prev, acc = 0.0, l_start
        for t in sample_times(cfg):
            run = evolve_autonomous(ham, v1, t - t_prev, tol=tol)
            v1, t_prev = run.state, t
            acc = _combine_losses([acc, run.cumulative_loss])
            u_small, l_u2 = u2[(label, t)]
            u_big, l_embed = u_small.embed(basis)
            w, l_w = weyl_apply(conv, traj.field_at(t) * shift, u_big, tol=tol, max_loss=np.inf)
            v2 = w * np.exp(1j * omega_at(traj, t) / eps)
            loss = _combine_losses([acc, l_u2, l_embed, l_w])
            obs, l_obs = weyl_apply(conv, xi, v1, tol=tol, max_loss=np.inf)
            target = np.exp(1j * np.sqrt(2.0) * inner_product(xi, traj.field_at(t)).real)
            obs_err = abs(v1.vdot(obs) - target)
            rows.append((eps, t, label, (v1 - v2).norm(), loss, obs_err))
            losses[f"eps={eps:g},{label},t={t:g}"] = loss
    return {"eps": eps, "rows": rows, "dim": basis.dim, "losses": losses,
            "wall": time.perf_counter() - start}


def run_hepp(cfg: ExperimentConfig, workers: int = 1, out_dir: Path | None = None) -> ExperimentResult:
    """Distance between the exact evolution of a displaced state and its
    mean-field + quadratic-fluctuation approximation."""
    eps_list = list(cfg["sweep.epsilon_list"])
    if eps_list != sorted(eps_list, reverse=True):
        raise ConfigError("sweep.epsilon_list must be descending")
    res = ExperimentResult("hepp", ["epsilon", "t", "state", "residual", "truncation_loss",
                                    "observable_error"],
                           truncation_budget=cfg["fock.truncation_budget"])
    start = time.perf_counter()
    phi0 = initial_field(cfg)
    traj = trajectory(cfg, phi0)
    times = sample_times(cfg)
    u2 = _u2_states(cfg, traj, times)
    res.wall_times["u2"] = time.perf_counter() - start
    res.basis_sizes["u2"] = next(iter(u2.values()))[0].basis.dim
    if out_dir is not None:
        ckpt = Path(out_dir) / "checkpoints"
        ckpt.mkdir(parents=True, exist_ok=True)
        for (label, t), (state, _) in u2.items():
            path = ckpt / f"u2_{label}_t{t:.6g}.fvec"
            save_vector(path, state, 1.0)
            res.artifacts.append(str(path.relative_to(out_dir)))
    for point in _pool_map(_hepp_point, [(cfg, e, u2) for e in eps_list], workers):
        res.rows += point["rows"]
        res.basis_sizes[f"eps={point['eps']:g}"] = point["dim"]
        res.wall_times[f"eps={point['eps']:g}"] = point["wall"]
        res.truncation_losses.update(point["losses"])
    zero = [r[3] for r in res.rows if r[1] == 0.0]
    res.check("initial_residual_zero", all(r <= 1e-8 for r in zero), value=max(zero, default=0.0))
    t_last = times[-1]
    if len(eps_list) > 1:
        for label in cfg["hepp.states"]:
            series = [r[3] for r in res.rows if r[1] == t_last and r[2] == label]
            res.check(f"residual_decreasing[{label}]", _monotone_decreasing(series),
                      " > ".join("%.4e" % v for v in series))
            obs = [r[5] for r in res.rows if r[1] == t_last and r[2] == label]
            res.check(f"observable_decreasing[{label}]", _monotone_decreasing(obs),
                      " > ".join("%.4e" % v for v in obs))
    _budget_check(res)
    return res


# --- Bogoliubov / CCR identity ---------------------------------------------

def _ccr_point(args) -> dict:
    cfg, n_steps = args
    start = time.perf_counter()
    grid = _grid(cfg)
    phi0 = initial_field(cfg)
    traj = trajectory(cfg, phi0)
    eps = cfg["ccr.epsilon"]
    conv = LadderConvention(eps, grid)
    basis = build_basis(grid.m, cfg["ccr.n_max"], 0, cfg["fock.max_states"])
    family = QuadraticGenerator(conv, basis, cfg["grid.laplacian"])

    def gen(s):
        return family(traj.field_at(s))

    xi = make_profile(grid, cfg["ccr.xi.profile"], cfg.params("ccr.xi.params."), cfg["ccr.xi.mass"])
    scale = 1.0 / (1j * np.sqrt(eps))
    tol, freeze = cfg["krylov.tol"], cfg["ccr.freeze"]
    rows, losses = [], {}
    for t in sample_times(cfg):
        if t == 0:
            continue
        xi_t = beta_apply(traj, SymplecticState.from_field(xi), 0.0, t, dt=t / n_steps).as_field()
        for label in cfg["ccr.states"]:
            psi = probe_state(label, conv, basis)
            back = evolve_nonautonomous(gen, psi, t, 0.0, n_steps, tol=tol, freeze=freeze)
            mid, l_w = weyl_apply(conv, xi * scale, back.state, tol=tol, max_loss=np.inf)
            fwd = evolve_nonautonomous(gen, mid, 0.0, t, n_steps, tol=tol, freeze=freeze)
            rhs, l_r = weyl_apply(conv, xi_t * scale, psi, tol=tol, max_loss=np.inf)
            loss = _combine_losses([back.cumulative_loss, l_w, fwd.cumulative_loss, l_r])
            rows.append((t, cfg["ccr.xi.profile"], label, n_steps, (fwd.state - rhs).norm(), loss))
            losses[f"n={n_steps},{label},t={t:g}"] = loss
    return {"n": n_steps, "rows": rows, "dim": basis.dim, "losses": losses,
            "wall": time.perf_counter() - start}


def run_ccr(cfg: ExperimentConfig, workers: int = 1, out_dir: Path | None = None) -> ExperimentResult:
    """Residual of ``U2 W(xi) U2* = W(beta xi)`` under step refinement."""
    steps = list(cfg["ccr.n_steps_list"])
    if steps != sorted(steps):
        raise ConfigError("ccr.n_steps_list must be ascending")
    res = ExperimentResult("ccr", ["t", "xi", "state", "n_steps", "residual", "truncation_loss"],
                           truncation_budget=cfg["fock.truncation_budget"])
    points = _pool_map(_ccr_point, [(cfg, n) for n in steps], workers)
    for point in points:
        res.rows += point["rows"]
        res.basis_sizes[f"n_steps={point['n']}"] = point["dim"]
        res.wall_times[f"n_steps={point['n']}"] = point["wall"]
        res.truncation_losses.update(point["losses"])
    if len(steps) > 1:
        t_last = sample_times(cfg)[-1]
        for label in cfg["ccr.states"]:
            series = [r[4] for r in res.rows if r[0] == t_last and r[2] == label]
            res.check(f"residual_decreasing[{label}]", _monotone_decreasing(series),
                      " > ".join("%.4e" % v for v in series))
    _budget_check(res)
    return res


# --- sampled inequalities and the Hermite reconstruction -------------------

def run_invariants(cfg: ExperimentConfig, workers: int = 1, out_dir: Path | None = None) -> ExperimentResult:
    res = ExperimentResult("invariants", ["check", "index", "value"])
    rng = np.random.default_rng(cfg["init.seed"])
    slack = cfg["invariants.slack"]
    samples = cfg["invariants.samples"]
    start = time.perf_counter()
    sampled = [
        check_diagonal_trace_bound(rng, samples, cfg["invariants.alpha_list"], slack),
        check_quartic_form_bound(rng, samples, slack),
        check_number_bound(rng, samples, slack),
    ]
    for chk in sampled:
        res.check(chk.name, chk.passed, f"{chk.ratios.size} samples, worst ratio {chk.worst:.4f}",
                  value=chk.worst)
        res.rows.append((chk.name, chk.ratios.size, chk.worst))
    # closed-form case: symmetrized pair of plane waves on the inequality grid
    grid = Grid(INEQUALITY_SITES, INEQUALITY_LENGTH)
    x = grid.x
    k1, k2 = 2.0 * np.pi * 1 / grid.length, 2.0 * np.pi * 3 / grid.length
    pair = np.exp(1j * (k1 * x[:, None] + k2 * x[None, :])) + np.exp(1j * (k2 * x[:, None] + k1 * x[None, :]))
    margin = min(1.0 - diagonal_trace_ratio(pair, grid, a) for a in cfg["invariants.alpha_list"])
    res.check("diagonal_trace_plane_pair", margin > 0, value=margin)
    res.rows.append(("diagonal_trace_plane_pair_margin", 1, margin))
    res.wall_times["inequalities"] = time.perf_counter() - start

    start = time.perf_counter()
    rgrid = _grid(cfg)
    phi0 = initial_field(cfg, mass=1.0)
    worst = 0.0
    for n in cfg["invariants.hermite_n_list"]:
        recon, target = hermite_from_coherent(rgrid, phi0, n, cfg["fock.tail_threshold"])
        err = (recon - target).norm()
        worst = max(worst, err)
        res.rows.append(("hermite_reconstruction", n, err))
    res.check("hermite_reconstruction", worst <= 1e-8, value=worst)
    n = cfg["invariants.gamma_n"]
    ratio = gamma_n(n) / (2.0 * np.pi * n) ** 0.25
    res.rows.append(("gamma_ratio", n, ratio))
    res.check("gamma_asymptotic", abs(ratio - 1.0) <= 0.05, f"n={n}", value=ratio)
    r4 = gamma_n(4) / (8.0 * np.pi) ** 0.25
    res.rows.append(("gamma_ratio", 4, r4))
    res.check("gamma_asymptotic_n4", abs(r4 - 1.0) <= 0.10, value=r4)
    res.wall_times["hermite"] = time.perf_counter() - start
    return res


RUNNERS = {
    "chaos": run_chaos,
    "hepp": run_hepp,
    "ccr": run_ccr,
    "invariants": run_invariants,
}
