"""Command-line experiment runner and verification harness.

Tables go to ``--out`` (or stdout); human-readable progress goes to stderr.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .boolean_functions import BiasHypothesis, TruthTable
from .caps import CapExceededError, max_enum, max_qubits, max_tcopy_dim
from .discrimination import (
    DegenerateHypothesesWarning,
    bayes_error_mu,
    chernoff_bound,
    chernoff_information,
    exact_bayes_error,
    queries_needed,
    run_multi_query_experiment,
    run_single_copy_experiment,
)
from .ensemble import (
    collective_trace_distance,
    densify,
    ensemble_brute_force,
    ensemble_closed_form,
    frobenius,
    t_copy_ensemble_brute,
    tensor_power,
    trace_distance_closed,
)
from .statevector import address_state, fidelity_pure, probe_and_query

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_EPSILONS = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    n_qubits: int | None = None
    m0: int | None = None
    m1: int | None = None
    t: list[int] = field(default_factory=lambda: [1])
    trials: int = 10_000
    epsilon: list[float] | None = None
    delta: float = 0.05
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1
    max_n: int = 4
    closed: bool = False
    inject_fault: bool = False

    @property
    def N(self) -> int:
        if self.n_qubits is None:
            raise UsageError(f"{self.command}: --n-qubits is required")
        return 1 << self.n_qubits

    def hypotheses(self) -> tuple[BiasHypothesis, BiasHypothesis]:
        if self.m0 is None or self.m1 is None:
            raise UsageError(f"{self.command}: --m0 and --m1 are required")
        return BiasHypothesis(self.N, self.m0), BiasHypothesis(self.N, self.m1)

    def validate(self) -> None:
        if self.n_qubits is not None and not 1 <= self.n_qubits <= max_qubits():
            raise UsageError(f"--n-qubits must lie in [1, {max_qubits()}], got {self.n_qubits}")
        if self.trials < 1:
            raise UsageError(f"--trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise UsageError(f"--seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise UsageError(f"--workers must be >= 1, got {self.workers}")
        if any(t < 1 for t in self.t):
            raise UsageError(f"--t values must be >= 1, got {self.t}")


# --- output -------------------------------------------------------------------


def format_value(value: Any) -> str:
    """CSV cell text; floats keep 17 significant digits so they round-trip."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else format_value(value)
    return value


def render_table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: _json_value(v) for k, v in row.items()} for row in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([format_value(v) for v in row.values()])
    return buf.getvalue()


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- commands -----------------------------------------------------------------


def cmd_single(cfg: ExperimentConfig) -> int:
    h0, h1 = cfg.hypotheses()
    if h0.mu_sq_exact == h1.mu_sq_exact:
        _log(f"warning: m0={h0.m} and m1={h1.m} have equal mu^2; chance-level discrimination")
    report = run_single_copy_experiment(h0, h1, cfg.trials, cfg.seed, cfg.workers)
    row = {
        "N": h0.N,
        "m0": h0.m,
        "m1": h1.m,
        "trace_distance": trace_distance_closed(h0, h1),
        "theoretical_success": report.theoretical_success,
        "empirical_success": report.empirical_success,
        "half_width_3sigma": report.confidence_half_width,
        "trials": report.trials,
        "seed": report.seed,
        "within_ci": report.within_ci,
    }
    write_output(render_table([row], cfg.fmt), cfg.out)
    return EXIT_OK if report.within_ci else EXIT_FAIL


def cmd_multi(cfg: ExperimentConfig) -> int:
    h0, h1 = cfg.hypotheses()
    if h0.mu_sq_exact == h1.mu_sq_exact:
        _log(f"warning: m0={h0.m} and m1={h1.m} have equal mu^2; the test is degenerate")
    rows = []
    ok = True
    for t in cfg.t:
        report = run_multi_query_experiment(h0, h1, t, cfg.trials, cfg.seed, cfg.workers)
        within = abs(report.empirical_error - report.exact_error) <= report.confidence_half_width
        ok = ok and within and report.bound_holds
        rows.append(
            {
                "N": h0.N,
                "m0": h0.m,
                "m1": h1.m,
                "t": t,
                "k_star": report.k_star,
                "degenerate": report.degenerate,
                "exact_error": report.exact_error,
                "chernoff_xi": report.xi,
                "chernoff_bound": report.chernoff_bound,
                "empirical_error": report.empirical_error,
                "half_width_3sigma": report.confidence_half_width,
                "trials": report.trials,
                "seed": report.seed,
                "within_ci": within,
                "bound_holds": report.bound_holds,
            }
        )
    write_output(render_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def epsilon_grid(cfg: ExperimentConfig) -> list[float]:
    return list(cfg.epsilon) if cfg.epsilon else list(DEFAULT_EPSILONS)


def cmd_scan(cfg: ExperimentConfig) -> int:
    rows = []
    ok = True
    for eps in epsilon_grid(cfg):
        t = queries_needed(eps, cfg.delta)
        mu_sq1 = 4.0 * eps * eps
        exact = bayes_error_mu(0.0, mu_sq1, t)
        bound = chernoff_bound(t, chernoff_information(0.0, mu_sq1).xi)
        row_ok = exact <= cfg.delta and exact <= bound * (1 + 1e-12)
        ok = ok and row_ok
        rows.append(
            {
                "epsilon": eps,
                "mu_sq1": mu_sq1,
                "delta": cfg.delta,
                "t_needed": t,
                "exact_error": exact,
                "chernoff_bound": bound,
                "ok": row_ok,
            }
        )
    write_output(render_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_chernoff(cfg: ExperimentConfig) -> int:
    N = cfg.N
    rows = []
    for m0 in range(N + 1):
        for m1 in range(N + 1):
            h0, h1 = BiasHypothesis(N, m0), BiasHypothesis(N, m1)
            res = chernoff_information(h0.mu_sq, h1.mu_sq)
            rows.append(
                {
                    "N": N,
                    "m0": m0,
                    "m1": m1,
                    "mu_sq0": h0.mu_sq,
                    "mu_sq1": h1.mu_sq,
                    "s_star": res.s_star,
                    "xi": res.xi,
                    "boundary_case": res.boundary_case,
                }
            )
    write_output(render_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK


def render_matrix(rho: np.ndarray, fmt: str, meta: dict) -> str:
    if fmt == "json":
        payload = {k: _json_value(v) for k, v in meta.items()}
        payload["matrix"] = [[[float(z.real), float(z.imag)] for z in row] for row in rho]
        return json.dumps(payload) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rho:
        writer.writerow([f"{format_value(float(z.real))},{format_value(float(z.imag))}" for z in row])
    return buf.getvalue()


def cmd_ensemble(cfg: ExperimentConfig) -> int:
    N = cfg.N
    if cfg.m0 is None:
        raise UsageError("ensemble: --m0 (class weight) is required")
    h = BiasHypothesis(N, cfg.m0)
    rho = densify(ensemble_closed_form(h)) if cfg.closed else ensemble_brute_force(N, h.m)
    meta = {"N": N, "m": h.m, "mu_sq": h.mu_sq, "source": "closed_form" if cfg.closed else "brute_force"}
    write_output(render_matrix(rho, cfg.fmt, meta), cfg.out)
    return EXIT_OK


def cmd_collective(cfg: ExperimentConfig) -> int:
    h0, h1 = cfg.hypotheses()
    N = h0.N
    t_max = max(cfg.t)
    if N**t_max > max_tcopy_dim():
        raise UsageError(f"collective: {N}^{t_max} = {N**t_max} exceeds the t-copy cap {max_tcopy_dim()}")
    xi = chernoff_information(h0.mu_sq, h1.mu_sq).xi
    rows = []
    for t in range(1, t_max + 1):
        D = collective_trace_distance(N, h0.m, h1.m, t)
        separable = exact_bayes_error(h0, h1, t)
        rows.append(
            {
                "N": N,
                "m0": h0.m,
                "m1": h1.m,
                "t": t,
                "dim": N**t,
                "collective_trace_distance": D,
                "collective_error": 0.5 * (1.0 - D),
                "separable_exact_error": separable,
                "chernoff_bound": chernoff_bound(t, xi),
            }
        )
    write_output(render_table(rows, cfg.fmt), cfg.out)
    return EXIT_OK


# --- verify -------------------------------------------------------------------

QUERY_TOL = 1e-12
CLOSED_FORM_TOL = 1e-12
EIGEN_TOL = 1e-10
COMMUTE_TOL = 1e-12
NONFACTOR_MIN = 0.01


def _check_query_identity(n: int) -> dict:
    N = 1 << n
    worst_residual = 0.0
    worst_infidelity = 0.0
    for value in range(1 << N):
        f = TruthTable.from_int(value, N)
        extracted, residual = probe_and_query(f)
        worst_residual = max(worst_residual, residual)
        worst_infidelity = max(worst_infidelity, 1.0 - fidelity_pure(extracted.amplitudes, address_state(f).amplitudes))
    value = max(worst_residual, worst_infidelity)
    return {"check": f"query_identity_n{n}", "value": value, "tolerance": QUERY_TOL, "passed": value <= QUERY_TOL}


def _check_closed_form(N: int, inject_fault: bool) -> dict:
    worst = 0.0
    for m in range(N + 1):
        if math.comb(N, m) > max_enum():
            continue
        brute = ensemble_brute_force(N, m)
        if inject_fault and m == 0:
            brute = brute.copy()
            brute[0, 0] += 1e-3
        worst = max(worst, frobenius(brute, densify(ensemble_closed_form(BiasHypothesis(N, m)))))
    return {"check": f"closed_form_N{N}", "value": worst, "tolerance": CLOSED_FORM_TOL, "passed": worst <= CLOSED_FORM_TOL}


def _check_eigen(N: int) -> list[dict]:
    mats = [densify(ensemble_closed_form(BiasHypothesis(N, m))) for m in range(N + 1)]
    eig_err = 0.0
    for m, rho in enumerate(mats):
        expected = ensemble_closed_form(BiasHypothesis(N, m)).eigenvalues()
        eig_err = max(eig_err, float(np.max(np.abs(np.linalg.eigvalsh(rho) - expected))))
    comm_err = 0.0
    for a in mats:
        for b in mats:
            comm_err = max(comm_err, float(np.max(np.abs(a @ b - b @ a))))
    return [
        {"check": f"eigenstructure_N{N}", "value": eig_err, "tolerance": EIGEN_TOL, "passed": eig_err <= EIGEN_TOL},
        {"check": f"commutation_N{N}", "value": comm_err, "tolerance": COMMUTE_TOL, "passed": comm_err <= COMMUTE_TOL},
    ]


def _check_nonfactorization() -> list[dict]:
    mixed = frobenius(t_copy_ensemble_brute(4, 1, 2), tensor_power(ensemble_brute_force(4, 1), 2))
    pure = frobenius(t_copy_ensemble_brute(4, 0, 2), tensor_power(ensemble_brute_force(4, 0), 2))
    return [
        {"check": "nonfactorization_N4_m1_t2", "value": mixed, "tolerance": NONFACTOR_MIN, "passed": mixed > NONFACTOR_MIN},
        {"check": "factorization_N4_m0_t2", "value": pure, "tolerance": CLOSED_FORM_TOL, "passed": pure <= CLOSED_FORM_TOL},
    ]


def _run_check(task) -> list[dict]:
    kind, arg, inject_fault = task
    if kind == "query":
        return [_check_query_identity(arg)]
    if kind == "closed":
        return [_check_closed_form(arg, inject_fault)]
    if kind == "eigen":
        return _check_eigen(arg)
    return _check_nonfactorization()


def verify_tasks(max_n: int, inject_fault: bool = False) -> list[tuple]:
    tasks: list[tuple] = [("query", n, False) for n in range(1, min(max_n, 3) + 1)]
    sizes = [1 << n for n in range(1, min(max_n, 4) + 1)]
    tasks += [("closed", N, inject_fault and i == 0) for i, N in enumerate(sizes)]
    tasks += [("eigen", N, False) for N in sizes]
    if max_n >= 2:
        tasks.append(("nonfactor", 4, False))
    return tasks


def cmd_verify(cfg: ExperimentConfig) -> int:
    if cfg.max_n < 1:
        raise UsageError(f"--max-n must be >= 1, got {cfg.max_n}")
    tasks = verify_tasks(cfg.max_n, cfg.inject_fault)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_run_check, tasks))
    else:
        results = [_run_check(task) for task in tasks]
    rows = [row for group in results for row in group]
    for row in rows:
        _log(f"{'PASS' if row['passed'] else 'FAIL'} {row['check']} value={format_value(row['value'])}")
    failures = [row["check"] for row in rows if not row["passed"]]
    write_output(render_table(rows, cfg.fmt), cfg.out)
    if failures:
        _log("failed checks: " + ", ".join(failures))
        return EXIT_FAIL
    _log(f"all {len(rows)} checks passed")
    return EXIT_OK


COMMANDS = {
    "single": cmd_single,
    "multi": cmd_multi,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "chernoff": cmd_chernoff,
    "ensemble": cmd_ensemble,
    "collective": cmd_collective,
}


# --- argument parsing ---------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int, default=1, help="worker processes")

    pair = argparse.ArgumentParser(add_help=False)
    pair.add_argument("--n-qubits", type=int, required=True, help="address qubits n (N = 2**n)")
    pair.add_argument("--m0", type=int, required=True, help="weight of hypothesis 0")
    pair.add_argument("--m1", type=int, required=True, help="weight of hypothesis 1")

    parser = argparse.ArgumentParser(prog="uqd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("single", parents=[common, pair], help="single-query Helstrom experiment")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("multi", parents=[common, pair], help="separable multi-query experiment")
    p.add_argument("--t", type=_int_list, default=[1], help="query count(s), comma-separated")
    p.add_argument("--trials", type=int, default=10_000)

    p = sub.add_parser("verify", parents=[common], help="oracle-equivalence suites")
    p.add_argument("--max-n", type=int, default=4, help="largest address-qubit count checked")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)

    p = sub.add_parser("scan", parents=[common], help="query count needed vs bias gap")
    p.add_argument("--epsilon", type=_float_list, default=None, help="bias gaps (default log grid)")
    p.add_argument("--delta", type=float, default=0.05, help="target error")

    p = sub.add_parser("chernoff", parents=[common], help="Chernoff information over weight pairs")
    p.add_argument("--n-qubits", type=int, required=True)

    p = sub.add_parser("ensemble", parents=[common], help="dump an induced ensemble matrix")
    p.add_argument("--n-qubits", type=int, required=True)
    p.add_argument("--m0", type=int, required=True, help="class weight")
    p.add_argument("--closed", action="store_true", help="dump the closed form instead of the brute-force average")

    p = sub.add_parser("collective", parents=[common, pair], help="t-copy trace distances")
    p.add_argument("--t", type=_int_list, default=[2], help="largest copy count")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    values = {k: v for k, v in vars(args).items() if k in known}
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateHypothesesWarning)
            return COMMANDS[cfg.command](cfg)
    except (UsageError, CapExceededError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"uqd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
