"""Command line front end.

Every command is deterministic given its flags: the same invocation with the
same ``--seed`` produces byte-identical output.  JSON payloads carry reals
with 17 significant digits, CSV with 12.  Failures exit non-zero after
printing a single-line JSON object with an ``error_code`` field on stderr.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import bell, hashing, locc, qstate, recurrence
from .errors import DistilleryError

_JSON_SIG = 17
_CSV_SIG = 12


def _json_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return qstate.format_real(float(value), _JSON_SIG)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        items = ",".join(f"{json.dumps(str(k))}:{_json_value(v)}" for k, v in value.items())
        return "{" + items + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _emit_json(doc, out=None) -> None:
    text = _json_value(doc)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _csv_real(x: float) -> str:
    return qstate.format_real(float(x), _CSV_SIG)


def _complex_matrix_doc(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _fail(code: str, message: str) -> None:
    line = _json_value({"error_code": code, "message": message})
    click.echo(line, err=True)
    sys.exit(1)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DistilleryError as exc:
            _fail(exc.code, str(exc))
        except ValueError as exc:
            _fail("invalid_argument", str(exc))

    return wrapper


def _load_state(path: str) -> qstate.DensityOperator:
    with open(path) as fh:
        return qstate.state_from_json(fh.read())


def _write_state(rho: qstate.DensityOperator, out: str | None) -> None:
    text = qstate.state_to_json(rho)
    if out is None or out == "-":
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


@click.group()
def main() -> None:
    """Exact two-qubit distillation toolkit: states, twirls, recurrence, hashing."""


@main.command("state")
@click.argument("kind", type=click.Choice(["bell", "werner", "psiplus", "file"]))
@click.option("--F", "fidelity", type=float, default=None, help="Werner fidelity.")
@click.option("--label", type=int, default=0, help="Bell label 0..3.")
@click.option("--d", "dim", type=int, default=2, help="Local dimension for psiplus.")
@click.option("--in", "path", type=str, default=None, help="State file to round-trip.")
@click.option("--out", type=str, default=None, help="Output path (default stdout).")
@_guarded
def cmd_state(kind, fidelity, label, dim, path, out) -> None:
    """Emit a state as JSON: bell, werner, psiplus, or a re-serialized file."""
    if kind == "bell":
        rho = bell.bell_state(label).density()
    elif kind == "werner":
        if fidelity is None:
            raise ValueError("werner needs --F")
        rho = bell.werner(fidelity)
    elif kind == "psiplus":
        rho = qstate.max_entangled(dim).density()
    else:
        if path is None:
            raise ValueError("file needs --in")
        rho = _load_state(path)
    _write_state(rho, out)


@main.command("check")
@click.option("--in", "path", type=str, required=True, help="State file to inspect.")
@click.option("--out", type=str, default=None, help="Output path (default stdout).")
@_guarded
def cmd_check(path, out) -> None:
    """Entanglement diagnostics; two-qubit states also get fraction and verdict."""
    rho = _load_state(path)
    pt_min = float(np.linalg.eigvalsh(qstate.sym(qstate.partial_transpose(rho))).min())
    doc = {
        "dim_a": rho.dim_a,
        "dim_b": rho.dim_b,
        "ppt_min_eigenvalue": pt_min,
    }
    if (rho.dim_a, rho.dim_b) == (2, 2):
        diag = bell.two_qubit_diagnostics(rho)
        doc["fully_entangled_fraction"] = diag.fully_entangled_fraction
        doc["entangled"] = diag.entangled
    else:
        doc["fully_entangled_fraction"] = None
        doc["entangled"] = None
    _emit_json(doc, out)


@main.command("twirl")
@click.option("--in", "path", type=str, required=True)
@click.option("--out", type=str, default=None, help="Output path (default stdout).")
@click.option("--mode", type=click.Choice(["exact", "sampled"]), default="exact")
@click.option("--seed", type=int, default=0, show_default=True)
@_guarded
def cmd_twirl(path, out, mode, seed) -> None:
    """Twirl a two-qubit state to Werner form (or sample one protocol member)."""
    rho = _load_state(path)
    _write_state(bell.twirl(rho, mode=mode, seed=seed), out)


@main.command("recurrence")
@click.option("--F0", "f0", type=float, required=True)
@click.option("--F-target", "f_target", type=float, required=True)
@click.option("--max-steps", type=int, default=200, show_default=True)
@click.option("--out", type=str, default=None, help="CSV path (default stdout).")
@_guarded
def cmd_recurrence(f0, f_target, max_steps, out) -> None:
    """Closed-form recurrence schedule as CSV: step,F,p_step,p_cum_lower_bound."""
    trace = recurrence.iterate_to_target(f0, f_target, max_steps=max_steps)
    lines = ["step,F,p_step,p_cum_lower_bound"]
    cumulative = 1.0
    lines.append(f"0,{_csv_real(trace.fidelities[0])},{_csv_real(1.0)},{_csv_real(1.0)}")
    for k, p in enumerate(trace.step_probs, start=1):
        cumulative *= p
        lines.append(
            f"{k},{_csv_real(trace.fidelities[k])},{_csv_real(p)},{_csv_real(cumulative)}"
        )
    text = "\n".join(lines)
    if out is None or out == "-":
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


@main.group("hashing")
def cmd_hashing() -> None:
    """Classical hashing-protocol simulation."""


@cmd_hashing.command("simulate")
@click.option("--n", type=int, required=True, help="Pairs per trial.")
@click.option("--p0", type=float, required=True)
@click.option("--p1", type=float, required=True)
@click.option("--p2", type=float, required=True)
@click.option("--p3", type=float, required=True)
@click.option("--epsilon", type=float, default=None, help="Override the window width.")
@click.option("--r", "rounds", type=int, default=None, help="Override the round count.")
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=int, default=hashing.DEFAULT_DECODER_BUDGET, show_default=True)
@click.option(
    "--out",
    "out_format",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
    help="json: summary document; csv: per-trial table.",
)
@click.option("--trials-out", type=str, default=None, help="Also write the per-trial CSV here.")
@_guarded
def cmd_hashing_simulate(
    n, p0, p1, p2, p3, epsilon, rounds, trials, seed, budget, out_format, trials_out
) -> None:
    """Monte Carlo hashing runs with per-trial seeds derived from --seed."""
    raw = (p0, p1, p2, p3)
    total = sum(raw)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}; must be 1 within 1e-9")
    src = hashing.SourceDist(tuple(v / total for v in raw))
    plan = hashing.plan_yield(src, n, epsilon=epsilon, r=rounds)
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")

    results = [
        hashing.run_hashing_trial(src, plan, [seed, trial], budget=budget)
        for trial in range(trials)
    ]
    failures = sum(1 for t in results if not t.success)
    misses = sum(1 for t in results if not t.typical)
    q_hat = misses / trials
    z = 1.959963984540054
    denom = 1.0 + z * z / trials
    center = (q_hat + z * z / (2 * trials)) / denom
    radius = z * ((q_hat * (1 - q_hat) / trials + z * z / (4 * trials**2)) ** 0.5) / denom
    bound = hashing.failure_bound(src, plan, q_hat)

    csv_lines = ["trial,success,typical,parities_matched,candidates_visited"]
    for i, t in enumerate(results):
        csv_lines.append(
            f"{i},{int(t.success)},{int(t.typical)},{t.parities_matched},{t.candidates_visited}"
        )
    csv_text = "\n".join(csv_lines)
    if trials_out is not None:
        with open(trials_out, "w") as fh:
            fh.write(csv_text + "\n")

    summary = {
        "n": plan.n,
        "r": plan.r,
        "m": plan.m,
        "epsilon": plan.epsilon,
        "h": plan.h,
        "rate": plan.m / plan.n,
        "trials": trials,
        "seed": seed,
        "failures": failures,
        "failure_rate": failures / trials,
        "q_hat": q_hat,
        "q_upper": min(1.0, center + radius),
        "collision_term": bound.collision_term,
        "failure_bound": bound.total,
    }
    if out_format == "csv":
        click.echo(csv_text)
    else:
        _emit_json(summary)


@main.command("carve")
@click.option("--d", "dim", type=int, required=True)
@click.option("--omega", type=float, required=True)
@click.option("--verify", is_flag=True, help="Also simulate the channel exactly.")
@_guarded
def cmd_carve(dim, omega, verify) -> None:
    """Carving report for the d x d maximally entangled state."""
    report = locc.carve_pairs(dim, omega)
    doc = {
        "d": report.d,
        "omega": report.omega,
        "n_pairs": report.n_pairs,
        "kappa": report.kappa,
        "success_prob": report.success_prob,
        "success_prob_lower_bound": 1.0 - float(report.d) ** (report.omega - 1.0),
    }
    if verify:
        rho = qstate.max_entangled(report.d).density()
        outcome = locc.apply_selective(report.channel, rho)
        target = qstate.max_entangled(2**report.n_pairs).density()
        residual = float(np.abs(outcome.normalized().matrix - target.matrix).max())
        doc["simulated_success_prob"] = outcome.probability
        doc["output_residual"] = residual
    _emit_json(doc)


@main.command("search-projection")
@click.option("--in", "path", type=str, required=True)
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guarded
def cmd_search_projection(path, trials, seed) -> None:
    """Randomized local rank-2 projection search; reports the best witness."""
    rho = _load_state(path)
    witness = bell.search_projection_witness(rho, trials, seed=seed)
    doc = {
        "ppt_min_eigenvalue": witness.ppt_min_eigenvalue,
        "entangled": witness.ppt_min_eigenvalue < -bell.ENTANGLEMENT_TOL,
        "trial_index": witness.trial_index,
        "success_prob": witness.success_prob,
        "pi_a": _complex_matrix_doc(witness.pi_a),
        "pi_b": _complex_matrix_doc(witness.pi_b),
    }
    _emit_json(doc)


if __name__ == "__main__":
    main()
