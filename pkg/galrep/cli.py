# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Command-line front end: hypothesis checks, local calculators, cohomology and the suites."""

import logging
from collections.abc import Sequence
from typing import Any

import click
from pydantic import TypeAdapter, ValidationError

from galrep import config as config_module
from galrep.cohom import CohomologyReport, VanishingWitness, h1_bruteforce, h2_bruteforce, vanishing_criterion
from galrep.ecq import Curve, check_hypotheses
from galrep.errors import EXIT_OK, EXIT_USAGE, EXIT_VIOLATED, CapExceeded, GalrepError, InvalidParams, ModelInvariantError
from galrep.grpmod import GModule, borel, gl2, is_irreducible
from galrep.localmodel import (
    LocalH0Report,
    OrdinaryModel,
    PotentiallyGoodModel,
    SupersingularModel,
    TateModel,
    bound_dim_image,
    ordinary_h0,
    potentially_good_h0,
    supersingular_h0,
    tate_h0,
)
from galrep.suites import SUITES, run_suite
from galrep.utils.params import parse_key_values, stamp, write_report
from galrep.utils.typing import ReportEnvelope, TraceStep
from galrep.zring import ModularMatrix, Modulus

FORMAT_OPTION = click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "json"]),
    default="text",
    show_default=True,
    help="Report format written to stdout",
)
OUTPUT_OPTION = click.option(
    "--output",
    default=None,
    type=click.Path(dir_okay=False),
    help="Also write the JSON report to this file",
)

_IMAGE_ADAPTER = TypeAdapter(list[list[list[int]]])


class _ReportingGroup(click.Group):
    """Maps library errors to their exit status and usage errors to 64."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = EXIT_USAGE
            raise
        except GalrepError as exc:
            logging.debug(f"{type(exc).__name__} raised", exc_info=True)
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)


# =============================================================================
# Output helpers
# =============================================================================


def _flatten(value: Any, prefix: str = "") -> list[str]:
    if isinstance(value, dict):
        lines = []
        for key, item in value.items():
            lines.extend(_flatten(item, f"{prefix}.{key}" if prefix else str(key)))
        return lines
    if isinstance(value, list) and value and all(isinstance(item, dict) for item in value):
        lines = []
        for i, item in enumerate(value):
            lines.extend(_flatten(item, f"{prefix}[{i}]"))
        return lines
    return [f"{prefix}: {value}"]


def _render_text(envelope: ReportEnvelope, headline: list[str]) -> str:
    lines = [*headline, ""]
    lines += _flatten(envelope.result)
    if envelope.trace:
        lines.append("trace:")
        lines += [f"  [{step.key}] {step.statement}" for step in envelope.trace]
    lines.append(f"exit status: {envelope.exit_status}")
    return "\n".join(lines)


def _emit(
    envelope: ReportEnvelope,
    output_format: str,
    output: str | None,
    headline: list[str],
) -> None:
    envelope = stamp(envelope)
    if output_format == "json":
        click.echo(envelope.to_json())
    else:
        click.echo(_render_text(envelope, headline))
    if output:
        write_report(envelope, output)


@click.group(cls=_ReportingGroup)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Logging level (defaults to GALREP_LOG_LEVEL or WARNING)",
)
def cli(log_level: str | None) -> None:
    """Exact computations on symmetric powers of E[p^n] and class-group hypotheses."""
    cfg = config_module.reload_config()
    level = (log_level or cfg.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


# =============================================================================
# check
# =============================================================================


@cli.command()
@click.option("--curve", "curve_text", required=True, help="Weierstrass coefficients a1,a2,a3,a4,a6")
@click.option("--p", "p", type=int, required=True, help="Prime p ≥ 5")
@click.option("--j", "j", type=int, required=True, help="Weight 1 ≤ j ≤ p-2")
@click.option("--sha-dim", type=click.IntRange(min=0), default=None, help="Sha dimension, supplied by the user and never inferred")
@click.option("--aux-bound", type=int, default=None, help="Largest auxiliary prime for the image sieve")
@FORMAT_OPTION
@OUTPUT_OPTION
@click.pass_context
def check(
    ctx: click.Context,
    curve_text: str,
    p: int,
    j: int,
    sha_dim: int | None,
    aux_bound: int | None,
    output_format: str,
    output: str | None,
) -> None:
    """Check hypotheses (a′)-(d′) for a curve and report the conditional conclusion."""
    curve = Curve.parse(curve_text)
    report = check_hypotheses(curve, p, j, sha_dim=sha_dim, aux_bound=aux_bound)
    envelope = ReportEnvelope(
        command="check",
        inputs={"curve": list(curve.coefficients), "p": p, "j": j, "sha_dim": sha_dim, "aux_bound": report.aux_bound},
        result=report.model_dump(mode="json", exclude={"trace"}),
        trace=report.trace,
        exit_status=report.exit_status,
    )
    headline = [f"curve {curve}, p={p}, j={j}"]
    headline += [f"({v.hypothesis}) {v.status}: {v.evidence}" for v in report.verdicts]
    if report.conclusion:
        headline.append(f"conclusion: {report.conclusion}")
    elif report.message:
        headline.append(f"conclusion withheld: {report.message}")
    _emit(envelope, output_format, output, headline)
    ctx.exit(report.exit_status)


# =============================================================================
# local
# =============================================================================


def _level_or_infinity(value: str | int | None) -> int | None:
    if value is None or str(value).strip().lower() in ("inf", "infinity", "none"):
        return None
    try:
        level = int(value)
    except ValueError as exc:
        raise InvalidParams(f"m must be a non-negative integer or 'inf', got {value!r}") from exc
    return level


def _parse_image(text: str | None, modulus: Modulus) -> tuple[ModularMatrix, ...]:
    if not text:
        return ()
    try:
        matrices = _IMAGE_ADAPTER.validate_json(text)
    except ValidationError as exc:
        raise InvalidParams(f"--image must be a JSON list of 2x2 integer matrices: {exc.errors()[0]['msg']}") from exc
    return tuple(ModularMatrix.from_rows(modulus, rows) for rows in matrices)


_INT_PARAMS = ("p", "n", "j", "t", "s")


def _merge_params(options: dict[str, Any], pairs: str | None) -> dict[str, Any]:
    """Overlay ``--params key=value`` pairs on the explicit options."""
    merged = dict(options)
    for key, value in parse_key_values(pairs).items():
        if key in _INT_PARAMS:
            try:
                merged[key] = int(value)
            except ValueError as exc:
                raise InvalidParams(f"parameter {key} must be an integer, got {value!r}") from exc
        elif key in ("m", "variant"):
            merged[key] = value
        else:
            raise InvalidParams(f"unknown model parameter {key!r}")
    return merged


def _local_report(model: str, params: dict[str, Any], method: str) -> LocalH0Report:
    p, n, j = params["p"], params["n"], params["j"]
    if model == "tate":
        return tate_h0(TateModel(p=p, n=n, j=j, t=params["t"], variant=params["variant"]), method)
    if model == "ss":
        return supersingular_h0(SupersingularModel(p=p, n=n, j=j), method)
    if model == "ordinary":
        m = None if params["cm"] else _level_or_infinity(params["m"])
        return ordinary_h0(OrdinaryModel(p=p, n=n, j=j, m=m, s=params["s"]), method)
    image = _parse_image(params["image"], Modulus(p, n))
    return potentially_good_h0(PotentiallyGoodModel(p=p, n=n, j=j, image=image), method)


@cli.command()
@click.option("--model", type=click.Choice(["tate", "ss", "ordinary", "potgood"]), required=True)
@click.option("--p", "p", type=int, default=None, help="Prime p ≥ 3")
@click.option("--n", "n", type=int, default=1, show_default=True, help="Level n of E[p^n]")
@click.option("--j", "j", type=int, default=None, help="Weight 1 ≤ j ≤ p-2")
@click.option("--t", "t", type=int, default=0, show_default=True, help="Tate: valuation of the Kummer image")
@click.option(
    "--variant",
    type=click.Choice(["Split", "NonSplit", "AdditiveRamifiedTwist"]),
    default="Split",
    show_default=True,
    help="Tate: reduction variant",
)
@click.option("--m", "m", default="inf", show_default=True, help="Ordinary: diagonalizability level, or 'inf'")
@click.option("--s", "s", type=int, default=0, show_default=True, help="Ordinary: level of ψ(Frob)^j ≡ 1")
@click.option("--cm", is_flag=True, default=False, help="Ordinary: CM curve, so m is infinite")
@click.option("--image", default=None, help="Potgood: JSON list of 2x2 generator matrices")
@click.option("--params", "pairs", default=None, help="Comma-separated KEY=VALUE model parameters")
@click.option(
    "--method",
    type=click.Choice(["closed", "brute", "both"]),
    default="closed",
    show_default=True,
    help="Closed form, kernel computation, or both with an agreement check",
)
@FORMAT_OPTION
@OUTPUT_OPTION
@click.pass_context
def local(
    ctx: click.Context,
    model: str,
    p: int | None,
    n: int,
    j: int | None,
    t: int,
    variant: str,
    m: str,
    s: int,
    cm: bool,
    image: str | None,
    pairs: str | None,
    method: str,
    output_format: str,
    output: str | None,
) -> None:
    """H^0 of a local model at level n and of its limit."""
    params = _merge_params(
        {"p": p, "n": n, "j": j, "t": t, "variant": variant, "m": m, "s": s, "cm": cm, "image": image},
        pairs,
    )
    if params["p"] is None or params["j"] is None:
        raise InvalidParams("--p and --j are required (directly or through --params)")

    if method == "both":
        report = _local_report(model, params, "closed")
        brute = _local_report(model, params, "brute")
        if not report.agrees_with(brute):
            raise ModelInvariantError(
                f"closed form {report.level_structure} disagrees with kernel computation {brute.level_structure}"
            )
    else:
        report = _local_report(model, params, method)
        brute = None

    result = report.model_dump(mode="json", exclude={"trace"})
    result["level_structure_text"] = str(report.level_structure)
    result["limit_finite_text"] = str(report.limit_finite)
    trace = list(report.trace)
    if brute is not None:
        result["cross_check"] = {"method": "brute", "level_structure": str(brute.level_structure), "agrees": True}
    if report.case is not None:
        bound = bound_dim_image(report.case, params["j"], report.limit_quotient_dim, report.h0_v_dim)
        result["bound"] = bound.model_dump(mode="json", exclude={"trace"})
        trace += bound.trace

    envelope = ReportEnvelope(
        command="local",
        inputs={"model": model, **{k: v for k, v in params.items() if v is not None}, "method": method},
        result=result,
        trace=trace,
        exit_status=EXIT_OK,
    )
    headline = [
        f"{model} model {report.params}",
        f"H^0 at level {params['n']}: {report.level_structure}",
        f"limit: (Q_p/Z_p)^{report.limit_divisible_rank} ⊕ {report.limit_finite}",
        f"dim H^0(A)/p = {report.limit_quotient_dim}, dim H^0(V) = {report.h0_v_dim}",
    ]
    if brute is not None:
        headline.append("closed form and kernel computation agree")
    _emit(envelope, output_format, output, headline)
    ctx.exit(EXIT_OK)


# =============================================================================
# cohomology
# =============================================================================


def _with_witness(report: CohomologyReport, witness: VanishingWitness | None, h2_from_witness: bool) -> CohomologyReport:
    update: dict[str, Any] = {"witness": witness.model_dump() if witness else None}
    if h2_from_witness:
        update["h2"] = 0
    try:
        return CohomologyReport.model_validate({**report.model_dump(), **update})
    except ValidationError as exc:
        raise ModelInvariantError(f"cohomology report is inconsistent: {exc.errors()[0]['msg']}") from exc


@cli.command()
@click.option("--group", "group_name", type=click.Choice(["gl2", "borel"]), default="gl2", show_default=True)
@click.option("--p", "p", type=int, required=True, help="Prime p ≥ 3")
@click.option("--sym", "sym", type=click.IntRange(min=0), required=True, help="Symmetric power j")
@click.option("--twist", type=int, default=0, show_default=True, help="Twist by det^i")
@click.option("--h2", is_flag=True, default=False, help="Also compute H^2")
@click.option(
    "--method",
    type=click.Choice(["tree", "pairs"]),
    default="tree",
    show_default=True,
    help="Cocycle system for H^1",
)
@FORMAT_OPTION
@OUTPUT_OPTION
@click.pass_context
def cohomology(
    ctx: click.Context,
    group_name: str,
    p: int,
    sym: int,
    twist: int,
    h2: bool,
    method: str,
    output_format: str,
    output: str | None,
) -> None:
    """H^1 (and optionally H^2) of Sym^j F_p^2 ⊗ det^i, with a vanishing witness."""
    group = gl2(p) if group_name == "gl2" else borel(p)
    module = GModule.symmetric_power(group, sym, twist=twist)
    witness = vanishing_criterion(group, module)
    irreducible = is_irreducible(module)

    h2_source = None
    if h2 and group.order() <= config_module.config.h2_cap:
        report = h2_bruteforce(group, module)
        h2_source = "cochains"
    elif h2 and witness is not None:
        report = h1_bruteforce(group, module, method=method)
        h2_source = "vanishing witness"
    elif h2:
        raise CapExceeded(
            f"|{group.name}| = {group.order()} exceeds the H^2 cap {config_module.config.h2_cap} "
            "and no vanishing witness was found"
        )
    else:
        report = h1_bruteforce(group, module, method=method)
    report = _with_witness(report, witness, h2_source == "vanishing witness")

    result = report.model_dump(mode="json")
    result["irreducible"] = irreducible
    result["h2_source"] = h2_source
    trace = []
    if witness is not None:
        trace.append(
            TraceStep(
                key="central-vanishing",
                statement=f"{witness.description} is normal of order prime to p with no invariants, so H^i = 0",
                values={"order": witness.order},
            )
        )
    envelope = ReportEnvelope(
        command="cohomology",
        inputs={"group": group_name, "p": p, "sym": sym, "twist": twist, "h2": h2, "method": method},
        result=result,
        trace=trace,
        exit_status=EXIT_OK,
    )
    headline = [
        f"H^1({report.group}, {report.module}) = {report.h1}  (z1={report.z1}, b1={report.b1}, |G|={report.order})",
        f"witness: {witness.description if witness else 'none'}; irreducible: {irreducible}",
    ]
    if report.h2 is not None:
        headline.append(f"H^2 = {report.h2} (from {h2_source})")
    _emit(envelope, output_format, output, headline)
    ctx.exit(EXIT_OK)


# =============================================================================
# verify
# =============================================================================


@cli.command()
@click.option(
    "--suite",
    type=click.Choice(["all", *SUITES]),
    default="all",
    show_default=True,
    help="Which verification suite to run",
)
@FORMAT_OPTION
@OUTPUT_OPTION
@click.pass_context
def verify(ctx: click.Context, suite: str, output_format: str, output: str | None) -> None:
    """Run the verification suites and print pass/fail counts."""
    report = run_suite(suite)  # type: ignore[arg-type]
    status = EXIT_OK if report.ok else EXIT_VIOLATED
    envelope = ReportEnvelope(
        command="verify",
        inputs={"suite": suite},
        result={"passed": report.passed, "failed": report.failed},
        exit_status=status,
    )
    if output_format == "json":
        envelope.result["checks"] = [c.model_dump() for c in report.checks]
        _emit(envelope, output_format, output, [])
    else:
        for c in report.checks:
            line = f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.seconds:.2f}s)"
            click.echo(line if c.passed else f"{line}: {c.detail}")
        click.echo(f"passed: {report.passed}, failed: {report.failed}")
        if output:
            envelope.result["checks"] = [c.model_dump() for c in report.checks]
            write_report(stamp(envelope), output)
    ctx.exit(status)


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point; returns the process exit status."""
    try:
        status = cli.main(args=list(argv) if argv is not None else None, prog_name="galrep", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE if isinstance(exc, click.UsageError) else exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_VIOLATED
    except GalrepError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    return status if isinstance(status, int) else EXIT_OK
